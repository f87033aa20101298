//! Empirical probe: is a tuple whose spanning vectors all have full limit
//! sets hypercyclic?
//!
//! The probe gathers evidence only. Membership of sampled targets is tested
//! for each spanning vector, one orbit is sampled for density, and the
//! conclusion is a fixed function of that evidence and the recorded
//! thresholds.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::density::{density_report, DensityReport, MAX_CELLS};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::lognum::{FieldValue, LogScalar};
use crate::tuples::MatrixTuple;
use crate::witness::{jset_membership, orbit_points, MembershipStatus};

/// Rank tolerance relative to the largest entry.
pub const RANK_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeThresholds {
    /// Fraction of confirmed targets for a vector to count as J-universal.
    pub confirmed_fraction: f64,
    /// Coverage at or above which the orbit looks dense.
    pub yes_coverage: f64,
    /// Coverage below which the orbit looks not dense.
    pub no_coverage: f64,
}

impl Default for ProbeThresholds {
    fn default() -> Self {
        ProbeThresholds {
            confirmed_fraction: 0.9,
            yes_coverage: 0.9,
            no_coverage: 0.5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub samples: usize,
    pub seed: u64,
    pub delta: f64,
    /// Targets are uniform in `[-target_box, target_box]` per real coordinate.
    pub target_box: f64,
    pub growth_floor: u64,
    pub budget: u64,
    pub orbit_total: u64,
    /// Cap on the number of exponent vectors of the density orbit.
    pub max_orbit_points: u64,
    pub density_box: f64,
    pub grid_step: f64,
    pub thresholds: ProbeThresholds,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            samples: 100,
            seed: 1,
            delta: 0.1,
            target_box: 5.0,
            growth_floor: 1,
            budget: 60,
            orbit_total: 600,
            max_orbit_points: 2_000_000,
            density_box: 10.0,
            grid_step: 0.25,
            thresholds: ProbeThresholds::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProbeConclusion {
    ConsistentWithYes,
    ConsistentWithNo,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VectorSummary<V> {
    pub vector: Vec<V>,
    pub targets: usize,
    pub confirmed: usize,
    pub not_found: usize,
    pub confirmed_fraction: f64,
    /// Largest `min_distance_found` over the unconfirmed targets.
    pub worst_min_distance: f64,
    pub budget_used: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeReport<V> {
    pub seed: u64,
    pub config: ProbeConfig,
    pub spanning_set: Vec<Vec<V>>,
    pub per_vector: Vec<VectorSummary<V>>,
    /// Orbit of the first spanning vector.
    pub hypercyclicity_evidence: DensityReport,
    pub orbit_total_used: u64,
    pub conclusion: ProbeConclusion,
    pub reason: String,
}

/// The conclusion drawn from the evidence.
pub fn conclude<V>(
    per_vector: &[VectorSummary<V>],
    density: &DensityReport,
    t: &ProbeThresholds,
) -> (ProbeConclusion, String) {
    if per_vector.iter().any(|s| s.targets == 0) {
        return (ProbeConclusion::Inconclusive, "empty target sample".into());
    }
    if per_vector.iter().any(|s| s.confirmed_fraction < t.confirmed_fraction) {
        return (ProbeConclusion::Inconclusive, "spanning set not all J-universal".into());
    }
    if density.coverage >= t.yes_coverage {
        (
            ProbeConclusion::ConsistentWithYes,
            format!("orbit coverage {:.4} at least {}", density.coverage, t.yes_coverage),
        )
    } else if density.coverage < t.no_coverage {
        (
            ProbeConclusion::ConsistentWithNo,
            format!("orbit coverage {:.4} below {}", density.coverage, t.no_coverage),
        )
    } else {
        (
            ProbeConclusion::Inconclusive,
            format!("orbit coverage {:.4} between thresholds", density.coverage),
        )
    }
}

/// Rank of the rows over the complex numbers.
fn rank(rows: &[Vec<Complex64>]) -> usize {
    let mut a: Vec<Vec<Complex64>> = rows.to_vec();
    let cols = a.first().map_or(0, Vec::len);
    let scale = a.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0;
    }
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..a.len()).max_by(|&i, &j| a[i][c].norm().total_cmp(&a[j][c].norm())) else {
            break;
        };
        if a[p][c].norm() <= RANK_TOL * scale {
            continue;
        }
        a.swap(r, p);
        for i in r + 1..a.len() {
            let f = a[i][c] / a[r][c];
            for j in c..cols {
                let v = a[r][j];
                a[i][j] -= f * v;
            }
        }
        r += 1;
    }
    r
}

fn orbit_total_within(members: usize, want: u64, cap: u64) -> u64 {
    // number of exponent vectors with total <= t is C(t + m, m)
    let count = |t: u64| -> u64 {
        let mut c: u128 = 1;
        for i in 1..=members as u128 {
            c = c * (t as u128 + i) / i;
            if c > u64::MAX as u128 {
                return u64::MAX;
            }
        }
        c as u64
    };
    let mut t = want;
    while t > 0 && count(t) > cap {
        t -= 1;
    }
    t
}

/// Grid step no finer than `step` with at most [`MAX_CELLS`] cells.
fn effective_step(dim: usize, halfwidth: f64, step: f64) -> f64 {
    let per_axis = (MAX_CELLS as f64).powf(1.0 / dim as f64).floor().max(1.0);
    let need = (2.0 * halfwidth / step - 1e-9).ceil();
    if need <= per_axis {
        step
    } else {
        2.0 * halfwidth / per_axis
    }
}

pub fn probe_open_question<S: LogScalar>(
    tuple: &MatrixTuple<S>,
    spanning_set: &[Vec<S::Value>],
    cfg: &ProbeConfig,
    exec: Execution,
) -> Result<ProbeReport<S::Value>>
where
    S::Value: FieldValue,
{
    let n = tuple.dim();
    if spanning_set.iter().any(|v| v.len() != n) {
        return Err(Error::invalid(format!("spanning vectors need {n} coordinates")));
    }
    let rows: Vec<Vec<Complex64>> = spanning_set
        .iter()
        .map(|v| v.iter().map(|x| x.to_complex()).collect())
        .collect();
    if rank(&rows) < n {
        return Err(Error::invalid(format!("spanning set does not span a space of dimension {n}")));
    }
    if !tuple.is_invertible() {
        return Err(Error::invalid(format!("{} tuple has a singular member", tuple.recipe().kind())));
    }
    if !(cfg.target_box > 0.0) || !(cfg.density_box > 0.0) || !(cfg.grid_step > 0.0) {
        return Err(Error::invalid("boxes and grid step must be positive"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let targets: Vec<Vec<S::Value>> = (0..cfg.samples)
        .map(|_| (0..n).map(|_| S::Value::sample_box(&mut rng, cfg.target_box)).collect())
        .collect();

    let mut per_vector = Vec::with_capacity(spanning_set.len());
    for x in spanning_set {
        let verdicts = exec::map(exec, &targets, |y| {
            jset_membership(tuple, x, y, cfg.delta, cfg.growth_floor, cfg.budget, Execution::Sequential)
        });
        let mut s = VectorSummary {
            vector: x.clone(),
            targets: targets.len(),
            confirmed: 0,
            not_found: 0,
            confirmed_fraction: 0.0,
            worst_min_distance: 0.0,
            budget_used: 0,
        };
        for v in verdicts {
            let v = v?;
            s.budget_used += v.budget_used;
            match v.status {
                MembershipStatus::Confirmed => s.confirmed += 1,
                MembershipStatus::NotFoundWithinBudget => {
                    s.not_found += 1;
                    s.worst_min_distance = s.worst_min_distance.max(v.min_distance_found);
                }
            }
        }
        if s.targets > 0 {
            s.confirmed_fraction = s.confirmed as f64 / s.targets as f64;
        }
        per_vector.push(s);
    }

    let orbit_total_used = orbit_total_within(tuple.len(), cfg.orbit_total, cfg.max_orbit_points);
    if orbit_total_used < cfg.orbit_total {
        log::info!("density orbit total lowered from {} to {orbit_total_used}", cfg.orbit_total);
    }
    let orbit = orbit_points(tuple, &spanning_set[0], orbit_total_used, cfg.density_box, exec)?;
    let dim = n * S::Value::REAL_DIM;
    let points: Vec<Vec<f64>> = orbit
        .points
        .iter()
        .map(|p| {
            let mut c = Vec::with_capacity(dim);
            for v in &p.point {
                v.push_real_coords(&mut c);
            }
            c
        })
        .collect();
    let step = effective_step(dim, cfg.density_box, cfg.grid_step);
    if step != cfg.grid_step {
        log::info!("grid step coarsened from {} to {step}", cfg.grid_step);
    }
    let mut density = density_report(&points, dim, cfg.density_box, step, exec)?;
    density.points_overflowed += orbit.dropped_overflow;

    let (conclusion, reason) = conclude(&per_vector, &density, &cfg.thresholds);
    Ok(ProbeReport {
        seed: cfg.seed,
        config: *cfg,
        spanning_set: spanning_set.to_vec(),
        per_vector,
        hypercyclicity_evidence: density,
        orbit_total_used,
        conclusion,
        reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lognum::{LogArgScalar, LogSignScalar};
    use crate::tuples::TupleRecipe;

    fn quick() -> ProbeConfig {
        ProbeConfig {
            samples: 20,
            orbit_total: 200,
            ..ProbeConfig::default()
        }
    }

    #[test]
    fn diagonal_pair_premise_fails() {
        let t = MatrixTuple::<LogSignScalar>::build(&TupleRecipe::diag_real(2, -0.5, 3.0)).unwrap();
        let span = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let r = probe_open_question(&t, &span, &quick(), Execution::Parallel).unwrap();
        assert_eq!(r.conclusion, ProbeConclusion::Inconclusive);
        assert_eq!(r.reason, "spanning set not all J-universal");
        assert_eq!(r.per_vector[1].confirmed, 0);
    }

    #[test]
    fn kronecker_is_consistent_with_yes() {
        let t = MatrixTuple::<LogSignScalar>::build(&TupleRecipe::kronecker(1)).unwrap();
        let r = probe_open_question(&t, &[vec![1.0]], &ProbeConfig::default(), Execution::Parallel).unwrap();
        assert!(r.per_vector[0].confirmed_fraction >= 0.9, "{:?}", r.per_vector[0]);
        assert_eq!(r.conclusion, ProbeConclusion::ConsistentWithYes, "{}", r.reason);
    }

    #[test]
    fn empty_sample() {
        let t = MatrixTuple::<LogSignScalar>::build(&TupleRecipe::kronecker(1)).unwrap();
        let cfg = ProbeConfig {
            samples: 0,
            orbit_total: 50,
            ..ProbeConfig::default()
        };
        let r = probe_open_question(&t, &[vec![1.0]], &cfg, Execution::Sequential).unwrap();
        assert_eq!(r.conclusion, ProbeConclusion::Inconclusive);
        assert_eq!(r.reason, "empty target sample");
    }

    #[test]
    fn rank_deficient_span() {
        let t = MatrixTuple::<LogSignScalar>::build(&TupleRecipe::diag_real(2, -0.5, 3.0)).unwrap();
        let span = vec![vec![1.0, 2.0], vec![-2.0, -4.0]];
        assert!(matches!(
            probe_open_question(&t, &span, &quick(), Execution::Sequential),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn complex_rank_and_coarsening() {
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(rank(&[vec![one, i], vec![i, -one]]), 1);
        assert_eq!(rank(&[vec![one, i], vec![i, one]]), 2);
        assert_eq!(effective_step(2, 10.0, 0.25), 0.25);
        let h = effective_step(4, 10.0, 0.25);
        assert!(h > 0.25 && (20.0 / h).round().powi(4) <= MAX_CELLS as f64);
        let d = MatrixTuple::<LogArgScalar>::build(&TupleRecipe::diag_complex(
            2,
            Complex64::from_polar(0.5, 1.0),
            Complex64::from_polar(3.0, 2.0),
        ))
        .unwrap();
        let cfg = ProbeConfig {
            samples: 2,
            budget: 10,
            orbit_total: 20,
            ..ProbeConfig::default()
        };
        let r = probe_open_question(&d, &[vec![one, Complex64::new(0.0, 0.0)], vec![Complex64::new(0.0, 0.0), one]], &cfg, Execution::Parallel).unwrap();
        assert!(r.hypercyclicity_evidence.total_cells <= MAX_CELLS);
        assert_eq!(r.hypercyclicity_evidence.dimension, 4);
    }

    #[test]
    fn orbit_cap() {
        assert_eq!(orbit_total_within(2, 600, 2_000_000), 600);
        let t = orbit_total_within(3, 600, 2_000_000);
        assert!(t < 600 && (t + 1) * (t + 2) * (t + 3) / 6 <= 2_000_000);
    }

    #[test]
    fn conclusion_is_reproducible() {
        let t = MatrixTuple::<LogSignScalar>::build(&TupleRecipe::kronecker(1)).unwrap();
        let a = probe_open_question(&t, &[vec![1.0]], &quick(), Execution::Sequential).unwrap();
        let b = probe_open_question(&t, &[vec![1.0]], &quick(), Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
