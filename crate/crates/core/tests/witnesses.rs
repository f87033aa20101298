use jclass::lognum::{LogArgScalar, LogScalar, LogSignScalar};
use jclass::tuples::{MatrixTuple, TupleRecipe, DEFAULT_THETA};
use jclass::witness::{jset_membership, jset_witness, Construction, MembershipStatus};
use jclass::{Error, Execution};
use num_complex::Complex64;

#[test]
fn tri_complex_tampering_is_detected() {
    let t = MatrixTuple::<LogArgScalar>::build(&TupleRecipe::tri_complex(2, 2.0, DEFAULT_THETA)).unwrap();
    let y = [Complex64::new(1.5, -0.5), Complex64::new(-2.0, 1.0)];
    let seq = jset_witness(&t, Complex64::new(1.0, 0.0), &y, &[1e-1, 1e-2]).unwrap();
    seq.validate(&t).unwrap();
    assert!(matches!(seq.records[1].construction, Construction::Triangular { .. }));

    let mut bad = seq.clone();
    bad.records[1].point[1] = bad.records[1].point[1].scale_log(1e-7);
    assert!(matches!(bad.validate(&t), Err(Error::WitnessCheck(_))));

    let mut bad = seq.clone();
    bad.records[0].image[0] = bad.records[0].image[0].scale_log(1e-3);
    assert!(bad.validate(&t).is_err());
}

#[test]
fn tri_real_four_dimensional_sequence() {
    let t = MatrixTuple::<LogSignScalar>::build(&TupleRecipe::tri_real(4, 2.0)).unwrap();
    let y = [0.5, -1.0, 2.0, -3.0];
    let seq = jset_witness(&t, 1.0, &y, &[1e-1, 1e-2, 1e-3]).unwrap();
    seq.validate(&t).unwrap();
    let totals = seq.totals();
    assert!(totals.windows(2).all(|w| w[0] < w[1]));
    for r in &seq.records {
        assert!(r.image_error < 1e-1 && r.base_error < 1e-1);
    }
}

#[test]
fn witness_images_are_confirmed_by_the_prober() {
    let t = MatrixTuple::<LogSignScalar>::build(&TupleRecipe::diag_real(2, -0.5, 3.0)).unwrap();
    let seq = jset_witness(&t, 1.0, &[1.0, 5.0], &[0.05]).unwrap();
    let k = &seq.records[0].exponents;
    let v = jset_membership(&t, &[1.0, 0.0], &[1.0, 5.0], 0.05, 10, 80, Execution::Parallel).unwrap();
    assert_eq!(v.status, MembershipStatus::Confirmed);
    assert!(v.witness.unwrap().exponents.total() <= k.total());
}
