//! Command-line value syntax.
//!
//! Vectors are comma-separated. Complex entries are written `re+imi`,
//! `re-imi` or `imi`, the form the tool prints.

use std::fs;

use jclass::lognum::FieldValue;
use jclass::tuples::TupleRecipe;
use num_complex::Complex64;

pub fn complex(s: &str) -> Result<Complex64, String> {
    let s = s.trim();
    let bad = || format!("cannot parse {s:?} as a number");
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    // the sign that starts the imaginary part is not an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        x => x,
    };
    let re: f64 = re.parse().map_err(|_| bad())?;
    let im: f64 = im.trim_start_matches('+').parse().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

pub fn value<V: FieldValue>(s: &str) -> Result<V, String> {
    let c = complex(s)?;
    V::from_complex(c).ok_or_else(|| format!("{s:?} is not a real number"))
}

pub fn vector<V: FieldValue>(s: &str) -> Result<Vec<V>, String> {
    if s.trim().is_empty() {
        return Err("empty vector".into());
    }
    s.split(',').map(value).collect()
}

pub fn reals(s: &str) -> Result<Vec<f64>, String> {
    vector(s)
}

/// `re,im` pair.
pub fn pair(s: &str) -> Result<Complex64, String> {
    match reals(s)?.as_slice() {
        [re, im] => Ok(Complex64::new(*re, *im)),
        _ => Err(format!("expected re,im, got {s:?}")),
    }
}

/// Vectors separated by `;`.
pub fn vectors<V: FieldValue>(s: &str) -> Result<Vec<Vec<V>>, String> {
    s.split(';').filter(|p| !p.trim().is_empty()).map(vector).collect()
}

/// Inline JSON or `@path`.
pub fn recipe(arg: &str) -> Result<TupleRecipe, String> {
    let text = match arg.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?,
        None => arg.to_string(),
    };
    let r: TupleRecipe = serde_json::from_str(&text).map_err(|e| format!("recipe: {e}"))?;
    Ok(r.canonical())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        assert_eq!(complex("1.5").unwrap(), Complex64::new(1.5, 0.0));
        assert_eq!(complex("-2e-3").unwrap(), Complex64::new(-2e-3, 0.0));
        assert_eq!(complex("1+2i").unwrap(), Complex64::new(1.0, 2.0));
        assert_eq!(complex("-1-i").unwrap(), Complex64::new(-1.0, -1.0));
        assert_eq!(complex("3i").unwrap(), Complex64::new(0.0, 3.0));
        assert_eq!(
            complex("1.0000000000000000e0-2.5000000000000000e-1i").unwrap(),
            Complex64::new(1.0, -0.25)
        );
        assert!(complex("x").is_err());
    }

    #[test]
    fn real_vectors_reject_complex_entries() {
        assert_eq!(vector::<f64>("1,-2.5").unwrap(), vec![1.0, -2.5]);
        assert!(vector::<f64>("1,2i").is_err());
        assert_eq!(vectors::<f64>("1,0;0,1").unwrap().len(), 2);
    }
}
