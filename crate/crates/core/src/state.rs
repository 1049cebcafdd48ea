//! Small helpers for fixed-length `f64` state vectors.
//!
//! Scalar problems use length-1 vectors. Every magnitude in the crate is the
//! infinity norm.

/// Largest absolute component. Empty slices have norm zero.
pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Component with the largest magnitude, sign kept.
pub fn dominant(v: &[f64]) -> f64 {
    v.iter()
        .copied()
        .fold(0.0_f64, |acc, x| if x.abs() > acc.abs() { x } else { acc })
}

/// `a - b` componentwise.
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `a + b` componentwise.
pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms() {
        assert_eq!(inf_norm(&[]), 0.0);
        assert_eq!(inf_norm(&[1.0, -3.0, 2.0]), 3.0);
        assert_eq!(dominant(&[1.0, -3.0, 2.0]), -3.0);
        assert_eq!(dominant(&[0.5]), 0.5);
    }

    #[test]
    fn arithmetic() {
        assert_eq!(sub(&[3.0, 1.0], &[1.0, 1.0]), vec![2.0, 0.0]);
        assert_eq!(add(&[3.0, 1.0], &[1.0, 1.0]), vec![4.0, 2.0]);
        assert!(all_finite(&[1.0, 2.0]));
        assert!(!all_finite(&[1.0, f64::NAN]));
    }
}
