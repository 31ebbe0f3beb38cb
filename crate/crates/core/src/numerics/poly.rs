//! Dense complex polynomials stored as ascending coefficient vectors.

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(ZERO, |acc, c| acc * z + c)
}

/// Value and first derivative in one pass.
pub fn horner_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = ZERO;
    let mut dp = ZERO;
    for c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

pub fn derivative(coeffs: &[Complex64]) -> Vec<Complex64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * k as f64)
        .collect()
}

pub fn mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if *x == ZERO {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn sub(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| a.get(k).copied().unwrap_or(ZERO) - b.get(k).copied().unwrap_or(ZERO))
        .collect()
}

pub fn scale(a: &[Complex64], s: Complex64) -> Vec<Complex64> {
    a.iter().map(|c| c * s).collect()
}

/// Multiplies by `zeta` (prepends a zero coefficient).
pub fn shift(a: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.len() + 1);
    out.push(ZERO);
    out.extend_from_slice(a);
    out
}

/// `sum |c_k|`, an upper bound for `max_{|z| <= 1} |p(z)|`.
pub fn l1_norm(coeffs: &[Complex64]) -> f64 {
    coeffs.iter().map(|c| c.norm()).sum()
}

/// Drops trailing coefficients whose tail mass is below `tol` (absolute).
pub fn trim(coeffs: &[Complex64], tol: f64) -> Vec<Complex64> {
    let mut tail = 0.0;
    let mut keep = coeffs.len();
    while keep > 0 {
        let next = tail + coeffs[keep - 1].norm();
        if next > tol {
            break;
        }
        tail = next;
        keep -= 1;
    }
    coeffs[..keep].to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn product_and_derivative() {
        // (1 + z)(1 - z) = 1 - z^2
        let p = mul(&[c(1.0, 0.0), c(1.0, 0.0)], &[c(1.0, 0.0), c(-1.0, 0.0)]);
        assert_eq!(p, vec![c(1.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
        assert_eq!(derivative(&p), vec![c(0.0, 0.0), c(-2.0, 0.0)]);
        let z = c(0.3, -0.2);
        let (v, dv) = horner_with_derivative(&p, z);
        assert!((v - (1.0 - z * z)).norm() < 1e-15);
        assert!((dv + 2.0 * z).norm() < 1e-15);
    }

    #[test]
    fn trim_keeps_significant_head() {
        let p = vec![c(1.0, 0.0), c(0.5, 0.0), c(1e-20, 0.0), c(1e-21, 0.0)];
        assert_eq!(trim(&p, 1e-16).len(), 2);
        assert_eq!(trim(&p, 0.0).len(), 4);
        assert!(trim(&[c(0.0, 0.0)], 1e-30).is_empty());
    }

    #[test]
    fn shift_multiplies_by_zeta() {
        let p = vec![c(2.0, 1.0), c(0.0, 3.0)];
        let z = c(0.7, 0.1);
        assert!((horner(&shift(&p), z) - z * horner(&p, z)).norm() < 1e-15);
    }
}
