//! The objective `g(x) = xᵀAx` and first-order stationarity on the simplex.
//!
//! A point is a mode when `(Ax)_i = λ` on its support and `(Ax)_i ≤ λ`
//! elsewhere. Contracting the equality part with `x` forces `λ = xᵀAx`, so
//! that is the multiplier used everywhere, stationary or not.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::AffinityMatrix;
use crate::simplex::{support_of, SimplexVector, Support};
use crate::DEFAULT_EPS_SUPP;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    pub lambda: f64,
    pub residual: f64,
    pub is_mode: bool,
}

pub(crate) fn check_dims(a: &AffinityMatrix, x: &SimplexVector) -> Result<()> {
    if a.n() != x.len() {
        return Err(Error::invalid(format!(
            "matrix has n = {} but point has {} components",
            a.n(),
            x.len()
        )));
    }
    Ok(())
}

/// `xᵀAx`.
pub fn objective(a: &AffinityMatrix, x: &SimplexVector) -> Result<f64> {
    check_dims(a, x)?;
    Ok(a.quad_form(x.as_slice()))
}

pub fn kkt_check(a: &AffinityMatrix, x: &SimplexVector, eps_kkt: f64) -> Result<KktReport> {
    kkt_check_with_support(a, x, eps_kkt, DEFAULT_EPS_SUPP)
}

pub fn kkt_check_with_support(
    a: &AffinityMatrix,
    x: &SimplexVector,
    eps_kkt: f64,
    eps_supp: f64,
) -> Result<KktReport> {
    check_dims(a, x)?;
    if !(eps_kkt > 0.0) {
        return Err(Error::invalid(format!("eps_kkt must be positive, got {eps_kkt}")));
    }
    let ax = a.mul_vec(x.as_slice());
    let lambda = dot(x.as_slice(), &ax);
    let residual = full_residual(&ax, lambda, &support_of(x, eps_supp));
    Ok(KktReport {
        lambda,
        residual,
        is_mode: residual <= eps_kkt,
    })
}

/// `max( max_{i∈σ} |(Ax)_i − λ|, max_{i∉σ} ((Ax)_i − λ)⁺ )`.
pub(crate) fn full_residual(ax: &[f64], lambda: f64, support: &Support) -> f64 {
    ax.iter()
        .enumerate()
        .map(|(i, &w)| {
            if support.contains(i) {
                (w - lambda).abs()
            } else {
                (w - lambda).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// Equality part of the residual only: `max_{i∈σ} |(Ax)_i − λ|`.
pub(crate) fn support_residual(ax: &[f64], lambda: f64, support: &Support) -> f64 {
    support
        .indices()
        .iter()
        .map(|&i| (ax[i] - lambda).abs())
        .fold(0.0, f64::max)
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge() -> AffinityMatrix {
        AffinityMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    fn a3() -> AffinityMatrix {
        AffinityMatrix::from_rows(&[
            vec![0.0, 0.5, 0.2],
            vec![0.5, 0.0, 0.1],
            vec![0.2, 0.1, 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn objective_examples() {
        let half = SimplexVector::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(objective(&edge(), &half).unwrap(), 0.5);
        for i in 0..3 {
            let e = SimplexVector::vertex(3, i).unwrap();
            assert_eq!(objective(&a3(), &e).unwrap(), 0.0);
        }
        // Direct double sum: 2 (0.5 + 0.2 + 0.1) / 9.
        let u = SimplexVector::uniform(3).unwrap();
        let g = objective(&a3(), &u).unwrap();
        assert!((g - 1.6 / 9.0).abs() < 1e-15);
        assert!((g - 0.177778).abs() < 1e-6);
        assert!(objective(&edge(), &u).is_err());
    }

    #[test]
    fn kkt_examples() {
        let half = SimplexVector::new(vec![0.5, 0.5]).unwrap();
        let r = kkt_check(&edge(), &half, 1e-6).unwrap();
        assert_eq!((r.lambda, r.residual, r.is_mode), (0.5, 0.0, true));

        let e1 = SimplexVector::vertex(2, 0).unwrap();
        let r = kkt_check(&edge(), &e1, 1e-6).unwrap();
        assert_eq!((r.lambda, r.residual, r.is_mode), (0.0, 1.0, false));

        let e1 = SimplexVector::vertex(3, 0).unwrap();
        let r = kkt_check(&a3(), &e1, 1e-6).unwrap();
        assert_eq!(r.residual, 0.5);
        assert!(!r.is_mode);
    }

    #[test]
    fn clique_barycenter_is_exactly_stationary() {
        let n = 5;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i != j && i < 4 && j < 4 { 1.0 } else { 0.0 }).collect())
            .collect();
        let a = AffinityMatrix::from_rows(&rows).unwrap();
        let x = SimplexVector::uniform_on(n, &[0, 1, 2, 3]).unwrap();
        let r = kkt_check(&a, &x, 1e-6).unwrap();
        assert_eq!(r.residual, 0.0);
        assert!(r.is_mode);
    }

    #[test]
    fn rejects_nonpositive_tolerance() {
        let half = SimplexVector::new(vec![0.5, 0.5]).unwrap();
        assert!(kkt_check(&edge(), &half, 0.0).is_err());
    }
}
