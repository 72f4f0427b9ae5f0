//! Points of the standard simplex and their supports.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest accepted `|Σ x_i − 1|` for a [`SimplexVector`].
pub const SUM_TOL: f64 = 1e-12;

/// Largest simplex departure [`clamp_to_simplex`] will repair.
const CLAMP_SUM_TOL: f64 = 1e-6;
/// Most negative component [`clamp_to_simplex`] will round up to zero.
const CLAMP_NEG_TOL: f64 = 1e-12;

/// A point `x` with `x_i ≥ 0` and `Σ x_i = 1` (to [`SUM_TOL`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SimplexVector(Vec<f64>);

impl SimplexVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("simplex vector must be nonempty"));
        }
        if let Some((i, v)) = components
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::invalid(format!("component {i} = {v} is negative or not finite")));
        }
        let sum: f64 = components.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::invalid(format!("components sum to {sum}, not 1")));
        }
        Ok(Self(components))
    }

    /// The unit coordinate vector `e_i`.
    pub fn vertex(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::invalid(format!("vertex {i} out of range for n = {n}")));
        }
        let mut c = vec![0.0; n];
        c[i] = 1.0;
        Ok(Self(c))
    }

    /// The barycenter of the face spanned by `indices`.
    pub fn uniform_on(n: usize, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::invalid("uniform point needs at least one index"));
        }
        let mut c = vec![0.0; n];
        let w = 1.0 / indices.len() as f64;
        for &i in indices {
            if i >= n {
                return Err(Error::invalid(format!("index {i} out of range for n = {n}")));
            }
            c[i] = w;
        }
        clamp_with(c, "uniform_on")
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::uniform_on(n, &(0..n).collect::<Vec<_>>())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn support(&self, eps_supp: f64) -> Support {
        support_of(self, eps_supp)
    }

    /// ∞-norm distance to `other`.
    pub fn max_abs_diff(&self, other: &SimplexVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self(perm.iter().map(|&p| self.0[p]).collect())
    }
}

impl std::ops::Index<usize> for SimplexVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for SimplexVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SimplexVector> for Vec<f64> {
    fn from(x: SimplexVector) -> Self {
        x.0
    }
}

/// Ordered indices of the components above the support threshold.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Support(Vec<usize>);

impl Support {
    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }
}

/// `{ i : x_i > eps_supp }`.
pub fn support_of(x: &SimplexVector, eps_supp: f64) -> Support {
    Support(
        x.0.iter()
            .enumerate()
            .filter_map(|(i, &v)| (v > eps_supp).then_some(i))
            .collect(),
    )
}

/// Repairs rounding drift after arithmetic on simplex points.
///
/// Components in `[-1e-12, 0)` become zero and the vector is rescaled to sum
/// to one. Anything further from the simplex is a numerical failure.
pub fn clamp_to_simplex(raw: Vec<f64>) -> Result<SimplexVector> {
    clamp_with(raw, "clamp_to_simplex")
}

pub(crate) fn clamp_with(mut raw: Vec<f64>, step: &'static str) -> Result<SimplexVector> {
    if raw.is_empty() {
        return Err(Error::Numerical {
            step,
            detail: "empty vector".into(),
        });
    }
    for (i, v) in raw.iter_mut().enumerate() {
        if !v.is_finite() || *v < -CLAMP_NEG_TOL {
            return Err(Error::Numerical {
                step,
                detail: format!("component {i} = {v} left the simplex"),
            });
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let sum: f64 = raw.iter().sum();
    if (sum - 1.0).abs() > CLAMP_SUM_TOL {
        return Err(Error::Numerical {
            step,
            detail: format!("components sum to {sum}"),
        });
    }
    if sum != 1.0 {
        raw.iter_mut().for_each(|v| *v /= sum);
        let drift = 1.0 - raw.iter().sum::<f64>();
        if drift != 0.0 {
            // Largest component absorbs the last few ulps.
            let (imax, _) = raw
                .iter()
                .enumerate()
                .fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
            raw[imax] += drift;
        }
    }
    SimplexVector::new(raw).map_err(|e| Error::Numerical {
        step,
        detail: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn support_thresholds() {
        let e1 = SimplexVector::vertex(3, 0).unwrap();
        assert_eq!(support_of(&e1, 1e-8).indices(), &[0]);
        let x = SimplexVector::new(vec![0.4375, 0.375, 0.1875]).unwrap();
        assert_eq!(support_of(&x, 1e-8).indices(), &[0, 1, 2]);
        let tiny = SimplexVector::new(vec![1.0 - 5e-9, 5e-9, 0.0]).unwrap();
        assert_eq!(support_of(&tiny, 1e-8).indices(), &[0]);
        assert!(support_of(&tiny, 1e-8).contains(0));
        assert!(!support_of(&tiny, 1e-8).contains(1));
    }

    #[test]
    fn clamp_examples() {
        let x = clamp_to_simplex(vec![1.0, -1e-15, 0.0]).unwrap();
        assert_eq!(x.as_slice(), &[1.0, 0.0, 0.0]);
        let y = clamp_to_simplex(vec![0.5, 0.5]).unwrap();
        assert_eq!(y.as_slice(), &[0.5, 0.5]);
        let raw = vec![0.3, 0.3, 0.4 + 3e-13];
        let sum: f64 = raw.iter().sum();
        let z = clamp_to_simplex(raw.clone()).unwrap();
        assert!((z.as_slice().iter().sum::<f64>() - 1.0).abs() <= 1e-15);
        for (a, b) in z.as_slice().iter().zip(&raw) {
            assert!((a - b / sum).abs() < 1e-15);
        }
    }

    #[test]
    fn clamp_rejects_gross_departure() {
        match clamp_with(vec![0.5, 0.6], "test-step") {
            Err(Error::Numerical { step, .. }) => assert_eq!(step, "test-step"),
            other => panic!("expected numerical failure, got {other:?}"),
        }
        assert!(clamp_to_simplex(vec![1.0 + 1e-9, -1e-9]).is_err());
        assert!(clamp_to_simplex(vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn constructors_validate() {
        assert!(SimplexVector::new(vec![0.5, 0.6]).is_err());
        assert!(SimplexVector::new(vec![1.5, -0.5]).is_err());
        assert!(SimplexVector::vertex(3, 3).is_err());
        let u = SimplexVector::uniform_on(4, &[1, 3]).unwrap();
        assert_eq!(u.as_slice(), &[0.0, 0.5, 0.0, 0.5]);
        let json = serde_json::to_string(&u).unwrap();
        assert_eq!(serde_json::from_str::<SimplexVector>(&json).unwrap(), u);
        assert!(serde_json::from_str::<SimplexVector>("[0.5, 0.6]").is_err());
    }
}
