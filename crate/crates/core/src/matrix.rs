//! Symmetric nonnegative affinity matrices with zero diagonal.

use crate::error::{Error, Result};

/// A symmetric, nonnegative similarity matrix with zero diagonal.
///
/// Immutable once built. Dense storage is row-major; sparse storage keeps
/// only the strict upper triangle and mirrors it on every read, so symmetry
/// holds by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix {
    n: usize,
    storage: Storage,
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    Dense(Vec<f64>),
    /// `upper[i]` holds `(j, a_ij)` for `j > i`, ascending in `j`, values > 0.
    Sparse(Vec<Vec<(usize, f64)>>),
}

impl AffinityMatrix {
    /// Builds a dense matrix from row-major entries, checking every invariant.
    pub fn from_dense(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("matrix must have at least one vertex"));
        }
        if entries.len() != n * n {
            return Err(Error::invalid(format!(
                "expected {} entries for n = {n}, got {}",
                n * n,
                entries.len()
            )));
        }
        for i in 0..n {
            let d = entries[i * n + i];
            if d != 0.0 {
                return Err(Error::invalid(format!("diagonal entry ({i},{i}) = {d} is not zero")));
            }
            for j in 0..n {
                let v = entries[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::invalid(format!(
                        "entry ({i},{j}) = {v} is not a finite nonnegative number"
                    )));
                }
                if j > i && v != entries[j * n + i] {
                    return Err(Error::invalid(format!(
                        "entries ({i},{j}) = {v} and ({j},{i}) = {} differ",
                        entries[j * n + i]
                    )));
                }
            }
        }
        Ok(Self {
            n,
            storage: Storage::Dense(entries),
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::invalid(format!(
                "row {i} has {} entries, expected {n}",
                r.len()
            )));
        }
        Self::from_dense(n, rows.concat())
    }

    /// Builds a sparse matrix from off-diagonal triplets.
    ///
    /// `(i, j, v)` and `(j, i, v)` name the same cell; repeating a cell with
    /// the same value is accepted, with a different value it is rejected.
    /// Zero values are dropped. A nonzero diagonal entry is an error.
    pub fn from_triplets<I>(n: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        if n == 0 {
            return Err(Error::invalid("matrix must have at least one vertex"));
        }
        let mut upper: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::invalid(format!("index ({i},{j}) out of range for n = {n}")));
            }
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid(format!(
                    "entry ({i},{j}) = {v} is not a finite nonnegative number"
                )));
            }
            if i == j {
                if v != 0.0 {
                    return Err(Error::invalid(format!("diagonal entry ({i},{i}) = {v} is not zero")));
                }
                continue;
            }
            if v == 0.0 {
                continue;
            }
            upper[i.min(j)].push((i.max(j), v));
        }
        for (i, row) in upper.iter_mut().enumerate() {
            row.sort_by_key(|&(j, _)| j);
            let mut k = 1;
            while k < row.len() {
                if row[k].0 == row[k - 1].0 {
                    if row[k].1 != row[k - 1].1 {
                        return Err(Error::invalid(format!(
                            "cell ({i},{}) given twice with different values {} and {}",
                            row[k].0,
                            row[k - 1].1,
                            row[k].1
                        )));
                    }
                    row.remove(k);
                } else {
                    k += 1;
                }
            }
        }
        Ok(Self {
            n,
            storage: Storage::Sparse(upper),
        })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::from_dense(n, vec![0.0; n * n])
    }

    /// Builds a dense matrix from a function of the strict upper triangle.
    pub(crate) fn dense_from_upper(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = f(i, j);
                entries[i * n + j] = v;
                entries[j * n + i] = v;
            }
        }
        Self {
            n,
            storage: Storage::Dense(entries),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match &self.storage {
            Storage::Dense(e) => e[i * self.n + j],
            Storage::Sparse(upper) => {
                if i == j {
                    return 0.0;
                }
                let (r, c) = (i.min(j), i.max(j));
                upper[r]
                    .binary_search_by_key(&c, |&(k, _)| k)
                    .map_or(0.0, |pos| upper[r][pos].1)
            }
        }
    }

    /// Number of nonzero cells in the full `n × n` matrix.
    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Dense(e) => e.iter().filter(|&&v| v != 0.0).count(),
            Storage::Sparse(upper) => 2 * upper.iter().map(Vec::len).sum::<usize>(),
        }
    }

    pub fn max_entry(&self) -> f64 {
        match &self.storage {
            Storage::Dense(e) => e.iter().copied().fold(0.0, f64::max),
            Storage::Sparse(upper) => upper
                .iter()
                .flatten()
                .map(|&(_, v)| v)
                .fold(0.0, f64::max),
        }
    }

    /// Vertices `j` with `a_ij > 0`, ascending.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        (0..self.n).filter(|&j| self.get(i, j) > 0.0).collect()
    }

    pub fn has_neighbors(&self, i: usize) -> bool {
        match &self.storage {
            Storage::Dense(e) => e[i * self.n..(i + 1) * self.n].iter().any(|&v| v > 0.0),
            Storage::Sparse(_) => (0..self.n).any(|j| self.get(i, j) > 0.0),
        }
    }

    /// Strict upper triangle as `(i, j, a_ij)` with `a_ij > 0`, row-major.
    pub fn upper_entries(&self) -> Vec<(usize, usize, f64)> {
        match &self.storage {
            Storage::Dense(e) => (0..self.n)
                .flat_map(|i| (i + 1..self.n).map(move |j| (i, j)))
                .filter_map(|(i, j)| {
                    let v = e[i * self.n + j];
                    (v != 0.0).then_some((i, j, v))
                })
                .collect(),
            Storage::Sparse(upper) => upper
                .iter()
                .enumerate()
                .flat_map(|(i, row)| row.iter().map(move |&(j, v)| (i, j, v)))
                .collect(),
        }
    }

    pub fn to_sparse(&self) -> Self {
        Self {
            n: self.n,
            storage: Storage::Sparse(match &self.storage {
                Storage::Sparse(upper) => upper.clone(),
                Storage::Dense(_) => {
                    let mut upper = vec![Vec::new(); self.n];
                    for (i, j, v) in self.upper_entries() {
                        upper[i].push((j, v));
                    }
                    upper
                }
            }),
        }
    }

    pub fn to_dense(&self) -> Self {
        let n = self.n;
        match &self.storage {
            Storage::Dense(_) => self.clone(),
            Storage::Sparse(_) => {
                let mut entries = vec![0.0; n * n];
                for (i, j, v) in self.upper_entries() {
                    entries[i * n + j] = v;
                    entries[j * n + i] = v;
                }
                Self {
                    n,
                    storage: Storage::Dense(entries),
                }
            }
        }
    }

    /// Relabels vertices: entry `(i, j)` of the result is `a[perm[i]][perm[j]]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.n)?;
        let n = self.n;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] = self.get(perm[i], perm[j]);
            }
        }
        let dense = Self {
            n,
            storage: Storage::Dense(entries),
        };
        Ok(if self.is_sparse() { dense.to_sparse() } else { dense })
    }

    /// `Ax`, summing in ascending column order and skipping zero `x_j`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n);
        let active = nonzero_indices(x);
        match &self.storage {
            Storage::Dense(e) => (0..self.n)
                .map(|i| {
                    let row = &e[i * self.n..(i + 1) * self.n];
                    active.iter().map(|&j| row[j] * x[j]).sum()
                })
                .collect(),
            Storage::Sparse(upper) => {
                let mut y = vec![0.0; self.n];
                for (i, row) in upper.iter().enumerate() {
                    for &(j, v) in row {
                        y[i] += v * x[j];
                        y[j] += v * x[i];
                    }
                }
                y
            }
        }
    }

    /// `(Ax)_i` for every `i` in `active`, where `active` must list every
    /// index with `x_i != 0` in ascending order. Other entries are left at 0.
    ///
    /// Costs `O(|active|²)` on dense storage, which is what keeps replicator
    /// steps cheap once the support has shrunk.
    pub fn mul_vec_on(&self, x: &[f64], active: &[usize]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        match &self.storage {
            Storage::Dense(e) => {
                for &i in active {
                    let row = &e[i * self.n..(i + 1) * self.n];
                    y[i] = active.iter().map(|&j| row[j] * x[j]).sum();
                }
            }
            Storage::Sparse(upper) => {
                for &i in active {
                    for &(j, v) in &upper[i] {
                        if x[j] != 0.0 {
                            y[i] += v * x[j];
                            y[j] += v * x[i];
                        }
                    }
                }
            }
        }
        y
    }

    /// `xᵀAx`, skipping zero components.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n);
        let active = nonzero_indices(x);
        match &self.storage {
            Storage::Dense(e) => active
                .iter()
                .map(|&i| {
                    let row = &e[i * self.n..(i + 1) * self.n];
                    x[i] * active.iter().map(|&j| row[j] * x[j]).sum::<f64>()
                })
                .sum(),
            Storage::Sparse(upper) => {
                2.0 * active
                    .iter()
                    .map(|&i| {
                        x[i] * upper[i]
                            .iter()
                            .filter(|&&(j, _)| x[j] != 0.0)
                            .map(|&(j, v)| v * x[j])
                            .sum::<f64>()
                    })
                    .sum::<f64>()
            }
        }
    }
}

pub(crate) fn nonzero_indices(x: &[f64]) -> Vec<usize> {
    x.iter()
        .enumerate()
        .filter_map(|(i, &v)| (v != 0.0).then_some(i))
        .collect()
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::invalid(format!(
            "permutation has length {}, expected {n}",
            perm.len()
        )));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::invalid("not a permutation"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a3() -> AffinityMatrix {
        AffinityMatrix::from_rows(&[
            vec![0.0, 0.5, 0.2],
            vec![0.5, 0.0, 0.1],
            vec![0.2, 0.1, 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn rejects_broken_invariants() {
        assert!(AffinityMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).is_err());
        assert!(AffinityMatrix::from_rows(&[vec![0.0, 0.3], vec![0.2, 0.0]]).is_err());
        assert!(AffinityMatrix::from_rows(&[vec![0.0, -0.1], vec![-0.1, 0.0]]).is_err());
        assert!(AffinityMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0]]).is_err());
        assert!(AffinityMatrix::from_dense(0, vec![]).is_err());
    }

    #[test]
    fn triplets_mirror_and_reject_conflicts() {
        let m = AffinityMatrix::from_triplets(3, [(0, 1, 0.5), (2, 0, 0.2), (1, 2, 0.1)]).unwrap();
        assert_eq!(m.to_dense(), a3());
        assert_eq!(m.get(2, 0), 0.2);
        assert_eq!(m.nnz(), 6);
        assert!(AffinityMatrix::from_triplets(3, [(0, 1, 0.5), (1, 0, 0.4)]).is_err());
        assert!(AffinityMatrix::from_triplets(3, [(0, 1, 0.5), (1, 0, 0.5)]).is_ok());
        assert!(AffinityMatrix::from_triplets(3, [(1, 1, 0.5)]).is_err());
        assert!(AffinityMatrix::from_triplets(3, [(0, 3, 0.5)]).is_err());
    }

    #[test]
    fn sparse_and_dense_products_agree() {
        let d = a3();
        let s = d.to_sparse();
        let x = [0.2, 0.3, 0.5];
        for (u, v) in d.mul_vec(&x).iter().zip(s.mul_vec(&x)) {
            assert!((u - v).abs() < 1e-15);
        }
        assert!((d.quad_form(&x) - s.quad_form(&x)).abs() < 1e-15);
        let y = [0.6, 0.4, 0.0];
        let on = s.mul_vec_on(&y, &[0, 1]);
        assert_eq!(on[..2], d.mul_vec(&y)[..2]);
    }

    #[test]
    fn neighbors_and_permutation() {
        let m = AffinityMatrix::from_rows(&[
            vec![0.0, 1.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ])
        .unwrap();
        assert_eq!(m.neighbors(0), vec![1]);
        assert!(!m.has_neighbors(2));
        assert!(!m.to_sparse().has_neighbors(2));
        let p = a3().permuted(&[2, 0, 1]).unwrap();
        assert_eq!(p.get(0, 1), 0.2);
        assert_eq!(p.get(1, 2), 0.5);
        assert!(a3().permuted(&[0, 0, 1]).is_err());
    }
}
