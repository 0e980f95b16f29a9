//! Compressed-row matrices for assembly and products, and a thin wrapper over
//! the sparse LU factorisation.

use crate::{Error, Result};
use faer::prelude::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

/// Real CSR matrix. Explicit zeros are kept so patterns are value independent.
#[derive(Clone, Debug, PartialEq)]
pub struct Csr {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl Csr {
    /// Build from `(row, col, value)` entries; duplicates are summed in input
    /// order.
    pub fn from_triplets(rows: usize, cols: usize, entries: &[(usize, usize, f64)]) -> Self {
        let mut order: Vec<usize> = (0..entries.len()).collect();
        order.sort_by_key(|&i| (entries[i].0, entries[i].1, i));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for i in order {
            let (r, c, v) = entries[i];
            debug_assert!(r < rows && c < cols);
            if last == Some((r, c)) {
                *values.last_mut().expect("entry exists") += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        Self {
            rows,
            cols,
            indptr,
            indices,
            values,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.indptr[r]..self.indptr[r + 1];
        match self.indices[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|r| {
                (self.indptr[r]..self.indptr[r + 1])
                    .map(|k| self.values[k] * x[self.indices[k]])
                    .sum()
            })
            .collect()
    }

    /// `Aᵀ x`.
    pub fn tmatvec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (r, xr) in x.iter().enumerate().take(self.rows) {
            for k in self.indptr[r]..self.indptr[r + 1] {
                out[self.indices[k]] += self.values[k] * xr;
            }
        }
        out
    }

    /// `xᵀ A y`.
    pub fn form(&self, x: &[f64], y: &[f64]) -> f64 {
        self.matvec(y).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Append the entries of `scale·A` shifted by `(r0, c0)`; with `transpose`
    /// the entries of `scale·Aᵀ`.
    pub fn push_block(&self, out: &mut Vec<(usize, usize, f64)>, r0: usize, c0: usize, scale: f64, transpose: bool) {
        for r in 0..self.rows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                let (i, j) = if transpose { (self.indices[k], r) } else { (r, self.indices[k]) };
                out.push((r0 + i, c0 + j, scale * self.values[k]));
            }
        }
    }

    /// `a·self + b·other`; both must share the same pattern.
    pub fn combine(&self, a: f64, other: &Csr, b: f64) -> Result<Csr> {
        if self.indptr != other.indptr || self.indices != other.indices {
            return Err(Error::invalid("matrices do not share a sparsity pattern"));
        }
        let mut out = self.clone();
        for (v, w) in out.values.iter_mut().zip(&other.values) {
            *v = a * *v + b * w;
        }
        Ok(out)
    }

    /// All stored entries as `(row, col, value)`.
    pub fn entries(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.nnz());
        self.push_block(&mut out, 0, 0, 1.0, false);
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.cols]; self.rows];
        for (r, row) in d.iter_mut().enumerate() {
            for k in self.indptr[r]..self.indptr[r + 1] {
                row[self.indices[k]] += self.values[k];
            }
        }
        d
    }
}

fn to_faer(n: usize, entries: &[(usize, usize, f64)]) -> Result<SparseColMat<usize, f64>> {
    let trip: Vec<Triplet<usize, usize, f64>> = entries.iter().map(|&(r, c, v)| Triplet::new(r, c, v)).collect();
    SparseColMat::try_new_from_triplets(n, n, &trip).map_err(|e| Error::Factorization {
        step: None,
        reason: format!("sparse assembly failed: {e:?}"),
    })
}

/// Symbolic LU analysis of a square pattern, reusable across values.
#[derive(Clone)]
pub struct Pattern {
    n: usize,
    symbolic: SymbolicLu<usize>,
}

impl Pattern {
    pub fn analyse(n: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let a = to_faer(n, entries)?;
        let symbolic = SymbolicLu::try_new(a.symbolic()).map_err(|e| Error::Factorization {
            step: None,
            reason: format!("symbolic analysis failed: {e:?}"),
        })?;
        Ok(Self { n, symbolic })
    }

    /// Numeric factorisation of a matrix with this pattern.
    pub fn factorize(&self, entries: &[(usize, usize, f64)]) -> Result<Factor> {
        let a = to_faer(self.n, entries)?;
        let lu = Lu::try_new_with_symbolic(self.symbolic.clone(), a.as_ref()).map_err(|e| Error::Factorization {
            step: None,
            reason: format!("numeric factorisation failed: {e:?}"),
        })?;
        Ok(Factor { n: self.n, lu })
    }
}

/// Numeric sparse LU factors.
pub struct Factor {
    n: usize,
    lu: Lu<usize, f64>,
}

impl Factor {
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let mut x = Mat::<f64>::from_fn(self.n, 1, |i, _| rhs[i]);
        self.lu.solve_in_place(&mut x);
        let out: Vec<f64> = (0..self.n).map(|i| x[(i, 0)]).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Factorization {
                step: None,
                reason: "singular system (non-finite solution)".into(),
            });
        }
        Ok(out)
    }

    /// Solve for several right-hand sides at once.
    pub fn solve_many(&self, rhs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let k = rhs.len();
        let mut x = Mat::<f64>::from_fn(self.n, k, |i, j| rhs[j][i]);
        self.lu.solve_in_place(&mut x);
        let out: Vec<Vec<f64>> = (0..k).map(|j| (0..self.n).map(|i| x[(i, j)]).collect()).collect();
        if out.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Factorization {
                step: None,
                reason: "singular system (non-finite solution)".into(),
            });
        }
        Ok(out)
    }
}

/// One-shot factorisation.
pub fn factorize(n: usize, entries: &[(usize, usize, f64)]) -> Result<Factor> {
    Pattern::analyse(n, entries)?.factorize(entries)
}
