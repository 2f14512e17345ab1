//! Dense complex matrix kernel: factorizations, norms, tensor products and partial traces.
//!
//! Composite indices are row-major over the tensor factors: for dims `(d1, d2)` the basis
//! vector `|i> (x) |j>` sits at index `i * d2 + j`. Every other module relies on this.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

const MAX_SWEEPS: usize = 100_000;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Dimensions of the tensor factors an operator acts on.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct FactorDims(Vec<usize>);

impl FactorDims {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::input("factor dimensions must not be empty"));
        }
        if dims.contains(&0) {
            return Err(Error::input(format!("factor dimensions must be positive, got {dims:?}")));
        }
        Ok(FactorDims(dims))
    }

    pub fn bipartite(d1: usize, d2: usize) -> Result<Self> {
        Self::new(vec![d1, d2])
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Number of tensor factors.
    pub fn parties(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    pub fn get(&self, k: usize) -> usize {
        self.0[k]
    }

    /// Fails unless there are exactly two factors.
    pub fn require_bipartite(&self) -> Result<(usize, usize)> {
        match self.0.as_slice() {
            [d1, d2] => Ok((*d1, *d2)),
            other => Err(Error::input(format!(
                "operation needs a bipartite system, got {} factors",
                other.len()
            ))),
        }
    }

    /// Fails unless the dims describe a square operator of the given size.
    pub fn check_matrix(&self, m: &CMatrix) -> Result<()> {
        let n = self.total();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::input(format!(
                "dims {:?} need a {n}x{n} operator, got {}x{}",
                self.0,
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(())
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.0.len()];
        for k in (0..self.0.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.0[k + 1];
        }
        strides
    }

    /// Splits a composite index into its per-factor digits.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.0.len()];
        for k in (0..self.0.len()).rev() {
            out[k] = index % self.0[k];
            index /= self.0[k];
        }
        out
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.0).fold(0, |acc, (&x, &d)| acc * d + x)
    }
}

impl TryFrom<Vec<usize>> for FactorDims {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        FactorDims::new(v)
    }
}

impl From<FactorDims> for Vec<usize> {
    fn from(d: FactorDims) -> Self {
        d.0
    }
}

/// `m = U diag(values) V^dag`, values descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub values: Vec<f64>,
    pub u: CMatrix,
    pub v: CMatrix,
}

impl Svd {
    pub fn nuclear_norm(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn recompose(&self) -> CMatrix {
        let mut us = self.u.clone();
        for (k, s) in self.values.iter().enumerate() {
            us.column_mut(k).scale_mut(*s);
        }
        us * self.v.adjoint()
    }
}

pub fn check_finite(m: &CMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::input("matrix has non-finite entries"))
    }
}

fn to_faer(m: &CMatrix) -> faer::Mat<C64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Thin SVD with singular values in descending order.
pub fn svd(m: &CMatrix) -> Result<Svd> {
    check_finite(m)?;
    let k = m.nrows().min(m.ncols());
    if k == 0 {
        return Ok(Svd {
            values: vec![],
            u: CMatrix::zeros(m.nrows(), 0),
            v: CMatrix::zeros(m.ncols(), 0),
        });
    }
    let dec = to_faer(m)
        .thin_svd()
        .map_err(|_| Error::Numerical("SVD did not converge".into()))?;
    let (u, s, v) = (dec.U(), dec.S().column_vector(), dec.V());
    Ok(Svd {
        values: (0..k).map(|i| s[i].re).collect(),
        u: CMatrix::from_fn(m.nrows(), k, |i, j| u[(i, j)]),
        v: CMatrix::from_fn(m.ncols(), k, |i, j| v[(i, j)]),
    })
}

/// Singular values only, descending.
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    check_finite(m)?;
    if m.is_empty() {
        return Ok(vec![]);
    }
    let values = to_faer(m)
        .singular_values()
        .map_err(|_| Error::Numerical("SVD did not converge".into()))?;
    Ok(values)
}

pub fn nuclear_norm(m: &CMatrix) -> Result<f64> {
    Ok(singular_values(m)?.iter().sum())
}

/// Trace norm `||m||_1` of a square matrix.
pub fn trace_norm(m: &CMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::input(format!(
            "trace norm needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    nuclear_norm(m)
}

/// Hilbert-Schmidt (Frobenius) norm.
pub fn hs_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigh {
    pub fn recompose(&self) -> CMatrix {
        self.map_values(|x| x)
    }

    /// `V f(diag) V^dag`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let mut vf = self.vectors.clone();
        for (k, lam) in self.values.iter().enumerate() {
            vf.column_mut(k).scale_mut(f(*lam));
        }
        vf * self.vectors.adjoint()
    }
}

pub fn eigh_hermitian(m: &CMatrix) -> Result<Eigh> {
    check_finite(m)?;
    if !m.is_square() {
        return Err(Error::input("eigendecomposition needs a square matrix"));
    }
    let defect = hermiticity_defect(m);
    if defect > tol::HERMITIAN * max_abs(m).max(1.0) {
        return Err(Error::input(format!("matrix is not Hermitian (defect {defect:e})")));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(Eigh { values: vec![], vectors: CMatrix::zeros(0, 0) });
    }
    let sym = (m + m.adjoint()).scale(0.5);
    let dec = SymmetricEigen::try_new(sym, f64::EPSILON, MAX_SWEEPS)
        .ok_or_else(|| Error::Numerical("Hermitian eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| dec.eigenvalues[a].total_cmp(&dec.eigenvalues[b]));
    let values = order.iter().map(|&k| dec.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, col| dec.eigenvectors[(r, order[col])]);
    Ok(Eigh { values, vectors })
}

/// Spectral logarithm on the support; eigenvalues below the support cutoff map to 0.
pub fn matrix_log(m: &CMatrix) -> Result<CMatrix> {
    let eig = eigh_hermitian(m)?;
    if let Some(&min) = eig.values.first() {
        if min < -tol::PSD_CLAMP {
            return Err(Error::input(format!(
                "logarithm needs a positive operator, found eigenvalue {min:e}"
            )));
        }
    }
    Ok(eig.map_values(|x| if x > tol::SUPPORT { x.ln() } else { 0.0 }))
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Kronecker product of a non-empty list, left to right.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    let mut it = factors.into_iter();
    let first = it.next().cloned().unwrap_or_else(|| CMatrix::identity(1, 1));
    it.fold(first, |acc, f| acc.kronecker(f))
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Partial trace keeping the listed factors (in their original order).
pub fn partial_trace(m: &CMatrix, dims: &FactorDims, keep: &[usize]) -> Result<CMatrix> {
    dims.check_matrix(m)?;
    let n = dims.parties();
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.iter().any(|&k| k >= n) {
        return Err(Error::input(format!("factor index out of range for {n} factors")));
    }
    let traced: Vec<usize> = (0..n).filter(|k| !keep_sorted.contains(k)).collect();
    let kept_dims: Vec<usize> = keep_sorted.iter().map(|&k| dims.get(k)).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims.get(k)).collect();
    let out_n: usize = kept_dims.iter().product();
    let tr_n: usize = traced_dims.iter().product();
    let strides = dims.strides();

    let compose = |kept_idx: usize, tr_idx: usize| -> usize {
        let mut idx = 0;
        let mut rem = kept_idx;
        for (pos, &k) in keep_sorted.iter().enumerate().rev() {
            idx += (rem % kept_dims[pos]) * strides[k];
            rem /= kept_dims[pos];
        }
        let mut rem = tr_idx;
        for (pos, &k) in traced.iter().enumerate().rev() {
            idx += (rem % traced_dims[pos]) * strides[k];
            rem /= traced_dims[pos];
        }
        idx
    };

    let mut out = CMatrix::zeros(out_n, out_n);
    for r in 0..out_n {
        for col in 0..out_n {
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..tr_n {
                acc += m[(compose(r, t), compose(col, t))];
            }
            out[(r, col)] = acc;
        }
    }
    Ok(out)
}

/// Reorders tensor factors: factor `k` of the result is factor `order[k]` of the input.
pub fn permute_factors(m: &CMatrix, dims: &FactorDims, order: &[usize]) -> Result<(CMatrix, FactorDims)> {
    dims.check_matrix(m)?;
    let n = dims.parties();
    let mut seen = order.to_vec();
    seen.sort_unstable();
    if seen != (0..n).collect::<Vec<_>>() {
        return Err(Error::input(format!("{order:?} is not a permutation of {n} factors")));
    }
    let new_dims = FactorDims::new(order.iter().map(|&k| dims.get(k)).collect())?;
    let map: Vec<usize> = (0..dims.total())
        .map(|new_idx| {
            let nd = new_dims.digits(new_idx);
            let mut old = vec![0; n];
            for (pos, &k) in order.iter().enumerate() {
                old[k] = nd[pos];
            }
            dims.index(&old)
        })
        .collect();
    let out = CMatrix::from_fn(dims.total(), dims.total(), |r, col| m[(map[r], map[col])]);
    Ok((out, new_dims))
}

/// Same reordering applied to a state vector.
pub fn permute_vector(v: &CVector, dims: &FactorDims, order: &[usize]) -> Result<(CVector, FactorDims)> {
    let n = dims.parties();
    let new_dims = FactorDims::new(order.iter().map(|&k| dims.get(k)).collect())?;
    let out = CVector::from_fn(dims.total(), |new_idx, _| {
        let nd = new_dims.digits(new_idx);
        let mut old = vec![0; n];
        for (pos, &k) in order.iter().enumerate() {
            old[k] = nd[pos];
        }
        v[dims.index(&old)]
    });
    Ok((out, new_dims))
}

pub fn outer(a: &CVector, b: &CVector) -> CMatrix {
    a * b.adjoint()
}

/// Reshapes a row-major vector of length `rows * cols` into a matrix.
pub fn unvec(v: &[C64], rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |r, col| v[r * cols + col])
}

/// Row-major flattening.
pub fn vec_row_major(m: &CMatrix) -> Vec<C64> {
    let mut out = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        for col in 0..m.ncols() {
            out.push(m[(r, col)]);
        }
    }
    out
}
