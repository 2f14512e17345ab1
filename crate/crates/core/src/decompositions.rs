//! Schmidt decomposition of bipartite pure states, realignment of bipartite operators and
//! the operator Schmidt decomposition obtained from it.

use crate::error::{Error, Result};
use crate::linalg::{svd, unvec, CMatrix, CVector, FactorDims};
use crate::states::{DensityOperator, PureState};
use crate::tol;

/// `psi = sum_i sqrt(p_i) a_i (x) b_i`.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    /// Descending, summing to one.
    pub coeffs: Vec<f64>,
    pub left: Vec<CVector>,
    pub right: Vec<CVector>,
}

impl SchmidtDecomposition {
    pub fn reconstruct(&self) -> CVector {
        let n = self.left[0].len() * self.right[0].len();
        self.coeffs
            .iter()
            .zip(self.left.iter().zip(&self.right))
            .fold(CVector::zeros(n), |acc, (p, (a, b))| acc + a.kronecker(b).scale(p.sqrt()))
    }

    /// `sum_i sqrt(p_i)`.
    pub fn root_sum(&self) -> f64 {
        self.coeffs.iter().map(|p| p.max(0.0).sqrt()).sum()
    }
}

/// Schmidt form of an arbitrary (not necessarily normalized) vector on `d1 (x) d2`.
/// Returns singular values `s_i` with `v = sum_i s_i a_i (x) b_i`.
pub(crate) fn vector_schmidt(v: &CVector, d1: usize, d2: usize) -> Result<(Vec<f64>, Vec<CVector>, Vec<CVector>)> {
    let m = unvec(v.as_slice(), d1, d2);
    let s = svd(&m)?;
    let left = (0..s.values.len()).map(|k| s.u.column(k).into_owned()).collect();
    // m = sum_k s_k u_k v_k^dag, so the right factor of the ket is conj(v_k).
    let right = (0..s.values.len()).map(|k| s.v.column(k).map(|z| z.conj())).collect();
    Ok((s.values, left, right))
}

pub fn schmidt_decompose(psi: &PureState) -> Result<SchmidtDecomposition> {
    let (d1, d2) = psi.dims().require_bipartite()?;
    let (values, left, right) = vector_schmidt(psi.amplitudes(), d1, d2)?;
    let coeffs = values.iter().map(|s| s * s).collect();
    Ok(SchmidtDecomposition { coeffs, left, right })
}

/// Realigned form of a bipartite operator: entry `(i*d1 + j, k*d2 + l)` is `<i k| rho |j l>`.
#[derive(Debug, Clone)]
pub struct RealignedMatrix {
    pub matrix: CMatrix,
    pub source_dims: FactorDims,
}

/// Realignment of any operator on `d1 (x) d2` (not only density operators).
pub fn realign_operator(m: &CMatrix, dims: &FactorDims) -> Result<RealignedMatrix> {
    let (d1, d2) = dims.require_bipartite()?;
    dims.check_matrix(m)?;
    let matrix = CMatrix::from_fn(d1 * d1, d2 * d2, |row, col| {
        let (i, j) = (row / d1, row % d1);
        let (k, l) = (col / d2, col % d2);
        m[(i * d2 + k, j * d2 + l)]
    });
    Ok(RealignedMatrix { matrix, source_dims: dims.clone() })
}

pub fn realign(rho: &DensityOperator) -> Result<RealignedMatrix> {
    realign_operator(rho.matrix(), rho.dims())
}

impl RealignedMatrix {
    /// Inverse index permutation.
    pub fn unrealign(&self) -> CMatrix {
        let (d1, d2) = (self.source_dims.get(0), self.source_dims.get(1));
        CMatrix::from_fn(d1 * d2, d1 * d2, |row, col| {
            let (i, k) = (row / d2, row % d2);
            let (j, l) = (col / d2, col % d2);
            self.matrix[(i * d1 + j, k * d2 + l)]
        })
    }

    pub fn nuclear_norm(&self) -> Result<f64> {
        crate::linalg::nuclear_norm(&self.matrix)
    }
}

/// `rho = sum_k s_k E_k (x) F_k` with Hilbert-Schmidt orthonormal `E_k`, `F_k`.
#[derive(Debug, Clone)]
pub struct OperatorSchmidt {
    pub values: Vec<f64>,
    pub left: Vec<CMatrix>,
    pub right: Vec<CMatrix>,
}

impl OperatorSchmidt {
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.left[0].nrows() * self.right[0].nrows();
        self.values
            .iter()
            .zip(self.left.iter().zip(&self.right))
            .fold(CMatrix::zeros(n, n), |acc, (s, (e, f))| acc + e.kronecker(f).scale(*s))
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Operator Schmidt decomposition of any operator on a bipartite space. Terms with singular
/// value below the drop threshold are discarded.
pub fn operator_schmidt_of(m: &CMatrix, dims: &FactorDims) -> Result<OperatorSchmidt> {
    let (d1, d2) = dims.require_bipartite()?;
    let r = realign_operator(m, dims)?;
    let s = svd(&r.matrix)?;
    let mut out = OperatorSchmidt { values: vec![], left: vec![], right: vec![] };
    for (k, &value) in s.values.iter().enumerate() {
        if value < tol::SCHMIDT_DROP {
            continue;
        }
        let u: Vec<_> = s.u.column(k).iter().copied().collect();
        let v: Vec<_> = s.v.column(k).iter().map(|z| z.conj()).collect();
        out.values.push(value);
        out.left.push(unvec(&u, d1, d1));
        out.right.push(unvec(&v, d2, d2));
    }
    Ok(out)
}

pub fn operator_schmidt(rho: &DensityOperator) -> Result<OperatorSchmidt> {
    operator_schmidt_of(rho.matrix(), rho.dims())
        .map_err(|e| match e {
            Error::InvalidInput(msg) => Error::InvalidInput(msg),
            other => other,
        })
}
