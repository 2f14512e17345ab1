//! Finite tensor decompositions `t = sum_i u_i^(1) (x) ... (x) u_i^(n)`. A decomposition that
//! reconstructs its target is a certificate for the upper bound `sum_i prod_k ||u_i^(k)||_1`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigh_hermitian, hs_norm, kron_all, real, trace, trace_norm, CMatrix, FactorDims};
use crate::states::{matrix_from_json, matrix_to_json, SeparableState};
use crate::tol;

#[derive(Debug, Clone, PartialEq)]
pub struct TensorDecomposition {
    dims: FactorDims,
    terms: Vec<Vec<CMatrix>>,
    cost: f64,
}

pub(crate) fn term_cost(factors: &[CMatrix]) -> Result<f64> {
    factors.iter().try_fold(1.0, |acc, f| Ok(acc * trace_norm(f)?))
}

impl TensorDecomposition {
    pub fn new(dims: FactorDims, terms: Vec<Vec<CMatrix>>) -> Result<Self> {
        for (i, term) in terms.iter().enumerate() {
            if term.len() != dims.parties() {
                return Err(Error::input(format!(
                    "term {i} has {} factors, dims {:?} need {}",
                    term.len(),
                    dims.as_slice(),
                    dims.parties()
                )));
            }
            for (k, f) in term.iter().enumerate() {
                let d = dims.get(k);
                if f.nrows() != d || f.ncols() != d {
                    return Err(Error::input(format!(
                        "term {i} factor {k} is {}x{}, expected {d}x{d}",
                        f.nrows(),
                        f.ncols()
                    )));
                }
            }
        }
        let cost = terms.iter().try_fold(0.0, |acc, t| Ok::<_, Error>(acc + term_cost(t)?))?;
        Ok(TensorDecomposition { dims, terms, cost })
    }

    /// Single product term.
    pub fn product(dims: FactorDims, factors: Vec<CMatrix>) -> Result<Self> {
        Self::new(dims, vec![factors])
    }

    /// Caller guarantees `cost` is the cost of `terms` up to rounding.
    pub(crate) fn from_parts(dims: FactorDims, terms: Vec<Vec<CMatrix>>, cost: f64) -> Self {
        TensorDecomposition { dims, terms, cost }
    }

    pub fn dims(&self) -> &FactorDims {
        &self.dims
    }

    pub fn terms(&self) -> &[Vec<CMatrix>] {
        &self.terms
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn reconstruct(&self) -> CMatrix {
        let n = self.dims.total();
        self.terms
            .iter()
            .fold(CMatrix::zeros(n, n), |acc, t| acc + kron_all(t.iter()))
    }

    /// Hilbert-Schmidt distance between the reconstruction and `target`.
    pub fn residual(&self, target: &CMatrix) -> Result<f64> {
        self.dims.check_matrix(target)?;
        Ok(hs_norm(&(self.reconstruct() - target)))
    }

    /// Fails unless the decomposition reconstructs `target` within the witness tolerance.
    pub fn certify(&self, target: &CMatrix) -> Result<f64> {
        let r = self.residual(target)?;
        if r > tol::WITNESS_RESIDUAL || !self.cost.is_finite() {
            return Err(Error::Numerical(format!("witness residual {r:e} exceeds tolerance")));
        }
        Ok(r)
    }

    /// Multiplies every term by `w >= 0`.
    pub fn scaled(&self, w: f64) -> TensorDecomposition {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut t = t.clone();
                t[0] *= real(w);
                t
            })
            .collect();
        TensorDecomposition::from_parts(self.dims.clone(), terms, w * self.cost)
    }
}

/// The stored product terms `w_i rho_i^(1) (x) ... (x) rho_i^(n)` of a separable state; costs
/// `sum w_i = 1` since every factor has unit trace norm.
pub fn separable_witness(s: &SeparableState) -> Result<TensorDecomposition> {
    let terms = s
        .weights()
        .iter()
        .zip(s.factors())
        .map(|(w, f)| {
            let mut f = f.clone();
            f[0] *= real(*w);
            f
        })
        .collect();
    TensorDecomposition::new(s.state().dims().clone(), terms)
}

/// Reads a decomposition with positive semidefinite factors as an explicitly separable state:
/// term `i` becomes weight `prod_k Tr u_i^(k)` times the normalized factors.
pub fn separable_from_witness(d: &TensorDecomposition) -> Result<SeparableState> {
    let mut weights = Vec::with_capacity(d.len());
    let mut factors = Vec::with_capacity(d.len());
    for (i, term) in d.terms.iter().enumerate() {
        let mut w = 1.0;
        let mut normalized = Vec::with_capacity(term.len());
        for f in term {
            let eig = eigh_hermitian(f)?;
            let scale = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if eig.values.first().is_some_and(|&v| v < -tol::PSD_CLAMP * scale.max(1.0)) {
                return Err(Error::input(format!("term {i} has a factor that is not positive")));
            }
            let t = trace(f).re;
            w *= t;
            normalized.push(if t > 0.0 { f.unscale(t) } else { f.clone() });
        }
        if w > 0.0 {
            weights.push(w);
            factors.push(normalized);
        }
    }
    SeparableState::new(d.dims.clone(), weights, factors)
}

/// Concatenates `lambda * d1` and `(1 - lambda) * d2`, weighting one factor per term.
pub fn mix_decompositions(
    d1: &TensorDecomposition,
    d2: &TensorDecomposition,
    lambda: f64,
) -> Result<TensorDecomposition> {
    if d1.dims != d2.dims {
        return Err(Error::input(format!(
            "cannot mix decompositions on {:?} and {:?}",
            d1.dims.as_slice(),
            d2.dims.as_slice()
        )));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::input(format!("mixing weight {lambda} outside [0, 1]")));
    }
    if lambda == 1.0 {
        return Ok(d1.clone());
    }
    if lambda == 0.0 {
        return Ok(d2.clone());
    }
    let (a, b) = (d1.scaled(lambda), d2.scaled(1.0 - lambda));
    let mut terms = a.terms;
    terms.extend(b.terms);
    Ok(TensorDecomposition::from_parts(
        d1.dims.clone(),
        terms,
        lambda * d1.cost + (1.0 - lambda) * d2.cost,
    ))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermFile {
    pub factors: Vec<Vec<[f64; 2]>>,
}

/// On-disk witness: `{"dims": [...], "terms": [{"factors": [...]}, ...], "cost": x}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessFile {
    pub dims: Vec<usize>,
    pub terms: Vec<TermFile>,
    pub cost: f64,
}

impl WitnessFile {
    pub fn from_decomposition(d: &TensorDecomposition) -> Self {
        WitnessFile {
            dims: d.dims.as_slice().to_vec(),
            terms: d
                .terms
                .iter()
                .map(|t| TermFile { factors: t.iter().map(matrix_to_json).collect() })
                .collect(),
            cost: d.cost,
        }
    }

    /// Rebuilds the decomposition and recomputes its cost; a stated cost that disagrees is an
    /// error.
    pub fn into_decomposition(self) -> Result<TensorDecomposition> {
        let dims = FactorDims::new(self.dims).map_err(|e| Error::Schema(e.to_string()))?;
        let mut terms = Vec::with_capacity(self.terms.len());
        for (i, t) in self.terms.iter().enumerate() {
            if t.factors.len() != dims.parties() {
                return Err(Error::Schema(format!("term {i} has {} factors", t.factors.len())));
            }
            let factors = t
                .factors
                .iter()
                .enumerate()
                .map(|(k, f)| matrix_from_json(f, dims.get(k), dims.get(k)))
                .collect::<Result<Vec<_>>>()?;
            terms.push(factors);
        }
        let d = TensorDecomposition::new(dims, terms)?;
        if (d.cost - self.cost).abs() > 1e-9 * d.cost.max(1.0) {
            return Err(Error::Schema(format!(
                "stated cost {} does not match recomputed cost {}",
                self.cost, d.cost
            )));
        }
        Ok(d)
    }
}

pub fn write_witness(d: &TensorDecomposition, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(&WitnessFile::from_decomposition(d))?)?;
    Ok(())
}

pub fn read_witness(path: impl AsRef<Path>) -> Result<TensorDecomposition> {
    let file: WitnessFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    file.into_decomposition()
}
