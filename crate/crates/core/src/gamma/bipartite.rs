use crate::decompositions::{operator_schmidt_of, realign_operator, vector_schmidt};
use crate::error::{Error, Result};
use crate::linalg::{eigh_hermitian, nuclear_norm, outer, real, trace_norm, CMatrix, FactorDims};
use crate::states::DensityOperator;
use crate::tol;

use super::search::local_search;
use super::support::LocalSupport;
use super::witness::TensorDecomposition;
use super::{Diagnostics, GammaBracket, OptimizerConfig, Strategy, UpperBound, Verdict};

/// `max(||m||_1, ||R(m)||_1)` for an operator on two factors, `R` the realignment.
pub fn lower_bound_operator(m: &CMatrix, dims: &FactorDims) -> Result<f64> {
    dims.require_bipartite()?;
    let support = LocalSupport::of(m, dims)?;
    let m = support.restrict(m);
    let realigned = realign_operator(&m, support.trimmed_dims())?;
    Ok(trace_norm(&m)?.max(nuclear_norm(&realigned.matrix)?))
}

pub fn gamma_lower(rho: &DensityOperator) -> Result<f64> {
    lower_bound_operator(rho.matrix(), rho.dims())
}

fn operator_schmidt_witness(m: &CMatrix, dims: &FactorDims) -> Result<TensorDecomposition> {
    let os = operator_schmidt_of(m, dims)?;
    let terms = (0..os.values.len())
        .map(|k| vec![&os.left[k] * real(os.values[k]), os.right[k].clone()])
        .collect();
    TensorDecomposition::new(dims.clone(), terms)
}

/// Spectral decomposition with every eigenvector expanded through its Schmidt form:
/// `|psi><psi| = sum_ij s_i s_j |a_i><a_j| (x) |b_i><b_j|`.
fn eigen_mixture_witness(m: &CMatrix, dims: &FactorDims) -> Result<TensorDecomposition> {
    let (d1, d2) = dims.require_bipartite()?;
    let eig = eigh_hermitian(m)?;
    let mut terms = Vec::new();
    for (t, &lambda) in eig.values.iter().enumerate() {
        if lambda == 0.0 {
            continue;
        }
        let v = eig.vectors.column(t).into_owned();
        let (s, left, right) = vector_schmidt(&v, d1, d2)?;
        let keep: Vec<usize> = (0..s.len()).filter(|&i| s[i] > tol::SCHMIDT_DROP).collect();
        for &i in &keep {
            for &j in &keep {
                terms.push(vec![
                    outer(&left[i], &left[j]) * real(lambda * s[i] * s[j]),
                    outer(&right[i], &right[j]),
                ]);
            }
        }
    }
    TensorDecomposition::new(dims.clone(), terms)
}

fn search_witness(
    m: &CMatrix,
    dims: &FactorDims,
    lower: f64,
    cfg: &OptimizerConfig,
) -> Result<Option<(TensorDecomposition, Diagnostics)>> {
    let os = operator_schmidt_of(m, dims)?;
    let Some(found) = local_search(&os, lower, cfg) else {
        return Ok(None);
    };
    let terms = found.x.into_iter().zip(found.y).map(|(x, y)| vec![x, y]).collect();
    let w = TensorDecomposition::new(dims.clone(), terms)?;
    let diag = Diagnostics { restarts: found.restarts, iterations: found.iterations, residual: 0.0 };
    Ok(Some((w, diag)))
}

/// Keeps the cheapest certified witness; earlier entries win ties.
pub(crate) struct Selection<'a> {
    target: &'a CMatrix,
    best: Option<UpperBound>,
}

impl<'a> Selection<'a> {
    pub(crate) fn new(target: &'a CMatrix) -> Self {
        Selection { target, best: None }
    }

    pub(crate) fn offer(&mut self, witness: TensorDecomposition, strategy: Strategy, mut diag: Diagnostics) {
        let Ok(residual) = witness.certify(self.target) else {
            return;
        };
        diag.residual = residual;
        if self.best.as_ref().is_none_or(|b| witness.cost() < b.witness.cost()) {
            self.best = Some(UpperBound { witness, strategy, diagnostics: diag });
        }
    }

    pub(crate) fn best_cost(&self) -> f64 {
        self.best.as_ref().map_or(f64::INFINITY, |b| b.witness.cost())
    }

    pub(crate) fn finish(self) -> Result<UpperBound> {
        self.best
            .ok_or_else(|| Error::Numerical("no decomposition passed the reconstruction check".into()))
    }
}

pub(crate) fn check_candidates(dims: &FactorDims, candidates: &[TensorDecomposition]) -> Result<()> {
    match candidates.iter().find(|c| c.dims() != dims) {
        Some(c) => Err(Error::input(format!(
            "candidate witness on {:?} does not match dims {:?}",
            c.dims().as_slice(),
            dims.as_slice()
        ))),
        None => Ok(()),
    }
}

/// Upper bound for an operator on two factors; `lower` is only used to stop the search early.
pub(crate) fn upper_operator(
    m: &CMatrix,
    dims: &FactorDims,
    lower: f64,
    cfg: &OptimizerConfig,
    candidates: &[TensorDecomposition],
) -> Result<UpperBound> {
    dims.require_bipartite()?;
    check_candidates(dims, candidates)?;
    let support = LocalSupport::of(m, dims)?;
    let inner = support.restrict(m);
    let inner_dims = support.trimmed_dims();

    let mut sel = Selection::new(m);
    let fixed = [
        (operator_schmidt_witness(&inner, inner_dims), Strategy::OperatorSchmidt),
        (eigen_mixture_witness(&inner, inner_dims), Strategy::EigenMixture),
    ];
    for (w, strategy) in fixed {
        if let Ok(w) = w {
            sel.offer(support.extend(w), strategy, Diagnostics::default());
        }
    }
    for (i, c) in candidates.iter().enumerate() {
        sel.offer(c.clone(), Strategy::Candidate(i), Diagnostics::default());
    }
    if sel.best_cost() - lower > cfg.tol {
        if let Some((w, diag)) = search_witness(&inner, inner_dims, lower, cfg)? {
            let w = support.extend(w);
            // the search only replaces a fixed strategy when strictly cheaper
            sel.offer(w, Strategy::LocalSearch, diag);
        }
    }
    sel.finish()
}

pub fn gamma_upper(
    rho: &DensityOperator,
    cfg: &OptimizerConfig,
    candidates: &[TensorDecomposition],
) -> Result<UpperBound> {
    let lower = gamma_lower(rho)?;
    upper_operator(rho.matrix(), rho.dims(), lower, cfg, candidates)
}

pub(crate) fn assemble(lower: f64, upper: UpperBound) -> Result<GammaBracket> {
    let value = upper.witness.cost();
    if lower > value + tol::BRACKET {
        return Err(Error::Internal(format!("lower bound {lower} exceeds certified upper bound {value}")));
    }
    Ok(GammaBracket {
        lower,
        upper: value,
        verdict: Verdict::from_bounds(lower, value),
        witness: upper.witness,
        strategy: upper.strategy,
        diagnostics: upper.diagnostics,
    })
}

pub fn gamma_bracket(
    rho: &DensityOperator,
    cfg: &OptimizerConfig,
    candidates: &[TensorDecomposition],
) -> Result<GammaBracket> {
    let lower = gamma_lower(rho)?;
    let upper = upper_operator(rho.matrix(), rho.dims(), lower, cfg, candidates)?;
    assemble(lower, upper)
}
