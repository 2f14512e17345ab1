//! The post-selection example: a weakly entangled mixture on `(3, 3)` whose entanglement jumps
//! once the `|00>` component is filtered out and the remainder renormalized.

use serde::Serialize;

use crate::channels::{post_select, KrausChannel};
use crate::entropy::{relative_entropy, svn_entropy, RelativeEntropy};
use crate::error::Result;
use crate::gamma::{
    gamma_bracket, measure_bracket, mix_decompositions, GammaBracket, MeasureInterval, MeasureSpec, OptimizerConfig,
    TensorDecomposition,
};
use crate::linalg::{outer, CMatrix, FactorDims};
use crate::states::{antisymmetric_12, basis_vector, rho_eps, validate_density, DensityOperator, SeparableState};

/// `(1 - eps) |00><00| + (eps / 2)(|12><12| + |21><21|)`.
pub fn block_candidate(epsilon: f64) -> Result<SeparableState> {
    let p = |i: usize| outer(&basis_vector(3, i), &basis_vector(3, i));
    SeparableState::new(
        FactorDims::bipartite(3, 3)?,
        vec![1.0 - epsilon, epsilon / 2.0, epsilon / 2.0],
        vec![vec![p(0), p(0)], vec![p(1), p(2)], vec![p(2), p(1)]],
    )
}

/// The antisymmetric block as a density operator.
pub fn antisymmetric_state() -> Result<DensityOperator> {
    let psi = antisymmetric_12();
    validate_density(outer(&psi, &psi), FactorDims::bipartite(3, 3)?)
}

/// Kraus projection onto the complement of `|00>`.
pub fn reject_00() -> Result<KrausChannel> {
    let e0 = basis_vector(3, 0);
    let e00 = e0.kronecker(&e0);
    KrausChannel::projection(CMatrix::identity(9, 9) - outer(&e00, &e00))
}

/// Block mixture witness of cost `(1 - eps) + eps * gamma(antisymmetric)`.
pub fn block_mixture_witness(epsilon: f64, cfg: &OptimizerConfig) -> Result<TensorDecomposition> {
    let dims = FactorDims::bipartite(3, 3)?;
    let p0 = outer(&basis_vector(3, 0), &basis_vector(3, 0));
    let product = TensorDecomposition::product(dims, vec![p0.clone(), p0])?;
    let anti = gamma_bracket(&antisymmetric_state()?, cfg, &[])?.witness;
    mix_decompositions(&product, &anti, 1.0 - epsilon)
}

#[derive(Debug, Clone, Serialize)]
pub struct BracketSummary {
    pub lower: f64,
    pub upper: f64,
    pub verdict: &'static str,
    pub egamma: MeasureInterval,
}

impl BracketSummary {
    fn of(b: &GammaBracket) -> Result<Self> {
        Ok(BracketSummary {
            lower: b.lower,
            upper: b.upper,
            verdict: b.verdict.as_str(),
            egamma: measure_bracket(b, &MeasureSpec::Egamma)?,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PostSelectionReport {
    pub epsilon: f64,
    pub before: BracketSummary,
    /// Relative entropy to the block candidate: an upper bound on the relative entropy of
    /// entanglement of the input.
    pub relative_entropy_bound: RelativeEntropy,
    /// Probability of the kept branch.
    pub kept_probability: f64,
    pub after: BracketSummary,
    /// Relative entropy of the post-selected state to `(|12><12| + |21><21|) / 2`.
    pub relative_entropy_after: RelativeEntropy,
    pub entropy_after: f64,
}

impl PostSelectionReport {
    /// True when both the cross-norm measure and the relative-entropy bound certify growth.
    pub fn increased(&self) -> bool {
        self.after.egamma.lower > self.before.egamma.upper
            && self.relative_entropy_after.value() > self.relative_entropy_bound.value()
    }
}

pub fn post_selection_demo(epsilon: f64, cfg: &OptimizerConfig) -> Result<PostSelectionReport> {
    let rho = rho_eps(epsilon)?;
    let before = gamma_bracket(&rho, cfg, &[block_mixture_witness(epsilon, cfg)?])?;
    let relative_entropy_bound = relative_entropy(&rho, block_candidate(epsilon)?.state())?;

    let keep = reject_00()?;
    let kept_probability = crate::linalg::trace(&keep.apply(rho.matrix())?).re;
    let sigma = post_select(&keep, &rho)?;
    let after = gamma_bracket(&sigma, cfg, &[])?;
    let relative_entropy_after = relative_entropy(&sigma, block_candidate(1.0)?.state())?;

    Ok(PostSelectionReport {
        epsilon,
        before: BracketSummary::of(&before)?,
        relative_entropy_bound,
        kept_probability,
        after: BracketSummary::of(&after)?,
        relative_entropy_after,
        entropy_after: svn_entropy(&sigma, 1)?.value,
    })
}
