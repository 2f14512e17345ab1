//! The greatest cross norm `||t||_gamma = inf sum_i prod_k ||u_i^(k)||_1` over finite tensor
//! decompositions, bracketed between a realignment lower bound and certified decompositions.

mod bipartite;
mod measure;
mod multi;
mod search;
mod support;
mod witness;

use serde::{Deserialize, Serialize};

use crate::decompositions::schmidt_decompose;
use crate::error::Result;
use crate::states::{CoeffMatrix, PureState};

pub use bipartite::{gamma_bracket, gamma_lower, gamma_upper, lower_bound_operator};
pub use measure::{measure_bracket, measure_interval, measure_value, MeasureInterval, MeasureSpec};
pub use multi::{gamma_bracket_multi, gamma_lower_multi, gamma_upper_multi, multipartite_measure};
pub use witness::{
    mix_decompositions, read_witness, separable_from_witness, separable_witness, write_witness, TensorDecomposition, TermFile, WitnessFile,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub seed: u64,
    pub restarts: usize,
    /// Pair optimizations allowed per restart.
    pub max_iter: usize,
    pub tol: f64,
    /// Initial step of the pair descent.
    pub step: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig { seed: 0, restarts: 16, max_iter: 500, tol: 1e-8, step: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    OperatorSchmidt,
    EigenMixture,
    LocalSearch,
    Hierarchical,
    Bipartition,
    Candidate(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    EntangledCertified,
    SeparableConsistent,
    Inconclusive,
}

impl Verdict {
    pub fn from_bounds(lower: f64, upper: f64) -> Self {
        let margin = crate::tol::VERDICT;
        if lower > 1.0 + margin {
            Verdict::EntangledCertified
        } else if upper <= 1.0 + margin {
            Verdict::SeparableConsistent
        } else {
            Verdict::Inconclusive
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::EntangledCertified => "entangled-certified",
            Verdict::SeparableConsistent => "separable-consistent",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub restarts: usize,
    pub iterations: usize,
    pub residual: f64,
}

/// Certified upper bound: `witness.cost()` together with how it was found.
#[derive(Debug, Clone)]
pub struct UpperBound {
    pub witness: TensorDecomposition,
    pub strategy: Strategy,
    pub diagnostics: Diagnostics,
}

impl UpperBound {
    pub fn value(&self) -> f64 {
        self.witness.cost()
    }
}

#[derive(Debug, Clone)]
pub struct GammaBracket {
    pub lower: f64,
    pub upper: f64,
    pub witness: TensorDecomposition,
    pub strategy: Strategy,
    pub verdict: Verdict,
    pub diagnostics: Diagnostics,
}

/// `(sum_i sqrt(p_i))^2` over the Schmidt coefficients.
pub fn gamma_pure(psi: &PureState) -> Result<f64> {
    Ok(schmidt_decompose(psi)?.root_sum().powi(2))
}

/// `sum_ij |a_ij|`.
pub fn gamma_coeff(c: &CoeffMatrix) -> f64 {
    c.a().iter().map(|z| z.norm()).sum()
}
