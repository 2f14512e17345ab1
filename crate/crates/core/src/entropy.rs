//! Reduced von Neumann entropy and the relative entropy functional, in nats.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigh_hermitian, partial_trace, trace};
use crate::states::{DensityOperator, SeparableState};
use crate::tol;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub value: f64,
    /// Index of the factor that was traced out.
    pub traced_factor: usize,
    /// Eigenvalues of the reduced operator, ascending.
    pub spectrum: Vec<f64>,
}

/// `-sum l ln l` with `0 ln 0 = 0`.
pub fn shannon(values: &[f64]) -> f64 {
    0.0 - values.iter().filter(|&&l| l > tol::SUPPORT).map(|&l| l * l.ln()).sum::<f64>()
}

pub fn svn_entropy(sigma: &DensityOperator, traced_factor: usize) -> Result<EntropyReport> {
    sigma.dims().require_bipartite()?;
    if traced_factor > 1 {
        return Err(Error::input(format!("factor {traced_factor} does not exist in a bipartite state")));
    }
    let reduced = partial_trace(sigma.matrix(), sigma.dims(), &[1 - traced_factor])?;
    let spectrum = eigh_hermitian(&reduced)?.values;
    Ok(EntropyReport { value: shannon(&spectrum).max(0.0), traced_factor, spectrum })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum RelativeEntropy {
    Finite(f64),
    /// The support of the first argument is not contained in that of the second.
    Infinite,
}

impl RelativeEntropy {
    pub fn value(&self) -> f64 {
        match *self {
            RelativeEntropy::Finite(v) => v,
            RelativeEntropy::Infinite => f64::INFINITY,
        }
    }
}

/// `Tr(sigma ln sigma) - Tr(sigma ln rho)` over the supports.
pub fn relative_entropy(sigma: &DensityOperator, rho: &DensityOperator) -> Result<RelativeEntropy> {
    if sigma.dims() != rho.dims() {
        return Err(Error::input("relative entropy needs states on the same dims"));
    }
    let s = eigh_hermitian(sigma.matrix())?;
    let r = eigh_hermitian(rho.matrix())?;
    // weight of sigma outside the support of rho
    let outside = r.map_values(|l| if l > tol::SUPPORT { 0.0 } else { 1.0 });
    if trace(&(&outside * sigma.matrix())).re > tol::SUPPORT {
        return Ok(RelativeEntropy::Infinite);
    }
    let log_rho = r.map_values(|l| if l > tol::SUPPORT { l.ln() } else { 0.0 });
    let cross = trace(&(sigma.matrix() * log_rho)).re;
    let value = -shannon(&s.values) - cross;
    Ok(RelativeEntropy::Finite(value.max(0.0)))
}

/// Minimum over explicitly separable candidates: an upper bound on the relative entropy of
/// entanglement.
pub fn relative_entropy_upper(sigma: &DensityOperator, candidates: &[SeparableState]) -> Result<RelativeEntropy> {
    if candidates.is_empty() {
        return Err(Error::input("relative entropy bound needs at least one candidate"));
    }
    let mut best = RelativeEntropy::Infinite;
    for cand in candidates {
        let v = relative_entropy(sigma, cand.state())?;
        if v.value() < best.value() {
            best = v;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompositions::schmidt_decompose;
    use crate::linalg::{outer, FactorDims};
    use crate::sampling::{random_density, rng_from_seed};
    use crate::states::{antisymmetric_12, basis_vector, make_state, rho_eps, validate_density, Generated, Generator};
    use proptest::prelude::*;
    use std::f64::consts::LN_2;

    fn pure(g: Generator) -> crate::states::PureState {
        match make_state(&g).unwrap() {
            Generated::Pure(p) => p,
            _ => panic!("expected a pure state"),
        }
    }

    fn block_candidate(eps: f64) -> SeparableState {
        let dims = FactorDims::bipartite(3, 3).unwrap();
        let p = |i: usize| outer(&basis_vector(3, i), &basis_vector(3, i));
        SeparableState::new(
            dims,
            vec![1.0 - eps, eps / 2.0, eps / 2.0],
            vec![vec![p(0), p(0)], vec![p(1), p(2)], vec![p(2), p(1)]],
        )
        .unwrap()
    }

    #[test]
    fn entropy_examples() {
        let prod = pure(Generator::Product { factors: vec![basis_vector(2, 1), basis_vector(3, 0)] }).density();
        assert!(svn_entropy(&prod, 1).unwrap().value.abs() < 1e-12);
        let bell = pure(Generator::Bell { d: 2 }).density();
        for side in [0, 1] {
            assert!((svn_entropy(&bell, side).unwrap().value - LN_2).abs() < 1e-12);
        }
        let s = pure(Generator::Schmidt { coeffs: vec![0.9, 0.1] }).density();
        let expect = -0.9 * 0.9f64.ln() - 0.1 * 0.1f64.ln();
        let got = svn_entropy(&s, 1).unwrap();
        assert!((got.value - expect).abs() < 1e-12);
        assert!((got.value - 0.325083).abs() < 1e-6);
        assert_eq!(got.traced_factor, 1);
        assert!(svn_entropy(&s, 2).is_err());
    }

    #[test]
    fn mixed_states_can_depend_on_the_side() {
        // |0><0| (x) 1/2 has entropy ln 2 on one side and 0 on the other
        let p0 = outer(&basis_vector(2, 0), &basis_vector(2, 0));
        let m = crate::linalg::kron(&p0, &crate::linalg::CMatrix::identity(2, 2).unscale(2.0));
        let rho = validate_density(m, FactorDims::bipartite(2, 2).unwrap()).unwrap();
        assert!(svn_entropy(&rho, 1).unwrap().value.abs() < 1e-12);
        assert!((svn_entropy(&rho, 0).unwrap().value - LN_2).abs() < 1e-12);
    }

    #[test]
    fn relative_entropy_examples() {
        let rho = rho_eps(0.01).unwrap();
        assert_eq!(relative_entropy(&rho, &rho).unwrap(), RelativeEntropy::Finite(0.0));

        let psi = antisymmetric_12();
        let dims = FactorDims::bipartite(3, 3).unwrap();
        let anti = validate_density(outer(&psi, &psi), dims.clone()).unwrap();
        let p = |i: usize| outer(&basis_vector(3, i), &basis_vector(3, i));
        let half = SeparableState::new(dims, vec![0.5, 0.5], vec![vec![p(1), p(2)], vec![p(2), p(1)]]).unwrap();
        let v = relative_entropy(&anti, half.state()).unwrap().value();
        assert!((v - LN_2).abs() < 1e-10);

        let eps = 0.01;
        let v = relative_entropy(&rho, block_candidate(eps).state()).unwrap().value();
        assert!((v - eps * LN_2).abs() < 1e-10);
        assert!((v - 0.0069315).abs() < 1e-7);
    }

    #[test]
    fn support_violation_is_infinite() {
        let rho = rho_eps(0.01).unwrap();
        let p = |i: usize| outer(&basis_vector(3, i), &basis_vector(3, i));
        let dims = FactorDims::bipartite(3, 3).unwrap();
        let only_00 = SeparableState::new(dims, vec![1.0], vec![vec![p(0), p(0)]]).unwrap();
        assert_eq!(relative_entropy(&rho, only_00.state()).unwrap(), RelativeEntropy::Infinite);
        assert_eq!(relative_entropy_upper(&rho, &[only_00.clone()]).unwrap(), RelativeEntropy::Infinite);
        let best = relative_entropy_upper(&rho, &[only_00, block_candidate(0.01)]).unwrap();
        assert!((best.value() - 0.01 * LN_2).abs() < 1e-10);
        assert!(relative_entropy_upper(&rho, &[]).is_err());
    }

    #[test]
    fn separable_state_against_itself_is_zero() {
        let s = match make_state(&Generator::RandomSeparable { dims: FactorDims::bipartite(2, 3).unwrap(), terms: 3, seed: 7 }).unwrap() {
            Generated::Separable(s) => s,
            _ => unreachable!(),
        };
        let v = relative_entropy_upper(s.state(), &[s.clone()]).unwrap().value();
        assert!(v.abs() < 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn pure_entropy_matches_schmidt_and_is_side_independent(seed in any::<u64>(), d1 in 2usize..4, d2 in 2usize..4) {
            let psi = pure(Generator::RandomPure { dims: FactorDims::bipartite(d1, d2).unwrap(), seed });
            let p = schmidt_decompose(&psi).unwrap().coeffs;
            let rho = psi.density();
            let (a, b) = (svn_entropy(&rho, 0).unwrap().value, svn_entropy(&rho, 1).unwrap().value);
            prop_assert!((a - b).abs() < 1e-10);
            prop_assert!((a - shannon(&p)).abs() < 1e-10);
        }

        #[test]
        fn relative_entropy_is_positive_on_distinct_states(seed in any::<u64>()) {
            let mut rng = rng_from_seed(seed);
            let dims = FactorDims::bipartite(2, 2).unwrap();
            let s = validate_density(random_density(4, &mut rng), dims.clone()).unwrap();
            let r = validate_density(random_density(4, &mut rng), dims).unwrap();
            prop_assert!(relative_entropy(&s, &r).unwrap().value() > 0.0);
            prop_assert!(relative_entropy(&s, &s).unwrap().value() < 1e-10);
        }
    }
}
