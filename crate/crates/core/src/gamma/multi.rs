//! n-fold cross norm. Grouping factors turns an n-fold decomposition into a bipartite one of
//! the same cost, so every bipartite lower bound of a grouping bounds the n-fold norm from
//! below; upper bounds come from recursive product expansions.

use crate::decompositions::{operator_schmidt_of, vector_schmidt};
use crate::error::{Error, Result};
use crate::linalg::{eigh_hermitian, outer, permute_factors, real, svd, CMatrix, CVector, FactorDims};
use crate::states::DensityOperator;
use crate::tol;

use super::bipartite::{assemble, check_candidates, lower_bound_operator, upper_operator, Selection};
use super::measure::{measure_bracket, MeasureInterval, MeasureSpec};
use super::support::LocalSupport;
use super::witness::{term_cost, TensorDecomposition};
use super::{Diagnostics, GammaBracket, OptimizerConfig, Strategy, UpperBound};

fn require_multipartite(dims: &FactorDims) -> Result<()> {
    if dims.parties() < 3 {
        return Err(Error::input(format!(
            "multipartite bounds need at least 3 factors, got {}",
            dims.parties()
        )));
    }
    Ok(())
}

/// Factor subsets containing factor 0, excluding the full set.
fn bipartitions(n: usize) -> Vec<Vec<usize>> {
    (0..(1usize << (n - 1)) - 1)
        .map(|mask| {
            std::iter::once(0)
                .chain((1..n).filter(|k| mask >> (k - 1) & 1 == 1))
                .collect()
        })
        .collect()
}

/// The operator regrouped as (subset | rest).
fn grouped(m: &CMatrix, dims: &FactorDims, subset: &[usize]) -> Result<(CMatrix, FactorDims)> {
    let rest: Vec<usize> = (0..dims.parties()).filter(|k| !subset.contains(k)).collect();
    let order: Vec<usize> = subset.iter().chain(&rest).copied().collect();
    let (p, _) = permute_factors(m, dims, &order)?;
    let left = subset.iter().map(|&k| dims.get(k)).product();
    let right = rest.iter().map(|&k| dims.get(k)).product();
    Ok((p, FactorDims::bipartite(left, right)?))
}

pub fn gamma_lower_multi(rho: &DensityOperator) -> Result<f64> {
    let dims = rho.dims();
    require_multipartite(dims)?;
    bipartitions(dims.parties()).iter().try_fold(f64::NEG_INFINITY, |best, subset| {
        let (m, g) = grouped(rho.matrix(), dims, subset)?;
        Ok(best.max(lower_bound_operator(&m, &g)?))
    })
}

/// `v = sum_m v_m^(1) (x) ... (x) v_m^(n)`, splitting off one factor at a time.
fn expand_vector(v: &CVector, dims: &[usize]) -> Result<Vec<Vec<CVector>>> {
    if dims.len() == 1 {
        return Ok(vec![vec![v.clone()]]);
    }
    let rest: usize = dims[1..].iter().product();
    let (s, left, right) = vector_schmidt(v, dims[0], rest)?;
    let mut out = Vec::new();
    for i in 0..s.len() {
        if s[i] <= tol::SCHMIDT_DROP {
            continue;
        }
        for sub in expand_vector(&right[i], &dims[1..])? {
            let mut term = vec![&left[i] * real(s[i])];
            term.extend(sub);
            out.push(term);
        }
    }
    Ok(out)
}

/// `(x)_k |p_k><q_k|` summed over all pairs of product terms.
fn ket_bra_terms(kets: &[Vec<CVector>], bras: &[Vec<CVector>], weight: f64) -> Vec<Vec<CMatrix>> {
    let mut out = Vec::with_capacity(kets.len() * bras.len());
    for p in kets {
        for q in bras {
            let mut factors: Vec<CMatrix> = p.iter().zip(q).map(|(a, b)| outer(a, b)).collect();
            factors[0] *= real(weight);
            out.push(factors);
        }
    }
    out
}

fn total_cost(terms: &[Vec<CMatrix>]) -> Result<f64> {
    terms.iter().try_fold(0.0, |acc, t| Ok(acc + term_cost(t)?))
}

/// n-fold decomposition of an arbitrary operator: operator Schmidt split of the first factor
/// with the rest expanded recursively, or for rank-one operators the product expansion of
/// the two vectors, whichever is cheaper.
fn expand_operator(m: &CMatrix, dims: &[usize]) -> Result<Vec<Vec<CMatrix>>> {
    if dims.len() == 1 {
        return Ok(vec![vec![m.clone()]]);
    }
    let rest: usize = dims[1..].iter().product();
    let os = operator_schmidt_of(m, &FactorDims::bipartite(dims[0], rest)?)?;
    let mut split = Vec::new();
    for k in 0..os.values.len() {
        for sub in expand_operator(&os.right[k], &dims[1..])? {
            let mut term = vec![&os.left[k] * real(os.values[k])];
            term.extend(sub);
            split.push(term);
        }
    }
    let sv = svd(m)?;
    let rank_one = sv.values.len() == 1 || sv.values[1] <= tol::SCHMIDT_DROP * sv.values[0].max(1.0);
    if !rank_one || sv.values[0] == 0.0 {
        return Ok(split);
    }
    let kets = expand_vector(&sv.u.column(0).into_owned(), dims)?;
    let bras = expand_vector(&sv.v.column(0).into_owned(), dims)?;
    let ket_bra = ket_bra_terms(&kets, &bras, sv.values[0]);
    if total_cost(&ket_bra)? < total_cost(&split)? {
        Ok(ket_bra)
    } else {
        Ok(split)
    }
}

fn hierarchical_witness(m: &CMatrix, dims: &FactorDims) -> Result<TensorDecomposition> {
    TensorDecomposition::new(dims.clone(), expand_operator(m, dims.as_slice())?)
}

/// Spectral decomposition with every eigenvector expanded into product vectors.
fn eigen_mixture_witness(m: &CMatrix, dims: &FactorDims) -> Result<TensorDecomposition> {
    let eig = eigh_hermitian(m)?;
    let mut terms = Vec::new();
    for (t, &lambda) in eig.values.iter().enumerate() {
        if lambda == 0.0 {
            continue;
        }
        let v = eig.vectors.column(t).into_owned();
        let e = expand_vector(&v, dims.as_slice())?;
        terms.extend(ket_bra_terms(&e, &e, lambda));
    }
    TensorDecomposition::new(dims.clone(), terms)
}

/// Bipartite bound on (first factor | rest) with each rest factor expanded recursively.
fn bipartition_witness(
    m: &CMatrix,
    dims: &FactorDims,
    cfg: &OptimizerConfig,
) -> Result<(TensorDecomposition, Diagnostics)> {
    let rest_dims = &dims.as_slice()[1..];
    let g = FactorDims::bipartite(dims.get(0), rest_dims.iter().product())?;
    let lower = lower_bound_operator(m, &g)?;
    let up = upper_operator(m, &g, lower, cfg, &[])?;
    let mut terms = Vec::new();
    for t in up.witness.terms() {
        for sub in expand_operator(&t[1], rest_dims)? {
            let mut term = vec![t[0].clone()];
            term.extend(sub);
            terms.push(term);
        }
    }
    Ok((TensorDecomposition::new(dims.clone(), terms)?, up.diagnostics))
}

fn upper_multi(
    rho: &DensityOperator,
    lower: f64,
    cfg: &OptimizerConfig,
    candidates: &[TensorDecomposition],
) -> Result<UpperBound> {
    let dims = rho.dims();
    require_multipartite(dims)?;
    check_candidates(dims, candidates)?;
    let support = LocalSupport::of(rho.matrix(), dims)?;
    let inner = support.restrict(rho.matrix());
    let inner_dims = support.trimmed_dims();

    let mut sel = Selection::new(rho.matrix());
    let fixed = [
        (hierarchical_witness(&inner, inner_dims), Strategy::Hierarchical),
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
        if let Ok((w, diag)) = bipartition_witness(&inner, inner_dims, cfg) {
            sel.offer(support.extend(w), Strategy::Bipartition, diag);
        }
    }
    sel.finish()
}

pub fn gamma_upper_multi(
    rho: &DensityOperator,
    cfg: &OptimizerConfig,
    candidates: &[TensorDecomposition],
) -> Result<UpperBound> {
    let lower = gamma_lower_multi(rho)?;
    upper_multi(rho, lower, cfg, candidates)
}

pub fn gamma_bracket_multi(
    rho: &DensityOperator,
    cfg: &OptimizerConfig,
    candidates: &[TensorDecomposition],
) -> Result<GammaBracket> {
    let lower = gamma_lower_multi(rho)?;
    assemble(lower, upper_multi(rho, lower, cfg, candidates)?)
}

pub fn multipartite_measure(
    rho: &DensityOperator,
    spec: &MeasureSpec,
    cfg: &OptimizerConfig,
) -> Result<MeasureInterval> {
    measure_bracket(&gamma_bracket_multi(rho, cfg, &[])?, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::kron_all;
    use crate::sampling::{random_density, rng_from_seed};
    use crate::states::{make_state, validate_density, Generated, Generator};

    fn cfg() -> OptimizerConfig {
        OptimizerConfig::default()
    }

    fn ghz() -> DensityOperator {
        make_state(&Generator::Ghz { parties: 3, d: 2 }).unwrap().density()
    }

    #[test]
    fn bipartitions_of_three_and_four() {
        assert_eq!(bipartitions(3), vec![vec![0], vec![0, 1], vec![0, 2]]);
        assert_eq!(bipartitions(4).len(), 7);
    }

    #[test]
    fn ghz_bracket_is_two() {
        let b = gamma_bracket_multi(&ghz(), &cfg(), &[]).unwrap();
        assert!((b.lower - 2.0).abs() < 1e-9, "lower {}", b.lower);
        assert!((b.upper - 2.0).abs() < 1e-9, "upper {}", b.upper);
        assert_eq!(b.witness.len(), 4);
    }

    #[test]
    fn product_states_are_one() {
        let mut rng = rng_from_seed(2);
        let dims = FactorDims::new(vec![2, 3, 2]).unwrap();
        let f: Vec<CMatrix> = dims.as_slice().iter().map(|&d| random_density(d, &mut rng)).collect();
        let rho = validate_density(kron_all(f.iter()), dims).unwrap();
        let b = gamma_bracket_multi(&rho, &cfg(), &[]).unwrap();
        assert!((b.lower - 1.0).abs() < 1e-9 && (b.upper - 1.0).abs() < 1e-9);
    }

    #[test]
    fn separable_with_witness() {
        for seed in 0..5 {
            let dims = FactorDims::new(vec![2, 2, 2]).unwrap();
            let Generated::Separable(s) = make_state(&Generator::RandomSeparable { dims, terms: 3, seed }).unwrap()
            else {
                panic!()
            };
            let w = crate::gamma::separable_witness(&s).unwrap();
            let b = gamma_bracket_multi(s.state(), &cfg(), &[w]).unwrap();
            assert!(b.upper <= 1.0 + 1e-6 && b.lower <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn random_states_give_certified_brackets() {
        for seed in 0..3 {
            let dims = FactorDims::new(vec![2, 2, 2]).unwrap();
            let rho = make_state(&Generator::RandomDensity { dims, seed }).unwrap().density();
            let b = gamma_bracket_multi(&rho, &cfg(), &[]).unwrap();
            assert!(b.lower <= b.upper + 1e-9);
            assert!(b.witness.certify(rho.matrix()).is_ok());
        }
    }

    #[test]
    fn ghz_measures() {
        let e = multipartite_measure(&ghz(), &MeasureSpec::Egamma, &cfg()).unwrap();
        assert!((e.lower - 2.0 * 2f64.ln()).abs() < 2e-4 && (e.upper - 2.0 * 2f64.ln()).abs() < 2e-4);
        let f = multipartite_measure(&ghz(), &MeasureSpec::F1, &cfg()).unwrap();
        assert!((f.lower - 1.0).abs() < 1e-4 && (f.upper - 1.0).abs() < 1e-4);
    }

    #[test]
    fn bipartite_input_is_rejected() {
        let bell = make_state(&Generator::Bell { d: 2 }).unwrap().density();
        assert!(matches!(gamma_lower_multi(&bell), Err(Error::InvalidInput(_))));
    }
}
