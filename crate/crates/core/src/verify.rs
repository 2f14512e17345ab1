//! Seeded property suites for the measure axioms and the exact cross-norm formulas.
//!
//! Every trial draws its inputs from its own sub-seed, so a failing trial can be replayed from
//! the seed recorded in the report. A trial produces a margin: the distance by which the checked
//! inequality holds. Negative margins are failures.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channels::{luders_outcomes, pushforward_decomposition, KrausChannel, LudersOperation};
use crate::decompositions::operator_schmidt;
use crate::entropy::svn_entropy;
use crate::error::{Error, Result};
use crate::gamma::{
    gamma_bracket, gamma_bracket_multi, gamma_coeff, gamma_lower, gamma_pure, gamma_upper, measure_value,
    mix_decompositions, separable_witness, MeasureSpec, OptimizerConfig, TensorDecomposition,
};
use crate::linalg::{real, CMatrix, FactorDims};
use crate::sampling::{derive_seed, gaussian_matrix, haar_unitary, rng_from_seed, SeededRng};
use crate::states::{
    embed_state, make_state, validate_density, CoeffMatrix, DensityOperator, Generated, Generator, PureState,
    SeparableState,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PropertyId {
    E0,
    E1,
    E2,
    E3Pushforward,
    E4,
    Prop8,
    Thm6Separable,
    Prop4Tightness,
    Cor5Consistency,
    Prop17Gap,
}

impl PropertyId {
    pub const ALL: [PropertyId; 10] = [
        PropertyId::E0,
        PropertyId::E1,
        PropertyId::E2,
        PropertyId::E3Pushforward,
        PropertyId::E4,
        PropertyId::Prop8,
        PropertyId::Thm6Separable,
        PropertyId::Prop4Tightness,
        PropertyId::Cor5Consistency,
        PropertyId::Prop17Gap,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PropertyId::E0 => "E0",
            PropertyId::E1 => "E1",
            PropertyId::E2 => "E2",
            PropertyId::E3Pushforward => "E3-pushforward",
            PropertyId::E4 => "E4",
            PropertyId::Prop8 => "Prop8",
            PropertyId::Thm6Separable => "Thm6-separable",
            PropertyId::Prop4Tightness => "Prop4-tightness",
            PropertyId::Cor5Consistency => "Cor5-consistency",
            PropertyId::Prop17Gap => "Prop17-gap",
        }
    }

    fn index(&self) -> u64 {
        PropertyId::ALL.iter().position(|p| p == self).unwrap_or(0) as u64
    }
}

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PropertyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PropertyId::ALL
            .iter()
            .find(|p| p.as_str().eq_ignore_ascii_case(s))
            .copied()
            .ok_or_else(|| Error::input(format!("unknown property id {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub id: String,
    pub trials: usize,
    pub failures: usize,
    /// Smallest margin seen over all trials; `None` when a trial errored.
    pub worst_margin: Option<f64>,
    pub seed: u64,
    /// Sub-seeds of the failing trials.
    pub failing_seeds: Vec<u64>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report is plain data")
    }
}

/// Seed of trial `t` of property `id` under master seed `seed`.
pub fn trial_seed(id: PropertyId, seed: u64, t: usize) -> u64 {
    derive_seed(derive_seed(seed, id.index()), t as u64)
}

pub fn run_suite(ids: &[PropertyId], trials: usize, seed: u64, cfg: &OptimizerConfig) -> Result<Vec<PropertyReport>> {
    if trials == 0 {
        return Err(Error::input("verify needs at least one trial"));
    }
    Ok(ids.iter().map(|&id| run_property(id, trials, seed, cfg)).collect())
}

pub fn run_property(id: PropertyId, trials: usize, seed: u64, cfg: &OptimizerConfig) -> PropertyReport {
    let mut report = PropertyReport {
        id: id.as_str().to_string(),
        trials,
        failures: 0,
        worst_margin: Some(f64::INFINITY),
        seed,
        failing_seeds: Vec::new(),
    };
    for t in 0..trials {
        let sub = trial_seed(id, seed, t);
        match run_trial(id, t, sub, cfg) {
            Ok(margin) => {
                report.worst_margin = report.worst_margin.map(|w| w.min(margin));
                if !(margin >= 0.0) {
                    report.failures += 1;
                    report.failing_seeds.push(sub);
                }
            }
            Err(_) => {
                report.worst_margin = None;
                report.failures += 1;
                report.failing_seeds.push(sub);
            }
        }
    }
    report
}

/// Margin of a single trial, replayable from `(id, t, sub_seed)`.
pub fn run_trial(id: PropertyId, t: usize, sub_seed: u64, cfg: &OptimizerConfig) -> Result<f64> {
    let mut rng = rng_from_seed(sub_seed);
    match id {
        PropertyId::E0 => embedding(t, &mut rng, cfg),
        PropertyId::E1 => separable_measures(t, &mut rng, cfg),
        PropertyId::E2 => local_unitaries(t, &mut rng),
        PropertyId::E3Pushforward => pushforward(t, &mut rng),
        PropertyId::E4 => mixing(t, &mut rng, cfg),
        PropertyId::Prop8 => luders_average(t, &mut rng, cfg),
        PropertyId::Thm6Separable => separable_bracket(t, &mut rng, cfg),
        PropertyId::Prop4Tightness => pure_tightness(t, &mut rng, cfg),
        PropertyId::Cor5Consistency => coeff_consistency(t, &mut rng, cfg),
        PropertyId::Prop17Gap => pure_gap(t, &mut rng),
    }
}

fn dims(d: &[usize]) -> FactorDims {
    FactorDims::new(d.to_vec()).expect("positive dims")
}

/// `G G^dag / Tr` with `G` of random column count, so ranks vary.
pub fn random_state(d: &FactorDims, rng: &mut SeededRng) -> Result<DensityOperator> {
    let n = d.total();
    let k = rng.random_range(1..=n);
    let g = gaussian_matrix(n, k, rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    validate_density(m.unscale(tr), d.clone())
}

fn random_pure(d: &FactorDims, rng: &mut SeededRng) -> Result<PureState> {
    match make_state(&Generator::RandomPure { dims: d.clone(), seed: rng.random() })? {
        Generated::Pure(p) => Ok(p),
        _ => Err(Error::Internal("random pure generator returned a mixed state".into())),
    }
}

fn random_separable(d: &FactorDims, rng: &mut SeededRng) -> Result<SeparableState> {
    let terms = rng.random_range(1..=4);
    match make_state(&Generator::RandomSeparable { dims: d.clone(), terms, seed: rng.random() })? {
        Generated::Separable(s) => Ok(s),
        _ => Err(Error::Internal("random separable generator returned no witness".into())),
    }
}

fn operator_schmidt_terms(rho: &DensityOperator) -> Result<TensorDecomposition> {
    let os = operator_schmidt(rho)?;
    let terms = (0..os.values.len()).map(|k| vec![&os.left[k] * real(os.values[k]), os.right[k].clone()]).collect();
    TensorDecomposition::new(rho.dims().clone(), terms)
}

fn embedding(t: usize, rng: &mut SeededRng, cfg: &OptimizerConfig) -> Result<f64> {
    let (from, to) = [([2, 2], [3, 3]), ([2, 2], [2, 3]), ([2, 3], [3, 3])][t % 3];
    let rho = random_state(&dims(&from), rng)?;
    let big = embed_state(&rho, &dims(&to))?;
    let (a, b) = (gamma_bracket(&rho, cfg, &[])?, gamma_bracket(&big, cfg, &[])?);
    let drift = (a.lower - b.lower).abs().max((a.upper - b.upper).abs());
    Ok(1e-10 - drift)
}

fn separable_measures(t: usize, rng: &mut SeededRng, cfg: &OptimizerConfig) -> Result<f64> {
    let d = [[2, 2], [3, 3]][t % 2];
    let s = random_separable(&dims(&d), rng)?;
    let b = gamma_bracket(s.state(), cfg, &[separable_witness(&s)?])?;
    let specs = [MeasureSpec::Egamma, MeasureSpec::F1, MeasureSpec::F2, MeasureSpec::F3 { a: 1.0 }];
    let mut margin = f64::INFINITY;
    for spec in &specs {
        margin = margin.min(measure_value(1.0 + 1e-6, spec)? - measure_value(b.upper, spec)?);
    }
    Ok(margin)
}

fn local_unitaries(t: usize, rng: &mut SeededRng) -> Result<f64> {
    let d = [[2, 2], [2, 3], [3, 3]][t % 3];
    let fd = dims(&d);
    let u: Vec<CMatrix> = d.iter().map(|&k| haar_unitary(k, rng)).collect();
    if t % 2 == 0 {
        let rho = random_state(&fd, rng)?;
        let moved = rho.conjugate_local(&u)?;
        Ok(1e-9 - (gamma_lower(&rho)? - gamma_lower(&moved)?).abs())
    } else {
        let psi = random_pure(&fd, rng)?;
        let amp = crate::linalg::kron(&u[0], &u[1]) * psi.amplitudes();
        let moved = PureState::normalized(fd, amp)?;
        let pure_drift = (gamma_pure(&psi)? - gamma_pure(&moved)?).abs();
        let lower_drift = (gamma_lower(&psi.density())? - gamma_lower(&moved.density())?).abs();
        Ok(1e-9 - pure_drift.max(lower_drift))
    }
}

fn pushforward(t: usize, rng: &mut SeededRng) -> Result<f64> {
    let d = [[2, 2], [2, 3], [3, 3]][t % 3];
    let fd = dims(&d);
    let (rho, w) = if t % 2 == 0 {
        let rho = random_state(&fd, rng)?;
        let w = operator_schmidt_terms(&rho)?;
        (rho.into_matrix(), w)
    } else {
        let s = random_separable(&fd, rng)?;
        let w = separable_witness(&s)?;
        (s.state().matrix().clone(), w)
    };
    let channel = |d_in: usize, rng: &mut SeededRng| {
        let (d_out, k, tp) = (rng.random_range(1..=3), rng.random_range(1..=3), rng.random::<bool>());
        KrausChannel::random(d_in, d_out, k, tp, rng)
    };
    let (t1, t2) = (channel(d[0], rng)?, channel(d[1], rng)?);
    let pushed = pushforward_decomposition(&t1, &t2, &w)?;
    let image = t1.tensor(&t2)?.apply(&rho)?;
    pushed.certify(&image)?;
    Ok(w.cost() + 1e-10 - pushed.cost())
}

fn mixing(t: usize, rng: &mut SeededRng, cfg: &OptimizerConfig) -> Result<f64> {
    let d = [[2, 2], [2, 3]][t % 2];
    let fd = dims(&d);
    let (sigma, tau) = (random_state(&fd, rng)?, random_state(&fd, rng)?);
    let lambda: f64 = rng.random();
    let (us, ut) = (gamma_upper(&sigma, cfg, &[])?, gamma_upper(&tau, cfg, &[])?);
    let mixed = sigma.mix(&tau, lambda)?;
    let candidate = mix_decompositions(&us.witness, &ut.witness, lambda)?;
    let um = gamma_upper(&mixed, cfg, &[candidate])?;
    Ok(lambda * us.value() + (1.0 - lambda) * ut.value() + 1e-10 - um.value())
}

fn luders_average(t: usize, rng: &mut SeededRng, cfg: &OptimizerConfig) -> Result<f64> {
    let d = [[2, 2], [2, 3]][t % 2];
    let sigma = random_state(&dims(&d), rng)?;
    let (l1, l2) = (LudersOperation::random(d[0], rng)?, LudersOperation::random(d[1], rng)?);
    luders_margin(&sigma, &l1, &l2, cfg)
}

/// `upper(sigma) - 1 + 1e-8 - sum_ij p_ij (lower(sigma_ij) - 1)`.
pub fn luders_margin(
    sigma: &DensityOperator,
    l1: &LudersOperation,
    l2: &LudersOperation,
    cfg: &OptimizerConfig,
) -> Result<f64> {
    let out = luders_outcomes(l1, l2, sigma)?;
    let mut average = 0.0;
    for b in &out.branches {
        average += b.probability * (gamma_lower(&b.state)? - 1.0);
    }
    let upper = gamma_upper(sigma, cfg, &[])?.value();
    Ok(upper - 1.0 + 1e-8 - average)
}

fn separable_bracket(t: usize, rng: &mut SeededRng, cfg: &OptimizerConfig) -> Result<f64> {
    let d: &[usize] = [&[2, 2][..], &[3, 3], &[2, 2, 2]][t % 3];
    let s = random_separable(&dims(d), rng)?;
    let w = separable_witness(&s)?;
    let b = if d.len() > 2 { gamma_bracket_multi(s.state(), cfg, &[w])? } else { gamma_bracket(s.state(), cfg, &[w])? };
    Ok((b.lower - (1.0 - 1e-9)).min(1.0 + 1e-9 - b.lower).min(1.0 + 1e-6 - b.upper))
}

fn pure_tightness(t: usize, rng: &mut SeededRng, cfg: &OptimizerConfig) -> Result<f64> {
    let d = [[2, 2], [2, 3], [3, 2], [3, 3]][t % 4];
    let psi = random_pure(&dims(&d), rng)?;
    let exact = gamma_pure(&psi)?;
    let b = gamma_bracket(&psi.density(), cfg, &[])?;
    Ok((1e-8 - (b.lower - exact).abs()).min(1e-4 * b.lower - (b.upper - b.lower)))
}

fn coeff_consistency(t: usize, rng: &mut SeededRng, cfg: &OptimizerConfig) -> Result<f64> {
    let d = [[2, 2], [2, 3], [3, 2], [3, 3]][t % 4];
    let r = rng.random_range(1..=d[0].min(d[1]));
    let c = CoeffMatrix::random(d[0], d[1], r, rng)?;
    let exact = gamma_coeff(&c);
    let b = gamma_bracket(&c.density()?, cfg, &[])?;
    Ok(1e-6 - (b.lower - exact).abs().max((b.upper - exact).abs()))
}

/// `E_gamma` exceeds the reduced entropy on entangled pure states; trial 0 is the
/// `sqrt(0.9)|00> + sqrt(0.1)|11>` instance, where the gap must exceed 0.4.
fn pure_gap(t: usize, rng: &mut SeededRng) -> Result<f64> {
    let psi = if t == 0 {
        match make_state(&Generator::Schmidt { coeffs: vec![0.9, 0.1] })? {
            Generated::Pure(p) => p,
            _ => return Err(Error::Internal("Schmidt generator returned a mixed state".into())),
        }
    } else {
        let d = [[2, 2], [2, 3], [3, 3]][t % 3];
        random_pure(&dims(&d), rng)?
    };
    let e = measure_value(gamma_pure(&psi)?, &MeasureSpec::Egamma)?;
    let s = svn_entropy(&psi.density(), 1)?.value;
    let gap = e - s;
    Ok(if t == 0 { gap - 0.4 } else { gap })
}
