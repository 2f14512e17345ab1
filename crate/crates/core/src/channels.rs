//! Operations in Kraus form `T(sigma) = sum_k A_k^dag sigma A_k` with `sum_k A_k A_k^dag <= 1`,
//! Lüders measurements, post-selection, and the image of a tensor decomposition under a local
//! operation pair.
//!
//! A Kraus operator maps the output space into the input space: it has `dims_in` rows and
//! `dims_out` columns, so `A^dag sigma A` is a `dims_out x dims_out` operator.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gamma::TensorDecomposition;
use crate::linalg::{eigh_hermitian, kron, max_abs, outer, real, trace, CMatrix, FactorDims};
use crate::sampling::{gaussian_matrix, haar_unitary, SeededRng};
use crate::states::{basis_vector, matrix_from_json, matrix_to_json, validate_density, DensityOperator};
use crate::tol;

use rand::Rng;

#[derive(Debug, Clone)]
pub struct KrausChannel {
    kraus: Vec<CMatrix>,
    dims_in: usize,
    dims_out: usize,
    trace_preserving: bool,
    /// Non-fatal findings of the complete-positivity self-check.
    warnings: Vec<String>,
}

/// Choi matrix `sum_ij |i><j| (x) T(|i><j|)`.
fn choi(kraus: &[CMatrix], dims_in: usize, dims_out: usize) -> CMatrix {
    let mut out = CMatrix::zeros(dims_in * dims_out, dims_in * dims_out);
    for i in 0..dims_in {
        for j in 0..dims_in {
            let eij = outer(&basis_vector(dims_in, i), &basis_vector(dims_in, j));
            let block = kraus.iter().fold(CMatrix::zeros(dims_out, dims_out), |acc, a| acc + a.adjoint() * &eij * a);
            out.view_mut((i * dims_out, j * dims_out), (dims_out, dims_out)).copy_from(&block);
        }
    }
    out
}

pub fn validate_channel(kraus: Vec<CMatrix>) -> Result<KrausChannel> {
    let first = kraus.first().ok_or_else(|| Error::InvalidChannel("empty Kraus family".into()))?;
    let (dims_in, dims_out) = first.shape();
    if dims_in == 0 || dims_out == 0 {
        return Err(Error::InvalidChannel("Kraus operators must be non-empty".into()));
    }
    if kraus.iter().any(|a| a.shape() != (dims_in, dims_out)) {
        return Err(Error::InvalidChannel("Kraus operators have different shapes".into()));
    }
    for a in &kraus {
        crate::linalg::check_finite(a).map_err(|_| Error::InvalidChannel("non-finite Kraus entry".into()))?;
    }
    let effect = kraus.iter().fold(CMatrix::zeros(dims_in, dims_in), |acc, a| acc + a * a.adjoint());
    let eig = eigh_hermitian(&effect)?;
    let max = eig.values.last().copied().unwrap_or(0.0);
    if max > 1.0 + tol::CHANNEL {
        return Err(Error::InvalidChannel(format!("sum A A^dag has eigenvalue {max} > 1")));
    }
    let trace_preserving = eig.values.iter().all(|&l| (l - 1.0).abs() <= tol::CHANNEL);

    let mut warnings = Vec::new();
    let min_choi = eigh_hermitian(&choi(&kraus, dims_in, dims_out))?.values.first().copied().unwrap_or(0.0);
    if min_choi < -tol::CHOI_REJECT {
        return Err(Error::InvalidChannel(format!("Choi matrix has eigenvalue {min_choi:e}")));
    }
    if min_choi < -tol::CHANNEL {
        warnings.push(format!("Choi matrix has slightly negative eigenvalue {min_choi:e}"));
    }
    Ok(KrausChannel { kraus, dims_in, dims_out, trace_preserving, warnings })
}

impl KrausChannel {
    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn dims_in(&self) -> usize {
        self.dims_in
    }

    pub fn dims_out(&self) -> usize {
        self.dims_out
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    /// Always true for a validated channel.
    pub fn is_trace_nonincreasing(&self) -> bool {
        true
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn identity(d: usize) -> Result<Self> {
        validate_channel(vec![CMatrix::identity(d, d)])
    }

    /// `sigma -> U^dag sigma U`.
    pub fn unitary(u: CMatrix) -> Result<Self> {
        validate_channel(vec![u])
    }

    /// Kraus family `{|i><j| / sqrt(d)}`, mapping everything to `1/d`.
    pub fn depolarizing(d: usize) -> Result<Self> {
        let s = real(1.0 / (d as f64).sqrt());
        let ops = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| outer(&basis_vector(d, i), &basis_vector(d, j)) * s)
            .collect();
        validate_channel(ops)
    }

    /// Single projector: keeps the `P` branch without renormalizing.
    pub fn projection(p: CMatrix) -> Result<Self> {
        validate_channel(vec![p])
    }

    /// `A_k = S^{-1/2} G_k` with `S = sum G G^dag`, then scaled by `sqrt(w)` for a random `w`
    /// in `(0.5, 1]` unless trace preservation is requested.
    pub fn random(dims_in: usize, dims_out: usize, terms: usize, trace_preserving: bool, rng: &mut SeededRng) -> Result<Self> {
        if terms == 0 {
            return Err(Error::input("random channel needs at least one Kraus operator"));
        }
        let g: Vec<CMatrix> = (0..terms).map(|_| gaussian_matrix(dims_in, dims_out, rng)).collect();
        let s = g.iter().fold(CMatrix::zeros(dims_in, dims_in), |acc, a| acc + a * a.adjoint());
        let scale = if trace_preserving { 1.0 } else { 0.5 + 0.5 * rng.random::<f64>() };
        let inv_root = eigh_hermitian(&s)?.map_values(|x| if x > tol::SUPPORT { (scale / x).sqrt() } else { 0.0 });
        let ops: Vec<CMatrix> = g.iter().map(|a| &inv_root * a).collect();
        validate_channel(ops)
    }

    pub fn apply(&self, m: &CMatrix) -> Result<CMatrix> {
        if m.shape() != (self.dims_in, self.dims_in) {
            return Err(Error::input(format!(
                "channel expects a {0}x{0} operator, got {1}x{2}",
                self.dims_in,
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(self.kraus.iter().fold(CMatrix::zeros(self.dims_out, self.dims_out), |acc, a| acc + a.adjoint() * m * a))
    }

    /// `{A_k (x) B_l}` acting on the composite space.
    pub fn tensor(&self, other: &KrausChannel) -> Result<KrausChannel> {
        let ops = self.kraus.iter().flat_map(|a| other.kraus.iter().map(move |b| kron(a, b))).collect();
        validate_channel(ops)
    }
}

/// `E = sum_k A_k A_k^dag`.
pub fn effect_of(c: &KrausChannel) -> Result<CMatrix> {
    let e = c.kraus.iter().fold(CMatrix::zeros(c.dims_in, c.dims_in), |acc, a| acc + a * a.adjoint());
    let eig = eigh_hermitian(&e)?;
    let (lo, hi) = (eig.values.first().copied().unwrap_or(0.0), eig.values.last().copied().unwrap_or(0.0));
    if lo < -tol::CHANNEL || hi > 1.0 + tol::CHANNEL {
        return Err(Error::Internal(format!("effect spectrum [{lo}, {hi}] leaves [0, 1]")));
    }
    Ok(e)
}

pub fn apply_channel(c: &KrausChannel, m: &CMatrix) -> Result<CMatrix> {
    c.apply(m)
}

/// Result of a local operation pair: a state when both parts preserve the trace.
#[derive(Debug, Clone)]
pub enum LocalOutput {
    State(DensityOperator),
    Subnormalized { matrix: CMatrix, dims: FactorDims },
}

impl LocalOutput {
    pub fn matrix(&self) -> &CMatrix {
        match self {
            LocalOutput::State(s) => s.matrix(),
            LocalOutput::Subnormalized { matrix, .. } => matrix,
        }
    }

    pub fn dims(&self) -> &FactorDims {
        match self {
            LocalOutput::State(s) => s.dims(),
            LocalOutput::Subnormalized { dims, .. } => dims,
        }
    }
}

fn check_local(t1: &KrausChannel, t2: &KrausChannel, dims: &FactorDims) -> Result<FactorDims> {
    let (d1, d2) = dims.require_bipartite()?;
    if t1.dims_in != d1 || t2.dims_in != d2 {
        return Err(Error::input(format!(
            "channels act on ({}, {}) but the operator has dims ({d1}, {d2})",
            t1.dims_in, t2.dims_in
        )));
    }
    FactorDims::bipartite(t1.dims_out, t2.dims_out)
}

pub fn apply_local(t1: &KrausChannel, t2: &KrausChannel, sigma: &DensityOperator) -> Result<LocalOutput> {
    let dims = check_local(t1, t2, sigma.dims())?;
    let matrix = t1.tensor(t2)?.apply(sigma.matrix())?;
    if t1.trace_preserving && t2.trace_preserving {
        Ok(LocalOutput::State(validate_density(matrix, dims)?))
    } else {
        Ok(LocalOutput::Subnormalized { matrix, dims })
    }
}

/// Terms `(T1(x_i), T2(y_i))`; reconstructs `(T1 (x) T2)(sigma)` and never costs more than `d`.
pub fn pushforward_decomposition(
    t1: &KrausChannel,
    t2: &KrausChannel,
    d: &TensorDecomposition,
) -> Result<TensorDecomposition> {
    let dims = check_local(t1, t2, d.dims())?;
    let terms = d
        .terms()
        .iter()
        .map(|t| Ok(vec![t1.apply(&t[0])?, t2.apply(&t[1])?]))
        .collect::<Result<Vec<_>>>()?;
    TensorDecomposition::new(dims, terms)
}

/// Complete family of mutually orthogonal projectors.
#[derive(Debug, Clone)]
pub struct LudersOperation {
    projectors: Vec<CMatrix>,
}

impl LudersOperation {
    pub fn new(projectors: Vec<CMatrix>) -> Result<Self> {
        let d = projectors.first().ok_or_else(|| Error::input("empty projector family"))?.nrows();
        if projectors.iter().any(|p| p.shape() != (d, d)) {
            return Err(Error::input("projectors must be square and of one size"));
        }
        let bad = |what: &str| Err(Error::input(format!("projector family is not {what}")));
        let mut sum = CMatrix::zeros(d, d);
        for (k, p) in projectors.iter().enumerate() {
            if max_abs(&(p - p.adjoint())) > tol::HERMITIAN || max_abs(&(p * p - p)) > tol::HERMITIAN {
                return bad("made of Hermitian idempotents");
            }
            for q in &projectors[k + 1..] {
                if max_abs(&(p * q)) > tol::HERMITIAN {
                    return bad("mutually orthogonal");
                }
            }
            sum += p;
        }
        if max_abs(&(sum - CMatrix::identity(d, d))) > tol::HERMITIAN {
            return bad("complete");
        }
        Ok(LudersOperation { projectors })
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].nrows()
    }

    pub fn trivial(d: usize) -> Self {
        LudersOperation { projectors: vec![CMatrix::identity(d, d)] }
    }

    pub fn computational(d: usize) -> Self {
        let projectors = (0..d).map(|i| outer(&basis_vector(d, i), &basis_vector(d, i))).collect();
        LudersOperation { projectors }
    }

    /// A Haar-random basis cut into a random number of consecutive groups.
    pub fn random(d: usize, rng: &mut SeededRng) -> Result<Self> {
        if d == 0 {
            return Err(Error::input("projector family needs dimension >= 1"));
        }
        let u = haar_unitary(d, rng);
        let mut cuts: Vec<usize> = (1..d).filter(|_| rng.random::<bool>()).collect();
        cuts.insert(0, 0);
        cuts.push(d);
        let projectors = cuts
            .windows(2)
            .map(|w| (w[0]..w[1]).fold(CMatrix::zeros(d, d), |acc, k| acc + outer(&u.column(k).into_owned(), &u.column(k).into_owned())))
            .collect();
        Self::new(projectors)
    }

    /// The pinching `sigma -> sum_k P_k sigma P_k` as a channel.
    pub fn channel(&self) -> Result<KrausChannel> {
        validate_channel(self.projectors.clone())
    }
}

#[derive(Debug, Clone)]
pub struct Branch {
    pub labels: (usize, usize),
    pub probability: f64,
    pub state: DensityOperator,
}

/// Branches in lexicographic label order; branches below the probability cutoff are omitted.
#[derive(Debug, Clone)]
pub struct MeasurementOutcome {
    pub branches: Vec<Branch>,
}

impl MeasurementOutcome {
    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }
}

pub fn luders_outcomes(l1: &LudersOperation, l2: &LudersOperation, sigma: &DensityOperator) -> Result<MeasurementOutcome> {
    let (d1, d2) = sigma.dims().require_bipartite()?;
    if l1.dim() != d1 || l2.dim() != d2 {
        return Err(Error::input(format!(
            "projector families act on ({}, {}) but the state has dims ({d1}, {d2})",
            l1.dim(),
            l2.dim()
        )));
    }
    let mut branches = Vec::new();
    for (i, p) in l1.projectors.iter().enumerate() {
        for (j, q) in l2.projectors.iter().enumerate() {
            let pq = kron(p, q);
            let unnormalized = &pq * sigma.matrix() * &pq;
            let probability = trace(&unnormalized).re;
            if probability < tol::BRANCH {
                continue;
            }
            let state = validate_density(unnormalized.unscale(probability), sigma.dims().clone())?;
            branches.push(Branch { labels: (i, j), probability, state });
        }
    }
    let total: f64 = branches.iter().map(|b| b.probability).sum();
    if (total - 1.0).abs() > tol::TRACE {
        return Err(Error::Internal(format!("branch probabilities sum to {total}")));
    }
    Ok(MeasurementOutcome { branches })
}

/// `T(sigma) / Tr T(sigma)`. Entanglement can grow under this map, so it is not one of the
/// operations the measures are monotone under.
pub fn post_select(c: &KrausChannel, sigma: &DensityOperator) -> Result<DensityOperator> {
    let out = c.apply(sigma.matrix())?;
    let p = trace(&out).re;
    if !(p > tol::BRANCH) {
        return Err(Error::DegenerateBranch(p));
    }
    let dims = if c.dims_out == c.dims_in { sigma.dims().clone() } else { FactorDims::new(vec![c.dims_out])? };
    validate_density(out.unscale(p), dims)
}

/// On-disk channel: `{"kraus": [matrix, ...], "dims_in": d, "dims_out": d'}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub kraus: Vec<Vec<[f64; 2]>>,
    pub dims_in: usize,
    pub dims_out: usize,
}

impl ChannelFile {
    pub fn from_channel(c: &KrausChannel) -> Self {
        ChannelFile { kraus: c.kraus.iter().map(matrix_to_json).collect(), dims_in: c.dims_in, dims_out: c.dims_out }
    }

    pub fn into_channel(self) -> Result<KrausChannel> {
        let ops = self
            .kraus
            .iter()
            .map(|m| matrix_from_json(m, self.dims_in, self.dims_out))
            .collect::<Result<Vec<_>>>()?;
        validate_channel(ops)
    }
}

/// On-disk Lüders family: `{"projectors": [matrix, ...]}`, each matrix square.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LudersFile {
    pub projectors: Vec<Vec<[f64; 2]>>,
}

impl LudersFile {
    pub fn from_operation(l: &LudersOperation) -> Self {
        LudersFile { projectors: l.projectors.iter().map(matrix_to_json).collect() }
    }

    pub fn into_operation(self) -> Result<LudersOperation> {
        let ops = self
            .projectors
            .iter()
            .map(|m| {
                let d = (m.len() as f64).sqrt().round() as usize;
                matrix_from_json(m, d, d)
            })
            .collect::<Result<Vec<_>>>()?;
        LudersOperation::new(ops)
    }
}

pub fn read_channel(path: impl AsRef<Path>) -> Result<KrausChannel> {
    let file: ChannelFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    file.into_channel()
}

pub fn write_channel(c: &KrausChannel, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(&ChannelFile::from_channel(c))?)?;
    Ok(())
}

pub fn read_luders(path: impl AsRef<Path>) -> Result<LudersOperation> {
    let file: LudersFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    file.into_operation()
}

pub fn write_luders(l: &LudersOperation, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(&LudersFile::from_operation(l))?)?;
    Ok(())
}
