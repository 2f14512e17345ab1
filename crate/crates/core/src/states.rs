//! Pure states, density operators, the named generators and the JSON state file.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    c, eigh_hermitian, hermiticity_defect, kron_all, max_abs, outer, real, trace, CMatrix, CVector,
    FactorDims, C64,
};
use crate::sampling::{
    gaussian_matrix, random_density, random_unit_vector, random_weights, rng_from_seed, SeededRng,
};
use crate::tol;

/// Unit vector on a tensor product space.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dims: FactorDims,
    amplitudes: CVector,
}

impl PureState {
    pub fn new(dims: FactorDims, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != dims.total() {
            return Err(Error::input(format!(
                "dims {:?} need {} amplitudes, got {}",
                dims.as_slice(),
                dims.total(),
                amplitudes.len()
            )));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::input("amplitudes must be finite"));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > tol::UNIT_NORM {
            return Err(Error::InvalidState(format!("pure state has norm {norm}, expected 1")));
        }
        Ok(PureState { dims, amplitudes })
    }

    /// Normalizes before validating.
    pub fn normalized(dims: FactorDims, amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0) {
            return Err(Error::input("cannot normalize a zero vector"));
        }
        Self::new(dims, amplitudes.unscale(norm))
    }

    pub fn dims(&self) -> &FactorDims {
        &self.dims
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn projector(&self) -> CMatrix {
        outer(&self.amplitudes, &self.amplitudes)
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator { dims: self.dims.clone(), matrix: self.projector() }
    }
}

/// Hermitian, positive, trace-one operator annotated with its factor dims.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    dims: FactorDims,
    matrix: CMatrix,
}

impl DensityOperator {
    pub fn dims(&self) -> &FactorDims {
        &self.dims
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Conjugation by a local unitary on every factor.
    pub fn conjugate_local(&self, unitaries: &[CMatrix]) -> Result<DensityOperator> {
        if unitaries.len() != self.dims.parties() {
            return Err(Error::input("need one unitary per factor"));
        }
        for (u, &d) in unitaries.iter().zip(self.dims.as_slice()) {
            if u.shape() != (d, d) {
                return Err(Error::input("unitary does not match factor dimension"));
            }
        }
        let u = kron_all(unitaries);
        validate_density(&u * &self.matrix * u.adjoint(), self.dims.clone())
    }

    /// Convex combination `lambda * self + (1 - lambda) * other`.
    pub fn mix(&self, other: &DensityOperator, lambda: f64) -> Result<DensityOperator> {
        if self.dims != other.dims {
            return Err(Error::input("cannot mix states on different dims"));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::input(format!("mixing weight {lambda} outside [0, 1]")));
        }
        validate_density(
            self.matrix.scale(lambda) + other.matrix.scale(1.0 - lambda),
            self.dims.clone(),
        )
    }
}

/// Checks Hermiticity, positivity and unit trace. Small negative eigenvalues are clamped to
/// zero; the clamp is refused when it would move the trace by more than the trace tolerance.
pub fn validate_density(m: CMatrix, dims: FactorDims) -> Result<DensityOperator> {
    dims.check_matrix(&m)?;
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::input("density matrix has non-finite entries"));
    }
    let defect = hermiticity_defect(&m);
    if defect > tol::HERMITIAN * max_abs(&m).max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    let eig = eigh_hermitian(&m)?;
    let min = eig.values.first().copied().unwrap_or(0.0);
    if min < -tol::PSD_CLAMP {
        return Err(Error::NotPositive(min));
    }
    let tr = trace(&m).re;
    if (tr - 1.0).abs() > tol::TRACE {
        return Err(Error::BadTrace(tr));
    }
    if min < -tol::SUPPORT {
        let removed: f64 = eig.values.iter().filter(|&&x| x < 0.0).map(|x| -x).sum();
        if removed >= tol::TRACE {
            return Err(Error::NotPositive(min));
        }
        let clamped = eig.map_values(|x| x.max(0.0));
        let t = trace(&clamped).re;
        return Ok(DensityOperator { dims, matrix: clamped.unscale(t) });
    }
    Ok(DensityOperator { dims, matrix: m })
}

/// Explicitly separable state `sum_i w_i rho_i^(1) (x) ... (x) rho_i^(n)`; the components are
/// kept so the decomposition can be used as a certificate.
#[derive(Debug, Clone)]
pub struct SeparableState {
    state: DensityOperator,
    weights: Vec<f64>,
    factors: Vec<Vec<CMatrix>>,
}

impl SeparableState {
    pub fn new(dims: FactorDims, weights: Vec<f64>, factors: Vec<Vec<CMatrix>>) -> Result<Self> {
        if weights.is_empty() || weights.len() != factors.len() {
            return Err(Error::input("need one weight per product term"));
        }
        if weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::input("separable weights must be non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > tol::TRACE {
            return Err(Error::input(format!("separable weights sum to {total}")));
        }
        let mut acc = CMatrix::zeros(dims.total(), dims.total());
        for (w, term) in weights.iter().zip(&factors) {
            if term.len() != dims.parties() {
                return Err(Error::input("product term has the wrong number of factors"));
            }
            for (f, &d) in term.iter().zip(dims.as_slice()) {
                validate_density(f.clone(), FactorDims::new(vec![d])?)?;
            }
            acc += kron_all(term).scale(*w);
        }
        let state = validate_density(acc, dims)?;
        Ok(SeparableState { state, weights, factors })
    }

    pub fn state(&self) -> &DensityOperator {
        &self.state
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn factors(&self) -> &[Vec<CMatrix>] {
        &self.factors
    }

    /// Rebuilds the operator from its stored components.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.state.dim();
        self.weights
            .iter()
            .zip(&self.factors)
            .fold(CMatrix::zeros(n, n), |acc, (w, t)| acc + kron_all(t).scale(*w))
    }
}

/// `rho = sum_ij a_ij |phi_i><phi_j| (x) |chi_i><chi_j|` over orthonormal families.
#[derive(Debug, Clone)]
pub struct CoeffMatrix {
    a: CMatrix,
    basis1: Vec<CVector>,
    basis2: Vec<CVector>,
}

fn check_orthonormal(family: &[CVector]) -> Result<()> {
    for (i, u) in family.iter().enumerate() {
        for (j, v) in family.iter().enumerate() {
            let ip = u.dotc(v);
            let expect = if i == j { 1.0 } else { 0.0 };
            if (ip - real(expect)).norm() > tol::UNIT_NORM {
                return Err(Error::input("basis family is not orthonormal"));
            }
        }
    }
    Ok(())
}

impl CoeffMatrix {
    pub fn new(a: CMatrix, basis1: Vec<CVector>, basis2: Vec<CVector>) -> Result<Self> {
        let r = a.nrows();
        if !a.is_square() || basis1.len() != r || basis2.len() != r {
            return Err(Error::input("coefficient matrix must be r x r with r vectors per family"));
        }
        if basis1.iter().any(|v| v.len() != basis1[0].len())
            || basis2.iter().any(|v| v.len() != basis2[0].len())
        {
            return Err(Error::input("basis vectors of one family must share a dimension"));
        }
        check_orthonormal(&basis1)?;
        check_orthonormal(&basis2)?;
        let out = CoeffMatrix { a, basis1, basis2 };
        out.density()?;
        Ok(out)
    }

    /// Random positive coefficient matrix of rank `r` over random orthonormal families.
    pub fn random(d1: usize, d2: usize, r: usize, rng: &mut SeededRng) -> Result<Self> {
        if r == 0 || r > d1.min(d2) {
            return Err(Error::input(format!("rank {r} must be in 1..={}", d1.min(d2))));
        }
        let a = random_density(r, rng);
        let q1 = gaussian_matrix(d1, d1, rng).qr().q();
        let q2 = gaussian_matrix(d2, d2, rng).qr().q();
        let basis1 = (0..r).map(|k| q1.column(k).into_owned()).collect();
        let basis2 = (0..r).map(|k| q2.column(k).into_owned()).collect();
        Self::new(a, basis1, basis2)
    }

    pub fn a(&self) -> &CMatrix {
        &self.a
    }

    pub fn dims(&self) -> FactorDims {
        FactorDims::new(vec![self.basis1[0].len(), self.basis2[0].len()])
            .expect("families are non-empty")
    }

    pub fn product_vector(&self, i: usize) -> CVector {
        self.basis1[i].kronecker(&self.basis2[i])
    }

    pub fn density(&self) -> Result<DensityOperator> {
        let dims = self.dims();
        let vecs: Vec<CVector> = (0..self.a.nrows()).map(|i| self.product_vector(i)).collect();
        let mut m = CMatrix::zeros(dims.total(), dims.total());
        for (i, vi) in vecs.iter().enumerate() {
            for (j, vj) in vecs.iter().enumerate() {
                m += outer(vi, vj) * self.a[(i, j)];
            }
        }
        validate_density(m, dims)
    }
}

/// Any state a file or generator can hold.
#[derive(Debug, Clone)]
pub enum State {
    Pure(PureState),
    Density(DensityOperator),
}

impl State {
    pub fn dims(&self) -> &FactorDims {
        match self {
            State::Pure(p) => p.dims(),
            State::Density(d) => d.dims(),
        }
    }

    pub fn to_density(&self) -> DensityOperator {
        match self {
            State::Pure(p) => p.density(),
            State::Density(d) => d.clone(),
        }
    }
}

/// Output of [`make_state`].
#[derive(Debug, Clone)]
pub enum Generated {
    Pure(PureState),
    Density(DensityOperator),
    Separable(SeparableState),
}

impl Generated {
    pub fn density(&self) -> DensityOperator {
        match self {
            Generated::Pure(p) => p.density(),
            Generated::Density(d) => d.clone(),
            Generated::Separable(s) => s.state().clone(),
        }
    }

    pub fn into_state(self) -> State {
        match self {
            Generated::Pure(p) => State::Pure(p),
            Generated::Density(d) => State::Density(d),
            Generated::Separable(s) => State::Density(s.state),
        }
    }
}

/// Named state generators.
#[derive(Debug, Clone)]
pub enum Generator {
    /// `(1/sqrt d) sum_i |ii>` on `(d, d)`.
    Bell { d: usize },
    /// `(1/sqrt d) sum_i |i...i>` on `parties` copies of `C^d`.
    Ghz { parties: usize, d: usize },
    /// Tensor product of the given local vectors (normalized).
    Product { factors: Vec<CVector> },
    /// `sum_i sqrt(p_i) |ii>` on `(d, d)` with `d = coeffs.len()`.
    Schmidt { coeffs: Vec<f64> },
    /// `(1-eps)|00><00| + (eps/2)(|12>-|21>)(<12|-<21|)` on `(3, 3)`.
    RhoEps { epsilon: f64 },
    Coeff(CoeffMatrix),
    RandomPure { dims: FactorDims, seed: u64 },
    RandomDensity { dims: FactorDims, seed: u64 },
    RandomSeparable { dims: FactorDims, terms: usize, seed: u64 },
    /// Convex mixture of supplied states.
    Mixture { states: Vec<DensityOperator>, weights: Vec<f64> },
}

pub fn basis_vector(d: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(d);
    v[i] = real(1.0);
    v
}

pub fn rho_eps(epsilon: f64) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::input(format!("epsilon {epsilon} outside [0, 1]")));
    }
    let dims = FactorDims::bipartite(3, 3)?;
    let e00 = basis_vector(9, 0);
    let anti = antisymmetric_12();
    let m = outer(&e00, &e00).scale(1.0 - epsilon) + outer(&anti, &anti).scale(epsilon);
    validate_density(m, dims)
}

/// `(|12> - |21>)/sqrt 2` on `(3, 3)`.
pub fn antisymmetric_12() -> CVector {
    let s = 0.5f64.sqrt();
    let mut v = CVector::zeros(9);
    v[5] = real(s);
    v[7] = real(-s);
    v
}

pub fn make_state(generator: &Generator) -> Result<Generated> {
    match generator {
        Generator::Bell { d } => {
            let d = *d;
            if d < 2 {
                return Err(Error::input("Bell state needs local dimension >= 2"));
            }
            let amp = CVector::from_fn(d * d, |k, _| if k % (d + 1) == 0 { real(1.0) } else { real(0.0) });
            Ok(Generated::Pure(PureState::normalized(FactorDims::bipartite(d, d)?, amp)?))
        }
        Generator::Ghz { parties, d } => {
            let (n, d) = (*parties, *d);
            if n < 2 || d < 2 {
                return Err(Error::input("GHZ state needs >= 2 parties of dimension >= 2"));
            }
            let dims = FactorDims::new(vec![d; n])?;
            let mut amp = CVector::zeros(dims.total());
            for i in 0..d {
                amp[dims.index(&vec![i; n])] = real(1.0);
            }
            Ok(Generated::Pure(PureState::normalized(dims, amp)?))
        }
        Generator::Product { factors } => {
            if factors.is_empty() {
                return Err(Error::input("product state needs at least one factor"));
            }
            let dims = FactorDims::new(factors.iter().map(|f| f.len()).collect())?;
            let mut amp = CVector::from_element(1, real(1.0));
            for f in factors {
                let n = f.norm();
                if !(n > 0.0) {
                    return Err(Error::input("product factor is zero"));
                }
                amp = amp.kronecker(&f.unscale(n));
            }
            Ok(Generated::Pure(PureState::normalized(dims, amp)?))
        }
        Generator::Schmidt { coeffs } => {
            let d = coeffs.len();
            if d == 0 || coeffs.iter().any(|&p| !(p >= 0.0)) {
                return Err(Error::input("Schmidt coefficients must be non-negative"));
            }
            let total: f64 = coeffs.iter().sum();
            if (total - 1.0).abs() > tol::UNIT_NORM {
                return Err(Error::input(format!("Schmidt coefficients sum to {total}")));
            }
            let mut amp = CVector::zeros(d * d);
            for (i, p) in coeffs.iter().enumerate() {
                amp[i * d + i] = real(p.sqrt());
            }
            Ok(Generated::Pure(PureState::normalized(FactorDims::bipartite(d, d)?, amp)?))
        }
        Generator::RhoEps { epsilon } => Ok(Generated::Density(rho_eps(*epsilon)?)),
        Generator::Coeff(cm) => Ok(Generated::Density(cm.density()?)),
        Generator::RandomPure { dims, seed } => {
            let mut rng = rng_from_seed(*seed);
            let amp = random_unit_vector(dims.total(), &mut rng);
            Ok(Generated::Pure(PureState::normalized(dims.clone(), amp)?))
        }
        Generator::RandomDensity { dims, seed } => {
            let mut rng = rng_from_seed(*seed);
            let m = random_density(dims.total(), &mut rng);
            Ok(Generated::Density(validate_density(m, dims.clone())?))
        }
        Generator::RandomSeparable { dims, terms, seed } => {
            if *terms == 0 {
                return Err(Error::input("random separable state needs at least one term"));
            }
            let mut rng = rng_from_seed(*seed);
            let weights = random_weights(*terms, &mut rng);
            let factors = (0..*terms)
                .map(|_| dims.as_slice().iter().map(|&d| random_density(d, &mut rng)).collect())
                .collect();
            Ok(Generated::Separable(SeparableState::new(dims.clone(), weights, factors)?))
        }
        Generator::Mixture { states, weights } => {
            if states.is_empty() || states.len() != weights.len() {
                return Err(Error::input("mixture needs one weight per state"));
            }
            if weights.iter().any(|&w| !(w >= 0.0)) {
                return Err(Error::input("mixture weights must be non-negative"));
            }
            let total: f64 = weights.iter().sum();
            if (total - 1.0).abs() > tol::TRACE {
                return Err(Error::input(format!("mixture weights sum to {total}")));
            }
            let dims = states[0].dims().clone();
            if states.iter().any(|s| s.dims() != &dims) {
                return Err(Error::input("mixture components live on different dims"));
            }
            let n = dims.total();
            let m = states
                .iter()
                .zip(weights)
                .fold(CMatrix::zeros(n, n), |acc, (s, w)| acc + s.matrix().scale(*w));
            Ok(Generated::Density(validate_density(m, dims)?))
        }
    }
}

/// Zero-pads an operator factor-wise into larger dims.
pub fn embed_operator(m: &CMatrix, dims: &FactorDims, new_dims: &FactorDims) -> Result<CMatrix> {
    dims.check_matrix(m)?;
    if dims.parties() != new_dims.parties() {
        return Err(Error::input("embedding must keep the number of factors"));
    }
    if dims.as_slice().iter().zip(new_dims.as_slice()).any(|(a, b)| b < a) {
        return Err(Error::input(format!(
            "cannot embed dims {:?} into smaller dims {:?}",
            dims.as_slice(),
            new_dims.as_slice()
        )));
    }
    let map: Vec<usize> = (0..dims.total()).map(|i| new_dims.index(&dims.digits(i))).collect();
    let mut out = CMatrix::zeros(new_dims.total(), new_dims.total());
    for (r, &nr) in map.iter().enumerate() {
        for (col, &nc) in map.iter().enumerate() {
            out[(nr, nc)] = m[(r, col)];
        }
    }
    Ok(out)
}

pub fn embed_state(s: &DensityOperator, new_dims: &FactorDims) -> Result<DensityOperator> {
    if s.dims() == new_dims {
        return Ok(s.clone());
    }
    let m = embed_operator(s.matrix(), s.dims(), new_dims)?;
    Ok(DensityOperator { dims: new_dims.clone(), matrix: m })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Density,
    Pure,
}

/// On-disk state: `{"kind": ..., "dims": [...], "data": [[re, im], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub kind: StateKind,
    pub dims: Vec<usize>,
    pub data: Vec<[f64; 2]>,
}

pub fn entries_to_json(entries: impl IntoIterator<Item = C64>) -> Vec<[f64; 2]> {
    entries.into_iter().map(|z| [z.re, z.im]).collect()
}

pub fn entries_from_json(data: &[[f64; 2]]) -> Result<Vec<C64>> {
    if data.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Schema("entries must be finite".into()));
    }
    Ok(data.iter().map(|[re, im]| c(*re, *im)).collect())
}

/// Row-major `[re, im]` list of a matrix.
pub fn matrix_to_json(m: &CMatrix) -> Vec<[f64; 2]> {
    entries_to_json(crate::linalg::vec_row_major(m))
}

pub fn matrix_from_json(data: &[[f64; 2]], rows: usize, cols: usize) -> Result<CMatrix> {
    if data.len() != rows * cols {
        return Err(Error::Schema(format!(
            "expected {} entries for a {rows}x{cols} matrix, got {}",
            rows * cols,
            data.len()
        )));
    }
    let e = entries_from_json(data)?;
    Ok(CMatrix::from_row_slice(rows, cols, &e))
}

impl StateFile {
    pub fn from_state(state: &State) -> Self {
        match state {
            State::Pure(p) => StateFile {
                kind: StateKind::Pure,
                dims: p.dims().as_slice().to_vec(),
                data: entries_to_json(p.amplitudes().iter().copied()),
            },
            State::Density(d) => StateFile {
                kind: StateKind::Density,
                dims: d.dims().as_slice().to_vec(),
                data: matrix_to_json(d.matrix()),
            },
        }
    }

    pub fn into_state(self) -> Result<State> {
        let dims = FactorDims::new(self.dims).map_err(|e| Error::Schema(e.to_string()))?;
        let n = dims.total();
        match self.kind {
            StateKind::Pure => {
                if self.data.len() != n {
                    return Err(Error::Schema(format!(
                        "dims product {n} does not match {} amplitudes",
                        self.data.len()
                    )));
                }
                let amp = CVector::from_vec(entries_from_json(&self.data)?);
                Ok(State::Pure(PureState::new(dims, amp)?))
            }
            StateKind::Density => {
                if self.data.len() != n * n {
                    return Err(Error::Schema(format!(
                        "dims product {n} needs {} matrix entries, got {}",
                        n * n,
                        self.data.len()
                    )));
                }
                let m = matrix_from_json(&self.data, n, n)?;
                Ok(State::Density(validate_density(m, dims)?))
            }
        }
    }
}

pub fn read_state(path: impl AsRef<Path>) -> Result<State> {
    let text = fs::read_to_string(path)?;
    let file: StateFile = serde_json::from_str(&text)?;
    file.into_state()
}

pub fn write_state(state: &State, path: impl AsRef<Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(&StateFile::from_state(state))?;
    fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hs_norm, partial_trace};
    use crate::sampling::haar_unitary;

    fn spectrum(m: &CMatrix) -> Vec<f64> {
        eigh_hermitian(m).unwrap().values
    }

    #[test]
    fn validate_examples() {
        let dims = FactorDims::bipartite(2, 2).unwrap();
        assert!(validate_density(CMatrix::identity(4, 4).scale(0.25), dims).is_ok());

        let d1 = FactorDims::new(vec![2]).unwrap();
        let bad = CMatrix::from_diagonal(&CVector::from_vec(vec![real(1.5), real(-0.5)]));
        assert!(matches!(validate_density(bad, d1.clone()), Err(Error::NotPositive(_))));

        let short = CMatrix::from_diagonal(&CVector::from_vec(vec![real(0.5), real(0.4)]));
        assert!(matches!(validate_density(short, d1.clone()), Err(Error::BadTrace(_))));

        let mut skew = CMatrix::identity(2, 2).scale(0.5);
        skew[(0, 1)] = real(0.1);
        assert!(matches!(validate_density(skew, d1), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn tiny_negative_eigenvalues_are_clamped() {
        let d1 = FactorDims::new(vec![2]).unwrap();
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![real(1.0 + 1e-10), real(-1e-10)]));
        let rho = validate_density(m, d1).unwrap();
        assert!(spectrum(rho.matrix())[0] >= -1e-15);
        assert!((trace(rho.matrix()).re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn bell_amplitudes() {
        let Generated::Pure(p) = make_state(&Generator::Bell { d: 2 }).unwrap() else { panic!() };
        let s = 0.5f64.sqrt();
        let expect = [s, 0.0, 0.0, s];
        for (z, e) in p.amplitudes().iter().zip(expect) {
            assert!((z - real(e)).norm() < 1e-15);
        }
    }

    #[test]
    fn rho_eps_spectrum() {
        let rho = rho_eps(0.01).unwrap();
        let ev = spectrum(rho.matrix());
        assert!((ev[8] - 0.99).abs() < 1e-14);
        assert!((ev[7] - 0.01).abs() < 1e-14);
        assert!(ev[..7].iter().all(|x| x.abs() < 1e-14));
        assert!(rho_eps(1.5).is_err());
    }

    #[test]
    fn random_separable_carries_its_witness() {
        let g = Generator::RandomSeparable { dims: FactorDims::bipartite(2, 2).unwrap(), terms: 3, seed: 7 };
        let Generated::Separable(s) = make_state(&g).unwrap() else { panic!() };
        assert_eq!(s.weights().len(), 3);
        assert!(hs_norm(&(s.reconstruct() - s.state().matrix())) < 1e-12);
    }

    #[test]
    fn generators_are_deterministic() {
        let g = Generator::RandomDensity { dims: FactorDims::bipartite(2, 3).unwrap(), seed: 99 };
        assert_eq!(make_state(&g).unwrap().density(), make_state(&g).unwrap().density());
    }

    #[test]
    fn ghz_and_product() {
        let Generated::Pure(g) = make_state(&Generator::Ghz { parties: 3, d: 2 }).unwrap() else { panic!() };
        assert!((g.amplitudes()[0] - real(0.5f64.sqrt())).norm() < 1e-15);
        assert!((g.amplitudes()[7] - real(0.5f64.sqrt())).norm() < 1e-15);
        let p = make_state(&Generator::Product {
            factors: vec![basis_vector(2, 1), CVector::from_vec(vec![real(1.0), real(1.0)])],
        })
        .unwrap();
        assert_eq!(p.density().dims().as_slice(), &[2, 2]);
    }

    #[test]
    fn coeff_matrix_induces_a_state() {
        let mut rng = rng_from_seed(1);
        let cm = CoeffMatrix::random(3, 3, 2, &mut rng).unwrap();
        let rho = cm.density().unwrap();
        assert!((trace(rho.matrix()).re - 1.0).abs() < 1e-12);

        let bad = CMatrix::from_row_slice(2, 2, &[real(0.5), real(0.7), real(0.7), real(0.5)]);
        let b = vec![basis_vector(2, 0), basis_vector(2, 1)];
        assert!(CoeffMatrix::new(bad, b.clone(), b).is_err());
    }

    #[test]
    fn embedding_pads_with_zeros() {
        let bell = make_state(&Generator::Bell { d: 2 }).unwrap().density();
        let big = embed_state(&bell, &FactorDims::bipartite(3, 3).unwrap()).unwrap();
        assert_eq!(big.dim(), 9);
        // |00> -> 0, |11> -> 4 in (3,3)
        assert!((big.matrix()[(0, 4)] - real(0.5)).norm() < 1e-15);
        assert!((big.matrix()[(4, 4)] - real(0.5)).norm() < 1e-15);
        assert!((hs_norm(big.matrix()) - hs_norm(bell.matrix())).abs() < 1e-15);

        let same = embed_state(&bell, bell.dims()).unwrap();
        assert_eq!(same, bell);

        let g = Generator::RandomDensity { dims: FactorDims::bipartite(2, 3).unwrap(), seed: 5 };
        let rho = make_state(&g).unwrap().density();
        let big = embed_state(&rho, &FactorDims::bipartite(4, 4).unwrap()).unwrap();
        let mut a = spectrum(rho.matrix());
        a.extend(std::iter::repeat(0.0).take(10));
        a.sort_by(f64::total_cmp);
        let b = spectrum(big.matrix());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(embed_state(&rho, &FactorDims::bipartite(1, 3).unwrap()).is_err());
    }

    #[test]
    fn local_conjugation_keeps_reductions_similar() {
        let mut rng = rng_from_seed(2);
        let rho = make_state(&Generator::RandomDensity { dims: FactorDims::bipartite(2, 2).unwrap(), seed: 3 })
            .unwrap()
            .density();
        let u = [haar_unitary(2, &mut rng), haar_unitary(2, &mut rng)];
        let out = rho.conjugate_local(&u).unwrap();
        let r0 = partial_trace(rho.matrix(), rho.dims(), &[0]).unwrap();
        let r1 = partial_trace(out.matrix(), out.dims(), &[0]).unwrap();
        let (s0, s1) = (spectrum(&r0), spectrum(&r1));
        assert!((s0[0] - s1[0]).abs() < 1e-12);
    }

    #[test]
    fn file_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bell.json");
        let bell = make_state(&Generator::Bell { d: 2 }).unwrap().into_state();
        write_state(&bell, &path).unwrap();
        let State::Pure(back) = read_state(&path).unwrap() else { panic!() };
        let State::Pure(orig) = bell else { panic!() };
        assert_eq!(back.amplitudes(), orig.amplitudes());

        let bad_trace = r#"{"kind":"density","dims":[2],"data":[[0.5,0],[0,0],[0,0],[0.4,0]]}"#;
        std::fs::write(&path, bad_trace).unwrap();
        assert!(matches!(read_state(&path), Err(Error::BadTrace(_))));

        let bad_shape = r#"{"kind":"density","dims":[2,2],"data":[[0.5,0],[0,0],[0,0],[0.5,0]]}"#;
        std::fs::write(&path, bad_shape).unwrap();
        assert!(matches!(read_state(&path), Err(Error::Schema(_))));

        std::fs::write(&path, r#"{"kind":"mixed","dims":[2],"data":[]}"#).unwrap();
        assert!(matches!(read_state(&path), Err(Error::Schema(_))));
    }
}
