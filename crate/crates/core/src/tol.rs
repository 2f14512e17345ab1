//! Tolerances shared by every module. Comparisons between modules must go through these.

/// Hermiticity and unit-trace checks.
pub const HERMITIAN: f64 = 1e-9;
pub const TRACE: f64 = 1e-9;
/// Most negative eigenvalue a density operator may carry before being rejected.
pub const PSD_CLAMP: f64 = 1e-9;
/// Eigenvalues below this are treated as outside the support of a spectral function.
pub const SUPPORT: f64 = 1e-12;
/// Relative reconstruction error of a factorization.
pub const RECONSTRUCTION: f64 = 1e-10;
/// Unit-norm check for pure states.
pub const UNIT_NORM: f64 = 1e-10;
/// Hilbert-Schmidt residual a tensor decomposition must meet to count as a certificate.
pub const WITNESS_RESIDUAL: f64 = 1e-8;
/// Operator Schmidt terms below this singular value are dropped.
pub const SCHMIDT_DROP: f64 = 1e-12;
/// Branch probabilities below this are treated as zero.
pub const BRANCH: f64 = 1e-12;
/// Channel bound `sum A A^dag <= 1`.
pub const CHANNEL: f64 = 1e-9;
/// Choi eigenvalues in `[-CHOI_REJECT, -CHANNEL)` produce a warning, below that a rejection.
pub const CHOI_REJECT: f64 = 1e-7;
/// Slack allowed between the two ends of a bracket.
pub const BRACKET: f64 = 1e-9;
/// Margin used to turn a bracket into a separability verdict.
pub const VERDICT: f64 = 1e-6;
/// Values of the cross norm below `1 - MEASURE_FLOOR` are rejected by the measures; values
/// between that and 1 are clamped to 1.
pub const MEASURE_FLOOR: f64 = 1e-6;
