//! Derivative-free descent over decompositions `sum_j x_j (x) y_j` of a fixed operator.
//!
//! Starting from the operator Schmidt terms, pairs of terms are mixed by an invertible 2x2
//! matrix `M` on the left factors and `M^{-T}` on the right factors, which leaves the sum
//! unchanged. `M = R(theta, phi) S(z)` with `R` unitary and `S` a unit upper shear.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::decompositions::OperatorSchmidt;
use crate::linalg::{c, real, singular_values, svd, CMatrix, C64};
use crate::sampling::{derive_seed, gaussian_matrix, rng_from_seed};

use super::OptimizerConfig;

/// Step halvings before a pair is considered converged.
const HALVINGS: i32 = 22;
/// Trial moves per pair optimization.
const PAIR_EVALS: usize = 32;
/// Relative decrease a move must achieve to be accepted.
const GAIN: f64 = 1e-12;
/// Relative gap below which two Schmidt values count as degenerate.
const DEGENERATE: f64 = 1e-6;
/// Coarse grid resolution of the degenerate-pair alignment.
const ALIGN_GRID: usize = 16;

#[derive(Debug, Clone)]
pub(crate) struct SearchOutcome {
    pub x: Vec<CMatrix>,
    pub y: Vec<CMatrix>,
    pub cost: f64,
    pub restarts: usize,
    pub iterations: usize,
}

/// Trace norm with closed forms for the small cases the search evaluates most.
pub(crate) fn fast_trace_norm(m: &CMatrix) -> f64 {
    match m.nrows() {
        1 => m[(0, 0)].norm(),
        2 => {
            let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
            (m.norm_squared() + 2.0 * det.norm()).max(0.0).sqrt()
        }
        3 => trace_norm_3(m),
        _ => singular_values(m).map(|s| s.iter().sum()).unwrap_or(f64::INFINITY),
    }
}

/// For 3x3 `X` with singular values `s`, `T = sum s` solves `T^2 = a + 2 sqrt(c + 2 d T)` where
/// `a = ||X||_F^2`, `c` is the sum of squared 2x2 minors and `d = |det X|`. All three come
/// straight from the entries, so rank-deficient inputs stay accurate. The fixed-point map
/// contracts by at least a factor 9.
fn trace_norm_3(m: &CMatrix) -> f64 {
    let e = |i: usize, j: usize| m[(i, j)];
    let minor = |r: [usize; 2], k: [usize; 2]| e(r[0], k[0]) * e(r[1], k[1]) - e(r[0], k[1]) * e(r[1], k[0]);
    let pairs = [[1, 2], [0, 2], [0, 1]];
    let mut c = 0.0;
    for r in pairs {
        for k in pairs {
            c += minor(r, k).norm_sqr();
        }
    }
    let det = e(0, 0) * minor([1, 2], [1, 2]) - e(0, 1) * minor([1, 2], [0, 2]) + e(0, 2) * minor([1, 2], [0, 1]);
    // d^2 is the product of the pairwise singular products whose squares sum to c, so
    // d <= (c/3)^(3/4); clamping keeps rounding in det from leaking into low-rank inputs
    let (a, d) = (m.norm_squared(), det.norm().min((c / 3.0).powf(0.75)));
    let mut t = (3.0 * a).sqrt();
    for _ in 0..60 {
        let next = (a + 2.0 * (c + 2.0 * d * t).sqrt()).sqrt();
        if (t - next).abs() <= 1e-16 * next {
            return next;
        }
        t = next;
    }
    t
}

type Mix = [[C64; 2]; 2];

/// `(M, M^{-T})` for the parameters `(theta, phi, re z, im z)`.
fn mixers(p: [f64; 4]) -> (Mix, Mix) {
    let (s, co) = p[0].sin_cos();
    let e = C64::from_polar(1.0, p[1]);
    let z = c(p[2], p[3]);
    let r = [[real(co), -e * s], [e.conj() * s, real(co)]];
    let m = [[r[0][0], r[0][0] * z + r[0][1]], [r[1][0], r[1][0] * z + r[1][1]]];
    let rc = [[r[0][0].conj(), r[0][1].conj()], [r[1][0].conj(), r[1][1].conj()]];
    let n = [[rc[0][0] - rc[0][1] * z, rc[0][1]], [rc[1][0] - rc[1][1] * z, rc[1][1]]];
    (m, n)
}

fn mix(a: &CMatrix, b: &CMatrix, m: &Mix) -> (CMatrix, CMatrix) {
    (a * m[0][0] + b * m[1][0], a * m[0][1] + b * m[1][1])
}

struct Frame {
    x: Vec<CMatrix>,
    y: Vec<CMatrix>,
    nx: Vec<f64>,
    ny: Vec<f64>,
}

impl Frame {
    fn new(x: Vec<CMatrix>, y: Vec<CMatrix>) -> Self {
        let nx = x.iter().map(fast_trace_norm).collect();
        let ny = y.iter().map(fast_trace_norm).collect();
        let mut f = Frame { x, y, nx, ny };
        for j in 0..f.x.len() {
            f.balance(j);
        }
        f
    }

    fn cost(&self) -> f64 {
        self.nx.iter().zip(&self.ny).map(|(a, b)| a * b).sum()
    }

    /// Rescales `x_j` and `y_j` to equal trace norms.
    fn balance(&mut self, j: usize) {
        let (a, b) = (self.nx[j], self.ny[j]);
        if a > 0.0 && b > 0.0 {
            let t = (b / a).sqrt();
            self.x[j] *= real(t);
            self.y[j] *= real(1.0 / t);
            self.nx[j] = a * t;
            self.ny[j] = b / t;
        }
    }

    fn pair_value(&self, j: usize, k: usize, p: [f64; 4]) -> (f64, [CMatrix; 4], [f64; 4]) {
        let (m, n) = mixers(p);
        let (xj, xk) = mix(&self.x[j], &self.x[k], &m);
        let (yj, yk) = mix(&self.y[j], &self.y[k], &n);
        let norms = [fast_trace_norm(&xj), fast_trace_norm(&yj), fast_trace_norm(&xk), fast_trace_norm(&yk)];
        (norms[0] * norms[1] + norms[2] * norms[3], [xj, yj, xk, yk], norms)
    }

    fn replace_pair(&mut self, j: usize, k: usize, [xj, yj, xk, yk]: [CMatrix; 4], norms: [f64; 4]) {
        self.x[j] = xj;
        self.y[j] = yj;
        self.x[k] = xk;
        self.y[k] = yk;
        self.nx[j] = norms[0];
        self.ny[j] = norms[1];
        self.nx[k] = norms[2];
        self.ny[k] = norms[3];
        self.balance(j);
        self.balance(k);
    }

    /// Replaces `(x_j, x_k)` by the two rank-one matrices in their span, when the span has
    /// two-dimensional row and column spaces and contains them. These are the roots of
    /// `det(alpha A + beta B) = 0` on the compressed pencil.
    fn split_rank_one(&mut self, j: usize, k: usize) {
        let Some(m) = rank_one_mixer(&self.x[j], &self.x[k]) else { return };
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det.norm() < 1e-12 {
            return;
        }
        let n = [[m[1][1] / det, -m[1][0] / det], [-m[0][1] / det, m[0][0] / det]];
        let (xj, xk) = mix(&self.x[j], &self.x[k], &m);
        let (yj, yk) = mix(&self.y[j], &self.y[k], &n);
        let norms = [fast_trace_norm(&xj), fast_trace_norm(&yj), fast_trace_norm(&xk), fast_trace_norm(&yk)];
        let value = norms[0] * norms[1] + norms[2] * norms[3];
        let current = self.nx[j] * self.ny[j] + self.nx[k] * self.ny[k];
        if value < current - GAIN * current.max(1.0) {
            self.replace_pair(j, k, [xj, yj, xk, yk], norms);
        }
    }

    /// Grid search over the unitary mixings of `(j, k)`, zooming on the best cell. Coordinate
    /// moves stall on the kinks that appear when the two Schmidt values coincide.
    fn align_pair(&mut self, j: usize, k: usize) {
        let current = self.nx[j] * self.ny[j] + self.nx[k] * self.ny[k];
        let (mut best, mut at) = (f64::INFINITY, [0.0; 2]);
        for a in 0..ALIGN_GRID {
            for b in 0..2 * ALIGN_GRID {
                let p = [a as f64 * FRAC_PI_2 / ALIGN_GRID as f64, b as f64 * PI / ALIGN_GRID as f64];
                let v = self.pair_value(j, k, [p[0], p[1], 0.0, 0.0]).0;
                if v < best {
                    (best, at) = (v, p);
                }
            }
        }
        let mut width = PI / ALIGN_GRID as f64;
        while width > 1e-11 {
            let centre = at;
            for a in -2..=2 {
                for b in -2..=2 {
                    let p = [centre[0] + a as f64 * width / 2.0, centre[1] + b as f64 * width / 2.0];
                    let v = self.pair_value(j, k, [p[0], p[1], 0.0, 0.0]).0;
                    if v < best {
                        (best, at) = (v, p);
                    }
                }
            }
            width *= 0.5;
        }
        if best < current - GAIN * current.max(1.0) {
            let (_, terms, norms) = self.pair_value(j, k, [at[0], at[1], 0.0, 0.0]);
            self.replace_pair(j, k, terms, norms);
        }
    }

    /// Descends on the pair `(j, k)`; returns the number of accepted moves.
    fn optimize_pair(&mut self, j: usize, k: usize, step: f64) -> usize {
        let mut current = self.nx[j] * self.ny[j] + self.nx[k] * self.ny[k];
        let mut h = step;
        let floor = step * 0.5f64.powi(HALVINGS);
        let (mut accepted, mut evals) = (0, 0);
        while h >= floor && evals < PAIR_EVALS {
            let mut moved = false;
            'dirs: for d in 0..4 {
                for sign in [1.0, -1.0] {
                    let mut p = [0.0; 4];
                    p[d] = sign * h;
                    evals += 1;
                    let (value, terms, norms) = self.pair_value(j, k, p);
                    if value < current - GAIN * current.max(1.0) {
                        self.replace_pair(j, k, terms, norms);
                        current = value;
                        accepted += 1;
                        moved = true;
                        break 'dirs;
                    }
                }
            }
            h = if moved { (2.0 * h).min(step) } else { 0.5 * h };
        }
        accepted
    }
}

/// Columns `u_1, u_2` with `u_i[0] A + u_i[1] B` rank one, or `None` when the pencil does not
/// compress to 2x2 or has a repeated root.
fn rank_one_mixer(a: &CMatrix, b: &CMatrix) -> Option<Mix> {
    let (r, c) = a.shape();
    let mut wide = CMatrix::zeros(r, 2 * c);
    wide.view_mut((0, 0), (r, c)).copy_from(a);
    wide.view_mut((0, c), (r, c)).copy_from(b);
    let mut tall = CMatrix::zeros(2 * r, c);
    tall.view_mut((0, 0), (r, c)).copy_from(a);
    tall.view_mut((r, 0), (r, c)).copy_from(b);
    let (cols, rows) = (svd(&wide).ok()?, svd(&tall).ok()?);
    let flat = |v: &[f64]| v.len() >= 2 && v[1] > 1e-9 * v[0] && v.get(2).is_none_or(|&s| s <= 1e-12 * v[0]);
    if !flat(&cols.values) || !flat(&rows.values) {
        return None;
    }
    let u = cols.u.columns(0, 2).into_owned();
    let v = rows.v.columns(0, 2).into_owned();
    let (a2, b2) = (u.adjoint() * a * &v, u.adjoint() * b * &v);
    let det = |m: &CMatrix| m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let (da, db) = (det(&a2), det(&b2));
    let cross = a2[(0, 0)] * b2[(1, 1)] + a2[(1, 1)] * b2[(0, 0)] - a2[(0, 1)] * b2[(1, 0)] - a2[(1, 0)] * b2[(0, 1)];
    // alpha^2 da + alpha beta cross + beta^2 db = 0, solved in the better conditioned variable
    let roots = |p: C64, q: C64, s: C64| -> Option<[C64; 2]> {
        if p.norm() == 0.0 {
            return None;
        }
        let disc = (q * q - p * s * real(4.0)).sqrt();
        let big = if (q + disc).norm() >= (q - disc).norm() { -(q + disc) } else { -(q - disc) };
        if big.norm() == 0.0 {
            return None;
        }
        Some([big / (p * real(2.0)), s * real(2.0) / big])
    };
    if db.norm() >= da.norm() {
        let [t1, t2] = roots(db, cross, da)?;
        Some([[real(1.0), real(1.0)], [t1, t2]])
    } else {
        let [t1, t2] = roots(da, cross, db)?;
        Some([[t1, t2], [real(1.0), real(1.0)]])
    }
}

/// `x' = x A`, `y' = y A^{-T}` for `A = 1 + 0.1 G`.
fn perturb(x: &[CMatrix], y: &[CMatrix], seed: u64) -> Option<(Vec<CMatrix>, Vec<CMatrix>)> {
    let r = x.len();
    let mut rng = rng_from_seed(seed);
    let a = CMatrix::identity(r, r) + gaussian_matrix(r, r, &mut rng) * real(0.1);
    let b = a.clone().try_inverse()?.transpose();
    let combine = |src: &[CMatrix], coef: &CMatrix| -> Vec<CMatrix> {
        (0..r)
            .map(|j| {
                (0..r).fold(CMatrix::zeros(src[0].nrows(), src[0].ncols()), |acc, k| acc + &src[k] * coef[(k, j)])
            })
            .collect()
    };
    Some((combine(x, &a), combine(y, &b)))
}

/// Pairs ordered by closeness of their Schmidt values, so degenerate pairs come first.
fn pair_order(values: &[f64]) -> Vec<(usize, usize)> {
    let r = values.len();
    let mut pairs: Vec<(usize, usize)> = (0..r).flat_map(|j| (j + 1..r).map(move |k| (j, k))).collect();
    pairs.sort_by(|&(a, b), &(c, d)| {
        let (u, v) = ((values[a] - values[b]).abs(), (values[c] - values[d]).abs());
        u.total_cmp(&v).then((a, b).cmp(&(c, d)))
    });
    pairs
}

/// Best decomposition found over all restarts; `None` when there is nothing to mix.
pub(crate) fn local_search(os: &OperatorSchmidt, lower: f64, cfg: &OptimizerConfig) -> Option<SearchOutcome> {
    let r = os.values.len();
    if r < 2 {
        return None;
    }
    let x0: Vec<CMatrix> = (0..r).map(|k| &os.left[k] * real(os.values[k].sqrt())).collect();
    let y0: Vec<CMatrix> = (0..r).map(|k| &os.right[k] * real(os.values[k].sqrt())).collect();
    let pairs = pair_order(&os.values);
    let degenerate: Vec<(usize, usize)> = pairs
        .iter()
        .copied()
        .filter(|&(j, k)| (os.values[j] - os.values[k]).abs() <= DEGENERATE * os.values[j].max(os.values[k]))
        .collect();
    let target = lower + cfg.tol;
    let mut best: Option<SearchOutcome> = None;
    let (mut total_iters, mut restarts_run) = (0, 0);
    for t in 0..cfg.restarts.max(1) {
        let (x, y) = if t == 0 {
            (x0.clone(), y0.clone())
        } else {
            match perturb(&x0, &y0, derive_seed(cfg.seed, t as u64)) {
                Some(p) => p,
                None => continue,
            }
        };
        let mut frame = Frame::new(x, y);
        if t == 0 {
            for &(j, k) in degenerate.iter() {
                frame.split_rank_one(j, k);
                frame.align_pair(j, k);
            }
        }
        let mut iters = 0;
        'sweeps: loop {
            let mut improved = false;
            for &(j, k) in &pairs {
                if iters >= cfg.max_iter || frame.cost() <= target {
                    break 'sweeps;
                }
                iters += 1;
                if frame.optimize_pair(j, k, cfg.step) > 0 {
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
        total_iters += iters;
        restarts_run = t + 1;
        let cost = frame.cost();
        if best.as_ref().is_none_or(|b| cost < b.cost) {
            best = Some(SearchOutcome { x: frame.x, y: frame.y, cost, restarts: 0, iterations: 0 });
        }
        if cost <= target {
            break;
        }
    }
    best.map(|b| SearchOutcome { restarts: restarts_run, iterations: total_iters, ..b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, trace_norm};
    use crate::sampling::{gaussian_matrix, rng_from_seed};

    #[test]
    fn mixers_are_inverse_transposes() {
        for p in [[0.3, -1.2, 0.5, 0.25], [0.0, 0.0, 0.0, 0.0], [2.0, 0.7, -3.0, 1.0]] {
            let (m, n) = mixers(p);
            for a in 0..2 {
                for b in 0..2 {
                    let e = m[a][0] * n[b][0] + m[a][1] * n[b][1];
                    let expect = if a == b { 1.0 } else { 0.0 };
                    assert!((e - real(expect)).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn fast_trace_norm_matches_svd() {
        let mut rng = rng_from_seed(5);
        for d in 1..5 {
            for _ in 0..20 {
                let m = gaussian_matrix(d, d, &mut rng);
                { let (f, t) = (fast_trace_norm(&m), trace_norm(&m).unwrap()); assert!((f - t).abs() < 1e-12 * t.max(1.0), "{d} {f} {t}"); }
            }
            for rank in 1..d {
                let low = gaussian_matrix(d, rank, &mut rng) * gaussian_matrix(rank, d, &mut rng);
                { let (f, t) = (fast_trace_norm(&low), trace_norm(&low).unwrap()); assert!((f - t).abs() < 1e-10 * t.max(1.0), "{d} {rank} {f} {t}"); }
            }
        }
        let zero = CMatrix::zeros(3, 3);
        assert_eq!(fast_trace_norm(&zero), 0.0);
    }

    #[test]
    fn pair_moves_preserve_the_sum() {
        let mut rng = rng_from_seed(6);
        let x: Vec<CMatrix> = (0..3).map(|_| gaussian_matrix(2, 2, &mut rng)).collect();
        let y: Vec<CMatrix> = (0..3).map(|_| gaussian_matrix(3, 3, &mut rng)).collect();
        let sum = |x: &[CMatrix], y: &[CMatrix]| {
            x.iter().zip(y).fold(CMatrix::zeros(6, 6), |acc, (a, b)| acc + kron(a, b))
        };
        let before = sum(&x, &y);
        let mut f = Frame::new(x, y);
        let c0 = f.cost();
        f.optimize_pair(0, 1, 0.1);
        f.optimize_pair(1, 2, 0.1);
        assert!(f.cost() <= c0);
        assert!((sum(&f.x, &f.y) - &before).norm() < 1e-10);
        let (px, py) = perturb(&f.x, &f.y, 9).unwrap();
        assert!((sum(&px, &py) - &before).norm() < 1e-10);
    }

    #[test]
    fn pairs_are_ordered_by_value_gap() {
        let order = pair_order(&[0.5, 0.3, 0.3, 0.1]);
        assert_eq!(order[0], (1, 2));
    }
}
