//! Seeded random ensembles. Every generator takes an explicit RNG; nothing reads ambient entropy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{trace, C64, CMatrix, CVector};

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent sub-seed from a master seed and a counter.
pub fn derive_seed(master: u64, counter: u64) -> u64 {
    // splitmix64 finalizer over the combined word
    let mut z = master
        .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(counter.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let entries: Vec<C64> = (0..rows * cols).map(|_| gaussian_c64(rng)).collect();
    CMatrix::from_row_slice(rows, cols, &entries)
}

pub fn gaussian_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    CVector::from_iterator(n, (0..n).map(|_| gaussian_c64(rng)))
}

pub fn random_unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    let v = gaussian_vector(n, rng);
    let norm = v.norm();
    v.unscale(norm)
}

/// Haar-distributed unitary via QR of a Ginibre matrix with the phase correction.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let qr = gaussian_matrix(n, n, rng).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for row in 0..n {
            q[(row, k)] *= phase;
        }
    }
    q
}

/// `G G^dag / Tr(G G^dag)` for a square Ginibre `G`.
pub fn random_density<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = gaussian_matrix(n, n, rng);
    let m = &g * g.adjoint();
    let t = trace(&m).re;
    m.unscale(t)
}

/// Positive weights summing to one (flat Dirichlet).
pub fn random_weights<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..n)
        .map(|_| {
            let u: f64 = rng.random::<f64>();
            -(1.0 - u).ln() + 1e-3
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}
