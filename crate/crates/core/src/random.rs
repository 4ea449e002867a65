//! Seeded generators for test and benchmark instances.
//!
//! Everything draws from one `ChaCha8Rng`, so a seed fixes the whole
//! instance bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{operator_norm, CMatrix, Subspace, C64};

pub type InstanceRng = ChaCha8Rng;

pub fn rng(seed: u64) -> InstanceRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries `(x + iy)/√2` with `x, y` standard normal.
pub fn gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * s, im * s)
    })
}

/// Gaussian matrix divided by `max(1, σ_max)`.
pub fn contraction<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let g = gaussian(rng, rows, cols);
    let norm = operator_norm(&g);
    g.unscale(norm.max(1.0))
}

/// Gaussian matrix rescaled to operator norm exactly `norm`.
pub fn with_norm<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, norm: f64) -> CMatrix {
    let g = gaussian(rng, rows, cols);
    let s = operator_norm(&g);
    if s == 0.0 {
        g
    } else {
        g.scale(norm / s)
    }
}

/// Haar-distributed isometry `C^cols -> C^rows`, `rows >= cols`.
pub fn isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    if cols == 0 {
        return CMatrix::zeros(rows, 0);
    }
    let qr = gaussian(rng, rows, cols).qr();
    let (q, r) = (qr.q(), qr.r());
    // fix the column phases so the distribution is Haar
    let mut out = q.columns(0, cols).into_owned();
    for j in 0..cols {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            for i in 0..rows {
                out[(i, j)] *= phase;
            }
        }
    }
    out
}

pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    isometry(rng, n, n)
}

/// Uniformly oriented `dim`-dimensional subspace of `C^ambient`.
pub fn subspace<R: Rng + ?Sized>(rng: &mut R, ambient: usize, dim: usize) -> Subspace {
    Subspace::from_orthonormal(isometry(rng, ambient, dim))
}
