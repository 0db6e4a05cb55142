//! Seeded random instances for property checks and the verification suite.

use rand::Rng;

use crate::linalg::{bivector_matrix, expm, Mat, MinkowskiFrame, Vector};
use crate::lie::DerivationData;
use crate::planewave::{PlaneWaveSpec, SpacetimePoint, WaveKind};

pub fn uniform_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, bound: f64) -> Mat {
    Mat::from_fn(rows, cols, |_, _| rng.gen_range(-bound..=bound))
}

pub fn symmetric<R: Rng>(rng: &mut R, n: usize, bound: f64) -> Mat {
    let mut m = Mat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.gen_range(-bound..=bound);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

pub fn skew<R: Rng>(rng: &mut R, n: usize, bound: f64) -> Mat {
    let mut m = Mat::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.gen_range(-bound..=bound);
            m[(i, j)] = v;
            m[(j, i)] = -v;
        }
    }
    m
}

/// Random orthogonal matrix `exp(K)` with `K` skew.
pub fn orthogonal<R: Rng>(rng: &mut R, n: usize) -> Mat {
    expm(&skew(rng, n, std::f64::consts::PI)).expect("bounded skew exponential")
}

/// Spec with entries of `F` and `B` uniform in `[-bound, bound]`.
pub fn spec<R: Rng>(rng: &mut R, kind: WaveKind, n: usize, bound: f64) -> PlaneWaveSpec {
    PlaneWaveSpec::new(kind, skew(rng, n, bound), symmetric(rng, n, bound)).expect("valid by construction")
}

/// Point with `|v|, |x^i| <= 1` and `u` in `[-1, 1]` (kind a) or `[0.5, 2]` (kind b).
pub fn point<R: Rng>(rng: &mut R, kind: WaveKind, n: usize) -> SpacetimePoint {
    let x = Vector::from_fn(n, |_, _| rng.gen_range(-1.0..=1.0));
    let u = match kind {
        WaveKind::A => rng.gen_range(-1.0..=1.0),
        WaveKind::B => rng.gen_range(0.5..=2.0),
    };
    SpacetimePoint::new(rng.gen_range(-1.0..=1.0), x, u)
}

/// Random element of so(V), `dim V = n + 2`, as a combination of Witt bivectors.
pub fn so_element<R: Rng>(rng: &mut R, n: usize, bound: f64) -> Mat {
    let f = MinkowskiFrame::new(n);
    let mut m = Mat::zeros(n + 2, n + 2);
    for a in 0..n + 2 {
        for b in a + 1..n + 2 {
            let w = rng.gen_range(-bound..=bound);
            m += bivector_matrix(&f.basis(a), &f.basis(b), &f).expect("dims") * w;
        }
    }
    m
}

/// Random Lorentz transformation `exp(X)`, `X ∈ so(V)` with coefficients in `[-bound, bound]`.
pub fn lorentz<R: Rng>(rng: &mut R, n: usize, bound: f64) -> Mat {
    expm(&so_element(rng, n, bound)).expect("bounded exponential")
}

/// Derivation data satisfying `L^T ω + ω L = λ ω`: for even `n` with a
/// nondegenerate `ω`, `L = λ/2 + ω^{-1} S` with `S` symmetric; otherwise `ω = 0`.
pub fn derivation<R: Rng>(rng: &mut R, n: usize, lambda: f64, with_omega: bool) -> DerivationData {
    if with_omega && n % 2 == 0 && n > 0 {
        loop {
            let omega = skew(rng, n, 1.0);
            let Some(inv) = omega.clone().try_inverse() else { continue };
            if inv.norm() > 20.0 {
                continue;
            }
            let s = symmetric(rng, n, 1.0);
            let l = Mat::identity(n, n) * (lambda / 2.0) + inv * s;
            if l.norm() > 20.0 {
                continue;
            }
            return DerivationData::new(lambda, omega, l, None).expect("valid by construction");
        }
    }
    DerivationData::new(lambda, Mat::zeros(n, n), uniform_matrix(rng, n, n, 1.0), None)
        .expect("valid by construction")
}
