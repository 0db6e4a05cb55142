//! Library routines against independently written reference computations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pwlab_core::lie::{build_isom, centralizer_k};
use pwlab_core::linalg::{expm, jordan_chevalley, sym_eig, Mat, MinkowskiFrame};
use pwlab_core::lorentz::{classify, ElementKind, DEFAULT_TOL};
use pwlab_core::oracle::{classify_brute_force, gaussian_rank};
use pwlab_core::planewave::{
    christoffel_closed, christoffel_fd, curvature_closed, metric_at, weyl_closed, weyl_tensor,
    WaveKind,
};
use pwlab_core::sampling;
use pwlab_core::verify::representative;

/// Plain Taylor series with 200 terms after scaling by 2^-8.
fn taylor_expm(m: &Mat) -> Mat {
    let d = m.nrows();
    let a = m / 256.0;
    let mut term = Mat::identity(d, d);
    let mut sum = term.clone();
    for k in 1..200 {
        term = &term * &a / k as f64;
        sum += &term;
    }
    for _ in 0..8 {
        sum = &sum * &sum;
    }
    sum
}

#[test]
fn expm_matches_taylor_series() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let m = sampling::uniform_matrix(&mut rng, 4, 4, 1.0);
        let diff = (expm(&m).unwrap() - taylor_expm(&m)).amax();
        assert!(diff < 1e-12, "{diff:e}");
    }
}

#[test]
fn sym_eig_matches_library_eigenvalues() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..50 {
        let s = sampling::symmetric(&mut rng, 5, 3.0);
        let ours = sym_eig(&s, 1e-12).unwrap();
        let mut reference: Vec<f64> = nalgebra::SymmetricEigen::new(s.clone()).eigenvalues.iter().cloned().collect();
        reference.sort_by(f64::total_cmp);
        for (a, b) in ours.values.iter().zip(&reference) {
            assert!((a - b).abs() < 1e-12 * s.norm());
        }
        assert!((ours.reconstruct() - &s).amax() < 1e-12 * s.norm());
    }
}

#[test]
fn jordan_chevalley_of_a_jordan_block() {
    let mut m = Mat::identity(2, 2) * 2.0;
    m[(0, 1)] = 1.0;
    let jc = jordan_chevalley(&m, 1e-9).unwrap();
    assert!((jc.semisimple - Mat::identity(2, 2) * 2.0).amax() < 1e-12);
    let n = &jc.nilpotent;
    assert!((n * n).amax() < 1e-12);
    assert!((n[(0, 1)] - 1.0).abs() < 1e-12);
}

#[test]
fn classify_agrees_with_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let kinds = [ElementKind::Elliptic, ElementKind::Hyperbolic, ElementKind::Parabolic];
    let mut seen = [0usize; 3];
    for i in 0..300 {
        let n = 2 + i % 2;
        let c = if i % 2 == 0 {
            sampling::so_element(&mut rng, n, 1.0)
        } else {
            let (rep, _) = representative(&mut rng, kinds[(i / 2) % 3], n);
            let g = sampling::lorentz(&mut rng, n, 0.3);
            let gram = MinkowskiFrame::new(n).gram();
            &g * rep * &gram * g.transpose() * &gram
        };
        let ours = classify(&c, DEFAULT_TOL).unwrap();
        let reference = classify_brute_force(&c);
        assert_eq!(ours.kind, reference, "instance {i}");
        seen[kinds.iter().position(|k| *k == ours.kind).unwrap()] += 1;
    }
    assert!(seen.iter().all(|&c| c > 20), "{seen:?}");
}

#[test]
fn hyperbolic_parameter_survives_conjugation() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let f = MinkowskiFrame::new(2);
    let c = pwlab_core::linalg::bivector_matrix(&f.p(), &f.q(), &f).unwrap() * 2.0;
    for _ in 0..20 {
        let g = sampling::lorentz(&mut rng, 2, 0.5);
        let conj = &g * &c * f.gram() * g.transpose() * f.gram();
        let form = classify(&conj, DEFAULT_TOL).unwrap();
        assert_eq!(form.kind, ElementKind::Hyperbolic);
        assert!((form.a - 2.0).abs() < 1e-8);
    }
}

#[test]
fn weyl_profile_matches_general_weyl_tensor() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for i in 0..20 {
        let kind = if i % 2 == 0 { WaveKind::A } else { WaveKind::B };
        let n = 2 + i % 3;
        let spec = sampling::spec(&mut rng, kind, n, 2.0);
        let pt = sampling::point(&mut rng, kind, n);
        let g = metric_at(&spec, &pt).unwrap();
        let general = weyl_tensor(&curvature_closed(&spec, pt.u).unwrap().tensor(), &g).unwrap();
        let closed = weyl_closed(&spec, pt.u).unwrap().tensor();
        assert!(general.max_abs_diff(&closed) < 1e-10, "{}", general.max_abs_diff(&closed));
    }
}

#[test]
fn christoffel_symbols_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for i in 0..20 {
        let kind = if i % 2 == 0 { WaveKind::A } else { WaveKind::B };
        let spec = sampling::spec(&mut rng, kind, 1 + i % 4, 2.0);
        let pt = sampling::point(&mut rng, kind, spec.n());
        let closed = christoffel_closed(&spec, &pt).unwrap();
        let fd = christoffel_fd(&spec, &pt, 1e-5).unwrap();
        assert!(closed.max_abs_diff(&fd) < 1e-6);
    }
}

/// Skew matrices commuting with `B` and `F`, by Gaussian elimination on the
/// commutation equations over the basis `E_ij - E_ji`.
fn centralizer_dimension(b: &Mat, f: &Mat) -> usize {
    let n = b.nrows();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut sys = Mat::zeros(2 * n * n, pairs.len().max(1));
    for (c, &(i, j)) in pairs.iter().enumerate() {
        let mut k = Mat::zeros(n, n);
        k[(i, j)] = 1.0;
        k[(j, i)] = -1.0;
        for (block, m) in [b, f].into_iter().enumerate() {
            let comm = &k * m - m * &k;
            for (r, v) in comm.iter().enumerate() {
                sys[(block * n * n + r, c)] = *v;
            }
        }
    }
    pairs.len() - gaussian_rank(&sys, 1e-9)
}

#[test]
fn centralizer_matches_elimination() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for i in 0..40 {
        let n = 1 + i % 4;
        let (b, f) = match i % 4 {
            0 => (Mat::identity(n, n) * rng.gen_range(-2.0..2.0), Mat::zeros(n, n)),
            1 => {
                let mut b = Mat::identity(n, n);
                b[(0, 0)] = 3.0;
                (b, Mat::zeros(n, n))
            }
            2 => (sampling::symmetric(&mut rng, n, 2.0), Mat::zeros(n, n)),
            _ => (Mat::identity(n, n), sampling::skew(&mut rng, n, 2.0)),
        };
        let ours = centralizer_k(&b, &f).unwrap();
        assert_eq!(ours.len(), centralizer_dimension(&b, &f), "instance {i}");
        let isom = build_isom(&pwlab_core::planewave::PlaneWaveSpec::new(WaveKind::A, f, b).unwrap()).unwrap();
        assert_eq!(isom.dim(), 2 * n + 2 + ours.len());
    }
}
