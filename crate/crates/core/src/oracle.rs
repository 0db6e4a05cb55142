//! Brute-force reference classification of so(V) elements, independent of the
//! canonical-form construction: a determinant sign scan for real eigenvalues and
//! a Gaussian-elimination rank test for a nilpotent part.

use crate::linalg::Mat;
use crate::lorentz::ElementKind;

fn determinant(m: &Mat) -> f64 {
    let n = m.nrows();
    let mut a = m.clone();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[(i, col)].abs().total_cmp(&a[(j, col)].abs()))
            .expect("nonempty");
        if a[(pivot, col)] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            a.swap_rows(pivot, col);
            det = -det;
        }
        det *= a[(col, col)];
        for r in col + 1..n {
            let f = a[(r, col)] / a[(col, col)];
            for c in col..n {
                a[(r, c)] -= f * a[(col, c)];
            }
        }
    }
    det
}

/// Rank by Gaussian elimination with partial pivoting, pivots below `tol` dropped.
pub fn gaussian_rank(m: &Mat, tol: f64) -> usize {
    let (rows, cols) = m.shape();
    let mut a = m.clone();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let pivot = (rank..rows)
            .max_by(|&i, &j| a[(i, col)].abs().total_cmp(&a[(j, col)].abs()))
            .expect("nonempty");
        if a[(pivot, col)].abs() <= tol {
            continue;
        }
        a.swap_rows(pivot, rank);
        for r in rank + 1..rows {
            let f = a[(r, col)] / a[(rank, col)];
            for c in col..cols {
                a[(r, c)] -= f * a[(rank, c)];
            }
        }
        rank += 1;
    }
    rank
}

/// Classify `C ∈ so(V)`: hyperbolic if `det(C - t)` changes sign for some
/// `t > 0`, else parabolic if `rank(C^2) < rank(C)`, else elliptic.
pub fn classify_brute_force(c: &Mat) -> ElementKind {
    let n = c.nrows();
    let scale = c.norm();
    if scale == 0.0 {
        return ElementKind::Elliptic;
    }
    let id = Mat::identity(n, n);
    let steps = 20_000;
    let lo = 1e-4 * scale;
    let hi = 1.01 * scale;
    let mut prev = determinant(&(c - &id * lo));
    for k in 1..=steps {
        let t = lo * (hi / lo).powf(k as f64 / steps as f64);
        let d = determinant(&(c - &id * t));
        if d == 0.0 || d.signum() != prev.signum() {
            return ElementKind::Hyperbolic;
        }
        prev = d;
    }
    let tol = 1e-7 * scale;
    let r1 = gaussian_rank(c, tol);
    let r2 = gaussian_rank(&(c * c), tol * scale);
    if r2 < r1 {
        ElementKind::Parabolic
    } else {
        ElementKind::Elliptic
    }
}
