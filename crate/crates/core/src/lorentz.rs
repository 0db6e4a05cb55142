//! Conjugacy classes of so(1, n+1) and the co(V) splitting.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    bivector_matrix, check_finite, check_square, complex_eigenvalues, gram_schmidt,
    lstsq_scaled, null_space, null_space_scaled, sym_eig, Mat, MinkowskiFrame, Vector,
};

pub const DEFAULT_TOL: f64 = 1e-9;

/// Conjugacy type of an element of so(V).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Elliptic,
    Hyperbolic,
    Parabolic,
}

impl ElementKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ElementKind::Elliptic => "elliptic",
            ElementKind::Hyperbolic => "hyperbolic",
            ElementKind::Parabolic => "parabolic",
        }
    }
}

/// Canonical form of `C ∈ so(V)`.
///
/// * hyperbolic: `C = a p∧q + C0` with `C0 ∈ so(E)`; frame columns `(p, e_1..e_n, q)`.
/// * parabolic: `C = p∧e_1 + C0` with `C0 ∈ so(span(e_2..e_n))`; `a` is normalized to 1.
/// * elliptic: `C = C0` with `C0 ∈ so(n+1)` acting on `e_-^⊥`; `frame` is the
///   orthonormal frame `(e_-, e_1..e_{n+1})`, `witt_frame` the Witt frame with
///   `p = (e_{n+1} - e_-)/√2`, `q = (e_{n+1} + e_-)/√2`.
#[derive(Debug, Clone)]
pub struct CanonicalForm {
    pub kind: ElementKind,
    pub a: f64,
    pub c0: Mat,
    pub frame: Mat,
    pub witt_frame: Mat,
    pub semisimple: Mat,
    pub nilpotent: Mat,
    /// `||frame * canonical * frame^{-1} - C|| / max(1, ||C||)`.
    pub residual: f64,
}

impl CanonicalForm {
    /// The canonical matrix in the coordinates of `frame`.
    pub fn canonical_matrix(&self) -> Mat {
        let d = self.frame.nrows();
        let n = d - 2;
        let f = MinkowskiFrame::new(n);
        match self.kind {
            ElementKind::Hyperbolic => {
                let mut m = bivector_matrix(&f.p(), &f.q(), &f).expect("dims") * self.a;
                m.view_mut((1, 1), (n, n)).copy_from(&self.c0);
                m
            }
            ElementKind::Parabolic => {
                let mut m = bivector_matrix(&f.p(), &f.e(0), &f).expect("dims") * self.a;
                m.view_mut((2, 2), (n - 1, n - 1)).copy_from(&self.c0);
                m
            }
            ElementKind::Elliptic => {
                let mut m = Mat::zeros(d, d);
                m.view_mut((1, 1), (d - 1, d - 1)).copy_from(&self.c0);
                m
            }
        }
    }

    /// Inverse of `frame`, using its metric properties.
    pub fn frame_inverse(&self) -> Mat {
        let d = self.frame.nrows();
        let g = MinkowskiFrame::new(d - 2).gram();
        match self.kind {
            ElementKind::Elliptic => {
                let mut eta = Mat::identity(d, d);
                eta[(0, 0)] = -1.0;
                eta * self.frame.transpose() * g
            }
            _ => &g * self.frame.transpose() * &g,
        }
    }
}

/// Split an element of co(V) = so(V) ⊕ R into its scalar and so(V) parts.
pub fn split_co(c: &Mat, tol: f64) -> Result<(f64, Mat)> {
    let frame = MinkowskiFrame::for_matrix(c)?;
    check_finite(c, "co(V) element")?;
    let scalar = c.trace() / frame.dim() as f64;
    let so = c - Mat::identity(frame.dim(), frame.dim()) * scalar;
    let residual = frame.so_residual(&so);
    if residual > tol * c.norm().max(1.0) {
        return Err(Error::Constraint { name: "co(V) membership", residual });
    }
    Ok((scalar, so))
}

/// Classify `C ∈ so(V)` up to conjugation by the Lorentz group.
///
/// The type is read off the signature of the fixed subspace `ker C`: it contains
/// a timelike vector exactly for elliptic elements and is degenerate exactly for
/// parabolic ones. The resulting semisimple/nilpotent split is then checked
/// against the spectral description.
pub fn classify(c: &Mat, tol: f64) -> Result<CanonicalForm> {
    if !(tol > 0.0 && tol < 1e-2) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} not in (0, 1e-2)")));
    }
    check_square(c, "so(V) element")?;
    let frame = MinkowskiFrame::for_matrix(c)?;
    check_finite(c, "so(V) element")?;
    let scale = c.norm();
    let residual = frame.so_residual(c);
    if residual > 1e-9 * scale.max(1.0) {
        return Err(Error::NotInSo { residual });
    }

    let kernel = null_space(c, tol);
    let gram = frame.gram();
    let h = kernel.transpose() * &gram * &kernel;
    let zero_band = tol.sqrt();
    let (kind, witness) = if kernel.ncols() == 0 {
        (ElementKind::Hyperbolic, None)
    } else {
        let eig = sym_eig(&h, 1e-8)?;
        let lo = eig.values[0];
        let closest = eig
            .values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, v)| (i, *v))
            .expect("nonempty");
        let ambiguous = |v: f64| v.abs() > zero_band && v.abs() <= 100.0 * zero_band;
        if ambiguous(lo) || ambiguous(closest.1) {
            return Err(Error::Ambiguous {
                detail: format!("fixed subspace is nearly degenerate (eigenvalue {lo:.3e})"),
                tol,
            });
        }
        if lo < -zero_band {
            (ElementKind::Elliptic, Some(&kernel * eig.vectors.column(0)))
        } else if closest.1.abs() <= zero_band {
            (ElementKind::Parabolic, Some(&kernel * eig.vectors.column(closest.0)))
        } else {
            (ElementKind::Hyperbolic, None)
        }
    };

    let form = match kind {
        ElementKind::Hyperbolic => hyperbolic_form(c, &frame, tol)?,
        ElementKind::Parabolic => parabolic_form(c, &frame, witness.expect("kernel vector"), tol)?,
        ElementKind::Elliptic => elliptic_form(c, &frame, witness.expect("kernel vector"))?,
    };
    check_spectral_consistency(&form, scale)?;
    Ok(form)
}

fn smallest_singular_vector(a: &Mat) -> Vector {
    let svd = a.clone().svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let (i, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    vt.row(i).transpose()
}

fn frame_from_columns(cols: &[Vector]) -> Mat {
    let d = cols[0].len();
    Mat::from_fn(d, cols.len(), |r, c| cols[c][r])
}

/// Orthonormal basis of the positive-definite complement selected by `project`.
fn complement(
    frame: &MinkowskiFrame,
    count: usize,
    project: impl Fn(&Vector) -> Vector,
) -> Result<Vec<Vector>> {
    let candidates: Vec<Vector> = (0..frame.dim()).map(|i| project(&frame.basis(i))).collect();
    gram_schmidt(&candidates, count, |x, y| frame.inner(x, y))
}

fn compressed(c: &Mat, frame: &MinkowskiFrame, basis: &[Vector]) -> Mat {
    let k = basis.len();
    Mat::from_fn(k, k, |i, j| frame.inner(&basis[i], &(c * &basis[j])))
}

fn hyperbolic_form(c: &Mat, frame: &MinkowskiFrame, tol: f64) -> Result<CanonicalForm> {
    let d = frame.dim();
    let scale = c.norm();
    let eig = complex_eigenvalues(c)?;
    let a = eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    if !(a > tol.sqrt() * scale) {
        return Err(Error::Ambiguous {
            detail: format!("real eigenvalue {a:.3e} too small for a hyperbolic element"),
            tol,
        });
    }
    let id = Mat::identity(d, d);
    let mut p = smallest_singular_vector(&(c + &id * a));
    p /= p.norm();
    let q0 = smallest_singular_vector(&(c - &id * a));
    let pq = frame.inner(&p, &q0);
    if pq.abs() < 1e-12 {
        return Err(Error::Internal("eigenvectors of ±a are orthogonal".into()));
    }
    let q = q0 / pq;
    let e = complement(frame, frame.n(), |z| {
        z - &p * frame.inner(&q, z) - &q * frame.inner(&p, z)
    })?;
    let c0 = compressed(c, frame, &e);
    let mut cols = vec![p];
    cols.extend(e);
    cols.push(q);
    let w = frame_from_columns(&cols);
    Ok(finish(ElementKind::Hyperbolic, a, c0, w.clone(), w, c))
}

fn parabolic_form(
    c: &Mat,
    frame: &MinkowskiFrame,
    null: Vector,
    tol: f64,
) -> Result<CanonicalForm> {
    let n = frame.n();
    if n == 0 {
        return Err(Error::Internal("parabolic element in so(1,1)".into()));
    }
    let p = &null / null.norm();
    let w = frame.lower(&p) / p.norm_squared();
    let q1 = &w - &p * (frame.inner(&w, &w) / 2.0);
    let f = complement(frame, n, |z| {
        z - &p * frame.inner(&q1, z) - &q1 * frame.inner(&p, z)
    })?;
    let cq = c * &q1;
    let x = Vector::from_fn(n, |j, _| frame.inner(&f[j], &cq));
    let c0 = compressed(c, frame, &f);
    let ker = null_space_scaled(&c0, tol, Some(c.norm()));
    let x_ker = &ker * (ker.transpose() * &x);
    let x_im = &x - &x_ker;
    let a_raw = x_ker.norm();
    if !(a_raw > tol.sqrt() * c.norm()) {
        return Err(Error::Ambiguous {
            detail: "degenerate fixed subspace without a nilpotent part".into(),
            tol,
        });
    }
    let shift = lstsq_scaled(&c0, &(-x_im), tol, Some(c.norm()))?;
    let shift_v: Vector = f.iter().zip(shift.iter()).map(|(fj, s)| fj * *s).sum();
    let q2 = &q1 + &shift_v - &p * (0.5 * shift.norm_squared());
    let e1_coords = &x_ker / a_raw;
    let e1: Vector = f.iter().zip(e1_coords.iter()).map(|(fj, s)| fj * *s).sum::<Vector>()
        - &p * shift.dot(&e1_coords);
    let rest = complement(frame, n - 1, |z| {
        z - &p * frame.inner(&q2, z) - &q2 * frame.inner(&p, z) - &e1 * frame.inner(&e1, z)
    })?;
    let c0 = compressed(c, frame, &rest);
    let p_n = &p * a_raw;
    let q_n = &q2 / a_raw;
    let mut cols = vec![p_n, e1];
    cols.extend(rest);
    cols.push(q_n);
    let w = frame_from_columns(&cols);
    Ok(finish(ElementKind::Parabolic, 1.0, c0, w.clone(), w, c))
}

fn elliptic_form(c: &Mat, frame: &MinkowskiFrame, timelike: Vector) -> Result<CanonicalForm> {
    let n = frame.n();
    let norm = frame.inner(&timelike, &timelike);
    if !(norm < 0.0) {
        return Err(Error::Internal("fixed vector is not timelike".into()));
    }
    let t = timelike / (-norm).sqrt();
    let f = complement(frame, n + 1, |z| z + &t * frame.inner(&t, z))?;
    let c0 = compressed(c, frame, &f);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut ortho = vec![t.clone()];
    ortho.extend(f.iter().cloned());
    let mut witt = vec![(&f[n] - &t) * s];
    witt.extend(f[..n].iter().cloned());
    witt.push((&f[n] + &t) * s);
    Ok(finish(
        ElementKind::Elliptic,
        0.0,
        c0,
        frame_from_columns(&ortho),
        frame_from_columns(&witt),
        c,
    ))
}

fn finish(kind: ElementKind, a: f64, c0: Mat, frame: Mat, witt_frame: Mat, c: &Mat) -> CanonicalForm {
    let d = frame.nrows();
    let mut form = CanonicalForm {
        kind,
        a,
        c0,
        frame,
        witt_frame,
        semisimple: Mat::zeros(d, d),
        nilpotent: Mat::zeros(d, d),
        residual: 0.0,
    };
    let canon = form.canonical_matrix();
    let inv = form.frame_inverse();
    let rebuilt = &form.frame * &canon * &inv;
    form.residual = (&rebuilt - c).norm() / c.norm().max(1.0);
    match kind {
        ElementKind::Parabolic => {
            let mut nil = Mat::zeros(d, d);
            nil[(1, d - 1)] = a;
            nil[(0, 1)] = -a;
            form.nilpotent = &form.frame * nil * &inv;
            form.semisimple = c - &form.nilpotent;
        }
        _ => form.semisimple = c.clone(),
    }
    form
}

/// Mutually exclusive spectral conditions on the canonical decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpectralFlags {
    pub imaginary_semisimple: bool,
    pub real_pair: bool,
    pub nilpotent_nonzero: bool,
}

impl SpectralFlags {
    pub fn of(form: &CanonicalForm) -> Result<Self> {
        let scale = (&form.semisimple + &form.nilpotent).norm().max(f64::MIN_POSITIVE);
        let band = 1e-6 * scale.max(1.0);
        let eig = complex_eigenvalues(&form.semisimple)?;
        let max_re = eig.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
        let nilpotent_nonzero = form.nilpotent.norm() > band;
        let real_part = max_re > band;
        Ok(Self {
            imaginary_semisimple: !nilpotent_nonzero && !real_part,
            real_pair: !nilpotent_nonzero && real_part,
            nilpotent_nonzero,
        })
    }

    pub fn kind(&self) -> ElementKind {
        if self.nilpotent_nonzero {
            ElementKind::Parabolic
        } else if self.real_pair {
            ElementKind::Hyperbolic
        } else {
            ElementKind::Elliptic
        }
    }
}

fn check_spectral_consistency(form: &CanonicalForm, scale: f64) -> Result<()> {
    if form.residual > 1e-6 {
        return Err(Error::Internal(format!(
            "canonical form does not reproduce the element (residual {:.3e})",
            form.residual
        )));
    }
    let flags = SpectralFlags::of(form)?;
    let count = [flags.imaginary_semisimple, flags.real_pair, flags.nilpotent_nonzero]
        .iter()
        .filter(|&&b| b)
        .count();
    if count != 1 || flags.kind() != form.kind {
        return Err(Error::Internal(format!(
            "spectral conditions {flags:?} disagree with {} (scale {scale:.3e})",
            form.kind.as_str()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn biv(x: &Vector, y: &Vector, f: &MinkowskiFrame) -> Mat {
        bivector_matrix(x, y, f).unwrap()
    }

    #[test]
    fn boost_is_hyperbolic() {
        let f = MinkowskiFrame::new(2);
        let c = biv(&f.p(), &f.q(), &f) * 2.0;
        let form = classify(&c, DEFAULT_TOL).unwrap();
        assert_eq!(form.kind, ElementKind::Hyperbolic);
        assert!((form.a - 2.0).abs() < 1e-12);
        assert!(form.c0.norm() < 1e-12);
        assert!(form.residual < 1e-12);
    }

    #[test]
    fn null_rotation_is_parabolic() {
        let f = MinkowskiFrame::new(2);
        let c = biv(&f.p(), &f.e(0), &f);
        let form = classify(&c, DEFAULT_TOL).unwrap();
        assert_eq!(form.kind, ElementKind::Parabolic);
        assert_eq!(form.a, 1.0);
        assert!(form.c0.norm() < 1e-12);
        assert!(form.residual < 1e-12);
    }

    #[test]
    fn rotation_is_elliptic() {
        let f = MinkowskiFrame::new(2);
        let c = biv(&f.e(0), &f.e(1), &f);
        let form = classify(&c, DEFAULT_TOL).unwrap();
        assert_eq!(form.kind, ElementKind::Elliptic);
        assert_eq!(form.a, 0.0);
        let eig = sym_eig(&(form.c0.transpose() * &form.c0), 1e-12).unwrap();
        assert!((eig.values[2] - 1.0).abs() < 1e-12);
        assert!(eig.values[0].abs() < 1e-12);
        let g = f.gram();
        assert!((form.witt_frame.transpose() * &g * &form.witt_frame - &g).norm() < 1e-12);
    }

    #[test]
    fn zero_is_elliptic() {
        let form = classify(&Mat::zeros(4, 4), DEFAULT_TOL).unwrap();
        assert_eq!(form.kind, ElementKind::Elliptic);
        assert_eq!(form.a, 0.0);
    }

    #[test]
    fn rejects_non_so() {
        assert!(matches!(
            classify(&Mat::identity(3, 3), DEFAULT_TOL),
            Err(Error::NotInSo { .. })
        ));
    }

    #[test]
    fn parabolic_with_rotation() {
        let f = MinkowskiFrame::new(3);
        let c = biv(&f.p(), &f.e(0), &f) * 3.0 + biv(&f.e(1), &f.e(2), &f) * 0.5;
        let form = classify(&c, DEFAULT_TOL).unwrap();
        assert_eq!(form.kind, ElementKind::Parabolic);
        assert!((form.c0[(0, 1)].abs() - 0.5).abs() < 1e-12);
        let g = f.gram();
        assert!((form.frame.transpose() * &g * &form.frame - &g).norm() < 1e-12);
    }

    #[test]
    fn split_co_examples() {
        let f = MinkowskiFrame::new(1);
        let c = biv(&f.p(), &f.q(), &f) + Mat::identity(3, 3) * 2.0;
        let (s, so) = split_co(&c, 1e-12).unwrap();
        assert!((s - 2.0).abs() < 1e-15);
        assert!(f.so_residual(&so) < 1e-15);
        let mut bad = Mat::zeros(3, 3);
        bad[(0, 0)] = 1.0;
        assert!(split_co(&bad, 1e-12).is_err());
    }
}
