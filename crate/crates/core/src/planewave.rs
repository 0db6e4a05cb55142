//! Plane-wave metrics `2 du dv + |dx|^2 + x^T A(u) x du^2` in coordinates `(v, x^1..x^n, u)`.
//!
//! Kind `a`: `A(u) = e^{uF} B e^{-uF}`. Kind `b`: `A(u) = e^{ln(u) F} B e^{-ln(u) F} / u^2`, `u > 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_shape, check_skew, check_symmetric, commutator, expm, Mat, Vector};

/// Relative tolerance used to validate the symmetry of `B` and skewness of `F`.
pub const INPUT_TOL: f64 = 1e-10;
/// Default finite-difference step.
pub const DEFAULT_STEP: f64 = 1e-4;
/// Sign relating `CurvatureMap::profile` (bivector form `∂_v ∧ A ∂_x`) to the
/// curvature `R(X,Y) = [∇_X, ∇_Y] - ∇_{[X,Y]}` of `metric_at`.
pub const BIVECTOR_TO_STANDARD_SIGN: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WaveKind {
    #[serde(rename = "a")]
    A,
    #[serde(rename = "b")]
    B,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWaveSpec {
    kind: WaveKind,
    f: Mat,
    b: Mat,
}

impl PlaneWaveSpec {
    /// `f` must be skew and `b` symmetric, both `n x n`.
    pub fn new(kind: WaveKind, f: Mat, b: Mat) -> Result<Self> {
        let n = b.nrows();
        check_shape(&b, n, "B")?;
        check_shape(&f, n, "F")?;
        check_symmetric(&b, INPUT_TOL, "B")?;
        check_skew(&f, INPUT_TOL, "F")?;
        Ok(Self { kind, f, b })
    }

    pub fn kind(&self) -> WaveKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.b.nrows()
    }

    pub fn f(&self) -> &Mat {
        &self.f
    }

    pub fn b(&self) -> &Mat {
        &self.b
    }

    fn check_u(&self, u: f64) -> Result<()> {
        if !u.is_finite() {
            return Err(Error::NonFinite("u"));
        }
        if self.kind == WaveKind::B && u <= 0.0 {
            return Err(Error::Domain(format!("kind b requires u > 0, got {u}")));
        }
        Ok(())
    }

    fn rotated(&self, theta: f64) -> Result<Mat> {
        let r = expm(&(&self.f * theta))?;
        Ok(&r * &self.b * r.transpose())
    }

    /// Coefficient matrix `A(u)` of `x^T A(u) x du^2`.
    pub fn profile(&self, u: f64) -> Result<Mat> {
        self.check_u(u)?;
        match self.kind {
            WaveKind::A => self.rotated(u),
            WaveKind::B => Ok(self.rotated(u.ln())? / (u * u)),
        }
    }

    /// `dA/du`.
    pub fn profile_derivative(&self, u: f64) -> Result<Mat> {
        self.check_u(u)?;
        match self.kind {
            WaveKind::A => {
                let t = self.rotated(u)?;
                Ok(commutator(&self.f, &t))
            }
            WaveKind::B => {
                let t = self.rotated(u.ln())?;
                Ok((commutator(&self.f, &t) - t * 2.0) / (u * u * u))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpacetimePoint {
    pub v: f64,
    pub x: Vector,
    pub u: f64,
}

impl SpacetimePoint {
    pub fn new(v: f64, x: Vector, u: f64) -> Self {
        Self { v, x, u }
    }

    /// From coordinates ordered `(v, x^1..x^n, u)`.
    pub fn from_coords(c: &[f64]) -> Result<Self> {
        if c.len() < 2 {
            return Err(Error::DimensionMismatch {
                what: "point coordinates",
                expected: 2,
                found: c.len(),
            });
        }
        if c.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("point"));
        }
        let n = c.len() - 2;
        Ok(Self::new(c[0], Vector::from_row_slice(&c[1..=n]), c[n + 1]))
    }

    pub fn coords(&self) -> Vector {
        let n = self.x.len();
        let mut out = Vector::zeros(n + 2);
        out[0] = self.v;
        out.rows_mut(1, n).copy_from(&self.x);
        out[n + 1] = self.u;
        out
    }

    fn shifted(&self, axis: usize, h: f64) -> Self {
        let mut c = self.coords();
        c[axis] += h;
        Self::from_coords(c.as_slice()).expect("finite")
    }
}

fn check_point(spec: &PlaneWaveSpec, pt: &SpacetimePoint) -> Result<()> {
    if pt.x.len() != spec.n() {
        return Err(Error::DimensionMismatch {
            what: "point x",
            expected: spec.n(),
            found: pt.x.len(),
        });
    }
    Ok(())
}

fn check_step(spec: &PlaneWaveSpec, pt: &SpacetimePoint, h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("step {h} must be positive")));
    }
    if spec.kind == WaveKind::B && pt.u <= 2.0 * h {
        return Err(Error::Domain(format!(
            "kind b stencil at u = {} with step {h} leaves u > 0",
            pt.u
        )));
    }
    Ok(())
}

/// Metric components at `pt` in coordinates `(v, x, u)`.
pub fn metric_at(spec: &PlaneWaveSpec, pt: &SpacetimePoint) -> Result<Mat> {
    check_point(spec, pt)?;
    let n = spec.n();
    let a = spec.profile(pt.u)?;
    let mut g = Mat::zeros(n + 2, n + 2);
    g[(0, n + 1)] = 1.0;
    g[(n + 1, 0)] = 1.0;
    for i in 1..=n {
        g[(i, i)] = 1.0;
    }
    g[(n + 1, n + 1)] = pt.x.dot(&(&a * &pt.x));
    Ok(g)
}

/// Dense 3-index array `t[a][b][c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    dim: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[(a * self.dim + b) * self.dim + c]
    }

    pub fn set(&mut self, a: usize, b: usize, c: usize, v: f64) {
        self.data[(a * self.dim + b) * self.dim + c] = v;
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }
}

/// Dense 4-index array `R^a_{bcd}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    dim: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim.pow(4)] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn idx(&self, a: usize, b: usize, c: usize, d: usize) -> usize {
        ((a * self.dim + b) * self.dim + c) * self.dim + d
    }

    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.data[self.idx(a, b, c, d)]
    }

    pub fn set(&mut self, a: usize, b: usize, c: usize, d: usize, v: f64) {
        let i = self.idx(a, b, c, d);
        self.data[i] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(x, y)| x - y).collect(),
        }
    }

    /// `max |R^a_{bcd} + R^a_{cdb} + R^a_{dbc}|`.
    pub fn bianchi_residual(&self) -> f64 {
        let d = self.dim;
        let mut r: f64 = 0.0;
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    for e in 0..d {
                        let s = self.get(a, b, c, e) + self.get(a, c, e, b) + self.get(a, e, b, c);
                        r = r.max(s.abs());
                    }
                }
            }
        }
        r
    }

    /// Nonzero entries `[a, b, c, d, value]` above `threshold`.
    pub fn nonzero(&self, threshold: f64) -> Vec<(usize, usize, usize, usize, f64)> {
        let d = self.dim;
        let mut out = Vec::new();
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    for e in 0..d {
                        let v = self.get(a, b, c, e);
                        if v.abs() > threshold {
                            out.push((a, b, c, e, v));
                        }
                    }
                }
            }
        }
        out
    }
}

/// Christoffel symbols `Γ^a_{bc}` from the closed-form metric derivatives.
pub fn christoffel_closed(spec: &PlaneWaveSpec, pt: &SpacetimePoint) -> Result<Tensor3> {
    check_point(spec, pt)?;
    let n = spec.n();
    let u = n + 1;
    let a = spec.profile(pt.u)?;
    let da = spec.profile_derivative(pt.u)?;
    let ax = &a * &pt.x;
    let mut gamma = Tensor3::zeros(n + 2);
    for k in 0..n {
        gamma.set(1 + k, u, u, -ax[k]);
        gamma.set(0, u, 1 + k, ax[k]);
        gamma.set(0, 1 + k, u, ax[k]);
    }
    gamma.set(0, u, u, 0.5 * pt.x.dot(&(&da * &pt.x)));
    Ok(gamma)
}

/// Christoffel symbols `Γ^a_{bc}` from central differences of `metric_at`.
pub fn christoffel_fd(spec: &PlaneWaveSpec, pt: &SpacetimePoint, h: f64) -> Result<Tensor3> {
    check_point(spec, pt)?;
    check_step(spec, pt, h)?;
    let g = metric_at(spec, pt)?;
    let d = g.nrows();
    let ginv = g
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Internal("singular metric".into()))?;
    let mut dg = Vec::with_capacity(d);
    for c in 0..d {
        let plus = metric_at(spec, &pt.shifted(c, h))?;
        let minus = metric_at(spec, &pt.shifted(c, -h))?;
        dg.push((plus - minus) / (2.0 * h));
    }
    let mut gamma = Tensor3::zeros(d);
    for a in 0..d {
        for b in 0..d {
            for c in b..d {
                let mut s = 0.0;
                for l in 0..d {
                    let lowered = dg[b][(c, l)] + dg[c][(b, l)] - dg[l][(b, c)];
                    s += ginv[(a, l)] * lowered;
                }
                gamma.set(a, b, c, 0.5 * s);
                gamma.set(a, c, b, 0.5 * s);
            }
        }
    }
    Ok(gamma)
}

/// Curvature at a fixed `u`, stored as the profile `A(u)` of the bivector form
/// `R(∂_x, ∂_u) = ∂_v ∧ A(u) ∂_x` (all other components vanish).
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureMap {
    pub u: f64,
    pub profile: Mat,
}

impl CurvatureMap {
    /// `R^a_{bcd}` for `R(X,Y) = [∇_X, ∇_Y] - ∇_{[X,Y]}`, coordinates `(v, x, u)`.
    pub fn tensor(&self) -> Tensor4 {
        let n = self.profile.nrows();
        let u = n + 1;
        let s = BIVECTOR_TO_STANDARD_SIGN;
        let mut r = Tensor4::zeros(n + 2);
        for i in 0..n {
            for j in 0..n {
                let t = self.profile[(j, i)];
                r.set(1 + j, u, 1 + i, u, s * t);
                r.set(1 + j, u, u, 1 + i, -s * t);
                r.set(0, 1 + j, 1 + i, u, -s * t);
                r.set(0, 1 + j, u, 1 + i, s * t);
            }
        }
        r
    }
}

pub fn curvature_closed(spec: &PlaneWaveSpec, u: f64) -> Result<CurvatureMap> {
    Ok(CurvatureMap { u, profile: spec.profile(u)? })
}

/// Weyl curvature: the trace-free part of the profile.
pub fn weyl_closed(spec: &PlaneWaveSpec, u: f64) -> Result<CurvatureMap> {
    let a = spec.profile(u)?;
    let n = spec.n();
    if n == 0 {
        return Err(Error::DimensionMismatch { what: "E", expected: 1, found: 0 });
    }
    let tr = a.trace() / n as f64;
    Ok(CurvatureMap { u, profile: a - Mat::identity(n, n) * tr })
}

/// `R^a_{bcd}` from nested central differences of `christoffel_fd`.
pub fn curvature_fd(spec: &PlaneWaveSpec, pt: &SpacetimePoint, h: f64) -> Result<Tensor4> {
    check_point(spec, pt)?;
    check_step(spec, pt, h)?;
    let gamma = christoffel_fd(spec, pt, h)?;
    let d = gamma.dim();
    let mut dgamma = Vec::with_capacity(d);
    for c in 0..d {
        let plus = christoffel_fd(spec, &pt.shifted(c, h), h)?;
        let minus = christoffel_fd(spec, &pt.shifted(c, -h), h)?;
        let mut t = Tensor3::zeros(d);
        for a in 0..d {
            for b in 0..d {
                for e in 0..d {
                    t.set(a, b, e, (plus.get(a, b, e) - minus.get(a, b, e)) / (2.0 * h));
                }
            }
        }
        dgamma.push(t);
    }
    let mut r = Tensor4::zeros(d);
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for e in 0..d {
                    let mut v = dgamma[c].get(a, e, b) - dgamma[e].get(a, c, b);
                    for f in 0..d {
                        v += gamma.get(a, c, f) * gamma.get(f, e, b)
                            - gamma.get(a, e, f) * gamma.get(f, c, b);
                    }
                    r.set(a, b, c, e, v);
                }
            }
        }
    }
    Ok(r)
}

/// Weyl tensor `C^a_{bcd}` of a curvature tensor `R^a_{bcd}` with metric `g`.
pub fn weyl_tensor(r: &Tensor4, g: &Mat) -> Result<Tensor4> {
    let d = r.dim();
    if d < 3 {
        return Err(Error::DimensionMismatch { what: "spacetime", expected: 3, found: d });
    }
    let ginv = g
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Internal("singular metric".into()))?;
    let ric = Mat::from_fn(d, d, |b, e| (0..d).map(|a| r.get(a, b, a, e)).sum());
    let scal: f64 = (0..d).flat_map(|b| (0..d).map(move |e| (b, e))).map(|(b, e)| ginv[(b, e)] * ric[(b, e)]).sum();
    let nn = d as f64;
    let mut lowered = Tensor4::zeros(d);
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for e in 0..d {
                    let rl: f64 = (0..d).map(|f| g[(a, f)] * r.get(f, b, c, e)).sum();
                    let ricci_part = (g[(a, c)] * ric[(b, e)] - g[(a, e)] * ric[(b, c)]
                        + g[(b, e)] * ric[(a, c)]
                        - g[(b, c)] * ric[(a, e)])
                        / (nn - 2.0);
                    let scalar_part = scal * (g[(a, c)] * g[(b, e)] - g[(a, e)] * g[(b, c)])
                        / ((nn - 1.0) * (nn - 2.0));
                    lowered.set(a, b, c, e, rl - ricci_part + scalar_part);
                }
            }
        }
    }
    let mut out = Tensor4::zeros(d);
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for e in 0..d {
                    let v: f64 = (0..d).map(|f| ginv[(a, f)] * lowered.get(f, b, c, e)).sum();
                    out.set(a, b, c, e, v);
                }
            }
        }
    }
    Ok(out)
}

/// True when the trace-free part of `B` vanishes: `||B - tr(B)/n I|| <= tol * max(1, ||B||)`.
pub fn is_conformally_flat(spec: &PlaneWaveSpec, tol: f64) -> Result<bool> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol}")));
    }
    let n = spec.n();
    if n == 0 {
        return Ok(true);
    }
    let b = spec.b();
    let dev = b - Mat::identity(n, n) * (b.trace() / n as f64);
    Ok(dev.norm() <= tol * b.norm().max(1.0))
}

/// Result of checking `∇_X R = 0` along the wave fronts.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWaveCheck {
    /// `max_X max|∇_X R| / max(1, max|R|)` over `X ∈ {∂_v, ∂_x}`.
    pub residual: f64,
    /// Same quantity per direction `∂_v, ∂_{x^1}, ..`.
    pub per_direction: Vec<f64>,
    /// Same quantity for `∂_u`, which is nonzero for generic waves.
    pub u_direction: f64,
}

/// Covariant derivative of the closed-form curvature, using finite
/// differences for its coordinate derivatives and `christoffel_fd` for Γ.
pub fn planewave_condition_check(
    spec: &PlaneWaveSpec,
    pt: &SpacetimePoint,
    h: f64,
) -> Result<PlaneWaveCheck> {
    check_point(spec, pt)?;
    check_step(spec, pt, h)?;
    let gamma = christoffel_fd(spec, pt, h)?;
    let r = curvature_closed(spec, pt.u)?.tensor();
    let d = r.dim();
    let scale = r.max_abs().max(1.0);
    let mut per = Vec::with_capacity(d);
    for c in 0..d {
        let plus = curvature_closed(spec, pt.shifted(c, h).u)?.tensor();
        let minus = curvature_closed(spec, pt.shifted(c, -h).u)?.tensor();
        let mut worst: f64 = 0.0;
        for a in 0..d {
            for b in 0..d {
                for e in 0..d {
                    for f in 0..d {
                        let mut v = (plus.get(a, b, e, f) - minus.get(a, b, e, f)) / (2.0 * h);
                        for m in 0..d {
                            v += gamma.get(a, c, m) * r.get(m, b, e, f)
                                - gamma.get(m, c, b) * r.get(a, m, e, f)
                                - gamma.get(m, c, e) * r.get(a, b, m, f)
                                - gamma.get(m, c, f) * r.get(a, b, e, m);
                        }
                        worst = worst.max(v.abs());
                    }
                }
            }
        }
        per.push(worst / scale);
    }
    let u_direction = per.pop().expect("u direction");
    let residual = per.iter().cloned().fold(0.0, f64::max);
    Ok(PlaneWaveCheck { residual, per_direction: per, u_direction })
}

/// Kind-a spec conformally related to a kind-b spec.
#[derive(Debug, Clone, PartialEq)]
pub struct Conversion {
    pub spec: PlaneWaveSpec,
    /// Description of the conformal factor `Φ^* g_b = e^u g_a`.
    pub conformal_factor: &'static str,
}

/// `Φ(v, x, u) = (v - |x|^2/4, e^{u/2} x, e^u)` pulls the kind-b metric back to
/// `e^u` times the kind-a metric with the same `F` and `B + I/4`.
pub fn convert_b_to_a(spec: &PlaneWaveSpec) -> Result<Conversion> {
    if spec.kind() != WaveKind::B {
        return Err(Error::InvalidParameter("conversion expects a kind-b spec".into()));
    }
    let n = spec.n();
    let b = spec.b() + Mat::identity(n, n) * 0.25;
    Ok(Conversion {
        spec: PlaneWaveSpec::new(WaveKind::A, spec.f().clone(), b)?,
        conformal_factor: "exp(u)",
    })
}

/// The coordinate map `Φ` of `convert_b_to_a`, applied to a kind-a point.
pub fn b_to_a_map(pt: &SpacetimePoint) -> SpacetimePoint {
    let s = (pt.u / 2.0).exp();
    SpacetimePoint::new(pt.v - pt.x.norm_squared() / 4.0, &pt.x * s, pt.u.exp())
}

/// Jacobian of `b_to_a_map` at `pt`.
pub fn b_to_a_jacobian(pt: &SpacetimePoint) -> Mat {
    let n = pt.x.len();
    let s = (pt.u / 2.0).exp();
    let mut j = Mat::zeros(n + 2, n + 2);
    j[(0, 0)] = 1.0;
    for i in 0..n {
        j[(0, 1 + i)] = -0.5 * pt.x[i];
        j[(1 + i, 1 + i)] = s;
        j[(1 + i, n + 1)] = 0.5 * s * pt.x[i];
    }
    j[(n + 1, n + 1)] = pt.u.exp();
    j
}

/// Pull back the kind-b metric along `Φ`; equals `e^u` times the converted metric.
pub fn conversion_pullback(spec_b: &PlaneWaveSpec, pt: &SpacetimePoint) -> Result<Mat> {
    check_point(spec_b, pt)?;
    let j = b_to_a_jacobian(pt);
    let g = metric_at(spec_b, &b_to_a_map(pt))?;
    Ok(j.transpose() * g * j)
}

/// Pull back the metric along `(v, x, u) -> (λ^2 v, λ x, u)`; equals `λ^2 g`.
pub fn homothety_pullback(spec: &PlaneWaveSpec, lambda: f64, pt: &SpacetimePoint) -> Result<Mat> {
    if !(lambda.is_finite() && lambda != 0.0) {
        return Err(Error::InvalidParameter(format!("homothety factor {lambda}")));
    }
    check_point(spec, pt)?;
    let n = spec.n();
    let image = SpacetimePoint::new(lambda * lambda * pt.v, &pt.x * lambda, pt.u);
    let mut j = Mat::identity(n + 2, n + 2) * lambda;
    j[(0, 0)] = lambda * lambda;
    j[(n + 1, n + 1)] = 1.0;
    let g = metric_at(spec, &image)?;
    Ok(j.transpose() * g * j)
}
