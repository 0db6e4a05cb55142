//! Structure constants of the isometry and conformal algebras of plane waves,
//! frame normalization, the Nomizu map and first prolongations.

use crate::error::{Error, Result};
use crate::linalg::{
    bivector_matrix, check_shape, check_skew, commutator, null_space, skew_part, sym_part, Mat,
    MinkowskiFrame, Vector,
};
use crate::lorentz::split_co;
use crate::planewave::{is_conformally_flat, PlaneWaveSpec, WaveKind};

/// Relative tolerance for the derived bracket constraints.
pub const CONSTRAINT_TOL: f64 = 1e-10;
/// Singular values below this fraction of the largest are treated as zero.
pub const NULL_SPACE_TOL: f64 = 1e-9;
/// Structure constants at or below this magnitude are omitted from `nonzero`.
pub const REPORT_THRESHOLD: f64 = 1e-13;

/// Finite-dimensional Lie algebra given by structure constants
/// `[X_i, X_j] = Σ_k c[i][j][k] X_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebraData {
    labels: Vec<String>,
    c: Vec<f64>,
    jacobi: f64,
}

impl LieAlgebraData {
    /// Build from the brackets of basis pairs `i < j`; the rest follows by antisymmetry.
    pub fn from_bracket<F>(labels: Vec<String>, mut bracket: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> Result<Vector>,
    {
        let dim = labels.len();
        let mut c = vec![0.0; dim * dim * dim];
        for i in 0..dim {
            for j in i + 1..dim {
                let v = bracket(i, j)?;
                if v.len() != dim {
                    return Err(Error::DimensionMismatch {
                        what: "bracket value",
                        expected: dim,
                        found: v.len(),
                    });
                }
                for k in 0..dim {
                    c[(i * dim + j) * dim + k] = v[k];
                    c[(j * dim + i) * dim + k] = -v[k];
                }
            }
        }
        let mut out = Self { labels, c, jacobi: 0.0 };
        out.jacobi = out.compute_jacobi();
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> f64 {
        let d = self.dim();
        self.c[(i * d + j) * d + k]
    }

    /// `[X_i, X_j]` in coordinates.
    pub fn bracket_basis(&self, i: usize, j: usize) -> Vector {
        let d = self.dim();
        Vector::from_fn(d, |k, _| self.structure_constant(i, j, k))
    }

    pub fn bracket(&self, x: &Vector, y: &Vector) -> Vector {
        let d = self.dim();
        let mut out = Vector::zeros(d);
        for i in 0..d {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                if y[j] == 0.0 {
                    continue;
                }
                let w = x[i] * y[j];
                for k in 0..d {
                    out[k] += w * self.structure_constant(i, j, k);
                }
            }
        }
        out
    }

    /// Jacobi residual attached on construction.
    pub fn jacobi_residual(&self) -> f64 {
        self.jacobi
    }

    fn compute_jacobi(&self) -> f64 {
        let d = self.dim();
        // ad matrices: ad[i][(k, m)] = c[i][m][k]
        let ad: Vec<Mat> = (0..d)
            .map(|i| Mat::from_fn(d, d, |k, m| self.structure_constant(i, m, k)))
            .collect();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in i + 1..d {
                let bij = self.bracket_basis(i, j);
                for k in j + 1..d {
                    let s = &ad[i] * self.bracket_basis(j, k)
                        + &ad[j] * self.bracket_basis(k, i)
                        + &ad[k] * &bij;
                    worst = worst.max(s.norm());
                }
            }
        }
        worst
    }

    /// Entries `(i, j, k, value)` with `i < j` and `|value| > threshold`.
    pub fn nonzero(&self, threshold: f64) -> Vec<(usize, usize, usize, f64)> {
        let d = self.dim();
        let mut out = Vec::new();
        for i in 0..d {
            for j in i + 1..d {
                for k in 0..d {
                    let v = self.structure_constant(i, j, k);
                    if v.abs() > threshold {
                        out.push((i, j, k, v));
                    }
                }
            }
        }
        out
    }

    /// Structure constants in the basis given by the columns of `basis`.
    pub fn change_basis(&self, basis: &Mat, labels: Vec<String>) -> Result<Self> {
        let d = self.dim();
        check_shape(basis, d, "change of basis")?;
        if labels.len() != d {
            return Err(Error::DimensionMismatch { what: "labels", expected: d, found: labels.len() });
        }
        let lu = basis.clone().lu();
        if !lu.is_invertible() {
            return Err(Error::InvalidParameter("change of basis is singular".into()));
        }
        let cols: Vec<Vector> = (0..d).map(|i| basis.column(i).into_owned()).collect();
        Self::from_bracket(labels, |i, j| {
            let b = self.bracket(&cols[i], &cols[j]);
            lu.solve(&b).ok_or_else(|| Error::Internal("singular change of basis".into()))
        })
    }

    /// `max |c - c'|` over all structure constants.
    pub fn max_difference(&self, other: &Self) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                what: "algebra",
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self.c.iter().zip(&other.c).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }
}

/// Max over basis triples of the norm of the Jacobi cyclic sum.
pub fn jacobi_residual(alg: &LieAlgebraData) -> f64 {
    alg.jacobi_residual()
}

fn skew_basis(n: usize) -> Vec<Mat> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let mut m = Mat::zeros(n, n);
            m[(i, j)] = s;
            m[(j, i)] = -s;
            out.push(m);
        }
    }
    out
}

/// Frobenius-orthonormal basis of span of the given matrices.
fn orthonormal_span(mats: &[Mat]) -> Vec<Mat> {
    if mats.is_empty() {
        return Vec::new();
    }
    let (r, c) = mats[0].shape();
    let stacked = Mat::from_fn(r * c, mats.len(), |row, col| mats[col].as_slice()[row]);
    if stacked.norm() == 0.0 {
        return Vec::new();
    }
    let svd = stacked.svd(true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > NULL_SPACE_TOL * smax)
        .map(|i| Mat::from_column_slice(r, c, u.column(i).as_slice()))
        .collect()
}

/// Frobenius-orthonormal basis of `{K skew : [K, B] = 0, [K, F] = 0}`.
pub fn centralizer_k(b: &Mat, f: &Mat) -> Result<Vec<Mat>> {
    let n = b.nrows();
    check_shape(b, n, "B")?;
    check_shape(f, n, "F")?;
    let basis = skew_basis(n);
    if basis.is_empty() {
        return Ok(Vec::new());
    }
    let rows = 2 * n * n;
    let mut a = Mat::zeros(rows, basis.len());
    for (col, k) in basis.iter().enumerate() {
        let cb = commutator(k, b);
        let cf = commutator(k, f);
        for (r, v) in cb.iter().chain(cf.iter()).enumerate() {
            a[(r, col)] = *v;
        }
    }
    let ker = null_space(&a, NULL_SPACE_TOL);
    Ok((0..ker.ncols())
        .map(|c| {
            basis
                .iter()
                .zip(ker.column(c).iter())
                .fold(Mat::zeros(n, n), |acc, (m, w)| acc + m * *w)
        })
        .collect())
}

/// Bracket table on `q, 𝔨, p∧E, p, E` (and optionally `D`):
///
/// ```text
/// [q, p]   = λ p            [q, p∧Y] = p∧KY - Y        [q, X] = p∧TX + LX
/// [X, Z]   = (ΩX, Z) p      [p∧Y, X] = -(Y, X) p
/// [k, ·]   acts on E by k   [D, p] = 2p, [D, X] = X, [D, p∧Y] = p∧Y
/// ```
///
/// The isometry algebra of a spec has `Ω = 0`, `L = F`, `T = B`, `K = λ + F`.
#[derive(Debug, Clone, PartialEq)]
pub struct BracketTable {
    pub lambda: f64,
    pub omega: Mat,
    pub l: Mat,
    pub t: Mat,
    pub k: Mat,
    pub rotations: Vec<Mat>,
    pub dilation: bool,
}

#[derive(Debug, Clone)]
struct Element {
    q: f64,
    k: Mat,
    pw: Vector,
    p: f64,
    e: Vector,
    d: f64,
}

impl BracketTable {
    pub fn isometry(spec: &PlaneWaveSpec) -> Result<Self> {
        let n = spec.n();
        let lambda = kind_lambda(spec.kind());
        Ok(Self {
            lambda,
            omega: Mat::zeros(n, n),
            l: spec.f().clone(),
            t: spec.b().clone(),
            k: Mat::identity(n, n) * lambda + spec.f(),
            rotations: centralizer_k(spec.b(), spec.f())?,
            dilation: false,
        })
    }

    pub fn n(&self) -> usize {
        self.l.nrows()
    }

    pub fn dim(&self) -> usize {
        2 + self.rotations.len() + 2 * self.n() + usize::from(self.dilation)
    }

    pub fn labels(&self) -> Vec<String> {
        let n = self.n();
        let mut out = vec!["q".to_string()];
        out.extend((1..=self.rotations.len()).map(|i| format!("k_{i}")));
        out.extend((1..=n).map(|i| format!("pwedge_e{i}")));
        out.push("p".into());
        out.extend((1..=n).map(|i| format!("e_{i}")));
        if self.dilation {
            out.push("D".into());
        }
        out
    }

    pub fn q_index(&self) -> usize {
        0
    }

    pub fn k_index(&self, i: usize) -> usize {
        1 + i
    }

    pub fn pwedge_index(&self, i: usize) -> usize {
        1 + self.rotations.len() + i
    }

    pub fn p_index(&self) -> usize {
        1 + self.rotations.len() + self.n()
    }

    pub fn e_index(&self, i: usize) -> usize {
        self.p_index() + 1 + i
    }

    pub fn d_index(&self) -> Option<usize> {
        self.dilation.then(|| self.dim() - 1)
    }

    fn unpack(&self, x: &Vector) -> Element {
        let n = self.n();
        let k = self
            .rotations
            .iter()
            .enumerate()
            .fold(Mat::zeros(n, n), |acc, (i, r)| acc + r * x[self.k_index(i)]);
        Element {
            q: x[self.q_index()],
            k,
            pw: Vector::from_fn(n, |i, _| x[self.pwedge_index(i)]),
            p: x[self.p_index()],
            e: Vector::from_fn(n, |i, _| x[self.e_index(i)]),
            d: self.d_index().map_or(0.0, |i| x[i]),
        }
    }

    fn pack(&self, el: &Element) -> Vector {
        let n = self.n();
        let mut x = Vector::zeros(self.dim());
        x[self.q_index()] = el.q;
        for (i, r) in self.rotations.iter().enumerate() {
            x[self.k_index(i)] = r.dot(&el.k);
        }
        for i in 0..n {
            x[self.pwedge_index(i)] = el.pw[i];
            x[self.e_index(i)] = el.e[i];
        }
        x[self.p_index()] = el.p;
        if let Some(i) = self.d_index() {
            x[i] = el.d;
        }
        x
    }

    fn bracket_elements(&self, a: &Element, b: &Element) -> Element {
        let lam = self.lambda;
        let k = commutator(&a.k, &b.k);
        let pw = (&self.k * &b.pw + &self.t * &b.e) * a.q - (&self.k * &a.pw + &self.t * &a.e) * b.q
            + &a.k * &b.pw
            - &b.k * &a.pw
            + &b.pw * a.d
            - &a.pw * b.d;
        let p = lam * (a.q * b.p - b.q * a.p) - a.pw.dot(&b.e) + b.pw.dot(&a.e)
            + (&self.omega * &a.e).dot(&b.e)
            + 2.0 * (a.d * b.p - b.d * a.p);
        let e = (&self.l * &b.e - &b.pw) * a.q - (&self.l * &a.e - &a.pw) * b.q + &a.k * &b.e
            - &b.k * &a.e
            + &b.e * a.d
            - &a.e * b.d;
        Element { q: 0.0, k, pw, p, e, d: 0.0 }
    }

    pub fn algebra(&self) -> Result<LieAlgebraData> {
        let n = self.n();
        for (what, m) in [("omega", &self.omega), ("T", &self.t), ("K", &self.k)] {
            check_shape(m, n, what)?;
        }
        let dim = self.dim();
        let basis = |i: usize| {
            let mut v = Vector::zeros(dim);
            v[i] = 1.0;
            v
        };
        let mut projection_error: f64 = 0.0;
        let alg = LieAlgebraData::from_bracket(self.labels(), |i, j| {
            let out = self.bracket_elements(&self.unpack(&basis(i)), &self.unpack(&basis(j)));
            let packed = self.pack(&out);
            let kept = self.unpack(&packed).k;
            projection_error = projection_error.max((&out.k - kept).norm());
            Ok(packed)
        })?;
        if projection_error > 1e-10 {
            return Err(Error::Constraint { name: "rotation closure", residual: projection_error });
        }
        Ok(alg)
    }
}

fn kind_lambda(kind: WaveKind) -> f64 {
    match kind {
        WaveKind::A => 0.0,
        WaveKind::B => 1.0,
    }
}

/// Killing algebra of the plane wave.
pub fn build_isom(spec: &PlaneWaveSpec) -> Result<LieAlgebraData> {
    BracketTable::isometry(spec)?.algebra()
}

/// Conformal algebra: the isometry algebra extended by the homothety `D`.
/// Conformally flat waves are refused.
pub fn build_conf(spec: &PlaneWaveSpec) -> Result<LieAlgebraData> {
    if is_conformally_flat(spec, CONSTRAINT_TOL)? {
        return Err(Error::ConformallyFlat);
    }
    let mut table = BracketTable::isometry(spec)?;
    table.dilation = true;
    table.algebra()
}

/// Left-invariant data on the solvable group `R q ⋉ (E ⊕ R p)`:
/// `[q, p] = λ p`, `[q, X] = L X`, `[X, Y] = ω(X, Y) p` with `ω(X, Y) = (ωX, Y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivationData {
    pub lambda: f64,
    pub omega: Mat,
    pub l: Mat,
    pub c0: Mat,
}

impl DerivationData {
    /// `c0 = None` means no rotational part.
    pub fn new(lambda: f64, omega: Mat, l: Mat, c0: Option<Mat>) -> Result<Self> {
        let n = l.nrows();
        check_shape(&l, n, "L")?;
        check_shape(&omega, n, "omega")?;
        check_skew(&omega, CONSTRAINT_TOL, "omega")?;
        let c0 = c0.unwrap_or_else(|| Mat::zeros(n, n));
        check_shape(&c0, n, "c0")?;
        check_skew(&c0, CONSTRAINT_TOL, "c0")?;
        if !lambda.is_finite() {
            return Err(Error::NonFinite("lambda"));
        }
        Ok(Self { lambda, omega, l, c0 })
    }

    pub fn n(&self) -> usize {
        self.l.nrows()
    }

    /// `||L^T ω + ω L - λ ω||`.
    pub fn omega_l_residual(&self) -> f64 {
        (self.l.transpose() * &self.omega + &self.omega * &self.l - &self.omega * self.lambda).norm()
    }

    fn scale(&self) -> f64 {
        1.0 + self.l.norm() + self.omega.norm() + self.lambda.abs()
    }
}

/// Raw reductive bracket data: a derivation plus the `[q, p∧X] = p∧KX - X`
/// and `[q, X] = p∧TX + LX` endomorphisms. `K` defaults to the value forced
/// by Jacobi, `λ - ω - L^T`, and `T` to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RawBrackets {
    pub data: DerivationData,
    pub k: Option<Mat>,
    pub t: Option<Mat>,
}

impl RawBrackets {
    pub fn new(data: DerivationData) -> Self {
        Self { data, k: None, t: None }
    }

    pub fn k(&self) -> Mat {
        self.k.clone().unwrap_or_else(|| jacobi_k(&self.data))
    }

    pub fn t(&self) -> Mat {
        let n = self.data.n();
        self.t.clone().unwrap_or_else(|| Mat::zeros(n, n))
    }

    /// The bracket table in the raw basis; `𝔨` is spanned by `c0`.
    pub fn table(&self) -> BracketTable {
        BracketTable {
            lambda: self.data.lambda,
            omega: self.data.omega.clone(),
            l: self.data.l.clone(),
            t: self.t(),
            k: self.k(),
            rotations: orthonormal_span(std::slice::from_ref(&self.data.c0)),
            dilation: false,
        }
    }
}

fn jacobi_k(data: &DerivationData) -> Mat {
    let n = data.n();
    Mat::identity(n, n) * data.lambda - &data.omega - data.l.transpose()
}

/// A named residual and the bound it was checked against.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
}

impl Residual {
    pub fn passed(&self) -> bool {
        self.value <= self.tolerance
    }
}

/// Output of `normalize_frame`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedFrame {
    /// `λ` after rescaling; 0 or 1.
    pub lambda: f64,
    /// Factor `s` of the rescaling `p -> s p`, `q -> q / s` (1 when `λ = 0`).
    pub scale: f64,
    pub f: Mat,
    pub b: Mat,
    /// The endomorphism in `E' = {X + p∧φX}` (after rescaling).
    pub phi: Mat,
    pub residuals: Vec<Residual>,
}

impl NormalizedFrame {
    pub fn kind(&self) -> WaveKind {
        if self.lambda == 0.0 {
            WaveKind::A
        } else {
            WaveKind::B
        }
    }

    pub fn spec(&self) -> Result<PlaneWaveSpec> {
        PlaneWaveSpec::new(self.kind(), self.f.clone(), self.b.clone())
    }

    /// Columns: the normalized basis `(q, 𝔨, p∧E, p, E)` in coordinates of the raw table.
    pub fn basis_change(&self, raw: &BracketTable) -> Mat {
        let n = raw.n();
        let d = raw.dim();
        let s = self.scale;
        let mut m = Mat::zeros(d, d);
        m[(raw.q_index(), raw.q_index())] = 1.0 / s;
        for i in 0..raw.rotations.len() {
            m[(raw.k_index(i), raw.k_index(i))] = 1.0;
        }
        for i in 0..n {
            m[(raw.pwedge_index(i), raw.pwedge_index(i))] = s;
            m[(raw.e_index(i), raw.e_index(i))] = 1.0;
            for j in 0..n {
                m[(raw.pwedge_index(j), raw.e_index(i))] = s * self.phi[(j, i)];
            }
        }
        m[(raw.p_index(), raw.p_index())] = s;
        m
    }
}

/// Bring raw brackets to the canonical plane-wave table by `p -> λp, q -> q/λ`
/// (when `λ ≠ 0`) and `E' = {X + p∧φX}` with `φ = ω/2 + L^s`.
pub fn normalize_frame(raw: &RawBrackets) -> Result<NormalizedFrame> {
    let d = &raw.data;
    let n = d.n();
    let k = raw.k();
    let t = raw.t();
    check_shape(&k, n, "K")?;
    check_shape(&t, n, "T")?;
    let scale = d.scale() + k.norm() + t.norm();
    let tol = CONSTRAINT_TOL * scale * scale;
    let mut residuals = Vec::new();
    let mut require = |name: &'static str, value: f64| -> Result<()> {
        residuals.push(Residual { name, value, tolerance: tol });
        if value > tol {
            Err(Error::Constraint { name, residual: value })
        } else {
            Ok(())
        }
    };
    require("jacobi_K", (&k - jacobi_k(d)).norm())?;
    let om = &d.omega;
    require(
        "jacobi_omegaL",
        (d.l.transpose() * om + om * &d.l - om * d.lambda - (&t - t.transpose())).norm(),
    )?;
    require("c0_L", commutator(&d.c0, &d.l).norm())?;
    require("c0_omega", commutator(&d.c0, om).norm())?;
    require("c0_T", commutator(&d.c0, &t).norm())?;
    require("c0_K", commutator(&d.c0, &k).norm())?;

    let (lambda, s) = if d.lambda == 0.0 { (0.0, 1.0) } else { (1.0, d.lambda) };
    let om = om / s;
    let l = &d.l / s;
    let t = t / (s * s);
    let k = k / s;

    let phi = &om * 0.5 + sym_part(&l);
    let f = &l - &phi;
    let b_raw = &t + &k * &phi - &phi * &f;
    let id = Mat::identity(n, n);
    require("omega_after", (&om - skew_part(&phi) * 2.0).norm())?;
    require("L_skew_after", (&f + f.transpose()).norm())?;
    require("K_after", (&k + &phi - (&id * lambda + &f)).norm())?;
    require("B_symmetry", (&b_raw - b_raw.transpose()).norm())?;
    Ok(NormalizedFrame { lambda, scale: s, f, b: sym_part(&b_raw), phi, residuals })
}

/// Images `Λ(p), Λ(e_1)..Λ(e_n), Λ(q)` of the Nomizu map as matrices on V.
#[derive(Debug, Clone, PartialEq)]
pub struct NomizuMap {
    pub images: Vec<Mat>,
    pub lambda: f64,
    pub omega: Mat,
    pub l: Mat,
}

impl NomizuMap {
    pub fn frame(&self) -> MinkowskiFrame {
        MinkowskiFrame::new(self.l.nrows())
    }

    /// `Λ(x)` for `x ∈ V`, linear extension of the basis images.
    pub fn apply(&self, x: &Vector) -> Mat {
        self.images
            .iter()
            .zip(x.iter())
            .fold(Mat::zeros(x.len(), x.len()), |acc, (m, c)| acc + m * *c)
    }
}

fn embed_endomorphism(a: &Mat) -> Mat {
    let n = a.nrows();
    let mut m = Mat::zeros(n + 2, n + 2);
    m.view_mut((1, 1), (n, n)).copy_from(a);
    m
}

/// Levi-Civita connection of the left-invariant metric `2 dp dq + |dx|^2` on
/// the group of a derivation: `Λ(p) = 0`, `Λ(X) = -½ p∧(ω + L + L^T)X`,
/// `Λ(q) = -λ p∧q + ½(-ω + L - L^T)`.
pub fn nomizu(lambda: f64, omega: &Mat, l: &Mat) -> Result<NomizuMap> {
    let n = l.nrows();
    check_shape(l, n, "L")?;
    check_shape(omega, n, "omega")?;
    let frame = MinkowskiFrame::new(n);
    let p = frame.p();
    let sym = omega + l + l.transpose();
    let mut images = vec![Mat::zeros(n + 2, n + 2)];
    for i in 0..n {
        let y = frame.embed(&(sym.column(i) * -0.5));
        images.push(bivector_matrix(&p, &y, &frame)?);
    }
    let rot = (l - l.transpose() - omega) * 0.5;
    images.push(bivector_matrix(&p, &frame.q(), &frame)? * -lambda + embed_endomorphism(&rot));
    Ok(NomizuMap { images, lambda, omega: omega.clone(), l: l.clone() })
}

/// Curvature `R(x_a, x_b)` for basis pairs `a < b` of V.
#[derive(Debug, Clone, PartialEq)]
pub struct NomizuCurvature {
    pub pairs: Vec<((usize, usize), Mat)>,
    /// Largest distance of a value from `span(p∧e_i)`.
    pub outside_pwedge: f64,
}

impl NomizuCurvature {
    pub fn get(&self, a: usize, b: usize) -> Option<&Mat> {
        self.pairs.iter().find(|(k, _)| *k == (a, b)).map(|(_, m)| m)
    }

    /// `Y` with `R(e_i, q) = p∧Y`, for each `i`, as the columns of a matrix on E.
    pub fn e_q_profile(&self, n: usize) -> Mat {
        let mut out = Mat::zeros(n, n);
        for i in 0..n {
            let r = self.get(1 + i, n + 1).expect("pair present");
            // (p∧Y)q = Y
            out.set_column(i, &r.column(n + 1).rows(1, n));
        }
        out
    }
}

/// `R(X, Y) = [Λ(X), Λ(Y)] - Λ([X, Y]_V) - (p∧T-part of [X, Y])`, with the
/// V-bracket of the derivation and `[q, X]` having isotropy component `p∧TX`.
pub fn nomizu_curvature(map: &NomizuMap, t: Option<&Mat>) -> Result<NomizuCurvature> {
    let frame = map.frame();
    let n = frame.n();
    let t = t.cloned().unwrap_or_else(|| Mat::zeros(n, n));
    check_shape(&t, n, "T")?;
    let dim = frame.dim();
    let p = frame.p();
    // V-bracket of basis vectors (p, e.., q) and its isotropy part.
    let bracket = |a: usize, b: usize| -> (Vector, Option<Vector>) {
        let q = frame.q_index();
        let mut v = Vector::zeros(dim);
        let mut iso = None;
        if a == q || b == q {
            let (sign, other) = if a == q { (1.0, b) } else { (-1.0, a) };
            if other == frame.p_index() {
                v[0] = sign * map.lambda;
            } else if other != q {
                let i = other - 1;
                for j in 0..n {
                    v[1 + j] = sign * map.l[(j, i)];
                }
                iso = Some(frame.embed(&(t.column(i) * sign)));
            }
        } else if a >= 1 && b >= 1 && a <= n && b <= n {
            v[0] = map.omega[(b - 1, a - 1)];
        }
        (v, iso)
    };
    let mut pairs = Vec::new();
    let mut outside: f64 = 0.0;
    for a in 0..dim {
        for b in a + 1..dim {
            let la = &map.images[a];
            let lb = &map.images[b];
            let (v, iso) = bracket(a, b);
            let mut r = commutator(la, lb) - map.apply(&v);
            if let Some(y) = iso {
                r -= bivector_matrix(&p, &y, &frame)?;
            }
            let y = r.column(frame.q_index()).into_owned();
            let mut y_e = Vector::zeros(dim);
            y_e.rows_mut(1, n).copy_from(&y.rows(1, n));
            let proj = bivector_matrix(&p, &y_e, &frame)?;
            outside = outside.max((&r - proj).norm());
            pairs.push(((a, b), r));
        }
    }
    Ok(NomizuCurvature { pairs, outside_pwedge: outside })
}

/// Solutions `φ: V -> span(g0)` of `φ(X)Y = φ(Y)X`.
#[derive(Debug, Clone, PartialEq)]
pub struct Prolongation {
    pub dimension: usize,
    /// Each solution as the list `φ(x_1), .., φ(x_d)` over the standard basis of V.
    pub basis: Vec<Vec<Mat>>,
}

/// First prolongation of a subalgebra of co(V) spanned by `g0`.
pub fn first_prolongation(g0: &[Mat]) -> Result<Prolongation> {
    let Some(first) = g0.first() else {
        return Ok(Prolongation { dimension: 0, basis: Vec::new() });
    };
    let d = first.nrows();
    for g in g0 {
        check_shape(g, d, "generator")?;
        split_co(g, 1e-10)?;
    }
    let gens = orthonormal_span(g0);
    let m = gens.len();
    let unknowns = d * m;
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|a| (a + 1..d).map(move |b| (a, b))).collect();
    let rows = (pairs.len() * d).max(unknowns);
    let mut sys = Mat::zeros(rows, unknowns);
    // unknown (a, k) at column a * m + k: coefficient of gens[k] in φ(x_a)
    for (pi, &(a, b)) in pairs.iter().enumerate() {
        for (k, g) in gens.iter().enumerate() {
            for r in 0..d {
                sys[(pi * d + r, a * m + k)] += g[(r, b)];
                sys[(pi * d + r, b * m + k)] -= g[(r, a)];
            }
        }
    }
    let ker = null_space(&sys, NULL_SPACE_TOL);
    let basis = (0..ker.ncols())
        .map(|c| {
            (0..d)
                .map(|a| {
                    (0..m).fold(Mat::zeros(d, d), |acc, k| acc + &gens[k] * ker[(a * m + k, c)])
                })
                .collect()
        })
        .collect();
    Ok(Prolongation { dimension: ker.ncols(), basis })
}

/// Basis of co(V) = so(V) ⊕ R id for `dim V = d`.
pub fn co_basis(d: usize) -> Vec<Mat> {
    let mut out = so_basis(d);
    out.push(Mat::identity(d, d));
    out
}

/// Basis of so(V) by the bivectors of the Witt basis.
pub fn so_basis(d: usize) -> Vec<Mat> {
    let frame = MinkowskiFrame::new(d - 2);
    let mut out = Vec::new();
    for a in 0..d {
        for b in a + 1..d {
            out.push(bivector_matrix(&frame.basis(a), &frame.basis(b), &frame).expect("dims"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: WaveKind, f: Mat, b: Mat) -> PlaneWaveSpec {
        PlaneWaveSpec::new(kind, f, b).unwrap()
    }

    fn diag(v: &[f64]) -> Mat {
        Mat::from_diagonal(&Vector::from_row_slice(v))
    }

    #[test]
    fn centralizer_examples() {
        assert_eq!(centralizer_k(&Mat::identity(2, 2), &Mat::zeros(2, 2)).unwrap().len(), 1);
        assert_eq!(centralizer_k(&diag(&[1., 2.]), &Mat::zeros(2, 2)).unwrap().len(), 0);
        let so3 = centralizer_k(&Mat::identity(3, 3), &Mat::zeros(3, 3)).unwrap();
        assert_eq!(so3.len(), 3);
        for (i, a) in so3.iter().enumerate() {
            for (j, b) in so3.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((a.dot(b) - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn isom_examples() {
        let alg = build_isom(&spec(WaveKind::A, Mat::zeros(2, 2), diag(&[1., 2.]))).unwrap();
        assert_eq!(alg.dim(), 6);
        assert!(alg.jacobi_residual() < 1e-12);

        let flat = build_isom(&spec(WaveKind::A, Mat::zeros(1, 1), Mat::zeros(1, 1))).unwrap();
        let q = flat.index_of("q").unwrap();
        let e1 = flat.index_of("e_1").unwrap();
        let pw = flat.index_of("pwedge_e1").unwrap();
        assert_eq!(flat.bracket_basis(q, e1).norm(), 0.0);
        let mut minus_e1 = Vector::zeros(flat.dim());
        minus_e1[e1] = -1.0;
        assert_eq!(flat.bracket_basis(q, pw), minus_e1);

        let b = build_isom(&spec(WaveKind::B, Mat::zeros(1, 1), diag(&[0.3]))).unwrap();
        let p = b.index_of("p").unwrap();
        let mut pv = Vector::zeros(b.dim());
        pv[p] = 1.0;
        assert_eq!(b.bracket_basis(b.index_of("q").unwrap(), p), pv);
    }

    #[test]
    fn conf_examples() {
        let s = spec(WaveKind::A, Mat::zeros(2, 2), diag(&[1., 2.]));
        let isom = build_isom(&s).unwrap();
        let conf = build_conf(&s).unwrap();
        assert_eq!(conf.dim(), isom.dim() + 1);
        assert!(conf.jacobi_residual() < 1e-12);
        let dd = conf.index_of("D").unwrap();
        let p = conf.index_of("p").unwrap();
        assert_eq!(conf.structure_constant(dd, p, p), 2.0);
        assert_eq!(conf.bracket_basis(dd, conf.index_of("q").unwrap()).norm(), 0.0);
        let flat = spec(WaveKind::A, Mat::zeros(2, 2), Mat::identity(2, 2));
        assert!(matches!(build_conf(&flat), Err(Error::ConformallyFlat)));
    }

    #[test]
    fn heisenberg_and_abelian_jacobi() {
        let abelian =
            LieAlgebraData::from_bracket(vec!["a".into(), "b".into()], |_, _| Ok(Vector::zeros(2)))
                .unwrap();
        assert_eq!(abelian.jacobi_residual(), 0.0);
        // p∧e1, p∧e2, p, e1, e2
        let labels = ["pwedge_e1", "pwedge_e2", "p", "e_1", "e_2"].map(String::from).to_vec();
        let heis = LieAlgebraData::from_bracket(labels, |i, j| {
            let mut v = Vector::zeros(5);
            if i < 2 && j == 3 + i {
                v[2] = -1.0;
            }
            Ok(v)
        })
        .unwrap();
        assert_eq!(heis.jacobi_residual(), 0.0);
        assert_eq!(heis.structure_constant(3, 0, 2), 1.0);
    }

    #[test]
    fn normalize_examples() {
        let one = DerivationData::new(0.0, Mat::zeros(1, 1), diag(&[1.]), None).unwrap();
        let out = normalize_frame(&RawBrackets::new(one)).unwrap();
        assert!(out.f.norm() < 1e-15);
        assert!((out.b[(0, 0)] + 1.0).abs() < 1e-15);

        let l = Mat::from_row_slice(2, 2, &[0., 1., -1., 0.]);
        let skew = DerivationData::new(0.0, Mat::zeros(2, 2), l.clone(), None).unwrap();
        let out = normalize_frame(&RawBrackets::new(skew)).unwrap();
        assert!((&out.f - &l).norm() < 1e-15);
        assert!(out.b.norm() < 1e-15);

        let w = Mat::from_row_slice(2, 2, &[0., 1., -1., 0.]);
        let sympl = DerivationData::new(0.0, w.clone(), Mat::zeros(2, 2), None).unwrap();
        let out = normalize_frame(&RawBrackets::new(sympl)).unwrap();
        assert!((&out.f + &w * 0.5).norm() < 1e-15);
        assert!((&out.b - Mat::identity(2, 2) * 0.25).norm() < 1e-15);
    }

    #[test]
    fn normalize_reports_failed_component() {
        let w = Mat::from_row_slice(2, 2, &[0., 1., -1., 0.]);
        let bad = DerivationData::new(1.0, w, Mat::zeros(2, 2), None).unwrap();
        match normalize_frame(&RawBrackets::new(bad)) {
            Err(Error::Constraint { name, .. }) => assert_eq!(name, "jacobi_omegaL"),
            other => panic!("{other:?}"),
        }
        let d = DerivationData::new(0.0, Mat::zeros(1, 1), diag(&[1.]), None).unwrap();
        let raw = RawBrackets { data: d, k: Some(diag(&[5.])), t: None };
        assert!(matches!(
            normalize_frame(&raw),
            Err(Error::Constraint { name: "jacobi_K", .. })
        ));
    }

    #[test]
    fn normalize_rescales_lambda() {
        let d = DerivationData::new(2.0, Mat::zeros(1, 1), diag(&[3.]), None).unwrap();
        let out = normalize_frame(&RawBrackets::new(d)).unwrap();
        assert_eq!(out.lambda, 1.0);
        assert_eq!(out.scale, 2.0);
        // L/λ = 3/2: B = 3/2 - 9/4
        assert!((out.b[(0, 0)] + 0.75).abs() < 1e-15);
    }

    #[test]
    fn nomizu_examples() {
        let zero = nomizu(0.0, &Mat::zeros(2, 2), &Mat::zeros(2, 2)).unwrap();
        assert!(zero.images.iter().all(|m| m.norm() == 0.0));
        let curv = nomizu_curvature(&zero, None).unwrap();
        assert!(curv.pairs.iter().all(|(_, m)| m.norm() == 0.0));

        let l = diag(&[1., 3.]);
        let map = nomizu(0.0, &Mat::zeros(2, 2), &l).unwrap();
        let f = map.frame();
        let expected = bivector_matrix(&f.p(), &(f.e(1) * 3.0), &f).unwrap() * -1.0;
        assert!((&map.images[2] - expected).norm() < 1e-15);
        assert!(map.images[3].norm() < 1e-15);

        let lam = nomizu(1.0, &Mat::zeros(1, 1), &Mat::zeros(1, 1)).unwrap();
        let f = lam.frame();
        let pq = bivector_matrix(&f.p(), &f.q(), &f).unwrap();
        assert!((&lam.images[2] + pq).norm() < 1e-15);
    }

    #[test]
    fn nomizu_is_torsion_free() {
        let w = Mat::from_row_slice(2, 2, &[0., 0.4, -0.4, 0.]);
        let l = Mat::from_row_slice(2, 2, &[0.5, 0.3, -0.2, 0.5]);
        let map = nomizu(1.0, &w, &l).unwrap();
        let f = map.frame();
        // Λ(x)y - Λ(y)x = [x, y]
        let qe = &map.images[3] * f.e(0) - &map.images[1] * f.q();
        let expected = f.embed(&l.column(0).into_owned());
        assert!((qe - expected).norm() < 1e-15);
        let qp = &map.images[3] * f.p() - &map.images[0] * f.q();
        assert!((qp - f.p()).norm() < 1e-15);
        let ee = &map.images[1] * f.e(1) - &map.images[2] * f.e(0);
        assert!((ee - f.p() * w[(1, 0)]).norm() < 1e-15);
    }

    #[test]
    fn nomizu_curvature_matches_normalized_spec() {
        let d = DerivationData::new(0.0, Mat::zeros(1, 1), diag(&[1.]), None).unwrap();
        let spec = normalize_frame(&RawBrackets::new(d.clone())).unwrap().spec().unwrap();
        let curv = nomizu_curvature(&nomizu(d.lambda, &d.omega, &d.l).unwrap(), None).unwrap();
        assert!(curv.outside_pwedge < 1e-12);
        let profile = crate::planewave::curvature_closed(&spec, 0.0).unwrap().profile;
        assert!((curv.e_q_profile(1) - profile).norm() < 1e-12);
    }

    #[test]
    fn prolongation_examples() {
        for d in 3..=5 {
            assert_eq!(first_prolongation(&co_basis(d)).unwrap().dimension, d);
        }
        assert_eq!(first_prolongation(&so_basis(4)).unwrap().dimension, 0);
        assert_eq!(first_prolongation(&[Mat::identity(3, 3)]).unwrap().dimension, 0);
        let mut not_co = Mat::zeros(3, 3);
        not_co[(0, 0)] = 1.0;
        assert!(first_prolongation(&[not_co]).is_err());
    }

    #[test]
    fn prolongation_solutions_are_symmetric() {
        let sol = first_prolongation(&co_basis(4)).unwrap();
        for phi in &sol.basis {
            for a in 0..4 {
                for b in 0..4 {
                    let lhs = &phi[a] * Vector::from_fn(4, |i, _| if i == b { 1.0 } else { 0.0 });
                    let rhs = &phi[b] * Vector::from_fn(4, |i, _| if i == a { 1.0 } else { 0.0 });
                    assert!((lhs - rhs).norm() < 1e-12);
                }
            }
        }
    }
}
