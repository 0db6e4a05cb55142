//! Dense linear algebra on the Minkowski space V = span(p, e_1..e_n, q).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Metric frame of V = R^{1,n+1} in a Witt basis ordered (p, e_1..e_n, q).
///
/// `(p,q) = 1`, `(p,p) = (q,q) = 0`, the `e_i` are orthonormal and orthogonal to `p`, `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MinkowskiFrame {
    n: usize,
}

impl MinkowskiFrame {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    /// Build the frame for a square matrix acting on V.
    pub fn for_matrix(m: &Mat) -> Result<Self> {
        check_square(m, "matrix")?;
        if m.nrows() < 2 {
            return Err(Error::DimensionMismatch {
                what: "so(V) element",
                expected: 2,
                found: m.nrows(),
            });
        }
        Ok(Self::new(m.nrows() - 2))
    }

    /// Dimension of the Euclidean part E.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Dimension of V.
    pub fn dim(&self) -> usize {
        self.n + 2
    }

    pub fn p_index(&self) -> usize {
        0
    }

    pub fn e_index(&self, i: usize) -> usize {
        1 + i
    }

    pub fn q_index(&self) -> usize {
        self.n + 1
    }

    pub fn gram(&self) -> Mat {
        let d = self.dim();
        let mut g = Mat::zeros(d, d);
        g[(0, d - 1)] = 1.0;
        g[(d - 1, 0)] = 1.0;
        for i in 1..d - 1 {
            g[(i, i)] = 1.0;
        }
        g
    }

    pub fn basis(&self, index: usize) -> Vector {
        let mut v = Vector::zeros(self.dim());
        v[index] = 1.0;
        v
    }

    pub fn p(&self) -> Vector {
        self.basis(self.p_index())
    }

    pub fn q(&self) -> Vector {
        self.basis(self.q_index())
    }

    pub fn e(&self, i: usize) -> Vector {
        self.basis(self.e_index(i))
    }

    /// Embed a vector of E into V.
    pub fn embed(&self, x: &Vector) -> Vector {
        let mut v = Vector::zeros(self.dim());
        v.rows_mut(1, self.n).copy_from(x);
        v
    }

    pub fn inner(&self, x: &Vector, y: &Vector) -> f64 {
        let d = self.dim();
        let mut s = x[0] * y[d - 1] + x[d - 1] * y[0];
        for i in 1..d - 1 {
            s += x[i] * y[i];
        }
        s
    }

    /// Apply the gram matrix, i.e. lower an index.
    pub fn lower(&self, x: &Vector) -> Vector {
        let d = self.dim();
        let mut y = x.clone();
        y[0] = x[d - 1];
        y[d - 1] = x[0];
        y
    }

    /// `||G M + M^T G||_F`, zero exactly when `M` is in so(V).
    pub fn so_residual(&self, m: &Mat) -> f64 {
        let g = self.gram();
        (&g * m + m.transpose() * &g).norm()
    }

    /// Coordinates labels in basis order.
    pub fn labels(&self) -> Vec<String> {
        let mut out = vec!["p".to_string()];
        out.extend((1..=self.n).map(|i| format!("e_{i}")));
        out.push("q".into());
        out
    }
}

/// Matrix of the bivector `x ∧ y`, acting by `(x∧y)z = (x,z)y - (y,z)x`.
pub fn bivector_matrix(x: &Vector, y: &Vector, frame: &MinkowskiFrame) -> Result<Mat> {
    for v in [x, y] {
        if v.len() != frame.dim() {
            return Err(Error::DimensionMismatch {
                what: "bivector factor",
                expected: frame.dim(),
                found: v.len(),
            });
        }
    }
    let gx = frame.lower(x);
    let gy = frame.lower(y);
    Ok(y * gx.transpose() - x * gy.transpose())
}

pub fn check_square(m: &Mat, what: &'static str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            what,
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    Ok(())
}

pub fn check_shape(m: &Mat, n: usize, what: &'static str) -> Result<()> {
    if m.nrows() != n {
        return Err(Error::DimensionMismatch {
            what,
            expected: n,
            found: m.nrows(),
        });
    }
    if m.ncols() != n {
        return Err(Error::DimensionMismatch {
            what,
            expected: n,
            found: m.ncols(),
        });
    }
    Ok(())
}

pub fn check_finite(m: &Mat, what: &'static str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Rejects `m` unless `||m - m^T|| <= tol * max(1, ||m||)`.
pub fn check_symmetric(m: &Mat, tol: f64, what: &'static str) -> Result<()> {
    check_square(m, what)?;
    check_finite(m, what)?;
    let residual = (m - m.transpose()).norm();
    if residual > tol * m.norm().max(1.0) {
        return Err(Error::NotSymmetric { what, residual });
    }
    Ok(())
}

pub fn check_skew(m: &Mat, tol: f64, what: &'static str) -> Result<()> {
    check_square(m, what)?;
    check_finite(m, what)?;
    let residual = (m + m.transpose()).norm();
    if residual > tol * m.norm().max(1.0) {
        return Err(Error::NotSkew { what, residual });
    }
    Ok(())
}

pub fn sym_part(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

pub fn skew_part(m: &Mat) -> Mat {
    (m - m.transpose()) * 0.5
}

pub fn commutator(a: &Mat, b: &Mat) -> Mat {
    a * b - b * a
}

fn norm1(m: &Mat) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

const TAYLOR_ORDER: usize = 18;

/// Matrix exponential by scaling and squaring with a fixed-order Taylor polynomial.
pub fn expm(m: &Mat) -> Result<Mat> {
    check_square(m, "expm argument")?;
    check_finite(m, "expm argument")?;
    let d = m.nrows();
    let nrm = norm1(m);
    let squarings = if nrm > 0.5 {
        (nrm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    if squarings > 1100 {
        return Err(Error::Overflow("expm"));
    }
    let a = m * 0.5f64.powi(squarings);
    let id = Mat::identity(d, d);
    let mut x = id.clone();
    for k in (1..=TAYLOR_ORDER).rev() {
        x = &id + (&a * x) / k as f64;
    }
    for _ in 0..squarings {
        x = &x * &x;
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::Overflow("expm"));
        }
    }
    Ok(x)
}

/// Eigen-decomposition of a real symmetric matrix; eigenvalues ascending,
/// eigenvectors in the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct SymEig {
    pub values: Vec<f64>,
    pub vectors: Mat,
}

impl SymEig {
    pub fn reconstruct(&self) -> Mat {
        let d = Mat::from_diagonal(&Vector::from_vec(self.values.clone()));
        &self.vectors * d * self.vectors.transpose()
    }
}

/// Cyclic Jacobi eigensolver.
pub fn sym_eig(s: &Mat, tol: f64) -> Result<SymEig> {
    check_symmetric(s, tol, "symmetric eigenproblem")?;
    let n = s.nrows();
    let mut a = sym_part(s);
    let mut v = Mat::identity(n, n);
    let scale = a.norm();
    let target = 1e-14 * scale;
    let off = |a: &Mat| {
        let mut t = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    t += a[(i, j)] * a[(i, j)];
                }
            }
        }
        t.sqrt()
    };
    let mut sweeps = 0;
    while off(&a) > target {
        sweeps += 1;
        if sweeps > 100 {
            return Err(Error::NoConvergence("Jacobi eigensolver"));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = Mat::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SymEig { values, vectors })
}

/// Right singular vectors for singular values at most `rel_tol * sigma_max`,
/// as orthonormal columns. A zero matrix has the whole space as null space.
pub fn null_space(a: &Mat, rel_tol: f64) -> Mat {
    null_space_scaled(a, rel_tol, None)
}

/// Like [`null_space`], with singular values compared against
/// `rel_tol * scale` instead of the largest one.
pub fn null_space_scaled(a: &Mat, rel_tol: f64, scale: Option<f64>) -> Mat {
    let cols = a.ncols();
    if cols == 0 {
        return Mat::zeros(0, 0);
    }
    let rows = a.nrows().max(cols);
    let mut padded = Mat::zeros(rows, cols);
    padded.rows_mut(0, a.nrows()).copy_from(a);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let smax = scale.unwrap_or_else(|| svd.singular_values.iter().cloned().fold(0.0, f64::max));
    let keep: Vec<usize> = (0..cols)
        .filter(|&i| svd.singular_values[i] <= rel_tol * smax || smax == 0.0)
        .collect();
    Mat::from_fn(cols, keep.len(), |r, c| vt[(keep[c], r)])
}

/// Singular values in descending order.
pub fn singular_values(a: &Mat) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().cloned().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub fn rank(a: &Mat, rel_tol: f64) -> usize {
    let s = singular_values(a);
    let smax = s.first().cloned().unwrap_or(0.0);
    s.iter().filter(|&&x| x > rel_tol * smax && x > 0.0).count()
}

/// Minimum-norm least-squares solution of `a x = b`.
pub fn lstsq(a: &Mat, b: &Vector, rel_tol: f64) -> Result<Vector> {
    lstsq_scaled(a, b, rel_tol, None)
}

/// Like [`lstsq`], with the cutoff `rel_tol * scale` instead of relative to
/// the largest singular value.
pub fn lstsq_scaled(a: &Mat, b: &Vector, rel_tol: f64, scale: Option<f64>) -> Result<Vector> {
    if a.ncols() == 0 {
        return Ok(Vector::zeros(0));
    }
    let svd = a.clone().svd(true, true);
    let smax = scale.unwrap_or_else(|| svd.singular_values.iter().cloned().fold(0.0, f64::max));
    svd.solve(b, (rel_tol * smax).max(f64::MIN_POSITIVE))
        .map_err(|e| Error::Internal(e.to_string()))
}

/// Eigenvalues of a real square matrix via the real Schur form.
pub fn complex_eigenvalues(m: &Mat) -> Result<Vec<Complex64>> {
    check_square(m, "eigenvalue argument")?;
    check_finite(m, "eigenvalue argument")?;
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = |a: Mat| nalgebra::linalg::Schur::try_new(a, f64::EPSILON, 100_000);
    if let Some(s) = schur(m.clone()) {
        return Ok(s.complex_eigenvalues().iter().cloned().collect());
    }
    // The deflation test is relative to the diagonal, so nilpotent input can
    // stall; a shift by the norm moves the spectrum away from zero.
    let shift = m.norm().max(1.0);
    let d = m.nrows();
    let s = schur(m + Mat::identity(d, d) * shift)
        .ok_or(Error::NoConvergence("Schur decomposition"))?;
    Ok(s.complex_eigenvalues().iter().map(|z| z - shift).collect())
}

/// Additive Jordan–Chevalley decomposition `M = S + N`.
#[derive(Debug, Clone)]
pub struct JordanChevalley {
    pub semisimple: Mat,
    pub nilpotent: Mat,
    /// Mean of each eigenvalue cluster.
    pub clusters: Vec<Complex64>,
    /// `||[S, N]|| / ||M||^2`.
    pub commutator_residual: f64,
    /// `||N^d|| / ||M||^d`.
    pub nilpotency_residual: f64,
}

/// Clusters closer than `sqrt(tol)` (relative) but farther than `tol` are
/// reported as ambiguous instead of guessed.
pub fn jordan_chevalley(m: &Mat, tol: f64) -> Result<JordanChevalley> {
    check_square(m, "Jordan-Chevalley argument")?;
    check_finite(m, "Jordan-Chevalley argument")?;
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} not in (0,1)")));
    }
    let d = m.nrows();
    let scale = m.norm();
    if d == 0 || scale == 0.0 {
        return Ok(JordanChevalley {
            semisimple: m.clone(),
            nilpotent: Mat::zeros(d, d),
            clusters: if d == 0 { vec![] } else { vec![Complex64::new(0.0, 0.0)] },
            commutator_residual: 0.0,
            nilpotency_residual: 0.0,
        });
    }
    let eig = complex_eigenvalues(m)?;
    let clusters = cluster_eigenvalues(&eig, tol * scale);
    let means: Vec<Complex64> = clusters
        .iter()
        .map(|c| c.iter().map(|&i| eig[i]).sum::<Complex64>() / c.len() as f64)
        .collect();
    let mut gap = f64::INFINITY;
    for (a, ca) in clusters.iter().enumerate() {
        for cb in clusters.iter().skip(a + 1) {
            for &i in ca {
                for &j in cb {
                    gap = gap.min((eig[i] - eig[j]).norm());
                }
            }
        }
    }
    if gap <= tol.sqrt() * scale {
        return Err(Error::Ambiguous {
            detail: format!("eigenvalue clusters separated by {gap:.3e}"),
            tol,
        });
    }

    // P(x) = prod (x - mu_c); highest degree first.
    let mut poly = vec![Complex64::new(1.0, 0.0)];
    for mu in &means {
        let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
        for (k, c) in poly.iter().enumerate() {
            next[k] += c;
            next[k + 1] -= c * mu;
        }
        poly = next;
    }
    let deg = poly.len() - 1;
    let mut real = Vec::with_capacity(poly.len());
    for (k, c) in poly.iter().enumerate() {
        let mag = scale.powi(k as i32).max(1.0);
        if c.im.abs() > 1e-8 * mag {
            return Err(Error::Ambiguous {
                detail: "eigenvalue clusters are not closed under conjugation".into(),
                tol,
            });
        }
        real.push(c.re);
    }
    let dpoly: Vec<f64> = real[..deg]
        .iter()
        .enumerate()
        .map(|(k, c)| c * (deg - k) as f64)
        .collect();
    let eval = |coef: &[f64], x: &Mat| {
        let mut acc = Mat::zeros(d, d);
        for c in coef {
            acc = &acc * x + Mat::identity(d, d) * *c;
        }
        acc
    };

    let mut s = m.clone();
    for _ in 0..200 {
        let ps = eval(&real, &s);
        let dps = eval(&dpoly, &s);
        let lu = dps.lu();
        let step = lu
            .solve(&ps)
            .ok_or_else(|| Error::Ambiguous { detail: "singular P'(S)".into(), tol })?;
        s -= &step;
        if step.norm() <= 4.0 * f64::EPSILON * scale {
            break;
        }
    }
    let nil = m - &s;
    let commutator_residual = commutator(&s, &nil).norm() / (scale * scale);
    let mut power = Mat::identity(d, d);
    for _ in 0..d {
        power = &power * &nil;
    }
    let nilpotency_residual = power.norm() / scale.powi(d as i32);
    if !(commutator_residual <= 1e-8 && nilpotency_residual <= 1e-6) {
        return Err(Error::Ambiguous {
            detail: format!(
                "decomposition did not converge (commutator {commutator_residual:.3e}, nilpotency {nilpotency_residual:.3e})"
            ),
            tol,
        });
    }
    Ok(JordanChevalley {
        semisimple: s,
        nilpotent: nil,
        clusters: means,
        commutator_residual,
        nilpotency_residual,
    })
}

/// Single-linkage clustering at absolute distance `radius`.
pub fn cluster_eigenvalues(eig: &[Complex64], radius: f64) -> Vec<Vec<usize>> {
    let n = eig.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (eig[i] - eig[j]).norm() <= radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_of[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups
}

/// Greedy Gram–Schmidt: picks the largest remaining candidate each step.
/// `inner` must be positive definite on the span of `candidates`.
pub(crate) fn gram_schmidt<F>(candidates: &[Vector], count: usize, inner: F) -> Result<Vec<Vector>>
where
    F: Fn(&Vector, &Vector) -> f64,
{
    let mut out: Vec<Vector> = Vec::with_capacity(count);
    let mut pool: Vec<Vector> = candidates.to_vec();
    while out.len() < count {
        let mut best: Option<(usize, f64)> = None;
        for (i, c) in pool.iter().enumerate() {
            let nn = inner(c, c);
            if best.map_or(true, |(_, b)| nn > b) {
                best = Some((i, nn));
            }
        }
        let (i, nn) = best.ok_or_else(|| Error::Internal("basis completion ran out".into()))?;
        if nn <= 1e-20 {
            return Err(Error::Internal("basis completion degenerate".into()));
        }
        let v = pool.swap_remove(i) / nn.sqrt();
        for c in pool.iter_mut() {
            let k = inner(&v, c);
            *c -= &v * k;
        }
        for c in pool.iter_mut() {
            let k = inner(&v, c);
            *c -= &v * k;
        }
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: usize, data: &[f64]) -> Mat {
        Mat::from_row_slice(rows, data.len() / rows, data)
    }

    #[test]
    fn bivector_conventions() {
        let f = MinkowskiFrame::new(1);
        let pq = bivector_matrix(&f.p(), &f.q(), &f).unwrap();
        assert_eq!(pq, m(3, &[-1., 0., 0., 0., 0., 0., 0., 0., 1.]));
        let pe = bivector_matrix(&f.p(), &f.e(0), &f).unwrap();
        assert_eq!(&pe * f.q(), f.e(0));
        assert_eq!(&pe * f.e(0), -f.p());
        assert_eq!(&pe * f.p(), Vector::zeros(3));
        assert_eq!(f.so_residual(&pq), 0.0);
        assert_eq!(f.so_residual(&pe), 0.0);
    }

    #[test]
    fn bivector_dimension_check() {
        let f = MinkowskiFrame::new(2);
        assert!(matches!(
            bivector_matrix(&Vector::zeros(3), &f.p(), &f),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn expm_examples() {
        let z = Mat::zeros(3, 3);
        assert_eq!(expm(&z).unwrap(), Mat::identity(3, 3));
        let r = expm(&m(2, &[0., -std::f64::consts::PI, std::f64::consts::PI, 0.])).unwrap();
        assert!((r + Mat::identity(2, 2)).norm() < 1e-13);
        let n = expm(&m(2, &[0., 1., 0., 0.])).unwrap();
        assert!((n - m(2, &[1., 1., 0., 1.])).norm() < 1e-15);
        assert!(matches!(expm(&m(1, &[1e6])), Err(Error::Overflow(_))));
    }

    #[test]
    fn sym_eig_examples() {
        let e = sym_eig(&m(2, &[2., 1., 1., 2.]), 1e-12).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
        assert!((e.reconstruct() - m(2, &[2., 1., 1., 2.])).norm() < 1e-14);
        assert!(matches!(
            sym_eig(&m(2, &[0., 1., 0., 0.]), 1e-12),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn jc_examples() {
        let j = jordan_chevalley(&m(2, &[1., 1., 0., 1.]), 1e-9).unwrap();
        assert!((j.semisimple - Mat::identity(2, 2)).norm() < 1e-14);
        assert!((j.nilpotent - m(2, &[0., 1., 0., 0.])).norm() < 1e-14);
        let d = m(2, &[1., 0., 0., 2.]);
        let j = jordan_chevalley(&d, 1e-9).unwrap();
        assert!((j.semisimple - d).norm() < 1e-14);
        assert!(j.nilpotent.norm() < 1e-14);
    }

    #[test]
    fn jc_rotation_with_shear() {
        // 4x4 with a complex pair repeated in a Jordan block.
        let mut a = Mat::zeros(4, 4);
        a[(0, 1)] = -1.0;
        a[(1, 0)] = 1.0;
        a[(2, 3)] = -1.0;
        a[(3, 2)] = 1.0;
        a[(0, 2)] = 1.0;
        a[(1, 3)] = 1.0;
        let j = jordan_chevalley(&a, 1e-9).unwrap();
        let mut s = Mat::zeros(4, 4);
        s[(0, 1)] = -1.0;
        s[(1, 0)] = 1.0;
        s[(2, 3)] = -1.0;
        s[(3, 2)] = 1.0;
        assert!((j.semisimple - s).norm() < 1e-10);
    }

    #[test]
    fn null_space_and_rank() {
        let a = m(1, &[1., 1., 0.]);
        let k = null_space(&a, 1e-12);
        assert_eq!(k.ncols(), 2);
        assert!((&a * &k).norm() < 1e-14);
        assert_eq!(rank(&a, 1e-12), 1);
        assert_eq!(null_space(&Mat::zeros(2, 2), 1e-12).ncols(), 2);
    }
}
