//! Decision procedures for Lie group structures on Cahen–Wallach spaces and
//! the plane wave induced by a derivation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{check_symmetric, commutator, skew_part, sym_eig, sym_part, Mat};
use crate::lie::{DerivationData, CONSTRAINT_TOL};
use crate::planewave::{PlaneWaveSpec, WaveKind, INPUT_TOL};

/// Relative width of eigenvalue clusters when counting multiplicities.
pub const MULTIPLICITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Yes,
    No,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Yes => "yes",
            Verdict::No => "no",
        }
    }
}

/// Answer of a Cahen–Wallach decision with its witness or certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionWitness {
    pub verdict: Verdict,
    pub a: Option<Mat>,
    pub c: Option<Mat>,
    pub certificate: Option<String>,
    /// `||B + A^2 + C^2||` (left-invariant) or `||B + C^2||` (bi-invariant).
    pub reconstruction_residual: Option<f64>,
    /// `||A C||`, left-invariant case only.
    pub orthogonality_residual: Option<f64>,
}

impl DecisionWitness {
    fn no(certificate: String) -> Self {
        Self {
            verdict: Verdict::No,
            a: None,
            c: None,
            certificate: Some(certificate),
            reconstruction_residual: None,
            orthogonality_residual: None,
        }
    }
}

/// Consecutive clusters of ascending eigenvalues: `(start, end)` index ranges.
fn clusters(values: &[f64], width: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > width {
            out.push((start, i));
            start = i;
        }
    }
    out
}

/// Does the Cahen–Wallach space with matrix `B` carry a left-invariant Lie
/// group structure? Yes iff `B = -A^2 - C^2` with `A` symmetric, `C` skew and
/// `AC = 0`, which holds iff every positive eigenvalue of `B` has even multiplicity.
pub fn cw_left_invariant(b: &Mat, tol: f64) -> Result<DecisionWitness> {
    check_symmetric(b, INPUT_TOL, "B")?;
    let n = b.nrows();
    let eig = sym_eig(b, INPUT_TOL)?;
    let scale = b.norm().max(1.0);
    let positive = tol * scale;
    let mut a = Mat::zeros(n, n);
    let mut c = Mat::zeros(n, n);
    let mut notes = Vec::new();
    for (start, end) in clusters(&eig.values, MULTIPLICITY_TOL * b.norm()) {
        let vals = &eig.values[start..end];
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        if vals.len() > 1 && vals[vals.len() - 1] > vals[0] {
            notes.push(format!(
                "eigenvalues {:.3e}..{:.3e} treated as equal",
                vals[0],
                vals[vals.len() - 1]
            ));
        }
        if mean <= positive {
            for i in start..end {
                let v = eig.vectors.column(i);
                a += v * v.transpose() * (-eig.values[i]).max(0.0).sqrt();
            }
            continue;
        }
        if (end - start) % 2 == 1 {
            let mut cert = format!(
                "positive eigenvalue {mean:.6e} has odd multiplicity {}",
                end - start
            );
            if !notes.is_empty() {
                cert.push_str("; ");
                cert.push_str(&notes.join("; "));
            }
            return Ok(DecisionWitness::no(cert));
        }
        let s = mean.sqrt();
        for i in (start..end).step_by(2) {
            let v1 = eig.vectors.column(i);
            let v2 = eig.vectors.column(i + 1);
            c += (v2 * v1.transpose() - v1 * v2.transpose()) * s;
        }
    }
    let recon = (b + &a * &a + &c * &c).norm();
    let orth = (&a * &c).norm();
    Ok(DecisionWitness {
        verdict: Verdict::Yes,
        a: Some(a),
        c: Some(c),
        certificate: (!notes.is_empty()).then(|| notes.join("; ")),
        reconstruction_residual: Some(recon),
        orthogonality_residual: Some(orth),
    })
}

/// Bi-invariant criterion: yes iff every eigenvalue of `B` is at most `tol`
/// (relative to `max(1, ||B||)`), with `C = sqrt(-B)` symmetric.
pub fn cw_bi_invariant(b: &Mat, tol: f64) -> Result<DecisionWitness> {
    check_symmetric(b, INPUT_TOL, "B")?;
    let eig = sym_eig(b, INPUT_TOL)?;
    let n = b.nrows();
    let top = eig.values.last().cloned().unwrap_or(0.0);
    if top > tol * b.norm().max(1.0) {
        return Ok(DecisionWitness::no(format!("eigenvalue {top:.6e} is positive")));
    }
    let mut c = Mat::zeros(n, n);
    for (i, &mu) in eig.values.iter().enumerate() {
        let v = eig.vectors.column(i);
        c += v * v.transpose() * (-mu).max(0.0).sqrt();
    }
    let recon = (b + &c * &c).norm();
    Ok(DecisionWitness {
        verdict: Verdict::Yes,
        a: None,
        c: Some(c),
        certificate: None,
        reconstruction_residual: Some(recon),
        orthogonality_residual: None,
    })
}

/// Plane wave induced by a derivation, with the `λ` normalization recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedPlaneWave {
    pub spec: PlaneWaveSpec,
    /// `λ` after rescaling; 0 (kind a) or 1 (kind b).
    pub lambda: f64,
    /// The rescaling factor (the input `λ`, or 1 when it vanishes).
    pub scale: f64,
}

/// `F = L^sk - ω/2`, `B = λL^s + [L^sk, L^s] - ω^2/4 - (L^s)^2 + [L^s, ω]/2`.
pub fn derivation_to_planewave(data: &DerivationData) -> Result<DerivedPlaneWave> {
    let scale = 1.0 + data.l.norm() + data.omega.norm() + data.lambda.abs();
    let tol = CONSTRAINT_TOL * scale * scale;
    let checks = [
        ("omegaL", data.omega_l_residual()),
        ("c0_L", commutator(&data.c0, &data.l).norm()),
        ("c0_omega", commutator(&data.c0, &data.omega).norm()),
    ];
    for (name, residual) in checks {
        if residual > tol {
            return Err(Error::Constraint { name, residual });
        }
    }
    let (lambda, s) = if data.lambda == 0.0 { (0.0, 1.0) } else { (1.0, data.lambda) };
    let om = &data.omega / s;
    let l = &data.l / s;
    let ls = sym_part(&l);
    let lk = skew_part(&l);
    let f = &lk - &om * 0.5;
    let b = &ls * lambda + commutator(&lk, &ls) - &om * &om * 0.25 - &ls * &ls
        + commutator(&ls, &om) * 0.5;
    let kind = if lambda == 0.0 { WaveKind::A } else { WaveKind::B };
    Ok(DerivedPlaneWave { spec: PlaneWaveSpec::new(kind, f, sym_part(&b))?, lambda, scale: s })
}

/// Result of `cw_lie_group_bracket_check`.
#[derive(Debug, Clone, PartialEq)]
pub struct LieGroupCheck {
    /// `L^sk L^s + L^s L^sk = 0` to `1e-10`.
    pub anticommute: bool,
    pub anticommutator_residual: f64,
    /// `L^s L^sk = 0`, i.e. the images of `L^s` and `L^sk` are orthogonal.
    pub images_orthogonal: bool,
    /// `B` of the induced Cahen–Wallach space (`λ = 0`, `ω = 2 L^sk`).
    pub induced_b: Mat,
}

/// Checks whether `L` (with `λ = 0` and `ω = 2 L^sk`, so that `F = 0`) defines a
/// Lie group structure on a Cahen–Wallach space.
pub fn cw_lie_group_bracket_check(l: &Mat) -> Result<LieGroupCheck> {
    crate::linalg::check_square(l, "L")?;
    crate::linalg::check_finite(l, "L")?;
    let ls = sym_part(l);
    let lk = skew_part(l);
    let bound = 1e-10 * (1.0 + l.norm()).powi(2);
    let anti = (&lk * &ls + &ls * &lk).norm();
    let orth = (&ls * &lk).norm();
    let induced_b = -(&lk * &lk) - &ls * &ls;
    Ok(LieGroupCheck {
        anticommute: anti <= bound,
        anticommutator_residual: anti,
        images_orthogonal: orth <= bound,
        induced_b,
    })
}

/// Outcome of the randomized search for a left-invariant witness.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessSearch {
    /// `sqrt(||B + A^2 + C^2||^2 + ||AC||^2)` at the best point found.
    pub best_residual: f64,
    pub a: Mat,
    pub c: Mat,
    /// `Some(true)` below `1e-8 max(1,||B||)`, `Some(false)` above `1e-4 max(1,||B||)`.
    pub verdict: Option<bool>,
}

struct Objective<'a> {
    b: &'a Mat,
    n: usize,
    a: Vec<f64>,
    c: Vec<f64>,
}

impl<'a> Objective<'a> {
    fn new(b: &'a Mat) -> Self {
        let n = b.nrows();
        Self { b, n, a: vec![0.0; n * n], c: vec![0.0; n * n] }
    }

    fn params(&self) -> usize {
        self.n * self.n
    }

    /// Upper triangle (with diagonal) parametrizes A, strict lower triangle parametrizes C.
    fn load(&mut self, x: &[f64]) {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let v = x[i * n + j];
                if j >= i {
                    self.a[i * n + j] = v;
                    self.a[j * n + i] = v;
                } else {
                    self.c[i * n + j] = v;
                    self.c[j * n + i] = -v;
                }
            }
        }
    }

    fn residuals(&mut self, x: &[f64], out: &mut [f64]) {
        self.load(x);
        let n = self.n;
        let (a, c) = (&self.a, &self.c);
        for i in 0..n {
            for j in 0..n {
                let mut s = self.b[(i, j)];
                let mut ac = 0.0;
                for k in 0..n {
                    s += a[i * n + k] * a[k * n + j] + c[i * n + k] * c[k * n + j];
                    ac += a[i * n + k] * c[k * n + j];
                }
                out[i * n + j] = s;
                out[n * n + i * n + j] = ac;
            }
        }
    }

    fn value(&mut self, x: &[f64], buf: &mut [f64]) -> f64 {
        self.residuals(x, buf);
        buf.iter().map(|v| v * v).sum()
    }
}

fn levenberg_marquardt(obj: &mut Objective, x0: &[f64], iterations: usize) -> (Vec<f64>, f64) {
    let p = obj.params();
    let m = 2 * p;
    let mut x = x0.to_vec();
    let mut r = vec![0.0; m];
    let mut trial_r = vec![0.0; m];
    let mut f = obj.value(&x, &mut r);
    let mut mu = 1e-3;
    let mut jac = Mat::zeros(m, p);
    let mut plus = vec![0.0; m];
    let mut minus = vec![0.0; m];
    for _ in 0..iterations {
        if f < 1e-28 {
            break;
        }
        obj.residuals(&x, &mut r);
        for j in 0..p {
            let h = 1e-7 * (1.0 + x[j].abs());
            let mut xp = x.clone();
            xp[j] += h;
            obj.residuals(&xp, &mut plus);
            xp[j] -= 2.0 * h;
            obj.residuals(&xp, &mut minus);
            for i in 0..m {
                jac[(i, j)] = (plus[i] - minus[i]) / (2.0 * h);
            }
        }
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * crate::linalg::Vector::from_column_slice(&r);
        let mut improved = false;
        for _ in 0..20 {
            let mut sys = jtj.clone();
            for i in 0..p {
                sys[(i, i)] += mu * (jtj[(i, i)] + 1e-12);
            }
            let Some(step) = sys.lu().solve(&(-&g)) else {
                mu *= 10.0;
                continue;
            };
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let ft = obj.value(&trial, &mut trial_r);
            if ft < f {
                x = trial;
                f = ft;
                mu = (mu / 3.0).max(1e-15);
                improved = true;
                break;
            }
            mu *= 4.0;
        }
        if !improved {
            break;
        }
    }
    (x, f)
}

/// Randomized search for `(A, C)` with `B = -A^2 - C^2`, `AC = 0`: `draws`
/// uniform samples followed by Levenberg–Marquardt refinement of the best ones.
pub fn witness_search(b: &Mat, draws: usize, seed: u64) -> Result<WitnessSearch> {
    check_symmetric(b, INPUT_TOL, "B")?;
    let n = b.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut obj = Objective::new(b);
    let p = obj.params();
    let radius = b.iter().map(|v| v.abs()).fold(0.0, f64::max).sqrt().max(0.5) * 1.5;
    const KEEP: usize = 32;
    let mut best: Vec<(f64, Vec<f64>)> = Vec::with_capacity(KEEP + 1);
    let mut buf = vec![0.0; 2 * p];
    let mut x = vec![0.0; p];
    for _ in 0..draws {
        let r = radius * rng.gen_range(0.1..1.0);
        for v in x.iter_mut() {
            *v = rng.gen_range(-r..r);
        }
        let f = obj.value(&x, &mut buf);
        if best.len() < KEEP || f < best[best.len() - 1].0 {
            let pos = best.partition_point(|(g, _)| *g <= f);
            best.insert(pos, (f, x.clone()));
            best.truncate(KEEP);
        }
    }
    let mut winner: Option<(f64, Vec<f64>)> = None;
    for (_, start) in &best {
        let (xr, f) = levenberg_marquardt(&mut obj, start, 300);
        if winner.as_ref().map_or(true, |(g, _)| f < *g) {
            winner = Some((f, xr));
        }
        if f < 1e-26 {
            break;
        }
    }
    let (f, xr) = winner.ok_or_else(|| Error::InvalidParameter("no draws".into()))?;
    obj.load(&xr);
    let a = Mat::from_row_slice(n, n, &obj.a);
    let c = Mat::from_row_slice(n, n, &obj.c);
    let best_residual = f.sqrt();
    let scale = b.norm().max(1.0);
    let verdict = if best_residual < 1e-8 * scale {
        Some(true)
    } else if best_residual > 1e-4 * scale {
        Some(false)
    } else {
        None
    };
    Ok(WitnessSearch { best_residual, a, c, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Vector;

    fn diag(v: &[f64]) -> Mat {
        Mat::from_diagonal(&Vector::from_row_slice(v))
    }

    #[test]
    fn left_invariant_examples() {
        let w = cw_left_invariant(&(-Mat::identity(2, 2)), 1e-12).unwrap();
        assert_eq!(w.verdict, Verdict::Yes);
        assert!((w.a.unwrap() - Mat::identity(2, 2)).norm() < 1e-14);
        assert!(w.c.unwrap().norm() < 1e-14);

        let w = cw_left_invariant(&Mat::identity(2, 2), 1e-12).unwrap();
        assert_eq!(w.verdict, Verdict::Yes);
        let c = w.c.unwrap();
        assert!(w.a.unwrap().norm() < 1e-14);
        assert!((&c + c.transpose()).norm() < 1e-14);
        assert!((-&c * &c - Mat::identity(2, 2)).norm() < 1e-14);

        let w = cw_left_invariant(&diag(&[1., -1.]), 1e-12).unwrap();
        assert_eq!(w.verdict, Verdict::No);
        assert!(w.certificate.unwrap().contains("odd multiplicity 1"));
    }

    #[test]
    fn bi_invariant_examples() {
        let w = cw_bi_invariant(&(-diag(&[1., 4.])), 1e-12).unwrap();
        assert_eq!(w.verdict, Verdict::Yes);
        assert!((w.c.unwrap() - diag(&[1., 2.])).norm() < 1e-14);
        let w = cw_bi_invariant(&Mat::zeros(2, 2), 1e-12).unwrap();
        assert_eq!(w.c.unwrap().norm(), 0.0);
        assert_eq!(cw_bi_invariant(&diag(&[1.]), 1e-12).unwrap().verdict, Verdict::No);
        assert!(cw_bi_invariant(&Mat::from_row_slice(2, 2, &[0., 1., 0., 0.]), 1e-12).is_err());
    }

    #[test]
    fn derivation_examples() {
        let d = DerivationData::new(0.0, Mat::zeros(2, 2), Mat::identity(2, 2), None).unwrap();
        let out = derivation_to_planewave(&d).unwrap();
        assert!(out.spec.f().norm() < 1e-15);
        assert!((out.spec.b() + Mat::identity(2, 2)).norm() < 1e-15);
        assert_eq!(cw_bi_invariant(out.spec.b(), 1e-12).unwrap().verdict, Verdict::Yes);

        let l = Mat::from_row_slice(2, 2, &[0., 2., -2., 0.]);
        let d = DerivationData::new(0.0, Mat::zeros(2, 2), l, None).unwrap();
        assert!(derivation_to_planewave(&d).unwrap().spec.b().norm() < 1e-15);

        let w = Mat::from_row_slice(2, 2, &[0., 1., -1., 0.]);
        let d = DerivationData::new(1.0, w, Mat::zeros(2, 2), None).unwrap();
        assert!(matches!(
            derivation_to_planewave(&d),
            Err(Error::Constraint { name: "omegaL", .. })
        ));
    }

    #[test]
    fn lie_group_check_examples() {
        assert!(cw_lie_group_bracket_check(&diag(&[1., 2.])).unwrap().anticommute);
        let skew = Mat::from_row_slice(2, 2, &[0., 1., -1., 0.]);
        assert!(cw_lie_group_bracket_check(&skew).unwrap().anticommute);
        let mut l = Mat::zeros(3, 3);
        l[(0, 0)] = 1.0;
        l[(1, 2)] = 1.0;
        l[(2, 1)] = -1.0;
        let out = cw_lie_group_bracket_check(&l).unwrap();
        assert!(out.anticommute && out.images_orthogonal);
        assert!((out.induced_b - diag(&[-1., 1., 1.])).norm() < 1e-15);
    }

    #[test]
    fn anticommuting_parts_need_not_have_orthogonal_images() {
        let l = Mat::from_row_slice(2, 2, &[1., 1., -1., -1.]);
        let out = cw_lie_group_bracket_check(&l).unwrap();
        assert!(out.anticommute);
        assert!(!out.images_orthogonal);
        // Positive eigenvalues of the induced B still come in pairs.
        assert_eq!(cw_left_invariant(&out.induced_b, 1e-10).unwrap().verdict, Verdict::Yes);
    }

    #[test]
    fn search_examples() {
        let yes = witness_search(&Mat::identity(2, 2), 2000, 1).unwrap();
        assert_eq!(yes.verdict, Some(true));
        let no = witness_search(&diag(&[1., -1.]), 2000, 1).unwrap();
        assert_eq!(no.verdict, Some(false));
    }
}
