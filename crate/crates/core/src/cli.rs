//! Command-line dispatch. `dispatch` is pure apart from file reads and returns
//! the exit code together with the stdout and stderr payloads.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::criteria::{
    cw_bi_invariant, cw_left_invariant, cw_lie_group_bracket_check, derivation_to_planewave,
    witness_search, DecisionWitness,
};
use crate::error::{Error, Result};
use crate::io::{self, matrix_to_json, sci3, spec_to_json, LoadedSpec};
use crate::lie::{
    build_conf, build_isom, first_prolongation, nomizu, nomizu_curvature, normalize_frame,
};
use crate::linalg::MinkowskiFrame;
use crate::lorentz::{classify, DEFAULT_TOL};
use crate::planewave::{
    convert_b_to_a, curvature_closed, curvature_fd, homothety_pullback, is_conformally_flat,
    metric_at, planewave_condition_check, weyl_closed, SpacetimePoint, DEFAULT_STEP, INPUT_TOL,
};
use crate::verify::{resolve, run_suite, Bound};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// Environment variable overriding the default tolerance.
pub const TOL_ENV: &str = "PWLAB_TOL";

/// Bound on the transverse covariant derivative of the curvature.
const PLANEWAVE_BOUND: f64 = 1e-5;

#[derive(Parser, Debug)]
#[command(name = "pwlab", version, about = "Homogeneous plane waves and their symmetry algebras")]
struct Cli {
    /// Write a run report (input digests, timing) to stderr.
    #[arg(long, global = true)]
    report: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct SpecArg {
    #[arg(long)]
    spec: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Metric matrix at a point.
    Metric {
        #[command(flatten)]
        spec: SpecArg,
        /// Coordinates `v,x1..xn,u`.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Curvature profile at `u`; with `--point`, also the finite-difference tensor.
    Curvature {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, allow_hyphen_values = true)]
        u: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
        #[arg(long, default_value_t = DEFAULT_STEP)]
        step: f64,
    },
    /// Weyl profile at `u`.
    Weyl {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, allow_hyphen_values = true)]
        u: f64,
    },
    /// Finite-difference check that the curvature is parallel along v and x.
    CheckPlanewave {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, default_value_t = DEFAULT_STEP)]
        step: f64,
    },
    /// Is the metric conformally flat?
    CheckConfflat {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Kind-a spec conformal to a kind-b spec.
    ConvertBa {
        #[command(flatten)]
        spec: SpecArg,
    },
    /// Pullback of the metric by the homothety with factor `lambda`.
    Homothety {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Canonical form of an element of so(1, n+1).
    ClassifyElement {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Structure constants of the isometry algebra.
    Isom {
        #[command(flatten)]
        spec: SpecArg,
    },
    /// Structure constants of the conformal algebra.
    Conf {
        #[command(flatten)]
        spec: SpecArg,
    },
    /// Normalize raw bracket data to plane-wave data.
    Normalize {
        #[arg(long)]
        data: PathBuf,
    },
    /// First prolongation of a subalgebra of co(V).
    Prolong {
        #[arg(long)]
        basis: PathBuf,
    },
    /// Nomizu map and curvature of the left-invariant metric of a derivation.
    Nomizu {
        #[arg(long)]
        data: PathBuf,
    },
    /// Lie group structures on Cahen-Wallach spaces.
    Cw {
        #[command(subcommand)]
        which: CwCommand,
    },
    /// Plane-wave data induced by a derivation.
    FromDerivation {
        #[arg(long)]
        data: PathBuf,
    },
    /// Run the acceptance suite.
    Verify {
        /// `all`, or a comma-separated list of check numbers or names.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand, Debug)]
enum CwCommand {
    /// Left-invariant structure: spectral decision and a seeded search oracle.
    LeftInvariant {
        #[arg(long = "B")]
        b: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random starts for the search oracle; 0 disables it.
        #[arg(long, default_value_t = 10_000)]
        draws: usize,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Bi-invariant structure.
    BiInvariant {
        #[arg(long = "B")]
        b: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
    },
}

/// Exit code and output channels of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Tolerance precedence: flag, then `PWLAB_TOL`, then the command default.
pub fn resolve_tol(flag: Option<f64>, env: Option<&str>, default: f64) -> Result<f64> {
    let tol = match (flag, env) {
        (Some(t), _) => t,
        (None, Some(s)) => s
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("{TOL_ENV}={s} is not a number")))?,
        (None, None) => default,
    };
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    Ok(tol)
}

fn parse_point(s: &str, n: usize) -> Result<SpacetimePoint> {
    let coords = s
        .split(',')
        .map(|c| c.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::Schema(format!("point {s:?} is not a list of numbers")))?;
    if coords.len() != n + 2 {
        return Err(Error::DimensionMismatch { what: "point", expected: n + 2, found: coords.len() });
    }
    SpacetimePoint::from_coords(&coords)
}

fn error_json(e: &Error) -> Value {
    let mut obj = json!({ "kind": e.kind(), "message": e.to_string() });
    if let Some(r) = e.residual() {
        obj["residual"] = json!(sci3(r));
    }
    json!({ "error": obj })
}

fn witness_json(w: &DecisionWitness) -> Value {
    json!({
        "verdict": w.verdict.as_str(),
        "A": w.a.as_ref().map(matrix_to_json),
        "C": w.c.as_ref().map(matrix_to_json),
        "certificate": w.certificate,
        "residuals": {
            "reconstruction": w.reconstruction_residual.map(sci3),
            "AC": w.orthogonality_residual.map(sci3),
        },
    })
}

struct Context {
    env_tol: Option<String>,
    inputs: Vec<(PathBuf, String)>,
}

impl Context {
    fn tol(&self, flag: Option<f64>, default: f64) -> Result<f64> {
        resolve_tol(flag, self.env_tol.as_deref(), default)
    }

    fn digest(&mut self, path: &Path) -> Result<()> {
        let text = io::read_text(path)?;
        let hash = Sha256::digest(text.as_bytes());
        let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
        self.inputs.push((path.to_path_buf(), hex));
        Ok(())
    }

    fn spec(&mut self, arg: &SpecArg) -> Result<LoadedSpec> {
        self.digest(&arg.spec)?;
        io::load_spec(&arg.spec)
    }
}

fn with_notes(mut v: Value, notes: &[String]) -> Value {
    if !notes.is_empty() {
        v["notes"] = json!(notes);
    }
    v
}

fn run(cmd: &Command, ctx: &mut Context) -> Result<(i32, Value)> {
    let ok = |v: Value| Ok((EXIT_OK, v));
    match cmd {
        Command::Metric { spec, point } => {
            let s = ctx.spec(spec)?;
            let pt = parse_point(point, s.spec.n())?;
            let g = metric_at(&s.spec, &pt)?;
            ok(with_notes(
                json!({ "point": pt.coords().as_slice(), "metric": matrix_to_json(&g) }),
                &s.notes,
            ))
        }
        Command::Curvature { spec, u, point, step } => {
            let s = ctx.spec(spec)?;
            let pt = point.as_deref().map(|p| parse_point(p, s.spec.n())).transpose()?;
            let u = match (u, &pt) {
                (Some(u), _) => *u,
                (None, Some(pt)) => pt.u,
                (None, None) => return Err(Error::Schema("curvature needs --u or --point".into())),
            };
            let map = curvature_closed(&s.spec, u)?;
            let tensor = map.tensor();
            let entries: Vec<Value> = tensor
                .nonzero(REPORT_ZERO)
                .into_iter()
                .map(|(a, b, c, d, v)| json!([a, b, c, d, v]))
                .collect();
            let mut out = json!({
                "u": u,
                "profile": matrix_to_json(&map.profile),
                "tensor_nonzero": entries,
            });
            if let Some(pt) = pt {
                let fd = curvature_fd(&s.spec, &pt, *step)?;
                let closed = curvature_closed(&s.spec, pt.u)?.tensor();
                let rel = fd.sub(&closed).norm() / closed.norm().max(f64::MIN_POSITIVE);
                out["finite_difference"] = json!({
                    "step": step,
                    "relative_error": sci3(rel),
                    "bianchi_residual": sci3(fd.bianchi_residual()),
                });
            }
            ok(with_notes(out, &s.notes))
        }
        Command::Weyl { spec, u } => {
            let s = ctx.spec(spec)?;
            let w = weyl_closed(&s.spec, *u)?;
            ok(with_notes(
                json!({
                    "u": u,
                    "profile": matrix_to_json(&w.profile),
                    "profile_norm": sci3(w.profile.norm()),
                }),
                &s.notes,
            ))
        }
        Command::CheckPlanewave { spec, point, step } => {
            let s = ctx.spec(spec)?;
            let pt = parse_point(point, s.spec.n())?;
            let c = planewave_condition_check(&s.spec, &pt, *step)?;
            let passed = c.residual < PLANEWAVE_BOUND;
            let out = json!({
                "residual": sci3(c.residual),
                "tolerance": PLANEWAVE_BOUND,
                "per_direction": c.per_direction.iter().map(|&x| sci3(x)).collect::<Vec<_>>(),
                "u_direction": sci3(c.u_direction),
                "passed": passed,
            });
            Ok((if passed { EXIT_OK } else { EXIT_INTERNAL }, with_notes(out, &s.notes)))
        }
        Command::CheckConfflat { spec, tol } => {
            let s = ctx.spec(spec)?;
            let tol = ctx.tol(*tol, INPUT_TOL)?;
            ok(json!({ "conformally_flat": is_conformally_flat(&s.spec, tol)? }))
        }
        Command::ConvertBa { spec } => {
            let s = ctx.spec(spec)?;
            let conv = convert_b_to_a(&s.spec)?;
            ok(json!({
                "spec": spec_to_json(&conv.spec),
                "conformal_factor": conv.conformal_factor,
                "map": "(v - |x|^2/4, exp(u/2) x, exp(u))",
            }))
        }
        Command::Homothety { spec, lambda, point } => {
            let s = ctx.spec(spec)?;
            let pt = parse_point(point, s.spec.n())?;
            let pulled = homothety_pullback(&s.spec, *lambda, &pt)?;
            let expected = metric_at(&s.spec, &pt)? * (lambda * lambda);
            let residual = (&pulled - &expected).amax() / expected.amax().max(1.0);
            ok(with_notes(
                json!({
                    "lambda": lambda,
                    "pullback": matrix_to_json(&pulled),
                    "residual": sci3(residual),
                }),
                &s.notes,
            ))
        }
        Command::ClassifyElement { matrix, n, tol } => {
            ctx.digest(matrix)?;
            let m = io::load_matrix(matrix)?;
            if m.nrows() != n + 2 || m.ncols() != n + 2 {
                return Err(Error::DimensionMismatch {
                    what: "so(1,n+1) element",
                    expected: n + 2,
                    found: m.nrows(),
                });
            }
            let tol = ctx.tol(*tol, DEFAULT_TOL)?;
            let form = classify(&m, tol)?;
            ok(json!({
                "kind": form.kind.as_str(),
                "a": form.a,
                "c0": matrix_to_json(&form.c0),
                "frame": matrix_to_json(&form.frame),
                "witt_frame": matrix_to_json(&form.witt_frame),
                "labels": MinkowskiFrame::new(*n).labels(),
                "residual": sci3(form.residual),
            }))
        }
        Command::Isom { spec } => {
            let s = ctx.spec(spec)?;
            ok(with_notes(io::structure_to_json(&build_isom(&s.spec)?), &s.notes))
        }
        Command::Conf { spec } => {
            let s = ctx.spec(spec)?;
            ok(with_notes(io::structure_to_json(&build_conf(&s.spec)?), &s.notes))
        }
        Command::Normalize { data } => {
            ctx.digest(data)?;
            let raw = io::load_derivation(data)?;
            let frame = normalize_frame(&raw)?;
            let residuals: Vec<Value> = frame
                .residuals
                .iter()
                .map(|r| {
                    json!({
                        "name": r.name,
                        "value": sci3(r.value),
                        "tolerance": sci3(r.tolerance),
                        "passed": r.passed(),
                    })
                })
                .collect();
            ok(json!({
                "lambda": frame.lambda,
                "scale": frame.scale,
                "phi": matrix_to_json(&frame.phi),
                "spec": spec_to_json(&frame.spec()?),
                "residuals": residuals,
            }))
        }
        Command::Prolong { basis } => {
            ctx.digest(basis)?;
            let g0 = io::load_basis(basis)?;
            let pr = first_prolongation(&g0)?;
            let sols: Vec<Value> = pr
                .basis
                .iter()
                .map(|phi| Value::Array(phi.iter().map(matrix_to_json).collect()))
                .collect();
            ok(json!({ "dimension": pr.dimension, "basis": sols }))
        }
        Command::Nomizu { data } => {
            ctx.digest(data)?;
            let raw = io::load_derivation(data)?;
            let frame = normalize_frame(&raw)?;
            let s = frame.scale;
            let t = raw.t() / (s * s);
            let map = nomizu(frame.lambda, &(&raw.data.omega / s), &(&raw.data.l / s))?;
            let curv = nomizu_curvature(&map, Some(&t))?;
            let n = raw.data.n();
            let labels = MinkowskiFrame::new(n).labels();
            let images: Vec<Value> = labels
                .iter()
                .zip(&map.images)
                .map(|(l, m)| json!({ "label": l, "matrix": matrix_to_json(m) }))
                .collect();
            ok(json!({
                "lambda": frame.lambda,
                "scale": s,
                "images": images,
                "e_q_profile": matrix_to_json(&curv.e_q_profile(n)),
                "outside_pwedge": sci3(curv.outside_pwedge),
            }))
        }
        Command::Cw { which } => match which {
            CwCommand::LeftInvariant { b, seed, draws, tol } => {
                ctx.digest(b)?;
                let m = io::load_matrix(b)?;
                let tol = ctx.tol(*tol, DEFAULT_TOL)?;
                let w = cw_left_invariant(&m, tol)?;
                let mut out = witness_json(&w);
                if *draws > 0 {
                    let search = witness_search(&m, *draws, *seed)?;
                    out["search"] = json!({
                        "seed": seed,
                        "draws": draws,
                        "best_residual": sci3(search.best_residual),
                        "verdict": search.verdict.map(|v| if v { "yes" } else { "no" }),
                    });
                }
                ok(out)
            }
            CwCommand::BiInvariant { b, tol } => {
                ctx.digest(b)?;
                let m = io::load_matrix(b)?;
                let tol = ctx.tol(*tol, DEFAULT_TOL)?;
                ok(witness_json(&cw_bi_invariant(&m, tol)?))
            }
        },
        Command::FromDerivation { data } => {
            ctx.digest(data)?;
            let raw = io::load_derivation(data)?;
            let derived = derivation_to_planewave(&raw.data)?;
            let check = cw_lie_group_bracket_check(&raw.data.l)?;
            ok(json!({
                "lambda": derived.lambda,
                "scale": derived.scale,
                "spec": spec_to_json(&derived.spec),
                "lie_group_check": {
                    "anticommute": check.anticommute,
                    "anticommutator_residual": sci3(check.anticommutator_residual),
                    "images_orthogonal": check.images_orthogonal,
                    "induced_B": matrix_to_json(&check.induced_b),
                },
            }))
        }
        Command::Verify { suite, seed } => {
            let ids: Vec<u8> = if suite == "all" {
                (1..=10).collect()
            } else {
                suite
                    .split(',')
                    .map(|item| {
                        resolve(item.trim())
                            .ok_or_else(|| Error::InvalidParameter(format!("unknown check {item:?}")))
                    })
                    .collect::<Result<_>>()?
            };
            let outcomes = run_suite(&ids, *seed);
            let all = outcomes.iter().all(|o| o.passed());
            let checks: Vec<Value> = outcomes
                .iter()
                .map(|o| {
                    let ms: Vec<Value> = o
                        .measurements
                        .iter()
                        .filter(|m| m.name != "runtime_s")
                        .map(|m| {
                            let (op, b) = match m.bound {
                                Bound::Below(b) => ("<", b),
                                Bound::Above(b) => (">", b),
                            };
                            json!({
                                "name": m.name,
                                "value": sci3(m.value),
                                "bound": op,
                                "tolerance": b,
                                "passed": m.passed(),
                            })
                        })
                        .collect();
                    json!({
                        "id": o.id,
                        "name": o.name,
                        "passed": o.passed(),
                        "measurements": ms,
                        "notes": o.notes,
                    })
                })
                .collect();
            let summary: Vec<String> = outcomes.iter().map(|o| o.summary_line()).collect();
            let out = json!({ "seed": seed, "passed": all, "checks": checks, "summary": summary });
            Ok((if all { EXIT_OK } else { EXIT_INTERNAL }, out))
        }
    }
}

/// Entries below this magnitude are omitted from tensor listings.
const REPORT_ZERO: f64 = 1e-14;

/// Parse `args` (including the program name) and run the command.
pub fn dispatch<I, S>(args: I, env_tol: Option<String>) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    Outcome { code: EXIT_OK, stdout: text, stderr: String::new() }
                }
                ErrorKind::InvalidSubcommand
                | ErrorKind::MissingSubcommand
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: text }
                }
                _ => {
                    let err = Error::Schema(e.to_string().lines().next().unwrap_or("").to_string());
                    Outcome {
                        code: EXIT_VALIDATION,
                        stdout: format!("{}\n", error_json(&err)),
                        stderr: text,
                    }
                }
            };
        }
    };
    let start = Instant::now();
    let mut ctx = Context { env_tol, inputs: Vec::new() };
    let (code, mut payload) = match run(&cli.command, &mut ctx) {
        Ok(r) => r,
        Err(e) => {
            let code = if e.is_validation() { EXIT_VALIDATION } else { EXIT_INTERNAL };
            (code, error_json(&e))
        }
    };
    // Summary lines carry timings, so they go to stderr to keep stdout deterministic.
    let mut stderr = String::new();
    if let Some(Value::Array(summary)) = payload.as_object_mut().and_then(|o| o.remove("summary")) {
        for line in summary.iter().filter_map(Value::as_str) {
            stderr.push_str(line);
            stderr.push('\n');
        }
    }
    let stdout = format!("{}\n", serde_json::to_string_pretty(&payload).expect("serializable"));
    if cli.report {
        let command: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
        let digests: serde_json::Map<String, Value> = ctx
            .inputs
            .iter()
            .map(|(p, h)| (p.display().to_string(), json!(h)))
            .collect();
        let report = json!({
            "command": command,
            "input_sha256": digests,
            "exit_code": code,
            "wall_clock_seconds": start.elapsed().as_secs_f64(),
        });
        stderr.push_str(&format!("{report}\n"));
    }
    Outcome { code, stdout, stderr }
}
