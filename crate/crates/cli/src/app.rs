//! Command definitions and dispatch.

use std::collections::BTreeSet;
use std::fmt::Display;
use std::path::Path;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use rtcalc_core::hopf::{bck_coproduct, check_adjoint, deshuffle, pair_forests, star_product, theta_bar, Pairing};
use rtcalc_core::lincomb::{parse_scalar, tensor_view};
use rtcalc_core::phimaps::{check_compat, classify_m2, to_blocks, CompatVerdict, JdForm, M2Class};
use rtcalc_core::postlie::{postlie_axiom_defects, psi_compat_defects, planted_elem, ExtElem, ExtTerm, Extension, PostLieBase, Residuals};
use rtcalc_core::prelie::{graft_free, graft_phi, theta, theta_probe};
use rtcalc_core::spde::{noise_extend, phi_lambda, SpdeConfig};
use rtcalc_core::trees::{enumerate, Flat};
use rtcalc_core::{Basis, Forest, Label, LinComb, PhiMap, Scalar};

use crate::parse::{parse_edge_label, parse_expr, parse_vertex_label, Bases, ParsedExpr};
use crate::spec::{parse_json, phi_from_value, postlie_from_value, psi_from_value};
use crate::suite;

#[derive(Parser, Debug)]
#[command(name = "rtcalc", version, about = "Exact algebra of decorated rooted trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

/// The decoration map: a spec file or inline JSON, or `φ^λ` from `--d`/`--lambda`/`--noise`.
#[derive(Args, Debug, Clone, Default)]
pub struct PhiArgs {
    #[arg(long)]
    pub phi: Option<String>,
    #[arg(long)]
    pub d: Option<usize>,
    /// Comma-separated rationals, one per coordinate.
    #[arg(long)]
    pub lambda: Option<String>,
    #[arg(long)]
    pub noise: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate the map on one basis pair.
    ApplyPhi {
        #[command(flatten)]
        phi: PhiArgs,
        edge: String,
        vertex: String,
    },
    /// Test tree-compatibility; infinite bases need --bound.
    CheckCompat {
        #[command(flatten)]
        phi: PhiArgs,
        #[arg(long)]
        bound: Option<u32>,
    },
    /// Deformed grafting x ⊳^φ_a y.
    Graft {
        #[command(flatten)]
        phi: PhiArgs,
        #[arg(long)]
        a: String,
        x: String,
        y: String,
    },
    /// Free grafting x ⊳_a y.
    GraftFree {
        #[arg(long)]
        a: String,
        x: String,
        y: String,
    },
    /// Apply φ at every edge of each tree, or of each forest body.
    Theta {
        #[command(flatten)]
        phi: PhiArgs,
        /// Also evaluate in reversed edge order and fail on disagreement.
        #[arg(long)]
        probe: bool,
        x: String,
    },
    /// Guin-Oudom product of forests.
    Star {
        #[command(flatten)]
        phi: PhiArgs,
        x: String,
        y: String,
    },
    /// Cut coproduct of forests.
    Coprod {
        #[command(flatten)]
        phi: PhiArgs,
        x: String,
    },
    /// Deshuffle coproduct of forests.
    Deshuffle { x: String },
    /// Pairing of two forest combinations, each basis dual to itself.
    Pair {
        /// With --phi2, first check that the primed map is adjoint to this one.
        #[arg(long, requires = "phi2")]
        phi: Option<String>,
        /// Map on the primed side.
        #[arg(long, requires = "phi")]
        phi2: Option<String>,
        primed: String,
        x: String,
    },
    /// Post-Lie axioms on sampled elements of the extension.
    PostlieCheck {
        #[command(flatten)]
        phi: PhiArgs,
        #[arg(long)]
        psi: String,
        #[arg(long)]
        postlie: Option<String>,
        #[arg(long)]
        bound: Option<u32>,
        #[arg(long, default_value_t = 1)]
        max_vertices: usize,
    },
    /// Compatibility conditions between φ, the post-Lie algebra and its action.
    PsiCheck {
        #[command(flatten)]
        phi: PhiArgs,
        #[arg(long)]
        psi: String,
        #[arg(long)]
        postlie: Option<String>,
        #[arg(long)]
        bound: Option<u32>,
    },
    /// Table of φ^λ on small multi-indices with its compatibility verdict.
    SpdeDemo {
        #[arg(long, default_value_t = 0)]
        d: usize,
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long)]
        noise: bool,
        #[arg(long, default_value_t = 2)]
        bound: u32,
    },
    /// Normal form of a map with 2-dimensional vertex space.
    ClassifyM2 {
        #[command(flatten)]
        phi: PhiArgs,
    },
    /// Run the built-in property battery.
    VerifySuite {
        #[arg(long, value_enum, default_value_t = suite::Level::Small)]
        level: suite::Level,
    },
}

/// Exit status and captured output of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    Usage(String),
    Residual(String),
}

type CResult<T> = std::result::Result<T, Failure>;

fn usage(e: impl Display) -> Failure {
    Failure::Usage(e.to_string())
}

/// Reads a file when `arg` names one, otherwise returns `arg` itself.
fn read_arg(arg: &str) -> CResult<String> {
    let p = Path::new(arg);
    if p.is_file() {
        std::fs::read_to_string(p).map_err(|e| usage(format!("{arg}: {e}")))
    } else {
        Ok(arg.to_string())
    }
}

fn parse_lambda(csv: &str) -> CResult<Vec<Scalar>> {
    csv.split(',')
        .map(|s| parse_scalar(s).ok_or_else(|| usage(format!("invalid rational {s:?} in --lambda"))))
        .collect()
}

fn spde_cfg(d: Option<usize>, lambda: Option<&str>, noise: bool) -> CResult<SpdeConfig> {
    let mut cfg = match (d, lambda) {
        (_, Some(l)) => {
            let l = parse_lambda(l)?;
            if let Some(d) = d {
                if l.len() != d + 1 {
                    return Err(usage(format!("--lambda needs {} entries for --d {d}", d + 1)));
                }
            }
            SpdeConfig::new(l)
        }
        (Some(d), None) => SpdeConfig::ones(d),
        (None, None) => return Err(usage("give --phi, or --d/--lambda for φ^λ")),
    };
    if noise {
        cfg = cfg.with_noise();
    }
    Ok(cfg)
}

fn load_phi(args: &PhiArgs) -> CResult<PhiMap> {
    if let Some(spec) = &args.phi {
        if args.d.is_some() || args.lambda.is_some() || args.noise {
            return Err(usage("--phi cannot be combined with --d, --lambda or --noise"));
        }
        let v = parse_json(&read_arg(spec)?).map_err(usage)?;
        return phi_from_value(&v).map_err(usage);
    }
    let cfg = spde_cfg(args.d, args.lambda.as_deref(), args.noise)?;
    Ok(if cfg.noise { noise_extend(&cfg) } else { phi_lambda(&cfg) })
}

fn expr(arg: &str, bases: Bases<'_>) -> CResult<ParsedExpr> {
    parse_expr(&read_arg(arg)?, bases).map_err(|e| usage(format!("{arg}: {e}")))
}

fn forest_labels(f: &LinComb<Forest>) -> (Vec<Label>, Vec<Label>) {
    let (mut es, mut vs) = (BTreeSet::new(), BTreeSet::new());
    for t in f.terms() {
        let flat = Flat::from_forest(t);
        es.extend(flat.edge.into_iter().flatten());
        vs.extend(flat.vertex);
    }
    (es.into_iter().collect(), vs.into_iter().collect())
}

fn phi_bases(phi: &PhiMap) -> Bases<'_> {
    Bases { edges: Some(phi.edge_basis()), vertices: Some(phi.vertex_basis()) }
}

fn core<T>(r: rtcalc_core::Result<T>) -> CResult<T> {
    r.map_err(|e| match e {
        rtcalc_core::Error::IncompatiblePhi { .. } => Failure::Residual(e.to_string()),
        rtcalc_core::Error::AdjointnessViolated { .. } => Failure::Residual(e.to_string()),
        other => usage(other),
    })
}

fn lc_json<T: Ord + Clone + Display>(x: &LinComb<T>) -> Value {
    json!({ "terms": x.iter().map(|(t, c)| json!({"c": c.to_string(), "term": t.to_string()})).collect::<Vec<_>>() })
}

fn pairs_json(x: &LinComb<(Label, Label)>) -> Value {
    json!({ "out": x.iter().map(|((e, v), c)| json!({"c": c.to_string(), "e": e.to_string(), "v": v.to_string()})).collect::<Vec<_>>() })
}

fn show_lc<T: Ord + Clone + Display>(format: Format, x: &LinComb<T>) -> String {
    match format {
        Format::Text => x.to_string(),
        Format::Structured => lc_json(x).to_string(),
    }
}

fn verdict_json(v: &CompatVerdict) -> Value {
    match v {
        CompatVerdict::Compatible => json!({"verdict": "Compatible"}),
        CompatVerdict::VerifiedUpToBound(n) => json!({"verdict": "VerifiedUpToBound", "bound": n}),
        CompatVerdict::Refuted(r) => json!({
            "verdict": "Refuted",
            "witness": [r.a.to_string(), r.a2.to_string(), r.b.to_string()],
            "display": v.to_string(),
        }),
    }
}

fn sample_labels(basis: &Basis, bound: Option<u32>, what: &str) -> CResult<Vec<Label>> {
    match (basis.is_finite(), bound) {
        (true, _) => Ok(basis.sample(0)),
        (false, Some(b)) => Ok(basis.sample(b)),
        (false, None) => Err(usage(format!("the {what} basis is infinite; give --bound"))),
    }
}

fn residual_lines(name: &str, r: &Residuals, out: &mut Vec<String>) {
    if r.is_zero() {
        out.push(format!("{name}: 0 ({} checked)", r.checked));
    } else {
        out.push(format!("{name}: {} nonzero of {}", r.failures.len(), r.checked));
        for (at, v) in r.failures.iter().take(5) {
            out.push(format!("  {at}: {v}"));
        }
    }
}

fn residuals_json(r: &Residuals) -> Value {
    json!({
        "checked": r.checked,
        "failures": r.failures.iter().map(|(at, v)| json!({"at": at, "residual": v})).collect::<Vec<_>>(),
    })
}

fn load_psi(psi: &str, postlie: Option<&str>) -> CResult<(PostLieBase, rtcalc_core::postlie::PsiPair)> {
    let base = match postlie {
        Some(p) => Some(postlie_from_value(&parse_json(&read_arg(p)?).map_err(usage)?).map_err(usage)?),
        None => None,
    };
    psi_from_value(&parse_json(&read_arg(psi)?).map_err(usage)?, base).map_err(usage)
}

fn jd_name(f: JdForm) -> &'static str {
    match f {
        JdForm::J => "J",
        JdForm::D => "D",
    }
}

fn dispatch(cli: &Cli) -> CResult<String> {
    let fmt = cli.format;
    match &cli.command {
        Command::ApplyPhi { phi, edge, vertex } => {
            let phi = load_phi(phi)?;
            let a = parse_edge_label(edge, Some(phi.edge_basis())).map_err(usage)?;
            let b = parse_vertex_label(vertex, Some(phi.vertex_basis())).map_err(usage)?;
            let out = core(phi.apply(&a, &b))?;
            Ok(match fmt {
                Format::Text => tensor_view(&out).to_string(),
                Format::Structured => pairs_json(&out).to_string(),
            })
        }
        Command::CheckCompat { phi, bound } => {
            let phi = load_phi(phi)?;
            if !phi.is_finite() && bound.is_none() {
                return Err(usage("the decoration bases are infinite; give --bound"));
            }
            let v = core(check_compat(&phi, *bound))?;
            let text = match fmt {
                Format::Text => v.to_string(),
                Format::Structured => verdict_json(&v).to_string(),
            };
            match v {
                CompatVerdict::Refuted(_) => Err(Failure::Residual(text)),
                _ => Ok(text),
            }
        }
        Command::Graft { phi, a, x, y } => {
            let phi = load_phi(phi)?;
            let a = parse_edge_label(a, Some(phi.edge_basis())).map_err(usage)?;
            let x = expr(x, phi_bases(&phi))?.into_trees().map_err(usage)?;
            let y = expr(y, phi_bases(&phi))?.into_trees().map_err(usage)?;
            Ok(show_lc(fmt, &core(graft_phi(&phi, &x, &a, &y))?))
        }
        Command::GraftFree { a, x, y } => {
            let a = parse_edge_label(a, None).map_err(usage)?;
            let x = expr(x, Bases::default())?.into_trees().map_err(usage)?;
            let y = expr(y, Bases::default())?.into_trees().map_err(usage)?;
            Ok(show_lc(fmt, &graft_free(&x, &a, &y)))
        }
        Command::Theta { phi, probe, x } => {
            let phi = load_phi(phi)?;
            match expr(x, phi_bases(&phi))? {
                ParsedExpr::Trees(t) => {
                    let r = if *probe { theta_probe(&phi, &t) } else { theta(&phi, &t) };
                    Ok(show_lc(fmt, &core(r)?))
                }
                other => {
                    let f = other.into_forests().map_err(usage)?;
                    Ok(show_lc(fmt, &core(theta_bar(&phi, &f))?))
                }
            }
        }
        Command::Star { phi, x, y } => {
            let phi = load_phi(phi)?;
            let x = expr(x, phi_bases(&phi))?.into_forests().map_err(usage)?;
            let y = expr(y, phi_bases(&phi))?.into_forests().map_err(usage)?;
            Ok(show_lc(fmt, &core(star_product(&phi, &x, &y))?))
        }
        Command::Coprod { phi, x } => {
            let phi = load_phi(phi)?;
            let x = expr(x, phi_bases(&phi))?.into_forests().map_err(usage)?;
            Ok(show_lc(fmt, &tensor_view(&core(bck_coproduct(&phi, &x))?)))
        }
        Command::Deshuffle { x } => {
            let x = expr(x, Bases::default())?.into_forests().map_err(usage)?;
            Ok(show_lc(fmt, &tensor_view(&deshuffle(&x))))
        }
        Command::Pair { phi, phi2, primed, x } => {
            let p = expr(primed, Bases::default())?.into_forests().map_err(usage)?;
            let x = expr(x, Bases::default())?.into_forests().map_err(usage)?;
            if let (Some(phi), Some(phi2)) = (phi, phi2) {
                let load = |s: &str| -> CResult<PhiMap> { phi_from_value(&parse_json(&read_arg(s)?).map_err(usage)?).map_err(usage) };
                let (phi, phi2) = (load(phi)?, load(phi2)?);
                let ((e2, v2), (e1, v1)) = (forest_labels(&p), forest_labels(&x));
                core(check_adjoint(&phi, &phi2, &Pairing::delta(), (&e2, &v2), (&e1, &v1)))?;
            }
            let v = pair_forests(&Pairing::delta(), &p, &x);
            Ok(match fmt {
                Format::Text => v.to_string(),
                Format::Structured => json!({"value": v.to_string()}).to_string(),
            })
        }
        Command::PsiCheck { phi, psi, postlie, bound } => {
            let phi = load_phi(phi)?;
            let (base, psi) = load_psi(psi, postlie.as_deref())?;
            let es = sample_labels(phi.edge_basis(), *bound, "edge")?;
            let vs = sample_labels(phi.vertex_basis(), *bound, "vertex")?;
            let report = core(psi_compat_defects(&phi, &base, &psi, &es, &vs))?;
            let text = match fmt {
                Format::Text => {
                    let mut lines = Vec::new();
                    residual_lines("edge bracket", &report.edge_bracket, &mut lines);
                    residual_lines("edge product", &report.edge_product, &mut lines);
                    residual_lines("vertex bracket", &report.vertex_bracket, &mut lines);
                    residual_lines("map intertwining", &report.intertwining, &mut lines);
                    lines.join("\n")
                }
                Format::Structured => json!({
                    "edge_bracket": residuals_json(&report.edge_bracket),
                    "edge_product": residuals_json(&report.edge_product),
                    "vertex_bracket": residuals_json(&report.vertex_bracket),
                    "map_intertwining": residuals_json(&report.intertwining),
                })
                .to_string(),
            };
            if report.is_zero() {
                Ok(text)
            } else {
                Err(Failure::Residual(text))
            }
        }
        Command::PostlieCheck { phi, psi, postlie, bound, max_vertices } => {
            let phi = load_phi(phi)?;
            let (base, psi) = load_psi(psi, postlie.as_deref())?;
            let es = sample_labels(phi.edge_basis(), *bound, "edge")?;
            let vs = sample_labels(phi.vertex_basis(), *bound, "vertex")?;
            let ext = core(Extension::new(phi, base.clone(), psi))?;
            let mut elems: Vec<ExtElem> = (0..base.dim()).map(|i| LinComb::basis(ExtTerm::Gen(i))).collect();
            elems.extend(enumerate::planted(1, *max_vertices, &es, &vs).into_iter().map(planted_elem));
            let mut checked = 0usize;
            let mut failures = Vec::new();
            for u in &elems {
                for v in &elems {
                    for w in &elems {
                        let d = core(postlie_axiom_defects(&ext, u, v, w))?;
                        checked += 1;
                        if !d.is_zero() && failures.len() < 5 {
                            failures.push(format!(
                                "({}, {}, {}): jacobi {}, derivation {}, bracket/product {}",
                                ext.render(u),
                                ext.render(v),
                                ext.render(w),
                                ext.render(&d.jacobi),
                                ext.render(&d.derivation),
                                ext.render(&d.bracket_product)
                            ));
                        }
                    }
                }
            }
            let text = match fmt {
                Format::Text if failures.is_empty() => format!("post-Lie axioms: 0 ({checked} triples)"),
                Format::Text => format!("post-Lie axioms: failures among {checked} triples\n{}", failures.join("\n")),
                Format::Structured => json!({"checked": checked, "failures": failures}).to_string(),
            };
            if failures.is_empty() {
                Ok(text)
            } else {
                Err(Failure::Residual(text))
            }
        }
        Command::SpdeDemo { d, lambda, noise, bound } => {
            let cfg = spde_cfg(Some(*d), lambda.as_deref(), *noise)?;
            let phi = if cfg.noise { noise_extend(&cfg) } else { phi_lambda(&cfg) };
            let es = phi.edge_basis().sample(*bound);
            let vs = phi.vertex_basis().sample(*bound);
            let verdict = core(check_compat(&phi, Some(*bound)))?;
            let mut rows = Vec::new();
            for a in &es {
                for b in &vs {
                    rows.push((a.clone(), b.clone(), core(phi.apply(a, b))?));
                }
            }
            Ok(match fmt {
                Format::Text => {
                    let mut lines: Vec<String> =
                        rows.iter().map(|(a, b, v)| format!("{a} ⊗ {b} -> {}", tensor_view(v))).collect();
                    lines.push(verdict.to_string());
                    lines.join("\n")
                }
                Format::Structured => json!({
                    "table": rows.iter().map(|(a, b, v)| {
                        let mut o = pairs_json(v);
                        o["in"] = json!([a.to_string(), b.to_string()]);
                        o
                    }).collect::<Vec<_>>(),
                    "verdict": verdict_json(&verdict),
                })
                .to_string(),
            })
        }
        Command::ClassifyM2 { phi } => {
            let phi = load_phi(phi)?;
            let mx = core(to_blocks(&phi))?;
            let class = core(classify_m2(&mx))?;
            let (text, value) = match &class {
                M2Class::AlreadyJD { form, a, b, basis_change } => (
                    format!("{}(A, B) with A = {a}, B = {b}, P = {basis_change}", jd_name(*form)),
                    json!({"form": jd_name(*form), "A": a.to_string(), "B": b.to_string(), "P": basis_change.to_string()}),
                ),
                M2Class::NotCompatible { first, second } => (
                    format!("NotCompatible: blocks {first:?} and {second:?} do not commute"),
                    json!({"form": "NotCompatible", "blocks": [first, second]}),
                ),
                M2Class::NeedsAlgebraicExtension => {
                    ("NeedsAlgebraicExtension".to_string(), json!({"form": "NeedsAlgebraicExtension"}))
                }
            };
            let text = match fmt {
                Format::Text => text,
                Format::Structured => value.to_string(),
            };
            match class {
                M2Class::NotCompatible { .. } => Err(Failure::Residual(text)),
                _ => Ok(text),
            }
        }
        Command::VerifySuite { level } => {
            let results = suite::run(*level);
            let ok = results.iter().all(|r| r.passed);
            let text = match fmt {
                Format::Text => results
                    .iter()
                    .map(|r| format!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail))
                    .collect::<Vec<_>>()
                    .join("\n"),
                Format::Structured => json!(results
                    .iter()
                    .map(|r| json!({"name": r.name, "passed": r.passed, "detail": r.detail}))
                    .collect::<Vec<_>>())
                .to_string(),
            };
            if ok {
                Ok(text)
            } else {
                Err(Failure::Residual(text))
            }
        }
    }
}

/// Parses arguments and runs one command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match dispatch(&cli) {
        Ok(out) => Outcome { code: 0, stdout: out + "\n", stderr: String::new() },
        Err(Failure::Residual(out)) => Outcome { code: 1, stdout: out + "\n", stderr: String::new() },
        Err(Failure::Usage(msg)) => Outcome { code: 2, stdout: String::new(), stderr: format!("error: {msg}\n") },
    }
}
