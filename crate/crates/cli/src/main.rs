//! `foldcusp`: classify, portrait, sweep, returnmap, validate-bump.

mod config;
mod num;
mod render;

use std::fmt::Write as _;
use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use foldcusp::bifurcation::{
    build_system, classify_signature, sweep, BifDiagram, Classification, FamilyTag, GridSpec,
    ParamSign,
};
use foldcusp::exec::Execution;
use foldcusp::families::{bump_construct, bump_paper_function, standard_form, validate_bump};
use foldcusp::planefield::{Point2, TimeDirection};
use foldcusp::retmaps::{detect_canard_cycles, CanardCycle, InvisibleMaps};
use foldcusp::switching::{
    count_identity_check, find_pseudo_equilibria, find_tangencies, region_layout, SigmaPointClass,
};
use foldcusp::trajectory::{simulate_with, SimOptions};
use foldcusp::FilippovSystem;

use config::{FamilySpec, Flags, Format, RunConfig};
use num::g17;
use render::{diagram_svg, portrait_svg, PortraitScene};

const EXIT_USAGE: u8 = 2;
const EXIT_UNRESOLVED: u8 = 3;
const EXIT_NUMERIC: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "foldcusp", version, about = "Fold-cusp unfoldings of planar Filippov systems")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Case label, equivalence class and signature of one parameter point.
    Classify,
    /// SVG phase portrait.
    Portrait,
    /// Classify a (λ, β) grid: CSV, JSON or SVG diagram.
    Sweep,
    /// Tabulate the first return map ψ of the invisible unfolding.
    Returnmap,
    /// P1–P6 residual table for the constructed and printed bumps.
    ValidateBump,
}

#[derive(Debug)]
pub struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, msg: msg.into() }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Self::usage(format!("cannot write {}: {e}", path.display()))
    }
}

impl From<foldcusp::Error> for Failure {
    fn from(e: foldcusp::Error) -> Self {
        let code = match e {
            foldcusp::Error::InvalidParameters(_) | foldcusp::Error::Domain { .. } => EXIT_USAGE,
            _ => EXIT_NUMERIC,
        };
        Self { code, msg: e.to_string() }
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = RunConfig::resolve(&cli.flags).and_then(|cfg| match cli.cmd {
        Cmd::Classify => classify(&cfg),
        Cmd::Portrait => portrait(&cfg),
        Cmd::Sweep => run_sweep(&cfg),
        Cmd::Returnmap => returnmap(&cfg),
        Cmd::ValidateBump => validate(&cfg),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn emit(out: Option<&Path>, content: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, content).map_err(|e| Failure::io(p, e)),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn to_json(v: &impl serde::Serialize) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Failure {
        code: EXIT_NUMERIC,
        msg: e.to_string(),
    })?;
    s.push('\n');
    Ok(s)
}

fn system(cfg: &RunConfig) -> Result<FilippovSystem, Failure> {
    match (cfg.family, cfg.family_tag()) {
        (FamilySpec::Standard(rho), _) => Ok(standard_form(rho)),
        (_, Some(tag)) => Ok(build_system(tag, cfg.fold_cusp_params()?)?),
        _ => unreachable!("every family has a tag or is a standard form"),
    }
}

fn family_name(cfg: &RunConfig) -> &'static str {
    match cfg.family {
        FamilySpec::Invisible => "invisible",
        FamilySpec::Visible => "visible",
        FamilySpec::Standard(_) => "standard",
        FamilySpec::GstSlice => "gst-slice",
    }
}

fn classify(cfg: &RunConfig) -> Outcome {
    let z = system(cfg)?;
    let window = cfg.window_or(z.default_window())?;
    if let FamilySpec::Standard(rho) = cfg.family {
        let cycles: Vec<_> = detect_canard_cycles(&z, &window)?.iter().map(CanardCycle::summary).collect();
        let record = json!({
            "family": "standard",
            "rho": rho.rho,
            "window": window.radius,
            "tangencies": find_tangencies(&z, &window),
            "layout": region_layout(&z, &window),
            "pseudo_equilibria": find_pseudo_equilibria(&z, &window),
            "count_identity": count_identity_check(&z, &window),
            "cycles": cycles,
        });
        emit(cfg.out.as_deref(), &to_json(&record)?)?;
        return Ok(0);
    }
    let sig = foldcusp::bifurcation::signature_with(&z, &window, None)?;
    let class = classify_signature(&sig, None);
    let code = match class {
        Classification::Case { .. } => 0,
        Classification::BoundaryUnresolved { .. } => EXIT_UNRESOLVED,
    };
    let text = match cfg.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&json!({
            "family": family_name(cfg),
            "lambda": sig.lambda,
            "beta": sig.beta,
            "mu": sig.mu,
            "window": window.radius,
            "classification": class,
            "flags": {
                "two_fold": sig.two_fold,
                "loop": sig.loop_a_c,
                "loop_b_c": sig.loop_b_c,
                "d_eq_c": sig.d_eq_c,
                "d_eq_a": sig.d_eq_a,
            },
            "pseudo_equilibria": sig.pseudo,
            "cycles": sig.cycles,
            "signature": sig,
        }))?,
        Format::Csv => {
            let label = class.label().map(|l| l.to_string()).unwrap_or_default();
            let eq = match &class {
                Classification::Case { class, .. } => class.to_string(),
                _ => String::new(),
            };
            format!(
                "{CSV_HEADER}\n{},{},{},{label},{eq},{},{},{}\n",
                g17(sig.lambda),
                g17(sig.beta),
                g17(sig.mu),
                sig.non_virtual_pseudo(),
                sig.cycles.len(),
                code != 0
            )
        }
        Format::Svg => return Err(Failure::usage("classify writes json or csv; use portrait for SVG")),
    };
    emit(cfg.out.as_deref(), &text)?;
    Ok(code)
}

/// Seeds above and below `Σ` plus the midpoints of sliding and escaping
/// segments; every seed is flowed forward.
fn portrait(cfg: &RunConfig) -> Outcome {
    if cfg.format.is_some_and(|f| f != Format::Svg) {
        return Err(Failure::usage("portrait writes svg"));
    }
    let z = system(cfg)?;
    let window = cfg.window_or(z.default_window())?;
    let r = window.radius;
    let layout = region_layout(&z, &window);
    let tangencies = find_tangencies(&z, &window);
    let pseudo = find_pseudo_equilibria(&z, &window);
    let cycles = detect_canard_cycles(&z, &window)?;
    let mut seeds = Vec::new();
    for i in 0..7 {
        let x = -r + 2.0 * r * (i as f64 + 0.5) / 7.0;
        for y in [0.6 * r, 0.25 * r, -0.25 * r, -0.6 * r] {
            seeds.push(Point2::new(x, y));
        }
    }
    for &(a, b, c) in &layout {
        if matches!(c, SigmaPointClass::Sliding | SigmaPointClass::Escaping) {
            seeds.push(Point2::new(0.5 * (a + b), 0.0));
        }
    }
    let opts = SimOptions::new(window);
    let trajectories: Vec<_> = seeds
        .iter()
        .filter_map(|&p| simulate_with(&z, p, 4.0 * r, TimeDirection::Forward, &opts).ok())
        .collect();
    let title = match cfg.family {
        FamilySpec::Standard(rho) => format!("standard form rho = {:?}", rho.rho),
        _ => {
            let p = cfg.fold_cusp_params()?;
            let label = foldcusp::bifurcation::signature_with(&z, &window, None)
                .map(|s| match classify_signature(&s, None) {
                    Classification::Case { label, class } => format!("case {label} ({class})"),
                    Classification::BoundaryUnresolved { .. } => "boundary unresolved".into(),
                })
                .unwrap_or_else(|e| e.to_string());
            format!(
                "{} lambda = {} beta = {} mu = {}: {label}",
                family_name(cfg),
                g17(p.lambda),
                g17(p.beta),
                g17(p.mu)
            )
        }
    };
    let scene = PortraitScene {
        title,
        window,
        layout: &layout,
        tangencies: &tangencies,
        pseudo: &pseudo,
        trajectories: &trajectories,
        cycles: &cycles,
    };
    emit(cfg.out.as_deref(), &portrait_svg(&scene))?;
    Ok(0)
}

const CSV_HEADER: &str = "lambda,beta,mu,case_label,equiv_class,n_pseudo,n_cycles,boundary_flag";

/// One row per cell in row-major order. `boundary_flag` marks cells moved
/// onto a boundary curve and cells left unresolved.
fn sweep_csv(d: &BifDiagram) -> String {
    let mut s = String::with_capacity(64 * d.cells.len());
    s.push_str(CSV_HEADER);
    s.push('\n');
    for c in &d.cells {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            g17(c.lambda),
            g17(c.beta),
            g17(c.mu),
            c.label.map(|l| l.to_string()).unwrap_or_default(),
            c.class.map(|l| l.to_string()).unwrap_or_default(),
            c.n_pseudo,
            c.n_cycles,
            c.boundary_flag || c.label.is_none()
        );
    }
    s
}

fn run_sweep(cfg: &RunConfig) -> Outcome {
    let Some(family) = cfg.family_tag().filter(|_| cfg.family != FamilySpec::GstSlice) else {
        return Err(Failure::usage("sweep needs --family invisible or visible"));
    };
    let n = cfg.grid.unwrap_or(200);
    let mut spec = GridSpec::new(family, n, cfg.mu_spec());
    spec.lambda_range = cfg.lambda_range;
    spec.beta_range = cfg.beta_range;
    let exec = if cfg.sequential { Execution::Sequential } else { Execution::Parallel };
    let d = sweep(&spec, exec)?;
    let title = match (family, spec.mu) {
        (FamilyTag::Visible, _) => format!("visible family, {n}x{n}"),
        (_, foldcusp::bifurcation::MuSpec::Fixed(m)) => format!("invisible family, mu = {}, {n}x{n}", g17(m)),
        (_, foldcusp::bifurcation::MuSpec::Scaled(k)) => {
            format!("invisible family, mu = {} sqrt(beta), {n}x{n}", g17(k))
        }
    };
    let render = |f: Format| -> Result<String, Failure> {
        match f {
            Format::Csv => Ok(sweep_csv(&d)),
            Format::Json => to_json(&d),
            Format::Svg => Ok(diagram_svg(&d, &title)),
        }
    };
    match (cfg.format, cfg.out.as_deref()) {
        (Some(f), out) => emit(out, &render(f)?)?,
        (None, Some(p)) => match Format::from_path(p) {
            Some(f) => emit(Some(p), &render(f)?)?,
            None => {
                std::fs::create_dir_all(p).map_err(|e| Failure::io(p, e))?;
                for (f, name) in [(Format::Csv, "sweep.csv"), (Format::Json, "sweep.json"), (Format::Svg, "sweep.svg")] {
                    emit(Some(&p.join(name)), &render(f)?)?;
                }
            }
        },
        (None, None) => emit(None, &render(Format::Csv)?)?,
    }
    eprintln!(
        "{} cells, {} labels, {} unresolved",
        d.cells.len(),
        d.distinct_labels().len(),
        d.failures
    );
    Ok(0)
}

fn returnmap(cfg: &RunConfig) -> Outcome {
    if cfg.family_tag() != Some(FamilyTag::Invisible) {
        return Err(Failure::usage("returnmap is defined for the invisible family"));
    }
    let p = cfg.fold_cusp_params()?;
    if ParamSign::of(p.beta, 0.0) != ParamSign::Positive {
        return Err(Failure::usage("returnmap needs beta > 0"));
    }
    p.validate()?;
    let maps = InvisibleMaps::new(p)?;
    let (lo, hi) = maps.domain();
    let n = cfg.grid.unwrap_or(200);
    let mut rows = Vec::with_capacity(n);
    for k in 1..=n {
        let x = lo + (hi - lo) * k as f64 / (n + 1) as f64;
        let psi = maps.psi(x)?;
        rows.push((x, psi, psi - x));
    }
    let text = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = String::from("x,psi_x,psi_x_minus_x\n");
            for (x, psi, d) in &rows {
                let _ = writeln!(s, "{},{},{}", g17(*x), g17(*psi), g17(*d));
            }
            s
        }
        Format::Json => to_json(&json!({
            "lambda": p.lambda,
            "beta": p.beta,
            "mu": p.mu,
            "domain": [lo, hi],
            "rows": rows.iter().map(|(x, psi, d)| json!({"x": x, "psi_x": psi, "psi_x_minus_x": d})).collect::<Vec<_>>(),
        }))?,
        Format::Svg => return Err(Failure::usage("returnmap writes csv or json")),
    };
    emit(cfg.out.as_deref(), &text)?;
    Ok(0)
}

fn validate(cfg: &RunConfig) -> Outcome {
    let (beta, mu) = (cfg.beta, cfg.mu);
    let sources: &[&str] = match cfg.source.as_str() {
        "both" => &["constructed", "paper"],
        "constructed" => &["constructed"],
        "paper" => &["paper"],
        other => return Err(Failure::usage(format!("unknown bump source {other:?}"))),
    };
    if cfg.format.is_some_and(|f| f != Format::Json) {
        return Err(Failure::usage("validate-bump writes json"));
    }
    let mut reports = Vec::new();
    for src in sources {
        let bump = match *src {
            "constructed" => bump_construct(beta, mu)?,
            _ => bump_paper_function(beta, mu),
        };
        let r = validate_bump(&bump);
        reports.push(json!({
            "source": src,
            "all_pass": r.all_pass(),
            "report": r,
        }));
    }
    emit(
        cfg.out.as_deref(),
        &to_json(&json!({ "beta": beta, "mu": mu, "reports": reports }))?,
    )?;
    Ok(0)
}
