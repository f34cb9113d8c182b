//! Run configuration: a TOML file overlaid by command-line flags.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use foldcusp::bifurcation::{FamilyTag, MuSpec};
use foldcusp::families::{gst_slice, FoldCuspParams, StandardFormParams};
use foldcusp::planefield::Window;

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    pub fn from_path(p: &Path) -> Option<Self> {
        match p.extension()?.to_str()? {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            "svg" => Some(Format::Svg),
            _ => None,
        }
    }
}

/// Flags shared by every subcommand. Unset flags fall back to `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// invisible, visible, standard, gst-slice (also `standard(1,-1,-1,-1)`)
    #[arg(long, global = true)]
    pub family: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    /// Sweep with μ = k·√max(β, 0) instead of a fixed μ.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub mu_scaled: Option<f64>,
    /// Standard-form signs, e.g. `1,-1,-1,-1`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub rho: Option<String>,
    /// Half-width of the analysis window.
    #[arg(long, global = true)]
    pub window: Option<f64>,
    /// Grid resolution (sweep) or sample count (returnmap).
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// `lo,hi`
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub lambda_range: Option<String>,
    /// `lo,hi`
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub beta_range: Option<String>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Bump source for validate-bump: constructed, paper or both.
    #[arg(long, global = true)]
    pub source: Option<String>,
    /// Classify sweep cells on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,
}

/// Keys accepted in the config file; names match the long flags with `_`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub family: Option<String>,
    pub lambda: Option<f64>,
    pub beta: Option<f64>,
    pub mu: Option<f64>,
    pub mu_scaled: Option<f64>,
    pub rho: Option<[i8; 4]>,
    pub window: Option<f64>,
    pub grid: Option<usize>,
    pub lambda_range: Option<[f64; 2]>,
    pub beta_range: Option<[f64; 2]>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub source: Option<String>,
    pub sequential: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilySpec {
    Invisible,
    Visible,
    Standard(StandardFormParams),
    GstSlice,
}

/// Flags merged over the config file.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub family: FamilySpec,
    pub lambda: f64,
    pub beta: f64,
    pub mu: f64,
    pub mu_scaled: Option<f64>,
    pub window: Option<f64>,
    pub grid: Option<usize>,
    pub lambda_range: (f64, f64),
    pub beta_range: (f64, f64),
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub source: String,
    pub sequential: bool,
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::usage(msg)
}

fn parse_list<T: std::str::FromStr, const N: usize>(s: &str, what: &str) -> Result<[T; N], Failure> {
    let parts: Vec<&str> = s
        .trim_matches(|c| c == '(' || c == ')' || c == '[' || c == ']')
        .split(',')
        .map(str::trim)
        .collect();
    let vals: Vec<T> = parts
        .iter()
        .map(|p| p.parse::<T>())
        .collect::<Result<_, _>>()
        .map_err(|_| usage(format!("cannot parse {what} from {s:?}")))?;
    vals.try_into()
        .map_err(|_| usage(format!("{what} needs {N} comma-separated values, got {s:?}")))
}

fn parse_family(name: &str, rho: Option<[i8; 4]>) -> Result<FamilySpec, Failure> {
    let name = name.trim().to_ascii_lowercase();
    if let Some(inner) = name.strip_prefix("standard(") {
        let signs: [i8; 4] = parse_list(inner.trim_end_matches(')'), "rho")?;
        return standard(signs);
    }
    match name.as_str() {
        "invisible" => Ok(FamilySpec::Invisible),
        "visible" => Ok(FamilySpec::Visible),
        "gst-slice" | "gst" => Ok(FamilySpec::GstSlice),
        "standard" => standard(rho.ok_or_else(|| usage("--family standard needs --rho"))?),
        other => Err(usage(format!(
            "unknown family {other:?}; expected invisible, visible, standard or gst-slice"
        ))),
    }
}

fn standard(signs: [i8; 4]) -> Result<FamilySpec, Failure> {
    StandardFormParams::new(signs)
        .map(FamilySpec::Standard)
        .map_err(|e| usage(e.to_string()))
}

fn range(flag: Option<&String>, file: Option<[f64; 2]>, default: (f64, f64), what: &str) -> Result<(f64, f64), Failure> {
    let r = match flag {
        Some(s) => parse_list::<f64, 2>(s, what)?,
        None => file.unwrap_or([default.0, default.1]),
    };
    Ok((r[0], r[1]))
}

impl RunConfig {
    pub fn resolve(flags: &Flags) -> Result<Self, Failure> {
        let file = match &flags.config {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| usage(format!("cannot read config {}: {e}", p.display())))?;
                toml::from_str::<FileConfig>(&text)
                    .map_err(|e| usage(format!("invalid config {}: {e}", p.display())))?
            }
            None => FileConfig::default(),
        };
        let rho = match &flags.rho {
            Some(s) => Some(parse_list::<i8, 4>(s, "rho")?),
            None => file.rho,
        };
        let family_name = flags.family.clone().or(file.family).unwrap_or_else(|| "invisible".into());
        Ok(Self {
            family: parse_family(&family_name, rho)?,
            lambda: flags.lambda.or(file.lambda).unwrap_or(0.0),
            beta: flags.beta.or(file.beta).unwrap_or(0.0),
            mu: flags.mu.or(file.mu).unwrap_or(0.0),
            // An explicit --mu overrides a scaled μ from the file.
            mu_scaled: flags
                .mu_scaled
                .or(if flags.mu.is_some() { None } else { file.mu_scaled }),
            window: flags.window.or(file.window),
            grid: flags.grid.or(file.grid),
            lambda_range: range(flags.lambda_range.as_ref(), file.lambda_range, (-2.0, 2.0), "lambda-range")?,
            beta_range: range(flags.beta_range.as_ref(), file.beta_range, (-1.0, 1.0), "beta-range")?,
            out: flags.out.clone().or(file.out),
            format: flags.format.or(file.format),
            source: flags.source.clone().or(file.source).unwrap_or_else(|| "both".into()),
            sequential: flags.sequential || file.sequential.unwrap_or(false),
        })
    }

    /// Invisible-family parameters; the GST slice reads `(λ, μ)` and sets
    /// `β = μ²`.
    pub fn fold_cusp_params(&self) -> Result<FoldCuspParams, Failure> {
        match self.family {
            FamilySpec::GstSlice => gst_slice(self.lambda, self.mu).map_err(|e| usage(e.to_string())),
            _ => Ok(FoldCuspParams::new(self.lambda, self.beta, self.mu)),
        }
    }

    pub fn family_tag(&self) -> Option<FamilyTag> {
        match self.family {
            FamilySpec::Invisible | FamilySpec::GstSlice => Some(FamilyTag::Invisible),
            FamilySpec::Visible => Some(FamilyTag::Visible),
            FamilySpec::Standard(_) => None,
        }
    }

    pub fn mu_spec(&self) -> MuSpec {
        match self.mu_scaled {
            Some(k) => MuSpec::Scaled(k),
            None => MuSpec::Fixed(self.mu),
        }
    }

    pub fn window_or(&self, default: Window) -> Result<Window, Failure> {
        match self.window {
            Some(r) if r.is_finite() && r > 0.0 => Ok(Window::new(r)),
            Some(r) => Err(usage(format!("--window must be positive, got {r}"))),
            None => Ok(default),
        }
    }
}
