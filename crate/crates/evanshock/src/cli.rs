//! Command-line front end: flag parsing, config-file merging, pipeline
//! dispatch, and artifact emission.
//!
//! Exit codes: 0 success, 2 instability detected (nonzero winding),
//! 3 numerical failure, 64 usage error.

use crate::artifact::{fmt_float, json_artifact, write_text, CsvArtifact, EffectiveConfig, Json};
use crate::bounds::{self, ConditionKind};
use crate::error::{Error, Result};
use crate::evans::{self, EvansSystem, ShootOptions};
use crate::evolution::{self, Grid1D, PerturbField, Perturbation, SimulateOptions};
use crate::model::{self, ShockParams};
use crate::svg::{emit_svg, SvgDataset};
use crate::winding::{self, ContourRunOptions, SweepOptions};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(
    name = "evanshock",
    version,
    about = "Spectral stability of viscous shock profiles of the isentropic p-system"
)]
pub struct Cli {
    /// Config file: flat `key = value` lines under `[subcommand]` sections;
    /// explicit flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory artifacts are written into.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads for sweep points (the EVANSHOCK_JOBS environment
    /// variable overrides this).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Solve the traveling-wave profile and export it.
    Profile(ProfileArgs),
    /// Closed-form stability boundaries over a gamma grid (map + iso-Mach overlay).
    Bounds(BoundsArgs),
    /// Evaluate the Evans function at one spectral point.
    Evans(EvansArgs),
    /// Winding number of D around the high-frequency contour.
    Winding(WindingArgs),
    /// (gamma, Mach) stability sweep.
    Sweep(SweepArgs),
    /// Nonlinear evolution of a perturbed shock.
    Evolve(EvolveArgs),
    /// Profile decay validation against the closed-form bounds.
    Validate(ValidateArgs),
}

#[derive(Args, Debug, Clone, Copy, Default)]
pub struct ShockArgs {
    /// Adiabatic exponent.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Right endstate volume in (0, 1); exclusive with --mach.
    #[arg(long)]
    pub vplus: Option<f64>,
    /// Mach number >= 1; exclusive with --vplus.
    #[arg(long)]
    pub mach: Option<f64>,
}

#[derive(Args, Debug)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub shock: ShockArgs,
    /// Half-length of the truncated domain.
    #[arg(long)]
    pub half_length: Option<f64>,
    /// Requested solve tolerance (also the endstate-reach requirement).
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[arg(long)]
    pub gamma_min: Option<f64>,
    #[arg(long)]
    pub gamma_max: Option<f64>,
    #[arg(long)]
    pub n_gamma: Option<usize>,
    /// Bisection tolerance for boundary roots.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Args, Debug)]
pub struct EvansArgs {
    #[command(flatten)]
    pub shock: ShockArgs,
    #[arg(long)]
    pub lambda_re: Option<f64>,
    #[arg(long)]
    pub lambda_im: Option<f64>,
    /// Override both truncation lengths.
    #[arg(long = "L")]
    pub l_override: Option<f64>,
    /// Initialization accuracy target feeding the domain-length estimate.
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub l_cap: Option<f64>,
}

#[derive(Args, Debug)]
pub struct WindingArgs {
    #[command(flatten)]
    pub shock: ShockArgs,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub safety: Option<f64>,
    #[arg(long)]
    pub r0: Option<f64>,
    #[arg(long = "L")]
    pub l_override: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub l_cap: Option<f64>,
    /// Report file stem (JSON; CSV and SVG siblings share the stem).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Comma-separated gamma values.
    #[arg(long)]
    pub gamma_list: Option<String>,
    #[arg(long)]
    pub mach_min: Option<f64>,
    #[arg(long)]
    pub mach_max: Option<f64>,
    #[arg(long)]
    pub n_mach: Option<usize>,
    /// Logarithmic Mach spacing (the default).
    #[arg(long, overrides_with = "linear_scale")]
    pub log_scale: bool,
    /// Linear Mach spacing instead of the default logarithmic.
    #[arg(long)]
    pub linear_scale: bool,
    /// Trust the closed-form sharp condition where it holds (skip Evans).
    #[arg(long)]
    pub analytic_shortcut: bool,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub safety: Option<f64>,
    #[arg(long)]
    pub r0: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub l_cap: Option<f64>,
    #[arg(long = "L")]
    pub l_override: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub shock: ShockArgs,
    /// Half-width of the computational domain [-domain, domain].
    #[arg(long)]
    pub domain: Option<f64>,
    /// Interior grid points.
    #[arg(long)]
    pub n: Option<usize>,
    /// dt = dt_ratio * dx.
    #[arg(long)]
    pub dt_ratio: Option<f64>,
    #[arg(long = "T")]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub perturb_amp: Option<f64>,
    #[arg(long)]
    pub perturb_width: Option<f64>,
    #[arg(long)]
    pub perturb_center: Option<f64>,
    /// Which field carries the bump: "u" (velocity) or "v" (volume).
    #[arg(long)]
    pub perturb_field: Option<String>,
    /// Comma-separated snapshot times.
    #[arg(long)]
    pub snapshots: Option<String>,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub shock: ShockArgs,
    #[arg(long)]
    pub half_length: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
}

/// Parsed config file: section -> key -> value.
#[derive(Debug, Default)]
pub struct ConfigFile {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut sections = BTreeMap::new();
        let mut current = "global".to_string();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                current = name.trim().to_string();
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "config line {} is not `key = value`: {raw}",
                    lineno + 1
                )));
            };
            sections
                .entry(current.clone())
                .or_insert_with(BTreeMap::new)
                .insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(ConfigFile { sections })
    }

    fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .get(section)
            .and_then(|s| s.get(key))
            .map(|s| s.as_str())
    }
}

/// cli value > config value > default; missing required values are usage
/// errors.
struct Resolver<'a> {
    cfg: &'a ConfigFile,
    section: &'a str,
}

impl<'a> Resolver<'a> {
    fn parse_from_cfg<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.cfg.get(self.section, key) {
            None => Ok(None),
            Some(s) => s.parse::<T>().map(Some).map_err(|_| {
                Error::Config(format!("config [{}] {key} = {s}: unparsable", self.section))
            }),
        }
    }

    fn float(&self, cli: Option<f64>, key: &str, default: f64) -> Result<f64> {
        Ok(cli.or(self.parse_from_cfg(key)?).unwrap_or(default))
    }

    fn ofloat(&self, cli: Option<f64>, key: &str) -> Result<Option<f64>> {
        Ok(cli.or(self.parse_from_cfg(key)?))
    }

    fn usize(&self, cli: Option<usize>, key: &str, default: usize) -> Result<usize> {
        Ok(cli.or(self.parse_from_cfg(key)?).unwrap_or(default))
    }

    fn string(&self, cli: Option<String>, key: &str, default: &str) -> Result<String> {
        Ok(cli
            .or(self.parse_from_cfg(key)?)
            .unwrap_or_else(|| default.to_string()))
    }

    fn required_float(&self, cli: Option<f64>, key: &str) -> Result<f64> {
        self.ofloat(cli, key)?
            .ok_or_else(|| Error::Config(format!("missing required value --{key}")))
    }

    fn shock(&self, args: &ShockArgs) -> Result<ShockParams> {
        let gamma = self.required_float(args.gamma, "gamma")?;
        let vplus = self.ofloat(args.vplus, "vplus")?;
        let mach = self.ofloat(args.mach, "mach")?;
        match (vplus, mach) {
            (Some(v), None) => ShockParams::new(gamma, v),
            (None, Some(m)) => ShockParams::from_mach(gamma, m),
            (Some(_), Some(_)) => Err(Error::Config(
                "--vplus and --mach are mutually exclusive".into(),
            )),
            (None, None) => Err(Error::Config("one of --vplus or --mach is required".into())),
        }
    }
}

fn record_shock(config: &mut EffectiveConfig, p: &ShockParams) {
    config.push_float("gamma", p.gamma);
    config.push_float("v_plus", p.v_plus);
    config.push_float("a", p.a);
    config.push_float("mach", p.mach);
}

/// Parse argv and run; returns the process exit code.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return 64;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e @ (Error::Config(_) | Error::Domain(_))) => {
            eprintln!("error: {e}");
            64
        }
        Err(e) => {
            eprintln!("error: {e}");
            3
        }
    }
}

pub fn run(cli: Cli) -> Result<i32> {
    let cfg = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let global = Resolver {
        cfg: &cfg,
        section: "global",
    };
    let out_dir = PathBuf::from(global.string(
        cli.out_dir.as_ref().map(|p| p.display().to_string()),
        "out_dir",
        ".",
    )?);
    let jobs = match std::env::var("EVANSHOCK_JOBS") {
        Ok(s) => Some(s.parse::<usize>().map_err(|_| {
            Error::Config(format!("EVANSHOCK_JOBS = {s} is not a thread count"))
        })?),
        Err(_) => cli.jobs.or(global.parse_from_cfg("jobs")?),
    };

    match &cli.cmd {
        Cmd::Profile(args) => run_profile(args, &cfg, &out_dir),
        Cmd::Bounds(args) => run_bounds(args, &cfg, &out_dir),
        Cmd::Evans(args) => run_evans(args, &cfg),
        Cmd::Winding(args) => run_winding(args, &cfg, &out_dir),
        Cmd::Sweep(args) => run_sweep(args, &cfg, &out_dir, jobs),
        Cmd::Evolve(args) => run_evolve(args, &cfg, &out_dir),
        Cmd::Validate(args) => run_validate(args, &cfg),
    }
}

fn run_profile(args: &ProfileArgs, cfg: &ConfigFile, out_dir: &Path) -> Result<i32> {
    let r = Resolver {
        cfg,
        section: "profile",
    };
    let params = r.shock(&args.shock)?;
    let half_length = r.float(args.half_length, "half_length", 12.0)?;
    let tol = r.float(args.tol, "tol", 1e-6)?;
    let profile = model::solve_profile(&params, half_length, tol)?;

    let mut config = EffectiveConfig::new("profile");
    record_shock(&mut config, &params);
    config.push_float("half_length", half_length);
    config.push_float("tol", tol);

    let rows: Vec<Vec<String>> = profile
        .nodes()
        .map(|(x, v, d)| vec![fmt_float(x), fmt_float(v), fmt_float(d)])
        .collect();
    let csv = CsvArtifact {
        header: vec!["x".into(), "vhat".into(), "vhat_prime".into()],
        rows,
        config: config.clone(),
    };
    write_text(&out_dir.join("profile.csv"), &csv.render())?;

    let params_json = Json::Obj(vec![
        ("gamma".into(), Json::Num(params.gamma)),
        ("v_plus".into(), Json::Num(params.v_plus)),
        ("a".into(), Json::Num(params.a)),
        ("mach".into(), Json::Num(params.mach)),
    ]);
    let doc = json_artifact(
        "params",
        &config,
        vec![
            ("params".into(), params_json),
            ("n_nodes".into(), Json::Int(profile.n_nodes() as i64)),
            ("clamped".into(), Json::Bool(profile.clamped)),
        ],
    );
    write_text(&out_dir.join("params.json"), &doc.render())?;
    println!(
        "profile: gamma = {}, v_plus = {:.6e}, mach = {:.4}, {} nodes -> {}",
        params.gamma,
        params.v_plus,
        params.mach,
        profile.n_nodes(),
        out_dir.join("profile.csv").display()
    );
    Ok(0)
}

fn run_bounds(args: &BoundsArgs, cfg: &ConfigFile, out_dir: &Path) -> Result<i32> {
    let r = Resolver {
        cfg,
        section: "bounds",
    };
    let gamma_min = r.float(args.gamma_min, "gamma_min", 1.0)?;
    let gamma_max = r.float(args.gamma_max, "gamma_max", 3.0)?;
    let n_gamma = r.usize(args.n_gamma, "n_gamma", 100)?;
    let tol = r.float(args.tol, "tol", 1e-10)?;
    if !(gamma_max > gamma_min) || n_gamma < 2 {
        return Err(Error::Config("need gamma_max > gamma_min and n_gamma >= 2".into()));
    }

    let mut config = EffectiveConfig::new("bounds");
    config.push_float("gamma_min", gamma_min);
    config.push_float("gamma_max", gamma_max);
    config.push_int("n_gamma", n_gamma as i64);
    config.push_float("tol", tol);

    let mut rows = Vec::new();
    let mut mn_curve = Vec::new();
    let mut sharp_curve = Vec::new();
    for k in 0..n_gamma {
        let gamma = gamma_min + (gamma_max - gamma_min) * k as f64 / (n_gamma - 1) as f64;
        let mn = bounds::stability_boundary(gamma, ConditionKind::MnCondition, tol)?;
        let sharp = bounds::stability_boundary(gamma, ConditionKind::SharpCondition, tol)?;
        if let (Some(mn), Some(sharp)) = (mn, sharp) {
            rows.push(vec![
                fmt_float(gamma),
                fmt_float(mn.v_plus_star),
                fmt_float(sharp.v_plus_star),
                fmt_float(mn.mach_star),
                fmt_float(sharp.mach_star),
            ]);
            mn_curve.push((gamma, mn.v_plus_star));
            sharp_curve.push((gamma, sharp.v_plus_star));
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let csv = CsvArtifact {
        header: vec![
            "gamma".into(),
            "vplus_mn".into(),
            "vplus_sharp".into(),
            "mach_mn".into(),
            "mach_sharp".into(),
        ],
        rows,
        config: config.clone(),
    };
    write_text(&out_dir.join("bounds.csv"), &csv.render())?;

    let mut iso = Vec::new();
    for mach in [2.0, 5.0, 10.0] {
        let mut curve = Vec::new();
        for k in 0..n_gamma {
            let gamma = gamma_min + (gamma_max - gamma_min) * k as f64 / (n_gamma - 1) as f64;
            if let Ok(v) = bounds::iso_mach_vplus(gamma, mach) {
                curve.push((gamma, v));
            }
        }
        iso.push((format!("M={mach}"), curve));
    }
    let svg = emit_svg(
        &SvgDataset::BoundaryMap {
            mn: &mn_curve,
            sharp: &sharp_curve,
            iso: &iso,
        },
        &config,
    )?;
    write_text(&out_dir.join("bounds.svg"), &svg)?;
    println!(
        "bounds: {} gamma points -> {}",
        n_gamma,
        out_dir.join("bounds.csv").display()
    );
    Ok(0)
}

fn evans_lengths(
    r: &Resolver,
    params: &ShockParams,
    l_override: Option<f64>,
    theta_cli: Option<f64>,
    l_cap_cli: Option<f64>,
) -> Result<(f64, f64, f64)> {
    let theta = r.float(theta_cli, "theta", 1e-3)?;
    let l_cap = r.float(l_cap_cli, "l_cap", 18.0)?;
    let l_override = r.ofloat(l_override, "L")?;
    let (lm, lp) = match l_override {
        Some(l) => (l, l),
        None => evans::lengths_for_accuracy(theta, params, l_cap)?,
    };
    Ok((lm, lp, theta))
}

fn run_evans(args: &EvansArgs, cfg: &ConfigFile) -> Result<i32> {
    let r = Resolver {
        cfg,
        section: "evans",
    };
    let params = r.shock(&args.shock)?;
    let lambda_re = r.required_float(args.lambda_re, "lambda_re")?;
    let lambda_im = r.float(args.lambda_im, "lambda_im", 0.0)?;
    let (l_minus, l_plus, theta) =
        evans_lengths(&r, &params, args.l_override, args.theta, args.l_cap)?;
    let lambda = Complex64::new(lambda_re, lambda_im);

    let system = EvansSystem::new(&params, l_minus, l_plus, 1e-6)?;
    let value = evans::evaluate(&system, lambda, &ShootOptions::default())?;

    let mut config = EffectiveConfig::new("evans");
    record_shock(&mut config, &params);
    config.push_float("lambda_re", lambda_re);
    config.push_float("lambda_im", lambda_im);
    config.push_float("theta", theta);
    config.push_float("l_minus", l_minus);
    config.push_float("l_plus", l_plus);

    let doc = json_artifact(
        "evans",
        &config,
        vec![
            ("lambda".into(), Json::complex(lambda)),
            ("D_re".into(), Json::Num(value.d.re)),
            ("D_im".into(), Json::Num(value.d.im)),
            ("L_minus".into(), Json::Num(l_minus)),
            ("L_plus".into(), Json::Num(l_plus)),
            (
                "warnings".into(),
                Json::Arr(value.warnings.iter().map(|w| Json::Str(w.clone())).collect()),
            ),
        ],
    );
    print!("{}", doc.render());
    Ok(0)
}

fn run_winding(args: &WindingArgs, cfg: &ConfigFile, out_dir: &Path) -> Result<i32> {
    let r = Resolver {
        cfg,
        section: "winding",
    };
    let params = r.shock(&args.shock)?;
    let n_points = r.usize(args.points, "points", 60)?;
    let safety = r.float(args.safety, "safety", 1.1)?;
    let r0 = r.float(args.r0, "r0", 1e-4)?;
    let (l_minus, l_plus, theta) =
        evans_lengths(&r, &params, args.l_override, args.theta, args.l_cap)?;
    let out = args
        .out
        .clone()
        .or(r.parse_from_cfg::<PathBuf>("out")?)
        .unwrap_or_else(|| PathBuf::from("report.json"));

    let mut config = EffectiveConfig::new("winding");
    record_shock(&mut config, &params);
    config.push_int("points", n_points as i64);
    config.push_float("safety", safety);
    config.push_float("r0", r0);
    config.push_float("theta", theta);
    config.push_float("l_minus", l_minus);
    config.push_float("l_plus", l_plus);

    let system = EvansSystem::new(&params, l_minus, l_plus, 1e-6)?;
    let contour = winding::build_contour(params.gamma, n_points, safety, r0);
    let report = winding::run_contour(&system, &contour, &ContourRunOptions::default())?;

    write_winding_artifacts(&report, &config, out_dir, &out)?;
    println!(
        "winding: gamma = {}, mach = {:.4}: winding = {} ({} refinements)",
        params.gamma, params.mach, report.winding, report.refinements
    );
    Ok(if report.winding == 0 { 0 } else { 2 })
}

fn write_winding_artifacts(
    report: &winding::ContourReport,
    config: &EffectiveConfig,
    out_dir: &Path,
    out: &Path,
) -> Result<()> {
    let json_path = out_dir.join(out);
    let stem = out.file_stem().map(|s| s.to_string_lossy().to_string());
    let stem = stem.unwrap_or_else(|| "report".into());

    let points_json: Vec<Json> = report
        .contour
        .points
        .iter()
        .zip(&report.d_values)
        .zip(&report.contour.ts)
        .map(|((lam, d), t)| {
            Json::Obj(vec![
                ("t".into(), Json::Num(*t)),
                ("lambda".into(), Json::complex(*lam)),
                ("d".into(), Json::complex(*d)),
            ])
        })
        .collect();
    let doc = json_artifact(
        "winding-report",
        config,
        vec![
            ("winding".into(), Json::Int(report.winding)),
            ("stable".into(), Json::Bool(report.stable)),
            ("refinements".into(), Json::Int(report.refinements as i64)),
            ("radius".into(), Json::Num(report.contour.radius)),
            (
                "indentation_radius".into(),
                Json::Num(report.contour.indentation_radius),
            ),
            (
                "max_arg_step".into(),
                Json::Num(report.arg_steps.iter().fold(0.0_f64, |m, s| m.max(s.abs()))),
            ),
            (
                "arg_steps".into(),
                Json::Arr(report.arg_steps.iter().map(|s| Json::Num(*s)).collect()),
            ),
            ("points".into(), Json::Arr(points_json)),
            (
                "warnings".into(),
                Json::Arr(report.warnings.iter().map(|w| Json::Str(w.clone())).collect()),
            ),
        ],
    );
    write_text(&json_path, &doc.render())?;

    let rows: Vec<Vec<String>> = report
        .contour
        .points
        .iter()
        .zip(&report.d_values)
        .map(|(lam, d)| {
            vec![
                fmt_float(lam.re),
                fmt_float(lam.im),
                fmt_float(d.re),
                fmt_float(d.im),
            ]
        })
        .collect();
    let csv = CsvArtifact {
        header: vec![
            "lambda_re".into(),
            "lambda_im".into(),
            "D_re".into(),
            "D_im".into(),
        ],
        rows,
        config: config.clone(),
    };
    write_text(&out_dir.join(format!("{stem}.csv")), &csv.render())?;

    let contour_pts: Vec<(f64, f64)> = report.contour.points.iter().map(|z| (z.re, z.im)).collect();
    let image_pts: Vec<(f64, f64)> = report.d_values.iter().map(|z| (z.re, z.im)).collect();
    let svg = emit_svg(
        &SvgDataset::ContourPair {
            contour: &contour_pts,
            image: &image_pts,
        },
        config,
    )?;
    write_text(&out_dir.join(format!("{stem}.svg")), &svg)?;
    Ok(())
}

fn parse_float_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::Config(format!("bad number in list: {s}")))
        })
        .collect()
}

fn run_sweep(args: &SweepArgs, cfg: &ConfigFile, out_dir: &Path, jobs: Option<usize>) -> Result<i32> {
    let r = Resolver {
        cfg,
        section: "sweep",
    };
    let gamma_list = parse_float_list(&r.string(
        args.gamma_list.clone(),
        "gamma_list",
        "1.4,1.666",
    )?)?;
    if gamma_list.is_empty() {
        return Err(Error::Config("empty gamma list".into()));
    }
    let mach_min = r.float(args.mach_min, "mach_min", 1.6)?;
    let mach_max = r.float(args.mach_max, "mach_max", 3000.0)?;
    let n_mach = r.usize(args.n_mach, "n_mach", 20)?;
    let out = args
        .out
        .clone()
        .or(r.parse_from_cfg::<PathBuf>("out")?)
        .unwrap_or_else(|| PathBuf::from("sweep.csv"));

    let opts = SweepOptions {
        n_points: r.usize(args.points, "points", 60)?,
        safety: r.float(args.safety, "safety", 1.1)?,
        r0: r.float(args.r0, "r0", 1e-4)?,
        theta: r.float(args.theta, "theta", 1e-3)?,
        l_cap: r.float(args.l_cap, "l_cap", 18.0)?,
        l_override: r.ofloat(args.l_override, "L")?,
        analytic_shortcut: args.analytic_shortcut
            || r.parse_from_cfg::<bool>("analytic_shortcut")?.unwrap_or(false),
        log_scale: !(args.linear_scale
            || r.parse_from_cfg::<bool>("linear_scale")?.unwrap_or(false)),
        jobs,
        ..Default::default()
    };

    let mut config = EffectiveConfig::new("sweep");
    config.push_str(
        "gamma_list",
        gamma_list
            .iter()
            .map(|g| fmt_float(*g))
            .collect::<Vec<_>>()
            .join(";"),
    );
    config.push_float("mach_min", mach_min);
    config.push_float("mach_max", mach_max);
    config.push_int("n_mach", n_mach as i64);
    config.push_int("points", opts.n_points as i64);
    config.push_float("safety", opts.safety);
    config.push_float("r0", opts.r0);
    config.push_float("theta", opts.theta);
    config.push_float("l_cap", opts.l_cap);
    config.push_str("log_scale", if opts.log_scale { "true" } else { "false" });
    config.push_str(
        "analytic_shortcut",
        if opts.analytic_shortcut { "true" } else { "false" },
    );

    let table = winding::sweep(&gamma_list, mach_min, mach_max, n_mach, &opts)?;
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|row| {
            let opt = |v: Option<f64>| v.map(fmt_float).unwrap_or_default();
            vec![
                fmt_float(row.gamma),
                fmt_float(row.mach),
                opt(row.v_plus),
                opt(row.l_minus),
                opt(row.l_plus),
                row.winding.map(|w| w.to_string()).unwrap_or_default(),
                opt(row.max_arg_step),
                row.refinements.to_string(),
                if row.analytic_shortcut { "1" } else { "0" }.into(),
                row.stable
                    .map(|s| if s { "1" } else { "0" }.to_string())
                    .unwrap_or_default(),
                row.error.clone().unwrap_or_default().replace(',', ";"),
            ]
        })
        .collect();
    let csv = CsvArtifact {
        header: vec![
            "gamma".into(),
            "mach".into(),
            "vplus".into(),
            "l_minus".into(),
            "l_plus".into(),
            "winding".into(),
            "max_arg_step".into(),
            "refinements".into(),
            "analytic_shortcut".into(),
            "stable".into(),
            "error".into(),
        ],
        rows,
        config: config.clone(),
    };
    write_text(&out_dir.join(&out), &csv.render())?;
    let n_bad = table.rows.iter().filter(|r| r.error.is_some()).count();
    println!(
        "sweep: {} points, {} unstable, {} failed -> {}",
        table.rows.len(),
        table
            .rows
            .iter()
            .filter(|r| matches!(r.winding, Some(w) if w != 0))
            .count(),
        n_bad,
        out_dir.join(&out).display()
    );
    Ok(if table.any_unstable() {
        2
    } else if table.any_failed() {
        3
    } else {
        0
    })
}

fn run_evolve(args: &EvolveArgs, cfg: &ConfigFile, out_dir: &Path) -> Result<i32> {
    let r = Resolver {
        cfg,
        section: "evolve",
    };
    let params = r.shock(&args.shock)?;
    let domain = r.float(args.domain, "domain", 75.0)?;
    let n = r.usize(args.n, "n", 2000)?;
    let dt_ratio = r.float(args.dt_ratio, "dt_ratio", 0.5)?;
    let t_end = r.float(args.t_end, "T", 50.0)?;
    let amp = r.float(args.perturb_amp, "perturb_amp", 0.05)?;
    let width = r.float(args.perturb_width, "perturb_width", 2.0)?;
    let center = r.float(args.perturb_center, "perturb_center", 0.0)?;
    let field_name = r.string(args.perturb_field.clone(), "perturb_field", "u")?;
    let field = match field_name.as_str() {
        "u" => PerturbField::U,
        "v" => PerturbField::V,
        other => {
            return Err(Error::Config(format!(
                "perturb_field must be u or v, got {other}"
            )))
        }
    };
    let snapshots = parse_float_list(&r.string(
        args.snapshots.clone(),
        "snapshots",
        "10,25,40",
    )?)?;

    let dx = 2.0 * domain / (n as f64 + 1.0);
    let grid = Grid1D::new(-domain, domain, n, dt_ratio * dx)?;
    let perturbation = Perturbation {
        amplitude: amp,
        width,
        center,
        field,
    };

    let mut config = EffectiveConfig::new("evolve");
    record_shock(&mut config, &params);
    config.push_float("domain", domain);
    config.push_int("n", n as i64);
    config.push_float("dt_ratio", dt_ratio);
    config.push_float("dt", grid.dt);
    config.push_float("T", t_end);
    config.push_float("perturb_amp", amp);
    config.push_float("perturb_width", width);
    config.push_float("perturb_center", center);
    config.push_str("perturb_field", &field_name);

    let report = evolution::simulate(
        &params,
        &grid,
        &perturbation,
        t_end,
        &snapshots,
        &SimulateOptions::default(),
    )?;

    for (k, snap) in report.snapshots.iter().enumerate() {
        let mut snap_config = config.clone();
        snap_config.push_float("snapshot_time", snap.time);
        let rows: Vec<Vec<String>> = (0..grid.n_nodes())
            .map(|j| {
                vec![
                    fmt_float(grid.x(j)),
                    fmt_float(snap.v[j]),
                    fmt_float(snap.u[j]),
                ]
            })
            .collect();
        let csv = CsvArtifact {
            header: vec!["x".into(), "v".into(), "u".into()],
            rows,
            config: snap_config,
        };
        write_text(&out_dir.join(format!("snapshot_{k:02}.csv")), &csv.render())?;
    }

    let history: Vec<Json> = report
        .residual_history
        .iter()
        .map(|(t, r)| {
            Json::Obj(vec![
                ("time".into(), Json::Num(*t)),
                ("residual_after_fit".into(), Json::Num(*r)),
            ])
        })
        .collect();
    let doc = json_artifact(
        "evolve-report",
        &config,
        vec![
            ("shift".into(), Json::Num(report.shift)),
            ("residual_history".into(), Json::Arr(history)),
            (
                "perturbation_norm".into(),
                Json::Num(report.perturbation_norm),
            ),
            (
                "newton_iters_max".into(),
                Json::Int(report.newton_iters_max as i64),
            ),
        ],
    );
    write_text(&out_dir.join("evolve.json"), &doc.render())?;

    let x: Vec<f64> = (0..grid.n_nodes()).map(|j| grid.x(j)).collect();
    let slices: Vec<(f64, Vec<f64>, Vec<f64>)> = pick_four(&report.snapshots)
        .into_iter()
        .map(|s| (s.time, s.v.clone(), s.u.clone()))
        .collect();
    let svg = emit_svg(&SvgDataset::SnapshotPanel { x: &x, slices: &slices }, &config)?;
    write_text(&out_dir.join("evolve.svg"), &svg)?;

    println!(
        "evolve: shift = {:.6}, final residual = {:.4e} (perturbation norm {:.4e})",
        report.shift,
        report.residual_history.last().map(|(_, r)| *r).unwrap_or(f64::NAN),
        report.perturbation_norm
    );
    Ok(0)
}

fn pick_four(snaps: &[evolution::Snapshot]) -> Vec<&evolution::Snapshot> {
    match snaps.len() {
        0 => Vec::new(),
        len if len <= 4 => snaps.iter().collect(),
        len => {
            let idx = [0, len / 3, 2 * len / 3, len - 1];
            idx.iter().map(|i| &snaps[*i]).collect()
        }
    }
}

fn run_validate(args: &ValidateArgs, cfg: &ConfigFile) -> Result<i32> {
    let r = Resolver {
        cfg,
        section: "validate",
    };
    let params = r.shock(&args.shock)?;
    let half_length = r.float(args.half_length, "half_length", 12.0)?;
    let tol = r.float(args.tol, "tol", 1e-6)?;

    let profile = model::solve_profile(&params, half_length, tol)?;
    let report = model::validate_profile_decay(&profile)?;

    let mut config = EffectiveConfig::new("validate");
    record_shock(&mut config, &params);
    config.push_float("half_length", half_length);
    config.push_float("tol", tol);

    let doc = json_artifact(
        "decay-validation",
        &config,
        vec![
            ("applicable".into(), Json::Bool(report.applicable)),
            ("worst_margin".into(), Json::Num(report.worst_margin)),
            ("worst_x".into(), Json::Num(report.worst_x)),
            ("n_samples".into(), Json::Int(report.n_samples as i64)),
            ("clamped".into(), Json::Bool(profile.clamped)),
            (
                "param_warnings".into(),
                Json::Arr(
                    params
                        .warnings()
                        .into_iter()
                        .map(Json::Str)
                        .collect(),
                ),
            ),
        ],
    );
    print!("{}", doc.render());
    Ok(0)
}
