//! Contour construction from the high-frequency bound, adaptive Evans
//! evaluation along the contour, argument-principle winding counts, the
//! real-axis scan, and the (gamma, Mach) sweep harness.

use crate::bounds::{hf_bound, sharp_condition};
use crate::error::{Error, Result};
use crate::evans::{
    evaluate, lengths_for_accuracy, ContourEvaluator, EvansSystem, KatoOptions, ShootOptions,
};
use crate::model::ShockParams;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI};

/// A posteriori bound on the argument change per contour step.
pub const MAX_ARG_STEP: f64 = PI / 25.0;

/// Closed counterclockwise search contour: a semicircle of radius `radius`
/// with its flat side on the imaginary axis, indented around the origin by a
/// small arc of radius `indentation_radius` bulging into the right
/// half-plane. `points` is closed (`first == last`); `ts` carries each
/// point's arclength parameter in [0, 1).
#[derive(Clone, Debug)]
pub struct Contour {
    pub points: Vec<Complex64>,
    pub ts: Vec<f64>,
    pub radius: f64,
    pub indentation_radius: f64,
}

impl Contour {
    /// Point on the contour at arclength parameter `t` (wraps modulo 1).
    /// The parametrization starts at `radius` on the real axis and runs
    /// counterclockwise: quarter arc up, axis leg down, indentation arc,
    /// axis leg down, quarter arc back to the start.
    pub fn at(&self, t: f64) -> Complex64 {
        let r = self.radius;
        let r0 = self.indentation_radius;
        let quarter = FRAC_PI_2 * r;
        let leg = r - r0;
        let indent = PI * r0;
        let total = 2.0 * quarter + 2.0 * leg + indent;
        let mut s = t.rem_euclid(1.0) * total;

        if s < quarter {
            let th = s / r;
            return Complex64::from_polar(r, th);
        }
        s -= quarter;
        if s < leg {
            return Complex64::new(0.0, r - s);
        }
        s -= leg;
        if s < indent {
            let phi = FRAC_PI_2 - s / r0;
            return Complex64::from_polar(r0, phi);
        }
        s -= indent;
        if s < leg {
            return Complex64::new(0.0, -(r0 + s));
        }
        s -= leg;
        let th = -FRAC_PI_2 + s / r;
        Complex64::from_polar(r, th)
    }

    pub fn n_distinct(&self) -> usize {
        self.points.len() - 1
    }
}

/// Build the search contour for `gamma`: radius `safety * hf_bound(gamma)`,
/// `n_points` distinct nodes (rounded up to even) spread roughly uniformly
/// in arclength, conjugate-symmetric, starting at the real seed.
pub fn build_contour(gamma: f64, n_points: usize, safety: f64, r0: f64) -> Contour {
    let n = n_points.max(16);
    let r = safety * hf_bound(gamma);
    let quarter = FRAC_PI_2 * r;
    let leg = r - r0;
    let indent = PI * r0;
    let total = 2.0 * quarter + 2.0 * leg + indent;

    // per-piece node counts: n = 2 m1 + 2 m2 + m3, m3 even so the apex is a
    // node and the set is conjugate-symmetric
    let mut m1 = ((n as f64) * quarter / total).round() as usize;
    m1 = m1.max(4);
    let mut m2 = ((n as f64) * leg / total).round() as usize;
    m2 = m2.max(2);
    let mut m3 = n as i64 - 2 * m1 as i64 - 2 * m2 as i64;
    if m3 < 4 {
        let deficit = ((4 - m3) as usize).div_ceil(2);
        let take = deficit.min(m2.saturating_sub(2));
        m2 -= take;
        let rest = deficit - take;
        m1 = m1.saturating_sub(rest).max(4);
        m3 = n as i64 - 2 * m1 as i64 - 2 * m2 as i64;
    }
    let mut m3 = m3.max(4) as usize;
    if m3 % 2 == 1 {
        m3 += 1;
    }

    let fq = quarter / total;
    let fl = leg / total;
    let fi = indent / total;
    let mut ts = Vec::with_capacity(2 * m1 + 2 * m2 + m3 + 1);
    ts.push(0.0);
    for k in 1..=m1 {
        ts.push(fq * k as f64 / m1 as f64);
    }
    for k in 1..=m2 {
        ts.push(fq + fl * k as f64 / m2 as f64);
    }
    for k in 1..=m3 {
        ts.push(fq + fl + fi * k as f64 / m3 as f64);
    }
    for k in 1..=m2 {
        ts.push(fq + fl + fi + fl * k as f64 / m2 as f64);
    }
    for k in 1..m1 {
        ts.push(fq + fl + fi + fl + fq * k as f64 / m1 as f64);
    }

    let mut contour = Contour {
        points: Vec::new(),
        ts: Vec::new(),
        radius: r,
        indentation_radius: r0,
    };
    let mut points: Vec<Complex64> = ts.iter().map(|t| contour.at(*t)).collect();
    // close the loop
    ts.push(1.0);
    points.push(points[0]);
    contour.points = points;
    contour.ts = ts;
    contour
}

/// Winding count of a closed sequence of nonzero values.
#[derive(Clone, Debug)]
pub struct WindingSummary {
    pub winding: i64,
    pub total_arg: f64,
    pub arg_steps: Vec<f64>,
    pub max_arg_step: f64,
}

/// Accumulated principal-branch phase increments around the closed sequence
/// (the final wrap-around step is included; an explicit duplicate of the
/// first value at the end is tolerated).
pub fn winding_number(d_values: &[Complex64]) -> Result<WindingSummary> {
    let mut vals = d_values;
    if vals.len() >= 2 && (vals[0] - vals[vals.len() - 1]).norm() == 0.0 {
        vals = &vals[..vals.len() - 1];
    }
    if vals.len() < 3 {
        return Err(Error::BadContour);
    }
    for d in vals {
        if d.norm() < 1e-12 {
            return Err(Error::NearZeroOnContour {
                lambda: Complex64::new(f64::NAN, f64::NAN),
                abs_d: d.norm(),
            });
        }
    }
    let mut arg_steps = Vec::with_capacity(vals.len());
    let mut total = 0.0;
    let mut max_step = 0.0_f64;
    for k in 0..vals.len() {
        let a = vals[k];
        let b = vals[(k + 1) % vals.len()];
        let step = (b / a).arg();
        arg_steps.push(step);
        total += step;
        max_step = max_step.max(step.abs());
    }
    let winding = (total / (2.0 * PI)).round() as i64;
    debug_assert!((total / (2.0 * PI) - winding as f64).abs() < 0.05);
    Ok(WindingSummary {
        winding,
        total_arg: total,
        arg_steps,
        max_arg_step: max_step,
    })
}

/// Options for the full contour pipeline.
#[derive(Clone, Copy, Debug)]
pub struct ContourRunOptions {
    pub max_arg_step: f64,
    pub max_depth: usize,
    pub shoot: ShootOptions,
    pub kato: KatoOptions,
}

impl Default for ContourRunOptions {
    fn default() -> Self {
        ContourRunOptions {
            max_arg_step: MAX_ARG_STEP,
            max_depth: 12,
            shoot: ShootOptions::default(),
            kato: KatoOptions::default(),
        }
    }
}

/// Outcome of one adaptive contour evaluation: the refined contour, D along
/// it, per-segment argument increments, and the winding number.
#[derive(Clone, Debug)]
pub struct ContourReport {
    pub contour: Contour,
    pub d_values: Vec<Complex64>,
    pub arg_steps: Vec<f64>,
    pub winding: i64,
    pub refinements: usize,
    pub stable: bool,
    pub warnings: Vec<String>,
}

/// Evaluate D around the contour with Kato-continued initialization,
/// bisecting every segment whose argument increment reaches `max_arg_step`.
pub fn run_contour(
    system: &EvansSystem,
    contour: &Contour,
    opts: &ContourRunOptions,
) -> Result<ContourReport> {
    let n = contour.n_distinct();
    let path: Vec<(f64, Complex64)> = (0..n)
        .map(|i| (contour.ts[i], contour.points[i]))
        .collect();
    let mut eval = ContourEvaluator::sweep(system, &path, opts.shoot, opts.kato)?;
    let mut depths = vec![0usize; eval.points.len()];
    let mut refinements = 0usize;

    loop {
        for p in &eval.points {
            if p.d.norm() < 1e-12 {
                return Err(Error::NearZeroOnContour {
                    lambda: p.lambda,
                    abs_d: p.d.norm(),
                });
            }
        }
        let m = eval.points.len();
        let mut worst: Option<(usize, f64)> = None;
        for i in 0..m {
            let j = (i + 1) % m;
            let step = (eval.points[j].d / eval.points[i].d).arg().abs();
            if step >= opts.max_arg_step {
                if depths[i] >= opts.max_depth {
                    return Err(Error::RefinementDepthExceeded {
                        from: eval.points[i].lambda,
                        to: eval.points[j].lambda,
                    });
                }
                if worst.map(|(_, s)| step > s).unwrap_or(true) {
                    worst = Some((i, step));
                }
            }
        }
        let Some((i, _)) = worst else { break };
        let j = (i + 1) % m;
        let wrap = if j == 0 { 1.0 } else { 0.0 };
        let t_mid = (0.5 * (eval.points[i].t + eval.points[j].t + wrap)).rem_euclid(1.0);
        let lambda_mid = contour.at(t_mid);
        let at = eval.insert(i, t_mid, lambda_mid)?;
        let d = depths[i] + 1;
        depths[i] = d;
        depths.insert(at, d);
        refinements += 1;
    }

    let mut d_values = eval.d_values();
    let summary = winding_number(&d_values)?;
    let mut warnings: Vec<String> = Vec::new();
    for p in &eval.points {
        warnings.extend(p.warnings.iter().cloned());
    }
    let mut ts: Vec<f64> = eval.points.iter().map(|p| p.t).collect();
    let mut points = eval.lambdas();
    points.push(points[0]);
    ts.push(1.0);
    d_values.push(d_values[0]);
    Ok(ContourReport {
        contour: Contour {
            points,
            ts,
            radius: contour.radius,
            indentation_radius: contour.indentation_radius,
        },
        d_values,
        arg_steps: summary.arg_steps,
        winding: summary.winding,
        refinements,
        stable: summary.winding == 0,
        warnings,
    })
}

/// Real-axis scan report: D is real there up to roundoff under symmetric
/// initialization, and its real part should never change sign.
#[derive(Clone, Debug)]
pub struct RealAxisReport {
    pub lambdas: Vec<f64>,
    pub d_values: Vec<Complex64>,
    pub sign_changes: usize,
    pub max_im_ratio: f64,
    pub warnings: Vec<String>,
}

/// Evaluate D at `n_samples` real spectral points in [lo, hi] and count sign
/// changes of Re D.
pub fn real_axis_scan(
    system: &EvansSystem,
    n_samples: usize,
    lo: f64,
    hi: f64,
    shoot: &ShootOptions,
) -> Result<RealAxisReport> {
    if n_samples < 2 || !(lo > 0.0 && hi > lo) {
        return Err(Error::Domain("real-axis scan needs n >= 2, 0 < lo < hi".into()));
    }
    let mut lambdas = Vec::with_capacity(n_samples);
    let mut d_values = Vec::with_capacity(n_samples);
    let mut warnings = Vec::new();
    let mut max_im_ratio = 0.0_f64;
    for k in 0..n_samples {
        let lam = lo + (hi - lo) * k as f64 / (n_samples - 1) as f64;
        let val = evaluate(system, Complex64::new(lam, 0.0), shoot)?;
        max_im_ratio = max_im_ratio.max(val.d.im.abs() / val.d.norm());
        lambdas.push(lam);
        d_values.push(val.d);
        warnings.extend(val.warnings);
    }
    if max_im_ratio > 1e-6 {
        warnings.push(format!(
            "symmetry violation: |Im D|/|D| reaches {max_im_ratio:.3e} on the real axis"
        ));
    }
    let sign_changes = d_values
        .windows(2)
        .filter(|w| w[0].re.signum() != w[1].re.signum())
        .count();
    Ok(RealAxisReport {
        lambdas,
        d_values,
        sign_changes,
        max_im_ratio,
        warnings,
    })
}

/// Sweep configuration. Mach points are spaced logarithmically by default,
/// matching the survey protocol.
#[derive(Clone, Copy, Debug)]
pub struct SweepOptions {
    pub n_points: usize,
    pub safety: f64,
    pub r0: f64,
    pub theta: f64,
    pub l_cap: f64,
    pub l_override: Option<f64>,
    pub profile_tol: f64,
    pub analytic_shortcut: bool,
    pub log_scale: bool,
    pub jobs: Option<usize>,
    pub run: ContourRunOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            n_points: 60,
            safety: 1.1,
            r0: 1e-4,
            theta: 1e-3,
            l_cap: 18.0,
            l_override: None,
            profile_tol: 1e-6,
            analytic_shortcut: false,
            log_scale: true,
            jobs: None,
            run: ContourRunOptions::default(),
        }
    }
}

/// One sweep result row; failures are recorded in place so a sweep always
/// returns a full table.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub gamma: f64,
    pub mach: f64,
    pub v_plus: Option<f64>,
    pub l_minus: Option<f64>,
    pub l_plus: Option<f64>,
    pub winding: Option<i64>,
    pub max_arg_step: Option<f64>,
    pub refinements: usize,
    pub analytic_shortcut: bool,
    pub stable: Option<bool>,
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn all_stable(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.stable == Some(true) && r.error.is_none())
    }

    pub fn any_unstable(&self) -> bool {
        self.rows.iter().any(|r| matches!(r.winding, Some(w) if w != 0))
    }

    pub fn any_failed(&self) -> bool {
        self.rows.iter().any(|r| r.error.is_some())
    }
}

/// Mach grid for the sweep.
pub fn mach_grid(mach_min: f64, mach_max: f64, n: usize, log_scale: bool) -> Vec<f64> {
    if n == 1 {
        return vec![mach_min];
    }
    (0..n)
        .map(|k| {
            let t = k as f64 / (n - 1) as f64;
            if log_scale {
                (mach_min.ln() + t * (mach_max.ln() - mach_min.ln())).exp()
            } else {
                mach_min + t * (mach_max - mach_min)
            }
        })
        .collect()
}

fn sweep_point(gamma: f64, mach: f64, opts: &SweepOptions) -> SweepRow {
    let mut row = SweepRow {
        gamma,
        mach,
        v_plus: None,
        l_minus: None,
        l_plus: None,
        winding: None,
        max_arg_step: None,
        refinements: 0,
        analytic_shortcut: false,
        stable: None,
        error: None,
    };
    let attempt = || -> Result<SweepRow> {
        let mut row = row.clone();
        let params = ShockParams::from_mach(gamma, mach)?;
        row.v_plus = Some(params.v_plus);
        if opts.analytic_shortcut && sharp_condition(&params).holds {
            row.analytic_shortcut = true;
            row.stable = Some(true);
            return Ok(row);
        }
        let (l_minus, l_plus) = match opts.l_override {
            Some(l) => (l, l),
            None => lengths_for_accuracy(opts.theta, &params, opts.l_cap)?,
        };
        row.l_minus = Some(l_minus);
        row.l_plus = Some(l_plus);
        let system = EvansSystem::new(&params, l_minus, l_plus, opts.profile_tol)?;
        let contour = build_contour(gamma, opts.n_points, opts.safety, opts.r0);
        let report = run_contour(&system, &contour, &opts.run)?;
        row.winding = Some(report.winding);
        row.max_arg_step = Some(
            report
                .arg_steps
                .iter()
                .fold(0.0_f64, |m, s| m.max(s.abs())),
        );
        row.refinements = report.refinements;
        row.stable = Some(report.winding == 0);
        Ok(row)
    };
    match attempt() {
        Ok(r) => r,
        Err(e) => {
            row.error = Some(e.to_string());
            row
        }
    }
}

/// Run the (gamma, Mach) sweep. Points are independent and evaluated in
/// parallel; the output order is deterministic (gamma-major, then Mach).
pub fn sweep(
    gamma_list: &[f64],
    mach_min: f64,
    mach_max: f64,
    n_mach: usize,
    opts: &SweepOptions,
) -> Result<SweepTable> {
    if !(1.01..=1e4).contains(&mach_min) || !(1.01..=1e4).contains(&mach_max) {
        return Err(Error::Domain(format!(
            "mach range [{mach_min}, {mach_max}] outside [1.01, 1e4]"
        )));
    }
    let machs = mach_grid(mach_min, mach_max, n_mach, opts.log_scale);
    let configs: Vec<(f64, f64)> = gamma_list
        .iter()
        .flat_map(|g| machs.iter().map(move |m| (*g, *m)))
        .collect();

    let work = |configs: &[(f64, f64)]| -> Vec<SweepRow> {
        configs
            .par_iter()
            .map(|(g, m)| sweep_point(*g, *m, opts))
            .collect()
    };
    let rows = match opts.jobs {
        Some(n) if n > 0 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            pool.install(|| work(&configs))
        }
        _ => work(&configs),
    };
    Ok(SweepTable { rows })
}
