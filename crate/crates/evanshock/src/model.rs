//! Shock parameterization, Rankine-Hugoniot algebra, Mach conversions, the
//! profile ODE, and exponential decay validation.
//!
//! Everything works in the rescaled variables where the left endstate is
//! `v_minus = 1` and the shock sits at the origin. A shock is determined by
//! the pair `(gamma, v_plus)`; the Rankine-Hugoniot coefficient
//! `a = v_plus^gamma (1 - v_plus) / (1 - v_plus^gamma)` and the Mach number
//! `M = 1 / sqrt(gamma a)` are derived.

use crate::error::{Error, Result};
use crate::ode::{self, OdeOptions};

/// Fixed left endstate of the rescaled system.
pub const V_MINUS: f64 = 1.0;

/// Centering value used for strong shocks: `vhat(0) = v_plus + 1/12`,
/// which makes the closed-form decay bounds apply verbatim.
pub const STRONG_CENTERING_OFFSET: f64 = 1.0 / 12.0;

/// Rankine-Hugoniot coefficient together with the weak-shock-limit flag.
#[derive(Clone, Copy, Debug)]
pub struct RhCoefficient {
    pub a: f64,
    /// Set when `v_plus` is within 1e-12 of 1 and the analytic limit `1/gamma`
    /// was returned instead of the (0/0-adjacent) formula.
    pub weak_shock_limit: bool,
}

/// a = v_plus^gamma (1 - v_plus) / (1 - v_plus^gamma), evaluated stably.
pub fn rh_coefficient(gamma: f64, v_plus: f64) -> Result<RhCoefficient> {
    if !(gamma >= 1.0) {
        return Err(Error::Domain(format!("gamma = {gamma} must be >= 1")));
    }
    if !(v_plus > 0.0) || v_plus >= 1.0 {
        return Err(Error::Domain(format!(
            "v_plus = {v_plus} must lie in (0, 1)"
        )));
    }
    if 1.0 - v_plus < 1e-12 {
        return Ok(RhCoefficient {
            a: 1.0 / gamma,
            weak_shock_limit: true,
        });
    }
    // 1 - v^gamma = -expm1(gamma ln v) avoids cancellation for gamma near 1
    // and for v near 1.
    let ln_v = v_plus.ln();
    let one_minus_pow = -(gamma * ln_v).exp_m1();
    let a = (gamma * ln_v).exp() * (1.0 - v_plus) / one_minus_pow;
    Ok(RhCoefficient {
        a,
        weak_shock_limit: false,
    })
}

/// M = 1 / sqrt(gamma a).
pub fn mach_number(gamma: f64, a: f64) -> f64 {
    1.0 / (gamma * a).sqrt()
}

/// Invert the Mach relation for `v_plus` by bracketed bisection on
/// `ln v_plus`, seeded by the hypersonic asymptotic
/// `v_plus ~ (gamma M^2)^(-1/gamma)`.
pub fn vplus_from_mach(gamma: f64, mach: f64) -> Result<f64> {
    if mach < 1.0 {
        return Err(Error::Domain(format!(
            "mach = {mach} must be >= 1 (no shock below Mach 1)"
        )));
    }
    if mach == 1.0 {
        return Ok(1.0 - 1e-13);
    }
    // target: gamma * a(v) = 1 / M^2; a is strictly increasing in v
    let target = 1.0 / (mach * mach);
    let f = |ln_v: f64| -> Result<f64> {
        let v = ln_v.exp();
        Ok(gamma * rh_coefficient(gamma, v)?.a - target)
    };
    let seed = -(gamma * mach * mach).ln() / gamma;
    let mut lo = seed - 3.0;
    let mut hi = (seed + 3.0).min((1.0 - 1e-13_f64).ln());
    for _ in 0..200 {
        if f(lo)? < 0.0 {
            break;
        }
        lo -= 3.0;
    }
    for _ in 0..200 {
        if f(hi)? > 0.0 {
            break;
        }
        hi = (hi + 3.0).min((1.0 - 1e-13_f64).ln());
        if hi >= (1.0 - 1e-13_f64).ln() {
            break;
        }
    }
    if !(f(lo)? < 0.0 && f(hi)? >= 0.0) {
        return Err(Error::Domain(format!(
            "failed to bracket v_plus for gamma = {gamma}, mach = {mach}"
        )));
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        if hi - lo < 1e-14 {
            break;
        }
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid.exp())
}

/// The pair (gamma, v_plus) plus derived quantities; the single source of
/// truth for one shock.
///
/// Derived invariants: `v_plus^gamma / gamma <= a <= v_plus^gamma` and
/// `mach^2 * gamma * a = 1`.
#[derive(Clone, Copy, Debug)]
pub struct ShockParams {
    pub gamma: f64,
    pub v_plus: f64,
    pub a: f64,
    pub mach: f64,
    pub weak_shock_limit: bool,
}

impl ShockParams {
    pub fn new(gamma: f64, v_plus: f64) -> Result<Self> {
        let rh = rh_coefficient(gamma, v_plus)?;
        Ok(ShockParams {
            gamma,
            v_plus,
            a: rh.a,
            mach: mach_number(gamma, rh.a),
            weak_shock_limit: rh.weak_shock_limit,
        })
    }

    pub fn from_mach(gamma: f64, mach: f64) -> Result<Self> {
        let v_plus = vplus_from_mach(gamma, mach)?;
        Self::new(gamma, v_plus)
    }

    /// Non-fatal observations: physical-range warnings and limit flags.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.gamma > 3.0 {
            w.push(format!(
                "gamma = {} outside the usual physical range [1, 3]",
                self.gamma
            ));
        }
        if self.weak_shock_limit {
            w.push("weak-shock limit: a evaluated as 1/gamma".to_string());
        }
        w
    }
}

/// Pointwise coefficient functions of the model at a profile value `vhat`.
///
/// `h_rhs` is the profile equation right-hand side (the H(v, v_plus) of the
/// decay estimates), `cap_h = h(vhat) vhat^(-gamma)` is the bounded weight
/// whose supremum is `gamma (1-v_plus)/(1-v_plus^gamma)`, and
/// `f = vhat - cap_h` enters the first-order eigenvalue system. The two "H"s
/// are distinct objects; they are kept apart by name here.
#[derive(Clone, Copy, Debug)]
pub struct Coefficients {
    pub h_rhs: f64,
    pub h: f64,
    pub cap_h: f64,
    pub f: f64,
}

pub fn coefficient_functions(vhat: f64, params: &ShockParams) -> Result<Coefficients> {
    if vhat < params.v_plus - 1e-12 || vhat > 1.0 + 1e-12 {
        return Err(Error::Domain(format!(
            "vhat = {vhat} outside [v_plus, 1] = [{}, 1]",
            params.v_plus
        )));
    }
    Ok(coefficients_unchecked(vhat, params))
}

pub(crate) fn coefficients_unchecked(vhat: f64, params: &ShockParams) -> Coefficients {
    let (gamma, a) = (params.gamma, params.a);
    let ln_v = vhat.ln();
    let pow_neg_gamma_m1 = (-gamma * ln_v).exp_m1();
    let pow_gamma = (gamma * ln_v).exp();
    let h = -vhat * pow_gamma + a * (gamma - 1.0) + (a + 1.0) * pow_gamma;
    let cap_h = -vhat + a * (gamma - 1.0) * (pow_neg_gamma_m1 + 1.0) + (a + 1.0);
    let f = vhat - cap_h;
    Coefficients {
        h_rhs: profile_rhs(vhat, params),
        h,
        cap_h,
        f,
    }
}

/// (1 - x^gamma) / (1 - x) for x in (0, 1], continuous through x = 1 where
/// the limit is gamma. Takes values in [1, gamma].
fn power_ratio(x: f64, gamma: f64) -> f64 {
    let d = x - 1.0;
    if d.abs() < 1e-9 {
        gamma * (1.0 + 0.5 * (gamma - 1.0) * d * (1.0 + (gamma - 2.0) * d / 3.0))
    } else {
        (gamma * x.ln()).exp_m1() / d
    }
}

/// Profile ODE right-hand side `v' = v (v - 1 + a (v^(-gamma) - 1))`.
///
/// Evaluated through factored forms that carry an explicit `(v - v_plus)` or
/// `(v - 1)` factor, so the value is accurate relative to the distance from
/// the nearer endstate instead of merely in absolute terms.
pub fn profile_rhs(vhat: f64, params: &ShockParams) -> f64 {
    let (gamma, v_plus, a) = (params.gamma, params.v_plus, params.a);
    if vhat <= 0.5 * (1.0 + v_plus) {
        // H = (v - v_plus) (v - c * ratio(v_plus / v)), c = (1-v_plus)/(1-v_plus^gamma)
        let c = (1.0 - v_plus) / (-(gamma * v_plus.ln()).exp_m1());
        (vhat - v_plus) * (vhat - c * power_ratio(v_plus / vhat, gamma))
    } else {
        // H = v (v - 1) (1 + a q(v)), q = (v^(-gamma) - 1)/(v - 1)
        let d = vhat - 1.0;
        let q = if d.abs() < 1e-9 {
            -gamma * (1.0 - 0.5 * (gamma + 1.0) * d)
        } else {
            (-gamma * d.ln_1p()).exp_m1() / d
        };
        vhat * d * (1.0 + a * q)
    }
}

/// Fixed-step RK4 value of the profile flow starting at `v0` after `delta`
/// units of x. Independent of any stored interpolant; used as a reference
/// micro-trajectory by diagnostics and oracles.
pub fn profile_flow(v0: f64, delta: f64, n_steps: usize, params: &ShockParams) -> f64 {
    let h = delta / n_steps as f64;
    let mut v = v0;
    for _ in 0..n_steps {
        let k1 = profile_rhs(v, params);
        let k2 = profile_rhs(v + 0.5 * h * k1, params);
        let k3 = profile_rhs(v + 0.5 * h * k2, params);
        let k4 = profile_rhs(v + h * k3, params);
        v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    v
}

/// How the profile was pinned at x = 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Centering {
    /// `vhat(0) = v_plus + 1/12` (applies when `v_plus <= 1/12`); the
    /// closed-form decay bounds hold verbatim for this choice.
    StrongShock,
    /// `vhat(0) = (1 + v_plus)/2` for milder shocks.
    Midpoint,
}

/// Dense representation of the traveling-wave profile on `[-L, L]`:
/// a cubic Hermite interpolant through solver nodes whose derivatives are
/// set exactly from the profile equation.
#[derive(Clone, Debug)]
pub struct ShockProfile {
    pub params: ShockParams,
    pub half_length: f64,
    pub centering: Centering,
    /// Node positions, ascending.
    xs: Vec<f64>,
    /// Node values, strictly decreasing.
    vs: Vec<f64>,
    /// Node derivatives, exactly `h_rhs(v)`.
    dvs: Vec<f64>,
    /// max |h_rhs| over the nodes; reference scale for residual checks.
    deriv_scale: f64,
    /// Set when integration overshot an endstate and nodes were clamped back
    /// into `(v_plus, 1)`.
    pub clamped: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct ProfileOptions {
    /// Requested local error tolerance. Integration always runs at least as
    /// tight as 1e-14 relative (the interpolant consistency demands it); the
    /// user-facing role of `tol` is the endstate-reach requirement
    /// (gap at +/-L must be <= 10*tol or sit in the exponential tail).
    pub tol: f64,
    /// Interpolant self-consistency target: |p'(x) - h_rhs(p(x))| must stay
    /// below `interp_tol * (|h_rhs| + 0.01 * max|h_rhs|)` at off-node
    /// checkpoints; enforced by node refinement.
    pub interp_tol: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions {
            tol: 1e-6,
            interp_tol: 1e-8,
        }
    }
}

pub fn solve_profile(params: &ShockParams, half_length: f64, tol: f64) -> Result<ShockProfile> {
    solve_profile_with(
        params,
        half_length,
        &ProfileOptions {
            tol,
            ..Default::default()
        },
    )
}

pub fn solve_profile_with(
    params: &ShockParams,
    half_length: f64,
    opts: &ProfileOptions,
) -> Result<ShockProfile> {
    if !(half_length > 0.0) {
        return Err(Error::Domain(format!(
            "half_length = {half_length} must be positive"
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Domain(format!("tol = {} must be positive", opts.tol)));
    }
    let (centering, v0) = if params.v_plus <= STRONG_CENTERING_OFFSET {
        (Centering::StrongShock, params.v_plus + STRONG_CENTERING_OFFSET)
    } else {
        (Centering::Midpoint, 0.5 * (1.0 + params.v_plus))
    };

    // One tight pass per side: consecutive nodes then sit on the numerical
    // flow through their predecessor to ~1e-14 relative, which is what the
    // interpolant derivative-consistency requirement needs.
    let ode_opts = OdeOptions {
        atol: 1e-16,
        rtol: opts.tol.min(1e-14),
        h_max: 3e-3,
        h_init: Some(1e-4),
        max_steps: 10_000_000,
        ..Default::default()
    };
    let p = *params;
    let rhs = move |_x: f64, v: &f64| profile_rhs(*v, &p);

    let fwd = ode::integrate(rhs, 0.0, half_length, v0, &ode_opts)?;
    let bwd = ode::integrate(rhs, 0.0, -half_length, v0, &ode_opts)?;

    // backward nodes run 0 -> -L; reverse them, drop the duplicate origin,
    // then append the forward sweep to get one ascending list
    let mut xs: Vec<f64> = bwd.xs.clone();
    let mut vs: Vec<f64> = bwd.ys.clone();
    xs.reverse();
    vs.reverse();
    xs.pop();
    vs.pop();
    xs.extend_from_slice(&fwd.xs);
    vs.extend_from_slice(&fwd.ys);

    // clamp into the open interval and force strict monotonicity
    let mut clamped = false;
    let lo = params.v_plus;
    let hi = 1.0;
    for v in vs.iter_mut() {
        if *v <= lo {
            *v = lo + (hi - lo) * 1e-15;
            clamped = true;
        }
        if *v >= hi {
            *v = hi - (hi - lo) * 1e-15;
            clamped = true;
        }
    }
    for i in 1..vs.len() {
        if vs[i] >= vs[i - 1] {
            // shrink the headroom above v_plus geometrically so long clamped
            // tails never cross the endstate
            vs[i] = lo + (vs[i - 1] - lo) * (1.0 - 1e-12);
            clamped = true;
        }
    }

    let dvs: Vec<f64> = vs.iter().map(|v| profile_rhs(*v, &p)).collect();
    let deriv_scale = dvs.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    let mut profile = ShockProfile {
        params: p,
        half_length,
        centering,
        xs,
        vs,
        dvs,
        deriv_scale,
        clamped,
    };

    profile.refine_interpolant(opts.interp_tol)?;
    profile.check_endstate_reach(opts.tol)?;
    Ok(profile)
}

impl ShockProfile {
    /// Profile value at x, clamped to the node range beyond the endpoints.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.vs[0];
        }
        if x >= self.xs[n - 1] {
            return self.vs[n - 1];
        }
        let i = match self
            .xs
            .binary_search_by(|probe| probe.partial_cmp(&x).expect("finite"))
        {
            Ok(i) => return self.vs[i],
            Err(i) => i - 1,
        };
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        let (v0, v1, d0, d1) = (self.vs[i], self.vs[i + 1], self.dvs[i], self.dvs[i + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * v0
            + (t3 - 2.0 * t2 + t) * h * d0
            + (-2.0 * t3 + 3.0 * t2) * v1
            + (t3 - t2) * h * d1
    }

    /// Derivative of the interpolant at x (zero beyond the endpoints).
    pub fn eval_deriv(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] || x >= self.xs[n - 1] {
            return 0.0;
        }
        let i = match self
            .xs
            .binary_search_by(|probe| probe.partial_cmp(&x).expect("finite"))
        {
            Ok(i) => return self.dvs[i],
            Err(i) => i - 1,
        };
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        let (v0, v1, d0, d1) = (self.vs[i], self.vs[i + 1], self.dvs[i], self.dvs[i + 1]);
        let t2 = t * t;
        ((6.0 * t2 - 6.0 * t) * v0
            + (3.0 * t2 - 4.0 * t + 1.0) * h * d0
            + (-6.0 * t2 + 6.0 * t) * v1
            + (3.0 * t2 - 2.0 * t) * h * d1)
            / h
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.xs
            .iter()
            .zip(&self.vs)
            .zip(&self.dvs)
            .map(|((x, v), d)| (*x, *v, *d))
    }

    pub fn n_nodes(&self) -> usize {
        self.xs.len()
    }

    pub fn value_at_origin(&self) -> f64 {
        self.eval(0.0)
    }

    /// Derivative-consistency residual scale: |h_rhs| plus a floor tied to
    /// the global derivative magnitude, below which a pointwise relative
    /// comparison is numerically meaningless.
    fn residual_scale(&self, want: f64) -> f64 {
        want.abs() + 0.01 * self.deriv_scale
    }

    /// Insert nodes until the interpolant derivative agrees with the profile
    /// equation at off-node checkpoints.
    fn refine_interpolant(&mut self, interp_tol: f64) -> Result<()> {
        // checkpoints where the cubic-Hermite derivative error peaks
        const CHECK: [f64; 2] = [0.21132486540518713, 0.7886751345948129];
        const MIN_SPLIT_H: f64 = 2.5e-4;
        let tight = OdeOptions {
            atol: 1e-16,
            rtol: 1e-14,
            h_max: 3e-3,
            h_init: Some(1e-5),
            ..Default::default()
        };
        let p = self.params;
        let rhs = move |_x: f64, v: &f64| profile_rhs(*v, &p);

        for _sweep in 0..30 {
            let mut split_mids: Vec<(usize, f64, f64)> = Vec::new();
            for i in 0..self.xs.len() - 1 {
                let (x0, x1) = (self.xs[i], self.xs[i + 1]);
                let h = x1 - x0;
                if h < MIN_SPLIT_H {
                    continue;
                }
                let mut needs_split = false;
                for frac in CHECK {
                    let xq = x0 + frac * h;
                    let pv = self.eval(xq);
                    let pd = self.eval_deriv(xq);
                    let want = profile_rhs(pv, &p);
                    if (pd - want).abs() > interp_tol * self.residual_scale(want) {
                        needs_split = true;
                        break;
                    }
                }
                if needs_split {
                    let xm = 0.5 * (x0 + x1);
                    let vm = ode::integrate_to(rhs, x0, xm, self.vs[i], &tight)?;
                    let vm = vm.clamp(
                        self.vs[i + 1].min(self.vs[i]),
                        self.vs[i].max(self.vs[i + 1]),
                    );
                    split_mids.push((i, xm, vm));
                }
            }
            if split_mids.is_empty() {
                return Ok(());
            }
            let n_new = self.xs.len() + split_mids.len();
            let mut xs = Vec::with_capacity(n_new);
            let mut vs = Vec::with_capacity(n_new);
            let mut it = split_mids.into_iter().peekable();
            for i in 0..self.xs.len() {
                xs.push(self.xs[i]);
                vs.push(self.vs[i]);
                if let Some(&(idx, xm, vm)) = it.peek() {
                    if idx == i {
                        xs.push(xm);
                        vs.push(vm);
                        it.next();
                    }
                }
            }
            self.xs = xs;
            self.dvs = vs.iter().map(|v| profile_rhs(*v, &p)).collect();
            self.vs = vs;
        }
        Err(Error::Integrator {
            x: f64::NAN,
            reason: "profile interpolant refinement did not converge".into(),
        })
    }

    /// A gap at +/-L passes if it is below 10*tol outright, or if the profile
    /// has entered its exponential tail there (one more 10% of domain shrinks
    /// the gap substantially), i.e. the truncation is as good as this L allows.
    fn check_endstate_reach(&self, tol: f64) -> Result<()> {
        let l = self.half_length;
        let quick = 10.0 * tol;
        let gap_right = (self.eval(l) - self.params.v_plus).abs();
        let gap_left = (self.eval(-l) - V_MINUS).abs();
        let inner_right = (self.eval(0.9 * l) - self.params.v_plus).abs();
        let inner_left = (self.eval(-0.9 * l) - V_MINUS).abs();
        let ok = |gap: f64, inner: f64| gap <= quick || gap < 0.8 * inner;
        if ok(gap_right, inner_right) && ok(gap_left, inner_left) {
            return Ok(());
        }
        Err(Error::DomainTooShort {
            half_length: l,
            gap_left,
            gap_right,
            threshold: quick,
            suggested: suggested_half_length(tol),
        })
    }
}

/// Closed-form decay bounds at |x| = l for the strong-shock centering:
/// right gap <= (1/12) e^{-3l/4}, left gap <= (1/4) e^{(12-l)/2}.
pub fn decay_bounds(l: f64) -> (f64, f64) {
    (
        STRONG_CENTERING_OFFSET * (-0.75 * l).exp(),
        0.25 * (0.5 * (12.0 - l)).exp(),
    )
}

/// Half-length at which both closed-form bounds drop below 10*tol.
fn suggested_half_length(tol: f64) -> f64 {
    let thr = 10.0 * tol;
    let right = -(thr / STRONG_CENTERING_OFFSET).ln() / 0.75;
    let left = 12.0 - 2.0 * (thr / 0.25).ln();
    right.max(left).max(12.0)
}

/// Report of the profile decay validation against the closed-form bounds.
#[derive(Clone, Debug)]
pub struct DecayReport {
    /// Bounds apply only to the strong-shock centering.
    pub applicable: bool,
    /// Minimum over samples of (bound - gap); nonnegative means every sampled
    /// bound holds, and anything above -1e-6 still passes.
    pub worst_margin: f64,
    pub worst_x: f64,
    pub n_samples: usize,
    pub violations: Vec<f64>,
}

/// Check the sampled decay bounds
/// |vhat(x) - v_plus| <= (1/12) e^{-3x/4} for x >= 0 and
/// |vhat(x) - 1| <= (1/4) e^{(x+12)/2} for x <= 0.
pub fn validate_profile_decay(profile: &ShockProfile) -> Result<DecayReport> {
    if profile.centering != Centering::StrongShock {
        return Ok(DecayReport {
            applicable: false,
            worst_margin: f64::INFINITY,
            worst_x: f64::NAN,
            n_samples: 0,
            violations: Vec::new(),
        });
    }
    let l = profile.half_length;
    let n = 2001;
    let mut worst_margin = f64::INFINITY;
    let mut worst_x = 0.0;
    let mut violations = Vec::new();
    for k in 0..n {
        let x = -l + 2.0 * l * (k as f64) / ((n - 1) as f64);
        let v = profile.eval(x);
        let (gap, bound) = if x >= 0.0 {
            (
                (v - profile.params.v_plus).abs(),
                STRONG_CENTERING_OFFSET * (-0.75 * x).exp(),
            )
        } else {
            ((v - V_MINUS).abs(), 0.25 * (0.5 * (x + 12.0)).exp())
        };
        let margin = bound - gap;
        if margin < worst_margin {
            worst_margin = margin;
            worst_x = x;
        }
        if margin < -1e-6 {
            violations.push(x);
        }
    }
    if !violations.is_empty() {
        return Err(Error::DecayViolation {
            worst_margin,
            offenders: violations,
        });
    }
    Ok(DecayReport {
        applicable: true,
        worst_margin,
        worst_x,
        n_samples: n,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rh_gamma_one_reduces_to_vplus() {
        let rh = rh_coefficient(1.0, 0.5).unwrap();
        assert!((rh.a - 0.5).abs() < 1e-15);
        assert!(!rh.weak_shock_limit);
    }

    #[test]
    fn rh_weak_shock_limit_flagged() {
        let rh = rh_coefficient(1.4, 1.0 - 1e-13).unwrap();
        assert!(rh.weak_shock_limit);
        assert!((rh.a - 1.0 / 1.4).abs() < 1e-15);
    }

    #[test]
    fn rh_strong_shock_value() {
        // direct evaluation for gamma = 5/3, v_plus = 1e-4
        let rh = rh_coefficient(5.0 / 3.0, 1e-4).unwrap();
        assert!(
            (rh.a - 2.1542e-7).abs() / 2.1542e-7 < 1e-3,
            "a = {}",
            rh.a
        );
    }

    #[test]
    fn rh_domain_errors() {
        assert!(rh_coefficient(1.4, 0.0).is_err());
        assert!(rh_coefficient(1.4, 1.0).is_err());
        assert!(rh_coefficient(1.4, 1.5).is_err());
        assert!(rh_coefficient(0.9, 0.5).is_err());
    }

    #[test]
    fn mach_reference_points() {
        let p = ShockParams::new(5.0 / 3.0, 1e-4).unwrap();
        assert!((p.mach - 1669.0).abs() / 1669.0 < 0.01, "M = {}", p.mach);
        let p = ShockParams::new(1.4, 9e-6).unwrap();
        assert!((p.mach - 2877.0).abs() / 2877.0 < 0.01, "M = {}", p.mach);
    }

    #[test]
    fn mach_tends_to_one_in_weak_limit() {
        let p = ShockParams::new(2.3, 1.0 - 1e-13).unwrap();
        assert!((p.mach - 1.0).abs() < 1e-6);
    }

    #[test]
    fn mach_inverse_roundtrip() {
        for (gamma, v_plus) in [(1.0, 0.3), (1.4, 9e-6), (5.0 / 3.0, 1e-4), (3.0, 0.07)] {
            let p = ShockParams::new(gamma, v_plus).unwrap();
            let back = vplus_from_mach(gamma, p.mach).unwrap();
            assert!(
                (back - v_plus).abs() / v_plus < 1e-10,
                "gamma={gamma} v={v_plus} back={back}"
            );
        }
    }

    #[test]
    fn mach_inverse_rejects_subsonic() {
        assert!(vplus_from_mach(1.4, 0.5).is_err());
    }

    #[test]
    fn coefficients_vanish_at_endstates() {
        for (gamma, v_plus) in [(1.0, 0.5), (5.0 / 3.0, 1e-4), (3.0, 1e-4), (2.0, 0.3)] {
            let p = ShockParams::new(gamma, v_plus).unwrap();
            let at_plus = coefficient_functions(v_plus, &p).unwrap();
            let at_minus = coefficient_functions(1.0, &p).unwrap();
            assert!(at_plus.h_rhs.abs() <= 1e-14, "h_rhs(v+) = {}", at_plus.h_rhs);
            assert!(at_minus.h_rhs.abs() <= 1e-14, "h_rhs(1) = {}", at_minus.h_rhs);
            // h(1) = a*gamma, up to the absolute rounding of (a+1) - 1
            assert!((at_minus.h - p.a * gamma).abs() <= 1e-14);
        }
    }

    #[test]
    fn cap_h_supremum_at_v_plus() {
        let p = ShockParams::new(2.0, 1e-3).unwrap();
        let sup = coefficient_functions(p.v_plus, &p).unwrap().cap_h;
        let expect = p.gamma * (1.0 - p.v_plus) / (1.0 - p.v_plus.powf(p.gamma));
        assert!((sup - expect).abs() < 1e-10);
        assert!(sup <= p.gamma + 1e-12);
        // strictly decreasing on a sample
        let mut prev = sup;
        for k in 1..=100 {
            let v = p.v_plus + (1.0 - p.v_plus) * k as f64 / 100.0;
            let ch = coefficient_functions(v.min(1.0), &p).unwrap().cap_h;
            assert!(ch < prev);
            prev = ch;
        }
    }

    #[test]
    fn h_rhs_negative_between_endstates() {
        for (gamma, v_plus) in [(1.0, 0.5), (1.4, 0.01), (3.0, 1e-4)] {
            let p = ShockParams::new(gamma, v_plus).unwrap();
            for k in 1..200 {
                let v = v_plus + (1.0 - v_plus) * k as f64 / 200.0;
                assert!(profile_rhs(v, &p) < 0.0, "H({v}) >= 0 at gamma={gamma}");
            }
        }
    }

    #[test]
    fn profile_midpoint_centering() {
        let p = ShockParams::new(1.0, 0.5).unwrap();
        let prof = solve_profile(&p, 12.0, 1e-8).unwrap();
        assert_eq!(prof.centering, Centering::Midpoint);
        assert!((prof.value_at_origin() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn profile_strong_shock_reaches_endstates() {
        let p = ShockParams::new(5.0 / 3.0, 1e-4).unwrap();
        let prof = solve_profile(&p, 12.0, 1e-6).unwrap();
        assert_eq!(prof.centering, Centering::StrongShock);
        assert!((prof.value_at_origin() - (1e-4 + 1.0 / 12.0)).abs() < 1e-12);
        assert!((prof.eval(12.0) - p.v_plus).abs() < 1.1e-5);
        assert!((prof.eval(-12.0) - 1.0).abs() < 0.25);
        // strictly decreasing node values
        let mut prev = f64::INFINITY;
        for (_, v, _) in prof.nodes() {
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn profile_interpolant_derivative_consistency() {
        let p = ShockParams::new(5.0 / 3.0, 1e-4).unwrap();
        let prof = solve_profile(&p, 12.0, 1e-10).unwrap();
        let scale = prof.deriv_scale;
        // off-node sampling: scale-floored residual everywhere, and the plain
        // relative residual wherever the derivative is not exponentially small
        let mut worst_floored = 0.0_f64;
        let mut worst_rel = 0.0_f64;
        for k in 0..5000 {
            let x = -12.0 + 24.0 * (k as f64 + 0.431) / 5000.0;
            let pd = prof.eval_deriv(x);
            let want = profile_rhs(prof.eval(x), &p);
            let err = (pd - want).abs();
            worst_floored = worst_floored.max(err / (want.abs() + 0.01 * scale));
            if want.abs() >= 0.05 * scale {
                worst_rel = worst_rel.max(err / want.abs());
            }
        }
        assert!(worst_floored < 1e-8, "floored residual {worst_floored}");
        assert!(worst_rel < 1e-8, "relative residual {worst_rel}");
    }

    #[test]
    fn profile_tolerance_consistency() {
        let p = ShockParams::new(1.4, 1e-3).unwrap();
        let tol = 1e-8;
        let a = solve_profile(&p, 10.0, tol).unwrap();
        let b = solve_profile(&p, 10.0, tol / 10.0).unwrap();
        for k in 0..200 {
            let x = -10.0 + 20.0 * k as f64 / 199.0;
            assert!((a.eval(x) - b.eval(x)).abs() <= 10.0 * tol);
        }
    }

    #[test]
    fn profile_domain_too_short() {
        let p = ShockParams::new(5.0 / 3.0, 1e-4).unwrap();
        let err = solve_profile(&p, 2.0, 1e-10).unwrap_err();
        match err {
            Error::DomainTooShort { suggested, .. } => assert!(suggested >= 12.0),
            other => panic!("expected DomainTooShort, got {other:?}"),
        }
    }

    #[test]
    fn decay_validation_strong_shocks() {
        for gamma in [1.0, 2.0, 3.0] {
            let p = ShockParams::new(gamma, 1e-4).unwrap();
            let prof = solve_profile(&p, 12.0, 1e-8).unwrap();
            let report = validate_profile_decay(&prof).unwrap();
            assert!(report.applicable);
            assert!(
                report.worst_margin >= -1e-6,
                "gamma={gamma}: margin {}",
                report.worst_margin
            );
        }
    }

    #[test]
    fn decay_bound_tight_at_origin() {
        let p = ShockParams::new(2.0, 1e-4).unwrap();
        let prof = solve_profile(&p, 12.0, 1e-8).unwrap();
        let gap = (prof.value_at_origin() - p.v_plus).abs();
        assert!((gap - 1.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn decay_validation_edge_of_applicability() {
        let p = ShockParams::new(3.0, 1.0 / 12.0).unwrap();
        let prof = solve_profile(&p, 14.0, 1e-8).unwrap();
        assert_eq!(prof.centering, Centering::StrongShock);
        let report = validate_profile_decay(&prof).unwrap();
        assert!(report.applicable);
        assert!(report.worst_margin >= -1e-6);
    }

    #[test]
    fn decay_not_applicable_for_midpoint_centering() {
        let p = ShockParams::new(1.4, 0.5).unwrap();
        let prof = solve_profile(&p, 10.0, 1e-8).unwrap();
        let report = validate_profile_decay(&prof).unwrap();
        assert!(!report.applicable);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig { cases: 64, ..Default::default() })]

        #[test]
        fn params_invariants(gamma in 1.0_f64..3.0, lv in -10.0_f64..-0.01) {
            // a = v_plus^gamma / psi with psi = (1-v_plus^gamma)/(1-v_plus) in [1, gamma],
            // hence v_plus^gamma / gamma <= a <= v_plus^gamma (and a fortiori
            // a <= gamma v_plus^gamma).
            let v_plus = lv.exp();
            let p = ShockParams::new(gamma, v_plus).unwrap();
            let pow = v_plus.powf(gamma);
            proptest::prop_assert!(p.a >= pow / gamma * (1.0 - 1e-12));
            proptest::prop_assert!(p.a <= pow * (1.0 + 1e-12));
            proptest::prop_assert!((p.mach * p.mach * gamma * p.a - 1.0).abs() < 1e-12);
        }

        #[test]
        fn mach_roundtrip_prop(gamma in 1.0_f64..3.0, lv in -9.0_f64..-0.1) {
            let v_plus = lv.exp();
            let p = ShockParams::new(gamma, v_plus).unwrap();
            let back = vplus_from_mach(gamma, p.mach).unwrap();
            proptest::prop_assert!((back - v_plus).abs() / v_plus < 1e-10);
        }
    }
}
