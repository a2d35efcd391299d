//! Closed-form stability conditions, the `g` energy-weight diagnostic, and
//! the amplitude-independent high-frequency bound.

use crate::error::Result;
use crate::model::{coefficients_unchecked, vplus_from_mach, ShockParams};

/// Which closed-form condition a report refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConditionKind {
    MnCondition,
    SharpCondition,
}

/// Outcome of evaluating one of the closed-form stability conditions.
#[derive(Clone, Copy, Debug)]
pub struct ConditionReport {
    pub lhs_value: f64,
    pub holds: bool,
    pub which: ConditionKind,
}

/// Small-amplitude stability condition: with `x = v_plus^(gamma+1)/(a gamma)`,
/// the shock is spectrally stable whenever
/// `x^2 + 2 (gamma-1) x - (gamma-1) >= 0`.
pub fn mn_condition(params: &ShockParams) -> ConditionReport {
    let g = params.gamma;
    let x = params.v_plus.powf(g + 1.0) / (params.a * g);
    let lhs = x * x + 2.0 * (g - 1.0) * x - (g - 1.0);
    ConditionReport {
        lhs_value: lhs,
        holds: lhs >= 0.0,
        which: ConditionKind::MnCondition,
    }
}

/// The quartic-in-v bracket shared by the sharp condition and the closed form
/// of `g`:
/// `(gamma+1) v^(gamma+2) + v^gamma (gamma-1) ((gamma+1) v - (a+1) gamma)^2
///  + a gamma (gamma^2-1)(gamma+2) v - a (a+1) gamma^2 (gamma^2-1)`.
fn sharp_bracket(v: f64, params: &ShockParams) -> f64 {
    let g = params.gamma;
    let a = params.a;
    let pow_g = v.powf(g);
    let lin = (g + 1.0) * v - (a + 1.0) * g;
    (g + 1.0) * pow_g * v * v
        + pow_g * (g - 1.0) * lin * lin
        + a * g * (g * g - 1.0) * (g + 2.0) * v
        - a * (a + 1.0) * g * g * (g * g - 1.0)
}

/// Sharp small-amplitude condition: the bracket evaluated at `v_plus` is
/// nonnegative. Sharp in the sense that where it fails, `g` dips negative
/// and the weighted-energy argument cannot close.
pub fn sharp_condition(params: &ShockParams) -> ConditionReport {
    let lhs = sharp_bracket(params.v_plus, params);
    ConditionReport {
        lhs_value: lhs,
        holds: lhs >= 0.0,
        which: ConditionKind::SharpCondition,
    }
}

/// The energy-estimate weight g(vhat), from its factored closed form
/// `g = -a vhat_x vhat^(gamma-1) / (2 h^3) * bracket`, with
/// `vhat_x vhat^(gamma-1) = a gamma - h(vhat)` substituted so no profile
/// solve is needed.
///
/// Returns exactly 0 at the endstates where `vhat_x` vanishes.
pub fn g_eval(vhat: f64, params: &ShockParams) -> f64 {
    if vhat <= params.v_plus || vhat >= 1.0 {
        return 0.0;
    }
    let c = coefficients_unchecked(vhat, params);
    let slope_term = params.a * params.gamma - c.h; // = vhat_x vhat^(gamma-1) < 0 inside
    -params.a * slope_term * sharp_bracket(vhat, params) / (2.0 * c.h * c.h * c.h)
}

/// Amplitude-independent bound: any unstable eigenvalue satisfies
/// `Re(lambda) + |Im(lambda)| <= (sqrt(gamma) + 1/2)^2`.
pub fn hf_bound(gamma: f64) -> f64 {
    let s = gamma.sqrt() + 0.5;
    s * s
}

/// Root of a condition's left-hand side along v_plus, with its Mach number.
#[derive(Clone, Copy, Debug)]
pub struct BoundaryPoint {
    pub v_plus_star: f64,
    pub mach_star: f64,
}

/// Locate the stability boundary of the chosen condition by bisection on
/// `v_plus in [1e-12, 1 - 1e-9]`. Returns `None` at gamma = 1 (or whenever
/// the condition holds over the whole bracket: no boundary to find).
pub fn stability_boundary(
    gamma: f64,
    which: ConditionKind,
    tol: f64,
) -> Result<Option<BoundaryPoint>> {
    let lhs = |v: f64| -> Result<f64> {
        let p = ShockParams::new(gamma, v)?;
        Ok(match which {
            ConditionKind::MnCondition => mn_condition(&p).lhs_value,
            ConditionKind::SharpCondition => sharp_condition(&p).lhs_value,
        })
    };
    let mut lo = 1e-12;
    let mut hi = 1.0 - 1e-9;
    if !(lhs(lo)? < 0.0 && lhs(hi)? > 0.0) {
        return Ok(None);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if lhs(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let v_star = 0.5 * (lo + hi);
    let p = ShockParams::new(gamma, v_star)?;
    Ok(Some(BoundaryPoint {
        v_plus_star: v_star,
        mach_star: p.mach,
    }))
}

/// v_plus along an iso-Mach curve, for overlaying Mach levels on the
/// boundary map.
pub fn iso_mach_vplus(gamma: f64, mach: f64) -> Result<f64> {
    vplus_from_mach(gamma, mach)
}
