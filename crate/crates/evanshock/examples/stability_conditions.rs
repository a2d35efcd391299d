//! The closed-form small-amplitude machinery: where the two energy-estimate
//! conditions hold, where the weight g(vhat) dips negative, and the
//! stability boundaries over gamma with iso-Mach overlays.
//!
//! ```bash
//! cargo run --release --example stability_conditions
//! ```

use evanshock::artifact::{write_text, EffectiveConfig};
use evanshock::bounds::{
    g_eval, hf_bound, iso_mach_vplus, mn_condition, sharp_condition, stability_boundary,
    ConditionKind,
};
use evanshock::model::ShockParams;
use evanshock::svg::{emit_svg, SvgDataset};
use std::path::Path;

fn main() -> evanshock::Result<()> {
    // weak shock: both conditions hold
    let weak = ShockParams::new(1.4, 0.9)?;
    println!(
        "gamma=1.4, v+=0.9 (M = {:.3}): mn lhs = {:+.4e}, sharp lhs = {:+.4e}",
        weak.mach,
        mn_condition(&weak).lhs_value,
        sharp_condition(&weak).lhs_value
    );

    // strong shock: both fail, g dips below zero near v_plus
    let strong = ShockParams::new(2.0, 1e-4)?;
    println!(
        "gamma=2.0, v+=1e-4 (M = {:.0}): mn holds = {}, sharp holds = {}",
        strong.mach,
        mn_condition(&strong).holds,
        sharp_condition(&strong).holds
    );
    let mut g_curve = Vec::new();
    let mut min_g = (f64::INFINITY, 0.0);
    for k in 1..4000 {
        let t = k as f64 / 4000.0;
        let v = strong.v_plus * (1.0 / strong.v_plus).powf(t);
        let g = g_eval(v.min(1.0 - 1e-12), &strong);
        g_curve.push((v, g));
        if g < min_g.0 {
            min_g = (g, v);
        }
    }
    println!(
        "g dips to {:.4e} at vhat = {:.4e} (high-frequency bound there: {:.4})",
        min_g.0,
        min_g.1,
        hf_bound(strong.gamma)
    );

    let mut config = EffectiveConfig::new("stability_conditions");
    config.push_float("gamma", strong.gamma);
    config.push_float("v_plus", strong.v_plus);
    let svg = emit_svg(
        &SvgDataset::GCurve {
            points: &g_curve,
            label: "g(vhat), gamma = 2, v+ = 1e-4".into(),
        },
        &config,
    )?;
    write_text(Path::new("artifacts/stability_conditions/g_dip.svg"), &svg)?;

    // boundary curves over gamma, with iso-Mach overlays
    let mut mn_curve = Vec::new();
    let mut sharp_curve = Vec::new();
    for k in 0..=60 {
        let gamma = 1.01 + (3.0 - 1.01) * k as f64 / 60.0;
        if let (Some(mn), Some(sh)) = (
            stability_boundary(gamma, ConditionKind::MnCondition, 1e-12)?,
            stability_boundary(gamma, ConditionKind::SharpCondition, 1e-12)?,
        ) {
            mn_curve.push((gamma, mn.v_plus_star));
            sharp_curve.push((gamma, sh.v_plus_star));
        }
    }
    let mut iso = Vec::new();
    for mach in [2.0, 5.0, 10.0] {
        let mut curve = Vec::new();
        for k in 0..=60 {
            let gamma = 1.01 + (3.0 - 1.01) * k as f64 / 60.0;
            curve.push((gamma, iso_mach_vplus(gamma, mach)?));
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
    let out = Path::new("artifacts/stability_conditions/boundaries.svg");
    write_text(out, &svg)?;
    println!("wrote {}", out.display());
    Ok(())
}
