//! The full winding pipeline for one strong shock: indented semicircle sized
//! by the high-frequency bound, adaptive Evans evaluation, argument-principle
//! count, and the contour/image figure.
//!
//! ```bash
//! cargo run --release --example winding_semicircle
//! ```

use evanshock::artifact::{write_text, EffectiveConfig};
use evanshock::evans::EvansSystem;
use evanshock::model::ShockParams;
use evanshock::svg::{emit_svg, SvgDataset};
use evanshock::winding::{build_contour, run_contour, ContourRunOptions, MAX_ARG_STEP};
use std::path::Path;

fn main() -> evanshock::Result<()> {
    let params = ShockParams::new(5.0 / 3.0, 1e-4)?;
    println!(
        "shock: gamma = 5/3, v_plus = 1e-4 (Mach {:.0})",
        params.mach
    );

    let system = EvansSystem::new(&params, 12.0, 12.0, 1e-6)?;
    let contour = build_contour(params.gamma, 60, 1.1, 1e-4);
    println!(
        "contour: radius {:.4} (1.1 x high-frequency bound), {} points, indentation r0 = {:.0e}",
        contour.radius,
        contour.n_distinct(),
        contour.indentation_radius
    );

    let report = run_contour(&system, &contour, &ContourRunOptions::default())?;
    let max_step = report
        .arg_steps
        .iter()
        .fold(0.0_f64, |m, s| m.max(s.abs()));
    println!(
        "winding number = {} over {} evaluated points ({} refinements); max |d arg D| = {:.4} < pi/25 = {:.4}",
        report.winding,
        report.d_values.len() - 1,
        report.refinements,
        max_step,
        MAX_ARG_STEP
    );
    println!(
        "=> {} unstable eigenvalues inside the contour; spectral stability {}",
        report.winding,
        if report.stable { "corroborated" } else { "FAILS" }
    );

    let mut config = EffectiveConfig::new("winding_semicircle");
    config.push_float("gamma", params.gamma);
    config.push_float("v_plus", params.v_plus);
    config.push_int("points", contour.n_distinct() as i64);
    let contour_pts: Vec<(f64, f64)> = report.contour.points.iter().map(|z| (z.re, z.im)).collect();
    let image_pts: Vec<(f64, f64)> = report.d_values.iter().map(|z| (z.re, z.im)).collect();
    let svg = emit_svg(
        &SvgDataset::ContourPair {
            contour: &contour_pts,
            image: &image_pts,
        },
        &config,
    )?;
    let out = Path::new("artifacts/winding_semicircle/contour_pair.svg");
    write_text(out, &svg)?;
    println!("wrote {}", out.display());
    Ok(())
}
