//! Solve a strong-shock traveling-wave profile and check the closed-form
//! exponential decay bounds that hold for the `vhat(0) = v_plus + 1/12`
//! centering.
//!
//! ```bash
//! cargo run --release --example profile_decay
//! ```

use evanshock::artifact::{fmt_float, write_text, CsvArtifact, EffectiveConfig};
use evanshock::model::{solve_profile, validate_profile_decay, ShockParams};
use std::path::Path;

fn main() -> evanshock::Result<()> {
    let params = ShockParams::new(5.0 / 3.0, 1e-4)?;
    println!(
        "shock: gamma = {}, v_plus = {:.1e}, a = {:.6e}, Mach = {:.1}",
        params.gamma, params.v_plus, params.a, params.mach
    );

    let profile = solve_profile(&params, 12.0, 1e-6)?;
    println!(
        "profile on [-12, 12]: {} nodes, vhat(0) = {:.12} (centered at v_plus + 1/12)",
        profile.n_nodes(),
        profile.value_at_origin()
    );
    println!(
        "endstate gaps: 1 - vhat(-12) = {:.3e}, vhat(12) - v_plus = {:.3e}",
        1.0 - profile.eval(-12.0),
        profile.eval(12.0) - params.v_plus
    );

    let report = validate_profile_decay(&profile)?;
    println!(
        "decay bounds sampled at {} points: worst margin {:.3e} at x = {:.3}",
        report.n_samples, report.worst_margin, report.worst_x
    );

    let mut config = EffectiveConfig::new("profile_decay");
    config.push_float("gamma", params.gamma);
    config.push_float("v_plus", params.v_plus);
    let rows = profile
        .nodes()
        .map(|(x, v, d)| vec![fmt_float(x), fmt_float(v), fmt_float(d)])
        .collect();
    let csv = CsvArtifact {
        header: vec!["x".into(), "vhat".into(), "vhat_prime".into()],
        rows,
        config,
    };
    let out = Path::new("artifacts/profile_decay/profile.csv");
    write_text(out, &csv.render())?;
    println!("wrote {}", out.display());
    Ok(())
}
