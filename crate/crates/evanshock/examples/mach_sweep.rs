//! Desk-scale (gamma, Mach) stability sweep: log-spaced Mach numbers from
//! 1.6 into the hypersonic regime, winding number per point, evaluated in
//! parallel with deterministic output order.
//!
//! ```bash
//! cargo run --release --example mach_sweep
//! ```

use evanshock::artifact::{fmt_float, write_text, CsvArtifact, EffectiveConfig};
use evanshock::winding::{sweep, SweepOptions};
use std::path::Path;

fn main() -> evanshock::Result<()> {
    let gammas = [1.4, 5.0 / 3.0];
    let opts = SweepOptions {
        n_points: 40,
        ..Default::default()
    };
    let table = sweep(&gammas, 1.6, 3000.0, 8, &opts)?;

    println!("gamma     mach        v_plus      L-     L+     winding  refinements");
    let mut rows = Vec::new();
    for row in &table.rows {
        println!(
            "{:<8.4}  {:<10.3}  {:<10.3e}  {:<5.1}  {:<5.1}  {:<7}  {}",
            row.gamma,
            row.mach,
            row.v_plus.unwrap_or(f64::NAN),
            row.l_minus.unwrap_or(f64::NAN),
            row.l_plus.unwrap_or(f64::NAN),
            row.winding.map(|w| w.to_string()).unwrap_or_else(|| "-".into()),
            row.refinements
        );
        rows.push(vec![
            fmt_float(row.gamma),
            fmt_float(row.mach),
            row.v_plus.map(fmt_float).unwrap_or_default(),
            row.winding.map(|w| w.to_string()).unwrap_or_default(),
        ]);
    }
    println!(
        "all stable: {} (any unstable: {}, any failed: {})",
        table.all_stable(),
        table.any_unstable(),
        table.any_failed()
    );

    let mut config = EffectiveConfig::new("mach_sweep");
    config.push_str("gamma_list", "1.4;1.6667");
    config.push_int("n_mach", 8);
    let csv = CsvArtifact {
        header: vec!["gamma".into(), "mach".into(), "vplus".into(), "winding".into()],
        rows,
        config,
    };
    let out = Path::new("artifacts/mach_sweep/sweep.csv");
    write_text(out, &csv.render())?;
    println!("wrote {}", out.display());
    Ok(())
}
