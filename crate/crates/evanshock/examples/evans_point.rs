//! Evaluate the Evans function at a single spectral point, with the
//! truncated-domain length estimates that justify the computational window.
//!
//! ```bash
//! cargo run --release --example evans_point
//! ```

use evanshock::evans::{domain_length, evaluate, EvansSystem, ShootOptions};
use evanshock::model::ShockParams;
use num_complex::Complex64;

fn main() -> evanshock::Result<()> {
    let params = ShockParams::new(5.0 / 3.0, 1e-4)?;
    println!(
        "monatomic-like shock: gamma = 5/3, v_plus = 1e-4, Mach = {:.1}",
        params.mach
    );

    let est = domain_length(1e-3, &params)?;
    println!(
        "domain-length estimates for theta = 1e-3: L- = {:.1}, L+ = {:.1} (Mach-based reading {:.1})",
        est.l_minus, est.l_plus, est.remark_l_plus
    );
    println!(
        "gap-lemma constants: C1 = {:.0}, eta = {:.4}, eta_hat = {:.4}",
        est.c1, est.eta, est.eta_hat
    );
    println!("note: {}", est.note);
    println!("convergence studies show L = 12 already gives ~1e-3 relative accuracy here;");

    let system = EvansSystem::new(&params, 12.0, 12.0, 1e-6)?;
    for lambda in [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.5, 1.5),
        Complex64::new(0.1, 3.0),
    ] {
        let value = evaluate(&system, lambda, &ShootOptions::default())?;
        println!(
            "D({:+.3} {:+.3}i) = {:+.6e} {:+.6e}i{}",
            lambda.re,
            lambda.im,
            value.d.re,
            value.d.im,
            if value.warnings.is_empty() {
                String::new()
            } else {
                format!("  [{}]", value.warnings.join("; "))
            }
        );
    }
    Ok(())
}
