//! Landau-Zener transition probability against sweep rate, linear and
//! nonlinear.

use tripwell::lz::{log_spaced, lz_formula, run_equal_slope, sweep_alpha, LZConfig};

fn main() -> tripwell::Result<()> {
    let linear = LZConfig::new(-0.4, 0.1, 0.2, 0.0, 0.01);
    println!("g = 0");
    for alpha in [0.01, 0.02, 0.05, 0.1] {
        let r = run_equal_slope(&linear.with_alpha(alpha))?;
        println!("  alpha = {alpha:<5} P = {:.6}  formula {:.6}", r.p, lz_formula(0.1, alpha)?);
    }

    let alphas = log_spaced(5e-3, 0.1, 8);
    for w in [0.2, 0.4] {
        let config = LZConfig::new(-0.4, 0.1, w, -0.4, alphas[0]);
        let sweep = sweep_alpha(&config, &alphas)?;
        println!("g = -0.4, w = {w}");
        for (alpha, p) in sweep.curve() {
            println!("  alpha = {alpha:.5} P = {p:.5}");
        }
    }
    Ok(())
}
