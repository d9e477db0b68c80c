//! Transfer efficiency of nonlinear STIRAP and its breakdown once the
//! nonlinearity exceeds the detuning.

use tripwell::stirap::{run_stirap, sweep_g, StirapConfig};

fn main() -> tripwell::Result<()> {
    let config = StirapConfig::new(0.1, 0.05);
    let r = run_stirap(&config)?;
    let (t0, t1) = config.pulses.window();
    println!(
        "g = 0.05: efficiency {:.6} over t in [{t0:.0}, {t1:.0}], norm drift {:.1e}",
        r.efficiency, r.max_norm_deviation
    );

    let gs: Vec<f64> = (-6..=6).map(|i| i as f64 * 0.05).collect();
    let sweep = sweep_g(&config, &gs)?;
    for p in &sweep.points {
        println!(
            "g = {:5.2}  efficiency {:.4}  feasible {:5}  {}",
            p.g,
            p.efficiency.unwrap_or(f64::NAN),
            p.feasible,
            p.horn.as_str()
        );
    }
    Ok(())
}
