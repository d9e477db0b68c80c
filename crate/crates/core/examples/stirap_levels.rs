//! Instantaneous levels during the pulses and the point where the dark state
//! merges with the horn level.

use tripwell::stationary::SearchConfig;
use tripwell::stirap::{dark_branch, stirap_levels, StirapConfig};

fn main() -> tripwell::Result<()> {
    for g in [0.05, 0.2] {
        let config = StirapConfig::new(0.1, g);
        let times: Vec<f64> = (-4..=4).map(|i| i as f64 * 200.0).collect();
        println!("g = {g}");
        for set in stirap_levels(&config, &times, &SearchConfig::default())? {
            let mus: Vec<String> = set.outcome.states.iter().map(|s| format!("{:.4}", s.mu)).collect();
            println!("  t = {:6.0}  v = {:.4}  w = {:.4}  mu = [{}]", set.t, set.params.v, set.params.w, mus.join(", "));
        }
        let dark = dark_branch(&config)?;
        match dark.disappearance {
            Some(t) => println!("  dark state disappears at t = {t:.1}"),
            None => println!(
                "  dark state survives, final populations {:.4?}",
                dark.branch.points.last().map(|p| p.state.populations())
            ),
        }
    }
    Ok(())
}
