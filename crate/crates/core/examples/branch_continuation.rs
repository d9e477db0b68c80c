//! Follows the lowest level through the loop that opens at strong attractive
//! nonlinearity and reports where it folds.

use tripwell::model::ModelParams;
use tripwell::stationary::{
    continue_branch, find_stationary_states, ContinuationOptions, SearchConfig, Sweep, SweepParam,
};

fn main() -> tripwell::Result<()> {
    let sweep = Sweep {
        param: SweepParam::Epsilon,
        from: -0.8,
        to: 0.8,
    };
    for g in [0.0, -0.03, -0.4] {
        let start = ModelParams::new(sweep.from, -0.4, 0.1, 0.2, g)?;
        let lowest = find_stationary_states(&start, &SearchConfig::default()).states[0];
        let branch = continue_branch(&lowest, &start, &sweep, &ContinuationOptions::default())?;
        println!("g = {g:5.2}: {} points, folds at {:?}", branch.points.len(), branch.folds);

        if let Some(&k) = branch.fold_indices.first() {
            let p = &branch.points[k];
            println!(
                "  first point past the fold: eps = {:.4}, mu = {:.5}, {}",
                p.value,
                p.state.mu,
                p.state.classification.as_str()
            );
        }
        if let Some(u) = branch.state_at(-0.5) {
            println!("  at eps = -0.5 the branch has populations {:.4?}", u.map(|x| x * x));
        }
    }
    Ok(())
}
