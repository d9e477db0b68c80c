//! Time evolution: a stationary state only picks up a phase, and a slow ramp
//! of epsilon carries the lowest level along adiabatically.

use tripwell::dynamics::{propagate, project_on_branch, BranchCoordinate, ParameterSchedule};
use tripwell::model::{chemical_potential, ModelParams};
use tripwell::stationary::{
    continue_branch, find_stationary_states, ContinuationOptions, SearchConfig, Sweep, SweepParam,
};

fn main() -> tripwell::Result<()> {
    let params = ModelParams::new(-0.3, -0.4, 0.1, 0.2, -0.4)?;
    let ground = find_stationary_states(&params, &SearchConfig::default()).states[0];
    let traj = propagate(&ground.state, &ParameterSchedule::constant(&params), 0.0, 200.0, 1e-10)?;
    let last = traj.final_state();
    println!(
        "stationary start: mu = {:.8}, after t = 200 overlap {:.12}, mu = {:.8}, drift {:.1e}",
        ground.mu,
        last.overlap(&ground.state),
        chemical_potential(last, &params),
        traj.max_norm_deviation
    );

    // epsilon from -2 to -1 at rate 1e-3, well below any gap
    let schedule = ParameterSchedule::equal_slope(1e-3, -0.4, 0.1, 0.2, -0.4);
    let start = schedule.at(-2000.0);
    let initial = find_stationary_states(&start, &SearchConfig::default()).states[0];
    let traj = propagate(&initial.state, &schedule, -2000.0, -1000.0, 1e-10)?;
    let branch = continue_branch(
        &initial,
        &start,
        &Sweep {
            param: SweepParam::Epsilon,
            from: -2.0,
            to: -1.0,
        },
        &ContinuationOptions::default(),
    )?;
    let overlaps = project_on_branch(&traj, &branch, BranchCoordinate::Param(SweepParam::Epsilon));
    let worst = overlaps.iter().flatten().cloned().fold(1.0, f64::min);
    println!(
        "slow ramp: {} samples, {} accepted steps, smallest branch weight {worst:.6}",
        traj.len(),
        traj.accepted_steps
    );
    Ok(())
}
