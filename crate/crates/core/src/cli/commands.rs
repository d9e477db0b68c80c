use rayon::prelude::*;

use super::args::{
    EigenArgs, EigenMode, LzRunArgs, LzSweepArgs, PulseArgs, StirapLevelsArgs, StirapRunArgs, StirapSweepArgs,
};
use super::output::{Cell, Table};
use super::CliError;
use crate::dynamics::{project_on_branch, BranchCoordinate};
use crate::lz::{adiabatic_branch, run_equal_slope, sweep_alpha, LZConfig};
use crate::model::ModelParams;
use crate::stationary::{
    continue_branch, find_stationary_states, ContinuationOptions, SearchConfig, SearchOutcome, StationaryState, Sweep,
    SweepParam,
};
use crate::stirap::{dark_branch, run_stirap, stirap_levels, sweep_g, PulseConfig, StirapConfig};

pub struct Report {
    pub table: Table,
    pub diagnostics: Vec<String>,
}

fn usage(e: crate::Error) -> CliError {
    CliError::Usage(e.to_string())
}

fn numerical(e: crate::Error) -> CliError {
    CliError::Numerical(e.to_string())
}

fn state_cells(s: &StationaryState) -> [Cell; 4] {
    let [a2, b2, c2] = s.populations();
    [s.mu.into(), a2.into(), b2.into(), c2.into()]
}

pub fn eigen(a: &EigenArgs, tol: Option<f64>) -> Result<Report, CliError> {
    let eps = a.eps.values();
    let base = ModelParams::new(eps[0], a.delta, a.v, a.w, a.g).map_err(usage)?;
    let mut search = SearchConfig::default().with_method(a.method.into());
    if let Some(t) = tol {
        search.tol = t;
    }
    let mut table = Table::new(&["epsilon", "branch_id", "mu", "a2", "b2", "c2", "classification", "fold_flag"]);
    let mut diagnostics = Vec::new();

    match a.mode {
        EigenMode::Scan => {
            let outcomes: Vec<SearchOutcome> = eps
                .par_iter()
                .map(|&e| find_stationary_states(&base.with_epsilon(e), &search))
                .collect();
            // in a scan a fold shows up as a change in the number of states
            let mut previous = None;
            for (&e, o) in eps.iter().zip(&outcomes) {
                let n = o.states.len();
                if n == 0 {
                    diagnostics.push(format!("no stationary state found at epsilon = {e}"));
                }
                let fold = previous.is_some_and(|p| p != n);
                previous = Some(n);
                for (id, s) in o.states.iter().enumerate() {
                    let mut row = vec![e.into(), id.into()];
                    row.extend(state_cells(s));
                    row.push(s.classification.as_str().into());
                    row.push(usize::from(fold).into());
                    table.push(row);
                }
            }
        }
        EigenMode::Continue => {
            let (from, to) = (eps[0], eps[eps.len() - 1]);
            if from == to {
                return Err(CliError::Usage("continuation needs an epsilon range with min != max".into()));
            }
            let start = base.with_epsilon(from);
            let seeds = find_stationary_states(&start, &search).states;
            let mut options = ContinuationOptions::default();
            if eps.len() > 1 {
                options.max_step = options.max_step.min((to - from).abs() / (eps.len() - 1) as f64);
                options.initial_step = options.initial_step.min(options.max_step);
            }
            if let Some(t) = tol {
                options.newton_tol = t;
            }
            let sweep = Sweep {
                param: SweepParam::Epsilon,
                from,
                to,
            };
            let branches: Vec<_> = seeds
                .par_iter()
                .map(|seed| continue_branch(seed, &start, &sweep, &options))
                .collect();
            for (id, branch) in branches.into_iter().enumerate() {
                let branch = match branch {
                    Ok(b) => b,
                    Err(e) => {
                        diagnostics.push(format!("branch {id}: {e}"));
                        continue;
                    }
                };
                if let Some(f) = &branch.failure {
                    diagnostics.push(format!("branch {id} stopped at epsilon = {}: {}", f.at, f.reason));
                }
                for &f in &branch.folds {
                    diagnostics.push(format!("branch {id} folds at epsilon = {f}"));
                }
                for (k, p) in branch.points.iter().enumerate() {
                    let mut row = vec![p.value.into(), id.into()];
                    row.extend(state_cells(&p.state));
                    row.push(p.state.classification.as_str().into());
                    row.push(usize::from(branch.fold_indices.contains(&k)).into());
                    table.push(row);
                }
            }
        }
    }
    if table.rows.is_empty() {
        return Err(CliError::Numerical("no stationary states found".into()));
    }
    Ok(Report { table, diagnostics })
}

pub fn lz_run(a: &LzRunArgs, tol: Option<f64>) -> Result<Report, CliError> {
    let mut config = LZConfig::new(a.delta, a.v, a.w, a.g, a.alpha);
    config.epsilon_span = a.span;
    config.branch = a.branch.into();
    config.samples = a.samples;
    if let Some(t) = tol {
        config.tol = t;
    }
    config.validate().map_err(usage)?;

    let result = run_equal_slope(&config).map_err(numerical)?;
    let traj = &result.trajectory;
    let mut diagnostics = vec![
        format!("P = {}", result.p),
        format!("survival |a|^2 = {}", result.survival),
        format!("max norm deviation = {:e}", result.max_norm_deviation),
    ];
    let overlaps = match adiabatic_branch(&config) {
        Ok(branch) => {
            for f in &branch.folds {
                diagnostics.push(format!("initial branch folds at epsilon = {f}"));
            }
            project_on_branch(traj, &branch, BranchCoordinate::Param(SweepParam::Epsilon))
        }
        Err(e) => {
            diagnostics.push(format!("branch continuation failed: {e}"));
            vec![None; traj.len()]
        }
    };

    let mut table = Table::new(&["t", "epsilon", "a2", "b2", "c2", "norm_dev", "branch_overlap"]);
    for i in 0..traj.len() {
        let [a2, b2, c2] = traj.populations[i];
        table.push(vec![
            traj.times[i].into(),
            traj.parameters[i].epsilon.into(),
            a2.into(),
            b2.into(),
            c2.into(),
            traj.norm_deviation[i].into(),
            overlaps[i].into(),
        ]);
    }
    Ok(Report { table, diagnostics })
}

pub fn lz_sweep(a: &LzSweepArgs, tol: Option<f64>) -> Result<Report, CliError> {
    let alphas = a.alpha.values_with(a.spacing);
    if let Some(x) = alphas.iter().find(|x| !(**x > 0.0)) {
        return Err(CliError::Usage(format!("sweep rates must be positive, got {x}")));
    }
    let mut configs = Vec::new();
    for &g in &a.g.values() {
        for &w in &a.w.values() {
            let mut c = LZConfig::new(a.delta, a.v, w, g, alphas[0]);
            c.epsilon_span = a.span;
            c.branch = a.branch.into();
            if let Some(t) = tol {
                c.tol = t;
            }
            c.validate().map_err(usage)?;
            configs.push(c);
        }
    }

    let mut table = Table::new(&["alpha", "P", "P_lz_formula", "g", "w"]);
    let mut diagnostics = Vec::new();
    let mut any = false;
    for c in &configs {
        let sweep = sweep_alpha(c, &alphas).map_err(numerical)?;
        for p in &sweep.points {
            if let Some(e) = &p.error {
                diagnostics.push(format!("g = {}, w = {}, alpha = {}: {e}", c.g, c.w, p.alpha));
            }
            any |= p.p.is_some();
            table.push(vec![p.alpha.into(), p.p.into(), p.p_lz_formula.into(), c.g.into(), c.w.into()]);
        }
    }
    if !any {
        return Err(CliError::Numerical("every sweep point failed".into()));
    }
    Ok(Report { table, diagnostics })
}

fn pulses(a: &PulseArgs) -> PulseConfig {
    let d = PulseConfig::default();
    PulseConfig {
        peak: a.peak.unwrap_or(d.peak),
        width: a.width.unwrap_or(d.width),
        separation: a.separation.unwrap_or(d.separation),
        window: None,
    }
}

fn stirap_config(detuning: f64, g: f64, p: &PulseArgs, tol: Option<f64>) -> StirapConfig {
    let mut c = StirapConfig::new(detuning, g);
    c.pulses = pulses(p);
    if let Some(t) = tol {
        c.tol = t;
    }
    c
}

pub fn stirap_run(a: &StirapRunArgs, tol: Option<f64>) -> Result<Report, CliError> {
    let mut config = stirap_config(a.delta_detuning, a.g, &a.pulses, tol);
    config.samples = a.samples;
    config.validate().map_err(usage)?;
    let r = run_stirap(&config).map_err(numerical)?;
    let traj = &r.trajectory;
    let mut table = Table::new(&["t", "v", "w", "a2", "b2", "c2"]);
    for i in 0..traj.len() {
        let p = &traj.parameters[i];
        let [a2, b2, c2] = traj.populations[i];
        table.push(vec![
            traj.times[i].into(),
            p.v.into(),
            p.w.into(),
            a2.into(),
            b2.into(),
            c2.into(),
        ]);
    }
    let diagnostics = vec![
        format!("efficiency = {}", r.efficiency),
        format!("max norm deviation = {:e}", r.max_norm_deviation),
    ];
    Ok(Report { table, diagnostics })
}

pub fn stirap_sweep(a: &StirapSweepArgs, tol: Option<f64>) -> Result<Report, CliError> {
    let gs = a.g.values();
    let base = stirap_config(a.delta_detuning, gs[0], &a.pulses, tol);
    for &g in &gs {
        base.with_g(g).validate().map_err(usage)?;
    }
    let sweep = sweep_g(&base, &gs).map_err(numerical)?;
    let mut table = Table::new(&["g", "efficiency", "feasible", "horn_scenario"]);
    let mut diagnostics = Vec::new();
    for p in &sweep.points {
        if let Some(e) = &p.error {
            diagnostics.push(format!("g = {}: {e}", p.g));
        }
        table.push(vec![p.g.into(), p.efficiency.into(), p.feasible.into(), p.horn.as_str().into()]);
    }
    if sweep.points.iter().all(|p| p.efficiency.is_none()) {
        return Err(CliError::Numerical("every sweep point failed".into()));
    }
    Ok(Report { table, diagnostics })
}

pub fn stirap_levels_cmd(a: &StirapLevelsArgs, tol: Option<f64>) -> Result<Report, CliError> {
    let config = stirap_config(a.delta_detuning, a.g, &a.pulses, None);
    config.validate().map_err(usage)?;
    let times = match &a.times {
        Some(grid) => grid.values(),
        None => {
            let (t0, t1) = config.pulses.window();
            super::args::Grid::Range {
                min: t0,
                max: t1,
                count: 201,
            }
            .values()
        }
    };
    let mut search = SearchConfig::default().with_method(a.method.into());
    if let Some(t) = tol {
        search.tol = t;
    }
    let levels = stirap_levels(&config, &times, &search).map_err(usage)?;

    let mut diagnostics = Vec::new();
    match dark_branch(&config) {
        Ok(d) => match d.disappearance {
            Some(t) => diagnostics.push(format!("dark branch disappears at t = {t}")),
            None => diagnostics.push("dark branch persists through the pulses".into()),
        },
        Err(e) => diagnostics.push(format!("dark branch continuation failed: {e}")),
    }

    let mut table = Table::new(&["t", "level_id", "mu", "a2", "b2", "c2", "classification"]);
    for set in &levels {
        for (id, s) in set.outcome.states.iter().enumerate() {
            let mut row = vec![set.t.into(), id.into()];
            row.extend(state_cells(s));
            row.push(s.classification.as_str().into());
            table.push(row);
        }
    }
    if table.rows.is_empty() {
        return Err(CliError::Numerical("no stationary states found".into()));
    }
    Ok(Report { table, diagnostics })
}
