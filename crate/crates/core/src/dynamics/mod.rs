//! Time evolution of `i d(psi)/dt = H(|psi|^2; t) psi` with adaptive
//! Dormand-Prince 5(4) steps and dense sampling on a uniform output grid.
//!
//! Integration runs in the frame co-rotating with the diagonal of `H`:
//! `psi_j = exp(-i theta_j) phi_j` with `theta_j' = H_jj`, so that `phi`
//! only feels the couplings. The equations for `phi` conserve the norm
//! exactly; the norm is never corrected during integration, its drift is
//! recorded and a run is rejected when it exceeds the configured bound.

mod integrator;
mod schedule;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use schedule::{ParameterSchedule, ScheduleFn};

use crate::error::{Error, Result};
use crate::model::{ModelParams, StateVector};
use crate::stationary::{refine_stationary, EigenBranch, SweepParam};
use integrator::dp5_step;

const NORM_WEIGHT: f64 = 1000.0;
const ROUNDOFF: f64 = 1e-15;

/// `(Re phi_0, Im phi_0, Re phi_1, Im phi_1, Re phi_2, Im phi_2, theta_0, theta_1, theta_2)`
type Frame = [f64; 9];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagateOptions {
    /// Local error tolerance per unit time.
    pub tol: f64,
    /// Number of output samples, including both end points.
    pub samples: usize,
    pub norm_bound: f64,
    pub max_steps: u64,
    /// Initial step; chosen from the local frequency when `None`.
    pub initial_step: Option<f64>,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            samples: 2000,
            norm_bound: 1e-9,
            max_steps: 500_000_000,
            initial_step: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub populations: Vec<[f64; 3]>,
    pub norm_deviation: Vec<f64>,
    /// Instantaneous parameters at each sample.
    pub parameters: Vec<ModelParams>,
    /// Largest norm deviation seen at any internal step.
    pub max_norm_deviation: f64,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &StateVector {
        self.states.last().expect("trajectories hold at least two samples")
    }
}

fn rhs(schedule: &ParameterSchedule) -> impl Fn(f64, &Frame) -> Frame + '_ {
    move |t, y| {
        let p = schedule.at(t);
        let phi = [0, 1, 2].map(|j| Complex64::new(y[2 * j], y[2 * j + 1]));
        let e01 = Complex64::from_polar(1.0, y[6] - y[7]);
        let e12 = Complex64::from_polar(1.0, y[7] - y[8]);
        // -i times the rotated coupling terms
        let minus_i = |z: Complex64| Complex64::new(z.im, -z.re);
        let d0 = minus_i(p.v * e01 * phi[1]);
        let d1 = minus_i(p.v * e01.conj() * phi[0] + p.w * e12 * phi[2]);
        let d2 = minus_i(p.w * e12.conj() * phi[1]);
        [
            d0.re,
            d0.im,
            d1.re,
            d1.im,
            d2.re,
            d2.im,
            p.epsilon + p.g * phi[0].norm_sqr(),
            p.g * phi[1].norm_sqr(),
            p.delta + p.g * phi[2].norm_sqr(),
        ]
    }
}

fn to_frame(psi: &[Complex64; 3]) -> Frame {
    [psi[0].re, psi[0].im, psi[1].re, psi[1].im, psi[2].re, psi[2].im, 0.0, 0.0, 0.0]
}

fn from_frame(y: &Frame) -> [Complex64; 3] {
    [0, 1, 2].map(|j| Complex64::new(y[2 * j], y[2 * j + 1]) * Complex64::from_polar(1.0, -y[6 + j]))
}

fn norm_sqr(y: &Frame) -> f64 {
    y[..6].iter().map(|x| x * x).sum()
}

/// Integrates from `t0` to `t1` with per-step tolerance `tol` and the other
/// options at their defaults.
pub fn propagate(initial: &StateVector, schedule: &ParameterSchedule, t0: f64, t1: f64, tol: f64) -> Result<Trajectory> {
    propagate_with(
        initial,
        schedule,
        t0,
        t1,
        &PropagateOptions {
            tol,
            ..Default::default()
        },
    )
}

pub fn propagate_with(
    initial: &StateVector,
    schedule: &ParameterSchedule,
    t0: f64,
    t1: f64,
    options: &PropagateOptions,
) -> Result<Trajectory> {
    if !(t0.is_finite() && t1.is_finite()) || t1 <= t0 {
        return Err(Error::InvalidConfig(format!("need t1 > t0, got [{t0}, {t1}]")));
    }
    if !(options.tol > 0.0 && options.tol.is_finite()) {
        return Err(Error::InvalidConfig(format!("tolerance must be positive, got {}", options.tol)));
    }
    if options.samples < 2 {
        return Err(Error::InvalidConfig("need at least two output samples".into()));
    }
    schedule.validate()?;
    let n0 = initial.norm_sqr();
    if (n0 - 1.0).abs() > crate::model::NORM_TOLERANCE {
        return Err(Error::NotNormalized { norm_sqr: n0 });
    }

    let f = rhs(schedule);
    let grid: Vec<f64> = (0..options.samples)
        .map(|i| {
            if i + 1 == options.samples {
                t1
            } else {
                t0 + (t1 - t0) * i as f64 / (options.samples - 1) as f64
            }
        })
        .collect();

    let mut traj = Trajectory {
        times: Vec::with_capacity(grid.len()),
        states: Vec::with_capacity(grid.len()),
        populations: Vec::with_capacity(grid.len()),
        norm_deviation: Vec::with_capacity(grid.len()),
        parameters: Vec::with_capacity(grid.len()),
        max_norm_deviation: (n0 - 1.0).abs(),
        accepted_steps: 0,
        rejected_steps: 0,
    };
    let record = |traj: &mut Trajectory, t: f64, y: &Frame| {
        let s = StateVector::from_amplitudes_unchecked(from_frame(y));
        traj.times.push(t);
        traj.populations.push(s.populations());
        traj.norm_deviation.push((s.norm_sqr() - 1.0).abs());
        traj.parameters.push(schedule.at(t));
        traj.states.push(s);
    };

    let mut t = t0;
    let mut y = to_frame(&initial.amplitudes());
    let mut fy = f(t, &y);
    record(&mut traj, t, &y);
    let mut next_sample = 1;

    let mut h = options.initial_step.unwrap_or_else(|| {
        let p = schedule.at(t0);
        let freq = p.epsilon.abs() + p.delta.abs() + p.v.abs() + p.w.abs() + p.g.abs() + 1e-3;
        0.01 / freq
    });
    let h_min = 1e-12 * (t0.abs().max(t1.abs()).max(1.0));
    let mut steps = 0u64;
    while next_sample < grid.len() {
        if steps >= options.max_steps {
            return Err(Error::NotConverged {
                what: "propagation",
                iterations: steps as usize,
                residual: t1 - t,
            });
        }
        steps += 1;
        let last = t + h >= t1;
        let h_try = if last { t1 - t } else { h };
        let step = dp5_step(&f, t, &y, &fy, h_try);
        // the exact flow keeps the norm, so its change is a local error too
        let norm_change = ((norm_sqr(&step.y_new) - norm_sqr(&y)).abs() - ROUNDOFF).max(0.0);
        let error = step.error.iter().fold(NORM_WEIGHT * norm_change, |m, e| m.max(e.abs())) / (options.tol * h_try);
        if !error.is_finite() || !step.y_new.iter().all(|x| x.is_finite()) {
            traj.rejected_steps += 1;
            h = h_try * 0.2;
            if h < h_min {
                return Err(Error::BlowUp { t_last: t });
            }
            continue;
        }
        if error > 1.0 {
            traj.rejected_steps += 1;
            h = h_try * (0.9 * error.powf(-0.25)).max(0.2);
            if h < h_min {
                return Err(Error::StepUnderflow { t });
            }
            continue;
        }
        let t_new = if last { t1 } else { t + h_try };
        let dev = (norm_sqr(&step.y_new) - 1.0).abs();
        traj.max_norm_deviation = traj.max_norm_deviation.max(dev);
        if dev > options.norm_bound {
            return Err(Error::NormDrift {
                deviation: dev,
                bound: options.norm_bound,
                t: t_new,
            });
        }
        while next_sample < grid.len() && grid[next_sample] <= t_new {
            let ts = grid[next_sample];
            let ys = if ts == t_new { step.y_new } else { step.dense.eval((ts - t) / h_try) };
            record(&mut traj, ts, &ys);
            next_sample += 1;
        }
        traj.accepted_steps += 1;
        t = t_new;
        y = step.y_new;
        fy = step.f_new;
        let grow = if error == 0.0 { 5.0 } else { (0.9 * error.powf(-0.25)).clamp(0.2, 5.0) };
        if !last || h_try >= h {
            h = h_try * grow;
        }
    }
    Ok(traj)
}

/// Which coordinate of the trajectory parametrizes a branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchCoordinate {
    Param(SweepParam),
    Time,
}

/// Squared overlap of each sample with the branch state at the sample's
/// parameter value. `None` where the value lies outside the branch before
/// its first fold.
pub fn project_on_branch(traj: &Trajectory, branch: &EigenBranch, coordinate: BranchCoordinate) -> Vec<Option<f64>> {
    (0..traj.len())
        .map(|i| {
            let params = traj.parameters[i];
            let lambda = match coordinate {
                BranchCoordinate::Param(p) => p.get(&params),
                BranchCoordinate::Time => traj.times[i],
            };
            let guess = branch.state_at(lambda)?;
            // polish the interpolated state, keeping it on this branch
            let u = match refine_stationary(guess, &params, 1e-11) {
                Ok(s) if overlap_real(&s.amplitudes(), &guess) > 0.999 => s.amplitudes(),
                _ => guess,
            };
            let psi = traj.states[i].amplitudes();
            let amp: Complex64 = (0..3).map(|k| psi[k] * u[k]).sum();
            Some(amp.norm_sqr())
        })
        .collect()
}

fn overlap_real(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]).abs()
}
