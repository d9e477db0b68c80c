//! Equal-slope Landau-Zener sweeps `epsilon = alpha t` with fixed `delta`.
//!
//! The transition probability `P` is the weight of the final state on the
//! dressed diabatic level of well 1: the stationary state at the final
//! parameters obtained by Newton continuation from `(1, 0, 0)`. For large
//! `|epsilon|` this level carries almost all of `|a|^2`, so `P` agrees with
//! the bare survival `|a|^2` up to the admixture of the other wells, which
//! at a finite sweep span still oscillates in time. The bare value is
//! reported as `survival`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{propagate_with, ParameterSchedule, PropagateOptions, Trajectory};
use crate::error::{Error, Result};
use crate::model::{ModelParams, StateVector};
use crate::stationary::{
    continue_branch, linear_eigensystem, refine_stationary, ContinuationOptions, EigenBranch, StationaryState, Sweep,
    SweepParam,
};

/// `exp(-2 pi v^2 / alpha)`.
pub fn lz_formula(v: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("sweep rate must be positive, got {alpha}")));
    }
    if !v.is_finite() {
        return Err(Error::NonFinite("v"));
    }
    Ok((-std::f64::consts::TAU * v * v / alpha).exp())
}

/// Which level of the spectrum at the start of the sweep is populated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchSelector {
    #[default]
    Lowest,
    Middle,
    Highest,
}

impl BranchSelector {
    fn index(self) -> usize {
        match self {
            BranchSelector::Lowest => 0,
            BranchSelector::Middle => 1,
            BranchSelector::Highest => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LZConfig {
    pub delta: f64,
    pub v: f64,
    pub w: f64,
    pub g: f64,
    /// Sweep rate; negative rates run the sweep from `+span` to `-span`.
    pub alpha: f64,
    /// Half-width of the swept `epsilon` range; `None` selects
    /// `40 max(v, w, |g|, |delta|)`.
    pub epsilon_span: Option<f64>,
    pub branch: BranchSelector,
    pub tol: f64,
    pub samples: usize,
    /// Largest increment of `g` while preparing the initial state.
    pub g_step: f64,
}

impl LZConfig {
    pub fn new(delta: f64, v: f64, w: f64, g: f64, alpha: f64) -> Self {
        Self {
            delta,
            v,
            w,
            g,
            alpha,
            epsilon_span: None,
            branch: BranchSelector::Lowest,
            tol: 1e-11,
            samples: 2000,
            g_step: 0.05,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn default_span(&self) -> f64 {
        40.0 * self.v.abs().max(self.w.abs()).max(self.g.abs()).max(self.delta.abs())
    }

    pub fn span(&self) -> f64 {
        self.epsilon_span.unwrap_or_else(|| self.default_span())
    }

    /// `epsilon` at the start and the end of the sweep.
    pub fn epsilon_range(&self) -> (f64, f64) {
        let s = self.span() * self.alpha.signum();
        (-s, s)
    }

    /// Integration window `[t0, t1]`.
    pub fn time_window(&self) -> (f64, f64) {
        let t = self.span() / self.alpha.abs();
        (-t, t)
    }

    pub fn params_at_epsilon(&self, epsilon: f64) -> ModelParams {
        ModelParams {
            epsilon,
            delta: self.delta,
            v: self.v,
            w: self.w,
            g: self.g,
        }
    }

    pub fn schedule(&self) -> ParameterSchedule {
        ParameterSchedule::equal_slope(self.alpha, self.delta, self.v, self.w, self.g)
    }

    pub fn validate(&self) -> Result<()> {
        self.params_at_epsilon(0.0).validate()?;
        if !self.alpha.is_finite() || self.alpha == 0.0 {
            return Err(Error::InvalidConfig(format!("sweep rate must be nonzero, got {}", self.alpha)));
        }
        let span = self.span();
        if !(span.is_finite() && span > 0.0) {
            return Err(Error::InvalidConfig(format!("epsilon span must be positive, got {span}")));
        }
        if span < self.default_span() {
            return Err(Error::InvalidConfig(format!(
                "epsilon span {span} is below the truncation bound {}",
                self.default_span()
            )));
        }
        if !(self.tol > 0.0) || self.samples < 2 || !(self.g_step > 0.0) {
            return Err(Error::InvalidConfig("tol and g_step must be positive and samples >= 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LZResult {
    /// Weight on the dressed diabatic level of well 1 at the end of the sweep.
    pub p: f64,
    /// Bare `|a|^2` at the end of the sweep.
    pub survival: f64,
    pub final_populations: [f64; 3],
    pub max_norm_deviation: f64,
    pub initial: StationaryState,
    pub trajectory: Trajectory,
}

/// Stationary state on the selected branch at the start of the sweep, reached
/// from the linear eigenstate by raising `g` in steps of at most `g_step`.
pub fn prepare_initial_state(config: &LZConfig) -> Result<StationaryState> {
    config.validate()?;
    let (eps0, _) = config.epsilon_range();
    let target = config.params_at_epsilon(eps0);
    homotopy_in_g(linear_eigensystem(&target)[config.branch.index()], &target, config.g_step)
}

pub(crate) fn homotopy_in_g(linear: StationaryState, target: &ModelParams, g_step: f64) -> Result<StationaryState> {
    let steps = (target.g.abs() / g_step).ceil().max(1.0) as usize;
    let mut state = linear;
    for k in 1..=steps {
        let p = target.with_g(target.g * k as f64 / steps as f64);
        let next = refine_stationary(state.amplitudes(), &p, 1e-12)?;
        if next.state.overlap(&state.state) < 0.9 {
            return Err(Error::NotConverged {
                what: "initial-state homotopy",
                iterations: k,
                residual: 1.0 - next.state.overlap(&state.state),
            });
        }
        state = next;
    }
    Ok(state)
}

/// The dressed well-1 level at the given parameters.
pub fn diabatic_level(params: &ModelParams) -> Result<StationaryState> {
    refine_stationary([1.0, 0.0, 0.0], params, 1e-12)
}

/// Continuation of the initially populated branch over the swept range.
pub fn adiabatic_branch(config: &LZConfig) -> Result<EigenBranch> {
    let seed = prepare_initial_state(config)?;
    let (from, to) = config.epsilon_range();
    continue_branch(
        &seed,
        &config.params_at_epsilon(from),
        &Sweep {
            param: SweepParam::Epsilon,
            from,
            to,
        },
        &ContinuationOptions::default(),
    )
}

pub fn run_equal_slope(config: &LZConfig) -> Result<LZResult> {
    let initial = prepare_initial_state(config)?;
    let (t0, t1) = config.time_window();
    let options = PropagateOptions {
        tol: config.tol,
        samples: config.samples,
        ..Default::default()
    };
    let trajectory = propagate_with(&initial.state, &config.schedule(), t0, t1, &options)?;
    let last: &StateVector = trajectory.final_state();
    let (_, eps1) = config.epsilon_range();
    let level = diabatic_level(&config.params_at_epsilon(eps1))?;
    let p = last.overlap(&level.state).powi(2).clamp(0.0, 1.0);
    let final_populations = last.populations();
    Ok(LZResult {
        p,
        survival: final_populations[0].clamp(0.0, 1.0),
        final_populations,
        max_norm_deviation: trajectory.max_norm_deviation,
        initial,
        trajectory,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub alpha: f64,
    pub p: Option<f64>,
    pub survival: Option<f64>,
    pub p_lz_formula: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: LZConfig,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    /// `(alpha, P)` for the points that succeeded.
    pub fn curve(&self) -> Vec<(f64, f64)> {
        self.points.iter().filter_map(|p| p.p.map(|v| (p.alpha, v))).collect()
    }
}

/// Runs every rate independently on the current rayon pool. Output order
/// follows `alphas`; failed points are recorded and the sweep continues.
pub fn sweep_alpha(config: &LZConfig, alphas: &[f64]) -> Result<SweepResult> {
    if alphas.is_empty() {
        return Err(Error::InvalidConfig("empty list of sweep rates".into()));
    }
    if let Some(a) = alphas.iter().find(|a| !(**a > 0.0) || !a.is_finite()) {
        return Err(Error::Domain(format!("sweep rates must be positive, got {a}")));
    }
    config.with_alpha(alphas[0]).validate()?;
    let points = alphas
        .par_iter()
        .map(|&alpha| {
            let p_lz_formula = lz_formula(config.v, alpha).unwrap_or(f64::NAN);
            let cfg = LZConfig {
                samples: 2,
                ..config.with_alpha(alpha)
            };
            match run_equal_slope(&cfg) {
                Ok(r) => SweepPoint {
                    alpha,
                    p: Some(r.p),
                    survival: Some(r.survival),
                    p_lz_formula,
                    error: None,
                },
                Err(e) => SweepPoint {
                    alpha,
                    p: None,
                    survival: None,
                    p_lz_formula,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(SweepResult {
        config: *config,
        points,
    })
}

/// `n` log-spaced values from `min` to `max` inclusive.
pub fn log_spaced(min: f64, max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![min],
        _ => {
            let (a, b) = (min.ln(), max.ln());
            (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn formula_values() {
        assert_relative_eq!(lz_formula(0.1, 0.05).unwrap(), (-0.4 * std::f64::consts::PI).exp(), max_relative = 1e-15);
        assert_relative_eq!(lz_formula(0.1, 0.05).unwrap(), 0.2846, epsilon = 1e-4);
        assert_eq!(lz_formula(0.0, 0.3).unwrap(), 1.0);
        assert!(lz_formula(0.1, 1e-6).unwrap() < 1e-100);
        assert!(lz_formula(0.1, 0.0).is_err());
        assert!(lz_formula(0.1, -1.0).is_err());
    }

    #[test]
    fn default_span_and_window() {
        let c = LZConfig::new(-0.4, 0.1, 0.2, -0.4, 0.01);
        assert_eq!(c.span(), 16.0);
        assert_eq!(c.epsilon_range(), (-16.0, 16.0));
        assert_eq!(c.time_window(), (-1600.0, 1600.0));
        let m = LZConfig::new(0.4, 0.1, 0.2, 0.4, -0.01);
        assert_eq!(m.epsilon_range(), (16.0, -16.0));
        assert!(LZConfig {
            epsilon_span: Some(2.0),
            ..c
        }
        .validate()
        .is_err());
        assert!(c.with_alpha(0.0).validate().is_err());
    }

    #[test]
    fn initial_state_is_nonlinear_and_stationary() {
        let c = LZConfig::new(-0.4, 0.1, 0.2, -0.4, 0.01);
        let s = prepare_initial_state(&c).unwrap();
        assert!(s.residual < 1e-10);
        assert!(s.populations()[0] > 0.99);
        let lin = linear_eigensystem(&c.params_at_epsilon(-16.0))[0];
        assert!((s.mu - lin.mu).abs() > 0.3);
    }

    #[test]
    fn linear_sweep_matches_formula() {
        let c = LZConfig::new(-0.4, 0.1, 0.2, 0.0, 0.05);
        let r = run_equal_slope(&c).unwrap();
        let exact = lz_formula(0.1, 0.05).unwrap();
        assert!((r.p - exact).abs() / exact < 0.05, "{} {}", r.p, exact);
        assert!(r.max_norm_deviation <= 1e-9);
        assert!((0.0..=1.0).contains(&r.p));
    }

    #[test]
    fn sweep_keeps_order_and_records_failures() {
        let c = LZConfig::new(-0.4, 0.1, 0.2, 0.0, 0.1);
        let alphas = [0.1, 0.08];
        let out = sweep_alpha(&c, &alphas).unwrap();
        assert_eq!(out.points.iter().map(|p| p.alpha).collect::<Vec<_>>(), alphas);
        assert!(out.points.iter().all(|p| p.p.is_some()));
        assert!(sweep_alpha(&c, &[]).is_err());
        assert!(sweep_alpha(&c, &[0.1, -0.1]).is_err());
        let tight = LZConfig { tol: 1e-30, ..c };
        let failed = sweep_alpha(&tight, &[0.1]).unwrap();
        assert!(failed.points[0].error.is_some());
    }

    #[test]
    fn log_spacing() {
        let a = log_spaced(1e-3, 1e-1, 3);
        assert_relative_eq!(a[1], 1e-2, max_relative = 1e-14);
        assert_eq!(log_spaced(1.0, 2.0, 1), vec![1.0]);
    }
}
