//! Stimulated Raman adiabatic passage in the nonlinear three-level system.
//!
//! Both outer wells are detuned by `epsilon = delta = -Delta`; the couplings
//! are Gaussian pulses in counterintuitive order (`w` first). The system
//! starts in well 1 and the efficiency is the final population of well 3.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{propagate_with, ParameterSchedule, PropagateOptions, ScheduleFn, Trajectory};
use crate::error::{Error, Result};
use crate::model::{ModelParams, StateVector};
use crate::stationary::{
    continue_along, find_stationary_states, refine_stationary, ContinuationOptions, EigenBranch, SearchConfig,
    SearchOutcome,
};

/// Pulse tails at the window edges stay below this fraction of the peak.
pub const EDGE_FRACTION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseConfig {
    pub peak: f64,
    /// Standard deviation of each Gaussian.
    pub width: f64,
    /// `w` peaks at `-separation`, `v` at `+separation`.
    pub separation: f64,
    /// Integration window; `None` selects a symmetric window with tails at
    /// half of [`EDGE_FRACTION`] of the peak.
    pub window: Option<(f64, f64)>,
}

impl Default for PulseConfig {
    fn default() -> Self {
        Self {
            peak: 0.1,
            width: 400.0,
            separation: 160.0,
            window: None,
        }
    }
}

impl PulseConfig {
    pub fn window(&self) -> (f64, f64) {
        self.window.unwrap_or_else(|| {
            let half = self.separation + self.width * (2.0 * (2.0 / EDGE_FRACTION).ln()).sqrt();
            (-half, half)
        })
    }

    pub fn validate(&self) -> Result<()> {
        for (x, name) in [(self.peak, "peak"), (self.width, "width"), (self.separation, "separation")] {
            if !x.is_finite() {
                return Err(Error::NonFinite(name));
            }
            if x <= 0.0 {
                return Err(Error::InvalidConfig(format!("pulse {name} must be positive, got {x}")));
            }
        }
        let (t0, t1) = self.window();
        if !(t0.is_finite() && t1.is_finite() && t0 < t1) {
            return Err(Error::InvalidConfig(format!("invalid pulse window [{t0}, {t1}]")));
        }
        let bound = EDGE_FRACTION * self.peak;
        for t in [t0, t1] {
            let (v, w) = pulse_pair(t, self);
            if v >= bound || w >= bound {
                return Err(Error::InvalidConfig(format!(
                    "pulse tails at the window edge t = {t} exceed {EDGE_FRACTION:e} of the peak"
                )));
            }
        }
        Ok(())
    }
}

/// `(v(t), w(t))`.
pub fn pulse_pair(t: f64, pulses: &PulseConfig) -> (f64, f64) {
    let gauss = |center: f64| {
        let s = (t - center) / pulses.width;
        pulses.peak * (-0.5 * s * s).exp()
    };
    (gauss(pulses.separation), gauss(-pulses.separation))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HornScenario {
    NoHorn,
    SameSignHorn,
    OppositeSignHorn,
}

impl HornScenario {
    pub fn as_str(&self) -> &'static str {
        match self {
            HornScenario::NoHorn => "NoHorn",
            HornScenario::SameSignHorn => "SameSignHorn",
            HornScenario::OppositeSignHorn => "OppositeSignHorn",
        }
    }
}

/// Which horn-shaped nonlinear level is present before the pulses.
pub fn horn_scenario(g: f64, detuning: f64) -> HornScenario {
    let product = g * detuning;
    if g == 0.0 || product == 0.0 {
        HornScenario::NoHorn
    } else if product < 0.0 {
        HornScenario::OppositeSignHorn
    } else if detuning.abs() <= g.abs() {
        HornScenario::SameSignHorn
    } else {
        HornScenario::NoHorn
    }
}

/// Whether complete adiabatic transfer is possible: `g Delta >= 0` and
/// `|g| < |Delta|`.
pub fn stirap_feasible(g: f64, detuning: f64) -> bool {
    g * detuning >= 0.0 && g.abs() < detuning.abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StirapConfig {
    /// `Delta`, imposed as `epsilon = delta = -Delta`.
    pub detuning: f64,
    pub g: f64,
    pub pulses: PulseConfig,
    pub tol: f64,
    pub samples: usize,
}

impl StirapConfig {
    pub fn new(detuning: f64, g: f64) -> Self {
        Self {
            detuning,
            g,
            pulses: PulseConfig::default(),
            tol: 1e-10,
            samples: 2000,
        }
    }

    pub fn with_g(mut self, g: f64) -> Self {
        self.g = g;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.detuning.is_finite() {
            return Err(Error::NonFinite("detuning"));
        }
        if !self.g.is_finite() {
            return Err(Error::NonFinite("g"));
        }
        if !(self.tol > 0.0) || self.samples < 2 {
            return Err(Error::InvalidConfig("tol must be positive and samples >= 2".into()));
        }
        self.pulses.validate()
    }

    pub fn params_at(&self, t: f64) -> ModelParams {
        let (v, w) = pulse_pair(t, &self.pulses);
        ModelParams {
            epsilon: -self.detuning,
            delta: -self.detuning,
            v,
            w,
            g: self.g,
        }
    }

    pub fn schedule(&self) -> ParameterSchedule {
        let p = &self.pulses;
        ParameterSchedule {
            epsilon: ScheduleFn::constant(-self.detuning),
            delta: ScheduleFn::constant(-self.detuning),
            v: ScheduleFn::gaussian(p.peak, p.separation, p.width),
            w: ScheduleFn::gaussian(p.peak, -p.separation, p.width),
            g: self.g,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StirapResult {
    /// `|c|^2` at the end of the window.
    pub efficiency: f64,
    pub final_populations: [f64; 3],
    pub max_norm_deviation: f64,
    pub trajectory: Trajectory,
}

pub fn run_stirap(config: &StirapConfig) -> Result<StirapResult> {
    config.validate()?;
    let (t0, t1) = config.pulses.window();
    let options = PropagateOptions {
        tol: config.tol,
        samples: config.samples,
        ..Default::default()
    };
    let trajectory = propagate_with(&StateVector::basis(0), &config.schedule(), t0, t1, &options)?;
    let final_populations = trajectory.final_state().populations();
    Ok(StirapResult {
        efficiency: final_populations[2].clamp(0.0, 1.0),
        final_populations,
        max_norm_deviation: trajectory.max_norm_deviation,
        trajectory,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StirapPoint {
    pub g: f64,
    pub efficiency: Option<f64>,
    pub feasible: bool,
    pub horn: HornScenario,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StirapSweep {
    pub base: StirapConfig,
    pub points: Vec<StirapPoint>,
}

/// Efficiency for every `g` at fixed detuning and pulses, in input order.
pub fn sweep_g(base: &StirapConfig, gs: &[f64]) -> Result<StirapSweep> {
    if gs.is_empty() {
        return Err(Error::InvalidConfig("empty list of nonlinearities".into()));
    }
    base.validate()?;
    let points = gs
        .par_iter()
        .map(|&g| {
            let cfg = StirapConfig {
                samples: 2,
                ..base.with_g(g)
            };
            let (efficiency, error) = match run_stirap(&cfg) {
                Ok(r) => (Some(r.efficiency), None),
                Err(e) => (None, Some(e.to_string())),
            };
            StirapPoint {
                g,
                efficiency,
                feasible: stirap_feasible(g, base.detuning),
                horn: horn_scenario(g, base.detuning),
                error,
            }
        })
        .collect();
    Ok(StirapSweep { base: *base, points })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSet {
    pub t: f64,
    pub params: ModelParams,
    pub outcome: SearchOutcome,
}

/// All real stationary states at the instantaneous parameters.
pub fn stirap_levels(config: &StirapConfig, times: &[f64], search: &SearchConfig) -> Result<Vec<LevelSet>> {
    config.validate()?;
    let (t0, t1) = config.pulses.window();
    if let Some(t) = times.iter().find(|t| !(t0..=t1).contains(*t)) {
        return Err(Error::Domain(format!("time {t} lies outside the pulse window [{t0}, {t1}]")));
    }
    Ok(times
        .par_iter()
        .map(|&t| {
            let params = config.params_at(t);
            LevelSet {
                t,
                params,
                outcome: find_stationary_states(&params, search),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DarkBranch {
    pub branch: EigenBranch,
    /// Time at which the branch turns back (merges with another level).
    pub disappearance: Option<f64>,
}

/// Continues the level that starts as well 1 (the dark state before the
/// pulses) forward in time through the pulse window.
pub fn dark_branch(config: &StirapConfig) -> Result<DarkBranch> {
    config.validate()?;
    let (t0, t1) = config.pulses.window();
    let schedule = config.schedule();
    let seed = refine_stationary([1.0, 0.0, 0.0], &schedule.at(t0), 1e-12)?;
    let options = ContinuationOptions {
        lambda_scale: config.pulses.width,
        ..Default::default()
    };
    let branch = continue_along(&seed, &schedule, t0, t1, &options)?;
    let disappearance = branch.folds.first().copied();
    Ok(DarkBranch { branch, disappearance })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pulse_values() {
        let p = PulseConfig {
            peak: 0.3,
            width: 200.0,
            separation: 120.0,
            window: None,
        };
        let (v, w) = pulse_pair(-120.0, &p);
        assert_eq!(w, 0.3);
        assert!((v - 0.3 * (-2.0f64 * 120.0 * 120.0 / (200.0 * 200.0)).exp()).abs() < 1e-16);
        let (v, w) = pulse_pair(0.0, &p);
        assert_eq!(v, w);
        let (t0, t1) = p.window();
        assert_eq!(t0, -t1);
        for t in [t0, t1] {
            let (v, w) = pulse_pair(t, &p);
            assert!(v < 1e-6 * 0.3 && w < 1e-6 * 0.3);
        }
        assert!(p.validate().is_ok());
    }

    #[test]
    fn narrow_window_is_rejected() {
        let p = PulseConfig {
            peak: 0.3,
            width: 200.0,
            separation: 120.0,
            window: Some((-1000.0, 1000.0)),
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn horn_classification() {
        assert_eq!(horn_scenario(0.2, 0.1), HornScenario::SameSignHorn);
        assert_eq!(horn_scenario(0.05, 0.1), HornScenario::NoHorn);
        assert_eq!(horn_scenario(-0.2, 0.1), HornScenario::OppositeSignHorn);
        assert_eq!(horn_scenario(0.0, 0.1), HornScenario::NoHorn);
        assert_eq!(horn_scenario(0.1, 0.1), HornScenario::SameSignHorn);
        assert_eq!(horn_scenario(-0.1, -0.1), HornScenario::SameSignHorn);
        assert!(stirap_feasible(0.05, 0.1));
        assert!(!stirap_feasible(0.2, 0.1));
        assert!(stirap_feasible(0.0, -0.3));
        assert!(!stirap_feasible(-0.05, 0.1));
        assert!(!stirap_feasible(0.1, 0.1));
    }

    #[test]
    fn levels_outside_window_rejected() {
        let c = StirapConfig::new(0.1, 0.0);
        let (_, t1) = c.pulses.window();
        assert!(stirap_levels(&c, &[t1 + 1.0], &SearchConfig::default()).is_err());
    }

    #[test]
    fn linear_levels_are_three() {
        let c = StirapConfig::new(0.1, 0.0);
        let levels = stirap_levels(&c, &[-800.0, 0.0, 300.0], &SearchConfig::default()).unwrap();
        for l in levels {
            assert_eq!(l.outcome.states.len(), 3);
            // the dark state (w, 0, -v) has mu = -Delta
            assert!(l.outcome.states.iter().any(|s| (s.mu + 0.1).abs() < 1e-10));
        }
    }

    #[test]
    fn weak_nonlinearity_transfers() {
        let r = run_stirap(&StirapConfig::new(0.1, 0.05)).unwrap();
        assert!(r.efficiency > 0.95, "{}", r.efficiency);
        assert!(r.max_norm_deviation <= 1e-9);
    }

    #[test]
    fn dark_branch_folds_only_above_detuning() {
        let weak = dark_branch(&StirapConfig::new(0.1, 0.05)).unwrap();
        assert!(weak.disappearance.is_none());
        let last = weak.branch.points.last().unwrap();
        assert!(last.state.populations()[2] > 0.99);

        let strong = dark_branch(&StirapConfig::new(0.1, 0.2)).unwrap();
        let t = strong.disappearance.expect("fold");
        assert!(t < StirapConfig::new(0.1, 0.2).pulses.separation);
    }
}
