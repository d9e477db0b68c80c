use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::stationary::ParameterPath;

/// A scalar function of time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleFn {
    Constant { value: f64 },
    /// `slope * t + offset`
    LinearRamp { slope: f64, offset: f64 },
    /// `peak * exp(-(t - center)^2 / (2 width^2))`
    GaussianPulse { peak: f64, center: f64, width: f64 },
    /// Piecewise-linear interpolation, held constant outside the table.
    Tabulated { times: Vec<f64>, values: Vec<f64> },
}

impl ScheduleFn {
    pub fn constant(value: f64) -> Self {
        ScheduleFn::Constant { value }
    }

    pub fn ramp(slope: f64, offset: f64) -> Self {
        ScheduleFn::LinearRamp { slope, offset }
    }

    pub fn gaussian(peak: f64, center: f64, width: f64) -> Self {
        ScheduleFn::GaussianPulse { peak, center, width }
    }

    pub fn tabulated(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let f = ScheduleFn::Tabulated { times, values };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |x: f64, name| if x.is_finite() { Ok(()) } else { Err(Error::NonFinite(name)) };
        match self {
            ScheduleFn::Constant { value } => finite(*value, "value"),
            ScheduleFn::LinearRamp { slope, offset } => {
                finite(*slope, "slope")?;
                finite(*offset, "offset")
            }
            ScheduleFn::GaussianPulse { peak, center, width } => {
                finite(*peak, "peak")?;
                finite(*center, "center")?;
                finite(*width, "width")?;
                if *width <= 0.0 {
                    return Err(Error::InvalidConfig(format!("pulse width must be positive, got {width}")));
                }
                Ok(())
            }
            ScheduleFn::Tabulated { times, values } => {
                if times.len() != values.len() || times.is_empty() {
                    return Err(Error::InvalidConfig("table needs equal, nonzero numbers of times and values".into()));
                }
                if times.iter().chain(values.iter()).any(|x| !x.is_finite()) {
                    return Err(Error::NonFinite("table"));
                }
                if times.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidConfig("table times must be strictly increasing".into()));
                }
                Ok(())
            }
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            ScheduleFn::Constant { value } => *value,
            ScheduleFn::LinearRamp { slope, offset } => slope * t + offset,
            ScheduleFn::GaussianPulse { peak, center, width } => {
                let s = (t - center) / width;
                peak * (-0.5 * s * s).exp()
            }
            ScheduleFn::Tabulated { times, values } => match locate(times, t) {
                Segment::Before => values[0],
                Segment::After => values[values.len() - 1],
                Segment::Inside(i) => {
                    let f = (t - times[i]) / (times[i + 1] - times[i]);
                    values[i] + f * (values[i + 1] - values[i])
                }
            },
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            ScheduleFn::Constant { .. } => 0.0,
            ScheduleFn::LinearRamp { slope, .. } => *slope,
            ScheduleFn::GaussianPulse { width, center, .. } => -(t - center) / (width * width) * self.value(t),
            ScheduleFn::Tabulated { times, values } => match locate(times, t) {
                Segment::Inside(i) => (values[i + 1] - values[i]) / (times[i + 1] - times[i]),
                _ => 0.0,
            },
        }
    }
}

enum Segment {
    Before,
    After,
    Inside(usize),
}

fn locate(times: &[f64], t: f64) -> Segment {
    if times.len() < 2 || t < times[0] {
        return Segment::Before;
    }
    if t >= times[times.len() - 1] {
        return Segment::After;
    }
    Segment::Inside(times.partition_point(|&x| x <= t) - 1)
}

/// Time dependence of the model parameters; `g` is constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSchedule {
    pub epsilon: ScheduleFn,
    pub delta: ScheduleFn,
    pub v: ScheduleFn,
    pub w: ScheduleFn,
    pub g: f64,
}

impl ParameterSchedule {
    pub fn constant(p: &ModelParams) -> Self {
        Self {
            epsilon: ScheduleFn::constant(p.epsilon),
            delta: ScheduleFn::constant(p.delta),
            v: ScheduleFn::constant(p.v),
            w: ScheduleFn::constant(p.w),
            g: p.g,
        }
    }

    /// `epsilon = alpha t`, everything else fixed.
    pub fn equal_slope(alpha: f64, delta: f64, v: f64, w: f64, g: f64) -> Self {
        Self {
            epsilon: ScheduleFn::ramp(alpha, 0.0),
            delta: ScheduleFn::constant(delta),
            v: ScheduleFn::constant(v),
            w: ScheduleFn::constant(w),
            g,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for f in [&self.epsilon, &self.delta, &self.v, &self.w] {
            f.validate()?;
        }
        if !self.g.is_finite() {
            return Err(Error::NonFinite("g"));
        }
        Ok(())
    }

    #[inline]
    pub fn at(&self, t: f64) -> ModelParams {
        ModelParams {
            epsilon: self.epsilon.value(t),
            delta: self.delta.value(t),
            v: self.v.value(t),
            w: self.w.value(t),
            g: self.g,
        }
    }

    pub fn derivative(&self, t: f64) -> ModelParams {
        ModelParams {
            epsilon: self.epsilon.derivative(t),
            delta: self.delta.derivative(t),
            v: self.v.derivative(t),
            w: self.w.derivative(t),
            g: 0.0,
        }
    }
}

/// Continuation in time through the instantaneous stationary states.
impl ParameterPath for ParameterSchedule {
    fn params_at(&self, lambda: f64) -> ModelParams {
        self.at(lambda)
    }

    fn derivative_at(&self, lambda: f64) -> ModelParams {
        self.derivative(lambda)
    }

    fn name(&self) -> String {
        "t".into()
    }
}
