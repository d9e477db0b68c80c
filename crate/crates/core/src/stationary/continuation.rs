//! Pseudo-arclength continuation of real stationary states.
//!
//! The unknowns are `z = (a, b, c, mu, lambda)` with four equations
//! `(H(u; lambda) - mu) u = 0` and `(|u|^2 - 1)/2 = 0`. The curve is followed
//! by tangent predictor and Newton corrector on the hyperplane orthogonal to
//! the tangent, so folds in `lambda` are passed as regular points. A fold is
//! marked where the tangent's `lambda` component changes sign.

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use super::{refine_stationary, StationaryState};
use crate::error::{Error, Result};
use crate::model::ModelParams;

type Vec5 = SVector<f64, 5>;
type Mat5 = SMatrix<f64, 5, 5>;

/// A one-parameter family of model parameters.
pub trait ParameterPath {
    fn params_at(&self, lambda: f64) -> ModelParams;
    /// Componentwise `d params / d lambda`.
    fn derivative_at(&self, lambda: f64) -> ModelParams;
    fn name(&self) -> String;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParam {
    Epsilon,
    Delta,
    V,
    W,
    G,
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::Epsilon => "epsilon",
            SweepParam::Delta => "delta",
            SweepParam::V => "v",
            SweepParam::W => "w",
            SweepParam::G => "g",
        }
    }

    pub fn get(&self, p: &ModelParams) -> f64 {
        match self {
            SweepParam::Epsilon => p.epsilon,
            SweepParam::Delta => p.delta,
            SweepParam::V => p.v,
            SweepParam::W => p.w,
            SweepParam::G => p.g,
        }
    }

    pub fn set(&self, mut p: ModelParams, value: f64) -> ModelParams {
        match self {
            SweepParam::Epsilon => p.epsilon = value,
            SweepParam::Delta => p.delta = value,
            SweepParam::V => p.v = value,
            SweepParam::W => p.w = value,
            SweepParam::G => p.g = value,
        }
        p
    }
}

/// Sweep of a single model parameter from `from` to `to`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub param: SweepParam,
    pub from: f64,
    pub to: f64,
}

struct SingleParam {
    base: ModelParams,
    param: SweepParam,
}

impl ParameterPath for SingleParam {
    fn params_at(&self, lambda: f64) -> ModelParams {
        self.param.set(self.base, lambda)
    }

    fn derivative_at(&self, _lambda: f64) -> ModelParams {
        self.param.set(ModelParams::default(), 1.0)
    }

    fn name(&self) -> String {
        self.param.name().to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuationOptions {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Smallest accepted overlap between neighbouring states.
    pub min_overlap: f64,
    pub max_points: usize,
    /// The path parameter enters the arclength as `lambda / lambda_scale`.
    pub lambda_scale: f64,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self {
            initial_step: 1e-3,
            min_step: 1e-6,
            max_step: 1e-2,
            newton_tol: 1e-11,
            max_newton: 12,
            min_overlap: 0.99,
            max_points: 2_000_000,
            lambda_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub value: f64,
    pub state: StationaryState,
    /// `d lambda / d s` along the normalized tangent (sign gives direction).
    pub tangent_param: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchFailure {
    pub at: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenBranch {
    pub parameter: String,
    pub points: Vec<BranchPoint>,
    /// Parameter values at which the branch turns back.
    pub folds: Vec<f64>,
    /// Index of the first point after each fold.
    pub fold_indices: Vec<usize>,
    /// Set when the branch was truncated before reaching the sweep end.
    pub failure: Option<BranchFailure>,
}

impl EigenBranch {
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.value)
    }

    /// Points up to the first fold, where the branch is single-valued in the
    /// parameter.
    pub fn monotone_prefix(&self) -> &[BranchPoint] {
        match self.fold_indices.first() {
            Some(&i) => &self.points[..i],
            None => &self.points,
        }
    }

    /// Linear interpolation of the state at `lambda` on the monotone prefix;
    /// `None` outside its range.
    pub fn state_at(&self, lambda: f64) -> Option<[f64; 3]> {
        let pts = self.monotone_prefix();
        if pts.is_empty() {
            return None;
        }
        let (first, last) = (pts[0].value, pts[pts.len() - 1].value);
        let (lo, hi) = if first <= last { (first, last) } else { (last, first) };
        if !(lo..=hi).contains(&lambda) {
            return None;
        }
        if pts.len() == 1 {
            return Some(pts[0].state.amplitudes());
        }
        let increasing = first <= last;
        let idx = pts.partition_point(|p| if increasing { p.value < lambda } else { p.value > lambda });
        let i = idx.clamp(1, pts.len() - 1);
        let (p0, p1) = (&pts[i - 1], &pts[i]);
        let span = p1.value - p0.value;
        let t = if span == 0.0 { 0.0 } else { (lambda - p0.value) / span };
        let (u0, mut u1) = (p0.state.amplitudes(), p1.state.amplitudes());
        // the sign gauge can flip between neighbours
        if u0.iter().zip(u1.iter()).map(|(x, y)| x * y).sum::<f64>() < 0.0 {
            u1 = u1.map(|x| -x);
        }
        let u = [0, 1, 2].map(|k| (1.0 - t) * u0[k] + t * u1[k]);
        let n = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        Some(u.map(|x| x / n))
    }
}

struct System<'a, P: ParameterPath + ?Sized> {
    path: &'a P,
    scale: f64,
}

impl<P: ParameterPath + ?Sized> System<'_, P> {
    fn lambda(&self, z: &Vec5) -> f64 {
        z[4] * self.scale
    }

    fn residual(&self, z: &Vec5) -> SVector<f64, 4> {
        let p = self.path.params_at(self.lambda(z));
        let u = [z[0], z[1], z[2]];
        let hu = super::matvec(&super::nonlinear_matrix(&u, &p), &u);
        SVector::<f64, 4>::new(
            hu[0] - z[3] * u[0],
            hu[1] - z[3] * u[1],
            hu[2] - z[3] * u[2],
            0.5 * (u[0] * u[0] + u[1] * u[1] + u[2] * u[2] - 1.0),
        )
    }

    /// Rows 0..4 hold the Jacobian of `residual`; row 4 is left for the
    /// caller's extra equation.
    fn jacobian(&self, z: &Vec5) -> Mat5 {
        let lambda = self.lambda(z);
        let p = self.path.params_at(lambda);
        let dp = self.path.derivative_at(lambda);
        let u = [z[0], z[1], z[2]];
        let m = p.linear_matrix();
        let dm = dp.linear_matrix();
        let mut jac = Mat5::zeros();
        for i in 0..3 {
            for j in 0..3 {
                jac[(i, j)] = m[i][j];
            }
            jac[(i, i)] += 3.0 * p.g * u[i] * u[i] - z[3];
            jac[(i, 3)] = -u[i];
            let mut d = 0.0;
            for j in 0..3 {
                d += dm[i][j] * u[j];
            }
            d += dp.g * u[i] * u[i] * u[i];
            jac[(i, 4)] = d * self.scale;
            jac[(3, i)] = u[i];
        }
        jac
    }

    fn tangent(&self, z: &Vec5, previous: &Vec5) -> Option<Vec5> {
        let mut jac = self.jacobian(z);
        for k in 0..5 {
            jac[(4, k)] = previous[k];
        }
        let mut rhs = Vec5::zeros();
        rhs[4] = 1.0;
        let t = jac.lu().solve(&rhs)?;
        let n = t.norm();
        (n.is_finite() && n > 0.0).then(|| t / n)
    }

    /// Newton on the residual plus the arclength hyperplane through `zp`.
    fn correct(&self, zp: &Vec5, t: &Vec5, tol: f64, max_iter: usize) -> Option<(Vec5, usize)> {
        let mut z = *zp;
        for it in 1..=max_iter {
            let f = self.residual(&z);
            let mut rhs = Vec5::zeros();
            for k in 0..4 {
                rhs[k] = -f[k];
            }
            rhs[4] = -t.dot(&(z - zp));
            let mut jac = self.jacobian(&z);
            for k in 0..5 {
                jac[(4, k)] = t[k];
            }
            let dz = jac.lu().solve(&rhs)?;
            z += dz;
            if !z.iter().all(|x| x.is_finite()) {
                return None;
            }
            if dz.amax() < 1e-13 && self.residual(&z).amax() < tol {
                return Some((z, it));
            }
        }
        (self.residual(&z).amax() < tol).then_some((z, max_iter))
    }
}

fn overlap(z0: &Vec5, z1: &Vec5) -> f64 {
    let dot = z0[0] * z1[0] + z0[1] * z1[1] + z0[2] * z1[2];
    let n0 = (z0[0] * z0[0] + z0[1] * z0[1] + z0[2] * z0[2]).sqrt();
    let n1 = (z1[0] * z1[0] + z1[1] * z1[1] + z1[2] * z1[2]).sqrt();
    (dot / (n0 * n1)).abs()
}

/// Continues `seed` while one model parameter runs from `sweep.from` to
/// `sweep.to`. The remaining parameters are taken from `params`.
pub fn continue_branch(
    seed: &StationaryState,
    params: &ModelParams,
    sweep: &Sweep,
    options: &ContinuationOptions,
) -> Result<EigenBranch> {
    let path = SingleParam {
        base: *params,
        param: sweep.param,
    };
    continue_along(seed, &path, sweep.from, sweep.to, options)
}

/// Continuation along an arbitrary parameter path.
pub fn continue_along<P: ParameterPath + ?Sized>(
    seed: &StationaryState,
    path: &P,
    from: f64,
    to: f64,
    options: &ContinuationOptions,
) -> Result<EigenBranch> {
    if !(from.is_finite() && to.is_finite()) || from == to {
        return Err(Error::InvalidConfig(format!("degenerate sweep range [{from}, {to}]")));
    }
    let start_params = path.params_at(from);
    start_params.validate()?;
    let seed = if seed.residual <= 1e-9
        && crate::model::stationary_residual(&seed.state, &start_params) <= 1e-9
    {
        StationaryState::from_real(seed.amplitudes(), &start_params)?
    } else {
        refine_stationary(seed.amplitudes(), &start_params, 1e-10)?
    };

    let sys = System {
        path,
        scale: options.lambda_scale,
    };
    let dir = (to - from).signum();
    let u = seed.amplitudes();
    let mut z = Vec5::new(u[0], u[1], u[2], seed.mu, from / sys.scale);
    let mut initial = Vec5::zeros();
    initial[4] = dir;
    let mut t = sys.tangent(&z, &initial).ok_or(Error::NotConverged {
        what: "initial tangent",
        iterations: 1,
        residual: f64::NAN,
    })?;

    let mut branch = EigenBranch {
        parameter: path.name(),
        points: Vec::new(),
        folds: Vec::new(),
        fold_indices: Vec::new(),
        failure: None,
    };
    let push = |branch: &mut EigenBranch, z: &Vec5, t: &Vec5| -> Result<()> {
        let lambda = sys.lambda(z);
        let state = StationaryState::from_real([z[0], z[1], z[2]], &path.params_at(lambda))?;
        branch.points.push(BranchPoint {
            value: lambda,
            state,
            tangent_param: t[4],
        });
        Ok(())
    };
    push(&mut branch, &z, &t)?;

    let mut h = options.initial_step;
    while branch.points.len() < options.max_points {
        let zp = z + t * h;
        let accepted = sys
            .correct(&zp, &t, options.newton_tol, options.max_newton)
            .and_then(|(zn, iters)| {
                let tn = sys.tangent(&zn, &t)?;
                let smooth = overlap(&z, &zn) > options.min_overlap && tn.dot(&t) > 0.5;
                smooth.then_some((zn, tn, iters))
            });
        let Some((zn, tn, iters)) = accepted else {
            h *= 0.5;
            if h < options.min_step {
                branch.failure = Some(BranchFailure {
                    at: sys.lambda(&z),
                    reason: "step size underflow".into(),
                });
                return Ok(branch);
            }
            continue;
        };

        if tn[4].signum() != t[4].signum() && t[4] != 0.0 {
            // lambda'(s) interpolated linearly across the step
            let s_star = h * t[4] / (t[4] - tn[4]);
            let fold = sys.lambda(&z) + 0.5 * t[4] * s_star * sys.scale;
            branch.folds.push(fold);
            branch.fold_indices.push(branch.points.len());
        }

        let lambda_new = sys.lambda(&zn);
        if (lambda_new - to) * dir >= 0.0 {
            // land exactly on the sweep end
            let lambda_old = sys.lambda(&z);
            let w = (to - lambda_old) / (lambda_new - lambda_old);
            let guess = [0, 1, 2].map(|k| (1.0 - w) * z[k] + w * zn[k]);
            match refine_stationary(guess, &path.params_at(to), 1e-10) {
                Ok(end) if end.state.overlap(&StationaryState::from_real(guess, &path.params_at(to))?.state) > options.min_overlap => {
                    branch.points.push(BranchPoint {
                        value: to,
                        state: end,
                        tangent_param: tn[4],
                    });
                }
                _ => push(&mut branch, &zn, &tn)?,
            }
            return Ok(branch);
        }
        if (lambda_new - from) * dir < 0.0 {
            // turned back past the start
            push(&mut branch, &zn, &tn)?;
            return Ok(branch);
        }

        push(&mut branch, &zn, &tn)?;
        z = zn;
        t = tn;
        if iters <= 3 {
            h = (h * 2.0).min(options.max_step);
        }
    }
    branch.failure = Some(BranchFailure {
        at: sys.lambda(&z),
        reason: "point budget exhausted".into(),
    });
    Ok(branch)
}
