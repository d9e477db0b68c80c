//! Nonlinear stationary states: `H(|psi|^2) psi = mu psi`.
//!
//! Stationary states are searched in the real sector. Two independent routes
//! are provided and merged: a scan over the amplitude ratio `x = b/a` using
//! the reduced equations (see [`reduced`]), and a Newton search for critical
//! points of the classical Hamiltonian (see [`critical`]).

pub mod continuation;
pub mod critical;
pub mod linear;
pub mod reduced;

use std::cmp::Ordering;

use nalgebra::{Matrix2, Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{chemical_potential, stationary_residual, ModelParams, StateVector};

pub use continuation::{
    continue_along, continue_branch, BranchFailure, BranchPoint, ContinuationOptions, EigenBranch, ParameterPath, Sweep,
    SweepParam,
};
pub use linear::{linear_crossing_data, linear_eigensystem, LinearCrossingData};
pub use reduced::{reduced_residuals, solve_y_given_x, ReducedCoords};

/// Stability type of a critical point of the classical Hamiltonian.
///
/// `Elliptic` points have a Hessian with positive determinant (even Morse
/// index: extrema and the index-2 points that are dynamically stable);
/// `Hyperbolic` points have negative determinant (odd index, saddles).
/// Folds create and destroy one of each, so
/// `#elliptic - #hyperbolic` stays equal to 3 for generic parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    Elliptic,
    Hyperbolic,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Elliptic => "elliptic",
            Classification::Hyperbolic => "hyperbolic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryState {
    pub state: StateVector,
    pub mu: f64,
    pub classification: Classification,
    /// Max-norm of `H psi - mu psi`.
    pub residual: f64,
}

impl StationaryState {
    /// Wraps a real-sector state, fixing the sign gauge and evaluating `mu`,
    /// the residual and the classification.
    pub fn from_real(u: [f64; 3], params: &ModelParams) -> Result<Self> {
        let u = gauge_real(normalize3(u)?);
        let state = StateVector::from_real(u)?;
        Ok(Self {
            mu: chemical_potential(&state, params),
            residual: stationary_residual(&state, params),
            classification: classify(u, params),
            state,
        })
    }

    /// Real amplitudes; stationary states found here live in the real sector.
    pub fn amplitudes(&self) -> [f64; 3] {
        self.state.real_parts()
    }

    pub fn populations(&self) -> [f64; 3] {
        self.state.populations()
    }
}

fn normalize3(u: [f64; 3]) -> Result<[f64; 3]> {
    let n = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::NotNormalized { norm_sqr: n * n });
    }
    Ok(u.map(|x| x / n))
}

/// Sign gauge for real states: `b > 0`, or the first nonzero amplitude
/// positive when `b = 0`.
fn gauge_real(u: [f64; 3]) -> [f64; 3] {
    let pivot = if u[1] != 0.0 {
        u[1]
    } else {
        u.iter().copied().find(|x| *x != 0.0).unwrap_or(1.0)
    };
    if pivot < 0.0 {
        u.map(|x| -x)
    } else {
        u
    }
}

/// Real nonlinear Hamiltonian `M + g diag(u^2)` for a real state.
pub(crate) fn nonlinear_matrix(u: &[f64; 3], p: &ModelParams) -> [[f64; 3]; 3] {
    let mut m = p.linear_matrix();
    for i in 0..3 {
        m[i][i] += p.g * u[i] * u[i];
    }
    m
}

pub(crate) fn matvec(m: &[[f64; 3]; 3], u: &[f64; 3]) -> [f64; 3] {
    [
        m[0][0] * u[0] + m[0][1] * u[1] + m[0][2] * u[2],
        m[1][0] * u[0] + m[1][1] * u[1] + m[1][2] * u[2],
        m[2][0] * u[0] + m[2][1] * u[1] + m[2][2] * u[2],
    ]
}

pub(crate) fn free_indices(k: usize) -> [usize; 2] {
    match k {
        0 => [1, 2],
        1 => [0, 2],
        _ => [0, 1],
    }
}

/// Determinant sign of the classical Hamiltonian's Hessian at a real
/// stationary state.
///
/// The Hessian is taken in the chart where the largest amplitude `u_k` is
/// real and eliminated through normalization; the remaining two complex
/// amplitudes give two real and two imaginary directions. At a critical point
/// the two blocks decouple: the real block is `T^T (F - 2 mu) T` with `F` the
/// unconstrained Hessian and `T` the chart tangents, the imaginary block is
/// `2 (H(u) - mu)` on the free indices. This chart stays regular where some
/// amplitudes vanish, unlike the `(p, q)` chart.
pub fn classify(u: [f64; 3], params: &ModelParams) -> Classification {
    if hessian_determinant(u, params) > 0.0 {
        Classification::Elliptic
    } else {
        Classification::Hyperbolic
    }
}

pub(crate) fn hessian_determinant(u: [f64; 3], params: &ModelParams) -> f64 {
    let k = (0..3)
        .max_by(|&i, &j| u[i].abs().total_cmp(&u[j].abs()))
        .unwrap_or(0);
    let free = free_indices(k);
    let h = nonlinear_matrix(&u, params);
    let hu = matvec(&h, &u);
    let mu: f64 = (0..3).map(|i| u[i] * hu[i]).sum();

    // F - 2 mu with F = 2 (M + 3 g diag(u^2))
    let mut f = params.linear_matrix();
    for i in 0..3 {
        f[i][i] += 3.0 * params.g * u[i] * u[i] - mu;
    }
    let tangent = |j: usize| {
        let mut t = [0.0; 3];
        t[j] = 1.0;
        t[k] = -u[j] / u[k];
        t
    };
    let t = [tangent(free[0]), tangent(free[1])];
    let mut real = Matrix2::zeros();
    for a in 0..2 {
        let ft = matvec(&f, &t[a]);
        for b in 0..2 {
            real[(b, a)] = 2.0 * (0..3).map(|i| t[b][i] * ft[i]).sum::<f64>();
        }
    }
    let mut imag = Matrix2::zeros();
    for (a, &i) in free.iter().enumerate() {
        for (b, &j) in free.iter().enumerate() {
            imag[(a, b)] = 2.0 * (h[i][j] - if i == j { mu } else { 0.0 });
        }
    }
    real.determinant() * imag.determinant()
}

/// Newton refinement of an approximate real stationary state in the unknowns
/// `(u, mu)` with the normalization as fourth equation.
pub fn refine_stationary(guess: [f64; 3], params: &ModelParams, tol: f64) -> Result<StationaryState> {
    let mut u = normalize3(guess)?;
    let mut mu = {
        let hu = matvec(&nonlinear_matrix(&u, params), &u);
        (0..3).map(|i| u[i] * hu[i]).sum::<f64>()
    };
    const MAX_ITER: usize = 50;
    let mut res = f64::INFINITY;
    for _ in 0..MAX_ITER {
        let h = nonlinear_matrix(&u, params);
        let hu = matvec(&h, &u);
        let f = Vector4::new(
            hu[0] - mu * u[0],
            hu[1] - mu * u[1],
            hu[2] - mu * u[2],
            0.5 * (u[0] * u[0] + u[1] * u[1] + u[2] * u[2] - 1.0),
        );
        res = f.amax();
        if res < 1e-15 {
            break;
        }
        let mut jac = Matrix4::zeros();
        for i in 0..3 {
            for j in 0..3 {
                jac[(i, j)] = params.linear_matrix()[i][j];
            }
            jac[(i, i)] += 3.0 * params.g * u[i] * u[i] - mu;
            jac[(i, 3)] = -u[i];
            jac[(3, i)] = u[i];
        }
        let Some(step) = jac.lu().solve(&-f) else {
            break;
        };
        for i in 0..3 {
            u[i] += step[i];
        }
        mu += step[3];
        if step.amax() < 1e-16 {
            break;
        }
    }
    let s = StationaryState::from_real(u, params)?;
    if s.residual > tol {
        return Err(Error::NotConverged {
            what: "stationary-state refinement",
            iterations: MAX_ITER,
            residual: s.residual.max(res),
        });
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SearchMethod {
    /// Sign-change scan over `x = b/a` with the reduced equations.
    XScan,
    /// Newton search for critical points of the classical Hamiltonian.
    CriticalPoints,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Total grid points over `x`, log-spaced in `|x|` and split between both signs.
    pub x_points: usize,
    pub x_min: f64,
    pub x_max: f64,
    /// Resolution of the population grid seeding the critical-point Newton search.
    pub cp_grid: usize,
    /// Bound on the residual `max |H psi - mu psi|` for accepted states.
    pub tol: f64,
    /// Two states are the same if `|<psi|phi>|` exceeds this.
    pub dedup_overlap: f64,
    pub method: SearchMethod,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            x_points: 4000,
            x_min: 1e-4,
            x_max: 1e4,
            cp_grid: 16,
            tol: 1e-10,
            dedup_overlap: 1.0 - 1e-8,
            method: SearchMethod::Both,
        }
    }
}

impl SearchConfig {
    pub fn with_method(mut self, method: SearchMethod) -> Self {
        self.method = method;
        self
    }
}

/// A seed or bracket that did not yield an accepted state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedFailure {
    pub method: SearchMethod,
    pub seed: [f64; 2],
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    /// Sorted by `mu`, then lexicographically by amplitudes.
    pub states: Vec<StationaryState>,
    pub diagnostics: Vec<SeedFailure>,
}

impl SearchOutcome {
    pub fn count(&self, class: Classification) -> usize {
        self.states.iter().filter(|s| s.classification == class).count()
    }

    /// `#elliptic - #hyperbolic`.
    pub fn index_sum(&self) -> i64 {
        self.count(Classification::Elliptic) as i64 - self.count(Classification::Hyperbolic) as i64
    }
}

/// Finds all real-sector stationary states at fixed parameters.
pub fn find_stationary_states(params: &ModelParams, search: &SearchConfig) -> SearchOutcome {
    let mut candidates = Vec::new();
    let mut diagnostics = Vec::new();
    if matches!(search.method, SearchMethod::XScan | SearchMethod::Both) {
        let (c, d) = reduced::x_scan(params, search);
        candidates.extend(c);
        diagnostics.extend(d);
    }
    if matches!(search.method, SearchMethod::CriticalPoints | SearchMethod::Both) {
        let (c, d) = critical::critical_point_search(params, search);
        candidates.extend(c);
        diagnostics.extend(d);
    }
    let mut states = Vec::new();
    for u in candidates {
        match StationaryState::from_real(u, params) {
            Ok(s) if s.residual <= search.tol => states.push(s),
            Ok(s) => diagnostics.push(SeedFailure {
                method: search.method,
                seed: [u[1], u[2]],
                reason: format!("residual {:e} above tolerance", s.residual),
            }),
            Err(e) => diagnostics.push(SeedFailure {
                method: search.method,
                seed: [u[1], u[2]],
                reason: e.to_string(),
            }),
        }
    }
    SearchOutcome {
        states: dedup_states(states, search.dedup_overlap),
        diagnostics,
    }
}

/// Merges states whose overlap exceeds `threshold`, keeping the smaller
/// residual, and sorts the result deterministically.
pub fn dedup_states(mut states: Vec<StationaryState>, threshold: f64) -> Vec<StationaryState> {
    states.sort_by(|a, b| a.residual.total_cmp(&b.residual));
    let mut kept: Vec<StationaryState> = Vec::new();
    for s in states {
        if !kept.iter().any(|k| k.state.overlap(&s.state) > threshold) {
            kept.push(s);
        }
    }
    kept.sort_by(compare_states);
    kept
}

pub(crate) fn compare_states(a: &StationaryState, b: &StationaryState) -> Ordering {
    a.mu.total_cmp(&b.mu).then_with(|| {
        let (ua, ub) = (a.amplitudes(), b.amplitudes());
        ua.iter()
            .zip(ub.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{classical_gradient, classical_hamiltonian, classical_hessian, to_canonical};
    use approx::assert_abs_diff_eq;
    use nalgebra::Matrix4;

    fn fig2(eps: f64, g: f64) -> ModelParams {
        ModelParams::new(eps, -0.4, 0.1, 0.2, g).unwrap()
    }

    #[test]
    fn linear_limit_has_three_elliptic_states() {
        let p = ModelParams::new(0.3, -0.4, 0.1, 0.2, 0.0).unwrap();
        let out = find_stationary_states(&p, &SearchConfig::default());
        assert_eq!(out.states.len(), 3);
        assert!(out.states.iter().all(|s| s.classification == Classification::Elliptic));
        let lin = linear_eigensystem(&p);
        for (s, l) in out.states.iter().zip(lin.iter()) {
            assert_abs_diff_eq!(s.mu, l.mu, epsilon = 1e-9);
            assert!(s.state.overlap(&l.state) > 1.0 - 1e-10);
        }
    }

    #[test]
    fn loop_region_has_extra_states() {
        let out = find_stationary_states(&fig2(-0.25, -0.4), &SearchConfig::default());
        assert!(out.states.len() > 3, "found {}", out.states.len());
        assert_eq!(out.states.len() % 2, 1);
        assert_eq!(out.index_sum(), 3);
    }

    #[test]
    fn mu_h_relation_and_vanishing_gradient() {
        for eps in [-0.6, -0.25, 0.0, 0.3] {
            let p = fig2(eps, -0.4);
            for s in find_stationary_states(&p, &SearchConfig::default()).states {
                let k = to_canonical(&s.state).unwrap();
                let pops = s.populations();
                let self_energy = 0.5 * p.g * pops.iter().map(|x| x * x).sum::<f64>();
                assert_abs_diff_eq!(classical_hamiltonian(&k, &p), s.mu - self_energy, epsilon = 1e-10);
                for d in classical_gradient(&k, &p).unwrap() {
                    assert!(d.abs() < 1e-9, "gradient component {d}");
                }
            }
        }
    }

    #[test]
    fn classification_agrees_with_canonical_hessian() {
        for eps in [-0.5, -0.3, -0.25, -0.2, 0.05, 0.2] {
            let p = fig2(eps, -0.4);
            for s in find_stationary_states(&p, &SearchConfig::default()).states {
                let k = to_canonical(&s.state).unwrap();
                let h = Matrix4::from_fn(|i, j| classical_hessian(&k, &p).unwrap()[i][j]);
                let expected = if h.determinant() > 0.0 {
                    Classification::Elliptic
                } else {
                    Classification::Hyperbolic
                };
                assert_eq!(s.classification, expected, "eps={eps} state={:?}", s.amplitudes());
            }
        }
    }

    #[test]
    fn index_sum_is_preserved_across_folds() {
        let sums: Vec<i64> = (-40..=40)
            .map(|i| {
                let out = find_stationary_states(&fig2(i as f64 * 0.02, -0.4), &SearchConfig::default());
                out.index_sum()
            })
            .collect();
        assert!(sums.iter().all(|&s| s == 3), "{sums:?}");
    }

    #[test]
    fn basis_states_when_uncoupled() {
        let p = ModelParams::new(1.0, 2.0, 0.0, 0.0, 0.0).unwrap();
        let out = find_stationary_states(&p, &SearchConfig::default());
        assert_eq!(out.states.len(), 3);
        let mus: Vec<f64> = out.states.iter().map(|s| s.mu).collect();
        assert_abs_diff_eq!(mus[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(mus[1], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(mus[2], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn refine_recovers_perturbed_state() {
        let p = fig2(-0.6, -0.4);
        let s = &find_stationary_states(&p, &SearchConfig::default()).states[0];
        let u = s.amplitudes();
        let r = refine_stationary([u[0] + 1e-3, u[1] - 2e-3, u[2]], &p, 1e-12).unwrap();
        assert!(r.state.overlap(&s.state) > 1.0 - 1e-14);
    }
}
