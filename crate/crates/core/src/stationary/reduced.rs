//! Reduced equations for the amplitude ratios `x = b/a`, `y = c/b`.
//!
//! Dividing the three rows of the stationary equation by `a`, `b`, `c` gives
//! three expressions for `mu` whose sum is
//! `S = g + delta + epsilon + v (x + 1/x) + w (y + 1/y) = 3 mu`.
//! Eliminating the nonlinear terms with `b^2 = x^2 a^2`, `c^2 = x^2 y^2 a^2`
//! leaves two equations in `(x, y)`:
//!
//! ```text
//! (1 - x^2 y^2) S - 3 delta - 3 w / y + 3 x^2 y^2 (epsilon + v x) = 0
//! (1 - x^2) S     - 3 v / x - 3 w y   + 3 x^2 (epsilon + v x)     = 0
//! ```
//!
//! The second is quadratic in `y` at fixed `x`, so the system collapses to a
//! scalar equation in `x` per root branch.

use serde::{Deserialize, Serialize};

use super::{SearchConfig, SearchMethod, SeedFailure};
use crate::error::{Error, Result};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedCoords {
    pub x: f64,
    pub y: f64,
}

impl ReducedCoords {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite()) || x == 0.0 || y == 0.0 {
            return Err(Error::Domain(format!(
                "ratios must be finite and nonzero (x={x}, y={y})"
            )));
        }
        Ok(Self { x, y })
    }

    /// Ratios of a real state with all amplitudes nonzero.
    pub fn from_amplitudes(u: [f64; 3]) -> Result<Self> {
        Self::new(u[1] / u[0], u[2] / u[1])
    }

    /// Normalized real amplitudes `(1, x, x y) / norm` (sign of `a` positive).
    pub fn amplitudes(&self) -> [f64; 3] {
        let u = [1.0, self.x, self.x * self.y];
        let n = (1.0 + u[1] * u[1] + u[2] * u[2]).sqrt();
        u.map(|c| c / n)
    }
}

fn residuals_unchecked(x: f64, y: f64, p: &ModelParams) -> (f64, f64) {
    let s = p.g + p.delta + p.epsilon + p.v * (x + 1.0 / x) + p.w * (y + 1.0 / y);
    let xy2 = x * x * y * y;
    let lead = p.epsilon + p.v * x;
    let r1 = (1.0 - xy2) * s - 3.0 * p.delta - 3.0 * p.w / y + 3.0 * xy2 * lead;
    let r2 = (1.0 - x * x) * s - 3.0 * p.v / x - 3.0 * p.w * y + 3.0 * x * x * lead;
    (r1, r2)
}

/// Left-hand sides of the two reduced equations.
pub fn reduced_residuals(coords: &ReducedCoords, params: &ModelParams) -> Result<(f64, f64)> {
    let ReducedCoords { x, y } = ReducedCoords::new(coords.x, coords.y)?;
    Ok(residuals_unchecked(x, y, params))
}

/// Coefficients `(A, B, C)` of `A y^2 + B y + C = 0`, the second reduced
/// equation multiplied by `y`.
fn y_quadratic(x: f64, p: &ModelParams) -> (f64, f64, f64) {
    let one_m = 1.0 - x * x;
    let a = p.w * one_m - 3.0 * p.w;
    let b = one_m * (p.g + p.delta + p.epsilon + p.v * (x + 1.0 / x)) - 3.0 * p.v / x
        + 3.0 * x * x * (p.epsilon + p.v * x);
    let c = p.w * one_m;
    (a, b, c)
}

/// All real nonzero roots `y` of the second reduced equation at fixed `x`,
/// in ascending order.
pub fn solve_y_given_x(x: f64, params: &ModelParams) -> Result<Vec<f64>> {
    if x == 0.0 || !x.is_finite() {
        return Err(Error::Domain(format!("x must be finite and nonzero, got {x}")));
    }
    let (a, b, c) = y_quadratic(x, params);
    let mut roots = Vec::with_capacity(2);
    if a == 0.0 {
        if b == 0.0 {
            return Err(Error::DegenerateEquation);
        }
        roots.push(-c / b);
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return Ok(Vec::new());
        }
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        if q == 0.0 {
            roots.push(0.0);
        } else {
            roots.push(q / a);
            roots.push(c / q);
        }
    }
    roots.retain(|y| *y != 0.0 && y.is_finite());
    roots.sort_by(f64::total_cmp);
    roots.dedup();
    Ok(roots)
}

/// One of the two root branches `y = (-B +- sqrt(D)) / 2A`, continuous in
/// `x` wherever `D >= 0`. The discriminant is clamped at zero so the branch
/// can be evaluated at (and marginally past) its end point.
fn branch_y(x: f64, plus: bool, p: &ModelParams) -> Option<f64> {
    let (a, b, c) = y_quadratic(x, p);
    if a == 0.0 {
        return (b != 0.0).then(|| -c / b);
    }
    let d = (b * b - 4.0 * a * c).max(0.0).sqrt();
    let q = -0.5 * (b + if b >= 0.0 { d } else { -d });
    let y = if plus == (b >= 0.0) {
        if q == 0.0 {
            return None;
        }
        c / q
    } else {
        q / a
    };
    y.is_finite().then_some(y)
}

fn discriminant(x: f64, p: &ModelParams) -> f64 {
    let (a, b, c) = y_quadratic(x, p);
    if a == 0.0 {
        1.0
    } else {
        b * b - 4.0 * a * c
    }
}

/// The first reduced equation along a `y` branch.
fn composed(x: f64, plus: bool, p: &ModelParams) -> Option<f64> {
    let y = branch_y(x, plus, p)?;
    if y == 0.0 {
        return None;
    }
    let r = residuals_unchecked(x, y, p).0;
    r.is_finite().then_some(r)
}

fn bisect<F: Fn(f64) -> Option<f64>>(f: F, mut lo: f64, mut hi: f64, mut f_lo: f64) -> Option<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Some(mid);
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Locates the point between `defined` (D >= 0) and `undefined` (D < 0)
/// where the discriminant vanishes, returned on the defined side.
fn branch_end(p: &ModelParams, mut defined: f64, mut undefined: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (defined + undefined);
        if mid == defined || mid == undefined {
            break;
        }
        if discriminant(mid, p) >= 0.0 {
            defined = mid;
        } else {
            undefined = mid;
        }
    }
    defined
}

/// Sign-change scan of the composed reduced equation over a log grid in
/// `|x|` for both signs and both `y` branches. Returns candidate real
/// amplitudes; poles of the composed function also produce sign changes and
/// are left for the caller's residual check to reject.
pub(crate) fn x_scan(params: &ModelParams, search: &SearchConfig) -> (Vec<[f64; 3]>, Vec<SeedFailure>) {
    let mut found = Vec::new();
    let mut failures = Vec::new();
    if params.w == 0.0 || params.v == 0.0 {
        // a zero coupling forces a vanishing amplitude; ratios are undefined
        return (found, failures);
    }
    let n = (search.x_points / 2).max(2);
    let (lmin, lmax) = (search.x_min.log10(), search.x_max.log10());
    for sign in [-1.0, 1.0] {
        let xs: Vec<f64> = (0..n)
            .map(|i| sign * 10f64.powf(lmin + (lmax - lmin) * i as f64 / (n - 1) as f64))
            .collect();
        for plus in [false, true] {
            let f = |x: f64| composed(x, plus, params);
            for pair in xs.windows(2) {
                let (x0, x1) = (pair[0], pair[1]);
                let (d0, d1) = (discriminant(x0, params) >= 0.0, discriminant(x1, params) >= 0.0);
                let (lo, hi) = match (d0, d1) {
                    (true, true) => (x0, x1),
                    (true, false) => (x0, branch_end(params, x0, x1)),
                    (false, true) => (branch_end(params, x1, x0), x1),
                    (false, false) => continue,
                };
                let (Some(f_lo), Some(f_hi)) = (f(lo), f(hi)) else {
                    continue;
                };
                if f_lo == 0.0 || (f_lo > 0.0) != (f_hi > 0.0) {
                    let root = if f_lo == 0.0 { Some(lo) } else { bisect(f, lo, hi, f_lo) };
                    match root.and_then(|x| Some((x, branch_y(x, plus, params)?))) {
                        Some((x, y)) if y != 0.0 => {
                            found.push(ReducedCoords { x, y }.amplitudes());
                        }
                        _ => failures.push(SeedFailure {
                            method: SearchMethod::XScan,
                            seed: [lo, hi],
                            reason: "bracket lost during bisection".into(),
                        }),
                    }
                }
            }
        }
    }
    (found, failures)
}
