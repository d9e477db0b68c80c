//! Critical points of the classical Hamiltonian in the real sector.
//!
//! Restricted to phases `q1, q3 in {0, pi}` the classical Hamiltonian becomes
//! a function of signed real amplitudes: `sqrt(p1) cos(q1) = a` and
//! `sqrt(p3) cos(q3) = c`. Newton's method runs on its gradient in three
//! charts, each eliminating one amplitude `u_k = sqrt(1 - sum_{j != k} u_j^2)`,
//! which removes the square-root singularities of the `(p, q)` chart at
//! vanishing populations.

use nalgebra::{Matrix2, Vector2};

use super::{free_indices, matvec, nonlinear_matrix, SearchConfig, SearchMethod, SeedFailure};
use crate::model::ModelParams;

/// A chart is only trusted where the eliminated amplitude is at least this
/// large; every normalized state has one amplitude above `1/sqrt(3)`.
const MIN_PIVOT: f64 = 0.5;
const MAX_NEWTON: usize = 60;

struct Chart {
    k: usize,
    free: [usize; 2],
}

impl Chart {
    fn new(k: usize) -> Self {
        Self {
            k,
            free: free_indices(k),
        }
    }

    fn embed(&self, z: &Vector2<f64>) -> Option<[f64; 3]> {
        let rest = 1.0 - z[0] * z[0] - z[1] * z[1];
        if rest <= 0.0 {
            return None;
        }
        let mut u = [0.0; 3];
        u[self.free[0]] = z[0];
        u[self.free[1]] = z[1];
        u[self.k] = rest.sqrt();
        Some(u)
    }

    /// Gradient and Hessian of `E(u) = <u|M|u> + g/2 sum u_i^4` in chart
    /// coordinates.
    fn derivatives(&self, u: &[f64; 3], p: &ModelParams) -> (Vector2<f64>, Matrix2<f64>) {
        let k = self.k;
        let uk = u[k];
        let grad_full = matvec(&nonlinear_matrix(u, p), u).map(|x| 2.0 * x);
        let mut hess_full = p.linear_matrix();
        for i in 0..3 {
            for j in 0..3 {
                hess_full[i][j] *= 2.0;
            }
            hess_full[i][i] += 6.0 * p.g * u[i] * u[i];
        }
        let t: [[f64; 3]; 2] = self.free.map(|j| {
            let mut t = [0.0; 3];
            t[j] = 1.0;
            t[k] = -u[j] / uk;
            t
        });
        let mut grad = Vector2::zeros();
        let mut hess = Matrix2::zeros();
        for a in 0..2 {
            grad[a] = (0..3).map(|i| t[a][i] * grad_full[i]).sum();
            let ht = matvec(&hess_full, &t[a]);
            for b in 0..2 {
                let (ja, jb) = (self.free[a], self.free[b]);
                let curvature = -(if a == b { 1.0 } else { 0.0 }) / uk - u[ja] * u[jb] / (uk * uk * uk);
                hess[(b, a)] = (0..3).map(|i| t[b][i] * ht[i]).sum::<f64>() + grad_full[k] * curvature;
            }
        }
        (grad, hess)
    }

    fn newton(&self, start: Vector2<f64>, p: &ModelParams) -> Result<[f64; 3], String> {
        let mut z = start;
        for _ in 0..MAX_NEWTON {
            let u = self.embed(&z).ok_or("left the chart")?;
            let (grad, hess) = self.derivatives(&u, p);
            if grad.amax() < 1e-15 {
                return Ok(u);
            }
            let mut step = hess.lu().solve(&-grad).ok_or("singular Hessian")?;
            // keep the eliminated amplitude away from zero
            let mut tries = 0;
            while (z + step).norm_squared() > 1.0 - 0.01 {
                step *= 0.5;
                tries += 1;
                if tries > 60 {
                    return Err("step could not stay inside the chart".into());
                }
            }
            z += step;
            if step.amax() < 1e-15 {
                return self.embed(&z).ok_or_else(|| "left the chart".into());
            }
        }
        let u = self.embed(&z).ok_or("left the chart")?;
        let (grad, _) = self.derivatives(&u, p);
        if grad.amax() < 1e-11 {
            Ok(u)
        } else {
            Err(format!("no convergence (gradient {:e})", grad.amax()))
        }
    }
}

/// Newton search from a population grid over the simplex with both signs
/// of each free amplitude (phases 0 and pi), in all three charts.
pub(crate) fn critical_point_search(
    params: &ModelParams,
    search: &SearchConfig,
) -> (Vec<[f64; 3]>, Vec<SeedFailure>) {
    let n = search.cp_grid.max(2);
    let mut found = Vec::new();
    let mut failures = Vec::new();
    for k in 0..3 {
        let chart = Chart::new(k);
        for i in 0..n {
            for l in 0..(n - i) {
                let (pa, pb) = (i as f64 / n as f64, l as f64 / n as f64);
                if pa + pb > 1.0 - MIN_PIVOT * MIN_PIVOT {
                    continue;
                }
                for (sa, sb) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                    if (pa == 0.0 && sa < 0.0) || (pb == 0.0 && sb < 0.0) {
                        continue;
                    }
                    let start = Vector2::new(sa * pa.sqrt(), sb * pb.sqrt());
                    match chart.newton(start, params) {
                        Ok(u) if u[k] >= MIN_PIVOT => found.push(u),
                        Ok(_) => {}
                        Err(reason) => failures.push(SeedFailure {
                            method: SearchMethod::CriticalPoints,
                            seed: [start[0], start[1]],
                            reason,
                        }),
                    }
                }
            }
        }
    }
    (found, failures)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_derivatives_match_finite_differences() {
        let p = ModelParams::new(0.2, -0.4, 0.1, 0.2, -0.7).unwrap();
        let energy = |u: &[f64; 3]| {
            let m = p.linear_matrix();
            let mu = matvec(&m, u);
            (0..3).map(|i| u[i] * mu[i] + 0.5 * p.g * u[i].powi(4)).sum::<f64>()
        };
        for k in 0..3 {
            let chart = Chart::new(k);
            let z = Vector2::new(0.31, -0.42);
            let u = chart.embed(&z).unwrap();
            let (grad, hess) = chart.derivatives(&u, &p);
            let h = 1e-5;
            for a in 0..2 {
                let mut zp = z;
                let mut zm = z;
                zp[a] += h;
                zm[a] -= h;
                let fd = (energy(&chart.embed(&zp).unwrap()) - energy(&chart.embed(&zm).unwrap())) / (2.0 * h);
                assert!((grad[a] - fd).abs() < 1e-8, "chart {k} grad {a}");
                let (gp, _) = chart.derivatives(&chart.embed(&zp).unwrap(), &p);
                let (gm, _) = chart.derivatives(&chart.embed(&zm).unwrap(), &p);
                for b in 0..2 {
                    let fd = (gp[b] - gm[b]) / (2.0 * h);
                    assert!((hess[(b, a)] - fd).abs() < 1e-6, "chart {k} hess {b}{a}");
                }
            }
        }
    }
}
