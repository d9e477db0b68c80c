//! The nonlinear three-level model: parameters, states, the Hamiltonian
//! action and the equivalent classical Hamiltonian in canonical coordinates.
//!
//! Units are dimensionless with `hbar = 1`. The on-site energy of the middle
//! well is the energy zero.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance on `|a|^2+|b|^2+|c|^2 - 1` when constructing a state.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// The five parameters of the three-level Hamiltonian.
///
/// `epsilon` and `delta` are the on-site energies of wells 1 and 3, `v` and
/// `w` the tunnel couplings 1-2 and 2-3, and `g` the mean-field interaction.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ModelParams {
    pub epsilon: f64,
    pub delta: f64,
    pub v: f64,
    pub w: f64,
    pub g: f64,
}

impl ModelParams {
    pub fn new(epsilon: f64, delta: f64, v: f64, w: f64, g: f64) -> Result<Self> {
        let p = Self {
            epsilon,
            delta,
            v,
            w,
            g,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, x) in [
            ("epsilon", self.epsilon),
            ("delta", self.delta),
            ("v", self.v),
            ("w", self.w),
            ("g", self.g),
        ] {
            if !x.is_finite() {
                return Err(Error::NonFinite(name));
            }
        }
        Ok(())
    }

    /// The constant part of the Hamiltonian (the `g = 0` matrix).
    pub fn linear_matrix(&self) -> [[f64; 3]; 3] {
        [
            [self.epsilon, self.v, 0.0],
            [self.v, 0.0, self.w],
            [0.0, self.w, self.delta],
        ]
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_g(mut self, g: f64) -> Self {
        self.g = g;
        self
    }
}

/// Normalized complex amplitudes `(a, b, c)` in the three wells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    amps: [Complex64; 3],
}

impl StateVector {
    /// Builds a state, rejecting it unless it is normalized to [`NORM_TOLERANCE`].
    pub fn new(a: Complex64, b: Complex64, c: Complex64) -> Result<Self> {
        Self::with_tolerance(a, b, c, NORM_TOLERANCE)
    }

    pub fn with_tolerance(a: Complex64, b: Complex64, c: Complex64, tol: f64) -> Result<Self> {
        let s = Self { amps: [a, b, c] };
        let n = s.norm_sqr();
        if !n.is_finite() || (n - 1.0).abs() > tol {
            return Err(Error::NotNormalized { norm_sqr: n });
        }
        Ok(s)
    }

    /// Scales arbitrary nonzero amplitudes onto the unit sphere.
    pub fn normalized(a: Complex64, b: Complex64, c: Complex64) -> Result<Self> {
        let n = (a.norm_sqr() + b.norm_sqr() + c.norm_sqr()).sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::NotNormalized { norm_sqr: n * n });
        }
        Ok(Self {
            amps: [a / n, b / n, c / n],
        })
    }

    pub fn from_real(u: [f64; 3]) -> Result<Self> {
        Self::normalized(u[0].into(), u[1].into(), u[2].into())
    }

    /// The basis state localized in well `i` (0, 1 or 2).
    pub fn basis(i: usize) -> Self {
        let mut amps = [Complex64::new(0.0, 0.0); 3];
        amps[i] = Complex64::new(1.0, 0.0);
        Self { amps }
    }

    pub(crate) fn from_amplitudes_unchecked(amps: [Complex64; 3]) -> Self {
        Self { amps }
    }

    pub fn a(&self) -> Complex64 {
        self.amps[0]
    }

    pub fn b(&self) -> Complex64 {
        self.amps[1]
    }

    pub fn c(&self) -> Complex64 {
        self.amps[2]
    }

    pub fn amplitudes(&self) -> [Complex64; 3] {
        self.amps
    }

    /// Real parts of the amplitudes; meaningful for states in the real sector.
    pub fn real_parts(&self) -> [f64; 3] {
        [self.amps[0].re, self.amps[1].re, self.amps[2].re]
    }

    pub fn populations(&self) -> [f64; 3] {
        [
            self.amps[0].norm_sqr(),
            self.amps[1].norm_sqr(),
            self.amps[2].norm_sqr(),
        ]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.populations().iter().sum()
    }

    /// Inner product `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(x, y)| x.conj() * y)
            .sum()
    }

    /// `|<self|other>|`, insensitive to global phase.
    pub fn overlap(&self, other: &StateVector) -> f64 {
        self.inner(other).norm()
    }

    pub fn with_global_phase(&self, theta: f64) -> Self {
        let z = Complex64::from_polar(1.0, theta);
        Self {
            amps: self.amps.map(|x| x * z),
        }
    }

    /// Representative with `arg b = 0`; returned unchanged when `b = 0`.
    pub fn gauge_fixed(&self) -> Self {
        let b = self.amps[1];
        if b.norm() == 0.0 {
            return *self;
        }
        self.with_global_phase(-b.arg())
    }

    /// Rescales to unit norm, for states that accumulated rounding.
    pub fn renormalized(&self) -> Self {
        let n = self.norm_sqr().sqrt();
        Self {
            amps: self.amps.map(|x| x / n),
        }
    }
}

/// `H(|a|^2,|b|^2,|c|^2) (a, b, c)^T` on raw amplitudes.
#[inline]
pub fn hamiltonian_action(psi: &[Complex64; 3], p: &ModelParams) -> [Complex64; 3] {
    let [a, b, c] = *psi;
    [
        (p.epsilon + p.g * a.norm_sqr()) * a + p.v * b,
        p.v * a + p.g * b.norm_sqr() * b + p.w * c,
        p.w * b + (p.delta + p.g * c.norm_sqr()) * c,
    ]
}

pub fn apply_hamiltonian(state: &StateVector, params: &ModelParams) -> [Complex64; 3] {
    hamiltonian_action(&state.amps, params)
}

/// `mu = Re <psi| H(|psi|^2) |psi>`.
pub fn chemical_potential(state: &StateVector, params: &ModelParams) -> f64 {
    let h = apply_hamiltonian(state, params);
    state
        .amps
        .iter()
        .zip(h.iter())
        .map(|(x, y)| (x.conj() * y).re)
        .sum()
}

/// Max-norm of `H psi - mu psi` with `mu` the chemical potential of `psi`.
pub fn stationary_residual(state: &StateVector, params: &ModelParams) -> f64 {
    let mu = chemical_potential(state, params);
    let h = apply_hamiltonian(state, params);
    h.iter()
        .zip(state.amps.iter())
        .map(|(hx, x)| (hx - mu * x).norm())
        .fold(0.0, f64::max)
}

/// Populations `p1 = |a|^2`, `p3 = |c|^2` and relative phases
/// `q1 = arg b - arg a`, `q3 = arg b - arg c`, reduced to `[0, 2pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalCoords {
    p1: f64,
    p3: f64,
    q1: f64,
    q3: f64,
}

impl CanonicalCoords {
    pub fn new(p1: f64, p3: f64, q1: f64, q3: f64) -> Result<Self> {
        const SLACK: f64 = 1e-14;
        if ![p1, p3, q1, q3].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidCoords("non-finite coordinate".into()));
        }
        if p1 < -SLACK || p3 < -SLACK || p1 + p3 > 1.0 + SLACK {
            return Err(Error::InvalidCoords(format!(
                "populations outside the simplex: p1={p1}, p3={p3}"
            )));
        }
        Ok(Self {
            p1: p1.clamp(0.0, 1.0),
            p3: p3.clamp(0.0, 1.0),
            q1: q1.rem_euclid(TAU),
            q3: q3.rem_euclid(TAU),
        })
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p3(&self) -> f64 {
        self.p3
    }

    /// Middle-well population `1 - p1 - p3`.
    pub fn p2(&self) -> f64 {
        (1.0 - self.p1 - self.p3).max(0.0)
    }

    pub fn q1(&self) -> f64 {
        self.q1
    }

    pub fn q3(&self) -> f64 {
        self.q3
    }

    fn is_interior(&self) -> bool {
        self.p1 > 0.0 && self.p3 > 0.0 && 1.0 - self.p1 - self.p3 > 0.0
    }
}

fn phase_or_zero(z: Complex64) -> f64 {
    if z.norm() == 0.0 {
        0.0
    } else {
        z.arg()
    }
}

pub fn to_canonical(state: &StateVector) -> Result<CanonicalCoords> {
    let [a, b, c] = state.amps;
    if b.norm() == 0.0 {
        return Err(Error::DegeneratePhase);
    }
    let n = state.norm_sqr();
    let phase_b = b.arg();
    let q1 = if a.norm() == 0.0 {
        0.0
    } else {
        phase_b - phase_or_zero(a)
    };
    let q3 = if c.norm() == 0.0 {
        0.0
    } else {
        phase_b - phase_or_zero(c)
    };
    CanonicalCoords::new(a.norm_sqr() / n, c.norm_sqr() / n, q1, q3)
}

/// Inverse of [`to_canonical`] in the gauge `arg b = 0`.
pub fn from_canonical(coords: &CanonicalCoords) -> StateVector {
    let b = Complex64::new(coords.p2().sqrt(), 0.0);
    let a = Complex64::from_polar(coords.p1.sqrt(), -coords.q1);
    let c = Complex64::from_polar(coords.p3.sqrt(), -coords.q3);
    StateVector::normalized(a, b, c).expect("canonical coordinates map to a nonzero state")
}

/// The classical Hamiltonian function whose critical points are the
/// stationary states.
pub fn classical_hamiltonian(coords: &CanonicalCoords, params: &ModelParams) -> f64 {
    let CanonicalCoords { p1, p3, q1, q3 } = *coords;
    let p2 = coords.p2();
    params.epsilon * p1
        + params.delta * p3
        + 0.5 * params.g * (p1 * p1 + p3 * p3 + p2 * p2)
        + 2.0 * p2.sqrt() * (params.v * p1.sqrt() * q1.cos() + params.w * p3.sqrt() * q3.cos())
}

/// Partial derivatives `(dH/dp1, dH/dp3, dH/dq1, dH/dq3)` at an interior point.
fn hamiltonian_partials(coords: &CanonicalCoords, params: &ModelParams) -> Result<[f64; 4]> {
    if !coords.is_interior() {
        return Err(Error::SingularDerivative {
            p1: coords.p1,
            p3: coords.p3,
        });
    }
    let CanonicalCoords { p1, p3, q1, q3 } = *coords;
    let p2 = coords.p2();
    let (s, r1, r3) = (p2.sqrt(), p1.sqrt(), p3.sqrt());
    let (c1, c3) = (params.v * q1.cos(), params.w * q3.cos());
    let k = c1 * r1 + c3 * r3;
    Ok([
        params.epsilon + params.g * (p1 - p2) - k / s + s * c1 / r1,
        params.delta + params.g * (p3 - p2) - k / s + s * c3 / r3,
        -2.0 * s * r1 * params.v * q1.sin(),
        -2.0 * s * r3 * params.w * q3.sin(),
    ])
}

/// Hamilton's equations: `(dp1/dt, dp3/dt, dq1/dt, dq3/dt)`.
pub fn classical_gradient(coords: &CanonicalCoords, params: &ModelParams) -> Result<[f64; 4]> {
    let [h_p1, h_p3, h_q1, h_q3] = hamiltonian_partials(coords, params)?;
    Ok([-h_q1, -h_q3, h_p1, h_p3])
}

/// Second derivatives of the classical Hamiltonian in the ordering
/// `(p1, p3, q1, q3)`. Interior points only.
pub fn classical_hessian(coords: &CanonicalCoords, params: &ModelParams) -> Result<[[f64; 4]; 4]> {
    if !coords.is_interior() {
        return Err(Error::SingularDerivative {
            p1: coords.p1,
            p3: coords.p3,
        });
    }
    let CanonicalCoords { p1, p3, q1, q3 } = *coords;
    let g = params.g;
    let s = coords.p2().sqrt();
    let (r1, r3) = (p1.sqrt(), p3.sqrt());
    let (c1, c3) = (params.v * q1.cos(), params.w * q3.cos());
    let (s1, s3) = (params.v * q1.sin(), params.w * q3.sin());
    let k = c1 * r1 + c3 * r3;
    let s3cube = s * s * s;

    let h11 = 2.0 * g - c1 / (r1 * s) - k / (2.0 * s3cube) - s * c1 / (2.0 * r1 * r1 * r1);
    let h33 = 2.0 * g - c3 / (r3 * s) - k / (2.0 * s3cube) - s * c3 / (2.0 * r3 * r3 * r3);
    let h13 = g - c1 / (2.0 * r1 * s) - c3 / (2.0 * r3 * s) - k / (2.0 * s3cube);

    // d/dq of dH/dp
    let h1q1 = s1 * r1 / s - s * s1 / r1;
    let h1q3 = s3 * r3 / s;
    let h3q1 = s1 * r1 / s;
    let h3q3 = s3 * r3 / s - s * s3 / r3;

    let hq1q1 = -2.0 * s * r1 * c1;
    let hq3q3 = -2.0 * s * r3 * c3;

    Ok([
        [h11, h13, h1q1, h1q3],
        [h13, h33, h3q1, h3q3],
        [h1q1, h3q1, hq1q1, 0.0],
        [h1q3, h3q3, 0.0, hq3q3],
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn hamiltonian_on_basis_states() {
        let p = ModelParams::new(0.5, 0.0, 0.1, 0.2, 0.2).unwrap();
        let h = apply_hamiltonian(&StateVector::basis(0), &p);
        assert_abs_diff_eq!(h[0].re, 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(h[1].re, 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(h[2].norm(), 0.0);

        let p = ModelParams::new(0.0, -0.4, 0.1, 0.2, -0.4).unwrap();
        let h = apply_hamiltonian(&StateVector::basis(2), &p);
        assert_abs_diff_eq!(h[0].norm(), 0.0);
        assert_abs_diff_eq!(h[1].re, 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(h[2].re, -0.8, epsilon = 1e-15);
    }

    #[test]
    fn chemical_potential_of_pure_states() {
        let p = ModelParams::new(0.3, -0.7, 0.1, 0.2, 0.45).unwrap();
        assert_abs_diff_eq!(chemical_potential(&StateVector::basis(0), &p), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(chemical_potential(&StateVector::basis(1), &p), 0.45, epsilon = 1e-15);
    }

    #[test]
    fn state_construction_checks_norm() {
        assert!(StateVector::new(c(1.0), c(0.0), c(1e-5)).is_err());
        assert!(StateVector::new(c(1.0), c(0.0), c(1e-7)).is_ok());
        assert!(StateVector::new(c(0.6), c(0.8), c(0.0)).is_ok());
        assert!(StateVector::normalized(c(0.0), c(0.0), c(0.0)).is_err());
    }

    #[test]
    fn gauge_fix_makes_b_real_positive() {
        let s = StateVector::normalized(
            Complex64::new(0.3, 0.2),
            Complex64::new(-0.1, 0.5),
            Complex64::new(0.4, -0.3),
        )
        .unwrap();
        let g = s.gauge_fixed();
        assert_abs_diff_eq!(g.b().im, 0.0, epsilon = 1e-15);
        assert!(g.b().re > 0.0);
        assert_abs_diff_eq!(g.overlap(&s), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn canonical_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let k = to_canonical(&StateVector::new(c(h), c(h), c(0.0)).unwrap()).unwrap();
        assert_abs_diff_eq!(k.p1(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(k.p3(), 0.0);
        assert_abs_diff_eq!(k.q1(), 0.0);
        assert_abs_diff_eq!(k.q3(), 0.0);

        let third = 1.0 / 3.0;
        let s = from_canonical(&CanonicalCoords::new(third, third, 0.0, 0.0).unwrap());
        for z in s.amplitudes() {
            assert_abs_diff_eq!(z.re, third.sqrt(), epsilon = 1e-15);
            assert_abs_diff_eq!(z.im, 0.0);
        }
    }

    #[test]
    fn canonical_rejects_zero_b() {
        assert_eq!(
            to_canonical(&StateVector::basis(0)),
            Err(Error::DegeneratePhase)
        );
    }

    #[test]
    fn classical_hamiltonian_boundaries() {
        let p = ModelParams::new(0.5, -0.3, 0.1, 0.2, 0.2).unwrap();
        let k = CanonicalCoords::new(1.0, 0.0, 0.4, 1.0).unwrap();
        assert_abs_diff_eq!(classical_hamiltonian(&k, &p), 0.6, epsilon = 1e-15);
        let k = CanonicalCoords::new(0.0, 0.0, 0.4, 1.0).unwrap();
        assert_abs_diff_eq!(classical_hamiltonian(&k, &p), 0.1, epsilon = 1e-15);
    }

    #[test]
    fn gradient_errors_on_boundary_and_vanishes_for_zero_phases() {
        let p = ModelParams::new(0.5, -0.3, 0.1, 0.2, 0.2).unwrap();
        let k = CanonicalCoords::new(0.0, 0.3, 0.0, 0.0).unwrap();
        assert!(matches!(
            classical_gradient(&k, &p),
            Err(Error::SingularDerivative { .. })
        ));
        let k = CanonicalCoords::new(0.2, 0.3, 0.0, 0.0).unwrap();
        let grad = classical_gradient(&k, &p).unwrap();
        assert_eq!(grad[0], 0.0);
        assert_eq!(grad[1], 0.0);
    }

    #[test]
    fn hessian_matches_finite_differences_of_gradient() {
        let p = ModelParams::new(0.3, -0.4, 0.1, 0.2, -0.6).unwrap();
        let x = [0.21, 0.33, 0.7, 2.1];
        let k = CanonicalCoords::new(x[0], x[1], x[2], x[3]).unwrap();
        let hess = classical_hessian(&k, &p).unwrap();
        let step = 1e-6;
        for j in 0..4 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += step;
            xm[j] -= step;
            let gp = hamiltonian_partials(&CanonicalCoords::new(xp[0], xp[1], xp[2], xp[3]).unwrap(), &p).unwrap();
            let gm = hamiltonian_partials(&CanonicalCoords::new(xm[0], xm[1], xm[2], xm[3]).unwrap(), &p).unwrap();
            for i in 0..4 {
                let fd = (gp[i] - gm[i]) / (2.0 * step);
                assert_abs_diff_eq!(hess[i][j], fd, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn non_finite_params_rejected() {
        assert_eq!(
            ModelParams::new(f64::NAN, 0.0, 0.0, 0.0, 0.0),
            Err(Error::NonFinite("epsilon"))
        );
    }
}
