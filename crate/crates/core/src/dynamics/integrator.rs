//! Dormand-Prince 5(4) with the standard fourth-order dense output.

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[inline]
fn comb<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for &(c, k) in terms {
        let hc = h * c;
        for i in 0..N {
            out[i] += k[i] * hc;
        }
    }
    out
}

pub(crate) struct StepResult<const N: usize> {
    pub y_new: [f64; N],
    /// Derivative at the end of the step (first stage of the next step).
    pub f_new: [f64; N],
    /// Componentwise error estimate.
    pub error: [f64; N],
    pub dense: Dense<N>,
}

/// Interpolant over one step.
pub(crate) struct Dense<const N: usize> {
    r: [[f64; N]; 5],
}

impl<const N: usize> Dense<N> {
    pub fn eval(&self, theta: f64) -> [f64; N] {
        let s = 1.0 - theta;
        let r = &self.r;
        std::array::from_fn(|i| r[0][i] + (r[1][i] + (r[2][i] + (r[3][i] + r[4][i] * s) * theta) * s) * theta)
    }
}

/// One trial step from `(t, y)` with `f0 = f(t, y)`.
pub(crate) fn dp5_step<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]>(
    f: &F,
    t: f64,
    y: &[f64; N],
    f0: &[f64; N],
    h: f64,
) -> StepResult<N> {
    let k1 = *f0;
    let k2 = f(t + C2 * h, &comb(y, h, &[(A21, &k1)]));
    let k3 = f(t + C3 * h, &comb(y, h, &[(A31, &k1), (A32, &k2)]));
    let k4 = f(t + C4 * h, &comb(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(t + C5 * h, &comb(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = f(t + h, &comb(y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
    let y_new = comb(y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = f(t + h, &y_new);

    let error = comb(&[0.0; N], h, &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)]);
    let mut r = [[0.0; N]; 5];
    for i in 0..N {
        let dy = y_new[i] - y[i];
        r[0][i] = y[i];
        r[1][i] = dy;
        r[2][i] = k1[i] * h - dy;
        r[3][i] = dy - k7[i] * h - r[2][i];
        r[4][i] = (k1[i] * D1 + k3[i] * D3 + k4[i] * D4 + k5[i] * D5 + k6[i] * D6 + k7[i] * D7) * h;
    }
    StepResult {
        y_new,
        f_new: k7,
        error,
        dense: Dense { r },
    }
}
