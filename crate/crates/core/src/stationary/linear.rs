//! The linear (`g = 0`) spectrum and the two avoided crossings of the
//! equal-slope sweep `epsilon = alpha t`.

use nalgebra::{Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::StationaryState;
use crate::model::ModelParams;

/// Eigenpairs of the `g = 0` matrix, ascending in eigenvalue. The `g` field
/// of `params` is ignored.
pub fn linear_eigensystem(params: &ModelParams) -> [StationaryState; 3] {
    let p = params.with_g(0.0);
    let m = p.linear_matrix();
    let eig = SymmetricEigen::new(Matrix3::from_fn(|i, j| m[i][j]));
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    order.map(|i| {
        let col = eig.eigenvectors.column(i);
        StationaryState::from_real([col[0], col[1], col[2]], &p)
            .expect("eigenvectors are normalized")
    })
}

/// Locations, gap parameters and two-level critical-nonlinearity estimates
/// of the two avoided crossings in the linear equal-slope model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearCrossingData {
    pub lambda1: f64,
    pub lambda2: f64,
    pub n1: f64,
    pub n2: f64,
    /// Signed gap parameters; `|v_i|` is the half-width of gap `i`.
    pub v1: f64,
    pub v2: f64,
    pub gc1: f64,
    pub gc2: f64,
}

/// The crossings sit at `epsilon = lambda_{1,2}`, the eigenvalues of the
/// lower 2x2 block `[[0, w], [w, delta]]`.
pub fn linear_crossing_data(params: &ModelParams) -> LinearCrossingData {
    let ModelParams { delta, v, w, .. } = *params;
    let root = (delta * delta / 4.0 + w * w).sqrt();
    let lambda1 = delta / 2.0 + root;
    let lambda2 = delta / 2.0 - root;
    let n1 = (lambda2 * lambda2 + w * w).sqrt();
    let n2 = (lambda1 * lambda1 + w * w).sqrt();
    let v1 = -lambda1 * v / n2;
    let v2 = -lambda2 * v / n1;
    LinearCrossingData {
        lambda1,
        lambda2,
        n1,
        n2,
        v1,
        v2,
        gc1: 2.0 * v1.abs(),
        gc2: 2.0 * v2.abs(),
    }
}
