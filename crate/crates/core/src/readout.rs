//! Read-out functions mapping phases to regression features, and the trained
//! linear weights applied to them.

use nalgebra::DMatrix;

use crate::error::{invalid, Result};

/// The three read-out feature maps. The first feature is always the constant
/// bias `1`, followed by the `sin` block and, for the two-block variants, a
/// second block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReadoutSpec {
    /// `[1, sin(theta)]`
    V1,
    /// `[1, sin(theta), cos(theta)]`
    V2,
    /// `[1, sin(theta), sin^2(theta)]`
    V3,
}

impl ReadoutSpec {
    /// Feature count for `n` oscillators.
    pub fn feature_count(self, n: usize) -> usize {
        match self {
            ReadoutSpec::V1 => n + 1,
            ReadoutSpec::V2 | ReadoutSpec::V3 => 2 * n + 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ReadoutSpec::V1 => "v1",
            ReadoutSpec::V2 => "v2",
            ReadoutSpec::V3 => "v3",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "v1" => Ok(ReadoutSpec::V1),
            "v2" => Ok(ReadoutSpec::V2),
            "v3" => Ok(ReadoutSpec::V3),
            other => Err(invalid(format!("unknown readout variant '{other}'"))),
        }
    }

    /// Writes the feature vector for `phases` into `out`.
    pub fn features_into(self, phases: &[f64], out: &mut [f64]) {
        let n = phases.len();
        debug_assert_eq!(out.len(), self.feature_count(n));
        out[0] = 1.0;
        match self {
            ReadoutSpec::V1 => {
                for (k, &th) in phases.iter().enumerate() {
                    out[1 + k] = th.sin();
                }
            }
            ReadoutSpec::V2 => {
                for (k, &th) in phases.iter().enumerate() {
                    let (s, c) = th.sin_cos();
                    out[1 + k] = s;
                    out[1 + n + k] = c;
                }
            }
            ReadoutSpec::V3 => {
                for (k, &th) in phases.iter().enumerate() {
                    let s = th.sin();
                    out[1 + k] = s;
                    out[1 + n + k] = s * s;
                }
            }
        }
    }

}

/// Computes the read-out features of a phase vector.
pub fn readout_features(phases: &[f64], spec: ReadoutSpec) -> Vec<f64> {
    let mut out = vec![0.0; spec.feature_count(phases.len())];
    spec.features_into(phases, &mut out);
    out
}

/// A trained `M x N_ro` linear map from read-out features to predictions.
#[derive(Debug, Clone)]
pub struct ReadoutWeights {
    /// Row `m` maps the feature vector to output component `m`.
    pub w: DMatrix<f64>,
    pub spec: ReadoutSpec,
    /// Ridge constant used during training.
    pub epsilon: f64,
}

impl ReadoutWeights {
    pub fn new(w: DMatrix<f64>, spec: ReadoutSpec, epsilon: f64) -> Self {
        Self { w, spec, epsilon }
    }

    /// All-zero weights; the closed loop then behaves as if driven by `u = 0`.
    pub fn zeros(m: usize, n: usize, spec: ReadoutSpec) -> Self {
        Self {
            w: DMatrix::zeros(m, spec.feature_count(n)),
            spec,
            epsilon: 0.0,
        }
    }

    pub fn output_dim(&self) -> usize {
        self.w.nrows()
    }

    /// Oscillator count this weight matrix was trained for.
    pub fn oscillator_count(&self) -> usize {
        match self.spec {
            ReadoutSpec::V1 => self.w.ncols() - 1,
            ReadoutSpec::V2 | ReadoutSpec::V3 => (self.w.ncols() - 1) / 2,
        }
    }

    /// `u_hat = W f(theta)`.
    pub fn predict(&self, phases: &[f64]) -> Vec<f64> {
        let n = phases.len();
        let mut sin = vec![0.0; n];
        let mut cos = vec![0.0; n];
        for k in 0..n {
            let (s, c) = phases[k].sin_cos();
            sin[k] = s;
            cos[k] = c;
        }
        let mut out = vec![0.0; self.output_dim()];
        self.predict_from_trig_into(&sin, &cos, &mut out);
        out
    }

    /// Prediction from precomputed `sin`/`cos` buffers; the hot path of the
    /// autonomous vector field. Column-major access keeps this cache-friendly.
    pub(crate) fn predict_from_trig_into(&self, sin: &[f64], cos: &[f64], out: &mut [f64]) {
        let m = self.output_dim();
        let n = sin.len();
        debug_assert_eq!(out.len(), m);
        let w = self.w.as_slice();
        for o in out.iter_mut().zip(w[..m].iter()) {
            *o.0 = *o.1; // bias column
        }
        match self.spec {
            ReadoutSpec::V1 => {
                for j in 0..n {
                    let col = &w[m * (1 + j)..m * (2 + j)];
                    let s = sin[j];
                    for (o, &wv) in out.iter_mut().zip(col) {
                        *o += wv * s;
                    }
                }
            }
            ReadoutSpec::V2 => {
                for j in 0..n {
                    let col1 = &w[m * (1 + j)..m * (2 + j)];
                    let col2 = &w[m * (1 + n + j)..m * (2 + n + j)];
                    let (s, c) = (sin[j], cos[j]);
                    for i in 0..m {
                        out[i] += col1[i] * s + col2[i] * c;
                    }
                }
            }
            ReadoutSpec::V3 => {
                for j in 0..n {
                    let col1 = &w[m * (1 + j)..m * (2 + j)];
                    let col2 = &w[m * (1 + n + j)..m * (2 + n + j)];
                    let s = sin[j];
                    let s2 = s * s;
                    for i in 0..m {
                        out[i] += col1[i] * s + col2[i] * s2;
                    }
                }
            }
        }
    }

    /// Writes `out[m] = sum_j (d u_hat_m / d theta_j) v[j]` using precomputed
    /// trig buffers; the O(N*M) kernel of the fast Jacobian-vector product.
    pub(crate) fn gradient_dot(&self, sin: &[f64], cos: &[f64], v: &[f64], out: &mut [f64]) {
        let m = self.output_dim();
        let n = sin.len();
        debug_assert_eq!(out.len(), m);
        out.fill(0.0);
        let w = self.w.as_slice();
        match self.spec {
            ReadoutSpec::V1 => {
                for j in 0..n {
                    let col = &w[m * (1 + j)..m * (2 + j)];
                    let g = cos[j] * v[j];
                    for i in 0..m {
                        out[i] += col[i] * g;
                    }
                }
            }
            ReadoutSpec::V2 => {
                for j in 0..n {
                    let col1 = &w[m * (1 + j)..m * (2 + j)];
                    let col2 = &w[m * (1 + n + j)..m * (2 + n + j)];
                    let (gc, gs) = (cos[j] * v[j], sin[j] * v[j]);
                    for i in 0..m {
                        out[i] += col1[i] * gc - col2[i] * gs;
                    }
                }
            }
            ReadoutSpec::V3 => {
                for j in 0..n {
                    let col1 = &w[m * (1 + j)..m * (2 + j)];
                    let col2 = &w[m * (1 + n + j)..m * (2 + n + j)];
                    let gc = cos[j] * v[j];
                    let gsc = 2.0 * sin[j] * cos[j] * v[j];
                    for i in 0..m {
                        out[i] += col1[i] * gc + col2[i] * gsc;
                    }
                }
            }
        }
    }

    /// Derivative of output `m` with respect to phase `j`, given the trig
    /// values of phase `j`. Used by the Jacobian routines.
    pub(crate) fn output_gradient(&self, m: usize, j: usize, sin_j: f64, cos_j: f64) -> f64 {
        let n = self.oscillator_count();
        match self.spec {
            ReadoutSpec::V1 => self.w[(m, 1 + j)] * cos_j,
            ReadoutSpec::V2 => self.w[(m, 1 + j)] * cos_j - self.w[(m, 1 + n + j)] * sin_j,
            ReadoutSpec::V3 => {
                self.w[(m, 1 + j)] * cos_j + 2.0 * self.w[(m, 1 + n + j)] * sin_j * cos_j
            }
        }
    }
}
