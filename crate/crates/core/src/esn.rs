//! Echo-state-network baseline: a minimal conventional discrete ESN with
//! tanh nodes and a ridge-trained linear readout, used for the NARMA10
//! comparison.

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::pipeline::GramAccumulator;
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EsnConfig {
    pub n: usize,
    pub spectral_radius: f64,
    pub input_scale: f64,
    pub seed: u64,
    /// Ridge constant for the readout.
    pub epsilon: f64,
}

impl EsnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("ESN needs at least one node"));
        }
        if !(self.spectral_radius > 0.0) {
            return Err(invalid("spectral radius must be positive"));
        }
        if !(self.input_scale >= 0.0) || !(self.epsilon >= 0.0) {
            return Err(invalid("input scale and ridge constant must be nonnegative"));
        }
        Ok(())
    }
}

/// Recurrent weights rescaled to the requested spectral radius, plus scalar
/// input weights.
#[derive(Debug, Clone)]
pub struct Esn {
    pub cfg: EsnConfig,
    pub w: DMatrix<f64>,
    pub w_in: DVector<f64>,
}

impl Esn {
    /// Draws weights uniform on [-1, 1] (inputs on [-sigma, sigma]) and
    /// rescales the recurrent matrix so its largest eigenvalue magnitude
    /// equals the configured spectral radius.
    pub fn new(cfg: EsnConfig) -> Result<Self> {
        cfg.validate()?;
        let mut rng = stream_rng(cfg.seed, crate::rng::stream::ESN);
        let n = cfg.n;
        let mut w = DMatrix::from_fn(n, n, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
        let w_in =
            DVector::from_fn(n, |_, _| (rng.gen::<f64>() * 2.0 - 1.0) * cfg.input_scale);
        let radius = w
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if radius < 1e-12 {
            return Err(invalid("recurrent matrix has (near-)zero spectral radius"));
        }
        w *= cfg.spectral_radius / radius;
        Ok(Self { cfg, w, w_in })
    }

    /// `x^k = tanh(W x^{k-1} + w_in u^k)`, in place.
    pub fn step(&self, state: &mut DVector<f64>, u: f64) {
        debug_assert_eq!(state.len(), self.cfg.n);
        let mut next = &self.w * &*state;
        next.axpy(u, &self.w_in, 1.0);
        next.apply(|x| *x = x.tanh());
        *state = next;
    }
}

fn features_of(state: &DVector<f64>, out: &mut [f64]) {
    out[0] = 1.0; // constant bias node
    out[1..].copy_from_slice(state.as_slice());
}

/// Runs the ESN over a scalar driver/target pair split into wipe-out,
/// training and test windows, trains the readout by ridge regression, and
/// returns the test NMSE.
pub fn esn_narma10(
    cfg: EsnConfig,
    u: &[f64],
    y: &[f64],
    n_wipe: usize,
    n_train: usize,
    n_test: usize,
) -> Result<f64> {
    if u.len() != y.len() {
        return Err(invalid("driver and target series lengths differ"));
    }
    if n_train == 0 || n_test == 0 {
        return Err(invalid("training and test windows must be nonempty"));
    }
    let needed = n_wipe + n_train + n_test;
    if u.len() < needed {
        return Err(invalid(format!("series has {} samples, needs {needed}", u.len())));
    }
    let esn = Esn::new(cfg)?;
    let mut state = DVector::zeros(cfg.n);
    let nro = cfg.n + 1;
    let mut feat = vec![0.0; nro];
    let mut acc = GramAccumulator::new(nro, 1);
    let mut k = 0;
    for _ in 0..n_wipe {
        esn.step(&mut state, u[k]);
        k += 1;
    }
    for _ in 0..n_train {
        esn.step(&mut state, u[k]);
        features_of(&state, &mut feat);
        acc.push(&feat, &y[k..k + 1]);
        k += 1;
    }
    let (w, _train_nmse) = acc.solve(cfg.epsilon)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for _ in 0..n_test {
        esn.step(&mut state, u[k]);
        features_of(&state, &mut feat);
        let pred: f64 = w.row(0).iter().zip(&feat).map(|(a, b)| a * b).sum();
        num += (pred - y[k]).powi(2);
        den += y[k] * y[k];
        k += 1;
    }
    if den == 0.0 {
        return Err(invalid("test targets have zero energy; NMSE undefined"));
    }
    Ok(num / den)
}

/// Declared hyperparameter grid for the NARMA10 baseline.
pub fn esn_grid() -> Vec<(f64, f64, f64)> {
    let rhos = [0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2];
    let sigmas = [0.1, 0.25, 0.5, 1.0];
    let epsilons = [1e-11, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5];
    let mut grid = Vec::new();
    for &r in &rhos {
        for &s in &sigmas {
            for &e in &epsilons {
                grid.push((r, s, e));
            }
        }
    }
    grid
}

/// Grid search over [`esn_grid`]; returns the best NMSE and its config.
/// Points that fail numerically are skipped.
pub fn esn_narma10_grid(
    n: usize,
    seed: u64,
    u: &[f64],
    y: &[f64],
    n_wipe: usize,
    n_train: usize,
    n_test: usize,
) -> Result<(f64, EsnConfig)> {
    let results: Vec<(f64, EsnConfig)> = esn_grid()
        .par_iter()
        .filter_map(|&(rho, sigma, eps)| {
            let cfg = EsnConfig {
                n,
                spectral_radius: rho,
                input_scale: sigma,
                seed,
                epsilon: eps,
            };
            esn_narma10(cfg, u, y, n_wipe, n_train, n_test)
                .ok()
                .map(|nmse| (nmse, cfg))
        })
        .collect();
    results
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .ok_or_else(|| invalid("every grid point failed"))
}
