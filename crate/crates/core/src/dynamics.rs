//! Oscillator state and the driven / autonomous vector fields.
//!
//! The all-to-all coupling is evaluated in O(N) through the two mean-field
//! sums `R1 = sum sin(theta_j)` and `R2 = sum cos(theta_j)`, using
//! `sum_j sin(theta_j - theta_k) = R1 cos(theta_k) - R2 sin(theta_k)`.
//! A pairwise O(N^2) route is kept as the reference implementation; the two
//! must agree to 1e-12.
//!
//! Phases are stored unwrapped on the real line. Periodicity enters only
//! through the trigonometric evaluations, so accumulated winding (needed for
//! rotation numbers) is never lost.

use std::f64::consts::TAU;
use std::sync::Arc;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Result};
use crate::graph::Adjacency;
use crate::readout::ReadoutWeights;
use crate::rng::{stream_rng, Rng};

/// Unwrapped oscillator phases (radians, real line).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    pub phases: Vec<f64>,
}

impl PhaseVector {
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        if phases.is_empty() {
            return Err(invalid("phase vector must not be empty"));
        }
        if !phases.iter().all(|x| x.is_finite()) {
            return Err(invalid("phase vector contains non-finite entries"));
        }
        Ok(Self { phases })
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.phases
    }
}

/// Deterministic initial condition `theta_i = 2 pi (i - 1) / (N - 1)`, spread
/// once around the circle so the initial order parameter is close to zero.
pub fn initial_phases(n: usize) -> PhaseVector {
    let phases = if n == 1 {
        vec![0.0]
    } else {
        (0..n).map(|i| TAU * i as f64 / (n - 1) as f64).collect()
    };
    PhaseVector { phases }
}

/// Uniform-random initial phases on `[0, 2 pi)`.
pub fn random_initial_phases(n: usize, seed: u64) -> PhaseVector {
    let mut rng = stream_rng(seed, crate::rng::stream::INITIAL_PHASES);
    PhaseVector {
        phases: (0..n).map(|_| rng.gen::<f64>() * TAU).collect(),
    }
}

/// Distribution the natural frequencies are drawn from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrequencyDist {
    /// `omega ~ 2 pi Normal(mu, sigma)`.
    Normal { mu: f64, sigma: f64 },
    /// Cauchy density `delta0 / (pi ((omega - omega0)^2 + delta0^2))`,
    /// sampled by inverse CDF.
    Cauchy { omega0: f64, delta0: f64 },
    /// Even mixture of `2 pi Normal(mu1, sigma)` and `2 pi Normal(mu2, sigma)`.
    /// No defaults; callers opt in explicitly.
    Bimodal { mu1: f64, mu2: f64, sigma: f64 },
}

/// Natural frequencies in radians per unit time.
#[derive(Debug, Clone)]
pub struct NaturalFrequencies {
    pub omega: Vec<f64>,
    pub dist: FrequencyDist,
    pub seed: u64,
}

/// Draws `n` natural frequencies; deterministic given the seed.
pub fn sample_frequencies(dist: FrequencyDist, n: usize, seed: u64) -> Result<NaturalFrequencies> {
    match dist {
        FrequencyDist::Normal { sigma, .. } | FrequencyDist::Bimodal { sigma, .. } if sigma < 0.0 => {
            return Err(invalid(format!("sigma = {sigma} must be nonnegative")));
        }
        FrequencyDist::Cauchy { delta0, .. } if delta0 <= 0.0 => {
            return Err(invalid(format!("delta0 = {delta0} must be positive")));
        }
        _ => {}
    }
    let mut rng = stream_rng(seed, crate::rng::stream::FREQUENCIES);
    let omega = (0..n)
        .map(|_| match dist {
            FrequencyDist::Normal { mu, sigma } => {
                let z: f64 = StandardNormal.sample(&mut rng);
                TAU * (mu + sigma * z)
            }
            FrequencyDist::Cauchy { omega0, delta0 } => {
                let u: f64 = rng.gen();
                omega0 + delta0 * (std::f64::consts::PI * (u - 0.5)).tan()
            }
            FrequencyDist::Bimodal { mu1, mu2, sigma } => {
                let z: f64 = StandardNormal.sample(&mut rng);
                let mu = if rng.gen::<bool>() { mu1 } else { mu2 };
                TAU * (mu + sigma * z)
            }
        })
        .collect();
    Ok(NaturalFrequencies { omega, dist, seed })
}

/// Input channel assigned to each oscillator (0-based internally).
#[derive(Debug, Clone)]
pub struct InputAssignment {
    pub v: Vec<usize>,
    pub seed: u64,
}

/// Uniform assignment of each oscillator to one of `m` input channels.
pub fn sample_assignment(n: usize, m: usize, seed: u64) -> Result<InputAssignment> {
    if m == 0 {
        return Err(invalid("input dimension M must be at least 1"));
    }
    let mut rng: Rng = stream_rng(seed, crate::rng::stream::ASSIGNMENT);
    Ok(InputAssignment {
        v: (0..n).map(|_| rng.gen_range(0..m)).collect(),
        seed,
    })
}

/// Pairwise interaction variant.
#[derive(Debug, Clone)]
pub enum InteractionSpec {
    /// `(K/N) sin(theta_j - theta_k)` for every pair.
    AllToAll { k: f64 },
    /// `(K/N) sin(theta_j - theta_k + alpha)`.
    Sakaguchi { k: f64, alpha: f64 },
    /// `a_jk * k_scale * sin(theta_j - theta_k)` over the edges of a graph;
    /// no 1/N normalization.
    Graph {
        adjacency: Arc<Adjacency>,
        k_scale: f64,
    },
}

impl InteractionSpec {
    pub fn coupling_constant(&self) -> f64 {
        match self {
            InteractionSpec::AllToAll { k } | InteractionSpec::Sakaguchi { k, .. } => *k,
            InteractionSpec::Graph { k_scale, .. } => *k_scale,
        }
    }
}

/// Full configuration of one oscillator reservoir.
#[derive(Debug, Clone)]
pub struct ReservoirConfig {
    pub n: usize,
    pub m: usize,
    /// Forcing strength F.
    pub forcing: f64,
    /// Input scaling constant c.
    pub input_scale: f64,
    pub omega: NaturalFrequencies,
    pub assignment: InputAssignment,
    pub interaction: InteractionSpec,
}

impl ReservoirConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("N must be at least 1"));
        }
        if self.m == 0 {
            return Err(invalid("M must be at least 1"));
        }
        if self.forcing < 0.0 || !self.forcing.is_finite() {
            return Err(invalid(format!("F = {} must be finite and >= 0", self.forcing)));
        }
        if !self.input_scale.is_finite() {
            return Err(invalid("c must be finite"));
        }
        if self.interaction.coupling_constant() < 0.0 {
            return Err(invalid("K must be >= 0"));
        }
        if self.omega.omega.len() != self.n {
            return Err(invalid(format!(
                "omega has length {}, expected N = {}",
                self.omega.omega.len(),
                self.n
            )));
        }
        if self.assignment.v.len() != self.n {
            return Err(invalid(format!(
                "assignment has length {}, expected N = {}",
                self.assignment.v.len(),
                self.n
            )));
        }
        if let Some(&bad) = self.assignment.v.iter().find(|&&v| v >= self.m) {
            return Err(invalid(format!("assignment entry {bad} out of range for M = {}", self.m)));
        }
        if let InteractionSpec::Graph { adjacency, .. } = &self.interaction {
            if adjacency.node_count() != self.n {
                return Err(invalid(format!(
                    "adjacency has {} nodes, expected N = {}",
                    adjacency.node_count(),
                    self.n
                )));
            }
        }
        Ok(())
    }
}

/// Magnitude and angle of the complex order parameter, `psi` in `[0, 2 pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexOrder {
    pub r: f64,
    pub psi: f64,
}

/// `r e^{i psi} = (1/N) sum e^{i theta_k}`, summed in ascending index order.
pub fn order_parameter(state: &PhaseVector) -> ComplexOrder {
    let n = state.len() as f64;
    let mut re = 0.0;
    let mut im = 0.0;
    for &th in &state.phases {
        let (s, c) = th.sin_cos();
        im += s;
        re += c;
    }
    re /= n;
    im /= n;
    let r = (re * re + im * im).sqrt();
    let psi = if r == 0.0 {
        0.0
    } else {
        im.atan2(re).rem_euclid(TAU)
    };
    ComplexOrder { r, psi }
}

/// The two mean-field sums `R1 = sum sin(theta_j)`, `R2 = sum cos(theta_j)`
/// (ascending index order).
pub fn coupling_sums(state: &PhaseVector) -> (f64, f64) {
    sums_of(&trig_of(state.as_slice()))
}

/// Per-state trig buffers; computed once per field evaluation and shared by
/// coupling, forcing and readout.
pub(crate) struct TrigCache {
    pub sin: Vec<f64>,
    pub cos: Vec<f64>,
}

pub(crate) fn trig_of(phases: &[f64]) -> TrigCache {
    let n = phases.len();
    let mut sin = vec![0.0; n];
    let mut cos = vec![0.0; n];
    for k in 0..n {
        let (s, c) = phases[k].sin_cos();
        sin[k] = s;
        cos[k] = c;
    }
    TrigCache { sin, cos }
}

pub(crate) fn sums_of(trig: &TrigCache) -> (f64, f64) {
    let mut r1 = 0.0;
    let mut r2 = 0.0;
    for k in 0..trig.sin.len() {
        r1 += trig.sin[k];
        r2 += trig.cos[k];
    }
    (r1, r2)
}

/// Writes the interaction term for every oscillator into `out`.
pub(crate) fn coupling_into(
    interaction: &InteractionSpec,
    trig: &TrigCache,
    out: &mut [f64],
) {
    let n = trig.sin.len();
    match interaction {
        InteractionSpec::AllToAll { k } => {
            let (r1, r2) = sums_of(trig);
            let kn = k / n as f64;
            for i in 0..n {
                out[i] = kn * (r1 * trig.cos[i] - r2 * trig.sin[i]);
            }
        }
        InteractionSpec::Sakaguchi { k, alpha } => {
            // sum_j sin(theta_j - theta_k + alpha)
            //   = cos(alpha) (R1 c_k - R2 s_k) + sin(alpha) (R2 c_k + R1 s_k)
            let (r1, r2) = sums_of(trig);
            let (sa, ca) = alpha.sin_cos();
            let kn = k / n as f64;
            for i in 0..n {
                let sin_part = r1 * trig.cos[i] - r2 * trig.sin[i];
                let cos_part = r2 * trig.cos[i] + r1 * trig.sin[i];
                out[i] = kn * (ca * sin_part + sa * cos_part);
            }
        }
        InteractionSpec::Graph { adjacency, k_scale } => {
            for i in 0..n {
                let mut ns = 0.0;
                let mut nc = 0.0;
                for &j in adjacency.neighbors(i) {
                    ns += trig.sin[j];
                    nc += trig.cos[j];
                }
                out[i] = k_scale * (ns * trig.cos[i] - nc * trig.sin[i]);
            }
        }
    }
}

/// Adds `F sin(c u_{v_k} - theta_k)` to `out`, expanding the sine so only one
/// `sin_cos` per input channel is needed.
pub(crate) fn add_forcing(cfg: &ReservoirConfig, u: &[f64], trig: &TrigCache, out: &mut [f64]) {
    if cfg.forcing == 0.0 {
        return;
    }
    let mut su = vec![0.0; cfg.m];
    let mut cu = vec![0.0; cfg.m];
    for m in 0..cfg.m {
        let (s, c) = (cfg.input_scale * u[m]).sin_cos();
        su[m] = s;
        cu[m] = c;
    }
    let f = cfg.forcing;
    for i in 0..cfg.n {
        let v = cfg.assignment.v[i];
        out[i] += f * (su[v] * trig.cos[i] - cu[v] * trig.sin[i]);
    }
}

/// Input-driven vector field, written into `out`. O(N) for the mean-field
/// variants, O(edges) for graphs.
pub fn driven_field_into(
    state: &PhaseVector,
    cfg: &ReservoirConfig,
    u: &[f64],
    out: &mut [f64],
) -> Result<()> {
    check_dims(state, cfg, out)?;
    if u.len() != cfg.m {
        return Err(invalid(format!(
            "input has length {}, expected M = {}",
            u.len(),
            cfg.m
        )));
    }
    let trig = trig_of(state.as_slice());
    coupling_into(&cfg.interaction, &trig, out);
    add_forcing(cfg, u, &trig, out);
    for i in 0..cfg.n {
        out[i] += cfg.omega.omega[i];
    }
    Ok(())
}

/// Allocating wrapper around [`driven_field_into`].
pub fn driven_field(state: &PhaseVector, cfg: &ReservoirConfig, u: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; cfg.n];
    driven_field_into(state, cfg, u, &mut out)?;
    Ok(out)
}

/// Autonomous vector field: the input is replaced by the readout prediction
/// `u_hat = W f(theta)` evaluated at the supplied state.
pub fn autonomous_field_into(
    state: &PhaseVector,
    cfg: &ReservoirConfig,
    weights: &ReadoutWeights,
    out: &mut [f64],
) -> Result<()> {
    check_dims(state, cfg, out)?;
    check_weights(cfg, weights)?;
    let trig = trig_of(state.as_slice());
    let mut u_hat = vec![0.0; cfg.m];
    weights.predict_from_trig_into(&trig.sin, &trig.cos, &mut u_hat);
    coupling_into(&cfg.interaction, &trig, out);
    add_forcing(cfg, &u_hat, &trig, out);
    for i in 0..cfg.n {
        out[i] += cfg.omega.omega[i];
    }
    Ok(())
}

/// Allocating wrapper around [`autonomous_field_into`].
pub fn autonomous_field(
    state: &PhaseVector,
    cfg: &ReservoirConfig,
    weights: &ReadoutWeights,
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; cfg.n];
    autonomous_field_into(state, cfg, weights, &mut out)?;
    Ok(out)
}

/// Readout prediction at a state; convenience for observers.
pub fn predict_at(state: &PhaseVector, cfg: &ReservoirConfig, weights: &ReadoutWeights) -> Vec<f64> {
    let trig = trig_of(state.as_slice());
    let mut u_hat = vec![0.0; cfg.m];
    weights.predict_from_trig_into(&trig.sin, &trig.cos, &mut u_hat);
    u_hat
}

/// O(N^2) pairwise reference evaluation of the driven field. The summation
/// over `j` is ascending, and the forcing sine is evaluated directly rather
/// than through the angle-difference expansion, so this is an independent
/// route against the O(N) path.
pub fn driven_field_pairwise(
    state: &PhaseVector,
    cfg: &ReservoirConfig,
    u: &[f64],
) -> Result<Vec<f64>> {
    if u.len() != cfg.m {
        return Err(invalid(format!(
            "input has length {}, expected M = {}",
            u.len(),
            cfg.m
        )));
    }
    let th = state.as_slice();
    let n = cfg.n;
    let mut out = vec![0.0; n];
    for i in 0..n {
        let mut coupling = 0.0;
        match &cfg.interaction {
            InteractionSpec::AllToAll { k } => {
                for j in 0..n {
                    coupling += (th[j] - th[i]).sin();
                }
                coupling *= k / n as f64;
            }
            InteractionSpec::Sakaguchi { k, alpha } => {
                for j in 0..n {
                    coupling += (th[j] - th[i] + alpha).sin();
                }
                coupling *= k / n as f64;
            }
            InteractionSpec::Graph { adjacency, k_scale } => {
                for &j in adjacency.neighbors(i) {
                    coupling += (th[j] - th[i]).sin();
                }
                coupling *= k_scale;
            }
        }
        let v = cfg.assignment.v[i];
        out[i] = cfg.omega.omega[i]
            + coupling
            + cfg.forcing * (cfg.input_scale * u[v] - th[i]).sin();
    }
    Ok(out)
}

fn check_dims(state: &PhaseVector, cfg: &ReservoirConfig, out: &[f64]) -> Result<()> {
    if state.len() != cfg.n {
        return Err(invalid(format!(
            "state has length {}, expected N = {}",
            state.len(),
            cfg.n
        )));
    }
    if out.len() != cfg.n {
        return Err(invalid("output buffer length mismatch"));
    }
    Ok(())
}

pub(crate) fn check_weights(cfg: &ReservoirConfig, weights: &ReadoutWeights) -> Result<()> {
    if weights.output_dim() != cfg.m {
        return Err(invalid(format!(
            "readout has {} outputs, expected M = {}",
            weights.output_dim(),
            cfg.m
        )));
    }
    if weights.w.ncols() != weights.spec.feature_count(cfg.n) {
        return Err(invalid(format!(
            "readout has {} features, expected {} for N = {}",
            weights.w.ncols(),
            weights.spec.feature_count(cfg.n),
            cfg.n
        )));
    }
    Ok(())
}
