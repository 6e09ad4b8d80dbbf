//! Fixed-step integration of the driven and autonomous reservoir, plus a
//! generic RK4 used by the task generators.
//!
//! Time is tracked in integer half-steps of the reservoir step `h`, so the
//! index of the input sample belonging to any stage is exact integer
//! arithmetic — no floating-point drift over long runs. The input series is
//! stored at spacing `h_u / 2`, which provides the half-step samples the RK4
//! stages need.

use crate::dynamics::{
    autonomous_field_into, check_weights, driven_field_into, PhaseVector, ReservoirConfig,
};
use crate::error::{invalid, numerical, Result};
use crate::readout::ReadoutWeights;

/// How the input is evaluated between its stored samples (relevant when the
/// reservoir step is finer than the input sampling step).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    /// Zero-order hold at the most recent sample (default).
    Hold,
    /// Linear interpolation between neighboring samples.
    Linear,
}

/// Time bookkeeping for one experiment. The reservoir advances with step
/// `h_res`; the input is sampled with step `h_u`, an integer multiple of
/// `h_res`. All phase durations are integer multiples of `h_u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSchedule {
    pub h_res: f64,
    pub h_u: f64,
    pub t_wipe: f64,
    pub t_train: f64,
    pub t_test: f64,
    /// `h_u / h_res`, exact.
    pub substeps: usize,
    /// Wipe-out length in input samples.
    pub n_wipe: usize,
    /// Training length in input samples.
    pub n_train: usize,
    /// Test length in input samples.
    pub n_test: usize,
}

fn exact_ratio(num: f64, den: f64, what: &str) -> Result<usize> {
    let q = num / den;
    let r = q.round();
    if r < 0.0 || (q - r).abs() > 1e-6 * q.abs().max(1.0) {
        return Err(invalid(format!(
            "{what}: {num} is not a nonnegative integer multiple of {den}"
        )));
    }
    Ok(r as usize)
}

impl StepSchedule {
    pub fn new(h_res: f64, h_u: f64, t_wipe: f64, t_train: f64, t_test: f64) -> Result<Self> {
        if !(h_res > 0.0) || !(h_u > 0.0) {
            return Err(invalid("steps must be positive"));
        }
        let substeps = exact_ratio(h_u, h_res, "h_u / h_res")?;
        if substeps == 0 {
            return Err(invalid("h_u must be at least h_res"));
        }
        let n_wipe = exact_ratio(t_wipe, h_u, "T_wipe / h_u")?;
        let n_train = exact_ratio(t_train, h_u, "T_train / h_u")?;
        let n_test = exact_ratio(t_test, h_u, "T_test / h_u")?;
        Ok(Self {
            h_res,
            h_u,
            t_wipe,
            t_train,
            t_test,
            substeps,
            n_wipe,
            n_train,
            n_test,
        })
    }

    /// Uniform schedule with `h_res = h_u = h` (the common case).
    pub fn uniform(h: f64, t_wipe: f64, t_train: f64, t_test: f64) -> Result<Self> {
        Self::new(h, h, t_wipe, t_train, t_test)
    }

    /// Reservoir steps in one input sample interval.
    pub fn steps_per_sample(&self) -> usize {
        self.substeps
    }
}

/// View of an input series that serves samples by half-step index of the
/// reservoir step. Sample `j` of the stored series lives at time
/// `t0 + j * h_u / 2`; the stepper asks for time `t0 + k * h_res / 2`.
pub struct InputSampler<'a> {
    /// Sample-major storage: sample `j` occupies `values[j*m .. (j+1)*m]`.
    values: &'a [f64],
    m: usize,
    /// Half-steps of `h_res` per stored sample (= `h_u / h_res`).
    substeps: usize,
    mode: SampleMode,
}

impl<'a> InputSampler<'a> {
    pub fn new(values: &'a [f64], m: usize, substeps: usize, mode: SampleMode) -> Result<Self> {
        if m == 0 || values.len() % m != 0 {
            return Err(invalid("input sample storage length is not a multiple of M"));
        }
        if substeps == 0 {
            return Err(invalid("substeps must be at least 1"));
        }
        Ok(Self {
            values,
            m,
            substeps,
            mode,
        })
    }

    pub fn channels(&self) -> usize {
        self.m
    }

    /// Stored sample count.
    pub fn len(&self) -> usize {
        self.values.len() / self.m
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Half-step indices (of `h_res / 2`) covered by the stored samples.
    pub fn half_unit_span(&self) -> usize {
        (self.len().saturating_sub(1)) * self.substeps
    }

    /// Writes the input at half-step index `k` into `out`.
    pub fn at(&self, k: usize, out: &mut [f64]) -> Result<()> {
        debug_assert_eq!(out.len(), self.m);
        let idx = k / self.substeps;
        let rem = k % self.substeps;
        if rem == 0 {
            let row = self.row(idx)?;
            out.copy_from_slice(row);
            return Ok(());
        }
        match self.mode {
            SampleMode::Hold => {
                let row = self.row(idx)?;
                out.copy_from_slice(row);
            }
            SampleMode::Linear => {
                let lo = self.row(idx)?;
                let hi = self.row(idx + 1)?;
                let w = rem as f64 / self.substeps as f64;
                for c in 0..self.m {
                    out[c] = lo[c] + w * (hi[c] - lo[c]);
                }
            }
        }
        Ok(())
    }

    fn row(&self, idx: usize) -> Result<&[f64]> {
        if idx >= self.len() {
            return Err(invalid(format!(
                "input sample {idx} requested but only {} stored",
                self.len()
            )));
        }
        Ok(&self.values[idx * self.m..(idx + 1) * self.m])
    }
}

const SIXTH: f64 = 1.0 / 6.0;

fn combine(state: &[f64], h: f64, k1: &[f64], k2: &[f64], k3: &[f64], k4: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(state.len());
    for i in 0..state.len() {
        out.push(state[i] + h * SIXTH * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]));
    }
    out
}

fn euler_mid(state: &[f64], h: f64, k: &[f64]) -> PhaseVector {
    PhaseVector {
        phases: state.iter().zip(k).map(|(&x, &v)| x + h * v).collect(),
    }
}

/// One driven RK4 step of size `h` starting at half-step index `half_units`
/// (in units of `h / 2`). The two middle stages share the half-step input
/// sample.
pub fn rk4_driven_step(
    state: &PhaseVector,
    cfg: &ReservoirConfig,
    sampler: &InputSampler,
    half_units: usize,
    h: f64,
) -> Result<PhaseVector> {
    sampler_channel_check(cfg, sampler)?;
    let n = cfg.n;
    let mut u = vec![0.0; cfg.m];
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];

    sampler.at(half_units, &mut u)?;
    driven_field_into(state, cfg, &u, &mut k1)?;

    sampler.at(half_units + 1, &mut u)?;
    let mid1 = euler_mid(state.as_slice(), 0.5 * h, &k1);
    driven_field_into(&mid1, cfg, &u, &mut k2)?;

    let mid2 = euler_mid(state.as_slice(), 0.5 * h, &k2);
    driven_field_into(&mid2, cfg, &u, &mut k3)?;

    sampler.at(half_units + 2, &mut u)?;
    let end = euler_mid(state.as_slice(), h, &k3);
    driven_field_into(&end, cfg, &u, &mut k4)?;

    Ok(PhaseVector {
        phases: combine(state.as_slice(), h, &k1, &k2, &k3, &k4),
    })
}

/// One explicit-Euler step of the driven system (used for discontinuous
/// inputs where the RK4 half-step sample is meaningless).
pub fn rk1_driven_step(
    state: &PhaseVector,
    cfg: &ReservoirConfig,
    sampler: &InputSampler,
    half_units: usize,
    h: f64,
) -> Result<PhaseVector> {
    sampler_channel_check(cfg, sampler)?;
    let mut u = vec![0.0; cfg.m];
    let mut k1 = vec![0.0; cfg.n];
    sampler.at(half_units, &mut u)?;
    driven_field_into(state, cfg, &u, &mut k1)?;
    Ok(euler_mid(state.as_slice(), h, &k1))
}

fn sampler_channel_check(cfg: &ReservoirConfig, sampler: &InputSampler) -> Result<()> {
    if sampler.channels() != cfg.m {
        return Err(invalid(format!(
            "sampler has {} channels, expected M = {}",
            sampler.channels(),
            cfg.m
        )));
    }
    Ok(())
}

/// One autonomous RK4 step: the feedback `u_hat = W f(theta)` is re-evaluated
/// at every stage state.
pub fn rk4_autonomous_step(
    state: &PhaseVector,
    cfg: &ReservoirConfig,
    weights: &ReadoutWeights,
    h: f64,
) -> Result<PhaseVector> {
    let n = cfg.n;
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];

    autonomous_field_into(state, cfg, weights, &mut k1)?;
    let mid1 = euler_mid(state.as_slice(), 0.5 * h, &k1);
    autonomous_field_into(&mid1, cfg, weights, &mut k2)?;
    let mid2 = euler_mid(state.as_slice(), 0.5 * h, &k2);
    autonomous_field_into(&mid2, cfg, weights, &mut k3)?;
    let end = euler_mid(state.as_slice(), h, &k3);
    autonomous_field_into(&end, cfg, weights, &mut k4)?;

    Ok(PhaseVector {
        phases: combine(state.as_slice(), h, &k1, &k2, &k3, &k4),
    })
}

/// One closed-loop step that is RK4 in the phases but first order in the
/// feedback: `u_hat` is frozen at the step's initial state for all stages.
pub fn rk4_rk1_step(
    state: &PhaseVector,
    cfg: &ReservoirConfig,
    weights: &ReadoutWeights,
    h: f64,
) -> Result<PhaseVector> {
    check_weights(cfg, weights)?;
    let u_hat = crate::dynamics::predict_at(state, cfg, weights);
    let n = cfg.n;
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];

    driven_field_into(state, cfg, &u_hat, &mut k1)?;
    let mid1 = euler_mid(state.as_slice(), 0.5 * h, &k1);
    driven_field_into(&mid1, cfg, &u_hat, &mut k2)?;
    let mid2 = euler_mid(state.as_slice(), 0.5 * h, &k2);
    driven_field_into(&mid2, cfg, &u_hat, &mut k3)?;
    let end = euler_mid(state.as_slice(), h, &k3);
    driven_field_into(&end, cfg, &u_hat, &mut k4)?;

    Ok(PhaseVector {
        phases: combine(state.as_slice(), h, &k1, &k2, &k3, &k4),
    })
}

/// Closed-loop stepping variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedLoopMode {
    /// Feedback re-evaluated at every stage.
    Rk4Full,
    /// Feedback frozen at the step start.
    Rk4Rk1,
}

impl ClosedLoopMode {
    pub fn step(
        self,
        state: &PhaseVector,
        cfg: &ReservoirConfig,
        weights: &ReadoutWeights,
        h: f64,
    ) -> Result<PhaseVector> {
        match self {
            ClosedLoopMode::Rk4Full => rk4_autonomous_step(state, cfg, weights, h),
            ClosedLoopMode::Rk4Rk1 => rk4_rk1_step(state, cfg, weights, h),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ClosedLoopMode::Rk4Full => "rk4_full",
            ClosedLoopMode::Rk4Rk1 => "rk4_rk1",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "rk4_full" => Ok(ClosedLoopMode::Rk4Full),
            "rk4_rk1" => Ok(ClosedLoopMode::Rk4Rk1),
            other => Err(invalid(format!("unknown closed-loop mode '{other}'"))),
        }
    }
}

/// Classical RK4 step for an arbitrary autonomous-or-not vector field
/// `field(t, x, out)`. Used by the task generators.
pub fn rk4_generic_step<F>(x: &[f64], field: F, t: f64, h: f64) -> Result<Vec<f64>>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let n = x.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];

    field(t, x, &mut k1);
    for i in 0..n {
        tmp[i] = x[i] + 0.5 * h * k1[i];
    }
    field(t + 0.5 * h, &tmp, &mut k2);
    for i in 0..n {
        tmp[i] = x[i] + 0.5 * h * k2[i];
    }
    field(t + 0.5 * h, &tmp, &mut k3);
    for i in 0..n {
        tmp[i] = x[i] + h * k3[i];
    }
    field(t + h, &tmp, &mut k4);

    let out = combine(x, h, &k1, &k2, &k3, &k4);
    if !out.iter().all(|v| v.is_finite()) {
        return Err(numerical(format!("non-finite state after RK4 step at t = {t}")));
    }
    Ok(out)
}
