//! Analysis of trained reservoirs: return maps of the order parameter,
//! Lyapunov spectra from the variational equations, rotation numbers, climate
//! classification and (F, K) parameter sweeps.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::dynamics::{
    order_parameter, sums_of, trig_of, InteractionSpec, PhaseVector, ReservoirConfig, TrigCache,
};
use crate::error::{invalid, numerical, Result};
use crate::integrate::{ClosedLoopMode, StepSchedule};
use crate::pipeline::{run_experiment, RunOutcome, TrainedReservoir};
use crate::readout::{ReadoutSpec, ReadoutWeights};
use crate::tasks::SignalSeries;

// ---------------------------------------------------------------------------
// Local extrema and return maps

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremaKind {
    Min,
    Max,
}

/// Local extrema of a scalar series, with parabolic sub-sample refinement and
/// a curvature filter that discards numerically flat (anomalous) extrema.
#[derive(Debug, Clone)]
pub struct ExtremaSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: ExtremaKind,
    /// Minimum |y[i-1] - 2 y[i] + y[i+1]| for an extremum to be kept.
    pub second_difference_bound: f64,
}

/// Finds local extrema by the 3-point stencil. An interior sample below
/// (above) both neighbors is a minimum (maximum); its value and time are
/// refined by the parabola through the three points. Extrema whose central
/// second difference is smaller in magnitude than `bound` are discarded.
pub fn local_extrema(
    values: &[f64],
    t0: f64,
    h: f64,
    kind: ExtremaKind,
    bound: f64,
) -> ExtremaSeries {
    let mut times = Vec::new();
    let mut out = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        let (y0, y1, y2) = (values[i - 1], values[i], values[i + 1]);
        let is_extremum = match kind {
            ExtremaKind::Min => y1 < y0 && y1 < y2,
            ExtremaKind::Max => y1 > y0 && y1 > y2,
        };
        if !is_extremum {
            continue;
        }
        let second = y0 - 2.0 * y1 + y2;
        if second.abs() < bound {
            continue;
        }
        // Parabola through (-1, y0), (0, y1), (1, y2): vertex at
        // x* = (y0 - y2) / (2 (y0 - 2 y1 + y2)).
        let x = (y0 - y2) / (2.0 * second);
        let a = 0.5 * second;
        let b = 0.5 * (y2 - y0);
        let v = y1 + b * x + a * x * x;
        times.push(t0 + h * (i as f64 + x));
        out.push(v);
    }
    ExtremaSeries {
        times,
        values: out,
        kind,
        second_difference_bound: bound,
    }
}

/// Consecutive extrema pairs `(e_n, e_{n+1})` in time order.
pub fn return_map(extrema: &ExtremaSeries) -> Vec<(f64, f64)> {
    extrema
        .values
        .windows(2)
        .map(|w| (w[0], w[1]))
        .collect()
}

// ---------------------------------------------------------------------------
// Jacobian of the autonomous system

/// Per-state context for applying the Jacobian of the autonomous vector
/// field. Building it costs O(N + NM); each product costs O(N(M+1)) for the
/// mean-field interactions (O(edges + NM) for graphs).
pub struct TangentOperator<'a> {
    cfg: &'a ReservoirConfig,
    weights: &'a ReadoutWeights,
    trig: TrigCache,
    /// sin/cos of `c * u_hat_m`.
    su: Vec<f64>,
    cu: Vec<f64>,
    /// `F cos(c u_hat_{v_i} - theta_i)` per oscillator.
    e: Vec<f64>,
    /// Mean-field sums of the state (unused for graphs).
    r1: f64,
    r2: f64,
}

impl<'a> TangentOperator<'a> {
    pub fn new(
        state: &PhaseVector,
        cfg: &'a ReservoirConfig,
        weights: &'a ReadoutWeights,
    ) -> Result<Self> {
        if state.len() != cfg.n {
            return Err(invalid("state length does not match N"));
        }
        crate::dynamics::check_weights(cfg, weights)?;
        let trig = trig_of(state.as_slice());
        let mut u_hat = vec![0.0; cfg.m];
        weights.predict_from_trig_into(&trig.sin, &trig.cos, &mut u_hat);
        let mut su = vec![0.0; cfg.m];
        let mut cu = vec![0.0; cfg.m];
        for m in 0..cfg.m {
            let (s, c) = (cfg.input_scale * u_hat[m]).sin_cos();
            su[m] = s;
            cu[m] = c;
        }
        let e: Vec<f64> = (0..cfg.n)
            .map(|i| {
                let v = cfg.assignment.v[i];
                // cos(c u - theta) = cos(c u) cos(theta) + sin(c u) sin(theta)
                cfg.forcing * (cu[v] * trig.cos[i] + su[v] * trig.sin[i])
            })
            .collect();
        let (r1, r2) = sums_of(&trig);
        Ok(Self {
            cfg,
            weights,
            trig,
            su,
            cu,
            e,
            r1,
            r2,
        })
    }

    /// The autonomous vector field at the operator's state, reusing the
    /// cached trigonometry.
    pub fn field(&self, out: &mut [f64]) {
        let cfg = self.cfg;
        crate::dynamics::coupling_into(&cfg.interaction, &self.trig, out);
        for i in 0..cfg.n {
            let v = cfg.assignment.v[i];
            out[i] += cfg.omega.omega[i]
                + cfg.forcing * (self.su[v] * self.trig.cos[i] - self.cu[v] * self.trig.sin[i]);
        }
    }

    /// `out = J v` where `J` is the Jacobian of the autonomous field.
    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        let cfg = self.cfg;
        let n = cfg.n;
        let (sin, cos) = (&self.trig.sin, &self.trig.cos);
        // Feedback gradient: g[m] = sum_j (d u_hat_m / d theta_j) v[j].
        let mut g = vec![0.0; cfg.m];
        if cfg.forcing != 0.0 {
            self.weights.gradient_dot(sin, cos, v, &mut g);
        }
        match &cfg.interaction {
            InteractionSpec::AllToAll { k } | InteractionSpec::Sakaguchi { k, .. } => {
                let alpha = match &cfg.interaction {
                    InteractionSpec::Sakaguchi { alpha, .. } => *alpha,
                    _ => 0.0,
                };
                let (sa, ca) = alpha.sin_cos();
                let kn = k / n as f64;
                let mut s_c = 0.0;
                let mut s_s = 0.0;
                for j in 0..n {
                    s_c += cos[j] * v[j];
                    s_s += sin[j] * v[j];
                }
                for i in 0..n {
                    // sum_j cos(theta_j - theta_i) v_j and the sin analog.
                    let cos_sum = cos[i] * s_c + sin[i] * s_s;
                    let sin_sum = cos[i] * s_s - sin[i] * s_c;
                    // Off-diagonal row sums exclude j = i (self term is
                    // constant); diagonal is minus the same cosine row sum.
                    let c_row = self.r2 * cos[i] + self.r1 * sin[i] - 1.0;
                    let s_row = self.r1 * cos[i] - self.r2 * sin[i];
                    let off = ca * (cos_sum - v[i]) - sa * sin_sum;
                    let diag = -(ca * c_row - sa * s_row);
                    out[i] = kn * (off + diag * v[i]);
                }
            }
            InteractionSpec::Graph { adjacency, k_scale } => {
                for i in 0..n {
                    let mut acc = 0.0;
                    for &j in adjacency.neighbors(i) {
                        let cij = cos[j] * cos[i] + sin[j] * sin[i];
                        acc += cij * (v[j] - v[i]);
                    }
                    out[i] = k_scale * acc;
                }
            }
        }
        for i in 0..n {
            let fb = if cfg.forcing != 0.0 {
                cfg.input_scale * self.e[i] * g[cfg.assignment.v[i]]
            } else {
                0.0
            };
            out[i] += fb - self.e[i] * v[i];
        }
    }

    /// Dense N x N Jacobian; the O(N^2) oracle for [`Self::apply`].
    pub fn dense(&self) -> DMatrix<f64> {
        let cfg = self.cfg;
        let n = cfg.n;
        let (sin, cos) = (&self.trig.sin, &self.trig.cos);
        let mut j = DMatrix::zeros(n, n);
        match &cfg.interaction {
            InteractionSpec::AllToAll { k } | InteractionSpec::Sakaguchi { k, .. } => {
                let alpha = match &cfg.interaction {
                    InteractionSpec::Sakaguchi { alpha, .. } => *alpha,
                    _ => 0.0,
                };
                let kn = k / n as f64;
                for i in 0..n {
                    let mut diag = 0.0;
                    for jj in 0..n {
                        if jj == i {
                            continue;
                        }
                        let c = (self.angle(jj) - self.angle(i) + alpha).cos();
                        j[(i, jj)] = kn * c;
                        diag -= c;
                    }
                    j[(i, i)] = kn * diag;
                }
            }
            InteractionSpec::Graph { adjacency, k_scale } => {
                for i in 0..n {
                    let mut diag = 0.0;
                    for &jj in adjacency.neighbors(i) {
                        let c = cos[jj] * cos[i] + sin[jj] * sin[i];
                        j[(i, jj)] += k_scale * c;
                        diag -= c;
                    }
                    j[(i, i)] += k_scale * diag;
                }
            }
        }
        for i in 0..n {
            j[(i, i)] -= self.e[i];
            if cfg.forcing != 0.0 {
                let m = cfg.assignment.v[i];
                let scale = cfg.input_scale * self.e[i];
                for jj in 0..n {
                    j[(i, jj)] += scale * self.weights.output_gradient(m, jj, sin[jj], cos[jj]);
                }
            }
        }
        j
    }

    fn angle(&self, i: usize) -> f64 {
        // Reconstruct the angle only for the dense oracle path.
        self.trig.sin[i].atan2(self.trig.cos[i])
    }
}

/// Dense Jacobian of the autonomous field at `state`.
pub fn jacobian_dense(
    state: &PhaseVector,
    cfg: &ReservoirConfig,
    weights: &ReadoutWeights,
) -> Result<DMatrix<f64>> {
    Ok(TangentOperator::new(state, cfg, weights)?.dense())
}

/// Fast Jacobian-vector product at `state`.
pub fn jacobian_vector_product(
    state: &PhaseVector,
    cfg: &ReservoirConfig,
    weights: &ReadoutWeights,
    v: &[f64],
) -> Result<Vec<f64>> {
    if v.len() != cfg.n {
        return Err(invalid("tangent vector length does not match N"));
    }
    let op = TangentOperator::new(state, cfg, weights)?;
    let mut out = vec![0.0; cfg.n];
    op.apply(v, &mut out);
    Ok(out)
}

// ---------------------------------------------------------------------------
// Lyapunov spectra (Benettin / Gram-Schmidt)

#[derive(Debug, Clone)]
pub struct LyapunovSpectrum {
    /// Exponents sorted descending (1/time units).
    pub exponents: Vec<f64>,
    /// Total time propagated.
    pub horizon: f64,
    pub ortho_period: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TangentMode {
    /// Dense Jacobian at each stage, O(N^2) per product.
    Dense,
    /// Structured product, O(N(M+1)).
    Fast,
}

/// Modified Gram-Schmidt in place; returns the diagonal norms.
fn orthonormalize(tangents: &mut [Vec<f64>]) -> Result<Vec<f64>> {
    let k = tangents.len();
    let mut norms = Vec::with_capacity(k);
    for i in 0..k {
        for j in 0..i {
            let proj: f64 = tangents[i]
                .iter()
                .zip(&tangents[j])
                .map(|(a, b)| a * b)
                .sum();
            let (head, tail) = tangents.split_at_mut(i);
            for (a, b) in tail[0].iter_mut().zip(&head[j]) {
                *a -= proj * b;
            }
        }
        let norm: f64 = tangents[i].iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 1e-300) {
            return Err(numerical("tangent vector collapsed during orthonormalization"));
        }
        for x in tangents[i].iter_mut() {
            *x /= norm;
        }
        norms.push(norm);
    }
    Ok(norms)
}

fn unit_tangents(n: usize, k: usize) -> Vec<Vec<f64>> {
    (0..k)
        .map(|i| {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            v
        })
        .collect()
}

/// RK4 update of the tangent set given the four stage operators.
fn advance_tangents(
    tangents: &mut [Vec<f64>],
    h: f64,
    apply: impl Fn(usize, &[f64], &mut [f64]),
) {
    let n = tangents.first().map_or(0, |v| v.len());
    let mut l1 = vec![0.0; n];
    let mut l2 = vec![0.0; n];
    let mut l3 = vec![0.0; n];
    let mut l4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    for v in tangents.iter_mut() {
        apply(0, v, &mut l1);
        for i in 0..n {
            tmp[i] = v[i] + 0.5 * h * l1[i];
        }
        apply(1, &tmp, &mut l2);
        for i in 0..n {
            tmp[i] = v[i] + 0.5 * h * l2[i];
        }
        apply(2, &tmp, &mut l3);
        for i in 0..n {
            tmp[i] = v[i] + h * l3[i];
        }
        apply(3, &tmp, &mut l4);
        for i in 0..n {
            v[i] += h / 6.0 * (l1[i] + 2.0 * (l2[i] + l3[i]) + l4[i]);
        }
    }
}

/// Benettin spectrum of an arbitrary smooth system given its field and
/// Jacobian. Used for the target systems (Lorenz, Rössler) and as a test
/// oracle.
pub fn lyapunov_spectrum_generic<F, J>(
    x0: &[f64],
    field: F,
    jacobian: J,
    h: f64,
    steps: usize,
    k: usize,
    ortho_period: usize,
) -> Result<LyapunovSpectrum>
where
    F: Fn(&[f64], &mut [f64]),
    J: Fn(&[f64]) -> DMatrix<f64>,
{
    let n = x0.len();
    if k > n {
        return Err(invalid("cannot track more exponents than dimensions"));
    }
    if ortho_period == 0 {
        return Err(invalid("orthonormalization period must be positive"));
    }
    let mut x = x0.to_vec();
    let mut tangents = unit_tangents(n, k);
    let mut sums = vec![0.0; k];
    let mut kbuf = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut stage = vec![vec![0.0; n]; 4];
    for step in 0..steps {
        stage[0].copy_from_slice(&x);
        field(&stage[0], &mut kbuf[0]);
        for i in 0..n {
            stage[1][i] = x[i] + 0.5 * h * kbuf[0][i];
        }
        field(&stage[1], &mut kbuf[1]);
        for i in 0..n {
            stage[2][i] = x[i] + 0.5 * h * kbuf[1][i];
        }
        field(&stage[2], &mut kbuf[2]);
        for i in 0..n {
            stage[3][i] = x[i] + h * kbuf[2][i];
        }
        field(&stage[3], &mut kbuf[3]);
        let jacs: Vec<DMatrix<f64>> = stage.iter().map(|s| jacobian(s)).collect();
        advance_tangents(&mut tangents, h, |s, v, out| {
            let j = &jacs[s];
            for (i, o) in out.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (jj, &vj) in v.iter().enumerate() {
                    acc += j[(i, jj)] * vj;
                }
                *o = acc;
            }
        });
        for i in 0..n {
            x[i] += h / 6.0 * (kbuf[0][i] + 2.0 * (kbuf[1][i] + kbuf[2][i]) + kbuf[3][i]);
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(numerical(format!("trajectory blew up at step {step}")));
        }
        if (step + 1) % ortho_period == 0 || step + 1 == steps {
            let norms = orthonormalize(&mut tangents)?;
            for (s, nv) in sums.iter_mut().zip(norms) {
                *s += nv.ln();
            }
        }
    }
    let horizon = h * steps as f64;
    let mut exponents: Vec<f64> = sums.iter().map(|s| s / horizon).collect();
    exponents.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(LyapunovSpectrum {
        exponents,
        horizon,
        ortho_period,
    })
}

/// Benettin spectrum of the trained reservoir running autonomously from its
/// end-of-training state.
pub fn lyapunov_spectrum(
    trained: &TrainedReservoir,
    k: usize,
    horizon_steps: usize,
    mode: TangentMode,
    ortho_period: usize,
) -> Result<LyapunovSpectrum> {
    let cfg = &trained.cfg;
    let weights = &trained.weights;
    let n = cfg.n;
    if k > n {
        return Err(invalid("cannot track more exponents than oscillators"));
    }
    if ortho_period == 0 {
        return Err(invalid("orthonormalization period must be positive"));
    }
    let h = trained.schedule.h_res;
    let mut state = trained.final_train_state.clone();
    let mut tangents = unit_tangents(n, k);
    let mut sums = vec![0.0; k];
    let mut kbuf = vec![vec![0.0; n]; 4];

    for step in 0..horizon_steps {
        // Build the four stage operators of the closed-loop RK4 step; each
        // provides both the field and the Jacobian action at its stage state.
        let op1 = TangentOperator::new(&state, cfg, weights)?;
        op1.field(&mut kbuf[0]);
        let s2 = PhaseVector {
            phases: (0..n)
                .map(|i| state.phases[i] + 0.5 * h * kbuf[0][i])
                .collect(),
        };
        let op2 = TangentOperator::new(&s2, cfg, weights)?;
        op2.field(&mut kbuf[1]);
        let s3 = PhaseVector {
            phases: (0..n)
                .map(|i| state.phases[i] + 0.5 * h * kbuf[1][i])
                .collect(),
        };
        let op3 = TangentOperator::new(&s3, cfg, weights)?;
        op3.field(&mut kbuf[2]);
        let s4 = PhaseVector {
            phases: (0..n).map(|i| state.phases[i] + h * kbuf[2][i]).collect(),
        };
        let op4 = TangentOperator::new(&s4, cfg, weights)?;
        op4.field(&mut kbuf[3]);

        match mode {
            TangentMode::Fast => {
                let ops = [&op1, &op2, &op3, &op4];
                advance_tangents(&mut tangents, h, |s, v, out| ops[s].apply(v, out));
            }
            TangentMode::Dense => {
                let jacs = [op1.dense(), op2.dense(), op3.dense(), op4.dense()];
                advance_tangents(&mut tangents, h, |s, v, out| {
                    let j = &jacs[s];
                    for (i, o) in out.iter_mut().enumerate() {
                        let mut acc = 0.0;
                        for (jj, &vj) in v.iter().enumerate() {
                            acc += j[(i, jj)] * vj;
                        }
                        *o = acc;
                    }
                });
            }
        }
        for i in 0..n {
            state.phases[i] +=
                h / 6.0 * (kbuf[0][i] + 2.0 * (kbuf[1][i] + kbuf[2][i]) + kbuf[3][i]);
        }
        if (step + 1) % ortho_period == 0 || step + 1 == horizon_steps {
            let norms = orthonormalize(&mut tangents)?;
            for (s, nv) in sums.iter_mut().zip(norms) {
                *s += nv.ln();
            }
        }
    }
    let horizon = h * horizon_steps as f64;
    let mut exponents: Vec<f64> = sums.iter().map(|s| s / horizon).collect();
    exponents.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(LyapunovSpectrum {
        exponents,
        horizon,
        ortho_period,
    })
}

// ---------------------------------------------------------------------------
// Rotation numbers and order-parameter series

#[derive(Debug, Clone)]
pub struct RotationNumbers {
    /// Winding count per oscillator.
    pub rho: Vec<u64>,
    pub horizon_steps: usize,
}

impl RotationNumbers {
    pub fn max(&self) -> u64 {
        self.rho.iter().copied().max().unwrap_or(0)
    }
}

/// Winding counts `floor(|theta_k(T) - theta_k(0)| / 2 pi)` of the autonomous
/// run over `horizon_steps` reservoir steps.
pub fn rotation_numbers(
    trained: &TrainedReservoir,
    horizon_steps: usize,
    mode: ClosedLoopMode,
) -> Result<RotationNumbers> {
    let start = trained.final_train_state.clone();
    let mut state = start.clone();
    for _ in 0..horizon_steps {
        state = mode.step(&state, &trained.cfg, &trained.weights, trained.schedule.h_res)?;
    }
    let rho = start
        .phases
        .iter()
        .zip(&state.phases)
        .map(|(&a, &b)| ((b - a).abs() / std::f64::consts::TAU).floor() as u64)
        .collect();
    Ok(RotationNumbers {
        rho,
        horizon_steps,
    })
}

/// Order-parameter magnitude r at every reservoir step of the autonomous run
/// (first entry is the starting state).
pub fn autonomous_r_series(
    trained: &TrainedReservoir,
    steps: usize,
    mode: ClosedLoopMode,
) -> Result<Vec<f64>> {
    let mut state = trained.final_train_state.clone();
    let mut out = Vec::with_capacity(steps + 1);
    out.push(order_parameter(&state).r);
    for _ in 0..steps {
        state = mode.step(&state, &trained.cfg, &trained.weights, trained.schedule.h_res)?;
        out.push(order_parameter(&state).r);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Climate classification

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClimateVerdict {
    /// First two exponents match the target within epsilon and the rest are
    /// clearly negative.
    pub climate_reproduced: bool,
    /// Sign pattern (+, 0, -) holds regardless of values.
    pub type_reproduced: bool,
}

/// Compares a reproduced spectrum against a target (both needing at least 3
/// exponents, sorted descending).
pub fn climate_check(res: &[f64], target: &[f64], epsilon: f64) -> Result<ClimateVerdict> {
    if res.len() < 3 || target.len() < 3 {
        return Err(invalid("climate check needs at least three exponents on each side"));
    }
    let climate = (res[0] - target[0]).abs() <= epsilon
        && (res[1] - target[1]).abs() <= epsilon
        && res[2..].iter().all(|&l| l <= -epsilon);
    let type_ok = res[0] > epsilon && res[1].abs() < epsilon && res[2..].iter().all(|&l| l < -epsilon);
    Ok(ClimateVerdict {
        climate_reproduced: climate && type_ok,
        type_reproduced: type_ok,
    })
}

// ---------------------------------------------------------------------------
// Parameter sweeps

#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub spec: ReadoutSpec,
    pub ridge_epsilon: f64,
    pub mode: ClosedLoopMode,
    /// Autonomous steps for the rotation-number horizon (0 skips it).
    pub rotation_steps: usize,
    /// Variational steps for the Lyapunov triple (0 skips it).
    pub lyapunov_steps: usize,
    pub lyapunov_ortho_period: usize,
    /// Target spectrum for climate classification.
    pub target: Option<[f64; 3]>,
    pub climate_epsilon: f64,
    /// Master seed shared by every grid point.
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SweepRecord {
    pub f: f64,
    pub k: f64,
    pub c: f64,
    pub nmse_short: Option<f64>,
    pub rho_max: Option<u64>,
    pub lambda: Option<[f64; 3]>,
    pub climate: Option<bool>,
    pub type_reproduced: Option<bool>,
    pub seed: u64,
    pub error: Option<String>,
}

/// Runs one grid point: trains, scores the short test window, then the
/// optional rotation and Lyapunov analyses.
pub fn sweep_point(
    f: f64,
    k: f64,
    c: f64,
    cfg: &ReservoirConfig,
    schedule: &StepSchedule,
    input: &SignalSeries,
    opts: &SweepOptions,
) -> SweepRecord {
    let mut record = SweepRecord {
        f,
        k,
        c,
        nmse_short: None,
        rho_max: None,
        lambda: None,
        climate: None,
        type_reproduced: None,
        seed: opts.seed,
        error: None,
    };
    let run: Result<RunOutcome> =
        run_experiment(cfg, opts.spec, schedule, input, opts.ridge_epsilon, opts.mode);
    let run = match run {
        Ok(r) => r,
        Err(e) => {
            record.error = Some(e.to_string());
            return record;
        }
    };
    record.nmse_short = Some(run.nmse);
    if opts.rotation_steps > 0 {
        match rotation_numbers(&run.trained, opts.rotation_steps, opts.mode) {
            Ok(r) => record.rho_max = Some(r.max()),
            Err(e) => record.error = Some(e.to_string()),
        }
    }
    if opts.lyapunov_steps > 0 {
        match lyapunov_spectrum(
            &run.trained,
            3,
            opts.lyapunov_steps,
            TangentMode::Fast,
            opts.lyapunov_ortho_period,
        ) {
            Ok(spec) => {
                let l = [spec.exponents[0], spec.exponents[1], spec.exponents[2]];
                record.lambda = Some(l);
                if let Some(target) = opts.target {
                    if let Ok(v) = climate_check(&l, &target, opts.climate_epsilon) {
                        record.climate = Some(v.climate_reproduced);
                        record.type_reproduced = Some(v.type_reproduced);
                    }
                }
            }
            Err(e) => record.error = Some(e.to_string()),
        }
    }
    record
}

/// Sweeps a list of `(F, K, c)` points in parallel. `make_cfg` builds the
/// reservoir for a point; the same master seed is shared across points so
/// frequency/assignment realizations are held fixed.
pub fn sweep<FCfg>(
    points: &[(f64, f64, f64)],
    make_cfg: FCfg,
    schedule: &StepSchedule,
    input: &SignalSeries,
    opts: &SweepOptions,
) -> Vec<SweepRecord>
where
    FCfg: Fn(f64, f64, f64, u64) -> Result<ReservoirConfig> + Sync,
{
    points
        .par_iter()
        .map(|&(f, k, c)| match make_cfg(f, k, c, opts.seed) {
            Ok(cfg) => sweep_point(f, k, c, &cfg, schedule, input, opts),
            Err(e) => SweepRecord {
                f,
                k,
                c,
                nmse_short: None,
                rho_max: None,
                lambda: None,
                climate: None,
                type_reproduced: None,
                seed: opts.seed,
                error: Some(e.to_string()),
            },
        })
        .collect()
}

pub const SWEEP_CSV_HEADER: &str =
    "F,K,c,nmse_short,rho_max,lambda1,lambda2,lambda3,climate,type,seed";

/// Writes sweep records as CSV (empty fields for analyses that were skipped
/// or failed; failures carry their message in a trailing comment line).
pub fn write_sweep_csv<W: Write>(records: &[SweepRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{SWEEP_CSV_HEADER}")?;
    for r in records {
        let opt = |v: &Option<f64>| v.map_or(String::new(), |x| format!("{x}"));
        let optb = |v: &Option<bool>| v.map_or(String::new(), |x| x.to_string());
        let (l1, l2, l3) = match r.lambda {
            Some(l) => (format!("{}", l[0]), format!("{}", l[1]), format!("{}", l[2])),
            None => (String::new(), String::new(), String::new()),
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.f,
            r.k,
            r.c,
            opt(&r.nmse_short),
            r.rho_max.map_or(String::new(), |x| x.to_string()),
            l1,
            l2,
            l3,
            optb(&r.climate),
            optb(&r.type_reproduced),
            r.seed
        )?;
        if let Some(e) = &r.error {
            writeln!(out, "# error at F={} K={} c={}: {}", r.f, r.k, r.c, e.replace('\n', " "))?;
        }
    }
    Ok(())
}

/// Reads sweep records written by [`write_sweep_csv`] (comment lines are
/// skipped; used for resumable sweeps).
pub fn read_sweep_csv<R: BufRead>(reader: R) -> Result<Vec<SweepRecord>> {
    let mut out = Vec::new();
    for (ln, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| invalid(format!("sweep CSV read error: {e}")))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line == SWEEP_CSV_HEADER {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 11 {
            return Err(invalid(format!(
                "sweep CSV line {} has {} fields, expected 11",
                ln + 1,
                fields.len()
            )));
        }
        let num = |s: &str, what: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| invalid(format!("bad {what} '{s}' in sweep CSV line {}", ln + 1)))
        };
        let opt_num = |s: &str, what: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                num(s, what).map(Some)
            }
        };
        let lambda = match (
            opt_num(fields[5], "lambda1")?,
            opt_num(fields[6], "lambda2")?,
            opt_num(fields[7], "lambda3")?,
        ) {
            (Some(a), Some(b), Some(c)) => Some([a, b, c]),
            _ => None,
        };
        let opt_bool = |s: &str| -> Option<bool> {
            match s {
                "true" => Some(true),
                "false" => Some(false),
                _ => None,
            }
        };
        out.push(SweepRecord {
            f: num(fields[0], "F")?,
            k: num(fields[1], "K")?,
            c: num(fields[2], "c")?,
            nmse_short: opt_num(fields[3], "nmse")?,
            rho_max: if fields[4].is_empty() {
                None
            } else {
                Some(
                    fields[4]
                        .parse()
                        .map_err(|_| invalid(format!("bad rho_max in sweep CSV line {}", ln + 1)))?,
                )
            },
            lambda,
            climate: opt_bool(fields[8]),
            type_reproduced: opt_bool(fields[9]),
            seed: fields[10]
                .parse()
                .map_err(|_| invalid(format!("bad seed in sweep CSV line {}", ln + 1)))?,
            error: None,
        });
    }
    Ok(out)
}
