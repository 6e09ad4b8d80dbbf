//! Wipe-out, ridge training and closed-loop testing of a reservoir.
//!
//! Training solves `W = U F^T (F F^T + eps I)^{-1}` where `F` collects the
//! read-out features of the driven trajectory column by column. The Gram
//! matrix `F F^T` is accumulated in blocks while driving, so the full feature
//! history is never materialized.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use crate::dynamics::{initial_phases, PhaseVector, ReservoirConfig};
use crate::error::{invalid, numerical, Result};
use crate::integrate::{
    rk1_driven_step, rk4_driven_step, ClosedLoopMode, InputSampler, SampleMode, StepSchedule,
};
use crate::linalg::{gemm_abt_accumulate, solve_spd_in_place, symmetrize_upper, syrk_accumulate};
use crate::readout::{ReadoutSpec, ReadoutWeights};
use crate::tasks::SignalSeries;

/// How the reservoir is advanced while being driven by stored input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriveMode {
    Rk4,
    /// Explicit Euler, for discontinuous inputs.
    Rk1,
}

/// A reservoir with trained read-out weights and the state it reached at the
/// end of training; closed-loop testing resumes from exactly that state.
#[derive(Debug, Clone)]
pub struct TrainedReservoir {
    pub cfg: ReservoirConfig,
    pub weights: ReadoutWeights,
    pub schedule: StepSchedule,
    pub final_train_state: PhaseVector,
    /// NMSE of the readout on the training window itself.
    pub train_nmse: f64,
}

/// Result of a full closed-loop experiment.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trained: TrainedReservoir,
    /// Autonomous predictions at the input sampling rate, starting at the end
    /// of training.
    pub prediction: SignalSeries,
    /// The matching slice of the true signal.
    pub truth: SignalSeries,
    pub nmse: f64,
}

// ---------------------------------------------------------------------------
// Streaming ridge regression

/// Accumulates `F F^T` (Gram) and `U F^T` (cross) in blocks of feature
/// columns, then solves the ridge system by Cholesky factorization.
pub struct GramAccumulator {
    nro: usize,
    m: usize,
    gram: DMatrix<f64>,
    cross: DMatrix<f64>,
    /// Per-output-row target energy, for training-error recovery.
    energy: Vec<f64>,
    fblock: DMatrix<f64>,
    tblock: DMatrix<f64>,
    filled: usize,
    count: usize,
}

const BLOCK: usize = 256;

impl GramAccumulator {
    pub fn new(nro: usize, m: usize) -> Self {
        Self {
            nro,
            m,
            gram: DMatrix::zeros(nro, nro),
            cross: DMatrix::zeros(m, nro),
            energy: vec![0.0; m],
            fblock: DMatrix::zeros(nro, BLOCK),
            tblock: DMatrix::zeros(m, BLOCK),
            filled: 0,
            count: 0,
        }
    }

    pub fn sample_count(&self) -> usize {
        self.count
    }

    /// Adds one (features, target) pair.
    pub fn push(&mut self, features: &[f64], target: &[f64]) {
        debug_assert_eq!(features.len(), self.nro);
        debug_assert_eq!(target.len(), self.m);
        self.fblock.column_mut(self.filled).copy_from_slice(features);
        self.tblock.column_mut(self.filled).copy_from_slice(target);
        for (e, &t) in self.energy.iter_mut().zip(target) {
            *e += t * t;
        }
        self.filled += 1;
        self.count += 1;
        if self.filled == BLOCK {
            self.flush();
        }
    }

    fn flush(&mut self) {
        if self.filled == 0 {
            return;
        }
        syrk_accumulate(&mut self.gram, &self.fblock, self.filled);
        gemm_abt_accumulate(&mut self.cross, &self.tblock, &self.fblock, self.filled);
        self.filled = 0;
    }

    /// Solves the ridge system. Returns the weight matrix and the training
    /// NMSE (mean over output rows of residual energy over target energy).
    pub fn solve(mut self, epsilon: f64) -> Result<(DMatrix<f64>, f64)> {
        if epsilon < 0.0 {
            return Err(invalid("ridge constant must be nonnegative"));
        }
        if self.count == 0 {
            return Err(invalid("no training samples accumulated"));
        }
        self.flush();
        symmetrize_upper(&mut self.gram);
        // Keep the Gram around for the rank-deficient fallback, but only at
        // sizes where the extra copy is affordable.
        let keep = (self.nro <= EIGEN_FALLBACK_MAX).then(|| self.gram.clone());
        let mut a = self.gram;
        for i in 0..self.nro {
            a[(i, i)] += epsilon;
        }
        // Solve (G + eps I) X = F U^T, W = X^T.
        let mut b = self.cross.transpose();
        let (w, wgw_of) = match solve_spd_in_place(&mut a, &mut b) {
            Ok(()) => {
                let w = b.transpose();
                // w (G + eps I) w^T recovered from the Cholesky factor U left
                // in the upper triangle of `a`: it equals ||U w^T||^2.
                let nro = self.nro;
                let wgw = move |w: &DMatrix<f64>, m: usize| {
                    let mut wgw = 0.0;
                    let mut wnorm = 0.0;
                    for i in 0..nro {
                        let mut yi = 0.0;
                        for j in i..nro {
                            yi += a[(i, j)] * w[(m, j)];
                        }
                        wgw += yi * yi;
                        wnorm += w[(m, i)] * w[(m, i)];
                    }
                    wgw - epsilon * wnorm
                };
                (w, Box::new(wgw) as Box<dyn Fn(&DMatrix<f64>, usize) -> f64>)
            }
            Err(e) => {
                // Heavily collinear features (e.g. strongly input-locked
                // oscillators) make G + eps I numerically indefinite for tiny
                // eps. Fall back to a symmetric eigendecomposition with the
                // spectrum clamped to [0, inf).
                let g = keep.ok_or_else(|| {
                    numerical(format!(
                        "ridge solve failed (epsilon = {epsilon}, {} samples): {e}",
                        self.count
                    ))
                })?;
                let eig = g.clone().symmetric_eigen();
                let inv: Vec<f64> =
                    eig.eigenvalues.iter().map(|&l| 1.0 / (l.max(0.0) + epsilon)).collect();
                if inv.iter().any(|v| !v.is_finite()) {
                    return Err(numerical(format!(
                        "ridge solve failed (epsilon = {epsilon}, {} samples): \
                         Gram spectrum irrecoverable",
                        self.count
                    )));
                }
                // W^T = V diag(1/(lambda + eps)) V^T cross^T.
                let mut vt_b = eig.eigenvectors.transpose() * b;
                for (i, &s) in inv.iter().enumerate() {
                    vt_b.row_mut(i).scale_mut(s);
                }
                let w = (&eig.eigenvectors * vt_b).transpose();
                let wgw = move |w: &DMatrix<f64>, m: usize| {
                    let row = w.row(m).transpose();
                    (row.transpose() * (&g * row))[(0, 0)]
                };
                (w, Box::new(wgw) as Box<dyn Fn(&DMatrix<f64>, usize) -> f64>)
            }
        };

        // Residual energy per row: ||u - W f||^2 = e - 2 <w, c> + w G w^T.
        let mut train_nmse = 0.0;
        let mut used = 0;
        for m in 0..self.m {
            if self.energy[m] == 0.0 {
                continue;
            }
            let mut cterm = 0.0;
            for j in 0..self.nro {
                cterm += w[(m, j)] * self.cross[(m, j)];
            }
            let res = (self.energy[m] - 2.0 * cterm + wgw_of(&w, m)).max(0.0);
            train_nmse += res / self.energy[m];
            used += 1;
        }
        let train_nmse = if used > 0 { train_nmse / used as f64 } else { 0.0 };
        Ok((w, train_nmse))
    }
}

/// Largest read-out dimension for which the solver keeps a spare copy of the
/// Gram matrix to enable the eigendecomposition fallback (128 MB at 4096).
const EIGEN_FALLBACK_MAX: usize = 4096;

/// Ridge regression on explicit matrices: `features` is `N_ro x T`, `targets`
/// is `M x T`.
pub fn ridge_solve(
    features: &DMatrix<f64>,
    targets: &DMatrix<f64>,
    spec: ReadoutSpec,
    epsilon: f64,
) -> Result<ReadoutWeights> {
    if features.ncols() != targets.ncols() {
        return Err(invalid(format!(
            "features have {} samples, targets {}",
            features.ncols(),
            targets.ncols()
        )));
    }
    if features.ncols() == 0 {
        return Err(invalid("ridge regression needs at least one sample"));
    }
    let mut acc = GramAccumulator::new(features.nrows(), targets.nrows());
    for j in 0..features.ncols() {
        acc.push(
            features.column(j).as_slice(),
            targets.column(j).as_slice(),
        );
    }
    let (w, _) = acc.solve(epsilon)?;
    Ok(ReadoutWeights::new(w, spec, epsilon))
}

// ---------------------------------------------------------------------------
// Driving

struct DriveOutcome {
    final_state: PhaseVector,
}

/// Cap on regression pairs collected within substeps: keeps the Gram update
/// cost bounded when the reservoir takes many substeps per input sample.
const TRAIN_PAIR_CAP: usize = 16_384;

/// Wipes out from the deterministic initial phases over `[-T_wipe, 0)`, then
/// drives over `[0, T_train)`, handing the state and its half-unit input
/// index to `collect`. With `substep_stride = substeps` only input sample
/// times are collected; smaller strides add intermediate reservoir steps,
/// which keeps the regression overdetermined when `substeps` is large.
/// Returns the state at `T_train`.
fn drive_and_collect(
    cfg: &ReservoirConfig,
    schedule: &StepSchedule,
    sampler: &InputSampler,
    base_half_units: usize,
    drive: DriveMode,
    substep_stride: usize,
    mut collect: impl FnMut(&PhaseVector, usize),
) -> Result<DriveOutcome> {
    cfg.validate()?;
    let h = schedule.h_res;
    let sub = schedule.substeps;
    let stride = substep_stride.max(1);
    let mut state = initial_phases(cfg.n);
    let mut half = base_half_units;
    let step = |state: &PhaseVector, half: usize| -> Result<PhaseVector> {
        match drive {
            DriveMode::Rk4 => rk4_driven_step(state, cfg, sampler, half, h),
            DriveMode::Rk1 => rk1_driven_step(state, cfg, sampler, half, h),
        }
    };
    for _ in 0..schedule.n_wipe * sub {
        state = step(&state, half)?;
        half += 2;
    }
    for _ in 0..schedule.n_train {
        for s in 0..sub {
            if s % stride == 0 {
                collect(&state, half);
            }
            state = step(&state, half)?;
            half += 2;
        }
    }
    Ok(DriveOutcome { final_state: state })
}

/// Stride through substeps that caps the total collected pairs near
/// `TRAIN_PAIR_CAP` while always including every input sample time.
fn train_stride(schedule: &StepSchedule) -> usize {
    let total = schedule.n_train * schedule.substeps;
    total.div_ceil(TRAIN_PAIR_CAP).max(1)
}

fn sampler_layout(
    cfg: &ReservoirConfig,
    schedule: &StepSchedule,
    input: &SignalSeries,
) -> Result<usize> {
    if input.m != cfg.m {
        return Err(invalid(format!(
            "input has {} channels, expected M = {}",
            input.m, cfg.m
        )));
    }
    let half_step = 0.5 * schedule.h_u;
    if (input.h - half_step).abs() > 1e-9 * half_step {
        return Err(invalid(format!(
            "input is sampled at {}, expected h_u / 2 = {half_step}",
            input.h
        )));
    }
    let offset = (-schedule.t_wipe - input.t0) / input.h;
    let r = offset.round();
    if r < -1e-6 || (offset - r).abs() > 1e-6 {
        return Err(invalid(format!(
            "input must start on the sampling grid at or before -T_wipe \
             (starts at {}, needs {})",
            input.t0, -schedule.t_wipe
        )));
    }
    Ok(r.max(0.0) as usize)
}

// ---------------------------------------------------------------------------
// Experiments

/// Full closed-loop experiment: wipe, train, then run autonomously and score
/// against the truth over the test window.
///
/// `input` must be sampled at `h_u / 2`, start at or before `-T_wipe`, and
/// cover through `T_train + T_test`.
pub fn run_experiment(
    cfg: &ReservoirConfig,
    spec: ReadoutSpec,
    schedule: &StepSchedule,
    input: &SignalSeries,
    epsilon: f64,
    mode: ClosedLoopMode,
) -> Result<RunOutcome> {
    let offset = sampler_layout(cfg, schedule, input)?;
    let needed = offset + 2 * (schedule.n_wipe + schedule.n_train + schedule.n_test);
    if input.len() <= needed {
        return Err(invalid(format!(
            "input has {} samples, needs more than {needed}",
            input.len()
        )));
    }
    // Smooth self-emulation inputs are interpolated between grid samples so
    // the drive matches the continuous feedback used in the closed loop even
    // when the reservoir takes many substeps per input sample. When
    // substeps = 1 the RK4 stages land exactly on the half-sample grid and
    // interpolation never kicks in.
    let sampler = InputSampler::new(&input.values, cfg.m, schedule.substeps, SampleMode::Linear)?;
    let nro = spec.feature_count(cfg.n);
    let mut acc = GramAccumulator::new(nro, cfg.m);
    let mut feat = vec![0.0; nro];
    let mut target = vec![0.0; cfg.m];
    let drive = drive_and_collect(
        cfg,
        schedule,
        &sampler,
        offset * schedule.substeps,
        DriveMode::Rk4,
        train_stride(schedule),
        |state, half| {
            spec.features_into(state.as_slice(), &mut feat);
            sampler
                .at(half, &mut target)
                .expect("training window bounds pre-checked");
            acc.push(&feat, &target);
        },
    )?;
    let (w, train_nmse) = acc.solve(epsilon)?;
    let weights = ReadoutWeights::new(w, spec, epsilon);

    let trained = TrainedReservoir {
        cfg: cfg.clone(),
        weights,
        schedule: *schedule,
        final_train_state: drive.final_state,
        train_nmse,
    };
    let (prediction, truth, score) = closed_loop_test(&trained, input, offset, mode)?;
    Ok(RunOutcome {
        trained,
        prediction,
        truth,
        nmse: score,
    })
}

/// Runs the autonomous loop from the end-of-training state and scores it.
/// Usable on its own to re-test a persisted reservoir.
pub fn closed_loop_test(
    trained: &TrainedReservoir,
    input: &SignalSeries,
    offset: usize,
    mode: ClosedLoopMode,
) -> Result<(SignalSeries, SignalSeries, f64)> {
    let cfg = &trained.cfg;
    let schedule = &trained.schedule;
    let mut state = trained.final_train_state.clone();
    let mut pred_values = Vec::with_capacity(schedule.n_test * cfg.m);
    let mut truth_values = Vec::with_capacity(schedule.n_test * cfg.m);
    for i in 0..schedule.n_test {
        let u_hat = crate::dynamics::predict_at(&state, cfg, &trained.weights);
        pred_values.extend_from_slice(&u_hat);
        truth_values
            .extend_from_slice(input.sample(offset + 2 * (schedule.n_wipe + schedule.n_train + i)));
        if i + 1 < schedule.n_test {
            for _ in 0..schedule.substeps {
                state = mode.step(&state, cfg, &trained.weights, schedule.h_res)?;
            }
        }
    }
    let t_start = schedule.t_train;
    let mut prediction = SignalSeries::new(t_start, schedule.h_u, cfg.m, pred_values)?;
    prediction.scale = input.scale;
    let mut truth = SignalSeries::new(t_start, schedule.h_u, cfg.m, truth_values)?;
    truth.scale = input.scale;
    let score = nmse(&prediction, &truth)?;
    Ok((prediction, truth, score))
}

/// Outcome of an open-loop (drive-through) task such as NARMA10, where the
/// network stays input-driven during testing and the readout predicts a
/// separate target channel.
#[derive(Debug, Clone)]
pub struct OpenLoopOutcome {
    pub trained: TrainedReservoir,
    pub prediction: Vec<f64>,
    pub truth: Vec<f64>,
    pub nmse: f64,
}

/// Open-loop experiment. `targets[j]` is the scalar target at training sample
/// `j` counted from the start of training; it must cover
/// `n_train + n_test` samples.
pub fn run_open_loop(
    cfg: &ReservoirConfig,
    spec: ReadoutSpec,
    schedule: &StepSchedule,
    input: &SignalSeries,
    targets: &[f64],
    epsilon: f64,
    drive: DriveMode,
) -> Result<OpenLoopOutcome> {
    let offset = sampler_layout(cfg, schedule, input)?;
    let needed = offset + 2 * (schedule.n_wipe + schedule.n_train + schedule.n_test);
    if input.len() <= needed {
        return Err(invalid(format!(
            "input has {} samples, needs more than {needed}",
            input.len()
        )));
    }
    if targets.len() < schedule.n_train + schedule.n_test {
        return Err(invalid(format!(
            "targets cover {} samples, need {}",
            targets.len(),
            schedule.n_train + schedule.n_test
        )));
    }
    let sampler = InputSampler::new(&input.values, cfg.m, schedule.substeps, SampleMode::Hold)?;
    let nro = spec.feature_count(cfg.n);
    let mut acc = GramAccumulator::new(nro, 1);
    let mut feat = vec![0.0; nro];
    let mut j = 0usize;
    let drive_out = drive_and_collect(
        cfg,
        schedule,
        &sampler,
        offset * schedule.substeps,
        drive,
        // Open-loop targets are per input sample, so never collect substeps.
        schedule.substeps,
        |state, _half| {
            spec.features_into(state.as_slice(), &mut feat);
            acc.push(&feat, &targets[j..j + 1]);
            j += 1;
        },
    )?;
    let (w, train_nmse) = acc.solve(epsilon)?;
    let weights = ReadoutWeights::new(w, spec, epsilon);

    // Keep driving through the test window, predicting as we go.
    let h = schedule.h_res;
    let mut state = drive_out.final_state.clone();
    let mut half = (offset + 2 * (schedule.n_wipe + schedule.n_train)) * schedule.substeps;
    let mut prediction = Vec::with_capacity(schedule.n_test);
    let mut truth = Vec::with_capacity(schedule.n_test);
    for i in 0..schedule.n_test {
        prediction.push(crate::dynamics::predict_at(&state, cfg, &weights)[0]);
        truth.push(targets[schedule.n_train + i]);
        if i + 1 < schedule.n_test {
            for _ in 0..schedule.substeps {
                state = match drive {
                    DriveMode::Rk4 => rk4_driven_step(&state, cfg, &sampler, half, h)?,
                    DriveMode::Rk1 => rk1_driven_step(&state, cfg, &sampler, half, h)?,
                };
                half += 2;
            }
        }
    }
    let energy: f64 = truth.iter().map(|&v| v * v).sum();
    if energy == 0.0 {
        return Err(invalid("open-loop target has zero energy over the test window"));
    }
    let res: f64 = prediction
        .iter()
        .zip(&truth)
        .map(|(&p, &t)| (p - t) * (p - t))
        .sum();
    Ok(OpenLoopOutcome {
        trained: TrainedReservoir {
            cfg: cfg.clone(),
            weights,
            schedule: *schedule,
            final_train_state: drive_out.final_state,
            train_nmse,
        },
        prediction,
        truth,
        nmse: res / energy,
    })
}

/// Normalized mean square error between two aligned series:
/// mean over channels of (residual energy / truth energy).
pub fn nmse(pred: &SignalSeries, truth: &SignalSeries) -> Result<f64> {
    if pred.m != truth.m {
        return Err(invalid(format!(
            "channel mismatch: {} vs {}",
            pred.m, truth.m
        )));
    }
    if pred.len() != truth.len() || pred.is_empty() {
        return Err(invalid(format!(
            "length mismatch: {} vs {}",
            pred.len(),
            truth.len()
        )));
    }
    if (pred.h - truth.h).abs() > 1e-9 * truth.h {
        return Err(invalid("sampling step mismatch"));
    }
    let mut total = 0.0;
    for j in 0..pred.m {
        let mut res = 0.0;
        let mut energy = 0.0;
        for i in 0..pred.len() {
            let t = truth.sample(i)[j];
            let p = pred.sample(i)[j];
            res += (p - t) * (p - t);
            energy += t * t;
        }
        if energy == 0.0 {
            return Err(invalid(format!("truth channel {j} has zero energy")));
        }
        total += res / energy;
    }
    Ok(total / pred.m as f64)
}

// ---------------------------------------------------------------------------
// Multi-variant training (shared drive pass)

/// Trains all three read-out variants from a single drive pass by
/// accumulating the combined feature vector `[1, sin, cos, sin^2]` and
/// extracting each variant's sub-blocks of the Gram and cross matrices.
pub fn train_all_variants(
    cfg: &ReservoirConfig,
    schedule: &StepSchedule,
    input: &SignalSeries,
    epsilon: f64,
) -> Result<(Vec<ReadoutWeights>, PhaseVector)> {
    let offset = sampler_layout(cfg, schedule, input)?;
    let sampler = InputSampler::new(&input.values, cfg.m, schedule.substeps, SampleMode::Linear)?;
    let n = cfg.n;
    let combined = 3 * n + 1;
    let mut acc = GramAccumulator::new(combined, cfg.m);
    let mut feat = vec![0.0; combined];
    let mut target = vec![0.0; cfg.m];
    let drive = drive_and_collect(
        cfg,
        schedule,
        &sampler,
        offset * schedule.substeps,
        DriveMode::Rk4,
        train_stride(schedule),
        |state, half| {
            feat[0] = 1.0;
            for (k, &th) in state.as_slice().iter().enumerate() {
                let (s, c) = th.sin_cos();
                feat[1 + k] = s;
                feat[1 + n + k] = c;
                feat[1 + 2 * n + k] = s * s;
            }
            sampler
                .at(half, &mut target)
                .expect("training window bounds pre-checked");
            acc.push(&feat, &target);
        },
    )?;
    acc.flush();
    symmetrize_upper(&mut acc.gram);

    let index_map = |spec: ReadoutSpec| -> Vec<usize> {
        let mut idx = vec![0];
        idx.extend(1..=n);
        match spec {
            ReadoutSpec::V1 => {}
            ReadoutSpec::V2 => idx.extend(1 + n..=2 * n),
            ReadoutSpec::V3 => idx.extend(1 + 2 * n..=3 * n),
        }
        idx
    };

    let mut out = Vec::with_capacity(3);
    for spec in [ReadoutSpec::V1, ReadoutSpec::V2, ReadoutSpec::V3] {
        let idx = index_map(spec);
        let nro = idx.len();
        let mut a = DMatrix::zeros(nro, nro);
        for (bi, &gi) in idx.iter().enumerate() {
            for (bj, &gj) in idx.iter().enumerate() {
                a[(bi, bj)] = acc.gram[(gi, gj)];
            }
            a[(bi, bi)] += epsilon;
        }
        let mut b = DMatrix::zeros(nro, cfg.m);
        for (bi, &gi) in idx.iter().enumerate() {
            for m in 0..cfg.m {
                b[(bi, m)] = acc.cross[(m, gi)];
            }
        }
        solve_spd_in_place(&mut a, &mut b)?;
        out.push(ReadoutWeights::new(b.transpose(), spec, epsilon));
    }
    Ok((out, drive.final_state))
}

// ---------------------------------------------------------------------------
// Weights persistence

/// Writes weights as text: a header line `M N_ro variant epsilon seed`
/// followed by one row per output at 17 significant digits.
pub fn write_weights<W: Write>(w: &ReadoutWeights, seed: u64, mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "{} {} {} {:.17e} {}",
        w.output_dim(),
        w.w.ncols(),
        w.spec.name(),
        w.epsilon,
        seed
    )?;
    for i in 0..w.output_dim() {
        let row: Vec<String> = (0..w.w.ncols()).map(|j| format!("{:.17e}", w.w[(i, j)])).collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    Ok(())
}

/// Reads weights written by [`write_weights`]; returns the weights and the
/// recorded seed.
pub fn read_weights<R: BufRead>(reader: R) -> Result<(ReadoutWeights, u64)> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| invalid("empty weights file"))?
        .map_err(|e| invalid(format!("weights read error: {e}")))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 {
        return Err(invalid("weights header must be: M N_ro variant epsilon seed"));
    }
    let m: usize = fields[0].parse().map_err(|_| invalid("bad M in weights header"))?;
    let nro: usize = fields[1].parse().map_err(|_| invalid("bad N_ro in weights header"))?;
    let spec = ReadoutSpec::parse(fields[2])?;
    let epsilon: f64 = fields[3]
        .parse()
        .map_err(|_| invalid("bad epsilon in weights header"))?;
    let seed: u64 = fields[4].parse().map_err(|_| invalid("bad seed in weights header"))?;
    let mut w = DMatrix::zeros(m, nro);
    for i in 0..m {
        let line = lines
            .next()
            .ok_or_else(|| invalid(format!("weights file ends after {i} rows, expected {m}")))?
            .map_err(|e| invalid(format!("weights read error: {e}")))?;
        let mut count = 0;
        for (j, tok) in line.split_whitespace().enumerate() {
            if j >= nro {
                return Err(invalid(format!("row {i} has more than {nro} values")));
            }
            w[(i, j)] = tok
                .parse()
                .map_err(|_| invalid(format!("bad value in weights row {i}")))?;
            count += 1;
        }
        if count != nro {
            return Err(invalid(format!("row {i} has {count} values, expected {nro}")));
        }
    }
    Ok((ReadoutWeights::new(w, spec, epsilon), seed))
}
