//! Benchmark signal generators: Lorenz, Rössler, Mackey–Glass,
//! Kuramoto–Sivashinsky and NARMA10, plus the sampled-series container they
//! all produce.

use std::io::{BufRead, Write};

use rand::Rng as _;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{invalid, numerical, Result};
use crate::integrate::rk4_generic_step;
use crate::rng::stream_rng;

/// A uniformly sampled multichannel signal. Sample `i` lives at time
/// `t0 + i * h` and occupies `values[i*m .. (i+1)*m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSeries {
    pub t0: f64,
    pub h: f64,
    pub m: usize,
    /// Sample-major storage.
    pub values: Vec<f64>,
    /// Divisor already applied to the raw signal (1 if unscaled).
    pub scale: f64,
}

impl SignalSeries {
    pub fn new(t0: f64, h: f64, m: usize, values: Vec<f64>) -> Result<Self> {
        if m == 0 {
            return Err(invalid("signal must have at least one channel"));
        }
        if h <= 0.0 {
            return Err(invalid("sample step must be positive"));
        }
        if values.len() % m != 0 {
            return Err(invalid("signal storage length is not a multiple of the channel count"));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(numerical("signal contains non-finite values"));
        }
        Ok(Self {
            t0,
            h,
            m,
            values,
            scale: 1.0,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.m
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        &self.values[i * self.m..(i + 1) * self.m]
    }

    pub fn time_of(&self, i: usize) -> f64 {
        self.t0 + self.h * i as f64
    }

    /// Channel `j` as an owned vector.
    pub fn channel(&self, j: usize) -> Vec<f64> {
        (0..self.len()).map(|i| self.sample(i)[j]).collect()
    }

    /// Keeps every `k`-th sample (the first is always kept); the step grows
    /// by the same factor.
    pub fn decimate(&self, k: usize) -> Result<SignalSeries> {
        if k == 0 {
            return Err(invalid("decimation factor must be at least 1"));
        }
        let mut values = Vec::with_capacity(self.values.len() / k + self.m);
        let mut i = 0;
        while i < self.len() {
            values.extend_from_slice(self.sample(i));
            i += k;
        }
        Ok(SignalSeries {
            t0: self.t0,
            h: self.h * k as f64,
            m: self.m,
            values,
            scale: self.scale,
        })
    }

    /// Contiguous sub-series of `len` samples starting at `start`.
    pub fn window(&self, start: usize, len: usize) -> Result<SignalSeries> {
        if start + len > self.len() {
            return Err(invalid(format!(
                "window [{start}, {}) exceeds series length {}",
                start + len,
                self.len()
            )));
        }
        Ok(SignalSeries {
            t0: self.time_of(start),
            h: self.h,
            m: self.m,
            values: self.values[start * self.m..(start + len) * self.m].to_vec(),
            scale: self.scale,
        })
    }

    /// Writes the series as CSV with header `t,u1..uM`.
    pub fn to_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "t")?;
        for j in 1..=self.m {
            write!(out, ",u{j}")?;
        }
        writeln!(out)?;
        for i in 0..self.len() {
            write!(out, "{:.17e}", self.time_of(i))?;
            for v in self.sample(i) {
                write!(out, ",{v:.17e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// Reads a series written by [`Self::to_csv`]; `t0` and `h` are inferred
    /// from the time column.
    pub fn from_csv<R: BufRead>(reader: R) -> Result<SignalSeries> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| invalid("empty CSV"))?
            .map_err(|e| invalid(format!("CSV read error: {e}")))?;
        let cols: Vec<&str> = header.trim().split(',').collect();
        if cols.first() != Some(&"t") || cols.len() < 2 {
            return Err(invalid("CSV header must be t,u1..uM"));
        }
        let m = cols.len() - 1;
        let mut times = Vec::new();
        let mut values = Vec::new();
        for line in lines {
            let line = line.map_err(|e| invalid(format!("CSV read error: {e}")))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != m + 1 {
                return Err(invalid(format!(
                    "CSV row has {} fields, expected {}",
                    fields.len(),
                    m + 1
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| invalid(format!("bad CSV number '{s}'")))
            };
            times.push(parse(fields[0])?);
            for f in &fields[1..] {
                values.push(parse(f)?);
            }
        }
        if times.len() < 2 {
            return Err(invalid("CSV needs at least two samples"));
        }
        let t0 = times[0];
        let h = times[1] - times[0];
        SignalSeries::new(t0, h, m, values)
    }
}

/// Divides the signal elementwise by `divisor` and records it.
pub fn scale_input(series: &SignalSeries, divisor: f64) -> Result<SignalSeries> {
    if !(divisor > 0.0) {
        return Err(invalid(format!("scale divisor {divisor} must be positive")));
    }
    let mut out = series.clone();
    for v in &mut out.values {
        *v /= divisor;
    }
    out.scale = series.scale * divisor;
    Ok(out)
}

// ---------------------------------------------------------------------------
// Lorenz and Rössler

/// Lorenz-63 constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorenzParams {
    pub sigma: f64,
    pub beta: f64,
    pub rho: f64,
}

impl Default for LorenzParams {
    fn default() -> Self {
        Self {
            sigma: 10.0,
            beta: 8.0 / 3.0,
            rho: 28.0,
        }
    }
}

pub fn lorenz_field(p: &LorenzParams, x: &[f64], out: &mut [f64]) {
    out[0] = p.sigma * (x[1] - x[0]);
    out[1] = x[0] * (p.rho - x[2]) - x[1];
    out[2] = x[0] * x[1] - p.beta * x[2];
}

/// Row-major 3x3 Jacobian of the Lorenz field.
pub fn lorenz_jacobian(p: &LorenzParams, x: &[f64]) -> [[f64; 3]; 3] {
    [
        [-p.sigma, p.sigma, 0.0],
        [p.rho - x[2], -1.0, -x[0]],
        [x[1], x[0], -p.beta],
    ]
}

/// Rössler constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RosslerParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for RosslerParams {
    fn default() -> Self {
        Self {
            a: 0.2,
            b: 0.2,
            c: 5.7,
        }
    }
}

pub fn rossler_field(p: &RosslerParams, x: &[f64], out: &mut [f64]) {
    out[0] = -x[1] - x[2];
    out[1] = x[0] + p.a * x[1];
    out[2] = p.b + x[2] * (x[0] - p.c);
}

/// Row-major 3x3 Jacobian of the Rössler field.
pub fn rossler_jacobian(p: &RosslerParams, x: &[f64]) -> [[f64; 3]; 3] {
    [
        [0.0, -1.0, -1.0],
        [1.0, p.a, 0.0],
        [x[2], 0.0, x[0] - p.c],
    ]
}

/// Generation step for the two flows.
pub const FLOW_GEN_STEP: f64 = 1.0 / 2000.0;

fn flow_series<F>(
    field: F,
    x0: [f64; 3],
    h: f64,
    t: f64,
    transient: f64,
    what: &str,
) -> Result<SignalSeries>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    if h <= 0.0 || t <= 0.0 {
        return Err(invalid("step and duration must be positive"));
    }
    let dec = (h / FLOW_GEN_STEP).round();
    if (h / FLOW_GEN_STEP - dec).abs() > 1e-9 || dec < 1.0 {
        return Err(invalid(format!(
            "step {h} is not an integer multiple of the generation step {FLOW_GEN_STEP}"
        )));
    }
    let dec = dec as usize;
    let skip = (transient / FLOW_GEN_STEP).round() as usize;
    let samples = (t / h).round() as usize + 1;
    let mut x = x0.to_vec();
    for step in 0..skip {
        x = rk4_generic_step(&x, &field, step as f64 * FLOW_GEN_STEP, FLOW_GEN_STEP)?;
    }
    let mut values = Vec::with_capacity(3 * samples);
    values.extend_from_slice(&x);
    for i in 1..samples {
        for s in 0..dec {
            let t_now = transient + ((i - 1) * dec + s) as f64 * FLOW_GEN_STEP;
            x = rk4_generic_step(&x, &field, t_now, FLOW_GEN_STEP)?;
        }
        if x.iter().any(|v| v.abs() > 1e6) {
            return Err(numerical(format!("{what} trajectory blew up")));
        }
        values.extend_from_slice(&x);
    }
    SignalSeries::new(0.0, h, 3, values)
}

/// Lorenz trajectory sampled at `h` after discarding `transient` time units;
/// generated internally at step 1/2000. Unscaled.
pub fn lorenz_series(
    p: &LorenzParams,
    x0: [f64; 3],
    h: f64,
    t: f64,
    transient: f64,
) -> Result<SignalSeries> {
    let params = *p;
    flow_series(
        move |_, x, out| lorenz_field(&params, x, out),
        x0,
        h,
        t,
        transient,
        "Lorenz",
    )
}

/// Default Lorenz transient (time units).
pub const LORENZ_TRANSIENT: f64 = 40.0;

/// Rössler trajectory; same conventions as [`lorenz_series`].
pub fn rossler_series(
    p: &RosslerParams,
    x0: [f64; 3],
    h: f64,
    t: f64,
    transient: f64,
) -> Result<SignalSeries> {
    let params = *p;
    flow_series(
        move |_, x, out| rossler_field(&params, x, out),
        x0,
        h,
        t,
        transient,
        "Rössler",
    )
}

// ---------------------------------------------------------------------------
// Mackey–Glass

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MackeyGlassParams {
    pub a: f64,
    pub b: f64,
    pub n: f64,
    pub tau: f64,
}

impl Default for MackeyGlassParams {
    fn default() -> Self {
        Self {
            a: 0.2,
            b: 0.1,
            n: 10.0,
            tau: 17.0,
        }
    }
}

fn mg_rhs(p: &MackeyGlassParams, y: f64, y_delayed: f64) -> f64 {
    p.a * y_delayed / (1.0 + y_delayed.powf(p.n)) - p.b * y
}

/// Mackey–Glass delay equation solved by fixed-step RK4 with the delayed
/// value read from the solution grid (4-point interpolation at stage
/// half-steps). `h` must divide the delay exactly. History before t = 0 is
/// the constant `y0`.
pub fn mackey_glass_series(
    p: &MackeyGlassParams,
    y0: f64,
    h: f64,
    t: f64,
    transient: f64,
) -> Result<SignalSeries> {
    if h <= 0.0 || t <= 0.0 {
        return Err(invalid("step and duration must be positive"));
    }
    let d = p.tau / h;
    if (d - d.round()).abs() > 1e-9 {
        return Err(invalid(format!(
            "delay {} is not an integer multiple of step {h}",
            p.tau
        )));
    }
    let d = d.round() as usize;
    if d < 2 {
        return Err(invalid("delay must span at least two steps"));
    }
    let skip = (transient / h).round() as usize;
    let samples = (t / h).round() as usize + 1;
    let total = skip + samples;

    // y[i] holds y(i*h); virtual negative indices return y0.
    let mut y = Vec::with_capacity(total);
    y.push(y0);
    let at = |y: &[f64], i: isize| -> f64 {
        if i < 0 {
            y0
        } else {
            y[i as usize]
        }
    };
    // Cubic Lagrange weights at the midpoint of nodes (-1, 0, 1, 2).
    const WM: [f64; 4] = [-1.0 / 16.0, 9.0 / 16.0, 9.0 / 16.0, -1.0 / 16.0];
    for i in 0..total - 1 {
        let i = i as isize;
        let d = d as isize;
        let y_now = at(&y, i);
        let del0 = at(&y, i - d);
        let del1 = at(&y, i - d + 1);
        let del_mid = WM[0] * at(&y, i - d - 1)
            + WM[1] * del0
            + WM[2] * del1
            + WM[3] * at(&y, i - d + 2);
        let k1 = mg_rhs(p, y_now, del0);
        let k2 = mg_rhs(p, y_now + 0.5 * h * k1, del_mid);
        let k3 = mg_rhs(p, y_now + 0.5 * h * k2, del_mid);
        let k4 = mg_rhs(p, y_now + h * k3, del1);
        let next = y_now + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !next.is_finite() || next.abs() > 1e6 {
            return Err(numerical("Mackey-Glass trajectory blew up"));
        }
        y.push(next);
    }
    SignalSeries::new(0.0, h, 1, y[skip..].to_vec())
}

// ---------------------------------------------------------------------------
// Kuramoto–Sivashinsky

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsParams {
    /// Periodic domain length.
    pub l: f64,
    /// Spatial gridpoints (power of two).
    pub gridpoints: usize,
    /// Probe count M: probe `i` reads the field at the gridpoint nearest
    /// `i * L / M`.
    pub probes: usize,
}

impl Default for KsParams {
    fn default() -> Self {
        Self {
            l: 45.0,
            gridpoints: 128,
            probes: 6,
        }
    }
}

/// Small-amplitude random initial field for the KS solver.
pub fn ks_random_initial(p: &KsParams, seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, crate::rng::stream::TASK);
    (0..p.gridpoints)
        .map(|_| 0.1 * (rng.gen::<f64>() * 2.0 - 1.0))
        .collect()
}

/// Kuramoto–Sivashinsky `y_t = -y y_x - y_xx - y_xxxx` on a periodic domain,
/// solved pseudospectrally with an exponential fourth-order stepper
/// (contour-integral coefficients) and 2/3 dealiasing. The output holds the
/// `probes` channel values sampled every `h_out`.
pub fn ks_series(
    p: &KsParams,
    y0: &[f64],
    h_out: f64,
    t: f64,
    transient: f64,
) -> Result<SignalSeries> {
    if !p.gridpoints.is_power_of_two() {
        return Err(invalid("gridpoint count must be a power of two"));
    }
    if p.probes == 0 || p.probes > p.gridpoints {
        return Err(invalid("probe count must be in [1, gridpoints]"));
    }
    if y0.len() != p.gridpoints {
        return Err(invalid(format!(
            "initial field has {} points, expected {}",
            y0.len(),
            p.gridpoints
        )));
    }
    if h_out <= 0.0 || t <= 0.0 {
        return Err(invalid("step and duration must be positive"));
    }
    let n = p.gridpoints;
    let inner_per_out = (h_out / 0.05).ceil().max(1.0) as usize;
    let h = h_out / inner_per_out as f64;

    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);

    // Wavenumbers k_q = 2 pi q / L with the usual FFT ordering.
    let wavenumber = |q: usize| -> f64 {
        let qi = if q <= n / 2 { q as isize } else { q as isize - n as isize };
        std::f64::consts::TAU * qi as f64 / p.l
    };
    let lin: Vec<f64> = (0..n)
        .map(|q| {
            let k = wavenumber(q);
            k * k - k.powi(4)
        })
        .collect();
    // 2/3-rule dealias mask.
    let keep: Vec<bool> = (0..n)
        .map(|q| {
            let qi = if q <= n / 2 { q as isize } else { q as isize - n as isize };
            (qi.unsigned_abs()) < n / 3
        })
        .collect();

    // Exponential-integrator coefficients by averaging over a contour of 32
    // points around each h*lin value.
    let m_pts = 32;
    let mut e = vec![0.0; n];
    let mut e2 = vec![0.0; n];
    let mut q_c = vec![0.0; n];
    let mut f1 = vec![0.0; n];
    let mut f2 = vec![0.0; n];
    let mut f3 = vec![0.0; n];
    for qi in 0..n {
        let hl = h * lin[qi];
        e[qi] = hl.exp();
        e2[qi] = (0.5 * hl).exp();
        let mut sq = Complex64::new(0.0, 0.0);
        let mut s1 = Complex64::new(0.0, 0.0);
        let mut s2 = Complex64::new(0.0, 0.0);
        let mut s3 = Complex64::new(0.0, 0.0);
        for j in 0..m_pts {
            let th = std::f64::consts::PI * (j as f64 + 0.5) / m_pts as f64;
            let z = Complex64::new(hl, 0.0) + Complex64::from_polar(1.0, th);
            let ez = z.exp();
            let z2 = z * z;
            let z3 = z2 * z;
            sq += ((z * 0.5).exp() - 1.0) / z;
            s1 += (-4.0 - z + ez * (4.0 - 3.0 * z + z2)) / z3;
            s2 += (2.0 + z + ez * (z - 2.0)) / z3;
            s3 += (-4.0 - 3.0 * z - z2 + ez * (4.0 - z)) / z3;
        }
        // The contour is symmetric about the real axis; the average of the
        // upper half equals the real part of the full average.
        q_c[qi] = h * (sq / m_pts as f64).re;
        f1[qi] = h * (s1 / m_pts as f64).re;
        f2[qi] = h * (s2 / m_pts as f64).re;
        f3[qi] = h * (s3 / m_pts as f64).re;
    }

    let mut v: Vec<Complex64> = y0.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft.process(&mut v);
    for q in 0..n {
        if !keep[q] {
            v[q] = Complex64::new(0.0, 0.0);
        }
    }

    let scale = 1.0 / n as f64;
    let nonlinear = |v: &[Complex64],
                     fft: &std::sync::Arc<dyn rustfft::Fft<f64>>,
                     ifft: &std::sync::Arc<dyn rustfft::Fft<f64>>|
     -> Vec<Complex64> {
        let mut phys = v.to_vec();
        ifft.process(&mut phys);
        for x in phys.iter_mut() {
            let y = x.re * scale;
            *x = Complex64::new(y * y, 0.0);
        }
        fft.process(&mut phys);
        (0..n)
            .map(|q| {
                if keep[q] {
                    Complex64::new(0.0, -0.5 * wavenumber(q)) * phys[q]
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect()
    };

    let probe_idx: Vec<usize> = (0..p.probes)
        .map(|i| ((i * n) as f64 / p.probes as f64).round() as usize % n)
        .collect();

    let skip_inner = ((transient / h_out).round() as usize) * inner_per_out;
    let samples = (t / h_out).round() as usize + 1;
    let total_inner = skip_inner + (samples - 1) * inner_per_out;
    let mut values = Vec::with_capacity(samples * p.probes);

    let record = |v: &[Complex64], values: &mut Vec<f64>| -> Result<()> {
        // Spectral-tail guard on the retained band.
        let mut total_e = 0.0;
        let mut tail_e = 0.0;
        for q in 0..n {
            let qi = if q <= n / 2 { q as isize } else { q as isize - n as isize };
            let qa = qi.unsigned_abs();
            if qa == 0 || qa >= n / 3 {
                continue;
            }
            let e = v[q].norm_sqr();
            total_e += e;
            if qa > 2 * n / 9 {
                tail_e += e;
            }
        }
        if total_e > 0.0 && tail_e > 1e-6 * total_e {
            return Err(numerical(format!(
                "spectral tail holds {:.2e} of the energy; resolution too low",
                tail_e / total_e
            )));
        }
        let mut phys = v.to_vec();
        ifft.process(&mut phys);
        for &gi in &probe_idx {
            let y = phys[gi].re * scale;
            if !y.is_finite() {
                return Err(numerical("KS field became non-finite"));
            }
            values.push(y);
        }
        Ok(())
    };

    for step in 0..=total_inner {
        let in_output = step >= skip_inner && (step - skip_inner) % inner_per_out == 0;
        if in_output {
            record(&v, &mut values)?;
        }
        if step == total_inner {
            break;
        }
        // One exponential RK4-type step.
        let nv = nonlinear(&v, &fft, &ifft);
        let a: Vec<Complex64> = (0..n).map(|q| v[q] * e2[q] + nv[q] * q_c[q]).collect();
        let na = nonlinear(&a, &fft, &ifft);
        let b: Vec<Complex64> = (0..n).map(|q| v[q] * e2[q] + na[q] * q_c[q]).collect();
        let nb = nonlinear(&b, &fft, &ifft);
        let c: Vec<Complex64> = (0..n)
            .map(|q| a[q] * e2[q] + (nb[q] * 2.0 - nv[q]) * q_c[q])
            .collect();
        let nc = nonlinear(&c, &fft, &ifft);
        for q in 0..n {
            v[q] = v[q] * e[q] + nv[q] * f1[q] + (na[q] + nb[q]) * 2.0 * f2[q] + nc[q] * f3[q];
        }
    }
    SignalSeries::new(0.0, h_out, p.probes, values)
}

/// Expands a discrete scalar sequence (one value per input interval `h_u`)
/// onto the half-step storage grid by duplicating every sample, so the
/// driven-phase sampler sees it as a piecewise-constant signal.
pub fn hold_series(u: &[f64], t0: f64, h_u: f64) -> Result<SignalSeries> {
    let mut values = Vec::with_capacity(2 * u.len());
    for &x in u {
        values.push(x);
        values.push(x);
    }
    SignalSeries::new(t0, 0.5 * h_u, 1, values)
}

// ---------------------------------------------------------------------------
// NARMA10

/// NARMA10 recurrence constants (alpha, beta, gamma, delta).
pub const NARMA10: (f64, f64, f64, f64) = (0.3, 0.05, 1.5, 0.1);

/// Driver `u^k` uniform on [-1, 1] and targets from
/// `y^{k+1} = 0.3 y^k + 0.05 y^k sum_{i=0..9} y^{k-i} + 1.5 v^{k-9} v^k + 0.1`
/// with `v = 0.2 (u + 1) / 2` and zero initial history.
pub fn narma10_series(seed: u64, t: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if t <= 10 {
        return Err(invalid("NARMA10 needs more than 10 steps"));
    }
    let mut rng = stream_rng(seed, crate::rng::stream::TASK);
    let u: Vec<f64> = (0..t).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
    narma10_targets(&u).map(|y| (u, y))
}

/// Targets for an externally supplied driver in [-1, 1].
pub fn narma10_targets(u: &[f64]) -> Result<Vec<f64>> {
    let (alpha, beta, gamma, delta) = NARMA10;
    let t = u.len();
    let v: Vec<f64> = u.iter().map(|&x| 0.2 * (x + 1.0) / 2.0).collect();
    let mut y = vec![0.0; t];
    for k in 0..t - 1 {
        let sum10: f64 = (0..10)
            .map(|i| if k >= i { y[k - i] } else { 0.0 })
            .sum();
        let v_old = if k >= 9 { v[k - 9] } else { 0.0 };
        y[k + 1] = alpha * y[k] + beta * y[k] * sum10 + gamma * v_old * v[k] + delta;
        if y[k + 1].abs() > 1.0 {
            return Err(numerical(format!("NARMA10 diverged at step {}", k + 1)));
        }
    }
    Ok(y)
}
