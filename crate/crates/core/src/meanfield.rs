//! Ott-Antonsen mean-field reduction of the forced system: continuum-limit
//! order-parameter ODEs, locked points of the co-rotating frame, and the
//! training-free ramp-prediction experiment.

use crate::error::{invalid, numerical, Result};

/// Floor below which the 1/r term is treated as leaving the manifold.
pub const R_FLOOR: f64 = 1e-12;

/// Order-parameter state `z = r e^{i psi}` of the continuum limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldState {
    /// Magnitude, in (0, 1].
    pub r: f64,
    /// Mean phase, unwrapped.
    pub psi: f64,
}

impl MeanFieldState {
    pub fn new(r: f64, psi: f64) -> Result<Self> {
        if !(r > 0.0 && r <= 1.0) || !psi.is_finite() {
            return Err(invalid(format!("mean-field state (r = {r}, psi = {psi}) out of range")));
        }
        Ok(Self { r, psi })
    }
}

/// Parameters of the forced continuum system. The frequency half-width is
/// scaled to 1, which fixes the time unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldParams {
    pub k: f64,
    pub f: f64,
    /// Center of the Cauchy frequency distribution.
    pub omega0: f64,
    /// Ramp slope of the input u(t) = c t.
    pub c: f64,
}

impl MeanFieldParams {
    pub fn new(k: f64, f: f64, omega0: f64, c: f64) -> Result<Self> {
        if !(k >= 0.0) || !(f >= 0.0) || !omega0.is_finite() || !c.is_finite() {
            return Err(invalid("mean-field parameters must be finite with K, F >= 0"));
        }
        Ok(Self { k, f, omega0, c })
    }
}

/// Right-hand side of the driven order-parameter equations at input value
/// `u_t`:
///
/// ```text
/// dr   = -r + (K/2) r (1 - r^2) + (F/2)(1 - r^2) cos(psi - u_t)
/// dpsi = omega0 - (F/2)(r + 1/r) sin(psi - u_t)
/// ```
pub fn oa_driven_field(
    state: MeanFieldState,
    params: &MeanFieldParams,
    u_t: f64,
) -> Result<(f64, f64)> {
    let MeanFieldState { r, psi } = state;
    if !(r > R_FLOOR) {
        return Err(numerical(format!("order parameter r = {r} fell below the 1e-12 floor")));
    }
    let phase = psi - u_t;
    let dr = -r + 0.5 * params.k * r * (1.0 - r * r) + 0.5 * params.f * (1.0 - r * r) * phase.cos();
    let dpsi = params.omega0 - 0.5 * params.f * (r + 1.0 / r) * phase.sin();
    Ok((dr, dpsi))
}

/// Fixed point of the co-rotating frame `phi = psi - c t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LockedPoint {
    pub r0: f64,
    /// Locked phase offset, in (-pi, pi].
    pub phi0: f64,
    /// Both eigenvalues of the 2x2 Jacobian have negative real part.
    pub stable: bool,
}

/// Co-rotating-frame field: `dr` as in the driven system with `cos(phi)`,
/// and `dphi = omega0 - c - (F/2)(r + 1/r) sin(phi)`.
fn corotating_field(r: f64, phi: f64, p: &MeanFieldParams) -> (f64, f64) {
    let g1 = -r + 0.5 * p.k * r * (1.0 - r * r) + 0.5 * p.f * (1.0 - r * r) * phi.cos();
    let g2 = p.omega0 - p.c - 0.5 * p.f * (r + 1.0 / r) * phi.sin();
    (g1, g2)
}

fn corotating_jacobian(r: f64, phi: f64, p: &MeanFieldParams) -> [[f64; 2]; 2] {
    let (s, c) = phi.sin_cos();
    [
        [
            -1.0 + 0.5 * p.k * (1.0 - 3.0 * r * r) - p.f * r * c,
            -0.5 * p.f * (1.0 - r * r) * s,
        ],
        [
            -0.5 * p.f * (1.0 - 1.0 / (r * r)) * s,
            -0.5 * p.f * (r + 1.0 / r) * c,
        ],
    ]
}

fn wrap_angle(phi: f64) -> f64 {
    let w = phi.rem_euclid(std::f64::consts::TAU);
    if w > std::f64::consts::PI {
        w - std::f64::consts::TAU
    } else {
        w
    }
}

/// Searches for a locked point of the co-rotating frame by damped Newton from
/// a grid of starting guesses. Prefers stable roots (largest r among them);
/// falls back to an unstable root; `None` if nothing converges with r > 1e-6.
pub fn find_locked_point(params: &MeanFieldParams) -> Option<LockedPoint> {
    let mut roots: Vec<LockedPoint> = Vec::new();
    let phi_starts: Vec<f64> = (0..8)
        .map(|i| -std::f64::consts::PI + std::f64::consts::TAU * (i as f64 + 0.5) / 8.0)
        .collect();
    for ri in 1..=9 {
        let r_start = ri as f64 / 10.0;
        for &phi_start in &phi_starts {
            if let Some(root) = newton_root(r_start, phi_start, params) {
                if !roots
                    .iter()
                    .any(|q| (q.r0 - root.r0).abs() < 1e-7 && wrap_angle(q.phi0 - root.phi0).abs() < 1e-7)
                {
                    roots.push(root);
                }
            }
        }
    }
    roots
        .iter()
        .filter(|p| p.stable)
        .max_by(|a, b| a.r0.total_cmp(&b.r0))
        .or_else(|| roots.iter().max_by(|a, b| a.r0.total_cmp(&b.r0)))
        .copied()
}

fn newton_root(mut r: f64, mut phi: f64, p: &MeanFieldParams) -> Option<LockedPoint> {
    let res_norm = |r: f64, phi: f64| {
        let (g1, g2) = corotating_field(r, phi, p);
        g1.abs().max(g2.abs())
    };
    for _ in 0..100 {
        let (g1, g2) = corotating_field(r, phi, p);
        if g1.abs().max(g2.abs()) <= 1e-13 {
            let j = corotating_jacobian(r, phi, p);
            if !(r > 1e-6 && r <= 1.0 + 1e-9) {
                return None;
            }
            let trace = j[0][0] + j[1][1];
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            return Some(LockedPoint {
                r0: r.min(1.0),
                phi0: wrap_angle(phi),
                stable: trace < 0.0 && det > 0.0,
            });
        }
        let j = corotating_jacobian(r, phi, p);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-14 {
            return None;
        }
        let dr = (g1 * j[1][1] - g2 * j[0][1]) / det;
        let dphi = (g2 * j[0][0] - g1 * j[1][0]) / det;
        // Backtracking line search on the residual.
        let base = res_norm(r, phi);
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let rn = r - lambda * dr;
            let pn = phi - lambda * dphi;
            if rn > 1e-9 && rn <= 1.0 + 1e-6 && res_norm(rn, pn) < base {
                r = rn;
                phi = pn;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    None
}

/// Outcome of the training-free ramp experiment.
#[derive(Debug, Clone)]
pub struct RampPrediction {
    pub locked: LockedPoint,
    /// Times of the test window (starting at the end of the wipe-out).
    pub times: Vec<f64>,
    /// Autonomous prediction `u_hat(t) = psi(t) - phi0`.
    pub prediction: Vec<f64>,
    /// `sup |u_hat(t) - c t|` over the test window.
    pub sup_error: f64,
}

fn step_count(t: f64, h: f64, what: &str) -> Result<usize> {
    if !(h > 0.0) || !(t >= 0.0) {
        return Err(invalid("ramp experiment times and step must be nonnegative"));
    }
    let n = (t / h).round();
    if (n * h - t).abs() > 1e-9 * t.max(1.0) {
        return Err(invalid(format!("{what} = {t} is not a multiple of h = {h}")));
    }
    Ok(n as usize)
}

/// One RK4 step of the order-parameter pair under a time-dependent input.
fn oa_rk4_step(
    state: MeanFieldState,
    params: &MeanFieldParams,
    u: impl Fn(f64) -> f64,
    t: f64,
    h: f64,
) -> Result<MeanFieldState> {
    let eval = |s: MeanFieldState, tt: f64| oa_driven_field(s, params, u(tt));
    let (k1r, k1p) = eval(state, t)?;
    let mid = |dr: f64, dp: f64, w: f64| MeanFieldState {
        r: state.r + w * h * dr,
        psi: state.psi + w * h * dp,
    };
    let (k2r, k2p) = eval(mid(k1r, k1p, 0.5), t + 0.5 * h)?;
    let (k3r, k3p) = eval(mid(k2r, k2p, 0.5), t + 0.5 * h)?;
    let (k4r, k4p) = eval(mid(k3r, k3p, 1.0), t + h)?;
    let r = state.r + h / 6.0 * (k1r + 2.0 * (k2r + k3r) + k4r);
    let psi = state.psi + h / 6.0 * (k1p + 2.0 * (k2p + k3p) + k4p);
    if !(r.is_finite() && psi.is_finite()) {
        return Err(numerical("mean-field integration produced a non-finite state"));
    }
    if r > 1.0 + 1e-6 {
        return Err(numerical(format!("order parameter r = {r} left the unit disk")));
    }
    if !(r > R_FLOOR) {
        return Err(numerical(format!("order parameter r = {r} fell below the 1e-12 floor")));
    }
    Ok(MeanFieldState { r: r.min(1.0), psi })
}

/// Integrates the driven equations with input `u` from `t0` over `steps`
/// steps of size `h`, returning the final state.
pub fn oa_integrate(
    start: MeanFieldState,
    params: &MeanFieldParams,
    u: impl Fn(f64) -> f64,
    t0: f64,
    steps: usize,
    h: f64,
) -> Result<MeanFieldState> {
    let mut state = start;
    for k in 0..steps {
        state = oa_rk4_step(state, params, &u, t0 + h * k as f64, h)?;
    }
    Ok(state)
}

/// Training-free ramp prediction: drive with u(t) = c t for `t_wipe`, then
/// close the loop by feeding back `u_hat = psi - phi0` with the locked offset
/// frozen, and report the sup-norm error against the continued ramp.
///
/// Requires a stable locked point; refuses otherwise.
pub fn oa_predict_ramp(
    params: &MeanFieldParams,
    start: MeanFieldState,
    t_wipe: f64,
    t_test: f64,
    h: f64,
) -> Result<RampPrediction> {
    let locked = find_locked_point(params)
        .filter(|p| p.stable)
        .ok_or_else(|| invalid("no stable locked point at these parameters"))?;
    let n_wipe = step_count(t_wipe, h, "T_wipe")?;
    let n_test = step_count(t_test, h, "T_test")?;

    let c = params.c;
    let mut state = oa_integrate(start, params, |t| c * t, 0.0, n_wipe, h)?;

    // Autonomous phase: u_hat(t) = psi(t) - phi0, so psi - u = phi0 is frozen.
    let phi0 = locked.phi0;
    let mut times = Vec::with_capacity(n_test + 1);
    let mut prediction = Vec::with_capacity(n_test + 1);
    let mut sup_error: f64 = 0.0;
    let mut record = |t: f64, s: &MeanFieldState| {
        let u_hat = s.psi - phi0;
        times.push(t);
        prediction.push(u_hat);
        sup_error = sup_error.max((u_hat - c * t).abs());
    };
    record(t_wipe, &state);
    // With u_hat = psi - phi0 the phase difference psi - u is pinned to phi0
    // at every stage, so the closed loop is the reduced field below.
    let (sp, cp) = phi0.sin_cos();
    let reduced = |s: MeanFieldState| -> Result<(f64, f64)> {
        if !(s.r > R_FLOOR) {
            return Err(numerical("order parameter fell below the 1e-12 floor"));
        }
        let dr = -s.r + 0.5 * params.k * s.r * (1.0 - s.r * s.r)
            + 0.5 * params.f * (1.0 - s.r * s.r) * cp;
        let dpsi = params.omega0 - 0.5 * params.f * (s.r + 1.0 / s.r) * sp;
        Ok((dr, dpsi))
    };
    for k in 0..n_test {
        let t = t_wipe + h * k as f64;
        let (k1r, k1p) = reduced(state)?;
        let mid = |dr: f64, dp: f64, w: f64| MeanFieldState {
            r: state.r + w * h * dr,
            psi: state.psi + w * h * dp,
        };
        let (k2r, k2p) = reduced(mid(k1r, k1p, 0.5))?;
        let (k3r, k3p) = reduced(mid(k2r, k2p, 0.5))?;
        let (k4r, k4p) = reduced(mid(k3r, k3p, 1.0))?;
        let r = state.r + h / 6.0 * (k1r + 2.0 * (k2r + k3r) + k4r);
        let psi = state.psi + h / 6.0 * (k1p + 2.0 * (k2p + k3p) + k4p);
        if !(r.is_finite() && psi.is_finite()) || r > 1.0 + 1e-6 {
            return Err(numerical("closed-loop mean-field integration left the unit disk"));
        }
        state = MeanFieldState { r: r.min(1.0), psi };
        record(t + h, &state);
    }
    Ok(RampPrediction {
        locked,
        times,
        prediction,
        sup_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{sample_frequencies, FrequencyDist};
    use approx::assert_relative_eq;

    const LOCKED: MeanFieldParams = MeanFieldParams {
        k: 1.0,
        f: 6.0,
        omega0: 1.0,
        c: 1.0,
    };

    #[test]
    fn subcritical_unforced_r_always_decays() {
        let p = MeanFieldParams::new(1.0, 0.0, 0.0, 0.0).unwrap();
        for i in 1..100 {
            let r = i as f64 / 100.0;
            let (dr, _) = oa_driven_field(MeanFieldState { r, psi: 0.3 }, &p, 0.0).unwrap();
            assert!(dr < 0.0, "dr = {dr} at r = {r}");
        }
    }

    #[test]
    fn unforced_supercritical_fixed_point_matches_analytic_root() {
        // K = 4: dr = 0 at r* = sqrt(1 - 2/K) = sqrt(0.5).
        let p = MeanFieldParams::new(4.0, 0.0, 0.0, 0.0).unwrap();
        let dr_at = |r: f64| oa_driven_field(MeanFieldState { r, psi: 0.0 }, &p, 0.0).unwrap().0;
        // Bisection root of dr on [0.5, 0.9].
        let (mut lo, mut hi) = (0.5, 0.9);
        assert!(dr_at(lo) > 0.0 && dr_at(hi) < 0.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if dr_at(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        assert_relative_eq!(root, 0.5f64.sqrt(), epsilon = 1e-8);
        // And it is attracting: dr changes sign downward through the root.
        assert!(dr_at(root - 1e-3) > 0.0 && dr_at(root + 1e-3) < 0.0);
    }

    #[test]
    fn boundary_flow_enters_the_disk() {
        for (k, f) in [(0.0, 0.0), (4.0, 10.0), (30.0, 2.0)] {
            let p = MeanFieldParams::new(k, f, 1.0, 1.0).unwrap();
            let (dr, _) = oa_driven_field(MeanFieldState { r: 1.0, psi: 2.0 }, &p, 0.7).unwrap();
            assert_relative_eq!(dr, -1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn r_below_floor_is_a_numerical_error() {
        let p = MeanFieldParams::new(1.0, 1.0, 0.0, 0.0).unwrap();
        let err = oa_driven_field(MeanFieldState { r: 1e-13, psi: 0.0 }, &p, 0.0);
        assert!(matches!(err, Err(crate::error::Error::Numerical(_))));
    }

    #[test]
    fn state_and_param_validation() {
        assert!(MeanFieldState::new(0.0, 0.0).is_err());
        assert!(MeanFieldState::new(1.2, 0.0).is_err());
        assert!(MeanFieldState::new(0.5, f64::NAN).is_err());
        assert!(MeanFieldState::new(1.0, -7.0).is_ok());
        assert!(MeanFieldParams::new(-1.0, 0.0, 0.0, 0.0).is_err());
        assert!(MeanFieldParams::new(1.0, -2.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn entrained_parameters_have_a_stable_locked_point() {
        let locked = find_locked_point(&LOCKED).expect("locked point should exist");
        assert!(locked.stable);
        // c = omega0 puts the root on the sin(phi0) = 0 branch.
        assert!(locked.phi0.abs() < 1e-8, "phi0 = {}", locked.phi0);
        assert!(locked.r0 > 0.8 && locked.r0 < 0.9, "r0 = {}", locked.r0);
        let (g1, g2) = corotating_field(locked.r0, locked.phi0, &LOCKED);
        assert!(g1.abs() <= 1e-10 && g2.abs() <= 1e-10);
    }

    #[test]
    fn subcritical_unforced_system_has_no_locked_point() {
        let p = MeanFieldParams::new(1.5, 0.0, 1.0, 1.0).unwrap();
        assert!(find_locked_point(&p).is_none());
    }

    #[test]
    fn ramp_from_locked_point_is_exact() {
        let locked = find_locked_point(&LOCKED).unwrap();
        let start = MeanFieldState::new(locked.r0, locked.phi0).unwrap();
        let out = oa_predict_ramp(&LOCKED, start, 2.0, 10.0, 0.01).unwrap();
        assert!(out.sup_error <= 1e-8, "sup error = {}", out.sup_error);
        assert_eq!(out.times.len(), out.prediction.len());
        assert_relative_eq!(out.times[0], 2.0);
        assert_relative_eq!(*out.times.last().unwrap(), 12.0, epsilon = 1e-9);
    }

    #[test]
    fn longer_wipe_out_shrinks_the_ramp_error() {
        let start = MeanFieldState::new(0.4, 1.5).unwrap();
        let mut errors = Vec::new();
        for t_wipe in [1.0, 2.0, 4.0, 8.0] {
            let out = oa_predict_ramp(&LOCKED, start, t_wipe, 5.0, 0.01).unwrap();
            errors.push(out.sup_error);
        }
        for w in errors.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-9), "errors not shrinking: {errors:?}");
        }
        assert!(errors.last().unwrap() < &1e-3, "{errors:?}");
    }

    #[test]
    fn ramp_refuses_without_a_stable_lock() {
        let p = MeanFieldParams::new(1.0, 0.0, 1.0, 1.0).unwrap();
        let start = MeanFieldState::new(0.5, 0.0).unwrap();
        assert!(oa_predict_ramp(&p, start, 1.0, 1.0, 0.01).is_err());
    }

    #[test]
    fn finite_ensemble_tracks_the_continuum_limit() {
        // N = 10^4 Cauchy-distributed oscillators, driven by the same ramp,
        // against the OA trajectory from the matching delta initial state.
        let n = 10_000;
        let p = LOCKED;
        let freqs = sample_frequencies(
            FrequencyDist::Cauchy { omega0: p.omega0, delta0: 1.0 },
            n,
            2024,
        )
        .unwrap();
        let h = 0.02;
        let steps = 1000; // 20 time units
        let mut theta = vec![0.0f64; n];
        let mut oa = MeanFieldState::new(1.0, 0.0).unwrap();
        let mut worst = 0.0f64;
        let field = |t: f64, th: &[f64], out: &mut [f64]| {
            let mut r1 = 0.0;
            let mut r2 = 0.0;
            for &x in th {
                let (s, c) = x.sin_cos();
                r1 += s;
                r2 += c;
            }
            let kn = p.k / n as f64;
            let u = p.c * t;
            let (su, cu) = u.sin_cos();
            for i in 0..n {
                let (s, c) = th[i].sin_cos();
                out[i] = freqs.omega[i] + kn * (r1 * c - r2 * s) + p.f * (su * c - cu * s);
            }
        };
        for k in 0..steps {
            let t = h * k as f64;
            theta = crate::integrate::rk4_generic_step(&theta, field, t, h).unwrap();
            oa = oa_rk4_step(oa, &p, |tt| p.c * tt, t, h).unwrap();
            let (mut zs, mut zc) = (0.0, 0.0);
            for &x in &theta {
                let (s, c) = x.sin_cos();
                zs += s;
                zc += c;
            }
            let (zn_re, zn_im) = (zc / n as f64, zs / n as f64);
            let (oa_re, oa_im) = (oa.r * oa.psi.cos(), oa.r * oa.psi.sin());
            let diff = ((zn_re - oa_re).powi(2) + (zn_im - oa_im).powi(2)).sqrt();
            worst = worst.max(diff);
        }
        assert!(worst < 0.05, "sup |z_N - z_OA| = {worst}");
    }
}
