//! Time integration of the coupled `(alpha, h)` system.
//!
//! Two explicit schemes are provided: the Dormand–Prince 5(4) pair with PI
//! step-size control, and classical RK4 on a fixed step. Both produce dense
//! output at the requested sample times by cubic Hermite interpolation
//! between accepted steps.

use crate::error::{Error, Result};
use crate::fem::FemSystem;
use crate::params::DimensionlessParams;

/// A first-order system `y' = f(t, y)`.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Dormand–Prince 5(4) with PI control.
    Adaptive,
    /// Classical RK4 with the given dimensionless step.
    FixedRk4 { step: f64 },
}

/// Tolerances and step controls shared by every run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: Option<f64>,
    pub initial_step: Option<f64>,
    pub method: Method,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_step: None,
            initial_step: None,
            method: Method::Adaptive,
        }
    }
}

impl IntegratorOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::invalid("integrator.tol", "tolerances must be positive"));
        }
        for (name, v) in [
            ("integrator.max_step", self.max_step),
            ("integrator.initial_step", self.initial_step),
        ] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::invalid(name, format!("must be positive, got {v}")));
                }
            }
        }
        if let Method::FixedRk4 { step } = self.method {
            if !(step > 0.0 && step.is_finite()) {
                return Err(Error::invalid("integrator.step", format!("must be positive, got {step}")));
            }
        }
        Ok(())
    }
}

/// Full integrator request in dimensionless time.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub options: IntegratorOptions,
    /// Final time `T*`.
    pub end_time: f64,
    /// Strictly increasing, within `[0, T*]`.
    pub sample_times: Vec<f64>,
}

impl IntegratorConfig {
    pub fn new(options: IntegratorOptions, end_time: f64, sample_times: Vec<f64>) -> Self {
        Self {
            options,
            end_time,
            sample_times,
        }
    }

    /// `count` evenly spaced samples over `[0, end_time]`.
    pub fn uniform(options: IntegratorOptions, end_time: f64, count: usize) -> Self {
        let count = count.max(2);
        let sample_times = (0..count)
            .map(|i| {
                if i + 1 == count {
                    end_time
                } else {
                    end_time * i as f64 / (count - 1) as f64
                }
            })
            .collect();
        Self::new(options, end_time, sample_times)
    }

    pub fn validate(&self, start: f64) -> Result<()> {
        self.options.validate()?;
        if !(self.end_time > start && self.end_time.is_finite()) {
            return Err(Error::invalid(
                "end_time",
                format!("must exceed the start time {start}, got {}", self.end_time),
            ));
        }
        if self.sample_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("sample_times", "must be strictly increasing"));
        }
        if let (Some(first), Some(last)) = (self.sample_times.first(), self.sample_times.last()) {
            if *first < start || *last > self.end_time {
                return Err(Error::invalid(
                    "sample_times",
                    format!("must lie within [{start}, {}]", self.end_time),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    Completed,
    /// The front reached the sample length; integration stopped at `tau`.
    FrontReachedEll { tau: f64 },
}

/// Generic dense-output solution.
#[derive(Debug, Clone)]
pub struct Solution {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub stats: StepStats,
    pub termination: Termination,
}

#[derive(Debug)]
pub struct Failure {
    pub t: f64,
    pub state: Vec<f64>,
    pub reason: String,
}

// Dormand–Prince 5(4) tableau
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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const PI_BETA: f64 = 0.04;
const PI_ALPHA: f64 = 0.2 - 0.75 * PI_BETA;
/// The first step is capped at this fraction of the span to resolve the
/// transient layer near `t = 0`.
const INITIAL_STEP_FRACTION: f64 = 1e-3;
/// Steps below this fraction of the span count as underflow.
const MIN_STEP_FRACTION: f64 = 1e-14;

struct Sampler<'a> {
    targets: &'a [f64],
    next: usize,
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
}

impl<'a> Sampler<'a> {
    fn new(targets: &'a [f64]) -> Self {
        Self {
            targets,
            next: 0,
            times: Vec::with_capacity(targets.len()),
            states: Vec::with_capacity(targets.len()),
        }
    }

    fn record_initial(&mut self, t0: f64, y0: &[f64]) {
        while self.next < self.targets.len() && self.targets[self.next] <= t0 {
            self.times.push(self.targets[self.next]);
            self.states.push(y0.to_vec());
            self.next += 1;
        }
    }

    /// Emit every target in `(t0, t1]` from the cubic Hermite interpolant.
    fn record_step(&mut self, t0: f64, y0: &[f64], f0: &[f64], t1: f64, y1: &[f64], f1: &[f64]) {
        let h = t1 - t0;
        while self.next < self.targets.len() && self.targets[self.next] <= t1 {
            let t = self.targets[self.next];
            let state = if t == t1 {
                y1.to_vec()
            } else {
                let s = (t - t0) / h;
                let s2 = s * s;
                let s3 = s2 * s;
                let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
                let h10 = s3 - 2.0 * s2 + s;
                let h01 = -2.0 * s3 + 3.0 * s2;
                let h11 = s3 - s2;
                (0..y0.len())
                    .map(|i| h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i])
                    .collect()
            };
            self.times.push(t);
            self.states.push(state);
            self.next += 1;
        }
    }
}

fn error_norm(y0: &[f64], y1: &[f64], err: &[f64], rtol: f64, atol: f64) -> f64 {
    let n = y0.len() as f64;
    let sum: f64 = (0..y0.len())
        .map(|i| {
            let sc = atol + rtol * y0[i].abs().max(y1[i].abs());
            let r = err[i] / sc;
            r * r
        })
        .sum();
    (sum / n).sqrt()
}

fn scaled_norm(v: &[f64], y: &[f64], rtol: f64, atol: f64) -> f64 {
    let n = v.len() as f64;
    let sum: f64 = v
        .iter()
        .zip(y)
        .map(|(vi, yi)| {
            let r = vi / (atol + rtol * yi.abs());
            r * r
        })
        .sum();
    (sum / n).sqrt()
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Integrate `sys` from `(t0, y0)` to `cfg.end_time`.
///
/// `stop` is checked after every accepted step; when it fires the run ends
/// with [`Termination::FrontReachedEll`] and only samples up to the last
/// state that did not trigger it are kept.
pub fn solve<S, F>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    cfg: &IntegratorConfig,
    stop: F,
) -> std::result::Result<Solution, Failure>
where
    S: OdeSystem,
    F: Fn(f64, &[f64]) -> bool,
{
    match cfg.options.method {
        Method::Adaptive => solve_adaptive(sys, t0, y0, cfg, stop),
        Method::FixedRk4 { step } => solve_rk4(sys, t0, y0, cfg, step, stop),
    }
}

fn fail(t: f64, y: &[f64], reason: impl Into<String>) -> Failure {
    Failure {
        t,
        state: y.to_vec(),
        reason: reason.into(),
    }
}

fn reason_of(e: Error) -> String {
    match e {
        Error::Integration { reason, .. } => reason,
        other => other.to_string(),
    }
}

fn initial_step<S: OdeSystem>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    opts: &IntegratorOptions,
    stats: &mut StepStats,
) -> f64 {
    let (rtol, atol) = (opts.rel_tol, opts.abs_tol);
    let d0 = scaled_norm(y0, y0, rtol, atol);
    let d1 = scaled_norm(f0, y0, rtol, atol);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + h0 * f).collect();
    let mut f1 = vec![0.0; y0.len()];
    stats.evaluations += 1;
    if sys.eval(t0 + h0, &y1, &mut f1).is_err() {
        return h0 * 1e-3;
    }
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| (a - b) / h0).collect();
    let d2 = scaled_norm(&diff, y0, rtol, atol);
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 5.0)
    };
    (100.0 * h0).min(h1)
}

fn solve_adaptive<S, F>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    cfg: &IntegratorConfig,
    stop: F,
) -> std::result::Result<Solution, Failure>
where
    S: OdeSystem,
    F: Fn(f64, &[f64]) -> bool,
{
    let n = sys.dim();
    let opts = cfg.options;
    let t_end = cfg.end_time;
    let span = t_end - t0;
    let min_step = MIN_STEP_FRACTION * span;
    let max_step = opts.max_step.unwrap_or(span).min(span);

    let mut stats = StepStats::default();
    let mut sampler = Sampler::new(&cfg.sample_times);
    let mut y = y0.to_vec();
    let mut f = vec![0.0; n];
    stats.evaluations += 1;
    sys.eval(t0, &y, &mut f)
        .map_err(|e| fail(t0, &y, reason_of(e)))?;
    sampler.record_initial(t0, &y);

    let mut h = opts
        .initial_step
        .unwrap_or_else(|| initial_step(sys, t0, &y, &f, &opts, &mut stats))
        .min(INITIAL_STEP_FRACTION * span)
        .min(max_step);

    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut err = vec![0.0; n];

    let mut t = t0;
    let mut err_prev: f64 = 1e-4;
    let mut last_rejected = false;
    let mut termination = Termination::Completed;

    while t < t_end {
        if h < min_step {
            return Err(fail(t, &y, format!("step size underflow (h = {h:e})")));
        }
        let finishing = t + h >= t_end || t_end - (t + h) < min_step;
        if finishing {
            h = t_end - t;
        }

        let mut ok = true;
        let eval = |tt: f64, yy: &[f64], out: &mut [f64], stats: &mut StepStats| {
            stats.evaluations += 1;
            sys.eval(tt, yy, out).is_ok()
        };
        for i in 0..n {
            stage[i] = y[i] + h * A21 * f[i];
        }
        ok = ok && eval(t + C2 * h, &stage, &mut k2, &mut stats);
        for i in 0..n {
            stage[i] = y[i] + h * (A31 * f[i] + A32 * k2[i]);
        }
        ok = ok && eval(t + C3 * h, &stage, &mut k3, &mut stats);
        for i in 0..n {
            stage[i] = y[i] + h * (A41 * f[i] + A42 * k2[i] + A43 * k3[i]);
        }
        ok = ok && eval(t + C4 * h, &stage, &mut k4, &mut stats);
        for i in 0..n {
            stage[i] = y[i] + h * (A51 * f[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        ok = ok && eval(t + C5 * h, &stage, &mut k5, &mut stats);
        for i in 0..n {
            stage[i] =
                y[i] + h * (A61 * f[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        ok = ok && eval(t + h, &stage, &mut k6, &mut stats);
        for i in 0..n {
            y_new[i] =
                y[i] + h * (B1 * f[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        let t_new = if finishing { t_end } else { t + h };
        ok = ok && eval(t_new, &y_new, &mut k7, &mut stats);

        let norm = if ok && all_finite(&y_new) {
            for i in 0..n {
                err[i] = h
                    * (E1 * f[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            }
            error_norm(&y, &y_new, &err, opts.rel_tol, opts.abs_tol)
        } else {
            f64::INFINITY
        };

        if norm <= 1.0 {
            stats.accepted += 1;
            if stop(t_new, &y_new) {
                termination = Termination::FrontReachedEll { tau: t_new };
                break;
            }
            sampler.record_step(t, &y, &f, t_new, &y_new, &k7);
            t = t_new;
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut f, &mut k7);

            let mut fac = SAFETY * norm.max(1e-10).powf(-PI_ALPHA) * err_prev.powf(PI_BETA);
            fac = fac.clamp(FAC_MIN, FAC_MAX);
            if last_rejected {
                fac = fac.min(1.0);
            }
            err_prev = norm.max(1e-4);
            last_rejected = false;
            h = (h * fac).min(max_step);
        } else {
            stats.rejected += 1;
            last_rejected = true;
            let fac = if norm.is_finite() {
                (SAFETY * norm.powf(-0.2)).max(FAC_MIN)
            } else {
                FAC_MIN
            };
            h *= fac;
        }
    }

    Ok(Solution {
        times: sampler.times,
        states: sampler.states,
        stats,
        termination,
    })
}

fn solve_rk4<S, F>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    cfg: &IntegratorConfig,
    step: f64,
    stop: F,
) -> std::result::Result<Solution, Failure>
where
    S: OdeSystem,
    F: Fn(f64, &[f64]) -> bool,
{
    let n = sys.dim();
    let t_end = cfg.end_time;
    let span = t_end - t0;
    let min_step = MIN_STEP_FRACTION * span;
    let mut stats = StepStats::default();
    let mut sampler = Sampler::new(&cfg.sample_times);

    let mut y = y0.to_vec();
    let mut f = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut f_new = vec![0.0; n];

    let check = |r: Result<()>, t: f64, y: &[f64]| r.map_err(|e| fail(t, y, reason_of(e)));
    stats.evaluations += 1;
    check(sys.eval(t0, &y, &mut f), t0, &y)?;
    sampler.record_initial(t0, &y);

    let mut termination = Termination::Completed;
    let mut i: u64 = 0;
    let mut t = t0;
    while t < t_end {
        let mut t_new = t0 + (i + 1) as f64 * step;
        if t_new >= t_end || t_end - t_new < min_step {
            t_new = t_end;
        }
        let h = t_new - t;
        for j in 0..n {
            stage[j] = y[j] + 0.5 * h * f[j];
        }
        check(sys.eval(t + 0.5 * h, &stage, &mut k2), t, &y)?;
        for j in 0..n {
            stage[j] = y[j] + 0.5 * h * k2[j];
        }
        check(sys.eval(t + 0.5 * h, &stage, &mut k3), t, &y)?;
        for j in 0..n {
            stage[j] = y[j] + h * k3[j];
        }
        check(sys.eval(t + h, &stage, &mut k4), t, &y)?;
        for j in 0..n {
            y_new[j] = y[j] + h / 6.0 * (f[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        if !all_finite(&y_new) {
            return Err(fail(t, &y, "state became non-finite"));
        }
        check(sys.eval(t_new, &y_new, &mut f_new), t_new, &y_new)?;
        stats.evaluations += 4;
        stats.accepted += 1;
        if stop(t_new, &y_new) {
            termination = Termination::FrontReachedEll { tau: t_new };
            break;
        }
        sampler.record_step(t, &y, &f, t_new, &y_new, &f_new);
        t = t_new;
        i += 1;
        std::mem::swap(&mut y, &mut y_new);
        std::mem::swap(&mut f, &mut f_new);
    }

    Ok(Solution {
        times: sampler.times,
        states: sampler.states,
        stats,
        termination,
    })
}

/// The front model as an ODE system.
///
/// State layout: `[alpha_0 .. alpha_{N-1}, h, q]`, where `q` accumulates
/// the boundary inflow `∫ Bi (b* - H alpha_0) dtau`.
pub struct FrontOde<'a> {
    pub sys: &'a FemSystem,
    pub params: &'a DimensionlessParams,
}

impl OdeSystem for FrontOde<'_> {
    fn dim(&self) -> usize {
        self.sys.nodes() + 2
    }

    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let n = self.sys.nodes();
        let (alpha, rest) = y.split_at(n);
        let (d_alpha, d_rest) = dy.split_at_mut(n);
        d_rest[0] = self.sys.rhs(self.params, t, alpha, rest[0], d_alpha)?;
        let p = self.params;
        d_rest[1] = p.biot * (p.reservoir(t) - p.henry * alpha[0]);
        Ok(())
    }
}

/// One dense-output sample of the front model.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub tau: f64,
    pub alpha: Vec<f64>,
    pub front: f64,
    /// Cumulative boundary inflow since the start of the run.
    pub inflow: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub stats: StepStats,
    pub termination: Termination,
}

/// State of the front model at a given time, used to restart integration.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontState {
    pub tau: f64,
    pub alpha: Vec<f64>,
    pub front: f64,
}

impl FrontState {
    /// Uniform concentration `m0 / m_ref` behind the initial front `h0`.
    pub fn initial(sys: &FemSystem, params: &DimensionlessParams) -> Self {
        Self {
            tau: 0.0,
            alpha: vec![params.initial_concentration; sys.nodes()],
            front: params.initial_front,
        }
    }
}

impl From<&TrajectorySample> for FrontState {
    fn from(s: &TrajectorySample) -> Self {
        Self {
            tau: s.tau,
            alpha: s.alpha.clone(),
            front: s.front,
        }
    }
}

pub fn integrate(
    sys: &FemSystem,
    params: &DimensionlessParams,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    integrate_from(sys, params, cfg, &FrontState::initial(sys, params))
}

/// Integrate the front model from an arbitrary state.
pub fn integrate_from(
    sys: &FemSystem,
    params: &DimensionlessParams,
    cfg: &IntegratorConfig,
    start: &FrontState,
) -> Result<Trajectory> {
    cfg.validate(start.tau)?;
    let n = sys.nodes();
    if start.alpha.len() != n {
        return Err(Error::invalid(
            "alpha",
            format!("expected {n} nodal values, got {}", start.alpha.len()),
        ));
    }
    let mut y0 = start.alpha.clone();
    y0.push(start.front);
    y0.push(0.0);
    let ode = FrontOde { sys, params };
    let ell = params.max_length;
    let sol = solve(&ode, start.tau, &y0, cfg, |_, y| y[n] >= ell).map_err(|f| {
        Error::Integration {
            tau: f.t,
            front: f.state[n],
            reason: f.reason,
        }
    })?;
    let samples = sol
        .times
        .into_iter()
        .zip(sol.states)
        .map(|(tau, mut y)| {
            let inflow = y[n + 1];
            let front = y[n];
            y.truncate(n);
            TrajectorySample {
                tau,
                alpha: y,
                front,
                inflow,
            }
        })
        .collect();
    Ok(Trajectory {
        samples,
        stats: sol.stats,
        termination: sol.termination,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Decay(f64);

    impl OdeSystem for Decay {
        fn dim(&self) -> usize {
            1
        }
        fn eval(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
            dy[0] = -self.0 * y[0];
            Ok(())
        }
    }

    struct Oscillator;

    impl OdeSystem for Oscillator {
        fn dim(&self) -> usize {
            2
        }
        fn eval(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
            dy[0] = y[1];
            dy[1] = -y[0];
            Ok(())
        }
    }

    #[test]
    fn adaptive_matches_exponential() {
        let opts = IntegratorOptions::default();
        let cfg = IntegratorConfig::uniform(opts, 2.0, 21);
        let sol = solve(&Decay(1.5), 0.0, &[1.0], &cfg, |_, _| false).unwrap();
        assert_eq!(sol.times.len(), 21);
        for (t, y) in sol.times.iter().zip(&sol.states) {
            assert!((y[0] - (-1.5 * t).exp()).abs() < 1e-7, "t = {t}");
        }
        assert_eq!(sol.termination, Termination::Completed);
        assert_eq!(*sol.times.last().unwrap(), 2.0);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let err = |step: f64| {
            let opts = IntegratorOptions {
                method: Method::FixedRk4 { step },
                ..Default::default()
            };
            let cfg = IntegratorConfig::new(opts, 3.0, vec![3.0]);
            let sol = solve(&Oscillator, 0.0, &[1.0, 0.0], &cfg, |_, _| false).unwrap();
            (sol.states[0][0] - 3f64.cos()).hypot(sol.states[0][1] + 3f64.sin())
        };
        let ratio = err(0.1) / err(0.05);
        assert!((ratio - 16.0).abs() < 1.5, "ratio {ratio}");
    }

    #[test]
    fn stop_predicate_truncates_samples() {
        let cfg = IntegratorConfig::uniform(IntegratorOptions::default(), 1.0, 11);
        let sol = solve(&Decay(1.0), 0.0, &[1.0], &cfg, |_, y| y[0] < 0.7).unwrap();
        let Termination::FrontReachedEll { tau } = sol.termination else {
            panic!("expected early stop");
        };
        // y < 0.7 first holds at ln(1/0.7); the stopping step ends at or after it
        assert!(tau >= (1.0f64 / 0.7).ln() && tau < 0.7, "tau = {tau}");
        assert!(sol.states.iter().all(|y| y[0] >= 0.7));
        assert!(*sol.times.last().unwrap() < tau);
    }

    #[test]
    fn rejects_bad_config() {
        let mut cfg = IntegratorConfig::uniform(IntegratorOptions::default(), 1.0, 3);
        cfg.sample_times = vec![0.0, 0.5, 0.5];
        assert!(cfg.validate(0.0).is_err());
        cfg.sample_times = vec![0.0, 1.5];
        assert!(cfg.validate(0.0).is_err());
        let mut opts = IntegratorOptions {
            rel_tol: 0.0,
            ..Default::default()
        };
        assert!(opts.validate().is_err());
        opts = IntegratorOptions {
            method: Method::FixedRk4 { step: -1.0 },
            ..Default::default()
        };
        assert!(opts.validate().is_err());
    }

    struct Blowup;

    impl OdeSystem for Blowup {
        fn dim(&self) -> usize {
            1
        }
        fn eval(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
            dy[0] = y[0] * y[0];
            if dy[0].is_finite() {
                Ok(())
            } else {
                Err(Error::Data("overflow".into()))
            }
        }
    }

    #[test]
    fn finite_time_blowup_fails() {
        // y' = y², y(0) = 1 blows up at t = 1
        let cfg = IntegratorConfig::uniform(IntegratorOptions::default(), 2.0, 3);
        let f = solve(&Blowup, 0.0, &[1.0], &cfg, |_, _| false).unwrap_err();
        assert!(f.t < 1.0 + 1e-6, "{f:?}");
    }
}
