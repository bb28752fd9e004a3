//! Time propagation of the rotating-frame master equation and analysis of the
//! resulting current: DC and `2ω` components, relaxation times.
//!
//! Trajectories are sampled on a uniform grid with an integer number of
//! samples per drive period (at least 40, and at least 40 per precession
//! period `2π/ω'`), so period averages are plain sample means.

mod rk;

use std::f64::consts::TAU;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::model::EffectiveField;
use crate::redfield::DissipativeGenerator;
use crate::{BlochState, CurrentScale, Error, Result};

use rk::{dopri_step, rk4_step, V3};

const MIN_SAMPLES_PER_PERIOD: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Classical fixed-step RK4. Steps are shortened to divide the sampling
    /// interval evenly.
    ///
    /// Both methods integrate in the interaction picture of the precession
    /// about `n`, which is applied exactly; without dissipation `|r|` is then
    /// conserved to rounding.
    Rk4 { dt: f64 },
    /// Dormand-Prince 5(4) with absolute local error control.
    Rk45 { tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagateOptions {
    pub scale: CurrentScale,
    /// Largest tolerated `|r| - 1` before the run is aborted. The full
    /// generator is not completely positive and overshoots by about `α` when
    /// started from a pure state.
    pub positivity_tol: f64,
    /// Samples are recorded from this time on; earlier times are integrated
    /// but not stored.
    pub record_from: f64,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        Self {
            scale: CurrentScale::default(),
            positivity_tol: 5e-2,
            record_from: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<BlochState>,
    pub currents: Vec<f64>,
    /// Largest `|r| - 1` met at any integration step.
    pub max_norm_excess: f64,
    /// Drive period, or the precession period without drive.
    pub period: f64,
    pub samples_per_period: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> Option<&BlochState> {
        self.states.last()
    }
}

/// `(period, samples per period)` for a generator.
pub fn sampling(gen: &DissipativeGenerator) -> (f64, usize) {
    let wp = gen.field.omega_prime;
    if gen.omega == 0.0 {
        (TAU / wp, MIN_SAMPLES_PER_PERIOD)
    } else {
        let w = gen.omega.abs();
        let n = (MIN_SAMPLES_PER_PERIOD as f64 * wp / w).ceil() as usize;
        (TAU / w, n.max(MIN_SAMPLES_PER_PERIOD))
    }
}

/// Integrates from `r0` at `t = 0` and samples `[record_from, t_end]`. The
/// last sample is the last grid point not after `t_end`.
pub fn propagate(
    r0: &BlochState,
    gen: &DissipativeGenerator,
    t_end: f64,
    method: Method,
    opts: &PropagateOptions,
) -> Result<Trajectory> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Precondition(format!("t_end must be positive, got {t_end}")));
    }
    if !(opts.record_from >= 0.0 && opts.record_from <= t_end) {
        return Err(Error::Precondition(format!(
            "record_from = {} outside [0, {t_end}]",
            opts.record_from
        )));
    }
    let (period, per_period) = sampling(gen);
    let h_sample = period / per_period as f64;
    let n_samples = ((t_end - opts.record_from) / h_sample * (1.0 + 1e-12)).floor() as usize + 1;

    let frame = Precession::new(&gen.field);
    let a = gen.a_matrix;
    let b = gen.b_vector;
    let harmonics = &gen.harmonics;
    let omega = gen.omega;
    // Interaction picture with respect to the precession: r = R(t) s.
    let f = |t: f64, s: &V3| -> V3 {
        let rot = frame.rotation(t);
        let r = rot * s;
        let mut out = a * r + b;
        if !harmonics.is_empty() {
            let rc = r.map(Complex64::from);
            let mut osc = Vector3::<Complex64>::zeros();
            for h in harmonics {
                osc += (h.a * rc + h.b) * Complex64::from_polar(1.0, h.order as f64 * omega * t);
            }
            out += osc.map(|z| z.re);
        }
        rot.transpose() * out
    };

    let mut stepper = Stepper::new(method, gen, h_sample, r0.0, &f)?;
    let mut traj = Trajectory {
        times: Vec::with_capacity(n_samples),
        states: Vec::with_capacity(n_samples),
        currents: Vec::with_capacity(n_samples),
        max_norm_excess: r0.norm() - 1.0,
        period,
        samples_per_period: per_period,
    };
    for k in 0..n_samples {
        let target = opts.record_from + k as f64 * h_sample;
        stepper
            .advance_to(target, &f, opts.positivity_tol, &mut traj.max_norm_excess)
            .map_err(|e| frame.to_rotating(e))?;
        let state = BlochState(frame.rotation(target) * stepper.y);
        traj.times.push(target);
        traj.currents.push(opts.scale.i0 * state.y());
        traj.states.push(state);
    }
    Ok(traj)
}

/// Free precession `R(t) = exp(ω' t [n×])`, by Rodrigues' formula.
struct Precession {
    omega_prime: f64,
    cross: Matrix3<f64>,
    cross2: Matrix3<f64>,
}

impl Precession {
    fn new(field: &EffectiveField) -> Self {
        let cross = field.axis.cross_matrix();
        Self {
            omega_prime: field.omega_prime,
            cross,
            cross2: cross * cross,
        }
    }

    fn rotation(&self, t: f64) -> Matrix3<f64> {
        let (s, c) = (self.omega_prime * t).sin_cos();
        Matrix3::identity() + self.cross * s + self.cross2 * (1.0 - c)
    }

    /// Maps the interaction-picture state carried by a failure back to the
    /// rotating frame.
    fn to_rotating(&self, e: Error) -> Error {
        match e {
            Error::StepSizeUnderflow { time, last_state } => Error::StepSizeUnderflow {
                time,
                last_state: BlochState(self.rotation(time) * last_state.0),
            },
            Error::PositivityBreach {
                time,
                excess,
                last_state,
            } => Error::PositivityBreach {
                time,
                excess,
                last_state: BlochState(self.rotation(time) * last_state.0),
            },
            e => e,
        }
    }
}

struct Stepper {
    method: Method,
    t: f64,
    y: V3,
    // RK4: nominal step. RK45: current step proposal.
    h: f64,
    k: V3,
}

impl Stepper {
    fn new<F: Fn(f64, &V3) -> V3>(method: Method, gen: &DissipativeGenerator, h_sample: f64, y: V3, f: &F) -> Result<Self> {
        let h = match method {
            Method::Rk4 { dt } => {
                let limit = TAU / gen.field.omega_prime / 20.0;
                if !(dt > 0.0 && dt <= limit * (1.0 + 1e-12)) {
                    return Err(Error::Precondition(format!(
                        "RK4 step {dt} must lie in (0, {limit}] (a twentieth of the precession period)"
                    )));
                }
                h_sample / (h_sample / dt).ceil()
            }
            Method::Rk45 { tol } => {
                if !(tol > 0.0) {
                    return Err(Error::Precondition(format!("tolerance must be positive, got {tol}")));
                }
                h_sample
            }
        };
        Ok(Self {
            method,
            t: 0.0,
            y,
            h,
            k: f(0.0, &y),
        })
    }

    fn advance_to<F: Fn(f64, &V3) -> V3>(&mut self, target: f64, f: &F, positivity_tol: f64, max_excess: &mut f64) -> Result<()> {
        match self.method {
            Method::Rk4 { .. } => {
                let span = target - self.t;
                if span <= 0.0 {
                    return Ok(());
                }
                let n = (span / self.h * (1.0 - 1e-12)).ceil().max(1.0) as usize;
                let h = span / n as f64;
                let t0 = self.t;
                for j in 0..n {
                    let t = t0 + j as f64 * h;
                    self.y = rk4_step(f, t, &self.y, h);
                    self.t = t + h;
                    check_norm(self.t, &self.y, positivity_tol, max_excess)?;
                }
                self.t = target;
            }
            Method::Rk45 { tol } => {
                while self.t < target {
                    let remaining = target - self.t;
                    let last = self.h >= remaining;
                    let h = if last { remaining } else { self.h };
                    let (y_new, k_new, err) = dopri_step(f, self.t, &self.y, &self.k, h);
                    let factor = if err > 0.0 { 0.9 * (tol / err).powf(0.2) } else { 5.0 };
                    if err.is_finite() && err <= tol && y_new.iter().all(|x| x.is_finite()) {
                        self.t = if last { target } else { self.t + h };
                        self.y = y_new;
                        self.k = k_new;
                        check_norm(self.t, &self.y, positivity_tol, max_excess)?;
                        // A step clipped to land on `target` does not limit the next one.
                        if !last || factor < 1.0 {
                            self.h = h * factor.clamp(0.2, 5.0);
                        }
                    } else {
                        self.h = h * if err.is_finite() { factor.clamp(0.1, 0.9) } else { 0.1 };
                        if self.h < 1e-13 * self.t.abs().max(1.0) {
                            return Err(Error::StepSizeUnderflow {
                                time: self.t,
                                last_state: BlochState(self.y),
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

// Rotations preserve the norm, so the interaction-picture state is checked
// directly.
fn check_norm(t: f64, y: &V3, tol: f64, max_excess: &mut f64) -> Result<()> {
    let excess = y.norm() - 1.0;
    *max_excess = max_excess.max(excess);
    if excess > tol || !excess.is_finite() {
        return Err(Error::PositivityBreach {
            time: t,
            excess,
            last_state: BlochState(*y),
        });
    }
    Ok(())
}

/// DC and second-harmonic content of a periodic current.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicDecomposition {
    /// Period-averaged current.
    pub dc: f64,
    /// Amplitude of the `e^{2iωt}` component, `2|c_2|`.
    pub amp_2w: f64,
    /// RMS of everything except the DC and `2ω` parts.
    pub residual: f64,
}

/// Decomposes the current over the final `n_periods` drive periods of `traj`.
pub fn extract_harmonics(traj: &Trajectory, omega: f64, n_periods: usize) -> Result<HarmonicDecomposition> {
    if n_periods < 5 {
        return Err(Error::Precondition(format!("need at least 5 periods, got {n_periods}")));
    }
    if omega == 0.0 || !omega.is_finite() {
        return Err(Error::Precondition("harmonic extraction needs a drive".into()));
    }
    if traj.len() < 2 {
        return Err(Error::Sampling("trajectory has fewer than two samples".into()));
    }
    let h = traj.times[1] - traj.times[0];
    let per = TAU / omega.abs() / h;
    let per_round = per.round();
    if (per - per_round).abs() > 1e-6 * per || per_round < 16.0 {
        return Err(Error::Sampling(format!(
            "{per:.3} samples per period; need an integer number of at least 16"
        )));
    }
    let count = n_periods * per_round as usize;
    if traj.len() < count {
        return Err(Error::Sampling(format!(
            "trajectory holds {} samples, {count} needed for {n_periods} periods",
            traj.len()
        )));
    }
    let start = traj.len() - count;
    let (times, currents) = (&traj.times[start..], &traj.currents[start..]);
    let inv = 1.0 / count as f64;
    let dc = currents.iter().sum::<f64>() * inv;
    let c2: Complex64 = times
        .iter()
        .zip(currents)
        .map(|(&t, &i)| Complex64::from_polar(i, -2.0 * omega * t))
        .sum::<Complex64>()
        * inv;
    let residual = (times
        .iter()
        .zip(currents)
        .map(|(&t, &i)| {
            let fit = dc + 2.0 * (c2 * Complex64::from_polar(1.0, 2.0 * omega * t)).re;
            (i - fit).powi(2)
        })
        .sum::<f64>()
        * inv)
        .sqrt();
    Ok(HarmonicDecomposition {
        dc,
        amp_2w: 2.0 * c2.norm(),
        residual,
    })
}

/// Mean Bloch vector over the final `n_periods` periods.
pub fn period_average(traj: &Trajectory, n_periods: usize) -> Result<BlochState> {
    let count = n_periods * traj.samples_per_period;
    if count == 0 || traj.len() < count {
        return Err(Error::Sampling(format!("{n_periods} periods requested, trajectory too short")));
    }
    let sum: V3 = traj.states[traj.len() - count..].iter().map(|s| s.0).sum();
    Ok(BlochState(sum / count as f64))
}

/// Output of [`relaxation_time`].
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationFit {
    pub time: f64,
    /// Pearson correlation of `ln |r - r*|` against `t` on the envelope.
    pub correlation: f64,
    /// Set when `|correlation| < 0.98`.
    pub non_exponential: bool,
    /// `(t, |r - r*|)` at the per-period maxima used in the fit.
    pub envelope: Vec<(f64, f64)>,
}

/// Fits `|r(t) - r*|` on its per-period envelope to a single exponential.
pub fn relaxation_time(traj: &Trajectory, steady: &BlochState) -> Result<RelaxationFit> {
    let dist: Vec<f64> = traj.states.iter().map(|s| (s.0 - steady.0).norm()).collect();
    let (d0, d_end) = match (dist.first(), dist.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::Sampling("empty trajectory".into())),
    };
    if !(d_end < 0.01 * d0) {
        return Err(Error::Precondition(format!(
            "trajectory has not relaxed: |r - r*| went from {d0:.3e} to {d_end:.3e}"
        )));
    }
    let floor = (1e-7 * d0).max(1e-10);
    let block = traj.samples_per_period.max(1);
    let envelope: Vec<(f64, f64)> = dist
        .chunks(block)
        .zip(traj.times.chunks(block))
        .filter_map(|(d, t)| {
            let (k, &m) = d.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
            (m > floor).then_some((t[k], m))
        })
        .collect();
    if envelope.len() < 3 {
        return Err(Error::Sampling("fewer than three envelope points above the noise floor".into()));
    }
    let n = envelope.len() as f64;
    let (mt, my) = envelope
        .iter()
        .fold((0.0, 0.0), |(a, b), &(t, d)| (a + t / n, b + d.ln() / n));
    let (mut stt, mut syy, mut sty) = (0.0, 0.0, 0.0);
    for &(t, d) in &envelope {
        let (dt, dy) = (t - mt, d.ln() - my);
        stt += dt * dt;
        syy += dy * dy;
        sty += dt * dy;
    }
    let slope = sty / stt;
    if !(slope < 0.0) {
        return Err(Error::Precondition("no decay towards the steady state".into()));
    }
    let correlation = sty / (stt * syy).sqrt();
    Ok(RelaxationFit {
        time: -1.0 / slope,
        correlation,
        non_exponential: correlation.abs() < 0.98,
        envelope,
    })
}

/// Upper envelope of the current oscillation, sample by sample: the largest
/// `I_0 r_y` reachable by precessing the current state about `n`.
pub fn current_envelope(traj: &Trajectory, field: &EffectiveField, scale: &CurrentScale) -> Vec<f64> {
    let n = field.axis;
    let reach = (1.0 - n.y * n.y).max(0.0).sqrt();
    traj.states
        .iter()
        .map(|s| {
            let par = n.dot(&s.0);
            let perp = (s.0 - n * par).norm();
            scale.i0 * (par * n.y + perp * reach)
        })
        .collect()
}

/// Result of [`run_to_periodic_state`].
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicRun {
    pub harmonics: HarmonicDecomposition,
    pub mean_state: BlochState,
    pub trajectory: Trajectory,
}

/// Propagates from `r0` for `transient`, then records `n_periods` drive
/// periods and decomposes the current over them.
pub fn run_to_periodic_state(
    r0: &BlochState,
    gen: &DissipativeGenerator,
    method: Method,
    transient: f64,
    n_periods: usize,
    opts: &PropagateOptions,
) -> Result<PeriodicRun> {
    if gen.omega == 0.0 {
        return Err(Error::Precondition("periodic analysis needs a drive".into()));
    }
    let (period, _) = sampling(gen);
    let opts = PropagateOptions {
        record_from: transient,
        ..*opts
    };
    let trajectory = propagate(r0, gen, transient + n_periods as f64 * period * (1.0 + 1e-12), method, &opts)?;
    Ok(PeriodicRun {
        harmonics: extract_harmonics(&trajectory, gen.omega, n_periods)?,
        mean_state: period_average(&trajectory, n_periods)?,
        trajectory,
    })
}

/// Default transient window: ten slowest relaxation times.
pub fn default_transient(gen: &DissipativeGenerator) -> Result<f64> {
    Ok(10.0 * gen.slowest_relaxation_time()?)
}
