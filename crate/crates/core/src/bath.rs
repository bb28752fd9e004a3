//! Ohmic heat bath, described only through its spectral density
//! `J(Ω) = α Ω exp(-Ω/ω_c)` (ħ² absorbed) and temperature.
//!
//! The master equation needs the half-range Fourier transform of the bath
//! correlation function,
//!
//! ```text
//! Γ(ν) = ∫_0^∞ dτ G(τ) e^{iντ},
//! G(τ) = ∫_0^∞ dΩ J(Ω) [cos(Ωτ) coth(Ω/2T) - i sin(Ωτ)].
//! ```
//!
//! Its real part is `(π/2) J(|ν|) [coth(|ν|/2T) + sign ν]`, in closed form.
//! The imaginary part (Lamb shift) is a principal-value integral and is only
//! computed on request.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::quad::{self, QuadOptions};
use crate::{Error, Result};

/// Below this value of `Ω/2T` the thermal factor uses its Laurent expansion.
pub const COTH_SERIES_THRESHOLD: f64 = 1e-4;

/// Integration ranges are cut where `exp(-Ω/ω_c)` drops below `e^-40`.
const CUTOFF_SPAN: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralDensity {
    pub alpha: f64,
    pub cutoff: f64,
}

impl SpectralDensity {
    pub fn new(alpha: f64, cutoff: f64) -> Self {
        Self { alpha, cutoff }
    }

    /// Pure ohmic density without cutoff.
    pub fn ohmic(alpha: f64) -> Self {
        Self::new(alpha, f64::INFINITY)
    }

    pub fn eval(&self, omega: f64) -> Result<f64> {
        if omega < 0.0 || omega.is_nan() {
            return Err(Error::Domain(format!(
                "spectral density evaluated at negative frequency {omega}"
            )));
        }
        Ok(self.alpha * omega * self.damping(omega))
    }

    /// `exp(-|Ω|/ω_c)`, exactly 1 for an infinite cutoff.
    fn damping(&self, omega: f64) -> f64 {
        (-omega.abs() / self.cutoff).exp()
    }

    fn require_finite_cutoff(&self, what: &str) -> Result<()> {
        if self.cutoff.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain(format!("{what} requires a finite bath cutoff")))
        }
    }
}

/// `coth(Ω/2T)`; exactly 1 at `T = 0`.
pub fn coth_factor(omega: f64, temperature: f64) -> Result<f64> {
    if temperature < 0.0 || temperature.is_nan() {
        return Err(Error::Domain(format!("negative temperature {temperature}")));
    }
    if temperature == 0.0 {
        return Ok(1.0);
    }
    if !(omega > 0.0) {
        return Err(Error::Domain(format!(
            "coth factor needs a positive frequency at T > 0, got {omega}"
        )));
    }
    let x = omega / (2.0 * temperature);
    Ok(if x < COTH_SERIES_THRESHOLD {
        1.0 / x + x / 3.0
    } else {
        1.0 / x.tanh()
    })
}

/// `|Ω| coth(|Ω|/2T)`, finite (`2T`) at `Ω = 0`.
pub fn omega_coth(omega: f64, temperature: f64) -> f64 {
    let w = omega.abs();
    if temperature == 0.0 {
        return w;
    }
    let x = w / (2.0 * temperature);
    if x < COTH_SERIES_THRESHOLD {
        2.0 * temperature + w * x / 3.0
    } else {
        w / x.tanh()
    }
}

/// `|Ω| coth(|Ω|/2T) + Ω`: twice `Ω (n(Ω) + 1)` with the Bose factor `n`,
/// written with `expm1` so that both signs of `Ω` stay accurate.
fn emission_weight(omega: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        return omega.abs() + omega;
    }
    if omega == 0.0 {
        return 2.0 * temperature;
    }
    let y = omega.abs() / temperature;
    if omega > 0.0 {
        2.0 * omega / -(-y).exp_m1()
    } else {
        2.0 * omega.abs() / y.exp_m1()
    }
}

/// Half-range Fourier transform `Γ(ν)` of the bath correlation function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfFourierGamma {
    pub value: Complex64,
}

impl HalfFourierGamma {
    pub fn rate(&self) -> f64 {
        self.value.re
    }

    pub fn shift(&self) -> f64 {
        self.value.im
    }
}

/// `Re Γ(ν) = (π/2) J(|ν|) [coth(|ν|/2T) + sign ν]`, with `Re Γ(0) = π α T`.
pub fn gamma_rate(j: &SpectralDensity, temperature: f64, nu: f64) -> f64 {
    0.5 * PI * j.alpha * j.damping(nu) * emission_weight(nu, temperature)
}

pub fn gamma_half_fourier(
    j: &SpectralDensity,
    temperature: f64,
    nu: f64,
    include_lamb: bool,
) -> Result<HalfFourierGamma> {
    if temperature < 0.0 || temperature.is_nan() || nu.is_nan() {
        return Err(Error::Domain(format!(
            "gamma_half_fourier at T = {temperature}, ν = {nu}"
        )));
    }
    let re = gamma_rate(j, temperature, nu);
    let im = if include_lamb && j.alpha != 0.0 {
        lamb_shift(j, temperature, nu)?
    } else {
        0.0
    };
    Ok(HalfFourierGamma {
        value: Complex64::new(re, im),
    })
}

/// `Im Γ(ν) = (1/π) P∫ dΩ Re Γ(Ω) / (ν - Ω)` (Kramers-Kronig).
///
/// The singular window `[ν - h, ν + h]` is folded onto
/// `∫_0^h [f(ν-u) - f(ν+u)]/u du`, which is regular.
pub fn lamb_shift(j: &SpectralDensity, temperature: f64, nu: f64) -> Result<f64> {
    j.require_finite_cutoff("the Lamb shift")?;
    let f = |w: f64| gamma_rate(j, temperature, w) / PI;
    let opts = QuadOptions {
        abs_tol: 1e-14 * j.alpha.max(f64::MIN_POSITIVE) * j.cutoff,
        rel_tol: 1e-10,
        max_intervals: 20_000,
    };
    let span = nu.abs() + CUTOFF_SPAN * j.cutoff;
    let h = if nu != 0.0 { nu.abs() } else { j.cutoff };
    let (lo, hi) = (nu - h, nu + h);

    let window = |u: f64| (f(nu - u) - f(nu + u)) / u;
    let (inner, _) = quad::integrate(window, &[0.0, h], &opts)?;

    let outer = |w: f64| f(w) / (nu - w);
    let scales = [1.0, 4.0, 16.0];
    let mut left = vec![-span];
    left.extend(scales.iter().rev().map(|s| lo - s * j.cutoff).filter(|&x| x > -span));
    left.push(lo);
    let mut right = vec![hi];
    right.extend(scales.iter().map(|s| hi + s * j.cutoff).filter(|&x| x < span));
    right.push(span);
    let (l, _) = quad::integrate(outer, &left, &opts)?;
    let (r, _) = quad::integrate(outer, &right, &opts)?;
    Ok(inner + l + r)
}

/// Bath correlation function `G(τ)` by direct quadrature over `Ω`.
///
/// Validation only; the generator uses [`gamma_half_fourier`].
pub fn bath_correlation(j: &SpectralDensity, temperature: f64, tau: f64) -> Result<Complex64> {
    if tau < 0.0 || tau.is_nan() {
        return Err(Error::Domain(format!("bath correlation at negative lag {tau}")));
    }
    if temperature < 0.0 {
        return Err(Error::Domain(format!("negative temperature {temperature}")));
    }
    j.require_finite_cutoff("the bath correlation function")?;
    let upper = CUTOFF_SPAN * j.cutoff;
    let pieces = ((upper * tau / PI).ceil() as usize).clamp(8, 20_000);
    let opts = QuadOptions {
        abs_tol: 1e-12 * j.alpha.max(f64::MIN_POSITIVE) * j.cutoff * (j.cutoff + temperature),
        rel_tol: 1e-11,
        max_intervals: 50_000,
    };
    let r = quad::integrate_complex(
        |w| {
            let (s, c) = (w * tau).sin_cos();
            let damp = j.alpha * j.damping(w);
            Complex64::new(damp * omega_coth(w, temperature) * c, -damp * w * s)
        },
        &quad::uniform_breakpoints(0.0, upper, pieces),
        &opts,
    )?;
    Ok(r.value)
}

/// `Γ(ν)` from the time-domain definition: quadrature of `G(τ) e^{iντ}` over
/// `τ`, with `G` itself from [`bath_correlation`].
///
/// The exponential cutoff has a kink when continued to `Ω < 0`, so `G(τ)`
/// keeps an algebraic tail `a/τ² + i b/τ³` with `a = α (h(0)/ω_c - h'(0))`,
/// `b = -2α/ω_c` and `h(Ω) = Ω coth(Ω/2T)`. The quadrature runs up to `τ_m`
/// and the tail beyond it is added in closed form.
pub fn gamma_by_time_quadrature(j: &SpectralDensity, temperature: f64, nu: f64) -> Result<Complex64> {
    if temperature < 0.0 || nu.is_nan() {
        return Err(Error::Domain(format!("time-domain Γ at T = {temperature}, ν = {nu}")));
    }
    j.require_finite_cutoff("time-domain Γ")?;
    let mut tau_max = (40.0 / j.cutoff).max(if temperature > 0.0 { 6.0 / temperature } else { 0.0 });
    if nu != 0.0 {
        tau_max = tau_max.max(TAIL_PHASE / nu.abs());
    }
    let mut points = vec![0.0];
    let mut t = 0.5 / j.cutoff;
    while t < tau_max {
        points.push(t);
        t *= 2.0;
    }
    points.push(tau_max);
    let oscillations = ((tau_max * nu.abs() / PI).ceil() as usize).max(1);
    let uniform = quad::uniform_breakpoints(0.0, tau_max, oscillations);
    points.extend_from_slice(&uniform[1..uniform.len() - 1]);
    points.sort_by(f64::total_cmp);
    points.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * tau_max);

    let opts = QuadOptions {
        abs_tol: 1e-12 * j.alpha.max(f64::MIN_POSITIVE) * j.cutoff,
        rel_tol: 1e-9,
        max_intervals: 5_000,
    };
    let mut failure = None;
    let body = quad::integrate_complex(
        |tau| match bath_correlation(j, temperature, tau) {
            Ok(g) => g * Complex64::new(0.0, nu * tau).exp(),
            Err(e) => {
                failure.get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        },
        &points,
        &opts,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }

    let (h0, h1) = if temperature > 0.0 { (2.0 * temperature, 0.0) } else { (0.0, 1.0) };
    let a = j.alpha * (h0 / j.cutoff - h1);
    let b = -2.0 * j.alpha / j.cutoff;
    let tail = power_tail(nu, tau_max, 2) * a + power_tail(nu, tau_max, 3) * Complex64::new(0.0, b);
    Ok(body.value + tail)
}

/// `|ν| τ_m` at which the oscillatory tail series is used.
const TAIL_PHASE: f64 = 20.0;

/// `∫_{τ_m}^∞ e^{iντ} τ^{-n} dτ`: exact for `ν = 0`, otherwise the
/// integration-by-parts series in `1/(ν τ_m)`.
fn power_tail(nu: f64, tau_m: f64, n: i32) -> Complex64 {
    if nu == 0.0 {
        return Complex64::from(tau_m.powi(1 - n) / f64::from(n - 1));
    }
    let inv = Complex64::new(0.0, nu).inv();
    let mut term = -Complex64::new(0.0, nu * tau_m).exp() * inv * tau_m.powi(-n);
    let mut sum = term;
    for k in 0..12 {
        term *= inv * f64::from(n + k) / tau_m;
        sum += term;
    }
    sum
}
