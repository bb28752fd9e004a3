//! Weak-coupling (Born-Markov) master equation in the rotating frame, in Bloch
//! form:
//!
//! ```text
//! dr/dt = ω' n × r + A r + b + Σ_m e^{imωt} (A_m r + b_m)
//! ```
//!
//! Each rotating-frame coupling operator `σ̃^ξ(t)` contains only the drive
//! harmonics `e^{±iωt}`, and `H_eff` has Bohr frequencies `{0, ±ω'}`, so the
//! dissipator carries harmonics `m ∈ {-2, 0, 2}` only. The `m = 0` part is
//! proportional to `α_x + α_z` and the `m = ±2` parts to `α_z - α_x`.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, Vector3};
use num_complex::Complex64;

use crate::bath::{gamma_by_time_quadrature, gamma_half_fourier, SpectralDensity};
use crate::model::{dot_sigma, effective_field, identity, paulis, sigma_x, sigma_z, EffectiveField};
use crate::{BlochState, CurrentScale, Error, Result, SystemParams};

/// Harmonics smaller than this (relative to the static part) are dropped.
const HARMONIC_PRUNE: f64 = 1e-13;

/// Number of even harmonics kept on each side in [`DissipativeGenerator::periodic_steady_state`].
const BALANCE_ORDER: i32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorMode {
    /// Time-independent, secularized with respect to both the drive and the
    /// Bohr frequencies of `H_eff`.
    Secular,
    /// Full Redfield generator with its `e^{±2iωt}` harmonics.
    Full,
}

/// How the half-range Fourier transforms `Γ(ν)` are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaSource {
    Analytic,
    /// Direct quadrature over the correlation function `G(τ)`. Slow; used to
    /// cross-check the analytic path.
    TimeQuadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorOptions {
    pub include_lamb: bool,
    pub gamma_source: GammaSource,
}

impl Default for GeneratorOptions {
    fn default() -> Self {
        Self {
            include_lamb: false,
            gamma_source: GammaSource::Analytic,
        }
    }
}

/// Fourier component `e^{i·order·ωt}(a r + b)` of the dissipator.
#[derive(Debug, Clone, PartialEq)]
pub struct Harmonic {
    pub order: i32,
    pub a: Matrix3<Complex64>,
    pub b: Vector3<Complex64>,
}

/// Bloch-form generator. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct DissipativeGenerator {
    pub field: EffectiveField,
    pub omega: f64,
    pub a_matrix: Matrix3<f64>,
    pub b_vector: Vector3<f64>,
    /// Empty for a symmetric environment and in secular mode.
    pub harmonics: Vec<Harmonic>,
    pub mode: GeneratorMode,
    pub warnings: Vec<String>,
}

/// Relaxation rates of the secular generator in the `|n;±⟩` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecularGenerator {
    /// Population relaxation rate along `n`.
    pub rate_relax: f64,
    /// Decay rate of the components transverse to `n`.
    pub rate_dephase: f64,
    /// Stationary polarization `-n·r*`.
    pub target_polarization: f64,
    /// Transition rate ground → excited.
    pub rate_up: f64,
    /// Transition rate excited → ground.
    pub rate_down: f64,
}

pub fn build_generator(params: &SystemParams, mode: GeneratorMode) -> Result<DissipativeGenerator> {
    build_generator_with(params, mode, &GeneratorOptions::default())
}

pub fn build_generator_with(
    params: &SystemParams,
    mode: GeneratorMode,
    opts: &GeneratorOptions,
) -> Result<DissipativeGenerator> {
    params.validate()?;
    let field = effective_field(params);
    let components = dissipator_harmonics(params, &field, opts)?;

    let mut a_matrix = components[2].0.map(|z| z.re);
    let mut b_vector = components[2].1.map(|z| z.re);
    let scale = a_matrix.amax().max(b_vector.amax());
    let mut harmonics = Vec::new();
    for (order, (a, b)) in [-2, -1, 1, 2].into_iter().zip([0usize, 1, 3, 4].map(|k| components[k])) {
        if a.iter().chain(b.iter()).all(|z| z.norm() <= HARMONIC_PRUNE * scale) {
            continue;
        }
        if params.omega == 0.0 {
            // Without drive every harmonic is static.
            a_matrix += a.map(|z| z.re);
            b_vector += b.map(|z| z.re);
        } else {
            harmonics.push(Harmonic { order, a, b });
        }
    }

    if mode == GeneratorMode::Secular {
        harmonics.clear();
        (a_matrix, b_vector) = secularize(&field, &a_matrix, &b_vector);
    }

    let mut warnings = Vec::new();
    let (_, gap) = crate::model::sideband_frequencies(params.delta, params.omega);
    if params.mean_alpha() * field.omega_prime > 0.1 * gap {
        warnings.push(format!(
            "weak-coupling treatment questionable: α ω' = {:.3e} exceeds 0.1 (ω' - |ω|) = {:.3e}",
            params.mean_alpha() * field.omega_prime,
            0.1 * gap
        ));
    }

    Ok(DissipativeGenerator {
        field,
        omega: params.omega,
        a_matrix,
        b_vector,
        harmonics,
        mode,
        warnings,
    })
}

type Component = (Matrix3<Complex64>, Vector3<Complex64>);

/// Bloch components of the dissipator for harmonics -2..=2 (index m + 2).
fn dissipator_harmonics(params: &SystemParams, field: &EffectiveField, opts: &GeneratorOptions) -> Result<[Component; 5]> {
    let i = Complex64::i();
    let half = Complex64::from(0.5);
    let (sx, sz) = (sigma_x(), sigma_z());
    // σ̃^z(t) = cos ωt σz - sin ωt σx and σ̃^x(t) = cos ωt σx + sin ωt σz,
    // split as Σ_k e^{ikωt} S_k.
    let couplings: [(SpectralDensity, [Matrix2<Complex64>; 2]); 2] = [
        (params.bath_z(), [(sz - sx * i) * half, (sz + sx * i) * half]),
        (params.bath_x(), [(sx + sz * i) * half, (sx - sz * i) * half]),
    ];
    const KS: [i32; 2] = [-1, 1];

    let id = identity();
    let n_sigma = dot_sigma(&field.axis);
    // Eigenprojectors of H_eff with energies ±ω'/2.
    let levels = [(1.0, (id + n_sigma) * half), (-1.0, (id - n_sigma) * half)];

    let mut supers = [[Matrix2::<Complex64>::zeros(); 4]; 5];
    let basis = {
        let [x, y, z] = paulis();
        [id * half, x * half, y * half, z * half]
    };

    for (bath, parts) in &couplings {
        if bath.alpha == 0.0 {
            continue;
        }
        let mut lambdas = [Matrix2::<Complex64>::zeros(); 2];
        for (slot, &k) in KS.iter().enumerate() {
            for &(ea, pa) in &levels {
                for &(eb, pb) in &levels {
                    let nu = 0.5 * field.omega_prime * (eb - ea) - k as f64 * params.omega;
                    let gamma = gamma_value(bath, params.temperature, nu, opts)?;
                    lambdas[slot] += pa * parts[slot] * pb * gamma;
                }
            }
        }
        for (slot, _) in KS.iter().enumerate() {
            let lam = lambdas[slot];
            let lam_dag = lam.adjoint();
            for (slot_p, _) in KS.iter().enumerate() {
                let s = parts[slot_p];
                let (k, kp) = (KS[slot], KS[slot_p]);
                let m_left = (k + kp + 2) as usize;
                let m_right = (kp - k + 2) as usize;
                for (j, rho) in basis.iter().enumerate() {
                    let left = -(s * lam * rho - lam * rho * s);
                    let right = -(rho * lam_dag * s - s * rho * lam_dag);
                    supers[m_left][j] += left;
                    supers[m_right][j] += right;
                }
            }
        }
    }

    let sig = paulis();
    let mut out = [(Matrix3::zeros(), Vector3::zeros()); 5];
    for (m, images) in supers.iter().enumerate() {
        for (row, s) in sig.iter().enumerate() {
            out[m].1[row] = (s * images[0]).trace();
            for col in 0..3 {
                out[m].0[(row, col)] = (s * images[col + 1]).trace();
            }
        }
    }
    Ok(out)
}

fn gamma_value(bath: &SpectralDensity, temperature: f64, nu: f64, opts: &GeneratorOptions) -> Result<Complex64> {
    match opts.gamma_source {
        GammaSource::Analytic => Ok(gamma_half_fourier(bath, temperature, nu, opts.include_lamb)?.value),
        GammaSource::TimeQuadrature => {
            let g = gamma_by_time_quadrature(bath, temperature, nu)?;
            Ok(if opts.include_lamb { g } else { Complex64::from(g.re) })
        }
    }
}

/// Rows: `x̂`, `n × x̂`, `n`.
fn secular_frame(field: &EffectiveField) -> Matrix3<f64> {
    let n = field.axis;
    let e1 = Vector3::x();
    let e2 = n.cross(&e1);
    Matrix3::from_rows(&[e1.transpose(), e2.transpose(), n.transpose()])
}

/// Keeps the parts of a static generator that commute with precession about
/// `n`: the longitudinal rate, the rotation-invariant part of the transverse
/// block, and the longitudinal drift.
fn secularize(field: &EffectiveField, a: &Matrix3<f64>, b: &Vector3<f64>) -> (Matrix3<f64>, Vector3<f64>) {
    let r = secular_frame(field);
    let t = r * a * r.transpose();
    let diag = 0.5 * (t[(0, 0)] + t[(1, 1)]);
    let rot = 0.5 * (t[(1, 0)] - t[(0, 1)]);
    let mut s = Matrix3::zeros();
    s[(0, 0)] = diag;
    s[(1, 1)] = diag;
    s[(1, 0)] = rot;
    s[(0, 1)] = -rot;
    s[(2, 2)] = t[(2, 2)];
    let b_par = field.axis.dot(b);
    (r.transpose() * s * r, field.axis * b_par)
}

/// Steady state of a time-periodic generator, by harmonic balance.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSteadyState {
    /// Period-averaged Bloch vector.
    pub mean: BlochState,
    /// `(p, r_p)` with `r(t) = Σ_p r_p e^{ipωt}`; `p` even, `p ≠ 0`.
    pub harmonics: Vec<(i32, Vector3<Complex64>)>,
}

impl PeriodicSteadyState {
    /// Period-averaged current.
    pub fn dc_current(&self, scale: &CurrentScale) -> f64 {
        scale.i0 * self.mean.y()
    }

    /// Amplitude of the current oscillation at `2ω`.
    pub fn amplitude_2w(&self, scale: &CurrentScale) -> f64 {
        self.harmonics
            .iter()
            .find(|(p, _)| *p == 2)
            .map_or(0.0, |(_, r)| 2.0 * scale.i0 * r.y.norm())
    }
}

impl DissipativeGenerator {
    /// Precession plus static dissipator, `ω'[n×] + A`.
    pub fn static_matrix(&self) -> Matrix3<f64> {
        self.field.precession_matrix() + self.a_matrix
    }

    pub fn rhs(&self, t: f64, r: &Vector3<f64>) -> Vector3<f64> {
        let mut out = self.static_matrix() * r + self.b_vector;
        if !self.harmonics.is_empty() {
            let rc = r.map(Complex64::from);
            let mut osc = Vector3::<Complex64>::zeros();
            for h in &self.harmonics {
                let phase = Complex64::from_polar(1.0, h.order as f64 * self.omega * t);
                osc += (h.a * rc + h.b) * phase;
            }
            out += osc.map(|z| z.re);
        }
        out
    }

    pub fn is_time_independent(&self) -> bool {
        self.harmonics.is_empty()
    }

    /// `1/min(-Re λ)` over the eigenvalues of the static matrix.
    pub fn slowest_relaxation_time(&self) -> Result<f64> {
        let rate = self
            .static_matrix()
            .complex_eigenvalues()
            .iter()
            .map(|l| -l.re)
            .fold(f64::INFINITY, f64::min);
        if rate > 0.0 {
            Ok(1.0 / rate)
        } else {
            Err(Error::NoUniqueSteadyState(format!("slowest relaxation rate is {rate:.3e}")))
        }
    }

    /// Fixed point of a time-independent generator.
    pub fn steady_state(&self) -> Result<BlochState> {
        if !self.harmonics.is_empty() {
            return Err(Error::Precondition(
                "generator has time-periodic harmonics; use periodic_steady_state".into(),
            ));
        }
        if self.a_matrix.iter().all(|&x| x == 0.0) {
            return Err(Error::NoUniqueSteadyState("no dissipation (α = 0)".into()));
        }
        self.static_matrix()
            .lu()
            .solve(&-self.b_vector)
            .map(BlochState)
            .ok_or_else(|| Error::NoUniqueSteadyState("singular generator".into()))
    }

    /// Periodic asymptotic state, solving the harmonic-balance equations
    /// `ipω r_p = M r_p + Σ_m A_m r_{p-m} + b_p` truncated at `|p| ≤ 16`.
    /// Reduces to [`Self::steady_state`] when there are no harmonics.
    pub fn periodic_steady_state(&self) -> Result<PeriodicSteadyState> {
        if self.harmonics.is_empty() {
            return Ok(PeriodicSteadyState {
                mean: self.steady_state()?,
                harmonics: Vec::new(),
            });
        }
        let orders: Vec<i32> = (-BALANCE_ORDER..=BALANCE_ORDER).map(|q| 2 * q).collect();
        let size = 3 * orders.len();
        let mut lhs = DMatrix::<Complex64>::zeros(size, size);
        let mut rhs = DVector::<Complex64>::zeros(size);
        let m = self.static_matrix().map(Complex64::from);
        for (row, &p) in orders.iter().enumerate() {
            let diag = m - Matrix3::identity() * Complex64::new(0.0, p as f64 * self.omega);
            lhs.fixed_view_mut::<3, 3>(3 * row, 3 * row).copy_from(&diag);
            if p == 0 {
                rhs.fixed_rows_mut::<3>(3 * row).copy_from(&(-self.b_vector.map(Complex64::from)));
            }
            for h in &self.harmonics {
                if let Some(col) = orders.iter().position(|&q| q == p - h.order) {
                    let mut block = lhs.fixed_view_mut::<3, 3>(3 * row, 3 * col);
                    block += h.a;
                }
                if p == h.order {
                    let mut seg = rhs.fixed_rows_mut::<3>(3 * row);
                    seg -= h.b;
                }
            }
        }
        let sol = lhs
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::NoUniqueSteadyState("singular harmonic-balance system".into()))?;
        let block = |k: usize| Vector3::new(sol[3 * k], sol[3 * k + 1], sol[3 * k + 2]);
        let zero = BALANCE_ORDER as usize;
        Ok(PeriodicSteadyState {
            mean: BlochState(block(zero).map(|z| z.re)),
            harmonics: orders
                .iter()
                .enumerate()
                .filter(|(_, &p)| p != 0)
                .map(|(k, &p)| (p, block(k)))
                .collect(),
        })
    }

    /// Rates of the secularized static part. For a `Secular` generator this
    /// describes it exactly.
    pub fn secular_rates(&self) -> SecularGenerator {
        let (a, b) = secularize(&self.field, &self.a_matrix, &self.b_vector);
        let r = secular_frame(&self.field);
        let t = r * a * r.transpose();
        let rate_relax = -t[(2, 2)];
        let drift = self.field.axis.dot(&b);
        SecularGenerator {
            rate_relax,
            rate_dephase: -t[(0, 0)],
            target_polarization: -drift / rate_relax,
            rate_up: 0.5 * (rate_relax + drift),
            rate_down: 0.5 * (rate_relax - drift),
        }
    }
}

/// Lowest power of α in the deviation of each Bloch component of the
/// (period-averaged) steady state from its α → 0 limit. The first-order
/// correction is a coherence along x̂ only, so `r_y`, `r_z` and with them
/// the polarization and the current start at α².
pub const STEADY_STATE_LEADING_POWER: [u32; 3] = [1, 2, 2];

/// Result of [`residual_alpha_correction`].
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaExtrapolation {
    /// Bloch vector (period-averaged if time-periodic) extrapolated to α → 0.
    pub state: BlochState,
    pub polarization: f64,
    /// In units of `I_0`.
    pub dc_current: f64,
    /// Difference between the full-order and next-lower-order extrapolants.
    pub error_estimate: f64,
    /// False if the polarization sequence does not approach its limit
    /// monotonically; the raw data are then the safer reading.
    pub monotone: bool,
    /// `(mean α, state)` as computed.
    pub raw: Vec<(f64, BlochState)>,
}

/// Richardson extrapolation of steady states to zero coupling.
///
/// `alphas` are mean couplings `(α_x + α_z)/2`, strictly decreasing and
/// positive; the ratio `α_x : α_z` of `params` is kept (symmetric if both are
/// zero).
pub fn residual_alpha_correction(params: &SystemParams, alphas: &[f64], mode: GeneratorMode) -> Result<AlphaExtrapolation> {
    if alphas.len() < 3 {
        return Err(Error::Precondition(format!(
            "α extrapolation needs at least 3 couplings, got {}",
            alphas.len()
        )));
    }
    if alphas.iter().any(|&a| !(a > 0.0)) || alphas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Precondition("couplings must be positive and strictly decreasing".into()));
    }
    let mean = params.mean_alpha();
    let (wx, wz) = if mean > 0.0 {
        (params.alpha_x / mean, params.alpha_z / mean)
    } else {
        (1.0, 1.0)
    };
    let raw = alphas
        .iter()
        .map(|&a| {
            let gen = build_generator(&params.with_couplings(a * wx, a * wz), mode)?;
            Ok((a, gen.periodic_steady_state()?.mean))
        })
        .collect::<Result<Vec<_>>>()?;

    let xs: Vec<f64> = raw.iter().map(|(a, _)| *a).collect();
    let mut state = Vector3::zeros();
    let mut lower = Vector3::zeros();
    for c in 0..3 {
        let ys: Vec<f64> = raw.iter().map(|(_, s)| s.0[c]).collect();
        let power = STEADY_STATE_LEADING_POWER[c];
        state[c] = extrapolate_to_zero(&xs, &ys, power);
        lower[c] = extrapolate_to_zero(&xs[1..], &ys[1..], power);
    }
    let field = effective_field(params);
    let state = BlochState(state);
    let polarization = state.polarization(&field);
    let pols: Vec<f64> = raw.iter().map(|(_, s)| s.polarization(&field)).collect();
    let steps: Vec<f64> = std::iter::once(polarization)
        .chain(pols.iter().rev().copied())
        .collect::<Vec<_>>()
        .windows(2)
        .map(|w| w[1] - w[0])
        .collect();
    let monotone = steps.iter().all(|&d| d >= 0.0) || steps.iter().all(|&d| d <= 0.0);
    Ok(AlphaExtrapolation {
        state,
        polarization,
        dc_current: state.y(),
        error_estimate: (state.0 - lower).norm(),
        monotone,
        raw,
    })
}

/// Value at `x = 0` of `c_0 + c_p x^p + c_{p+1} x^{p+1} + …` fitted exactly
/// through `(xs, ys)`, with `p = leading_power`.
pub fn extrapolate_to_zero(xs: &[f64], ys: &[f64], leading_power: u32) -> f64 {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2 && leading_power >= 1);
    let n = xs.len();
    let scale = xs.iter().fold(0f64, |a, x| a.max(x.abs()));
    let m = DMatrix::from_fn(n, n, |i, j| {
        if j == 0 {
            1.0
        } else {
            (xs[i] / scale).powi((leading_power as usize + j - 1) as i32)
        }
    });
    let c = m.lu().solve(&DVector::from_column_slice(ys)).expect("abscissae must be distinct");
    c[0]
}
