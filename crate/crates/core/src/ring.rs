//! Three-site ring with cyclically modulated site energies, the microscopic
//! model behind the pseudospin. One particle in three orbitals; no bath.
//!
//! Site energies `ε_i(t) = -Δ cos(ωt + φ_i)` with `φ = (0, -2π/3, 2π/3)` and
//! hopping `-γ_0` between every pair. At `Δ = 0` the symmetric state `|0⟩`
//! sits at `-2γ_0` and the doublet `|x⟩ = (|b⟩ - |c⟩)/√2`,
//! `|y⟩ = (2|a⟩ - |b⟩ - |c⟩)/√6` at `+γ_0`; `|x⟩` is pseudospin up.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use nalgebra::{Matrix2, Matrix3, Matrix3x2, SymmetricEigen, Vector3};
use num_complex::Complex64;

use crate::model::{paulis, sigma_x, sigma_z};
use crate::{Error, Result};

/// Largest tolerated loss of norm before [`propagate_ring`] gives up.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingParams {
    pub gamma0: f64,
    pub delta: f64,
    pub omega: f64,
    pub phases: [f64; 3],
}

impl RingParams {
    pub fn new(gamma0: f64, delta: f64, omega: f64) -> Result<Self> {
        if !(gamma0 > 0.0 && gamma0.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "gamma0",
                value: gamma0,
                reason: "must be positive",
            });
        }
        Ok(Self {
            gamma0,
            delta,
            omega,
            phases: [0.0, -TAU / 3.0, TAU / 3.0],
        })
    }

    pub fn site_energies(&self, t: f64) -> [f64; 3] {
        self.phases.map(|phi| -self.delta * (self.omega * t + phi).cos())
    }
}

/// Amplitudes on sites `(a, b, c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingState(pub Vector3<Complex64>);

impl RingState {
    pub fn symmetric() -> Self {
        Self(symmetric_vector().map(Complex64::from))
    }

    pub fn doublet_x() -> Self {
        Self(x_vector().map(Complex64::from))
    }

    pub fn doublet_y() -> Self {
        Self(y_vector().map(Complex64::from))
    }

    /// `cx |x⟩ + cy |y⟩`.
    pub fn from_doublet(cx: Complex64, cy: Complex64) -> Self {
        Self(Self::doublet_x().0 * cx + Self::doublet_y().0 * cy)
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
}

fn symmetric_vector() -> Vector3<f64> {
    Vector3::repeat(1.0 / 3f64.sqrt())
}

fn x_vector() -> Vector3<f64> {
    Vector3::new(0.0, FRAC_1_SQRT_2, -FRAC_1_SQRT_2)
}

fn y_vector() -> Vector3<f64> {
    Vector3::new(2.0, -1.0, -1.0) / 6f64.sqrt()
}

fn doublet_basis() -> Matrix3x2<f64> {
    Matrix3x2::from_columns(&[x_vector(), y_vector()])
}

pub fn ring_hamiltonian(p: &RingParams, t: f64) -> Matrix3<f64> {
    let mut h = Matrix3::repeat(-p.gamma0);
    for (i, e) in p.site_energies(t).into_iter().enumerate() {
        h[(i, i)] = e;
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubletProjection {
    pub x: Complex64,
    pub y: Complex64,
    /// Weight `|⟨0|s⟩|²` on the symmetric state.
    pub leakage: f64,
}

pub fn project_to_doublet(s: &RingState) -> DoubletProjection {
    let overlap = |v: Vector3<f64>| v.iter().zip(s.0.iter()).map(|(a, b)| b * a).sum::<Complex64>();
    DoubletProjection {
        x: overlap(x_vector()),
        y: overlap(y_vector()),
        leakage: overlap(symmetric_vector()).norm_sqr(),
    }
}

/// Particle current on the `a → b` bond, `-iγ_0 (s_b* s_a - s_a* s_b)`, with
/// unit charge.
pub fn ring_current(s: &RingState, gamma0: f64) -> f64 {
    let z = s.0[1].conj() * s.0[0];
    2.0 * gamma0 * z.im
}

/// Current unit of the pseudospin model, `γ_0/√3`.
pub fn current_unit(gamma0: f64) -> f64 {
    gamma0 / 3f64.sqrt()
}

fn real_to_pauli(m: &nalgebra::Matrix2<f64>) -> Matrix2<Complex64> {
    m.map(Complex64::from)
}

/// Plain projection `P H P - γ_0` onto the doublet. For this drive it is
/// exactly `(Δ/2)[cos ωt σz + sin ωt σx]`: all corrections come from the
/// coupling to the symmetric state, which the projection drops.
pub fn projected_hamiltonian(p: &RingParams, t: f64) -> Matrix2<Complex64> {
    let b = doublet_basis();
    let h = b.transpose() * ring_hamiltonian(p, t) * b - nalgebra::Matrix2::identity() * p.gamma0;
    real_to_pauli(&h)
}

/// Effective doublet Hamiltonian by exact block diagonalization (des
/// Cloizeaux): the two upper eigenvectors of the ring Hamiltonian are mapped
/// onto `{|x⟩, |y⟩}` by the orthogonal polar factor of their overlap, so the
/// result has exactly the doublet eigenvalues (shifted by `-γ_0`). Differs from
/// `(Δ/2)[cos ωt σz + sin ωt σx]` at order `Δ²/γ_0`.
pub fn effective_pseudospin_hamiltonian(p: &RingParams, t: f64) -> Result<Matrix2<Complex64>> {
    if p.delta == 0.0 {
        return Ok(Matrix2::zeros());
    }
    let eig = SymmetricEigen::new(ring_hamiltonian(p, t));
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    if eig.eigenvalues[order[1]] - eig.eigenvalues[order[0]] < 0.5 * p.gamma0 {
        return Err(Error::Domain(format!(
            "doublet not separated from the symmetric level at Δ/γ_0 = {}",
            p.delta / p.gamma0
        )));
    }
    let upper = Matrix3x2::from_columns(&[eig.eigenvectors.column(order[1]).into_owned(), eig.eigenvectors.column(order[2]).into_owned()]);
    let lambda = nalgebra::Matrix2::from_diagonal(&nalgebra::Vector2::new(eig.eigenvalues[order[1]], eig.eigenvalues[order[2]]));
    let overlap = doublet_basis().transpose() * upper;
    let svd = overlap.svd(true, true);
    let (u, v_t) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    let polar = u * v_t;
    let h = polar * lambda * polar.transpose() - nalgebra::Matrix2::identity() * p.gamma0;
    Ok(real_to_pauli(&h))
}

/// `(Δ/2)[cos ωt σz + sin ωt σx]` with the ring's drive parameters.
pub fn two_level_hamiltonian(p: &RingParams, t: f64) -> Matrix2<Complex64> {
    let (s, c) = (p.omega * t).sin_cos();
    (sigma_z() * Complex64::from(c) + sigma_x() * Complex64::from(s)) * Complex64::from(0.5 * p.delta)
}

/// Operator (spectral) norm of a 2×2 Hermitian matrix: `|a₀| + |a|` for
/// `a₀ 1 + a·σ`.
pub fn hermitian_norm(m: &Matrix2<Complex64>) -> f64 {
    let a0 = 0.5 * (m[(0, 0)] + m[(1, 1)]).re;
    let a: Vec<f64> = paulis().iter().map(|s| 0.5 * (s * m).trace().re).collect();
    a0.abs() + (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RingTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<RingState>,
    /// Bond current, unit charge.
    pub currents: Vec<f64>,
}

/// Unitary RK4 propagation of the Schrödinger equation, sampling every step.
///
/// Works in the interaction picture of the hopping term, whose propagator is
/// known exactly, so RK4 only handles the site energies. `dt` must resolve
/// both `2π/ω` and `1/γ_0` with 40 steps.
pub fn propagate_ring(s0: &RingState, p: &RingParams, t_end: f64, dt: f64) -> Result<RingTrajectory> {
    let mut limit = 1.0 / p.gamma0;
    if p.omega != 0.0 {
        limit = limit.min(TAU / p.omega.abs());
    }
    limit /= 40.0;
    if !(dt > 0.0 && dt <= limit * (1.0 + 1e-12)) {
        return Err(Error::Precondition(format!("ring step {dt} must lie in (0, {limit}]")));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Precondition(format!("t_end must be positive, got {t_end}")));
    }
    let n0 = s0.norm();
    if (n0 - 1.0).abs() > 1e-12 {
        return Err(Error::Precondition(format!("initial state has norm {n0}")));
    }

    // e^{-i H_hop t} = e^{2iγ_0 t} |0⟩⟨0| + e^{-iγ_0 t} (1 - |0⟩⟨0|).
    let sym = symmetric_vector();
    let p0 = (sym * sym.transpose()).map(Complex64::from);
    let id = Matrix3::<Complex64>::identity();
    let hop = |t: f64| -> Matrix3<Complex64> {
        p0 * Complex64::from_polar(1.0, 2.0 * p.gamma0 * t) + (id - p0) * Complex64::from_polar(1.0, -p.gamma0 * t)
    };
    let f = |t: f64, phi: &Vector3<Complex64>| -> Vector3<Complex64> {
        let u = hop(t);
        let e = p.site_energies(t);
        let psi = u * phi;
        let v_psi = Vector3::new(psi[0] * e[0], psi[1] * e[1], psi[2] * e[2]);
        u.adjoint() * v_psi * Complex64::new(0.0, -1.0)
    };

    let n = (t_end / dt).ceil() as usize;
    let h = t_end / n as f64;
    let mut phi = s0.0;
    let mut out = RingTrajectory {
        times: Vec::with_capacity(n + 1),
        states: Vec::with_capacity(n + 1),
        currents: Vec::with_capacity(n + 1),
    };
    let mut record = |t: f64, phi: &Vector3<Complex64>| {
        let s = RingState(hop(t) * phi);
        out.times.push(t);
        out.currents.push(ring_current(&s, p.gamma0));
        out.states.push(s);
    };
    record(0.0, &phi);
    for k in 0..n {
        let t = k as f64 * h;
        let half = Complex64::from(0.5 * h);
        let k1 = f(t, &phi);
        let k2 = f(t + 0.5 * h, &(phi + k1 * half));
        let k3 = f(t + 0.5 * h, &(phi + k2 * half));
        let k4 = f(t + h, &(phi + k3 * Complex64::from(h)));
        phi += (k1 + (k2 + k3) * Complex64::from(2.0) + k4) * Complex64::from(h / 6.0);
        let drift = (phi.norm() - 1.0).abs();
        if drift > NORM_DRIFT_LIMIT {
            return Err(Error::NormDrift { time: t + h, drift });
        }
        record(t + h, &phi);
    }
    Ok(out)
}
