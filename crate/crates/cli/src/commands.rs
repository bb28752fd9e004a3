//! Subcommand bodies. Each returns a [`Table`]; grid points run on the
//! current rayon pool and are collected in grid order.

use std::f64::consts::TAU;

use rayon::prelude::*;

use qpump::analytic::{self, optimal_frequency, OptimumSearch};
use qpump::bath::{gamma_rate, SpectralDensity};
use qpump::dynamics::{propagate, Method, PropagateOptions};
use qpump::redfield::{build_generator, residual_alpha_correction, GeneratorMode};
use qpump::ring::{self, RingParams};
use qpump::units::{physical_units, PhysicalUnits, UnitsReport};
use qpump::{BlochState, CurrentScale, SystemParams};

use crate::config::{Config, Engine, Grid};
use crate::table::{Cell, Row, Status, Table};
use crate::CliError;

/// Temperatures of the frequency sweep when `temperatures` is unset.
pub const DEFAULT_SWEEP_TEMPERATURES: [f64; 4] = [0.1, 0.3, 1.0, 3.0];
pub const DEFAULT_TRANSIENT_TEMPERATURES: [f64; 2] = [0.1, 1.0];
pub const DEFAULT_TRANSIENT_ALPHAS: [f64; 2] = [0.0, 0.005];
pub const DEFAULT_GAMMA0_MEV: f64 = 0.05;

const NATURAL_UNITS: &str =
    "hbar = k_B = 1; frequencies and temperatures in the units of delta (delta = 1 unless set); time in the inverse unit; current in I_0; pumped_charge in I_0 per frequency unit";

fn base_params(cfg: &Config) -> SystemParams {
    SystemParams::new(cfg.delta, cfg.omega, cfg.temperature)
        .with_couplings(cfg.alpha_x, cfg.alpha_z)
        .with_cutoff(cfg.cutoff)
}

fn units_lines(cfg: &Config) -> Vec<String> {
    let mut lines = vec![NATURAL_UNITS.to_string()];
    if let Some(g) = cfg.gamma0_mev {
        if let Ok(u) = PhysicalUnits::new(g) {
            lines.push(physical_line(&physical_units(&u), g));
        }
    }
    lines
}

fn physical_line(r: &UnitsReport, gamma0_mev: f64) -> String {
    format!(
        "gamma0 = {gamma0_mev} meV; I_0 = {:.4} nA; delta = {:.4}e9 rad/s ({:.4} GHz as delta/2pi); temperature bound {:.4} K",
        r.i0_na, r.delta_grad_s, r.delta_ghz, r.temperature_bound_k
    )
}

/// Steady-state `(current, polarization, 2ω amplitude)` with the chosen engine.
fn steady_point(p: &SystemParams, engine: Engine) -> qpump::Result<[f64; 3]> {
    p.validate()?;
    match engine {
        Engine::Analytic => Ok([analytic::dc_current(p)?, analytic::polarization(p)?, 0.0]),
        Engine::Secular => {
            let g = build_generator(p, GeneratorMode::Secular)?;
            let r = g.steady_state()?;
            Ok([r.y(), r.polarization(&g.field), 0.0])
        }
        Engine::Full => {
            let g = build_generator(p, GeneratorMode::Full)?;
            let ps = g.periodic_steady_state()?;
            let scale = CurrentScale::default();
            Ok([ps.dc_current(&scale), ps.mean.polarization(&g.field), ps.amplitude_2w(&scale)])
        }
    }
}

pub fn sweep_frequency(cfg: &Config) -> Result<Table, CliError> {
    let engine = cfg.engine.unwrap_or(Engine::Analytic);
    let grid = cfg.grid.clone().unwrap_or(Grid::Log { lo: 0.1, hi: 100.0, n: 61 });
    let temps = cfg.temperatures.clone().unwrap_or(DEFAULT_SWEEP_TEMPERATURES.to_vec());
    let base = base_params(cfg);
    let points: Vec<(f64, f64)> = temps
        .iter()
        .flat_map(|&t| grid.points().into_iter().map(move |w| (t, w)))
        .collect();
    let columns = vec!["temperature", "omega", "current", "polarization", "pumped_charge", "amp_2w"];
    let rows = points
        .par_iter()
        .map(|&(t, w)| match steady_point(&base.with_temperature(t).with_omega(w), engine) {
            Ok([i, pol, amp]) => {
                let q = if w != 0.0 { TAU * i / w } else { f64::NAN };
                Row::ok(&[t, w, i, pol, q, amp])
            }
            Err(e) => Row::failed(&[t, w], columns.len(), e.to_string()),
        })
        .collect();
    Ok(Table {
        command: "sweep-frequency",
        engine: engine.to_string(),
        config_echo: cfg.echo(),
        units: units_lines(cfg),
        columns,
        rows,
    })
}

pub fn sweep_temperature(cfg: &Config) -> Result<Table, CliError> {
    let engine = cfg.engine.unwrap_or(Engine::Analytic);
    let grid = cfg.grid.clone().unwrap_or(Grid::Log { lo: 0.01, hi: 10.0, n: 61 });
    let points = grid.points();
    if points[0] < 0.0 {
        return Err(CliError::Config("temperature grid must be non-negative".into()));
    }
    let base = base_params(cfg);
    let columns = vec!["temperature", "omega", "current", "polarization", "amp_2w"];
    let rows = points
        .par_iter()
        .map(|&t| match steady_point(&base.with_temperature(t), engine) {
            Ok([i, pol, amp]) => Row::ok(&[t, cfg.omega, i, pol, amp]),
            Err(e) => Row::failed(&[t, cfg.omega], columns.len(), e.to_string()),
        })
        .collect();
    Ok(Table {
        command: "sweep-temperature",
        engine: engine.to_string(),
        config_echo: cfg.echo(),
        units: units_lines(cfg),
        columns,
        rows,
    })
}

/// Relaxation from `|z,-⟩`, one block of rows per `(temperature, alpha)` run.
/// `alphas` are symmetric couplings.
pub fn transient(cfg: &Config) -> Result<Table, CliError> {
    let engine = cfg.engine.unwrap_or(Engine::Full);
    let mode = match engine {
        Engine::Secular => GeneratorMode::Secular,
        Engine::Full => GeneratorMode::Full,
        Engine::Analytic => {
            return Err(CliError::Config("transient needs engine=secular or engine=full".into()));
        }
    };
    if cfg.grid.is_some() {
        return Err(CliError::Config(
            "transient samples on the propagator grid; set t_end instead of grid".into(),
        ));
    }
    let temps = cfg.temperatures.clone().unwrap_or(DEFAULT_TRANSIENT_TEMPERATURES.to_vec());
    let alphas = cfg.alphas.clone().unwrap_or(DEFAULT_TRANSIENT_ALPHAS.to_vec());
    let runs: Vec<(f64, f64)> = temps.iter().flat_map(|&t| alphas.iter().map(move |&a| (t, a))).collect();
    let base = base_params(cfg);
    let columns = vec!["temperature", "alpha", "time", "current", "polarization"];
    let width = columns.len();
    let blocks: Vec<Vec<Row>> = runs
        .par_iter()
        .map(|&(t, a)| {
            let p = base.with_temperature(t).with_alpha(a);
            let run = p.validate().and_then(|_| {
                let g = build_generator(&p, mode)?;
                let traj = propagate(&BlochState::spin_down(), &g, cfg.t_end, Method::Rk45 { tol: cfg.tol }, &PropagateOptions::default())?;
                Ok((g, traj))
            });
            match run {
                Ok((g, traj)) => traj
                    .times
                    .iter()
                    .zip(&traj.states)
                    .zip(&traj.currents)
                    .map(|((&time, s), &i)| Row::ok(&[t, a, time, i, s.polarization(&g.field)]))
                    .collect(),
                Err(e) => vec![Row::failed(&[t, a], width, e.to_string())],
            }
        })
        .collect();
    Ok(Table {
        command: "transient",
        engine: engine.to_string(),
        config_echo: cfg.echo(),
        units: units_lines(cfg),
        columns,
        rows: blocks.into_iter().flatten().collect(),
    })
}

/// Current-maximizing drive frequency from the closed form. A `log` grid
/// sets the search window (in units of Δ) and its scan resolution.
pub fn optimum(cfg: &Config) -> Result<Table, CliError> {
    if matches!(cfg.engine, Some(e) if e != Engine::Analytic) {
        return Err(CliError::Config("optimum uses the analytic engine only".into()));
    }
    let search = match cfg.grid {
        None => OptimumSearch::default(),
        Some(Grid::Log { lo, hi, n }) => OptimumSearch {
            omega_min: lo,
            omega_max: hi,
            grid_points: n.max(3),
            ..OptimumSearch::default()
        },
        Some(_) => return Err(CliError::Config("optimum needs a log grid for its search window".into())),
    };
    let temps = cfg.temperatures.clone().unwrap_or(vec![cfg.temperature]);
    let report = cfg.gamma0_mev.map(|g| physical_units(&PhysicalUnits::new(g).expect("validated")));
    let mut columns = vec!["temperature", "omega_star", "current"];
    if report.is_some() {
        columns.extend(["omega_star_grad_s", "current_na"]);
    }
    let width = columns.len();
    let rows = temps
        .par_iter()
        .map(|&t| match optimal_frequency(cfg.delta, t, cfg.cutoff, &search) {
            Ok(o) => {
                let mut v = vec![t, o.omega, o.current];
                if let Some(r) = &report {
                    v.extend([r.delta_grad_s * o.omega / cfg.delta, r.i0_na * o.current]);
                }
                let mut row = Row::ok(&v);
                if o.at_boundary {
                    row.status = Status::Boundary;
                }
                row
            }
            Err(e) => Row::failed(&[t], width, e.to_string()),
        })
        .collect();
    Ok(Table {
        command: "optimum",
        engine: Engine::Analytic.to_string(),
        config_echo: cfg.echo(),
        units: units_lines(cfg),
        columns,
        rows,
    })
}

pub fn units(cfg: &Config) -> Result<Table, CliError> {
    let g = cfg.gamma0_mev.unwrap_or(DEFAULT_GAMMA0_MEV);
    let r = physical_units(&PhysicalUnits::new(g).map_err(|e| CliError::Config(e.to_string()))?);
    let row = |name: &str, value: f64, unit: &str| Row {
        cells: vec![Cell::Text(name.into()), Cell::Num(value), Cell::Text(unit.into())],
        status: Status::Ok,
    };
    Ok(Table {
        command: "units",
        engine: Engine::Analytic.to_string(),
        config_echo: cfg.echo(),
        units: vec![physical_line(&r, g)],
        columns: vec!["quantity", "value", "unit"],
        rows: vec![
            row("gamma0", g, "meV"),
            row("i0", r.i0_na, "nA"),
            row("delta", r.delta_grad_s, "1e9 rad/s"),
            row("delta_over_2pi", r.delta_ghz, "GHz"),
            row("temperature_bound", r.temperature_bound_k, "K"),
        ],
    })
}

struct Check {
    name: &'static str,
    tolerance: f64,
    run: fn() -> qpump::Result<f64>,
}

fn max_over<I: IntoIterator<Item = qpump::Result<f64>>>(it: I) -> qpump::Result<f64> {
    it.into_iter().try_fold(0f64, |m, x| Ok(m.max(x?)))
}

const CHECKS: [Check; 8] = [
    Check {
        name: "secular_vs_closed_form",
        tolerance: 5e-3,
        run: || {
            max_over([0.0, 0.1, 1.0, 10.0].iter().flat_map(|&t| {
                [0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 30.0].map(move |w| {
                    let p = SystemParams::new(1.0, w, t).with_alpha(1e-3);
                    Ok((steady_point(&p, Engine::Secular)?[0] - analytic::dc_current(&p)?).abs())
                })
            }))
        },
    },
    Check {
        name: "full_extrapolated_vs_closed_form",
        tolerance: 1e-4,
        run: || {
            max_over([(0.3, 0.1), (1.0, 1.0), (2.0, 0.1), (5.0, 10.0)].map(|(w, t)| {
                let p = SystemParams::new(1.0, w, t);
                let ex = residual_alpha_correction(&p, &[4e-3, 2e-3, 1e-3], GeneratorMode::Full)?;
                Ok((ex.dc_current - analytic::dc_current(&p)?).abs())
            }))
        },
    },
    Check {
        name: "adiabatic_limit",
        tolerance: 1e-3,
        run: || {
            max_over([0.1, 1.0, 10.0].map(|t| {
                let p = SystemParams::new(1.0, 0.01, t).with_cutoff(f64::INFINITY);
                Ok((analytic::polarization(&p)? - analytic::limit_adiabatic(&p)).abs())
            }))
        },
    },
    Check {
        name: "antiadiabatic_limit",
        tolerance: 1e-3,
        run: || {
            max_over([0.1, 1.0, 10.0].map(|t| {
                let p = SystemParams::new(1.0, 100.0, t).with_cutoff(f64::INFINITY);
                Ok((analytic::polarization(&p)? - analytic::limit_antiadiabatic(&p)).abs())
            }))
        },
    },
    Check {
        name: "geometric_pumped_charge",
        tolerance: 1e-3,
        run: || Ok((analytic::pumped_charge(&SystemParams::new(1.0, 0.01, 0.0))? / TAU - 1.0).abs()),
    },
    Check {
        name: "detailed_balance",
        tolerance: 1e-10,
        run: || {
            let j = SpectralDensity::new(0.01, 50.0);
            max_over([0.05, 0.3, 1.0, 7.0].iter().flat_map(|&t| {
                [1e-3, 0.1, 1.0, 2.5, 10.0].map(move |w| {
                    Ok((gamma_rate(&j, t, -w) / (gamma_rate(&j, t, w) * (-w / t).exp()) - 1.0).abs())
                })
            }))
        },
    },
    Check {
        name: "secular_depends_on_mean_coupling",
        tolerance: 1e-12,
        run: || {
            max_over([(0.3, 0.1), (2.0, 1.0)].iter().flat_map(|&(w, t)| {
                [(0.01, 0.0), (2e-3, 1e-3)].map(move |(ax, az)| {
                    let p = SystemParams::new(1.0, w, t);
                    let a = build_generator(&p.with_couplings(ax, az), GeneratorMode::Secular)?;
                    let b = build_generator(&p.with_alpha(0.5 * (ax + az)), GeneratorMode::Secular)?;
                    Ok((a.a_matrix - b.a_matrix).amax().max((a.b_vector - b.b_vector).amax()))
                })
            }))
        },
    },
    Check {
        name: "ring_mapping_exponent_offset",
        tolerance: 0.2,
        run: || {
            let distance = |r: f64| -> qpump::Result<f64> {
                let p = RingParams::new(1.0, r, 0.5 * r)?;
                max_over((0..64).map(|k| {
                    let t = TAU / p.omega * k as f64 / 64.0;
                    let h = ring::effective_pseudospin_hamiltonian(&p, t)?;
                    Ok(ring::hermitian_norm(&(h - ring::two_level_hamiltonian(&p, t))))
                }))
            };
            Ok(((distance(0.04)? / distance(0.01)?).ln() / 4f64.ln() - 2.0).abs())
        },
    },
];

/// Quick cross-oracle checks between the closed form, the master equation
/// and the ring model. A row fails when its value exceeds the tolerance.
pub fn validate(cfg: &Config) -> Result<Table, CliError> {
    let rows = CHECKS
        .par_iter()
        .map(|c| {
            let (value, status) = match (c.run)() {
                Ok(v) if v <= c.tolerance => (v, Status::Ok),
                Ok(v) => (v, Status::Failed(format!("exceeds tolerance {}", c.tolerance))),
                Err(e) => (f64::NAN, Status::Failed(e.to_string())),
            };
            Row {
                cells: vec![Cell::Text(c.name.into()), Cell::Num(value), Cell::Num(c.tolerance)],
                status,
            }
        })
        .collect();
    Ok(Table {
        command: "validate",
        engine: "analytic+secular+full".into(),
        config_echo: cfg.echo(),
        units: vec![NATURAL_UNITS.to_string()],
        columns: vec!["check", "value", "tolerance"],
        rows,
    })
}
