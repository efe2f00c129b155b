//! Experiment execution: one command per process invocation, artifacts on
//! disk, and an exit status that reflects the run's assertions.
//!
//! Exit codes: `0` all assertions passed, `1` an assertion failed or a
//! runtime error occurred, `2` configuration/schema violation, `3` the inner
//! solver failed to converge on some step.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use circleflow_core::circot::{dper2, dper2_oracle, dper2_quantile, geodesic};
use circleflow_core::energy::{
    free_energy, hilbert_multiplier, hilbert_multiplier_shifted, hilbert_pv_quadrature,
};
use circleflow_core::jko::{error_bound_check, evolve, inviscid_sweep};
use circleflow_core::measure::{node, CellMeasure};
use circleflow_core::spectral::{cross_validate, spectral_evolve, SpectralOutcome};
use serde_json::json;

use crate::config::{CommandKind, ExperimentConfig};
use crate::io;
use crate::validate;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_NONCONVERGED: i32 = 3;

pub struct RunOutput {
    pub exit_code: i32,
    pub summary: String,
}

/// Execute the configured experiment, writing `meta.json`, `report.json` and
/// any command-specific artifacts into the output directory.
pub fn run(config: &ExperimentConfig, quiet: bool) -> Result<RunOutput> {
    let dir = config.output_dir.clone();
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    write_meta(&dir, config)?;

    let outcome = match config.command {
        CommandKind::Evolve => run_evolve(config, &dir)?,
        CommandKind::Distance => run_distance(config, &dir)?,
        CommandKind::Energy => run_energy(config, &dir)?,
        CommandKind::Geodesic => run_geodesic(config, &dir)?,
        CommandKind::Hilbert => run_hilbert(config, &dir)?,
        CommandKind::SweepNu => run_sweep_nu(config, &dir)?,
        CommandKind::ErrorBound => run_error_bound(config, &dir)?,
        CommandKind::Spectral => run_spectral(config, &dir)?,
        CommandKind::CrossValidate => run_cross_validate(config, &dir)?,
        CommandKind::Validate => run_validate(config, &dir, quiet)?,
    };
    Ok(outcome)
}

fn write_meta(dir: &Path, config: &ExperimentConfig) -> Result<()> {
    let meta = json!({
        "version": 1,
        "library_version": env!("CARGO_PKG_VERSION"),
        "config": config,
    });
    fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

fn write_report(dir: &Path, report: &serde_json::Value) -> Result<()> {
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(report)?)?;
    Ok(())
}

fn run_evolve(config: &ExperimentConfig, dir: &PathBuf) -> Result<RunOutput> {
    let m0 = config.initial_measure()?;
    let solver = config.solver_config();
    let traj = evolve(&m0, &solver)?;
    io::write_trajectory(dir, &traj, config.snapshot_every)?;

    // per-step assertions: energy decay and the telescoping transport bound
    let mut worst_rise = f64::NEG_INFINITY;
    for w in traj.energies().windows(2) {
        worst_rise = worst_rise.max(w[1].total - w[0].total);
    }
    let total_cost: f64 = traj.step_costs().iter().sum();
    let fmin = free_energy(
        &CellMeasure::uniform(m0.len())?,
        solver.nu,
        solver.coeff,
    )
    .total;
    let telescoping_ok =
        total_cost / (2.0 * solver.tau) <= traj.energies()[0].total - fmin + 1e-6;
    let energy_ok = worst_rise <= 1e-6;
    let failed_step = traj.first_failed_step();

    write_report(
        dir,
        &json!({
            "steps": traj.len() - 1,
            "energy_decay_ok": energy_ok,
            "worst_energy_rise": worst_rise,
            "telescoping_ok": telescoping_ok,
            "all_steps_converged": failed_step.is_none(),
            "first_failed_step": failed_step,
            "final_energy": traj.energies().last().map(|e| e.total),
        }),
    )?;

    if let Some(k) = failed_step {
        return Ok(RunOutput {
            exit_code: EXIT_NONCONVERGED,
            summary: format!("step {k} failed to converge; artifacts in {}", dir.display()),
        });
    }
    let ok = energy_ok && telescoping_ok;
    Ok(RunOutput {
        exit_code: if ok { EXIT_OK } else { EXIT_ASSERTION },
        summary: format!(
            "{} steps, final energy {:.6}, artifacts in {}",
            traj.len() - 1,
            traj.energies().last().map(|e| e.total).unwrap_or(f64::NAN),
            dir.display()
        ),
    })
}

fn run_distance(config: &ExperimentConfig, dir: &PathBuf) -> Result<RunOutput> {
    let a = io::read_measure(&config.inputs[0])?;
    let b = io::read_measure(&config.inputs[1])?;
    let quantile = dper2_quantile(&a, &b);
    let (atomic, oracle, plan_json) = if a.len() == b.len() {
        let (cost, plan) = dper2(&a.atoms(), &b.atoms())?;
        let oracle = dper2_oracle(&a.atoms(), &b.atoms())?;
        let plan_json = json!({
            "shift": plan.shift(),
            "lifted_targets": plan.lifted_targets(),
            "displacements": plan.displacements(),
            "cost": plan.cost(),
        });
        (Some(cost), Some(oracle), Some(plan_json))
    } else {
        (None, None, None)
    };
    let agreement_ok = match (atomic, oracle) {
        (Some(c), Some(o)) => (c - o).abs() <= 1e-8,
        _ => true,
    };
    write_report(
        dir,
        &json!({
            "dper2_quantile": quantile,
            "dper2_atoms": atomic,
            "dper2_oracle": oracle,
            "oracle_agreement_ok": agreement_ok,
            "plan": plan_json,
        }),
    )?;
    Ok(RunOutput {
        exit_code: if agreement_ok { EXIT_OK } else { EXIT_ASSERTION },
        summary: match (atomic, oracle) {
            (Some(c), Some(o)) => {
                format!("dper2 = {c:.12e} (oracle {o:.12e}, quantile {quantile:.12e})")
            }
            _ => format!("dper2_quantile = {quantile:.12e}"),
        },
    })
}

fn run_energy(config: &ExperimentConfig, dir: &PathBuf) -> Result<RunOutput> {
    let m = if config.inputs.is_empty() {
        config.initial_measure()?
    } else {
        io::read_measure(&config.inputs[0])?
    };
    let report = free_energy(&m, config.nu, config.coeff.into());
    write_report(
        dir,
        &json!({
            "entropy": report.entropy,
            "interaction": report.interaction,
            "total": report.total,
            "nu": report.nu,
            "coeff": config.coeff,
        }),
    )?;
    Ok(RunOutput {
        exit_code: EXIT_OK,
        summary: format!(
            "entropy {:.9}, interaction {:.9}, total {:.9}",
            report.entropy, report.interaction, report.total
        ),
    })
}

fn run_geodesic(config: &ExperimentConfig, dir: &PathBuf) -> Result<RunOutput> {
    let a = io::read_measure(&config.inputs[0])?.atoms();
    let b = io::read_measure(&config.inputs[1])?.atoms();
    let (d2, plan) = dper2(&a, &b)?;
    let d = d2.sqrt();
    let mut curve = Vec::new();
    let mut worst_dev = 0.0f64;
    for &t in &config.t_samples {
        let gt = geodesic(&a, &b, t)?;
        // constant-speed check against the endpoints
        let (d0, _) = dper2(&a, &gt)?;
        let (d1, _) = dper2(&gt, &b)?;
        worst_dev = worst_dev.max((d0.sqrt() - t * d).abs());
        worst_dev = worst_dev.max((d1.sqrt() - (1.0 - t) * d).abs());
        curve.push(json!({ "t": t, "positions": gt.positions() }));
    }
    let ok = worst_dev <= 1e-8;
    write_report(
        dir,
        &json!({
            "distance": d,
            "constant_speed_deviation": worst_dev,
            "constant_speed_ok": ok,
            "plan": {
                "shift": plan.shift(),
                "lifted_targets": plan.lifted_targets(),
                "displacements": plan.displacements(),
                "cost": plan.cost(),
            },
            "curve": curve,
        }),
    )?;
    Ok(RunOutput {
        exit_code: if ok { EXIT_OK } else { EXIT_ASSERTION },
        summary: format!("distance {d:.6}, constant-speed deviation {worst_dev:.2e}"),
    })
}

fn run_hilbert(config: &ExperimentConfig, dir: &PathBuf) -> Result<RunOutput> {
    let m = config.grid_size;
    let mut worst_mult = 0.0f64;
    for k in 1..=config.mode_max as usize {
        let cos_in: Vec<f64> = (0..m).map(|j| (k as f64 * node(j, m)).cos()).collect();
        let sin_in: Vec<f64> = (0..m).map(|j| (k as f64 * node(j, m)).sin()).collect();
        let h_cos = hilbert_multiplier(&cos_in)?;
        let h_sin = hilbert_multiplier(&sin_in)?;
        for j in 0..m {
            let x = node(j, m);
            worst_mult = worst_mult.max((h_cos[j] - (k as f64 * x).sin()).abs());
            worst_mult = worst_mult.max((h_sin[j] + (k as f64 * x).cos()).abs());
        }
    }
    let mp = m.max(1024);
    let u: Vec<f64> = (0..mp)
        .map(|j| {
            let x = node(j, mp);
            0.4 + 0.2 * x.cos() + 0.1 * (3.0 * x).sin()
        })
        .collect();
    let pv = hilbert_pv_quadrature(&u)?;
    let shifted = hilbert_multiplier_shifted(&u)?;
    let worst_pv = pv.iter().zip(&shifted).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
    let ok = worst_mult <= 1e-12 && worst_pv <= 1e-4;
    write_report(
        dir,
        &json!({
            "grid_size": m,
            "mode_max": config.mode_max,
            "multiplier_max_error": worst_mult,
            "pv_oracle_grid": mp,
            "pv_oracle_max_gap": worst_pv,
            "passed": ok,
        }),
    )?;
    Ok(RunOutput {
        exit_code: if ok { EXIT_OK } else { EXIT_ASSERTION },
        summary: format!("multiplier error {worst_mult:.2e}, PV gap {worst_pv:.2e}"),
    })
}

fn run_sweep_nu(config: &ExperimentConfig, dir: &PathBuf) -> Result<RunOutput> {
    let m0 = config.initial_measure()?;
    let rep = inviscid_sweep(&m0, &config.nus, &config.solver_config())?;
    write_report(
        dir,
        &json!({
            "errors": rep.errors,
            "passed": rep.passed,
        }),
    )?;
    Ok(RunOutput {
        exit_code: if rep.passed { EXIT_OK } else { EXIT_ASSERTION },
        summary: format!(
            "{}",
            rep.errors
                .iter()
                .map(|(nu, e)| format!("e({nu}) = {e:.3e}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    })
}

fn run_error_bound(config: &ExperimentConfig, dir: &PathBuf) -> Result<RunOutput> {
    let m0 = config.initial_measure()?;
    let rep =
        error_bound_check(&m0, config.nu, config.tau, config.t_end, config.n_cells)?;
    write_report(
        dir,
        &json!({
            "tau": rep.tau,
            "sup_distance_squared": rep.sup_sq,
            "bound": rep.bound,
            "passed": rep.passed,
        }),
    )?;
    Ok(RunOutput {
        exit_code: if rep.passed { EXIT_OK } else { EXIT_ASSERTION },
        summary: format!("sup d² {:.3e} vs bound {:.3e}", rep.sup_sq, rep.bound),
    })
}

fn run_spectral(config: &ExperimentConfig, dir: &PathBuf) -> Result<RunOutput> {
    let m0 = config.initial_measure()?;
    let u0 = m0.to_density(config.grid_size)?;
    let dt = if config.dt > 0.0 { config.dt } else { f64::INFINITY };
    let record_dt = config.tau * config.snapshot_every as f64;
    let run = spectral_evolve(&u0, config.nu, dt, config.t_end, record_dt)?;
    for (k, snap) in run.snapshots.iter().enumerate() {
        io::write_grid(&dir.join(format!("grid_{k:06}.grd")), snap)?;
    }
    let mut csv = String::from("t,l2_norm\n");
    for (t, l2) in run.times.iter().zip(&run.l2_norms) {
        csv.push_str(&format!("{},{}\n", io::fmt17(*t), io::fmt17(*l2)));
    }
    fs::write(dir.join("l2_series.csv"), csv)?;
    let worst_mass = run
        .snapshots
        .iter()
        .map(|s| (s.mass() - 1.0).abs())
        .fold(0.0f64, f64::max);
    let mass_ok = worst_mass <= 1e-10;
    let breakdown = matches!(run.outcome, SpectralOutcome::Breakdown { .. });
    write_report(
        dir,
        &json!({
            "records": run.times.len(),
            "dt_used": run.dt,
            "outcome": match run.outcome {
                SpectralOutcome::Completed => json!("completed"),
                SpectralOutcome::Breakdown { t } => json!({ "breakdown_at": t }),
            },
            "mass_conservation_ok": mass_ok,
            "worst_mass_drift": worst_mass,
        }),
    )?;
    Ok(RunOutput {
        exit_code: if mass_ok { EXIT_OK } else { EXIT_ASSERTION },
        summary: format!(
            "{} records, dt = {:.3e}{}",
            run.times.len(),
            run.dt,
            if breakdown { ", stopped approaching breakdown" } else { "" }
        ),
    })
}

fn run_cross_validate(config: &ExperimentConfig, dir: &PathBuf) -> Result<RunOutput> {
    let m0 = config.initial_measure()?;
    let rep = cross_validate(
        &m0,
        &config.solver_config(),
        config.grid_size,
        config.snapshot_every,
        config.tolerance,
    )?;
    write_report(
        dir,
        &json!({
            "series": rep.series,
            "sup_distance": rep.sup_dist,
            "tolerance": rep.tolerance,
            "passed": rep.passed,
        }),
    )?;
    Ok(RunOutput {
        exit_code: if rep.passed { EXIT_OK } else { EXIT_ASSERTION },
        summary: format!("sup d_per = {:.3e} (tolerance {:.0e})", rep.sup_dist, rep.tolerance),
    })
}

fn run_validate(_config: &ExperimentConfig, dir: &PathBuf, quiet: bool) -> Result<RunOutput> {
    let outcomes = validate::run_all();
    let mut all_ok = true;
    let mut rows = Vec::new();
    for o in &outcomes {
        if !quiet {
            println!("{}", o.line());
        }
        all_ok &= o.passed;
        rows.push(json!({
            "id": o.id,
            "name": o.name,
            "passed": o.passed,
            "details": o.details,
        }));
    }
    write_report(dir, &json!({ "criteria": rows, "all_passed": all_ok }))?;
    Ok(RunOutput {
        exit_code: if all_ok { EXIT_OK } else { EXIT_ASSERTION },
        summary: format!(
            "{}/{} criteria passed",
            outcomes.iter().filter(|o| o.passed).count(),
            outcomes.len()
        ),
    })
}
