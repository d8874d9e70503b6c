//! Data series behind each figure, in the figure's own coordinates.

use kerr_lattice::couplings::{hopping_profile, write_y_blocks_csv};
use kerr_lattice::observables::*;
use kerr_lattice::solver::*;
use kerr_lattice::{Model, Scenario, SystemParams};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{Initial, RunConfig};
use crate::error::CliError;
use crate::output::{OutputDir, TaskReport};
use crate::tasks::{droplet_run, report_for, write_snapshots};

pub const FIGURES: [&str; 13] = ["3", "4", "5", "6a", "6b", "7a", "7b", "8a", "8b", "9a", "9b", "10", "droplets"];

const SNAPSHOT_TIMES: [f64; 8] = [0.0, 960.0, 2220.0, 3080.0, 4440.0, 5220.0, 6540.0, 7500.0];
const Y_BLOCK_MAX: usize = 9;

pub fn figure(cfg: &RunConfig, params: SystemParams, out: &mut OutputDir) -> Result<TaskReport, CliError> {
    let id = cfg.figure.as_deref().ok_or_else(|| CliError::Config("figure task needs `figure` (e.g. --set figure=9b)".into()))?;
    match id {
        "3" => hopping_vs_detuning(cfg, params, out),
        "4" => y_blocks(params, out),
        "5" => spectra(params, out),
        "6a" => droplet_energies(cfg, params, out),
        "6b" => ground_vs_detuning(cfg, params, out),
        "7a" => pair_profiles(cfg, params.with(|r| r.delta = -0.02)?, true, out),
        "7b" => pair_profiles(cfg, params.with(|r| r.delta = -0.15)?, false, out),
        "8a" => overlaps(params, Initial::Ps, out),
        "8b" => overlaps(params, Initial::Fs, out),
        "9a" => dynamics(cfg, params, Initial::Ps, out),
        "9b" => dynamics(cfg, params, Initial::Fs, out),
        "10" => snapshots(params, out),
        "droplets" => droplet_maps(cfg, params, out),
        other => Err(CliError::UnknownFigure(other.to_string())),
    }
}

fn delta_grid(cfg: &RunConfig) -> Result<Vec<f64>, CliError> {
    if cfg.sweep.parameter != "delta" {
        return Err(CliError::Config("this figure sweeps delta; set sweep.parameter to \"delta\"".into()));
    }
    cfg.sweep.points()
}

fn spin_decomposition(params: SystemParams, model: Model) -> Result<(Scenario, SpectralDecomposition), CliError> {
    let s = Scenario::new(params)?;
    let d = eigensolve(&s.hamiltonian(model)?, EigenRequest::All)?;
    Ok((s, d))
}

fn hopping_vs_detuning(cfg: &RunConfig, params: SystemParams, out: &mut OutputDir) -> Result<TaskReport, CliError> {
    let rows: Vec<(f64, f64, f64)> = delta_grid(cfg)?
        .into_iter()
        .map(|delta| {
            let h = hopping_profile(&params.with(|r| r.delta = delta)?)?;
            Ok((delta, h.onsite, h.length))
        })
        .collect::<Result<_, CliError>>()?;
    out.write("fig3.csv", |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["delta", "W0", "L0"])?;
        for r in &rows {
            c.serialize(r)?;
        }
        c.flush()?;
        Ok(())
    })?;
    Ok(TaskReport { summary: json!({ "points": rows.len() }), ..Default::default() })
}

fn y_blocks(params: SystemParams, out: &mut OutputDir) -> Result<TaskReport, CliError> {
    let s = Scenario::new(params)?;
    let y = &s.couplings()?.y;
    out.write("fig4.csv", |w| Ok(write_y_blocks_csv(w, &s.system.pairs, y, Y_BLOCK_MAX)?))?;
    Ok(TaskReport { summary: json!({ "r_max": Y_BLOCK_MAX, "g4": params.g.powi(4) }), ..Default::default() })
}

fn spectra(params: SystemParams, out: &mut OutputDir) -> Result<TaskReport, CliError> {
    let (s, spin) = spin_decomposition(params, Model::Spin)?;
    let single = eigensolve(&s.hamiltonian(Model::Single)?, EigenRequest::All)?;
    let tilde = eigensolve(&s.hamiltonian(Model::TildeSingle)?, EigenRequest::All)?;
    out.write("fig5.csv", |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["index", "E_spin", "E_single", "E_tilde_single"])?;
        for i in 0..spin.len() {
            c.serialize((i + 1, spin.energies[i], single.energies[i], tilde.energies[i]))?;
        }
        c.flush()?;
        Ok(())
    })?;
    Ok(report_for(&spin, json!({ "states": spin.len() })))
}

fn droplet_energies(cfg: &RunConfig, params: SystemParams, out: &mut OutputDir) -> Result<TaskReport, CliError> {
    let s = Scenario::new(params)?;
    let run = droplet_run(cfg, &s, Model::Spin)?;
    let single = eigensolve(&s.hamiltonian(Model::Single)?, EigenRequest::All)?;
    // each droplet is paired with the single-model eigenstate it overlaps most
    let indices: Vec<usize> = run
        .classification
        .states
        .iter()
        .map(|d| {
            let psi = run.decomp.vector(d.index - 1);
            let weight = |k: usize| single.vector(k).iter().zip(&psi).map(|(a, b)| a.conj() * b).sum::<kerr_lattice::c64>().norm_sqr();
            (0..single.len()).max_by(|&a, &b| weight(a).total_cmp(&weight(b))).unwrap_or(0)
        })
        .collect();
    let perturbed = first_order_perturbation(&single, &s.couplings()?.y, &indices)?;
    let rows = run.classification.count().min(perturbed.len()).min(run.variational.n_max()).min(6);
    out.write("fig6a.csv", |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["n", "state", "E_spin", "E_single", "E_variational", "E_first_order"])?;
        for n in 0..rows {
            let d = &run.classification.states[n];
            c.serialize((n + 1, d.index, d.energy, perturbed[n].zeroth, run.variational.energies[n], perturbed[n].total))?;
        }
        c.flush()?;
        Ok(())
    })?;
    Ok(report_for(
        &run.decomp,
        json!({
            "rows": rows,
            "L_r": run.variational.length,
            "droplet_indices": run.classification.indices(),
            "single_indices": indices.iter().map(|k| k + 1).collect::<Vec<_>>(),
        }),
    ))
}

fn ground_vs_detuning(cfg: &RunConfig, params: SystemParams, out: &mut OutputDir) -> Result<TaskReport, CliError> {
    let deltas = delta_grid(cfg)?;
    let v = &cfg.variational;
    let rows: Vec<[f64; 5]> = deltas
        .par_iter()
        .map(|&delta| {
            let (s, spin) = spin_decomposition(params.with(|r| r.delta = delta)?, Model::Spin)?;
            let single = eigensolve(&s.hamiltonian(Model::Single)?, EigenRequest::All)?;
            let pert = first_order_perturbation(&single, &s.couplings()?.y, &[0])?[0];
            let var = minimize_variational_in(&s.hamiltonian(Model::Spin)?, 1, v.bracket, v.tol)?;
            Ok([delta, spin.energies[0], single.energies[0], var.energies[0], pert.total])
        })
        .collect::<Result<_, CliError>>()?;
    out.write("fig6b.csv", |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["delta", "E_spin", "E_single", "E_variational", "E_first_order"])?;
        for r in &rows {
            c.serialize(r)?;
        }
        c.flush()?;
        Ok(())
    })?;
    Ok(TaskReport { summary: json!({ "points": rows.len() }), ..Default::default() })
}

fn ground_profile(s: &Scenario, model: Model) -> Result<Vec<f64>, CliError> {
    let h = s.hamiltonian(model)?;
    let d = eigensolve(&h, EigenRequest::Lowest(1))?;
    Ok(pair_correlation_of(h.basis.n_qubits, &d.pair_coefficients(0)))
}

fn pair_profiles(cfg: &RunConfig, params: SystemParams, with_variational: bool, out: &mut OutputDir) -> Result<TaskReport, CliError> {
    let s = Scenario::new(params)?;
    let full = ground_profile(&s, Model::Full)?;
    let spin = ground_profile(&s, Model::Spin)?;
    let single = ground_profile(&s, Model::Single)?;
    let var = if with_variational {
        let v = &cfg.variational;
        let r = minimize_variational_in(&s.hamiltonian(Model::Spin)?, 1, v.bracket, v.tol)?;
        let coeffs: Vec<kerr_lattice::c64> = r.states[0].iter().map(|&x| kerr_lattice::c64::new(x, 0.0)).collect();
        Some(pair_correlation_of(params.n_qubits, &coeffs))
    } else {
        None
    };
    let name = if with_variational { "fig7a.csv" } else { "fig7b.csv" };
    out.write(name, |w| {
        let mut c = csv::Writer::from_writer(w);
        let mut header = vec!["alpha", "P_full", "P_spin", "P_single"];
        if var.is_some() {
            header.push("P_variational");
        }
        c.write_record(&header)?;
        for a in 0..spin.len() {
            let mut row = vec![(a + 1).to_string(), full[a].to_string(), spin[a].to_string(), single[a].to_string()];
            if let Some(v) = &var {
                row.push(v[a].to_string());
            }
            c.write_record(&row)?;
        }
        c.flush()?;
        Ok(())
    })?;
    Ok(TaskReport {
        summary: json!({
            "delta": params.delta,
            "argmax_full": argmax_alpha(&full),
            "argmax_spin": argmax_alpha(&spin),
            "argmax_single": argmax_alpha(&single),
        }),
        ..Default::default()
    })
}

fn overlaps(params: SystemParams, initial: Initial, out: &mut OutputDir) -> Result<TaskReport, CliError> {
    let (_, d) = spin_decomposition(params, Model::Spin)?;
    let w = overlap_spectrum(&initial_state(initial.into(), d.basis), &d)?;
    let name = if initial == Initial::Ps { "fig8a.csv" } else { "fig8b.csv" };
    out.write(name, |f| Ok(write_overlap_csv(f, &w)?))?;
    Ok(report_for(&d, json!({ "initial": initial })))
}

fn dynamics(cfg: &RunConfig, params: SystemParams, initial: Initial, out: &mut OutputDir) -> Result<TaskReport, CliError> {
    let (_, d) = spin_decomposition(params, Model::Spin)?;
    let psi0 = initial_state(initial.into(), d.basis);
    let times = cfg.times.times();
    let alphas = &cfg.alphas;
    let rows = propagate_with(&d, &psi0, &times, |s| {
        let r = pair_correlation(&s);
        alphas.iter().map(|&a| r.at(a)).collect::<Vec<f64>>()
    })?;
    let name = if initial == Initial::Ps { "fig9a.csv" } else { "fig9b.csv" };
    out.write(name, |w| Ok(write_dynamics_csv(w, alphas, &times, &rows)?))?;
    Ok(report_for(&d, json!({ "initial": initial, "alphas": alphas })))
}

fn snapshots(params: SystemParams, out: &mut OutputDir) -> Result<TaskReport, CliError> {
    let (_, d) = spin_decomposition(params, Model::Spin)?;
    let psi0 = initial_state(Initial::Fs.into(), d.basis);
    write_snapshots(out, &d, &psi0, &SNAPSHOT_TIMES)?;
    Ok(report_for(&d, json!({ "times": SNAPSHOT_TIMES })))
}

fn droplet_maps(cfg: &RunConfig, params: SystemParams, out: &mut OutputDir) -> Result<TaskReport, CliError> {
    let s = Scenario::new(params)?;
    let run = droplet_run(cfg, &s, Model::Spin)?;
    let pairs = &s.system.pairs;
    let states: Vec<usize> = run.classification.states.iter().take(4).map(|d| d.index).collect();
    out.write("droplets.csv", |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["state", "i", "j", "R", "r", "c"])?;
        for &st in &states {
            let coeffs = run.decomp.pair_coefficients(st - 1);
            for (p, (i, j)) in pairs.pairs().enumerate() {
                c.serialize((st, i, j, 0.5 * (i + j) as f64, j - i, coeffs[p].re))?;
            }
        }
        c.flush()?;
        Ok(())
    })?;
    Ok(report_for(&run.decomp, json!({ "states": states })))
}
