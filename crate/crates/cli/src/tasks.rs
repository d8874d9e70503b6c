use std::fs;
use std::io::Write;

use kerr_lattice::couplings::{compute_w, lattice_sum_w};
use kerr_lattice::hamiltonians::{BasisKind, HamiltonianMatrix, MatrixData};
use kerr_lattice::observables::*;
use kerr_lattice::solver::*;
use kerr_lattice::validation::*;
use kerr_lattice::{Model, RawParams, Scenario, SystemParams};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{RunConfig, Task};
use crate::error::CliError;
use crate::output::{write_atomic, OutputDir, TaskReport};

pub fn run_task(cfg: &RunConfig, params: SystemParams, out: &mut OutputDir) -> Result<TaskReport, CliError> {
    match cfg.task {
        Task::Spectrum => spectrum(cfg, params, out),
        Task::Correlations => correlations(cfg, params, out),
        Task::Dynamics => dynamics(cfg, params, out),
        Task::Variational => variational(cfg, params, out),
        Task::Overlaps => overlaps(cfg, params, out),
        Task::Sweep => sweep(cfg, params, out),
        Task::Validate => validate(cfg, params, out),
        Task::Figure => crate::figures::figure(cfg, params, out),
    }
}

pub(crate) fn hamiltonian(scenario: &Scenario, model: Model, cap: usize) -> Result<HamiltonianMatrix, CliError> {
    if model == Model::Oracle {
        let p = scenario.params();
        return Ok(kerr_lattice::hamiltonians::build_h_complete_oracle(p, &scenario.system.positions, cap)?);
    }
    Ok(scenario.hamiltonian(model)?)
}

/// Complete decomposition for dense matrices, the lowest `count` for sparse ones.
pub(crate) fn solve(h: &HamiltonianMatrix, count: usize) -> Result<SpectralDecomposition, CliError> {
    let request = match h.data {
        MatrixData::Sparse(_) => EigenRequest::Lowest(count.min(h.dim())),
        _ => EigenRequest::All,
    };
    Ok(eigensolve(h, request)?)
}

pub(crate) fn report_for(d: &SpectralDecomposition, summary: Value) -> TaskReport {
    TaskReport { basis: Some(d.basis.into()), max_residual: Some(d.max_residual()), summary, failed_checks: 0 }
}

fn require_complete(d: &SpectralDecomposition, task: &str) -> Result<(), CliError> {
    if d.len() < d.dim() {
        return Err(CliError::Config(format!("{task} needs a complete spectrum; choose a dense model (spin, single, tilde-single, pair, adia0, adia1)")));
    }
    Ok(())
}

fn spectrum(cfg: &RunConfig, params: SystemParams, out: &mut OutputDir) -> Result<TaskReport, CliError> {
    let scenario = Scenario::new(params)?;
    let d = solve(&hamiltonian(&scenario, cfg.model, cfg.oracle_cap)?, cfg.eigen_count)?;
    out.write("spectrum.csv", |w| Ok(write_spectrum_csv(w, &d.energies)?))?;
    Ok(report_for(&d, json!({ "states": d.len(), "ground": d.energies[0] })))
}

fn correlations(cfg: &RunConfig, params: SystemParams, out: &mut OutputDir) -> Result<TaskReport, CliError> {
    let scenario = Scenario::new(params)?;
    let d = solve(&hamiltonian(&scenario, cfg.model, cfg.oracle_cap)?, cfg.eigen_count.max(cfg.states.iter().copied().max().unwrap_or(1)))?;
    let mut per_state = Vec::new();
    for &s in &cfg.states {
        if s == 0 || s > d.len() {
            return Err(CliError::Config(format!("state number {s} outside 1..={}", d.len())));
        }
        let psi = WavepacketState { basis: d.basis, coeffs: d.vector(s - 1), time: 0.0 };
        let record = pair_correlation(&psi);
        out.write(&format!("pair_corr_state{s}.csv"), |w| Ok(write_pair_corr_csv(w, &record)?))?;
        let grid = spin_spin_correlation(&psi);
        out.write(&format!("corr_state{s}.csv"), |w| Ok(write_corr_snapshot_csv(w, &grid)?))?;
        per_state.push(json!({
            "state": s,
            "energy": d.energies[s - 1],
            "argmax_alpha": argmax_alpha(&record.p_pair),
            "pair_weight": psi.pair_weight(),
            "photonic_fraction": psi.photonic_fraction()?,
        }));
    }
    Ok(report_for(&d, json!({ "states": per_state })))
}

fn dynamics(cfg: &RunConfig, params: SystemParams, out: &mut OutputDir) -> Result<TaskReport, CliError> {
    let scenario = Scenario::new(params)?;
    let d = solve(&hamiltonian(&scenario, cfg.model, cfg.oracle_cap)?, cfg.eigen_count)?;
    require_complete(&d, "dynamics")?;
    let psi0 = initial_state(cfg.initial.into(), d.basis);
    let times = cfg.times.times();
    let alphas = &cfg.alphas;
    let samples = propagate_with(&d, &psi0, &times, |s| {
        let r = pair_correlation(&s);
        (alphas.iter().map(|&a| r.at(a)).collect::<Vec<f64>>(), (s.norm_sqr() - 1.0).abs())
    })?;
    let rows: Vec<Vec<f64>> = samples.iter().map(|s| s.0.clone()).collect();
    let norm_error = samples.iter().map(|s| s.1).fold(0.0, f64::max);
    out.write("dynamics.csv", |w| Ok(write_dynamics_csv(w, alphas, &times, &rows)?))?;
    write_snapshots(out, &d, &psi0, &cfg.snapshots)?;
    let first = cfg.alphas.first().copied().unwrap_or(1);
    let series: Vec<f64> = rows.iter().map(|r| r.first().copied().unwrap_or(0.0)).collect();
    let period = peak_spacing_period(&times, &series, 0.2);
    Ok(report_for(&d, json!({ "max_norm_error": norm_error, "peak_spacing_alpha": first, "peak_spacing_period": period })))
}

pub(crate) fn write_snapshots(out: &mut OutputDir, d: &SpectralDecomposition, psi0: &WavepacketState, times: &[f64]) -> Result<(), CliError> {
    for state in propagate(d, psi0, times)? {
        let grid = spin_spin_correlation(&state);
        out.write(&format!("corr_t{}.csv", state.time), |w| Ok(write_corr_snapshot_csv(w, &grid)?))?;
    }
    Ok(())
}

fn overlaps(cfg: &RunConfig, params: SystemParams, out: &mut OutputDir) -> Result<TaskReport, CliError> {
    let scenario = Scenario::new(params)?;
    let d = solve(&hamiltonian(&scenario, cfg.model, cfg.oracle_cap)?, cfg.eigen_count)?;
    let psi0 = initial_state(cfg.initial.into(), d.basis);
    let w = overlap_spectrum(&psi0, &d)?;
    out.write("overlaps.csv", |f| Ok(write_overlap_csv(f, &w)?))?;
    let mut top: Vec<(f64, f64)> = w.clone();
    top.sort_by(|a, b| b.1.total_cmp(&a.1));
    top.truncate(2);
    let captured: f64 = w.iter().map(|x| x.1).sum();
    Ok(report_for(&d, json!({ "captured_weight": captured, "largest": top })))
}

pub(crate) struct DropletRun {
    pub decomp: SpectralDecomposition,
    pub variational: VariationalResult,
    pub classification: DropletClassification,
}

/// Spin-tag spectrum, optimized variational manifold and droplet states.
pub(crate) fn droplet_run(cfg: &RunConfig, scenario: &Scenario, model: Model) -> Result<DropletRun, CliError> {
    let h = scenario.hamiltonian(model)?;
    if h.basis.kind != BasisKind::Spin {
        return Err(CliError::Config(format!("model {model} has photons; the variational ansatz needs a qubit-only model")));
    }
    let decomp = eigensolve(&h, EigenRequest::All)?;
    let v = &cfg.variational;
    let variational = minimize_variational_in(&h, v.n_max, v.bracket, v.tol)?;
    let drift = if v.drift_extra_qubits > 0 {
        let bigger = scenario.params().with(|r| r.n_qubits += v.drift_extra_qubits)?;
        let other = eigensolve(&Scenario::new(bigger)?.hamiltonian(model)?, EigenRequest::Lowest(1))?;
        let a = pair_correlation_of(h.basis.n_qubits, &decomp.pair_coefficients(0));
        let b = pair_correlation_of(bigger.n_qubits, &other.pair_coefficients(0));
        Some(sup_norm_drift(&a, &b))
    } else {
        None
    };
    let criteria = DropletCriteria { threshold: v.threshold, max_drift: v.max_drift };
    let classification = classify_droplet_states(&decomp, &variational, &criteria, drift)?;
    Ok(DropletRun { decomp, variational, classification })
}

fn variational(cfg: &RunConfig, params: SystemParams, out: &mut OutputDir) -> Result<TaskReport, CliError> {
    let scenario = Scenario::new(params)?;
    let run = droplet_run(cfg, &scenario, cfg.model)?;
    let v = &run.variational;
    out.write("variational.csv", |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["n", "L_r", "E_minus_E0b"])?;
        for (n, e) in v.energies.iter().enumerate() {
            c.serialize((n + 1, v.length, e))?;
        }
        c.flush()?;
        Ok(())
    })?;
    let states = &run.classification.states;
    out.write("droplets.csv", |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["index", "E_minus_E0b", "n", "span_overlap", "mode_overlap"])?;
        for s in states {
            c.serialize((s.index, s.energy, s.n, s.span_overlap, s.mode_overlap))?;
        }
        c.flush()?;
        Ok(())
    })?;
    let n_e = params.n_qubits as f64;
    Ok(report_for(
        &run.decomp,
        json!({
            "L_r": v.length,
            "N_e_over_L_r": n_e / v.length,
            "droplet_indices": run.classification.indices(),
            "droplet_count": run.classification.count(),
            "self_bound": run.classification.self_bound,
            "drift": run.classification.drift,
        }),
    ))
}

/// Copy of `params` with one raw field replaced.
pub(crate) fn with_parameter(params: &SystemParams, name: &str, value: f64) -> Result<SystemParams, CliError> {
    let mut raw = serde_json::to_value(params.raw()).expect("raw params serialize");
    let slot = raw.get_mut(name).ok_or_else(|| CliError::Config(format!("unknown sweep parameter {name:?}")))?;
    *slot = if slot.is_u64() {
        if value < 0.0 || value.fract() != 0.0 {
            return Err(CliError::Config(format!("{name} needs a nonnegative integer, got {value}")));
        }
        json!(value as u64)
    } else {
        json!(value)
    };
    let raw: RawParams = serde_json::from_value(raw).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(SystemParams::new(raw)?)
}

#[derive(Debug, Clone, serde::Serialize)]
struct SweepPoint {
    value: f64,
    ground: f64,
    single_ground: Option<f64>,
    first_order_ground: Option<f64>,
}

fn sweep_point(cfg: &RunConfig, params: SystemParams) -> Result<(SweepPoint, SpectralDecomposition), CliError> {
    let scenario = Scenario::new(params)?;
    let d = solve(&hamiltonian(&scenario, cfg.model, cfg.oracle_cap)?, cfg.eigen_count)?;
    let (single_ground, first_order_ground) = if cfg.model == Model::Spin {
        let single = eigensolve(&scenario.hamiltonian(Model::Single)?, EigenRequest::All)?;
        let level = first_order_perturbation(&single, &scenario.couplings()?.y, &[0])?[0];
        (Some(level.zeroth), Some(level.total))
    } else {
        (None, None)
    };
    Ok((SweepPoint { value: f64::NAN, ground: d.energies[0], single_ground, first_order_ground }, d))
}

fn sweep(cfg: &RunConfig, params: SystemParams, out: &mut OutputDir) -> Result<TaskReport, CliError> {
    let values = cfg.sweep.points()?;
    let name = cfg.sweep.parameter.as_str();
    let point_params: Vec<SystemParams> = values.iter().map(|&v| with_parameter(&params, name, v)).collect::<Result<_, _>>()?;
    let root = out.path().to_path_buf();

    // each point is written into its own temporary directory and then moved
    let results: Vec<Result<(SweepPoint, f64), CliError>> = point_params
        .par_iter()
        .zip(&values)
        .enumerate()
        .map(|(i, (p, &value))| {
            let (mut point, d) = sweep_point(cfg, *p)?;
            point.value = value;
            let dir = root.join(format!("point_{i:03}"));
            let tmp = root.join(format!(".point_{i:03}.tmp"));
            if tmp.exists() {
                fs::remove_dir_all(&tmp)?;
            }
            fs::create_dir_all(&tmp)?;
            write_atomic(&tmp.join("spectrum.csv"), |w| Ok(write_spectrum_csv(w, &d.energies)?))?;
            write_atomic(&tmp.join("point.json"), |w| {
                serde_json::to_writer_pretty(&mut *w, &json!({ "parameter": name, "point": point, "param_hash": p.fingerprint() }))
                    .map_err(std::io::Error::from)?;
                writeln!(w)?;
                Ok(())
            })?;
            if dir.exists() {
                fs::remove_dir_all(&dir)?;
            }
            fs::rename(&tmp, &dir)?;
            Ok((point, d.max_residual()))
        })
        .collect();
    let mut points = Vec::with_capacity(results.len());
    let mut worst = 0.0f64;
    for (i, r) in results.into_iter().enumerate() {
        let (p, res) = r?;
        worst = worst.max(res);
        out.record(format!("point_{i:03}"));
        points.push(p);
    }
    out.write("sweep.csv", |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record([name, "E0", "E0_single", "E0_first_order"])?;
        for p in &points {
            let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            c.write_record([p.value.to_string(), p.ground.to_string(), opt(p.single_ground), opt(p.first_order_ground)])?;
        }
        c.flush()?;
        Ok(())
    })?;
    Ok(TaskReport { basis: None, max_residual: Some(worst), summary: json!({ "parameter": name, "points": points.len() }), failed_checks: 0 })
}

struct Check {
    name: &'static str,
    value: f64,
    tolerance: f64,
}

fn validate(cfg: &RunConfig, params: SystemParams, out: &mut OutputDir) -> Result<TaskReport, CliError> {
    let mut checks = Vec::new();
    let base = params.raw();

    // operator strings against the structured builders
    let small = SystemParams::new(RawParams { n_cavities: 101, n_qubits: 6, ..base })?;
    let s = Scenario::new(small)?;
    let c = s.couplings()?;
    let dense = |m: Model| -> Result<faer::Mat<f64>, CliError> {
        match s.hamiltonian(m)?.data {
            MatrixData::Real(m) => Ok(m),
            _ => unreachable!("spin models are real"),
        }
    };
    let scale = c.y.norm_max().max(c.w.norm_max());
    checks.push(Check { name: "operator_string_h_single", value: max_abs_diff(&dense(Model::Single)?, &operator_string_h_single(&c.w)?), tolerance: 1e-12 * scale });
    checks.push(Check {
        name: "operator_string_h_tilde_single",
        value: max_abs_diff(&dense(Model::TildeSingle)?, &operator_string_h_tilde_single(&c.w)?),
        tolerance: 1e-12 * scale,
    });
    checks.push(Check { name: "operator_string_h_pair", value: max_abs_diff(&dense(Model::Pair)?, &operator_string_h_pair(6, &c.y)?), tolerance: 1e-12 * scale });
    let spin_ref = operator_string_h_single(&c.w)? + operator_string_h_pair(6, &c.y)?;
    checks.push(Check { name: "operator_string_h_spin", value: max_abs_diff(&dense(Model::Spin)?, &spin_ref), tolerance: 1e-12 * scale });

    // bound band against the two-photon sector of the ring
    let ring = SystemParams::new(RawParams { n_cavities: 31, n_qubits: 2, spacing: 1, ..base })?;
    let sys = kerr_lattice::ArraySystem::new(ring)?;
    let sector = two_photon_sector_spectrum(&ring)?;
    let bath_err = sys
        .bound_states
        .iter()
        .map(|b| sector.iter().map(|e| (e - b.energy).abs()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    checks.push(Check { name: "bound_band_vs_two_photon_sector", value: bath_err, tolerance: 1e-9 });

    // truncated model against the complete oracle
    let trunc = Scenario::new(SystemParams::new(RawParams { n_cavities: 41, n_qubits: 4, ..base })?)?;
    let full = eigensolve(&trunc.hamiltonian(Model::Full)?, EigenRequest::Lowest(5))?;
    let oracle = eigensolve(&hamiltonian(&trunc, Model::Oracle, cfg.oracle_cap)?, EigenRequest::Lowest(5))?;
    let trunc_err = full.energies.iter().zip(&oracle.energies).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    checks.push(Check { name: "truncated_vs_complete_lowest5", value: trunc_err, tolerance: 1e-4 });

    // closed-form hopping against the lattice sum at the configured size
    let sys = kerr_lattice::ArraySystem::new(params)?;
    let closed = compute_w(&params, &sys.positions)?;
    let summed = lattice_sum_w(&params, &sys.positions, &sys.grid, &sys.bands.single_detunings)?;
    checks.push(Check { name: "hopping_closed_form_vs_lattice_sum", value: max_abs_diff(&closed, &summed), tolerance: 1e-10 * closed.norm_max() });

    let failed = checks.iter().filter(|c| !(c.value <= c.tolerance)).count();
    out.write("validate.csv", |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["check", "value", "tolerance", "pass"])?;
        for k in &checks {
            c.serialize((k.name, k.value, k.tolerance, k.value <= k.tolerance))?;
        }
        c.flush()?;
        Ok(())
    })?;
    let summary: Vec<Value> = checks.iter().map(|k| json!({ "check": k.name, "value": k.value, "tolerance": k.tolerance, "pass": k.value <= k.tolerance })).collect();
    Ok(TaskReport { basis: None, max_residual: None, summary: json!({ "checks": summary, "failed": failed }), failed_checks: failed })
}
