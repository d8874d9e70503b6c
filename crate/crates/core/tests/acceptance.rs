//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line to stderr
//! (bypassing the harness capture) and then asserts.

use std::io::Write;
use std::sync::{Mutex, OnceLock};

use faer::{Mat, Side};
use kerr_lattice::couplings::EffectiveCouplings;
use kerr_lattice::hamiltonians::{build_h_pair, build_h_single, build_h_tilde_single, HamiltonianMatrix, MatrixData};
use kerr_lattice::observables::*;
use kerr_lattice::solver::*;
use kerr_lattice::validation::*;
use kerr_lattice::*;

// heavy contexts are built one at a time to bound peak memory
static HEAVY: Mutex<()> = Mutex::new(());

fn report(id: &str, pass: bool, detail: String) {
    let line = format!("ACCEPTANCE {id:<4} {} {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {id} failed: {detail}");
}

fn params(f: impl FnOnce(&mut RawParams)) -> SystemParams {
    let mut raw = RawParams::default();
    f(&mut raw);
    SystemParams::new(raw).unwrap()
}

fn real(h: &HamiltonianMatrix) -> &Mat<f64> {
    match &h.data {
        MatrixData::Real(m) => m,
        _ => panic!("expected a real matrix"),
    }
}

struct SpinRun {
    scenario: Scenario,
    h: HamiltonianMatrix,
    decomp: SpectralDecomposition,
}

fn spin_run(p: SystemParams, model: Model) -> SpinRun {
    let scenario = Scenario::new(p).unwrap();
    let h = scenario.hamiltonian(model).unwrap();
    let decomp = eigensolve(&h, EigenRequest::All).unwrap();
    SpinRun { scenario, h, decomp }
}

fn ground_p_pair(p: SystemParams, model: Model) -> Vec<f64> {
    let _guard = HEAVY.lock().unwrap_or_else(|e| e.into_inner());
    let scenario = Scenario::new(p).unwrap();
    let h = scenario.hamiltonian(model).unwrap();
    let d = eigensolve(&h, EigenRequest::Lowest(1)).unwrap();
    pair_correlation_of(d.basis.n_qubits, &d.pair_coefficients(0))
}

fn default_spin() -> &'static SpinRun {
    static CELL: OnceLock<SpinRun> = OnceLock::new();
    CELL.get_or_init(|| spin_run(SystemParams::default(), Model::Spin))
}

fn spacing_spin(x: usize) -> &'static SpinRun {
    static X2: OnceLock<SpinRun> = OnceLock::new();
    static X3: OnceLock<SpinRun> = OnceLock::new();
    let cell = match x {
        1 => return default_spin(),
        2 => &X2,
        3 => &X3,
        _ => unreachable!(),
    };
    cell.get_or_init(|| spin_run(params(|r| r.spacing = x), Model::Spin))
}

/// Ground-state `P_pair` drift for `N_e` 60 → 80.
fn size_drift(x: usize, delta: f64, model: Model) -> f64 {
    let small = ground_p_pair(params(|r| (r.spacing, r.delta) = (x, delta)), model);
    let large = ground_p_pair(params(|r| (r.spacing, r.delta, r.n_qubits) = (x, delta, 80)), model);
    sup_norm_drift(&small, &large)
}

fn spin_drift(x: usize) -> f64 {
    static CELLS: [OnceLock<f64>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    *CELLS[x - 1].get_or_init(|| size_drift(x, -0.02, Model::Spin))
}

fn default_full() -> &'static SpectralDecomposition {
    static CELL: OnceLock<SpectralDecomposition> = OnceLock::new();
    CELL.get_or_init(|| {
        let _guard = HEAVY.lock().unwrap_or_else(|e| e.into_inner());
        let h = Scenario::new(SystemParams::default()).unwrap().hamiltonian(Model::Full).unwrap();
        eigensolve(&h, EigenRequest::Lowest(10)).unwrap()
    })
}

/// Distinct eigenvalues with multiplicities, clustered by gaps above `tol`.
fn clusters(values: &[f64], tol: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for &v in values {
        match out.last_mut() {
            Some((_, m)) if v - last <= tol => *m += 1,
            _ => out.push((v, 1)),
        }
        last = v;
    }
    out
}

#[test]
fn c1_degenerate_spectrum_at_zero_spacing() {
    let n_e = 60;
    let run = spin_run(params(|r| r.spacing = 0), Model::Spin);
    let found = clusters(&run.decomp.energies, 1e-9);
    let expected = [(-0.2256, 1), (-0.0629, n_e - 1), (-0.0200, n_e * (n_e - 3) / 2)];
    let pass = found.len() == 3 && found.iter().zip(&expected).all(|(&(e, m), &(te, tm))| m == tm && (e - te).abs() <= 5e-4);
    report("1", pass, format!("levels (E, multiplicity) = {found:?}, expected {expected:?}"));
}

#[test]
fn c2_fs_overlap_decomposition() {
    let run = default_spin();
    let fs = initial_state(InitialKind::FullySymmetric, run.decomp.basis);
    let mut ov = overlap_spectrum(&fs, &run.decomp).unwrap();
    let total: f64 = ov.iter().map(|o| o.1).sum();
    ov.sort_by(|a, b| b.1.total_cmp(&a.1));
    let (a, b) = (ov[0], ov[1]);
    let gap = (a.0 - b.0).abs();
    let pass = (a.1 - 0.526).abs() <= 0.01 && (b.1 - 0.364).abs() <= 0.01 && a.1 + b.1 >= 0.88 && (gap - 0.0031).abs() <= 5e-4
        && (total - 1.0).abs() < 1e-10;
    report("2", pass, format!("weights {:.5}, {:.5} (sum {:.5}), gap {gap:.6}, completeness {:.1e}", a.1, b.1, a.1 + b.1, total - 1.0));
}

#[test]
fn c3_fs_dynamics_period() {
    let run = default_spin();
    let fs = initial_state(InitialKind::FullySymmetric, run.decomp.basis);
    let times: Vec<f64> = (0..=10_000).map(f64::from).collect();
    let samples = propagate_with(&run.decomp, &fs, &times, |s| (pair_correlation(&s).at(1), s.norm_sqr())).unwrap();
    let p1: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let norm_err = samples.iter().map(|s| (s.1 - 1.0).abs()).fold(0.0, f64::max);
    let period = peak_spacing_period(&times, &p1, 0.2);
    let ok_period = period.is_some_and(|p| (p - 2000.0).abs() <= 0.05 * 2000.0);
    report("3", ok_period && norm_err <= 1e-10, format!("peak-spacing period {period:?} (target 2000 ± 100), max norm error {norm_err:.1e}"));
}

#[test]
fn c4_droplet_classification() {
    let criteria = DropletCriteria::default();
    let mut counts = Vec::new();
    let mut detail = String::new();
    let mut default_ok = false;
    for x in 1..=3 {
        let run = spacing_spin(x);
        let drift = spin_drift(x);
        let counted = match minimize_variational(&run.h, 10) {
            Ok(v) => {
                let c = classify_droplet_states(&run.decomp, &v, &criteria, Some(drift)).unwrap();
                if x == 1 {
                    let estimate = (run.decomp.basis.n_qubits as f64 / v.length).round() as usize;
                    default_ok = c.indices() == [1, 2, 3, 4, 7, 10] && (v.length - 10.0).abs() <= 2.0 && estimate == c.count();
                    detail += &format!("x=1: indices {:?}, L_r {:.3}, N_e/L_r {:.2}; ", c.indices(), v.length, 60.0 / v.length);
                }
                c.count()
            }
            Err(e) => {
                detail += &format!("x={x}: {e}; ");
                0
            }
        };
        detail += &format!("x={x}: count {counted} (drift {drift:.2e}); ");
        counts.push(counted);
    }
    report("4", default_ok && counts == [6, 4, 0], detail);
}

#[test]
fn c5_pair_correlation_phenomenology() {
    let mut detail = String::new();
    let mut pass = true;
    for (delta, range) in [(-0.02, 1..=1), (-0.15, 7..=13)] {
        let p = params(|r| r.delta = delta);
        for model in [Model::Spin, Model::Full] {
            let am = argmax_alpha(&ground_p_pair(p, model));
            pass &= range.contains(&am);
            detail += &format!("δ={delta} {model}: argmax {am}; ");
        }
    }
    let spin = spin_drift(1);
    let single = size_drift(1, -0.02, Model::Single);
    pass &= spin < 0.01 && single > 0.05;
    detail += &format!("drift 60→80: spin {spin:.2e} (< 0.01), single {single:.2e} (> 0.05)");
    report("5", pass, detail);
}

#[test]
fn c6_loss_estimates() {
    let a = loss_estimates(&SystemParams::default(), 2e-2).unwrap();
    let b = loss_estimates(&params(|r| r.delta = -0.15), 5e-2).unwrap();
    let within = |v: f64, t: f64| ((v - t) / t).abs() <= 0.1;
    let pass = within(a.p_ph, 5e-3) && within(b.p_ph, 2e-3) && within(a.lifetime(), 1e4) && within(b.lifetime(), 1e4);
    report(
        "6",
        pass,
        format!("p_ph {:.3e}, {:.3e}; 1/Γ_c {:.0}, {:.0}", a.p_ph, b.p_ph, a.lifetime(), b.lifetime()),
    );
}

#[test]
fn c7a_operator_string_equality() {
    let mut worst: f64 = 0.0;
    for n_e in 2..=8 {
        let sc = Scenario::new(params(|r| (r.n_cavities, r.n_qubits) = (101, n_e))).unwrap();
        let c = sc.couplings().unwrap();
        let p = sc.params();
        let single = operator_string_h_single(&c.w).unwrap();
        let pair = operator_string_h_pair(n_e, &c.y).unwrap();
        let spin = Mat::from_fn(single.nrows(), single.ncols(), |a, b| single[(a, b)] + pair[(a, b)]);
        let tilde = operator_string_h_tilde_single(&c.w).unwrap();
        worst = worst
            .max(max_abs_diff(real(&build_h_single(p, &c.w)), &single))
            .max(max_abs_diff(real(&build_h_pair(p, &c.y)), &pair))
            .max(max_abs_diff(real(&sc.hamiltonian(Model::Spin).unwrap()), &spin))
            .max(max_abs_diff(real(&build_h_tilde_single(p, &c.w)), &tilde));
    }
    report("7a", worst <= 1e-12, format!("max |structured − operator string| = {worst:.2e} over N_e = 2..8"));
}

#[test]
fn c7b_bath_two_photon_sector() {
    let p = params(|r| (r.n_cavities, r.n_qubits) = (41, 4));
    let sys = ArraySystem::new(p).unwrap();
    let spectrum = two_photon_sector_spectrum(&p).unwrap();
    let mut worst: f64 = 0.0;
    let mut energies: Vec<f64> = sys.bound_states.iter().map(|s| s.energy).collect();
    energies.sort_by(f64::total_cmp);
    for group in clusters(&energies, 1e-12) {
        // every member of a degenerate group needs its own sector eigenvalue
        let mut near: Vec<f64> = spectrum.iter().map(|e| (e - group.0).abs()).collect();
        near.sort_by(f64::total_cmp);
        worst = worst.max(near[group.1 - 1]);
    }
    let big = ArraySystem::new(SystemParams::default()).unwrap();
    let zero = &big.bound_states[big.grid.zero_index()];
    let closed = 2.0 * big.params.omega_c - (big.params.u.powi(2) + 16.0).sqrt();
    let e0b_err = (zero.energy - closed).abs();
    report(
        "7b",
        worst <= 1e-9 && e0b_err <= 1e-9,
        format!("max |E_Kb − sector eigenvalue| = {worst:.2e} (N = 41); |E_0b − closed form| = {e0b_err:.2e} (N = 501)"),
    );
}

#[test]
fn c7c_truncation_oracle() {
    let sc = Scenario::new(params(|r| (r.n_cavities, r.n_qubits) = (41, 4))).unwrap();
    let full = eigensolve(&sc.hamiltonian(Model::Full).unwrap(), EigenRequest::Lowest(5)).unwrap();
    let oracle = eigensolve(&sc.hamiltonian(Model::Oracle).unwrap(), EigenRequest::Lowest(5)).unwrap();
    let worst = full.energies.iter().zip(&oracle.energies).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    report("7c", worst <= 1e-4, format!("max |E_full − E_oracle| over lowest 5 = {worst:.2e}"));
}

#[test]
fn c7d_elimination_chain() {
    let full = default_full();
    let adia = {
        let _guard = HEAVY.lock().unwrap_or_else(|e| e.into_inner());
        let h = Scenario::new(SystemParams::default()).unwrap().hamiltonian(Model::Adia1).unwrap();
        eigensolve(&h, EigenRequest::Lowest(10)).unwrap()
    };
    let spin = &default_spin().decomp;
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        let (f, a, s) = (full.energies[i], adia.energies[i], spin.energies[i]);
        worst = worst.max(rel(f, s)).max(rel(a, s)).max(rel(f, a));
    }
    let photonic = (0..10).map(|i| photonic_fraction(&full.basis, &full.vector(i)).unwrap()).fold(0.0, f64::max);
    report(
        "7d",
        worst <= 0.05 && photonic < 0.1,
        format!(
            "max relative spread {worst:.4} (ground: full {:.6}, adia1 {:.6}, spin {:.6}); max photonic fraction {photonic:.4}",
            full.energies[0], adia.energies[0], spin.energies[0]
        ),
    );
}

#[test]
fn c7e_structural_invariants() {
    let run = default_spin();
    let sc = &run.scenario;
    let c: &EffectiveCouplings = sc.couplings().unwrap();
    let p = sc.params();

    let mut herm: f64 = 0.0;
    for model in [Model::Spin, Model::Single, Model::TildeSingle, Model::Adia0, Model::Adia1, Model::Full] {
        let h = sc.hamiltonian(model).unwrap();
        herm = herm.max(h.hermiticity_error() / h.max_abs().max(f64::MIN_POSITIVE));
    }

    let y_evd = c.y.self_adjoint_eigen(Side::Lower).unwrap();
    let y_scale = (0..c.y.nrows()).map(|a| c.y[(a, a)].abs()).fold(0.0, f64::max);
    let y_top = (0..c.y.nrows()).map(|i| y_evd.S().column_vector()[i]).fold(f64::NEG_INFINITY, f64::max);

    let pairs = &sc.system.pairs;
    let mut trans: f64 = 0.0;
    for (i, j) in pairs.pairs().filter(|&(_, j)| j < 60) {
        for (l, h) in pairs.pairs().filter(|&(_, h)| h < 60) {
            let a = c.y[(pairs.index(i, j), pairs.index(l, h))];
            let b = c.y[(pairs.index(i + 1, j + 1), pairs.index(l + 1, h + 1))];
            trans = trans.max((a - b).abs() / y_scale);
        }
    }

    let single = eigensolve(&build_h_single(p, &c.w), EigenRequest::All).unwrap();
    let tilde = eigensolve(&build_h_tilde_single(p, &c.w), EigenRequest::All).unwrap();
    let upshift = single.energies.iter().zip(&tilde.energies).all(|(s, t)| s >= t);

    let v = minimize_variational(&run.h, 10).unwrap();
    let var_ok = v.energies.iter().all(|&e| e >= run.decomp.energies[0]);

    let indices: Vec<usize> = (0..40).collect();
    let first = first_order_perturbation(&single, &c.y, &indices).unwrap();
    let first_ok = first.iter().all(|l| l.first <= 0.0);

    let pass = herm <= 1e-12 && y_top <= 1e-10 * y_scale && trans <= 1e-10 && upshift && var_ok && first_ok;
    report(
        "7e",
        pass,
        format!(
            "hermiticity {herm:.1e}; max eig(Y)/|Y| {:.1e}; translation {trans:.1e}; upshift {upshift}; E_exact ≤ E_var {var_ok}; E1 ≤ 0 {first_ok}",
            y_top / y_scale
        ),
    );
}

#[test]
fn inv_variational_orthogonality() {
    let run = default_spin();
    let v = minimize_variational(&run.h, 10).unwrap();
    let gram = v.gram();
    let mut worst: f64 = 0.0;
    for a in 0..gram.nrows() {
        for b in 0..gram.ncols() {
            if a != b {
                worst = worst.max(gram[(a, b)].abs());
            }
        }
    }
    report("inv1", worst < 1e-10, format!("max |⟨c_n|c_m⟩|, n ≠ m ≤ 10, at L_r {:.3}: {worst:.3e}", v.length));
}

#[test]
fn inv_g_toggle() {
    let _guard = HEAVY.lock().unwrap_or_else(|e| e.into_inner());
    let sc = Scenario::new(SystemParams::default()).unwrap();
    let e0 = eigensolve(&sc.hamiltonian(Model::Adia0).unwrap(), EigenRequest::Lowest(1)).unwrap().energies[0];
    let e1 = eigensolve(&sc.hamiltonian(Model::Adia1).unwrap(), EigenRequest::Lowest(1)).unwrap().energies[0];
    let shift = ((e0 - e1) / e1).abs();
    report("inv2", shift < 0.01, format!("lowest eigenvalue with G {e0:.6}, without {e1:.6}, relative shift {shift:.4}"));
}
