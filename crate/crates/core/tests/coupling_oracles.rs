use faer::Mat;
use kerr_lattice::bath::matrix_element_mb;
use kerr_lattice::couplings::*;
use kerr_lattice::lattice::QubitPositions;
use kerr_lattice::{c64, ArraySystem, RawParams, SystemParams};

fn small_system(n: usize, n_e: usize, x: usize) -> ArraySystem {
    let p = SystemParams::new(RawParams { n_cavities: n, n_qubits: n_e, spacing: x, ..Default::default() }).unwrap();
    ArraySystem::new(p).unwrap()
}

fn literal_f(sys: &ArraySystem) -> Mat<c64> {
    let ks = sys.grid.values();
    let dk = &sys.bands.single_detunings;
    let n = sys.grid.len() as f64;
    let pairs: Vec<(usize, usize)> = sys.pairs.pairs().collect();
    Mat::from_fn(pairs.len(), ks.len(), |p, kk| {
        let (i, j) = pairs[p];
        let (ni, nj) = (sys.positions.site(i) as i64, sys.positions.site(j) as i64);
        let state = &sys.bound_states[kk];
        let mut acc = c64::new(0.0, 0.0);
        for (k, &kv) in ks.iter().enumerate() {
            let a = c64::from_polar(1.0, -kv * ni as f64) * matrix_element_mb(kv, nj, state).conj();
            let b = c64::from_polar(1.0, -kv * nj as f64) * matrix_element_mb(kv, ni, state).conj();
            acc += (a + b) / dk[k];
        }
        -acc / n
    })
}

fn literal_g(sys: &ArraySystem) -> Mat<c64> {
    let ks = sys.grid.values();
    let dk = &sys.bands.single_detunings;
    let n = sys.grid.len() as f64;
    Mat::from_fn(ks.len(), ks.len(), |a, b| {
        let mut acc = c64::new(0.0, 0.0);
        for &site in sys.positions.sites() {
            for (k, &kv) in ks.iter().enumerate() {
                let m1 = matrix_element_mb(kv, site as i64, &sys.bound_states[a]);
                let m2 = matrix_element_mb(kv, site as i64, &sys.bound_states[b]);
                acc += m1.conj() * m2 / dk[k];
            }
        }
        -acc / n
    })
}

fn quadruple_loop_y(sys: &ArraySystem, f: &Mat<c64>) -> Mat<f64> {
    let g4 = sys.params.g.powi(4);
    let n = sys.grid.len() as f64;
    let db = &sys.bands.bound_detunings;
    Mat::from_fn(f.nrows(), f.nrows(), |p, q| {
        let s: c64 = (0..f.ncols()).map(|k| f[(p, k)] * f[(q, k)].conj() / db[k]).sum();
        -g4 / n * s.re
    })
}

fn max_diff_c(a: &Mat<c64>, b: &Mat<c64>) -> f64 {
    let mut m = 0.0f64;
    for r in 0..a.nrows() {
        for c in 0..a.ncols() {
            m = m.max((a[(r, c)] - b[(r, c)]).norm());
        }
    }
    m
}

#[test]
fn f_fast_path_matches_literal_sum() {
    for x in [1, 2] {
        let sys = small_system(61, 6, x);
        let fast = compute_f(&sys).unwrap();
        let lit = literal_f(&sys);
        let scale = (0..lit.nrows()).map(|r| lit[(r, 0)].norm()).fold(0.0, f64::max);
        assert!(max_diff_c(&fast, &lit) < 1e-12 * scale.max(1.0));
    }
}

#[test]
fn g_fast_path_matches_literal_sum() {
    let sys = small_system(41, 5, 1);
    let fast = compute_g_matrix(&sys).unwrap();
    let lit = literal_g(&sys);
    assert!(max_diff_c(&fast, &lit) < 1e-12);
    for a in 0..fast.nrows() {
        assert!(fast[(a, a)].im.abs() < 1e-14);
        assert!(fast[(a, a)].re < 0.0);
        for b in 0..fast.ncols() {
            assert!((fast[(a, b)] - fast[(b, a)].conj()).norm() < 1e-12);
        }
    }
}

#[test]
fn y_gemm_matches_quadruple_loop() {
    let sys = small_system(81, 8, 1);
    let f = compute_f(&sys).unwrap();
    let y = compute_y(&sys.params, &f, &sys.bands).unwrap();
    let reference = quadruple_loop_y(&sys, &f);
    let scale = y[(0, 0)].abs();
    for p in 0..y.nrows() {
        for q in 0..y.ncols() {
            assert!((y[(p, q)] - reference[(p, q)]).abs() < 1e-12 * scale);
        }
    }
}

#[test]
fn y_is_negative_semidefinite_and_structured() {
    let sys = small_system(301, 20, 1);
    let c = EffectiveCouplings::compute(&sys, false).unwrap();
    let y = &c.y;
    for p in 0..y.nrows() {
        assert!(y[(p, p)] < 0.0);
        for q in 0..y.ncols() {
            assert_eq!(y[(p, q)], y[(q, p)]);
            assert!(y[(p, q)].abs() <= (y[(p, p)] * y[(q, q)]).sqrt() * (1.0 + 1e-12));
        }
    }
    let evd = y.self_adjoint_eigen(faer::Side::Lower).unwrap();
    let top = (0..y.nrows()).map(|i| evd.S().column_vector()[i]).fold(f64::NEG_INFINITY, f64::max);
    assert!(top < 1e-12 * y[(0, 0)].abs());

    // block-diagonal magnitude at the array centre decreases with r
    let centre = |r: usize| {
        let i = 10 - r / 2;
        let p = sys.pairs.index(i, i + r);
        y[(p, p)].abs()
    };
    for r in 1..8 {
        assert!(centre(r) > centre(r + 1), "r = {r}");
    }

    // translation invariance
    let b = &sys.pairs;
    for s in 1..4 {
        for (i, j, l, h) in [(1, 2, 3, 4), (2, 5, 1, 3), (4, 7, 6, 9)] {
            let a = y[(b.index(i, j), b.index(l, h))];
            let shifted = y[(b.index(i + s, j + s), b.index(l + s, h + s))];
            assert!((a - shifted).abs() < 1e-10 * a.abs().max(1e-300));
        }
    }

    // most negative on the block diagonal within r = r' = 1
    let row = b.index(10, 11);
    let block = b.block(1);
    let best = block.clone().min_by(|&u, &v| y[(row, u)].total_cmp(&y[(row, v)])).unwrap();
    assert_eq!(best, row);
}

#[test]
fn f_symmetry_and_shift_covariance() {
    let sys = small_system(61, 6, 1);
    let f = compute_f(&sys).unwrap();
    let ks = sys.grid.values();
    let shifted = ArraySystem::with_positions(sys.params, sys.positions.shifted(3)).unwrap();
    let fs = compute_f(&shifted).unwrap();
    for p in 0..f.nrows() {
        for (kk, &k) in ks.iter().enumerate() {
            let expected = f[(p, kk)] * c64::from_polar(1.0, -k * 3.0);
            assert!((fs[(p, kk)] - expected).norm() < 1e-12);
        }
    }
    // exchanging the two qubits leaves the literal sum unchanged
    let swapped = QubitPositions::from_sites(sys.positions.sites().iter().rev().copied().collect());
    let sw = ArraySystem::with_positions(sys.params, swapped).unwrap();
    let f_sw = compute_f(&sw).unwrap();
    let (i, j) = (2, 5);
    let p = sys.pairs.index(i, j);
    let p_sw = sys.pairs.index(7 - j, 7 - i);
    for kk in 0..ks.len() {
        assert!((f[(p, kk)] - f_sw[(p_sw, kk)]).norm() < 1e-12);
    }
}

#[test]
fn lattice_sum_converges_to_closed_form() {
    let sys = small_system(501, 10, 1);
    let closed = compute_w(&sys.params, &sys.positions).unwrap();
    let sum = lattice_sum_w(&sys.params, &sys.positions, &sys.grid, &sys.bands.single_detunings).unwrap();
    for a in 0..10 {
        for b in 0..10 {
            assert!((closed[(a, b)] - sum[(a, b)]).abs() < 1e-12 * closed[(0, 0)].abs());
        }
    }
}

#[test]
fn hopping_trends_toward_the_band_edge() {
    let at = |delta: f64| hopping_profile(&SystemParams::default().with(|r| r.delta = delta).unwrap()).unwrap();
    let (a, b) = (at(-0.2), at(-0.02));
    assert!(b.onsite.abs() > a.onsite.abs());
    assert!(b.length > a.length);
}

#[test]
fn zero_coupling_vanishes() {
    let p = SystemParams::new(RawParams { n_cavities: 61, n_qubits: 6, g: 0.0, ..Default::default() }).unwrap();
    let sys = ArraySystem::new(p).unwrap();
    let c = EffectiveCouplings::compute(&sys, true).unwrap();
    assert!((0..6).all(|a| (0..6).all(|b| c.w[(a, b)] == 0.0)));
    assert!((0..c.y.nrows()).all(|a| (0..c.y.ncols()).all(|b| c.y[(a, b)] == 0.0)));
}

#[test]
fn y_converges_in_ring_length() {
    let y = |n: usize| {
        let sys = small_system(n, 60, 1);
        EffectiveCouplings::compute(&sys, false).unwrap().y
    };
    let (a, b) = (y(501), y(701));
    let mut worst = 0.0f64;
    for p in 0..a.nrows() {
        for q in 0..a.ncols() {
            if a[(p, q)].abs() > 1e-8 * a[(0, 0)].abs() {
                worst = worst.max((a[(p, q)] - b[(p, q)]).abs() / a[(p, q)].abs());
            }
        }
    }
    assert!(worst < 1e-6, "worst relative change {worst:e}");
}
