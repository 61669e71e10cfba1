//! Symmetries and structural properties of the scheme and its outputs.

use supercrit::config::{CaseId, RawConfig, SimulationConfig};
use supercrit::diagnostics::{simulate, DiagnosticsOptions};
use supercrit::initial::{make_case, CaseSpec, RadialFn};
use supercrit::output::series_to_csv;
use supercrit::solver::{first_step, run, step, FirstStepMode, StencilCoefficients};

fn small_config(case: CaseId, d: u32, dr: f64, t_final: f64) -> SimulationConfig {
    let mut raw = RawConfig::desk(case, d);
    raw.dr = dr;
    raw.dt = dr / 4.0;
    raw.t_final = t_final;
    raw.snapshot_times = vec![0.0, t_final / 2.0, t_final];
    raw.validate().unwrap()
}

#[test]
fn negated_data_give_exactly_negated_solution() {
    for d in [3u32, 5] {
        for case_id in CaseId::LIBRARY {
            let cfg = small_config(case_id, d, 0.01, 1.0);
            let case = make_case(case_id, d).unwrap();
            for mode in [FirstStepMode::PaperFaithful, FirstStepMode::SecondOrder] {
                let a = run(&cfg, &case, mode, &mut []).unwrap();
                let b = run(&cfg, &case.negated(), mode, &mut []).unwrap();
                for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
                    for (x, y) in sa.field.values().iter().zip(sb.field.values()) {
                        assert!(*x == -*y, "{case_id} d = {d}: {x} vs {y}");
                    }
                }
            }
        }
    }
}

#[test]
fn boundary_node_stays_exactly_zero() {
    let cfg = small_config(CaseId::Ring, 3, 0.02, 3.0);
    let mut raw = cfg.raw().clone();
    raw.r_max = 4.0;
    let cfg = raw.validate().unwrap();
    // Ring data tapered to vanish at r = 4.
    let case = make_case(CaseId::Ring, 3).unwrap();
    let cut = |f: RadialFn| RadialFn::new(move |r| f.eval(r) * (16.0 - r * r).max(0.0).powi(3) / 4096.0);
    let case = CaseSpec { case_id: CaseId::Custom, u0: cut(case.u0.clone()), u1: RadialFn::zero() };
    let (u0, u1) = case.sample(cfg.grid()).unwrap();
    let coeffs = StencilCoefficients::new(&cfg);
    let mut state = first_step(&u0, &u1, &cfg, FirstStepMode::PaperFaithful).unwrap();
    assert_eq!(*state.u_curr().values().last().unwrap(), 0.0);
    for _ in 0..cfg.n_steps() {
        step(&mut state, &coeffs).unwrap();
        assert_eq!(*state.u_next().unwrap().values().last().unwrap(), 0.0);
    }
}

#[test]
fn time_reversal_recovers_initial_levels() {
    let cfg = small_config(CaseId::Gaussian, 3, 0.01, 5.0);
    let case = make_case(CaseId::Gaussian, 3).unwrap();
    let (u0, u1) = case.sample(cfg.grid()).unwrap();
    let coeffs = StencilCoefficients::new(&cfg);
    let start = first_step(&u0, &u1, &cfg, FirstStepMode::SecondOrder).unwrap();
    let (level0, level1) = (start.u_prev().clone(), start.u_curr().clone());

    let mut state = start;
    for _ in 0..1000 {
        step(&mut state, &coeffs).unwrap();
    }
    let mut back = state.reversed().unwrap();
    for _ in 0..1000 {
        step(&mut back, &coeffs).unwrap();
    }
    let scale = level0.values().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let err = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    assert!(err(back.u_curr().values(), level1.values()) <= 1e-8 * scale);
    assert!(err(back.u_next().unwrap().values(), level0.values()) <= 1e-8 * scale);
}

#[test]
fn disturbances_respect_unit_speed() {
    // Smooth bump supported in r < 4.
    let bump = RadialFn::new(|r| if r < 4.0 { 3.0 * (1.0 - r * r / 16.0).powi(6) } else { 0.0 });
    for d in [3u32, 5] {
        let cfg = small_config(CaseId::Gaussian, d, 0.01, 4.0);
        let case = CaseSpec { case_id: CaseId::Custom, u0: bump.clone(), u1: RadialFn::zero() };
        let out = run(&cfg, &case, FirstStepMode::PaperFaithful, &mut []).unwrap();
        for snap in &out.snapshots {
            let front = 5.0 + snap.t;
            for (j, &v) in snap.field.values().iter().enumerate() {
                let r = j as f64 * cfg.dr();
                if r > front {
                    assert!(v.abs() < 1e-10, "d = {d}, t = {}, r = {r}: {v:e}", snap.t);
                }
            }
        }
    }
}

#[test]
fn series_csv_is_reproducible_across_thread_counts() {
    let cfg = small_config(CaseId::OscGaussian, 5, 0.01, 0.5);
    let case = make_case(CaseId::OscGaussian, 5).unwrap();
    let csv = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let sim = simulate(&cfg, &case, &DiagnosticsOptions::full(&cfg)).unwrap();
            series_to_csv(&sim.series)
        })
    };
    let a = csv(1);
    assert_eq!(a, csv(1));
    assert_eq!(a, csv(3));
    assert_eq!(a.lines().count(), 12);
}
