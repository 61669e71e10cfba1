use rayon::prelude::*;
use supercrit::config::{CaseId, RawConfig};
use supercrit::diagnostics::{
    convergence_study, coupled_time_step, simulate, truncation_study, ConvergenceReport,
    DiagnosticsOptions,
};
use supercrit::initial::make_case;
use supercrit::FirstStepMode;

use crate::reference::{convergence_error, energy_table, TABLE_PROFILE};
use crate::{exit_code_for, Budget, Study, VerifyArgs, EXIT_FAILURE};

pub const ORDER_RANGE: (f64, f64) = (1.85, 2.15);
/// Levels `20 / N`; the middle one is the published `dr = 0.0098`.
pub const CONVERGENCE_LEVELS: [f64; 3] = [2048.0, 4096.0, 8192.0];
pub const CONVERGENCE_T: f64 = 2.0;
const PAPER_DR: f64 = 4e-4;

fn base(budget: Budget, case: CaseId, d: u32) -> RawConfig {
    match budget {
        Budget::Paper => RawConfig::paper(case, d),
        Budget::Desk => RawConfig::desk(case, d),
    }
}

pub fn cmd_verify(args: &VerifyArgs) -> u8 {
    let d: u32 = args.dim.parse().expect("validated by clap");
    let result = match args.study {
        Study::Convergence => {
            convergence(d, args.budget, args.first_step.map_or(FirstStepMode::SecondOrder, Into::into))
        }
        Study::Truncation => {
            truncation(d, args.budget, args.first_step.map_or(FirstStepMode::PaperFaithful, Into::into))
        }
        Study::Energy => energy(d, args.budget, args.first_step.map_or(FirstStepMode::PaperFaithful, Into::into)),
    };
    match result {
        Ok(true) => {
            println!("verdict: PASS");
            0
        }
        Ok(false) => {
            println!("verdict: FAIL");
            EXIT_FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

/// The reference is `2^-12` on the paper budget and a quarter of the finest
/// level on the desk budget.
pub fn convergence_report(d: u32, budget: Budget, mode: FirstStepMode) -> supercrit::Result<ConvergenceReport> {
    let raw = RawConfig::paper(CaseId::Gaussian, d);
    let case = make_case(CaseId::Gaussian, d)?;
    let levels: Vec<f64> = CONVERGENCE_LEVELS.iter().map(|n| 20.0 / n).collect();
    let dr_ref = match budget {
        Budget::Paper => 2f64.powi(-12),
        Budget::Desk => levels[levels.len() - 1] / 4.0,
    };
    let reference = (dr_ref, coupled_time_step(dr_ref, CONVERGENCE_T));
    convergence_study(&raw, &case, CONVERGENCE_T, &levels, reference, mode)
}

fn convergence(d: u32, budget: Budget, mode: FirstStepMode) -> supercrit::Result<bool> {
    let rep = convergence_report(d, budget, mode)?;
    println!("convergence, gaussian data, d = {d}, t = {}, first step {}", rep.t_eval, mode.as_str());
    println!("reference dr = {:.6e}, dt = {:.6e}", rep.reference_dr, rep.reference_dt);
    println!("{:>12} {:>12} {:>12}", "dr", "dt", "l2 error");
    for l in &rep.levels {
        println!("{:>12.6e} {:>12.6e} {:>12.4e}", l.dr, l.dt, l.l2_error);
    }
    let published = convergence_error(d);
    if let Some(l) = rep.levels.iter().find(|l| (l.dr - 0.0098).abs() < 1e-4) {
        println!("error at dr = {:.4}: {:.4e} (published {:.2e}, ratio {:.2})", l.dr, l.l2_error, published, l.l2_error / published);
    }
    let ok = rep.order >= ORDER_RANGE.0 && rep.order <= ORDER_RANGE.1;
    println!("fitted order {:.4} (accepted {:?})", rep.order, ORDER_RANGE);
    Ok(ok)
}

fn truncation(d: u32, budget: Budget, mode: FirstStepMode) -> supercrit::Result<bool> {
    let raw = base(budget, CaseId::Gaussian, d);
    let case = make_case(CaseId::Gaussian, d)?;
    let times: Vec<f64> = TABLE_PROFILE.iter().map(|r| r.0).collect();
    let tab = truncation_study(&raw, &case, &[20.0, 30.0, 50.0], &times, &[0.0, 19.0], mode)?;
    println!("truncation, gaussian data, d = {d}, dr = {}, dt = {}", raw.dr, raw.dt);
    println!("{:>6} {:>6} {:>14} {:>14} {:>14}", "t", "R_max", "u(t,0)", "u(t,19)", "max|u|");
    for r in &tab.rows {
        println!("{:>6} {:>6} {:>14.8} {:>14.6e} {:>14.8}", r.t, r.r_max, r.probes[0], r.probes[1], r.linf);
    }
    if d == 3 {
        for &(t, u0, m) in &TABLE_PROFILE {
            println!("published t = {t}: u(t,0) = {u0}, max|u| = {m}");
        }
    }
    println!("max mismatch across R_max {:.3e}; max |u(t,19)| {:.3e}", tab.max_mismatch, tab.boundary_max);
    Ok(tab.clean)
}

fn energy(d: u32, budget: Budget, mode: FirstStepMode) -> supercrit::Result<bool> {
    let table = energy_table(d);
    // Both E(0) and the drift are O(dr^2) accurate, so desk bounds scale with dr^2.
    let scale = match budget {
        Budget::Paper => 1.0,
        Budget::Desk => (RawConfig::desk(CaseId::Gaussian, d).dr / PAPER_DR).powi(2),
    };
    let results: Vec<supercrit::Result<(f64, f64)>> = CaseId::LIBRARY
        .par_iter()
        .map(|&case_id| {
            let cfg = base(budget, case_id, d).validate()?;
            let case = make_case(case_id, d)?;
            let mut opts = DiagnosticsOptions::energy_only();
            opts.first_step = mode;
            let sim = simulate(&cfg, &case, &opts).map_err(|f| f.error)?;
            let e0 = sim.series.rows.first().map_or(f64::NAN, |r| r.energy);
            Ok((e0, sim.series.energy_drift()?))
        })
        .collect();
    let e0_tol = 1e-3 * scale;
    println!("energy, d = {d}, E(0) tolerance {e0_tol:.1e}, drift bound = 2 x published x {scale}");
    println!("{:>4} {:>16} {:>12} {:>12} {:>12} {:>5}", "case", "E(0)", "published", "drift", "bound", "ok");
    let mut all = true;
    for (i, r) in results.into_iter().enumerate() {
        let (e0, drift) = r?;
        let (pub_e0, pub_drift) = table[i];
        let bound = 2.0 * pub_drift * scale;
        let ok = ((e0 - pub_e0) / pub_e0).abs() <= e0_tol && drift <= bound;
        all &= ok;
        println!("{:>4} {:>16.8} {:>12} {:>12.4e} {:>12.4e} {:>5}", i + 1, e0, pub_e0, drift, bound, ok);
    }
    Ok(all)
}
