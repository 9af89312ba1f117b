//! Two-scale decay of the random functionals: medians of
//! `S_j(δ)/S_j(δ/2)` across white-noise samples stay above one for each of
//! the three functionals.

use anyhow::{bail, Result};
use bnls_core::random::GaussianEnsemble;
use bnls_core::restriction::{s_functional, ModulationKernel, SFunctionalParams};
use bnls_core::window::EtaCutoff;

use crate::report::{ExperimentReport, RawTable, Verdict};
use crate::stats;

use super::{par_samples, split_failures, StudySpec};

/// Regularity/modulation defaults for the functionals (`s` close to zero
/// from below, `b` close to one half from below).
pub const S_INDEX: f64 = -0.1;
pub const B_INDEX: f64 = 0.45;

pub fn run(spec: &StudySpec, config_echo: String) -> Result<ExperimentReport> {
    let box_size = spec.cutoffs[0];
    if box_size > 24 {
        bail!("functional box {} exceeds the supported size 24", box_size);
    }
    let delta = spec.delta;
    let window_hi = EtaCutoff::new(delta);
    let window_lo = EtaCutoff::new(delta / 2.0);
    let kernel_hi = ModulationKernel::new(&window_hi, B_INDEX);
    let kernel_lo = ModulationKernel::new(&window_lo, B_INDEX);
    let params = SFunctionalParams {
        s: S_INDEX,
        box_size,
        trunc: box_size,
        projections: [-1, -1, -1],
    };

    let runs = par_samples(spec.samples, |i| {
        let ens = GaussianEnsemble::new(spec.trajectory_seed(i), box_size, 0.0);
        let mut vals = [[0.0f64; 2]; 3];
        for j in 1..=3 {
            vals[j - 1][0] = s_functional(j, params, &kernel_hi, &ens)?;
            vals[j - 1][1] = s_functional(j, params, &kernel_lo, &ens)?;
        }
        Ok(vals)
    });
    let (runs, failures) = split_failures(runs);
    if runs.len() < 2 {
        bail!("all functional evaluations failed");
    }

    let mut report = ExperimentReport::new(spec.clone(), config_echo);
    report.cell("failures", failures as f64);
    report.cell("kernel_seam_error_hi", kernel_hi.seam_error);
    report.cell("kernel_seam_error_lo", kernel_lo.seam_error);

    let mut rows = Vec::with_capacity(runs.len());
    for (i, r) in runs.iter().enumerate() {
        let mut row = vec![i as f64];
        for v in r.iter() {
            row.push(v[0]);
            row.push(v[1]);
            row.push(v[0] / v[1].max(1e-300));
        }
        rows.push(row);
    }

    for j in 1..=3usize {
        let ratios: Vec<f64> = runs
            .iter()
            .map(|r| r[j - 1][0] / r[j - 1][1].max(1e-300))
            .collect();
        let med = stats::median(&ratios)?;
        report.cell(format!("S{}.delta_median", j), {
            let v: Vec<f64> = runs.iter().map(|r| r[j - 1][0]).collect();
            stats::median(&v)?
        });
        report.cell(format!("S{}.half_delta_median", j), {
            let v: Vec<f64> = runs.iter().map(|r| r[j - 1][1]).collect();
            stats::median(&v)?
        });
        report.cell(format!("S{}.two_scale_ratio_median", j), med);
        report.verdict(Verdict::greater(
            &format!("S{}.two_scale_decay", j),
            med,
            spec.thresholds.tail_ratio_min,
        ));
    }

    report.raw.push(RawTable {
        name: "functional_tails".into(),
        header: vec![
            "sample".into(),
            "S1_hi".into(),
            "S1_lo".into(),
            "S1_ratio".into(),
            "S2_hi".into(),
            "S2_lo".into(),
            "S2_ratio".into(),
            "S3_hi".into(),
            "S3_lo".into(),
            "S3_ratio".into(),
        ],
        rows,
    });
    Ok(report)
}
