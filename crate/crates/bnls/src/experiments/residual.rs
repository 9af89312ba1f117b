//! Residual structure of the random-resonant decomposition: along a cutoff
//! ladder with pathwise-nested data, `v^N = 𝒥_N^ω(u^N) - S(t) u_{0,N}`
//! stays bounded while the data mass grows linearly, and consecutive
//! residual differences contract.

use anyhow::{bail, Result};
use bnls_core::flow::{
    evolve_truncated, gauge_random, linear_propagate, resonant_flow_exact, FlowSpec, FlowVariant,
    GaugeDirection,
};
use bnls_core::random::GaussianEnsemble;
use bnls_core::SpectralField;

use crate::report::{ExperimentReport, RawTable, Verdict};
use crate::stats;

use super::{par_samples, split_failures, StudySpec};

/// Resolved-regime step scaled to the rung (`dt·4N⁴` grows slowly with `N`
/// following the measured error constant).
fn rung_dt(cutoff: usize) -> f64 {
    let x = match cutoff {
        0..=9 => 1.5,
        10..=20 => 8.0,
        21..=40 => 16.0,
        _ => 40.0,
    };
    x / (4.0 * (cutoff as f64).powi(4))
}

struct SampleOut {
    /// Per rung: (sup_t ‖v^N‖, data mass, residuals at the sampled times).
    sup_v: Vec<f64>,
    mass0: Vec<f64>,
    v_fields: Vec<Vec<SpectralField>>,
    /// Cross-check: ‖u^N(t) - z^ω_N(t)‖ at the terminal time equals the
    /// gauged residual there (the random gauge is an isometry).
    ungauged_gap: Vec<f64>,
}

pub fn run(spec: &StudySpec, config_echo: String) -> Result<ExperimentReport> {
    let ladder = spec.cutoffs.clone();
    if ladder.len() < 3 {
        bail!("residual study needs a cutoff ladder of at least 3 rungs");
    }
    let delta = spec.delta;
    let n_checkpoints = 10usize;

    let runs = par_samples(spec.samples, |i| {
        let seed = spec.trajectory_seed(i);
        let mut sup_v = Vec::with_capacity(ladder.len());
        let mut mass0 = Vec::with_capacity(ladder.len());
        let mut v_fields = Vec::with_capacity(ladder.len());
        let mut ungauged_gap = Vec::with_capacity(ladder.len());
        for &cutoff in &ladder {
            // nested data: one mode-addressed ensemble per sample
            let ens = GaussianEnsemble::new(seed, cutoff, 0.0);
            let f0 = ens.field();
            let dt = rung_dt(cutoff);
            let raw = (delta / dt).ceil() as usize;
            let fs = FlowSpec::new(FlowVariant::Renormalized, cutoff, dt, delta)
                .with_stride(raw.div_ceil(n_checkpoints))
                .with_halving_tol(1e-3);
            let traj = evolve_truncated(&f0, &fs, None)?;
            let gauged = gauge_random(&traj, &ens, Some(cutoff), GaugeDirection::Forward)?;
            let mut sup = 0.0f64;
            let mut vs = Vec::with_capacity(gauged.times.len());
            for (&t, w) in gauged.times.iter().zip(gauged.states.iter()) {
                let v = w - &linear_propagate(&f0, t);
                sup = sup.max(v.mass().sqrt());
                vs.push(v);
            }
            // un-gauged route: u^N - z^ω_N has the same norms
            let t_last = *traj.times.last().unwrap();
            let direct = (traj.states.last().unwrap() - &resonant_flow_exact(&f0, t_last))
                .mass()
                .sqrt();
            ungauged_gap.push((direct - vs.last().unwrap().mass().sqrt()).abs());
            sup_v.push(sup);
            mass0.push(f0.mass());
            v_fields.push(vs);
        }
        Ok(SampleOut { sup_v, mass0, v_fields, ungauged_gap })
    });
    let (runs, failures) = split_failures(runs);
    if runs.len() < 2 {
        bail!("all residual trajectories failed");
    }

    let mut report = ExperimentReport::new(spec.clone(), config_echo);
    report.cell("integrator_failures", failures as f64);
    report.verdict(Verdict::less(
        "integrator_failure_fraction",
        failures as f64 / spec.samples as f64,
        0.01 + 1e-9,
    ));

    // (a) sup_t ‖v^N‖ bounded along the ladder
    let mut sup_medians = Vec::new();
    for (k, &n) in ladder.iter().enumerate() {
        let vals: Vec<f64> = runs.iter().map(|r| r.sup_v[k]).collect();
        let med = stats::median(&vals)?;
        sup_medians.push(med);
        report.cell(format!("N{}.sup_v_median", n), med);
        let mass_med = stats::median(&runs.iter().map(|r| r.mass0[k]).collect::<Vec<_>>())?;
        report.cell(format!("N{}.data_mass_median", n), mass_med);
        report.cell(format!("N{}.data_mass_over_modes", n), mass_med / (2.0 * n as f64 + 1.0));
    }
    let ratio = sup_medians.iter().cloned().fold(f64::MIN, f64::max)
        / sup_medians.iter().cloned().fold(f64::MAX, f64::min);
    report.cell("sup_v_ladder_ratio", ratio);
    report.verdict(Verdict::less("sup_v_bounded", ratio, spec.thresholds.ladder_ratio));

    // the data mass tracks 2N+1 while v stays bounded
    for (k, &n) in ladder.iter().enumerate() {
        let med = stats::median(&runs.iter().map(|r| r.mass0[k]).collect::<Vec<_>>())?;
        let rel = med / (2.0 * n as f64 + 1.0);
        report.verdict(Verdict::less(
            &format!("N{}.mass_tracks_mode_count", n),
            (rel - 1.0).abs(),
            0.25,
        ));
    }

    // (b) median sup_t ‖v^{2N} - v^N‖ strictly decreasing along the ladder
    let mut diff_medians = Vec::new();
    for k in 0..ladder.len() - 1 {
        let vals: Vec<f64> = runs
            .iter()
            .map(|r| {
                let lo = &r.v_fields[k];
                let hi = &r.v_fields[k + 1];
                lo.iter()
                    .zip(hi.iter())
                    .map(|(a, b)| b.l2_distance(a))
                    .fold(0.0f64, f64::max)
            })
            .collect();
        let med = stats::median(&vals)?;
        diff_medians.push(med);
        report.cell(format!("diff.N{}_to_N{}", ladder[k], ladder[k + 1]), med);
    }
    let decreasing = diff_medians.windows(2).all(|w| w[1] < w[0]);
    report.verdict(Verdict::greater(
        "residual_differences_strictly_decreasing",
        if decreasing { 1.0 } else { 0.0 },
        0.5,
    ));

    // (c) gauge-isometry consistency between the two residual routes
    let worst_gap = runs
        .iter()
        .flat_map(|r| r.ungauged_gap.iter().cloned())
        .fold(0.0f64, f64::max);
    report.cell("ungauged_route_max_gap", worst_gap);
    report.verdict(Verdict::less("ungauged_route_consistency", worst_gap, 1e-9));

    let rows = runs
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = vec![i as f64];
            row.extend(r.sup_v.iter());
            row.extend(r.mass0.iter());
            row
        })
        .collect();
    let mut header = vec!["sample".to_string()];
    header.extend(ladder.iter().map(|n| format!("sup_v_N{}", n)));
    header.extend(ladder.iter().map(|n| format!("mass_N{}", n)));
    report.raw.push(RawTable { name: "residual_ladder".into(), header, rows });
    Ok(report)
}
