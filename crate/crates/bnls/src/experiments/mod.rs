//! Monte Carlo studies over ensembles of truncated flows: invariance of
//! the white-noise law, convergence of gauged mollified solutions, the
//! random-resonant residual structure, probabilistic Strichartz scaling,
//! the energy-increment cancellation, and the two-scale decay of the
//! random functionals.
//!
//! Every study is reproducible bit-for-bit from `(seed, spec)`: trajectory
//! seeds derive from the master seed by index, parallel maps collect in
//! index order, and all reductions run sequentially afterwards.

use anyhow::{bail, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::report::ExperimentReport;

mod cancellation;
mod convergence;
mod invariance;
mod residual;
mod scaling;
mod tails;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyKind {
    Invariance,
    Convergence,
    Residual,
    Z1Scaling,
    Cancellation,
    FunctionalTails,
}

impl std::str::FromStr for StudyKind {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "invariance" => StudyKind::Invariance,
            "convergence" => StudyKind::Convergence,
            "residual" => StudyKind::Residual,
            "z1-scaling" => StudyKind::Z1Scaling,
            "cancellation" => StudyKind::Cancellation,
            "functional-tails" => StudyKind::FunctionalTails,
            other => bail!(
                "unknown study kind {:?} (expected invariance|convergence|residual|z1-scaling|cancellation|functional-tails)",
                other
            ),
        })
    }
}

/// Statistical pass/fail thresholds; all strictly positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// FDR level for per-mode multiple testing.
    pub fdr_level: f64,
    /// Allowed Benjamini-Hochberg rejections per cell.
    pub max_rejections: f64,
    /// Cross-mode correlation bound in units of `1/√M`.
    pub correlation_factor: f64,
    /// Max/min ratio of residual-size medians across the ladder.
    pub ladder_ratio: f64,
    /// Allowed deviation of the fitted scaling slope.
    pub slope_tolerance: f64,
    /// Cancellation-identity tolerance.
    pub cancellation_tol: f64,
    /// Iterated-Duhamel identity tolerance (and control minimum gap).
    pub duhamel_gap_tol: f64,
    pub control_gap_min: f64,
    /// Quadrature-order window for the grid-coarsening diagnostic.
    pub order_ratio_lo: f64,
    pub order_ratio_hi: f64,
    /// Minimum mode-wise modulus drift of the invariance power control.
    pub control_drift_min: f64,
    /// Two-scale functional decay: median ratio must exceed this.
    pub tail_ratio_min: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            fdr_level: 0.01,
            max_rejections: 1.0,
            correlation_factor: 4.0,
            ladder_ratio: 1.5,
            slope_tolerance: 0.1,
            cancellation_tol: 1e-5,
            duhamel_gap_tol: 1e-5,
            control_gap_min: 1e-2,
            order_ratio_lo: 6.0,
            order_ratio_hi: 60.0,
            control_drift_min: 0.1,
            tail_ratio_min: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySpec {
    pub kind: StudyKind,
    pub seed: u64,
    /// Monte Carlo sample count `M ≥ 2`.
    pub samples: usize,
    /// Frequency cutoffs: a single ambient cutoff or a ladder.
    pub cutoffs: Vec<usize>,
    /// Observation times.
    pub times: Vec<f64>,
    /// Data regularities `α ≥ 0` (swept by the scaling study).
    pub alphas: Vec<f64>,
    /// Local horizon / window scale `δ`.
    pub delta: f64,
    /// Mollification ladder (convergence study).
    pub scales: Vec<usize>,
    pub thresholds: Thresholds,
}

impl StudySpec {
    /// The reference parameters each study is normally run at.
    pub fn default_for(kind: StudyKind) -> Self {
        let base = StudySpec {
            kind,
            seed: 7,
            samples: 2,
            cutoffs: vec![],
            times: vec![],
            alphas: vec![0.0],
            delta: 0.05,
            scales: vec![],
            thresholds: Thresholds::default(),
        };
        match kind {
            StudyKind::Invariance => StudySpec {
                samples: 2000,
                cutoffs: vec![16],
                times: vec![0.25, 0.5, 1.0],
                ..base
            },
            StudyKind::Convergence => StudySpec {
                samples: 100,
                cutoffs: vec![256],
                times: vec![0.0025],
                scales: vec![4, 8, 16, 32, 64, 128],
                ..base
            },
            StudyKind::Residual => StudySpec {
                samples: 200,
                cutoffs: vec![8, 16, 32, 64],
                delta: 0.05,
                ..base
            },
            StudyKind::Z1Scaling => StudySpec {
                samples: 500,
                cutoffs: vec![1024],
                alphas: vec![0.0, 0.25],
                delta: 0.1,
                ..base
            },
            StudyKind::Cancellation => StudySpec {
                samples: 50,
                cutoffs: vec![12],
                times: vec![0.2],
                ..base
            },
            StudyKind::FunctionalTails => StudySpec {
                samples: 200,
                cutoffs: vec![16],
                delta: 0.2,
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < 2 {
            bail!("samples = {} must be at least 2", self.samples);
        }
        if self.cutoffs.is_empty() {
            bail!("at least one cutoff required");
        }
        if !(self.delta > 0.0) {
            bail!("delta must be positive");
        }
        if self.alphas.iter().any(|&a| a < 0.0) {
            bail!("alpha must be nonnegative");
        }
        let t = &self.thresholds;
        for (name, v) in [
            ("fdr_level", t.fdr_level),
            ("max_rejections", t.max_rejections),
            ("correlation_factor", t.correlation_factor),
            ("ladder_ratio", t.ladder_ratio),
            ("slope_tolerance", t.slope_tolerance),
            ("cancellation_tol", t.cancellation_tol),
            ("duhamel_gap_tol", t.duhamel_gap_tol),
            ("control_gap_min", t.control_gap_min),
            ("order_ratio_lo", t.order_ratio_lo),
            ("order_ratio_hi", t.order_ratio_hi),
            ("control_drift_min", t.control_drift_min),
            ("tail_ratio_min", t.tail_ratio_min),
        ] {
            if !(v > 0.0) {
                bail!("threshold {} must be positive, got {}", name, v);
            }
        }
        Ok(())
    }

    /// Seed for one trajectory of this study.
    pub fn trajectory_seed(&self, index: usize) -> u64 {
        bnls_core::random::derive_trajectory_seed(self.seed, index as u64)
    }
}

/// Run the study named by the spec.
pub fn run_study(spec: &StudySpec, config_echo: String) -> Result<ExperimentReport> {
    spec.validate()?;
    match spec.kind {
        StudyKind::Invariance => invariance::run(spec, config_echo),
        StudyKind::Convergence => convergence::run(spec, config_echo),
        StudyKind::Residual => residual::run(spec, config_echo),
        StudyKind::Z1Scaling => scaling::run(spec, config_echo),
        StudyKind::Cancellation => cancellation::run(spec, config_echo),
        StudyKind::FunctionalTails => tails::run(spec, config_echo),
    }
}

/// Parallel map over sample indices with order-stable collection. Failures
/// are carried per sample so studies can count rather than hide them.
pub(crate) fn par_samples<T: Send>(
    m: usize,
    f: impl Fn(usize) -> Result<T> + Sync,
) -> Vec<Result<T>> {
    (0..m).into_par_iter().map(|i| f(i)).collect()
}

/// Split results; the error count feeds the per-study failure cell.
pub(crate) fn split_failures<T>(results: Vec<Result<T>>) -> (Vec<T>, usize) {
    let mut ok = Vec::with_capacity(results.len());
    let mut failures = 0;
    for r in results {
        match r {
            Ok(v) => ok.push(v),
            Err(_) => failures += 1,
        }
    }
    (ok, failures)
}
