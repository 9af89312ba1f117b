//! Second moments of random multilinear sums over the non-resonant
//! hyperplane: Monte Carlo estimates of `E|Σ_n|²` for
//! `Σ_n = (Π_j k_j!)⁻¹ Σ_{Γ(n)} c_{n̄} Π_{j∈A} |g_{n_j}|^{2k_j} g*_{n_j}`
//! against the exact pairing evaluation built from
//! `E[g^p ḡ^q] = δ_{pq} p!` mode by mode.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use num_traits::Float;

use crate::phase::PhaseTuple;
use crate::random::{derive_trajectory_seed, GaussianEnsemble};
use crate::C64;

/// Guard constant for the reported `C^{2k}·Σ|c|²` moment bound; generous
/// enough to dominate every tested pairing count at `k ≤ 3`.
pub const MOMENT_BOUND_C: f64 = 6.0;

/// `ks[j] = Some(k_j)` activates factor `j` (`j = 0, 2` contribute
/// `|g|^{2k} g`, `j = 1` contributes `|g|^{2k} ḡ`); `None` omits it.
pub type ActiveFactors = [Option<u32>; 3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub mc_mean: f64,
    pub mc_std_error: f64,
    /// Exact `E|Σ_n|²` by pairing enumeration.
    pub exact: f64,
    /// `C^{2k+2}·Σ|c|²` with the guard constant [`MOMENT_BOUND_C`].
    pub bound_rhs: f64,
}

fn factorial(k: u32) -> f64 {
    (1..=k as u64).map(|v| v as f64).product::<f64>().max(1.0)
}

fn factor_normalization(ks: &ActiveFactors) -> f64 {
    ks.iter().flatten().map(|&k| factorial(k)).product()
}

fn total_degree(ks: &ActiveFactors) -> u32 {
    ks.iter().flatten().sum()
}

/// One realization of `Σ_n` from an ensemble.
fn realize(coeffs: &[(PhaseTuple, C64)], ks: &ActiveFactors, ens: &GaussianEnsemble) -> C64 {
    let norm = factor_normalization(ks);
    let mut acc = C64::new(0.0, 0.0);
    for (tup, c) in coeffs {
        let modes = [tup.n1, tup.n2, tup.n3];
        let mut term = *c;
        for (j, k) in ks.iter().enumerate() {
            let Some(k) = k else { continue };
            let g = ens.g(modes[j]).expect("ensemble covers the tuple box");
            let mut f = g * g.norm_sqr().powi(*k as i32);
            if j == 1 {
                f = f.conj();
            }
            term *= f;
        }
        acc += term;
    }
    acc / norm
}

/// Accumulate the `(g, ḡ)` powers a tuple's factor product places on each
/// mode; `conjugated` swaps the powers (the second tuple of a pairing).
fn push_powers(
    powers: &mut BTreeMap<i64, (u32, u32)>,
    tup: &PhaseTuple,
    ks: &ActiveFactors,
    conjugated: bool,
) {
    let modes = [tup.n1, tup.n2, tup.n3];
    for (j, k) in ks.iter().enumerate() {
        let Some(k) = k else { continue };
        // |g|^{2k} g = g^{k+1} ḡ^k, |g|^{2k} ḡ = g^k ḡ^{k+1}
        let (mut p, mut q) = if j == 1 { (*k, *k + 1) } else { (*k + 1, *k) };
        if conjugated {
            core::mem::swap(&mut p, &mut q);
        }
        let e = powers.entry(modes[j]).or_insert((0, 0));
        e.0 += p;
        e.1 += q;
    }
}

/// Exact `E|Σ_n|²` over all tuple pairs.
pub fn exact_second_moment(coeffs: &[(PhaseTuple, C64)], ks: &ActiveFactors) -> f64 {
    let norm = factor_normalization(ks);
    let mut acc = C64::new(0.0, 0.0);
    for (t1, c1) in coeffs {
        for (t2, c2) in coeffs {
            let mut powers = BTreeMap::new();
            push_powers(&mut powers, t1, ks, false);
            push_powers(&mut powers, t2, ks, true);
            let mut moment = 1.0;
            for (_, (p, q)) in powers {
                if p != q {
                    moment = 0.0;
                    break;
                }
                moment *= factorial(p);
            }
            if moment != 0.0 {
                acc += *c1 * c2.conj() * moment;
            }
        }
    }
    (acc / (norm * norm)).re
}

/// Monte Carlo estimate of `E|Σ_n|²` with its exact pairing value and the
/// `C^{2k}`-type bound; fully reproducible from the seed.
pub fn multilinear_second_moment(
    coeffs: &[(PhaseTuple, C64)],
    ks: ActiveFactors,
    samples: usize,
    seed: u64,
) -> MomentEstimate {
    assert!(samples >= 2);
    let cover = coeffs
        .iter()
        .map(|(t, _)| t.n1.abs().max(t.n2.abs()).max(t.n3.abs()))
        .max()
        .unwrap_or(0) as usize;
    let mut vals = Vec::with_capacity(samples);
    for s in 0..samples {
        let ens = GaussianEnsemble::new(derive_trajectory_seed(seed, s as u64), cover, 0.0);
        vals.push(realize(coeffs, &ks, &ens).norm_sqr());
    }
    let mean = vals.iter().sum::<f64>() / samples as f64;
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (samples as f64 - 1.0);
    let sum_c2: f64 = coeffs.iter().map(|(_, c)| c.norm_sqr()).sum();
    let k = total_degree(&ks);
    MomentEstimate {
        mc_mean: mean,
        mc_std_error: (var / samples as f64).sqrt(),
        exact: exact_second_moment(coeffs, &ks),
        bound_rhs: MOMENT_BOUND_C.powi(2 * k as i32 + 2) * sum_c2,
    }
}
