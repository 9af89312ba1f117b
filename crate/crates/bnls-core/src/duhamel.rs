//! Energy increments and iterated Duhamel terms along gauged trajectories.
//!
//! The energy increment of mode `n`,
//! `ℰ_n(t) = -2 Re i ∫₀ᵗ Σ_{Γ(n)} e^{it'Ψ^ω_N} ŵ(n₁)ŵ̄(n₂)ŵ(n₃)ŵ̄(n) dt'`,
//! equals `|ŵ(n,t)|² - |g^N_n|²` along solutions of the gauged truncated
//! system; the quintic term reinserts it under one more Duhamel integral.
//!
//! In the interaction picture each `Γ(n)` summand is `e^{it(Ψ-Φ)}` times a
//! slowly varying product, so the time quadrature is composite Simpson on
//! the slow factor with the oscillation integrated exactly per panel
//! (plain composite Simpson is recovered verbatim at zero frequency).

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use num_traits::Float;

use crate::field::SpectralField;
use crate::nonlin::GaugeError;
use crate::phase::gamma_tuples;
use crate::phases::RandomPhaseSpec;
use crate::spacetime::{SpaceTimeError, SpaceTimeField};
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub enum DuhamelError {
    Gauge(GaugeError),
    Grid(SpaceTimeError),
    /// The quadrature needs the origin and the target on the sample grid.
    NeedsOrigin,
}

impl fmt::Display for DuhamelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DuhamelError::Gauge(e) => write!(f, "{}", e),
            DuhamelError::Grid(e) => write!(f, "{}", e),
            DuhamelError::NeedsOrigin => write!(f, "time grid must contain t = 0"),
        }
    }
}

impl core::error::Error for DuhamelError {}

impl From<GaugeError> for DuhamelError {
    fn from(e: GaugeError) -> Self {
        DuhamelError::Gauge(e)
    }
}

impl From<SpaceTimeError> for DuhamelError {
    fn from(e: SpaceTimeError) -> Self {
        DuhamelError::Grid(e)
    }
}

/// `∫_a^b σ^r e^{iωσ} dσ` for `r = 0, 1, 2`.
///
/// Uses the integration-by-parts recurrence when `|ω|·max(|a|,|b|)` is
/// comfortably away from zero and a truncated Taylor series otherwise (the
/// recurrence cancels catastrophically for small arguments).
fn oscillatory_moments(omega: f64, a: f64, b: f64) -> [C64; 3] {
    let scale = omega.abs() * a.abs().max(b.abs());
    if scale < 0.5 {
        let mut out = [C64::new(0.0, 0.0); 3];
        for (r, slot) in out.iter_mut().enumerate() {
            // Σ_m (iω)^m/m! (b^{r+m+1}-a^{r+m+1})/(r+m+1)
            let mut term = C64::new(1.0, 0.0);
            let mut acc = C64::new(0.0, 0.0);
            let mut pa = a.powi(r as i32 + 1);
            let mut pb = b.powi(r as i32 + 1);
            for m in 0..18 {
                acc += term * ((pb - pa) / (r as f64 + m as f64 + 1.0));
                term = term * C64::new(0.0, omega) / (m as f64 + 1.0);
                pa *= a;
                pb *= b;
            }
            *slot = acc;
        }
        out
    } else {
        let iw = C64::new(0.0, omega);
        let ea = C64::from_polar(1.0, omega * a);
        let eb = C64::from_polar(1.0, omega * b);
        let i0 = (eb - ea) / iw;
        let i1 = (eb * b - ea * a) / iw - i0 / iw;
        let i2 = (eb * b * b - ea * a * a) / iw - i1 * 2.0 / iw;
        [i0, i1, i2]
    }
}

/// Per-tuple quadrature weights: `∫ e^{iωσ} q(σ) dσ` over the half panel
/// `[-h, 0]` and the full panel `[-h, h]`, with `q` the quadratic through
/// the panel's three nodes, expressed as weights on `(p₀, p₁, p₂)`.
struct PanelRule {
    half: [C64; 3],
    full: [C64; 3],
}

impl PanelRule {
    fn new(omega: f64, h: f64) -> Self {
        let combine = |m: [C64; 3]| {
            // q(σ) = p₁ + σ(p₂-p₀)/(2h) + σ²(p₀-2p₁+p₂)/(2h²)
            let w0 = m[2] / (2.0 * h * h) - m[1] / (2.0 * h);
            let w1 = m[0] - m[2] / (h * h);
            let w2 = m[2] / (2.0 * h * h) + m[1] / (2.0 * h);
            [w0, w1, w2]
        };
        PanelRule {
            half: combine(oscillatory_moments(omega, -h, 0.0)),
            full: combine(oscillatory_moments(omega, -h, h)),
        }
    }
}

/// Cumulative `∫_{t₀}^{t_j} e^{iωt} p(t) dt` at every node of a uniform
/// grid `t_j = t₀ + jh`, fourth-order in `h` uniformly in `ω`.
fn filon_cumulative(omega: f64, t0: f64, h: f64, p: &[C64], out: &mut [C64]) {
    let n = p.len();
    debug_assert!(n >= 3);
    debug_assert_eq!(out.len(), n);
    let rule = PanelRule::new(omega, h);
    out[0] = C64::new(0.0, 0.0);
    let mut k = 0;
    while k + 2 < n {
        let tc = t0 + (k + 1) as f64 * h;
        let ph = C64::from_polar(1.0, omega * tc);
        let (p0, p1, p2) = (p[k], p[k + 1], p[k + 2]);
        let half = ph * (rule.half[0] * p0 + rule.half[1] * p1 + rule.half[2] * p2);
        let full = ph * (rule.full[0] * p0 + rule.full[1] * p1 + rule.full[2] * p2);
        out[k + 1] = out[k] + half;
        out[k + 2] = out[k] + full;
        k += 2;
    }
    if k + 1 < n {
        // trailing interval: extend the last quadratic over [0, h]
        let m = oscillatory_moments(omega, 0.0, h);
        let w0 = m[2] / (2.0 * h * h) - m[1] / (2.0 * h);
        let w1 = m[0] - m[2] / (h * h);
        let w2 = m[2] / (2.0 * h * h) + m[1] / (2.0 * h);
        let tc = t0 + k as f64 * h;
        let ph = C64::from_polar(1.0, omega * tc);
        let (p0, p1, p2) = (p[k - 1], p[k], p[k + 1]);
        out[k + 1] = out[k] + ph * (w0 * p0 + w1 * p1 + w2 * p2);
    }
}

/// Composite Simpson between two grid indices (3/8 rule absorbs an odd
/// interval count).
fn simpson_between(q: &[C64], h: f64, j0: usize, j1: usize) -> C64 {
    debug_assert!(j1 >= j0);
    let m = j1 - j0;
    if m == 0 {
        return C64::new(0.0, 0.0);
    }
    if m == 1 {
        return (q[j0] + q[j1]) * (h / 2.0);
    }
    let mut acc = C64::new(0.0, 0.0);
    let mut j = j0;
    let stop = if m % 2 == 0 { j1 } else { j1 - 3 };
    while j + 2 <= stop {
        acc += (q[j] + q[j + 1] * 4.0 + q[j + 2]) * (h / 3.0);
        j += 2;
    }
    if m % 2 == 1 {
        acc += (q[j1 - 3] + q[j1 - 2] * 3.0 + q[j1 - 1] * 3.0 + q[j1]) * (3.0 * h / 8.0);
    }
    acc
}

/// Evaluates the Duhamel-side functionals along one gauged space-time
/// field, caching the interaction-picture rows.
pub struct DuhamelEvaluator<'a> {
    w: &'a SpaceTimeField,
    phases: RandomPhaseSpec<'a>,
    rows: Vec<Vec<C64>>,
    origin: usize,
}

impl<'a> DuhamelEvaluator<'a> {
    pub fn new(w: &'a SpaceTimeField, phases: RandomPhaseSpec<'a>) -> Result<Self, DuhamelError> {
        phases.check_coverage(w.cutoff())?;
        let origin = w.index_of(0.0).map_err(|_| DuhamelError::NeedsOrigin)?;
        let n0 = w.cutoff() as i64;
        let rows = (-n0..=n0).map(|n| w.interaction_row(n)).collect();
        Ok(DuhamelEvaluator { w, phases, rows, origin })
    }

    fn row(&self, n: i64) -> &[C64] {
        &self.rows[(n + self.w.cutoff() as i64) as usize]
    }

    /// `ℰ^N_n(t_j)` for every node at or after `t = 0` (zeros before).
    pub fn energy_series(&self, n: i64) -> Vec<f64> {
        let len = self.w.n_times();
        let cutoff = self.w.cutoff() as i64;
        let h = self.w.dt();
        let t_origin = self.w.time(self.origin);
        let span = len - self.origin;
        let row_n = self.row(n);
        let mut acc = vec![C64::new(0.0, 0.0); span];
        let mut p = vec![C64::new(0.0, 0.0); span];
        let mut cum = vec![C64::new(0.0, 0.0); span];
        if span >= 3 {
            for t in gamma_tuples(n, cutoff) {
                let r1 = self.row(t.n1);
                let r2 = self.row(t.n2);
                let r3 = self.row(t.n3);
                for j in 0..span {
                    let k = self.origin + j;
                    p[j] = r1[k] * r2[k].conj() * r3[k] * row_n[k].conj();
                }
                let omega = self.phases.psi(t.n1, t.n2, t.n3, t.n) - t.phi as f64;
                filon_cumulative(omega, t_origin, h, &p, &mut cum);
                for j in 0..span {
                    acc[j] += cum[j];
                }
            }
        }
        let mut out = vec![0.0; len];
        for j in 0..span {
            // -2 Re(i·acc) = 2 Im(acc)
            out[self.origin + j] = 2.0 * acc[j].im;
        }
        out
    }

    /// `ℰ^N_n(t)` at one grid instant.
    pub fn energy_increment(&self, n: i64, t: f64) -> Result<f64, DuhamelError> {
        let j = self.w.index_of(t)?;
        Ok(self.energy_series(n)[j])
    }

    /// Worst deviation of the cancellation identity
    /// `|ŵ(n,t)|² - |g^N_n|² = ℰ^N_n(t)` over all modes and nodes up to `t`.
    pub fn cancellation_violation(&self, t: f64) -> Result<f64, DuhamelError> {
        let j1 = self.w.index_of(t)?;
        let n0 = self.w.cutoff() as i64;
        let mut worst = 0.0f64;
        for n in -n0..=n0 {
            let series = self.energy_series(n);
            let row = self.row(n);
            let g2 = self.phases.gauge_sq(n);
            for j in self.origin..=j1 {
                let lhs = row[j].norm_sqr() - g2;
                worst = worst.max((lhs - series[j]).abs());
            }
        }
        Ok(worst)
    }

    /// The quintic term: mode `n` carries
    /// `i e^{-in⁴t} ∫₀ᵗ ℰ^N_n(t') â_n(t') dt'` (equal to the resonant
    /// Duhamel term along true solutions).
    pub fn quintic_term(&self, t: f64) -> Result<SpectralField, DuhamelError> {
        let j1 = self.w.index_of(t)?;
        let h = self.w.dt();
        let n0 = self.w.cutoff() as i64;
        let mut out = SpectralField::zero(self.w.cutoff());
        for n in -n0..=n0 {
            let series = self.energy_series(n);
            let row = self.row(n);
            let q: Vec<C64> = series.iter().zip(row.iter()).map(|(&e, &a)| a * e).collect();
            let integral = simpson_between(&q, h, self.origin, j1);
            let n4 = (n as f64).powi(4);
            out.set_coeff(n, C64::new(0.0, 1.0) * integral * C64::from_polar(1.0, -n4 * t));
        }
        Ok(out)
    }

    /// The direct resonant Duhamel term
    /// `𝓘₂(w)(t) = -i ∫₀ᵗ S(t-t') 𝒩₂^ω(w)(t') dt'` on the same grid; the
    /// independent route of the iterated-Duhamel identity.
    pub fn resonant_term(&self, t: f64) -> Result<SpectralField, DuhamelError> {
        let j1 = self.w.index_of(t)?;
        let h = self.w.dt();
        let n0 = self.w.cutoff() as i64;
        let mut out = SpectralField::zero(self.w.cutoff());
        for n in -n0..=n0 {
            let row = self.row(n);
            let g2 = self.phases.gauge_sq(n);
            let q: Vec<C64> = row.iter().map(|&a| a * (a.norm_sqr() - g2)).collect();
            let integral = simpson_between(&q, h, self.origin, j1);
            let n4 = (n as f64).powi(4);
            out.set_coeff(n, C64::new(0.0, 1.0) * integral * C64::from_polar(1.0, -n4 * t));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{evolve_truncated, suggested_dt, FlowSpec, FlowVariant};
    use crate::random::GaussianEnsemble;

    fn gauged_run_dt(
        cutoff: usize,
        seed: u64,
        t_end: f64,
        dt: f64,
    ) -> (SpaceTimeField, GaussianEnsemble) {
        let ens = GaussianEnsemble::new(seed, cutoff, 0.0);
        let f0 = ens.field();
        let spec =
            FlowSpec::new(FlowVariant::GaugedTruncated, cutoff, dt, t_end).with_halving_tol(1e-3);
        let traj = evolve_truncated(&f0, &spec, Some(&ens)).unwrap();
        (SpaceTimeField::from_trajectory(&traj).unwrap(), ens)
    }

    fn gauged_run(cutoff: usize, seed: u64, t_end: f64, eps: f64) -> (SpaceTimeField, GaussianEnsemble) {
        gauged_run_dt(cutoff, seed, t_end, suggested_dt(cutoff, t_end, eps))
    }

    #[test]
    fn oscillatory_moments_match_quadrature() {
        let h = 0.03;
        for omega in [0.0, 3.0, 16.0, -16.7, 5000.0] {
            let a = oscillatory_moments(omega, -h, h);
            for r in 0..3 {
                let m = 50_000;
                let dh = 2.0 * h / m as f64;
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..m {
                    let s = -h + (j as f64 + 0.5) * dh;
                    acc += C64::from_polar(1.0, omega * s) * s.powi(r as i32) * dh;
                }
                assert!((a[r] - acc).norm() < 1e-9, "omega {} r {}", omega, r);
            }
        }
    }

    #[test]
    fn filon_matches_simpson_at_zero_frequency() {
        let h = 0.1;
        let p: Vec<C64> = (0..9)
            .map(|j| C64::new((j as f64 * 0.3).sin() + 1.0, (j as f64 * 0.7).cos()))
            .collect();
        let mut cum = vec![C64::new(0.0, 0.0); 9];
        filon_cumulative(0.0, 0.0, h, &p, &mut cum);
        let simpson = simpson_between(&p, h, 0, 8);
        assert!((cum[8] - simpson).norm() < 1e-14);
    }

    #[test]
    fn filon_integrates_fast_oscillations() {
        // p ≡ 1 against e^{iωt} with ωh ≫ 1 is handled exactly
        let omega = 5000.0;
        let h = 0.01;
        let p = vec![C64::new(1.0, 0.0); 41];
        let mut cum = vec![C64::new(0.0, 0.0); 41];
        filon_cumulative(omega, 0.0, h, &p, &mut cum);
        let t = 0.4;
        let want = (C64::from_polar(1.0, omega * t) - C64::new(1.0, 0.0)) / C64::new(0.0, omega);
        assert!((cum[40] - want).norm() < 1e-12);
    }

    #[test]
    fn energy_identity_along_gauged_flow() {
        let (w, ens) = gauged_run(6, 21, 0.1, 1e-8);
        let phases = RandomPhaseSpec::new(&ens, Some(6));
        let ev = DuhamelEvaluator::new(&w, phases).unwrap();
        for n in -6..=6 {
            assert_eq!(ev.energy_increment(n, 0.0).unwrap(), 0.0);
        }
        let viol = ev.cancellation_violation(0.1).unwrap();
        assert!(viol < 1e-6, "violation {}", viol);
    }

    #[test]
    fn single_mode_energy_vanishes() {
        // one occupied mode leaves every Γ(n) sum empty
        let ens = GaussianEnsemble::new(4, 4, 0.0);
        let f0 = SpectralField::single_mode(4, 2, C64::new(0.9, -0.2));
        let spec = FlowSpec::new(FlowVariant::GaugedTruncated, 4, 1e-3, 0.2);
        let traj = evolve_truncated(&f0, &spec, Some(&ens)).unwrap();
        let w = SpaceTimeField::from_trajectory(&traj).unwrap();
        let phases = RandomPhaseSpec::new(&ens, Some(4));
        let ev = DuhamelEvaluator::new(&w, phases).unwrap();
        for n in -4..=4 {
            assert!(ev.energy_increment(n, 0.2).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn iterated_duhamel_identity_and_its_violation() {
        let (w, ens) = gauged_run(6, 31, 0.1, 1e-8);
        let phases = RandomPhaseSpec::new(&ens, Some(6));
        let ev = DuhamelEvaluator::new(&w, phases).unwrap();
        let tilde = ev.quintic_term(0.1).unwrap();
        let direct = ev.resonant_term(0.1).unwrap();
        let gap = tilde.l2_distance(&direct);
        assert!(gap < 1e-6, "gap {}", gap);
        assert_eq!(ev.quintic_term(0.0).unwrap().mass(), 0.0);
        assert_eq!(ev.resonant_term(0.0).unwrap().mass(), 0.0);
        // a perturbed non-solution separates the two routes
        let wiggled = w.map(|j, n, c| c * (1.0 + 0.25 * ((0.37 * j as f64) + n as f64).sin()));
        let ev2 = DuhamelEvaluator::new(&wiggled, phases).unwrap();
        let gap2 = ev2
            .quintic_term(0.1)
            .unwrap()
            .l2_distance(&ev2.resonant_term(0.1).unwrap());
        assert!(gap2 > 1e-3, "perturbed gap {}", gap2);
    }

    #[test]
    fn gauged_equation_residual_small() {
        // finite-difference oracle: the gauged trajectory satisfies
        // â'_n = -i e^{itn⁴} (𝒩₁^ω + 𝒩₂^ω)^(n) in the interaction picture;
        // the derivative carries oscillations at the full phase range, so
        // the differencing grid must resolve 4N⁴
        let (w, ens) = gauged_run_dt(5, 41, 0.05, 1.5e-5);
        let phases = RandomPhaseSpec::new(&ens, Some(5));
        let h = w.dt();
        let mut worst = 0.0f64;
        let mut js = vec![2usize];
        js.push(w.n_times() / 2);
        js.push(w.n_times() - 3);
        for &j in &js {
            let t = w.time(j);
            let state = w.state(j);
            let (n1, n2) = crate::nonlin::gauged_split(&state, t, &phases).unwrap();
            let rhs_field = &n1 + &n2;
            for n in -5..=5i64 {
                let row = w.interaction_row(n);
                let fd =
                    (row[j - 2] - row[j + 2] + (row[j + 1] - row[j - 1]) * 8.0) / (12.0 * h);
                let n4 = (n as f64).powi(4);
                let rhs =
                    C64::new(0.0, -1.0) * C64::from_polar(1.0, n4 * t) * rhs_field.coeff(n);
                worst = worst.max((fd - rhs).norm());
            }
        }
        assert!(worst < 1e-4, "residual {}", worst);
    }
}
