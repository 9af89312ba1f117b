//! Random phase data derived from a Gaussian ensemble: the per-mode gauge
//! rotations `|g^N_n|²` and the phase function
//! `Ψ^ω_N(n̄) = |g^N_{n₁}|² - |g^N_{n₂}|² + |g^N_{n₃}|² - |g^N_n|²`.


use crate::nonlin::GaugeError;
use crate::random::GaussianEnsemble;

/// Sign selector for the shifted modulation weight `⟨τ + n⁴ ± |g^N_n|²⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftSign {
    Plus,
    Minus,
}

impl ShiftSign {
    pub fn apply(self, v: f64) -> f64 {
        match self {
            ShiftSign::Plus => v,
            ShiftSign::Minus => -v,
        }
    }
}

/// Borrowed view of an ensemble with a frequency truncation for the phases.
#[derive(Debug, Clone, Copy)]
pub struct RandomPhaseSpec<'a> {
    ensemble: Option<&'a GaussianEnsemble>,
    /// `None` means no truncation (`Ψ^ω_∞ = Ψ^ω`).
    trunc: Option<usize>,
    pub sign: ShiftSign,
}

impl<'a> RandomPhaseSpec<'a> {
    pub fn new(ensemble: &'a GaussianEnsemble, trunc: Option<usize>) -> Self {
        RandomPhaseSpec { ensemble: Some(ensemble), trunc, sign: ShiftSign::Plus }
    }

    pub fn with_sign(mut self, sign: ShiftSign) -> Self {
        self.sign = sign;
        self
    }

    /// Phases that vanish identically (`g ≡ 0`); the gauged objects then
    /// reduce to their plain counterparts.
    pub fn zero() -> Self {
        RandomPhaseSpec { ensemble: None, trunc: Some(0), sign: ShiftSign::Plus }
    }

    pub fn trunc(&self) -> Option<usize> {
        self.trunc
    }

    /// Verify the underlying ensemble covers `|n| ≤ min(trunc, needed)`.
    pub fn check_coverage(&self, needed: usize) -> Result<(), GaugeError> {
        let effective = self.trunc.map_or(needed, |t| t.min(needed));
        match self.ensemble {
            None => Ok(()),
            Some(e) if e.cutoff() >= effective => Ok(()),
            Some(e) => Err(GaugeError::MissingModes { needed: effective, covered: e.cutoff() }),
        }
    }

    /// `|g^N_n|²`.
    pub fn gauge_sq(&self, n: i64) -> f64 {
        let Some(e) = self.ensemble else { return 0.0 };
        match self.trunc {
            Some(t) => e.g_truncated(n, t).norm_sqr(),
            None => e.g(n).expect("ensemble does not cover requested mode").norm_sqr(),
        }
    }

    /// `Ψ^ω_N(n₁,n₂,n₃,n)`, exactly the alternating sum of `|g^N|²`.
    pub fn psi(&self, n1: i64, n2: i64, n3: i64, n: i64) -> f64 {
        self.gauge_sq(n1) - self.gauge_sq(n2) + self.gauge_sq(n3) - self.gauge_sq(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_matches_definition() {
        let e = GaussianEnsemble::new(3, 10, 0.0);
        let p = RandomPhaseSpec::new(&e, Some(5));
        let g2 = |n: i64| e.g_truncated(n, 5).norm_sqr();
        let got = p.psi(2, -1, 7, 10);
        let want = g2(2) - g2(-1) + g2(7) - g2(10);
        assert_eq!(got, want);
        // modes beyond the truncation contribute nothing
        assert_eq!(p.gauge_sq(6), 0.0);
        assert_eq!(p.gauge_sq(-9), 0.0);
    }

    #[test]
    fn coverage_checks() {
        let e = GaussianEnsemble::new(3, 4, 0.0);
        let p = RandomPhaseSpec::new(&e, None);
        assert!(p.check_coverage(4).is_ok());
        assert!(p.check_coverage(5).is_err());
        // a truncation inside the coverage makes larger fields fine
        let p = RandomPhaseSpec::new(&e, Some(3));
        assert!(p.check_coverage(64).is_ok());
    }
}
