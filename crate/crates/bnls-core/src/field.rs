//! Spectral fields on the circle: trigonometric polynomials stored as
//! complex Fourier coefficients on the modes `|n| ≤ N`, together with the
//! Dirichlet/Littlewood-Paley projectors and the norm family used throughout.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Sub};
#[allow(unused_imports)]
use num_traits::Float;

use crate::fft;
use crate::C64;

/// `⟨n⟩ = (1 + n²)^{1/2}`.
pub fn bracket(n: i64) -> f64 {
    (1.0 + (n as f64) * (n as f64)).sqrt()
}

/// A field `u(x) = Σ_{|n|≤N} c_n e^{inx}`, immutable once built.
///
/// Under the normalized measure convention, `mass(u) = Σ |c_n|²` is the
/// squared `L²` norm.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    cutoff: usize,
    coeffs: Vec<C64>,
}

impl SpectralField {
    pub fn zero(cutoff: usize) -> Self {
        SpectralField {
            cutoff,
            coeffs: vec![C64::new(0.0, 0.0); 2 * cutoff + 1],
        }
    }

    /// Build from coefficients listed in mode order `n = -N..=N`.
    pub fn from_coeffs(cutoff: usize, coeffs: Vec<C64>) -> Self {
        assert_eq!(
            coeffs.len(),
            2 * cutoff + 1,
            "a cutoff-{} field stores exactly {} coefficients",
            cutoff,
            2 * cutoff + 1
        );
        SpectralField { cutoff, coeffs }
    }

    pub fn single_mode(cutoff: usize, n: i64, c: C64) -> Self {
        let mut f = SpectralField::zero(cutoff);
        f.set_coeff(n, c);
        f
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    fn index(&self, n: i64) -> Option<usize> {
        let shifted = n + self.cutoff as i64;
        if shifted < 0 || shifted >= self.coeffs.len() as i64 {
            None
        } else {
            Some(shifted as usize)
        }
    }

    /// Coefficient `c_n`, zero for `|n| > N`.
    pub fn coeff(&self, n: i64) -> C64 {
        match self.index(n) {
            Some(i) => self.coeffs[i],
            None => C64::new(0.0, 0.0),
        }
    }

    pub fn set_coeff(&mut self, n: i64, c: C64) {
        let i = self.index(n).expect("mode outside cutoff");
        self.coeffs[i] = c;
    }

    /// Iterate `(n, c_n)` over `n = -N..=N`.
    pub fn modes(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        let n0 = self.cutoff as i64;
        self.coeffs.iter().enumerate().map(move |(i, &c)| (i as i64 - n0, c))
    }

    /// New field with coefficients `f(n, c_n)`.
    pub fn map_modes(&self, mut f: impl FnMut(i64, C64) -> C64) -> Self {
        let n0 = self.cutoff as i64;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| f(i as i64 - n0, c))
            .collect();
        SpectralField { cutoff: self.cutoff, coeffs }
    }

    /// `Σ |c_n|²`, the squared `L²` norm.
    pub fn mass(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn scaled(&self, a: C64) -> Self {
        SpectralField {
            cutoff: self.cutoff,
            coeffs: self.coeffs.iter().map(|&c| c * a).collect(),
        }
    }

    /// Re-cut to a new cutoff: truncates high modes or embeds with zeros.
    pub fn with_cutoff(&self, cutoff: usize) -> Self {
        let mut out = SpectralField::zero(cutoff);
        let keep = cutoff.min(self.cutoff) as i64;
        for n in -keep..=keep {
            out.set_coeff(n, self.coeff(n));
        }
        out
    }

    /// Apply a frequency projector.
    pub fn project(&self, p: Projector) -> Self {
        self.map_modes(|n, c| if p.keeps(n) { c } else { C64::new(0.0, 0.0) })
    }

    /// `L²` distance, aligning cutoffs (missing modes count as zero).
    pub fn l2_distance(&self, other: &SpectralField) -> f64 {
        let big = self.cutoff.max(other.cutoff) as i64;
        let mut acc = 0.0;
        for n in -big..=big {
            acc += (self.coeff(n) - other.coeff(n)).norm_sqr();
        }
        acc.sqrt()
    }

    /// Norm of the requested flavor; see [`NormFlavor`].
    pub fn norm(&self, spec: NormSpec, flavor: NormFlavor) -> Result<f64, NormError> {
        match flavor {
            NormFlavor::Sobolev => {
                let mut acc = 0.0;
                for (n, c) in self.modes() {
                    acc += bracket(n).powf(2.0 * spec.s) * c.norm_sqr();
                }
                Ok(acc.sqrt())
            }
            NormFlavor::FourierLebesgue => {
                if spec.p < 1.0 {
                    return Err(NormError::BadExponent(spec.p));
                }
                if spec.p.is_infinite() {
                    let mut best: f64 = 0.0;
                    for (n, c) in self.modes() {
                        best = best.max(bracket(n).powf(spec.s) * c.norm());
                    }
                    return Ok(best);
                }
                let mut acc = 0.0;
                for (n, c) in self.modes() {
                    acc += (bracket(n).powf(spec.s) * c.norm()).powf(spec.p);
                }
                Ok(acc.powf(1.0 / spec.p))
            }
            NormFlavor::Physical => {
                if spec.p < 1.0 {
                    return Err(NormError::BadExponent(spec.p));
                }
                let grid = fft::quadrature_grid(self.cutoff);
                let values = fft::synthesize(&self.coeffs, self.cutoff, grid);
                if spec.p.is_infinite() {
                    let mut best: f64 = 0.0;
                    for v in &values {
                        best = best.max(v.norm());
                    }
                    return Ok(best);
                }
                // normalized measure: ∮|u|^p = (1/M) Σ_j |u(x_j)|^p
                let mut acc = 0.0;
                for v in &values {
                    acc += v.norm().powf(spec.p);
                }
                Ok((acc / grid as f64).powf(1.0 / spec.p))
            }
        }
    }

    /// Shorthand for the `H^s` norm.
    pub fn sobolev(&self, s: f64) -> f64 {
        self.norm(NormSpec { s, p: 2.0 }, NormFlavor::Sobolev).unwrap()
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        assert_eq!(self.cutoff, rhs.cutoff, "cutoff mismatch");
        SpectralField {
            cutoff: self.cutoff,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        assert_eq!(self.cutoff, rhs.cutoff, "cutoff mismatch");
        SpectralField {
            cutoff: self.cutoff,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: f64) -> SpectralField {
        self.scaled(C64::new(rhs, 0.0))
    }
}

/// Frequency projectors.
///
/// `Dirichlet(M)` keeps `|n| ≤ M` (`π_M`); `Complement(M)` keeps `|n| > M`
/// (`π_M^⊥`, with `Complement(-1)` the identity); `Dyadic(k)` keeps the
/// Littlewood-Paley block: `|n| ≤ 1` for `k = 0` and `2^k ≤ |n| < 2^{k+1}`
/// for `k ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projector {
    Dirichlet(i64),
    Complement(i64),
    Dyadic(u32),
}

impl Projector {
    pub fn keeps(self, n: i64) -> bool {
        match self {
            Projector::Dirichlet(m) => n.abs() <= m,
            Projector::Complement(m) => n.abs() > m,
            Projector::Dyadic(k) => {
                let a = n.unsigned_abs();
                if k == 0 {
                    a <= 1
                } else {
                    (1u64 << k) <= a && a < (1u64 << (k + 1))
                }
            }
        }
    }
}

/// Index of the dyadic block containing mode `n` (see [`Projector::Dyadic`]).
pub fn dyadic_block_of(n: i64) -> u32 {
    let a = n.unsigned_abs();
    if a <= 1 {
        0
    } else {
        63 - a.leading_zeros()
    }
}

/// Regularity/integrability indices for [`SpectralField::norm`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSpec {
    pub s: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormFlavor {
    /// `H^s = (Σ ⟨n⟩^{2s} |c_n|²)^{1/2}`
    Sobolev,
    /// `FL^{s,p} = ‖⟨n⟩^s c_n‖_{ℓ^p}`
    FourierLebesgue,
    /// `L^p` of the synthesized field, by quadrature on an oversampled grid
    Physical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormError {
    /// Lebesgue exponent below 1.
    BadExponent(f64),
}

impl fmt::Display for NormError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormError::BadExponent(p) => write!(f, "lebesgue exponent {} < 1", p),
        }
    }
}

impl core::error::Error for NormError {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::GaussianEnsemble;

    #[test]
    fn single_mode_norms() {
        // a lone n=0 coefficient has H^s norm 1 for every s
        let f = SpectralField::single_mode(4, 0, C64::new(1.0, 0.0));
        for s in [-2.0, -0.5, 0.0, 1.0, 3.0] {
            assert!((f.sobolev(s) - 1.0).abs() < 1e-15);
        }
        // n=3, s=-1/2: (1+9)^{-1/4}
        let f = SpectralField::single_mode(4, 3, C64::new(1.0, 0.0));
        assert!((f.sobolev(-0.5) - 10f64.powf(-0.25)).abs() < 1e-12);
    }

    #[test]
    fn three_unit_modes() {
        let mut f = SpectralField::zero(1);
        for n in -1..=1 {
            f.set_coeff(n, C64::new(1.0, 0.0));
        }
        assert!((f.sobolev(0.0) - 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn h0_equals_sqrt_mass_and_l2() {
        let f = GaussianEnsemble::new(11, 12, 0.0).field();
        let h0 = f.sobolev(0.0);
        assert!((h0 - f.mass().sqrt()).abs() < 1e-12);
        let l2 = f
            .norm(NormSpec { s: 0.0, p: 2.0 }, NormFlavor::Physical)
            .unwrap();
        assert!((h0 - l2).abs() < 1e-12 * h0.max(1.0));
    }

    #[test]
    fn projector_identities() {
        let f = GaussianEnsemble::new(3, 16, 0.0).field();
        // π_M + π_M^⊥ = Id and the mass split is exact
        for m in [-1i64, 0, 3, 16, 40] {
            let lo = f.project(Projector::Dirichlet(m));
            let hi = f.project(Projector::Complement(m));
            let sum = &lo + &hi;
            assert_eq!(sum, f);
            assert!((lo.mass() + hi.mass() - f.mass()).abs() <= 1e-14 * f.mass());
        }
        // π_2 kills a field supported on n = 5
        let g = SpectralField::single_mode(8, 5, C64::new(2.0, 1.0));
        assert_eq!(g.project(Projector::Dirichlet(2)).mass(), 0.0);
        // π_{-1}^⊥ = Id
        assert_eq!(f.project(Projector::Complement(-1)), f);
    }

    #[test]
    fn dyadic_blocks_partition() {
        let f = GaussianEnsemble::new(5, 33, 0.0).field();
        let mut sum = SpectralField::zero(33);
        for k in 0..=6 {
            sum = &sum + &f.project(Projector::Dyadic(k));
        }
        assert_eq!(sum, f);
        for (n, _) in f.modes() {
            assert!(Projector::Dyadic(dyadic_block_of(n)).keeps(n));
        }
    }

    #[test]
    fn l4_quadrature_is_exact() {
        // ∮|u|⁴ for u = 1 + e^{ix}: |u|² = 2 + 2cos x, ∮|u|⁴ = 4 + 2 = 6
        let mut f = SpectralField::zero(1);
        f.set_coeff(0, C64::new(1.0, 0.0));
        f.set_coeff(1, C64::new(1.0, 0.0));
        let l4 = f
            .norm(NormSpec { s: 0.0, p: 4.0 }, NormFlavor::Physical)
            .unwrap();
        assert!((l4 - 6f64.powf(0.25)).abs() < 1e-12);
    }

    #[test]
    fn rejects_small_p() {
        let f = SpectralField::zero(2);
        assert!(f.norm(NormSpec { s: 0.0, p: 0.5 }, NormFlavor::Physical).is_err());
        assert!(f
            .norm(NormSpec { s: 0.0, p: 0.99 }, NormFlavor::FourierLebesgue)
            .is_err());
    }
}
