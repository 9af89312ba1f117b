//! The cubic convolution `Σ_{n=n₁-n₂+n₃} f̂₁(n₁) conj(f̂₂(n₂)) f̂₃(n₃)`,
//! evaluated two ways: a fully dealiased transform path and a direct
//! triple-sum reference. The fast path synthesizes on a grid of at least
//! `6N+2` points so the degree-`3N` product is alias-free before truncation
//! back to `|n| ≤ N`.

use alloc::vec;
use alloc::vec::Vec;

use crate::fft::{analyze_into, dealiased_grid, synthesize_into, Fft};
use crate::field::SpectralField;
use crate::C64;

/// Reusable plan + scratch for cubic products at one cutoff.
#[derive(Debug)]
pub struct CubicPlan {
    cutoff: usize,
    fft: Fft,
    buf_a: Vec<C64>,
    buf_b: Vec<C64>,
    buf_c: Vec<C64>,
}

impl CubicPlan {
    pub fn new(cutoff: usize) -> Self {
        let grid = dealiased_grid(cutoff);
        CubicPlan {
            cutoff,
            fft: Fft::new(grid),
            buf_a: vec![C64::new(0.0, 0.0); grid],
            buf_b: vec![C64::new(0.0, 0.0); grid],
            buf_c: vec![C64::new(0.0, 0.0); grid],
        }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// `f₁ · conj(f₂) · f₃` truncated to the common cutoff.
    pub fn product(&mut self, f1: &SpectralField, f2: &SpectralField, f3: &SpectralField) -> SpectralField {
        assert!(
            f1.cutoff() == self.cutoff && f2.cutoff() == self.cutoff && f3.cutoff() == self.cutoff,
            "cubic product inputs must share the plan cutoff"
        );
        let mut out = vec![C64::new(0.0, 0.0); 2 * self.cutoff + 1];
        self.product_coeffs(f1.coeffs(), f2.coeffs(), f3.coeffs(), &mut out);
        SpectralField::from_coeffs(self.cutoff, out)
    }

    /// Coefficient-slice variant used in integrator inner loops.
    pub fn product_coeffs(&mut self, f1: &[C64], f2: &[C64], f3: &[C64], out: &mut [C64]) {
        synthesize_into(f1, self.cutoff, &self.fft, &mut self.buf_a);
        synthesize_into(f2, self.cutoff, &self.fft, &mut self.buf_b);
        synthesize_into(f3, self.cutoff, &self.fft, &mut self.buf_c);
        for j in 0..self.fft.size() {
            self.buf_a[j] = self.buf_a[j] * self.buf_b[j].conj() * self.buf_c[j];
        }
        analyze_into(&mut self.buf_a, self.cutoff, &self.fft, out);
    }

    /// `|u|²u` truncated to the cutoff (all three arguments equal).
    pub fn modulus_cubed(&mut self, u: &[C64], out: &mut [C64]) {
        synthesize_into(u, self.cutoff, &self.fft, &mut self.buf_a);
        for v in self.buf_a.iter_mut() {
            *v = *v * v.norm_sqr();
        }
        analyze_into(&mut self.buf_a, self.cutoff, &self.fft, out);
    }
}

/// One-shot fast cubic product.
pub fn cubic_product(f1: &SpectralField, f2: &SpectralField, f3: &SpectralField) -> SpectralField {
    CubicPlan::new(f1.cutoff()).product(f1, f2, f3)
}

/// Direct `O(N²)`-per-mode triple-sum evaluation; the independent reference
/// for the transform path.
pub fn cubic_product_direct(
    f1: &SpectralField,
    f2: &SpectralField,
    f3: &SpectralField,
) -> SpectralField {
    let cutoff = f1.cutoff();
    assert!(f2.cutoff() == cutoff && f3.cutoff() == cutoff);
    let n0 = cutoff as i64;
    let mut out = SpectralField::zero(cutoff);
    for n in -n0..=n0 {
        let mut acc = C64::new(0.0, 0.0);
        for n1 in -n0..=n0 {
            for n2 in -n0..=n0 {
                let n3 = n - n1 + n2;
                if n3 < -n0 || n3 > n0 {
                    continue;
                }
                acc += f1.coeff(n1) * f2.coeff(n2).conj() * f3.coeff(n3);
            }
        }
        out.set_coeff(n, acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::sample_data;

    #[test]
    fn single_mode_fixed_point() {
        let f = SpectralField::single_mode(3, 0, C64::new(1.0, 0.0));
        let p = cubic_product(&f, &f, &f);
        assert!((p.coeff(0) - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((p.mass() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_factor_annihilates() {
        let f = sample_data(10, 8, 0.0);
        let z = SpectralField::zero(8);
        assert_eq!(cubic_product(&f, &f, &z).mass(), 0.0);
    }

    #[test]
    fn fast_path_matches_triple_sum() {
        // property check across cutoffs on random data
        for (trial, cutoff) in [(1u64, 4usize), (2, 9), (3, 16), (4, 32)] {
            let f1 = sample_data(100 + trial, cutoff, 0.0);
            let f2 = sample_data(200 + trial, cutoff, 0.0);
            let f3 = sample_data(300 + trial, cutoff, 0.0);
            let fast = cubic_product(&f1, &f2, &f3);
            let slow = cubic_product_direct(&f1, &f2, &f3);
            let scale = slow.mass().sqrt().max(1.0);
            let diff = fast.l2_distance(&slow);
            assert!(diff / scale < 1e-12, "cutoff {}: rel diff {}", cutoff, diff / scale);
        }
    }

    #[test]
    fn modulus_cubed_agrees() {
        let u = sample_data(55, 12, 0.0);
        let mut plan = CubicPlan::new(12);
        let mut out = vec![C64::new(0.0, 0.0); 25];
        plan.modulus_cubed(u.coeffs(), &mut out);
        let direct = cubic_product_direct(&u, &u, &u);
        let via = SpectralField::from_coeffs(12, out);
        assert!(via.l2_distance(&direct) < 1e-12 * direct.mass().sqrt());
    }
}
