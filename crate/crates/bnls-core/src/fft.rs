//! Iterative radix-2 complex FFT on power-of-two grids.
//!
//! Forward transform: `X[k] = Σ_j x[j] e^{-2πi jk/M}`; the inverse applies
//! the conjugate twiddles and no scaling, so `inverse(forward(x)) = M·x`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::C64;

/// Precomputed plan for one transform size.
#[derive(Debug, Clone)]
pub struct Fft {
    size: usize,
    // twiddles[k] = e^{-2πi k/size} for k < size/2, then the conjugates
    fwd: Vec<C64>,
    inv: Vec<C64>,
}

impl Fft {
    /// Plan a transform of the given power-of-two size.
    pub fn new(size: usize) -> Self {
        assert!(size.is_power_of_two(), "fft size must be a power of two");
        let mut fwd = Vec::with_capacity(size / 2);
        for k in 0..size / 2 {
            let ang = -2.0 * PI * k as f64 / size as f64;
            fwd.push(C64::new(ang.cos(), ang.sin()));
        }
        let inv = fwd.iter().map(|w| w.conj()).collect();
        Fft { size, fwd, inv }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn forward(&self, buf: &mut [C64]) {
        run(&self.fwd, self.size, buf);
    }

    /// Unscaled inverse transform.
    pub fn inverse(&self, buf: &mut [C64]) {
        run(&self.inv, self.size, buf);
    }
}

fn run(twiddles: &[C64], n: usize, buf: &mut [C64]) {
    assert_eq!(buf.len(), n);
    if n == 1 {
        return;
    }
    bit_reverse(buf);
    let mut m = 2;
    while m <= n {
        let half = m / 2;
        let stride = n / m;
        for base in (0..n).step_by(m) {
            for k in 0..half {
                let w = twiddles[k * stride];
                let a = buf[base + k];
                let b = buf[base + k + half] * w;
                buf[base + k] = a + b;
                buf[base + k + half] = a - b;
            }
        }
        m *= 2;
    }
}

fn bit_reverse(buf: &mut [C64]) {
    let n = buf.len();
    let shift = n.leading_zeros() + 1;
    for i in 0..n {
        let j = i.reverse_bits() >> shift;
        if j > i {
            buf.swap(i, j);
        }
    }
}

/// Smallest power-of-two grid on which the product of three degree-`cutoff`
/// polynomials (degree `3·cutoff`) is alias-free.
pub fn dealiased_grid(cutoff: usize) -> usize {
    (6 * cutoff + 2).next_power_of_two().max(8)
}

/// Grid used for physical-space `L^p` quadrature of a degree-`cutoff` field.
pub fn quadrature_grid(cutoff: usize) -> usize {
    (2 * (2 * cutoff + 1)).next_power_of_two().max(8)
}

/// Evaluate coefficients `c_n`, `|n| ≤ cutoff`, on the uniform grid
/// `x_j = 2πj/M` (wrap-around mode placement followed by an inverse DFT).
pub fn synthesize_into(coeffs: &[C64], cutoff: usize, fft: &Fft, out: &mut [C64]) {
    let m = fft.size();
    debug_assert!(m >= 2 * cutoff + 2);
    debug_assert_eq!(coeffs.len(), 2 * cutoff + 1);
    out.fill(C64::new(0.0, 0.0));
    for (idx, &c) in coeffs.iter().enumerate() {
        let n = idx as i64 - cutoff as i64;
        let bin = n.rem_euclid(m as i64) as usize;
        out[bin] = c;
    }
    fft.inverse(out);
}

/// Recover coefficients `|n| ≤ cutoff` from grid values (forward DFT with
/// `1/M` normalization). Exact for content of degree `< M/2`.
pub fn analyze_into(values: &mut [C64], cutoff: usize, fft: &Fft, out: &mut [C64]) {
    let m = fft.size();
    debug_assert_eq!(out.len(), 2 * cutoff + 1);
    fft.forward(values);
    let scale = 1.0 / m as f64;
    for (idx, slot) in out.iter_mut().enumerate() {
        let n = idx as i64 - cutoff as i64;
        let bin = n.rem_euclid(m as i64) as usize;
        *slot = values[bin] * scale;
    }
}

/// One-shot convenience wrapper around [`synthesize_into`].
pub fn synthesize(coeffs: &[C64], cutoff: usize, grid: usize) -> Vec<C64> {
    let fft = Fft::new(grid);
    let mut out = vec![C64::new(0.0, 0.0); grid];
    synthesize_into(coeffs, cutoff, &fft, &mut out);
    out
}
