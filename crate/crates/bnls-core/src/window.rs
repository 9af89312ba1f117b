//! The concrete time window `η_δ(t) = η(t/δ)` together with a cached
//! high-resolution table of its Fourier transform.
//!
//! `η̂` is computed once per window by a long FFT of the unit-scale bump
//! (the bump is only qualitatively constrained, so its transform is taken
//! numerically rather than committing to a transform-friendly window), and
//! `η̂_δ(σ) = δ·η̂(δσ)` is read off the table by cubic interpolation.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::bump::eta;
use crate::fft::Fft;
use crate::C64;

/// Relative level below which `η̂_δ` is treated as zero in quadratures.
pub const HAT_TRUNC_REL: f64 = 1e-10;

const TABLE_LOG2: usize = 17;
/// Unit-scale `x`-resolution of the table: `2π/T` with `T = 128π`.
const TABLE_SPAN: f64 = 128.0 * core::f64::consts::PI;

/// Uniform table of the even real function `η̂(x)` on `x ≥ 0`.
#[derive(Debug, Clone)]
struct EtaHatTable {
    dx: f64,
    vals: Vec<f64>,
    peak: f64,
    x_star: f64,
}

impl EtaHatTable {
    fn build() -> Self {
        let m = 1usize << TABLE_LOG2;
        let dt = TABLE_SPAN / m as f64;
        let mut buf = vec![C64::new(0.0, 0.0); m];
        for (j, slot) in buf.iter_mut().enumerate() {
            let t = -TABLE_SPAN / 2.0 + j as f64 * dt;
            *slot = C64::new(eta(t), 0.0);
        }
        Fft::new(m).forward(&mut buf);
        // η̂(x_k) = Δt (-1)^k Σ_j η(t_j) e^{-2πi kj/M}; real since η is even
        let half = m / 2;
        let mut vals = Vec::with_capacity(half);
        for (k, v) in buf.iter().take(half).enumerate() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            vals.push(sign * dt * v.re);
        }
        let dx = 2.0 * core::f64::consts::PI / TABLE_SPAN;
        let peak = vals[0];
        let mut x_star = (half - 1) as f64 * dx;
        for k in (0..half).rev() {
            if vals[k].abs() >= HAT_TRUNC_REL * peak {
                x_star = (k + 1) as f64 * dx;
                break;
            }
        }
        EtaHatTable { dx, vals, peak, x_star }
    }

    /// Cubic interpolation; even extension; zero beyond the table.
    fn eval(&self, x: f64) -> f64 {
        let a = x.abs() / self.dx;
        let i = a.floor() as usize;
        if i + 2 >= self.vals.len() {
            return 0.0;
        }
        let f = a - i as f64;
        // 4-point Lagrange on points i-1..i+2, with even reflection at 0
        let p0 = if i == 0 { self.vals[1] } else { self.vals[i - 1] };
        let p1 = self.vals[i];
        let p2 = self.vals[i + 1];
        let p3 = self.vals[i + 2];
        let a0 = p1;
        let a1 = 0.5 * (p2 - p0);
        let a2 = p0 - 2.5 * p1 + 2.0 * p2 - 0.5 * p3;
        let a3 = 0.5 * (p3 - p0) + 1.5 * (p1 - p2);
        a0 + f * (a1 + f * (a2 + f * a3))
    }
}

/// The scaled window `η_δ` with cached transform data.
#[derive(Debug, Clone)]
pub struct EtaCutoff {
    delta: f64,
    hat: EtaHatTable,
}

impl EtaCutoff {
    pub fn new(delta: f64) -> Self {
        assert!(delta > 0.0);
        EtaCutoff { delta, hat: EtaHatTable::build() }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `η_δ(t) = η(t/δ)`.
    pub fn eta(&self, t: f64) -> f64 {
        eta(t / self.delta)
    }

    /// Half-width of `supp η_δ`.
    pub fn support(&self) -> f64 {
        2.0 * self.delta
    }

    /// `η̂_δ(σ) = δ·η̂(δσ)`.
    pub fn hat(&self, sigma: f64) -> f64 {
        self.delta * self.hat.eval(self.delta * sigma)
    }

    /// `η̂_δ(0)`, the peak value.
    pub fn hat_peak(&self) -> f64 {
        self.delta * self.hat.peak
    }

    /// Half-width of the σ-window outside which `|η̂_δ| < trunc·peak`
    /// at the default truncation level [`HAT_TRUNC_REL`].
    pub fn hat_support(&self) -> f64 {
        self.hat.x_star / self.delta
    }

    /// σ half-window for an arbitrary relative truncation level.
    pub fn hat_support_at(&self, rel: f64) -> f64 {
        let mut x_star = (self.hat.vals.len() - 1) as f64 * self.hat.dx;
        for k in (0..self.hat.vals.len()).rev() {
            if self.hat.vals[k].abs() >= rel * self.hat.peak {
                x_star = (k + 1) as f64 * self.hat.dx;
                break;
            }
        }
        x_star / self.delta
    }

    /// Unit-scale decay point `x*` (σ-support is `x*/δ`).
    pub fn unit_x_star(&self) -> f64 {
        self.hat.x_star
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hat_table_sane() {
        let w = EtaCutoff::new(1.0);
        // η̂(0) = ∫η = 3 for this window (plateau 2, two half-mass shoulders)
        assert!((w.hat(0.0) - 3.0).abs() < 1e-6, "peak {}", w.hat(0.0));
        // even, decaying, finite truncation point well inside the table
        assert!((w.hat(5.3) - w.hat(-5.3)).abs() < 1e-12);
        assert!(w.unit_x_star() > 10.0 && w.unit_x_star() < 1000.0, "x* = {}", w.unit_x_star());
        assert!(w.hat(w.hat_support() * 1.5).abs() < 1e-9 * w.hat_peak() + 1e-18);
    }

    #[test]
    fn hat_matches_direct_quadrature() {
        let w = EtaCutoff::new(1.0);
        // direct Riemann sum of ∫η e^{-ixt} dt on the support
        for x in [0.0, 0.7, 2.3, 9.8, 19.0] {
            let m = 40_000;
            let dt = 4.0 / m as f64;
            let mut acc = 0.0;
            for j in 0..m {
                let t = -2.0 + (j as f64 + 0.5) * dt;
                acc += eta(t) * (x * t).cos() * dt;
            }
            assert!((w.hat(x) - acc).abs() < 1e-6, "x = {}: {} vs {}", x, w.hat(x), acc);
        }
    }

    #[test]
    fn scaling_law() {
        let unit = EtaCutoff::new(1.0);
        let w = EtaCutoff::new(0.25);
        for sigma in [0.0, 1.0, 8.0, 40.0] {
            let want = 0.25 * unit.hat(0.25 * sigma);
            assert!((w.hat(sigma) - want).abs() < 1e-12);
        }
        assert!((w.support() - 0.5).abs() < 1e-15);
        assert_eq!(w.eta(0.2), 1.0);
        assert_eq!(w.eta(0.6), 0.0);
    }
}
