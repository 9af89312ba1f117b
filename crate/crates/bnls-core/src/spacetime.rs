//! Space-time samples `û(n, t_j)` of one trajectory on a uniform time grid,
//! with the interaction-picture view `â_n(t) = e^{itn⁴} û(n, t)` used by the
//! quadratures (the slow variable once the fourth-order rotation is peeled
//! off).

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
#[allow(unused_imports)]
use num_traits::Float;

use crate::field::SpectralField;
use crate::flow::TrajectoryRecord;
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    cutoff: usize,
    t0: f64,
    dt: f64,
    /// Row-major: `values[j * (2N+1) + (n + N)]`.
    values: Vec<C64>,
    n_times: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpaceTimeError {
    NonUniformGrid(String),
    TooShort,
    OffGrid { t: f64 },
}

impl fmt::Display for SpaceTimeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceTimeError::NonUniformGrid(msg) => write!(f, "non-uniform time grid: {}", msg),
            SpaceTimeError::TooShort => write!(f, "need at least three time samples"),
            SpaceTimeError::OffGrid { t } => write!(f, "t = {} is not a grid instant", t),
        }
    }
}

impl core::error::Error for SpaceTimeError {}

impl SpaceTimeField {
    pub fn from_trajectory(traj: &TrajectoryRecord) -> Result<Self, SpaceTimeError> {
        let times = &traj.times;
        if times.len() < 3 {
            return Err(SpaceTimeError::TooShort);
        }
        let dt = times[1] - times[0];
        for w in times.windows(2) {
            if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.abs().max(1e-12) {
                return Err(SpaceTimeError::NonUniformGrid(alloc::format!(
                    "spacing {} vs {}",
                    w[1] - w[0],
                    dt
                )));
            }
        }
        let cutoff = traj.spec.cutoff;
        let width = 2 * cutoff + 1;
        let mut values = Vec::with_capacity(times.len() * width);
        for s in &traj.states {
            values.extend_from_slice(s.coeffs());
        }
        Ok(SpaceTimeField { cutoff, t0: times[0], dt, values, n_times: times.len() })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn n_times(&self) -> usize {
        self.n_times
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn time(&self, j: usize) -> f64 {
        self.t0 + j as f64 * self.dt
    }

    /// Index of the grid instant equal to `t` (within a grid-relative tolerance).
    pub fn index_of(&self, t: f64) -> Result<usize, SpaceTimeError> {
        let x = (t - self.t0) / self.dt;
        let j = x.round();
        if (x - j).abs() > 1e-6 || j < 0.0 || j as usize >= self.n_times {
            return Err(SpaceTimeError::OffGrid { t });
        }
        Ok(j as usize)
    }

    pub fn coeff(&self, j: usize, n: i64) -> C64 {
        let width = 2 * self.cutoff + 1;
        let i = (n + self.cutoff as i64) as usize;
        self.values[j * width + i]
    }

    pub fn state(&self, j: usize) -> SpectralField {
        let width = 2 * self.cutoff + 1;
        SpectralField::from_coeffs(self.cutoff, self.values[j * width..(j + 1) * width].to_vec())
    }

    /// `â_n(t_j) = e^{i n⁴ t_j} û(n, t_j)` for one mode across the grid.
    pub fn interaction_row(&self, n: i64) -> Vec<C64> {
        let n4 = {
            let x = n as f64;
            x * x * x * x
        };
        (0..self.n_times)
            .map(|j| self.coeff(j, n) * C64::from_polar(1.0, n4 * self.time(j)))
            .collect()
    }

    /// Replace the samples by `f(j, n, value)` (used by tests to build
    /// perturbed non-solution fields).
    pub fn map(&self, mut f: impl FnMut(usize, i64, C64) -> C64) -> Self {
        let width = 2 * self.cutoff + 1;
        let mut out = self.clone();
        for j in 0..self.n_times {
            for i in 0..width {
                let n = i as i64 - self.cutoff as i64;
                out.values[j * width + i] = f(j, n, self.values[j * width + i]);
            }
        }
        out
    }
}
