//! Two-sided Brownian sample paths on a uniform grid anchored at `t = 0`,
//! and the Wiener shift `θ_t ω(·) = ω(t + ·) − ω(t)`.
//!
//! Increments come from ChaCha8 streams keyed by the seed: stream 0 drives
//! the nodes `t > 0` outward from the origin, stream 1 the nodes `t < 0`.
//! Node `i` on either side is the `i`-th standard normal of its stream, so
//! two windows built from the same seed and step agree wherever they overlap.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::io::fmt_f64;

/// Relative tolerance for deciding that a time lies on the grid.
pub const GRID_TOL: f64 = 1e-9;

/// Returns `round(t / h)` if `t` is a grid multiple of `h`.
pub fn grid_steps(t: f64, h: f64) -> Result<i64> {
    let x = t / h;
    let k = x.round();
    if (x - k).abs() > GRID_TOL * (1.0 + x.abs()) {
        return Err(Error::OffGrid { t, dt_grid: h });
    }
    Ok(k as i64)
}

/// A sampled path `ω` with `ω(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct WienerPath {
    seed: u64,
    dt_grid: f64,
    /// Index of the node `t = 0`.
    zero: usize,
    values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthReport {
    pub c_omega: f64,
    pub worst_t: f64,
}

impl WienerPath {
    /// Seeded Brownian path on `[t_min, t_max]`; both ends must be grid
    /// multiples of `dt_grid`.
    pub fn sample(seed: u64, t_min: f64, t_max: f64, dt_grid: f64) -> Result<Self> {
        let (n_neg, n_pos) = window_nodes(t_min, t_max, dt_grid)?;
        let sd = dt_grid.sqrt();
        let mut values = vec![0.0; n_neg + n_pos + 1];

        let mut fwd = ChaCha8Rng::seed_from_u64(seed);
        fwd.set_stream(0);
        let mut w = 0.0;
        for i in 1..=n_pos {
            let z: f64 = StandardNormal.sample(&mut fwd);
            w += sd * z;
            values[n_neg + i] = w;
        }

        let mut bwd = ChaCha8Rng::seed_from_u64(seed);
        bwd.set_stream(1);
        let mut w = 0.0;
        for i in 1..=n_neg {
            let z: f64 = StandardNormal.sample(&mut bwd);
            w += sd * z;
            values[n_neg - i] = w;
        }

        Ok(Self {
            seed,
            dt_grid,
            zero: n_neg,
            values,
        })
    }

    /// Deterministic path `t ↦ f(t)` on the grid; `f(0)` is forced to 0.
    pub fn from_fn<F: Fn(f64) -> f64>(t_min: f64, t_max: f64, dt_grid: f64, f: F) -> Result<Self> {
        let (n_neg, n_pos) = window_nodes(t_min, t_max, dt_grid)?;
        let values = (0..=n_neg + n_pos)
            .map(|i| {
                if i == n_neg {
                    0.0
                } else {
                    f((i as f64 - n_neg as f64) * dt_grid)
                }
            })
            .collect();
        Ok(Self {
            seed: 0,
            dt_grid,
            zero: n_neg,
            values,
        })
    }

    /// `ω ≡ 0`.
    pub fn zero(t_min: f64, t_max: f64, dt_grid: f64) -> Result<Self> {
        Self::from_fn(t_min, t_max, dt_grid, |_| 0.0)
    }

    /// `ω(t) = slope · t`.
    pub fn linear(slope: f64, t_min: f64, t_max: f64, dt_grid: f64) -> Result<Self> {
        Self::from_fn(t_min, t_max, dt_grid, |t| slope * t)
    }

    /// Builds a path from raw node values; `values[zero]` must be 0.
    pub fn from_values(dt_grid: f64, zero: usize, values: Vec<f64>) -> Result<Self> {
        if dt_grid <= 0.0 || !dt_grid.is_finite() {
            return Err(Error::InvalidParameter(format!("dt_grid must be positive, got {dt_grid}")));
        }
        if zero >= values.len() || values[zero] != 0.0 {
            return Err(Error::InvalidParameter("path must vanish at its zero node".into()));
        }
        Ok(Self {
            seed: 0,
            dt_grid,
            zero,
            values,
        })
    }

    /// `α·a + β·b` on a common grid.
    pub fn combine(alpha: f64, a: &WienerPath, beta: f64, b: &WienerPath) -> Result<Self> {
        if a.dt_grid != b.dt_grid || a.zero != b.zero || a.values.len() != b.values.len() {
            return Err(Error::SizeMismatch("paths must share grid and window".into()));
        }
        let values = a
            .values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| alpha * x + beta * y)
            .collect();
        Ok(Self {
            seed: 0,
            dt_grid: a.dt_grid,
            zero: a.zero,
            values,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dt_grid(&self) -> f64 {
        self.dt_grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index of the node `t = 0`.
    pub fn zero_index(&self) -> usize {
        self.zero
    }

    pub fn t_min(&self) -> f64 {
        -(self.zero as f64) * self.dt_grid
    }

    pub fn t_max(&self) -> f64 {
        (self.values.len() - 1 - self.zero) as f64 * self.dt_grid
    }

    /// Time of node `i`.
    pub fn time(&self, i: usize) -> f64 {
        (i as f64 - self.zero as f64) * self.dt_grid
    }

    /// Node index of a grid-aligned time inside the window.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let k = grid_steps(t, self.dt_grid)?;
        let i = self.zero as i64 + k;
        if i < 0 || i >= self.values.len() as i64 {
            return Err(self.exhausted(t, t));
        }
        Ok(i as usize)
    }

    /// Error for a request needing `[need_min, need_max]`.
    pub fn exhausted(&self, need_min: f64, need_max: f64) -> Error {
        Error::WindowExhausted {
            t_min: self.t_min(),
            t_max: self.t_max(),
            need_min,
            need_max,
        }
    }

    /// Checks that `[a, b]` lies inside the window.
    pub fn require(&self, a: f64, b: f64) -> Result<()> {
        let slack = GRID_TOL * self.dt_grid * (1.0 + a.abs().max(b.abs()) / self.dt_grid);
        if a < self.t_min() - slack || b > self.t_max() + slack {
            return Err(self.exhausted(a, b));
        }
        Ok(())
    }

    /// `ω(t)`: the node value on the grid, linear interpolation between nodes.
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.require(t, t)?;
        let x = t / self.dt_grid + self.zero as f64;
        let k = x.round();
        if (x - k).abs() <= GRID_TOL * (1.0 + x.abs()) {
            return Ok(self.values[k as usize]);
        }
        let i = x.floor() as usize;
        let i = i.min(self.values.len() - 2);
        let frac = x - i as f64;
        Ok(self.values[i] + frac * (self.values[i + 1] - self.values[i]))
    }

    /// The shifted path `s ↦ ω(t + s) − ω(t)` on `[t_min − t, t_max − t]`.
    pub fn shift(&self, t: f64) -> Result<Self> {
        let k = grid_steps(t, self.dt_grid)?;
        let new_zero = self.zero as i64 + k;
        if new_zero < 0 || new_zero >= self.values.len() as i64 {
            return Err(self.exhausted(t, t));
        }
        let new_zero = new_zero as usize;
        let anchor = self.values[new_zero];
        let mut values: Vec<f64> = self.values.iter().map(|v| v - anchor).collect();
        values[new_zero] = 0.0;
        Ok(Self {
            seed: self.seed,
            dt_grid: self.dt_grid,
            zero: new_zero,
            values,
        })
    }

    /// Grid supremum of `|ω(s)| / (|s| + 1)`.
    pub fn growth_constant(&self) -> GrowthReport {
        let mut best = GrowthReport {
            c_omega: 0.0,
            worst_t: 0.0,
        };
        for (i, v) in self.values.iter().enumerate() {
            let s = self.time(i);
            let r = v.abs() / (s.abs() + 1.0);
            if r > best.c_omega {
                best = GrowthReport {
                    c_omega: r,
                    worst_t: s,
                };
            }
        }
        best
    }

    /// CSV dump `t,omega`, one row per node.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,omega")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{}", fmt_f64(self.time(i)), fmt_f64(*v))?;
        }
        Ok(())
    }
}

fn window_nodes(t_min: f64, t_max: f64, dt_grid: f64) -> Result<(usize, usize)> {
    if !(dt_grid > 0.0) || !dt_grid.is_finite() {
        return Err(Error::InvalidParameter(format!("dt_grid must be positive, got {dt_grid}")));
    }
    if t_min > t_max {
        return Err(Error::InvalidParameter(format!("t_min {t_min} exceeds t_max {t_max}")));
    }
    if t_min > 0.0 || t_max < 0.0 {
        return Err(Error::InvalidParameter("window must contain t = 0".into()));
    }
    let n_neg = -grid_steps(t_min, dt_grid)?;
    let n_pos = grid_steps(t_max, dt_grid)?;
    Ok((n_neg as usize, n_pos as usize))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_is_zero_and_length_matches() {
        let p = WienerPath::sample(11, -2.0, 3.0, 0.25).unwrap();
        assert_eq!(p.eval(0.0).unwrap(), 0.0);
        assert_eq!(p.len(), ((3.0f64 + 2.0) / 0.25).round() as usize + 1);
        assert_eq!(p.t_min(), -2.0);
        assert_eq!(p.t_max(), 3.0);
    }

    #[test]
    fn rejects_bad_windows() {
        assert!(matches!(WienerPath::sample(1, -1.0, 1.0, 0.0), Err(Error::InvalidParameter(_))));
        assert!(matches!(WienerPath::sample(1, -1.0, 1.0, -0.1), Err(Error::InvalidParameter(_))));
        assert!(matches!(WienerPath::sample(1, 2.0, 1.0, 0.1), Err(Error::InvalidParameter(_))));
        assert!(matches!(WienerPath::sample(1, -1.0, 1.03, 0.1), Err(Error::OffGrid { .. })));
    }

    #[test]
    fn same_seed_same_bits_and_windows_overlap() {
        let a = WienerPath::sample(99, -1.0, 1.0, 1e-3).unwrap();
        let b = WienerPath::sample(99, -1.0, 1.0, 1e-3).unwrap();
        assert_eq!(a.values(), b.values());
        let wide = WienerPath::sample(99, -3.0, 2.0, 1e-3).unwrap();
        for i in 0..a.len() {
            let t = a.time(i);
            assert_eq!(a.values()[i], wide.eval(t).unwrap());
        }
        let other = WienerPath::sample(100, -1.0, 1.0, 1e-3).unwrap();
        assert_ne!(a.values(), other.values());
    }

    #[test]
    fn eval_interpolates() {
        let p = WienerPath::from_values(1.0, 0, vec![0.0, 1.0, 3.0]).unwrap();
        assert_eq!(p.eval(1.0).unwrap(), 1.0);
        assert_eq!(p.eval(0.5).unwrap(), 0.5);
        assert_eq!(p.eval(1.5).unwrap(), 2.0);
        assert!(matches!(p.eval(2.5), Err(Error::WindowExhausted { .. })));
    }

    #[test]
    fn shift_identity_and_linear() {
        let p = WienerPath::sample(5, -1.0, 1.0, 0.01).unwrap();
        let s = p.shift(0.0).unwrap();
        assert_eq!(s.values(), p.values());
        let lin = WienerPath::linear(1.0, -2.0, 2.0, 0.125).unwrap();
        let sh = lin.shift(0.5).unwrap();
        for i in 0..sh.len() {
            let t = sh.time(i);
            assert!((sh.values()[i] - t).abs() < 1e-15);
        }
        assert!(matches!(p.shift(0.005), Err(Error::OffGrid { .. })));
        assert!(matches!(p.shift(2.0), Err(Error::WindowExhausted { .. })));
    }

    #[test]
    fn growth_of_zero_and_linear_paths() {
        let z = WienerPath::zero(-1.0, 1.0, 0.1).unwrap();
        assert_eq!(z.growth_constant().c_omega, 0.0);
        let lin = WienerPath::linear(1.0, -10.0, 10.0, 0.5).unwrap();
        let g = lin.growth_constant();
        assert!((g.c_omega - 10.0 / 11.0).abs() < 1e-15);
        assert_eq!(g.worst_t.abs(), 10.0);
    }

    #[test]
    fn csv_dump_has_header_and_rows() {
        let p = WienerPath::linear(2.0, 0.0, 1.0, 0.5).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "t,omega");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[3], "1.0000000000000000e0,2.0000000000000000e0");
    }
}
