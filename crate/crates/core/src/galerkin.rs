//! Sine-spectral discretisation of the Dirichlet problem on (0, 1).
//!
//! A [`Field`] holds coefficients against `e_k(x) = √2 sin(kπx)`, which are
//! the orthonormal eigenfunctions of `−Δ` with eigenvalues `λ_k = k²π²`.
//! Grid samples live on the interior nodes `x_j = j/(n+1)`, `j = 1..n`.
//! With the trapezoid weight `1/(n+1)` the discrete sine transform is exactly
//! orthogonal, so [`SineBasis::from_samples`] inverts
//! [`SineBasis::to_samples`] whenever `n ≥ N`.

use std::f64::consts::{PI, SQRT_2};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::fmt_f64;

/// `λ_k = k²π²` for the 1-based mode index `k`.
pub fn eigenvalue(k: usize) -> f64 {
    let k = k as f64;
    k * k * PI * PI
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub coeffs: Vec<f64>,
}

impl Field {
    pub fn zeros(n_modes: usize) -> Self {
        Self {
            coeffs: vec![0.0; n_modes],
        }
    }

    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    /// `amplitude · e_k` (1-based `k`).
    pub fn mode(n_modes: usize, k: usize, amplitude: f64) -> Self {
        let mut f = Self::zeros(n_modes);
        f.coeffs[k - 1] = amplitude;
        f
    }

    /// Copies `coeffs` into `n_modes` slots, truncating or zero-padding.
    pub fn resized(coeffs: &[f64], n_modes: usize) -> Self {
        let mut f = Self::zeros(n_modes);
        for (d, s) in f.coeffs.iter_mut().zip(coeffs) {
            *d = *s;
        }
        f
    }

    pub fn n_modes(&self) -> usize {
        self.coeffs.len()
    }

    /// `|u|²`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// `|u|`.
    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// `‖u‖² = Σ λ_k u_k²`.
    pub fn h1_norm_sq(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| eigenvalue(i + 1) * c * c)
            .sum()
    }

    /// `‖u‖`.
    pub fn h1_norm(&self) -> f64 {
        self.h1_norm_sq().sqrt()
    }

    /// `‖u‖²_* = Σ u_k² / λ_k`, the squared `V*` norm.
    pub fn dual_norm_sq(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * c / eigenvalue(i + 1))
            .sum()
    }

    /// `|u − v|` in coefficient space.
    pub fn l2_distance(&self, other: &Field) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// `‖u − v‖`.
    pub fn h1_distance(&self, other: &Field) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .enumerate()
            .map(|(i, (a, b))| eigenvalue(i + 1) * (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, s: f64) -> Field {
        Field::from_coeffs(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// `self + s · other`.
    pub fn add_scaled(&self, s: f64, other: &Field) -> Field {
        Field::from_coeffs(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + s * b)
                .collect(),
        )
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// CSV `k,coeff`.
    pub fn write_coeffs_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "k,coeff")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            writeln!(out, "{},{}", i + 1, fmt_f64(*c))?;
        }
        Ok(())
    }

    /// CSV `x,u` on `n_grid` interior nodes plus the two boundary zeros.
    pub fn write_samples_csv<W: Write>(&self, n_grid: usize, mut out: W) -> Result<()> {
        let basis = SineBasis::new(self.n_modes(), n_grid)?;
        let v = basis.to_samples(self)?;
        let h = 1.0 / (n_grid + 1) as f64;
        writeln!(out, "x,u")?;
        writeln!(out, "{},{}", fmt_f64(0.0), fmt_f64(0.0))?;
        for (j, u) in v.iter().enumerate() {
            writeln!(out, "{},{}", fmt_f64((j + 1) as f64 * h), fmt_f64(*u))?;
        }
        writeln!(out, "{},{}", fmt_f64(1.0), fmt_f64(0.0))?;
        Ok(())
    }
}

/// Tabulated basis `e_k(x_j)` for a fixed mode count and grid.
#[derive(Debug, Clone)]
pub struct SineBasis {
    n_modes: usize,
    n_grid: usize,
    /// Row-major `n_grid × n_modes`.
    table: Vec<f64>,
}

impl SineBasis {
    /// Requires `n_grid ≥ 2 · n_modes`.
    pub fn new(n_modes: usize, n_grid: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::InvalidParameter("n_modes must be positive".into()));
        }
        if n_grid < 2 * n_modes {
            return Err(Error::InvalidParameter(format!(
                "n_grid {n_grid} below the anti-aliasing floor 2·{n_modes}"
            )));
        }
        let np1 = (n_grid + 1) as f64;
        let mut table = Vec::with_capacity(n_grid * n_modes);
        for j in 1..=n_grid {
            for k in 1..=n_modes {
                // Reduce k·j mod 2(n+1) so the sine argument stays small.
                let m = (k * j) % (2 * (n_grid + 1));
                table.push(SQRT_2 * (PI * m as f64 / np1).sin());
            }
        }
        Ok(Self {
            n_modes,
            n_grid,
            table,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_grid(&self) -> usize {
        self.n_grid
    }

    /// Interior node `x_j`, 1-based.
    pub fn node(&self, j: usize) -> f64 {
        j as f64 / (self.n_grid + 1) as f64
    }

    fn check_field(&self, field: &Field) -> Result<()> {
        if field.n_modes() != self.n_modes {
            return Err(Error::SizeMismatch(format!(
                "field has {} modes, basis {}",
                field.n_modes(),
                self.n_modes
            )));
        }
        Ok(())
    }

    pub fn to_samples(&self, field: &Field) -> Result<Vec<f64>> {
        self.check_field(field)?;
        let mut out = vec![0.0; self.n_grid];
        self.to_samples_into(&field.coeffs, &mut out);
        Ok(out)
    }

    /// Unchecked transform into a caller-provided buffer.
    pub fn to_samples_into(&self, coeffs: &[f64], out: &mut [f64]) {
        for (row, o) in self.table.chunks_exact(self.n_modes).zip(out.iter_mut()) {
            *o = row.iter().zip(coeffs).map(|(e, c)| e * c).sum();
        }
    }

    pub fn from_samples(&self, values: &[f64]) -> Result<Field> {
        if values.len() != self.n_grid {
            return Err(Error::SizeMismatch(format!(
                "{} samples for a grid of {}",
                values.len(),
                self.n_grid
            )));
        }
        let mut f = Field::zeros(self.n_modes);
        self.from_samples_into(values, &mut f.coeffs);
        Ok(f)
    }

    /// Unchecked projection into a caller-provided buffer.
    pub fn from_samples_into(&self, values: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|c| *c = 0.0);
        for (row, v) in self.table.chunks_exact(self.n_modes).zip(values) {
            for (c, e) in out.iter_mut().zip(row) {
                *c += e * v;
            }
        }
        let w = 1.0 / (self.n_grid + 1) as f64;
        out.iter_mut().for_each(|c| *c *= w);
    }
}

/// `(∫₀¹ |u|^p)^{1/p}` by the trapezoid rule on `n_grid` interior nodes and
/// the zero boundary values.
pub fn lp_norm(field: &Field, p: f64, n_grid: usize) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("p must be at least 1, got {p}")));
    }
    let basis = SineBasis::new(field.n_modes(), n_grid.max(2 * field.n_modes()))?;
    let v = basis.to_samples(field)?;
    Ok(lp_norm_of_samples(&v, p).powf(1.0 / p))
}

/// `∫₀¹ |u|^p` from interior samples (boundary values are zero).
pub fn lp_norm_of_samples(v: &[f64], p: f64) -> f64 {
    let h = 1.0 / (v.len() + 1) as f64;
    h * v.iter().map(|x| x.abs().powf(p)).sum::<f64>()
}
