//! Stationary auxiliary processes and the state transforms that turn the
//! white-noise equations into random PDEs.
//!
//! * additive: `x*(θ_t ω) = ε φ ∫_{−∞}^t e^{−η(t−s)} ζ(θ_s ω) ds`, transform
//!   `p = u − x*`;
//! * multiplicative: `y(θ_t ω) = ε ∫_{−∞}^0 e^s ζ(θ_{s+t} ω) ds`, transform
//!   `q = e^{−y} u`.
//!
//! The white versions replace `ζ ds` by `dω` and integrate by parts, so no
//! stochastic integral is discretised. `x*` is kept as a scalar history
//! integral; `φ` is applied only when a field is needed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::galerkin::Field;
use crate::noise::{
    history_nodes, noise_history_track, stationary_x_track, white_history_track, NoiseKind, StationaryNoise, Track,
    XSource,
};
use crate::wiener::WienerPath;
use crate::T_TRUNC;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flavor {
    Additive,
    Multiplicative,
}

/// `p = u − aux·φ` or `q = e^{−aux} u`.
pub fn to_transformed(flavor: Flavor, u: &Field, aux: f64, phi: Option<&Field>) -> Field {
    match flavor {
        Flavor::Additive => match phi {
            Some(phi) => u.add_scaled(-aux, phi),
            None => u.clone(),
        },
        Flavor::Multiplicative => u.scaled((-aux).exp()),
    }
}

/// Inverse of [`to_transformed`].
pub fn from_transformed(flavor: Flavor, v: &Field, aux: f64, phi: Option<&Field>) -> Field {
    match flavor {
        Flavor::Additive => match phi {
            Some(phi) => v.add_scaled(aux, phi),
            None => v.clone(),
        },
        Flavor::Multiplicative => v.scaled(aux.exp()),
    }
}

/// Noise source of an auxiliary process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AuxSource {
    Noise(NoiseKind),
    White,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryProcess {
    pub flavor: Flavor,
    pub source: AuxSource,
    pub epsilon: f64,
    /// Direction `φ` (additive only).
    pub phi: Option<Field>,
    /// Damping rate; the multiplicative process always uses 1.
    pub rate: f64,
}

/// Value of an auxiliary process: a field for `x*`, a scalar for `y`.
#[derive(Debug, Clone, PartialEq)]
pub enum AuxValue {
    Field(Field),
    Scalar(f64),
}

impl AuxValue {
    /// `|x*|` or `|y|`.
    pub fn magnitude(&self) -> f64 {
        match self {
            AuxValue::Field(f) => f.l2_norm(),
            AuxValue::Scalar(y) => y.abs(),
        }
    }
}

impl AuxiliaryProcess {
    pub fn additive(source: AuxSource, epsilon: f64, phi: Field, rate: f64) -> Result<Self> {
        let p = Self {
            flavor: Flavor::Additive,
            source,
            epsilon,
            phi: Some(phi),
            rate,
        };
        p.check()?;
        Ok(p)
    }

    pub fn multiplicative(source: AuxSource, epsilon: f64) -> Result<Self> {
        let p = Self {
            flavor: Flavor::Multiplicative,
            source,
            epsilon,
            phi: None,
            rate: 1.0,
        };
        p.check()?;
        Ok(p)
    }

    fn check(&self) -> Result<()> {
        if !(self.epsilon >= 0.0) {
            return Err(Error::InvalidParameter(format!("epsilon must be nonnegative, got {}", self.epsilon)));
        }
        if !(self.rate > 0.0) {
            return Err(Error::InvalidParameter(format!("rate must be positive, got {}", self.rate)));
        }
        Ok(())
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self {
            epsilon,
            ..self.clone()
        }
    }

    pub fn with_source(&self, source: AuxSource) -> Self {
        Self {
            source,
            ..self.clone()
        }
    }

    /// Path interval needed for `t ∈ [t_lo, t_hi]`.
    pub fn requirement(&self, t_lo: f64, t_hi: f64) -> (f64, f64) {
        let hist = T_TRUNC / self.rate;
        let (back, fwd) = match &self.source {
            AuxSource::Noise(n) => n.support(),
            AuxSource::White => (0.0, 0.0),
        };
        ((t_lo - hist - back).min(0.0), (t_hi + fwd).max(0.0))
    }

    /// Scalar part at nodes `lo..=hi`: `x* = value·φ` (additive) or
    /// `y = value` (multiplicative).
    pub fn scalar_track(&self, path: &WienerPath, lo: usize, hi: usize) -> Result<Track> {
        let (a, b) = self.requirement(path.time(lo), path.time(hi));
        path.require(a, b)?;
        let h = path.dt_grid();
        let mut tr = match (self.flavor, &self.source) {
            (Flavor::Additive, AuxSource::Noise(n)) => {
                let j = history_nodes(self.rate, h);
                let z = n.track(path, lo - j, hi)?;
                noise_history_track(&z, h, self.rate, lo, hi)?
            }
            (Flavor::Additive, AuxSource::White) => {
                // ∫_{−∞}^t e^{−η(t−s)} dω(s) = −η ∫_{−∞}^0 e^{ηr} θ_t ω(r) dr
                let mut t = white_history_track(path, self.rate, lo, hi)?;
                t.values.iter_mut().for_each(|v| *v *= -self.rate);
                t
            }
            (Flavor::Multiplicative, AuxSource::Noise(n)) => stationary_x_track(XSource::Noise(n), path, lo, hi)?,
            (Flavor::Multiplicative, AuxSource::White) => stationary_x_track(XSource::White, path, lo, hi)?,
        };
        tr.values.iter_mut().for_each(|v| *v *= self.epsilon);
        Ok(tr)
    }

    /// Scalar part at a grid-aligned `t`.
    pub fn scalar(&self, path: &WienerPath, t: f64) -> Result<f64> {
        let (a, b) = self.requirement(t, t);
        path.require(a, b)?;
        let i = path.index_of(t)?;
        Ok(self.scalar_track(path, i, i)?.values[0])
    }

    /// Norm of the value for a scalar part: `|s|·|φ|` or `|s|`.
    pub fn magnitude_of(&self, scalar: f64) -> f64 {
        match &self.phi {
            Some(phi) if self.flavor == Flavor::Additive => scalar.abs() * phi.l2_norm(),
            _ => scalar.abs(),
        }
    }
}

/// `x*(θ_t ω)` or `y(θ_t ω)` at a grid-aligned `t`.
pub fn eval_aux(proc: &AuxiliaryProcess, path: &WienerPath, t: f64) -> Result<AuxValue> {
    let s = proc.scalar(path, t)?;
    Ok(match (proc.flavor, &proc.phi) {
        (Flavor::Additive, Some(phi)) => AuxValue::Field(phi.scaled(s)),
        _ => AuxValue::Scalar(s),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitRow {
    pub delta: f64,
    /// `sup_t |aux_δ(θ_t ω) − aux_0(θ_t ω)|`.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub flavor: Flavor,
    pub epsilon: f64,
    pub t_range: (f64, f64),
    pub rows: Vec<LimitRow>,
    /// `sup_t |aux_0(θ_t ω)|` over the same range.
    pub white_sup: f64,
}

/// Gaps between each process and its white limit over `t ∈ [−T, 0]`
/// (additive) or `|t| ≤ T` (multiplicative). All processes must share
/// flavor and `ε`; their sources must be stationary noises.
pub fn limit_check(procs: &[AuxiliaryProcess], path: &WienerPath, horizon: f64) -> Result<LimitReport> {
    let first = procs.first().ok_or_else(|| Error::Empty("process list".into()))?;
    let t_range = match first.flavor {
        Flavor::Additive => (-horizon, 0.0),
        Flavor::Multiplicative => (-horizon, horizon),
    };
    let lo = path.index_of(t_range.0)?;
    let hi = path.index_of(t_range.1)?;
    let white = first.with_source(AuxSource::White).scalar_track(path, lo, hi)?;
    let white_sup = white.values.iter().map(|v| first.magnitude_of(*v)).fold(0.0, f64::max);
    let mut rows = Vec::with_capacity(procs.len());
    for p in procs {
        if p.flavor != first.flavor || p.epsilon != first.epsilon {
            return Err(Error::InvalidParameter("limit_check needs a common flavor and epsilon".into()));
        }
        let AuxSource::Noise(n) = &p.source else {
            return Err(Error::InvalidParameter("limit_check compares stationary noises to white noise".into()));
        };
        let tr = p.scalar_track(path, lo, hi)?;
        let gap = tr
            .values
            .iter()
            .zip(&white.values)
            .map(|(a, b)| p.magnitude_of(a - b))
            .fold(0.0, f64::max);
        rows.push(LimitRow { delta: n.delta(), gap });
    }
    Ok(LimitReport {
        flavor: first.flavor,
        epsilon: first.epsilon,
        t_range,
        rows,
        white_sup,
    })
}

/// `sup_{|t|≤T} |aux(θ_t ω)| / (|t| + 1)` on the available window.
pub fn growth_surrogate(proc: &AuxiliaryProcess, path: &WienerPath, horizon: f64) -> Result<f64> {
    let lo = path.index_of(-horizon)?;
    let hi = path.index_of(horizon)?;
    let tr = proc.scalar_track(path, lo, hi)?;
    Ok((lo..=hi)
        .map(|i| proc.magnitude_of(tr.at(i)) / (path.time(i).abs() + 1.0))
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::NoiseKind;

    fn e1() -> Field {
        Field::mode(4, 1, 1.0)
    }

    #[test]
    fn epsilon_zero_gives_zero() {
        let p = WienerPath::sample(1, -42.0, 1.0, 2.5e-4).unwrap();
        let a = AuxiliaryProcess::additive(AuxSource::White, 0.0, e1(), 1.0).unwrap();
        assert_eq!(eval_aux(&a, &p, 0.0).unwrap().magnitude(), 0.0);
        let m = AuxiliaryProcess::multiplicative(AuxSource::Noise(NoiseKind::ou(0.05).unwrap()), 0.0).unwrap();
        assert_eq!(eval_aux(&m, &p, 0.0).unwrap(), AuxValue::Scalar(0.0));
    }

    #[test]
    fn white_values_on_linear_path() {
        let p = WienerPath::linear(1.0, -42.0, 2.0, 2.5e-4).unwrap();
        let m = AuxiliaryProcess::multiplicative(AuxSource::White, 0.3).unwrap();
        let a = AuxiliaryProcess::additive(AuxSource::White, 0.3, e1(), 1.0).unwrap();
        for t in [0.0, 1.0, 2.0] {
            assert!((m.scalar(&p, t).unwrap() - 0.3).abs() < 1e-6);
            assert!((a.scalar(&p, t).unwrap() - 0.3).abs() < 1e-6);
        }
        let a2 = AuxiliaryProcess::additive(AuxSource::White, 0.3, e1(), 2.0).unwrap();
        assert!((a2.scalar(&p, 0.0).unwrap() - 0.15).abs() < 1e-6);
    }

    #[test]
    fn transforms_invert() {
        let u = Field::from_coeffs(vec![1.0, -2.0, 0.5, 0.0]);
        let phi = Field::from_coeffs(vec![0.5, 0.25, 0.0, 0.0]);
        assert_eq!(to_transformed(Flavor::Additive, &u, 0.0, Some(&phi)), u);
        assert_eq!(to_transformed(Flavor::Multiplicative, &u, 0.0, None), u);
        let p = to_transformed(Flavor::Additive, &u, 0.75, Some(&phi));
        assert_eq!(from_transformed(Flavor::Additive, &p, 0.75, Some(&phi)), u);
        let q = to_transformed(Flavor::Multiplicative, &u, 2f64.ln(), None);
        for (a, b) in q.coeffs.iter().zip(&u.coeffs) {
            assert!((a - b / 2.0).abs() <= 1e-16 * b.abs());
        }
        let back = from_transformed(Flavor::Multiplicative, &q, 2f64.ln(), None);
        assert!(back.l2_distance(&u) <= 1e-15 * u.l2_norm());
    }

    #[test]
    fn additive_noise_process_solves_its_ode() {
        let p = WienerPath::sample(4, -43.0, 1.0, 2.5e-4).unwrap();
        let k = NoiseKind::difference_quotient(0.05).unwrap();
        let proc = AuxiliaryProcess::additive(AuxSource::Noise(k), 0.5, e1(), 1.5).unwrap();
        let h = p.dt_grid();
        let lo = p.index_of(-0.5).unwrap();
        let hi = p.index_of(0.5).unwrap();
        let x = proc.scalar_track(&p, lo, hi).unwrap();
        let z = k.track(&p, lo, hi).unwrap();
        // Exact one-step solution of ẋ = −rate·x + εζ with ζ integrated by the
        // trapezoid rule against e^{−rate(t−s)}.
        let r = (-1.5 * h).exp();
        let mut worst = 0.0f64;
        let mut fd = 0.0f64;
        for i in lo..hi {
            let next = r * x.at(i) + 0.5 * h * 0.5 * (z.at(i + 1) + r * z.at(i));
            worst = worst.max((x.at(i + 1) - next).abs());
            let resid = (x.at(i + 1) - x.at(i)) / h + 1.5 * x.at(i) - 0.5 * z.at(i);
            fd = fd.max(resid.abs());
        }
        assert!(worst < 1e-10, "{worst}");
        // Forward-difference residual: |r−1+rate·h| ≤ rate²h²/2 plus the
        // noise change over one step.
        let dz = (lo..hi).map(|i| (z.at(i + 1) - z.at(i)).abs()).fold(0.0, f64::max);
        let zmax = z.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let xmax = x.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(fd <= 0.5 * 0.5 * dz + h * (0.75 * zmax + 2.25 * xmax) + 1e-9, "{fd}");
    }

    #[test]
    fn stationarity_under_shift() {
        let p = WienerPath::sample(9, -45.0, 3.0, 2.5e-4).unwrap();
        let k = NoiseKind::ou(0.05).unwrap();
        let proc = AuxiliaryProcess::multiplicative(AuxSource::Noise(k), 0.4).unwrap();
        let s = 1.0;
        let shifted = p.shift(s).unwrap();
        let a = proc.scalar(&shifted, 0.5).unwrap();
        let b = proc.scalar(&p, s + 0.5).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn linear_in_epsilon() {
        let p = WienerPath::sample(2, -42.0, 1.0, 2.5e-4).unwrap();
        let m = AuxiliaryProcess::multiplicative(AuxSource::White, 0.2).unwrap();
        let a = m.scalar(&p, 0.5).unwrap();
        let b = m.with_epsilon(0.4).scalar(&p, 0.5).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn limit_check_on_zero_path() {
        let p = WienerPath::zero(-46.0, 2.0, 2.5e-4).unwrap();
        let procs: Vec<_> = [0.1, 0.05]
            .iter()
            .map(|d| AuxiliaryProcess::multiplicative(AuxSource::Noise(NoiseKind::ou(*d).unwrap()), 0.25).unwrap())
            .collect();
        let r = limit_check(&procs, &p, 1.0).unwrap();
        assert!(r.rows.iter().all(|row| row.gap == 0.0));
        assert_eq!(r.white_sup, 0.0);
        assert!(matches!(limit_check(&[], &p, 1.0), Err(Error::Empty(_))));
    }
}
