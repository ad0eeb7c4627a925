//! Stationary approximations `ζ_δ(θ_t ω)` of white noise and the stationary
//! variables built from them.
//!
//! Three kinds are provided, all linear functionals of the path:
//!
//! * Ornstein-Uhlenbeck: `ξ_δ(θ_t ω) = −δ⁻² ∫_{−∞}^0 e^{s/δ} θ_t ω(s) ds`
//! * mollified derivative: `η_δ(θ_t ω) = −δ⁻² ∫_0^δ φ'(s/δ) θ_t ω(s) ds`
//! * difference quotient: `ζ*_δ(θ_t ω) = (ω(t+δ) − ω(t)) / δ`
//!
//! Pointwise evaluation ([`NoiseKind::eval`]) uses the trapezoid rule at
//! path resolution, interpolating the path when `t` is off the grid. Whole
//! series ([`StationaryNoise::track`]) compute the same trapezoid sums on
//! grid nodes, with the OU history handled by a running exponential sum.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{adaptive_simpson, cumulative_trapezoid, exp_history_series, exp_weight_sum};
use crate::wiener::{grid_steps, WienerPath};
use crate::T_TRUNC;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseVariant {
    Ou,
    MollifierDerivative,
    DifferenceQuotient,
}

impl NoiseVariant {
    pub fn name(self) -> &'static str {
        match self {
            NoiseVariant::Ou => "ou",
            NoiseVariant::MollifierDerivative => "mollifier",
            NoiseVariant::DifferenceQuotient => "diffq",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ou" => Some(NoiseVariant::Ou),
            "mollifier" => Some(NoiseVariant::MollifierDerivative),
            "diffq" => Some(NoiseVariant::DifferenceQuotient),
            _ => None,
        }
    }

    pub const ALL: [NoiseVariant; 3] = [
        NoiseVariant::Ou,
        NoiseVariant::MollifierDerivative,
        NoiseVariant::DifferenceQuotient,
    ];
}

/// A concrete stationary noise: the variant plus its time scale `δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseKind {
    variant: NoiseVariant,
    delta: f64,
    /// `c` in `φ(u) = c·exp(−1/(u(1−u)))`; only used by the mollifier.
    bump_norm: f64,
}

/// Normalisation of the bump so that `∫₀¹ φ = 1`.
pub fn bump_normalization() -> f64 {
    static NORM: OnceLock<f64> = OnceLock::new();
    *NORM.get_or_init(|| {
        let raw = adaptive_simpson(&|u: f64| unnormalized_bump(u), 0.0, 1.0, 1e-16);
        1.0 / raw
    })
}

fn unnormalized_bump(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        0.0
    } else {
        (-1.0 / (u * (1.0 - u))).exp()
    }
}

/// `φ(u)`.
pub fn bump(u: f64, c: f64) -> f64 {
    c * unnormalized_bump(u)
}

/// `φ'(u) = φ(u)(1 − 2u) / (u(1 − u))²`.
pub fn bump_derivative(u: f64, c: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        return 0.0;
    }
    let w = u * (1.0 - u);
    bump(u, c) * (1.0 - 2.0 * u) / (w * w)
}

/// A node-indexed series on a path grid: `values[k]` belongs to node
/// `first + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub first: usize,
    pub values: Vec<f64>,
}

impl Track {
    pub fn at(&self, i: usize) -> f64 {
        self.values[i - self.first]
    }

    pub fn last(&self) -> usize {
        self.first + self.values.len() - 1
    }

    pub fn covers(&self, lo: usize, hi: usize) -> bool {
        !self.values.is_empty() && lo >= self.first && hi <= self.last()
    }

    /// Restriction to nodes `lo..=hi`.
    pub fn slice(&self, lo: usize, hi: usize) -> &[f64] {
        &self.values[lo - self.first..=hi - self.first]
    }
}

/// Anything that can act as `ζ_δ` in the hypothesis certificates and the
/// solvers. Implemented by [`NoiseKind`]; user noises plug in here.
pub trait StationaryNoise: Send + Sync {
    fn name(&self) -> String;

    fn delta(&self) -> f64;

    /// How far back and forward of `t` the value `ζ_δ(θ_t ω)` reads the path.
    fn support(&self) -> (f64, f64);

    fn eval(&self, path: &WienerPath, t: f64) -> Result<f64>;

    /// `ζ_δ(θ_{t_i} ω)` for nodes `lo..=hi`.
    fn track(&self, path: &WienerPath, lo: usize, hi: usize) -> Result<Track> {
        let values = (lo..=hi)
            .map(|i| self.eval(path, path.time(i)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Track { first: lo, values })
    }
}

impl NoiseKind {
    pub fn new(variant: NoiseVariant, delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
        }
        let bump_norm = match variant {
            NoiseVariant::MollifierDerivative => bump_normalization(),
            _ => 0.0,
        };
        Ok(Self {
            variant,
            delta,
            bump_norm,
        })
    }

    pub fn ou(delta: f64) -> Result<Self> {
        Self::new(NoiseVariant::Ou, delta)
    }

    pub fn mollifier(delta: f64) -> Result<Self> {
        Self::new(NoiseVariant::MollifierDerivative, delta)
    }

    pub fn difference_quotient(delta: f64) -> Result<Self> {
        Self::new(NoiseVariant::DifferenceQuotient, delta)
    }

    pub fn variant(&self) -> NoiseVariant {
        self.variant
    }

    pub fn bump_norm(&self) -> f64 {
        self.bump_norm
    }

    /// `δ / dt_grid`, which must be an integer.
    fn delta_nodes(&self, h: f64) -> Result<usize> {
        grid_steps(self.delta, h)
            .map(|k| k as usize)
            .map_err(|_| Error::OffGrid {
                t: self.delta,
                dt_grid: h,
            })
    }

    fn ou_nodes(&self, h: f64) -> usize {
        (T_TRUNC * self.delta / h).round() as usize
    }

    /// `∫_0^t ζ_δ(θ_r ω) dr` by the trapezoid rule on the path grid.
    pub fn integrate(&self, path: &WienerPath, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(0.0);
        }
        let i0 = path.zero_index();
        let it = path.index_of(t)?;
        let (lo, hi) = if it >= i0 { (i0, it) } else { (it, i0) };
        let track = self.track(path, lo, hi)?;
        let v = crate::quadrature::trapezoid(&track.values, path.dt_grid());
        Ok(if it >= i0 { v } else { -v })
    }
}

impl StationaryNoise for NoiseKind {
    fn name(&self) -> String {
        self.variant.name().to_string()
    }

    fn delta(&self) -> f64 {
        self.delta
    }

    fn support(&self) -> (f64, f64) {
        match self.variant {
            NoiseVariant::Ou => (T_TRUNC * self.delta, 0.0),
            _ => (0.0, self.delta),
        }
    }

    fn eval(&self, path: &WienerPath, t: f64) -> Result<f64> {
        let h = path.dt_grid();
        let n = self.delta_nodes(h)?;
        let (back, fwd) = self.support();
        path.require(t - back, t + fwd)?;
        let w0 = path.eval(t)?;
        let d2 = self.delta * self.delta;
        match self.variant {
            NoiseVariant::DifferenceQuotient => Ok((path.eval(t + self.delta)? - w0) / self.delta),
            NoiseVariant::Ou => {
                let j_max = self.ou_nodes(h);
                let mut acc = 0.0;
                for j in 0..=j_max {
                    let s = -(j as f64) * h;
                    let w = if j == 0 || j == j_max { 0.5 } else { 1.0 };
                    acc += w * (s / self.delta).exp() * (path.eval(t + s)? - w0);
                }
                Ok(-h * acc / d2)
            }
            NoiseVariant::MollifierDerivative => {
                let mut acc = 0.0;
                // φ' vanishes at both ends, so the end weights drop out.
                for j in 1..n {
                    let s = j as f64 * h;
                    acc += bump_derivative(j as f64 / n as f64, self.bump_norm) * (path.eval(t + s)? - w0);
                }
                Ok(-h * acc / d2)
            }
        }
    }

    fn track(&self, path: &WienerPath, lo: usize, hi: usize) -> Result<Track> {
        let h = path.dt_grid();
        let n = self.delta_nodes(h)?;
        let v = path.values();
        let d2 = self.delta * self.delta;
        let need = |a: i64, b: i64| -> Result<()> {
            if a < 0 || b >= v.len() as i64 {
                Err(path.exhausted(path.time(lo) - self.support().0, path.time(hi) + self.support().1))
            } else {
                Ok(())
            }
        };
        let values = match self.variant {
            NoiseVariant::DifferenceQuotient => {
                need(lo as i64, (hi + n) as i64)?;
                (lo..=hi).map(|i| (v[i + n] - v[i]) / self.delta).collect()
            }
            NoiseVariant::MollifierDerivative => {
                need(lo as i64, (hi + n) as i64)?;
                let weights: Vec<f64> = (1..n)
                    .map(|j| -h * bump_derivative(j as f64 / n as f64, self.bump_norm) / d2)
                    .collect();
                (lo..=hi)
                    .map(|i| {
                        let base = v[i];
                        weights
                            .iter()
                            .enumerate()
                            .map(|(k, w)| w * (v[i + k + 1] - base))
                            .sum()
                    })
                    .collect()
            }
            NoiseVariant::Ou => {
                let j_max = self.ou_nodes(h);
                need(lo as i64 - j_max as i64, hi as i64)?;
                let rate = 1.0 / self.delta;
                let window = &v[lo - j_max..=hi];
                let hist = exp_history_series(window, h, rate, j_max);
                let wsum = exp_weight_sum(h, rate, j_max);
                hist.iter()
                    .zip(&v[lo..=hi])
                    .map(|(f, w)| -(f - w * wsum) / d2)
                    .collect()
            }
        };
        Ok(Track { first: lo, values })
    }
}

/// Source of the stationary variable `x`: a stationary noise, or white
/// noise itself (`x_0`).
#[derive(Clone, Copy)]
pub enum XSource<'a> {
    Noise(&'a dyn StationaryNoise),
    White,
}

/// History nodes for an exponential kernel of the given rate.
pub fn history_nodes(rate: f64, h: f64) -> usize {
    (T_TRUNC / (rate * h)).round() as usize
}

/// `∫_{−L}^0 e^{rate·r} θ_{t_i} ω(r) dr` for nodes `lo..=hi`, `L = T_TRUNC / rate`.
pub fn white_history_track(path: &WienerPath, rate: f64, lo: usize, hi: usize) -> Result<Track> {
    let h = path.dt_grid();
    let j_max = history_nodes(rate, h);
    if lo < j_max || hi >= path.len() {
        return Err(path.exhausted(path.time(lo.min(hi)) - T_TRUNC / rate, path.time(hi.min(path.len() - 1))));
    }
    let v = path.values();
    let hist = exp_history_series(&v[lo - j_max..=hi], h, rate, j_max);
    let wsum = exp_weight_sum(h, rate, j_max);
    let values = hist.iter().zip(&v[lo..=hi]).map(|(f, w)| f - w * wsum).collect();
    Ok(Track { first: lo, values })
}

/// `∫_{−L}^0 e^{rate·r} ζ(θ_{t_i + r} ω) dr` for nodes `lo..=hi`, given a
/// noise track that reaches back far enough.
pub fn noise_history_track(noise: &Track, h: f64, rate: f64, lo: usize, hi: usize) -> Result<Track> {
    let j_max = history_nodes(rate, h);
    if lo < noise.first + j_max || hi > noise.last() {
        return Err(Error::InvalidParameter("noise track too short for history integral".into()));
    }
    let window = noise.slice(lo - j_max, hi);
    let values = exp_history_series(window, h, rate, j_max);
    Ok(Track { first: lo, values })
}

/// Path interval `[a, b]` (as times) needed to evaluate `x(θ_t ω)` for
/// `t ∈ [t_lo, t_hi]`.
pub fn x_requirement(source: XSource<'_>, t_lo: f64, t_hi: f64) -> (f64, f64) {
    match source {
        XSource::White => (t_lo - T_TRUNC, t_hi),
        XSource::Noise(n) => {
            let (back, fwd) = n.support();
            (t_lo - T_TRUNC - back, t_hi + fwd)
        }
    }
}

/// `x(θ_{t_i} ω)` for nodes `lo..=hi`:
/// `x_δ = ∫_{−∞}^0 e^r ζ_δ(θ_{r+t} ω) dr`, `x_0 = −∫_{−∞}^0 e^r θ_t ω(r) dr`.
pub fn stationary_x_track(source: XSource<'_>, path: &WienerPath, lo: usize, hi: usize) -> Result<Track> {
    let h = path.dt_grid();
    let j_max = history_nodes(1.0, h);
    match source {
        XSource::White => {
            let mut t = white_history_track(path, 1.0, lo, hi)?;
            t.values.iter_mut().for_each(|x| *x = -*x);
            Ok(t)
        }
        XSource::Noise(n) => {
            if lo < j_max {
                let (a, b) = x_requirement(source, path.time(0), path.time(hi));
                return Err(path.exhausted(a, b));
            }
            let z = n.track(path, lo - j_max, hi)?;
            noise_history_track(&z, h, 1.0, lo, hi)
        }
    }
}

/// Pointwise `x(θ_t ω)` at a grid-aligned `t`.
pub fn stationary_x(source: XSource<'_>, path: &WienerPath, t: f64) -> Result<f64> {
    let (a, b) = x_requirement(source, t, t);
    path.require(a, b)?;
    let i = path.index_of(t)?;
    Ok(stationary_x_track(source, path, i, i)?.values[0])
}

/// `∫_0^{t_i} ζ(θ_r ω) dr` for all nodes of a track that contains the origin.
pub fn integral_track(noise: &Track, zero: usize, h: f64) -> Track {
    let cum = cumulative_trapezoid(&noise.values, h);
    let base = cum[zero - noise.first];
    Track {
        first: noise.first,
        values: cum.iter().map(|c| c - base).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifyTolerances {
    /// A gap sequence passes when `gap[k+1] ≤ slack · gap[k]`.
    pub slack: f64,
}

impl Default for CertifyTolerances {
    fn default() -> Self {
        Self { slack: 1.1 }
    }
}

/// Empirical certificate of the noise hypotheses on `[−T, T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub kind: String,
    pub delta: Vec<f64>,
    /// `sup_{|t|≤T} |ζ_δ(θ_t ω)| / (C_ω (|t|+1))`.
    pub k_delta: Vec<f64>,
    /// `sup_{|t|≤T} |∫_0^t ζ_δ(θ_r ω) dr − ω(t)|`.
    pub integral_gap: Vec<f64>,
    /// `sup_{|t|≤T} |x_δ(θ_t ω) − x_0(θ_t ω)|`.
    pub x_gap: Vec<f64>,
    pub pass_integral: bool,
    pub pass_x: bool,
    /// Difference-quotient sanity ceiling `K_δ ≤ 2(1+δ)/δ`; `None` for
    /// other kinds.
    pub pass_k_ceiling: Option<bool>,
    pub pass: bool,
    pub horizon: f64,
    pub tolerances: CertifyTolerances,
}

/// `gap[k+1] ≤ slack · gap[k]` along the sequence.
pub fn monotone_with_slack(gaps: &[f64], slack: f64) -> bool {
    gaps.windows(2).all(|w| w[1] <= slack * w[0])
}

/// Estimates `K_δ` and the two convergence gaps for every `δ`.
pub fn certify_hypotheses<N, F>(
    make: F,
    path: &WienerPath,
    horizon: f64,
    deltas: &[f64],
    tol: CertifyTolerances,
) -> Result<HypothesisReport>
where
    N: StationaryNoise,
    F: Fn(f64) -> Result<N>,
{
    if deltas.is_empty() {
        return Err(Error::Empty("delta sequence".into()));
    }
    let h = path.dt_grid();
    let lo = path.index_of(-horizon)?;
    let hi = path.index_of(horizon)?;
    let c_omega = path.growth_constant().c_omega;
    let x0 = stationary_x_track(XSource::White, path, lo, hi)?;
    let mut name = String::new();
    let mut k_delta = Vec::with_capacity(deltas.len());
    let mut integral_gaps = Vec::with_capacity(deltas.len());
    let mut x_gaps = Vec::with_capacity(deltas.len());
    for &d in deltas {
        let noise = make(d)?;
        name = noise.name();
        let (a, b) = x_requirement(XSource::Noise(&noise), -horizon, horizon);
        path.require(a, b)?;
        let z = noise.track(path, lo, hi)?;
        let mut k = 0.0f64;
        if c_omega > 0.0 {
            for i in lo..=hi {
                k = k.max(z.at(i).abs() / (c_omega * (path.time(i).abs() + 1.0)));
            }
        }
        k_delta.push(k);
        let int = integral_track(&z, path.zero_index(), h);
        let gap_int = (lo..=hi)
            .map(|i| (int.at(i) - path.values()[i]).abs())
            .fold(0.0, f64::max);
        integral_gaps.push(gap_int);
        let xd = stationary_x_track(XSource::Noise(&noise), path, lo, hi)?;
        let gap_x = (lo..=hi).map(|i| (xd.at(i) - x0.at(i)).abs()).fold(0.0, f64::max);
        x_gaps.push(gap_x);
    }
    let pass_integral = monotone_with_slack(&integral_gaps, tol.slack);
    let pass_x = monotone_with_slack(&x_gaps, tol.slack);
    let pass_k_ceiling = (name == NoiseVariant::DifferenceQuotient.name()).then(|| {
        k_delta
            .iter()
            .zip(deltas)
            .all(|(k, d)| *k <= 2.0 * (1.0 + d) / d)
    });
    let pass = pass_integral && pass_x && pass_k_ceiling.unwrap_or(true);
    Ok(HypothesisReport {
        kind: name,
        delta: deltas.to_vec(),
        k_delta,
        integral_gap: integral_gaps,
        x_gap: x_gaps,
        pass_integral,
        pass_x,
        pass_k_ceiling,
        pass,
        horizon,
        tolerances: tol,
    })
}

/// [`certify_hypotheses`] for one of the built-in variants.
pub fn certify_variant(
    variant: NoiseVariant,
    path: &WienerPath,
    horizon: f64,
    deltas: &[f64],
    tol: CertifyTolerances,
) -> Result<HypothesisReport> {
    certify_hypotheses(|d| NoiseKind::new(variant, d), path, horizon, deltas, tol)
}

/// Window `[a, b]` a path needs for [`certify_hypotheses`].
pub fn certify_window(variant: NoiseVariant, horizon: f64, deltas: &[f64]) -> (f64, f64) {
    let dmax = deltas.iter().cloned().fold(0.0, f64::max);
    match variant {
        NoiseVariant::Ou => (-horizon - T_TRUNC - T_TRUNC * dmax, horizon),
        _ => (-horizon - T_TRUNC, horizon + dmax),
    }
}
