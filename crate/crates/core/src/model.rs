//! Problem data `(a, ℓ, f, g, h, ε, …)` and the checks of the standing
//! assumptions.
//!
//! Two reaction regimes are supported, because global Lipschitz continuity
//! of `f` and the polynomial dissipativity bound with `p > 2` cannot hold at
//! the same time:
//!
//! * `p = 2`: `f` globally Lipschitz (constant `eta`) with linear growth
//!   (constant `c_f`); used with additive and multiplicative coupling.
//! * `p > 2`: `−κ − α₁|s|^p ≤ f(s)s ≤ κ − α₂|s|^p` and
//!   `|f(s)| ≤ c_f(|s|^{p−1} + 1)`; used with the general coupling.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::galerkin::{eigenvalue, Field};
use crate::manifest::sha256_hex;
use crate::noise::{integral_track, StationaryNoise};
use crate::quadrature::adaptive_simpson;
use crate::solver::{self, SolveConfig};
use crate::wiener::WienerPath;

/// Shape of the nonlocal coefficient `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AProfile {
    /// `a(s) = m + (m̃ − m) / (1 + s²)`.
    Rational,
    /// `a(s) = m`.
    Constant,
}

/// Weight `ℓ` of the linear functional `l(u) = ∫₀¹ ℓ u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LWeight {
    Constant { value: f64 },
    /// Piecewise-linear interpolant of values on a uniform grid of `[0, 1]`
    /// (endpoints included).
    Samples { values: Vec<f64> },
}

impl LWeight {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            LWeight::Constant { value } => *value,
            LWeight::Samples { values } => match values.len() {
                0 => 0.0,
                1 => values[0],
                n => {
                    let y = x.clamp(0.0, 1.0) * (n - 1) as f64;
                    let i = (y.floor() as usize).min(n - 2);
                    let fr = y - i as f64;
                    values[i] + fr * (values[i + 1] - values[i])
                }
            },
        }
    }
}

/// Reaction term `f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FProfile {
    /// `f(s) = −s + ½ sin s`.
    Sine,
    /// `f(s) = s − s³`.
    Cubic,
    /// `f(s) = slope · s`.
    Linear { slope: f64 },
}

impl FProfile {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            FProfile::Sine => -s + 0.5 * s.sin(),
            FProfile::Cubic => s - s * s * s,
            FProfile::Linear { slope } => slope * s,
        }
    }
}

/// Scalar time profile used for `ψ₁`, `ψ₂` and forcing modulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TimeProfile {
    Zero,
    Constant { value: f64 },
    /// `amplitude · e^{−rate·t}`.
    Exponential { amplitude: f64, rate: f64 },
}

impl TimeProfile {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TimeProfile::Zero => 0.0,
            TimeProfile::Constant { value } => *value,
            TimeProfile::Exponential { amplitude, rate } => amplitude * (-rate * t).exp(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            TimeProfile::Zero => true,
            TimeProfile::Constant { value } => *value == 0.0,
            TimeProfile::Exponential { amplitude, .. } => *amplitude == 0.0,
        }
    }
}

/// How the noise enters the equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Coupling {
    /// `ε φ ζ`, with `φ` given by its sine coefficients.
    Additive { phi: Vec<f64> },
    /// `ε u ζ`.
    Multiplicative,
    /// `ε g(t, u) ζ` with `g(t, s) = d₁|s|^{q−2}s + ψ₁(t)`.
    General {
        d1: f64,
        d2: f64,
        q: f64,
        psi1: TimeProfile,
        psi2: TimeProfile,
    },
}

/// Forcing `h(t, x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Forcing {
    Zero,
    /// Time-independent field.
    Field { coeffs: Vec<f64> },
    /// `profile(t) · field`.
    Modulated { coeffs: Vec<f64>, profile: TimeProfile },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `p = 2`, globally Lipschitz reaction.
    Lipschitz,
    /// `p > 2`, polynomial reaction.
    Polynomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub m: f64,
    pub m_tilde: f64,
    pub a_profile: AProfile,
    pub l_weight: LWeight,
    pub f_profile: FProfile,
    /// Lipschitz constant of `f`.
    pub eta: f64,
    /// Growth constant of `f`.
    pub c_f: f64,
    pub kappa: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub p: f64,
    pub coupling: Coupling,
    pub forcing: Forcing,
    pub epsilon: f64,
    /// Damping rate of the auxiliary Ornstein-Uhlenbeck variable `x*`.
    pub eta_damp: f64,
    /// Constant `c` of the energy estimate; derived from the Young
    /// inequality when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_const: Option<f64>,
}

impl ModelSpec {
    /// Globally Lipschitz `p = 2` model with additive noise along `e₁`.
    pub fn default_additive() -> Self {
        Self {
            m: 1.0,
            m_tilde: 2.0,
            a_profile: AProfile::Rational,
            l_weight: LWeight::Constant { value: 1.0 },
            f_profile: FProfile::Sine,
            eta: 1.5,
            c_f: 1.5,
            kappa: 0.125,
            alpha1: 1.5,
            alpha2: 0.5,
            p: 2.0,
            coupling: Coupling::Additive { phi: vec![1.0] },
            forcing: Forcing::Zero,
            epsilon: 0.1,
            eta_damp: 1.0,
            c_const: None,
        }
    }

    /// As [`ModelSpec::default_additive`] with multiplicative noise.
    pub fn default_multiplicative() -> Self {
        Self {
            coupling: Coupling::Multiplicative,
            ..Self::default_additive()
        }
    }

    /// `f(s) = s − s³` (`p = 4`) with `g(t, s) = s`.
    pub fn default_general() -> Self {
        Self {
            f_profile: FProfile::Cubic,
            eta: 1.0,
            c_f: 2.0,
            kappa: 0.5,
            alpha1: 1.0,
            alpha2: 0.5,
            p: 4.0,
            coupling: Coupling::General {
                d1: 1.0,
                d2: 1.0,
                q: 2.0,
                psi1: TimeProfile::Zero,
                psi2: TimeProfile::Zero,
            },
            ..Self::default_additive()
        }
    }

    /// `a ≡ 1`, `f(s) = −s`, no noise.
    pub fn linear_test() -> Self {
        Self {
            m: 1.0,
            m_tilde: 1.0,
            a_profile: AProfile::Constant,
            f_profile: FProfile::Linear { slope: -1.0 },
            eta: 1.0,
            c_f: 1.0,
            kappa: 0.0,
            alpha1: 1.0,
            alpha2: 1.0,
            coupling: Coupling::Multiplicative,
            epsilon: 0.0,
            ..Self::default_additive()
        }
    }

    /// Parses a config; unknown keys at any depth are errors.
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        // Unit variants of tagged enums accept stray keys, so compare the
        // key sets against the re-serialized spec.
        let given: toml::Value = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let known = toml::Value::try_from(&spec).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(key) = unknown_key(&given, &known, "") {
            return Err(Error::Config(format!("unknown key `{key}`")));
        }
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("spec serializes").as_bytes())
    }

    pub fn regime(&self) -> Regime {
        if self.p > 2.0 {
            Regime::Polynomial
        } else {
            Regime::Lipschitz
        }
    }

    /// Conjugate exponent `p₁ = p / (p − 1)`.
    pub fn p1(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    pub fn a(&self, s: f64) -> f64 {
        match self.a_profile {
            AProfile::Rational => self.m + (self.m_tilde - self.m) / (1.0 + s * s),
            AProfile::Constant => self.m,
        }
    }

    /// Closed-form Lipschitz constant of `a`.
    pub fn a_lipschitz_analytic(&self) -> f64 {
        match self.a_profile {
            // max |d/ds (1+s²)^{-1}| = 3√3/8 at s = 1/√3
            AProfile::Rational => (self.m_tilde - self.m).abs() * 3.0 * 3f64.sqrt() / 8.0,
            AProfile::Constant => 0.0,
        }
    }

    pub fn f(&self, s: f64) -> f64 {
        self.f_profile.eval(s)
    }

    /// `g(t, s)`.
    pub fn g(&self, t: f64, s: f64) -> f64 {
        match &self.coupling {
            Coupling::Additive { .. } => 1.0,
            Coupling::Multiplicative => s,
            Coupling::General { d1, q, psi1, .. } => d1 * s.abs().powf(q - 2.0) * s + psi1.eval(t),
        }
    }

    /// `∂g/∂s (t, s)`.
    pub fn dg_ds(&self, s: f64) -> f64 {
        match &self.coupling {
            Coupling::Additive { .. } => 0.0,
            Coupling::Multiplicative => 1.0,
            Coupling::General { d1, q, .. } => {
                if *q == 2.0 {
                    *d1
                } else {
                    d1 * (q - 1.0) * s.abs().powf(q - 2.0)
                }
            }
        }
    }

    /// `φ` for additive coupling, padded to `n_modes`.
    pub fn phi(&self, n_modes: usize) -> Option<Field> {
        match &self.coupling {
            Coupling::Additive { phi } => Some(Field::resized(phi, n_modes)),
            _ => None,
        }
    }

    /// `h(t)` in `n_modes` coefficients, `None` when identically zero.
    pub fn forcing_at(&self, t: f64, n_modes: usize) -> Option<Field> {
        match &self.forcing {
            Forcing::Zero => None,
            Forcing::Field { coeffs } => Some(Field::resized(coeffs, n_modes)),
            Forcing::Modulated { coeffs, profile } => Some(Field::resized(coeffs, n_modes).scaled(profile.eval(t))),
        }
    }

    /// `‖h(t)‖²_*`.
    pub fn forcing_dual_sq(&self, t: f64) -> f64 {
        match &self.forcing {
            Forcing::Zero => 0.0,
            Forcing::Field { coeffs } => Field::from_coeffs(coeffs.clone()).dual_norm_sq(),
            Forcing::Modulated { coeffs, profile } => {
                let s = profile.eval(t);
                s * s * Field::from_coeffs(coeffs.clone()).dual_norm_sq()
            }
        }
    }

    /// `|ψ₁(t)|^{p₁}_{L^{p₁}}` (spatially constant `ψ₁`, `|O| = 1`).
    pub fn psi1_norm_p1(&self, t: f64) -> f64 {
        match &self.coupling {
            Coupling::General { psi1, .. } => psi1.eval(t).abs().powf(self.p1()),
            _ => 0.0,
        }
    }

    /// `w_k = ∫₀¹ ℓ e_k` for `k = 1..n_modes`, so that `l(u) = Σ w_k u_k`.
    pub fn l_weights(&self, n_modes: usize) -> Vec<f64> {
        (1..=n_modes)
            .map(|k| match &self.l_weight {
                LWeight::Constant { value } => {
                    if k % 2 == 1 {
                        value * 2.0 * std::f64::consts::SQRT_2 / (k as f64 * PI)
                    } else {
                        0.0
                    }
                }
                LWeight::Samples { values } => {
                    // Integrate cell by cell so the kinks of ℓ are nodes.
                    let cells = values.len().saturating_sub(1).max(1);
                    let e = |x: f64| self.l_weight.eval(x) * std::f64::consts::SQRT_2 * (k as f64 * PI * x).sin();
                    (0..cells)
                        .map(|c| {
                            let a = c as f64 / cells as f64;
                            let b = (c + 1) as f64 / cells as f64;
                            adaptive_simpson(&e, a, b, 1e-14)
                        })
                        .sum()
                }
            })
            .collect()
    }

    /// `|l|`, the `L²` norm of `ℓ`.
    pub fn l_norm(&self) -> f64 {
        match &self.l_weight {
            LWeight::Constant { value } => value.abs(),
            LWeight::Samples { values } => {
                let cells = values.len().saturating_sub(1).max(1);
                (0..cells)
                    .map(|c| {
                        let a = c as f64 / cells as f64;
                        let b = (c + 1) as f64 / cells as f64;
                        adaptive_simpson(&|x| self.l_weight.eval(x).powi(2), a, b, 1e-14)
                    })
                    .sum::<f64>()
                    .sqrt()
            }
        }
    }

    /// Constant `c` of the energy estimate: configured value, or the
    /// Young-inequality default (see `docs/energy_constant.md`).
    pub fn c_const(&self) -> f64 {
        if let Some(c) = self.c_const {
            return c;
        }
        let Coupling::General { d1, q, psi1, .. } = &self.coupling else {
            return 0.0;
        };
        let p = self.p;
        if !(p > *q) || self.alpha2 <= 0.0 {
            return f64::NAN;
        }
        let budget = if psi1.is_zero() { self.alpha2 } else { 0.5 * self.alpha2 };
        // Young: x·(coeff·y) ≤ budget·x^exp + C·y^conj with C returned here.
        let young = |exp: f64, coeff: f64| {
            let conj = exp / (exp - 1.0);
            (budget * exp).powf(-conj / exp) * coeff.powf(conj) / conj
        };
        let c1 = young(p / q, 2.0 * d1);
        if psi1.is_zero() {
            c1
        } else {
            c1.max(young(p, 2.0))
        }
    }
}

fn unknown_key(given: &toml::Value, known: &toml::Value, prefix: &str) -> Option<String> {
    let (toml::Value::Table(g), toml::Value::Table(k)) = (given, known) else {
        return None;
    };
    for (key, v) in g {
        let name = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
        match k.get(key) {
            None => return Some(name),
            Some(kv) => {
                if let Some(bad) = unknown_key(v, kv, &name) {
                    return Some(bad);
                }
            }
        }
    }
    None
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self::default_additive()
    }
}

/// One inequality with both sides evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub condition: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `"<="` or `"<"`.
    pub relation: String,
    pub pass: bool,
    /// Advisory rows are reported but do not fail validation.
    pub required: bool,
}

impl Check {
    fn le(condition: &str, lhs: f64, rhs: f64, required: bool) -> Self {
        let tol = 1e-12 * (1.0 + rhs.abs());
        Self {
            condition: condition.into(),
            lhs,
            rhs,
            relation: "<=".into(),
            pass: lhs <= rhs + tol,
            required,
        }
    }

    fn lt(condition: &str, lhs: f64, rhs: f64, required: bool) -> Self {
        Self {
            condition: condition.into(),
            lhs,
            rhs,
            relation: "<".into(),
            pass: lhs < rhs,
            required,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub checks: Vec<Check>,
    /// Max slope of `a` on the sampling grid.
    pub l_a: f64,
    pub l_a_analytic: f64,
    pub l_norm: f64,
    pub alpha: f64,
    pub sample_radius: f64,
}

impl Diagnostics {
    pub fn passed(&self) -> bool {
        self.checks.iter().filter(|c| c.required).all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn find(&self, prefix: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.condition.starts_with(prefix))
    }
}

const SAMPLES: usize = 20_001;

fn linspace(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| a + (b - a) * i as f64 / (n - 1) as f64)
}

/// Sampled checks of the standing assumptions and the smallness
/// conditions. `alpha` is the a-priori bound feeding the advisory rows
/// (0 when absent). Never fails; every row carries both sides.
pub fn validate(spec: &ModelSpec, lambda_1: f64, alpha: Option<f64>) -> Diagnostics {
    let alpha = alpha.unwrap_or(0.0);
    let mut checks = Vec::new();
    let positive = spec.m > 0.0 && spec.eta_damp > 0.0 && spec.epsilon >= 0.0 && spec.p >= 2.0 && lambda_1 > 0.0;
    checks.push(Check::le(
        "parameters: m > 0, eta_damp > 0, epsilon >= 0, p >= 2 (violations)",
        if positive { 0.0 } else { 1.0 },
        0.0,
        true,
    ));

    // (2.1) on a wide grid plus far-out points.
    let mut a_min = f64::INFINITY;
    let mut a_max = f64::NEG_INFINITY;
    let far = [-1e6, -1e3, 1e3, 1e6];
    for s in linspace(-100.0, 100.0, SAMPLES).chain(far) {
        let v = spec.a(s);
        a_min = a_min.min(v);
        a_max = a_max.max(v);
    }
    checks.push(Check::le("m <= min a(s)", spec.m, a_min, true));
    checks.push(Check::le("max a(s) <= m_tilde", a_max, spec.m_tilde, true));

    // Lipschitz constant of a by the max slope on a fine grid.
    let ds = 1e-3;
    let l_a = linspace(-20.0, 20.0, 40_001)
        .map(|s| ((spec.a(s + ds) - spec.a(s)) / ds).abs())
        .fold(0.0, f64::max);

    let kap = spec.kappa.max(0.0);
    let s_max = if spec.alpha2 > 0.0 {
        10f64.max(10.0 * (kap / spec.alpha2).powf(1.0 / spec.p))
    } else {
        10.0
    };
    let grid: Vec<f64> = linspace(-s_max, s_max, SAMPLES).collect();
    let fv: Vec<f64> = grid.iter().map(|s| spec.f(*s)).collect();
    let h = grid[1] - grid[0];

    match spec.regime() {
        Regime::Lipschitz => {
            let slope = fv.windows(2).map(|w| ((w[1] - w[0]) / h).abs()).fold(0.0, f64::max);
            checks.push(Check::le("(f) max slope <= eta", slope, spec.eta, true));
            let growth = grid
                .iter()
                .zip(&fv)
                .map(|(s, f)| f.abs() / (1.0 + s.abs()))
                .fold(0.0, f64::max);
            checks.push(Check::le("(f) max |f(s)|/(1+|s|) <= C_f", growth, spec.c_f, true));
        }
        Regime::Polynomial => {
            let upper = grid
                .iter()
                .zip(&fv)
                .map(|(s, f)| f * s + spec.alpha2 * s.abs().powf(spec.p))
                .fold(f64::NEG_INFINITY, f64::max);
            checks.push(Check::le("(f) max f(s)s + alpha2|s|^p <= kappa", upper, spec.kappa, true));
            let lower = grid
                .iter()
                .zip(&fv)
                .map(|(s, f)| -f * s - spec.alpha1 * s.abs().powf(spec.p))
                .fold(f64::NEG_INFINITY, f64::max);
            checks.push(Check::le("(f) max -f(s)s - alpha1|s|^p <= kappa", lower, spec.kappa, true));
            let growth = grid
                .iter()
                .zip(&fv)
                .map(|(s, f)| f.abs() / (s.abs().powf(spec.p - 1.0) + 1.0))
                .fold(0.0, f64::max);
            checks.push(Check::le("(f) max |f(s)|/(|s|^(p-1)+1) <= C_f", growth, spec.c_f, true));
        }
    }

    if let Coupling::General { d1, d2, q, psi1, psi2 } = &spec.coupling {
        let times: Vec<f64> = linspace(0.0, 10.0, 21).collect();
        let mut g_excess = f64::NEG_INFINITY;
        let mut dg_excess = f64::NEG_INFINITY;
        for &t in &times {
            for &s in &grid {
                let bound = d1 * s.abs().powf(q - 1.0) + psi1.eval(t).abs();
                g_excess = g_excess.max(spec.g(t, s).abs() - bound);
                if s != 0.0 || *q == 2.0 {
                    let dbound = d2 * s.abs().powf(q - 2.0) + psi2.eval(t).abs();
                    dg_excess = dg_excess.max(spec.dg_ds(s).abs() - dbound);
                }
            }
        }
        checks.push(Check::le("(g) max |g| - d1|s|^(q-1) - |psi1| <= 0", g_excess, 0.0, true));
        checks.push(Check::le("(g) max |dg/ds| - d2|s|^(q-2) - |psi2| <= 0", dg_excess, 0.0, true));
        checks.push(Check::le("2 <= q", 2.0, *q, true));
        checks.push(Check::lt("q < p", *q, spec.p, true));
    }

    let l_norm = spec.l_norm();
    if spec.regime() == Regime::Lipschitz {
        checks.push(Check::lt("spectral gap 4 C_f < m lambda_1", 4.0 * spec.c_f, spec.m * lambda_1, true));
        let add = alpha * l_a * l_norm / lambda_1 + 2.0 * l_a * l_norm + 2.0 * spec.eta / lambda_1;
        checks.push(Check::lt(
            "additive smallness (advisory) alpha L_a|l|/lambda_1 + 2 L_a|l| + 2 eta/lambda_1 < m",
            add,
            spec.m,
            false,
        ));
        let mul = (alpha + 2.0) * l_a * l_norm / lambda_1 + l_a * l_norm * (alpha + 2.0) + 4.0 * spec.eta / lambda_1;
        checks.push(Check::lt(
            "multiplicative smallness (advisory) (alpha+2) L_a|l|/lambda_1 + L_a|l|(alpha+2) + 4 eta/lambda_1 < m",
            mul,
            spec.m,
            false,
        ));
    }

    Diagnostics {
        checks,
        l_a,
        l_a_analytic: spec.a_lipschitz_analytic(),
        l_norm,
        alpha,
        sample_radius: s_max,
    }
}

/// Empirical a-priori bound `α`: the largest `sup_t ‖v(t)‖²` over the
/// test ensemble `±ic_radius · e₁`, where `v` runs over the deterministic
/// solution and the transformed stationary-noise and white-noise solutions
/// (`v = u − εφ∫₀ᵗζ`, `v = u − εφω(t)` additive; `v = e^{−ε∫₀ᵗζ}u`,
/// `v = e^{−εω(t)}u` multiplicative). With `noise = None` only the
/// deterministic solution is used.
pub fn alpha_bound(
    spec: &ModelSpec,
    path: &WienerPath,
    noise: Option<&dyn StationaryNoise>,
    config: &SolveConfig,
    ic_radius: f64,
) -> Result<f64> {
    let n = config.n_modes;
    let mut alpha = 0.0f64;
    let sup_h1 = |traj: &solver::Trajectory, transform: &dyn Fn(usize, &Field) -> Field| {
        traj.states
            .iter()
            .enumerate()
            .map(|(i, u)| transform(i, u).h1_norm_sq())
            .fold(0.0, f64::max)
    };
    let phi = spec.phi(n);
    let eps = spec.epsilon;
    let transform = |shift: &[f64]| {
        let phi = phi.clone();
        let shift = shift.to_vec();
        move |i: usize, u: &Field| match &phi {
            Some(phi) => u.add_scaled(-eps * shift[i], phi),
            None => u.scaled((-eps * shift[i]).exp()),
        }
    };
    for sign in [1.0, -1.0] {
        let u0 = Field::mode(n, 1, sign * ic_radius);
        let det = solver::solve_deterministic(spec, config, &u0)?;
        alpha = alpha.max(sup_h1(&det, &|_, u| u.clone()));
        let Some(noise) = noise else { continue };
        if matches!(spec.coupling, Coupling::General { .. }) {
            return Err(Error::RegimeMismatch("alpha_bound needs additive or multiplicative coupling".into()));
        }
        let stat = solver::solve_stationary(spec, path, noise, config, &u0)?;
        let h = path.dt_grid();
        let lo = path.index_of(config.t_start.min(0.0))?;
        let hi = path.index_of(config.t_end.max(0.0))?;
        let z = noise.track(path, lo, hi)?;
        let int = integral_track(&z, path.zero_index(), h);
        let at_steps: Vec<f64> = stat
            .times
            .iter()
            .map(|t| path.index_of(*t).map(|i| int.at(i)))
            .collect::<Result<_>>()?;
        alpha = alpha.max(sup_h1(&stat, &transform(&at_steps)));
        let white = solver::solve_white(spec, path, config, &u0)?;
        let w: Vec<f64> = white.times.iter().map(|t| path.eval(*t)).collect::<Result<_>>()?;
        alpha = alpha.max(sup_h1(&white, &transform(&w)));
    }
    Ok(alpha)
}

/// `λ₁` for the unit interval.
pub fn lambda_1() -> f64 {
    eigenvalue(1)
}
