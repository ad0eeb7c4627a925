//! Absorbing radii, pullback attractor sampling and Hausdorff
//! semidistances.
//!
//! A random attractor is approximated by the terminal states at time 0 of an
//! ensemble of initial conditions started at `−t` along a fixed path, for a
//! sequence of increasing `t`. The sample is accepted once successive
//! terminal states of the same initial condition agree to a tolerance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::conjugate::{AuxSource, AuxiliaryProcess};
use crate::ensemble::Pool;
use crate::error::{Error, Result};
use crate::galerkin::Field;
use crate::model::{Coupling, ModelSpec, Regime};
use crate::noise::{NoiseKind, NoiseVariant, StationaryNoise};
use crate::quadrature::{cumulative_trapezoid, product_trapezoid_exp, trapezoid};
use crate::solver::{solve_many, Drive, Record, Scheme, SolveConfig};
use crate::wiener::WienerPath;
use crate::{LAMBDA_1, T_TRUNC};

/// `|O|` for the unit interval.
const DOMAIN_MEASURE: f64 = 1.0;

/// Which closed-form radius to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadiusFormula {
    /// Energy-estimate radius of the polynomial regime; the ball is
    /// `|u|² ≤ R`.
    General,
    /// Additive `p = 2` radius; the ball is `|u|² ≤ R/λ₁`.
    Additive,
    /// Multiplicative `p = 2` radius; the ball is `|u|² ≤ R/λ₁`.
    Multiplicative,
}

impl RadiusFormula {
    pub fn name(self) -> &'static str {
        match self {
            RadiusFormula::General => "general",
            RadiusFormula::Additive => "additive",
            RadiusFormula::Multiplicative => "multiplicative",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "general" => Some(RadiusFormula::General),
            "additive" => Some(RadiusFormula::Additive),
            "multiplicative" => Some(RadiusFormula::Multiplicative),
            _ => None,
        }
    }

    /// The formula matching a spec's regime and coupling.
    pub fn for_spec(spec: &ModelSpec) -> Result<Self> {
        match (spec.regime(), &spec.coupling) {
            (Regime::Polynomial, Coupling::General { .. }) => Ok(RadiusFormula::General),
            (Regime::Lipschitz, Coupling::Additive { .. }) => Ok(RadiusFormula::Additive),
            (Regime::Lipschitz, Coupling::Multiplicative) => Ok(RadiusFormula::Multiplicative),
            _ => Err(Error::RegimeMismatch(format!(
                "no radius formula for p = {} with this coupling",
                spec.p
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusReport {
    pub formula: RadiusFormula,
    /// `R_{δ,ε}(ω)`.
    pub r_squared: f64,
    /// `R_{0,ε}(ω)`; `None` for the general formula.
    pub r_white: Option<f64>,
    /// Bound on `|u|²` implied by `r_squared`.
    pub ball_sq: f64,
    pub delta: Option<f64>,
    pub epsilon: f64,
    /// History integrals run over `[−truncation, 0]`.
    pub truncation: f64,
    pub h: f64,
    /// Contribution of `[−truncation, −truncation/2]` to the history integral.
    pub tail: f64,
}

/// Sampling grid `[−L, 0]` for a decay rate `γ`, `L = T_TRUNC/γ + extra`.
fn history_grid(path: &WienerPath, gamma: f64, extra: f64) -> Result<(usize, usize, f64)> {
    let h = path.dt_grid();
    let l = ((T_TRUNC / gamma + extra) / h).ceil() * h;
    Ok((path.index_of(-l)?, path.zero_index(), l))
}

/// `∫_{s_0}^{0} e^{γs} g` plus the tail over the first half of the range.
fn history_integral(gamma: f64, s0: f64, h: f64, g: &[f64]) -> Result<(f64, f64)> {
    let total = product_trapezoid_exp(gamma, s0, h, g);
    let half = g.len() / 2;
    let tail = product_trapezoid_exp(gamma, s0, h, &g[..=half]);
    if !total.is_finite() || tail.abs() > 1e-6 * (1.0 + total.abs()) {
        return Err(Error::NonIntegrable(format!("tail {tail} against integral {total}")));
    }
    Ok((total, tail))
}

fn gap_rate(spec: &ModelSpec, shift: f64) -> Result<f64> {
    let g = spec.m * LAMBDA_1 - shift * spec.c_f;
    if !(g > 0.0) {
        return Err(Error::RegimeMismatch(format!("m λ₁ − {shift} C_f = {g} is not positive")));
    }
    Ok(g)
}

/// Additive radius from the squared magnitudes `|x*(θ_s ω)|²` on `[−L, 0]`.
fn additive_radius(spec: &ModelSpec, xsq: &[f64], s0: f64, h: f64) -> Result<(f64, f64)> {
    let (m, cf, l1, o) = (spec.m, spec.c_f, LAMBDA_1, DOMAIN_MEASURE);
    let mt2 = spec.m_tilde * spec.m_tilde;
    let g = gap_rate(spec, 4.0)?;
    let x0 = *xsq.last().expect("nonempty grid");
    let whole: Vec<f64> = xsq
        .iter()
        .map(|x| x / (l1 * cf) + 2.0 * cf * x / l1 + 2.0 * mt2 / m)
        .collect();
    let (i_whole, tail) = history_integral(g, s0, h, &whole)?;
    let n1 = (1.0 / h).round() as usize;
    let last: Vec<f64> = xsq[xsq.len() - 1 - n1..]
        .iter()
        .map(|x| l1 * cf * o + (cf * l1 + l1 / cf) * x + mt2 / m)
        .collect();
    let i_last = product_trapezoid_exp(g, -1.0, h, &last);
    let r = 2.0 * x0
        + 8.0 * cf * o / (m * g)
        + 4.0 * l1 * cf * cf * o / (g * g)
        + (4.0 + 2.0 * l1 * cf * m + m * l1 - 4.0 * cf + 2.0 * cf * o) / (m * g)
        + (4.0 / m + 2.0 * l1 * cf) * i_whole
        + 2.0 * i_last;
    Ok((r, tail))
}

/// Multiplicative radius from `y(θ_s ω)` on `[−L, 0]` (with `−1` on the grid).
fn multiplicative_radius(spec: &ModelSpec, y: &[f64], s0: f64, h: f64) -> Result<(f64, f64)> {
    let (m, cf, o) = (spec.m, spec.c_f, DOMAIN_MEASURE);
    let g = gap_rate(spec, 3.0)?;
    let n1 = (1.0 / h).round() as usize;
    let split = y.len() - 1 - n1;
    let y0 = *y.last().expect("nonempty grid");
    let recent = &y[split..];
    let two_y: Vec<f64> = recent.iter().map(|v| 2.0 * v).collect();
    let int_last = trapezoid(&two_y, h);
    let far: Vec<f64> = y[..=split].iter().map(|v| (-2.0 * v).exp()).collect();
    let (i_far, tail) = history_integral(g, s0, h, &far)?;
    let cum = cumulative_trapezoid(&two_y, h);
    let near: Vec<f64> = recent
        .iter()
        .zip(&cum)
        .map(|(v, c)| (-2.0 * v + 2.0 * y0 + (int_last - c)).exp())
        .collect();
    let i_near = product_trapezoid_exp(g, -1.0, h, &near);
    let r = (int_last + 2.0 * y0).exp() / m * (1.0 + cf * o * int_last.exp() * i_far)
        + (cf * o / m + 2.0 * cf * cf * o / m) * i_near;
    Ok((r, tail))
}

/// Evaluates the closed-form absorbing radius along `path`. `noise = None`
/// means the white limit `δ = 0`.
pub fn absorbing_radius(
    spec: &ModelSpec,
    path: &WienerPath,
    noise: Option<&NoiseKind>,
    formula: RadiusFormula,
) -> Result<RadiusReport> {
    let expected = RadiusFormula::for_spec(spec)?;
    if expected != formula {
        return Err(Error::RegimeMismatch(format!(
            "formula {} does not apply to this spec ({} expected)",
            formula.name(),
            expected.name()
        )));
    }
    let h = path.dt_grid();
    let eps = spec.epsilon;
    let delta = noise.map(|n| n.delta());
    match formula {
        RadiusFormula::General => {
            let q = match spec.coupling {
                Coupling::General { q, .. } => q,
                _ => unreachable!("checked by for_spec"),
            };
            if eps > 0.0 && noise.is_none() {
                return Err(Error::InvalidParameter("the general radius needs a stationary noise".into()));
            }
            let c = spec.c_const();
            let gamma = spec.m * LAMBDA_1;
            let (lo, hi, l) = history_grid(path, gamma, 0.0)?;
            let z = match noise {
                Some(n) if eps > 0.0 => n.track(path, lo, hi)?.values,
                _ => vec![0.0; hi - lo + 1],
            };
            let (p, p1) = (spec.p, spec.p1());
            let g: Vec<f64> = (lo..=hi)
                .zip(&z)
                .map(|(i, zeta)| {
                    let s = path.time(i);
                    2.0 / spec.m * spec.forcing_dual_sq(s)
                        + (2.0 * spec.kappa + eps * c * zeta.abs().powf(p / (p - q))) * DOMAIN_MEASURE
                        + eps * c * zeta.abs().powf(p1) * spec.psi1_norm_p1(s)
                })
                .collect();
            let (int, tail) = history_integral(gamma, -l, h, &g)?;
            let r = 1.0 + int;
            Ok(RadiusReport {
                formula,
                r_squared: r,
                r_white: None,
                ball_sq: r,
                delta,
                epsilon: eps,
                truncation: l,
                h,
                tail,
            })
        }
        RadiusFormula::Additive => {
            let phi = match &spec.coupling {
                Coupling::Additive { phi } => Field::from_coeffs(phi.clone()),
                _ => unreachable!("checked by for_spec"),
            };
            let phi_sq = phi.l2_norm_sq();
            let gamma = gap_rate(spec, 4.0)?;
            let (lo, hi, l) = history_grid(path, gamma, 1.0)?;
            let eval = |source: AuxSource| -> Result<(f64, f64)> {
                let proc = AuxiliaryProcess::additive(source, eps, phi.clone(), spec.eta_damp)?;
                let tr = proc.scalar_track(path, lo, hi)?;
                let xsq: Vec<f64> = tr.values.iter().map(|s| s * s * phi_sq).collect();
                additive_radius(spec, &xsq, -l, h)
            };
            let (r_white, tail_w) = eval(AuxSource::White)?;
            let (r, tail) = match noise {
                Some(n) => eval(AuxSource::Noise(*n))?,
                None => (r_white, tail_w),
            };
            Ok(RadiusReport {
                formula,
                r_squared: r,
                r_white: Some(r_white),
                ball_sq: r / LAMBDA_1,
                delta,
                epsilon: eps,
                truncation: l,
                h,
                tail,
            })
        }
        RadiusFormula::Multiplicative => {
            let gamma = gap_rate(spec, 3.0)?;
            let (lo, hi, l) = history_grid(path, gamma, 1.0)?;
            let eval = |source: AuxSource| -> Result<(f64, f64)> {
                let proc = AuxiliaryProcess::multiplicative(source, eps)?;
                let tr = proc.scalar_track(path, lo, hi)?;
                multiplicative_radius(spec, &tr.values, -l, h)
            };
            let (r_white, tail_w) = eval(AuxSource::White)?;
            let (r, tail) = match noise {
                Some(n) => eval(AuxSource::Noise(*n))?,
                None => (r_white, tail_w),
            };
            Ok(RadiusReport {
                formula,
                r_squared: r,
                r_white: Some(r_white),
                ball_sq: r / LAMBDA_1,
                delta,
                epsilon: eps,
                truncation: l,
                h,
                tail,
            })
        }
    }
}

/// Path window `[a, b]` needed by [`absorbing_radius`].
pub fn radius_window(spec: &ModelSpec, noise: Option<&NoiseKind>, formula: RadiusFormula) -> Result<(f64, f64)> {
    let (back, fwd) = noise.map_or((0.0, 0.0), |n| n.support());
    let (gamma, extra, hist) = match formula {
        RadiusFormula::General => (spec.m * LAMBDA_1, 0.0, 0.0),
        RadiusFormula::Additive => (gap_rate(spec, 4.0)?, 1.0, T_TRUNC / spec.eta_damp),
        RadiusFormula::Multiplicative => (gap_rate(spec, 3.0)?, 1.0, T_TRUNC),
    };
    Ok((-(T_TRUNC / gamma + extra + 1.0) - hist - back, fwd.max(0.0)))
}

/// Time stepping used by the pullback computations.
#[derive(Debug, Clone, PartialEq)]
pub struct PullbackSettings {
    /// Increasing pullback times.
    pub times: Vec<f64>,
    pub dt: f64,
    pub n_modes: usize,
    pub n_grid: usize,
    pub scheme: Scheme,
    /// Largest accepted matched-IC displacement between the last two times.
    pub tol: f64,
}

impl PullbackSettings {
    /// `dt = 1e-3`, 16 modes, tolerance `1e-4`.
    pub fn new(times: Vec<f64>) -> Self {
        Self {
            times,
            dt: 1e-3,
            n_modes: 16,
            n_grid: 64,
            scheme: Scheme::ImexEuler,
            tol: 1e-4,
        }
    }

    pub fn with_modes(mut self, n_modes: usize) -> Self {
        self.n_modes = n_modes;
        self.n_grid = 4 * n_modes;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    fn config(&self, t: f64) -> SolveConfig {
        SolveConfig {
            dt: self.dt,
            t_start: -t,
            t_end: 0.0,
            scheme: self.scheme,
            n_modes: self.n_modes,
            n_grid: self.n_grid,
            record: Record::Last,
        }
    }
}

/// `n` initial fields: the first half are `±radius·e_k` cycling through the
/// modes, the rest are seeded random directions with norm `radius·U`,
/// `U ~ Uniform(0, 1]`.
pub fn ic_ensemble(n_modes: usize, n: usize, radius: f64, seed: u64) -> Vec<Field> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_basis = n / 2;
    let mut out = Vec::with_capacity(n);
    for i in 0..n_basis {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        out.push(Field::mode(n_modes, (i / 2) % n_modes + 1, sign * radius));
    }
    for _ in n_basis..n {
        let v: Vec<f64> = (0..n_modes).map(|_| rng.sample(StandardNormal)).collect();
        let dir = Field::from_coeffs(v);
        let u: f64 = 1.0 - rng.random::<f64>();
        let norm = dir.l2_norm();
        out.push(if norm > 0.0 {
            dir.scaled(radius * u / norm)
        } else {
            Field::zeros(n_modes)
        });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CloudKind {
    Deterministic,
    Stationary,
    White,
    Ball,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudMeta {
    pub kind: CloudKind,
    pub delta: Option<f64>,
    pub epsilon: f64,
    pub seed: Option<u64>,
    pub pullback_time: f64,
    /// Matched-IC displacement between successive pullback times.
    pub displacements: Vec<f64>,
}

/// Finite set of fields standing in for an attractor or absorbing set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub members: Vec<Field>,
    pub meta: CloudMeta,
}

impl PointCloud {
    pub fn new(members: Vec<Field>, meta: CloudMeta) -> Result<Self> {
        let first = members.first().ok_or_else(|| Error::Empty("point cloud".into()))?;
        let n = first.n_modes();
        if members.iter().any(|f| f.n_modes() != n) {
            return Err(Error::SizeMismatch("cloud members differ in n_modes".into()));
        }
        Ok(Self { members, meta })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn n_modes(&self) -> usize {
        self.members[0].n_modes()
    }

    /// Largest pairwise L² distance.
    pub fn diameter(&self) -> f64 {
        let mut d = 0.0f64;
        for (i, a) in self.members.iter().enumerate() {
            for b in &self.members[i + 1..] {
                d = d.max(a.l2_distance(b));
            }
        }
        d
    }

    /// `ic_index,c1,...,cN` after the manifest line.
    pub fn write_csv<W: std::io::Write>(&self, out: W, manifest_hash: &str) -> std::io::Result<()> {
        let mut header = vec!["ic_index".to_string()];
        header.extend((1..=self.n_modes()).map(|k| format!("c{k}")));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let mut w = crate::io::CsvWriter::new(out, manifest_hash, &header)?;
        for (i, f) in self.members.iter().enumerate() {
            let mut cells = vec![i.to_string()];
            cells.extend(f.coeffs.iter().map(|c| crate::io::fmt_f64(*c)));
            w.cells(&cells)?;
        }
        w.finish()?;
        Ok(())
    }
}

/// `sup_{a∈A} inf_{b∈B} |a − b|` in L², by brute force.
pub fn hausdorff_semidistance(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    semidistance_fields(&a.members, &b.members)
}

pub fn semidistance_fields(a: &[Field], b: &[Field]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("point cloud".into()));
    }
    let n = a[0].n_modes();
    if a.iter().chain(b).any(|f| f.n_modes() != n) {
        return Err(Error::SizeMismatch("clouds differ in n_modes".into()));
    }
    Ok(a.iter()
        .map(|x| b.iter().map(|y| x.l2_distance(y)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max))
}

fn drive_kind(drive: Drive<'_>) -> (CloudKind, Option<f64>) {
    match drive {
        Drive::Deterministic => (CloudKind::Deterministic, None),
        Drive::Stationary(n) => (CloudKind::Stationary, Some(n.delta())),
        Drive::White => (CloudKind::White, Some(0.0)),
    }
}

/// Terminal states at time 0 of `ics` started at `−t` for each pullback
/// time; returns the cloud of the largest time once the last matched-IC
/// displacement is within `settings.tol`.
pub fn pullback_attractor_sample(
    spec: &ModelSpec,
    path: Option<&WienerPath>,
    drive: Drive<'_>,
    settings: &PullbackSettings,
    ics: &[Field],
    pool: &Pool,
) -> Result<PointCloud> {
    if ics.is_empty() {
        return Err(Error::Empty("initial conditions".into()));
    }
    if settings.times.is_empty() {
        return Err(Error::Empty("pullback times".into()));
    }
    if settings.times.windows(2).any(|w| !(w[0] < w[1])) || !(settings.times[0] > 0.0) {
        return Err(Error::InvalidParameter("pullback times must be positive and increasing".into()));
    }
    let mut prev: Option<Vec<Field>> = None;
    let mut displacements = Vec::new();
    for &t in &settings.times {
        let trajs = solve_many(spec, path, drive, &settings.config(t), ics, pool)?;
        let terminal: Vec<Field> = trajs.into_iter().map(|tr| tr.last().clone()).collect();
        if let Some(p) = &prev {
            let d = p
                .iter()
                .zip(&terminal)
                .map(|(a, b)| a.l2_distance(b))
                .fold(0.0, f64::max);
            displacements.push(d);
        }
        prev = Some(terminal);
    }
    if let Some(&last) = displacements.last() {
        if !(last <= settings.tol) {
            return Err(Error::NonCauchy {
                displacements,
                tol: settings.tol,
            });
        }
    }
    let (kind, delta) = drive_kind(drive);
    PointCloud::new(
        prev.expect("at least one pullback time"),
        CloudMeta {
            kind,
            delta,
            epsilon: if kind == CloudKind::Deterministic { 0.0 } else { spec.epsilon },
            seed: path.map(|p| p.seed()),
            pullback_time: *settings.times.last().expect("nonempty"),
            displacements,
        },
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorbReport {
    pub max_terminal_sq: f64,
    pub bound: f64,
    pub slack: f64,
    pub pass: bool,
    pub pullback_time: f64,
    pub ball_radius: f64,
    pub n_ics: usize,
}

/// Evolves `n_ics` initial fields of norm at most `ball_radius` from
/// `−pullback_time` to 0 and compares the largest `|u(0)|²` with the ball of
/// `radius`, enlarged by `1 + slack`.
#[allow(clippy::too_many_arguments)]
pub fn absorbing_check(
    spec: &ModelSpec,
    path: Option<&WienerPath>,
    drive: Drive<'_>,
    radius: &RadiusReport,
    ball_radius: f64,
    pullback_time: f64,
    n_ics: usize,
    settings: &PullbackSettings,
    slack: f64,
    pool: &Pool,
) -> Result<AbsorbReport> {
    if !(pullback_time > 0.0) {
        return Err(Error::InvalidParameter("pullback time must be positive".into()));
    }
    let seed = path.map_or(0, |p| p.seed());
    let ics = ic_ensemble(settings.n_modes, n_ics, ball_radius, seed);
    let trajs = solve_many(spec, path, drive, &settings.config(pullback_time), &ics, pool)?;
    let max_terminal_sq = trajs.iter().map(|t| t.last().l2_norm_sq()).fold(0.0, f64::max);
    let bound = radius.ball_sq * (1.0 + slack);
    Ok(AbsorbReport {
        max_terminal_sq,
        bound,
        slack,
        pass: max_terminal_sq <= bound,
        pullback_time,
        ball_radius,
        n_ics,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemidistRow {
    pub delta: f64,
    pub epsilon: f64,
    /// `dist(A_{δ,ε}(ω), A)`.
    pub dist_total: f64,
    /// `dist(A_{δ,ε}(ω), A_{0,ε}(ω))`.
    pub dist_split1: f64,
    /// `dist(A_{0,ε}(ω), A)`.
    pub dist_split2: f64,
}

impl SemidistRow {
    pub fn triangle_ok(&self, tol: f64) -> bool {
        self.dist_total <= self.dist_split1 + self.dist_split2 + tol
    }
}

/// For every `(δ, ε)` samples `A_{δ,ε}(ω)`, `A_{0,ε}(ω)` and the
/// deterministic `A`, and reports the three semidistances. `δ = 0` uses the
/// white cloud; `ε = 0` makes every cloud equal to `A`.
pub fn semicontinuity_experiment(
    spec: &ModelSpec,
    path: &WienerPath,
    variant: NoiseVariant,
    schedule: &[(f64, f64)],
    settings: &PullbackSettings,
    ics: &[Field],
    pool: &Pool,
) -> Result<Vec<SemidistRow>> {
    if spec.regime() != Regime::Lipschitz || matches!(spec.coupling, Coupling::General { .. }) {
        return Err(Error::RegimeMismatch(
            "the semicontinuity experiment needs p = 2 with additive or multiplicative coupling".into(),
        ));
    }
    let det = pullback_attractor_sample(spec, None, Drive::Deterministic, settings, ics, pool)?;
    let mut rows = Vec::with_capacity(schedule.len());
    for &(delta, epsilon) in schedule {
        if !(delta >= 0.0) || !(epsilon >= 0.0) {
            return Err(Error::InvalidParameter(format!("bad schedule entry ({delta}, {epsilon})")));
        }
        if epsilon == 0.0 {
            rows.push(SemidistRow {
                delta,
                epsilon,
                dist_total: 0.0,
                dist_split1: 0.0,
                dist_split2: 0.0,
            });
            continue;
        }
        let s = ModelSpec {
            epsilon,
            ..spec.clone()
        };
        let white = pullback_attractor_sample(&s, Some(path), Drive::White, settings, ics, pool)?;
        let stat = if delta == 0.0 {
            white.clone()
        } else {
            let noise = NoiseKind::new(variant, delta)?;
            pullback_attractor_sample(&s, Some(path), Drive::Stationary(&noise), settings, ics, pool)?
        };
        rows.push(SemidistRow {
            delta,
            epsilon,
            dist_total: hausdorff_semidistance(&stat, &det)?,
            dist_split1: hausdorff_semidistance(&stat, &white)?,
            dist_split2: hausdorff_semidistance(&white, &det)?,
        });
    }
    Ok(rows)
}

/// Path window needed by [`semicontinuity_experiment`] and the pullback
/// samplers for a drive over the largest pullback time.
pub fn pullback_window(spec: &ModelSpec, settings: &PullbackSettings, max_delta: f64) -> (f64, f64) {
    let t = settings.times.iter().cloned().fold(0.0, f64::max);
    let white_hist = match spec.coupling {
        Coupling::Additive { .. } => T_TRUNC / spec.eta_damp,
        _ => T_TRUNC,
    };
    // Every built-in noise needs at most T_TRUNC·δ + T_TRUNC of history.
    let back = white_hist.max(T_TRUNC * (1.0 + max_delta));
    (-t - back - 1.0, max_delta + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pt(c: &[f64]) -> Field {
        Field::from_coeffs(c.to_vec())
    }

    fn cloud(members: Vec<Field>) -> PointCloud {
        PointCloud::new(
            members,
            CloudMeta {
                kind: CloudKind::Ball,
                delta: None,
                epsilon: 0.0,
                seed: None,
                pullback_time: 0.0,
                displacements: vec![],
            },
        )
        .unwrap()
    }

    #[test]
    fn semidistance_examples() {
        let a = cloud(vec![pt(&[0.0, 0.0, 0.0])]);
        let b = cloud(vec![pt(&[3.0, 4.0, 0.0])]);
        assert_eq!(hausdorff_semidistance(&a, &b).unwrap(), 5.0);
        let far = cloud(vec![pt(&[0.0, 0.0, 0.0]), pt(&[10.0, 0.0, 0.0])]);
        assert_eq!(hausdorff_semidistance(&a, &far).unwrap(), 0.0);
        assert_eq!(hausdorff_semidistance(&far, &a).unwrap(), 10.0);
        assert_eq!(hausdorff_semidistance(&far, &far).unwrap(), 0.0);
    }

    #[test]
    fn semidistance_rejects_empty_and_mismatch() {
        assert!(matches!(semidistance_fields(&[], &[pt(&[1.0])]), Err(Error::Empty(_))));
        assert!(matches!(
            semidistance_fields(&[pt(&[1.0])], &[pt(&[1.0, 2.0])]),
            Err(Error::SizeMismatch(_))
        ));
    }

    #[test]
    fn multiplicative_radius_without_noise_matches_closed_form() {
        let spec = ModelSpec {
            epsilon: 0.0,
            ..ModelSpec::default_multiplicative()
        };
        let path = WienerPath::sample(3, -60.0, 1.0, 1e-3).unwrap();
        let r = absorbing_radius(&spec, &path, None, RadiusFormula::Multiplicative).unwrap();
        let (m, cf) = (spec.m, spec.c_f);
        let g3 = m * LAMBDA_1 - 3.0 * cf;
        let expected = (1.0 / m) * (1.0 + cf * (-g3).exp() / g3) + (cf / m + 2.0 * cf * cf / m) * (1.0 - (-g3).exp()) / g3;
        assert_relative_eq!(r.r_squared, expected, max_relative = 1e-8);
        assert_eq!(r.r_white, Some(r.r_squared));
        assert_relative_eq!(r.ball_sq, r.r_squared / LAMBDA_1);
    }

    #[test]
    fn additive_radius_on_zero_path_matches_closed_form() {
        let spec = ModelSpec::default_additive();
        let path = WienerPath::zero(-60.0, 1.0, 1e-3).unwrap();
        let noise = NoiseKind::ou(0.1).unwrap();
        let r = absorbing_radius(&spec, &path, Some(&noise), RadiusFormula::Additive).unwrap();
        let (m, cf, l1, mt) = (spec.m, spec.c_f, LAMBDA_1, spec.m_tilde);
        let g = m * l1 - 4.0 * cf;
        let expected = 8.0 * cf / (m * g)
            + 4.0 * l1 * cf * cf / (g * g)
            + (4.0 + 2.0 * l1 * cf * m + m * l1 - 4.0 * cf + 2.0 * cf) / (m * g)
            + (4.0 / m + 2.0 * l1 * cf) * (2.0 * mt * mt / m) / g
            + 2.0 * (l1 * cf + mt * mt / m) * (1.0 - (-g).exp()) / g;
        assert_relative_eq!(r.r_squared, expected, max_relative = 1e-8);
        assert_relative_eq!(r.r_white.unwrap(), expected, max_relative = 1e-8);
    }

    #[test]
    fn general_radius_without_noise_is_elementary() {
        let spec = ModelSpec {
            epsilon: 0.0,
            ..ModelSpec::default_general()
        };
        let path = WienerPath::zero(-6.0, 1.0, 1e-3).unwrap();
        let r = absorbing_radius(&spec, &path, None, RadiusFormula::General).unwrap();
        let g = spec.m * LAMBDA_1;
        assert_relative_eq!(r.r_squared, 1.0 + 2.0 * spec.kappa / g, max_relative = 1e-8);
        assert_eq!(r.ball_sq, r.r_squared);
    }

    #[test]
    fn wrong_formula_is_rejected() {
        let spec = ModelSpec::default_additive();
        let path = WienerPath::zero(-60.0, 1.0, 1e-3).unwrap();
        assert!(matches!(
            absorbing_radius(&spec, &path, None, RadiusFormula::Multiplicative),
            Err(Error::RegimeMismatch(_))
        ));
        let spec = ModelSpec { c_f: 3.0, ..spec };
        assert!(matches!(
            absorbing_radius(&spec, &path, None, RadiusFormula::Additive),
            Err(Error::RegimeMismatch(_))
        ));
    }

    #[test]
    fn additive_radius_grows_with_epsilon() {
        let path = WienerPath::sample(7, -60.0, 1.0, 1e-3).unwrap();
        let noise = NoiseKind::ou(0.1).unwrap();
        let mut last = 0.0;
        for eps in [0.0, 0.05, 0.1, 0.2, 0.4] {
            let spec = ModelSpec {
                epsilon: eps,
                ..ModelSpec::default_additive()
            };
            let r = absorbing_radius(&spec, &path, Some(&noise), RadiusFormula::Additive).unwrap();
            assert!(r.r_squared >= last, "{eps}: {} < {last}", r.r_squared);
            last = r.r_squared;
        }
    }

    #[test]
    fn ic_ensemble_shape() {
        let ics = ic_ensemble(4, 10, 2.0, 1);
        assert_eq!(ics.len(), 10);
        assert_eq!(ics[0].coeffs, vec![2.0, 0.0, 0.0, 0.0]);
        assert_eq!(ics[1].coeffs, vec![-2.0, 0.0, 0.0, 0.0]);
        assert_eq!(ics[2].coeffs, vec![0.0, 2.0, 0.0, 0.0]);
        assert!(ics[5..].iter().all(|f| f.l2_norm() <= 2.0 + 1e-12 && f.l2_norm() > 0.0));
        assert_eq!(ics, ic_ensemble(4, 10, 2.0, 1));
    }

    #[test]
    fn linear_model_cloud_collapses() {
        let spec = ModelSpec::linear_test();
        let settings = PullbackSettings::new(vec![2.5, 5.0]).with_modes(8).with_dt(1e-2);
        let ics = ic_ensemble(8, 8, 2.0, 0);
        let c = pullback_attractor_sample(&spec, None, Drive::Deterministic, &settings, &ics, &Pool::serial()).unwrap();
        assert!(c.diameter() < 1e-6, "{}", c.diameter());
        assert_eq!(c.meta.kind, CloudKind::Deterministic);
        assert_eq!(c.meta.displacements.len(), 1);
    }

    #[test]
    fn non_cauchy_is_reported() {
        let spec = ModelSpec::default_additive();
        let settings = PullbackSettings::new(vec![0.01, 0.02]).with_modes(4).with_dt(1e-3);
        let ics = ic_ensemble(4, 2, 2.0, 0);
        let r = pullback_attractor_sample(&spec, None, Drive::Deterministic, &settings, &ics, &Pool::serial());
        assert!(matches!(r, Err(Error::NonCauchy { .. })));
    }

    #[test]
    fn zero_ball_stays_at_origin() {
        let spec = ModelSpec::default_multiplicative();
        let path = WienerPath::sample(1, -50.0, 1.0, 1e-3).unwrap();
        let radius = absorbing_radius(&spec, &path, None, RadiusFormula::Multiplicative).unwrap();
        let settings = PullbackSettings::new(vec![1.0]).with_modes(4);
        let noise = NoiseKind::ou(0.1).unwrap();
        let rep = absorbing_check(
            &spec,
            Some(&path),
            Drive::Stationary(&noise),
            &radius,
            0.0,
            1.0,
            4,
            &settings,
            0.05,
            &Pool::serial(),
        )
        .unwrap();
        assert_eq!(rep.max_terminal_sq, 0.0);
        assert!(rep.pass);
    }

    #[test]
    fn zero_epsilon_row_vanishes() {
        let spec = ModelSpec::default_additive();
        let path = WienerPath::sample(2, -50.0, 2.0, 1e-3).unwrap();
        let settings = PullbackSettings::new(vec![1.0, 2.0]).with_modes(4).with_tol(1e-3);
        let ics = ic_ensemble(4, 4, 1.0, 0);
        let rows = semicontinuity_experiment(
            &spec,
            &path,
            NoiseVariant::DifferenceQuotient,
            &[(0.0, 0.0)],
            &settings,
            &ics,
            &Pool::serial(),
        )
        .unwrap();
        assert_eq!(rows[0].dist_total, 0.0);
        assert!(rows[0].triangle_ok(1e-12));
    }
}
