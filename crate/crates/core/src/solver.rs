//! Time integration of the deterministic, stationary-noise and white-noise
//! equations.
//!
//! The default scheme is IMEX Euler with the nonlocal coefficient frozen at
//! the old state: `u_k⁺ = (u_k + dt·N_k) / (1 + dt·a(l(u))·λ_k)` where `N`
//! collects the reaction (evaluated pseudo-spectrally), the forcing and the
//! noise term. Explicit Heun is available as a cross-check.
//!
//! Stationary noises enter through their average over each step,
//! `dt⁻¹ ∫_{t_n}^{t_{n+1}} ζ_δ(θ_r ω) dr`, so that `ζ_δ·dt` becomes the
//! increment of the smoothed path even when `δ` is comparable to `dt`.
//! White noise is never stepped directly: the additive equation is solved
//! for `p = u − x*` and the multiplicative one for `q = e^{−y} u`.

use serde::{Deserialize, Serialize};

use crate::conjugate::{self, Flavor};
use crate::ensemble::Pool;
use crate::error::{Error, Result};
use crate::galerkin::{eigenvalue, lp_norm_of_samples, Field, SineBasis};
use crate::model::{Coupling, ModelSpec};
use crate::noise::{white_history_track, StationaryNoise, XSource};
use crate::wiener::{grid_steps, WienerPath};
use crate::T_TRUNC;

/// States with `|u|` above this are treated as diverged.
pub const DIVERGENCE_NORM: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    ImexEuler,
    ExplicitHeun,
}

/// Which states a solve keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Record {
    All,
    /// Every `k`-th step plus the final one.
    Every(usize),
    /// Final state only.
    Last,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub dt: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub n_modes: usize,
    pub n_grid: usize,
    pub record: Record,
}

impl SolveConfig {
    /// Defaults: `dt = 1e-3`, 16 modes on a 64-point grid, IMEX Euler.
    pub fn new(t_start: f64, t_end: f64) -> Self {
        Self {
            dt: 1e-3,
            t_start,
            t_end,
            scheme: Scheme::ImexEuler,
            n_modes: 16,
            n_grid: 64,
            record: Record::All,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    /// Sets `n_modes` and the pseudo-spectral grid `4 · n_modes`.
    pub fn with_modes(mut self, n_modes: usize) -> Self {
        self.n_modes = n_modes;
        self.n_grid = 4 * n_modes;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_record(mut self, record: Record) -> Self {
        self.record = record;
        self
    }

    pub fn n_steps(&self) -> Result<usize> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_start < self.t_end) {
            return Err(Error::InvalidParameter(format!(
                "t_start {} must precede t_end {}",
                self.t_start, self.t_end
            )));
        }
        Ok(grid_steps(self.t_end - self.t_start, self.dt)? as usize)
    }

    pub fn time(&self, n: usize) -> f64 {
        self.t_start + n as f64 * self.dt
    }

    /// Path nodes per time step; `dt` and `t_start` must sit on the path grid.
    pub fn nodes_per_step(&self, dt_grid: f64) -> Result<usize> {
        grid_steps(self.t_start, dt_grid)?;
        let k = grid_steps(self.dt, dt_grid)?;
        if k < 1 {
            return Err(Error::InvalidParameter("dt is below the path grid step".into()));
        }
        Ok(k as usize)
    }
}

/// The noise driving a solve.
#[derive(Clone, Copy)]
pub enum Drive<'a> {
    Deterministic,
    Stationary(&'a dyn StationaryNoise),
    White,
}

impl Drive<'_> {
    pub fn label(&self) -> String {
        match self {
            Drive::Deterministic => "none".into(),
            Drive::Stationary(n) => format!("{}(delta={})", n.name(), n.delta()),
            Drive::White => "white".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMeta {
    pub spec_hash: String,
    pub seed: u64,
    pub noise: String,
    pub scheme: Scheme,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Field>,
    pub meta: TrajectoryMeta,
    /// Largest conjugation round-trip residual over all steps: absolute for
    /// the additive transform, relative for the multiplicative one. `None`
    /// when no transform was used.
    pub roundtrip_residual: Option<f64>,
}

impl Trajectory {
    pub fn last(&self) -> &Field {
        self.states.last().expect("trajectory is never empty")
    }

    /// `sup_t |self(t) − other(t)|²` over matching records.
    pub fn sup_gap_sq(&self, other: &Trajectory) -> Result<f64> {
        if self.times.len() != other.times.len() {
            return Err(Error::SizeMismatch("trajectories have different time axes".into()));
        }
        Ok(self
            .states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| {
                let d = a.l2_distance(b);
                d * d
            })
            .fold(0.0, f64::max))
    }

    /// `sup_t |self(t) − other(t)|` in the max norm over records.
    pub fn sup_distance(&self, other: &Trajectory) -> Result<f64> {
        Ok(self.sup_gap_sq(other)?.sqrt())
    }
}

/// Per-step noise data prepared once and shared by every initial condition.
#[derive(Debug, Clone)]
pub enum Prepared {
    Deterministic,
    /// Step averages of `ζ_δ`.
    Direct { zbar: Vec<f64> },
    /// `εX_n` at step nodes, with `x* = εX·φ`.
    WhiteAdditive { xs: Vec<f64> },
    /// `y_{0,ε}` at step nodes.
    WhiteMultiplicative { y: Vec<f64> },
}

/// Window a path must cover for a solve.
pub fn required_window(spec: &ModelSpec, drive: Drive<'_>, config: &SolveConfig) -> (f64, f64) {
    let (a, b) = match drive {
        Drive::Deterministic => (config.t_start, config.t_end),
        Drive::Stationary(n) => {
            let (back, fwd) = n.support();
            (config.t_start - back, config.t_end + fwd)
        }
        Drive::White => match spec.coupling {
            Coupling::Additive { .. } => (config.t_start - T_TRUNC / spec.eta_damp, config.t_end),
            _ => (config.t_start - T_TRUNC, config.t_end),
        },
    };
    (a.min(0.0), b.max(0.0))
}

/// `[a, b]` widened outward to multiples of `h`.
pub fn aligned_window(a: f64, b: f64, h: f64) -> (f64, f64) {
    let lo = (a / h - 1e-9).floor() * h;
    let hi = (b / h + 1e-9).ceil() * h;
    (lo.min(0.0), hi.max(0.0))
}

/// `dt⁻¹ ∫_{t_n}^{t_{n+1}} ζ(θ_r ω) dr` for every step.
pub fn noise_step_averages(path: &WienerPath, noise: &dyn StationaryNoise, config: &SolveConfig) -> Result<Vec<f64>> {
    let n_steps = config.n_steps()?;
    let k = config.nodes_per_step(path.dt_grid())?;
    let (back, fwd) = noise.support();
    path.require(config.t_start - back, config.t_end + fwd)?;
    let lo = path.index_of(config.t_start)?;
    let hi = lo + n_steps * k;
    let z = noise.track(path, lo, hi)?;
    let cum = crate::quadrature::cumulative_trapezoid(&z.values, path.dt_grid());
    Ok((0..n_steps).map(|n| (cum[(n + 1) * k] - cum[n * k]) / config.dt).collect())
}

/// Prepares the per-step noise data for a drive.
pub fn prepare(spec: &ModelSpec, path: Option<&WienerPath>, drive: Drive<'_>, config: &SolveConfig) -> Result<Prepared> {
    let n_steps = config.n_steps()?;
    if spec.epsilon == 0.0 {
        return Ok(Prepared::Deterministic);
    }
    let need_path = || path.ok_or_else(|| Error::InvalidParameter("this drive needs a Wiener path".into()));
    match drive {
        Drive::Deterministic => Ok(Prepared::Deterministic),
        Drive::Stationary(noise) => {
            let zbar = noise_step_averages(need_path()?, noise, config)?;
            Ok(Prepared::Direct { zbar })
        }
        Drive::White => {
            let path = need_path()?;
            let k = config.nodes_per_step(path.dt_grid())?;
            let (a, b) = required_window(spec, drive, config);
            path.require(a, b)?;
            let lo = path.index_of(config.t_start)?;
            let hi = lo + n_steps * k;
            match spec.coupling {
                Coupling::Additive { .. } => {
                    let rate = spec.eta_damp;
                    let hist = white_history_track(path, rate, lo, hi)?;
                    let xs = (0..=n_steps)
                        .map(|n| -spec.epsilon * rate * hist.at(lo + n * k))
                        .collect();
                    Ok(Prepared::WhiteAdditive { xs })
                }
                Coupling::Multiplicative => {
                    let x0 = crate::noise::stationary_x_track(XSource::White, path, lo, hi)?;
                    let y = (0..=n_steps).map(|n| spec.epsilon * x0.at(lo + n * k)).collect();
                    Ok(Prepared::WhiteMultiplicative { y })
                }
                Coupling::General { .. } => Err(Error::RegimeMismatch(
                    "white noise is only solved for additive and multiplicative coupling".into(),
                )),
            }
        }
    }
}

/// Discretised operators for one spec and resolution.
pub struct Engine<'a> {
    spec: &'a ModelSpec,
    basis: SineBasis,
    lambdas: Vec<f64>,
    l_weights: Vec<f64>,
    phi: Option<Field>,
    spec_hash: String,
}

struct Scratch {
    samples: Vec<f64>,
    proj: Vec<f64>,
    work: Vec<f64>,
}

impl<'a> Engine<'a> {
    pub fn new(spec: &'a ModelSpec, n_modes: usize, n_grid: usize) -> Result<Self> {
        let basis = SineBasis::new(n_modes, n_grid)?;
        Ok(Self {
            spec,
            basis,
            lambdas: (1..=n_modes).map(eigenvalue).collect(),
            l_weights: spec.l_weights(n_modes),
            phi: spec.phi(n_modes),
            spec_hash: spec.hash(),
        })
    }

    pub fn n_modes(&self) -> usize {
        self.lambdas.len()
    }

    pub fn spec(&self) -> &ModelSpec {
        self.spec
    }

    /// `l(u) = Σ w_k u_k`.
    pub fn l_value(&self, coeffs: &[f64]) -> f64 {
        self.l_weights.iter().zip(coeffs).map(|(w, u)| w * u).sum()
    }

    /// `a(l(u))`.
    pub fn nonlocal(&self, coeffs: &[f64]) -> f64 {
        self.spec.a(self.l_value(coeffs))
    }

    fn scratch(&self) -> Scratch {
        Scratch {
            samples: vec![0.0; self.basis.n_grid()],
            proj: vec![0.0; self.n_modes()],
            work: vec![0.0; self.n_modes()],
        }
    }

    /// Pseudo-spectral `P[f(w)]` into `sc.proj`; `w` samples are left in
    /// `sc.samples`.
    fn reaction(&self, w: &[f64], scale_in: f64, scale_out: f64, sc: &mut Scratch) {
        self.basis.to_samples_into(w, &mut sc.samples);
        for v in sc.samples.iter_mut() {
            *v = scale_out * self.spec.f(scale_in * *v);
        }
        self.basis.from_samples_into(&sc.samples, &mut sc.proj);
    }

    /// `(a, N)` for the state `s` at step node `n`; `N` goes to `out`.
    #[allow(clippy::too_many_arguments)]
    fn rhs(&self, prep: &Prepared, s: &[f64], n: usize, t: f64, zbar: f64, out: &mut [f64], sc: &mut Scratch) -> f64 {
        let spec = self.spec;
        let a = match prep {
            Prepared::Deterministic | Prepared::Direct { .. } => {
                let a = self.nonlocal(s);
                self.reaction(s, 1.0, 1.0, sc);
                out.copy_from_slice(&sc.proj);
                if let Prepared::Direct { .. } = prep {
                    let e = spec.epsilon * zbar;
                    match &spec.coupling {
                        Coupling::Additive { .. } => {
                            let phi = self.phi.as_ref().expect("additive coupling has phi");
                            for (o, p) in out.iter_mut().zip(&phi.coeffs) {
                                *o += e * p;
                            }
                        }
                        Coupling::Multiplicative => {
                            for (o, u) in out.iter_mut().zip(s) {
                                *o += e * u;
                            }
                        }
                        Coupling::General { .. } => {
                            self.basis.to_samples_into(s, &mut sc.samples);
                            for v in sc.samples.iter_mut() {
                                *v = spec.g(t, *v);
                            }
                            self.basis.from_samples_into(&sc.samples, &mut sc.work);
                            for (o, g) in out.iter_mut().zip(&sc.work) {
                                *o += e * g;
                            }
                        }
                    }
                }
                a
            }
            Prepared::WhiteAdditive { xs } => {
                let x = xs[n];
                let phi = self.phi.as_ref().expect("additive coupling has phi");
                for ((w, p), f) in sc.work.iter_mut().zip(s).zip(&phi.coeffs) {
                    *w = p + x * f;
                }
                let a = self.nonlocal(&sc.work);
                let w = std::mem::take(&mut sc.work);
                self.reaction(&w, 1.0, 1.0, sc);
                sc.work = w;
                for (k, o) in out.iter_mut().enumerate() {
                    let xk = x * phi.coeffs[k];
                    *o = sc.proj[k] - a * self.lambdas[k] * xk + spec.eta_damp * xk;
                }
                a
            }
            Prepared::WhiteMultiplicative { y } => {
                let y = y[n];
                let ey = y.exp();
                let a = spec.a(self.l_value(s) * ey);
                self.reaction(s, ey, 1.0 / ey, sc);
                for (k, o) in out.iter_mut().enumerate() {
                    *o = sc.proj[k] + y * s[k];
                }
                a
            }
        };
        if let Some(h) = spec.forcing_at(t, self.n_modes()) {
            let scale = match prep {
                Prepared::WhiteMultiplicative { y } => (-y[n]).exp(),
                _ => 1.0,
            };
            for (o, hk) in out.iter_mut().zip(&h.coeffs) {
                *o += scale * hk;
            }
        }
        a
    }

    /// Maps the integrated state at step node `n` back to `u`.
    fn to_physical(&self, prep: &Prepared, s: &[f64], n: usize) -> Field {
        let f = Field::from_coeffs(s.to_vec());
        match prep {
            Prepared::WhiteAdditive { xs } => {
                conjugate::from_transformed(Flavor::Additive, &f, xs[n], self.phi.as_ref())
            }
            Prepared::WhiteMultiplicative { y } => conjugate::from_transformed(Flavor::Multiplicative, &f, y[n], None),
            _ => f,
        }
    }

    fn to_state(&self, prep: &Prepared, u: &Field, n: usize) -> Field {
        match prep {
            Prepared::WhiteAdditive { xs } => conjugate::to_transformed(Flavor::Additive, u, xs[n], self.phi.as_ref()),
            Prepared::WhiteMultiplicative { y } => conjugate::to_transformed(Flavor::Multiplicative, u, y[n], None),
            _ => u.clone(),
        }
    }

    fn roundtrip(&self, prep: &Prepared, u: &Field, n: usize) -> Option<f64> {
        match prep {
            Prepared::WhiteAdditive { .. } => {
                let back = self.to_physical(prep, &self.to_state(prep, u, n).coeffs, n);
                Some(back.l2_distance(u))
            }
            Prepared::WhiteMultiplicative { .. } => {
                let nu = u.l2_norm();
                if nu <= 1e-8 {
                    return Some(0.0);
                }
                let back = self.to_physical(prep, &self.to_state(prep, u, n).coeffs, n);
                Some(back.l2_distance(u) / nu)
            }
            _ => None,
        }
    }

    /// Integrates one initial condition through the prepared drive.
    pub fn integrate(
        &self,
        prep: &Prepared,
        config: &SolveConfig,
        u_init: &Field,
        seed: u64,
        label: &str,
    ) -> Result<Trajectory> {
        let n_steps = config.n_steps()?;
        if u_init.n_modes() != self.n_modes() {
            return Err(Error::SizeMismatch(format!(
                "initial field has {} modes, solver {}",
                u_init.n_modes(),
                self.n_modes()
            )));
        }
        let zbar_at = |n: usize| match prep {
            Prepared::Direct { zbar } => zbar[n],
            _ => 0.0,
        };
        let mut sc = self.scratch();
        let nm = self.n_modes();
        let mut s = self.to_state(prep, u_init, 0).coeffs;
        let mut n1 = vec![0.0; nm];
        let mut n2 = vec![0.0; nm];
        let mut stage = vec![0.0; nm];
        let mut times = Vec::new();
        let mut states = Vec::new();
        let mut rt: Option<f64> = self.roundtrip(prep, u_init, 0);
        let keep = |n: usize| match config.record {
            Record::All => true,
            Record::Every(k) => n.is_multiple_of(k.max(1)) || n == n_steps,
            Record::Last => n == n_steps,
        };
        if keep(0) {
            times.push(config.t_start);
            states.push(u_init.clone());
        }
        for n in 0..n_steps {
            let t = config.time(n);
            let dt = config.dt;
            match config.scheme {
                Scheme::ImexEuler => {
                    let a = self.rhs(prep, &s, n, t, zbar_at(n), &mut n1, &mut sc);
                    for k in 0..nm {
                        s[k] = (s[k] + dt * n1[k]) / (1.0 + dt * a * self.lambdas[k]);
                    }
                }
                Scheme::ExplicitHeun => {
                    let a1 = self.rhs(prep, &s, n, t, zbar_at(n), &mut n1, &mut sc);
                    for k in 0..nm {
                        n1[k] -= a1 * self.lambdas[k] * s[k];
                        stage[k] = s[k] + dt * n1[k];
                    }
                    let a2 = self.rhs(prep, &stage, n + 1, t + dt, zbar_at(n), &mut n2, &mut sc);
                    for k in 0..nm {
                        n2[k] -= a2 * self.lambdas[k] * stage[k];
                        s[k] += 0.5 * dt * (n1[k] + n2[k]);
                    }
                }
            }
            let u = self.to_physical(prep, &s, n + 1);
            let norm = u.l2_norm();
            if !norm.is_finite() || norm > DIVERGENCE_NORM {
                return Err(Error::Divergence { t: t + dt, norm });
            }
            if let Some(r) = self.roundtrip(prep, &u, n + 1) {
                rt = Some(rt.unwrap_or(0.0).max(r));
            }
            if keep(n + 1) {
                times.push(config.time(n + 1));
                states.push(u);
            }
        }
        Ok(Trajectory {
            times,
            states,
            meta: TrajectoryMeta {
                spec_hash: self.spec_hash.clone(),
                seed,
                noise: label.to_string(),
                scheme: config.scheme,
            },
            roundtrip_residual: rt,
        })
    }
}

/// General entry point: prepares the drive and integrates one initial
/// condition.
pub fn solve(
    spec: &ModelSpec,
    path: Option<&WienerPath>,
    drive: Drive<'_>,
    config: &SolveConfig,
    u_init: &Field,
) -> Result<Trajectory> {
    let engine = Engine::new(spec, config.n_modes, config.n_grid)?;
    let prep = prepare(spec, path, drive, config)?;
    engine.integrate(&prep, config, u_init, path.map_or(0, |p| p.seed()), &drive.label())
}

/// Integrates many initial conditions through one drive; output order
/// follows `inits`.
pub fn solve_many(
    spec: &ModelSpec,
    path: Option<&WienerPath>,
    drive: Drive<'_>,
    config: &SolveConfig,
    inits: &[Field],
    pool: &Pool,
) -> Result<Vec<Trajectory>> {
    let engine = Engine::new(spec, config.n_modes, config.n_grid)?;
    let prep = prepare(spec, path, drive, config)?;
    let seed = path.map_or(0, |p| p.seed());
    let label = drive.label();
    pool.try_map(inits, |u| engine.integrate(&prep, config, u, seed, &label))
}

/// The deterministic equation (no noise).
pub fn solve_deterministic(spec: &ModelSpec, config: &SolveConfig, u_init: &Field) -> Result<Trajectory> {
    solve(spec, None, Drive::Deterministic, config, u_init)
}

/// The random equation driven by a stationary noise.
pub fn solve_stationary(
    spec: &ModelSpec,
    path: &WienerPath,
    noise: &dyn StationaryNoise,
    config: &SolveConfig,
    u_init: &Field,
) -> Result<Trajectory> {
    solve(spec, Some(path), Drive::Stationary(noise), config, u_init)
}

/// White additive noise, solved through `p = u − x*_{0,ε}`.
pub fn solve_white_additive(spec: &ModelSpec, path: &WienerPath, config: &SolveConfig, u_init: &Field) -> Result<Trajectory> {
    if !matches!(spec.coupling, Coupling::Additive { .. }) {
        return Err(Error::RegimeMismatch("solve_white_additive needs additive coupling".into()));
    }
    solve(spec, Some(path), Drive::White, config, u_init)
}

/// White multiplicative noise, solved through `q = e^{−y_{0,ε}} u`.
pub fn solve_white_multiplicative(
    spec: &ModelSpec,
    path: &WienerPath,
    config: &SolveConfig,
    u_init: &Field,
) -> Result<Trajectory> {
    if !matches!(spec.coupling, Coupling::Multiplicative) {
        return Err(Error::RegimeMismatch("solve_white_multiplicative needs multiplicative coupling".into()));
    }
    solve(spec, Some(path), Drive::White, config, u_init)
}

/// White noise with the transform matching the model's coupling.
pub fn solve_white(spec: &ModelSpec, path: &WienerPath, config: &SolveConfig, u_init: &Field) -> Result<Trajectory> {
    solve(spec, Some(path), Drive::White, config, u_init)
}

/// One IMEX Euler step of the directly stepped equation; `noise_sample`
/// is the noise value over the step (`None` drops the noise term).
pub fn step(spec: &ModelSpec, field: &Field, t: f64, dt: f64, noise_sample: Option<f64>) -> Result<Field> {
    let n = field.n_modes();
    let engine = Engine::new(spec, n, 4 * n)?;
    let prep = match noise_sample {
        Some(z) if spec.epsilon != 0.0 => Prepared::Direct { zbar: vec![z] },
        _ => Prepared::Deterministic,
    };
    let mut sc = engine.scratch();
    let mut out = vec![0.0; n];
    let a = engine.rhs(&prep, &field.coeffs, 0, t, noise_sample.unwrap_or(0.0), &mut out, &mut sc);
    let next: Vec<f64> = (0..n)
        .map(|k| (field.coeffs[k] + dt * out[k]) / (1.0 + dt * a * engine.lambdas[k]))
        .collect();
    let f = Field::from_coeffs(next);
    let norm = f.l2_norm();
    if !norm.is_finite() || norm > DIVERGENCE_NORM {
        return Err(Error::Divergence { t: t + dt, norm });
    }
    Ok(f)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub delta: f64,
    pub epsilon: f64,
    /// `sup_t |u_{δ,ε}(t) − u(t)|²`.
    pub sup_gap_vs_deterministic: f64,
    /// `sup_t |u_{δ,ε}(t) − u_{0,ε}(t)|²`.
    pub sup_gap_vs_white: f64,
    /// Round-trip residual of the white solve.
    pub roundtrip_residual: f64,
}

/// Gap table over the listed `(δ, ε)` pairs: every row is solved with the
/// stationary noise built by `make(δ)`. Rows come back in input order.
pub fn converge_schedule<N, F>(
    spec: &ModelSpec,
    path: &WienerPath,
    make: F,
    schedule: &[(f64, f64)],
    config: &SolveConfig,
    u_init: &Field,
    pool: &Pool,
) -> Result<Vec<GapRow>>
where
    N: StationaryNoise,
    F: Fn(f64) -> Result<N> + Sync,
{
    if schedule.is_empty() {
        return Err(Error::Empty("(delta, epsilon) schedule".into()));
    }
    let config = SolveConfig {
        record: Record::All,
        ..config.clone()
    };
    let det = solve_deterministic(spec, &config, u_init)?;
    pool.try_map(schedule, |&(delta, epsilon)| {
        let s = ModelSpec {
            epsilon,
            ..spec.clone()
        };
        let noise = make(delta)?;
        let stat = solve_stationary(&s, path, &noise, &config, u_init)?;
        let white = solve_white(&s, path, &config, u_init)?;
        Ok(GapRow {
            delta,
            epsilon,
            sup_gap_vs_deterministic: stat.sup_gap_sq(&det)?,
            sup_gap_vs_white: stat.sup_gap_sq(&white)?,
            roundtrip_residual: white.roundtrip_residual.unwrap_or(0.0),
        })
    })
}

/// Gap table over the full grid `deltas × epsilons`, ordered by `(δ, ε)`.
#[allow(clippy::too_many_arguments)]
pub fn converge_solutions<N, F>(
    spec: &ModelSpec,
    path: &WienerPath,
    make: F,
    deltas: &[f64],
    epsilons: &[f64],
    config: &SolveConfig,
    u_init: &Field,
    pool: &Pool,
) -> Result<Vec<GapRow>>
where
    N: StationaryNoise,
    F: Fn(f64) -> Result<N> + Sync,
{
    if deltas.is_empty() || epsilons.is_empty() {
        return Err(Error::Empty("delta or epsilon list".into()));
    }
    let schedule: Vec<(f64, f64)> = deltas
        .iter()
        .flat_map(|d| epsilons.iter().map(move |e| (*d, *e)))
        .collect();
    converge_schedule(spec, path, make, &schedule, config, u_init, pool)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyAudit {
    pub dt: f64,
    /// `max(0, max_n Q_n)`.
    pub violation: f64,
    /// `violation / dt`.
    pub c: f64,
    pub max_q: f64,
    pub steps: usize,
}

/// Discrete energy inequality along a stationary-noise run:
/// `Q_n = (|uⁿ⁺¹|² − |uⁿ|²)/dt + mλ₁|uⁿ|² + (m/2)‖uⁿ‖² + α₂|uⁿ|_p^p − RHS(tₙ)`
/// with `RHS = (2/m)‖h‖²_* + (2κ + εc|ζ|^{p/(p−q)})|O| + εc|ζ|^{p₁}|ψ₁|^{p₁}`
/// and `ζ` the step-averaged noise the scheme used.
pub fn energy_audit(
    spec: &ModelSpec,
    path: &WienerPath,
    noise: &dyn StationaryNoise,
    config: &SolveConfig,
    u_init: &Field,
) -> Result<EnergyAudit> {
    let Coupling::General { q, .. } = spec.coupling else {
        return Err(Error::RegimeMismatch("energy audit needs the general coupling".into()));
    };
    let config = SolveConfig {
        record: Record::All,
        scheme: Scheme::ImexEuler,
        ..config.clone()
    };
    let traj = solve_stationary(spec, path, noise, &config, u_init)?;
    let zbar = noise_step_averages(path, noise, &config)?;
    let basis = SineBasis::new(config.n_modes, config.n_grid)?;
    let c = spec.c_const();
    let lambda_1 = eigenvalue(1);
    let mut max_q = f64::NEG_INFINITY;
    let mut samples = vec![0.0; config.n_grid];
    for (n, zn) in zbar.iter().enumerate() {
        let u = &traj.states[n];
        let u1 = &traj.states[n + 1];
        basis.to_samples_into(&u.coeffs, &mut samples);
        let lp = lp_norm_of_samples(&samples, spec.p);
        let t = traj.times[n];
        let z = zn.abs();
        let lhs = (u1.l2_norm_sq() - u.l2_norm_sq()) / config.dt
            + spec.m * lambda_1 * u.l2_norm_sq()
            + 0.5 * spec.m * u.h1_norm_sq()
            + spec.alpha2 * lp;
        let rhs = 2.0 / spec.m * spec.forcing_dual_sq(t)
            + (2.0 * spec.kappa + spec.epsilon * c * z.powf(spec.p / (spec.p - q)))
            + spec.epsilon * c * z.powf(spec.p1()) * spec.psi1_norm_p1(t);
        max_q = max_q.max(lhs - rhs);
    }
    let violation = max_q.max(0.0);
    Ok(EnergyAudit {
        dt: config.dt,
        violation,
        c: violation / config.dt,
        max_q,
        steps: zbar.len(),
    })
}

/// `sup_t |u_imex − u_heun|` on matching records.
pub fn scheme_gap(
    spec: &ModelSpec,
    path: Option<&WienerPath>,
    drive: Drive<'_>,
    config: &SolveConfig,
    u_init: &Field,
) -> Result<f64> {
    let imex = solve(spec, path, drive, &config.clone().with_scheme(Scheme::ImexEuler), u_init)?;
    let heun = solve(spec, path, drive, &config.clone().with_scheme(Scheme::ExplicitHeun), u_init)?;
    imex.sup_distance(&heun)
}
