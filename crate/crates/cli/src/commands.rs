use std::io::Write;

use nlrd_core::attractor::{
    absorbing_check, absorbing_radius, ic_ensemble, pullback_attractor_sample, pullback_window, radius_window,
    semicontinuity_experiment, PullbackSettings, RadiusFormula,
};
use nlrd_core::conjugate::{limit_check, AuxSource, AuxiliaryProcess, Flavor};
use nlrd_core::io::{fmt_f64, CsvWriter};
use nlrd_core::model::{validate, Coupling};
use nlrd_core::noise::{certify_variant, certify_window, CertifyTolerances, HypothesisReport};
use nlrd_core::solver::{
    aligned_window, converge_schedule, required_window, solve, Drive, Engine, Record, Scheme, SolveConfig,
};
use nlrd_core::{Field, ModelSpec, NoiseKind, NoiseVariant, WienerPath, LAMBDA_1};

use crate::args::*;
use crate::run::{Failure, Outcome, Run};

const DEFAULT_DT: f64 = 1.0 / 1024.0;
const DEFAULT_DT_GRID: f64 = 1.0 / 4096.0;
const DEFAULT_MODES: usize = 16;

pub fn dispatch(cli: &Cli) -> Outcome<()> {
    match &cli.command {
        Command::NoiseCheck(a) => noise_check(cli, a),
        Command::Validate(a) => validate_cmd(cli, a),
        Command::Simulate(a) => simulate(cli, a),
        Command::Converge(a) => converge(cli, a),
        Command::Aux(a) => aux(cli, a),
        Command::AuxLimit(a) => aux_limit(cli, a),
        Command::Absorb(a) => absorb(cli, a),
        Command::Attractor(a) => attractor(cli, a),
        Command::Semidist(a) => semidist(cli, a),
    }
}

struct Grid {
    dt: f64,
    dt_grid: f64,
    modes: usize,
}

impl Resolution {
    fn resolve(&self) -> Outcome<Grid> {
        let g = Grid {
            dt: self.dt.unwrap_or(DEFAULT_DT),
            dt_grid: self.dt_grid.unwrap_or(DEFAULT_DT_GRID),
            modes: self.modes.unwrap_or(DEFAULT_MODES),
        };
        if !(g.dt > 0.0) || !(g.dt_grid > 0.0) {
            return Err(Failure::Usage("--dt and --dt-grid must be positive".into()));
        }
        if g.modes == 0 {
            return Err(Failure::Usage("--modes must be at least 1".into()));
        }
        let ratio = g.dt / g.dt_grid;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) || ratio.round() < 1.0 {
            return Err(Failure::Usage(format!(
                "--dt {} is not a positive multiple of --dt-grid {}",
                g.dt, g.dt_grid
            )));
        }
        Ok(g)
    }
}

fn variant_of(noise: NoiseArg) -> Option<NoiseVariant> {
    match noise {
        NoiseArg::Ou => Some(NoiseVariant::Ou),
        NoiseArg::Mollifier => Some(NoiseVariant::MollifierDerivative),
        NoiseArg::Diffq => Some(NoiseVariant::DifferenceQuotient),
        NoiseArg::White | NoiseArg::None => None,
    }
}

fn smoothed(noise: NoiseArg) -> Outcome<NoiseVariant> {
    variant_of(noise).ok_or_else(|| Failure::Usage("this subcommand needs --noise ou, mollifier or diffq".into()))
}

/// The model with the `--epsilon` override applied; `--noise none` cannot
/// carry a noise intensity.
fn with_epsilon(spec: &ModelSpec, noise: NoiseArg, epsilon: Option<f64>) -> Outcome<ModelSpec> {
    if noise == NoiseArg::None && epsilon.is_some_and(|e| e != 0.0) {
        return Err(Failure::Usage("epsilon requires a noise kind".into()));
    }
    let epsilon = epsilon.unwrap_or(spec.epsilon);
    if !(epsilon >= 0.0) {
        return Err(Failure::Usage(format!("epsilon must be nonnegative, got {epsilon}")));
    }
    Ok(ModelSpec {
        epsilon,
        ..spec.clone()
    })
}

/// Smoothed noise of the requested kind, if any.
fn noise_kind(noise: NoiseArg, delta: f64) -> Outcome<Option<NoiseKind>> {
    variant_of(noise).map(|v| NoiseKind::new(v, delta)).transpose().map_err(Failure::from)
}

fn drive_for<'a>(noise: NoiseArg, kind: Option<&'a NoiseKind>) -> Drive<'a> {
    match (noise, kind) {
        (_, Some(k)) => Drive::Stationary(k),
        (NoiseArg::White, None) => Drive::White,
        _ => Drive::Deterministic,
    }
}

fn sample_path(seed: u64, (a, b): (f64, f64), h: f64) -> Outcome<WienerPath> {
    let (lo, hi) = aligned_window(a, b, h);
    Ok(WienerPath::sample(seed, lo, hi, h)?)
}

fn union((a, b): (f64, f64), (c, d): (f64, f64)) -> (f64, f64) {
    (a.min(c), b.max(d))
}

fn check_outcome(pass: bool, what: &str) -> Outcome<()> {
    if pass {
        Ok(())
    } else {
        Err(Failure::Check(what.into()))
    }
}

fn noise_check(cli: &Cli, a: &NoiseCheckArgs) -> Outcome<()> {
    let mut run = Run::new(cli, a)?;
    let variants: Vec<NoiseVariant> = match a.kind {
        KindArg::Ou => vec![NoiseVariant::Ou],
        KindArg::Mollifier => vec![NoiseVariant::MollifierDerivative],
        KindArg::Diffq => vec![NoiseVariant::DifferenceQuotient],
        KindArg::All => NoiseVariant::ALL.to_vec(),
    };
    if !(a.horizon > 0.0) || a.deltas.iter().any(|d| !(*d > 0.0)) {
        return Err(Failure::Usage("--horizon and --deltas must be positive".into()));
    }
    let tol = CertifyTolerances { slack: a.slack };
    let reports: Vec<HypothesisReport> = run.pool.map(&variants, |&v| -> Outcome<HypothesisReport> {
        let path = sample_path(run.seed, certify_window(v, a.horizon, &a.deltas), a.dt_grid)?;
        Ok(certify_variant(v, &path, a.horizon, &a.deltas, tol)?)
    })
    .into_iter()
    .collect::<Outcome<_>>()?;
    for r in &reports {
        println!(
            "{:<10} integral {}  x {}  {}",
            r.kind,
            if r.pass_integral { "ok" } else { "FAIL" },
            if r.pass_x { "ok" } else { "FAIL" },
            if r.pass { "pass" } else { "fail" }
        );
    }
    let mut out = run.create("noise_check.json")?;
    let body = serde_json::json!({ "manifest": run.hash(), "reports": reports });
    writeln!(out, "{}", serde_json::to_string_pretty(&body).expect("reports serialize"))?;
    out.flush()?;
    drop(out);
    run.finish()?;
    check_outcome(reports.iter().all(|r| r.pass), "noise hypotheses")
}

fn validate_cmd(cli: &Cli, a: &ValidateArgs) -> Outcome<()> {
    let mut run = Run::new(cli, a)?;
    let diag = validate(&run.spec, LAMBDA_1, a.alpha);
    let width = diag.checks.iter().map(|c| c.condition.len()).max().unwrap_or(9).max(9);
    println!("{:<width$}  {:>24}  {:>2}  {:>24}  pass", "condition", "lhs", "", "rhs");
    for c in &diag.checks {
        let mark = match (c.pass, c.required) {
            (true, _) => "yes",
            (false, true) => "NO",
            (false, false) => "no (advisory)",
        };
        println!(
            "{:<width$}  {:>24}  {:>2}  {:>24}  {mark}",
            c.condition,
            fmt_f64(c.lhs),
            c.relation,
            fmt_f64(c.rhs)
        );
    }
    let mut csv = CsvWriter::new(
        run.create("validate.csv")?,
        run.hash(),
        &["condition", "lhs", "rhs", "relation", "pass", "required"],
    )?;
    for c in &diag.checks {
        csv.cells(&[
            format!("\"{}\"", c.condition.replace('"', "\"\"")),
            fmt_f64(c.lhs),
            fmt_f64(c.rhs),
            c.relation.clone(),
            c.pass.to_string(),
            c.required.to_string(),
        ])?;
    }
    csv.finish()?;
    run.finish()?;
    check_outcome(diag.passed(), "required model assumptions")
}

fn simulate(cli: &Cli, a: &SimulateArgs) -> Outcome<()> {
    let mut run = Run::new(cli, a)?;
    let g = a.resolution.resolve()?;
    if a.every == 0 {
        return Err(Failure::Usage("--every must be at least 1".into()));
    }
    let spec = with_epsilon(&run.spec, a.noise, a.epsilon)?;
    let kind = noise_kind(a.noise, a.delta)?;
    let drive = drive_for(a.noise, kind.as_ref());
    let scheme = match a.scheme {
        SchemeArg::Imex => Scheme::ImexEuler,
        SchemeArg::Heun => Scheme::ExplicitHeun,
    };
    let config = SolveConfig::new(a.t0, a.t1)
        .with_dt(g.dt)
        .with_modes(g.modes)
        .with_scheme(scheme)
        .with_record(Record::Every(a.every));
    config.n_steps()?;
    let path = match drive {
        Drive::Deterministic => None,
        _ => Some(sample_path(run.seed, required_window(&spec, drive, &config), g.dt_grid)?),
    };
    let u0 = Field::mode(g.modes, 1, a.ic_amplitude);
    let traj = solve(&spec, path.as_ref(), drive, &config, &u0)?;
    let engine = Engine::new(&spec, g.modes, 4 * g.modes)?;

    let mut header = vec!["t".to_string(), "l2_norm".into(), "h1_norm".into(), "l_value".into(), "a_value".into()];
    header.extend((1..=g.modes).map(|k| format!("c{k}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = CsvWriter::new(run.create(&a.out)?, run.hash(), &header)?;
    for (t, u) in traj.times.iter().zip(&traj.states) {
        let mut row = vec![*t, u.l2_norm(), u.h1_norm(), engine.l_value(&u.coeffs), engine.nonlocal(&u.coeffs)];
        row.extend_from_slice(&u.coeffs);
        csv.row(&row)?;
    }
    csv.finish()?;
    println!(
        "{} steps, |u(t1)| = {}",
        config.n_steps()?,
        fmt_f64(traj.last().l2_norm())
    );
    run.finish()
}

fn converge(cli: &Cli, a: &ConvergeArgs) -> Outcome<()> {
    let mut run = Run::new(cli, a)?;
    let g = a.resolution.resolve()?;
    let variant = smoothed(a.noise)?;
    let schedule: Vec<(f64, f64)> = if a.paired {
        if a.deltas.len() != a.epsilons.len() {
            return Err(Failure::Usage("--paired needs as many epsilons as deltas".into()));
        }
        a.deltas.iter().cloned().zip(a.epsilons.iter().cloned()).collect()
    } else {
        a.deltas
            .iter()
            .flat_map(|d| a.epsilons.iter().map(move |e| (*d, *e)))
            .collect()
    };
    if schedule.is_empty() {
        return Err(Failure::Usage("empty (delta, epsilon) schedule".into()));
    }
    let config = SolveConfig::new(0.0, a.t1).with_dt(g.dt).with_modes(g.modes);
    config.n_steps()?;
    let dmax = a.deltas.iter().cloned().fold(0.0, f64::max);
    let widest = NoiseKind::new(variant, dmax)?;
    let window = union(
        required_window(&run.spec, Drive::Stationary(&widest), &config),
        required_window(&run.spec, Drive::White, &config),
    );
    let path = sample_path(run.seed, window, g.dt_grid)?;
    let u0 = Field::mode(g.modes, 1, a.ic_amplitude);
    let rows = converge_schedule(
        &run.spec,
        &path,
        |d| NoiseKind::new(variant, d),
        &schedule,
        &config,
        &u0,
        &run.pool,
    )?;
    let mut csv = CsvWriter::new(
        run.create("converge.csv")?,
        run.hash(),
        &["delta", "epsilon", "sup_gap_vs_deterministic", "sup_gap_vs_white", "roundtrip_residual"],
    )?;
    for r in &rows {
        csv.row(&[r.delta, r.epsilon, r.sup_gap_vs_deterministic, r.sup_gap_vs_white, r.roundtrip_residual])?;
        println!(
            "delta {}  epsilon {}  vs det {}  vs white {}",
            fmt_f64(r.delta),
            fmt_f64(r.epsilon),
            fmt_f64(r.sup_gap_vs_deterministic),
            fmt_f64(r.sup_gap_vs_white)
        );
    }
    csv.finish()?;
    run.finish()
}

/// The auxiliary process of the requested flavor, defaulting to the
/// config's coupling.
fn aux_process(spec: &ModelSpec, flavor: Option<FlavorArg>, source: AuxSource, epsilon: f64) -> Outcome<AuxiliaryProcess> {
    let flavor = match (flavor, &spec.coupling) {
        (Some(FlavorArg::Additive), _) | (None, Coupling::Additive { .. }) => Flavor::Additive,
        (Some(FlavorArg::Multiplicative), _) | (None, Coupling::Multiplicative) => Flavor::Multiplicative,
        (None, Coupling::General { .. }) => {
            return Err(Failure::Usage("general coupling has no auxiliary process; pass --flavor".into()))
        }
    };
    Ok(match flavor {
        Flavor::Additive => {
            let phi = match &spec.coupling {
                Coupling::Additive { phi } => Field::from_coeffs(phi.clone()),
                _ => return Err(Failure::Usage("the additive process needs a config with additive coupling".into())),
            };
            AuxiliaryProcess::additive(source, epsilon, phi, spec.eta_damp)?
        }
        Flavor::Multiplicative => AuxiliaryProcess::multiplicative(source, epsilon)?,
    })
}

fn aux(cli: &Cli, a: &AuxArgs) -> Outcome<()> {
    let mut run = Run::new(cli, a)?;
    let spec = with_epsilon(&run.spec, a.noise, a.epsilon)?;
    let source = match noise_kind(a.noise, a.delta)? {
        Some(k) => AuxSource::Noise(k),
        None if a.noise == NoiseArg::White => AuxSource::White,
        None => return Err(Failure::Usage("aux needs a noise kind".into())),
    };
    let proc = aux_process(&spec, a.flavor, source, spec.epsilon)?;
    if !(a.t0 < a.t1) {
        return Err(Failure::Usage("--t0 must precede --t1".into()));
    }
    let (t0, t1) = aligned_window(a.t0, a.t1, a.dt_grid);
    let path = sample_path(run.seed, proc.requirement(t0, t1), a.dt_grid)?;
    let lo = path.index_of(a.t0.max(t0))?;
    let hi = path.index_of(a.t1.min(t1))?;
    let track = proc.scalar_track(&path, lo, hi)?;
    let mut csv = CsvWriter::new(run.create("aux.csv")?, run.hash(), &["t", "aux", "norm"])?;
    for i in lo..=hi {
        let s = track.at(i);
        csv.row(&[path.time(i), s, proc.magnitude_of(s)])?;
    }
    csv.finish()?;
    run.finish()
}

fn aux_limit(cli: &Cli, a: &AuxLimitArgs) -> Outcome<()> {
    let mut run = Run::new(cli, a)?;
    let variant = smoothed(a.noise)?;
    let spec = with_epsilon(&run.spec, a.noise, a.epsilon)?;
    if a.deltas.is_empty() || !(a.horizon > 0.0) {
        return Err(Failure::Usage("aux-limit needs deltas and a positive horizon".into()));
    }
    let procs: Vec<AuxiliaryProcess> = a
        .deltas
        .iter()
        .map(|&d| aux_process(&spec, a.flavor, AuxSource::Noise(NoiseKind::new(variant, d)?), spec.epsilon))
        .collect::<Outcome<_>>()?;
    let window = procs
        .iter()
        .map(|p| p.requirement(-a.horizon, a.horizon))
        .fold((0.0, 0.0), union);
    let path = sample_path(run.seed, window, a.dt_grid)?;
    let report = limit_check(&procs, &path, a.horizon)?;
    let mut csv = CsvWriter::new(run.create("aux_limit.csv")?, run.hash(), &["delta", "gap"])?;
    for r in &report.rows {
        csv.row(&[r.delta, r.gap])?;
        println!("delta {}  gap {}", fmt_f64(r.delta), fmt_f64(r.gap));
    }
    csv.finish()?;
    run.finish()
}

fn absorb(cli: &Cli, a: &AbsorbArgs) -> Outcome<()> {
    let mut run = Run::new(cli, a)?;
    let g = a.resolution.resolve()?;
    let mut spec = with_epsilon(&run.spec, a.noise, a.epsilon)?;
    if a.noise == NoiseArg::None {
        spec.epsilon = 0.0;
    }
    let kind = noise_kind(a.noise, a.delta)?;
    let drive = drive_for(a.noise, kind.as_ref());
    let formula = RadiusFormula::for_spec(&spec)?;
    let settings = PullbackSettings::new(vec![a.pullback]).with_modes(g.modes).with_dt(g.dt);
    let config = SolveConfig::new(-a.pullback, 0.0).with_dt(g.dt).with_modes(g.modes);
    config.n_steps()?;
    let window = union(
        radius_window(&spec, kind.as_ref(), formula)?,
        required_window(&spec, drive, &config),
    );
    let path = sample_path(run.seed, window, g.dt_grid)?;
    let radius = absorbing_radius(&spec, &path, kind.as_ref(), formula)?;
    let check = absorbing_check(
        &spec,
        Some(&path),
        drive,
        &radius,
        a.ball,
        a.pullback,
        a.n_ics,
        &settings,
        a.slack,
        &run.pool,
    )?;
    println!(
        "{} radius: |u|^2 <= {}; max |u(0)|^2 = {} ({})",
        formula.name(),
        fmt_f64(radius.ball_sq),
        fmt_f64(check.max_terminal_sq),
        if check.pass { "inside" } else { "OUTSIDE" }
    );
    let mut out = run.create("absorb.json")?;
    let body = serde_json::json!({ "manifest": run.hash(), "radius": radius, "check": check });
    writeln!(out, "{}", serde_json::to_string_pretty(&body).expect("reports serialize"))?;
    out.flush()?;
    drop(out);
    run.finish()?;
    check_outcome(check.pass, "terminal states outside the absorbing ball")
}

fn pullback_settings(p: &PullbackArgs, g: &Grid) -> PullbackSettings {
    PullbackSettings::new(p.times.clone())
        .with_modes(g.modes)
        .with_dt(g.dt)
        .with_tol(p.tol)
}

fn attractor(cli: &Cli, a: &AttractorArgs) -> Outcome<()> {
    let mut run = Run::new(cli, a)?;
    let g = a.resolution.resolve()?;
    let spec = with_epsilon(&run.spec, a.noise, a.epsilon)?;
    let kind = noise_kind(a.noise, a.delta)?;
    let drive = drive_for(a.noise, kind.as_ref());
    let settings = pullback_settings(&a.pullback, &g);
    let path = match drive {
        Drive::Deterministic => None,
        _ => {
            let d = if kind.is_some() { a.delta } else { 0.0 };
            Some(sample_path(run.seed, pullback_window(&spec, &settings, d), g.dt_grid)?)
        }
    };
    let ics = ic_ensemble(g.modes, a.pullback.n_ics, a.pullback.ic_radius, run.seed);
    let cloud = pullback_attractor_sample(&spec, path.as_ref(), drive, &settings, &ics, &run.pool)?;
    let out = run.create("attractor.csv")?;
    cloud.write_csv(out, run.hash())?;
    println!(
        "{} members, diameter {}, displacements {:?}",
        cloud.len(),
        fmt_f64(cloud.diameter()),
        cloud.meta.displacements
    );
    run.finish()
}

fn semidist(cli: &Cli, a: &SemidistArgs) -> Outcome<()> {
    let mut run = Run::new(cli, a)?;
    let g = a.resolution.resolve()?;
    let variant = smoothed(a.noise)?;
    let epsilons = a.epsilons.clone().unwrap_or_else(|| a.deltas.clone());
    if epsilons.len() != a.deltas.len() || a.deltas.is_empty() {
        return Err(Failure::Usage("--epsilons must pair with --deltas".into()));
    }
    let schedule: Vec<(f64, f64)> = a.deltas.iter().cloned().zip(epsilons).collect();
    let settings = pullback_settings(&a.pullback, &g);
    let dmax = a.deltas.iter().cloned().fold(0.0, f64::max);
    let path = sample_path(run.seed, pullback_window(&run.spec, &settings, dmax), g.dt_grid)?;
    let ics = ic_ensemble(g.modes, a.pullback.n_ics, a.pullback.ic_radius, run.seed);
    let rows = semicontinuity_experiment(&run.spec, &path, variant, &schedule, &settings, &ics, &run.pool)?;
    let mut csv = CsvWriter::new(
        run.create("semidist.csv")?,
        run.hash(),
        &["delta", "epsilon", "dist_total", "dist_split1", "dist_split2"],
    )?;
    for r in &rows {
        csv.row(&[r.delta, r.epsilon, r.dist_total, r.dist_split1, r.dist_split2])?;
        println!(
            "delta {}  epsilon {}  dist {}",
            fmt_f64(r.delta),
            fmt_f64(r.epsilon),
            fmt_f64(r.dist_total)
        );
    }
    csv.finish()?;
    run.finish()
}
