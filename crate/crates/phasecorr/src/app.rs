//! Subcommand bodies. Each returns its results so tests can drive them without a process.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use phasecorr_core::ensemble::Ensemble;
use phasecorr_core::multitime::{estimate, g2_delay, plan, tally, Ladder, Phase, Plan, TimeMap};
use phasecorr_core::oracle::{multitime_delay_grid, Liouvillian, OracleSettings};
use phasecorr_core::sde::{doubling_sweep, fitted_order, SweepRow};
use phasecorr_core::stats::Estimate;
use phasecorr_core::{Error as CoreError, SOrder, C64};

use crate::config::{CorrelationRequest, RunConfig};
use crate::error::AppError;
use crate::output::{self, Manifest, Source};
use crate::runner::{evolve_to, occupation_record, run_delays, steps_for, DelayProtocol, Dynamics, OccupationRecord, RunStats, Workers};

/// Command-line overrides applied on top of the configuration file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub gnuplot: bool,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(s) = self.seed {
            cfg.ensemble.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.output.dir = Some(o.display().to_string());
        }
        if self.gnuplot {
            cfg.output.gnuplot = true;
        }
    }
}

#[derive(Debug, Clone)]
pub struct Curve {
    pub name: String,
    pub taus: Vec<f64>,
    pub points: Vec<Estimate>,
}

pub struct CorrelationRun {
    pub curves: Vec<Curve>,
    pub occupations: Vec<OccupationRecord>,
    pub stats: RunStats,
    pub at_t0: Ensemble,
    pub last: Ensemble,
    pub notes: Vec<String>,
}

enum Resolved {
    G2 { first: usize, second: usize },
    Product { plan: Plan, labels: crate::config::LabelTimes },
}

fn resolve(requests: &[CorrelationRequest]) -> Result<Vec<(String, Resolved)>, AppError> {
    requests
        .iter()
        .map(|r| {
            Ok(match r {
                CorrelationRequest::G2 { name, first, second } => (name.clone(), Resolved::G2 { first: *first, second: *second }),
                CorrelationRequest::Product { name, spec, labels } => {
                    let p = plan(spec);
                    if !p.is_feasible() {
                        return Err(AppError::Config(format!("correlation '{name}' has no phase-space estimator:\n{}", p.describe())));
                    }
                    (name.clone(), Resolved::Product { plan: p, labels: *labels })
                }
            })
        })
        .collect()
}

fn record_steps(cfg: &RunConfig) -> Result<u64, AppError> {
    if cfg.integration.record_every > 0.0 {
        steps_for(cfg.integration.record_every, cfg.integration.dt)
    } else {
        Ok(0)
    }
}

/// Evolves to `t0`, switches if any plan needs doubled-Q samples, and estimates every
/// requested correlation on the delay grid.
pub fn compute_correlations(cfg: &RunConfig, w: &Workers, start: Option<Ensemble>, record: bool) -> Result<CorrelationRun, AppError> {
    let section = cfg.correlations.as_ref().ok_or_else(|| AppError::Config("no [correlations] section".into()))?;
    let resolved = resolve(&cfg.correlation_requests()?)?;
    let order = start.as_ref().map(|e| e.order()).unwrap_or(cfg.order());
    let mut switch = section.switch_time.is_some();
    let mut keep_normal = false;
    for (_, r) in &resolved {
        match r {
            Resolved::G2 { .. } => keep_normal = true,
            Resolved::Product { plan, labels } => {
                for (label, phase) in plan.required_snapshots() {
                    match phase {
                        Phase::AntiNormal => switch = true,
                        Phase::Normal if labels.is_delayed(label) => keep_normal = true,
                        Phase::Normal => {}
                    }
                }
            }
        }
    }
    if order.same_order(SOrder::DOUBLED_Q) {
        switch = false;
        keep_normal = true;
    }
    if switch && !order.is_normal() {
        return Err(AppError::Config(format!("switching to doubled-Q needs a positive-P ensemble, not {order}")));
    }
    let taus = cfg.taus();
    let proto = DelayProtocol {
        params: cfg.model_params()?,
        initial: cfg.order(),
        size: cfg.ensemble.size,
        blocks: cfg.ensemble.blocks,
        seed: cfg.ensemble.seed,
        step: cfg.step(),
        noise: cfg.noise(),
        variant: cfg.variant(),
        t0: section.t0,
        taus: taus.clone(),
        switch_at_t0: switch,
        keep_normal,
        occupation_every: if record { record_steps(cfg)? } else { 0 },
    };
    let blocks = cfg.ensemble.blocks;
    let t0 = section.t0;
    let mut points: Vec<Vec<Estimate>> = vec![Vec::with_capacity(taus.len()); resolved.len()];
    let mut notes = Vec::new();
    let outcome = run_delays(w, &proto, start, &mut |_: usize, tau: f64, store: &phasecorr_core::multitime::SnapshotStore| -> Result<(), AppError> {
        for ((name, r), out) in resolved.iter().zip(points.iter_mut()) {
            let value = match r {
                Resolved::G2 { first, second } => g2_delay(store, *first, *second, t0, &[tau], blocks).map(|c| c.points[0]),
                Resolved::Product { plan, labels } => estimate(plan, store, &TimeMap(labels.times(t0, tau)), blocks),
            };
            out.push(match value {
                Ok(v) => v,
                Err(CoreError::DivisionByZero { value, error }) => {
                    notes.push(format!("{name}: undefined at tau = {tau}, occupation {value:e} within its error {error:e}"));
                    Estimate { value: C64::new(f64::NAN, f64::NAN), err_re: f64::NAN, err_im: f64::NAN, samples: 0 }
                }
                Err(e) => return Err(e.into()),
            });
        }
        Ok(())
    })?;
    let curves = resolved.iter().zip(points).map(|((name, _), points)| Curve { name: name.clone(), taus: taus.clone(), points }).collect();
    Ok(CorrelationRun { curves, occupations: outcome.occupations, stats: outcome.stats, at_t0: outcome.at_t0, last: outcome.last, notes })
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf, AppError> {
    let dir = PathBuf::from(cfg.output.dir.as_deref().unwrap_or("out"));
    std::fs::create_dir_all(&dir).map_err(|e| AppError::io(&dir, e))?;
    Ok(dir)
}

fn write_curves(dir: &Path, curves: &[Curve], source: Source, gnuplot: bool, files: &mut Vec<String>) -> Result<(), AppError> {
    for c in curves {
        let p = output::curve_path(dir, &c.name, source);
        output::write_curve(&p, &c.taus, &c.points)?;
        files.push(file_name(&p));
        if gnuplot {
            files.push(file_name(&output::write_gnuplot(&p, &c.name)?));
        }
    }
    Ok(())
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Summary of a finished `simulate` or `correlate` run.
#[derive(Debug)]
pub struct RunReport {
    pub dir: PathBuf,
    pub files: Vec<String>,
    pub stats: RunStats,
}

fn finish(command: &str, cfg: &RunConfig, w: &Workers, dir: &Path, mut files: Vec<String>, stats: RunStats, ratios: Vec<(String, f64)>, notes: Vec<String>) -> Result<RunReport, AppError> {
    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION"),
        command,
        source: Source::Stochastic,
        seed: cfg.ensemble.seed,
        workers: w.count(),
        escaped: stats.escaped,
        clamps: stats.clamps,
        wall_seconds: stats.wall_seconds,
        files: files.clone(),
        timestep_ratios: ratios,
        notes,
        config: cfg,
    };
    let path = dir.join(format!("{command}.manifest.json"));
    output::write_manifest(&path, &manifest)?;
    files.push(file_name(&path));
    Ok(RunReport { dir: dir.to_path_buf(), files, stats })
}

fn ratios(dynamics: &Dynamics, ens: &Ensemble, dt: f64) -> Result<Vec<(String, f64)>, AppError> {
    Ok(dynamics.timestep_report(ens, dt)?.ratios.into_iter().map(|r| (r.term.to_string(), r.ratio)).collect())
}

/// Full run from the vacuum: occupations to `t_end`, correlations if configured, optional checkpoint.
pub fn simulate(cfg: &RunConfig, w: &Workers) -> Result<RunReport, AppError> {
    let clock = Instant::now();
    let dir = out_dir(cfg)?;
    let mut files = Vec::new();
    let mut notes = Vec::new();
    let every = record_steps(cfg)?;
    let blocks = cfg.ensemble.blocks;
    let (mut ens, mut occupations, mut stats, timestep) = if cfg.correlations.is_some() {
        let run = compute_correlations(cfg, w, None, true)?;
        write_curves(&dir, &run.curves, Source::Stochastic, cfg.output.gnuplot, &mut files)?;
        notes.extend(run.notes);
        let dynamics = Dynamics::with_variant(&cfg.model_params()?, run.at_t0.order(), cfg.variant())?;
        let r = ratios(&dynamics, &run.at_t0, cfg.integration.dt)?;
        (run.last, run.occupations, run.stats, r)
    } else {
        let e = Ensemble::vacuum(cfg.model.modes, cfg.ensemble.size, cfg.order(), cfg.ensemble.seed)?;
        let occ = if every > 0 { vec![occupation_record(&e, blocks)?] } else { Vec::new() };
        (e, occ, RunStats::default(), Vec::new())
    };
    let dynamics = Dynamics::with_variant(&cfg.model_params()?, ens.order(), cfg.variant())?;
    stats.clamps += evolve_to(w, &dynamics, &mut ens, cfg.integration.t_end, &cfg.step(), cfg.noise(), every, blocks, &mut occupations)?;
    stats.escaped = stats.escaped.max(ens.escaped_count());
    let timestep = if timestep.is_empty() { ratios(&dynamics, &ens, cfg.integration.dt)? } else { timestep };
    if every > 0 {
        let p = dir.join("occupations.csv");
        output::write_occupations(&p, &occupations)?;
        files.push(file_name(&p));
    }
    if let Some(cp) = &cfg.output.checkpoint {
        let p = PathBuf::from(cp);
        output::write_checkpoint(&p, &ens)?;
        files.push(p.display().to_string());
    }
    stats.wall_seconds = clock.elapsed().as_secs_f64();
    finish("simulate", cfg, w, &dir, files, stats, timestep, notes)
}

/// Correlations only, from the vacuum or from a checkpoint taken no later than `t0`.
pub fn correlate(cfg: &RunConfig, w: &Workers, checkpoint: Option<&Path>) -> Result<RunReport, AppError> {
    let clock = Instant::now();
    let dir = out_dir(cfg)?;
    let start = match checkpoint {
        Some(p) => {
            let mut e = output::read_checkpoint(p, cfg.order().is_classical(), cfg.ensemble.seed)?;
            e.flag_escapes(cfg.ensemble.escape_cap);
            if e.modes() != cfg.model.modes || e.size() % cfg.ensemble.blocks != 0 {
                return Err(AppError::Config(format!("{}: checkpoint shape does not match the configuration", p.display())));
            }
            Some(e)
        }
        None => None,
    };
    let run = compute_correlations(cfg, w, start, false)?;
    let mut files = Vec::new();
    write_curves(&dir, &run.curves, Source::Stochastic, cfg.output.gnuplot, &mut files)?;
    let dynamics = Dynamics::with_variant(&cfg.model_params()?, run.at_t0.order(), cfg.variant())?;
    let timestep = ratios(&dynamics, &run.at_t0, cfg.integration.dt)?;
    let mut stats = run.stats;
    stats.wall_seconds = clock.elapsed().as_secs_f64();
    finish("correlate", cfg, w, &dir, files, stats, timestep, run.notes)
}

/// Master-equation reference for the configured correlations.
pub struct OracleRun {
    pub curves: Vec<Curve>,
    pub occupations: Vec<f64>,
}

/// Bytes the oracle's working set of density matrices needs.
pub fn oracle_memory(modes: usize, cutoff: usize) -> u128 {
    let dim = ((cutoff + 1) as u128).pow(modes as u32);
    dim * dim * 16 * 8
}

const ORACLE_MEMORY_LIMIT: u128 = 4 << 30;

pub fn oracle_curves(cfg: &RunConfig) -> Result<OracleRun, AppError> {
    let cutoff = cfg.oracle_cutoff();
    let need = oracle_memory(cfg.model.modes, cutoff);
    if cfg.model.modes > 3 || need > ORACLE_MEMORY_LIMIT {
        return Err(AppError::Config(format!(
            "oracle: {} modes at cutoff {cutoff} need about {} MiB; at most 3 modes and {} MiB are supported",
            cfg.model.modes,
            need >> 20,
            ORACLE_MEMORY_LIMIT >> 20
        )));
    }
    let settings = OracleSettings { cutoff, dt: cfg.oracle.dt.unwrap_or(OracleSettings::default().dt), ..OracleSettings::default() };
    let l = Liouvillian::new(&cfg.model_params()?, cutoff)?;
    let t0 = cfg.correlations.as_ref().map(|c| c.t0).unwrap_or(cfg.integration.t_end);
    let rho = l.state_from_vacuum(t0, &settings)?;
    let occupations = (0..cfg.model.modes).map(|j| l.occupation(&rho, j)).collect();
    let taus = cfg.taus();
    let mut curves = Vec::new();
    for r in cfg.correlation_requests()? {
        let values = match &r {
            CorrelationRequest::G2 { first, second, .. } => {
                let (a, b) = (*first, *second);
                let num = multitime_delay_grid(&l, &rho, &[(Ladder::Create, a, false), (Ladder::Create, b, true), (Ladder::Annihilate, b, true), (Ladder::Annihilate, a, false)], &taus, settings.dt)?;
                let late = multitime_delay_grid(&l, &rho, &[(Ladder::Create, b, true), (Ladder::Annihilate, b, true)], &taus, settings.dt)?;
                let early = l.occupation(&rho, a);
                num.iter().zip(&late).map(|(n, d)| C64::new(n.re / (early * d.re), 0.0)).collect()
            }
            CorrelationRequest::Product { spec, labels, .. } => {
                let factors: Vec<(Ladder, usize, bool)> = spec.factors().iter().map(|f| (f.op, f.mode, labels.is_delayed(f.time))).collect();
                multitime_delay_grid(&l, &rho, &factors, &taus, settings.dt)?
            }
        };
        curves.push(Curve { name: r.name().to_string(), taus: taus.clone(), points: values.into_iter().map(Estimate::exact).collect() });
    }
    Ok(OracleRun { curves, occupations })
}

pub fn oracle(cfg: &RunConfig) -> Result<RunReport, AppError> {
    let clock = Instant::now();
    let dir = out_dir(cfg)?;
    let run = oracle_curves(cfg)?;
    let mut files = Vec::new();
    write_curves(&dir, &run.curves, Source::Oracle, cfg.output.gnuplot, &mut files)?;
    let notes = run.occupations.iter().enumerate().map(|(j, n)| format!("occupation of mode {} at t0: {n:e}", j + 1)).collect();
    let stats = RunStats { wall_seconds: clock.elapsed().as_secs_f64(), ..RunStats::default() };
    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION"),
        command: "oracle",
        source: Source::Oracle,
        seed: cfg.ensemble.seed,
        workers: 1,
        escaped: 0,
        clamps: 0,
        wall_seconds: stats.wall_seconds,
        files: files.clone(),
        timestep_ratios: Vec::new(),
        notes,
        config: cfg,
    };
    let path = dir.join("oracle.manifest.json");
    output::write_manifest(&path, &manifest)?;
    files.push(file_name(&path));
    Ok(RunReport { dir, files, stats })
}

/// Plan descriptions for every configured product, or for one spec.
pub fn plan_report(specs: &[(String, phasecorr_core::multitime::CorrelationSpec)]) -> String {
    let mut s = String::new();
    for (name, spec) in specs {
        let _ = writeln!(s, "[{name}]");
        s.push_str(&plan(spec).describe());
        s.push('\n');
    }
    s
}

/// Feasibility table for orders `1..=factors` with up to `times` distinct times.
pub fn tally_report(factors: usize, times: usize) -> String {
    let cols: Vec<_> = (1..=factors).map(|n| tally(n, times)).collect();
    let mut s = String::new();
    let dash = |v: usize| if v == 0 { String::from("--") } else { v.to_string() };
    let _ = write!(s, "{:<36}", "order (number of operators)");
    for n in 1..=factors {
        let _ = write!(s, "{n:>8}");
    }
    s.push('\n');
    let rows: [(&str, Box<dyn Fn(&phasecorr_core::multitime::Tally) -> usize>); 8] = [
        ("total permutations", Box::new(|t| t.total)),
        ("single time correlations", Box::new(|t| t.single_time)),
        ("multi-time with positive-P", Box::new(|t| t.normal)),
        ("additional with doubled-Q", Box::new(|t| t.antinormal)),
        ("additional with mixed order", Box::new(|t| t.mixed)),
        ("total doable", Box::new(|t| t.doable())),
        ("time ordered, not doable", Box::new(|t| t.time_ordered_not_doable())),
        ("not time ordered, not doable", Box::new(|t| t.not_time_ordered)),
    ];
    for (label, f) in rows.iter() {
        let _ = write!(s, "{label:<36}");
        for t in &cols {
            let _ = write!(s, "{:>8}", dash(f(t)));
        }
        s.push('\n');
    }
    if let Some(last) = cols.last() {
        if !last.infeasible.is_empty() {
            let _ = writeln!(s, "\ntime-ordered products without an estimator ({factors} operators):");
            for spec in &last.infeasible {
                let _ = writeln!(s, "  {spec}");
            }
        }
    }
    s
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub rows: Vec<SweepRow>,
    pub order: f64,
}

impl ConvergenceReport {
    pub fn render(&self) -> String {
        let mut s = String::from("      dt    discrepancy   local order\n");
        for (i, r) in self.rows.iter().enumerate() {
            let local = (i > 0).then(|| (self.rows[i - 1].discrepancy / r.discrepancy).log2());
            let _ = writeln!(s, "{:>8.5}  {:>13.6e}  {}", r.dt, r.discrepancy, local.map(|x| format!("{x:>8.3}")).unwrap_or_else(|| "       -".into()));
        }
        let _ = writeln!(s, "fitted order: {:.3}", self.order);
        s
    }
}

/// Paired-noise doubling checks over successive halvings of the configured step.
pub fn convergence(cfg: &RunConfig) -> Result<ConvergenceReport, AppError> {
    let c = &cfg.convergence;
    let duration = c.duration.unwrap_or(cfg.integration.t_end);
    let start = Ensemble::vacuum(cfg.model.modes, c.trajectories.max(2), cfg.order(), cfg.ensemble.seed)?;
    let starts: Vec<Vec<C64>> = (0..c.trajectories).map(|i| start.raw()[i * 2 * cfg.model.modes..(i + 1) * 2 * cfg.model.modes].to_vec()).collect();
    let rows = match Dynamics::with_variant(&cfg.model_params()?, cfg.order(), cfg.variant())? {
        Dynamics::Doubled(m) => doubling_sweep(&m, &starts, cfg.ensemble.seed, cfg.noise(), &cfg.step(), c.halvings, duration),
        Dynamics::Classical(m) => doubling_sweep(&m, &starts, cfg.ensemble.seed, cfg.noise(), &cfg.step(), c.halvings, duration),
    };
    let order = fitted_order(&rows);
    Ok(ConvergenceReport { rows, order })
}
