//! Command implementations behind the `noether` binary. Every command returns
//! a [`Report`]; the JSON form and the text rendering come from the same value.

pub mod problem;
pub mod report;

use std::path::{Path, PathBuf};

use noether_core::conservation::{first_integral, symbolic_drift, FirstIntegral};
use noether_core::dynamics::{default_t_span, drift_table, euler_lagrange, integral_series, integrate, scaling_from_records, write_csv, SimulationSetup};
use noether_core::expr::{clear_denominators, ZeroTestConfig, DEFAULT_SEED};
use noether_core::geometry::solve_homothetic;
use noether_core::noether::{build_conditions, homothetic_factors, verify};
use noether_core::solver::{instantiate, nullspace, reduce, span_contains};
use noether_core::{Error, Expr, HomotheticKind, ParamValue};
use thiserror::Error;

use problem::{Candidate, Problem};
pub use report::{GeneratorEntry, HomotheticEntry, IntegralEntry, Membership, Report, SolutionEntry, Verdict};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("{path}: {message}")]
    Shape { path: String, message: String },
    #[error("{path}: {source}")]
    Located { path: String, source: Error },
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    /// 2 for input errors, 3 for unsupported constructs, 1 for aborted runs.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Json { .. } => 2,
            CliError::Shape { .. } => 2,
            CliError::Located { source: e, .. } | CliError::Core(e) => match e {
                Error::Unsupported(_) | Error::NonNormalizable(_) | Error::NumericOnly => 3,
                Error::IntegrationAborted { .. } | Error::Incompatible { .. } => 1,
                _ => 2,
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct Options {
    pub candidate: Option<String>,
    pub tolerance: f64,
    pub seed: u64,
    pub epsilons: Option<Vec<f64>>,
    pub csv: Option<PathBuf>,
    pub degree: u32,
    pub set: Vec<(String, ParamValue)>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            candidate: None,
            tolerance: 1e-10,
            seed: DEFAULT_SEED,
            epsilons: None,
            csv: None,
            degree: 2,
            set: Vec::new(),
            dt: None,
            t_end: None,
        }
    }
}

impl Options {
    fn zero_test(&self) -> ZeroTestConfig {
        ZeroTestConfig {
            seed: self.seed,
            ..ZeroTestConfig::default()
        }
    }
}

fn selected<'a>(p: &'a Problem, opts: &Options) -> Result<Vec<&'a Candidate>, CliError> {
    match &opts.candidate {
        Some(name) => p
            .candidates
            .iter()
            .find(|c| &c.name == name)
            .map(|c| vec![c])
            .ok_or_else(|| CliError::Shape {
                path: "--candidate".into(),
                message: format!("no candidate named `{name}`"),
            }),
        None => Ok(p.candidates.iter().collect()),
    }
}

fn quarantined(cands: &[&Candidate]) -> Vec<problem::QuarantineEntry> {
    cands.iter().filter(|c| c.quarantine).map(|c| c.quarantine_entry()).collect()
}

pub fn cmd_derive(path: &Path, opts: &Options) -> Result<Report, CliError> {
    let (_, p) = problem::load(path, &opts.set)?;
    let system = build_conditions(&p.lagrangian);
    let mut r = Report::new("derive", &p, opts);
    r.equation_count = Some(system.equation_count());
    r.determining_system = Some(system);
    Ok(r)
}

pub fn cmd_verify(path: &Path, opts: &Options) -> Result<Report, CliError> {
    let (_, p) = problem::load(path, &opts.set)?;
    let cfg = opts.zero_test();
    let cands = selected(&p, opts)?;
    let mut r = Report::new("verify", &p, opts);
    for c in &cands {
        let Some(g) = &c.generator else {
            r.verdicts.push(Verdict::quarantined(&c.name));
            continue;
        };
        let report = verify(&p.lagrangian, g, opts.tolerance, &cfg)?;
        if !report.passed {
            r.passed = false;
        }
        r.verdicts.push(Verdict::checked(report));
    }
    r.quarantined = quarantined(&cands);
    Ok(r)
}

pub fn cmd_solve(path: &Path, opts: &Options) -> Result<Report, CliError> {
    let file = problem::read(path)?;
    let mut overrides = file.ansatz_parameters()?;
    overrides.extend(opts.set.iter().cloned());
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("problem");
    let p = file.build(stem, &overrides)?;
    let spec = p.ansatz.clone().ok_or_else(|| CliError::Shape {
        path: "ansatz".into(),
        message: "solve needs an `ansatz` block".into(),
    })?;
    let l = &p.lagrangian;
    let cfg = opts.zero_test();
    let inst = instantiate(l, &spec)?;
    let sys = reduce(l, &inst)?;
    let basis = nullspace(l, &inst, &sys);
    let mut r = Report::new("solve", &p, opts);
    let mut generators = Vec::new();
    for g in &basis.generators {
        let v = verify(l, g, opts.tolerance, &cfg)?;
        let homothetic = if l.h_is_zero() {
            Some(homothetic_factors(l, g)?.iter().all(|f| !matches!(f.kind, HomotheticKind::NotHomothetic { .. })))
        } else {
            None
        };
        if !v.passed || homothetic == Some(false) {
            r.passed = false;
        }
        generators.push(GeneratorEntry {
            name: g.name.clone(),
            display: g.display(l.ctx()),
            boundary: v.boundary.iter().map(ToString::to_string).collect(),
            verified: v.passed,
            homothetic,
        });
    }
    let cands = selected(&p, opts)?;
    let mut membership = Vec::new();
    for c in &cands {
        if let Some(g) = &c.generator {
            let contained = span_contains(l, &inst, &basis, g)?;
            if !contained {
                r.passed = false;
            }
            membership.push(Membership {
                name: c.name.clone(),
                contained,
            });
        }
    }
    r.solution_basis = Some(SolutionEntry {
        unknowns: inst.columns(),
        equations: sys.rows.len(),
        nullspace_dim: basis.nullspace_dim,
        gauge_note: basis.gauge_note.clone(),
        generators,
        membership,
    });
    r.quarantined = quarantined(&cands);
    Ok(r)
}

/// Exact comparison of the leading ε term of `i` with `expected`.
fn leading_matches(p: &Problem, i: &FirstIntegral, expected: &Expr) -> Result<bool, CliError> {
    let expected = expected.substitute(&p.lagrangian.ctx().rational_bindings());
    let eps = Expr::sym(noether_core::context::EPSILON);
    let lead = eps.powi(i.epsilon_power as i64) * &i.parts[i.epsilon_power];
    Ok(clear_denominators(&(lead - expected))?.is_zero())
}

fn integral_entry(p: &Problem, c: &Candidate, opts: &Options) -> Result<Option<(IntegralEntry, Option<FirstIntegral>)>, CliError> {
    let Some(g) = &c.generator else { return Ok(None) };
    let l = &p.lagrangian;
    let cfg = opts.zero_test();
    let integral = match first_integral(l, g, l.order(), opts.tolerance, &cfg) {
        Ok(i) => i,
        Err(Error::InvalidInput(m)) => return Ok(Some((IntegralEntry::failed(&c.name, m), None))),
        Err(e) => return Err(e.into()),
    };
    let (truncation, remainder) = match symbolic_drift(l, &integral) {
        Ok(d) => {
            let status = if d.truncation_vanishes(opts.tolerance, &cfg) { "zero" } else { "nonzero" };
            (status.to_string(), Some(d.remainder.to_string()))
        }
        Err(Error::NumericOnly) => ("numeric-only".to_string(), None),
        Err(e) => return Err(e.into()),
    };
    let matches = c.integral.as_ref().map(|e| leading_matches(p, &integral, e)).transpose()?;
    let entry = IntegralEntry {
        name: c.name.clone(),
        order: Some(integral.order),
        epsilon_power: Some(integral.epsilon_power),
        expression: Some(integral.display()),
        parts: integral.parts.iter().map(ToString::to_string).collect(),
        drift_truncation: truncation,
        remainder,
        expected: c.integral.as_ref().map(ToString::to_string),
        matches,
        error: None,
    };
    Ok(Some((entry, Some(integral))))
}

pub fn cmd_integrals(path: &Path, opts: &Options) -> Result<Report, CliError> {
    let (_, p) = problem::load(path, &opts.set)?;
    let cands = selected(&p, opts)?;
    let mut r = Report::new("integrals", &p, opts);
    for c in &cands {
        if let Some((entry, _)) = integral_entry(&p, c, opts)? {
            if !entry.passed() {
                r.passed = false;
            }
            r.integrals.push(entry);
        }
    }
    r.quarantined = quarantined(&cands);
    Ok(r)
}

pub fn cmd_simulate(path: &Path, opts: &Options) -> Result<Report, CliError> {
    let (_, p) = problem::load(path, &opts.set)?;
    let sim = p.simulation.clone().ok_or_else(|| CliError::Shape {
        path: "simulation".into(),
        message: "simulate needs a `simulation` block".into(),
    })?;
    let l = &p.lagrangian;
    let mut r = Report::new("simulate", &p, opts);
    let names: Vec<&Candidate> = match (&opts.candidate, &sim.integrals) {
        (Some(_), _) => selected(&p, opts)?,
        (None, Some(list)) => list
            .iter()
            .map(|n| {
                p.candidates.iter().find(|c| &c.name == n).ok_or_else(|| CliError::Shape {
                    path: "simulation.integrals".into(),
                    message: format!("no candidate named `{n}`"),
                })
            })
            .collect::<Result<_, _>>()?,
        (None, None) => p.candidates.iter().collect(),
    };
    let mut integrals = Vec::new();
    for c in &names {
        match integral_entry(&p, c, opts)? {
            Some((entry, Some(i))) => {
                r.integrals.push(entry);
                integrals.push(i);
            }
            Some((entry, None)) => {
                r.warnings.push(format!("integral of `{}` skipped: {}", c.name, entry.error.clone().unwrap_or_default()));
                r.integrals.push(entry);
            }
            None => {}
        }
    }
    r.quarantined = quarantined(&names);
    let epsilons = opts.epsilons.clone().unwrap_or_else(|| sim.epsilons.clone());
    let epsilons = if epsilons.is_empty() { vec![0.0] } else { epsilons };
    let t_end = opts.t_end.or(sim.t_end).unwrap_or_else(|| sim.t_start + default_t_span(l));
    let setup = SimulationSetup {
        initial: sim.initial.clone(),
        t_start: sim.t_start,
        t_end,
        dt: opts.dt.unwrap_or(sim.dt),
    };
    let eom = euler_lagrange(l);
    let table = drift_table(&eom, &integrals, &epsilons, &setup)?;
    for row in &table {
        r.drift_records.extend(row.iter().cloned());
    }
    let positive = epsilons.iter().filter(|e| **e > 0.0).count();
    if positive >= 2 {
        for (j, i) in integrals.iter().enumerate() {
            let records = epsilons
                .iter()
                .zip(&table)
                .filter(|(e, _)| **e > 0.0)
                .map(|(_, row)| row[j].clone())
                .collect();
            let s = scaling_from_records(i, records);
            if s.flagged {
                r.passed = false;
            }
            r.scaling.push(s);
        }
    }
    if let Some(csv) = &opts.csv {
        let traj = integrate(&eom, &setup, epsilons[0])?;
        let series = integrals
            .iter()
            .map(|i| Ok((i.name.clone(), integral_series(l.ctx(), i, &traj)?)))
            .collect::<Result<Vec<_>, Error>>()?;
        let file = std::fs::File::create(csv).map_err(|source| CliError::Io {
            path: csv.display().to_string(),
            source,
        })?;
        write_csv(std::io::BufWriter::new(file), &traj, &series).map_err(|source| CliError::Io {
            path: csv.display().to_string(),
            source,
        })?;
    }
    r.simulation = Some(setup);
    r.epsilons = epsilons;
    Ok(r)
}

pub fn cmd_killing(path: &Path, opts: &Options) -> Result<Report, CliError> {
    let (_, p) = problem::load(path, &opts.set)?;
    let l = &p.lagrangian;
    let basis = solve_homothetic(l.g(), opts.degree, l.ctx())?;
    let mut r = Report::new("killing", &p, opts);
    r.homothetic_basis = basis.iter().map(|h| HomotheticEntry::new(h, l.ctx())).collect();
    Ok(r)
}

pub fn run(command: &str, path: &Path, opts: &Options) -> Result<Report, CliError> {
    match command {
        "derive" => cmd_derive(path, opts),
        "verify" => cmd_verify(path, opts),
        "solve" => cmd_solve(path, opts),
        "integrals" => cmd_integrals(path, opts),
        "simulate" => cmd_simulate(path, opts),
        "killing" => cmd_killing(path, opts),
        other => Err(CliError::Shape {
            path: "command".into(),
            message: format!("unknown command `{other}`"),
        }),
    }
}
