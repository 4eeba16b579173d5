//! The machine-readable report shared by every command, and its text rendering.

use std::fmt::Write;

use noether_core::dynamics::{DriftRecord, ScalingReport, SimulationSetup};
use noether_core::noether::{VerificationReport, ZeroStatus};
use noether_core::{Context, DeterminingSystem, HomotheticKind, HomotheticResult};
use serde::Serialize;

use crate::problem::{Problem, QuarantineEntry};
use crate::Options;

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub name: String,
    /// `pass`, `fail` or `quarantined`.
    pub status: String,
    pub report: Option<VerificationReport>,
}

impl Verdict {
    pub fn quarantined(name: &str) -> Verdict {
        Verdict {
            name: name.to_string(),
            status: "quarantined".into(),
            report: None,
        }
    }

    pub fn checked(report: VerificationReport) -> Verdict {
        Verdict {
            name: report.name.clone(),
            status: if report.passed { "pass" } else { "fail" }.into(),
            report: Some(report),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GeneratorEntry {
    pub name: String,
    pub display: String,
    pub boundary: Vec<String>,
    pub verified: bool,
    /// Whether every spatial factor of η is a homothetic field; absent when `h ≠ 0`.
    pub homothetic: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Membership {
    pub name: String,
    pub contained: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionEntry {
    pub unknowns: usize,
    pub equations: usize,
    pub nullspace_dim: usize,
    pub gauge_note: String,
    pub generators: Vec<GeneratorEntry>,
    pub membership: Vec<Membership>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IntegralEntry {
    pub name: String,
    pub order: Option<usize>,
    pub epsilon_power: Option<usize>,
    pub expression: Option<String>,
    pub parts: Vec<String>,
    /// `zero`, `nonzero`, `numeric-only` or `unavailable`.
    pub drift_truncation: String,
    pub remainder: Option<String>,
    pub expected: Option<String>,
    pub matches: Option<bool>,
    pub error: Option<String>,
}

impl IntegralEntry {
    pub fn failed(name: &str, error: String) -> IntegralEntry {
        IntegralEntry {
            name: name.to_string(),
            order: None,
            epsilon_power: None,
            expression: None,
            parts: Vec::new(),
            drift_truncation: "unavailable".into(),
            remainder: None,
            expected: None,
            matches: None,
            error: Some(error),
        }
    }

    pub fn passed(&self) -> bool {
        self.error.is_none() && self.drift_truncation != "nonzero" && self.matches != Some(false)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HomotheticEntry {
    pub field: String,
    pub components: Vec<String>,
    pub conformal_factor: String,
    pub kind: String,
}

impl HomotheticEntry {
    pub fn new(h: &HomotheticResult, ctx: &Context) -> HomotheticEntry {
        let kind = match &h.kind {
            HomotheticKind::Killing => "killing",
            HomotheticKind::Homothetic => "homothetic",
            HomotheticKind::NotHomothetic { .. } => "not-homothetic",
        };
        HomotheticEntry {
            field: h.field.display(ctx),
            components: h.field.components.iter().map(ToString::to_string).collect(),
            conformal_factor: noether_core::rational::display(&h.conformal_factor),
            kind: kind.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub problem: String,
    pub seed: u64,
    pub tolerance: f64,
    pub passed: bool,
    pub equation_count: Option<usize>,
    pub determining_system: Option<DeterminingSystem>,
    pub verdicts: Vec<Verdict>,
    pub solution_basis: Option<SolutionEntry>,
    pub integrals: Vec<IntegralEntry>,
    pub simulation: Option<SimulationSetup>,
    pub epsilons: Vec<f64>,
    pub drift_records: Vec<DriftRecord>,
    pub scaling: Vec<ScalingReport>,
    pub homothetic_basis: Vec<HomotheticEntry>,
    pub warnings: Vec<String>,
    pub quarantined: Vec<QuarantineEntry>,
}

impl Report {
    pub fn new(command: &str, p: &Problem, opts: &Options) -> Report {
        Report {
            command: command.into(),
            problem: p.name.clone(),
            seed: opts.seed,
            tolerance: opts.tolerance,
            passed: true,
            equation_count: None,
            determining_system: None,
            verdicts: Vec::new(),
            solution_basis: None,
            integrals: Vec::new(),
            simulation: None,
            epsilons: Vec::new(),
            drift_records: Vec::new(),
            scaling: Vec::new(),
            homothetic_basis: Vec::new(),
            warnings: p.warnings.clone(),
            quarantined: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// 0 when every requested check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {}: {}", self.command, self.problem, if self.passed { "ok" } else { "FAILED" });
        if let Some(d) = &self.determining_system {
            let _ = writeln!(s, "{} equations", d.equation_count());
            s.push_str(&d.render());
        }
        for v in &self.verdicts {
            let _ = writeln!(s, "  {:<12} {}", v.name, v.status);
            if let Some(r) = &v.report {
                for e in r.failures() {
                    let detail = match &e.status {
                        ZeroStatus::Failed { witness, value } => format!("value {value:e} at {witness:?}"),
                        other => format!("{other:?}"),
                    };
                    let _ = writeln!(s, "    order {} {} {:?}: {} ({detail})", e.order, e.kind, e.index, e.residual);
                }
                if r.boundary_recovered {
                    let f: Vec<String> = r.boundary.iter().map(ToString::to_string).collect();
                    let _ = writeln!(s, "    f = [{}]", f.join(", "));
                }
                for n in &r.notes {
                    let _ = writeln!(s, "    note: {n}");
                }
            }
        }
        if let Some(b) = &self.solution_basis {
            let _ = writeln!(s, "  {} unknowns, {} equations, nullspace {}", b.unknowns, b.equations, b.nullspace_dim);
            for g in &b.generators {
                let _ = writeln!(s, "  {} = {}  f = [{}]", g.name, g.display, g.boundary.join(", "));
            }
            for m in &b.membership {
                let _ = writeln!(s, "  {:<12} {}", m.name, if m.contained { "in span" } else { "NOT in span" });
            }
        }
        for i in &self.integrals {
            match (&i.expression, &i.error) {
                (Some(e), _) => {
                    let _ = writeln!(s, "  I[{}] = {}  (drift truncation {})", i.name, e, i.drift_truncation);
                    if let (Some(exp), Some(m)) = (&i.expected, i.matches) {
                        let _ = writeln!(s, "    expected leading term {exp}: {}", if m { "match" } else { "MISMATCH" });
                    }
                }
                (None, Some(err)) => {
                    let _ = writeln!(s, "  I[{}] unavailable: {err}", i.name);
                }
                _ => {}
            }
        }
        for d in &self.drift_records {
            let _ = writeln!(s, "  eps = {:<10} {:<12} max drift {:.6e}  final {:.6e}", d.epsilon, d.integral, d.max_abs_drift, d.final_drift);
        }
        for sc in &self.scaling {
            let slope = sc.slope.map_or("indeterminate".to_string(), |v| format!("{v:.4}"));
            let _ = writeln!(s, "  scaling {:<12} slope {slope} (expected {}){}", sc.integral, sc.expected, if sc.flagged { " FLAGGED" } else { "" });
            for n in &sc.notes {
                let _ = writeln!(s, "    note: {n}");
            }
        }
        for h in &self.homothetic_basis {
            let _ = writeln!(s, "  {:<14} psi = {:<4} {}", h.kind, h.conformal_factor, h.field);
        }
        for q in &self.quarantined {
            let _ = writeln!(s, "  quarantined {}: {}", q.name, q.note.clone().unwrap_or_default());
        }
        for w in &self.warnings {
            let _ = writeln!(s, "  warning: {w}");
        }
        s
    }
}
