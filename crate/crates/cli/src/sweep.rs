//! Parameter sweeps and their CSV output.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use noma_outage::analysis::{op_closed_form, op_numerical};
use noma_outage::error::{Error, Result};
use noma_outage::link::SystemConfig;
use noma_outage::montecarlo::estimate_op;

use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    SnrDb,
    W,
    DSr,
    Xi,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::SnrDb => "snr_db",
            SweepVariable::W => "w",
            SweepVariable::DSr => "d_sr",
            SweepVariable::Xi => "xi",
        }
    }

    pub fn in_domain(self, value: f64) -> bool {
        match self {
            SweepVariable::SnrDb => value.is_finite(),
            SweepVariable::W | SweepVariable::DSr => value > 0.0 && value < 1.0,
            SweepVariable::Xi => (0.0..=1.0).contains(&value),
        }
    }

    pub fn apply(self, config: &SystemConfig, value: f64) -> SystemConfig {
        let mut c = config.clone();
        match self {
            SweepVariable::SnrDb => c.snr_db = value,
            SweepVariable::W => c.w = value,
            SweepVariable::DSr => c.d_sr = value,
            SweepVariable::Xi => c.xi = value,
        }
        c
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Analytic,
    Quadrature,
    Montecarlo,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Analytic => "analytic",
            Method::Quadrature => "quadrature",
            Method::Montecarlo => "montecarlo",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Grid {
    pub fn linear(start: f64, stop: f64, points: usize) -> Self {
        Self { start, stop, points, spacing: Spacing::Linear }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        if self.points == 0 {
            return Err(Error::Grid("grid needs at least one point".into()));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::Grid("grid bounds must be finite".into()));
        }
        if self.points == 1 {
            return Ok(vec![self.start]);
        }
        let steps = (self.points - 1) as f64;
        match self.spacing {
            Spacing::Linear => Ok((0..self.points)
                .map(|i| {
                    if i + 1 == self.points {
                        self.stop
                    } else {
                        self.start + (self.stop - self.start) * i as f64 / steps
                    }
                })
                .collect()),
            Spacing::Log => {
                if !(self.start > 0.0 && self.stop > 0.0) {
                    return Err(Error::Grid("log grid needs positive bounds".into()));
                }
                let ratio = (self.stop / self.start).ln();
                Ok((0..self.points)
                    .map(|i| {
                        if i + 1 == self.points {
                            self.stop
                        } else {
                            self.start * (ratio * i as f64 / steps).exp()
                        }
                    })
                    .collect())
            }
        }
    }
}

/// The `[sweep]` table of a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
    pub methods: Vec<Method>,
    #[serde(default)]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub scenario: String,
    pub variable: SweepVariable,
    pub grid: Grid,
    pub methods: Vec<Method>,
    /// Monte Carlo trials per grid point.
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
    /// `(label, base config)` per curve.
    pub series: Vec<(String, SystemConfig)>,
}

impl SweepSpec {
    pub fn from_scenario(scenario: &Scenario) -> Result<Self> {
        let s = scenario
            .file
            .sweep
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig(format!("scenario `{}` has no [sweep] table", scenario.file.id)))?;
        Ok(Self {
            scenario: scenario.file.id.clone(),
            variable: s.variable,
            grid: Grid { start: s.start, stop: s.stop, points: s.points, spacing: s.spacing },
            methods: s.methods.clone(),
            trials: s.trials,
            seed: s.seed,
            workers: 1,
            series: scenario.series()?,
        })
    }

    fn validate(&self) -> Result<Vec<f64>> {
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("sweep requests no methods".into()));
        }
        if self.methods.contains(&Method::Montecarlo) && self.trials == 0 {
            return Err(Error::InvalidConfig("montecarlo sweep needs trials >= 1".into()));
        }
        let values = self.grid.values()?;
        if let Some(v) = values.iter().find(|v| !self.variable.in_domain(**v)) {
            return Err(Error::Grid(format!("{} = {v} is outside its domain", self.variable)));
        }
        for (_, config) in &self.series {
            config.validate()?;
            config.check_feasible_all()?;
        }
        Ok(values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RowOutcome {
    Value { op: f64, ci_halfwidth: Option<f64>, trials: Option<u64> },
    /// Detection stage `stage` cannot succeed at this grid point.
    Infeasible { stage: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scenario: String,
    pub variable: SweepVariable,
    pub value: f64,
    pub user: usize,
    pub method: Method,
    pub outcome: RowOutcome,
}

/// One row per (series, grid value, user, method), in that nesting order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    let values = spec.validate()?;
    let points: Vec<(&str, &SystemConfig, f64)> = spec
        .series
        .iter()
        .flat_map(|(label, c)| values.iter().map(move |v| (label.as_str(), c, *v)))
        .collect();
    let blocks: Vec<Result<Vec<SweepRow>>> = points
        .par_iter()
        .map(|&(label, base, value)| point_rows(spec, label, &spec.variable.apply(base, value), value))
        .collect();
    let mut rows = Vec::new();
    for block in blocks {
        rows.extend(block?);
    }
    Ok(rows)
}

fn point_rows(spec: &SweepSpec, label: &str, config: &SystemConfig, value: f64) -> Result<Vec<SweepRow>> {
    let users = config.users();
    let mc = if spec.methods.contains(&Method::Montecarlo) {
        Some(match estimate_op(config, spec.trials, spec.seed, spec.workers) {
            Ok(est) => Ok(est),
            Err(Error::Infeasible { stage, .. }) => Err(stage),
            Err(e) => return Err(e),
        })
    } else {
        None
    };
    let mut rows = Vec::with_capacity(users * spec.methods.len());
    for user in 1..=users {
        for &method in &spec.methods {
            let outcome = match method {
                Method::Analytic => analytic_outcome(op_closed_form(user, config))?,
                Method::Quadrature => analytic_outcome(op_numerical(user, config))?,
                Method::Montecarlo => match mc.as_ref().expect("estimated above") {
                    Ok(est) => RowOutcome::Value {
                        op: est.op_hat[user - 1],
                        ci_halfwidth: Some(est.ci_halfwidth[user - 1]),
                        trials: Some(est.trials),
                    },
                    Err(stage) => RowOutcome::Infeasible { stage: *stage },
                },
            };
            rows.push(SweepRow {
                scenario: label.to_string(),
                variable: spec.variable,
                value,
                user,
                method,
                outcome,
            });
        }
    }
    Ok(rows)
}

fn analytic_outcome(r: Result<f64>) -> Result<RowOutcome> {
    match r {
        Ok(op) => Ok(RowOutcome::Value { op, ci_halfwidth: None, trials: None }),
        Err(Error::Infeasible { stage, .. }) => Ok(RowOutcome::Infeasible { stage }),
        Err(e) => Err(e),
    }
}

pub const CSV_HEADER: [&str; 8] = ["scenario", "variable", "value", "user", "method", "op", "ci_halfwidth", "trials"];

/// Probabilities in scientific notation with nine significant digits.
pub fn format_probability(p: f64) -> String {
    format!("{p:.8e}")
}

/// Writes the rows as CSV. Infeasible rows carry `infeasible:stage=<l>` in
/// the `op` column.
pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        let (op, ci, trials) = match r.outcome {
            RowOutcome::Value { op, ci_halfwidth, trials } => (
                format_probability(op),
                ci_halfwidth.map(format_probability).unwrap_or_default(),
                trials.map(|t| t.to_string()).unwrap_or_default(),
            ),
            RowOutcome::Infeasible { stage } => (format!("infeasible:stage={stage}"), String::new(), String::new()),
        };
        w.write_record([
            r.scenario.as_str(),
            r.variable.name(),
            &r.value.to_string(),
            &r.user.to_string(),
            &r.method.to_string(),
            &op,
            &ci,
            &trials,
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
