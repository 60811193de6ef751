//! Helpers shared by the acceptance suite.

use std::fmt;

/// One sub-check of an acceptance criterion.
#[derive(Debug, Clone)]
pub struct Check {
    pub label: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(label: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self { label: label.into(), pass, detail: detail.into() }
    }
}

/// Outcome of one criterion: a summary plus its sub-checks.
#[derive(Debug, Clone)]
pub struct Report {
    pub id: u32,
    pub title: String,
    pub summary: String,
    pub checks: Vec<Check>,
    /// Extra lines printed under the criterion, not counted.
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(id: u32, title: impl Into<String>) -> Self {
        Self { id, title: title.into(), summary: String::new(), checks: Vec::new(), notes: Vec::new() }
    }

    pub fn check(&mut self, label: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(label, pass, detail));
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }
}

impl fmt::Display for Report {
    /// The first line is the verdict; failing sub-checks and notes follow,
    /// indented.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass() { "PASS" } else { "FAIL" };
        write!(
            f,
            "criterion {} {verdict}: {} ({}/{} checks) {}",
            self.id,
            self.title,
            self.checks.len() - self.failed(),
            self.checks.len(),
            self.summary
        )?;
        for c in self.checks.iter().filter(|c| !c.pass) {
            write!(f, "\n    fail {}: {}", c.label, c.detail)?;
        }
        for n in &self.notes {
            write!(f, "\n    note {n}")?;
        }
        Ok(())
    }
}

/// Two-sided Kolmogorov-Smirnov distance between a sample and a CDF.
pub fn ks_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}
