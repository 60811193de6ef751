//! Searches over the analytic outage probability.

use noma_outage::analysis::op_closed_form;
use noma_outage::error::{Error, Result};
use noma_outage::link::SystemConfig;

/// Half-width of the final bisection bracket in dB.
const SNR_TOL_DB: f64 = 0.005;

/// Width below which the golden-section refinement of `w` stops.
const W_TOL: f64 = 1e-6;

/// SNR in dB at which the analytic OP of rank `k` falls to `target`,
/// by bisection inside `bracket = (low, high)`.
pub fn find_snr_for_op(k: usize, config: &SystemConfig, target: f64, bracket: (f64, f64)) -> Result<f64> {
    let (mut lo, mut hi) = bracket;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Bracket(format!("bracket ({lo}, {hi}) is not an interval")));
    }
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::Domain(format!("target OP {target} outside (0, 1)")));
    }
    let op = |snr: f64| op_closed_form(k, &SystemConfig { snr_db: snr, ..config.clone() });
    let f_lo = op(lo)?;
    if f_lo == target {
        return Ok(lo);
    }
    let f_hi = op(hi)?;
    if !(f_lo > target && f_hi <= target) {
        return Err(Error::Bracket(format!(
            "OP at {lo} dB = {f_lo:e} and at {hi} dB = {f_hi:e} do not straddle {target:e}"
        )));
    }
    while hi - lo > 2.0 * SNR_TOL_DB {
        let mid = 0.5 * (lo + hi);
        if op(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Power-splitting ratio minimizing the analytic OP of rank `k`: grid
/// argmin, then golden-section search between the neighbouring grid points.
pub fn find_optimal_w(k: usize, config: &SystemConfig, grid: &[f64]) -> Result<(f64, f64)> {
    if grid.is_empty() {
        return Err(Error::Grid("empty w grid".into()));
    }
    if let Some(w) = grid.iter().find(|w| !(**w > 0.0 && **w < 1.0)) {
        return Err(Error::Grid(format!("w = {w} outside (0, 1)")));
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let op = |w: f64| match op_closed_form(k, &SystemConfig { w, ..config.clone() }) {
        Ok(v) => Ok(Some(v)),
        Err(Error::Infeasible { .. }) => Ok(None),
        Err(e) => Err(e),
    };
    let mut best: Option<(usize, f64)> = None;
    for (i, &w) in sorted.iter().enumerate() {
        if let Some(v) = op(w)? {
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((i, v));
            }
        }
    }
    let (i, grid_op) = best.ok_or_else(|| Error::Grid("every grid point is infeasible".into()))?;
    let a = sorted[i.saturating_sub(1)];
    let b = sorted[(i + 1).min(sorted.len() - 1)];
    if a == b {
        return Ok((sorted[i], grid_op));
    }
    let f = |w: f64| Ok::<f64, Error>(op(w)?.unwrap_or(f64::INFINITY));
    let (w, v) = golden_section(f, a, b)?;
    Ok(if v <= grid_op { (w, v) } else { (sorted[i], grid_op) })
}

fn golden_section(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > W_TOL {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    let w = 0.5 * (a + b);
    Ok((w, f(w)?))
}
