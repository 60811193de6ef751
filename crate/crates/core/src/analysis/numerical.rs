//! Outage probability by direct quadrature of the conditional form
//! `F_SR(tau) + int_0^inf F_k(beta / y) f_SR(y + tau) dy`, valid for any
//! fading parameters.

use crate::analysis::check_eta_scope;
use crate::analysis::quadrature::{integrate, Tolerance};
use crate::error::{Error, Result};
use crate::fading::{
    squared_gain_cdf_unchecked, squared_gain_pdf_unchecked, squared_gain_sf_unchecked, EtaTable,
    NakagamiParams,
};
use crate::link::{tau_star, SystemConfig};

/// First-hop tail mass neglected beyond the upper integration limit.
const TAIL_MASS: f64 = 1e-30;

/// Panel error target. Tighter than a plain absolute `1e-12` so that
/// outage probabilities near `1e-12` still come out to ~1e-9 relative.
const TOLERANCE: Tolerance = Tolerance { abs: 1e-22, rel: 1e-11, max_intervals: 50_000 };

pub fn op_numerical(k: usize, config: &SystemConfig) -> Result<f64> {
    op_numerical_with(k, config, &EtaTable::default())
}

pub fn op_numerical_with(k: usize, config: &SystemConfig, eta: &EtaTable) -> Result<f64> {
    check_eta_scope(k, config)?;
    let tau = tau_star(k, config)?;
    if tau == 0.0 {
        return Ok(0.0);
    }
    let first = config.first_hop()?;
    let second = config.second_hop()?;
    let n = config.n_s * config.n_rr;
    let n_u = config.n_u as i32;
    let beta = tau * config.c2() / config.c1();

    let f_sr_tau = squared_gain_cdf_unchecked(first, tau).powi(n as i32);
    let pdf_sr = |x: f64| {
        n as f64 * squared_gain_pdf_unchecked(first, x) * squared_gain_cdf_unchecked(first, x).powi(n as i32 - 1)
    };
    let user_cdf = |g: f64| {
        let single = squared_gain_cdf_unchecked(second, g).powi(n_u);
        eta.eval(k, single).expect("rank checked above")
    };
    let integrand = |y: f64| {
        // F_k(beta / y) -> F_k(inf) = 1 as y -> 0
        let arg = beta / y;
        let fk = if y <= 0.0 || !arg.is_finite() { 1.0 } else { user_cdf(arg) };
        fk * pdf_sr(y + tau)
    };

    let upper = upper_limit(first, n, tau);
    // geometric break points resolve features at any scale near y = 0
    let mut breaks: Vec<f64> = (0..64).rev().map(|j| upper * 0.5f64.powi(j)).collect();
    breaks.insert(0, 0.0);
    let tail = integrate(integrand, &breaks, TOLERANCE)?;
    let op = f_sr_tau + tail.value;
    if !op.is_finite() {
        return Err(Error::Domain("quadrature produced a non-finite outage probability".into()));
    }
    Ok(op.clamp(0.0, 1.0))
}

/// Smallest `Y` (by doubling) with `P(max of n gains > tau + Y) < TAIL_MASS`.
fn upper_limit(first: NakagamiParams, n: u32, tau: f64) -> f64 {
    let mut y = first.omega() / first.m().max(1.0);
    while n as f64 * squared_gain_sf_unchecked(first, tau + y) >= TAIL_MASS {
        y *= 2.0;
    }
    y
}
