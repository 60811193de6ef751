//! Closed-form outage probability for integer fading parameters.
//!
//! With `beta = tau c2 / c1` the outage probability of the rank-`k` user is
//!
//! ```text
//! OP = F_SR(tau) + int_tau^inf F_k(beta / (x - tau)) f_SR(x) dx
//! ```
//!
//! Expanding `F_k` through the eta table and the multinomial coefficients,
//! and `f_SR` through the first-hop order statistic, every summand reduces to
//!
//! ```text
//! int_0^inf y^(nu - 1) exp(-b1 / y - b2 y) dy = 2 (b1 / b2)^(nu / 2) K_nu(2 sqrt(b1 b2))
//! ```
//!
//! with `b1 = p m_RU beta / Omega_RU`, `b2 = (1 + u) m_SR / Omega_SR` (both
//! positive) and `nu = z - s + 1`. The `p = 0` part integrates to
//! `sum_q eta(k, q) (1 - F_SR(tau))`. The remaining sum is close to
//! `-(1 - OP)` and its terms reach the thousands, so it is accumulated in
//! double-double.

use crate::analysis::bessel::bessel_k_scaled_upto;
use crate::analysis::check_eta_scope;
use crate::dd::{DoubleDouble, Real};
use crate::error::Result;
use crate::fading::{binomial_exact, cdf_power_expanded, theta_tables, EtaTable, ThetaTable};
use crate::link::{tau_star, SystemConfig};

type Dd = DoubleDouble;

/// One summand position of the six-fold sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TermIndex {
    pub q: u32,
    pub p: u32,
    pub s: u32,
    pub u: u32,
    pub v: u32,
    pub z: u32,
}

/// Constants and coefficient tables of the closed-form sum for one user.
#[derive(Debug, Clone)]
pub struct OpTermContext {
    pub k: usize,
    pub tau: f64,
    pub c1: f64,
    pub c2: f64,
    /// `tau c2 / c1`.
    pub beta: f64,
    pub m_sr: u32,
    pub m_ru: u32,
    pub rate_sr: f64,
    pub rate_ru: f64,
    /// `N_S N_Rr`.
    pub n_first: u32,
    pub n_rt: u32,
    pub n_u: u32,
    pub eta: EtaTable,
    theta_sr: Vec<ThetaTable<Dd>>,
    theta_ru: Vec<ThetaTable<Dd>>,
}

impl OpTermContext {
    pub fn new(k: usize, config: &SystemConfig, eta: &EtaTable) -> Result<Self> {
        check_eta_scope(k, config)?;
        let tau = tau_star(k, config)?;
        let first = config.first_hop()?;
        let second = config.second_hop()?;
        let (m_sr, m_ru) = (first.integer_m()?, second.integer_m()?);
        let n_first = config.n_s * config.n_rr;
        let max_p = 3 * config.n_rt * config.n_u;
        Ok(Self {
            k,
            tau,
            c1: config.c1(),
            c2: config.c2(),
            beta: tau * config.c2() / config.c1(),
            m_sr,
            m_ru,
            rate_sr: first.rate(),
            rate_ru: second.rate(),
            n_first,
            n_rt: config.n_rt,
            n_u: config.n_u,
            eta: *eta,
            theta_sr: theta_tables(n_first, m_sr, Dd::from(first.rate())),
            theta_ru: theta_tables(max_p, m_ru, Dd::from(second.rate())),
        })
    }

    pub fn q_max(&self) -> u32 {
        3 * self.n_rt
    }

    pub fn p_max(&self, q: u32) -> u32 {
        q * self.n_u
    }

    pub fn s_max(&self, p: u32) -> u32 {
        p * (self.m_ru - 1)
    }

    pub fn u_max(&self) -> u32 {
        self.n_first - 1
    }

    pub fn v_max(&self, u: u32) -> u32 {
        u * (self.m_sr - 1)
    }

    pub fn z_max(&self, v: u32) -> u32 {
        self.m_sr - 1 + v
    }

    pub fn b1(&self, p: u32) -> f64 {
        p as f64 * self.rate_ru * self.beta
    }

    pub fn b2(&self, u: u32) -> f64 {
        (1 + u) as f64 * self.rate_sr
    }

    /// Every index of the six-fold sum, in lexicographic order.
    pub fn indices(&self) -> Vec<TermIndex> {
        let mut out = Vec::new();
        for q in 1..=self.q_max() {
            for p in 1..=self.p_max(q) {
                for s in 0..=self.s_max(p) {
                    for u in 0..=self.u_max() {
                        for v in 0..=self.v_max(u) {
                            for z in 0..=self.z_max(v) {
                                out.push(TermIndex { q, p, s, u, v, z });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// `2 N r_SR^m_SR / Gamma(m_SR)`.
    fn prefactor(&self) -> Dd {
        let mut fact = Dd::ONE;
        for i in 2..self.m_sr {
            fact *= Dd::from(i as f64);
        }
        Dd::from(2.0 * self.n_first as f64) * Dd::from(self.rate_sr).powi(self.m_sr as i32) / fact
    }

    /// `e^{-b2 tau} (b1/b2)^{nu/2} K_nu(2 sqrt(b1 b2))` for every `nu` in
    /// `nu_min..=nu_max`, indexed from `nu_min`.
    fn bessel_factors(&self, p: u32, u: u32, nu_min: i64, nu_max: i64) -> Vec<Dd> {
        let b1 = Dd::from(p as f64) * Dd::from(self.rate_ru) * Dd::from(self.beta);
        let b2 = Dd::from((1 + u) as f64) * Dd::from(self.rate_sr);
        let x = (b1 * b2).sqrt() * Dd::from(2.0);
        let order_max = nu_min.abs().max(nu_max.abs()) as u32;
        let scaled = bessel_k_scaled_upto(order_max, x);
        let damp = (-(b2 * Dd::from(self.tau)) - x).exp();
        let root = (b1 / b2).sqrt();
        (nu_min..=nu_max)
            .map(|nu| damp * root.powi(nu as i32) * scaled[nu.unsigned_abs() as usize])
            .collect()
    }

    /// A single summand of the six-fold sum, for diagnostics.
    pub fn term(&self, idx: TermIndex) -> f64 {
        let TermIndex { q, p, s, u, v, z } = idx;
        let nu = z as i64 - s as i64 + 1;
        let bessel = self.bessel_factors(p, u, nu, nu)[0];
        let sign = if (p + u) % 2 == 0 { 1.0 } else { -1.0 };
        let binomials = binomial_exact(q * self.n_u, p)
            * binomial_exact(self.n_first - 1, u)
            * binomial_exact(self.m_sr - 1 + v, z);
        let value = Dd::from(sign * binomials)
            * Dd::from(self.eta.get(self.k, q as usize))
            * self.theta_ru[p as usize].coeff(s as usize)
            * self.theta_sr[u as usize].coeff(v as usize)
            * self.prefactor()
            * Dd::from(self.beta).powi(s as i32)
            * Dd::from(self.tau).powi((self.m_sr - 1 + v - z) as i32)
            * bessel;
        value.to_f64()
    }

    /// The six-fold sum with the `q` loop folded into per-`p` weights
    /// `sum_q eta(k, q) C(q N_U, p)`.
    pub(crate) fn bessel_sum(&self) -> Dd {
        let mut weights = vec![Dd::ZERO; (self.p_max(self.q_max()) + 1) as usize];
        for q in 1..=self.q_max() {
            let e = self.eta.get(self.k, q as usize);
            if e == 0.0 {
                continue;
            }
            for p in 1..=self.p_max(q) {
                weights[p as usize] += Dd::from(e) * Dd::from(binomial_exact(q * self.n_u, p));
            }
        }
        let beta = Dd::from(self.beta);
        let tau = Dd::from(self.tau);
        let mut total = Dd::ZERO;
        for (p, w) in weights.iter().enumerate().skip(1) {
            let p = p as u32;
            if w.hi() == 0.0 {
                continue;
            }
            let mut over_u = Dd::ZERO;
            for u in 0..=self.u_max() {
                let nu_min = 1 - self.s_max(p) as i64;
                let nu_max = self.z_max(self.v_max(u)) as i64 + 1;
                let bessel = self.bessel_factors(p, u, nu_min, nu_max);
                let mut over_s = Dd::ZERO;
                let mut beta_s = Dd::ONE;
                for s in 0..=self.s_max(p) {
                    let mut over_v = Dd::ZERO;
                    for v in 0..=self.v_max(u) {
                        let mut over_z = Dd::ZERO;
                        for z in 0..=self.z_max(v) {
                            let nu = z as i64 - s as i64 + 1;
                            over_z += Dd::from(binomial_exact(self.m_sr - 1 + v, z))
                                * tau.powi((self.m_sr - 1 + v - z) as i32)
                                * bessel[(nu - nu_min) as usize];
                        }
                        over_v += self.theta_sr[u as usize].coeff(v as usize) * over_z;
                    }
                    over_s += self.theta_ru[p as usize].coeff(s as usize) * beta_s * over_v;
                    beta_s *= beta;
                }
                let sign = if u % 2 == 0 { 1.0 } else { -1.0 };
                over_u += Dd::from(sign * binomial_exact(self.n_first - 1, u)) * over_s;
            }
            let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
            total += Dd::from(sign) * *w * over_u;
        }
        total * self.prefactor()
    }

    /// `F_SR(tau)` from the expanded best-of-N form.
    pub(crate) fn first_hop_cdf(&self) -> Dd {
        let rate = Dd::from(self.rate_sr);
        cdf_power_expanded(self.m_sr, rate, self.n_first, Dd::from(self.tau), &self.theta_sr)
    }
}

/// Closed-form outage probability with its pre-clamp value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormOp {
    /// `unclamped` clipped to `[0, 1]`.
    pub value: f64,
    pub unclamped: f64,
    pub tau: f64,
}

/// Outage probability of the rank-`k` user from the closed form, using the
/// majority-selection eta table.
pub fn op_closed_form(k: usize, config: &SystemConfig) -> Result<f64> {
    Ok(op_closed_form_detailed(k, config, &EtaTable::default())?.value)
}

pub fn op_closed_form_detailed(k: usize, config: &SystemConfig, eta: &EtaTable) -> Result<ClosedFormOp> {
    let ctx = OpTermContext::new(k, config, eta)?;
    if ctx.tau == 0.0 {
        return Ok(ClosedFormOp { value: 0.0, unclamped: 0.0, tau: 0.0 });
    }
    let f_tau = ctx.first_hop_cdf();
    let eta_sum = eta.row(k)?.iter().fold(Dd::ZERO, |acc, e| acc + Dd::from(*e));
    let unclamped = (f_tau + eta_sum * (Dd::ONE - f_tau) + ctx.bessel_sum()).to_f64();
    Ok(ClosedFormOp { value: unclamped.clamp(0.0, 1.0), unclamped, tau: ctx.tau })
}
