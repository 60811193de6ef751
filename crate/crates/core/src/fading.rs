//! Nakagami-m squared-gain statistics and the order statistics produced by
//! antenna selection.
//!
//! The squared envelope of a Nakagami-m channel is Gamma distributed with
//! shape `m` and mean `omega`. For integer `m` its CDF is a finite sum,
//! `1 - exp(-m x / omega) * sum_{v<m} (m x / omega)^v / v!`, and powers of
//! that sum expand into the multinomial coefficients held by
//! [`ThetaTable`]. Every expanded form below is evaluated in double-double
//! arithmetic because the alternating sums cancel heavily for small `x`.

use std::ops::{Add, Div, Mul, Sub};

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::dd::{DoubleDouble, Real};
use crate::error::{Error, Result};

/// Fading severity and mean-square gain of one hop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NakagamiParams {
    m: f64,
    omega: f64,
}

impl NakagamiParams {
    pub fn new(m: f64, omega: f64) -> Result<Self> {
        if !(m >= 0.5) || !m.is_finite() {
            return Err(Error::Domain(format!("Nakagami m must be >= 0.5, got {m}")));
        }
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::Domain(format!("Nakagami omega must be > 0, got {omega}")));
        }
        Ok(Self { m, omega })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// `m / omega`, the rate of the exponential kernel.
    pub fn rate(&self) -> f64 {
        self.m / self.omega
    }

    /// The fading severity as an integer, required by every analytic
    /// expansion.
    pub fn integer_m(&self) -> Result<u32> {
        if self.m.fract() == 0.0 && self.m <= 64.0 {
            Ok(self.m as u32)
        } else {
            Err(Error::Unsupported(format!(
                "analytic path requires integer m (1..=64), got {}",
                self.m
            )))
        }
    }
}

fn check_nonnegative(x: f64) -> Result<()> {
    if x >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("argument must be >= 0, got {x}")))
    }
}

/// Draws squared Nakagami-m gains, i.e. `Gamma(m, omega / m)` variates.
#[derive(Debug, Clone, Copy)]
pub struct GainSampler {
    dist: Gamma<f64>,
}

impl GainSampler {
    pub fn new(params: NakagamiParams) -> Self {
        let dist = Gamma::new(params.m, params.omega / params.m)
            .expect("validated Nakagami parameters give a valid Gamma law");
        Self { dist }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.dist.sample(rng)
    }
}

pub fn sample_squared_gain<R: Rng + ?Sized>(params: NakagamiParams, rng: &mut R) -> f64 {
    GainSampler::new(params).sample(rng)
}

/// Regularized lower incomplete gamma `P(m, y)` for integer `m`.
///
/// Uses the tail series `exp(-y) sum_{n>=m} y^n / n!` when `y` is small
/// enough for `1 - ...` to cancel, and the finite complement otherwise.
pub(crate) fn lower_gamma_regularized_int<T: Real>(m: u32, y: T) -> T {
    let yf = y.to_f64();
    if yf <= 0.0 {
        return T::zero();
    }
    if yf < m as f64 + 1.0 {
        // y^m / m! * sum_j y^j m! / (m + j)!
        let mut lead = T::one();
        for n in 1..=m {
            lead = lead * y / T::from_usize(n as usize);
        }
        let mut term = T::one();
        let mut sum = T::one();
        let mut j = 1usize;
        loop {
            term = term * y / T::from_usize(m as usize + j);
            sum += term;
            if term.to_f64().abs() <= T::EPSILON * 0.25 * sum.to_f64().abs() || j > 2000 {
                break;
            }
            j += 1;
        }
        lead * sum * (-y).exp()
    } else {
        let mut term = T::one();
        let mut sum = T::one();
        for v in 1..m {
            term = term * y / T::from_usize(v as usize);
            sum += term;
        }
        T::one() - (-y).exp() * sum
    }
}

/// CDF of the squared gain, `P(m, m x / omega)`.
pub fn cdf_squared_gain(params: NakagamiParams, x: f64) -> Result<f64> {
    check_nonnegative(x)?;
    Ok(squared_gain_cdf_unchecked(params, x))
}

pub(crate) fn squared_gain_cdf_unchecked(params: NakagamiParams, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let y = params.rate() * x;
    match params.integer_m() {
        Ok(m) => lower_gamma_regularized_int(m, y),
        Err(_) => statrs::function::gamma::gamma_lr(params.m, y),
    }
}

/// Survival function `1 - F(x)`, accurate deep into the upper tail.
pub(crate) fn squared_gain_sf_unchecked(params: NakagamiParams, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let y = params.rate() * x;
    match params.integer_m() {
        Ok(m) => {
            let mut term = 1.0;
            let mut sum = 1.0;
            for v in 1..m {
                term *= y / v as f64;
                sum += term;
            }
            (-y).exp() * sum
        }
        Err(_) => statrs::function::gamma::gamma_ur(params.m, y),
    }
}

/// PDF of the squared gain.
pub fn pdf_squared_gain(params: NakagamiParams, x: f64) -> Result<f64> {
    check_nonnegative(x)?;
    Ok(squared_gain_pdf_unchecked(params, x))
}

pub(crate) fn squared_gain_pdf_unchecked(params: NakagamiParams, x: f64) -> f64 {
    let m = params.m;
    let rate = params.rate();
    if x == 0.0 {
        return match m.partial_cmp(&1.0) {
            Some(std::cmp::Ordering::Less) => f64::INFINITY,
            Some(std::cmp::Ordering::Equal) => rate,
            _ => 0.0,
        };
    }
    let log_pdf = m * rate.ln() + (m - 1.0) * x.ln() - rate * x - statrs::function::gamma::ln_gamma(m);
    log_pdf.exp()
}

/// Minimal field operations for the multinomial recurrence, so it can run
/// in floating point and, in tests, in exact rational arithmetic.
pub trait ThetaScalar:
    Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self>
{
    fn from_int(n: i64) -> Self;
}

impl ThetaScalar for f64 {
    fn from_int(n: i64) -> Self {
        n as f64
    }
}

impl ThetaScalar for DoubleDouble {
    fn from_int(n: i64) -> Self {
        DoubleDouble::from(n as f64)
    }
}

/// Coefficients `theta_x(y, m)` of
/// `(sum_{n=0}^{m-1} (r t)^n / n!)^y = sum_x theta_x t^x`, with `r = m / omega`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaTable<T = f64> {
    exponent: u32,
    m: u32,
    ratio: T,
    coeffs: Vec<T>,
}

impl<T: ThetaScalar> ThetaTable<T> {
    /// Power-series recurrence for a power of a polynomial:
    /// `c_x = 1/(x d_0) sum_{o=1}^{min(x, m-1)} (o (y + 1) - x) d_o c_{x-o}`,
    /// with `d_o = r^o / o!` and `c_0 = d_0^y = 1`.
    pub fn with_ratio(exponent: u32, m: u32, ratio: T) -> Self {
        let m = m.max(1);
        let degree = exponent as usize * (m as usize - 1);
        let mut d = Vec::with_capacity(m as usize);
        let mut dk = T::from_int(1);
        d.push(dk.clone());
        for o in 1..m as i64 {
            dk = dk * ratio.clone() / T::from_int(o);
            d.push(dk.clone());
        }
        let mut coeffs = Vec::with_capacity(degree + 1);
        coeffs.push(T::from_int(1));
        let y = exponent as i64;
        for x in 1..=degree {
            let mut acc = T::from_int(0);
            for o in 1..=x.min(m as usize - 1) {
                let weight = T::from_int(o as i64 * (y + 1) - x as i64);
                acc = acc + weight * d[o].clone() * coeffs[x - o].clone();
            }
            coeffs.push(acc / T::from_int(x as i64));
        }
        Self { exponent, m, ratio, coeffs }
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn ratio(&self) -> &T {
        &self.ratio
    }

    /// Highest power index with a (generally) nonzero coefficient.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, x: usize) -> T {
        self.coeffs.get(x).cloned().unwrap_or_else(|| T::from_int(0))
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }
}

pub fn build_theta_table(exponent: u32, params: NakagamiParams) -> Result<ThetaTable<f64>> {
    let m = params.integer_m()?;
    Ok(ThetaTable::with_ratio(exponent, m, params.rate()))
}

/// `sum_x theta_x t^x exp(-p r t)` summed with a sign and weight, the common
/// kernel of every expanded CDF.
fn theta_series<T: Real + ThetaScalar>(table: &ThetaTable<T>, t: T) -> T {
    let mut acc = T::zero();
    let mut tp = T::one();
    for c in table.coeffs() {
        acc += *c * tp;
        tp *= t;
    }
    acc
}

fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

pub(crate) fn binomial_exact(n: u32, k: u32) -> f64 {
    binomial(n, k)
}

/// `F(x)^n` expanded as `sum_{u=0}^{n} C(n,u) (-1)^u sum_v theta_v(u) x^v e^{-u r x}`.
pub(crate) fn cdf_power_expanded<T: Real + ThetaScalar>(
    m: u32,
    rate: T,
    n: u32,
    x: T,
    tables: &[ThetaTable<T>],
) -> T {
    let mut acc = T::zero();
    for u in 0..=n {
        let table = &tables[u as usize];
        let sign = if u % 2 == 0 { 1.0 } else { -1.0 };
        let w = T::from_f64(sign * binomial(n, u));
        let e = (-(T::from_usize(u as usize) * rate * x)).exp();
        acc += w * theta_series(table, x) * e;
    }
    debug_assert!(m >= 1);
    acc
}

pub(crate) fn theta_tables<T: ThetaScalar>(max_exponent: u32, m: u32, ratio: T) -> Vec<ThetaTable<T>> {
    (0..=max_exponent)
        .map(|y| ThetaTable::with_ratio(y, m, ratio.clone()))
        .collect()
}

fn selection_count(n_s: u32, n_rr: u32) -> Result<u32> {
    if n_s == 0 || n_rr == 0 {
        return Err(Error::Dimension("antenna counts must be >= 1".into()));
    }
    Ok(n_s * n_rr)
}

/// CDF of the best of `n_s * n_rr` i.i.d. first-hop links, evaluated from
/// the expanded multinomial sum.
pub fn cdf_best_first_hop(params: NakagamiParams, n_s: u32, n_rr: u32, x: f64) -> Result<f64> {
    check_nonnegative(x)?;
    let m = params.integer_m()?;
    let n = selection_count(n_s, n_rr)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    let rate = DoubleDouble::from(params.rate());
    let tables = theta_tables(n, m, rate);
    Ok(cdf_power_expanded(m, rate, n, DoubleDouble::from(x), &tables).to_f64())
}

/// PDF of the best first-hop link: `N f(x) F(x)^{N-1}` with the power
/// expanded.
pub fn pdf_best_first_hop(params: NakagamiParams, n_s: u32, n_rr: u32, x: f64) -> Result<f64> {
    check_nonnegative(x)?;
    let m = params.integer_m()?;
    let n = selection_count(n_s, n_rr)?;
    let rate = DoubleDouble::from(params.rate());
    let tables = theta_tables(n - 1, m, rate);
    let f = squared_gain_pdf_unchecked(params, x);
    let power = cdf_power_expanded(m, rate, n - 1, DoubleDouble::from(x), &tables);
    Ok((DoubleDouble::from(n as f64 * f) * power).to_f64())
}

/// Signed coefficients `eta(k, q)` writing the CDF of the rank-`k` user's
/// effective second-hop gain as `sum_q eta(k, q) G(x)^q`, where `G` is the
/// CDF of one relay transmit antenna's best receive link (`F^{N_U}`).
///
/// Only the three-user, two-transmit-antenna case is tabulated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaTable {
    rows: [[f64; 6]; 3],
}

impl EtaTable {
    pub const USERS: usize = 3;
    pub const RELAY_TX_ANTENNAS: u32 = 2;
    pub const MAX_POWER: usize = 6;

    /// Exact order-statistic coefficients of the majority procedure: each
    /// user votes for its best transmit antenna, the majority antenna serves
    /// everyone, and effective gains are ranked ascending.
    ///
    /// With two candidate antennas a user on the majority antenna sees the
    /// larger of its two row maxima (CDF `G^2`), a user outvoted sees the
    /// smaller (`2G - G^2`). A 3-0 split has probability 1/4, a 2-1 split 3/4.
    pub const fn majority() -> Self {
        Self {
            rows: [
                [1.5, 1.5, -3.0, 0.0, 1.5, -0.5],
                [0.0, 0.0, 3.0, 0.0, -3.0, 1.0],
                [0.0, 0.0, 0.0, 0.0, 1.5, -0.5],
            ],
        }
    }

    /// Coefficients as published alongside the closed-form CDF. Rows 1 and 2
    /// do not describe the majority procedure (their mean is not the
    /// per-user marginal `(G + G^2) / 2`); kept for reproducing the
    /// published curves.
    pub const fn published() -> Self {
        Self {
            rows: [
                [1.5, 1.5, -4.5, 3.75, -1.5, 0.25],
                [0.0, 0.0, 3.0, -0.75, -2.25, 1.0],
                [0.0, 0.0, 0.0, 0.0, 1.5, -0.5],
            ],
        }
    }

    /// `eta(k, q)` for 1-based `k` and `q`; zero outside the table.
    pub fn get(&self, k: usize, q: usize) -> f64 {
        if (1..=3).contains(&k) && (1..=6).contains(&q) {
            self.rows[k - 1][q - 1]
        } else {
            0.0
        }
    }

    pub fn row(&self, k: usize) -> Result<&[f64; 6]> {
        check_rank(k)?;
        Ok(&self.rows[k - 1])
    }

    /// Nonzero `(q, eta)` pairs of row `k`.
    pub fn terms(&self, k: usize) -> Result<impl Iterator<Item = (u32, f64)> + '_> {
        let row = self.row(k)?;
        Ok(row
            .iter()
            .enumerate()
            .filter(|(_, e)| **e != 0.0)
            .map(|(q, e)| (q as u32 + 1, *e)))
    }

    /// `sum_q eta(k, q) g^q`.
    pub fn eval(&self, k: usize, g: f64) -> Result<f64> {
        let row = self.row(k)?;
        let mut acc = 0.0;
        let mut gp = 1.0;
        for e in row {
            gp *= g;
            acc += e * gp;
        }
        Ok(acc)
    }
}

impl Default for EtaTable {
    fn default() -> Self {
        Self::majority()
    }
}

fn check_rank(k: usize) -> Result<()> {
    if (1..=3).contains(&k) {
        Ok(())
    } else {
        Err(Error::Unsupported(format!("user rank {k} outside 1..=3 of the majority CDF")))
    }
}

fn check_majority_scope(k: usize, n_rt: u32, n_u: u32) -> Result<()> {
    check_rank(k)?;
    if n_rt != EtaTable::RELAY_TX_ANTENNAS {
        return Err(Error::Unsupported(format!(
            "majority CDF tabulated for 2 relay transmit antennas, got {n_rt}"
        )));
    }
    if n_u == 0 {
        return Err(Error::Dimension("user receive antennas must be >= 1".into()));
    }
    Ok(())
}

/// CDF of the rank-`k` user's effective second-hop gain under majority
/// selection, power form `sum_q eta(k, q) F(x)^{q n_u}`.
pub fn cdf_majority_user(
    eta: &EtaTable,
    params: NakagamiParams,
    k: usize,
    n_rt: u32,
    n_u: u32,
    x: f64,
) -> Result<f64> {
    check_nonnegative(x)?;
    check_majority_scope(k, n_rt, n_u)?;
    let f = squared_gain_cdf_unchecked(params, x);
    eta.eval(k, f.powi(n_u as i32))
}

/// The same CDF from the fully expanded triple sum over `q`, `p` and the
/// multinomial index.
pub fn cdf_majority_user_expanded(
    eta: &EtaTable,
    params: NakagamiParams,
    k: usize,
    n_rt: u32,
    n_u: u32,
    x: f64,
) -> Result<f64> {
    check_nonnegative(x)?;
    check_majority_scope(k, n_rt, n_u)?;
    let m = params.integer_m()?;
    let rate = DoubleDouble::from(params.rate());
    let max_p = EtaTable::MAX_POWER as u32 * n_u;
    let tables = theta_tables(max_p, m, rate);
    let xd = DoubleDouble::from(x);
    let mut acc = DoubleDouble::ZERO;
    for (q, e) in eta.terms(k)? {
        acc += DoubleDouble::from(e) * cdf_power_expanded(m, rate, q * n_u, xd, &tables);
    }
    Ok(acc.to_f64())
}
