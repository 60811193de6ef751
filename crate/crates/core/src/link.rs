//! Signal model of the power-splitting AF relay.
//!
//! The relay splits its received power `w : 1 - w`, harvests the first part
//! with efficiency `zeta` and forwards the second with amplification factor
//! `G`. With `G^2 ~ zeta w / (1 - w)` the SINR of user `k` detecting the
//! message of user `l <= k` is
//!
//! ```text
//!              snr g_sr g_ru a_l
//! sinr = ---------------------------------------
//!        snr g_sr g_ru Sigma_l + c1 g_ru + c2
//! ```
//!
//! with `Sigma_l = xi sum_{t<l} a_t + sum_{t>l} a_t`, `c1 = 1/(1-w)` and
//! `c2 = 1/(zeta w)`. Noise powers at relay and users are equal, so the
//! transmit SNR is the only power knob.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fading::NakagamiParams;
use crate::selection::{select, ChannelRealization};

const POWER_SUM_TOL: f64 = 1e-12;

/// A complete scenario. Field names double as the keys of scenario files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// NOMA power factors, strongest allocation (weakest user) first.
    pub a: Vec<f64>,
    /// Linear SINR thresholds per user.
    pub gamma_th: Vec<f64>,
    /// Residual fraction of cancelled users' power after SIC.
    pub xi: f64,
    /// Power-splitting ratio.
    pub w: f64,
    /// Energy conversion efficiency.
    pub zeta: f64,
    pub snr_db: f64,
    pub n_s: u32,
    pub n_rr: u32,
    pub n_rt: u32,
    pub n_u: u32,
    /// Normalized BS-relay distance; relay-user distance is `1 - d_sr`.
    pub d_sr: f64,
    /// Path-loss exponent.
    pub alpha: f64,
    pub m_sr: f64,
    pub m_ru: f64,
}

impl Default for SystemConfig {
    /// Three users, `a = (0.6, 0.3, 0.1)`, `gamma_th = (1.4, 2.2, 2.5)`,
    /// `zeta = 0.8`, `w = 0.5`, `d_sr = 0.5`, `alpha = 2`, Rayleigh fading
    /// and two antennas everywhere.
    fn default() -> Self {
        Self {
            a: vec![0.6, 0.3, 0.1],
            gamma_th: vec![1.4, 2.2, 2.5],
            xi: 0.0,
            w: 0.5,
            zeta: 0.8,
            snr_db: 20.0,
            n_s: 2,
            n_rr: 2,
            n_rt: 2,
            n_u: 2,
            d_sr: 0.5,
            alpha: 2.0,
            m_sr: 1.0,
            m_ru: 1.0,
        }
    }
}

impl SystemConfig {
    pub fn users(&self) -> usize {
        self.a.len()
    }

    /// Checks every structural invariant; SINR feasibility is separate
    /// (see [`SystemConfig::check_feasible`]).
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.a.is_empty() {
            return bad("at least one user is required".into());
        }
        if self.gamma_th.len() != self.a.len() {
            return bad(format!("{} power factors but {} thresholds", self.a.len(), self.gamma_th.len()));
        }
        if self.a.iter().any(|a| !(*a > 0.0)) {
            return bad("power factors must be > 0".into());
        }
        if self.a.windows(2).any(|p| p[0] < p[1]) {
            return bad("power factors must be non-increasing (a_1 >= ... >= a_K)".into());
        }
        let total: f64 = self.a.iter().sum();
        if (total - 1.0).abs() > POWER_SUM_TOL {
            return bad(format!("power factors sum to {total}, not 1"));
        }
        if self.gamma_th.iter().any(|g| !(*g >= 0.0) || !g.is_finite()) {
            return bad("thresholds must be finite and >= 0".into());
        }
        if !(0.0..=1.0).contains(&self.xi) {
            return bad(format!("xi = {} outside [0, 1]", self.xi));
        }
        if !(self.w > 0.0 && self.w < 1.0) {
            return bad(format!("w = {} outside (0, 1)", self.w));
        }
        if !(self.zeta > 0.0 && self.zeta <= 1.0) {
            return bad(format!("zeta = {} outside (0, 1]", self.zeta));
        }
        if !self.snr_db.is_finite() {
            return bad("snr_db must be finite".into());
        }
        if [self.n_s, self.n_rr, self.n_rt, self.n_u].contains(&0) {
            return bad("antenna counts must be >= 1".into());
        }
        if !(self.d_sr > 0.0 && self.d_sr < 1.0) {
            return bad(format!("d_sr = {} outside (0, 1)", self.d_sr));
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return bad(format!("alpha = {} must be >= 0", self.alpha));
        }
        for (name, m) in [("m_sr", self.m_sr), ("m_ru", self.m_ru)] {
            if !(m >= 0.5) || !m.is_finite() {
                return bad(format!("{name} = {m} must be >= 0.5"));
            }
        }
        Ok(())
    }

    /// Linear transmit SNR.
    pub fn snr(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }

    pub fn c1(&self) -> f64 {
        1.0 / (1.0 - self.w)
    }

    pub fn c2(&self) -> f64 {
        1.0 / (self.zeta * self.w)
    }

    pub fn omega_sr(&self) -> f64 {
        self.d_sr.powf(-self.alpha)
    }

    pub fn omega_ru(&self) -> f64 {
        (1.0 - self.d_sr).powf(-self.alpha)
    }

    pub fn first_hop(&self) -> Result<NakagamiParams> {
        NakagamiParams::new(self.m_sr, self.omega_sr())
    }

    pub fn second_hop(&self) -> Result<NakagamiParams> {
        NakagamiParams::new(self.m_ru, self.omega_ru())
    }

    /// Interference weight `Sigma_l` seen while detecting stage `l`
    /// (1-based): residual of already-cancelled users plus all weaker ones.
    pub fn interference_weight(&self, l: usize) -> f64 {
        let residual: f64 = self.a[..l - 1].iter().sum();
        let uncancelled: f64 = self.a[l..].iter().sum();
        self.xi * residual + uncancelled
    }

    /// `a_l - Sigma_l gamma_th_l`; detection of stage `l` is possible at
    /// any SNR only when this is positive.
    pub fn stage_margin(&self, l: usize) -> f64 {
        self.a[l - 1] - self.interference_weight(l) * self.gamma_th[l - 1]
    }

    /// Feasibility of every detection stage user `k` runs.
    pub fn check_feasible(&self, k: usize) -> Result<()> {
        self.check_rank(k)?;
        for l in 1..=k {
            let margin = self.stage_margin(l);
            if !(margin > 0.0) {
                return Err(Error::Infeasible { stage: l, margin });
            }
        }
        Ok(())
    }

    pub fn check_feasible_all(&self) -> Result<()> {
        self.check_feasible(self.users())
    }

    pub(crate) fn check_rank(&self, k: usize) -> Result<()> {
        if k >= 1 && k <= self.users() {
            Ok(())
        } else {
            Err(Error::Domain(format!("user rank {k} outside 1..={}", self.users())))
        }
    }
}

/// How the relay amplification factor is modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GainMode {
    /// High-SNR approximation `sqrt(zeta w / (1 - w))`, used by the analysis.
    #[default]
    Approx,
    /// Exact factor including relay noise.
    Exact,
}

fn check_split_ratio(w: f64) -> Result<()> {
    if w > 0.0 && w < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("power-splitting ratio w = {w} outside (0, 1)")))
    }
}

/// Relay amplification factor `G` in units where the noise power is one
/// and the BS transmit power equals the SNR.
pub fn amplification_factor(g_sr: f64, config: &SystemConfig, mode: GainMode) -> Result<f64> {
    check_split_ratio(config.w)?;
    if !(g_sr >= 0.0) {
        return Err(Error::Domain(format!("first-hop gain {g_sr} < 0")));
    }
    let (zeta, w) = (config.zeta, config.w);
    Ok(match mode {
        GainMode::Approx => (zeta * w / (1.0 - w)).sqrt(),
        GainMode::Exact => {
            let p = config.snr() * g_sr;
            (zeta * w * p / ((1.0 - w) * p + 1.0)).sqrt()
        }
    })
}

fn check_stage(l: usize, k: usize, config: &SystemConfig) -> Result<()> {
    if l >= 1 && l <= k && k <= config.users() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "detection stage l={l}, user k={k} must satisfy 1 <= l <= k <= {}",
            config.users()
        )))
    }
}

/// SINR of the rank-`k` user detecting the message of rank `l`.
pub fn sinr(l: usize, k: usize, g_sr: f64, g_ru: f64, config: &SystemConfig) -> Result<f64> {
    sinr_with_mode(l, k, g_sr, g_ru, config, GainMode::Approx)
}

pub fn sinr_with_mode(
    l: usize,
    k: usize,
    g_sr: f64,
    g_ru: f64,
    config: &SystemConfig,
    mode: GainMode,
) -> Result<f64> {
    check_stage(l, k, config)?;
    check_split_ratio(config.w)?;
    if !(g_sr >= 0.0) || !(g_ru >= 0.0) {
        return Err(Error::Domain("channel gains must be >= 0".into()));
    }
    let noise_term = forwarded_noise_term(g_sr, config, mode);
    Ok(sinr_kernel(
        config.snr() * g_sr * g_ru,
        config.a[l - 1],
        config.interference_weight(l),
        config.c1() * g_ru,
        noise_term,
    ))
}

/// `1 / (G^2 (1 - w))`, the user-noise term of the SINR denominator.
fn forwarded_noise_term(g_sr: f64, config: &SystemConfig, mode: GainMode) -> f64 {
    match mode {
        GainMode::Approx => config.c2(),
        GainMode::Exact => {
            let p = config.snr() * g_sr;
            if p == 0.0 {
                f64::INFINITY
            } else {
                ((1.0 - config.w) * p + 1.0) / (config.zeta * config.w * p * (1.0 - config.w))
            }
        }
    }
}

#[inline]
fn sinr_kernel(signal: f64, a_l: f64, sigma_l: f64, relay_noise: f64, user_noise: f64) -> f64 {
    if signal == 0.0 {
        return 0.0;
    }
    signal * a_l / (signal * sigma_l + relay_noise + user_noise)
}

/// Effective first-hop gain threshold of user `k`:
/// `c1 * max_{l<=k} gamma_th_l / (snr (a_l - Sigma_l gamma_th_l))`.
///
/// With this scaling the outage event of user `k` is exactly
/// `g_sr <= tau` or `g_ru < tau c2 / (c1 (g_sr - tau))`.
pub fn tau_star(k: usize, config: &SystemConfig) -> Result<f64> {
    config.check_feasible(k)?;
    let snr = config.snr();
    let worst = (1..=k)
        .map(|l| config.gamma_th[l - 1] / (snr * config.stage_margin(l)))
        .fold(0.0, f64::max);
    Ok(config.c1() * worst)
}

/// Whether the rank-`k` user is in outage on this realization: selection
/// runs on both hops, users are ranked, and any failed detection stage
/// `l <= k` means outage.
pub fn outage_event(k: usize, realization: &ChannelRealization, config: &SystemConfig) -> Result<bool> {
    config.validate()?;
    config.check_rank(k)?;
    if realization.users() != config.users() {
        return Err(Error::Dimension(format!(
            "realization has {} users, configuration {}",
            realization.users(),
            config.users()
        )));
    }
    let outcome = select(realization)?;
    let g_sr = outcome.g_sr();
    let g_ru = outcome.g_ru_ranked(k);
    for l in 1..=k {
        if sinr(l, k, g_sr, g_ru, config)? < config.gamma_th[l - 1] {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Precomputed per-stage constants for evaluating every user's outage event
/// from one realization.
#[derive(Debug, Clone)]
pub(crate) struct OutageEvaluator {
    snr: f64,
    c1: f64,
    mode: GainMode,
    config_noise: (f64, f64, f64),
    stages: Vec<(f64, f64, f64)>,
}

impl OutageEvaluator {
    pub(crate) fn new(config: &SystemConfig, mode: GainMode) -> Self {
        let stages = (1..=config.users())
            .map(|l| (config.a[l - 1], config.interference_weight(l), config.gamma_th[l - 1]))
            .collect();
        Self {
            snr: config.snr(),
            c1: config.c1(),
            mode,
            config_noise: (config.c2(), config.w, config.zeta),
            stages,
        }
    }

    /// Writes the outage indicator of each rank into `out`; `ranked` holds
    /// the effective second-hop gains in ascending order.
    #[inline]
    pub(crate) fn evaluate(&self, g_sr: f64, ranked: &[f64], out: &mut [bool]) {
        let (c2, w, zeta) = self.config_noise;
        let user_noise = match self.mode {
            GainMode::Approx => c2,
            GainMode::Exact => {
                let p = self.snr * g_sr;
                if p == 0.0 {
                    f64::INFINITY
                } else {
                    ((1.0 - w) * p + 1.0) / (zeta * w * p * (1.0 - w))
                }
            }
        };
        // user k fails if any stage l <= k fails at its own gain
        for (k, (&g_ru, slot)) in ranked.iter().zip(out.iter_mut()).enumerate() {
            let signal = self.snr * g_sr * g_ru;
            let relay_noise = self.c1 * g_ru;
            *slot = self.stages[..=k].iter().any(|&(a_l, sigma_l, th)| {
                sinr_kernel(signal, a_l, sigma_l, relay_noise, user_noise) < th
            });
        }
    }
}
