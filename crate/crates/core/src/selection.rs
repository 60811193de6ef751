//! Antenna selection on both hops and NOMA user ordering.
//!
//! Channels are carried as squared magnitudes only; phases never enter the
//! selection rules or the SINR.

use crate::error::{Error, Result};

/// Row-major matrix of squared channel gains, transmit antennas by rows.
#[derive(Debug, Clone, PartialEq)]
pub struct GainMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl GainMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!("empty gain matrix {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|g| !(**g >= 0.0)) {
            return Err(Error::Domain(format!("negative or NaN gain {bad}")));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub(crate) fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// One draw of both hops' squared gains: the BS-relay matrix
/// (`N_S x N_Rr`) and one relay-user matrix (`N_Rt x N_U`) per user.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub first_hop: GainMatrix,
    pub second_hop: Vec<GainMatrix>,
}

impl ChannelRealization {
    pub fn new(first_hop: GainMatrix, second_hop: Vec<GainMatrix>) -> Result<Self> {
        check_same_shape(&second_hop)?;
        Ok(Self { first_hop, second_hop })
    }

    pub(crate) fn zeros(n_s: usize, n_rr: usize, n_rt: usize, n_u: usize, users: usize) -> Self {
        Self {
            first_hop: GainMatrix::zeros(n_s, n_rr),
            second_hop: (0..users).map(|_| GainMatrix::zeros(n_rt, n_u)).collect(),
        }
    }

    pub fn users(&self) -> usize {
        self.second_hop.len()
    }
}

fn check_same_shape(mats: &[GainMatrix]) -> Result<()> {
    let first = mats
        .first()
        .ok_or_else(|| Error::Dimension("second hop needs at least one user".into()))?;
    if let Some(m) = mats.iter().find(|m| (m.rows, m.cols) != (first.rows, first.cols)) {
        return Err(Error::Dimension(format!(
            "user matrices differ in shape: {}x{} vs {}x{}",
            first.rows, first.cols, m.rows, m.cols
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntennaPair {
    pub row: usize,
    pub col: usize,
    pub gain: f64,
}

/// Best (transmit, receive) pair of one link; ties go to the lowest
/// row-major index.
pub fn jtras_opt(matrix: &GainMatrix) -> AntennaPair {
    let (idx, gain) = argmax(&matrix.data);
    AntennaPair { row: idx / matrix.cols, col: idx % matrix.cols, gain }
}

#[inline]
fn argmax(values: &[f64]) -> (usize, f64) {
    let mut best = 0;
    let mut best_val = values[0];
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > best_val {
            best = i;
            best_val = v;
        }
    }
    (best, best_val)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MajorityOutcome {
    /// Relay transmit antenna serving every user.
    pub antenna: usize,
    /// Each user's own optimal pair, whose row is that user's vote.
    pub preferred: Vec<AntennaPair>,
    /// Best receive antenna of each user given `antenna`.
    pub receive: Vec<usize>,
    /// Effective gain of each user on `antenna`, in raw user order.
    pub gains: Vec<f64>,
}

/// Majority transmit-antenna selection on the second hop.
///
/// Every user votes for the transmit row of its own optimal pair; the row
/// with most votes serves all users, and each user then listens on its best
/// receive antenna for that row. Vote ties go to the candidate whose voters
/// have the larger summed optimal gain, then to the lower index. With three
/// users and two antennas a strict majority always exists.
pub fn jtras_maj(second_hop: &[GainMatrix]) -> Result<MajorityOutcome> {
    check_same_shape(second_hop)?;
    let n_rt = second_hop[0].rows;
    let preferred: Vec<AntennaPair> = second_hop.iter().map(jtras_opt).collect();
    let mut votes = vec![0usize; n_rt];
    let mut weight = vec![0.0f64; n_rt];
    for pair in &preferred {
        votes[pair.row] += 1;
        weight[pair.row] += pair.gain;
    }
    let antenna = majority_winner(&votes, &weight);
    if second_hop.len() == 3 && n_rt == 2 {
        debug_assert!(votes[antenna] >= 2, "3 voters over 2 antennas always give a strict majority");
    }
    let mut receive = Vec::with_capacity(second_hop.len());
    let mut gains = Vec::with_capacity(second_hop.len());
    for m in second_hop {
        let (col, gain) = argmax(m.row(antenna));
        receive.push(col);
        gains.push(gain);
    }
    Ok(MajorityOutcome { antenna, preferred, receive, gains })
}

fn majority_winner(votes: &[usize], weight: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..votes.len() {
        if votes[i] > votes[best] || (votes[i] == votes[best] && weight[i] > weight[best]) {
            best = i;
        }
    }
    best
}

/// Ascending sort of effective gains: entry `k` is the raw index of the user
/// that takes NOMA rank `k + 1` (power factor `a_{k+1}`). Ties keep raw
/// order.
pub fn order_users(gains: &[f64]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..gains.len()).collect();
    perm.sort_by(|&i, &j| gains[i].total_cmp(&gains[j]));
    perm
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionOutcome {
    pub first_hop: AntennaPair,
    pub majority: MajorityOutcome,
    /// `ordering[k]` is the raw user holding rank `k + 1`.
    pub ordering: Vec<usize>,
}

impl SelectionOutcome {
    pub fn g_sr(&self) -> f64 {
        self.first_hop.gain
    }

    /// Effective second-hop gain of the rank-`k` user (1-based).
    pub fn g_ru_ranked(&self, k: usize) -> f64 {
        self.majority.gains[self.ordering[k - 1]]
    }

    pub fn ranked_gains(&self) -> Vec<f64> {
        self.ordering.iter().map(|&u| self.majority.gains[u]).collect()
    }
}

/// Runs both selection stages and the user ordering on one realization.
pub fn select(realization: &ChannelRealization) -> Result<SelectionOutcome> {
    let first_hop = jtras_opt(&realization.first_hop);
    let majority = jtras_maj(&realization.second_hop)?;
    let ordering = order_users(&majority.gains);
    Ok(SelectionOutcome { first_hop, majority, ordering })
}

/// Allocation-free selection for the simulation loop: writes the rank-ordered
/// effective second-hop gains into `ranked` and returns the first-hop gain.
pub(crate) fn select_ranked_into(
    realization: &ChannelRealization,
    votes: &mut [usize],
    weight: &mut [f64],
    ranked: &mut [f64],
) -> f64 {
    let g_sr = argmax(realization.first_hop.as_slice()).1;
    votes.iter_mut().for_each(|v| *v = 0);
    weight.iter_mut().for_each(|w| *w = 0.0);
    for m in &realization.second_hop {
        let pair = jtras_opt(m);
        votes[pair.row] += 1;
        weight[pair.row] += pair.gain;
    }
    let antenna = majority_winner(votes, weight);
    for (slot, m) in ranked.iter_mut().zip(&realization.second_hop) {
        *slot = argmax(m.row(antenna)).1;
    }
    ranked.sort_by(f64::total_cmp);
    g_sr
}
