//! Analytic outage probability: the closed form, the quadrature oracle and
//! the special functions they need.

pub mod bessel;
pub mod closed_form;
pub mod numerical;
pub mod quadrature;

pub use bessel::{bessel_k, BesselK};
pub use closed_form::{op_closed_form, op_closed_form_detailed, ClosedFormOp, OpTermContext, TermIndex};
pub use numerical::{op_numerical, op_numerical_with};

use crate::error::{Error, Result};
use crate::fading::EtaTable;
use crate::link::SystemConfig;

/// The eta table covers three users and two relay transmit antennas only.
pub(crate) fn check_eta_scope(k: usize, config: &SystemConfig) -> Result<()> {
    config.validate()?;
    config.check_rank(k)?;
    if config.users() != EtaTable::USERS {
        return Err(Error::Unsupported(format!(
            "analysis covers {} users, configuration has {}",
            EtaTable::USERS,
            config.users()
        )));
    }
    if config.n_rt != EtaTable::RELAY_TX_ANTENNAS {
        return Err(Error::Unsupported(format!(
            "analysis covers {} relay transmit antennas, configuration has {}",
            EtaTable::RELAY_TX_ANTENNAS,
            config.n_rt
        )));
    }
    Ok(())
}
