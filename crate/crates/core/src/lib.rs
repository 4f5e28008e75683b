//! Monte Carlo analysis of the DS-CDMA cellular downlink.
//!
//! A fixed number of base stations and mobiles are dropped on a finite disk
//! under minimum-separation constraints. Each mobile's outage probability is
//! evaluated in closed form conditioned on the realized geometry and
//! shadowing, so fading never has to be simulated inside the Monte Carlo
//! loop. Two resource-allocation policies are built on that kernel:
//!
//! * **rate control** gives every mobile in a cell an equal power share and
//!   then picks each mobile's SINR threshold so its outage equals the target;
//! * **power control** gives every mobile in a cell the same rate and solves
//!   for the per-mobile powers that meet both the outage target and the
//!   cell power budget.
//!
//! The pipeline is `spatial` → `propagation` → `association` → `policy`,
//! driven by `experiment`, which pools per-mobile rates over many network
//! realizations into average rate, transmission capacity, cell-edge rate and
//! the rate ccdf.

pub mod association;
pub mod error;
pub mod experiment;
pub mod outage;
pub mod policy;
pub mod propagation;
pub mod report;
pub mod rng;
pub mod spatial;
pub mod validation;

pub use error::{Error, Result};
