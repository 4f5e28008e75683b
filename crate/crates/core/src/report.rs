//! CSV writers for results, rate ccdfs and network snapshots.
//!
//! Output is plain comma-separated text with a header row and `.` decimals.
//! Floats use Rust's shortest round-trip formatting, so identical inputs
//! produce byte-identical files.

use std::io::{self, Write};

use crate::association::Assignment;
use crate::experiment::SweepPoint;
use crate::spatial::NetworkRealization;

pub const RESULTS_HEADER: &str =
    "swept_value,policy,sigma_s_dB,mean_rate,mean_rate_se,tx_capacity,cell_edge_mean,denial_fraction,n_trials";
pub const CCDF_HEADER: &str = "policy,K_over_M,r,ccdf,sigma_s_dB,r_bs";
pub const SNAPSHOT_HEADER: &str = "kind,index,x,y,serving";

/// One row per (swept value, shadowing setting, policy).
pub fn write_results<W: Write>(points: &[SweepPoint], mut out: W) -> io::Result<()> {
    writeln!(out, "{RESULTS_HEADER}")?;
    for p in points {
        for s in &p.result.stats {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                p.swept_value,
                s.policy,
                p.sigma_s_db,
                s.mean_rate,
                s.mean_rate_se,
                s.transmission_capacity,
                s.cell_edge_mean_rate,
                s.denial_fraction,
                s.n_trials
            )?;
        }
    }
    Ok(())
}

pub fn write_ccdf<W: Write>(points: &[SweepPoint], mut out: W) -> io::Result<()> {
    writeln!(out, "{CCDF_HEADER}")?;
    for p in points {
        let sc = &p.result.scenario;
        for s in &p.result.stats {
            for (r, c) in &s.ccdf {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    s.policy, sc.km, r, c, p.sigma_s_db, sc.bs_spec.exclusion_radius
                )?;
            }
        }
    }
    Ok(())
}

/// Base stations and mobiles with 1-based indices. The `serving` column is
/// the station's own index for base stations and `g(j)` for mobiles
/// (0 when denied).
pub fn write_snapshot<W: Write>(
    network: &NetworkRealization,
    assignment: &Assignment,
    mut out: W,
) -> io::Result<()> {
    writeln!(out, "{SNAPSHOT_HEADER}")?;
    for (i, p) in network.base_stations.iter().enumerate() {
        writeln!(out, "bs,{},{},{},{}", i + 1, p.x, p.y, i + 1)?;
    }
    for (j, p) in network.mobiles.iter().enumerate() {
        writeln!(
            out,
            "mobile,{},{},{},{}",
            j + 1,
            p.x,
            p.y,
            assignment.serving_index(j)
        )?;
    }
    Ok(())
}
