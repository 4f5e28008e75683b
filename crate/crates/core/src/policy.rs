//! Rate control and power control under an outage constraint.
//!
//! Both policies start from the same per-mobile quantity: the β0 that puts a
//! mobile's outage exactly at the target. That value depends only on the
//! interference the mobile sees, not on its own power share, so it is
//! computed once per mobile ([`RequiredThresholds`]) and each policy then
//! turns it into powers and rates in closed form.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::association::Assignment;
use crate::error::{Error, Result};
use crate::outage::{invert_outage_beta0, AirInterface, Interference, Interferer};
use crate::propagation::LinkTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    #[serde(rename = "rate")]
    RateControl,
    #[serde(rename = "power")]
    PowerControl,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 2] = [PolicyKind::RateControl, PolicyKind::PowerControl];

    pub fn as_str(&self) -> &'static str {
        match self {
            PolicyKind::RateControl => "rate",
            PolicyKind::PowerControl => "power",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rate" | "rate_control" => Ok(PolicyKind::RateControl),
            "power" | "power_control" => Ok(PolicyKind::PowerControl),
            other => Err(Error::invalid(
                "policy",
                format!("unknown policy `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolicyParams {
    /// Target outage probability ε̂.
    pub epsilon_hat: f64,
    /// Fraction of base-station power reserved for pilots.
    pub pilot_fraction: f64,
}

impl Default for PolicyParams {
    fn default() -> Self {
        Self {
            epsilon_hat: 0.1,
            pilot_fraction: 0.1,
        }
    }
}

impl PolicyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon_hat > 0.0 && self.epsilon_hat < 1.0) {
            return Err(Error::invalid("epsilon_hat", "must lie in (0, 1)"));
        }
        if !(self.pilot_fraction >= 0.0 && self.pilot_fraction < 1.0) {
            return Err(Error::invalid("f_p", "must lie in [0, 1)"));
        }
        Ok(())
    }

    /// Power available for data, as a fraction of P0.
    pub fn data_share(&self) -> f64 {
        1.0 - self.pilot_fraction
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct MobileOutcome {
    pub served: bool,
    /// SINR threshold β_j.
    pub beta: f64,
    /// Power fraction φ_j = P_{g(j),j} / P0.
    pub phi: f64,
    /// Rate in bits per channel use.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyOutcome {
    pub kind: PolicyKind,
    pub mobiles: Vec<MobileOutcome>,
}

impl PolicyOutcome {
    pub fn cell_power(&self, assignment: &Assignment, bs: usize) -> f64 {
        assignment
            .members(bs)
            .iter()
            .map(|&j| self.mobiles[j].phi)
            .sum()
    }
}

/// Shannon mapping from SINR threshold to rate.
pub fn shannon_rate(beta: f64) -> f64 {
    beta.ln_1p() / std::f64::consts::LN_2
}

/// Inverse of [`shannon_rate`].
pub fn shannon_threshold(rate: f64) -> f64 {
    rate.exp2() - 1.0
}

/// Interference seen by mobile `j` from every station other than its
/// server, each transmitting at full power.
pub fn mobile_interference(
    links: &LinkTable,
    assignment: &Assignment,
    mobile: usize,
    air: &AirInterface,
    m_serving: u32,
) -> Result<Option<Interference>> {
    let Some(serving) = assignment.serving(mobile) else {
        return Ok(None);
    };
    let interferers = (0..links.num_base_stations())
        .filter(|&i| i != serving)
        .map(|i| Interferer {
            omega: links.gain(i, mobile),
            m: links
                .nakagami(i, mobile)
                .expect("nakagami parameters are assigned after association"),
        })
        .collect();
    Interference::new(m_serving, interferers, *air).map(Some)
}

/// Per-mobile β0* and serving gain; `None` for denied mobiles.
#[derive(Debug, Clone, PartialEq)]
pub struct RequiredThresholds {
    pub m0: u32,
    pub entries: Vec<Option<Required>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Required {
    pub beta0: f64,
    pub serving_gain: f64,
}

impl Required {
    /// Power fraction needed to support threshold `beta`: φ = β m0 / (β0* w).
    fn phi_for(&self, beta: f64, m0: f64) -> f64 {
        beta * m0 / (self.beta0 * self.serving_gain)
    }
}

impl RequiredThresholds {
    pub fn compute(
        assignment: &Assignment,
        links: &LinkTable,
        air: &AirInterface,
        params: &PolicyParams,
        m_serving: u32,
    ) -> Result<Self> {
        params.validate()?;
        let entries = (0..assignment.num_mobiles())
            .map(|j| {
                let Some(intf) = mobile_interference(links, assignment, j, air, m_serving)? else {
                    return Ok(None);
                };
                let serving = assignment.serving(j).expect("served");
                Ok(Some(Required {
                    beta0: invert_outage_beta0(params.epsilon_hat, &intf)?,
                    serving_gain: links.gain(serving, j),
                }))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            m0: m_serving,
            entries,
        })
    }
}

/// Equal power share per cell; each mobile's threshold set individually.
pub fn rate_control_from(
    required: &RequiredThresholds,
    assignment: &Assignment,
    params: &PolicyParams,
) -> PolicyOutcome {
    let m0 = f64::from(required.m0);
    let mut mobiles = vec![MobileOutcome::default(); assignment.num_mobiles()];
    for bs in 0..assignment.num_base_stations() {
        let members = assignment.members(bs);
        if members.is_empty() {
            continue;
        }
        let phi = params.data_share() / members.len() as f64;
        for &j in members {
            let req = required.entries[j].expect("served mobile has a threshold");
            let beta = req.beta0 * phi * req.serving_gain / m0;
            mobiles[j] = MobileOutcome {
                served: true,
                beta,
                phi,
                rate: shannon_rate(beta),
            };
        }
    }
    PolicyOutcome {
        kind: PolicyKind::RateControl,
        mobiles,
    }
}

/// Common threshold per cell; powers scaled so every mobile meets the target
/// and the cell spends exactly its data budget.
///
/// Because each φ_j is linear in β, the budget `Σ φ_j = 1 − f_p` is solved in
/// one step: `β = (1 − f_p) / Σ m0 / (β0*_j w_j)`.
pub fn power_control_from(
    required: &RequiredThresholds,
    assignment: &Assignment,
    params: &PolicyParams,
) -> PolicyOutcome {
    let m0 = f64::from(required.m0);
    let mut mobiles = vec![MobileOutcome::default(); assignment.num_mobiles()];
    for bs in 0..assignment.num_base_stations() {
        let members = assignment.members(bs);
        if members.is_empty() {
            continue;
        }
        let reqs: Vec<Required> = members
            .iter()
            .map(|&j| required.entries[j].expect("served mobile has a threshold"))
            .collect();
        let unit_cost: f64 = reqs.iter().map(|r| r.phi_for(1.0, m0)).sum();
        let beta = params.data_share() / unit_cost;
        let rate = shannon_rate(beta);
        for (&j, req) in members.iter().zip(&reqs) {
            mobiles[j] = MobileOutcome {
                served: true,
                beta,
                phi: req.phi_for(beta, m0),
                rate,
            };
        }
    }
    PolicyOutcome {
        kind: PolicyKind::PowerControl,
        mobiles,
    }
}

pub fn rate_control(
    assignment: &Assignment,
    links: &LinkTable,
    air: &AirInterface,
    params: &PolicyParams,
    m_serving: u32,
) -> Result<PolicyOutcome> {
    let required = RequiredThresholds::compute(assignment, links, air, params, m_serving)?;
    Ok(rate_control_from(&required, assignment, params))
}

pub fn power_control(
    assignment: &Assignment,
    links: &LinkTable,
    air: &AirInterface,
    params: &PolicyParams,
    m_serving: u32,
) -> Result<PolicyOutcome> {
    let required = RequiredThresholds::compute(assignment, links, air, params, m_serving)?;
    Ok(power_control_from(&required, assignment, params))
}

pub fn apply(
    kind: PolicyKind,
    required: &RequiredThresholds,
    assignment: &Assignment,
    params: &PolicyParams,
) -> PolicyOutcome {
    match kind {
        PolicyKind::RateControl => rate_control_from(required, assignment, params),
        PolicyKind::PowerControl => power_control_from(required, assignment, params),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::association::associate;
    use crate::outage::{outage_probability, OutageContext};
    use crate::propagation::{build_link_table, PropagationParams};
    use crate::rng;
    use crate::spatial::{draw_network, Disk, PlacementSpec};
    use approx::assert_relative_eq;

    const M0: u32 = 3;

    fn prop() -> PropagationParams {
        PropagationParams::default()
    }

    fn cell(gains: Vec<f64>, m: usize, k: usize) -> (LinkTable, Assignment) {
        let mut links = LinkTable::from_gains(m, k, gains);
        let a = associate(&links, 16);
        links.assign_nakagami(&a, &prop());
        (links, a)
    }

    #[test]
    fn shannon_values() {
        assert_eq!(shannon_rate(0.0), 0.0);
        assert_relative_eq!(shannon_rate(1.0), 1.0);
        assert!((shannon_rate(1.053_605) - 1.038).abs() < 5e-4);
        assert_relative_eq!(
            shannon_threshold(shannon_rate(3.3)),
            3.3,
            max_relative = 1e-14
        );
    }

    #[test]
    fn equal_shares() {
        let p = PolicyParams::default();
        // one mobile
        let (links, a) = cell(vec![5.0, 0.1], 2, 1);
        let rc = rate_control(&a, &links, &AirInterface::default(), &p, M0).unwrap();
        assert_relative_eq!(rc.mobiles[0].phi, 0.9);
        // sixteen mobiles in station 0, one elsewhere
        let k = 17;
        let mut g = vec![0.0; 2 * k];
        for j in 0..k {
            g[j] = if j < 16 { 10.0 + j as f64 } else { 0.1 };
            g[k + j] = if j < 16 { 0.2 } else { 3.0 };
        }
        let (links, a) = cell(g, 2, k);
        let rc = rate_control(&a, &links, &AirInterface::default(), &p, M0).unwrap();
        for j in 0..16 {
            assert_relative_eq!(rc.mobiles[j].phi, 0.05625, max_relative = 1e-12);
        }
        assert_relative_eq!(rc.cell_power(&a, 0), 0.9, max_relative = 1e-12);
    }

    fn two_mobile_cell() -> (LinkTable, Assignment) {
        // mobiles 0 and 1 both served by station 0 and see the same interferer
        cell(vec![40.0, 10.0, 2.0, 2.0], 2, 2)
    }

    #[test]
    fn stronger_mobile_gets_higher_rate_under_rate_control() {
        let (links, a) = two_mobile_cell();
        let rc = rate_control(
            &a,
            &links,
            &AirInterface::default(),
            &PolicyParams::default(),
            M0,
        )
        .unwrap();
        assert!(rc.mobiles[0].rate > rc.mobiles[1].rate);
    }

    #[test]
    fn stronger_mobile_gets_less_power_under_power_control() {
        let (links, a) = two_mobile_cell();
        let pc = power_control(
            &a,
            &links,
            &AirInterface::default(),
            &PolicyParams::default(),
            M0,
        )
        .unwrap();
        assert!(pc.mobiles[0].phi < pc.mobiles[1].phi);
        assert_eq!(pc.mobiles[0].rate, pc.mobiles[1].rate);
        assert_relative_eq!(pc.cell_power(&a, 0), 0.9, max_relative = 1e-12);
    }

    #[test]
    fn single_mobile_cells_coincide() {
        let (links, a) = cell(vec![5.0, 0.3, 0.2, 4.0], 2, 2);
        let air = AirInterface::default();
        let p = PolicyParams::default();
        let rc = rate_control(&a, &links, &air, &p, M0).unwrap();
        let pc = power_control(&a, &links, &air, &p, M0).unwrap();
        for (r, q) in rc.mobiles.iter().zip(&pc.mobiles) {
            assert_relative_eq!(r.phi, q.phi, max_relative = 1e-12);
            assert_relative_eq!(r.beta, q.beta, max_relative = 1e-12);
            assert_relative_eq!(r.rate, q.rate, max_relative = 1e-12);
        }
    }

    /// Nested root-find reading of power control: for a trial threshold β,
    /// bisect each mobile's φ until its outage hits the target, then bisect
    /// β until the cell budget is met.
    fn nested_power_control(
        links: &LinkTable,
        a: &Assignment,
        bs: usize,
        air: &AirInterface,
        p: &PolicyParams,
    ) -> f64 {
        let members = a.members(bs);
        let phi_needed = |j: usize, beta: f64| {
            let intf = mobile_interference(links, a, j, air, M0).unwrap().unwrap();
            let w = links.gain(bs, j);
            let (mut lo, mut hi) = (1e-15f64, 1e15f64);
            for _ in 0..200 {
                let mid = (lo * hi).sqrt();
                let ctx = OutageContext::new(mid * w, intf.clone()).unwrap();
                if outage_probability(beta, &ctx).unwrap() > p.epsilon_hat {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            (lo * hi).sqrt()
        };
        let (mut lo, mut hi) = (1e-9f64, 1e9f64);
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            let total: f64 = members.iter().map(|&j| phi_needed(j, mid)).sum();
            if total > p.data_share() {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (lo * hi).sqrt()
    }

    fn realization(seed: u64, k: usize) -> (LinkTable, Assignment) {
        let disk = Disk::new(2.0).unwrap();
        let net = draw_network(
            &disk,
            &PlacementSpec::new(12, 0.25),
            &PlacementSpec::new(k, 0.01),
            &mut rng::stream(seed, &[1]),
        )
        .unwrap();
        let mut links = build_link_table(&net, &prop(), &mut rng::stream(seed, &[2])).unwrap();
        let a = associate(&links, 16);
        links.assign_nakagami(&a, &prop());
        (links, a)
    }

    #[test]
    fn closed_form_power_control_matches_nested_search() {
        let (links, a) = realization(3, 60);
        let air = AirInterface::default();
        let p = PolicyParams::default();
        let pc = power_control(&a, &links, &air, &p, M0).unwrap();
        let busiest = (0..a.num_base_stations())
            .max_by_key(|&i| a.cell_load(i))
            .unwrap();
        assert!(a.cell_load(busiest) >= 3);
        let j = a.members(busiest)[0];
        let nested = nested_power_control(&links, &a, busiest, &air, &p);
        assert_relative_eq!(pc.mobiles[j].beta, nested, max_relative = 1e-7);
    }

    #[test]
    fn invariants_on_random_realizations() {
        let air = AirInterface::default();
        let p = PolicyParams::default();
        for seed in 0..4 {
            let (links, a) = realization(seed, 80);
            let req = RequiredThresholds::compute(&a, &links, &air, &p, M0).unwrap();
            let rc = rate_control_from(&req, &a, &p);
            let pc = power_control_from(&req, &a, &p);
            for bs in 0..a.num_base_stations() {
                let members = a.members(bs);
                if members.is_empty() {
                    continue;
                }
                for out in [&rc, &pc] {
                    assert_relative_eq!(out.cell_power(&a, bs), 0.9, epsilon = 1e-9);
                    for &j in members {
                        let intf = mobile_interference(&links, &a, j, &air, M0)
                            .unwrap()
                            .unwrap();
                        let o = out.mobiles[j];
                        let ctx = OutageContext::new(o.phi * links.gain(bs, j), intf).unwrap();
                        assert!((outage_probability(o.beta, &ctx).unwrap() - 0.1).abs() <= 1e-8);
                    }
                }
                // rate-control rates sorted by β0* w; power-control rate in between
                let mut by_need: Vec<(f64, f64)> = members
                    .iter()
                    .map(|&j| {
                        let r = req.entries[j].unwrap();
                        (r.beta0 * r.serving_gain, rc.mobiles[j].rate)
                    })
                    .collect();
                by_need.sort_by(|x, y| x.0.total_cmp(&y.0));
                assert!(by_need.windows(2).all(|w| w[0].1 <= w[1].1));
                let pc_rate = pc.mobiles[members[0]].rate;
                let lo = by_need.first().unwrap().1;
                let hi = by_need.last().unwrap().1;
                assert!(pc_rate >= lo * (1.0 - 1e-12) && pc_rate <= hi * (1.0 + 1e-12));
            }
            for (j, s) in a.serving_stations().enumerate() {
                if s.is_none() {
                    assert_eq!(rc.mobiles[j], MobileOutcome::default());
                    assert_eq!(pc.mobiles[j], MobileOutcome::default());
                }
            }
        }
    }

    #[test]
    fn policy_kind_parsing() {
        assert_eq!(
            "rate".parse::<PolicyKind>().unwrap(),
            PolicyKind::RateControl
        );
        assert_eq!(
            "power".parse::<PolicyKind>().unwrap(),
            PolicyKind::PowerControl
        );
        assert!("both".parse::<PolicyKind>().is_err());
    }
}
