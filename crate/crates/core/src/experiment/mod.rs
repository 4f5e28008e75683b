//! Monte Carlo driver: draw networks, apply the policies, pool the rates.

mod stats;

pub use stats::{
    bootstrap_gap_se, transmission_capacity, AggregateStats, MobileRecord, Statistic, TrialSample,
};

use serde::Serialize;

use crate::association::{associate, Assignment};
use crate::error::{Error, Result};
use crate::outage::AirInterface;
use crate::policy::{self, PolicyKind, PolicyOutcome, PolicyParams, RequiredThresholds};
use crate::propagation::{build_link_table, LinkTable, PropagationParams};
use crate::rng;
use crate::spatial::{draw_network, Disk, NetworkRealization, PlacementSpec};

/// Full experiment description, including the lists that a sweep iterates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    /// M
    pub num_base_stations: usize,
    /// K/M values; `single` uses the first.
    pub km_list: Vec<f64>,
    pub r_net: f64,
    pub r_bs: f64,
    /// When non-empty, a sweep runs over these r_bs values at the first K/M.
    pub rbs_list: Vec<f64>,
    pub r_m: f64,
    pub alpha: f64,
    pub d0: f64,
    pub sigma_s_db: Vec<f64>,
    pub m_serving: u32,
    pub m_interfering: f64,
    pub gamma_db: f64,
    pub spreading_factor: usize,
    pub chip_factor: f64,
    pub pilot_fraction: f64,
    pub epsilon_hat: f64,
    pub policies: Vec<PolicyKind>,
    pub n_trials: usize,
    pub master_seed: u64,
    pub cell_edge_fraction: f64,
    pub bootstrap_resamples: usize,
    pub ccdf_r_max: f64,
    pub ccdf_r_step: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            num_base_stations: 50,
            km_list: vec![4.0, 8.0, 12.0, 16.0],
            r_net: 2.0,
            r_bs: 0.25,
            rbs_list: Vec::new(),
            r_m: 0.01,
            alpha: 3.0,
            d0: 0.001,
            sigma_s_db: vec![0.0, 8.0],
            m_serving: 3,
            m_interfering: 1.0,
            gamma_db: 10.0,
            spreading_factor: 16,
            chip_factor: 2.0 / 3.0,
            pilot_fraction: 0.1,
            epsilon_hat: 0.1,
            policies: vec![PolicyKind::RateControl],
            n_trials: 100,
            master_seed: 1,
            cell_edge_fraction: 0.05,
            bootstrap_resamples: 200,
            ccdf_r_max: 10.0,
            ccdf_r_step: 0.05,
        }
    }
}

impl ExperimentConfig {
    /// Checks every range a scenario depends on. Errors name the config key.
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, name: &'static str, reason: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::invalid(name, reason))
            }
        };
        check(self.num_base_stations >= 1, "M", "must be at least 1")?;
        check(!self.km_list.is_empty(), "km_list", "must not be empty")?;
        check(
            self.km_list.iter().all(|k| k.is_finite() && *k > 0.0),
            "km_list",
            "values must be positive",
        )?;
        check(
            self.r_net.is_finite() && self.r_net > 0.0,
            "r_net",
            "must be positive",
        )?;
        check(
            self.r_bs.is_finite() && self.r_bs >= 0.0,
            "r_bs",
            "must be non-negative",
        )?;
        check(
            self.rbs_list.iter().all(|r| r.is_finite() && *r >= 0.0),
            "rbs_list",
            "values must be non-negative",
        )?;
        check(
            self.r_m.is_finite() && self.r_m >= 0.0,
            "r_m",
            "must be non-negative",
        )?;
        check(
            !self.sigma_s_db.is_empty(),
            "sigma_s_dB",
            "must not be empty",
        )?;
        check(
            self.sigma_s_db.iter().all(|s| s.is_finite() && *s >= 0.0),
            "sigma_s_dB",
            "must be non-negative",
        )?;
        check(self.gamma_db.is_finite(), "Gamma_dB", "must be finite")?;
        check(self.spreading_factor >= 1, "G_spread", "must be at least 1")?;
        check(
            !self.policies.is_empty(),
            "policy",
            "at least one policy is required",
        )?;
        check(self.n_trials >= 1, "n_trials", "must be at least 1")?;
        check(
            self.cell_edge_fraction > 0.0 && self.cell_edge_fraction <= 1.0,
            "cell_edge_fraction",
            "must lie in (0, 1]",
        )?;
        check(
            self.ccdf_r_step > 0.0 && self.ccdf_r_step.is_finite(),
            "ccdf_r_step",
            "must be positive",
        )?;
        check(
            self.ccdf_r_max >= 0.0 && self.ccdf_r_max.is_finite(),
            "ccdf_r_max",
            "must be non-negative",
        )?;
        self.propagation(self.sigma_s_db[0]).validate()?;
        self.air().validate()?;
        self.policy_params().validate()
    }

    pub fn propagation(&self, sigma_s_db: f64) -> PropagationParams {
        PropagationParams {
            alpha: self.alpha,
            d0: self.d0,
            sigma_s_db,
            m_serving: self.m_serving,
            m_interfering: self.m_interfering,
        }
    }

    pub fn air(&self) -> AirInterface {
        AirInterface::from_db(
            self.gamma_db,
            self.spreading_factor as f64,
            self.chip_factor,
        )
    }

    pub fn policy_params(&self) -> PolicyParams {
        PolicyParams {
            epsilon_hat: self.epsilon_hat,
            pilot_fraction: self.pilot_fraction,
        }
    }

    pub fn num_mobiles(&self, km: f64) -> usize {
        ((km * self.num_base_stations as f64).round() as usize).max(1)
    }

    pub fn ccdf_grid(&self) -> Vec<f64> {
        let steps = (self.ccdf_r_max / self.ccdf_r_step).round() as usize;
        (0..=steps).map(|i| i as f64 * self.ccdf_r_step).collect()
    }

    /// Resolves one operating point.
    pub fn scenario(&self, km: f64, r_bs: f64, sigma_s_db: f64) -> Result<Scenario> {
        self.validate()?;
        let disk = Disk::new(self.r_net)?;
        let scenario = Scenario {
            km,
            disk,
            bs_spec: PlacementSpec::new(self.num_base_stations, r_bs),
            mobile_spec: PlacementSpec::new(self.num_mobiles(km), self.r_m),
            propagation: self.propagation(sigma_s_db),
            air: self.air(),
            spreading_factor: self.spreading_factor,
            policy: self.policy_params(),
            policies: self.policies.clone(),
            n_trials: self.n_trials,
            master_seed: self.master_seed,
            cell_edge_fraction: self.cell_edge_fraction,
            bootstrap_resamples: self.bootstrap_resamples,
            ccdf_grid: self.ccdf_grid(),
        };
        scenario
            .bs_spec
            .validate(&disk)
            .map_err(|e| e.renamed("r_bs"))?;
        scenario
            .mobile_spec
            .validate(&disk)
            .map_err(|e| e.renamed("r_m"))?;
        scenario.propagation.validate()?;
        Ok(scenario)
    }

    /// The swept parameter and its values.
    pub fn sweep_axis(&self) -> (SweepAxis, Vec<f64>) {
        if self.rbs_list.is_empty() {
            (SweepAxis::KOverM, self.km_list.clone())
        } else {
            (SweepAxis::ExclusionRadius, self.rbs_list.clone())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepAxis {
    KOverM,
    ExclusionRadius,
}

/// One fully resolved operating point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub km: f64,
    pub disk: Disk,
    pub bs_spec: PlacementSpec,
    pub mobile_spec: PlacementSpec,
    pub propagation: PropagationParams,
    pub air: AirInterface,
    pub spreading_factor: usize,
    pub policy: PolicyParams,
    pub policies: Vec<PolicyKind>,
    pub n_trials: usize,
    pub master_seed: u64,
    pub cell_edge_fraction: f64,
    pub bootstrap_resamples: usize,
    pub ccdf_grid: Vec<f64>,
}

impl Scenario {
    pub fn num_base_stations(&self) -> usize {
        self.bs_spec.count
    }

    pub fn num_mobiles(&self) -> usize {
        self.mobile_spec.count
    }

    /// Identifies the geometry: trials of two scenarios that share it (and
    /// differ only in shadowing spread, path loss or policy) draw the same
    /// placements and the same underlying normal variates.
    fn geometry_key(&self) -> [u64; 5] {
        [
            self.bs_spec.count as u64,
            self.mobile_spec.count as u64,
            self.bs_spec.exclusion_radius.to_bits(),
            self.mobile_spec.exclusion_radius.to_bits(),
            self.disk.radius().to_bits(),
        ]
    }

    pub fn trial_seed(&self, trial_index: usize) -> u64 {
        let mut path = self.geometry_key().to_vec();
        path.push(trial_index as u64);
        rng::derive_seed(self.master_seed, &path)
    }

    fn bootstrap_seed(&self, policy: PolicyKind) -> u64 {
        let mut path = self.geometry_key().to_vec();
        path.extend([
            rng::BOOTSTRAP,
            policy as u64,
            self.propagation.sigma_s_db.to_bits(),
        ]);
        rng::derive_seed(self.master_seed, &path)
    }
}

/// Every intermediate product of one trial.
#[derive(Debug, Clone)]
pub struct TrialDetail {
    pub seed: u64,
    pub network: NetworkRealization,
    pub links: LinkTable,
    pub assignment: Assignment,
    pub required: RequiredThresholds,
    pub outcomes: Vec<PolicyOutcome>,
}

impl TrialDetail {
    pub fn outcome(&self, kind: PolicyKind) -> Option<&PolicyOutcome> {
        self.outcomes.iter().find(|o| o.kind == kind)
    }

    pub fn records(&self, kind: PolicyKind) -> Option<Vec<MobileRecord>> {
        let out = self.outcome(kind)?;
        Some(
            out.mobiles
                .iter()
                .enumerate()
                .map(|(j, o)| MobileRecord {
                    rate: o.rate,
                    serving_distance: self
                        .assignment
                        .serving(j)
                        .map(|i| self.links.distance(i, j)),
                })
                .collect(),
        )
    }
}

/// Runs the whole pipeline from an explicit trial seed.
pub fn simulate_with_seed(scenario: &Scenario, seed: u64) -> Result<TrialDetail> {
    let mut placement = rng::stream(seed, &[rng::PLACEMENT]);
    let network = draw_network(
        &scenario.disk,
        &scenario.bs_spec,
        &scenario.mobile_spec,
        &mut placement,
    )?;
    let mut shadowing = rng::stream(seed, &[rng::SHADOWING]);
    let mut links = build_link_table(&network, &scenario.propagation, &mut shadowing)?;
    let assignment = associate(&links, scenario.spreading_factor);
    links.assign_nakagami(&assignment, &scenario.propagation);
    let required = RequiredThresholds::compute(
        &assignment,
        &links,
        &scenario.air,
        &scenario.policy,
        scenario.propagation.m_serving,
    )?;
    let outcomes = scenario
        .policies
        .iter()
        .map(|&kind| policy::apply(kind, &required, &assignment, &scenario.policy))
        .collect();
    Ok(TrialDetail {
        seed,
        network,
        links,
        assignment,
        required,
        outcomes,
    })
}

pub fn simulate(scenario: &Scenario, trial_index: usize) -> Result<TrialDetail> {
    simulate_with_seed(scenario, scenario.trial_seed(trial_index))
}

/// Per-mobile records of one trial, for every configured policy.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecords {
    pub trial_index: usize,
    pub seed: u64,
    pub by_policy: Vec<(PolicyKind, Vec<MobileRecord>)>,
}

pub fn run_trial(scenario: &Scenario, trial_index: usize) -> Result<TrialRecords> {
    let detail = simulate(scenario, trial_index)?;
    let by_policy = scenario
        .policies
        .iter()
        .map(|&k| (k, detail.records(k).expect("policy was applied")))
        .collect();
    Ok(TrialRecords {
        trial_index,
        seed: detail.seed,
        by_policy,
    })
}

/// A trial that could not be completed.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialFailure {
    pub trial_index: usize,
    pub seed: u64,
    pub error: Error,
}

/// Pools one policy's records across completed trials.
pub fn aggregate(
    trials: &[TrialRecords],
    scenario: &Scenario,
    policy: PolicyKind,
) -> Result<AggregateStats> {
    let samples = trials
        .iter()
        .filter_map(|t| {
            t.by_policy
                .iter()
                .find(|(k, _)| *k == policy)
                .map(|(_, recs)| TrialSample::new(t.trial_index, t.seed, recs.clone()))
        })
        .collect();
    AggregateStats::build(
        samples,
        stats::AggregateSettings {
            policy,
            mobiles_per_trial: scenario.num_mobiles(),
            area: scenario.disk.area(),
            epsilon_hat: scenario.policy.epsilon_hat,
            cell_edge_fraction: scenario.cell_edge_fraction,
            ccdf_grid: &scenario.ccdf_grid,
            bootstrap_resamples: scenario.bootstrap_resamples,
            bootstrap_seed: scenario.bootstrap_seed(policy),
        },
    )
}

#[derive(Debug, Clone)]
pub struct PointResult {
    pub scenario: Scenario,
    /// One entry per configured policy, in configuration order.
    pub stats: Vec<AggregateStats>,
    pub failures: Vec<TrialFailure>,
}

impl PointResult {
    pub fn stats(&self, kind: PolicyKind) -> Option<&AggregateStats> {
        self.stats.iter().find(|s| s.policy == kind)
    }
}

fn run_trials(scenario: &Scenario) -> Vec<Result<TrialRecords>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..scenario.n_trials)
            .into_par_iter()
            .map(|i| run_trial(scenario, i))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..scenario.n_trials)
            .map(|i| run_trial(scenario, i))
            .collect()
    }
}

/// Runs all trials of one scenario and aggregates every policy.
///
/// Infeasible placements abort only their own trial; they are reported in
/// `failures`. Any other error aborts the point.
pub fn run_point(scenario: &Scenario) -> Result<PointResult> {
    let mut completed = Vec::with_capacity(scenario.n_trials);
    let mut failures = Vec::new();
    for (i, r) in run_trials(scenario).into_iter().enumerate() {
        match r {
            Ok(t) => completed.push(t),
            Err(e @ Error::PlacementInfeasible { .. }) => failures.push(TrialFailure {
                trial_index: i,
                seed: scenario.trial_seed(i),
                error: e,
            }),
            Err(e) => return Err(e),
        }
    }
    if completed.is_empty() {
        return Err(failures
            .into_iter()
            .next()
            .map_or(Error::EmptyAggregate, |f| f.error));
    }
    let stats = scenario
        .policies
        .iter()
        .map(|&k| aggregate(&completed, scenario, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(PointResult {
        scenario: scenario.clone(),
        stats,
        failures,
    })
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub axis: SweepAxis,
    pub swept_value: f64,
    pub sigma_s_db: f64,
    pub result: PointResult,
}

/// Runs every (swept value, shadowing setting) point of the configuration.
pub fn sweep(config: &ExperimentConfig) -> Result<Vec<SweepPoint>> {
    let (axis, values) = config.sweep_axis();
    let mut out = Vec::with_capacity(values.len() * config.sigma_s_db.len());
    for &value in &values {
        for &sigma in &config.sigma_s_db {
            let (km, r_bs) = match axis {
                SweepAxis::KOverM => (value, config.r_bs),
                SweepAxis::ExclusionRadius => (config.km_list[0], value),
            };
            let scenario = config.scenario(km, r_bs, sigma)?;
            out.push(SweepPoint {
                axis,
                swept_value: value,
                sigma_s_db: sigma,
                result: run_point(&scenario)?,
            });
        }
    }
    Ok(out)
}

/// The first configured point: first K/M, base r_bs, first shadowing value.
pub fn single(config: &ExperimentConfig) -> Result<SweepPoint> {
    let sigma = config.sigma_s_db[0];
    let km = config.km_list[0];
    let scenario = config.scenario(km, config.r_bs, sigma)?;
    Ok(SweepPoint {
        axis: SweepAxis::KOverM,
        swept_value: km,
        sigma_s_db: sigma,
        result: run_point(&scenario)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::outage::{invert_outage_beta0, Interference};
    use approx::assert_relative_eq;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            num_base_stations: 10,
            km_list: vec![4.0],
            policies: PolicyKind::ALL.to_vec(),
            n_trials: 6,
            ..Default::default()
        }
    }

    #[test]
    fn trials_are_reproducible() {
        let s = small_config().scenario(4.0, 0.25, 8.0).unwrap();
        assert_eq!(run_trial(&s, 3).unwrap(), run_trial(&s, 3).unwrap());
        assert_ne!(run_trial(&s, 3).unwrap(), run_trial(&s, 4).unwrap());
        // replay from the recorded seed
        let t = run_trial(&s, 2).unwrap();
        let replay = simulate_with_seed(&s, t.seed).unwrap();
        assert_eq!(
            replay.records(PolicyKind::RateControl).unwrap(),
            t.by_policy[0].1
        );
    }

    #[test]
    fn single_link_chain() {
        let cfg = ExperimentConfig {
            num_base_stations: 1,
            km_list: vec![1.0],
            sigma_s_db: vec![0.0],
            policies: PolicyKind::ALL.to_vec(),
            n_trials: 1,
            ..Default::default()
        };
        let s = cfg.scenario(1.0, 0.25, 0.0).unwrap();
        let d = simulate(&s, 0).unwrap();
        let dist = d.network.base_stations[0].distance(&d.network.mobiles[0]);
        let w = dist.max(cfg.d0).powf(-cfg.alpha);
        let intf = Interference::new(3, vec![], cfg.air()).unwrap();
        let beta0 = invert_outage_beta0(0.1, &intf).unwrap();
        let beta = beta0 * 0.9 * w / 3.0;
        let t = run_trial(&s, 0).unwrap();
        for (_, recs) in &t.by_policy {
            assert_eq!(recs.len(), 1);
            assert_relative_eq!(recs[0].rate, (1.0 + beta).log2(), max_relative = 1e-12);
            assert_relative_eq!(recs[0].serving_distance.unwrap(), dist);
        }
    }

    #[test]
    fn point_accounting() {
        let s = small_config().scenario(4.0, 0.25, 8.0).unwrap();
        let p = run_point(&s).unwrap();
        for st in &p.stats {
            assert_eq!(st.num_records(), 40 * 6);
            assert!((0.0..=1.0).contains(&st.denial_fraction));
            assert_eq!(st.tau_from_mean(), st.transmission_capacity);
            assert!(st.ccdf.windows(2).all(|w| w[1].1 <= w[0].1));
            assert!(st.ccdf.iter().all(|p| (0.0..=1.0).contains(&p.1)));
        }
    }

    #[test]
    fn infeasible_trials_are_recorded() {
        let cfg = ExperimentConfig {
            num_base_stations: 200,
            r_bs: 0.6,
            n_trials: 2,
            ..small_config()
        };
        let s = cfg.scenario(1.0, 0.6, 0.0).unwrap();
        assert!(matches!(
            run_point(&s),
            Err(Error::PlacementInfeasible { .. })
        ));
    }

    #[test]
    fn sweep_structure() {
        let cfg = ExperimentConfig {
            km_list: vec![4.0, 8.0, 16.0],
            sigma_s_db: vec![8.0],
            n_trials: 2,
            num_base_stations: 8,
            ..small_config()
        };
        let pts = sweep(&cfg).unwrap();
        assert_eq!(pts.len(), 3);
        let rows: usize = pts.iter().map(|p| p.result.stats.len()).sum();
        assert_eq!(rows, 6);
        let densities: Vec<f64> = pts.iter().map(|p| p.result.stats[0].density).collect();
        assert!(densities.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn geometry_shared_across_shadowing() {
        let cfg = small_config();
        let a = simulate(&cfg.scenario(4.0, 0.25, 0.0).unwrap(), 1).unwrap();
        let b = simulate(&cfg.scenario(4.0, 0.25, 8.0).unwrap(), 1).unwrap();
        assert_eq!(a.network, b.network);
    }
}
