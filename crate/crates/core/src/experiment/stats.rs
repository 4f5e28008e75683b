//! Pooled rate statistics and trial-level bootstrap.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::policy::PolicyKind;
use crate::rng;

/// One mobile's contribution to the rate statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MobileRecord {
    pub rate: f64,
    /// Distance to the serving station; `None` if denied.
    pub serving_distance: Option<f64>,
}

impl MobileRecord {
    pub fn served(&self) -> bool {
        self.serving_distance.is_some()
    }
}

/// All records of one policy in one completed trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSample {
    pub trial_index: usize,
    pub seed: u64,
    pub records: Vec<MobileRecord>,
    rate_sum: f64,
}

impl TrialSample {
    pub fn new(trial_index: usize, seed: u64, records: Vec<MobileRecord>) -> Self {
        let rate_sum = records.iter().map(|r| r.rate).sum();
        Self {
            trial_index,
            seed,
            records,
            rate_sum,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    MeanRate,
    TransmissionCapacity,
    CellEdgeMean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateStats {
    pub policy: PolicyKind,
    pub n_trials: usize,
    pub mobiles_per_trial: usize,
    /// λ = K / A_net.
    pub density: f64,
    pub epsilon_hat: f64,
    pub cell_edge_fraction: f64,
    pub mean_rate: f64,
    pub mean_rate_se: f64,
    pub transmission_capacity: f64,
    pub transmission_capacity_se: f64,
    pub cell_edge_mean_rate: f64,
    pub cell_edge_se: f64,
    pub denial_fraction: f64,
    /// (r, P[R > r]) on the configured grid.
    pub ccdf: Vec<(f64, f64)>,
    /// Completed trials, sorted by trial index.
    pub trials: Vec<TrialSample>,
    bootstrap_resamples: usize,
    bootstrap_seed: u64,
}

pub(crate) struct AggregateSettings<'a> {
    pub policy: PolicyKind,
    pub mobiles_per_trial: usize,
    pub area: f64,
    pub epsilon_hat: f64,
    pub cell_edge_fraction: f64,
    pub ccdf_grid: &'a [f64],
    pub bootstrap_resamples: usize,
    pub bootstrap_seed: u64,
}

/// τ = λ (1 − ε̂) E[R]
pub fn transmission_capacity(density: f64, epsilon_hat: f64, mean_rate: f64) -> f64 {
    density * (1.0 - epsilon_hat) * mean_rate
}

impl AggregateStats {
    pub(crate) fn build(mut trials: Vec<TrialSample>, s: AggregateSettings<'_>) -> Result<Self> {
        if trials.is_empty() {
            return Err(Error::EmptyAggregate);
        }
        trials.sort_by_key(|t| t.trial_index);
        let total: usize = trials.iter().map(|t| t.records.len()).sum();
        let denied = trials
            .iter()
            .flat_map(|t| &t.records)
            .filter(|r| !r.served())
            .count();

        let mut rates: Vec<f64> = trials
            .iter()
            .flat_map(|t| t.records.iter().map(|r| r.rate))
            .collect();
        rates.sort_by(f64::total_cmp);
        let ccdf = s
            .ccdf_grid
            .iter()
            .map(|&r| {
                (
                    r,
                    (rates.len() - rates.partition_point(|&x| x <= r)) as f64 / rates.len() as f64,
                )
            })
            .collect();

        let mut stats = Self {
            policy: s.policy,
            n_trials: trials.len(),
            mobiles_per_trial: s.mobiles_per_trial,
            density: s.mobiles_per_trial as f64 / s.area,
            epsilon_hat: s.epsilon_hat,
            cell_edge_fraction: s.cell_edge_fraction,
            mean_rate: 0.0,
            mean_rate_se: 0.0,
            transmission_capacity: 0.0,
            transmission_capacity_se: 0.0,
            cell_edge_mean_rate: 0.0,
            cell_edge_se: 0.0,
            denial_fraction: denied as f64 / total as f64,
            ccdf,
            trials,
            bootstrap_resamples: s.bootstrap_resamples,
            bootstrap_seed: s.bootstrap_seed,
        };
        let all: Vec<usize> = (0..stats.trials.len()).collect();
        stats.mean_rate = stats.evaluate(Statistic::MeanRate, &all);
        stats.transmission_capacity = stats.tau_from_mean();
        stats.cell_edge_mean_rate = stats.evaluate(Statistic::CellEdgeMean, &all);
        stats.mean_rate_se = stats.bootstrap_se(Statistic::MeanRate);
        stats.transmission_capacity_se = stats.bootstrap_se(Statistic::TransmissionCapacity);
        stats.cell_edge_se = stats.bootstrap_se(Statistic::CellEdgeMean);
        Ok(stats)
    }

    /// τ recomputed from λ, ε̂ and E[R].
    pub fn tau_from_mean(&self) -> f64 {
        transmission_capacity(self.density, self.epsilon_hat, self.mean_rate)
    }

    pub fn records(&self) -> impl Iterator<Item = &MobileRecord> {
        self.trials.iter().flat_map(|t| &t.records)
    }

    pub fn num_records(&self) -> usize {
        self.trials.iter().map(|t| t.records.len()).sum()
    }

    /// Empirical P[R ≥ r] over all pooled records.
    pub fn fraction_at_least(&self, r: f64) -> f64 {
        let hits = self.records().filter(|rec| rec.rate >= r).count();
        hits as f64 / self.num_records() as f64
    }

    /// Value of `stat` over the multiset of trials given by `indices`.
    pub fn evaluate(&self, stat: Statistic, indices: &[usize]) -> f64 {
        match stat {
            Statistic::MeanRate => self.mean_over(indices),
            Statistic::TransmissionCapacity => {
                transmission_capacity(self.density, self.epsilon_hat, self.mean_over(indices))
            }
            Statistic::CellEdgeMean => self.cell_edge_over(indices),
        }
    }

    fn mean_over(&self, indices: &[usize]) -> f64 {
        let (sum, count) = indices.iter().fold((0.0, 0usize), |(s, c), &i| {
            let t = &self.trials[i];
            (s + t.rate_sum, c + t.records.len())
        });
        sum / count as f64
    }

    fn cell_edge_over(&self, indices: &[usize]) -> f64 {
        let mut pool: Vec<(f64, f64)> = indices
            .iter()
            .flat_map(|&i| &self.trials[i].records)
            .filter_map(|r| r.serving_distance.map(|d| (d, r.rate)))
            .collect();
        if pool.is_empty() {
            return f64::NAN;
        }
        let n =
            ((self.cell_edge_fraction * pool.len() as f64).ceil() as usize).clamp(1, pool.len());
        mean_of_farthest(&mut pool, n)
    }

    /// Number of served records that make up the cell-edge pool.
    pub fn cell_edge_pool_size(&self) -> usize {
        let served = self.records().filter(|r| r.served()).count();
        (self.cell_edge_fraction * served as f64).ceil() as usize
    }

    fn resample_indices<R: Rng>(&self, rng: &mut R) -> Vec<usize> {
        let n = self.trials.len();
        (0..n).map(|_| rng.random_range(0..n)).collect()
    }

    /// Standard deviation of `stat` across trial-level bootstrap resamples.
    pub fn bootstrap_se(&self, stat: Statistic) -> f64 {
        let mut s = rng::stream(self.bootstrap_seed, &[stat as u64]);
        let values: Vec<f64> = (0..self.bootstrap_resamples)
            .map(|_| {
                let idx = self.resample_indices(&mut s);
                self.evaluate(stat, &idx)
            })
            .collect();
        sample_sd(&values)
    }

    fn same_trials(&self, other: &AggregateStats) -> bool {
        self.trials.len() == other.trials.len()
            && self
                .trials
                .iter()
                .zip(&other.trials)
                .all(|(a, b)| a.trial_index == b.trial_index && a.seed == b.seed)
    }
}

/// Bootstrap standard error of `stat_a(a) − stat_b(b)`.
///
/// When both aggregates come from the same trials (same indices and seeds)
/// the trials are resampled jointly, so shared geometry cancels; otherwise
/// each side is resampled independently.
pub fn bootstrap_gap_se(
    a: &AggregateStats,
    stat_a: Statistic,
    b: &AggregateStats,
    stat_b: Statistic,
    resamples: usize,
    seed: u64,
) -> f64 {
    let paired = a.same_trials(b);
    let mut s = rng::stream(seed, &[rng::BOOTSTRAP, stat_a as u64, stat_b as u64]);
    let values: Vec<f64> = (0..resamples)
        .map(|_| {
            let ia = a.resample_indices(&mut s);
            let ib = if paired {
                ia.clone()
            } else {
                b.resample_indices(&mut s)
            };
            a.evaluate(stat_a, &ia) - b.evaluate(stat_b, &ib)
        })
        .collect();
    sample_sd(&values)
}

fn mean_of_farthest(pool: &mut [(f64, f64)], n: usize) -> f64 {
    if n < pool.len() {
        pool.select_nth_unstable_by(n - 1, |x, y| y.0.total_cmp(&x.0));
    }
    pool[..n].iter().map(|p| p.1).sum::<f64>() / n as f64
}

fn sample_sd(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}
