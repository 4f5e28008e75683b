//! Statistical check of the closed-form outage kernel against direct fading
//! simulation.
//!
//! Random contexts cover the regime the simulator actually visits: integer
//! serving parameter 1 to 3, up to 49 Rayleigh interferers and normalized
//! powers spread over six decades. The threshold for each context is chosen
//! by inverting the kernel at a random target, so outage probabilities across
//! the whole of (0, 1) are exercised rather than just the tails.

use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::outage::{
    fading_oracle, invert_outage, outage_probability, AirInterface, Interference, Interferer,
    OutageContext,
};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GateSettings {
    pub contexts: usize,
    pub draws: usize,
    /// Allowed deviation in oracle standard errors.
    pub tolerance_se: f64,
    /// Share of contexts that must fall within tolerance.
    pub required_fraction: f64,
    pub seed: u64,
    pub air: AirInterface,
}

impl Default for GateSettings {
    fn default() -> Self {
        Self {
            contexts: 200,
            draws: 100_000,
            tolerance_se: 4.0,
            required_fraction: 0.95,
            seed: 0x0AC1E,
            air: AirInterface::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GateCase {
    pub m0: u32,
    pub interferers: usize,
    pub beta: f64,
    pub closed_form: f64,
    pub oracle: f64,
    pub standard_error: f64,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateReport {
    pub settings: GateSettings,
    pub cases: Vec<GateCase>,
}

impl GateReport {
    pub fn within(&self) -> usize {
        self.cases.iter().filter(|c| c.within).count()
    }

    pub fn fraction_within(&self) -> f64 {
        self.within() as f64 / self.cases.len().max(1) as f64
    }

    pub fn passed(&self) -> bool {
        !self.cases.is_empty() && self.fraction_within() >= self.settings.required_fraction
    }
}

/// Draws one gate context: (serving power, interference, target outage).
pub fn random_context<R: Rng + ?Sized>(
    rng: &mut R,
    air: AirInterface,
) -> Result<(OutageContext, f64)> {
    let decades = |rng: &mut R| 10f64.powf(6.0 * rng.random::<f64>() - 3.0);
    let m0 = rng.random_range(1..=3u32);
    let count = rng.random_range(0..=49usize);
    let interferers = (0..count)
        .map(|_| Interferer {
            omega: decades(rng),
            m: 1.0,
        })
        .collect();
    let omega0 = decades(rng);
    let target = rng.random_range(0.01..=0.99);
    let ctx = OutageContext::new(omega0, Interference::new(m0, interferers, air)?)?;
    Ok((ctx, target))
}

fn run_case(settings: &GateSettings, index: usize) -> Result<GateCase> {
    let mut rng = rng::stream(settings.seed, &[index as u64]);
    let (ctx, target) = random_context(&mut rng, settings.air)?;
    let beta = invert_outage(target, &ctx)?;
    let closed_form = outage_probability(beta, &ctx)?;
    let estimate = fading_oracle(beta, &ctx, settings.draws, &mut rng)?;
    Ok(GateCase {
        m0: ctx.interference.m0(),
        interferers: ctx.interference.interferers().len(),
        beta,
        closed_form,
        oracle: estimate.epsilon,
        standard_error: estimate.standard_error,
        within: (closed_form - estimate.epsilon).abs()
            <= settings.tolerance_se * estimate.standard_error,
    })
}

/// Runs every gate context; cases are independent and run in parallel when
/// the `parallel` feature is on.
pub fn oracle_gate(settings: &GateSettings) -> Result<GateReport> {
    #[cfg(feature = "parallel")]
    let cases = {
        use rayon::prelude::*;
        (0..settings.contexts)
            .into_par_iter()
            .map(|i| run_case(settings, i))
            .collect::<Result<Vec<_>>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let cases = (0..settings.contexts)
        .map(|i| run_case(settings, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(GateReport {
        settings: *settings,
        cases,
    })
}
