//! Browser demo: draw a network, inspect one mobile's outage curve, and
//! compare the rate distributions of the two policies.
//!
//! [`Demo`] holds the plain Rust logic and is what the tests exercise; the
//! `wasm` module wraps it for JavaScript and returns JSON strings.

use cdma_downlink::experiment::{run_point, simulate, ExperimentConfig, Scenario, TrialDetail};
use cdma_downlink::outage::{outage_probability, OutageContext};
use cdma_downlink::policy::{mobile_interference, PolicyKind};
use cdma_downlink::{Error, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemoParams {
    pub km: f64,
    pub r_bs: f64,
    pub sigma_s_db: f64,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for DemoParams {
    fn default() -> Self {
        Self {
            km: 4.0,
            r_bs: 0.25,
            sigma_s_db: 8.0,
            alpha: 3.0,
            seed: 1,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Station {
    pub x: f64,
    pub y: f64,
    pub load: usize,
}

#[derive(Debug, Serialize)]
pub struct Mobile {
    pub x: f64,
    pub y: f64,
    /// 0-based serving station, `null` when denied.
    pub serving: Option<usize>,
    pub rate_control: f64,
    pub power_control: f64,
}

#[derive(Debug, Serialize)]
pub struct Snapshot {
    pub radius: f64,
    pub stations: Vec<Station>,
    pub mobiles: Vec<Mobile>,
    pub denied: usize,
}

#[derive(Debug, Serialize)]
pub struct OutageCurve {
    pub policy: PolicyKind,
    pub beta_star: f64,
    pub phi: f64,
    pub rate: f64,
    /// (β, ε(β)) pairs on a log grid around β*.
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Serialize)]
pub struct MobileOutage {
    pub mobile: usize,
    pub serving: usize,
    pub distance: f64,
    pub epsilon_hat: f64,
    pub curves: Vec<OutageCurve>,
}

#[derive(Debug, Serialize)]
pub struct RateCcdf {
    pub policy: PolicyKind,
    pub trials: usize,
    pub mean_rate: f64,
    pub transmission_capacity: f64,
    pub points: Vec<(f64, f64)>,
}

pub struct Demo {
    config: ExperimentConfig,
    scenario: Scenario,
    detail: TrialDetail,
}

impl Demo {
    pub fn new(p: DemoParams) -> Result<Self> {
        let config = ExperimentConfig {
            km_list: vec![p.km],
            r_bs: p.r_bs,
            sigma_s_db: vec![p.sigma_s_db],
            alpha: p.alpha,
            master_seed: p.seed,
            policies: PolicyKind::ALL.to_vec(),
            ccdf_r_max: 6.0,
            bootstrap_resamples: 0,
            ..Default::default()
        };
        let scenario = config.scenario(p.km, p.r_bs, p.sigma_s_db)?;
        let detail = simulate(&scenario, 0)?;
        Ok(Self {
            config,
            scenario,
            detail,
        })
    }

    fn rates(&self, kind: PolicyKind, j: usize) -> f64 {
        self.detail.outcome(kind).map_or(0.0, |o| o.mobiles[j].rate)
    }

    pub fn snapshot(&self) -> Snapshot {
        let d = &self.detail;
        Snapshot {
            radius: d.network.disk.radius(),
            stations: d
                .network
                .base_stations
                .iter()
                .enumerate()
                .map(|(i, p)| Station {
                    x: p.x,
                    y: p.y,
                    load: d.assignment.cell_load(i),
                })
                .collect(),
            mobiles: d
                .network
                .mobiles
                .iter()
                .enumerate()
                .map(|(j, p)| Mobile {
                    x: p.x,
                    y: p.y,
                    serving: d.assignment.serving(j),
                    rate_control: self.rates(PolicyKind::RateControl, j),
                    power_control: self.rates(PolicyKind::PowerControl, j),
                })
                .collect(),
            denied: d.assignment.num_denied(),
        }
    }

    /// Index of the mobile closest to `(x, y)`.
    pub fn nearest_mobile(&self, x: f64, y: f64) -> Option<usize> {
        let here = cdma_downlink::spatial::Point::new(x, y);
        self.detail
            .network
            .mobiles
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.distance(&here).total_cmp(&b.1.distance(&here)))
            .map(|(j, _)| j)
    }

    /// ε(β) for a served mobile under each policy's power share. `None` for
    /// denied mobiles, which have no link to evaluate.
    pub fn outage_curve(&self, mobile: usize, points: usize) -> Result<Option<MobileOutage>> {
        let d = &self.detail;
        if mobile >= d.assignment.num_mobiles() {
            return Err(Error::Domain(format!("no mobile {mobile}")));
        }
        let Some(bs) = d.assignment.serving(mobile) else {
            return Ok(None);
        };
        let intf = mobile_interference(
            &d.links,
            &d.assignment,
            mobile,
            &self.scenario.air,
            self.scenario.propagation.m_serving,
        )?
        .expect("served mobile has a context");
        let points = points.max(2);
        let mut curves = Vec::new();
        for out in &d.outcomes {
            let m = out.mobiles[mobile];
            let ctx = OutageContext::new(m.phi * d.links.gain(bs, mobile), intf.clone())?;
            // four decades either side of β*
            let grid = (0..points)
                .map(|i| m.beta * 10f64.powf(-4.0 + 8.0 * i as f64 / (points - 1) as f64));
            let curve = grid
                .map(|beta| Ok((beta, outage_probability(beta, &ctx)?)))
                .collect::<Result<Vec<_>>>()?;
            curves.push(OutageCurve {
                policy: out.kind,
                beta_star: m.beta,
                phi: m.phi,
                rate: m.rate,
                points: curve,
            });
        }
        Ok(Some(MobileOutage {
            mobile,
            serving: bs,
            distance: d.links.distance(bs, mobile),
            epsilon_hat: self.scenario.policy.epsilon_hat,
            curves,
        }))
    }

    /// ccdf of the per-mobile rate over `trials` realizations (the first
    /// being the one on screen).
    pub fn rate_ccdf(&self, trials: usize) -> Result<Vec<RateCcdf>> {
        let config = ExperimentConfig {
            n_trials: trials.max(1),
            ..self.config.clone()
        };
        let scenario = config.scenario(
            self.scenario.km,
            self.config.r_bs,
            self.config.sigma_s_db[0],
        )?;
        let result = run_point(&scenario)?;
        Ok(result
            .stats
            .iter()
            .map(|s| RateCcdf {
                policy: s.policy,
                trials: s.n_trials,
                mean_rate: s.mean_rate,
                transmission_capacity: s.transmission_capacity,
                points: s.ccdf.clone(),
            })
            .collect())
    }
}

#[cfg(target_arch = "wasm32")]
mod wasm {
    use super::*;
    use wasm_bindgen::prelude::*;

    fn js(e: impl std::fmt::Display) -> JsError {
        JsError::new(&e.to_string())
    }

    fn json<T: Serialize>(v: &T) -> Result<String, JsError> {
        serde_json::to_string(v).map_err(js)
    }

    #[wasm_bindgen]
    pub struct NetworkDemo(Demo);

    #[wasm_bindgen]
    impl NetworkDemo {
        #[wasm_bindgen(constructor)]
        pub fn new(
            km: f64,
            r_bs: f64,
            sigma_s_db: f64,
            alpha: f64,
            seed: u32,
        ) -> Result<NetworkDemo, JsError> {
            let p = DemoParams {
                km,
                r_bs,
                sigma_s_db,
                alpha,
                seed: seed.into(),
            };
            Demo::new(p).map(NetworkDemo).map_err(js)
        }

        pub fn snapshot(&self) -> Result<String, JsError> {
            json(&self.0.snapshot())
        }

        #[wasm_bindgen(js_name = nearestMobile)]
        pub fn nearest_mobile(&self, x: f64, y: f64) -> Option<usize> {
            self.0.nearest_mobile(x, y)
        }

        #[wasm_bindgen(js_name = outageCurve)]
        pub fn outage_curve(&self, mobile: usize, points: usize) -> Result<String, JsError> {
            json(&self.0.outage_curve(mobile, points).map_err(js)?)
        }

        #[wasm_bindgen(js_name = rateCcdf)]
        pub fn rate_ccdf(&self, trials: usize) -> Result<String, JsError> {
            json(&self.0.rate_ccdf(trials).map_err(js)?)
        }
    }
}
