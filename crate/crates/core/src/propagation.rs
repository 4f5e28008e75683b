//! Path loss, shadowing and per-link channel gains.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::association::Assignment;
use crate::error::{Error, Result};
use crate::spatial::NetworkRealization;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropagationParams {
    /// Path-loss exponent α.
    pub alpha: f64,
    /// Reference distance d0; distances below it are clamped to it.
    pub d0: f64,
    /// Shadowing standard deviation in dB. Zero disables shadowing.
    pub sigma_s_db: f64,
    /// Nakagami parameter of serving links (integer for the closed form).
    pub m_serving: u32,
    /// Nakagami parameter of interfering links.
    pub m_interfering: f64,
}

impl Default for PropagationParams {
    fn default() -> Self {
        Self {
            alpha: 3.0,
            d0: 0.001,
            sigma_s_db: 8.0,
            m_serving: 3,
            m_interfering: 1.0,
        }
    }
}

impl PropagationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 2.0) {
            return Err(Error::invalid(
                "alpha",
                format!("must be >= 2, got {}", self.alpha),
            ));
        }
        if !(self.d0.is_finite() && self.d0 > 0.0) {
            return Err(Error::invalid(
                "d0",
                format!("must be positive, got {}", self.d0),
            ));
        }
        if !(self.sigma_s_db.is_finite() && self.sigma_s_db >= 0.0) {
            return Err(Error::invalid(
                "sigma_s_dB",
                format!("must be non-negative, got {}", self.sigma_s_db),
            ));
        }
        if self.m_serving < 1 {
            return Err(Error::invalid("m_serving", "must be a positive integer"));
        }
        if !(self.m_interfering.is_finite() && self.m_interfering >= 0.5) {
            return Err(Error::invalid(
                "m_interfering",
                format!("must be >= 0.5, got {}", self.m_interfering),
            ));
        }
        Ok(())
    }
}

/// Power-law attenuation `(d/d0)^-α`, held at 1 inside the reference distance.
pub fn path_loss(d: f64, params: &PropagationParams) -> f64 {
    if d <= params.d0 {
        1.0
    } else {
        (d / params.d0).powf(-params.alpha)
    }
}

/// Dense `M × K` table of link quantities, row-major by base station.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkTable {
    num_base_stations: usize,
    num_mobiles: usize,
    distance: Vec<f64>,
    shadow_db: Vec<f64>,
    gain: Vec<f64>,
    nakagami: Option<Vec<f64>>,
}

impl LinkTable {
    /// Builds a table directly from channel gains, with shadowing and
    /// distance filled in as zero. Handy for constructed test cells.
    pub fn from_gains(num_base_stations: usize, num_mobiles: usize, gain: Vec<f64>) -> Self {
        assert_eq!(gain.len(), num_base_stations * num_mobiles);
        assert!(gain.iter().all(|w| w.is_finite() && *w > 0.0));
        Self {
            num_base_stations,
            num_mobiles,
            distance: vec![0.0; gain.len()],
            shadow_db: vec![0.0; gain.len()],
            gain,
            nakagami: None,
        }
    }

    pub fn num_base_stations(&self) -> usize {
        self.num_base_stations
    }

    pub fn num_mobiles(&self) -> usize {
        self.num_mobiles
    }

    fn idx(&self, bs: usize, mobile: usize) -> usize {
        debug_assert!(bs < self.num_base_stations && mobile < self.num_mobiles);
        bs * self.num_mobiles + mobile
    }

    pub fn distance(&self, bs: usize, mobile: usize) -> f64 {
        self.distance[self.idx(bs, mobile)]
    }

    pub fn shadow_db(&self, bs: usize, mobile: usize) -> f64 {
        self.shadow_db[self.idx(bs, mobile)]
    }

    /// Channel gain `w = 10^(ξ/10) · d^-α` (distance clamped at d0).
    pub fn gain(&self, bs: usize, mobile: usize) -> f64 {
        self.gain[self.idx(bs, mobile)]
    }

    /// Nakagami parameter of the link, available once
    /// [`assign_nakagami`](Self::assign_nakagami) has run.
    pub fn nakagami(&self, bs: usize, mobile: usize) -> Option<f64> {
        self.nakagami.as_ref().map(|m| m[self.idx(bs, mobile)])
    }

    pub fn shadow_samples(&self) -> &[f64] {
        &self.shadow_db
    }

    /// Sets `m_serving` on each serving link and `m_interfering` everywhere else.
    pub fn assign_nakagami(&mut self, assignment: &Assignment, params: &PropagationParams) {
        let mut m = vec![params.m_interfering; self.gain.len()];
        for (mobile, serving) in assignment.serving_stations().enumerate() {
            if let Some(bs) = serving {
                m[self.idx(bs, mobile)] = f64::from(params.m_serving);
            }
        }
        self.nakagami = Some(m);
    }

    /// Writes `i,j,d,xi,w` rows (1-based indices).
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "i,j,d,xi,w")?;
        for i in 0..self.num_base_stations {
            for j in 0..self.num_mobiles {
                let k = self.idx(i, j);
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    i + 1,
                    j + 1,
                    self.distance[k],
                    self.shadow_db[k],
                    self.gain[k]
                )?;
            }
        }
        Ok(())
    }
}

/// Computes distances, draws i.i.d. log-normal shadowing and assembles gains.
///
/// One standard-normal draw is consumed per link regardless of `sigma_s_db`,
/// so runs that differ only in the shadowing spread see the same underlying
/// normal variates.
pub fn build_link_table<R: Rng + ?Sized>(
    net: &NetworkRealization,
    params: &PropagationParams,
    rng: &mut R,
) -> Result<LinkTable> {
    params.validate()?;
    let m = net.base_stations.len();
    let k = net.mobiles.len();
    let mut distance = Vec::with_capacity(m * k);
    let mut shadow_db = Vec::with_capacity(m * k);
    let mut gain = Vec::with_capacity(m * k);
    let near_field = params.d0.powf(-params.alpha);

    for bs in &net.base_stations {
        for mobile in &net.mobiles {
            let d = bs.distance(mobile);
            let z: f64 = rng.sample(StandardNormal);
            let xi = params.sigma_s_db * z;
            distance.push(d);
            shadow_db.push(xi);
            gain.push(10f64.powf(xi / 10.0) * near_field * path_loss(d, params));
        }
    }

    Ok(LinkTable {
        num_base_stations: m,
        num_mobiles: k,
        distance,
        shadow_db,
        gain,
        nakagami: None,
    })
}
