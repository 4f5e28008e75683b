//! Conditional outage probability under Nakagami fading.
//!
//! For a mobile whose serving link has integer Nakagami parameter `m0` and
//! normalized power `Ω0`, and whose interferers have powers `Ω_i` and
//! parameters `m_i`, the outage probability at SINR threshold `β` is
//!
//! ```text
//! ε = 1 − e^{−β0 z} Σ_{n<m0} (β0 z)^n Σ_{k≤n} z^{−k} H_k / (n−k)!
//! ```
//!
//! with `z = 1/Γ`, `β0 = β·m0/Ω0` and `H_k` the degree-`k` coefficient of
//! `Π_i Ψ_i^{m_i} (1 − s_i Ψ_i x)^{−m_i}`, where `s_i = hΩ_i/(G m_i)` and
//! `Ψ_i = 1/(1 + β0 s_i)`. Since `ε` depends on `β` and `Ω0` only through
//! `β0`, the inversion works in `β0` and callers rescale.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::Serialize;

use crate::error::{Error, Result};

/// Link-budget constants shared by every mobile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AirInterface {
    /// Γ, linear SNR at unit distance without fading or shadowing.
    pub snr: f64,
    /// G, spreading factor.
    pub spreading_factor: f64,
    /// h, chip factor of asynchronous intercell interference.
    pub chip_factor: f64,
}

impl Default for AirInterface {
    fn default() -> Self {
        Self::from_db(10.0, 16.0, 2.0 / 3.0)
    }
}

impl AirInterface {
    pub fn from_db(snr_db: f64, spreading_factor: f64, chip_factor: f64) -> Self {
        Self {
            snr: 10f64.powf(snr_db / 10.0),
            spreading_factor,
            chip_factor,
        }
    }

    /// h/G, the despreading attenuation of intercell interference.
    pub fn interference_scale(&self) -> f64 {
        self.chip_factor / self.spreading_factor
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.snr.is_finite() && self.snr > 0.0) {
            return Err(Error::invalid("Gamma_dB", "SNR must be finite"));
        }
        if !(self.spreading_factor >= 1.0 && self.spreading_factor.is_finite()) {
            return Err(Error::invalid("G_spread", "must be >= 1"));
        }
        if !(self.chip_factor > 0.0 && self.chip_factor <= 1.0) {
            return Err(Error::invalid("h_chip", "must lie in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interferer {
    /// Ω_i, normalized received power before despreading.
    pub omega: f64,
    /// m_i, Nakagami parameter.
    pub m: f64,
}

/// Everything in an outage context except the serving power Ω0.
#[derive(Debug, Clone, PartialEq)]
pub struct Interference {
    m0: u32,
    air: AirInterface,
    interferers: Vec<Interferer>,
    // (s_i, m_i) with s_i = hΩ_i/(G m_i)
    terms: Vec<(f64, f64)>,
}

impl Interference {
    pub fn new(m0: u32, interferers: Vec<Interferer>, air: AirInterface) -> Result<Self> {
        if m0 == 0 {
            return Err(Error::Domain(
                "serving Nakagami parameter must be a positive integer".into(),
            ));
        }
        air.validate()?;
        if let Some(bad) = interferers
            .iter()
            .find(|i| !(i.omega.is_finite() && i.omega >= 0.0 && i.m.is_finite() && i.m > 0.0))
        {
            return Err(Error::Domain(format!("invalid interferer {bad:?}")));
        }
        let scale = air.interference_scale();
        let terms = interferers
            .iter()
            .map(|i| (scale * i.omega / i.m, i.m))
            .collect();
        Ok(Self {
            m0,
            air,
            interferers,
            terms,
        })
    }

    pub fn m0(&self) -> u32 {
        self.m0
    }

    pub fn air(&self) -> &AirInterface {
        &self.air
    }

    pub fn interferers(&self) -> &[Interferer] {
        &self.interferers
    }

    /// ln Π Ψ_i^{m_i} and the coefficients `H_k / H_0` for `k < m0`.
    fn normalized_series(&self, beta0: f64) -> (f64, Vec<f64>) {
        let degree = self.m0 as usize;
        let mut log_h0 = 0.0;
        let mut poly = vec![0.0; degree];
        poly[0] = 1.0;
        let mut factor = vec![0.0; degree];

        for &(s, m) in &self.terms {
            let x = beta0 * s;
            log_h0 -= m * x.ln_1p();
            if degree == 1 {
                continue;
            }
            // G_{l+1}/G_l = (l + m)/(l + 1) · s Ψ
            let ratio = s / (1.0 + x);
            factor[0] = 1.0;
            for l in 1..degree {
                factor[l] = factor[l - 1] * (l as f64 - 1.0 + m) / l as f64 * ratio;
            }
            for k in (1..degree).rev() {
                let mut acc = poly[k];
                for l in 1..=k {
                    acc += factor[l] * poly[k - l];
                }
                poly[k] = acc;
            }
        }
        (log_h0, poly)
    }

    /// `H_0 … H_{m0−1}` evaluated at `β0`.
    pub fn h_coefficients(&self, beta0: f64) -> Vec<f64> {
        let (log_h0, poly) = self.normalized_series(beta0);
        let h0 = log_h0.exp();
        poly.into_iter().map(|c| c * h0).collect()
    }

    fn ccdf_unclamped(&self, beta0: f64, z: f64) -> f64 {
        let (log_h0, poly) = self.normalized_series(beta0);
        let x = beta0 * z;
        let inv_z = z.recip();
        let mut total = 0.0;
        let mut x_pow = 1.0;
        for n in 0..self.m0 as usize {
            let mut inner = 0.0;
            let mut inv_z_pow = 1.0;
            for (k, hk) in poly.iter().enumerate().take(n + 1) {
                inner += inv_z_pow * hk / factorial(n - k);
                inv_z_pow *= inv_z;
            }
            total += x_pow * inner;
            x_pow *= x;
        }
        (log_h0 - x).exp() * total
    }

    /// Outage probability as a function of β0 alone, at `z = 1/Γ`.
    pub fn outage_at_beta0(&self, beta0: f64) -> f64 {
        1.0 - self
            .ccdf_unclamped(beta0, self.air.snr.recip())
            .clamp(0.0, 1.0)
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutageContext {
    /// Ω0 = φ · w on the serving link.
    pub omega0: f64,
    pub interference: Interference,
}

impl OutageContext {
    pub fn new(omega0: f64, interference: Interference) -> Result<Self> {
        if !(omega0.is_finite() && omega0 > 0.0) {
            return Err(Error::Domain(format!(
                "serving power must be positive, got {omega0}"
            )));
        }
        Ok(Self {
            omega0,
            interference,
        })
    }

    pub fn beta0(&self, beta: f64) -> f64 {
        beta * f64::from(self.interference.m0) / self.omega0
    }
}

/// Complementary cdf of `Z` at `z`, clamped to [0, 1].
pub fn ccdf_z(beta0: f64, z: f64, interference: &Interference) -> Result<f64> {
    if !(beta0 > 0.0 && z > 0.0) {
        return Err(Error::Domain(format!(
            "need beta0 > 0 and z > 0, got {beta0}, {z}"
        )));
    }
    Ok(interference.ccdf_unclamped(beta0, z).clamp(0.0, 1.0))
}

/// Raw series value before clamping, for drift checks.
pub fn ccdf_z_unclamped(beta0: f64, z: f64, interference: &Interference) -> f64 {
    interference.ccdf_unclamped(beta0, z)
}

pub fn outage_probability(beta: f64, ctx: &OutageContext) -> Result<f64> {
    if beta.is_nan() || beta <= 0.0 {
        return Err(Error::Domain(format!(
            "SINR threshold must be positive, got {beta}"
        )));
    }
    let z = ctx.interference.air.snr.recip();
    Ok(1.0 - ccdf_z(ctx.beta0(beta), z, &ctx.interference)?)
}

const BRACKET_DECADES: f64 = 1e12;
const RESIDUAL_TOL: f64 = 1e-12;
const RELATIVE_TOL: f64 = 1e-12;

/// Finds β0 with `ε(β0) = epsilon_hat` by bisection on ln β0.
///
/// The bracket starts at `1/(z + Σ hΩ_i/G)`, the reciprocal of mean noise
/// plus interference, and expands by decades, at most twelve each way.
pub fn invert_outage_beta0(epsilon_hat: f64, interference: &Interference) -> Result<f64> {
    if !(epsilon_hat > 0.0 && epsilon_hat < 1.0) {
        return Err(Error::Domain(format!(
            "outage target must lie in (0, 1), got {epsilon_hat}"
        )));
    }
    let z = interference.air.snr.recip();
    let mean_load: f64 = interference.terms.iter().map(|(s, m)| s * m).sum();
    let scale = (z + mean_load).recip();
    let (lower, upper) = (scale / BRACKET_DECADES, scale * BRACKET_DECADES);
    let residual = |b: f64| interference.outage_at_beta0(b) - epsilon_hat;
    let fail = || Error::BracketFailure {
        epsilon_hat,
        lower,
        upper,
    };

    let (mut lo, mut hi) = (scale, scale);
    let r0 = residual(scale);
    if r0 == 0.0 {
        return Ok(scale);
    }
    if r0 < 0.0 {
        loop {
            lo = hi;
            hi *= 10.0;
            if hi > upper * 1.000_001 {
                return Err(fail());
            }
            if residual(hi) >= 0.0 {
                break;
            }
        }
    } else {
        loop {
            hi = lo;
            lo /= 10.0;
            if lo < lower / 1.000_001 {
                return Err(fail());
            }
            if residual(lo) <= 0.0 {
                break;
            }
        }
    }

    let mut mid = (lo * hi).sqrt();
    for _ in 0..200 {
        mid = (lo * hi).sqrt();
        let r = residual(mid);
        if r.abs() <= RESIDUAL_TOL || hi / lo - 1.0 <= RELATIVE_TOL {
            break;
        }
        if r < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid)
}

/// SINR threshold β* with `ε(β*) = epsilon_hat` for this serving power.
pub fn invert_outage(epsilon_hat: f64, ctx: &OutageContext) -> Result<f64> {
    let beta0 = invert_outage_beta0(epsilon_hat, &ctx.interference)?;
    Ok(beta0 * ctx.omega0 / f64::from(ctx.interference.m0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleEstimate {
    pub epsilon: f64,
    pub standard_error: f64,
}

/// Estimates the outage probability by drawing the fading gains directly.
///
/// Each gain is Gamma(m, 1/m) (unit mean); the SINR is
/// `g0 Ω0 / (1/Γ + (h/G) Σ g_i Ω_i)` and outage is `SINR ≤ β`.
pub fn fading_oracle<R: Rng + ?Sized>(
    beta: f64,
    ctx: &OutageContext,
    n_draws: usize,
    rng: &mut R,
) -> Result<OracleEstimate> {
    if n_draws == 0 {
        return Err(Error::Domain(
            "fading oracle needs at least one draw".into(),
        ));
    }
    let gamma =
        |m: f64| Gamma::new(m, 1.0 / m).map_err(|e| Error::Domain(format!("gamma({m}): {e}")));
    let intf = &ctx.interference;
    let serving = gamma(f64::from(intf.m0))?;
    let fading = intf
        .interferers
        .iter()
        .map(|i| Ok((gamma(i.m)?, i.omega)))
        .collect::<Result<Vec<_>>>()?;
    let noise = intf.air.snr.recip();
    let scale = intf.air.interference_scale();

    let mut outages = 0usize;
    for _ in 0..n_draws {
        let signal = serving.sample(rng) * ctx.omega0;
        let interference: f64 = fading.iter().map(|(g, omega)| g.sample(rng) * omega).sum();
        if signal <= beta * (noise + scale * interference) {
            outages += 1;
        }
    }
    let p = outages as f64 / n_draws as f64;
    Ok(OracleEstimate {
        epsilon: p,
        standard_error: (p * (1.0 - p) / n_draws as f64).sqrt(),
    })
}
