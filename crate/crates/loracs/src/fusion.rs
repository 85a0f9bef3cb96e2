//! Multi-gateway joint decoding: SNR-weighted fusion of residual profiles.
//!
//! Each gateway forwards one compressed vector; the cloud recovers a
//! residual profile per gateway independently, then decides
//! `λ̂ = argmin_i Σ_g w(γ_g)·r̃_g[i]`. Profiles are normalized by ‖y_g‖
//! before fusion by default so gateways with different analog gains are
//! comparable; the raw-sum variant is available behind a switch.

use crate::cs::CompressedVector;
use crate::params::Direction;
use crate::recovery::{CompressedDecoder, ResidualProfile};
use crate::{Error, Result};
use std::collections::HashMap;

/// One gateway's contribution to a joint decision.
#[derive(Debug, Clone)]
pub struct GatewayObservation {
    pub y: CompressedVector,
    /// Linear-scale SNR estimate (oracle or [`estimate_snr`] output).
    pub gamma: f64,
    pub gateway_id: usize,
}

impl GatewayObservation {
    pub fn new(y: CompressedVector, gamma: f64, gateway_id: usize) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(Error::Param(format!("gamma must be > 0, got {gamma}")));
        }
        Ok(Self { y, gamma, gateway_id })
    }
}

/// SNR-to-weight map used when fusing per-gateway profiles.
pub trait Weighting: Send + Sync {
    /// Registry key and CSV label.
    fn name(&self) -> &'static str;

    /// Weight for a gateway with linear SNR `gamma`; must be > 0.
    fn weight(&self, gamma: f64) -> f64;
}

/// Equal-gain combining: every gateway counts the same.
#[derive(Debug, Default, Clone)]
pub struct Egc;

/// Weight √γ: between equal-gain and full SNR weighting.
#[derive(Debug, Default, Clone)]
pub struct SqrtSnr;

/// Maximum-ratio combining: weight γ.
#[derive(Debug, Default, Clone)]
pub struct Mrc;

/// Weight γ²: aggressively favors the cleanest gateway.
#[derive(Debug, Default, Clone)]
pub struct SnrSquared;

impl Weighting for Egc {
    fn name(&self) -> &'static str {
        "egc"
    }
    fn weight(&self, _gamma: f64) -> f64 {
        1.0
    }
}

impl Weighting for SqrtSnr {
    fn name(&self) -> &'static str {
        "sqrt"
    }
    fn weight(&self, gamma: f64) -> f64 {
        gamma.sqrt()
    }
}

impl Weighting for Mrc {
    fn name(&self) -> &'static str {
        "mrc"
    }
    fn weight(&self, gamma: f64) -> f64 {
        gamma
    }
}

impl Weighting for SnrSquared {
    fn name(&self) -> &'static str {
        "snr2"
    }
    fn weight(&self, gamma: f64) -> f64 {
        gamma * gamma
    }
}

type WeightingFactory = Box<dyn Fn() -> Box<dyn Weighting> + Send + Sync>;

/// String-keyed factory registry for weighting schemes.
pub struct WeightingRegistry {
    factories: HashMap<String, WeightingFactory>,
}

impl WeightingRegistry {
    pub fn empty() -> Self {
        Self { factories: HashMap::new() }
    }

    pub fn register<F>(&mut self, name: &str, factory: F)
    where
        F: Fn() -> Box<dyn Weighting> + Send + Sync + 'static,
    {
        self.factories.insert(name.to_string(), Box::new(factory));
    }

    pub fn create(&self, name: &str) -> Option<Box<dyn Weighting>> {
        self.factories.get(name).map(|f| f())
    }

    pub fn names(&self) -> Vec<String> {
        let mut v: Vec<String> = self.factories.keys().cloned().collect();
        v.sort();
        v
    }
}

impl Default for WeightingRegistry {
    /// Registry with the four built-in schemes:
    /// `"egc"`, `"sqrt"`, `"mrc"`, `"snr2"`.
    fn default() -> Self {
        let mut reg = Self::empty();
        reg.register("egc", || Box::new(Egc));
        reg.register("sqrt", || Box::new(SqrtSnr));
        reg.register("mrc", || Box::new(Mrc));
        reg.register("snr2", || Box::new(SnrSquared));
        reg
    }
}

/// Profile treatment before the weighted sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FusionMode {
    /// Divide each profile by ‖y_g‖ (default): gateways with different
    /// gains contribute comparably.
    Normalized,
    /// Sum raw residuals as written in the reference combining rule.
    Raw,
}

/// Estimates linear SNR from the recovery residual:
/// `γ̂ = max(1e−3, (‖y‖² − r_min²)/r_min²)`.
///
/// The minimum residual approximates the noise norm once the signal atom
/// is removed, so signal power ≈ ‖y‖² − r_min². The floor keeps weights
/// positive for pure-noise inputs.
pub fn estimate_snr(y: &CompressedVector, profile: &ResidualProfile) -> f64 {
    let e_total = y.norm().powi(2);
    let r_min = profile.min_residual();
    let e_noise = (r_min * r_min).max(f64::MIN_POSITIVE);
    ((e_total - e_noise) / e_noise).max(1e-3)
}

/// Outcome of one joint decision, including per-gateway traces.
#[derive(Debug, Clone)]
pub struct JointDecision {
    /// Fused symbol decision λ̂.
    pub value: u32,
    /// Σ_g w(γ_g)·r̃_g, the fused profile the decision minimizes.
    pub fused: ResidualProfile,
    /// Per-gateway single decisions (for trace CSV and diagnostics),
    /// ordered by ascending gateway id.
    pub per_gateway: Vec<GatewayDecision>,
}

/// One gateway's solo decision inside a joint decode.
#[derive(Debug, Clone)]
pub struct GatewayDecision {
    pub gateway_id: usize,
    pub value: u32,
    pub gamma: f64,
    pub weight: f64,
}

/// Joint demodulation (Algorithm 1): independent per-gateway recovery,
/// then an SNR-weighted residual sum decides the symbol.
///
/// Gateways are fused in ascending `gateway_id` order, so the fused
/// profile is bit-identical under any reordering of `observations`.
/// Payload symbols are up-chirps; profiles use the up dictionary.
pub fn joint_demodulate(
    observations: &[GatewayObservation],
    scheme: &dyn Weighting,
    decoder: &CompressedDecoder,
    eps: f64,
    k_max: usize,
    mode: FusionMode,
) -> Result<JointDecision> {
    if observations.is_empty() {
        return Err(Error::Param("joint_demodulate needs at least one observation".into()));
    }
    let mut order: Vec<usize> = (0..observations.len()).collect();
    order.sort_by_key(|&i| (observations[i].gateway_id, i));
    let n = decoder.params.n();
    let mut fused = vec![0.0f64; n];
    let mut per_gateway = Vec::with_capacity(observations.len());
    for idx in order {
        let obs = &observations[idx];
        if !(obs.gamma > 0.0) {
            return Err(Error::Param(format!(
                "gateway {} has non-positive gamma {}",
                obs.gateway_id, obs.gamma
            )));
        }
        let (prof, _) = decoder.profile(&obs.y, Direction::Up, eps, k_max)?;
        let w = scheme.weight(obs.gamma);
        let scale = match mode {
            FusionMode::Normalized => {
                let yn = obs.y.norm();
                if yn > 0.0 {
                    w / yn
                } else {
                    w
                }
            }
            FusionMode::Raw => w,
        };
        for (f, &r) in fused.iter_mut().zip(prof.r.iter()) {
            *f += scale * r;
        }
        per_gateway.push(GatewayDecision {
            gateway_id: obs.gateway_id,
            value: prof.argmin() as u32,
            gamma: obs.gamma,
            weight: w,
        });
    }
    let fused = ResidualProfile { r: fused, direction: Direction::Up };
    let value = fused.argmin() as u32;
    Ok(JointDecision { value, fused, per_gateway })
}
