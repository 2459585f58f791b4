//! BS antenna model: sectorized element pattern, M x N planar array factor,
//! array gain normalized over the sphere, and beam-pointing mismatch.
//!
//! Angles are in degrees at the API boundary. The array lies in the local
//! x-y plane, so its broadside is the local z axis (theta = 0).

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::LazyLock;

use parking_lot::RwLock;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{substream, DOMAIN_MISMATCH};

pub const THETA_3DB: f64 = 65.0;
pub const PHI_3DB: f64 = 65.0;
pub const SIDE_LOBE_LIMIT_DB: f64 = 30.0;
pub const FRONT_BACK_RATIO_DB: f64 = 30.0;

/// Base quadrature grid (theta x phi cells).
pub const GRID_THETA: usize = 721;
pub const GRID_PHI: usize = 1441;
/// Max change between base and refined grid before giving up.
pub const CONVERGENCE_DB: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig {
    pub m_elems: u32,
    pub n_elems: u32,
    /// Element spacing along x, in wavelengths.
    pub d_x: f64,
    /// Element spacing along y, in wavelengths.
    pub d_y: f64,
    /// Peak element gain (dBi).
    pub g_e_max: f64,
    /// Pointing error standard deviation (degrees).
    pub sigma_mismatch: f64,
}

impl ArrayConfig {
    pub fn new(m_elems: u32, n_elems: u32) -> Self {
        ArrayConfig { m_elems, n_elems, d_x: 0.5, d_y: 0.5, g_e_max: 8.0, sigma_mismatch: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_elems == 0 || self.n_elems == 0 {
            return Err(Error::validation("array needs at least one element per axis"));
        }
        if !(self.d_x > 0.0 && self.d_y > 0.0) {
            return Err(Error::validation("element spacing must be > 0"));
        }
        if !(self.sigma_mismatch >= 0.0 && self.sigma_mismatch.is_finite()) {
            return Err(Error::validation("mismatch sigma must be >= 0"));
        }
        if !self.g_e_max.is_finite() {
            return Err(Error::validation("element gain must be finite"));
        }
        Ok(())
    }

    pub fn is_single_element(&self) -> bool {
        self.m_elems == 1 && self.n_elems == 1
    }
}

/// Progressive phase shifts between adjacent elements (radians).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Steering {
    pub beta_x: f64,
    pub beta_y: f64,
}

impl Steering {
    pub const BROADSIDE: Steering = Steering { beta_x: 0.0, beta_y: 0.0 };

    /// Phases that put the main lobe at (theta, phi).
    pub fn toward(theta: f64, phi: f64, cfg: &ArrayConfig) -> Self {
        let (st, (sp, cp)) = (theta.to_radians().sin(), phi.to_radians().sin_cos());
        Steering {
            beta_x: -2.0 * PI * cfg.d_x * st * cp,
            beta_y: -2.0 * PI * cfg.d_y * st * sp,
        }
    }
}

/// Element attenuation (dB, <= 0) relative to the element peak.
pub fn element_attenuation(theta: f64, phi: f64) -> f64 {
    let vertical = -(12.0 * ((theta - 90.0) / THETA_3DB).powi(2)).min(SIDE_LOBE_LIMIT_DB);
    let horizontal = -(12.0 * (phi / PHI_3DB).powi(2)).min(FRONT_BACK_RATIO_DB);
    -(-(vertical + horizontal)).min(FRONT_BACK_RATIO_DB)
}

/// Element gain (dBi) for theta in [0, 180] and phi in [-180, 180].
pub fn element_gain(theta: f64, phi: f64, g_e_max: f64) -> f64 {
    g_e_max + element_attenuation(theta, phi)
}

/// sin(n psi / 2) / (n sin(psi / 2)), with the removable singularity at
/// psi = 2 pi k filled in.
fn dirichlet(n: u32, psi: f64) -> f64 {
    if n == 1 {
        return 1.0;
    }
    let nf = n as f64;
    let den = (psi / 2.0).sin();
    if den.abs() < 1e-12 {
        let k = (psi / (2.0 * PI)).round() as i64;
        return if (k * (n as i64 - 1)) % 2 == 0 { 1.0 } else { -1.0 };
    }
    (nf * psi / 2.0).sin() / (nf * den)
}

fn psi_terms(sin_theta: f64, cos_phi: f64, sin_phi: f64, st: Steering, cfg: &ArrayConfig) -> (f64, f64) {
    (
        2.0 * PI * cfg.d_x * sin_theta * cos_phi + st.beta_x,
        2.0 * PI * cfg.d_y * sin_theta * sin_phi + st.beta_y,
    )
}

/// Normalized array factor magnitude |AF| in [0, 1].
pub fn array_factor(theta: f64, phi: f64, steering: Steering, cfg: &ArrayConfig) -> f64 {
    let st = theta.to_radians().sin();
    let (sp, cp) = phi.to_radians().sin_cos();
    let (psi_x, psi_y) = psi_terms(st, cp, sp, steering, cfg);
    (dirichlet(cfg.m_elems, psi_x) * dirichlet(cfg.n_elems, psi_y)).abs().min(1.0)
}

/// Midpoint-rule value of the sphere integral of |AF|^2 on a
/// `n_theta x n_phi` grid. The sin(theta) weight is integrated exactly per
/// theta cell.
pub fn pattern_integral_on_grid(
    steering: Steering,
    cfg: &ArrayConfig,
    n_theta: usize,
    n_phi: usize,
) -> f64 {
    let d_theta = PI / n_theta as f64;
    let d_phi = 2.0 * PI / n_phi as f64;
    let phis: Vec<(f64, f64)> = (0..n_phi).map(|j| ((j as f64 + 0.5) * d_phi).sin_cos()).collect();

    let rows: Vec<f64> = (0..n_theta)
        .into_par_iter()
        .map(|i| {
            let lo = i as f64 * d_theta;
            let weight = lo.cos() - (lo + d_theta).cos();
            let st = ((i as f64 + 0.5) * d_theta).sin();
            let row: f64 = phis
                .iter()
                .map(|&(sp, cp)| {
                    let (px, py) = psi_terms(st, cp, sp, steering, cfg);
                    let af = dirichlet(cfg.m_elems, px) * dirichlet(cfg.n_elems, py);
                    af * af
                })
                .sum();
            row * weight * d_phi
        })
        .collect();
    rows.iter().sum()
}

type CacheKey = (u32, u32, u64, u64, u64, u64);

static INTEGRAL_CACHE: LazyLock<RwLock<HashMap<CacheKey, f64>>> =
    LazyLock::new(|| RwLock::new(HashMap::new()));

fn cache_key(steering: Steering, cfg: &ArrayConfig) -> CacheKey {
    (
        cfg.m_elems,
        cfg.n_elems,
        cfg.d_x.to_bits(),
        cfg.d_y.to_bits(),
        steering.beta_x.to_bits(),
        steering.beta_y.to_bits(),
    )
}

/// Sphere integral of |AF|^2, the denominator of the array gain.
///
/// Evaluated on the base grid and once more on a grid refined by two in each
/// direction; the refined value is returned. Results are memoized per
/// (array geometry, steering).
pub fn pattern_integral(steering: Steering, cfg: &ArrayConfig) -> Result<f64> {
    if cfg.is_single_element() {
        return Ok(4.0 * PI);
    }
    let key = cache_key(steering, cfg);
    if let Some(v) = INTEGRAL_CACHE.read().get(&key) {
        return Ok(*v);
    }
    let coarse = pattern_integral_on_grid(steering, cfg, GRID_THETA, GRID_PHI);
    let fine = pattern_integral_on_grid(steering, cfg, 2 * GRID_THETA - 1, 2 * GRID_PHI - 1);
    let coarse_db = 10.0 * (4.0 * PI / coarse).log10();
    let fine_db = 10.0 * (4.0 * PI / fine).log10();
    if !((coarse_db - fine_db).abs() <= CONVERGENCE_DB) {
        return Err(Error::IntegrationNotConverged { coarse_db, fine_db });
    }
    INTEGRAL_CACHE.write().insert(key, fine);
    Ok(fine)
}

/// Array gain (dB) in direction (theta, phi).
pub fn array_gain_at(theta: f64, phi: f64, steering: Steering, cfg: &ArrayConfig) -> Result<f64> {
    let af = array_factor(theta, phi, steering, cfg);
    let integral = pattern_integral(steering, cfg)?;
    Ok(10.0 * (4.0 * PI * af * af / integral).log10())
}

/// Array gain (dB) at the main-lobe peak, where |AF| = 1.
pub fn array_gain(steering: Steering, cfg: &ArrayConfig) -> Result<f64> {
    if cfg.is_single_element() {
        return Ok(0.0);
    }
    Ok(10.0 * (4.0 * PI / pattern_integral(steering, cfg)?).log10())
}

/// Element plus array gain (dB) in direction (theta, phi), both evaluated
/// in the same local frame.
pub fn total_gain(theta: f64, phi: f64, steering: Steering, cfg: &ArrayConfig) -> Result<f64> {
    Ok(element_gain(theta, phi, cfg.g_e_max) + array_gain_at(theta, phi, steering, cfg)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Mismatch {
    pub theta_off: f64,
    pub phi_off: f64,
}

impl Mismatch {
    pub const NONE: Mismatch = Mismatch { theta_off: 0.0, phi_off: 0.0 };

    /// Array-frame direction seen through a beam centred on broadside:
    /// the offsets rotate the direction away from the z axis in the x-z
    /// plane (theta_off) and then toward y (phi_off). Returns (theta, phi).
    pub fn array_direction(&self) -> (f64, f64) {
        let (st, ct) = self.theta_off.to_radians().sin_cos();
        let (sp, cp) = self.phi_off.to_radians().sin_cos();
        let (x, y, z) = (st, ct * sp, ct * cp);
        let theta = z.clamp(-1.0, 1.0).acos().to_degrees();
        let phi = if x == 0.0 && y == 0.0 { 0.0 } else { y.atan2(x).to_degrees() };
        (theta, phi)
    }
}

/// Draw `index` of the pointing-error sequence for `seed`.
pub fn sample_mismatch_at(seed: u64, index: u32, sigma: f64) -> Mismatch {
    if sigma == 0.0 {
        return Mismatch::NONE;
    }
    let mut rng = substream(seed, DOMAIN_MISMATCH, index);
    let a: f64 = StandardNormal.sample(&mut rng);
    let b: f64 = StandardNormal.sample(&mut rng);
    Mismatch { theta_off: sigma * a, phi_off: sigma * b }
}

/// One zero-mean Gaussian pointing error with standard deviation `sigma`
/// degrees on each angle.
pub fn sample_mismatch(seed: u64, sigma: f64) -> Mismatch {
    sample_mismatch_at(seed, 0, sigma)
}

pub fn mismatch_samples(seed: u64, sigma: f64, count: u32) -> Vec<Mismatch> {
    (0..count).map(|i| sample_mismatch_at(seed, i, sigma)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteeredGain {
    pub gain_db: f64,
    pub theta_off: f64,
    pub phi_off: f64,
}

/// Total BS gain toward a UAV at zenith angle `uav_zenith` (degrees).
///
/// The sector faces the UAV in azimuth, so the element pattern is evaluated
/// at (uav_zenith, 0). The array beam is steered onto the UAV and the
/// pointing error moves the UAV off the beam axis, so the array term is the
/// broadside pattern evaluated at the mismatch direction.
pub fn steered_gain(uav_zenith: f64, cfg: &ArrayConfig, mismatch: Mismatch) -> Result<SteeredGain> {
    let element = element_gain(uav_zenith, 0.0, cfg.g_e_max);
    let array = if cfg.is_single_element() {
        0.0
    } else {
        let (theta, phi) = mismatch.array_direction();
        array_gain_at(theta, phi, Steering::BROADSIDE, cfg)?
    };
    Ok(SteeredGain { gain_db: element + array, theta_off: mismatch.theta_off, phi_off: mismatch.phi_off })
}

/// First null of the broadside pattern in the phi = 0 cut (degrees), or 90
/// when the array is too small to have one.
pub fn first_null_deg(cfg: &ArrayConfig) -> f64 {
    let s = 1.0 / (cfg.m_elems as f64 * cfg.d_x);
    if s >= 1.0 {
        90.0
    } else {
        s.asin().to_degrees()
    }
}

/// Full half-power beamwidth (degrees) of the broadside beam in the phi = 0 cut.
pub fn half_power_beamwidth(cfg: &ArrayConfig) -> f64 {
    let (mut lo, mut hi) = (0.0, first_null_deg(cfg));
    let half = 0.5f64.sqrt();
    if array_factor(hi, 0.0, Steering::BROADSIDE, cfg) >= half {
        return 2.0 * hi;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if array_factor(mid, 0.0, Steering::BROADSIDE, cfg) > half {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo + hi
}
