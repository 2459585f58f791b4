//! Large-scale propagation: path loss for the three bands, THz molecular
//! absorption and the altitude-dependent LoS probability.
//!
//! All functions are pure. Distances are in meters and frequencies in Hz at
//! the API boundary; the empirical 3GPP fits take GHz internally.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Altitude window of the aerial-UE path loss and LoS fits.
pub const MIN_MODEL_ALTITUDE: f64 = 22.5;
pub const MAX_MODEL_ALTITUDE: f64 = 300.0;
/// At and above this altitude the link is always LoS.
pub const ALWAYS_LOS_ALTITUDE: f64 = 100.0;

pub const THZ_FIT_MIN_HZ: f64 = 275e9;
pub const THZ_FIT_MAX_HZ: f64 = 400e9;

/// Beer-Lambert absorption in dB per (1/m * m): 10*log10(e).
pub const ABSORPTION_DB_FACTOR: f64 = 4.34;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    /// UAV altitude (m).
    pub h_u: f64,
    /// BS antenna height (m).
    pub h_b: f64,
    /// Horizontal UAV-BS distance (m).
    pub r: f64,
}

impl Geometry {
    pub fn new(h_u: f64, h_b: f64, r: f64) -> Result<Self> {
        let g = Geometry { h_u, h_b, r };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h_u > 0.0 && self.h_u.is_finite()) {
            return Err(Error::validation(format!("h_u must be > 0, got {}", self.h_u)));
        }
        if !(self.h_b > 0.0 && self.h_b.is_finite()) {
            return Err(Error::validation(format!("h_b must be > 0, got {}", self.h_b)));
        }
        if !(self.r >= 0.0 && self.r.is_finite()) {
            return Err(Error::validation(format!("r must be >= 0, got {}", self.r)));
        }
        Ok(())
    }

    pub fn with_r(&self, r: f64) -> Self {
        Geometry { r, ..*self }
    }

    pub fn d_3d(&self) -> f64 {
        self.r.hypot(self.h_u - self.h_b)
    }

    /// Zenith angle of the UAV seen from the BS, in degrees. 90 is the
    /// horizon; values below 90 mean the UAV is above the BS antenna.
    pub fn zenith_deg(&self) -> f64 {
        self.r.atan2(self.h_u - self.h_b).to_degrees()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UrbanProfile {
    /// Average building height (m).
    pub building_height: f64,
    /// Average street width (m).
    pub street_width: f64,
}

impl UrbanProfile {
    pub fn new(building_height: f64, street_width: f64) -> Result<Self> {
        let u = UrbanProfile { building_height, street_width };
        u.validate()?;
        Ok(u)
    }

    pub fn validate(&self) -> Result<()> {
        if !(5.0..=50.0).contains(&self.building_height) {
            return Err(Error::validation(format!(
                "building height must be within 5-50 m, got {}",
                self.building_height
            )));
        }
        if !(5.0..=50.0).contains(&self.street_width) {
            return Err(Error::validation(format!(
                "street width must be within 5-50 m, got {}",
                self.street_width
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atmosphere {
    pub temperature_k: f64,
    pub pressure_pa: f64,
    /// Relative humidity in percent.
    pub humidity_percent: f64,
}

impl Default for Atmosphere {
    fn default() -> Self {
        Atmosphere { temperature_k: 300.0, pressure_pa: 101_325.0, humidity_percent: 50.0 }
    }
}

impl Atmosphere {
    pub fn validate(&self) -> Result<()> {
        if !(self.temperature_k > 0.0 && self.temperature_k.is_finite()) {
            return Err(Error::validation(format!(
                "temperature must be > 0 K, got {}",
                self.temperature_k
            )));
        }
        if !(self.pressure_pa > 0.0 && self.pressure_pa.is_finite()) {
            return Err(Error::validation(format!(
                "pressure must be > 0 Pa, got {}",
                self.pressure_pa
            )));
        }
        if !(0.0..=100.0).contains(&self.humidity_percent) {
            return Err(Error::validation(format!(
                "relative humidity must be within 0-100 %, got {}",
                self.humidity_percent
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandKind {
    Sub6,
    MmWave,
    Thz,
}

impl BandKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BandKind::Sub6 => "sub6",
            BandKind::MmWave => "mmwave",
            BandKind::Thz => "thz",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sub6" | "sub-6" | "sub6ghz" => Some(BandKind::Sub6),
            "mmwave" | "mm-wave" => Some(BandKind::MmWave),
            "thz" => Some(BandKind::Thz),
            _ => None,
        }
    }

    pub fn default_carrier_hz(&self) -> f64 {
        match self {
            BandKind::Sub6 => 2e9,
            BandKind::MmWave => 30e9,
            BandKind::Thz => 350e9,
        }
    }

    pub fn default_bandwidth_hz(&self) -> f64 {
        match self {
            BandKind::Sub6 => 1e6,
            BandKind::MmWave => 100e6,
            BandKind::Thz => 1e9,
        }
    }
}

impl std::fmt::Display for BandKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub kind: BandKind,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
}

impl Band {
    pub fn new(kind: BandKind, carrier_hz: f64, bandwidth_hz: f64) -> Result<Self> {
        let b = Band { kind, carrier_hz, bandwidth_hz };
        b.validate()?;
        Ok(b)
    }

    pub fn with_defaults(kind: BandKind) -> Self {
        Band { kind, carrier_hz: kind.default_carrier_hz(), bandwidth_hz: kind.default_bandwidth_hz() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_hz > 0.0 && self.carrier_hz.is_finite()) {
            return Err(Error::validation(format!("carrier must be > 0, got {}", self.carrier_hz)));
        }
        if !(self.bandwidth_hz > 0.0 && self.bandwidth_hz.is_finite()) {
            return Err(Error::validation(format!(
                "bandwidth must be > 0, got {}",
                self.bandwidth_hz
            )));
        }
        if self.kind == BandKind::Thz {
            check_thz_range(self.carrier_hz)?;
        }
        Ok(())
    }
}

/// Which distance stands in for the bare "d" of the sub-6 LoS fit and of
/// the mmWave NLoS fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceInterpretation {
    #[default]
    #[serde(rename = "3d")]
    ThreeD,
    #[serde(rename = "2d")]
    TwoD,
}

/// Height used inside the last term of the mmWave NLoS fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NlosHeightTerm {
    #[default]
    Bs,
    Uav,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ChannelOptions {
    pub distance: DistanceInterpretation,
    pub nlos_height: NlosHeightTerm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLoss {
    pub los_db: f64,
    pub nlos_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThzPathLoss {
    pub los_db: f64,
    pub absorption_db: f64,
    pub propagation_db: f64,
}

fn check_altitude(h_u: f64) -> Result<()> {
    if h_u > MIN_MODEL_ALTITUDE && h_u < MAX_MODEL_ALTITUDE {
        Ok(())
    } else {
        Err(Error::AltitudeOutOfModelRange { h_u, min: MIN_MODEL_ALTITUDE, max: MAX_MODEL_ALTITUDE })
    }
}

fn check_thz_range(f_c: f64) -> Result<()> {
    if (THZ_FIT_MIN_HZ..=THZ_FIT_MAX_HZ).contains(&f_c) {
        Ok(())
    } else {
        Err(Error::FrequencyOutsideFitRange { f_ghz: f_c / 1e9 })
    }
}

fn bare_distance(geom: &Geometry, opts: ChannelOptions) -> Result<f64> {
    let d = match opts.distance {
        DistanceInterpretation::ThreeD => geom.d_3d(),
        DistanceInterpretation::TwoD => geom.r,
    };
    if d > 0.0 {
        Ok(d)
    } else {
        Err(Error::validation("link distance must be > 0"))
    }
}

fn positive_d3d(geom: &Geometry) -> Result<f64> {
    let d = geom.d_3d();
    if d > 0.0 {
        Ok(d)
    } else {
        Err(Error::validation("3D distance must be > 0"))
    }
}

/// Aerial-UE sub-6 GHz path loss (LoS and NLoS), valid for 22.5 m < h_U < 300 m.
pub fn path_loss_sub6(geom: &Geometry, f_c: f64, opts: ChannelOptions) -> Result<PathLoss> {
    check_altitude(geom.h_u)?;
    let d3 = positive_d3d(geom)?;
    let d = bare_distance(geom, opts)?;
    let f_ghz = f_c / 1e9;

    let los_db = 28.0 + 22.0 * d.log10() + 20.0 * f_ghz.log10();
    let nlos_db = -17.5
        + (46.0 - 7.0 * geom.h_u.log10()) * d3.log10()
        + 20.0 * (40.0 * std::f64::consts::PI * f_ghz / 3.0).log10();
    Ok(PathLoss { los_db, nlos_db })
}

/// LoS part of the mmWave fit. Exposed separately because the NLoS value is
/// defined through it.
pub fn mmwave_los_db(d_3d: f64, f_c: f64, urban: &UrbanProfile) -> f64 {
    let f_ghz = f_c / 1e9;
    let hb = urban.building_height;
    let hb_pow = hb.powf(1.72);
    20.0 * (40.0 * std::f64::consts::PI * d_3d * f_ghz / 3.0).log10()
        + (0.03 * hb_pow).min(10.0) * d_3d.log10()
        - (0.044 * hb_pow).min(14.77)
        + 0.002 * hb.log10() * d_3d
}

/// mmWave path loss. NLoS is `max(LoS, NLoS fit)`.
pub fn path_loss_mmwave(
    geom: &Geometry,
    urban: &UrbanProfile,
    f_c: f64,
    opts: ChannelOptions,
) -> Result<PathLoss> {
    check_altitude(geom.h_u)?;
    urban.validate()?;
    let d3 = positive_d3d(geom)?;
    let d = bare_distance(geom, opts)?;
    let f_ghz = f_c / 1e9;
    let h_u = geom.h_u;
    let hb = urban.building_height;
    let w = urban.street_width;
    let h_term = match opts.nlos_height {
        NlosHeightTerm::Bs => geom.h_b,
        NlosHeightTerm::Uav => geom.h_u,
    };

    let los_db = mmwave_los_db(d3, f_c, urban);
    let fit_db = 161.04 - 7.1 * w.log10() + 7.5 * hb.log10()
        - (24.37 - 3.7 * (hb / h_u).powi(2)) * h_u.log10()
        + (43.42 - 3.1 * h_u.log10()) * (d.log10() - 3.0)
        + 20.0 * f_ghz.log10()
        - (3.2 * (11.75 * h_term).log10().powi(2) - 4.97);
    Ok(PathLoss { los_db, nlos_db: los_db.max(fit_db) })
}

/// Saturated water-vapor partial pressure (hPa) from Buck's formula.
/// Takes SI inputs and converts to Celsius and hPa.
pub fn saturation_vapor_pressure_hpa(atm: &Atmosphere) -> f64 {
    let t_c = atm.temperature_k - 273.15;
    let p_hpa = atm.pressure_pa / 100.0;
    6.1121 * (1.0007 + 3.46e-6 * p_hpa) * (17.502 * t_c / (240.94 + t_c)).exp()
}

/// Volume mixing ratio of water vapor.
pub fn water_vapor_mixing_ratio(atm: &Atmosphere) -> f64 {
    let p_hpa = atm.pressure_pa / 100.0;
    atm.humidity_percent * saturation_vapor_pressure_hpa(atm) / (100.0 * p_hpa)
}

/// The three components of the absorption coefficient (1/m): two water
/// vapor lines and the polynomial background.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbsorptionTerms {
    pub line_1: f64,
    pub line_2: f64,
    pub background: f64,
}

impl AbsorptionTerms {
    pub fn total(&self) -> f64 {
        self.line_1 + self.line_2 + self.background
    }
}

pub fn absorption_terms(f_c: f64, atm: &Atmosphere) -> Result<AbsorptionTerms> {
    check_thz_range(f_c)?;
    atm.validate()?;
    let mu = water_vapor_mixing_ratio(atm);
    // wavenumber in 1/cm
    let nu = f_c / (100.0 * SPEED_OF_LIGHT);

    let line_1 = 0.2205 * mu * (0.1303 * mu + 0.0294)
        / ((0.4093 * mu + 0.0925).powi(2) + (nu - 10.835).powi(2));
    let line_2 = 2.014 * mu * (0.1702 * mu + 0.0303)
        / ((0.537 * mu + 0.0956).powi(2) + (nu - 12.664).powi(2));
    let background = 5.54e-37 * f_c.powi(3) - 3.94e-25 * f_c.powi(2) + 9.06e-14 * f_c - 6.36e-3;
    Ok(AbsorptionTerms { line_1, line_2, background })
}

/// Medium absorption coefficient kappa (1/m), 275-400 GHz.
pub fn absorption_coefficient(f_c: f64, atm: &Atmosphere) -> Result<f64> {
    Ok(absorption_terms(f_c, atm)?.total())
}

pub fn free_space_loss_db(d: f64, f_c: f64) -> f64 {
    20.0 * (4.0 * std::f64::consts::PI * d * f_c / SPEED_OF_LIGHT).log10()
}

/// THz LoS path loss: free-space spreading plus Beer-Lambert absorption.
/// There is no NLoS branch in this band.
pub fn path_loss_thz(geom: &Geometry, atm: &Atmosphere, f_c: f64) -> Result<ThzPathLoss> {
    let kappa = absorption_coefficient(f_c, atm)?;
    let d3 = positive_d3d(geom)?;
    Ok(thz_loss_with_kappa(d3, f_c, kappa))
}

pub fn thz_loss_with_kappa(d_3d: f64, f_c: f64, kappa: f64) -> ThzPathLoss {
    let propagation_db = free_space_loss_db(d_3d, f_c);
    let absorption_db = ABSORPTION_DB_FACTOR * kappa * d_3d;
    ThzPathLoss { los_db: propagation_db + absorption_db, absorption_db, propagation_db }
}

/// Breakpoint distances (r1, r2) of the LoS probability for altitudes
/// below 100 m.
pub fn los_breakpoints(h_u: f64) -> (f64, f64) {
    let lg = h_u.log10();
    ((460.0 * lg - 700.0).max(18.0), 4300.0 * lg - 3800.0)
}

/// Probability of line of sight at altitude `h_u` and ground distance `r`.
pub fn los_probability(h_u: f64, r: f64) -> Result<f64> {
    if !(h_u > MIN_MODEL_ALTITUDE) {
        return Err(Error::AltitudeOutOfModelRange {
            h_u,
            min: MIN_MODEL_ALTITUDE,
            max: MAX_MODEL_ALTITUDE,
        });
    }
    if !(r >= 0.0) {
        return Err(Error::validation(format!("r must be >= 0, got {r}")));
    }
    if h_u >= ALWAYS_LOS_ALTITUDE {
        return Ok(1.0);
    }
    let (r1, r2) = los_breakpoints(h_u);
    if r <= r1 {
        return Ok(1.0);
    }
    let ratio = r1 / r;
    Ok((ratio + (1.0 - ratio) * (-r / r2).exp()).clamp(0.0, 1.0))
}
