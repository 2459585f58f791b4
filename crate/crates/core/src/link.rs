//! Uplink budget from the UAV to the serving BS: thermal and molecular
//! noise, per-condition SNR and the expected achievable throughput.

use serde::{Deserialize, Serialize};

use crate::antenna::{self, ArrayConfig, Mismatch};
use crate::channel::{
    self, Atmosphere, Band, BandKind, ChannelOptions, Geometry, UrbanProfile,
};
use crate::error::{Error, Result};

pub const PLANCK: f64 = 6.626_070_15e-34;
pub const BOLTZMANN: f64 = 1.380_649e-23;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

/// Johnson-Nyquist noise power (W) in `bandwidth` Hz around `f_c`, full
/// quantum form.
pub fn johnson_nyquist_noise(bandwidth: f64, f_c: f64, temperature_k: f64) -> f64 {
    let x = PLANCK * f_c / (BOLTZMANN * temperature_k);
    bandwidth * PLANCK * f_c / x.exp_m1()
}

/// Re-radiated absorption noise (W). `l_p` and `l_a` are linear losses,
/// `l_a >= 1`.
pub fn molecular_noise(p_tx: f64, g_tot: f64, l_p: f64, l_a: f64) -> f64 {
    p_tx * g_tot / l_p * (1.0 - 1.0 / l_a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    Los,
    Nlos,
}

/// Propagation environment shared by all BS-UAV links.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub urban: UrbanProfile,
    pub atmosphere: Atmosphere,
    pub channel: ChannelOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioConfig {
    /// UAV transmit power (W).
    pub p_tx: f64,
    pub band: Band,
    /// BS array.
    pub array: ArrayConfig,
    /// UAV antenna gain (dBi), isotropic.
    pub uav_gain: f64,
    pub mc_samples: u32,
    pub rng_seed: u64,
}

impl RadioConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p_tx > 0.0 && self.p_tx.is_finite()) {
            return Err(Error::validation(format!("p_tx must be > 0, got {}", self.p_tx)));
        }
        if self.mc_samples == 0 {
            return Err(Error::validation("mc_samples must be >= 1"));
        }
        if !self.uav_gain.is_finite() {
            return Err(Error::validation("uav gain must be finite"));
        }
        self.band.validate()?;
        self.array.validate()
    }

    /// Whether pointing error changes anything for this radio.
    fn mismatch_matters(&self) -> bool {
        self.array.sigma_mismatch > 0.0 && !self.array.is_single_element()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    /// LoS SNR at perfect pointing (linear).
    pub snr_los: f64,
    /// NLoS SNR at perfect pointing (linear); zero for THz.
    pub snr_nlos: f64,
    pub n_jn: f64,
    /// Molecular noise at perfect pointing (W).
    pub n_m: f64,
    /// Expected throughput (bit/s).
    pub r_cm: f64,
    pub pr_los: f64,
}

/// Per-geometry losses, dB.
#[derive(Debug, Clone, Copy)]
struct Losses {
    los_db: f64,
    /// `None` when the band has no NLoS path.
    nlos_db: Option<f64>,
    /// THz split of the LoS loss into (propagation, absorption).
    thz: Option<(f64, f64)>,
}

/// Link evaluator for one radio and environment at a fixed altitude.
///
/// Pointing-error draws are taken once at construction and reused for
/// every distance, so the throughput is a deterministic, smooth function of
/// `r` for a given seed.
#[derive(Debug, Clone)]
pub struct LinkEvaluator {
    base: Geometry,
    env: Environment,
    radio: RadioConfig,
    n_jn: f64,
    kappa: f64,
    /// Array gain (dB) for each pointing-error draw.
    array_terms: Vec<f64>,
}

impl LinkEvaluator {
    pub fn new(base: Geometry, env: &Environment, radio: &RadioConfig) -> Result<Self> {
        base.validate()?;
        radio.validate()?;
        env.atmosphere.validate()?;
        let band = radio.band;
        let kappa = match band.kind {
            BandKind::Thz => channel::absorption_coefficient(band.carrier_hz, &env.atmosphere)?,
            _ => 0.0,
        };
        let draws = if radio.mismatch_matters() {
            antenna::mismatch_samples(radio.rng_seed, radio.array.sigma_mismatch, radio.mc_samples)
        } else {
            vec![Mismatch::NONE]
        };
        let array_terms = draws
            .iter()
            .map(|m| {
                // zenith 90 with g_e_max 0 isolates the array term
                let sg = antenna::steered_gain(90.0, &ArrayConfig { g_e_max: 0.0, ..radio.array }, *m)?;
                Ok(sg.gain_db)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LinkEvaluator {
            base,
            env: *env,
            radio: *radio,
            n_jn: johnson_nyquist_noise(band.bandwidth_hz, band.carrier_hz, env.atmosphere.temperature_k),
            kappa,
            array_terms,
        })
    }

    pub fn radio(&self) -> &RadioConfig {
        &self.radio
    }

    pub fn base(&self) -> &Geometry {
        &self.base
    }

    pub fn n_jn(&self) -> f64 {
        self.n_jn
    }

    fn losses(&self, geom: &Geometry) -> Result<Losses> {
        let band = self.radio.band;
        let opts = self.env.channel;
        Ok(match band.kind {
            BandKind::Sub6 => {
                let pl = channel::path_loss_sub6(geom, band.carrier_hz, opts)?;
                Losses { los_db: pl.los_db, nlos_db: Some(pl.nlos_db), thz: None }
            }
            BandKind::MmWave => {
                let pl = channel::path_loss_mmwave(geom, &self.env.urban, band.carrier_hz, opts)?;
                Losses { los_db: pl.los_db, nlos_db: Some(pl.nlos_db), thz: None }
            }
            BandKind::Thz => {
                let d = geom.d_3d();
                if !(d > 0.0) {
                    return Err(Error::validation("3D distance must be > 0"));
                }
                let pl = channel::thz_loss_with_kappa(d, band.carrier_hz, self.kappa);
                Losses { los_db: pl.los_db, nlos_db: None, thz: Some((pl.propagation_db, pl.absorption_db)) }
            }
        })
    }

    fn element_db(&self, geom: &Geometry) -> f64 {
        antenna::element_gain(geom.zenith_deg(), 0.0, self.radio.array.g_e_max)
    }

    /// SNR for one condition with total antenna gain `g_tot_db`.
    fn snr_with_gain(&self, losses: &Losses, condition: Condition, g_tot_db: f64) -> (f64, f64) {
        let g = db_to_linear(g_tot_db);
        let p_tx = self.radio.p_tx;
        let n_m = match losses.thz {
            Some((lp_db, la_db)) => molecular_noise(p_tx, g, db_to_linear(lp_db), db_to_linear(la_db)),
            None => 0.0,
        };
        let pl_db = match condition {
            Condition::Los => losses.los_db,
            Condition::Nlos => match losses.nlos_db {
                Some(v) => v,
                None => return (0.0, n_m),
            },
        };
        (p_tx * g / db_to_linear(pl_db) / (self.n_jn + n_m), n_m)
    }

    /// SNR at horizontal distance `r` for one condition and pointing error.
    pub fn snr(&self, r: f64, condition: Condition, mismatch: Mismatch) -> Result<f64> {
        let geom = self.base.with_r(r);
        let losses = self.losses(&geom)?;
        let array = antenna::steered_gain(90.0, &ArrayConfig { g_e_max: 0.0, ..self.radio.array }, mismatch)?;
        let g_tot = self.element_db(&geom) + array.gain_db + self.radio.uav_gain;
        Ok(self.snr_with_gain(&losses, condition, g_tot).0)
    }

    /// Full link budget at horizontal distance `r`.
    pub fn budget(&self, r: f64) -> Result<LinkBudget> {
        let geom = self.base.with_r(r);
        let losses = self.losses(&geom)?;
        let pr_los = channel::los_probability(geom.h_u, geom.r)?;
        let fixed_db = self.element_db(&geom) + self.radio.uav_gain;

        let mut sum_los = 0.0;
        let mut sum_nlos = 0.0;
        for &array_db in &self.array_terms {
            let g = fixed_db + array_db;
            sum_los += self.snr_with_gain(&losses, Condition::Los, g).0.ln_1p();
            if pr_los < 1.0 {
                sum_nlos += self.snr_with_gain(&losses, Condition::Nlos, g).0.ln_1p();
            }
        }
        let n = self.array_terms.len() as f64;
        let to_bits = std::f64::consts::LOG2_E / n;
        let se = sum_los * to_bits * pr_los + sum_nlos * to_bits * (1.0 - pr_los);

        let nominal = fixed_db + antenna::array_gain(antenna::Steering::BROADSIDE, &self.radio.array)?;
        let (snr_los, n_m) = self.snr_with_gain(&losses, Condition::Los, nominal);
        let (snr_nlos, _) = self.snr_with_gain(&losses, Condition::Nlos, nominal);
        Ok(LinkBudget {
            snr_los,
            snr_nlos,
            n_jn: self.n_jn,
            n_m,
            r_cm: self.radio.band.bandwidth_hz * se,
            pr_los,
        })
    }

    /// Expected throughput (bit/s) at horizontal distance `r`.
    pub fn rate(&self, r: f64) -> Result<f64> {
        Ok(self.budget(r)?.r_cm)
    }
}

/// SNR for one condition at the given geometry and pointing error.
pub fn snr(
    geom: &Geometry,
    env: &Environment,
    radio: &RadioConfig,
    condition: Condition,
    mismatch: Mismatch,
) -> Result<f64> {
    LinkEvaluator::new(*geom, env, radio)?.snr(geom.r, condition, mismatch)
}

/// Expected throughput and the supporting budget terms at `geom`.
pub fn expected_throughput(geom: &Geometry, env: &Environment, radio: &RadioConfig) -> Result<LinkBudget> {
    LinkEvaluator::new(*geom, env, radio)?.budget(geom.r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn env() -> Environment {
        Environment {
            urban: UrbanProfile { building_height: 10.0, street_width: 15.0 },
            atmosphere: Atmosphere::default(),
            channel: ChannelOptions::default(),
        }
    }

    fn radio(kind: BandKind, m: u32, sigma: f64) -> RadioConfig {
        RadioConfig {
            p_tx: dbm_to_watts(23.0),
            band: Band::with_defaults(kind),
            array: ArrayConfig { sigma_mismatch: sigma, ..ArrayConfig::new(m, m) },
            uav_gain: 0.0,
            mc_samples: 64,
            rng_seed: 7,
        }
    }

    #[test]
    fn thermal_floor() {
        let n = johnson_nyquist_noise(1.0, 2e9, 300.0);
        assert_relative_eq!(n, 4.141_284_428_318_468e-21, max_relative = 1e-9);
        let dbm_hz = linear_to_db(n) + 30.0;
        assert!((dbm_hz + 174.0).abs() < 0.3);
        assert!(johnson_nyquist_noise(1.0, 350e9, 300.0) < johnson_nyquist_noise(1.0, 2e9, 300.0));
        assert_eq!(johnson_nyquist_noise(2e6, 30e9, 300.0), 2.0 * johnson_nyquist_noise(1e6, 30e9, 300.0));
    }

    #[test]
    fn molecular_noise_cases() {
        assert_eq!(molecular_noise(0.2, 100.0, 1e12, 1.0), 0.0);
        let full = 0.2 * 100.0 / 1e12;
        assert_relative_eq!(molecular_noise(0.2, 100.0, 1e12, 2.0), 0.5 * full, max_relative = 1e-15);
        assert_relative_eq!(molecular_noise(0.2, 100.0, 1e12, 1e300), full, max_relative = 1e-15);
    }

    #[test]
    fn thz_nlos_is_dead() {
        let base = Geometry::new(30.0, 25.0, 200.0).unwrap();
        let s = snr(&base, &env(), &radio(BandKind::Thz, 16, 0.0), Condition::Nlos, Mismatch::NONE).unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn sub6_composed_snr() {
        // UAV directly 100 m above the BS: zenith 0, element 12*(90/65)^2 dB down.
        let base = Geometry::new(125.0, 25.0, 0.0).unwrap();
        let s = snr(&base, &env(), &radio(BandKind::Sub6, 1, 0.0), Condition::Los, Mismatch::NONE).unwrap();
        let pl = 78.020_599_913_279_62;
        let g_db = 8.0 - 12.0 * (90.0f64 / 65.0).powi(2);
        let p_tx = 10f64.powf(-0.7);
        let expected = p_tx * 10f64.powf((g_db - pl) / 10.0) / johnson_nyquist_noise(1e6, 2e9, 300.0);
        assert_relative_eq!(s, expected, max_relative = 1e-6);
    }

    #[test]
    fn single_term_reduction() {
        let base = Geometry::new(150.0, 25.0, 300.0).unwrap();
        let r = radio(BandKind::MmWave, 8, 0.0);
        let b = expected_throughput(&base, &env(), &r).unwrap();
        assert_eq!(b.pr_los, 1.0);
        assert_relative_eq!(b.r_cm, 100e6 * (1.0 + b.snr_los).log2(), max_relative = 1e-12);
    }

    #[test]
    fn rate_bounded_by_los_capacity() {
        for kind in [BandKind::Sub6, BandKind::MmWave, BandKind::Thz] {
            let m = match kind {
                BandKind::Sub6 => 1,
                BandKind::MmWave => 8,
                BandKind::Thz => 16,
            };
            let base = Geometry::new(30.0, 25.0, 0.0).unwrap();
            let ev = LinkEvaluator::new(base, &env(), &radio(kind, m, 3.0)).unwrap();
            for r in [10.0, 100.0, 700.0, 3000.0] {
                let b = ev.budget(r).unwrap();
                let cap = ev.radio().band.bandwidth_hz * (1.0 + b.snr_los).log2();
                assert!(b.r_cm >= 0.0 && b.r_cm <= cap * (1.0 + 1e-12), "{kind} r={r}");
            }
        }
    }

    #[test]
    fn seed_determinism() {
        let base = Geometry::new(30.0, 25.0, 400.0).unwrap();
        let r = radio(BandKind::Thz, 16, 3.0);
        let a = expected_throughput(&base, &env(), &r).unwrap();
        let b = expected_throughput(&base, &env(), &r).unwrap();
        assert_eq!(a.r_cm.to_bits(), b.r_cm.to_bits());
    }
}
