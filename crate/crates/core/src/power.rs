//! UAV platform power: rotor propulsion, onboard computation and their sum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Motor-level propulsion model constants.
///
/// `coeffs[i]` multiplies omega^i in the per-motor electrical power
/// polynomial; the airframe has four motors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropulsionParams {
    pub coeffs: [f64; 5],
    /// Thrust coefficient, N per (rad/s)^2.
    pub c_t: f64,
    /// Drag coefficient, N per (m/s)^2.
    pub c_d: f64,
    pub g: f64,
}

impl Default for PropulsionParams {
    /// Illustrative constants for a ~3 kg quadrotor with 10-inch props.
    /// They are not calibrated measurements; supply motor-specific values
    /// for quantitative work.
    fn default() -> Self {
        PropulsionParams {
            coeffs: [1.5, 2.0e-3, 1.2e-5, 2.0e-7, 1.0e-11],
            c_t: 2.4e-5,
            c_d: 0.06,
            g: 9.81,
        }
    }
}

/// Velocity grid used when checking that propulsion power is well behaved.
pub const VALIDATION_MAX_SPEED: f64 = 30.0;
const VALIDATION_STEP: f64 = 0.25;

impl PropulsionParams {
    /// Check that P_pr(V) is positive and non-decreasing on [0, v_max] for
    /// each of the given masses.
    pub fn validate(&self, masses: &[f64], v_max: f64) -> Result<()> {
        if !(self.c_t > 0.0) {
            return Err(Error::InvalidPropulsionParams(format!("C_T must be > 0, got {}", self.c_t)));
        }
        if !(self.g > 0.0) {
            return Err(Error::InvalidPropulsionParams(format!("g must be > 0, got {}", self.g)));
        }
        if !(self.c_d >= 0.0) || self.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPropulsionParams("coefficients must be finite, C_d >= 0".into()));
        }
        let steps = (v_max / VALIDATION_STEP).ceil() as usize;
        for &m in masses {
            let mut prev = f64::NEG_INFINITY;
            for i in 0..=steps {
                let v = (i as f64 * VALIDATION_STEP).min(v_max);
                let p = propulsion_power_for_mass(v, m, self);
                if !(p > 0.0) {
                    return Err(Error::InvalidPropulsionParams(format!(
                        "propulsion power {p} W is not positive at V={v} m/s, m={m} kg"
                    )));
                }
                if p < prev - 1e-9 {
                    return Err(Error::InvalidPropulsionParams(format!(
                        "propulsion power decreases near V={v} m/s for m={m} kg"
                    )));
                }
                prev = p;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassBudget {
    /// Airframe mass without the computer (kg).
    pub m_0: f64,
    /// Onboard computer mass (kg).
    pub m_cp: f64,
}

impl MassBudget {
    pub fn m_u(&self) -> f64 {
        self.m_0 + self.m_cp
    }

    pub fn without_computer(&self) -> Self {
        MassBudget { m_cp: 0.0, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m_0 > 0.0 && self.m_0.is_finite()) {
            return Err(Error::validation(format!("m_0 must be > 0, got {}", self.m_0)));
        }
        if !(self.m_cp >= 0.0 && self.m_cp.is_finite()) {
            return Err(Error::validation(format!("m_cp must be >= 0, got {}", self.m_cp)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComputeParams {
    /// CPU clock (cycles/s).
    pub f_cp: f64,
    /// Effective switched capacitance, W / (cycle/s)^3.
    pub eta: f64,
    /// I/O power (W).
    pub p_io: f64,
    /// Cycles needed per bit.
    pub c_cp: f64,
}

impl Default for ComputeParams {
    fn default() -> Self {
        ComputeParams { f_cp: 4e9, eta: 1e-28, p_io: 0.0, c_cp: 500.0 }
    }
}

impl ComputeParams {
    pub fn validate(&self, onboard: bool) -> Result<()> {
        for (name, v) in [("f_cp", self.f_cp), ("eta", self.eta), ("p_io", self.p_io), ("c_cp", self.c_cp)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidComputeParams(format!("{name} must be >= 0, got {v}")));
            }
        }
        if onboard && !(self.c_cp > 0.0) {
            return Err(Error::InvalidComputeParams("c_cp must be > 0 for onboard computing".into()));
        }
        Ok(())
    }
}

fn rotor_speed_for_mass(v: f64, m_u: f64, pp: &PropulsionParams) -> f64 {
    let weight = m_u * pp.g;
    let hover = (weight / (4.0 * pp.c_t)).sqrt();
    hover * (1.0 + (pp.c_d * pp.c_d) / (weight * weight) * v.powi(4)).powf(0.25)
}

fn propulsion_power_for_mass(v: f64, m_u: f64, pp: &PropulsionParams) -> f64 {
    let w = rotor_speed_for_mass(v, m_u, pp);
    let [c0, c1, c2, c3, c4] = pp.coeffs;
    4.0 * ((((c4 * w + c3) * w + c2) * w + c1) * w + c0)
}

/// Motor angular speed (rad/s) at constant cruise speed `v` (m/s).
pub fn rotor_speed(v: f64, mass: &MassBudget, pp: &PropulsionParams) -> f64 {
    rotor_speed_for_mass(v, mass.m_u(), pp)
}

/// Propulsion power (W) of the four motors at constant speed `v`.
pub fn propulsion_power(v: f64, mass: &MassBudget, pp: &PropulsionParams) -> f64 {
    propulsion_power_for_mass(v, mass.m_u(), pp)
}

/// Onboard computation power (W): eta f^3 + P_io when enabled.
pub fn compute_power(cp: &ComputeParams, enabled: bool) -> f64 {
    if enabled {
        cp.eta * cp.f_cp.powi(3) + cp.p_io
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PowerDraw {
    pub propulsion: f64,
    pub compute: f64,
    pub communication: f64,
}

impl PowerDraw {
    pub fn total(&self) -> f64 {
        self.propulsion + self.compute + self.communication
    }
}

/// Total platform power split by consumer. `p_cm` is the communication
/// power, normally zero.
pub fn power_draw(
    v: f64,
    mass: &MassBudget,
    pp: &PropulsionParams,
    cp: &ComputeParams,
    compute_enabled: bool,
    p_cm: f64,
) -> PowerDraw {
    PowerDraw {
        propulsion: propulsion_power(v, mass, pp),
        compute: compute_power(cp, compute_enabled),
        communication: p_cm,
    }
}

/// P_tot = P_cm + P_cp + P_pr with the communication term neglected.
pub fn total_power(
    v: f64,
    mass: &MassBudget,
    pp: &PropulsionParams,
    cp: &ComputeParams,
    compute_enabled: bool,
) -> f64 {
    power_draw(v, mass, pp, cp, compute_enabled, 0.0).total()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const TABLE_MASS: MassBudget = MassBudget { m_0: 3.0, m_cp: 0.5 };

    fn omega_oracle(v: f64, m: f64, pp: &PropulsionParams) -> f64 {
        let hover = (m * pp.g / (4.0 * pp.c_t)).sqrt();
        let drag = pp.c_d * v * v;
        // thrust balances weight and drag: T = sqrt(W^2 + D^2) = 4 C_T w^2
        let thrust = ((m * pp.g).powi(2) + drag * drag).sqrt();
        let w = (thrust / (4.0 * pp.c_t)).sqrt();
        assert!(w >= hover);
        w
    }

    fn power_oracle(w: f64, pp: &PropulsionParams) -> f64 {
        4.0 * (0..5).map(|i| pp.coeffs[i] * w.powi(i as i32)).sum::<f64>()
    }

    #[test]
    fn hover_rotor_speed() {
        let pp = PropulsionParams::default();
        let w0 = rotor_speed(0.0, &TABLE_MASS, &pp);
        assert_relative_eq!(w0, (3.5 * 9.81 / (4.0 * pp.c_t)).sqrt(), max_relative = 1e-14);
        let no_drag = PropulsionParams { c_d: 0.0, ..pp };
        assert_eq!(rotor_speed(12.0, &TABLE_MASS, &no_drag), rotor_speed(0.0, &TABLE_MASS, &no_drag));
    }

    #[test]
    fn rotor_speed_matches_force_balance() {
        let pp = PropulsionParams::default();
        for v in [0.0, 5.0, 10.0, 20.0] {
            assert_relative_eq!(
                rotor_speed(v, &TABLE_MASS, &pp),
                omega_oracle(v, 3.5, &pp),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn propulsion_table() {
        let pp = PropulsionParams::default();
        let mut prev = 0.0;
        for v in [0.0, 5.0, 10.0, 20.0] {
            let p = propulsion_power(v, &TABLE_MASS, &pp);
            assert_relative_eq!(p, power_oracle(omega_oracle(v, 3.5, &pp), &pp), max_relative = 1e-12);
            assert!(p >= prev);
            prev = p;
        }
    }

    #[test]
    fn heavier_costs_more() {
        let pp = PropulsionParams::default();
        let light = MassBudget { m_0: 3.0, m_cp: 0.0 };
        assert!(propulsion_power(0.0, &TABLE_MASS, &pp) > propulsion_power(0.0, &light, &pp));
    }

    #[test]
    fn finite_difference_non_negative() {
        let pp = PropulsionParams::default();
        let mut v = 0.0;
        while v < 30.0 {
            let d = propulsion_power(v + 0.01, &TABLE_MASS, &pp) - propulsion_power(v, &TABLE_MASS, &pp);
            assert!(d >= -1e-9, "dP = {d} at v = {v}");
            v += 0.01;
        }
    }

    #[test]
    fn compute_power_cases() {
        let cp = ComputeParams::default();
        assert_relative_eq!(compute_power(&cp, true), 6.4, max_relative = 1e-12);
        assert_eq!(compute_power(&cp, false), 0.0);
        let idle = ComputeParams { f_cp: 0.0, p_io: 1.5, ..cp };
        assert_eq!(compute_power(&idle, true), 1.5);
        let doubled = ComputeParams { eta: 2e-28, ..cp };
        assert_eq!(compute_power(&doubled, true), 2.0 * compute_power(&cp, true));
    }

    #[test]
    fn total_is_sum() {
        let pp = PropulsionParams::default();
        let cp = ComputeParams::default();
        let v = 7.0;
        assert_eq!(total_power(v, &TABLE_MASS, &pp, &cp, false), propulsion_power(v, &TABLE_MASS, &pp));
        assert_eq!(
            total_power(v, &TABLE_MASS, &pp, &cp, true),
            propulsion_power(v, &TABLE_MASS, &pp) + compute_power(&cp, true)
        );
        assert_relative_eq!(
            total_power(0.0, &TABLE_MASS, &pp, &cp, true),
            propulsion_power(0.0, &TABLE_MASS, &pp) + 6.4,
            max_relative = 1e-14
        );
    }

    #[test]
    fn onboard_case_costs_more_than_offload() {
        let pp = PropulsionParams::default();
        let cp = ComputeParams::default();
        let a = total_power(10.0, &TABLE_MASS, &pp, &cp, true);
        let b = total_power(10.0, &TABLE_MASS.without_computer(), &pp, &cp, false);
        assert!(a > b);
    }

    #[test]
    fn validation_catches_bad_params() {
        let pp = PropulsionParams::default();
        assert!(pp.validate(&[3.0, 3.5], VALIDATION_MAX_SPEED).is_ok());
        let decreasing = PropulsionParams { coeffs: [400.0, -0.5, 0.0, 0.0, 0.0], ..pp };
        assert!(matches!(
            decreasing.validate(&[3.0], VALIDATION_MAX_SPEED),
            Err(Error::InvalidPropulsionParams(_))
        ));
        let no_thrust = PropulsionParams { c_t: 0.0, ..pp };
        assert!(no_thrust.validate(&[3.0], 30.0).is_err());
    }
}
