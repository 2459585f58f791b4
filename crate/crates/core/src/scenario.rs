//! Energy needed to process a Q-bit workload under each strategy.
//!
//! Hovering strategies drain the workload at a constant combined rate at
//! the initial distance. Move-and-return strategies fly toward the nearest
//! MEC-capable BS while transmitting, hover at the minimum distance if half
//! of the workload is still pending, and fly back symmetrically.

use rand::Rng;
use serde::{Deserialize, Serialize};
use tracing::warn;

use crate::channel::{self, BandKind, Geometry};
use crate::error::{Error, Result};
use crate::link::{Environment, LinkEvaluator, RadioConfig};
use crate::power::{self, ComputeParams, MassBudget, PowerDraw, PropulsionParams};
use crate::quadrature;
use crate::rng::{substream, DOMAIN_PLACEMENT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    /// Hover, process everything onboard (case A).
    HoverOnboard,
    /// Hover, offload everything (case B).
    HoverOffload,
    /// Hover, onboard and offload in parallel (case C).
    HoverParallel,
    /// Move-and-return while offloading.
    MoveReturnOffload,
    /// Move-and-return with parallel onboard processing.
    MoveReturnParallel,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::HoverOnboard,
        Strategy::HoverOffload,
        Strategy::HoverParallel,
        Strategy::MoveReturnOffload,
        Strategy::MoveReturnParallel,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::HoverOnboard => "hover-onboard",
            Strategy::HoverOffload => "hover-offload",
            Strategy::HoverParallel => "hover-parallel",
            Strategy::MoveReturnOffload => "mr-offload",
            Strategy::MoveReturnParallel => "mr-parallel",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let s = s.to_ascii_lowercase();
        Strategy::ALL.into_iter().find(|k| k.as_str() == s).or(match s.as_str() {
            "a" => Some(Strategy::HoverOnboard),
            "b" => Some(Strategy::HoverOffload),
            "c" => Some(Strategy::HoverParallel),
            "mr-b" => Some(Strategy::MoveReturnOffload),
            "mr-c" => Some(Strategy::MoveReturnParallel),
            _ => None,
        })
    }

    pub fn is_move_return(&self) -> bool {
        matches!(self, Strategy::MoveReturnOffload | Strategy::MoveReturnParallel)
    }

    pub fn uses_link(&self) -> bool {
        !matches!(self, Strategy::HoverOnboard)
    }

    pub fn computes_onboard(&self) -> bool {
        matches!(self, Strategy::HoverOnboard | Strategy::HoverParallel | Strategy::MoveReturnParallel)
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum R0Mode {
    /// Mean nearest-neighbour distance of the Poisson field.
    #[default]
    AnalyticMean,
    /// Average over seeded draws of the nearest-neighbour distance.
    SampledNearest,
}

impl R0Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            R0Mode::AnalyticMean => "analytic-mean",
            R0Mode::SampledNearest => "sampled-nearest",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "analytic-mean" => Some(R0Mode::AnalyticMean),
            "sampled-nearest" => Some(R0Mode::SampledNearest),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deployment {
    /// BS density (1/m^2).
    pub lambda_c: f64,
    /// Probability that a BS offers MEC service.
    pub p_a: f64,
    pub r0_mode: R0Mode,
    /// Closest reachable horizontal distance to the BS (m).
    pub r_min: f64,
    /// Placement draws averaged in `SampledNearest` mode.
    pub n_drops: u32,
}

impl Deployment {
    pub fn lambda_m(&self) -> f64 {
        self.p_a * self.lambda_c
    }

    pub fn mean_r0(&self) -> f64 {
        1.0 / (2.0 * self.lambda_m().sqrt())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_c > 0.0 && self.lambda_c.is_finite()) {
            return Err(Error::validation(format!("lambda_c must be > 0, got {}", self.lambda_c)));
        }
        if !(self.p_a > 0.0 && self.p_a <= 1.0) {
            return Err(Error::validation(format!("p_a must be in (0, 1], got {}", self.p_a)));
        }
        if !(self.r_min > 0.0 && self.r_min.is_finite()) {
            return Err(Error::validation(format!("r_min must be > 0, got {}", self.r_min)));
        }
        if self.n_drops == 0 {
            return Err(Error::validation("n_drops must be >= 1"));
        }
        Ok(())
    }
}

/// Distance to the nearest MEC-capable BS. `AnalyticMean` returns the
/// field's mean; `SampledNearest` returns draw 0 of the seeded sequence.
pub fn r0_distance(dep: &Deployment, seed: u64) -> f64 {
    match dep.r0_mode {
        R0Mode::AnalyticMean => dep.mean_r0(),
        R0Mode::SampledNearest => r0_draw(dep, seed, 0),
    }
}

/// Nearest-neighbour distance of a Poisson field with density lambda_M:
/// P(R > r) = exp(-lambda_M pi r^2).
pub fn r0_draw(dep: &Deployment, seed: u64, index: u32) -> f64 {
    let mut rng = substream(seed, DOMAIN_PLACEMENT, index);
    let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
    (-u.ln() / (dep.lambda_m() * std::f64::consts::PI)).sqrt()
}

/// Onboard processing rate (bit/s).
pub fn compute_rate(cp: &ComputeParams) -> Result<f64> {
    if !(cp.c_cp > 0.0) {
        return Err(Error::InvalidComputeParams(format!("c_cp must be > 0, got {}", cp.c_cp)));
    }
    Ok(cp.f_cp / cp.c_cp)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub strategy: Strategy,
    pub q_bits: f64,
    /// Cruise speed for move-and-return (m/s).
    pub v: f64,
    pub altitude: f64,
    pub bs_height: f64,
    pub mass: MassBudget,
    pub compute: ComputeParams,
    pub propulsion: PropulsionParams,
    /// Communication power (W); zero in the reference model.
    pub p_cm: f64,
    pub radio: RadioConfig,
    pub env: Environment,
    pub deployment: Deployment,
}

impl ScenarioSpec {
    pub fn seed(&self) -> u64 {
        self.radio.rng_seed
    }

    /// Mass actually flown: offload-only strategies leave the computer behind.
    pub fn flown_mass(&self) -> MassBudget {
        if self.strategy.computes_onboard() {
            self.mass
        } else {
            self.mass.without_computer()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q_bits > 0.0 && self.q_bits.is_finite()) {
            return Err(Error::validation(format!("q_bits must be > 0, got {}", self.q_bits)));
        }
        if !(self.v >= 0.0 && self.v.is_finite()) {
            return Err(Error::validation(format!("v must be >= 0, got {}", self.v)));
        }
        if self.strategy.is_move_return() && !(self.v > 0.0) {
            return Err(Error::validation("move-and-return needs v > 0"));
        }
        if !(self.p_cm >= 0.0 && self.p_cm.is_finite()) {
            return Err(Error::validation("p_cm must be >= 0"));
        }
        self.mass.validate()?;
        if self.strategy.computes_onboard() && !(self.mass.m_cp > 0.0) {
            return Err(Error::validation(format!(
                "{} computes onboard and needs m_cp > 0",
                self.strategy
            )));
        }
        self.compute.validate(self.strategy.computes_onboard())?;
        let v_max = power::VALIDATION_MAX_SPEED.max(self.v);
        self.propulsion.validate(&[self.mass.m_0, self.mass.m_u()], v_max)?;
        self.deployment.validate()?;
        if self.strategy.uses_link() {
            self.radio.validate()?;
            self.env.urban.validate()?;
            self.env.atmosphere.validate()?;
            // model-range probe at the closest approach
            let probe = Geometry::new(self.altitude, self.bs_height, self.deployment.r_min)?;
            channel::los_probability(probe.h_u, probe.r)?;
            let band = self.radio.band;
            match band.kind {
                BandKind::Sub6 => {
                    channel::path_loss_sub6(&probe, band.carrier_hz, self.env.channel)?;
                }
                BandKind::MmWave => {
                    channel::path_loss_mmwave(&probe, &self.env.urban, band.carrier_hz, self.env.channel)?;
                }
                BandKind::Thz => {
                    channel::path_loss_thz(&probe, &self.env.atmosphere, band.carrier_hz)?;
                }
            }
        }
        Ok(())
    }

    fn power_at(&self, v: f64) -> PowerDraw {
        power::power_draw(
            v,
            &self.flown_mass(),
            &self.propulsion,
            &self.compute,
            self.strategy.computes_onboard(),
            self.p_cm,
        )
    }

    fn onboard_rate(&self) -> Result<f64> {
        if self.strategy.computes_onboard() {
            compute_rate(&self.compute)
        } else {
            Ok(0.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub propulsion_j: f64,
    pub compute_j: f64,
    pub communication_j: f64,
}

impl EnergyBreakdown {
    pub fn total(&self) -> f64 {
        self.propulsion_j + self.compute_j + self.communication_j
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSample {
    pub t: f64,
    pub r: f64,
    pub r_tot: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub strategy: Strategy,
    pub t_m: f64,
    pub t_h: f64,
    pub t_total: f64,
    pub energy_j: f64,
    pub breakdown: EnergyBreakdown,
    /// Initial horizontal distance (mean over drops when sampled).
    pub r0: f64,
    /// Combined drain rate at the initial distance (bit/s).
    pub rate_start: f64,
    pub seed: u64,
    /// Placement draws averaged into this report.
    pub drops: u32,
    /// Standard error of `energy_j` over drops, zero for a single drop.
    pub energy_stderr: f64,
    pub rate_trace: Option<Vec<RateSample>>,
    pub warnings: Vec<String>,
}

/// Timing of a move-and-return run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MrTimes {
    pub t_mr: f64,
    pub t_m: f64,
    pub t_h: f64,
    /// Flight time from the start to the minimum distance.
    pub t_reach: f64,
    /// Whether the minimum distance was reached before half the workload.
    pub reached_min: bool,
    /// |bits sent on the outbound half - Q/2|.
    pub residual_bits: f64,
}

/// Straight-line approach toward the BS at constant speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Approach {
    pub r0: f64,
    pub r_min: f64,
    pub v: f64,
}

impl Approach {
    pub fn t_reach(&self) -> f64 {
        (self.r0 - self.r_min).max(0.0) / self.v
    }

    /// Horizontal distance at time t on the outbound leg.
    pub fn distance_at(&self, t: f64) -> f64 {
        (self.r0 - self.v * t).max(self.r_min)
    }
}

/// Relative quadrature tolerance per integration call.
const QUAD_REL_TOL: f64 = 1e-11;

/// Solve Q/2 = integral over [0, T_MR/2] of R_tot(r(t)) dt for T_MR, given
/// the drain rate as a function of horizontal distance.
pub fn solve_mr_time_for<F>(rate: F, path: Approach, q_bits: f64) -> Result<MrTimes>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(path.v > 0.0) {
        return Err(Error::validation("move-and-return needs v > 0"));
    }
    let target = 0.5 * q_bits;
    let tol = QUAD_REL_TOL * target;
    let t_reach = path.t_reach();
    let g = |t: f64| rate(path.distance_at(t));

    let rate_min = rate(path.r_min.max(path.r0.min(path.r_min)))?;
    let rate_start = rate(path.r0.max(path.r_min))?;
    if !(rate_min > 0.0) && !(rate_start > 0.0) {
        return Err(Error::NoSolution("drain rate is zero along the whole path".into()));
    }

    let f_reach = quadrature::integrate(g, 0.0, t_reach, tol)?;
    let (t_half, residual) = if f_reach >= target {
        // bisection on the outbound time with incremental integrals
        let (mut lo, mut hi, mut f_lo) = (0.0, t_reach, 0.0);
        for _ in 0..200 {
            if hi - lo <= 1e-13 * t_reach.max(1.0) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let f_mid = f_lo + quadrature::integrate(g, lo, mid, tol)?;
            if f_mid < target {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
        }
        let slope = g(lo)?;
        let t = if slope > 0.0 { (lo + (target - f_lo) / slope).clamp(lo, hi) } else { hi };
        let f_t = f_lo + quadrature::integrate(g, lo, t, tol)?;
        (t, (f_t - target).abs())
    } else {
        if !(rate_min > 0.0) {
            return Err(Error::NoSolution("zero drain rate at the minimum distance".into()));
        }
        (t_reach + (target - f_reach) / rate_min, 0.0)
    };

    let t_mr = 2.0 * t_half;
    let reached_min = !(path.r0 - path.v * t_mr / 2.0 > path.r_min);
    let t_m = if reached_min { 2.0 * t_reach } else { t_mr };
    Ok(MrTimes { t_mr, t_m, t_h: t_mr - t_m, t_reach, reached_min, residual_bits: residual })
}

/// Link evaluator at the scenario's altitude, or `None` when the strategy
/// never transmits.
fn link_for(spec: &ScenarioSpec) -> Result<Option<LinkEvaluator>> {
    if !spec.strategy.uses_link() {
        return Ok(None);
    }
    let base = Geometry::new(spec.altitude, spec.bs_height, 0.0)?;
    Ok(Some(LinkEvaluator::new(base, &spec.env, &spec.radio)?))
}

fn total_rate(link: Option<&LinkEvaluator>, onboard: f64, r: f64) -> Result<f64> {
    Ok(onboard + match link {
        Some(l) => l.rate(r)?,
        None => 0.0,
    })
}

const MONOTONE_PROBES: usize = 16;

fn check_monotone<F: Fn(f64) -> Result<f64>>(rate: &F, path: &Approach) -> Result<Option<String>> {
    if path.r0 <= path.r_min {
        return Ok(None);
    }
    let mut prev = rate(path.r_min)?;
    for i in 1..=MONOTONE_PROBES {
        let r = path.r_min + (path.r0 - path.r_min) * i as f64 / MONOTONE_PROBES as f64;
        let cur = rate(r)?;
        if cur > prev * (1.0 + 1e-9) {
            return Ok(Some(format!(
                "drain rate is not non-increasing in distance near r = {r:.1} m ({prev:.6e} -> {cur:.6e} bit/s)"
            )));
        }
        prev = cur;
    }
    Ok(None)
}

fn trace<F: Fn(f64) -> Result<f64>>(rate: &F, path: Option<&Approach>, r0: f64, t_half: f64, n: usize) -> Result<Vec<RateSample>> {
    (0..n)
        .map(|i| {
            let t = if n > 1 { t_half * i as f64 / (n - 1) as f64 } else { 0.0 };
            let r = path.map_or(r0, |p| p.distance_at(t));
            Ok(RateSample { t, r, r_tot: rate(r)? })
        })
        .collect()
}

fn hover_at(spec: &ScenarioSpec, link: Option<&LinkEvaluator>, r0: f64, trace_points: usize) -> Result<EnergyReport> {
    let onboard = spec.onboard_rate()?;
    let rate = |r: f64| total_rate(link, onboard, r);
    let r_tot = rate(r0)?;
    if !(r_tot > 0.0) {
        return Err(Error::ZeroTotalRate);
    }
    let t_h = spec.q_bits / r_tot;
    let p = spec.power_at(0.0);
    let breakdown = EnergyBreakdown {
        propulsion_j: p.propulsion * t_h,
        compute_j: p.compute * t_h,
        communication_j: p.communication * t_h,
    };
    Ok(EnergyReport {
        strategy: spec.strategy,
        t_m: 0.0,
        t_h,
        t_total: t_h,
        energy_j: breakdown.total(),
        breakdown,
        r0,
        rate_start: r_tot,
        seed: spec.seed(),
        drops: 1,
        energy_stderr: 0.0,
        rate_trace: (trace_points > 0).then(|| trace(&rate, None, r0, t_h, trace_points)).transpose()?,
        warnings: Vec::new(),
    })
}

fn mr_at(spec: &ScenarioSpec, link: Option<&LinkEvaluator>, r0: f64, trace_points: usize) -> Result<EnergyReport> {
    let onboard = spec.onboard_rate()?;
    let rate = |r: f64| total_rate(link, onboard, r);
    let path = Approach { r0, r_min: spec.deployment.r_min, v: spec.v };
    let mut warnings = Vec::new();
    if let Some(w) = check_monotone(&rate, &path)? {
        warn!("{w}");
        warnings.push(w);
    }
    let times = solve_mr_time_for(rate, path, spec.q_bits)?;
    let moving = spec.power_at(spec.v);
    let hovering = spec.power_at(0.0);
    let breakdown = EnergyBreakdown {
        propulsion_j: moving.propulsion * times.t_m + hovering.propulsion * times.t_h,
        compute_j: moving.compute * times.t_m + hovering.compute * times.t_h,
        communication_j: moving.communication * times.t_m + hovering.communication * times.t_h,
    };
    Ok(EnergyReport {
        strategy: spec.strategy,
        t_m: times.t_m,
        t_h: times.t_h,
        t_total: times.t_m + times.t_h,
        energy_j: breakdown.total(),
        breakdown,
        r0,
        rate_start: rate(r0.max(path.r_min))?,
        seed: spec.seed(),
        drops: 1,
        energy_stderr: 0.0,
        rate_trace: (trace_points > 0)
            .then(|| trace(&rate, Some(&path), r0, 0.5 * times.t_mr, trace_points))
            .transpose()?,
        warnings,
    })
}

/// Hovering energy at the deployment's initial distance.
pub fn hover_energy(spec: &ScenarioSpec) -> Result<EnergyReport> {
    if spec.strategy.is_move_return() {
        return Err(Error::validation(format!("{} is not a hovering strategy", spec.strategy)));
    }
    spec.validate()?;
    let link = link_for(spec)?;
    hover_at(spec, link.as_ref(), initial_distance(spec, 0), 0)
}

/// Move-and-return timing at the deployment's initial distance.
pub fn solve_mr_time(spec: &ScenarioSpec) -> Result<MrTimes> {
    if !spec.strategy.is_move_return() {
        return Err(Error::validation(format!("{} is not a move-and-return strategy", spec.strategy)));
    }
    spec.validate()?;
    let link = link_for(spec)?;
    let onboard = spec.onboard_rate()?;
    let path = Approach { r0: initial_distance(spec, 0), r_min: spec.deployment.r_min, v: spec.v };
    solve_mr_time_for(|r| total_rate(link.as_ref(), onboard, r), path, spec.q_bits)
}

/// Move-and-return energy at the deployment's initial distance.
pub fn mr_energy(spec: &ScenarioSpec) -> Result<EnergyReport> {
    if !spec.strategy.is_move_return() {
        return Err(Error::validation(format!("{} is not a move-and-return strategy", spec.strategy)));
    }
    spec.validate()?;
    let link = link_for(spec)?;
    mr_at(spec, link.as_ref(), initial_distance(spec, 0), 0)
}

fn initial_distance(spec: &ScenarioSpec, drop: u32) -> f64 {
    let dep = &spec.deployment;
    let r = match dep.r0_mode {
        R0Mode::AnalyticMean => dep.mean_r0(),
        R0Mode::SampledNearest => r0_draw(dep, spec.seed(), drop),
    };
    r.max(dep.r_min)
}

/// Energy report for `spec`, dispatching on the strategy.
pub fn evaluate(spec: &ScenarioSpec) -> Result<EnergyReport> {
    evaluate_traced(spec, 0)
}

/// As [`evaluate`], additionally sampling `trace_points` points of the
/// drain rate over the outbound half (or the hover interval).
pub fn evaluate_traced(spec: &ScenarioSpec, trace_points: usize) -> Result<EnergyReport> {
    spec.validate()?;
    let link = link_for(spec)?;
    let one = |r0: f64, points: usize| {
        if spec.strategy.is_move_return() {
            mr_at(spec, link.as_ref(), r0, points)
        } else {
            hover_at(spec, link.as_ref(), r0, points)
        }
    };
    match spec.deployment.r0_mode {
        R0Mode::AnalyticMean => one(initial_distance(spec, 0), trace_points),
        R0Mode::SampledNearest => {
            let n = spec.deployment.n_drops;
            let reports = (0..n)
                .map(|i| one(initial_distance(spec, i), if i == 0 { trace_points } else { 0 }))
                .collect::<Result<Vec<_>>>()?;
            Ok(average_reports(reports))
        }
    }
}

fn average_reports(reports: Vec<EnergyReport>) -> EnergyReport {
    let n = reports.len() as f64;
    let mean = |f: &dyn Fn(&EnergyReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
    let breakdown = EnergyBreakdown {
        propulsion_j: mean(&|r| r.breakdown.propulsion_j),
        compute_j: mean(&|r| r.breakdown.compute_j),
        communication_j: mean(&|r| r.breakdown.communication_j),
    };
    let energy = breakdown.total();
    let stderr = if reports.len() > 1 {
        let var = reports.iter().map(|r| (r.energy_j - energy).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    let t_m = mean(&|r| r.t_m);
    let t_h = mean(&|r| r.t_h);
    let mut warnings: Vec<String> = reports.iter().flat_map(|r| r.warnings.iter().cloned()).collect();
    warnings.dedup();
    let first = &reports[0];
    EnergyReport {
        strategy: first.strategy,
        t_m,
        t_h,
        t_total: t_m + t_h,
        energy_j: energy,
        breakdown,
        r0: mean(&|r| r.r0),
        rate_start: mean(&|r| r.rate_start),
        seed: first.seed,
        drops: reports.len() as u32,
        energy_stderr: stderr,
        rate_trace: first.rate_trace.clone(),
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn analytic_r0() {
        let dep = Deployment { lambda_c: 1e-6, p_a: 1.0, r0_mode: R0Mode::AnalyticMean, r_min: 10.0, n_drops: 1 };
        assert_relative_eq!(r0_distance(&dep, 0), 500.0, max_relative = 1e-14);
        let sparse = Deployment { p_a: 0.25, ..dep };
        assert_relative_eq!(r0_distance(&sparse, 0), 1000.0, max_relative = 1e-14);
    }

    #[test]
    fn sampled_r0_mean() {
        let dep = Deployment {
            lambda_c: 2e-7,
            p_a: 1.0,
            r0_mode: R0Mode::SampledNearest,
            r_min: 10.0,
            n_drops: 1,
        };
        let n = 100_000;
        let mean = (0..n).map(|i| r0_draw(&dep, 3, i)).sum::<f64>() / n as f64;
        assert!((mean / dep.mean_r0() - 1.0).abs() < 0.01, "mean {mean}");
        assert_eq!(r0_distance(&dep, 3), r0_draw(&dep, 3, 0));
    }

    #[test]
    fn compute_rate_cases() {
        let cp = ComputeParams::default();
        assert_relative_eq!(compute_rate(&cp).unwrap(), 8e6, max_relative = 1e-15);
        let slow = ComputeParams { c_cp: 1000.0, ..cp };
        assert_eq!(compute_rate(&slow).unwrap(), 0.5 * compute_rate(&cp).unwrap());
        assert_eq!(compute_rate(&ComputeParams { f_cp: 0.0, ..cp }).unwrap(), 0.0);
        assert!(matches!(
            compute_rate(&ComputeParams { c_cp: 0.0, ..cp }),
            Err(Error::InvalidComputeParams(_))
        ));
    }

    #[test]
    fn constant_rate_never_reaching_min() {
        let path = Approach { r0: 1000.0, r_min: 10.0, v: 1.0 };
        let t = solve_mr_time_for(|_| Ok(1e6), path, 2e8).unwrap();
        assert_relative_eq!(t.t_mr, 200.0, max_relative = 1e-12);
        assert_eq!(t.t_m, t.t_mr);
        assert_eq!(t.t_h, 0.0);
        assert!(!t.reached_min);
    }

    #[test]
    fn constant_rate_reaching_min() {
        let path = Approach { r0: 110.0, r_min: 10.0, v: 10.0 };
        let t = solve_mr_time_for(|_| Ok(1e6), path, 1e8).unwrap();
        assert_relative_eq!(t.t_mr, 100.0, max_relative = 1e-12);
        assert_eq!(t.t_m, 20.0);
        assert_relative_eq!(t.t_h, 80.0, max_relative = 1e-12);
        assert!(t.reached_min);
    }

    #[test]
    fn linear_rate_closed_form() {
        // rate(r) = a - b r, r(t) = r0 - v t: F(t) = (a - b r0) t + b v t^2 / 2
        let (a, b) = (2e6, 1e3);
        let path = Approach { r0: 1000.0, r_min: 10.0, v: 5.0 };
        let q = 4e8;
        let t = solve_mr_time_for(|r| Ok(a - b * r), path, q).unwrap();
        let c0 = a - b * path.r0;
        let half = (-c0 + (c0 * c0 + 2.0 * b * path.v * q / 2.0).sqrt()) / (b * path.v);
        assert_relative_eq!(t.t_mr, 2.0 * half, max_relative = 1e-9);
        assert!(t.residual_bits <= 1e-6 * q / 2.0);
    }

    #[test]
    fn zero_rate_has_no_solution() {
        let path = Approach { r0: 100.0, r_min: 10.0, v: 5.0 };
        assert!(matches!(solve_mr_time_for(|_| Ok(0.0), path, 1e6), Err(Error::NoSolution(_))));
    }

    #[test]
    fn start_inside_min_distance() {
        let path = Approach { r0: 5.0, r_min: 10.0, v: 5.0 };
        let t = solve_mr_time_for(|_| Ok(1e6), path, 1e6).unwrap();
        assert_eq!(t.t_reach, 0.0);
        assert_eq!(t.t_m, 0.0);
        assert_relative_eq!(t.t_h, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(Strategy::parse(s.as_str()), Some(s));
        }
        assert_eq!(Strategy::parse("B"), Some(Strategy::HoverOffload));
        assert_eq!(Strategy::parse("nope"), None);
    }
}
