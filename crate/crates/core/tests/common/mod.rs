#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use uavmec::channel::{BandKind, Geometry};
use uavmec::config::{Config, Value};
use uavmec::link::LinkEvaluator;
use uavmec::scenario::{self, ScenarioSpec, Strategy};

/// Default configuration with a few fields replaced.
pub fn config(sets: &[(&str, Value)]) -> Config {
    sets.iter().fold(Config::default(), |c, (p, v)| c.with_value(p, v.clone()).unwrap())
}

pub fn spec(sets: &[(&str, Value)]) -> ScenarioSpec {
    config(sets).spec().unwrap()
}

pub fn text(s: &str) -> Value {
    Value::Text(s.into())
}

pub fn num(x: f64) -> Value {
    Value::Float(x)
}

/// Combined drain rate R_cm(r) + R_cp as a plain closure.
pub fn drain_rate(spec: &ScenarioSpec) -> impl Fn(f64) -> f64 {
    let link = spec.strategy.uses_link().then(|| {
        LinkEvaluator::new(Geometry::new(spec.altitude, spec.bs_height, 0.0).unwrap(), &spec.env, &spec.radio)
            .unwrap()
    });
    let onboard = if spec.strategy.computes_onboard() { scenario::compute_rate(&spec.compute).unwrap() } else { 0.0 };
    move |r| onboard + link.as_ref().map_or(0.0, |l| l.rate(r).unwrap())
}

pub fn initial_distance(spec: &ScenarioSpec) -> f64 {
    scenario::r0_distance(&spec.deployment, spec.seed()).max(spec.deployment.r_min)
}

#[derive(Debug, Clone, Copy)]
pub struct SteppedMr {
    pub t_mr: f64,
    pub t_m: f64,
    pub t_h: f64,
    pub reached_min: bool,
    pub steps: usize,
}

/// Brute-force outbound integration at a fixed step with the midpoint rule,
/// interpolating inside the step where Q/2 is crossed.
pub fn time_stepped_mr(rate: impl Fn(f64) -> f64, r0: f64, r_min: f64, v: f64, q: f64, dt: f64) -> SteppedMr {
    let target = 0.5 * q;
    let (mut t, mut sent, mut steps) = (0.0f64, 0.0f64, 0usize);
    let mut cached: Option<(f64, f64)> = None;
    let t_half = loop {
        let r = (r0 - v * (t + 0.5 * dt)).max(r_min);
        let rt = match cached {
            Some((cr, cv)) if cr == r => cv,
            _ => {
                let x = rate(r);
                cached = Some((r, x));
                x
            }
        };
        steps += 1;
        if sent + rt * dt >= target {
            break t + (target - sent) / rt;
        }
        sent += rt * dt;
        t += dt;
        assert!(steps < 50_000_000, "oracle did not converge");
    };
    let t_mr = 2.0 * t_half;
    let reached_min = r0 - v * t_mr / 2.0 <= r_min;
    let t_m = if reached_min { 2.0 * (r0 - r_min) / v } else { t_mr };
    SteppedMr { t_mr, t_m, t_h: t_mr - t_m, reached_min, steps }
}

pub const BANDS: [&str; 3] = ["sub6", "mmwave", "thz"];

/// Randomized move-and-return scenarios spanning the three bands. The
/// workload is sized so that hovering at the start would take a
/// log-uniform time within `hover_s` seconds.
pub fn random_mr_specs(seed: u64, count: usize, hover_s: (f64, f64)) -> Vec<ScenarioSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let band = BANDS[i % 3];
            let strategy = if rng.random_bool(0.5) { Strategy::MoveReturnOffload } else { Strategy::MoveReturnParallel };
            let lambda = 10f64.powf(rng.random_range(-8.0..-6.0));
            let v = rng.random_range(1.0..25.0);
            let r_min = rng.random_range(5.0..60.0);
            let h_u = rng.random_range(25.0..120.0);
            let base = config(&[
                ("radio.band", text(band)),
                ("scenario.strategy", text(strategy.as_str())),
                ("deployment.lambda_c", num(lambda)),
                ("deployment.r_min", num(r_min)),
                ("geometry.h_u", num(h_u)),
                ("scenario.v", num(v)),
                ("scenario.seed", Value::Int(i as i64 + 1)),
            ]);
            let s = base.spec().unwrap();
            let r0 = initial_distance(&s);
            let start_rate = drain_rate(&s)(r0).max(1e5);
            let hover_s = 10f64.powf(rng.random_range(hover_s.0.log10()..hover_s.1.log10()));
            base.with_value("scenario.q_bits", num(start_rate * hover_s)).unwrap().spec().unwrap()
        })
        .collect()
}

pub fn band_of(spec: &ScenarioSpec) -> BandKind {
    spec.radio.band.kind
}
