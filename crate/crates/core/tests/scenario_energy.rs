mod common;

use approx::assert_relative_eq;
use common::{config, drain_rate, initial_distance, num, spec, text, time_stepped_mr};
use uavmec::config::Value;
use uavmec::power;
use uavmec::scenario::{self, Approach, R0Mode, Strategy};

#[test]
fn onboard_hover_time_is_workload_over_cpu_rate() {
    let r = scenario::evaluate(&spec(&[("scenario.strategy", text("hover-onboard"))])).unwrap();
    assert_eq!(r.t_h, 250.0);
    assert_eq!(r.t_m, 0.0);
    assert_eq!(r.t_total, r.t_m + r.t_h);
    assert_eq!(r.energy_j, r.breakdown.total());
}

#[test]
fn parallel_without_link_matches_onboard() {
    let dead_link = [("radio.p_tx_dbm", num(-400.0))];
    let a = scenario::evaluate(&spec(&[("scenario.strategy", text("hover-onboard"))])).unwrap();
    let c = scenario::evaluate(&spec(&[dead_link[0].clone(), ("scenario.strategy", text("hover-parallel"))])).unwrap();
    assert_eq!(c.t_h, a.t_h);
    assert_eq!(c.energy_j, a.energy_j);
}

#[test]
fn offload_energy_is_linear_in_workload() {
    let full = scenario::evaluate(&spec(&[("scenario.q_bits", num(4e9))])).unwrap();
    let half = scenario::evaluate(&spec(&[("scenario.q_bits", num(2e9))])).unwrap();
    assert_eq!(half.energy_j, 0.5 * full.energy_j);
}

#[test]
fn hover_offload_energy_falls_with_density() {
    for band in common::BANDS {
        let energies: Vec<f64> = uavmec::sweep::logspace(1e-8, 1e-6, 10)
            .into_iter()
            .map(|l| {
                scenario::evaluate(&spec(&[("radio.band", text(band)), ("deployment.lambda_c", num(l))]))
                    .unwrap()
                    .energy_j
            })
            .collect();
        assert!(energies.windows(2).all(|w| w[1] <= w[0]), "{band}: {energies:?}");
    }
}

#[test]
fn hovering_is_the_slow_limit_of_move_and_return() {
    for band in common::BANDS {
        let hover = scenario::evaluate(&spec(&[("radio.band", text(band))])).unwrap().energy_j;
        let best = [1e-4, 0.01, 1.0, 5.0, 10.0, 20.0]
            .into_iter()
            .map(|v| {
                scenario::evaluate(&spec(&[
                    ("radio.band", text(band)),
                    ("scenario.strategy", text("mr-offload")),
                    ("scenario.v", num(v)),
                ]))
                .unwrap()
                .energy_j
            })
            .fold(f64::INFINITY, f64::min);
        assert!(best <= hover * (1.0 + 1e-6), "{band}: {best} vs {hover}");
    }
}

#[test]
fn hover_tail_grows_linearly_in_workload() {
    let base = [("scenario.strategy", text("mr-offload")), ("scenario.v", num(20.0))];
    let s1 = spec(&[base[0].clone(), base[1].clone(), ("scenario.q_bits", num(2e11))]);
    let s2 = spec(&[base[0].clone(), base[1].clone(), ("scenario.q_bits", num(5e11))]);
    let (e1, e2) = (scenario::evaluate(&s1).unwrap(), scenario::evaluate(&s2).unwrap());
    assert!(e1.t_h > 0.0 && e2.t_h > 0.0);
    let p0 = power::total_power(0.0, &s1.flown_mass(), &s1.propulsion, &s1.compute, false);
    let expected = p0 * (5e11 - 2e11) / drain_rate(&s1)(s1.deployment.r_min);
    assert_relative_eq!(e2.energy_j - e1.energy_j, expected, max_relative = 5e-3);
}

#[test]
fn slow_cpu_parallel_tends_to_offload_plus_payload() {
    let b = spec(&[]);
    let c = spec(&[("scenario.strategy", text("hover-parallel")), ("compute.c_cp", num(1e30))]);
    let (eb, ec) = (scenario::evaluate(&b).unwrap(), scenario::evaluate(&c).unwrap());
    let pb = power::total_power(0.0, &b.flown_mass(), &b.propulsion, &b.compute, false);
    let pc = power::total_power(0.0, &c.flown_mass(), &c.propulsion, &c.compute, true);
    assert_relative_eq!(ec.energy_j, eb.energy_j * pc / pb, max_relative = 1e-9);
}

#[test]
fn distance_independent_rate_makes_moving_worse() {
    let s = spec(&[("scenario.strategy", text("mr-offload"))]);
    let path = Approach { r0: 2000.0, r_min: 10.0, v: s.v };
    let t = scenario::solve_mr_time_for(|_| Ok(1e7), path, s.q_bits).unwrap();
    let pv = power::total_power(s.v, &s.flown_mass(), &s.propulsion, &s.compute, false);
    let p0 = power::total_power(0.0, &s.flown_mass(), &s.propulsion, &s.compute, false);
    assert_eq!(t.t_h, 0.0);
    assert!(pv * t.t_m + p0 * t.t_h >= p0 * s.q_bits / 1e7);
}

#[test]
fn no_hover_case_uses_moving_power_only() {
    let s = spec(&[("scenario.strategy", text("mr-offload")), ("scenario.q_bits", num(1e9))]);
    let r = scenario::evaluate(&s).unwrap();
    assert_eq!(r.t_h, 0.0);
    let pv = power::total_power(s.v, &s.flown_mass(), &s.propulsion, &s.compute, false);
    assert_relative_eq!(r.energy_j, pv * r.t_total, max_relative = 1e-12);
}

#[test]
fn parallel_move_and_return_computes_throughout() {
    let s = spec(&[("scenario.strategy", text("mr-parallel")), ("scenario.q_bits", num(3e11))]);
    let r = scenario::evaluate(&s).unwrap();
    assert!(r.t_h > 0.0);
    let p_cp = power::compute_power(&s.compute, true);
    assert_relative_eq!(r.breakdown.compute_j, p_cp * r.t_total, max_relative = 1e-12);
    assert_eq!(s.flown_mass().m_cp, 0.5);
    let b = spec(&[("scenario.strategy", text("mr-offload"))]);
    assert_eq!(b.flown_mass().m_cp, 0.0);
}

#[test]
fn move_and_return_matches_time_stepping() {
    for (band, q) in [("mmwave", 2e10), ("mmwave", 2e11), ("sub6", 2e8), ("thz", 5e10)] {
        let s = spec(&[
            ("radio.band", text(band)),
            ("scenario.strategy", text("mr-offload")),
            ("scenario.v", num(20.0)),
            ("scenario.q_bits", num(q)),
        ]);
        let solved = scenario::solve_mr_time(&s).unwrap();
        let oracle = time_stepped_mr(drain_rate(&s), initial_distance(&s), s.deployment.r_min, s.v, q, 1e-3);
        assert_relative_eq!(solved.t_mr, oracle.t_mr, max_relative = 1e-3);
        assert_eq!(solved.reached_min, oracle.reached_min, "{band} q={q}");
        if solved.reached_min {
            assert_eq!(solved.t_m, oracle.t_m);
        } else {
            assert_eq!(solved.t_m, solved.t_mr);
        }
    }
}

#[test]
fn move_and_return_beats_hovering_only_in_sparse_mmwave() {
    let at = |strategy: &str, lambda: f64| {
        scenario::evaluate(&spec(&[
            ("scenario.strategy", text(strategy)),
            ("deployment.lambda_c", num(lambda)),
        ]))
        .unwrap()
        .energy_j
    };
    assert!(at("mr-offload", 1e-8) < at("hover-offload", 1e-8));
    assert!(at("mr-offload", 1e-6) > at("hover-offload", 1e-6));
}

#[test]
fn evaluation_is_deterministic() {
    let cfg = config(&[("radio.band", text("thz")), ("scenario.strategy", text("mr-parallel"))]);
    let s = cfg.spec().unwrap();
    assert_eq!(scenario::evaluate(&s).unwrap(), scenario::evaluate(&s).unwrap());
}

#[test]
fn sampled_placement_reports_spread() {
    let s = spec(&[
        ("deployment.r0_mode", text("sampled-nearest")),
        ("deployment.n_drops", Value::Int(16)),
        ("scenario.seed", Value::Int(9)),
    ]);
    assert_eq!(s.deployment.r0_mode, R0Mode::SampledNearest);
    let r = scenario::evaluate(&s).unwrap();
    assert_eq!(r.drops, 16);
    assert!(r.energy_stderr > 0.0);
    assert_eq!(r, scenario::evaluate(&s).unwrap());
    let other = spec(&[
        ("deployment.r0_mode", text("sampled-nearest")),
        ("deployment.n_drops", Value::Int(16)),
        ("scenario.seed", Value::Int(10)),
    ]);
    assert_ne!(scenario::evaluate(&other).unwrap().energy_j, r.energy_j);
}

#[test]
fn invalid_specs_are_rejected() {
    let onboard_without_computer = config(&[("scenario.strategy", text("hover-onboard")), ("mass.m_cp", num(0.0))]);
    assert!(onboard_without_computer.spec().unwrap_err().is_validation());
    let stationary_mr = config(&[("scenario.strategy", text("mr-offload")), ("scenario.v", num(0.0))]);
    assert!(stationary_mr.spec().unwrap_err().is_validation());
    let low = config(&[("radio.band", text("sub6")), ("geometry.h_u", num(20.0))]);
    assert!(low.spec().unwrap_err().is_validation());
}

#[test]
fn traced_rate_is_recorded() {
    let s = spec(&[("scenario.strategy", text("mr-offload"))]);
    let r = scenario::evaluate_traced(&s, 11).unwrap();
    let trace = r.rate_trace.unwrap();
    assert_eq!(trace.len(), 11);
    assert_eq!(trace[0].t, 0.0);
    assert!(trace.windows(2).all(|w| w[1].r <= w[0].r && w[1].r_tot >= w[0].r_tot));
    assert_eq!(s.strategy, Strategy::MoveReturnOffload);
}
