mod common;

use overhang_core::decision_space::{
    bear_case_summary, consistency_matrix, rank_terminal_states, supply_effect, ConsistencyMatrix, MarketSign,
    TerminalKind, TerminalState,
};
use overhang_core::exec_frontier::{cost_of, frontier, optimal_trajectory, ExecutionModel};
use overhang_core::impact_model::{
    combine, overshoot_path, permanent_impact, relative_impact_with_growth, small_shift_approx, ElasticityModel,
    FrictionBand, OvershootParams,
};
use overhang_core::liquidation_schedule::{build_uniform_schedule, to_tranche_program, ScheduleParams};
use overhang_core::mechanism_sim::{
    dms_step, reconstruct, simulate_disposition, split_seeded, timelock_spendable, DispositionInput, DmsAction,
    DmsConfig, DmsEvent, DmsState, LogEvent, Secret,
};
use overhang_core::scenario_engine::{builtin_scenarios, run_scenario, sensitivity_sweep, SweepGrid};
use overhang_core::supply_ledger::{apply_burn, effective_float, position_share, ShareBasis, SupplyLedger};
use overhang_core::Btc;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const VOL: f64 = 15e9;

fn ledger_strategy() -> impl Strategy<Value = SupplyLedger> {
    (1_000u64..30_000_000, 0.0f64..0.9, 0.0f64..=1.0, 1.0f64..1e6).prop_map(|(total, lost_frac, pos_frac, price)| {
        let total_sats = total * Btc::SATS_PER_BTC;
        let lost = (total_sats as f64 * lost_frac) as u64;
        let pos = ((total_sats - lost) as f64 * pos_frac) as u64;
        SupplyLedger::new(Btc::from_sats(total_sats), Btc::from_sats(lost), Btc::from_sats(pos), price).unwrap()
    })
}

proptest! {
    #[test]
    fn effective_share_dominates_nominal(l in ledger_strategy()) {
        let nom = position_share(&l, ShareBasis::Nominal);
        let eff = position_share(&l, ShareBasis::Effective);
        prop_assert!(eff >= nom);
        if l.position() > Btc::ZERO {
            prop_assert_eq!(eff == nom, l.lost_estimate() == Btc::ZERO);
        }
    }

    #[test]
    fn burn_conserves_coins(l in ledger_strategy(), keep in 0.0f64..=1.0) {
        let out = apply_burn(&l, keep).unwrap();
        prop_assert_eq!(out.burned + out.residual, l.position());
        prop_assert_eq!(effective_float(&l) - effective_float(&out.ledger_after), out.burned);
    }

    #[test]
    fn more_lost_coins_raise_effective_share(l in ledger_strategy(), extra in 1u64..1_000_000) {
        prop_assume!(l.position() > Btc::ZERO);
        let more = l.lost_estimate() + Btc::from_sats(extra);
        if let Ok(l2) = l.with_lost_estimate(more) {
            prop_assert!(position_share(&l2, ShareBasis::Effective) > position_share(&l, ShareBasis::Effective));
            prop_assert_eq!(position_share(&l2, ShareBasis::Nominal), position_share(&l, ShareBasis::Nominal));
        }
    }

    #[test]
    fn impact_monotone(s in 0.001f64..0.5, ds in 0.001f64..0.1, e in 0.1f64..3.0, de in 0.01f64..1.0) {
        let m = ElasticityModel::new(e).unwrap();
        let base = permanent_impact(s, &m).unwrap();
        prop_assert!(permanent_impact(s + ds, &m).unwrap() < base);
        prop_assert!(permanent_impact(s, &ElasticityModel::new(e + de).unwrap()).unwrap() > base);
    }

    #[test]
    fn small_shift_within_five_percent(s in 1e-6f64..=0.01, e in 0.3f64..=1.5) {
        let m = ElasticityModel::new(e).unwrap();
        let exact = permanent_impact(s, &m).unwrap();
        let approx = small_shift_approx(s, &m).unwrap();
        prop_assert!(((approx - exact) / exact).abs() < 0.05);
    }

    #[test]
    fn combine_widens_with_band(p in -0.5f64..=0.0, lo in 0.0f64..5.0, w in 0.0f64..5.0, extra in 0.0f64..3.0) {
        let narrow = combine(p, FrictionBand::new(lo, lo + w).unwrap());
        let wide = combine(p, FrictionBand::new(lo, lo + w + extra).unwrap());
        prop_assert!(wide.total_low <= narrow.total_low);
        prop_assert_eq!(wide.total_high, narrow.total_high);
        prop_assert!(narrow.total_low <= narrow.total_high && narrow.total_high <= narrow.permanent);
    }

    #[test]
    fn overshoot_bounded_and_monotone(total in -0.5f64..=0.0, mag in 0.0f64..=1.0, hl in 0.1f64..30.0) {
        let p = OvershootParams::new(mag, hl).unwrap();
        let path = overshoot_path(total, &p, 120).unwrap();
        let floor = (1.0 + total) * (1.0 - mag);
        prop_assert!(path.iter().all(|(_, m)| *m >= floor - 1e-15 && *m <= 1.0 + total + 1e-15));
        prop_assert!(path.windows(2).all(|w| w[1].1 >= w[0].1));
    }

    #[test]
    fn schedule_reconstructs_position(sats in 0u64..2_100_000_000_000_000, h in 1.0f64..40.0) {
        let s = build_uniform_schedule(&ScheduleParams::new(Btc::from_sats(sats), h)).unwrap();
        prop_assert_eq!(s.reconstructed_position(), Btc::from_sats(sats));
    }

    #[test]
    fn participation_homogeneous(h in 1.0f64..20.0, price in 1e3f64..1e6) {
        let mut p = ScheduleParams::new(Btc::whole(1_148_000), h);
        p.price = price;
        let a = build_uniform_schedule(&p).unwrap().participation;
        p.price = 2.0 * price;
        p.horizon = 2.0 * h;
        let b = build_uniform_schedule(&p).unwrap();
        prop_assert!(((a - b.participation) / a).abs() < 1e-12);
    }

    #[test]
    fn tranche_programs_respect_timelocks(
        sats in 1u64..1_000_000_000_000,
        years in 1u32..8,
        per_year in 1u32..13,
        start in 0u64..1000,
        horizon in 0u64..4000,
    ) {
        let s = build_uniform_schedule(&ScheduleParams::new(Btc::from_sats(sats), years as f64)).unwrap();
        let prog = to_tranche_program(&s, per_year, start).unwrap();
        prop_assert_eq!(prog.total(), Btc::from_sats(sats));
        let cfg = DmsConfig::new(30, 3, DmsAction::ExecuteBurn).unwrap();
        let log = simulate_disposition(&DispositionInput {
            terminal: TerminalState::of(TerminalKind::PatientLiquidation),
            config: cfg,
            tranche_program: Some(&prog),
            clock_horizon: horizon,
            position: Btc::from_sats(sats),
            last_heartbeat: 0,
        }).unwrap();
        let releases: Vec<_> = log.entries.iter().filter(|e| e.event == LogEvent::Release).collect();
        for (r, t) in releases.iter().zip(prog.tranches()) {
            prop_assert!(timelock_spendable(t.unlock, r.epoch, 0));
            prop_assert_eq!(r.epoch, t.unlock.earliest_epoch(0));
        }
        let first = prog.tranches()[0].unlock.earliest_epoch(0);
        let last = prog.tranches().last().unwrap().unlock.earliest_epoch(0);
        if horizon < first {
            prop_assert_eq!(log.released, Btc::ZERO);
        }
        if horizon >= last {
            prop_assert_eq!(log.released, Btc::from_sats(sats));
        }
    }

    #[test]
    fn shares_roundtrip(secret in proptest::collection::vec(any::<u8>(), 1..=64), k in 1usize..=8, extra in 0usize..8, seed in any::<u64>()) {
        let n = k + extra;
        let s = Secret::new(secret).unwrap();
        let shares = split_seeded(&s, k, n, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            idx.swap(i, rng.random_range(0..=i));
        }
        let subset: Vec<_> = idx[..k].iter().map(|&i| shares[i].clone()).collect();
        prop_assert_eq!(reconstruct(&subset, k).unwrap(), s);
        // line format round-trips
        let parsed: Vec<overhang_core::mechanism_sim::Share> = subset.iter().map(|sh| sh.to_string().parse().unwrap()).collect();
        prop_assert_eq!(parsed, subset);
    }
}

#[test]
fn growth_invariance_random_paths() {
    let mut rng = ChaCha8Rng::seed_from_u64(2026);
    for _ in 0..100 {
        let eps = rng.random_range(0.3..=1.5);
        let shift = rng.random_range(0.0..0.2);
        let periods = rng.random_range(1..120);
        let path: Vec<f64> = (0..periods).map(|_| rng.random_range(0.7..1.6)).collect();
        let m = ElasticityModel::new(eps).unwrap();
        let direct = permanent_impact(shift, &m).unwrap();
        let growth = relative_impact_with_growth(shift, &m, &path, periods).unwrap();
        if direct == 0.0 {
            assert_eq!(growth, 0.0);
        } else {
            assert!(((growth - direct) / direct).abs() < 1e-9, "{growth} vs {direct}");
        }
    }
}

fn random_model(rng: &mut ChaCha8Rng, max_periods: usize) -> ExecutionModel {
    let tau = rng.random_range(0.5..2.0);
    let gamma = rng.random_range(0.0..0.01);
    ExecutionModel {
        total_units: rng.random_range(10.0..1000.0),
        periods: rng.random_range(2..=max_periods),
        period_length: tau,
        volatility: rng.random_range(0.05..1.0),
        permanent_coeff: gamma,
        temporary_coeff: gamma * tau / 2.0 + rng.random_range(0.01..1.0),
        risk_aversion: rng.random_range(0.0..2.0),
    }
}

#[test]
fn optimal_beats_random_admissible_paths() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let m = random_model(&mut rng, 10);
        let best = optimal_trajectory(&m).unwrap();
        let best_obj = best.expected_cost + m.risk_aversion * best.cost_variance;
        for _ in 0..100 {
            let mut h = best.holdings.clone();
            for x in h.iter_mut().take(m.periods).skip(1) {
                *x += rng.random_range(-0.2..0.2) * m.total_units;
            }
            let (e, v) = cost_of(&h, &m).unwrap();
            assert!(best_obj <= e + m.risk_aversion * v + 1e-9 * best_obj.abs());
        }
    }
}

#[test]
fn closed_form_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10 {
        let m = random_model(&mut rng, 5);
        let t = optimal_trajectory(&m).unwrap();
        let (bx, bf) = common::brute_force_minimum(&m);
        let obj = common::objective(&t.holdings, &m);
        assert!(obj <= bf * (1.0 + 1e-6), "{obj} vs {bf}");
        for (a, b) in t.holdings.iter().zip(&bx) {
            assert!((a - b).abs() <= 1e-5 * m.total_units, "{a} vs {b}");
        }
    }
}

#[test]
fn risk_averse_trajectories_front_load() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let mut m = random_model(&mut rng, 8);
        m.risk_aversion = rng.random_range(0.01..2.0);
        let t = optimal_trajectory(&m).unwrap();
        let n = m.periods;
        for j in 1..n {
            assert!(t.holdings[j] < m.total_units * (n - j) as f64 / n as f64);
        }
    }
}

#[test]
fn vanishing_risk_aversion_is_linear() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..20 {
        let m = random_model(&mut rng, 10).with_risk_aversion(1e-12);
        let t = optimal_trajectory(&m).unwrap();
        let n = m.periods;
        for (j, x) in t.holdings.iter().enumerate() {
            let lin = (n - j) as f64 / n as f64;
            assert!((x / m.total_units - lin).abs() < 1e-6);
        }
    }
}

#[test]
fn scale_equivariance() {
    let m = ExecutionModel::desk_default();
    let base = optimal_trajectory(&m).unwrap();
    for c in [0.5, 3.0, 17.0] {
        let scaled = ExecutionModel { total_units: m.total_units * c, ..m };
        let t = optimal_trajectory(&scaled).unwrap();
        for (a, b) in t.holdings.iter().zip(&base.holdings) {
            assert!((a - c * b).abs() <= 1e-9 * c * m.total_units);
        }
        assert!((t.expected_cost / base.expected_cost - c * c).abs() < 1e-9 * c * c);
        assert!((t.cost_variance / base.cost_variance - c * c).abs() < 1e-9 * c * c);
    }
}

#[test]
fn frontier_monotone_and_convex() {
    let m = ExecutionModel::desk_default();
    let lambdas: Vec<f64> = (0..20).map(|i| 1e-8 * 1.6f64.powi(i)).collect();
    let pts = frontier(&m, &lambdas).unwrap();
    for w in pts.windows(2) {
        assert!(w[1].expected_cost >= w[0].expected_cost);
        assert!(w[1].cost_variance <= w[0].cost_variance);
    }
    let slopes: Vec<f64> = pts
        .windows(2)
        .map(|w| (w[1].cost_variance - w[0].cost_variance) / (w[1].expected_cost - w[0].expected_cost))
        .collect();
    for w in slopes.windows(2) {
        assert!(w[1] - w[0] >= -1e-9 * w[0].abs(), "{:?}", w);
    }
}

#[test]
fn scenario_ordering_and_sweep_monotonicity() {
    let l = SupplyLedger::default();
    let totals: Vec<f64> =
        builtin_scenarios().iter().map(|s| run_scenario(s, &l, VOL).unwrap().total_low.abs()).collect();
    assert!(totals[0] < totals[1] && totals[1] < totals[2]);

    let rep = sensitivity_sweep(&SweepGrid::default(), &l, VOL).unwrap();
    for q in &SweepGrid::default().qualities {
        for h in &SweepGrid::default().horizons {
            let perms: Vec<f64> =
                rep.cells.iter().filter(|c| c.quality == *q && c.horizon == *h).map(|c| c.result.permanent).collect();
            assert!(perms.windows(2).all(|w| w[1] > w[0]));
        }
    }
}

#[test]
fn ranking_ignores_insertion_order() {
    let entries: Vec<_> = consistency_matrix().entries().map(|(p, k, m)| (p.clone(), k, m)).collect();
    let expected = rank_terminal_states(&consistency_matrix());
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..50 {
        let mut shuffled = entries.clone();
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.random_range(0..=i));
        }
        let m = ConsistencyMatrix::from_entries(shuffled).unwrap();
        assert_eq!(rank_terminal_states(&m), expected);
    }
}

#[test]
fn supply_effects_conserve_position() {
    let l = SupplyLedger::default();
    let pos = l.position().sats() as i64;
    for kind in TerminalKind::ALL {
        let e = supply_effect(&TerminalState::of(kind), &l, -0.25).unwrap();
        assert_eq!(e.delta_sats.abs(), pos);
        if e.market_sign == MarketSign::Bearish {
            assert!(e.bound.unwrap().abs() <= 0.26);
        }
    }
    for keep in [0.0, 0.01, 0.05] {
        let burn = supply_effect(&TerminalState::new(TerminalKind::SilentBurn, keep).unwrap(), &l, -0.25).unwrap();
        let dorm = supply_effect(&TerminalState::of(TerminalKind::DormancyNonRecovery), &l, -0.25).unwrap();
        assert!(burn.delta_sats.abs() <= pos);
        assert!((burn.delta_sats - dorm.delta_sats) as f64 <= pos as f64 * keep + 1.0);
    }
}

#[test]
fn zero_position_summary_is_neutral() {
    let l = SupplyLedger::default().with_position(Btc::ZERO).unwrap();
    let results: Vec<_> =
        builtin_scenarios().iter().map(|s| run_scenario(s, &SupplyLedger::default(), VOL).unwrap()).collect();
    let rep = bear_case_summary(&consistency_matrix(), &l, &results).unwrap();
    assert!(rep.effects.iter().all(|e| e.delta_sats == 0 && e.market_sign == MarketSign::Neutral));
    assert!(rep.worst_case.is_none());
}

#[test]
fn heartbeats_keep_switch_armed() {
    let cfg = DmsConfig::new(10, 3, DmsAction::PublishShards).unwrap();
    let mut s = DmsState::Armed;
    for _ in 0..10_000 {
        s = dms_step(s, &cfg, DmsEvent::Heartbeat).unwrap();
        assert_eq!(s, DmsState::Armed);
    }
}
