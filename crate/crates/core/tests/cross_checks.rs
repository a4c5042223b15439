//! Cross-checks between the solvers, the quadrature paths and the Monte
//! Carlo oracle beyond the headline acceptance points.

mod common;

use proptest::prelude::*;

use common::{exp_cdf_integral, scenario2_oracle, TICK};
use pbs_ofa_core::detgame::{solve_scenario2, Builder, DeterministicGame};
use pbs_ofa_core::dist::ValueDistribution;
use pbs_ofa_core::mc::{direct_ofa_valuation, simulate_scenario2, MCConfig, ACCEPT_SIGMAS};
use pbs_ofa_core::stochgame::{ofa_valuation, zero_value_surplus, StochasticGame};

fn exp_game(la: f64, lb: f64, v_t: f64) -> StochasticGame {
    StochasticGame::new(
        ValueDistribution::exponential(la).unwrap(),
        ValueDistribution::exponential(lb).unwrap(),
        v_t,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn scenario2_surplus_matches_chained_clocks(a in 0.0f64..3.0, b in 0.0f64..3.0, t in 0.0f64..2.0) {
        prop_assume!((a - b).abs() > 1e-5);
        let g = DeterministicGame::new(a, b, t).unwrap();
        let (s, o) = (solve_scenario2(&g), scenario2_oracle(&g, TICK));
        prop_assert_eq!(s.block_winner, o.block_winner);
        prop_assert!((s.total_price - o.total_price).abs() <= 2.0 * TICK + 1e-12);
        prop_assert!((s.surplus_a - o.surplus_a).abs() <= 2.0 * TICK + 1e-12);
        prop_assert!((s.surplus_b - o.surplus_b).abs() <= 2.0 * TICK + 1e-12);
    }
}

#[test]
fn offset_identity_across_rates() {
    for (i, (la, lb, v_t)) in [(0.5, 1.0, 0.5), (1.0, 4.0, 2.0), (2.0, 3.0, 0.1)].into_iter().enumerate() {
        let g = exp_game(la, lb, v_t);
        let cfg = MCConfig::new(400_000, 77 + i as u64).unwrap();
        for (who, opp_rate) in [(Builder::A, lb), (Builder::B, la)] {
            let direct = direct_ofa_valuation(&g, who, &cfg).unwrap();
            let quad = ofa_valuation(&g, who).unwrap().value;
            let offset = exp_cdf_integral(opp_rate, v_t);
            assert!((zero_value_surplus(&g, who).unwrap().value - offset).abs() < 1e-9);
            assert!(
                direct.covers(quad + offset, ACCEPT_SIGMAS),
                "({la}, {lb}, {v_t}) {who}: {direct:?} vs {}",
                quad + offset
            );
        }
        let a = direct_ofa_valuation(&g, Builder::A, &cfg).unwrap();
        let b = direct_ofa_valuation(&g, Builder::B, &cfg).unwrap();
        assert!(a.mean > b.mean);
    }
}

#[test]
fn scenario2_total_profit_is_surplus_less_ofa_price() {
    let g = exp_game(1.0, 2.0, 1.0);
    let sim = simulate_scenario2(&g, &MCConfig::new(500_000, 3).unwrap()).unwrap();
    let v_tb = ofa_valuation(&g, Builder::B).unwrap().value;
    assert_eq!(sim.ofa_price, v_tb);
    assert!((sim.pbs_surplus_a.mean - v_tb - sim.total_profit_a.mean).abs() < 1e-12);
    assert_eq!(sim.pbs_surplus_a.std_error, sim.total_profit_a.std_error);
}

#[test]
fn seed_determinism() {
    let g = exp_game(1.0, 2.0, 1.0);
    let cfg = MCConfig::new(100_000, 11).unwrap();
    assert_eq!(simulate_scenario2(&g, &cfg).unwrap(), simulate_scenario2(&g, &cfg).unwrap());
    let other = MCConfig::new(100_000, 12).unwrap();
    assert_ne!(
        simulate_scenario2(&g, &cfg).unwrap().win_prob_a.mean,
        simulate_scenario2(&g, &other).unwrap().win_prob_a.mean
    );
}
