//! Brute-force oracles shared by the integration suites. Nothing here calls
//! the closed-form solvers it is used to check.

#![allow(dead_code)]

use pbs_ofa_core::detgame::{clock_auction, Builder, DeterministicGame};

pub const TICK: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
pub struct OracleOutcome {
    pub block_winner: Builder,
    pub ofa_winner: Option<Builder>,
    pub ofa_price: f64,
    pub pbs_price: f64,
    pub total_price: f64,
    pub surplus_a: f64,
    pub surplus_b: f64,
}

fn builder(index: usize) -> Builder {
    if index == 0 {
        Builder::A
    } else {
        Builder::B
    }
}

/// PBS clock auction where `holder` (if any) adds `v_T` to its block value.
/// Returns (winner, price, [surplus_a, surplus_b]).
fn pbs_clock(g: &DeterministicGame, holder: Option<Builder>, tick: f64) -> (Builder, f64, [f64; 2]) {
    let values = [
        g.v_a + if holder == Some(Builder::A) { g.v_t } else { 0.0 },
        g.v_b + if holder == Some(Builder::B) { g.v_t } else { 0.0 },
    ];
    let c = clock_auction(&values, tick).unwrap();
    let mut surplus = [0.0; 2];
    surplus[c.winner] = values[c.winner] - c.price;
    (builder(c.winner), c.price, surplus)
}

/// Scenario 1: both builders hold the transaction.
pub fn scenario1_oracle(g: &DeterministicGame, tick: f64) -> OracleOutcome {
    let values = [g.v_t + g.v_a, g.v_t + g.v_b];
    let c = clock_auction(&values, tick).unwrap();
    let mut surplus = [0.0; 2];
    surplus[c.winner] = values[c.winner] - c.price;
    OracleOutcome {
        block_winner: builder(c.winner),
        ofa_winner: None,
        ofa_price: 0.0,
        pbs_price: c.price,
        total_price: c.price,
        surplus_a: surplus[0],
        surplus_b: surplus[1],
    }
}

/// Scenario 2 by backward induction over two chained clock auctions: each
/// builder bids in the OFA its PBS surplus from holding the transaction
/// minus its PBS surplus when the rival holds it.
pub fn scenario2_oracle(g: &DeterministicGame, tick: f64) -> OracleOutcome {
    let (_, _, if_a_holds) = pbs_clock(g, Some(Builder::A), tick);
    let (_, _, if_b_holds) = pbs_clock(g, Some(Builder::B), tick);
    let bids = [
        (if_a_holds[0] - if_b_holds[0]).max(0.0),
        (if_b_holds[1] - if_a_holds[1]).max(0.0),
    ];
    let ofa = clock_auction(&bids, tick).unwrap();
    let holder = builder(ofa.winner);
    let (winner, pbs_price, surplus) = pbs_clock(g, Some(holder), tick);
    let mut net = surplus;
    net[ofa.winner] -= ofa.price;
    OracleOutcome {
        block_winner: winner,
        ofa_winner: Some(holder),
        ofa_price: ofa.price,
        pbs_price,
        total_price: ofa.price + pbs_price,
        surplus_a: net[0],
        surplus_b: net[1],
    }
}

/// `∫₀^{v_T} (1 - e^{-λu}) du`.
pub fn exp_cdf_integral(rate: f64, v_t: f64) -> f64 {
    v_t - (1.0 - (-rate * v_t).exp()) / rate
}
