//! Relay procurement mechanisms.
//!
//! The source buys relay service in a reverse auction. Three mechanisms are
//! provided: the buyer-optimal (Myerson) auction, a second-price (Vickrey)
//! auction with the source's valuation as reserve, and the full-information
//! lower bound. Each returns an [`AuctionOutcome`] that also describes what
//! happens on the radio side.
//!
//! Mechanisms only read the public part of a candidate (its bid, the
//! source's [`ValuationModel`] of it and its WPT gain). True valuations are
//! never consulted except by [`run_perfect_info`], which by definition
//! assumes they are known.

use std::fmt;

use crate::error::{Error, Result};
use crate::numerics::BisectionSpec;
use crate::valuation::ValuationModel;

/// Who ends up serving the source's transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Winner {
    /// No candidate is hired; the source transmits directly or not at all.
    Source,
    Relay(usize),
}

impl Winner {
    pub fn relay(self) -> Option<usize> {
        match self {
            Winner::Relay(i) => Some(i),
            Winner::Source => None,
        }
    }
}

/// Which term of `v0 = min(p_max, p_s)` is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReserveCase {
    /// `p_s <= p_max`: the source can reach the AP on its own.
    DirectLink,
    /// `p_s > p_max`: `v0` is only a cap on what the source may pay.
    PowerCap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mechanism {
    Myerson,
    Vickrey,
    PerfectInfo,
    Direct,
}

impl Mechanism {
    pub const ALL: [Mechanism; 4] = [
        Mechanism::Myerson,
        Mechanism::Vickrey,
        Mechanism::PerfectInfo,
        Mechanism::Direct,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mechanism::Myerson => "myerson",
            Mechanism::Vickrey => "vickrey",
            Mechanism::PerfectInfo => "perfect_info",
            Mechanism::Direct => "direct",
        }
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One bidder as seen by the source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    /// Reported valuation (W).
    pub bid: f64,
    pub model: ValuationModel,
    /// `alpha * A_r * H_si`: harvested watts per watt of WPT signal.
    pub wpt_gain: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuctionInput {
    /// Source valuation, `min(p_max, p_s)`.
    pub v0: f64,
    pub p_max: f64,
    /// Power needed on the direct link; may exceed `p_max`.
    pub p_s: f64,
    pub candidates: Vec<Candidate>,
}

impl AuctionInput {
    pub fn new(p_max: f64, p_s: f64, candidates: Vec<Candidate>) -> Result<Self> {
        if !(p_max > 0.0 && p_max.is_finite()) {
            return Err(Error::Mechanism(format!("p_max must be > 0, got {p_max}")));
        }
        if !(p_s > 0.0) {
            return Err(Error::Mechanism(format!("p_s must be > 0, got {p_s}")));
        }
        let input = AuctionInput {
            v0: p_max.min(p_s),
            p_max,
            p_s,
            candidates,
        };
        input.validate()?;
        Ok(input)
    }

    pub fn validate(&self) -> Result<()> {
        if self.v0 != self.p_max.min(self.p_s) {
            return Err(Error::Mechanism(format!(
                "v0 = {} does not equal min(p_max, p_s)",
                self.v0
            )));
        }
        for (i, c) in self.candidates.iter().enumerate() {
            if !(c.bid > c.model.p_si) || c.bid.is_nan() {
                return Err(Error::Mechanism(format!(
                    "bid {} of candidate {i} does not exceed its p_si {}",
                    c.bid, c.model.p_si
                )));
            }
            if !(c.wpt_gain > 0.0) {
                return Err(Error::Mechanism(format!(
                    "candidate {i} has non-positive WPT gain {}",
                    c.wpt_gain
                )));
            }
        }
        Ok(())
    }

    pub fn reserve_case(&self) -> ReserveCase {
        if self.p_s <= self.p_max {
            ReserveCase::DirectLink
        } else {
            ReserveCase::PowerCap
        }
    }

    pub fn bids(&self) -> impl Iterator<Item = f64> + '_ {
        self.candidates.iter().map(|c| c.bid)
    }

    /// Same instance with every power multiplied by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Result<AuctionInput> {
        let candidates = self
            .candidates
            .iter()
            .map(|c| {
                Ok(Candidate {
                    bid: c.bid * lambda,
                    model: ValuationModel::new(
                        c.model.p_si * lambda,
                        c.model.k * lambda,
                        c.model.sigma_ln,
                    )?,
                    wpt_gain: c.wpt_gain,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        AuctionInput::new(self.p_max * lambda, self.p_s * lambda, candidates)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuctionOutcome {
    pub winner: Winner,
    /// Total source power paid to the winning relay; 0 when the source wins.
    pub payment: f64,
    /// Power the source actually radiates.
    pub source_tx_power: f64,
    pub comm_success: bool,
    /// Power harvested by the winning relay, `gain * (payment - p_si)`.
    pub harvested: f64,
    /// Harvested power left after the relay's own transmission, assuming
    /// the winner bid truthfully.
    pub surplus: f64,
    pub v0: f64,
    pub reserve: ReserveCase,
}

impl AuctionOutcome {
    /// What the source gives up: the payment when a relay is hired,
    /// otherwise its own valuation `v0`.
    pub fn buyer_cost(&self) -> f64 {
        match self.winner {
            Winner::Relay(_) => self.payment,
            Winner::Source => self.v0,
        }
    }

    pub fn relay_assigned(&self) -> bool {
        matches!(self.winner, Winner::Relay(_))
    }
}

fn settle(input: &AuctionInput, winner: Winner, payment: f64) -> AuctionOutcome {
    let reserve = input.reserve_case();
    match winner {
        Winner::Source => {
            let comm_success = reserve == ReserveCase::DirectLink;
            AuctionOutcome {
                winner,
                payment: 0.0,
                source_tx_power: if comm_success { input.p_s } else { 0.0 },
                comm_success,
                harvested: 0.0,
                surplus: 0.0,
                v0: input.v0,
                reserve,
            }
        }
        Winner::Relay(i) => {
            let c = &input.candidates[i];
            let harvested = c.wpt_gain * (payment - c.model.p_si);
            let relay_power = c.wpt_gain * (c.bid - c.model.p_si);
            AuctionOutcome {
                winner,
                payment,
                source_tx_power: payment,
                comm_success: true,
                harvested,
                surplus: harvested - relay_power,
                v0: input.v0,
                reserve,
            }
        }
    }
}

/// Index of the smallest value; lowest index on ties.
fn argmin(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some(b) if values[b] <= v => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Buyer-optimal reverse auction.
///
/// The candidate with the lowest virtual valuation wins unless `v0` is below
/// all of them. The winner is paid its critical bid: the largest report that
/// would still keep its virtual valuation at or below both `v0` and every
/// rival's virtual valuation.
pub fn run_myerson(input: &AuctionInput, spec: &BisectionSpec) -> Result<AuctionOutcome> {
    input.validate()?;
    let virtuals = input
        .candidates
        .iter()
        .map(|c| c.model.virtual_valuation(c.bid))
        .collect::<Result<Vec<_>>>()?;
    let Some(best) = argmin(&virtuals) else {
        return Ok(settle(input, Winner::Source, 0.0));
    };
    if input.v0 < virtuals[best] {
        return Ok(settle(input, Winner::Source, 0.0));
    }
    let rival = virtuals
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != best)
        .map(|(_, &c)| c)
        .fold(f64::INFINITY, f64::min);
    let threshold = input.v0.min(rival);
    let payment = input.candidates[best]
        .model
        .inverse_virtual_valuation(threshold, spec)?;
    Ok(settle(input, Winner::Relay(best), payment))
}

/// Second-price reverse auction with `v0` as reserve.
///
/// The lowest bid wins if it is strictly below `v0` and is paid the
/// second-lowest bid, capped at `v0`.
pub fn run_vickrey(input: &AuctionInput) -> Result<AuctionOutcome> {
    input.validate()?;
    let bids: Vec<f64> = input.bids().collect();
    let Some(best) = argmin(&bids) else {
        return Ok(settle(input, Winner::Source, 0.0));
    };
    if bids[best] >= input.v0 {
        return Ok(settle(input, Winner::Source, 0.0));
    }
    let second = bids
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != best)
        .map(|(_, &b)| b)
        .fold(f64::INFINITY, f64::min);
    Ok(settle(input, Winner::Relay(best), second.min(input.v0)))
}

/// Source power under full channel knowledge: the smallest valuation.
pub fn perfect_info_bound(valuations: &[f64]) -> Result<f64> {
    valuations
        .iter()
        .copied()
        .reduce(f64::min)
        .ok_or(Error::Empty)
}

/// Full-information benchmark: the source offers the lowest valuation to
/// its owner whenever that does not exceed `v0`. Bids are read as true
/// valuations.
pub fn run_perfect_info(input: &AuctionInput) -> Result<AuctionOutcome> {
    input.validate()?;
    let bids: Vec<f64> = input.bids().collect();
    let Some(best) = argmin(&bids) else {
        return Ok(settle(input, Winner::Source, 0.0));
    };
    if bids[best] > input.v0 {
        return Ok(settle(input, Winner::Source, 0.0));
    }
    Ok(settle(
        input,
        Winner::Relay(best),
        perfect_info_bound(&bids)?,
    ))
}

/// Outcome when candidates are ignored.
pub fn run_direct(input: &AuctionInput) -> AuctionOutcome {
    settle(input, Winner::Source, 0.0)
}

/// Ex-post utility of candidate `candidate_index` with true valuation
/// `candidate_valuation`.
pub fn utility(candidate_valuation: f64, outcome: &AuctionOutcome, candidate_index: usize) -> f64 {
    if outcome.winner == Winner::Relay(candidate_index) {
        outcome.payment - candidate_valuation
    } else {
        0.0
    }
}
