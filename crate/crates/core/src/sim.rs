//! Monte Carlo harness: random scenarios, per-trial mechanism evaluation and
//! aggregate metrics.
//!
//! The access point sits at the origin and the source at `(d_source, 0)`.
//! Trial `t` of an experiment draws from a ChaCha8 stream keyed by the
//! experiment seed with stream id `t`, so trials are independent of each
//! other and of evaluation order.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{path_loss_linear, required_power, sample_channel, ChannelParams, LinkBudget};
use crate::error::{Error, Result};
use crate::mechanism::{
    run_direct, run_myerson, run_perfect_info, run_vickrey, AuctionInput, AuctionOutcome,
    Candidate, Mechanism,
};
use crate::numerics::BisectionSpec;
use crate::valuation::{min_inducement_power, ValuationModel};

/// Largest fraction of failed trials tolerated by [`run_experiment`].
pub const MAX_FAILURE_RATE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Where relay candidates are put.
#[derive(Debug, Clone, PartialEq)]
pub enum Placement {
    /// Uniform over the annulus `inner <= |q - center| <= outer`; `inner = 0`
    /// gives a disk.
    Annulus {
        center: Point,
        inner: f64,
        outer: f64,
    },
    /// The same positions in every trial.
    Fixed(Vec<Point>),
}

impl Placement {
    pub fn disk(center: Point, radius: f64) -> Self {
        Placement::Annulus {
            center,
            inner: 0.0,
            outer: radius,
        }
    }

    fn validate(&self, n_candidates: usize) -> Result<()> {
        match self {
            Placement::Annulus {
                center,
                inner,
                outer,
            } => {
                if !(center.x.is_finite() && center.y.is_finite()) {
                    return Err(Error::InvalidConfig(
                        "placement center must be finite".into(),
                    ));
                }
                if !(*inner >= 0.0 && outer > inner && outer.is_finite()) {
                    return Err(Error::InvalidConfig(format!(
                        "placement needs 0 <= inner < outer, got [{inner}, {outer}]"
                    )));
                }
            }
            Placement::Fixed(points) => {
                if points.len() != n_candidates {
                    return Err(Error::InvalidConfig(format!(
                        "{} fixed positions given for {n_candidates} candidates",
                        points.len()
                    )));
                }
                if points.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
                    return Err(Error::InvalidConfig(
                        "fixed positions must be finite".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Point> {
        match self {
            Placement::Annulus {
                center,
                inner,
                outer,
            } => (0..n)
                .map(|_| {
                    let (a, b) = (inner * inner, outer * outer);
                    let r = (a + (b - a) * rng.random::<f64>()).sqrt();
                    let theta = 2.0 * PI * rng.random::<f64>();
                    Point::new(center.x + r * theta.cos(), center.y + r * theta.sin())
                })
                .collect(),
            Placement::Fixed(points) => points.clone(),
        }
    }
}

/// How the source-to-AP distance enters the NLoS path loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectDistance {
    /// `d_s = ||q_s||^2`.
    SquaredNorm,
    /// `d_s = ||q_s||`.
    Euclidean,
}

impl DirectDistance {
    pub fn name(self) -> &'static str {
        match self {
            DirectDistance::SquaredNorm => "squared_norm",
            DirectDistance::Euclidean => "euclidean",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n_candidates: usize,
    /// Source-to-AP separation in metres.
    pub d_source: f64,
    pub direct_distance: DirectDistance,
    /// Link distances below this are raised to it (metres).
    pub min_link_distance: f64,
    pub placement: Placement,
    pub los_params: ChannelParams,
    pub nlos_params: ChannelParams,
    pub budget: LinkBudget,
    /// Harvesting efficiency.
    pub alpha: f64,
    /// Receive aperture in square metres.
    pub a_r: f64,
    /// Multiplier on both fading standard deviations.
    pub gamma_scale: f64,
    pub n_trials: usize,
    pub seed: u64,
}

impl Default for SimConfig {
    /// Published link and channel parameters with the default geometry:
    /// source 2.85 m from the AP and candidates uniform in the annulus of
    /// radii 1.7 m to 2.7 m around the midpoint.
    fn default() -> Self {
        let d_source = 2.85;
        SimConfig {
            n_candidates: 4,
            d_source,
            direct_distance: DirectDistance::SquaredNorm,
            min_link_distance: 1.0,
            placement: Placement::Annulus {
                center: Point::new(d_source / 2.0, 0.0),
                inner: 1.7,
                outer: 2.7,
            },
            los_params: ChannelParams::LOS,
            nlos_params: ChannelParams::NLOS,
            budget: LinkBudget::default(),
            alpha: 0.3,
            a_r: 1e-4,
            gamma_scale: 1.0,
            n_trials: 10_000,
            seed: 1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.d_source > 0.0 && self.d_source.is_finite()) {
            return bad(format!("d_source must be > 0, got {}", self.d_source));
        }
        if !(self.min_link_distance > 0.0 && self.min_link_distance.is_finite()) {
            return bad(format!(
                "min_link_distance must be > 0, got {}",
                self.min_link_distance
            ));
        }
        if !(0.0..=1.0).contains(&self.alpha) || self.alpha == 0.0 {
            return bad(format!("alpha must lie in (0, 1], got {}", self.alpha));
        }
        if !(self.a_r > 0.0 && self.a_r.is_finite()) {
            return bad(format!("a_r must be > 0, got {}", self.a_r));
        }
        if !(self.gamma_scale > 0.0 && self.gamma_scale.is_finite()) {
            return bad(format!("gamma_scale must be > 0, got {}", self.gamma_scale));
        }
        if self.n_trials < 1 {
            return bad("n_trials must be >= 1".into());
        }
        if self.n_candidates > 0 && !(self.los_params.fading_std_db > 0.0) {
            return bad("LoS fading std must be > 0 when candidates are present".into());
        }
        self.los_params
            .validate()
            .and(self.nlos_params.validate())
            .and(self.budget.validate())
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        self.placement.validate(self.n_candidates)
    }

    pub fn source_position(&self) -> Point {
        Point::new(self.d_source, 0.0)
    }

    /// Distance fed to the NLoS path-loss law for the direct link.
    pub fn direct_link_distance(&self) -> f64 {
        let norm = self.d_source;
        let d = match self.direct_distance {
            DirectDistance::SquaredNorm => norm * norm,
            DirectDistance::Euclidean => norm,
        };
        d.max(self.min_link_distance)
    }

    pub fn scaled_los(&self) -> ChannelParams {
        self.los_params.with_fading_scale(self.gamma_scale)
    }

    pub fn scaled_nlos(&self) -> ChannelParams {
        self.nlos_params.with_fading_scale(self.gamma_scale)
    }

    fn link_distance(&self, a: &Point, b: &Point) -> Result<f64> {
        let d = a.distance(b);
        if d == 0.0 {
            return Err(Error::Domain("two nodes share a position".into()));
        }
        Ok(d.max(self.min_link_distance))
    }
}

/// Random stream for one trial of an experiment.
pub fn trial_rng(seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial_index);
    rng
}

/// One realized world.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub q_s: Point,
    pub q: Vec<Point>,
    pub h_s: f64,
    pub h_si: Vec<f64>,
    pub h_i: Vec<f64>,
    pub p_s: f64,
    pub p_si: Vec<f64>,
    pub p_i: Vec<f64>,
    pub valuations: Vec<f64>,
    pub models: Vec<ValuationModel>,
    /// `alpha * a_r * h_si` per candidate.
    pub wpt_gains: Vec<f64>,
}

impl Scenario {
    pub fn n_candidates(&self) -> usize {
        self.q.len()
    }

    /// Auction instance with truthful bids.
    pub fn auction_input(&self, budget: &LinkBudget) -> Result<AuctionInput> {
        let candidates = self
            .valuations
            .iter()
            .zip(&self.models)
            .zip(&self.wpt_gains)
            .map(|((&bid, &model), &wpt_gain)| Candidate {
                bid,
                model,
                wpt_gain,
            })
            .collect();
        AuctionInput::new(budget.p_max, self.p_s, candidates)
    }
}

pub fn generate_scenario<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> Result<Scenario> {
    let los = config.scaled_los();
    let nlos = config.scaled_nlos();
    let budget = &config.budget;
    let ap = Point::ORIGIN;
    let q_s = config.source_position();

    let h_s = sample_channel(&nlos, config.direct_link_distance(), rng)?;
    let p_s = required_power(budget, h_s)?;

    let q = config.placement.sample(config.n_candidates, rng);
    let n = q.len();
    let mut sc = Scenario {
        q_s,
        q: Vec::with_capacity(n),
        h_s,
        h_si: Vec::with_capacity(n),
        h_i: Vec::with_capacity(n),
        p_s,
        p_si: Vec::with_capacity(n),
        p_i: Vec::with_capacity(n),
        valuations: Vec::with_capacity(n),
        models: Vec::with_capacity(n),
        wpt_gains: Vec::with_capacity(n),
    };
    for qi in q {
        let d_si = config.link_distance(&q_s, &qi)?;
        let d_i = config.link_distance(&ap, &qi)?;
        let h_si = sample_channel(&los, d_si, rng)?;
        let h_i = sample_channel(&los, d_i, rng)?;
        let p_si = required_power(budget, h_si)?;
        let p_i = required_power(budget, h_i)?;
        let valuation = min_inducement_power(p_si, p_i, config.alpha, config.a_r, h_si)?;
        let model = ValuationModel::from_physical(
            budget.required_rx_power(),
            h_si,
            path_loss_linear(&los, d_i)?,
            config.alpha,
            config.a_r,
            los.sigma_ln(),
        )?;
        sc.q.push(qi);
        sc.h_si.push(h_si);
        sc.h_i.push(h_i);
        sc.p_si.push(p_si);
        sc.p_i.push(p_i);
        sc.valuations.push(valuation);
        sc.models.push(model);
        sc.wpt_gains.push(config.alpha * config.a_r * h_si);
    }
    Ok(sc)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub myerson: AuctionOutcome,
    pub vickrey: AuctionOutcome,
    pub perfect_info: AuctionOutcome,
    pub direct: AuctionOutcome,
}

impl TrialResult {
    pub fn get(&self, mechanism: Mechanism) -> &AuctionOutcome {
        match mechanism {
            Mechanism::Myerson => &self.myerson,
            Mechanism::Vickrey => &self.vickrey,
            Mechanism::PerfectInfo => &self.perfect_info,
            Mechanism::Direct => &self.direct,
        }
    }
}

pub fn run_trial(
    scenario: &Scenario,
    config: &SimConfig,
    spec: &BisectionSpec,
) -> Result<TrialResult> {
    let input = scenario.auction_input(&config.budget)?;
    Ok(TrialResult {
        myerson: run_myerson(&input, spec)?,
        vickrey: run_vickrey(&input)?,
        perfect_info: run_perfect_info(&input)?,
        direct: run_direct(&input),
    })
}

/// Aggregates for one mechanism.
#[derive(Debug, Clone, PartialEq)]
pub struct MechanismMetrics {
    pub mechanism: Mechanism,
    pub outage_prob: f64,
    /// Mean radiated source power over trials where communication succeeds.
    pub mean_source_power_cond: f64,
    /// Mean radiated source power over all trials (0 on outage).
    pub mean_source_power_uncond: f64,
    /// Mean power harvested by the winner, over trials where a relay is hired.
    pub mean_harvested: f64,
    /// Mean harvested surplus, over trials where a relay is hired.
    pub mean_surplus: f64,
    /// Mean relay payment over trials where a relay is hired.
    pub mean_payment_relay: f64,
    /// Mean of [`AuctionOutcome::buyer_cost`] over all trials.
    pub mean_buyer_cost: f64,
    pub relay_rate: f64,
    /// Fraction of trials won by each candidate index.
    pub selection_freq: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub trial_count: usize,
    pub failed_trials: usize,
    /// One entry per [`Mechanism::ALL`], in that order.
    pub mechanisms: Vec<MechanismMetrics>,
}

impl Metrics {
    pub fn get(&self, mechanism: Mechanism) -> &MechanismMetrics {
        self.mechanisms
            .iter()
            .find(|m| m.mechanism == mechanism)
            .expect("all mechanisms are aggregated")
    }
}

#[derive(Debug, Clone, Default)]
struct Accumulator {
    outages: usize,
    successes: usize,
    relays: usize,
    power_sum: f64,
    harvested_sum: f64,
    surplus_sum: f64,
    payment_sum: f64,
    cost_sum: f64,
    wins: Vec<usize>,
}

impl Accumulator {
    fn new(n: usize) -> Self {
        Accumulator {
            wins: vec![0; n],
            ..Default::default()
        }
    }

    fn add(&mut self, out: &AuctionOutcome) {
        if out.comm_success {
            self.successes += 1;
            self.power_sum += out.source_tx_power;
        } else {
            self.outages += 1;
        }
        if let Some(i) = out.winner.relay() {
            self.relays += 1;
            self.harvested_sum += out.harvested;
            self.surplus_sum += out.surplus;
            self.payment_sum += out.payment;
            if i < self.wins.len() {
                self.wins[i] += 1;
            }
        }
        self.cost_sum += out.buyer_cost();
    }

    fn finish(self, mechanism: Mechanism, trials: usize) -> MechanismMetrics {
        let mean = |sum: f64, count: usize| if count > 0 { sum / count as f64 } else { 0.0 };
        let total = trials as f64;
        MechanismMetrics {
            mechanism,
            outage_prob: self.outages as f64 / total,
            mean_source_power_cond: mean(self.power_sum, self.successes),
            mean_source_power_uncond: self.power_sum / total,
            mean_harvested: mean(self.harvested_sum, self.relays),
            mean_surplus: mean(self.surplus_sum, self.relays),
            mean_payment_relay: mean(self.payment_sum, self.relays),
            mean_buyer_cost: self.cost_sum / total,
            relay_rate: self.relays as f64 / total,
            selection_freq: self.wins.iter().map(|&w| w as f64 / total).collect(),
        }
    }
}

/// Runs one trial end to end with its own random stream.
pub fn simulate_trial(
    config: &SimConfig,
    spec: &BisectionSpec,
    trial_index: u64,
) -> Result<TrialResult> {
    let mut rng = trial_rng(config.seed, trial_index);
    let scenario = generate_scenario(config, &mut rng)?;
    run_trial(&scenario, config, spec)
}

/// Runs `config.n_trials` independent trials and aggregates them.
///
/// Failed trials are excluded from the averages. More than
/// [`MAX_FAILURE_RATE`] failures abort the experiment.
pub fn run_experiment(config: &SimConfig) -> Result<Metrics> {
    run_experiment_with(config, &BisectionSpec::default())
}

pub fn run_experiment_with(config: &SimConfig, spec: &BisectionSpec) -> Result<Metrics> {
    config.validate()?;
    let mut accs: Vec<Accumulator> = Mechanism::ALL
        .iter()
        .map(|_| Accumulator::new(config.n_candidates))
        .collect();
    let mut failed = 0usize;
    let mut first_error = None;
    for t in 0..config.n_trials {
        match simulate_trial(config, spec, t as u64) {
            Ok(res) => {
                for (acc, &m) in accs.iter_mut().zip(Mechanism::ALL.iter()) {
                    acc.add(res.get(m));
                }
            }
            Err(e) => {
                failed += 1;
                first_error.get_or_insert(e);
            }
        }
    }
    if failed as f64 > MAX_FAILURE_RATE * config.n_trials as f64 {
        return Err(Error::TooManyFailures {
            failed,
            total: config.n_trials,
            first: Box::new(first_error.expect("failures recorded")),
        });
    }
    let ok = config.n_trials - failed;
    Ok(Metrics {
        trial_count: ok,
        failed_trials: failed,
        mechanisms: accs
            .into_iter()
            .zip(Mechanism::ALL.iter())
            .map(|(acc, &m)| acc.finish(m, ok.max(1)))
            .collect(),
    })
}
