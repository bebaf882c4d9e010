//! Agent population and the tick cycle.
//!
//! Every tick runs five stages in a fixed order: generation, consumption,
//! propagation, state update, bookkeeping. Information travels through
//! double-buffered inboxes: whatever an agent receives during tick `t`
//! is consumed and relayed during tick `t + 1`, then discarded.
//!
//! In the default [`RelayMode::Forward`] each kept piece survives with
//! probability `p_p` and moves on to one uniformly chosen alter, so piece
//! counts are conserved up to attrition and new generation. In
//! [`RelayMode::Broadcast`] each alter receives its own copy with
//! probability `p_p`, and volumes grow geometrically (roughly
//! `degree * p_p` per tick). Inboxes are therefore stored as
//! multiplicities per `(sender, valence)` rather than as explicit piece
//! lists, and independent per-piece Bernoulli trials are drawn as a single
//! binomial thinning of each multiplicity.

use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::sig6;
use crate::network::{generate_erdos_renyi, generate_small_world, GraphModel, Network, SmallWorldSpec};

pub type SimRng = ChaCha8Rng;

/// Multiplicities at or above this are thinned with a Gaussian
/// approximation; below it the binomial draw is exact.
const EXACT_BINOMIAL_LIMIT: f64 = 1e15;

/// Multiplicities up to this are resolved one Bernoulli trial per piece.
const PER_PIECE_LIMIT: f64 = 32.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Valence {
    Good,
    Bad,
}

impl Valence {
    #[inline]
    fn idx(self) -> usize {
        match self {
            Valence::Good => 0,
            Valence::Bad => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Human,
    BadBot,
    GoodBot,
    InfoCorrectionBot,
}

impl Role {
    pub fn is_bot(self) -> bool {
        self != Role::Human
    }
}

/// Mutable belief state of a human agent. Counters hold pieces consumed
/// since the last flip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HumanState {
    pub valence: Valence,
    pub bad_consumed_since_flip: u64,
    pub good_consumed_since_flip: u64,
}

impl HumanState {
    pub const fn fresh() -> Self {
        Self {
            valence: Valence::Good,
            bad_consumed_since_flip: 0,
            good_consumed_since_flip: 0,
        }
    }
}

/// Population the defender ratios are multiplied with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DefenderBasis {
    #[default]
    BadBots,
    Humans,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FlipRule {
    /// Flip once the opposite-valence counter reaches the threshold.
    #[default]
    Gross,
    /// Flip once opposite minus same valence reaches the threshold.
    NetDifference,
}

/// How a relaying agent hands kept pieces to its alters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RelayMode {
    /// With probability `p_p` a piece is passed on to one alter drawn
    /// uniformly at random. Piece counts are conserved.
    #[default]
    Forward,
    /// Every alter independently receives a copy with probability `p_p`.
    Broadcast,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkConfig {
    pub model: GraphModel,
    /// Lattice degree for the small-world model (ignored for Erdős–Rényi).
    pub k: usize,
    /// Rewiring probability (small world) or link probability (Erdős–Rényi).
    pub beta: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            model: GraphModel::SmallWorld,
            k: 10,
            beta: 0.05,
        }
    }
}

/// Complete parameterisation of one simulated condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimParams {
    #[serde(rename = "n_h")]
    pub humans: usize,
    #[serde(rename = "alpha1")]
    pub bad_bot_ratio: f64,
    #[serde(rename = "alpha2")]
    pub info_correction_ratio: f64,
    #[serde(rename = "alpha3")]
    pub good_bot_ratio: f64,
    pub defender_basis: DefenderBasis,
    #[serde(rename = "p_g")]
    pub p_generate: f64,
    #[serde(rename = "p_c")]
    pub p_consume: f64,
    #[serde(rename = "p_p")]
    pub p_propagate: f64,
    #[serde(rename = "threshold_t")]
    pub threshold: u64,
    pub max_ticks: u64,
    pub network: NetworkConfig,
    pub seed: u64,
    pub flip_rule: FlipRule,
    pub relay: RelayMode,
    /// Skip the immediate sender when relaying a piece.
    pub exclude_sender: bool,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            humans: 1000,
            bad_bot_ratio: 0.2,
            info_correction_ratio: 0.0,
            good_bot_ratio: 0.0,
            defender_basis: DefenderBasis::BadBots,
            p_generate: 0.4,
            p_consume: 0.8,
            p_propagate: 0.8,
            threshold: 72,
            max_ticks: 100,
            network: NetworkConfig::default(),
            seed: 0,
            flip_rule: FlipRule::Gross,
            relay: RelayMode::Forward,
            exclude_sender: true,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        if self.humans < 1 {
            return Err(Error::param("n_h", "at least one human is required"));
        }
        for (name, p) in [
            ("p_g", self.p_generate),
            ("p_c", self.p_consume),
            ("p_p", self.p_propagate),
            ("network.beta", self.network.beta),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::param(name, format!("{p} is not a probability in [0, 1]")));
            }
        }
        for (name, a) in [
            ("alpha1", self.bad_bot_ratio),
            ("alpha2", self.info_correction_ratio),
            ("alpha3", self.good_bot_ratio),
        ] {
            if !(a.is_finite() && a >= 0.0) {
                return Err(Error::param(name, format!("ratio must be finite and >= 0, got {a}")));
            }
        }
        if self.threshold < 1 {
            return Err(Error::param("threshold_t", "threshold must be >= 1"));
        }
        if self.max_ticks < 1 {
            return Err(Error::param("max_ticks", "tick cap must be >= 1"));
        }
        Ok(())
    }

    pub fn population(&self) -> Population {
        let bad_bots = round_count(self.bad_bot_ratio * self.humans as f64);
        let basis = match self.defender_basis {
            DefenderBasis::BadBots => bad_bots,
            DefenderBasis::Humans => self.humans,
        } as f64;
        Population {
            humans: self.humans,
            bad_bots,
            info_correction_bots: round_count(self.info_correction_ratio * basis),
            good_bots: round_count(self.good_bot_ratio * basis),
        }
    }
}

// f64::round is half-away-from-zero
fn round_count(x: f64) -> usize {
    x.round() as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Population {
    pub humans: usize,
    pub bad_bots: usize,
    pub info_correction_bots: usize,
    pub good_bots: usize,
}

impl Population {
    pub fn total(&self) -> usize {
        self.humans + self.bad_bots + self.info_correction_bots + self.good_bots
    }

    /// Unshuffled role vector: humans first, then each bot cohort.
    fn roles(&self) -> Vec<Role> {
        let mut roles = Vec::with_capacity(self.total());
        roles.extend(std::iter::repeat_n(Role::Human, self.humans));
        roles.extend(std::iter::repeat_n(Role::BadBot, self.bad_bots));
        roles.extend(std::iter::repeat_n(Role::InfoCorrectionBot, self.info_correction_bots));
        roles.extend(std::iter::repeat_n(Role::GoodBot, self.good_bots));
        roles
    }
}

/// Aggregate counters for one tick. Piece counts are `f64` because relay
/// volumes outgrow any fixed-width integer within a few dozen ticks.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TickStats {
    pub tick: u64,
    pub good_humans: usize,
    pub bad_humans: usize,
    pub good_generated: f64,
    pub bad_generated: f64,
    pub good_consumed: f64,
    pub bad_consumed: f64,
    pub good_relayed: f64,
    pub bad_relayed: f64,
}

pub const TICK_STATS_HEADER: [&str; 9] = [
    "tick",
    "good_humans",
    "bad_humans",
    "good_generated",
    "bad_generated",
    "good_consumed",
    "bad_consumed",
    "good_relayed",
    "bad_relayed",
];

/// Writes a per-tick time series as CSV.
pub fn write_time_series<W: Write>(out: W, series: &[TickStats]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TICK_STATS_HEADER)?;
    for s in series {
        w.write_record([
            s.tick.to_string(),
            s.good_humans.to_string(),
            s.bad_humans.to_string(),
            sig6(s.good_generated),
            sig6(s.bad_generated),
            sig6(s.good_consumed),
            sig6(s.bad_consumed),
            sig6(s.good_relayed),
            sig6(s.bad_relayed),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_time_series(path: &Path, series: &[TickStats]) -> Result<()> {
    write_time_series(std::fs::File::create(path)?, series)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RunOutcome {
    /// First tick at which bad humans strictly outnumber good ones.
    pub bad_majority_tick: Option<u64>,
    /// First tick at which every human is bad.
    pub all_bad_tick: Option<u64>,
    pub ticks_run: u64,
    pub final_good_humans: usize,
    pub final_bad_humans: usize,
}

/// One simulation replication in progress.
#[derive(Debug, Clone)]
pub struct Simulation {
    params: SimParams,
    network: Network,
    roles: Vec<Role>,
    humans: Vec<Option<HumanState>>,
    /// CSR offsets into the per-slot arrays below; slot `offsets[a] + s`
    /// corresponds to the `s`-th neighbour of agent `a`.
    offsets: Vec<usize>,
    /// For slot (a, s) with neighbour b: the slot index of `a` inside b's range.
    reverse_slot: Vec<usize>,
    inbox_prev: Vec<[f64; 2]>,
    inbox_curr: Vec<[f64; 2]>,
    last_relayed: Vec<[f64; 2]>,
    kept: Vec<[f64; 2]>,
    outgoing: Vec<[f64; 2]>,
    rng: SimRng,
    tick: u64,
    outcome: RunOutcome,
    terminated: bool,
}

impl Simulation {
    /// Builds the network and places agents on uniformly shuffled nodes.
    pub fn new(params: SimParams) -> Result<Self> {
        params.validate()?;
        let pop = params.population();
        let total = pop.total();
        if total < 2 {
            return Err(Error::param("n_h", format!("need at least 2 agents, got {total}")));
        }
        let mut rng = SimRng::seed_from_u64(params.seed);
        let network = match params.network.model {
            GraphModel::SmallWorld => {
                let spec = SmallWorldSpec::new(total, params.network.k, params.network.beta).map_err(|e| match e {
                    Error::Parameter { name, reason } => Error::param(format!("network.{name}"), reason),
                    other => other,
                })?;
                generate_small_world(&spec, &mut rng)?
            }
            GraphModel::ErdosRenyi => generate_erdos_renyi(total, params.network.beta, &mut rng)?,
        };
        let mut roles = pop.roles();
        roles.shuffle(&mut rng);
        Self::assemble(params, network, roles, rng)
    }

    /// Uses a caller-provided topology and role assignment. The population
    /// ratios in `params` are ignored; the role vector is authoritative.
    pub fn with_layout(params: SimParams, network: Network, roles: Vec<Role>) -> Result<Self> {
        params.validate()?;
        if roles.len() != network.node_count() {
            return Err(Error::param(
                "roles",
                format!("{} roles for {} nodes", roles.len(), network.node_count()),
            ));
        }
        if !roles.contains(&Role::Human) {
            return Err(Error::param("roles", "layout has no human agents"));
        }
        let rng = SimRng::seed_from_u64(params.seed);
        Self::assemble(params, network, roles, rng)
    }

    fn assemble(params: SimParams, network: Network, roles: Vec<Role>, rng: SimRng) -> Result<Self> {
        let n = network.node_count();
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for a in 0..n {
            offsets.push(offsets[a] + network.degree(a));
        }
        let slots = offsets[n];
        let mut reverse_slot = vec![0; slots];
        for a in 0..n {
            for (s, &b) in network.neighbors(a).iter().enumerate() {
                let b = b as usize;
                let pos = network
                    .neighbors(b)
                    .binary_search(&(a as u32))
                    .expect("adjacency is symmetric");
                reverse_slot[offsets[a] + s] = offsets[b] + pos;
            }
        }
        let humans = roles
            .iter()
            .map(|r| (*r == Role::Human).then(HumanState::fresh))
            .collect();
        let n_h = roles.iter().filter(|r| **r == Role::Human).count();
        let mut params = params;
        params.humans = n_h;
        Ok(Self {
            params,
            network,
            roles,
            humans,
            offsets,
            reverse_slot,
            inbox_prev: vec![[0.0; 2]; slots],
            inbox_curr: vec![[0.0; 2]; slots],
            last_relayed: vec![[0.0; 2]; n],
            kept: Vec::new(),
            outgoing: Vec::new(),
            rng,
            tick: 0,
            outcome: RunOutcome {
                final_good_humans: n_h,
                ..RunOutcome::default()
            },
            terminated: false,
        })
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn human_state(&self, agent: usize) -> Option<&HumanState> {
        self.humans[agent].as_ref()
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn is_terminated(&self) -> bool {
        self.terminated
    }

    pub fn outcome(&self) -> RunOutcome {
        self.outcome
    }

    /// `(good, bad)` piece counts waiting in `agent`'s previous-tick inbox.
    pub fn inbox_prev_totals(&self, agent: usize) -> [f64; 2] {
        sum_slots(&self.inbox_prev[self.offsets[agent]..self.offsets[agent + 1]])
    }

    /// `(good, bad)` piece counts accumulated so far in the current-tick inbox.
    pub fn inbox_curr_totals(&self, agent: usize) -> [f64; 2] {
        sum_slots(&self.inbox_curr[self.offsets[agent]..self.offsets[agent + 1]])
    }

    /// Previous-tick inbox broken down by sender: `(sender, good, bad)`.
    pub fn inbox_prev_by_sender(&self, agent: usize) -> Vec<(usize, f64, f64)> {
        let range = self.offsets[agent]..self.offsets[agent + 1];
        self.network
            .neighbors(agent)
            .iter()
            .zip(&self.inbox_prev[range])
            .map(|(&s, c)| (s as usize, c[0], c[1]))
            .collect()
    }

    /// `(good, bad)` pieces `agent` relayed during the last completed tick.
    pub fn last_relayed(&self, agent: usize) -> [f64; 2] {
        self.last_relayed[agent]
    }

    pub fn human_counts(&self) -> (usize, usize) {
        let bad = self
            .humans
            .iter()
            .flatten()
            .filter(|h| h.valence == Valence::Bad)
            .count();
        (self.params.humans - bad, bad)
    }

    /// Advances the simulation by one tick.
    pub fn step(&mut self) -> Result<TickStats> {
        if self.terminated {
            return Err(Error::State(format!(
                "simulation already terminated at tick {}",
                self.tick
            )));
        }
        let mut stats = TickStats::default();
        self.generate(&mut stats);
        self.consume(&mut stats);
        self.propagate(&mut stats);
        self.update();

        std::mem::swap(&mut self.inbox_prev, &mut self.inbox_curr);
        self.inbox_curr.fill([0.0; 2]);
        self.tick += 1;

        let (good, bad) = self.human_counts();
        if bad > good && self.outcome.bad_majority_tick.is_none() {
            self.outcome.bad_majority_tick = Some(self.tick);
        }
        if bad == self.params.humans && self.outcome.all_bad_tick.is_none() {
            self.outcome.all_bad_tick = Some(self.tick);
        }
        self.outcome.ticks_run = self.tick;
        self.outcome.final_good_humans = good;
        self.outcome.final_bad_humans = bad;
        self.terminated = self.outcome.all_bad_tick.is_some() || self.tick >= self.params.max_ticks;

        stats.tick = self.tick;
        stats.good_humans = good;
        stats.bad_humans = bad;
        Ok(stats)
    }

    fn generate(&mut self, stats: &mut TickStats) {
        let p = self.params.p_generate;
        for a in 0..self.roles.len() {
            let (valence, pieces) = match self.roles[a] {
                Role::InfoCorrectionBot => continue,
                Role::Human => (self.humans[a].expect("human state").valence, 1.0),
                Role::BadBot => (Valence::Bad, 2.0),
                Role::GoodBot => (Valence::Good, 2.0),
            };
            if !self.rng.random_bool(p) {
                continue;
            }
            let v = valence.idx();
            for slot in self.offsets[a]..self.offsets[a + 1] {
                self.inbox_curr[self.reverse_slot[slot]][v] += pieces;
            }
            match valence {
                Valence::Good => stats.good_generated += pieces,
                Valence::Bad => stats.bad_generated += pieces,
            }
        }
    }

    fn consume(&mut self, stats: &mut TickStats) {
        let p = self.params.p_consume;
        for a in 0..self.roles.len() {
            let Some(state) = self.humans[a].as_mut() else {
                continue;
            };
            let [good, bad] = sum_slots(&self.inbox_prev[self.offsets[a]..self.offsets[a + 1]]);
            let good = thin(&mut self.rng, good, p);
            let bad = thin(&mut self.rng, bad, p);
            state.good_consumed_since_flip = state.good_consumed_since_flip.saturating_add(good as u64);
            state.bad_consumed_since_flip = state.bad_consumed_since_flip.saturating_add(bad as u64);
            stats.good_consumed += good;
            stats.bad_consumed += bad;
        }
    }

    fn propagate(&mut self, stats: &mut TickStats) {
        let p = self.params.p_propagate;
        let exclude = self.params.exclude_sender;
        let mode = self.params.relay;
        for a in 0..self.roles.len() {
            let range = self.offsets[a]..self.offsets[a + 1];
            let filter = relay_filter(self.roles[a], self.humans[a].map(|h| h.valence));
            self.kept.clear();
            let mut total = [0.0f64; 2];
            for c in &self.inbox_prev[range.clone()] {
                let k = filter(*c);
                total[0] += k[0];
                total[1] += k[1];
                self.kept.push(k);
            }
            self.outgoing.clear();
            self.outgoing.resize(range.len(), [0.0; 2]);
            if total != [0.0; 2] {
                match mode {
                    RelayMode::Broadcast => self.broadcast(total, p, exclude),
                    RelayMode::Forward => self.forward(p, exclude),
                }
            }
            let mut relayed = [0.0f64; 2];
            for (slot, out) in range.zip(&self.outgoing) {
                let dst = &mut self.inbox_curr[self.reverse_slot[slot]];
                dst[0] += out[0];
                dst[1] += out[1];
                relayed[0] += out[0];
                relayed[1] += out[1];
            }
            self.last_relayed[a] = relayed;
            stats.good_relayed += relayed[0];
            stats.bad_relayed += relayed[1];
        }
    }

    /// Every alter gets each candidate piece independently with probability `p`.
    fn broadcast(&mut self, total: [f64; 2], p: f64, exclude: bool) {
        for (s, out) in self.outgoing.iter_mut().enumerate() {
            let mut cand = total;
            if exclude {
                cand[0] = (cand[0] - self.kept[s][0]).max(0.0);
                cand[1] = (cand[1] - self.kept[s][1]).max(0.0);
            }
            out[0] = thin(&mut self.rng, cand[0], p);
            out[1] = thin(&mut self.rng, cand[1], p);
        }
    }

    /// Each kept piece survives with probability `p` and then moves to one
    /// uniformly drawn alter (never back to its sender when excluding).
    fn forward(&mut self, p: f64, exclude: bool) {
        let deg = self.kept.len();
        let targets = if exclude { deg - 1 } else { deg };
        if targets == 0 {
            return;
        }
        let scale = targets as f64 / p;
        for s in 0..deg {
            // target index in 0..targets, skipping the sender slot when excluding
            let slot_of = |t: usize| if exclude && t >= s { t + 1 } else { t };
            for v in 0..2 {
                let count = self.kept[s][v];
                if count == 0.0 {
                    continue;
                }
                if count <= PER_PIECE_LIMIT {
                    // given u < p, u / p is uniform on [0, 1): one draw decides
                    // both survival and destination
                    for _ in 0..count as u64 {
                        let u: f64 = self.rng.random();
                        if u < p {
                            let t = (u * scale) as usize;
                            self.outgoing[slot_of(t.min(targets - 1))][v] += 1.0;
                        }
                    }
                    continue;
                }
                let mut left = thin(&mut self.rng, count, p);
                for t in 0..targets {
                    if left <= 0.0 {
                        break;
                    }
                    let share = if t + 1 == targets {
                        left
                    } else {
                        thin(&mut self.rng, left, 1.0 / (targets - t) as f64)
                    };
                    self.outgoing[slot_of(t)][v] += share;
                    left -= share;
                }
            }
        }
    }

    fn update(&mut self) {
        let t = self.params.threshold;
        let rule = self.params.flip_rule;
        for state in self.humans.iter_mut().flatten() {
            let (against, towards) = match state.valence {
                Valence::Good => (state.bad_consumed_since_flip, state.good_consumed_since_flip),
                Valence::Bad => (state.good_consumed_since_flip, state.bad_consumed_since_flip),
            };
            let flip = match rule {
                FlipRule::Gross => against >= t,
                FlipRule::NetDifference => against.saturating_sub(towards) >= t,
            };
            if flip {
                state.valence = match state.valence {
                    Valence::Good => Valence::Bad,
                    Valence::Bad => Valence::Good,
                };
                state.bad_consumed_since_flip = 0;
                state.good_consumed_since_flip = 0;
            }
        }
    }

    /// Steps until every human is bad or the tick cap is hit.
    pub fn run_to_completion(mut self) -> RunOutcome {
        while !self.terminated {
            self.step().expect("not terminated");
        }
        self.outcome
    }

    /// Like [`Simulation::run_to_completion`], also returning the per-tick series.
    pub fn run_with_series(mut self) -> (RunOutcome, Vec<TickStats>) {
        let mut series = Vec::with_capacity(self.params.max_ticks as usize);
        while !self.terminated {
            series.push(self.step().expect("not terminated"));
        }
        (self.outcome, series)
    }
}

fn sum_slots(slots: &[[f64; 2]]) -> [f64; 2] {
    slots.iter().fold([0.0; 2], |acc, c| [acc[0] + c[0], acc[1] + c[1]])
}

/// Maps a received `(good, bad)` multiplicity to what the ego is willing
/// to pass on, applying bot rewriting.
fn relay_filter(role: Role, state: Option<Valence>) -> fn([f64; 2]) -> [f64; 2] {
    match (role, state) {
        (Role::Human, Some(Valence::Good)) => |c| c,
        (Role::Human, _) => |c| [0.0, c[1]],
        (Role::GoodBot, _) => |c| [c[0], 0.0],
        (Role::InfoCorrectionBot, _) => |c| [c[0] + c[1], 0.0],
        (Role::BadBot, _) => |c| [0.0, c[0] + c[1]],
    }
}

/// Number of successes among `n` independent Bernoulli(`p`) trials.
pub(crate) fn thin<R: Rng + ?Sized>(rng: &mut R, n: f64, p: f64) -> f64 {
    if n <= 0.0 || p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return n;
    }
    if n <= PER_PIECE_LIMIT {
        let mut hits = 0.0;
        for _ in 0..n as u64 {
            if rng.random::<f64>() < p {
                hits += 1.0;
            }
        }
        return hits;
    }
    if n < EXACT_BINOMIAL_LIMIT {
        let draw = Binomial::new(n as u64, p).expect("valid binomial").sample(rng);
        return draw as f64;
    }
    let z: f64 = StandardNormal.sample(rng);
    let mean = n * p;
    (mean + z * (mean * (1.0 - p)).sqrt()).round().clamp(0.0, n)
}
