//! Full-state invariant scanning shared by the property and acceptance suites.
#![allow(dead_code, clippy::needless_range_loop)]

use consim_core::{
    DefenderBasis, FlipRule, GraphModel, NetworkConfig, RelayMode, Role, SimParams, Simulation, Valence,
};
use rand::Rng;

/// A random small configuration: at most 50 humans and 30 ticks.
pub fn random_small_params<R: Rng>(rng: &mut R) -> SimParams {
    let humans = rng.random_range(2..=50);
    let mut p = SimParams {
        humans,
        bad_bot_ratio: if rng.random_bool(0.2) {
            0.0
        } else {
            rng.random_range(0.0..1.0)
        },
        info_correction_ratio: if rng.random_bool(0.5) {
            0.0
        } else {
            rng.random_range(0.0..2.0)
        },
        good_bot_ratio: if rng.random_bool(0.5) {
            0.0
        } else {
            rng.random_range(0.0..2.0)
        },
        defender_basis: if rng.random_bool(0.5) {
            DefenderBasis::BadBots
        } else {
            DefenderBasis::Humans
        },
        p_generate: rng.random_range(0.0..=1.0),
        p_consume: rng.random_range(0.0..=1.0),
        p_propagate: rng.random_range(0.0..=1.0),
        threshold: rng.random_range(1..=12),
        max_ticks: rng.random_range(1..=30),
        seed: rng.random(),
        flip_rule: if rng.random_bool(0.5) {
            FlipRule::Gross
        } else {
            FlipRule::NetDifference
        },
        relay: if rng.random_bool(0.7) {
            RelayMode::Forward
        } else {
            RelayMode::Broadcast
        },
        exclude_sender: rng.random_bool(0.8),
        ..SimParams::default()
    };
    let total = p.population().total();
    p.network = if total >= 3 && rng.random_bool(0.8) {
        let max_half = ((total - 1) / 2).min(4);
        NetworkConfig {
            model: GraphModel::SmallWorld,
            k: 2 * rng.random_range(1..=max_half),
            beta: rng.random_range(0.0..=1.0),
        }
    } else {
        NetworkConfig {
            model: GraphModel::ErdosRenyi,
            k: 2,
            beta: rng.random_range(0.0..=1.0),
        }
    };
    p
}

/// The engine invariants that a single run must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Invariant {
    ValenceDiscipline,
    RoleConservation,
    CounterDiscipline,
    OutcomeOrdering,
    PurityOfAbsence,
}

#[derive(Debug)]
pub struct Violation {
    pub invariant: Invariant,
    pub tick: u64,
    pub detail: String,
}

fn role_histogram(sim: &Simulation) -> [usize; 4] {
    let mut h = [0; 4];
    for r in sim.roles() {
        h[match r {
            Role::Human => 0,
            Role::BadBot => 1,
            Role::GoodBot => 2,
            Role::InfoCorrectionBot => 3,
        }] += 1;
    }
    h
}

/// Runs `params` to completion, scanning every agent and inbox after each
/// tick. Returns the first violation found.
pub fn scan_run(params: &SimParams) -> Result<(), Violation> {
    let mut sim = Simulation::new(params.clone()).expect("valid params");
    let n = sim.roles().len();
    let roles0 = role_histogram(&sim);
    let pristine = params.bad_bot_ratio == 0.0 || sim.roles().iter().all(|r| *r != Role::BadBot);
    let fail = |invariant, tick, detail: String| {
        Err(Violation {
            invariant,
            tick,
            detail,
        })
    };

    while !sim.is_terminated() {
        let before: Vec<_> = (0..n).map(|a| sim.human_state(a).copied()).collect();
        sim.step().expect("live simulation");
        let tick = sim.tick();

        for a in 0..n {
            let [good, bad] = sim.last_relayed(a);
            let ok = match (sim.roles()[a], before[a].map(|h| h.valence)) {
                (Role::Human, Some(Valence::Bad)) => good == 0.0,
                (Role::Human, _) => true,
                (Role::GoodBot | Role::InfoCorrectionBot, _) => bad == 0.0,
                (Role::BadBot, _) => good == 0.0,
            };
            if !ok {
                return fail(
                    Invariant::ValenceDiscipline,
                    tick,
                    format!("agent {a} ({:?}) relayed good {good}, bad {bad}", sim.roles()[a]),
                );
            }

            match (before[a], sim.human_state(a)) {
                (Some(b), Some(h)) if b.valence != h.valence => {
                    if h.bad_consumed_since_flip != 0 || h.good_consumed_since_flip != 0 {
                        return fail(
                            Invariant::CounterDiscipline,
                            tick,
                            format!("agent {a} kept counts across a flip"),
                        );
                    }
                }
                (Some(b), Some(h)) => {
                    if h.bad_consumed_since_flip < b.bad_consumed_since_flip
                        || h.good_consumed_since_flip < b.good_consumed_since_flip
                    {
                        return fail(
                            Invariant::CounterDiscipline,
                            tick,
                            format!("agent {a} counter decreased"),
                        );
                    }
                }
                (None, None) => {}
                _ => {
                    return fail(
                        Invariant::RoleConservation,
                        tick,
                        format!("agent {a} gained or lost a state"),
                    )
                }
            }

            if pristine {
                let prev = sim.inbox_prev_totals(a)[1];
                let curr = sim.inbox_curr_totals(a)[1];
                let bad_human = sim.human_state(a).is_some_and(|h| h.valence == Valence::Bad);
                if prev != 0.0 || curr != 0.0 || bad != 0.0 || bad_human {
                    return fail(
                        Invariant::PurityOfAbsence,
                        tick,
                        format!("bad information at agent {a}"),
                    );
                }
            }
        }
        if role_histogram(&sim) != roles0 {
            return fail(Invariant::RoleConservation, tick, "role histogram changed".into());
        }
    }

    let o = sim.outcome();
    if let (Some(m), Some(all)) = (o.bad_majority_tick, o.all_bad_tick) {
        if all < m {
            return fail(
                Invariant::OutcomeOrdering,
                o.ticks_run,
                format!("all-bad {all} before majority {m}"),
            );
        }
    }
    if o.all_bad_tick.is_some() && o.final_bad_humans != params.humans {
        return fail(
            Invariant::OutcomeOrdering,
            o.ticks_run,
            "all-bad recorded with good humans left".into(),
        );
    }
    if params.humans >= 2 && o.all_bad_tick.is_some() && o.bad_majority_tick.is_none() {
        return fail(
            Invariant::OutcomeOrdering,
            o.ticks_run,
            "all-bad without a majority".into(),
        );
    }
    Ok(())
}
