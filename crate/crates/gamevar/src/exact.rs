//! Exact variance decomposition by tree evaluation: total outcome variance,
//! the per-info-state explained component for any conditioning player, and
//! the three-way skill/chance/remaining split over a rated policy population.

use std::collections::BTreeMap;

use crate::error::Error;
use crate::exec;
use crate::game::{GameTree, InfoStateId, NodeId, NodeKind, PlayerRef};
use crate::play::{enumerate_terminal_histories, expected_moments_pinned, reach_and_values};
use crate::policy::{policy_for, resolve_edge_probs, BehavioralPolicy, PolicyProfile};

/// Default cap on the joint chance assignment count in
/// [`threeway_decompose`].
pub const DEFAULT_CHANCE_CAP: u64 = 1 << 20;

/// Negative dust below this magnitude is treated as rounding and clamped to
/// zero; anything more negative is a genuine defect and left visible.
const NEG_DUST: f64 = 1e-12;

fn clamp_dust(x: f64) -> f64 {
    if x < 0.0 && x >= -NEG_DUST {
        0.0
    } else {
        x
    }
}

/// The two-way decomposition of one player's outcome variance with respect to
/// a conditioning player's actions.
#[derive(Clone, Debug)]
pub struct DecompositionReport {
    pub target: usize,
    pub conditioning: PlayerRef,
    pub total_variance: f64,
    /// V[E(Y | **A**ⁱ)]
    pub explained: f64,
    /// E[V(Y | **A**ⁱ)] = total − explained
    pub residual: f64,
    /// explained / total, 0 when the total is 0.
    pub explained_ratio: f64,
    /// Each reachable info state's summand of the explained component.
    pub per_info_state: Vec<(InfoStateId, f64)>,
}

/// Exact V(Y) for the target player: Σ_z η(z) (r(z) − μ)² over all terminal
/// histories.
pub fn total_variance(tree: &GameTree, profile: &PolicyProfile, target: usize) -> Result<f64, Error> {
    if target >= tree.player_count() {
        return Err(Error::UnknownPlayer(target.to_string()));
    }
    let histories = enumerate_terminal_histories(tree, profile, PlayerRef::Chance)?;
    let mean: f64 = histories
        .iter()
        .map(|h| h.eta * h.playthrough.rewards[target])
        .sum();
    Ok(histories
        .iter()
        .map(|h| {
            let d = h.playthrough.rewards[target] - mean;
            h.eta * d * d
        })
        .sum())
}

/// The explained component
/// Σ_u (Σ_a q(u,a)² πⁱ(a|u) − v(u)²) η⁻ⁱ(u) η(u)
/// over the conditioning player's reachable info states, with q and v on the
/// target player's reward. Zero-probability actions contribute nothing;
/// unreachable info states carry zero weight and are excluded.
pub fn explained_variance(
    tree: &GameTree,
    profile: &PolicyProfile,
    target: usize,
    conditioning: PlayerRef,
) -> Result<DecompositionReport, Error> {
    let stats = reach_and_values(tree, profile, conditioning, target)?;
    let pi = policy_for(tree, profile, conditioning);
    let mut per_info_state = Vec::new();
    let mut explained = 0.0;
    for s in &stats {
        let Some(values) = &s.values else { continue };
        let probs = pi.probs(s.info_state).expect("policy covers owned info states");
        let q_sq: f64 = values
            .action_values
            .iter()
            .zip(probs)
            .filter(|(_, p)| **p > 0.0)
            .map(|(q, p)| q * q * p)
            .sum();
        let contribution = clamp_dust((q_sq - values.value * values.value) * s.eta_others * s.eta);
        per_info_state.push((s.info_state, contribution));
        explained += contribution;
    }
    explained = clamp_dust(explained);
    let total = total_variance(tree, profile, target)?;
    let residual = clamp_dust(total - explained);
    let explained_ratio = if total > 0.0 {
        (explained / total).clamp(0.0, 1.0)
    } else {
        0.0
    };
    Ok(DecompositionReport {
        target,
        conditioning,
        total_variance: total,
        explained,
        residual,
        explained_ratio,
        per_info_state,
    })
}

/// One population member: a rating and a behavioral policy per seat.
#[derive(Clone, Debug)]
pub struct RatedMember {
    pub rating: f64,
    pub seat_policies: Vec<BehavioralPolicy>,
}

/// A finite population of rated policies, sampled uniformly with replacement
/// when two seats are filled.
#[derive(Clone, Debug)]
pub struct RatedPopulation {
    members: Vec<RatedMember>,
}

impl RatedPopulation {
    pub fn new(members: Vec<RatedMember>) -> Result<Self, Error> {
        if members.is_empty() {
            return Err(Error::InvalidParameter("population has no members".into()));
        }
        if members.iter().any(|m| !m.rating.is_finite()) {
            return Err(Error::InvalidParameter("population ratings must be finite".into()));
        }
        Ok(RatedPopulation { members })
    }

    pub fn members(&self) -> &[RatedMember] {
        &self.members
    }
}

/// The three-way decomposition of Y's variance: the part explained by the two
/// seats' skill ratings, the part chance explains given the ratings, and the
/// rest.
#[derive(Clone, Copy, Debug)]
pub struct ThreeWayReport {
    pub skill: f64,
    pub chance: f64,
    pub remaining: f64,
    pub total: f64,
}

// rating -> order-stable grouping key (normalizes -0.0; NaN is rejected at
// population construction)
pub(crate) fn rating_key(r: f64) -> u64 {
    let r = if r == 0.0 { 0.0 } else { r };
    r.to_bits()
}

pub(crate) struct PairEval {
    pub(crate) mean: f64,
    pub(crate) second: f64,
    /// E(Y | chance assignment, pair), aligned with the assignment list.
    pub(crate) mu: Vec<f64>,
}

pub(crate) struct ChanceAssignments {
    /// Chance nodes in arena order.
    pub(crate) nodes: Vec<NodeId>,
    /// Per-assignment pinned edge per chance node.
    pub(crate) choices: Vec<Vec<usize>>,
    pub(crate) probs: Vec<f64>,
}

pub(crate) fn enumerate_chance_assignments(tree: &GameTree, cap: u64) -> Result<ChanceAssignments, Error> {
    let nodes = tree.chance_nodes();
    let mut count: u128 = 1;
    for id in &nodes {
        count = count.saturating_mul(tree.node(*id).edges.len() as u128);
        if count > cap as u128 {
            return Err(Error::ChanceEnumerationTooLarge { count, cap });
        }
    }
    // A game without chance nodes gets the single empty assignment from the
    // odometer's first pass.
    let mut choices = Vec::new();
    let mut probs = Vec::new();
    let mut current = vec![0usize; nodes.len()];
    'outer: loop {
        let mut p = 1.0;
        for (i, id) in nodes.iter().enumerate() {
            if let NodeKind::Chance { probs: np, .. } = &tree.node(*id).kind {
                p *= np[current[i]];
            }
        }
        if p > 0.0 {
            choices.push(current.clone());
            probs.push(p);
        }
        for i in (0..nodes.len()).rev() {
            current[i] += 1;
            if current[i] < tree.node(nodes[i]).edges.len() {
                continue 'outer;
            }
            current[i] = 0;
        }
        break;
    }
    Ok(ChanceAssignments { nodes, choices, probs })
}

pub(crate) fn eval_pair(
    tree: &GameTree,
    assignments: &ChanceAssignments,
    target_seat: usize,
    profile: &PolicyProfile,
) -> Result<PairEval, Error> {
    let edge_probs = resolve_edge_probs(tree, profile)?;
    let mut pin_by_node: Vec<Option<usize>> = vec![None; tree.node_count()];
    let mut mu = Vec::with_capacity(assignments.choices.len());
    let mut mean = 0.0;
    let mut second = 0.0;
    for (choice, p) in assignments.choices.iter().zip(&assignments.probs) {
        for (i, id) in assignments.nodes.iter().enumerate() {
            pin_by_node[id.index()] = Some(choice[i]);
        }
        let (m1, m2) = expected_moments_pinned(tree, &edge_probs, target_seat, &|id| {
            pin_by_node[id.index()]
        });
        mu.push(m1);
        mean += p * m1;
        second += p * m2;
    }
    Ok(PairEval { mean, second, mu })
}

fn threeway_impl(
    tree: &GameTree,
    population: &RatedPopulation,
    target_seat: usize,
    chance_cap: u64,
    parallel: bool,
) -> Result<ThreeWayReport, Error> {
    check_threeway_preconditions(tree, target_seat)?;
    let assignments = enumerate_chance_assignments(tree, chance_cap)?;
    let members = population.members();
    for m in members {
        if m.seat_policies.len() != tree.player_count() {
            return Err(Error::InvalidParameter(format!(
                "population member has {} seat policies for {} seats",
                m.seat_policies.len(),
                tree.player_count()
            )));
        }
    }
    let n = members.len();
    let other_seat = 1 - target_seat;

    let eval = |idx: usize| -> Result<PairEval, Error> {
        let (i, j) = (idx / n, idx % n);
        let mut policies = vec![
            members[i].seat_policies[target_seat].clone(),
            members[j].seat_policies[other_seat].clone(),
        ];
        if target_seat == 1 {
            policies.swap(0, 1);
        }
        let profile = PolicyProfile::new(tree, policies)?;
        eval_pair(tree, &assignments, target_seat, &profile)
    };
    let evals: Vec<Result<PairEval, Error>> = if parallel {
        exec::map_indexed(n * n, eval)
    } else {
        exec::map_indexed_seq(n * n, eval)
    };
    let mut pair_evals = Vec::with_capacity(n * n);
    for e in evals {
        pair_evals.push(e?);
    }

    // Group ordered pairs by their (rating, rating) key.
    let mut groups: BTreeMap<(u64, u64), Vec<usize>> = BTreeMap::new();
    for idx in 0..n * n {
        let (i, j) = (idx / n, idx % n);
        let key = (rating_key(members[i].rating), rating_key(members[j].rating));
        groups.entry(key).or_default().push(idx);
    }

    let w_pair = 1.0 / (n * n) as f64;
    let grand_mean: f64 = pair_evals.iter().map(|e| w_pair * e.mean).sum();
    let grand_second: f64 = pair_evals.iter().map(|e| w_pair * e.second).sum();
    let total = grand_second - grand_mean * grand_mean;

    let mut skill = 0.0;
    let mut chance = 0.0;
    for pairs in groups.values() {
        let w_group = pairs.len() as f64 * w_pair;
        let inv = 1.0 / pairs.len() as f64;
        let group_mean: f64 = pairs.iter().map(|&i| pair_evals[i].mean).sum::<f64>() * inv;
        skill += w_group * (group_mean - grand_mean) * (group_mean - grand_mean);
        // Var over chance assignments of the group-conditional mean outcome.
        let mut va = 0.0;
        for (a, p) in assignments.probs.iter().enumerate() {
            let g: f64 = pairs.iter().map(|&i| pair_evals[i].mu[a]).sum::<f64>() * inv;
            va += p * (g - group_mean) * (g - group_mean);
        }
        chance += w_group * va;
    }
    let remaining = clamp_dust(total - skill - chance);
    Ok(ThreeWayReport {
        skill: clamp_dust(skill),
        chance: clamp_dust(chance),
        remaining,
        total,
    })
}

fn check_threeway_preconditions(tree: &GameTree, target_seat: usize) -> Result<(), Error> {
    if tree.player_count() != 2 {
        return Err(Error::AsymmetricGame(format!(
            "{} players, expected 2",
            tree.player_count()
        )));
    }
    if target_seat >= 2 {
        return Err(Error::UnknownPlayer(target_seat.to_string()));
    }
    for (_, node) in tree.nodes() {
        if let NodeKind::Terminal { rewards } = &node.kind {
            if (rewards[0] + rewards[1]).abs() > 1e-9 {
                return Err(Error::AsymmetricGame(format!(
                    "rewards at `{}` do not negate",
                    node.name
                )));
            }
        }
    }
    Ok(())
}

/// Exact three-way decomposition over a rated population on a two-player
/// zero-sum game: policies for each seat are drawn uniformly with replacement
/// and all chance assignments are enumerated (up to `chance_cap`).
pub fn threeway_decompose(
    tree: &GameTree,
    population: &RatedPopulation,
    target_seat: usize,
    chance_cap: u64,
) -> Result<ThreeWayReport, Error> {
    threeway_impl(tree, population, target_seat, chance_cap, true)
}

/// Sequential reference implementation of [`threeway_decompose`]; results are
/// bit-identical.
pub fn threeway_decompose_seq(
    tree: &GameTree,
    population: &RatedPopulation,
    target_seat: usize,
    chance_cap: u64,
) -> Result<ThreeWayReport, Error> {
    threeway_impl(tree, population, target_seat, chance_cap, false)
}
