//! Brute-force ground truth. Conditional means and variance components come
//! straight from their definitions: enumerate the conditioning player's full
//! joint action assignments, weigh terminal histories by everyone else's
//! probabilities, and average. Nothing here shares the weighted
//! per-info-state algebra of [`crate::exact`], which is the point.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;

use crate::error::Error;
use crate::exact::{rating_key, RatedPopulation, ThreeWayReport};
use crate::exec::{stream_rng, StreamDomain};
use crate::game::{GameTree, GameTreeBuilder, InfoStateId, PlayerRef};
use crate::play::{enumerate_terminal_histories, TerminalHistory};
use crate::policy::{policy_for, BehavioralPolicy, PolicyProfile};

/// Default cap on joint assignment counts.
pub const DEFAULT_ASSIGNMENT_CAP: u64 = 1_000_000;

/// One full joint action assignment for the conditioning player: a canonical
/// action index per owned info state (in arena order), with its product-form
/// probability. Zero-probability assignments are skipped.
#[derive(Clone, Debug)]
pub struct JointAssignment {
    pub choices: Vec<usize>,
    pub probability: f64,
}

/// Enumerates every joint assignment of the policy owner's info states.
pub fn enumerate_assignments(
    tree: &GameTree,
    pi: &BehavioralPolicy,
    cap: u64,
) -> Result<Vec<JointAssignment>, Error> {
    let owned = tree.owned_info_states(pi.owner());
    let mut count: u128 = 1;
    for u in &owned {
        count = count.saturating_mul(tree.info_state(*u).actions.len() as u128);
        if count > cap as u128 {
            return Err(Error::EnumerationTooLarge { count, cap });
        }
    }
    let dists: Vec<&[f64]> = owned
        .iter()
        .map(|u| {
            pi.probs(*u).ok_or_else(|| Error::PolicyCoverage {
                player: pi.owner().to_string(),
                info_state: tree.info_state(*u).name.clone(),
            })
        })
        .collect::<Result<_, _>>()?;

    // The odometer yields exactly one (empty) assignment when the player
    // owns no info states: E(Y|Aⁱ) is then the constant E(Y).
    let mut out = Vec::new();
    let mut current = vec![0usize; owned.len()];
    'outer: loop {
        let p: f64 = current.iter().zip(&dists).map(|(c, d)| d[*c]).product();
        if p > 0.0 {
            out.push(JointAssignment {
                choices: current.clone(),
                probability: p,
            });
        }
        for i in (0..owned.len()).rev() {
            current[i] += 1;
            if current[i] < dists[i].len() {
                continue 'outer;
            }
            current[i] = 0;
        }
        break;
    }
    Ok(out)
}

/// Moments of the target reward when the conditioning player commits to
/// `assignment` ahead of time, by definition: a terminal history consistent
/// with the assignment occurs with probability η⁻ⁱ(z).
fn assignment_moments(
    histories: &[TerminalHistory],
    slot_of: &HashMap<InfoStateId, usize>,
    conditioning: PlayerRef,
    target: usize,
    assignment: &[usize],
) -> (f64, f64) {
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for h in histories {
        let consistent = h
            .playthrough
            .trace(conditioning)
            .iter()
            .all(|(u, a)| assignment[slot_of[u]] == *a);
        if consistent {
            let r = h.playthrough.rewards[target];
            m1 += h.eta_others * r;
            m2 += h.eta_others * r * r;
        }
    }
    (m1, m2)
}

fn slots(tree: &GameTree, conditioning: PlayerRef) -> HashMap<InfoStateId, usize> {
    tree.owned_info_states(conditioning)
        .into_iter()
        .enumerate()
        .map(|(i, u)| (u, i))
        .collect()
}

/// E(Y | **A**ⁱ = assignment): the average outcome over everyone else's play.
pub fn conditional_mean(
    tree: &GameTree,
    profile: &PolicyProfile,
    target: usize,
    conditioning: PlayerRef,
    assignment: &JointAssignment,
) -> Result<f64, Error> {
    if target >= tree.player_count() {
        return Err(Error::UnknownPlayer(target.to_string()));
    }
    let histories = enumerate_terminal_histories(tree, profile, conditioning)?;
    let slot_of = slots(tree, conditioning);
    Ok(assignment_moments(&histories, &slot_of, conditioning, target, &assignment.choices).0)
}

/// V[E(Y|**A**ⁱ)] by definition: Σ p(assign) μ(assign)² − (Σ p μ)².
pub fn oracle_explained_variance(
    tree: &GameTree,
    profile: &PolicyProfile,
    target: usize,
    conditioning: PlayerRef,
    cap: u64,
) -> Result<f64, Error> {
    let (explained, _residual) = oracle_components(tree, profile, target, conditioning, cap)?;
    Ok(explained)
}

/// E[V(Y|**A**ⁱ)] by definition.
pub fn oracle_residual_variance(
    tree: &GameTree,
    profile: &PolicyProfile,
    target: usize,
    conditioning: PlayerRef,
    cap: u64,
) -> Result<f64, Error> {
    let (_explained, residual) = oracle_components(tree, profile, target, conditioning, cap)?;
    Ok(residual)
}

/// Both definitional components in one enumeration pass.
pub fn oracle_components(
    tree: &GameTree,
    profile: &PolicyProfile,
    target: usize,
    conditioning: PlayerRef,
    cap: u64,
) -> Result<(f64, f64), Error> {
    if target >= tree.player_count() {
        return Err(Error::UnknownPlayer(target.to_string()));
    }
    let pi = policy_for(tree, profile, conditioning);
    let assignments = enumerate_assignments(tree, &pi, cap)?;
    let histories = enumerate_terminal_histories(tree, profile, conditioning)?;
    let slot_of = slots(tree, conditioning);
    let mut mean = 0.0;
    let mut mean_sq = 0.0;
    let mut residual = 0.0;
    for a in &assignments {
        let (m1, m2) = assignment_moments(&histories, &slot_of, conditioning, target, &a.choices);
        mean += a.probability * m1;
        mean_sq += a.probability * m1 * m1;
        residual += a.probability * (m2 - m1 * m1);
    }
    Ok((mean_sq - mean * mean, residual))
}

/// The three terms of the skill/chance/remaining decomposition, each computed
/// as its defining nested expectation (rating pairs → policy pairs → chance
/// assignments → terminal histories).
pub fn oracle_threeway(
    tree: &GameTree,
    population: &RatedPopulation,
    target_seat: usize,
    pair_cap: u64,
    chance_cap: u64,
) -> Result<ThreeWayReport, Error> {
    if tree.player_count() != 2 {
        return Err(Error::AsymmetricGame(format!(
            "{} players, expected 2",
            tree.player_count()
        )));
    }
    if !tree.is_zero_sum(1e-9) {
        return Err(Error::AsymmetricGame("rewards do not negate".into()));
    }
    let members = population.members();
    let n = members.len();
    if (n as u128) * (n as u128) > pair_cap as u128 {
        return Err(Error::EnumerationTooLarge {
            count: (n as u128) * (n as u128),
            cap: pair_cap,
        });
    }
    let chance_pi = policy_for(tree, &PolicyProfile::uniform(tree), PlayerRef::Chance);
    let assignments = enumerate_assignments(tree, &chance_pi, chance_cap)
        .map_err(|e| match e {
            Error::EnumerationTooLarge { count, cap } => Error::ChanceEnumerationTooLarge { count, cap },
            other => other,
        })?;
    let slot_of = slots(tree, PlayerRef::Chance);
    let other_seat = 1 - target_seat;

    // Per ordered pair: per-assignment conditional moments of the target
    // seat's reward.
    let mut per_pair: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut policies = vec![
                members[i].seat_policies[target_seat].clone(),
                members[j].seat_policies[other_seat].clone(),
            ];
            if target_seat == 1 {
                policies.swap(0, 1);
            }
            let profile = PolicyProfile::new(tree, policies)?;
            let histories = enumerate_terminal_histories(tree, &profile, PlayerRef::Chance)?;
            let mut mus = Vec::with_capacity(assignments.len());
            let mut mu2s = Vec::with_capacity(assignments.len());
            for a in &assignments {
                let (m1, m2) =
                    assignment_moments(&histories, &slot_of, PlayerRef::Chance, target_seat, &a.choices);
                mus.push(m1);
                mu2s.push(m2);
            }
            per_pair.push((mus, mu2s));
        }
    }

    let mut groups: BTreeMap<(u64, u64), Vec<usize>> = BTreeMap::new();
    for idx in 0..n * n {
        let (i, j) = (idx / n, idx % n);
        groups
            .entry((rating_key(members[i].rating), rating_key(members[j].rating)))
            .or_default()
            .push(idx);
    }

    let w_pair = 1.0 / (n * n) as f64;
    // Grand mean/second moment over (pair, assignment).
    let mut grand_mean = 0.0;
    let mut grand_second = 0.0;
    for (mus, mu2s) in &per_pair {
        for (a, assign) in assignments.iter().enumerate() {
            grand_mean += w_pair * assign.probability * mus[a];
            grand_second += w_pair * assign.probability * mu2s[a];
        }
    }
    let total = grand_second - grand_mean * grand_mean;

    let mut skill = 0.0;
    let mut chance = 0.0;
    let mut remaining = 0.0;
    for pairs in groups.values() {
        let w_group = pairs.len() as f64 * w_pair;
        let inv = 1.0 / pairs.len() as f64;
        // E(Y | ρ): average over the group's pairs and chance.
        let mut group_mean = 0.0;
        for &idx in pairs {
            for (a, assign) in assignments.iter().enumerate() {
                group_mean += inv * assign.probability * per_pair[idx].0[a];
            }
        }
        skill += w_group * (group_mean - grand_mean) * (group_mean - grand_mean);
        for (a, assign) in assignments.iter().enumerate() {
            // E(Y | a, ρ) and E(Y² | a, ρ).
            let g1: f64 = pairs.iter().map(|&idx| per_pair[idx].0[a]).sum::<f64>() * inv;
            let g2: f64 = pairs.iter().map(|&idx| per_pair[idx].1[a]).sum::<f64>() * inv;
            chance += w_group * assign.probability * (g1 - group_mean) * (g1 - group_mean);
            remaining += w_group * assign.probability * (g2 - g1 * g1);
        }
    }
    Ok(ThreeWayReport {
        skill,
        chance,
        remaining,
        total,
    })
}

/// Parameters for the seeded random-game generator used in differential
/// tests. Decision nodes of one player are grouped into shared info states
/// only when their owner-visible histories agree, so every generated game
/// satisfies perfect recall; games whose joint assignment spaces would
/// overflow `max_assignments_per_player` are resampled.
#[derive(Clone, Copy, Debug)]
pub struct RandomGameParams {
    pub max_depth: usize,
    pub max_branch: usize,
    pub player_count: usize,
    pub chance_density: f64,
    pub max_nodes: usize,
    pub max_assignments_per_player: u128,
}

impl Default for RandomGameParams {
    fn default() -> Self {
        RandomGameParams {
            max_depth: 4,
            max_branch: 3,
            player_count: 2,
            chance_density: 0.35,
            max_nodes: 40,
            max_assignments_per_player: 4096,
        }
    }
}

/// Builds a random valid game; deterministic in `(params, seed)`.
pub fn random_game(params: &RandomGameParams, seed: u64) -> GameTree {
    for attempt in 0.. {
        let mut rng = stream_rng(seed, StreamDomain::GameGen, attempt);
        if let Some(tree) = try_random_game(params, &mut rng) {
            return tree;
        }
    }
    unreachable!("rejection sampling terminates");
}

struct ProtoRandom {
    depth: usize,
    owner: Option<usize>, // None = chance or terminal
    children: Vec<usize>,
    rewards: Vec<f64>,
    weights: Vec<f64>,
    info_set: String,
}

fn try_random_game(params: &RandomGameParams, rng: &mut impl Rng) -> Option<GameTree> {
    let blank = |depth: usize| ProtoRandom {
        depth,
        owner: None,
        children: Vec::new(),
        rewards: Vec::new(),
        weights: Vec::new(),
        info_set: String::new(),
    };
    let mut nodes: Vec<ProtoRandom> = vec![blank(0)];
    let mut head = 0;
    while head < nodes.len() {
        let id = head;
        head += 1;
        let depth = nodes[id].depth;
        let budget_left = params.max_nodes.saturating_sub(nodes.len());
        let force_terminal = depth >= params.max_depth || budget_left < 2;
        let make_terminal =
            id != 0 && (force_terminal || rng.random::<f64>() < 0.25 + 0.2 * depth as f64);
        if make_terminal {
            nodes[id].rewards = (0..params.player_count)
                .map(|_| f64::from(rng.random_range(-4i32..=4)) / 2.0)
                .collect();
            continue;
        }
        let is_chance = rng.random::<f64>() < params.chance_density;
        let branch = rng
            .random_range(2..=params.max_branch.max(2))
            .min(budget_left.max(2));
        if is_chance {
            // Random weights, occasionally zero, normalized so validation's
            // 1e-12 gate passes.
            let mut weights: Vec<f64> = (0..branch)
                .map(|_| {
                    if rng.random::<f64>() < 0.1 {
                        0.0
                    } else {
                        rng.random_range(0.1..1.0)
                    }
                })
                .collect();
            let sum: f64 = weights.iter().sum();
            if sum <= 0.0 {
                return None;
            }
            for w in weights.iter_mut() {
                *w /= sum;
            }
            nodes[id].weights = weights;
        } else {
            nodes[id].owner = Some(rng.random_range(0..params.player_count));
        }
        for _ in 0..branch {
            let child = nodes.len();
            nodes.push(blank(depth + 1));
            nodes[id].children.push(child);
        }
    }

    // Group decision nodes into info states, walking in creation (BFS) order
    // so ancestors are grouped before descendants. Nodes may share an info
    // state only when owner, branching, and decision-history key all agree;
    // the owner-visible history is a subsequence of that key, so perfect
    // recall holds by construction. Chance moves are deliberately absent from
    // the key: members reached through different chance outcomes model hidden
    // deals.
    let mut history_key: Vec<Vec<(String, usize)>> = vec![Vec::new(); nodes.len()];
    let mut class_groups: HashMap<(usize, usize, String), Vec<String>> = HashMap::new();
    let mut group_counter = 0usize;
    for id in 0..nodes.len() {
        if let Some(p) = nodes[id].owner {
            let class = (p, nodes[id].children.len(), format!("{:?}", history_key[id]));
            let group_names = class_groups.entry(class).or_default();
            let name = if !group_names.is_empty() && rng.random::<f64>() < 0.6 {
                group_names[rng.random_range(0..group_names.len())].clone()
            } else {
                group_counter += 1;
                let name = format!("u{group_counter}");
                group_names.push(name.clone());
                name
            };
            nodes[id].info_set = name;
        }
        for (edge_idx, &child) in nodes[id].children.iter().enumerate() {
            let mut key = history_key[id].clone();
            if nodes[id].owner.is_some() {
                key.push((nodes[id].info_set.clone(), edge_idx));
            }
            history_key[child] = key;
        }
    }

    let mut b = GameTreeBuilder::new("random", params.player_count);
    let ids: Vec<crate::game::NodeId> = nodes
        .iter()
        .enumerate()
        .map(|(i, n)| {
            if n.children.is_empty() {
                b.terminal(format!("n{i}"), n.rewards.clone())
            } else {
                match n.owner {
                    Some(p) => b.decision(format!("n{i}"), p, n.info_set.clone()),
                    None => b.chance(format!("n{i}")),
                }
            }
        })
        .collect();
    for (i, n) in nodes.iter().enumerate() {
        for (j, &c) in n.children.iter().enumerate() {
            if n.owner.is_none() {
                b.chance_edge(ids[i], format!("a{j}"), n.weights[j], ids[c]);
            } else {
                b.edge(ids[i], format!("a{j}"), ids[c]);
            }
        }
    }
    b.root(ids[0]);
    let tree = b.build().ok()?;
    // Keep the assignment spaces enumerable.
    let mut players: Vec<PlayerRef> = (0..params.player_count).map(PlayerRef::Player).collect();
    players.push(PlayerRef::Chance);
    for p in players {
        if assignment_count(&tree, p) > params.max_assignments_per_player {
            return None;
        }
    }
    Some(tree)
}

fn assignment_count(tree: &GameTree, player: PlayerRef) -> u128 {
    tree.owned_info_states(player)
        .iter()
        .fold(1u128, |acc, u| {
            acc.saturating_mul(tree.info_state(*u).actions.len() as u128)
        })
}

/// A random behavioral profile; deterministic in `(tree, seed)`. Some actions
/// get probability zero to exercise the zero-probability paths.
pub fn random_profile(tree: &GameTree, seed: u64) -> PolicyProfile {
    let mut rng = stream_rng(seed, StreamDomain::ProfileGen, 0);
    let policies = (0..tree.player_count())
        .map(|p| {
            let mut probs = HashMap::new();
            for u in tree.owned_info_states(PlayerRef::Player(p)) {
                let k = tree.info_state(u).actions.len();
                let mut weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
                if k >= 2 && rng.random::<f64>() < 0.15 {
                    let dead = rng.random_range(0..k);
                    weights[dead] = 0.0;
                }
                let sum: f64 = weights.iter().sum();
                for w in weights.iter_mut() {
                    *w /= sum;
                }
                probs.insert(u, weights);
            }
            BehavioralPolicy::new(tree, PlayerRef::Player(p), probs).expect("valid by construction")
        })
        .collect();
    PolicyProfile::new(tree, policies).expect("valid by construction")
}
