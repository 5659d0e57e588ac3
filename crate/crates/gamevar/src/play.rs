//! Playthroughs, terminal-history enumeration, and the reach/value
//! primitives the variance decomposition is built on.

use rand::Rng;

use crate::error::Error;
use crate::game::{GameTree, InfoStateId, NodeId, NodeKind, PlayerRef};
use crate::policy::{resolve_edge_probs, PolicyProfile};

/// One root-to-leaf walk of the tree.
#[derive(Clone, Debug, PartialEq)]
pub struct Playthrough {
    /// `(node, edge index)` per step, root first.
    pub steps: Vec<(NodeId, usize)>,
    pub terminal: NodeId,
    pub rewards: Vec<f64>,
    /// Per-player traces (players `0..n`, then chance) as
    /// `(info state, canonical action index)` pairs.
    traces: Vec<Vec<(InfoStateId, usize)>>,
}

impl Playthrough {
    pub fn trace(&self, p: PlayerRef) -> &[(InfoStateId, usize)] {
        match p {
            PlayerRef::Player(i) => &self.traces[i],
            PlayerRef::Chance => &self.traces[self.traces.len() - 1],
        }
    }
}

/// Samples playthroughs under a fixed profile; resolves the profile once so
/// repeated sampling is cheap. Immutable and `Sync`.
pub struct Sampler<'a> {
    tree: &'a GameTree,
    edge_probs: Vec<Vec<f64>>,
}

impl<'a> Sampler<'a> {
    pub fn new(tree: &'a GameTree, profile: &PolicyProfile) -> Result<Self, Error> {
        Ok(Sampler {
            tree,
            edge_probs: resolve_edge_probs(tree, profile)?,
        })
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Playthrough {
        let tree = self.tree;
        let mut steps = Vec::new();
        let mut traces = vec![Vec::new(); tree.player_count() + 1];
        let mut cur = tree.root();
        loop {
            let node = tree.node(cur);
            match &node.kind {
                NodeKind::Terminal { rewards } => {
                    return Playthrough {
                        steps,
                        terminal: cur,
                        rewards: rewards.clone(),
                        traces,
                    };
                }
                _ => {
                    let edge = sample_index(&self.edge_probs[cur.index()], rng);
                    let info_state = node.info_state().expect("non-terminal");
                    let action_idx = tree
                        .info_state(info_state)
                        .action_index(&node.edges[edge].action)
                        .expect("edge label in info state");
                    let slot = match node.owner().expect("non-terminal") {
                        PlayerRef::Player(i) => i,
                        PlayerRef::Chance => tree.player_count(),
                    };
                    traces[slot].push((info_state, action_idx));
                    steps.push((cur, edge));
                    cur = node.edges[edge].child;
                }
            }
        }
    }
}

/// Samples a single playthrough; deterministic given `(tree, profile, rng)`.
pub fn sample_playthrough(
    tree: &GameTree,
    profile: &PolicyProfile,
    rng: &mut impl Rng,
) -> Result<Playthrough, Error> {
    Ok(Sampler::new(tree, profile)?.sample(rng))
}

fn sample_index(probs: &[f64], rng: &mut impl Rng) -> usize {
    let x: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if x < acc {
            return i;
        }
    }
    // Guard against accumulated rounding at x ~ 1; never lands on a
    // zero-probability action.
    probs
        .iter()
        .rposition(|p| *p > 0.0)
        .expect("distribution has positive mass")
}

/// A terminal history with its realization probability factored into the
/// conditioning player's own part and everyone else's.
#[derive(Clone, Debug)]
pub struct TerminalHistory {
    pub playthrough: Playthrough,
    /// η(z) = η_own · η_others
    pub eta: f64,
    pub eta_own: f64,
    pub eta_others: f64,
}

/// All root-to-leaf paths with η factored for `player`. η_own is an empty
/// product (1) on paths where the player never moves.
pub fn enumerate_terminal_histories(
    tree: &GameTree,
    profile: &PolicyProfile,
    player: PlayerRef,
) -> Result<Vec<TerminalHistory>, Error> {
    let edge_probs = resolve_edge_probs(tree, profile)?;
    let mut out = Vec::new();
    let mut path: Vec<(NodeId, usize)> = Vec::new();

    fn rec(
        tree: &GameTree,
        edge_probs: &[Vec<f64>],
        player: PlayerRef,
        cur: NodeId,
        eta_own: f64,
        eta_others: f64,
        path: &mut Vec<(NodeId, usize)>,
        out: &mut Vec<TerminalHistory>,
    ) {
        let node = tree.node(cur);
        if let NodeKind::Terminal { rewards } = &node.kind {
            let mut traces = vec![Vec::new(); tree.player_count() + 1];
            for (nid, edge) in path.iter() {
                let n = tree.node(*nid);
                let info_state = n.info_state().expect("non-terminal");
                let action_idx = tree
                    .info_state(info_state)
                    .action_index(&n.edges[*edge].action)
                    .expect("edge label in info state");
                let slot = match n.owner().expect("non-terminal") {
                    PlayerRef::Player(i) => i,
                    PlayerRef::Chance => tree.player_count(),
                };
                traces[slot].push((info_state, action_idx));
            }
            out.push(TerminalHistory {
                playthrough: Playthrough {
                    steps: path.clone(),
                    terminal: cur,
                    rewards: rewards.clone(),
                    traces,
                },
                eta: eta_own * eta_others,
                eta_own,
                eta_others,
            });
            return;
        }
        let own_move = node.owner() == Some(player);
        for (j, edge) in node.edges.iter().enumerate() {
            let p = edge_probs[cur.index()][j];
            let (own, others) = if own_move {
                (eta_own * p, eta_others)
            } else {
                (eta_own, eta_others * p)
            };
            path.push((cur, j));
            rec(tree, edge_probs, player, edge.child, own, others, path, out);
            path.pop();
        }
    }

    rec(tree, &edge_probs, player, tree.root(), 1.0, 1.0, &mut path, &mut out);
    Ok(out)
}

/// Value functions at a reachable info state: v(u) and q(u, a) on the target
/// player's reward.
#[derive(Clone, Debug)]
pub struct InfoStateValues {
    pub value: f64,
    /// Aligned with the info state's canonical action list.
    pub action_values: Vec<f64>,
}

/// Reach probabilities and value functions for one info state of the
/// conditioning player.
#[derive(Clone, Debug)]
pub struct InfoStateStats {
    pub info_state: InfoStateId,
    /// η(u): probability the info state is visited.
    pub eta: f64,
    /// ηⁱ(u): the player's own-history product (defined even when η(u) = 0).
    pub eta_own: f64,
    /// η⁻ⁱ(u) = η(u) / ηⁱ(u); 0 when ηⁱ(u) = 0 (then η(u) = 0 as well).
    pub eta_others: f64,
    /// `None` when the info state is unreachable (η(u) = 0): q and v are
    /// conditional means and have no value there.
    pub values: Option<InfoStateValues>,
}

impl InfoStateStats {
    pub fn reachable(&self) -> bool {
        self.values.is_some()
    }
}

/// Computes η(u), ηⁱ(u), η⁻ⁱ(u), v(u), and q(u, ·) for every info state owned
/// by `player`, with values taken on `target`'s reward. Output is in arena
/// order of the owned info states.
pub fn reach_and_values(
    tree: &GameTree,
    profile: &PolicyProfile,
    player: PlayerRef,
    target: usize,
) -> Result<Vec<InfoStateStats>, Error> {
    if target >= tree.player_count() {
        return Err(Error::UnknownPlayer(target.to_string()));
    }
    let edge_probs = resolve_edge_probs(tree, profile)?;

    // Pass 1: prefix reach η and the player's own-product per node.
    let n = tree.node_count();
    let mut reach = vec![0.0; n];
    let mut own_reach = vec![0.0; n];
    let mut stack = vec![(tree.root(), 1.0f64, 1.0f64)];
    while let Some((cur, eta, own)) = stack.pop() {
        reach[cur.index()] = eta;
        own_reach[cur.index()] = own;
        let node = tree.node(cur);
        let own_move = node.owner() == Some(player);
        for (j, edge) in node.edges.iter().enumerate() {
            let p = edge_probs[cur.index()][j];
            let next_own = if own_move { own * p } else { own };
            stack.push((edge.child, eta * p, next_own));
        }
    }

    // Pass 2: expected target reward of each subtree.
    let mut value = vec![0.0; n];
    fn subtree_value(
        tree: &GameTree,
        edge_probs: &[Vec<f64>],
        target: usize,
        cur: NodeId,
        value: &mut [f64],
    ) -> f64 {
        let node = tree.node(cur);
        let v = match &node.kind {
            NodeKind::Terminal { rewards } => rewards[target],
            _ => node
                .edges
                .iter()
                .enumerate()
                .map(|(j, e)| {
                    edge_probs[cur.index()][j] * subtree_value(tree, edge_probs, target, e.child, value)
                })
                .sum(),
        };
        value[cur.index()] = v;
        v
    }
    subtree_value(tree, &edge_probs, target, tree.root(), &mut value);

    let mut out = Vec::new();
    for u in tree.owned_info_states(player) {
        let is = tree.info_state(u);
        let eta: f64 = is.members.iter().map(|m| reach[m.index()]).sum();
        // Perfect recall makes the own product path-independent; members with
        // zero reach still carry the correct own product because only the
        // *other* participants' probabilities can zero the path.
        let eta_own = own_reach[is.members[0].index()];
        debug_assert!(is
            .members
            .iter()
            .all(|m| (own_reach[m.index()] - eta_own).abs() <= 1e-9 * eta_own.max(1.0)));
        let eta_others = if eta_own > 0.0 { eta / eta_own } else { 0.0 };
        let values = if eta > 0.0 {
            let action_values: Vec<f64> = (0..is.actions.len())
                .map(|a| {
                    let num: f64 = is
                        .members
                        .iter()
                        .map(|m| {
                            let edge = tree.edge_for_action(*m, a).expect("action set validated");
                            let child = tree.node(*m).edges[edge].child;
                            reach[m.index()] * value[child.index()]
                        })
                        .sum();
                    num / eta
                })
                .collect();
            let value_u: f64 = is
                .members
                .iter()
                .map(|m| reach[m.index()] * value[m.index()])
                .sum::<f64>()
                / eta;
            Some(InfoStateValues {
                value: value_u,
                action_values,
            })
        } else {
            None
        };
        out.push(InfoStateStats {
            info_state: u,
            eta,
            eta_own,
            eta_others,
            values,
        });
    }
    Ok(out)
}

/// First and second moments of the target player's reward under the subtree
/// measure, with moves pinned wherever `pin` returns an edge index.
pub(crate) fn expected_moments_pinned(
    tree: &GameTree,
    edge_probs: &[Vec<f64>],
    target: usize,
    pin: &dyn Fn(NodeId) -> Option<usize>,
) -> (f64, f64) {
    fn rec(
        tree: &GameTree,
        edge_probs: &[Vec<f64>],
        target: usize,
        pin: &dyn Fn(NodeId) -> Option<usize>,
        cur: NodeId,
    ) -> (f64, f64) {
        let node = tree.node(cur);
        match &node.kind {
            NodeKind::Terminal { rewards } => {
                let r = rewards[target];
                (r, r * r)
            }
            _ => {
                if let Some(edge) = pin(cur) {
                    return rec(tree, edge_probs, target, pin, node.edges[edge].child);
                }
                let mut m1 = 0.0;
                let mut m2 = 0.0;
                for (j, e) in node.edges.iter().enumerate() {
                    let p = edge_probs[cur.index()][j];
                    if p == 0.0 {
                        continue;
                    }
                    let (a, b) = rec(tree, edge_probs, target, pin, e.child);
                    m1 += p * a;
                    m2 += p * b;
                }
                (m1, m2)
            }
        }
    }
    rec(tree, edge_probs, target, pin, tree.root())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins::{build_figure1, build_rps};
    use crate::exec::{stream_rng, StreamDomain};
    use crate::game::GameTreeBuilder;

    #[test]
    fn sample_rewards_in_support() {
        let g = build_figure1();
        let profile = PolicyProfile::uniform(&g);
        let sampler = Sampler::new(&g, &profile).unwrap();
        let mut rng = stream_rng(7, StreamDomain::Playthrough, 0);
        for _ in 0..200 {
            let p = sampler.sample(&mut rng);
            assert!([-1.0, 0.0, 1.0].contains(&p.rewards[0]));
        }
    }

    #[test]
    fn sample_is_deterministic() {
        let g = build_figure1();
        let profile = PolicyProfile::uniform(&g);
        let mut a = stream_rng(42, StreamDomain::Playthrough, 3);
        let mut b = stream_rng(42, StreamDomain::Playthrough, 3);
        let x = sample_playthrough(&g, &profile, &mut a).unwrap();
        let y = sample_playthrough(&g, &profile, &mut b).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn degenerate_single_node_game() {
        let mut b = GameTreeBuilder::new("one", 1);
        let z = b.terminal("z", vec![5.0]);
        b.root(z);
        let g = b.build().unwrap();
        let profile = PolicyProfile::uniform(&g);
        let mut rng = stream_rng(0, StreamDomain::Playthrough, 0);
        let p = sample_playthrough(&g, &profile, &mut rng).unwrap();
        assert!(p.steps.is_empty());
        assert_eq!(p.rewards, vec![5.0]);
    }

    #[test]
    fn figure1_terminal_histories() {
        let g = build_figure1();
        let profile = PolicyProfile::uniform(&g);
        let hs = enumerate_terminal_histories(&g, &profile, PlayerRef::Player(0)).unwrap();
        assert_eq!(hs.len(), 6);
        let mut etas: Vec<f64> = hs.iter().map(|h| h.eta).collect();
        etas.sort_by(f64::total_cmp);
        assert_eq!(etas, vec![0.125, 0.125, 0.125, 0.125, 0.25, 0.25]);
        let total: f64 = hs.iter().map(|h| h.eta).sum();
        assert!((total - 1.0).abs() < 1e-12);
        for h in &hs {
            assert!((h.eta - h.eta_own * h.eta_others).abs() < 1e-12);
        }
    }

    #[test]
    fn chance_eta_factorization() {
        let g = build_figure1();
        let profile = PolicyProfile::uniform(&g);
        let hs = enumerate_terminal_histories(&g, &profile, PlayerRef::Chance).unwrap();
        // The right-right history crosses two chance nodes and no player
        // nodes: η_c = 0.25, η_{-c} = 1.
        let rr = hs
            .iter()
            .find(|h| h.playthrough.steps.len() == 2 && h.playthrough.rewards[0] == -1.0)
            .unwrap();
        assert_eq!(rr.eta_own, 0.25);
        assert_eq!(rr.eta_others, 1.0);
    }

    #[test]
    fn empty_own_product_is_one() {
        // Player 1 takes no action along the right chance branch.
        let g = build_figure1();
        let profile = PolicyProfile::uniform(&g);
        let hs = enumerate_terminal_histories(&g, &profile, PlayerRef::Player(0)).unwrap();
        for h in hs.iter().filter(|h| h.playthrough.trace(PlayerRef::Player(0)).is_empty()) {
            assert_eq!(h.eta_own, 1.0);
        }
    }

    #[test]
    fn figure1_reach_and_values_player0() {
        let g = build_figure1();
        let profile = PolicyProfile::uniform(&g);
        let stats = reach_and_values(&g, &profile, PlayerRef::Player(0), 0).unwrap();
        assert_eq!(stats.len(), 1);
        let s = &stats[0];
        assert_eq!(g.info_state(s.info_state).name, "u1");
        assert!((s.eta - 0.5).abs() < 1e-12);
        assert!((s.eta_own - 1.0).abs() < 1e-12);
        assert!((s.eta_others - 0.5).abs() < 1e-12);
        let v = s.values.as_ref().unwrap();
        assert!((v.action_values[0] + 0.5).abs() < 1e-12); // q(u1, left) = -0.5
        assert!((v.action_values[1] - 0.5).abs() < 1e-12); // q(u1, right) = 0.5
        assert!(v.value.abs() < 1e-12);
    }

    #[test]
    fn figure1_reach_and_values_chance() {
        let g = build_figure1();
        let profile = PolicyProfile::uniform(&g);
        let stats = reach_and_values(&g, &profile, PlayerRef::Chance, 0).unwrap();
        assert_eq!(stats.len(), 2);
        let c1 = stats
            .iter()
            .find(|s| g.info_state(s.info_state).name == "c1")
            .unwrap();
        assert!((c1.eta - 0.5).abs() < 1e-12);
        assert!((c1.eta_others - 1.0).abs() < 1e-12);
        let v = c1.values.as_ref().unwrap();
        assert!((v.action_values[0] - 1.0).abs() < 1e-12);
        assert!((v.action_values[1] + 1.0).abs() < 1e-12);
        assert!(v.value.abs() < 1e-12);
    }

    #[test]
    fn single_action_value_equals_q() {
        let mut b = GameTreeBuilder::new("line", 1);
        let d = b.decision("d", 0, "only");
        let z = b.terminal("z", vec![3.0]);
        b.edge(d, "go", z);
        b.root(d);
        let g = b.build().unwrap();
        let profile = PolicyProfile::uniform(&g);
        let stats = reach_and_values(&g, &profile, PlayerRef::Player(0), 0).unwrap();
        let v = stats[0].values.as_ref().unwrap();
        assert_eq!(v.value, v.action_values[0]);
    }

    #[test]
    fn value_mixture_identity() {
        // v(u) = Σ_a q(u,a) π(a|u) on a nontrivial game.
        let g = build_rps();
        let profile = PolicyProfile::uniform(&g);
        for player in [PlayerRef::Player(0), PlayerRef::Player(1)] {
            for s in reach_and_values(&g, &profile, player, 0).unwrap() {
                let is = g.info_state(s.info_state);
                if let Some(v) = &s.values {
                    let pi = profile
                        .policy(match player {
                            PlayerRef::Player(i) => i,
                            _ => unreachable!(),
                        })
                        .probs(s.info_state)
                        .unwrap();
                    let mix: f64 = v
                        .action_values
                        .iter()
                        .zip(pi)
                        .map(|(q, p)| q * p)
                        .sum();
                    assert!((mix - v.value).abs() < 1e-9, "at {}", is.name);
                }
            }
        }
    }
}
