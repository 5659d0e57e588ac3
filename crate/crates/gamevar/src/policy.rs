//! Behavioral policies: independent per-information-state action
//! distributions.

use std::collections::HashMap;

use crate::error::Error;
use crate::game::{GameTree, InfoStateId, NodeKind, PlayerRef, PROB_TOLERANCE};

/// A behavioral policy for one player: a distribution over the canonical
/// action list of every info state the player owns.
#[derive(Clone, Debug, PartialEq)]
pub struct BehavioralPolicy {
    owner: PlayerRef,
    probs: HashMap<InfoStateId, Vec<f64>>,
}

impl BehavioralPolicy {
    /// Validates coverage and normalization (within 1e-12), then renormalizes
    /// each distribution exactly.
    pub fn new(
        tree: &GameTree,
        owner: PlayerRef,
        mut probs: HashMap<InfoStateId, Vec<f64>>,
    ) -> Result<Self, Error> {
        if let PlayerRef::Player(i) = owner {
            if i >= tree.player_count() {
                return Err(Error::UnknownPlayer(i.to_string()));
            }
        }
        let owned = tree.owned_info_states(owner);
        for u in &owned {
            let is = tree.info_state(*u);
            let dist = probs.get(u).ok_or_else(|| Error::PolicyCoverage {
                player: owner.to_string(),
                info_state: is.name.clone(),
            })?;
            if dist.len() != is.actions.len() {
                return Err(Error::InvalidParameter(format!(
                    "distribution at `{}` has {} entries for {} actions",
                    is.name,
                    dist.len(),
                    is.actions.len()
                )));
            }
            if let Some(p) = dist.iter().find(|p| !p.is_finite() || **p < 0.0) {
                return Err(Error::NegativeProbability {
                    at: is.name.clone(),
                    prob: *p,
                });
            }
            let sum: f64 = dist.iter().sum();
            if (sum - 1.0).abs() > PROB_TOLERANCE {
                return Err(Error::NotNormalized {
                    at: is.name.clone(),
                    sum,
                });
            }
        }
        for u in probs.keys() {
            if u.index() >= tree.info_states().count() || tree.info_state(*u).owner != owner {
                return Err(Error::UnknownInfoState(format!("#{}", u.index())));
            }
        }
        for dist in probs.values_mut() {
            crate::game::renormalize_dist(dist);
        }
        Ok(BehavioralPolicy { owner, probs })
    }

    /// Uniform policy over every owned info state.
    pub fn uniform(tree: &GameTree, owner: PlayerRef) -> Self {
        let probs = tree
            .owned_info_states(owner)
            .into_iter()
            .map(|u| {
                let k = tree.info_state(u).actions.len();
                (u, vec![1.0 / k as f64; k])
            })
            .collect();
        BehavioralPolicy { owner, probs }
    }

    pub fn owner(&self) -> PlayerRef {
        self.owner
    }

    pub fn probs(&self, u: InfoStateId) -> Option<&[f64]> {
        self.probs.get(&u).map(Vec::as_slice)
    }

    /// πⁱ(u): the product of this player's own action probabilities along the
    /// (unique, by perfect recall) own-history of `u`.
    pub fn own_reach(&self, tree: &GameTree, u: InfoStateId) -> f64 {
        tree.own_history_of_info_state(u)
            .iter()
            .map(|(h, a)| self.probs(*h).map_or(0.0, |d| d[*a]))
            .product()
    }
}

/// One behavioral policy per non-chance player; the chance policy is part of
/// the game itself.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyProfile {
    policies: Vec<BehavioralPolicy>,
}

impl PolicyProfile {
    pub fn new(tree: &GameTree, policies: Vec<BehavioralPolicy>) -> Result<Self, Error> {
        if policies.len() != tree.player_count() {
            return Err(Error::InvalidParameter(format!(
                "profile has {} policies for {} players",
                policies.len(),
                tree.player_count()
            )));
        }
        for (i, p) in policies.iter().enumerate() {
            if p.owner() != PlayerRef::Player(i) {
                return Err(Error::InvalidParameter(format!(
                    "policy {i} is owned by {}",
                    p.owner()
                )));
            }
        }
        Ok(PolicyProfile { policies })
    }

    pub fn uniform(tree: &GameTree) -> Self {
        PolicyProfile {
            policies: (0..tree.player_count())
                .map(|i| BehavioralPolicy::uniform(tree, PlayerRef::Player(i)))
                .collect(),
        }
    }

    pub fn policy(&self, player: usize) -> &BehavioralPolicy {
        &self.policies[player]
    }

    pub fn policies(&self) -> &[BehavioralPolicy] {
        &self.policies
    }
}

/// The chance "policy" read off the tree's chance distributions, as a
/// [`BehavioralPolicy`] owned by [`PlayerRef::Chance`].
pub fn chance_policy(tree: &GameTree) -> BehavioralPolicy {
    let mut probs = HashMap::new();
    for (_, node) in tree.nodes() {
        if let NodeKind::Chance { info_state, probs: p } = &node.kind {
            probs.insert(*info_state, p.clone());
        }
    }
    BehavioralPolicy {
        owner: PlayerRef::Chance,
        probs,
    }
}

/// The action distribution player `player` (or chance) uses, per owned info
/// state.
pub fn policy_for(tree: &GameTree, profile: &PolicyProfile, player: PlayerRef) -> BehavioralPolicy {
    match player {
        PlayerRef::Chance => chance_policy(tree),
        PlayerRef::Player(i) => profile.policy(i).clone(),
    }
}

/// Per-node action probabilities in *edge* order, resolving each decision
/// node's policy through its info state's canonical action order. Terminals
/// get an empty vector.
pub(crate) fn resolve_edge_probs(tree: &GameTree, profile: &PolicyProfile) -> Result<Vec<Vec<f64>>, Error> {
    let mut out = Vec::with_capacity(tree.node_count());
    for (id, node) in tree.nodes() {
        let probs = match &node.kind {
            NodeKind::Terminal { .. } => Vec::new(),
            NodeKind::Chance { probs, .. } => probs.clone(),
            NodeKind::Decision { owner, info_state } => {
                let is = tree.info_state(*info_state);
                let dist = profile
                    .policy(*owner)
                    .probs(*info_state)
                    .ok_or_else(|| Error::PolicyCoverage {
                        player: PlayerRef::Player(*owner).to_string(),
                        info_state: is.name.clone(),
                    })?;
                node.edges
                    .iter()
                    .map(|e| {
                        is.action_index(&e.action)
                            .map(|i| dist[i])
                            .ok_or_else(|| Error::UnknownAction {
                                info_state: is.name.clone(),
                                action: e.action.clone(),
                            })
                    })
                    .collect::<Result<Vec<f64>, Error>>()?
            }
        };
        debug_assert_eq!(probs.len(), tree.node(id).edges.len());
        out.push(probs);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins::build_figure1;

    #[test]
    fn uniform_covers_everything() {
        let g = build_figure1();
        let p = PolicyProfile::uniform(&g);
        for i in 0..g.player_count() {
            for u in g.owned_info_states(PlayerRef::Player(i)) {
                let d = p.policy(i).probs(u).unwrap();
                assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn rejects_uncovered_info_state() {
        let g = build_figure1();
        let err = BehavioralPolicy::new(&g, PlayerRef::Player(0), HashMap::new()).unwrap_err();
        assert!(matches!(err, Error::PolicyCoverage { .. }));
    }

    #[test]
    fn rejects_bad_sum() {
        let g = build_figure1();
        let u1 = g.info_state_by_name("u1").unwrap();
        let mut probs = HashMap::new();
        probs.insert(u1, vec![0.7, 0.7]);
        let err = BehavioralPolicy::new(&g, PlayerRef::Player(0), probs).unwrap_err();
        assert!(matches!(err, Error::NotNormalized { .. }));
    }

    #[test]
    fn chance_policy_reads_tree() {
        let g = build_figure1();
        let cp = chance_policy(&g);
        assert_eq!(cp.owner(), PlayerRef::Chance);
        assert_eq!(g.owned_info_states(PlayerRef::Chance).len(), 2);
        for u in g.owned_info_states(PlayerRef::Chance) {
            assert_eq!(cp.probs(u).unwrap(), &[0.5, 0.5]);
        }
    }
}
