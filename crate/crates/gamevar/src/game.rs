//! Finite extensive-form games with chance.
//!
//! A [`GameTree`] is an arena of decision, chance, and terminal nodes.
//! Decision nodes are grouped into information states ([`InfoState`]); every
//! chance node forms its own singleton information state owned by the chance
//! player. Trees are immutable after construction and safe to share across
//! threads.

use std::collections::HashMap;
use std::fmt;

use crate::error::Error;

/// Tolerance for probability distributions on input; distributions are
/// renormalized exactly after validation.
pub const PROB_TOLERANCE: f64 = 1e-12;

/// A player: either the chance player or a seat index in `[0, player_count)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PlayerRef {
    Chance,
    Player(usize),
}

impl PlayerRef {
    /// Parses `"chance"` or a seat index.
    pub fn parse(s: &str) -> Result<PlayerRef, Error> {
        if s.eq_ignore_ascii_case("chance") {
            Ok(PlayerRef::Chance)
        } else {
            s.parse::<usize>()
                .map(PlayerRef::Player)
                .map_err(|_| Error::UnknownPlayer(s.to_string()))
        }
    }
}

impl fmt::Display for PlayerRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlayerRef::Chance => write!(f, "chance"),
            PlayerRef::Player(i) => write!(f, "player {i}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InfoStateId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl InfoStateId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// An outgoing edge: the action label and the child it leads to.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub action: String,
    pub child: NodeId,
}

#[derive(Clone, Debug, PartialEq)]
pub enum NodeKind {
    Decision {
        owner: usize,
        info_state: InfoStateId,
    },
    /// Chance node; `probs` is aligned with the node's edges.
    Chance {
        info_state: InfoStateId,
        probs: Vec<f64>,
    },
    Terminal {
        rewards: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub name: String,
    pub kind: NodeKind,
    pub edges: Vec<Edge>,
}

impl Node {
    pub fn is_terminal(&self) -> bool {
        matches!(self.kind, NodeKind::Terminal { .. })
    }

    /// Owner of this node's move, if it has one.
    pub fn owner(&self) -> Option<PlayerRef> {
        match self.kind {
            NodeKind::Decision { owner, .. } => Some(PlayerRef::Player(owner)),
            NodeKind::Chance { .. } => Some(PlayerRef::Chance),
            NodeKind::Terminal { .. } => None,
        }
    }

    pub fn info_state(&self) -> Option<InfoStateId> {
        match self.kind {
            NodeKind::Decision { info_state, .. } | NodeKind::Chance { info_state, .. } => {
                Some(info_state)
            }
            NodeKind::Terminal { .. } => None,
        }
    }
}

/// A set of indistinguishable decision nodes sharing one owner and one action
/// list, or the singleton set of a single chance node.
#[derive(Clone, Debug, PartialEq)]
pub struct InfoState {
    pub name: String,
    pub owner: PlayerRef,
    pub members: Vec<NodeId>,
    /// Canonical action order: the edge order of the lowest-id member node.
    pub actions: Vec<String>,
}

impl InfoState {
    pub fn action_index(&self, label: &str) -> Option<usize> {
        self.actions.iter().position(|a| a == label)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagnosticKind {
    Structure,
    Actions,
    Rewards,
    ChanceDistribution,
    InfoStateConsistency,
    PerfectRecall,
}

/// One violated invariant, naming the offending nodes and info states.
#[derive(Clone, Debug)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
    pub nodes: Vec<NodeId>,
    pub info_states: Vec<InfoStateId>,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.message)
    }
}

/// A finite extensive-form game.
#[derive(Clone, Debug, PartialEq)]
pub struct GameTree {
    name: String,
    player_count: usize,
    nodes: Vec<Node>,
    info_states: Vec<InfoState>,
    root: NodeId,
    /// `(parent, edge index)` per node; `None` for the root. Meaningful only
    /// when the node graph is a tree (checked by [`GameTree::validate`]).
    parents: Vec<Option<(NodeId, usize)>>,
}

impl GameTree {
    /// Assembles a tree from raw parts, checking only that identifiers are in
    /// range. Semantic invariants are reported by [`GameTree::validate`];
    /// builders and the parser reject trees with nonempty diagnostics.
    pub fn from_parts(
        name: impl Into<String>,
        player_count: usize,
        nodes: Vec<Node>,
        info_states: Vec<InfoState>,
        root: NodeId,
    ) -> Result<GameTree, Error> {
        if player_count == 0 {
            return Err(Error::InvalidParameter("player count must be >= 1".into()));
        }
        if nodes.is_empty() {
            return Err(Error::InvalidGame("game has no nodes".into()));
        }
        if root.0 >= nodes.len() {
            return Err(Error::UnknownNode(format!("root #{}", root.0)));
        }
        for node in &nodes {
            for edge in &node.edges {
                if edge.child.0 >= nodes.len() {
                    return Err(Error::UnknownNode(format!(
                        "edge target #{} from `{}`",
                        edge.child.0, node.name
                    )));
                }
            }
            match &node.kind {
                NodeKind::Decision { owner, info_state } => {
                    if *owner >= player_count {
                        return Err(Error::UnknownPlayer(owner.to_string()));
                    }
                    if info_state.0 >= info_states.len() {
                        return Err(Error::UnknownInfoState(format!("#{}", info_state.0)));
                    }
                }
                NodeKind::Chance { info_state, .. } => {
                    if info_state.0 >= info_states.len() {
                        return Err(Error::UnknownInfoState(format!("#{}", info_state.0)));
                    }
                }
                NodeKind::Terminal { .. } => {}
            }
        }
        for is in &info_states {
            for m in &is.members {
                if m.0 >= nodes.len() {
                    return Err(Error::UnknownNode(format!("member #{}", m.0)));
                }
            }
            if let PlayerRef::Player(i) = is.owner {
                if i >= player_count {
                    return Err(Error::UnknownPlayer(i.to_string()));
                }
            }
        }

        let mut parents = vec![None; nodes.len()];
        for (id, node) in nodes.iter().enumerate() {
            for (j, edge) in node.edges.iter().enumerate() {
                if parents[edge.child.0].is_none() {
                    parents[edge.child.0] = Some((NodeId(id), j));
                }
            }
        }

        Ok(GameTree {
            name: name.into(),
            player_count,
            nodes,
            info_states,
            root,
            parents,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn player_count(&self) -> usize {
        self.player_count
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &Node)> {
        self.nodes.iter().enumerate().map(|(i, n)| (NodeId(i), n))
    }

    pub fn info_state(&self, id: InfoStateId) -> &InfoState {
        &self.info_states[id.0]
    }

    pub fn info_states(&self) -> impl Iterator<Item = (InfoStateId, &InfoState)> {
        self.info_states
            .iter()
            .enumerate()
            .map(|(i, s)| (InfoStateId(i), s))
    }

    pub fn info_state_by_name(&self, name: &str) -> Option<InfoStateId> {
        self.info_states
            .iter()
            .position(|s| s.name == name)
            .map(InfoStateId)
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.name == name).map(NodeId)
    }

    /// Parent link `(parent, edge index)`, `None` for the root.
    pub fn parent(&self, id: NodeId) -> Option<(NodeId, usize)> {
        self.parents[id.0]
    }

    /// Info states owned by `player`, in arena order.
    pub fn owned_info_states(&self, player: PlayerRef) -> Vec<InfoStateId> {
        self.info_states
            .iter()
            .enumerate()
            .filter(|(_, s)| s.owner == player)
            .map(|(i, _)| InfoStateId(i))
            .collect()
    }

    pub fn chance_nodes(&self) -> Vec<NodeId> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| matches!(n.kind, NodeKind::Chance { .. }))
            .map(|(i, _)| NodeId(i))
            .collect()
    }

    /// Edge index realizing canonical action `action_idx` of the node's info
    /// state at this particular node (member nodes may order edges
    /// differently).
    pub fn edge_for_action(&self, node: NodeId, action_idx: usize) -> Option<usize> {
        let n = &self.nodes[node.0];
        let is = n.info_state()?;
        let label = self.info_states[is.0].actions.get(action_idx)?;
        n.edges.iter().position(|e| &e.action == label)
    }

    /// The owner-visible history of `(info state, canonical action index)`
    /// pairs for `owner` along the root path to `node`, excluding `node`'s own
    /// move. Requires a validated tree.
    pub fn history_for_owner(&self, node: NodeId, owner: PlayerRef) -> Vec<(InfoStateId, usize)> {
        let mut rev = Vec::new();
        let mut cur = node;
        while let Some((parent, edge_idx)) = self.parents[cur.0] {
            let pn = &self.nodes[parent.0];
            if pn.owner() == Some(owner) {
                let is = pn.info_state().expect("non-terminal parent");
                let label = &pn.edges[edge_idx].action;
                let idx = self.info_states[is.0]
                    .action_index(label)
                    .expect("edge label present in info state");
                rev.push((is, idx));
            }
            cur = parent;
        }
        rev.reverse();
        rev
    }

    /// Per-player and chance histories along the root path to `node`.
    pub fn owner_history(&self, node: NodeId) -> Result<OwnerHistories, Error> {
        if node.0 >= self.nodes.len() {
            return Err(Error::UnknownNode(format!("#{}", node.0)));
        }
        let players = (0..self.player_count)
            .map(|i| self.history_for_owner(node, PlayerRef::Player(i)))
            .collect();
        let chance = self.history_for_owner(node, PlayerRef::Chance);
        Ok(OwnerHistories { players, chance })
    }

    /// The (unique, by perfect recall) own-history of an info state, read off
    /// its first member node.
    pub fn own_history_of_info_state(&self, u: InfoStateId) -> Vec<(InfoStateId, usize)> {
        let is = &self.info_states[u.0];
        self.history_for_owner(is.members[0], is.owner)
    }

    /// Checks every structural invariant; an empty result means the tree is
    /// valid. Traversal-based checks are skipped when the node graph is not a
    /// rooted tree, since they would not terminate.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut diags = Vec::new();
        self.check_structure(&mut diags);
        if diags.is_empty() {
            self.check_nodes(&mut diags);
            self.check_info_states(&mut diags);
        }
        if diags.is_empty() {
            self.check_perfect_recall(&mut diags);
        }
        diags
    }

    fn check_structure(&self, diags: &mut Vec<Diagnostic>) {
        let mut in_degree = vec![0usize; self.nodes.len()];
        for node in &self.nodes {
            for edge in &node.edges {
                in_degree[edge.child.0] += 1;
            }
        }
        if in_degree[self.root.0] != 0 {
            diags.push(Diagnostic {
                kind: DiagnosticKind::Structure,
                message: format!("root `{}` has an incoming edge", self.nodes[self.root.0].name),
                nodes: vec![self.root],
                info_states: vec![],
            });
        }
        for (i, deg) in in_degree.iter().enumerate() {
            if i != self.root.0 && *deg != 1 {
                diags.push(Diagnostic {
                    kind: DiagnosticKind::Structure,
                    message: format!(
                        "node `{}` has {} parents, expected 1",
                        self.nodes[i].name, deg
                    ),
                    nodes: vec![NodeId(i)],
                    info_states: vec![],
                });
            }
        }
        // Reachability; in-degree <= 1 everywhere means no node is visited
        // twice, so a plain stack walk terminates.
        if diags.is_empty() {
            let mut seen = vec![false; self.nodes.len()];
            let mut stack = vec![self.root];
            while let Some(id) = stack.pop() {
                if seen[id.0] {
                    continue;
                }
                seen[id.0] = true;
                for edge in &self.nodes[id.0].edges {
                    stack.push(edge.child);
                }
            }
            for (i, s) in seen.iter().enumerate() {
                if !s {
                    diags.push(Diagnostic {
                        kind: DiagnosticKind::Structure,
                        message: format!("node `{}` is unreachable from the root", self.nodes[i].name),
                        nodes: vec![NodeId(i)],
                        info_states: vec![],
                    });
                }
            }
        }
    }

    fn check_nodes(&self, diags: &mut Vec<Diagnostic>) {
        for (i, node) in self.nodes.iter().enumerate() {
            let id = NodeId(i);
            match &node.kind {
                NodeKind::Terminal { rewards } => {
                    if !node.edges.is_empty() {
                        diags.push(Diagnostic {
                            kind: DiagnosticKind::Actions,
                            message: format!("terminal `{}` has outgoing edges", node.name),
                            nodes: vec![id],
                            info_states: vec![],
                        });
                    }
                    if rewards.len() != self.player_count {
                        diags.push(Diagnostic {
                            kind: DiagnosticKind::Rewards,
                            message: format!(
                                "terminal `{}` has {} rewards, expected {}",
                                node.name,
                                rewards.len(),
                                self.player_count
                            ),
                            nodes: vec![id],
                            info_states: vec![],
                        });
                    }
                    if rewards.iter().any(|r| !r.is_finite()) {
                        diags.push(Diagnostic {
                            kind: DiagnosticKind::Rewards,
                            message: format!("terminal `{}` has a non-finite reward", node.name),
                            nodes: vec![id],
                            info_states: vec![],
                        });
                    }
                }
                kind => {
                    if node.edges.is_empty() {
                        diags.push(Diagnostic {
                            kind: DiagnosticKind::Actions,
                            message: format!("non-terminal `{}` has no edges", node.name),
                            nodes: vec![id],
                            info_states: vec![],
                        });
                    }
                    for (j, e) in node.edges.iter().enumerate() {
                        if node.edges[..j].iter().any(|f| f.action == e.action) {
                            diags.push(Diagnostic {
                                kind: DiagnosticKind::Actions,
                                message: format!(
                                    "node `{}` has duplicate action label `{}`",
                                    node.name, e.action
                                ),
                                nodes: vec![id],
                                info_states: vec![],
                            });
                        }
                    }
                    if let NodeKind::Chance { probs, .. } = kind {
                        if probs.len() != node.edges.len() {
                            diags.push(Diagnostic {
                                kind: DiagnosticKind::ChanceDistribution,
                                message: format!(
                                    "chance `{}` has {} probabilities for {} edges",
                                    node.name,
                                    probs.len(),
                                    node.edges.len()
                                ),
                                nodes: vec![id],
                                info_states: vec![],
                            });
                        } else {
                            check_distribution(&node.name, probs, DiagnosticKind::ChanceDistribution, id, diags);
                        }
                    }
                }
            }
        }
    }

    fn check_info_states(&self, diags: &mut Vec<Diagnostic>) {
        // Every decision/chance node must be listed by exactly the info state
        // it references.
        let mut membership = vec![0usize; self.nodes.len()];
        for (si, is) in self.info_states.iter().enumerate() {
            let sid = InfoStateId(si);
            if is.members.is_empty() {
                diags.push(Diagnostic {
                    kind: DiagnosticKind::InfoStateConsistency,
                    message: format!("info state `{}` has no members", is.name),
                    nodes: vec![],
                    info_states: vec![sid],
                });
                continue;
            }
            for m in &is.members {
                membership[m.0] += 1;
                let node = &self.nodes[m.0];
                match (&node.kind, is.owner) {
                    (NodeKind::Decision { owner, info_state }, PlayerRef::Player(p)) => {
                        if *owner != p || *info_state != sid {
                            diags.push(Diagnostic {
                                kind: DiagnosticKind::InfoStateConsistency,
                                message: format!(
                                    "node `{}` does not belong to info state `{}`",
                                    node.name, is.name
                                ),
                                nodes: vec![*m],
                                info_states: vec![sid],
                            });
                        }
                    }
                    (NodeKind::Chance { info_state, .. }, PlayerRef::Chance) => {
                        if *info_state != sid || is.members.len() != 1 {
                            diags.push(Diagnostic {
                                kind: DiagnosticKind::InfoStateConsistency,
                                message: format!(
                                    "chance node `{}` must form its own singleton info state",
                                    node.name
                                ),
                                nodes: vec![*m],
                                info_states: vec![sid],
                            });
                        }
                    }
                    _ => {
                        diags.push(Diagnostic {
                            kind: DiagnosticKind::InfoStateConsistency,
                            message: format!(
                                "node `{}` has the wrong kind or owner for info state `{}`",
                                node.name, is.name
                            ),
                            nodes: vec![*m],
                            info_states: vec![sid],
                        });
                    }
                }
                // Same action set at every member (canonical order may differ
                // per node; labels must match as a set).
                let mut labels: Vec<&str> = node.edges.iter().map(|e| e.action.as_str()).collect();
                labels.sort_unstable();
                let mut canonical: Vec<&str> = is.actions.iter().map(String::as_str).collect();
                canonical.sort_unstable();
                if labels != canonical {
                    diags.push(Diagnostic {
                        kind: DiagnosticKind::InfoStateConsistency,
                        message: format!(
                            "node `{}` has action set {{{}}} but info state `{}` declares {{{}}}",
                            node.name,
                            labels.join(", "),
                            is.name,
                            canonical.join(", ")
                        ),
                        nodes: vec![*m],
                        info_states: vec![sid],
                    });
                }
            }
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if node.info_state().is_some() && membership[i] != 1 {
                diags.push(Diagnostic {
                    kind: DiagnosticKind::InfoStateConsistency,
                    message: format!(
                        "node `{}` is listed by {} info states, expected 1",
                        node.name, membership[i]
                    ),
                    nodes: vec![NodeId(i)],
                    info_states: vec![],
                });
            }
        }
    }

    fn check_perfect_recall(&self, diags: &mut Vec<Diagnostic>) {
        for (si, is) in self.info_states.iter().enumerate() {
            if is.members.len() < 2 {
                continue;
            }
            let reference = self.history_for_owner(is.members[0], is.owner);
            for m in &is.members[1..] {
                let history = self.history_for_owner(*m, is.owner);
                if history != reference {
                    diags.push(Diagnostic {
                        kind: DiagnosticKind::PerfectRecall,
                        message: format!(
                            "members `{}` and `{}` of info state `{}` have different owner-visible histories",
                            self.nodes[is.members[0].0].name,
                            self.nodes[m.0].name,
                            is.name
                        ),
                        nodes: vec![is.members[0], *m],
                        info_states: vec![InfoStateId(si)],
                    });
                }
            }
        }
    }

    /// Divides every chance distribution by its sum. Called by builders and
    /// the parser once validation has passed the 1e-12 gate. Distributions
    /// already normalized to working precision are left untouched, which
    /// makes the operation idempotent and text round-trips exact.
    pub(crate) fn renormalize(&mut self) {
        for node in &mut self.nodes {
            if let NodeKind::Chance { probs, .. } = &mut node.kind {
                renormalize_dist(probs);
            }
        }
    }

    /// True when every terminal's rewards sum to zero within `tol`.
    pub fn is_zero_sum(&self, tol: f64) -> bool {
        self.nodes.iter().all(|n| match &n.kind {
            NodeKind::Terminal { rewards } => rewards.iter().sum::<f64>().abs() <= tol,
            _ => true,
        })
    }

    /// Copy of the tree with `f` applied to every reward of `player`.
    pub fn with_mapped_rewards(&self, player: usize, f: impl Fn(f64) -> f64) -> GameTree {
        let mut tree = self.clone();
        for node in &mut tree.nodes {
            if let NodeKind::Terminal { rewards } = &mut node.kind {
                if let Some(r) = rewards.get_mut(player) {
                    *r = f(*r);
                }
            }
        }
        tree
    }
}

/// Per-owner histories returned by [`GameTree::owner_history`].
#[derive(Clone, Debug, PartialEq)]
pub struct OwnerHistories {
    pub players: Vec<Vec<(InfoStateId, usize)>>,
    pub chance: Vec<(InfoStateId, usize)>,
}

impl OwnerHistories {
    pub fn for_player(&self, p: PlayerRef) -> &[(InfoStateId, usize)] {
        match p {
            PlayerRef::Chance => &self.chance,
            PlayerRef::Player(i) => &self.players[i],
        }
    }
}

/// Divide by the sum unless the residual is already at the rounding floor;
/// re-dividing near-normalized values dithers by an ulp per pass and would
/// break parse/serialize idempotence.
pub(crate) fn renormalize_dist(probs: &mut [f64]) {
    let sum: f64 = probs.iter().sum();
    if sum > 0.0 && (sum - 1.0).abs() > 1e-14 {
        for p in probs.iter_mut() {
            *p /= sum;
        }
    }
}

pub(crate) fn check_distribution(
    at: &str,
    probs: &[f64],
    kind: DiagnosticKind,
    node: NodeId,
    diags: &mut Vec<Diagnostic>,
) {
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        diags.push(Diagnostic {
            kind,
            message: format!("`{at}` has a negative or non-finite probability"),
            nodes: vec![node],
            info_states: vec![],
        });
        return;
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > PROB_TOLERANCE {
        diags.push(Diagnostic {
            kind,
            message: format!("`{at}` probabilities sum to {sum}, expected 1 within 1e-12"),
            nodes: vec![node],
            info_states: vec![],
        });
    }
}

/// Incremental construction of a [`GameTree`]; `build` assembles info states,
/// validates, and renormalizes.
pub struct GameTreeBuilder {
    name: String,
    player_count: usize,
    nodes: Vec<BuilderNode>,
    root: Option<usize>,
}

enum BuilderKind {
    Decision { owner: usize, info_set: String },
    Chance { probs: Vec<f64> },
    Terminal { rewards: Vec<f64> },
}

struct BuilderNode {
    name: String,
    kind: BuilderKind,
    edges: Vec<(String, usize)>,
}

impl GameTreeBuilder {
    pub fn new(name: impl Into<String>, player_count: usize) -> Self {
        GameTreeBuilder {
            name: name.into(),
            player_count,
            nodes: Vec::new(),
            root: None,
        }
    }

    pub fn decision(
        &mut self,
        name: impl Into<String>,
        owner: usize,
        info_set: impl Into<String>,
    ) -> NodeId {
        self.push(name, BuilderKind::Decision {
            owner,
            info_set: info_set.into(),
        })
    }

    pub fn chance(&mut self, name: impl Into<String>) -> NodeId {
        self.push(name, BuilderKind::Chance { probs: Vec::new() })
    }

    pub fn terminal(&mut self, name: impl Into<String>, rewards: Vec<f64>) -> NodeId {
        self.push(name, BuilderKind::Terminal { rewards })
    }

    fn push(&mut self, name: impl Into<String>, kind: BuilderKind) -> NodeId {
        self.nodes.push(BuilderNode {
            name: name.into(),
            kind,
            edges: Vec::new(),
        });
        NodeId(self.nodes.len() - 1)
    }

    pub fn edge(&mut self, parent: NodeId, action: impl Into<String>, child: NodeId) {
        self.nodes[parent.0].edges.push((action.into(), child.0));
    }

    pub fn chance_edge(&mut self, parent: NodeId, action: impl Into<String>, prob: f64, child: NodeId) {
        if let BuilderKind::Chance { probs } = &mut self.nodes[parent.0].kind {
            probs.push(prob);
        }
        self.edge(parent, action, child);
    }

    pub fn root(&mut self, id: NodeId) {
        self.root = Some(id.0);
    }

    pub fn build(self) -> Result<GameTree, Error> {
        let root = NodeId(
            self.root
                .ok_or_else(|| Error::InvalidGame("no root set".into()))?,
        );
        // Info-state arena: decision info sets in first-mention order, then a
        // singleton per chance node.
        let mut info_ids: HashMap<String, usize> = HashMap::new();
        let mut info_states: Vec<InfoState> = Vec::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if let BuilderKind::Decision { owner, info_set } = &n.kind {
                let next = info_states.len();
                let id = *info_ids.entry(info_set.clone()).or_insert(next);
                if id == next {
                    info_states.push(InfoState {
                        name: info_set.clone(),
                        owner: PlayerRef::Player(*owner),
                        members: Vec::new(),
                        actions: Vec::new(),
                    });
                }
                info_states[id].members.push(NodeId(i));
            }
        }
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for (i, n) in self.nodes.into_iter().enumerate() {
            let edges: Vec<Edge> = n
                .edges
                .into_iter()
                .map(|(a, c)| Edge {
                    action: a,
                    child: NodeId(c),
                })
                .collect();
            let kind = match n.kind {
                BuilderKind::Decision { owner, info_set } => NodeKind::Decision {
                    owner,
                    info_state: InfoStateId(info_ids[&info_set]),
                },
                BuilderKind::Chance { probs } => {
                    let id = info_states.len();
                    info_states.push(InfoState {
                        name: n.name.clone(),
                        owner: PlayerRef::Chance,
                        members: vec![NodeId(i)],
                        actions: edges.iter().map(|e| e.action.clone()).collect(),
                    });
                    NodeKind::Chance {
                        info_state: InfoStateId(id),
                        probs,
                    }
                }
                BuilderKind::Terminal { rewards } => NodeKind::Terminal { rewards },
            };
            nodes.push(Node {
                name: n.name,
                kind,
                edges,
            });
        }
        // Canonical action order: edge order of the lowest-id member.
        for is in &mut info_states {
            if is.owner != PlayerRef::Chance {
                let first = is.members.iter().min().expect("nonempty members");
                is.actions = nodes[first.0].edges.iter().map(|e| e.action.clone()).collect();
            }
        }
        let mut tree = GameTree::from_parts(self.name, self.player_count, nodes, info_states, root)?;
        let diags = tree.validate();
        if let Some(d) = diags.first() {
            return Err(Error::InvalidGame(d.to_string()));
        }
        tree.renormalize();
        Ok(tree)
    }
}
