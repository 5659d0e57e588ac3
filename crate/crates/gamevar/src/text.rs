//! Line-oriented text formats for games, policies, and policy populations.
//!
//! Game documents:
//!
//! ```text
//! game "<name>" players <n>
//! node <id> player <p> infoset <iset>
//! chance <id> <action>:<prob> ...
//! leaf <id> <r1> ... <rn>
//! edge <parent> <action> <child>
//! root <id>
//! ```
//!
//! `#` starts a comment, identifiers are whitespace-free tokens, and the
//! canonical serialization (declaration order, probabilities with 17
//! significant digits) round-trips byte for byte.

use std::collections::HashMap;
use std::fmt;

use crate::exact::{RatedMember, RatedPopulation};
use crate::game::{Edge, GameTree, InfoState, InfoStateId, Node, NodeId, NodeKind, PlayerRef, PROB_TOLERANCE};
use crate::policy::BehavioralPolicy;

/// A located parse failure. Semantic errors point at the offending
/// declaration; document-level problems point at the end of the input.
#[derive(Debug, Clone)]
pub struct ParseError {
    pub line: usize,
    pub col: Option<usize>,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            col: None,
            message: message.into(),
        }
    }

    fn at(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            col: Some(col),
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.col {
            Some(c) => write!(f, "line {}, col {}: {}", self.line, c, self.message),
            None => write!(f, "line {}: {}", self.line, self.message),
        }
    }
}

impl std::error::Error for ParseError {}

/// Probabilities are rendered with 17 significant digits so canonical
/// documents reproduce every f64 bit pattern.
fn fmt_prob(p: f64) -> String {
    format!("{:.16e}", p)
}

fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_f64(line: usize, col: usize, tok: &str, what: &str) -> Result<f64, ParseError> {
    let v: f64 = tok
        .parse()
        .map_err(|_| ParseError::at(line, col, format!("invalid {what} `{tok}`")))?;
    if !v.is_finite() {
        return Err(ParseError::at(line, col, format!("non-finite {what} `{tok}`")));
    }
    Ok(v)
}

enum ProtoKind {
    Decision { player: usize, info_set: String },
    Chance { dist: Vec<(String, f64)> },
    Leaf { rewards: Vec<f64> },
}

struct ProtoNode {
    name: String,
    line: usize,
    kind: ProtoKind,
    edges: Vec<(String, usize)>, // (action, child arena index)
}

/// Parses a game document and validates it; the returned tree has an empty
/// diagnostic list.
pub fn parse_game(text: &str) -> Result<GameTree, ParseError> {
    let mut header: Option<(String, usize)> = None;
    let mut protos: Vec<ProtoNode> = Vec::new();
    let mut by_name: HashMap<String, usize> = HashMap::new();
    let mut edges: Vec<(usize, usize, String, String)> = Vec::new(); // (line, col, parent, action+child packed below)
    let mut edge_children: Vec<String> = Vec::new();
    let mut root: Option<(usize, String)> = None;
    let mut last_line = 1;

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        last_line = lineno;
        let line = strip_comment(raw);
        let toks = tokens(line);
        if toks.is_empty() {
            continue;
        }
        let (kcol, keyword) = toks[0];
        match keyword {
            "game" => {
                if header.is_some() {
                    return Err(ParseError::at(lineno, kcol, "duplicate game header"));
                }
                let rest = &line[line.find("game").unwrap() + 4..];
                let open = rest
                    .find('"')
                    .ok_or_else(|| ParseError::new(lineno, "expected quoted game name"))?;
                let close = rest[open + 1..]
                    .find('"')
                    .ok_or_else(|| ParseError::new(lineno, "unterminated game name"))?;
                let name = rest[open + 1..open + 1 + close].to_string();
                let tail = tokens(&rest[open + close + 2..]);
                if tail.len() != 2 || tail[0].1 != "players" {
                    return Err(ParseError::new(lineno, "expected `players <n>` after game name"));
                }
                let (ncol, ntok) = tail[1];
                let n: usize = ntok
                    .parse()
                    .map_err(|_| ParseError::at(lineno, ncol, format!("invalid player count `{ntok}`")))?;
                if n == 0 {
                    return Err(ParseError::at(lineno, ncol, "player count must be >= 1"));
                }
                header = Some((name, n));
            }
            "node" => {
                if toks.len() != 6 || toks[2].1 != "player" || toks[4].1 != "infoset" {
                    return Err(ParseError::at(
                        lineno,
                        kcol,
                        "expected `node <id> player <p> infoset <iset>`",
                    ));
                }
                let (pcol, ptok) = toks[3];
                let player: usize = ptok
                    .parse()
                    .map_err(|_| ParseError::at(lineno, pcol, format!("invalid player index `{ptok}`")))?;
                declare(
                    &mut protos,
                    &mut by_name,
                    toks[1],
                    lineno,
                    ProtoKind::Decision {
                        player,
                        info_set: toks[5].1.to_string(),
                    },
                )?;
            }
            "chance" => {
                if toks.len() < 3 {
                    return Err(ParseError::at(
                        lineno,
                        kcol,
                        "expected `chance <id> <action>:<prob> ...`",
                    ));
                }
                let mut dist = Vec::new();
                for (col, tok) in &toks[2..] {
                    let (action, ptok) = tok.rsplit_once(':').ok_or_else(|| {
                        ParseError::at(lineno, *col, format!("expected `<action>:<prob>`, got `{tok}`"))
                    })?;
                    if action.is_empty() {
                        return Err(ParseError::at(lineno, *col, "empty action label"));
                    }
                    let p = parse_f64(lineno, *col, ptok, "probability")?;
                    dist.push((action.to_string(), p));
                }
                declare(&mut protos, &mut by_name, toks[1], lineno, ProtoKind::Chance { dist })?;
            }
            "leaf" => {
                if toks.len() < 2 {
                    return Err(ParseError::at(lineno, kcol, "expected `leaf <id> <rewards...>`"));
                }
                let mut rewards = Vec::new();
                for (col, tok) in &toks[2..] {
                    rewards.push(parse_f64(lineno, *col, tok, "reward")?);
                }
                declare(&mut protos, &mut by_name, toks[1], lineno, ProtoKind::Leaf { rewards })?;
            }
            "edge" => {
                if toks.len() != 4 {
                    return Err(ParseError::at(lineno, kcol, "expected `edge <parent> <action> <child>`"));
                }
                edges.push((lineno, kcol, toks[1].1.to_string(), toks[2].1.to_string()));
                edge_children.push(toks[3].1.to_string());
            }
            "root" => {
                if toks.len() != 2 {
                    return Err(ParseError::at(lineno, kcol, "expected `root <id>`"));
                }
                if root.is_some() {
                    return Err(ParseError::at(lineno, kcol, "duplicate root line"));
                }
                root = Some((lineno, toks[1].1.to_string()));
            }
            other => {
                return Err(ParseError::at(
                    lineno,
                    kcol,
                    format!("unknown directive `{other}`"),
                ));
            }
        }
    }

    let (game_name, player_count) = header.ok_or_else(|| ParseError::new(last_line, "missing game header"))?;
    let (_root_line, root_name) = root.ok_or_else(|| ParseError::new(last_line, "missing root"))?;

    // Attach edges in file order.
    for (i, (lineno, col, parent, action)) in edges.iter().enumerate() {
        let child_name = &edge_children[i];
        let pid = *by_name
            .get(parent)
            .ok_or_else(|| ParseError::at(*lineno, *col, format!("dangling edge: unknown node `{parent}`")))?;
        let cid = *by_name
            .get(child_name)
            .ok_or_else(|| ParseError::at(*lineno, *col, format!("dangling edge: unknown node `{child_name}`")))?;
        protos[pid].edges.push((action.clone(), cid));
    }

    let root_id = *by_name
        .get(&root_name)
        .ok_or_else(|| ParseError::new(last_line, format!("root references unknown node `{root_name}`")))?;

    // Early, line-addressable semantic checks.
    for proto in &protos {
        match &proto.kind {
            ProtoKind::Leaf { rewards } => {
                if rewards.len() != player_count {
                    return Err(ParseError::new(
                        proto.line,
                        format!(
                            "leaf `{}` has {} rewards, expected {}",
                            proto.name,
                            rewards.len(),
                            player_count
                        ),
                    ));
                }
            }
            ProtoKind::Decision { player, .. } => {
                if *player >= player_count {
                    return Err(ParseError::new(
                        proto.line,
                        format!("node `{}` references unknown player {player}", proto.name),
                    ));
                }
            }
            ProtoKind::Chance { dist } => {
                let labels: Vec<&str> = proto.edges.iter().map(|(a, _)| a.as_str()).collect();
                let declared: Vec<&str> = dist.iter().map(|(a, _)| a.as_str()).collect();
                if labels != declared {
                    return Err(ParseError::new(
                        proto.line,
                        format!(
                            "chance `{}` declares actions [{}] but its edges are [{}]",
                            proto.name,
                            declared.join(", "),
                            labels.join(", ")
                        ),
                    ));
                }
            }
        }
    }

    // Info-state arena: decision info sets in first-mention order, then a
    // singleton per chance node, matching the programmatic builder.
    let mut info_ids: HashMap<String, usize> = HashMap::new();
    let mut info_states: Vec<InfoState> = Vec::new();
    for (i, proto) in protos.iter().enumerate() {
        if let ProtoKind::Decision { player, info_set } = &proto.kind {
            let next = info_states.len();
            let id = *info_ids.entry(info_set.clone()).or_insert(next);
            if id == next {
                info_states.push(InfoState {
                    name: info_set.clone(),
                    owner: PlayerRef::Player(*player),
                    members: Vec::new(),
                    actions: Vec::new(),
                });
            } else if info_states[id].owner != PlayerRef::Player(*player) {
                return Err(ParseError::new(
                    proto.line,
                    format!(
                        "info state `{info_set}` is owned by {} but node `{}` gives it to player {player}",
                        info_states[id].owner, proto.name
                    ),
                ));
            }
            info_states[id].members.push(NodeId(i));
        }
    }

    let mut nodes: Vec<Node> = Vec::with_capacity(protos.len());
    let mut lines: Vec<usize> = Vec::with_capacity(protos.len());
    for (i, proto) in protos.iter().enumerate() {
        let edges: Vec<Edge> = proto
            .edges
            .iter()
            .map(|(a, c)| Edge {
                action: a.clone(),
                child: NodeId(*c),
            })
            .collect();
        let kind = match &proto.kind {
            ProtoKind::Decision { player, info_set } => NodeKind::Decision {
                owner: *player,
                info_state: InfoStateId(info_ids[info_set]),
            },
            ProtoKind::Chance { dist } => {
                let id = info_states.len();
                info_states.push(InfoState {
                    name: proto.name.clone(),
                    owner: PlayerRef::Chance,
                    members: vec![NodeId(i)],
                    actions: dist.iter().map(|(a, _)| a.clone()).collect(),
                });
                NodeKind::Chance {
                    info_state: InfoStateId(id),
                    probs: dist.iter().map(|(_, p)| *p).collect(),
                }
            }
            ProtoKind::Leaf { rewards } => NodeKind::Terminal {
                rewards: rewards.clone(),
            },
        };
        nodes.push(Node {
            name: proto.name.clone(),
            kind,
            edges,
        });
        lines.push(proto.line);
    }
    for is in &mut info_states {
        if is.owner != PlayerRef::Chance {
            let first = is.members.iter().min().expect("nonempty");
            is.actions = nodes[first.index()].edges.iter().map(|e| e.action.clone()).collect();
        }
    }

    let mut tree = GameTree::from_parts(game_name, player_count, nodes, info_states, NodeId(root_id))
        .map_err(|e| ParseError::new(last_line, e.to_string()))?;
    let diags = tree.validate();
    if let Some(d) = diags.first() {
        let line = d
            .nodes
            .first()
            .map(|n| lines[n.index()])
            .unwrap_or(last_line);
        return Err(ParseError::new(line, d.to_string()));
    }
    tree.renormalize();
    Ok(tree)
}

fn declare(
    protos: &mut Vec<ProtoNode>,
    by_name: &mut HashMap<String, usize>,
    (col, name): (usize, &str),
    line: usize,
    kind: ProtoKind,
) -> Result<(), ParseError> {
    if by_name.contains_key(name) {
        return Err(ParseError::at(line, col, format!("duplicate node id `{name}`")));
    }
    by_name.insert(name.to_string(), protos.len());
    protos.push(ProtoNode {
        name: name.to_string(),
        line,
        kind,
        edges: Vec::new(),
    });
    Ok(())
}

/// Canonical document: declarations in arena order, edges in declaration
/// order, probabilities with 17 significant digits, LF line endings.
pub fn serialize_game(tree: &GameTree) -> String {
    let mut out = String::new();
    out.push_str(&format!("game \"{}\" players {}\n", tree.name(), tree.player_count()));
    for (_, node) in tree.nodes() {
        match &node.kind {
            NodeKind::Decision { owner, info_state } => {
                out.push_str(&format!(
                    "node {} player {} infoset {}\n",
                    node.name,
                    owner,
                    tree.info_state(*info_state).name
                ));
            }
            NodeKind::Chance { probs, .. } => {
                out.push_str(&format!("chance {}", node.name));
                for (edge, p) in node.edges.iter().zip(probs) {
                    out.push_str(&format!(" {}:{}", edge.action, fmt_prob(*p)));
                }
                out.push('\n');
            }
            NodeKind::Terminal { rewards } => {
                out.push_str(&format!("leaf {}", node.name));
                for r in rewards {
                    out.push_str(&format!(" {r}"));
                }
                out.push('\n');
            }
        }
    }
    for (_, node) in tree.nodes() {
        for edge in &node.edges {
            out.push_str(&format!(
                "edge {} {} {}\n",
                node.name,
                edge.action,
                tree.node(edge.child).name
            ));
        }
    }
    out.push_str(&format!("root {}\n", tree.node(tree.root()).name));
    out
}

/// Parses a policy document for one player. Info states the document does not
/// mention default to uniform; actions a mentioned line omits get probability
/// zero.
pub fn parse_policy(text: &str, tree: &GameTree) -> Result<BehavioralPolicy, ParseError> {
    let mut player: Option<usize> = None;
    let mut probs: HashMap<InfoStateId, Vec<f64>> = HashMap::new();
    let mut last_line = 1;

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        last_line = lineno;
        let toks = tokens(strip_comment(raw));
        if toks.is_empty() {
            continue;
        }
        match toks[0].1 {
            "policy" => {
                if player.is_some() {
                    return Err(ParseError::new(lineno, "duplicate policy header"));
                }
                if toks.len() != 3 || toks[1].1 != "player" {
                    return Err(ParseError::new(lineno, "expected `policy player <i>`"));
                }
                let (col, tok) = toks[2];
                let p: usize = tok
                    .parse()
                    .map_err(|_| ParseError::at(lineno, col, format!("invalid player index `{tok}`")))?;
                if p >= tree.player_count() {
                    return Err(ParseError::at(lineno, col, format!("unknown player {p}")));
                }
                player = Some(p);
            }
            "infoset" => {
                let p = player.ok_or_else(|| ParseError::new(lineno, "infoset line before policy header"))?;
                let (id, dist) = parse_dist_line(&toks, tree, PlayerRef::Player(p), lineno)?;
                if probs.insert(id, dist).is_some() {
                    return Err(ParseError::new(
                        lineno,
                        format!("duplicate infoset line for `{}`", tree.info_state(id).name),
                    ));
                }
            }
            other => {
                return Err(ParseError::at(lineno, toks[0].0, format!("unknown directive `{other}`")));
            }
        }
    }

    let player = player.ok_or_else(|| ParseError::new(last_line, "missing `policy player <i>` header"))?;
    finish_policy(tree, PlayerRef::Player(player), probs, last_line)
}

fn parse_dist_line(
    toks: &[(usize, &str)],
    tree: &GameTree,
    owner: PlayerRef,
    lineno: usize,
) -> Result<(InfoStateId, Vec<f64>), ParseError> {
    if toks.len() < 3 {
        return Err(ParseError::new(lineno, "expected `infoset <name> <action>:<prob> ...`"));
    }
    let (ncol, name) = toks[1];
    let id = tree
        .info_state_by_name(name)
        .ok_or_else(|| ParseError::at(lineno, ncol, format!("unknown info state `{name}`")))?;
    let is = tree.info_state(id);
    if is.owner != owner {
        return Err(ParseError::at(
            lineno,
            ncol,
            format!("info state `{name}` is owned by {}, not {}", is.owner, owner),
        ));
    }
    let mut dist = vec![0.0; is.actions.len()];
    let mut seen = vec![false; is.actions.len()];
    for (col, tok) in &toks[2..] {
        let (action, ptok) = tok
            .rsplit_once(':')
            .ok_or_else(|| ParseError::at(lineno, *col, format!("expected `<action>:<prob>`, got `{tok}`")))?;
        let idx = is.action_index(action).ok_or_else(|| {
            ParseError::at(lineno, *col, format!("unknown action `{action}` at info state `{name}`"))
        })?;
        if seen[idx] {
            return Err(ParseError::at(lineno, *col, format!("duplicate action `{action}`")));
        }
        seen[idx] = true;
        let p = parse_f64(lineno, *col, ptok, "probability")?;
        if p < 0.0 {
            return Err(ParseError::at(lineno, *col, format!("negative probability `{ptok}`")));
        }
        dist[idx] = p;
    }
    let sum: f64 = dist.iter().sum();
    if (sum - 1.0).abs() > PROB_TOLERANCE {
        return Err(ParseError::new(
            lineno,
            format!("distribution at `{name}` sums to {sum}, expected 1 within 1e-12"),
        ));
    }
    Ok((id, dist))
}

fn finish_policy(
    tree: &GameTree,
    owner: PlayerRef,
    mut probs: HashMap<InfoStateId, Vec<f64>>,
    last_line: usize,
) -> Result<BehavioralPolicy, ParseError> {
    for u in tree.owned_info_states(owner) {
        probs.entry(u).or_insert_with(|| {
            let k = tree.info_state(u).actions.len();
            vec![1.0 / k as f64; k]
        });
    }
    BehavioralPolicy::new(tree, owner, probs).map_err(|e| ParseError::new(last_line, e.to_string()))
}

/// Parses a rated policy population:
///
/// ```text
/// member rating <r>
/// policy player <i>
/// infoset <name> <action>:<prob> ...
/// ```
///
/// Each `member` block carries a policy per seat; omitted seats and info
/// states default to uniform.
pub fn parse_population(text: &str, tree: &GameTree) -> Result<RatedPopulation, ParseError> {
    struct Pending {
        rating: f64,
        line: usize,
        seats: Vec<HashMap<InfoStateId, Vec<f64>>>,
        seat: Option<usize>,
    }
    let mut members: Vec<RatedMember> = Vec::new();
    let mut pending: Option<Pending> = None;
    let mut last_line = 1;

    let flush = |p: Option<Pending>, members: &mut Vec<RatedMember>| -> Result<(), ParseError> {
        if let Some(p) = p {
            let mut seat_policies = Vec::new();
            for (i, probs) in p.seats.into_iter().enumerate() {
                seat_policies.push(
                    finish_policy(tree, PlayerRef::Player(i), probs, p.line)?,
                );
            }
            members.push(RatedMember {
                rating: p.rating,
                seat_policies,
            });
        }
        Ok(())
    };

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        last_line = lineno;
        let toks = tokens(strip_comment(raw));
        if toks.is_empty() {
            continue;
        }
        match toks[0].1 {
            "member" => {
                if toks.len() != 3 || toks[1].1 != "rating" {
                    return Err(ParseError::new(lineno, "expected `member rating <r>`"));
                }
                let (col, tok) = toks[2];
                let rating = parse_f64(lineno, col, tok, "rating")?;
                flush(pending.take(), &mut members)?;
                pending = Some(Pending {
                    rating,
                    line: lineno,
                    seats: vec![HashMap::new(); tree.player_count()],
                    seat: None,
                });
            }
            "policy" => {
                let p = pending
                    .as_mut()
                    .ok_or_else(|| ParseError::new(lineno, "policy block before any `member` line"))?;
                if toks.len() != 3 || toks[1].1 != "player" {
                    return Err(ParseError::new(lineno, "expected `policy player <i>`"));
                }
                let (col, tok) = toks[2];
                let seat: usize = tok
                    .parse()
                    .map_err(|_| ParseError::at(lineno, col, format!("invalid player index `{tok}`")))?;
                if seat >= tree.player_count() {
                    return Err(ParseError::at(lineno, col, format!("unknown player {seat}")));
                }
                p.seat = Some(seat);
            }
            "infoset" => {
                let p = pending
                    .as_mut()
                    .ok_or_else(|| ParseError::new(lineno, "infoset line before any `member` line"))?;
                let seat = p
                    .seat
                    .ok_or_else(|| ParseError::new(lineno, "infoset line before `policy player <i>`"))?;
                let (id, dist) = parse_dist_line(&toks, tree, PlayerRef::Player(seat), lineno)?;
                if p.seats[seat].insert(id, dist).is_some() {
                    return Err(ParseError::new(
                        lineno,
                        format!("duplicate infoset line for `{}`", tree.info_state(id).name),
                    ));
                }
            }
            other => {
                return Err(ParseError::at(lineno, toks[0].0, format!("unknown directive `{other}`")));
            }
        }
    }
    flush(pending.take(), &mut members)?;
    if members.is_empty() {
        return Err(ParseError::new(last_line, "population has no members"));
    }
    RatedPopulation::new(members).map_err(|e| ParseError::new(last_line, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins::{build_chance_rps, build_figure1, build_kuhn_poker, build_rps};
    use crate::game::GameTreeBuilder;

    #[test]
    fn round_trip_builtins() {
        for g in [
            build_figure1(),
            build_rps(),
            build_chance_rps(None).unwrap(),
            build_kuhn_poker(),
        ] {
            let doc = serialize_game(&g);
            let back = parse_game(&doc).unwrap();
            assert_eq!(back, g, "structural round trip for {}", g.name());
            assert_eq!(serialize_game(&back), doc, "byte round trip for {}", g.name());
        }
    }

    #[test]
    fn missing_root_is_semantic_error() {
        let doc = "game \"g\" players 1\nleaf z 0\n";
        let err = parse_game(doc).unwrap_err();
        assert!(err.message.contains("missing root"), "{err}");
    }

    #[test]
    fn unnormalized_chance_line() {
        let doc = "game \"g\" players 1\nchance c a:0.6 b:0.6\nleaf x 0\nleaf y 1\nedge c a x\nedge c b y\nroot c\n";
        let err = parse_game(doc).unwrap_err();
        assert!(err.message.contains("sum to 1.2"), "{err}");
        assert_eq!(err.line, 2);
    }

    #[test]
    fn dangling_edge_and_duplicate_id() {
        let doc = "game \"g\" players 1\nleaf z 0\nedge z a q\nroot z\n";
        let err = parse_game(doc).unwrap_err();
        assert!(err.message.contains("dangling edge"), "{err}");
        let doc = "game \"g\" players 1\nleaf z 0\nleaf z 1\nroot z\n";
        let err = parse_game(doc).unwrap_err();
        assert!(err.message.contains("duplicate node id"), "{err}");
    }

    #[test]
    fn reward_arity_checked_at_parse() {
        let doc = "game \"g\" players 2\nleaf z 1\nroot z\n";
        let err = parse_game(doc).unwrap_err();
        assert!(err.message.contains("expected 2"), "{err}");
        assert_eq!(err.line, 2);
    }

    #[test]
    fn single_terminal_game_is_three_lines() {
        let mut b = GameTreeBuilder::new("one", 1);
        let z = b.terminal("z", vec![5.0]);
        b.root(z);
        let g = b.build().unwrap();
        let doc = serialize_game(&g);
        assert_eq!(doc.lines().count(), 3);
        assert_eq!(parse_game(&doc).unwrap(), g);
    }

    #[test]
    fn policy_documents() {
        let g = build_figure1();
        // Deterministic at u1.
        let p = parse_policy("policy player 0\ninfoset u1 left:1.0\n", &g).unwrap();
        let u1 = g.info_state_by_name("u1").unwrap();
        assert_eq!(p.probs(u1).unwrap(), &[1.0, 0.0]);
        // Empty body defaults to uniform.
        let p = parse_policy("policy player 1\n", &g).unwrap();
        let u2 = g.info_state_by_name("u2").unwrap();
        assert_eq!(p.probs(u2).unwrap(), &[0.5, 0.5]);
        // Normalization error.
        let err = parse_policy("policy player 0\ninfoset u1 left:0.7 right:0.7\n", &g).unwrap_err();
        assert!(err.message.contains("sums to 1.4"), "{err}");
        // Owner mismatch.
        let err = parse_policy("policy player 0\ninfoset u2 left:1.0\n", &g).unwrap_err();
        assert!(err.message.contains("owned by"), "{err}");
        // Unknown action.
        let err = parse_policy("policy player 0\ninfoset u1 up:1.0\n", &g).unwrap_err();
        assert!(err.message.contains("unknown action"), "{err}");
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_game("game \"g\" players 1\nleaf z zero\nroot z\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.col.is_some());
    }
}
