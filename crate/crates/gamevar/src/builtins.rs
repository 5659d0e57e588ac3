//! Built-in games: the two-player chance/decision example tree ("figure1"),
//! rock-paper-scissors and its player-versus-chance variant, SkillRPS, and
//! Kuhn poker.

use crate::error::Error;
use crate::exact::{RatedMember, RatedPopulation};
use crate::game::{GameTree, GameTreeBuilder, PlayerRef};
use crate::policy::BehavioralPolicy;
use crate::skillrps::SkillRpsParams;

/// Rock-paper-scissors payoff for the row player.
pub const RPS_MOVES: [&str; 3] = ["rock", "paper", "scissors"];

fn rps_payoff(a1: usize, a2: usize) -> f64 {
    // rows/cols ordered rock, paper, scissors
    const TABLE: [[f64; 3]; 3] = [[0.0, -1.0, 1.0], [1.0, 0.0, -1.0], [-1.0, 1.0, 0.0]];
    TABLE[a1][a2]
}

/// Two-player example: a chance root; on the left a player-0 move followed by
/// two player-1 nodes sharing one info state, on the right a second chance
/// node. Player 0's leaf rewards are (0, -1, 1, 0, 1, -1) left to right.
/// Player 1's rewards are not given by the source figure; this builder makes
/// the game zero-sum, which does not affect decompositions of player 0's
/// outcome.
pub fn build_figure1() -> GameTree {
    let mut b = GameTreeBuilder::new("figure1", 2);
    let c0 = b.chance("c0");
    let p1 = b.decision("p1", 0, "u1");
    let p2a = b.decision("p2a", 1, "u2");
    let z1 = b.terminal("z1", vec![0.0, 0.0]);
    let z2 = b.terminal("z2", vec![-1.0, 1.0]);
    let p2b = b.decision("p2b", 1, "u2");
    let z3 = b.terminal("z3", vec![1.0, -1.0]);
    let z4 = b.terminal("z4", vec![0.0, 0.0]);
    let c1 = b.chance("c1");
    let z5 = b.terminal("z5", vec![1.0, -1.0]);
    let z6 = b.terminal("z6", vec![-1.0, 1.0]);
    b.chance_edge(c0, "left", 0.5, p1);
    b.chance_edge(c0, "right", 0.5, c1);
    b.edge(p1, "left", p2a);
    b.edge(p1, "right", p2b);
    b.edge(p2a, "left", z1);
    b.edge(p2a, "right", z2);
    b.edge(p2b, "left", z3);
    b.edge(p2b, "right", z4);
    b.chance_edge(c1, "left", 0.5, z5);
    b.chance_edge(c1, "right", 0.5, z6);
    b.root(c0);
    b.build().expect("figure1 is valid by construction")
}

/// Simultaneous rock-paper-scissors in sequential form: player 0 moves first,
/// player 1's three nodes share one info state hiding that move.
pub fn build_rps() -> GameTree {
    let mut b = GameTreeBuilder::new("rps", 2);
    let root = b.decision("p1root", 0, "p1");
    for (i, m1) in RPS_MOVES.iter().enumerate() {
        let n2 = b.decision(format!("p2_{m1}"), 1, "p2");
        b.edge(root, *m1, n2);
        for (j, m2) in RPS_MOVES.iter().enumerate() {
            let pay = rps_payoff(i, j);
            let z = b.terminal(format!("z_{m1}_{m2}"), vec![pay, -pay]);
            b.edge(n2, *m2, z);
        }
    }
    b.root(root);
    b.build().expect("rps is valid by construction")
}

/// Rock-paper-scissors against a chance opponent: one chance root draws the
/// opponent move (default uniform), the single player's three nodes share one
/// info state hiding it.
pub fn build_chance_rps(chance_probs: Option<[f64; 3]>) -> Result<GameTree, Error> {
    let probs = chance_probs.unwrap_or([1.0 / 3.0; 3]);
    let mut b = GameTreeBuilder::new("chance-rps", 1);
    let root = b.chance("deal");
    for (j, mc) in RPS_MOVES.iter().enumerate() {
        let n1 = b.decision(format!("p1_{mc}"), 0, "p1");
        b.chance_edge(root, *mc, probs[j], n1);
        for (i, m1) in RPS_MOVES.iter().enumerate() {
            let z = b.terminal(format!("z_{mc}_{m1}"), vec![rps_payoff(i, j)]);
            b.edge(n1, *m1, z);
        }
    }
    b.root(root);
    b.build()
}

fn sign(x: i64) -> f64 {
    match x.cmp(&0) {
        std::cmp::Ordering::Greater => 1.0,
        std::cmp::Ordering::Less => -1.0,
        std::cmp::Ordering::Equal => 0.0,
    }
}

/// SkillRPS(n, c, alpha). Chance first: node `W` flips to a coin game with
/// probability alpha (then node `Z` pays ±1), otherwise both players pick a
/// joint (number, move) action from one hidden info state of 3n actions;
/// player 0 scores `sign(N1 - N2 + c·RPS(A1, A2))`, zero-sum.
pub fn build_skill_rps(params: &SkillRpsParams) -> GameTree {
    let n = params.n() as usize;
    let c = params.c() as i64;
    let alpha = params.alpha();
    let mut b = GameTreeBuilder::new(
        format!("skill-rps:{},{},{}", params.n(), params.c(), alpha),
        2,
    );
    let w = b.chance("W");
    let p1 = b.decision("p1root", 0, "p1");
    b.chance_edge(w, "play", 1.0 - alpha, p1);

    let actions: Vec<(usize, usize)> = (1..=n)
        .flat_map(|k| (0..3).map(move |m| (k, m)))
        .collect();
    let label = |(k, m): (usize, usize)| format!("n{k}-{}", RPS_MOVES[m]);

    for &(k1, m1) in &actions {
        let n2 = b.decision(format!("p2_{}", label((k1, m1))), 1, "p2");
        b.edge(p1, label((k1, m1)), n2);
        for &(k2, m2) in &actions {
            let s = k1 as i64 - k2 as i64 + c * rps_payoff(m1, m2) as i64;
            let pay = sign(s);
            let z = b.terminal(format!("z_{}_{}", label((k1, m1)), label((k2, m2))), vec![pay, -pay]);
            b.edge(n2, label((k2, m2)), z);
        }
    }

    let zc = b.chance("Z");
    b.chance_edge(w, "coin", alpha, zc);
    let tails = b.terminal("coin_tails", vec![-1.0, 1.0]);
    let heads = b.terminal("coin_heads", vec![1.0, -1.0]);
    b.chance_edge(zc, "tails", 0.5, tails);
    b.chance_edge(zc, "heads", 0.5, heads);
    b.root(w);
    b.build().expect("skill-rps is valid by construction")
}

/// The canonical rated population for [`build_skill_rps`]: one member per
/// number `k`, playing `N = k` with a uniform move, rated `ρ = k`. Uniform
/// sampling from this population reproduces the uniform-number assumption the
/// closed forms are derived under.
pub fn skill_rps_population(params: &SkillRpsParams, tree: &GameTree) -> Result<RatedPopulation, Error> {
    let n = params.n() as usize;
    let mut members = Vec::with_capacity(n);
    for k in 1..=n {
        let mut seat_policies = Vec::new();
        for (seat, name) in [(0usize, "p1"), (1, "p2")] {
            let u = tree
                .info_state_by_name(name)
                .ok_or_else(|| Error::UnknownInfoState(name.to_string()))?;
            let m = tree.info_state(u).actions.len();
            if m != 3 * n {
                return Err(Error::InvalidParameter(format!(
                    "info state `{name}` has {m} actions, expected {}",
                    3 * n
                )));
            }
            let mut dist = vec![0.0; m];
            for j in 0..3 {
                dist[(k - 1) * 3 + j] = 1.0 / 3.0;
            }
            let mut probs = std::collections::HashMap::new();
            probs.insert(u, dist);
            seat_policies.push(BehavioralPolicy::new(tree, PlayerRef::Player(seat), probs)?);
        }
        members.push(RatedMember {
            rating: k as f64,
            seat_policies,
        });
    }
    RatedPopulation::new(members)
}

/// Standard three-card Kuhn poker: one six-outcome deal, the usual
/// check/bet/fold/call tree, zero-sum rewards in {±1, ±2}.
pub fn build_kuhn_poker() -> GameTree {
    const CARDS: [&str; 3] = ["J", "Q", "K"];
    let rank = |c: &str| CARDS.iter().position(|x| *x == c).unwrap();
    let mut b = GameTreeBuilder::new("kuhn", 2);
    let deal = b.chance("deal");

    for c1 in CARDS {
        for c2 in CARDS {
            if c1 == c2 {
                continue;
            }
            let tag = format!("{c1}{c2}");
            let showdown = |stake: f64| {
                if rank(c1) > rank(c2) {
                    stake
                } else {
                    -stake
                }
            };
            let p1 = b.decision(format!("1_{tag}"), 0, format!("1{c1}"));
            b.chance_edge(deal, &tag, 1.0 / 6.0, p1);

            // check line
            let p2c = b.decision(format!("2_{tag}_c"), 1, format!("2{c2}c"));
            b.edge(p1, "check", p2c);
            let cc = b.terminal(format!("z_{tag}_cc"), vec![showdown(1.0), -showdown(1.0)]);
            b.edge(p2c, "check", cc);
            let p1cb = b.decision(format!("1_{tag}_cb"), 0, format!("1{c1}cb"));
            b.edge(p2c, "bet", p1cb);
            let cbf = b.terminal(format!("z_{tag}_cbf"), vec![-1.0, 1.0]);
            b.edge(p1cb, "fold", cbf);
            let cbc = b.terminal(format!("z_{tag}_cbc"), vec![showdown(2.0), -showdown(2.0)]);
            b.edge(p1cb, "call", cbc);

            // bet line
            let p2b = b.decision(format!("2_{tag}_b"), 1, format!("2{c2}b"));
            b.edge(p1, "bet", p2b);
            let bf = b.terminal(format!("z_{tag}_bf"), vec![1.0, -1.0]);
            b.edge(p2b, "fold", bf);
            let bc = b.terminal(format!("z_{tag}_bc"), vec![showdown(2.0), -showdown(2.0)]);
            b.edge(p2b, "call", bc);
        }
    }
    b.root(deal);
    b.build().expect("kuhn is valid by construction")
}

/// Built-in names accepted by [`builtin`]; `skill-rps` takes parameters as
/// `skill-rps:N,C,ALPHA`.
pub fn builtin_names() -> &'static [&'static str] {
    &["figure1", "rps", "chance-rps", "kuhn", "skill-rps:N,C,ALPHA"]
}

/// Builds a built-in game by name.
pub fn builtin(name: &str) -> Result<GameTree, Error> {
    match name {
        "figure1" => Ok(build_figure1()),
        "rps" => Ok(build_rps()),
        "chance-rps" => build_chance_rps(None),
        "kuhn" => Ok(build_kuhn_poker()),
        _ => {
            if let Some(spec) = name.strip_prefix("skill-rps:") {
                let params = parse_skill_rps_spec(spec)?;
                Ok(build_skill_rps(&params))
            } else {
                Err(Error::InvalidParameter(format!(
                    "unknown builtin `{name}`; available: {}",
                    builtin_names().join(", ")
                )))
            }
        }
    }
}

/// Parses `N,C,ALPHA`.
pub fn parse_skill_rps_spec(spec: &str) -> Result<SkillRpsParams, Error> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidParameter(format!(
            "expected `N,C,ALPHA`, got `{spec}`"
        )));
    }
    let n: u32 = parts[0]
        .trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("invalid n `{}`", parts[0])))?;
    let c: u32 = parts[1]
        .trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("invalid c `{}`", parts[1])))?;
    let alpha: f64 = parts[2]
        .trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("invalid alpha `{}`", parts[2])))?;
    SkillRpsParams::new(n, c, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::NodeKind;

    #[test]
    fn figure1_rewards_and_structure() {
        let g = build_figure1();
        let rewards: Vec<f64> = g
            .nodes()
            .filter_map(|(_, n)| match &n.kind {
                NodeKind::Terminal { rewards } => Some(rewards[0]),
                _ => None,
            })
            .collect();
        assert_eq!(rewards, vec![0.0, -1.0, 1.0, 0.0, 1.0, -1.0]);
        assert_eq!(g.owned_info_states(PlayerRef::Player(1)).len(), 1);
        let root = g.node(g.root());
        match &root.kind {
            NodeKind::Chance { probs, .. } => assert_eq!(probs, &vec![0.5, 0.5]),
            _ => panic!("root must be chance"),
        }
    }

    #[test]
    fn rps_payoff_table() {
        assert_eq!(rps_payoff(0, 1), -1.0); // rock vs paper
        assert_eq!(rps_payoff(1, 0), 1.0);
        assert_eq!(rps_payoff(2, 1), 1.0); // scissors vs paper
        for a in 0..3 {
            assert_eq!(rps_payoff(a, a), 0.0);
        }
    }

    #[test]
    fn rps_structure() {
        let g = build_rps();
        assert_eq!(g.owned_info_states(PlayerRef::Player(0)).len(), 1);
        let p2 = g.owned_info_states(PlayerRef::Player(1));
        assert_eq!(p2.len(), 1);
        assert_eq!(g.info_state(p2[0]).members.len(), 3);
        assert_eq!(g.info_state(p2[0]).actions.len(), 3);
    }

    #[test]
    fn skill_rps_structure() {
        let params = SkillRpsParams::new(2, 0, 0.5).unwrap();
        let g = build_skill_rps(&params);
        assert!(g.validate().is_empty());
        for p in [PlayerRef::Player(0), PlayerRef::Player(1)] {
            let owned = g.owned_info_states(p);
            assert_eq!(owned.len(), 1);
            assert_eq!(g.info_state(owned[0]).actions.len(), 6);
        }
    }

    #[test]
    fn kuhn_structure() {
        let g = build_kuhn_poker();
        assert!(g.validate().is_empty());
        let deal = g.node(g.root());
        assert_eq!(deal.edges.len(), 6);
        assert!(g.is_zero_sum(0.0));
        assert_eq!(g.owned_info_states(PlayerRef::Player(0)).len(), 6);
        assert_eq!(g.owned_info_states(PlayerRef::Player(1)).len(), 6);
        for (_, n) in g.nodes() {
            if let NodeKind::Terminal { rewards } = &n.kind {
                assert!([1.0, 2.0].contains(&rewards[0].abs()) || rewards[0] == 0.0);
            }
        }
    }

    #[test]
    fn builtin_registry() {
        assert!(builtin("figure1").is_ok());
        assert!(builtin("skill-rps:2,0,0.5").is_ok());
        assert!(builtin("skill-rps:0,0,0.5").is_err());
        assert!(builtin("nosuch").is_err());
    }
}
