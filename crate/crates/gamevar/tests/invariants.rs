//! Cross-module invariants: the closed-form decomposition against the
//! definitional oracle, reach-probability identities, estimator consistency,
//! and the SkillRPS closed forms against generic enumeration.

use std::collections::HashMap;

use gamevar::builtins::*;
use gamevar::error::Error;
use gamevar::estimate::{
    plugin_estimate, simulate_dataset, regression_estimate, PluginTables, RegressionSpec,
};
use gamevar::exact::{
    explained_variance, threeway_decompose, total_variance, DEFAULT_CHANCE_CAP,
};
use gamevar::exec::{stream_rng, StreamDomain};
use gamevar::game::{DiagnosticKind, GameTree, InfoState, PlayerRef};
use gamevar::oracle::{
    oracle_components, oracle_threeway, random_game, random_profile, RandomGameParams,
    DEFAULT_ASSIGNMENT_CAP,
};
use gamevar::play::{enumerate_terminal_histories, sample_playthrough};
use gamevar::policy::{policy_for, PolicyProfile};
use gamevar::skillrps::{analytic_threeway, SkillRpsParams};
use gamevar::text::{parse_game, serialize_game};

fn builtins_for_tests() -> Vec<GameTree> {
    vec![
        build_figure1(),
        build_rps(),
        build_chance_rps(None).unwrap(),
        build_skill_rps(&SkillRpsParams::new(2, 0, 0.5).unwrap()),
        build_kuhn_poker(),
    ]
}

fn conditioners(tree: &GameTree) -> Vec<PlayerRef> {
    let mut out = vec![PlayerRef::Chance];
    for p in 0..tree.player_count() {
        out.push(PlayerRef::Player(p));
    }
    out
}

#[test]
fn law_of_total_variance_on_builtins() {
    for tree in builtins_for_tests() {
        for seed in 0..8 {
            let profile = random_profile(&tree, seed);
            let total = total_variance(&tree, &profile, 0).unwrap();
            for cond in conditioners(&tree) {
                let report = explained_variance(&tree, &profile, 0, cond).unwrap();
                let (oracle_e, oracle_r) =
                    oracle_components(&tree, &profile, 0, cond, DEFAULT_ASSIGNMENT_CAP).unwrap();
                let tol = 1e-9 * total.max(1.0);
                assert!((report.explained + report.residual - total).abs() <= tol);
                assert!((oracle_e + oracle_r - total).abs() <= tol, "{} {cond}", tree.name());
                assert!((report.explained + oracle_r - total).abs() <= tol, "{} {cond}", tree.name());
            }
        }
    }
}

#[test]
fn oracle_equivalence_on_random_games() {
    let params = RandomGameParams::default();
    for seed in 0..40 {
        let tree = random_game(&params, seed);
        let profile = random_profile(&tree, seed ^ 0x5eed);
        let total = total_variance(&tree, &profile, 0).unwrap();
        for cond in conditioners(&tree) {
            let exact = explained_variance(&tree, &profile, 0, cond).unwrap().explained;
            let (oracle_e, oracle_r) =
                oracle_components(&tree, &profile, 0, cond, DEFAULT_ASSIGNMENT_CAP).unwrap();
            let tol = 1e-9 * total.max(1.0);
            assert!(
                (exact - oracle_e).abs() <= tol,
                "seed {seed} {cond}: exact {exact} vs oracle {oracle_e}"
            );
            assert!((oracle_e + oracle_r - total).abs() <= tol, "seed {seed} {cond}");
        }
    }
}

#[test]
fn reward_affine_equivariance() {
    let tree = build_kuhn_poker();
    let profile = random_profile(&tree, 3);
    let base = explained_variance(&tree, &profile, 0, PlayerRef::Chance).unwrap();
    for k in [-2.0, 0.5, 3.0] {
        for b in [-1.0, 7.0] {
            let mapped = tree.with_mapped_rewards(0, |r| k * r + b);
            let report = explained_variance(&mapped, &profile, 0, PlayerRef::Chance).unwrap();
            let k2 = k * k;
            let tol = 1e-9 * (k2 * base.total_variance).max(1.0);
            assert!((report.total_variance - k2 * base.total_variance).abs() <= tol);
            assert!((report.explained - k2 * base.explained).abs() <= tol);
            assert!((report.residual - k2 * base.residual).abs() <= tol);
            assert!((report.explained_ratio - base.explained_ratio).abs() <= 1e-9);
        }
    }
}

#[test]
fn eta_sums_match_expected_trajectory_length() {
    // Σ_u η(u) over a player's info states equals the expected number of
    // moves that player makes per playthrough. Exact figures for figure1:
    // 0.5 for each seat, 1.5 for chance.
    let tree = build_figure1();
    let profile = PolicyProfile::uniform(&tree);
    let exact_sums: Vec<(PlayerRef, f64)> = vec![
        (PlayerRef::Player(0), 0.5),
        (PlayerRef::Player(1), 0.5),
        (PlayerRef::Chance, 1.5),
    ];
    for (player, expect) in &exact_sums {
        let stats = gamevar::play::reach_and_values(&tree, &profile, *player, 0).unwrap();
        let sum: f64 = stats.iter().map(|s| s.eta).sum();
        assert!((sum - expect).abs() < 1e-12, "{player}: {sum}");
    }

    // Empirical check at 1e5 samples, 5 standard errors.
    let n = 100_000;
    for (player, expect) in exact_sums {
        let mut mean = 0.0;
        let mut m2 = 0.0;
        let mut rng = stream_rng(77, StreamDomain::Playthrough, 0);
        for _ in 0..n {
            let p = sample_playthrough(&tree, &profile, &mut rng).unwrap();
            let len = p.trace(player).len() as f64;
            mean += len;
            m2 += len * len;
        }
        mean /= n as f64;
        let var = m2 / n as f64 - mean * mean;
        let se = (var / n as f64).sqrt();
        assert!(
            (mean - expect).abs() <= 5.0 * se.max(1e-9),
            "{player}: mean {mean} vs {expect}"
        );
    }
}

#[test]
fn million_sample_mean_matches_enumeration() {
    let tree = build_figure1();
    let profile = PolicyProfile::uniform(&tree);
    // E(Y) = 0 by terminal-history enumeration.
    let histories = enumerate_terminal_histories(&tree, &profile, PlayerRef::Chance).unwrap();
    let exact_mean: f64 = histories
        .iter()
        .map(|h| h.eta * h.playthrough.rewards[0])
        .sum();
    assert!(exact_mean.abs() < 1e-15);

    let dataset = simulate_dataset(&tree, &profile, PlayerRef::Chance, 0, 1_000_000, 123).unwrap();
    let mean: f64 = dataset.records.iter().map(|r| r.outcome).sum::<f64>() / 1e6;
    assert!(mean.abs() <= 0.005, "empirical mean {mean}");
}

#[test]
fn skill_rps_with_unit_n_matches_rps_outcome_distribution() {
    // SkillRPS(1, c>0, 0) is classic RPS up to relabeling: under uniform
    // policies the outcome distributions on {-1, 0, 1} coincide exactly.
    let rps = build_rps();
    let rps_hist = enumerate_terminal_histories(&rps, &PolicyProfile::uniform(&rps), PlayerRef::Chance).unwrap();
    let srps = build_skill_rps(&SkillRpsParams::new(1, 1, 0.0).unwrap());
    let srps_hist =
        enumerate_terminal_histories(&srps, &PolicyProfile::uniform(&srps), PlayerRef::Chance).unwrap();
    let mass = |hs: &[gamevar::play::TerminalHistory]| {
        let mut m = HashMap::new();
        for h in hs {
            *m.entry(h.playthrough.rewards[0] as i64).or_insert(0.0) += h.eta;
        }
        m
    };
    let a = mass(&rps_hist);
    let b = mass(&srps_hist);
    let tv: f64 = [-1i64, 0, 1]
        .iter()
        .map(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
        / 2.0;
    assert!(tv < 1e-12, "total variation {tv}");
    // Support check.
    assert!(a.len() == 3 && b.len() == 3);
}

#[test]
fn skill_rps_alpha_one_is_a_coin_flip() {
    let tree = build_skill_rps(&SkillRpsParams::new(3, 2, 1.0).unwrap());
    let profile = random_profile(&tree, 5);
    let histories = enumerate_terminal_histories(&tree, &profile, PlayerRef::Chance).unwrap();
    let mut plus = 0.0;
    let mut minus = 0.0;
    for h in histories.iter().filter(|h| h.eta > 0.0) {
        match h.playthrough.rewards[0] as i64 {
            1 => plus += h.eta,
            -1 => minus += h.eta,
            _ => panic!("outcome must be ±1 on reachable paths"),
        }
    }
    assert!((plus - 0.5).abs() < 1e-12 && (minus - 0.5).abs() < 1e-12);
}

#[test]
fn threeway_matches_analytic_and_oracle_on_spot_params() {
    for (n, c, alpha) in [(2, 0, 0.5), (3, 1, 0.0), (3, 2, 0.25), (5, 5, 0.5), (1, 0, 0.75)] {
        let params = SkillRpsParams::new(n, c, alpha).unwrap();
        let tree = build_skill_rps(&params);
        let population = skill_rps_population(&params, &tree).unwrap();
        let exact = threeway_decompose(&tree, &population, 0, DEFAULT_CHANCE_CAP).unwrap();
        let oracle = oracle_threeway(&tree, &population, 0, 1 << 16, DEFAULT_CHANCE_CAP).unwrap();
        let analytic = analytic_threeway(&params);
        let tol = 1e-9 * exact.total.max(1.0);
        for (a, b, tag) in [
            (exact.skill, oracle.skill, "skill"),
            (exact.chance, oracle.chance, "chance"),
            (exact.remaining, oracle.remaining, "remaining"),
            (exact.total, oracle.total, "total"),
        ] {
            assert!((a - b).abs() <= tol, "{n},{c},{alpha} {tag}: exact {a} vs oracle {b}");
        }
        for (a, b, tag) in [
            (exact.skill, analytic.skill, "skill"),
            (exact.chance, analytic.chance, "chance"),
            (exact.remaining, analytic.remaining, "remaining"),
        ] {
            assert!((a - b).abs() <= tol, "{n},{c},{alpha} {tag}: exact {a} vs analytic {b}");
        }
        // The components decompose the actual outcome variance under uniform
        // play; for c = 0 that total is (1-α)(1-1/n) + α.
        let uniform_total = total_variance(&tree, &PolicyProfile::uniform(&tree), 0).unwrap();
        assert!((exact.total - uniform_total).abs() <= tol);
        if c == 0 {
            let nf = n as f64;
            let closed = (1.0 - alpha) * (1.0 - 1.0 / nf) + alpha;
            assert!((uniform_total - closed).abs() <= 1e-12);
        }
    }
}

#[test]
fn plugin_estimator_concentration() {
    let tree = build_figure1();
    let profile = PolicyProfile::uniform(&tree);
    let dataset = simulate_dataset(&tree, &profile, PlayerRef::Chance, 0, 50_000, 2024).unwrap();
    let tables = PluginTables::exact(&tree, &profile, PlayerRef::Chance, 0).unwrap();
    let pi = policy_for(&tree, &profile, PlayerRef::Chance);
    let r = plugin_estimate(&dataset, &tables, &pi, &tree).unwrap();
    assert!(
        (r.estimate - 0.5).abs() <= 5.0 * r.standard_error,
        "estimate {} se {}",
        r.estimate,
        r.standard_error
    );
}

#[test]
fn regression_agrees_with_plugin_when_every_info_state_is_visited() {
    // On chance-rps every playthrough visits the single chance info state, so
    // the saturated regression and the plug-in share a limit.
    let tree = build_chance_rps(None).unwrap();
    let profile = PolicyProfile::uniform(&tree);
    let nu = 200_000;
    let dataset = simulate_dataset(&tree, &profile, PlayerRef::Chance, 0, nu, 99).unwrap();
    let tables = PluginTables::exact(&tree, &profile, PlayerRef::Chance, 0).unwrap();
    let pi = policy_for(&tree, &profile, PlayerRef::Chance);
    let plugin = plugin_estimate(&dataset, &tables, &pi, &tree).unwrap();
    let spec = RegressionSpec {
        bootstrap: 0,
        ..Default::default()
    };
    let regression = regression_estimate(&tree, &dataset, &spec, &pi, 99).unwrap();
    let tol = 0.02 * plugin.estimate.abs().max(regression.estimate.abs()).max(0.01);
    assert!(
        (plugin.estimate - regression.estimate).abs() <= tol,
        "plugin {} vs regression {}",
        plugin.estimate,
        regression.estimate
    );
}

#[test]
fn random_games_round_trip_through_text() {
    let params = RandomGameParams::default();
    for seed in 100..120 {
        let tree = random_game(&params, seed);
        let doc = serialize_game(&tree);
        let back = parse_game(&doc).unwrap();
        assert_eq!(back, tree, "structural round trip, seed {seed}");
        assert_eq!(serialize_game(&back), doc, "byte round trip, seed {seed}");
    }
}

/// A fixed corpus of mutated games, each of which must be rejected.
#[test]
fn mutation_corpus_is_rejected() {
    // 1. Merge figure1's two chance info states into one (chance nodes must
    //    stay singletons).
    let g = build_figure1();
    let mut nodes: Vec<_> = g.nodes().map(|(_, n)| n.clone()).collect();
    let mut info_states: Vec<_> = g.info_states().map(|(_, s)| s.clone()).collect();
    let c0 = g.node_by_name("c0").unwrap();
    let c1 = g.node_by_name("c1").unwrap();
    let is_c0 = g.node(c0).info_state().unwrap();
    let is_c1 = g.node(c1).info_state().unwrap();
    info_states[is_c0.index()].members = vec![c0, c1];
    info_states[is_c1.index()].members = vec![];
    if let gamevar::game::NodeKind::Chance { info_state, .. } = &mut nodes[c1.index()].kind {
        *info_state = is_c0;
    }
    let mutated = GameTree::from_parts("m1", 2, nodes, info_states, g.root()).unwrap();
    assert!(!mutated.validate().is_empty());

    // 2. Split player 1's shared info state into singletons, relabel one
    //    node's actions, then force them back together: the action sets now
    //    differ.
    let g = build_figure1();
    let mut nodes: Vec<_> = g.nodes().map(|(_, n)| n.clone()).collect();
    let info_states: Vec<_> = g.info_states().map(|(_, s)| s.clone()).collect();
    let p2b = g.node_by_name("p2b").unwrap();
    nodes[p2b.index()].edges[0].action = "third".into();
    let mutated = GameTree::from_parts("m2", 2, nodes, info_states, g.root()).unwrap();
    let diags = mutated.validate();
    assert!(diags
        .iter()
        .any(|d| d.kind == DiagnosticKind::InfoStateConsistency));

    // 3. Kuhn with two first-round player-0 info states merged across cards:
    //    identical empty histories, same actions -- legal! Instead merge a
    //    first-round info state with a second-round one, which perfect recall
    //    forbids.
    let g = build_kuhn_poker();
    let mut nodes: Vec<_> = g.nodes().map(|(_, n)| n.clone()).collect();
    let mut info_states: Vec<_> = g.info_states().map(|(_, s)| s.clone()).collect();
    let n1 = g.node_by_name("1_JQ").unwrap(); // actions check/bet
    let target_is = g.info_state_by_name("1Jcb").unwrap(); // actions fold/call
    let source_is = g.node(n1).info_state().unwrap();
    // Move one second-round node into the first-round info state, relabeled
    // so only perfect recall trips.
    let moved = info_states[target_is.index()].members[0];
    nodes[moved.index()].edges[0].action = "check".into();
    nodes[moved.index()].edges[1].action = "bet".into();
    info_states[target_is.index()].members.remove(0);
    info_states[source_is.index()].members.push(moved);
    if let gamevar::game::NodeKind::Decision { info_state, .. } = &mut nodes[moved.index()].kind {
        *info_state = source_is;
    }
    let mutated = GameTree::from_parts("m3", 2, nodes, info_states, g.root()).unwrap();
    let diags = mutated.validate();
    assert!(
        diags.iter().any(|d| d.kind == DiagnosticKind::PerfectRecall),
        "{diags:?}"
    );

    // 4. Chance distribution out of tolerance.
    let g = build_figure1();
    let mut nodes: Vec<_> = g.nodes().map(|(_, n)| n.clone()).collect();
    let info_states: Vec<_> = g.info_states().map(|(_, s)| s.clone()).collect();
    let c0 = g.node_by_name("c0").unwrap();
    if let gamevar::game::NodeKind::Chance { probs, .. } = &mut nodes[c0.index()].kind {
        probs[0] = 0.6;
        probs[1] = 0.6;
    }
    let mutated = GameTree::from_parts("m4", 2, nodes, info_states, g.root()).unwrap();
    assert!(mutated
        .validate()
        .iter()
        .any(|d| d.kind == DiagnosticKind::ChanceDistribution));

    // 5. Builtins themselves stay accepted.
    for g in builtins_for_tests() {
        assert!(g.validate().is_empty(), "{}", g.name());
    }
}

#[test]
fn unreachable_info_states_are_flagged_and_excluded() {
    // Make player 0's `right` action probability zero: the subtree under it
    // becomes unreachable for player 1.
    let g = build_figure1();
    let u1 = g.info_state_by_name("u1").unwrap();
    let mut probs = HashMap::new();
    probs.insert(u1, vec![1.0, 0.0]);
    let p0 = gamevar::BehavioralPolicy::new(&g, PlayerRef::Player(0), probs).unwrap();
    let p1 = gamevar::BehavioralPolicy::uniform(&g, PlayerRef::Player(1));
    let profile = PolicyProfile::new(&g, vec![p0, p1]).unwrap();
    // Player 1's info state u2 is still reachable (via left), so pick a game
    // state that is not: give chance zero mass instead.
    let stats = gamevar::play::reach_and_values(&g, &profile, PlayerRef::Player(1), 0).unwrap();
    assert!(stats.iter().all(|s| s.values.is_some()));

    // Chance zero mass on the right branch makes c1 unreachable.
    let mut doc = serialize_game(&g);
    doc = doc.replace(
        "chance c0 left:5.0000000000000000e-1 right:5.0000000000000000e-1",
        "chance c0 left:1.0 right:0.0",
    );
    let g2 = parse_game(&doc).unwrap();
    let profile = PolicyProfile::uniform(&g2);
    let stats = gamevar::play::reach_and_values(&g2, &profile, PlayerRef::Chance, 0).unwrap();
    let c1 = g2.info_state_by_name("c1").unwrap();
    let s = stats.iter().find(|s| s.info_state == c1).unwrap();
    assert_eq!(s.eta, 0.0);
    assert!(s.values.is_none());
    // Excluded from the explained sum without a hiccup.
    let report = explained_variance(&g2, &profile, 0, PlayerRef::Chance).unwrap();
    assert!(report.per_info_state.iter().all(|(u, _)| *u != c1));
}

#[test]
fn enumeration_cap_errors_are_typed() {
    let tree = build_kuhn_poker();
    let profile = PolicyProfile::uniform(&tree);
    let err = oracle_components(&tree, &profile, 0, PlayerRef::Player(0), 10).unwrap_err();
    assert!(matches!(err, Error::EnumerationTooLarge { .. }));
}
