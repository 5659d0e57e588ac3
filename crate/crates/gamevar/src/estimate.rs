//! Sampling-based estimators of the explained variance component: the
//! plug-in estimator over known value tables, its empirical visit-probability
//! variant, and the regression estimator fit on one-hot action features.

use std::collections::HashMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::Error;
use crate::exec::{self, stream_rng, StreamDomain};
use crate::game::{GameTree, InfoStateId, PlayerRef};
use crate::play::{reach_and_values, Sampler};
use crate::policy::{policy_for, BehavioralPolicy, PolicyProfile};
use crate::text::ParseError;

/// One observed playthrough projected to the conditioning player: the visited
/// info states with the actions taken there, and the target player's outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct PlaythroughRecord {
    /// `(info state, canonical action index)` in visit order.
    pub trace: Vec<(InfoStateId, usize)>,
    pub outcome: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    Simulated { seed: u64 },
    Imported { path: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlaythroughDataset {
    pub conditioning: PlayerRef,
    pub records: Vec<PlaythroughRecord>,
    pub provenance: Provenance,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimateMethod {
    Plugin,
    PluginEmpiricalEta,
    Regression,
}

#[derive(Clone, Debug)]
pub struct EstimateReport {
    pub estimate: f64,
    pub standard_error: f64,
    pub nu: usize,
    pub method: EstimateMethod,
}

/// Simulates `nu` seeded playthroughs and projects them for `conditioning`.
/// Playthrough `k` always uses stream `(seed, k)`, so the result does not
/// depend on how the work is scheduled.
pub fn simulate_dataset(
    tree: &GameTree,
    profile: &PolicyProfile,
    conditioning: PlayerRef,
    target: usize,
    nu: usize,
    seed: u64,
) -> Result<PlaythroughDataset, Error> {
    simulate_impl(tree, profile, conditioning, target, nu, seed, true)
}

/// Sequential reference implementation of [`simulate_dataset`]; results are
/// identical.
pub fn simulate_dataset_seq(
    tree: &GameTree,
    profile: &PolicyProfile,
    conditioning: PlayerRef,
    target: usize,
    nu: usize,
    seed: u64,
) -> Result<PlaythroughDataset, Error> {
    simulate_impl(tree, profile, conditioning, target, nu, seed, false)
}

fn simulate_impl(
    tree: &GameTree,
    profile: &PolicyProfile,
    conditioning: PlayerRef,
    target: usize,
    nu: usize,
    seed: u64,
    parallel: bool,
) -> Result<PlaythroughDataset, Error> {
    if nu == 0 {
        return Err(Error::InvalidParameter("nu must be >= 1".into()));
    }
    if target >= tree.player_count() {
        return Err(Error::UnknownPlayer(target.to_string()));
    }
    if let PlayerRef::Player(i) = conditioning {
        if i >= tree.player_count() {
            return Err(Error::UnknownPlayer(i.to_string()));
        }
    }
    let sampler = Sampler::new(tree, profile)?;
    let one = |k: usize| {
        let mut rng = stream_rng(seed, StreamDomain::Playthrough, k as u64);
        let p = sampler.sample(&mut rng);
        PlaythroughRecord {
            trace: p.trace(conditioning).to_vec(),
            outcome: p.rewards[target],
        }
    };
    let records = if parallel {
        exec::map_indexed(nu, one)
    } else {
        exec::map_indexed_seq(nu, one)
    };
    Ok(PlaythroughDataset {
        conditioning,
        records,
        provenance: Provenance::Simulated { seed },
    })
}

/// Value tables the plug-in estimator reads: q(u, ·), v(u), and η⁻ⁱ(u) per
/// info state of the conditioning player.
#[derive(Clone, Debug, Default)]
pub struct PluginTables {
    pub q: HashMap<InfoStateId, Vec<f64>>,
    pub v: HashMap<InfoStateId, f64>,
    pub eta_others: HashMap<InfoStateId, f64>,
}

impl PluginTables {
    /// Exact tables by tree evaluation; only reachable info states get
    /// entries (unreachable ones cannot appear in any trace sampled under the
    /// same profile).
    pub fn exact(
        tree: &GameTree,
        profile: &PolicyProfile,
        conditioning: PlayerRef,
        target: usize,
    ) -> Result<Self, Error> {
        let stats = reach_and_values(tree, profile, conditioning, target)?;
        let mut tables = PluginTables::default();
        for s in stats {
            if let Some(values) = s.values {
                tables.q.insert(s.info_state, values.action_values);
                tables.v.insert(s.info_state, values.value);
                tables.eta_others.insert(s.info_state, s.eta_others);
            }
        }
        Ok(tables)
    }

    /// Same q/v tables with the η⁻ⁱ column replaced, e.g. by
    /// [`EmpiricalEta::eta_others_hat`].
    pub fn with_eta_others(mut self, eta_others: HashMap<InfoStateId, f64>) -> Self {
        self.eta_others = eta_others;
        self
    }
}

/// The plug-in estimate: the dataset average over records of
/// Σ_l (Σ_a q(U_l,a)² πⁱ(a|U_l) − v(U_l)²) η⁻ⁱ(U_l), with the per-record
/// dispersion as its standard error.
pub fn plugin_estimate(
    dataset: &PlaythroughDataset,
    tables: &PluginTables,
    pi: &BehavioralPolicy,
    tree: &GameTree,
) -> Result<EstimateReport, Error> {
    if dataset.records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut phi = vec![0.0f64; dataset.records.len()];
    for (k, record) in dataset.records.iter().enumerate() {
        let mut acc = 0.0;
        for (u, _a) in &record.trace {
            let name = || tree.info_state(*u).name.clone();
            let q = tables.q.get(u).ok_or_else(|| Error::MissingTableEntry(name()))?;
            let v = tables.v.get(u).ok_or_else(|| Error::MissingTableEntry(name()))?;
            let eta_others = tables
                .eta_others
                .get(u)
                .ok_or_else(|| Error::MissingTableEntry(name()))?;
            let probs = pi.probs(*u).ok_or_else(|| Error::PolicyCoverage {
                player: pi.owner().to_string(),
                info_state: name(),
            })?;
            let q_sq: f64 = q
                .iter()
                .zip(probs)
                .filter(|(_, p)| **p > 0.0)
                .map(|(q, p)| q * q * p)
                .sum();
            acc += (q_sq - v * v) * eta_others;
        }
        phi[k] = acc;
    }
    let nu = phi.len();
    let estimate = phi.iter().sum::<f64>() / nu as f64;
    let standard_error = if nu > 1 {
        let var = phi.iter().map(|x| (x - estimate) * (x - estimate)).sum::<f64>() / (nu - 1) as f64;
        (var / nu as f64).sqrt()
    } else {
        0.0
    };
    Ok(EstimateReport {
        estimate,
        standard_error,
        nu,
        method: EstimateMethod::Plugin,
    })
}

/// Empirical visit probabilities and the derived η̂⁻ⁱ(u) = η̂(u)/πⁱ(u) table.
/// Unobserved info states map to zero. Known to overestimate the visit
/// probability of rarely seen info states.
#[derive(Clone, Debug, Default)]
pub struct EmpiricalEta {
    pub eta_hat: HashMap<InfoStateId, f64>,
    pub eta_others_hat: HashMap<InfoStateId, f64>,
    /// Observed info states whose own-history probability is zero under the
    /// supplied policy; η̂⁻ⁱ is undefined there.
    pub flagged: Vec<InfoStateId>,
}

impl EmpiricalEta {
    pub fn eta(&self, u: InfoStateId) -> f64 {
        self.eta_hat.get(&u).copied().unwrap_or(0.0)
    }
}

pub fn empirical_eta(
    dataset: &PlaythroughDataset,
    tree: &GameTree,
    pi: &BehavioralPolicy,
) -> Result<EmpiricalEta, Error> {
    if dataset.records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let nu = dataset.records.len() as f64;
    let mut counts: HashMap<InfoStateId, f64> = HashMap::new();
    for record in &dataset.records {
        for (u, _a) in &record.trace {
            *counts.entry(*u).or_insert(0.0) += 1.0;
        }
    }
    let mut out = EmpiricalEta::default();
    let mut observed: Vec<InfoStateId> = counts.keys().copied().collect();
    observed.sort();
    for u in observed {
        let eta_hat = counts[&u] / nu;
        out.eta_hat.insert(u, eta_hat);
        let own = pi.own_reach(tree, u);
        if own > 0.0 {
            out.eta_others_hat.insert(u, eta_hat / own);
        } else {
            out.flagged.push(u);
        }
    }
    Ok(out)
}

/// Plug-in estimate with exact q/v tables but the empirical η̂⁻ⁱ column.
pub fn plugin_estimate_empirical(
    dataset: &PlaythroughDataset,
    tree: &GameTree,
    profile: &PolicyProfile,
    target: usize,
) -> Result<(EstimateReport, EmpiricalEta), Error> {
    let pi = policy_for(tree, profile, dataset.conditioning);
    let empirical = empirical_eta(dataset, tree, &pi)?;
    if let Some(u) = empirical.flagged.first() {
        return Err(Error::ZeroOwnReach(tree.info_state(*u).name.clone()));
    }
    let tables = PluginTables::exact(tree, profile, dataset.conditioning, target)?
        .with_eta_others(empirical.eta_others_hat.clone());
    let mut report = plugin_estimate(dataset, &tables, &pi, tree)?;
    report.method = EstimateMethod::PluginEmpiricalEta;
    Ok((report, empirical))
}

/// Feature layout of the regression model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegressionKind {
    /// Intercept plus one indicator per (info state, action); rank-deficient
    /// by one per info state, which the ridge absorbs.
    SaturatedTabular,
    /// Intercept plus indicators with each info state's first action dropped
    /// (full-rank dummy coding). Same fitted values as the ridge vanishes.
    LinearOneHot,
}

#[derive(Clone, Copy, Debug)]
pub struct RegressionSpec {
    pub kind: RegressionKind,
    pub ridge: f64,
    /// Bootstrap resamples for the standard error; 0 disables it.
    pub bootstrap: usize,
}

impl Default for RegressionSpec {
    fn default() -> Self {
        RegressionSpec {
            kind: RegressionKind::SaturatedTabular,
            ridge: 1e-8,
            bootstrap: 200,
        }
    }
}

struct FeatureLayout {
    infosets: Vec<InfoStateId>,
    offsets: Vec<usize>,
    width: usize,
    drop_first: bool,
}

impl FeatureLayout {
    fn new(tree: &GameTree, conditioning: PlayerRef, kind: RegressionKind) -> Self {
        let infosets = tree.owned_info_states(conditioning);
        let drop_first = kind == RegressionKind::LinearOneHot;
        let mut offsets = Vec::with_capacity(infosets.len());
        let mut width = 1; // intercept
        for u in &infosets {
            offsets.push(width);
            let k = tree.info_state(*u).actions.len();
            width += if drop_first { k.saturating_sub(1) } else { k };
        }
        FeatureLayout {
            infosets,
            offsets,
            width,
            drop_first,
        }
    }

    /// Active column indices for a full assignment (one action per owned info
    /// state). Column 0 is the intercept.
    fn columns(&self, assignment: &[usize], out: &mut Vec<usize>) {
        out.clear();
        out.push(0);
        for (slot, &a) in assignment.iter().enumerate() {
            if self.drop_first {
                if a > 0 {
                    out.push(self.offsets[slot] + a - 1);
                }
            } else {
                out.push(self.offsets[slot] + a);
            }
        }
    }
}

/// Completes a record's trace into a full assignment, sampling actions for
/// unvisited info states from πⁱ(·|u) in canonical info-state order.
/// Outcomes are never touched.
fn impute_assignment(
    layout: &FeatureLayout,
    pi_dists: &[Vec<f64>],
    record: &PlaythroughRecord,
    slot_of: &HashMap<InfoStateId, usize>,
    rng: &mut impl Rng,
    out: &mut [usize],
) {
    const UNSET: usize = usize::MAX;
    out.fill(UNSET);
    for (u, a) in &record.trace {
        out[slot_of[u]] = *a;
    }
    for slot in 0..layout.infosets.len() {
        if out[slot] == UNSET {
            out[slot] = sample_from(&pi_dists[slot], rng);
        }
    }
}

fn sample_from(probs: &[f64], rng: &mut impl Rng) -> usize {
    let x: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if x < acc {
            return i;
        }
    }
    probs.iter().rposition(|p| *p > 0.0).unwrap_or(0)
}

/// Fits the one-hot least-squares model on (possibly resampled) records and
/// returns the population variance of its fitted values.
fn fit_and_variance(
    layout: &FeatureLayout,
    assignments: &[Vec<usize>],
    outcomes: &[f64],
    ridge: f64,
) -> Result<f64, Error> {
    let p = layout.width;
    let mut xtx = DMatrix::<f64>::zeros(p, p);
    let mut xty = DVector::<f64>::zeros(p);
    let mut cols = Vec::with_capacity(layout.infosets.len() + 1);
    for (assignment, y) in assignments.iter().zip(outcomes) {
        layout.columns(assignment, &mut cols);
        for &i in &cols {
            for &j in &cols {
                xtx[(i, j)] += 1.0;
            }
            xty[i] += *y;
        }
    }
    for i in 0..p {
        xtx[(i, i)] += ridge;
    }
    let lu = xtx.lu();
    if ridge == 0.0 {
        // Saturated codings are rank-deficient; without a ridge the pivots
        // collapse to rounding residue.
        let u = lu.u();
        let mut dmax = 0.0f64;
        let mut dmin = f64::INFINITY;
        for i in 0..p {
            let d = u[(i, i)].abs();
            dmax = dmax.max(d);
            dmin = dmin.min(d);
        }
        if !(dmin > dmax * 1e-12) {
            return Err(Error::SingularDesign);
        }
    }
    let theta = match lu.solve(&xty) {
        Some(t) => t,
        None => return Err(Error::SingularDesign),
    };
    let n = assignments.len() as f64;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for assignment in assignments {
        layout.columns(assignment, &mut cols);
        let f: f64 = cols.iter().map(|&i| theta[i]).sum();
        sum += f;
        sum_sq += f * f;
    }
    let mean = sum / n;
    Ok((sum_sq / n - mean * mean).max(0.0))
}

/// The regression estimator: impute unvisited info states, fit the one-hot
/// model by ridge-regularized normal equations, and report the empirical
/// variance of the fitted values. The standard error is a seeded
/// nonparametric bootstrap that re-imputes unvisited slots in every resample.
pub fn regression_estimate(
    tree: &GameTree,
    dataset: &PlaythroughDataset,
    spec: &RegressionSpec,
    pi: &BehavioralPolicy,
    seed: u64,
) -> Result<EstimateReport, Error> {
    regression_impl(tree, dataset, spec, pi, seed, true)
}

/// Sequential reference implementation of [`regression_estimate`]; results
/// are bit-identical.
pub fn regression_estimate_seq(
    tree: &GameTree,
    dataset: &PlaythroughDataset,
    spec: &RegressionSpec,
    pi: &BehavioralPolicy,
    seed: u64,
) -> Result<EstimateReport, Error> {
    regression_impl(tree, dataset, spec, pi, seed, false)
}

fn regression_impl(
    tree: &GameTree,
    dataset: &PlaythroughDataset,
    spec: &RegressionSpec,
    pi: &BehavioralPolicy,
    seed: u64,
    parallel: bool,
) -> Result<EstimateReport, Error> {
    if dataset.records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !spec.ridge.is_finite() || spec.ridge < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "ridge must be finite and >= 0, got {}",
            spec.ridge
        )));
    }
    if pi.owner() != dataset.conditioning {
        return Err(Error::InvalidParameter(format!(
            "policy owner {} does not match dataset conditioning {}",
            pi.owner(),
            dataset.conditioning
        )));
    }
    let layout = FeatureLayout::new(tree, dataset.conditioning, spec.kind);
    let slot_of: HashMap<InfoStateId, usize> = layout
        .infosets
        .iter()
        .enumerate()
        .map(|(i, u)| (*u, i))
        .collect();
    let pi_dists: Vec<Vec<f64>> = layout
        .infosets
        .iter()
        .map(|u| {
            pi.probs(*u)
                .map(<[f64]>::to_vec)
                .ok_or_else(|| Error::PolicyCoverage {
                    player: pi.owner().to_string(),
                    info_state: tree.info_state(*u).name.clone(),
                })
        })
        .collect::<Result<_, _>>()?;
    for record in &dataset.records {
        for (u, _) in &record.trace {
            if !slot_of.contains_key(u) {
                return Err(Error::MissingTableEntry(tree.info_state(*u).name.clone()));
            }
        }
    }
    let nu = dataset.records.len();
    let slots = layout.infosets.len();

    // Step 2: one imputation stream per record.
    let impute_one = |k: usize| {
        let mut rng = stream_rng(seed, StreamDomain::Imputation, k as u64);
        let mut assignment = vec![0usize; slots];
        impute_assignment(&layout, &pi_dists, &dataset.records[k], &slot_of, &mut rng, &mut assignment);
        assignment
    };
    let assignments: Vec<Vec<usize>> = if parallel {
        exec::map_indexed(nu, impute_one)
    } else {
        exec::map_indexed_seq(nu, impute_one)
    };
    let outcomes: Vec<f64> = dataset.records.iter().map(|r| r.outcome).collect();

    // Steps 3-4.
    let estimate = fit_and_variance(&layout, &assignments, &outcomes, spec.ridge)?;

    // Bootstrap standard error; each resample draws its indices and fresh
    // imputations from its own stream.
    let standard_error = if spec.bootstrap >= 2 {
        let resample_one = |b: usize| -> Result<f64, Error> {
            let mut rng = stream_rng(seed, StreamDomain::Bootstrap, b as u64);
            let mut res_assignments = Vec::with_capacity(nu);
            let mut res_outcomes = Vec::with_capacity(nu);
            let mut assignment = vec![0usize; slots];
            for _ in 0..nu {
                let k = rng.random_range(0..nu);
                impute_assignment(
                    &layout,
                    &pi_dists,
                    &dataset.records[k],
                    &slot_of,
                    &mut rng,
                    &mut assignment,
                );
                res_assignments.push(assignment.clone());
                res_outcomes.push(dataset.records[k].outcome);
            }
            fit_and_variance(&layout, &res_assignments, &res_outcomes, spec.ridge)
        };
        let resamples: Vec<Result<f64, Error>> = if parallel {
            exec::map_indexed(spec.bootstrap, resample_one)
        } else {
            exec::map_indexed_seq(spec.bootstrap, resample_one)
        };
        let mut values = Vec::with_capacity(spec.bootstrap);
        for r in resamples {
            values.push(r?);
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>()
            / (values.len() - 1) as f64;
        var.sqrt()
    } else {
        0.0
    };

    Ok(EstimateReport {
        estimate,
        standard_error,
        nu,
        method: EstimateMethod::Regression,
    })
}

/// Parses a playthrough log: one record per line,
/// `outcome:<real> <infoset>=<action> ...`, `#` comments allowed.
pub fn parse_playthrough_log(
    text: &str,
    tree: &GameTree,
    conditioning: PlayerRef,
) -> Result<Vec<PlaythroughRecord>, ParseError> {
    let mut records = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let mut toks = line.split_whitespace();
        let Some(first) = toks.next() else { continue };
        let outcome = first
            .strip_prefix("outcome:")
            .ok_or_else(|| ParseError {
                line: lineno,
                col: None,
                message: format!("expected `outcome:<real>`, got `{first}`"),
            })?
            .parse::<f64>()
            .map_err(|_| ParseError {
                line: lineno,
                col: None,
                message: format!("invalid outcome in `{first}`"),
            })?;
        if !outcome.is_finite() {
            return Err(ParseError {
                line: lineno,
                col: None,
                message: "non-finite outcome".into(),
            });
        }
        let mut trace = Vec::new();
        for tok in toks {
            let (iset, action) = tok.split_once('=').ok_or_else(|| ParseError {
                line: lineno,
                col: None,
                message: format!("expected `<infoset>=<action>`, got `{tok}`"),
            })?;
            let u = tree.info_state_by_name(iset).ok_or_else(|| ParseError {
                line: lineno,
                col: None,
                message: format!("unknown info state `{iset}`"),
            })?;
            let is = tree.info_state(u);
            if is.owner != conditioning {
                return Err(ParseError {
                    line: lineno,
                    col: None,
                    message: format!(
                        "info state `{iset}` belongs to {}, not {}",
                        is.owner, conditioning
                    ),
                });
            }
            let a = is.action_index(action).ok_or_else(|| ParseError {
                line: lineno,
                col: None,
                message: format!("unknown action `{action}` at info state `{iset}`"),
            })?;
            trace.push((u, a));
        }
        records.push(PlaythroughRecord { trace, outcome });
    }
    Ok(records)
}

/// Reads and validates a playthrough log file.
pub fn import_dataset(
    path: &Path,
    tree: &GameTree,
    conditioning: PlayerRef,
) -> Result<PlaythroughDataset, Error> {
    let text = std::fs::read_to_string(path)?;
    let records = parse_playthrough_log(&text, tree, conditioning)?;
    Ok(PlaythroughDataset {
        conditioning,
        records,
        provenance: Provenance::Imported {
            path: path.display().to_string(),
        },
    })
}
