//! Output envelopes: a flat key-value text form and a stable-key-ordered
//! JSON form, both carrying tool version, seed, and an input digest.

use clap::ValueEnum;
use serde::Serialize;
use sha2::{Digest, Sha256};

use gamevar::estimate::EstimateReport;
use gamevar::exact::{DecompositionReport, ThreeWayReport};
use gamevar::game::GameTree;

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Serialize)]
pub struct Meta {
    pub tool_version: String,
    pub seed: Option<u64>,
    pub input_digest: String,
}

impl Meta {
    pub fn new(seed: Option<u64>, input_bytes: &[u8]) -> Meta {
        let digest = Sha256::digest(input_bytes);
        let mut hex = String::with_capacity(64);
        for b in digest {
            hex.push_str(&format!("{b:02x}"));
        }
        Meta {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            input_digest: format!("sha256:{hex}"),
        }
    }
}

#[derive(Serialize)]
#[serde(untagged)]
pub enum Report {
    Decomposition(DecompositionOut),
    ThreeWay(ThreeWayOut),
    Estimate(EstimateOut),
}

#[derive(Serialize)]
pub struct DecompositionOut {
    pub target: usize,
    pub conditioning: String,
    pub total_variance: f64,
    pub explained: f64,
    pub residual: f64,
    pub explained_ratio: f64,
    pub per_info_state: Vec<InfoStateContribution>,
}

#[derive(Serialize)]
pub struct InfoStateContribution {
    pub info_state: String,
    pub contribution: f64,
}

#[derive(Serialize)]
pub struct ThreeWayOut {
    pub skill: f64,
    pub chance: f64,
    pub remaining: f64,
    pub total: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic: Option<ThreeWayColumns>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_rel_deviation: Option<f64>,
}

#[derive(Serialize)]
pub struct ThreeWayColumns {
    pub skill: f64,
    pub chance: f64,
    pub remaining: f64,
    pub total: f64,
}

#[derive(Serialize)]
pub struct EstimateOut {
    pub method: String,
    pub estimate: f64,
    pub standard_error: f64,
    pub nu: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_score: Option<f64>,
}

pub struct Envelope {
    pub meta: Meta,
    pub report: Report,
}

impl Envelope {
    pub fn print(&self, format: Format) {
        match format {
            Format::Json => {
                #[derive(Serialize)]
                struct Doc<'a> {
                    meta: &'a Meta,
                    report: &'a Report,
                }
                let doc = Doc {
                    meta: &self.meta,
                    report: &self.report,
                };
                println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
            }
            Format::Text => {
                println!("tool_version = {}", self.meta.tool_version);
                match self.meta.seed {
                    Some(s) => println!("seed = {s}"),
                    None => println!("seed = none"),
                }
                println!("input_digest = {}", self.meta.input_digest);
                match &self.report {
                    Report::Decomposition(r) => {
                        println!("target = {}", r.target);
                        println!("conditioning = {}", r.conditioning);
                        println!("total_variance = {}", r.total_variance);
                        println!("explained = {}", r.explained);
                        println!("residual = {}", r.residual);
                        println!("explained_ratio = {}", r.explained_ratio);
                        for c in &r.per_info_state {
                            println!("contribution.{} = {}", c.info_state, c.contribution);
                        }
                    }
                    Report::ThreeWay(r) => {
                        println!("skill = {}", r.skill);
                        println!("chance = {}", r.chance);
                        println!("remaining = {}", r.remaining);
                        println!("total = {}", r.total);
                        if let Some(a) = &r.analytic {
                            println!("analytic.skill = {}", a.skill);
                            println!("analytic.chance = {}", a.chance);
                            println!("analytic.remaining = {}", a.remaining);
                            println!("analytic.total = {}", a.total);
                        }
                        if let Some(d) = r.max_rel_deviation {
                            println!("max_rel_deviation = {d}");
                        }
                    }
                    Report::Estimate(r) => {
                        println!("method = {}", r.method);
                        println!("estimate = {}", r.estimate);
                        println!("standard_error = {}", r.standard_error);
                        println!("nu = {}", r.nu);
                        if let Some(e) = r.exact {
                            println!("exact = {e}");
                        }
                        if let Some(z) = r.z_score {
                            println!("z_score = {z}");
                        }
                    }
                }
            }
        }
    }
}

pub fn decomposition(tree: &GameTree, r: &DecompositionReport) -> Report {
    Report::Decomposition(DecompositionOut {
        target: r.target,
        conditioning: r.conditioning.to_string(),
        total_variance: r.total_variance,
        explained: r.explained,
        residual: r.residual,
        explained_ratio: r.explained_ratio,
        per_info_state: r
            .per_info_state
            .iter()
            .map(|(u, c)| InfoStateContribution {
                info_state: tree.info_state(*u).name.clone(),
                contribution: *c,
            })
            .collect(),
    })
}

pub fn threeway(r: &ThreeWayReport, analytic: Option<&ThreeWayReport>) -> Report {
    let columns = analytic.map(|a| ThreeWayColumns {
        skill: a.skill,
        chance: a.chance,
        remaining: a.remaining,
        total: a.total,
    });
    let max_rel_deviation = analytic.map(|a| {
        let scale = r.total.abs().max(1.0);
        [
            (r.skill - a.skill).abs(),
            (r.chance - a.chance).abs(),
            (r.remaining - a.remaining).abs(),
            (r.total - a.total).abs(),
        ]
        .into_iter()
        .fold(0.0f64, f64::max)
            / scale
    });
    Report::ThreeWay(ThreeWayOut {
        skill: r.skill,
        chance: r.chance,
        remaining: r.remaining,
        total: r.total,
        analytic: columns,
        max_rel_deviation,
    })
}

pub fn estimate(r: &EstimateReport, method: &str, exact: Option<f64>, z_score: Option<f64>) -> Report {
    Report::Estimate(EstimateOut {
        method: method.to_string(),
        estimate: r.estimate,
        standard_error: r.standard_error,
        nu: r.nu,
        exact,
        z_score,
    })
}
