//! Variance decomposition of game outcomes for finite extensive-form games.
//!
//! The library represents games as explicit trees with chance nodes and
//! information states, and splits the variance of one player's outcome into
//! the part explained by any player's actions (including the chance player's)
//! and the rest. Everything is computed three ways and cross-checked:
//!
//! * [`exact`] evaluates the per-info-state closed form by tree traversal;
//! * [`oracle`] recomputes the same quantities from their definitions by
//!   brute-force enumeration of joint action assignments;
//! * [`estimate`] estimates them from sampled or imported playthroughs
//!   (plug-in and regression estimators).
//!
//! [`skillrps`] carries the closed-form three-way skill/chance/remaining
//! split for the SkillRPS family, and [`text`] a line-oriented file format
//! for games and policies.
//!
//! Stochastic operations take explicit seeds and derive one ChaCha8 stream
//! per work item, so results are bit-identical no matter how many threads the
//! `parallel` feature (on by default) uses.

pub mod builtins;
pub mod error;
pub mod estimate;
pub mod exact;
pub mod exec;
pub mod game;
pub mod oracle;
pub mod play;
pub mod policy;
pub mod skillrps;
pub mod text;

pub use error::Error;
pub use game::{
    Diagnostic, DiagnosticKind, GameTree, GameTreeBuilder, InfoState, InfoStateId, Node, NodeId,
    NodeKind, PlayerRef,
};
pub use play::{sample_playthrough, Playthrough, Sampler};
pub use policy::{BehavioralPolicy, PolicyProfile};
