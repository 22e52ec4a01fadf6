//! Connotation frames for verb predicates.
//!
//! A connotation frame assigns one of three polarities (`-`, `=`, `+`) to
//! nine typed relations of a verb: the writer's perspective on the theme
//! and agent, the agent's perspective on the theme, and the effect, value
//! and mental state of both agent and theme.
//!
//! The crate provides
//!
//! * aspect-level prediction with one softmax classifier per relation over
//!   word embeddings ([`maxent`]),
//! * a tree-shaped factor graph coupling the nine relations, trained
//!   piecewise and decoded with exact sum-product ([`factor_graph`],
//!   [`frame_model`]),
//! * reference systems ([`baselines`]), crowd-label aggregation and
//!   agreement ([`annotations`]), metrics ([`evaluation`]), and corpus-level
//!   scoring of news tuples ([`corpus`]).

pub mod annotations;
pub mod baselines;
pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod evaluation;
pub mod factor_graph;
pub mod frame_model;
pub mod lexicon;
pub mod maxent;
pub mod optim;
pub mod selfcheck;
pub mod types;

pub use error::{Error, Result};
pub use types::{parse_polarity, validate_frame, AspectId, ConnotationFrame, FrameIssue, Polarity, ResponseScale};
