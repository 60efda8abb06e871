//! Modelling toolkit for design-research Reference Models and Impact Models.
//!
//! * [`model`]: typed factor nodes, signed causal links and the evidence
//!   (assumptions, references, experiential input) attached to each link.
//! * [`layout`]: layered layout with cycle handling, crossing reduction and
//!   seeding from a previous layout.
//! * [`store`]: canonical JSON documents, DOT export and SVG rendering.
//! * [`search`]: token-prefix search over labels, notes, tags and evidence.
//! * [`metrics`]: structure counts, session-log effort measures, layout
//!   churn and reduction percentages.
//! * [`service`]: HTTP API over a directory of model files.
//! * [`cli`]: the `dreams` command-line front end.
//!
//! Runnable walkthroughs of each capability live in `examples/`.

pub mod cli;
pub mod error;
pub mod ids;
pub mod layout;
pub mod metrics;
pub mod model;
pub mod search;
pub mod service;
pub mod store;

pub use error::{Error, Result};
pub use layout::{layout, LayeredLayout, LayoutConfig};
pub use model::{
    CausalLink, EvidenceItem, EvidenceKind, FactorNode, ModelDocument, ModelKind, NodeKind, Polarity,
};
