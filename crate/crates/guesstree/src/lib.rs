//! Tools for turning classical decision trees that carry a *guess coloring*
//! (every branch edge is either the guessed "black" continuation or a "red"
//! surprise) into explicitly verified objects from quantum query complexity:
//!
//! * feasible solutions of the dual adversary bound, checked pair-by-pair on
//!   enumerable domains,
//! * span programs with exact positive/negative witnesses, and
//! * query-complexity upper bounds of the `O(sqrt(G * T))` shape, where `T`
//!   is the tree depth and `G` the worst-case number of red edges.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] — query programs, transcripts, path evaluation, validation.
//! * [`metrics`] — per-path and per-tree statistics (`T`, `G`, generation
//!   depths), expectations over randomized tree families.
//! * [`family`] — the cross vector family with `<mu_i, nu_j> = 1 - delta_ij`.
//! * [`certificate`] — dual adversary vectors, feasibility checks, objective
//!   values, weight schedules, and a literal dense-vector oracle.
//! * [`ensemble`] — lifting per-member certificates to randomized families
//!   (state-generation constraints against a Gram target).
//! * [`span`] — the span-program compilation with exact witness checks.
//! * [`catalog`] — ready-made list, order-statistics, and graph problems.
//! * [`runner`] / [`report`] — the reporting layer shared with the CLI.

pub mod catalog;
pub mod certificate;
pub mod ensemble;
pub mod family;
pub mod metrics;
pub mod model;
pub mod report;
pub mod runner;
pub mod span;
pub mod treefile;

pub use certificate::{
    default_weights, generation_weights, Certificate, FamilyMode, WeightSchedule,
};
pub use ensemble::EnsembleCertificate;
pub use family::CrossFamily;
pub use metrics::{path_stats, tree_metrics, PathStats, TreeMetrics};
pub use model::{
    evaluate_path, Block, Color, Driver, FunctionSpec, Label, Partition, QuerySink, Transcript,
    TreeError, TreeProgram, VertexId,
};
pub use span::SpanProgram;
