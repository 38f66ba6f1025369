//! Pipe sizing for gravity-fed water distribution networks.
//!
//! A network is read from an EPANET-style instance file ([`io`]), every
//! candidate assignment of pipe types is checked by a steady-state
//! Hazen-Williams solver over all demand periods ([`hydraulics`]), and an
//! iterated local search looks for the cheapest feasible assignment
//! ([`ils`]).

pub mod error;
pub mod experiment;
pub mod graph;
pub mod hydraulics;
pub mod ils;
pub mod io;
pub mod linalg;
pub mod network;
pub mod synth;

pub use error::{HydraulicError, ModelError, ParseError, SearchError};
pub use hydraulics::{
    HydraulicState, PeriodState, Simulator, SolverConfig, Validator, Verdict, Violation, ViolationKind,
};
pub use ils::{optimize, Constraints, Costed, Evaluator, SearchParams, SearchStats, Variant};
pub use io::{parse_instance, parse_type_catalog, RunRecord, RunStatus};
pub use network::{
    solution_cost, DemandCategory, DemandModel, Network, Node, NodeId, NodeKind, Pipe, PipeId, PipeType,
    PipeTypeCatalog, Solution,
};
