//! Near perfect matchings in k-uniform hypergraphs: barrier constructions,
//! degree-threshold functions, edge lattices, reachability partitions and
//! absorbing-matching pipelines.

pub mod absorbing;
pub mod bitset;
pub mod combin;
pub mod constructions;
pub mod hgraph;
pub mod lattice;
pub mod reachability;
pub mod sweep;
pub mod thresholds;
pub mod verify;

pub use bitset::VertexSet;
pub use constructions::{BarrierSpec, ConstructionError};
pub use reachability::ReachParams;
pub use thresholds::{ResidueProfile, ThresholdResult};
pub use lattice::{IndexVector, IntegerLattice, LatticeError, VertexPartition};
pub use hgraph::{
    generate, read_hg, write_hg, DegreeProfile, HgParseError, Hypergraph, HypergraphError, Matching, MatchingError,
    MatchingReport, Model, SearchStatus, SolverOptions,
};
