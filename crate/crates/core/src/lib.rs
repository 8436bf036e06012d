//! Size-bounded correlation clustering of mutated cancer genes.
//!
//! The pipeline turns a binary gene-by-sample mutation matrix (optionally
//! enriched with an interaction network and expression z-scores) into
//! per-pair positive/negative clustering weights, solves the LP relaxation of
//! the size-bounded correlation clustering ILP by lazy triangle generation,
//! and rounds the fractional solution with a pivot procedure that never emits
//! a cluster larger than `K + 1`.
//!
//! ```text
//! ingest -> weights -> lp -> rounding -> eval
//!                       \-> oracle (exact, n <= 12)
//! ```

pub mod cli;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod lp;
pub mod matrix;
pub mod oracle;
pub mod rounding;
pub mod stats;
pub mod synth;
pub mod weights;

pub use error::{Error, Result};
pub use ingest::{
    AlterationMatrix, Catalog, CnvMatrix, ExpressionMatrix, GeneCatalog, InteractionNetwork,
    MutationMatrix, RawExpression, SampleCatalog, StdDivisor,
};
pub use lp::{solve_lp, FractionalSolution, LpOptions};
pub use matrix::SymMatrix;
pub use oracle::{solve_exact, ExactResult};
pub use rounding::{round, Clustering, PivotRule, RoundingParams};
pub use weights::{build_weights, EdgeWeights, Scheme, WeightConfig};
