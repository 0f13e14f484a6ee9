//! Exact constructions around low-distortion embeddings of multibranching
//! diamond and Laakso graphs into sequence spaces whose basis is
//! equal-signs-additive (ESA), together with the summing-norm factorization
//! obstruction that separates this embedding route from the classical one.
//!
//! Everything is computed in exact rational arithmetic; distortion bounds,
//! norm identities, and structural laws are verified with zero tolerance.

pub mod axioms;
pub mod blocks;
pub mod diamond;
pub mod distortion;
pub mod laakso;
pub mod embedding;
pub mod error;
pub mod graphs;
pub mod level;
pub mod obstruction;
pub mod ratio;
pub mod signvec;

pub use axioms::{check_axiom, run_axiom_suite, Axiom, AxiomParams, NormKind};
pub use blocks::{h_interval, h_vector, BlockLayout, Interval, LabelSet, SignTuple};
pub use diamond::{classify_diamond_pair, embed_diamond, DiamondEmbedder, DiamondPairCase};
pub use distortion::{distortion_report, DistortionReport};
pub use embedding::{check_structural_laws, EmbeddingTable, StructuralReport};
pub use error::{Error, Result};
pub use graphs::{
    build_graph, subdiamond, vertical_relation, Family, GraphInstance, MetricTable, VertexLabel,
    VerticalRelation,
};
pub use laakso::{embed_laakso, laakso_warmup, verify_c_conditions, LaaksoEmbedding};
pub use level::{Base, Level};
pub use obstruction::{
    check_factorization, check_midpoint_family, color_triple, monochromatic_chain_check,
    ramsey_bound, reduce_family, smallest_factorization_constant, verify_triple_separation,
    RTable, RationalEmbedding, TripleColor, ZFamily,
};
pub use ratio::Rat;
pub use signvec::{Run, SignVector};
