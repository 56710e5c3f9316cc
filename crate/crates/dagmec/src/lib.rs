//! Exact uniform sampling and Markov-equivalence analysis of labeled DAGs.
//!
//! The crate is organized around three pillars:
//!
//! * **Structure** — [`dag`] holds the bit-matrix DAG type with skeleton,
//!   v-structure, and non-collider extraction; [`poset`] and [`tower`]
//!   provide the reachability-poset and sink-peeling decompositions with
//!   exact per-class DAG counts.
//! * **Sampling** — [`weights`] gives the exact law of the layer-size
//!   vector of a uniform DAG, [`layerdp`] turns it into a sequential
//!   dynamic program, and [`sampler`] draws exactly uniform DAGs from it.
//!   [`feature`] and [`tilt`] analyze the blocks between single-vertex
//!   layers and the associated tilted partition function.
//! * **Analysis** — [`mec`] computes essential graphs, chain components,
//!   and exact Markov-equivalence-class sizes; [`montecarlo`] is a
//!   deterministic, parallel experiment harness over the samplers.
//!
//! See the `book/` directory in the repository for a guided tour; every
//! code block there doubles as a doc-test of this crate.

pub mod bitmat;
pub mod dag;
pub mod enumerate;
pub mod error;
pub mod feature;
pub mod layerdp;
pub mod mec;
pub mod poset;
pub mod sampler;
pub mod tilt;
pub mod tower;
pub mod weights;

pub use dag::{is_acyclic, Dag, NonColliderEdges, VStructure};
pub use enumerate::{count_dags, enumerate_dags};
pub use error::{Error, Result};
pub use feature::{
    enumerate_features_of_size, extract_features, feature_weight, feature_weight_free_left,
    feature_weight_free_right, Feature, FeatureDecomposition,
};
pub use layerdp::{build_layer_dp, DpMode, LayerDp};
pub use mec::{
    chain_components, component_extension_count, cpdag, is_essential, last_noncollider_layer,
    mec_brute_force, mec_size, ChainComponent, EssentialGraph,
};
pub use poset::{poset_weight, reachability_poset, ReachPoset};
pub use sampler::{sample_dag_given_vector, sample_uniform_dag, UniformDagSampler};
pub use tilt::{
    aggregate_weights, mean_feature_size, partition_function, solve_theta_star, ThetaStar,
    TiltedEnsemble,
};
pub use tower::{tower_dag_count, tower_decompose, Tower, TowerVector};
pub use weights::{tower_vector_dag_count, tower_vector_weight};
