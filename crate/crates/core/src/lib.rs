//! Hierarchical text categorization with a local centroid classifier per
//! taxonomy node, top-down route decoding, and route-confidence evaluation.
//!
//! A document is routed from the root by picking the best-scoring child at
//! every level until a leaf is reached. Each step's confidence is the chosen
//! node's share of its sibling group's total score; the route reliability is
//! the sum of these confidences weighted by the validation recognition rate of
//! each level. Routes whose reliability does not exceed a threshold placed at
//! the validation equal-error-rate point are rejected, which raises accuracy
//! on the documents that remain.
//!
//! ```
//! use routeconf::{
//!     generate_synthetic, train_pipeline, load_corpus, PipelineConfig, SyntheticSpec, Taxonomy,
//! };
//!
//! let files = generate_synthetic(&SyntheticSpec { depth: 2, branching: 2, ..Default::default() })?;
//! let taxonomy = Taxonomy::parse(&files.taxonomy)?;
//! let docs = load_corpus(&files.corpus, &taxonomy)?;
//! let trained = train_pipeline(&taxonomy, &docs, &PipelineConfig::default())?;
//! let result = trained.evaluate(&taxonomy)?;
//! assert_eq!(result.summary.overall_accuracy, 1.0);
//! # Ok::<(), routeconf::Error>(())
//! ```

pub mod centroid;
pub mod corpus;
mod error;
pub mod evaluation;
pub mod pipeline;
pub mod policies;
pub mod rng;
pub mod router;
pub mod taxonomy;

pub use centroid::{similarity, CentroidMode, CentroidModel, NodeCentroid};
pub use corpus::{
    load_corpus, split_corpus, tokenize, CorpusSplit, Document, SparseVector, Vocabulary,
};
pub use error::{Error, Result};
pub use evaluation::{
    evaluate, flat_baseline, generate_synthetic, render_report, ComparisonRow, EvalSummary,
    FlatClassifier, Report, SummaryRow, SyntheticCorpus, SyntheticSpec,
};
pub use pipeline::{train_pipeline, Experiment, PipelineConfig, TrainedPipeline};
pub use policies::{
    build_training_set, most_specific_examples, positives_for_centroid, NodeTrainingSet, PolicyKind,
};
pub use router::{
    classify_with_reject, confidence_score, decode, eer_threshold, reliability, Calibration,
    Decision, EerPoint, LevelStep, LevelWeights, RouteTrace, Router, ThresholdChoice,
    ThresholdSource,
};
pub use taxonomy::{NodeId, NodeIdx, Route, Taxonomy};
