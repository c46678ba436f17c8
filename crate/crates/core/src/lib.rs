//! Multi-aspect diversity for news recommendation.
//!
//! Documents carry one label per aspect (topic, frame, ...). Each aspect has a
//! distance table over its labels, and the distance between two documents is a
//! weighted blend of the per-aspect distances. Collection diversity is the mean
//! pairwise distance. On top of that this crate provides exhaustive oracles,
//! several diversifiers, scoped symbolic rules and JSON/CSV I/O.
//!
//! ```
//! use newsdiv::{collection_diversity, fixtures};
//!
//! let schema = fixtures::guiding_schema();
//! let report = collection_diversity(&schema, &fixtures::reference_lists()[3]).unwrap();
//! assert_eq!(report.overall, 0.75);
//! ```

pub mod aspect_model;
pub mod corpus_io;
pub mod diversify;
pub mod error;
pub mod fixtures;
pub mod metrics;
pub mod oracle;
pub mod rules;

pub use aspect_model::{derive_distances_from_graph, load_schema, Aspect, AspectSchema, DistanceTable, LabelGraph};
pub use corpus_io::{
    load_corpus, load_interaction_records, load_interactions, load_sequence, parse_weights, round_sig12,
    uniform_type_weights, write_corpus, write_report, Corpus, ReportFormat, Tabular,
};
pub use diversify::{
    greedy_select, next_in_sequence, rerank, rerank_combined, select_summary_sources, suggest_interaction,
    swap_diversify, Contribution, Mode, RerankInputs, RerankRequest, RerankResult, SequencePick, Suggestion,
    TraceRecord,
};
pub use error::{Error, Result};
pub use metrics::{
    collection_diversity, doc_distance, entropy_diversity, interaction_breakdown, interaction_diversity,
    keyword_diversity, per_aspect_diversity, window_diversity, DiversityReport, DocumentProfile, InteractionDiversity,
    InteractionLog, InteractionRecord, Keyword, WindowSpec,
};
pub use oracle::{
    combined_objective, max_diversity_oracle, max_objective_oracle, max_sequence_oracle, OracleResult,
    ORACLE_SUBSET_LIMIT,
};
pub use rules::{
    apply_rules, check_requirements, explain_result, load_rules, Action, Adjustment, Applied, Predicate, Rule, RuleSet,
    Scope, Violation,
};
