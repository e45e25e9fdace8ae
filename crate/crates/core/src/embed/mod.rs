//! The joint image/concept space: extraction, ranked retrieval and metrics.

mod export;
mod expr;
mod metrics;
mod space;

pub use export::{EmbeddingExport, EMBEDDING_MAGIC};
pub use expr::{nearest_labels, parse_concept_expression, parse_terms, ConceptExpression};
pub use metrics::{
    average_precision, mean_average_precision, mean_of, metrics_csv, precision_at_k, query_metrics, r_precision,
    MapReport, QueryMetrics, Task, METRICS_CSV_HEADER,
};
pub use space::{extract, Candidate, Consistency, EmbeddingSpace, Feature, ImageInput, RankedItem, RankedList};
