//! Per-query metrics and their corpus-level aggregation.

mod constructs;
mod literals;
mod pattern;
mod prefixes;
mod stats;

pub use constructs::{is_advanced, profile_constructs, ConstructProfile};
pub use literals::{collect_filter_languages, collect_literals};
pub use pattern::{normalize_pattern, normalized_query_text, PatternKey};
pub use prefixes::{prefix_group, profile_prefixes, PrefixGroup, PrefixProfile};
pub use stats::{compute_corpus_stats, ConstructCounts, CorpusStats, StatsReport, CONSTRUCT_COLUMNS};
