//! SPARQL endpoint access and prompt rendering.

pub mod client;
pub mod enrich;
pub mod render;
pub mod results;

pub use client::{classify_failure, standalone_query, Endpoint, HttpEndpoint, KgError};
pub use enrich::{build_agent_input, fetch_iri_info, subject_for_labels, AgentInput, IriInfo};
pub use render::{render_iri, render_result_markdown, RenderOptions};
pub use results::{parse_graph, parse_results_json, Cell, JsonOutcome, ResultTable};
