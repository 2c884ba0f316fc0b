//! The question-generation agent: a function-calling loop over a chat model.

pub mod backend;
pub mod instructions;
pub mod messages;
pub mod run;
pub mod tools;

pub use backend::{BackendError, ChatBackend, OpenAiBackend, ScriptedBackend, ToolSpec};
pub use instructions::{system_instructions, STAGES};
pub use messages::{Message, ModelTurn, Role, TokenUsage, ToolCallRequest, ToolName};
pub use run::{run_s2q, AgentOutcome, OutcomeKind, RunLimits, TranscriptRecord};
pub use tools::{decode_call, execute_tool, match_rank, tool_specs, Hit, Search, SparqlSearch, ToolContext};
