use serde::{Deserialize, Serialize};
use serde_json::Value;
use slforge_core::sparql::parse_query_with;

use super::backend::{ChatBackend, ToolSpec};
use super::instructions::system_instructions;
use super::messages::{Message, TokenUsage, ToolName};
use super::tools::{decode_call, execute_tool, tool_specs, ToolContext};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum OutcomeKind {
    Answered { questions: Vec<String>, cleaned_sparql: String },
    Cancelled { reason: String },
    Invalid { detail: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentOutcome {
    #[serde(flatten)]
    pub kind: OutcomeKind,
    pub transcript: Vec<Message>,
    /// Model turns taken.
    pub step_count: usize,
    pub token_usage: TokenUsage,
    /// Ended by a backend failure rather than by the model; worth retrying.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub interrupted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunLimits {
    pub max_steps: usize,
    /// Extra chances after the final query fails verification.
    pub reiterations: usize,
}

impl Default for RunLimits {
    fn default() -> Self {
        RunLimits { max_steps: 20, reiterations: 2 }
    }
}

enum Answer {
    Ok { questions: Vec<String>, sparql: String },
    Malformed(String),
}

fn read_answer(args: &Value) -> Answer {
    let questions: Option<Vec<String>> = args.get("questions").and_then(Value::as_array).and_then(|a| {
        a.iter().map(|q| q.as_str().map(|s| s.trim().to_string()).filter(|s| !s.is_empty())).collect()
    });
    let sparql = args.get("sparql").and_then(Value::as_str).map(str::trim).filter(|s| !s.is_empty());
    match (questions, sparql) {
        (Some(q), Some(s)) if (1..=3).contains(&q.len()) => Answer::Ok { questions: q, sparql: s.to_string() },
        (Some(q), Some(_)) => Answer::Malformed(format!("expected one to three questions, got {}", q.len())),
        _ => Answer::Malformed("answer needs \"questions\" (list of non-empty strings) and \"sparql\" (string)".into()),
    }
}

struct Session<'a> {
    messages: Vec<Message>,
    usage: TokenUsage,
    steps: usize,
    ctx: &'a ToolContext<'a>,
}

impl Session<'_> {
    fn finish(self, kind: OutcomeKind) -> AgentOutcome {
        AgentOutcome { kind, transcript: self.messages, step_count: self.steps, token_usage: self.usage, interrupted: false }
    }

    /// Runs the final query the way validation will: parse, then execute.
    fn verify(&self, sparql: &str) -> Result<(), String> {
        parse_query_with(sparql, self.ctx.table).map_err(|e| format!("the query does not parse: {e}"))?;
        self.ctx
            .endpoint
            .execute(sparql, 1)
            .map(|_| ())
            .map_err(|e| format!("the query failed to execute ({}): {e}", e.class()))
    }
}

/// Drives one session: system instructions and `document` go to the
/// model, requested functions are executed and their results fed back,
/// until the model answers or cancels or the step budget runs out.
///
/// An answer's query is executed once more. On failure the model is told
/// and may answer again, at most `limits.reiterations` times. A second
/// malformed call in a row, a backend failure or an exhausted budget
/// makes the outcome `Invalid`.
pub fn run_s2q(
    document: &str,
    backend: &dyn ChatBackend,
    ctx: &ToolContext,
    kg_name: &str,
    limits: RunLimits,
) -> AgentOutcome {
    let specs: Vec<ToolSpec> = tool_specs(kg_name);
    let mut s = Session {
        messages: vec![Message::system(system_instructions(kg_name)), Message::user(document)],
        usage: TokenUsage::default(),
        steps: 0,
        ctx,
    };
    let mut malformed = false;
    let mut failed_answers = 0;
    loop {
        if s.steps >= limits.max_steps {
            let detail = format!("step budget exhausted after {} model turns", s.steps);
            return s.finish(OutcomeKind::Invalid { detail });
        }
        let turn = match backend.complete(&s.messages, &specs) {
            Ok(t) => t,
            Err(e) => {
                let mut out = s.finish(OutcomeKind::Invalid { detail: format!("backend error: {e}") });
                out.interrupted = true;
                return out;
            }
        };
        s.steps += 1;
        s.usage += turn.usage;
        let calls = turn.tool_calls.clone();
        s.messages.push(turn.into_message());

        if calls.is_empty() {
            s.messages.push(Message::user(
                "Continue by calling one of the functions. Finish with answer, or with cancel if the query cannot be cleaned.",
            ));
            continue;
        }

        let mut bad_turn = None;
        for call in &calls {
            let (name, args) = match decode_call(call) {
                Ok(v) => v,
                Err(e) if e.starts_with("unknown function") => {
                    s.messages.push(Message::tool(&call.id, format!("error: {e}")));
                    continue;
                }
                Err(e) => {
                    bad_turn = Some(e.clone());
                    s.messages.push(Message::tool(&call.id, format!("error: {e}. Please repeat the call with valid arguments.")));
                    continue;
                }
            };
            match name {
                ToolName::Can => {
                    match args.get("reason").and_then(Value::as_str).map(str::trim).filter(|r| !r.is_empty()) {
                        Some(reason) => return s.finish(OutcomeKind::Cancelled { reason: reason.to_string() }),
                        None => {
                            bad_turn = Some("cancel needs a non-empty \"reason\"".into());
                            s.messages.push(Message::tool(&call.id, "error: cancel needs a non-empty \"reason\""));
                        }
                    }
                }
                ToolName::Ans => match read_answer(&args) {
                    Answer::Malformed(e) => {
                        s.messages.push(Message::tool(&call.id, format!("error: {e}")));
                        bad_turn = Some(e);
                    }
                    Answer::Ok { questions, sparql } => match s.verify(&sparql) {
                        Ok(()) => return s.finish(OutcomeKind::Answered { questions, cleaned_sparql: sparql }),
                        Err(e) if failed_answers < limits.reiterations => {
                            failed_answers += 1;
                            s.messages.push(Message::tool(
                                &call.id,
                                format!("error: {e}. Fix the query, execute it, and call answer again."),
                            ));
                        }
                        Err(e) => {
                            let detail = format!("final query failed verification {} times: {e}", failed_answers + 1);
                            return s.finish(OutcomeKind::Invalid { detail });
                        }
                    },
                },
                tool => {
                    let out = execute_tool(tool, &args, ctx);
                    s.messages.push(Message::tool(&call.id, out));
                }
            }
        }
        match bad_turn {
            Some(e) if malformed => {
                return s.finish(OutcomeKind::Invalid { detail: format!("repeated malformed function call: {e}") });
            }
            Some(_) => malformed = true,
            None => malformed = false,
        }
    }
}

/// One session as stored in the transcript file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranscriptRecord {
    /// Id of the agent input (the entry's raw hash).
    pub id: String,
    pub interval: String,
    pub model: String,
    pub outcome: AgentOutcome,
}
