use std::fmt;

use serde::{Deserialize, Deserializer, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
    Tool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

impl std::ops::AddAssign for TokenUsage {
    fn add_assign(&mut self, o: Self) {
        self.prompt_tokens += o.prompt_tokens;
        self.completion_tokens += o.completion_tokens;
    }
}

/// A function call as requested by the model. `arguments` is kept as the raw
/// JSON text so malformed calls survive into transcripts unchanged.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolCallRequest {
    #[serde(default)]
    pub id: String,
    pub name: String,
    #[serde(deserialize_with = "raw_arguments")]
    pub arguments: String,
}

/// Accepts either a JSON string or any JSON value (written back as text).
fn raw_arguments<'de, D: Deserializer<'de>>(d: D) -> Result<String, D::Error> {
    Ok(match serde_json::Value::deserialize(d)? {
        serde_json::Value::String(s) => s,
        v => v.to_string(),
    })
}

impl ToolCallRequest {
    pub fn new(id: impl Into<String>, name: impl Into<String>, arguments: serde_json::Value) -> Self {
        ToolCallRequest { id: id.into(), name: name.into(), arguments: arguments.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    #[serde(default)]
    pub content: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tool_calls: Vec<ToolCallRequest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tool_call_id: Option<String>,
    /// Tokens spent on this assistant turn.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usage: Option<TokenUsage>,
}

impl Message {
    fn plain(role: Role, content: impl Into<String>) -> Self {
        Message { role, content: content.into(), tool_calls: Vec::new(), tool_call_id: None, usage: None }
    }

    pub fn system(content: impl Into<String>) -> Self {
        Self::plain(Role::System, content)
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self::plain(Role::User, content)
    }

    pub fn tool(call_id: impl Into<String>, content: impl Into<String>) -> Self {
        Message { tool_call_id: Some(call_id.into()), ..Self::plain(Role::Tool, content) }
    }
}

/// One model reply.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelTurn {
    #[serde(default)]
    pub content: String,
    #[serde(default)]
    pub tool_calls: Vec<ToolCallRequest>,
    #[serde(default)]
    pub usage: TokenUsage,
}

impl ModelTurn {
    pub fn calls(calls: Vec<ToolCallRequest>) -> Self {
        ModelTurn { tool_calls: calls, ..Default::default() }
    }

    pub fn into_message(self) -> Message {
        Message {
            role: Role::Assistant,
            content: self.content,
            tool_calls: self.tool_calls,
            tool_call_id: None,
            usage: Some(self.usage),
        }
    }

    /// Inverse of [`ModelTurn::into_message`] for assistant messages.
    pub fn from_message(m: &Message) -> Option<Self> {
        (m.role == Role::Assistant).then(|| ModelTurn {
            content: m.content.clone(),
            tool_calls: m.tool_calls.clone(),
            usage: m.usage.unwrap_or_default(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ToolName {
    Exe,
    Lst,
    Sen,
    Spr,
    Spe,
    Sop,
    Scn,
    Sac,
    Ans,
    Can,
}

impl ToolName {
    pub const ALL: [ToolName; 10] = [
        ToolName::Exe,
        ToolName::Lst,
        ToolName::Sen,
        ToolName::Spr,
        ToolName::Spe,
        ToolName::Sop,
        ToolName::Scn,
        ToolName::Sac,
        ToolName::Ans,
        ToolName::Can,
    ];

    pub fn code(self) -> &'static str {
        match self {
            ToolName::Exe => "EXE",
            ToolName::Lst => "LST",
            ToolName::Sen => "SEN",
            ToolName::Spr => "SPR",
            ToolName::Spe => "SPE",
            ToolName::Sop => "SOP",
            ToolName::Scn => "SCN",
            ToolName::Sac => "SAC",
            ToolName::Ans => "ANS",
            ToolName::Can => "CAN",
        }
    }

    /// The name declared to the model.
    pub fn function_name(self) -> &'static str {
        match self {
            ToolName::Exe => "execute",
            ToolName::Lst => "list",
            ToolName::Sen => "search_entity",
            ToolName::Spr => "search_property",
            ToolName::Spe => "search_property_of_entity",
            ToolName::Sop => "search_object_of_property",
            ToolName::Scn => "search_constrained",
            ToolName::Sac => "search_autocomplete",
            ToolName::Ans => "answer",
            ToolName::Can => "cancel",
        }
    }

    /// Accepts the three-letter code or the function name, in any case.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        Self::ALL
            .into_iter()
            .find(|t| t.code().eq_ignore_ascii_case(s) || t.function_name().eq_ignore_ascii_case(s))
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, ToolName::Ans | ToolName::Can)
    }
}

impl fmt::Display for ToolName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}
