//! Driving the binary's stages over the 1,000-row fixture log.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use slforge::agent::{ModelTurn, ToolCallRequest};
use slforge::cli::{run_from_args, Report, ScriptRecord};
use slforge::kg::AgentInput;
use slforge::records::{read_jsonl, write_jsonl};

pub struct Work {
    pub dir: tempfile::TempDir,
    pub config: PathBuf,
    pub script: PathBuf,
}

impl Work {
    pub fn new(endpoint_url: &str) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let script = dir.path().join("script.jsonl");
        std::fs::write(&script, "").unwrap();
        let config = dir.path().join("slforge.toml");
        let toml = format!(
            "workers = 4\n\n[paths]\nwork_dir = \"work\"\n\n[endpoint]\nurl = \"{endpoint_url}\"\ntimeout_s = 10\nretries = 0\n\n\
             [llm]\nbackend = \"script\"\nscript = \"script.jsonl\"\n\n[embedding]\nbackend = \"hashing\"\ndim = 256\n"
        );
        std::fs::write(&config, toml).unwrap();
        Work { dir, config, script }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join("work").join(name)
    }

    /// Runs one subcommand in-process.
    pub fn run(&self, args: &[&str]) -> Report {
        let mut all = vec!["slforge", "--config", self.config.to_str().unwrap()];
        all.extend_from_slice(args);
        match run_from_args(all) {
            Ok(r) => r,
            Err(e) => panic!("{args:?}: {e}"),
        }
    }

    pub fn write_script(&self, records: &[ScriptRecord]) {
        write_jsonl(&self.script, records).unwrap();
    }
}

fn call(id: &str, name: &str, args: Value) -> ModelTurn {
    ModelTurn::calls(vec![ToolCallRequest::new(id, name, args)])
}

/// The number after the first `wd:Q`.
fn first_item(q: &str) -> u64 {
    let rest = &q[q.find("wd:Q").expect("an item") + 4..];
    rest[..rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len())].parse().unwrap()
}

/// What a careful model would do with each kind of fixture query.
pub fn script_for(input: &AgentInput) -> Vec<ModelTurn> {
    let q = &input.original_query;
    let pre = &input.preprocessed_query;
    let explore = call("c1", "execute", json!({"sparql": pre}));
    let answer = |questions: Vec<String>, sparql: String| call("c2", "answer", json!({"questions": questions, "sparql": sparql}));
    if q.contains("\"string") {
        return vec![explore, call("c2", "cancel", json!({"reason": "the anonymized label cannot be recovered"}))];
    }
    let item = first_item(q);
    let turn = if q.contains("COUNT") {
        let n = item - 400_000;
        answer(
            vec![format!("How many people were born in town {n}?"), format!("Count the people whose birthplace is town {n}.")],
            format!("SELECT (COUNT(?person) AS ?count) WHERE {{ ?person wdt:P19 wd:Q{item} }}"),
        )
    } else if q.trim_start().starts_with("ASK") {
        answer(vec![format!("Is person {} a human?", item - 200_000)], pre.clone())
    } else if q.contains("wikibase:label") {
        let n = item - 100_000;
        answer(
            vec![format!("Which items belong to category {n}?"), format!("List the members of category {n} with their names.")],
            format!(
                "SELECT ?item ?itemLabel WHERE {{ ?item wdt:P31 wd:Q{item} . ?item rdfs:label ?itemLabel . FILTER(LANG(?itemLabel) = \"en\") }}"
            ),
        )
    } else {
        let n = item - 200_000;
        let property = if n % 15 == 0 { "P108" } else { "P106" };
        answer(vec![format!("What does person {n} do for a living?")], format!("SELECT ?job WHERE {{ wd:Q{item} wdt:{property} ?job }}"))
    };
    vec![explore, turn]
}

pub fn scripts(inputs: &Path) -> Vec<ScriptRecord> {
    let inputs: Vec<AgentInput> = read_jsonl(inputs).unwrap();
    inputs.iter().map(|i| ScriptRecord { id: i.id.clone(), turns: script_for(i) }).collect()
}
