//! A SPARQL endpoint over an in-memory store, for integration tests.
#![allow(dead_code)]

pub mod pipeline;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use oxigraph::io::RdfFormat;
use oxigraph::sparql::results::QueryResultsFormat;
use oxigraph::sparql::QueryResults;
use oxigraph::store::Store;
use slforge::config::EndpointConfig;
use slforge::kg::HttpEndpoint;
use slforge::log::percent_decode;
use slforge_core::sparql::PrefixTable;

pub const KG: &str = include_str!("../fixtures/kg.nt");
pub const SYNTHETIC_KG: &str = include_str!("../fixtures/synthetic_kg.nt");
pub const LOG_1000: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/log_1000.tsv");

/// How the server treats a query instead of answering it.
#[derive(Debug, Clone)]
pub enum Fault {
    Sleep(Duration),
    Status(u16, String),
}

type Hook = dyn Fn(&str) -> Option<Fault> + Send + Sync;

pub struct FixtureServer {
    pub url: String,
    server: Arc<tiny_http::Server>,
    handle: Option<JoinHandle<()>>,
    requests: Arc<AtomicUsize>,
}

fn query_param(encoded: &str) -> Option<String> {
    encoded
        .split('&')
        .find_map(|kv| kv.strip_prefix("query="))
        .and_then(|v| percent_decode(v, true).ok())
}

fn answer(store: &Store, query: &str) -> (u16, &'static str, Vec<u8>) {
    let results = match store.query(query) {
        Ok(r) => r,
        Err(e) => return (400, "text/plain", format!("query failed: {e}").into_bytes()),
    };
    let written = match results {
        r @ QueryResults::Graph(_) => r.write_graph(Vec::new(), RdfFormat::NTriples).map(|b| ("application/n-triples", b)),
        r => r.write(Vec::new(), QueryResultsFormat::Json).map(|b| ("application/sparql-results+json", b)),
    };
    match written {
        Ok((ct, body)) => (200, ct, body),
        Err(e) => (500, "text/plain", e.to_string().into_bytes()),
    }
}

fn handle(store: &Store, hook: &Hook, mut req: tiny_http::Request) {
    let mut body = String::new();
    let query = match req.method() {
        tiny_http::Method::Post => {
            let _ = req.as_reader().read_to_string(&mut body);
            query_param(&body)
        }
        _ => req.url().split_once('?').and_then(|(_, q)| query_param(q)),
    };
    let Some(query) = query else {
        let _ = req.respond(tiny_http::Response::from_string("missing query").with_status_code(400));
        return;
    };
    let (status, ct, bytes) = match hook(&query) {
        Some(Fault::Sleep(d)) => {
            std::thread::sleep(d);
            answer(store, &query)
        }
        Some(Fault::Status(s, msg)) => (s, "text/plain", msg.into_bytes()),
        None => answer(store, &query),
    };
    let header = tiny_http::Header::from_bytes("Content-Type", ct).expect("valid header");
    let _ = req.respond(tiny_http::Response::from_data(bytes).with_status_code(status).with_header(header));
}

impl FixtureServer {
    pub fn start(ntriples: &[&str]) -> Self {
        Self::with_hook(ntriples, |_| None)
    }

    /// `hook` sees every decoded query and may inject a fault.
    pub fn with_hook(ntriples: &[&str], hook: impl Fn(&str) -> Option<Fault> + Send + Sync + 'static) -> Self {
        let store = Store::new().expect("in-memory store");
        for nt in ntriples {
            store.load_from_reader(RdfFormat::NTriples, nt.as_bytes()).expect("fixture graph loads");
        }
        let server = Arc::new(tiny_http::Server::http("127.0.0.1:0").expect("bind fixture server"));
        let url = format!("http://{}/sparql", server.server_addr().to_ip().expect("ip address"));
        let requests = Arc::new(AtomicUsize::new(0));
        let hook: Arc<Hook> = Arc::new(hook);
        let (srv, count) = (server.clone(), requests.clone());
        let handle = std::thread::spawn(move || {
            for req in srv.incoming_requests() {
                count.fetch_add(1, Ordering::SeqCst);
                let (store, hook) = (store.clone(), hook.clone());
                std::thread::spawn(move || handle(&store, hook.as_ref(), req));
            }
        });
        FixtureServer { url, server, handle: Some(handle), requests }
    }

    pub fn requests(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }

    pub fn config(&self) -> EndpointConfig {
        EndpointConfig { url: self.url.clone(), timeout_s: 10.0, max_in_flight: 8, retries: 0, backoff_ms: 10 }
    }

    pub fn endpoint(&self) -> HttpEndpoint {
        HttpEndpoint::new(&self.config(), PrefixTable::wikidata()).expect("client")
    }
}

impl Drop for FixtureServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

/// Subject, predicate and object of every line, as written.
pub fn triples(ntriples: &str) -> Vec<(String, String, String)> {
    ntriples
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let l = l.trim().trim_end_matches('.').trim_end();
            let (s, rest) = l.split_once(' ').expect("subject");
            let (p, o) = rest.split_once(' ').expect("predicate");
            (s.to_string(), p.to_string(), o.to_string())
        })
        .collect()
}

/// Pairs whose question vectors sit in tight, planted clusters.
pub struct Planted {
    pub questions: Vec<Vec<String>>,
    pub cluster: Vec<usize>,
    pub vectors: std::collections::HashMap<String, Vec<f32>>,
}

pub fn planted(n: usize, dim: usize, seed: u64) -> Planted {
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let (mut questions, mut cluster, mut vectors) = (Vec::new(), Vec::new(), std::collections::HashMap::new());
    let mut c = 0;
    while questions.len() < n {
        let center: Vec<f32> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let size = rng.gen_range(1..=12).min(n - questions.len());
        for _ in 0..size {
            let i = questions.len();
            let qs: Vec<String> = (0..rng.gen_range(1..=3)).map(|k| format!("pair {i} question {k}")).collect();
            for q in &qs {
                let v: Vec<f32> = center.iter().map(|x| x + rng.gen_range(-0.01..0.01)).collect();
                vectors.insert(q.clone(), v);
            }
            questions.push(qs);
            cluster.push(c);
        }
        c += 1;
    }
    Planted { questions, cluster, vectors }
}

impl slforge::embed::Embedder for Planted {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, slforge::embed::EmbedError> {
        Ok(texts.iter().map(|t| self.vectors[t].clone()).collect())
    }
}
