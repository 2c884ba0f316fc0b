use slforge_core::sparql::*;

fn corpus() -> Vec<String> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/parser_corpus.rq");
    std::fs::read_to_string(path)
        .unwrap()
        .split("\n#---\n")
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

#[test]
fn corpus_has_at_least_sixty_queries() {
    assert!(corpus().len() >= 60, "{}", corpus().len());
}

#[test]
fn every_query_parses_and_round_trips() {
    let mut failures = Vec::new();
    for (i, text) in corpus().iter().enumerate() {
        let ast = match parse_query(text) {
            Ok(a) => a,
            Err(e) => {
                failures.push(format!("#{i} parse: {e}\n{text}"));
                continue;
            }
        };
        let once = serialize_query(&ast);
        match parse_query(&once) {
            Ok(again) => {
                let twice = serialize_query(&again);
                if twice != once {
                    failures.push(format!("#{i} not a fixpoint:\n{once}\n{twice}"));
                }
                if again != ast {
                    failures.push(format!("#{i} AST changed by round trip:\n{once}"));
                }
            }
            Err(e) => failures.push(format!("#{i} reparse: {e}\n{once}")),
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n\n"));
}

#[test]
fn corpus_covers_every_construct_column() {
    let all = corpus().join("\n").to_uppercase();
    for needle in [
        "FILTER", "OPTIONAL", "UNION", "MINUS", "VALUES", "GROUP BY", "ORDER BY", "LIMIT",
        "OFFSET", "BIND", "COUNT(", "SUM(", "AVG(", "MIN(", "MAX(", "SAMPLE(", "GROUP_CONCAT(",
        "REGEX(", "LANG(", "IF(", "/WDT:", "|WDT:", "*", "+ WD:", "? WD:", "^WDT:", "{ SELECT",
    ] {
        assert!(all.contains(needle), "corpus lacks {needle}");
    }
}

#[test]
fn spec_examples() {
    let q = parse_query("select ?x where{?x wdt:P31 wd:Q5}").unwrap();
    assert_eq!(serialize_query(&q), "SELECT ?x WHERE { ?x wdt:P31 wd:Q5 }");
    assert_eq!(count_triple_patterns(&q), 1);
    assert_eq!(q.form.kind(), FormKind::Select);

    let q = parse_query("ASK { wd:Q42 wdt:P31 wd:Q5 }").unwrap();
    assert_eq!(q.form.kind(), FormKind::Ask);
    assert!(variables(&q).is_empty());

    let e = parse_query("SELECT WHERE {").unwrap_err();
    assert!(matches!(e, ParseError::Syntax(_)), "{e:?}");

    let q = parse_query("SELECT ?a WHERE { { ?a wdt:P31 wd:Q5 } UNION { ?a wdt:P31 wd:Q6 } }").unwrap();
    assert_eq!(count_triple_patterns(&q), 2);
    let s = serialize_query(&q);
    assert!(s.contains("wd:Q5") && s.contains("wd:Q6") && s.contains("UNION"));
    assert_eq!(parse_query(&s).unwrap(), q);
}

#[test]
fn syntax_errors_carry_position_and_expectations() {
    let e = parse_query("SELECT ?x WHERE {\n  ?x wdt:P31 }").unwrap_err();
    let ParseError::Syntax(s) = e else { panic!("{e:?}") };
    assert_eq!(s.line, 2);
    assert!(s.column > 1);
    assert!(!s.expected.is_empty(), "{s:?}");
}

#[test]
fn update_forms_are_unsupported() {
    for text in [
        "INSERT DATA { <a> <b> <c> }",
        "DELETE WHERE { ?s ?p ?o }",
        "CLEAR ALL",
        "DROP GRAPH <g>",
        "LOAD <http://x>",
        "WITH <g> DELETE { ?s ?p ?o } WHERE { ?s ?p ?o }",
    ] {
        let e = parse_query(text).unwrap_err();
        assert!(matches!(e, ParseError::UnsupportedFeature { .. }), "{text}: {e:?}");
    }
}

#[test]
fn undefined_prefix_is_an_error() {
    assert!(parse_query("SELECT ?x WHERE { ?x nope:p ?y }").is_err());
    let mut t = PrefixTable::empty();
    t.insert("nope", "http://nope.example/");
    assert!(parse_query_with("SELECT ?x WHERE { ?x nope:p ?y }", &t).is_ok());
    assert!(parse_query_with("SELECT ?x WHERE { ?x wdt:P1 ?y }", &t).is_err());
}

#[test]
fn label_service_parses_as_service_node() {
    let q = parse_query(
        "SELECT ?x ?xLabel WHERE { ?x wdt:P31 wd:Q5 SERVICE wikibase:label { bd:serviceParam wikibase:language \"en\" } }",
    )
    .unwrap();
    let Some(GroupPattern::Elements(els)) = &q.pattern else { panic!() };
    assert!(els.iter().any(|e| matches!(
        e,
        PatternElement::Service { endpoint: Term::Iri(i), .. } if i.absolute == prefixes::LABEL_SERVICE
    )));
}

#[test]
fn collect_iris_examples() {
    let q = parse_query("SELECT * WHERE { ?x wdt:P31 wd:Q5 . ?y wdt:P279 wd:Q5 }").unwrap();
    let iris = collect_iris(&q);
    assert_eq!(iris.len(), 3);
    assert!(iris.contains("http://www.wikidata.org/entity/Q5"));
    assert!(iris.iter().all(|i| i.starts_with("http://")));

    // Single-triple corpus, three queries sharing one property: 4 distinct IRIs.
    let mut all = std::collections::BTreeSet::new();
    for e in ["Q1", "Q2", "Q3"] {
        let q = parse_query(&format!("SELECT ?x WHERE {{ wd:{e} wdt:P17 ?x }}")).unwrap();
        all.extend(collect_iris(&q));
    }
    assert_eq!(all.len(), 4);

    let q = parse_query(
        "PREFIX ex: <http://example.org/> SELECT * WHERE { SERVICE <http://svc/> { ?s ex:p ?o } }",
    )
    .unwrap();
    assert_eq!(collect_iris(&q).into_iter().collect::<Vec<_>>(), ["http://example.org/p"]);
}

#[test]
fn hand_counted_triples() {
    // (query, hand count)
    let cases = [
        ("SELECT * WHERE { ?x wdt:P31 wd:Q5 }", 1),
        ("SELECT * WHERE { ?x wdt:P31 wd:Q5 ; wdt:P27 ?c , ?d }", 3),
        ("SELECT * WHERE { ?x wdt:P19 [ wdt:P17 wd:Q183 ; wdt:P31 ?t ] }", 3),
        ("SELECT * WHERE { ?x wdt:P1 (1 2) }", 5),
        ("SELECT * WHERE { ?x wdt:P31/wdt:P279* wd:Q5 }", 1),
        ("SELECT * WHERE { ?x wdt:P1 ?a OPTIONAL { ?x wdt:P2 ?b } MINUS { ?x wdt:P3 ?c } }", 3),
        ("SELECT * WHERE { SERVICE wikibase:label { bd:serviceParam wikibase:language \"en\" } }", 1),
        ("SELECT * WHERE { { SELECT ?x WHERE { ?x wdt:P1 ?y . ?y wdt:P2 ?z } } ?x wdt:P3 ?w }", 3),
        ("SELECT * WHERE { ?x wdt:P1 ?y FILTER NOT EXISTS { ?y wdt:P2 ?z } }", 2),
        ("DESCRIBE wd:Q1", 0),
    ];
    let mut total = 0;
    for (q, n) in cases {
        let got = count_triple_patterns(&parse_query(q).unwrap());
        assert_eq!(got, n, "{q}");
        total += got;
    }
    let mean = total as f64 / cases.len() as f64;
    let hand_mean = (1 + 3 + 3 + 5 + 1 + 3 + 1 + 3 + 2 + 0) as f64 / 10.0;
    assert!((mean - hand_mean).abs() < 1e-12);
}

#[test]
fn declared_prefixes_make_queries_standalone() {
    for text in corpus() {
        let mut ast = parse_query(&text).unwrap();
        declare_used_prefixes(&mut ast);
        let printed = serialize_query(&ast);
        let alone = parse_query_with(&printed, &PrefixTable::empty())
            .unwrap_or_else(|e| panic!("{e}\n{printed}"));
        assert_eq!(collect_iris(&alone), collect_iris(&ast));
    }
}
