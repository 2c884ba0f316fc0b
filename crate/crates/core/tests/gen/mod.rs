//! Random query text for property tests.

#![allow(dead_code)]

use proptest::prelude::*;

pub fn var() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["?a", "?b", "?c", "?item", "?x", "?v1", "?v2"]).prop_map(String::from)
}

pub fn entity() -> impl Strategy<Value = String> {
    (1u32..500).prop_map(|n| format!("wd:Q{n}"))
}

pub fn property() -> impl Strategy<Value = String> {
    (prop::sample::select(vec!["wdt", "p", "ps", "pq"]), 1u32..300)
        .prop_map(|(p, n)| format!("{p}:P{n}"))
}

pub fn literal() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-z]{0,6}".prop_map(|s| format!("\"{s}\"")),
        (0i64..10_000).prop_map(|n| n.to_string()),
        ("[a-z]{1,5}", prop::sample::select(vec!["en", "de", "fr-CA"]))
            .prop_map(|(s, l)| format!("\"{s}\"@{l}")),
        (1900u32..2020).prop_map(|y| format!("\"{y}-01-01\"^^xsd:dateTime")),
        Just("true".to_string()),
        (0u32..100, 0u32..100).prop_map(|(a, b)| format!("{a}.{b}")),
    ]
}

pub fn path() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![property(), Just("a".to_string())];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}/{b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}|{b})")),
            inner.clone().prop_map(|a| format!("^({a})")),
            (inner, prop::sample::select(vec!["*", "+", "?"])).prop_map(|(a, m)| format!("({a}){m}")),
        ]
    })
}

pub fn term() -> impl Strategy<Value = String> {
    prop_oneof![var(), entity(), literal()]
}

pub fn expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![var(), literal(), entity()];
    leaf.prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            (
                inner.clone(),
                prop::sample::select(vec!["=", "!=", "<", ">=", "+", "-", "*", "/", "&&", "||"]),
                inner.clone()
            )
                .prop_map(|(a, op, b)| format!("({a} {op} {b})")),
            inner.clone().prop_map(|a| format!("!{a}")),
            var().prop_map(|v| format!("LANG({v})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("CONTAINS(STR({a}), STR({b}))")),
            (inner.clone(), inner.clone(), inner.clone()).prop_map(|(a, b, c)| format!("IF({a}, {b}, {c})")),
            (inner.clone(), prop::collection::vec(inner, 1..3))
                .prop_map(|(a, l)| format!("({a} IN ({}))", l.join(", "))),
        ]
    })
}

pub fn triple() -> impl Strategy<Value = String> {
    (
        prop_oneof![var(), entity()],
        prop_oneof![path(), var()],
        prop_oneof![term(), Just("[ wdt:P1 ?b ]".to_string())],
        prop::option::of((property(), term())),
    )
        .prop_map(|(s, p, o, more)| match more {
            Some((p2, o2)) => format!("{s} {p} {o} ; {p2} {o2}"),
            None => format!("{s} {p} {o}"),
        })
}

pub fn group() -> impl Strategy<Value = String> {
    let leaf = prop::collection::vec(triple(), 1..3).prop_map(|ts| ts.join(" . "));
    leaf.prop_recursive(3, 24, 3, |inner| {
        prop::collection::vec(
            prop_oneof![
                inner.clone(),
                inner.clone().prop_map(|g| format!("OPTIONAL {{ {g} }}")),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{{ {a} }} UNION {{ {b} }}")),
                inner.clone().prop_map(|g| format!("MINUS {{ {g} }}")),
                expr().prop_map(|e| format!("FILTER({e})")),
                inner.clone().prop_map(|g| format!("FILTER NOT EXISTS {{ {g} }}")),
                expr().prop_map(|e| format!("BIND({e} AS ?bound)")),
                (var(), prop::collection::vec(prop_oneof![entity(), literal()], 1..3))
                    .prop_map(|(v, vs)| format!("VALUES {v} {{ {} }}", vs.join(" "))),
                inner.clone().prop_map(|g| format!("{{ SELECT ?a WHERE {{ {g} }} LIMIT 5 }}")),
                inner.prop_map(|g| format!("SERVICE wikibase:label {{ {g} }}")),
            ],
            1..4,
        )
        .prop_map(|els| els.join(" . "))
    })
}

pub fn query() -> impl Strategy<Value = String> {
    (
        prop_oneof![
            Just("SELECT *".to_string()),
            prop::collection::vec(var(), 1..3).prop_map(|vs| format!("SELECT DISTINCT {}", vs.join(" "))),
            var().prop_map(|v| format!("SELECT (COUNT({v}) AS ?n)")),
            Just("ASK".to_string()),
        ],
        group(),
        prop::option::of(var()),
        prop::option::of(1u32..100),
    )
        .prop_map(|(head, g, order, limit)| {
            let mut q = if head == "ASK" {
                format!("ASK {{ {g} }}")
            } else {
                format!("{head} WHERE {{ {g} }}")
            };
            if let Some(o) = order {
                q.push_str(&format!(" ORDER BY DESC({o})"));
            }
            if let Some(l) = limit {
                q.push_str(&format!(" LIMIT {l}"));
            }
            q
        })
}
