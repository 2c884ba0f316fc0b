#[path = "oracle/stats50.rs"]
mod oracle;

use slforge_core::analysis::*;
use slforge_core::sparql::{collect_iris, parse_query, PrefixTable};

#[test]
fn per_query_annotations() {
    for (i, row) in oracle::load().iter().enumerate() {
        let q = parse_query(&row.query).unwrap_or_else(|e| panic!("row {}: {e}", i + 1));
        let p = profile_constructs(&q);
        let flags = [
            p.filter, p.optional, p.union, p.minus, p.values, p.group_by, p.order_by,
            p.limit_or_offset, p.non_aggregate_functions, p.aggregate_functions,
            p.property_paths, p.subqueries,
        ];
        assert_eq!(flags, row.flags, "row {} flags: {}", i + 1, row.query);
        assert_eq!(p.triples as u64, row.triples, "row {} triples", i + 1);
        assert_eq!(is_advanced(&p), row.advanced, "row {} advanced", i + 1);
        assert_eq!(p.distinct_flag, row.distinct, "row {} distinct", i + 1);
        assert_eq!(format!("{:?}", p.form).to_uppercase(), row.form, "row {}", i + 1);
        let iris: std::collections::BTreeSet<String> = collect_iris(&q).into_iter().collect();
        assert_eq!(iris, row.iris, "row {} iris", i + 1);
        let langs: std::collections::BTreeSet<String> =
            collect_filter_languages(&q).into_iter().collect();
        assert_eq!(langs, row.languages, "row {} languages", i + 1);
        assert_eq!(collect_literals(&q).len(), row.literals.len(), "row {} literals", i + 1);
    }
}

#[test]
fn patterns_match_hand_grouping() {
    let rows = oracle::load();
    let keys: Vec<PatternKey> =
        rows.iter().map(|r| normalize_pattern(&parse_query(&r.query).unwrap())).collect();
    for i in 0..rows.len() {
        for j in 0..rows.len() {
            assert_eq!(
                keys[i] == keys[j],
                rows[i].pattern == rows[j].pattern,
                "rows {} and {}:\n{}\n{}",
                i + 1,
                j + 1,
                keys[i].canonical,
                keys[j].canonical
            );
        }
    }
}

#[test]
fn corpus_report_matches_oracle() {
    let rows = oracle::load();
    let expected = oracle::expected(&rows);
    let report =
        compute_corpus_stats(rows.iter().map(|r| r.query.as_str()), &PrefixTable::wikidata());
    let diffs = oracle::compare(&report, &expected);
    assert!(diffs.is_empty(), "{diffs:#?}");
    assert_eq!(report.parse_failures, 0);
}

#[test]
fn oracle_sanity() {
    // Totals read directly off the annotation columns.
    let e = oracle::expected(&oracle::load());
    assert_eq!(e.queries, 50);
    assert_eq!(e.dist_patterns, 44);
    assert!((e.advanced_pct - 40.0).abs() < 1e-9);
    assert_eq!(e.lang, 5);
}
