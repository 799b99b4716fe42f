//! Byte-exact transcripts. Run with COMPIR_BLESS=1 to regenerate.

mod common;

use common::{path, split, transcript, CASES};
use compir::wire;
use compir::Outcome;

#[test]
fn transcripts_match_golden_files() {
    let bless = std::env::var_os("COMPIR_BLESS").is_some();
    for &(name, scheme, k, t, n, m, i) in CASES {
        let tr = transcript(scheme, k, t, n, m, i);
        if bless {
            std::fs::write(path(name), &tr.bytes).unwrap();
            continue;
        }
        let golden = std::fs::read(path(name)).unwrap();
        assert_eq!(tr.bytes, golden, "{name}");
    }
}

#[test]
fn golden_queries_replay_to_golden_answers_and_decode() {
    for &(name, scheme, k, t, n, m, i) in CASES {
        let tr = transcript(scheme, k, t, n, m, i);
        let golden = std::fs::read(path(name)).unwrap();
        let (com, pairs) = split(&golden);
        assert_eq!(com, tr.com);
        assert_eq!(pairs.len(), k);
        let mut bundles = Vec::new();
        for (s, (query, answer)) in pairs.iter().enumerate() {
            assert_eq!(compir::net::respond(&tr.server, query), *answer, "{name}");
            let msg = wire::decode_query(&query.payload).unwrap();
            assert_eq!(msg.query, tr.queries.queries[s]);
            bundles.push(Some(wire::decode_answer(&answer.payload, m).unwrap()));
        }
        let params = com.params;
        let r = compir::compir::extract(tr.server.pp(), &com.commitment, &params, m, i, &tr.queries, &bundles);
        let w = params.block_width();
        let want = (0..w).map(|c| tr.server.db().column(i * w + c).to_vec()).collect();
        assert_eq!(r.outcome, Outcome::Item(want), "{name}");
    }
}
