//! Fetches per-segment emotion scores from an HTTP endpoint into a
//! resumable score file. A local stub stands in for the real service and
//! fails its first request to show the retry path.

use proplab::corpus::extract_labeled_spans;
use proplab::score_client::stub::StubEndpoint;
use proplab::score_client::{fetch_scores, EndpointConfig};
use proplab::synthetic::{SyntheticCorpus, SyntheticSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = SyntheticCorpus::generate(&SyntheticSpec {
        per_class: 1,
        ..SyntheticSpec::default()
    })?;
    let spans = extract_labeled_spans(&corpus.articles, &corpus.annotations, 0)?;
    let segments: Vec<_> = spans.into_iter().map(|s| s.segment).collect();

    let stub = StubEndpoint::start(|i, body| {
        if i == 0 {
            return (503, "busy".into());
        }
        let anger = if body.contains("fury") || body.contains("rage") {
            0.8
        } else {
            0.2
        };
        (
            200,
            format!(r#"{{"valence":0.4,"joy":0.3,"anger":{anger},"fear":0.2,"sadness":0.1}}"#),
        )
    })?;

    let dir = tempfile::tempdir()?;
    let out = dir.path().join("scores.tsv");
    let cfg = EndpointConfig {
        backoff_base_ms: 10,
        requests_per_second: 50.0,
        ..EndpointConfig::new(stub.url())
    };
    let first = fetch_scores(&segments, &cfg, &out)?;
    println!(
        "first run: fetched {} skipped {} failures {} requests {}",
        first.fetched,
        first.skipped,
        first.failures.len(),
        first.requests
    );
    let second = fetch_scores(&segments, &cfg, &out)?;
    println!(
        "second run: fetched {} skipped {}",
        second.fetched, second.skipped
    );
    print!("{}", second.store.to_tsv());
    Ok(())
}
