#![allow(dead_code)]

use std::path::{Path, PathBuf};

use proplab::synthetic::{SyntheticCorpus, SyntheticPaths, SyntheticSpec};

/// Runs the CLI in-process and returns (exit code, stdout, stderr).
pub fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("proplab").chain(args.iter().copied());
    let code = proplab::cli::run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

pub fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

pub fn write_corpus(dir: &Path, spec: &SyntheticSpec) -> SyntheticPaths {
    SyntheticCorpus::generate(spec).unwrap().write(dir).unwrap()
}

/// Featurizes a written corpus with the hashing embedder and its lexicon.
pub fn featurize(paths: &SyntheticPaths, dim: usize, out: &Path) {
    let (code, _, err) = cli(&[
        "featurize",
        "--articles",
        s(&paths.articles),
        "--labels",
        s(&paths.labels),
        "--emotion-lexicon",
        s(&paths.lexicon),
        "--dim",
        &dim.to_string(),
        "--out",
        s(out),
    ]);
    assert_eq!(code, 0, "{err}");
}

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(rel)
}
