//! Hashed bag-of-words embeddings and the on-disk embedding file format,
//! including the `#ctx` variant keys and dimension checking on load.

use std::path::Path;

use proplab::corpus::{extract_segment, Article, SpanAnnotation, TechniqueLabel};
use proplab::embeddings::{hash_embed, EmbeddingProvider, EmbeddingStore, CONTEXT_SUFFIX};

fn main() -> proplab::Result<()> {
    let article = Article {
        id: 7,
        text: "Officials said the plan will save every family money this year.".into(),
    };
    let ann = SpanAnnotation {
        article_id: 7,
        technique: TechniqueLabel::ExaggerationMinimisation,
        span_start: 19,
        span_end: 50,
    };
    let seg = extract_segment(&article, &ann, 3)?;
    let dim = 16;
    let hashed = EmbeddingProvider::Hash { dim };

    let mut store = EmbeddingStore::new(dim);
    store.insert(seg.key.to_string(), hashed.get_embedding(&seg, false)?)?;
    store.insert(
        format!("{}{CONTEXT_SUFFIX}", seg.key),
        hashed.get_embedding(&seg, true)?,
    )?;
    let text = store.to_text();
    print!("{text}");

    let reloaded =
        EmbeddingProvider::Store(EmbeddingStore::parse(Path::new("vectors.txt"), &text)?);
    let drift = reloaded
        .get_embedding(&seg, true)?
        .iter()
        .zip(hash_embed(&seg.tokens_with_context(), dim))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("largest change after the 9-digit file round trip: {drift:.1e}");

    let truncated = text.replacen(&format!("#dim={dim}"), "#dim=12", 1);
    match EmbeddingStore::parse(Path::new("vectors.txt"), &truncated) {
        Err(e) => println!("wrong header rejected: {e}"),
        Ok(_) => println!("wrong header accepted"),
    }
    Ok(())
}
