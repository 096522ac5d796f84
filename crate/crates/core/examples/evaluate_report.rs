//! Per-technique precision, recall and F1 with the pooled micro-average.

use proplab::corpus::{SpanAnnotation, TechniqueLabel};
use proplab::eval::per_technique_f1;

fn row(article_id: u64, start: usize, technique: TechniqueLabel) -> SpanAnnotation {
    SpanAnnotation {
        article_id,
        technique,
        span_start: start,
        span_end: start + 10,
    }
}

fn main() -> proplab::Result<()> {
    use TechniqueLabel::*;
    let gold = vec![
        row(1, 0, LoadedLanguage),
        row(1, 20, LoadedLanguage),
        row(1, 40, NameCallingLabeling),
        row(2, 0, FlagWaving),
        row(2, 20, Doubt),
        // one span, two techniques
        row(2, 40, Repetition),
        row(2, 40, LoadedLanguage),
    ];
    let predicted = vec![
        row(1, 0, LoadedLanguage),
        row(1, 20, NameCallingLabeling),
        row(1, 40, NameCallingLabeling),
        row(2, 0, FlagWaving),
        row(2, 20, Doubt),
        row(2, 40, LoadedLanguage),
        row(2, 40, Slogans),
    ];
    let report = per_technique_f1(&predicted, &gold)?;
    print!("{}", report.to_text());
    Ok(())
}
