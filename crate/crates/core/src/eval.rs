//! Per-technique precision, recall and F1 plus the pooled micro-F1.
//!
//! Predictions use the gold annotation shape. Within a span the predicted
//! techniques are matched to the gold techniques as multisets, so the order
//! of a multi-label span's rows is irrelevant.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::corpus::{SegmentKey, SpanAnnotation, TechniqueLabel};
use crate::error::{Error, Result};
use crate::net::Prediction;

const N: usize = TechniqueLabel::COUNT;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TechniqueScore {
    pub technique: TechniqueLabel,
    pub true_positives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl TechniqueScore {
    /// Number of gold rows carrying this technique.
    pub fn support(&self) -> u64 {
        self.true_positives + self.false_negatives
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// One row per technique in label order, including unsupported ones.
    pub techniques: Vec<TechniqueScore>,
    pub micro_f1: f64,
    pub gold_rows: u64,
    pub predicted_rows: u64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

fn tally(rows: &[SpanAnnotation]) -> BTreeMap<SegmentKey, [u64; N]> {
    let mut out: BTreeMap<SegmentKey, [u64; N]> = BTreeMap::new();
    for r in rows {
        out.entry(r.key()).or_insert([0; N])[r.technique.index()] += 1;
    }
    out
}

/// Scores predictions against gold rows.
///
/// Every span must receive exactly as many predictions as it has gold rows.
pub fn per_technique_f1(preds: &[SpanAnnotation], golds: &[SpanAnnotation]) -> Result<EvalReport> {
    let gold = tally(golds);
    let pred = tally(preds);
    if let Some(key) = pred.keys().find(|k| !gold.contains_key(k)) {
        return Err(Error::Eval(format!(
            "prediction for {key} has no gold span"
        )));
    }
    let (mut tp, mut fp, mut fneg) = ([0u64; N], [0u64; N], [0u64; N]);
    for (key, g) in &gold {
        let p = pred.get(key).copied().unwrap_or([0; N]);
        let (ng, np): (u64, u64) = (g.iter().sum(), p.iter().sum());
        if ng != np {
            return Err(Error::Eval(format!(
                "span {key} has {ng} gold rows but {np} predictions"
            )));
        }
        for t in 0..N {
            let hit = g[t].min(p[t]);
            tp[t] += hit;
            fp[t] += p[t] - hit;
            fneg[t] += g[t] - hit;
        }
    }
    let techniques: Vec<TechniqueScore> = TechniqueLabel::ALL
        .iter()
        .map(|&t| {
            let i = t.index();
            let precision = ratio(tp[i], tp[i] + fp[i]);
            let recall = ratio(tp[i], tp[i] + fneg[i]);
            TechniqueScore {
                technique: t,
                true_positives: tp[i],
                false_positives: fp[i],
                false_negatives: fneg[i],
                precision,
                recall,
                f1: harmonic(precision, recall),
            }
        })
        .collect();
    let (stp, sfp, sfn): (u64, u64, u64) = (tp.iter().sum(), fp.iter().sum(), fneg.iter().sum());
    let den = stp as f64 + 0.5 * (sfp + sfn) as f64;
    Ok(EvalReport {
        techniques,
        micro_f1: if den == 0.0 { 0.0 } else { stp as f64 / den },
        gold_rows: golds.len() as u64,
        predicted_rows: preds.len() as u64,
    })
}

/// Micro-F1 for single-label class indices, which equals accuracy.
pub fn micro_f1_from_classes(preds: &[usize], golds: &[usize]) -> f64 {
    assert_eq!(preds.len(), golds.len(), "predictions and golds must align");
    if golds.is_empty() {
        return 0.0;
    }
    let correct = preds.iter().zip(golds).filter(|(p, g)| p == g).count();
    correct as f64 / golds.len() as f64
}

/// Prediction rows for a span with `gold_rows` annotations: the top-ranked
/// distinct techniques, one per row. Rows beyond 14 repeat the top class.
pub fn span_predictions(
    key: SegmentKey,
    prediction: &Prediction,
    gold_rows: usize,
) -> Vec<SpanAnnotation> {
    let ranked = prediction.ranked();
    (0..gold_rows)
        .map(|i| {
            let class = ranked.get(i).copied().unwrap_or(prediction.class);
            SpanAnnotation {
                article_id: key.article_id,
                technique: TechniqueLabel::from_index(class).expect("model has 14 classes"),
                span_start: key.span_start,
                span_end: key.span_end,
            }
        })
        .collect()
}

const MICRO_ROW: &str = "Micro-averaged F1";

fn name_width() -> usize {
    TechniqueLabel::ALL
        .iter()
        .map(|t| t.name().len())
        .chain([MICRO_ROW.len()])
        .max()
        .unwrap_or(0)
}

impl EvalReport {
    pub fn get(&self, t: TechniqueLabel) -> &TechniqueScore {
        &self.techniques[t.index()]
    }

    /// Aligned table: one row per technique plus the micro-F1 row.
    pub fn to_text(&self) -> String {
        let w = name_width();
        let mut out = format!(
            "{:<w$}  {:>9}  {:>6}  {:>6}  {:>7}\n",
            "Propaganda technique", "Precision", "Recall", "F1", "Support"
        );
        for s in &self.techniques {
            let _ = writeln!(
                out,
                "{:<w$}  {:>9.3}  {:>6.3}  {:>6.3}  {:>7}",
                s.technique.name(),
                s.precision,
                s.recall,
                s.f1,
                s.support()
            );
        }
        let _ = writeln!(
            out,
            "{:<w$}  {:>9}  {:>6}  {:>6.3}  {:>7}",
            MICRO_ROW, "", "", self.micro_f1, self.gold_rows
        );
        out
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("technique\tprecision\trecall\tf1\tsupport\ttp\tfp\tfn\n");
        for s in &self.techniques {
            let _ = writeln!(
                out,
                "{}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}\t{}\t{}",
                s.technique,
                s.precision,
                s.recall,
                s.f1,
                s.support(),
                s.true_positives,
                s.false_positives,
                s.false_negatives
            );
        }
        let _ = writeln!(
            out,
            "micro-f1\t\t\t{:.6}\t{}\t\t\t",
            self.micro_f1, self.gold_rows
        );
        out
    }
}

/// Side-by-side F1 columns for two reports over the same gold rows.
pub fn format_comparison(
    left_name: &str,
    left: &EvalReport,
    right_name: &str,
    right: &EvalReport,
) -> String {
    let w = name_width();
    let cw = left_name.len().max(right_name.len()).max(6);
    let mut out = format!(
        "{:<w$}  {:>cw$}  {:>cw$}  {:>7}\n",
        "Propaganda technique", left_name, right_name, "Support"
    );
    for (a, b) in left.techniques.iter().zip(&right.techniques) {
        let _ = writeln!(
            out,
            "{:<w$}  {:>cw$.3}  {:>cw$.3}  {:>7}",
            a.technique.name(),
            a.f1,
            b.f1,
            a.support()
        );
    }
    let _ = writeln!(
        out,
        "{:<w$}  {:>cw$.3}  {:>cw$.3}  {:>7}",
        MICRO_ROW, left.micro_f1, right.micro_f1, left.gold_rows
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use TechniqueLabel::*;

    fn row(article_id: u64, start: usize, t: TechniqueLabel) -> SpanAnnotation {
        SpanAnnotation {
            article_id,
            technique: t,
            span_start: start,
            span_end: start + 5,
        }
    }

    #[test]
    fn hand_tallied_four_rows() {
        let golds = [
            row(1, 0, LoadedLanguage),
            row(1, 10, LoadedLanguage),
            row(2, 0, FlagWaving),
            row(2, 10, Doubt),
        ];
        let preds = [
            row(1, 0, LoadedLanguage),
            row(1, 10, FlagWaving),
            row(2, 0, FlagWaving),
            row(2, 10, Doubt),
        ];
        let r = per_technique_f1(&preds, &golds).unwrap();
        assert_eq!(r.micro_f1, 0.75);
        let ll = r.get(LoadedLanguage);
        assert_eq!(
            (ll.true_positives, ll.false_positives, ll.false_negatives),
            (1, 0, 1)
        );
        assert_eq!((ll.precision, ll.recall), (1.0, 0.5));
        assert!((ll.f1 - 2.0 / 3.0).abs() < 1e-15);
        let fw = r.get(FlagWaving);
        assert_eq!((fw.precision, fw.recall), (0.5, 1.0));
        assert!((fw.f1 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.get(Doubt).f1, 1.0);
        assert_eq!(r.get(Slogans).f1, 0.0);
        assert_eq!(r.get(Slogans).support(), 0);
    }

    #[test]
    fn all_correct_and_all_wrong() {
        let golds = [row(1, 0, Slogans), row(1, 10, Doubt)];
        let r = per_technique_f1(&golds, &golds).unwrap();
        assert_eq!(r.micro_f1, 1.0);
        assert_eq!(r.get(Slogans).f1, 1.0);
        let wrong = [row(1, 0, Doubt), row(1, 10, Slogans)];
        assert_eq!(per_technique_f1(&wrong, &golds).unwrap().micro_f1, 0.0);
    }

    #[test]
    fn multi_label_span_matches_as_multiset() {
        let golds = [row(1, 0, LoadedLanguage), row(1, 0, NameCallingLabeling)];
        let swapped = [row(1, 0, NameCallingLabeling), row(1, 0, LoadedLanguage)];
        assert_eq!(per_technique_f1(&swapped, &golds).unwrap().micro_f1, 1.0);
        let doubled = [row(1, 0, LoadedLanguage), row(1, 0, LoadedLanguage)];
        let r = per_technique_f1(&doubled, &golds).unwrap();
        assert_eq!(r.micro_f1, 0.5);
        assert_eq!(r.get(LoadedLanguage).false_positives, 1);
        assert_eq!(r.get(NameCallingLabeling).false_negatives, 1);
    }

    #[test]
    fn alignment_errors() {
        let golds = [row(1, 0, Slogans)];
        assert!(matches!(
            per_technique_f1(&[row(9, 0, Slogans)], &golds),
            Err(Error::Eval(_))
        ));
        assert!(per_technique_f1(&[], &golds).is_err());
        assert!(per_technique_f1(&[row(1, 0, Slogans), row(1, 0, Doubt)], &golds).is_err());
    }

    #[test]
    fn report_has_fifteen_rows() {
        let golds = [row(1, 0, Slogans)];
        let r = per_technique_f1(&golds, &golds).unwrap();
        let text = r.to_text();
        assert_eq!(text.lines().count(), 1 + 15);
        assert!(text
            .lines()
            .last()
            .unwrap()
            .starts_with("Micro-averaged F1"));
        let doubt = text.lines().find(|l| l.starts_with("doubt")).unwrap();
        assert!(
            doubt.contains("0.000") && doubt.trim_end().ends_with(" 0"),
            "{doubt}"
        );
        assert_eq!(r.to_tsv().lines().count(), 16);
        let cmp = format_comparison("Baseline", &r, "Model", &r);
        assert_eq!(cmp.lines().count(), 16);
        assert!(cmp.lines().nth(1).unwrap().matches("0.000").count() == 2);
    }

    #[test]
    fn span_predictions_take_distinct_top_classes() {
        let mut probs = vec![0.0; 14];
        probs[3] = 0.6;
        probs[7] = 0.3;
        probs[1] = 0.1;
        let p = Prediction {
            class: 3,
            probabilities: probs,
        };
        let key = row(4, 2, Doubt).key();
        let rows = span_predictions(key, &p, 2);
        assert_eq!(
            rows.iter().map(|r| r.technique.index()).collect::<Vec<_>>(),
            vec![3, 7]
        );
        assert!(rows.iter().all(|r| r.key() == key));
    }

    fn labeled_rows() -> impl Strategy<Value = (Vec<SpanAnnotation>, Vec<SpanAnnotation>)> {
        proptest::collection::vec((0usize..14, 0usize..14), 1..60).prop_map(|pairs| {
            let golds = pairs
                .iter()
                .enumerate()
                .map(|(i, (g, _))| row(1, i * 10, TechniqueLabel::ALL[*g]))
                .collect();
            let preds = pairs
                .iter()
                .enumerate()
                .map(|(i, (_, p))| row(1, i * 10, TechniqueLabel::ALL[*p]))
                .collect();
            (preds, golds)
        })
    }

    proptest! {
        #[test]
        fn single_label_micro_equals_accuracy((preds, golds) in labeled_rows()) {
            let r = per_technique_f1(&preds, &golds).unwrap();
            let correct = preds.iter().zip(&golds).filter(|(p, g)| p.technique == g.technique).count();
            prop_assert_eq!(r.micro_f1, correct as f64 / golds.len() as f64);
            let p: Vec<usize> = preds.iter().map(|r| r.technique.index()).collect();
            let g: Vec<usize> = golds.iter().map(|r| r.technique.index()).collect();
            prop_assert_eq!(micro_f1_from_classes(&p, &g), r.micro_f1);
        }

        #[test]
        fn row_order_is_irrelevant((mut preds, golds) in labeled_rows(), seed in any::<u64>()) {
            let before = per_technique_f1(&preds, &golds).unwrap();
            crate::net::XorShiftStar::new(seed).shuffle(&mut preds);
            prop_assert_eq!(per_technique_f1(&preds, &golds).unwrap(), before);
        }

        #[test]
        fn counts_reconstruct_totals((preds, golds) in labeled_rows()) {
            let r = per_technique_f1(&preds, &golds).unwrap();
            let predicted: u64 = r.techniques.iter().map(|s| s.true_positives + s.false_positives).sum();
            let support: u64 = r.techniques.iter().map(|s| s.support()).sum();
            prop_assert_eq!(predicted, preds.len() as u64);
            prop_assert_eq!(support, golds.len() as u64);
            prop_assert!((0.0..=1.0).contains(&r.micro_f1));
        }
    }
}
