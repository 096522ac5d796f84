//! Kendall's tau-b between binary technique indicators and emotion scores.
//!
//! `kendall_tau_b` counts pairs in `O(n log n)` (sort plus merge-sort inversion
//! count). Significance uses the tie-corrected normal approximation of the
//! `C - D` statistic. [`exact_permutation_p`] is an exact alternative for
//! small samples.

use std::cmp::Ordering;
use std::fmt::Write as _;

use crate::corpus::{LabeledSpan, TechniqueLabel};
use crate::emotion::{EmotionScores, DIMENSION_NAMES, EMOTION_DIMS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationResult {
    pub tau: f64,
    pub p_value: f64,
    pub n: usize,
    /// `C - D`
    pub statistic: i64,
}

impl CorrelationResult {
    pub fn stars(&self) -> &'static str {
        stars(self.p_value)
    }

    /// `τ` to three decimals with the significance suffix, e.g. `-0.224**`.
    pub fn display(&self) -> String {
        format!("{:.3}{}", self.tau, self.stars())
    }
}

/// `**` for p < 0.01, `*` for p < 0.05, empty otherwise.
pub fn stars(p: f64) -> &'static str {
    if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

fn cmp_f64(a: &f64, b: &f64) -> Ordering {
    a.partial_cmp(b).expect("NaN rejected on entry")
}

/// Sizes of runs of equal values in a sorted slice.
fn tie_groups(sorted: &[f64]) -> Vec<u64> {
    let mut groups = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        groups.push((j - i) as u64);
        i = j;
    }
    groups
}

/// Merge sort counting inversions (strictly decreasing pairs).
fn count_inversions(v: &mut [f64], buf: &mut Vec<f64>) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut inv = count_inversions(&mut v[..mid], buf) + count_inversions(&mut v[mid..], buf);
    buf.clear();
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[j] < v[i] {
            inv += (mid - i) as u64;
            buf.push(v[j]);
            j += 1;
        } else {
            buf.push(v[i]);
            i += 1;
        }
    }
    buf.extend_from_slice(&v[i..mid]);
    buf.extend_from_slice(&v[j..n]);
    v.copy_from_slice(buf);
    inv
}

fn pairs(t: u64) -> u64 {
    t * t.saturating_sub(1) / 2
}

fn validate(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Dimension {
            what: "kendall tau inputs".into(),
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::Degenerate("need at least two observations".into()));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::Degenerate("NaN in input".into()));
    }
    if x.iter().all(|v| *v == x[0]) {
        return Err(Error::Degenerate("x is constant".into()));
    }
    if y.iter().all(|v| *v == y[0]) {
        return Err(Error::Degenerate("y is constant".into()));
    }
    Ok(())
}

/// Tie-corrected variance of `C - D` under independence.
pub fn statistic_variance(n: u64, x_ties: &[u64], y_ties: &[u64]) -> f64 {
    let n_f = n as f64;
    let sum = |ties: &[u64], f: &dyn Fn(f64) -> f64| ties.iter().map(|&t| f(t as f64)).sum::<f64>();
    let v0 = n_f * (n_f - 1.0) * (2.0 * n_f + 5.0);
    let vt = sum(x_ties, &|t| t * (t - 1.0) * (2.0 * t + 5.0));
    let vu = sum(y_ties, &|t| t * (t - 1.0) * (2.0 * t + 5.0));
    let v1 = sum(x_ties, &|t| t * (t - 1.0)) * sum(y_ties, &|t| t * (t - 1.0))
        / (2.0 * n_f * (n_f - 1.0));
    let v2 = if n > 2 {
        sum(x_ties, &|t| t * (t - 1.0) * (t - 2.0)) * sum(y_ties, &|t| t * (t - 1.0) * (t - 2.0))
            / (9.0 * n_f * (n_f - 1.0) * (n_f - 2.0))
    } else {
        0.0
    };
    (v0 - vt - vu) / 18.0 + v1 + v2
}

/// Two-sided p-value of a normal z score.
pub fn two_sided_normal_p(z: f64) -> f64 {
    libm::erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}

pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    validate(x, y)?;
    let n = x.len();

    let mut pairs_xy: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs_xy.sort_by(|a, b| cmp_f64(&a.0, &b.0).then(cmp_f64(&a.1, &b.1)));

    let xs: Vec<f64> = pairs_xy.iter().map(|p| p.0).collect();
    let x_ties = tie_groups(&xs);
    let mut joint_ties = 0u64;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && pairs_xy[j] == pairs_xy[i] {
            j += 1;
        }
        joint_ties += pairs((j - i) as u64);
        i = j;
    }

    let mut ys: Vec<f64> = pairs_xy.iter().map(|p| p.1).collect();
    let swaps = count_inversions(&mut ys, &mut Vec::with_capacity(n));
    let y_ties = tie_groups(&ys);

    let n0 = pairs(n as u64);
    let tied_x: u64 = x_ties.iter().map(|&t| pairs(t)).sum();
    let tied_y: u64 = y_ties.iter().map(|&t| pairs(t)).sum();
    // Pairs untied in both: concordant + discordant.
    let untied = n0 + joint_ties - tied_x - tied_y;
    let statistic = untied as i64 - 2 * swaps as i64;

    let denom = (((n0 - tied_x) as f64) * ((n0 - tied_y) as f64)).sqrt();
    let tau = (statistic as f64 / denom).clamp(-1.0, 1.0);
    let var = statistic_variance(n as u64, &x_ties, &y_ties);
    let p_value = if var > 0.0 {
        two_sided_normal_p(statistic as f64 / var.sqrt())
    } else {
        1.0
    };
    Ok(CorrelationResult {
        tau,
        p_value,
        n,
        statistic,
    })
}

/// Largest sample accepted by [`exact_permutation_p`].
pub const EXACT_MAX_N: usize = 30;
/// Largest sample for full enumeration when neither variable is binary.
pub const EXACT_ENUMERATION_MAX_N: usize = 10;

fn pair_statistic(x: &[f64], y: &[f64]) -> i64 {
    let mut s = 0i64;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let a = cmp_f64(&x[i], &x[j]) as i64;
            let b = cmp_f64(&y[i], &y[j]) as i64;
            s += a * b;
        }
    }
    s
}

fn binomial(n: u64, k: u64) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * u128::from(n - i) / u128::from(i + 1))
}

/// Null distribution of `C - D` when `binary` takes two values, by dynamic
/// programming over the tie groups of `other`. Returns (offset, counts).
fn binary_null_distribution(binary: &[f64], other: &[f64]) -> (i64, Vec<u128>) {
    let low = binary.iter().copied().fold(f64::INFINITY, f64::min);
    let ones = binary.iter().filter(|v| **v != low).count();
    let n = binary.len();
    let mut sorted = other.to_vec();
    sorted.sort_by(cmp_f64);
    let groups = tie_groups(&sorted);

    let max_abs = (ones * (n - ones)) as i64;
    let width = (2 * max_abs + 1) as usize;
    // dp[a][s + max_abs] = ways with `a` ones placed so far
    let mut dp = vec![vec![0u128; width]; ones + 1];
    dp[0][max_abs as usize] = 1;
    let zeros_total = n - ones;
    let mut seen = 0usize;
    for &g in &groups {
        let g = g as usize;
        let mut next = vec![vec![0u128; width]; ones + 1];
        for (a, row) in dp.iter().enumerate() {
            if a > seen {
                break;
            }
            let zeros_below = (seen - a) as i64;
            for (s_idx, &ways) in row.iter().enumerate() {
                if ways == 0 {
                    continue;
                }
                // Keep both ones and zeros within their totals.
                let min_k = g.saturating_sub(zeros_total - (seen - a));
                for k in min_k..=g.min(ones - a) {
                    let delta = k as i64 * zeros_below - (g - k) as i64 * a as i64;
                    let target = (s_idx as i64 + delta) as usize;
                    next[a + k][target] += ways * binomial(g as u64, k as u64);
                }
            }
        }
        dp = next;
        seen += g;
    }
    (max_abs, dp.swap_remove(ones))
}

fn is_binary(v: &[f64]) -> bool {
    let first = v[0];
    let other = v.iter().find(|x| **x != first);
    match other {
        Some(o) => v.iter().all(|x| *x == first || x == o),
        None => true,
    }
}

fn heap_permutations(v: &mut [f64], k: usize, visit: &mut dyn FnMut(&[f64])) {
    if k <= 1 {
        visit(v);
        return;
    }
    heap_permutations(v, k - 1, visit);
    for i in 0..k - 1 {
        if k.is_multiple_of(2) {
            v.swap(i, k - 1);
        } else {
            v.swap(0, k - 1);
        }
        heap_permutations(v, k - 1, visit);
    }
}

/// Exact two-sided permutation p-value `P(|S| >= |S_obs|)` for `S = C - D`.
///
/// Exact for any `n <= 30` when either variable is binary; otherwise full
/// enumeration is used, limited to `n <= 10`.
pub fn exact_permutation_p(x: &[f64], y: &[f64]) -> Result<f64> {
    validate(x, y)?;
    let n = x.len();
    if n > EXACT_MAX_N {
        return Err(Error::Config(format!(
            "exact permutation test supports n <= {EXACT_MAX_N}, got {n}"
        )));
    }
    let observed = pair_statistic(x, y).abs();
    let (binary, other) = if is_binary(x) {
        (x, y)
    } else if is_binary(y) {
        (y, x)
    } else {
        if n > EXACT_ENUMERATION_MAX_N {
            return Err(Error::Config(format!(
                "exact test without a binary variable supports n <= {EXACT_ENUMERATION_MAX_N}"
            )));
        }
        let (mut extreme, mut total) = (0u64, 0u64);
        let mut perm = y.to_vec();
        heap_permutations(&mut perm, n, &mut |p| {
            total += 1;
            if pair_statistic(x, p).abs() >= observed {
                extreme += 1;
            }
        });
        return Ok(extreme as f64 / total as f64);
    };
    let (offset, counts) = binary_null_distribution(binary, other);
    let total: u128 = counts.iter().sum();
    let extreme: u128 = counts
        .iter()
        .enumerate()
        .filter(|(i, _)| (*i as i64 - offset).abs() >= observed)
        .map(|(_, c)| *c)
        .sum();
    Ok(extreme as f64 / total as f64)
}

/// 14 techniques by 5 emotion dimensions; `None` marks a degenerate cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTable {
    pub n: usize,
    pub cells: Vec<[Option<CorrelationResult>; EMOTION_DIMS]>,
}

/// Correlates technique presence with every emotion dimension.
pub fn correlation_table(
    spans: &[LabeledSpan],
    scores: &[EmotionScores],
) -> Result<CorrelationTable> {
    if spans.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if spans.len() != scores.len() {
        return Err(Error::Dimension {
            what: "scores per segment".into(),
            expected: spans.len(),
            got: scores.len(),
        });
    }
    let dims: Vec<Vec<f64>> = (0..EMOTION_DIMS)
        .map(|d| scores.iter().map(|s| s.get(d)).collect())
        .collect();
    let cells = TechniqueLabel::ALL
        .iter()
        .map(|t| {
            let indicator: Vec<f64> = spans
                .iter()
                .map(|s| if s.labels.contains(t) { 1.0 } else { 0.0 })
                .collect();
            std::array::from_fn(|d| kendall_tau_b(&indicator, &dims[d]).ok())
        })
        .collect();
    Ok(CorrelationTable {
        n: spans.len(),
        cells,
    })
}

fn title_case(s: &str) -> String {
    let mut c = s.chars();
    c.next()
        .map(|f| f.to_uppercase().chain(c).collect())
        .unwrap_or_default()
}

impl CorrelationTable {
    pub fn get(&self, technique: TechniqueLabel, dim: usize) -> Option<&CorrelationResult> {
        self.cells[technique.index()][dim].as_ref()
    }

    fn cell_text(&self, row: usize, dim: usize) -> String {
        self.cells[row][dim]
            .map(|c| c.display())
            .unwrap_or_else(|| "n/a".to_string())
    }

    /// Aligned table with one row per technique and one column per dimension.
    pub fn to_text(&self) -> String {
        let name_width = TechniqueLabel::ALL
            .iter()
            .map(|t| t.name().len())
            .max()
            .unwrap_or(0);
        let mut out = String::new();
        let _ = write!(out, "{:<name_width$}", "Propaganda technique");
        for d in DIMENSION_NAMES {
            let _ = write!(out, "  {:>9}", title_case(d));
        }
        out.push('\n');
        for (row, t) in TechniqueLabel::ALL.iter().enumerate() {
            let _ = write!(out, "{:<name_width$}", t.name());
            for d in 0..EMOTION_DIMS {
                let _ = write!(out, "  {:>9}", self.cell_text(row, d));
            }
            out.push('\n');
        }
        let _ = writeln!(out, "(** p < 0.01, * p < 0.05, n = {})", self.n);
        out
    }

    pub fn to_tsv(&self) -> String {
        let mut out = format!("technique\t{}\n", DIMENSION_NAMES.join("\t"));
        for (row, t) in TechniqueLabel::ALL.iter().enumerate() {
            out.push_str(t.name());
            for d in 0..EMOTION_DIMS {
                out.push('\t');
                out.push_str(&self.cell_text(row, d));
            }
            out.push('\n');
        }
        out
    }

    /// Long format with full-precision τ and p per cell.
    pub fn to_long_tsv(&self) -> String {
        let mut out = String::from("technique\tdimension\ttau\tp_value\tn\tstars\n");
        for (row, t) in TechniqueLabel::ALL.iter().enumerate() {
            for (d, dim) in DIMENSION_NAMES.iter().enumerate() {
                match &self.cells[row][d] {
                    Some(c) => {
                        let _ = writeln!(
                            out,
                            "{}\t{dim}\t{}\t{}\t{}\t{}",
                            t,
                            c.tau,
                            c.p_value,
                            c.n,
                            c.stars()
                        );
                    }
                    None => {
                        let _ = writeln!(out, "{t}\t{dim}\tn/a\tn/a\t{}\t", self.n);
                    }
                }
            }
        }
        out
    }
}
