//! Automatic signature-rule generation from discovered n-grams: rank
//! candidates by an indicativeness weight, drop anything that fires on more
//! than a small fraction of negative documents, collapse candidates that
//! always co-occur, and emit a Yara-syntax rule that fires if any remaining
//! pattern appears.

use std::collections::HashMap;

use aho_corasick::AhoCorasick;
use rayon::prelude::*;

use crate::corpus::CorpusSource;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

/// A generated signature: equal-length byte patterns joined by an
/// "any of them" condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignatureRule {
    name: String,
    /// Deduplicated, lexicographically sorted patterns.
    patterns: Vec<Vec<u8>>,
    window_len: usize,
    source_run: Option<String>,
}

impl SignatureRule {
    pub fn new(
        name: &str,
        mut patterns: Vec<Vec<u8>>,
        window_len: usize,
        source_run: Option<String>,
    ) -> Result<Self> {
        if !is_valid_rule_name(name) {
            return Err(Error::InvalidInput(format!(
                "rule name {name:?} is not a valid identifier"
            )));
        }
        if patterns.is_empty() {
            return Err(Error::InvalidInput("rule needs at least one pattern".into()));
        }
        if let Some(bad) = patterns.iter().find(|p| p.len() != window_len) {
            return Err(Error::InvalidInput(format!(
                "pattern of {} bytes in a rule over {window_len}-byte n-grams",
                bad.len()
            )));
        }
        patterns.sort_unstable();
        patterns.dedup();
        Ok(SignatureRule {
            name: name.to_string(),
            patterns,
            window_len,
            source_run,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn patterns(&self) -> &[Vec<u8>] {
        &self.patterns
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    pub fn source_run(&self) -> Option<&str> {
        self.source_run.as_deref()
    }

    pub fn condition(&self) -> &'static str {
        "any of them"
    }

    /// Yara rule text: hex string per pattern, `any of them` condition.
    /// Byte-stable for identical inputs.
    pub fn to_yara(&self) -> String {
        let mut out = String::new();
        if let Some(run) = &self.source_run {
            out.push_str(&format!("// n={} source={run}\n", self.window_len));
        } else {
            out.push_str(&format!("// n={}\n", self.window_len));
        }
        out.push_str(&format!("rule {}\n{{\n    strings:\n", self.name));
        for (i, pattern) in self.patterns.iter().enumerate() {
            out.push_str(&format!("        $s{i} = {{ {} }}\n", spaced_hex(pattern)));
        }
        out.push_str("    condition:\n        any of them\n}\n");
        out
    }

    /// True when the document contains at least one pattern.
    pub fn fires_on(&self, doc: &[u8]) -> bool {
        // Patterns are equal-length so standard match semantics suffice for
        // an any-of firing decision.
        AhoCorasick::new(&self.patterns)
            .map(|ac| ac.is_match(doc))
            .unwrap_or(false)
    }
}

fn spaced_hex(bytes: &[u8]) -> String {
    bytes
        .iter()
        .map(|b| format!("{b:02X}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn is_valid_rule_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    name.len() <= 128 && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Confusion counts and derived rates for one rule over one labeled corpus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleMetrics {
    pub true_positives: u64,
    pub false_positives: u64,
    pub true_negatives: u64,
    pub false_negatives: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub fpr: f64,
}

impl RuleMetrics {
    pub fn from_counts(tp: u64, fp: u64, tn: u64, fn_: u64) -> Result<Self> {
        if tp + fn_ == 0 {
            return Err(Error::NoPositives);
        }
        if fp + tn == 0 {
            return Err(Error::NoNegatives);
        }
        let precision = if tp + fp > 0 {
            tp as f64 / (tp + fp) as f64
        } else {
            0.0
        };
        let recall = tp as f64 / (tp + fn_) as f64;
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Ok(RuleMetrics {
            true_positives: tp,
            false_positives: fp,
            true_negatives: tn,
            false_negatives: fn_,
            precision,
            recall,
            f1,
            fpr: fp as f64 / (fp + tn) as f64,
        })
    }
}

/// Indices of the `limit` highest-weighted features, weight descending, ties
/// to the lexicographically smaller n-gram.
pub fn select_candidates(
    features: &[Vec<u8>],
    weights: &[f64],
    limit: usize,
) -> Result<Vec<usize>> {
    if features.len() != weights.len() {
        return Err(Error::InvalidInput(format!(
            "{} weights for {} features",
            weights.len(),
            features.len()
        )));
    }
    if weights.iter().any(|w| w.is_nan()) {
        return Err(Error::InvalidInput("weights must not be NaN".into()));
    }
    let mut order: Vec<usize> = (0..features.len()).collect();
    order.sort_unstable_by(|&a, &b| {
        weights[b]
            .partial_cmp(&weights[a])
            .unwrap()
            .then_with(|| features[a].cmp(&features[b]))
    });
    order.truncate(limit);
    Ok(order)
}

/// Drops candidates whose presence rate among negative-label documents
/// exceeds `max_fpr`. The positive label defines the class the rule targets;
/// every other label is negative.
pub fn filter_fpr(
    candidates: &[usize],
    matrix: &FeatureMatrix,
    positive: &str,
    max_fpr: f64,
) -> Result<Vec<usize>> {
    let labels = matrix
        .labels()
        .ok_or_else(|| Error::InvalidInput("matrix has no labels".into()))?;
    let negatives: Vec<usize> = labels
        .iter()
        .enumerate()
        .filter(|(_, l)| l.as_str() != positive)
        .map(|(i, _)| i)
        .collect();
    if negatives.is_empty() {
        return Err(Error::NoNegatives);
    }
    let presence = matrix.presence();
    let negative_count = negatives.len() as f64;
    let negative_set: Vec<bool> = labels.iter().map(|l| l.as_str() != positive).collect();
    Ok(candidates
        .iter()
        .copied()
        .filter(|&c| {
            let hits = presence[c]
                .iter()
                .filter(|&&doc| negative_set[doc as usize])
                .count();
            hits as f64 / negative_count <= max_fpr
        })
        .collect())
}

/// Collapses candidates with identical document-presence vectors, keeping
/// the lexicographically smallest n-gram of each group (a deterministic
/// stand-in for picking one at random). Input order is preserved.
pub fn dedupe_cooccurring(candidates: &[usize], matrix: &FeatureMatrix) -> Vec<usize> {
    let presence = matrix.presence();
    let mut keeper: HashMap<&[u32], usize> = HashMap::new();
    for &c in candidates {
        let key = presence[c].as_slice();
        match keeper.get_mut(key) {
            None => {
                keeper.insert(key, c);
            }
            Some(best) => {
                if matrix.features()[c] < matrix.features()[*best] {
                    *best = c;
                }
            }
        }
    }
    candidates
        .iter()
        .copied()
        .filter(|c| keeper.get(presence[*c].as_slice()) == Some(c))
        .collect()
}

/// Builds the rule from the surviving candidate indices.
pub fn emit_rule(
    matrix: &FeatureMatrix,
    subset: &[usize],
    name: &str,
    source_run: Option<String>,
) -> Result<SignatureRule> {
    if subset.is_empty() {
        return Err(Error::InvalidInput(
            "no candidates survived; cannot emit an empty rule".into(),
        ));
    }
    let window_len = matrix.features()[subset[0]].len();
    let patterns = subset
        .iter()
        .map(|&i| matrix.features()[i].clone())
        .collect();
    SignatureRule::new(name, patterns, window_len, source_run)
}

/// Evaluates a rule over a labeled corpus: the rule fires on a document iff
/// at least one pattern occurs as a contiguous byte substring.
pub fn evaluate_rule(
    rule: &SignatureRule,
    corpus: &CorpusSource,
    labels: &[String],
    positive: &str,
) -> Result<RuleMetrics> {
    if labels.len() != corpus.doc_count() {
        return Err(Error::InvalidInput(format!(
            "{} labels for {} documents",
            labels.len(),
            corpus.doc_count()
        )));
    }
    let automaton = AhoCorasick::new(rule.patterns())
        .map_err(|e| Error::InvalidInput(format!("automaton construction failed: {e}")))?;
    let outcomes: Vec<Result<bool>> = (0..corpus.doc_count())
        .into_par_iter()
        .map(|i| Ok(automaton.is_match(&*corpus.read_doc(i)?)))
        .collect();
    let (mut tp, mut fp, mut tn, mut fn_) = (0u64, 0u64, 0u64, 0u64);
    for (i, outcome) in outcomes.into_iter().enumerate() {
        let fired = outcome?;
        let is_positive = labels[i] == positive;
        match (fired, is_positive) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    RuleMetrics::from_counts(tp, fp, tn, fn_)
}

/// How many documents of the corpus the rule fires on (for false-positive
/// checks against an unlabeled benign set).
pub fn count_firing_docs(rule: &SignatureRule, corpus: &CorpusSource) -> Result<u64> {
    let automaton = AhoCorasick::new(rule.patterns())
        .map_err(|e| Error::InvalidInput(format!("automaton construction failed: {e}")))?;
    let outcomes: Vec<Result<bool>> = (0..corpus.doc_count())
        .into_par_iter()
        .map(|i| Ok(automaton.is_match(&*corpus.read_doc(i)?)))
        .collect();
    let mut fired = 0u64;
    for outcome in outcomes {
        if outcome? {
            fired += 1;
        }
    }
    Ok(fired)
}

/// Picks the best rule across window lengths: highest training F1, ties to
/// the smaller n.
pub fn select_best_n(candidates: &[(usize, SignatureRule, RuleMetrics)]) -> Result<usize> {
    if candidates.is_empty() {
        return Err(Error::InvalidInput("no candidate rules".into()));
    }
    let mut best = 0usize;
    for (i, (n, _, metrics)) in candidates.iter().enumerate().skip(1) {
        let (best_n, _, best_metrics) = &candidates[best];
        if metrics.f1 > best_metrics.f1 || (metrics.f1 == best_metrics.f1 && n < best_n) {
            best = i;
        }
    }
    Ok(best)
}

/// Built-in indicativeness proxy when no externally trained weights are
/// available: log-odds of smoothed presence rates between positive and
/// negative documents.
pub fn presence_log_odds(matrix: &FeatureMatrix, positive: &str) -> Result<Vec<f64>> {
    let labels = matrix
        .labels()
        .ok_or_else(|| Error::InvalidInput("matrix has no labels".into()))?;
    let positive_total = labels.iter().filter(|l| l.as_str() == positive).count();
    let negative_total = labels.len() - positive_total;
    if positive_total == 0 {
        return Err(Error::NoPositives);
    }
    if negative_total == 0 {
        return Err(Error::NoNegatives);
    }
    let is_positive: Vec<bool> = labels.iter().map(|l| l.as_str() == positive).collect();
    Ok(matrix
        .presence()
        .iter()
        .map(|docs| {
            let pos_with = docs.iter().filter(|&&d| is_positive[d as usize]).count();
            let neg_with = docs.len() - pos_with;
            let p = (pos_with as f64 + 1.0) / (positive_total as f64 + 2.0);
            let q = (neg_with as f64 + 1.0) / (negative_total as f64 + 2.0);
            (p / (1.0 - p)).ln() - (q / (1.0 - q)).ln()
        })
        .collect())
}

/// End-to-end generation options; defaults follow the signature workflow
/// (4000 candidates, 5% negative-presence cutoff).
#[derive(Debug, Clone)]
pub struct RuleGenOptions {
    pub name: String,
    pub max_candidates: usize,
    pub max_fpr: f64,
    pub source_run: Option<String>,
}

impl RuleGenOptions {
    pub fn new(name: impl Into<String>) -> Self {
        RuleGenOptions {
            name: name.into(),
            max_candidates: 4000,
            max_fpr: 0.05,
            source_run: None,
        }
    }
}

/// Full pipeline: weights (given, or the built-in presence log-odds proxy)
/// -> top indicative candidates -> FPR filter -> co-occurrence dedup -> rule.
///
/// Only candidates with weight > 0 are considered: a non-positive weight
/// marks a feature indicative of the complement class, and a small feature
/// pool must not let those leak into the rule just because the candidate
/// budget is larger than the pool.
pub fn generate_rule(
    matrix: &FeatureMatrix,
    positive: &str,
    weights: Option<&[f64]>,
    options: &RuleGenOptions,
) -> Result<SignatureRule> {
    let proxy;
    let weights = match weights {
        Some(w) => w,
        None => {
            proxy = presence_log_odds(matrix, positive)?;
            &proxy
        }
    };
    let ranked = select_candidates(matrix.features(), weights, options.max_candidates)?;
    let indicative: Vec<usize> = ranked.into_iter().filter(|&i| weights[i] > 0.0).collect();
    let kept = filter_fpr(&indicative, matrix, positive, options.max_fpr)?;
    let deduped = dedupe_cooccurring(&kept, matrix);
    emit_rule(matrix, &deduped, &options.name, options.source_run.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{vectorize, FeatureMode};

    fn labeled_matrix() -> FeatureMatrix {
        // doc0/doc1 positive (contain AB), doc2/doc3 negative; CD everywhere,
        // EF negative-only, GH positive-only co-occurring with AB.
        let docs = vec![
            b"ABxxCDxxGH".to_vec(),
            b"AByyCDyyGH".to_vec(),
            b"zzzzCDxxEF".to_vec(),
            b"wwwwCDyyEF".to_vec(),
        ];
        let features = vec![
            b"AB".to_vec(),
            b"CD".to_vec(),
            b"EF".to_vec(),
            b"GH".to_vec(),
        ];
        vectorize(
            &CorpusSource::from_docs(docs),
            &features,
            FeatureMode::Count,
        )
        .unwrap()
        .with_labels(vec!["mal".into(), "mal".into(), "ben".into(), "ben".into()])
        .unwrap()
    }

    #[test]
    fn select_candidates_ranks_by_weight_then_gram() {
        let features = vec![b"bb".to_vec(), b"aa".to_vec(), b"cc".to_vec()];
        let all = select_candidates(&features, &[0.5, 0.5, 0.9], 10).unwrap();
        assert_eq!(all, vec![2, 1, 0]); // cc first, then tie aa < bb
        let top2 = select_candidates(&features, &[0.5, 0.5, 0.9], 2).unwrap();
        assert_eq!(top2, vec![2, 1]);
        assert!(select_candidates(&features, &[0.1], 2).is_err());
        assert!(select_candidates(&features, &[0.1, f64::NAN, 0.2], 2).is_err());
    }

    #[test]
    fn select_candidates_equal_weights_give_lexicographic_prefix() {
        let features = vec![b"dd".to_vec(), b"aa".to_vec(), b"cc".to_vec()];
        let picked = select_candidates(&features, &[1.0, 1.0, 1.0], 2).unwrap();
        assert_eq!(picked, vec![1, 2]); // aa, cc
    }

    #[test]
    fn fpr_filter_drops_ubiquitous_negatives() {
        let matrix = labeled_matrix();
        let kept = filter_fpr(&[0, 1, 2, 3], &matrix, "mal", 0.05).unwrap();
        // CD is in every negative doc (FPR 1.0), EF in all negatives too;
        // AB and GH never appear in negatives.
        assert_eq!(kept, vec![0, 3]);
        // Loosening the cutoff to 1.0 keeps everything.
        let kept = filter_fpr(&[0, 1, 2, 3], &matrix, "mal", 1.0).unwrap();
        assert_eq!(kept, vec![0, 1, 2, 3]);
    }

    #[test]
    fn fpr_filter_needs_negatives() {
        let matrix = labeled_matrix();
        assert!(filter_fpr(&[0], &matrix, "nonexistent-positive-makes-all-negative", 0.05).is_ok());
        // All docs positive -> no negatives -> refuse.
        let docs = vec![b"AB".to_vec()];
        let m = vectorize(&CorpusSource::from_docs(docs), &[b"AB".to_vec()], FeatureMode::Count)
            .unwrap()
            .with_labels(vec!["mal".into()])
            .unwrap();
        assert!(matches!(
            filter_fpr(&[0], &m, "mal", 0.05),
            Err(Error::NoNegatives)
        ));
    }

    #[test]
    fn dedupe_keeps_lexicographically_smallest_of_each_group() {
        let matrix = labeled_matrix();
        // AB and GH share the presence vector {0,1}; AB is smaller.
        let deduped = dedupe_cooccurring(&[0, 1, 2, 3], &matrix);
        assert_eq!(deduped, vec![0, 1, 2]);
        let deduped = dedupe_cooccurring(&[3, 2, 1], &matrix);
        assert_eq!(deduped, vec![3, 2, 1]); // without AB, GH survives
    }

    #[test]
    fn dedupe_leaves_distinct_vectors_alone() {
        let matrix = labeled_matrix();
        let deduped = dedupe_cooccurring(&[1, 2], &matrix);
        assert_eq!(deduped, vec![1, 2]);
    }

    #[test]
    fn emitted_yara_text_is_golden() {
        let rule = SignatureRule::new(
            "fam_demo",
            vec![vec![0xDE, 0xAD], vec![0xBE, 0xEF]],
            2,
            None,
        )
        .unwrap();
        let expected = "// n=2\n\
                        rule fam_demo\n\
                        {\n    strings:\n\
                        \x20       $s0 = { BE EF }\n\
                        \x20       $s1 = { DE AD }\n\
                        \x20   condition:\n\
                        \x20       any of them\n}\n";
        assert_eq!(rule.to_yara(), expected);
    }

    #[test]
    fn single_pattern_rule_text() {
        let rule = SignatureRule::new("one", vec![b"ABCDEFGH".to_vec()], 8, None).unwrap();
        let text = rule.to_yara();
        assert!(text.contains("$s0 = { 41 42 43 44 45 46 47 48 }"));
        assert!(!text.contains("$s1"));
        assert!(text.contains("any of them"));
    }

    #[test]
    fn patterns_redecode_to_their_sources() {
        let patterns = vec![vec![0x00, 0xFF], vec![0x7F, 0x80]];
        let rule = SignatureRule::new("roundtrip", patterns.clone(), 2, None).unwrap();
        for pattern in rule.patterns() {
            let hex: String = spaced_hex(pattern).split(' ').collect::<Vec<_>>().join("");
            assert_eq!(&crate::tsv::parse_hex(&hex).unwrap(), pattern);
        }
        assert_eq!(rule.patterns().len(), 2);
    }

    #[test]
    fn rule_validation() {
        assert!(SignatureRule::new("bad name", vec![b"ab".to_vec()], 2, None).is_err());
        assert!(SignatureRule::new("1leading", vec![b"ab".to_vec()], 2, None).is_err());
        assert!(SignatureRule::new("ok", vec![], 2, None).is_err());
        assert!(SignatureRule::new("ok", vec![b"abc".to_vec()], 2, None).is_err());
        // Duplicates collapse.
        let rule =
            SignatureRule::new("ok", vec![b"ab".to_vec(), b"ab".to_vec()], 2, None).unwrap();
        assert_eq!(rule.patterns().len(), 1);
    }

    #[test]
    fn evaluate_rule_confusion_counts() {
        let rule = SignatureRule::new("detector", vec![b"EVIL".to_vec()], 4, None).unwrap();
        let corpus = CorpusSource::from_docs(vec![
            b"xxEVILxx".to_vec(), // positive, fires: TP
            b"harmless".to_vec(), // positive, misses: FN
            b"also ok.".to_vec(), // negative, quiet: TN
            b"ohEVILno".to_vec(), // negative, fires: FP
        ]);
        let labels: Vec<String> = ["mal", "mal", "ben", "ben"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let metrics = evaluate_rule(&rule, &corpus, &labels, "mal").unwrap();
        assert_eq!(
            (
                metrics.true_positives,
                metrics.false_positives,
                metrics.true_negatives,
                metrics.false_negatives
            ),
            (1, 1, 1, 1)
        );
        assert_eq!(metrics.precision, 0.5);
        assert_eq!(metrics.recall, 0.5);
        assert_eq!(metrics.f1, 0.5);
        assert_eq!(metrics.fpr, 0.5);
    }

    #[test]
    fn evaluate_rule_requires_positives() {
        let rule = SignatureRule::new("detector", vec![b"EVIL".to_vec()], 4, None).unwrap();
        let corpus = CorpusSource::from_docs(vec![b"benign".to_vec()]);
        let labels = vec!["ben".to_string()];
        assert!(matches!(
            evaluate_rule(&rule, &corpus, &labels, "mal"),
            Err(Error::NoPositives)
        ));
    }

    #[test]
    fn rule_matching_nothing_has_zero_f1() {
        let rule = SignatureRule::new("inert", vec![b"NOPE".to_vec()], 4, None).unwrap();
        let corpus =
            CorpusSource::from_docs(vec![b"positive".to_vec(), b"negative".to_vec()]);
        let labels: Vec<String> = ["mal", "ben"].iter().map(|s| s.to_string()).collect();
        let metrics = evaluate_rule(&rule, &corpus, &labels, "mal").unwrap();
        assert_eq!(metrics.f1, 0.0);
        assert_eq!(metrics.fpr, 0.0);
    }

    #[test]
    fn best_n_selection() {
        let rule = |n: usize| SignatureRule::new("r", vec![vec![0u8; n]], n, None).unwrap();
        let m = |f1: f64| RuleMetrics {
            true_positives: 1,
            false_positives: 0,
            true_negatives: 1,
            false_negatives: 0,
            precision: 1.0,
            recall: 1.0,
            f1,
            fpr: 0.0,
        };
        let single = vec![(8usize, rule(8), m(0.4))];
        assert_eq!(select_best_n(&single).unwrap(), 0);
        let distinct = vec![
            (8, rule(8), m(0.4)),
            (64, rule(64), m(0.9)),
            (1024, rule(1024), m(0.7)),
        ];
        assert_eq!(select_best_n(&distinct).unwrap(), 1);
        let zero = vec![
            (64, rule(64), m(0.0)),
            (8, rule(8), m(0.0)),
            (1024, rule(1024), m(0.0)),
        ];
        assert_eq!(select_best_n(&zero).unwrap(), 1); // smallest n wins ties
        assert!(select_best_n(&[]).is_err());
    }

    #[test]
    fn log_odds_proxy_orders_markers_above_noise() {
        let matrix = labeled_matrix();
        let weights = presence_log_odds(&matrix, "mal").unwrap();
        // AB (positive-only) must outrank CD (everywhere) and EF
        // (negative-only).
        assert!(weights[0] > weights[1]);
        assert!(weights[1] > weights[2]);
        assert_eq!(weights[0], weights[3]); // identical presence, equal weight
    }

    #[test]
    fn generate_rule_end_to_end() {
        let matrix = labeled_matrix();
        let rule = generate_rule(&matrix, "mal", None, &RuleGenOptions::new("fam_mal")).unwrap();
        // AB and GH co-occur; AB survives dedup. CD and EF are filtered by
        // FPR. The final rule is exactly {AB}.
        assert_eq!(rule.patterns(), &[b"AB".to_vec()]);
        let text = rule.to_yara();
        assert!(text.contains("rule fam_mal"));
        assert!(text.contains("$s0 = { 41 42 }"));
    }
}
