//! Accuracy, cross-lingual consistency, routing distribution, and
//! base-vs-tuned transition analytics.
//!
//! Consistency is the fraction of parallel question groups whose extracted
//! choices are identical across every evaluated language, regardless of
//! correctness; that all-match reading is the one consistent with the
//! published per-benchmark totals. All metrics are permutation-invariant
//! single-pass computations.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::{LanguageTag, Pathway};

use super::EvalRecord;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("metric over an empty set is undefined")]
    EmptySet,
    #[error("consistency needs at least two languages")]
    SingleLanguage,
    #[error("group {group_id} is missing language {language}")]
    IncompleteGroup { group_id: String, language: LanguageTag },
    #[error("base and tuned records are misaligned: {0}")]
    Misaligned(String),
}

/// Per-language extracted choices of one parallel question group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyGroup {
    pub group_id: String,
    pub choices: BTreeMap<LanguageTag, String>,
}

/// Fraction of records whose extracted choice matched the gold label.
/// Records without a correctness determination count as incorrect.
pub fn accuracy(records: &[EvalRecord]) -> Result<f64, MetricError> {
    if records.is_empty() {
        return Err(MetricError::EmptySet);
    }
    let correct = records.iter().filter(|r| r.correct == Some(true)).count();
    Ok(correct as f64 / records.len() as f64)
}

/// Fraction of groups whose choices agree across every configured
/// language. Each group must be complete over that language set.
pub fn consistency(
    groups: &[ConsistencyGroup],
    languages: &[LanguageTag],
) -> Result<f64, MetricError> {
    let mut langs: Vec<&LanguageTag> = languages.iter().collect();
    langs.sort();
    langs.dedup();
    if langs.len() < 2 {
        return Err(MetricError::SingleLanguage);
    }
    if groups.is_empty() {
        return Err(MetricError::EmptySet);
    }

    let mut matched = 0usize;
    for group in groups {
        let mut first: Option<&str> = None;
        let mut all_match = true;
        for lang in &langs {
            let choice = group.choices.get(lang).ok_or_else(|| MetricError::IncompleteGroup {
                group_id: group.group_id.clone(),
                language: (*lang).clone(),
            })?;
            match first {
                None => first = Some(choice),
                Some(f) => all_match &= f == choice,
            }
        }
        if all_match {
            matched += 1;
        }
    }
    Ok(matched as f64 / groups.len() as f64)
}

/// Count how often each attributed pathway was used. Records without an
/// attribution are skipped; callers can report `records.len()` minus the
/// sum as unattributed.
pub fn routing_distribution(records: &[EvalRecord]) -> BTreeMap<Pathway, usize> {
    let mut counts = BTreeMap::new();
    for record in records {
        if let Some(p) = &record.pathway_used {
            *counts.entry(p.clone()).or_default() += 1;
        }
    }
    counts
}

/// The four outcome-flip counts between a base and a tuned run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionCounts {
    /// incorrect -> correct
    pub beneficial: usize,
    /// correct -> incorrect
    pub detrimental: usize,
    pub unchanged_correct: usize,
    pub unchanged_incorrect: usize,
}

impl TransitionCounts {
    pub fn total(&self) -> usize {
        self.beneficial + self.detrimental + self.unchanged_correct + self.unchanged_incorrect
    }
}

/// Transition counts bucketed by the pathway the tuned model used (`None`
/// key: unattributed), plus totals over all records.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransitionAnalysis {
    pub per_pathway: BTreeMap<Option<Pathway>, TransitionCounts>,
    pub totals: TransitionCounts,
}

/// Classify every prompt's outcome flip between aligned base and tuned
/// records. Alignment is by prompt_id and must be a bijection. A missing
/// correctness determination counts as incorrect, so the four counts
/// always partition the record set.
pub fn transition_analysis(
    base: &[EvalRecord],
    tuned: &[EvalRecord],
) -> Result<TransitionAnalysis, MetricError> {
    if base.len() != tuned.len() {
        return Err(MetricError::Misaligned(format!(
            "{} base records vs {} tuned records",
            base.len(),
            tuned.len()
        )));
    }
    let mut base_by_id: BTreeMap<&str, &EvalRecord> = BTreeMap::new();
    for record in base {
        if base_by_id.insert(&record.prompt_id, record).is_some() {
            return Err(MetricError::Misaligned(format!(
                "duplicate base prompt_id {:?}",
                record.prompt_id
            )));
        }
    }

    let mut analysis = TransitionAnalysis::default();
    for tuned_record in tuned {
        let base_record = base_by_id.remove(tuned_record.prompt_id.as_str()).ok_or_else(|| {
            MetricError::Misaligned(format!("no base record for {:?}", tuned_record.prompt_id))
        })?;
        let was = base_record.correct == Some(true);
        let now = tuned_record.correct == Some(true);
        let bucket = analysis
            .per_pathway
            .entry(tuned_record.pathway_used.clone())
            .or_default();
        for counts in [bucket, &mut analysis.totals] {
            match (was, now) {
                (false, true) => counts.beneficial += 1,
                (true, false) => counts.detrimental += 1,
                (true, true) => counts.unchanged_correct += 1,
                (false, false) => counts.unchanged_incorrect += 1,
            }
        }
    }
    Ok(analysis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lang(code: &str) -> LanguageTag {
        LanguageTag::new(code).unwrap()
    }

    fn record(id: &str, language: &str, correct: Option<bool>, pathway: Option<Pathway>) -> EvalRecord {
        EvalRecord {
            prompt_id: id.into(),
            group_id: None,
            language: lang(language),
            raw_output: String::new(),
            stripped_answer: String::new(),
            extracted_choice: correct.map(|_| "A".to_string()),
            correct,
            judge_score: None,
            detected_reasoning_language: None,
            pathway_used: pathway,
        }
    }

    fn group(id: &str, choices: &[(&str, &str)]) -> ConsistencyGroup {
        ConsistencyGroup {
            group_id: id.into(),
            choices: choices.iter().map(|(l, c)| (lang(l), (*c).to_string())).collect(),
        }
    }

    #[test]
    fn accuracy_matches_direct_arithmetic() {
        let mut records: Vec<EvalRecord> = (0..100)
            .map(|i| record(&format!("c{i}"), "en", Some(true), None))
            .collect();
        records.extend((0..50).map(|i| record(&format!("w{i}"), "en", Some(false), None)));
        let value = accuracy(&records).unwrap();
        // Oracle: plain recount.
        let recount = records.iter().filter(|r| r.correct == Some(true)).count() as f64
            / records.len() as f64;
        assert!((value - recount).abs() < 1e-15);
        assert!((value - 100.0 / 150.0).abs() < 1e-12);
        assert_eq!(format!("{:.4}", value), "0.6667");
    }

    #[test]
    fn accuracy_edges() {
        let all = vec![record("a", "en", Some(true), None)];
        assert_eq!(accuracy(&all).unwrap(), 1.0);
        assert_eq!(accuracy(&[]), Err(MetricError::EmptySet));
        // Unknown correctness counts as incorrect.
        let mixed = vec![record("a", "en", Some(true), None), record("b", "en", None, None)];
        assert_eq!(accuracy(&mixed).unwrap(), 0.5);
    }

    #[test]
    fn consistency_is_the_all_match_fraction() {
        let languages = [lang("en"), lang("zh"), lang("id")];
        let groups = vec![
            group("g1", &[("en", "A"), ("zh", "A"), ("id", "A")]),
            group("g2", &[("en", "A"), ("zh", "B"), ("id", "A")]),
        ];
        assert_eq!(consistency(&groups, &languages).unwrap(), 0.5);
    }

    #[test]
    fn consistency_rejects_incomplete_groups_and_single_language() {
        let languages = [lang("en"), lang("zh")];
        let groups = vec![group("g1", &[("en", "A")])];
        assert_eq!(
            consistency(&groups, &languages),
            Err(MetricError::IncompleteGroup { group_id: "g1".into(), language: lang("zh") })
        );
        assert_eq!(consistency(&groups, &[lang("en")]), Err(MetricError::SingleLanguage));
        assert_eq!(consistency(&[], &languages), Err(MetricError::EmptySet));
    }

    #[test]
    fn consistency_ignores_correctness() {
        // Identical wrong answers still count as consistent.
        let languages = [lang("en"), lang("zh")];
        let groups = vec![group("g1", &[("en", "D"), ("zh", "D")])];
        assert_eq!(consistency(&groups, &languages).unwrap(), 1.0);
    }

    #[test]
    fn routing_distribution_counts_attributed_pathways() {
        let records = vec![
            record("a", "en", None, Some(Pathway::Direct)),
            record("b", "en", None, Some(Pathway::think_in("en").unwrap())),
            record("c", "en", None, Some(Pathway::think_in("en").unwrap())),
            record("d", "en", None, None),
        ];
        let counts = routing_distribution(&records);
        assert_eq!(counts.get(&Pathway::Direct), Some(&1));
        assert_eq!(counts.get(&Pathway::think_in("en").unwrap()), Some(&2));
        assert_eq!(counts.values().sum::<usize>(), 3);
    }

    #[test]
    fn transitions_attribute_flips_to_the_tuned_pathway() {
        let base = vec![
            record("p1", "en", Some(false), None),
            record("p2", "en", Some(true), None),
            record("p3", "en", Some(true), None),
            record("p4", "en", Some(false), None),
        ];
        let think_en = Pathway::think_in("en").unwrap();
        let tuned = vec![
            record("p1", "en", Some(true), Some(think_en.clone())),
            record("p2", "en", Some(true), Some(Pathway::Direct)),
            record("p3", "en", Some(false), Some(think_en.clone())),
            record("p4", "en", Some(false), Some(Pathway::Direct)),
        ];
        let analysis = transition_analysis(&base, &tuned).unwrap();
        let en_bucket = &analysis.per_pathway[&Some(think_en)];
        assert_eq!(en_bucket.beneficial, 1);
        assert_eq!(en_bucket.detrimental, 1);
        let direct_bucket = &analysis.per_pathway[&Some(Pathway::Direct)];
        assert_eq!(direct_bucket.unchanged_correct, 1);
        assert_eq!(direct_bucket.unchanged_incorrect, 1);
        assert_eq!(analysis.totals.total(), 4);
    }

    #[test]
    fn misaligned_records_are_rejected() {
        let base = vec![record("p1", "en", Some(true), None)];
        let tuned = vec![record("p2", "en", Some(true), None)];
        assert!(matches!(
            transition_analysis(&base, &tuned),
            Err(MetricError::Misaligned(_))
        ));
        assert!(matches!(
            transition_analysis(&base, &[]),
            Err(MetricError::Misaligned(_))
        ));
    }

    proptest! {
        #[test]
        fn accuracy_and_consistency_are_permutation_invariant(
            outcomes in proptest::collection::vec(proptest::option::of(any::<bool>()), 1..20),
            rotation in 0usize..20,
        ) {
            let records: Vec<EvalRecord> = outcomes
                .iter()
                .enumerate()
                .map(|(i, c)| record(&format!("p{i}"), "en", *c, None))
                .collect();
            let mut rotated = records.clone();
            rotated.rotate_left(rotation % records.len());
            prop_assert_eq!(accuracy(&records).unwrap(), accuracy(&rotated).unwrap());
        }

        #[test]
        fn transition_counts_partition_the_records(
            flips in proptest::collection::vec((any::<bool>(), any::<bool>(), 0u8..4), 1..30),
        ) {
            let base: Vec<EvalRecord> = flips
                .iter()
                .enumerate()
                .map(|(i, (was, _, _))| record(&format!("p{i}"), "en", Some(*was), None))
                .collect();
            let tuned: Vec<EvalRecord> = flips
                .iter()
                .enumerate()
                .map(|(i, (_, now, path))| {
                    let pathway = match path {
                        0 => None,
                        1 => Some(Pathway::Direct),
                        2 => Some(Pathway::think_in("en").unwrap()),
                        _ => Some(Pathway::think_in("zh").unwrap()),
                    };
                    record(&format!("p{i}"), "en", Some(*now), pathway)
                })
                .collect();
            let analysis = transition_analysis(&base, &tuned).unwrap();
            prop_assert_eq!(analysis.totals.total(), flips.len());
            let bucket_sum: usize = analysis.per_pathway.values().map(|c| c.total()).sum();
            prop_assert_eq!(bucket_sum, flips.len());
        }
    }
}
