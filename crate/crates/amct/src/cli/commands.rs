//! Subcommand implementations. Each stage validates its config and inputs
//! up front (exit 1) before touching any backend, runs the pipeline
//! operations, and publishes outputs plus a run manifest atomically.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::backend::ChatClient;
use crate::config::{profile_names, validate_config, PipelineConfig};
use crate::dataset::{build_training_sequence, dataset_stats, emit_dataset, TrainingExample};
use crate::digest::{fnv1a64, hex16};
use crate::eval::{
    accuracy, consistency, extract_choice, infer_pathway, judge_score, routing_distribution,
    strip_reasoning, transition_analysis, ConsistencyGroup, EvalItem, EvalRecord, ModelOutput,
};
use crate::genpath::{generate_pool_batch, CandidateFailure, CandidateResponse};
use crate::introspect::{
    centroid_gap, load_hidden_dump, load_unembedding, logit_lens_grid, pca_project,
    LabeledEmbeddings, LabeledVector,
};
use crate::jsonl;
use crate::ranker::{
    filter_high_quality, rank_pool_batch, select_best, RankedCandidate, RankedRecord, RewardScore,
};
use crate::report::{percent1, write_csv, write_text, TextTable};
use crate::types::{LanguageTag, Pathway, Prompt, TaskKind};

use super::manifest::RunManifest;

/// Stage failures split by exit code: validation problems exit 1, runtime
/// failures exit 2.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn validation(message: impl Into<String>) -> CliError {
    CliError::Validation(message.into())
}

fn runtime(message: impl Into<String>) -> CliError {
    CliError::Runtime(message.into())
}

fn read_with_digest(path: &Path) -> CliResult<(String, String)> {
    let bytes = std::fs::read(path)
        .map_err(|e| validation(format!("cannot read {}: {e}", path.display())))?;
    let digest = hex16(fnv1a64(&bytes));
    let text = String::from_utf8(bytes)
        .map_err(|e| validation(format!("{} is not UTF-8: {e}", path.display())))?;
    Ok((text, digest))
}

fn digest_file(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path)
        .map_err(|e| validation(format!("cannot read {}: {e}", path.display())))?;
    Ok(hex16(fnv1a64(&bytes)))
}

fn load_config(path: &Path) -> CliResult<(PipelineConfig, String)> {
    let (_, digest) = read_with_digest(path)?;
    let cfg = PipelineConfig::load(path).map_err(|e| validation(e.to_string()))?;
    let violations = validate_config(&cfg);
    if !violations.is_empty() {
        let rendered: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(validation(format!("config is invalid: {}", rendered.join("; "))));
    }
    Ok((cfg, digest))
}

fn parse_input<T: serde::de::DeserializeOwned>(
    path: &Path,
    text: &str,
) -> CliResult<Vec<T>> {
    jsonl::parse_jsonl(text)
        .map_err(|(line, message)| validation(format!("{}:{line}: {message}", path.display())))
}

fn load_prompts(path: &Path) -> CliResult<(Vec<Prompt>, String)> {
    let (text, digest) = read_with_digest(path)?;
    let prompts: Vec<Prompt> = parse_input(path, &text)?;
    let mut seen = BTreeSet::new();
    for p in &prompts {
        p.validate()
            .map_err(|e| validation(format!("{}: {e}", path.display())))?;
        if !seen.insert(p.id.clone()) {
            return Err(validation(format!("{}: duplicate prompt id {:?}", path.display(), p.id)));
        }
    }
    Ok((prompts, digest))
}

fn build_client(cfg: &PipelineConfig) -> CliResult<ChatClient> {
    ChatClient::from_config(cfg).map_err(|e| validation(format!("backend setup: {e}")))
}

fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

fn write_manifest(manifest: &RunManifest, path: &Path) -> CliResult<()> {
    manifest
        .write(path)
        .map_err(|e| runtime(format!("writing manifest: {e}")))
}

pub async fn cmd_generate(config: &Path, prompts_path: &Path, out: &Path) -> CliResult<()> {
    let (cfg, config_digest) = load_config(config)?;
    let (prompts, prompts_digest) = load_prompts(prompts_path)?;
    let client = build_client(&cfg)?;

    let mut manifest = RunManifest::new(
        "generate",
        config_digest,
        BTreeMap::from([(prompts_path.display().to_string(), prompts_digest)]),
        cfg.seed,
    );

    let started = Instant::now();
    let pools = generate_pool_batch(&cfg, &client, &prompts).await;
    manifest.record_stage("generate", started.elapsed());

    let mut candidates: Vec<CandidateResponse> = Vec::new();
    let mut failures: Vec<CandidateFailure> = Vec::new();
    for (prompt, pool) in prompts.iter().zip(pools) {
        let pool = pool.map_err(|e| runtime(format!("generate: record {}: {e}", prompt.id)))?;
        candidates.extend(pool.candidates);
        failures.extend(pool.failures);
    }

    manifest.counts.generated = candidates.len();
    manifest.counts.emitted = jsonl::write_jsonl(out, &candidates)
        .map_err(|e| runtime(format!("generate: {e}")))?;
    if !failures.is_empty() {
        let failures_path = out.with_extension("failures.jsonl");
        jsonl::write_jsonl(&failures_path, &failures)
            .map_err(|e| runtime(format!("generate: {e}")))?;
        eprintln!(
            "generate: {} pathway failure(s) recorded in {}",
            failures.len(),
            failures_path.display()
        );
    }
    write_manifest(&manifest, &manifest_path(out))?;
    println!(
        "generate: {} prompts -> {} candidates ({} failures)",
        prompts.len(),
        manifest.counts.generated,
        failures.len()
    );
    Ok(())
}

fn check_candidate(prompt: &Prompt, candidate: &CandidateResponse) -> Result<(), String> {
    if (candidate.pathway == Pathway::Direct) != candidate.reasoning.is_none() {
        return Err("pathway/reasoning mismatch".into());
    }
    if candidate.final_language != prompt.language {
        return Err(format!(
            "final_language {} does not match prompt language {}",
            candidate.final_language, prompt.language
        ));
    }
    Ok(())
}

pub async fn cmd_rank(
    config: &Path,
    prompts_path: &Path,
    candidates_path: &Path,
    out: &Path,
    pool_out: Option<&Path>,
) -> CliResult<()> {
    let (cfg, config_digest) = load_config(config)?;
    let (prompts, prompts_digest) = load_prompts(prompts_path)?;
    let (candidates_text, candidates_digest) = read_with_digest(candidates_path)?;
    let candidates: Vec<CandidateResponse> = parse_input(candidates_path, &candidates_text)?;

    let prompt_by_id: BTreeMap<&str, &Prompt> =
        prompts.iter().map(|p| (p.id.as_str(), p)).collect();
    let mut by_prompt: BTreeMap<&str, Vec<CandidateResponse>> = BTreeMap::new();
    for candidate in &candidates {
        let prompt = prompt_by_id.get(candidate.prompt_id.as_str()).ok_or_else(|| {
            validation(format!(
                "rank: candidate references unknown prompt {:?}",
                candidate.prompt_id
            ))
        })?;
        check_candidate(prompt, candidate)
            .map_err(|e| validation(format!("rank: record {}: {e}", candidate.prompt_id)))?;
        by_prompt
            .entry(candidate.prompt_id.as_str())
            .or_default()
            .push(candidate.clone());
    }

    let client = build_client(&cfg)?;
    let mut manifest = RunManifest::new(
        "rank",
        config_digest,
        BTreeMap::from([
            (prompts_path.display().to_string(), prompts_digest),
            (candidates_path.display().to_string(), candidates_digest),
        ]),
        cfg.seed,
    );

    let pools: Vec<(Prompt, Vec<CandidateResponse>)> = prompts
        .iter()
        .filter_map(|p| by_prompt.remove(p.id.as_str()).map(|c| (p.clone(), c)))
        .collect();

    let started = Instant::now();
    let results = rank_pool_batch(&cfg, &client, &pools).await;
    manifest.record_stage("score", started.elapsed());

    let mut pool_records: Vec<RankedRecord> = Vec::new();
    let mut selected: Vec<RankedRecord> = Vec::new();
    let mut dropped = 0usize;
    for ((prompt, _), result) in pools.iter().zip(results) {
        let (ranked, failures) =
            result.map_err(|e| runtime(format!("rank: record {}: {e}", prompt.id)))?;
        for failure in &failures {
            eprintln!(
                "rank: scoring failed for {} via {}: {}",
                failure.prompt_id, failure.pathway, failure.error
            );
        }
        manifest.counts.scored += ranked.len();
        pool_records.extend(ranked.iter().map(RankedRecord::from));
        let kept = filter_high_quality(ranked, &cfg);
        manifest.counts.filtered += kept.len();
        if kept.is_empty() {
            dropped += 1;
            eprintln!("rank: no candidate for {} passed the quality filter", prompt.id);
            continue;
        }
        let best = select_best(&kept, &cfg)
            .map_err(|e| runtime(format!("rank: record {}: {e}", prompt.id)))?;
        selected.push(RankedRecord::from(&best));
    }

    if let Some(pool_path) = pool_out {
        jsonl::write_jsonl(pool_path, &pool_records)
            .map_err(|e| runtime(format!("rank: {e}")))?;
    }
    manifest.counts.emitted =
        jsonl::write_jsonl(out, &selected).map_err(|e| runtime(format!("rank: {e}")))?;
    write_manifest(&manifest, &manifest_path(out))?;
    println!(
        "rank: scored {}, kept {}, selected {} ({} prompt(s) dropped by the filter)",
        manifest.counts.scored,
        manifest.counts.filtered,
        selected.len(),
        dropped
    );
    Ok(())
}

pub async fn cmd_build_dataset(
    config: &Path,
    prompts_path: &Path,
    selected_path: &Path,
    out: &Path,
) -> CliResult<()> {
    let (cfg, config_digest) = load_config(config)?;
    let (prompts, prompts_digest) = load_prompts(prompts_path)?;
    let (selected_text, selected_digest) = read_with_digest(selected_path)?;
    let selected: Vec<RankedRecord> = parse_input(selected_path, &selected_text)?;

    let prompt_by_id: BTreeMap<&str, &Prompt> =
        prompts.iter().map(|p| (p.id.as_str(), p)).collect();

    let mut manifest = RunManifest::new(
        "build-dataset",
        config_digest,
        BTreeMap::from([
            (prompts_path.display().to_string(), prompts_digest),
            (selected_path.display().to_string(), selected_digest),
        ]),
        cfg.seed,
    );

    let started = Instant::now();
    let mut examples: Vec<TrainingExample> = Vec::new();
    for record in &selected {
        let prompt = prompt_by_id.get(record.prompt_id.as_str()).ok_or_else(|| {
            validation(format!(
                "build-dataset: selected record references unknown prompt {:?}",
                record.prompt_id
            ))
        })?;
        if cfg.filter_enabled && record.score < cfg.score_threshold {
            return Err(validation(format!(
                "build-dataset: record {}: score {} is below the quality threshold {}",
                record.prompt_id, record.score, cfg.score_threshold
            )));
        }
        let ranked = RankedCandidate {
            candidate: CandidateResponse {
                prompt_id: record.prompt_id.clone(),
                pathway: record.pathway.clone(),
                reasoning: record.reasoning.clone(),
                final_text: record.final_text.clone(),
                final_language: prompt.language.clone(),
            },
            score: RewardScore { value: record.score, raw_text: record.raw_score_text.clone() },
        };
        let example = build_training_sequence(prompt, &ranked, &cfg)
            .map_err(|e| runtime(format!("build-dataset: record {}: {e}", record.prompt_id)))?;
        examples.push(example);
    }
    manifest.record_stage("build", started.elapsed());

    manifest.counts.emitted =
        emit_dataset(&examples, out).map_err(|e| runtime(format!("build-dataset: {e}")))?;
    write_manifest(&manifest, &manifest_path(out))?;

    let stats = dataset_stats(&examples);
    let mut table = TextTable::new(vec!["pathway", "count"]);
    for (pathway, count) in &stats.per_pathway {
        table.push_row(vec![pathway.clone(), count.to_string()]);
    }
    println!(
        "build-dataset: {} example(s) written to {}\n{}",
        stats.total,
        out.display(),
        table.render()
    );
    Ok(())
}

struct EvalOutcome {
    record: EvalRecord,
    extraction_failed: bool,
}

async fn evaluate_item(
    cfg: &PipelineConfig,
    client: &ChatClient,
    item: &EvalItem,
    raw_output: &str,
    judge_enabled: bool,
) -> EvalOutcome {
    let prompt = item.to_prompt();
    let markers = cfg.marker_registry.markers_for(&item.language);
    let mut langs: Vec<LanguageTag> = cfg.theta.clone();
    langs.push(item.language.clone());
    let answer_markers = cfg.marker_registry.answer_markers_for(langs);

    let stripped = strip_reasoning(raw_output, &answer_markers);
    let (pathway_used, detected) = infer_pathway(raw_output, &markers);

    let mut extraction_failed = false;
    let (extracted_choice, correct) = match (&item.choices, &item.gold) {
        (Some(choices), gold) if !choices.is_empty() => {
            match extract_choice(cfg, client, &item.id, &prompt.body_text(), &stripped, choices)
                .await
            {
                Ok(label) => {
                    let correct = gold.as_ref().map(|g| &label == g);
                    (Some(label), correct)
                }
                Err(e) => {
                    eprintln!("eval: extraction failed for {}: {e}", item.id);
                    extraction_failed = true;
                    (None, None)
                }
            }
        }
        _ => (None, None),
    };

    let judge = if judge_enabled && prompt.task_kind == TaskKind::OpenEnded {
        match judge_score(cfg, client, &prompt, &stripped).await {
            Ok(v) => Some(v),
            Err(e) => {
                eprintln!("eval: judge failed for {}: {e}", item.id);
                None
            }
        }
    } else {
        None
    };

    EvalOutcome {
        record: EvalRecord {
            prompt_id: item.id.clone(),
            group_id: item.group_id.clone(),
            language: item.language.clone(),
            raw_output: raw_output.to_string(),
            stripped_answer: stripped,
            extracted_choice,
            correct,
            judge_score: judge,
            detected_reasoning_language: detected,
            pathway_used,
        },
        extraction_failed,
    }
}

pub async fn cmd_eval(
    config: &Path,
    eval_data: &Path,
    outputs_path: &Path,
    report_out: &Path,
    model_label: Option<&str>,
) -> CliResult<()> {
    let (cfg, config_digest) = load_config(config)?;
    let (items_text, items_digest) = read_with_digest(eval_data)?;
    let items: Vec<EvalItem> = parse_input(eval_data, &items_text)?;
    let mut seen = BTreeSet::new();
    for item in &items {
        item.to_prompt()
            .validate()
            .map_err(|e| validation(format!("{}: {e}", eval_data.display())))?;
        if !seen.insert(item.id.clone()) {
            return Err(validation(format!(
                "{}: duplicate item id {:?}",
                eval_data.display(),
                item.id
            )));
        }
    }

    let (outputs_text, outputs_digest) = read_with_digest(outputs_path)?;
    let outputs: Vec<ModelOutput> = parse_input(outputs_path, &outputs_text)?;
    let mut output_by_id: BTreeMap<&str, &str> = BTreeMap::new();
    for output in &outputs {
        if output_by_id.insert(&output.id, &output.output).is_some() {
            return Err(validation(format!(
                "{}: duplicate output id {:?}",
                outputs_path.display(),
                output.id
            )));
        }
    }
    for item in &items {
        if !output_by_id.contains_key(item.id.as_str()) {
            return Err(validation(format!(
                "{}: no model output for item {:?}",
                outputs_path.display(),
                item.id
            )));
        }
    }

    let client = build_client(&cfg)?;
    let judge_enabled = cfg.backends.contains_key(profile_names::JUDGE);
    let model = model_label
        .map(str::to_string)
        .or_else(|| {
            outputs_path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
        })
        .unwrap_or_else(|| "model".into());

    let mut manifest = RunManifest::new(
        "eval",
        config_digest,
        BTreeMap::from([
            (eval_data.display().to_string(), items_digest),
            (outputs_path.display().to_string(), outputs_digest),
        ]),
        cfg.seed,
    );

    let started = Instant::now();
    let outcomes: Vec<EvalOutcome> = {
        use futures::stream::StreamExt;
        futures::stream::iter(items.iter())
            .map(|item| evaluate_item(&cfg, &client, item, output_by_id[item.id.as_str()], judge_enabled))
            .buffered(cfg.max_parallel_requests.max(1))
            .collect()
            .await
    };
    manifest.record_stage("eval", started.elapsed());

    let records: Vec<EvalRecord> = outcomes.iter().map(|o| o.record.clone()).collect();
    for record in &records {
        record
            .check()
            .map_err(|e| runtime(format!("eval: {e}")))?;
    }

    // Per-language rows over gradable (multiple-choice) items.
    let gradable_ids: BTreeSet<&str> = items
        .iter()
        .filter(|i| i.choices.as_deref().is_some_and(|c| !c.is_empty()) && i.gold.is_some())
        .map(|i| i.id.as_str())
        .collect();
    let languages: BTreeSet<LanguageTag> = items.iter().map(|i| i.language.clone()).collect();

    let mut csv_rows: Vec<Vec<String>> = Vec::new();
    let mut table = TextTable::new(vec![
        "language",
        "items",
        "accuracy_pct",
        "judge_mean",
        "extraction_failures",
    ]);
    for language in &languages {
        let lang_records: Vec<EvalRecord> = records
            .iter()
            .filter(|r| &r.language == language)
            .cloned()
            .collect();
        let gradable: Vec<EvalRecord> = lang_records
            .iter()
            .filter(|r| gradable_ids.contains(r.prompt_id.as_str()))
            .cloned()
            .collect();
        let acc = if gradable.is_empty() {
            None
        } else {
            Some(accuracy(&gradable).map_err(|e| runtime(format!("eval: {e}")))?)
        };
        let judge_values: Vec<f64> = lang_records.iter().filter_map(|r| r.judge_score).collect();
        let judge_mean = if judge_values.is_empty() {
            None
        } else {
            Some(judge_values.iter().sum::<f64>() / judge_values.len() as f64)
        };
        let failures = outcomes
            .iter()
            .filter(|o| &o.record.language == language && o.extraction_failed)
            .count();

        let acc_text = acc.map(percent1).unwrap_or_else(|| "-".into());
        let judge_text = judge_mean
            .map(|v| format!("{v:.2}"))
            .unwrap_or_else(|| "-".into());
        csv_rows.push(vec![
            model.clone(),
            language.to_string(),
            "accuracy_pct".into(),
            acc_text.clone(),
        ]);
        csv_rows.push(vec![
            model.clone(),
            language.to_string(),
            "judge_mean".into(),
            judge_text.clone(),
        ]);
        csv_rows.push(vec![
            model.clone(),
            language.to_string(),
            "items".into(),
            lang_records.len().to_string(),
        ]);
        table.push_row(vec![
            language.to_string(),
            lang_records.len().to_string(),
            acc_text,
            judge_text,
            failures.to_string(),
        ]);
    }

    // Cross-lingual consistency over grouped multiple-choice records; a
    // failed extraction gets a per-record sentinel so its group can never
    // count as consistent.
    let grouped: Vec<&EvalRecord> = records
        .iter()
        .filter(|r| r.group_id.is_some() && gradable_ids.contains(r.prompt_id.as_str()))
        .collect();
    let group_languages: BTreeSet<LanguageTag> =
        grouped.iter().map(|r| r.language.clone()).collect();
    let consistency_value = if grouped.is_empty() || group_languages.len() < 2 {
        None
    } else {
        let mut groups: BTreeMap<String, ConsistencyGroup> = BTreeMap::new();
        for record in &grouped {
            let group_id = record.group_id.clone().expect("filtered on group_id");
            let entry = groups.entry(group_id.clone()).or_insert_with(|| ConsistencyGroup {
                group_id,
                choices: BTreeMap::new(),
            });
            let choice = record
                .extracted_choice
                .clone()
                .unwrap_or_else(|| format!("<unextracted:{}>", record.prompt_id));
            if entry.choices.insert(record.language.clone(), choice).is_some() {
                return Err(validation(format!(
                    "eval: group {:?} has two records for language {}",
                    entry.group_id, record.language
                )));
            }
        }
        let groups: Vec<ConsistencyGroup> = groups.into_values().collect();
        let langs: Vec<LanguageTag> = group_languages.iter().cloned().collect();
        Some((
            consistency(&groups, &langs).map_err(|e| runtime(format!("eval: {e}")))?,
            groups.len(),
        ))
    };

    let mut text = format!("model: {model}\n\n{}", table.render());
    if let Some((value, count)) = consistency_value {
        csv_rows.push(vec![
            model.clone(),
            "all".into(),
            "consistency_pct".into(),
            percent1(value),
        ]);
        text.push_str(&format!(
            "\ncross-lingual consistency: {}% over {} group(s)\n",
            percent1(value),
            count
        ));
    }

    std::fs::create_dir_all(report_out)
        .map_err(|e| runtime(format!("eval: creating {}: {e}", report_out.display())))?;
    manifest.counts.emitted = jsonl::write_jsonl(&report_out.join("records.jsonl"), &records)
        .map_err(|e| runtime(format!("eval: {e}")))?;
    write_csv(
        &report_out.join("report.csv"),
        &["model", "language", "metric", "value"],
        &csv_rows,
    )
    .map_err(|e| runtime(format!("eval: {e}")))?;
    write_text(&report_out.join("report.txt"), &text)
        .map_err(|e| runtime(format!("eval: {e}")))?;
    write_manifest(&manifest, &report_out.join("manifest.json"))?;
    println!("{text}");
    Ok(())
}

fn load_records(path: &Path) -> CliResult<(Vec<EvalRecord>, String)> {
    let (text, digest) = read_with_digest(path)?;
    let records: Vec<EvalRecord> = parse_input(path, &text)?;
    for record in &records {
        record
            .check()
            .map_err(|e| validation(format!("{}: {e}", path.display())))?;
    }
    Ok((records, digest))
}

fn pathway_key(p: &Option<Pathway>) -> String {
    p.as_ref().map(ToString::to_string).unwrap_or_else(|| "unattributed".into())
}

pub async fn cmd_analyze(
    config: &Path,
    base_path: &Path,
    tuned_path: &Path,
    report_out: &Path,
) -> CliResult<()> {
    let (cfg, config_digest) = load_config(config)?;
    let (base, base_digest) = load_records(base_path)?;
    let (tuned, tuned_digest) = load_records(tuned_path)?;

    let mut manifest = RunManifest::new(
        "analyze",
        config_digest,
        BTreeMap::from([
            (base_path.display().to_string(), base_digest),
            (tuned_path.display().to_string(), tuned_digest),
        ]),
        cfg.seed,
    );

    let started = Instant::now();
    let analysis =
        transition_analysis(&base, &tuned).map_err(|e| validation(format!("analyze: {e}")))?;
    let base_routing = routing_distribution(&base);
    let tuned_routing = routing_distribution(&tuned);
    manifest.record_stage("analyze", started.elapsed());

    let mut pathways: BTreeSet<Pathway> = BTreeSet::new();
    pathways.extend(base_routing.keys().cloned());
    pathways.extend(tuned_routing.keys().cloned());

    let mut routing_rows: Vec<Vec<String>> = Vec::new();
    let mut routing_table = TextTable::new(vec!["pathway", "base", "tuned"]);
    for pathway in &pathways {
        let row = vec![
            pathway.to_string(),
            base_routing.get(pathway).copied().unwrap_or(0).to_string(),
            tuned_routing.get(pathway).copied().unwrap_or(0).to_string(),
        ];
        routing_rows.push(row.clone());
        routing_table.push_row(row);
    }
    let base_unattributed = base.len() - base_routing.values().sum::<usize>();
    let tuned_unattributed = tuned.len() - tuned_routing.values().sum::<usize>();
    if base_unattributed + tuned_unattributed > 0 {
        let row = vec![
            "unattributed".to_string(),
            base_unattributed.to_string(),
            tuned_unattributed.to_string(),
        ];
        routing_rows.push(row.clone());
        routing_table.push_row(row);
    }

    let transition_headers =
        ["pathway", "beneficial", "detrimental", "unchanged_correct", "unchanged_incorrect"];
    let mut transition_rows: Vec<Vec<String>> = Vec::new();
    let mut transition_table = TextTable::new(transition_headers.to_vec());
    for (pathway, counts) in &analysis.per_pathway {
        let row = vec![
            pathway_key(pathway),
            counts.beneficial.to_string(),
            counts.detrimental.to_string(),
            counts.unchanged_correct.to_string(),
            counts.unchanged_incorrect.to_string(),
        ];
        transition_rows.push(row.clone());
        transition_table.push_row(row);
    }
    let totals = &analysis.totals;
    let totals_row = vec![
        "total".to_string(),
        totals.beneficial.to_string(),
        totals.detrimental.to_string(),
        totals.unchanged_correct.to_string(),
        totals.unchanged_incorrect.to_string(),
    ];
    transition_rows.push(totals_row.clone());
    transition_table.push_row(totals_row);

    std::fs::create_dir_all(report_out)
        .map_err(|e| runtime(format!("analyze: creating {}: {e}", report_out.display())))?;
    write_csv(&report_out.join("routing.csv"), &["pathway", "base", "tuned"], &routing_rows)
        .map_err(|e| runtime(format!("analyze: {e}")))?;
    write_csv(&report_out.join("transitions.csv"), &transition_headers, &transition_rows)
        .map_err(|e| runtime(format!("analyze: {e}")))?;
    let text = format!(
        "reasoning pathway selections\n{}\noutcome transitions (tuned pathway attribution)\n{}",
        routing_table.render(),
        transition_table.render()
    );
    write_text(&report_out.join("report.txt"), &text)
        .map_err(|e| runtime(format!("analyze: {e}")))?;
    manifest.counts.emitted = transition_rows.len();
    write_manifest(&manifest, &report_out.join("manifest.json"))?;
    println!("{text}");
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub async fn cmd_introspect(
    config: &Path,
    dump: Option<&Path>,
    unembed: Option<&Path>,
    embeddings: Option<&Path>,
    reference: Option<&str>,
    report_out: &Path,
) -> CliResult<()> {
    let (cfg, config_digest) = load_config(config)?;
    std::fs::create_dir_all(report_out)
        .map_err(|e| runtime(format!("introspect: creating {}: {e}", report_out.display())))?;

    match (dump, unembed, embeddings) {
        (Some(dump_path), Some(unembed_path), None) => {
            let dump_digest = digest_file(dump_path)?;
            let unembed_digest = digest_file(unembed_path)?;
            let hidden = load_hidden_dump(dump_path)
                .map_err(|e| validation(format!("introspect: {}: {e}", dump_path.display())))?;
            let unembedding = load_unembedding(unembed_path)
                .map_err(|e| validation(format!("introspect: {}: {e}", unembed_path.display())))?;

            let mut manifest = RunManifest::new(
                "introspect",
                config_digest,
                BTreeMap::from([
                    (dump_path.display().to_string(), dump_digest),
                    (unembed_path.display().to_string(), unembed_digest),
                ]),
                cfg.seed,
            );
            let started = Instant::now();
            let grid = logit_lens_grid(&hidden, &unembedding)
                .map_err(|e| validation(format!("introspect: {e}")))?;
            manifest.record_stage("logit-lens", started.elapsed());

            let mut rows: Vec<Vec<String>> = Vec::new();
            for (layer, row) in grid.iter().enumerate() {
                for (position, cell) in row.iter().enumerate() {
                    rows.push(vec![
                        layer.to_string(),
                        position.to_string(),
                        hidden.position_labels[position].clone(),
                        cell.token_index.to_string(),
                        cell.token.clone(),
                    ]);
                }
            }
            write_csv(
                &report_out.join("lens_grid.csv"),
                &["layer", "position", "position_label", "token_index", "token"],
                &rows,
            )
            .map_err(|e| runtime(format!("introspect: {e}")))?;

            let mut headers = vec!["layer".to_string()];
            headers.extend(hidden.position_labels.iter().cloned());
            let mut table = TextTable::new(headers);
            for (layer, row) in grid.iter().enumerate() {
                let mut cells = vec![format!("L{layer}")];
                cells.extend(row.iter().map(|c| c.token.clone()));
                table.push_row(cells);
            }
            write_text(&report_out.join("lens_grid.txt"), &table.render())
                .map_err(|e| runtime(format!("introspect: {e}")))?;
            manifest.counts.emitted = rows.len();
            write_manifest(&manifest, &report_out.join("manifest.json"))?;
            println!("{}", table.render());
            Ok(())
        }
        (None, None, Some(embeddings_path)) => {
            let reference = reference
                .ok_or_else(|| validation("introspect: --reference is required with --embeddings"))?;
            let reference: LanguageTag = reference
                .parse()
                .map_err(|e| validation(format!("introspect: {e}")))?;
            let (text, embeddings_digest) = read_with_digest(embeddings_path)?;
            let vectors: Vec<LabeledVector> = parse_input(embeddings_path, &text)?;
            let embeddings = LabeledEmbeddings::new(vectors)
                .map_err(|e| validation(format!("introspect: {e}")))?;

            let mut manifest = RunManifest::new(
                "introspect",
                config_digest,
                BTreeMap::from([(embeddings_path.display().to_string(), embeddings_digest)]),
                cfg.seed,
            );
            let started = Instant::now();
            let gap = centroid_gap(&embeddings, &reference)
                .map_err(|e| validation(format!("introspect: {e}")))?;
            let projection = pca_project(&embeddings)
                .map_err(|e| validation(format!("introspect: {e}")))?;
            manifest.record_stage("geometry", started.elapsed());

            let mut centroid_rows: Vec<Vec<String>> = gap
                .distances
                .iter()
                .map(|(label, d)| vec![label.to_string(), format!("{d:.6}")])
                .collect();
            centroid_rows.push(vec!["mean".into(), format!("{:.6}", gap.mean)]);
            write_csv(&report_out.join("centroid.csv"), &["label", "distance"], &centroid_rows)
                .map_err(|e| runtime(format!("introspect: {e}")))?;

            let pca_rows: Vec<Vec<String>> = embeddings
                .entries()
                .iter()
                .zip(&projection.coords)
                .map(|(entry, c)| {
                    vec![entry.label.to_string(), format!("{:.6}", c[0]), format!("{:.6}", c[1])]
                })
                .collect();
            write_csv(&report_out.join("pca.csv"), &["label", "x", "y"], &pca_rows)
                .map_err(|e| runtime(format!("introspect: {e}")))?;

            let mut table = TextTable::new(vec!["label", "distance_to_reference"]);
            for (label, d) in &gap.distances {
                table.push_row(vec![label.to_string(), format!("{d:.4}")]);
            }
            let mut text = format!(
                "reference: {}\n{}\nmean centroid gap: {:.4}\n",
                gap.reference,
                table.render(),
                gap.mean
            );
            if projection.degenerate {
                text.push_str("projection: rank < 2, second axis is zeros\n");
            }
            write_text(&report_out.join("summary.txt"), &text)
                .map_err(|e| runtime(format!("introspect: {e}")))?;
            manifest.counts.emitted = pca_rows.len();
            write_manifest(&manifest, &report_out.join("manifest.json"))?;
            println!("{text}");
            Ok(())
        }
        _ => Err(validation(
            "introspect: pass either --dump with --unembed, or --embeddings with --reference",
        )),
    }
}
