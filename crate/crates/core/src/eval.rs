//! Oracle evaluation under injected noise and reasoning-grounding coherence.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::clue::Payload;
use crate::config::ForgeConfig;
use crate::lexicon::word_to_number;
use crate::oracle::{answer, AnswerContext, OracleError, Synonyms};
use crate::pipeline::{clue_for, ground, skeleton, ForgeError, QaRecord, RunOptions, SceneIndex};
use crate::question::{classify_task, TaskType};

/// Canonical answer form for exact-match scoring: lowercase, punctuation and
/// articles dropped, number words folded to digits.
pub fn normalize_answer(text: &str) -> String {
    let cleaned: String = text
        .to_lowercase()
        .chars()
        .map(|c| if c.is_alphanumeric() || c == '.' { c } else { ' ' })
        .collect();
    cleaned
        .split_whitespace()
        .map(|w| w.trim_matches('.'))
        .filter(|w| !w.is_empty() && !matches!(*w, "a" | "an" | "the"))
        .map(|w| word_to_number(w).map_or_else(|| w.to_string(), |n| n.to_string()))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn score_answer(predicted: &str, gold: &str) -> bool {
    normalize_answer(predicted) == normalize_answer(gold)
}

/// Outcome of evaluating one record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordOutcome {
    pub index: usize,
    pub task: TaskType,
    pub predicted: Option<String>,
    pub qa_correct: bool,
    /// Present set after thresholding equals the annotated target set.
    pub grounding_correct: bool,
    pub unsupported: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TaskScore {
    pub total: usize,
    pub correct: usize,
    /// Records the oracle declines to answer; excluded from accuracy.
    pub unsupported: usize,
    /// Records that could not be grounded; scored as wrong.
    pub failed: usize,
}

impl TaskScore {
    pub fn scored(&self) -> usize {
        self.total - self.unsupported
    }

    /// Percent correct over scored records, `None` when nothing was scored.
    pub fn accuracy(&self) -> Option<f64> {
        (self.scored() > 0).then(|| 100.0 * self.correct as f64 / self.scored() as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub mode: String,
    pub per_task: BTreeMap<TaskType, TaskScore>,
    pub overall: TaskScore,
    pub coherence: Option<CoherenceReport>,
    #[serde(skip)]
    pub outcomes: Vec<RecordOutcome>,
}

impl EvalReport {
    pub fn accuracy(&self, task: TaskType) -> Option<f64> {
        self.per_task.get(&task).and_then(TaskScore::accuracy)
    }
}

fn evaluate_one(
    scenes: &SceneIndex,
    qa: &QaRecord,
    index: usize,
    cfg: &ForgeConfig,
    synonyms: &Synonyms,
    opts: &RunOptions,
) -> RecordOutcome {
    let task = qa.task_type.unwrap_or_else(|| classify_task(&qa.question));
    let mut out = RecordOutcome {
        index,
        task,
        predicted: None,
        qa_correct: false,
        grounding_correct: false,
        unsupported: false,
        error: None,
    };
    let run = || -> Result<(bool, Result<String, OracleError>), ForgeError> {
        let scene = scenes
            .get(&qa.scene_id)
            .ok_or_else(|| ForgeError::UnknownScene(qa.scene_id.clone()))?;
        let g = ground(scene, qa, index as u64, cfg, synonyms, opts)?;
        let grounding_ok = g.grounding.present() == g.targets;
        let trace = skeleton(&g.resolved, &qa.gold_answer);
        let clue = clue_for(&g, &trace, &qa.situation, cfg)?;
        // the oracle sees the rendered text, rounding included
        let payload = Payload::parse(&clue)?;
        let ctx = AnswerContext {
            category: g.resolved.category.as_deref(),
            anchor: g.resolved.anchor.as_deref(),
            synonyms: Some(synonyms),
            thresholds: cfg.distance,
            spatial: cfg.spatial,
            navigation: cfg.navigation_style,
        };
        Ok((grounding_ok, answer(g.resolved.task, &payload, &ctx).map(|a| a.as_str().to_string())))
    };
    match run() {
        Ok((grounding_ok, predicted)) => {
            out.grounding_correct = grounding_ok;
            match predicted {
                Ok(p) => {
                    out.qa_correct = score_answer(&p, &qa.gold_answer);
                    out.predicted = Some(p);
                }
                Err(OracleError::Unsupported(_)) => out.unsupported = true,
                // noise can hide the queried object; that is a wrong answer, not a failure
                Err(OracleError::NoCandidate(_)) => {}
                Err(e) => out.error = Some(e.to_string()),
            }
        }
        Err(e) => out.error = Some(e.to_string()),
    }
    out
}

/// Answers every record with the rule oracle and scores it against the gold answer.
pub fn run_eval(
    scenes: &SceneIndex,
    qa: &[QaRecord],
    cfg: &ForgeConfig,
    synonyms: &Synonyms,
    opts: &RunOptions,
) -> EvalReport {
    let outcomes: Vec<RecordOutcome> = qa
        .par_iter()
        .enumerate()
        .map(|(i, q)| evaluate_one(scenes, q, i, cfg, synonyms, opts))
        .collect();
    let mut per_task: BTreeMap<TaskType, TaskScore> = BTreeMap::new();
    let mut overall = TaskScore::default();
    for o in &outcomes {
        for score in [per_task.entry(o.task).or_default(), &mut overall] {
            score.total += 1;
            score.correct += usize::from(o.qa_correct);
            score.unsupported += usize::from(o.unsupported);
            score.failed += usize::from(o.error.is_some());
        }
    }
    let pairs: Vec<(bool, bool)> = outcomes
        .iter()
        .filter(|o| !o.unsupported && o.error.is_none())
        .map(|o| (o.grounding_correct, o.qa_correct))
        .collect();
    EvalReport {
        mode: opts.mode.as_str().to_string(),
        per_task,
        overall,
        coherence: compute_coherence(&pairs).ok(),
        outcomes,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum CoherenceError {
    #[error("no evaluated objects")]
    Empty,
    #[error("partition percentages must be finite and non-negative")]
    BadPercentage,
}

/// Four-way split of evaluated objects by grounding and answer correctness, in
/// percent, with the two coherence ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoherenceReport {
    /// Grounding correct, answer correct.
    pub gc: f64,
    /// Grounding wrong, answer wrong.
    pub df: f64,
    /// Grounding correct, answer wrong.
    pub type1: f64,
    /// Grounding wrong, answer correct.
    pub type2: f64,
    /// `type1 / (type1 + df)`, undefined when the denominator is zero.
    pub r1: Option<f64>,
    /// `type2 / (type2 + gc)`, undefined when the denominator is zero.
    pub r2: Option<f64>,
    pub n_objects: usize,
}

fn ratio(num: f64, other: f64) -> Option<f64> {
    let den = num + other;
    (den > 0.0).then(|| 100.0 * num / den)
}

impl CoherenceReport {
    pub fn from_percentages(gc: f64, df: f64, type1: f64, type2: f64) -> Result<Self, CoherenceError> {
        if [gc, df, type1, type2].iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(CoherenceError::BadPercentage);
        }
        Ok(Self {
            gc,
            df,
            type1,
            type2,
            r1: ratio(type1, df),
            r2: ratio(type2, gc),
            n_objects: 0,
        })
    }

    pub fn total(&self) -> f64 {
        self.gc + self.df + self.type1 + self.type2
    }
}

/// Builds the report from `(grounding_correct, qa_correct)` pairs.
pub fn compute_coherence(results: &[(bool, bool)]) -> Result<CoherenceReport, CoherenceError> {
    if results.is_empty() {
        return Err(CoherenceError::Empty);
    }
    let mut counts = [0usize; 4];
    for &(grounded, answered) in results {
        let slot = match (grounded, answered) {
            (true, true) => 0,
            (false, false) => 1,
            (true, false) => 2,
            (false, true) => 3,
        };
        counts[slot] += 1;
    }
    let n = results.len() as f64;
    let pct = |c: usize| 100.0 * c as f64 / n;
    let mut report = CoherenceReport::from_percentages(pct(counts[0]), pct(counts[1]), pct(counts[2]), pct(counts[3]))?;
    // ratios from counts avoid the rounding of the percentages
    report.r1 = ratio(counts[2] as f64, counts[1] as f64);
    report.r2 = ratio(counts[3] as f64, counts[0] as f64);
    report.n_objects = results.len();
    Ok(report)
}
