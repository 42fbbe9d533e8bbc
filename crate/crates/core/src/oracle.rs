//! Rule-based answering from clue payloads.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clue::{LocEntry, Payload, PlrEntry, ProbEntry};
use crate::grounding::PRESENCE_THRESHOLD;
use crate::lexicon::{number_to_word, singularize};
use crate::question::TaskType;
use crate::scene::normalize_label;
use crate::spatial::{distance_bucket, DistanceThresholds};
use crate::trace::mandated_clue;

/// Normalized answer text: lowercase, trimmed, no terminal period.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Answer(String);

impl Answer {
    pub fn new(text: &str) -> Self {
        let t = text.trim().to_lowercase();
        let t = t.trim_end_matches('.').trim_end();
        Self(t.to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("no candidate for {0}")]
    NoCandidate(String),
    #[error("task {0} needs image or world knowledge; unsupported")]
    Unsupported(TaskType),
    #[error("task {task} cannot be answered from a {found:?} payload")]
    PayloadMismatch { task: TaskType, found: crate::clue::ClueKind },
    #[error("synonym table line {line}: {message}")]
    Synonyms { line: usize, message: String },
}

/// Symmetric label-equivalence pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Synonyms {
    pairs: HashSet<(String, String)>,
}

impl Synonyms {
    pub fn insert(&mut self, a: &str, b: &str) {
        let (a, b) = (singularize(&normalize_label(a)), singularize(&normalize_label(b)));
        self.pairs.insert((a.clone(), b.clone()));
        self.pairs.insert((b, a));
    }

    pub fn related(&self, a: &str, b: &str) -> bool {
        self.pairs.contains(&(a.to_string(), b.to_string()))
    }

    /// Two columns per line separated by a tab or comma; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, OracleError> {
        let mut table = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (a, b) = line
                .split_once('\t')
                .or_else(|| line.split_once(','))
                .ok_or_else(|| OracleError::Synonyms {
                    line: i + 1,
                    message: "expected two columns".into(),
                })?;
            if a.trim().is_empty() || b.trim().is_empty() {
                return Err(OracleError::Synonyms {
                    line: i + 1,
                    message: "empty column".into(),
                });
            }
            table.insert(a, b);
        }
        Ok(table)
    }

    pub fn load(path: impl AsRef<Path>) -> std::io::Result<Result<Self, OracleError>> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }
}

pub fn match_label(candidate: &str, query_category: &str, synonyms: &Synonyms) -> bool {
    let a = singularize(candidate);
    let b = singularize(query_category);
    a == b || synonyms.related(&a, &b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NavigationStyle {
    /// "turn right and walk to the middle distance."
    #[default]
    Turn,
    /// "right, middle distance." with front/behind/left/right wording
    Relative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpatialRules {
    /// Allowed rise of the subject's bottom above the anchor's top for "within".
    pub vertical_margin_m: f64,
    /// Minimum gap of the subject's bottom above the anchor's top for "on top of".
    pub on_top_gap_m: f64,
    /// Fraction of the summed footprint diagonals within which objects are "next to".
    pub proximity_factor: f64,
}

impl Default for SpatialRules {
    fn default() -> Self {
        Self {
            vertical_margin_m: 0.3,
            on_top_gap_m: 0.05,
            proximity_factor: 0.5,
        }
    }
}

/// Everything the oracle needs beyond the payload.
#[derive(Debug, Clone, Default)]
pub struct AnswerContext<'a> {
    pub category: Option<&'a str>,
    pub anchor: Option<&'a str>,
    pub synonyms: Option<&'a Synonyms>,
    pub thresholds: DistanceThresholds,
    pub spatial: SpatialRules,
    pub navigation: NavigationStyle,
}

fn empty_synonyms() -> &'static Synonyms {
    static EMPTY: std::sync::OnceLock<Synonyms> = std::sync::OnceLock::new();
    EMPTY.get_or_init(Synonyms::default)
}

pub fn answer_counting(entries: &[ProbEntry], category: &str, synonyms: &Synonyms, threshold: f64) -> Answer {
    let n = entries
        .iter()
        .filter(|e| e.prob >= threshold && match_label(&e.label, category, synonyms))
        .count();
    Answer::new(&number_to_word(n as u64))
}

pub fn answer_existence(entries: &[ProbEntry], category: &str, synonyms: &Synonyms, threshold: f64) -> Answer {
    let found = entries
        .iter()
        .any(|e| e.prob >= threshold && match_label(&e.label, category, synonyms));
    Answer::new(if found { "yes" } else { "no" })
}

/// Index of the highest probability; ties keep the earliest entry.
fn argmax(probs: impl Iterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, p) in probs.enumerate() {
        if best.is_none_or(|(_, b)| p > b) {
            best = Some((i, p));
        }
    }
    best.map(|(i, _)| i)
}

pub fn answer_refer(entries: &[ProbEntry]) -> Result<Answer, OracleError> {
    let i = argmax(entries.iter().map(|e| e.prob)).ok_or_else(|| OracleError::NoCandidate("refer".into()))?;
    Ok(Answer::new(&format!("the {}", entries[i].label)))
}

/// Turn phrase for a signed angle (positive is left).
pub fn turn_phrase(angle_deg: f64, style: NavigationStyle) -> &'static str {
    let turn = if angle_deg.abs() <= 45.0 {
        0
    } else if !(-135.0..=135.0).contains(&angle_deg) {
        1
    } else if angle_deg > 45.0 {
        2
    } else {
        3
    };
    match style {
        NavigationStyle::Turn => ["go straight", "turn around", "turn left", "turn right"][turn],
        NavigationStyle::Relative => ["in front of", "behind", "left", "right"][turn],
    }
}

pub fn answer_navigation(
    entries: &[PlrEntry],
    category: &str,
    synonyms: &Synonyms,
    thresholds: &DistanceThresholds,
    style: NavigationStyle,
) -> Result<Answer, OracleError> {
    let matching: Vec<usize> = (0..entries.len())
        .filter(|&i| entries[i].prob >= PRESENCE_THRESHOLD && match_label(&entries[i].label, category, synonyms))
        .collect();
    let pick = match argmax(matching.iter().map(|&i| entries[i].prob)) {
        Some(j) => matching[j],
        None => argmax(entries.iter().map(|e| e.prob)).ok_or_else(|| OracleError::NoCandidate(category.into()))?,
    };
    let polar = entries[pick].polar;
    let bucket = distance_bucket(polar.distance_m, thresholds).as_str();
    let direction = turn_phrase(polar.angle_deg, style);
    Ok(Answer::new(&match style {
        NavigationStyle::Turn => format!("{direction} and walk to the {bucket} distance."),
        NavigationStyle::Relative => format!("{direction}, {bucket} distance."),
    }))
}

fn best_match<'e>(entries: &'e [LocEntry], category: &str, synonyms: &Synonyms) -> Result<&'e LocEntry, OracleError> {
    let matching: Vec<&LocEntry> = entries
        .iter()
        .filter(|e| match_label(&e.label, category, synonyms))
        .collect();
    argmax(matching.iter().map(|e| e.prob))
        .map(|i| matching[i])
        .ok_or_else(|| OracleError::NoCandidate(category.into()))
}

const EPS: f64 = 1e-9;

/// Relation phrase between two agent-frame boxes, first rule that fires wins.
pub fn spatial_relation(subject: &LocEntry, anchor: &LocEntry, rules: &SpatialRules) -> &'static str {
    let (s, a) = (&subject.bbox, &anchor.bbox);
    let bottom = |c: &[f64; 3], z: &[f64; 3]| c[2] - z[2] / 2.0;
    let top = |c: &[f64; 3], z: &[f64; 3]| c[2] + z[2] / 2.0;
    let (s_bottom, a_bottom, a_top) = (bottom(&s.center, &s.size), bottom(&a.center, &a.size), top(&a.center, &a.size));
    let center_inside = (0..2).all(|k| (s.center[k] - a.center[k]).abs() <= a.size[k] / 2.0 + EPS);
    let footprints_overlap =
        (0..2).all(|k| (s.center[k] - a.center[k]).abs() <= (s.size[k] + a.size[k]) / 2.0 + EPS);
    if center_inside && s_bottom >= a_bottom - EPS && s_bottom <= a_top + rules.vertical_margin_m + EPS {
        return "placed within the area of";
    }
    if footprints_overlap && s_bottom >= a_top + rules.on_top_gap_m - EPS {
        return "on top of";
    }
    let dx = s.center[0] - a.center[0];
    let dy = s.center[1] - a.center[1];
    let diag = |z: &[f64; 3]| z[0].hypot(z[1]);
    if dx.hypot(dy) <= rules.proximity_factor * (diag(&s.size) + diag(&a.size)) + EPS {
        return "next to";
    }
    if dx.abs() >= dy.abs() {
        if dx < 0.0 {
            "to the left of"
        } else {
            "to the right of"
        }
    } else if dy > 0.0 {
        "behind"
    } else {
        "in front of"
    }
}

pub fn answer_spatial(
    entries: &[LocEntry],
    subject_category: &str,
    anchor_category: &str,
    synonyms: &Synonyms,
    rules: &SpatialRules,
) -> Result<Answer, OracleError> {
    let subject = best_match(entries, subject_category, synonyms)?;
    let anchor = best_match(entries, anchor_category, synonyms)?;
    let relation = spatial_relation(subject, anchor, rules);
    Ok(Answer::new(&format!(
        "the {} is {relation} the {}.",
        subject_category, anchor_category
    )))
}

/// Dispatches to the task-specific rule.
pub fn answer(task: TaskType, payload: &Payload, ctx: &AnswerContext<'_>) -> Result<Answer, OracleError> {
    let synonyms: &Synonyms = match ctx.synonyms {
        Some(s) => s,
        None => empty_synonyms(),
    };
    match task {
        TaskType::Attribute
        | TaskType::Description
        | TaskType::RoomType
        | TaskType::Affordance
        | TaskType::Others => return Err(OracleError::Unsupported(task)),
        _ => {}
    }
    if payload.kind() != mandated_clue(task) {
        return Err(OracleError::PayloadMismatch { task, found: payload.kind() });
    }
    let category = || ctx.category.ok_or_else(|| OracleError::NoCandidate("query category".into()));
    match (task, payload) {
        (TaskType::Counting, Payload::ObjProb(e)) => Ok(answer_counting(e, category()?, synonyms, PRESENCE_THRESHOLD)),
        (TaskType::Existence, Payload::ObjProb(e)) => Ok(answer_existence(e, category()?, synonyms, PRESENCE_THRESHOLD)),
        (TaskType::Refer, Payload::ObjProb(e)) => answer_refer(e),
        (TaskType::Navigation, Payload::ObjPlr(e)) => {
            answer_navigation(e, category()?, synonyms, &ctx.thresholds, ctx.navigation)
        }
        (TaskType::SpatialRelationship, Payload::ObjLoc(e)) => {
            let anchor = ctx.anchor.ok_or_else(|| OracleError::NoCandidate("anchor category".into()))?;
            answer_spatial(e, category()?, anchor, synonyms, &ctx.spatial)
        }
        _ => Err(OracleError::PayloadMismatch { task, found: payload.kind() }),
    }
}
