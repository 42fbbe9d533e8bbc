//! Word-matching question analysis: task type, direction and distance cues, query scope.

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::spatial::CardinalLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskType {
    Counting,
    Existence,
    Attribute,
    SpatialRelationship,
    Refer,
    Navigation,
    RoomType,
    Affordance,
    Description,
    Others,
}

impl TaskType {
    pub const ALL: [TaskType; 10] = [
        Self::Counting,
        Self::Existence,
        Self::Attribute,
        Self::SpatialRelationship,
        Self::Refer,
        Self::Navigation,
        Self::RoomType,
        Self::Affordance,
        Self::Description,
        Self::Others,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Counting => "counting",
            Self::Existence => "existence",
            Self::Attribute => "attribute",
            Self::SpatialRelationship => "spatial_relationship",
            Self::Refer => "refer",
            Self::Navigation => "navigation",
            Self::RoomType => "room_type",
            Self::Affordance => "affordance",
            Self::Description => "description",
            Self::Others => "others",
        }
    }
}

impl std::fmt::Display for TaskType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TaskType {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown task type {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DirectionCue {
    Cardinal { cardinal: CardinalLabel },
    Clockwise { hour: u8 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceCue {
    Near,
    Middle,
    Far,
}

impl DistanceCue {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Near => "near",
            Self::Middle => "middle",
            Self::Far => "far",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryScope {
    Cardinal,
    Clockwise,
    WholeScene,
}

static DIRECTION_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\b(?:(left|right|front|back|behind)|(1[0-2]|[1-9])\s*o'clock)\b").unwrap()
});
static DISTANCE_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\b(near|middle|far)\b").unwrap());
static NAVIGATION_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\bhow (?:do|can|should|would|could|will) .*\bget to\b").unwrap());
static REFER_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\bwhat object\b.*\b(?:(?:at|on) (?:my|your)|in front of (?:me|you)|behind (?:me|you))\b").unwrap());
static ATTRIBUTE_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\bwhat (?:is |are )?(?:the )?(?:colou?r|state|material|shape)\b").unwrap()
});

/// Lowercases and folds typographic apostrophes so `o’clock` matches `o'clock`.
fn fold(text: &str) -> String {
    text.to_lowercase().replace(['\u{2019}', '\u{2018}'], "'")
}

/// The sentence that carries the actual query.
///
/// Situation descriptions often precede the question and mention their own
/// directions, so only the sentence ending at the last `?` is scanned. Without a
/// question mark, the last sentence is used.
pub fn focus_sentence(question: &str) -> &str {
    let text = question.trim_end();
    let end = match text.rfind('?') {
        Some(q) => q + 1,
        None => text.len(),
    };
    let body = &text[..end];
    let scan_to = body.trim_end_matches(['?', '.', '!']).len();
    let start = body[..scan_to]
        .char_indices()
        .filter(|&(i, c)| {
            matches!(c, '.' | '?' | '!')
                && body[i + c.len_utf8()..]
                    .chars()
                    .next()
                    .is_none_or(char::is_whitespace)
        })
        .map(|(i, c)| i + c.len_utf8())
        .last()
        .unwrap_or(0);
    body[start..].trim()
}

pub fn parse_direction(question: &str) -> Option<DirectionCue> {
    let text = fold(focus_sentence(question));
    let caps = DIRECTION_RE.captures(&text)?;
    if let Some(word) = caps.get(1) {
        let cardinal = match word.as_str() {
            "left" => CardinalLabel::Left,
            "right" => CardinalLabel::Right,
            "front" => CardinalLabel::Front,
            _ => CardinalLabel::Back,
        };
        return Some(DirectionCue::Cardinal { cardinal });
    }
    let hour = caps.get(2)?.as_str().parse().ok()?;
    Some(DirectionCue::Clockwise { hour })
}

pub fn parse_distance(question: &str) -> Option<DistanceCue> {
    let text = fold(focus_sentence(question));
    let word = DISTANCE_RE.captures(&text)?.get(1)?;
    Some(match word.as_str() {
        "near" => DistanceCue::Near,
        "middle" => DistanceCue::Middle,
        _ => DistanceCue::Far,
    })
}

fn classify_text(text: &str) -> TaskType {
    if text.contains("how many") {
        TaskType::Counting
    } else if NAVIGATION_RE.is_match(text) {
        TaskType::Navigation
    } else if text.contains("in relation to") {
        TaskType::SpatialRelationship
    } else if text.contains("is there") || text.contains("are there") {
        TaskType::Existence
    } else if REFER_RE.is_match(text) {
        TaskType::Refer
    } else if ATTRIBUTE_RE.is_match(text) {
        TaskType::Attribute
    } else {
        TaskType::Others
    }
}

/// Keyword classifier used when metadata carries no task type.
pub fn classify_task(question: &str) -> TaskType {
    match classify_text(&fold(focus_sentence(question))) {
        TaskType::Others => classify_text(&fold(question)),
        task => task,
    }
}

/// Kind used for cue-less directional queries. Union semantics make it answer-neutral.
pub const DEFAULT_DIRECTIONAL_SCOPE: QueryScope = QueryScope::Cardinal;

pub fn query_scope(task: TaskType, cue: Option<DirectionCue>) -> QueryScope {
    let cue_scope = cue.map(|c| match c {
        DirectionCue::Cardinal { .. } => QueryScope::Cardinal,
        DirectionCue::Clockwise { .. } => QueryScope::Clockwise,
    });
    match task {
        TaskType::Counting | TaskType::Refer => cue_scope.unwrap_or(DEFAULT_DIRECTIONAL_SCOPE),
        TaskType::Attribute | TaskType::Description | TaskType::Others => {
            cue_scope.unwrap_or(QueryScope::WholeScene)
        }
        TaskType::Existence
        | TaskType::Navigation
        | TaskType::SpatialRelationship
        | TaskType::RoomType
        | TaskType::Affordance => QueryScope::WholeScene,
    }
}
