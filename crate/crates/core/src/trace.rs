//! Token-tagged reasoning traces: rendering, parsing and record validation.
//!
//! Canonical layout (one segment per line):
//!
//! ```text
//! <think_type>...</think_type>
//! <grd_rgn>
//! <think_rgn>...</think_rgn>
//! <think_grd>...</think_grd>
//! [OBJ]
//! <think_task>...</think_task>
//! <list_obj_prob>                      (or another trigger)
//! <obj_prob>...</obj_prob>             (image tasks: optional <img_start>ref<img_end>)
//! <think_sum>...</think_sum>
//! <answer>...</answer>
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clue::{ClueKind, CluePayload, Payload};
use crate::grounding::{GroundingResult, PRESENCE_THRESHOLD};
use crate::question::TaskType;
use crate::scene::AgentSituation;

/// Closed vocabulary of trace tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceToken {
    ThinkTypeOpen,
    ThinkTypeClose,
    GrdRgn,
    ThinkRgnOpen,
    ThinkRgnClose,
    ThinkGrdOpen,
    ThinkGrdClose,
    Obj,
    ThinkTaskOpen,
    ThinkTaskClose,
    ListObjProb,
    ListObjLocProb,
    ListObjLocPlrProb,
    HighlightObj,
    ObjProbOpen,
    ObjProbClose,
    ObjLocProbOpen,
    ObjLocProbClose,
    ObjLocPlrProbOpen,
    ObjLocPlrProbClose,
    ImgStart,
    ImgEnd,
    ThinkSumOpen,
    ThinkSumClose,
    AnswerOpen,
    AnswerClose,
}

impl TraceToken {
    pub const ALL: [TraceToken; 26] = [
        Self::ThinkTypeOpen,
        Self::ThinkTypeClose,
        Self::GrdRgn,
        Self::ThinkRgnOpen,
        Self::ThinkRgnClose,
        Self::ThinkGrdOpen,
        Self::ThinkGrdClose,
        Self::Obj,
        Self::ThinkTaskOpen,
        Self::ThinkTaskClose,
        Self::ListObjProb,
        Self::ListObjLocProb,
        Self::ListObjLocPlrProb,
        Self::HighlightObj,
        Self::ObjProbOpen,
        Self::ObjProbClose,
        Self::ObjLocProbOpen,
        Self::ObjLocProbClose,
        Self::ObjLocPlrProbOpen,
        Self::ObjLocPlrProbClose,
        Self::ImgStart,
        Self::ImgEnd,
        Self::ThinkSumOpen,
        Self::ThinkSumClose,
        Self::AnswerOpen,
        Self::AnswerClose,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::ThinkTypeOpen => "<think_type>",
            Self::ThinkTypeClose => "</think_type>",
            Self::GrdRgn => "<grd_rgn>",
            Self::ThinkRgnOpen => "<think_rgn>",
            Self::ThinkRgnClose => "</think_rgn>",
            Self::ThinkGrdOpen => "<think_grd>",
            Self::ThinkGrdClose => "</think_grd>",
            Self::Obj => "[OBJ]",
            Self::ThinkTaskOpen => "<think_task>",
            Self::ThinkTaskClose => "</think_task>",
            Self::ListObjProb => "<list_obj_prob>",
            Self::ListObjLocProb => "<list_obj_loc_prob>",
            Self::ListObjLocPlrProb => "<list_obj_loc_plr_prob>",
            Self::HighlightObj => "<highlight_obj>",
            Self::ObjProbOpen => "<obj_prob>",
            Self::ObjProbClose => "</obj_prob>",
            Self::ObjLocProbOpen => "<obj_loc_prob>",
            Self::ObjLocProbClose => "</obj_loc_prob>",
            Self::ObjLocPlrProbOpen => "<obj_loc_plr_prob>",
            Self::ObjLocPlrProbClose => "</obj_loc_plr_prob>",
            Self::ImgStart => "<img_start>",
            Self::ImgEnd => "<img_end>",
            Self::ThinkSumOpen => "<think_sum>",
            Self::ThinkSumClose => "</think_sum>",
            Self::AnswerOpen => "<answer>",
            Self::AnswerClose => "</answer>",
        }
    }

    pub fn lookup(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.as_str() == s)
    }
}

impl fmt::Display for TraceToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReasoningTrace {
    pub task: TaskType,
    pub think_type: String,
    pub think_rgn: String,
    pub think_grd: String,
    pub think_task: String,
    pub clue: CluePayload,
    pub think_sum: String,
    pub answer: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceError {
    #[error("unknown token {token:?} at byte {pos}")]
    UnknownToken { token: String, pos: usize },
    #[error("expected {expected} at byte {pos}, found {found}")]
    Grammar { expected: String, found: String, pos: usize },
    #[error("{open} opened but not closed; found {found} at byte {pos}")]
    Pairing { open: String, found: String, pos: usize },
    #[error("{tag} segment at byte {pos} is empty")]
    EmptySegment { tag: String, pos: usize },
    #[error("cannot identify the task from {0:?}")]
    UnknownTask(String),
    #[error("contract violation: {0}")]
    Contract(String),
}

/// Clue kind every task must use.
pub fn mandated_clue(task: TaskType) -> ClueKind {
    match task {
        TaskType::SpatialRelationship => ClueKind::ObjLocProb,
        TaskType::Navigation => ClueKind::ObjLocPlrProb,
        TaskType::Attribute | TaskType::Description => ClueKind::HighlightObj,
        TaskType::Counting
        | TaskType::Existence
        | TaskType::Refer
        | TaskType::RoomType
        | TaskType::Affordance
        | TaskType::Others => ClueKind::ObjProb,
    }
}

/// Name of a task as it appears in `This is a ... question`.
pub fn task_phrase(task: TaskType) -> &'static str {
    match task {
        TaskType::Counting => "counting",
        TaskType::Existence => "existence",
        TaskType::Attribute => "attribute",
        TaskType::SpatialRelationship => "spatial relationship",
        TaskType::Refer => "refer",
        TaskType::Navigation => "navigation",
        TaskType::RoomType => "room type",
        TaskType::Affordance => "affordance",
        TaskType::Description => "description",
        TaskType::Others => "general",
    }
}

static THINK_TYPE_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\bthis is an? (.+?) question\b").unwrap());

/// Recovers the task named in a `<think_type>` segment.
pub fn task_from_think_type(text: &str) -> Option<TaskType> {
    let phrase = THINK_TYPE_RE.captures(text)?.get(1)?.as_str().to_lowercase();
    let phrase = phrase.trim();
    if let Some(task) = TaskType::ALL.into_iter().find(|t| task_phrase(*t) == phrase) {
        return Some(task);
    }
    match phrase {
        "appearance" | "appearance (grounded qa)" | "grounded qa" => Some(TaskType::Attribute),
        "spatial" | "spatial_relationship" => Some(TaskType::SpatialRelationship),
        "room_type" => Some(TaskType::RoomType),
        _ => None,
    }
}

static TAG_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"</?[A-Za-z_]+>|\[OBJ\]").unwrap());

fn check_content(name: &str, content: &str) -> Result<(), TraceError> {
    if content.trim().is_empty() {
        return Err(TraceError::Contract(format!("{name} is empty")));
    }
    if let Some(m) = TAG_RE.find(content) {
        return Err(TraceError::Contract(format!("{name} contains tag-like text {:?}", m.as_str())));
    }
    Ok(())
}

impl ReasoningTrace {
    /// Checks the structural invariants that rendering relies on.
    pub fn check(&self) -> Result<(), TraceError> {
        for (name, content) in [
            ("think_type", &self.think_type),
            ("think_rgn", &self.think_rgn),
            ("think_grd", &self.think_grd),
            ("think_task", &self.think_task),
            ("think_sum", &self.think_sum),
            ("answer", &self.answer),
        ] {
            check_content(name, content)?;
        }
        match task_from_think_type(&self.think_type) {
            Some(t) if t == self.task => {}
            other => {
                return Err(TraceError::Contract(format!(
                    "think_type names {:?} but task is {}",
                    other.map(TaskType::as_str),
                    self.task
                )))
            }
        }
        let want = mandated_clue(self.task);
        if self.clue.kind != want {
            return Err(TraceError::Contract(format!(
                "task {} requires a {:?} clue, got {:?}",
                self.task, want, self.clue.kind
            )));
        }
        if self.clue.kind.is_textual() {
            check_content("clue payload", &self.clue.text)?;
        } else if let Some(r) = &self.clue.image_ref {
            check_content("image reference", r)?;
        }
        Ok(())
    }
}

/// Everything up to and including the trigger token.
pub fn render_prefix(trace: &ReasoningTrace) -> String {
    format!(
        "{}{}{}\n{}\n{}{}{}\n{}{}{}\n{}\n{}{}{}\n{}",
        TraceToken::ThinkTypeOpen,
        trace.think_type,
        TraceToken::ThinkTypeClose,
        TraceToken::GrdRgn,
        TraceToken::ThinkRgnOpen,
        trace.think_rgn,
        TraceToken::ThinkRgnClose,
        TraceToken::ThinkGrdOpen,
        trace.think_grd,
        TraceToken::ThinkGrdClose,
        TraceToken::Obj,
        TraceToken::ThinkTaskOpen,
        trace.think_task,
        TraceToken::ThinkTaskClose,
        trace.clue.kind.trigger(),
    )
}

pub fn render_trace(trace: &ReasoningTrace) -> Result<String, TraceError> {
    trace.check()?;
    let mut out = render_prefix(trace);
    out.push('\n');
    let (open, close) = trace.clue.kind.payload_tags();
    match (&trace.clue.image_ref, trace.clue.kind) {
        (_, kind) if kind.is_textual() => {
            out.push_str(&format!("{open}{}{close}\n", trace.clue.text));
        }
        (Some(image), _) => out.push_str(&format!("{open}{image}{close}\n")),
        (None, _) => {}
    }
    out.push_str(&format!(
        "{}{}{}\n{}{}{}",
        TraceToken::ThinkSumOpen,
        trace.think_sum,
        TraceToken::ThinkSumClose,
        TraceToken::AnswerOpen,
        trace.answer,
        TraceToken::AnswerClose
    ));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Item<'a> {
    Token(TraceToken, usize),
    Text(&'a str, usize),
}

fn tokenize(text: &str) -> Result<Vec<Item<'_>>, TraceError> {
    let mut items = Vec::new();
    let mut last = 0;
    for m in TAG_RE.find_iter(text) {
        if m.start() > last {
            items.push(Item::Text(&text[last..m.start()], last));
        }
        let token = TraceToken::lookup(m.as_str()).ok_or_else(|| TraceError::UnknownToken {
            token: m.as_str().to_string(),
            pos: m.start(),
        })?;
        items.push(Item::Token(token, m.start()));
        last = m.end();
    }
    if last < text.len() {
        items.push(Item::Text(&text[last..], last));
    }
    Ok(items)
}

fn normalize_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

struct Cursor<'a> {
    items: Vec<Item<'a>>,
    at: usize,
    len: usize,
}

impl<'a> Cursor<'a> {
    fn describe(item: Option<&Item<'_>>) -> String {
        match item {
            Some(Item::Token(t, _)) => t.to_string(),
            Some(Item::Text(s, _)) => format!("text {:?}", s.trim().chars().take(24).collect::<String>()),
            None => "end of input".into(),
        }
    }

    fn pos(&self) -> usize {
        match self.items.get(self.at) {
            Some(Item::Token(_, p)) | Some(Item::Text(_, p)) => *p,
            None => self.len,
        }
    }

    fn skip_ws(&mut self) {
        while let Some(Item::Text(s, _)) = self.items.get(self.at) {
            if !s.trim().is_empty() {
                break;
            }
            self.at += 1;
        }
    }

    fn peek_token(&mut self) -> Option<TraceToken> {
        self.skip_ws();
        match self.items.get(self.at) {
            Some(Item::Token(t, _)) => Some(*t),
            _ => None,
        }
    }

    fn expect(&mut self, want: &[TraceToken]) -> Result<TraceToken, TraceError> {
        self.skip_ws();
        match self.items.get(self.at) {
            Some(Item::Token(t, _)) if want.contains(t) => {
                self.at += 1;
                Ok(*t)
            }
            other => Err(TraceError::Grammar {
                expected: want.iter().map(|t| t.as_str()).collect::<Vec<_>>().join(" or "),
                found: Self::describe(other),
                pos: self.pos(),
            }),
        }
    }

    /// Content between an already consumed `open` and its `close`.
    fn content(&mut self, open: TraceToken, close: TraceToken, allow_empty: bool) -> Result<String, TraceError> {
        let start = self.pos();
        let mut text = String::new();
        if let Some(Item::Text(s, _)) = self.items.get(self.at) {
            text = normalize_ws(s);
            self.at += 1;
        }
        match self.items.get(self.at) {
            Some(Item::Token(t, _)) if *t == close => {
                self.at += 1;
            }
            other => {
                return Err(TraceError::Pairing {
                    open: open.to_string(),
                    found: Self::describe(other),
                    pos: self.pos(),
                })
            }
        }
        if text.is_empty() && !allow_empty {
            return Err(TraceError::EmptySegment {
                tag: open.to_string(),
                pos: start,
            });
        }
        Ok(text)
    }

    fn segment(&mut self, open: TraceToken, close: TraceToken) -> Result<String, TraceError> {
        self.expect(&[open])?;
        self.content(open, close, false)
    }
}

pub fn parse_trace(text: &str) -> Result<ReasoningTrace, TraceError> {
    use TraceToken as T;
    let mut c = Cursor {
        items: tokenize(text)?,
        at: 0,
        len: text.len(),
    };
    let think_type = c.segment(T::ThinkTypeOpen, T::ThinkTypeClose)?;
    let task = task_from_think_type(&think_type).ok_or_else(|| TraceError::UnknownTask(think_type.clone()))?;
    c.expect(&[T::GrdRgn])?;
    let think_rgn = c.segment(T::ThinkRgnOpen, T::ThinkRgnClose)?;
    let think_grd = c.segment(T::ThinkGrdOpen, T::ThinkGrdClose)?;
    c.expect(&[T::Obj])?;
    let think_task = c.segment(T::ThinkTaskOpen, T::ThinkTaskClose)?;
    let trigger = c.expect(&[T::ListObjProb, T::ListObjLocProb, T::ListObjLocPlrProb, T::HighlightObj])?;
    let kind = ClueKind::from_trigger(trigger.as_str()).expect("trigger tokens map to clue kinds");
    let (open, close) = kind.payload_tags();
    let (open, close) = (T::lookup(open).unwrap(), T::lookup(close).unwrap());
    let clue = if kind.is_textual() {
        CluePayload::textual(kind, c.segment(open, close)?)
    } else if c.peek_token() == Some(T::ImgStart) {
        c.expect(&[T::ImgStart])?;
        CluePayload::highlight(Some(c.content(open, close, false)?))
    } else {
        CluePayload::highlight(None)
    };
    let think_sum = c.segment(T::ThinkSumOpen, T::ThinkSumClose)?;
    let answer = c.segment(T::AnswerOpen, T::AnswerClose)?;
    c.skip_ws();
    if c.at < c.items.len() {
        return Err(TraceError::Grammar {
            expected: "end of input".into(),
            found: Cursor::describe(c.items.get(c.at)),
            pos: c.pos(),
        });
    }
    let trace = ReasoningTrace {
        task,
        think_type,
        think_rgn,
        think_grd,
        think_task,
        clue,
        think_sum,
        answer,
    };
    if trace.clue.kind != mandated_clue(task) {
        return Err(TraceError::Grammar {
            expected: mandated_clue(task).trigger().to_string(),
            found: trigger.to_string(),
            pos: 0,
        });
    }
    Ok(trace)
}

/// One line of the trace JSONL output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub scene_id: String,
    pub question: String,
    pub answer: String,
    pub task_type: TaskType,
    pub target_ids: Vec<u32>,
    pub situation: AgentSituation,
    pub trace: String,
    pub clue_kind: ClueKind,
    pub grounding: GroundingResult,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_ref: Option<String>,
    /// Noise mode the grounding was generated under; absent for clean data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceViolation {
    pub rule: &'static str,
    pub detail: String,
}

impl fmt::Display for TraceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.rule, self.detail)
    }
}

pub fn validate_trace(trace: &ReasoningTrace, record: &TraceRecord, cap: usize) -> Vec<TraceViolation> {
    let mut out = Vec::new();
    let mut push = |rule, detail: String| out.push(TraceViolation { rule, detail });
    let want = mandated_clue(trace.task);
    if trace.clue.kind != want {
        push("clue-mapping", format!("{} uses {:?}, expected {:?}", trace.task, trace.clue.kind, want));
    }
    if record.task_type != trace.task {
        push("task-type", format!("record says {}, trace says {}", record.task_type, trace.task));
    }
    if record.clue_kind != trace.clue.kind {
        push("clue-kind", format!("record says {:?}, trace has {:?}", record.clue_kind, trace.clue.kind));
    }
    if trace.answer.trim().is_empty() {
        push("answer", "answer is empty".into());
    }
    match Payload::parse(&trace.clue) {
        Err(e) => push("payload", e.to_string()),
        Ok(payload) => {
            if payload.len() > cap {
                push("entry-count", format!("{} entries exceed the cap of {cap}", payload.len()));
            }
            let probs = payload.probs();
            let grounded = !record.grounding.is_empty();
            if trace.clue.kind.is_textual() && grounded && probs.len() != record.grounding.len() {
                push(
                    "grounding-length",
                    format!("{} payload entries vs {} grounding ids", probs.len(), record.grounding.len()),
                );
            }
            if trace.clue.kind.is_textual() && grounded && record.noise.is_none() {
                let targets: BTreeSet<u32> = record.target_ids.iter().copied().collect();
                for (&id, &p) in record.grounding.candidates.iter().zip(&probs) {
                    if targets.contains(&id) != (p >= PRESENCE_THRESHOLD) {
                        push("probability-band", format!("object {id} has prob {p:.2}"));
                    }
                }
            }
            if !trace.clue.kind.is_textual() && record.image_ref.is_none() && trace.clue.image_ref.is_none() {
                push("image-ref", "highlight clue without an image reference".into());
            }
        }
    }
    out
}

/// Phrase templates for the think segments.
pub mod templates {
    use crate::clue::ClueKind;
    use crate::lexicon::{indefinite_article, pluralize};
    use crate::question::{DirectionCue, DistanceCue, QueryScope, TaskType};
    use crate::spatial::CardinalLabel;

    use super::task_phrase;

    pub fn think_type(task: TaskType) -> String {
        let phrase = task_phrase(task);
        let tail = match task {
            TaskType::Navigation | TaskType::SpatialRelationship => "first",
            _ => "to answer it",
        };
        format!(
            "This is {} {phrase} question, so I need to ground the corresponding objects {tail}.",
            indefinite_article(phrase)
        )
    }

    /// `"on my right in the middle distance"`, `"at my 6 o'clock"`, ...
    pub fn region_phrase(cue: Option<DirectionCue>, dist: Option<DistanceCue>) -> String {
        let mut phrase = match cue {
            Some(DirectionCue::Cardinal { cardinal }) => match cardinal {
                CardinalLabel::Left => "on my left".to_string(),
                CardinalLabel::Right => "on my right".to_string(),
                CardinalLabel::Front => "in front of me".to_string(),
                CardinalLabel::Back => "behind me".to_string(),
            },
            Some(DirectionCue::Clockwise { hour }) => format!("at my {hour} o'clock"),
            None => "around me".to_string(),
        };
        if let Some(d) = dist {
            phrase.push_str(&format!(" in the {} distance", d.as_str()));
        }
        phrase
    }

    pub fn think_rgn(scope: QueryScope, cue: Option<DirectionCue>, dist: Option<DistanceCue>) -> String {
        match scope {
            QueryScope::WholeScene => "Now I need to list all the objects in the scene.".into(),
            _ => format!("Now I need to list all the objects {}.", region_phrase(cue, dist)),
        }
    }

    pub fn think_grd(
        task: TaskType,
        scope: QueryScope,
        cue: Option<DirectionCue>,
        dist: Option<DistanceCue>,
        category: Option<&str>,
        anchor: Option<&str>,
    ) -> String {
        let region = match scope {
            QueryScope::WholeScene => String::new(),
            _ => format!(" {}", region_phrase(cue, dist)),
        };
        let cat = category.unwrap_or("object");
        match task {
            TaskType::Counting => format!(
                "Ground the object: The {}{region}. You should find all the possible objects.",
                pluralize(cat)
            ),
            TaskType::Existence => format!("Ground the object: The {} in the room.", pluralize(cat)),
            TaskType::Refer => format!("Ground the object: The object{region}."),
            TaskType::SpatialRelationship => {
                format!("Ground the object: The {cat} and the {}.", anchor.unwrap_or("object"))
            }
            _ => format!("Ground the object: The {cat}{region}."),
        }
    }

    pub fn think_task(kind: ClueKind) -> &'static str {
        match kind {
            ClueKind::ObjProb => "Now I need to list all the potential objects and the probability.",
            ClueKind::ObjLocProb => "Now I need to list all the locations and probabilities of the potential objects.",
            ClueKind::ObjLocPlrProb => {
                "Now I need to list all the locations(polar coordinate: angle, distance(/m)) and probabilities of the potential objects."
            }
            ClueKind::HighlightObj => "Now I need to retrieve the image of the target object.",
        }
    }

    pub fn think_sum(kind: ClueKind) -> &'static str {
        match kind {
            ClueKind::HighlightObj => "Now answer the question based on the object image.",
            _ => "Now answer the question based on the object probabilities.",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counting() -> ReasoningTrace {
        ReasoningTrace {
            task: TaskType::Counting,
            think_type: templates::think_type(TaskType::Counting),
            think_rgn: "Now I need to list all the objects on my right in the middle distance".into(),
            think_grd: "Ground the object: The pillows on my right in the middle distance. You should find all the possible objects.".into(),
            think_task: templates::think_task(ClueKind::ObjProb).into(),
            clue: CluePayload::textual(ClueKind::ObjProb, "pillow: 0.74 pillow: 0.78 wall: 0.04"),
            think_sum: templates::think_sum(ClueKind::ObjProb).into(),
            answer: "two".into(),
        }
    }

    #[test]
    fn renders_canonical_layout() {
        let text = render_trace(&counting()).unwrap();
        assert!(text.starts_with("<think_type>This is a counting question"));
        assert!(text.ends_with("<answer>two</answer>"));
        assert!(text.contains("[OBJ]\n<think_task>"));
        assert!(text.contains("<list_obj_prob>\n<obj_prob>pillow: 0.74"));
        assert_eq!(parse_trace(&text).unwrap(), counting());
    }

    #[test]
    fn highlight_without_image_has_no_payload_tag() {
        let mut t = counting();
        t.task = TaskType::Attribute;
        t.think_type = templates::think_type(TaskType::Attribute);
        t.clue = CluePayload::highlight(None);
        t.answer = "closed".into();
        let text = render_trace(&t).unwrap();
        assert!(text.contains("<highlight_obj>\n<think_sum>"));
        assert!(!text.contains("<obj_prob>") && !text.contains("<img_start>"));
        assert_eq!(parse_trace(&text).unwrap(), t);
        t.clue.image_ref = Some("img/3.jpg".into());
        let text = render_trace(&t).unwrap();
        assert!(text.contains("<highlight_obj>\n<img_start>img/3.jpg<img_end>"));
        assert_eq!(parse_trace(&text).unwrap(), t);
    }

    #[test]
    fn render_rejects_contract_breaks() {
        let mut t = counting();
        t.clue = CluePayload::textual(ClueKind::ObjLocPlrProb, "door: 1.0, 1.0; prob: 0.50");
        assert!(matches!(render_trace(&t), Err(TraceError::Contract(_))));
        let mut t = counting();
        t.answer = "  ".into();
        assert!(matches!(render_trace(&t), Err(TraceError::Contract(_))));
        let mut t = counting();
        t.think_sum = "see <answer>".into();
        assert!(matches!(render_trace(&t), Err(TraceError::Contract(_))));
        let mut t = counting();
        t.task = TaskType::Existence;
        assert!(matches!(render_trace(&t), Err(TraceError::Contract(_))));
    }

    #[test]
    fn parse_errors() {
        let text = render_trace(&counting()).unwrap();
        let no_close = text.replace("</answer>", "");
        assert!(matches!(parse_trace(&no_close), Err(TraceError::Pairing { .. })));
        let unknown = text.replace("<grd_rgn>", "<grd_region>");
        assert!(matches!(parse_trace(&unknown), Err(TraceError::UnknownToken { pos, .. }) if pos == text.find("<grd_rgn>").unwrap()));
        let missing = text.replace("[OBJ]", "");
        match parse_trace(&missing) {
            Err(TraceError::Grammar { expected, .. }) => assert_eq!(expected, "[OBJ]"),
            other => panic!("{other:?}"),
        }
        let stray = format!("{text}\ntrailing words");
        assert!(matches!(parse_trace(&stray), Err(TraceError::Grammar { .. })));
        let empty = text.replace("<answer>two</answer>", "<answer> </answer>");
        assert!(matches!(parse_trace(&empty), Err(TraceError::EmptySegment { .. })));
        let wrong_tag = text.replace("<obj_prob>", "<obj_loc_prob>").replace("</obj_prob>", "</obj_loc_prob>");
        assert!(matches!(parse_trace(&wrong_tag), Err(TraceError::Grammar { .. })));
    }

    #[test]
    fn parse_normalizes_whitespace() {
        let text = render_trace(&counting()).unwrap().replace('\n', "\n\n   ").replace("pillow: 0.78", "pillow:  0.78\n");
        let parsed = parse_trace(&text).unwrap();
        assert_eq!(parsed.clue.text, "pillow: 0.74 pillow: 0.78 wall: 0.04");
    }

    #[test]
    fn task_phrases_round_trip() {
        for task in TaskType::ALL {
            assert_eq!(task_from_think_type(&templates::think_type(task)), Some(task));
        }
        assert_eq!(
            task_from_think_type("This is a appearance (grounded qa) question, so I need to ground"),
            Some(TaskType::Attribute)
        );
        assert_eq!(task_from_think_type("no task here"), None);
    }

    fn record(trace: &ReasoningTrace, grounding: GroundingResult, targets: Vec<u32>) -> TraceRecord {
        TraceRecord {
            scene_id: "s".into(),
            question: "q".into(),
            answer: trace.answer.clone(),
            task_type: trace.task,
            target_ids: targets,
            situation: AgentSituation::new([0.0; 3], [0.0, 1.0]).unwrap(),
            trace: render_trace(trace).unwrap_or_default(),
            clue_kind: trace.clue.kind,
            grounding,
            image_ref: None,
            noise: None,
        }
    }

    #[test]
    fn validation_rules() {
        let t = counting();
        let g = GroundingResult { candidates: vec![1, 2, 3], probs: vec![0.74, 0.78, 0.04] };
        assert!(validate_trace(&t, &record(&t, g.clone(), vec![1, 2]), 30).is_empty());
        let bands = validate_trace(&t, &record(&t, g.clone(), vec![1]), 30);
        assert_eq!(bands.len(), 1);
        assert_eq!(bands[0].rule, "probability-band");

        let mut wrong = t.clone();
        wrong.clue = CluePayload::textual(ClueKind::ObjLocPlrProb, "door: -86.1, 1.9; prob: 0.79");
        let v = validate_trace(&wrong, &record(&t, GroundingResult::default(), vec![]), 30);
        assert_eq!(v.iter().filter(|v| v.rule == "clue-mapping").count(), 1);

        let mut big = t.clone();
        let labels: Vec<String> = (0..40).map(|i| format!("thing{i}")).collect();
        let probs = vec![0.1; 40];
        big.clue.text = crate::clue::format_obj_prob(&labels, &probs, 40).unwrap();
        let v = validate_trace(&big, &record(&big, GroundingResult::default(), vec![]), 30);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, "entry-count");
    }
}
