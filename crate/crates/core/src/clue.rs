//! Visual-clue payloads: rendering, parsing back, and trigger dispatch.
//!
//! Coordinates, angles and distances print with one decimal, probabilities with
//! two. Rounding is half away from zero and negative zero prints unsigned.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grounding::GroundingResult;
use crate::scene::{object_centroid, AgentSituation, Scene};
use crate::spatial::{relative_obb, signed_polar, AgentFrameBox, DegenerateDirection, PolarCoordinate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClueKind {
    ObjProb,
    ObjLocProb,
    ObjLocPlrProb,
    HighlightObj,
}

impl ClueKind {
    pub const ALL: [ClueKind; 4] = [Self::ObjProb, Self::ObjLocProb, Self::ObjLocPlrProb, Self::HighlightObj];

    pub fn trigger(self) -> &'static str {
        match self {
            Self::ObjProb => "<list_obj_prob>",
            Self::ObjLocProb => "<list_obj_loc_prob>",
            Self::ObjLocPlrProb => "<list_obj_loc_plr_prob>",
            Self::HighlightObj => "<highlight_obj>",
        }
    }

    /// Open/close tags wrapping the payload.
    pub fn payload_tags(self) -> (&'static str, &'static str) {
        match self {
            Self::ObjProb => ("<obj_prob>", "</obj_prob>"),
            Self::ObjLocProb => ("<obj_loc_prob>", "</obj_loc_prob>"),
            Self::ObjLocPlrProb => ("<obj_loc_plr_prob>", "</obj_loc_plr_prob>"),
            Self::HighlightObj => ("<img_start>", "<img_end>"),
        }
    }

    pub fn is_textual(self) -> bool {
        self != Self::HighlightObj
    }

    pub fn from_trigger(token: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.trigger() == token)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CluePayload {
    pub kind: ClueKind,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_ref: Option<String>,
}

impl CluePayload {
    pub fn textual(kind: ClueKind, text: impl Into<String>) -> Self {
        Self {
            kind,
            text: text.into(),
            image_ref: None,
        }
    }

    pub fn highlight(image_ref: Option<String>) -> Self {
        Self {
            kind: ClueKind::HighlightObj,
            text: String::new(),
            image_ref,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClueError {
    #[error("parallel lists differ in length: {labels} labels vs {values} values vs {probs} probs")]
    LengthMismatch { labels: usize, values: usize, probs: usize },
    #[error("{count} entries exceed the cap of {cap}")]
    TooManyEntries { count: usize, cap: usize },
    #[error("object {0} has no image reference")]
    MissingImage(u32),
    #[error("grounding result is empty")]
    EmptyGrounding,
    #[error("object {0} is not in the scene")]
    UnknownObject(u32),
    #[error("malformed prefix: {0}")]
    MalformedPrefix(String),
    #[error("object {0}: {1}")]
    Degenerate(u32, DegenerateDirection),
    #[error("cannot parse payload entry {0:?}")]
    BadEntry(String),
}

/// Fixed-point rendering with half-away-from-zero rounding.
pub fn fmt_fixed(x: f64, decimals: u32) -> String {
    let scale = 10f64.powi(decimals as i32);
    let n = (x * scale).round() as i64;
    let sign = if n < 0 { "-" } else { "" };
    let n = n.unsigned_abs();
    let unit = 10u64.pow(decimals);
    if decimals == 0 {
        return format!("{sign}{n}");
    }
    format!("{sign}{}.{:0width$}", n / unit, n % unit, width = decimals as usize)
}

pub fn fmt_coord(x: f64) -> String {
    fmt_fixed(x, 1)
}

pub fn fmt_prob(p: f64) -> String {
    fmt_fixed(p, 2)
}

fn check_lengths(labels: usize, values: usize, probs: usize, cap: usize) -> Result<(), ClueError> {
    if labels != values || labels != probs {
        return Err(ClueError::LengthMismatch { labels, values, probs });
    }
    if labels > cap {
        return Err(ClueError::TooManyEntries { count: labels, cap });
    }
    Ok(())
}

/// `"label: p label: p ..."`
pub fn format_obj_prob<S: AsRef<str>>(labels: &[S], probs: &[f64], cap: usize) -> Result<String, ClueError> {
    check_lengths(labels.len(), probs.len(), probs.len(), cap)?;
    Ok(labels
        .iter()
        .zip(probs)
        .map(|(l, p)| format!("{}: {}", l.as_ref(), fmt_prob(*p)))
        .collect::<Vec<_>>()
        .join(" "))
}

/// `"label: cx,cy,cz,sx,sy,sz; prob: p ..."`
pub fn format_obj_loc_prob<S: AsRef<str>>(
    labels: &[S],
    boxes: &[AgentFrameBox],
    probs: &[f64],
    cap: usize,
) -> Result<String, ClueError> {
    check_lengths(labels.len(), boxes.len(), probs.len(), cap)?;
    Ok(labels
        .iter()
        .zip(boxes)
        .zip(probs)
        .map(|((l, b), p)| {
            let nums: Vec<String> = b.center.iter().chain(&b.size).map(|v| fmt_coord(*v)).collect();
            format!("{}: {}; prob: {}", l.as_ref(), nums.join(","), fmt_prob(*p))
        })
        .collect::<Vec<_>>()
        .join(" "))
}

/// `"label: a, d; prob: p ..."`
pub fn format_obj_loc_plr_prob<S: AsRef<str>>(
    labels: &[S],
    polars: &[PolarCoordinate],
    probs: &[f64],
    cap: usize,
) -> Result<String, ClueError> {
    check_lengths(labels.len(), polars.len(), probs.len(), cap)?;
    Ok(labels
        .iter()
        .zip(polars)
        .zip(probs)
        .map(|((l, c), p)| {
            format!(
                "{}: {}, {}; prob: {}",
                l.as_ref(),
                fmt_coord(c.angle_deg),
                fmt_coord(c.distance_m),
                fmt_prob(*p)
            )
        })
        .collect::<Vec<_>>()
        .join(" "))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbEntry {
    pub label: String,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocEntry {
    pub label: String,
    pub bbox: AgentFrameBox,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlrEntry {
    pub label: String,
    pub polar: PolarCoordinate,
    pub prob: f64,
}

/// A payload read back into structured entries.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    ObjProb(Vec<ProbEntry>),
    ObjLoc(Vec<LocEntry>),
    ObjPlr(Vec<PlrEntry>),
    Highlight(Option<String>),
}

impl Payload {
    pub fn parse(clue: &CluePayload) -> Result<Self, ClueError> {
        Ok(match clue.kind {
            ClueKind::ObjProb => Payload::ObjProb(parse_obj_prob(&clue.text)?),
            ClueKind::ObjLocProb => Payload::ObjLoc(parse_obj_loc_prob(&clue.text)?),
            ClueKind::ObjLocPlrProb => Payload::ObjPlr(parse_obj_loc_plr_prob(&clue.text)?),
            ClueKind::HighlightObj => Payload::Highlight(clue.image_ref.clone()),
        })
    }

    pub fn kind(&self) -> ClueKind {
        match self {
            Payload::ObjProb(_) => ClueKind::ObjProb,
            Payload::ObjLoc(_) => ClueKind::ObjLocProb,
            Payload::ObjPlr(_) => ClueKind::ObjLocPlrProb,
            Payload::Highlight(_) => ClueKind::HighlightObj,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Payload::ObjProb(v) => v.len(),
            Payload::ObjLoc(v) => v.len(),
            Payload::ObjPlr(v) => v.len(),
            Payload::Highlight(_) => 0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn probs(&self) -> Vec<f64> {
        match self {
            Payload::ObjProb(v) => v.iter().map(|e| e.prob).collect(),
            Payload::ObjLoc(v) => v.iter().map(|e| e.prob).collect(),
            Payload::ObjPlr(v) => v.iter().map(|e| e.prob).collect(),
            Payload::Highlight(_) => Vec::new(),
        }
    }
}

/// Splits `"label: rest label: rest"` where each `rest` is the text up to the next
/// entry. Entries are recognized by `"<label>: "` following a completed value.
fn split_entries<'a>(text: &'a str, ends_entry: impl Fn(&str) -> Option<usize>) -> Result<Vec<(String, &'a str)>, ClueError> {
    let mut out = Vec::new();
    let mut rest = text.trim_start();
    while !rest.is_empty() {
        let colon = rest.find(": ").ok_or_else(|| ClueError::BadEntry(rest.to_string()))?;
        let label = rest[..colon].split_whitespace().collect::<Vec<_>>().join(" ");
        if label.is_empty() {
            return Err(ClueError::BadEntry(rest.to_string()));
        }
        let body = &rest[colon + 2..];
        let len = ends_entry(body).ok_or_else(|| ClueError::BadEntry(rest.to_string()))?;
        out.push((label, body[..len].trim()));
        rest = body[len..].trim_start();
    }
    Ok(out)
}

fn number(s: &str) -> Result<f64, ClueError> {
    let v: f64 = s.trim().parse().map_err(|_| ClueError::BadEntry(s.to_string()))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ClueError::BadEntry(s.to_string()))
    }
}

/// Length of the leading run of non-whitespace characters, if any.
fn token_len(s: &str) -> Option<usize> {
    let n = s.find(char::is_whitespace).unwrap_or(s.len());
    (n > 0).then_some(n)
}

/// Length up to and including the probability that follows `"; prob: "`.
fn prob_suffix_len(s: &str) -> Option<usize> {
    let at = s.find("; prob: ")? + "; prob: ".len();
    Some(at + token_len(&s[at..])?)
}

fn split_prob(body: &str) -> Result<(&str, f64), ClueError> {
    let (head, p) = body
        .rsplit_once("; prob: ")
        .ok_or_else(|| ClueError::BadEntry(body.to_string()))?;
    Ok((head, number(p)?))
}

pub fn parse_obj_prob(text: &str) -> Result<Vec<ProbEntry>, ClueError> {
    split_entries(text, token_len)?
        .into_iter()
        .map(|(label, v)| Ok(ProbEntry { label, prob: number(v)? }))
        .collect()
}

pub fn parse_obj_loc_prob(text: &str) -> Result<Vec<LocEntry>, ClueError> {
    split_entries(text, prob_suffix_len)?
        .into_iter()
        .map(|(label, body)| {
            let (head, prob) = split_prob(body)?;
            let nums = head.split(',').map(number).collect::<Result<Vec<_>, _>>()?;
            if nums.len() != 6 {
                return Err(ClueError::BadEntry(body.to_string()));
            }
            Ok(LocEntry {
                label,
                bbox: AgentFrameBox {
                    center: [nums[0], nums[1], nums[2]],
                    size: [nums[3], nums[4], nums[5]],
                },
                prob,
            })
        })
        .collect()
}

pub fn parse_obj_loc_plr_prob(text: &str) -> Result<Vec<PlrEntry>, ClueError> {
    split_entries(text, prob_suffix_len)?
        .into_iter()
        .map(|(label, body)| {
            let (head, prob) = split_prob(body)?;
            let (a, d) = head.split_once(',').ok_or_else(|| ClueError::BadEntry(body.to_string()))?;
            Ok(PlrEntry {
                label,
                polar: PolarCoordinate {
                    angle_deg: number(a)?,
                    distance_m: number(d)?,
                },
                prob,
            })
        })
        .collect()
}

/// Image reference of the most probable candidate; ties go to the lowest id.
pub fn select_highlight(result: &GroundingResult, scene: &Scene) -> Result<CluePayload, ClueError> {
    let (id, _) = result
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
        .ok_or(ClueError::EmptyGrounding)?;
    let obj = scene.object(id).ok_or(ClueError::UnknownObject(id))?;
    let image = obj.image_ref.clone().ok_or(ClueError::MissingImage(id))?;
    Ok(CluePayload::highlight(Some(image)))
}

/// Finds the single trigger token a prefix ends at.
pub fn prefix_trigger(prefix: &str) -> Result<ClueKind, ClueError> {
    let found: Vec<ClueKind> = ClueKind::ALL
        .into_iter()
        .flat_map(|k| std::iter::repeat_n(k, prefix.matches(k.trigger()).count()))
        .collect();
    match found.as_slice() {
        [] => Err(ClueError::MalformedPrefix("no trigger token".into())),
        [kind] if prefix.trim_end().ends_with(kind.trigger()) => Ok(*kind),
        [kind] => Err(ClueError::MalformedPrefix(format!(
            "text follows the trigger {}",
            kind.trigger()
        ))),
        _ => Err(ClueError::MalformedPrefix(format!("{} trigger tokens", found.len()))),
    }
}

/// Renders the payload requested by the trigger at the end of `prefix`.
pub fn build_clue(
    prefix: &str,
    grounding: &GroundingResult,
    scene: &Scene,
    sit: &AgentSituation,
    cap: usize,
) -> Result<CluePayload, ClueError> {
    let kind = prefix_trigger(prefix)?;
    if kind == ClueKind::HighlightObj {
        return select_highlight(grounding, scene);
    }
    // the grammar has no spelling for an empty list
    if grounding.is_empty() {
        return Err(ClueError::EmptyGrounding);
    }
    let objects = grounding
        .candidates
        .iter()
        .map(|&id| scene.object(id).ok_or(ClueError::UnknownObject(id)))
        .collect::<Result<Vec<_>, _>>()?;
    let labels: Vec<&str> = objects.iter().map(|o| o.label.as_str()).collect();
    let text = match kind {
        ClueKind::ObjProb => format_obj_prob(&labels, &grounding.probs, cap)?,
        ClueKind::ObjLocProb => {
            let boxes: Vec<AgentFrameBox> = objects.iter().map(|o| relative_obb(sit, o)).collect();
            format_obj_loc_prob(&labels, &boxes, &grounding.probs, cap)?
        }
        ClueKind::ObjLocPlrProb => {
            let polars = objects
                .iter()
                .map(|o| {
                    let c = object_centroid(o);
                    signed_polar(sit, [c[0], c[1]]).map_err(|e| ClueError::Degenerate(o.id, e))
                })
                .collect::<Result<Vec<_>, _>>()?;
            format_obj_loc_plr_prob(&labels, &polars, &grounding.probs, cap)?
        }
        ClueKind::HighlightObj => unreachable!(),
    };
    Ok(CluePayload::textual(kind, text))
}
