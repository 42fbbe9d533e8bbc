//! Scene metadata: labeled axis-aligned objects and the agent's situation.
//!
//! World frame is z-up and right-handed. Planar geometry only looks at `(x, y)`.

use std::collections::HashSet;
use std::fmt;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vec3 = [f64; 3];
pub type Vec2 = [f64; 2];

/// Characters that would make a label ambiguous inside rendered clue payloads or trace tags.
const RESERVED_LABEL_CHARS: &[char] = &[':', ';', ',', '<', '>', '[', ']'];

/// How far a point sample may stray from its box, as a multiple of the half extent.
const POINT_CONTAINMENT_SLACK: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectInstance {
    pub id: u32,
    pub label: String,
    pub center: Vec3,
    pub size: Vec3,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec3>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_ref: Option<String>,
}

impl ObjectInstance {
    pub fn new(id: u32, label: &str, center: Vec3, size: Vec3) -> Self {
        Self {
            id,
            label: normalize_label(label),
            center,
            size,
            points: None,
            image_ref: None,
        }
    }

    pub fn with_points(mut self, points: Vec<Vec3>) -> Self {
        self.points = Some(points);
        self
    }

    pub fn with_image(mut self, image_ref: impl Into<String>) -> Self {
        self.image_ref = Some(image_ref.into());
        self
    }

    /// Rigidly shifts the object (center and any point samples) by `offset`.
    pub fn translated(&self, offset: Vec3) -> Self {
        let mut out = self.clone();
        out.center = add(self.center, offset);
        if let Some(points) = out.points.as_mut() {
            for p in points.iter_mut() {
                *p = add(*p, offset);
            }
        }
        out
    }
}

/// Mean of the point samples when present, else the stored box center.
pub fn object_centroid(obj: &ObjectInstance) -> Vec3 {
    match obj.points.as_deref() {
        Some(points) if !points.is_empty() => {
            let n = points.len() as f64;
            let mut sum = [0.0; 3];
            for p in points {
                for axis in 0..3 {
                    sum[axis] += p[axis];
                }
            }
            [sum[0] / n, sum[1] / n, sum[2] / n]
        }
        _ => obj.center,
    }
}

/// World-frame axis-aligned box as `(center, size)`: the tight box of the points when
/// present, else the stored box.
pub fn object_aabb(obj: &ObjectInstance) -> (Vec3, Vec3) {
    match obj.points.as_deref() {
        Some(points) if !points.is_empty() => {
            let mut lo = [f64::INFINITY; 3];
            let mut hi = [f64::NEG_INFINITY; 3];
            for p in points {
                for axis in 0..3 {
                    lo[axis] = lo[axis].min(p[axis]);
                    hi[axis] = hi[axis].max(p[axis]);
                }
            }
            let center = [
                (lo[0] + hi[0]) / 2.0,
                (lo[1] + hi[1]) / 2.0,
                (lo[2] + hi[2]) / 2.0,
            ];
            (center, [hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]])
        }
        _ => (obj.center, obj.size),
    }
}

/// Standing point plus a unit facing direction in the horizontal plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AgentSituation {
    pub position: Vec3,
    pub facing: Vec2,
}

impl AgentSituation {
    pub fn new(position: Vec3, facing: Vec2) -> Result<Self, SceneError> {
        let norm = facing[0].hypot(facing[1]);
        if !(norm > 1e-9) || !norm.is_finite() || position.iter().any(|c| !c.is_finite()) {
            return Err(SceneError::DegenerateFacing(facing));
        }
        Ok(Self {
            position,
            facing: [facing[0] / norm, facing[1] / norm],
        })
    }

    /// Facing given as a yaw angle in radians, counterclockwise from +x.
    pub fn from_yaw(position: Vec3, yaw: f64) -> Result<Self, SceneError> {
        Self::new(position, [yaw.cos(), yaw.sin()])
    }

    pub fn planar_position(&self) -> Vec2 {
        [self.position[0], self.position[1]]
    }
}

impl<'de> Deserialize<'de> for AgentSituation {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            position: Vec3,
            facing: Vec2,
        }
        let raw = Raw::deserialize(de)?;
        AgentSituation::new(raw.position, raw.facing).map_err(serde::de::Error::custom)
    }
}

impl std::str::FromStr for AgentSituation {
    type Err = SceneError;

    /// Parses `"px,py,pz;fx,fy"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SceneError::BadSituation(s.to_string());
        let (pos, face) = s.split_once(';').ok_or_else(bad)?;
        let nums = |part: &str| -> Result<Vec<f64>, SceneError> {
            part.split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|_| bad()))
                .collect()
        };
        let pos = nums(pos)?;
        let face = nums(face)?;
        if pos.len() != 3 || face.len() != 2 {
            return Err(bad());
        }
        AgentSituation::new([pos[0], pos[1], pos[2]], [face[0], face[1]])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub scene_id: String,
    pub objects: Vec<ObjectInstance>,
}

impl Scene {
    pub fn object(&self, id: u32) -> Option<&ObjectInstance> {
        self.objects.iter().find(|o| o.id == id)
    }

    /// Sorted, de-duplicated label vocabulary.
    pub fn labels(&self) -> Vec<&str> {
        let mut labels: Vec<&str> = self.objects.iter().map(|o| o.label.as_str()).collect();
        labels.sort_unstable();
        labels.dedup();
        labels
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("scene serialization is infallible")
    }
}

/// One broken invariant. `id` is `None` for scene-level rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub id: Option<u32>,
    pub field: &'static str,
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.id {
            Some(id) => write!(f, "object {id}: {}: {}", self.field, self.rule),
            None => write!(f, "scene: {}: {}", self.field, self.rule),
        }
    }
}

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("malformed scene JSON at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("invalid scene: {}", .0.first().map(ToString::to_string).unwrap_or_default())]
    Validation(Vec<Violation>),
    #[error("facing direction {0:?} has (near) zero length")]
    DegenerateFacing(Vec2),
    #[error("cannot parse situation {0:?}, expected \"px,py,pz;fx,fy\"")]
    BadSituation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Lowercase, trimmed, internal whitespace collapsed.
pub fn normalize_label(label: &str) -> String {
    label
        .split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn validate_scene(scene: &Scene) -> Vec<Violation> {
    let mut out = Vec::new();
    if scene.objects.is_empty() {
        out.push(Violation {
            id: None,
            field: "objects",
            rule: "scene must contain at least one object".into(),
        });
    }
    let mut seen = HashSet::new();
    for obj in &scene.objects {
        let id = Some(obj.id);
        if !seen.insert(obj.id) {
            out.push(Violation {
                id,
                field: "id",
                rule: format!("duplicate id {}", obj.id),
            });
        }
        if obj.label.is_empty() {
            out.push(Violation {
                id,
                field: "label",
                rule: "label is empty".into(),
            });
        } else if obj.label.contains(RESERVED_LABEL_CHARS) {
            out.push(Violation {
                id,
                field: "label",
                rule: format!("label {:?} contains a reserved character", obj.label),
            });
        }
        if obj.center.iter().any(|c| !c.is_finite()) {
            out.push(Violation {
                id,
                field: "center",
                rule: "center must be finite".into(),
            });
        }
        if obj.size.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            out.push(Violation {
                id,
                field: "size",
                rule: format!("size components must be > 0, got {:?}", obj.size),
            });
        }
        if let Some(points) = &obj.points {
            if points.is_empty() {
                out.push(Violation {
                    id,
                    field: "points",
                    rule: "points present but empty".into(),
                });
            }
            let outside = points.iter().filter(|p| !loosely_contained(obj, p)).count();
            if outside > 0 {
                out.push(Violation {
                    id,
                    field: "points",
                    rule: format!(
                        "{outside} point(s) outside center \u{b1} {POINT_CONTAINMENT_SLACK} \u{d7} size/2"
                    ),
                });
            }
        }
    }
    out
}

fn loosely_contained(obj: &ObjectInstance, p: &Vec3) -> bool {
    (0..3).all(|axis| {
        p[axis].is_finite()
            && (p[axis] - obj.center[axis]).abs() <= POINT_CONTAINMENT_SLACK * obj.size[axis] / 2.0
    })
}

/// Parses and validates one scene document. Labels are normalized before validation.
pub fn parse_scene(text: &str) -> Result<Scene, SceneError> {
    let mut scene: Scene = serde_json::from_str(text).map_err(|e| SceneError::Parse {
        offset: byte_offset(text, e.line(), e.column()),
        message: e.to_string(),
    })?;
    for obj in &mut scene.objects {
        obj.label = normalize_label(&obj.label);
    }
    let violations = validate_scene(&scene);
    if violations.is_empty() {
        Ok(scene)
    } else {
        Err(SceneError::Validation(violations))
    }
}

pub fn load_scene<R: Read>(mut source: R) -> Result<Scene, SceneError> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    parse_scene(&text)
}

pub fn load_scene_path(path: impl AsRef<Path>) -> Result<Scene, SceneError> {
    parse_scene(&std::fs::read_to_string(path)?)
}

/// serde_json reports 1-based line and column; column counts bytes within the line.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let line_start: usize = text
        .split_inclusive('\n')
        .take(line - 1)
        .map(str::len)
        .sum();
    (line_start + column.saturating_sub(1)).min(text.len())
}

pub(crate) fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}
