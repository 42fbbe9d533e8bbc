//! Egocentric geometry around a situated agent.
//!
//! Angles are measured in the horizontal plane from the facing direction.
//! Signed angles are positive counterclockwise (to the agent's left); the
//! clockwise angle used for clock hours runs the other way in `[0, 360)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::question::{DirectionCue, DistanceCue, QueryScope};
use crate::scene::{object_aabb, object_centroid, AgentSituation, ObjectInstance, Scene, Vec2, Vec3};

/// Planar offsets at or below this length have no defined direction.
pub const DEGENERATE_DISTANCE_M: f64 = 1e-6;

/// Unsigned angle below which a target is in front.
pub const FRONT_LIMIT_DEG: f64 = 30.0;
/// Unsigned angle above which a target is behind.
pub const BACK_LIMIT_DEG: f64 = 150.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("target coincides with the standing point; direction is undefined")]
pub struct DegenerateDirection;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarCoordinate {
    /// Signed degrees in (-180, 180]; positive to the left.
    pub angle_deg: f64,
    pub distance_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CardinalLabel {
    Front,
    Back,
    Left,
    Right,
}

impl CardinalLabel {
    /// Order doubles as the plurality tie-break.
    pub const ALL: [CardinalLabel; 4] = [Self::Front, Self::Back, Self::Left, Self::Right];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Front => "front",
            Self::Back => "back",
            Self::Left => "left",
            Self::Right => "right",
        }
    }
}

impl std::fmt::Display for CardinalLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How an object with point samples is assigned a cardinal label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CardinalPolicy {
    #[default]
    Centroid,
    PointMajority,
}

impl std::str::FromStr for CardinalPolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "centroid" => Ok(Self::Centroid),
            "point_majority" => Ok(Self::PointMajority),
            other => Err(format!("unknown cardinal policy {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DistanceThresholds {
    pub near_m: f64,
    pub far_m: f64,
}

impl Default for DistanceThresholds {
    fn default() -> Self {
        Self {
            near_m: 1.0,
            far_m: 3.0,
        }
    }
}

/// Box expressed in the agent frame: x to the right, y along facing, z up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentFrameBox {
    pub center: Vec3,
    pub size: Vec3,
}

/// Unit vector pointing to the agent's right.
fn right_of(facing: Vec2) -> Vec2 {
    [facing[1], -facing[0]]
}

/// Planar offset from the standing point, its length, and the cross/dot with facing.
struct PlanarRelation {
    distance: f64,
    cross: f64,
    dot: f64,
}

fn relate(sit: &AgentSituation, target: Vec2) -> Result<PlanarRelation, DegenerateDirection> {
    let dx = target[0] - sit.position[0];
    let dy = target[1] - sit.position[1];
    let distance = dx.hypot(dy);
    if !(distance > DEGENERATE_DISTANCE_M) {
        return Err(DegenerateDirection);
    }
    let [fx, fy] = sit.facing;
    Ok(PlanarRelation {
        distance,
        cross: fx * dy - fy * dx,
        dot: fx * dx + fy * dy,
    })
}

pub fn signed_polar(sit: &AgentSituation, target: Vec2) -> Result<PolarCoordinate, DegenerateDirection> {
    let rel = relate(sit, target)?;
    let mut angle = rel.cross.atan2(rel.dot).to_degrees();
    if angle <= -180.0 {
        angle = 180.0;
    }
    if angle == 0.0 {
        angle = 0.0; // drop the sign of -0.0
    }
    Ok(PolarCoordinate {
        angle_deg: angle,
        distance_m: rel.distance,
    })
}

fn centroid_2d(obj: &ObjectInstance) -> Vec2 {
    let c = object_centroid(obj);
    [c[0], c[1]]
}

/// Clockwise angle in `[0, 360)` from facing to `target`.
pub fn clockwise_angle(sit: &AgentSituation, target: Vec2) -> Result<f64, DegenerateDirection> {
    let polar = signed_polar(sit, target)?;
    let mut cw = -polar.angle_deg;
    if cw < 0.0 {
        cw += 360.0;
    }
    if cw >= 360.0 {
        cw -= 360.0;
    }
    Ok(if cw == 0.0 { 0.0 } else { cw })
}

/// Nearest clock hour for a clockwise angle; 0 maps to 12 and ties round up.
pub fn hour_of(cw_angle_deg: f64) -> u8 {
    let hour = (cw_angle_deg / 30.0 + 0.5).floor() as i64;
    match hour.rem_euclid(12) {
        0 => 12,
        h => h as u8,
    }
}

pub fn clock_direction(sit: &AgentSituation, obj: &ObjectInstance) -> Result<(u8, f64), DegenerateDirection> {
    let cw = clockwise_angle(sit, centroid_2d(obj))?;
    Ok((hour_of(cw), cw))
}

/// Cardinal label of a single planar point.
pub fn cardinal_of_point(sit: &AgentSituation, target: Vec2) -> Result<CardinalLabel, DegenerateDirection> {
    let rel = relate(sit, target)?;
    let angle = rel.cross.atan2(rel.dot).abs().to_degrees();
    Ok(if angle < FRONT_LIMIT_DEG {
        CardinalLabel::Front
    } else if angle > BACK_LIMIT_DEG {
        CardinalLabel::Back
    } else if rel.cross > 0.0 {
        CardinalLabel::Left
    } else {
        CardinalLabel::Right
    })
}

pub fn cardinal_direction(
    sit: &AgentSituation,
    obj: &ObjectInstance,
    policy: CardinalPolicy,
) -> Result<CardinalLabel, DegenerateDirection> {
    match (policy, obj.points.as_deref()) {
        (CardinalPolicy::PointMajority, Some(points)) if !points.is_empty() => {
            let mut votes = [0usize; 4];
            for p in points {
                if let Ok(label) = cardinal_of_point(sit, [p[0], p[1]]) {
                    votes[label as usize] += 1;
                }
            }
            let best = *votes.iter().max().unwrap();
            if best == 0 {
                return Err(DegenerateDirection);
            }
            // first maximum wins: front > back > left > right
            let idx = votes.iter().position(|&v| v == best).unwrap();
            Ok(CardinalLabel::ALL[idx])
        }
        _ => cardinal_of_point(sit, centroid_2d(obj)),
    }
}

pub fn distance_bucket(d_m: f64, thresholds: &DistanceThresholds) -> DistanceCue {
    if d_m <= thresholds.near_m {
        DistanceCue::Near
    } else if d_m <= thresholds.far_m {
        DistanceCue::Middle
    } else {
        DistanceCue::Far
    }
}

/// Planar distance from the standing point to the object centroid.
pub fn centroid_distance(sit: &AgentSituation, obj: &ObjectInstance) -> f64 {
    let c = centroid_2d(obj);
    (c[0] - sit.position[0]).hypot(c[1] - sit.position[1])
}

/// Expresses a world-frame point in the agent frame.
pub fn to_agent_frame(sit: &AgentSituation, p: Vec3) -> Vec3 {
    let d = [
        p[0] - sit.position[0],
        p[1] - sit.position[1],
        p[2] - sit.position[2],
    ];
    let right = right_of(sit.facing);
    [
        d[0] * right[0] + d[1] * right[1],
        d[0] * sit.facing[0] + d[1] * sit.facing[1],
        d[2],
    ]
}

pub fn relative_obb(sit: &AgentSituation, obj: &ObjectInstance) -> AgentFrameBox {
    let (center, size) = object_aabb(obj);
    AgentFrameBox {
        center: to_agent_frame(sit, center),
        size,
    }
}

/// Objects selected by a region query, sorted by id.
///
/// Whole-scene queries return everything. Directional queries keep objects whose
/// label or hour matches the cue; without a cue they take the union over all
/// directions, i.e. every non-degenerate object. A distance cue further restricts
/// directional queries by the centroid's bucket.
#[allow(clippy::too_many_arguments)]
pub fn region_filter<'s>(
    scene: &'s Scene,
    sit: &AgentSituation,
    scope: QueryScope,
    cue: Option<DirectionCue>,
    dist: Option<DistanceCue>,
    policy: CardinalPolicy,
    thresholds: &DistanceThresholds,
) -> Vec<&'s ObjectInstance> {
    let mut out: Vec<&ObjectInstance> = match scope {
        QueryScope::WholeScene => scene.objects.iter().collect(),
        QueryScope::Cardinal | QueryScope::Clockwise => scene
            .objects
            .iter()
            .filter(|obj| match cue {
                Some(DirectionCue::Cardinal { cardinal }) => {
                    cardinal_direction(sit, obj, policy) == Ok(cardinal)
                }
                Some(DirectionCue::Clockwise { hour }) => {
                    clock_direction(sit, obj).map(|(h, _)| h) == Ok(hour)
                }
                None => signed_polar(sit, centroid_2d(obj)).is_ok(),
            })
            .filter(|obj| match dist {
                Some(bucket) => distance_bucket(centroid_distance(sit, obj), thresholds) == bucket,
                None => true,
            })
            .collect(),
    };
    out.sort_by_key(|o| o.id);
    out
}

/// Objects grouped by cardinal label; degenerate objects are listed separately.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CardinalPartition {
    pub front: Vec<u32>,
    pub back: Vec<u32>,
    pub left: Vec<u32>,
    pub right: Vec<u32>,
    pub degenerate: Vec<u32>,
}

impl CardinalPartition {
    pub fn of(&self, label: CardinalLabel) -> &[u32] {
        match label {
            CardinalLabel::Front => &self.front,
            CardinalLabel::Back => &self.back,
            CardinalLabel::Left => &self.left,
            CardinalLabel::Right => &self.right,
        }
    }
}

pub fn partition_cardinal(scene: &Scene, sit: &AgentSituation, policy: CardinalPolicy) -> CardinalPartition {
    let mut part = CardinalPartition::default();
    let mut objects: Vec<&ObjectInstance> = scene.objects.iter().collect();
    objects.sort_by_key(|o| o.id);
    for obj in objects {
        let bin = match cardinal_direction(sit, obj, policy) {
            Ok(CardinalLabel::Front) => &mut part.front,
            Ok(CardinalLabel::Back) => &mut part.back,
            Ok(CardinalLabel::Left) => &mut part.left,
            Ok(CardinalLabel::Right) => &mut part.right,
            Err(_) => &mut part.degenerate,
        };
        bin.push(obj.id);
    }
    part
}

#[cfg(test)]
mod tests {
    use super::*;

    fn north() -> AgentSituation {
        AgentSituation::new([0.0; 3], [0.0, 1.0]).unwrap()
    }

    fn at(id: u32, x: f64, y: f64) -> ObjectInstance {
        ObjectInstance::new(id, "thing", [x, y, 0.5], [0.2, 0.2, 0.2])
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn polar_east_is_minus_ninety() {
        let p = signed_polar(&north(), [1.0, 0.0]).unwrap();
        assert!(close(p.angle_deg, -90.0, 1e-12) && close(p.distance_m, 1.0, 1e-12));
        let p = signed_polar(&north(), [0.0, 2.0]).unwrap();
        assert_eq!(p.angle_deg, 0.0);
        assert!(close(p.distance_m, 2.0, 1e-12));
        let behind = signed_polar(&north(), [0.0, -1.0]).unwrap();
        assert_eq!(behind.angle_deg, 180.0);
    }

    #[test]
    fn polar_reproduces_door_clue() {
        // door sits at (-86.1 deg, 1.9 m) from an agent at (2, -1) facing +x
        let sit = AgentSituation::new([2.0, -1.0, 0.0], [1.0, 0.0]).unwrap();
        let yaw = (-86.1f64).to_radians();
        let target = [2.0 + 1.9 * yaw.cos(), -1.0 + 1.9 * yaw.sin()];
        let p = signed_polar(&sit, target).unwrap();
        assert!(close(p.angle_deg, -86.1, 1e-9));
        assert!(close(p.distance_m, 1.9, 1e-9));
    }

    #[test]
    fn degenerate_target_is_error() {
        assert_eq!(signed_polar(&north(), [0.0, 0.0]), Err(DegenerateDirection));
        assert!(clock_direction(&north(), &at(0, 0.0, 0.0)).is_err());
        assert!(cardinal_direction(&north(), &at(0, 0.0, 0.0), CardinalPolicy::Centroid).is_err());
    }

    #[test]
    fn clock_hours_on_axes() {
        assert_eq!(clock_direction(&north(), &at(0, 1.0, 0.0)).unwrap().0, 3);
        assert_eq!(clock_direction(&north(), &at(0, -1.0, 0.0)).unwrap().0, 9);
        let (hour, cw) = clock_direction(&north(), &at(0, 0.0, 3.0)).unwrap();
        assert_eq!((hour, cw), (12, 0.0));
        assert_eq!(clock_direction(&north(), &at(0, 0.0, -3.0)).unwrap().0, 6);
    }

    #[test]
    fn hour_ties_round_up() {
        assert_eq!(hour_of(15.0), 1);
        assert_eq!(hour_of(14.999), 12);
        assert_eq!(hour_of(45.0), 2);
        assert_eq!(hour_of(345.0), 12);
        assert_eq!(hour_of(344.999), 11);
        assert_eq!(hour_of(359.9), 12);
    }

    #[test]
    fn cardinal_masks() {
        let sit = north();
        let deg = |a: f64| [-(a.to_radians().sin()), a.to_radians().cos()];
        // 20 degrees to either side is front
        let left20 = deg(20.0);
        assert_eq!(cardinal_of_point(&sit, left20), Ok(CardinalLabel::Front));
        assert_eq!(cardinal_of_point(&sit, [-left20[0], left20[1]]), Ok(CardinalLabel::Front));
        assert_eq!(cardinal_of_point(&sit, deg(160.0)), Ok(CardinalLabel::Back));
        assert_eq!(cardinal_of_point(&sit, [1.0, 0.0]), Ok(CardinalLabel::Right));
        assert_eq!(cardinal_of_point(&sit, [-1.0, 0.0]), Ok(CardinalLabel::Left));
    }

    #[test]
    fn exact_boundaries_fall_to_the_side() {
        let sit = north();
        // exactly 30 and 150 degrees from facing (constructed with exact trig values)
        let s3 = 3f64.sqrt();
        assert_eq!(cardinal_of_point(&sit, [1.0, s3]), Ok(CardinalLabel::Right));
        assert_eq!(cardinal_of_point(&sit, [-1.0, -s3]), Ok(CardinalLabel::Left));
    }

    #[test]
    fn point_majority_votes_and_breaks_ties() {
        let sit = north();
        let obj = ObjectInstance::new(1, "sofa", [0.5, 0.5, 0.0], [4.0, 4.0, 1.0])
            .with_points(vec![[1.0, 0.0, 0.0], [1.0, 0.1, 0.0], [0.0, 1.0, 0.0]]);
        assert_eq!(cardinal_direction(&sit, &obj, CardinalPolicy::PointMajority), Ok(CardinalLabel::Right));
        let tie = ObjectInstance::new(2, "sofa", [0.0, 0.0, 0.0], [4.0, 4.0, 1.0])
            .with_points(vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]);
        assert_eq!(cardinal_direction(&sit, &tie, CardinalPolicy::PointMajority), Ok(CardinalLabel::Left));
        let tie_front = ObjectInstance::new(3, "sofa", [0.0, 0.0, 0.0], [4.0, 4.0, 1.0])
            .with_points(vec![[0.0, -1.0, 0.0], [0.0, 1.0, 0.0]]);
        assert_eq!(
            cardinal_direction(&sit, &tie_front, CardinalPolicy::PointMajority),
            Ok(CardinalLabel::Front)
        );
    }

    #[test]
    fn distance_buckets_default() {
        let t = DistanceThresholds::default();
        assert_eq!(distance_bucket(0.5, &t), DistanceCue::Near);
        assert_eq!(distance_bucket(1.0, &t), DistanceCue::Near);
        assert_eq!(distance_bucket(1.9, &t), DistanceCue::Middle);
        assert_eq!(distance_bucket(3.0, &t), DistanceCue::Middle);
        assert_eq!(distance_bucket(3.0 + 1e-12, &t), DistanceCue::Far);
    }

    #[test]
    fn relative_obb_rotates_into_agent_frame() {
        let obj = ObjectInstance::new(0, "box", [1.0, 2.0, 3.0], [0.1, 0.2, 0.3]);
        let b = relative_obb(&north(), &obj);
        assert_eq!(b.center, [1.0, 2.0, 3.0]);
        let east = AgentSituation::new([0.0; 3], [1.0, 0.0]).unwrap();
        let obj = ObjectInstance::new(0, "box", [1.0, 0.0, 0.0], [0.1, 0.2, 0.3]);
        let b = relative_obb(&east, &obj);
        assert!(close(b.center[0], 0.0, 1e-12) && close(b.center[1], 1.0, 1e-12));
        assert_eq!(b.size, [0.1, 0.2, 0.3]);
    }

    #[test]
    fn region_filter_hour_two() {
        let sit = north();
        // 60 degrees clockwise from north is 2 o'clock
        let a = 60f64.to_radians();
        let scene = Scene {
            scene_id: "s".into(),
            objects: vec![
                at(5, 2.0 * a.sin(), 2.0 * a.cos()).tap_label("door"),
                at(1, -2.0, 0.0),
                at(2, 0.0, -2.0),
                at(3, 0.0, 2.0),
            ],
        };
        let got = region_filter(
            &scene,
            &sit,
            QueryScope::Clockwise,
            Some(DirectionCue::Clockwise { hour: 2 }),
            None,
            CardinalPolicy::Centroid,
            &DistanceThresholds::default(),
        );
        assert_eq!(got.iter().map(|o| o.id).collect::<Vec<_>>(), vec![5]);
        let whole = region_filter(
            &scene,
            &sit,
            QueryScope::WholeScene,
            None,
            None,
            CardinalPolicy::Centroid,
            &DistanceThresholds::default(),
        );
        assert_eq!(whole.iter().map(|o| o.id).collect::<Vec<_>>(), vec![1, 2, 3, 5]);
    }

    #[test]
    fn region_filter_union_skips_degenerate() {
        let scene = Scene {
            scene_id: "s".into(),
            objects: vec![at(0, 0.0, 0.0), at(1, 1.0, 1.0), at(2, -2.0, 5.0)],
        };
        let got = region_filter(
            &scene,
            &north(),
            QueryScope::Cardinal,
            None,
            None,
            CardinalPolicy::Centroid,
            &DistanceThresholds::default(),
        );
        assert_eq!(got.iter().map(|o| o.id).collect::<Vec<_>>(), vec![1, 2]);
        let near = region_filter(
            &scene,
            &north(),
            QueryScope::Cardinal,
            None,
            Some(DistanceCue::Far),
            CardinalPolicy::Centroid,
            &DistanceThresholds::default(),
        );
        assert_eq!(near.iter().map(|o| o.id).collect::<Vec<_>>(), vec![2]);
    }

    trait TapLabel {
        fn tap_label(self, l: &str) -> Self;
    }
    impl TapLabel for ObjectInstance {
        fn tap_label(mut self, l: &str) -> Self {
            self.label = l.into();
            self
        }
    }
}
