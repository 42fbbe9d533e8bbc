//! Synthetic scenes and QA records with gold answers, for benchmarks and tests.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::clue::{fmt_coord, LocEntry};
use crate::config::ForgeConfig;
use crate::lexicon::{indefinite_article, number_to_word, pluralize};
use crate::oracle::{spatial_relation, Synonyms};
use crate::pipeline::{extract_targets, region_ids, resolve, QaRecord};
use crate::question::{DirectionCue, TaskType};
use crate::rng::{stream, substream, Domain};
use crate::scene::{object_centroid, AgentSituation, ObjectInstance, Scene};
use crate::spatial::{
    cardinal_direction, clock_direction, relative_obb, signed_polar, AgentFrameBox, CardinalLabel, PolarCoordinate,
};

pub const VOCABULARY: [&str; 20] = [
    "chair", "table", "pillow", "lamp", "door", "cabinet", "file cabinet", "trash can", "book", "monitor", "sofa",
    "bed", "shelf", "window", "plant", "box", "towel", "sink", "picture", "keyboard",
];

const COLORS: [&str; 6] = ["red", "brown", "white", "black", "blue", "green"];

/// Tasks the generator can produce.
pub const SYNTH_TASKS: [TaskType; 6] = [
    TaskType::Counting,
    TaskType::Existence,
    TaskType::Refer,
    TaskType::Navigation,
    TaskType::SpatialRelationship,
    TaskType::Attribute,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthOptions {
    pub seed: u64,
    pub min_objects: usize,
    pub max_objects: usize,
    /// Half the side of the square room, in metres.
    pub half_extent_m: f64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            min_objects: 12,
            max_objects: 28,
            half_extent_m: 5.0,
        }
    }
}

fn round_to(x: f64, step: f64) -> f64 {
    (x / step).round() * step
}

fn random_object(rng: &mut ChaCha8Rng, id: u32, label: &str, scene_id: &str, half: f64) -> ObjectInstance {
    let size = [
        round_to(rng.gen_range(0.2..1.6), 0.01),
        round_to(rng.gen_range(0.2..1.6), 0.01),
        round_to(rng.gen_range(0.1..2.0), 0.01),
    ];
    let center = [
        round_to(rng.gen_range(-half..half), 0.01),
        round_to(rng.gen_range(-half..half), 0.01),
        round_to(size[2] / 2.0 + if rng.gen_bool(0.2) { rng.gen_range(0.3..1.2) } else { 0.0 }, 0.01),
    ];
    let mut obj = ObjectInstance::new(id, label, center, size).with_image(format!("images/{scene_id}/{id}.jpg"));
    if rng.gen_bool(0.3) {
        let points = (0..rng.gen_range(3..9))
            .map(|_| {
                let mut p = center;
                for k in 0..3 {
                    p[k] += rng.gen_range(-0.5..0.5) * size[k];
                }
                p
            })
            .collect();
        obj = obj.with_points(points);
    }
    obj
}

/// One random room; label multiplicities vary so counting has something to count.
pub fn synth_scene(index: u64, opts: &SynthOptions) -> Scene {
    let mut rng = stream(opts.seed, Domain::Synthesis, index);
    let scene_id = format!("synth{index:05}");
    let n = rng.gen_range(opts.min_objects..=opts.max_objects);
    let palette: Vec<&str> = VOCABULARY.choose_multiple(&mut rng, 12).copied().collect();
    let objects = (0..n as u32)
        .map(|id| {
            // a skewed pick repeats the first few labels
            let label = palette[rng.gen_range(0..palette.len()).min(rng.gen_range(0..palette.len()))];
            random_object(&mut rng, id, label, &scene_id, opts.half_extent_m)
        })
        .collect();
    Scene { scene_id, objects }
}

pub fn synth_scenes(count: usize, opts: &SynthOptions) -> Vec<Scene> {
    (0..count as u64).map(|i| synth_scene(i, opts)).collect()
}

fn cardinal_phrase(c: CardinalLabel) -> &'static str {
    match c {
        CardinalLabel::Front => "in front of you",
        CardinalLabel::Back => "behind you",
        CardinalLabel::Left => "on your left",
        CardinalLabel::Right => "on your right",
    }
}

fn cue_phrase(cue: DirectionCue) -> String {
    match cue {
        DirectionCue::Cardinal { cardinal } => cardinal_phrase(cardinal).to_string(),
        DirectionCue::Clockwise { hour } => format!("at your {hour} o'clock"),
    }
}

fn random_cue(rng: &mut ChaCha8Rng) -> DirectionCue {
    if rng.gen_bool(0.5) {
        DirectionCue::Cardinal {
            cardinal: *CardinalLabel::ALL.choose(rng).unwrap(),
        }
    } else {
        DirectionCue::Clockwise {
            hour: rng.gen_range(1..=12),
        }
    }
}

/// A situation sentence that names a direction of its own, to be ignored.
fn distractor(rng: &mut ChaCha8Rng, scene: &Scene) -> String {
    if rng.gen_bool(0.5) {
        return String::new();
    }
    let label = &scene.objects[rng.gen_range(0..scene.objects.len())].label;
    let cue = random_cue(rng);
    format!("There is {} {label} {}. ", indefinite_article(label), cue_phrase(cue))
}

fn unique_labels(scene: &Scene) -> Vec<&str> {
    scene
        .labels()
        .into_iter()
        .filter(|l| scene.objects.iter().filter(|o| o.label == *l).count() == 1)
        .collect()
}

fn contains_word(haystack: &str, needle: &str) -> bool {
    format!(" {haystack} ").contains(&format!(" {needle} "))
}

/// Rounds a value the way the clue text does, then reads it back.
fn rendered(x: f64) -> f64 {
    fmt_coord(x).parse().expect("formatted number parses")
}

fn rendered_box(b: AgentFrameBox) -> AgentFrameBox {
    AgentFrameBox {
        center: b.center.map(rendered),
        size: b.size.map(rendered),
    }
}

/// Gold navigation answer for a rendered polar coordinate.
fn navigation_gold(polar: PolarCoordinate, cfg: &ForgeConfig) -> String {
    let a = polar.angle_deg;
    let turn = if a.abs() <= 45.0 {
        "go straight"
    } else if a > 135.0 || a < -135.0 {
        "turn around"
    } else if a > 0.0 {
        "turn left"
    } else {
        "turn right"
    };
    let d = polar.distance_m;
    let bucket = if d <= cfg.distance.near_m {
        "near"
    } else if d <= cfg.distance.far_m {
        "middle"
    } else {
        "far"
    };
    format!("{turn} and walk to the {bucket} distance.")
}

fn base_record(scene: &Scene, sit: AgentSituation, question: String) -> QaRecord {
    QaRecord {
        scene_id: scene.scene_id.clone(),
        question,
        gold_answer: String::new(),
        task_type: None,
        target_ids: vec![],
        situation: sit,
        direction_cue: None,
        distance_cue: None,
        category: None,
        anchor_category: None,
    }
}

/// Generates one record of `task`, or `None` when the scene cannot support it
/// from the drawn situation.
pub fn synth_record(
    scene: &Scene,
    task: TaskType,
    rng: &mut ChaCha8Rng,
    cfg: &ForgeConfig,
) -> Option<QaRecord> {
    let half = scene
        .objects
        .iter()
        .map(|o| o.center[0].abs().max(o.center[1].abs()))
        .fold(1.0, f64::max);
    let sit = AgentSituation::from_yaw(
        [rng.gen_range(-half..half), rng.gen_range(-half..half), 0.0],
        rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
    )
    .ok()?;
    let prefix = distractor(rng, scene);
    let synonyms = Synonyms::default();
    let labels = scene.labels();
    let mut qa = match task {
        TaskType::Counting => {
            let label = labels[rng.gen_range(0..labels.len())];
            let cue = random_cue(rng);
            let dist = match rng.gen_range(0..4) {
                0 => " in the near distance",
                1 => " in the middle distance",
                2 => " in the far distance",
                _ => "",
            };
            let mut qa = base_record(
                scene,
                sit,
                format!("{prefix}How many {} are {}{dist}?", pluralize(label), cue_phrase(cue)),
            );
            let n = extract_targets(scene, &qa, cfg, &synonyms).ok()?.len();
            // an empty region has no clue to show
            let resolved = resolve(scene, &qa).ok()?;
            let region = region_ids(scene, &sit, &resolved, cfg);
            if region.is_empty() {
                return None;
            }
            qa.gold_answer = number_to_word(n as u64);
            qa
        }
        TaskType::Existence => {
            let present = rng.gen_bool(0.5);
            let label = if present {
                labels[rng.gen_range(0..labels.len())]
            } else {
                let absent: Vec<&str> = VOCABULARY
                    .iter()
                    .copied()
                    .filter(|v| !labels.iter().any(|l| contains_word(v, l) || contains_word(l, v)))
                    .collect();
                *absent.choose(rng)?
            };
            let mut qa = base_record(
                scene,
                sit,
                format!("{prefix}Is there {} {label} in the room?", indefinite_article(label)),
            );
            qa.gold_answer = if present { "yes" } else { "no" }.into();
            qa
        }
        TaskType::Refer => {
            let obj = scene.objects.choose(rng)?;
            let cue = if rng.gen_bool(0.5) {
                DirectionCue::Clockwise {
                    hour: clock_direction(&sit, obj).ok()?.0,
                }
            } else {
                DirectionCue::Cardinal {
                    cardinal: cardinal_direction(&sit, obj, cfg.policy).ok()?,
                }
            };
            let mut qa = base_record(scene, sit, format!("{prefix}What object is {}?", cue_phrase(cue)));
            qa.target_ids = vec![obj.id];
            qa.gold_answer = obj.label.clone();
            qa
        }
        TaskType::Navigation => {
            let label = *unique_labels(scene).choose(rng)?;
            let obj = scene.objects.iter().find(|o| o.label == label)?;
            let c = object_centroid(obj);
            let polar = signed_polar(&sit, [c[0], c[1]]).ok()?;
            let shown = PolarCoordinate {
                angle_deg: rendered(polar.angle_deg),
                distance_m: rendered(polar.distance_m),
            };
            let mut qa = base_record(scene, sit, format!("{prefix}How can I get to the {label} from here?"));
            qa.gold_answer = navigation_gold(shown, cfg);
            qa
        }
        TaskType::SpatialRelationship => {
            let unique = unique_labels(scene);
            let subject = *unique.choose(rng)?;
            let anchors: Vec<&str> = unique
                .iter()
                .copied()
                .filter(|l| !contains_word(l, subject) && !contains_word(subject, l))
                .collect();
            let anchor = *anchors.choose(rng)?;
            let entry = |label: &str| -> Option<LocEntry> {
                let obj = scene.objects.iter().find(|o| o.label == label)?;
                Some(LocEntry {
                    label: label.to_string(),
                    bbox: rendered_box(relative_obb(&sit, obj)),
                    prob: 1.0,
                })
            };
            let relation = spatial_relation(&entry(subject)?, &entry(anchor)?, &cfg.spatial);
            let mut qa = base_record(
                scene,
                sit,
                format!("{prefix}Where is the {subject} in relation to the {anchor}?"),
            );
            qa.gold_answer = format!("The {subject} is {relation} the {anchor}.");
            qa
        }
        TaskType::Attribute => {
            let obj = scene.objects.choose(rng)?;
            let mut qa = base_record(scene, sit, format!("{prefix}What is the color of the {}?", obj.label));
            qa.target_ids = vec![obj.id];
            qa.gold_answer = COLORS.choose(rng)?.to_string();
            qa
        }
        _ => return None,
    };
    qa.task_type = Some(task);
    Some(qa)
}

/// `per_task` records for each task in `tasks`, cycling over `scenes`.
/// Records are interleaved by task so any prefix is mixed.
pub fn synth_dataset(
    scenes: &[Scene],
    tasks: &[TaskType],
    per_task: usize,
    seed: u64,
    cfg: &ForgeConfig,
) -> Vec<QaRecord> {
    let mut out = Vec::with_capacity(tasks.len() * per_task);
    for i in 0..per_task {
        for (t, &task) in tasks.iter().enumerate() {
            let mut attempt = 0u64;
            loop {
                let key = (i * tasks.len() + t) as u64;
                let mut rng = substream(seed, Domain::Synthesis, key, attempt);
                let scene = &scenes[((key + attempt) % scenes.len() as u64) as usize];
                if let Some(qa) = synth_record(scene, task, &mut rng, cfg) {
                    out.push(qa);
                    break;
                }
                attempt += 1;
                assert!(attempt < 1000, "cannot synthesize {task} records from these scenes");
            }
        }
    }
    out
}
