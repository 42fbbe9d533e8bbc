//! Metadata to grounded traces: record resolution, target extraction,
//! simulated grounding and trace generation.

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::LazyLock;

use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clue::{build_clue, ClueError, CluePayload};
use crate::config::ForgeConfig;
use crate::grounding::{
    assign_pseudo_probs, cap_object_list, inject_grounding_noise, inject_semantic_noise, GroundingError,
    GroundingResult, NoiseSpec,
};
use crate::lexicon::pluralize;
use crate::oracle::{match_label, Synonyms};
use crate::question::{
    classify_task, focus_sentence, parse_direction, parse_distance, query_scope, DirectionCue, DistanceCue,
    QueryScope, TaskType,
};
use crate::rng::{stream, Domain};
use crate::scene::{AgentSituation, Scene};
use crate::spatial::{region_filter, signed_polar};
use crate::trace::{
    mandated_clue, parse_trace, render_prefix, render_trace, templates, validate_trace, ReasoningTrace, TraceError,
    TraceRecord, TraceViolation,
};

/// One QA input line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaRecord {
    pub scene_id: String,
    pub question: String,
    #[serde(rename = "answer")]
    pub gold_answer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task_type: Option<TaskType>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub target_ids: Vec<u32>,
    pub situation: AgentSituation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction_cue: Option<DirectionCue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_cue: Option<DistanceCue>,
    /// Queried object category; extracted from the question when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    /// Second category of a spatial-relationship question.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor_category: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ForgeError {
    #[error("unknown scene {0:?}")]
    UnknownScene(String),
    #[error("extraction: {0}")]
    Extraction(String),
    #[error("record references object {0} which is not in the scene")]
    UnknownTarget(u32),
    #[error(transparent)]
    Grounding(#[from] GroundingError),
    #[error(transparent)]
    Clue(#[from] ClueError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("generated trace fails validation: {0}")]
    Invalid(String),
}

/// Noise applied while grounding a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum NoiseMode {
    #[default]
    #[serde(rename = "oracle")]
    Oracle,
    #[serde(rename = "se")]
    Semantic,
    #[serde(rename = "ge")]
    Grounding,
    #[serde(rename = "se+ge")]
    Both,
}

impl NoiseMode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Oracle => "oracle",
            Self::Semantic => "se",
            Self::Grounding => "ge",
            Self::Both => "se+ge",
        }
    }

    pub fn semantic(self) -> bool {
        matches!(self, Self::Semantic | Self::Both)
    }

    pub fn grounding(self) -> bool {
        matches!(self, Self::Grounding | Self::Both)
    }
}

impl std::str::FromStr for NoiseMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" | "oracle" => Ok(Self::Oracle),
            "se" => Ok(Self::Semantic),
            "ge" => Ok(Self::Grounding),
            "se+ge" | "ge+se" => Ok(Self::Both),
            other => Err(format!("unknown noise mode {other:?} (none|se|ge|se+ge)")),
        }
    }
}

/// Seed and noise settings shared by generation and evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunOptions {
    pub seed: u64,
    pub mode: NoiseMode,
    pub se_rate: f64,
    pub ge_rate: f64,
}

impl RunOptions {
    pub fn clean(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    /// Noise parameters for one record, keyed by its index.
    fn noise_for(&self, index: u64) -> NoiseSpec {
        NoiseSpec {
            se_rate: if self.mode.semantic() { self.se_rate } else { 0.0 },
            ge_rate: if self.mode.grounding() { self.ge_rate } else { 0.0 },
            seed: stream_seed(self.seed, index),
        }
    }
}

fn stream_seed(seed: u64, index: u64) -> u64 {
    use rand::RngCore;
    stream(seed, Domain::SemanticNoise, index).next_u64()
}

/// Scenes by id.
#[derive(Debug, Clone, Default)]
pub struct SceneIndex {
    scenes: HashMap<String, Scene>,
}

impl SceneIndex {
    pub fn new(scenes: impl IntoIterator<Item = Scene>) -> Self {
        Self {
            scenes: scenes.into_iter().map(|s| (s.scene_id.clone(), s)).collect(),
        }
    }

    pub fn get(&self, id: &str) -> Option<&Scene> {
        self.scenes.get(id)
    }

    pub fn len(&self) -> usize {
        self.scenes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenes.is_empty()
    }
}

/// Question analysis merged with whatever the record already states.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub task: TaskType,
    pub cue: Option<DirectionCue>,
    pub dist: Option<DistanceCue>,
    pub scope: QueryScope,
    pub category: Option<String>,
    pub anchor: Option<String>,
}

static EXISTENCE_NOUN_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\b(?:is|are) there (?:an?|any|some)? ?([a-z][a-z ]*?)(?: in| on| at| near| around| anywhere|\?|\.|$)")
        .unwrap()
});

/// Scene labels mentioned in the focus sentence, in order of appearance.
/// Longer labels win over labels they contain ("file cabinet" over "cabinet").
pub fn mentioned_labels(question: &str, vocabulary: &[&str]) -> Vec<String> {
    let text = format!(" {} ", focus_sentence(question).to_lowercase());
    let bytes = text.as_bytes();
    let boundary = |i: usize| !bytes[i].is_ascii_alphanumeric();
    let mut hits: Vec<(usize, usize, &str)> = Vec::new();
    for &label in vocabulary {
        for form in [label.to_string(), pluralize(label)] {
            for (start, m) in text.match_indices(form.as_str()) {
                let end = start + m.len();
                if start > 0 && boundary(start - 1) && end < bytes.len() && boundary(end) {
                    hits.push((start, end, label));
                }
            }
        }
    }
    hits.sort_by(|a, b| a.0.cmp(&b.0).then((b.1 - b.0).cmp(&(a.1 - a.0))));
    let mut out: Vec<String> = Vec::new();
    let mut covered = 0;
    for (start, end, label) in hits {
        if start < covered {
            continue;
        }
        covered = end;
        if !out.iter().any(|l| l == label) {
            out.push(label.to_string());
        }
    }
    out
}

pub fn resolve(scene: &Scene, qa: &QaRecord) -> Result<Resolved, ForgeError> {
    let task = qa.task_type.unwrap_or_else(|| classify_task(&qa.question));
    let cue = qa.direction_cue.or_else(|| parse_direction(&qa.question));
    let dist = qa.distance_cue.or_else(|| parse_distance(&qa.question));
    let scope = query_scope(task, cue);
    let mentions = mentioned_labels(&qa.question, &scene.labels());
    let mut category = qa.category.clone().or_else(|| mentions.first().cloned());
    if category.is_none() && task == TaskType::Existence {
        category = EXISTENCE_NOUN_RE
            .captures(&focus_sentence(&qa.question).to_lowercase())
            .and_then(|c| c.get(1))
            .map(|m| m.as_str().trim().to_string())
            .filter(|s| !s.is_empty());
    }
    let anchor = qa
        .anchor_category
        .clone()
        .or_else(|| mentions.iter().find(|l| Some(*l) != category.as_ref()).cloned());
    Ok(Resolved {
        task,
        cue,
        dist,
        scope,
        category,
        anchor,
    })
}

/// Candidate ids for a resolved record, sorted.
pub fn region_ids(scene: &Scene, sit: &AgentSituation, r: &Resolved, cfg: &ForgeConfig) -> Vec<u32> {
    let dist = if r.scope == QueryScope::WholeScene { None } else { r.dist };
    region_filter(scene, sit, r.scope, r.cue, dist, cfg.policy, &cfg.distance)
        .into_iter()
        .filter(|o| {
            // polar clues need a direction for every candidate
            r.task != TaskType::Navigation || {
                let c = crate::scene::object_centroid(o);
                signed_polar(sit, [c[0], c[1]]).is_ok()
            }
        })
        .map(|o| o.id)
        .collect()
}

/// Target ids implied by the question: region membership plus category match.
pub fn extract_targets(
    scene: &Scene,
    qa: &QaRecord,
    cfg: &ForgeConfig,
    synonyms: &Synonyms,
) -> Result<Vec<u32>, ForgeError> {
    let r = resolve(scene, qa)?;
    let category = r
        .category
        .as_deref()
        .ok_or_else(|| ForgeError::Extraction(format!("no object category found in {:?}", qa.question)))?;
    let matches = |label: &str, cat: &str| match_label(label, cat, synonyms);
    let region = region_ids(scene, &qa.situation, &r, cfg);
    let in_region = |want: &str| -> Vec<u32> {
        region
            .iter()
            .copied()
            .filter(|id| scene.object(*id).is_some_and(|o| matches(&o.label, want)))
            .collect()
    };
    match r.task {
        TaskType::Counting | TaskType::Existence | TaskType::Navigation => Ok(in_region(category)),
        TaskType::SpatialRelationship => {
            let anchor = r
                .anchor
                .as_deref()
                .ok_or_else(|| ForgeError::Extraction("no anchor category found".into()))?;
            let mut ids = in_region(category);
            ids.extend(in_region(anchor));
            ids.sort_unstable();
            ids.dedup();
            Ok(ids)
        }
        task => Err(ForgeError::Extraction(format!("{task} records need annotated target ids"))),
    }
}

fn needs_targets(task: TaskType) -> bool {
    matches!(
        task,
        TaskType::Counting | TaskType::Existence | TaskType::Navigation | TaskType::SpatialRelationship
    )
}

/// Outcome of simulated grounding for one record.
#[derive(Debug, Clone)]
pub struct Grounded<'s> {
    pub scene: Cow<'s, Scene>,
    pub resolved: Resolved,
    /// Annotated targets.
    pub targets: BTreeSet<u32>,
    /// Targets that survived region filtering on the (possibly noisy) scene.
    pub effective_targets: BTreeSet<u32>,
    pub grounding: GroundingResult,
}

pub fn ground<'s>(
    scene: &'s Scene,
    qa: &QaRecord,
    index: u64,
    cfg: &ForgeConfig,
    synonyms: &Synonyms,
    opts: &RunOptions,
) -> Result<Grounded<'s>, ForgeError> {
    let resolved = resolve(scene, qa)?;
    let targets: BTreeSet<u32> = if qa.target_ids.is_empty() && needs_targets(resolved.task) {
        extract_targets(scene, qa, cfg, synonyms)?.into_iter().collect()
    } else {
        qa.target_ids.iter().copied().collect()
    };
    if let Some(&missing) = targets.iter().find(|id| scene.object(**id).is_none()) {
        return Err(ForgeError::UnknownTarget(missing));
    }
    let noise = opts.noise_for(index);
    let scene: Cow<'s, Scene> = if noise.se_rate > 0.0 {
        Cow::Owned(inject_semantic_noise(scene, &noise))
    } else {
        Cow::Borrowed(scene)
    };
    let candidates = region_ids(&scene, &qa.situation, &resolved, cfg);
    let effective_targets: BTreeSet<u32> = if noise.se_rate > 0.0 {
        targets.iter().copied().filter(|id| candidates.contains(id)).collect()
    } else {
        targets.clone()
    };
    let mut rng = stream(opts.seed, Domain::Grounding, index);
    let assigned = assign_pseudo_probs(&candidates, &effective_targets, &mut rng)?;
    let capped = cap_object_list(&assigned, &effective_targets, cfg.max_objects, &mut rng)?;
    let grounding = inject_grounding_noise(&capped, &effective_targets, &noise);
    Ok(Grounded {
        scene,
        resolved,
        targets,
        effective_targets,
        grounding,
    })
}

/// Think segments for a resolved record, with an empty clue of the mandated kind.
pub fn skeleton(r: &Resolved, answer: &str) -> ReasoningTrace {
    let kind = mandated_clue(r.task);
    ReasoningTrace {
        task: r.task,
        think_type: templates::think_type(r.task),
        think_rgn: templates::think_rgn(r.scope, r.cue, r.dist),
        think_grd: templates::think_grd(r.task, r.scope, r.cue, r.dist, r.category.as_deref(), r.anchor.as_deref()),
        think_task: templates::think_task(kind).to_string(),
        clue: CluePayload { kind, text: String::new(), image_ref: None },
        think_sum: templates::think_sum(kind).to_string(),
        answer: answer.to_string(),
    }
}

/// Builds the clue for a grounded record by dispatching on its trace prefix.
pub fn clue_for(g: &Grounded<'_>, trace: &ReasoningTrace, sit: &AgentSituation, cfg: &ForgeConfig) -> Result<CluePayload, ForgeError> {
    Ok(build_clue(&render_prefix(trace), &g.grounding, &g.scene, sit, cfg.max_objects)?)
}

pub fn generate_record(
    scenes: &SceneIndex,
    qa: &QaRecord,
    index: u64,
    cfg: &ForgeConfig,
    synonyms: &Synonyms,
    opts: &RunOptions,
) -> Result<TraceRecord, ForgeError> {
    let scene = scenes
        .get(&qa.scene_id)
        .ok_or_else(|| ForgeError::UnknownScene(qa.scene_id.clone()))?;
    let g = ground(scene, qa, index, cfg, synonyms, opts)?;
    let mut trace = skeleton(&g.resolved, &qa.gold_answer);
    let mut clue = clue_for(&g, &trace, &qa.situation, cfg)?;
    // image references travel beside the trace text, not inside it
    let image_ref = clue.image_ref.take();
    trace.clue = clue;
    let text = render_trace(&trace)?;
    Ok(TraceRecord {
        scene_id: qa.scene_id.clone(),
        question: qa.question.clone(),
        answer: qa.gold_answer.clone(),
        task_type: g.resolved.task,
        target_ids: g.effective_targets.iter().copied().collect(),
        situation: qa.situation,
        trace: text,
        clue_kind: trace.clue.kind,
        grounding: g.grounding,
        image_ref,
        noise: (opts.mode != NoiseMode::Oracle).then(|| opts.mode.as_str().to_string()),
    })
}

/// Parses a record's trace text and validates it against the record.
pub fn check_record(record: &TraceRecord, cap: usize) -> Result<Vec<TraceViolation>, TraceError> {
    let trace = parse_trace(&record.trace)?;
    Ok(validate_trace(&trace, record, cap))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DatasetStats {
    pub input: usize,
    pub generated: usize,
    pub failed: usize,
    pub violations: usize,
    pub per_task: BTreeMap<String, usize>,
}

#[derive(Debug, Clone)]
pub struct RecordFailure {
    pub index: usize,
    pub error: ForgeError,
}

#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub records: Vec<TraceRecord>,
    pub failures: Vec<RecordFailure>,
    pub stats: DatasetStats,
}

impl Dataset {
    pub fn ok(&self) -> bool {
        self.stats.failed == 0 && self.stats.violations == 0
    }

    /// JSONL text, one record per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("trace records serialize"));
            out.push('\n');
        }
        out
    }
}

/// Generates every record in parallel; output order follows input order.
pub fn generate_dataset(
    scenes: &SceneIndex,
    qa: &[QaRecord],
    cfg: &ForgeConfig,
    synonyms: &Synonyms,
    opts: &RunOptions,
) -> Dataset {
    let results: Vec<Result<(TraceRecord, usize), ForgeError>> = qa
        .par_iter()
        .enumerate()
        .map(|(i, q)| {
            let record = generate_record(scenes, q, i as u64, cfg, synonyms, opts)?;
            let violations = check_record(&record, cfg.max_objects)?;
            Ok((record, violations.len()))
        })
        .collect();
    let mut data = Dataset::default();
    data.stats.input = qa.len();
    for (index, result) in results.into_iter().enumerate() {
        match result {
            Ok((record, violations)) => {
                *data.stats.per_task.entry(record.task_type.to_string()).or_default() += 1;
                data.stats.violations += violations;
                data.records.push(record);
            }
            Err(error) => data.failures.push(RecordFailure { index, error }),
        }
    }
    data.stats.generated = data.records.len();
    data.stats.failed = data.failures.len();
    data
}

/// Reads QA JSONL, skipping blank lines. Errors carry the 1-based line number.
pub fn parse_qa_jsonl(text: &str) -> Result<Vec<QaRecord>, (usize, serde_json::Error)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| (i + 1, e)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clue::ClueKind;
    use crate::scene::ObjectInstance;

    fn room() -> Scene {
        // agent at origin facing +y; right is +x
        Scene {
            scene_id: "room".into(),
            objects: vec![
                ObjectInstance::new(0, "pillow", [2.0, 0.2, 0.5], [0.4, 0.4, 0.2]),
                ObjectInstance::new(1, "pillow", [2.2, -0.5, 0.5], [0.4, 0.4, 0.2]),
                ObjectInstance::new(2, "pillow", [-2.0, 0.0, 0.5], [0.4, 0.4, 0.2]),
                ObjectInstance::new(3, "cabinet", [1.8, 0.9, 0.5], [0.6, 0.4, 1.0]),
                ObjectInstance::new(4, "pillow", [6.0, 0.0, 0.5], [0.4, 0.4, 0.2]),
                ObjectInstance::new(5, "door", [0.0, 2.0, 1.0], [1.0, 0.1, 2.0]).with_image("img/5.jpg"),
                ObjectInstance::new(6, "file cabinet", [0.0, -2.0, 0.5], [0.5, 0.5, 1.0]),
                ObjectInstance::new(7, "pillow", [2.5, 0.0, 0.5], [0.4, 0.4, 0.2]),
            ],
        }
    }

    fn qa(question: &str, answer: &str) -> QaRecord {
        QaRecord {
            scene_id: "room".into(),
            question: question.into(),
            gold_answer: answer.into(),
            task_type: None,
            target_ids: vec![],
            situation: AgentSituation::new([0.0; 3], [0.0, 1.0]).unwrap(),
            direction_cue: None,
            distance_cue: None,
            category: None,
            anchor_category: None,
        }
    }

    #[test]
    fn mentions_prefer_longer_labels() {
        let labels = ["cabinet", "file cabinet", "pillow"];
        assert_eq!(mentioned_labels("Is the file cabinet near the pillows?", &labels), vec!["file cabinet", "pillow"]);
        assert_eq!(mentioned_labels("Where is the pillow in relation to the cabinet?", &labels), vec!["pillow", "cabinet"]);
    }

    #[test]
    fn extracts_right_middle_pillows() {
        let scene = room();
        let q = qa(
            "There is a door at your 12 o'clock. How many pillows are on your right in the middle distance?",
            "three",
        );
        let cfg = ForgeConfig::default();
        let ids = extract_targets(&scene, &q, &cfg, &Synonyms::default()).unwrap();
        // brute force: right side, centroid distance in (1, 3], label pillow
        let expect: Vec<u32> = scene
            .objects
            .iter()
            .filter(|o| {
                let (x, y) = (o.center[0], o.center[1]);
                let d = x.hypot(y);
                let angle = x.atan2(y).to_degrees(); // clockwise from +y
                o.label == "pillow" && (30.0..=150.0).contains(&angle) && d > 1.0 && d <= 3.0
            })
            .map(|o| o.id)
            .collect();
        assert_eq!(ids, expect);
        assert_eq!(ids, vec![0, 1, 7]);
    }

    #[test]
    fn existence_without_matches() {
        let scene = room();
        let q = qa("Is there a sink in the room?", "no");
        let ids = extract_targets(&scene, &q, &ForgeConfig::default(), &Synonyms::default()).unwrap();
        assert!(ids.is_empty());
        let no_noun = qa("How many are on your right?", "two");
        assert!(matches!(
            extract_targets(&scene, &no_noun, &ForgeConfig::default(), &Synonyms::default()),
            Err(ForgeError::Extraction(_))
        ));
    }

    #[test]
    fn generates_counting_record() {
        let scenes = SceneIndex::new([room()]);
        let q = qa("How many pillows are on your right in the middle distance?", "three");
        let cfg = ForgeConfig::default();
        let rec = generate_record(&scenes, &q, 0, &cfg, &Synonyms::default(), &RunOptions::clean(7)).unwrap();
        assert_eq!(rec.task_type, TaskType::Counting);
        assert_eq!(rec.clue_kind, ClueKind::ObjProb);
        assert_eq!(rec.target_ids, vec![0, 1, 7]);
        assert_eq!(rec.grounding.probs.iter().filter(|&&p| p >= 0.5).count(), 3);
        assert!(rec.trace.contains("<think_rgn>Now I need to list all the objects on my right in the middle distance.</think_rgn>"));
        assert!(rec.trace.ends_with("<answer>three</answer>"));
        assert!(check_record(&rec, 30).unwrap().is_empty());
        let again = generate_record(&scenes, &q, 0, &cfg, &Synonyms::default(), &RunOptions::clean(7)).unwrap();
        assert_eq!(serde_json::to_string(&rec).unwrap(), serde_json::to_string(&again).unwrap());
    }

    #[test]
    fn generates_navigation_and_attribute_records() {
        let scenes = SceneIndex::new([room()]);
        let cfg = ForgeConfig::default();
        let nav = qa("From where you are, how do you get to the door?", "go straight and walk to the middle distance.");
        let rec = generate_record(&scenes, &nav, 3, &cfg, &Synonyms::default(), &RunOptions::clean(1)).unwrap();
        assert!(rec.trace.contains("<list_obj_loc_plr_prob>\n<obj_loc_plr_prob>"));
        assert!(rec.trace.contains("door: 0.0, 2.0; prob: "));
        let mut attr = qa("What is the state of the door in front of you?", "closed");
        attr.target_ids = vec![5];
        let rec = generate_record(&scenes, &attr, 4, &cfg, &Synonyms::default(), &RunOptions::clean(1)).unwrap();
        assert_eq!(rec.clue_kind, ClueKind::HighlightObj);
        assert_eq!(rec.image_ref.as_deref(), Some("img/5.jpg"));
        assert!(rec.trace.contains("<highlight_obj>\n<think_sum>"));
        assert!(check_record(&rec, 30).unwrap().is_empty());
    }

    #[test]
    fn dataset_accounts_for_failures() {
        let scenes = SceneIndex::new([room()]);
        let mut records = vec![qa("Is there a door in the room?", "yes"); 4];
        records[2].scene_id = "elsewhere".into();
        let data = generate_dataset(&scenes, &records, &ForgeConfig::default(), &Synonyms::default(), &RunOptions::clean(3));
        assert_eq!(data.stats.input, 4);
        assert_eq!(data.stats.generated, 3);
        assert_eq!(data.stats.failed, 1);
        assert_eq!(data.failures[0].index, 2);
        assert_eq!(data.stats.violations, 0);
        assert!(!data.ok());
    }

    #[test]
    fn qa_jsonl_round_trip() {
        let q = qa("Is there a sink in the room?", "no");
        let line = serde_json::to_string(&q).unwrap();
        let parsed = parse_qa_jsonl(&format!("{line}\n\n{line}\n")).unwrap();
        assert_eq!(parsed, vec![q.clone(), q]);
        assert_eq!(parse_qa_jsonl("{}\n").unwrap_err().0, 1);
    }
}
