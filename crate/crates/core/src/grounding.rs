//! Simulated grounding: pseudo-probabilities, candidate capping, and the two
//! noise injectors used in oracle ablations.
//!
//! Probabilities live on the 0.01 grid that clue payloads print, so a value's
//! band (`>= 0.5` or `< 0.5`) survives rendering.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{substream, Domain};
use crate::scene::Scene;

/// Presence decision threshold shared by the forge and the oracle.
pub const PRESENCE_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GroundingResult {
    #[serde(rename = "ids")]
    pub candidates: Vec<u32>,
    pub probs: Vec<f64>,
}

impl GroundingResult {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.candidates.iter().copied().zip(self.probs.iter().copied())
    }

    /// Ids whose probability clears the presence threshold.
    pub fn present(&self) -> BTreeSet<u32> {
        self.iter()
            .filter(|&(_, p)| p >= PRESENCE_THRESHOLD)
            .map(|(id, _)| id)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub se_rate: f64,
    pub ge_rate: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<(), GroundingError> {
        for rate in [self.se_rate, self.ge_rate] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(GroundingError::BadRate(rate));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GroundingError {
    #[error("target id {0} is not among the candidates")]
    InconsistentMetadata(u32),
    #[error("cannot keep {targets} targets within a cap of {cap}")]
    Capacity { targets: usize, cap: usize },
    #[error("noise rate {0} outside [0, 1]")]
    BadRate(f64),
}

fn target_prob<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    f64::from(rng.gen_range(50u8..=100)) / 100.0
}

fn non_target_prob<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    f64::from(rng.gen_range(0u8..50)) / 100.0
}

/// Targets draw from `[0.5, 1.0]`, everything else from `[0, 0.5)`, in candidate order.
pub fn assign_pseudo_probs<R: Rng + ?Sized>(
    candidates: &[u32],
    target_ids: &BTreeSet<u32>,
    rng: &mut R,
) -> Result<GroundingResult, GroundingError> {
    if let Some(&missing) = target_ids.iter().find(|id| !candidates.contains(id)) {
        return Err(GroundingError::InconsistentMetadata(missing));
    }
    let probs = candidates
        .iter()
        .map(|id| {
            if target_ids.contains(id) {
                target_prob(rng)
            } else {
                non_target_prob(rng)
            }
        })
        .collect();
    Ok(GroundingResult {
        candidates: candidates.to_vec(),
        probs,
    })
}

/// Keeps every target and a uniform sample of the rest, preserving order.
pub fn cap_object_list<R: Rng + ?Sized>(
    result: &GroundingResult,
    target_ids: &BTreeSet<u32>,
    cap: usize,
    rng: &mut R,
) -> Result<GroundingResult, GroundingError> {
    if cap < target_ids.len() {
        return Err(GroundingError::Capacity {
            targets: target_ids.len(),
            cap,
        });
    }
    if result.len() <= cap {
        return Ok(result.clone());
    }
    let others: Vec<usize> = (0..result.len())
        .filter(|&i| !target_ids.contains(&result.candidates[i]))
        .collect();
    let kept_targets = result.len() - others.len();
    let room = cap - kept_targets;
    let mut keep = vec![false; result.len()];
    for i in 0..result.len() {
        if target_ids.contains(&result.candidates[i]) {
            keep[i] = true;
        }
    }
    for j in sample(rng, others.len(), room) {
        keep[others[j]] = true;
    }
    let mut out = GroundingResult::default();
    for (i, (id, p)) in result.iter().enumerate() {
        if keep[i] {
            out.candidates.push(id);
            out.probs.push(p);
        }
    }
    Ok(out)
}

/// Swaps labels and jitters centers. Each object draws from its own stream keyed
/// by its id, so the result does not depend on object order.
pub fn inject_semantic_noise(scene: &Scene, spec: &NoiseSpec) -> Scene {
    let mut out = scene.clone();
    if spec.se_rate <= 0.0 {
        return out;
    }
    let vocab: Vec<String> = scene.labels().into_iter().map(str::to_owned).collect();
    for obj in &mut out.objects {
        let mut rng = substream(spec.seed, Domain::SemanticNoise, 0, u64::from(obj.id));
        if rng.gen::<f64>() >= spec.se_rate {
            continue;
        }
        let alternatives: Vec<&String> = vocab.iter().filter(|l| **l != obj.label).collect();
        if !alternatives.is_empty() {
            obj.label = alternatives[rng.gen_range(0..alternatives.len())].clone();
        }
        let offset = [0, 1, 2].map(|axis| {
            let half = 0.1 * obj.size[axis];
            rng.gen_range(-half..=half)
        });
        *obj = obj.translated(offset);
    }
    out
}

/// Resamples an entry from the wrong band with probability `ge_rate`.
/// Streams are keyed by candidate id.
pub fn inject_grounding_noise(
    result: &GroundingResult,
    target_ids: &BTreeSet<u32>,
    spec: &NoiseSpec,
) -> GroundingResult {
    let mut out = result.clone();
    if spec.ge_rate <= 0.0 {
        return out;
    }
    for (id, p) in out.candidates.iter().zip(out.probs.iter_mut()) {
        let mut rng = substream(spec.seed, Domain::GroundingNoise, 0, u64::from(*id));
        let flip = rng.gen::<f64>() < spec.ge_rate;
        let wrong = if target_ids.contains(id) {
            non_target_prob(&mut rng)
        } else {
            target_prob(&mut rng)
        };
        if flip {
            *p = wrong;
        }
    }
    out
}

/// Number of objects whose label differs between two versions of a scene.
pub fn count_relabeled(before: &Scene, after: &Scene) -> usize {
    let labels: BTreeMap<u32, &str> = before.objects.iter().map(|o| (o.id, o.label.as_str())).collect();
    after
        .objects
        .iter()
        .filter(|o| labels.get(&o.id).is_some_and(|l| *l != o.label))
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::scene::ObjectInstance;

    fn ids(n: u32) -> Vec<u32> {
        (0..n).collect()
    }

    fn set(v: &[u32]) -> BTreeSet<u32> {
        v.iter().copied().collect()
    }

    #[test]
    fn bands_follow_targets() {
        let mut rng = stream(1, Domain::Grounding, 0);
        let all = assign_pseudo_probs(&ids(10), &set(&ids(10)), &mut rng).unwrap();
        assert!(all.probs.iter().all(|&p| p >= 0.5 && p <= 1.0));
        let none = assign_pseudo_probs(&ids(10), &BTreeSet::new(), &mut rng).unwrap();
        assert!(none.probs.iter().all(|&p| (0.0..0.5).contains(&p)));
        for seed in 0..50 {
            let mut rng = stream(seed, Domain::Grounding, 0);
            let r = assign_pseudo_probs(&ids(10), &set(&[3, 8]), &mut rng).unwrap();
            assert_eq!(r.probs.iter().filter(|&&p| p >= 0.5).count(), 2);
            assert_eq!(r.present(), set(&[3, 8]));
        }
    }

    #[test]
    fn target_outside_candidates_is_error() {
        let mut rng = stream(1, Domain::Grounding, 0);
        assert_eq!(
            assign_pseudo_probs(&ids(3), &set(&[5]), &mut rng),
            Err(GroundingError::InconsistentMetadata(5))
        );
    }

    #[test]
    fn cap_keeps_targets_and_order() {
        let mut rng = stream(2, Domain::Grounding, 0);
        let targets = set(&[4, 27]);
        let r = assign_pseudo_probs(&ids(30), &targets, &mut rng).unwrap();
        let capped = cap_object_list(&r, &targets, 10, &mut rng).unwrap();
        assert_eq!(capped.len(), 10);
        assert!(capped.candidates.contains(&4) && capped.candidates.contains(&27));
        assert!(capped.candidates.windows(2).all(|w| w[0] < w[1]));
        for (id, p) in capped.iter() {
            assert_eq!(p, r.probs[id as usize]);
        }
        let same = cap_object_list(&r, &targets, 30, &mut rng).unwrap();
        assert_eq!(same, r);
        assert!(matches!(
            cap_object_list(&r, &targets, 1, &mut rng),
            Err(GroundingError::Capacity { targets: 2, cap: 1 })
        ));
    }

    #[test]
    fn cap_is_deterministic_per_seed() {
        let targets = set(&[1]);
        let run = || {
            let mut rng = stream(9, Domain::Grounding, 5);
            let r = assign_pseudo_probs(&ids(40), &targets, &mut rng).unwrap();
            cap_object_list(&r, &targets, 12, &mut rng).unwrap()
        };
        assert_eq!(run(), run());
    }

    fn two_label_scene(n: u32) -> Scene {
        Scene {
            scene_id: "s".into(),
            objects: (0..n)
                .map(|i| {
                    let label = if i % 2 == 0 { "chair" } else { "table" };
                    ObjectInstance::new(i, label, [i as f64, 0.0, 0.0], [1.0, 1.0, 1.0])
                })
                .collect(),
        }
    }

    #[test]
    fn semantic_noise_rates() {
        let scene = two_label_scene(20);
        let zero = NoiseSpec { se_rate: 0.0, ge_rate: 0.0, seed: 3 };
        assert_eq!(inject_semantic_noise(&scene, &zero), scene);
        let full = NoiseSpec { se_rate: 1.0, ..zero };
        let noisy = inject_semantic_noise(&scene, &full);
        assert_eq!(count_relabeled(&scene, &noisy), 20);
        for (a, b) in scene.objects.iter().zip(&noisy.objects) {
            for axis in 0..3 {
                assert!((a.center[axis] - b.center[axis]).abs() <= 0.1 * a.size[axis] + 1e-12);
            }
        }
        assert_eq!(inject_semantic_noise(&scene, &full), noisy);
    }

    #[test]
    fn semantic_noise_ignores_object_order() {
        let scene = two_label_scene(30);
        let spec = NoiseSpec { se_rate: 0.5, ge_rate: 0.0, seed: 11 };
        let mut reversed = scene.clone();
        reversed.objects.reverse();
        let mut a = inject_semantic_noise(&scene, &spec).objects;
        let mut b = inject_semantic_noise(&reversed, &spec).objects;
        a.sort_by_key(|o| o.id);
        b.sort_by_key(|o| o.id);
        assert_eq!(a, b);
    }

    #[test]
    fn grounding_noise_rates() {
        let mut rng = stream(4, Domain::Grounding, 0);
        let targets = set(&[0, 1, 2]);
        let r = assign_pseudo_probs(&ids(10), &targets, &mut rng).unwrap();
        let zero = NoiseSpec { se_rate: 0.0, ge_rate: 0.0, seed: 4 };
        assert_eq!(inject_grounding_noise(&r, &targets, &zero), r);
        let full = NoiseSpec { ge_rate: 1.0, ..zero };
        let flipped = inject_grounding_noise(&r, &targets, &full);
        for (id, p) in flipped.iter() {
            if targets.contains(&id) {
                assert!(p < 0.5);
            } else {
                assert!(p >= 0.5);
            }
        }
    }

    #[test]
    fn rates_are_validated() {
        assert!(NoiseSpec { se_rate: 1.2, ge_rate: 0.0, seed: 0 }.validate().is_err());
        assert!(NoiseSpec { se_rate: 0.2, ge_rate: 1.0, seed: 0 }.validate().is_ok());
    }
}
