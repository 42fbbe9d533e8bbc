//! Situated scene reasoning: egocentric geometry, simulated grounding, tagged
//! reasoning traces with visual clues, and a rule oracle that answers from them.

pub mod clue;
pub mod config;
pub mod eval;
pub mod grounding;
pub mod lexicon;
pub mod oracle;
pub mod pipeline;
pub mod question;
pub mod rng;
pub mod scene;
pub mod spatial;
pub mod synth;
pub mod trace;

pub use clue::{build_clue, ClueKind, CluePayload, Payload};
pub use config::ForgeConfig;
pub use eval::{compute_coherence, run_eval, score_answer, CoherenceReport, EvalReport};
pub use grounding::{GroundingResult, NoiseSpec};
pub use oracle::{answer, Answer, AnswerContext, Synonyms};
pub use pipeline::{generate_dataset, generate_record, NoiseMode, QaRecord, RunOptions, SceneIndex};
pub use question::{DirectionCue, DistanceCue, QueryScope, TaskType};
pub use scene::{AgentSituation, ObjectInstance, Scene};
pub use trace::{parse_trace, render_trace, validate_trace, ReasoningTrace, TraceRecord};
