//! Pre-render correction: element retrieval and local search over layout
//! actions against an aesthetic score.

mod elements;
mod evaluate;
mod search;

pub use elements::{
    apply_substitutions, element_score, jaccard, retrieve_elements, ElementAsset, ElementLibrary, ElementManifest,
    ElementRecord, Substitution, ELEMENT_MANIFEST,
};
pub use evaluate::{Backdrop, EvalWeights, Evaluator, Terms, ALIGN_TOLERANCE_PX, SAFETY_INSET};
pub use search::{
    apply_action, finetune, propose, Action, FinetuneOutcome, SearchConfig, StopReason, TraceStep, DEFAULT_BUDGET,
    DEFAULT_PATIENCE, MAX_MOVE_PX, SCALE_RANGE,
};
