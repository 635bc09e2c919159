//! Template selection: rule-based recall, color pre-ranking and learned
//! creative ranking.

pub mod prerank;
pub mod rank;
pub mod recall;

pub use prerank::{
    clash, color_profile, color_score, prerank, ColorProfile, PrerankConfig, PrerankError, PrerankResult,
};
pub use rank::{rank_candidates, RankConfig, RankError, RankModel, RankedCandidate, RankedList};
pub use recall::{goods_score, recall_topk, screen, text_score, RecallConfig, RecallError, RecallResult};
