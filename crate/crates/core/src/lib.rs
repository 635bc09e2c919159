pub mod actuator;
pub mod adjuster;
pub mod banner;
pub mod batch;
pub mod color;
pub mod config;
pub mod error;
pub mod evaluator;
pub mod fixtures;
pub mod generator;
pub mod geometry;
pub mod pipeline;
pub mod planner;
pub mod request;
pub mod template;

pub const MODEL_FORMAT: &str = "bannerforge-model";
