pub mod cea;
pub mod config;
pub mod grid;
pub mod markov;
pub mod model;
pub mod pipeline;
pub mod report;
pub mod sensitivity;
pub mod strategy;

pub use model::{Cell, Model, ModelError, ParamKind, StrategyDef};
