//! Cross-lingual multi-sense word embeddings.
//!
//! A model holds, for each of two languages, context-word embeddings `P`,
//! sense-selection vectors `Q`, input sense embeddings `U` and collocation
//! estimators `V`. Training walks a sentence-parallel corpus without word
//! alignment: [`induction`] picks a sense for each word from its local and
//! parallel-sentence context, [`srl`] runs sense-level skip-gram with
//! negative sampling inside and across languages, and [`policy`] feeds the
//! resulting collocation probabilities back as rewards for the induction
//! parameters. [`trainer`] orchestrates one such joint step per training
//! tuple and alternates the language roles. [`eval`] scores contextual
//! word similarity (AvgSimC / MaxSimC with Spearman's ρ) and lists nearest
//! sense neighbors.

pub mod checkpoint;
pub mod config;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod export;
pub mod induction;
pub mod math;
pub mod params;
pub mod policy;
pub mod srl;
pub mod synthetic;
pub mod trainer;

pub use config::TrainingConfig;
pub use corpus::{ContextWindow, ParallelCorpus, Vocabulary, WindowOrigin, PAD};
pub use error::{Error, Result};
pub use eval::{EvalItem, EvalReport};
pub use induction::SenseDecision;
pub use math::Real;
pub use params::{LanguageParams, Matrix, Model, SenseId, Side};
pub use policy::PolicySample;
pub use srl::{NegativeSampler, SgnsResult};
pub use trainer::{StepReport, TrainOptions, TrainSummary, TrainTuple};
