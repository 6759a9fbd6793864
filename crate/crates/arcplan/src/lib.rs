//! arcplan solves ARC-style grid tasks by synthesizing small looping programs
//! over object-level abstractions of the grids.
//!
//! The pipeline: a task's grids are segmented into node graphs under a family
//! of abstractions ([`abstraction`]), each abstraction induces a planning
//! domain of predicates and action schemes with task-specific pruning
//! ([`domain`]), and a best-first search ([`synthesis`]) over pointer-indexed
//! programs ([`vm`]) looks for one program that maps every training input to
//! its output. Domains and instances can also be emitted as PDDL ([`pddl`]).

pub mod abstraction;
pub mod actions;
pub mod arc_io;
pub mod domain;
pub mod pddl;
pub mod relations;
pub mod shape;
pub mod state;
pub mod synthesis;
pub mod vm;

pub use abstraction::AbstractionKind;
pub use arc_io::{Grid, Task, TaskInstance};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("relations are not defined for the {0:?} abstraction")]
    UnsupportedAbstraction(AbstractionKind),
    #[error("every action scheme was pruned for this task and abstraction")]
    EmptyDomain,
    #[error("pddl parse error: {0}")]
    Pddl(String),
}

pub type Result<T> = std::result::Result<T, Error>;
