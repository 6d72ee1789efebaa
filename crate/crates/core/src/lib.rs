//! Fixed points of Reich-type contractions on cone rectangular metric spaces.
//!
//! The crate is split into five layers: [`cone`] (ordered vector spaces),
//! [`altering`] (altering functions and their axioms), [`space`] (finite and
//! scalar cone rectangular metric spaces), [`engine`] (contraction checks and
//! certified Picard iteration) and [`cli`] (the `reich` binary).

pub mod altering;
pub mod cli;
pub mod cone;
pub mod engine;
pub mod problem;
pub mod space;

pub use altering::{verify_altering, Altering, AlteringFn};
pub use cone::{ConeElement, ConeSpec};
pub use engine::{picard_run, Certificate, FiniteMap, PicardOptions, ReichParams};
pub use problem::ProblemFile;
pub use space::{FiniteGcrSpace, ScalarDemoSpace, Space};
