//! Repetition-based uncertainty quantification for LLM grading outputs.
//!
//! Given `N` repeated grading generations per student answer, the crate
//! computes fourteen uncertainty measures (four over the score labels, ten
//! over relation graphs of the rationales) and benchmarks them: how well
//! they flag wrong grades ([`effectiveness`]), how stable they are as `N`
//! grows ([`stability`]), how they correlate ([`correlation`]), and how
//! they rank against each other across configurations ([`ranking`]).
//!
//! The `uq` binary drives the whole pipeline from JSONL inputs to CSV
//! tables and SVG plots; see [`cli`].

pub mod analysis;
pub mod categorical;
pub mod cli;
pub mod correlation;
pub mod effectiveness;
pub mod graph;
pub mod methods;
pub mod pipeline;
pub mod plot;
pub mod ranking;
pub mod response;
pub mod similarity;
pub mod stability;
pub mod synthetic;
pub mod tables;
