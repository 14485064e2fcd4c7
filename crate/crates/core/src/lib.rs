//! Roots of crosscap transpositions and crosscap slides in mapping class
//! groups of nonorientable surfaces, with machine-checkable certificates.

pub mod cli;
pub mod presentation;
pub mod repr;
pub mod roots;
pub mod small_genus;
pub mod word;
