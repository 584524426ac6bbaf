//! Command-line companion to `jetops-core`: scenario files, CSV/SVG export,
//! verification suites and figure generation.

pub mod figures;
pub mod io;
pub mod scenario;
pub mod suites;
