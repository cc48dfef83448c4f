pub mod classify;
pub mod cli;
pub mod constructs;
pub mod decompose;
pub mod error;
pub mod fourier;
pub mod kernel;
pub mod logspace;
pub mod lp;
pub mod project;
pub mod quad;
pub mod report;
pub mod special;
pub mod weights;
