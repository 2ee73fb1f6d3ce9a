//! Numerical harnesses for the resolvent lower bounds and the selection of
//! `γ`. Every outcome is an empirical statement about a truncated fiber
//! on a finite grid, and reports carry the truncation metadata.

mod theorem3;
mod thomas;

pub use theorem3::{theorem3_pipeline, ChainSample, Theorem3Params, Theorem3Report, Theorem3Step};
pub use thomas::{
    corollary_c9, k_grid, kappa_grid, probe_sigma_min, verify_theorem2, verify_theorem8, CorollaryNode, CorollaryReport, KGrid, ProbeResult, Theorem2Node,
    Theorem2Report, Theorem8Node, Theorem8Report, ThomasGrid,
};
