//! Scenario runner around the `vaet` engine: sweeps, disorder ensembles,
//! scaling studies, convergence ladders and bundled figure datasets, all
//! emitting CSV/JSON tables plus a manifest keyed by a deterministic run ID.

pub mod config;
pub mod figures;
pub mod output;
pub mod runner;
