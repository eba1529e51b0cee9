//! Virtual plasmodium simulation on a habitat map and the graph toolkit used
//! to compare the resulting city networks with proximity graphs and a
//! reference road network.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] builds Gabriel graphs, relative neighbourhood graphs and
//!   Euclidean minimum spanning trees over small city point sets, and checks
//!   straight-line drawings for crossings.
//! * [`citymap`] loads the habitat raster and the scenario configuration.
//! * [`plasmodium`] is the particle model itself.
//! * [`netextract`] turns a particle state into a city connectivity graph.
//! * [`graphlab`] aggregates per-run graphs, thresholds them and evaluates
//!   inclusion relations.
//! * [`cli`] wires everything into batch subcommands.

pub mod citymap;
pub mod cli;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod graph;
pub mod graphlab;
pub mod netextract;
pub mod plasmodium;
pub mod render;

pub use error::{Error, Result};
pub use graph::{CityGraph, Edge};
