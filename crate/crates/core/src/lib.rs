//! Exact tools for MaxMin-length triangulation hardness: rational geometry,
//! triangulation search, covering by disjoint segments, and the Planar 3SAT
//! reduction pipeline with its verification harness.

pub mod cds;
pub mod cnf;
pub mod geom;
pub mod harness;
pub mod reduction;
pub mod render;
pub mod triangulation;
