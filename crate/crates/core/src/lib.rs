//! Redundancy-guided systems-theoretic hazard analysis.
//!
//! The crate walks a redundant digital architecture through seven stages:
//! model the hardware ([`model`], [`dsl`]), synthesize its fault tree
//! ([`ftree`]), enumerate unsafe control actions and information flows
//! ([`stpa`]), hang them under software-design branches, detect common-cause
//! failures ([`ccf`]), compute minimal cut sets ([`cutsets`]) and render
//! guidance ([`report`]). [`pipeline`] chains the stages; [`casestudy`]
//! bundles a calibrated reference model.

pub mod casestudy;
pub mod ccf;
pub mod cutsets;
pub mod dsl;
pub mod ftree;
pub mod model;
pub mod pipeline;
pub mod report;
pub mod stpa;
