//! Planar homeomorphisms, horseshoes and entropy estimates.

pub mod constructions;
pub mod entropy;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod homeo;
pub mod horseshoe;
pub mod perturb;

pub use error::{Error, Result};
pub use geometry::{Ball, ElongatedNbhd, Point, Rect, Region, SolidCylinder};
pub use homeo::{compose, identity, inverse, piecewise, HomeoExpr, Node, Part};
pub use horseshoe::{branch_certificate, check_crossing, make_horseshoe, CrossingCertificate, HorseshoeSpec};
pub use perturb::{close_orbit, find_return, insert_horseshoe_chain, ChainReport, ClosingReport, ReturnSegment};
