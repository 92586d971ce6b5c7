//! Simulation library for millimeter-wave V2V initial access.

// NaN-rejecting range checks read best as `!(x > 0.0)`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beamforming;
pub mod channel;
pub mod codebook_design;
pub mod error;
pub mod geometry;
pub mod ia;
pub mod metrics;
pub mod scenario;

pub use beamforming::{Beamformer, Codebook, LinkBudget};
pub use channel::{ArrayGeometry, ChannelMatrix, PathComponent, PropagationConfig};
pub use codebook_design::{AngularPdf, QuadrantGrid, RasterImage};
pub use error::{Error, Result};
pub use geometry::Point;
pub use ia::{IAResult, LinkContext, SuccessRule};
pub use metrics::{Ecdf, LossReport, Quantizer};
pub use scenario::{Pose, ScenarioMap, VehicleId, VehicleTrace};
