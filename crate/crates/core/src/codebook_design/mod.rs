//! Probabilistic codebooks: trained per-quadrant angle histograms, map
//! rasters reduced to street orientations, and Lloyd-Max beam placement.

mod hough;
mod lloyd;
mod pdf;
mod raster;
mod training;

pub use hough::{
    extend_and_rotate, hough_angle_pdf, hough_transform, map_pdf_from_raster, prewitt_edges, HoughAccumulator,
    MapPdfParams, DEFAULT_EDGE_THRESHOLD,
};
pub use lloyd::{lloyd_max, quantization_mse, LloydMax, LloydMaxParams};
pub use pdf::AngularPdf;
pub use raster::{render_map, RasterImage, Sidecar};
pub use training::{beam_masses, pcb_codebook, pcb_order, train_pcb, GridSpec, QuadrantGrid};
