use std::f64::consts::{FRAC_PI_2, PI, TAU};

use super::pdf::{spread_linear, AngularPdf};
use super::raster::RasterImage;
use crate::error::{Error, Result};

pub const DEFAULT_EDGE_THRESHOLD: f64 = 0.5;

/// 3x3 Prewitt gradient magnitude, thresholded at `threshold` times the
/// image maximum. Set pixels are 255; the one-pixel border stays 0.
pub fn prewitt_edges(img: &RasterImage, threshold: f64) -> Result<RasterImage> {
    let (w, h) = (img.width, img.height);
    if w < 3 || h < 3 {
        return Err(Error::ImageTooSmall { width: w, height: h });
    }
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidParameter(format!(
            "edge threshold {threshold} outside [0, 1]"
        )));
    }
    let px = |x: usize, y: usize| img.get(x, y) as f64;
    let mut mag = vec![0.0; w * h];
    let mut max = 0.0f64;
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let mut gx = 0.0;
            let mut gy = 0.0;
            for d in 0..3 {
                gx += px(x + 1, y + d - 1) - px(x - 1, y + d - 1);
                gy += px(x + d - 1, y + 1) - px(x + d - 1, y - 1);
            }
            let m = gx.hypot(gy);
            mag[y * w + x] = m;
            max = max.max(m);
        }
    }
    let cut = threshold * max;
    let values = mag.iter().map(|&m| if m > 0.0 && m >= cut { 255 } else { 0 }).collect();
    RasterImage::new(w, h, values, img.sidecar())
}

/// Vote counts over line parameters `(rho, theta)` with
/// `rho = x cos(theta) + y sin(theta)` in pixel coordinates (y down).
#[derive(Debug, Clone, PartialEq)]
pub struct HoughAccumulator {
    theta_res_deg: f64,
    rho_res: f64,
    n_theta: usize,
    n_rho: usize,
    rho_offset: usize,
    counts: Vec<u32>,
}

impl HoughAccumulator {
    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_rho(&self) -> usize {
        self.n_rho
    }

    pub fn theta_res_deg(&self) -> f64 {
        self.theta_res_deg
    }

    /// Angle of theta bin `i`, degrees in `[-90, 90)`.
    pub fn theta_deg(&self, i: usize) -> f64 {
        -90.0 + i as f64 * self.theta_res_deg
    }

    pub fn rho(&self, j: usize) -> f64 {
        (j as f64 - self.rho_offset as f64) * self.rho_res
    }

    pub fn get(&self, rho_index: usize, theta_index: usize) -> u32 {
        self.counts[theta_index * self.n_rho + rho_index]
    }

    pub fn column(&self, theta_index: usize) -> &[u32] {
        &self.counts[theta_index * self.n_rho..(theta_index + 1) * self.n_rho]
    }

    pub fn column_max(&self, theta_index: usize) -> u32 {
        self.column(theta_index).iter().copied().max().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    /// Highest cell as `(rho_index, theta_index, count)`; ties go to the
    /// lowest theta, then the lowest rho.
    pub fn peak(&self) -> (usize, usize, u32) {
        let mut best = (0, 0, 0);
        for t in 0..self.n_theta {
            for (r, &c) in self.column(t).iter().enumerate() {
                if c > best.2 {
                    best = (r, t, c);
                }
            }
        }
        best
    }
}

pub fn hough_transform(edges: &RasterImage, theta_res_deg: f64, rho_res: f64) -> Result<HoughAccumulator> {
    if !(theta_res_deg > 0.0) || !(rho_res > 0.0) {
        return Err(Error::InvalidParameter("Hough resolutions must be > 0".into()));
    }
    let ratio = 180.0 / theta_res_deg;
    if (ratio - ratio.round()).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "theta resolution {theta_res_deg}° does not divide 180°"
        )));
    }
    let n_theta = ratio.round() as usize;
    let diag = ((edges.width.max(1) - 1) as f64).hypot((edges.height.max(1) - 1) as f64);
    let rho_offset = (diag / rho_res).ceil() as usize;
    let n_rho = 2 * rho_offset + 1;
    let trig: Vec<(f64, f64)> = (0..n_theta)
        .map(|i| {
            let t = (-90.0 + i as f64 * theta_res_deg).to_radians();
            (t.cos(), t.sin())
        })
        .collect();
    let mut counts = vec![0u32; n_theta * n_rho];
    for y in 0..edges.height {
        for x in 0..edges.width {
            if edges.get(x, y) == 0 {
                continue;
            }
            let (xf, yf) = (x as f64, y as f64);
            for (i, (c, s)) in trig.iter().enumerate() {
                let j = ((xf * c + yf * s) / rho_res).round() as i64 + rho_offset as i64;
                counts[i * n_rho + j as usize] += 1;
            }
        }
    }
    Ok(HoughAccumulator {
        theta_res_deg,
        rho_res,
        n_theta,
        n_rho,
        rho_offset,
        counts,
    })
}

/// Orientation PDF over `[-90°, 90°)`: each column's peak minus the smallest
/// column peak, normalized. Bins are centered on the theta samples.
pub fn hough_angle_pdf(acc: &HoughAccumulator) -> Result<AngularPdf> {
    if acc.total() == 0 {
        return Err(Error::EmptyAccumulator);
    }
    let maxima: Vec<u32> = (0..acc.n_theta).map(|i| acc.column_max(i)).collect();
    let floor = *maxima.iter().min().expect("n_theta ≥ 1");
    let scores: Vec<f64> = maxima.iter().map(|&m| (m - floor) as f64).collect();
    if scores.iter().all(|&s| s == 0.0) {
        return Err(Error::DegeneratePdf("all Hough column maxima are equal".into()));
    }
    let w = acc.theta_res_deg.to_radians();
    AngularPdf::new(-FRAC_PI_2 - w / 2.0, w, scores)
}

/// Maps line orientations to compass bearings on `n_out_bins` bins around
/// the circle. A line at orientation `t` can be travelled both ways, so its
/// mass is split between `t` and `t + 180°`, then everything is rotated by
/// `north_offset`.
///
/// A theta bin's line runs at compass bearing `theta mod 180°` because theta
/// is the normal direction in a y-down image.
pub fn extend_and_rotate(pdf: &AngularPdf, north_offset: f64, n_out_bins: usize) -> Result<AngularPdf> {
    if n_out_bins == 0 {
        return Err(Error::InvalidParameter("need at least one output bin".into()));
    }
    let w = TAU / n_out_bins as f64;
    let mut out = vec![0.0; n_out_bins];
    for (c, &m) in pdf.centers().iter().zip(pdf.masses()) {
        if m == 0.0 {
            continue;
        }
        spread_linear(&mut out, -w / 2.0, w, c + north_offset, m / 2.0);
        spread_linear(&mut out, -w / 2.0, w, c + PI + north_offset, m / 2.0);
    }
    AngularPdf::new(-w / 2.0, w, out)
}

/// Knobs for the raster-to-PDF pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapPdfParams {
    pub edge_threshold: f64,
    pub theta_res_deg: f64,
    pub rho_res: f64,
    pub output_bins: usize,
}

impl Default for MapPdfParams {
    fn default() -> Self {
        Self {
            edge_threshold: DEFAULT_EDGE_THRESHOLD,
            theta_res_deg: 1.0,
            rho_res: 1.0,
            output_bins: 360,
        }
    }
}

/// Edges, Hough votes, orientation PDF, then bearings using the raster's
/// own north offset.
pub fn map_pdf_from_raster(img: &RasterImage, params: &MapPdfParams) -> Result<AngularPdf> {
    let edges = prewitt_edges(img, params.edge_threshold)?;
    if edges.count_set() == 0 {
        return Err(Error::DegeneratePdf("raster has no edges".into()));
    }
    let acc = hough_transform(&edges, params.theta_res_deg, params.rho_res)?;
    extend_and_rotate(&hough_angle_pdf(&acc)?, img.north_offset, params.output_bins)
}
