use super::pdf::AngularPdf;
use crate::beamforming::{uniform_angles, Codebook};
use crate::channel::ArrayGeometry;
use crate::error::{Error, Result};
use crate::geometry::{circular_distance, wrap_angle, wrap_signed};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LloydMaxParams {
    /// Stop once the distortion changes by less than this (rad²).
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for LloydMaxParams {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            max_iter: 500,
        }
    }
}

/// Converged quantizer.
#[derive(Debug, Clone, PartialEq)]
pub struct LloydMax {
    /// Beam angles, most probable cell first.
    pub angles: Vec<f64>,
    /// Probability mass of each cell, aligned with `angles`.
    pub cell_masses: Vec<f64>,
    /// Mean squared error before the first update and after each iteration.
    pub distortion_history: Vec<f64>,
    pub converged: bool,
}

impl LloydMax {
    pub fn codebook(&self, geom: &ArrayGeometry) -> Result<Codebook> {
        Codebook::from_angles(self.angles.clone(), geom)
    }

    pub fn distortion(&self) -> f64 {
        *self.distortion_history.last().expect("history has the initial entry")
    }
}

fn nearest(centroids: &[f64], x: f64) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, &c) in centroids.iter().enumerate() {
        let d = circular_distance(x, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Mean squared circular error of quantizing the PDF's bin centers to the
/// nearest of `angles`.
pub fn quantization_mse(pdf: &AngularPdf, angles: &[f64]) -> f64 {
    pdf.centers()
        .iter()
        .zip(pdf.masses())
        .filter(|(_, &m)| m > 0.0)
        .map(|(&x, &m)| m * nearest(angles, x).1.powi(2))
        .sum()
}

/// Minimum-MSE placement of `depth` beams on the circle.
///
/// The PDF is treated as point masses at its bin centers. Cells are
/// nearest-centroid arcs; each centroid moves to the mean of its cell,
/// measured as signed offsets from the current centroid so that cells
/// straddling 0 average correctly. Starts from the uniform grid.
pub fn lloyd_max(pdf: &AngularPdf, depth: usize, params: &LloydMaxParams) -> Result<LloydMax> {
    if depth == 0 {
        return Err(Error::InvalidParameter("codebook depth must be ≥ 1".into()));
    }
    if !pdf.is_full_circle() {
        return Err(Error::InvalidParameter("PDF must cover the full circle".into()));
    }
    let support: Vec<(f64, f64)> = pdf
        .centers()
        .into_iter()
        .zip(pdf.masses().iter().copied())
        .filter(|&(_, m)| m > 0.0)
        .collect();
    if support.len() < depth {
        return Err(Error::DegeneratePdf(format!(
            "{} bins carry mass, fewer than the {depth} requested beams",
            support.len()
        )));
    }

    let mut centroids = uniform_angles(depth);
    let mut history = vec![quantization_mse(pdf, &centroids)];
    let mut converged = false;
    for _ in 0..params.max_iter {
        let mut shift = vec![0.0; depth];
        let mut mass = vec![0.0; depth];
        for &(x, m) in &support {
            let (j, _) = nearest(&centroids, x);
            shift[j] += m * wrap_signed(x - centroids[j]);
            mass[j] += m;
        }
        for j in 0..depth {
            // empty cells keep their centroid
            if mass[j] > 0.0 {
                centroids[j] = wrap_angle(centroids[j] + shift[j] / mass[j]);
            }
        }
        let d = quantization_mse(pdf, &centroids);
        let prev = *history.last().expect("nonempty");
        history.push(d);
        if (prev - d).abs() < params.tolerance {
            converged = true;
            break;
        }
    }

    let mut mass = vec![0.0; depth];
    for &(x, m) in &support {
        mass[nearest(&centroids, x).0] += m;
    }
    let key: Vec<i64> = mass.iter().map(|m| (m * 1e12).round() as i64).collect();
    let mut order: Vec<usize> = (0..depth).collect();
    order.sort_by(|&a, &b| key[b].cmp(&key[a]).then(centroids[a].total_cmp(&centroids[b])));
    Ok(LloydMax {
        angles: order.iter().map(|&j| centroids[j]).collect(),
        cell_masses: order.iter().map(|&j| mass[j]).collect(),
        distortion_history: history,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn uniform_pdf_is_a_fixed_point() {
        // bin edges on the uniform grid so no bin center ties between cells
        let pdf = AngularPdf::new(0.0, TAU / 64.0, vec![1.0; 64]).unwrap();
        for k in [1, 2, 4, 8, 16, 32] {
            let q = lloyd_max(&pdf, k, &LloydMaxParams::default()).unwrap();
            let a = sorted(q.angles.clone());
            for i in 1..k {
                assert!((a[i] - a[i - 1] - TAU / k as f64).abs() < 1e-9, "depth {k}");
            }
            assert!(circular_distance(a[0], 0.0) < 1e-9, "depth {k}");
            assert!(q.converged);
        }
    }

    #[test]
    fn two_point_masses() {
        let mut w = vec![0.0; 360];
        w[10] = 0.5;
        w[200] = 0.5;
        let pdf = AngularPdf::centered_circle(w).unwrap();
        let q = lloyd_max(&pdf, 2, &LloydMaxParams::default()).unwrap();
        let deg: Vec<f64> = sorted(q.angles.clone()).iter().map(|a| a.to_degrees()).collect();
        assert!((deg[0] - 10.0).abs() < 1e-9 && (deg[1] - 200.0).abs() < 1e-9, "{deg:?}");
        assert!(q.distortion() < 1e-20);
    }

    #[test]
    fn cell_straddling_zero_averages_across_wrap() {
        let mut w = vec![0.0; 360];
        w[355] = 1.0;
        w[5] = 1.0;
        w[180] = 1.0;
        let pdf = AngularPdf::centered_circle(w).unwrap();
        let q = lloyd_max(&pdf, 2, &LloydMaxParams::default()).unwrap();
        assert!(circular_distance(q.angles[0], 0.0) < 1e-9, "{:?}", q.angles);
        assert!((q.cell_masses[0] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_support_bins() {
        let mut w = vec![0.0; 64];
        w[3] = 1.0;
        let pdf = AngularPdf::centered_circle(w).unwrap();
        assert!(matches!(
            lloyd_max(&pdf, 2, &LloydMaxParams::default()),
            Err(Error::DegeneratePdf(_))
        ));
        assert!(lloyd_max(&pdf, 1, &LloydMaxParams::default()).is_ok());
    }

    #[test]
    fn ordered_by_cell_mass() {
        let mut w = vec![0.01; 72];
        w[10] = 5.0;
        w[40] = 2.0;
        let pdf = AngularPdf::centered_circle(w).unwrap();
        let q = lloyd_max(&pdf, 8, &LloydMaxParams::default()).unwrap();
        for p in q.cell_masses.windows(2) {
            assert!(p[0] >= p[1]);
        }
        assert!((q.cell_masses.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(circular_distance(q.angles[0], 50f64.to_radians()) < 5f64.to_radians());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn descent_and_beats_uniform(
            weights in proptest::collection::vec(0.0..1.0f64, 72),
            spikes in proptest::collection::vec((0usize..72, 1.0..20.0f64), 0..4),
            depth in 1usize..19,
        ) {
            let mut w = weights;
            for (i, s) in spikes {
                w[i] += s;
            }
            let pdf = AngularPdf::centered_circle(w).unwrap();
            let q = lloyd_max(&pdf, depth, &LloydMaxParams::default()).unwrap();
            for p in q.distortion_history.windows(2) {
                prop_assert!(p[1] <= p[0] + 1e-15);
            }
            prop_assert!(q.distortion() <= quantization_mse(&pdf, &uniform_angles(depth)) + 1e-15);
            prop_assert_eq!(q.angles.len(), depth);
            prop_assert!(q.angles.iter().all(|a| (0.0..TAU).contains(a)));
        }
    }
}
