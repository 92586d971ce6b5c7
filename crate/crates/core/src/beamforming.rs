//! Beamformers, codebooks, link SNR and the SVD upper bound.

use std::f64::consts::TAU;
use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::channel::{steering_vector, ArrayGeometry, ChannelMatrix, C64};
use crate::error::{Error, Result};
use crate::geometry::{circular_distance, wrap_angle};

/// Unit-norm complex antenna weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Beamformer {
    weights: DVector<C64>,
}

impl Beamformer {
    /// Normalizes `weights` to unit norm.
    pub fn from_weights(weights: DVector<C64>) -> Result<Self> {
        let norm = weights.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidParameter("beamformer weights have zero norm".into()));
        }
        Ok(Self {
            weights: weights.unscale(norm),
        })
    }

    pub fn weights(&self) -> &DVector<C64> {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Same beam with every weight multiplied by `e^{j phase}`.
    pub fn rotated(&self, phase: f64) -> Self {
        Self {
            weights: self.weights.map(|w| w * C64::from_polar(1.0, phase)),
        }
    }
}

/// Matched beam `a(az, el) / sqrt(N_a)`.
pub fn beamformer_for_angle(geom: &ArrayGeometry, az: f64, el: f64) -> Beamformer {
    let n = geom.n_elements() as f64;
    Beamformer {
        weights: steering_vector(geom, az, el).unscale(n.sqrt()),
    }
}

/// Transmit power and receiver noise floor, both in dBm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinkBudget {
    pub eirp_dbm: f64,
    pub noise_dbm: f64,
    pub bandwidth_mhz: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self {
            eirp_dbm: 43.0,
            noise_dbm: -85.5,
            bandwidth_mhz: 400.0,
        }
    }
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth_mhz > 0.0) {
            return Err(Error::InvalidParameter("bandwidth must be > 0".into()));
        }
        if !self.eirp_dbm.is_finite() || !self.noise_dbm.is_finite() {
            return Err(Error::InvalidParameter("non-finite power level".into()));
        }
        Ok(())
    }

    /// SNR in dB for a beamformed channel response magnitude `|w^H H f|`.
    ///
    /// `sigma_s^2 / sigma_n^2` is the EIRP-to-noise ratio; array gain enters
    /// only through the response, divided by `N_a`. A zero response yields
    /// negative infinity.
    pub fn snr_db(&self, gain: f64, n_antennas: usize) -> f64 {
        if gain == 0.0 {
            return f64::NEG_INFINITY;
        }
        20.0 * gain.log10() - 10.0 * (n_antennas as f64).log10() + self.eirp_dbm - self.noise_dbm
    }
}

fn check_dims(h: &ChannelMatrix, len: usize) -> Result<()> {
    if h.entries.ncols() != len || h.entries.nrows() != len {
        return Err(Error::DimensionMismatch {
            expected: h.entries.ncols(),
            got: len,
        });
    }
    Ok(())
}

/// `|w^H H f|`.
pub fn beam_gain(w: &Beamformer, h: &ChannelMatrix, f: &Beamformer) -> Result<f64> {
    check_dims(h, w.len())?;
    check_dims(h, f.len())?;
    Ok(w.weights.dotc(&(&h.entries * &f.weights)).norm())
}

pub fn snr(w: &Beamformer, h: &ChannelMatrix, f: &Beamformer, budget: &LinkBudget) -> Result<f64> {
    Ok(budget.snr_db(beam_gain(w, h, f)?, h.n_antennas()))
}

/// Receive beam maximizing `|w^H H f|`; ties go to the lowest index.
pub fn best_rx_beam(h: &ChannelMatrix, f: &Beamformer, rx_codebook: &Codebook) -> Result<(usize, f64)> {
    check_dims(h, f.len())?;
    let hf = &h.entries * &f.weights;
    let mut best = (0, f64::NEG_INFINITY);
    for (i, w) in rx_codebook.beamformers.iter().enumerate() {
        check_dims(h, w.len())?;
        let g = w.weights.dotc(&hf).norm();
        if g > best.1 {
            best = (i, g);
        }
    }
    Ok(best)
}

/// `|w_j^H H f_i|` for every receive beam `j` (rows) and transmit beam `i`
/// (columns).
pub fn pair_gains(h: &ChannelMatrix, tx: &Codebook, rx: &Codebook) -> Result<DMatrix<f64>> {
    let n = h.n_antennas();
    if tx.antennas() != n || rx.antennas() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if tx.antennas() != n {
                tx.antennas()
            } else {
                rx.antennas()
            },
        });
    }
    let f = tx.weight_matrix();
    let w = rx.weight_matrix();
    let factorable = !h.paths.is_empty() && h.geometry.as_ref().is_some_and(|g| g == &tx.geom && g == &rx.geom);
    if !factorable {
        let response = w.adjoint() * (&h.entries * f);
        return Ok(response.map(|c| c.norm()));
    }
    // sum over paths of alpha (W^H a_R)(a_T^H F): rank-one updates instead
    // of two dense products
    let mut response = DMatrix::<C64>::zeros(rx.depth(), tx.depth());
    for p in &h.paths {
        let a_r = steering_vector(&tx.geom, p.aoa_az, p.aoa_el);
        let a_t = steering_vector(&tx.geom, p.aod_az, p.aod_el);
        let left = w.ad_mul(&a_r) * p.amplitude;
        let right = f.ad_mul(&a_t).conjugate();
        response.ger(C64::new(1.0, 0.0), &left, &right, C64::new(1.0, 0.0));
    }
    Ok(response.map(|c| c.norm()))
}

/// Leading singular triplet of a channel.
#[derive(Debug, Clone)]
pub struct SvdOracle {
    pub f_opt: Beamformer,
    pub w_opt: Beamformer,
    pub sigma1: f64,
}

pub fn svd_oracle(h: &ChannelMatrix) -> Result<SvdOracle> {
    if h.entries.iter().all(|c| c.norm_sqr() == 0.0) {
        return Err(Error::ZeroMatrix);
    }
    match &h.geometry {
        Some(g) if !h.paths.is_empty() && h.paths.len() < h.n_antennas() => svd_from_paths(h, g),
        _ => svd_dense(&h.entries),
    }
}

fn svd_dense(entries: &DMatrix<C64>) -> Result<SvdOracle> {
    let svd = entries.clone().svd(true, true);
    let (lead, sigma1) = svd
        .singular_values
        .iter()
        .copied()
        .enumerate()
        .fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, s)| if s > acc.1 { (i, s) } else { acc },
        );
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^H");
    Ok(SvdOracle {
        w_opt: Beamformer::from_weights(u.column(lead).into_owned())?,
        f_opt: Beamformer::from_weights(v_t.row(lead).adjoint())?,
        sigma1,
    })
}

/// With `H = A_R D A_T^H` and thin QR factorizations `A = Q R`, the singular
/// triplets of `H` follow from the small core `R_R D R_T^H`.
fn svd_from_paths(h: &ChannelMatrix, geom: &ArrayGeometry) -> Result<SvdOracle> {
    let steer = |az_el: &dyn Fn(&crate::channel::PathComponent) -> (f64, f64)| {
        let cols: Vec<DVector<C64>> = h
            .paths
            .iter()
            .map(|p| {
                let (az, el) = az_el(p);
                steering_vector(geom, az, el)
            })
            .collect();
        DMatrix::from_columns(&cols).qr()
    };
    let qr_r = steer(&|p| (p.aoa_az, p.aoa_el));
    let qr_t = steer(&|p| (p.aod_az, p.aod_el));
    let d = DMatrix::from_diagonal(&DVector::from_iterator(
        h.paths.len(),
        h.paths.iter().map(|p| p.amplitude),
    ));
    let core = qr_r.r() * d * qr_t.r().adjoint();
    let small = svd_dense(&core)?;
    Ok(SvdOracle {
        w_opt: Beamformer::from_weights(qr_r.q() * small.w_opt.weights)?,
        f_opt: Beamformer::from_weights(qr_t.q() * small.f_opt.weights)?,
        sigma1: small.sigma1,
    })
}

/// Ordered azimuth beams; the order is the sweep order.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    angles: Vec<f64>,
    beamformers: Vec<Beamformer>,
    geom: ArrayGeometry,
}

impl Codebook {
    /// Elevation is fixed at zero.
    pub fn from_angles(angles: Vec<f64>, geom: &ArrayGeometry) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::InvalidParameter("codebook needs at least one beam".into()));
        }
        let angles: Vec<f64> = angles.into_iter().map(wrap_angle).collect();
        let beamformers = angles.iter().map(|&a| beamformer_for_angle(geom, a, 0.0)).collect();
        Ok(Self {
            angles,
            beamformers,
            geom: *geom,
        })
    }

    pub fn depth(&self) -> usize {
        self.angles.len()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn beamformers(&self) -> &[Beamformer] {
        &self.beamformers
    }

    pub fn antennas(&self) -> usize {
        self.beamformers[0].len()
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geom
    }

    /// Beam index closest to `angle` on the circle; ties go to the lowest
    /// index.
    pub fn nearest(&self, angle: f64) -> usize {
        let mut best = (0, f64::INFINITY);
        for (i, &a) in self.angles.iter().enumerate() {
            let d = circular_distance(a, angle);
            if d < best.1 - 1e-12 {
                best = (i, d);
            }
        }
        best.0
    }

    /// New codebook visiting `self`'s beams in `order`.
    pub fn reordered(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.depth()];
        for &i in order {
            if i >= self.depth() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidParameter("order is not a permutation".into()));
            }
        }
        if order.len() != self.depth() {
            return Err(Error::InvalidParameter("order is not a permutation".into()));
        }
        Ok(Self {
            angles: order.iter().map(|&i| self.angles[i]).collect(),
            beamformers: order.iter().map(|&i| self.beamformers[i].clone()).collect(),
            geom: self.geom,
        })
    }

    fn weight_matrix(&self) -> DMatrix<C64> {
        DMatrix::from_columns(&self.beamformers.iter().map(|b| b.weights.clone()).collect::<Vec<_>>())
    }

    /// Writes `order,angle_deg`.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "order,angle_deg")?;
        for (i, a) in self.angles.iter().enumerate() {
            writeln!(out, "{i},{}", a.to_degrees())?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn load_csv(path: impl AsRef<Path>, geom: &ArrayGeometry) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            order: usize,
            angle_deg: f64,
        }
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)?;
        let mut rows: Vec<Row> = rdr.deserialize().collect::<std::result::Result<_, _>>()?;
        rows.sort_by_key(|r| r.order);
        Self::from_angles(rows.into_iter().map(|r| r.angle_deg.to_radians()).collect(), geom)
    }
}

/// `{0, 2π/n, ..., (n-1)2π/n}`.
pub fn uniform_angles(n_beams: usize) -> Vec<f64> {
    (0..n_beams).map(|i| i as f64 * TAU / n_beams as f64).collect()
}

pub fn uniform_codebook(n_beams: usize, geom: &ArrayGeometry) -> Result<Codebook> {
    Codebook::from_angles(uniform_angles(n_beams), geom)
}

/// Number of azimuth beams needed for quantization step `theta_q`.
pub fn codebook_depth(theta_q: f64) -> Result<usize> {
    if !(theta_q > 0.0 && theta_q <= TAU + 1e-12) {
        return Err(Error::Domain(format!(
            "quantization step must be in (0, 2π], got {theta_q}"
        )));
    }
    // degree-valued steps rarely divide 2π exactly in binary; forgive the
    // last few ulps before rounding up
    let ratio = TAU / theta_q;
    Ok(((ratio - 1e-9).ceil() as usize).max(1))
}

/// Shannon spectral efficiency, bits/s/Hz.
pub fn spectral_efficiency(snr_db: f64) -> f64 {
    (1.0 + 10f64.powf(snr_db / 10.0)).log2()
}
