use std::f64::consts::{PI, TAU};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::C64;
use crate::error::{Error, Result};

/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn wavelength_for(carrier_ghz: f64) -> f64 {
    SPEED_OF_LIGHT / (carrier_ghz * 1e9)
}

/// Cylindrical array: `n_rings` stacked uniform circular arrays of
/// `n_per_ring` elements each.
///
/// Azimuth zero of the array frame is the vehicle heading; azimuths grow
/// clockwise like every other angle in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub n_rings: usize,
    pub n_per_ring: usize,
    pub radius: f64,
    pub ring_spacing: f64,
    pub wavelength: f64,
}

impl ArrayGeometry {
    pub fn new(n_rings: usize, n_per_ring: usize, radius: f64, ring_spacing: f64, wavelength: f64) -> Result<Self> {
        if n_rings == 0 || n_per_ring == 0 {
            return Err(Error::InvalidParameter("array needs at least one element".into()));
        }
        for (name, v) in [
            ("radius", radius),
            ("ring_spacing", ring_spacing),
            ("wavelength", wavelength),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(Self {
            n_rings,
            n_per_ring,
            radius,
            ring_spacing,
            wavelength,
        })
    }

    /// Half-wavelength ring spacing and a radius that puts neighbouring
    /// ring elements half a wavelength apart.
    pub fn half_wavelength(n_rings: usize, n_per_ring: usize, carrier_ghz: f64) -> Result<Self> {
        if !(carrier_ghz > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "carrier frequency must be > 0, got {carrier_ghz}"
            )));
        }
        let lambda = wavelength_for(carrier_ghz);
        let d = lambda / 2.0;
        let radius = if n_per_ring > 1 {
            d / (2.0 * (PI / n_per_ring as f64).sin())
        } else {
            d
        };
        Self::new(n_rings, n_per_ring, radius, d, lambda)
    }

    /// 4 rings of 16 elements at 28 GHz.
    pub fn reference() -> Self {
        Self::half_wavelength(4, 16, 28.0).expect("valid reference geometry")
    }

    pub fn n_elements(&self) -> usize {
        self.n_rings * self.n_per_ring
    }

    /// Angular position of element `m` (1-based) on its ring.
    pub fn element_angle(&self, m: usize) -> f64 {
        (2 * m - 1) as f64 * PI / self.n_per_ring as f64
    }
}

/// Response of element `m` (1..=N_c) on ring `n` (1..=N_v).
pub fn element_response(geom: &ArrayGeometry, m: usize, n: usize, az: f64, el: f64) -> Result<C64> {
    if m == 0 || m > geom.n_per_ring {
        return Err(Error::IndexOutOfRange {
            name: "m",
            value: m,
            max: geom.n_per_ring,
        });
    }
    if n == 0 || n > geom.n_rings {
        return Err(Error::IndexOutOfRange {
            name: "n",
            value: n,
            max: geom.n_rings,
        });
    }
    Ok(response_unchecked(geom, m, n, az, el))
}

fn response_unchecked(geom: &ArrayGeometry, m: usize, n: usize, az: f64, el: f64) -> C64 {
    let k = TAU / geom.wavelength;
    let ring = k * geom.radius * el.cos() * (az - geom.element_angle(m)).cos();
    let vertical = k * geom.ring_spacing * (n - 1) as f64 * el.sin();
    C64::from_polar(1.0, ring + vertical)
}

/// Array steering vector, ring-major: entry `(n-1) * N_c + (m-1)`.
pub fn steering_vector(geom: &ArrayGeometry, az: f64, el: f64) -> DVector<C64> {
    let nc = geom.n_per_ring;
    DVector::from_fn(geom.n_elements(), |i, _| {
        response_unchecked(geom, i % nc + 1, i / nc + 1, az, el)
    })
}
