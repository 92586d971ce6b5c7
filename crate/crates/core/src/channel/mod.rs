//! Geometric narrowband MIMO channel between two vehicles.

mod array;

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, Segment};
use crate::scenario::{relative_bearing, Pose, ScenarioMap, ANTENNA_ROOF_OFFSET};

pub use array::{element_response, steering_vector, wavelength_for, ArrayGeometry, SPEED_OF_LIGHT};

pub type C64 = nalgebra::Complex<f64>;

/// Free-space LoS path loss in dB, distance in meters and frequency in GHz.
pub fn pathloss_los(distance: f64, freq_ghz: f64) -> Result<f64> {
    if !(distance > 0.0) || !(freq_ghz > 0.0) {
        return Err(Error::Domain(format!(
            "path loss needs positive distance and frequency, got d={distance}, f={freq_ghz}"
        )));
    }
    Ok(32.4 + 20.0 * distance.log10() + 20.0 * freq_ghz.log10())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathKind {
    Los,
    Reflected,
}

/// One propagation path. Angles are relative to each vehicle's heading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathComponent {
    pub aod_az: f64,
    pub aod_el: f64,
    pub aoa_az: f64,
    pub aoa_el: f64,
    pub amplitude: C64,
    pub kind: PathKind,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PropagationConfig {
    pub carrier_ghz: f64,
    /// Extra attenuation per bounce, dB.
    pub reflection_loss_db: f64,
    pub include_reflections: bool,
    /// Vehicle roof height; antennas sit slightly above it.
    pub vehicle_height: f64,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self {
            carrier_ghz: 28.0,
            reflection_loss_db: 6.0,
            include_reflections: true,
            vehicle_height: 1.5,
        }
    }
}

impl PropagationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_ghz > 0.0) {
            return Err(Error::InvalidParameter("carrier frequency must be > 0".into()));
        }
        if !(self.reflection_loss_db >= 0.0) {
            return Err(Error::InvalidParameter("reflection loss must be >= 0".into()));
        }
        Ok(())
    }

    pub fn antenna_height(&self) -> f64 {
        self.vehicle_height + ANTENNA_ROOF_OFFSET
    }

    pub fn wavelength(&self) -> f64 {
        wavelength_for(self.carrier_ghz)
    }
}

fn blocked_except(map: &ScenarioMap, a: Point, b: Point, antenna_height: f64, skip: Option<usize>) -> bool {
    let link = Segment::new(a, b);
    map.wall_segments()
        .iter()
        .enumerate()
        .filter(|(i, w)| Some(*i) != skip && w.height > antenna_height)
        .any(|(_, w)| link.open_intersects(&w.segment))
}

/// True when the open segment between the antennas crosses any wall of an
/// obstacle taller than the antennas.
pub fn los_blocked(map: &ScenarioMap, p_tx: Point, p_rx: Point, antenna_height: f64) -> Result<bool> {
    if p_tx == p_rx {
        return Err(Error::DegenerateGeometry("coincident link endpoints".into()));
    }
    Ok(blocked_except(map, p_tx, p_rx, antenna_height, None))
}

fn path_amplitude(length: f64, extra_loss_db: f64, cfg: &PropagationConfig) -> Result<C64> {
    let pl = pathloss_los(length, cfg.carrier_ghz)? + extra_loss_db;
    let phase = (-TAU * length / cfg.wavelength()).rem_euclid(TAU);
    Ok(C64::from_polar(10f64.powf(-pl / 20.0), phase))
}

/// LoS plus first-order specular reflections between two vehicles.
///
/// An empty result means every path is blocked.
pub fn enumerate_paths(map: &ScenarioMap, tx: &Pose, rx: &Pose, cfg: &PropagationConfig) -> Result<Vec<PathComponent>> {
    let (pt, pr) = (tx.position(), rx.position());
    if pt == pr {
        return Err(Error::DegenerateGeometry("coincident link endpoints".into()));
    }
    let h = cfg.antenna_height();
    let mut paths = Vec::new();

    if !blocked_except(map, pt, pr, h, None) {
        let length = pt.distance(pr);
        paths.push(PathComponent {
            aod_az: relative_bearing(tx, pr)?,
            aod_el: 0.0,
            aoa_az: relative_bearing(rx, pt)?,
            aoa_el: 0.0,
            amplitude: path_amplitude(length, 0.0, cfg)?,
            kind: PathKind::Los,
            length,
        });
    }

    if cfg.include_reflections {
        for (i, wall) in map.wall_segments().iter().enumerate() {
            if wall.height <= h {
                continue;
            }
            let seg = &wall.segment;
            let (st, sr) = (seg.side(pt), seg.side(pr));
            // both antennas strictly on the same side of the wall line
            if st * sr <= 0.0 {
                continue;
            }
            let image = seg.mirror(pt);
            let Some(q) = Segment::new(image, pr).crossing_point(seg) else {
                continue;
            };
            if q == pt || q == pr {
                continue;
            }
            if blocked_except(map, pt, q, h, Some(i)) || blocked_except(map, q, pr, h, Some(i)) {
                continue;
            }
            let length = pt.distance(q) + q.distance(pr);
            paths.push(PathComponent {
                aod_az: relative_bearing(tx, q)?,
                aod_el: 0.0,
                aoa_az: relative_bearing(rx, q)?,
                aoa_el: 0.0,
                amplitude: path_amplitude(length, cfg.reflection_loss_db, cfg)?,
                kind: PathKind::Reflected,
                length,
            });
        }
    }
    Ok(paths)
}

/// Dense channel matrix together with the paths it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    pub entries: DMatrix<C64>,
    pub paths: Vec<PathComponent>,
    /// Array the paths were projected onto; `None` for matrices not built
    /// from paths.
    pub geometry: Option<ArrayGeometry>,
}

impl ChannelMatrix {
    /// Square matrix with no path decomposition.
    pub fn from_entries(entries: DMatrix<C64>) -> Self {
        Self {
            entries,
            paths: Vec::new(),
            geometry: None,
        }
    }

    pub fn n_antennas(&self) -> usize {
        self.entries.nrows()
    }

    pub fn has_los(&self) -> bool {
        self.paths.iter().any(|p| p.kind == PathKind::Los)
    }

    /// The strongest path, if any.
    pub fn dominant_path(&self) -> Option<&PathComponent> {
        self.paths
            .iter()
            .max_by(|a, b| a.amplitude.norm().total_cmp(&b.amplitude.norm()))
    }

    /// Stable 64-bit fingerprint of the matrix entries, used to check that
    /// competing strategies saw the same realization.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for c in self.entries.iter() {
            for word in [c.re.to_bits(), c.im.to_bits()] {
                for byte in word.to_le_bytes() {
                    h ^= u64::from(byte);
                    h = h.wrapping_mul(0x0000_0100_0000_01b3);
                }
            }
        }
        h
    }
}

/// `H = sum_p alpha_p a_R(aoa_p) a_T(aod_p)^H`.
pub fn assemble_channel(paths: &[PathComponent], geom: &ArrayGeometry) -> Result<ChannelMatrix> {
    if paths.is_empty() {
        return Err(Error::EmptyPaths);
    }
    let n = geom.n_elements();
    let mut entries = DMatrix::<C64>::zeros(n, n);
    for p in paths {
        let a_r: DVector<C64> = steering_vector(geom, p.aoa_az, p.aoa_el) * p.amplitude;
        let a_t = steering_vector(geom, p.aod_az, p.aod_el);
        entries.ger(C64::new(1.0, 0.0), &a_r, &a_t.conjugate(), C64::new(1.0, 0.0));
    }
    Ok(ChannelMatrix {
        entries,
        paths: paths.to_vec(),
        geometry: Some(*geom),
    })
}
