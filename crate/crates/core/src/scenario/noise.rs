use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::VehicleId;
use crate::error::{Error, Result};
use crate::geometry::Point;

/// Axis-independent Gaussian GPS error, `e ~ N(0, sigma_p^2 I)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositionNoiseModel {
    pub sigma_p: f64,
    pub seed: u64,
}

impl PositionNoiseModel {
    pub fn new(sigma_p: f64, seed: u64) -> Result<Self> {
        if !(sigma_p >= 0.0) || !sigma_p.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sigma_p must be finite and >= 0, got {sigma_p}"
            )));
        }
        Ok(Self { sigma_p, seed })
    }

    pub fn sampler(&self) -> PositionSampler {
        PositionSampler::new(*self)
    }
}

/// Sequential noise stream. Identical seeds and query sequences reproduce
/// identical draws; not meant to be shared between threads.
#[derive(Debug, Clone)]
pub struct PositionSampler {
    sigma_p: f64,
    rng: ChaCha8Rng,
}

impl PositionSampler {
    pub fn new(model: PositionNoiseModel) -> Self {
        Self {
            sigma_p: model.sigma_p,
            rng: ChaCha8Rng::seed_from_u64(model.seed),
        }
    }

    fn offset(&mut self) -> (f64, f64) {
        gaussian_pair(self.sigma_p, &mut self.rng)
    }
}

fn gaussian_pair(sigma: f64, rng: &mut ChaCha8Rng) -> (f64, f64) {
    if sigma == 0.0 {
        return (0.0, 0.0);
    }
    let n = Normal::new(0.0, sigma).expect("sigma validated");
    (n.sample(rng), n.sample(rng))
}

/// Adds one draw of GPS error to `true_pos`.
pub fn sample_measured_position(true_pos: Point, sampler: &mut PositionSampler) -> Point {
    let (ex, ey) = sampler.offset();
    Point::new(true_pos.x + ex, true_pos.y + ey)
}

/// Measured positions keyed by `(vehicle, timestep)`.
///
/// Each key maps to its own RNG stream derived from the model seed, so the
/// transmitter and receiver of every link see the same noisy position for a
/// vehicle within a timestep, independent of query order or thread.
#[derive(Debug, Clone, Copy)]
pub struct NoisyPositions {
    model: PositionNoiseModel,
}

impl NoisyPositions {
    pub fn new(model: PositionNoiseModel) -> Self {
        Self { model }
    }

    pub fn model(&self) -> PositionNoiseModel {
        self.model
    }

    pub fn measured(&self, vehicle: &VehicleId, t: u64, true_pos: Point) -> Point {
        let mut rng = ChaCha8Rng::seed_from_u64(key_seed(self.model.seed, vehicle, t));
        let (ex, ey) = gaussian_pair(self.model.sigma_p, &mut rng);
        Point::new(true_pos.x + ex, true_pos.y + ey)
    }
}

// FNV-1a over the id, folded with the seed and timestep through a
// splitmix64 finalizer. Stable across platforms and toolchains.
fn key_seed(seed: u64, vehicle: &VehicleId, t: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in vehicle.as_str().bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix(splitmix(seed ^ h) ^ t)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn four_meter_noise_has_four_meter_std() {
        let mut s = PositionNoiseModel::new(4.0, 11).unwrap().sampler();
        let n = 100_000;
        let draws: Vec<Point> = (0..n)
            .map(|_| sample_measured_position(Point::new(10.0, -3.0), &mut s))
            .collect();
        for axis in [0, 1] {
            let v: Vec<f64> = draws
                .iter()
                .map(|p| if axis == 0 { p.x - 10.0 } else { p.y + 3.0 })
                .collect();
            let mean = v.iter().sum::<f64>() / n as f64;
            let var = v.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let std = var.sqrt();
            assert!((3.9..=4.1).contains(&std), "axis {axis} std {std}");
        }
    }

    #[test]
    fn fixed_seed_is_bitwise_reproducible() {
        let m = PositionNoiseModel::new(2.5, 99).unwrap();
        let run = || {
            let mut s = m.sampler();
            (0..100)
                .map(|i| sample_measured_position(Point::new(i as f64, 0.0), &mut s))
                .map(|p| (p.x.to_bits(), p.y.to_bits()))
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn keyed_draws_are_order_independent() {
        let np = NoisyPositions::new(PositionNoiseModel::new(4.0, 5).unwrap());
        let a = VehicleId::from("a");
        let p = Point::new(1.0, 2.0);
        let first = np.measured(&a, 3, p);
        let _ = np.measured(&VehicleId::from("b"), 3, p);
        assert_eq!(np.measured(&a, 3, p), first);
        assert_ne!(np.measured(&a, 4, p), first);
    }

    #[test]
    fn negative_sigma_rejected() {
        assert!(PositionNoiseModel::new(-1.0, 0).is_err());
    }

    proptest! {
        #[test]
        fn zero_sigma_is_identity(x in -1e4..1e4f64, y in -1e4..1e4f64, seed: u64) {
            let m = PositionNoiseModel::new(0.0, seed).unwrap();
            let mut s = m.sampler();
            prop_assert_eq!(sample_measured_position(Point::new(x, y), &mut s), Point::new(x, y));
            let np = NoisyPositions::new(m);
            prop_assert_eq!(np.measured(&VehicleId::from("v"), seed, Point::new(x, y)), Point::new(x, y));
        }
    }
}
