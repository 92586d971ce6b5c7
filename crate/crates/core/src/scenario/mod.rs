//! World geometry, vehicle trajectories and the GPS error model.

mod map;
mod noise;
mod synthetic;
mod trace;

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{compass_bearing, wrap_angle, Point};

pub use map::{load_map, save_map, Aabb, Obstacle, ObstacleKind, ScenarioMap, WallSegment};
pub use noise::{sample_measured_position, NoisyPositions, PositionNoiseModel, PositionSampler};
pub use synthetic::{generate_synthetic_scenario, SyntheticKind, SyntheticParams};
pub use trace::{load_traces, save_traces, VehicleId, VehicleTrace, DEFAULT_TIMESTEP};

/// Antenna mounting height above the vehicle roof, meters.
pub const ANTENNA_ROOF_OFFSET: f64 = 0.1;

/// A vehicle's planar state at one timestep.
///
/// `heading` is clockwise from north and always lies in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub speed: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, heading: f64, speed: f64) -> Result<Self> {
        if !(speed >= 0.0) {
            return Err(Error::InvalidParameter(format!("speed must be >= 0, got {speed}")));
        }
        if !x.is_finite() || !y.is_finite() || !heading.is_finite() {
            return Err(Error::InvalidParameter("non-finite pose".into()));
        }
        Ok(Self {
            x,
            y,
            heading: wrap_angle(heading),
            speed,
        })
    }

    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }

    /// Same heading and speed, different position.
    pub fn moved_to(&self, p: Point) -> Pose {
        Pose {
            x: p.x,
            y: p.y,
            ..*self
        }
    }
}

/// Clockwise angle from the observer's heading to the observer→target ray.
pub fn relative_bearing(observer: &Pose, target: Point) -> Result<f64> {
    let global = compass_bearing(observer.position(), target)
        .ok_or_else(|| Error::DegenerateGeometry("target coincides with observer position".into()))?;
    Ok(wrap_angle(global - observer.heading))
}

/// All unordered pairs of vehicles present at timestep `t` within
/// `max_range` of each other, ordered lexicographically by id.
pub fn enumerate_link_pairs(traces: &[VehicleTrace], t: u64, max_range: f64) -> Vec<(VehicleId, VehicleId)> {
    let mut present: Vec<(&VehicleId, Point)> = traces
        .iter()
        .filter_map(|tr| tr.pose_at(t).map(|p| (&tr.vehicle_id, p.position())))
        .collect();
    present.sort_by(|a, b| a.0.cmp(b.0));

    let mut pairs = Vec::new();
    for i in 0..present.len() {
        for j in (i + 1)..present.len() {
            if present[i].1.distance(present[j].1) <= max_range {
                pairs.push((present[i].0.clone(), present[j].0.clone()));
            }
        }
    }
    pairs
}

/// Global bearing recovered from a relative bearing and the observer heading.
pub fn global_bearing(observer: &Pose, relative: f64) -> f64 {
    (relative + observer.heading).rem_euclid(TAU)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn pose(x: f64, y: f64, h: f64) -> Pose {
        Pose::new(x, y, h, 0.0).unwrap()
    }

    #[test]
    fn pose_normalizes_heading_and_rejects_negative_speed() {
        assert!((pose(0.0, 0.0, -FRAC_PI_2).heading - 1.5 * PI).abs() < 1e-15);
        assert_eq!(pose(0.0, 0.0, TAU).heading, 0.0);
        assert!(Pose::new(0.0, 0.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn relative_bearing_examples() {
        let north = pose(0.0, 0.0, 0.0);
        assert_eq!(relative_bearing(&north, Point::new(0.0, 10.0)).unwrap(), 0.0);
        assert!((relative_bearing(&north, Point::new(10.0, 0.0)).unwrap() - FRAC_PI_2).abs() < 1e-15);
        let east = pose(0.0, 0.0, FRAC_PI_2);
        assert!((relative_bearing(&east, Point::new(0.0, 10.0)).unwrap() - 1.5 * PI).abs() < 1e-15);
        assert!(relative_bearing(&north, Point::new(0.0, 0.0)).is_err());
    }

    fn trace(id: &str, x: f64, y: f64) -> VehicleTrace {
        VehicleTrace::new(VehicleId::from(id), vec![(0, pose(x, y, 0.0))], DEFAULT_TIMESTEP).unwrap()
    }

    #[test]
    fn link_pairs_by_range() {
        let tr = vec![trace("a", 0.0, 0.0), trace("b", 50.0, 0.0)];
        assert_eq!(enumerate_link_pairs(&tr, 0, 100.0).len(), 1);
        let tr = vec![trace("a", 0.0, 0.0), trace("b", 150.0, 0.0)];
        assert!(enumerate_link_pairs(&tr, 0, 100.0).is_empty());
        // absent timestep
        assert!(enumerate_link_pairs(&tr, 3, 1000.0).is_empty());
    }

    #[test]
    fn co_located_vehicles_form_all_pairs() {
        let ids = ["d", "b", "a", "c"];
        let tr: Vec<_> = ids.iter().map(|id| trace(id, 5.0, 5.0)).collect();
        let pairs = enumerate_link_pairs(&tr, 0, 1.0);
        // brute force: every i<j over the sorted ids
        let mut sorted = ids.to_vec();
        sorted.sort();
        let mut expected = Vec::new();
        for i in 0..sorted.len() {
            for j in (i + 1)..sorted.len() {
                expected.push((VehicleId::from(sorted[i]), VehicleId::from(sorted[j])));
            }
        }
        assert_eq!(pairs, expected);
        assert_eq!(pairs.len(), 6);
    }

    proptest! {
        #[test]
        fn relative_plus_heading_is_global(
            ox in -500.0..500.0f64, oy in -500.0..500.0f64, h in 0.0..TAU,
            tx in -500.0..500.0f64, ty in -500.0..500.0f64,
        ) {
            prop_assume!((ox - tx).hypot(oy - ty) > 1e-6);
            let o = pose(ox, oy, h);
            let rel = relative_bearing(&o, Point::new(tx, ty)).unwrap();
            prop_assert!((0.0..TAU).contains(&rel));
            let global = compass_bearing(o.position(), Point::new(tx, ty)).unwrap();
            let d = crate::geometry::circular_distance(global_bearing(&o, rel), global);
            prop_assert!(d < 1e-9);
        }
    }
}
