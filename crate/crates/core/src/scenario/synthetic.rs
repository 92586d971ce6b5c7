//! Procedural crossroad, roundabout and highway scenarios.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::map::{Aabb, Obstacle, ObstacleKind, ScenarioMap};
use super::{Pose, VehicleId, VehicleTrace};
use crate::error::{Error, Result};
use crate::geometry::Point;

pub const URBAN_MAX_SPEED: f64 = 50.0 / 3.6;
pub const HIGHWAY_MAX_SPEED: f64 = 130.0 / 3.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SyntheticKind {
    Crossroad,
    Roundabout,
    Highway,
}

impl std::str::FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "crossroad" => Ok(Self::Crossroad),
            "roundabout" => Ok(Self::Roundabout),
            "highway" => Ok(Self::Highway),
            other => Err(Error::InvalidParameter(format!("unknown scenario kind {other:?}"))),
        }
    }
}

/// Knobs for the synthetic generators. Lengths in meters, speeds in m/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticParams {
    /// Half-length of each street arm (crossroad), half-length of the road
    /// (highway) or outer radius of the building ring (roundabout).
    pub extent: f64,
    /// Vehicles per arm (crossroad), per lane (highway) or on the ring
    /// (roundabout).
    pub vehicles_per_lane: usize,
    pub max_speed: f64,
    /// Lowest speed as a fraction of `max_speed`.
    pub min_speed_fraction: f64,
    pub n_steps: u64,
    pub timestep: f64,
    /// Lateral offset of a lane centre from the street axis.
    pub lane_offset: f64,
    pub street_width: f64,
    pub block_size: f64,
    pub block_gap: f64,
    /// Buildings per quadrant side (crossroad) or total (roundabout, highway).
    pub buildings: usize,
    pub building_height: f64,
    pub radius: f64,
    /// Lanes per direction (highway).
    pub lanes: usize,
    pub seed: u64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        Self::for_kind(SyntheticKind::Crossroad)
    }
}

impl SyntheticParams {
    pub fn for_kind(kind: SyntheticKind) -> Self {
        let base = Self {
            extent: 200.0,
            vehicles_per_lane: 4,
            max_speed: URBAN_MAX_SPEED,
            min_speed_fraction: 0.6,
            n_steps: 100,
            timestep: super::DEFAULT_TIMESTEP,
            lane_offset: 1.75,
            street_width: 20.0,
            block_size: 40.0,
            block_gap: 12.0,
            buildings: 3,
            building_height: 15.0,
            radius: 20.0,
            lanes: 2,
            seed: 0,
        };
        match kind {
            SyntheticKind::Crossroad => base,
            SyntheticKind::Roundabout => Self {
                extent: 80.0,
                vehicles_per_lane: 6,
                buildings: 4,
                ..base
            },
            SyntheticKind::Highway => Self {
                extent: 600.0,
                vehicles_per_lane: 5,
                max_speed: HIGHWAY_MAX_SPEED,
                min_speed_fraction: 0.7,
                buildings: 0,
                ..base
            },
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("extent", self.extent),
            ("max_speed", self.max_speed),
            ("timestep", self.timestep),
            ("street_width", self.street_width),
            ("block_size", self.block_size),
            ("building_height", self.building_height),
            ("radius", self.radius),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.n_steps == 0 || self.vehicles_per_lane == 0 || self.lanes == 0 {
            return Err(Error::InvalidParameter(
                "n_steps, vehicles_per_lane and lanes must be >= 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.min_speed_fraction) || self.lane_offset < 0.0 || self.block_gap < 0.0 {
            return Err(Error::InvalidParameter(
                "speed fraction or lane geometry out of range".into(),
            ));
        }
        Ok(())
    }
}

pub fn generate_synthetic_scenario(
    kind: SyntheticKind,
    params: &SyntheticParams,
) -> Result<(ScenarioMap, Vec<VehicleTrace>)> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    match kind {
        SyntheticKind::Crossroad => crossroad(params, &mut rng),
        SyntheticKind::Roundabout => roundabout(params, &mut rng),
        SyntheticKind::Highway => highway(params, &mut rng),
    }
}

fn speed(p: &SyntheticParams, rng: &mut ChaCha8Rng) -> f64 {
    p.max_speed * rng.gen_range(p.min_speed_fraction..=1.0)
}

/// A vehicle driving a straight lane of length `2 * half` through the
/// origin of its own lane axis, wrapping back to the start at the far end.
struct LaneRunner {
    /// unit direction of travel (east, north)
    dir: (f64, f64),
    /// point on the lane axis closest to the map origin
    anchor: Point,
    half: f64,
    s0: f64,
    speed: f64,
    heading: f64,
}

impl LaneRunner {
    fn pose(&self, time: f64) -> Result<Pose> {
        let s = (self.s0 + self.speed * time + self.half).rem_euclid(2.0 * self.half) - self.half;
        Pose::new(
            self.anchor.x + self.dir.0 * s,
            self.anchor.y + self.dir.1 * s,
            self.heading,
            self.speed,
        )
    }
}

fn run_lanes(runners: &[(String, LaneRunner)], p: &SyntheticParams) -> Result<Vec<VehicleTrace>> {
    runners
        .iter()
        .map(|(id, r)| {
            let samples = (0..p.n_steps)
                .map(|k| Ok((k, r.pose(k as f64 * p.timestep)?)))
                .collect::<Result<Vec<_>>>()?;
            VehicleTrace::new(VehicleId::from(id.clone()), samples, p.timestep)
        })
        .collect()
}

fn crossroad(p: &SyntheticParams, rng: &mut ChaCha8Rng) -> Result<(ScenarioMap, Vec<VehicleTrace>)> {
    let half_street = p.street_width / 2.0;
    let mut obstacles = Vec::new();
    // a grid of blocks in every quadrant, first row flush with the streets
    for (sx, sy) in [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)] {
        for i in 0..p.buildings {
            for j in 0..p.buildings {
                let x0 = half_street + i as f64 * (p.block_size + p.block_gap);
                let y0 = half_street + j as f64 * (p.block_size + p.block_gap);
                if x0 >= p.extent || y0 >= p.extent {
                    continue;
                }
                let (x1, y1) = ((x0 + p.block_size).min(p.extent), (y0 + p.block_size).min(p.extent));
                let (ax, bx) = (sx * x0, sx * x1);
                let (ay, by) = (sy * y0, sy * y1);
                obstacles.push(Obstacle::rectangle(
                    Point::new(ax.min(bx), ay.min(by)),
                    Point::new(ax.max(bx), ay.max(by)),
                    p.building_height,
                    ObstacleKind::Building,
                )?);
            }
        }
    }

    // arms named after where the vehicles enter; everyone drives on the right
    let arms = [
        ("n", PI, (0.0, -1.0), Point::new(-p.lane_offset, 0.0)),
        ("e", 1.5 * PI, (-1.0, 0.0), Point::new(0.0, p.lane_offset)),
        ("s", 0.0, (0.0, 1.0), Point::new(p.lane_offset, 0.0)),
        ("w", FRAC_PI_2, (1.0, 0.0), Point::new(0.0, -p.lane_offset)),
    ];
    let mut runners = Vec::new();
    for (name, heading, dir, anchor) in arms {
        for k in 0..p.vehicles_per_lane {
            // spread entry points over the approach half of the arm
            let frac = (k as f64 + rng.gen_range(0.2..0.8)) / p.vehicles_per_lane as f64;
            runners.push((
                format!("{name}{k:02}"),
                LaneRunner {
                    dir,
                    anchor,
                    half: p.extent,
                    s0: -p.extent * frac,
                    speed: speed(p, rng),
                    heading,
                },
            ));
        }
    }
    let traces = run_lanes(&runners, p)?;
    let bounds = Aabb {
        min: Point::new(-p.extent, -p.extent),
        max: Point::new(p.extent, p.extent),
    };
    Ok((ScenarioMap::new(obstacles).with_bounds(bounds), traces))
}

fn roundabout(p: &SyntheticParams, rng: &mut ChaCha8Rng) -> Result<(ScenarioMap, Vec<VehicleTrace>)> {
    let r = p.radius;
    let mut obstacles = Vec::new();
    // sparse buildings on the diagonals, well outside the ring
    for i in 0..p.buildings {
        let a = PI / 4.0 + TAU * i as f64 / p.buildings as f64;
        let c = Point::new(p.extent * a.sin(), p.extent * a.cos());
        let h = p.block_size / 2.0;
        obstacles.push(Obstacle::rectangle(
            Point::new(c.x - h, c.y - h),
            Point::new(c.x + h, c.y + h),
            p.building_height,
            ObstacleKind::Building,
        )?);
    }

    let mut traces = Vec::new();
    let n = p.vehicles_per_lane;
    for k in 0..n {
        let beta0 = TAU * (k as f64 + rng.gen_range(0.0..0.5)) / n as f64;
        let v = speed(p, rng);
        let omega = v / r;
        let samples = (0..p.n_steps)
            .map(|step| {
                // counter-clockwise travel: the compass angle of the
                // position decreases, heading is 90 degrees behind it
                let beta = beta0 - omega * step as f64 * p.timestep;
                Ok((step, Pose::new(r * beta.sin(), r * beta.cos(), beta - FRAC_PI_2, v)?))
            })
            .collect::<Result<Vec<_>>>()?;
        traces.push(VehicleTrace::new(
            VehicleId::from(format!("r{k:02}")),
            samples,
            p.timestep,
        )?);
    }
    let e = p.extent + p.block_size;
    let bounds = Aabb {
        min: Point::new(-e, -e),
        max: Point::new(e, e),
    };
    Ok((ScenarioMap::new(obstacles).with_bounds(bounds), traces))
}

fn highway(p: &SyntheticParams, rng: &mut ChaCha8Rng) -> Result<(ScenarioMap, Vec<VehicleTrace>)> {
    const LANE_WIDTH: f64 = 3.5;
    let mut obstacles = Vec::new();
    let road_half = p.lanes as f64 * LANE_WIDTH;
    for i in 0..p.buildings {
        let side = if i % 2 == 0 { 1.0 } else { -1.0 };
        let x = -p.extent + (i as f64 + 0.5) * 2.0 * p.extent / p.buildings as f64;
        let y0 = side * (road_half + 30.0);
        let y1 = side * (road_half + 30.0 + p.block_size);
        obstacles.push(Obstacle::rectangle(
            Point::new(x - p.block_size / 2.0, y0.min(y1)),
            Point::new(x + p.block_size / 2.0, y0.max(y1)),
            p.building_height,
            ObstacleKind::Building,
        )?);
    }

    let mut runners = Vec::new();
    for lane in 0..p.lanes {
        let offset = (lane as f64 + 0.5) * LANE_WIDTH;
        for (dir_name, heading, dir, y) in [
            ("e", FRAC_PI_2, (1.0, 0.0), -offset),
            ("w", 1.5 * PI, (-1.0, 0.0), offset),
        ] {
            // one speed per lane keeps spacing stable
            let v = speed(p, rng);
            for k in 0..p.vehicles_per_lane {
                let frac = (k as f64 + rng.gen_range(0.1..0.9)) / p.vehicles_per_lane as f64;
                runners.push((
                    format!("{dir_name}{lane}{k:02}"),
                    LaneRunner {
                        dir,
                        anchor: Point::new(0.0, y),
                        half: p.extent,
                        s0: -p.extent + 2.0 * p.extent * frac,
                        speed: v,
                        heading,
                    },
                ));
            }
        }
    }
    let traces = run_lanes(&runners, p)?;
    let bounds = Aabb {
        min: Point::new(-p.extent, -road_half),
        max: Point::new(p.extent, road_half),
    };
    Ok((ScenarioMap::new(obstacles).with_bounds(bounds), traces))
}
