use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{polygon_is_simple, Point, Segment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObstacleKind {
    Building,
    Foliage,
    Vehicle,
}

impl FromStr for ObstacleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "building" => Ok(Self::Building),
            "foliage" => Ok(Self::Foliage),
            "vehicle" => Ok(Self::Vehicle),
            other => Err(Error::InvalidParameter(format!("unknown obstacle kind {other:?}"))),
        }
    }
}

impl fmt::Display for ObstacleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Building => "building",
            Self::Foliage => "foliage",
            Self::Vehicle => "vehicle",
        })
    }
}

/// A static obstacle: simple polygon footprint extruded to `height`.
#[derive(Debug, Clone, PartialEq)]
pub struct Obstacle {
    footprint: Vec<Point>,
    pub height: f64,
    pub kind: ObstacleKind,
}

impl Obstacle {
    /// Builds an obstacle, reordering the vertices counter-clockwise.
    pub fn new(mut footprint: Vec<Point>, height: f64, kind: ObstacleKind) -> Result<Self> {
        if footprint.len() < 3 {
            return Err(Error::InvalidParameter(format!(
                "obstacle polygon needs >= 3 vertices, got {}",
                footprint.len()
            )));
        }
        if !(height > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "obstacle height must be > 0, got {height}"
            )));
        }
        if !polygon_is_simple(&footprint) {
            return Err(Error::InvalidParameter("obstacle polygon is not simple".into()));
        }
        if signed_area(&footprint) < 0.0 {
            footprint.reverse();
        }
        Ok(Self {
            footprint,
            height,
            kind,
        })
    }

    /// Axis-aligned rectangle building.
    pub fn rectangle(min: Point, max: Point, height: f64, kind: ObstacleKind) -> Result<Self> {
        Self::new(
            vec![min, Point::new(max.x, min.y), max, Point::new(min.x, max.y)],
            height,
            kind,
        )
    }

    pub fn footprint(&self) -> &[Point] {
        &self.footprint
    }

    pub fn edges(&self) -> impl Iterator<Item = Segment> + '_ {
        let n = self.footprint.len();
        (0..n).map(move |i| Segment::new(self.footprint[i], self.footprint[(i + 1) % n]))
    }
}

fn signed_area(p: &[Point]) -> f64 {
    let n = p.len();
    (0..n)
        .map(|i| {
            let (a, b) = (p[i], p[(i + 1) % n]);
            a.x * b.y - b.x * a.y
        })
        .sum::<f64>()
        / 2.0
}

/// One polygon edge tagged with the obstacle it belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallSegment {
    pub segment: Segment,
    pub obstacle: usize,
    pub height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point,
    pub max: Point,
}

impl Aabb {
    fn around(points: impl IntoIterator<Item = Point>) -> Option<Self> {
        points.into_iter().fold(None, |acc, p| {
            Some(match acc {
                None => Aabb { min: p, max: p },
                Some(b) => Aabb {
                    min: Point::new(b.min.x.min(p.x), b.min.y.min(p.y)),
                    max: Point::new(b.max.x.max(p.x), b.max.y.max(p.y)),
                },
            })
        })
    }

    pub fn union(self, other: Aabb) -> Aabb {
        Aabb::around([self.min, self.max, other.min, other.max]).expect("non-empty")
    }
}

/// Obstacles plus the derived wall segments used for blockage and
/// reflection tests.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScenarioMap {
    obstacles: Vec<Obstacle>,
    walls: Vec<WallSegment>,
    bounds: Option<Aabb>,
}

impl ScenarioMap {
    pub fn new(obstacles: Vec<Obstacle>) -> Self {
        let walls = obstacles
            .iter()
            .enumerate()
            .flat_map(|(i, o)| {
                o.edges().map(move |segment| WallSegment {
                    segment,
                    obstacle: i,
                    height: o.height,
                })
            })
            .collect();
        let bounds = Aabb::around(obstacles.iter().flat_map(|o| o.footprint.iter().copied()));
        Self {
            obstacles,
            walls,
            bounds,
        }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Widens the bounding box to include `extra` (e.g. the road network).
    pub fn with_bounds(mut self, extra: Aabb) -> Self {
        self.bounds = Some(match self.bounds {
            Some(b) => b.union(extra),
            None => extra,
        });
        self
    }

    pub fn obstacles(&self) -> &[Obstacle] {
        &self.obstacles
    }

    pub fn wall_segments(&self) -> &[WallSegment] {
        &self.walls
    }

    pub fn bounds(&self) -> Option<Aabb> {
        self.bounds
    }
}

/// Parses the map format: one obstacle per line, `kind;height;x1,y1 x2,y2 ...`.
pub fn load_map(path: impl AsRef<Path>) -> Result<ScenarioMap> {
    let path = path.as_ref();
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut obstacles = Vec::new();
    for (i, line) in file.lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse {
            path: path.to_owned(),
            line: line_no,
            msg,
        };
        let mut parts = trimmed.splitn(3, ';');
        let (kind, height, verts) = match (parts.next(), parts.next(), parts.next()) {
            (Some(k), Some(h), Some(v)) => (k, h, v),
            _ => return Err(err("expected `kind;height;x,y x,y ...`".into())),
        };
        let kind: ObstacleKind = kind.parse().map_err(|e: Error| err(e.to_string()))?;
        let height: f64 = height.trim().parse().map_err(|e| err(format!("height: {e}")))?;
        let footprint = verts
            .split_whitespace()
            .map(|v| {
                let (x, y) = v
                    .split_once(',')
                    .ok_or_else(|| err(format!("vertex {v:?} is not `x,y`")))?;
                let x = x.parse::<f64>().map_err(|e| err(format!("vertex x: {e}")))?;
                let y = y.parse::<f64>().map_err(|e| err(format!("vertex y: {e}")))?;
                Ok(Point::new(x, y))
            })
            .collect::<Result<Vec<_>>>()?;
        obstacles.push(Obstacle::new(footprint, height, kind).map_err(|e| err(e.to_string()))?);
    }
    Ok(ScenarioMap::new(obstacles))
}

pub fn save_map(path: impl AsRef<Path>, map: &ScenarioMap) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "# kind;height;x1,y1 x2,y2 ... (counter-clockwise)")?;
    for o in &map.obstacles {
        let verts: Vec<String> = o.footprint.iter().map(|p| format!("{},{}", p.x, p.y)).collect();
        writeln!(out, "{};{};{}", o.kind, o.height, verts.join(" "))?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn clockwise_input_is_reordered() {
        let cw = vec![
            Point::new(0.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
        ];
        let o = Obstacle::new(cw, 5.0, ObstacleKind::Building).unwrap();
        assert!(signed_area(o.footprint()) > 0.0);
    }

    #[test]
    fn invalid_obstacles_rejected() {
        let tri = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        assert!(Obstacle::new(tri[..2].to_vec(), 1.0, ObstacleKind::Foliage).is_err());
        assert!(Obstacle::new(tri, 0.0, ObstacleKind::Foliage).is_err());
    }

    #[test]
    fn map_file_round_trip_and_comments() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(
            f,
            "# test map\nbuilding;12.5;0,0 10,0 10,5 0,5\n\nfoliage;3;20,20 22,20 21,23"
        )
        .unwrap();
        let map = load_map(f.path()).unwrap();
        assert_eq!(map.obstacles().len(), 2);
        assert_eq!(map.wall_segments().len(), 7);
        let b = map.bounds().unwrap();
        assert_eq!((b.min, b.max), (Point::new(0.0, 0.0), Point::new(22.0, 23.0)));

        let g = tempfile::NamedTempFile::new().unwrap();
        save_map(g.path(), &map).unwrap();
        assert_eq!(load_map(g.path()).unwrap(), map);
    }

    #[test]
    fn bad_map_line_reports_line_number() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "building;10;0,0 1,0 1,1\nbuilding;ten;0,0 1,0 1,1").unwrap();
        assert!(matches!(load_map(f.path()), Err(Error::Parse { line: 2, .. })));
    }

    proptest! {
        #[test]
        fn wall_count_matches_vertex_total(sizes in proptest::collection::vec((3usize..9, 1.0..50.0f64), 0..8)) {
            // regular polygons are always simple
            let obstacles: Vec<Obstacle> = sizes.iter().enumerate().map(|(k, &(n, r))| {
                let c = Point::new(200.0 * k as f64, 0.0);
                let verts = (0..n).map(|i| {
                    let a = std::f64::consts::TAU * i as f64 / n as f64;
                    Point::new(c.x + r * a.cos(), c.y + r * a.sin())
                }).collect();
                Obstacle::new(verts, 5.0, ObstacleKind::Building).unwrap()
            }).collect();
            let total: usize = sizes.iter().map(|s| s.0).sum();
            let map = ScenarioMap::new(obstacles);
            prop_assert_eq!(map.wall_segments().len(), total);
        }
    }
}
