use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Pose;
use crate::error::{Error, Result};

/// Trace sampling interval used when none is given, seconds.
pub const DEFAULT_TIMESTEP: f64 = 0.1;

const TRACE_HEADER: [&str; 6] = ["t", "vehicle_id", "x", "y", "heading_deg", "speed"];

/// Opaque vehicle identifier. Orders lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VehicleId(pub String);

impl VehicleId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for VehicleId {
    fn from(s: &str) -> Self {
        VehicleId(s.to_owned())
    }
}

impl From<String> for VehicleId {
    fn from(s: String) -> Self {
        VehicleId(s)
    }
}

impl fmt::Display for VehicleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One vehicle's sampled trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct VehicleTrace {
    pub vehicle_id: VehicleId,
    samples: Vec<(u64, Pose)>,
    timestep: f64,
}

impl VehicleTrace {
    pub fn new(vehicle_id: VehicleId, samples: Vec<(u64, Pose)>, timestep: f64) -> Result<Self> {
        if !(timestep > 0.0) {
            return Err(Error::InvalidParameter(format!("timestep must be > 0, got {timestep}")));
        }
        if let Some(w) = samples.windows(2).find(|w| w[1].0 <= w[0].0) {
            return Err(Error::NonMonotoneTrace {
                vehicle: vehicle_id.0,
                t: w[1].0 as f64 * timestep,
            });
        }
        Ok(Self {
            vehicle_id,
            samples,
            timestep,
        })
    }

    pub fn samples(&self) -> &[(u64, Pose)] {
        &self.samples
    }

    pub fn timestep(&self) -> f64 {
        self.timestep
    }

    pub fn pose_at(&self, t: u64) -> Option<&Pose> {
        self.samples
            .binary_search_by_key(&t, |s| s.0)
            .ok()
            .map(|i| &self.samples[i].1)
    }
}

/// Reads a `t,vehicle_id,x,y,heading_deg,speed` trace file.
///
/// Times are converted to timestep indices by rounding `t / timestep`.
/// Headings are stored in degrees on disk and radians in memory.
pub fn load_traces(path: impl AsRef<Path>, timestep: f64) -> Result<Vec<VehicleTrace>> {
    let path = path.as_ref();
    if !(timestep > 0.0) {
        return Err(Error::InvalidParameter(format!("timestep must be > 0, got {timestep}")));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .has_headers(false)
        .from_path(path)?;

    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_owned(),
        line,
        msg,
    };

    let mut groups: BTreeMap<VehicleId, Vec<(u64, Pose)>> = BTreeMap::new();
    let mut order: Vec<VehicleId> = Vec::new();
    let mut seen_header = false;
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if !seen_header {
            let cols: Vec<&str> = rec.iter().collect();
            if cols != TRACE_HEADER {
                return Err(parse_err(line, format!("expected header {}", TRACE_HEADER.join(","))));
            }
            seen_header = true;
            continue;
        }
        if rec.len() != TRACE_HEADER.len() {
            return Err(parse_err(line, format!("expected 6 fields, got {}", rec.len())));
        }
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse::<f64>()
                .map_err(|e| parse_err(line, format!("column {}: {e}", TRACE_HEADER[i])))
        };
        let t = num(0)?;
        let id = VehicleId::from(&rec[1]);
        let pose =
            Pose::new(num(2)?, num(3)?, num(4)?.to_radians(), num(5)?).map_err(|e| parse_err(line, e.to_string()))?;
        if t < 0.0 {
            return Err(parse_err(line, format!("negative time {t}")));
        }
        let index = (t / timestep).round() as u64;

        let entry = groups.entry(id.clone()).or_insert_with(|| {
            order.push(id.clone());
            Vec::new()
        });
        if let Some(&(prev, _)) = entry.last() {
            if index <= prev {
                return Err(Error::NonMonotoneTrace { vehicle: id.0, t });
            }
        }
        entry.push((index, pose));
    }

    order
        .into_iter()
        .map(|id| {
            let samples = groups.remove(&id).unwrap_or_default();
            VehicleTrace::new(id, samples, timestep)
        })
        .collect()
}

/// Writes traces in the same format `load_traces` reads, grouped by
/// timestep then vehicle.
pub fn save_traces(path: impl AsRef<Path>, traces: &[VehicleTrace]) -> Result<()> {
    let mut rows: Vec<(u64, &VehicleId, &Pose, f64)> = traces
        .iter()
        .flat_map(|tr| {
            tr.samples
                .iter()
                .map(move |(t, p)| (*t, &tr.vehicle_id, p, tr.timestep))
        })
        .collect();
    rows.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(b.1)));

    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{}", TRACE_HEADER.join(","))?;
    for (t, id, p, dt) in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            t as f64 * dt,
            id,
            p.x,
            p.y,
            p.heading.to_degrees(),
            p.speed
        )?;
    }
    out.flush()?;
    Ok(())
}
