use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::Deserialize;

use super::pdf::{arc_overlap, AngularPdf};
use crate::beamforming::{uniform_codebook, Codebook};
use crate::channel::ArrayGeometry;
use crate::error::{Error, Result};
use crate::geometry::{wrap_angle, Point};

/// Placement of the quadrant grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub origin: Point,
    pub cell_size: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            origin: Point::new(0.0, 0.0),
            cell_size: 50.0,
        }
    }
}

/// Per-cell angle histograms. Bin `k` is centered on `k 2π/n_bins`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadrantGrid {
    spec: GridSpec,
    n_bins: usize,
    cells: BTreeMap<(i64, i64), Vec<u64>>,
}

impl QuadrantGrid {
    pub fn new(spec: GridSpec, n_bins: usize) -> Result<Self> {
        if !(spec.cell_size > 0.0 && spec.cell_size.is_finite()) {
            return Err(Error::InvalidParameter(format!("cell size {}", spec.cell_size)));
        }
        if !(spec.origin.x.is_finite() && spec.origin.y.is_finite()) {
            return Err(Error::InvalidParameter("grid origin must be finite".into()));
        }
        if n_bins == 0 {
            return Err(Error::InvalidParameter("need at least one angle bin".into()));
        }
        Ok(Self {
            spec,
            n_bins,
            cells: BTreeMap::new(),
        })
    }

    /// Grid whose bin count is `2π / bin_width` rounded to the nearest integer.
    pub fn with_bin_width(spec: GridSpec, bin_width: f64) -> Result<Self> {
        if !(bin_width > 0.0 && bin_width <= TAU) {
            return Err(Error::InvalidParameter(format!("bin width {bin_width}")));
        }
        Self::new(spec, ((TAU / bin_width).round() as usize).max(1))
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn bin_width(&self) -> f64 {
        TAU / self.n_bins as f64
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell_of(&self, p: Point) -> (i64, i64) {
        (
            ((p.x - self.spec.origin.x) / self.spec.cell_size).floor() as i64,
            ((p.y - self.spec.origin.y) / self.spec.cell_size).floor() as i64,
        )
    }

    pub fn bin_of(&self, angle: f64) -> usize {
        let w = self.bin_width();
        ((wrap_angle(angle + w / 2.0) / w).floor() as usize) % self.n_bins
    }

    /// Records one observed angle at position `p`.
    pub fn update(&mut self, p: Point, angle: f64) {
        let bin = self.bin_of(angle);
        let n = self.n_bins;
        self.cells.entry(self.cell_of(p)).or_insert_with(|| vec![0; n])[bin] += 1;
    }

    /// Sums the counts of a grid with the same layout into `self`.
    pub fn merge(&mut self, other: &QuadrantGrid) -> Result<()> {
        if other.spec != self.spec || other.n_bins != self.n_bins {
            return Err(Error::InvalidParameter(
                "cannot merge grids with different layouts".into(),
            ));
        }
        for (cell, counts) in &other.cells {
            let mine = self.cells.entry(*cell).or_insert_with(|| vec![0; counts.len()]);
            for (m, c) in mine.iter_mut().zip(counts) {
                *m += c;
            }
        }
        Ok(())
    }

    pub fn cells(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.cells.keys().copied()
    }

    pub fn counts(&self, cell: (i64, i64)) -> Option<&[u64]> {
        self.cells.get(&cell).map(Vec::as_slice)
    }

    pub fn observation_count(&self, cell: (i64, i64)) -> u64 {
        self.cells.get(&cell).map_or(0, |c| c.iter().sum())
    }

    pub fn pdf(&self, cell: (i64, i64)) -> Option<AngularPdf> {
        let counts = self.cells.get(&cell)?;
        AngularPdf::centered_circle(counts.iter().map(|&c| c as f64).collect()).ok()
    }

    /// PDF of the cell containing `p`.
    pub fn lookup(&self, p: Point) -> Result<AngularPdf> {
        self.pdf(self.cell_of(p))
            .ok_or(Error::MissingQuadrant { x: p.x, y: p.y })
    }

    /// Writes `cell_i,cell_j,bin_index,mass,count` with the layout in
    /// leading `#` lines. Only nonzero bins are listed.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "# origin_x={}", self.spec.origin.x)?;
        writeln!(out, "# origin_y={}", self.spec.origin.y)?;
        writeln!(out, "# cell_size={}", self.spec.cell_size)?;
        writeln!(out, "# n_bins={}", self.n_bins)?;
        writeln!(out, "cell_i,cell_j,bin_index,mass,count")?;
        for (&(i, j), counts) in &self.cells {
            let total: u64 = counts.iter().sum();
            for (k, &c) in counts.iter().enumerate().filter(|(_, &c)| c > 0) {
                writeln!(out, "{i},{j},{k},{},{c}", c as f64 / total as f64)?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            cell_i: i64,
            cell_j: i64,
            bin_index: usize,
            #[allow(dead_code)]
            mass: f64,
            count: u64,
        }
        let path = path.as_ref();
        let err = |line: usize, msg: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let file = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut meta = BTreeMap::new();
        for (n, line) in file.lines().enumerate() {
            let line = line?;
            let Some(rest) = line.trim().strip_prefix('#') else {
                continue;
            };
            if let Some((k, v)) = rest.split_once('=') {
                let v: f64 = v.trim().parse().map_err(|e| err(n + 1, format!("{}: {e}", k.trim())))?;
                meta.insert(k.trim().to_string(), v);
            }
        }
        let get = |k: &str| {
            meta.get(k)
                .copied()
                .ok_or_else(|| err(0, format!("missing `# {k}=` line")))
        };
        let spec = GridSpec {
            origin: Point::new(get("origin_x")?, get("origin_y")?),
            cell_size: get("cell_size")?,
        };
        let mut grid = Self::new(spec, get("n_bins")? as usize)?;
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)?;
        for row in rdr.deserialize() {
            let row: Row = row?;
            if row.bin_index >= grid.n_bins {
                return Err(Error::IndexOutOfRange {
                    name: "bin_index",
                    value: row.bin_index,
                    max: grid.n_bins - 1,
                });
            }
            let n = grid.n_bins;
            grid.cells.entry((row.cell_i, row.cell_j)).or_insert_with(|| vec![0; n])[row.bin_index] += row.count;
        }
        Ok(grid)
    }
}

/// Batch training from `(position, angle)` observations.
pub fn train_pcb(observations: &[(Point, f64)], spec: GridSpec, bin_width: f64) -> Result<QuadrantGrid> {
    let mut grid = QuadrantGrid::with_bin_width(spec, bin_width)?;
    for &(p, a) in observations {
        grid.update(p, a);
    }
    Ok(grid)
}

/// Probability mass falling in each of `depth` uniform beam cells. Beam `k`
/// owns the arc of width `2π/depth` centered on `k 2π/depth`; PDF bins are
/// split between cells in proportion to their overlap.
pub fn beam_masses(pdf: &AngularPdf, depth: usize) -> Result<Vec<f64>> {
    if !pdf.is_full_circle() {
        return Err(Error::InvalidParameter("PDF must cover the full circle".into()));
    }
    if depth == 0 {
        return Err(Error::InvalidParameter("codebook depth must be ≥ 1".into()));
    }
    let cell = TAU / depth as f64;
    let w = pdf.bin_width();
    let edges = pdf.edges();
    Ok((0..depth)
        .map(|k| {
            let lo = k as f64 * cell - cell / 2.0;
            pdf.masses()
                .iter()
                .zip(&edges)
                .map(|(&m, &e)| {
                    if m > 0.0 {
                        m * arc_overlap(lo, cell, e, w) / w
                    } else {
                        0.0
                    }
                })
                .sum()
        })
        .collect())
}

/// Uniform beam indices sorted by descending mass; ties by ascending index.
pub fn pcb_order(pdf: &AngularPdf, depth: usize) -> Result<Vec<usize>> {
    let masses = beam_masses(pdf, depth)?;
    // overlap arithmetic leaves ~1e-17 noise on masses that should tie
    let key: Vec<i64> = masses.iter().map(|m| (m * 1e12).round() as i64).collect();
    let mut order: Vec<usize> = (0..depth).collect();
    order.sort_by(|&a, &b| key[b].cmp(&key[a]).then(a.cmp(&b)));
    Ok(order)
}

/// Uniform codebook of `depth` beams in PCB test order.
pub fn pcb_codebook(pdf: &AngularPdf, geom: &ArrayGeometry, depth: usize) -> Result<Codebook> {
    uniform_codebook(depth, geom)?.reordered(&pcb_order(pdf, depth)?)
}
