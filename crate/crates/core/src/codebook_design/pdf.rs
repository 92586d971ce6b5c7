use std::f64::consts::TAU;
use std::io::Write;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometry::wrap_angle;

/// Piecewise-constant probability over equal-width angular bins.
///
/// Bin `k` covers `[start + k w, start + (k+1) w)`. Masses always sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularPdf {
    start: f64,
    bin_width: f64,
    masses: Vec<f64>,
}

impl AngularPdf {
    /// Normalizes `weights`; an all-zero histogram is an error.
    pub fn new(start: f64, bin_width: f64, weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyInput);
        }
        if !(bin_width > 0.0) || !start.is_finite() {
            return Err(Error::InvalidParameter(format!("bin width {bin_width}")));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidParameter("negative or non-finite PDF weight".into()));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::DegeneratePdf("all weights are zero".into()));
        }
        Ok(Self {
            start,
            bin_width,
            masses: weights.into_iter().map(|w| w / total).collect(),
        })
    }

    /// `n_bins` bins around the circle, bin `k` centered on `k 2π/n`.
    pub fn centered_circle(weights: Vec<f64>) -> Result<Self> {
        let w = TAU / weights.len().max(1) as f64;
        Self::new(-w / 2.0, w, weights)
    }

    pub fn uniform_circle(n_bins: usize) -> Result<Self> {
        Self::centered_circle(vec![1.0; n_bins])
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn n_bins(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn span(&self) -> f64 {
        self.bin_width * self.masses.len() as f64
    }

    pub fn is_full_circle(&self) -> bool {
        (self.span() - TAU).abs() < 1e-9
    }

    /// `n_bins + 1` ascending edges.
    pub fn edges(&self) -> Vec<f64> {
        (0..=self.n_bins())
            .map(|k| self.start + k as f64 * self.bin_width)
            .collect()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_bins())
            .map(|k| self.start + (k as f64 + 0.5) * self.bin_width)
            .collect()
    }

    /// Bin containing `angle`, taken modulo the span for full-circle PDFs.
    pub fn bin_of(&self, angle: f64) -> Option<usize> {
        let offset = if self.is_full_circle() {
            wrap_angle(angle - self.start)
        } else {
            angle - self.start
        };
        let k = (offset / self.bin_width).floor();
        if k < 0.0 {
            return None;
        }
        let k = k as usize;
        if k < self.n_bins() {
            Some(k)
        } else if self.is_full_circle() {
            Some(0)
        } else {
            None
        }
    }

    /// Bin with the largest mass; ties go to the lowest index.
    pub fn mode(&self) -> usize {
        self.masses
            .iter()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, &m)| if m > acc.1 { (i, m) } else { acc },
            )
            .0
    }

    /// Circle PDF shifted by `offset`, re-binned onto the same grid.
    pub fn rotate(&self, offset: f64) -> Result<Self> {
        if !self.is_full_circle() {
            return Err(Error::InvalidParameter("only full-circle PDFs can be rotated".into()));
        }
        let mut out = vec![0.0; self.n_bins()];
        for (c, &m) in self.centers().iter().zip(&self.masses) {
            spread_linear(&mut out, self.start, self.bin_width, c + offset, m);
        }
        Self::new(self.start, self.bin_width, out)
    }

    /// Writes `angle_deg,mass` at bin centers.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "angle_deg,mass")?;
        for (c, m) in self.centers().iter().zip(&self.masses) {
            writeln!(out, "{},{}", c.to_degrees(), m)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads `angle_deg,mass`; centers must be equally spaced.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            angle_deg: f64,
            mass: f64,
        }
        let path = path.as_ref();
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)?;
        let rows: Vec<Row> = rdr.deserialize().collect::<std::result::Result<_, _>>()?;
        let parse_err = |msg: &str| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            msg: msg.into(),
        };
        if rows.is_empty() {
            return Err(parse_err("no PDF rows"));
        }
        if rows.len() == 1 {
            return Self::centered_circle(vec![rows[0].mass]);
        }
        let width = (rows[1].angle_deg - rows[0].angle_deg).to_radians();
        if !(width > 0.0) {
            return Err(parse_err("angles must be ascending"));
        }
        for w in rows.windows(2) {
            if ((w[1].angle_deg - w[0].angle_deg).to_radians() - width).abs() > 1e-6 {
                return Err(parse_err("angles must be equally spaced"));
            }
        }
        let start = rows[0].angle_deg.to_radians() - width / 2.0;
        Self::new(start, width, rows.into_iter().map(|r| r.mass).collect())
    }
}

/// Adds `mass` at `angle` to a circular bin grid whose bin centers sit at
/// `start + (k + 1/2) w`, split linearly between the two nearest centers.
pub(crate) fn spread_linear(out: &mut [f64], start: f64, width: f64, angle: f64, mass: f64) {
    let n = out.len();
    let first_center = start + width / 2.0;
    let pos = wrap_angle(angle - first_center) / width;
    let lo = pos.floor();
    let frac = pos - lo;
    let lo = (lo as usize) % n;
    out[lo] += mass * (1.0 - frac);
    out[(lo + 1) % n] += mass * frac;
}

/// Length of the overlap of two arcs given as (start, length), lengths ≤ 2π.
pub(crate) fn arc_overlap(a_start: f64, a_len: f64, b_start: f64, b_len: f64) -> f64 {
    let s = wrap_angle(b_start - a_start);
    let piece = |lo: f64, hi: f64| (hi.min(a_len) - lo.max(0.0)).max(0.0);
    piece(s, s + b_len) + piece(s - TAU, s - TAU + b_len)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_and_reports_grid() {
        let p = AngularPdf::centered_circle(vec![1.0, 3.0, 0.0, 0.0]).unwrap();
        assert_eq!(p.masses(), &[0.25, 0.75, 0.0, 0.0]);
        assert!(p.is_full_circle());
        assert_eq!(p.edges().len(), 5);
        assert!((p.centers()[1] - TAU / 4.0).abs() < 1e-12);
        assert_eq!(p.bin_of(TAU - 0.1), Some(0));
        assert_eq!(p.bin_of(1.5), Some(1));
        assert_eq!(p.mode(), 1);
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(matches!(
            AngularPdf::centered_circle(vec![0.0; 4]),
            Err(Error::DegeneratePdf(_))
        ));
        assert!(AngularPdf::centered_circle(vec![]).is_err());
        assert!(AngularPdf::centered_circle(vec![1.0, -1.0, 1.0]).is_err());
    }

    #[test]
    fn partial_span_bins() {
        let p = AngularPdf::new(-1.0, 0.5, vec![1.0; 4]).unwrap();
        assert!(!p.is_full_circle());
        assert_eq!(p.bin_of(-1.1), None);
        assert_eq!(p.bin_of(0.9), Some(3));
        assert_eq!(p.bin_of(1.1), None);
        assert!(p.rotate(0.1).is_err());
    }

    #[test]
    fn rotation_by_whole_bins_is_a_shift() {
        let p = AngularPdf::centered_circle(vec![0.5, 0.2, 0.3, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let r = p.rotate(2.0 * TAU / 8.0).unwrap();
        assert!((r.masses()[2] - 0.5).abs() < 1e-12);
        assert!((r.masses()[4] - 0.3).abs() < 1e-12);
        let back = r.rotate(-2.0 * TAU / 8.0).unwrap();
        for (a, b) in back.masses().iter().zip(p.masses()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_round_trip() {
        let p = AngularPdf::centered_circle(vec![0.1, 0.2, 0.3, 0.4, 0.0, 0.5]).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        p.save_csv(f.path()).unwrap();
        let q = AngularPdf::load_csv(f.path()).unwrap();
        assert_eq!(q.n_bins(), 6);
        assert!((q.start() - p.start()).abs() < 1e-9);
        for (a, b) in q.masses().iter().zip(p.masses()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn arc_overlap_wraps() {
        assert!((arc_overlap(0.0, 1.0, 0.5, 1.0) - 0.5).abs() < 1e-12);
        assert!((arc_overlap(TAU - 0.2, 0.4, 0.0, 0.1) - 0.1).abs() < 1e-12);
        assert!((arc_overlap(-0.2, 0.4, TAU - 0.1, 0.05) - 0.05).abs() < 1e-12);
        assert_eq!(arc_overlap(0.0, 1.0, 2.0, 1.0), 0.0);
    }
}
