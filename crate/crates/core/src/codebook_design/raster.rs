use std::io::Write;
use std::path::{Path, PathBuf};

use image::codecs::pnm::{PnmDecoder, PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::scenario::{ObstacleKind, ScenarioMap};

/// Row-major 8-bit grayscale raster. Row 0 is the top (north) edge.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    pub width: usize,
    pub height: usize,
    values: Vec<u8>,
    pub pixel_size: f64,
    pub north_offset: f64,
}

/// Georeferencing that travels next to a PGM file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sidecar {
    pub pixel_size: f64,
    pub north_offset: f64,
}

impl Default for Sidecar {
    fn default() -> Self {
        Self {
            pixel_size: 1.0,
            north_offset: 0.0,
        }
    }
}

impl Sidecar {
    /// Default sidecar location: the raster path with a `.meta` extension.
    pub fn path_for(raster: &Path) -> PathBuf {
        raster.with_extension("meta")
    }

    /// Parses `key = value` lines: `pixel_size` (m/px) and
    /// `north_offset_deg`. Missing keys keep their defaults.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let mut out = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse {
                path: path.to_path_buf(),
                line: n + 1,
                msg,
            };
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got `{line}`")))?;
            let v: f64 = v.trim().parse().map_err(|e| err(format!("{}: {e}", k.trim())))?;
            match k.trim() {
                "pixel_size" => out.pixel_size = v,
                "north_offset_deg" => out.north_offset = v.to_radians(),
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        if !(out.pixel_size > 0.0) {
            return Err(Error::InvalidParameter("pixel_size must be > 0".into()));
        }
        Ok(out)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        writeln!(f, "pixel_size = {}", self.pixel_size)?;
        writeln!(f, "north_offset_deg = {}", self.north_offset.to_degrees())?;
        Ok(())
    }
}

impl RasterImage {
    pub fn new(width: usize, height: usize, values: Vec<u8>, sidecar: Sidecar) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::LengthMismatch(values.len(), width * height));
        }
        Ok(Self {
            width,
            height,
            values,
            pixel_size: sidecar.pixel_size,
            north_offset: sidecar.north_offset,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8, sidecar: Sidecar) -> Self {
        Self::new(width, height, vec![value; width * height], sidecar).expect("sized buffer")
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.values[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.values[y * self.width + x] = v;
    }

    pub fn sidecar(&self) -> Sidecar {
        Sidecar {
            pixel_size: self.pixel_size,
            north_offset: self.north_offset,
        }
    }

    /// Number of nonzero pixels.
    pub fn count_set(&self) -> usize {
        self.values.iter().filter(|&&v| v != 0).count()
    }

    /// Reads a PGM and its sidecar (defaults apply if the sidecar is absent
    /// and `sidecar` is `None`).
    pub fn load_pgm(path: impl AsRef<Path>, sidecar: Option<&Path>) -> Result<Self> {
        let path = path.as_ref();
        let meta = match sidecar {
            Some(s) => Sidecar::load(s)?,
            None => {
                let default = Sidecar::path_for(path);
                if default.exists() {
                    Sidecar::load(default)?
                } else {
                    Sidecar::default()
                }
            }
        };
        let reader = std::io::BufReader::new(std::fs::File::open(path)?);
        let img = DynamicImage::from_decoder(PnmDecoder::new(reader)?)?.into_luma8();
        let (w, h) = img.dimensions();
        Self::new(w as usize, h as usize, img.into_raw(), meta)
    }

    /// Writes a binary (P5) PGM plus the sidecar at [`Sidecar::path_for`].
    pub fn save_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        PnmEncoder::new(file)
            .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
            .write_image(
                &self.values,
                self.width as u32,
                self.height as u32,
                ExtendedColorType::L8,
            )?;
        self.sidecar().save(Sidecar::path_for(path))
    }
}

fn inside(poly: &[Point], p: Point) -> bool {
    let mut odd = false;
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a.y > p.y) != (b.y > p.y) && p.x < a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x) {
            odd = !odd;
        }
    }
    odd
}

/// Renders static obstacles as dark pixels on a white background, north up.
/// The raster covers the map bounds plus `margin` meters on each side.
pub fn render_map(map: &ScenarioMap, pixel_size: f64, margin: f64) -> Result<RasterImage> {
    if !(pixel_size > 0.0) {
        return Err(Error::InvalidParameter("pixel_size must be > 0".into()));
    }
    let bounds = map
        .bounds()
        .ok_or_else(|| Error::InvalidParameter("map has no extent to render".into()))?;
    let (x0, y1) = (bounds.min.x - margin, bounds.max.y + margin);
    let width = (((bounds.max.x + margin) - x0) / pixel_size).ceil().max(3.0) as usize;
    let height = ((y1 - (bounds.min.y - margin)) / pixel_size).ceil().max(3.0) as usize;
    let mut img = RasterImage::filled(
        width,
        height,
        255,
        Sidecar {
            pixel_size,
            north_offset: 0.0,
        },
    );
    for obs in map.obstacles().iter().filter(|o| o.kind != ObstacleKind::Vehicle) {
        let fp = obs.footprint();
        let (lo_x, hi_x) = fp
            .iter()
            .fold((f64::MAX, f64::MIN), |a, p| (a.0.min(p.x), a.1.max(p.x)));
        let (lo_y, hi_y) = fp
            .iter()
            .fold((f64::MAX, f64::MIN), |a, p| (a.0.min(p.y), a.1.max(p.y)));
        let cx0 = (((lo_x - x0) / pixel_size).floor().max(0.0)) as usize;
        let cx1 = (((hi_x - x0) / pixel_size).ceil() as usize).min(width);
        let ry0 = (((y1 - hi_y) / pixel_size).floor().max(0.0)) as usize;
        let ry1 = (((y1 - lo_y) / pixel_size).ceil() as usize).min(height);
        for row in ry0..ry1 {
            for col in cx0..cx1 {
                let c = Point::new(
                    x0 + (col as f64 + 0.5) * pixel_size,
                    y1 - (row as f64 + 0.5) * pixel_size,
                );
                if inside(fp, c) {
                    img.set(col, row, 0);
                }
            }
        }
    }
    Ok(img)
}
