//! Campaign aggregation: trial-count ECDFs and quantization losses against
//! the SVD bound.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::beamforming::{
    beam_gain, beamformer_for_angle, codebook_depth, pair_gains, spectral_efficiency, svd_oracle, uniform_codebook,
    Codebook, LinkBudget,
};
use crate::channel::{assemble_channel, ArrayGeometry, ChannelMatrix, PathComponent};
use crate::codebook_design::{lloyd_max, AngularPdf, LloydMaxParams};
use crate::error::{Error, Result};

/// Empirical CDF: `probs[i] = P(X <= support[i])`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    support: Vec<f64>,
    probs: Vec<f64>,
    n: usize,
}

impl Ecdf {
    pub fn new(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput);
        }
        if samples.iter().any(|s| s.is_nan()) {
            return Err(Error::InvalidParameter("NaN sample".into()));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let mut support = Vec::new();
        let mut probs = Vec::new();
        for (i, &x) in sorted.iter().enumerate() {
            if i + 1 == n || sorted[i + 1] != x {
                support.push(x);
                probs.push((i + 1) as f64 / n as f64);
            }
        }
        Ok(Self { support, probs, n })
    }

    pub fn from_counts(samples: &[usize]) -> Result<Self> {
        Self::new(&samples.iter().map(|&c| c as f64).collect::<Vec<_>>())
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn n_samples(&self) -> usize {
        self.n
    }

    /// `P(X <= x)`.
    pub fn eval(&self, x: f64) -> f64 {
        match self.support.partition_point(|&s| s <= x) {
            0 => 0.0,
            k => self.probs[k - 1],
        }
    }

    /// Smallest support value whose cumulative probability reaches `p`.
    pub fn quantile(&self, p: f64) -> f64 {
        let k = self.probs.partition_point(|&q| q < p - 1e-12);
        self.support[k.min(self.support.len() - 1)]
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }

    /// Writes `trials,cum_prob`.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "trials,cum_prob")?;
        for (x, p) in self.support.iter().zip(&self.probs) {
            writeln!(out, "{x},{p}")?;
        }
        out.flush()?;
        Ok(())
    }
}

fn check_lengths(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(())
}

/// Mean SNR gap in dB.
pub fn snr_loss(optimal_db: &[f64], quantized_db: &[f64]) -> Result<f64> {
    check_lengths(optimal_db, quantized_db)?;
    Ok(optimal_db.iter().zip(quantized_db).map(|(o, q)| o - q).sum::<f64>() / optimal_db.len() as f64)
}

/// Mean Shannon spectral-efficiency gap, bits/s/Hz.
pub fn se_loss(optimal_db: &[f64], quantized_db: &[f64]) -> Result<f64> {
    check_lengths(optimal_db, quantized_db)?;
    Ok(optimal_db
        .iter()
        .zip(quantized_db)
        .map(|(&o, &q)| spectral_efficiency(o) - spectral_efficiency(q))
        .sum::<f64>()
        / optimal_db.len() as f64)
}

/// How beam angles are placed for a quantization level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantizer {
    Uniform,
    Lloyd,
}

impl fmt::Display for Quantizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantizer::Uniform => "uniform",
            Quantizer::Lloyd => "lloyd",
        })
    }
}

impl FromStr for Quantizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" => Ok(Quantizer::Uniform),
            "lloyd" | "lloyd-max" | "lloyd_max" => Ok(Quantizer::Lloyd),
            other => Err(Error::InvalidParameter(format!("unknown quantizer `{other}`"))),
        }
    }
}

/// One link realization of the campaign, kept as its path list so the
/// channel matrix only exists while the link is evaluated.
#[derive(Debug, Clone)]
pub struct SweepLink {
    pub t: u64,
    pub paths: Vec<PathComponent>,
}

/// Inputs shared by every level of the sweep.
#[derive(Debug, Clone)]
pub struct SweepSetup<'a> {
    pub geom: &'a ArrayGeometry,
    pub budget: LinkBudget,
    /// Transmit-side angle PDF used by the Lloyd quantizer.
    pub tx_pdf: &'a AngularPdf,
    /// Receive-side PDF; the transmit PDF is reused when absent.
    pub rx_pdf: Option<&'a AngularPdf>,
    /// Links whose SVD-optimal SNR falls below this are not admitted.
    pub gamma_th_db: f64,
    pub lloyd: LloydMaxParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossReport {
    pub level_deg: f64,
    pub quantizer: Quantizer,
    pub snr_loss_db: f64,
    pub se_loss_bps_hz: f64,
    pub n_links: usize,
    pub n_timesteps: usize,
}

/// Optimal and quantized SNR of every admitted link at one level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelOutcome {
    pub report: LossReport,
    pub optimal_db: Vec<f64>,
    pub quantized_db: Vec<f64>,
}

/// SNRs of one admitted link: the SVD optimum and one entry per
/// (level, quantizer) combination of the plan.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkEval {
    pub t: u64,
    pub optimal_db: f64,
    pub quantized_db: Vec<f64>,
}

/// Builds the codebook for one side. Lloyd depth shrinks when the PDF has
/// too few occupied bins.
fn side_codebook(quantizer: Quantizer, depth: usize, pdf: &AngularPdf, setup: &SweepSetup) -> Result<Codebook> {
    match quantizer {
        Quantizer::Uniform => uniform_codebook(depth, setup.geom),
        Quantizer::Lloyd => {
            let mut k = depth;
            loop {
                match lloyd_max(pdf, k, &setup.lloyd) {
                    Ok(q) => {
                        if k < depth {
                            warn!("PDF supports only {k} beams; Lloyd-Max depth reduced from {depth}");
                        }
                        return q.codebook(setup.geom);
                    }
                    Err(Error::DegeneratePdf(_)) if k > 1 => k -= 1,
                    Err(e) => return Err(e),
                }
            }
        }
    }
}

/// Best response using continuous beams steered at the paths' own angles.
fn unquantized_gain(h: &ChannelMatrix, geom: &ArrayGeometry) -> Result<f64> {
    let mut best: f64 = 0.0;
    for pt in &h.paths {
        let f = beamformer_for_angle(geom, pt.aod_az, pt.aod_el);
        for pr in &h.paths {
            let w = beamformer_for_angle(geom, pr.aoa_az, pr.aoa_el);
            best = best.max(beam_gain(&w, h, &f)?);
        }
    }
    Ok(best)
}

/// Transmit and receive codebooks.
type BeamPair = (Codebook, Codebook);

/// Codebooks for every (level, quantizer) combination, built once.
///
/// Level 0 means no quantization: beams point exactly at the path angles.
/// Other levels use `codebook_depth(level)` beams on each side and the best
/// pair found by brute force.
#[derive(Debug, Clone)]
pub struct SweepPlan<'a> {
    setup: SweepSetup<'a>,
    combos: Vec<(f64, Quantizer, Option<BeamPair>)>,
}

impl<'a> SweepPlan<'a> {
    pub fn new(levels_deg: &[f64], quantizers: &[Quantizer], setup: SweepSetup<'a>) -> Result<Self> {
        let mut combos = Vec::new();
        for &level in levels_deg {
            if !(level >= 0.0) {
                return Err(Error::InvalidParameter(format!("quantization level {level}")));
            }
            for &q in quantizers {
                let books = if level == 0.0 {
                    None
                } else {
                    let depth = codebook_depth(level.to_radians())?;
                    let tx = side_codebook(q, depth, setup.tx_pdf, &setup)?;
                    let rx = side_codebook(q, depth, setup.rx_pdf.unwrap_or(setup.tx_pdf), &setup)?;
                    Some((tx, rx))
                };
                combos.push((level, q, books));
            }
        }
        Ok(Self { setup, combos })
    }

    /// `None` when the link has no path or fails the admission threshold.
    pub fn evaluate(&self, link: &SweepLink) -> Result<Option<LinkEval>> {
        if link.paths.is_empty() {
            return Ok(None);
        }
        let h = assemble_channel(&link.paths, self.setup.geom)?;
        let n = h.n_antennas();
        let optimal_db = match svd_oracle(&h) {
            Ok(o) => self.setup.budget.snr_db(o.sigma1, n),
            Err(Error::ZeroMatrix) => return Ok(None),
            Err(e) => return Err(e),
        };
        if optimal_db < self.setup.gamma_th_db {
            return Ok(None);
        }
        let mut quantized_db = Vec::with_capacity(self.combos.len());
        for (_, _, books) in &self.combos {
            let gain = match books {
                None => unquantized_gain(&h, self.setup.geom)?,
                Some((tx, rx)) => pair_gains(&h, tx, rx)?.iter().copied().fold(0.0, f64::max),
            };
            quantized_db.push(self.setup.budget.snr_db(gain, n));
        }
        Ok(Some(LinkEval {
            t: link.t,
            optimal_db,
            quantized_db,
        }))
    }

    /// One outcome per (level, quantizer), levels outermost.
    pub fn aggregate(&self, evals: &[LinkEval]) -> Result<Vec<LevelOutcome>> {
        let mut timesteps: Vec<u64> = evals.iter().map(|e| e.t).collect();
        timesteps.sort_unstable();
        timesteps.dedup();
        let optimal: Vec<f64> = evals.iter().map(|e| e.optimal_db).collect();
        self.combos
            .iter()
            .enumerate()
            .map(|(i, (level, quantizer, _))| {
                let quantized: Vec<f64> = evals.iter().map(|e| e.quantized_db[i]).collect();
                let (snr, se) = if optimal.is_empty() {
                    (0.0, 0.0)
                } else {
                    (snr_loss(&optimal, &quantized)?, se_loss(&optimal, &quantized)?)
                };
                Ok(LevelOutcome {
                    report: LossReport {
                        level_deg: *level,
                        quantizer: *quantizer,
                        snr_loss_db: snr,
                        se_loss_bps_hz: se,
                        n_links: optimal.len(),
                        n_timesteps: timesteps.len(),
                    },
                    optimal_db: optimal.clone(),
                    quantized_db: quantized,
                })
            })
            .collect()
    }
}

/// SNR loss of quantized codebooks against the SVD bound, over every
/// admitted link.
pub fn quantization_sweep(
    links: &[SweepLink],
    levels_deg: &[f64],
    quantizers: &[Quantizer],
    setup: &SweepSetup,
) -> Result<Vec<LevelOutcome>> {
    if links.is_empty() {
        return Err(Error::EmptyInput);
    }
    let plan = SweepPlan::new(levels_deg, quantizers, setup.clone())?;
    let mut evals = Vec::new();
    for link in links {
        if let Some(e) = plan.evaluate(link)? {
            evals.push(e);
        }
    }
    plan.aggregate(&evals)
}

/// Writes `level_deg,quantizer,snr_loss_db,se_loss_bps_hz,n_links`.
pub fn save_loss_report(reports: &[LossReport], path: impl AsRef<Path>) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "level_deg,quantizer,snr_loss_db,se_loss_bps_hz,n_links")?;
    for r in reports {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.level_deg, r.quantizer, r.snr_loss_db, r.se_loss_bps_hz, r.n_links
        )?;
    }
    out.flush()?;
    Ok(())
}
