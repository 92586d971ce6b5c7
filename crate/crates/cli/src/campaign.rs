//! Scenario loading, link sampling and per-link strategy runs.

use std::collections::{BTreeSet, HashMap};
use std::io::Write;
use std::path::Path;

use log::{info, warn};
use rayon::prelude::*;
use sidelink_ia::beamforming::{uniform_codebook, Codebook};
use sidelink_ia::channel::{assemble_channel, enumerate_paths, ArrayGeometry, PathComponent};
use sidelink_ia::codebook_design::{AngularPdf, QuadrantGrid};
use sidelink_ia::ia::{
    run_exhaustive, run_gps_jump, run_gps_lms, run_pcb, IAResult, LatencyModel, LinkContext, LinkPositions, LmsParams,
    PdfSource, SuccessRule,
};
use sidelink_ia::scenario::{
    enumerate_link_pairs, generate_synthetic_scenario, load_map, load_traces, NoisyPositions, PositionNoiseModel,
    ScenarioMap, VehicleId, VehicleTrace,
};
use sidelink_ia::{Error, LinkBudget};

use crate::config::{CampaignConfig, ScenarioSource, StrategyKind};
use crate::CliError;

/// Street layout plus vehicle tracks.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub map: ScenarioMap,
    pub traces: Vec<VehicleTrace>,
}

pub fn load_scenario(cfg: &CampaignConfig) -> Result<Scenario, CliError> {
    let seed = cfg.seed()?;
    match cfg.scenario.source {
        ScenarioSource::Synthetic => {
            let params = cfg.scenario.synthetic_params(seed);
            let (map, traces) = generate_synthetic_scenario(cfg.scenario.synthetic, &params)?;
            Ok(Scenario { map, traces })
        }
        ScenarioSource::Files => {
            let traces_path = cfg
                .scenario
                .traces
                .as_ref()
                .ok_or_else(|| CliError::Config("scenario.traces is required for file input".into()))?;
            let traces = load_traces(traces_path, cfg.scenario.timestep)?;
            let map = match &cfg.scenario.map {
                Some(p) => load_map(p)?,
                None => ScenarioMap::empty(),
            };
            Ok(Scenario { map, traces })
        }
    }
}

/// Seed for the position-noise stream, kept apart from the scenario seed.
pub fn noise_seed(seed: u64) -> u64 {
    seed ^ 0x6e6f_6973_655f_7073
}

/// One transmitter/receiver pair at one timestep.
#[derive(Debug, Clone)]
pub struct LinkSample {
    pub t: u64,
    pub tx_id: VehicleId,
    pub rx_id: VehicleId,
    pub positions: LinkPositions,
    pub paths: Vec<PathComponent>,
}

#[derive(Debug, Clone, Default)]
pub struct LinkSet {
    /// Links with at least one propagation path, ordered by (t, tx, rx).
    pub links: Vec<LinkSample>,
    /// Pairs in range but without any path.
    pub n_no_path: usize,
}

/// Every in-range vehicle pair at every sampled timestep. Within a pair the
/// vehicle with the smaller id transmits.
pub fn sample_links(cfg: &CampaignConfig, scenario: &Scenario) -> Result<LinkSet, CliError> {
    let seed = cfg.seed()?;
    let noise = NoisyPositions::new(PositionNoiseModel::new(cfg.links.position_sigma, noise_seed(seed))?);
    let by_id: HashMap<&VehicleId, &VehicleTrace> = scenario.traces.iter().map(|t| (&t.vehicle_id, t)).collect();
    let steps: BTreeSet<u64> = scenario
        .traces
        .iter()
        .flat_map(|tr| tr.samples().iter().map(|(t, _)| *t))
        .collect();
    let first = steps.iter().next().copied().unwrap_or(0);

    let mut jobs = Vec::new();
    for &t in steps.iter().filter(|&&t| (t - first) % cfg.links.time_stride == 0) {
        for (a, b) in enumerate_link_pairs(&scenario.traces, t, cfg.links.max_range) {
            let tx = *by_id[&a].pose_at(t).expect("pair vehicles are present");
            let rx = *by_id[&b].pose_at(t).expect("pair vehicles are present");
            if tx.position().distance(rx.position()) < cfg.links.min_range {
                continue;
            }
            let positions = LinkPositions {
                tx_pose: tx,
                rx_pose: rx,
                noisy_tx_pos: noise.measured(&a, t, tx.position()),
                noisy_rx_pos: noise.measured(&b, t, rx.position()),
            };
            jobs.push((t, a, b, positions));
        }
    }

    let traced: Vec<Result<LinkSample, Error>> = jobs
        .into_par_iter()
        .map(|(t, tx_id, rx_id, positions)| {
            let paths = enumerate_paths(&scenario.map, &positions.tx_pose, &positions.rx_pose, &cfg.propagation)?;
            Ok(LinkSample {
                t,
                tx_id,
                rx_id,
                positions,
                paths,
            })
        })
        .collect();
    let mut set = LinkSet::default();
    for link in traced {
        let link = link?;
        if link.paths.is_empty() {
            set.n_no_path += 1;
        } else {
            set.links.push(link);
        }
    }
    info!(
        "{} links with a propagation path, {} in range without one",
        set.links.len(),
        set.n_no_path
    );
    Ok(set)
}

/// Codebooks and per-strategy inputs shared by all links.
pub struct Engine<'a> {
    pub geom: ArrayGeometry,
    pub codebook: Codebook,
    pub budget: LinkBudget,
    pub rule: SuccessRule,
    pub lms: LmsParams,
    pub latency: LatencyModel,
    pub grid: Option<&'a QuadrantGrid>,
    pub map_pdf: Option<&'a AngularPdf>,
}

impl<'a> Engine<'a> {
    pub fn new(cfg: &CampaignConfig) -> Result<Self, CliError> {
        let geom = cfg.geometry()?;
        Ok(Self {
            codebook: uniform_codebook(cfg.strategies.n_beams, &geom)?,
            geom,
            budget: cfg.budget,
            rule: cfg.success.rule(),
            lms: cfg.strategies.lms.params(),
            latency: cfg.latency.model(),
            grid: None,
            map_pdf: None,
        })
    }
}

/// One line of the results file.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub t: u64,
    pub tx_id: VehicleId,
    pub rx_id: VehicleId,
    pub strategy: StrategyKind,
    pub result: IAResult,
    pub latency_ms: f64,
    /// PCB fell back to codebook order.
    pub fallback: bool,
}

/// Runs every strategy on the same channel realization of `link`.
pub fn run_link(engine: &Engine, link: &LinkSample, strategies: &[StrategyKind]) -> Result<Vec<ResultRow>, CliError> {
    let channel = assemble_channel(&link.paths, &engine.geom)?;
    let fingerprint = channel.fingerprint();
    let ctx = LinkContext::new(
        &channel,
        &engine.codebook,
        &engine.codebook,
        &engine.geom,
        engine.budget,
        link.positions,
    )?;
    let mut rows = Vec::with_capacity(strategies.len());
    for &s in strategies {
        let mut fallback = false;
        let mut pcb = |src: Option<PdfSource>| -> Result<IAResult, CliError> {
            match src.map(|src| run_pcb(&ctx, src, engine.rule)) {
                Some(Ok(r)) => Ok(r),
                Some(Err(Error::MissingQuadrant { .. })) | None => {
                    fallback = true;
                    Ok(run_exhaustive(&ctx, engine.rule))
                }
                Some(Err(e)) => Err(e.into()),
            }
        };
        let result = match s {
            StrategyKind::Exhaustive => run_exhaustive(&ctx, engine.rule),
            StrategyKind::GpsJump => run_gps_jump(&ctx, engine.rule),
            StrategyKind::GpsLms => run_gps_lms(&ctx, &engine.lms)?,
            StrategyKind::PcbTrained => pcb(engine.grid.map(PdfSource::Trained))?,
            StrategyKind::PcbMap => pcb(engine.map_pdf.map(PdfSource::Map))?,
        };
        if ctx.channel.fingerprint() != fingerprint {
            return Err(CliError::Pairing {
                t: link.t,
                tx: link.tx_id.to_string(),
                rx: link.rx_id.to_string(),
            });
        }
        rows.push(ResultRow {
            t: link.t,
            tx_id: link.tx_id.clone(),
            rx_id: link.rx_id.clone(),
            strategy: s,
            latency_ms: engine.latency.latency_ms(result.trials)?,
            result,
            fallback,
        });
    }
    Ok(rows)
}

/// All links in parallel; rows come back ordered by (t, tx, rx, strategy).
pub fn run_campaign(
    engine: &Engine,
    links: &[LinkSample],
    strategies: &[StrategyKind],
) -> Result<Vec<ResultRow>, CliError> {
    let per_link: Vec<Vec<ResultRow>> = links
        .par_iter()
        .map(|l| run_link(engine, l, strategies))
        .collect::<Result<_, _>>()?;
    let mut rows: Vec<ResultRow> = per_link.into_iter().flatten().collect();
    rows.sort_by(|a, b| (a.t, &a.tx_id, &a.rx_id, a.strategy).cmp(&(b.t, &b.tx_id, &b.rx_id, b.strategy)));
    let fallbacks = rows.iter().filter(|r| r.fallback).count();
    if fallbacks > 0 {
        warn!("{fallbacks} PCB runs fell back to codebook order (no PDF for the transmitter)");
    }
    Ok(rows)
}

pub const RESULTS_HEADER: &str = "t,tx_id,rx_id,strategy,trials,success,final_snr_db,latency_ms";

pub fn write_results(path: &Path, rows: &[ResultRow], timestep: f64) -> Result<(), CliError> {
    let io = |e| CliError::io(path, e);
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    writeln!(out, "{RESULTS_HEADER}").map_err(io)?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.t as f64 * timestep,
            r.tx_id,
            r.rx_id,
            r.strategy.name(),
            r.result.trials,
            r.result.success,
            r.result.final_snr,
            r.latency_ms
        )
        .map_err(io)?;
    }
    out.flush().map_err(io)
}
