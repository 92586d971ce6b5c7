//! The subcommands. Each reads a validated configuration and writes its
//! outputs under `output_dir`.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use log::{info, warn};
use rayon::prelude::*;
use sidelink_ia::beamforming::uniform_codebook;
use sidelink_ia::channel::assemble_channel;
use sidelink_ia::codebook_design::{map_pdf_from_raster, render_map, train_pcb, AngularPdf, QuadrantGrid, RasterImage};
use sidelink_ia::ia::{run_exhaustive, LinkContext, SuccessRule};
use sidelink_ia::metrics::{save_loss_report, Ecdf, LossReport, SweepLink, SweepPlan, SweepSetup};
use sidelink_ia::scenario::{save_map, save_traces};
use sidelink_ia::{Error, Point};

use crate::campaign::{load_scenario, run_campaign, sample_links, write_results, Engine, LinkSample, Scenario};
use crate::config::{CampaignConfig, StrategyKind};
use crate::CliError;

/// Margin around the map bounds when rendering it, meters.
const RENDER_MARGIN: f64 = 5.0;

fn output_dir(cfg: &CampaignConfig) -> Result<PathBuf, CliError> {
    let dir = cfg.output_dir.clone();
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    Ok(dir)
}

fn prepare(cfg: &CampaignConfig) -> Result<(Scenario, Vec<LinkSample>), CliError> {
    cfg.validate()?;
    let scenario = load_scenario(cfg)?;
    let set = sample_links(cfg, &scenario)?;
    if set.links.is_empty() {
        warn!("the scenario yields no links");
    }
    Ok((scenario, set.links))
}

/// Exhaustive-search argmax transmit angle of each link, keyed by the true
/// transmitter position. Angles are relative to the transmitter heading.
pub fn training_observations(cfg: &CampaignConfig, links: &[LinkSample]) -> Result<Vec<(Point, f64)>, CliError> {
    let geom = cfg.geometry()?;
    let codebook = uniform_codebook(cfg.strategies.n_beams, &geom)?;
    let obs: Vec<Option<(Point, f64)>> = links
        .par_iter()
        .map(|l| -> Result<_, CliError> {
            let h = assemble_channel(&l.paths, &geom)?;
            let ctx = LinkContext::new(&h, &codebook, &codebook, &geom, cfg.budget, l.positions)?;
            if ctx.max_gain() <= 0.0 {
                return Ok(None);
            }
            let r = run_exhaustive(&ctx, SuccessRule::ArgmaxEquivalence);
            Ok(Some((
                l.positions.tx_pose.position(),
                codebook.angles()[r.chosen_tx_index],
            )))
        })
        .collect::<Result<_, _>>()?;
    Ok(obs.into_iter().flatten().collect())
}

fn train_grid(cfg: &CampaignConfig, links: &[LinkSample]) -> Result<QuadrantGrid, CliError> {
    let obs = training_observations(cfg, links)?;
    let grid = train_pcb(&obs, cfg.pcb.grid_spec(), cfg.pcb.bin_width_deg.to_radians())?;
    if grid.is_empty() {
        warn!("PCB training saw no links; the grid is empty");
    }
    Ok(grid)
}

/// Loads or renders the raster and extracts the street-orientation PDF.
fn compute_map_pdf(cfg: &CampaignConfig, scenario: &Scenario) -> Result<(AngularPdf, Option<RasterImage>), CliError> {
    let (img, rendered) = match &cfg.map_pcb.raster {
        Some(p) => (RasterImage::load_pgm(p, cfg.map_pcb.sidecar.as_deref())?, false),
        None => {
            let img = render_map(&scenario.map, cfg.map_pcb.render_pixel_size, RENDER_MARGIN)
                .map_err(|e| CliError::DegenerateMap(e.to_string()))?;
            (img, true)
        }
    };
    match map_pdf_from_raster(&img, &cfg.map_pcb.params()) {
        Ok(pdf) => Ok((pdf, rendered.then_some(img))),
        Err(e @ (Error::DegeneratePdf(_) | Error::EmptyAccumulator)) => Err(CliError::DegenerateMap(e.to_string())),
        Err(e) => Err(e.into()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateSummary {
    pub n_links: usize,
    pub n_rows: usize,
    pub results: PathBuf,
}

pub fn simulate(cfg: &CampaignConfig) -> Result<SimulateSummary, CliError> {
    let (scenario, links) = prepare(cfg)?;
    let out = output_dir(cfg)?;
    let strategies = &cfg.strategies.run;

    let grid = if !strategies.contains(&StrategyKind::PcbTrained) {
        None
    } else if let Some(p) = &cfg.pcb.grid_file {
        Some(QuadrantGrid::load_csv(p)?)
    } else {
        Some(train_grid(cfg, &links)?)
    };
    let map_pdf = if !strategies.contains(&StrategyKind::PcbMap) {
        None
    } else if let Some(p) = &cfg.map_pcb.pdf_file {
        Some(AngularPdf::load_csv(p)?)
    } else if links.is_empty() {
        None
    } else {
        match compute_map_pdf(cfg, &scenario) {
            Ok((pdf, _)) => Some(pdf),
            Err(CliError::DegenerateMap(msg)) => {
                warn!("map PDF unavailable ({msg}); pcb_map uses codebook order");
                None
            }
            Err(e) => return Err(e),
        }
    };

    let mut engine = Engine::new(cfg)?;
    engine.grid = grid.as_ref();
    engine.map_pdf = map_pdf.as_ref();
    let rows = run_campaign(&engine, &links, strategies)?;

    let results = out.join("results.csv");
    write_results(&results, &rows, cfg.scenario.timestep)?;
    for &s in strategies {
        let trials: Vec<usize> = rows
            .iter()
            .filter(|r| r.strategy == s && r.result.success)
            .map(|r| r.result.trials)
            .collect();
        let path = out.join(format!("ecdf_{}.csv", s.name()));
        if trials.is_empty() {
            let mut f = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
            writeln!(f, "trials,cum_prob").map_err(|e| CliError::io(&path, e))?;
        } else {
            Ecdf::from_counts(&trials)?.save_csv(&path)?;
        }
        let mean = if trials.is_empty() {
            f64::NAN
        } else {
            trials.iter().sum::<usize>() as f64 / trials.len() as f64
        };
        info!("{}: {} successes, mean trials {mean:.2}", s.name(), trials.len());
    }
    Ok(SimulateSummary {
        n_links: links.len(),
        n_rows: rows.len(),
        results,
    })
}

pub fn train(cfg: &CampaignConfig) -> Result<PathBuf, CliError> {
    let (_, links) = prepare(cfg)?;
    let grid = train_grid(cfg, &links)?;
    let path = output_dir(cfg)?.join("pcb_grid.csv");
    grid.save_csv(&path)?;
    info!("trained {} cells", grid.cells().count());
    Ok(path)
}

pub fn map_pcb(cfg: &CampaignConfig) -> Result<PathBuf, CliError> {
    cfg.validate()?;
    let scenario = if cfg.map_pcb.raster.is_some() {
        Scenario {
            map: sidelink_ia::ScenarioMap::empty(),
            traces: Vec::new(),
        }
    } else {
        load_scenario(cfg)?
    };
    let (pdf, rendered) = compute_map_pdf(cfg, &scenario)?;
    let out = output_dir(cfg)?;
    if let Some(img) = rendered {
        img.save_pgm(out.join("map_render.pgm"))?;
    }
    let path = out.join("map_pdf.csv");
    pdf.save_csv(&path)?;
    Ok(path)
}

/// Histogram of the strongest path's departure (or arrival) angle per link.
fn campaign_histogram(links: &[LinkSample], n_bins: usize, arrival: bool) -> Result<AngularPdf, CliError> {
    let width = std::f64::consts::TAU / n_bins as f64;
    let mut counts = vec![0.0; n_bins];
    for l in links {
        let Some(p) = l
            .paths
            .iter()
            .max_by(|a, b| a.amplitude.norm().total_cmp(&b.amplitude.norm()))
        else {
            continue;
        };
        let a = if arrival { p.aoa_az } else { p.aod_az };
        let k = ((a + width / 2.0).rem_euclid(std::f64::consts::TAU) / width) as usize % n_bins;
        counts[k] += 1.0;
    }
    Ok(AngularPdf::centered_circle(counts)?)
}

pub fn quantize(cfg: &CampaignConfig) -> Result<(PathBuf, Vec<LossReport>), CliError> {
    let (_, links) = prepare(cfg)?;
    let q = &cfg.quantize;
    let geom = cfg.geometry()?;
    let from_campaign = |arrival: bool| -> Result<AngularPdf, CliError> {
        match campaign_histogram(&links, q.histogram_bins, arrival) {
            Err(CliError::Core(Error::DegeneratePdf(_))) => {
                warn!("no links to build an angle histogram from; using a uniform PDF");
                Ok(AngularPdf::uniform_circle(q.histogram_bins)?)
            }
            r => r,
        }
    };
    let tx_pdf = match &q.pdf_file {
        Some(p) => AngularPdf::load_csv(p)?,
        None => from_campaign(false)?,
    };
    let rx_pdf = match (&q.rx_pdf_file, &q.pdf_file) {
        (Some(p), _) => Some(AngularPdf::load_csv(p)?),
        (None, Some(_)) => None,
        (None, None) => Some(from_campaign(true)?),
    };
    let setup = SweepSetup {
        geom: &geom,
        budget: cfg.budget,
        tx_pdf: &tx_pdf,
        rx_pdf: rx_pdf.as_ref(),
        gamma_th_db: q.gamma_th_db,
        lloyd: q.lloyd(),
    };
    let plan = SweepPlan::new(&q.levels_deg, &q.quantizers, setup)?;
    let evals: Vec<_> = links
        .par_iter()
        .map(|l| {
            plan.evaluate(&SweepLink {
                t: l.t,
                paths: l.paths.clone(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect();
    if evals.is_empty() {
        warn!("no link passed admission; losses are reported as 0");
    }
    let reports: Vec<LossReport> = plan.aggregate(&evals)?.into_iter().map(|o| o.report).collect();
    let path = output_dir(cfg)?.join("loss_report.csv");
    save_loss_report(&reports, &path)?;
    Ok((path, reports))
}

/// Writes the generated scenario as `traces.csv` and `map.txt`.
pub fn synth(cfg: &CampaignConfig) -> Result<(PathBuf, PathBuf), CliError> {
    cfg.validate()?;
    let scenario = load_scenario(cfg)?;
    let out = output_dir(cfg)?;
    let (traces, map) = (out.join("traces.csv"), out.join("map.txt"));
    save_traces(&traces, &scenario.traces)?;
    save_map(&map, &scenario.map)?;
    Ok((traces, map))
}
