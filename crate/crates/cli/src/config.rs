//! Campaign configuration, read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sidelink_ia::channel::{ArrayGeometry, PropagationConfig};
use sidelink_ia::codebook_design::{GridSpec, LloydMaxParams, MapPdfParams};
use sidelink_ia::ia::{GmaxMode, LatencyModel, LmsParams, SuccessRule};
use sidelink_ia::scenario::{SyntheticKind, SyntheticParams, DEFAULT_TIMESTEP};
use sidelink_ia::{LinkBudget, Point, Quantizer};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    /// Master seed; required before anything runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub propagation: PropagationConfig,
    #[serde(default)]
    pub array: ArrayConfig,
    #[serde(default)]
    pub budget: LinkBudget,
    #[serde(default)]
    pub links: LinkConfig,
    #[serde(default)]
    pub strategies: StrategyConfig,
    #[serde(default)]
    pub success: SuccessConfig,
    #[serde(default)]
    pub latency: LatencyConfig,
    #[serde(default)]
    pub pcb: PcbConfig,
    #[serde(default)]
    pub map_pcb: MapPcbConfig,
    #[serde(default)]
    pub quantize: QuantizeConfig,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            seed: None,
            output_dir: default_output_dir(),
            scenario: ScenarioConfig::default(),
            propagation: PropagationConfig::default(),
            array: ArrayConfig::default(),
            budget: LinkBudget::default(),
            links: LinkConfig::default(),
            strategies: StrategyConfig::default(),
            success: SuccessConfig::default(),
            latency: LatencyConfig::default(),
            pcb: PcbConfig::default(),
            map_pcb: MapPcbConfig::default(),
            quantize: QuantizeConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioSource {
    Synthetic,
    Files,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub source: ScenarioSource,
    pub synthetic: SyntheticKind,
    pub timestep: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub traces: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map: Option<PathBuf>,
    /// Overrides on top of the per-kind synthetic defaults.
    pub params: SyntheticOverrides,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            source: ScenarioSource::Synthetic,
            synthetic: SyntheticKind::Crossroad,
            timestep: DEFAULT_TIMESTEP,
            traces: None,
            map: None,
            params: SyntheticOverrides::default(),
        }
    }
}

macro_rules! overrides {
    ($($field:ident: $ty:ty),* $(,)?) => {
        #[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
        #[serde(default, deny_unknown_fields)]
        pub struct SyntheticOverrides {
            $(
                #[serde(skip_serializing_if = "Option::is_none")]
                pub $field: Option<$ty>,
            )*
        }

        impl SyntheticOverrides {
            fn apply(&self, p: &mut SyntheticParams) {
                $(if let Some(v) = self.$field { p.$field = v; })*
            }
        }
    };
}

overrides! {
    extent: f64,
    vehicles_per_lane: usize,
    max_speed: f64,
    min_speed_fraction: f64,
    n_steps: u64,
    lane_offset: f64,
    street_width: f64,
    block_size: f64,
    block_gap: f64,
    buildings: usize,
    building_height: f64,
    radius: f64,
    lanes: usize,
}

impl ScenarioConfig {
    pub fn synthetic_params(&self, seed: u64) -> SyntheticParams {
        let mut p = SyntheticParams::for_kind(self.synthetic);
        self.params.apply(&mut p);
        p.timestep = self.timestep;
        p.seed = seed;
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArrayConfig {
    pub n_rings: usize,
    pub n_per_ring: usize,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self {
            n_rings: 4,
            n_per_ring: 16,
        }
    }
}

/// Which vehicle pairs become links.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkConfig {
    pub max_range: f64,
    pub min_range: f64,
    /// Per-axis standard deviation of position reports, meters.
    pub position_sigma: f64,
    /// Use every n-th timestep.
    pub time_stride: u64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            max_range: 200.0,
            min_range: 0.0,
            position_sigma: 4.0,
            time_stride: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Exhaustive,
    GpsJump,
    GpsLms,
    PcbTrained,
    PcbMap,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 5] = [
        StrategyKind::Exhaustive,
        StrategyKind::GpsJump,
        StrategyKind::GpsLms,
        StrategyKind::PcbTrained,
        StrategyKind::PcbMap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Exhaustive => "exhaustive",
            StrategyKind::GpsJump => "gps_jump",
            StrategyKind::GpsLms => "gps_lms",
            StrategyKind::PcbTrained => "pcb_trained",
            StrategyKind::PcbMap => "pcb_map",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GmaxSetting {
    Expected,
    Genie,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LmsConfig {
    pub eta0: f64,
    pub eps_stop: f64,
    pub max_trials: usize,
    pub gmax: GmaxSetting,
    pub codebook_steps: bool,
}

impl Default for LmsConfig {
    fn default() -> Self {
        let d = LmsParams::default();
        Self {
            eta0: d.eta0,
            eps_stop: d.eps_stop,
            max_trials: d.max_trials,
            gmax: GmaxSetting::Expected,
            codebook_steps: d.codebook_steps,
        }
    }
}

impl LmsConfig {
    pub fn params(&self) -> LmsParams {
        LmsParams {
            eta0: self.eta0,
            eps_stop: self.eps_stop,
            max_trials: self.max_trials,
            gmax: match self.gmax {
                GmaxSetting::Expected => GmaxMode::Expected,
                GmaxSetting::Genie => GmaxMode::Genie,
            },
            codebook_steps: self.codebook_steps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrategyConfig {
    pub run: Vec<StrategyKind>,
    /// Beams per codebook on both ends.
    pub n_beams: usize,
    pub lms: LmsConfig,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        Self {
            run: StrategyKind::ALL.to_vec(),
            n_beams: 64,
            lms: LmsConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    Argmax,
    SnrThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuccessConfig {
    pub rule: RuleKind,
    pub gamma_th_db: f64,
}

impl Default for SuccessConfig {
    fn default() -> Self {
        Self {
            rule: RuleKind::Argmax,
            gamma_th_db: 0.0,
        }
    }
}

impl SuccessConfig {
    pub fn rule(&self) -> SuccessRule {
        match self.rule {
            RuleKind::Argmax => SuccessRule::ArgmaxEquivalence,
            RuleKind::SnrThreshold => SuccessRule::SnrThreshold {
                gamma_th_db: self.gamma_th_db,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatencyConfig {
    pub n_ssb_per_burst: usize,
    pub slot_ms: f64,
    pub period_ms: f64,
}

impl Default for LatencyConfig {
    fn default() -> Self {
        let d = LatencyModel::default();
        Self {
            n_ssb_per_burst: d.n_ssb_per_burst,
            slot_ms: d.slot_ms,
            period_ms: d.period_ms,
        }
    }
}

impl LatencyConfig {
    pub fn model(&self) -> LatencyModel {
        LatencyModel {
            n_ssb_per_burst: self.n_ssb_per_burst,
            slot_ms: self.slot_ms,
            period_ms: self.period_ms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PcbConfig {
    /// Trained grid to load; when absent `simulate` trains on the campaign.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_file: Option<PathBuf>,
    pub cell_size: f64,
    pub origin_x: f64,
    pub origin_y: f64,
    pub bin_width_deg: f64,
}

impl Default for PcbConfig {
    fn default() -> Self {
        Self {
            grid_file: None,
            cell_size: 50.0,
            origin_x: 0.0,
            origin_y: 0.0,
            bin_width_deg: 360.0 / 64.0,
        }
    }
}

impl PcbConfig {
    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            origin: Point::new(self.origin_x, self.origin_y),
            cell_size: self.cell_size,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MapPcbConfig {
    /// PGM raster; the scenario map is rendered when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raster: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sidecar: Option<PathBuf>,
    /// Precomputed `angle_deg,mass` PDF used by `simulate`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pdf_file: Option<PathBuf>,
    pub edge_threshold: f64,
    pub theta_res_deg: f64,
    pub rho_res: f64,
    pub output_bins: usize,
    /// Meters per pixel when rendering the scenario map.
    pub render_pixel_size: f64,
}

impl Default for MapPcbConfig {
    fn default() -> Self {
        let d = MapPdfParams::default();
        Self {
            raster: None,
            sidecar: None,
            pdf_file: None,
            edge_threshold: d.edge_threshold,
            theta_res_deg: d.theta_res_deg,
            rho_res: d.rho_res,
            output_bins: d.output_bins,
            render_pixel_size: 0.5,
        }
    }
}

impl MapPcbConfig {
    pub fn params(&self) -> MapPdfParams {
        MapPdfParams {
            edge_threshold: self.edge_threshold,
            theta_res_deg: self.theta_res_deg,
            rho_res: self.rho_res,
            output_bins: self.output_bins,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuantizeConfig {
    pub levels_deg: Vec<f64>,
    pub quantizers: Vec<Quantizer>,
    /// Transmit-side PDF for Lloyd-Max; built from the campaign when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pdf_file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rx_pdf_file: Option<PathBuf>,
    pub gamma_th_db: f64,
    pub histogram_bins: usize,
    pub lloyd_tolerance: f64,
    pub lloyd_max_iter: usize,
}

impl Default for QuantizeConfig {
    fn default() -> Self {
        let d = LloydMaxParams::default();
        Self {
            levels_deg: vec![0.0, 5.0, 10.0, 15.0, 20.0],
            quantizers: vec![Quantizer::Uniform, Quantizer::Lloyd],
            pdf_file: None,
            rx_pdf_file: None,
            gamma_th_db: 0.0,
            histogram_bins: 360,
            lloyd_tolerance: d.tolerance,
            lloyd_max_iter: d.max_iter,
        }
    }
}

impl QuantizeConfig {
    pub fn lloyd(&self) -> LloydMaxParams {
        LloydMaxParams {
            tolerance: self.lloyd_tolerance,
            max_iter: self.lloyd_max_iter,
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl CampaignConfig {
    /// Parses a TOML file; relative paths inside are taken relative to the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        if let Some(base) = path.parent() {
            cfg.rebase(base);
        }
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| invalid(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| invalid(e.to_string()))
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        fix(&mut self.scenario.traces);
        fix(&mut self.scenario.map);
        fix(&mut self.pcb.grid_file);
        fix(&mut self.map_pcb.raster);
        fix(&mut self.map_pcb.sidecar);
        fix(&mut self.map_pcb.pdf_file);
        fix(&mut self.quantize.pdf_file);
        fix(&mut self.quantize.rx_pdf_file);
        if self.output_dir.is_relative() {
            self.output_dir = base.join(&self.output_dir);
        }
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| invalid("a seed is required (set `seed` or pass --seed)"))
    }

    pub fn geometry(&self) -> Result<ArrayGeometry, CliError> {
        Ok(ArrayGeometry::half_wavelength(
            self.array.n_rings,
            self.array.n_per_ring,
            self.propagation.carrier_ghz,
        )?)
    }

    /// Checks ranges and that every referenced input file exists.
    pub fn validate(&self) -> Result<(), CliError> {
        self.seed()?;
        self.propagation.validate()?;
        self.budget.validate()?;
        self.geometry()?;
        if !(self.scenario.timestep > 0.0) {
            return Err(invalid("scenario.timestep must be > 0"));
        }
        if self.scenario.source == ScenarioSource::Files && self.scenario.traces.is_none() {
            return Err(invalid("scenario.source = \"files\" needs scenario.traces"));
        }
        let l = &self.links;
        if !(l.max_range > 0.0) || !(l.min_range >= 0.0) || l.min_range >= l.max_range {
            return Err(invalid("links need 0 <= min_range < max_range"));
        }
        if !(l.position_sigma >= 0.0) || !l.position_sigma.is_finite() {
            return Err(invalid("links.position_sigma must be >= 0"));
        }
        if l.time_stride == 0 {
            return Err(invalid("links.time_stride must be >= 1"));
        }
        if self.strategies.n_beams == 0 {
            return Err(invalid("strategies.n_beams must be >= 1"));
        }
        let lms = &self.strategies.lms;
        if lms.max_trials == 0 || !(lms.eta0.is_finite()) || !(lms.eps_stop.is_finite()) {
            return Err(invalid("strategies.lms needs max_trials >= 1 and finite eta0/eps_stop"));
        }
        if self.latency.n_ssb_per_burst == 0 || !(self.latency.slot_ms > 0.0) || !(self.latency.period_ms > 0.0) {
            return Err(invalid("latency values must be positive"));
        }
        if !(self.pcb.cell_size > 0.0) || !(self.pcb.bin_width_deg > 0.0 && self.pcb.bin_width_deg <= 360.0) {
            return Err(invalid("pcb.cell_size and pcb.bin_width_deg must be positive"));
        }
        let m = &self.map_pcb;
        if !(0.0..=1.0).contains(&m.edge_threshold) || m.output_bins == 0 || !(m.render_pixel_size > 0.0) {
            return Err(invalid("map_pcb parameters out of range"));
        }
        let q = &self.quantize;
        if q.levels_deg.iter().any(|l| !(*l >= 0.0 && *l <= 360.0)) {
            return Err(invalid("quantize.levels_deg must lie in [0, 360]"));
        }
        if q.histogram_bins == 0 || q.lloyd_max_iter == 0 {
            return Err(invalid("quantize.histogram_bins and lloyd_max_iter must be >= 1"));
        }
        for (name, path) in [
            ("scenario.traces", &self.scenario.traces),
            ("scenario.map", &self.scenario.map),
            ("pcb.grid_file", &self.pcb.grid_file),
            ("map_pcb.raster", &self.map_pcb.raster),
            ("map_pcb.sidecar", &self.map_pcb.sidecar),
            ("map_pcb.pdf_file", &self.map_pcb.pdf_file),
            ("quantize.pdf_file", &self.quantize.pdf_file),
            ("quantize.rx_pdf_file", &self.quantize.rx_pdf_file),
        ] {
            if let Some(p) = path {
                if !p.exists() {
                    return Err(invalid(format!("{name}: {} does not exist", p.display())));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_the_reference_setup() {
        let c = CampaignConfig::default();
        assert_eq!(c.budget.eirp_dbm, 43.0);
        assert_eq!(c.budget.noise_dbm, -85.5);
        assert_eq!(c.budget.bandwidth_mhz, 400.0);
        assert_eq!(c.propagation.carrier_ghz, 28.0);
        assert_eq!(c.scenario.timestep, 0.1);
        assert_eq!(c.links.max_range, 200.0);
        assert_eq!(c.geometry().unwrap().n_elements(), 64);
        assert!(matches!(c.validate(), Err(CliError::Config(_))));
    }

    #[test]
    fn round_trip_preserves_everything() {
        let text = r#"
            seed = 42
            output_dir = "results"

            [scenario]
            source = "synthetic"
            synthetic = "highway"
            params = { vehicles_per_lane = 3, n_steps = 20 }

            [links]
            position_sigma = 2.5

            [strategies]
            run = ["exhaustive", "pcb_map"]
            lms = { gmax = "genie" }

            [success]
            rule = "snr_threshold"
            gamma_th_db = 3.0

            [quantize]
            quantizers = ["lloyd"]
        "#;
        let a = CampaignConfig::from_toml(text).unwrap();
        assert_eq!(a.seed, Some(42));
        assert_eq!(a.scenario.params.vehicles_per_lane, Some(3));
        assert_eq!(a.strategies.run, vec![StrategyKind::Exhaustive, StrategyKind::PcbMap]);
        assert_eq!(a.strategies.lms.gmax, GmaxSetting::Genie);
        assert_eq!(a.success.rule(), SuccessRule::SnrThreshold { gamma_th_db: 3.0 });
        let b = CampaignConfig::from_toml(&a.to_toml().unwrap()).unwrap();
        assert_eq!(a, b);
        let d = CampaignConfig::default();
        assert_eq!(CampaignConfig::from_toml(&d.to_toml().unwrap()).unwrap(), d);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(CampaignConfig::from_toml("seed = 1\nsede = 2\n").is_err());
        assert!(CampaignConfig::from_toml("[links]\nrange = 2\n").is_err());
    }

    #[test]
    fn overrides_apply_on_kind_defaults() {
        let c = CampaignConfig::from_toml("seed = 3\n[scenario]\nsynthetic = \"highway\"\nparams = { n_steps = 7 }\n")
            .unwrap();
        let p = c.scenario.synthetic_params(9);
        assert_eq!(p.n_steps, 7);
        assert_eq!(p.extent, SyntheticParams::for_kind(SyntheticKind::Highway).extent);
        assert_eq!(p.seed, 9);
    }

    #[test]
    fn missing_files_fail_validation() {
        let mut c = CampaignConfig {
            seed: Some(1),
            ..CampaignConfig::default()
        };
        c.validate().unwrap();
        c.pcb.grid_file = Some(PathBuf::from("/nonexistent/grid.csv"));
        assert!(c.validate().is_err());
    }

    #[test]
    fn relative_paths_follow_the_config_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("t.csv"), "t,vehicle_id,x,y,heading_deg,speed\n").unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "seed = 1\n[scenario]\nsource = \"files\"\ntraces = \"t.csv\"\n").unwrap();
        let c = CampaignConfig::load(&path).unwrap();
        assert_eq!(c.scenario.traces.as_deref(), Some(dir.path().join("t.csv").as_path()));
        assert_eq!(c.output_dir, dir.path().join("out"));
        c.validate().unwrap();
    }
}
