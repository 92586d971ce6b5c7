use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sidelink-ia"))
        .current_dir(dir)
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

#[test]
fn missing_seed_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["simulate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.toml", "seed = 1\n[links]\nmax_rnage = 10.0\n");
    assert_eq!(
        run(dir.path(), &["--config", "c.toml", "simulate"]).status.code(),
        Some(2)
    );
}

#[test]
fn show_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["--seed", "5", "show-config"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("seed = 5"));
    write(dir.path(), "c.toml", &text);
    let again = run(dir.path(), &["--config", "c.toml", "show-config"]);
    assert!(again.status.success());
}

#[test]
fn empty_trace_file_gives_header_only_results() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "traces.csv", "t,vehicle_id,x,y,heading_deg,speed\n");
    write(
        dir.path(),
        "c.toml",
        "seed = 1\noutput_dir = \"out\"\n[scenario]\nsource = \"files\"\ntraces = \"traces.csv\"\n",
    );
    let out = run(dir.path(), &["--config", "c.toml", "simulate"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let results = std::fs::read_to_string(dir.path().join("out/results.csv")).unwrap();
    assert_eq!(
        results,
        "t,tx_id,rx_id,strategy,trials,success,final_snr_db,latency_ms\n"
    );
    let ecdf = std::fs::read_to_string(dir.path().join("out/ecdf_exhaustive.csv")).unwrap();
    assert_eq!(ecdf, "trials,cum_prob\n");
}

#[test]
fn file_scenario_in_open_field_finds_every_link() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "traces.csv",
        "t,vehicle_id,x,y,heading_deg,speed\n0,a,0,0,0,10\n0,b,0,50,0,10\n0,c,60,0,90,10\n0.1,a,0,1,0,10\n0.1,b,0,51,0,10\n",
    );
    write(
        dir.path(),
        "c.toml",
        "seed = 4\n[scenario]\nsource = \"files\"\ntraces = \"traces.csv\"\n[links]\nposition_sigma = 0.0\n\
         [strategies]\nrun = [\"exhaustive\", \"gps_jump\", \"gps_lms\"]\n",
    );
    let out = run(dir.path(), &["--config", "c.toml", "--out", "res", "simulate"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("res/results.csv")).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    // pairs (a,b), (a,c), (b,c) at t=0 and (a,b) at t=0.1, three strategies each
    assert_eq!(rows.len(), 4 * 3);
    assert!(rows.iter().all(|r| r[5] == "true"));
    // exact positions put the jump search on the first beam
    assert!(rows.iter().filter(|r| r[3] == "gps_jump").all(|r| r[4] == "1"));
    assert_eq!(rows[0][..4], ["0", "a", "b", "exhaustive"]);
    assert_eq!(rows.last().unwrap()[..4], ["0.1", "a", "b", "gps_lms"]);
}

#[test]
fn blank_raster_is_a_degenerate_map() {
    let dir = tempfile::tempdir().unwrap();
    let mut pgm = b"P5\n16 16\n255\n".to_vec();
    pgm.extend(std::iter::repeat_n(255u8, 256));
    std::fs::write(dir.path().join("blank.pgm"), pgm).unwrap();
    write(dir.path(), "c.toml", "seed = 1\n[map_pcb]\nraster = \"blank.pgm\"\n");
    let out = run(dir.path(), &["--config", "c.toml", "map-pcb"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn synth_output_feeds_a_file_campaign() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "gen.toml",
        "seed = 8\noutput_dir = \"gen\"\n[scenario.params]\nn_steps = 3\n",
    );
    assert!(run(dir.path(), &["--config", "gen.toml", "synth"]).status.success());
    write(
        dir.path(),
        "use.toml",
        "seed = 8\noutput_dir = \"use\"\n[scenario]\nsource = \"files\"\ntraces = \"gen/traces.csv\"\nmap = \"gen/map.txt\"\n\
         [scenario.params]\nn_steps = 3\n",
    );
    write(
        dir.path(),
        "direct.toml",
        "seed = 8\noutput_dir = \"direct\"\n[scenario.params]\nn_steps = 3\n",
    );
    for cfg in ["use.toml", "direct.toml"] {
        let out = run(dir.path(), &["--config", cfg, "simulate"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read_to_string(dir.path().join("use/results.csv")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("direct/results.csv")).unwrap();
    assert!(a.lines().count() > 1);
    assert_eq!(a.lines().count(), b.lines().count());
}

#[test]
fn quantize_reports_every_level() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "c.toml",
        "seed = 2\n[scenario.params]\nn_steps = 3\n[quantize]\nlevels_deg = [0.0, 20.0]\n",
    );
    let out = run(dir.path(), &["--config", "c.toml", "--out", "q", "quantize"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("q/loss_report.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "level_deg,quantizer,snr_loss_db,se_loss_bps_hz,n_links");
    assert_eq!(lines.len(), 5);
    // level 0 steers at the path angles and loses nothing on single-path links
    for l in &lines[1..] {
        let loss: f64 = l.split(',').nth(2).unwrap().parse().unwrap();
        assert!(loss >= -1e-9, "{l}");
    }
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = sidelink_ia_cli::CampaignConfig::load(&path).unwrap();
        cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}
