use std::f64::consts::TAU;

use sidelink_ia::beamforming::{pair_gains, svd_oracle, uniform_codebook, Codebook};
use sidelink_ia::channel::{assemble_channel, enumerate_paths};
use sidelink_ia::codebook_design::{
    lloyd_max, map_pdf_from_raster, pcb_codebook, render_map, train_pcb, GridSpec, LloydMaxParams, MapPdfParams,
    QuadrantGrid,
};
use sidelink_ia::ia::{run_exhaustive, run_gps_jump, run_pcb, LinkContext, LinkPositions, PdfSource, SuccessRule};
use sidelink_ia::scenario::{
    enumerate_link_pairs, generate_synthetic_scenario, load_map, load_traces, save_map, save_traces, SyntheticKind,
    SyntheticParams,
};
use sidelink_ia::{AngularPdf, ArrayGeometry, LinkBudget};

fn crossroad() -> (sidelink_ia::ScenarioMap, Vec<sidelink_ia::VehicleTrace>) {
    let mut p = SyntheticParams::for_kind(SyntheticKind::Crossroad);
    p.n_steps = 10;
    p.seed = 3;
    generate_synthetic_scenario(SyntheticKind::Crossroad, &p).unwrap()
}

#[test]
fn synthetic_links_run_every_strategy_to_the_argmax() {
    let (map, traces) = crossroad();
    let geom = ArrayGeometry::reference();
    let cb = uniform_codebook(64, &geom).unwrap();
    let mut checked = 0;
    for t in [0, 5] {
        for (a, b) in enumerate_link_pairs(&traces, t, 200.0) {
            let pose = |id| {
                *traces
                    .iter()
                    .find(|tr| tr.vehicle_id == id)
                    .unwrap()
                    .pose_at(t)
                    .unwrap()
            };
            let (tx, rx) = (pose(a), pose(b));
            let paths = enumerate_paths(&map, &tx, &rx, &Default::default()).unwrap();
            if paths.is_empty() {
                continue;
            }
            let h = assemble_channel(&paths, &geom).unwrap();
            let ctx =
                LinkContext::new(&h, &cb, &cb, &geom, LinkBudget::default(), LinkPositions::exact(tx, rx)).unwrap();
            let best = pair_gains(&h, &cb, &cb).unwrap().iter().copied().fold(0.0, f64::max);
            assert!(best <= svd_oracle(&h).unwrap().sigma1 * (1.0 + 1e-12));
            for r in [
                run_exhaustive(&ctx, SuccessRule::ArgmaxEquivalence),
                run_gps_jump(&ctx, SuccessRule::ArgmaxEquivalence),
            ] {
                assert!(r.success);
                assert!((1..=64).contains(&r.trials));
                let (_, g) = ctx.best_rx_for(r.chosen_tx_index);
                assert!(g >= best * (1.0 - 1e-9));
            }
            checked += 1;
        }
    }
    assert!(checked > 10, "only {checked} links");
}

#[test]
fn scenario_files_round_trip_into_identical_channels() {
    let (map, traces) = crossroad();
    let dir = tempfile::tempdir().unwrap();
    save_traces(dir.path().join("t.csv"), &traces).unwrap();
    save_map(dir.path().join("m.txt"), &map).unwrap();
    let traces2 = load_traces(dir.path().join("t.csv"), 0.1).unwrap();
    let map2 = load_map(dir.path().join("m.txt")).unwrap();
    let geom = ArrayGeometry::reference();
    let (a, b) = enumerate_link_pairs(&traces, 0, 200.0).remove(0);
    let get = |trs: &[sidelink_ia::VehicleTrace], id: &sidelink_ia::VehicleId| {
        *trs.iter().find(|tr| &tr.vehicle_id == id).unwrap().pose_at(0).unwrap()
    };
    let h1 = enumerate_paths(&map, &get(&traces, &a), &get(&traces, &b), &Default::default()).unwrap();
    let h2 = enumerate_paths(&map2, &get(&traces2, &a), &get(&traces2, &b), &Default::default()).unwrap();
    assert_eq!(h1.len(), h2.len());
    if !h1.is_empty() {
        let (c1, c2) = (
            assemble_channel(&h1, &geom).unwrap(),
            assemble_channel(&h2, &geom).unwrap(),
        );
        let diff = (&c1.entries - &c2.entries).norm() / c1.entries.norm();
        assert!(diff < 1e-9, "relative difference {diff}");
    }
}

#[test]
fn trained_grid_survives_csv_and_orders_the_same() {
    let obs: Vec<_> = (0..200)
        .map(|i| {
            let p = sidelink_ia::Point::new((i % 7) as f64 * 30.0, (i % 3) as f64 * 40.0);
            let a = if i % 4 == 0 { TAU / 2.0 } else { 0.0 };
            (p, a)
        })
        .collect();
    let grid = train_pcb(&obs, GridSpec::default(), TAU / 64.0).unwrap();
    let f = tempfile::NamedTempFile::new().unwrap();
    grid.save_csv(f.path()).unwrap();
    let back = QuadrantGrid::load_csv(f.path()).unwrap();
    let geom = ArrayGeometry::reference();
    for cell in grid.cells() {
        let (a, b) = (grid.pdf(cell).unwrap(), back.pdf(cell).unwrap());
        assert_eq!(grid.observation_count(cell), back.observation_count(cell));
        let (ca, cb) = (
            pcb_codebook(&a, &geom, 64).unwrap(),
            pcb_codebook(&b, &geom, 64).unwrap(),
        );
        assert_eq!(ca.angles(), cb.angles());
        assert_eq!(ca.angles()[0], 0.0);
    }
}

#[test]
fn rendered_crossroad_yields_street_bearings() {
    let (map, _) = crossroad();
    let img = render_map(&map, 0.5, 5.0).unwrap();
    let pdf = map_pdf_from_raster(&img, &MapPdfParams::default()).unwrap();
    let mut ranked: Vec<(f64, f64)> = pdf
        .centers()
        .iter()
        .map(|c| c.to_degrees().rem_euclid(360.0))
        .zip(pdf.masses().iter().copied())
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut top: Vec<f64> = ranked[..4].iter().map(|r| r.0.round()).collect();
    top.sort_by(f64::total_cmp);
    assert_eq!(top, [0.0, 90.0, 180.0, 270.0], "{:?}", &ranked[..8]);
    assert!(ranked[3].1 > 2.0 * ranked[4].1);
}

#[test]
fn map_pdf_orders_search_toward_streets() {
    let (map, traces) = crossroad();
    let pdf = map_pdf_from_raster(&render_map(&map, 0.5, 5.0).unwrap(), &MapPdfParams::default()).unwrap();
    let geom = ArrayGeometry::reference();
    let cb = uniform_codebook(64, &geom).unwrap();
    let (a, b) = enumerate_link_pairs(&traces, 0, 200.0).remove(0);
    let pose = |id| {
        *traces
            .iter()
            .find(|tr| tr.vehicle_id == id)
            .unwrap()
            .pose_at(0)
            .unwrap()
    };
    let (tx, rx) = (pose(a), pose(b));
    let paths = enumerate_paths(&map, &tx, &rx, &Default::default()).unwrap();
    if paths.is_empty() {
        return;
    }
    let h = assemble_channel(&paths, &geom).unwrap();
    let ctx = LinkContext::new(&h, &cb, &cb, &geom, LinkBudget::default(), LinkPositions::exact(tx, rx)).unwrap();
    let r = run_pcb(&ctx, PdfSource::Map(&pdf), SuccessRule::ArgmaxEquivalence).unwrap();
    assert!(r.success);
    assert_eq!(r.trace.len(), r.trials);
}

#[test]
fn lloyd_codebook_saves_and_reloads() {
    let pdf = AngularPdf::centered_circle((0..72).map(|i| if i < 10 { 5.0 } else { 0.5 }).collect()).unwrap();
    let q = lloyd_max(&pdf, 12, &LloydMaxParams::default()).unwrap();
    let geom = ArrayGeometry::reference();
    let cb = q.codebook(&geom).unwrap();
    let f = tempfile::NamedTempFile::new().unwrap();
    cb.save_csv(f.path()).unwrap();
    let back = Codebook::load_csv(f.path(), &geom).unwrap();
    assert_eq!(back.depth(), 12);
    for (a, b) in cb.angles().iter().zip(back.angles()) {
        assert!((a - b).abs() < 1e-9);
    }
}
