use std::path::{Path, PathBuf};
use std::time::Instant;

use sympred::cli::{self, main_with_args};
use sympred::config::RunConfig;
use sympred::integrator::SnapshotMatrix;
use sympred::io::{self, Manifest};
use sympred::models::Param;
use sympred::{Matrix, Result};

fn smoke() -> RunConfig {
    RunConfig::from_toml(include_str!("../../../configs/smoke.toml")).unwrap()
}

fn write_config(dir: &Path, cfg: &RunConfig) -> PathBuf {
    let p = dir.join("config.toml");
    std::fs::write(&p, cfg.to_toml()).unwrap();
    p
}

fn run(cfg: &Path, out: &Path, extra: &[&str]) -> i32 {
    let mut args = vec![
        "sympred",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    main_with_args(args)
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path)
        .unwrap()
        .records()
        .map(|r| r.unwrap())
        .collect()
}

#[test]
fn two_steps_give_nine_columns_per_training_parameter() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = smoke();
    cfg.design.nt = 2;
    let c = write_config(dir.path(), &cfg);
    let out = dir.path().join("out");
    assert_eq!(run(&c, &out, &["snapshots"]), cli::EXIT_OK);
    let s = io::read_snapshots(&out.join(cli::SNAPSHOT_FILE)).unwrap();
    assert_eq!(s.data.ncols(), 18);
    assert_eq!(s.data.nrows(), cfg.full_dim());
    let m: Manifest = io::read_json(&out.join(cli::MANIFEST_FILE)).unwrap();
    assert_eq!((m.rows, m.cols, m.nt), (cfg.full_dim(), 18, 2));
}

#[test]
fn snapshot_hash_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let c = write_config(dir.path(), &smoke());
    let hashes: Vec<String> = ["a", "b"]
        .iter()
        .map(|r| {
            let out = dir.path().join(r);
            assert_eq!(run(&c, &out, &["snapshots"]), cli::EXIT_OK);
            let m: Manifest = io::read_json(&out.join(cli::MANIFEST_FILE)).unwrap();
            assert_eq!(
                m.sha256,
                io::sha256_hex(&std::fs::read(out.join(cli::SNAPSHOT_FILE)).unwrap())
            );
            m.sha256
        })
        .collect();
    assert_eq!(hashes[0], hashes[1]);
}

#[test]
fn svd_like_basis_command() {
    let dir = tempfile::tempdir().unwrap();
    let c = write_config(dir.path(), &smoke());
    let out = dir.path().join("out");
    assert_eq!(
        run(&c, &out, &["basis", "--method", "psd_svd_like", "--size", "8"]),
        cli::EXIT_OK
    );
    let stats: serde_json::Value = io::read_json(&out.join("basis_psd_svd_like_8.json")).unwrap();
    assert!(stats["s_v"].as_f64().unwrap() < 1e-6);
    assert_eq!(stats["size"].as_u64(), Some(8));
    let v = io::read_basis(&out.join("basis_psd_svd_like_8.smor")).unwrap();
    assert_eq!(v.size(), 8);
    assert!(v.symplecticity() < 1e-6);

    let x = io::read_snapshots(&out.join(cli::SNAPSHOT_FILE)).unwrap().data;
    let f = sympred::spectral::svd_like_decompose(&x).unwrap();
    let rows = csv_rows(&out.join("spectra_psd_svd_like.csv"));
    assert_eq!(rows.len(), f.p() + f.q());
}

#[test]
fn missing_gap_exits_with_code_five() {
    let dir = tempfile::tempdir().unwrap();
    let c = write_config(dir.path(), &smoke());
    let mut x = Matrix::zeros(6, 3);
    x[(0, 0)] = 1.0;
    x[(1, 1)] = 1.0;
    let snaps = SnapshotMatrix::new(x, vec![Param::new(1.0, 1.0); 3], 1).unwrap();
    let path = dir.path().join("contrived.smor");
    io::write_snapshots(&path, &snaps).unwrap();
    let out = dir.path().join("out");
    let code = run(
        &c,
        &out,
        &[
            "basis",
            "--method",
            "pod_of_ys",
            "--size",
            "2",
            "--snapshots",
            path.to_str().unwrap(),
        ],
    );
    assert_eq!(code, cli::EXIT_GAP);
}

#[test]
fn configuration_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("bad.toml");
    std::fs::write(&c, "[design]\nnt = 10\nunknown_key = 3\n").unwrap();
    assert_eq!(run(&c, &dir.path().join("out"), &["snapshots"]), cli::EXIT_CONFIG);
    assert_eq!(main_with_args(["sympred", "no-such-command"]), cli::EXIT_CONFIG);
    let good = write_config(dir.path(), &smoke());
    assert_eq!(run(&good, &dir.path().join("out"), &["basis"]), cli::EXIT_CONFIG);
    assert_eq!(
        run(
            &good,
            &dir.path().join("out"),
            &["snapshots", "--snapshots", "/nonexistent"]
        ),
        cli::EXIT_OK
    );
    assert_eq!(
        run(
            &good,
            &dir.path().join("out"),
            &[
                "basis",
                "--method",
                "pod_full",
                "--size",
                "4",
                "--snapshots",
                "/nonexistent"
            ]
        ),
        cli::EXIT_IO
    );
}

#[test]
fn resolved_configuration_is_written() -> Result<()> {
    let dir = tempfile::tempdir().unwrap();
    let c = write_config(dir.path(), &smoke());
    let out = dir.path().join("out");
    assert_eq!(run(&c, &out, &["--seed", "7", "snapshots"]), cli::EXIT_OK);
    let r = RunConfig::load(&out.join(cli::RESOLVED_CONFIG_FILE))?;
    assert_eq!(r.design.seed, 7);
    assert_eq!(r.output, out);
    assert!(r.model.amplitude.is_some() && r.model.frequency.is_some());
    let m: Manifest = io::read_json(&out.join(cli::MANIFEST_FILE))?;
    assert_eq!(m.seed, 7);
    Ok(())
}

#[test]
fn smoke_run_is_fast_and_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = smoke();
    cfg.tolerances.error_clamp = 1e-3;
    let c = write_config(dir.path(), &cfg);
    let outs = [dir.path().join("a"), dir.path().join("b")];
    let t = Instant::now();
    assert_eq!(run(&c, &outs[0], &["all"]), cli::EXIT_OK);
    assert!(t.elapsed().as_secs() < 60);
    assert_eq!(run(&c, &outs[1], &["--jobs", "2", "all"]), cli::EXIT_OK);
    assert_eq!(
        std::fs::read(outs[0].join(cli::REPORT_FILE)).unwrap(),
        std::fs::read(outs[1].join(cli::REPORT_FILE)).unwrap()
    );

    let report = csv_rows(&outs[0].join(cli::REPORT_FILE));
    let methods = cfg.methods.len();
    let sizes = cfg.design.sweep.len();
    let cells = methods * sizes * cfg.design.test_count;
    let count = |metric: &str| report.iter().filter(|r| &r[5] == metric).count();
    assert_eq!(count("rel_error"), cells);
    assert_eq!(count("preserved"), cells);
    assert_eq!(count("e_l2"), methods * sizes);

    // Preservation counts agree between report, figure data and summary.
    let summary: serde_json::Value = io::read_json(&outs[0].join(cli::SUMMARY_FILE)).unwrap();
    let fig = csv_rows(&outs[0].join(cli::FIGURE_DIR).join("fig_preservation.csv"));
    for m in summary["methods"].as_array().unwrap() {
        let name = m["method"].as_str().unwrap();
        let from_report = report
            .iter()
            .filter(|r| &r[0] == name && &r[5] == "preserved" && &r[6] == "1")
            .count();
        let from_fig: usize = fig
            .iter()
            .filter(|r| &r[0] == name)
            .map(|r| r[2].parse::<usize>().unwrap())
            .sum();
        assert_eq!(m["preserved"].as_u64().unwrap() as usize, from_report);
        assert_eq!(from_fig, from_report);
    }

    // Clamping applies to figure data only.
    let max_report = report
        .iter()
        .filter(|r| &r[5] == "rel_error")
        .map(|r| r[6].parse::<f64>().unwrap())
        .fold(0.0, f64::max);
    assert!(max_report > 1e-3);
    let boxes = csv_rows(&outs[0].join(cli::FIGURE_DIR).join("fig_relerr_boxplot.csv"));
    for b in &boxes {
        for col in 3..8 {
            assert!(b[col].parse::<f64>().unwrap() <= 1e-3);
        }
    }
    assert!(outs[0].join(cli::TIMINGS_FILE).exists());
}

#[test]
fn evaluate_reuses_snapshots_and_restricts_the_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let c = write_config(dir.path(), &smoke());
    let out = dir.path().join("out");
    assert_eq!(run(&c, &out, &["snapshots"]), cli::EXIT_OK);
    let before = std::fs::metadata(out.join(cli::SNAPSHOT_FILE))
        .unwrap()
        .modified()
        .unwrap();
    assert_eq!(
        run(&c, &out, &["evaluate", "--method", "psd_greedy", "--size", "4"]),
        cli::EXIT_OK
    );
    let after = std::fs::metadata(out.join(cli::SNAPSHOT_FILE))
        .unwrap()
        .modified()
        .unwrap();
    assert_eq!(before, after);
    let report = csv_rows(&out.join(cli::REPORT_FILE));
    assert!(report.iter().all(|r| &r[0] == "psd_greedy" && &r[1] == "4"));
}
