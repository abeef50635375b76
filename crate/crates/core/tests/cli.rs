use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_qpc");

fn qpc(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawn qpc")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn assert_ok(o: &Output) {
    assert_eq!(
        o.status.code(),
        Some(0),
        "stdout: {}\nstderr: {}",
        stdout(o),
        stderr(o)
    );
}

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", p.as_ref().display()))
}

/// 64 blocks of 1024 samples with phases redrawn per block.
fn triad(dir: &Path, name: &str, coupled: bool, seed: u64) -> PathBuf {
    let out = dir.join(name);
    let seed = seed.to_string();
    let mut args = vec![
        "generate",
        "triad",
        "--n",
        "65536",
        "--phase-block",
        "1024",
        "--seed",
        &seed,
        "--out",
        path(&out),
    ];
    if coupled {
        args.push("--coupled");
    }
    assert_ok(&qpc(&args));
    out.join("series.csv")
}

#[test]
fn generate_writes_series_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g");
    assert_ok(&qpc(&[
        "generate",
        "triad",
        "--coupled",
        "--n",
        "1000",
        "--seed",
        "4",
        "--out",
        path(&out),
    ]));
    let series = read(out.join("series.csv"));
    assert_eq!(series.lines().count(), 1001);
    assert!(series.starts_with("t,value\n0,"));
    let manifest = read(out.join("manifest.txt"));
    for line in [
        "command=generate triad",
        "seed=4",
        "coupled=true",
        "n=1000",
        "output=series.csv",
    ] {
        assert!(
            manifest.lines().any(|l| l == line),
            "missing `{line}` in\n{manifest}"
        );
    }

    let noise = dir.path().join("noise");
    assert_ok(&qpc(&[
        "generate",
        "noise",
        "--kind",
        "gaussian",
        "--n",
        "500",
        "--out",
        path(&noise),
    ]));
    assert_eq!(read(noise.join("series.csv")).lines().count(), 501);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = qpc(&["generate", "triad", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--n"));

    let o = qpc(&[
        "generate",
        "triad",
        "--n",
        "100",
        "--omega-a",
        "3.5",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).to_lowercase().contains("nyquist"),
        "{}",
        stderr(&o)
    );

    let o = qpc(&[
        "analyze",
        path(&dir.path().join("absent.csv")),
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("absent.csv"));

    assert_eq!(qpc(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(qpc(&["--help"]).status.code(), Some(0));
}

#[test]
fn numerical_failure_exits_3_with_step() {
    let dir = tempfile::tempdir().unwrap();
    let o = qpc(&[
        "simulate",
        "burgers",
        "--n",
        "64",
        "--dt",
        "10",
        "--steps",
        "10",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("step 0"), "{}", stderr(&o));
}

#[test]
fn diffusion_run_writes_probe_snapshots_and_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    assert_ok(&qpc(&[
        "simulate",
        "diffusion",
        "--n",
        "32",
        "--nu",
        "1",
        "--forcing",
        "0",
        "--dt",
        "1e-3",
        "--steps",
        "200",
        "--probe",
        "8",
        "--snapshot-stride",
        "50",
        "--out",
        path(&out),
    ]));
    let probe: Vec<f64> = read(out.join("probe.csv"))
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(probe.len(), 200);
    assert!(probe.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0));
    assert!((probe[199] - (-0.2f64).exp()).abs() < 1e-6);

    let mut snaps: Vec<String> = std::fs::read_dir(out.join("snapshots"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    snaps.sort();
    assert_eq!(
        snaps,
        [
            "snap_00000000.csv",
            "snap_00000050.csv",
            "snap_00000100.csv",
            "snap_00000150.csv",
            "snap_00000200.csv"
        ]
    );
    assert_eq!(
        read(out.join("snapshots/snap_00000050.csv"))
            .lines()
            .count(),
        33
    );
    assert_eq!(read(out.join("spectrum.csv")).lines().count(), 18);
}

#[test]
fn analyze_reports_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let coupled = triad(dir.path(), "c", true, 1);
    let uncoupled = triad(dir.path(), "u", false, 1);

    let out = dir.path().join("ac");
    let o = qpc(&[
        "analyze",
        path(&coupled),
        "--segments",
        "64",
        "--out",
        path(&out),
    ]);
    assert_ok(&o);
    assert_eq!(stdout(&o).lines().next(), Some("PhaseCorrelated"));
    for f in [
        "series.csv",
        "spectrum.csv",
        "bispectrum.csv",
        "heatmap.csv",
        "hotspots.txt",
        "manifest.txt",
    ] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let report = read(out.join("hotspots.txt"));
    assert!(report.contains("verdict: PhaseCorrelated"));
    assert!(report.contains("segments: 64"));

    let o = qpc(&[
        "analyze",
        path(&uncoupled),
        "--out",
        path(&dir.path().join("au")),
    ]);
    assert_ok(&o);
    assert_eq!(
        stdout(&o).lines().next(),
        Some("FullyDevelopedTurbulenceConsistent")
    );

    let o = qpc(&[
        "analyze",
        path(&coupled),
        "--segments",
        "4",
        "--out",
        path(&dir.path().join("a4")),
    ]);
    assert_ok(&o);
    assert_eq!(stdout(&o).lines().next(), Some("Inconclusive"));
}

#[test]
fn batch_analysis_writes_one_directory_per_input() {
    let dir = tempfile::tempdir().unwrap();
    let a = triad(dir.path(), "alpha", true, 2);
    let b = dir.path().join("beta.csv");
    std::fs::copy(triad(dir.path(), "b", false, 2), &b).unwrap();
    let out = dir.path().join("batch");
    let o = qpc(&[
        "analyze",
        "--batch",
        path(&a),
        path(&b),
        "--out",
        path(&out),
    ]);
    assert_ok(&o);
    let text = stdout(&o);
    assert!(text.contains("series.csv: PhaseCorrelated"), "{text}");
    assert!(
        text.contains("beta.csv: FullyDevelopedTurbulenceConsistent"),
        "{text}"
    );
    assert!(out.join("series/hotspots.txt").is_file());
    assert!(out.join("beta/hotspots.txt").is_file());

    let o = qpc(&["analyze", path(&a), path(&b), "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn analyze_reads_ohlc_bars() {
    let dir = tempfile::tempdir().unwrap();
    let bars = dir.path().join("bars.csv");
    let mut text = String::from("datetime,open,high,low,close,volume\n");
    for i in 0..4096 {
        let minute = 15 + i % 375;
        let (h, m) = (9 + minute / 60, minute % 60);
        let day = 2 + i / 375;
        let close = 100.0 + (0.3 * i as f64).sin();
        text.push_str(&format!(
            "2024-01-{day:02} {h:02}:{m:02},{close},{},{},{close},10\n",
            close + 1.0,
            close - 1.0
        ));
    }
    std::fs::write(&bars, text).unwrap();
    let out = dir.path().join("mk");
    let o = qpc(&[
        "analyze",
        "--ohlc",
        "--transform",
        "log-return",
        "--segment-length",
        "256",
        path(&bars),
        "--out",
        path(&out),
    ]);
    assert_ok(&o);
    assert!(
        stderr(&o).contains("4096 rows in, 4096 kept, 0 invalid, 0 duplicate, 11 sessions"),
        "{}",
        stderr(&o)
    );
    assert_eq!(read(out.join("series.csv")).lines().count(), 4096);
}

#[test]
fn report_bundles_three_panels_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let s = triad(dir.path(), "c", true, 3);
    let run = dir.path().join("run");
    assert_ok(&qpc(&["analyze", path(&s), "--out", path(&run)]));

    let r1 = dir.path().join("r1");
    let r2 = dir.path().join("r2");
    assert_ok(&qpc(&["report", "--run", path(&run), "--out", path(&r1)]));
    assert_ok(&qpc(&["report", "--run", path(&run), "--out", path(&r2)]));
    let index = read(r1.join("index.txt"));
    assert_eq!(index.lines().filter(|l| l.starts_with("panel ")).count(), 3);
    assert!(index.contains("verdict: PhaseCorrelated"));
    for f in [
        "index.txt",
        "raw_series.csv",
        "spectrum_loglog.csv",
        "bicoherence_heatmap.csv",
        "manifest.txt",
    ] {
        assert_eq!(
            std::fs::read(r1.join(f)).unwrap(),
            std::fs::read(r2.join(f)).unwrap(),
            "{f}"
        );
    }
    assert!(read(r1.join("spectrum_loglog.csv")).starts_with("bin,log10_frequency,log10_power\n1,"));

    std::fs::remove_file(run.join("heatmap.csv")).unwrap();
    let o = qpc(&[
        "report",
        "--run",
        path(&run),
        "--out",
        path(&dir.path().join("r3")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("heatmap.csv"));
}

#[test]
fn manifest_reproduces_runs() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("sim1");
    assert_ok(&qpc(&[
        "simulate",
        "burgers",
        "--n",
        "64",
        "--dt",
        "1e-3",
        "--steps",
        "300",
        "--forcing",
        "2",
        "--seed",
        "11",
        "--snapshot-stride",
        "100",
        "--out",
        path(&first),
    ]));
    let second = dir.path().join("sim2");
    assert_ok(&qpc(&[
        "--config",
        path(&first.join("manifest.txt")),
        "--out",
        path(&second),
    ]));
    for f in [
        "probe.csv",
        "spectrum.csv",
        "snapshots/snap_00000300.csv",
        "manifest.txt",
    ] {
        assert_eq!(
            std::fs::read(first.join(f)).unwrap(),
            std::fs::read(second.join(f)).unwrap(),
            "{f}"
        );
    }

    // flags on the command line override the file
    let third = dir.path().join("sim3");
    assert_ok(&qpc(&[
        "simulate",
        "burgers",
        "--seed",
        "12",
        "--config",
        path(&first.join("manifest.txt")),
        "--out",
        path(&third),
    ]));
    assert_ne!(read(first.join("probe.csv")), read(third.join("probe.csv")));
    assert!(read(third.join("manifest.txt")).contains("seed=12"));

    let s = triad(dir.path(), "t", true, 5);
    let a1 = dir.path().join("a1");
    let a2 = dir.path().join("a2");
    assert_ok(&qpc(&[
        "analyze",
        path(&s),
        "--window",
        "rectangular",
        "--threshold",
        "0.5",
        "--out",
        path(&a1),
    ]));
    assert_ok(&qpc(&[
        "--config",
        path(&a1.join("manifest.txt")),
        "--out",
        path(&a2),
    ]));
    for f in ["bispectrum.csv", "hotspots.txt", "manifest.txt"] {
        assert_eq!(
            std::fs::read(a1.join(f)).unwrap(),
            std::fs::read(a2.join(f)).unwrap(),
            "{f}"
        );
    }
    assert!(read(a2.join("hotspots.txt")).contains("threshold: 0.5"));
}
