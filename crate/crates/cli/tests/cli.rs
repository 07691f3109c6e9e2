use std::fs;
use std::path::Path;
use std::process::Command;

use benard_cli::config::{parse_config, ExperimentConfig, GradP0, InitKind};
use benard_cli::manifest::{list_files, read_manifest, sha256_file, MANIFEST_NAME};
use benard_cli::stages::{pipeline_full, Stage};
use benard_cli::{CliError, EXIT_CONFIG, EXIT_IO, EXIT_NUMERICAL};
use benard_core::snapshot::Snapshot;

const SMALL: &str = "\
nx=16
nz=16
t_end=0.05
dt=0.005
snapshot_every=5
eps=0.25,0.125
tau_end=0.02
dtau=0.005
checkpoint_every=2
cell_n=8
lattice_n1=2
lattice_n2=2
points_per_period=8
";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_benard"))
}

fn write_cfg(dir: &Path, extra: &str) -> std::path::PathBuf {
    let p = dir.join("exp.cfg");
    fs::write(&p, format!("{SMALL}{extra}")).unwrap();
    p
}

#[test]
fn eps_ordering_error_names_the_key() {
    assert!(parse_config("eps=0.25,0.125").is_ok());
    let e = parse_config("eps=0.125,0.25").unwrap_err();
    assert!(e.mentions("eps"), "{e}");
    assert!(e.to_string().contains("eps"));
}

#[test]
fn serialize_round_trips_a_modified_config() {
    let text = "nu=1.0e-2\ngamma=1.25\neps=0.5,0.2,0.1\ninit=random\ntheta_source=false\nchi=gaussian\nout=some/dir\nseed=42\n";
    let cfg = parse_config(text).unwrap();
    assert_eq!(cfg.nu, 1e-2);
    assert_eq!(cfg.init, InitKind::Random);
    let again = parse_config(&cfg.serialize()).unwrap();
    assert_eq!(again, cfg);
}

#[test]
fn type_mismatch_unknown_key_and_missing_file_are_all_reported() {
    let e = parse_config(
        "nx=ten\ncolour=blue\nphis=/nonexistent/phis.txt\ngradp0=/nonexistent/g.csv\ndt_policy=sometimes\n",
    )
    .unwrap_err();
    for k in ["nx", "colour", "phis", "gradp0", "dt_policy"] {
        assert!(e.mentions(k), "{k} missing from\n{e}");
    }
    assert_eq!(e.0.len(), 5);
}

#[test]
fn relative_paths_resolve_against_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.csv"), "i,j,g1,g2\n0,0,0,0\n").unwrap();
    let p = dir.path().join("a.cfg");
    fs::write(&p, "gradp0=g.csv\n").unwrap();
    let cfg = ExperimentConfig::load(&p).unwrap();
    assert_eq!(cfg.gradp0, GradP0::File(dir.path().join("g.csv")));
}

fn all_snapshots_zero(root: &Path) -> usize {
    let mut n = 0;
    for rel in list_files(root).unwrap() {
        if rel.ends_with(".bhf") {
            let s = Snapshot::<f64>::load(root.join(&rel)).unwrap();
            for c in &s.components {
                assert!(c.values().iter().all(|&v| v == 0.0), "{rel} is not zero");
            }
            n += 1;
        }
    }
    n
}

#[test]
fn zero_data_pipeline_writes_zero_artifacts_and_exits_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "init=rest\namp_u=0\namp_theta=0\n");
    let out = dir.path().join("out");
    let st = bin()
        .args(["pipeline", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    assert!(all_snapshots_zero(&out) > 20);
    let diag = fs::read_to_string(out.join("run/diagnostics.csv")).unwrap();
    for line in diag.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        // t, dt and the temperature range are the only non-zero columns at rest
        for (i, v) in cols.iter().enumerate() {
            if ![0, 1, 7, 8].contains(&i) {
                assert_eq!(*v, 0.0, "column {i} in {line}");
            }
        }
    }
    let report = fs::read_to_string(out.join("homogenize/report.csv")).unwrap();
    for line in report.lines().skip(1) {
        let err: f64 = line.rsplit(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(err, 0.0);
    }
}

#[test]
fn same_config_and_seed_give_identical_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = parse_config(&format!("{SMALL}init=random\nseed=11\n")).unwrap();
    cfg.out = dir.path().join("a");
    let a = pipeline_full(&cfg, &cfg.out.clone()).unwrap();
    let mut cfg_b = cfg.clone();
    cfg_b.out = dir.path().join("b");
    let b = pipeline_full(&cfg_b, &cfg_b.out.clone()).unwrap();
    // config.txt records the output directory, every other artifact must agree
    let strip = |m: &Path| -> Vec<(String, String)> {
        read_manifest(m)
            .unwrap()
            .into_iter()
            .filter(|(_, p)| p != "config.txt")
            .collect()
    };
    assert_eq!(strip(&a.manifest), strip(&b.manifest));
    let mut cfg_c = cfg.clone();
    cfg_c.seed = 12;
    cfg_c.out = dir.path().join("c");
    let c = pipeline_full(&cfg_c, &cfg_c.out.clone()).unwrap();
    assert_ne!(strip(&a.manifest), strip(&c.manifest));
}

#[test]
fn manifest_covers_every_written_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = parse_config(SMALL).unwrap();
    cfg.out = dir.path().to_path_buf();
    let o = pipeline_full(&cfg, dir.path()).unwrap();
    let listed: Vec<String> = read_manifest(&o.manifest).unwrap().into_iter().map(|e| e.1).collect();
    assert_eq!(listed, list_files(dir.path()).unwrap());
    for (hash, rel) in read_manifest(&o.manifest).unwrap() {
        assert_eq!(hash, sha256_file(&dir.path().join(rel)).unwrap());
    }
}

#[test]
fn exit_codes_follow_the_failure_kind() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "nx=7\n").unwrap();
    let st = bin()
        .arg("run")
        .arg("--config")
        .arg(&bad)
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(EXIT_CONFIG));

    let st = bin().args(["run", "--config", "/nonexistent/x.cfg"]).status().unwrap();
    assert_eq!(st.code(), Some(EXIT_IO));

    let blow = write_cfg(dir.path(), "init=mode\ninit_amp=1\ng_alpha=1e8\ndt=0.5\nt_end=20\n");
    let out = dir.path().join("blow");
    let o = bin()
        .arg("pipeline")
        .arg("--config")
        .arg(&blow)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(
        o.status.code(),
        Some(EXIT_NUMERICAL),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(String::from_utf8_lossy(&o.stderr).contains("stage `run` failed"));
    let m = read_manifest(&out.join(MANIFEST_NAME)).unwrap();
    assert_eq!(m.iter().map(|e| e.1.as_str()).collect::<Vec<_>>(), ["config.txt"]);

    let e = CliError::Io("x".into()).in_stage(Stage::Cell);
    assert_eq!(e.exit_code(), EXIT_IO);
    assert!(e.to_string().contains("cell"));
}

#[test]
fn subcommands_chain_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "");
    let out = dir.path().join("o");
    let run = |args: &[&str]| {
        let o = bin()
            .args(args)
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    };
    run(&["sweep", "--eps", "0.5,0.25"]);
    assert!(out.join("sweep/eps_0.500000").is_dir());
    run(&["cell"]);
    run(&["meanfield"]);
    let g = out.join("meanfield/gradp0.csv");
    let o = bin()
        .args(["cell", "--gradp0"])
        .arg(&g)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("o2"))
        .status()
        .unwrap();
    assert!(o.success());
    run(&["homogenize"]);
    assert!(out.join("homogenize/report.csv").is_file());
    run(&["run"]);
    run(&["bounds"]);
    let rep = fs::read_to_string(out.join("bounds/report.csv")).unwrap();
    assert!(rep.contains("maximum_principle,,true,true"));
    let snap = out.join("run/theta_000000.bhf");
    let csv_dir = dir.path().join("csv");
    let st = bin()
        .arg("export-csv")
        .arg(&snap)
        .arg("--out")
        .arg(&csv_dir)
        .status()
        .unwrap();
    assert!(st.success());
    let text = fs::read_to_string(csv_dir.join("theta_000000.csv")).unwrap();
    assert!(text.starts_with("x,z,value\n"));
    assert_eq!(text.lines().count(), 1 + 16 * 16);
}
