use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use semnoma::experiment::{RunManifest, CURVES_HEADER, REGION_FRONTIERS_HEADER};

fn semnoma(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_semnoma"));
    cmd.args(args).env_remove("SEMNOMA_THREADS");
    if let Some(t) = threads {
        cmd.env("SEMNOMA_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

const SMALL: &str = r#"{
  "region": {"band_grid": 11, "power_grid": 11},
  "uplink": {"ensemble_size": 60},
  "solver": {"power_grid": 21},
  "sweep": {"r_req_points": 4}
}"#;

fn write_config(dir: &Path) -> String {
    let p = dir.join("config.json");
    fs::write(&p, SMALL).unwrap();
    p.to_str().unwrap().to_string()
}

fn read(dir: &Path, file: &str) -> String {
    fs::read_to_string(dir.join(file)).unwrap()
}

#[test]
fn rerun_from_manifest_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path());
    for (cmd, file) in [
        ("rate-region", "region_frontiers.csv"),
        ("opportunistic", "opportunistic_curves.csv"),
    ] {
        let first = tmp.path().join(format!("{cmd}-1"));
        let out = semnoma(
            &[
                cmd,
                "--config",
                &cfg,
                "--set",
                &format!("output_dir={}", first.display()),
            ],
            None,
        );
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

        let manifest = first.join("manifest.json");
        let second = tmp.path().join(format!("{cmd}-2"));
        let out = semnoma(
            &[
                cmd,
                "--config",
                manifest.to_str().unwrap(),
                "--set",
                &format!("output_dir={}", second.display()),
            ],
            None,
        );
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(read(&first, file), read(&second, file));

        let m1 = RunManifest::read(&manifest).unwrap();
        let m2 = RunManifest::read(&second.join("manifest.json")).unwrap();
        assert_eq!(m1.experiment, cmd);
        let sums = |m: &RunManifest| {
            m.outputs
                .iter()
                .map(|o| (o.file.clone(), o.sha256.clone()))
                .collect::<Vec<_>>()
        };
        assert_eq!(sums(&m1), sums(&m2));
        assert!(m1.verify(&first).unwrap().is_empty());
    }
}

#[test]
fn headers_are_exact() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path());
    let dir = tmp.path().join("out");
    let set = format!("output_dir={}", dir.display());
    assert_eq!(
        code(&semnoma(&["rate-region", "--config", &cfg, "--set", &set], None)),
        0
    );
    assert_eq!(
        code(&semnoma(
            &["opportunistic", "--config", &cfg, "--set", &set],
            None
        )),
        0
    );
    assert_eq!(
        read(&dir, "region_frontiers.csv").lines().next(),
        Some(REGION_FRONTIERS_HEADER)
    );
    let curves = read(&dir, "opportunistic_curves.csv");
    assert_eq!(curves.lines().next(), Some(CURVES_HEADER));
    // 3 strategies x 4 requirements.
    assert_eq!(curves.lines().count(), 1 + 12);
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path());
    let mut seen: Vec<(String, String)> = Vec::new();
    for threads in ["1", "3"] {
        let dir = tmp.path().join(format!("t{threads}"));
        let set = format!("output_dir={}", dir.display());
        assert_eq!(
            code(&semnoma(
                &["rate-region", "--config", &cfg, "--set", &set],
                Some(threads)
            )),
            0
        );
        assert_eq!(
            code(&semnoma(
                &["opportunistic", "--config", &cfg, "--set", &set],
                Some(threads)
            )),
            0
        );
        seen.push((
            read(&dir, "region_frontiers.csv"),
            read(&dir, "opportunistic_curves.csv"),
        ));
    }
    assert_eq!(seen[0], seen[1]);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path());
    let out_dir = format!("output_dir={}", tmp.path().join("x").display());

    // Config errors.
    assert_eq!(
        code(&semnoma(
            &["rate-region", "--config", &cfg, "--set", "bogus=1"],
            None
        )),
        2
    );
    assert_eq!(
        code(&semnoma(
            &["opportunistic", "--config", &cfg, "--set", "uplink.p_avg=-1"],
            None
        )),
        2
    );
    assert_eq!(
        code(&semnoma(
            &["rate-region", "--config", &cfg, "--set", &out_dir],
            Some("zero")
        )),
        2
    );
    assert_eq!(code(&semnoma(&["frobnicate"], None)), 2);

    // Infeasible everywhere.
    let out = semnoma(
        &[
            "opportunistic",
            "--config",
            &cfg,
            "--set",
            "sweep.r_req=[1e15]",
            "--set",
            &out_dir,
        ],
        None,
    );
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("achievable"));

    // I/O: missing config, unwritable output directory.
    let missing = tmp.path().join("nope.json");
    assert_eq!(
        code(&semnoma(
            &["rate-region", "--config", missing.to_str().unwrap()],
            None
        )),
        4
    );
    let blocker = tmp.path().join("blocker");
    fs::write(&blocker, "").unwrap();
    let out = semnoma(
        &[
            "rate-region",
            "--config",
            &cfg,
            "--set",
            &format!("output_dir={}/sub", blocker.display()),
        ],
        None,
    );
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("blocker"));
}

#[test]
fn plot_subcommand() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("empty");
    fs::create_dir(&empty).unwrap();
    let out = semnoma(&["plot", "--from", empty.to_str().unwrap()], None);
    assert_eq!(code(&out), 4);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("region_frontiers.csv") && stderr.contains("opportunistic_curves.csv"));

    let cfg = write_config(tmp.path());
    let dir = tmp.path().join("out");
    let set = format!("output_dir={}", dir.display());
    assert_eq!(
        code(&semnoma(&["rate-region", "--config", &cfg, "--set", &set], None)),
        0
    );
    assert_eq!(
        code(&semnoma(&["plot", "--from", dir.to_str().unwrap()], None)),
        0
    );
    let script = read(&dir, "plots.gp");
    assert!(script.contains("set multiplot layout 1,3"));
    assert!(!script.contains("opportunistic_curves.csv"));
}
