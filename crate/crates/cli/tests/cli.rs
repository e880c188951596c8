use std::path::Path;
use std::process::{Command, Output};

use irsdm_cli::output::{parse_complex, SWEEP_COLUMNS, TRACE_COLUMNS};
use irsdm_cli::{parse_config, RunConfig};
use irsdm_core::experiments::{run_sweep, Scheme, SchemeOptions, SweepSpec, SweepVariable};
use tempfile::TempDir;

fn irsdm(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_irsdm"))
        .current_dir(dir)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn value_of(out: &str, key: &str) -> f64 {
    out.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no `{key}` in output:\n{out}"))
        .parse()
        .unwrap()
}

#[test]
fn empty_config_file_is_the_default_scenario() {
    let dir = TempDir::new().unwrap();
    let path = write(dir.path(), "empty.toml", "");
    assert_eq!(parse_config(Path::new(&path)).unwrap(), RunConfig::default());
    let o = irsdm(dir.path(), &["--config", &path, "solve", "--scheme", "ZF"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(value_of(&stdout(&o), "r_s") >= 0.0);
}

#[test]
fn applied_defaults_are_logged() {
    let dir = TempDir::new().unwrap();
    let path = write(dir.path(), "c.toml", "m = 40\n");
    let o = Command::new(env!("CARGO_BIN_EXE_irsdm"))
        .current_dir(dir.path())
        .env("IRSDM_LOG", "info")
        .args(["--config", &path, "complexity"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let err = stderr(&o);
    assert!(err.contains("n_a not set, using default 16"), "{err}");
    assert!(!err.contains("m not set"), "{err}");
}

#[test]
fn validation_errors_exit_with_status_2_and_name_the_key() {
    let dir = TempDir::new().unwrap();
    for (text, key) in [
        ("beta3 = 0.5\n", "beta3"),
        ("m = 0\n", "m"),
        ("theta_t_ab = 7.0\n", "theta_t_ab"),
        ("d_ie = -1.0\n", "d_ie"),
        ("nonsense = true\n", "nonsense"),
    ] {
        let path = write(dir.path(), "bad.toml", text);
        let o = irsdm(dir.path(), &["--config", &path, "solve"]);
        assert_eq!(o.status.code(), Some(2), "{text}");
        assert!(stderr(&o).contains(key), "{text}: {}", stderr(&o));
    }
    let o = irsdm(dir.path(), &["solve", "--scheme", "bogus"]);
    assert_eq!(o.status.code(), Some(2));
    let o = irsdm(dir.path(), &["--jobs", "0", "complexity"]);
    assert_eq!(o.status.code(), Some(2));
    let o = irsdm(dir.path(), &["sweep", "--variable", "m", "--values", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = irsdm(dir.path(), &["--config", "/nonexistent/x.toml", "solve"]);
    assert_eq!(o.status.code(), Some(2));
    let o = irsdm(dir.path(), &["figure", "fig9"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_with_status_1() {
    let dir = TempDir::new().unwrap();
    // A single-antenna Bob leaves no room for the zero-forcing constraint.
    let path = write(dir.path(), "nb1.toml", "n_b = 1\n");
    let o = irsdm(dir.path(), &["--config", &path, "solve", "--scheme", "ZF"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("error:"));
}

#[test]
fn solve_is_deterministic() {
    let dir = TempDir::new().unwrap();
    for scheme in ["GAO", "ZF", "RandomPhase", "NoIRS"] {
        let a = dir.path().join("a");
        let b = dir.path().join("b");
        for out in [&a, &b] {
            let o = irsdm(
                dir.path(),
                &["--out", out.to_str().unwrap(), "solve", "--scheme", scheme, "--dump"],
            );
            assert_eq!(o.status.code(), Some(0), "{scheme}: {}", stderr(&o));
        }
        let name = format!("solution_{scheme}.txt");
        let da = std::fs::read(a.join(&name)).unwrap();
        assert_eq!(da, std::fs::read(b.join(&name)).unwrap(), "{scheme}");
        let manifest = format!("solution_{scheme}.manifest.json");
        assert_eq!(
            std::fs::read(a.join(&manifest)).unwrap().len(),
            std::fs::read(b.join(&manifest)).unwrap().len()
        );
    }
}

#[test]
fn solution_dump_layout() {
    let dir = TempDir::new().unwrap();
    let o = irsdm(dir.path(), &["--out", "o", "solve", "--scheme", "ZF", "--dump"]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("o/solution_ZF.txt")).unwrap();
    assert!(text.contains("scheme = ZF\n"));
    let m = RunConfig::default().scenario.m;
    let thetas: Vec<_> = text.lines().filter(|l| l.starts_with("theta[")).collect();
    assert_eq!(thetas.len(), m);
    for line in thetas {
        let z = parse_complex(line.split(" = ").nth(1).unwrap()).unwrap();
        assert!((z.norm() - 1.0).abs() < 1e-10, "{line}");
    }
    let ub1: Vec<_> = text
        .lines()
        .filter(|l| l.starts_with("u_b1["))
        .map(|l| parse_complex(l.split(" = ").nth(1).unwrap()).unwrap())
        .collect();
    assert_eq!(ub1.len(), RunConfig::default().scenario.n_b);
    assert!((ub1.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-10);

    let o = irsdm(dir.path(), &["--out", "o", "solve", "--scheme", "NoIRS", "--dump"]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("o/solution_NoIRS.txt")).unwrap();
    assert!(!text.contains("theta"));
    assert!(text.contains("u_b[0] = "));
}

#[test]
fn sweep_csv_round_trips_to_printed_precision() {
    let dir = TempDir::new().unwrap();
    let o = irsdm(
        dir.path(),
        &[
            "--out",
            "o",
            "--seed",
            "9",
            "sweep",
            "--variable",
            "ps_dbm",
            "--values",
            "20,30",
            "--trials",
            "2",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv_path = dir.path().join("o/sweep.csv");
    let raw = std::fs::read_to_string(&csv_path).unwrap();
    assert!(!raw.contains('\r'));
    let (header, rows) = read_csv(&csv_path);
    assert_eq!(header, SWEEP_COLUMNS);

    let spec = SweepSpec {
        trials: 2,
        options: SchemeOptions {
            seed: 9,
            ..SchemeOptions::default()
        },
        ..SweepSpec::new(SweepVariable::PsDbm, vec![20.0, 30.0], Scheme::ALL.to_vec())
    };
    let expected = run_sweep(&RunConfig::default().scenario, &spec).unwrap();
    assert_eq!(rows.len(), expected.len());
    let close = |s: &str, x: f64| {
        let y: f64 = s.parse().unwrap();
        (y - x).abs() <= 5e-12 * x.abs()
    };
    for (row, exp) in rows.iter().zip(&expected) {
        assert_eq!(row[0], exp.scheme.name());
        assert_eq!(row[3], exp.trial.to_string());
        for (i, x) in [(2, exp.value), (4, exp.r_b), (5, exp.r_e), (6, exp.r_s), (7, exp.rps)] {
            assert!(close(&row[i], x), "column {} {} vs {x}", SWEEP_COLUMNS[i], row[i]);
        }
    }
    let random_rows = rows.iter().filter(|r| r[0] == "RandomPhase").count();
    assert_eq!(random_rows, 4);
    assert!(dir.path().join("o/plot_sweep.py").exists());
    assert!(dir.path().join("o/sweep.manifest.json").exists());
}

#[test]
fn sweep_is_identical_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    for (out, jobs) in [("one", "1"), ("four", "4")] {
        let o = irsdm(
            dir.path(),
            &[
                "--out",
                out,
                "--jobs",
                jobs,
                "sweep",
                "--variable",
                "m",
                "--values",
                "20,40",
                "--trials",
                "3",
            ],
        );
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(
        std::fs::read(dir.path().join("one/sweep.csv")).unwrap(),
        std::fs::read(dir.path().join("four/sweep.csv")).unwrap()
    );
}

#[test]
fn fig2_csv_schema() {
    let dir = TempDir::new().unwrap();
    let o = irsdm(dir.path(), &["--out", "o", "figure", "fig2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = read_csv(&dir.path().join("o/fig2.csv"));
    assert_eq!(header, TRACE_COLUMNS);
    for scheme in ["GAO", "ZF"] {
        for m in ["20", "200"] {
            let n = rows.iter().filter(|r| r[0] == scheme && r[1] == m).count();
            assert!(n >= 1, "{scheme} M={m}");
        }
    }
    let script = std::fs::read_to_string(dir.path().join("o/plot_fig2.py")).unwrap();
    assert!(script.contains("\"fig2.csv\""));
}

#[test]
fn fig4_covers_the_m_axis() {
    let dir = TempDir::new().unwrap();
    let o = irsdm(dir.path(), &["--out", "o", "figure", "fig4"]);
    assert_eq!(o.status.code(), Some(0));
    let (_, rows) = read_csv(&dir.path().join("o/fig4.csv"));
    let mut ms: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    ms.sort_by(f64::total_cmp);
    ms.dedup();
    assert_eq!(ms, vec![40.0, 80.0, 120.0, 160.0, 200.0]);
    assert!(rows.iter().all(|r| r[1] == "m"));
    for r in rows.iter().filter(|r| r[0] == "GAO" || r[0] == "ZF") {
        assert!(r[11].parse::<f64>().unwrap() >= 1.0, "{r:?}");
    }
}

#[test]
fn fig6_uses_its_geometry_override() {
    let dir = TempDir::new().unwrap();
    let o = irsdm(dir.path(), &["--out", "o", "figure", "fig6"]);
    assert_eq!(o.status.code(), Some(0));
    let (_, rows) = read_csv(&dir.path().join("o/fig6.csv"));
    assert_eq!(rows.iter().filter(|r| r[0] == "GAO").count(), 72);
    // Eve on Alice's IRS direction is the one geometry that leaves her channel rank one.
    let failed: Vec<f64> = rows
        .iter()
        .filter(|r| r[0] == "GAO" && !r[12].is_empty())
        .map(|r| r[2].parse().unwrap())
        .collect();
    let pi = std::f64::consts::PI;
    assert_eq!(failed.len(), 2);
    assert!((failed[0] - pi / 12.0).abs() < 1e-10);
    assert!((failed[1] - (2.0 * pi - pi / 12.0)).abs() < 1e-10);
}

#[test]
fn fig5_tags_rows_with_snr() {
    let dir = TempDir::new().unwrap();
    let o = irsdm(dir.path(), &["--out", "o", "figure", "fig5"]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = read_csv(&dir.path().join("o/fig5.csv"));
    assert_eq!(header[0], "snr_db");
    assert_eq!(rows.len(), 3 * 2 * 5);
}

#[test]
fn manifest_digest_ignores_key_order() {
    let dir = TempDir::new().unwrap();
    let a = write(dir.path(), "a.toml", "m = 40\nps_dbm = 30\nd_ab = 60\n");
    let b = write(dir.path(), "b.toml", "d_ab = 60.0\nm = 40\nps_w = 1.0\n");
    let mut digests = Vec::new();
    for (cfg, out) in [(&a, "oa"), (&b, "ob")] {
        let o = irsdm(dir.path(), &["--config", cfg, "--out", out, "complexity"]);
        assert_eq!(o.status.code(), Some(0));
        let text = std::fs::read_to_string(dir.path().join(out).join("complexity.manifest.json")).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["timestamp"], 1_700_000_000u64);
        assert_eq!(v["command"], "complexity");
        digests.push(v["config_digest"].as_str().unwrap().to_string());
    }
    assert_eq!(digests[0], digests[1]);
}

#[test]
fn complexity_table() {
    let dir = TempDir::new().unwrap();
    let o = irsdm(
        dir.path(),
        &["--out", "o", "complexity", "--m", "1,200", "--d", "6", "--l", "3"],
    );
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = read_csv(&dir.path().join("o/complexity.csv"));
    assert_eq!(header, ["M", "flops_gao", "flops_zf", "zf_over_gao"]);
    let gao: f64 = rows[1][1].parse().unwrap();
    let zf: f64 = rows[1][2].parse().unwrap();
    assert_eq!(gao, 51_325_728.0);
    assert!(zf < gao);
}

#[test]
fn flags_reach_the_solvers() {
    let dir = TempDir::new().unwrap();
    let o = irsdm(dir.path(), &["--eve", "worst-case", "solve", "--scheme", "ZF"]);
    assert!(stdout(&o).contains("eve = worst-case"));
    let o = irsdm(dir.path(), &["--literal-zf", "solve", "--scheme", "ZF"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = irsdm(dir.path(), &["--no-safeguard", "solve", "--scheme", "GAO"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let a = stdout(&irsdm(dir.path(), &["--seed", "3", "solve", "--scheme", "RandomPhase"]));
    let b = stdout(&irsdm(dir.path(), &["--seed", "4", "solve", "--scheme", "RandomPhase"]));
    assert_ne!(value_of(&a, "r_s"), value_of(&b, "r_s"));
}

#[test]
fn shipped_schema_lists_the_defaults() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../config/schema.toml");
    assert_eq!(parse_config(&path).unwrap(), RunConfig::default());
}
