//! End-to-end checks of the command-line interface: exit codes, output
//! files, and the determinism contract.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_aperiodica"))
}

fn tmp(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("aperiodica-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn gen_writes_a_point_file() {
    let out = tmp("gen.txt");
    let status = bin()
        .args(["gen", "--builtin", "fibonacci", "--radius", "100"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("dim 1; region ball"));
    let parsed = aperiodica::pointset::PointSet::from_text(&text).unwrap();
    assert!(parsed.len() > 100);
    assert!(parsed.labels().is_some());
}

#[test]
fn missing_scheme_is_invalid_config() {
    let status = bin()
        .args(["diffract", "--out"])
        .arg(tmp("never.csv"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn unknown_builtin_is_invalid_config() {
    let status = bin()
        .args(["gen", "--builtin", "dodecagonal", "--out"])
        .arg(tmp("never.txt"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn conflicting_sources_are_invalid_config() {
    let status = bin()
        .args([
            "gen",
            "--builtin",
            "fibonacci",
            "--sequence",
            "fibonacci:n=100",
            "--out",
        ])
        .arg(tmp("never2.txt"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn random_sequence_requires_a_seed() {
    let status = bin()
        .args(["gen", "--sequence", "random:n=100", "--out"])
        .arg(tmp("never3.txt"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn computation_error_exits_two() {
    // census radius larger than the sampled region
    let status = bin()
        .args([
            "patches",
            "--builtin",
            "fibonacci",
            "--radius",
            "20",
            "--patch-radius",
            "50",
            "--out",
        ])
        .arg(tmp("never4.csv"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn reproducible_runs_are_byte_identical() {
    let out1 = tmp("peaks1.csv");
    let out2 = tmp("peaks2.csv");
    for out in [&out1, &out2] {
        let status = bin()
            .args([
                "diffract",
                "--builtin",
                "fibonacci",
                "--radius",
                "300",
                "--kmax",
                "12",
                "--kintmax",
                "10",
                "--reproducible",
                "--threads",
                "2",
                "--out",
            ])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = std::fs::read(&out1).unwrap();
    let b = std::fs::read(&out2).unwrap();
    // identical bodies; headers differ only in the --out path argument
    let strip = |bytes: &[u8]| -> Vec<u8> {
        let text = String::from_utf8(bytes.to_vec()).unwrap();
        text.lines()
            .filter(|l| !l.starts_with("# config"))
            .collect::<Vec<_>>()
            .join("\n")
            .into_bytes()
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn seeded_sequence_runs_are_byte_identical() {
    let out1 = tmp("ac1.csv");
    let out2 = tmp("ac2.csv");
    for out in [&out1, &out2] {
        let status = bin()
            .args([
                "autocorr",
                "--sequence",
                "random:la=1.0,lb=1.41421356,n=2000",
                "--seed",
                "7",
                "--n",
                "900",
                "--s-max",
                "4",
                "--reproducible",
                "--out",
            ])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let strip = |p: &Path| -> String {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with("# config"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&out1), strip(&out2));
}

#[test]
fn diffract_emits_csv_and_svg() {
    let out = tmp("peaks.csv");
    let svg = tmp("peaks.svg");
    let status = bin()
        .args([
            "diffract",
            "--builtin",
            "fibonacci",
            "--radius",
            "300",
            "--kmax",
            "10",
            "--kintmax",
            "8",
            "--grid-step",
            "0.5",
            "--out",
        ])
        .arg(&out)
        .arg("--svg")
        .arg(&svg)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.contains("xi_1,s,intensity_bt,intensity_closed,q_label"));
    assert!(csv.contains("# window transform tail at kintmax:"));
    let svg_text = std::fs::read_to_string(&svg).unwrap();
    assert!(svg_text.starts_with("<svg"));
}

#[test]
fn scheme_file_round_trip() {
    let scheme_path = tmp("fib.json");
    std::fs::write(
        &scheme_path,
        r#"{"phys_dim":1,"int_dim":1,
            "basis":[[1,1.6180339887498949],[1,-0.6180339887498949]],
            "window":{"type":"interval","a":-1.0,"b":0.6180339887498949,"regular":true}}"#,
    )
    .unwrap();
    let out = tmp("from-file.txt");
    let status = bin()
        .args(["gen", "--scheme"])
        .arg(&scheme_path)
        .args(["--radius", "50", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
}

#[test]
fn hulldist_between_generated_files() {
    let a = tmp("ha.txt");
    let b = tmp("hb.txt");
    // two integer lattices, one shifted by 0.1
    let mk = |shift: f64| -> String {
        let points: Vec<Vec<f64>> = (-100..=100).map(|k| vec![k as f64 + shift]).collect();
        aperiodica::pointset::PointSet::new(
            1,
            points,
            aperiodica::pointset::Region::ball(100.2),
            None,
            "lattice",
        )
        .unwrap()
        .to_text()
    };
    std::fs::write(&a, mk(0.0)).unwrap();
    std::fs::write(&b, mk(0.1)).unwrap();
    let out = tmp("dist.csv");
    let output = bin()
        .args(["hulldist", "--a"])
        .arg(&a)
        .arg("--b")
        .arg(&b)
        .args(["--eps-grid", "0.001", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    let d: f64 = stdout.trim().strip_prefix("d = ").unwrap().parse().unwrap();
    assert!((d - 0.05).abs() <= 1e-3, "d = {d}");
}

#[test]
fn ww_deviation_table() {
    let terms = tmp("terms.json");
    std::fs::write(&terms, r#"[{"q":[1,0],"re":1.0,"im":0.0},{"q":[0,1],"re":0.5}]"#).unwrap();
    let out = tmp("dev.csv");
    let status = bin()
        .args(["ww", "--builtin", "fibonacci", "--xi", "0.0", "--terms"])
        .arg(&terms)
        .args(["--nmax", "100", "--reproducible", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.contains("n,sup_dev"));
    // non-resonant deviations decay
    let rows: Vec<(f64, f64)> = csv
        .lines()
        .skip_while(|l| l.starts_with('#') || l.starts_with('n'))
        .filter(|l| !l.is_empty())
        .map(|l| {
            let mut it = l.split(',');
            (
                it.next().unwrap().parse().unwrap(),
                it.next().unwrap().parse().unwrap(),
            )
        })
        .collect();
    assert!(rows.len() >= 2);
    assert!(rows.last().unwrap().1 < rows[0].1);
}

#[test]
fn entropy_csv_shape() {
    let out = tmp("entropy.csv");
    let status = bin()
        .args([
            "entropy",
            "--builtin",
            "fibonacci",
            "--radius",
            "400",
            "--s-list",
            "5,10,20",
            "--reproducible",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.contains("S,N,entropy_density"));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 4);
}
