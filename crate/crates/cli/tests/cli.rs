use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use spinspectra::analysis::sample_spectrum;
use spinspectra::engine::{Stick, StickSpectrum};
use spinspectra::io::spectrum_to_json;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spinspectra"))
}

fn molecule(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../molecules/{name}.json"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// (delta_ppm, amplitude) rows of a spectrum CSV.
fn csv_rows(text: &str) -> Vec<(f64, f64)> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("delta_ppm,amplitude"));
    lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect()
}

/// ε column of a converge CSV, keyed by the max_cluster column.
fn epsilons(text: &str) -> Vec<(String, f64)> {
    text.lines()
        .skip(1)
        .map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            (cols[2].to_string(), cols[3].parse().unwrap())
        })
        .collect()
}

#[test]
fn single_proton_is_centred_on_its_shift() {
    let rows = csv_rows(&ok(&["simulate", path_str(&molecule("single_proton"))]));
    assert!(rows.windows(2).all(|w| w[0].0 > w[1].0));
    let (mut mass, mut moment) = (0.0, 0.0);
    for w in rows.windows(2) {
        let dx = w[0].0 - w[1].0;
        mass += 0.5 * dx * (w[0].1 + w[1].1);
        moment += 0.5 * dx * (w[0].1 * w[0].0 + w[1].1 * w[1].0);
    }
    let shift = 2.0; // single_proton.json
    assert!(
        (moment / mass - shift).abs() < 1e-4,
        "mean {}",
        moment / mass
    );
    assert!((mass - 1.0).abs() < 1e-9);
}

#[test]
fn ax_pair_gives_two_doublets() {
    let rows = csv_rows(&ok(&["simulate", path_str(&molecule("ax_pair"))]));
    let top = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let mut peaks: Vec<f64> = rows
        .windows(3)
        .filter(|w| w[1].1 > w[0].1 && w[1].1 >= w[2].1 && w[1].1 > 0.1 * top)
        .map(|w| w[1].0)
        .collect();
    peaks.sort_by(f64::total_cmp);
    assert_eq!(peaks.len(), 4, "{peaks:?}");
    // ax_pair.json: 1.5 and 4.5 ppm, J = 7 Hz, at 400 MHz
    let (da, dx, j, nu): (f64, f64, f64, f64) = (1.5, 4.5, 7.0, 400e6);
    let half_j = j / (2.0 * nu) * 1e6;
    let weak = [da - half_j, da + half_j, dx - half_j, dx + half_j];
    // two-spin closed form: lines at mean ± (D ± J)/2 with D = √(Δν² + J²)
    let mean = 0.5 * (da + dx);
    let big_d = (((dx - da) * nu * 1e-6).powi(2) + j * j).sqrt();
    let to_ppm = |hz: f64| hz / nu * 1e6;
    let strong = [
        mean - to_ppm(0.5 * (big_d + j)),
        mean - to_ppm(0.5 * (big_d - j)),
        mean + to_ppm(0.5 * (big_d - j)),
        mean + to_ppm(0.5 * (big_d + j)),
    ];
    for ((p, w), s) in peaks.iter().zip(weak).zip(strong) {
        assert!((p - s).abs() < 2e-5, "{p} vs {s}");
        assert!((p - w).abs() < 1e-4, "{p} vs {w}");
    }
}

#[test]
fn malformed_molecule_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"version\": 1, \"nuclei\": [").unwrap();
    let out_file = dir.path().join("out.csv");
    let out = run(&["simulate", path_str(&bad), "-o", path_str(&out_file)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_file.exists());
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn dimension_cap_exits_3_with_a_hint() {
    let out = run(&[
        "simulate",
        path_str(&molecule("chain_12")),
        "--exact",
        "--max-dimension",
        "1000",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("hint:"));
}

fn compare(a: &Path, b: &Path) -> (f64, f64) {
    let text = ok(&["compare", path_str(a), path_str(b)]);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("cos_theta,epsilon"));
    let (c, e) = lines.next().unwrap().split_once(',').unwrap();
    (c.parse().unwrap(), e.parse().unwrap())
}

#[test]
fn compare_reports_cosine_and_epsilon() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    ok(&[
        "simulate",
        path_str(&molecule("propyl")),
        "-o",
        path_str(&a),
    ]);
    assert_eq!(compare(&a, &a).1, -16.0);

    let doubled: String = std::fs::read_to_string(&a)
        .unwrap()
        .lines()
        .enumerate()
        .map(|(k, l)| match (k, l.split_once(',')) {
            (0, _) | (_, None) => format!("{l}\n"),
            (_, Some((x, y))) => format!("{x},{:e}\n", 2.0 * y.parse::<f64>().unwrap()),
        })
        .collect();
    let b = dir.path().join("b.csv");
    std::fs::write(&b, doubled).unwrap();
    assert_eq!(compare(&a, &b).1, -16.0);

    // lone lines 7 ppm apart: the sampled supports do not overlap
    let far = dir.path().join("far.json");
    std::fs::write(
        &far,
        r#"{"version": 1, "nuclei": [{"label": "H", "isotope": "1H", "shift_ppm": 9.0}]}"#,
    )
    .unwrap();
    let c = dir.path().join("c.csv");
    let d = dir.path().join("d.csv");
    ok(&[
        "simulate",
        path_str(&molecule("single_proton")),
        "-o",
        path_str(&c),
    ]);
    ok(&["simulate", path_str(&far), "-o", path_str(&d)]);
    let (cos, _) = compare(&c, &d);
    assert!(cos.abs() < 1e-6, "{cos}");
}

#[test]
fn compare_rejects_mixed_axes() {
    let dir = tempfile::tempdir().unwrap();
    let ppm = dir.path().join("ppm.csv");
    ok(&[
        "simulate",
        path_str(&molecule("single_proton")),
        "-o",
        path_str(&ppm),
    ]);
    let sticks = StickSpectrum::new(vec![Stick {
        frequency: 1.0,
        weight: 1.0,
    }]);
    let angular = dir.path().join("angular.json");
    std::fs::write(
        &angular,
        spectrum_to_json(&sample_spectrum(&sticks, 1.0, 200).unwrap()),
    )
    .unwrap();
    let out = run(&["compare", path_str(&ppm), path_str(&angular)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn converge_reaches_the_exact_spectrum_at_full_size() {
    let text = ok(&[
        "converge",
        path_str(&molecule("chain_8")),
        "--sizes",
        "1..8",
        "--presets",
        "high:high",
    ]);
    let eps = epsilons(&text);
    assert_eq!(eps.len(), 9);
    assert_eq!(eps[0], ("exact".to_string(), -16.0));
    let (size, last) = &eps[8];
    assert_eq!(size, "8");
    assert!(*last <= -10.0, "{last}");
    assert!(
        eps[1].1 > -10.0,
        "single-spin clusters should be visibly inexact"
    );
}

#[test]
fn uncoupled_and_equivalent_molecules_converge_immediately() {
    for (name, sizes) in [("uncoupled_six", "1..6"), ("tbutyl_analogue", "1..9")] {
        let text = ok(&["converge", path_str(&molecule(name)), "--sizes", sizes]);
        let eps = epsilons(&text);
        assert!(eps.len() > 3);
        for (size, e) in eps {
            assert!(e <= -10.0, "{name} size {size}: {e}");
        }
    }
}

#[test]
fn converge_writes_spectra_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let spectra = dir.path().join("spectra");
    let text = ok(&[
        "converge",
        path_str(&molecule("ethyl_fragment")),
        "--sizes",
        "1..3",
        "--presets",
        "low:high,very-low:low",
        "--format",
        "json",
        "--spectra-dir",
        path_str(&spectra),
    ]);
    let rows: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 8);
    assert_eq!(std::fs::read_dir(&spectra).unwrap().count(), 8);
    assert!(spectra.join("20MHz_0.1Hz_exact.csv").exists());
}

#[test]
fn output_is_identical_across_thread_counts() {
    let args = |t: &'static str| {
        vec![
            "--threads",
            t,
            "simulate",
            path_str(&molecule("chain_16")).to_string().leak(),
            "--max-cluster",
            "6",
        ]
    };
    let one = ok(&args("1"));
    let four = ok(&args("4"));
    assert_eq!(one, four);
    assert_eq!(one, ok(&args("1")));
}

#[test]
fn json_and_svg_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("plot.svg");
    let json = ok(&[
        "simulate",
        path_str(&molecule("ethyl_fragment")),
        "--format",
        "json",
        "--svg",
        path_str(&svg),
    ]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!(v.is_object());
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn bench_reports_one_row_per_size() {
    let text = ok(&[
        "bench",
        path_str(&molecule("fragment_x2")),
        "--sizes",
        "2..5",
        "--repeats",
        "1",
    ]);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let rows: Vec<Vec<String>> = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    for (row, m) in rows.iter().zip(2u64..) {
        let predicted: u64 = row[col("predicted_block_dim")].parse().unwrap();
        let expected = (1..=m).product::<u64>()
            / ((1..=m / 2).product::<u64>() * (1..=m - m / 2).product::<u64>());
        assert_eq!(predicted, expected);
        let distinct: usize = row[col("diagonalisations")].parse().unwrap();
        assert!(distinct < 16);
        assert!(row[col("median_seconds")].parse::<f64>().unwrap() >= 0.0);
    }
}
