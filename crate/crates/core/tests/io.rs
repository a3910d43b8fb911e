mod common;

use common::{corpus_all, corpus_dir};
use spinspectra::analysis::{cosine_similarity, normalize, sample_spectrum, to_ppm_axis, Axis};
use spinspectra::engine::{Stick, StickSpectrum};
use spinspectra::io::{
    read_spectrum, spectrum_from_csv, spectrum_from_json, spectrum_to_csv, spectrum_to_json,
    spectrum_to_svg, MoleculeFile, CSV_HEADER,
};
use spinspectra::{Error, SpectrometerSettings};

fn ppm_spectrum() -> spinspectra::Spectrum {
    let s = SpectrometerSettings::from_mhz(400.0, 1.0).unwrap();
    let w0 = s.reference_omega();
    let sticks = StickSpectrum::new(vec![
        Stick {
            frequency: w0 * (1.0 + 1.0e-6),
            weight: 1.0,
        },
        Stick {
            frequency: w0 * (1.0 + 2.5e-6),
            weight: 3.0,
        },
    ]);
    let raw = sample_spectrum(&sticks, s.eta(), 2000).unwrap();
    normalize(&to_ppm_axis(&raw, &s).unwrap(), 4.0).unwrap()
}

#[test]
fn every_corpus_file_parses_and_round_trips() {
    let all = corpus_all();
    assert!(all.len() >= 20);
    for (name, sys) in all {
        let file = MoleculeFile::from_system(&sys);
        let again = MoleculeFile::parse(&file.to_json())
            .unwrap()
            .to_system()
            .unwrap();
        assert_eq!(again.fingerprint(), sys.fingerprint(), "{name}");
    }
    let text = std::fs::read_to_string(corpus_dir().join("ax_pair.json")).unwrap();
    assert!(MoleculeFile::parse(&text)
        .unwrap()
        .description
        .unwrap()
        .contains("Invented"));
}

#[test]
fn malformed_molecules_are_parse_errors() {
    let cases = [
        "{not json",
        r#"{"version": 2, "nuclei": []}"#,
        r#"{"version": 1, "nuclei": [{"label": "H", "isotope": "13C", "shift_ppm": 1.0}]}"#,
        r#"{"version": 1, "nuclei": [{"label": "H", "isotope": "1H", "shift_ppm": 1.0}],
            "couplings": [{"i": 0, "j": 3, "j_hz": 7.0}]}"#,
        r#"{"version": 1, "nuclei": [{"label": "a", "isotope": "1H", "shift_ppm": 1.0},
                                    {"label": "b", "isotope": "1H", "shift_ppm": 2.0}],
            "couplings": [{"i": 0, "j": 1, "j_hz": 7.0}, {"i": 1, "j": 0, "j_hz": 7.0}]}"#,
    ];
    for text in cases {
        let result = MoleculeFile::parse(text).and_then(|f| f.to_system());
        assert!(matches!(result, Err(Error::Parse(_))), "{text}: {result:?}");
    }
}

#[test]
fn custom_isotopes_are_honoured() {
    let text = r#"{"version": 1,
        "nuclei": [{"label": "D", "isotope": "2H", "shift_ppm": 0.0}],
        "isotopes": [{"symbol": "2H", "gamma": 41066279.1, "spin": 1.0}]}"#;
    let sys = MoleculeFile::parse(text).unwrap().to_system().unwrap();
    assert_eq!(sys.nucleus(0).isotope.twice_spin, 2);
    let back = MoleculeFile::from_system(&sys);
    assert_eq!(back.isotopes.len(), 1);
}

#[test]
fn csv_is_descending_ppm_and_round_trips() {
    let spec = ppm_spectrum();
    let csv = spectrum_to_csv(&spec).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    let ppm: Vec<f64> = lines
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(ppm.windows(2).all(|w| w[0] > w[1]));
    assert!(csv.ends_with('\n'));
    let back = spectrum_from_csv(&csv).unwrap();
    assert_eq!(back.axis, Axis::Ppm);
    assert_eq!(cosine_similarity(&spec, &back).unwrap().epsilon, -16.0);
}

#[test]
fn json_round_trip_is_lossless() {
    let spec = ppm_spectrum();
    let back = spectrum_from_json(&spectrum_to_json(&spec)).unwrap();
    assert_eq!(back.points, spec.points);
    assert_eq!(back.amplitudes, spec.amplitudes);
    assert_eq!(back.eta, spec.eta);
}

#[test]
fn files_are_detected_by_content() {
    let spec = ppm_spectrum();
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("a.csv");
    let json = dir.path().join("a.dat");
    std::fs::write(&csv, spectrum_to_csv(&spec).unwrap()).unwrap();
    std::fs::write(&json, spectrum_to_json(&spec)).unwrap();
    let a = read_spectrum(&csv).unwrap();
    let b = read_spectrum(&json).unwrap();
    assert_eq!(cosine_similarity(&a, &b).unwrap().epsilon, -16.0);
}

#[test]
fn angular_spectra_cannot_be_written_as_csv() {
    let sticks = StickSpectrum::new(vec![Stick {
        frequency: 1.0,
        weight: 1.0,
    }]);
    let raw = sample_spectrum(&sticks, 1.0, 100).unwrap();
    assert!(spectrum_to_csv(&raw).is_err());
}

#[test]
fn svg_contains_the_trace() {
    let svg = spectrum_to_svg(&ppm_spectrum(), "demo");
    assert!(svg.starts_with("<svg") && svg.contains("<path") && svg.trim_end().ends_with("</svg>"));
}
