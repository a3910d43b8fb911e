#![allow(dead_code)]

use std::path::PathBuf;

use rand::Rng;
use spinspectra::io::read_molecule;
use spinspectra::{Isotope, Nucleus, SpinSystem};

pub fn protons(shifts_ppm: &[f64], couplings: &[(usize, usize, f64)]) -> SpinSystem {
    let nuclei = shifts_ppm
        .iter()
        .enumerate()
        .map(|(i, &d)| Nucleus::from_ppm(format!("H{i}"), Isotope::proton(), d).unwrap())
        .collect();
    SpinSystem::new(nuclei, couplings.iter().copied()).unwrap()
}

/// δ ∈ [0, 10] ppm, every pair coupled with J ∈ [−20, 20] Hz.
pub fn random_protons(rng: &mut impl Rng, n: usize) -> SpinSystem {
    let shifts: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..10.0)).collect();
    let mut couplings = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            couplings.push((i, j, rng.gen_range(-20.0..20.0)));
        }
    }
    protons(&shifts, &couplings)
}

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../molecules")
}

pub fn corpus(name: &str) -> SpinSystem {
    read_molecule(corpus_dir().join(format!("{name}.json"))).unwrap()
}

/// Every corpus molecule, sorted by name.
pub fn corpus_all() -> Vec<(String, SpinSystem)> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            (name, read_molecule(&p).unwrap())
        })
        .collect()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
