//! Molecule and spectrum file formats.
//!
//! Molecules are versioned JSON:
//!
//! ```json
//! {"version": 1,
//!  "nuclei": [{"label": "Ha", "isotope": "1H", "shift_ppm": 1.2}],
//!  "couplings": [{"i": 0, "j": 1, "j_hz": 7.0}],
//!  "isotopes": [{"symbol": "2H", "gamma": 41066279.1, "spin": 1.0}]}
//! ```
//!
//! Indices are zero-based; `isotopes` and a free-text `description` are
//! optional. Custom isotopes take precedence over the built-in ¹H and ³¹P.
//! Spectra are written as CSV
//! (`delta_ppm,amplitude`, descending ppm) or JSON.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{Axis, Spectrum};
use crate::error::{Error, Result};
use crate::spin::{Isotope, Nucleus, SpinSystem};

pub const MOLECULE_VERSION: u32 = 1;
pub const SPECTRUM_VERSION: u32 = 1;
pub const CSV_HEADER: &str = "delta_ppm,amplitude";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NucleusEntry {
    pub label: String,
    pub isotope: String,
    pub shift_ppm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingEntry {
    pub i: usize,
    pub j: usize,
    pub j_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsotopeEntry {
    pub symbol: String,
    pub gamma: f64,
    pub spin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoleculeFile {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub nuclei: Vec<NucleusEntry>,
    #[serde(default)]
    pub couplings: Vec<CouplingEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub isotopes: Vec<IsotopeEntry>,
}

impl MoleculeFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: Self = serde_json::from_str(text)?;
        if file.version != MOLECULE_VERSION {
            return Err(Error::Parse(format!(
                "unsupported molecule version {} (expected {MOLECULE_VERSION})",
                file.version
            )));
        }
        Ok(file)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn isotope(&self, symbol: &str) -> Result<Isotope> {
        if let Some(custom) = self.isotopes.iter().find(|i| i.symbol == symbol) {
            return Isotope::with_spin(custom.symbol.clone(), custom.gamma, custom.spin);
        }
        Isotope::builtin(symbol).ok_or_else(|| Error::Parse(format!("unknown isotope {symbol:?}")))
    }

    pub fn to_system(&self) -> Result<SpinSystem> {
        let parse_err = |e: Error| match e {
            Error::InvalidInput(msg) => Error::Parse(msg),
            other => other,
        };
        let nuclei = self
            .nuclei
            .iter()
            .map(|n| {
                if !n.shift_ppm.is_finite() {
                    return Err(Error::Parse(format!(
                        "nucleus {}: shift is not finite",
                        n.label
                    )));
                }
                Nucleus::from_ppm(n.label.clone(), self.isotope(&n.isotope)?, n.shift_ppm)
            })
            .collect::<Result<Vec<_>>>()
            .map_err(parse_err)?;
        let mut seen = BTreeSet::new();
        for c in &self.couplings {
            if !seen.insert((c.i.min(c.j), c.i.max(c.j))) {
                return Err(Error::Parse(format!(
                    "coupling ({}, {}) listed twice",
                    c.i, c.j
                )));
            }
        }
        SpinSystem::new(nuclei, self.couplings.iter().map(|c| (c.i, c.j, c.j_hz)))
            .map_err(parse_err)
    }

    /// File describing `system`; isotopes other than the built-ins are listed.
    pub fn from_system(system: &SpinSystem) -> Self {
        let mut isotopes: Vec<IsotopeEntry> = Vec::new();
        for n in system.nuclei() {
            let builtin = Isotope::builtin(&n.isotope.symbol);
            if builtin.as_ref() != Some(&n.isotope)
                && !isotopes.iter().any(|i| i.symbol == n.isotope.symbol)
            {
                isotopes.push(IsotopeEntry {
                    symbol: n.isotope.symbol.clone(),
                    gamma: n.isotope.gamma,
                    spin: n.isotope.spin(),
                });
            }
        }
        Self {
            version: MOLECULE_VERSION,
            description: None,
            nuclei: system
                .nuclei()
                .iter()
                .map(|n| NucleusEntry {
                    label: n.label.clone(),
                    isotope: n.isotope.symbol.clone(),
                    shift_ppm: n.shift_ppm(),
                })
                .collect(),
            couplings: system
                .couplings()
                .map(|(i, j, j_hz)| CouplingEntry { i, j, j_hz })
                .collect(),
            isotopes,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("molecule serialises")
    }
}

pub fn read_molecule(path: impl AsRef<Path>) -> Result<SpinSystem> {
    MoleculeFile::read(path)?.to_system()
}

/// Spectrum CSV with descending ppm rows and shortest round-trip floats.
pub fn spectrum_to_csv(spectrum: &Spectrum<f64>) -> Result<String> {
    if spectrum.axis != Axis::Ppm {
        return Err(Error::AxisMismatch(
            Axis::Ppm.to_string(),
            spectrum.axis.to_string(),
        ));
    }
    let mut out = String::with_capacity(40 * spectrum.len());
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (p, a) in spectrum.points.iter().zip(&spectrum.amplitudes).rev() {
        writeln!(out, "{p},{a}").expect("writing to a String");
    }
    Ok(out)
}

pub fn spectrum_from_csv(text: &str) -> Result<Spectrum<f64>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        _ => return Err(Error::Parse(format!("expected header {CSV_HEADER:?}"))),
    }
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        let mut fields = line.split(',');
        let mut next = |what: &str| -> Result<f64> {
            fields
                .next()
                .ok_or_else(|| Error::Parse(format!("row {}: missing {what}", k + 1)))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("row {}: {what}: {e}", k + 1)))
        };
        let p = next("delta_ppm")?;
        let a = next("amplitude")?;
        rows.push((p, a));
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (points, amplitudes) = rows.into_iter().unzip();
    // CSV carries neither η nor the normalisation flag
    Spectrum::new(Axis::Ppm, points, amplitudes, 0.0, true).map_err(|e| Error::Parse(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SpectrumFile {
    version: u32,
    #[serde(flatten)]
    spectrum: Spectrum<f64>,
}

pub fn spectrum_to_json(spectrum: &Spectrum<f64>) -> String {
    let file = SpectrumFile {
        version: SPECTRUM_VERSION,
        spectrum: spectrum.clone(),
    };
    serde_json::to_string(&file).expect("spectrum serialises")
}

pub fn spectrum_from_json(text: &str) -> Result<Spectrum<f64>> {
    let file: SpectrumFile = serde_json::from_str(text)?;
    if file.version != SPECTRUM_VERSION {
        return Err(Error::Parse(format!(
            "unsupported spectrum version {}",
            file.version
        )));
    }
    file.spectrum
        .validate()
        .map_err(|e| Error::Parse(e.to_string()))?;
    Ok(file.spectrum)
}

/// Reads a CSV or JSON spectrum, picking the format from the content.
pub fn read_spectrum(path: impl AsRef<Path>) -> Result<Spectrum<f64>> {
    let text = std::fs::read_to_string(path)?;
    if text.trim_start().starts_with('{') {
        spectrum_from_json(&text)
    } else {
        spectrum_from_csv(&text)
    }
}

/// Line plot of amplitude against ppm, axis inverted.
pub fn spectrum_to_svg(spectrum: &Spectrum<f64>, title: &str) -> String {
    let (w, h, m) = (900.0, 400.0, 40.0);
    let (lo, hi) = spectrum.support();
    let top = spectrum
        .amplitudes
        .iter()
        .copied()
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let x = |p: f64| m + (hi - p) / (hi - lo) * (w - 2.0 * m);
    let y = |a: f64| h - m - a.max(0.0) / top * (h - 2.0 * m);
    let mut path = String::new();
    for (k, (p, a)) in spectrum.points.iter().zip(&spectrum.amplitudes).enumerate() {
        let _ = write!(
            path,
            "{}{:.2},{:.2}",
            if k == 0 { "M" } else { " L" },
            x(*p),
            y(*a)
        );
    }
    let title = title
        .replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;");
    let unit = match spectrum.axis {
        Axis::Ppm => "ppm",
        Axis::Angular => "rad/s",
    };
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n",
            "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
            "<text x=\"{m}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">{title}</text>\n",
            "<line x1=\"{m}\" y1=\"{base}\" x2=\"{right}\" y2=\"{base}\" stroke=\"black\"/>\n",
            "<text x=\"{m}\" y=\"{label}\" font-family=\"sans-serif\" font-size=\"12\">{hi:.3}</text>\n",
            "<text x=\"{right}\" y=\"{label}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">{lo:.3} {unit}</text>\n",
            "<path d=\"{path}\" fill=\"none\" stroke=\"navy\" stroke-width=\"1\"/>\n",
            "</svg>\n"
        ),
        w = w,
        h = h,
        m = m,
        title = title,
        base = h - m,
        right = w - m,
        label = h - m + 16.0,
        hi = hi,
        lo = lo,
        unit = unit,
        path = path,
    )
}
