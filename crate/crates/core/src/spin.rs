//! Nuclei, isotopes, the coupled spin system and spectrometer settings.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Proton gyromagnetic ratio in rad·s⁻¹·T⁻¹ (CODATA 2018).
pub const PROTON_GAMMA: f64 = 2.675_221_870_8e8;

/// ³¹P resonance frequency relative to ¹H at the same field.
pub const PHOSPHORUS31_FREQUENCY_RATIO: f64 = 0.404_807_42;

/// Default product-space cap for a single Hamiltonian.
pub const DEFAULT_MAX_DIMENSION: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Isotope {
    pub symbol: String,
    /// Gyromagnetic ratio in rad·s⁻¹·T⁻¹.
    pub gamma: f64,
    /// Twice the spin quantum number, so that half-integers stay exact.
    pub twice_spin: u32,
}

impl Isotope {
    pub fn new(symbol: impl Into<String>, gamma: f64, twice_spin: u32) -> Result<Self> {
        let symbol = symbol.into();
        if !gamma.is_finite() || gamma == 0.0 {
            return Err(Error::InvalidInput(format!(
                "isotope {symbol}: gyromagnetic ratio must be finite and non-zero"
            )));
        }
        if twice_spin == 0 {
            return Err(Error::InvalidInput(format!(
                "isotope {symbol}: spin must be at least 1/2"
            )));
        }
        Ok(Self {
            symbol,
            gamma,
            twice_spin,
        })
    }

    /// Builds an isotope from a spin given as a decimal (0.5, 1, 1.5, ...).
    pub fn with_spin(symbol: impl Into<String>, gamma: f64, spin: f64) -> Result<Self> {
        let twice = 2.0 * spin;
        if !twice.is_finite() || twice < 1.0 || (twice - twice.round()).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "spin {spin} is not a positive half-integer"
            )));
        }
        Self::new(symbol, gamma, twice.round() as u32)
    }

    pub fn proton() -> Self {
        Self {
            symbol: "1H".into(),
            gamma: PROTON_GAMMA,
            twice_spin: 1,
        }
    }

    pub fn phosphorus31() -> Self {
        Self {
            symbol: "31P".into(),
            gamma: PROTON_GAMMA * PHOSPHORUS31_FREQUENCY_RATIO,
            twice_spin: 1,
        }
    }

    /// Looks up an isotope in the built-in table.
    pub fn builtin(symbol: &str) -> Option<Self> {
        match symbol {
            "1H" | "H" => Some(Self::proton()),
            "31P" | "P" => Some(Self::phosphorus31()),
            _ => None,
        }
    }

    pub fn spin(&self) -> f64 {
        self.twice_spin as f64 / 2.0
    }

    /// Local Hilbert-space dimension 2S + 1.
    pub fn multiplicity(&self) -> usize {
        self.twice_spin as usize + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nucleus {
    pub isotope: Isotope,
    /// Chemical shift, dimensionless (1 ppm = 1e-6).
    pub delta: f64,
    pub label: String,
}

impl Nucleus {
    pub fn new(label: impl Into<String>, isotope: Isotope, delta: f64) -> Result<Self> {
        let label = label.into();
        if !delta.is_finite() || delta.abs() >= 1e-3 {
            return Err(Error::InvalidInput(format!(
                "nucleus {label}: chemical shift {delta} outside |delta| < 1e-3"
            )));
        }
        Ok(Self {
            isotope,
            delta,
            label,
        })
    }

    pub fn from_ppm(label: impl Into<String>, isotope: Isotope, shift_ppm: f64) -> Result<Self> {
        Self::new(label, isotope, shift_ppm * 1e-6)
    }

    /// Shift in ppm; among the floats next to δ·10⁶ it prefers one that
    /// maps back to exactly δ, so files round-trip bit for bit.
    pub fn shift_ppm(&self) -> f64 {
        let guess = self.delta * 1e6;
        let mut candidate = guess;
        let mut below = guess;
        for _ in 0..4 {
            if candidate * 1e-6 == self.delta {
                return candidate;
            }
            if below * 1e-6 == self.delta {
                return below;
            }
            candidate = candidate.next_up();
            below = below.next_down();
        }
        guess
    }
}

/// Nuclei plus a symmetric table of scalar couplings in Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSystem {
    nuclei: Vec<Nucleus>,
    couplings: BTreeMap<(usize, usize), f64>,
    neighbors: Vec<Vec<(usize, f64)>>,
}

impl SpinSystem {
    /// Couplings are given as `(i, j, J_hz)` with `i != j`; each unordered pair
    /// may appear once. Zero couplings are dropped.
    pub fn new(
        nuclei: Vec<Nucleus>,
        couplings: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        if nuclei.is_empty() {
            return Err(Error::InvalidInput(
                "a spin system needs at least one nucleus".into(),
            ));
        }
        let n = nuclei.len();
        let mut table = BTreeMap::new();
        for (i, j, hz) in couplings {
            if i >= n || j >= n {
                return Err(Error::InvalidInput(format!(
                    "coupling ({i}, {j}) references a nucleus outside 0..{n}"
                )));
            }
            if i == j {
                return Err(Error::InvalidInput(format!("self-coupling on nucleus {i}")));
            }
            if !hz.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "coupling ({i}, {j}) is not finite"
                )));
            }
            let key = (i.min(j), i.max(j));
            if table.insert(key, hz).is_some() {
                return Err(Error::InvalidInput(format!(
                    "coupling ({}, {}) given more than once",
                    key.0, key.1
                )));
            }
        }
        table.retain(|_, hz| *hz != 0.0);
        let mut neighbors = vec![Vec::new(); n];
        for (&(i, j), &hz) in &table {
            neighbors[i].push((j, hz));
            neighbors[j].push((i, hz));
        }
        for list in &mut neighbors {
            list.sort_by_key(|&(k, _)| k);
        }
        Ok(Self {
            nuclei,
            couplings: table,
            neighbors,
        })
    }

    pub fn len(&self) -> usize {
        self.nuclei.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nuclei.is_empty()
    }

    pub fn nuclei(&self) -> &[Nucleus] {
        &self.nuclei
    }

    pub fn nucleus(&self, index: usize) -> &Nucleus {
        &self.nuclei[index]
    }

    /// Coupling J_ij in Hz (zero when absent or when `i == j`).
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        self.couplings
            .get(&(i.min(j), i.max(j)))
            .copied()
            .unwrap_or(0.0)
    }

    /// Non-zero couplings as `(i, j, J_hz)` with `i < j`, in index order.
    pub fn couplings(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.couplings.iter().map(|(&(i, j), &hz)| (i, j, hz))
    }

    /// Spins coupled to `index`, sorted by index.
    pub fn neighbors(&self, index: usize) -> &[(usize, f64)] {
        &self.neighbors[index]
    }

    /// Product-space dimension of the given sites, `None` on overflow.
    pub fn dimension_of(&self, sites: &[usize]) -> Option<usize> {
        sites.iter().try_fold(1usize, |acc, &s| {
            acc.checked_mul(self.nuclei[s].isotope.multiplicity())
        })
    }

    pub fn dimension(&self) -> Option<usize> {
        self.dimension_of(&(0..self.len()).collect::<Vec<_>>())
    }

    /// The system restricted to `sites` (in the given order). Couplings to
    /// spins outside the subset are dropped.
    pub fn subsystem(&self, sites: &[usize]) -> Result<Self> {
        let mut local = BTreeMap::new();
        for (pos, &s) in sites.iter().enumerate() {
            if s >= self.len() {
                return Err(Error::InvalidInput(format!("site {s} out of range")));
            }
            if local.insert(s, pos).is_some() {
                return Err(Error::InvalidInput(format!("site {s} listed twice")));
            }
        }
        let nuclei = sites.iter().map(|&s| self.nuclei[s].clone()).collect();
        let couplings = self
            .couplings()
            .filter_map(|(i, j, hz)| Some((*local.get(&i)?, *local.get(&j)?, hz)));
        Self::new(nuclei, couplings)
    }

    /// Connected components of the coupling graph, each sorted, ordered by
    /// their lowest member.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut component = vec![usize::MAX; n];
        let mut out = Vec::new();
        for start in 0..n {
            if component[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![start];
            component[start] = id;
            let mut head = 0;
            while head < members.len() {
                let s = members[head];
                head += 1;
                for &(k, _) in &self.neighbors[s] {
                    if component[k] == usize::MAX {
                        component[k] = id;
                        members.push(k);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// Stable content hash used to tag computed spectra.
    pub fn fingerprint(&self) -> u64 {
        let mut hasher = Sha256::new();
        for nucleus in &self.nuclei {
            hasher.update(nucleus.isotope.symbol.as_bytes());
            hasher.update(nucleus.isotope.gamma.to_le_bytes());
            hasher.update(nucleus.isotope.twice_spin.to_le_bytes());
            hasher.update(nucleus.delta.to_le_bytes());
        }
        for (i, j, hz) in self.couplings() {
            hasher.update((i as u64).to_le_bytes());
            hasher.update((j as u64).to_le_bytes());
            hasher.update(hz.to_le_bytes());
        }
        first_word(&hasher.finalize())
    }
}

fn first_word(digest: &[u8]) -> u64 {
    let mut word = [0u8; 8];
    word.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(word)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrometerSettings {
    /// Proton reference frequency ν_ref in Hz.
    pub ref_frequency: f64,
    /// Full width at half maximum of each line, in Hz.
    pub fwhm: f64,
    /// When set, only nuclei of this isotope enter the collective ladder operator.
    pub detect_isotope: Option<String>,
    /// Regulariser of the cluster importance metric, rad·s⁻¹.
    pub epsilon_metric: f64,
}

impl SpectrometerSettings {
    pub const DEFAULT_EPSILON: f64 = 0.1;

    pub fn new(ref_frequency: f64, fwhm: f64) -> Result<Self> {
        let settings = Self {
            ref_frequency,
            fwhm,
            detect_isotope: None,
            epsilon_metric: Self::DEFAULT_EPSILON,
        };
        settings.validate()?;
        Ok(settings)
    }

    pub fn from_mhz(field_mhz: f64, fwhm_hz: f64) -> Result<Self> {
        Self::new(field_mhz * 1e6, fwhm_hz)
    }

    pub fn with_detect_isotope(mut self, symbol: Option<String>) -> Self {
        self.detect_isotope = symbol;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        self.epsilon_metric = epsilon;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.ref_frequency) {
            return Err(Error::InvalidInput(
                "reference frequency must be positive".into(),
            ));
        }
        if !positive(self.fwhm) {
            return Err(Error::InvalidInput("line width must be positive".into()));
        }
        if !positive(self.epsilon_metric) {
            return Err(Error::InvalidInput(
                "metric regulariser must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Static field B^z in tesla implied by the proton reference frequency.
    pub fn field_tesla(&self) -> f64 {
        2.0 * PI * self.ref_frequency / PROTON_GAMMA
    }

    /// Reference angular frequency ω_ref = 2π ν_ref.
    pub fn reference_omega(&self) -> f64 {
        2.0 * PI * self.ref_frequency
    }

    /// Lorentzian half width η in rad·s⁻¹ (FWHM in Hz equals η / π).
    pub fn eta(&self) -> f64 {
        PI * self.fwhm
    }

    pub fn detects(&self, isotope: &Isotope) -> bool {
        self.detect_isotope
            .as_deref()
            .is_none_or(|symbol| symbol == isotope.symbol)
    }

    pub fn fingerprint(&self) -> u64 {
        let mut hasher = Sha256::new();
        hasher.update(self.ref_frequency.to_le_bytes());
        hasher.update(self.fwhm.to_le_bytes());
        hasher.update(self.epsilon_metric.to_le_bytes());
        if let Some(symbol) = &self.detect_isotope {
            hasher.update(symbol.as_bytes());
        }
        first_word(&hasher.finalize())
    }
}

/// Larmor angular frequency ω = γ(1 + δ)B^z in rad·s⁻¹.
pub fn larmor_frequency(nucleus: &Nucleus, settings: &SpectrometerSettings) -> f64 {
    nucleus.isotope.gamma * (1.0 + nucleus.delta) * settings.field_tesla()
}
