//! Run configuration and the simulate / converge / bench pipelines.

use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::analysis::{
    cosine_similarity, default_points, normalize, sample_spectrum, to_ppm_axis, Spectrum,
};
use crate::basis::{binomial, largest_sector_dimension};
use crate::cluster::{assemble_spectrum, ClusterOptions, ClusterPlan, ClusterStats, GrowthRule};
use crate::engine::StickSpectrum;
use crate::error::{Error, Result};
use crate::exact::{exact_spectrum, ExactOptions};
use crate::spin::{SpectrometerSettings, SpinSystem, DEFAULT_MAX_DIMENSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldPreset {
    High,
    Low,
    VeryLow,
}

impl FieldPreset {
    pub const ALL: [FieldPreset; 3] = [FieldPreset::High, FieldPreset::Low, FieldPreset::VeryLow];

    pub fn mhz(self) -> f64 {
        match self {
            FieldPreset::High => 400.0,
            FieldPreset::Low => 80.0,
            FieldPreset::VeryLow => 20.0,
        }
    }
}

impl FromStr for FieldPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "high" => Ok(FieldPreset::High),
            "low" => Ok(FieldPreset::Low),
            "very-low" => Ok(FieldPreset::VeryLow),
            _ => Err(Error::InvalidInput(format!(
                "unknown field preset {s:?} (high, low, very-low)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BroadeningPreset {
    High,
    Low,
}

impl BroadeningPreset {
    pub const ALL: [BroadeningPreset; 2] = [BroadeningPreset::High, BroadeningPreset::Low];

    pub fn fwhm_hz(self) -> f64 {
        match self {
            BroadeningPreset::High => 1.0,
            BroadeningPreset::Low => 0.1,
        }
    }
}

impl FromStr for BroadeningPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "high" => Ok(BroadeningPreset::High),
            "low" => Ok(BroadeningPreset::Low),
            _ => Err(Error::InvalidInput(format!(
                "unknown broadening preset {s:?} (high, low)"
            ))),
        }
    }
}

/// One (field, line width) combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Regime {
    pub field_mhz: f64,
    pub fwhm_hz: f64,
}

/// Parses `all` or a comma list of `FIELD[:BROADENING]` presets, e.g.
/// `high:low,very-low`. A missing broadening means both.
pub fn parse_regimes(spec: &str) -> Result<Vec<Regime>> {
    let mut out = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (fields, broadenings): (Vec<FieldPreset>, Vec<BroadeningPreset>) = if item == "all" {
            (FieldPreset::ALL.to_vec(), BroadeningPreset::ALL.to_vec())
        } else {
            match item.split_once(':') {
                Some((f, b)) => (vec![f.parse()?], vec![b.parse()?]),
                None => (vec![item.parse()?], BroadeningPreset::ALL.to_vec()),
            }
        };
        for f in &fields {
            for b in &broadenings {
                let r = Regime {
                    field_mhz: f.mhz(),
                    fwhm_hz: b.fwhm_hz(),
                };
                if !out.contains(&r) {
                    out.push(r);
                }
            }
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidInput("no presets given".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub field_mhz: f64,
    pub fwhm_hz: f64,
    /// Cluster size; also the largest system solved exactly by default.
    pub max_cluster: usize,
    /// Sample count; `None` picks 2,000 (20,000 for line widths ≤ 0.1 Hz).
    pub points: Option<usize>,
    pub detect_isotope: Option<String>,
    /// Metric regulariser ε in rad·s⁻¹.
    pub epsilon: f64,
    /// Force the exact path regardless of size.
    pub exact: bool,
    pub threads: Option<usize>,
    pub format: OutputFormat,
    pub max_dimension: usize,
    pub growth: GrowthRule,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            field_mhz: 400.0,
            fwhm_hz: 1.0,
            max_cluster: 12,
            points: None,
            detect_isotope: None,
            epsilon: SpectrometerSettings::DEFAULT_EPSILON,
            exact: false,
            threads: None,
            format: OutputFormat::Csv,
            max_dimension: DEFAULT_MAX_DIMENSION,
            growth: GrowthRule::MaxOverMembers,
        }
    }
}

impl RunConfig {
    pub fn settings(&self) -> Result<SpectrometerSettings> {
        SpectrometerSettings::from_mhz(self.field_mhz, self.fwhm_hz)?
            .with_detect_isotope(self.detect_isotope.clone())
            .with_epsilon(self.epsilon)
    }

    pub fn with_regime(&self, regime: Regime) -> Self {
        Self {
            field_mhz: regime.field_mhz,
            fwhm_hz: regime.fwhm_hz,
            ..self.clone()
        }
    }

    pub fn sample_points(&self) -> usize {
        self.points.unwrap_or_else(|| default_points(self.fwhm_hz))
    }

    fn exact_options(&self, settings: &SpectrometerSettings) -> ExactOptions {
        ExactOptions::new(settings).with_max_dimension(self.max_dimension)
    }

    fn cluster_options(&self, settings: &SpectrometerSettings, max_size: usize) -> ClusterOptions {
        let mut opts = ClusterOptions::new(settings, max_size).with_rule(self.growth);
        opts.exact = self.exact_options(settings);
        opts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Method {
    Exact,
    Cluster { max_size: usize },
}

/// Nuclei matching the detection filter.
pub fn active_nuclei(system: &SpinSystem, settings: &SpectrometerSettings) -> usize {
    system
        .nuclei()
        .iter()
        .filter(|n| settings.detects(&n.isotope))
        .count()
}

/// Distinct isotope symbols among the detected nuclei.
pub fn detected_isotopes(system: &SpinSystem, settings: &SpectrometerSettings) -> Vec<String> {
    let mut symbols: Vec<String> = system
        .nuclei()
        .iter()
        .filter(|n| settings.detects(&n.isotope))
        .map(|n| n.isotope.symbol.clone())
        .collect();
    symbols.sort();
    symbols.dedup();
    symbols
}

/// Stick spectrum by the chosen method.
pub fn solve(
    system: &SpinSystem,
    config: &RunConfig,
    method: Method,
) -> Result<(StickSpectrum<f64>, Option<ClusterStats>)> {
    let settings = config.settings()?;
    match method {
        Method::Exact => Ok((
            exact_spectrum(system, &settings, &config.exact_options(&settings))?,
            None,
        )),
        Method::Cluster { max_size } => {
            let (sticks, stats) = assemble_spectrum(
                system,
                &settings,
                &config.cluster_options(&settings, max_size),
            )?;
            Ok((sticks, Some(stats)))
        }
    }
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub method: Method,
    pub sticks: StickSpectrum<f64>,
    /// Sampled on the equal-area angular grid, before normalisation.
    pub raw: Spectrum<f64>,
    /// ppm axis, integral equal to the number of active nuclei.
    pub spectrum: Spectrum<f64>,
    pub active_nuclei: usize,
    pub stats: Option<ClusterStats>,
    pub seconds: f64,
}

/// Samples, converts to ppm and normalises a stick spectrum.
pub fn render(
    sticks: &StickSpectrum<f64>,
    settings: &SpectrometerSettings,
    points: usize,
    active: usize,
) -> Result<(Spectrum<f64>, Spectrum<f64>)> {
    let raw = sample_spectrum(sticks, settings.eta(), points)?;
    let ppm = normalize(&to_ppm_axis(&raw, settings)?, active as f64)?;
    Ok((raw, ppm))
}

/// Exact when forced or when the molecule fits in one cluster, else the
/// cluster approximation at `max_cluster`.
pub fn choose_method(system: &SpinSystem, config: &RunConfig) -> Method {
    if config.exact || system.len() <= config.max_cluster {
        Method::Exact
    } else {
        Method::Cluster {
            max_size: config.max_cluster,
        }
    }
}

pub fn simulate_with(
    system: &SpinSystem,
    config: &RunConfig,
    method: Method,
) -> Result<Simulation> {
    let settings = config.settings()?;
    let active = active_nuclei(system, &settings);
    if active == 0 {
        return Err(Error::ZeroSignal);
    }
    let isotopes = detected_isotopes(system, &settings);
    if isotopes.len() > 1 {
        log::warn!(
            "detected nuclei span {} isotopes; one grid cannot resolve the gap between their bands, \
             so the normalisation is unreliable (select one with --detect-isotope)",
            isotopes.join(", ")
        );
    }
    let start = Instant::now();
    let (sticks, stats) = solve(system, config, method)?;
    log::debug!("solve: {:.3} s", start.elapsed().as_secs_f64());
    let (raw, spectrum) = render(&sticks, &settings, config.sample_points(), active)?;
    log::debug!("solve and render: {:.3} s", start.elapsed().as_secs_f64());
    Ok(Simulation {
        method,
        sticks,
        raw,
        spectrum,
        active_nuclei: active,
        stats,
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn simulate(system: &SpinSystem, config: &RunConfig) -> Result<Simulation> {
    simulate_with(system, config, choose_method(system, config))
}

/// Dense memory estimate for a sector of dimension `d`: the block itself
/// plus its eigenvectors, 8 bytes per entry each.
pub fn dense_memory_bytes(d: u128) -> u128 {
    16 * d * d
}

/// Largest sector over the distinct clusters of a plan (unreduced).
pub fn plan_largest_sector(system: &SpinSystem, plan: &ClusterPlan) -> u128 {
    plan.dedup
        .keys()
        .map(|key| {
            let spins: Vec<u32> = key
                .iter()
                .map(|&s| system.nucleus(s).isotope.twice_spin)
                .collect();
            largest_sector_dimension(&spins)
        })
        .max()
        .unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub field_mhz: f64,
    pub fwhm_hz: f64,
    /// `None` for the exact reference.
    pub max_cluster: Option<usize>,
    pub epsilon: f64,
    pub seconds: f64,
    pub peak_memory_bytes: u128,
    pub clusters: usize,
    pub diagonalisations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    #[serde(skip)]
    pub spectra: Vec<(Regime, Option<usize>, Spectrum<f64>)>,
}

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "field_mhz,fwhm_hz,max_cluster,epsilon,seconds,peak_memory_bytes,clusters,diagonalisations\n",
        );
        for r in &self.rows {
            let size = r.max_cluster.map_or("exact".to_string(), |m| m.to_string());
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.field_mhz,
                r.fwhm_hz,
                size,
                r.epsilon,
                r.seconds,
                r.peak_memory_bytes,
                r.clusters,
                r.diagonalisations
            );
        }
        out
    }

    /// ε at `size` in `regime`.
    pub fn epsilon(&self, regime: Regime, size: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| {
                r.field_mhz == regime.field_mhz
                    && r.fwhm_hz == regime.fwhm_hz
                    && r.max_cluster == Some(size)
            })
            .map(|r| r.epsilon)
    }
}

fn validate_sizes(system: &SpinSystem, sizes: &RangeInclusive<usize>) -> Result<()> {
    if sizes.is_empty() || *sizes.start() < 1 || *sizes.end() > system.len() {
        return Err(Error::InvalidInput(format!(
            "cluster sizes {}..{} must lie within 1..{}",
            sizes.start(),
            sizes.end(),
            system.len()
        )));
    }
    Ok(())
}

/// ε_ab of every cluster size against the exact spectrum (or, if the exact
/// problem exceeds the dimension cap, the largest requested size).
pub fn converge(
    system: &SpinSystem,
    sizes: RangeInclusive<usize>,
    regimes: &[Regime],
    config: &RunConfig,
    keep_spectra: bool,
) -> Result<ConvergenceReport> {
    validate_sizes(system, &sizes)?;
    let mut rows = Vec::new();
    let mut spectra = Vec::new();
    for &regime in regimes {
        let cfg = config.with_regime(regime);
        let settings = cfg.settings()?;
        let reference = match simulate_with(system, &cfg, Method::Exact) {
            Ok(sim) => (None, sim),
            Err(Error::DimensionCap { dimension, cap }) => {
                log::warn!("exact reference needs dimension {dimension} > cap {cap}; using the largest cluster size");
                let largest = *sizes.end();
                (
                    Some(largest),
                    simulate_with(system, &cfg, Method::Cluster { max_size: largest })?,
                )
            }
            Err(e) => return Err(e),
        };
        let (ref_size, ref_sim) = reference;
        let row = |size: Option<usize>, sim: &Simulation, epsilon: f64| {
            let stats = sim.stats.unwrap_or_default();
            let peak = match size {
                Some(m) => {
                    let plan = ClusterPlan::build(system, &settings, m, cfg.growth).ok();
                    plan.map_or(0, |p| dense_memory_bytes(plan_largest_sector(system, &p)))
                }
                None => {
                    let spins: Vec<u32> = system
                        .nuclei()
                        .iter()
                        .map(|n| n.isotope.twice_spin)
                        .collect();
                    dense_memory_bytes(largest_sector_dimension(&spins))
                }
            };
            ConvergenceRow {
                field_mhz: regime.field_mhz,
                fwhm_hz: regime.fwhm_hz,
                max_cluster: size,
                epsilon,
                seconds: sim.seconds,
                peak_memory_bytes: peak,
                clusters: stats.clusters,
                diagonalisations: stats.diagonalisations,
            }
        };
        let self_eps = cosine_similarity(&ref_sim.spectrum, &ref_sim.spectrum)?.epsilon;
        rows.push(row(ref_size, &ref_sim, self_eps));
        for size in sizes.clone() {
            if Some(size) == ref_size {
                continue;
            }
            let sim = simulate_with(system, &cfg, Method::Cluster { max_size: size })?;
            let eps = cosine_similarity(&sim.spectrum, &ref_sim.spectrum)?.epsilon;
            rows.push(row(Some(size), &sim, eps));
            if keep_spectra {
                spectra.push((regime, Some(size), sim.spectrum));
            }
        }
        if keep_spectra {
            spectra.push((regime, ref_size, ref_sim.spectrum));
        }
    }
    Ok(ConvergenceReport { rows, spectra })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub max_cluster: usize,
    pub median_seconds: f64,
    pub repeats: usize,
    pub clusters: usize,
    pub diagonalisations: usize,
    /// Clusters served by an already diagonalised member set.
    pub dedup_savings: usize,
    pub largest_cluster: usize,
    pub largest_sector_dim: u128,
    /// binom(m, ⌊m/2⌋) for a cluster of m spin-1/2.
    pub predicted_block_dim: u128,
    pub peak_memory_bytes: u128,
}

pub fn bench_to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(
        "max_cluster,median_seconds,repeats,clusters,diagonalisations,dedup_savings,largest_cluster,largest_sector_dim,predicted_block_dim,peak_memory_bytes\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.max_cluster,
            r.median_seconds,
            r.repeats,
            r.clusters,
            r.diagonalisations,
            r.dedup_savings,
            r.largest_cluster,
            r.largest_sector_dim,
            r.predicted_block_dim,
            r.peak_memory_bytes
        );
    }
    out
}

/// Median wall time of the cluster solve (stick assembly) per size.
pub fn bench(
    system: &SpinSystem,
    sizes: RangeInclusive<usize>,
    repeats: usize,
    config: &RunConfig,
) -> Result<Vec<BenchRow>> {
    validate_sizes(system, &sizes)?;
    let repeats = repeats.max(1);
    let settings = config.settings()?;
    sizes
        .map(|m| {
            let opts = config.cluster_options(&settings, m);
            let mut times = Vec::with_capacity(repeats);
            let mut stats = ClusterStats::default();
            for _ in 0..repeats {
                let start = Instant::now();
                let (_, s) = assemble_spectrum::<f64>(system, &settings, &opts)?;
                times.push(start.elapsed().as_secs_f64());
                stats = s;
            }
            times.sort_by(f64::total_cmp);
            let median = if repeats % 2 == 1 {
                times[repeats / 2]
            } else {
                0.5 * (times[repeats / 2 - 1] + times[repeats / 2])
            };
            let plan = ClusterPlan::build(system, &settings, m, config.growth)?;
            let largest_sector = plan_largest_sector(system, &plan);
            Ok(BenchRow {
                max_cluster: m,
                median_seconds: median,
                repeats,
                clusters: stats.clusters,
                diagonalisations: stats.diagonalisations,
                dedup_savings: stats.clusters.saturating_sub(plan.distinct()),
                largest_cluster: stats.largest_cluster,
                largest_sector_dim: largest_sector,
                predicted_block_dim: binomial(m as u64, m as u64 / 2).unwrap_or(u128::MAX),
                peak_memory_bytes: dense_memory_bytes(largest_sector),
            })
        })
        .collect()
}

/// Sizes the rayon pool (`None` = hardware parallelism) and keeps the dense
/// eigensolver sequential, so results do not depend on the thread count.
pub fn init_runtime(threads: Option<usize>) -> Result<()> {
    faer::set_global_parallelism(faer::Par::Seq);
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    }
    Ok(())
}
