//! Exact spectra of whole (sub)systems.
//!
//! Spins in different connected components of the coupling graph never mix,
//! and ladder cross terms between components are traceless, so each
//! component is solved on its own with trace factor 2/D_component. Large
//! components with magnetically equivalent groups go through the
//! composite-spin reduction.

use rayon::prelude::*;

use crate::engine::{diagonalize_blocks, stick_spectra, StickOptions, StickSpectrum};
use crate::equivalence::{detect_equivalence, reduced_spectra, DEFAULT_MAX_ASSIGNMENTS};
use crate::error::{Error, Result};
use crate::num::EigenScalar;
use crate::operator::{build_hamiltonian, collective_ladder, ladder_weights, LadderOperator};
use crate::spin::{SpectrometerSettings, SpinSystem, DEFAULT_MAX_DIMENSION};

/// Components up to this dimension are diagonalised without reduction in
/// [`Reduction::Auto`] mode; the bookkeeping costs more than it saves there.
pub const REDUCTION_MIN_DIMENSION: usize = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduction {
    /// Reduce components above [`REDUCTION_MIN_DIMENSION`] that have groups.
    #[default]
    Auto,
    Never,
    Always,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactOptions {
    pub sticks: StickOptions,
    /// Cap on any single Hamiltonian that gets diagonalised.
    pub max_dimension: usize,
    pub reduction: Reduction,
    pub max_assignments: usize,
}

impl ExactOptions {
    pub fn new(settings: &SpectrometerSettings) -> Self {
        Self {
            sticks: StickOptions::for_eta(settings.eta()),
            max_dimension: DEFAULT_MAX_DIMENSION,
            reduction: Reduction::Auto,
            max_assignments: DEFAULT_MAX_ASSIGNMENTS,
        }
    }

    pub fn with_reduction(mut self, reduction: Reduction) -> Self {
        self.reduction = reduction;
        self
    }

    pub fn with_max_dimension(mut self, max_dimension: usize) -> Self {
        self.max_dimension = max_dimension;
        self
    }
}

/// Diagonalises all of `system` in one product basis and returns one stick
/// spectrum per left weight vector. Every raw weight is multiplied by
/// `trace_scale`.
pub fn direct_spectra<T: EigenScalar>(
    system: &SpinSystem,
    settings: &SpectrometerSettings,
    lefts: &[Vec<f64>],
    right: &[f64],
    options: &ExactOptions,
    trace_scale: f64,
) -> Result<Vec<StickSpectrum<T>>> {
    let h = build_hamiltonian::<T>(system, settings, None, options.max_dimension)?;
    let eig = diagonalize_blocks(&h)?;
    let right_op = collective_ladder::<T>(h.basis(), right)?;
    let left_ops: Vec<Option<LadderOperator<T>>> = lefts
        .iter()
        .map(|l| {
            if l.as_slice() == right {
                Ok(None)
            } else {
                collective_ladder::<T>(h.basis(), l).map(Some)
            }
        })
        .collect::<Result<_>>()?;
    let refs: Vec<&LadderOperator<T>> = left_ops
        .iter()
        .map(|l| l.as_ref().unwrap_or(&right_op))
        .collect();
    let opts = options.sticks.with_trace_scale(trace_scale);
    Ok(stick_spectra(&eig, &refs, &right_op, &opts))
}

fn restrict(weights: &[f64], sites: &[usize]) -> Vec<f64> {
    sites.iter().map(|&s| weights[s]).collect()
}

/// Exact stick spectra for several left operators and one right operator,
/// all given as per-spin weights (Σ_i w_i Î±_i).
pub fn exact_spectra<T: EigenScalar>(
    system: &SpinSystem,
    settings: &SpectrometerSettings,
    lefts: &[Vec<f64>],
    right: &[f64],
    options: &ExactOptions,
) -> Result<Vec<StickSpectrum<T>>> {
    if right.len() != system.len() || lefts.iter().any(|l| l.len() != system.len()) {
        return Err(Error::InvalidInput(
            "one ladder weight per spin is required".into(),
        ));
    }
    let components = system.connected_components();
    let parts: Vec<Vec<StickSpectrum<T>>> = components
        .par_iter()
        .filter(|comp| {
            comp.iter().any(|&s| right[s] != 0.0)
                && lefts.iter().any(|l| comp.iter().any(|&s| l[s] != 0.0))
        })
        .map(|comp| component_spectra(system, settings, comp, lefts, right, options))
        .collect::<Result<_>>()?;
    let tol = T::of(options.sticks.merge_tolerance);
    let floor = T::of(options.sticks.relative_floor);
    let (sys_hash, set_hash) = (system.fingerprint(), settings.fingerprint());
    Ok((0..lefts.len())
        .map(|k| {
            StickSpectrum::combine(parts.iter().map(|p| p[k].clone()), tol, floor)
                .with_hashes(sys_hash, set_hash)
        })
        .collect())
}

fn component_spectra<T: EigenScalar>(
    system: &SpinSystem,
    settings: &SpectrometerSettings,
    sites: &[usize],
    lefts: &[Vec<f64>],
    right: &[f64],
    options: &ExactOptions,
) -> Result<Vec<StickSpectrum<T>>> {
    let sub = system.subsystem(sites)?;
    let lefts: Vec<Vec<f64>> = lefts.iter().map(|l| restrict(l, sites)).collect();
    let right = restrict(right, sites);
    let dimension = sub.dimension().unwrap_or(usize::MAX);
    let reduce = match options.reduction {
        Reduction::Never => false,
        Reduction::Always => true,
        Reduction::Auto => dimension > REDUCTION_MIN_DIMENSION,
    };
    if reduce {
        let groups = detect_equivalence(&sub);
        if !groups.is_empty() {
            return reduced_spectra(&sub, settings, &groups, &lefts, &right, options);
        }
    }
    if dimension > options.max_dimension {
        return Err(Error::DimensionCap {
            dimension,
            cap: options.max_dimension,
        });
    }
    direct_spectra(
        &sub,
        settings,
        &lefts,
        &right,
        options,
        2.0 / dimension as f64,
    )
}

/// Exact spectrum C(ω) with M± built from the detected isotope.
pub fn exact_spectrum<T: EigenScalar>(
    system: &SpinSystem,
    settings: &SpectrometerSettings,
    options: &ExactOptions,
) -> Result<StickSpectrum<T>> {
    let all: Vec<usize> = (0..system.len()).collect();
    let weights = ladder_weights(system, settings, &all);
    let mut out = exact_spectra(
        system,
        settings,
        std::slice::from_ref(&weights),
        &weights,
        options,
    )?;
    Ok(out.pop().unwrap_or_default())
}

/// (2/D)·Tr[M⁻M⁺] for the detected-isotope collective operator, computed
/// analytically. Cross terms are traceless and Tr[Î⁻Î⁺] = (2/3)(2S+1)S(S+1)
/// on one site, leaving Σ_i w_i²·(4/3)S_i(S_i+1).
pub fn ladder_trace_total(system: &SpinSystem, settings: &SpectrometerSettings) -> f64 {
    let all: Vec<usize> = (0..system.len()).collect();
    ladder_weights(system, settings, &all)
        .iter()
        .zip(system.nuclei())
        .map(|(w, n)| {
            let s = n.isotope.spin();
            w * w * 4.0 / 3.0 * s * (s + 1.0)
        })
        .sum()
}
