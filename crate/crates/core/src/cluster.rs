//! Spin-dependent cluster approximation: C(ω) ≈ Σ_i C_i(ω).
//!
//! C_i keeps the lowering operator on spin i alone and evaluates it inside a
//! cluster Γ_i of the spins most strongly tied to i, ignoring every coupling
//! that leaves the cluster. Ladder terms on spins outside Γ_i are traceless
//! there, so the right operator only runs over Γ_i. Clusters with identical
//! member sets are diagonalised once and shared by all their centers.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::StickSpectrum;
use crate::error::{Error, Result};
use crate::exact::{exact_spectra, ExactOptions};
use crate::num::EigenScalar;
use crate::operator::ladder_weights;
use crate::spin::{larmor_frequency, SpectrometerSettings, SpinSystem};

/// (2πJ_ij)² / (|ω_i − ω_j| + ε) in rad·s⁻¹; zero for uncoupled pairs.
pub fn importance_metric(
    system: &SpinSystem,
    settings: &SpectrometerSettings,
    i: usize,
    j: usize,
) -> f64 {
    let coupling = system.coupling(i, j);
    if coupling == 0.0 {
        return 0.0;
    }
    let wi = larmor_frequency(system.nucleus(i), settings);
    let wj = larmor_frequency(system.nucleus(j), settings);
    let numerator = (2.0 * PI * coupling).powi(2);
    numerator / ((wi - wj).abs() + settings.epsilon_metric)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthRule {
    /// A candidate scores by its strongest link to any current member.
    #[default]
    MaxOverMembers,
    /// A candidate scores by its link to the center only.
    DirectOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cluster {
    pub center: usize,
    /// Members in order of inclusion, starting with the center.
    pub members: Vec<usize>,
    /// `(added spin, score)` for every member after the center.
    pub ranking: Vec<(usize, f64)>,
}

impl Cluster {
    /// Sorted member set, used to share diagonalisations.
    pub fn key(&self) -> Vec<usize> {
        let mut key = self.members.clone();
        key.sort_unstable();
        key
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Greedy cluster growth around `center`: repeatedly add the highest-scoring
/// outside spin (lower index on ties) until `max_size` is reached or no
/// candidate has a non-zero score.
pub fn build_cluster(
    system: &SpinSystem,
    settings: &SpectrometerSettings,
    center: usize,
    max_size: usize,
    rule: GrowthRule,
) -> Result<Cluster> {
    let n = system.len();
    if center >= n {
        return Err(Error::InvalidInput(format!("center {center} out of range")));
    }
    if max_size == 0 {
        return Err(Error::InvalidInput(
            "cluster size must be at least 1".into(),
        ));
    }
    let mut inside = vec![false; n];
    let mut score = vec![0.0f64; n];
    let mut members = vec![center];
    let mut ranking = Vec::new();
    inside[center] = true;
    let mut newest = center;
    while members.len() < max_size.min(n) {
        if rule == GrowthRule::MaxOverMembers || newest == center {
            for &(k, _) in system.neighbors(newest) {
                if !inside[k] {
                    score[k] = score[k].max(importance_metric(system, settings, newest, k));
                }
            }
        }
        let mut best: Option<usize> = None;
        for k in 0..n {
            if !inside[k] && score[k] > 0.0 && best.is_none_or(|b| score[k] > score[b]) {
                best = Some(k);
            }
        }
        let Some(k) = best else { break };
        inside[k] = true;
        members.push(k);
        ranking.push((k, score[k]));
        newest = k;
    }
    Ok(Cluster {
        center,
        members,
        ranking,
    })
}

/// One cluster per spin plus the map from shared member sets to centers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterPlan {
    pub clusters: Vec<Cluster>,
    pub dedup: BTreeMap<Vec<usize>, Vec<usize>>,
}

impl ClusterPlan {
    pub fn build(
        system: &SpinSystem,
        settings: &SpectrometerSettings,
        max_size: usize,
        rule: GrowthRule,
    ) -> Result<Self> {
        let clusters: Vec<Cluster> = (0..system.len())
            .into_par_iter()
            .map(|i| build_cluster(system, settings, i, max_size, rule))
            .collect::<Result<_>>()?;
        let mut dedup: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for c in &clusters {
            dedup.entry(c.key()).or_default().push(c.center);
        }
        Ok(Self { clusters, dedup })
    }

    pub fn distinct(&self) -> usize {
        self.dedup.len()
    }

    pub fn largest(&self) -> usize {
        self.clusters.iter().map(Cluster::len).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterOptions {
    pub max_size: usize,
    pub rule: GrowthRule,
    pub exact: ExactOptions,
}

impl ClusterOptions {
    pub fn new(settings: &SpectrometerSettings, max_size: usize) -> Self {
        Self {
            max_size,
            rule: GrowthRule::default(),
            exact: ExactOptions::new(settings),
        }
    }

    pub fn with_rule(mut self, rule: GrowthRule) -> Self {
        self.rule = rule;
        self
    }
}

/// Work done by one cluster assembly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ClusterStats {
    pub clusters: usize,
    /// Distinct member sets actually diagonalised.
    pub diagonalisations: usize,
    pub largest_cluster: usize,
}

/// Spectra of centers sharing one member set. With `merged`, C_i is linear
/// in its left operator, so Σ_i C_i comes from one left operator Σ_i γ_i Î⁻_i;
/// otherwise one spectrum per center.
fn shared_cluster_spectra<T: EigenScalar>(
    system: &SpinSystem,
    settings: &SpectrometerSettings,
    key: &[usize],
    centers: &[usize],
    merged: bool,
    options: &ExactOptions,
) -> Result<Vec<StickSpectrum<T>>> {
    let sub = system.subsystem(key)?;
    let local: Vec<usize> = (0..key.len()).collect();
    let right = ladder_weights(&sub, settings, &local);
    let left_for = |group: &[usize]| {
        let mut l = vec![0.0; key.len()];
        for c in group {
            let pos = key.binary_search(c).expect("center belongs to its cluster");
            l[pos] = right[pos];
        }
        l
    };
    let lefts: Vec<Vec<f64>> = if merged {
        vec![left_for(centers)]
    } else {
        centers
            .iter()
            .map(|c| left_for(std::slice::from_ref(c)))
            .collect()
    };
    exact_spectra(&sub, settings, &lefts, &right, options)
}

/// C_i for one cluster: left operator γ_i Î⁻_i, right operator Σ_{j∈Γ_i} γ_j Î⁺_j.
pub fn spin_resolved_spectrum<T: EigenScalar>(
    system: &SpinSystem,
    settings: &SpectrometerSettings,
    cluster: &Cluster,
    options: &ExactOptions,
) -> Result<StickSpectrum<T>> {
    let mut out = shared_cluster_spectra(
        system,
        settings,
        &cluster.key(),
        &[cluster.center],
        false,
        options,
    )?;
    Ok(out.pop().unwrap_or_default())
}

/// Σ_i C_i over every detected spin.
pub fn assemble_spectrum<T: EigenScalar>(
    system: &SpinSystem,
    settings: &SpectrometerSettings,
    options: &ClusterOptions,
) -> Result<(StickSpectrum<T>, ClusterStats)> {
    let plan = ClusterPlan::build(system, settings, options.max_size, options.rule)?;
    let tasks: Vec<(&Vec<usize>, Vec<usize>)> = plan
        .dedup
        .iter()
        .map(|(key, centers)| {
            let active = centers
                .iter()
                .copied()
                .filter(|&c| settings.detects(&system.nucleus(c).isotope))
                .collect::<Vec<_>>();
            (key, active)
        })
        .filter(|(_, active)| !active.is_empty())
        .collect();
    let parts: Vec<Vec<StickSpectrum<T>>> = tasks
        .par_iter()
        .map(|(key, centers)| {
            shared_cluster_spectra(system, settings, key, centers, true, &options.exact)
        })
        .collect::<Result<_>>()?;
    let stats = ClusterStats {
        clusters: plan.clusters.len(),
        diagonalisations: tasks.len(),
        largest_cluster: plan.largest(),
    };
    let spectrum = StickSpectrum::combine(
        parts.into_iter().flatten(),
        T::of(options.exact.sticks.merge_tolerance),
        T::of(options.exact.sticks.relative_floor),
    )
    .with_hashes(system.fingerprint(), settings.fingerprint());
    Ok((spectrum, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{Isotope, Nucleus};

    fn protons(shifts_ppm: &[f64], couplings: &[(usize, usize, f64)]) -> SpinSystem {
        let nuclei = shifts_ppm
            .iter()
            .enumerate()
            .map(|(i, &d)| Nucleus::from_ppm(format!("H{i}"), Isotope::proton(), d).unwrap())
            .collect();
        SpinSystem::new(nuclei, couplings.iter().copied()).unwrap()
    }

    #[test]
    fn metric_examples() {
        let s = SpectrometerSettings::from_mhz(400.0, 1.0).unwrap();
        // 400 Hz apart at 400 MHz is 1 ppm
        let sys = protons(&[0.0, 1.0, 0.0, 0.0], &[(0, 1, 10.0), (2, 3, 10.0)]);
        assert!((importance_metric(&sys, &s, 0, 1) - std::f64::consts::FRAC_PI_2).abs() < 1e-3);
        assert!((importance_metric(&sys, &s, 2, 3) - 39478.4).abs() < 0.1);
        assert_eq!(importance_metric(&sys, &s, 0, 2), 0.0);
    }

    #[test]
    fn chain_growth() {
        let s = SpectrometerSettings::from_mhz(400.0, 1.0).unwrap();
        let sys = protons(&[1.0, 2.0, 3.0], &[(0, 1, 15.0), (1, 2, 2.0)]);
        let two = build_cluster(&sys, &s, 0, 2, GrowthRule::MaxOverMembers).unwrap();
        assert_eq!(two.members, vec![0, 1]);
        let three = build_cluster(&sys, &s, 0, 3, GrowthRule::MaxOverMembers).unwrap();
        assert_eq!(three.members, vec![0, 1, 2]);
        let direct = build_cluster(&sys, &s, 0, 3, GrowthRule::DirectOnly).unwrap();
        assert_eq!(direct.members, vec![0, 1]);
    }

    #[test]
    fn ties_go_to_lower_index() {
        let s = SpectrometerSettings::from_mhz(400.0, 1.0).unwrap();
        let sys = protons(&[2.0, 1.0, 1.0], &[(0, 1, 5.0), (0, 2, 5.0)]);
        let c = build_cluster(&sys, &s, 0, 2, GrowthRule::MaxOverMembers).unwrap();
        assert_eq!(c.members, vec![0, 1]);
    }

    #[test]
    fn out_of_cluster_spin_adds_nothing() {
        let s = SpectrometerSettings::from_mhz(400.0, 1.0).unwrap();
        let pair = protons(&[1.0, 2.0], &[(0, 1, 10.0)]);
        let triple = protons(&[1.0, 2.0, 5.0], &[(0, 1, 10.0)]);
        let opts = ExactOptions::new(&s);
        let a = spin_resolved_spectrum::<f64>(
            &pair,
            &s,
            &build_cluster(&pair, &s, 0, 3, GrowthRule::default()).unwrap(),
            &opts,
        )
        .unwrap();
        let with_spectator = Cluster {
            center: 0,
            members: vec![0, 1, 2],
            ranking: vec![],
        };
        let b = spin_resolved_spectrum::<f64>(&triple, &s, &with_spectator, &opts).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.sticks.iter().zip(&b.sticks) {
            assert!((x.frequency - y.frequency).abs() < 1e-6);
            assert!((x.weight - y.weight).abs() < 1e-9 * a.total_abs_weight());
        }
    }

    #[test]
    fn identical_fragments_share_diagonalisations() {
        let s = SpectrometerSettings::from_mhz(400.0, 1.0).unwrap();
        let mut shifts = Vec::new();
        let mut couplings = Vec::new();
        for f in 0..3 {
            let base = 4 * f;
            shifts.extend([1.0, 1.0, 1.0, 3.0]);
            for m in 0..3 {
                couplings.push((base + m, base + 3, 7.0));
            }
        }
        let sys = protons(&shifts, &couplings);
        let (_, stats) = assemble_spectrum::<f64>(&sys, &s, &ClusterOptions::new(&s, 4)).unwrap();
        assert_eq!(stats.clusters, 12);
        assert_eq!(stats.diagonalisations, 3);
    }
}
