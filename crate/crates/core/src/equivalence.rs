//! Magnetic equivalence and composite-spin reduction.
//!
//! A group of n spin-1/2 nuclei sharing isotope, shift and couplings to every
//! other spin only enters the Hamiltonian through its total spin Ĵ. The group
//! space splits into irreps of total spin j with multiplicity g(n, j); each
//! irrep copy behaves as one spin-j site, so the spectrum is the
//! multiplicity-weighted sum over all per-group irrep choices.
//!
//! The coupling inside a group equals (J/2)(Ĵ² − Σ Î²_k), a constant within
//! each irrep. Transitions never connect different irreps, so it cancels in
//! every E_n − E_m and is dropped.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::basis::binomial;
use crate::engine::StickSpectrum;
use crate::error::{Error, Result};
use crate::exact::{direct_spectra, ExactOptions};
use crate::num::EigenScalar;
use crate::spin::{Isotope, Nucleus, SpectrometerSettings, SpinSystem};

/// Absolute tolerance (Hz) when comparing couplings to outside spins.
pub const COUPLING_TOLERANCE: f64 = 1e-12;

/// Default cap on the number of irrep assignments of one reduction.
pub const DEFAULT_MAX_ASSIGNMENTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceGroup {
    /// Sorted member indices.
    pub members: Vec<usize>,
    pub isotope: Isotope,
    pub delta: f64,
    /// Non-zero couplings (Hz) from the group to each outside spin.
    pub external: BTreeMap<usize, f64>,
    /// Coupling between any two members (Hz); spectroscopically inert.
    pub intra_coupling: f64,
}

impl EquivalenceGroup {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

fn equivalent(system: &SpinSystem, a: usize, b: usize) -> bool {
    let (na, nb) = (system.nucleus(a), system.nucleus(b));
    if na.isotope.twice_spin != 1 || na.isotope != nb.isotope || na.delta != nb.delta {
        return false;
    }
    (0..system.len())
        .filter(|&k| k != a && k != b)
        .all(|k| (system.coupling(a, k) - system.coupling(b, k)).abs() <= COUPLING_TOLERANCE)
}

/// Maximal groups of magnetically equivalent spin-1/2 nuclei, ordered by
/// lowest member; singletons are omitted.
///
/// The pairwise test is transitive: if a ~ b and b ~ c then J_ab = J_ac = J_bc,
/// so grouping by it is a partition and couplings inside a group are uniform.
pub fn detect_equivalence(system: &SpinSystem) -> Vec<EquivalenceGroup> {
    let n = system.len();
    let mut assigned = vec![false; n];
    let mut groups = Vec::new();
    for first in 0..n {
        if assigned[first] {
            continue;
        }
        assigned[first] = true;
        let mut members = vec![first];
        for other in first + 1..n {
            if !assigned[other] && equivalent(system, first, other) {
                assigned[other] = true;
                members.push(other);
            }
        }
        if members.len() < 2 {
            continue;
        }
        let nucleus = system.nucleus(first);
        let external = (0..n)
            .filter(|k| !members.contains(k))
            .map(|k| (k, system.coupling(first, k)))
            .filter(|&(_, j)| j != 0.0)
            .collect();
        groups.push(EquivalenceGroup {
            intra_coupling: system.coupling(members[0], members[1]),
            isotope: nucleus.isotope.clone(),
            delta: nucleus.delta,
            external,
            members,
        });
    }
    groups
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Irrep {
    /// Twice the total spin j.
    pub twice_j: u32,
    pub multiplicity: u128,
}

impl Irrep {
    pub fn j(&self) -> f64 {
        self.twice_j as f64 / 2.0
    }

    pub fn dimension(&self) -> u128 {
        self.twice_j as u128 + 1
    }
}

/// Irreps of n coupled spin-1/2, from j = n/2 down to (n mod 2)/2, with
/// g(n, j) = (2j+1)·n! / ((n/2+j+1)!·(n/2−j)!).
pub fn irrep_decomposition(n: usize) -> Result<Vec<Irrep>> {
    if n == 0 {
        return Err(Error::InvalidInput("empty equivalence group".into()));
    }
    let n = n as u64;
    let overflow = || Error::InvalidInput(format!("group of {n} spins is too large"));
    (0..=n / 2)
        .map(|k| {
            // k = n/2 − j
            let twice_j = n - 2 * k;
            let top = binomial(n, k).ok_or_else(overflow)?;
            let numerator = top.checked_mul(twice_j as u128 + 1).ok_or_else(overflow)?;
            Ok(Irrep {
                twice_j: twice_j as u32,
                multiplicity: numerator / (n - k + 1) as u128,
            })
        })
        .collect()
}

/// One site of an effective system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EffectiveSite {
    /// An original spin outside every reduced group.
    Single(usize),
    /// A composite spin-j site standing for group `group`.
    Composite { group: usize, twice_j: u32 },
}

/// One choice of irrep per group and the effective system it induces.
#[derive(Debug, Clone)]
pub struct IrrepAssignment {
    /// Chosen twice-j, one per group.
    pub twice_j: Vec<u32>,
    /// Product of the per-group multiplicities.
    pub multiplicity: u128,
    /// Spin-0 composites are omitted: they carry neither Zeeman, coupling
    /// nor ladder terms.
    pub sites: Vec<EffectiveSite>,
    pub system: Option<SpinSystem>,
}

impl IrrepAssignment {
    pub fn dimension(&self) -> u128 {
        self.system.as_ref().map_or(1, |s| {
            s.nuclei()
                .iter()
                .map(|n| n.isotope.multiplicity() as u128)
                .product()
        })
    }
}

/// Number of irrep assignments of `groups`, saturating.
pub fn assignment_count(groups: &[EquivalenceGroup]) -> usize {
    groups
        .iter()
        .map(|g| g.len() / 2 + 1)
        .fold(1usize, |acc, k| acc.saturating_mul(k))
}

/// Enumerates the Cartesian product of per-group irreps.
pub fn assignments(
    system: &SpinSystem,
    groups: &[EquivalenceGroup],
) -> Result<Vec<IrrepAssignment>> {
    let mut group_of = vec![None; system.len()];
    for (g, group) in groups.iter().enumerate() {
        if group.isotope.twice_spin != 1 {
            return Err(Error::InvalidInput(
                "only spin-1/2 groups can be reduced".into(),
            ));
        }
        for &m in &group.members {
            if group_of[m].replace(g).is_some() {
                return Err(Error::InvalidInput(format!("spin {m} is in two groups")));
            }
        }
    }
    let irreps: Vec<Vec<Irrep>> = groups
        .iter()
        .map(|g| irrep_decomposition(g.len()))
        .collect::<Result<_>>()?;
    let singles: Vec<usize> = (0..system.len())
        .filter(|&s| group_of[s].is_none())
        .collect();

    let count = assignment_count(groups);
    let mut out = Vec::with_capacity(count);
    let mut choice = vec![0usize; groups.len()];
    loop {
        let twice_j: Vec<u32> = choice
            .iter()
            .zip(&irreps)
            .map(|(&c, ir)| ir[c].twice_j)
            .collect();
        let multiplicity = choice
            .iter()
            .zip(&irreps)
            .map(|(&c, ir)| ir[c].multiplicity)
            .product();
        let mut sites: Vec<EffectiveSite> =
            singles.iter().map(|&s| EffectiveSite::Single(s)).collect();
        for (g, &tj) in twice_j.iter().enumerate() {
            if tj > 0 {
                sites.push(EffectiveSite::Composite {
                    group: g,
                    twice_j: tj,
                });
            }
        }
        let system = effective_system(system, groups, &sites)?;
        out.push(IrrepAssignment {
            twice_j,
            multiplicity,
            sites,
            system,
        });

        // mixed-radix increment
        let mut k = 0;
        while k < choice.len() {
            choice[k] += 1;
            if choice[k] < irreps[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
        if k == choice.len() {
            break;
        }
    }
    Ok(out)
}

fn representative(groups: &[EquivalenceGroup], site: EffectiveSite) -> usize {
    match site {
        EffectiveSite::Single(s) => s,
        EffectiveSite::Composite { group, .. } => groups[group].members[0],
    }
}

fn effective_system(
    system: &SpinSystem,
    groups: &[EquivalenceGroup],
    sites: &[EffectiveSite],
) -> Result<Option<SpinSystem>> {
    if sites.is_empty() {
        return Ok(None);
    }
    let nuclei = sites
        .iter()
        .map(|&site| match site {
            EffectiveSite::Single(s) => Ok(system.nucleus(s).clone()),
            EffectiveSite::Composite { group, twice_j } => {
                let g = &groups[group];
                let isotope = Isotope::new(g.isotope.symbol.clone(), g.isotope.gamma, twice_j)?;
                let label = format!("{}[j={}/2]", system.nucleus(g.members[0]).label, twice_j);
                Nucleus::new(label, isotope, g.delta)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    // group-to-anything couplings are uniform, so any member represents it
    let mut couplings = Vec::new();
    for a in 0..sites.len() {
        for b in a + 1..sites.len() {
            let j = system.coupling(
                representative(groups, sites[a]),
                representative(groups, sites[b]),
            );
            if j != 0.0 {
                couplings.push((a, b, j));
            }
        }
    }
    SpinSystem::new(nuclei, couplings).map(Some)
}

fn uniform_on(weights: &[f64], group: &EquivalenceGroup) -> bool {
    group
        .members
        .iter()
        .all(|&m| weights[m] == weights[group.members[0]])
}

/// Reduced stick spectra of `system` for several left operators sharing one
/// right operator, weights given per original spin.
///
/// The right weights must be uniform inside a group for it to be reduced;
/// groups that are not are left unreduced. Left weights may differ: with a
/// permutation-symmetric right operator every member contributes equally, so
/// a group enters with the mean of its members' left weights.
pub fn reduced_spectra<T: EigenScalar>(
    system: &SpinSystem,
    settings: &SpectrometerSettings,
    groups: &[EquivalenceGroup],
    lefts: &[Vec<f64>],
    right: &[f64],
    options: &ExactOptions,
) -> Result<Vec<StickSpectrum<T>>> {
    let mut groups: Vec<EquivalenceGroup> = groups
        .iter()
        .filter(|g| uniform_on(right, g))
        .cloned()
        .collect();
    // drop the groups with the most irreps until the enumeration is affordable
    while assignment_count(&groups) > options.max_assignments {
        let worst = (0..groups.len())
            .max_by_key(|&g| (groups[g].len(), std::cmp::Reverse(g)))
            .unwrap();
        log::warn!(
            "equivalence group of {} spins left unreduced (assignment cap {})",
            groups[worst].len(),
            options.max_assignments
        );
        groups.remove(worst);
    }
    let full_dimension: f64 = system
        .nuclei()
        .iter()
        .map(|n| n.isotope.multiplicity() as f64)
        .product();
    let assignments = assignments(system, &groups)?;
    for a in &assignments {
        let dim = a.dimension();
        if dim > options.max_dimension as u128 {
            return Err(Error::DimensionCap {
                dimension: usize::try_from(dim).unwrap_or(usize::MAX),
                cap: options.max_dimension,
            });
        }
    }

    let site_weight = |weights: &[f64], site: EffectiveSite| match site {
        EffectiveSite::Single(s) => weights[s],
        EffectiveSite::Composite { group, .. } => {
            let members = &groups[group].members;
            members.iter().map(|&m| weights[m]).sum::<f64>() / members.len() as f64
        }
    };

    let parts: Vec<Vec<StickSpectrum<T>>> = assignments
        .par_iter()
        .filter_map(|a| Some((a, a.system.as_ref()?)))
        .map(|(a, effective)| {
            let right_eff: Vec<f64> = a.sites.iter().map(|&s| site_weight(right, s)).collect();
            let lefts_eff: Vec<Vec<f64>> = lefts
                .iter()
                .map(|l| a.sites.iter().map(|&s| site_weight(l, s)).collect())
                .collect();
            let scale = a.multiplicity as f64 * 2.0 / full_dimension;
            direct_spectra(effective, settings, &lefts_eff, &right_eff, options, scale)
        })
        .collect::<Result<_>>()?;

    let tol = T::of(options.sticks.merge_tolerance);
    let floor = T::of(options.sticks.relative_floor);
    Ok((0..lefts.len())
        .map(|k| StickSpectrum::combine(parts.iter().map(|p| p[k].clone()), tol, floor))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::Isotope;

    fn protons(shifts_ppm: &[f64], couplings: &[(usize, usize, f64)]) -> SpinSystem {
        let nuclei = shifts_ppm
            .iter()
            .enumerate()
            .map(|(i, &d)| Nucleus::from_ppm(format!("H{i}"), Isotope::proton(), d).unwrap())
            .collect();
        SpinSystem::new(nuclei, couplings.iter().copied()).unwrap()
    }

    #[test]
    fn methyl_next_to_one_spin() {
        let sys = protons(
            &[1.0, 1.0, 1.0, 4.0],
            &[
                (0, 3, 7.0),
                (1, 3, 7.0),
                (2, 3, 7.0),
                (0, 1, -12.0),
                (0, 2, -12.0),
                (1, 2, -12.0),
            ],
        );
        let groups = detect_equivalence(&sys);
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].members, vec![0, 1, 2]);
        assert_eq!(groups[0].intra_coupling, -12.0);
        assert_eq!(groups[0].external.get(&3), Some(&7.0));
    }

    #[test]
    fn chemical_but_not_magnetic_equivalence() {
        let sys = protons(&[1.0, 1.0, 3.0], &[(0, 2, 7.0), (1, 2, 6.0)]);
        assert!(detect_equivalence(&sys).is_empty());
    }

    #[test]
    fn small_decompositions() {
        let three = irrep_decomposition(3).unwrap();
        assert_eq!(
            three,
            vec![
                Irrep {
                    twice_j: 3,
                    multiplicity: 1
                },
                Irrep {
                    twice_j: 1,
                    multiplicity: 2
                }
            ]
        );
        let two = irrep_decomposition(2).unwrap();
        assert_eq!(
            two,
            vec![
                Irrep {
                    twice_j: 2,
                    multiplicity: 1
                },
                Irrep {
                    twice_j: 0,
                    multiplicity: 1
                }
            ]
        );
    }

    #[test]
    fn assignment_dimensions_add_up() {
        let sys = protons(
            &[1.0, 1.0, 1.0, 2.0, 2.0, 5.0],
            &[
                (0, 5, 3.0),
                (1, 5, 3.0),
                (2, 5, 3.0),
                (3, 5, 1.0),
                (4, 5, 1.0),
            ],
        );
        let groups = detect_equivalence(&sys);
        assert_eq!(groups.len(), 2);
        let all = assignments(&sys, &groups).unwrap();
        assert_eq!(all.len(), 4);
        let total: u128 = all.iter().map(|a| a.multiplicity * a.dimension()).sum();
        assert_eq!(total, 64);
        // the j = 0 pair irrep drops its site
        assert!(all.iter().any(|a| a.sites.len() == 2));
    }
}
