//! Exact diagonalisation in total-Mz sectors and the stick spectrum
//!
//! C(ω) ∝ η Σ_{n,m} ⟨E_n|M⁻|E_m⟩⟨E_m|M⁺|E_n⟩ / (η² + (ω − (E_n − E_m))²).
//!
//! Stick weights are reported with the infinite-temperature trace normalised
//! per spin-1/2 unit: every weight carries a factor 2/D, with D the dimension
//! of the space that was traced. A lone proton therefore yields a single stick
//! of weight γ², and uncoupled spins keep weight γ² regardless of how many
//! spectator spins share the trace.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Side};
use rayon::prelude::*;

use crate::basis::Sector;
use crate::error::{Error, Result};
use crate::num::{total, EigenScalar, Real};
use crate::operator::{Hamiltonian, LadderOperator, SparseOperator};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stick<T> {
    /// Transition angular frequency E_n − E_m in rad·s⁻¹.
    pub frequency: T,
    pub weight: T,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StickSpectrum<T> {
    pub sticks: Vec<Stick<T>>,
    pub system_hash: u64,
    pub settings_hash: u64,
}

impl<T: Real> StickSpectrum<T> {
    pub fn new(sticks: Vec<Stick<T>>) -> Self {
        Self {
            sticks,
            system_hash: 0,
            settings_hash: 0,
        }
    }

    pub fn with_hashes(mut self, system_hash: u64, settings_hash: u64) -> Self {
        self.system_hash = system_hash;
        self.settings_hash = settings_hash;
        self
    }

    pub fn len(&self) -> usize {
        self.sticks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sticks.is_empty()
    }

    pub fn total_weight(&self) -> T {
        total(self.sticks.iter().map(|s| s.weight))
    }

    pub fn total_abs_weight(&self) -> T {
        total(self.sticks.iter().map(|s| s.weight.abs()))
    }

    pub fn min_weight(&self) -> Option<T> {
        self.sticks.iter().map(|s| s.weight).reduce(|a, b| a.min(b))
    }

    pub fn scale(&mut self, factor: T) {
        for s in &mut self.sticks {
            s.weight *= factor;
        }
    }

    /// Concatenates several stick lists and coalesces the result.
    pub fn combine(
        parts: impl IntoIterator<Item = Self>,
        merge_tolerance: T,
        relative_floor: T,
    ) -> Self {
        let mut sticks = Vec::new();
        let mut hashes = (0, 0);
        for part in parts {
            hashes = (part.system_hash, part.settings_hash);
            sticks.extend(part.sticks);
        }
        let sticks = drop_below_floor(coalesce(sticks, merge_tolerance), relative_floor);
        Self::new(sticks).with_hashes(hashes.0, hashes.1)
    }

    /// Sorted, merged and floored copy.
    pub fn canonical(&self, merge_tolerance: T, relative_floor: T) -> Self {
        let sticks = drop_below_floor(
            coalesce(self.sticks.clone(), merge_tolerance),
            relative_floor,
        );
        Self::new(sticks).with_hashes(self.system_hash, self.settings_hash)
    }
}

/// Sorts by frequency and merges runs of sticks that lie within `tolerance`
/// of the first stick of the run. The merged position is the |w|-weighted mean.
pub fn coalesce<T: Real>(mut sticks: Vec<Stick<T>>, tolerance: T) -> Vec<Stick<T>> {
    sticks.sort_by(|a, b| {
        a.frequency
            .partial_cmp(&b.frequency)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(
                a.weight
                    .partial_cmp(&b.weight)
                    .unwrap_or(std::cmp::Ordering::Equal),
            )
    });
    let mut out: Vec<Stick<T>> = Vec::with_capacity(sticks.len());
    let mut run_start = T::zero();
    let mut abs_sum = T::zero();
    let mut moment = T::zero();
    for s in sticks {
        if let Some(last) = out.last_mut() {
            if s.frequency - run_start <= tolerance {
                last.weight += s.weight;
                abs_sum += s.weight.abs();
                // moment is taken relative to the run start to avoid cancellation
                moment += s.weight.abs() * (s.frequency - run_start);
                if abs_sum > T::zero() {
                    last.frequency = run_start + moment / abs_sum;
                }
                continue;
            }
        }
        run_start = s.frequency;
        abs_sum = s.weight.abs();
        moment = T::zero();
        out.push(s);
    }
    out
}

pub fn drop_below_floor<T: Real>(sticks: Vec<Stick<T>>, relative_floor: T) -> Vec<Stick<T>> {
    let floor = total(sticks.iter().map(|s| s.weight.abs())) * relative_floor;
    sticks
        .into_iter()
        .filter(|s| s.weight.abs() > floor)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StickOptions {
    /// Sticks of one sector pair closer than this (rad·s⁻¹) are merged.
    pub merge_tolerance: f64,
    /// Sticks with |w| below this fraction of the total |w| are dropped.
    pub relative_floor: f64,
    /// Factor applied to every raw trace weight; defaults to 2/D.
    pub trace_scale: Option<f64>,
}

impl StickOptions {
    pub const DEFAULT_FLOOR: f64 = 1e-14;

    /// Merging window of 10⁻³ η, far below anything visible after broadening.
    pub fn for_eta(eta: f64) -> Self {
        Self {
            merge_tolerance: 1e-3 * eta,
            relative_floor: Self::DEFAULT_FLOOR,
            trace_scale: None,
        }
    }

    pub fn with_trace_scale(mut self, scale: f64) -> Self {
        self.trace_scale = Some(scale);
        self
    }
}

/// Eigenpairs of one Mz sector. Energies are stored relative to `shift`.
#[derive(Debug, Clone)]
pub struct SectorEigensystem<T> {
    pub sector: Sector,
    pub shift: T,
    pub local_energies: Vec<T>,
    /// Orthonormal eigenvectors as columns, in sector-local coordinates.
    pub vectors: Mat<T>,
}

impl<T: Real> SectorEigensystem<T> {
    pub fn energy(&self, k: usize) -> T {
        self.shift + self.local_energies[k]
    }
}

#[derive(Debug, Clone)]
pub struct SzBlockEigensystem<T> {
    sectors: Vec<SectorEigensystem<T>>,
    dimension: usize,
    frame: T,
}

impl<T: EigenScalar> SzBlockEigensystem<T> {
    /// Sectors in descending-Mz order.
    pub fn sectors(&self) -> &[SectorEigensystem<T>] {
        &self.sectors
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn frame(&self) -> T {
        self.frame
    }

    pub fn sector_dims(&self) -> Vec<usize> {
        self.sectors.iter().map(|s| s.sector.dim).collect()
    }

    pub fn largest_sector_dim(&self) -> usize {
        self.sectors.iter().map(|s| s.sector.dim).max().unwrap_or(0)
    }

    /// All eigenvalues, ascending.
    pub fn energies(&self) -> Vec<T> {
        let mut all: Vec<T> = self
            .sectors
            .iter()
            .flat_map(|s| (0..s.sector.dim).map(move |k| s.energy(k)))
            .collect();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        all
    }

    /// Largest per-sector ‖HV − VE‖_F / ‖H‖_F, measured on the frame-offset
    /// blocks (stricter than the laboratory-frame norm).
    pub fn max_residual(&self, h: &Hamiltonian<T>) -> f64 {
        self.sectors
            .iter()
            .map(|s| {
                let block = dense_block(h.matrix(), s.sector);
                let mut hv = Mat::<T>::zeros(s.sector.dim, s.sector.dim);
                matmul(
                    &mut hv,
                    Accum::Replace,
                    &block,
                    &s.vectors,
                    T::one(),
                    faer::Par::Seq,
                );
                let mut res = T::zero();
                let mut norm = T::zero();
                for j in 0..s.sector.dim {
                    let e = s.local_energies[j];
                    for i in 0..s.sector.dim {
                        let r = hv[(i, j)] - s.vectors[(i, j)] * e;
                        res += r * r;
                        norm += block[(i, j)] * block[(i, j)];
                    }
                }
                (res.sqrt() / norm.sqrt().max(T::min_positive_value())).as_f64()
            })
            .fold(0.0, f64::max)
    }

    /// Largest |VᵀV − 1| entry over all sectors.
    pub fn max_orthonormality_error(&self) -> f64 {
        self.sectors
            .iter()
            .map(|s| {
                let d = s.sector.dim;
                let mut gram = Mat::<T>::zeros(d, d);
                matmul(
                    &mut gram,
                    Accum::Replace,
                    s.vectors.transpose(),
                    &s.vectors,
                    T::one(),
                    faer::Par::Seq,
                );
                let mut worst = T::zero();
                for i in 0..d {
                    for j in 0..d {
                        let target = if i == j { T::one() } else { T::zero() };
                        worst = worst.max((gram[(i, j)] - target).abs());
                    }
                }
                worst.as_f64()
            })
            .fold(0.0, f64::max)
    }
}

fn dense_block<T: Real + faer::traits::RealField>(
    matrix: &SparseOperator<T>,
    sector: Sector,
) -> Mat<T> {
    let mut block = Mat::<T>::zeros(sector.dim, sector.dim);
    for r in sector.range() {
        for (c, v) in matrix.row(r) {
            if sector.range().contains(&c) {
                block[(r - sector.offset, c - sector.offset)] = v;
            }
        }
    }
    block
}

/// Dense-diagonalises every Mz sector of `h` independently.
pub fn diagonalize_blocks<T: EigenScalar>(h: &Hamiltonian<T>) -> Result<SzBlockEigensystem<T>> {
    let matrix = h.matrix();
    let basis = h.basis();
    let scale = matrix.max_abs();
    // H must not couple different sectors
    for sector in basis.sectors() {
        for r in sector.range() {
            if matrix.row(r).any(|(c, _)| !sector.range().contains(&c)) {
                return Err(Error::InvalidInput(
                    "Hamiltonian couples different Mz sectors".into(),
                ));
            }
        }
    }
    let frame = T::of(h.frame());
    let sectors = basis
        .sectors()
        .par_iter()
        .map(|&sector| {
            // the stored matrix is H + frame·Mz, so this is the sector offset
            let shift = -frame * T::of(sector.mz());
            let block = dense_block(matrix, sector);
            let d = sector.dim;
            let mut asym = T::zero();
            for i in 0..d {
                for j in 0..i {
                    asym = asym.max((block[(i, j)] - block[(j, i)]).abs());
                }
            }
            if asym > T::of(1e-12) * scale {
                return Err(Error::NonHermitian(asym.as_f64()));
            }
            let evd = block
                .self_adjoint_eigen(Side::Lower)
                .map_err(|_| Error::Eigensolver(d))?;
            let values = evd.S().column_vector();
            let local_energies = (0..d).map(|k| values[k]).collect();
            Ok(SectorEigensystem {
                sector,
                shift,
                local_energies,
                vectors: evd.U().to_owned(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SzBlockEigensystem {
        sectors,
        dimension: basis.dim(),
        frame,
    })
}

/// ⟨E_m|M⁺|E_n⟩ for n in the lower sector and m in the upper one.
fn transition_amplitudes<T: EigenScalar>(
    raising: &SparseOperator<T>,
    lower: &SectorEigensystem<T>,
    upper: &SectorEigensystem<T>,
) -> Mat<T> {
    let (du, dl) = (upper.sector.dim, lower.sector.dim);
    let entries: Vec<(usize, usize, T)> = upper
        .sector
        .range()
        .flat_map(|r| {
            raising
                .row(r)
                .filter(|(c, _)| lower.sector.range().contains(c))
                .map(move |(c, v)| (r - upper.sector.offset, c - lower.sector.offset, v))
        })
        .collect();
    // M⁺ V_lower, column by column
    let mut projected = Mat::<T>::zeros(du, dl);
    for j in 0..dl {
        let src = lower.vectors.col(j);
        let mut dst = projected.col_mut(j);
        for &(r, c, v) in &entries {
            dst[r] += v * src[c];
        }
    }
    let mut out = Mat::<T>::zeros(du, dl);
    matmul(
        &mut out,
        Accum::Replace,
        upper.vectors.transpose(),
        &projected,
        T::one(),
        faer::get_global_parallelism(),
    );
    out
}

/// Stick spectrum for left operator `left` (entering as L⁻ = (L⁺)†) and right
/// operator `right`. Weights are ⟨E_n|L⁻|E_m⟩⟨E_m|R⁺|E_n⟩, non-negative when
/// both operators coincide.
pub fn stick_spectrum<T: EigenScalar>(
    eig: &SzBlockEigensystem<T>,
    left: &LadderOperator<T>,
    right: &LadderOperator<T>,
    options: &StickOptions,
) -> StickSpectrum<T> {
    stick_spectra(eig, &[left], right, options)
        .pop()
        .unwrap_or_default()
}

/// One stick spectrum per left operator, sharing the right-operator
/// projections.
pub fn stick_spectra<T: EigenScalar>(
    eig: &SzBlockEigensystem<T>,
    lefts: &[&LadderOperator<T>],
    right: &LadderOperator<T>,
    options: &StickOptions,
) -> Vec<StickSpectrum<T>> {
    let scale = T::of(options.trace_scale.unwrap_or(2.0 / eig.dimension as f64));
    let tolerance = T::of(options.merge_tolerance);
    let sectors = &eig.sectors;
    let pairs: Vec<(usize, usize)> = (1..sectors.len())
        .filter(|&s| sectors[s - 1].sector.mz2 == sectors[s].sector.mz2 + 2)
        .map(|s| (s, s - 1))
        .collect();

    let per_pair: Vec<Vec<Vec<Stick<T>>>> = pairs
        .par_iter()
        .map(|&(lo, up)| {
            let lower = &sectors[lo];
            let upper = &sectors[up];
            let right_amp = if right.is_zero() {
                None
            } else {
                Some(transition_amplitudes(right.raising(), lower, upper))
            };
            lefts
                .iter()
                .map(|left| {
                    let Some(right_amp) = right_amp.as_ref() else {
                        return Vec::new();
                    };
                    if left.is_zero() {
                        return Vec::new();
                    }
                    let own;
                    let left_amp = if std::ptr::eq(*left, right) {
                        right_amp
                    } else {
                        own = transition_amplitudes(left.raising(), lower, upper);
                        &own
                    };
                    let mut sticks = Vec::with_capacity(lower.sector.dim * upper.sector.dim);
                    for n in 0..lower.sector.dim {
                        for m in 0..upper.sector.dim {
                            let w = left_amp[(m, n)] * right_amp[(m, n)];
                            if w == T::zero() {
                                continue;
                            }
                            let frequency =
                                eig.frame + (lower.local_energies[n] - upper.local_energies[m]);
                            sticks.push(Stick {
                                frequency,
                                weight: w * scale,
                            });
                        }
                    }
                    coalesce(sticks, tolerance)
                })
                .collect()
        })
        .collect();

    (0..lefts.len())
        .map(|k| {
            let mut sticks: Vec<Stick<T>> =
                per_pair.iter().flat_map(|p| p[k].iter().copied()).collect();
            sticks.sort_by(|a, b| a.frequency.partial_cmp(&b.frequency).unwrap());
            StickSpectrum::new(drop_below_floor(sticks, T::of(options.relative_floor)))
        })
        .collect()
}

/// Tr[L⁻R⁺] = Σ L⁺_{rc} R⁺_{rc}.
pub fn ladder_trace<T: Real>(left: &LadderOperator<T>, right: &LadderOperator<T>) -> T {
    let l = left.raising();
    let r = right.raising();
    total((0..l.rows()).map(|row| total(l.row(row).map(|(c, v)| v * r.get(row, c)))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{build_hamiltonian, collective_ladder, ladder_weights};
    use crate::spin::{Isotope, Nucleus, SpectrometerSettings, SpinSystem};
    use std::f64::consts::PI;

    fn protons(shifts_ppm: &[f64], couplings: &[(usize, usize, f64)]) -> SpinSystem {
        let nuclei = shifts_ppm
            .iter()
            .enumerate()
            .map(|(i, &d)| Nucleus::from_ppm(format!("H{i}"), Isotope::proton(), d).unwrap())
            .collect();
        SpinSystem::new(nuclei, couplings.iter().copied()).unwrap()
    }

    fn solve(
        sys: &SpinSystem,
        s: &SpectrometerSettings,
    ) -> (SzBlockEigensystem<f64>, StickSpectrum<f64>, f64) {
        let h = build_hamiltonian::<f64>(sys, s, None, 1 << 16).unwrap();
        let eig = diagonalize_blocks(&h).unwrap();
        let sites: Vec<_> = (0..sys.len()).collect();
        let m = collective_ladder::<f64>(h.basis(), &ladder_weights(sys, s, &sites)).unwrap();
        let sticks = stick_spectrum(&eig, &m, &m, &StickOptions::for_eta(s.eta()));
        let trace = ladder_trace(&m, &m) * 2.0 / h.basis().dim() as f64;
        (eig, sticks, trace)
    }

    #[test]
    fn single_proton_has_one_stick() {
        let s = SpectrometerSettings::from_mhz(400.0, 1.0).unwrap();
        let (eig, sticks, _) = solve(&protons(&[0.0], &[]), &s);
        let w = s.reference_omega();
        let e = eig.energies();
        assert!((e[0] + w / 2.0).abs() < 1e-6 && (e[1] - w / 2.0).abs() < 1e-6);
        assert_eq!(sticks.len(), 1);
        let g = Isotope::proton().gamma;
        assert!((sticks.sticks[0].frequency - w).abs() < 1e-6);
        assert!((sticks.sticks[0].weight / (g * g) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ax_doublets() {
        let s = SpectrometerSettings::from_mhz(400.0, 1.0).unwrap();
        let (_, sticks, _) = solve(&protons(&[1.0, 2.0], &[(0, 1, 10.0)]), &s);
        assert_eq!(sticks.len(), 4);
        let w = s.reference_omega();
        let f: Vec<f64> = sticks.sticks.iter().map(|x| x.frequency).collect();
        // two doublets near ω_ref(1 + δ), each split by ≈ 2π·10
        let c1 = w * (1.0 + 1e-6);
        let c2 = w * (1.0 + 2e-6);
        assert!((0.5 * (f[0] + f[1]) - c1).abs() < 1.0);
        assert!((0.5 * (f[2] + f[3]) - c2).abs() < 1.0);
        assert!(((f[1] - f[0]) - 2.0 * PI * 10.0).abs() < 0.2);
        assert!(((f[3] - f[2]) - 2.0 * PI * 10.0).abs() < 0.2);
    }

    #[test]
    fn sector_dims_and_residuals() {
        let s = SpectrometerSettings::from_mhz(80.0, 1.0).unwrap();
        let sys = protons(
            &[1.0, 1.2, 3.0, 4.1],
            &[(0, 1, 7.0), (1, 2, 3.0), (2, 3, -12.0), (0, 3, 1.5)],
        );
        let h = build_hamiltonian::<f64>(&sys, &s, None, 1 << 10).unwrap();
        let eig = diagonalize_blocks(&h).unwrap();
        assert_eq!(eig.sector_dims(), vec![1, 4, 6, 4, 1]);
        assert!(eig.max_residual(&h) < 1e-10);
        assert!(eig.max_orthonormality_error() < 1e-10);
    }

    #[test]
    fn sum_rule_and_positivity() {
        let s = SpectrometerSettings::from_mhz(20.0, 1.0).unwrap();
        let sys = protons(&[1.0, 1.1, 2.0], &[(0, 1, 7.0), (1, 2, 15.0), (0, 2, -2.0)]);
        let (_, sticks, trace) = solve(&sys, &s);
        assert!(sticks.sticks.iter().all(|x| x.weight >= 0.0));
        assert!((sticks.total_weight() / trace - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_ladder_gives_empty_spectrum() {
        let s = SpectrometerSettings::from_mhz(400.0, 1.0).unwrap();
        let sys = protons(&[1.0, 2.0], &[(0, 1, 5.0)]);
        let h = build_hamiltonian::<f64>(&sys, &s, None, 64).unwrap();
        let eig = diagonalize_blocks(&h).unwrap();
        let zero = collective_ladder::<f64>(h.basis(), &[0.0, 0.0]).unwrap();
        assert!(stick_spectrum(&eig, &zero, &zero, &StickOptions::for_eta(1.0)).is_empty());
    }

    #[test]
    fn coalesce_merges_close_sticks() {
        let sticks = vec![
            Stick {
                frequency: 10.0,
                weight: 1.0,
            },
            Stick {
                frequency: 1.0,
                weight: 2.0,
            },
            Stick {
                frequency: 1.0005,
                weight: 2.0,
            },
        ];
        let merged: Vec<Stick<f64>> = coalesce(sticks, 1e-3);
        assert_eq!(merged.len(), 2);
        assert_eq!(merged[0].weight, 4.0);
        assert!((merged[0].frequency - 1.00025).abs() < 1e-12);
    }
}
