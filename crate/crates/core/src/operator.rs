//! Sparse operators in the product basis: the liquid-state spin Hamiltonian
//! and collective ladder operators.

use std::f64::consts::PI;

use crate::basis::ProductBasis;
use crate::error::{Error, Result};
use crate::num::{total, Real};
use crate::spin::{larmor_frequency, SpectrometerSettings, SpinSystem};

/// Real sparse matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator<T> {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> SparseOperator<T> {
    /// Assembles from unsorted triplets; duplicates are summed.
    pub fn from_triplets(rows: usize, cols: usize, mut triplets: Vec<(usize, usize, T)>) -> Self {
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<T> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            debug_assert!(r < rows && c < cols);
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            last = Some((r, c));
            row_ptr[r + 1] += 1;
            col_idx.push(c);
            values.push(v);
        }
        for r in 0..rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(column, value)` pairs of one row.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.row(r)
            .find(|&(col, _)| col == c)
            .map_or(T::zero(), |(_, v)| v)
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.rows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(
            self.cols,
            self.rows,
            self.triplets().map(|(r, c, v)| (c, r, v)).collect(),
        )
    }

    /// Dense row-major copy, for small matrices and tests.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut dense = vec![vec![T::zero(); self.cols]; self.rows];
        for (r, c, v) in self.triplets() {
            dense[r][c] = v;
        }
        dense
    }

    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, v| acc.max(v.abs()))
    }
}

/// Hamiltonian of a set of sites in their product basis, in rad·s⁻¹.
///
/// The stored matrix is H + ω̄·I^z_total with ω̄ the mean Larmor frequency
/// (`frame`). Total I^z commutes with H, so this only offsets each Mz sector
/// by ω̄·Mz, and it keeps in-sector differences free of the rounding that a
/// ~10⁹ rad·s⁻¹ Zeeman diagonal would carry.
#[derive(Debug, Clone)]
pub struct Hamiltonian<T> {
    basis: ProductBasis,
    matrix: SparseOperator<T>,
    sites: Vec<usize>,
    larmor: Vec<f64>,
    frame: f64,
}

impl<T: Real> Hamiltonian<T> {
    pub fn basis(&self) -> &ProductBasis {
        &self.basis
    }

    /// Frame-offset matrix H + ω̄·I^z_total.
    pub fn matrix(&self) -> &SparseOperator<T> {
        &self.matrix
    }

    /// The laboratory-frame matrix H itself.
    pub fn lab_matrix(&self) -> SparseOperator<T> {
        let frame = T::of(self.frame);
        let triplets = self
            .matrix
            .triplets()
            .chain((0..self.basis.dim()).map(|i| {
                let mz = T::of(self.basis.state(i).mz2 as f64) / T::of(2.0);
                (i, i, -frame * mz)
            }))
            .collect();
        SparseOperator::from_triplets(self.basis.dim(), self.basis.dim(), triplets)
    }

    /// Original system indices of the basis sites, in basis order.
    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    /// Larmor frequency of each basis site.
    pub fn larmor(&self) -> &[f64] {
        &self.larmor
    }

    /// Mean Larmor frequency ω̄; sector energies are `-ω̄·Mz` plus the
    /// eigenvalues of the stored block.
    pub fn frame(&self) -> f64 {
        self.frame
    }
}

/// Builds H = −Σ ω_l I^z_l + 2π Σ_{k<l} J_kl I_k·I_l over `subset` (all spins
/// when `None`). Couplings leaving the subset are dropped.
pub fn build_hamiltonian<T: Real>(
    system: &SpinSystem,
    settings: &SpectrometerSettings,
    subset: Option<&[usize]>,
    max_dimension: usize,
) -> Result<Hamiltonian<T>> {
    let sites: Vec<usize> = match subset {
        Some(s) => s.to_vec(),
        None => (0..system.len()).collect(),
    };
    if sites.is_empty() {
        return Err(Error::InvalidInput("empty site subset".into()));
    }
    let sub = system.subsystem(&sites)?;
    let twice_spins: Vec<u32> = sub.nuclei().iter().map(|n| n.isotope.twice_spin).collect();
    let basis = ProductBasis::new(&twice_spins, max_dimension)?;
    let larmor: Vec<f64> = sub
        .nuclei()
        .iter()
        .map(|n| larmor_frequency(n, settings))
        .collect();
    let frame = larmor.iter().sum::<f64>() / larmor.len() as f64;
    // w − frame as an exact f64 pair, so narrow scalars keep the small offset
    // and wide ones lose nothing
    let offsets: Vec<T> = larmor
        .iter()
        .map(|&w| {
            let (a, b) = (w, -frame);
            let sum = a + b;
            let bb = sum - a;
            let err = (a - (sum - bb)) + (b - bb);
            T::of(sum) + T::of(err)
        })
        .collect();
    let pairs: Vec<(usize, usize, T)> = sub
        .couplings()
        .map(|(k, l, hz)| (k, l, T::of(2.0 * PI * hz)))
        .collect();
    let half = T::of(0.5);

    let n = sites.len();
    let dim = basis.dim();
    let mut triplets = Vec::with_capacity(dim * (1 + pairs.len()));
    let mut m2 = vec![0i32; n];
    for col in 0..dim {
        for (s, m) in m2.iter_mut().enumerate() {
            *m = basis.m2(col, s);
        }
        let mut diag = T::zero();
        for s in 0..n {
            diag -= offsets[s] * T::of(m2[s] as f64) * half;
        }
        for &(k, l, coupling) in &pairs {
            diag += coupling * T::of((m2[k] * m2[l]) as f64) * half * half;
            // flip-flop terms (J/2)(I+_k I-_l + I-_k I+_l)
            let s2k = twice_spins[k] as i32;
            let s2l = twice_spins[l] as i32;
            if let (Some(up), Some(down)) =
                (raise_coefficient(s2k, m2[k]), lower_coefficient(s2l, m2[l]))
            {
                let value = half * coupling * T::of(up) * T::of(down);
                let row = basis
                    .shifted(basis.shifted(col, k, 2).unwrap(), l, -2)
                    .unwrap();
                triplets.push((row, col, value));
            }
            if let (Some(down), Some(up)) =
                (lower_coefficient(s2k, m2[k]), raise_coefficient(s2l, m2[l]))
            {
                let value = half * coupling * T::of(down) * T::of(up);
                let row = basis
                    .shifted(basis.shifted(col, k, -2).unwrap(), l, 2)
                    .unwrap();
                triplets.push((row, col, value));
            }
        }
        triplets.push((col, col, diag));
    }
    let matrix = SparseOperator::from_triplets(dim, dim, triplets);
    Ok(Hamiltonian {
        basis,
        matrix,
        sites,
        larmor,
        frame,
    })
}

/// ⟨m+1|I⁺|m⟩ = √(S(S+1) − m(m+1)) in doubled units; `None` at m = S.
#[inline]
pub fn raise_coefficient(twice_spin: i32, m2: i32) -> Option<f64> {
    if m2 >= twice_spin {
        return None;
    }
    let s2 = twice_spin as f64;
    let m = m2 as f64;
    Some(((s2 * (s2 + 2.0) - m * (m + 2.0)) / 4.0).sqrt())
}

/// ⟨m−1|I⁻|m⟩ = √(S(S+1) − m(m−1)); `None` at m = −S.
#[inline]
pub fn lower_coefficient(twice_spin: i32, m2: i32) -> Option<f64> {
    raise_coefficient(twice_spin, -m2)
}

/// Collective raising operator M⁺ = Σ_i w_i I⁺_i over a basis. The lowering
/// operator is its transpose.
#[derive(Debug, Clone)]
pub struct LadderOperator<T> {
    weights: Vec<f64>,
    raising: SparseOperator<T>,
}

impl<T: Real> LadderOperator<T> {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn raising(&self) -> &SparseOperator<T> {
        &self.raising
    }

    pub fn lowering(&self) -> SparseOperator<T> {
        self.raising.transpose()
    }

    pub fn is_zero(&self) -> bool {
        self.weights.iter().all(|&w| w == 0.0)
    }

    /// Tr[M⁻M⁺] = Σ over stored entries of |value|².
    pub fn trace_lowering_raising(&self) -> T {
        total(self.raising.triplets().map(|(_, _, v)| v * v))
    }
}

/// Builds Σ_i w_i I⁺_i on `basis`, one weight per basis site.
pub fn collective_ladder<T: Real>(
    basis: &ProductBasis,
    weights: &[f64],
) -> Result<LadderOperator<T>> {
    if weights.len() != basis.sites() {
        return Err(Error::InvalidInput(format!(
            "{} ladder weights for {} sites",
            weights.len(),
            basis.sites()
        )));
    }
    let mut triplets = Vec::new();
    for col in 0..basis.dim() {
        for (site, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let s2 = basis.twice_spins()[site] as i32;
            if let Some(c) = raise_coefficient(s2, basis.m2(col, site)) {
                let row = basis.shifted(col, site, 2).unwrap();
                triplets.push((row, col, T::of(w * c)));
            }
        }
    }
    Ok(LadderOperator {
        weights: weights.to_vec(),
        raising: SparseOperator::from_triplets(basis.dim(), basis.dim(), triplets),
    })
}

/// Default ladder weights over `sites`: γ_i, zeroed for nuclei that do not
/// match the detected isotope.
pub fn ladder_weights(
    system: &SpinSystem,
    settings: &SpectrometerSettings,
    sites: &[usize],
) -> Vec<f64> {
    sites
        .iter()
        .map(|&s| {
            let isotope = &system.nucleus(s).isotope;
            if settings.detects(isotope) {
                isotope.gamma
            } else {
                0.0
            }
        })
        .collect()
}
