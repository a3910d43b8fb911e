//! Product basis of a set of spins, ordered by total-Mz sector.
//!
//! Magnetic quantum numbers are stored doubled (`m2 = 2m`) so half-integer
//! arithmetic stays exact. States are ordered by descending total Mz and,
//! inside a sector, lexicographically with site 0 most significant and larger
//! m first.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductBasisState {
    /// Doubled magnetic quantum number per site.
    pub m2: Vec<i32>,
    /// Doubled total Mz, the exact sum of `m2`.
    pub mz2: i32,
}

/// Contiguous range of basis states sharing a total Mz.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sector {
    pub mz2: i32,
    pub offset: usize,
    pub dim: usize,
}

impl Sector {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.dim
    }

    pub fn mz(&self) -> f64 {
        self.mz2 as f64 / 2.0
    }
}

#[derive(Debug, Clone)]
pub struct ProductBasis {
    twice_spins: Vec<u32>,
    strides: Vec<usize>,
    /// Basis index -> mixed-radix code.
    codes: Vec<usize>,
    /// Mixed-radix code -> basis index.
    index_of_code: Vec<u32>,
    sectors: Vec<Sector>,
}

impl ProductBasis {
    pub fn new(twice_spins: &[u32], max_dimension: usize) -> Result<Self> {
        if twice_spins.contains(&0) {
            return Err(Error::InvalidInput("basis sites need spin >= 1/2".into()));
        }
        let dim = twice_spins
            .iter()
            .try_fold(1usize, |acc, &s| acc.checked_mul(s as usize + 1))
            .unwrap_or(usize::MAX);
        if dim > max_dimension || dim > u32::MAX as usize {
            return Err(Error::DimensionCap {
                dimension: dim,
                cap: max_dimension,
            });
        }

        let n = twice_spins.len();
        let mut strides = vec![1usize; n];
        for k in (0..n.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * (twice_spins[k + 1] as usize + 1);
        }

        let max_mz2: i32 = twice_spins.iter().map(|&s| s as i32).sum();
        // Bucket codes by sector; codes are visited in ascending order so each
        // bucket is already lexicographically sorted.
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); max_mz2 as usize + 1];
        let mut digits = vec![0u32; n];
        let mut mz2 = max_mz2;
        for code in 0..dim {
            if code > 0 {
                // increment the mixed-radix counter, tracking Mz incrementally
                let mut k = n;
                while k > 0 {
                    k -= 1;
                    if digits[k] < twice_spins[k] {
                        digits[k] += 1;
                        mz2 -= 2;
                        break;
                    }
                    mz2 += 2 * digits[k] as i32;
                    digits[k] = 0;
                }
            }
            buckets[((max_mz2 - mz2) / 2) as usize].push(code);
        }

        let mut codes = Vec::with_capacity(dim);
        let mut sectors = Vec::new();
        for (b, bucket) in buckets.into_iter().enumerate() {
            if bucket.is_empty() {
                continue;
            }
            sectors.push(Sector {
                mz2: max_mz2 - 2 * b as i32,
                offset: codes.len(),
                dim: bucket.len(),
            });
            codes.extend(bucket);
        }
        let mut index_of_code = vec![0u32; dim];
        for (index, &code) in codes.iter().enumerate() {
            index_of_code[code] = index as u32;
        }

        Ok(Self {
            twice_spins: twice_spins.to_vec(),
            strides,
            codes,
            index_of_code,
            sectors,
        })
    }

    /// Basis of `n` spin-1/2 sites.
    pub fn spin_half(n: usize, max_dimension: usize) -> Result<Self> {
        Self::new(&vec![1; n], max_dimension)
    }

    pub fn dim(&self) -> usize {
        self.codes.len()
    }

    pub fn sites(&self) -> usize {
        self.twice_spins.len()
    }

    pub fn twice_spins(&self) -> &[u32] {
        &self.twice_spins
    }

    /// Sectors ordered by descending total Mz.
    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    pub fn sector_of_mz2(&self, mz2: i32) -> Option<&Sector> {
        self.sectors.iter().find(|s| s.mz2 == mz2)
    }

    pub fn largest_sector_dim(&self) -> usize {
        self.sectors.iter().map(|s| s.dim).max().unwrap_or(0)
    }

    /// Doubled m of `site` in basis state `index`.
    #[inline]
    pub fn m2(&self, index: usize, site: usize) -> i32 {
        let digit =
            (self.codes[index] / self.strides[site]) % (self.twice_spins[site] as usize + 1);
        self.twice_spins[site] as i32 - 2 * digit as i32
    }

    pub fn state(&self, index: usize) -> ProductBasisState {
        let m2: Vec<i32> = (0..self.sites()).map(|s| self.m2(index, s)).collect();
        let mz2 = m2.iter().sum();
        ProductBasisState { m2, mz2 }
    }

    /// Index of the state obtained from `index` by changing site `site` by
    /// `delta2` (doubled units); `None` if that leaves the allowed range.
    #[inline]
    pub fn shifted(&self, index: usize, site: usize, delta2: i32) -> Option<usize> {
        let s2 = self.twice_spins[site] as i32;
        let m2 = self.m2(index, site) + delta2;
        if m2 > s2 || m2 < -s2 || delta2 % 2 != 0 {
            return None;
        }
        // raising m lowers the digit
        let code = self.codes[index] as isize - (delta2 / 2) as isize * self.strides[site] as isize;
        Some(self.index_of_code[code as usize] as usize)
    }

    /// Index of the state with the given per-site doubled m values.
    pub fn index_of(&self, m2: &[i32]) -> Option<usize> {
        if m2.len() != self.sites() {
            return None;
        }
        let mut code = 0usize;
        for (k, (&m, &s2)) in m2.iter().zip(&self.twice_spins).enumerate() {
            let s2 = s2 as i32;
            if m > s2 || m < -s2 || (s2 - m) % 2 != 0 {
                return None;
            }
            code += ((s2 - m) / 2) as usize * self.strides[k];
        }
        Some(self.index_of_code[code] as usize)
    }
}

/// Largest total-Mz sector dimension of a product space, without building
/// it (convolution of the per-site m distributions).
pub fn largest_sector_dimension(twice_spins: &[u32]) -> u128 {
    let mut counts: Vec<u128> = vec![1];
    for &s in twice_spins {
        let width = s as usize + 1;
        let mut next = vec![0u128; counts.len() + width - 1];
        for (i, &c) in counts.iter().enumerate() {
            for slot in &mut next[i..i + width] {
                *slot = slot.saturating_add(c);
            }
        }
        counts = next;
    }
    counts.into_iter().max().unwrap_or(1)
}

/// Binomial coefficient as `u128`; `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}
