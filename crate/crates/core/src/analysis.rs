//! Sampling, normalisation and comparison of spectra.
//!
//! Stick spectra are sampled on an equal-area grid: the analytic cumulative
//! integral of the Lorentzian mixture is inverted at evenly spaced
//! quantiles, so every peak receives points in proportion to its weight.
//! Spectra are compared with the cosine similarity on a uniform resampling
//! grid, built by shape-preserving interpolation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{Stick, StickSpectrum};
use crate::error::{Error, Result};
use crate::interp::Pchip;
use crate::num::{total, Real};
use crate::spin::SpectrometerSettings;

/// Resampling points used by [`cosine_similarity`].
pub const DEFAULT_RESAMPLE_POINTS: usize = 100_000;
/// ε_ab reported when 1 − cos θ underflows.
pub const EPSILON_FLOOR: f64 = -16.0;
/// Half-width of the fallback grid for an empty spectrum, in units of η.
pub const EMPTY_WINDOW: f64 = 100.0;

/// Default sample count for a given line width (Hz).
pub fn default_points(fwhm_hz: f64) -> usize {
    if fwhm_hz <= 0.1 {
        20_000
    } else {
        2_000
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// Angular frequency in rad·s⁻¹.
    Angular,
    /// Δ = (ω − ω_ref)/ω_ref in parts per million.
    Ppm,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Axis::Angular => "angular",
            Axis::Ppm => "ppm",
        })
    }
}

/// Sampled spectrum on a strictly increasing axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum<T> {
    pub axis: Axis,
    pub points: Vec<T>,
    pub amplitudes: Vec<T>,
    /// Broadening η (rad·s⁻¹) used for sampling.
    pub eta: f64,
    pub normalized: bool,
}

impl<T: Real> Spectrum<T> {
    pub fn new(
        axis: Axis,
        points: Vec<T>,
        amplitudes: Vec<T>,
        eta: f64,
        normalized: bool,
    ) -> Result<Self> {
        let s = Self {
            axis,
            points,
            amplitudes,
            eta,
            normalized,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() != self.amplitudes.len() {
            return Err(Error::InvalidInput(
                "points and amplitudes differ in length".into(),
            ));
        }
        if self.points.len() < 2 {
            return Err(Error::InvalidInput(
                "a spectrum needs at least two points".into(),
            ));
        }
        if self.points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "spectrum axis must increase strictly".into(),
            ));
        }
        if self
            .points
            .iter()
            .chain(&self.amplitudes)
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidInput(
                "spectrum contains non-finite values".into(),
            ));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Trapezoid integral over the (non-uniform) axis.
    pub fn integral(&self) -> T {
        let half = T::of(0.5);
        total(
            self.points
                .windows(2)
                .zip(self.amplitudes.windows(2))
                .map(|(x, y)| (x[1] - x[0]) * (y[0] + y[1]) * half),
        )
    }

    pub fn min_amplitude(&self) -> T {
        self.amplitudes.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn support(&self) -> (T, T) {
        (self.points[0], self.points[self.points.len() - 1])
    }

    pub fn scaled(&self, factor: T) -> Self {
        let mut out = self.clone();
        for a in &mut out.amplitudes {
            *a *= factor;
        }
        out
    }
}

/// Sticks sorted by frequency with the sums needed for the grid and samples.
struct Mixture<T> {
    centers: Vec<T>,
    abs_weights: Vec<T>,
    weights: Vec<T>,
    sum: T,
    eta: T,
}

/// Unnormalised cumulative mass, |w|-density and signed lineshape at a point.
#[derive(Clone, Copy)]
struct Sums<T> {
    mass: T,
    density: T,
    signal: T,
}

impl<T: Real> Sums<T> {
    fn zero() -> Self {
        Self {
            mass: T::zero(),
            density: T::zero(),
            signal: T::zero(),
        }
    }
}

impl<T: Real> Mixture<T> {
    fn new(sticks: &[Stick<T>], eta: T) -> Self {
        let mut sorted: Vec<Stick<T>> = sticks
            .iter()
            .copied()
            .filter(|s| s.weight != T::zero())
            .collect();
        sorted.sort_by(|a, b| {
            a.frequency
                .partial_cmp(&b.frequency)
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let abs_weights: Vec<T> = sorted.iter().map(|s| s.weight.abs()).collect();
        Self {
            sum: total(abs_weights.iter().copied()),
            centers: sorted.iter().map(|s| s.frequency).collect(),
            weights: sorted.iter().map(|s| s.weight).collect(),
            abs_weights,
            eta,
        }
    }

    fn accumulate(&self, range: std::ops::Range<usize>, omega: T, acc: &mut Sums<T>) {
        let half = T::of(0.5);
        for k in range {
            let x = (omega - self.centers[k]) / self.eta;
            let lorentz = T::one() / (T::one() + x * x);
            acc.mass += self.abs_weights[k] * (x.atan() * T::FRAC_1_PI() + half);
            acc.density += self.abs_weights[k] * lorentz;
            acc.signal += self.weights[k] * lorentz;
        }
    }

    fn exact(&self, omega: T) -> Sums<T> {
        let mut acc = Sums::zero();
        self.accumulate(0..self.centers.len(), omega, &mut acc);
        acc
    }

    /// Cumulative fraction, its derivative, and C(ω).
    fn finish(&self, s: Sums<T>) -> (T, T, T) {
        (
            s.mass / self.sum,
            s.density * T::FRAC_1_PI() / (self.eta * self.sum),
            s.signal / self.eta,
        )
    }

    /// First stick index with center ≥ `omega`.
    fn index_at(&self, omega: T) -> usize {
        self.centers.partition_point(|&c| c < omega)
    }
}

/// Chebyshev nodes per window.
const CHEBYSHEV_NODES: usize = 20;
/// Sticks closer than this many half-widths to a window center are summed
/// exactly; the rest form a function analytic well beyond the window.
const NEAR_FIELD: f64 = 3.0;

/// Evaluator on [lo, hi]: near sticks exactly, far sticks by Chebyshev
/// interpolation (error about 5.8⁻²⁰ relative for the three sums).
struct Window<'a, T> {
    mixture: &'a Mixture<T>,
    near: std::ops::Range<usize>,
    mid: T,
    half: T,
    coefficients: [Vec<T>; 3],
}

impl<'a, T: Real> Window<'a, T> {
    fn new(mixture: &'a Mixture<T>, lo: T, hi: T) -> Self {
        let mid = (lo + hi) * T::of(0.5);
        let half = (hi - lo) * T::of(0.5);
        let reach = half * T::of(NEAR_FIELD);
        let k = mixture.centers.len();
        let mut near = mixture.index_at(mid - reach)..mixture.index_at(mid + reach);
        let mut coefficients = [Vec::new(), Vec::new(), Vec::new()];
        if half <= T::zero() || near == (0..k) {
            // degenerate or all-near window: nothing to interpolate
            near = 0..k;
        } else {
            let p = CHEBYSHEV_NODES;
            let angle = |j: usize| T::PI() * (T::of(j as f64) + T::of(0.5)) / T::of(p as f64);
            let values: Vec<Sums<T>> = (0..p)
                .map(|j| {
                    let x = mid + half * angle(j).cos();
                    let mut acc = Sums::zero();
                    mixture.accumulate(0..near.start, x, &mut acc);
                    mixture.accumulate(near.end..k, x, &mut acc);
                    acc
                })
                .collect();
            let scale = T::of(2.0) / T::of(p as f64);
            let picks: [fn(&Sums<T>) -> T; 3] = [|s| s.mass, |s| s.density, |s| s.signal];
            for (slot, pick) in coefficients.iter_mut().zip(picks) {
                *slot = (0..p)
                    .map(|m| {
                        let terms = values
                            .iter()
                            .enumerate()
                            .map(|(j, v)| pick(v) * (T::of(m as f64) * angle(j)).cos());
                        total(terms) * scale
                    })
                    .collect();
            }
        }
        Self {
            mixture,
            near,
            mid,
            half,
            coefficients,
        }
    }

    fn clenshaw(c: &[T], t: T) -> T {
        let two_t = t + t;
        let (mut b1, mut b2) = (T::zero(), T::zero());
        for &ck in c.iter().skip(1).rev() {
            let b0 = two_t * b1 - b2 + ck;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + c[0] * T::of(0.5)
    }

    fn eval(&self, omega: T) -> (T, T, T) {
        let mut acc = Sums::zero();
        self.mixture.accumulate(self.near.clone(), omega, &mut acc);
        if !self.coefficients[0].is_empty() {
            let t = ((omega - self.mid) / self.half)
                .max(-T::one())
                .min(T::one());
            acc.mass += Self::clenshaw(&self.coefficients[0], t);
            acc.density += Self::clenshaw(&self.coefficients[1], t);
            acc.signal += Self::clenshaw(&self.coefficients[2], t);
        }
        self.mixture.finish(acc)
    }
}

/// Root of `f(x) = target` for a monotone `f` on [lo, hi]: Newton steps,
/// falling back to bisection whenever a step leaves the bracket.
fn invert<T: Real>(
    eval: impl Fn(T) -> (T, T, T),
    target: T,
    mut lo: T,
    mut hi: T,
    start: T,
    eta: T,
) -> T {
    let mut x = start.max(lo).min(hi);
    for _ in 0..200 {
        let (f, p, _) = eval(x);
        let r = f - target;
        if r.abs() <= T::of(1e-13) {
            break;
        }
        if r < T::zero() {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= T::resolution() * T::of(4.0) * x.abs().max(eta) {
            break;
        }
        let newton = x - r / p;
        x = if p > T::zero() && newton > lo && newton < hi {
            newton
        } else {
            (lo + hi) * T::of(0.5)
        };
    }
    x
}

/// Analytic cumulative fraction of the |w|-weighted Lorentzian mixture.
pub fn lorentzian_cdf<T: Real>(sticks: &[Stick<T>], eta: T, omega: T) -> T {
    let mixture = Mixture::new(sticks, eta);
    if mixture.sum == T::zero() {
        return T::zero();
    }
    mixture.finish(mixture.exact(omega)).0
}

fn uniform<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    let step = (hi - lo) / T::of((n - 1) as f64);
    (0..n).map(|i| lo + step * T::of(i as f64)).collect()
}

/// Quantile spacing between exactly solved anchor points.
const ANCHOR_STRIDE: usize = 128;

/// Equal-area grid and C(ω) on it.
fn grid_and_samples<T: Real>(
    sticks: &StickSpectrum<T>,
    eta: T,
    n_points: usize,
) -> Result<(Vec<T>, Vec<T>)> {
    if n_points < 2 {
        return Err(Error::InvalidInput(
            "a grid needs at least two points".into(),
        ));
    }
    if !(eta > T::zero()) {
        return Err(Error::InvalidInput("broadening must be positive".into()));
    }
    let mixture = Mixture::new(&sticks.sticks, eta);
    if mixture.centers.is_empty() {
        let window = eta * T::of(EMPTY_WINDOW);
        return Ok((
            uniform(-window, window, n_points),
            vec![T::zero(); n_points],
        ));
    }
    let n = T::of(n_points as f64);
    let quantile = |q: usize| (T::of(q as f64) + T::of(0.5)) / n;
    // Lorentzian tails: mass beyond x·η is about 1/(πx)
    let reach = eta * T::of(2.0) / (T::PI() * quantile(0));
    let lo_bound = mixture.centers[0] - reach;
    let hi_bound = mixture.centers[mixture.centers.len() - 1] + reach;

    let mut anchors: Vec<usize> = (0..n_points).step_by(ANCHOR_STRIDE).collect();
    if *anchors.last().unwrap() != n_points - 1 {
        anchors.push(n_points - 1);
    }
    // start each anchor at the stick where the cumulative weight crosses it
    let mut cumulative = Vec::with_capacity(mixture.centers.len());
    let mut running = T::zero();
    for &w in &mixture.abs_weights {
        running += w;
        cumulative.push(running / mixture.sum);
    }
    let anchor_points: Vec<T> = anchors
        .par_iter()
        .map(|&q| {
            let target = quantile(q);
            let k = cumulative
                .partition_point(|&c| c < target)
                .min(mixture.centers.len() - 1);
            let exact = |x: T| mixture.finish(mixture.exact(x));
            invert(exact, target, lo_bound, hi_bound, mixture.centers[k], eta)
        })
        .collect();

    let chunks: Vec<(Vec<T>, Vec<T>)> = (0..anchors.len() - 1)
        .into_par_iter()
        .map(|a| {
            let (lo, hi) = (anchor_points[a], anchor_points[a + 1]);
            let window = Window::new(&mixture, lo, hi.max(lo));
            let last = a + 2 == anchors.len();
            let end = if last {
                anchors[a + 1] + 1
            } else {
                anchors[a + 1]
            };
            let mut points = Vec::with_capacity(end - anchors[a]);
            let mut values = Vec::with_capacity(end - anchors[a]);
            let (_, _, c) = window.eval(lo);
            points.push(lo);
            values.push(c);
            let mut prev = lo;
            for q in anchors[a] + 1..end {
                let x = if q == anchors[a + 1] {
                    hi
                } else {
                    let target = quantile(q);
                    let (f, p, _) = window.eval(prev);
                    let guess = prev + (target - f) / p.max(T::min_positive_value());
                    invert(|x| window.eval(x), target, prev, hi.max(prev), guess, eta)
                };
                values.push(window.eval(x).2);
                points.push(x);
                prev = x;
            }
            (points, values)
        })
        .collect();
    let mut grid = Vec::with_capacity(n_points);
    let mut amplitudes = Vec::with_capacity(n_points);
    for (p, v) in chunks {
        grid.extend(p);
        amplitudes.extend(v);
    }
    // ties can only come from extremely narrow lines; nudge them apart
    for i in 1..grid.len() {
        if grid[i] <= grid[i - 1] {
            let step = grid[i - 1].abs().max(eta) * T::resolution() * T::of(4.0);
            grid[i] = grid[i - 1] + step;
            amplitudes[i] = mixture.finish(mixture.exact(grid[i])).2;
        }
    }
    Ok((grid, amplitudes))
}

/// Grid whose points sit at the (q + 1/2)/n quantiles of the analytic
/// cumulative integral Σ|w_k|·[arctan((ω−ω_k)/η)/π + 1/2].
///
/// Weights enter by magnitude so that spin-resolved sums with small negative
/// contributions still get a well-defined grid. An empty spectrum gets a
/// uniform grid over ±100 η.
pub fn equal_area_grid<T: Real>(
    sticks: &StickSpectrum<T>,
    eta: T,
    n_points: usize,
) -> Result<Vec<T>> {
    Ok(grid_and_samples(sticks, eta, n_points)?.0)
}

/// C(ω_q) = Σ_k w_k η / (η² + (ω_q − ω_k)²), summed directly.
pub fn sample<T: Real>(sticks: &StickSpectrum<T>, eta: T, grid: &[T]) -> Vec<T> {
    let eta2 = eta * eta;
    grid.par_iter()
        .map(|&x| {
            total(sticks.sticks.iter().map(|s| {
                let d = x - s.frequency;
                s.weight * eta / (eta2 + d * d)
            }))
        })
        .collect()
}

/// Angular-axis spectrum on the equal-area grid.
pub fn sample_spectrum<T: Real>(
    sticks: &StickSpectrum<T>,
    eta: f64,
    n_points: usize,
) -> Result<Spectrum<T>> {
    let (grid, amplitudes) = grid_and_samples(sticks, T::of(eta), n_points)?;
    Spectrum::new(Axis::Angular, grid, amplitudes, eta, false)
}

/// ∫ C dω = π Σ_k w_k over the whole real line.
pub fn analytic_integral<T: Real>(sticks: &StickSpectrum<T>) -> T {
    T::PI() * sticks.total_weight()
}

/// Rescales so that the trapezoid integral equals `target`.
pub fn normalize<T: Real>(spectrum: &Spectrum<T>, target: f64) -> Result<Spectrum<T>> {
    let integral = spectrum.integral();
    if !(integral > T::zero()) || !integral.is_finite() {
        return Err(Error::ZeroSignal);
    }
    let mut out = spectrum.scaled(T::of(target) / integral);
    out.normalized = true;
    Ok(out)
}

/// Maps an angular axis to Δ = (ω − ω_ref)/ω_ref in ppm; amplitudes unchanged.
pub fn to_ppm_axis<T: Real>(
    spectrum: &Spectrum<T>,
    settings: &SpectrometerSettings,
) -> Result<Spectrum<T>> {
    if spectrum.axis != Axis::Angular {
        return Err(Error::AxisMismatch(
            Axis::Angular.to_string(),
            spectrum.axis.to_string(),
        ));
    }
    let w_ref = T::of(settings.reference_omega());
    let million = T::of(1e6);
    let mut out = spectrum.clone();
    out.axis = Axis::Ppm;
    for p in &mut out.points {
        *p = (*p - w_ref) / w_ref * million;
    }
    out.validate()?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimilarityReport {
    pub cosine: f64,
    /// log₁₀(1 − cos θ), clamped at −16.
    pub epsilon: f64,
    pub points: usize,
    pub support: (f64, f64),
}

/// Cosine similarity on a uniform grid over the union of both supports.
pub fn cosine_similarity<T: Real>(a: &Spectrum<T>, b: &Spectrum<T>) -> Result<SimilarityReport> {
    cosine_similarity_with(a, b, DEFAULT_RESAMPLE_POINTS)
}

pub fn cosine_similarity_with<T: Real>(
    a: &Spectrum<T>,
    b: &Spectrum<T>,
    points: usize,
) -> Result<SimilarityReport> {
    if a.axis != b.axis {
        return Err(Error::AxisMismatch(a.axis.to_string(), b.axis.to_string()));
    }
    if points < 2 {
        return Err(Error::InvalidInput(
            "resampling needs at least two points".into(),
        ));
    }
    a.validate()?;
    b.validate()?;
    let (a_lo, a_hi) = a.support();
    let (b_lo, b_hi) = b.support();
    let lo = a_lo.min(b_lo);
    let hi = a_hi.max(b_hi);
    // offsets from `lo` keep full precision when the axis sits far from zero
    let grid = uniform(T::zero(), hi - lo, points);
    let resample = |s: &Spectrum<T>| -> Result<Vec<T>> {
        let x: Vec<T> = s.points.iter().map(|&p| p - lo).collect();
        Ok(Pchip::new(&x, &s.amplitudes)?.eval_sorted_or_zero(&grid))
    };
    let (ra, rb) = rayon::join(|| resample(a), || resample(b));
    let (ra, rb) = (ra?, rb?);
    let norm_a = total(ra.iter().map(|v| *v * *v)).sqrt();
    let norm_b = total(rb.iter().map(|v| *v * *v)).sqrt();
    if !(norm_a > T::zero()) || !(norm_b > T::zero()) {
        return Err(Error::ZeroSignal);
    }
    let cosine = total(ra.iter().zip(&rb).map(|(x, y)| *x * *y)) / (norm_a * norm_b);
    // 1 − cos θ = ½‖â − b̂‖², which keeps its precision when cos θ → 1
    let deficit = total(ra.iter().zip(&rb).map(|(x, y)| {
        let d = *x / norm_a - *y / norm_b;
        d * d
    })) * T::of(0.5);
    Ok(SimilarityReport {
        cosine: cosine.as_f64(),
        epsilon: error_metric(deficit.as_f64()),
        points,
        support: (lo.as_f64(), hi.as_f64()),
    })
}

/// log₁₀ of a similarity deficit 1 − cos θ, clamped at −16.
pub fn error_metric(deficit: f64) -> f64 {
    if deficit > 0.0 {
        deficit.log10().max(EPSILON_FLOOR)
    } else {
        EPSILON_FLOOR
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sticks(list: &[(f64, f64)]) -> StickSpectrum<f64> {
        StickSpectrum::new(
            list.iter()
                .map(|&(frequency, weight)| Stick { frequency, weight })
                .collect(),
        )
    }

    #[test]
    fn single_stick_grid_is_symmetric() {
        let s = sticks(&[(1000.0, 2.0)]);
        let grid = equal_area_grid(&s, 3.0, 101).unwrap();
        assert!((grid[50] - 1000.0).abs() < 1e-9);
        for i in 0..50 {
            assert!(
                (grid[i] + grid[100 - i] - 2000.0).abs() < 1e-6 * (grid[100 - i] - 1000.0).max(1.0)
            );
        }
    }

    #[test]
    fn equal_area_increments() {
        let s = sticks(&[(0.0, 1.0), (40.0, 3.0), (41.0, 0.5)]);
        let n = 500;
        let grid = equal_area_grid(&s, 2.0, n).unwrap();
        for w in grid.windows(2) {
            let inc = lorentzian_cdf(&s.sticks, 2.0, w[1]) - lorentzian_cdf(&s.sticks, 2.0, w[0]);
            assert!((inc - 1.0 / n as f64).abs() < 1e-6);
        }
    }

    #[test]
    fn lineshape_values() {
        let s = sticks(&[(10.0, 4.0)]);
        let eta = 0.5;
        let v = sample(&s, eta, &[10.0, 10.5, 9.5]);
        assert!((v[0] - 4.0 / eta).abs() < 1e-12);
        assert!((v[1] - v[0] / 2.0).abs() < 1e-12);
        assert!((v[2] - v[0] / 2.0).abs() < 1e-12);
        assert_eq!(sample(&sticks(&[]), eta, &[1.0, 2.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn windowed_samples_match_direct_sum() {
        let list: Vec<(f64, f64)> = (0..400)
            .map(|k| {
                let k = k as f64;
                (k * 37.0 % 911.0 + 0.01 * k, 1.0 + (k * 0.7).sin() * 0.9)
            })
            .collect();
        let s = sticks(&list);
        let sp = sample_spectrum(&s, 0.4, 5000).unwrap();
        let direct = sample(&s, 0.4, &sp.points);
        for (a, b) in sp.amplitudes.iter().zip(&direct) {
            assert!((a - b).abs() <= 1e-10 * b.abs(), "{a} vs {b}");
        }
        for w in sp.points.windows(2) {
            let inc = lorentzian_cdf(&s.sticks, 0.4, w[1]) - lorentzian_cdf(&s.sticks, 0.4, w[0]);
            assert!((inc - 1.0 / 5000.0).abs() < 1e-9);
        }
    }

    #[test]
    fn normalisation_is_projective() {
        let s = sticks(&[(0.0, 1.0), (30.0, 2.0)]);
        let sp = sample_spectrum(&s, 1.0, 2000).unwrap();
        let a = normalize(&sp, 3.0).unwrap();
        let b = normalize(&sp.scaled(7.0), 3.0).unwrap();
        assert!((a.integral() - 3.0).abs() < 1e-12);
        for (x, y) in a.amplitudes.iter().zip(&b.amplitudes) {
            assert!((x - y).abs() < 1e-12 * x.abs().max(1e-300));
        }
        let again = normalize(&a, 3.0).unwrap();
        assert!((again.integral() - 3.0).abs() < 1e-12);
        // the equal-area grid loses only the outermost 1/n of the mass
        assert!((sp.integral() / analytic_integral(&s) - 1.0).abs() < 0.02);
    }

    #[test]
    fn similarity_examples() {
        let a = sample_spectrum(&sticks(&[(0.0, 1.0), (25.0, 0.4)]), 1.0, 2000).unwrap();
        let same = cosine_similarity(&a, &a).unwrap();
        assert_eq!(same.epsilon, EPSILON_FLOOR);
        let scaled = cosine_similarity(&a, &a.scaled(5.0)).unwrap();
        assert!((scaled.cosine - 1.0).abs() < 1e-12);
        let far = sample_spectrum(&sticks(&[(1e5, 1.0)]), 1.0, 2000).unwrap();
        assert!(cosine_similarity(&a, &far).unwrap().cosine < 1e-3);
    }
}
