//! Symmetry-blind reference routes for small systems.
//!
//! Everything here diagonalises the full product-space Hamiltonian as one
//! dense matrix, ignoring Mz sectors, so it can serve as an independent check
//! on the block engine. Instantiated with the double-double `TwoFloat`
//! scalar it resolves in-sector splittings far below f64 resolution of the
//! laboratory-frame Zeeman diagonal. The time-domain correlation C₊₊(t) and its
//! half-sided Fourier transform reproduce the frequency-domain spectral
//! function from the pulse-acquire signal.

use num_complex::Complex;
use rayon::prelude::*;

use crate::engine::{coalesce, drop_below_floor, Stick, StickOptions, StickSpectrum};
use crate::error::{Error, Result};
use crate::num::{total, Real};
use crate::operator::{Hamiltonian, LadderOperator, SparseOperator};

/// Default dimension cap for the dense reference routes.
pub const DEFAULT_ORACLE_CAP: usize = 1 << 10;

struct DenseEigen<T> {
    energies: Vec<T>,
    /// Row-major eigenvector matrix; column k is the k-th eigenvector.
    vectors: Vec<Vec<T>>,
}

/// Cyclic Jacobi eigensolver for a dense real symmetric matrix.
///
/// Each rotation only combines two rows and columns, so the tiny in-sector
/// couplings of a Zeeman-dominated Hamiltonian are never swamped by the
/// large diagonal. Eigenvalues are returned unsorted.
pub fn jacobi_eigen<T: Real>(mut a: Vec<Vec<T>>) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    let n = a.len();
    if a.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidInput("matrix must be square".into()));
    }
    let mut v = vec![vec![T::zero(); n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = T::one();
    }
    const MAX_SWEEPS: usize = 100;
    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        for i in 0..n {
            for j in 0..i {
                off = off.max(a[i][j].abs());
            }
        }
        if off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq == T::zero() {
                    continue;
                }
                let app = a[p][p];
                let aqq = a[q][q];
                // skip rotations below the resolution of both diagonal entries
                let tiny = T::resolution() * T::of(1e-3);
                if apq.abs() <= tiny * app.abs().min(aqq.abs()) {
                    a[p][q] = T::zero();
                    a[q][p] = T::zero();
                    continue;
                }
                let theta = (aqq - app) / (apq + apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let t = if theta == T::zero() { T::one() } else { t };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                a[p][p] = app - t * apq;
                a[q][q] = aqq + t * apq;
                a[p][q] = T::zero();
                a[q][p] = T::zero();
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let residual = (0..n)
        .flat_map(|i| (0..i).map(move |j| (i, j)))
        .fold(T::zero(), |acc, (i, j)| acc.max(a[i][j].abs()));
    if residual != T::zero() {
        return Err(Error::Eigensolver(n));
    }
    Ok(((0..n).map(|i| a[i][i]).collect(), v))
}

fn dense_eigen<T: Real>(h: &Hamiltonian<T>, cap: usize) -> Result<DenseEigen<T>> {
    let dim = h.basis().dim();
    if dim > cap {
        return Err(Error::DimensionCap {
            dimension: dim,
            cap,
        });
    }
    let (energies, vectors) = jacobi_eigen(h.lab_matrix().to_dense())?;
    Ok(DenseEigen { energies, vectors })
}

/// Vᵀ·op·V.
fn amplitudes<T: Real>(eig: &DenseEigen<T>, op: &SparseOperator<T>) -> Vec<Vec<T>> {
    let dim = eig.energies.len();
    let v = &eig.vectors;
    let mut op_v = vec![vec![T::zero(); dim]; dim];
    for (r, c, val) in op.triplets() {
        for k in 0..dim {
            op_v[r][k] += val * v[c][k];
        }
    }
    let mut out = vec![vec![T::zero(); dim]; dim];
    for m in 0..dim {
        for n in 0..dim {
            out[m][n] = total((0..dim).map(|r| v[r][m] * op_v[r][n]));
        }
    }
    out
}

/// Every (n, m) transition of the full dense eigenbasis with weight
/// ⟨E_n|L⁻|E_m⟩⟨E_m|R⁺|E_n⟩ · 2/D, at frequency E_n − E_m.
fn all_transitions<T: Real>(
    eig: &DenseEigen<T>,
    left: &LadderOperator<T>,
    right: &LadderOperator<T>,
    scale: T,
) -> Vec<Stick<T>> {
    let a_right = amplitudes(eig, right.raising());
    let a_left = if std::ptr::eq(left, right) {
        a_right.clone()
    } else {
        amplitudes(eig, left.raising())
    };
    let dim = eig.energies.len();
    let mut out = Vec::new();
    for n in 0..dim {
        for m in 0..dim {
            let w = a_left[m][n] * a_right[m][n];
            if w != T::zero() {
                out.push(Stick {
                    frequency: eig.energies[n] - eig.energies[m],
                    weight: w * scale,
                });
            }
        }
    }
    out
}

/// Stick spectrum from one dense diagonalisation of the whole Hamiltonian.
pub fn dense_stick_spectrum<T: Real>(
    h: &Hamiltonian<T>,
    left: &LadderOperator<T>,
    right: &LadderOperator<T>,
    options: &StickOptions,
    cap: usize,
) -> Result<StickSpectrum<T>> {
    let eig = dense_eigen(h, cap)?;
    let scale = T::of(options.trace_scale.unwrap_or(2.0 / h.basis().dim() as f64));
    let sticks = all_transitions(&eig, left, right, scale);
    let sticks = drop_below_floor(
        coalesce(sticks, T::of(options.merge_tolerance)),
        T::of(options.relative_floor),
    );
    Ok(StickSpectrum::new(sticks))
}

/// Samples of C₊₊(t) = Tr[M⁻ e^{−iHt} M⁺ e^{iHt}] · 2/D, demodulated by
/// e^{−i·frame·t}.
#[derive(Debug, Clone)]
pub struct CorrelationSeries<T> {
    pub times: Vec<T>,
    pub values: Vec<Complex<T>>,
    /// Demodulation frequency (rad·s⁻¹) removed from the samples.
    pub frame: T,
    /// Largest |E_n − E_m − frame| over transitions carrying weight.
    pub bandwidth: T,
}

/// Evaluates the correlation function through a full dense eigendecomposition.
pub fn correlation_time_domain<T: Real>(
    h: &Hamiltonian<T>,
    ladder: &LadderOperator<T>,
    times: &[T],
    frame: T,
    cap: usize,
) -> Result<CorrelationSeries<T>> {
    let eig = dense_eigen(h, cap)?;
    let scale = T::of(2.0 / h.basis().dim() as f64);
    let transitions = all_transitions(&eig, ladder, ladder, scale);
    // numerically-zero pairs between non-adjacent sectors carry no signal
    let floor =
        total(transitions.iter().map(|s| s.weight.abs())) * T::of(StickOptions::DEFAULT_FLOOR);
    let offsets: Vec<(T, T)> = transitions
        .into_iter()
        .filter(|s| s.weight.abs() > floor)
        .map(|s| (s.frequency - frame, s.weight))
        .collect();
    let bandwidth = offsets
        .iter()
        .fold(T::zero(), |acc, &(off, _)| acc.max(off.abs()));
    let values = times
        .par_iter()
        .map(|&t| {
            offsets
                .iter()
                .fold(Complex::new(T::zero(), T::zero()), |acc, &(off, w)| {
                    let phase = off * t;
                    acc + Complex::new(phase.cos(), phase.sin()) * w
                })
        })
        .collect();
    Ok(CorrelationSeries {
        times: times.to_vec(),
        values,
        frame,
        bandwidth,
    })
}

/// Minimum samples per period of the fastest component.
pub const MIN_OVERSAMPLING: f64 = 8.0;
/// Minimum record length in units of 1/η.
pub const MIN_DECAY_SPAN: f64 = 10.0;

/// Re ∫₀^∞ C₊₊(t) e^{−iωt} e^{−ηt} dt on `grid` (absolute rad·s⁻¹).
///
/// The integral is truncated at the last sample and evaluated with the
/// fourth-order endpoint-corrected trapezoid rule.
pub fn half_sided_transform<T: Real>(
    series: &CorrelationSeries<T>,
    eta: T,
    grid: &[T],
) -> Result<Vec<T>> {
    let n = series.times.len();
    if n < 8 || series.values.len() != n {
        return Err(Error::UnderResolved(format!(
            "need at least 8 samples, got {n}"
        )));
    }
    if series.times[0] != T::zero() {
        return Err(Error::InvalidInput("time grid must start at t = 0".into()));
    }
    let dt = series.times[1] - series.times[0];
    let uniform = series
        .times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - dt).abs() <= T::of(1e-9) * dt);
    if !uniform || dt <= T::zero() {
        return Err(Error::InvalidInput(
            "time grid must be uniform and increasing".into(),
        ));
    }
    let two_pi = T::PI() + T::PI();
    if series.bandwidth * dt * T::of(MIN_OVERSAMPLING) > two_pi {
        return Err(Error::UnderResolved(format!(
            "dt = {} resolves only {:.2} samples per period of the fastest component",
            dt,
            (two_pi / (series.bandwidth * dt)).as_f64()
        )));
    }
    // the kernel e^{−i(ω−frame)t} aliases just like the signal does
    let reach = grid.iter().fold(series.bandwidth, |acc, &w| {
        acc.max((w - series.frame).abs())
    });
    if reach * dt * T::of(MIN_OVERSAMPLING) > two_pi {
        return Err(Error::UnderResolved(format!(
            "dt = {} resolves only {:.2} samples per period at the grid edge",
            dt,
            (two_pi / (reach * dt)).as_f64()
        )));
    }
    let span = series.times[n - 1];
    if span * eta < T::of(MIN_DECAY_SPAN) {
        return Err(Error::UnderResolved(format!(
            "record length {span} shorter than {MIN_DECAY_SPAN}/eta"
        )));
    }

    let end_weights = [T::of(3.0 / 8.0), T::of(7.0 / 6.0), T::of(23.0 / 24.0)];
    let weight = |k: usize| -> T {
        if k < 3 {
            end_weights[k]
        } else if k >= n - 3 {
            end_weights[n - 1 - k]
        } else {
            T::one()
        }
    };
    let weighted: Vec<Complex<T>> = series
        .values
        .iter()
        .enumerate()
        .map(|(k, &v)| v * (weight(k) * dt))
        .collect();

    const RESYNC: usize = 256;
    Ok(grid
        .par_iter()
        .map(|&omega| {
            let offset = omega - series.frame;
            let step = phasor(offset, eta, dt);
            let mut acc = T::zero();
            let mut rot = Complex::new(T::one(), T::zero());
            for (k, v) in weighted.iter().enumerate() {
                if k % RESYNC == 0 {
                    rot = phasor(offset, eta, series.times[k]);
                }
                acc += (v * rot).re;
                rot *= step;
            }
            acc
        })
        .collect())
}

fn phasor<T: Real>(offset: T, eta: T, t: T) -> Complex<T> {
    let decay = (-eta * t).exp();
    let phase = -offset * t;
    Complex::new(phase.cos() * decay, phase.sin() * decay)
}

/// Uniform time grid with `oversampling` samples per period of
/// `bandwidth` and a span of `decays / eta`.
pub fn uniform_times<T: Real>(bandwidth: T, eta: T, oversampling: f64, decays: f64) -> Vec<T> {
    let two_pi = T::PI() + T::PI();
    let span = T::of(decays) / eta;
    let dt_nyquist = if bandwidth > T::zero() {
        two_pi / (bandwidth * T::of(oversampling))
    } else {
        span
    };
    let steps = (span / dt_nyquist).ceil().to_usize().unwrap_or(0).max(8);
    let dt = span / T::of(steps as f64);
    (0..=steps).map(|k| dt * T::of(k as f64)).collect()
}
