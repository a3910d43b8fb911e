//! Monotone piecewise-cubic Hermite interpolation (Fritsch–Carlson slopes,
//! with the same endpoint rule as SciPy's `PchipInterpolator`).

use crate::error::{Error, Result};
use crate::num::Real;

#[derive(Debug, Clone)]
pub struct Pchip<T> {
    x: Vec<T>,
    y: Vec<T>,
    d: Vec<T>,
}

fn same_sign<T: Real>(a: T, b: T) -> bool {
    (a > T::zero() && b > T::zero()) || (a < T::zero() && b < T::zero())
}

fn edge_slope<T: Real>(h0: T, h1: T, m0: T, m1: T) -> T {
    let two = T::of(2.0);
    let three = T::of(3.0);
    let d = ((two * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if !same_sign(d, m0) {
        T::zero()
    } else if !same_sign(m0, m1) && d.abs() > three * m0.abs() {
        three * m0
    } else {
        d
    }
}

impl<T: Real> Pchip<T> {
    /// `x` must be strictly increasing with at least two points.
    pub fn new(x: &[T], y: &[T]) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::InvalidInput(
                "interpolation needs >= 2 matching points".into(),
            ));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "interpolation nodes must increase strictly".into(),
            ));
        }
        let h: Vec<T> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let m: Vec<T> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut d = vec![T::zero(); n];
        if n == 2 {
            d[0] = m[0];
            d[1] = m[0];
        } else {
            let two = T::of(2.0);
            for k in 1..n - 1 {
                if same_sign(m[k - 1], m[k]) {
                    let w1 = two * h[k] + h[k - 1];
                    let w2 = h[k] + two * h[k - 1];
                    d[k] = (w1 + w2) / (w1 / m[k - 1] + w2 / m[k]);
                }
            }
            d[0] = edge_slope(h[0], h[1], m[0], m[1]);
            d[n - 1] = edge_slope(h[n - 2], h[n - 3], m[n - 2], m[n - 3]);
        }
        Ok(Self {
            x: x.to_vec(),
            y: y.to_vec(),
            d,
        })
    }

    pub fn domain(&self) -> (T, T) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    fn eval_in(&self, k: usize, t: T) -> T {
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let (two, three) = (T::of(2.0), T::of(3.0));
        let h00 = two * s3 - three * s2 + T::one();
        let h10 = s3 - two * s2 + s;
        let h01 = three * s2 - two * s3;
        let h11 = s3 - s2;
        h00 * self.y[k] + h10 * h * self.d[k] + h01 * self.y[k + 1] + h11 * h * self.d[k + 1]
    }

    /// Value at `t`, or `None` outside the node range.
    pub fn eval(&self, t: T) -> Option<T> {
        let (lo, hi) = self.domain();
        if t < lo || t > hi {
            return None;
        }
        let k = self
            .x
            .partition_point(|&v| v <= t)
            .clamp(1, self.x.len() - 1)
            - 1;
        Some(self.eval_in(k, t))
    }

    /// Values at ascending `ts`, zero outside the node range; a single sweep.
    pub fn eval_sorted_or_zero(&self, ts: &[T]) -> Vec<T> {
        let (lo, hi) = self.domain();
        let last = self.x.len() - 2;
        let mut k = 0;
        ts.iter()
            .map(|&t| {
                if t < lo || t > hi {
                    return T::zero();
                }
                while k < last && self.x[k + 1] <= t {
                    k += 1;
                }
                self.eval_in(k, t)
            })
            .collect()
    }
}
