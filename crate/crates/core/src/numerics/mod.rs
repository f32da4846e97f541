//! Dense-math substrate shared by every other module.
//!
//! Storage is `f32`; all dot products and reductions accumulate in `f64`.

mod rng;

pub use rng::RngStream;

use num_traits::Float;

use crate::error::{Error, Result};

/// Norms at or below this are treated as zero.
pub const NORM_EPS: f64 = 1e-12;

/// Row-major `f32` matrix whose entries are always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f32>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f32>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Self::from_vec(rows.len(), cols, rows.concat())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f32]> {
        self.data.chunks_exact(self.cols.max(1)).take(self.rows)
    }

    /// Rescales every row to unit norm.
    pub fn normalize_rows(&mut self) -> Result<()> {
        let cols = self.cols;
        for row in self.data.chunks_exact_mut(cols) {
            let unit = l2_normalize(row)?;
            row.copy_from_slice(&unit);
        }
        Ok(())
    }
}

pub fn dot<T: Float>(a: &[T], b: &[T]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| x.to_f64().unwrap() * y.to_f64().unwrap())
        .sum()
}

pub fn norm<T: Float>(v: &[T]) -> f64 {
    dot(v, v).sqrt()
}

pub fn l2_normalize<T: Float>(v: &[T]) -> Result<Vec<T>> {
    let n = norm(v);
    if !(n > NORM_EPS) {
        return Err(Error::ZeroVector { norm: n });
    }
    Ok(v.iter()
        .map(|x| T::from(x.to_f64().unwrap() / n).unwrap())
        .collect())
}

/// Cosine similarity clamped to `[-1, 1]`.
pub fn cosine_sim<T: Float>(a: &[T], b: &[T]) -> Result<f64> {
    let (na, nb) = (norm(a), norm(b));
    for n in [na, nb] {
        if !(n > NORM_EPS) {
            return Err(Error::ZeroVector { norm: n });
        }
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

pub fn squared_distance<T: Float>(a: &[T], b: &[T]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x.to_f64().unwrap() - y.to_f64().unwrap();
            d * d
        })
        .sum()
}

/// Temperature-scaled softmax with max subtraction.
pub fn softmax(logits: &[f64], tau: f64) -> Result<Vec<f64>> {
    if !(tau > 0.0) {
        return Err(Error::InvalidTemperature(tau));
    }
    if let Some(pos) = logits.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(pos));
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|&l| ((l - max) / tau).exp()).collect();
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|p| *p /= total);
    Ok(out)
}

/// `log(sum(exp(xs)))` without overflow.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|&x| (x - max).exp()).sum::<f64>().ln()
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(x))`, stable for large `|x|`.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Index of the largest entry; the lowest index wins ties.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}
