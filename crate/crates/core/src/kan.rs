//! Fourier Kolmogorov–Arnold layer: every input-output edge carries a
//! truncated Fourier series
//!
//! `y[o] = bias[o] + Σ_i Σ_{k=1..G} a[o][i][k]·cos(k·x[i]) + b[o][i][k]·sin(k·x[i])`
//!
//! with analytic gradients, a finite-difference checker and a toy
//! mask-scoring head.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const DEFAULT_GRID_SIZE: usize = 5;
pub const FD_STEP: f64 = 1e-5;
pub const GRADIENT_TOLERANCE: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq)]
pub struct FourierKanLayer<T = f64> {
    in_dim: usize,
    out_dim: usize,
    grid: usize,
    /// Row-major (o, i, k); position k holds frequency k + 1.
    a: Vec<T>,
    b: Vec<T>,
    bias: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerGradients<T = f64> {
    pub a: Vec<T>,
    pub b: Vec<T>,
    pub bias: Vec<T>,
    pub x: Vec<T>,
}

fn dims_mismatch(expected: usize, found: usize) -> Error {
    Error::DimensionMismatch { expected, found }
}

impl<T: Real> FourierKanLayer<T> {
    pub fn new(in_dim: usize, out_dim: usize, grid: usize, a: Vec<T>, b: Vec<T>, bias: Vec<T>) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 || grid == 0 {
            return Err(Error::param(
                "layer shape",
                format!("dimensions must be positive, got ({in_dim}, {out_dim}, {grid})"),
            ));
        }
        let n = out_dim * in_dim * grid;
        for (v, expected) in [(&a, n), (&b, n), (&bias, out_dim)] {
            if v.len() != expected {
                return Err(dims_mismatch(expected, v.len()));
            }
        }
        if a.iter().chain(&b).chain(&bias).any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite layer coefficient".into()));
        }
        Ok(Self {
            in_dim,
            out_dim,
            grid,
            a,
            b,
            bias,
        })
    }

    pub fn zeros(in_dim: usize, out_dim: usize, grid: usize) -> Result<Self> {
        let n = in_dim * out_dim * grid;
        Self::new(
            in_dim,
            out_dim,
            grid,
            vec![T::zero(); n],
            vec![T::zero(); n],
            vec![T::zero(); out_dim],
        )
    }

    /// Coefficients and bias uniform in ±1/(in_dim·√G).
    pub fn random(in_dim: usize, out_dim: usize, grid: usize, seed: u64) -> Result<Self> {
        let mut layer = Self::zeros(in_dim, out_dim, grid)?;
        let bound = 1.0 / (in_dim as f64 * (grid as f64).sqrt());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in layer
            .a
            .iter_mut()
            .chain(layer.b.iter_mut())
            .chain(layer.bias.iter_mut())
        {
            *v = T::lit(rng.gen_range(-bound..=bound));
        }
        Ok(layer)
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn a(&self) -> &[T] {
        &self.a
    }

    pub fn b(&self) -> &[T] {
        &self.b
    }

    pub fn bias(&self) -> &[T] {
        &self.bias
    }

    pub fn a_mut(&mut self) -> &mut [T] {
        &mut self.a
    }

    pub fn b_mut(&mut self) -> &mut [T] {
        &mut self.b
    }

    pub fn bias_mut(&mut self) -> &mut [T] {
        &mut self.bias
    }

    /// Flat position of coefficient (o, i, k) with k in `0..grid`.
    pub fn index(&self, o: usize, i: usize, k: usize) -> usize {
        (o * self.in_dim + i) * self.grid + k
    }

    fn check_input(&self, x: &[T]) -> Result<()> {
        if x.len() != self.in_dim {
            return Err(dims_mismatch(self.in_dim, x.len()));
        }
        Ok(())
    }

    /// cos(k·x_i), sin(k·x_i) for k = 1..G, laid out (i, k).
    fn basis(&self, x: &[T]) -> (Vec<T>, Vec<T>) {
        let mut c = Vec::with_capacity(self.in_dim * self.grid);
        let mut s = Vec::with_capacity(self.in_dim * self.grid);
        for &xi in x {
            for k in 1..=self.grid {
                let (sk, ck) = (T::from_usize_lossy(k) * xi).sin_cos();
                c.push(ck);
                s.push(sk);
            }
        }
        (c, s)
    }

    pub fn forward(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_input(x)?;
        let (c, s) = self.basis(x);
        let per_out = self.in_dim * self.grid;
        Ok((0..self.out_dim)
            .map(|o| {
                let row = o * per_out..(o + 1) * per_out;
                let mut y = self.bias[o];
                for ((&a, &b), (&ck, &sk)) in self.a[row.clone()].iter().zip(&self.b[row]).zip(c.iter().zip(&s)) {
                    y += a * ck + b * sk;
                }
                y
            })
            .collect())
    }

    /// Gradients of `upstream · forward(x)`.
    pub fn backward(&self, x: &[T], upstream: &[T]) -> Result<LayerGradients<T>> {
        self.check_input(x)?;
        if upstream.len() != self.out_dim {
            return Err(dims_mismatch(self.out_dim, upstream.len()));
        }
        let (c, s) = self.basis(x);
        let n = self.a.len();
        let mut ga = vec![T::zero(); n];
        let mut gb = vec![T::zero(); n];
        let mut gx = vec![T::zero(); self.in_dim];
        for (o, &g) in upstream.iter().enumerate() {
            for i in 0..self.in_dim {
                for k in 0..self.grid {
                    let q = self.index(o, i, k);
                    let basis = i * self.grid + k;
                    ga[q] = g * c[basis];
                    gb[q] = g * s[basis];
                    let freq = T::from_usize_lossy(k + 1);
                    gx[i] += g * freq * (self.b[q] * c[basis] - self.a[q] * s[basis]);
                }
            }
        }
        Ok(LayerGradients {
            a: ga,
            b: gb,
            bias: upstream.to_vec(),
            x: gx,
        })
    }

    /// Coefficient-wise sum of two layers of the same shape.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if (self.in_dim, self.out_dim, self.grid) != (other.in_dim, other.out_dim, other.grid) {
            return Err(dims_mismatch(self.a.len(), other.a.len()));
        }
        let sum = |p: &[T], q: &[T]| p.iter().zip(q).map(|(&u, &v)| u + v).collect();
        Self::new(
            self.in_dim,
            self.out_dim,
            self.grid,
            sum(&self.a, &other.a),
            sum(&self.b, &other.b),
            sum(&self.bias, &other.bias),
        )
    }

    /// Header of three little-endian u32 (in, out, G), then a, b and bias
    /// as little-endian f64.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + 8 * (2 * self.a.len() + self.bias.len()));
        for d in [self.in_dim, self.out_dim, self.grid] {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for v in self.a.iter().chain(&self.b).chain(&self.bias) {
            out.extend_from_slice(&v.to_f64().unwrap_or(f64::NAN).to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let short = || Error::InvalidData("truncated layer file".into());
        let header = bytes.get(..12).ok_or_else(short)?;
        let dim = |k: usize| u32::from_le_bytes(header[4 * k..4 * k + 4].try_into().expect("4 bytes")) as usize;
        let (in_dim, out_dim, grid) = (dim(0), dim(1), dim(2));
        let n = in_dim
            .checked_mul(out_dim)
            .and_then(|v| v.checked_mul(grid))
            .ok_or_else(|| Error::InvalidData("layer dimensions overflow".into()))?;
        let total = 2 * n + out_dim;
        let body = &bytes[12..];
        if body.len() != total * 8 {
            return Err(Error::InvalidData(format!(
                "layer file holds {} bytes of coefficients, expected {}",
                body.len(),
                total * 8
            )));
        }
        let values: Vec<T> = body
            .chunks_exact(8)
            .map(|c| T::lit(f64::from_le_bytes(c.try_into().expect("8 bytes"))))
            .collect();
        Self::new(
            in_dim,
            out_dim,
            grid,
            values[..n].to_vec(),
            values[n..2 * n].to_vec(),
            values[2 * n..].to_vec(),
        )
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_bytes(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KanStack<T = f64> {
    layers: Vec<FourierKanLayer<T>>,
}

impl<T: Real> KanStack<T> {
    pub fn new(layers: Vec<FourierKanLayer<T>>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Empty("layer stack"));
        }
        for w in layers.windows(2) {
            if w[0].out_dim != w[1].in_dim {
                return Err(dims_mismatch(w[0].out_dim, w[1].in_dim));
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[FourierKanLayer<T>] {
        &self.layers
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim
    }

    pub fn forward(&self, x: &[T]) -> Result<Vec<T>> {
        self.layers.iter().try_fold(x.to_vec(), |h, l| l.forward(&h))
    }

    /// Per-layer gradients of `upstream · forward(x)` and the gradient with
    /// respect to the stack input.
    pub fn backward(&self, x: &[T], upstream: &[T]) -> Result<(Vec<LayerGradients<T>>, Vec<T>)> {
        let mut inputs = vec![x.to_vec()];
        for l in &self.layers {
            let next = l.forward(inputs.last().expect("nonempty"))?;
            inputs.push(next);
        }
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut g = upstream.to_vec();
        for (l, input) in self.layers.iter().zip(&inputs).rev() {
            let lg = l.backward(input, &g)?;
            g = lg.x.clone();
            grads.push(lg);
        }
        grads.reverse();
        Ok((grads, g))
    }
}

/// `score[q][s] = queries[q] · stack(features[s])`.
pub fn mask_scores<T: Real>(features: &[Vec<T>], queries: &[Vec<T>], stack: &KanStack<T>) -> Result<Vec<Vec<T>>> {
    let embedded: Vec<Vec<T>> = features.par_iter().map(|f| stack.forward(f)).collect::<Result<_>>()?;
    let d = stack.out_dim();
    if let Some(q) = queries.iter().find(|q| q.len() != d) {
        return Err(dims_mismatch(d, q.len()));
    }
    Ok(queries
        .par_iter()
        .map(|q| {
            embedded
                .iter()
                .map(|m| q.iter().zip(m).map(|(&u, &v)| u * v).sum())
                .collect()
        })
        .collect())
}

/// |analytic − numeric| / max(|analytic|, |numeric|, 1e-3).
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-3)
}

fn loss(layer: &FourierKanLayer<f64>, x: &[f64], upstream: &[f64]) -> Result<f64> {
    Ok(layer.forward(x)?.iter().zip(upstream).map(|(y, g)| y * g).sum())
}

/// Largest relative error between analytic gradients and central
/// differences with step `h`, over every coefficient, bias and input.
pub fn gradient_check(layer: &FourierKanLayer<f64>, x: &[f64], upstream: &[f64], h: f64) -> Result<f64> {
    let grads = layer.backward(x, upstream)?;
    let mut worst: f64 = 0.0;
    let mut probe = layer.clone();
    type Field = fn(&mut FourierKanLayer<f64>) -> &mut [f64];
    let fields: [(Field, &[f64]); 3] = [
        (FourierKanLayer::a_mut, &grads.a),
        (FourierKanLayer::b_mut, &grads.b),
        (FourierKanLayer::bias_mut, &grads.bias),
    ];
    for (field, analytic) in fields {
        for (j, &g) in analytic.iter().enumerate() {
            let orig = field(&mut probe)[j];
            field(&mut probe)[j] = orig + h;
            let plus = loss(&probe, x, upstream)?;
            field(&mut probe)[j] = orig - h;
            let minus = loss(&probe, x, upstream)?;
            field(&mut probe)[j] = orig;
            worst = worst.max(relative_error(g, (plus - minus) / (2.0 * h)));
        }
    }
    let mut xp = x.to_vec();
    for (i, &g) in grads.x.iter().enumerate() {
        xp[i] = x[i] + h;
        let plus = loss(layer, &xp, upstream)?;
        xp[i] = x[i] - h;
        let minus = loss(layer, &xp, upstream)?;
        xp[i] = x[i];
        worst = worst.max(relative_error(g, (plus - minus) / (2.0 * h)));
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradCheckReport {
    pub draws: usize,
    pub max_relative_error: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_relative_error < GRADIENT_TOLERANCE
    }
}

/// Random layers (in 1..=6, out 1..=5, G 1..=7), inputs in [−π, π] and
/// standard-normal-ish upstream vectors, one draw per derived seed.
pub fn gradient_check_suite(draws: usize, seed: u64) -> Result<GradCheckReport> {
    let worst = (0..draws)
        .into_par_iter()
        .map(|d| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(d as u64));
            let (i, o, g) = (rng.gen_range(1..=6), rng.gen_range(1..=5), rng.gen_range(1..=7));
            let layer = FourierKanLayer::random(i, o, g, rng.gen())?;
            let x: Vec<f64> = (0..i)
                .map(|_| rng.gen_range(-std::f64::consts::PI..=std::f64::consts::PI))
                .collect();
            let up: Vec<f64> = (0..o).map(|_| rng.gen_range(-2.0..=2.0)).collect();
            gradient_check(&layer, &x, &up, FD_STEP)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(GradCheckReport {
        draws,
        max_relative_error: worst,
    })
}
