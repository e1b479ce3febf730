//! Independent reference implementations used by the integration tests.
//! Nothing here calls into the library's numerical routines.

#![allow(dead_code)]

use num_complex::Complex;
use pmlpos::channel::Observation;
use pmlpos::scalar::{CMatrix, CVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type C = Complex<f64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> C {
    // Box-Muller, unit total power.
    let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.random();
    let r = (-u1.ln()).sqrt();
    let ph = std::f64::consts::TAU * u2;
    C::new(r * ph.cos(), r * ph.sin())
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix<f64> {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> CVector<f64> {
    CVector::from_fn(n, |_, _| gaussian(rng))
}

pub fn random_observation(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Observation<f64> {
    let symbols = CVector::from_fn(n, |_, _| C::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)));
    Observation::new(random_matrix(rng, m, n), symbols, 0.0, 0).unwrap()
}

/// `exp(j·k·π·sin θ)` for a half-wavelength array.
pub fn steering_oracle(sine: f64, len: usize) -> Vec<C> {
    (0..len).map(|k| C::from_polar(1.0, k as f64 * std::f64::consts::PI * sine)).collect()
}

/// `Σ_n ‖y_n − γ·x·c_n‖²`, evaluated term by term.
pub fn fit_cost(obs: &Observation<f64>, x: &[C], gamma: C) -> f64 {
    let mut total = 0.0;
    for n in 0..obs.snapshots() {
        for (i, xi) in x.iter().enumerate() {
            total += (obs.samples[(i, n)] - gamma * xi * obs.symbols[n]).norm_sqr();
        }
    }
    total
}

fn golden_min(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..90 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = (a + b) / 2.0;
    (x, f(x))
}

/// `min_γ Σ_n ‖y_n − γ·x·c_n‖²` by nested golden-section search over the real
/// and imaginary parts of `γ`. Returns `(γ, cost)`.
pub fn brute_force_fit(obs: &Observation<f64>, x: &[C]) -> (C, f64) {
    let e: f64 = obs.samples.iter().map(|z| z.norm_sqr()).sum();
    let k: f64 = x.iter().map(|z| z.norm_sqr()).sum::<f64>() * obs.symbols.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let bound = 2.0 * (e / k).sqrt() + 1e-12;
    let inner = |re: f64| golden_min(-bound, bound, |im| fit_cost(obs, x, C::new(re, im)));
    let (re, cost) = golden_min(-bound, bound, |re| inner(re).1);
    (C::new(re, inner(re).0), cost)
}

/// Forward-smoothed covariance by explicit loops.
pub fn forward_oracle(y: &CMatrix<f64>, p: usize) -> Vec<Vec<C>> {
    let (m, n) = (y.nrows(), y.ncols());
    let l = m - p + 1;
    let mut r = vec![vec![C::new(0.0, 0.0); p]; p];
    for s in 0..l {
        for t in 0..n {
            for i in 0..p {
                for j in 0..p {
                    r[i][j] += y[(s + i, t)] * y[(s + j, t)].conj();
                }
            }
        }
    }
    let scale = 1.0 / (l * n) as f64;
    r.iter_mut().flatten().for_each(|z| *z *= scale);
    r
}

/// `(R + J·conj(R)·J) / 2`.
pub fn fb_oracle(r: &[Vec<C>]) -> Vec<Vec<C>> {
    let p = r.len();
    (0..p)
        .map(|i| (0..p).map(|j| (r[i][j] + r[p - 1 - i][p - 1 - j].conj()) * 0.5).collect())
        .collect()
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn invert(a: &[Vec<C>]) -> Vec<Vec<C>> {
    let n = a.len();
    let mut m: Vec<Vec<C>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| C::new(if i == j { 1.0 } else { 0.0 }, 0.0)));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| m[x][col].norm().partial_cmp(&m[y][col].norm()).unwrap()).unwrap();
        m.swap(col, piv);
        let d = m[col][col];
        m[col].iter_mut().for_each(|z| *z /= d);
        for row in 0..n {
            if row != col {
                let f = m[row][col];
                if f != C::new(0.0, 0.0) {
                    let pivot_row = m[col].clone();
                    m[row].iter_mut().zip(&pivot_row).for_each(|(z, p)| *z -= f * p);
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// MVDR weights with loading `loading·tr(R)/P`.
pub fn capon_oracle(r: &[Vec<C>], a: &[C], loading: f64) -> Vec<C> {
    let p = r.len();
    let tr: f64 = (0..p).map(|i| r[i][i].re).sum();
    let eps = loading * tr / p as f64;
    let mut loaded = r.to_vec();
    for (i, row) in loaded.iter_mut().enumerate() {
        row[i] += eps;
    }
    let inv = invert(&loaded);
    let v: Vec<C> = inv.iter().map(|row| row.iter().zip(a).map(|(x, y)| x * y).sum()).collect();
    let denom: C = a.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
    v.iter().map(|z| z / denom).collect()
}

pub fn to_rows(m: &CMatrix<f64>) -> Vec<Vec<C>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

pub fn max_abs_diff(a: &[Vec<C>], b: &CMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, row) in a.iter().enumerate() {
        for (j, z) in row.iter().enumerate() {
            worst = worst.max((z - b[(i, j)]).norm());
        }
    }
    worst
}

/// Noiseless coherent block: one symbol stream through `Σ g_s·a(u_s)`, plus
/// white noise of power `noise` per element.
pub fn coherent_observation(
    rng: &mut ChaCha8Rng,
    m: usize,
    n: usize,
    sines: &[f64],
    gains: &[C],
    noise: f64,
) -> Observation<f64> {
    let mut x = vec![C::new(0.0, 0.0); m];
    for (&u, &g) in sines.iter().zip(gains) {
        for (xi, a) in x.iter_mut().zip(steering_oracle(u, m)) {
            *xi += g * a;
        }
    }
    let symbols = CVector::from_fn(n, |_, _| C::from_polar(1.0, std::f64::consts::FRAC_PI_2 * rng.random_range(0..4) as f64 + std::f64::consts::FRAC_PI_4));
    let samples = CMatrix::from_fn(m, n, |i, j| x[i] * symbols[j] + gaussian(rng) * noise.sqrt());
    Observation::new(samples, symbols, 0.0, 0).unwrap()
}
