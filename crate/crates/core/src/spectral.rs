//! Coherent-multipath decorrelation and per-observation AOA/amplitude
//! estimation.
//!
//! The full `M`-element array is split into `S = M − P + 1` overlapped
//! subarrays of length `P`. Their sample covariances are averaged (forward
//! smoothing) and optionally combined with the conjugate-flipped copy
//! (forward-backward smoothing), which restores the rank lost to coherent
//! paths. Directions come from the MUSIC pseudospectrum of the smoothed matrix
//! and amplitudes from a Capon beamformer steered at each direction, both on
//! the first (reference) subarray.

use std::io::Write;

use nalgebra::{Cholesky, SymmetricEigen};
use num_complex::Complex;

use crate::channel::Observation;
use crate::error::{Error, Result};
use crate::geometry::{steering_from_sine, ArrayConfig, LocalAoa};
use crate::scalar::{creal, czero, dotc, frobenius_sqr, CMatrix, CVector, Real};

/// Default number of pseudospectrum samples.
pub const DEFAULT_GRID_POINTS: usize = 2048;

/// Default diagonal loading, relative to `trace(R)/P`.
pub const DEFAULT_LOADING: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovarianceKind {
    ForwardOnly,
    ForwardBackward,
}

/// `P × P` spatially smoothed sample covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedCovariance<T> {
    matrix: CMatrix<T>,
    kind: CovarianceKind,
}

impl<T: Real> SmoothedCovariance<T> {
    /// Wraps an arbitrary matrix, e.g. an analytic model covariance.
    pub fn from_matrix(matrix: CMatrix<T>, kind: CovarianceKind) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::Dimension("covariance must be square and non-empty".into()));
        }
        Ok(Self { matrix, kind })
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn kind(&self) -> CovarianceKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Eigenvalues sorted in descending order.
    pub fn eigenvalues(&self) -> Vec<T> {
        let mut ev: Vec<T> = SymmetricEigen::new(self.matrix.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
        ev
    }
}

/// `‖R − R^H‖_F`.
pub fn hermitian_residual<T: Real>(m: &CMatrix<T>) -> T {
    frobenius_sqr(&(m - m.adjoint())).sqrt()
}

/// `J·conj(R)·J`, with `J` the exchange matrix.
pub fn exchange_conjugate<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    let (r, c) = m.shape();
    CMatrix::from_fn(r, c, |i, j| m[(r - 1 - i, c - 1 - j)].conj())
}

/// `‖J·conj(R)·J − R‖_F`.
pub fn persymmetry_residual<T: Real>(m: &CMatrix<T>) -> T {
    frobenius_sqr(&(exchange_conjugate(m) - m)).sqrt()
}

/// Forward-only smoothed covariance of an `M × N` block with subarray length `P`.
pub fn forward_covariance<T: Real>(samples: &CMatrix<T>, subarray_len: usize) -> Result<SmoothedCovariance<T>> {
    let (m, n) = samples.shape();
    if n == 0 {
        return Err(Error::Dimension("no snapshots".into()));
    }
    if subarray_len == 0 || subarray_len > m {
        return Err(Error::Dimension(format!(
            "subarray length {subarray_len} must lie in 1..={m}"
        )));
    }
    let s = m - subarray_len + 1;
    let full = samples * samples.adjoint();
    let scale = creal(T::one() / T::from_usize(s * n).unwrap());
    let matrix = CMatrix::from_fn(subarray_len, subarray_len, |a, b| {
        (0..s).fold(czero::<T>(), |acc, j| acc + full[(j + a, j + b)]) * scale
    });
    Ok(SmoothedCovariance {
        matrix,
        kind: CovarianceKind::ForwardOnly,
    })
}

/// Forward-backward average `(R + J·conj(R)·J)/2`.
///
/// Applying it to an already forward-backward matrix returns the same matrix.
pub fn fb_covariance<T: Real>(fo: &SmoothedCovariance<T>) -> SmoothedCovariance<T> {
    let half = creal(T::lit(0.5));
    let matrix = (&fo.matrix + exchange_conjugate(&fo.matrix)) * half;
    SmoothedCovariance {
        matrix,
        kind: CovarianceKind::ForwardBackward,
    }
}

/// Pseudospectrum sample positions, uniform in `sin θ` over the open interval.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularGrid<T> {
    sines: Vec<T>,
}

impl<T: Real> AngularGrid<T> {
    pub fn uniform_in_sine(points: usize) -> Result<Self> {
        if points < 3 {
            return Err(Error::Dimension("angular grid needs at least 3 points".into()));
        }
        let n = T::from_usize(points).unwrap();
        let sines = (0..points)
            .map(|i| -T::one() + T::from_usize(2 * i + 1).unwrap() / n)
            .collect();
        Ok(Self { sines })
    }

    pub fn len(&self) -> usize {
        self.sines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sines.is_empty()
    }

    pub fn sines(&self) -> &[T] {
        &self.sines
    }

    /// Spacing in `sin θ`.
    pub fn step(&self) -> T {
        self.sines[1] - self.sines[0]
    }

    pub fn angle(&self, i: usize) -> LocalAoa<T> {
        LocalAoa::from_sine(self.sines[i])
    }

    /// Largest angular distance between neighbouring grid points (at the edges).
    pub fn max_angle_step(&self) -> T {
        self.sines
            .windows(2)
            .map(|w| w[1].asin() - w[0].asin())
            .fold(T::zero(), |a, b| a.max(b))
    }
}

/// Output of smooth-MUSIC for one covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct MusicResult<T> {
    /// Directions sorted by descending pseudospectrum height.
    pub angles: Vec<LocalAoa<T>>,
    pub heights: Vec<T>,
    /// Pseudospectrum sampled on the angular grid.
    pub pseudospectrum: Vec<T>,
    /// How many directions were padded from non-peak grid points.
    pub padded: usize,
    /// The covariance was isotropic, so the pseudospectrum is flat.
    pub degenerate: bool,
}

/// Directions and Capon amplitudes estimated from one observation.
#[derive(Debug, Clone, PartialEq)]
pub struct AoaEstimateSet<T> {
    pub angles: Vec<LocalAoa<T>>,
    pub amplitudes: CVector<T>,
    pub pseudospectrum: Vec<T>,
    pub padded: usize,
    pub degenerate: bool,
}

/// Precomputed subarray steering vectors over an angular grid.
#[derive(Debug, Clone)]
pub struct MusicScanner<T> {
    grid: AngularGrid<T>,
    /// `P × G`, one steering vector per grid point.
    steering: CMatrix<T>,
}

impl<T: Real> MusicScanner<T> {
    pub fn new(grid: AngularGrid<T>, cfg: &ArrayConfig<T>) -> Self {
        let p = cfg.subarray_len();
        let mut steering = CMatrix::from_element(p, grid.len(), czero());
        for (g, &u) in grid.sines().iter().enumerate() {
            steering.set_column(g, &steering_from_sine(u, p, cfg));
        }
        Self { grid, steering }
    }

    pub fn grid(&self) -> &AngularGrid<T> {
        &self.grid
    }

    pub fn subarray_len(&self) -> usize {
        self.steering.nrows()
    }

    /// Runs smooth-MUSIC on `r` with model order `signal_dim`.
    pub fn scan(&self, r: &SmoothedCovariance<T>, signal_dim: usize) -> Result<MusicResult<T>> {
        let p = self.subarray_len();
        if r.dim() != p {
            return Err(Error::Dimension(format!(
                "covariance is {}x{} but the scanner expects P = {p}",
                r.dim(),
                r.dim()
            )));
        }
        if signal_dim == 0 || signal_dim >= p {
            return Err(Error::NotIdentifiable {
                signal_dim,
                subarray_len: p,
            });
        }

        let eig = SymmetricEigen::new(r.matrix.clone());
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
        let lmax = eig.eigenvalues[order[0]];
        let lmin = eig.eigenvalues[order[p - 1]];
        let tol = T::lit(1e-9);
        let isotropic = lmax - lmin <= tol * lmax.abs();
        let degenerate = isotropic;

        let g = self.grid.len();
        let noise_dim = p - signal_dim;
        let spectrum: Vec<T> = if isotropic {
            vec![T::one() / T::from_usize(noise_dim).unwrap(); g]
        } else {
            // ‖E_n^H a‖² = ‖a‖² − ‖E_s^H a‖²: project on the smaller subspace.
            let use_noise = noise_dim <= signal_dim;
            let cols: Vec<usize> = if use_noise {
                order[signal_dim..].to_vec()
            } else {
                order[..signal_dim].to_vec()
            };
            let basis = CMatrix::from_fn(p, cols.len(), |i, j| eig.eigenvectors[(i, cols[j])]);
            let proj = basis.adjoint() * &self.steering;
            let norm_a = T::from_usize(p).unwrap();
            let floor = T::eps() * norm_a;
            (0..g)
                .map(|c| {
                    let e = proj.column(c).iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
                    let d = if use_noise { e } else { norm_a - e };
                    T::one() / d.max(floor)
                })
                .collect()
        };

        let (picked, padded) = pick_peaks(&spectrum, &self.grid, signal_dim);
        Ok(MusicResult {
            angles: picked.iter().map(|&(u, _)| LocalAoa::from_sine(u)).collect(),
            heights: picked.iter().map(|&(_, h)| h).collect(),
            pseudospectrum: spectrum,
            padded,
            degenerate,
        })
    }
}

/// Selects the `count` highest strict local maxima, refined parabolically in
/// dB on the sine axis. Missing directions are filled with the strongest
/// remaining grid points. Returns `(sine, height)` pairs and the pad count.
fn pick_peaks<T: Real>(spectrum: &[T], grid: &AngularGrid<T>, count: usize) -> (Vec<(T, T)>, usize) {
    let g = spectrum.len();
    let is_peak = |i: usize| {
        let left = i == 0 || spectrum[i] > spectrum[i - 1];
        let right = i + 1 == g || spectrum[i] > spectrum[i + 1];
        left && right
    };
    let by_height = |a: &usize, b: &usize| {
        spectrum[*b]
            .partial_cmp(&spectrum[*a])
            .unwrap()
            .then_with(|| a.cmp(b))
    };

    let mut peaks: Vec<usize> = (0..g).filter(|&i| is_peak(i)).collect();
    peaks.sort_by(by_height);
    peaks.truncate(count);

    let mut out: Vec<(T, T)> = peaks.iter().map(|&i| (refine(spectrum, grid, i), spectrum[i])).collect();
    let padded = count.saturating_sub(out.len());
    if padded > 0 {
        let mut rest: Vec<usize> = (0..g).filter(|i| !peaks.contains(i)).collect();
        rest.sort_by(by_height);
        out.extend(rest.into_iter().take(padded).map(|i| (grid.sines()[i], spectrum[i])));
    }
    (out, padded)
}

fn refine<T: Real>(spectrum: &[T], grid: &AngularGrid<T>, i: usize) -> T {
    let u = grid.sines()[i];
    if i == 0 || i + 1 == spectrum.len() {
        return u;
    }
    let db = |v: T| T::lit(10.0) * v.log10();
    let (l, c, r) = (db(spectrum[i - 1]), db(spectrum[i]), db(spectrum[i + 1]));
    let denom = l - T::lit(2.0) * c + r;
    if !(denom < T::zero()) {
        return u;
    }
    let half = T::lit(0.5);
    let delta = (half * (l - r) / denom).clamp(-half, half);
    (u + delta * grid.step()).clamp(-T::one(), T::one())
}

/// Smooth-MUSIC directions for a smoothed covariance.
pub fn smooth_music<T: Real>(
    r: &SmoothedCovariance<T>,
    signal_dim: usize,
    grid: &AngularGrid<T>,
    cfg: &ArrayConfig<T>,
) -> Result<MusicResult<T>> {
    if r.dim() != cfg.subarray_len() {
        return Err(Error::Dimension("covariance size does not match the subarray length".into()));
    }
    MusicScanner::new(grid.clone(), cfg).scan(r, signal_dim)
}

/// Capon (MVDR) beamformer built from a loaded, inverted covariance.
#[derive(Debug, Clone)]
pub struct CaponBeamformer<T> {
    inverse: CMatrix<T>,
}

impl<T: Real> CaponBeamformer<T> {
    /// Inverts `R + εI` with `ε = loading·trace(R)/P`.
    pub fn new(r: &SmoothedCovariance<T>, loading: T) -> Result<Self> {
        let p = r.dim();
        let trace = (0..p).fold(T::zero(), |acc, i| acc + r.matrix[(i, i)].re);
        let eps = loading * trace / T::from_usize(p).unwrap();
        let mut loaded = r.matrix.clone();
        for i in 0..p {
            loaded[(i, i)] += creal(eps);
        }
        let chol = Cholesky::new(loaded).ok_or(Error::SingularCovariance)?;
        let inverse = chol.inverse();
        if inverse.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::SingularCovariance);
        }
        Ok(Self { inverse })
    }

    pub fn dim(&self) -> usize {
        self.inverse.nrows()
    }

    /// `w = R⁻¹a / (a^H R⁻¹ a)` for a length-`P` steering vector `a`.
    pub fn weights_for(&self, a: &CVector<T>) -> Result<CVector<T>> {
        let v = &self.inverse * a;
        let denom = dotc(a, &v).re;
        if !(denom > T::zero()) || !denom.is_finite() {
            return Err(Error::SingularCovariance);
        }
        Ok(v / creal(denom))
    }

    pub fn weights(&self, aoa: LocalAoa<T>, cfg: &ArrayConfig<T>) -> Result<CVector<T>> {
        self.weights_for(&steering_from_sine(aoa.sine(), self.dim(), cfg))
    }
}

/// Capon weights on the reference subarray, with the default loading.
pub fn capon_weights<T: Real>(
    r: &SmoothedCovariance<T>,
    aoa: LocalAoa<T>,
    cfg: &ArrayConfig<T>,
) -> Result<CVector<T>> {
    CaponBeamformer::new(r, T::lit(DEFAULT_LOADING))?.weights(aoa, cfg)
}

/// Symbol-matched, snapshot-averaged beamformer outputs:
/// `α_s = Σ_n (w_s^H y_n)·conj(c_n) / Σ_n |c_n|²`.
pub fn estimate_amplitudes<T: Real>(
    weights: &[CVector<T>],
    reference: &CMatrix<T>,
    symbols: &CVector<T>,
) -> Result<CVector<T>> {
    if reference.ncols() != symbols.len() {
        return Err(Error::Dimension("reference block and symbols disagree on N".into()));
    }
    let energy = symbols.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr());
    if !(energy > T::zero()) {
        return Err(Error::InvalidParameter("symbol energy must be positive".into()));
    }
    let matched = reference * symbols.map(|c| c.conj());
    weights
        .iter()
        .map(|w| {
            if w.len() != reference.nrows() {
                return Err(Error::Dimension("weight length differs from subarray length".into()));
            }
            Ok(dotc(w, &matched) / creal(energy))
        })
        .collect::<Result<Vec<Complex<T>>>>()
        .map(CVector::from_vec)
}

/// Per-observation spectral pipeline: smoothing, MUSIC, Capon amplitudes.
#[derive(Debug, Clone)]
pub struct SpectralEstimator<T> {
    cfg: ArrayConfig<T>,
    scanner: MusicScanner<T>,
    signal_dim: usize,
    loading: T,
}

/// Everything derived from one observation by [`SpectralEstimator::analyze`].
#[derive(Debug, Clone)]
pub struct ObservationAnalysis<T> {
    pub covariance: SmoothedCovariance<T>,
    pub beamformer: CaponBeamformer<T>,
    pub estimates: AoaEstimateSet<T>,
}

impl<T: Real> SpectralEstimator<T> {
    pub fn new(cfg: ArrayConfig<T>, grid: AngularGrid<T>, signal_dim: usize) -> Result<Self> {
        if signal_dim == 0 || signal_dim >= cfg.subarray_len() {
            return Err(Error::NotIdentifiable {
                signal_dim,
                subarray_len: cfg.subarray_len(),
            });
        }
        Ok(Self {
            scanner: MusicScanner::new(grid, &cfg),
            cfg,
            signal_dim,
            loading: T::lit(DEFAULT_LOADING),
        })
    }

    pub fn with_loading(mut self, loading: T) -> Self {
        self.loading = loading;
        self
    }

    pub fn array(&self) -> &ArrayConfig<T> {
        &self.cfg
    }

    pub fn signal_dim(&self) -> usize {
        self.signal_dim
    }

    pub fn grid(&self) -> &AngularGrid<T> {
        self.scanner.grid()
    }

    /// FBSS covariance and its Capon beamformer, without running MUSIC.
    pub fn beamformer(&self, obs: &Observation<T>) -> Result<(SmoothedCovariance<T>, CaponBeamformer<T>)> {
        self.check(obs)?;
        let fb = fb_covariance(&forward_covariance(&obs.samples, self.cfg.subarray_len())?);
        let bf = CaponBeamformer::new(&fb, self.loading)?;
        Ok((fb, bf))
    }

    pub fn analyze(&self, obs: &Observation<T>) -> Result<ObservationAnalysis<T>> {
        let (covariance, beamformer) = self.beamformer(obs)?;
        let music = self.scanner.scan(&covariance, self.signal_dim)?;
        let weights = music
            .angles
            .iter()
            .map(|&a| beamformer.weights(a, &self.cfg))
            .collect::<Result<Vec<_>>>()?;
        let reference = obs.samples.rows(0, self.cfg.subarray_len()).into_owned();
        let amplitudes = estimate_amplitudes(&weights, &reference, &obs.symbols)?;
        Ok(ObservationAnalysis {
            covariance,
            beamformer,
            estimates: AoaEstimateSet {
                angles: music.angles,
                amplitudes,
                pseudospectrum: music.pseudospectrum,
                padded: music.padded,
                degenerate: music.degenerate,
            },
        })
    }

    fn check(&self, obs: &Observation<T>) -> Result<()> {
        if obs.elements() != self.cfg.element_count() {
            return Err(Error::Dimension(format!(
                "observation has {} rows, array has {} elements",
                obs.elements(),
                self.cfg.element_count()
            )));
        }
        Ok(())
    }
}

/// Writes `angle_rad,power` rows for a sampled pseudospectrum.
pub fn write_pseudospectrum_csv<T: Real, W: Write>(
    out: W,
    grid: &AngularGrid<T>,
    spectrum: &[T],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["angle_rad", "power"])?;
    for (u, p) in grid.sines().iter().zip(spectrum) {
        w.write_record([u.asin().as_f64().to_string(), p.as_f64().to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::steering;
    use crate::scalar::norm_sqr;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, p: usize) -> CMatrix<f64> {
        let a = CMatrix::from_fn(p, p, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        &a * a.adjoint()
    }

    /// Noiseless block of coherent unit sources sharing one symbol stream.
    fn coherent_block(cfg: &ArrayConfig<f64>, sines: &[f64], gains: &[Complex<f64>], n: usize) -> (CMatrix<f64>, CVector<f64>) {
        let m = cfg.element_count();
        let mut x = CVector::from_element(m, czero());
        for (&u, &g) in sines.iter().zip(gains) {
            x += steering(LocalAoa::from_sine(u), m, cfg) * g;
        }
        let symbols = CVector::from_fn(n, |k, _| crate::scalar::cis(std::f64::consts::FRAC_PI_2 * (k % 4) as f64 + 0.25));
        (CMatrix::from_fn(m, n, |i, j| x[i] * symbols[j]), symbols)
    }

    #[test]
    fn forward_with_single_subarray_is_sample_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let y = CMatrix::from_fn(4, 6, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let fo = forward_covariance(&y, 4).unwrap();
        let plain = &y * y.adjoint() / c(6.0, 0.0);
        assert!((fo.matrix() - plain).norm() < 1e-14);
        assert_eq!(fo.kind(), CovarianceKind::ForwardOnly);
        assert!(forward_covariance(&y, 5).is_err());
        let z = forward_covariance(&CMatrix::<f64>::zeros(5, 3), 2).unwrap();
        assert_eq!(frobenius_sqr(z.matrix()), 0.0);
    }

    #[test]
    fn forward_matches_explicit_subarray_average() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let y = CMatrix::from_fn(7, 5, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let p = 3;
        let mut acc = CMatrix::<f64>::zeros(p, p);
        for j in 0..5 {
            let sub = y.rows(j, p).into_owned();
            acc += &sub * sub.adjoint() / c(5.0, 0.0);
        }
        acc /= c(5.0, 0.0);
        let fo = forward_covariance(&y, p).unwrap();
        assert!((fo.matrix() - acc).norm() < 1e-13);
    }

    #[test]
    fn smoothing_restores_rank_of_coherent_pair() {
        let cfg = ArrayConfig::new(8, 4, 5.9e9).unwrap();
        let (y, _) = coherent_block(&cfg, &[-0.3, 0.45], &[c(1.0, 0.0), c(0.0, 1.0)], 16);
        let plain = forward_covariance(&y, 8).unwrap().eigenvalues();
        assert!(plain[1] / plain[0] < 1e-8);
        let fo = forward_covariance(&y, 4).unwrap().eigenvalues();
        assert!(fo[1] / fo[0] > 1e-6);
        let fb = fb_covariance(&forward_covariance(&y, 4).unwrap()).eigenvalues();
        assert!(fb[1] / fb[0] > 1e-3);
    }

    #[test]
    fn fb_fixed_points_and_persymmetry() {
        let id = SmoothedCovariance::from_matrix(CMatrix::<f64>::identity(5, 5), CovarianceKind::ForwardOnly).unwrap();
        assert!((fb_covariance(&id).matrix() - CMatrix::identity(5, 5)).norm() < 1e-15);

        // Real symmetric Toeplitz matrices are persymmetric.
        let t = CMatrix::from_fn(4, 4, |i, j| c(1.0 / (1.0 + (i as f64 - j as f64).abs()), 0.0));
        let ts = SmoothedCovariance::from_matrix(t.clone(), CovarianceKind::ForwardOnly).unwrap();
        assert!((fb_covariance(&ts).matrix() - t).norm() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let h = SmoothedCovariance::from_matrix(random_hermitian(&mut rng, 6), CovarianceKind::ForwardOnly).unwrap();
            let fb = fb_covariance(&h);
            assert!(persymmetry_residual(fb.matrix()) < 1e-12);
            assert!(hermitian_residual(fb.matrix()) < 1e-12);
            assert_eq!(fb.kind(), CovarianceKind::ForwardBackward);
        }
    }

    #[test]
    fn music_single_source() {
        let cfg = ArrayConfig::new(16, 16, 5.9e9).unwrap();
        let truth = 0.3f64;
        let (y, _) = coherent_block(&cfg, &[truth.sin()], &[c(1.0, 0.0)], 8);
        // Tiny white component so the noise subspace is well defined.
        let mut r = forward_covariance(&y, 16).unwrap().matrix().clone();
        for i in 0..16 {
            r[(i, i)] += c(1e-6, 0.0);
        }
        let r = SmoothedCovariance::from_matrix(r, CovarianceKind::ForwardOnly).unwrap();
        let grid = AngularGrid::uniform_in_sine(DEFAULT_GRID_POINTS).unwrap();
        let res = smooth_music(&r, 1, &grid, &cfg).unwrap();
        assert_eq!(res.angles.len(), 1);
        assert!((res.angles[0].radians() - truth).abs() <= grid.max_angle_step());
        assert!(!res.degenerate);
        assert!(matches!(smooth_music(&r, 16, &grid, &cfg), Err(Error::NotIdentifiable { .. })));
    }

    #[test]
    fn music_isotropic_input_is_flagged() {
        let cfg = ArrayConfig::new(6, 6, 5.9e9).unwrap();
        let r = SmoothedCovariance::from_matrix(CMatrix::<f64>::identity(6, 6), CovarianceKind::ForwardBackward).unwrap();
        let grid = AngularGrid::uniform_in_sine(64).unwrap();
        let res = smooth_music(&r, 2, &grid, &cfg).unwrap();
        assert!(res.degenerate);
        assert_eq!(res.angles.len(), 2);
        assert_eq!(res.padded, 2);
        let first = res.pseudospectrum[0];
        assert!(res.pseudospectrum.iter().all(|&p| p == first));
        // Ties break toward the smaller angle.
        assert!(res.angles[0].radians() < res.angles[1].radians());
        assert_eq!(res.angles[0].radians(), grid.angle(0).radians());
    }

    #[test]
    fn capon_white_noise_and_distortionless() {
        let cfg = ArrayConfig::new(6, 4, 5.9e9).unwrap();
        let id = SmoothedCovariance::from_matrix(CMatrix::<f64>::identity(4, 4), CovarianceKind::ForwardBackward).unwrap();
        let look = LocalAoa::new(0.4).unwrap();
        let w = capon_weights(&id, look, &cfg).unwrap();
        let a = steering(look, 4, &cfg);
        assert!((w - &a / c(4.0, 0.0)).norm() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let r = SmoothedCovariance::from_matrix(random_hermitian(&mut rng, 4), CovarianceKind::ForwardBackward).unwrap();
            let th = LocalAoa::new(rng.random_range(-1.5..1.5)).unwrap();
            let w = capon_weights(&r, th, &cfg).unwrap();
            let gain = dotc(&w, &steering(th, 4, &cfg));
            assert!((gain - c(1.0, 0.0)).norm() < 1e-10);
        }

        let zero = SmoothedCovariance::from_matrix(CMatrix::<f64>::zeros(4, 4), CovarianceKind::ForwardBackward).unwrap();
        assert!(matches!(capon_weights(&zero, look, &cfg), Err(Error::SingularCovariance)));
    }

    #[test]
    fn capon_attenuates_interferer() {
        // Analytic covariance of two uncorrelated sources at 20 dB SNR.
        let cfg = ArrayConfig::new(8, 8, 5.9e9).unwrap();
        let look = LocalAoa::new(0.1).unwrap();
        let int = LocalAoa::new(-0.5).unwrap();
        let a0 = steering(look, 8, &cfg);
        let a1 = steering(int, 8, &cfg);
        let snr = c(100.0, 0.0);
        let r = (&a0 * a0.adjoint()) * snr + (&a1 * a1.adjoint()) * snr + CMatrix::identity(8, 8);
        let r = SmoothedCovariance::from_matrix(r, CovarianceKind::ForwardBackward).unwrap();
        let w = capon_weights(&r, look, &cfg).unwrap();
        assert!((dotc(&w, &a0) - c(1.0, 0.0)).norm() < 1e-10);
        assert!(dotc(&w, &a1).norm() < 0.2);
    }

    #[test]
    fn amplitudes_single_path_and_zero_input() {
        let cfg = ArrayConfig::new(8, 5, 5.9e9).unwrap();
        let th = 0.2f64;
        let (y, symbols) = coherent_block(&cfg, &[th.sin()], &[c(2.0, 0.0)], 16);
        let fb = fb_covariance(&forward_covariance(&y, 5).unwrap());
        let w = capon_weights(&fb, LocalAoa::new(th).unwrap(), &cfg).unwrap();
        let reference = y.rows(0, 5).into_owned();
        let alpha = estimate_amplitudes(&[w.clone()], &reference, &symbols).unwrap();
        assert!((alpha[0] - c(2.0, 0.0)).norm() < 1e-6);

        let zero = CMatrix::<f64>::zeros(5, 16);
        let alpha = estimate_amplitudes(&[w], &zero, &symbols).unwrap();
        assert_eq!(norm_sqr(&alpha), 0.0);
    }

    #[test]
    fn amplitudes_do_not_depend_on_symbol_sequence() {
        let cfg = ArrayConfig::new(10, 6, 5.9e9).unwrap();
        let m = 10;
        let field = steering(LocalAoa::new(0.35).unwrap(), m, &cfg) * c(0.7, -0.4)
            + steering(LocalAoa::new(-0.6).unwrap(), m, &cfg) * c(0.3, 0.2);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let estimate = |rng: &mut ChaCha8Rng| {
            let symbols = CVector::from_fn(16, |_, _| crate::channel::qpsk_symbol::<f64, _>(rng));
            let y = CMatrix::from_fn(m, 16, |i, j| field[i] * symbols[j]);
            let fb = fb_covariance(&forward_covariance(&y, 6).unwrap());
            let w = capon_weights(&fb, LocalAoa::new(0.35).unwrap(), &cfg).unwrap();
            estimate_amplitudes(&[w], &y.rows(0, 6).into_owned(), &symbols).unwrap()[0]
        };
        let a = estimate(&mut rng);
        let b = estimate(&mut rng);
        assert!((a - b).norm() < 1e-6 * a.norm().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn pseudospectrum_csv_shape() {
        let grid = AngularGrid::<f64>::uniform_in_sine(4).unwrap();
        let mut buf = Vec::new();
        write_pseudospectrum_csv(&mut buf, &grid, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "angle_rad,power");
        assert_eq!(lines.len(), 5);
    }
}
