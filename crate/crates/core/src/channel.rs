//! Multipath channel synthesis and matched-filter sample blocks.
//!
//! A realization carries one LOS direction plus `D_i` NLOS components drawn
//! uniformly in bearing. Component phases are uniform and delays are derived
//! from the phase plus an integer number of carrier cycles; the amplitude
//! follows an exponential power delay profile. All paths share the symbol
//! sequence, so they are fully coherent at the receiver.

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{global_to_local, steering, ArrayConfig, GlobalBearing};
use crate::scalar::{cis, czero, CMatrix, CVector, Real};

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Standard noise temperature, K.
pub const REFERENCE_TEMPERATURE: f64 = 290.0;

/// How a component amplitude is read off the power delay profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeLaw {
    /// `a = sqrt(P(τ))`: the profile is a power.
    #[default]
    Sqrt,
    /// `a = P(τ)`.
    Linear,
}

/// Thermal noise power `k_B·T_0·B` in watts for a one-sided bandwidth `B`.
pub fn thermal_noise_power(bandwidth_hz: f64) -> f64 {
    BOLTZMANN * REFERENCE_TEMPERATURE * bandwidth_hz
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams<T> {
    pub path_loss_exponent: T,
    pub reference_distance: T,
    pub coherence_bandwidth: T,
    pub doppler_spread: T,
    pub rms_delay_spread: T,
    pub transmit_power_dbm: T,
    /// Noise power per antenna and sample, watts.
    pub noise_power: T,
    pub carrier_hz: T,
    pub amplitude_law: AmplitudeLaw,
}

impl<T: Real> ChannelParams<T> {
    /// Vehicular 5.9 GHz defaults with thermal noise over `noise_bandwidth_hz`.
    pub fn vehicular_defaults(noise_bandwidth_hz: f64) -> Self {
        Self {
            path_loss_exponent: T::lit(4.0),
            reference_distance: T::lit(1.0),
            coherence_bandwidth: T::lit(250e3),
            doppler_spread: T::lit(512.0),
            rms_delay_spread: T::lit(677e-9),
            transmit_power_dbm: T::lit(18.0),
            noise_power: T::lit(thermal_noise_power(noise_bandwidth_hz)),
            carrier_hz: T::lit(5.9e9),
            amplitude_law: AmplitudeLaw::Sqrt,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("path_loss_exponent", self.path_loss_exponent),
            ("reference_distance", self.reference_distance),
            ("rms_delay_spread", self.rms_delay_spread),
            ("carrier_hz", self.carrier_hz),
            ("doppler_spread", self.doppler_spread),
        ];
        for (name, v) in positive {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.coherence_bandwidth > self.doppler_spread) {
            return Err(Error::InvalidParameter(
                "coherence bandwidth must exceed the Doppler spread".into(),
            ));
        }
        if self.noise_power < T::zero() || !self.noise_power.is_finite() {
            return Err(Error::InvalidParameter("noise power must be non-negative".into()));
        }
        Ok(())
    }

    /// Exponential power delay profile `P(τ) = exp(−τ/σ_τ)`.
    pub fn power_delay_profile(&self, delay: T) -> T {
        (-delay / self.rms_delay_spread).exp()
    }

    /// Component amplitude for a given delay under the configured law.
    pub fn path_amplitude(&self, delay: T) -> T {
        let p = self.power_delay_profile(delay);
        match self.amplitude_law {
            AmplitudeLaw::Sqrt => p.sqrt(),
            AmplitudeLaw::Linear => p,
        }
    }

    /// Log-distance path loss in dB.
    pub fn path_loss_db(&self, distance: T) -> T {
        T::lit(10.0) * self.path_loss_exponent * (distance / self.reference_distance).log10()
    }

    /// Large-scale amplitude `|γ|` (square root of received power in watts).
    pub fn gamma_magnitude(&self, distance: T) -> T {
        let received_dbm = self.transmit_power_dbm - self.path_loss_db(distance);
        T::lit(10.0).powf((received_dbm - T::lit(30.0)) / T::lit(20.0))
    }
}

/// One NLOS component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathComponent<T> {
    pub aoa: GlobalBearing<T>,
    pub beta: Complex<T>,
    pub delay: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultipathRealization<T> {
    pub los_aoa: GlobalBearing<T>,
    pub los_blocked: bool,
    pub gamma: Complex<T>,
    pub paths: Vec<PathComponent<T>>,
}

impl<T: Real> MultipathRealization<T> {
    pub fn path_count(&self) -> usize {
        self.paths.len()
    }

    /// Noise-free spatial signature `γ(x_LOS + x_NLOS)` seen with `heading`.
    pub fn signature(&self, heading: GlobalBearing<T>, cfg: &ArrayConfig<T>) -> CVector<T> {
        let m = cfg.element_count();
        let mut x = CVector::from_element(m, czero());
        if !self.los_blocked {
            x += steering(global_to_local(self.los_aoa, heading), m, cfg);
        }
        for p in &self.paths {
            x += steering(global_to_local(p.aoa, heading), m, cfg) * p.beta;
        }
        x * self.gamma
    }
}

/// Matched-filter output block for one broadcast.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation<T> {
    /// `M × N` samples, one snapshot per column.
    pub samples: CMatrix<T>,
    /// Known training symbols, length `N`.
    pub symbols: CVector<T>,
    pub timestamp: T,
    pub bs_id: usize,
}

impl<T: Real> Observation<T> {
    pub fn new(samples: CMatrix<T>, symbols: CVector<T>, timestamp: T, bs_id: usize) -> Result<Self> {
        if samples.ncols() == 0 || samples.ncols() != symbols.len() {
            return Err(Error::Dimension(format!(
                "{} snapshots but {} symbols",
                samples.ncols(),
                symbols.len()
            )));
        }
        Ok(Self {
            samples,
            symbols,
            timestamp,
            bs_id,
        })
    }

    pub fn snapshots(&self) -> usize {
        self.samples.ncols()
    }

    pub fn elements(&self) -> usize {
        self.samples.nrows()
    }

    /// Symbol-matched sum `ȳ = Σ_n y_n·conj(c_n)`.
    pub fn matched_sum(&self) -> CVector<T> {
        let mut acc = CVector::from_element(self.elements(), czero());
        for (n, c) in self.symbols.iter().enumerate() {
            let cc = c.conj();
            for (a, y) in acc.iter_mut().zip(self.samples.column(n).iter()) {
                *a += *y * cc;
            }
        }
        acc
    }

    /// Symbol energy `Σ_n |c_n|²`.
    pub fn symbol_energy(&self) -> T {
        self.symbols.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr())
    }

    /// Total received energy `Σ_n ‖y_n‖²`.
    pub fn sample_energy(&self) -> T {
        self.samples.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }
}

fn uniform<T: Real, R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> T {
    T::lit(rng.random_range(lo..hi))
}

/// Draws a multipath realization for one observation.
pub fn sample_multipath<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    params: &ChannelParams<T>,
    path_count: usize,
    distance: T,
    los_aoa: GlobalBearing<T>,
    los_blocked: bool,
) -> Result<MultipathRealization<T>> {
    if !(distance > T::zero()) {
        return Err(Error::InvalidParameter(format!("distance must be positive, got {distance}")));
    }
    let two_pi = std::f64::consts::TAU;
    let gamma = cis(uniform::<T, _>(rng, 0.0, two_pi)) * params.gamma_magnitude(distance);
    let fc = params.carrier_hz;
    let paths = (0..path_count)
        .map(|_| {
            let aoa = GlobalBearing::new(uniform::<T, _>(rng, 0.0, two_pi));
            let phase: T = uniform(rng, 0.0, two_pi);
            let cycles = T::from_u32(rng.random_range(0..=4u32)).unwrap();
            let delay = phase / (T::two_pi() * fc) + cycles / fc;
            PathComponent {
                aoa,
                beta: cis(phase) * params.path_amplitude(delay),
                delay,
            }
        })
        .collect();
    Ok(MultipathRealization {
        los_aoa,
        los_blocked,
        gamma,
        paths,
    })
}

/// Unit-modulus QPSK symbol drawn uniformly.
pub fn qpsk_symbol<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let k = rng.random_range(0..4u32);
    let phase = T::frac_pi_4() + T::frac_pi_2() * T::from_u32(k).unwrap();
    cis(phase)
}

/// Circularly-symmetric complex Gaussian sample of variance `power`.
pub fn complex_gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R, power: T) -> Complex<T> {
    let scale = (power.as_f64() / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex::new(T::lit(re * scale), T::lit(im * scale))
}

/// Synthesizes `Y_i` for a realization seen by an array pointing along `heading`.
#[allow(clippy::too_many_arguments)]
pub fn generate_observation<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    realization: &MultipathRealization<T>,
    heading: GlobalBearing<T>,
    cfg: &ArrayConfig<T>,
    snapshots: usize,
    noise_power: T,
    timestamp: T,
    bs_id: usize,
) -> Result<Observation<T>> {
    if snapshots == 0 {
        return Err(Error::Dimension("an observation needs at least one snapshot".into()));
    }
    let signature = realization.signature(heading, cfg);
    let symbols = CVector::from_fn(snapshots, |_, _| qpsk_symbol(rng));
    let m = cfg.element_count();
    let mut samples = CMatrix::from_element(m, snapshots, czero());
    for n in 0..snapshots {
        let c = symbols[n];
        for k in 0..m {
            let noise = if noise_power > T::zero() {
                complex_gaussian(rng, noise_power)
            } else {
                czero()
            };
            samples[(k, n)] = signature[k] * c + noise;
        }
    }
    Observation::new(samples, symbols, timestamp, bs_id)
}

/// Per-antenna SNR `|γ|²/σ²` in dB at the given distance.
pub fn snr_at<T: Real>(distance: T, params: &ChannelParams<T>, noise_power: T) -> T {
    let g = params.gamma_magnitude(distance);
    T::lit(10.0) * (g * g / noise_power).log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::LocalAoa;
    use crate::scalar::frobenius_sqr;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params() -> ChannelParams<f64> {
        ChannelParams::vehicular_defaults(25e3)
    }

    #[test]
    fn pdp_reference_values() {
        let p = params();
        assert_eq!(p.power_delay_profile(0.0), 1.0);
        assert_eq!(p.path_amplitude(0.0), 1.0);
        assert!((p.power_delay_profile(677e-9) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((p.path_amplitude(677e-9) - 0.606_530_659_712_633_4).abs() < 1e-12);
        let lin = ChannelParams { amplitude_law: AmplitudeLaw::Linear, ..p };
        assert!((lin.path_amplitude(677e-9) - 0.367_879_441_171_442_3).abs() < 1e-12);
    }

    #[test]
    fn pdp_is_strictly_decreasing() {
        let p = params();
        let mut prev = f64::INFINITY;
        for i in 0..100 {
            let a = p.path_amplitude(i as f64 * 5e-9);
            assert!(a < prev);
            prev = a;
        }
    }

    #[test]
    fn gamma_at_reference_distance() {
        let p = params();
        assert_eq!(p.path_loss_db(1.0), 0.0);
        // 18 dBm = 63.0957 mW.
        let g = p.gamma_magnitude(1.0);
        assert!((g * g - 10f64.powf(-1.2)).abs() < 1e-15);
    }

    #[test]
    fn snr_reference_points() {
        let mut p = params();
        // Transmit power equal to the noise floor at d0.
        p.transmit_power_dbm = 10.0 * (p.noise_power * 1e3).log10();
        assert!(snr_at(1.0, &p, p.noise_power).abs() < 1e-9);
        let d = snr_at(20.0, &p, p.noise_power) - snr_at(10.0, &p, p.noise_power);
        assert!((d + 40.0 * 2f64.log10()).abs() < 1e-9);
        assert!((d + 12.041_199_826_559_248).abs() < 1e-9);
    }

    #[test]
    fn snr_regression_at_sixty_meters() {
        // 18 dBm, eta = 4, kT0B over 37.5 kHz.
        let p = ChannelParams::<f64>::vehicular_defaults(37.5e3);
        let snr = snr_at(60.0, &p, p.noise_power);
        // -53.126 dBm received versus -128.235 dBm noise.
        assert!((snr - 75.108_824_501_6).abs() < 1e-6, "{snr}");
    }

    #[test]
    fn multipath_draws_respect_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = params();
        let r = sample_multipath(&mut rng, &p, 25, 60.0, GlobalBearing::new(0.0), false).unwrap();
        assert_eq!(r.path_count(), 25);
        for c in &r.paths {
            assert!(c.beta.norm() <= 1.0);
            assert!(c.delay >= 0.0 && c.delay <= 5.0 / 5.9e9);
            assert!((c.beta.norm() - p.path_amplitude(c.delay)).abs() < 1e-12);
        }
        assert!((r.gamma.norm() - p.gamma_magnitude(60.0)).abs() < 1e-18);
        assert!(sample_multipath(&mut rng, &p, 1, 0.0, GlobalBearing::new(0.0), false).is_err());
    }

    #[test]
    fn noiseless_single_path_columns() {
        let cfg = ArrayConfig::new(6, 3, 5.9e9).unwrap();
        let real = MultipathRealization {
            los_aoa: GlobalBearing::new(0.7),
            los_blocked: false,
            gamma: Complex::new(0.3, -0.2),
            paths: vec![],
        };
        let heading = GlobalBearing::new(0.2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let obs = generate_observation(&mut rng, &real, heading, &cfg, 5, 0.0, 0.1, 0).unwrap();
        let a = steering(global_to_local(real.los_aoa, heading), 6, &cfg) * real.gamma;
        for n in 0..5 {
            let col = obs.samples.column(n) * obs.symbols[n].conj();
            assert!((col - &a).norm() < 1e-12);
            assert!((obs.symbols[n].norm() - 1.0_f64).abs() < 1e-15);
        }
        let blocked = MultipathRealization { los_blocked: true, ..real };
        let z = generate_observation(&mut rng, &blocked, heading, &cfg, 5, 0.0, 0.1, 0).unwrap();
        assert_eq!(frobenius_sqr(&z.samples), 0.0);
        assert!(generate_observation(&mut rng, &blocked, heading, &cfg, 0, 0.0, 0.1, 0).is_err());
    }

    #[test]
    fn sample_covariance_converges() {
        // Unit LOS at broadside-offset angle plus white noise, N = 1e5.
        let cfg = ArrayConfig::new(4, 2, 5.9e9).unwrap();
        let real = MultipathRealization {
            los_aoa: GlobalBearing::new(0.4),
            los_blocked: false,
            gamma: Complex::new(1.0, 0.0),
            paths: vec![],
        };
        let sigma2 = 0.5;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let obs = generate_observation(&mut rng, &real, GlobalBearing::new(0.0), &cfg, n, sigma2, 0.0, 0).unwrap();
        let r = &obs.samples * obs.samples.adjoint() / Complex::new(n as f64, 0.0);
        let a = steering(LocalAoa::from_sine(0.4f64.sin()), 4, &cfg);
        let expect = &a * a.adjoint() + CMatrix::identity(4, 4) * Complex::new(sigma2, 0.0);
        let rel = (r - &expect).norm() / expect.norm();
        assert!(rel < 0.01, "relative error {rel}");
    }

    #[test]
    fn noise_is_white_and_energy_accounts() {
        let cfg = ArrayConfig::new(3, 2, 5.9e9).unwrap();
        let real = MultipathRealization {
            los_aoa: GlobalBearing::new(0.0),
            los_blocked: true,
            gamma: Complex::new(1.0, 0.0),
            paths: vec![],
        };
        let sigma2 = 2.0;
        let n = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let obs = generate_observation(&mut rng, &real, GlobalBearing::new(0.0), &cfg, n, sigma2, 0.0, 0).unwrap();
        let r = &obs.samples * obs.samples.adjoint() / Complex::new(n as f64, 0.0);
        // Standard error of each covariance entry is sigma^2 / sqrt(N).
        let se = sigma2 / (n as f64).sqrt();
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { sigma2 } else { 0.0 };
                let dev = (r[(i, j)] - Complex::new(target, 0.0)).norm();
                assert!(dev < 3.0 * se, "entry ({i},{j}) deviates by {dev}");
            }
        }

        let los = MultipathRealization { los_blocked: false, gamma: Complex::new(0.8, 0.6), ..real };
        let obs = generate_observation(&mut rng, &los, GlobalBearing::new(0.0), &cfg, n, sigma2, 0.0, 0).unwrap();
        let mean_energy = obs.sample_energy() / n as f64;
        let expect = 3.0 * 1.0 + 3.0 * sigma2;
        assert!(((mean_energy - expect) / expect).abs() < 0.02);
    }
}
