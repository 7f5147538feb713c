//! Comm and echo channel models applied to the frequency-domain grid.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::spread::spread_symbols;
use super::waveform::{Grid, WaveformConfig, WaveformMode};
use super::{PhyError, SPEED_OF_LIGHT};
use crate::num::Scalar;
use crate::rng::TrialRng;

/// Point reflector: radial range, signed radial velocity and a complex
/// reflection amplitude.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PointTarget<T> {
    pub range_m: T,
    pub velocity_mps: T,
    pub reflect_re: T,
    pub reflect_im: T,
}

impl<T: Scalar> PointTarget<T> {
    pub fn new(range_m: T, velocity_mps: T, reflect_amp: Complex<T>) -> Self {
        Self { range_m, velocity_mps, reflect_re: reflect_amp.re, reflect_im: reflect_amp.im }
    }

    pub fn reflect_amp(&self) -> Complex<T> {
        Complex::new(self.reflect_re, self.reflect_im)
    }

    /// Round-trip delay 2r/c.
    pub fn delay_s(&self) -> T {
        T::of(2.0) * self.range_m / T::of(SPEED_OF_LIGHT)
    }

    /// Two-way Doppler shift 2 v f_c / c.
    pub fn doppler_hz(&self, config: &WaveformConfig<T>) -> T {
        T::of(2.0) * self.velocity_mps * config.carrier_hz / T::of(SPEED_OF_LIGHT)
    }

    pub fn validate(&self, config: &WaveformConfig<T>) -> Result<(), PhyError> {
        let max = config.unambiguous_range_m();
        if self.range_m < T::zero() || self.range_m > max {
            return Err(PhyError::TargetBeyondUnambiguousRange {
                range_m: self.range_m.widen(),
                max_m: max.widen(),
            });
        }
        Ok(())
    }
}

/// Co-channel transmissions overlapping the echo observation.
///
/// Interferers reuse the same numerology: code-division frames occupy
/// Hadamard rows disjoint from the sensing node's own rows, plain frames are
/// independent QPSK grids. Power is set relative to the thermal noise floor
/// so the interference level is constant across an echo-SNR sweep.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EchoInterference {
    pub num_interferers: usize,
    /// Total interference power over thermal noise power, dB.
    pub interference_to_noise_db: f64,
}

/// Flat unit-gain line-of-sight channel: adds circular complex Gaussian
/// noise at the requested per-resource-element SNR. `f64::INFINITY` is the
/// no-noise sentinel.
pub fn apply_comm_channel<T: Scalar>(grid: &Grid<T>, snr_db: f64, rng: &mut TrialRng) -> Grid<T> {
    let mut out = grid.clone();
    if snr_db.is_infinite() && snr_db > 0.0 {
        return out;
    }
    let snr = 10f64.powf(snr_db / 10.0);
    // Unit signal power per resource element; noise split across both axes.
    let sigma_axis = T::of((0.5 / snr).sqrt());
    for c in out.as_mut_slice() {
        *c += rng.complex_gaussian(sigma_axis);
    }
    out
}

/// Monostatic echo channel: each target contributes a delay phase ramp
/// across subcarriers and a Doppler ramp across symbols,
/// `a * exp(-j 2 pi n df tau) * exp(+j 2 pi f_D m T) * X(m,n)`, plus AWGN at
/// the echo-to-noise ratio `snr_db` and optional co-channel interference.
pub fn apply_echo_channel<T: Scalar>(
    transmitted: &Grid<T>,
    targets: &[PointTarget<T>],
    snr_db: f64,
    interference: Option<&EchoInterference>,
    config: &WaveformConfig<T>,
    rng: &mut TrialRng,
) -> Result<Grid<T>, PhyError> {
    config.validate()?;
    if transmitted.dims() != config.grid_dims() {
        return Err(PhyError::GridMismatch {
            expected: config.grid_dims(),
            got: transmitted.dims(),
        });
    }
    for t in targets {
        t.validate(config)?;
    }

    let (num_symbols, num_subcarriers) = config.grid_dims();
    let mut out = Grid::zeroed(num_symbols, num_subcarriers);

    let tau_scale = std::f64::consts::TAU;
    for target in targets {
        let tau = target.delay_s().widen();
        let doppler = target.doppler_hz(config).widen();
        let df = config.subcarrier_spacing_hz().widen();
        let t_sym = config.symbol_duration_s().widen();
        let amp = target.reflect_amp();

        // Precompute the two phase ramps once per target.
        let freq_ramp: Vec<Complex<T>> = (0..num_subcarriers)
            .map(|n| {
                let phase = -tau_scale * n as f64 * df * tau;
                Complex::new(T::of(phase.cos()), T::of(phase.sin()))
            })
            .collect();
        let time_ramp: Vec<Complex<T>> = (0..num_symbols)
            .map(|m| {
                let phase = tau_scale * doppler * m as f64 * t_sym;
                Complex::new(T::of(phase.cos()), T::of(phase.sin()))
            })
            .collect();

        #[allow(clippy::needless_range_loop)]
        for m in 0..num_symbols {
            let rot_m = time_ramp[m] * amp;
            for n in 0..num_subcarriers {
                *out.get_mut(m, n) += rot_m * freq_ramp[n] * transmitted.get(m, n);
            }
        }
    }

    let no_noise = snr_db.is_infinite() && snr_db > 0.0;
    let echo_power: f64 = targets.iter().map(|t| t.reflect_amp().norm_sqr().widen()).sum();
    let noise_power = if no_noise { 0.0 } else { echo_power / 10f64.powf(snr_db / 10.0) };

    if let Some(intf) = interference {
        if intf.num_interferers > 0 && noise_power > 0.0 {
            let total = noise_power * 10f64.powf(intf.interference_to_noise_db / 10.0);
            let per_amp = T::of((total / intf.num_interferers as f64).sqrt());
            for u in 0..intf.num_interferers {
                let frame = interferer_grid(config, u + 1, rng);
                for (dst, src) in out.as_mut_slice().iter_mut().zip(frame.as_slice()) {
                    *dst += *src * per_amp;
                }
            }
        }
    }

    if !no_noise {
        let sigma_axis = T::of((noise_power / 2.0).sqrt());
        for c in out.as_mut_slice() {
            *c += rng.complex_gaussian(sigma_axis);
        }
    }
    Ok(out)
}

/// Unit-power frame of a co-channel transmitter. `code_offset` keeps its
/// Hadamard rows disjoint from the sensing node's own rows in cd mode.
fn interferer_grid<T: Scalar>(
    config: &WaveformConfig<T>,
    code_offset: usize,
    rng: &mut TrialRng,
) -> Grid<T> {
    let tiles = config.frame_bits() / 2;
    let half = T::of(std::f64::consts::FRAC_1_SQRT_2);
    let symbols: Vec<Complex<T>> = (0..tiles)
        .map(|_| {
            let re = if rng.next_u64() & 1 == 1 { -half } else { half };
            let im = if rng.next_u64() & 1 == 1 { -half } else { half };
            Complex::new(re, im)
        })
        .collect();
    let order = config.spreading_order();
    let offset = match config.mode {
        WaveformMode::PlainOfdm => 0,
        // Nonzero offset modulo the order keeps every tile on a row distinct
        // from the sensing node's own.
        WaveformMode::CdOfdm if order > 1 => 1 + (code_offset - 1) % (order - 1),
        WaveformMode::CdOfdm => 0,
    };
    spread_symbols(&symbols, config, offset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phy::waveform::{modulate, random_payload};
    use crate::rng::RngHandle;

    fn config() -> WaveformConfig<f64> {
        WaveformConfig {
            carrier_hz: 24.0e9,
            bandwidth_hz: 122.88e6,
            num_subcarriers: 128,
            cp_samples: 16,
            num_symbols: 8,
            mode: WaveformMode::PlainOfdm,
            spread_freq: 1,
            spread_time: 1,
        }
    }

    fn frame(cfg: &WaveformConfig<f64>, seed: u64) -> Grid<f64> {
        let mut rng = RngHandle::new(seed, 0).rng();
        let bits = random_payload(cfg, &mut rng);
        modulate(&bits, cfg).unwrap().freq_symbols
    }

    #[test]
    fn infinite_snr_is_identity() {
        let cfg = config();
        let tx = frame(&cfg, 1);
        let mut rng = RngHandle::new(2, 0).rng();
        let rx = apply_comm_channel(&tx, f64::INFINITY, &mut rng);
        assert_eq!(rx, tx);
    }

    #[test]
    fn comm_noise_is_deterministic() {
        let cfg = config();
        let tx = frame(&cfg, 1);
        let a = apply_comm_channel(&tx, 3.0, &mut RngHandle::new(7, 1).rng());
        let b = apply_comm_channel(&tx, 3.0, &mut RngHandle::new(7, 1).rng());
        assert_eq!(a, b);
    }

    #[test]
    fn sample_snr_matches_request_at_zero_db() {
        let cfg = WaveformConfig { num_subcarriers: 1024, num_symbols: 200, ..config() };
        let tx = frame(&cfg, 3);
        let mut rng = RngHandle::new(4, 0).rng();
        let rx = apply_comm_channel(&tx, 0.0, &mut rng);
        let mut noise_power = 0.0;
        for (r, t) in rx.as_slice().iter().zip(tx.as_slice()) {
            noise_power += (r - t).norm_sqr();
        }
        let elements = (cfg.num_subcarriers * cfg.num_symbols) as f64;
        assert!(elements >= 1e5);
        let measured_db = 10.0 * (1.0 / (noise_power / elements)).log10();
        assert!(measured_db.abs() < 0.1, "measured {measured_db} dB");
    }

    #[test]
    fn zero_delay_zero_doppler_unit_target_is_identity() {
        let cfg = config();
        let tx = frame(&cfg, 5);
        let target = PointTarget::new(0.0, 0.0, Complex::new(1.0, 0.0));
        let mut rng = RngHandle::new(6, 0).rng();
        let rx =
            apply_echo_channel(&tx, &[target], f64::INFINITY, None, &cfg, &mut rng).unwrap();
        for (r, t) in rx.as_slice().iter().zip(tx.as_slice()) {
            assert!((r - t).norm() < 1e-12);
        }
    }

    #[test]
    fn phase_slope_across_subcarriers_is_analytic() {
        let cfg = config();
        let tx = frame(&cfg, 7);
        let range_m = 2.0 * cfg.range_bin_m(); // bin 2, inside the CP window
        let target = PointTarget::new(range_m, 0.0, Complex::new(1.0, 0.0));
        let mut rng = RngHandle::new(8, 0).rng();
        let rx = apply_echo_channel(&tx, &[target], f64::INFINITY, None, &cfg, &mut rng).unwrap();
        let tau = 2.0 * range_m / SPEED_OF_LIGHT;
        let expected = -std::f64::consts::TAU * cfg.subcarrier_spacing_hz() * tau;
        for m in 0..cfg.num_symbols {
            for n in 0..cfg.num_subcarriers - 1 {
                let g0 = rx.get(m, n) / tx.get(m, n);
                let g1 = rx.get(m, n + 1) / tx.get(m, n + 1);
                let slope = (g1 * g0.conj()).arg();
                assert!((slope - expected).abs() < 1e-9, "slope {slope} vs {expected}");
            }
        }
    }

    #[test]
    fn echo_is_linear_in_targets() {
        let cfg = config();
        let tx = frame(&cfg, 9);
        let t1 = PointTarget::new(3.0, 10.0, Complex::new(0.8, 0.1));
        let t2 = PointTarget::new(11.0, -4.0, Complex::new(0.3, -0.2));
        let run = |targets: &[PointTarget<f64>]| {
            apply_echo_channel(&tx, targets, f64::INFINITY, None, &cfg, &mut RngHandle::new(1, 0).rng())
                .unwrap()
        };
        let both = run(&[t1, t2]);
        let a = run(&[t1]);
        let b = run(&[t2]);
        for ((s, x), y) in both.as_slice().iter().zip(a.as_slice()).zip(b.as_slice()) {
            assert!((s - (x + y)).norm() < 1e-12);
        }
    }

    #[test]
    fn target_beyond_unambiguous_range_rejected() {
        let cfg = config();
        let target = PointTarget::new(cfg.unambiguous_range_m() * 1.01, 0.0, Complex::new(1.0, 0.0));
        let mut rng = RngHandle::new(1, 0).rng();
        let err = apply_echo_channel(&frame(&cfg, 1), &[target], 10.0, None, &cfg, &mut rng)
            .unwrap_err();
        assert!(matches!(err, PhyError::TargetBeyondUnambiguousRange { .. }));
    }
}
