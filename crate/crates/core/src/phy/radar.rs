//! FFT radar pipeline: element-wise channel division, delay/Doppler
//! periodogram, peak interpolation.

use num_complex::Complex;
use rustfft::FftPlanner;

use super::waveform::{Grid, WaveformConfig};
use super::PhyError;
use crate::num::Scalar;

/// Range/velocity read off the 2D periodogram peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensingEstimate<T> {
    pub range_m: T,
    pub velocity_mps: T,
    pub peak_to_sidelobe_db: T,
    /// Resource elements skipped by the division guard (zero transmitted
    /// symbol). Zero for every valid frame.
    pub excluded_elements: usize,
}

/// Code-domain denoising for CD-OFDM sensing: every Lf x Lt tile of the
/// channel quotient is despread against the known chips and re-spread, which
/// coherently averages the tile and nulls co-channel energy carried on
/// orthogonal Hadamard rows. With unit spreading this is the identity.
pub fn despread_denoise<T: Scalar>(
    received: &Grid<T>,
    transmitted: &Grid<T>,
    config: &WaveformConfig<T>,
) -> Grid<T> {
    let (num_symbols, num_subcarriers) = config.grid_dims();
    debug_assert_eq!(received.dims(), config.grid_dims());
    debug_assert_eq!(transmitted.dims(), config.grid_dims());
    let lf = config.spread_freq;
    let lt = config.spread_time;
    let order = T::of((lf * lt) as f64);
    let mut out = Grid::zeroed(num_symbols, num_subcarriers);
    for tile_t in 0..num_symbols / lt {
        for tile_f in 0..num_subcarriers / lf {
            let mut acc = Complex::new(T::zero(), T::zero());
            for dt in 0..lt {
                for df in 0..lf {
                    let m = tile_t * lt + dt;
                    let n = tile_f * lf + df;
                    acc += received.get(m, n) * transmitted.get(m, n).conj();
                }
            }
            let mean = acc / order;
            for dt in 0..lt {
                for df in 0..lf {
                    let m = tile_t * lt + dt;
                    let n = tile_f * lf + df;
                    *out.get_mut(m, n) = mean * transmitted.get(m, n);
                }
            }
        }
    }
    out
}

/// Estimate target range and radial velocity from a received echo grid and
/// the known transmitted grid (monostatic operation).
///
/// Pipeline: element-wise divide received by transmitted, inverse transform
/// along subcarriers for the delay profile, forward transform along symbols
/// for the Doppler profile, locate the 2D power peak inside the cyclic-prefix
/// delay window, then refine both coordinates with 3-point parabolic
/// interpolation.
pub fn estimate_range_velocity<T: Scalar>(
    received: &Grid<T>,
    transmitted: &Grid<T>,
    config: &WaveformConfig<T>,
) -> Result<SensingEstimate<T>, PhyError> {
    config.validate()?;
    if received.dims() != config.grid_dims() || transmitted.dims() != config.grid_dims() {
        return Err(PhyError::GridMismatch {
            expected: config.grid_dims(),
            got: received.dims(),
        });
    }
    let (num_symbols, num_subcarriers) = config.grid_dims();

    // Channel quotient with the division guard: a zero transmitted element
    // carries no channel information and is excluded from the profile.
    let mut quotient = Grid::zeroed(num_symbols, num_subcarriers);
    let mut excluded = 0usize;
    let tiny = T::of(1e-30);
    for m in 0..num_symbols {
        for n in 0..num_subcarriers {
            let x = transmitted.get(m, n);
            if x.norm_sqr() < tiny {
                excluded += 1;
            } else {
                *quotient.get_mut(m, n) = received.get(m, n) / x;
            }
        }
    }

    let mut planner = FftPlanner::<T>::new();
    let delay_fft = planner.plan_fft_inverse(num_subcarriers);
    let doppler_fft = planner.plan_fft_forward(num_symbols);

    // Delay profile per symbol.
    for m in 0..num_symbols {
        let start = m * num_subcarriers;
        delay_fft.process(&mut quotient.as_mut_slice()[start..start + num_subcarriers]);
    }
    // Doppler profile per delay bin.
    let mut column = vec![Complex::new(T::zero(), T::zero()); num_symbols];
    #[allow(clippy::needless_range_loop)]
    for n in 0..num_subcarriers {
        for m in 0..num_symbols {
            column[m] = quotient.get(m, n);
        }
        doppler_fft.process(&mut column);
        for m in 0..num_symbols {
            *quotient.get_mut(m, n) = column[m];
        }
    }

    // Peak search restricted to delays that fit inside the cyclic prefix.
    let max_delay_bin = config.cp_samples.min(num_subcarriers - 1);
    let mut peak = (0usize, 0usize);
    let mut peak_power = T::neg_infinity();
    for l in 0..num_symbols {
        for k in 0..=max_delay_bin {
            let p = quotient.get(l, k).norm_sqr();
            if p > peak_power {
                peak_power = p;
                peak = (l, k);
            }
        }
    }
    let (peak_l, peak_k) = peak;

    // 3-point parabolic interpolation on the magnitude, wrapped axes.
    let mag = |l: usize, k: usize| quotient.get(l, k).norm();
    let delay_delta = parabolic_delta(
        mag(peak_l, (peak_k + num_subcarriers - 1) % num_subcarriers),
        mag(peak_l, peak_k),
        mag(peak_l, (peak_k + 1) % num_subcarriers),
    );
    let doppler_delta = parabolic_delta(
        mag((peak_l + num_symbols - 1) % num_symbols, peak_k),
        mag(peak_l, peak_k),
        mag((peak_l + 1) % num_symbols, peak_k),
    );

    let range_bin = T::of(peak_k as f64) + delay_delta;
    let range_m = (range_bin * config.range_bin_m())
        .max(T::zero())
        .min(config.unambiguous_range_m());

    let half = num_symbols / 2;
    let signed_l =
        if peak_l <= half { peak_l as f64 } else { peak_l as f64 - num_symbols as f64 };
    let doppler_bin = T::of(signed_l) + doppler_delta;
    let velocity_mps = doppler_bin * config.velocity_bin_mps();

    // Peak-to-sidelobe over the searched delay window, excluding the
    // mainlobe neighborhood (+/- 2 bins on each axis, Doppler wrapped).
    let mut max_sidelobe = T::zero();
    for l in 0..num_symbols {
        let dl = (l as i64 - peak_l as i64).rem_euclid(num_symbols as i64);
        let dl = dl.min(num_symbols as i64 - dl);
        for k in 0..=max_delay_bin {
            let dk = (k as i64 - peak_k as i64).abs();
            if dl <= 2 && dk <= 2 {
                continue;
            }
            let p = quotient.get(l, k).norm_sqr();
            if p > max_sidelobe {
                max_sidelobe = p;
            }
        }
    }
    let peak_to_sidelobe_db = if max_sidelobe > T::zero() {
        T::of(10.0) * (peak_power / max_sidelobe).log10()
    } else {
        T::infinity()
    };

    Ok(SensingEstimate { range_m, velocity_mps, peak_to_sidelobe_db, excluded_elements: excluded })
}

/// Sub-bin offset of a parabola fitted through (left, center, right).
fn parabolic_delta<T: Scalar>(left: T, center: T, right: T) -> T {
    let denom = left - T::of(2.0) * center + right;
    if denom.abs() < T::of(1e-30) {
        T::zero()
    } else {
        T::of(0.5) * (left - right) / denom
    }
}
