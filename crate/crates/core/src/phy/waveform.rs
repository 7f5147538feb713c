//! OFDM numerology, the frequency-domain frame grid, and QPSK
//! modulation/demodulation with optional Hadamard spreading.

use num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::spread::{despread_tiles, spread_symbols};
use super::{PhyError, SPEED_OF_LIGHT};
use crate::num::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveformMode {
    PlainOfdm,
    CdOfdm,
}

impl WaveformMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            WaveformMode::PlainOfdm => "plain_ofdm",
            WaveformMode::CdOfdm => "cd_ofdm",
        }
    }
}

/// OFDM numerology plus the spreading layout.
///
/// The baseline operates at 24 GHz carrier with 122.88 MHz bandwidth,
/// N = 2048 subcarriers (60 kHz spacing) and a 144-sample cyclic prefix.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WaveformConfig<T> {
    pub carrier_hz: T,
    pub bandwidth_hz: T,
    pub num_subcarriers: usize,
    pub cp_samples: usize,
    pub num_symbols: usize,
    pub mode: WaveformMode,
    /// Spreading length across subcarriers (1 in plain mode).
    pub spread_freq: usize,
    /// Spreading length across OFDM symbols (1 in plain mode).
    pub spread_time: usize,
}

impl<T: Scalar> WaveformConfig<T> {
    pub fn baseline(mode: WaveformMode) -> Self {
        let (spread_freq, spread_time) = match mode {
            WaveformMode::PlainOfdm => (1, 1),
            WaveformMode::CdOfdm => (64, 16),
        };
        Self {
            carrier_hz: T::of(24.0e9),
            bandwidth_hz: T::of(122.88e6),
            num_subcarriers: 2048,
            cp_samples: 144,
            num_symbols: 16,
            mode,
            spread_freq,
            spread_time,
        }
    }

    // negated comparisons double as NaN rejection on config input
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), PhyError> {
        if !(self.carrier_hz > T::zero()) || !(self.bandwidth_hz > T::zero()) {
            return Err(PhyError::InvalidConfig("carrier and bandwidth must be positive".into()));
        }
        if self.num_subcarriers == 0 || self.num_symbols == 0 {
            return Err(PhyError::InvalidConfig("grid dimensions must be positive".into()));
        }
        if self.cp_samples > self.num_subcarriers {
            return Err(PhyError::InvalidConfig(format!(
                "cp_samples = {} cannot exceed num_subcarriers = {}",
                self.cp_samples, self.num_subcarriers
            )));
        }
        match self.mode {
            WaveformMode::PlainOfdm => {
                if self.spread_freq != 1 || self.spread_time != 1 {
                    return Err(PhyError::InvalidConfig(
                        "plain_ofdm requires spread_freq = spread_time = 1".into(),
                    ));
                }
            }
            WaveformMode::CdOfdm => {
                if !self.spread_freq.is_power_of_two() || !self.spread_time.is_power_of_two() {
                    return Err(PhyError::InvalidConfig(format!(
                        "spreading lengths must be powers of two (Hadamard codes exist), got \
                         spread_freq = {}, spread_time = {}",
                        self.spread_freq, self.spread_time
                    )));
                }
                if !self.num_subcarriers.is_multiple_of(self.spread_freq) {
                    return Err(PhyError::InvalidConfig(format!(
                        "spread_freq = {} must divide num_subcarriers = {}",
                        self.spread_freq, self.num_subcarriers
                    )));
                }
                if !self.num_symbols.is_multiple_of(self.spread_time) {
                    return Err(PhyError::InvalidConfig(format!(
                        "spread_time = {} must divide num_symbols = {}",
                        self.spread_time, self.num_symbols
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn subcarrier_spacing_hz(&self) -> T {
        self.bandwidth_hz / T::of(self.num_subcarriers as f64)
    }

    /// OFDM symbol duration including the cyclic prefix, seconds.
    pub fn symbol_duration_s(&self) -> T {
        T::of((self.num_subcarriers + self.cp_samples) as f64) / self.bandwidth_hz
    }

    /// Delay-bin width of the radar profile, meters.
    pub fn range_bin_m(&self) -> T {
        T::of(SPEED_OF_LIGHT) / (T::of(2.0) * self.bandwidth_hz)
    }

    /// Largest target range whose round-trip delay fits inside the cyclic
    /// prefix, meters.
    pub fn unambiguous_range_m(&self) -> T {
        self.range_bin_m() * T::of(self.cp_samples as f64)
    }

    /// Doppler-bin width of the radar profile expressed as radial velocity,
    /// m/s.
    pub fn velocity_bin_mps(&self) -> T {
        let frame_span = self.symbol_duration_s() * T::of(self.num_symbols as f64);
        T::of(SPEED_OF_LIGHT) / (T::of(2.0) * self.carrier_hz * frame_span)
    }

    pub fn spreading_order(&self) -> usize {
        self.spread_freq * self.spread_time
    }

    /// Payload of one frame: two bits per QPSK symbol after spreading.
    pub fn frame_bits(&self) -> usize {
        2 * (self.num_symbols / self.spread_time) * (self.num_subcarriers / self.spread_freq)
    }

    pub fn grid_dims(&self) -> (usize, usize) {
        (self.num_symbols, self.num_subcarriers)
    }
}

/// Row-major complex matrix: rows are OFDM symbols, columns subcarriers.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    symbols: usize,
    subcarriers: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> Grid<T> {
    pub fn zeroed(symbols: usize, subcarriers: usize) -> Self {
        Self {
            symbols,
            subcarriers,
            data: vec![Complex::new(T::zero(), T::zero()); symbols * subcarriers],
        }
    }

    pub fn symbols(&self) -> usize {
        self.symbols
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.symbols, self.subcarriers)
    }

    #[inline]
    pub fn get(&self, m: usize, n: usize) -> Complex<T> {
        self.data[m * self.subcarriers + n]
    }

    #[inline]
    pub fn get_mut(&mut self, m: usize, n: usize) -> &mut Complex<T> {
        &mut self.data[m * self.subcarriers + n]
    }

    pub fn row(&self, m: usize) -> &[Complex<T>] {
        &self.data[m * self.subcarriers..(m + 1) * self.subcarriers]
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn energy(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr())
    }
}

/// One transmitted frame: payload bits plus the frequency-domain grid that
/// carries them. Time samples are synthesized on demand.
#[derive(Debug, Clone)]
pub struct FrameGrid<T> {
    pub data_bits: Vec<bool>,
    pub freq_symbols: Grid<T>,
}

impl<T: Scalar> FrameGrid<T> {
    /// Per-symbol inverse DFT of the grid with the cyclic prefix prepended.
    /// Unitary scaling, so grid and symbol-body energies match.
    pub fn time_samples(&self, config: &WaveformConfig<T>) -> Vec<Complex<T>> {
        let n = config.num_subcarriers;
        let cp = config.cp_samples;
        let mut planner = FftPlanner::<T>::new();
        let ifft = planner.plan_fft_inverse(n);
        let scale = T::of(1.0 / (n as f64).sqrt());
        let mut out = Vec::with_capacity(config.num_symbols * (n + cp));
        let mut buf = vec![Complex::new(T::zero(), T::zero()); n];
        for m in 0..config.num_symbols {
            buf.copy_from_slice(self.freq_symbols.row(m));
            ifft.process(&mut buf);
            for c in buf.iter_mut() {
                *c *= scale;
            }
            out.extend_from_slice(&buf[n - cp..]);
            out.extend_from_slice(&buf);
        }
        out
    }
}

/// Re-transform a cyclic-prefixed sample stream back to the frequency grid
/// (unitary forward DFT per symbol body). Used by round-trip checks.
pub fn freq_grid_from_time<T: Scalar>(
    samples: &[Complex<T>],
    config: &WaveformConfig<T>,
) -> Result<Grid<T>, PhyError> {
    let n = config.num_subcarriers;
    let cp = config.cp_samples;
    let per_symbol = n + cp;
    if samples.len() != config.num_symbols * per_symbol {
        return Err(PhyError::GridMismatch {
            expected: (config.num_symbols, per_symbol),
            got: (samples.len() / per_symbol.max(1), per_symbol),
        });
    }
    let mut planner = FftPlanner::<T>::new();
    let fft = planner.plan_fft_forward(n);
    let scale = T::of(1.0 / (n as f64).sqrt());
    let mut grid = Grid::zeroed(config.num_symbols, n);
    let mut buf = vec![Complex::new(T::zero(), T::zero()); n];
    for m in 0..config.num_symbols {
        let body = &samples[m * per_symbol + cp..(m + 1) * per_symbol];
        buf.copy_from_slice(body);
        fft.process(&mut buf);
        for (dst, c) in grid.as_mut_slice()[m * n..(m + 1) * n].iter_mut().zip(buf.iter()) {
            *dst = *c * scale;
        }
    }
    Ok(grid)
}

/// Gray-mapped QPSK point for a bit pair, unit power.
#[inline]
fn qpsk_symbol<T: Scalar>(b_i: bool, b_q: bool) -> Complex<T> {
    let half = T::of(std::f64::consts::FRAC_1_SQRT_2);
    let re = if b_i { -half } else { half };
    let im = if b_q { -half } else { half };
    Complex::new(re, im)
}

#[inline]
fn qpsk_decide<T: Scalar>(c: Complex<T>) -> (bool, bool) {
    (c.re < T::zero(), c.im < T::zero())
}

/// Map payload bits onto the frequency grid. In `cd_ofdm` mode every QPSK
/// symbol is spread over one Lf x Lt tile by a Hadamard row; every resource
/// element carries unit average power in both modes.
pub fn modulate<T: Scalar>(
    bits: &[bool],
    config: &WaveformConfig<T>,
) -> Result<FrameGrid<T>, PhyError> {
    config.validate()?;
    let expected = config.frame_bits();
    if bits.len() != expected {
        return Err(PhyError::BitCountMismatch { expected, got: bits.len() });
    }
    let symbols: Vec<Complex<T>> =
        bits.chunks_exact(2).map(|pair| qpsk_symbol(pair[0], pair[1])).collect();
    let freq_symbols = spread_symbols(&symbols, config, 0);
    Ok(FrameGrid { data_bits: bits.to_vec(), freq_symbols })
}

/// Recover payload bits from a received grid: despread each tile against its
/// Hadamard row, then take QPSK hard decisions. No reference frame needed.
pub fn demodulate<T: Scalar>(
    received: &Grid<T>,
    config: &WaveformConfig<T>,
) -> Result<Vec<bool>, PhyError> {
    config.validate()?;
    if received.dims() != config.grid_dims() {
        return Err(PhyError::GridMismatch {
            expected: config.grid_dims(),
            got: received.dims(),
        });
    }
    let symbols = despread_tiles(received, config);
    let mut bits = Vec::with_capacity(config.frame_bits());
    for sym in symbols {
        let (b_i, b_q) = qpsk_decide(sym);
        bits.push(b_i);
        bits.push(b_q);
    }
    Ok(bits)
}

/// Demodulate and score against the transmitted frame: returns the decided
/// bits and the bit error rate.
pub fn demodulate_with_reference<T: Scalar>(
    received: &Grid<T>,
    reference: &FrameGrid<T>,
    config: &WaveformConfig<T>,
) -> Result<(Vec<bool>, f64), PhyError> {
    let bits = demodulate(received, config)?;
    if bits.len() != reference.data_bits.len() {
        return Err(PhyError::BitCountMismatch {
            expected: reference.data_bits.len(),
            got: bits.len(),
        });
    }
    let errors = bits.iter().zip(&reference.data_bits).filter(|(a, b)| a != b).count();
    let ber = errors as f64 / bits.len() as f64;
    Ok((bits, ber))
}

/// Test-friendly random payload for a config.
pub fn random_payload<T: Scalar>(
    config: &WaveformConfig<T>,
    rng: &mut crate::rng::TrialRng,
) -> Vec<bool> {
    (0..config.frame_bits()).map(|_| rng.next_u64() & 1 == 1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngHandle;

    fn small_plain() -> WaveformConfig<f64> {
        WaveformConfig {
            carrier_hz: 24.0e9,
            bandwidth_hz: 122.88e6,
            num_subcarriers: 64,
            cp_samples: 8,
            num_symbols: 4,
            mode: WaveformMode::PlainOfdm,
            spread_freq: 1,
            spread_time: 1,
        }
    }

    fn small_cd(spread_freq: usize, spread_time: usize) -> WaveformConfig<f64> {
        WaveformConfig {
            mode: WaveformMode::CdOfdm,
            spread_freq,
            spread_time,
            ..small_plain()
        }
    }

    #[test]
    fn all_zero_bits_map_to_first_quadrant() {
        let config = small_plain();
        let frame = modulate(&vec![false; config.frame_bits()], &config).unwrap();
        let expected = Complex::new(std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2);
        for m in 0..config.num_symbols {
            for n in 0..config.num_subcarriers {
                let c = frame.freq_symbols.get(m, n);
                assert!((c - expected).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn unit_power_per_resource_element() {
        for config in [small_plain(), small_cd(4, 2)] {
            let mut rng = RngHandle::new(8, 0).rng();
            let bits = random_payload(&config, &mut rng);
            let frame = modulate(&bits, &config).unwrap();
            for c in frame.freq_symbols.as_slice() {
                assert!((c.norm_sqr() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bit_count_mismatch_rejected() {
        let config = small_plain();
        let err = modulate(&[false; 3], &config).unwrap_err();
        assert!(matches!(err, PhyError::BitCountMismatch { .. }));
    }

    #[test]
    fn non_power_of_two_spreading_rejected() {
        let mut config = small_cd(3, 1);
        config.spread_freq = 3;
        let err = config.validate().unwrap_err();
        match err {
            PhyError::InvalidConfig(msg) => assert!(msg.contains("powers of two"), "{msg}"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn plain_mode_requires_unit_spreading() {
        let mut config = small_plain();
        config.spread_freq = 2;
        assert!(config.validate().is_err());
    }

    #[test]
    fn oversized_cyclic_prefix_rejected() {
        let mut config = small_plain();
        config.cp_samples = config.num_subcarriers + 1;
        assert!(config.validate().is_err());
    }

    #[test]
    fn noiseless_round_trip_recovers_bits() {
        for config in [small_plain(), small_cd(4, 2), small_cd(8, 4)] {
            let mut rng = RngHandle::new(21, 0).rng();
            let bits = random_payload(&config, &mut rng);
            let frame = modulate(&bits, &config).unwrap();
            let (decoded, ber) =
                demodulate_with_reference(&frame.freq_symbols, &frame, &config).unwrap();
            assert_eq!(decoded, bits);
            assert_eq!(ber, 0.0);
        }
    }

    #[test]
    fn transform_round_trip_and_parseval() {
        for config in [small_plain(), small_cd(8, 2)] {
            let mut rng = RngHandle::new(33, 0).rng();
            let bits = random_payload(&config, &mut rng);
            let frame = modulate(&bits, &config).unwrap();
            let time = frame.time_samples(&config);
            assert_eq!(
                time.len(),
                config.num_symbols * (config.num_subcarriers + config.cp_samples)
            );
            let back = freq_grid_from_time(&time, &config).unwrap();

            let mut num = 0.0;
            let mut den = 0.0;
            for (a, b) in back.as_slice().iter().zip(frame.freq_symbols.as_slice()) {
                num += (a - b).norm_sqr();
                den += b.norm_sqr();
            }
            assert!((num / den).sqrt() < 1e-9, "round-trip rel error {}", (num / den).sqrt());

            // Parseval over the symbol bodies (cyclic prefix repeats samples
            // and is excluded from the energy count).
            let per_symbol = config.num_subcarriers + config.cp_samples;
            let mut body_energy = 0.0;
            for m in 0..config.num_symbols {
                for c in &time[m * per_symbol + config.cp_samples..(m + 1) * per_symbol] {
                    body_energy += c.norm_sqr();
                }
            }
            let freq_energy = frame.freq_symbols.energy();
            assert!(
                ((body_energy - freq_energy) / freq_energy).abs() < 1e-9,
                "parseval: time {body_energy} vs freq {freq_energy}"
            );
        }
    }

    #[test]
    fn f32_pipeline_round_trips() {
        let config = WaveformConfig::<f32> {
            carrier_hz: 24.0e9,
            bandwidth_hz: 122.88e6,
            num_subcarriers: 32,
            cp_samples: 4,
            num_symbols: 2,
            mode: WaveformMode::CdOfdm,
            spread_freq: 4,
            spread_time: 2,
        };
        let mut rng = RngHandle::new(3, 0).rng();
        let bits: Vec<bool> = (0..config.frame_bits()).map(|_| rng.next_u64() & 1 == 1).collect();
        let frame = modulate(&bits, &config).unwrap();
        let decoded = demodulate(&frame.freq_symbols, &config).unwrap();
        assert_eq!(decoded, bits);
    }
}
