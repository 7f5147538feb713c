//! Joint communication-and-sensing PHY: plain OFDM and CD-OFDM frames,
//! comm/echo channels, the FFT radar pipeline and the BER/RMSE sweeps.

mod channel;
mod radar;
mod spread;
mod sweep;
mod waveform;

pub use channel::{apply_comm_channel, apply_echo_channel, EchoInterference, PointTarget};
pub use radar::{despread_denoise, estimate_range_velocity, SensingEstimate};
pub use spread::{despread_tiles, hadamard_sign, spreading_row_inner_product};
pub use sweep::{run_ber_sweep, run_rmse_sweep, SensingScenario};
pub use waveform::{
    demodulate, demodulate_with_reference, freq_grid_from_time, modulate, random_payload,
    FrameGrid, Grid, WaveformConfig, WaveformMode,
};

use thiserror::Error;

/// Propagation speed used for all range/Doppler conversions, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Error, PartialEq)]
pub enum PhyError {
    #[error("invalid waveform config: {0}")]
    InvalidConfig(String),
    #[error("bit count mismatch: expected {expected}, got {got}")]
    BitCountMismatch { expected: usize, got: usize },
    #[error("grid dimensions {got:?} do not match config {expected:?}")]
    GridMismatch { expected: (usize, usize), got: (usize, usize) },
    #[error("target at {range_m} m exceeds the unambiguous range {max_m} m")]
    TargetBeyondUnambiguousRange { range_m: f64, max_m: f64 },
    #[error("empty SNR sweep list")]
    EmptySweep,
    #[error("{0}")]
    InvalidScenario(String),
}
