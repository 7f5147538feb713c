//! Walsh-Hadamard tile spreading for CD-OFDM.
//!
//! Each data symbol occupies one Lf x Lt tile of the subcarrier-symbol grid
//! and is multiplied by one row of the order Lf*Lt Hadamard matrix, so
//! despreading coherently combines L = Lf*Lt unit-power chips.

use num_complex::Complex;

use super::waveform::{Grid, WaveformConfig};
use crate::num::Scalar;

/// Entry (row, col) of the naturally ordered Hadamard matrix: the parity of
/// `popcount(row & col)` gives the sign.
#[inline]
pub fn hadamard_sign(row: usize, col: usize) -> i8 {
    if (row & col).count_ones() & 1 == 0 {
        1
    } else {
        -1
    }
}

/// Inner product of two Hadamard rows of the given order; zero for distinct
/// rows, `order` on the diagonal.
pub fn spreading_row_inner_product(order: usize, row_a: usize, row_b: usize) -> i64 {
    (0..order).map(|c| (hadamard_sign(row_a, c) as i64) * (hadamard_sign(row_b, c) as i64)).sum()
}

/// Spreading-code row used by tile `tile_index`. `code_offset` lets an
/// interfering transmitter occupy a disjoint row on every tile.
#[inline]
pub fn tile_row(tile_index: usize, order: usize, code_offset: usize) -> usize {
    (tile_index + code_offset) % order
}

pub(crate) struct TileLayout {
    pub spread_freq: usize,
    pub spread_time: usize,
    pub tiles_freq: usize,
    pub tiles_time: usize,
}

impl TileLayout {
    pub fn of<T: Scalar>(config: &WaveformConfig<T>) -> Self {
        Self {
            spread_freq: config.spread_freq,
            spread_time: config.spread_time,
            tiles_freq: config.num_subcarriers / config.spread_freq,
            tiles_time: config.num_symbols / config.spread_time,
        }
    }

    pub fn order(&self) -> usize {
        self.spread_freq * self.spread_time
    }

    pub fn tile_count(&self) -> usize {
        self.tiles_freq * self.tiles_time
    }
}

/// Expand one symbol per tile into unit-power chips. Writes walk the grid
/// row-major so large tiles stay cache-friendly.
pub(crate) fn spread_symbols<T: Scalar>(
    symbols: &[Complex<T>],
    config: &WaveformConfig<T>,
    code_offset: usize,
) -> Grid<T> {
    let layout = TileLayout::of(config);
    debug_assert_eq!(symbols.len(), layout.tile_count());
    let mut grid = Grid::zeroed(config.num_symbols, config.num_subcarriers);
    let order = layout.order();
    let lf = layout.spread_freq;
    let lt = layout.spread_time;
    let tiles_freq = layout.tiles_freq;
    for m in 0..config.num_symbols {
        let tile_t = m / lt;
        let dt = m % lt;
        let row_out = &mut grid.as_mut_slice()[m * config.num_subcarriers..(m + 1) * config.num_subcarriers];
        for tile_f in 0..tiles_freq {
            let tile_index = tile_t * tiles_freq + tile_f;
            let code_row = tile_row(tile_index, order, code_offset);
            let sym = symbols[tile_index];
            let neg = -sym;
            for df in 0..lf {
                let sign = hadamard_sign(code_row, dt * lf + df);
                row_out[tile_f * lf + df] = if sign > 0 { sym } else { neg };
            }
        }
    }
    grid
}

/// Correlate every tile against its own spreading row, coherently combining
/// L chips back into one symbol estimate per tile. Reads walk the grid
/// row-major.
pub fn despread_tiles<T: Scalar>(grid: &Grid<T>, config: &WaveformConfig<T>) -> Vec<Complex<T>> {
    let layout = TileLayout::of(config);
    let order = layout.order();
    let scale = T::of(1.0 / order as f64);
    let lf = layout.spread_freq;
    let lt = layout.spread_time;
    let tiles_freq = layout.tiles_freq;
    let zero = Complex::new(T::zero(), T::zero());
    let mut symbols = vec![zero; layout.tile_count()];
    for m in 0..config.num_symbols {
        let tile_t = m / lt;
        let dt = m % lt;
        let row_in = grid.row(m);
        for tile_f in 0..tiles_freq {
            let tile_index = tile_t * tiles_freq + tile_f;
            let code_row = tile_row(tile_index, order, 0);
            let mut acc = zero;
            for df in 0..lf {
                let c = row_in[tile_f * lf + df];
                acc += if hadamard_sign(code_row, dt * lf + df) > 0 { c } else { -c };
            }
            symbols[tile_index] += acc;
        }
    }
    for s in &mut symbols {
        *s *= scale;
    }
    symbols
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distinct_rows_are_orthogonal() {
        for order in [2usize, 4, 16, 64] {
            for a in 0..order.min(8) {
                for b in 0..order.min(8) {
                    let ip = spreading_row_inner_product(order, a, b);
                    if a == b {
                        assert_eq!(ip, order as i64);
                    } else {
                        assert_eq!(ip, 0, "order {order}, rows {a},{b}");
                    }
                }
            }
        }
    }

    #[test]
    fn hadamard_row_zero_is_all_ones() {
        for c in 0..64 {
            assert_eq!(hadamard_sign(0, c), 1);
        }
    }
}
