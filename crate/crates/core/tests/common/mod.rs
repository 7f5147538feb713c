//! Closed-form oracles shared by the integration tests. These stay
//! independent of the library's own signal path.
#![allow(dead_code)]

/// Gaussian tail probability Q(x) via an erfc approximation with absolute
/// error below 1.5e-7 (Abramowitz-Stegun 7.1.26 family).
pub fn q_function(x: f64) -> f64 {
    let z = (x / std::f64::consts::SQRT_2).abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let tau = t
        * (-z * z - 1.26551223
            + t * (1.00002368
                + t * (0.37409196
                    + t * (0.09678418
                        + t * (-0.18628806
                            + t * (0.27886807
                                + t * (-1.13520398
                                    + t * (1.48851587 + t * (-0.82215223 + t * 0.17087277)))))))))
        .exp();
    let erfc = if x >= 0.0 { tau } else { 2.0 - tau };
    0.5 * erfc
}

/// Theoretical QPSK bit error rate over AWGN at a per-resource-element SNR
/// (Es/N0) expressed linearly: Q(sqrt(snr)).
pub fn qpsk_ber_at_per_re_snr(snr_linear: f64) -> f64 {
    q_function(snr_linear.sqrt())
}

/// Axis value where log10(y) crosses log10(level), linear interpolation.
pub fn crossing(points: &[(f64, f64)], level: f64) -> Option<f64> {
    let target = level.log10();
    let pts: Vec<(f64, f64)> =
        points.iter().filter(|(_, v)| *v > 0.0).map(|&(x, v)| (x, v.log10())).collect();
    for pair in pts.windows(2) {
        let (x0, y0) = pair[0];
        let (x1, y1) = pair[1];
        if (y0 - target) * (y1 - target) <= 0.0 && y0 != y1 {
            return Some(x0 + (target - y0) / (y1 - y0) * (x1 - x0));
        }
    }
    None
}

#[allow(dead_code)]
pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}
