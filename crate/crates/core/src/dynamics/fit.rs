//! Oscillation-frequency estimation from uniformly sampled traces.

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillationFit {
    pub frequency_mhz: f64,
    /// Half the distance between the -3 dB points of the power spectrum.
    pub error_mhz: f64,
}

const MIN_PADDED_LEN: usize = 1 << 16;

/// Dominant oscillation frequency of `values` sampled at `times` (ns).
///
/// Mean-subtracted, zero-padded FFT; the peak bin is refined by a parabola
/// through its neighbours.
pub fn fit_oscillation(times: &[f64], values: &[f64]) -> Result<OscillationFit> {
    if times.len() != values.len() {
        return Err(Error::InvalidArgument("times and values differ in length".into()));
    }
    if times.len() < 8 {
        return Err(Error::InvalidArgument("need at least 8 samples to fit".into()));
    }
    let dt = times[1] - times[0];
    if dt <= 0.0 || times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(1.0)) {
        return Err(Error::InvalidArgument("samples must be uniformly spaced".into()));
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let len = (n * 64).next_power_of_two().max(MIN_PADDED_LEN);
    let mut buf: Vec<Complex<f64>> = values.iter().map(|v| Complex::new(v - mean, 0.0)).collect();
    buf.resize(len, Complex::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);

    let power: Vec<f64> = buf[..len / 2].iter().map(|z| z.norm_sqr()).collect();
    let (peak, &p_peak) = power
        .iter()
        .enumerate()
        .skip(1)
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or(Error::Empty("spectrum"))?;
    if p_peak <= 0.0 || peak + 1 >= power.len() {
        return Err(Error::InvalidArgument("trace has no oscillating component".into()));
    }
    let (a, b, c) = (power[peak - 1], p_peak, power[peak + 1]);
    let denom = a - 2.0 * b + c;
    let shift = if denom.abs() > 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    let df = 1.0 / (len as f64 * dt);
    let frequency = (peak as f64 + shift) * df;

    let half = p_peak / 2.0;
    let mut lo = peak;
    while lo > 0 && power[lo] > half {
        lo -= 1;
    }
    let mut hi = peak;
    while hi + 1 < power.len() && power[hi] > half {
        hi += 1;
    }
    let crossing = |inside: usize, outside: usize| {
        let (pi, po) = (power[inside], power[outside]);
        let t = if pi != po { (pi - half) / (pi - po) } else { 0.0 };
        inside as f64 + t * (outside as f64 - inside as f64)
    };
    let left = crossing(lo + 1, lo);
    let right = crossing(hi - 1, hi);

    Ok(OscillationFit { frequency_mhz: frequency * 1e3, error_mhz: 0.5 * (right - left) * df * 1e3 })
}
