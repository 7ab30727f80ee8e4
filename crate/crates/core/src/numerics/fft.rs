//! DFT/FFT with the sign and scaling conventions used throughout:
//! forward transform `X(mu) = sum_k x(k) exp(-j 2 pi mu k / len)` with no
//! scaling, inverse transform applies `1/len`.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn check_finite(x: &[Complex64]) -> Result<()> {
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("fft input"));
    }
    Ok(())
}

/// Forward DFT, any length.
pub fn fft(x: &[Complex64]) -> Result<Vec<Complex64>> {
    check_finite(x)?;
    let mut buf = x.to_vec();
    fft_in_place(&mut buf);
    Ok(buf)
}

/// Forward DFT in place, no finiteness check.
pub fn fft_in_place(buf: &mut [Complex64]) {
    if buf.is_empty() {
        return;
    }
    PLANNER.with(|p| {
        let fft = p.borrow_mut().plan_fft_forward(buf.len());
        fft.process(buf);
    });
}

/// Inverse DFT, any length, scaled by `1/len`.
pub fn ifft(x: &[Complex64]) -> Result<Vec<Complex64>> {
    check_finite(x)?;
    let mut buf = x.to_vec();
    if buf.is_empty() {
        return Ok(buf);
    }
    PLANNER.with(|p| {
        let fft = p.borrow_mut().plan_fft_inverse(buf.len());
        fft.process(&mut buf);
    });
    let scale = 1.0 / buf.len() as f64;
    for z in buf.iter_mut() {
        *z *= scale;
    }
    Ok(buf)
}
