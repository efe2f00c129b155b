//! Minimal iterative radix-2 FFT.
//!
//! Grid sizes in this crate are powers of two by contract, so a plain
//! Cooley–Tukey butterfly is all we need; keeping it local avoids an `std`
//! dependency in the transform path.

use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

/// In-place forward DFT, unnormalized: `X_k = Σ_j x_j e^{-2πi jk/n}`.
pub fn fft(buf: &mut [Complex64]) {
    transform(buf, -1.0);
}

/// In-place inverse DFT including the 1/n factor.
pub fn ifft(buf: &mut [Complex64]) {
    transform(buf, 1.0);
    let scale = 1.0 / buf.len() as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

fn transform(buf: &mut [Complex64], sign: f64) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    // bit-reversal permutation
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let ang = sign * crate::TAU / len as f64;
        let wlen = Complex64::new(ang.cos(), ang.sin());
        let mut i = 0;
        while i < n {
            let mut w = Complex64::new(1.0, 0.0);
            for k in 0..len / 2 {
                let u = buf[i + k];
                let v = buf[i + k + len / 2] * w;
                buf[i + k] = u + v;
                buf[i + k + len / 2] = u - v;
                w *= wlen;
            }
            i += len;
        }
        len <<= 1;
    }
}

/// Forward DFT of a real signal.
pub fn fft_real(values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft(&mut buf);
    buf
}

/// Real part of the inverse DFT (input assumed conjugate-symmetric).
pub fn ifft_real(spectrum: &[Complex64]) -> Vec<f64> {
    let mut buf: Vec<Complex64> = spectrum.to_vec();
    ifft(&mut buf);
    buf.iter().map(|c| c.re).collect()
}

/// Signed wavenumber of bin `k` on an `n`-point grid: `0, 1, …, n/2, −n/2+1, …, −1`.
pub fn wavenumber(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}
