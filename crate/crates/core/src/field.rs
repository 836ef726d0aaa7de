//! Real periodic fields on a uniform grid, kept in both physical and
//! Fourier representation.
//!
//! Conventions: on the torus `[0, L)` with `N` samples, the stored
//! coefficients satisfy `f(y_i) = sum_k coeffs[k] * exp(i xi_k y_i)` with
//! `xi_k = 2 pi ktilde / L` and `ktilde` the signed index. `coeffs[0]` is the
//! mean of the field. Conjugate symmetry is enforced whenever a field is
//! rebuilt from coefficients, so fields are real by construction.
//!
//! ```
//! use lagns_core::SpectralField;
//! use std::f64::consts::PI;
//!
//! let f = SpectralField::from_fn(64, 2.0 * PI, |y| 0.5 + y.sin());
//! assert!((f.mean() - 0.5).abs() < 1e-14);
//! let back = f.derivative().antiderivative_zero_mean(1e-10).unwrap();
//! assert!(back.max_abs_diff(&f.map_samples(|x| x - 0.5)) < 1e-12);
//! ```

use crate::error::{CoreError, Result};
use crate::fft;
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct SpectralField {
    n: usize,
    length: f64,
    samples: Vec<f64>,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zero(n: usize, length: f64) -> Self {
        assert!(n.is_power_of_two(), "grid size must be a power of two");
        assert!(length > 0.0, "domain length must be positive");
        Self {
            n,
            length,
            samples: vec![0.0; n],
            coeffs: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn from_samples(length: f64, samples: Vec<f64>) -> Self {
        assert!(samples.len().is_power_of_two(), "grid size must be a power of two");
        assert!(length > 0.0, "domain length must be positive");
        let coeffs = fft::forward(&samples);
        Self { n: samples.len(), length, samples, coeffs }
    }

    /// Build from Fourier coefficients; conjugate symmetry is enforced so the
    /// result is exactly real.
    pub fn from_coeffs(length: f64, mut coeffs: Vec<Complex64>) -> Self {
        let n = coeffs.len();
        assert!(n.is_power_of_two(), "grid size must be a power of two");
        assert!(length > 0.0, "domain length must be positive");
        coeffs[0] = Complex64::new(coeffs[0].re, 0.0);
        if n > 1 {
            coeffs[n / 2] = Complex64::new(coeffs[n / 2].re, 0.0);
        }
        for k in 1..n / 2 {
            let avg = 0.5 * (coeffs[k] + coeffs[n - k].conj());
            coeffs[k] = avg;
            coeffs[n - k] = avg.conj();
        }
        let samples = fft::inverse_real(&coeffs);
        Self { n, length, samples, coeffs }
    }

    /// Sample a closure on the uniform grid.
    pub fn from_fn<F: Fn(f64) -> f64>(n: usize, length: f64, f: F) -> Self {
        let dy = length / n as f64;
        Self::from_samples(length, (0..n).map(|i| f(i as f64 * dy)).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn grid_spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// Signed mode index of coefficient slot `k`.
    pub fn signed_index(&self, k: usize) -> i64 {
        if k <= self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    /// Physical frequency of coefficient slot `k`.
    pub fn xi(&self, k: usize) -> f64 {
        2.0 * PI * self.signed_index(k) as f64 / self.length
    }

    /// Largest frequency kept by the 2/3 dealiasing rule.
    pub fn dealias_cutoff(&self) -> f64 {
        2.0 / 3.0 * PI * self.n as f64 / self.length
    }

    pub fn grid_point(&self, i: usize) -> f64 {
        i as f64 * self.grid_spacing()
    }

    fn assert_compatible(&self, other: &Self) {
        assert_eq!(self.n, other.n, "grid sizes differ");
        assert!(
            (self.length - other.length).abs() <= 1e-9 * self.length.abs(),
            "domain lengths differ"
        );
    }

    /// Spectral derivative; the Nyquist mode is zeroed to keep the result real.
    pub fn derivative(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        for (k, c) in coeffs.iter_mut().enumerate() {
            *c *= Complex64::new(0.0, self.xi(k));
        }
        coeffs[0] = Complex64::new(0.0, 0.0);
        if self.n > 1 {
            coeffs[self.n / 2] = Complex64::new(0.0, 0.0);
        }
        Self::from_coeffs(self.length, coeffs)
    }

    /// Zero-mean spectral antiderivative. Errors unless the mean vanishes to
    /// `tol` (the primitive of a non-mean-free field is not periodic).
    pub fn antiderivative_zero_mean(&self, tol: f64) -> Result<Self> {
        if self.mean().abs() > tol {
            return Err(CoreError::NonzeroMean(self.mean()));
        }
        let mut coeffs = self.coeffs.clone();
        coeffs[0] = Complex64::new(0.0, 0.0);
        if self.n > 1 {
            coeffs[self.n / 2] = Complex64::new(0.0, 0.0);
        }
        for (k, c) in coeffs.iter_mut().enumerate().skip(1) {
            if k == self.n / 2 {
                continue;
            }
            *c /= Complex64::new(0.0, self.xi(k));
        }
        Ok(Self::from_coeffs(self.length, coeffs))
    }

    /// Multiply each coefficient by a real symbol sampled per slot.
    pub fn apply_multiplier(&self, multiplier: &[f64]) -> Self {
        assert_eq!(multiplier.len(), self.n);
        let coeffs = self
            .coeffs
            .iter()
            .zip(multiplier)
            .map(|(c, m)| c * m)
            .collect();
        Self::from_coeffs(self.length, coeffs)
    }

    /// Zero every mode above the 2/3 cutoff.
    pub fn dealiased(&self) -> Self {
        let cut = self.n as i64 / 3;
        let mut coeffs = self.coeffs.clone();
        for (k, c) in coeffs.iter_mut().enumerate() {
            if self.signed_index(k).abs() > cut {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        Self::from_coeffs(self.length, coeffs)
    }

    /// Pointwise product followed by the 2/3 rule.
    pub fn mul_dealiased(&self, other: &Self) -> Self {
        self.mul_plain(other).dealiased()
    }

    /// Pointwise product without dealiasing.
    pub fn mul_plain(&self, other: &Self) -> Self {
        self.assert_compatible(other);
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a * b)
            .collect();
        Self::from_samples(self.length, samples)
    }

    /// Pointwise map of the samples (re-transformed, not dealiased).
    pub fn map_samples<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self::from_samples(self.length, self.samples.iter().map(|&x| f(x)).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_compatible(other);
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a + b)
            .collect();
        Self::from_samples(self.length, samples)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.assert_compatible(other);
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a - b)
            .collect();
        Self::from_samples(self.length, samples)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::from_samples(self.length, self.samples.iter().map(|x| c * x).collect())
    }

    /// Relabel the domain length by `factor` without touching samples or mode
    /// indices; physical frequencies scale by `1/factor`.
    pub fn with_length_scaled(&self, factor: f64) -> Self {
        assert!(factor > 0.0);
        Self {
            n: self.n,
            length: self.length * factor,
            samples: self.samples.clone(),
            coeffs: self.coeffs.clone(),
        }
    }

    /// `L^p` norm by the rectangle rule; `p = infinity` is the grid max.
    pub fn lp_norm(&self, p: f64) -> f64 {
        assert!(p >= 1.0, "Lebesgue exponent must be >= 1");
        if p.is_infinite() {
            return self.samples.iter().fold(0.0, |m, &x| m.max(x.abs()));
        }
        let dy = self.grid_spacing();
        if p == 2.0 {
            let s: f64 = self.samples.iter().map(|x| x * x).sum();
            (dy * s).sqrt()
        } else {
            let s: f64 = self.samples.iter().map(|x| x.abs().powf(p)).sum();
            (dy * s).powf(1.0 / p)
        }
    }

    /// `L^2` norm of the field filtered by a real multiplier, via Parseval.
    pub fn filtered_l2(&self, multiplier: &[f64]) -> f64 {
        assert_eq!(multiplier.len(), self.n);
        let s: f64 = self
            .coeffs
            .iter()
            .zip(multiplier)
            .map(|(c, m)| (c * m).norm_sqr())
            .sum();
        (self.length * s).sqrt()
    }

    /// Evaluate the trigonometric interpolant at an arbitrary point; exact
    /// for band-limited fields.
    pub fn eval_at(&self, y: f64) -> f64 {
        let n = self.n;
        let mut acc = self.coeffs[0].re;
        for k in 1..n / 2 {
            let xi = self.xi(k);
            let (s, c) = (xi * y).sin_cos();
            acc += 2.0 * (self.coeffs[k].re * c - self.coeffs[k].im * s);
        }
        if n > 1 {
            acc += self.coeffs[n / 2].re * (self.xi(n / 2) * y).cos();
        }
        acc
    }

    pub fn min_sample(&self) -> f64 {
        self.samples.iter().fold(f64::INFINITY, |m, &x| m.min(x))
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, &x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.assert_compatible(other);
        self.samples
            .iter()
            .zip(&other.samples)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Residual imaginary part after an inverse transform of the stored
    /// coefficients; a reality diagnostic.
    pub fn imag_residual(&self) -> f64 {
        fft::inverse(&self.coeffs)
            .iter()
            .fold(0.0, |m, c| m.max(c.im.abs()))
    }
}

/// A pair (a, v) of fields on a common grid with a time stamp.
#[derive(Debug, Clone)]
pub struct FluidState {
    pub a: SpectralField,
    pub v: SpectralField,
    pub time: f64,
}

impl FluidState {
    pub fn new(a: SpectralField, v: SpectralField, time: f64) -> Self {
        assert_eq!(a.n(), v.n(), "a and v grids differ");
        Self { a, v, time }
    }

    pub fn zero(n: usize, length: f64) -> Self {
        Self::new(SpectralField::zero(n, length), SpectralField::zero(n, length), 0.0)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.a
            .max_abs_diff(&other.a)
            .max(self.v.max_abs_diff(&other.v))
    }
}
