//! Exact per-mode solution of the linearized system
//!
//! ```text
//! a_t + alpha |xi| u = 0,
//! u_t + mu |xi|^2 u - beta |xi| a = 0,
//! ```
//!
//! covering the real-eigenvalue regime, the oscillatory regime and the
//! degenerate double-root point. Serves both as the integrator core of the
//! exponential scheme and as an oracle for the nonlinear solver.

use crate::error::{CoreError, Result};
use crate::field::{FluidState, SpectralField};
use num_complex::Complex64;

/// Relative width of the double-root window: below this |R^2| the closed
/// forms cancel catastrophically and the Jordan limit is exact.
pub const DEGENERATE_R2: f64 = 1e-8;

/// Couplings of the linearized system. The Lagrangian system has both signs
/// negative; the standard Eulerian linearization has both positive.
#[derive(Debug, Clone, Copy)]
pub struct LinearParams {
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
}

impl LinearParams {
    pub fn new(alpha: f64, beta: f64, mu: f64) -> Result<Self> {
        if alpha == 0.0 || beta == 0.0 || alpha.signum() != beta.signum() {
            return Err(CoreError::InvalidLinearParams(format!(
                "need sgn(alpha) = sgn(beta) != 0, got alpha={alpha}, beta={beta}"
            )));
        }
        if mu <= 0.0 {
            return Err(CoreError::InvalidLinearParams(format!("need mu > 0, got {mu}")));
        }
        Ok(Self { alpha, beta, mu })
    }

    /// The fully normalized Lagrangian system `a_t - v_y = 0`,
    /// `v_t - a_y - v_yy = 0`.
    pub fn normalized_lagrangian() -> Self {
        Self { alpha: -1.0, beta: -1.0, mu: 1.0 }
    }

    /// Linearization of the eta_bar-normalized system with parameters Ma and
    /// nu_bar kept explicit.
    pub fn nl2(ma: f64, nu_bar: f64) -> Self {
        Self { alpha: -1.0, beta: -1.0 / (ma * ma), mu: nu_bar }
    }

    /// Linearization under the diffusive rescaling.
    pub fn diffusive(ma: f64, nu_bar: f64) -> Self {
        Self { alpha: -1.0, beta: -nu_bar * nu_bar / (ma * ma), mu: nu_bar * nu_bar }
    }

    /// Frequency separating the oscillatory and real-eigenvalue regimes.
    pub fn crossover(&self) -> f64 {
        2.0 * (self.alpha * self.beta).sqrt() / self.mu
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Real,
    Oscillatory,
    Degenerate,
}

/// Spectral data of one Fourier mode.
#[derive(Debug, Clone, Copy)]
pub struct ModeSolution {
    pub xi: f64,
    pub regime: Regime,
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
    /// The discriminant root; real in the real regime, imaginary in the
    /// oscillatory one.
    pub r: Complex64,
    pub r_squared: f64,
}

/// Eigenstructure of the symbol at frequency `xi`.
pub fn mode_spectrum(xi: f64, params: &LinearParams) -> Result<ModeSolution> {
    if xi == 0.0 {
        return Err(CoreError::ZeroFrequency);
    }
    let s = xi.abs();
    let q = 4.0 * params.alpha * params.beta / (params.mu * params.mu * s * s);
    let r2 = 1.0 - q;
    let half = 0.5 * params.mu * s * s;
    let (regime, r, lp, lm) = if r2.abs() < DEGENERATE_R2 {
        let l = Complex64::new(-half, 0.0);
        (Regime::Degenerate, Complex64::new(0.0, 0.0), l, l)
    } else {
        let r = Complex64::new(r2, 0.0).sqrt();
        let regime = if r2 > 0.0 { Regime::Real } else { Regime::Oscillatory };
        // 1 - R = q / (1 + R): no cancellation for mu |xi| >> crossover
        let one = Complex64::new(1.0, 0.0);
        (regime, r, -half * (one + r), -half * (q * (one + r).inv()))
    };
    Ok(ModeSolution { xi, regime, lambda_plus: lp, lambda_minus: lm, r, r_squared: r2 })
}

/// 2x2 action `exp(t M(|xi|))` on `(a_hat, u_hat)`, row-major.
fn mode_matrix_exp(s: f64, t: f64, params: &LinearParams) -> [Complex64; 4] {
    let mu = params.mu;
    let alpha = params.alpha;
    let beta = params.beta;
    let q = 4.0 * alpha * beta / (mu * mu * s * s);
    let r2 = 1.0 - q;
    let half = 0.5 * mu * s * s;
    if r2.abs() < DEGENERATE_R2 {
        // Jordan limit: exp(lambda t) (I + t (M - lambda I))
        let e = (-half * t).exp();
        return [
            Complex64::new(e * (1.0 + t * half), 0.0),
            Complex64::new(e * (-t * alpha * s), 0.0),
            Complex64::new(e * (t * beta * s), 0.0),
            Complex64::new(e * (1.0 - t * half), 0.0),
        ];
    }
    let r = Complex64::new(r2, 0.0).sqrt();
    let one = Complex64::new(1.0, 0.0);
    let one_minus_r = q * (one + r).inv(); // stable form of 1 - R
    let em = (-half * one_minus_r * t).exp(); // exp(lambda_minus t)
    let ep = (-half * (one + r) * t).exp(); // exp(lambda_plus t)
    let inv_r = one / r;
    let coupling = one / (mu * s * r);
    [
        0.5 * (em * (one + inv_r) + ep * (one - inv_r)),
        (ep - em) * alpha * coupling,
        (em - ep) * beta * coupling,
        0.5 * (em * (one - inv_r) + ep * (one + inv_r)),
    ]
}

/// Closed-form propagation of one `(a_hat, u_hat)` mode over `t >= 0`.
pub fn propagate_mode(
    a0_hat: Complex64,
    u0_hat: Complex64,
    xi: f64,
    t: f64,
    params: &LinearParams,
) -> Result<(Complex64, Complex64)> {
    if xi == 0.0 {
        return Err(CoreError::ZeroFrequency);
    }
    if t < 0.0 {
        return Err(CoreError::NegativeTime(t));
    }
    let m = mode_matrix_exp(xi.abs(), t, params);
    Ok((m[0] * a0_hat + m[1] * u0_hat, m[2] * a0_hat + m[3] * u0_hat))
}

/// Per-mode action on `(a_hat, v_hat)` with the d = 1 identification
/// `u = Lambda^{-1} d_y v`, i.e. `u_hat = i sgn(xi) v_hat`.
fn mode_matrix_exp_av(xi: f64, t: f64, params: &LinearParams) -> [Complex64; 4] {
    let m = mode_matrix_exp(xi.abs(), t, params);
    let i_sgn = Complex64::new(0.0, xi.signum());
    [m[0], m[1] * i_sgn, -i_sgn * m[2], m[3]]
}

/// Exact linear flow of a full state. Zero modes are conserved: the
/// linearized system at `xi = 0` is `a_t = 0`, `v_t = 0`.
pub fn propagate_field(state: &FluidState, t: f64, params: &LinearParams) -> Result<FluidState> {
    if t < 0.0 {
        return Err(CoreError::NegativeTime(t));
    }
    let n = state.a.n();
    let length = state.a.length();
    let mut a_coeffs = state.a.coeffs().to_vec();
    let mut v_coeffs = state.v.coeffs().to_vec();
    for k in 1..n {
        let xi = state.a.xi(k);
        let m = mode_matrix_exp_av(xi, t, params);
        let (a, v) = (a_coeffs[k], v_coeffs[k]);
        a_coeffs[k] = m[0] * a + m[1] * v;
        v_coeffs[k] = m[2] * a + m[3] * v;
    }
    Ok(FluidState::new(
        SpectralField::from_coeffs(length, a_coeffs),
        SpectralField::from_coeffs(length, v_coeffs),
        state.time + t,
    ))
}

/// Pure heat semigroup `exp(t nu d_yy)`; the diagnostic control channel for
/// decay-rate checks.
pub fn heat_flow(f: &SpectralField, t: f64, diffusivity: f64) -> SpectralField {
    let mut coeffs = f.coeffs().to_vec();
    for (k, c) in coeffs.iter_mut().enumerate() {
        let xi = f.xi(k);
        *c *= (-diffusivity * xi * xi * t).exp();
    }
    SpectralField::from_coeffs(f.length(), coeffs)
}

/// Closed-form evolution of the effective flux derivative
/// `w_y = v_y + Ma^-2 a` under the diffusive scaling:
/// two exponential branches acting on `w_y(0)` plus a
/// `(nu_check^2 xi^2)^{-1}`-suppressed contribution of `v_y(0)`.
pub fn effective_flux_hat(
    w0y_hat: Complex64,
    v0y_hat: Complex64,
    xi: f64,
    t: f64,
    ma: f64,
    nu_bar: f64,
) -> Result<Complex64> {
    if xi == 0.0 {
        return Err(CoreError::ZeroFrequency);
    }
    if t < 0.0 {
        return Err(CoreError::NegativeTime(t));
    }
    let params = LinearParams::diffusive(ma, nu_bar);
    let s = xi.abs();
    let nu_check_sq = ma * ma * nu_bar * nu_bar;
    let q = 4.0 * params.alpha * params.beta / (params.mu * params.mu * s * s);
    let r2 = 1.0 - q;
    let half = 0.5 * params.mu * s * s;
    if r2.abs() < DEGENERATE_R2 {
        // Jordan limit of the two-branch formula:
        // w_y(t) = e^{-ht} [ (1 - ht) w0y + (2ht / (nu_check^2 s^2)) v0y ]
        let e = (-half * t).exp();
        return Ok(e
            * (w0y_hat * (1.0 - t * half)
                + v0y_hat * (2.0 * half * t / (nu_check_sq * s * s))));
    }
    let one = Complex64::new(1.0, 0.0);
    let r = Complex64::new(r2, 0.0).sqrt();
    let em = (-half * (q * (one + r).inv()) * t).exp();
    let ep = (-half * (one + r) * t).exp();
    let inv_r = one / r;
    let w_part = 0.5 * ((one - inv_r) * em + (one + inv_r) * ep);
    let v_part = (em - ep) * inv_r / (nu_check_sq * s * s);
    Ok(w_part * w0y_hat + v_part * v0y_hat)
}

/// Per-mode 2x2 action at a fixed step size, amortizing the transcendental
/// evaluations across a whole simulation.
#[derive(Debug, Clone)]
pub struct PropagatorTable {
    n: usize,
    dt: f64,
    coeffs: Vec<[Complex64; 4]>,
}

impl PropagatorTable {
    pub fn build(n: usize, length: f64, dt: f64, params: &LinearParams) -> Self {
        let probe = SpectralField::zero(n, length);
        let identity = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        ];
        let coeffs = (0..n)
            .map(|k| {
                if k == 0 {
                    identity
                } else {
                    mode_matrix_exp_av(probe.xi(k), dt, params)
                }
            })
            .collect();
        Self { n, dt, coeffs }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advance coefficient pairs in place by one step.
    pub fn apply(&self, a_coeffs: &mut [Complex64], v_coeffs: &mut [Complex64]) {
        assert_eq!(a_coeffs.len(), self.n);
        assert_eq!(v_coeffs.len(), self.n);
        for k in 0..self.n {
            let m = &self.coeffs[k];
            let (a, v) = (a_coeffs[k], v_coeffs[k]);
            a_coeffs[k] = m[0] * a + m[1] * v;
            v_coeffs[k] = m[2] * a + m[3] * v;
        }
    }
}
