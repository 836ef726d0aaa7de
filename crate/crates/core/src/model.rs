//! Pressure and viscosity laws, the normalization pipeline, the derived
//! nonlinearities entering the velocity equation, and the scalar functionals
//! (smallness, solution, decay) built from hybrid and tilde norms.

use crate::error::{CoreError, Result};
use crate::field::SpectralField;
use crate::lp::{
    besov_norm, tilde_norm_weighted, BesovSpec, BlockNormHistory, DyadicFilterBank, TimeExp,
};
use std::fmt;
use std::sync::Arc;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Pressure as a function of the specific volume, `Q(eta) = P(1/eta)`.
/// Only differences `Q(eta) - Q(eta_bar)` and the slope at the reference
/// state matter, so laws carry no offset.
#[derive(Clone)]
pub enum PressureLaw {
    /// `Q(eta) = -slope * (eta - c)`; any stable linear pressure.
    Affine { slope: f64 },
    /// `Q(eta) = coef * eta^(-gamma)`, the barotropic gamma-law.
    Gamma { gamma: f64, coef: f64 },
    Custom { value: ScalarFn, deriv: ScalarFn },
}

impl PressureLaw {
    /// Gamma-law whose Mach parameter at `eta_bar` equals `ma`.
    pub fn gamma_with_ma(gamma: f64, eta_bar: f64, ma: f64) -> Self {
        let coef = eta_bar.powf(gamma + 1.0) / (gamma * ma * ma);
        PressureLaw::Gamma { gamma, coef }
    }

    pub fn value(&self, eta: f64) -> f64 {
        match self {
            PressureLaw::Affine { slope } => -slope * eta,
            PressureLaw::Gamma { gamma, coef } => coef * eta.powf(-gamma),
            PressureLaw::Custom { value, .. } => value(eta),
        }
    }

    pub fn deriv(&self, eta: f64) -> f64 {
        match self {
            PressureLaw::Affine { slope } => -slope,
            PressureLaw::Gamma { gamma, coef } => -coef * gamma * eta.powf(-gamma - 1.0),
            PressureLaw::Custom { deriv, .. } => deriv(eta),
        }
    }
}

impl fmt::Debug for PressureLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PressureLaw::Affine { slope } => write!(f, "Affine {{ slope: {slope} }}"),
            PressureLaw::Gamma { gamma, coef } => {
                write!(f, "Gamma {{ gamma: {gamma}, coef: {coef} }}")
            }
            PressureLaw::Custom { .. } => write!(f, "Custom"),
        }
    }
}

/// Lagrangian viscosity `nu(eta) = mu(1/eta) / eta`.
#[derive(Clone)]
pub enum ViscosityLaw {
    /// `nu` constant in Lagrangian variables (Eulerian `mu(rho) = nu / rho`).
    ConstantLagrangian { nu: f64 },
    /// Constant Eulerian viscosity `mu_bar`, so `nu(eta) = mu_bar / eta`.
    ConstantEulerian { mu_bar: f64 },
    Custom { value: ScalarFn, deriv: ScalarFn },
}

impl ViscosityLaw {
    pub fn value(&self, eta: f64) -> f64 {
        match self {
            ViscosityLaw::ConstantLagrangian { nu } => *nu,
            ViscosityLaw::ConstantEulerian { mu_bar } => mu_bar / eta,
            ViscosityLaw::Custom { value, .. } => value(eta),
        }
    }
}

impl fmt::Debug for ViscosityLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViscosityLaw::ConstantLagrangian { nu } => {
                write!(f, "ConstantLagrangian {{ nu: {nu} }}")
            }
            ViscosityLaw::ConstantEulerian { mu_bar } => {
                write!(f, "ConstantEulerian {{ mu_bar: {mu_bar} }}")
            }
            ViscosityLaw::Custom { .. } => write!(f, "Custom"),
        }
    }
}

/// Admissible range of the normalized specific volume, `[1/4, 4]` around the
/// reference state. The theory is perturbative; leaving this window is a
/// hard error, never a silent extrapolation.
pub const ADMISSIBLE_LO: f64 = 0.25;
pub const ADMISSIBLE_HI: f64 = 4.0;

/// Reference state, derived scalars and normalized laws.
#[derive(Debug, Clone)]
pub struct ModelParams {
    pub eta_bar: f64,
    /// `1 / sqrt(-Q'(eta_bar))`.
    pub ma: f64,
    /// `nu(eta_bar)`.
    pub nu_bar: f64,
    /// `Ma * nu_bar`, the frequency-threshold scale.
    pub nu_check: f64,
    pub pressure: PressureLaw,
    pub viscosity: ViscosityLaw,
}

impl ModelParams {
    /// Build the normalized model from raw laws and a reference specific
    /// volume. Rejects unstable references and nonpositive viscosity.
    pub fn normalize(
        pressure: PressureLaw,
        viscosity: ViscosityLaw,
        eta_bar: f64,
    ) -> Result<Self> {
        assert!(eta_bar > 0.0, "reference specific volume must be positive");
        let qp = pressure.deriv(eta_bar);
        if qp >= 0.0 {
            return Err(CoreError::UnstableReference(qp));
        }
        let nu_bar = viscosity.value(eta_bar);
        if nu_bar <= 0.0 {
            return Err(CoreError::NonpositiveViscosity(nu_bar));
        }
        let ma = 1.0 / (-qp).sqrt();
        Ok(Self { eta_bar, ma, nu_bar, nu_check: ma * nu_bar, pressure, viscosity })
    }

    /// Normalized pressure `Q_check(x) = Ma^2 eta_bar^-1 (Q(eta_bar x) - Q(eta_bar))`,
    /// satisfying `Q_check(1) = 0` and `Q_check'(1) = -1`.
    pub fn q_check(&self, x: f64) -> f64 {
        self.ma * self.ma / self.eta_bar
            * (self.pressure.value(self.eta_bar * x) - self.pressure.value(self.eta_bar))
    }

    pub fn q_check_deriv(&self, x: f64) -> f64 {
        self.ma * self.ma * self.pressure.deriv(self.eta_bar * x)
    }

    /// Normalized viscosity `nu_check(x) = nu(eta_bar x) / nu_bar`, with
    /// `nu_check(1) = 1`.
    pub fn nu_check_fn(&self, x: f64) -> f64 {
        self.viscosity.value(self.eta_bar * x) / self.nu_bar
    }

    /// Re-normalize the already-normalized laws; used to check idempotence.
    pub fn renormalized(&self) -> Result<Self> {
        let this = self.clone();
        let that = self.clone();
        Self::normalize(
            PressureLaw::Custom {
                value: Arc::new(move |x| this.q_check(x)),
                deriv: {
                    let p = self.clone();
                    Arc::new(move |x| p.q_check_deriv(x))
                },
            },
            ViscosityLaw::Custom {
                value: Arc::new(move |x| that.nu_check_fn(x)),
                deriv: Arc::new(|_| 0.0),
            },
            1.0,
        )
    }

    fn check_positive(&self, a: &SpectralField) -> Result<()> {
        let min = 1.0 + a.min_sample();
        if min <= 0.0 {
            return Err(CoreError::Vacuum(min));
        }
        Ok(())
    }

    /// The product `a K(a) = -(Q_check(1 + a) + a)`: the part of the pressure
    /// term left after moving `a_y` into the linear operator. `K` itself is
    /// never formed, so there is no removable singularity at `a = 0`.
    pub fn pressure_nonlinearity(&self, a: &SpectralField) -> Result<SpectralField> {
        self.check_positive(a)?;
        // A linear pressure has no remainder at all.
        if matches!(self.pressure, PressureLaw::Affine { .. }) {
            return Ok(SpectralField::zero(a.n(), a.length()));
        }
        Ok(a.map_samples(|x| -(self.q_check(1.0 + x) + x)).dealiased())
    }

    /// `L(a) = nu_check(1 + a) - 1`, the deviation of the normalized
    /// viscosity from its reference value.
    pub fn viscosity_nonlinearity(&self, a: &SpectralField) -> Result<SpectralField> {
        self.check_positive(a)?;
        if matches!(self.viscosity, ViscosityLaw::ConstantLagrangian { .. }) {
            return Ok(SpectralField::zero(a.n(), a.length()));
        }
        Ok(a.map_samples(|x| self.nu_check_fn(1.0 + x) - 1.0).dealiased())
    }

    /// True when both nonlinearities vanish identically.
    pub fn is_linear(&self) -> bool {
        matches!(self.pressure, PressureLaw::Affine { .. })
            && matches!(self.viscosity, ViscosityLaw::ConstantLagrangian { .. })
    }
}

/// Left-hand side of the global-existence smallness condition:
/// `Ma^-1 ||a0||^{l}_{B^{-1/2}_{2,1}} + nu_bar ||a0||^{h}_{B^{1/p}_{p,1}}
///  + ||v0||^{l}_{B^{-1/2}_{2,1}} + ||v0||^{h}_{B^{-1+1/p}_{p,1}}`,
/// all at threshold shift `alpha = 1/nu_check`. The caller compares against
/// `c * eta_bar * nu_bar` for a configured `c`.
pub fn smallness_lhs(
    a0: &SpectralField,
    v0: &SpectralField,
    params: &ModelParams,
    p: f64,
    j0: i32,
    bank: &DyadicFilterBank,
) -> f64 {
    let alpha = 1.0 / params.nu_check;
    let a_low = besov_norm(a0, &BesovSpec::low(-0.5, 2.0, j0, alpha), bank);
    let a_high = besov_norm(a0, &BesovSpec::high(1.0 / p, p, j0, alpha), bank);
    let v_low = besov_norm(v0, &BesovSpec::low(-0.5, 2.0, j0, alpha), bank);
    let v_high = besov_norm(v0, &BesovSpec::high(-1.0 + 1.0 / p, p, j0, alpha), bank);
    a_low / params.ma + params.nu_bar * a_high + v_low + v_high
}

/// Data functional controlling the decay estimates (p = 2):
/// `||a0||_{B^{-1/2}} + ||a0||_{B^{1/2}} + ||v0||_{B^{-1/2}}`.
pub fn decay_data_functional(
    a0: &SpectralField,
    v0: &SpectralField,
    bank: &DyadicFilterBank,
) -> f64 {
    besov_norm(a0, &BesovSpec::full(-0.5, 2.0), bank)
        + besov_norm(a0, &BesovSpec::full(0.5, 2.0), bank)
        + besov_norm(v0, &BesovSpec::full(-0.5, 2.0), bank)
}

/// The three decay components; all tilde norms of time-weighted fields.
#[derive(Debug, Clone, Copy)]
pub struct DecayFunctionals {
    /// Low frequencies: weight `<t>` in `B^{3/2}` (sup) plus `B^{5/2}` (L2).
    pub d_low: f64,
    /// High-frequency volume perturbation: weight `<t>^{3/2}` in `B^{1/2}`.
    pub d_high_a: f64,
    /// High-frequency velocity: weight `t <t>^{1/2}` in `B^{3/2}`.
    pub d_high_v: f64,
}

impl DecayFunctionals {
    pub fn total(&self) -> f64 {
        self.d_low + self.d_high_a + self.d_high_v
    }
}

fn bracket(t: f64) -> f64 {
    (1.0 + t * t).sqrt()
}

/// Evaluate the decay functionals from recorded per-block L2 histories of
/// `a` and `v`. A pair norm is the sum of the two components' norms.
pub fn decay_functionals(
    a_hist: &BlockNormHistory,
    v_hist: &BlockNormHistory,
    j0: i32,
    bank: &DyadicFilterBank,
) -> Result<DecayFunctionals> {
    let low32 = BesovSpec::low(1.5, 2.0, j0, 1.0);
    let low52 = BesovSpec::low(2.5, 2.0, j0, 1.0);
    let high12 = BesovSpec::high(0.5, 2.0, j0, 1.0);
    let high32 = BesovSpec::high(1.5, 2.0, j0, 1.0);

    let w1 = bracket;
    let sup_low = tilde_norm_weighted(a_hist, TimeExp::Inf, &low32, bank, w1)?
        + tilde_norm_weighted(v_hist, TimeExp::Inf, &low32, bank, w1)?;
    let l2_low = tilde_norm_weighted(a_hist, TimeExp::Two, &low52, bank, w1)?
        + tilde_norm_weighted(v_hist, TimeExp::Two, &low52, bank, w1)?;
    let d_high_a =
        tilde_norm_weighted(a_hist, TimeExp::Inf, &high12, bank, |t| bracket(t).powf(1.5))?;
    let d_high_v =
        tilde_norm_weighted(v_hist, TimeExp::Inf, &high32, bank, |t| t * bracket(t).sqrt())?;

    Ok(DecayFunctionals { d_low: sup_low + l2_low, d_high_a, d_high_v })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn affine_normalization_is_exact() {
        let p = ModelParams::normalize(
            PressureLaw::Affine { slope: 2.5 },
            ViscosityLaw::ConstantLagrangian { nu: 3.0 },
            1.7,
        )
        .unwrap();
        assert!((p.ma - 1.0 / 2.5f64.sqrt()).abs() < 1e-15);
        // Q_check(x) = 1 - x for any eta_bar and slope
        for x in [0.5, 0.9, 1.0, 1.3, 2.0] {
            assert!((p.q_check(x) - (1.0 - x)).abs() < 1e-13);
        }
        assert!((p.nu_bar - 3.0).abs() < 1e-15);
        assert!((p.nu_check - 3.0 * p.ma).abs() < 1e-15);
    }

    #[test]
    fn gamma_law_matches_closed_form() {
        let gamma = 1.4;
        let eta_bar = 0.8;
        let p = ModelParams::normalize(
            PressureLaw::Gamma { gamma, coef: 2.0 },
            ViscosityLaw::ConstantEulerian { mu_bar: 1.3 },
            eta_bar,
        )
        .unwrap();
        // closed-form oracle: Q_check(x) = (x^-gamma - 1) / gamma
        for x in [0.6f64, 0.9, 1.0, 1.5, 2.4] {
            let oracle = (x.powf(-gamma) - 1.0) / gamma;
            assert!((p.q_check(x) - oracle).abs() < 1e-12, "x={x}");
        }
        assert!((p.q_check(1.0)).abs() < 1e-14);
        assert!((p.q_check_deriv(1.0) + 1.0).abs() < 1e-12);
        assert!((p.nu_check_fn(1.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn unstable_reference_rejected() {
        let err = ModelParams::normalize(
            PressureLaw::Custom {
                value: Arc::new(|x| x),
                deriv: Arc::new(|_| 1.0),
            },
            ViscosityLaw::ConstantLagrangian { nu: 1.0 },
            1.0,
        )
        .unwrap_err();
        assert!(matches!(err, CoreError::UnstableReference(_)));

        let err = ModelParams::normalize(
            PressureLaw::Affine { slope: 1.0 },
            ViscosityLaw::Custom { value: Arc::new(|_| -0.1), deriv: Arc::new(|_| 0.0) },
            1.0,
        )
        .unwrap_err();
        assert!(matches!(err, CoreError::NonpositiveViscosity(_)));
    }

    #[test]
    fn normalize_is_idempotent() {
        let p = ModelParams::normalize(
            PressureLaw::gamma_with_ma(1.4, 0.9, 2.0),
            ViscosityLaw::ConstantEulerian { mu_bar: 0.7 },
            0.9,
        )
        .unwrap();
        let q = p.renormalized().unwrap();
        assert!((q.ma - 1.0).abs() < 1e-12);
        assert!((q.nu_bar - 1.0).abs() < 1e-12);
        for x in [0.7, 1.0, 1.6] {
            assert!((q.q_check(x) - p.q_check(x)).abs() < 1e-12);
            assert!((q.nu_check_fn(x) - p.nu_check_fn(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn pressure_nonlinearity_values() {
        let n = 64;
        let l = 2.0 * PI;
        let affine = ModelParams::normalize(
            PressureLaw::Affine { slope: 1.0 },
            ViscosityLaw::ConstantLagrangian { nu: 1.0 },
            1.0,
        )
        .unwrap();
        let a = SpectralField::from_fn(n, l, |y| 0.1 * y.sin());
        assert_eq!(affine.pressure_nonlinearity(&a).unwrap().max_abs(), 0.0);

        let gamma = ModelParams::normalize(
            PressureLaw::gamma_with_ma(1.4, 1.0, 1.0),
            ViscosityLaw::ConstantLagrangian { nu: 1.0 },
            1.0,
        )
        .unwrap();
        let const_a = SpectralField::from_fn(n, l, |_| 0.1);
        let ak = gamma.pressure_nonlinearity(&const_a).unwrap();
        // scalar oracle evaluated independently of the field pipeline,
        // approximately -1.08e-2
        let scalar = -((1.1f64.powf(-1.4) - 1.0) / 1.4 + 0.1);
        assert!((scalar - (-1.08e-2)).abs() < 5e-5);
        assert!((ak.samples()[7] - scalar).abs() < 1e-12);

        let vac = SpectralField::from_fn(n, l, |_| -1.5);
        assert!(matches!(gamma.pressure_nonlinearity(&vac), Err(CoreError::Vacuum(_))));
    }

    #[test]
    fn viscosity_nonlinearity_values() {
        let n = 64;
        let l = 2.0 * PI;
        let p = ModelParams::normalize(
            PressureLaw::Affine { slope: 1.0 },
            ViscosityLaw::ConstantEulerian { mu_bar: 2.0 },
            1.0,
        )
        .unwrap();
        let zero = SpectralField::zero(n, l);
        assert_eq!(p.viscosity_nonlinearity(&zero).unwrap().max_abs(), 0.0);
        let const_a = SpectralField::from_fn(n, l, |_| 0.2);
        let lr = p.viscosity_nonlinearity(&const_a).unwrap();
        // nu(eta) = mu_bar / eta, so L(a) = 1/(1+a) - 1 at eta_bar = 1
        let scalar = 1.0 / 1.2 - 1.0;
        assert!((lr.samples()[3] - scalar).abs() < 1e-12);

        let lagr = ModelParams::normalize(
            PressureLaw::Affine { slope: 1.0 },
            ViscosityLaw::ConstantLagrangian { nu: 5.0 },
            1.0,
        )
        .unwrap();
        assert_eq!(lagr.viscosity_nonlinearity(&const_a).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn definitional_identity_and_vanishing_orders() {
        let p = ModelParams::normalize(
            PressureLaw::gamma_with_ma(1.4, 1.0, 1.0),
            ViscosityLaw::ConstantEulerian { mu_bar: 1.0 },
            1.0,
        )
        .unwrap();
        let n = 64;
        let l = 2.0 * PI;
        let a = SpectralField::from_fn(n, l, |y| 0.05 * y.sin());
        let ak = p.pressure_nonlinearity(&a).unwrap();
        for (i, (&ai, &ki)) in a.samples().iter().zip(ak.samples()).enumerate() {
            let resid = ki + p.q_check(1.0 + ai) + ai;
            assert!(resid.abs() < 1e-12, "i={i}: {resid}");
        }

        // Richardson: aK = O(h^2), L = O(h) at constant a = h
        let val = |h: f64| {
            let c = SpectralField::from_fn(8, l, |_| h);
            (
                p.pressure_nonlinearity(&c).unwrap().samples()[0].abs(),
                p.viscosity_nonlinearity(&c).unwrap().samples()[0].abs(),
            )
        };
        let (k1, l1) = val(1e-3);
        let (k2, l2) = val(5e-4);
        assert!((k1 / k2 - 4.0).abs() < 0.4, "aK order 2: ratio {}", k1 / k2);
        assert!((l1 / l2 - 2.0).abs() < 0.2, "L order 1: ratio {}", l1 / l2);
    }

    #[test]
    fn smallness_is_homogeneous() {
        let n = 256;
        let l = 16.0 * PI;
        let bank = {
            let (lo, hi) = DyadicFilterBank::suggest_range(n, l);
            DyadicFilterBank::build(n, l, lo, hi).unwrap()
        };
        let p = ModelParams::normalize(
            PressureLaw::gamma_with_ma(1.4, 1.0, 1.0),
            ViscosityLaw::ConstantLagrangian { nu: 2.0 },
            1.0,
        )
        .unwrap();
        let a0 = SpectralField::from_fn(n, l, |y| 0.01 * (y * 0.5).sin());
        let v0 = SpectralField::from_fn(n, l, |y| 0.02 * (y * 0.25).cos() - 0.02 * (y * 1.5).sin());
        let zero = SpectralField::zero(n, l);
        assert_eq!(smallness_lhs(&zero, &zero, &p, 2.0, 0, &bank), 0.0);
        let base = smallness_lhs(&a0, &v0, &p, 2.0, 0, &bank);
        let doubled = smallness_lhs(&a0.scale(2.0), &v0.scale(2.0), &p, 2.0, 0, &bank);
        assert!((doubled - 2.0 * base).abs() < 1e-12 * base.max(1.0));

        // recomposition: the value is exactly the sum of the four hybrid
        // pieces assembled by hand
        let alpha = 1.0 / p.nu_check;
        let by_hand = besov_norm(&a0, &BesovSpec::low(-0.5, 2.0, 0, alpha), &bank) / p.ma
            + p.nu_bar * besov_norm(&a0, &BesovSpec::high(0.5, 2.0, 0, alpha), &bank)
            + besov_norm(&v0, &BesovSpec::low(-0.5, 2.0, 0, alpha), &bank)
            + besov_norm(&v0, &BesovSpec::high(-0.5, 2.0, 0, alpha), &bank);
        assert!((base - by_hand).abs() < 1e-13 * base.max(1.0));
    }

    #[test]
    fn decay_functionals_on_synthetic_history() {
        let n = 1024;
        let l = 64.0 * PI;
        let bank = DyadicFilterBank::build(n, l, -4, 2).unwrap();
        let nb = bank.len();
        let horizon = 3.0;
        let steps = 6000;
        let mut a_h = BlockNormHistory::new(bank.j_min(), nb);
        let mut v_h = BlockNormHistory::new(bank.j_min(), nb);
        for i in 0..=steps {
            let t = horizon * i as f64 / steps as f64;
            let vals: Vec<f64> = (bank.j_min()..=bank.j_max())
                .map(|j| {
                    let s = f64::exp2(j as f64);
                    f64::exp2(-0.5 * j as f64) * (-s * s * t).exp()
                })
                .collect();
            a_h.push(t, &vals);
            v_h.push(t, &vec![0.0; nb]);
        }
        let d = decay_functionals(&a_h, &v_h, 0, &bank).unwrap();
        assert!(d.d_low.is_finite() && d.d_low > 0.0);
        // single-snapshot t = 0 trajectory: the tau-weighted velocity part vanishes
        let mut a1 = BlockNormHistory::new(bank.j_min(), nb);
        let mut v1 = BlockNormHistory::new(bank.j_min(), nb);
        a1.push(0.0, &vec![1.0; nb]);
        v1.push(0.0, &vec![1.0; nb]);
        let d1 = decay_functionals(&a1, &v1, 0, &bank).unwrap();
        assert_eq!(d1.d_high_v, 0.0);

        // quadrature oracle for the L2 low part, dense trapezoid per block
        let low52 = BesovSpec::low(2.5, 2.0, 0, 1.0);
        let (lo, hi) = low52.j_range(&bank);
        let mut oracle = 0.0;
        for j in lo..=hi {
            let s = f64::exp2(j as f64);
            let m = 400_000;
            let h = horizon / m as f64;
            let int: f64 = (0..=m)
                .map(|i| {
                    let t = i as f64 * h;
                    let w = if i == 0 || i == m { 0.5 } else { 1.0 };
                    let val = (1.0 + t * t).sqrt() * f64::exp2(-0.5 * j as f64) * (-s * s * t).exp();
                    w * val * val
                })
                .sum::<f64>()
                * h;
            oracle += f64::exp2(2.5 * j as f64) * int.sqrt();
        }
        let l2_low_a = tilde_norm_weighted(&a_h, TimeExp::Two, &low52, &bank, |t| {
            (1.0 + t * t).sqrt()
        })
        .unwrap();
        assert!((l2_low_a - oracle).abs() < 1e-4 * oracle, "{l2_low_a} vs {oracle}");
    }
}
