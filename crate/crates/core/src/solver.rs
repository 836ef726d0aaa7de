//! Time integration of the nonlinear system and its diffusive-scaled
//! variant, the Picard iteration, the pointwise limit ODE, and the
//! diagnostic monitors.
//!
//! The stepper always integrates the fully normalized system
//! `a_t - v_y = 0`, `v_t - a_y - v_yy = g` with the exact linear flow per
//! mode and explicit nonlinear increments; general parameters and the
//! diffusive presentation are handled by rescaling states in and out of
//! that frame. Large viscosity therefore never constrains the step size.

use crate::error::{CoreError, Result};
use crate::field::{FluidState, SpectralField};
use crate::lp::{besov_norm, BesovSpec, BlockNormHistory, DyadicFilterBank, TimeExp};
use crate::model::{ModelParams, ADMISSIBLE_HI, ADMISSIBLE_LO};
use crate::propagator::{LinearParams, PropagatorTable};
use crate::transforms::effective_velocity;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Etd1,
    Etd2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Integrate the system in the frame of the input data.
    Normalized,
    /// Input is original-frame data; integrate the diffusive-scaled system
    /// (initial velocity is scaled by nu_bar internally) and return the
    /// trajectory in the diffusive frame.
    Diffusive,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub dealias: bool,
    pub snapshot_stride: usize,
    pub variant: Variant,
}

impl SolverConfig {
    pub fn new(dt: f64, t_end: f64, scheme: Scheme) -> Self {
        Self { dt, t_end, scheme, dealias: true, snapshot_stride: 1, variant: Variant::Normalized }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dt.is_nan() || self.dt <= 0.0 {
            return Err(CoreError::InvalidConfig("dt must be positive".into()));
        }
        if self.t_end < 0.0 {
            return Err(CoreError::InvalidConfig("t_end must be nonnegative".into()));
        }
        if self.snapshot_stride == 0 {
            return Err(CoreError::InvalidConfig("snapshot stride must be >= 1".into()));
        }
        Ok(())
    }
}

/// Scale factors between the caller's frame and the normalized one.
#[derive(Debug, Clone, Copy)]
struct CheckFrame {
    /// Domain length factor: length_check = y * length_in.
    y: f64,
    /// Time factor: t_check = t * frame time.
    t: f64,
    /// a_check = a_in / eta_bar.
    a_in: f64,
    /// v_check = v_in * this.
    v_in: f64,
    /// Output field factors (output frame may differ from the input frame
    /// for the diffusive variant).
    a_out: f64,
    v_out: f64,
}

impl CheckFrame {
    fn for_variant(params: &ModelParams, variant: Variant) -> Self {
        let ma = params.ma;
        let nu = params.nu_bar;
        let eta = params.eta_bar;
        let y = 1.0 / (ma * nu);
        match variant {
            Variant::Normalized => Self {
                y,
                t: 1.0 / (ma * ma * nu),
                a_in: 1.0 / eta,
                v_in: ma / eta,
                a_out: eta,
                v_out: eta / ma,
            },
            // The diffusive system fulfils the normalized equations with
            // parameters (Ma / nu_bar, nu_bar^2); the nu_bar data scaling and
            // the velocity factor of that rescaling cancel on the way in.
            Variant::Diffusive => Self {
                y,
                t: 1.0 / (ma * ma),
                a_in: 1.0 / eta,
                v_in: ma / eta,
                a_out: eta,
                v_out: eta * nu / ma,
            },
        }
    }

    fn is_identity(&self) -> bool {
        self.y == 1.0 && self.t == 1.0 && self.a_in == 1.0 && self.v_in == 1.0
    }
}

/// Dense per-step records plus snapshot states, all in the caller's frame.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<FluidState>,
    pub a_history: BlockNormHistory,
    pub v_history: BlockNormHistory,
    pub ay_history: BlockNormHistory,
    pub vyy_history: BlockNormHistory,
    pub vt_history: BlockNormHistory,
}

impl Trajectory {
    pub fn initial(&self) -> &FluidState {
        &self.states[0]
    }

    pub fn terminal(&self) -> &FluidState {
        self.states.last().expect("trajectory has at least the initial state")
    }

    /// The prefix of the trajectory up to `t_max`: snapshots and all block
    /// histories truncated together.
    pub fn truncated(&self, t_max: f64) -> Self {
        let keep = self.states.partition_point(|s| s.time <= t_max + 1e-12);
        Self {
            states: self.states[..keep].to_vec(),
            a_history: self.a_history.truncated(t_max),
            v_history: self.v_history.truncated(t_max),
            ay_history: self.ay_history.truncated(t_max),
            vyy_history: self.vyy_history.truncated(t_max),
            vt_history: self.vt_history.truncated(t_max),
        }
    }

    /// Instantaneous Besov values of a recorded history at every record time.
    pub fn series_from_history(
        history: &BlockNormHistory,
        spec: &BesovSpec,
        bank: &DyadicFilterBank,
    ) -> Vec<f64> {
        let (lo, hi) = spec.j_range(bank);
        (0..history.times().len())
            .map(|i| {
                let mut acc = 0.0;
                for j in lo..=hi {
                    if let Some(series) = history.block_series(j) {
                        acc += f64::exp2(j as f64 * spec.sigma) * series[i];
                    }
                }
                acc
            })
            .collect()
    }

    /// The solution functional of the normalized system at the final time
    /// (p = 2): sup-in-time hybrid norms of (a, v) and (a_y, v) plus the
    /// time-integrated dissipation terms.
    pub fn solution_functional(&self, j0: i32, bank: &DyadicFilterBank) -> Result<f64> {
        let low_m12 = BesovSpec::low(-0.5, 2.0, j0, 1.0);
        let high_m12 = BesovSpec::high(-0.5, 2.0, j0, 1.0);
        let low_32 = BesovSpec::low(1.5, 2.0, j0, 1.0);

        let sup = |h: &BlockNormHistory, spec: &BesovSpec| {
            crate::lp::tilde_norm(h, TimeExp::Inf, spec, bank)
        };
        let sup_low = sup(&self.a_history, &low_m12)? + sup(&self.v_history, &low_m12)?;
        let sup_high = sup(&self.ay_history, &high_m12)? + sup(&self.v_history, &high_m12)?;

        let times = self.a_history.times();
        let int = |series: &[f64]| -> f64 {
            let mut acc = 0.0;
            for i in 1..times.len() {
                acc += 0.5 * (times[i] - times[i - 1]) * (series[i] + series[i - 1]);
            }
            acc
        };
        let int_low = int(&Self::series_from_history(&self.a_history, &low_32, bank))
            + int(&Self::series_from_history(&self.v_history, &low_32, bank));
        let int_high = int(&Self::series_from_history(&self.ay_history, &high_m12, bank))
            + int(&Self::series_from_history(&self.vyy_history, &high_m12, bank))
            + int(&Self::series_from_history(&self.vt_history, &high_m12, bank));
        Ok(sup_low + sup_high + int_low + int_high)
    }
}

/// Data functional matching `solution_functional` at time zero.
pub fn solution_data_functional(
    a0: &SpectralField,
    v0: &SpectralField,
    j0: i32,
    bank: &DyadicFilterBank,
) -> f64 {
    let low_m12 = BesovSpec::low(-0.5, 2.0, j0, 1.0);
    let high_m12 = BesovSpec::high(-0.5, 2.0, j0, 1.0);
    besov_norm(a0, &low_m12, bank)
        + besov_norm(v0, &low_m12, bank)
        + besov_norm(&a0.derivative(), &high_m12, bank)
        + besov_norm(v0, &high_m12, bank)
}

struct Stepper<'a> {
    params: &'a ModelParams,
    table: PropagatorTable,
    scheme: Scheme,
    dealias: bool,
    dt: f64,
    length: f64,
}

impl<'a> Stepper<'a> {
    fn new(
        n: usize,
        length: f64,
        dt: f64,
        scheme: Scheme,
        dealias: bool,
        params: &'a ModelParams,
    ) -> Self {
        let table = PropagatorTable::build(n, length, dt, &LinearParams::normalized_lagrangian());
        Self { params, table, scheme, dealias, dt, length }
    }

    /// Nonlinear source `g = (a K(a))_y + (L(a) v_y)_y` of the normalized
    /// system; `None` when both nonlinearities vanish identically.
    fn nonlinearity(&self, a: &SpectralField, v: &SpectralField) -> Result<Option<SpectralField>> {
        if self.params.is_linear() {
            return Ok(None);
        }
        let ak = self.params.pressure_nonlinearity(a)?;
        let lr = self.params.viscosity_nonlinearity(a)?;
        let mut flux = ak;
        if lr.max_abs() > 0.0 {
            let v_y = v.derivative();
            let prod = if self.dealias { lr.mul_dealiased(&v_y) } else { lr.mul_plain(&v_y) };
            flux = flux.add(&prod);
        }
        Ok(Some(flux.derivative()))
    }

    fn admissible(&self, a: &SpectralField, t: f64) -> Result<()> {
        let eta_min = 1.0 + a.min_sample();
        let eta_max = 1.0 + a.samples().iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
        if eta_min < ADMISSIBLE_LO || eta_max > ADMISSIBLE_HI {
            let eta = if eta_min < ADMISSIBLE_LO { eta_min } else { eta_max };
            return Err(CoreError::LeftAdmissibleInterval {
                t,
                eta,
                lo: ADMISSIBLE_LO,
                hi: ADMISSIBLE_HI,
            });
        }
        Ok(())
    }

    /// One exponential step from a state with precomputed source `g`.
    fn step(
        &self,
        state: &FluidState,
        g: Option<&SpectralField>,
    ) -> Result<FluidState> {
        let mut a_c = state.a.coeffs().to_vec();
        let mut v_c = state.v.coeffs().to_vec();
        match (self.scheme, g) {
            (_, None) => {
                self.table.apply(&mut a_c, &mut v_c);
            }
            (Scheme::Etd1, Some(g)) => {
                add_scaled(&mut v_c, g.coeffs(), self.dt);
                self.table.apply(&mut a_c, &mut v_c);
            }
            (Scheme::Etd2, Some(g)) => {
                // predictor: exponential Euler
                let mut pa = a_c.clone();
                let mut pv = v_c.clone();
                add_scaled(&mut pv, g.coeffs(), self.dt);
                self.table.apply(&mut pa, &mut pv);
                let pred = FluidState::new(
                    SpectralField::from_coeffs(self.length, pa),
                    SpectralField::from_coeffs(self.length, pv),
                    state.time + self.dt,
                );
                let g1 = self
                    .nonlinearity(&pred.a, &pred.v)?
                    .expect("nonlinear branch");
                // corrector: trapezoidal weights on the propagated source
                add_scaled(&mut v_c, g.coeffs(), 0.5 * self.dt);
                self.table.apply(&mut a_c, &mut v_c);
                add_scaled(&mut v_c, g1.coeffs(), 0.5 * self.dt);
            }
        }
        Ok(FluidState::new(
            SpectralField::from_coeffs(self.length, a_c),
            SpectralField::from_coeffs(self.length, v_c),
            state.time + self.dt,
        ))
    }
}

fn add_scaled(dst: &mut [Complex64], src: &[Complex64], scale: f64) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s * scale;
    }
}

/// One exponential-integrator step of the normalized system; the public
/// single-step entry point used by the order tests.
pub fn step(
    state: &FluidState,
    dt: f64,
    params: &ModelParams,
    scheme: Scheme,
    dealias: bool,
) -> Result<FluidState> {
    let stepper = Stepper::new(state.a.n(), state.a.length(), dt, scheme, dealias, params);
    stepper.admissible(&state.a, state.time)?;
    let g = stepper.nonlinearity(&state.a, &state.v)?;
    stepper.step(state, g.as_ref())
}

struct Recorder<'a> {
    bank: &'a DyadicFilterBank,
    frame: CheckFrame,
    length_in: f64,
    a: BlockNormHistory,
    v: BlockNormHistory,
    ay: BlockNormHistory,
    vyy: BlockNormHistory,
    vt: BlockNormHistory,
}

impl<'a> Recorder<'a> {
    fn new(bank: &'a DyadicFilterBank, frame: CheckFrame, length_in: f64) -> Self {
        let mk = || BlockNormHistory::new(bank.j_min(), bank.len());
        Self { bank, frame, length_in, a: mk(), v: mk(), ay: mk(), vyy: mk(), vt: mk() }
    }

    /// Record block norms of the mapped-back state; `g` is the check-frame
    /// nonlinear source at the same instant.
    fn record(&mut self, t_frame: f64, check: &FluidState, g: Option<&SpectralField>) {
        let n = check.a.n();
        let probe = SpectralField::zero(n, self.length_in);
        let mut a_in = Vec::with_capacity(n);
        let mut v_in = Vec::with_capacity(n);
        let mut ay_in = Vec::with_capacity(n);
        let mut vyy_in = Vec::with_capacity(n);
        let mut vt_in = Vec::with_capacity(n);
        let gc = g.map(|f| f.coeffs());
        // v_in(t) = v_out * v_check(t_check), t_check = t_frame * t_fac, so
        // time derivatives pick up one factor of t_fac.
        let dt_fac = self.frame.t;
        for k in 0..n {
            let xi_in = probe.xi(k);
            let xi_c = xi_in / self.frame.y;
            let a_c = check.a.coeffs()[k];
            let v_c = check.v.coeffs()[k];
            let ai = a_c * self.frame.a_out;
            let vi = v_c * self.frame.v_out;
            a_in.push(ai);
            v_in.push(vi);
            ay_in.push(ai * Complex64::new(0.0, xi_in));
            vyy_in.push(vi * (-xi_in * xi_in));
            let g_k = gc.map_or(Complex64::new(0.0, 0.0), |g| g[k]);
            let vt_check = a_c * Complex64::new(0.0, xi_c) + v_c * (-xi_c * xi_c) + g_k;
            vt_in.push(vt_check * (self.frame.v_out * dt_fac));
        }
        self.a.push(t_frame, &self.block_l2(&a_in));
        self.v.push(t_frame, &self.block_l2(&v_in));
        self.ay.push(t_frame, &self.block_l2(&ay_in));
        self.vyy.push(t_frame, &self.block_l2(&vyy_in));
        self.vt.push(t_frame, &self.block_l2(&vt_in));
    }

    fn block_l2(&self, coeffs: &[Complex64]) -> Vec<f64> {
        (self.bank.j_min()..=self.bank.j_max())
            .map(|j| {
                let filt = self.bank.filter(j).expect("in range");
                let s: f64 = coeffs
                    .iter()
                    .zip(filt)
                    .map(|(c, m)| (c * m).norm_sqr())
                    .sum();
                (self.length_in * s).sqrt()
            })
            .collect()
    }
}

fn map_back(check: &FluidState, frame: CheckFrame, t_frame: f64) -> FluidState {
    if frame.is_identity() {
        return FluidState::new(check.a.clone(), check.v.clone(), t_frame);
    }
    FluidState::new(
        check.a.scale(frame.a_out).with_length_scaled(1.0 / frame.y),
        check.v.scale(frame.v_out).with_length_scaled(1.0 / frame.y),
        t_frame,
    )
}

fn to_check(a0: &SpectralField, v0: &SpectralField, frame: CheckFrame) -> FluidState {
    FluidState::new(
        a0.scale(frame.a_in).with_length_scaled(frame.y),
        v0.scale(frame.v_in).with_length_scaled(frame.y),
        0.0,
    )
}

/// Run the exponential integrator to `t_end` (rounded to whole steps),
/// recording dense per-step block histories and snapshot states every
/// `snapshot_stride` steps. `dt` and `t_end` are in the frame of the input
/// data (diffusive time for the diffusive variant).
pub fn simulate(
    a0: &SpectralField,
    v0: &SpectralField,
    params: &ModelParams,
    config: &SolverConfig,
    bank: &DyadicFilterBank,
) -> Result<Trajectory> {
    config.validate()?;
    if a0.mean().abs() > 1e-10 {
        return Err(CoreError::NonzeroMean(a0.mean()));
    }
    assert_eq!(bank.grid_size(), a0.n(), "bank grid must match the data grid");
    assert!(
        (bank.domain_length() - a0.length()).abs() <= 1e-9 * a0.length(),
        "bank domain must match the data domain"
    );

    let frame = CheckFrame::for_variant(params, config.variant);
    let mut state = to_check(a0, v0, frame);
    let n = state.a.n();
    let length_c = state.a.length();
    let dt_c = config.dt * frame.t;
    let steps = (config.t_end / config.dt).round() as usize;

    let stepper = Stepper::new(n, length_c, dt_c, config.scheme, config.dealias, params);
    let mut recorder = Recorder::new(bank, frame, a0.length());
    let mut states = Vec::new();

    for k in 0..=steps {
        let t_frame = k as f64 * config.dt;
        stepper
            .admissible(&state.a, t_frame)
            .map_err(|e| reframe_time(e, t_frame))?;
        let g = stepper.nonlinearity(&state.a, &state.v)?;
        recorder.record(t_frame, &state, g.as_ref());
        if k % config.snapshot_stride == 0 || k == steps {
            states.push(map_back(&state, frame, t_frame));
        }
        if k < steps {
            state = stepper.step(&state, g.as_ref())?;
        }
    }

    Ok(Trajectory {
        states,
        a_history: recorder.a,
        v_history: recorder.v,
        ay_history: recorder.ay,
        vyy_history: recorder.vyy,
        vt_history: recorder.vt,
    })
}

fn reframe_time(e: CoreError, t_frame: f64) -> CoreError {
    match e {
        CoreError::LeftAdmissibleInterval { eta, lo, hi, .. } => {
            CoreError::LeftAdmissibleInterval { t: t_frame, eta, lo, hi }
        }
        other => other,
    }
}

/// Picard iterates of the integral formulation: iterate 0 solves the linear
/// system, iterate n+1 solves the linear system with the source frozen at
/// iterate n, via trapezoidal Duhamel quadrature on the exact propagator.
pub struct PicardResult {
    /// Snapshot sequences per iterate, in the caller's frame.
    pub iterates: Vec<Vec<FluidState>>,
    /// Sup-in-time differences between consecutive iterates, measured in
    /// `B^{1/2}_{2,1} x B^{-1/2}_{2,1}`.
    pub differences: Vec<f64>,
}

pub fn picard_sequence(
    a0: &SpectralField,
    v0: &SpectralField,
    n_iters: usize,
    params: &ModelParams,
    config: &SolverConfig,
    bank: &DyadicFilterBank,
) -> Result<PicardResult> {
    config.validate()?;
    if n_iters == 0 {
        return Err(CoreError::InvalidConfig("need at least one Picard iterate".into()));
    }
    if a0.mean().abs() > 1e-10 {
        return Err(CoreError::NonzeroMean(a0.mean()));
    }
    assert_eq!(bank.grid_size(), a0.n(), "bank grid must match the data grid");
    assert!(
        (bank.domain_length() - a0.length()).abs() <= 1e-9 * a0.length(),
        "bank domain must match the data domain"
    );
    let frame = CheckFrame::for_variant(params, config.variant);
    let init = to_check(a0, v0, frame);
    let n = init.a.n();
    let length_c = init.a.length();
    let dt_c = config.dt * frame.t;
    let steps = (config.t_end / config.dt).round() as usize;
    let stepper = Stepper::new(n, length_c, dt_c, config.scheme, config.dealias, params);
    // differences are measured in the integration frame; the caller's frame
    // factors only rescale them
    let (cb_lo, cb_hi) = DyadicFilterBank::suggest_range(n, length_c);
    let check_bank =
        DyadicFilterBank::build(n, length_c, cb_lo, cb_hi).expect("suggested range is valid");

    // iterate 0: pure linear flow
    let mut current: Vec<FluidState> = Vec::with_capacity(steps + 1);
    current.push(init.clone());
    for k in 0..steps {
        let mut a_c = current[k].a.coeffs().to_vec();
        let mut v_c = current[k].v.coeffs().to_vec();
        stepper.table.apply(&mut a_c, &mut v_c);
        current.push(FluidState::new(
            SpectralField::from_coeffs(length_c, a_c),
            SpectralField::from_coeffs(length_c, v_c),
            (k + 1) as f64 * dt_c,
        ));
    }

    let spec_a = BesovSpec::full(0.5, 2.0);
    let spec_v = BesovSpec::full(-0.5, 2.0);
    let mut iterates = vec![map_back_sequence(&current, frame, config.dt)];
    let mut differences = Vec::new();

    for _ in 0..n_iters {
        // frozen source along the previous iterate
        let mut sources: Vec<Option<SpectralField>> = Vec::with_capacity(steps + 1);
        for st in &current {
            stepper.admissible(&st.a, st.time)?;
            sources.push(stepper.nonlinearity(&st.a, &st.v)?);
        }
        let mut next: Vec<FluidState> = Vec::with_capacity(steps + 1);
        next.push(init.clone());
        for k in 0..steps {
            let mut a_c = next[k].a.coeffs().to_vec();
            let mut v_c = next[k].v.coeffs().to_vec();
            if let Some(g) = &sources[k] {
                add_scaled(&mut v_c, g.coeffs(), 0.5 * dt_c);
            }
            stepper.table.apply(&mut a_c, &mut v_c);
            if let Some(g) = &sources[k + 1] {
                add_scaled(&mut v_c, g.coeffs(), 0.5 * dt_c);
            }
            next.push(FluidState::new(
                SpectralField::from_coeffs(length_c, a_c),
                SpectralField::from_coeffs(length_c, v_c),
                (k + 1) as f64 * dt_c,
            ));
        }
        let diff = current
            .iter()
            .zip(&next)
            .map(|(older, newer)| {
                let da = newer.a.sub(&older.a);
                let dv = newer.v.sub(&older.v);
                besov_norm(&da, &spec_a, &check_bank) + besov_norm(&dv, &spec_v, &check_bank)
            })
            .fold(0.0, f64::max);
        differences.push(diff);
        current = next;
        iterates.push(map_back_sequence(&current, frame, config.dt));
    }

    Ok(PicardResult { iterates, differences })
}

fn map_back_sequence(states: &[FluidState], frame: CheckFrame, dt_frame: f64) -> Vec<FluidState> {
    states
        .iter()
        .enumerate()
        .map(|(k, st)| map_back(st, frame, k as f64 * dt_frame))
        .collect()
}

/// Trajectory of the pointwise limit ODE `theta_t = nu_bar (Q / nu)(theta)`.
#[derive(Debug, Clone)]
pub struct ThetaTrajectory {
    pub times: Vec<f64>,
    pub thetas: Vec<SpectralField>,
}

/// Classical RK4 integration, pointwise in y (no spatial coupling).
pub fn limit_ode_solve(
    eta0: &SpectralField,
    params: &ModelParams,
    nu_bar: f64,
    dt: f64,
    t_end: f64,
    stride: usize,
) -> Result<ThetaTrajectory> {
    if dt.is_nan() || dt <= 0.0 || stride == 0 {
        return Err(CoreError::InvalidConfig("dt and stride must be positive".into()));
    }
    let q_ref = params.pressure.value(params.eta_bar);
    let rhs = |theta: f64| {
        nu_bar * (params.pressure.value(theta) - q_ref) / params.viscosity.value(theta)
    };
    let check = |theta: &[f64], t: f64| -> Result<()> {
        for &x in theta {
            let ratio = x / params.eta_bar;
            if !(ADMISSIBLE_LO..=ADMISSIBLE_HI).contains(&ratio) {
                return Err(CoreError::LeftAdmissibleInterval {
                    t,
                    eta: x,
                    lo: ADMISSIBLE_LO * params.eta_bar,
                    hi: ADMISSIBLE_HI * params.eta_bar,
                });
            }
        }
        Ok(())
    };

    let mut theta: Vec<f64> = eta0.samples().to_vec();
    let length = eta0.length();
    let steps = (t_end / dt).round() as usize;
    let mut times = vec![0.0];
    let mut thetas = vec![eta0.clone()];
    check(&theta, 0.0)?;
    for k in 0..steps {
        let t = k as f64 * dt;
        for x in theta.iter_mut() {
            let k1 = rhs(*x);
            let k2 = rhs(*x + 0.5 * dt * k1);
            let k3 = rhs(*x + 0.5 * dt * k2);
            let k4 = rhs(*x + dt * k3);
            *x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        check(&theta, t + dt)?;
        if (k + 1) % stride == 0 || k + 1 == steps {
            times.push((k + 1) as f64 * dt);
            thetas.push(SpectralField::from_samples(length, theta.clone()));
        }
    }
    Ok(ThetaTrajectory { times, thetas })
}

/// Residuals of the effective-velocity identities along a trajectory of the
/// normalized system: `a_t + a - w_y` and `w_t - w_yy - g - v`, with time
/// derivatives from second-order differencing of the snapshots (never from
/// scheme internals).
#[derive(Debug, Clone, Copy)]
pub struct ResidualRecord {
    pub t: f64,
    pub relaxation_l2: f64,
    pub heat_l2: f64,
}

pub fn residual_monitor(traj: &Trajectory, params: &ModelParams) -> Result<Vec<ResidualRecord>> {
    let m = traj.states.len();
    if m < 3 {
        return Err(CoreError::TooFewSnapshots { need: 3, got: m });
    }
    let mut ws = Vec::with_capacity(m);
    let mut gs = Vec::with_capacity(m);
    for st in &traj.states {
        ws.push(effective_velocity(&st.a, &st.v)?);
        let g = if params.is_linear() {
            SpectralField::zero(st.a.n(), st.a.length())
        } else {
            let ak = params.pressure_nonlinearity(&st.a)?;
            let lr = params.viscosity_nonlinearity(&st.a)?;
            ak.add(&lr.mul_dealiased(&st.v.derivative())).derivative()
        };
        gs.push(g);
    }
    let mut out = Vec::with_capacity(m - 2);
    for k in 1..m - 1 {
        let (t0, t1, t2) = (traj.states[k - 1].time, traj.states[k].time, traj.states[k + 1].time);
        let (h1, h2) = (t1 - t0, t2 - t1);
        let denom = h1 * h2 * (h1 + h2);
        let d_dt = |prev: &SpectralField, mid: &SpectralField, next: &SpectralField| {
            next.scale(h1 * h1 / denom)
                .add(&mid.scale((h2 * h2 - h1 * h1) / denom))
                .sub(&prev.scale(h2 * h2 / denom))
        };
        let st = &traj.states[k];
        let a_t = d_dt(&traj.states[k - 1].a, &st.a, &traj.states[k + 1].a);
        let w_t = d_dt(&ws[k - 1], &ws[k], &ws[k + 1]);
        let relaxation = a_t.add(&st.a).sub(&ws[k].derivative());
        let v_fluct = st.v.map_samples({
            let mean = st.v.mean();
            move |x| x - mean
        });
        let heat = w_t
            .sub(&ws[k].derivative().derivative())
            .sub(&gs[k])
            .sub(&v_fluct);
        out.push(ResidualRecord {
            t: st.time,
            relaxation_l2: relaxation.lp_norm(2.0),
            heat_l2: heat.lp_norm(2.0),
        });
    }
    Ok(out)
}

/// Report of the frequency-localized Lyapunov functional
/// `L_j^2 = ||(a_j, v_j)||_{L^2}^2 - 2 kappa int v_j d_y a_j` along a run.
#[derive(Debug, Clone)]
pub struct LyapunovReport {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// `L_j / ||(a_j, v_j)||_{L^2}` per snapshot.
    pub equivalence_ratios: Vec<f64>,
    /// Smallest measured dissipation rate `c` with
    /// `d/dt L_j^2 + 2 c 2^{2j} L_j^2 <= 0` over the interior snapshots.
    pub measured_rate: f64,
    /// Monotone decay of `L_j` after second-order differencing.
    pub monotone: bool,
}

pub fn lyapunov_monitor(
    traj: &Trajectory,
    j: i32,
    j0: i32,
    kappa: f64,
    bank: &DyadicFilterBank,
) -> Result<LyapunovReport> {
    if j > j0 {
        return Err(CoreError::InvalidConfig(format!(
            "Lyapunov functional is tracked for j <= j0, got j = {j}, j0 = {j0}"
        )));
    }
    let c_b = bank.bernstein_constant();
    if 2.0 * c_b * f64::exp2(j0 as f64) * kappa > 1.0 {
        return Err(CoreError::InadmissibleKappa {
            kappa,
            condition: format!("2 C_B 2^j0 kappa <= 1 with measured C_B = {c_b:.6}"),
        });
    }
    if kappa * (1.5 + c_b * f64::exp2(2.0 * j0 as f64)) > 1.0 {
        return Err(CoreError::InadmissibleKappa {
            kappa,
            condition: format!("kappa (3/2 + C_B 2^(2 j0)) <= 1 with measured C_B = {c_b:.6}"),
        });
    }
    if traj.states.len() < 3 {
        return Err(CoreError::TooFewSnapshots { need: 3, got: traj.states.len() });
    }

    let length = traj.states[0].a.length();
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut sq = Vec::new();
    let mut ratios = Vec::new();
    for st in &traj.states {
        let a_j = bank.block(&st.a, j)?;
        let v_j = bank.block(&st.v, j)?;
        let l2_sq = a_j.lp_norm(2.0).powi(2) + v_j.lp_norm(2.0).powi(2);
        // int v_j d_y a_j via Parseval
        let cross: f64 = v_j
            .coeffs()
            .iter()
            .zip(a_j.coeffs())
            .enumerate()
            .map(|(k, (vc, ac))| {
                let xi = a_j.xi(k);
                (vc * (ac * Complex64::new(0.0, xi)).conj()).re
            })
            .sum::<f64>()
            * length;
        let l_sq = l2_sq - 2.0 * kappa * cross;
        times.push(st.time);
        sq.push(l_sq.max(0.0));
        values.push(l_sq.max(0.0).sqrt());
        if l2_sq > 0.0 {
            ratios.push((l_sq.max(0.0) / l2_sq).sqrt());
        }
    }

    let scale = sq.iter().fold(0.0f64, |m, &x| m.max(x));
    let mut measured = f64::INFINITY;
    let mut monotone = true;
    for k in 1..sq.len() - 1 {
        let h1 = times[k] - times[k - 1];
        let h2 = times[k + 1] - times[k];
        let denom = h1 * h2 * (h1 + h2);
        let deriv = (sq[k + 1] * h1 * h1 + sq[k] * (h2 * h2 - h1 * h1) - sq[k - 1] * h2 * h2) / denom;
        if deriv > 1e-10 * scale.max(1e-300) {
            monotone = false;
        }
        if sq[k] > 1e-14 * scale {
            measured = measured.min(-deriv / (2.0 * f64::exp2(2.0 * j as f64) * sq[k]));
        }
    }
    if !measured.is_finite() {
        measured = 0.0;
    }
    Ok(LyapunovReport {
        times,
        values,
        equivalence_ratios: ratios,
        measured_rate: measured,
        monotone,
    })
}
