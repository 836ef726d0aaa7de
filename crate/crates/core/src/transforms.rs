//! Eulerian <-> mass-Lagrangian coordinate changes, the two rescalings, and
//! the effective velocity.
//!
//! On the torus the mass coordinate `y(x) = int_0^x rho` wraps a circle of
//! circumference `M` (the total mass), so all Lagrangian-side grids live on
//! `[0, M)`. Map inversion and resampling use shape-preserving monotone
//! cubics, which cannot fold the map at steep density gradients.

use crate::error::{CoreError, Result};
use crate::field::{FluidState, SpectralField};
use crate::model::ModelParams;

/// Monotone cubic Hermite interpolant (Fritsch-Carlson slopes).
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        assert!(xs.len() >= 2 && xs.len() == ys.len());
        let n = xs.len();
        let h: Vec<f64> = (0..n - 1).map(|i| xs[i + 1] - xs[i]).collect();
        assert!(h.iter().all(|&hi| hi > 0.0), "nodes must be strictly increasing");
        let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
        let mut ds = vec![0.0; n];
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] <= 0.0 {
                ds[i] = 0.0;
            } else {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                ds[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        ds[0] = endpoint_slope(h[0], h[1.min(n - 2)], delta[0], delta[1.min(n - 2)]);
        ds[n - 1] = endpoint_slope(
            h[n - 2],
            h[n.saturating_sub(3).min(n - 2)],
            delta[n - 2],
            delta[n.saturating_sub(3).min(n - 2)],
        );
        Self { xs, ys, ds }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let i = match self.xs.partition_point(|&v| v <= x) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i] + h10 * h * self.ds[i] + h01 * self.ys[i + 1] + h11 * h * self.ds[i + 1]
    }
}

fn endpoint_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

/// Density and velocity on a uniform Eulerian grid.
#[derive(Debug, Clone)]
pub struct EulerianState {
    pub rho: SpectralField,
    pub u: SpectralField,
}

impl EulerianState {
    pub fn new(rho: SpectralField, u: SpectralField) -> Result<Self> {
        assert_eq!(rho.n(), u.n());
        if rho.min_sample() <= 0.0 {
            return Err(CoreError::NonpositiveDensity(rho.min_sample()));
        }
        Ok(Self { rho, u })
    }

    pub fn total_mass(&self) -> f64 {
        self.rho.mean() * self.rho.length()
    }
}

/// Sampled mass-coordinate map and its inverse.
#[derive(Debug, Clone)]
pub struct CoordinateMap {
    pub domain_length: f64,
    pub mass: f64,
    y_of_x: MonotoneCubic,
    x_of_y: MonotoneCubic,
}

impl CoordinateMap {
    pub fn y_of_x(&self, x: f64) -> f64 {
        self.y_of_x.eval(x)
    }

    pub fn x_of_y(&self, y: f64) -> f64 {
        self.x_of_y.eval(y)
    }
}

/// Change to mass-Lagrangian coordinates: `y(x) = int_0^x rho`, specific
/// volume `eta = 1/rho` and velocity resampled on a uniform grid of
/// circumference `M`.
pub fn to_lagrangian(
    state: &EulerianState,
    n_y: usize,
) -> Result<(SpectralField, SpectralField, CoordinateMap)> {
    let rho = &state.rho;
    if rho.min_sample() <= 0.0 {
        return Err(CoreError::NonpositiveDensity(rho.min_sample()));
    }
    let l_x = rho.length();
    let n_x = rho.n();
    let rho_bar = rho.mean();
    let mass = rho_bar * l_x;

    // y(x) = rho_bar x + primitive of the mean-free part, pinned to y(0) = 0
    let fluct = rho.map_samples(|r| r - rho_bar);
    let prim = fluct
        .antiderivative_zero_mean(1e-9)
        .expect("mean-free by construction");
    let p0 = prim.samples()[0];
    let dx = l_x / n_x as f64;
    let mut x_nodes = Vec::with_capacity(n_x + 1);
    let mut y_nodes = Vec::with_capacity(n_x + 1);
    for i in 0..n_x {
        x_nodes.push(i as f64 * dx);
        y_nodes.push(rho_bar * (i as f64 * dx) + prim.samples()[i] - p0);
    }
    x_nodes.push(l_x);
    y_nodes.push(mass);
    if y_nodes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CoreError::NonpositiveDensity(rho.min_sample()));
    }

    let y_of_x = MonotoneCubic::new(x_nodes.clone(), y_nodes.clone());
    let x_of_y = MonotoneCubic::new(y_nodes, x_nodes);

    // fields are resampled by exact evaluation of their trigonometric
    // interpolant; only the map inversion needs the monotone cubic
    let dy = mass / n_y as f64;
    let mut eta_samples = Vec::with_capacity(n_y);
    let mut v_samples = Vec::with_capacity(n_y);
    for j in 0..n_y {
        let x = x_of_y.eval(j as f64 * dy);
        eta_samples.push(1.0 / rho.eval_at(x));
        v_samples.push(state.u.eval_at(x));
    }
    Ok((
        SpectralField::from_samples(mass, eta_samples),
        SpectralField::from_samples(mass, v_samples),
        CoordinateMap { domain_length: l_x, mass, y_of_x, x_of_y },
    ))
}

/// Inverse change of variables: `x(y) = int_0^y eta`, density `1/eta` pulled
/// back to a uniform Eulerian grid.
pub fn to_eulerian(
    eta: &SpectralField,
    v: &SpectralField,
    n_x: usize,
) -> Result<(EulerianState, CoordinateMap)> {
    if eta.min_sample() <= 0.0 {
        return Err(CoreError::Vacuum(eta.min_sample()));
    }
    let mass = eta.length();
    let n_y = eta.n();
    let eta_bar = eta.mean();
    let l_x = eta_bar * mass;

    let fluct = eta.map_samples(|e| e - eta_bar);
    let prim = fluct
        .antiderivative_zero_mean(1e-9)
        .expect("mean-free by construction");
    let p0 = prim.samples()[0];
    let dy = mass / n_y as f64;
    let mut y_nodes = Vec::with_capacity(n_y + 1);
    let mut x_nodes = Vec::with_capacity(n_y + 1);
    for j in 0..n_y {
        y_nodes.push(j as f64 * dy);
        x_nodes.push(eta_bar * (j as f64 * dy) + prim.samples()[j] - p0);
    }
    y_nodes.push(mass);
    x_nodes.push(l_x);
    if x_nodes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CoreError::Vacuum(eta.min_sample()));
    }

    let x_of_y = MonotoneCubic::new(y_nodes.clone(), x_nodes.clone());
    let y_of_x = MonotoneCubic::new(x_nodes, y_nodes);

    let dx = l_x / n_x as f64;
    let mut rho_samples = Vec::with_capacity(n_x);
    let mut u_samples = Vec::with_capacity(n_x);
    for i in 0..n_x {
        let y = y_of_x.eval(i as f64 * dx);
        rho_samples.push(1.0 / eta.eval_at(y));
        u_samples.push(v.eval_at(y));
    }
    Ok((
        EulerianState::new(
            SpectralField::from_samples(l_x, rho_samples),
            SpectralField::from_samples(l_x, u_samples),
        )?,
        CoordinateMap { domain_length: l_x, mass, y_of_x, x_of_y },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// The normalization rescaling with `T = Ma^-2 nu_bar^-1`, `Y = Ma^-1 nu_bar^-1`
/// and `V = Ma^-1`: forward maps a state of the eta_bar-normalized system to
/// the fully normalized one. In this representation the dilation is a pure
/// relabeling of the domain length, exact for every ratio.
pub fn rescale_normalize(state: &FluidState, params: &ModelParams, dir: Direction) -> FluidState {
    let t_fac = 1.0 / (params.ma * params.ma * params.nu_bar);
    let y_fac = 1.0 / (params.ma * params.nu_bar);
    let v_fac = params.ma;
    match dir {
        Direction::Forward => FluidState::new(
            state.a.with_length_scaled(y_fac),
            state.v.scale(v_fac).with_length_scaled(y_fac),
            state.time * t_fac,
        ),
        Direction::Backward => FluidState::new(
            state.a.with_length_scaled(1.0 / y_fac),
            state.v.scale(1.0 / v_fac).with_length_scaled(1.0 / y_fac),
            state.time / t_fac,
        ),
    }
}

/// The diffusive rescaling `(eta, v)(t, y) = (eta_chk, nu_bar^-1 v_chk)(t/nu_bar, y)`:
/// time dilation and velocity scaling only, space untouched.
pub fn diffusive_rescale(state: &FluidState, nu_bar: f64, dir: Direction) -> FluidState {
    match dir {
        Direction::Forward => {
            FluidState::new(state.a.clone(), state.v.scale(nu_bar), state.time / nu_bar)
        }
        Direction::Backward => {
            FluidState::new(state.a.clone(), state.v.scale(1.0 / nu_bar), state.time * nu_bar)
        }
    }
}

/// Effective velocity `w = v + int_0^y a`, with the primitive's zero mode
/// gauged to zero. Requires mean-free `a`.
pub fn effective_velocity(a: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    let prim = a.antiderivative_zero_mean(1e-10)?;
    Ok(v.add(&prim))
}
