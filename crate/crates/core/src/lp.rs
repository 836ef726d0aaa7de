//! Discrete homogeneous Littlewood-Paley decomposition on the torus, Besov
//! and hybrid low/high-frequency norms, time-integrated (tilde) norms, and
//! the Bony paraproduct/remainder operators.
//!
//! Rings live on the physical frequency axis: filter `j` is supported in the
//! annulus `3/4 * 2^j <= |xi| <= 8/3 * 2^j`. The profile is a degree-7
//! smoothstep bump, renormalized after sampling so the partition of unity is
//! exact (to rounding) at every discrete frequency the rings cover. With this
//! choice the dilation law of homogeneous Besov norms holds exactly between
//! grids related by a power-of-two dilation.
//!
//! ```
//! use lagns_core::{besov_norm, BesovSpec, DyadicFilterBank, SpectralField};
//! use std::f64::consts::PI;
//!
//! let (n, l) = (256, 16.0 * PI);
//! let bank = DyadicFilterBank::build(n, l, -3, 3).unwrap();
//! assert!(bank.partition_residual() < 1e-12);
//! let f = SpectralField::from_fn(n, l, |y| (2.0 * y).sin());
//! let norm = besov_norm(&f, &BesovSpec::full(0.5, 2.0), &bank);
//! assert!(norm > 0.0);
//! ```

use crate::error::{CoreError, Result};
use crate::field::SpectralField;

/// Degree-7 smoothstep: 0 below 0, 1 above 1, C^3 at both ends.
fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let t4 = t * t * t * t;
        t4 * (35.0 - 84.0 * t + 70.0 * t * t - 20.0 * t * t * t)
    }
}

/// Low-pass profile: 1 for |x| <= 3/4, 0 for |x| >= 4/3.
fn chi(x: f64) -> f64 {
    1.0 - smoothstep((x.abs() - 0.75) / (4.0 / 3.0 - 0.75))
}

/// Ring profile supported in 3/4 <= |x| <= 8/3, telescoping to one.
fn ring_profile(x: f64) -> f64 {
    chi(0.5 * x) - chi(x)
}

pub const RING_LOWER: f64 = 0.75;
pub const RING_UPPER: f64 = 8.0 / 3.0;

/// Sampled dyadic partition of unity for one grid.
#[derive(Debug, Clone)]
pub struct DyadicFilterBank {
    j_min: i32,
    j_max: i32,
    grid_size: usize,
    domain_length: f64,
    /// filters[j - j_min][k] = phi_j(xi_k), renormalized.
    filters: Vec<Vec<f64>>,
    /// Frequency magnitude per coefficient slot.
    xi_abs: Vec<f64>,
}

impl DyadicFilterBank {
    pub fn build(grid_size: usize, domain_length: f64, j_min: i32, j_max: i32) -> Result<Self> {
        if !grid_size.is_power_of_two() {
            return Err(CoreError::InvalidConfig(format!(
                "grid size {grid_size} is not a power of two"
            )));
        }
        if domain_length <= 0.0 {
            return Err(CoreError::InvalidConfig("domain length must be positive".into()));
        }
        if j_min > j_max {
            return Err(CoreError::UnresolvableRing(format!(
                "empty index range [{j_min}, {j_max}]"
            )));
        }
        let fundamental = 2.0 * std::f64::consts::PI / domain_length;
        let cutoff = 2.0 / 3.0 * std::f64::consts::PI * grid_size as f64 / domain_length;
        if f64::exp2(j_min as f64) < fundamental * (1.0 - 1e-9) {
            return Err(CoreError::UnresolvableRing(format!(
                "2^{j_min} below the fundamental frequency {fundamental:.6}"
            )));
        }
        if f64::exp2(j_max as f64) > cutoff * (1.0 + 1e-9) {
            return Err(CoreError::UnresolvableRing(format!(
                "2^{j_max} beyond the dealias cutoff {cutoff:.6}"
            )));
        }

        let probe = SpectralField::zero(grid_size, domain_length);
        let xi_abs: Vec<f64> = (0..grid_size).map(|k| probe.xi(k).abs()).collect();

        let mut filters: Vec<Vec<f64>> = (j_min..=j_max)
            .map(|j| {
                let scale = f64::exp2(-(j as f64));
                xi_abs.iter().map(|&x| ring_profile(x * scale)).collect()
            })
            .collect();

        // Divide-by-sum renormalization: exact partition wherever any ring is
        // positive, untouched support.
        for k in 0..grid_size {
            let total: f64 = filters.iter().map(|f| f[k]).sum();
            if total > 0.0 {
                for f in &mut filters {
                    f[k] /= total;
                }
            }
        }

        Ok(Self { j_min, j_max, grid_size, domain_length, filters, xi_abs })
    }

    /// Widest admissible index range for a grid.
    pub fn suggest_range(grid_size: usize, domain_length: f64) -> (i32, i32) {
        let fundamental = 2.0 * std::f64::consts::PI / domain_length;
        let cutoff = 2.0 / 3.0 * std::f64::consts::PI * grid_size as f64 / domain_length;
        let j_min = (fundamental.log2() - 1e-9).ceil() as i32;
        let j_max = (cutoff.log2() + 1e-9).floor() as i32;
        (j_min, j_max)
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn len(&self) -> usize {
        self.filters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filters.is_empty()
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn domain_length(&self) -> f64 {
        self.domain_length
    }

    pub fn filter(&self, j: i32) -> Result<&[f64]> {
        if j < self.j_min || j > self.j_max {
            return Err(CoreError::BlockOutOfRange { j, j_min: self.j_min, j_max: self.j_max });
        }
        Ok(&self.filters[(j - self.j_min) as usize])
    }

    /// Coefficient slots inside the resolved, dealiased band where the
    /// partition of unity is claimed.
    pub fn resolved_band(&self) -> Vec<usize> {
        let lo = f64::exp2((self.j_min + 1) as f64) * (1.0 - 1e-9);
        let cutoff = 2.0 / 3.0 * std::f64::consts::PI * self.grid_size as f64 / self.domain_length;
        let hi = cutoff.min(RING_UPPER * f64::exp2(self.j_max as f64) * (1.0 - 1e-12));
        (0..self.grid_size)
            .filter(|&k| self.xi_abs[k] >= lo && self.xi_abs[k] <= hi)
            .collect()
    }

    /// Largest deviation of the sampled partition from one over the resolved band.
    pub fn partition_residual(&self) -> f64 {
        self.resolved_band()
            .iter()
            .map(|&k| {
                let s: f64 = self.filters.iter().map(|f| f[k]).sum();
                (s - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Frequency-localized block of a field.
    pub fn block(&self, f: &SpectralField, j: i32) -> Result<SpectralField> {
        self.check_grid(f);
        Ok(f.apply_multiplier(self.filter(j)?))
    }

    /// Low-pass `S_{j-1}`: the sum of all blocks strictly below ring `j - 1`.
    /// The mean is excluded, as in the homogeneous calculus.
    pub fn low_pass_below(&self, f: &SpectralField, j: i32) -> SpectralField {
        self.check_grid(f);
        let mut mult = vec![0.0; self.grid_size];
        for jj in self.j_min..=(j - 2).min(self.j_max) {
            let filt = &self.filters[(jj - self.j_min) as usize];
            for k in 0..self.grid_size {
                mult[k] += filt[k];
            }
        }
        f.apply_multiplier(&mult)
    }

    /// Summed multiplier over an inclusive index range (clamped to the bank).
    fn range_multiplier(&self, from: i32, to: i32) -> Vec<f64> {
        let mut mult = vec![0.0; self.grid_size];
        for j in from.max(self.j_min)..=to.min(self.j_max) {
            let filt = &self.filters[(j - self.j_min) as usize];
            for k in 0..self.grid_size {
                mult[k] += filt[k];
            }
        }
        mult
    }

    /// Low-frequency projector `z^{l,alpha}` (blocks with j <= j0 + log2 alpha).
    pub fn project_low(&self, f: &SpectralField, j0: i32, alpha: f64) -> SpectralField {
        let t = j0 as f64 + alpha.log2();
        f.apply_multiplier(&self.range_multiplier(self.j_min, (t + 1e-9).floor() as i32))
    }

    /// High-frequency projector `z^{h,alpha}` (blocks with j > j0 + log2 alpha).
    pub fn project_high(&self, f: &SpectralField, j0: i32, alpha: f64) -> SpectralField {
        let t = j0 as f64 + alpha.log2();
        f.apply_multiplier(&self.range_multiplier((t + 1e-9).floor() as i32 + 1, self.j_max))
    }

    /// `L^p` norms of every block, bank order.
    pub fn block_norms(&self, f: &SpectralField, p: f64) -> Vec<f64> {
        self.check_grid(f);
        if p == 2.0 {
            self.filters.iter().map(|filt| f.filtered_l2(filt)).collect()
        } else {
            self.filters
                .iter()
                .map(|filt| f.apply_multiplier(filt).lp_norm(p))
                .collect()
        }
    }

    /// Largest |xi| / 2^j over the support of the sampled filters; the
    /// measured Bernstein constant of this bank.
    pub fn bernstein_constant(&self) -> f64 {
        let mut c: f64 = 0.0;
        for (idx, filt) in self.filters.iter().enumerate() {
            let j = self.j_min + idx as i32;
            let inv = f64::exp2(-(j as f64));
            for (phi, xi) in filt.iter().zip(&self.xi_abs) {
                if *phi > 0.0 {
                    c = c.max(xi * inv);
                }
            }
        }
        c
    }

    fn check_grid(&self, f: &SpectralField) {
        assert_eq!(f.n(), self.grid_size, "field grid does not match bank");
        assert!(
            (f.length() - self.domain_length).abs() <= 1e-12 * self.domain_length,
            "field domain does not match bank"
        );
    }
}

/// Summation exponent of a Besov norm; the estimates only ever use 1 and inf.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumExp {
    One,
    Inf,
}

/// Frequency-range selector of a (semi)norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreqRange {
    Full,
    Low,
    High,
}

/// One homogeneous Besov (semi)norm specification.
#[derive(Debug, Clone, Copy)]
pub struct BesovSpec {
    pub p: f64,
    pub r: SumExp,
    pub sigma: f64,
    pub range: FreqRange,
    pub j0: i32,
    pub alpha: f64,
}

impl BesovSpec {
    pub fn full(sigma: f64, p: f64) -> Self {
        Self { p, r: SumExp::One, sigma, range: FreqRange::Full, j0: 0, alpha: 1.0 }
    }

    pub fn low(sigma: f64, p: f64, j0: i32, alpha: f64) -> Self {
        Self { p, r: SumExp::One, sigma, range: FreqRange::Low, j0, alpha }
    }

    pub fn high(sigma: f64, p: f64, j0: i32, alpha: f64) -> Self {
        Self { p, r: SumExp::One, sigma, range: FreqRange::High, j0, alpha }
    }

    /// Inclusive block range selected inside a bank. The low range keeps one
    /// extra ring past the split, the high range starts at the split.
    pub fn j_range(&self, bank: &DyadicFilterBank) -> (i32, i32) {
        match self.range {
            FreqRange::Full => (bank.j_min(), bank.j_max()),
            FreqRange::Low => {
                let t = self.j0 as f64 + 1.0 + self.alpha.log2();
                (bank.j_min(), ((t + 1e-9).floor() as i32).min(bank.j_max()))
            }
            FreqRange::High => {
                let t = self.j0 as f64 + self.alpha.log2();
                (((t - 1e-9).ceil() as i32).max(bank.j_min()), bank.j_max())
            }
        }
    }
}

/// Weighted block sum `|| 2^{j sigma} ||Delta_j f||_{L^p} ||_{l^r}` over the
/// spec's range.
pub fn besov_norm(f: &SpectralField, spec: &BesovSpec, bank: &DyadicFilterBank) -> f64 {
    let (lo, hi) = spec.j_range(bank);
    let mut sum = 0.0;
    let mut sup: f64 = 0.0;
    for j in lo..=hi {
        let block = bank.block(f, j).expect("range clamped to bank");
        let term = f64::exp2(j as f64 * spec.sigma) * block.lp_norm(spec.p);
        match spec.r {
            SumExp::One => sum += term,
            SumExp::Inf => sup = sup.max(term),
        }
    }
    match spec.r {
        SumExp::One => sum,
        SumExp::Inf => sup,
    }
}

/// Low and high hybrid norms with the one-block overlap.
#[allow(clippy::too_many_arguments)]
pub fn hybrid_norms(
    f: &SpectralField,
    sigma_low: f64,
    p_low: f64,
    sigma_high: f64,
    p_high: f64,
    j0: i32,
    alpha: f64,
    bank: &DyadicFilterBank,
) -> (f64, f64) {
    let low = besov_norm(f, &BesovSpec::low(sigma_low, p_low, j0, alpha), bank);
    let high = besov_norm(f, &BesovSpec::high(sigma_high, p_high, j0, alpha), bank);
    (low, high)
}

/// Time exponent of a tilde norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeExp {
    One,
    Two,
    Inf,
}

/// Per-block `L^p` norms recorded along a trajectory, enough to evaluate
/// tilde norms without re-filtering snapshots.
#[derive(Debug, Clone)]
pub struct BlockNormHistory {
    j_min: i32,
    times: Vec<f64>,
    per_block: Vec<Vec<f64>>,
}

impl BlockNormHistory {
    pub fn new(j_min: i32, n_blocks: usize) -> Self {
        Self { j_min, times: Vec::new(), per_block: vec![Vec::new(); n_blocks] }
    }

    pub fn push(&mut self, t: f64, block_values: &[f64]) {
        assert_eq!(block_values.len(), self.per_block.len());
        if let Some(&last) = self.times.last() {
            assert!(t > last, "history times must be strictly increasing");
        }
        self.times.push(t);
        for (col, &v) in self.per_block.iter_mut().zip(block_values) {
            col.push(v);
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn n_blocks(&self) -> usize {
        self.per_block.len()
    }

    pub fn block_series(&self, j: i32) -> Option<&[f64]> {
        let idx = j.checked_sub(self.j_min)? as usize;
        self.per_block.get(idx).map(|v| v.as_slice())
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// The prefix of the history up to time `t_max` (inclusive, with a small
    /// tolerance); used to evaluate running functionals.
    pub fn truncated(&self, t_max: f64) -> Self {
        let keep = self.times.partition_point(|&t| t <= t_max + 1e-12);
        Self {
            j_min: self.j_min,
            times: self.times[..keep].to_vec(),
            per_block: self.per_block.iter().map(|col| col[..keep].to_vec()).collect(),
        }
    }

    /// Time-`L^m` norm of one block series with a per-time scalar weight.
    /// Trapezoid rule for m in {1, 2}, running max for m = inf.
    fn block_time_norm<W: Fn(f64) -> f64>(&self, series: &[f64], m: TimeExp, weight: &W) -> f64 {
        match m {
            TimeExp::Inf => self
                .times
                .iter()
                .zip(series)
                .fold(0.0, |acc, (&t, &v)| acc.max((weight(t) * v).abs())),
            TimeExp::One => trapezoid(&self.times, |i| (weight(self.times[i]) * series[i]).abs()),
            TimeExp::Two => trapezoid(&self.times, |i| {
                let w = weight(self.times[i]) * series[i];
                w * w
            })
            .sqrt(),
        }
    }
}

fn trapezoid<F: Fn(usize) -> f64>(times: &[f64], f: F) -> f64 {
    if times.len() < 2 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 1..times.len() {
        acc += 0.5 * (times[i] - times[i - 1]) * (f(i) + f(i - 1));
    }
    acc
}

/// Tilde norm: per-block time-`L^m` norm, then the weighted block sum.
pub fn tilde_norm(
    history: &BlockNormHistory,
    m: TimeExp,
    spec: &BesovSpec,
    bank: &DyadicFilterBank,
) -> Result<f64> {
    tilde_norm_weighted(history, m, spec, bank, |_| 1.0)
}

/// Tilde norm of a time-weighted field, the weight applied per snapshot
/// before the per-block time norms.
pub fn tilde_norm_weighted<W: Fn(f64) -> f64>(
    history: &BlockNormHistory,
    m: TimeExp,
    spec: &BesovSpec,
    bank: &DyadicFilterBank,
    weight: W,
) -> Result<f64> {
    if history.is_empty() {
        return Err(CoreError::EmptyHistory);
    }
    let (lo, hi) = spec.j_range(bank);
    let mut sum = 0.0;
    let mut sup: f64 = 0.0;
    for j in lo..=hi {
        let Some(series) = history.block_series(j) else { continue };
        let t_norm = history.block_time_norm(series, m, &weight);
        let term = f64::exp2(j as f64 * spec.sigma) * t_norm;
        match spec.r {
            SumExp::One => sum += term,
            SumExp::Inf => sup = sup.max(term),
        }
    }
    Ok(match spec.r {
        SumExp::One => sum,
        SumExp::Inf => sup,
    })
}

/// Record every block norm of a field into the bank's order.
pub fn record_blocks(
    history: &mut BlockNormHistory,
    t: f64,
    f: &SpectralField,
    p: f64,
    bank: &DyadicFilterBank,
) {
    history.push(t, &bank.block_norms(f, p));
}

/// Bony decomposition `(T_f g, T_g f, R(f, g))`. Every pointwise product is
/// dealiased. Means are excluded by the homogeneous low-pass, so the three
/// pieces reconstruct `(f - mean f)(g - mean g)` on the dealiased band.
pub fn bony_decompose(
    f: &SpectralField,
    g: &SpectralField,
    bank: &DyadicFilterBank,
) -> (SpectralField, SpectralField, SpectralField) {
    let n = f.n();
    let length = f.length();
    let blocks_f: Vec<SpectralField> = (bank.j_min()..=bank.j_max())
        .map(|j| bank.block(f, j).expect("in range"))
        .collect();
    let blocks_g: Vec<SpectralField> = (bank.j_min()..=bank.j_max())
        .map(|j| bank.block(g, j).expect("in range"))
        .collect();

    let mut t_fg = SpectralField::zero(n, length);
    let mut t_gf = SpectralField::zero(n, length);
    let mut remainder = SpectralField::zero(n, length);

    for j in bank.j_min()..=bank.j_max() {
        let idx = (j - bank.j_min()) as usize;
        let s_f = bank.low_pass_below(f, j);
        let s_g = bank.low_pass_below(g, j);
        t_fg = t_fg.add(&s_f.mul_dealiased(&blocks_g[idx]));
        t_gf = t_gf.add(&s_g.mul_dealiased(&blocks_f[idx]));
        for jp in (j - 1).max(bank.j_min())..=(j + 1).min(bank.j_max()) {
            let idx_p = (jp - bank.j_min()) as usize;
            remainder = remainder.add(&blocks_f[idx].mul_dealiased(&blocks_g[idx_p]));
        }
    }
    (t_fg, t_gf, remainder)
}
