//! Constant-time statistic updates under transpositions.
//!
//! Both states keep rescaled accumulators rather than means and variances:
//! `nu = Σ v` and `om2 = Σ (v - mean)²`, plus `om_xy = n·Σ x y − Σx·Σy` for the
//! paired case. Dividing only when a statistic is read keeps the per-walk
//! roundoff from compounding.

use crate::error::{Error, Result};
use crate::perm::Walk;

/// A within-group sum of squares at or below this fraction of the pooled
/// total sum of squares is treated as zero.
pub const DEGENERACY_RTOL: f64 = 1e-12;

fn check_group(values: &[f64], group: &'static str, min: usize) -> Result<()> {
    if values.len() < min {
        return Err(Error::GroupTooSmall {
            group,
            len: values.len(),
            min,
        });
    }
    if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite { group, index, value });
    }
    Ok(())
}

fn sum(values: &[f64]) -> f64 {
    values.iter().sum()
}

fn ssd(values: &[f64]) -> f64 {
    let mean = sum(values) / values.len() as f64;
    values.iter().map(|v| (v - mean) * (v - mean)).sum()
}

/// Sum of squared deviations of `x ∪ y` around the pooled mean. Invariant
/// under any exchange between the groups.
fn pooled_ssd(x: &[f64], y: &[f64]) -> f64 {
    let l = (x.len() + y.len()) as f64;
    let mean = (sum(x) + sum(y)) / l;
    x.iter().chain(y).map(|v| (v - mean) * (v - mean)).sum()
}

#[inline]
fn is_degenerate(ssd: f64, scale: f64) -> bool {
    ssd <= DEGENERACY_RTOL * scale
}

#[inline]
fn pooled_t(nu_x: f64, nu_y: f64, om2_x: f64, om2_y: f64, m: f64, n: f64, scale: f64) -> Option<f64> {
    let within = om2_x.max(0.0) + om2_y.max(0.0);
    if is_degenerate(within, scale) {
        return None;
    }
    let pooled = within / (m + n - 2.0);
    Some((nu_x / m - nu_y / n) / (pooled * (1.0 / m + 1.0 / n)).sqrt())
}

#[inline]
fn pearson(om_xy: f64, om2_x: f64, om2_y: f64, n: f64, scale: f64) -> Option<f64> {
    let (vx, vy) = (om2_x.max(0.0), om2_y.max(0.0));
    if is_degenerate(vx, scale) || is_degenerate(vy, scale) {
        return None;
    }
    Some((om_xy / (n * (vx * vy).sqrt())).clamp(-1.0, 1.0))
}

/// Two groups `x` (size m) and `y` (size n) with running sufficient
/// statistics for the pooled-variance t-statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSampleState {
    x: Vec<f64>,
    y: Vec<f64>,
    nu_x: f64,
    nu_y: f64,
    om2_x: f64,
    om2_y: f64,
    scale: f64,
    consts: TwoSampleConsts,
}

/// Shape-dependent factors, fixed for the life of a state.
#[derive(Debug, Clone, Copy, PartialEq)]
struct TwoSampleConsts {
    inv_m: f64,
    inv_n: f64,
    /// `(1/m + 1/n) / (m + n - 2)`
    se_factor: f64,
    /// Within-group SSD at or below this is degenerate.
    floor: f64,
}

impl TwoSampleConsts {
    fn new(m: usize, n: usize, scale: f64) -> Self {
        let (mf, nf) = (m as f64, n as f64);
        Self {
            inv_m: 1.0 / mf,
            inv_n: 1.0 / nf,
            se_factor: (1.0 / mf + 1.0 / nf) / (mf + nf - 2.0),
            floor: DEGENERACY_RTOL * scale,
        }
    }
}

impl TwoSampleState {
    /// Both groups need at least two finite values.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check_group(&x, "x", 2)?;
        check_group(&y, "y", 2)?;
        let scale = pooled_ssd(&x, &y);
        let consts = TwoSampleConsts::new(x.len(), y.len(), scale);
        let mut state = Self {
            x,
            y,
            nu_x: 0.0,
            nu_y: 0.0,
            om2_x: 0.0,
            om2_y: 0.0,
            scale,
            consts,
        };
        state.refresh();
        Ok(state)
    }

    /// Recomputes every accumulator from the current group contents.
    pub fn refresh(&mut self) {
        self.nu_x = sum(&self.x);
        self.nu_y = sum(&self.y);
        self.om2_x = ssd(&self.x);
        self.om2_y = ssd(&self.y);
    }

    pub fn m(&self) -> usize {
        self.x.len()
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn nu_x(&self) -> f64 {
        self.nu_x
    }

    pub fn nu_y(&self) -> f64 {
        self.nu_y
    }

    /// `(m - 1)·σ²(x)`, clamped at zero.
    pub fn om2_x(&self) -> f64 {
        self.om2_x.max(0.0)
    }

    pub fn om2_y(&self) -> f64 {
        self.om2_y.max(0.0)
    }

    /// Exchanges `x[walk.i]` and `y[walk.j]` and updates the accumulators.
    pub fn apply_swap(&mut self, walk: Walk) -> Result<()> {
        if walk.i >= self.m() {
            return Err(Error::IndexOutOfRange {
                what: "x",
                index: walk.i + 1,
                len: self.m(),
            });
        }
        if walk.j >= self.n() {
            return Err(Error::IndexOutOfRange {
                what: "y",
                index: walk.j + 1,
                len: self.n(),
            });
        }
        self.swap_unchecked(walk.i, walk.j);
        Ok(())
    }

    #[inline]
    pub(crate) fn swap_unchecked(&mut self, i: usize, j: usize) {
        let xi = self.x[i];
        let yj = self.y[j];
        let c = &self.consts;
        let nu_x = self.nu_x + yj - xi;
        let nu_y = self.nu_y + xi - yj;
        self.om2_x += (self.nu_x * self.nu_x - nu_x * nu_x) * c.inv_m + yj * yj - xi * xi;
        self.om2_y += (self.nu_y * self.nu_y - nu_y * nu_y) * c.inv_n + xi * xi - yj * yj;
        self.nu_x = nu_x;
        self.nu_y = nu_y;
        self.x[i] = yj;
        self.y[j] = xi;
    }

    /// Pooled-variance t-statistic, `None` when the within-group variance
    /// vanishes.
    #[inline]
    pub fn t_statistic(&self) -> Option<f64> {
        let c = &self.consts;
        let within = self.om2_x.max(0.0) + self.om2_y.max(0.0);
        if within <= c.floor {
            return None;
        }
        Some((self.nu_x * c.inv_m - self.nu_y * c.inv_n) / (within * c.se_factor).sqrt())
    }
}

/// Paired samples `(x_k, y_k)` with running sums, variances and covariance.
/// A move exchanges the two members of one pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedState {
    x: Vec<f64>,
    y: Vec<f64>,
    nu_x: f64,
    nu_y: f64,
    om2_x: f64,
    om2_y: f64,
    om_xy: f64,
    scale: f64,
}

impl PairedState {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch(x.len(), y.len()));
        }
        check_group(&x, "x", 2)?;
        check_group(&y, "y", 2)?;
        let scale = pooled_ssd(&x, &y);
        let mut state = Self {
            x,
            y,
            nu_x: 0.0,
            nu_y: 0.0,
            om2_x: 0.0,
            om2_y: 0.0,
            om_xy: 0.0,
            scale,
        };
        state.refresh();
        Ok(state)
    }

    pub fn refresh(&mut self) {
        let n = self.x.len() as f64;
        self.nu_x = sum(&self.x);
        self.nu_y = sum(&self.y);
        self.om2_x = ssd(&self.x);
        self.om2_y = ssd(&self.y);
        let (mx, my) = (self.nu_x / n, self.nu_y / n);
        let cross: f64 = self.x.iter().zip(&self.y).map(|(a, b)| (a - mx) * (b - my)).sum();
        self.om_xy = n * cross;
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn nu_x(&self) -> f64 {
        self.nu_x
    }

    pub fn nu_y(&self) -> f64 {
        self.nu_y
    }

    pub fn om2_x(&self) -> f64 {
        self.om2_x.max(0.0)
    }

    pub fn om2_y(&self) -> f64 {
        self.om2_y.max(0.0)
    }

    /// `n·Σ x y − Σx·Σy`, i.e. `n(n−1)` times the sample covariance.
    pub fn om_xy(&self) -> f64 {
        self.om_xy
    }

    /// Exchanges `x[pair]` and `y[pair]` (0-based).
    pub fn apply_pair_swap(&mut self, pair: usize) -> Result<()> {
        if pair >= self.n() {
            return Err(Error::IndexOutOfRange {
                what: "pair",
                index: pair + 1,
                len: self.n(),
            });
        }
        self.swap_unchecked(pair);
        Ok(())
    }

    #[inline]
    pub(crate) fn swap_unchecked(&mut self, i: usize) {
        let xi = self.x[i];
        let yi = self.y[i];
        let n = self.x.len() as f64;
        let d = xi - yi;
        // Σxy is unchanged by the exchange, so only the product of sums moves;
        // that term needs the sums from before the swap.
        self.om_xy += d * d + d * (self.nu_y - self.nu_x);
        let nu_x = self.nu_x - d;
        let nu_y = self.nu_y + d;
        self.om2_x += (self.nu_x * self.nu_x - nu_x * nu_x) / n + yi * yi - xi * xi;
        self.om2_y += (self.nu_y * self.nu_y - nu_y * nu_y) / n + xi * xi - yi * yi;
        self.nu_x = nu_x;
        self.nu_y = nu_y;
        self.x[i] = yi;
        self.y[i] = xi;
    }

    /// Pearson correlation clamped to `[-1, 1]`; `None` if either margin has
    /// zero variance.
    #[inline]
    pub fn correlation(&self) -> Option<f64> {
        pearson(self.om_xy, self.om2_x, self.om2_y, self.x.len() as f64, self.scale)
    }
}

/// Pooled-variance two-sample t-statistic computed from scratch.
pub fn direct_t(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 || y.len() < 2 {
        return None;
    }
    pooled_t(
        sum(x),
        sum(y),
        ssd(x),
        ssd(y),
        x.len() as f64,
        y.len() as f64,
        pooled_ssd(x, y),
    )
}

/// Pearson correlation computed from scratch.
pub fn direct_corr(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let (mx, my) = (sum(x) / n, sum(y) / n);
    let cross: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    pearson(n * cross, ssd(x), ssd(y), n, pooled_ssd(x, y))
}
