//! Sturmian trace map.
//!
//! `M_{-1} = S(γ,ζ)S(β,ζ)⁻¹`, `M_0 = ζ^{-1/2}S(β,ζ)` and
//! `M_n = M_{n-2} M_{n-1}^{a_n}`, so that `M_n = ζ^{-q_n/2} T_{ω_0}(q_n,0;ζ)`.
//! The half-traces `x_n = ½tr M_{n-1}`, `y_n = ½tr M_n`, `z_n = ½tr M_nM_{n-1}`
//! evolve by a polynomial map that conserves the Fricke–Vogt invariant.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cmv::{angle, rho};
use crate::contfrac::convergents;
use crate::error::{Error, Result};
use crate::mat2::{Mat2, ScaledMat2, C64};
use crate::transfer::szego;

/// Budget-independent floor for the escape guard.
pub const DEFAULT_ESCAPE_THRESHOLD: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSetup {
    pub beta: C64,
    pub gamma: C64,
    pub cf: Vec<u64>,
    pub zeta: C64,
    /// `arg ζ ∈ [0, 2π)`, fixed once; `ζ^{-q/2} = |ζ|^{-q/2} e^{-iqφ/2}`.
    pub phase: f64,
}

impl TraceSetup {
    pub fn new(beta: C64, gamma: C64, cf: Vec<u64>, zeta: C64) -> Result<Self> {
        for (name, v) in [("beta", beta), ("gamma", gamma)] {
            if !(v.norm() < 1.0) {
                return Err(Error::Domain(format!("|{name}| = {} is not < 1", v.norm())));
            }
        }
        if zeta.norm() == 0.0 || !zeta.is_finite() {
            return Err(Error::Domain("zeta must be finite and nonzero".into()));
        }
        if cf.contains(&0) {
            return Err(Error::Domain("partial quotients must be >= 1".into()));
        }
        Ok(Self {
            beta,
            gamma,
            cf,
            zeta,
            phase: angle(zeta),
        })
    }

    /// `ζ^{1/2}` on the fixed branch.
    pub fn branch_root(&self) -> C64 {
        self.half_power(-1)
    }

    /// `ζ^{-q/2}`. Exponents add, so the branch rule
    /// `ζ^{-q_n/2} = (ζ^{-q_{n-1}/2})^{a_n} ζ^{-q_{n-2}/2}` holds identically.
    pub fn half_power(&self, q: i64) -> C64 {
        C64::from_polar(self.zeta.norm().powf(-(q as f64) / 2.0), -(q as f64) * self.phase / 2.0)
    }
}

/// `(M_{-1}, M_0)`.
pub fn init_matrices(setup: &TraceSetup) -> Result<(Mat2, Mat2)> {
    let sb = szego(setup.beta, setup.zeta)?;
    let sg = szego(setup.gamma, setup.zeta)?;
    Ok((sg * sb.inverse(), sb.scale(setup.half_power(1))))
}

/// `M_{-1}, M_0, …, M_n` as plain matrices.
pub fn iterate_matrices(setup: &TraceSetup, n: usize) -> Result<Vec<Mat2>> {
    check_depth(setup, n)?;
    let (m_1, m0) = init_matrices(setup)?;
    let mut out = vec![m_1, m0];
    for k in 1..=n {
        let next = out[k - 1] * out[k].pow(setup.cf[k - 1]);
        if !next.is_finite() {
            return Err(Error::Overflow { step: k });
        }
        out.push(next);
    }
    Ok(out)
}

/// `M_n` in scale-and-log form; never overflows.
pub fn iterate_scaled(setup: &TraceSetup, n: usize) -> Result<ScaledMat2> {
    check_depth(setup, n)?;
    let (m_1, m0) = init_matrices(setup)?;
    let (mut older, mut newer) = (ScaledMat2::from(m_1), ScaledMat2::from(m0));
    for k in 1..=n {
        let next = older * newer.pow(setup.cf[k - 1]);
        older = std::mem::replace(&mut newer, next);
    }
    Ok(newer)
}

fn check_depth(setup: &TraceSetup, n: usize) -> Result<()> {
    if n > setup.cf.len() {
        return Err(Error::Domain(format!(
            "depth {n} needs {n} partial quotients, have {}",
            setup.cf.len()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceTriple {
    pub x: C64,
    pub y: C64,
    pub z: C64,
}

impl TraceTriple {
    pub fn invariant(&self) -> C64 {
        let (x, y, z) = (self.x, self.y, self.z);
        x * x + y * y + z * z - 2.0 * x * y * z - 1.0
    }

    pub fn max_abs(&self) -> f64 {
        self.x.norm().max(self.y.norm()).max(self.z.norm())
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    fn from_matrices(prev: &Mat2, cur: &Mat2) -> Self {
        Self {
            x: prev.trace() / 2.0,
            y: cur.trace() / 2.0,
            z: (*cur * *prev).trace() / 2.0,
        }
    }

    /// One step of the map with partial quotient `a`, via
    /// `M^a = U_{a-1}(y) M − U_{a-2}(y) I` for `det M = 1`.
    pub fn step(&self, a: u64) -> Self {
        let (u_am2, u_am1, u_a) = chebyshev_u(self.y, a);
        Self {
            x: self.y,
            y: u_am1 * self.z - u_am2 * self.x,
            z: u_a * self.z - u_am1 * self.x,
        }
    }
}

/// `(U_{a-2}(y), U_{a-1}(y), U_a(y))` with `U_{-1} = 0`, `U_0 = 1`.
fn chebyshev_u(y: C64, a: u64) -> (C64, C64, C64) {
    let two_y = 2.0 * y;
    let (mut prev, mut cur) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    // (prev, cur) = (U_{k-1}, U_k), starting at k = 0
    let mut before = C64::new(0.0, 0.0);
    for _ in 0..a {
        let next = two_y * cur - prev;
        before = prev;
        prev = cur;
        cur = next;
    }
    if a == 0 {
        // U_{-2} = −1
        return (C64::new(-1.0, 0.0), prev, cur);
    }
    (before, prev, cur)
}

/// The conserved quantity `x² + y² + z² − 2xyz − 1` in closed form.
pub fn fricke_vogt(beta: C64, gamma: C64, zeta: C64) -> Result<C64> {
    for v in [beta, gamma] {
        if !(v.norm() < 1.0) {
            return Err(Error::Domain(format!("|{v}| is not < 1")));
        }
    }
    let (rb2, rg2) = (rho(beta).powi(2), rho(gamma).powi(2));
    let k = 2.0 - 2.0 * (beta * gamma.conj()).re;
    let re_zeta = C64::new(zeta.re, 0.0);
    Ok(re_zeta / (2.0 * rb2 * rg2) * (rb2 + rg2 - k)
        + C64::new((k * k - 2.0 * k + 2.0 * rb2 + 2.0 * rg2) / (4.0 * rb2 * rg2) - 1.0, 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitStatus {
    Bounded,
    Escaped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    /// `triples[n] = (x_n, y_n, z_n)` for `n = 0..`.
    pub triples: Vec<TraceTriple>,
    pub status: OrbitStatus,
    pub escape_step: Option<usize>,
    /// `max_n |I_n − I(ζ)|` over finite steps.
    pub invariant_drift: f64,
}

/// Trace triples for `n = 0..=n_max` by the polynomial map.
pub fn trace_orbit(setup: &TraceSetup, n_max: usize) -> Result<OrbitRecord> {
    run_orbit(setup, n_max, None)
}

/// Trace triples for `n = 0..=n_max` from explicit matrix products.
pub fn trace_orbit_by_products(setup: &TraceSetup, n_max: usize) -> Result<Vec<TraceTriple>> {
    let ms = iterate_matrices(setup, n_max)?;
    Ok(ms.windows(2).map(|w| TraceTriple::from_matrices(&w[0], &w[1])).collect())
}

/// Runs the trace map for up to `n_max` steps, stopping once the orbit
/// provably escapes.
///
/// With `g = max(threshold, 1 + max(0, |tr M_{-1}| − 2)/2)`, the condition
/// `|y_n| > g`, `|z_n| > max(g, |x_n|)` reproduces itself under every step and
/// forces `|z_{n+1}| ≥ (2|y_n| − 1)|z_n|`, so once it holds `y_n → ∞`.
/// A non-finite triple also counts as escape.
pub fn bounded_orbit_test(setup: &TraceSetup, n_max: usize, escape_threshold: f64) -> Result<OrbitRecord> {
    if n_max < 5 {
        return Err(Error::Domain(format!("budget {n_max} < 5")));
    }
    run_orbit(setup, n_max, Some(escape_threshold))
}

pub fn escape_guard(setup: &TraceSetup, escape_threshold: f64) -> Result<f64> {
    let (m_1, _) = init_matrices(setup)?;
    let excess = (m_1.trace().norm() - 2.0).max(0.0);
    Ok(escape_threshold.max(1.0 + excess / 2.0))
}

fn run_orbit(setup: &TraceSetup, n_max: usize, threshold: Option<f64>) -> Result<OrbitRecord> {
    check_depth(setup, n_max)?;
    let (m_1, m0) = init_matrices(setup)?;
    let guard = match threshold {
        Some(t) => Some(escape_guard(setup, t)?),
        None => None,
    };
    let inv = fricke_vogt(setup.beta, setup.gamma, setup.zeta)?;
    let mut t = TraceTriple::from_matrices(&m_1, &m0);
    let mut triples = vec![t];
    let mut drift: f64 = 0.0;
    let mut escape_step = None;
    for n in 0..=n_max {
        if n > 0 {
            t = t.step(setup.cf[n - 1]);
            triples.push(t);
        }
        if t.is_finite() {
            let d = (t.invariant() - inv).norm();
            if d.is_finite() {
                drift = drift.max(d);
            }
        }
        if let Some(g) = guard {
            let fired = !t.is_finite()
                || (t.y.norm() > g && t.z.norm() > g && t.z.norm() > t.x.norm());
            if fired {
                escape_step = Some(n);
                break;
            }
        }
    }
    Ok(OrbitRecord {
        triples,
        status: if escape_step.is_some() {
            OrbitStatus::Escaped
        } else {
            OrbitStatus::Bounded
        },
        escape_step,
        invariant_drift: drift,
    })
}

/// `(1/q_n) log ‖M_n(ζ)‖`.
pub fn lyapunov_estimate(setup: &TraceSetup, n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::Domain(format!("n = {n} < 3")));
    }
    let q = convergents(&setup.cf, n)
        .q_u64(n)
        .ok_or_else(|| Error::Domain(format!("q_{n} does not fit in 64 bits")))?;
    let m = iterate_scaled(setup, n)?;
    Ok(m.log_norm() / q as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthSequence {
    /// `G_0..=G_k`
    pub g: Vec<u128>,
    /// `min(1/q_{k0}, a_{k0+1}/q_{k0+1})` as `(numerator, denominator)` pairs
    /// compared exactly.
    pub bound: (u128, u128),
    /// `G_j / q_{j+k0} ≥ C` for every `j`.
    pub holds: bool,
}

/// `G_0 = 1`, `G_1 = a_{k0+1}`, `G_{j+1} = a_{k0+j+1} G_j + G_{j-1}`.
pub fn growth_sequence(cf: &[u64], k0: usize, k: usize) -> Result<GrowthSequence> {
    if k0 < 1 {
        return Err(Error::Domain("k0 must be >= 1".into()));
    }
    if k0 + k.max(1) > cf.len() {
        return Err(Error::Domain(format!(
            "need {} partial quotients, have {}",
            k0 + k.max(1),
            cf.len()
        )));
    }
    let conv = convergents(cf, k0 + k.max(1));
    let q = |j: usize| -> Result<u128> {
        u128::try_from(&conv.q[j]).map_err(|_| Error::Domain(format!("q_{j} exceeds 128 bits")))
    };
    let a = |j: usize| cf[j - 1] as u128;
    let mut g = vec![1u128];
    if k >= 1 {
        g.push(a(k0 + 1));
    }
    for j in 1..k {
        let next = a(k0 + j + 1)
            .checked_mul(g[j])
            .and_then(|v| v.checked_add(g[j - 1]))
            .ok_or_else(|| Error::Domain("G_k exceeds 128 bits".into()))?;
        g.push(next);
    }
    // 1/q_{k0} vs a_{k0+1}/q_{k0+1}
    let (q0, q1) = (q(k0)?, q(k0 + 1)?);
    let bound = if q1 <= a(k0 + 1) * q0 { (1, q0) } else { (a(k0 + 1), q1) };
    let mut holds = true;
    for (j, &gj) in g.iter().enumerate() {
        // gj / q_{j+k0} ≥ bound.0 / bound.1
        if gj * bound.1 < bound.0 * q(j + k0)? {
            holds = false;
        }
    }
    Ok(GrowthSequence { g, bound, holds })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub angle: f64,
    pub zeta: [f64; 2],
    pub status: OrbitStatus,
    pub escape_step: Option<usize>,
    pub lyapunov: f64,
    pub invariant_drift: f64,
}

impl ScanPoint {
    /// Bounded through step `n` of the budget.
    pub fn bounded_at(&self, n: usize) -> bool {
        self.escape_step.is_none_or(|s| s > n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumScan {
    pub beta: C64,
    pub gamma: C64,
    pub cf: Vec<u64>,
    pub grid_size: usize,
    pub budget: usize,
    pub escape_threshold: f64,
    /// Uniform grid first, then refinement points in ascending angle.
    pub points: Vec<ScanPoint>,
    /// `arc_measure[n]`: measure of the points still bounded at step `n`.
    pub arc_measure: Vec<f64>,
}

impl SpectrumScan {
    pub fn grid(&self) -> &[ScanPoint] {
        &self.points[..self.grid_size]
    }

    pub fn bounded_points(&self) -> impl Iterator<Item = &ScanPoint> {
        self.points.iter().filter(|p| p.status == OrbitStatus::Bounded)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub escape_threshold: f64,
    /// Bisection depth for cells whose endpoints disagree.
    pub refine: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            escape_threshold: DEFAULT_ESCAPE_THRESHOLD,
            refine: 0,
        }
    }
}

pub fn scan_point(beta: C64, gamma: C64, cf: &[u64], theta: f64, budget: usize, escape_threshold: f64) -> Result<ScanPoint> {
    let zeta = C64::from_polar(1.0, theta);
    let setup = TraceSetup::new(beta, gamma, cf[..budget].to_vec(), zeta)?;
    let rec = bounded_orbit_test(&setup, budget, escape_threshold)?;
    Ok(ScanPoint {
        angle: theta,
        zeta: [zeta.re, zeta.im],
        status: rec.status,
        escape_step: rec.escape_step,
        lyapunov: lyapunov_estimate(&setup, budget)?,
        invariant_drift: rec.invariant_drift,
    })
}

/// A bounded angle within `radius` of `theta`, sampled at `2·samples + 1`
/// evenly spaced angles ordered by distance from `theta`.
///
/// Bands of `B` can be far narrower than a scan cell, so a grid can miss
/// bounded points that a local search finds.
#[allow(clippy::too_many_arguments)]
pub fn bounded_angle_near(
    beta: C64,
    gamma: C64,
    cf: &[u64],
    theta: f64,
    radius: f64,
    samples: usize,
    budget: usize,
    escape_threshold: f64,
) -> Result<Option<f64>> {
    if budget > cf.len() {
        return Err(Error::Domain(format!("budget {budget} exceeds {} partial quotients", cf.len())));
    }
    let step = radius / samples.max(1) as f64;
    for i in 0..=samples as i64 {
        for x in [theta - i as f64 * step, theta + i as f64 * step] {
            let x = x.rem_euclid(std::f64::consts::TAU);
            let setup = TraceSetup::new(beta, gamma, cf[..budget].to_vec(), C64::from_polar(1.0, x))?;
            if bounded_orbit_test(&setup, budget, escape_threshold)?.status == OrbitStatus::Bounded {
                return Ok(Some(x));
            }
            if i == 0 {
                break;
            }
        }
    }
    Ok(None)
}

/// Bounded-orbit verdicts on `grid_size` equally spaced angles.
///
/// Arc measure counts each point with half the gap to each neighbour, which
/// for the plain grid is `2π/grid_size` per bounded point.
pub fn spectrum_scan(
    beta: C64,
    gamma: C64,
    cf: &[u64],
    grid_size: usize,
    budget: usize,
    opts: ScanOptions,
) -> Result<SpectrumScan> {
    if grid_size < 64 {
        return Err(Error::Domain(format!("grid size {grid_size} < 64")));
    }
    if budget > cf.len() {
        return Err(Error::Domain(format!(
            "budget {budget} needs {budget} partial quotients, have {}",
            cf.len()
        )));
    }
    let tau = std::f64::consts::TAU;
    let h = tau / grid_size as f64;
    let eval = |theta: f64| scan_point(beta, gamma, cf, theta, budget, opts.escape_threshold);
    let grid: Vec<ScanPoint> = (0..grid_size)
        .into_par_iter()
        .map(|j| eval(j as f64 * h))
        .collect::<Result<_>>()?;

    let mut extra = Vec::new();
    if opts.refine > 0 {
        let cells: Vec<usize> = (0..grid_size)
            .filter(|&j| grid[j].status != grid[(j + 1) % grid_size].status)
            .collect();
        let refined: Vec<Vec<ScanPoint>> = cells
            .par_iter()
            .map(|&j| {
                let left = grid[j].status;
                let (mut a, mut b) = (j as f64 * h, (j + 1) as f64 * h);
                let mut pts = Vec::new();
                for _ in 0..opts.refine {
                    let mid = eval((a + b) / 2.0)?;
                    if mid.status == left {
                        a = mid.angle;
                    } else {
                        b = mid.angle;
                    }
                    pts.push(mid);
                }
                Ok(pts)
            })
            .collect::<Result<_>>()?;
        extra = refined.into_iter().flatten().collect();
        extra.sort_by(|p, q| p.angle.total_cmp(&q.angle));
    }

    let mut all: Vec<&ScanPoint> = grid.iter().chain(extra.iter()).collect();
    all.sort_by(|p, q| p.angle.total_cmp(&q.angle));
    let weights: Vec<f64> = (0..all.len())
        .map(|i| {
            let prev = if i == 0 { all[all.len() - 1].angle - tau } else { all[i - 1].angle };
            let next = if i + 1 == all.len() { all[0].angle + tau } else { all[i + 1].angle };
            (next - prev) / 2.0
        })
        .collect();
    let arc_measure = (0..=budget)
        .map(|n| {
            all.iter()
                .zip(&weights)
                .filter(|(p, _)| p.bounded_at(n))
                .map(|(_, w)| w)
                .sum()
        })
        .collect();

    let mut points = grid;
    points.extend(extra);
    Ok(SpectrumScan {
        beta,
        gamma,
        cf: cf[..budget].to_vec(),
        grid_size,
        budget,
        escape_threshold: opts.escape_threshold,
        points,
        arc_measure,
    })
}
