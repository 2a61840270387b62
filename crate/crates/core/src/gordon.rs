//! Gordon-type certificates: lower bounds on solutions at repetition scales
//! that rule out `ℓ²` eigenvectors.
//!
//! For a solution `u` of `Eu = zu` with `Φ(n) = (u_n, v_n)`:
//! - two-block: `α(j) = α(j + n)` on `[0, n)` and `|tr T(n,0;z)| ≤ c` give
//!   `max(‖Φ(n̲)‖, ‖Φ(2n)‖) ≥ Δ‖Φ(0)‖` with `Δ = ½min(1, 1/c)/Γ`;
//! - three-block: `α(j − n) = α(j) = α(j + n)` gives
//!   `max(‖Φ(−n̲)‖, ‖Φ(n̲)‖, ‖Φ(2n)‖) ≥ ‖Φ(0)‖/(2Γ)`,
//!
//! where `n̲ = 2⌊n/2⌋` and `Γ = max ‖S(α_j, z)‖` over the sites used.

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cmv::{AlphaWindow, VerblunskySequence};
use crate::contfrac::{convergents, Frequency};
use crate::error::{Error, Result};
use crate::mat2::C64;
use crate::real::Real;
use crate::tracemap::SpectrumScan;
use crate::transfer::{perturbation_constant, solution_path, szego, szego_cocycle, SolutionState};
use crate::words::{gordon_scales, rotation_word, sturmian_word, verify_cube, GordonScale, RotationInterval, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GordonConstants {
    /// Trace bound; `None` for the three-block form.
    pub c: Option<f64>,
    pub eta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl GordonConstants {
    pub fn two_block(c: f64, gamma: f64) -> Self {
        let eta = 0.5 * (1.0f64).min(1.0 / c);
        Self {
            c: Some(c),
            eta,
            gamma,
            delta: eta / gamma,
        }
    }

    pub fn three_block(gamma: f64) -> Self {
        Self {
            c: None,
            eta: 0.5,
            gamma,
            delta: 0.5 / gamma,
        }
    }
}

/// `max ‖S(α_j, z)‖` for `j ∈ [from, to)`; at least 1 since `|det S| = 1`
/// on the circle.
pub fn gamma_bound(alpha: &AlphaWindow, z: C64, from: i64, to: i64) -> Result<f64> {
    let mut g: f64 = 0.0;
    for j in from..to {
        g = g.max(szego(alpha.get(j)?, z)?.norm());
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockNorms {
    /// `‖Φ(−n̲)‖`, three-block only.
    pub minus: Option<f64>,
    /// `‖Φ(n̲)‖`
    pub under: f64,
    /// `‖Φ(2n)‖`
    pub double: f64,
}

impl BlockNorms {
    pub fn max(&self) -> f64 {
        self.minus.unwrap_or(0.0).max(self.under).max(self.double)
    }
}

/// One scale of a certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleCheck {
    pub n: u64,
    pub n_underline: u64,
    pub phi0: SolutionState,
    pub constants: GordonConstants,
    /// `|tr T(n,0;z)|`
    pub trace: f64,
    pub norms: BlockNorms,
    /// `max norm / (Δ‖Φ(0)‖)`; the bound holds iff this is `≥ 1`.
    pub slack: f64,
    pub bound_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GordonCertificate {
    pub z0: [f64; 2],
    pub checks: Vec<ScaleCheck>,
}

impl GordonCertificate {
    pub fn all_ok(&self) -> bool {
        self.checks.iter().all(|c| c.bound_ok)
    }
}

fn check_repetition(alpha: &AlphaWindow, n: i64, shifts: &[i64]) -> Result<()> {
    for j in 0..n {
        let a = alpha.get(j)?;
        for &s in shifts {
            if alpha.get(j + s * n)? != a {
                return Err(Error::RepetitionViolated {
                    scale: n as u64,
                    offset: j,
                });
            }
        }
    }
    Ok(())
}

fn block_norms(
    alpha: &AlphaWindow,
    z: C64,
    n: i64,
    phi0: SolutionState,
    three: bool,
) -> Result<BlockNorms> {
    let under = 2 * (n / 2);
    let from = if three { -under } else { 0 };
    let path = solution_path(alpha, z, phi0, from, 2 * n)?;
    let at = |m: i64| path[(m - from) as usize].norm();
    Ok(BlockNorms {
        minus: three.then(|| at(-under)),
        under: at(under),
        double: at(2 * n),
    })
}

fn finish(n: i64, phi0: SolutionState, constants: GordonConstants, trace: f64, norms: BlockNorms) -> ScaleCheck {
    let slack = norms.max() / (constants.delta * phi0.norm());
    ScaleCheck {
        n: n as u64,
        n_underline: (2 * (n / 2)) as u64,
        phi0,
        constants,
        trace,
        norms,
        slack,
        bound_ok: slack >= 1.0,
    }
}

fn check_scale(n_k: u64, phi0: &SolutionState) -> Result<i64> {
    if n_k == 0 {
        return Err(Error::Domain("scale must be positive".into()));
    }
    if phi0.norm() == 0.0 {
        return Err(Error::Domain("initial state must be nonzero".into()));
    }
    Ok(n_k as i64)
}

pub fn check_two_block(
    alpha: &AlphaWindow,
    z0: C64,
    n_k: u64,
    phi0: SolutionState,
    c: f64,
) -> Result<ScaleCheck> {
    let n = check_scale(n_k, &phi0)?;
    check_repetition(alpha, n, &[1])?;
    let trace = szego_cocycle(alpha, n, 0, z0)?.trace().norm();
    if !(trace <= c) {
        return Err(Error::TraceBoundViolated { trace, bound: c });
    }
    let constants = GordonConstants::two_block(c, gamma_bound(alpha, z0, 0, 2 * n)?);
    let norms = block_norms(alpha, z0, n, phi0, false)?;
    Ok(finish(n, phi0, constants, trace, norms))
}

pub fn check_three_block(alpha: &AlphaWindow, z0: C64, n_k: u64, phi0: SolutionState) -> Result<ScaleCheck> {
    let n = check_scale(n_k, &phi0)?;
    check_repetition(alpha, n, &[-1, 1])?;
    let trace = szego_cocycle(alpha, n, 0, z0)?.trace().norm();
    let constants = GordonConstants::three_block(gamma_bound(alpha, z0, -n, 2 * n)?);
    let norms = block_norms(alpha, z0, n, phi0, true)?;
    Ok(finish(n, phi0, constants, trace, norms))
}

/// Runs a check for both `Φ(0) = e₁` and `Φ(0) = e₂`, which span the
/// solution space.
pub fn certify(
    z0: C64,
    scales: &[u64],
    check: impl Fn(u64, SolutionState) -> Result<ScaleCheck>,
) -> Result<GordonCertificate> {
    let mut checks = Vec::new();
    for &n in scales {
        for phi0 in [SolutionState::e1(), SolutionState::e2()] {
            checks.push(check(n, phi0)?);
        }
    }
    Ok(GordonCertificate {
        z0: [z0.re, z0.im],
        checks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceRow {
    pub c: f64,
    /// `log(C^{n_k} d_k)` per scale; `None` where the defect `d_k` is 0.
    pub log_values: Vec<Option<f64>>,
    /// The last value is below `tol`.
    pub passes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceReport {
    pub scales: Vec<u64>,
    /// `d_k = max_{0≤j<n_k} |α(j) − α(j ± n_k)|`
    pub defects: Vec<f64>,
    pub tol: f64,
    pub rows: Vec<SequenceRow>,
}

/// Evaluates `C^{n_k} max_j |α(j) − α(j ± n_k)|` in log space.
pub fn gordon_sequence_test(alpha: &AlphaWindow, scales: &[u64], c_list: &[f64], tol: f64) -> Result<SequenceReport> {
    if scales.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("scales must be strictly increasing".into()));
    }
    let mut defects = Vec::with_capacity(scales.len());
    for &n in scales {
        let n = n as i64;
        let mut d: f64 = 0.0;
        for j in 0..n {
            let a = alpha.get(j)?;
            d = d.max((a - alpha.get(j - n)?).norm()).max((a - alpha.get(j + n)?).norm());
        }
        defects.push(d);
    }
    let rows = c_list
        .iter()
        .map(|&c| {
            let log_values: Vec<Option<f64>> = scales
                .iter()
                .zip(&defects)
                .map(|(&n, &d)| (d > 0.0).then(|| n as f64 * c.ln() + d.ln()))
                .collect();
            let passes = match log_values.last() {
                Some(Some(v)) => *v <= tol.ln(),
                Some(None) => true,
                None => false,
            };
            SequenceRow { c, log_values, passes }
        })
        .collect();
    Ok(SequenceReport {
        scales: scales.to_vec(),
        defects,
        tol,
        rows,
    })
}

/// Three-block check for a sequence that only approximately repeats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproximateThreeBlock {
    pub n: u64,
    /// `max |α − α̃|` on `[−n, 2n)`, `α̃` the `n`-periodic extension of `α|[0,n)`.
    pub delta: f64,
    pub r: f64,
    /// `δ C(r)^{2n}`
    pub perturbation_bound: f64,
    /// Exact certificate for `α̃`.
    pub exact: ScaleCheck,
    /// `max(‖Φ(−n̲)‖, ‖Φ(n̲)‖, ‖Φ(2n)‖)` for `α` itself.
    pub max_norm: f64,
    /// `δ C^{2n} ≤ Δ̃/2`, so the lemma alone guarantees the halved bound.
    pub lemma_applies: bool,
    /// `max_norm ≥ (Δ̃/2)‖Φ(0)‖`
    pub bound_ok: bool,
}

pub fn check_approximate_three_block(
    alpha: &AlphaWindow,
    z: C64,
    n_k: u64,
    phi0: SolutionState,
) -> Result<ApproximateThreeBlock> {
    let n = check_scale(n_k, &phi0)?;
    let base: Vec<C64> = (0..n).map(|j| alpha.get(j)).collect::<Result<_>>()?;
    let tilde = AlphaWindow::new(-n, (-n..2 * n).map(|j| base[j.rem_euclid(n) as usize]).collect())?;
    let mut delta: f64 = 0.0;
    let mut r: f64 = 0.0;
    for j in -n..2 * n {
        let a = alpha.get(j)?;
        delta = delta.max((a - tilde.get(j)?).norm());
        r = r.max(a.norm());
    }
    let exact = check_three_block(&tilde, z, n_k, phi0)?;
    let perturbation_bound = delta * perturbation_constant(r)?.powi(2 * n as i32);
    let norms = block_norms(alpha, z, n, phi0, true)?;
    let half = exact.constants.delta / 2.0;
    Ok(ApproximateThreeBlock {
        n: n_k,
        delta,
        r,
        perturbation_bound,
        max_norm: norms.max(),
        lemma_applies: perturbation_bound <= half,
        bound_ok: norms.max() >= half * phi0.norm(),
        exact,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCertificate {
    pub angle: f64,
    /// Empirical `sup_k |tr T(n_k,0;ζ)|`.
    pub trace_sup: f64,
    pub certificate: GordonCertificate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExclusionSummary {
    pub scales: Vec<GordonScale>,
    pub points: usize,
    pub pairs: usize,
    pub certified: usize,
    pub certified_fraction: f64,
    pub min_slack: f64,
    pub certificates: Vec<PointCertificate>,
}

/// Two-block certificates at the bounded points of a scan, with the Sturmian
/// word `ω_0` and scales from [`gordon_scales`] for each `k` in `k_range`.
///
/// `max_points` subsamples the bounded points evenly. A `(ζ, k)` pair counts
/// as certified when the bound holds for both `e₁` and `e₂`.
pub fn eigenvalue_excluder(
    beta: C64,
    gamma: C64,
    freq: &Frequency,
    scan: &SpectrumScan,
    k_range: std::ops::RangeInclusive<usize>,
    max_points: Option<usize>,
) -> Result<ExclusionSummary> {
    let k_max = *k_range.end();
    let conv = convergents(&freq.cf, k_max + 1);
    let reach = conv
        .q_u64(k_max + 1)
        .zip(conv.q_u64(k_max))
        .map(|(a, b)| a + b)
        .ok_or_else(|| Error::Domain(format!("need {} partial quotients", k_max + 1)))?;
    let word = sturmian_word(freq, 0, 2 * reach as usize, Variant::Floor)?;
    let scales: Vec<GordonScale> = k_range
        .map(|k| gordon_scales(&word, &freq.cf, k))
        .collect::<Result<_>>()?;
    let alpha = VerblunskySequence::allowing_degenerate(beta, gamma, word)?.window();

    let bounded: Vec<f64> = scan.bounded_points().map(|p| p.angle).collect();
    let chosen: Vec<f64> = match max_points {
        Some(m) if m < bounded.len() => (0..m).map(|i| bounded[i * bounded.len() / m]).collect(),
        _ => bounded,
    };
    let ns: Vec<u64> = scales.iter().map(|s| s.n).collect();
    let certificates: Vec<PointCertificate> = chosen
        .par_iter()
        .map(|&theta| {
            let z = C64::from_polar(1.0, theta);
            let mut trace_sup: f64 = 0.0;
            for &n in &ns {
                trace_sup = trace_sup.max(szego_cocycle(&alpha, n as i64, 0, z)?.trace().norm());
            }
            let certificate = certify(z, &ns, |n, phi0| check_two_block(&alpha, z, n, phi0, trace_sup))?;
            Ok(PointCertificate {
                angle: theta,
                trace_sup,
                certificate,
            })
        })
        .collect::<Result<_>>()?;

    let pairs = certificates.len() * ns.len();
    let certified = certificates
        .iter()
        .map(|p| p.certificate.checks.chunks(2).filter(|c| c.iter().all(|s| s.bound_ok)).count())
        .sum();
    let min_slack = certificates
        .iter()
        .flat_map(|p| p.certificate.checks.iter().map(|c| c.slack))
        .fold(f64::INFINITY, f64::min);
    Ok(ExclusionSummary {
        scales,
        points: certificates.len(),
        pairs,
        certified,
        certified_fraction: if pairs == 0 { 1.0 } else { certified as f64 / pairs as f64 },
        min_slack,
        certificates,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseMeasure {
    /// `(n, 1 − 4q_n/q_{n+1})`
    pub per_n: Vec<(usize, f64)>,
    /// `max a_j` over the partial quotients `a_n..=a_{n_max+1}`, standing in
    /// for `limsup a_j`.
    pub limsup_a: u64,
    /// `½[L + √(L² + 4)]` with `L = limsup_a`.
    pub kam_bound: f64,
    /// `L ≥ 4`
    pub hypothesis: bool,
}

pub fn rotcode_phase_measure(cf: &[u64], n_range: std::ops::RangeInclusive<usize>) -> Result<PhaseMeasure> {
    let (lo, hi) = (*n_range.start(), *n_range.end());
    if hi + 1 > cf.len() || lo > hi {
        return Err(Error::Domain(format!(
            "range {lo}..={hi} needs {} partial quotients, have {}",
            hi + 1,
            cf.len()
        )));
    }
    let conv = convergents(cf, hi + 1);
    let per_n = (lo..=hi)
        .map(|n| {
            let ratio = conv.q[n].to_f64().unwrap_or(f64::NAN) / conv.q[n + 1].to_f64().unwrap_or(f64::NAN);
            (n, 1.0 - 4.0 * ratio)
        })
        .collect();
    let limsup_a = cf[lo.max(1) - 1..=hi].iter().copied().max().unwrap_or(0);
    let l = limsup_a as f64;
    Ok(PhaseMeasure {
        per_n,
        limsup_a,
        kam_bound: 0.5 * (l + (l * l + 4.0).sqrt()),
        hypothesis: limsup_a >= 4,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseFraction {
    pub phases: usize,
    /// Phases whose coding has a cube `u(j−q) = u(j) = u(j+q)`, `0 ≤ j < q`,
    /// at some `q = q_k`, `k` in range.
    pub admitted: usize,
    pub fraction: f64,
    /// `max_k (1 − 4q_k/q_{k+1})` over the same range.
    pub lower_bound: f64,
}

/// Samples `phases` equally spaced phases `φ = i/phases` and checks each
/// rotation coding for a three-block repetition at the convergent scales.
pub fn rotcode_three_block_fraction(
    theta: &Real,
    interval: &RotationInterval,
    cf: &[u64],
    k_range: std::ops::RangeInclusive<usize>,
    phases: usize,
) -> Result<PhaseFraction> {
    if phases == 0 {
        return Err(Error::Domain("need at least one phase".into()));
    }
    let (lo, hi) = (*k_range.start(), *k_range.end());
    let conv = convergents(cf, hi + 1);
    let qs: Vec<u64> = (lo..=hi)
        .map(|k| conv.q_u64(k).ok_or_else(|| Error::Domain(format!("q_{k} unavailable"))))
        .collect::<Result<_>>()?;
    let q_max = *qs.iter().max().unwrap() as i64;
    let admitted: Vec<bool> = (0..phases)
        .into_par_iter()
        .map(|i| {
            let phi = Real::from_ratio(i as i64, phases as i64)?;
            let word = rotation_word(theta, &phi, interval, -q_max, 3 * q_max as usize)?;
            for &q in &qs {
                if verify_cube(&word, q as usize)? {
                    return Ok(true);
                }
            }
            Ok(false)
        })
        .collect::<Result<_>>()?;
    let count = admitted.iter().filter(|&&a| a).count();
    let lower_bound = rotcode_phase_measure(cf, lo..=hi)?
        .per_n
        .iter()
        .map(|p| p.1)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(PhaseFraction {
        phases,
        admitted: count,
        fraction: count as f64 / phases as f64,
        lower_bound,
    })
}
