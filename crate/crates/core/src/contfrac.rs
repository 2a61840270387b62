//! Continued-fraction expansions `θ = [a_1, a_2, ...]` and their convergents.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CfExpansion {
    pub terms: Vec<u64>,
    /// The input was rational and its expansion ended before `n_terms`.
    pub terminated: bool,
}

/// A frequency together with a prefix of its partial quotients.
#[derive(Debug, Clone, PartialEq)]
pub struct Frequency {
    pub theta: Real,
    pub cf: Vec<u64>,
}

impl Frequency {
    pub fn new(theta: Real, n_terms: usize) -> Result<Self> {
        let cf = cf_expand(&theta, n_terms)?.terms;
        Ok(Self { theta, cf })
    }

    pub fn golden(n_terms: usize) -> Self {
        Self {
            theta: Real::golden(),
            cf: vec![1; n_terms],
        }
    }

    pub fn silver(n_terms: usize) -> Self {
        Self {
            theta: Real::silver(),
            cf: vec![2; n_terms],
        }
    }

    /// The quadratic irrational with purely periodic expansion
    /// `[period, period, ...]`.
    pub fn periodic(period: &[u64], n_terms: usize) -> Result<Self> {
        let theta = periodic_quadratic(period)?;
        let cf = period.iter().copied().cycle().take(n_terms).collect();
        Ok(Self { theta, cf })
    }

    pub fn convergents(&self) -> Convergents {
        convergents(&self.cf, self.cf.len())
    }
}

/// First `n_terms` partial quotients of `theta ∈ (0, 1)`.
///
/// Rational input stops early with `terminated = true`.
pub fn cf_expand(theta: &Real, n_terms: usize) -> Result<CfExpansion> {
    if theta.signum()? != Ordering::Greater || theta.cmp_real(&Real::from_integer(1))? != Ordering::Less
    {
        return Err(Error::Domain(format!("theta = {theta} is not in (0, 1)")));
    }
    let mut terms = Vec::with_capacity(n_terms);
    let mut x = theta.clone();
    while terms.len() < n_terms {
        let inv = x.recip()?;
        let a = inv.floor()?;
        let a_u64 = a
            .to_u64()
            .filter(|&a| a >= 1)
            .ok_or_else(|| Error::PrecisionExhausted(format!("partial quotient {a} out of range")))?;
        terms.push(a_u64);
        x = inv.add_int(&-a);
        if x.signum()? == Ordering::Equal {
            return Ok(CfExpansion {
                terms,
                terminated: true,
            });
        }
    }
    Ok(CfExpansion {
        terms,
        terminated: false,
    })
}

/// Solves `θ = [period, θ-tail]` for the purely periodic expansion.
pub fn periodic_quadratic(period: &[u64]) -> Result<Real> {
    if period.is_empty() || period.contains(&0) {
        return Err(Error::Domain("period must be non-empty with a_j >= 1".into()));
    }
    let c = convergents(period, period.len());
    let k = period.len();
    let (pk, pk1) = (&c.p[k], &c.p[k - 1]);
    let (qk, qk1) = (&c.q[k], &c.q[k - 1]);
    // q_{k-1} θ² + (q_k − p_{k-1}) θ − p_k = 0
    let lin = qk - pk1;
    let disc = &lin * &lin + BigInt::from(4) * qk1 * pk;
    let two_lead = BigInt::from(2) * qk1;
    Real::quadratic(
        BigRational::new(-lin, two_lead.clone()),
        BigRational::new(BigInt::one(), two_lead),
        disc,
    )
}

/// Numerators `p_0..p_n` and denominators `q_0..q_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Convergents {
    pub p: Vec<BigInt>,
    pub q: Vec<BigInt>,
}

impl Convergents {
    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// `q_k` as a machine integer, if it fits.
    pub fn q_u64(&self, k: usize) -> Option<u64> {
        self.q.get(k).and_then(|q| q.to_u64())
    }

    pub fn ratio(&self, k: usize) -> BigRational {
        BigRational::new(self.p[k].clone(), self.q[k].clone())
    }
}

/// Convergents `p_k/q_k` for `k = 0..=n` of `[a_1, a_2, ...]`.
///
/// `p_0 = 0, p_1 = 1, q_0 = 1, q_1 = a_1` and
/// `x_k = a_k x_{k-1} + x_{k-2}` thereafter.
pub fn convergents(cf: &[u64], n: usize) -> Convergents {
    let n = n.min(cf.len());
    let mut p = vec![BigInt::zero()];
    let mut q = vec![BigInt::one()];
    if n >= 1 {
        p.push(BigInt::one());
        q.push(BigInt::from(cf[0]));
    }
    for k in 2..=n {
        let a = BigInt::from(cf[k - 1]);
        p.push(&a * &p[k - 1] + &p[k - 2]);
        q.push(&a * &q[k - 1] + &q[k - 2]);
    }
    Convergents { p, q }
}
