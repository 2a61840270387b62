//! Verblunsky sequences and the extended CMV operator `E = LM`,
//! `L = ⊕ Θ(α_{2j})`, `M = ⊕ Θ(α_{2j+1})`, applied block by block.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat2::C64;
use crate::words::Word;

/// Verblunsky coefficients on the integer window `[start, start + len)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaWindow {
    pub start: i64,
    pub values: Vec<C64>,
}

impl AlphaWindow {
    pub fn new(start: i64, values: Vec<C64>) -> Result<Self> {
        if let Some(a) = values.iter().find(|a| !(a.norm() < 1.0)) {
            return Err(Error::Domain(format!("|alpha| = {} is not < 1", a.norm())));
        }
        Ok(Self { start, values })
    }

    pub fn constant(alpha: C64, start: i64, len: usize) -> Result<Self> {
        Self::new(start, vec![alpha; len])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn end(&self) -> i64 {
        self.start + self.values.len() as i64
    }

    pub fn contains(&self, n: i64) -> bool {
        n >= self.start && n < self.end()
    }

    pub fn get(&self, n: i64) -> Result<C64> {
        if self.contains(n) {
            Ok(self.values[(n - self.start) as usize])
        } else {
            Err(Error::OutOfWindow {
                index: n,
                start: self.start,
                end: self.end(),
            })
        }
    }

    /// `‖α‖_∞` over the window.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// The `period`-periodic sequence through `α(0..period)`, on the same window.
    pub fn periodized(&self, period: usize) -> Result<Self> {
        if period == 0 {
            return Err(Error::Domain("period must be positive".into()));
        }
        let base: Vec<C64> = (0..period as i64).map(|j| self.get(j)).collect::<Result<_>>()?;
        let p = period as i64;
        let values = (self.start..self.end())
            .map(|n| base[n.rem_euclid(p) as usize])
            .collect();
        Ok(Self {
            start: self.start,
            values,
        })
    }
}

/// `α(n) = β` where the word reads 0 and `γ` where it reads 1.
#[derive(Debug, Clone, PartialEq)]
pub struct VerblunskySequence {
    pub beta: C64,
    pub gamma: C64,
    pub word: Word,
}

impl VerblunskySequence {
    pub fn new(beta: C64, gamma: C64, word: Word) -> Result<Self> {
        if beta == gamma {
            return Err(Error::Domain("beta and gamma must differ".into()));
        }
        Self::allowing_degenerate(beta, gamma, word)
    }

    /// As [`VerblunskySequence::new`] but accepts `β = γ`.
    pub fn allowing_degenerate(beta: C64, gamma: C64, word: Word) -> Result<Self> {
        for (name, v) in [("beta", beta), ("gamma", gamma)] {
            if !(v.norm() < 1.0) {
                return Err(Error::Domain(format!("|{name}| = {} is not < 1", v.norm())));
            }
        }
        Ok(Self { beta, gamma, word })
    }

    pub fn alpha_at(&self, n: i64) -> Result<C64> {
        Ok(match self.word.at(n)? {
            0 => self.beta,
            _ => self.gamma,
        })
    }

    /// `max(|β|, |γ|)`.
    pub fn sup_bound(&self) -> f64 {
        self.beta.norm().max(self.gamma.norm())
    }

    pub fn window(&self) -> AlphaWindow {
        let values = self
            .word
            .symbols
            .iter()
            .map(|&s| if s == 0 { self.beta } else { self.gamma })
            .collect();
        AlphaWindow {
            start: self.word.start,
            values,
        }
    }
}

pub fn rho(alpha: C64) -> f64 {
    (1.0 - alpha.norm_sqr()).max(0.0).sqrt()
}

/// `Θ(α) = [[ᾱ, ρ], [ρ, −α]]`, row-major.
pub fn theta_block(alpha: C64) -> [[C64; 2]; 2] {
    let r = C64::new(rho(alpha), 0.0);
    [[alpha.conj(), r], [r, -alpha]]
}

#[derive(Debug, Clone, PartialEq)]
pub struct CmvOperator {
    pub alpha: AlphaWindow,
}

impl CmvOperator {
    pub fn new(alpha: AlphaWindow) -> Self {
        Self { alpha }
    }

    /// Coefficients outside the window read as 0.
    fn alpha_or_free(&self, n: i64) -> C64 {
        self.alpha.get(n).unwrap_or(C64::new(0.0, 0.0))
    }

    /// Applies `Θ(α_n)` to every block `{n, n+1}` with `n ≡ parity (mod 2)`,
    /// treating `v` as zero outside the window.
    fn apply_blocks(&self, v: &[C64], parity: i64) -> Vec<C64> {
        let start = self.alpha.start;
        let end = start + v.len() as i64;
        let at = |n: i64| -> C64 {
            if n >= start && n < end {
                v[(n - start) as usize]
            } else {
                C64::new(0.0, 0.0)
            }
        };
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        for n in start..end {
            let top = (n - parity).rem_euclid(2) == 0;
            let (first, row) = if top { (n, 0) } else { (n - 1, 1) };
            let th = theta_block(self.alpha_or_free(first));
            out[(n - start) as usize] = th[row][0] * at(first) + th[row][1] * at(first + 1);
        }
        out
    }

    fn lm(&self, u: &[C64]) -> Vec<C64> {
        let mu = self.apply_blocks(u, 1);
        self.apply_blocks(&mu, 0)
    }

    fn check_len(&self, u: &[C64]) -> Result<()> {
        if u.len() != self.alpha.len() {
            return Err(Error::Domain(format!(
                "vector length {} does not match window length {}",
                u.len(),
                self.alpha.len()
            )));
        }
        Ok(())
    }

    /// `Eu` for `u` vanishing on two sites at each end of the window.
    pub fn apply(&self, u: &[C64]) -> Result<Vec<C64>> {
        self.check_len(u)?;
        let n = u.len();
        let zero = C64::new(0.0, 0.0);
        if n < 4 || u[..2].iter().chain(&u[n - 2..]).any(|&x| x != zero) {
            return Err(Error::InsufficientMargin);
        }
        Ok(self.lm(u))
    }

    /// `‖Eu − zu‖₂` over rows whose stencil lies inside the window.
    pub fn residual(&self, z: C64, u: &[C64]) -> Result<f64> {
        self.check_len(u)?;
        if u.len() < 5 {
            return Err(Error::InsufficientMargin);
        }
        let eu = self.lm(u);
        let n = u.len();
        Ok(eu[2..n - 2]
            .iter()
            .zip(&u[2..n - 2])
            .map(|(e, x)| (e - z * x).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// The window compression of `E`, coefficients outside the window read as 0.
    pub fn dense(&self) -> DMatrix<C64> {
        let n = self.alpha.len();
        let mut m = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
        for j in 0..n {
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[j] = C64::new(1.0, 0.0);
            for (i, v) in self.lm(&e).into_iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// The `n × n` unitary truncation on `[start, start + n)` with both
    /// boundary coefficients `α_{start−1}` and `α_{start+n−1}` replaced by the
    /// unimodular `boundary`.
    pub fn truncation(&self, n: usize, boundary: C64) -> Result<DMatrix<C64>> {
        if (boundary.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Domain("boundary coefficient must be unimodular".into()));
        }
        if n < 2 || !n.is_multiple_of(2) || n > self.alpha.len() {
            return Err(Error::Domain(format!(
                "truncation size {n} must be even, >= 2 and <= window length {}",
                self.alpha.len()
            )));
        }
        let s0 = self.alpha.start;
        if s0.rem_euclid(2) != 0 {
            return Err(Error::Domain("truncation must start at an even site".into()));
        }
        let zero = C64::new(0.0, 0.0);
        let mut l = DMatrix::from_element(n, n, zero);
        let mut m = DMatrix::from_element(n, n, zero);
        for j in (0..n).step_by(2) {
            let th = theta_block(self.alpha.get(s0 + j as i64)?);
            for r in 0..2 {
                for c in 0..2 {
                    l[(j + r, j + c)] = th[r][c];
                }
            }
        }
        m[(0, 0)] = -boundary;
        m[(n - 1, n - 1)] = boundary.conj();
        for j in (1..n - 1).step_by(2) {
            let th = theta_block(self.alpha.get(s0 + j as i64)?);
            for r in 0..2 {
                for c in 0..2 {
                    m[(j + r, j + c)] = th[r][c];
                }
            }
        }
        Ok(l * m)
    }

    /// Eigenvalues of [`CmvOperator::truncation`], sorted by angle in `[0, 2π)`.
    pub fn truncated_spectrum(&self, n: usize, boundary: C64) -> Result<Vec<C64>> {
        if n > 2000 {
            return Err(Error::Domain(format!("truncation size {n} exceeds 2000")));
        }
        let e = self.truncation(n, boundary)?;
        let schur = nalgebra::linalg::Schur::try_new(e, 1e-14, 10_000)
            .ok_or_else(|| Error::EigensolveFailure("Schur iteration did not converge".into()))?;
        let (_, t) = schur.unpack();
        let mut eig: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
        if let Some(bad) = eig.iter().find(|l| (l.norm() - 1.0).abs() > 1e-8) {
            return Err(Error::EigensolveFailure(format!(
                "eigenvalue {bad} is off the unit circle"
            )));
        }
        eig.sort_by(|a, b| angle(*a).total_cmp(&angle(*b)));
        Ok(eig)
    }
}

/// Argument in `[0, 2π)`.
pub fn angle(z: C64) -> f64 {
    z.arg().rem_euclid(std::f64::consts::TAU)
}
