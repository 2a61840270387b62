//! Two-letter words: mechanical (Sturmian) sequences, rotation codings,
//! the substitution words `v_k`, and the square/cube repetitions used by the
//! Gordon certificates.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

use crate::contfrac::{convergents, Frequency};
use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    MechanicalFloor,
    MechanicalCeiling,
    RotationCoding,
    Substitution,
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Floor,
    Ceiling,
}

/// A finite piece of a bi-infinite word over `{0, 1}`.
///
/// `symbols[i]` is the letter at ambient index `start + i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Word {
    pub symbols: Vec<u8>,
    pub start: i64,
    pub provenance: Provenance,
}

impl Word {
    pub fn new(symbols: Vec<u8>, start: i64, provenance: Provenance) -> Result<Self> {
        if let Some(bad) = symbols.iter().find(|&&s| s > 1) {
            return Err(Error::Domain(format!("symbol {bad} is not in {{0, 1}}")));
        }
        Ok(Self {
            symbols,
            start,
            provenance,
        })
    }

    /// Parses a `0`/`1` string placed at `start`.
    pub fn from_bits(bits: &str, start: i64) -> Result<Self> {
        let symbols = bits
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Domain(format!("bad symbol {c:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(Self {
            symbols,
            start,
            provenance: Provenance::Explicit,
        })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// One past the last ambient index.
    pub fn end(&self) -> i64 {
        self.start + self.symbols.len() as i64
    }

    pub fn covers(&self, from: i64, to: i64) -> bool {
        from >= self.start && to <= self.end()
    }

    pub fn get(&self, n: i64) -> Option<u8> {
        let i = n.checked_sub(self.start)?;
        if i < 0 {
            return None;
        }
        self.symbols.get(i as usize).copied()
    }

    pub fn at(&self, n: i64) -> Result<u8> {
        self.get(n).ok_or(Error::OutOfWindow {
            index: n,
            start: self.start,
            end: self.end(),
        })
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.symbols {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

fn bit(diff: BigInt) -> Result<u8> {
    diff.to_u8()
        .filter(|&b| b <= 1)
        .ok_or_else(|| Error::Domain(format!("increment {diff} is not a bit; theta must lie in (0, 1)")))
}

fn rounded(x: &Real, variant: Variant) -> Result<BigInt> {
    match variant {
        Variant::Floor => x.floor(),
        Variant::Ceiling => x.ceil(),
    }
}

/// `⌊(n+1)θ + φ⌋ − ⌊nθ + φ⌋`, or the ceiling analog.
pub fn mechanical(theta: &Real, phi: &Real, n: i64, variant: Variant) -> Result<u8> {
    let x = theta.mul_int(&BigInt::from(n)).add(phi);
    let next = x.add(theta);
    bit(rounded(&next, variant)? - rounded(&x, variant)?)
}

/// The mechanical word on `[start, start + len)`.
pub fn mechanical_word(
    theta: &Real,
    phi: &Real,
    start: i64,
    len: usize,
    variant: Variant,
) -> Result<Word> {
    let mut x = theta.mul_int(&BigInt::from(start)).add(phi);
    let mut prev = rounded(&x, variant)?;
    let mut symbols = Vec::with_capacity(len);
    for _ in 0..len {
        x = x.add(theta);
        let cur = rounded(&x, variant)?;
        symbols.push(bit(&cur - &prev)?);
        prev = cur;
    }
    let provenance = match variant {
        Variant::Floor => Provenance::MechanicalFloor,
        Variant::Ceiling => Provenance::MechanicalCeiling,
    };
    Ok(Word {
        symbols,
        start,
        provenance,
    })
}

/// `ω_0 = s_{θ,θ}` (or `s'_{θ,θ}`) on `[start, start + len)`.
pub fn sturmian_word(freq: &Frequency, start: i64, len: usize, variant: Variant) -> Result<Word> {
    mechanical_word(&freq.theta, &freq.theta, start, len, variant)
}

/// An arc of the circle `R/Z`. `left > right` wraps through 0.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationInterval {
    pub left: Real,
    pub right: Real,
    pub left_closed: bool,
    pub right_closed: bool,
}

impl RotationInterval {
    pub fn new(left: Real, right: Real, left_closed: bool, right_closed: bool) -> Result<Self> {
        let zero = Real::from_integer(0);
        let one = Real::from_integer(1);
        if left.cmp_real(&zero)? == Ordering::Less || left.cmp_real(&one)? != Ordering::Less {
            return Err(Error::Domain("left endpoint must lie in [0, 1)".into()));
        }
        if right.cmp_real(&zero)? != Ordering::Greater || right.cmp_real(&one)? == Ordering::Greater {
            return Err(Error::Domain("right endpoint must lie in (0, 1]".into()));
        }
        let length = match left.cmp_real(&right)? {
            Ordering::Less => right.sub(&left),
            Ordering::Greater => one.sub(&left).add(&right),
            Ordering::Equal => return Err(Error::Domain("degenerate interval".into())),
        };
        if length.cmp_real(&one)? != Ordering::Less {
            return Err(Error::Domain("interval covers the whole circle".into()));
        }
        Ok(Self {
            left,
            right,
            left_closed,
            right_closed,
        })
    }

    /// `[1 − θ, 1)`, whose coding is `s_{θ,φ}`.
    pub fn sturmian(theta: &Real) -> Result<Self> {
        Self::new(Real::from_integer(1).sub(theta), Real::from_integer(1), true, false)
    }

    /// Membership of `x ∈ [0, 1)`.
    pub fn contains(&self, x: &Real) -> Result<bool> {
        let vs_left = x.cmp_real(&self.left)?;
        let vs_right = x.cmp_real(&self.right)?;
        let after_left = vs_left == Ordering::Greater || (vs_left == Ordering::Equal && self.left_closed);
        let before_right =
            vs_right == Ordering::Less || (vs_right == Ordering::Equal && self.right_closed);
        if self.left.cmp_real(&self.right)? == Ordering::Less {
            // 0 and 1 are the same point of the circle.
            let wraps_to_one = self.right_closed
                && self.right.cmp_real(&Real::from_integer(1))? == Ordering::Equal
                && x.signum()? == Ordering::Equal;
            Ok((after_left && before_right) || wraps_to_one)
        } else {
            Ok(after_left || before_right)
        }
    }
}

/// `χ_I(nθ + φ mod 1)`.
pub fn rotation_coding(theta: &Real, phi: &Real, interval: &RotationInterval, n: i64) -> Result<u8> {
    let x = theta.mul_int(&BigInt::from(n)).add(phi).fract()?;
    Ok(interval.contains(&x)? as u8)
}

pub fn rotation_word(
    theta: &Real,
    phi: &Real,
    interval: &RotationInterval,
    start: i64,
    len: usize,
) -> Result<Word> {
    let mut x = theta.mul_int(&BigInt::from(start)).add(phi);
    let mut symbols = Vec::with_capacity(len);
    for _ in 0..len {
        symbols.push(interval.contains(&x.fract()?)? as u8);
        x = x.add(theta);
    }
    Ok(Word {
        symbols,
        start,
        provenance: Provenance::RotationCoding,
    })
}

/// `v_k` for `k ≥ −1`: `v_{-1} = 1`, `v_0 = 0`, `v_1 = v_0^{a_1 − 1} v_{-1}`,
/// `v_k = v_{k-1}^{a_k} v_{k-2}`.
pub fn substitution_word(cf: &[u64], k: i64) -> Result<Word> {
    if k < -1 {
        return Err(Error::Domain(format!("k = {k} < -1")));
    }
    if (k as usize) > cf.len() && k > 0 {
        return Err(Error::Domain(format!(
            "v_{k} needs {k} partial quotients, have {}",
            cf.len()
        )));
    }
    let mut older = vec![1u8];
    let mut newer = vec![0u8];
    if k == -1 {
        return Word::new(older, 0, Provenance::Substitution);
    }
    for j in 1..=k as usize {
        let reps = if j == 1 { cf[0] - 1 } else { cf[j - 1] };
        let mut next = Vec::with_capacity(newer.len() * reps as usize + older.len());
        for _ in 0..reps {
            next.extend_from_slice(&newer);
        }
        next.extend_from_slice(&older);
        older = std::mem::replace(&mut newer, next);
    }
    Word::new(newer, 0, Provenance::Substitution)
}

/// Whether `v_k` equals `s_{θ,θ}` restricted to `[0, q_k − 1]`.
pub fn check_prefix_identity(freq: &Frequency, k: usize) -> Result<bool> {
    if k < 1 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    let v = substitution_word(&freq.cf, k as i64)?;
    let q = convergents(&freq.cf, k)
        .q_u64(k)
        .ok_or_else(|| Error::Domain("q_k too large".into()))?;
    if v.len() as u64 != q {
        return Ok(false);
    }
    let w = sturmian_word(freq, 0, q as usize, Variant::Floor)?;
    Ok(w.symbols == v.symbols)
}

/// Number of distinct length-`n` factors in the first `window` symbols
/// (default `10·n·(n+1)`, capped at the word length).
pub fn factor_complexity(word: &Word, n: usize, window: Option<usize>) -> Result<usize> {
    if n == 0 {
        return Ok(1);
    }
    let needed = n + 10 * n;
    if word.len() < needed {
        return Err(Error::WindowTooSmall {
            len: word.len(),
            n,
            needed,
        });
    }
    let window = window.unwrap_or(10 * n * (n + 1)).clamp(needed, word.len());
    let factors: BTreeSet<&[u8]> = word.symbols[..window].windows(n).collect();
    Ok(factors.len())
}

/// `ω(j) = ω(j + n)` for `0 ≤ j < n`.
pub fn verify_square(word: &Word, n: usize) -> Result<bool> {
    let n = n as i64;
    if !word.covers(0, 2 * n) {
        return Err(Error::OutOfWindow {
            index: if word.start > 0 { 0 } else { 2 * n - 1 },
            start: word.start,
            end: word.end(),
        });
    }
    Ok((0..n).all(|j| word.get(j) == word.get(j + n)))
}

/// `ω(j − n) = ω(j) = ω(j + n)` for `0 ≤ j < n`.
pub fn verify_cube(word: &Word, n: usize) -> Result<bool> {
    let n = n as i64;
    if !word.covers(-n, 2 * n) {
        return Err(Error::OutOfWindow {
            index: if word.start > -n { -n } else { 2 * n - 1 },
            start: word.start,
            end: word.end(),
        });
    }
    Ok((0..n).all(|j| word.get(j - n) == word.get(j) && word.get(j) == word.get(j + n)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleCandidate {
    /// `q_{k-1}`
    Previous,
    /// `q_k`
    Current,
    /// `q_{k+1}`
    Next,
    /// `q_{k+1} + q_k`
    NextPlusCurrent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GordonScale {
    pub k: usize,
    pub n: u64,
    pub candidate: ScaleCandidate,
    /// `None` when the word does not reach back to `−n`.
    pub three_block: Option<bool>,
}

/// Finds a square `ω[0, n) = ω[n, 2n)` at one of the lengths
/// `q_{k-1}, q_k, q_{k+1}, q_{k+1} + q_k`, checking symbols directly.
pub fn gordon_scales(word: &Word, cf: &[u64], k: usize) -> Result<GordonScale> {
    if k < 3 {
        return Err(Error::Domain(format!("k = {k} < 3")));
    }
    let conv = convergents(cf, k + 1);
    let q = |j: usize| {
        conv.q_u64(j).ok_or_else(|| {
            Error::Domain(format!("q_{j} unavailable from {} partial quotients", cf.len()))
        })
    };
    let candidates = [
        (ScaleCandidate::Previous, q(k - 1)?),
        (ScaleCandidate::Current, q(k)?),
        (ScaleCandidate::Next, q(k + 1)?),
        (ScaleCandidate::NextPlusCurrent, q(k + 1)? + q(k)?),
    ];
    for &(candidate, n) in &candidates {
        if verify_square(word, n as usize)? {
            let three_block = if word.covers(-(n as i64), 2 * n as i64) {
                Some(verify_cube(word, n as usize)?)
            } else {
                None
            };
            return Ok(GordonScale {
                k,
                n,
                candidate,
                three_block,
            });
        }
    }
    Err(Error::NoRepetitionFound {
        candidates: candidates.iter().map(|c| c.1).collect(),
    })
}
