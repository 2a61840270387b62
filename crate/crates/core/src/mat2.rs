//! 2×2 complex matrices, with a scaled form for long products.

use std::ops::{Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type C64 = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl Mat2 {
    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Self { a, b, c, d }
    }

    pub fn identity() -> Self {
        let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        Self::new(o, z, z, o)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn det(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> C64 {
        self.a + self.d
    }

    pub fn inverse(&self) -> Self {
        let inv_det = self.det().inv();
        Self::new(self.d, -self.b, -self.c, self.a).scale(inv_det)
    }

    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + self.d.norm_sqr()
    }

    /// Largest and smallest singular values, in closed form.
    pub fn singular_values(&self) -> (f64, f64) {
        let s = self.frobenius_sq();
        let det = self.det().norm();
        // σ± ² = (s ± √(s² − 4|det|²)) / 2
        let disc = ((s - 2.0 * det) * (s + 2.0 * det)).max(0.0).sqrt();
        let hi = ((s + disc) / 2.0).sqrt();
        let lo = if hi > 0.0 { det / hi } else { 0.0 };
        (hi, lo)
    }

    /// Operator 2-norm.
    pub fn norm(&self) -> f64 {
        self.singular_values().0
    }

    pub fn is_finite(&self) -> bool {
        [self.a, self.b, self.c, self.d].iter().all(|z| z.is_finite())
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = *self;
        let mut acc = Self::identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

/// `e^{log_scale} · m` with `m` renormalized to unit Frobenius norm after
/// each product, so norms up to `e^{f64::MAX}` are representable.
///
/// `log |det|` is accumulated separately since the determinant of the
/// normalized factor underflows for ill-conditioned products.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledMat2 {
    pub m: Mat2,
    pub log_scale: f64,
    log_det: f64,
}

impl ScaledMat2 {
    pub fn identity() -> Self {
        Self::from(Mat2::identity())
    }

    fn normalized(m: Mat2, log_scale: f64, log_det: f64) -> Self {
        let f = m.frobenius_sq().sqrt();
        if f > 0.0 && f.is_finite() {
            Self {
                m: m.scale(C64::new(1.0 / f, 0.0)),
                log_scale: log_scale + f.ln(),
                log_det,
            }
        } else {
            Self { m, log_scale, log_det }
        }
    }

    pub fn log_norm(&self) -> f64 {
        self.m.norm().ln() + self.log_scale
    }

    /// `log |tr|`.
    pub fn log_abs_trace(&self) -> f64 {
        self.m.trace().norm().ln() + self.log_scale
    }

    /// The trace as a plain number; infinite once it leaves f64 range.
    pub fn trace(&self) -> C64 {
        let t = self.m.trace();
        if t == C64::new(0.0, 0.0) {
            return t;
        }
        let mag = t.norm().ln() + self.log_scale;
        C64::from_polar(mag.exp(), t.arg())
    }

    pub fn log_abs_det(&self) -> f64 {
        self.log_det
    }

    /// The plain matrix, if it fits in f64.
    pub fn to_mat2(&self) -> Mat2 {
        self.m.scale(C64::new(self.log_scale.exp(), 0.0))
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = *self;
        let mut acc = Self::identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }
}

impl From<Mat2> for ScaledMat2 {
    fn from(m: Mat2) -> Self {
        Self::normalized(m, 0.0, m.det().norm().ln())
    }
}

impl Mul for ScaledMat2 {
    type Output = ScaledMat2;
    fn mul(self, o: ScaledMat2) -> ScaledMat2 {
        ScaledMat2::normalized(
            self.m * o.m,
            self.log_scale + o.log_scale,
            self.log_det + o.log_det,
        )
    }
}
