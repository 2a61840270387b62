//! Szegő and Gesztesy–Zinchenko transfer matrices and their cocycles.
//!
//! `S(α,z) = ρ⁻¹ [[z, −ᾱ], [−αz, 1]]` is the same at every site, while the
//! GZ step `Y(n,z)` alternates between `P(α_n,z)` (n even) and `Q(α_n,z)`
//! (n odd). GZ products propagate `Φ(n) = (u_n, v_n)` for solutions of
//! `Eu = zu` with `v = Mu`; the two families agree over even blocks starting
//! at an even site, `z^{-n} T(2n,0;z) = Z(2n,0;z)`.

use serde::{Deserialize, Serialize};

use crate::cmv::{rho, AlphaWindow};
use crate::error::{Error, Result};
use crate::mat2::{Mat2, ScaledMat2, C64};

fn check_args(alpha: C64, z: C64) -> Result<f64> {
    if !(alpha.norm() < 1.0) {
        return Err(Error::Domain(format!("|alpha| = {} is not < 1", alpha.norm())));
    }
    if z.norm() == 0.0 || !z.is_finite() {
        return Err(Error::Domain("spectral parameter must be finite and nonzero".into()));
    }
    Ok(rho(alpha))
}

pub fn szego(alpha: C64, z: C64) -> Result<Mat2> {
    let r = check_args(alpha, z)?;
    let one = C64::new(1.0, 0.0);
    Ok(Mat2::new(z, -alpha.conj(), -alpha * z, one).scale(C64::new(1.0 / r, 0.0)))
}

pub fn gz_p(alpha: C64, z: C64) -> Result<Mat2> {
    let r = check_args(alpha, z)?;
    Ok(Mat2::new(-alpha, z.inv(), z, -alpha.conj()).scale(C64::new(1.0 / r, 0.0)))
}

pub fn gz_q(alpha: C64, z: C64) -> Result<Mat2> {
    let r = check_args(alpha, z)?;
    let one = C64::new(1.0, 0.0);
    Ok(Mat2::new(-alpha.conj(), one, one, -alpha).scale(C64::new(1.0 / r, 0.0)))
}

/// `Y(n,z)`: `P(α_n,z)` for even `n`, `Q(α_n,z)` for odd `n`.
pub fn gz_step(alpha: &AlphaWindow, n: i64, z: C64) -> Result<Mat2> {
    let a = alpha.get(n)?;
    if n.rem_euclid(2) == 0 {
        gz_p(a, z)
    } else {
        gz_q(a, z)
    }
}

fn ordered_product(
    n: i64,
    m: i64,
    step: impl Fn(i64) -> Result<Mat2>,
) -> Result<Mat2> {
    let (hi, lo) = (n.max(m), n.min(m));
    let mut acc = Mat2::identity();
    for j in lo..hi {
        acc = step(j)? * acc;
    }
    if !acc.is_finite() {
        return Err(Error::Overflow {
            step: (hi - lo) as usize,
        });
    }
    Ok(if n >= m { acc } else { acc.inverse() })
}

/// `T(n,m;z)`: `S(α_{n−1},z)···S(α_m,z)` for `n > m`, identity for `n = m`,
/// `T(m,n;z)⁻¹` for `n < m`.
pub fn szego_cocycle(alpha: &AlphaWindow, n: i64, m: i64, z: C64) -> Result<Mat2> {
    ordered_product(n, m, |j| szego(alpha.get(j)?, z))
}

/// `Z(n,m;z)`, built from `Y` the same way `T` is built from `S`.
pub fn gz_cocycle(alpha: &AlphaWindow, n: i64, m: i64, z: C64) -> Result<Mat2> {
    ordered_product(n, m, |j| gz_step(alpha, j, z))
}

/// `T(n,0;z)` for `n ≥ 0` in scale-and-log form.
pub fn szego_cocycle_scaled(alpha: &AlphaWindow, n: i64, z: C64) -> Result<ScaledMat2> {
    let mut acc = ScaledMat2::identity();
    for j in 0..n {
        acc = ScaledMat2::from(szego(alpha.get(j)?, z)?) * acc;
    }
    Ok(acc)
}

/// `Φ(n) = (u_n, v_n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolutionState {
    pub u: C64,
    pub v: C64,
}

impl SolutionState {
    pub fn new(u: C64, v: C64) -> Self {
        Self { u, v }
    }

    pub fn e1() -> Self {
        Self::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0))
    }

    pub fn e2() -> Self {
        Self::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0))
    }

    pub fn norm(&self) -> f64 {
        (self.u.norm_sqr() + self.v.norm_sqr()).sqrt()
    }

    fn as_array(&self) -> [C64; 2] {
        [self.u, self.v]
    }

    fn from_array(a: [C64; 2]) -> Self {
        Self::new(a[0], a[1])
    }
}

/// `Φ(n) = Z(n,0;z) Φ(0)`.
pub fn propagate(alpha: &AlphaWindow, z: C64, phi0: SolutionState, n: i64) -> Result<SolutionState> {
    Ok(SolutionState::from_array(
        gz_cocycle(alpha, n, 0, z)?.apply(phi0.as_array()),
    ))
}

/// `Φ(n)` for every `n` in `[from, to]` (which must contain 0), stepping
/// outwards from `Φ(0)` one site at a time.
pub fn solution_path(
    alpha: &AlphaWindow,
    z: C64,
    phi0: SolutionState,
    from: i64,
    to: i64,
) -> Result<Vec<SolutionState>> {
    if from > 0 || to < 0 {
        return Err(Error::Domain(format!("[{from}, {to}] must contain 0")));
    }
    let mut forward = vec![phi0];
    for j in 0..to {
        let next = gz_step(alpha, j, z)?.apply(forward.last().unwrap().as_array());
        forward.push(SolutionState::from_array(next));
    }
    let mut backward = Vec::new();
    let mut cur = phi0;
    for j in (from..0).rev() {
        cur = SolutionState::from_array(gz_step(alpha, j, z)?.inverse().apply(cur.as_array()));
        backward.push(cur);
    }
    backward.reverse();
    backward.extend(forward);
    Ok(backward)
}

/// Double-double 2×2 products, so identity checks measure the identity and
/// not f64 rounding in products of norm up to ~1e20.
///
/// Only the error-free `+`, `−`, `×` of `twofloat` are used; its division
/// drops the low word. The common `ρ⁻¹` factors are left out of both sides
/// and applied to the final deviation in f64.
mod dd {
    use num_complex::Complex;
    use twofloat::TwoFloat;

    use crate::mat2::{Mat2, C64};

    pub type Dc = Complex<TwoFloat>;
    #[derive(Clone, Copy)]
    pub struct DdMat([Dc; 4]);

    pub fn lift(z: C64) -> Dc {
        Complex::new(TwoFloat::from(z.re), TwoFloat::from(z.im))
    }

    /// `1/z` by one Newton step from the f64 reciprocal.
    pub fn inv(z: C64) -> Dc {
        let zz = lift(z);
        let r = zz.norm_sqr();
        let t = TwoFloat::from(1.0 / r.hi());
        let t = t + t * (TwoFloat::from(1.0) - r * t);
        zz.conj().scale(t)
    }

    impl DdMat {
        pub fn identity() -> Self {
            let (o, z) = (lift(C64::new(1.0, 0.0)), lift(C64::new(0.0, 0.0)));
            Self([o, z, z, o])
        }

        /// `ρ S(α,z)`
        pub fn szego(alpha: C64, z: C64) -> Self {
            let (a, zz) = (lift(alpha), lift(z));
            Self([zz, -a.conj(), -a * zz, lift(C64::new(1.0, 0.0))])
        }

        /// `ρ P(α,z)`
        pub fn p(alpha: C64, z: C64) -> Self {
            let a = lift(alpha);
            Self([-a, inv(z), lift(z), -a.conj()])
        }

        /// `ρ Q(α)`
        pub fn q(alpha: C64) -> Self {
            let (a, one) = (lift(alpha), lift(C64::new(1.0, 0.0)));
            Self([-a.conj(), one, one, -a])
        }

        pub fn mul(&self, o: &Self) -> Self {
            let (a, b) = (&self.0, &o.0);
            Self([
                a[0] * b[0] + a[1] * b[2],
                a[0] * b[1] + a[1] * b[3],
                a[2] * b[0] + a[3] * b[2],
                a[2] * b[1] + a[3] * b[3],
            ])
        }

        pub fn scale(&self, s: Dc) -> Self {
            Self(self.0.map(|x| x * s))
        }

        /// `‖self − o‖`, rounded to f64 after the subtraction.
        pub fn distance(&self, o: &Self) -> f64 {
            let d: Vec<C64> = (0..4)
                .map(|i| {
                    let x = self.0[i] - o.0[i];
                    C64::new(x.re.hi() + x.re.lo(), x.im.hi() + x.im.lo())
                })
                .collect();
            Mat2::new(d[0], d[1], d[2], d[3]).norm()
        }
    }
}

/// `‖Q(α,z)P(β,z) − z⁻¹ S(α,z)S(β,z)‖`.
pub fn check_one_step_identity(alpha: C64, beta: C64, z: C64) -> Result<f64> {
    let r = check_args(alpha, z)? * check_args(beta, z)?;
    let lhs = dd::DdMat::q(alpha).mul(&dd::DdMat::p(beta, z));
    let rhs = dd::DdMat::szego(alpha, z)
        .mul(&dd::DdMat::szego(beta, z))
        .scale(dd::inv(z));
    Ok(lhs.distance(&rhs) / r)
}

/// `‖z^{-n} T(2n,0;z) − Z(2n,0;z)‖`, accumulated in double-double.
pub fn check_sgz_identity(alpha: &AlphaWindow, z: C64, n: i64) -> Result<f64> {
    if n < 0 {
        return Err(Error::Domain("n must be non-negative".into()));
    }
    let (mut t, mut zz) = (dd::DdMat::identity(), dd::DdMat::identity());
    let mut log_inv_rho = 0.0;
    for j in 0..2 * n {
        let a = alpha.get(j)?;
        log_inv_rho -= check_args(a, z)?.ln();
        t = dd::DdMat::szego(a, z).mul(&t);
        let y = if j % 2 == 0 { dd::DdMat::p(a, z) } else { dd::DdMat::q(a) };
        zz = y.mul(&zz);
    }
    let z_inv = dd::inv(z);
    let mut z_pow = dd::lift(C64::new(1.0, 0.0));
    for _ in 0..n {
        z_pow *= z_inv;
    }
    Ok(t.scale(z_pow).distance(&zz) * log_inv_rho.exp())
}

/// A constant `A(r) > 1` bounding `‖P‖`, `‖Q‖` and their Lipschitz
/// constants in `α` on `|α| ≤ r`, `|z| = 1`.
pub fn step_bound(r: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Domain(format!("r = {r} is not in [0, 1)")));
    }
    let norm_bound = ((1.0 + r) / (1.0 - r)).sqrt();
    let lipschitz = 2.0 / (1.0 - r * r).powf(1.5);
    Ok(norm_bound.max(lipschitz))
}

/// `C(r) = A(r)·∛3`, so that `n A^n ≤ C^n` for every `n ≥ 1`.
pub fn perturbation_constant(r: f64) -> Result<f64> {
    Ok(step_bound(r)? * 3f64.cbrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationGap {
    /// `‖Z(n,0;z) − Z̃(n,0;z)‖`
    pub lhs: f64,
    /// `max_j |α(j) − α̃(j)|` over `[0, n)`
    pub delta: f64,
    /// `n δ A(r)^n`
    pub intermediate: f64,
    /// `δ C(r)^n`
    pub bound: f64,
    pub r: f64,
    pub holds: bool,
}

pub fn perturbation_gap(
    alpha: &AlphaWindow,
    alpha_tilde: &AlphaWindow,
    z: C64,
    n: i64,
) -> Result<PerturbationGap> {
    if n < 0 {
        return Err(Error::Domain("n must be non-negative".into()));
    }
    let mut delta: f64 = 0.0;
    let mut r: f64 = 0.0;
    for j in 0..n {
        let (a, b) = (alpha.get(j)?, alpha_tilde.get(j)?);
        delta = delta.max((a - b).norm());
        r = r.max(a.norm()).max(b.norm());
    }
    let a_r = step_bound(r)?;
    let c_r = perturbation_constant(r)?;
    let lhs = (gz_cocycle(alpha, n, 0, z)? - gz_cocycle(alpha_tilde, n, 0, z)?).norm();
    let intermediate = n as f64 * delta * a_r.powi(n as i32);
    let bound = delta * c_r.powi(n as i32);
    Ok(PerturbationGap {
        lhs,
        delta,
        intermediate,
        bound,
        r,
        holds: lhs <= bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn disk(rng: &mut ChaCha8Rng, r: f64) -> C64 {
        C64::from_polar(r * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..std::f64::consts::TAU))
    }

    fn circle(rng: &mut ChaCha8Rng) -> C64 {
        C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))
    }

    fn window(rng: &mut ChaCha8Rng, start: i64, len: usize, r: f64) -> AlphaWindow {
        AlphaWindow::new(start, (0..len).map(|_| disk(rng, r)).collect()).unwrap()
    }

    fn close(a: Mat2, b: Mat2, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn free_matrices() {
        let z = C64::from_polar(1.0, 0.9);
        let zero = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        assert!(close(szego(zero, z).unwrap(), Mat2::new(z, zero, zero, one), 0.0));
        assert!(close(gz_q(zero, z).unwrap(), Mat2::new(zero, one, one, zero), 0.0));
        assert!(close(gz_p(zero, z).unwrap(), Mat2::new(zero, z.inv(), z, zero), 0.0));
        assert!((szego(zero, z).unwrap().norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn one_step_determinants() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let (a, z) = (disk(&mut rng, 0.95), circle(&mut rng));
            assert!((szego(a, z).unwrap().det() - z).norm() < 1e-13);
            assert!((gz_p(a, z).unwrap().det() + 1.0).norm() < 1e-13);
            assert!((gz_q(a, z).unwrap().det() + 1.0).norm() < 1e-13);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(szego(c(1.0, 0.0), c(1.0, 0.0)).is_err());
        assert!(gz_p(c(0.1, 0.0), c(0.0, 0.0)).is_err());
        assert!(step_bound(1.0).is_err());
    }

    #[test]
    fn cocycle_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = window(&mut rng, -50, 100, 0.8);
        let z = circle(&mut rng);
        assert_eq!(gz_cocycle(&a, 5, 5, z).unwrap(), Mat2::identity());
        for n in 1..=40 {
            let fwd = gz_cocycle(&a, n, 0, z).unwrap();
            let back = gz_cocycle(&a, 0, n, z).unwrap();
            assert!(close(fwd * back, Mat2::identity(), 1e-12 * fwd.norm().powi(2)));
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((fwd.det() - sign).norm() < 1e-12 * fwd.norm().powi(2));
        }
        for (n, m, k) in [(10, 4, -3), (30, 0, -20), (7, 6, 5)] {
            let lhs = gz_cocycle(&a, n, m, z).unwrap() * gz_cocycle(&a, m, k, z).unwrap();
            let rhs = gz_cocycle(&a, n, k, z).unwrap();
            assert!(close(lhs, rhs, 1e-11 * rhs.norm().max(1.0)));
        }
    }

    #[test]
    fn one_step_sgz_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..2000 {
            let (a, b) = (disk(&mut rng, 0.9), disk(&mut rng, 0.9));
            let z = if rng.gen_bool(0.5) {
                circle(&mut rng)
            } else {
                disk(&mut rng, 2.0) + c(0.05, 0.0)
            };
            let scale = 1.0 + z.norm().max(z.inv().norm()).powi(2);
            assert!(check_one_step_identity(a, b, z).unwrap() <= 1e-13 * scale * 30.0);
        }
    }

    #[test]
    fn free_case_sgz_identity_is_exact() {
        let a = AlphaWindow::constant(c(0.0, 0.0), 0, 40).unwrap();
        let z = C64::from_polar(1.0, 1.234);
        assert!(check_sgz_identity(&a, z, 20).unwrap() < 1e-13);
    }

    #[test]
    fn propagation_solves_the_eigenvalue_equation() {
        use crate::cmv::CmvOperator;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = window(&mut rng, -110, 220, 0.6);
        let z = circle(&mut rng);
        let path = solution_path(&a, z, SolutionState::new(c(0.3, 0.1), c(-0.7, 0.2)), -100, 100)
            .unwrap();
        let sub = AlphaWindow::new(-100, a.values[10..211].to_vec()).unwrap();
        let u: Vec<C64> = path.iter().map(|s| s.u).collect();
        let op = CmvOperator::new(sub.clone());
        let scale = u.iter().map(|x| x.norm()).fold(1.0, f64::max);
        assert!(op.residual(z, &u).unwrap() <= 1e-10 * scale);

        // Θ-block relations, with n = 2j
        for (i, n) in (-100i64..100).enumerate() {
            if n.rem_euclid(2) != 0 || n + 1 > 100 {
                continue;
            }
            let th = crate::cmv::theta_block(a.get(n).unwrap());
            let (v0, v1) = (path[i].v, path[i + 1].v);
            let (u0, u1) = (path[i].u, path[i + 1].u);
            let tol = 1e-11 * scale;
            assert!((th[0][0] * v0 + th[0][1] * v1 - z * u0).norm() <= tol);
            assert!((th[1][0] * v0 + th[1][1] * v1 - z * u1).norm() <= tol);
        }
        assert_eq!(propagate(&a, z, SolutionState::e1(), 0).unwrap(), SolutionState::e1());
        let p = propagate(&a, z, SolutionState::e2(), 37).unwrap();
        let q = solution_path(&a, z, SolutionState::e2(), 0, 37).unwrap()[37];
        assert!((p.u - q.u).norm() + (p.v - q.v).norm() < 1e-12 * scale);
    }

    #[test]
    fn step_bound_dominates_sampled_norms_and_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10_000 {
            let r = rng.gen_range(0.0..0.97);
            let a_r = step_bound(r).unwrap();
            let (a, b, z) = (disk(&mut rng, r), disk(&mut rng, r), circle(&mut rng));
            let (pa, pb) = (gz_p(a, z).unwrap(), gz_p(b, z).unwrap());
            let (qa, qb) = (gz_q(a, z).unwrap(), gz_q(b, z).unwrap());
            let tol = 1.0 + 1e-12;
            assert!(pa.norm() <= a_r * tol);
            assert!(qa.norm() <= a_r * tol);
            assert!((pa - pb).norm() <= a_r * (a - b).norm() * tol + 1e-14);
            assert!((qa - qb).norm() <= a_r * (a - b).norm() * tol + 1e-14);
        }
    }

    #[test]
    fn perturbation_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = window(&mut rng, 0, 10, 0.5);
        let z = circle(&mut rng);
        let same = perturbation_gap(&a, &a, z, 10).unwrap();
        assert_eq!(same.lhs, 0.0);
        assert!(same.holds);

        let tilde = AlphaWindow::new(
            0,
            a.values
                .iter()
                .map(|&x| {
                    let y = x + C64::from_polar(1e-6 * rng.gen::<f64>(), rng.gen_range(0.0..std::f64::consts::TAU));
                    if y.norm() <= 0.5 { y } else { x }
                })
                .collect(),
        )
        .unwrap();
        let gap = perturbation_gap(&a, &tilde, z, 10).unwrap();
        assert!(gap.delta <= 1e-6);
        assert!(gap.lhs <= gap.intermediate);
        assert!(gap.intermediate <= gap.bound);
        assert!(gap.holds);
    }
}
