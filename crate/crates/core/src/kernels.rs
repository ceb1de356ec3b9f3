//! Smoothing kernels and their Laplace transforms.
//!
//! Three families live here: the trapezoid weight `f` and its transform `F`,
//! the mollifier `h1` with transforms `H1` and `H2`, and the quintic kernel
//! `g` with transform `G` and the decreasing majorant `G4` of `|Re G|`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// Below this modulus `(e^w - 1)/w` is summed as a series.
const EXPM1_SERIES_RADIUS: f64 = 1e-2;

/// Distance from `z = ±λ` inside which `H1` uses the two-exponential form.
const H1_SWITCH: f64 = 1e-2;

/// Below this modulus `G` is evaluated by its Taylor series.
pub const G_SERIES_RADIUS: f64 = 0.5;

const G_SERIES_TERMS: usize = 48;

/// `(e^w - 1)/w`, continuous through `w = 0`.
pub fn expm1_ratio<T: Scalar>(w: Complex<T>) -> Complex<T> {
    if w.norm() < lit(EXPM1_SERIES_RADIUS) {
        // 1 + w/2! + w^2/3! + ... , Horner form
        let mut acc = Complex::new(T::one(), T::zero());
        for k in (2..=8).rev() {
            acc = Complex::new(T::one(), T::zero()) + w * acc / lit::<T>(k as f64);
        }
        acc
    } else {
        (w.exp() - T::one()) / w
    }
}

/// `ε` and `log x` for the trapezoid weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampParams<T> {
    log_x: T,
    eps: T,
}

impl<T: Scalar> RampParams<T> {
    pub fn new(log_x: T, eps: T) -> Result<Self> {
        if !(log_x > T::zero() && eps > T::zero()) {
            return Err(Error::InvalidParams(format!("need log_x > 0 and eps > 0, got {log_x}, {eps}")));
        }
        if !(eps / log_x < lit(0.25)) {
            return Err(Error::InvalidParams(format!("ramps overlap: eps/log_x = {} >= 1/4", eps / log_x)));
        }
        Ok(Self { log_x, eps })
    }

    pub fn log_x(&self) -> T {
        self.log_x
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    /// Ramp width `ε / log x`.
    pub fn width(&self) -> T {
        self.eps / self.log_x
    }
}

/// Support length `K` and rate `λ` of the mollifier `h1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifierParams<T> {
    k: T,
    lambda: T,
}

impl<T: Scalar> MollifierParams<T> {
    pub fn new(k: T, lambda: T) -> Result<Self> {
        if !(k > T::zero() && k.is_finite()) {
            return Err(Error::InvalidParams(format!("K must be positive, got {k}")));
        }
        if !lambda.is_finite() {
            return Err(Error::InvalidParams(format!("lambda must be finite, got {lambda}")));
        }
        Ok(Self { k, lambda })
    }

    pub fn k(&self) -> T {
        self.k
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }
}

/// Half-width `γ` of the quintic kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuinticKernelParams<T> {
    gamma: T,
}

impl<T: Scalar> QuinticKernelParams<T> {
    pub fn new(gamma: T) -> Result<Self> {
        if !(gamma > T::zero() && gamma.is_finite()) {
            return Err(Error::InvalidParams(format!("gamma must be positive, got {gamma}")));
        }
        Ok(Self { gamma })
    }

    /// Like [`new`](Self::new) but restricted to the search range used for
    /// the density table, `1.00 <= γ <= 1.60`.
    pub fn for_table(gamma: T) -> Result<Self> {
        let eps = lit::<T>(1e-12);
        if gamma < lit::<T>(1.0) - eps || gamma > lit::<T>(1.6) + eps {
            return Err(Error::InvalidParams(format!("table gamma must lie in [1, 1.6], got {gamma}")));
        }
        Self::new(gamma)
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    /// `g(0) = 16γ⁵/15`.
    pub fn g0(&self) -> T {
        lit::<T>(16.0 / 15.0) * self.gamma.powi(5)
    }

    /// Polynomial coefficients of `g` on `[0, 2γ)`, index = power of `t`.
    fn coefficients(&self) -> [T; 6] {
        let g = self.gamma;
        [
            self.g0(),
            T::zero(),
            lit::<T>(-4.0 / 3.0) * g.powi(3),
            lit::<T>(2.0 / 3.0) * g * g,
            T::zero(),
            lit(-1.0 / 30.0),
        ]
    }

    /// Exact moments `m_k = ∫_0^{2γ} t^k g(t) dt` for `k < n`.
    pub fn moments(&self, n: usize) -> Vec<T> {
        let c = self.coefficients();
        let top = self.gamma * lit(2.0);
        (0..n)
            .map(|k| {
                c.iter().enumerate().fold(T::zero(), |acc, (j, &cj)| {
                    let p = k + j + 1;
                    acc + cj * top.powi(p as i32) / lit(p as f64)
                })
            })
            .collect()
    }
}

/// The trapezoid weight `f`: 0 up to 1/2, linear ramp, plateau 1 on
/// `[1/2 + ε/log x, 1]`, linear ramp down, 0 from `1 + ε/log x`.
pub fn smooth_cutoff_f<T: Scalar>(t: T, p: &RampParams<T>) -> T {
    let half = lit::<T>(0.5);
    let a = p.width();
    if t <= half || t >= T::one() + a {
        T::zero()
    } else if t < half + a {
        (t - half) / a
    } else if t <= T::one() {
        T::one()
    } else {
        T::one() - (t - T::one()) / a
    }
}

/// Laplace transform `F(s) = ∫_0^∞ e^{-st} f(t) dt` in product form.
pub fn laplace_f<T: Scalar>(s: Complex<T>, p: &RampParams<T>) -> Complex<T> {
    let a = p.width();
    let half = lit::<T>(0.5);
    (-s).exp() * expm1_ratio(s * half) * half * expm1_ratio(s * a) * (-(s * a)).exp()
}

/// The mollifier `h1(t) = sinh((K - t)λ)` on `[0, K]`, zero beyond.
pub fn mollifier_h1<T: Scalar>(t: T, p: &MollifierParams<T>) -> T {
    if t < T::zero() || t >= p.k {
        T::zero()
    } else {
        ((p.k - t) * p.lambda).sinh()
    }
}

/// Laplace transform `H1(z) = ∫_0^∞ e^{-zt} h1(t) dt`.
pub fn kernel_h1<T: Scalar>(z: Complex<T>, p: &MollifierParams<T>) -> Complex<T> {
    let (k, l) = (p.k, p.lambda);
    let half = lit::<T>(0.5);
    let lz = Complex::new(l, T::zero());
    let near = lit::<T>(H1_SWITCH);
    if (z + lz).norm() < near || (z - lz).norm() < near {
        let up = expm1_ratio(-(z + lz) * k) * (k * l).exp();
        let down = expm1_ratio(-(z - lz) * k) * (-(k * l)).exp();
        return (up - down) * (k * half);
    }
    let t1 = Complex::new((k * l).exp(), T::zero()) / (z + lz);
    let t2 = Complex::new((-(k * l)).exp(), T::zero()) / (lz - z);
    let t3 = (-(z * k)).exp() * (l + l) / (lz * lz - z * z);
    (t1 + t2 - t3) * half
}

/// `H2(z) = ((1 - e^{-Kz})/z)^2`, equal to `K^2` at `z = 0`.
pub fn kernel_h2<T: Scalar>(z: Complex<T>, k: T) -> Complex<T> {
    let r = expm1_ratio(-(z * k)) * k;
    r * r
}

/// The quintic kernel `g`, the self-convolution of `max(0, γ² - x²)`.
pub fn kernel_g<T: Scalar>(t: T, p: &QuinticKernelParams<T>) -> Result<T> {
    if !(t >= T::zero()) {
        return Err(Error::Domain(format!("g is defined for t >= 0, got {t}")));
    }
    let gm = p.gamma;
    if t >= gm + gm {
        return Ok(T::zero());
    }
    let c = p.coefficients();
    Ok(((((c[5] * t + c[4]) * t + c[3]) * t + c[2]) * t + c[1]) * t + c[0])
}

fn laplace_g_closed<T: Scalar>(z: Complex<T>, gm: T) -> Complex<T> {
    let e = (-(z * (gm + gm))).exp();
    let one = Complex::new(T::one(), T::zero());
    let z2 = z * z;
    let z3 = z2 * z;
    let z4 = z2 * z2;
    let z6 = z4 * z2;
    one / z * (lit::<T>(16.0 / 15.0) * gm.powi(5)) - one / z3 * (lit::<T>(8.0 / 3.0) * gm.powi(3))
        + (one + e) / z4 * (lit::<T>(4.0) * gm * gm)
        + (e - one + z * e * (gm + gm)) / z6 * lit::<T>(4.0)
}

fn laplace_g_series<T: Scalar>(z: Complex<T>, p: &QuinticKernelParams<T>) -> Complex<T> {
    let m = p.moments(G_SERIES_TERMS);
    let mut term = Complex::new(T::one(), T::zero());
    let mut acc = Complex::new(m[0], T::zero());
    for (k, mk) in m.iter().enumerate().skip(1) {
        term = term * (-z) / lit::<T>(k as f64);
        acc = acc + term * *mk;
    }
    acc
}

/// Laplace transform `G(z) = ∫_0^{2γ} e^{-zt} g(t) dt`; `G(0) = 8γ⁶/9`.
pub fn laplace_g<T: Scalar>(z: Complex<T>, p: &QuinticKernelParams<T>) -> Complex<T> {
    if z.norm() < lit(G_SERIES_RADIUS) {
        laplace_g_series(z, p)
    } else {
        laplace_g_closed(z, p.gamma)
    }
}

/// `Re G(x)` at a real argument.
pub fn laplace_g_re<T: Scalar>(x: T, p: &QuinticKernelParams<T>) -> T {
    laplace_g(Complex::new(x, T::zero()), p).re
}

/// Majorant `G4(x, y) >= |Re G(x + iy)|`, decreasing in `y > 0`.
pub fn majorant_g4<T: Scalar>(x: T, y: T, p: &QuinticKernelParams<T>) -> Result<T> {
    let r2 = x * x + y * y;
    if !(r2 > T::zero()) {
        return Err(Error::Domain("G4 is undefined at (0, 0)".into()));
    }
    let gm = p.gamma;
    let ax = x.abs();
    let e = (-(gm + gm) * x).exp();
    let r4 = r2 * r2;
    let r6 = r4 * r2;
    let four = lit::<T>(4.0);
    Ok(lit::<T>(16.0 / 15.0) * gm.powi(5) * ax / r2
        + lit::<T>(8.0 / 3.0) * gm.powi(3) * (ax.powi(3) + lit::<T>(3.0) * ax * y * y) / r6
        + four * gm * gm * (T::one() + e) / r4
        + four * (T::one() + e + (gm + gm) * r2.sqrt() * e) / r6)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate;

    type C = Complex<f64>;

    fn ramp() -> RampParams<f64> {
        RampParams::new(20.0, 1.0).unwrap()
    }

    fn quad_c(f: impl Fn(f64) -> C, a: f64, b: f64) -> C {
        let re = integrate(|t| f(t).re, a, b, 1e-12).unwrap();
        let im = integrate(|t| f(t).im, a, b, 1e-12).unwrap();
        C::new(re, im)
    }

    #[test]
    fn f_pieces() {
        let p = ramp();
        assert_eq!(smooth_cutoff_f(0.75, &p), 1.0);
        assert_eq!(smooth_cutoff_f(0.25, &p), 0.0);
        assert!((smooth_cutoff_f(0.5 + p.width() / 2.0, &p) - 0.5).abs() < 1e-12);
        assert!((smooth_cutoff_f(1.0 + p.width() / 2.0, &p) - 0.5).abs() < 1e-12);
        assert_eq!(smooth_cutoff_f(1.5, &p), 0.0);
    }

    #[test]
    fn ramp_params_reject_overlap() {
        assert!(RampParams::new(4.0, 1.0).is_err());
        assert!(RampParams::new(-1.0, 0.1).is_err());
        assert!(RampParams::new(10.0, 0.0).is_err());
    }

    #[test]
    fn f_transform_at_zero_and_continuity() {
        let p = ramp();
        let f0 = laplace_f(C::new(0.0, 0.0), &p);
        assert!((f0.re - 0.5).abs() < 1e-15 && f0.im == 0.0);
        let f1 = laplace_f(C::new(1e-6, 0.0), &p);
        assert!((f1 - f0).norm() < 1e-5);
    }

    #[test]
    fn f_transform_matches_quadrature() {
        let p = ramp();
        for &(re, im) in &[(0.0, 0.0), (0.3, 0.0), (1.0, 2.0), (2.5, -4.0), (0.0, 7.0)] {
            let s = C::new(re, im);
            let q = quad_c(|t| (-s * t).exp() * smooth_cutoff_f(t, &p), 0.0, 2.0);
            assert!((laplace_f(s, &p) - q).norm() < 1e-7, "s={s}");
        }
    }

    #[test]
    fn h1_identity_on_imaginary_axis() {
        let p = MollifierParams::<f64>::new(0.66, 0.7).unwrap();
        for &t in &[0.0, 0.5, 1.0, 3.0] {
            let lhs = kernel_h1(C::new(0.0, t), &p).re;
            let rhs = 0.7 * (0.66f64 * 0.7).exp() / 2.0 * kernel_h2(C::new(0.7, t), 0.66).norm();
            assert!((lhs - rhs).abs() < 1e-9, "t={t}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn h1_matches_quadrature() {
        let p = MollifierParams::<f64>::new(1.0, 0.5).unwrap();
        let z = C::new(2.0, 0.0);
        let q = integrate(|t: f64| (-2.0 * t).exp() * mollifier_h1(t, &p), 0.0, 1.0, 1e-13).unwrap();
        assert!((kernel_h1(z, &p).re - q).abs() < 1e-8);
        assert_eq!(mollifier_h1(1.0, &p), 0.0);
    }

    #[test]
    fn h1_continuous_near_poles() {
        let p = MollifierParams::<f64>::new(0.66, 0.7).unwrap();
        for &c in &[0.7, -0.7] {
            let inside = kernel_h1(C::new(c + 0.0099, 0.0), &p);
            let outside = kernel_h1(C::new(c + 0.0101, 0.0), &p);
            assert!((inside - outside).norm() < 1e-3);
            let exact = kernel_h1(C::new(c, 0.0), &p);
            assert!(exact.re.is_finite());
        }
    }

    #[test]
    fn h2_values() {
        assert!((kernel_h2(C::new(0.0, 0.0), 0.66).re - 0.4356).abs() < 1e-15);
        let v = kernel_h2(C::new(1.0, 0.0), 1.0).re;
        assert!((v - (1.0 - (-1f64).exp()).powi(2)).abs() < 1e-14);
        assert!((v - 0.39958).abs() < 1e-5);
    }

    #[test]
    fn g_values() {
        let p = QuinticKernelParams::<f64>::new(1.0).unwrap();
        assert!((kernel_g(0.0, &p).unwrap() - 16.0 / 15.0).abs() < 1e-15);
        assert_eq!(kernel_g(2.0, &p).unwrap(), 0.0);
        assert!(matches!(kernel_g(-0.1, &p), Err(Error::Domain(_))));
    }

    #[test]
    fn g_matches_convolution() {
        let p = QuinticKernelParams::<f64>::new(1.0).unwrap();
        let (gm, t) = (1.0, 1.0);
        let conv = integrate(|x: f64| (gm * gm - x * x) * (gm * gm - (t - x) * (t - x)), t - gm, gm, 1e-13)
            .unwrap();
        assert!((kernel_g(t, &p).unwrap() - conv).abs() < 1e-9);
    }

    #[test]
    fn g_at_zero() {
        let p = QuinticKernelParams::<f64>::new(1.0).unwrap();
        assert!((laplace_g_re(0.0, &p) - 8.0 / 9.0).abs() < 1e-14);
        let p = QuinticKernelParams::<f64>::new(1.3).unwrap();
        assert!((laplace_g_re(0.0, &p) - 8.0 * 1.3f64.powi(6) / 9.0).abs() < 1e-12);
    }

    #[test]
    fn g_branches_agree_on_switch_circle() {
        let p = QuinticKernelParams::<f64>::new(1.2).unwrap();
        for k in 0..32 {
            let th = k as f64 * std::f64::consts::TAU / 32.0;
            let z = C::from_polar(G_SERIES_RADIUS, th);
            let d = (laplace_g_series(z, &p) - laplace_g_closed(z, 1.2)).norm();
            assert!(d < 1e-9, "theta={th}: {d}");
        }
    }

    #[test]
    fn g_transform_matches_quadrature() {
        let p = QuinticKernelParams::<f64>::new(1.2).unwrap();
        for &(re, im) in &[(-1.9, 0.3), (-0.35, 2.0), (0.0, 0.0), (0.1, 0.1), (1.0, -3.0), (3.0, 6.0)] {
            let z = C::new(re, im);
            let q = quad_c(|t| (-z * t).exp() * kernel_g(t, &p).unwrap(), 0.0, 2.4);
            assert!((laplace_g(z, &p) - q).norm() < 1e-8, "z={z}");
        }
    }

    #[test]
    fn g4_domain_and_hand_value() {
        let p = QuinticKernelParams::<f64>::new(1.2).unwrap();
        assert!(matches!(majorant_g4(0.0, 0.0, &p), Err(Error::Domain(_))));
        let (x, y, g): (f64, f64, f64) = (-0.35, 5.0, 1.2);
        let r2 = x * x + y * y;
        let e = (-2.0 * g * x).exp();
        let t1 = 16.0 * g.powi(5) * x.abs() / (15.0 * r2);
        let t2 = 8.0 * g.powi(3) * (x.abs().powi(3) + 3.0 * x.abs() * y * y) / (3.0 * r2.powi(3));
        let t3 = 4.0 * g * g * (1.0 + e) / r2.powi(2);
        let t4 = 4.0 * (1.0 + e + 2.0 * g * r2.sqrt() * e) / r2.powi(3);
        assert!((majorant_g4(x, y, &p).unwrap() - (t1 + t2 + t3 + t4)).abs() < 1e-12);
    }

    #[test]
    fn f32_kernels_run() {
        let p = QuinticKernelParams::<f32>::new(1.0).unwrap();
        assert!((laplace_g_re(0.0f32, &p) - 8.0 / 9.0).abs() < 1e-5);
        assert!((kernel_h2(Complex::new(0.0f32, 0.0), 0.66).re - 0.4356).abs() < 1e-6);
    }
}
