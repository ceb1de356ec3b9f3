//! Weighted character-sum bound: `B2(λ)`, the `G2` supremum pieces, and `C2`.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{BoxDomain, Maximizer, DEFAULT_TOL};
use crate::scalar::{from_usize, lit, Scalar};

/// Exponents `w, u0, u1, v, x0, x1` of the sieve weights and the lower
/// bound `λ_min` for the zeros they see.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SieveWeights<T> {
    w: T,
    u0: T,
    u1: T,
    v: T,
    x0: T,
    x1: T,
    lambda_min: T,
}

impl<T: Scalar> SieveWeights<T> {
    pub fn new(w: T, u0: T, u1: T, v: T, x0: T, x1: T, lambda_min: T) -> Result<Self> {
        let third = T::one() / lit(3.0);
        let checks = [
            (x1 > x0, "x1 > x0"),
            (x0 > v + w + third, "x0 > v + w + 1/3"),
            (v > u1, "v > u1"),
            (u1 > u0, "u1 > u0"),
            (u0 > w + w + third, "u0 > 2w + 1/3"),
            (w > T::zero(), "w > 0"),
            (lambda_min > T::zero(), "lambda_min > 0"),
        ];
        for (ok, what) in checks {
            if !ok {
                return Err(Error::InvalidParams(format!("sieve weights violate {what}")));
            }
        }
        if ![w, u0, u1, v, x0, x1, lambda_min].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParams("sieve weights must be finite".into()));
        }
        Ok(Self { w, u0, u1, v, x0, x1, lambda_min })
    }

    pub fn with_lambda_min(self, lambda_min: T) -> Result<Self> {
        Self::new(self.w, self.u0, self.u1, self.v, self.x0, self.x1, lambda_min)
    }

    pub fn w(&self) -> T {
        self.w
    }
    pub fn u0(&self) -> T {
        self.u0
    }
    pub fn u1(&self) -> T {
        self.u1
    }
    pub fn v(&self) -> T {
        self.v
    }
    pub fn x0(&self) -> T {
        self.x0
    }
    pub fn x1(&self) -> T {
        self.x1
    }
    pub fn lambda_min(&self) -> T {
        self.lambda_min
    }

    /// Weight sum `(e^{2λx1} + e^{2λx0})/(x1 - x0) + (e^{2λu1} + e^{2λu0})/(u1 - u0)`.
    pub fn weight_sum(&self, lambda: T) -> T {
        let two = lambda + lambda;
        ((two * self.x1).exp() + (two * self.x0).exp()) / (self.x1 - self.x0)
            + ((two * self.u1).exp() + (two * self.u0).exp()) / (self.u1 - self.u0)
    }

    /// `(e^{x1 z} - e^{x0 z})/(x1 - x0) - (e^{u1 z} - e^{u0 z})/(u1 - u0)`.
    fn difference(&self, z: Complex<T>) -> Complex<T> {
        ((z * self.x1).exp() - (z * self.x0).exp()) / (self.x1 - self.x0)
            - ((z * self.u1).exp() - (z * self.u0).exp()) / (self.u1 - self.u0)
    }
}

impl Default for SieveWeights<f64> {
    fn default() -> Self {
        Self::new(0.115, 0.564, 0.620, 0.964, 1.413, 1.623, 0.35).expect("default weights are valid")
    }
}

impl Default for SieveWeights<f32> {
    fn default() -> Self {
        Self::new(0.115, 0.564, 0.620, 0.964, 1.413, 1.623, 0.35).expect("default weights are valid")
    }
}

/// `B2(λ)`, the reciprocal of the weight sum; `B2(∞) = 0`.
pub fn b2<T: Scalar>(lambda: T, p: &SieveWeights<T>) -> Result<T> {
    if !(lambda >= T::zero()) {
        return Err(Error::Domain(format!("B2 needs lambda >= 0, got {lambda}")));
    }
    if lambda.is_infinite() {
        return Ok(T::zero());
    }
    Ok(T::one() / p.weight_sum(lambda))
}

/// Search settings for the `G2` suprema.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct G2Options<T> {
    pub tol: T,
    /// Upper end of the truncated `λ` search range.
    pub lambda_max: T,
    pub maximizer: Maximizer,
}

impl<T: Scalar> Default for G2Options<T> {
    fn default() -> Self {
        Self { tol: lit(DEFAULT_TOL), lambda_max: lit(10.0), maximizer: Maximizer::default() }
    }
}

/// Last offset whose `G2` piece is found by direct maximization.
pub const G2_SEARCHED_TERMS: usize = 6;

/// The `c = 0` objective `(Dx - Du) / S / (2λ)²` at real `λ`.
pub fn g2_diagonal_objective<T: Scalar>(lambda: T, p: &SieveWeights<T>) -> T {
    let two = lambda + lambda;
    let d = p.difference(Complex::new(two, T::zero())).re;
    d / p.weight_sum(lambda) / (two * two)
}

/// The `1 <= c <= 6` objective `2|D(2λ + it)| / (4λ² + t²) / S(λ)`.
pub fn g2_offset_objective<T: Scalar>(lambda: T, t: T, p: &SieveWeights<T>) -> T {
    let z = Complex::new(lambda + lambda, t);
    let four_l2 = lit::<T>(4.0) * lambda * lambda;
    lit::<T>(2.0) * p.difference(z).norm() / (four_l2 + t * t) / p.weight_sum(lambda)
}

/// Closed-form piece `2 / (4λ_min² + (c-1)²)` used for large offsets.
pub fn g2_closed_term<T: Scalar>(c: usize, p: &SieveWeights<T>) -> T {
    let m = from_usize::<T>(c.saturating_sub(1));
    lit::<T>(2.0) / (lit::<T>(4.0) * p.lambda_min * p.lambda_min + m * m)
}

/// Contribution `G2_c` of offset `c`, suprema inflated by the tolerance.
pub fn g2_term<T: Scalar>(c: usize, p: &SieveWeights<T>) -> Result<T> {
    g2_term_with(c, p, &G2Options::default())
}

pub fn g2_term_with<T: Scalar>(c: usize, p: &SieveWeights<T>, opts: &G2Options<T>) -> Result<T> {
    let lmax = opts.lambda_max;
    if !(lmax > p.lambda_min) {
        return Err(Error::InvalidParams(format!("lambda_max {lmax} must exceed lambda_min {}", p.lambda_min)));
    }
    let four_lmax2 = lit::<T>(4.0) * lmax * lmax;
    match c {
        0 => {
            let r = opts.maximizer.max1d(|l| g2_diagonal_objective(l, p), p.lambda_min, lmax, opts.tol)?;
            // |Dx - Du| <= S, so the objective is below 1/(4λ²) beyond lmax.
            check_truncation(c, T::one() / four_lmax2, r.value)?;
            Ok(r.value + opts.tol)
        }
        1..=G2_SEARCHED_TERMS => {
            let lo_t = from_usize::<T>(c - 1);
            let dom = BoxDomain::rect((p.lambda_min, lmax), (lo_t, lo_t + lit(2.0)))?;
            let r = opts.maximizer.max2d(|l, t| g2_offset_objective(l, t, p), &dom, opts.tol)?;
            check_truncation(c, lit::<T>(2.0) / (four_lmax2 + lo_t * lo_t), r.value)?;
            Ok(r.value + opts.tol)
        }
        _ => Ok(g2_closed_term(c, p)),
    }
}

fn check_truncation<T: Scalar>(c: usize, envelope: T, boxmax: T) -> Result<()> {
    if envelope < boxmax {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "G2 offset {c}: envelope {envelope} beyond lambda_max does not fall below box maximum {boxmax}"
        )))
    }
}

/// The pieces of the `G2` bound.
#[derive(Debug, Clone, PartialEq)]
pub struct G2Breakdown<T> {
    pub diagonal: T,
    /// `G2_c` for `c = 1..=6`.
    pub offsets: Vec<T>,
    /// `Σ_{6<=m<=100} 2/(4λ_min² + m²)`.
    pub middle: T,
    /// `arctan(λ_min/50)/λ_min`.
    pub tail: T,
    pub total: T,
}

/// Sum of the closed-form pieces for `m = 6..=100`.
pub fn g2_middle_sum<T: Scalar>(p: &SieveWeights<T>) -> T {
    (6..=100).fold(T::zero(), |acc, m| acc + g2_closed_term(m + 1, p))
}

/// Integral bound `arctan(λ_min/50)/λ_min` for the offsets beyond 101.
pub fn g2_tail<T: Scalar>(p: &SieveWeights<T>) -> T {
    (p.lambda_min / lit(50.0)).atan() / p.lambda_min
}

/// All pieces of `G2`, with the seven searched suprema run concurrently
/// and summed in index order.
pub fn g2_breakdown<T: Scalar>(p: &SieveWeights<T>, opts: &G2Options<T>) -> Result<G2Breakdown<T>> {
    let terms: Vec<T> = (0..=G2_SEARCHED_TERMS)
        .into_par_iter()
        .map(|c| g2_term_with(c, p, opts))
        .collect::<Result<_>>()?;
    let middle = g2_middle_sum(p);
    let tail = g2_tail(p);
    let total = terms.iter().fold(T::zero(), |a, &b| a + b) + middle + tail;
    Ok(G2Breakdown { diagonal: terms[0], offsets: terms[1..].to_vec(), middle, tail, total })
}

/// The `G2` bound at default search settings.
pub fn g2_total<T: Scalar>(p: &SieveWeights<T>) -> Result<T> {
    Ok(g2_breakdown(p, &G2Options::default())?.total)
}

/// `(x1 + x0 - u1 - v) / (2w(v - u1))`.
pub fn c2_prefactor<T: Scalar>(p: &SieveWeights<T>) -> T {
    (p.x1 + p.x0 - p.u1 - p.v) / ((p.w + p.w) * (p.v - p.u1))
}

/// Which multiplier of `G2` enters `C2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum C2Form {
    /// `prefactor · G2`
    #[default]
    Proof,
    /// `prefactor · (1 + G2)`
    Statement,
}

/// `C2 = prefactor · G2`.
pub fn c2<T: Scalar>(p: &SieveWeights<T>, g2: T) -> T {
    c2_with_form(p, g2, C2Form::Proof)
}

pub fn c2_with_form<T: Scalar>(p: &SieveWeights<T>, g2: T, form: C2Form) -> T {
    match form {
        C2Form::Proof => c2_prefactor(p) * g2,
        C2Form::Statement => c2_prefactor(p) * (T::one() + g2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> SieveWeights<f64> {
        SieveWeights::default()
    }

    #[test]
    fn weights_reject_each_invariant() {
        let ok = [0.115, 0.564, 0.620, 0.964, 1.413, 1.623, 0.35];
        let bad = [
            [0.115, 0.564, 0.620, 0.964, 1.413, 1.413, 0.35],
            [0.115, 0.564, 0.620, 0.964, 1.40, 1.623, 0.35],
            [0.115, 0.564, 0.620, 0.600, 1.413, 1.623, 0.35],
            [0.115, 0.620, 0.564, 0.964, 1.413, 1.623, 0.35],
            [0.115, 0.55, 0.620, 0.964, 1.413, 1.623, 0.35],
            [0.115, 0.564, 0.620, 0.964, 1.413, 1.623, 0.0],
        ];
        let mk = |a: [f64; 7]| SieveWeights::new(a[0], a[1], a[2], a[3], a[4], a[5], a[6]);
        assert!(mk(ok).is_ok());
        for b in bad {
            assert!(matches!(mk(b), Err(Error::InvalidParams(_))), "{b:?}");
        }
    }

    #[test]
    fn b2_values() {
        let p = defaults();
        let want = 1.0 / (2.0 / 0.210 + 2.0 / 0.056);
        assert!((b2(0.0, &p).unwrap() - want).abs() < 1e-14);
        assert!((b2(0.0, &p).unwrap() - 0.02210).abs() < 1e-5);
        assert_eq!(b2(f64::INFINITY, &p).unwrap(), 0.0);
        assert!(b2(-0.1, &p).is_err());
    }

    #[test]
    fn closed_terms() {
        let p = defaults();
        assert!((g2_term(7, &p).unwrap() - 2.0 / (0.49 + 36.0)).abs() < 1e-15);
        assert!((g2_term(7, &p).unwrap() - 0.054810).abs() < 1e-6);
        assert!((g2_term(100, &p).unwrap() - 2.0 / (0.49 + 9801.0)).abs() < 1e-15);
        assert!((g2_tail(&p) - 0.007f64.atan() / 0.35).abs() < 1e-15);
        assert!((g2_tail(&p) - 0.019999).abs() < 1e-6);
    }

    #[test]
    fn prefactor_and_c2() {
        let p = defaults();
        assert!((c2_prefactor(&p) - 1.452 / 0.07912).abs() < 1e-9);
        assert!((c2_prefactor(&p) - 18.352).abs() < 1e-3);
        assert!((c2(&p, 0.650) - 11.929).abs() < 1e-3);
        assert_eq!(c2(&p, 0.0), 0.0);
        assert!((c2_with_form(&p, 0.65, C2Form::Statement) - 18.352 * 1.65).abs() < 1e-2);
    }

    #[test]
    fn diagonal_term_known_value() {
        let v = g2_term(0, &defaults()).unwrap();
        assert!((v - 0.027704).abs() < 1e-5, "{v}");
    }

    #[test]
    fn truncation_below_lambda_min_rejected() {
        let opts = G2Options { lambda_max: 0.3, ..G2Options::default() };
        assert!(g2_term_with(0, &defaults(), &opts).is_err());
    }
}
