//! Per-rectangle zero bound: `B1(λ)` and `C1(λ)`.

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// The character constant `φ`, either 1/4 (real characters) or 1/3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CharacterClass {
    Quarter,
    #[default]
    Third,
}

impl CharacterClass {
    pub fn phi<T: Scalar>(self) -> T {
        match self {
            CharacterClass::Quarter => lit(0.25),
            CharacterClass::Third => T::one() / lit(3.0),
        }
    }

    /// Maps 0.25 or 1/3 (to within 1e-9) onto a class.
    pub fn from_phi(phi: f64) -> Result<Self> {
        if (phi - 0.25).abs() < 1e-9 {
            Ok(CharacterClass::Quarter)
        } else if (phi - 1.0 / 3.0).abs() < 1e-9 {
            Ok(CharacterClass::Third)
        } else {
            Err(Error::InvalidParams(format!("phi must be 1/4 or 1/3, got {phi}")))
        }
    }
}

/// `B1(λ) = (1 - e^{-Kλ})² / (λ² + 1/4)`.
pub fn b1<T: Scalar>(lambda: T, k: T) -> Result<T> {
    if !(lambda > T::zero()) {
        return Err(Error::Domain(format!("B1 needs lambda > 0, got {lambda}")));
    }
    let num = (-(k * lambda)).exp_m1();
    Ok(num * num / (lambda * lambda + lit(0.25)))
}

/// `C1(λ) = φ(1 - e^{-2Kλ})/(2λ) + (2Kλ - 1 + e^{-2Kλ})/(2λ²) + δ`,
/// with the limit `φK + K² + δ` at `λ = 0`.
pub fn c1<T: Scalar>(lambda: T, k: T, cls: CharacterClass, delta: T) -> Result<T> {
    if !(lambda >= T::zero()) {
        return Err(Error::Domain(format!("C1 needs lambda >= 0, got {lambda}")));
    }
    let phi: T = cls.phi();
    let u = (k + k) * lambda;
    if u < lit(1e-4) {
        // first term: φK(1 - u/2 + u²/6), second: K²(1 - u/3 + u²/12)
        let first = phi * k * (T::one() - u / lit(2.0) + u * u / lit(6.0));
        let second = k * k * (T::one() - u / lit(3.0) + u * u / lit(12.0));
        return Ok(first + second + delta);
    }
    let two_l = lambda + lambda;
    let em = (-u).exp_m1();
    Ok(-phi * em / two_l + (u + em) / (two_l * lambda) + delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn b1_values() {
        let v = b1(1.0, 0.66).unwrap();
        assert!((v - (1.0 - (-0.66f64).exp()).powi(2) / 1.25).abs() < 1e-15);
        assert!((v - 0.18672).abs() < 1e-4);
        assert!(b1(1e-8, 0.66).unwrap() < 1e-14);
        assert!(matches!(b1(0.0, 0.66), Err(Error::Domain(_))));
        assert!(b1(-1.0, 0.66).is_err());
    }

    #[test]
    fn c1_limit_and_hand_value() {
        let v = c1(0.0f64, 0.66, CharacterClass::Third, 0.0).unwrap();
        assert!((v - 0.6556).abs() < 1e-12);
        let (l, k, phi) = (1.42f64, 0.66f64, 1.0 / 3.0);
        let e = (-2.0 * k * l).exp();
        let hand = phi * (1.0 - e) / (2.0 * l) + (2.0 * k * l - 1.0 + e) / (2.0 * l * l);
        assert!((c1(l, k, CharacterClass::Third, 0.0).unwrap() - hand).abs() < 1e-12);
        assert!((c1(l, k, CharacterClass::Third, 0.01).unwrap() - hand - 0.01).abs() < 1e-12);
    }

    #[test]
    fn c1_small_lambda_branch_is_continuous() {
        for &l in &[1e-6f64, 7e-5, 7.6e-5, 1e-3] {
            let a = c1(l, 0.66, CharacterClass::Third, 0.0).unwrap();
            let b = c1(l * 1.0001, 0.66, CharacterClass::Third, 0.0).unwrap();
            assert!((a - b).abs() < 1e-7);
        }
    }

    #[test]
    fn phi_selection() {
        assert_eq!(CharacterClass::from_phi(0.25).unwrap(), CharacterClass::Quarter);
        assert_eq!(CharacterClass::from_phi(1.0 / 3.0).unwrap(), CharacterClass::Third);
        assert!(CharacterClass::from_phi(0.3).is_err());
        assert_eq!(CharacterClass::default().phi::<f64>(), 1.0 / 3.0);
    }
}
