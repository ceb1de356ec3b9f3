//! Final certificates: the ladder bound over ranges of `λ1`, the exceptional
//! zero curve, and the terminal scalar inequality.

use rayon::prelude::*;

use crate::density_first::{b1, c1, CharacterClass};
use crate::density_second::{b2, SieveWeights};
use crate::density_third::{Bound, DensityTable};
use crate::error::{Error, Result};
use crate::report::{Cell, Report};
use crate::scalar::{from_usize, lit, Scalar};

/// Certificates must come in strictly below this.
pub const RHS_LIMIT: f64 = 0.99;

/// Default `log x / log q` for the ladder certificate.
pub const DEFAULT_M: f64 = 7.999;

/// `M` at which the reference right-hand sides were tabulated; the
/// reference comparison only applies to rows evaluated at this `M`.
pub const REFERENCE_M: f64 = 7.8;

/// Default allowed deviation from a reference right-hand side.
pub const DEFAULT_RHS_TOLERANCE: f64 = 0.01;

/// One range `[λ11, λ12)` of `λ1` with the adversary parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyRow {
    pub lambda11: f64,
    /// Upper end of the range; `f64::INFINITY` for the last row.
    pub lambda12: f64,
    pub lambda21: f64,
    pub lambda11p: f64,
    /// `Λ` in hundredths, so the ladder `Λ - 0.01r` is exact.
    pub lambda_hundredths: u32,
    pub m: f64,
}

impl AssemblyRow {
    pub fn lambda_cap(&self) -> f64 {
        f64::from(self.lambda_hundredths) / 100.0
    }

    pub fn with_m(self, m: f64) -> Self {
        Self { m, ..self }
    }

    pub fn validate<T: Scalar>(&self, params: &AssemblyParams<T>) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParams(format!("row at lambda11={}: {what}", self.lambda11)));
        if !(self.lambda11 > 0.0) {
            return bad("lambda11 must be positive");
        }
        if !(self.lambda11 < self.lambda12) {
            return bad("lambda11 < lambda12 required");
        }
        if !(self.lambda21 >= self.lambda11) {
            return bad("lambda21 >= lambda11 required");
        }
        if !(self.lambda11p >= self.lambda11) {
            return bad("lambda11' >= lambda11 required");
        }
        if self.lambda_hundredths > 200 {
            return bad("Lambda must not exceed 2");
        }
        let floor = params.k.to_f64().unwrap_or(f64::NAN) + 2.0 * params.weights.x1().to_f64().unwrap_or(f64::NAN);
        if !(self.m >= floor) {
            return bad(&format!("M = {} must be at least K + 2x1 = {floor}", self.m));
        }
        Ok(())
    }
}

/// Inputs shared by every row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyParams<T> {
    pub k: T,
    pub cls: CharacterClass,
    /// Slack added to `C1`.
    pub delta: T,
    pub weights: SieveWeights<T>,
    pub c2: T,
}

/// `E(λ) = e^{-Mλ} C1(λ) / (B1(λ) B2(λ))`.
pub fn leading_ratio<T: Scalar>(lambda: T, m: T, p: &AssemblyParams<T>) -> Result<T> {
    let num = (-(m * lambda)).exp() * c1(lambda, p.k, p.cls, p.delta)?;
    Ok(num / (b1(lambda, p.k)? * b2(lambda, &p.weights)?))
}

/// `D(λ) = (E(λ) - E(Λ)) B2(λ)`; zero at `λ = Λ`.
pub fn d<T: Scalar>(lambda: T, cap: T, m: T, p: &AssemblyParams<T>) -> Result<T> {
    if !(lambda > T::zero()) {
        return Err(Error::Domain(format!("D needs lambda > 0, got {lambda}")));
    }
    let floor = p.k + lit::<T>(2.0) * p.weights.x1();
    if !(m >= floor) {
        return Err(Error::InvalidParams(format!("M = {m} must be at least K + 2x1 = {floor}")));
    }
    Ok((leading_ratio(lambda, m, p)? - leading_ratio(cap, m, p)?) * b2(lambda, &p.weights)?)
}

/// The pieces of the ladder bound for one row.
#[derive(Debug, Clone, PartialEq)]
pub struct RhsBreakdown<T> {
    pub column: usize,
    pub lambda_star: T,
    /// Number of ladder steps; negative when `λ* = Λ`.
    pub s: i64,
    /// `E(Λ) C2`.
    pub leading: T,
    /// `Σ (N(Λ_r) - N(Λ_{r+1})) D(Λ_{r+1})`.
    pub ladder: T,
    /// `N(Λ_s) D(λ*)`.
    pub boundary: T,
    pub a1: T,
    /// Multiplier in `{1, 2}` chosen to maximize `A1''`.
    pub n4: u8,
    pub total: T,
}

fn bound_value<T: Scalar>(b: Bound) -> T {
    match b {
        Bound::Finite(n) => from_usize(n as usize),
        Bound::Infinite => T::infinity(),
    }
}

/// Right-hand side of the final inequality for one row.
pub fn final_rhs<T: Scalar>(row: &AssemblyRow, table: &DensityTable, p: &AssemblyParams<T>) -> Result<RhsBreakdown<T>> {
    row.validate(p)?;
    let column = table.column_for(row.lambda11).ok_or(Error::Coverage { threshold: row.lambda11, lambda: row.lambda11 })?;
    let m = lit::<T>(row.m);
    let cap_h = row.lambda_hundredths;
    let cap = lit::<T>(row.lambda_cap());
    let (l11, l11p) = (lit::<T>(row.lambda11), lit::<T>(row.lambda11p));

    let star = row.lambda11p.min(row.lambda21).min(row.lambda_cap());
    let lambda_star = lit::<T>(star);
    let star_h = (star * 100.0 * 1e6).round() / 1e6;
    let s = (f64::from(cap_h) - star_h).ceil() as i64 - 1;

    let e_cap = leading_ratio(cap, m, p)?;
    let leading = e_cap * p.c2;

    let step = |r: i64| -> u32 { cap_h - r as u32 };
    let mut ladder = T::zero();
    let mut boundary = T::zero();
    let mut infinite = false;
    if s >= 0 {
        let mut prev = table.nstar(column, step(0))?;
        for r in 0..s {
            let next = table.nstar(column, step(r + 1))?;
            match (prev, next) {
                (Bound::Finite(a), Bound::Finite(b)) => {
                    let lam = from_usize::<T>(step(r + 1) as usize) / lit(100.0);
                    let diff = from_usize::<T>(a as usize) - from_usize::<T>(b as usize);
                    ladder = ladder + diff * d(lam, cap, m, p)?;
                }
                _ => infinite = true,
            }
            prev = next;
        }
        let last = table.nstar(column, step(s))?;
        infinite |= !last.is_finite();
        if last.is_finite() {
            boundary = bound_value::<T>(last) * d(lambda_star, cap, m, p)?;
        }
    }

    let d_star = d(lambda_star, cap, m, p)?;
    let ratio = |l: T| -> Result<T> { Ok((-(m * l)).exp() / b1(l, p.k)?) };
    let first = lit::<T>(2.0) * b1(l11, p.k)? * (ratio(l11)? - ratio(l11p)?);
    let b2_12 = b2(lit::<T>(row.lambda12), &p.weights)?;
    let bracket = ratio(l11p)? * c1(l11, p.k, p.cls, p.delta)? - e_cap * b2_12 - d_star;
    let (n4, a1) = if bracket > T::zero() { (2, first + bracket + bracket) } else { (1, first + bracket) };

    let total = if infinite { T::infinity() } else { leading + ladder + boundary + a1 };
    Ok(RhsBreakdown { column, lambda_star, s, leading, ladder, boundary, a1, n4, total })
}

/// The tabulated ranges of `λ1` with their reference right-hand sides, at
/// the given `M`. References are attached only when `m` is [`REFERENCE_M`].
pub fn reference_rows(m: f64) -> Vec<(AssemblyRow, Option<f64>)> {
    REFERENCE_TABLE
        .iter()
        .map(|&(lambda11, lambda12, lambda21, lambda11p, lambda_hundredths, rhs)| {
            let row = AssemblyRow { lambda11, lambda12, lambda21, lambda11p, lambda_hundredths, m };
            (row, if m == REFERENCE_M { Some(rhs) } else { None })
        })
        .collect()
}

/// `(λ11, λ12, λ21, λ11', Λ in hundredths, reference RHS)`.
pub const REFERENCE_TABLE: [(f64, f64, f64, f64, u32, f64); 23] = [
    (0.35, 0.40, 1.29, 2.10, 129, 0.8579),
    (0.40, 0.44, 1.18, 2.03, 127, 0.9821),
    (0.44, 0.46, 1.08, 1.66, 128, 0.9213),
    (0.46, 0.48, 1.08, 1.53, 128, 0.9120),
    (0.48, 0.50, 1.08, 1.47, 128, 0.9041),
    (0.50, 0.52, 1.00, 1.40, 128, 0.9304),
    (0.52, 0.54, 1.00, 1.34, 131, 0.8049),
    (0.54, 0.56, 0.92, 1.28, 131, 0.8427),
    (0.56, 0.58, 0.92, 1.23, 131, 0.8385),
    (0.58, 0.60, 0.92, 1.18, 131, 0.8349),
    (0.60, 0.62, 0.85, 1.13, 134, 0.7782),
    (0.62, 0.64, 0.85, 1.09, 134, 0.7756),
    (0.64, 0.66, 0.79, 1.04, 134, 0.8363),
    (0.66, 0.68, 0.79, 1.00, 136, 0.7652),
    (0.68, 0.70, 0.79, 0.96, 136, 0.7636),
    (0.70, 0.72, 0.745, 0.93, 136, 0.8241),
    (0.72, 0.74, 0.745, 0.91, 136, 0.8229),
    (0.74, 0.76, 0.745, 0.89, 136, 0.8219),
    (0.76, 0.78, 0.76, 0.86, 136, 0.7988),
    (0.78, 0.80, 0.78, 0.84, 136, 0.7708),
    (0.80, 0.82, 0.80, 0.83, 136, 0.7463),
    (0.82, 0.86, 0.82, 0.827, 136, 0.7243),
    (0.86, f64::INFINITY, 0.86, 0.86, 144, 0.5110),
];

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateRow {
    pub inputs: AssemblyRow,
    pub column_threshold: f64,
    pub n4: u8,
    pub computed_rhs: f64,
    pub reference_rhs: Option<f64>,
    pub pass: bool,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub rows: Vec<CertificateRow>,
    /// True iff every row passes; vacuously true for no rows.
    pub pass: bool,
}

impl Certificate {
    pub fn max_rhs(&self) -> Option<f64> {
        self.rows.iter().map(|r| r.computed_rhs).reduce(f64::max)
    }

    pub fn to_report(&self, config: Vec<(String, String)>) -> Report {
        let mut rep = Report::new(
            "ladder_certificate",
            config,
            &[
                "lambda11", "lambda12", "lambda21", "lambda11p", "Lambda", "M", "column", "n4", "rhs", "reference_rhs",
                "tolerance", "pass",
            ],
        );
        for r in &self.rows {
            let i = &r.inputs;
            rep.push_row(vec![
                Cell::Real(i.lambda11),
                if i.lambda12.is_infinite() { Cell::Inf } else { Cell::Real(i.lambda12) },
                Cell::Real(i.lambda21),
                Cell::Real(i.lambda11p),
                Cell::Real(i.lambda_cap()),
                Cell::Real(i.m),
                Cell::Real(r.column_threshold),
                Cell::Int(i64::from(r.n4)),
                Cell::Real(r.computed_rhs),
                r.reference_rhs.map_or(Cell::Empty, Cell::Real),
                Cell::Real(r.tolerance),
                Cell::Bool(r.pass),
            ]);
        }
        rep.push_summary("rows", Cell::Int(self.rows.len() as i64));
        rep.push_summary("max_rhs", self.max_rhs().map_or(Cell::Empty, Cell::Real));
        rep.push_summary("limit", Cell::Real(RHS_LIMIT));
        rep.push_summary("pass", Cell::Bool(self.pass));
        rep
    }
}

/// Evaluates every row; a row passes iff its RHS is below [`RHS_LIMIT`] and
/// within `tolerance` of its reference value when one is given.
pub fn build_table2<T: Scalar>(
    rows: &[(AssemblyRow, Option<f64>)],
    table: &DensityTable,
    p: &AssemblyParams<T>,
    tolerance: f64,
) -> Result<Certificate> {
    let out: Vec<CertificateRow> = rows
        .par_iter()
        .map(|(row, paper)| {
            let b = final_rhs(row, table, p)?;
            let rhs = b.total.to_f64().unwrap_or(f64::NAN);
            let near = paper.map_or(true, |v| (rhs - v).abs() <= tolerance);
            Ok(CertificateRow {
                inputs: *row,
                column_threshold: table.thresholds()[b.column],
                n4: b.n4,
                computed_rhs: rhs,
                reference_rhs: *paper,
                pass: rhs < RHS_LIMIT && near,
                tolerance,
            })
        })
        .collect::<Result<_>>()?;
    let pass = out.iter().all(|r| r.pass);
    Ok(Certificate { rows: out, pass })
}

/// Parameters of the exceptional-zero branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiegelCaseParams<T> {
    b: T,
    delta: T,
    k: T,
    m: T,
}

impl<T: Scalar> SiegelCaseParams<T> {
    pub fn new(b: T, delta: T, k: T, m: T, weights: &SieveWeights<T>) -> Result<Self> {
        let top = m - k - lit::<T>(2.0) * weights.x1();
        if !(b >= T::zero() && b <= top) {
            return Err(Error::InvalidParams(format!("need 0 <= B <= M - K - 2x1 = {top}, got B = {b}")));
        }
        if !(k > T::zero()) {
            return Err(Error::InvalidParams(format!("K must be positive, got {k}")));
        }
        if !(delta >= T::zero() && delta < lit(12.0 / 11.0)) {
            return Err(Error::InvalidParams(format!("delta must lie in [0, 12/11), got {delta}")));
        }
        Ok(Self { b, delta, k, m })
    }

    pub fn b(&self) -> T {
        self.b
    }
    pub fn delta(&self) -> T {
        self.delta
    }
    pub fn k(&self) -> T {
        self.k
    }
    pub fn m(&self) -> T {
        self.m
    }
}

/// Coefficient and exponent of the exceptional-zero curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiegelCurve<T> {
    pub coeff: T,
    pub exponent: T,
    pub m: T,
}

impl<T: Scalar> SiegelCurve<T> {
    /// `S(λ) = e^{-Mλ} + coeff · λ^exponent`.
    pub fn eval(&self, lambda: T) -> T {
        (-(self.m * lambda)).exp() + self.coeff * lambda.powf(self.exponent)
    }
}

/// `coeff = C2 · max(ratio at 1.42, ratio at 2.19)`, `exponent = (12/11 - δ)B`.
pub fn siegel_coefficient<T: Scalar>(
    params: &SiegelCaseParams<T>,
    cls: CharacterClass,
    weights: &SieveWeights<T>,
    c2: T,
) -> Result<SiegelCurve<T>> {
    let rate = params.m - params.b;
    let (l1, l2) = (lit::<T>(1.42), lit::<T>(2.19));
    let k = params.k;
    let r1 = (-(rate * l1)).exp() * c1(l1, k, cls, T::zero())? / (b1(l1, k)? * b2(l1, weights)?);
    let r2 = (-(rate * l2)).exp() * c1(T::zero(), k, cls, T::zero())? / (b1(l2, k)? * b2(l2, weights)?);
    Ok(SiegelCurve {
        coeff: c2 * r1.max(r2),
        exponent: (lit::<T>(12.0 / 11.0) - params.delta) * params.b,
        m: params.m,
    })
}

/// Smallest `(1 - t) - (e^{-Mt} + 4t)` over the check grid.
pub fn siegel_psi_margin<T: Scalar>(m: T, eta: T) -> Result<T> {
    if !(m >= T::one()) {
        return Err(Error::InvalidParams(format!("M must be at least 1, got {m}")));
    }
    if !(eta > T::zero() && eta < T::one()) {
        return Err(Error::InvalidParams(format!("eta must lie in (0, 1), got {eta}")));
    }
    let n = psi_grid_len(eta.to_f64().unwrap_or(1.0));
    let nn = from_usize::<T>(n);
    let four = lit::<T>(4.0);
    let mut worst = T::infinity();
    for k in 1..=n {
        let t = eta * from_usize::<T>(k) / nn;
        let margin = T::one() - t - (-(m * t)).exp() - four * t;
        worst = worst.min(margin);
    }
    Ok(worst)
}

/// Grid size for the scalar check: at least 1000 points, step at most 1e-4.
pub fn psi_grid_len(eta: f64) -> usize {
    ((eta / 1e-4).ceil() as usize).max(1000)
}

/// True iff `e^{-Mt} + 4t < 1 - t` on the grid `t = η k / n`, `k = 1..n`.
pub fn siegel_psi_check<T: Scalar>(m: T, eta: T) -> Result<bool> {
    Ok(siegel_psi_margin(m, eta)? > T::zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> AssemblyParams<f64> {
        AssemblyParams {
            k: 0.66,
            cls: CharacterClass::Third,
            delta: 0.0,
            weights: SieveWeights::default(),
            c2: 11.9288,
        }
    }

    #[test]
    fn d_vanishes_at_cap() {
        let p = params();
        assert_eq!(d(1.29, 1.29, 7.999, &p).unwrap(), 0.0);
        assert!(d(0.0, 1.29, 7.999, &p).is_err());
        assert!(d(1.0, 1.29, 3.0, &p).is_err());
    }

    #[test]
    fn d_compositional() {
        let p = params();
        let w = SieveWeights::default();
        let e = |l: f64| {
            (-7.999 * l).exp() * c1(l, 0.66, CharacterClass::Third, 0.0).unwrap()
                / (b1(l, 0.66).unwrap() * b2(l, &w).unwrap())
        };
        let want = (e(1.0) - e(1.29)) * b2(1.0, &w).unwrap();
        assert!((d(1.0, 1.29, 7.999, &p).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn psi_check_examples() {
        assert!(siegel_psi_check(7.0, 0.1).unwrap());
        assert!(!siegel_psi_check(5.0, 0.1).unwrap());
        assert!(siegel_psi_check(0.5, 0.1).is_err());
        assert!(siegel_psi_check(7.0, 0.0).is_err());
        assert!(siegel_psi_check(7.0, 1.0).is_err());
        let tiny = siegel_psi_margin(7.0, 1e-6).unwrap();
        assert!(tiny > 0.0 && tiny < 1e-5);
        assert_eq!(psi_grid_len(0.1), 1000);
        assert_eq!(psi_grid_len(0.5), 5000);
    }

    #[test]
    fn siegel_params_bounds() {
        let w = SieveWeights::<f64>::default();
        assert!(SiegelCaseParams::new(1.0, 0.01, 0.66, 7.5, &w).is_ok());
        assert!(SiegelCaseParams::new(-0.1, 0.01, 0.66, 7.5, &w).is_err());
        assert!(SiegelCaseParams::new(4.0, 0.01, 0.66, 7.5, &w).is_err());
    }

    #[test]
    fn siegel_exponent() {
        let w = SieveWeights::<f64>::default();
        let sp = SiegelCaseParams::new(1.0, 0.01, 0.66, 7.5, &w).unwrap();
        let c = siegel_coefficient(&sp, CharacterClass::Third, &w, 11.9288).unwrap();
        assert!((c.exponent - (12.0 / 11.0 - 0.01)).abs() < 1e-15);
        assert!((c.coeff - 2.38).abs() < 0.05);
    }

    #[test]
    fn reference_rows_carry_values_only_at_reference_m() {
        assert!(reference_rows(REFERENCE_M).iter().all(|(_, v)| v.is_some()));
        assert!(reference_rows(DEFAULT_M).iter().all(|(_, v)| v.is_none()));
        assert_eq!(reference_rows(DEFAULT_M).len(), 23);
    }

    #[test]
    fn row_validation() {
        let p = params();
        let (row, _) = reference_rows(DEFAULT_M)[0];
        assert!(row.validate(&p).is_ok());
        assert!(AssemblyRow { lambda12: 0.3, ..row }.validate(&p).is_err());
        assert!(AssemblyRow { lambda21: 0.3, ..row }.validate(&p).is_err());
        assert!(AssemblyRow { lambda11p: 0.3, ..row }.validate(&p).is_err());
        assert!(row.with_m(3.0).validate(&p).is_err());
    }
}
