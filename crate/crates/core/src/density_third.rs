//! Near-1 zero count bound `N*(λ)`: the `G3` constant, the two validity
//! conditions, the per-cell `γ` search and the resulting density table.

use std::fmt;

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{laplace_g, laplace_g_re, majorant_g4, QuinticKernelParams};
use crate::numerics::{Maximizer, DEFAULT_TOL};
use crate::report::{Cell, Report};
use crate::scalar::{from_usize, lit, Scalar};

/// An integer bound or the sentinel for "no bound".
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bound {
    Finite(u64),
    Infinite,
}

impl Bound {
    pub fn is_finite(self) -> bool {
        matches!(self, Bound::Finite(_))
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Bound::Finite(n) => Some(n),
            Bound::Infinite => None,
        }
    }

    /// The bound as a float, `+∞` for [`Bound::Infinite`].
    pub fn as_f64(self) -> f64 {
        match self {
            Bound::Finite(n) => n as f64,
            Bound::Infinite => f64::INFINITY,
        }
    }

    pub fn to_cell(self) -> Cell {
        match self {
            Bound::Finite(n) => Cell::Int(n as i64),
            Bound::Infinite => Cell::Inf,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Finite(n) => write!(f, "{n}"),
            Bound::Infinite => f.write_str("inf"),
        }
    }
}

/// Search settings for the `G3` suprema.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct G3Options<T> {
    pub tol: T,
    pub maximizer: Maximizer,
}

impl<T: Scalar> Default for G3Options<T> {
    fn default() -> Self {
        Self { tol: lit(DEFAULT_TOL), maximizer: Maximizer::default() }
    }
}

/// Offsets `1..=5` are searched directly; from 6 on the majorant is used.
pub const G3_SEARCHED_TERMS: usize = 5;

const G3_TAIL_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct G3Breakdown<T> {
    /// `G(-λ11) - g(0)/6`.
    pub diagonal: T,
    /// Clamped contributions for offsets `1..=5`.
    pub offsets: Vec<T>,
    /// Sum of the majorant contributions from offset 6 on.
    pub tail: T,
    /// First offset whose majorant contribution is non-positive.
    pub tail_stop: usize,
    pub total: T,
}

/// `|Re G(-λ11 + it)|`.
pub fn g3_offset_objective<T: Scalar>(t: T, lambda11: T, p: &QuinticKernelParams<T>) -> T {
    laplace_g(Complex::new(-lambda11, t), p).re.abs()
}

pub fn g3_breakdown<T: Scalar>(
    lambda11: T,
    p: &QuinticKernelParams<T>,
    opts: &G3Options<T>,
) -> Result<G3Breakdown<T>> {
    if !(lambda11 > T::zero()) {
        return Err(Error::Domain(format!("G3 needs lambda11 > 0, got {lambda11}")));
    }
    let sixth = p.g0() / lit(6.0);
    let two = lit::<T>(2.0);
    let diagonal = laplace_g_re(-lambda11, p) - sixth;
    let mut offsets = Vec::with_capacity(G3_SEARCHED_TERMS);
    for c in 1..=G3_SEARCHED_TERMS {
        let lo = from_usize::<T>(c - 1);
        let r = opts.maximizer.max1d(|t| g3_offset_objective(t, lambda11, p), lo, lo + two, opts.tol)?;
        offsets.push(two * (r.value + opts.tol - sixth).max(T::zero()));
    }
    let mut tail = T::zero();
    let mut c = G3_SEARCHED_TERMS + 1;
    loop {
        let excess = majorant_g4(-lambda11, from_usize::<T>(c - 1), p)? - sixth;
        if excess <= T::zero() {
            break;
        }
        tail = tail + two * excess;
        c += 1;
        if c > G3_TAIL_CAP {
            return Err(Error::Domain(format!("G3 majorant tail did not terminate by offset {G3_TAIL_CAP}")));
        }
    }
    let total = offsets.iter().fold(diagonal + tail, |a, &b| a + b);
    Ok(G3Breakdown { diagonal, offsets, tail, tail_stop: c, total })
}

/// `G3` bound at default search settings.
pub fn g3_bound<T: Scalar>(lambda11: T, p: &QuinticKernelParams<T>) -> Result<T> {
    Ok(g3_breakdown(lambda11, p, &G3Options::default())?.total)
}

/// `N*(λ)` given a precomputed `G3`; [`Bound::Infinite`] when either
/// validity condition fails.
pub fn nstar_from_g3<T: Scalar>(lambda: T, lambda11: T, p: &QuinticKernelParams<T>, g3: T) -> Result<Bound> {
    if !(lambda >= T::zero() && lambda <= lit(2.0)) {
        return Err(Error::Domain(format!("N* needs lambda in [0, 2], got {lambda}")));
    }
    let sixth = p.g0() / lit(6.0);
    let near = laplace_g_re(lambda - lambda11, p);
    let far = laplace_g_re(-lambda11, p);
    if !(near > sixth) {
        return Ok(Bound::Infinite);
    }
    let den = (near - sixth) * (near - sixth) - far * sixth;
    if !(den > T::zero()) {
        return Ok(Bound::Infinite);
    }
    let q = (far * g3 / den + lit(1e-9)).floor();
    match q.to_u64() {
        Some(n) if q.is_finite() => Ok(Bound::Finite(n)),
        _ => Ok(Bound::Infinite),
    }
}

/// `N*(λ)` for a single `γ`.
pub fn nstar_bound<T: Scalar>(lambda: T, lambda11: T, p: &QuinticKernelParams<T>) -> Result<Bound> {
    let g3 = g3_bound(lambda11, p)?;
    nstar_from_g3(lambda, lambda11, p, g3)
}

/// Column heads `λ1 >= threshold` of the density table.
pub fn default_thresholds() -> Vec<f64> {
    vec![0.35, 0.40, 0.44, 0.52, 0.60, 0.66, 6.0 / 7.0]
}

/// Layout of the density table. `λ` and `γ` are kept in hundredths so the
/// grids are exact.
#[derive(Debug, Clone, PartialEq)]
pub struct Table1Spec {
    pub thresholds: Vec<f64>,
    pub lambda_hundredths: std::ops::RangeInclusive<u32>,
    pub gamma_hundredths: std::ops::RangeInclusive<u32>,
    pub tol: f64,
    pub maximizer: Maximizer,
}

impl Default for Table1Spec {
    fn default() -> Self {
        Self {
            thresholds: default_thresholds(),
            lambda_hundredths: 74..=145,
            gamma_hundredths: 100..=160,
            tol: DEFAULT_TOL,
            maximizer: Maximizer::default(),
        }
    }
}

impl Table1Spec {
    pub fn validate(&self) -> Result<()> {
        if self.thresholds.is_empty() || self.thresholds.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParams("thresholds must be non-empty and strictly increasing".into()));
        }
        if self.thresholds.iter().any(|&t| !(t > 0.0)) {
            return Err(Error::InvalidParams("thresholds must be positive".into()));
        }
        if self.lambda_hundredths.is_empty() || *self.lambda_hundredths.end() > 200 {
            return Err(Error::InvalidParams("lambda grid must be non-empty and within [0, 2]".into()));
        }
        let g = &self.gamma_hundredths;
        if g.is_empty() || *g.start() < 100 || *g.end() > 160 {
            return Err(Error::InvalidParams("gamma grid must be non-empty and within [1.00, 1.60]".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParams("tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// First row (in hundredths) of a column: the table starts one step above
/// its threshold.
pub fn column_start_hundredths(threshold: f64) -> u32 {
    let h = (threshold * 100.0 * 1e6).round() / 1e6;
    (h + 1.0).ceil() as u32
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableCell {
    pub bound: Bound,
    /// `γ` attaining the bound; absent when every `γ` fails the conditions.
    pub gamma: Option<f64>,
}

/// The density table: `N*` bounds per (threshold, `λ`) with the chosen `γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityTable {
    thresholds: Vec<f64>,
    lambdas: Vec<u32>,
    /// Column-major; `None` marks a cell below its column start.
    cells: Vec<Vec<Option<TableCell>>>,
}

impl DensityTable {
    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// Row labels in hundredths.
    pub fn lambda_hundredths(&self) -> &[u32] {
        &self.lambdas
    }

    pub fn get(&self, column: usize, lambda_hundredths: u32) -> Option<&TableCell> {
        let row = self.lambdas.iter().position(|&l| l == lambda_hundredths)?;
        self.cells.get(column)?.get(row)?.as_ref()
    }

    /// Index of the largest threshold `<= lambda11`.
    pub fn column_for(&self, lambda11: f64) -> Option<usize> {
        self.thresholds.iter().rposition(|&t| t <= lambda11 + 1e-12)
    }

    /// Bound in `column` at `λ = lambda_hundredths/100`, or a coverage error.
    pub fn nstar(&self, column: usize, lambda_hundredths: u32) -> Result<Bound> {
        self.get(column, lambda_hundredths).map(|c| c.bound).ok_or_else(|| Error::Coverage {
            threshold: self.thresholds.get(column).copied().unwrap_or(f64::NAN),
            lambda: f64::from(lambda_hundredths) / 100.0,
        })
    }

    pub fn column(&self, column: usize) -> impl Iterator<Item = (u32, &TableCell)> {
        self.lambdas
            .iter()
            .zip(&self.cells[column])
            .filter_map(|(&l, c)| c.as_ref().map(|c| (l, c)))
    }

    /// Structural checks: bounds non-decreasing down each column (so `inf`
    /// only at the bottom) and non-increasing across columns at fixed `λ`.
    /// Returns one message per violation.
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (ci, col) in self.cells.iter().enumerate() {
            let present: Vec<(u32, Bound)> =
                self.lambdas.iter().zip(col).filter_map(|(&l, c)| c.map(|c| (l, c.bound))).collect();
            for w in present.windows(2) {
                if w[1].1 < w[0].1 {
                    out.push(format!("column {ci}: bound drops from {} to {} at lambda {}", w[0].1, w[1].1, w[1].0));
                }
            }
        }
        for (ri, &l) in self.lambdas.iter().enumerate() {
            let row: Vec<Bound> = self.cells.iter().filter_map(|c| c[ri].map(|c| c.bound)).collect();
            for w in row.windows(2) {
                if w[1] > w[0] {
                    out.push(format!("lambda {l}: bound rises across columns from {} to {}", w[0], w[1]));
                }
            }
        }
        out
    }

    /// One row per present cell: threshold, lambda, bound, gamma.
    pub fn to_report(&self, config: Vec<(String, String)>) -> Report {
        let mut r = Report::new("density_table", config, &["threshold", "lambda", "bound", "gamma"]);
        for (ci, &t) in self.thresholds.iter().enumerate() {
            for (l, cell) in self.column(ci) {
                r.push_row(vec![
                    Cell::Real(t),
                    Cell::Real(f64::from(l) / 100.0),
                    cell.bound.to_cell(),
                    cell.gamma.map_or(Cell::Empty, Cell::Real),
                ]);
            }
        }
        r
    }
}

/// Builds the density table with the default layout in `f64`.
pub fn build_table1() -> Result<DensityTable> {
    build_table1_with::<f64>(&Table1Spec::default())
}

/// Builds the density table, running `G3` searches and cells concurrently.
/// Per cell the smallest `N*` over the `γ` grid wins, ties to smaller `γ`.
pub fn build_table1_with<T: Scalar>(spec: &Table1Spec) -> Result<DensityTable> {
    spec.validate()?;
    let gammas: Vec<u32> = spec.gamma_hundredths.clone().collect();
    let lambdas: Vec<u32> = spec.lambda_hundredths.clone().collect();
    let opts = G3Options { tol: lit::<T>(spec.tol), maximizer: spec.maximizer };
    let hundred = lit::<T>(100.0);

    let jobs: Vec<(usize, u32)> =
        (0..spec.thresholds.len()).flat_map(|c| gammas.iter().map(move |&g| (c, g))).collect();
    let g3s: Vec<T> = jobs
        .par_iter()
        .map(|&(c, g)| {
            let p = QuinticKernelParams::for_table(from_usize::<T>(g as usize) / hundred)?;
            Ok(g3_breakdown(lit::<T>(spec.thresholds[c]), &p, &opts)?.total)
        })
        .collect::<Result<_>>()?;

    let cells: Vec<Vec<Option<TableCell>>> = (0..spec.thresholds.len())
        .into_par_iter()
        .map(|ci| {
            let l11 = lit::<T>(spec.thresholds[ci]);
            let start = column_start_hundredths(spec.thresholds[ci]);
            lambdas
                .iter()
                .map(|&lh| {
                    if lh < start {
                        return Ok(None);
                    }
                    let lam = from_usize::<T>(lh as usize) / hundred;
                    let mut best = TableCell { bound: Bound::Infinite, gamma: None };
                    for (gi, &g) in gammas.iter().enumerate() {
                        let p = QuinticKernelParams::for_table(from_usize::<T>(g as usize) / hundred)?;
                        let b = nstar_from_g3(lam, l11, &p, g3s[ci * gammas.len() + gi])?;
                        if b < best.bound {
                            best = TableCell { bound: b, gamma: Some(f64::from(g) / 100.0) };
                        }
                    }
                    Ok(Some(best))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    Ok(DensityTable { thresholds: spec.thresholds.clone(), lambdas, cells })
}
