//! Deterministic bounded maximization and adaptive quadrature.
//!
//! Every supremum in the certificate pipeline goes through [`max1d`] or
//! [`max2d`]: a dense uniform grid followed by local golden-section
//! refinement around the best cells. No randomness, no derivatives, so the
//! same inputs always produce bit-identical outputs and every probed point
//! is bounded by the returned value.

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, Scalar};

/// Default absolute tolerance for all bound computations.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Grid points used by [`max1d`] (endpoints included).
pub const GRID_1D: usize = 10_001;

/// Grid points per axis used by [`max2d`] (endpoints included).
pub const GRID_2D: usize = 301;

/// Number of best grid cells refined after the grid pass.
const REFINE_CELLS: usize = 3;

/// A one- or two-dimensional axis-aligned search box.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain<T> {
    lo: Vec<T>,
    hi: Vec<T>,
}

impl<T: Scalar> BoxDomain<T> {
    pub fn new(lo: Vec<T>, hi: Vec<T>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() || lo.len() > 2 {
            return Err(Error::InvalidParams(format!(
                "box must have 1 or 2 dimensions with matching bounds (got {} and {})",
                lo.len(),
                hi.len()
            )));
        }
        for (l, h) in lo.iter().zip(&hi) {
            if !(l.is_finite() && h.is_finite() && l < h) {
                return Err(Error::InvalidParams(format!("empty or non-finite side [{l}, {h}]")));
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn interval(lo: T, hi: T) -> Result<Self> {
        Self::new(vec![lo], vec![hi])
    }

    pub fn rect(x: (T, T), y: (T, T)) -> Result<Self> {
        Self::new(vec![x.0, y.0], vec![x.1, y.1])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[T] {
        &self.lo
    }

    pub fn hi(&self) -> &[T] {
        &self.hi
    }

    pub fn contains(&self, p: &[T]) -> bool {
        p.len() == self.dim()
            && p.iter().zip(self.lo.iter().zip(&self.hi)).all(|(x, (l, h))| l <= x && x <= h)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaximizeResult<T> {
    /// Largest objective value observed; an upper estimate of the supremum.
    pub value: T,
    pub argmax: Vec<T>,
    pub grid_points_evaluated: usize,
    /// Grid points plus refinement evaluations.
    pub evaluations: usize,
}

/// Grid sizes used by the maximizers. The defaults satisfy the minimum
/// densities the certificates rely on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximizer {
    pub grid_1d: usize,
    pub grid_2d: usize,
}

impl Default for Maximizer {
    fn default() -> Self {
        Self { grid_1d: GRID_1D, grid_2d: GRID_2D }
    }
}

fn checked<T: Scalar>(v: T, at: &[T]) -> Result<T> {
    if v.is_finite() {
        Ok(v)
    } else {
        let pt: Vec<String> = at.iter().map(|x| x.to_string()).collect();
        Err(Error::Domain(format!("objective not finite at ({})", pt.join(", "))))
    }
}

fn grid_point<T: Scalar>(lo: T, hi: T, i: usize, n: usize) -> T {
    if i + 1 == n {
        hi
    } else {
        lo + (hi - lo) * from_usize::<T>(i) / from_usize::<T>(n - 1)
    }
}

/// Indices of the `k` largest values, ties broken by lower index.
fn top_indices<T: Scalar>(values: &[T], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap().then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

struct Best<T> {
    value: T,
    at: Vec<T>,
    evals: usize,
}

impl<T: Scalar> Best<T> {
    fn offer(&mut self, v: T, at: &[T]) {
        self.evals += 1;
        if v > self.value {
            self.value = v;
            self.at = at.to_vec();
        }
    }
}

/// Golden-section search for a maximum of `f` on `[a, b]`.
fn golden<T: Scalar, F>(f: &F, mut a: T, mut b: T) -> Result<(T, T)>
where
    F: Fn(T) -> Result<T>,
{
    let invphi = lit::<T>(0.618_033_988_749_894_9);
    let scale = T::one() + a.abs() + b.abs();
    let xtol = lit::<T>(1e-13) * scale;
    let mut c = b - invphi * (b - a);
    let mut d = a + invphi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..200 {
        if (b - a).abs() <= xtol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d)?;
        }
    }
    let (x, v) = if fc >= fd { (c, fc) } else { (d, fd) };
    Ok((x, v))
}

impl Maximizer {
    /// Maximizes `f` over `[lo, hi]`.
    pub fn max1d<T: Scalar, F>(&self, f: F, lo: T, hi: T, tol: T) -> Result<MaximizeResult<T>>
    where
        F: Fn(T) -> T,
    {
        if !(tol > T::zero()) {
            return Err(Error::InvalidParams("tolerance must be positive".into()));
        }
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::InvalidParams(format!("invalid interval [{lo}, {hi}]")));
        }
        if lo == hi {
            let v = checked(f(lo), &[lo])?;
            return Ok(MaximizeResult { value: v, argmax: vec![lo], grid_points_evaluated: 1, evaluations: 1 });
        }
        let n = self.grid_1d.max(3);
        let xs: Vec<T> = (0..n).map(|i| grid_point(lo, hi, i, n)).collect();
        let mut vals = Vec::with_capacity(n);
        for &x in &xs {
            vals.push(checked(f(x), &[x])?);
        }
        let top = top_indices(&vals, REFINE_CELLS);
        let mut best = Best { value: vals[top[0]], at: vec![xs[top[0]]], evals: n };

        let cell = std::cell::RefCell::new(&mut best);
        let probe = |x: T| -> Result<T> {
            let v = checked(f(x), &[x])?;
            cell.borrow_mut().offer(v, &[x]);
            Ok(v)
        };
        for &i in &top {
            let a = xs[i.saturating_sub(1)];
            let b = xs[(i + 1).min(n - 1)];
            golden(&probe, a, b)?;
        }
        drop(cell);
        Ok(MaximizeResult {
            value: best.value,
            argmax: best.at,
            grid_points_evaluated: n,
            evaluations: best.evals,
        })
    }

    /// Maximizes `f` over a two-dimensional box.
    pub fn max2d<T: Scalar, F>(&self, f: F, domain: &BoxDomain<T>, tol: T) -> Result<MaximizeResult<T>>
    where
        F: Fn(T, T) -> T,
    {
        if domain.dim() != 2 {
            return Err(Error::InvalidParams(format!("max2d needs a 2-d box, got {}-d", domain.dim())));
        }
        if !(tol > T::zero()) {
            return Err(Error::InvalidParams("tolerance must be positive".into()));
        }
        let n = self.grid_2d.max(3);
        let (xl, yl) = (domain.lo()[0], domain.lo()[1]);
        let (xh, yh) = (domain.hi()[0], domain.hi()[1]);
        let xs: Vec<T> = (0..n).map(|i| grid_point(xl, xh, i, n)).collect();
        let ys: Vec<T> = (0..n).map(|j| grid_point(yl, yh, j, n)).collect();
        let mut vals = Vec::with_capacity(n * n);
        for &x in &xs {
            for &y in &ys {
                vals.push(checked(f(x, y), &[x, y])?);
            }
        }
        let top = top_indices(&vals, REFINE_CELLS);
        let mut best = Best {
            value: vals[top[0]],
            at: vec![xs[top[0] / n], ys[top[0] % n]],
            evals: n * n,
        };

        for &k in &top {
            let (i, j) = (k / n, k % n);
            let (ax, bx) = (xs[i.saturating_sub(1)], xs[(i + 1).min(n - 1)]);
            let (ay, by) = (ys[j.saturating_sub(1)], ys[(j + 1).min(n - 1)]);
            let (mut x, mut y) = (xs[i], ys[j]);
            let mut fxy = vals[k];
            for _ in 0..40 {
                let prev = fxy;
                let cell = std::cell::RefCell::new(&mut best);
                let yy = y;
                let along_x = |t: T| -> Result<T> {
                    let v = checked(f(t, yy), &[t, yy])?;
                    cell.borrow_mut().offer(v, &[t, yy]);
                    Ok(v)
                };
                let (nx, vx) = golden(&along_x, ax, bx)?;
                if vx > fxy {
                    x = nx;
                    fxy = vx;
                }
                let xx = x;
                let along_y = |t: T| -> Result<T> {
                    let v = checked(f(xx, t), &[xx, t])?;
                    cell.borrow_mut().offer(v, &[xx, t]);
                    Ok(v)
                };
                let (ny, vy) = golden(&along_y, ay, by)?;
                if vy > fxy {
                    y = ny;
                    fxy = vy;
                }
                if fxy - prev <= tol * lit(1e-3) {
                    break;
                }
            }
        }
        Ok(MaximizeResult {
            value: best.value,
            argmax: best.at,
            grid_points_evaluated: n * n,
            evaluations: best.evals,
        })
    }
}

/// [`Maximizer::max1d`] with the default grid.
pub fn max1d<T: Scalar, F: Fn(T) -> T>(f: F, lo: T, hi: T, tol: T) -> Result<MaximizeResult<T>> {
    Maximizer::default().max1d(f, lo, hi, tol)
}

/// [`Maximizer::max2d`] with the default grid.
pub fn max2d<T: Scalar, F: Fn(T, T) -> T>(f: F, domain: &BoxDomain<T>, tol: T) -> Result<MaximizeResult<T>> {
    Maximizer::default().max2d(f, domain, tol)
}

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: u32 = 48;

fn gk15<T: Scalar, F: Fn(T) -> T>(f: &F, a: T, b: T) -> Result<(T, T)> {
    let half = (b - a) * lit(0.5);
    let mid = (a + b) * lit(0.5);
    let eval = |x: T| checked(f(x), &[x]);
    let fc = eval(mid)?;
    let mut kronrod = fc * lit(WGK[7]);
    let mut gauss = fc * lit(WG[3]);
    for k in 0..7 {
        let dx = half * lit(XGK[k]);
        let s = eval(mid - dx)? + eval(mid + dx)?;
        kronrod = kronrod + s * lit(WGK[k]);
        if k % 2 == 1 {
            gauss = gauss + s * lit(WG[k / 2]);
        }
    }
    Ok((kronrod * half, (kronrod - gauss).abs() * half))
}

fn adapt<T: Scalar, F: Fn(T) -> T>(f: &F, a: T, b: T, tol: T, depth: u32) -> Result<T> {
    let (est, err) = gk15(f, a, b)?;
    if err <= tol || depth >= MAX_DEPTH || (b - a).abs() <= T::epsilon() * (a.abs() + b.abs()) {
        return Ok(est);
    }
    let m = (a + b) * lit(0.5);
    let half_tol = tol * lit(0.5);
    Ok(adapt(f, a, m, half_tol, depth + 1)? + adapt(f, m, b, half_tol, depth + 1)?)
}

/// Adaptive Gauss-Kronrod quadrature of `f` over `[a, b]` with absolute
/// error target `tol`.
pub fn integrate<T: Scalar, F: Fn(T) -> T>(f: F, a: T, b: T, tol: T) -> Result<T> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidParams("tolerance must be positive".into()));
    }
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::InvalidParams(format!("invalid integration range [{a}, {b}]")));
    }
    if a == b {
        return Ok(T::zero());
    }
    adapt(&f, a, b, tol, 0)
}
