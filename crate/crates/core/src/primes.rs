//! Desk-scale prime counting in arithmetic progressions.
//!
//! An odd-only segmented sieve feeds exact counts of `π(x; q, a)`, the
//! Chebyshev sums `θ` and `ψ`, and the inequality checks of [`bt_report`].

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::integrate;
use crate::report::{Cell, Report};
use crate::scalar::{lit, Scalar};

/// Largest sieve limit accepted.
pub const SIEVE_CAP: u64 = 1_000_000_000;

/// Odd numbers per sieve segment.
pub const SEGMENT_ODDS: u64 = 1 << 20;

fn small_primes(limit: u64) -> Vec<u64> {
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Primes in the odd-index window `[lo, hi)`, where index `i` stands for `2i + 1`.
fn sieve_segment(lo: u64, hi: u64, base: &[u64]) -> Vec<u64> {
    let len = (hi - lo) as usize;
    let mut bits = vec![0u64; len.div_ceil(64)];
    for &p in base.iter().skip(1) {
        let p2 = p * p;
        let first_odd = 2 * lo + 1;
        if p2 > 2 * hi - 1 {
            break;
        }
        let mut start = if p2 >= first_odd {
            p2
        } else {
            let m = first_odd.div_ceil(p) * p;
            if m % 2 == 0 {
                m + p
            } else {
                m
            }
        };
        while start <= 2 * hi - 1 {
            let idx = ((start - 1) / 2 - lo) as usize;
            bits[idx / 64] |= 1 << (idx % 64);
            start += 2 * p;
        }
    }
    let mut out = Vec::new();
    for idx in 0..len {
        if bits[idx / 64] & (1 << (idx % 64)) == 0 {
            let n = 2 * (lo + idx as u64) + 1;
            if n > 1 {
                out.push(n);
            }
        }
    }
    out
}

/// All primes `<= limit` in ascending order.
pub fn sieve_primes(limit: u64) -> Result<Vec<u64>> {
    if limit > SIEVE_CAP {
        return Err(Error::Resource(format!("sieve limit {limit} exceeds cap {SIEVE_CAP}")));
    }
    if limit < 2 {
        return Ok(Vec::new());
    }
    let root = (limit as f64).sqrt() as u64 + 1;
    let base = small_primes(root);
    // odd indices 0..=(limit-1)/2
    let end = (limit - 1) / 2 + 1;
    let starts: Vec<u64> = (0..end).step_by(SEGMENT_ODDS as usize).collect();
    let parts: Vec<Vec<u64>> =
        starts.par_iter().map(|&lo| sieve_segment(lo, (lo + SEGMENT_ODDS).min(end), &base)).collect();
    let mut out = Vec::with_capacity(parts.iter().map(Vec::len).sum::<usize>() + 1);
    out.push(2);
    for part in parts {
        out.extend(part);
    }
    Ok(out)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Euler's totient.
pub fn euler_phi(mut n: u64) -> u64 {
    let mut out = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            out -= out / p;
        }
        p += 1;
    }
    if n > 1 {
        out -= out / n;
    }
    out
}

fn check_class(q: u64, a: u64) -> Result<u64> {
    if q < 3 {
        return Err(Error::Domain(format!("modulus must be at least 3, got {q}")));
    }
    if gcd(a % q, q) != 1 {
        return Err(Error::Domain(format!("residue {a} is not coprime to {q}")));
    }
    Ok(a % q)
}

/// Sieved primes up to a limit, reusable across residue classes.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    pub fn new(limit: u64) -> Result<Self> {
        Ok(Self { limit, primes: sieve_primes(limit)? })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    fn upto(&self, x: u64) -> Result<&[u64]> {
        if x > self.limit {
            return Err(Error::Domain(format!("x = {x} exceeds sieved limit {}", self.limit)));
        }
        Ok(&self.primes[..self.primes.partition_point(|&p| p <= x)])
    }

    /// `π(x)`.
    pub fn pi(&self, x: u64) -> Result<u64> {
        Ok(self.upto(x)?.len() as u64)
    }

    pub fn pi_ap(&self, x: u64, q: u64, a: u64) -> Result<u64> {
        let a = check_class(q, a)?;
        Ok(self.upto(x)?.iter().filter(|&&p| p % q == a).count() as u64)
    }

    pub fn theta_ap(&self, x: u64, q: u64, a: u64) -> Result<f64> {
        let a = check_class(q, a)?;
        Ok(self.upto(x)?.iter().filter(|&&p| p % q == a).map(|&p| (p as f64).ln()).sum())
    }

    pub fn psi_ap(&self, x: u64, q: u64, a: u64) -> Result<f64> {
        let a = check_class(q, a)?;
        let mut total = 0.0;
        for &p in self.upto(x)? {
            let lp = (p as f64).ln();
            let mut pe = p;
            loop {
                if pe % q == a {
                    total += lp;
                }
                match pe.checked_mul(p) {
                    Some(n) if n <= x => pe = n,
                    _ => break,
                }
            }
        }
        Ok(total)
    }
}

fn table_for(x: u64) -> Result<PrimeTable> {
    PrimeTable::new(x.max(2))
}

/// Number of primes `<= x` congruent to `a` mod `q`.
pub fn pi_ap(x: u64, q: u64, a: u64) -> Result<u64> {
    check_class(q, a)?;
    if x < 2 {
        return Ok(0);
    }
    table_for(x)?.pi_ap(x, q, a)
}

/// `θ(x; q, a) = Σ log p` over primes `p <= x`, `p ≡ a`.
pub fn theta_ap(x: u64, q: u64, a: u64) -> Result<f64> {
    check_class(q, a)?;
    if x < 2 {
        return Ok(0.0);
    }
    table_for(x)?.theta_ap(x, q, a)
}

/// `ψ(x; q, a) = Σ log p` over prime powers `p^e <= x`, `p^e ≡ a`.
pub fn psi_ap(x: u64, q: u64, a: u64) -> Result<f64> {
    check_class(q, a)?;
    if x < 2 {
        return Ok(0.0);
    }
    table_for(x)?.psi_ap(x, q, a)
}

/// `Li(x) = ∫_2^x dt / log t`.
pub fn li<T: Scalar>(x: T) -> Result<T> {
    let two = lit::<T>(2.0);
    if !(x >= two) || !x.is_finite() {
        return Err(Error::Domain(format!("Li needs x >= 2, got {x}")));
    }
    integrate(|t: T| T::one() / t.ln(), two, x, lit::<T>(1e-9) * x)
}

/// Improved bound constant `C(θ)` for `θ = log q / log x`.
pub fn improved_constant(theta: f64) -> f64 {
    if theta >= 2.0 / 3.0 {
        (2.0 - ((1.0 - theta) / 4.0).powi(6)) / (1.0 - theta)
    } else if theta >= 9.0 / 20.0 {
        8.0 / (6.0 - 7.0 * theta)
    } else {
        16.0 / (8.0 - 3.0 * theta)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidueCounts {
    pub a: u64,
    pub pi: u64,
    pub theta: f64,
    pub psi: f64,
    /// `π < 2 Li(x)/φ(q)`.
    pub li_ok: bool,
    /// `π <= 2/(1 - θ) · x/(φ(q) log x)`.
    pub sieve_ok: bool,
    /// `π <= C(θ) · x/(φ(q) log x)`.
    pub improved_ok: bool,
    /// `|ψ - x/φ(q)| / (x/φ(q))`.
    pub psi_deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimeCountReport {
    pub x: u64,
    pub q: u64,
    pub phi_q: u64,
    pub li_x: f64,
    /// `log q / log x`.
    pub theta_exponent: f64,
    pub pi_x: u64,
    /// Primes dividing `q` that are `<= x`.
    pub prime_divisors: u64,
    pub li_limit: f64,
    pub sieve_limit: f64,
    pub improved_limit: f64,
    pub residues: Vec<ResidueCounts>,
    /// `x >= q^8`.
    pub in_range: bool,
}

impl PrimeCountReport {
    pub fn partition_identity(&self) -> bool {
        self.residues.iter().map(|r| r.pi).sum::<u64>() + self.prime_divisors == self.pi_x
    }

    pub fn all_li(&self) -> bool {
        self.residues.iter().all(|r| r.li_ok)
    }

    pub fn all_sieve(&self) -> bool {
        self.residues.iter().all(|r| r.sieve_ok)
    }

    pub fn all_improved(&self) -> bool {
        self.residues.iter().all(|r| r.improved_ok)
    }

    /// Named verdicts in fixed order.
    pub fn verdicts(&self) -> Vec<(&'static str, bool)> {
        vec![
            ("li_ok", self.all_li()),
            ("sieve_ok", self.all_sieve()),
            ("improved_ok", self.all_improved()),
            ("partition", self.partition_identity()),
        ]
    }

    pub fn to_report(&self, config: Vec<(String, String)>) -> Report {
        let mut r = Report::new(
            "prime_counts",
            config,
            &["q", "x", "a", "pi", "theta", "psi", "li_ok", "sieve_ok", "improved_ok", "psi_deviation"],
        );
        for c in &self.residues {
            r.push_row(vec![
                Cell::Int(self.q as i64),
                Cell::Int(self.x as i64),
                Cell::Int(c.a as i64),
                Cell::Int(c.pi as i64),
                Cell::Real(c.theta),
                Cell::Real(c.psi),
                Cell::Bool(c.li_ok),
                Cell::Bool(c.sieve_ok),
                Cell::Bool(c.improved_ok),
                Cell::Real(c.psi_deviation),
            ]);
        }
        r.push_summary("label", Cell::text("empirical illustration"));
        r.push_summary("li_convention", Cell::text("integral from 2 to x of dt/log t"));
        r.push_summary("phi_q", Cell::Int(self.phi_q as i64));
        r.push_summary("li_x", Cell::Real(self.li_x));
        r.push_summary("theta_exponent", Cell::Real(self.theta_exponent));
        r.push_summary("pi_x", Cell::Int(self.pi_x as i64));
        r.push_summary("x_at_least_q8", Cell::Bool(self.in_range));
        for (k, v) in self.verdicts() {
            r.push_summary(k, Cell::Bool(v));
        }
        r
    }
}

/// Counts and inequality verdicts for every residue class mod `q` up to `x`.
pub fn bt_report(q: u64, x: u64) -> Result<PrimeCountReport> {
    if q < 3 {
        return Err(Error::Domain(format!("modulus must be at least 3, got {q}")));
    }
    if x <= q {
        return Err(Error::Domain(format!("need x > q, got x = {x}, q = {q}")));
    }
    let table = PrimeTable::new(x)?;
    let phi_q = euler_phi(q);
    let li_x = li(x as f64)?;
    let lx = (x as f64).ln();
    let theta_exponent = (q as f64).ln() / lx;
    let base = x as f64 / (phi_q as f64 * lx);
    let li_limit = 2.0 * li_x / phi_q as f64;
    let sieve_limit = 2.0 / (1.0 - theta_exponent) * base;
    let improved_limit = improved_constant(theta_exponent) * base;
    let mean = x as f64 / phi_q as f64;

    let residues = (1..q)
        .filter(|&a| gcd(a, q) == 1)
        .map(|a| {
            let pi = table.pi_ap(x, q, a)?;
            let psi = table.psi_ap(x, q, a)?;
            Ok(ResidueCounts {
                a,
                pi,
                theta: table.theta_ap(x, q, a)?,
                psi,
                li_ok: (pi as f64) < li_limit,
                sieve_ok: pi as f64 <= sieve_limit,
                improved_ok: pi as f64 <= improved_limit,
                psi_deviation: (psi - mean).abs() / mean,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let prime_divisors = table.upto(x)?.iter().filter(|&&p| q % p == 0).count() as u64;
    let in_range = (q as f64).powi(8) <= x as f64;
    Ok(PrimeCountReport {
        x,
        q,
        phi_q,
        li_x,
        theta_exponent,
        pi_x: table.pi(x)?,
        prime_divisors,
        li_limit,
        sieve_limit,
        improved_limit,
        residues,
        in_range,
    })
}
