//! Off-diagonal solutions of `a^2 + p^2 = q^2 + r^2` with `p, q, r` prime,
//! and the `(d, t, n1, n2)` coordinates of the strictly ordered ones.

use std::collections::{HashMap, HashSet};

use crate::arith::{gcd, isqrt};
use crate::error::{Error, Result};
use crate::sieve::{sieve_primes, PrimeTable};

/// Largest limit accepted by the enumerations.
pub const OFFDIAG_MAX_LIMIT: u64 = 10_000_000;

/// Largest limit accepted by [`change_of_variables_check`].
pub const CHANGE_OF_VARIABLES_MAX_LIMIT: u64 = 1_000_000;

/// Smallest limit accepted by [`exceptional_set_count`].
pub const EXCEPTIONAL_MIN_LIMIT: u64 = 10_000;

/// At most this many quadruples are kept by [`enumerate_offdiag`].
pub const STORED_QUADRUPLES_CAP: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Quadruple {
    pub a: u64,
    pub p: u64,
    pub q: u64,
    pub r: u64,
    pub n: u64,
}

impl Quadruple {
    /// Builds a quadruple after checking `a^2 + p^2 = q^2 + r^2`.
    /// Primality is the caller's business.
    pub fn new(a: u64, p: u64, q: u64, r: u64) -> Result<Self> {
        let n = a * a + p * p;
        if a == 0 || n != q * q + r * r {
            return Err(Error::Invalid(format!(
                "({a}, {p}, {q}, {r}) does not satisfy a^2 + p^2 = q^2 + r^2 with a >= 1"
            )));
        }
        Ok(Quadruple { a, p, q, r, n })
    }

    pub fn is_diagonal(&self) -> bool {
        (self.a == self.q && self.p == self.r) || (self.a == self.r && self.p == self.q)
    }

    pub fn class(&self) -> QuadClass {
        let Quadruple { a, p, q, r, .. } = *self;
        if a <= 2 || a == p || q == r || [p, q, r].contains(&2) {
            return QuadClass::Degenerate;
        }
        if q > r {
            return QuadClass::Mirrored;
        }
        if a < q && r < p {
            QuadClass::N1
        } else if p < q && r < a {
            QuadClass::N1DoublePrime
        } else {
            QuadClass::N1Prime
        }
    }
}

/// Where an off-diagonal quadruple lands in the census.
///
/// Non-degenerate solutions have four distinct odd coordinates; with `q < r`
/// either `{q, r}` sits strictly inside the span of `{a, p}` (`N1` when
/// `a < p`, `N1DoublePrime` when `p < a`) or `{a, p}` sits strictly inside
/// `(q, r)` (`N1Prime`). Solutions with `q > r` are the mirror images.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuadClass {
    N1,
    N1Prime,
    N1DoublePrime,
    Mirrored,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OffDiagCensus {
    pub limit: u64,
    /// All off-diagonal solutions.
    pub total: u64,
    pub n1: u64,
    pub n1_prime: u64,
    pub n1_double_prime: u64,
    pub mirrored: u64,
    pub degenerate: u64,
    /// Diagonal solutions met on the way, for cross-checks.
    pub diagonal: u64,
}

impl OffDiagCensus {
    fn record(&mut self, class: QuadClass) {
        self.total += 1;
        match class {
            QuadClass::N1 => self.n1 += 1,
            QuadClass::N1Prime => self.n1_prime += 1,
            QuadClass::N1DoublePrime => self.n1_double_prime += 1,
            QuadClass::Mirrored => self.mirrored += 1,
            QuadClass::Degenerate => self.degenerate += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OffDiagReport {
    pub census: OffDiagCensus,
    /// The first [`STORED_QUADRUPLES_CAP`] solutions in enumeration order.
    pub quadruples: Vec<Quadruple>,
    pub truncated: bool,
}

fn check_budget(what: &'static str, limit: u64, capacity: u64) -> Result<()> {
    if limit > capacity {
        return Err(Error::Capacity {
            what,
            requested: limit,
            capacity,
        });
    }
    Ok(())
}

/// Streams every off-diagonal solution with `n <= limit` to `visit`.
///
/// Order: `p` ascending, then `a` ascending, then `(q, r)` lexicographic.
pub fn enumerate_offdiag_with<F>(limit: u64, mut visit: F) -> Result<OffDiagCensus>
where
    F: FnMut(&Quadruple, QuadClass),
{
    check_budget("off-diagonal enumeration", limit, OFFDIAG_MAX_LIMIT)?;
    let mut census = OffDiagCensus {
        limit,
        ..Default::default()
    };
    if limit < 8 {
        return Ok(census);
    }
    let primes = sieve_primes(isqrt(limit))?;
    let ps = primes.primes();

    let mut pair_sums: HashMap<u64, Vec<(u64, u64)>> = HashMap::new();
    for &q in ps {
        for &r in ps {
            let n = q * q + r * r;
            if n > limit {
                break;
            }
            pair_sums.entry(n).or_default().push((q, r));
        }
    }

    for &p in ps {
        let room = limit - p * p;
        for a in 1..=isqrt(room) {
            let n = a * a + p * p;
            let Some(pairs) = pair_sums.get(&n) else {
                continue;
            };
            for &(q, r) in pairs {
                let quad = Quadruple { a, p, q, r, n };
                if quad.is_diagonal() {
                    census.diagonal += 1;
                    continue;
                }
                let class = quad.class();
                census.record(class);
                visit(&quad, class);
            }
        }
    }
    Ok(census)
}

/// Census plus up to [`STORED_QUADRUPLES_CAP`] stored solutions.
pub fn enumerate_offdiag(limit: u64) -> Result<OffDiagReport> {
    let mut quadruples = Vec::new();
    let mut truncated = false;
    let census = enumerate_offdiag_with(limit, |q, _| {
        if quadruples.len() < STORED_QUADRUPLES_CAP {
            quadruples.push(*q);
        } else {
            truncated = true;
        }
    })?;
    Ok(OffDiagReport {
        census,
        quadruples,
        truncated,
    })
}

/// Coordinates `(d, t, n1, n2)` of a strictly ordered solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParamTuple {
    pub d: u64,
    pub t: u64,
    pub n1: u64,
    pub n2: u64,
}

impl ParamTuple {
    pub fn new(d: u64, t: u64, n1: u64, n2: u64) -> Result<Self> {
        if d == 0 || t == 0 || n1 == 0 || n2 == 0 {
            return Err(Error::Invalid(format!(
                "parameters must be positive, got ({d}, {t}, {n1}, {n2})"
            )));
        }
        if gcd(d, t) != 1 || gcd(n1, n2) != 1 {
            return Err(Error::Invalid(format!(
                "need gcd(d, t) = gcd(n1, n2) = 1, got ({d}, {t}, {n1}, {n2})"
            )));
        }
        Ok(ParamTuple { d, t, n1, n2 })
    }
}

/// `(x1, x2, x3, x4) = (n2 t - n1 d, n2 d + n1 t, n1 d + n2 t, n1 t - n2 d)`,
/// so that `x1^2 + x2^2 = x3^2 + x4^2`.
pub fn param_apply(pt: &ParamTuple) -> Result<[u64; 4]> {
    let ParamTuple { d, t, n1, n2 } = *pt;
    if n2 * t <= n1 * d || n1 * t <= n2 * d {
        return Err(Error::Invalid(format!(
            "({d}, {t}, {n1}, {n2}) gives a non-positive form"
        )));
    }
    Ok([n2 * t - n1 * d, n2 * d + n1 * t, n1 * d + n2 * t, n1 * t - n2 * d])
}

/// The quadruple `(a, p, q, r) = (x4, x3, x2, x1)` built from a tuple.
pub fn param_quadruple(pt: &ParamTuple) -> Result<Quadruple> {
    let [x1, x2, x3, x4] = param_apply(pt)?;
    Quadruple::new(x4, x3, x2, x1)
}

/// Inverse of [`param_quadruple`] on solutions with `2 < a < q < r < p`.
pub fn param_invert(quad: &Quadruple) -> Result<ParamTuple> {
    let Quadruple { a, p, q, r, .. } = *quad;
    if !(2 < a && a < q && q < r && r < p) {
        return Err(Error::Invalid(format!(
            "({a}, {p}, {q}, {r}) is not ordered 2 < a < q < r < p"
        )));
    }
    if (p - r) % 2 != 0 || (q - a) % 2 != 0 {
        return Err(Error::Invalid(format!(
            "({a}, {p}, {q}, {r}) fails the parity conditions"
        )));
    }
    let m1 = (p - r) / 2;
    let m2 = (q - a) / 2;
    let d = gcd(m1, m2);
    let (n1, n2) = (m1 / d, m2 / d);
    if (q + a) % (2 * n1) != 0 {
        return Err(Error::Invalid(format!(
            "({a}, {p}, {q}, {r}) gives a non-integral t"
        )));
    }
    let t = (q + a) / (2 * n1);
    ParamTuple::new(d, t, n1, n2)
}

/// Streams every tuple whose quadruple is an `N1` solution with `n <= limit`:
/// `x1, x2, x3` prime, `x4 >= 3`, `x4 < x2 < x1 < x3`.
pub fn enumerate_param_side<F>(limit: u64, mut visit: F) -> Result<u64>
where
    F: FnMut(&ParamTuple, &Quadruple),
{
    check_budget("parameter enumeration", limit, OFFDIAG_MAX_LIMIT)?;
    let root = isqrt(limit);
    if root < 5 {
        return Ok(0);
    }
    let primes = sieve_primes(root)?;
    let mut count = 0;
    // x3 = n1 d + n2 t <= sqrt(limit)
    for n1 in 1..root {
        for d in 1..=(root - 1) / n1 {
            let left = root - n1 * d;
            for n2 in 1..=left {
                if gcd(n1, n2) != 1 {
                    continue;
                }
                for t in 1..=left / n2 {
                    if gcd(d, t) != 1 {
                        continue;
                    }
                    let pt = ParamTuple { d, t, n1, n2 };
                    if let Some(quad) = n1_candidate(&pt, limit, &primes) {
                        count += 1;
                        visit(&pt, &quad);
                    }
                }
            }
        }
    }
    Ok(count)
}

fn n1_candidate(pt: &ParamTuple, limit: u64, primes: &PrimeTable) -> Option<Quadruple> {
    let [x1, x2, x3, x4] = param_apply(pt).ok()?;
    if x4 < 3 || x2 >= x1 || x3 * x3 + x4 * x4 > limit {
        return None;
    }
    if x1 == 2 || x2 == 2 || x3 == 2 {
        return None;
    }
    if !(primes.is_prime(x1) && primes.is_prime(x2) && primes.is_prime(x3)) {
        return None;
    }
    Some(Quadruple {
        a: x4,
        p: x3,
        q: x2,
        r: x1,
        n: x3 * x3 + x4 * x4,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ChangeOfVariablesReport {
    pub checked: u64,
    pub violations: u64,
    /// Distinct `(l1, l2, p, r)` images; equals `checked` when the map is injective.
    pub distinct_images: u64,
}

/// Checks `l1 = (q-a)/2`, `l2 = (q+a)/2` on every `N1` solution up to `limit`.
pub fn change_of_variables_check(limit: u64) -> Result<ChangeOfVariablesReport> {
    check_budget("change of variables", limit, CHANGE_OF_VARIABLES_MAX_LIMIT)?;
    let mut n1 = Vec::new();
    enumerate_offdiag_with(limit, |q, class| {
        if class == QuadClass::N1 {
            n1.push(*q);
        }
    })?;
    let primes = sieve_primes(isqrt(limit).max(2))?;
    Ok(check_change_of_variables(&n1, limit, &primes))
}

/// The same checks on an explicit list. `primes` must reach every `q`.
pub fn check_change_of_variables(
    quads: &[Quadruple],
    limit: u64,
    primes: &PrimeTable,
) -> ChangeOfVariablesReport {
    let mut report = ChangeOfVariablesReport::default();
    let mut images = HashSet::new();
    for quad in quads {
        report.checked += 1;
        let Quadruple { a, p, q, r, .. } = *quad;
        let ok = q > a && (q - a) % 2 == 0 && {
            let l1 = (q - a) / 2;
            let l2 = (q + a) / 2;
            let sum = l1 + l2;
            images.insert((l1, l2, p, r));
            l1 < l2
                && sum != 2
                && sum <= primes.limit()
                && primes.is_prime(sum)
                && p > r
                && 4 * l1 * l2 == p * p - r * r
                && (l2 - l1).pow(2) + p * p <= limit
        };
        if !ok {
            report.violations += 1;
        }
    }
    report.distinct_images = images.len() as u64;
    report
}

/// Sizes of the discarded prime-pair classes over `2 < r < p <= sqrt(limit)`,
/// with `L = sqrt(limit) / log^10 limit`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExceptionalSet {
    pub limit: u64,
    pub threshold: f64,
    /// `r <= L`
    pub p1: u64,
    /// `p - r < L`
    pub p2: u64,
    /// `p > sqrt(limit) - L`
    pub p3: u64,
    /// Pairs in at least one class.
    pub union: u64,
    /// `p1 + p2 + p3`
    pub total_upper: u64,
}

pub fn exceptional_set_count(limit: u64) -> Result<ExceptionalSet> {
    if limit < EXCEPTIONAL_MIN_LIMIT {
        return Err(Error::OutOfRange {
            what: "exceptional-set limit",
            value: limit,
            min: EXCEPTIONAL_MIN_LIMIT,
            max: OFFDIAG_MAX_LIMIT,
        });
    }
    check_budget("exceptional set", limit, OFFDIAG_MAX_LIMIT)?;
    let root = (limit as f64).sqrt();
    let threshold = root / (limit as f64).ln().powi(10);
    let primes = sieve_primes(isqrt(limit))?;
    let odd: Vec<u64> = primes.primes().iter().copied().filter(|&p| p > 2).collect();
    let mut set = ExceptionalSet {
        limit,
        threshold,
        p1: 0,
        p2: 0,
        p3: 0,
        union: 0,
        total_upper: 0,
    };
    for (i, &r) in odd.iter().enumerate() {
        for &p in &odd[i + 1..] {
            let c1 = r as f64 <= threshold;
            let c2 = ((p - r) as f64) < threshold;
            let c3 = p as f64 > root - threshold;
            set.p1 += c1 as u64;
            set.p2 += c2 as u64;
            set.p3 += c3 as u64;
            set.union += (c1 || c2 || c3) as u64;
        }
    }
    set.total_upper = set.p1 + set.p2 + set.p3;
    Ok(set)
}
