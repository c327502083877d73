//! Counting residue pairs for the two congruence problems:
//!
//! * `rho(d)`: pairs `(u, v) mod d` with `u^2 + v^2 = 0 (mod d)` and `gcd(v, d) = 1`;
//! * `nu(delta)`: pairs `(n1, n2) mod delta` annihilating
//!   `F = (n2 t - n1 d)(n2 d + n1 t)(n1 d + n2 t)` for fixed coprime `(t, d)`.
//!
//! Each has a closed multiplicative form and an exhaustive oracle.

use crate::arith::{chi4, gcd, Factorization};
use crate::error::{Error, Result};

pub const RHO_ORACLE_MAX: u64 = 100_000;
pub const NU_ORACLE_MAX: u64 = 3_000;

/// Moduli below this use a direct search for a square root of -1.
const SQRT_SEARCH_BELOW: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Closed,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CongruenceCount {
    pub modulus: u64,
    pub count: u64,
    pub method: Method,
}

/// Coefficients `(t, d)` of the triple linear form; always coprime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FormParams {
    t: u64,
    d: u64,
}

impl FormParams {
    pub fn new(t: u64, d: u64) -> Result<Self> {
        if t == 0 || d == 0 || gcd(t, d) != 1 {
            return Err(Error::Invalid(format!(
                "form parameters must be positive and coprime, got t = {t}, d = {d}"
            )));
        }
        Ok(FormParams { t, d })
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn d(&self) -> u64 {
        self.d
    }
}

pub fn rho_closed(f: &Factorization) -> CongruenceCount {
    let count = f
        .factors()
        .iter()
        .map(|&(p, e)| {
            if p == 2 {
                u64::from(e == 1)
            } else {
                (1 + chi4(p) as i64) as u64 * (p - 1) * p.pow(e - 1)
            }
        })
        .product();
    CongruenceCount {
        modulus: f.value(),
        count,
        method: Method::Closed,
    }
}

/// Exhaustive count over all residue pairs, grouping `u` by `u^2 mod d`.
pub fn rho_oracle(d: u64) -> Result<CongruenceCount> {
    if d == 0 {
        return Err(Error::Invalid("modulus must be positive".into()));
    }
    if d > RHO_ORACLE_MAX {
        return Err(Error::Capacity {
            what: "rho oracle modulus",
            requested: d,
            capacity: RHO_ORACLE_MAX,
        });
    }
    let mut squares = vec![0u64; d as usize];
    for u in 0..d {
        squares[(u * u % d) as usize] += 1;
    }
    let count = (0..d)
        .filter(|&v| gcd(v, d) == 1)
        .map(|v| squares[((d - v * v % d) % d) as usize])
        .sum();
    Ok(CongruenceCount {
        modulus: d,
        count,
        method: Method::Oracle,
    })
}

fn is_prime_trial(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

fn sqrt_minus_one_search(p: u64) -> Option<u64> {
    (1..p).find(|&i| mul_mod(i, i, p) == p - 1)
}

fn sqrt_minus_one_pow(p: u64) -> Option<u64> {
    if p % 4 != 1 {
        return None;
    }
    // any non-residue g gives g^((p-1)/4) with square g^((p-1)/2) = -1
    let g = (2..p).find(|&g| pow_mod(g, (p - 1) / 2, p) == p - 1)?;
    let i = pow_mod(g, (p - 1) / 4, p);
    Some(i.min(p - i))
}

/// The smaller square root of -1 modulo the odd prime `p`, if one exists.
pub fn sqrt_minus_one(p: u64) -> Result<Option<u64>> {
    if p % 2 == 0 || !is_prime_trial(p) {
        return Err(Error::Invalid(format!("{p} is not an odd prime")));
    }
    if p % 4 == 3 {
        return Ok(None);
    }
    Ok(if p < SQRT_SEARCH_BELOW {
        sqrt_minus_one_search(p)
    } else {
        sqrt_minus_one_pow(p)
    })
}

/// Closed form of `nu(p)` from the three lines `f_i = 0` through the origin.
pub fn nu_prime_closed(p: u64, params: FormParams) -> Result<CongruenceCount> {
    if !is_prime_trial(p) {
        return Err(Error::Invalid(format!("{p} is not prime")));
    }
    let (t, d) = (params.t, params.d);
    let count = if p == 2 {
        if (t * d) % 2 == 0 {
            3
        } else {
            2
        }
    } else if t % p == 0 || d % p == 0 {
        2 * p - 1
    } else {
        let (tp, dp) = (t % p, d % p);
        let plus_minus = |x: u64| dp == x || dp == (p - x) % p;
        let via_t = plus_minus(tp);
        let via_it = match sqrt_minus_one(p)? {
            Some(i) => plus_minus(mul_mod(i, tp, p)),
            None => false,
        };
        if via_t || via_it {
            2 * p - 1
        } else {
            3 * p - 2
        }
    };
    Ok(CongruenceCount {
        modulus: p,
        count,
        method: Method::Closed,
    })
}

/// Product of `nu_prime_closed` over the primes of a squarefree modulus.
pub fn nu_closed(delta: &Factorization, params: FormParams) -> Result<CongruenceCount> {
    if !delta.is_squarefree() {
        return Err(Error::Invalid(format!(
            "nu is only defined here for squarefree moduli, got {}",
            delta.value()
        )));
    }
    let mut count = 1;
    for &(p, _) in delta.factors() {
        count *= nu_prime_closed(p, params)?.count;
    }
    Ok(CongruenceCount {
        modulus: delta.value(),
        count,
        method: Method::Closed,
    })
}

/// Exhaustive count of `(n1, n2) mod delta` with `F(n1, n2) = 0 (mod delta)`.
pub fn nu_oracle(delta: u64, params: FormParams) -> Result<CongruenceCount> {
    if delta == 0 {
        return Err(Error::Invalid("modulus must be positive".into()));
    }
    if delta > NU_ORACLE_MAX {
        return Err(Error::Capacity {
            what: "nu oracle modulus",
            requested: delta,
            capacity: NU_ORACLE_MAX,
        });
    }
    let m = delta;
    let (t, d) = (params.t % m, params.d % m);
    let mut count = 0;
    for n1 in 0..m {
        // values at n2 = 0, then step n2 by one
        let mut f1 = (m - n1 * d % m) % m;
        let mut f2 = n1 * t % m;
        let mut f3 = n1 * d % m;
        for _ in 0..m {
            if f1 * f2 % m * f3 % m == 0 {
                count += 1;
            }
            f1 += t;
            if f1 >= m {
                f1 -= m;
            }
            f2 += d;
            if f2 >= m {
                f2 -= m;
            }
            f3 += t;
            if f3 >= m {
                f3 -= m;
            }
        }
    }
    Ok(CongruenceCount {
        modulus: delta,
        count,
        method: Method::Oracle,
    })
}
