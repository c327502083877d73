//! Exact integer arithmetic shared by the sieve, mean-value and congruence code.
//!
//! Every factorization goes through a smallest-prime-factor table; there is no
//! probabilistic primality testing anywhere in the crate.

use crate::error::{Error, Result};

/// Largest table the SPF builder will allocate (4 bytes per entry).
pub const MAX_SPF_LIMIT: u64 = 1 << 30;

/// The non-principal Dirichlet character modulo 4.
#[inline]
pub fn chi4(n: u64) -> i8 {
    match n & 3 {
        1 => 1,
        3 => -1,
        _ => 0,
    }
}

#[inline]
pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[inline]
pub fn isqrt(n: u64) -> u64 {
    n.isqrt()
}

#[inline]
pub fn is_square(n: u64) -> bool {
    let s = n.isqrt();
    s * s == n
}

/// Smallest prime factor of every integer in `2..=limit`.
#[derive(Debug, Clone)]
pub struct SpfTable {
    limit: u64,
    spf: Vec<u32>,
}

impl SpfTable {
    pub fn new(limit: u64) -> Result<Self> {
        if limit < 2 {
            return Err(Error::OutOfRange {
                what: "spf limit",
                value: limit,
                min: 2,
                max: MAX_SPF_LIMIT,
            });
        }
        if limit > MAX_SPF_LIMIT {
            return Err(Error::Capacity {
                what: "smallest-prime-factor table",
                requested: limit,
                capacity: MAX_SPF_LIMIT,
            });
        }
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        let mut primes: Vec<u32> = Vec::new();
        // Linear sieve: each composite is written exactly once, by its smallest prime.
        for i in 2..=n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            let si = spf[i];
            for &p in &primes {
                if p > si {
                    break;
                }
                let m = i * p as usize;
                if m > n {
                    break;
                }
                spf[m] = p;
            }
        }
        Ok(SpfTable { limit, spf })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Smallest prime factor of `n` (requires `2 <= n <= limit`).
    #[inline]
    pub fn spf(&self, n: u64) -> u64 {
        self.spf[n as usize] as u64
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && n <= self.limit && self.spf(n) == n
    }

    pub fn factorize(&self, n: u64) -> Result<Factorization> {
        if n == 0 || n > self.limit {
            return Err(Error::OutOfRange {
                what: "n",
                value: n,
                min: 1,
                max: self.limit,
            });
        }
        let mut factors = Vec::new();
        let mut m = n;
        while m > 1 {
            let p = self.spf(m);
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            factors.push((p, e));
        }
        Ok(Factorization { value: n, factors })
    }
}

/// `factorize(n, table)` in free-function form.
pub fn factorize(n: u64, table: &SpfTable) -> Result<Factorization> {
    table.factorize(n)
}

/// A positive integer together with its prime-power decomposition.
///
/// Primes are strictly increasing and every exponent is at least one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    value: u64,
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn one() -> Self {
        Factorization {
            value: 1,
            factors: Vec::new(),
        }
    }

    /// Builds a factorization from explicit prime powers, checking ordering and
    /// the product. Primality of the bases is the caller's responsibility.
    pub fn from_prime_powers(factors: Vec<(u64, u32)>) -> Result<Self> {
        let mut value: u64 = 1;
        let mut prev = 1;
        for &(p, e) in &factors {
            if p <= prev || e == 0 {
                return Err(Error::Invalid(format!(
                    "prime powers must have increasing bases and positive exponents, got {factors:?}"
                )));
            }
            prev = p;
            let pe = p
                .checked_pow(e)
                .ok_or_else(|| Error::Invalid("factorization exceeds u64".into()))?;
            value = value
                .checked_mul(pe)
                .ok_or_else(|| Error::Invalid("factorization exceeds u64".into()))?;
        }
        Ok(Factorization { value, factors })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn omega(&self) -> u32 {
        self.factors.len() as u32
    }

    pub fn tau(&self) -> u64 {
        self.factors.iter().map(|&(_, e)| e as u64 + 1).product()
    }

    pub fn phi(&self) -> u64 {
        self.factors
            .iter()
            .map(|&(p, e)| (p - 1) * p.pow(e - 1))
            .product()
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    /// Membership in the set of integers whose prime factors are all 1 mod 4.
    pub fn in_a(&self) -> bool {
        self.factors.iter().all(|&(p, _)| p % 4 == 1)
    }

    /// Sum-of-two-squares indicator: primes 3 mod 4 occur to even powers.
    pub fn is_sum_two_squares(&self) -> bool {
        self.factors
            .iter()
            .all(|&(p, e)| p % 4 != 3 || e % 2 == 0)
    }

    /// `sum_{d | n} chi4(d)`, assembled from its local factors.
    pub fn divisor_chi4_sum(&self) -> u64 {
        self.factors
            .iter()
            .map(|&(p, e)| match p % 4 {
                1 => e as u64 + 1,
                3 => u64::from(e % 2 == 0),
                _ => 1,
            })
            .product()
    }

    /// All positive divisors in increasing order.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, e) in &self.factors {
            let len = divs.len();
            let mut pk = 1;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs.sort_unstable();
        divs
    }
}

pub fn omega(f: &Factorization) -> u32 {
    f.omega()
}

pub fn tau(f: &Factorization) -> u64 {
    f.tau()
}

pub fn phi(f: &Factorization) -> u64 {
    f.phi()
}

pub fn in_a(f: &Factorization) -> bool {
    f.in_a()
}

pub fn is_sum_two_squares(f: &Factorization) -> bool {
    f.is_sum_two_squares()
}

pub fn divisor_chi4_sum(f: &Factorization) -> u64 {
    f.divisor_chi4_sum()
}
