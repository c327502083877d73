//! Constants entering the predicted main terms, each with an explicit error bound.

use std::collections::HashMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::meanvalue::Statistic;
use crate::sieve::{sieve_primes, PrimeTable};
use crate::sum::NeumaierSum;

/// Smallest tolerance `catalan` accepts; below it f64 rounding dominates.
pub const MIN_CATALAN_EPS: f64 = 1e-15;

/// Accuracy used whenever a main term needs G.
pub const DEFAULT_CATALAN_EPS: f64 = 1e-14;

/// Prime bound used whenever a main term needs K.
pub const DEFAULT_K_PRIME_LIMIT: u64 = 10_000_000;

/// Rounding allowance added to every certified bound.
const ROUNDING_SLACK: f64 = 4e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantValue {
    pub name: &'static str,
    pub value: f64,
    pub error_bound: f64,
    pub method: String,
}

fn cache() -> &'static Mutex<HashMap<(&'static str, u64), ConstantValue>> {
    static CACHE: OnceLock<Mutex<HashMap<(&'static str, u64), ConstantValue>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cached(
    key: (&'static str, u64),
    compute: impl FnOnce() -> Result<ConstantValue>,
) -> Result<ConstantValue> {
    if let Some(v) = cache().lock().unwrap().get(&key) {
        return Ok(v.clone());
    }
    let v = compute()?;
    cache().lock().unwrap().insert(key, v.clone());
    Ok(v)
}

/// `sum_{k < terms} (-1)^k / (2k+1)^2`.
pub fn catalan_partial_sum(terms: u64) -> f64 {
    let mut acc = NeumaierSum::new();
    let mut k = 0;
    // (k, k+1) grouped so every added quantity is positive
    while k + 1 < terms {
        let a = (2 * k + 1) as f64;
        let b = (2 * k + 3) as f64;
        acc.add(1.0 / (a * a) - 1.0 / (b * b));
        k += 2;
    }
    if k < terms {
        let a = (2 * k + 1) as f64;
        let term = 1.0 / (a * a);
        acc.add(if k % 2 == 0 { term } else { -term });
    }
    acc.value()
}

/// Catalan's constant to within `eps`, from an even-length partial sum of
/// the alternating series (a lower bracket); the first omitted term bounds
/// the truncation.
pub fn catalan(eps: f64) -> Result<ConstantValue> {
    if !(eps >= MIN_CATALAN_EPS) || !eps.is_finite() {
        return Err(Error::Invalid(format!(
            "catalan: eps = {eps:e} is unreachable in double precision (minimum {MIN_CATALAN_EPS:e})"
        )));
    }
    cached(("catalan", eps.to_bits()), || {
        let terms = catalan_terms(eps);
        let t = (2 * terms + 1) as f64;
        Ok(ConstantValue {
            name: "catalan_G",
            value: catalan_partial_sum(terms),
            error_bound: 1.0 / (t * t) + ROUNDING_SLACK,
            method: format!("alternating series, {terms} terms grouped in pairs"),
        })
    })
}

/// Smallest even number of series terms whose first omitted term, plus
/// rounding slack, is within `eps`.
pub fn catalan_terms(eps: f64) -> u64 {
    let budget = eps - ROUNDING_SLACK;
    let mut terms = ((1.0 / budget.sqrt() - 1.0) / 2.0).ceil().max(0.0) as u64;
    while {
        let t = (2 * terms + 1) as f64;
        1.0 / (t * t) > budget
    } {
        terms += 1;
    }
    terms + terms % 2
}

/// Landau-Ramanujan constant from `pi/4 * prod_{p = 1 mod 4, p <= P} (1 - p^-2)^(1/2)`.
pub fn landau_ramanujan(prime_limit: u64) -> Result<ConstantValue> {
    check_k_limit(prime_limit)?;
    cached(("landau_ramanujan", prime_limit), || {
        let primes = sieve_primes(prime_limit)?;
        Ok(landau_ramanujan_with(&primes))
    })
}

/// The companion form `2^(-1/2) * prod_{p = 3 mod 4, p <= P} (1 - p^-2)^(-1/2)`.
pub fn landau_ramanujan_mod3(prime_limit: u64) -> Result<ConstantValue> {
    check_k_limit(prime_limit)?;
    cached(("landau_ramanujan_mod3", prime_limit), || {
        let primes = sieve_primes(prime_limit)?;
        Ok(landau_ramanujan_mod3_with(&primes))
    })
}

fn check_k_limit(prime_limit: u64) -> Result<()> {
    if prime_limit < 1000 {
        return Err(Error::OutOfRange {
            what: "prime_limit",
            value: prime_limit,
            min: 1000,
            max: crate::sieve::MAX_PRIME_LIMIT,
        });
    }
    Ok(())
}

fn half_log_product(primes: &PrimeTable, residue: u64) -> f64 {
    let mut acc = NeumaierSum::new();
    for &p in primes.primes().iter().filter(|&&p| p % 4 == residue) {
        let pf = p as f64;
        acc.add((-1.0 / (pf * pf)).ln_1p());
    }
    0.5 * acc.value()
}

/// Tail of `sum_{p > P} -log(1 - p^-2)`, bounded by `1/(P-1)`.
fn tail_bound(prime_limit: u64) -> f64 {
    1.0 / (prime_limit as f64 - 1.0)
}

pub fn landau_ramanujan_with(primes: &PrimeTable) -> ConstantValue {
    let p = primes.limit();
    let value = (PI / 4.0).ln() + half_log_product(primes, 1);
    let value = value.exp();
    // truncated product overestimates; the true value lies in [v e^{-T/2}, v]
    let error_bound = value * -(-0.5 * tail_bound(p)).exp_m1() + ROUNDING_SLACK;
    ConstantValue {
        name: "landau_ramanujan_K",
        value,
        error_bound,
        method: format!("Euler product over p = 1 mod 4, p <= {p}, log space"),
    }
}

pub fn landau_ramanujan_mod3_with(primes: &PrimeTable) -> ConstantValue {
    let p = primes.limit();
    let value = (FRAC_1_SQRT_2.ln() - half_log_product(primes, 3)).exp();
    // truncated product underestimates; the true value lies in [v, v e^{T/2}]
    let error_bound = value * (0.5 * tail_bound(p)).exp_m1() + ROUNDING_SLACK;
    ConstantValue {
        name: "landau_ramanujan_K_mod3_form",
        value,
        error_bound,
        method: format!("Euler product over p = 3 mod 4, p <= {p}, log space"),
    }
}

/// Catalan's constant at the default accuracy.
pub fn g() -> f64 {
    catalan(DEFAULT_CATALAN_EPS)
        .expect("default eps is valid")
        .value
}

/// Landau-Ramanujan constant at the default prime bound.
pub fn k() -> f64 {
    landau_ramanujan(DEFAULT_K_PRIME_LIMIT)
        .expect("default prime limit is valid")
        .value
}

/// Coefficient `12 G / pi^2` of the `S02` main term.
pub fn s02_coefficient() -> f64 {
    12.0 * g() / (PI * PI)
}

/// Coefficient `12 G / pi^3` of the phi-weighted lemma sum.
pub fn lemma32_coefficient() -> f64 {
    12.0 * g() / (PI * PI * PI)
}

/// Leading main term of `stat` at `x`.
pub fn predicted_main_term(stat: Statistic, x: f64) -> Result<f64> {
    if !(x >= 3.0) {
        return Err(Error::Invalid(format!(
            "main terms need x >= 3, got {x}"
        )));
    }
    let c = stat
        .predicted_constant()
        .ok_or_else(|| Error::NoMainTerm(stat.name()))?;
    Ok(c * stat.shape(x))
}

/// `V(z) = prod_{2 < p < z} (1 - (3p - 2)/p^2)`.
pub fn sieve_density_product(z: f64, primes: &PrimeTable) -> Result<f64> {
    if !(z >= 3.0) {
        return Err(Error::Invalid(format!("sieve density needs z >= 3, got {z}")));
    }
    if z > primes.limit() as f64 + 1.0 {
        return Err(Error::Invalid(format!(
            "z = {z} beyond prime table limit {}",
            primes.limit()
        )));
    }
    let mut log_v = NeumaierSum::new();
    for &p in primes.primes().iter().skip(1) {
        if p as f64 >= z {
            break;
        }
        let pf = p as f64;
        log_v.add((-(3.0 * pf - 2.0) / (pf * pf)).ln_1p());
    }
    Ok(log_v.value().exp())
}

/// `V(z) * log^3 z`, the quantity expected to settle to a constant.
pub fn sieve_density_normalized(z: f64, primes: &PrimeTable) -> Result<f64> {
    Ok(sieve_density_product(z, primes)? * z.ln().powi(3))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Plain term-by-term summation, kept separate from the grouped kernel.
    fn independent_catalan(terms: u64) -> f64 {
        let mut s = 0.0f64;
        let mut c = 0.0f64;
        for k in (0..terms).rev() {
            let d = (2 * k + 1) as f64;
            let t = if k % 2 == 0 { 1.0 } else { -1.0 } / (d * d);
            let y = t - c;
            let u = s + y;
            c = (u - s) - y;
            s = u;
        }
        s
    }

    #[test]
    fn catalan_values() {
        let g3 = catalan(1e-3).unwrap();
        assert!((g3.value - 0.915).abs() < 1e-3);
        let g10 = catalan(1e-10).unwrap();
        assert!(g10.error_bound <= 1e-10);
        let reference = independent_catalan(2_000_000);
        assert!((g10.value - reference).abs() <= 1e-10);
        assert_eq!(format!("{:.10}", g10.value), "0.9159655941");
        assert_eq!(catalan_partial_sum(1), 1.0);
        assert_eq!(catalan_partial_sum(0), 0.0);
        assert!(catalan(1e-16).is_err());
        assert!(catalan(f64::NAN).is_err());
    }

    #[test]
    fn catalan_is_bracketed() {
        for eps in [1e-4, 1e-7, 1e-10] {
            let g = catalan(eps).unwrap();
            let n = catalan_terms(eps);
            let lower = catalan_partial_sum(n);
            let upper = catalan_partial_sum(n + 1);
            assert!(lower <= g.value + 1e-15 && g.value <= upper, "eps {eps}");
            assert!(lower < upper);
        }
    }

    #[test]
    fn landau_ramanujan_small() {
        let a = landau_ramanujan(1000).unwrap();
        let b = landau_ramanujan(100_000).unwrap();
        assert!((a.value - b.value).abs() < a.error_bound.max(b.error_bound));
        let c = landau_ramanujan_mod3(100_000).unwrap();
        assert!((b.value - c.value).abs() <= b.error_bound + c.error_bound);
        assert!(c.value <= b.value);
        assert!(landau_ramanujan(999).is_err());
    }

    #[test]
    fn density_product_examples() {
        let primes = sieve_primes(100).unwrap();
        assert!((sieve_density_product(4.0, &primes).unwrap() - 2.0 / 9.0).abs() < 1e-15);
        assert!((sieve_density_product(6.0, &primes).unwrap() - 8.0 / 75.0).abs() < 1e-15);
        assert!((sieve_density_product(5.0, &primes).unwrap() - 2.0 / 9.0).abs() < 1e-15);
        assert!(sieve_density_product(1000.0, &primes).is_err());
        assert!(sieve_density_product(2.0, &primes).is_err());
    }

    #[test]
    fn main_terms() {
        let x = 1e6;
        assert_eq!(predicted_main_term(Statistic::S01, x).unwrap(), x / 2.0);
        let s02 = predicted_main_term(Statistic::S02, x).unwrap();
        let coef = 12.0 * g() / (PI * PI);
        assert!((coef - 1.11368).abs() < 1e-5);
        assert!((s02 - coef * x / x.ln()).abs() < 1e-6);
        let e2 = std::f64::consts::E.powi(2);
        let s22 = predicted_main_term(Statistic::S22, e2).unwrap();
        assert!((s22 - 2.0 * PI * e2 / 4.0).abs() < 1e-12);
        assert!(predicted_main_term(Statistic::S12, x).is_err());
        assert!(predicted_main_term(Statistic::S01, 2.0).is_err());
    }

    #[test]
    fn erdos_and_plaksin_terms_differ_by_two() {
        for x in [3.0, 10.0, 1234.5, 1e7, 1e12] {
            let a = predicted_main_term(Statistic::S22, x).unwrap();
            let b = predicted_main_term(Statistic::M2, x).unwrap();
            assert_eq!(a / b, 2.0);
        }
    }
}
