//! Sums checked against loops that share no code with the engine.

use paucity_core::arith::SpfTable;
use paucity_core::constants;
use paucity_core::meanvalue::{
    accumulate, lemma_sums, partition_s12, CheckpointGrid, R0Convention, Statistic,
};
use paucity_core::quadruples::{enumerate_offdiag, exceptional_set_count, QuadClass};
use paucity_core::sieve::{sieve_all, SieveConfig};

fn trial_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

/// `(r0_pair, r1, r2)` for every `n <= x` by a plain double loop.
fn naive_tallies(x: u64) -> Vec<(i64, i64, i64)> {
    let mut out = vec![(0, 0, 0); x as usize + 1];
    let mut a = 1;
    while a * a < x {
        let mut b = 1;
        while a * a + b * b <= x {
            let n = (a * a + b * b) as usize;
            let (pa, pb) = (trial_prime(a), trial_prime(b));
            out[n].0 += 1;
            out[n].1 += pb as i64;
            out[n].2 += (pa && pb) as i64;
            b += 1;
        }
        a += 1;
    }
    out
}

#[test]
fn mean_values_match_naive_loop() {
    let x = 20_000;
    let naive = naive_tallies(x);
    let stats = [
        Statistic::S00,
        Statistic::S01,
        Statistic::S02,
        Statistic::S11,
        Statistic::S12,
        Statistic::S22,
        Statistic::M0,
        Statistic::M1,
        Statistic::M2,
        Statistic::R2Cube,
        Statistic::Rieger,
    ];
    let grid = CheckpointGrid::new(vec![1000, 7777, x]).unwrap();
    let series = accumulate(
        sieve_all(SieveConfig::new(x).with_block_size(999)).unwrap(),
        &grid,
        &stats,
        R0Convention::Pair,
        None,
    )
    .unwrap();
    for &point in grid.points() {
        let rows = &naive[1..=point as usize];
        let sum = |f: &dyn Fn(&(i64, i64, i64)) -> i64| rows.iter().map(f).sum::<i64>();
        let expect = [
            sum(&|t| t.0 * t.0),
            sum(&|t| t.0 * t.1),
            sum(&|t| t.0 * t.2),
            sum(&|t| t.1 * t.1),
            sum(&|t| t.1 * t.2),
            sum(&|t| t.2 * t.2),
            sum(&|t| t.0),
            sum(&|t| t.1),
            sum(&|t| t.2),
            sum(&|t| t.2 * t.2 * t.2),
            sum(&|t| t.2 * t.2 - 2 * t.2),
        ];
        for (s, e) in series.iter().zip(expect) {
            assert_eq!(s.int_at(point), Some(e), "{} at {point}", s.statistic);
        }
    }
}

#[test]
fn r0_sum_counts_lattice_points() {
    let x = 100_000u64;
    let grid = CheckpointGrid::new(vec![x]).unwrap();
    let m0 = accumulate(
        sieve_all(SieveConfig::new(x)).unwrap(),
        &grid,
        &[Statistic::M0],
        R0Convention::Pair,
        None,
    )
    .unwrap();
    let mut lattice = 0i64;
    for a in 1..=x {
        if a * a >= x {
            break;
        }
        let rest = x - a * a;
        lattice += (rest as f64).sqrt().floor() as i64;
    }
    assert_eq!(m0[0].int_at(x), Some(lattice));
}

#[test]
fn lemma_sums_match_trial_division() {
    let x = 5000;
    let spf = SpfTable::new(x).unwrap();
    let grid = CheckpointGrid::new(vec![x]).unwrap();
    let (s31, s32) = lemma_sums(x, &grid, &spf).unwrap();
    let (mut by_n, mut by_phi) = (0.0f64, 0.0f64);
    for n in 1..=x {
        let mut m = n;
        let mut primes = Vec::new();
        let mut p = 2;
        while m > 1 {
            if m % p == 0 {
                primes.push(p);
                while m % p == 0 {
                    m /= p;
                }
            }
            p += 1;
        }
        if primes.iter().any(|p| p % 4 != 1) {
            continue;
        }
        let phi = (1..=n).filter(|k| paucity_core::arith::gcd(*k, n) == 1).count() as f64;
        let w = 2f64.powi(primes.len() as i32);
        by_n += w / n as f64;
        by_phi += w / phi;
    }
    assert!((s31.f64_at(x).unwrap() - by_n).abs() < 1e-12);
    assert!((s32.f64_at(x).unwrap() - by_phi).abs() < 1e-12);
}

#[test]
fn partition_agrees_with_census() {
    for x in [1_000, 10_000, 100_000] {
        let report = partition_s12(x).unwrap();
        let census = enumerate_offdiag(x).unwrap().census;
        assert_eq!(report.offdiag as u64, census.total, "x = {x}");
        assert_eq!(report.diagonal as u64, census.diagonal, "x = {x}");
        assert_eq!(
            census.total,
            census.n1 + census.n1_prime + census.n1_double_prime + census.mirrored + census.degenerate
        );
    }
}

#[test]
fn census_by_brute_force() {
    let x = 3000u64;
    let primes: Vec<u64> = (2..60).filter(|&p| trial_prime(p)).collect();
    let mut total = 0;
    let mut n1 = 0;
    for &p in &primes {
        for a in 1..60u64 {
            for &q in &primes {
                for &r in &primes {
                    let n = a * a + p * p;
                    if n > x || n != q * q + r * r {
                        continue;
                    }
                    if (a == q && p == r) || (a == r && p == q) {
                        continue;
                    }
                    total += 1;
                    n1 += (2 < a && a < q && q < r && r < p) as u64;
                }
            }
        }
    }
    let census = enumerate_offdiag(x).unwrap();
    assert_eq!(census.census.total, total);
    assert_eq!(census.census.n1, n1);
    for q in &census.quadruples {
        if q.class() == QuadClass::N1 {
            assert_eq!((q.a % 2, q.p % 2), (q.q % 2, q.r % 2));
        }
    }
}

#[test]
fn exceptional_union_bound() {
    for x in [10_000, 1_000_000] {
        let set = exceptional_set_count(x).unwrap();
        assert!(set.total_upper >= set.union);
        assert!(set.union >= set.p1.max(set.p2).max(set.p3));
    }
}

#[test]
fn main_terms_are_consistent() {
    for x in [10.0, 1e4, 1e8] {
        let s22 = constants::predicted_main_term(Statistic::S22, x).unwrap();
        let m2 = constants::predicted_main_term(Statistic::M2, x).unwrap();
        assert_eq!(s22 / m2, 2.0);
    }
}
