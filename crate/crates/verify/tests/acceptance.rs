//! Exit criteria for the engine. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::fs;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use paucity_core::arith::{gcd, SpfTable};
use paucity_core::congruence::{
    nu_closed, nu_oracle, nu_prime_closed, rho_closed, rho_oracle, FormParams,
};
use paucity_core::constants;
use paucity_core::meanvalue::{
    accumulate, lemma_sums, partition_s12, CheckpointGrid, MeanValueSeries, R0Convention,
    Statistic,
};
use paucity_core::quadruples::{
    enumerate_offdiag, enumerate_offdiag_with, enumerate_param_side, param_invert,
    param_quadruple, QuadClass, Quadruple,
};
use paucity_core::sieve::{sieve_all, sieve_flat, SieveConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const ORACLE_LIMIT: u64 = 100_000;
const ORACLE_BUDGET: Duration = Duration::from_secs(10);
const RHO_MAX: u64 = 5000;
const NU_PRIME_BELOW: u64 = 100;
const NU_SQUAREFREE_MAX: u64 = 1000;
const NU_RANDOM_PAIRS: usize = 20;
const NU_SEED: u64 = 0x6e75_5f73_6565_64;
const CONGRUENCE_BUDGET: Duration = Duration::from_secs(60);
const BIJECTION_LIMIT: u64 = 1_000_000;
const BIJECTION_BUDGET: Duration = Duration::from_secs(120);
const PARTITION_POINTS: [u64; 4] = [1_000, 10_000, 100_000, 1_000_000];
const TREND_POINTS: [u64; 4] = [10_000, 100_000, 1_000_000, 10_000_000];
const S01_IMPROVEMENT: f64 = 1.5;
const RIEGER_POINTS: [u64; 3] = [100_000, 1_000_000, 10_000_000];
const RIEGER_BAND: f64 = 0.5;
const CATALAN_EPS: f64 = 1e-10;
const CATALAN_DIGITS: f64 = 0.9159655941;
const CATALAN_PLACES_TOL: f64 = 0.5e-10;
const K_PRIME_LIMIT: u64 = 10_000_000;
const K_DIGITS: f64 = 0.764223653;
const K_PLACES_TOL: f64 = 0.5e-6;
const SLOPE_FROM: u64 = 1_000_000;
const SLOPE_TO: u64 = 10_000_000;
const SLOPE_TOL: f64 = 0.10;
const DETERMINISM_LIMIT: u64 = 1_000_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn is_prime_naive(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn chi4_naive(d: u64) -> i64 {
    match d % 4 {
        1 => 1,
        3 => -1,
        _ => 0,
    }
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let x = ORACLE_LIMIT;
    let prime: Vec<bool> = (0..=x).map(is_prime_naive).collect();
    let mut r0 = vec![0u32; x as usize + 1];
    let mut r1 = vec![0u32; x as usize + 1];
    let mut r2 = vec![0u32; x as usize + 1];
    for a in 1..=x {
        if a * a >= x {
            break;
        }
        for b in 1..=x {
            let n = a * a + b * b;
            if n > x {
                break;
            }
            let n = n as usize;
            r0[n] += 1;
            r1[n] += prime[b as usize] as u32;
            r2[n] += (prime[a as usize] && prime[b as usize]) as u32;
        }
    }
    let flat = match sieve_flat(SieveConfig::new(x).with_block_size(4096)) {
        Ok(f) => f,
        Err(e) => return outcome(false, format!("sieve error: {e}")),
    };
    let mut mismatches = 0;
    let mut square_offsets = 0;
    for (n, t) in flat.iter() {
        let i = n as usize;
        if (t.r0_pair as u32, t.r1 as u32, t.r2 as u32) != (r0[i], r1[i], r2[i]) {
            mismatches += 1;
        }
        let mut divisor_sum = 0;
        let mut d = 1;
        while d * d <= n {
            if n % d == 0 {
                divisor_sum += chi4_naive(d);
                if d * d != n {
                    divisor_sum += chi4_naive(n / d);
                }
            }
            d += 1;
        }
        if t.r0_div as i64 != divisor_sum {
            mismatches += 1;
        }
        let root = (n as f64).sqrt().round() as u64;
        let square = root * root == n;
        if t.r0_div as i64 - t.r0_pair as i64 != square as i64 {
            square_offsets += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        mismatches == 0 && square_offsets == 0 && elapsed < ORACLE_BUDGET,
        format!(
            "n <= {x}: {mismatches} tally mismatches, {square_offsets} square-offset failures, {:.2?} (budget {:?})",
            elapsed, ORACLE_BUDGET
        ),
    )
}

fn congruence_closed_forms() -> Outcome {
    let start = Instant::now();
    let spf = SpfTable::new(RHO_MAX.max(NU_SQUAREFREE_MAX)).expect("table");

    let rho_bad: Vec<u64> = (1..=RHO_MAX)
        .into_par_iter()
        .filter(|&d| {
            rho_closed(&spf.factorize(d).unwrap()).count != rho_oracle(d).unwrap().count
        })
        .collect();

    let mut prime_cases = Vec::new();
    for p in (3..NU_PRIME_BELOW).filter(|&p| is_prime_naive(p)) {
        for t in 1..=p {
            for d in 1..=p {
                if gcd(t, d) == 1 {
                    prime_cases.push((p, t, d));
                }
            }
        }
    }
    // p = 2: td odd and td even
    prime_cases.extend([(2, 1, 1), (2, 1, 2), (2, 2, 1), (2, 3, 5), (2, 3, 4)]);
    let nu_prime_bad: Vec<(u64, u64, u64)> = prime_cases
        .par_iter()
        .copied()
        .filter(|&(p, t, d)| {
            let params = FormParams::new(t, d).unwrap();
            nu_prime_closed(p, params).unwrap().count != nu_oracle(p, params).unwrap().count
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(NU_SEED);
    let mut pairs = Vec::new();
    while pairs.len() < NU_RANDOM_PAIRS {
        let (t, d) = (rng.gen_range(1..=10_000u64), rng.gen_range(1..=10_000u64));
        if gcd(t, d) == 1 {
            pairs.push((t, d));
        }
    }
    let squarefree: Vec<u64> = (1..=NU_SQUAREFREE_MAX)
        .filter(|&m| spf.factorize(m).unwrap().is_squarefree())
        .collect();
    let jobs: Vec<(u64, u64, u64)> = squarefree
        .iter()
        .flat_map(|&m| pairs.iter().map(move |&(t, d)| (m, t, d)))
        .collect();
    let nu_bad = jobs
        .par_iter()
        .filter(|&&(m, t, d)| {
            let params = FormParams::new(t, d).unwrap();
            nu_closed(&spf.factorize(m).unwrap(), params).unwrap().count
                != nu_oracle(m, params).unwrap().count
        })
        .count();

    let elapsed = start.elapsed();
    outcome(
        rho_bad.is_empty() && nu_prime_bad.is_empty() && nu_bad == 0 && elapsed < CONGRUENCE_BUDGET,
        format!(
            "rho d <= {RHO_MAX}: {} bad; nu primes < {NU_PRIME_BELOW}: {} of {} cases bad; nu squarefree <= {NU_SQUAREFREE_MAX}: {} of {} bad; {:.2?} (budget {:?})",
            rho_bad.len(),
            nu_prime_bad.len(),
            prime_cases.len(),
            nu_bad,
            jobs.len(),
            elapsed,
            CONGRUENCE_BUDGET
        ),
    )
}

fn parametrization_bijection() -> Outcome {
    let start = Instant::now();
    let mut n1: Vec<Quadruple> = Vec::new();
    let census = enumerate_offdiag_with(BIJECTION_LIMIT, |q, class| {
        if class == QuadClass::N1 {
            n1.push(*q);
        }
    })
    .expect("census");
    let param_count = enumerate_param_side(BIJECTION_LIMIT, |_, _| {}).expect("param side");
    let round_trip_failures = n1
        .iter()
        .filter(|q| {
            param_invert(q)
                .and_then(|pt| param_quadruple(&pt))
                .map(|back| back != **q)
                .unwrap_or(true)
        })
        .count();
    let elapsed = start.elapsed();
    outcome(
        census.n1 == param_count
            && n1.len() as u64 == census.n1
            && round_trip_failures == 0
            && elapsed < BIJECTION_BUDGET,
        format!(
            "limit {BIJECTION_LIMIT}: direct N1 = {}, parameter side = {param_count}, {round_trip_failures} round-trip failures, {:.2?} (budget {:?})",
            census.n1, elapsed, BIJECTION_BUDGET
        ),
    )
}

fn partition_identity() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for x in PARTITION_POINTS {
        let report = partition_s12(x).expect("partition");
        let census = enumerate_offdiag(x).expect("census").census;
        let holds = report.s12 == report.diagonal + census.total as i64
            && report.diagonal as u64 == census.diagonal;
        ok &= holds;
        parts.push(format!(
            "x={x}: S12={} diag={} N={}",
            report.s12, report.diagonal, census.total
        ));
    }
    let n49 = enumerate_offdiag(49).expect("census").census.total;
    let at50 = enumerate_offdiag(50).expect("census");
    let first = at50.quadruples.first().copied();
    let smallest_ok = n49 == 0
        && at50.census.total == 1
        && first.map(|q| q.n) == Some(50);
    outcome(
        ok && smallest_ok,
        format!("{}; N(49)={n49}, N(50)={}", parts.join(", "), at50.census.total),
    )
}

struct TrendData {
    series: Vec<MeanValueSeries>,
    lemma31: MeanValueSeries,
    lemma32: MeanValueSeries,
}

impl TrendData {
    fn compute() -> Self {
        let limit = *TREND_POINTS.last().unwrap();
        let grid = CheckpointGrid::new(TREND_POINTS.to_vec()).unwrap();
        let stats = [
            Statistic::S01,
            Statistic::S02,
            Statistic::S22,
            Statistic::M2,
            Statistic::Rieger,
        ];
        let series = accumulate(
            sieve_all(SieveConfig::new(limit)).unwrap(),
            &grid,
            &stats,
            R0Convention::Pair,
            None,
        )
        .unwrap();
        let spf = SpfTable::new(SLOPE_TO).unwrap();
        let lemma_grid = CheckpointGrid::new(vec![SLOPE_FROM, SLOPE_TO]).unwrap();
        let (lemma31, lemma32) = lemma_sums(SLOPE_TO, &lemma_grid, &spf).unwrap();
        TrendData {
            series,
            lemma31,
            lemma32,
        }
    }

    fn raw(&self, stat: Statistic, x: u64) -> f64 {
        self.series
            .iter()
            .find(|s| s.statistic == stat)
            .and_then(|s| s.f64_at(x))
            .unwrap()
    }

    /// `|raw / shape - target|` at every trend point.
    fn deviations(&self, stat: Statistic, target: f64) -> Vec<f64> {
        TREND_POINTS
            .iter()
            .map(|&x| (stat.normalize(self.raw(stat, x), x as f64) - target).abs())
            .collect()
    }
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn fmt_list(v: &[f64]) -> String {
    v.iter()
        .map(|d| format!("{d:.4}"))
        .collect::<Vec<_>>()
        .join(" > ")
}

fn s01_trend(data: &TrendData) -> Outcome {
    let dev = data.deviations(Statistic::S01, 0.5);
    let ratio = dev[0] / dev[dev.len() - 1];
    outcome(
        strictly_decreasing(&dev) && ratio >= S01_IMPROVEMENT,
        format!(
            "|S01/x - 1/2| at 1e4..1e7: {}; dev(1e4)/dev(1e7) = {ratio:.4} (need >= {S01_IMPROVEMENT})",
            fmt_list(&dev)
        ),
    )
}

fn s02_trend(data: &TrendData) -> Outcome {
    let target = constants::s02_coefficient();
    let dev = data.deviations(Statistic::S02, target);
    outcome(
        strictly_decreasing(&dev),
        format!(
            "|S02 log x/x - {target:.6}| at 1e4..1e7: {} (need strictly decreasing)",
            fmt_list(&dev)
        ),
    )
}

fn erdos_baselines(data: &TrendData) -> Outcome {
    let s22 = data.deviations(Statistic::S22, 2.0 * PI);
    let m2 = data.deviations(Statistic::M2, PI);
    let rieger: Vec<f64> = RIEGER_POINTS
        .iter()
        .map(|&x| Statistic::Rieger.normalize(data.raw(Statistic::Rieger, x), x as f64).abs())
        .collect();
    let mean = rieger.iter().sum::<f64>() / rieger.len() as f64;
    let stable = rieger
        .iter()
        .all(|&v| (v - mean).abs() <= RIEGER_BAND * mean);
    outcome(
        strictly_decreasing(&s22) && strictly_decreasing(&m2) && stable,
        format!(
            "|S22 log^2x/x - 2pi| at 1e4..1e7: {}; |sum r2 log^2x/x - pi|: {}; |S22 - 2 sum r2| log^3x/x at 1e5..1e7: {:.3?} vs recorded mean {mean:.3} (band +/-{:.0}%)",
            fmt_list(&s22),
            fmt_list(&m2),
            rieger,
            RIEGER_BAND * 100.0
        ),
    )
}

fn independent_catalan(pairs: u64) -> f64 {
    // sum of 1/(4k+1)^2 - 1/(4k+3)^2, smallest terms first
    let mut total = 0.0f64;
    for k in (0..pairs).rev() {
        let a = (4 * k + 1) as f64;
        let b = (4 * k + 3) as f64;
        total += (b * b - a * a) / (a * a * b * b);
    }
    total
}

fn constants_check() -> Outcome {
    let g = constants::catalan(CATALAN_EPS).expect("catalan");
    let reference = independent_catalan(1_000_000);
    let k1 = constants::landau_ramanujan(K_PRIME_LIMIT).expect("K");
    let k3 = constants::landau_ramanujan_mod3(K_PRIME_LIMIT).expect("K mod 3");
    let g_ok = (g.value - reference).abs() <= CATALAN_EPS
        && (g.value - CATALAN_DIGITS).abs() < CATALAN_PLACES_TOL;
    let k_ok = (k1.value - K_DIGITS).abs() < K_PLACES_TOL;
    let forms_ok = (k1.value - k3.value).abs() <= k1.error_bound + k3.error_bound;
    outcome(
        g_ok && k_ok && forms_ok,
        format!(
            "G = {:.12} (independent {:.12}), K = {:.10} (+/- {:.1e}), K from p=3 mod 4 = {:.10} (+/- {:.1e})",
            g.value, reference, k1.value, k1.error_bound, k3.value, k3.error_bound
        ),
    )
}

fn lemma_slopes(data: &TrendData) -> Outcome {
    let span = (SLOPE_TO as f64 / SLOPE_FROM as f64).ln();
    let slope = |s: &MeanValueSeries| (s.f64_at(SLOPE_TO).unwrap() - s.f64_at(SLOPE_FROM).unwrap()) / span;
    let s31 = slope(&data.lemma31);
    let s32 = slope(&data.lemma32);
    let t31 = 1.0 / PI;
    let t32 = constants::lemma32_coefficient();
    let ok = ((s31 - t31) / t31).abs() <= SLOPE_TOL && ((s32 - t32) / t32).abs() <= SLOPE_TOL;
    outcome(
        ok,
        format!(
            "slope 2^w/n = {s31:.5} vs {t31:.5}, slope 2^w/phi = {s32:.5} vs {t32:.5} (tolerance {:.0}%)",
            SLOPE_TOL * 100.0
        ),
    )
}

fn determinism() -> Outcome {
    std::env::remove_var(paucity_cli::THREADS_ENV);
    let dir = tempfile::tempdir().expect("tempdir");
    let limit = DETERMINISM_LIMIT.to_string();
    let stats = "S00,S01,S02,S12,S22,M1,SUPP2,LANDAU_B,COUNT_A,LEMMA31,LEMMA32,DISPERSION(1)";
    let configs = [("1", "1000"), ("4", "65536"), ("3", "777")];
    let mut outputs = Vec::new();
    for (i, (threads, block)) in configs.iter().enumerate() {
        let out = dir.path().join(format!("run{i}"));
        let code = paucity_cli::run([
            "paucity",
            "mean",
            "--limit",
            &limit,
            "--stats",
            stats,
            "--grid",
            "geometric:10",
            "--threads",
            threads,
            "--block-size",
            block,
            "--out-dir",
            out.to_str().unwrap(),
        ]);
        if code != 0 {
            return outcome(false, format!("mean run {i} exited with {code}"));
        }
        outputs.push(fs::read(out.join("mean.csv")).expect("mean.csv"));
    }
    let identical = outputs.windows(2).all(|w| w[0] == w[1]);
    outcome(
        identical,
        format!(
            "mean.csv for (threads, block) in {configs:?}: {} bytes each, identical = {identical}",
            outputs[0].len()
        ),
    )
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |id: u32, name: &str, o: Outcome| {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {id:>2} {name}: {}", o.detail);
        failed += (!o.pass) as u32;
    };
    report(1, "sieve vs naive oracles", oracle_equivalence());
    report(2, "congruence closed forms", congruence_closed_forms());
    report(3, "parametrization bijection", parametrization_bijection());
    report(4, "S12 partition identity", partition_identity());
    let data = TrendData::compute();
    report(5, "S01 trend", s01_trend(&data));
    report(6, "S02 trend", s02_trend(&data));
    report(7, "S22 and sum r2 baselines", erdos_baselines(&data));
    report(8, "constants", constants_check());
    report(9, "lemma slopes", lemma_slopes(&data));
    report(10, "determinism", determinism());
    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
