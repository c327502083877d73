//! Checkpointed partial sums of every mean value the engine tracks.
//!
//! Integer statistics are exact `i64` sums. Harmonic and dispersion sums use
//! compensated summation fed in ascending `n`, so results do not depend on
//! block size or thread count.

use std::fmt;
use std::io::{self, Write};

use crate::arith::{chi4, isqrt, SpfTable};
use crate::constants;
use crate::error::{Error, Result};
use crate::sieve::{sieve_all, sieve_primes, RepresentationBlock, SieveConfig, Tallies};
use crate::sum::NeumaierSum;

/// Largest limit accepted by [`partition_s12`].
pub const PARTITION_MAX_LIMIT: u64 = 10_000_000;

/// Default exponent `A` in the `log^A x` window of [`divisor_split`].
pub const DEFAULT_SPLIT_EXPONENT: f64 = 6.0;

pub const CSV_HEADER: &str = "x,statistic,raw_value,normalized_value,predicted_constant,deviation";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Statistic {
    /// `sum r0^2`
    S00,
    /// Secondary-constant estimate `(S00 - x log x / 4) * 4 / x`.
    S00C,
    S01,
    S02,
    S11,
    S12,
    S22,
    /// `sum r0`
    M0,
    /// `sum r1`
    M1,
    /// `sum r2`
    M2,
    /// `sum r2^3`
    R2Cube,
    /// `S22 - 2 sum r2`
    Rieger,
    Supp1,
    Supp2,
    LandauB,
    CountA,
    Lemma31,
    Lemma32,
    Dispersion(f64),
}

impl Statistic {
    pub const ALL_FIXED: [Statistic; 18] = [
        Statistic::S00,
        Statistic::S00C,
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
        Statistic::Supp1,
        Statistic::Supp2,
        Statistic::LandauB,
        Statistic::CountA,
        Statistic::Lemma31,
        Statistic::Lemma32,
    ];

    pub fn name(&self) -> String {
        match self {
            Statistic::S00 => "S00".into(),
            Statistic::S00C => "S00C".into(),
            Statistic::S01 => "S01".into(),
            Statistic::S02 => "S02".into(),
            Statistic::S11 => "S11".into(),
            Statistic::S12 => "S12".into(),
            Statistic::S22 => "S22".into(),
            Statistic::M0 => "M0".into(),
            Statistic::M1 => "M1".into(),
            Statistic::M2 => "M2".into(),
            Statistic::R2Cube => "R2CUBE".into(),
            Statistic::Rieger => "RIEGER".into(),
            Statistic::Supp1 => "SUPP1".into(),
            Statistic::Supp2 => "SUPP2".into(),
            Statistic::LandauB => "LANDAU_B".into(),
            Statistic::CountA => "COUNT_A".into(),
            Statistic::Lemma31 => "LEMMA31".into(),
            Statistic::Lemma32 => "LEMMA32".into(),
            Statistic::Dispersion(c) => format!("DISPERSION({c})"),
        }
    }

    /// Parses names such as `S01`, `supp2` or `DISPERSION(0.5)`.
    pub fn parse(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        if let Some(rest) = upper.strip_prefix("DISPERSION") {
            let inner = rest
                .strip_prefix('(')
                .and_then(|r| r.strip_suffix(')'))
                .or_else(|| rest.strip_prefix(':'))
                .ok_or_else(|| Error::UnknownStatistic(s.to_string()))?;
            let c: f64 = inner
                .parse()
                .map_err(|_| Error::UnknownStatistic(s.to_string()))?;
            if !(c >= 0.0) || !c.is_finite() {
                return Err(Error::Invalid(format!("dispersion weight must be >= 0, got {c}")));
            }
            return Ok(Statistic::Dispersion(c));
        }
        Statistic::ALL_FIXED
            .iter()
            .copied()
            .find(|st| st.name() == upper)
            .ok_or_else(|| Error::UnknownStatistic(s.to_string()))
    }

    pub fn is_integer(&self) -> bool {
        !matches!(
            self,
            Statistic::Lemma31 | Statistic::Lemma32 | Statistic::Dispersion(_)
        )
    }

    /// Needs the smallest-prime-factor table during accumulation.
    pub fn needs_factorization(&self) -> bool {
        matches!(
            self,
            Statistic::CountA | Statistic::Lemma31 | Statistic::Lemma32
        )
    }

    /// The `x`-dependence of the main term (or of the natural scale).
    pub fn shape(&self, x: f64) -> f64 {
        let l = x.ln();
        match self {
            Statistic::S00 => x * l,
            Statistic::S00C | Statistic::S01 | Statistic::M0 => x,
            Statistic::S02
            | Statistic::S11
            | Statistic::M1
            | Statistic::Supp1
            | Statistic::Dispersion(_) => x / l,
            Statistic::S12
            | Statistic::S22
            | Statistic::M2
            | Statistic::R2Cube
            | Statistic::Supp2 => x / (l * l),
            Statistic::Rieger => x / (l * l * l),
            Statistic::LandauB | Statistic::CountA => x / l.sqrt(),
            Statistic::Lemma31 | Statistic::Lemma32 => l,
        }
    }

    /// Constant in front of [`Statistic::shape`], where one is stated.
    pub fn predicted_constant(&self) -> Option<f64> {
        use std::f64::consts::PI;
        Some(match self {
            Statistic::S00 => 0.25,
            Statistic::S01 => 0.5,
            Statistic::S02 => constants::s02_coefficient(),
            Statistic::S11 => PI / 2.0 + 9.0 / 4.0,
            Statistic::S22 => 2.0 * PI,
            Statistic::M0 => PI / 4.0,
            Statistic::M1 => PI / 2.0,
            Statistic::M2 => PI,
            Statistic::R2Cube => 4.0 * PI,
            Statistic::Supp1 => PI / 2.0,
            Statistic::Supp2 => PI / 2.0,
            Statistic::LandauB => constants::k(),
            Statistic::CountA => 1.0 / (4.0 * constants::k()),
            Statistic::Lemma31 => 1.0 / PI,
            Statistic::Lemma32 => constants::lemma32_coefficient(),
            Statistic::S00C
            | Statistic::S12
            | Statistic::Rieger
            | Statistic::Dispersion(_) => return None,
        })
    }

    /// Raw partial sum scaled by its main-term shape.
    pub fn normalize(&self, raw: f64, x: f64) -> f64 {
        match self {
            Statistic::S00C => (raw - x * x.ln() / 4.0) * 4.0 / x,
            _ => raw / self.shape(x),
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Which object plays the role of `r0` in products.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum R0Convention {
    /// Ordered pairs of positive integers.
    #[default]
    Pair,
    /// `sum_{d | n} chi4(d)`.
    Divisor,
}

impl R0Convention {
    pub fn name(&self) -> &'static str {
        match self {
            R0Convention::Pair => "pair",
            R0Convention::Divisor => "div",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "pair" => Ok(R0Convention::Pair),
            "div" | "divisor" => Ok(R0Convention::Divisor),
            _ => Err(Error::Invalid(format!("unknown r0 convention `{s}`"))),
        }
    }
}

/// Strictly increasing evaluation points, all `>= 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckpointGrid {
    points: Vec<u64>,
}

impl CheckpointGrid {
    pub fn new(points: Vec<u64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Invalid("checkpoint grid is empty".into()));
        }
        if points[0] < 2 {
            return Err(Error::Invalid("checkpoints must be >= 2".into()));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("checkpoints must be strictly increasing".into()));
        }
        Ok(CheckpointGrid { points })
    }

    /// `start, start*ratio, ...` up to `limit`, with `limit` itself appended.
    /// A limit below `start` yields the single point `limit`.
    pub fn geometric(start: u64, ratio: u64, limit: u64) -> Result<Self> {
        if ratio < 2 {
            return Err(Error::Invalid("geometric ratio must be >= 2".into()));
        }
        let mut points = Vec::new();
        let mut x = start.max(2);
        while x <= limit {
            points.push(x);
            match x.checked_mul(ratio) {
                Some(next) => x = next,
                None => break,
            }
        }
        if points.last() != Some(&limit) {
            points.push(limit);
        }
        Self::new(points)
    }

    /// `geometric:R` (from 1000) or `list:x1,x2,...`.
    pub fn parse(spec: &str, limit: u64) -> Result<Self> {
        if let Some(r) = spec.strip_prefix("geometric:") {
            let ratio = r
                .parse()
                .map_err(|_| Error::Invalid(format!("bad grid ratio `{r}`")))?;
            return Self::geometric(1000, ratio, limit);
        }
        if let Some(list) = spec.strip_prefix("list:") {
            let points = list
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse::<u64>()
                        .map_err(|_| Error::Invalid(format!("bad checkpoint `{p}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            let grid = Self::new(points)?;
            if grid.last() > limit {
                return Err(Error::Invalid(format!(
                    "checkpoint {} beyond limit {limit}",
                    grid.last()
                )));
            }
            return Ok(grid);
        }
        Err(Error::Invalid(format!("unknown grid spec `{spec}`")))
    }

    pub fn points(&self) -> &[u64] {
        &self.points
    }

    pub fn last(&self) -> u64 {
        *self.points.last().expect("grid is nonempty")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StatValue {
    Int(i64),
    Real(f64),
}

impl StatValue {
    pub fn as_f64(&self) -> f64 {
        match *self {
            StatValue::Int(v) => v as f64,
            StatValue::Real(v) => v,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match *self {
            StatValue::Int(v) => Some(v),
            StatValue::Real(_) => None,
        }
    }
}

impl fmt::Display for StatValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            StatValue::Int(v) => write!(f, "{v}"),
            StatValue::Real(v) => f.write_str(&fmt_float(v)),
        }
    }
}

/// Fifteen significant digits, scientific notation.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.14e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanValueSeries {
    pub statistic: Statistic,
    pub limit: u64,
    pub points: Vec<u64>,
    pub values: Vec<StatValue>,
}

impl MeanValueSeries {
    pub fn value_at(&self, x: u64) -> Option<StatValue> {
        let i = self.points.iter().position(|&p| p == x)?;
        Some(self.values[i])
    }

    pub fn int_at(&self, x: u64) -> Option<i64> {
        self.value_at(x)?.as_int()
    }

    pub fn f64_at(&self, x: u64) -> Option<f64> {
        Some(self.value_at(x)?.as_f64())
    }
}

#[derive(Debug, Clone, Copy)]
enum Acc {
    Int(i64),
    Real(NeumaierSum),
}

impl Acc {
    fn value(&self) -> StatValue {
        match self {
            Acc::Int(v) => StatValue::Int(*v),
            Acc::Real(s) => StatValue::Real(s.value()),
        }
    }
}

/// `(omega(n), phi(n))` when every prime factor of `n` is 1 mod 4, else `None`.
#[inline]
fn a_profile(n: u64, spf: &SpfTable) -> Option<(u32, u64)> {
    let mut m = n;
    let mut omega = 0;
    let mut phi = 1;
    while m > 1 {
        let p = spf.spf(m);
        if p % 4 != 1 {
            return None;
        }
        omega += 1;
        m /= p;
        phi *= p - 1;
        while m % p == 0 {
            m /= p;
            phi *= p;
        }
    }
    Some((omega, phi))
}

/// Lemma-sum increments `(2^w f_A(n)/n, 2^w f_A(n)/phi(n))` for one `n`.
#[inline]
fn lemma_terms(n: u64, spf: &SpfTable) -> Option<(f64, f64)> {
    a_profile(n, spf).map(|(omega, phi)| {
        let w = (1u64 << omega) as f64;
        (w / n as f64, w / phi as f64)
    })
}

struct Accumulator<'a> {
    stats: Vec<Statistic>,
    accs: Vec<Acc>,
    convention: R0Convention,
    spf: Option<&'a SpfTable>,
    grid: &'a [u64],
    next_point: usize,
    recorded: Vec<Vec<StatValue>>,
    next_n: u64,
}

impl<'a> Accumulator<'a> {
    fn new(
        stats: &[Statistic],
        grid: &'a CheckpointGrid,
        convention: R0Convention,
        spf: Option<&'a SpfTable>,
    ) -> Result<Self> {
        if stats.is_empty() {
            return Err(Error::Invalid("no statistics requested".into()));
        }
        if stats.iter().any(Statistic::needs_factorization) {
            match spf {
                None => {
                    return Err(Error::Invalid(
                        "factorization statistics need a smallest-prime-factor table".into(),
                    ))
                }
                Some(t) if t.limit() < grid.last() => {
                    return Err(Error::Invalid(format!(
                        "smallest-prime-factor table stops at {} before checkpoint {}",
                        t.limit(),
                        grid.last()
                    )))
                }
                _ => {}
            }
        }
        let accs = stats
            .iter()
            .map(|s| {
                if s.is_integer() {
                    Acc::Int(0)
                } else {
                    Acc::Real(NeumaierSum::new())
                }
            })
            .collect();
        Ok(Accumulator {
            stats: stats.to_vec(),
            accs,
            convention,
            spf,
            grid: grid.points(),
            next_point: 0,
            recorded: vec![Vec::with_capacity(grid.points().len()); stats.len()],
            next_n: 1,
        })
    }

    fn done(&self) -> bool {
        self.next_point >= self.grid.len()
    }

    fn push(&mut self, n: u64, t: Tallies) {
        let r0 = match self.convention {
            R0Convention::Pair => t.r0_pair,
            R0Convention::Divisor => t.r0_div,
        } as i64;
        let r1 = t.r1 as i64;
        let r2 = t.r2 as i64;
        let mut lemma: Option<Option<(f64, f64)>> = None;
        for (stat, acc) in self.stats.iter().zip(self.accs.iter_mut()) {
            match acc {
                Acc::Int(v) => {
                    *v += match stat {
                        Statistic::S00 | Statistic::S00C => r0 * r0,
                        Statistic::S01 => r0 * r1,
                        Statistic::S02 => r0 * r2,
                        Statistic::S11 => r1 * r1,
                        Statistic::S12 => r1 * r2,
                        Statistic::S22 => r2 * r2,
                        Statistic::M0 => r0,
                        Statistic::M1 => r1,
                        Statistic::M2 => r2,
                        Statistic::R2Cube => r2 * r2 * r2,
                        Statistic::Rieger => r2 * r2 - 2 * r2,
                        Statistic::Supp1 => (r1 > 0) as i64,
                        Statistic::Supp2 => (r2 > 0) as i64,
                        Statistic::LandauB => (t.r0_div > 0) as i64,
                        Statistic::CountA => {
                            let spf = self.spf.expect("checked in new");
                            (n == 1 || a_profile(n, spf).is_some()) as i64
                        }
                        _ => unreachable!("real statistic in integer slot"),
                    }
                }
                Acc::Real(s) => match stat {
                    Statistic::Lemma31 | Statistic::Lemma32 => {
                        let spf = self.spf.expect("checked in new");
                        let terms = *lemma.get_or_insert_with(|| lemma_terms(n, spf));
                        if let Some((by_n, by_phi)) = terms {
                            s.add(if *stat == Statistic::Lemma31 {
                                by_n
                            } else {
                                by_phi
                            });
                        }
                    }
                    Statistic::Dispersion(c) => {
                        if n >= 2 {
                            let diff = r1 as f64 - c * r0 as f64 / (n as f64).ln();
                            s.add(diff * diff);
                        }
                    }
                    _ => unreachable!("integer statistic in real slot"),
                },
            }
        }
        while self.next_point < self.grid.len() && self.grid[self.next_point] == n {
            for (rec, acc) in self.recorded.iter_mut().zip(&self.accs) {
                rec.push(acc.value());
            }
            self.next_point += 1;
        }
    }

    fn feed(&mut self, block: &RepresentationBlock) -> Result<()> {
        if block.lo != self.next_n {
            return Err(Error::Invalid(format!(
                "blocks must be contiguous from 1: expected lo = {}, got {}",
                self.next_n, block.lo
            )));
        }
        for (n, t) in block.iter() {
            if self.done() {
                break;
            }
            self.push(n, t);
        }
        self.next_n = block.hi;
        Ok(())
    }

    fn finish(self) -> Result<Vec<MeanValueSeries>> {
        if !self.done() {
            return Err(Error::Invalid(format!(
                "checkpoint {} beyond covered range [1, {}]",
                self.grid[self.next_point],
                self.next_n - 1
            )));
        }
        let limit = *self.grid.last().expect("nonempty");
        Ok(self
            .stats
            .into_iter()
            .zip(self.recorded)
            .map(|(statistic, values)| MeanValueSeries {
                statistic,
                limit,
                points: self.grid.to_vec(),
                values,
            })
            .collect())
    }
}

/// Exact partial sums of `stats` at every checkpoint.
///
/// `spf` is required only for `COUNT_A`, `LEMMA31` and `LEMMA32`.
pub fn accumulate<I>(
    blocks: I,
    grid: &CheckpointGrid,
    stats: &[Statistic],
    convention: R0Convention,
    spf: Option<&SpfTable>,
) -> Result<Vec<MeanValueSeries>>
where
    I: IntoIterator<Item = Result<RepresentationBlock>>,
{
    let mut acc = Accumulator::new(stats, grid, convention, spf)?;
    for block in blocks {
        acc.feed(&block?)?;
        if acc.done() {
            break;
        }
    }
    acc.finish()
}

fn two<I>(
    blocks: I,
    grid: &CheckpointGrid,
    pair: [Statistic; 2],
    convention: R0Convention,
    spf: Option<&SpfTable>,
) -> Result<(MeanValueSeries, MeanValueSeries)>
where
    I: IntoIterator<Item = Result<RepresentationBlock>>,
{
    let mut out = accumulate(blocks, grid, &pair, convention, spf)?.into_iter();
    let a = out.next().expect("two series");
    let b = out.next().expect("two series");
    Ok((a, b))
}

/// `#{n <= x : r1(n) > 0}` and `#{n <= x : r2(n) > 0}`.
pub fn support_counts<I>(blocks: I, grid: &CheckpointGrid) -> Result<(MeanValueSeries, MeanValueSeries)>
where
    I: IntoIterator<Item = Result<RepresentationBlock>>,
{
    two(
        blocks,
        grid,
        [Statistic::Supp1, Statistic::Supp2],
        R0Convention::Pair,
        None,
    )
}

/// `sum b(n)` and `#{n <= x : n in A}`.
pub fn landau_counts<I>(
    blocks: I,
    grid: &CheckpointGrid,
    spf: &SpfTable,
) -> Result<(MeanValueSeries, MeanValueSeries)>
where
    I: IntoIterator<Item = Result<RepresentationBlock>>,
{
    two(
        blocks,
        grid,
        [Statistic::LandauB, Statistic::CountA],
        R0Convention::Pair,
        Some(spf),
    )
}

/// `sum_{2 <= n <= x} (r1(n) - c r0(n) / log n)^2`.
pub fn dispersion<I>(
    c: f64,
    blocks: I,
    grid: &CheckpointGrid,
    convention: R0Convention,
) -> Result<MeanValueSeries>
where
    I: IntoIterator<Item = Result<RepresentationBlock>>,
{
    if !(c >= 0.0) || !c.is_finite() {
        return Err(Error::Invalid(format!("dispersion weight must be >= 0, got {c}")));
    }
    Ok(accumulate(blocks, grid, &[Statistic::Dispersion(c)], convention, None)?
        .pop()
        .expect("one series"))
}

/// `sum 2^w(n) f_A(n) / n` and `sum 2^w(n) f_A(n) / phi(n)` straight from the table.
pub fn lemma_sums(
    limit: u64,
    grid: &CheckpointGrid,
    spf: &SpfTable,
) -> Result<(MeanValueSeries, MeanValueSeries)> {
    if limit > spf.limit() {
        return Err(Error::Invalid(format!(
            "limit {limit} exceeds smallest-prime-factor table {}",
            spf.limit()
        )));
    }
    if grid.last() > limit {
        return Err(Error::Invalid(format!(
            "checkpoint {} beyond limit {limit}",
            grid.last()
        )));
    }
    let mut by_n = NeumaierSum::new();
    let mut by_phi = NeumaierSum::new();
    let mut v31 = Vec::new();
    let mut v32 = Vec::new();
    let mut points = grid.points().iter().peekable();
    for n in 1..=grid.last() {
        if let Some((a, b)) = lemma_terms(n, spf) {
            by_n.add(a);
            by_phi.add(b);
        }
        if points.peek() == Some(&&n) {
            points.next();
            v31.push(StatValue::Real(by_n.value()));
            v32.push(StatValue::Real(by_phi.value()));
        }
    }
    let series = |statistic, values| MeanValueSeries {
        statistic,
        limit,
        points: grid.points().to_vec(),
        values,
    };
    Ok((series(Statistic::Lemma31, v31), series(Statistic::Lemma32, v32)))
}

/// `S12` split into diagonal (`{a,p} = {q,r}`) and off-diagonal solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartitionReport {
    pub x: u64,
    pub s12: i64,
    pub diagonal: i64,
    pub offdiag: i64,
    pub s22: i64,
}

pub fn partition_s12(limit: u64) -> Result<PartitionReport> {
    partition_s12_with(SieveConfig::new(limit))
}

/// `S12` and `S22` come from the sieve; the diagonal is counted directly over
/// prime pairs, and the off-diagonal part is the difference.
pub fn partition_s12_with(cfg: SieveConfig) -> Result<PartitionReport> {
    let limit = cfg.limit;
    if limit > PARTITION_MAX_LIMIT {
        return Err(Error::Capacity {
            what: "S12 partition",
            requested: limit,
            capacity: PARTITION_MAX_LIMIT,
        });
    }
    if limit < 2 {
        return Err(Error::Invalid("partition needs limit >= 2".into()));
    }
    let grid = CheckpointGrid::new(vec![limit])?;
    let (s12, s22) = two(
        sieve_all(cfg)?,
        &grid,
        [Statistic::S12, Statistic::S22],
        R0Convention::Pair,
        None,
    )?;
    let s12 = s12.values[0].as_int().expect("integer statistic");
    let s22 = s22.values[0].as_int().expect("integer statistic");

    let primes = sieve_primes(isqrt(limit).max(2))?;
    let ps = primes.primes();
    let mut diagonal = 0i64;
    for &p in ps {
        for &q in ps {
            if p * p + q * q > limit {
                break;
            }
            diagonal += if p == q { 1 } else { 2 };
        }
    }
    Ok(PartitionReport {
        x: limit,
        s12,
        diagonal,
        offdiag: s12 - diagonal,
        s22,
    })
}

/// Divisor sums of `chi4` over the small, middle and large ranges around
/// `sqrt(n)` with window `log^A x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DivisorSplit {
    pub sigma1: i64,
    pub sigma2: i64,
    pub sigma3: i64,
}

impl DivisorSplit {
    pub fn total(&self) -> i64 {
        self.sigma1 + self.sigma2 + self.sigma3
    }
}

/// Small range `d <= sqrt(n)/L`, middle `sqrt(n)/L < d <= sqrt(n) L`, large
/// `d > sqrt(n) L`, where `L = log^A x`.
pub fn divisor_split(n: u64, a_exponent: f64, x: u64) -> Result<DivisorSplit> {
    if n == 0 || n > x {
        return Err(Error::Invalid(format!("divisor split needs 1 <= n <= x, got n = {n}, x = {x}")));
    }
    if x < 2 || !(a_exponent >= 0.0) {
        return Err(Error::Invalid(format!(
            "divisor split needs x >= 2 and A >= 0, got x = {x}, A = {a_exponent}"
        )));
    }
    let window = (x as f64).ln().powf(a_exponent);
    let root = (n as f64).sqrt();
    let (small, large) = (root / window, root * window);
    let mut split = DivisorSplit {
        sigma1: 0,
        sigma2: 0,
        sigma3: 0,
    };
    let mut add = |d: u64| {
        let c = chi4(d) as i64;
        let df = d as f64;
        if df <= small {
            split.sigma1 += c;
        } else if df <= large {
            split.sigma2 += c;
        } else {
            split.sigma3 += c;
        }
    };
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            add(d);
            if d * d != n {
                add(n / d);
            }
        }
        d += 1;
    }
    Ok(split)
}

/// Writes `series` as CSV, rows ordered by checkpoint then by statistic.
pub fn write_csv<W: Write>(series: &[MeanValueSeries], mut w: W) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    let Some(first) = series.first() else {
        return Ok(());
    };
    for (i, &x) in first.points.iter().enumerate() {
        for s in series {
            let raw = s.values[i];
            let xf = x as f64;
            let normalized = s.statistic.normalize(raw.as_f64(), xf);
            let (predicted, deviation) = match s.statistic.predicted_constant() {
                Some(c) => (fmt_float(c), fmt_float(normalized - c)),
                None => (String::new(), String::new()),
            };
            writeln!(
                w,
                "{x},{},{raw},{},{predicted},{deviation}",
                s.statistic,
                fmt_float(normalized)
            )?;
        }
    }
    Ok(())
}
