//! Prime generation and segmented tallies of r0, r1, r2.
//!
//! For a block `[lo, hi)` every `n` receives
//!
//! * `r0_pair(n)`: ordered pairs `(a, b)`, `a, b >= 1`, with `a^2 + b^2 = n`,
//! * `r0_div(n)`:  `sum_{d | n} chi4(d)`, computed from divisor pairs `d <= sqrt(n)`,
//! * `r1(n)`:      ordered pairs `(a, p)` with `p` prime,
//! * `r2(n)`:      ordered pairs `(p, q)` of primes.
//!
//! The two r0 conventions differ exactly by `[n is a square]`.

use std::collections::VecDeque;
use std::io::{self, Read, Write};

use rayon::prelude::*;

use crate::arith::isqrt;
use crate::error::{Error, Result};

pub const MAX_PRIME_LIMIT: u64 = 1 << 32;

/// Largest `n` the block sieve accepts.
pub const MAX_SIEVE_LIMIT: u64 = 1 << 40;

pub const DUMP_MAGIC: &[u8; 4] = b"PCTY";
pub const DUMP_VERSION: u32 = 1;

/// All primes up to `limit` with an odd-only membership bitmap.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
    odd_bits: Vec<u64>,
}

impl PrimeTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    #[inline]
    pub fn is_prime(&self, n: u64) -> bool {
        if n > self.limit || n < 2 {
            return false;
        }
        if n % 2 == 0 {
            return n == 2;
        }
        let i = (n / 2) as usize;
        self.odd_bits[i / 64] >> (i % 64) & 1 == 1
    }

    /// Primes in the closed interval `[from, to]`.
    pub fn range(&self, from: u64, to: u64) -> &[u64] {
        if from > to {
            return &[];
        }
        let i = self.primes.partition_point(|&p| p < from);
        let j = self.primes.partition_point(|&p| p <= to);
        &self.primes[i..j.max(i)]
    }
}

/// Odd-only sieve of Eratosthenes up to and including `limit`.
pub fn sieve_primes(limit: u64) -> Result<PrimeTable> {
    if limit < 2 {
        return Err(Error::OutOfRange {
            what: "prime limit",
            value: limit,
            min: 2,
            max: MAX_PRIME_LIMIT,
        });
    }
    if limit > MAX_PRIME_LIMIT {
        return Err(Error::Capacity {
            what: "prime table",
            requested: limit,
            capacity: MAX_PRIME_LIMIT,
        });
    }
    // bit i stands for 2i+1
    let nbits = (limit / 2 + 1) as usize;
    let mut bits = vec![!0u64; nbits.div_ceil(64)];
    let clear = |bits: &mut Vec<u64>, i: usize| bits[i / 64] &= !(1u64 << (i % 64));
    clear(&mut bits, 0);
    let mut p = 3u64;
    while p * p <= limit {
        let i = (p / 2) as usize;
        if bits[i / 64] >> (i % 64) & 1 == 1 {
            let mut m = p * p;
            while m <= limit {
                clear(&mut bits, (m / 2) as usize);
                m += 2 * p;
            }
        }
        p += 2;
    }
    // drop bits above limit
    for i in nbits..bits.len() * 64 {
        clear(&mut bits, i);
    }
    if limit % 2 == 0 {
        // 2i+1 for i = limit/2 exceeds limit
        clear(&mut bits, (limit / 2) as usize);
    }
    let mut primes = vec![2u64];
    for (w, &word) in bits.iter().enumerate() {
        let mut x = word;
        while x != 0 {
            let b = x.trailing_zeros() as u64;
            primes.push(2 * (w as u64 * 64 + b) + 1);
            x &= x - 1;
        }
    }
    Ok(PrimeTable {
        limit,
        primes,
        odd_bits: bits,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SieveConfig {
    pub limit: u64,
    pub block_size: u64,
    pub thread_count: usize,
}

impl SieveConfig {
    pub const DEFAULT_BLOCK_SIZE: u64 = 1 << 18;

    pub fn new(limit: u64) -> Self {
        SieveConfig {
            limit,
            block_size: Self::DEFAULT_BLOCK_SIZE,
            thread_count: 1,
        }
    }

    pub fn with_block_size(mut self, block_size: u64) -> Self {
        self.block_size = block_size;
        self
    }

    pub fn with_threads(mut self, thread_count: usize) -> Self {
        self.thread_count = thread_count;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.limit < 1 {
            return Err(Error::Invalid("sieve limit must be >= 1".into()));
        }
        if self.block_size < 2 {
            return Err(Error::Invalid("block size must be >= 2".into()));
        }
        if self.thread_count < 1 {
            return Err(Error::Invalid("thread count must be >= 1".into()));
        }
        if self.limit > MAX_SIEVE_LIMIT {
            return Err(Error::Capacity {
                what: "sieve limit",
                requested: self.limit,
                capacity: MAX_SIEVE_LIMIT,
            });
        }
        Ok(())
    }

    pub fn block_count(&self) -> u64 {
        self.limit.div_ceil(self.block_size)
    }

    /// Bounds `[lo, hi)` of the `i`-th block.
    pub fn block_bounds(&self, i: u64) -> (u64, u64) {
        let lo = 1 + i * self.block_size;
        let hi = (lo + self.block_size).min(self.limit + 1);
        (lo, hi)
    }
}

/// Per-`n` tallies over the half-open range `[lo, hi)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepresentationBlock {
    pub lo: u64,
    pub hi: u64,
    pub r0_pair: Vec<u16>,
    pub r0_div: Vec<u16>,
    pub r1: Vec<u16>,
    pub r2: Vec<u16>,
}

/// The four tallies of one integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Tallies {
    pub r0_pair: u16,
    pub r0_div: u16,
    pub r1: u16,
    pub r2: u16,
}

impl RepresentationBlock {
    pub fn len(&self) -> usize {
        (self.hi - self.lo) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.hi == self.lo
    }

    pub fn get(&self, n: u64) -> Option<Tallies> {
        if n < self.lo || n >= self.hi {
            return None;
        }
        let i = (n - self.lo) as usize;
        Some(Tallies {
            r0_pair: self.r0_pair[i],
            r0_div: self.r0_div[i],
            r1: self.r1[i],
            r2: self.r2[i],
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, Tallies)> + '_ {
        (0..self.len()).map(move |i| {
            (
                self.lo + i as u64,
                Tallies {
                    r0_pair: self.r0_pair[i],
                    r0_div: self.r0_div[i],
                    r1: self.r1[i],
                    r2: self.r2[i],
                },
            )
        })
    }

    /// Little-endian dump: magic, version, lo, hi, then r0_pair, r0_div, r1, r2.
    pub fn write_dump<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(DUMP_MAGIC)?;
        w.write_all(&DUMP_VERSION.to_le_bytes())?;
        w.write_all(&self.lo.to_le_bytes())?;
        w.write_all(&self.hi.to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.len() * 2);
        for arr in [&self.r0_pair, &self.r0_div, &self.r1, &self.r2] {
            buf.clear();
            for v in arr.iter() {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn read_dump<R: Read>(mut r: R) -> io::Result<Self> {
        let bad = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != DUMP_MAGIC {
            return Err(bad(format!("bad magic {magic:?}")));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let version = u32::from_le_bytes(b4);
        if version != DUMP_VERSION {
            return Err(bad(format!("unsupported dump version {version}")));
        }
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let lo = u64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let hi = u64::from_le_bytes(b8);
        if lo < 1 || hi <= lo || hi - lo > u32::MAX as u64 {
            return Err(bad(format!("bad block bounds [{lo}, {hi})")));
        }
        let len = (hi - lo) as usize;
        let mut read_array = || -> io::Result<Vec<u16>> {
            let mut raw = vec![0u8; len * 2];
            r.read_exact(&mut raw)?;
            Ok(raw
                .chunks_exact(2)
                .map(|c| u16::from_le_bytes([c[0], c[1]]))
                .collect())
        };
        let r0_pair = read_array()?;
        let r0_div = read_array()?;
        let r1 = read_array()?;
        let r2 = read_array()?;
        Ok(RepresentationBlock {
            lo,
            hi,
            r0_pair,
            r0_div,
            r1,
            r2,
        })
    }
}

fn narrow(tally: &'static str, lo: u64, counts: Vec<u32>) -> Result<Vec<u16>> {
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            u16::try_from(c).map_err(|_| Error::Overflow {
                tally,
                n: lo + i as u64,
            })
        })
        .collect()
}

/// Tallies for `[lo, hi)`; `primes` must reach `isqrt(hi - 1)`.
pub fn sieve_block(
    cfg: &SieveConfig,
    lo: u64,
    hi: u64,
    primes: &PrimeTable,
) -> Result<RepresentationBlock> {
    if lo < 1 || lo >= hi || hi > cfg.limit + 1 {
        return Err(Error::Invalid(format!(
            "block [{lo}, {hi}) not inside [1, {}]",
            cfg.limit
        )));
    }
    let root = isqrt(hi - 1);
    if primes.limit() < root {
        return Err(Error::Invalid(format!(
            "prime table reaches {} but block needs {root}",
            primes.limit()
        )));
    }
    let len = (hi - lo) as usize;
    let mut r0 = vec![0u32; len];
    let mut r1 = vec![0u32; len];
    let mut r2 = vec![0u32; len];

    let mut a = 1u64;
    while a * a < hi {
        let a2 = a * a;
        let b_min = if lo > a2 {
            let need = lo - a2;
            let s = isqrt(need);
            if s * s == need {
                s
            } else {
                s + 1
            }
        } else {
            1
        }
        .max(1);
        let b_max = isqrt(hi - 1 - a2);
        if b_min <= b_max {
            for b in b_min..=b_max {
                r0[(a2 + b * b - lo) as usize] += 1;
            }
            let a_prime = primes.is_prime(a);
            for &p in primes.range(b_min, b_max) {
                let i = (a2 + p * p - lo) as usize;
                r1[i] += 1;
                if a_prime {
                    r2[i] += 1;
                }
            }
        }
        a += 1;
    }

    // Divisor pairs (d, k) with d <= k and d*k in [lo, hi).
    let mut div = vec![0i32; len];
    let mut d = 1u64;
    while d * d < hi {
        let cd = crate::arith::chi4(d) as i32;
        let k0 = d.max(lo.div_ceil(d));
        let mut k = k0;
        let mut m = d * k;
        while m < hi {
            let i = (m - lo) as usize;
            div[i] += if k == d {
                cd
            } else {
                cd + crate::arith::chi4(k) as i32
            };
            k += 1;
            m += d;
        }
        d += 1;
    }
    let r0_div: Vec<u32> = div
        .into_iter()
        .map(|v| {
            debug_assert!(v >= 0);
            v as u32
        })
        .collect();

    Ok(RepresentationBlock {
        lo,
        hi,
        r0_pair: narrow("r0_pair", lo, r0)?,
        r0_div: narrow("r0_div", lo, r0_div)?,
        r1: narrow("r1", lo, r1)?,
        r2: narrow("r2", lo, r2)?,
    })
}

/// Ordered stream of blocks covering `[1, limit]`.
///
/// Up to `thread_count` blocks are computed concurrently; results are
/// buffered and handed out in ascending order.
pub struct BlockStream {
    cfg: SieveConfig,
    primes: PrimeTable,
    pool: rayon::ThreadPool,
    next: u64,
    buffer: VecDeque<Result<RepresentationBlock>>,
    failed: bool,
}

impl BlockStream {
    pub fn config(&self) -> &SieveConfig {
        &self.cfg
    }

    pub fn primes(&self) -> &PrimeTable {
        &self.primes
    }

    fn refill(&mut self) {
        let total = self.cfg.block_count();
        if self.next >= total {
            return;
        }
        let batch = (self.cfg.thread_count as u64 * 2).max(1);
        let end = (self.next + batch).min(total);
        let cfg = self.cfg;
        let primes = &self.primes;
        let start = self.next;
        let results: Vec<Result<RepresentationBlock>> = self.pool.install(|| {
            (start..end)
                .into_par_iter()
                .map(|i| {
                    let (lo, hi) = cfg.block_bounds(i);
                    sieve_block(&cfg, lo, hi, primes)
                })
                .collect()
        });
        self.buffer.extend(results);
        self.next = end;
    }
}

impl Iterator for BlockStream {
    type Item = Result<RepresentationBlock>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        if self.buffer.is_empty() {
            self.refill();
        }
        let item = self.buffer.pop_front()?;
        if item.is_err() {
            self.failed = true;
            self.buffer.clear();
        }
        Some(item)
    }
}

pub fn sieve_all(cfg: SieveConfig) -> Result<BlockStream> {
    cfg.validate()?;
    let primes = sieve_primes(isqrt(cfg.limit).max(2))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.thread_count)
        .build()
        .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    Ok(BlockStream {
        cfg,
        primes,
        pool,
        next: 0,
        buffer: VecDeque::new(),
        failed: false,
    })
}

/// Collects every block of `cfg` into flat per-n arrays (index `n - 1`).
pub fn sieve_flat(cfg: SieveConfig) -> Result<RepresentationBlock> {
    let mut out = RepresentationBlock {
        lo: 1,
        hi: cfg.limit + 1,
        r0_pair: Vec::with_capacity(cfg.limit as usize),
        r0_div: Vec::with_capacity(cfg.limit as usize),
        r1: Vec::with_capacity(cfg.limit as usize),
        r2: Vec::with_capacity(cfg.limit as usize),
    };
    for block in sieve_all(cfg)? {
        let block = block?;
        out.r0_pair.extend_from_slice(&block.r0_pair);
        out.r0_div.extend_from_slice(&block.r0_div);
        out.r1.extend_from_slice(&block.r1);
        out.r2.extend_from_slice(&block.r2);
    }
    Ok(out)
}
