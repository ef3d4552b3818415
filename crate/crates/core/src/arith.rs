//! Integer-valued polynomials, the prime sieve and lacunary index sets.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;

use crate::error::{domain, Error, Result};

/// Integer-valued polynomial `P(n) = Σ_j c_j·C(n, j)` in the binomial basis.
///
/// Every integer combination of binomial coefficients maps ℤ to ℤ, and every
/// integer-valued polynomial has such a representation, so integrality is a
/// property of the type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntPolynomial {
    coeffs: Vec<i64>,
}

impl IntPolynomial {
    pub fn from_binomial(mut coeffs: Vec<i64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0);
        }
        Self { coeffs }
    }

    /// Converts `Σ a_k n^k` with integer `a_k` through
    /// `n^k = Σ_j S(k, j)·j!·C(n, j)`.
    pub fn from_monomial(coeffs: &[i64]) -> Result<Self> {
        let deg = coeffs.len();
        // surj[k][j] = S(k, j)·j!, the number of surjections k → j.
        let mut surj = vec![vec![0i128; deg.max(1)]; deg.max(1)];
        if deg > 0 {
            surj[0][0] = 1;
        }
        for k in 1..deg {
            for j in 1..=k {
                let a = surj[k - 1][j - 1].checked_mul(j as i128);
                let b = surj[k - 1][j].checked_mul(j as i128);
                surj[k][j] = a
                    .zip(b)
                    .and_then(|(a, b)| a.checked_add(b))
                    .ok_or_else(|| overflow("monomial conversion"))?;
            }
        }
        let mut out = vec![0i64; deg.max(1)];
        for (j, slot) in out.iter_mut().enumerate() {
            let mut acc = 0i128;
            for (k, &a) in coeffs.iter().enumerate().skip(j) {
                acc = surj[k][j]
                    .checked_mul(a as i128)
                    .and_then(|t| acc.checked_add(t))
                    .ok_or_else(|| overflow("monomial conversion"))?;
            }
            *slot = i64::try_from(acc).map_err(|_| overflow("monomial conversion"))?;
        }
        Ok(Self::from_binomial(out))
    }

    /// `P(n) = n`.
    pub fn identity() -> Self {
        Self::from_binomial(vec![0, 1])
    }

    /// `P(n) = a·n`.
    pub fn linear(a: i64) -> Self {
        Self::from_binomial(vec![0, a])
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_constant(&self) -> bool {
        self.degree() == 0
    }

    pub fn negate(&self) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.checked_neg().ok_or_else(|| overflow("negation")))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_binomial(coeffs))
    }

    /// Exact value at `n`, or a range error when it leaves `i64`.
    pub fn eval(&self, n: i64) -> Result<i64> {
        let n = n as i128;
        let mut binom: i128 = 1;
        let mut acc: i128 = 0;
        for (j, &c) in self.coeffs.iter().enumerate() {
            if j > 0 {
                // C(n, j) = C(n, j−1)·(n − j + 1)/j, the product is divisible by j.
                binom = binom
                    .checked_mul(n - j as i128 + 1)
                    .ok_or_else(|| overflow("binomial coefficient"))?
                    / j as i128;
            }
            if c != 0 {
                acc = binom
                    .checked_mul(c as i128)
                    .and_then(|t| acc.checked_add(t))
                    .ok_or_else(|| overflow("polynomial value"))?;
            }
        }
        i64::try_from(acc).map_err(|_| overflow("polynomial value"))
    }

    /// Values `P(1), …, P(n_max)`.
    pub fn values_up_to(&self, n_max: usize) -> Result<Vec<i64>> {
        (1..=n_max as i64).map(|n| self.eval(n)).collect()
    }
}

fn overflow(what: &str) -> Error {
    Error::Range(format!("integer overflow in {what}"))
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "binom:[{}]", body.join(","))
    }
}

/// Parses `binom:[c0,c1,...]` or `mono:[a0,a1,...]`.
impl FromStr for IntPolynomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected binom:[..] or mono:[..], got {s:?}")))?;
        let inner = rest
            .trim()
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(format!("missing brackets in {s:?}")))?;
        let coeffs = if inner.trim().is_empty() {
            Vec::new()
        } else {
            inner
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<i64>()
                        .map_err(|e| Error::Parse(format!("bad coefficient {t:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?
        };
        match kind.trim() {
            "binom" => Ok(Self::from_binomial(coeffs)),
            "mono" => Self::from_monomial(&coeffs),
            other => Err(Error::Parse(format!("unknown polynomial basis {other:?}"))),
        }
    }
}

/// Primes up to a ceiling with the prime-counting function `π_N`.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    ceiling: u64,
    primes: Vec<u64>,
    pi: Vec<u32>,
}

/// Sieve of Eratosthenes up to `ceiling` inclusive.
pub fn sieve(ceiling: u64) -> Result<PrimeTable> {
    if ceiling < 2 {
        return domain(format!("sieve ceiling must be >= 2, got {ceiling}"));
    }
    let n = ceiling as usize;
    let mut composite = vec![false; n + 1];
    let mut i = 2usize;
    while i * i <= n {
        if !composite[i] {
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
        i += 1;
    }
    let mut primes = Vec::new();
    let mut pi = Vec::with_capacity(n + 1);
    let mut count = 0u32;
    for (k, &c) in composite.iter().enumerate() {
        if k >= 2 && !c {
            primes.push(k as u64);
            count += 1;
        }
        pi.push(count);
    }
    Ok(PrimeTable { ceiling, primes, pi })
}

impl PrimeTable {
    pub fn ceiling(&self) -> u64 {
        self.ceiling
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// `π_N`; panics when `n` exceeds the ceiling.
    pub fn pi(&self, n: u64) -> u32 {
        self.pi[n as usize]
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && self.pi[n as usize] != self.pi[n as usize - 1]
    }

    /// Primes `p ≤ n`.
    pub fn primes_up_to(&self, n: u64) -> &[u64] {
        &self.primes[..self.pi(n.min(self.ceiling)) as usize]
    }
}

/// `S_ρ = {⌊ρ^m⌋ : m ≥ 1}` truncated at a ceiling, deduplicated.
#[derive(Debug, Clone, PartialEq)]
pub struct LacunarySet {
    rho: f64,
    ceiling: u64,
    members: Vec<u64>,
}

pub fn lacunary(rho: f64, ceiling: u64) -> Result<LacunarySet> {
    if !(rho > 1.0) || !rho.is_finite() {
        return domain(format!("lacunary ratio must be > 1, got {rho}"));
    }
    let mut members: Vec<u64> = Vec::new();
    for m in 1i32.. {
        let v = floor_power(rho, m);
        if v > ceiling as f64 {
            break;
        }
        let v = v as u64;
        if members.last().is_none_or(|&last| v > last) {
            members.push(v);
        }
    }
    Ok(LacunarySet { rho, ceiling, members })
}

/// `⌊ρ^m⌋`, recomputed exactly when the float power is within 1e−9 of an
/// integer.
fn floor_power(rho: f64, m: i32) -> f64 {
    let x = rho.powi(m);
    let nearest = x.round();
    if (x - nearest).abs() > 1e-9 * nearest.max(1.0) || nearest > 2f64.powi(62) {
        return x.floor();
    }
    // ρ = mant·2^exp exactly; ρ^m ≥ c ⇔ mant^m·2^{exp·m} ≥ c.
    let (mant, exp) = decompose(rho);
    let lhs = BigUint::from(mant).pow(m as u32);
    let c = BigUint::from(nearest as u64);
    let shift = exp as i64 * m as i64;
    let at_least = if shift >= 0 {
        (lhs << shift as usize) >= c
    } else {
        lhs >= (c << (-shift) as usize)
    };
    if at_least {
        nearest
    } else {
        nearest - 1.0
    }
}

/// Writes a finite positive double as `mant·2^exp` with odd `mant`.
fn decompose(x: f64) -> (u64, i32) {
    let bits = x.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (mut mant, mut exp) = if raw_exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), raw_exp - 1075)
    };
    let tz = mant.trailing_zeros();
    mant >>= tz;
    exp += tz as i32;
    (mant, exp)
}

impl LacunarySet {
    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn ceiling(&self) -> u64 {
        self.ceiling
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn contains(&self, n: u64) -> bool {
        self.members.binary_search(&n).is_ok()
    }

    /// Members in `lo..=hi`.
    pub fn between(&self, lo: u64, hi: u64) -> &[u64] {
        let a = self.members.partition_point(|&v| v < lo);
        let b = self.members.partition_point(|&v| v <= hi);
        &self.members[a..b.max(a)]
    }
}
