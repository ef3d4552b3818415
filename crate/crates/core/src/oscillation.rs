//! Oscillation sums over block partitions, the adversarial block
//! construction for non-convergent families, and the lacunary sandwich.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{lacunary, IntPolynomial, LacunarySet, PrimeTable};
use crate::averaging::{system_avg_sweep, AverageSpec, IndexSet};
use crate::dynsys::{FiniteSystem, Observable};
use crate::error::{domain, precondition, Error, Result};
use crate::report::InequalityReport;
use crate::signal::Signal;

/// Cuts `N_1 < N_2 < … < N_{K+1}`; block `k` is `[N_k, N_{k+1}]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPartition {
    cuts: Vec<u64>,
}

impl BlockPartition {
    pub fn new(cuts: Vec<u64>) -> Result<Self> {
        if cuts.len() < 2 {
            return precondition("a partition needs at least two cuts");
        }
        if cuts[0] == 0 {
            return domain("cuts must be positive");
        }
        if cuts.windows(2).any(|w| w[0] >= w[1]) {
            return domain(format!("cuts must be strictly increasing: {cuts:?}"));
        }
        Ok(BlockPartition { cuts })
    }

    /// The partition with no blocks.
    pub fn empty() -> Self {
        BlockPartition { cuts: Vec::new() }
    }

    /// `K` blocks from 1 to `top` with roughly constant ratio
    /// `q = top^{1/K}`: `N_j = max(N_{j−1} + 1, round(q^{j−1}))`, `N_{K+1} = top`.
    pub fn geometric(k: usize, top: u64) -> Result<Self> {
        if k == 0 {
            return domain("K must be >= 1");
        }
        if top < k as u64 + 1 {
            return domain(format!("top {top} leaves no room for {k} blocks"));
        }
        let q = (top as f64).powf(1.0 / k as f64);
        let mut cuts = vec![1u64];
        for j in 1..k {
            let prev = *cuts.last().unwrap();
            let v = q.powi(j as i32).round() as u64;
            // leave room for the remaining cuts below top
            let cap = top - (k - j) as u64;
            cuts.push(v.max(prev + 1).min(cap));
        }
        cuts.push(top);
        Self::new(cuts)
    }

    /// Cuts `round(ratio^j)` for `j = 0..=K`, bumped to stay strictly
    /// increasing.
    pub fn powers(ratio: f64, k: usize) -> Result<Self> {
        if !(ratio > 1.0) || !ratio.is_finite() {
            return domain(format!("ratio must be > 1, got {ratio}"));
        }
        if k == 0 {
            return domain("K must be >= 1");
        }
        let mut cuts: Vec<u64> = Vec::with_capacity(k + 1);
        for j in 0..=k {
            let v = ratio.powi(j as i32).round();
            if v > 1e15 {
                return domain("cuts overflow");
            }
            let v = v as u64;
            cuts.push(match cuts.last() {
                Some(&prev) => v.max(prev + 1),
                None => v.max(1),
            });
        }
        Self::new(cuts)
    }

    pub fn cuts(&self) -> &[u64] {
        &self.cuts
    }

    /// Number of blocks `K`.
    pub fn k(&self) -> usize {
        self.cuts.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.k() == 0
    }

    /// `(N_k, N_{k+1})` for the zero-based block `k`.
    pub fn block(&self, k: usize) -> (u64, u64) {
        (self.cuts[k], self.cuts[k + 1])
    }

    pub fn top(&self) -> u64 {
        self.cuts.last().copied().unwrap_or(0)
    }

    /// Whether `2·N_k < N_{k+1}` for every block.
    pub fn is_separated(&self) -> bool {
        self.cuts.windows(2).all(|w| 2 * w[0] < w[1])
    }

    /// The partition with `cut` inserted; `None` if it is already a cut or
    /// falls outside `(N_1, N_{K+1})`.
    pub fn refine(&self, cut: u64) -> Option<Self> {
        if self.is_empty() || cut <= self.cuts[0] || cut >= self.top() {
            return None;
        }
        let pos = self.cuts.binary_search(&cut).err()?;
        let mut cuts = self.cuts.clone();
        cuts.insert(pos, cut);
        Some(BlockPartition { cuts })
    }
}

/// `2,8,32` for explicit cuts or `auto:<ratio>^<K>` for [`BlockPartition::powers`].
impl FromStr for BlockPartition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("auto:") {
            let (ratio, k) = rest
                .split_once('^')
                .ok_or_else(|| Error::Parse(format!("expected auto:<ratio>^<K>, got {s}")))?;
            let ratio: f64 = ratio
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad ratio in {s}")))?;
            let k: usize = k.trim().parse().map_err(|_| Error::Parse(format!("bad K in {s}")))?;
            return Self::powers(ratio, k);
        }
        let cuts = s
            .split(',')
            .map(|c| c.trim().parse::<u64>().map_err(|_| Error::Parse(format!("bad cut {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(cuts)
    }
}

impl fmt::Display for BlockPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.cuts.iter().map(u64::to_string).collect();
        write!(f, "{}", parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationReport {
    #[serde(rename = "K")]
    pub k: usize,
    pub per_block: Vec<f64>,
    pub total: f64,
    pub input_norm: f64,
    #[serde(rename = "ratio_sqrtK")]
    pub ratio_sqrt_k: f64,
}

impl OscillationReport {
    fn from_blocks(per_block: Vec<f64>, input_norm: f64) -> Self {
        let k = per_block.len();
        let total: f64 = per_block.iter().sum();
        let ratio_sqrt_k = if input_norm > 0.0 && k > 0 {
            total / ((k as f64).sqrt() * input_norm)
        } else {
            0.0
        };
        OscillationReport {
            k,
            per_block,
            total,
            input_norm,
            ratio_sqrt_k,
        }
    }
}

/// `sup_{N ∈ S_ρ ∩ [lo, hi]} |A_N − A_hi|` from a table of averages
/// indexed by `N − 1`; undefined averages and an empty admissible set
/// contribute 0.
pub fn block_sup(avgs: &[Option<Complex64>], lo: u64, hi: u64, set: &LacunarySet) -> f64 {
    let Some(reference) = avgs[hi as usize - 1] else {
        return 0.0;
    };
    set.between(lo, hi)
        .iter()
        .filter_map(|&n| avgs[n as usize - 1])
        .map(|a| (a - reference).norm())
        .fold(0.0, f64::max)
}

/// `Σ_k ‖sup_{N ∈ S_ρ, N_k ≤ N ≤ N_{k+1}} |A_N s − A_{N_{k+1}} s|‖_{ℓ²(ℤ)}`
/// with `A_N s(x) = (1/N)·Σ_{n=1}^{N} s(x + n)`.
pub fn oscillation_sum(s: &Signal, blocks: &BlockPartition, rho: f64) -> Result<OscillationReport> {
    if blocks.is_empty() {
        return precondition("oscillation sum needs at least one block");
    }
    let set = lacunary(rho, blocks.top())?;
    let input_norm = s.norm(2.0)?;
    if s.is_zero() {
        return Ok(OscillationReport::from_blocks(vec![0.0; blocks.k()], input_norm));
    }
    let top = blocks.top() as i64;
    // A_N s(x) can be nonzero only for x in [lo − top, hi − 1]
    let (lo, hi) = (s.offset(), s.end());
    let x_start = lo - top;
    let len = (hi - x_start) as usize + top as usize;
    // prefix[t] = Σ_{u < x_start + t} s(u)
    let mut prefix = Vec::with_capacity(len + 1);
    let mut acc = Complex64::new(0.0, 0.0);
    prefix.push(acc);
    for t in 0..len as i64 {
        acc += s.get(x_start + t);
        prefix.push(acc);
    }
    let avg = |x: i64, n: u64| -> Complex64 {
        let i = (x - x_start) as usize;
        (prefix[i + n as usize + 1] - prefix[i + 1]) / n as f64
    };
    let per_block: Vec<f64> = (0..blocks.k())
        .into_par_iter()
        .map(|k| {
            let (nk, nk1) = blocks.block(k);
            let admissible = set.between(nk, nk1);
            let sq: f64 = (x_start..hi)
                .map(|x| {
                    let reference = avg(x, nk1);
                    let sup = admissible
                        .iter()
                        .map(|&n| (avg(x, n) - reference).norm())
                        .fold(0.0, f64::max);
                    sup * sup
                })
                .sum();
            sq.sqrt()
        })
        .collect();
    Ok(OscillationReport::from_blocks(per_block, input_norm))
}

/// Which average an oscillation sum on a finite system is taken over.
#[derive(Debug, Clone)]
pub enum SystemVariant<'a> {
    /// `(1/N)·Σ f(T^{P(n)}x)`.
    Linear(IntPolynomial),
    /// `(1/N)·Σ f(T^{P(n)}x)·g(T^{Q(n)}x)`.
    Bilinear {
        p: IntPolynomial,
        q: IntPolynomial,
        g: &'a Observable,
    },
    /// `(1/π_N)·Σ_{p≤N} f(T^{Q(p)}x)`; `N = 1` is never admissible.
    Prime { q: IntPolynomial, table: Arc<PrimeTable> },
}

impl SystemVariant<'_> {
    fn spec(&self) -> Result<AverageSpec> {
        let nonconstant = |p: &IntPolynomial| {
            if p.is_constant() {
                domain(format!("polynomial {p} must be non-constant"))
            } else {
                Ok(())
            }
        };
        Ok(match self {
            SystemVariant::Linear(p) => {
                nonconstant(p)?;
                AverageSpec::linear(p.clone())
            }
            SystemVariant::Bilinear { p, q, .. } => {
                nonconstant(p)?;
                nonconstant(q)?;
                AverageSpec::bilinear(p.clone(), q.clone())
            }
            SystemVariant::Prime { q, table } => {
                nonconstant(q)?;
                AverageSpec::linear(q.clone()).with_index(IndexSet::Primes(table.clone()))
            }
        })
    }

    fn second(&self) -> Option<&Observable> {
        match self {
            SystemVariant::Bilinear { g, .. } => Some(g),
            _ => None,
        }
    }
}

/// Oscillation sum on a finite system, with `L²(µ)` norms for the uniform
/// probability `µ`. The input norm is `‖f‖₂`, times `‖g‖_∞` for the
/// bilinear variant.
pub fn oscillation_sum_system(
    sys: &FiniteSystem,
    f: &Observable,
    blocks: &BlockPartition,
    rho: f64,
    variant: &SystemVariant<'_>,
) -> Result<OscillationReport> {
    if blocks.is_empty() {
        return precondition("oscillation sum needs at least one block");
    }
    let set = lacunary(rho, blocks.top())?;
    let spec = variant.spec()?;
    let g = variant.second();
    let sweeps = (0..sys.size())
        .into_par_iter()
        .map(|x| system_avg_sweep(sys, f, g, x, blocks.top(), &spec))
        .collect::<Result<Vec<_>>>()?;
    let m = sys.size() as f64;
    let per_block = (0..blocks.k())
        .map(|k| {
            let (nk, nk1) = blocks.block(k);
            let sq: f64 = sweeps
                .iter()
                .map(|avgs| block_sup(avgs, nk, nk1, &set).powi(2))
                .sum();
            (sq / m).sqrt()
        })
        .collect();
    let mut input_norm = f.norm(2.0)?;
    if let Some(g) = g {
        input_norm *= g.sup_abs();
    }
    Ok(OscillationReport::from_blocks(per_block, input_norm))
}

/// Values `A_N(x)` for points `x` of a finite uniform probability space and
/// `N = 1..=ceiling`.
#[derive(Debug, Clone, PartialEq)]
pub struct AverageFamily {
    /// `values[x][N − 1]`.
    values: Vec<Vec<Complex64>>,
}

impl AverageFamily {
    pub fn new(values: Vec<Vec<Complex64>>) -> Result<Self> {
        let Some(first) = values.first() else {
            return precondition("family needs at least one point");
        };
        let ceiling = first.len();
        if ceiling == 0 || values.iter().any(|v| v.len() != ceiling) {
            return precondition("every point needs the same positive number of averages");
        }
        Ok(AverageFamily { values })
    }

    pub fn from_fn(points: usize, ceiling: u64, a: impl Fn(usize, u64) -> Complex64) -> Result<Self> {
        Self::new(
            (0..points)
                .map(|x| (1..=ceiling).map(|n| a(x, n)).collect())
                .collect(),
        )
    }

    /// Birkhoff averages `A_N f(x)` for every point of `sys`.
    pub fn birkhoff(sys: &FiniteSystem, f: &Observable, ceiling: u64) -> Result<Self> {
        let spec = AverageSpec::linear(IntPolynomial::identity());
        let values = (0..sys.size())
            .into_par_iter()
            .map(|x| {
                system_avg_sweep(sys, f, None, x, ceiling, &spec)
                    .map(|v| v.into_iter().map(|a| a.expect("linear averages are defined")).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(values)
    }

    pub fn points(&self) -> usize {
        self.values.len()
    }

    pub fn ceiling(&self) -> u64 {
        self.values[0].len() as u64
    }

    pub fn at(&self, x: usize, n: u64) -> Complex64 {
        self.values[x][n as usize - 1]
    }

    /// `sup_{lo ≤ N ≤ hi} |A_N(x) − A_hi(x)|`.
    fn block_sup(&self, x: usize, lo: u64, hi: u64) -> f64 {
        let reference = self.at(x, hi);
        (lo..=hi)
            .map(|n| (self.at(x, n) - reference).norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CornerConfig {
    pub eps: f64,
    pub p: f64,
    /// `β = beta_frac·µ(A_ε)`.
    pub beta_frac: f64,
    /// `γ = gamma_frac·β`.
    pub gamma_frac: f64,
    /// Smallest index probed when detecting `A_ε`; defaults to half the
    /// ceiling.
    pub horizon: Option<u64>,
    pub max_blocks: usize,
}

impl CornerConfig {
    pub fn new(eps: f64) -> Self {
        CornerConfig {
            eps,
            p: 1.0,
            beta_frac: 0.99,
            gamma_frac: 0.99,
            horizon: None,
            max_blocks: usize::MAX,
        }
    }
}

/// Outcome of the block construction. `a_eps` is a finite-scale surrogate:
/// points with `|A_n − A_m| > ε` for some `horizon ≤ n, m ≤ ceiling`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerReport {
    pub blocks: BlockPartition,
    /// `A_ε` is empty at this scale.
    pub convergent_at_scale: bool,
    pub a_eps: Vec<usize>,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// `µ(B_{N_k, N_{k+1}})` per block.
    pub block_measures: Vec<f64>,
    /// `‖sup_{N_k ≤ N ≤ N_{k+1}} |A_N − A_{N_{k+1}}|‖_p` per block.
    pub block_norms: Vec<f64>,
    /// `(1/K)·Σ_k block_norms[k]`.
    pub lower_bound: f64,
    /// `γ^{1/p}·ε/2`.
    pub threshold: f64,
}

impl CornerReport {
    /// Whether the averaged block norms exceed the threshold.
    pub fn holds(&self) -> bool {
        self.blocks.is_empty() || self.lower_bound > self.threshold
    }
}

/// Builds `N_1 = 1` and each `N_{k+1}` as the least `M` with
/// `µ(B_{N_k, M}) > γ`, where `B_{N_k, M}` is the set of `x ∈ A_ε` with
/// `sup_{N_k ≤ N ≤ M} |A_N(x) − A_M(x)| > ε/2`. Stops at the ceiling.
pub fn corner_blocks(family: &AverageFamily, cfg: &CornerConfig) -> Result<CornerReport> {
    if !(cfg.eps > 0.0) {
        return domain(format!("ε must be positive, got {}", cfg.eps));
    }
    if !(cfg.p >= 1.0) {
        return domain(format!("p must be >= 1, got {}", cfg.p));
    }
    let fractions_ok = |v: f64| v > 0.0 && v <= 1.0;
    if !fractions_ok(cfg.beta_frac) || !fractions_ok(cfg.gamma_frac) {
        return domain("β and γ fractions must lie in (0, 1]");
    }
    let ceiling = family.ceiling();
    let horizon = cfg.horizon.unwrap_or((ceiling / 2).max(1));
    if horizon == 0 || horizon > ceiling {
        return domain(format!("horizon {horizon} outside 1..={ceiling}"));
    }
    let points = family.points();
    let measure = |count: usize| count as f64 / points as f64;

    let a_eps: Vec<usize> = (0..points)
        .filter(|&x| {
            let vals = &family.values[x][horizon as usize - 1..];
            vals.iter()
                .enumerate()
                .any(|(i, a)| vals[i + 1..].iter().any(|b| (a - b).norm() > cfg.eps))
        })
        .collect();
    let alpha = measure(a_eps.len());
    let beta = cfg.beta_frac * alpha;
    let gamma = cfg.gamma_frac * beta;
    let threshold = gamma.powf(1.0 / cfg.p) * cfg.eps / 2.0;
    let mut report = CornerReport {
        blocks: BlockPartition::empty(),
        convergent_at_scale: a_eps.is_empty(),
        a_eps,
        alpha,
        beta,
        gamma,
        block_measures: Vec::new(),
        block_norms: Vec::new(),
        lower_bound: 0.0,
        threshold,
    };
    if report.convergent_at_scale {
        return Ok(report);
    }

    let mut cuts = vec![1u64];
    let mut measures = Vec::new();
    while cuts.len() <= cfg.max_blocks {
        let nk = *cuts.last().unwrap();
        let next = (nk + 1..=ceiling).find_map(|m| {
            let count = report
                .a_eps
                .iter()
                .filter(|&&x| family.block_sup(x, nk, m) > cfg.eps / 2.0)
                .count();
            (measure(count) > gamma).then_some((m, measure(count)))
        });
        match next {
            Some((m, mu)) => {
                cuts.push(m);
                measures.push(mu);
            }
            None => break,
        }
    }
    if cuts.len() < 2 {
        return Ok(report);
    }
    let blocks = BlockPartition::new(cuts)?;
    let norms: Vec<f64> = (0..blocks.k())
        .map(|k| {
            let (lo, hi) = blocks.block(k);
            let s: f64 = (0..points)
                .map(|x| family.block_sup(x, lo, hi).powf(cfg.p))
                .sum();
            (s / points as f64).powf(1.0 / cfg.p)
        })
        .collect();
    report.lower_bound = norms.iter().sum::<f64>() / norms.len() as f64;
    report.blocks = blocks;
    report.block_measures = measures;
    report.block_norms = norms;
    Ok(report)
}

/// For consecutive members `N_m < N_{m+1}` of `S_ρ` up to `n_max` and every
/// `N_m ≤ N ≤ N_{m+1}`, checks pointwise
/// `(N_m/N_{m+1})·A_{N_m} ≤ A_N ≤ (N_{m+1}/N_m)·A_{N_{m+1}}`.
///
/// The comparisons are made on partial sums `S_N` in the cross-multiplied
/// forms `N·S_{N_m} ≤ N_{m+1}·S_N` and `N_m·S_N ≤ N·S_{N_{m+1}}`, which are
/// monotone under rounding. `lhs` counts violations and `rhs` is 0.
pub fn etemadi_sandwich_check(
    sys: &FiniteSystem,
    f: &Observable,
    rho: f64,
    n_max: u64,
) -> Result<InequalityReport> {
    if f.len() != sys.size() {
        return precondition("observable size differs from system size");
    }
    if let Some(v) = f.values().iter().find(|v| v.im != 0.0 || !(v.re >= 0.0)) {
        return domain(format!("f must be real and nonnegative, found {v}"));
    }
    let set = lacunary(rho, n_max)?;
    let members = set.members();
    let (violations, checks) = (0..sys.size())
        .into_par_iter()
        .map(|x| {
            let mut partial = Vec::with_capacity(n_max as usize + 1);
            let mut acc = 0.0f64;
            partial.push(acc);
            let mut y = x;
            for _ in 0..n_max {
                y = sys.apply(y);
                acc += f.at(y).re;
                partial.push(acc);
            }
            let mut bad = 0u64;
            let mut seen = 0u64;
            for w in members.windows(2) {
                let (a, b) = (w[0], w[1]);
                let (sa, sb) = (partial[a as usize], partial[b as usize]);
                for n in a..=b {
                    let sn = partial[n as usize];
                    let nf = n as f64;
                    if nf * sa > b as f64 * sn {
                        bad += 1;
                    }
                    if a as f64 * sn > nf * sb {
                        bad += 1;
                    }
                    seen += 2;
                }
            }
            (bad, seen)
        })
        .reduce(|| (0, 0), |l, r| (l.0 + r.0, l.1 + r.1));
    Ok(
        InequalityReport::new("etemadi_sandwich", violations as f64, 0.0, rho)
            .with_param("checks", checks)
            .with_param("rho", rho)
            .with_param("n_max", n_max),
    )
}
