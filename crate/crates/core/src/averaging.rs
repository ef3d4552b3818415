//! Ergodic averages on finite systems and their counterparts on ℤ-signals.
//!
//! All sums run over `n = 1..=N` in ascending order, so a running-sum sweep
//! and a one-shot evaluation produce bit-identical values.

use std::sync::Arc;

use num_complex::Complex64;

use crate::arith::{lacunary, IntPolynomial, PrimeTable};
use crate::dynsys::{FiniteSystem, Observable};
use crate::error::{domain, precondition, Error, Result};
use crate::signal::Signal;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AverageKind {
    Linear,
    Bilinear,
}

/// Which `N` an average is taken along, and how it is normalised.
#[derive(Debug, Clone)]
pub enum IndexSet {
    /// Every `N ≥ 1`, sum over `n ≤ N` divided by `N`.
    Full,
    /// Only `N ∈ S_ρ`; the average itself is the full one.
    Lacunary(f64),
    /// Sum over primes `p ≤ N` divided by `π_N`.
    Primes(Arc<PrimeTable>),
}

impl IndexSet {
    /// Whether `n` is an admissible averaging length.
    pub fn admits(&self, n: u64) -> bool {
        match self {
            IndexSet::Full => n >= 1,
            IndexSet::Lacunary(rho) => lacunary(*rho, n)
                .map(|s| s.contains(n))
                .unwrap_or(false),
            IndexSet::Primes(_) => n >= 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            IndexSet::Full => "full",
            IndexSet::Lacunary(_) => "lacunary",
            IndexSet::Primes(_) => "primes",
        }
    }
}

/// Phase `e^{iR(n)θ}` applied to the n-th term.
#[derive(Debug, Clone)]
pub struct Modulation {
    pub poly: IntPolynomial,
    pub theta: f64,
}

#[derive(Debug, Clone)]
pub struct AverageSpec {
    pub kind: AverageKind,
    pub index: IndexSet,
    pub p: IntPolynomial,
    pub q: Option<IntPolynomial>,
    /// `a_1, a_2, …`; must cover every `n` that is summed.
    pub weights: Option<Vec<Complex64>>,
    pub modulation: Option<Modulation>,
}

impl AverageSpec {
    pub fn linear(p: IntPolynomial) -> Self {
        Self {
            kind: AverageKind::Linear,
            index: IndexSet::Full,
            p,
            q: None,
            weights: None,
            modulation: None,
        }
    }

    pub fn bilinear(p: IntPolynomial, q: IntPolynomial) -> Self {
        Self {
            kind: AverageKind::Bilinear,
            q: Some(q),
            ..Self::linear(p)
        }
    }

    pub fn with_index(mut self, index: IndexSet) -> Self {
        self.index = index;
        self
    }

    pub fn with_weights(mut self, weights: Vec<Complex64>) -> Self {
        self.weights = Some(weights);
        self
    }

    pub fn with_modulation(mut self, poly: IntPolynomial, theta: f64) -> Self {
        self.modulation = Some(Modulation { poly, theta });
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == AverageKind::Bilinear && self.q.is_none() {
            return precondition("bilinear average needs a second polynomial");
        }
        if let IndexSet::Lacunary(rho) = self.index {
            if !(rho > 1.0) {
                return domain(format!("lacunary ratio must be > 1, got {rho}"));
            }
        }
        Ok(())
    }

    /// Summation indices for averaging length `n_len`: `1..=N`, or the
    /// primes `p ≤ N`.
    fn terms(&self, n_len: u64) -> Result<Vec<u64>> {
        match &self.index {
            IndexSet::Primes(table) => {
                if table.ceiling() < n_len {
                    return precondition(format!(
                        "prime table ceiling {} is below N = {n_len}",
                        table.ceiling()
                    ));
                }
                Ok(table.primes_up_to(n_len).to_vec())
            }
            _ => Ok((1..=n_len).collect()),
        }
    }

    fn normaliser(&self, n_len: u64) -> Result<f64> {
        match &self.index {
            IndexSet::Primes(table) => {
                let pi = table.pi(n_len.min(table.ceiling()));
                if pi == 0 {
                    return domain(format!("no primes up to N = {n_len}"));
                }
                Ok(pi as f64)
            }
            _ => Ok(n_len as f64),
        }
    }

    /// Weight `a_n·e^{iR(n)θ}` of the n-th term.
    fn weight(&self, n: u64) -> Result<Complex64> {
        let mut w = Complex64::new(1.0, 0.0);
        if let Some(a) = &self.weights {
            w = *a.get(n as usize - 1).ok_or_else(|| {
                Error::Precondition(format!("weights stop at n = {}, need n = {n}", a.len()))
            })?;
        }
        if let Some(m) = &self.modulation {
            let r = m.poly.eval(n as i64)?;
            w *= Complex64::from_polar(1.0, r as f64 * m.theta);
        }
        Ok(w)
    }

    fn has_weight(&self) -> bool {
        self.weights.is_some() || self.modulation.is_some()
    }
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        return domain("averaging length N must be >= 1");
    }
    Ok(())
}

fn check_inputs(sys: &FiniteSystem, f: &Observable, x: usize) -> Result<()> {
    if f.len() != sys.size() {
        return precondition("observable size differs from system size");
    }
    if x >= sys.size() {
        return domain(format!("point {x} outside system of size {}", sys.size()));
    }
    Ok(())
}

/// `(1/N)·Σ_{n=1}^{N} f(T^n x)`.
pub fn birkhoff(sys: &FiniteSystem, f: &Observable, x: usize, n_len: u64) -> Result<Complex64> {
    check_n(n_len)?;
    check_inputs(sys, f, x)?;
    let mut acc = ZERO;
    let mut y = x;
    for _ in 0..n_len {
        y = sys.apply(y);
        acc += f.at(y);
    }
    Ok(acc / n_len as f64)
}

/// `(1/N)·Σ_{n=1}^{N} f(T^{P(n)}x)·g(T^{Q(n)}x)`.
pub fn bilinear_avg(
    sys: &FiniteSystem,
    f: &Observable,
    g: &Observable,
    x: usize,
    n_len: u64,
    p: &IntPolynomial,
    q: &IntPolynomial,
) -> Result<Complex64> {
    let spec = AverageSpec::bilinear(p.clone(), q.clone());
    system_avg(sys, f, Some(g), x, n_len, &spec)
}

/// `(1/π_N)·Σ_{p≤N} f(T^{Q(p)}x)`.
pub fn prime_avg(
    sys: &FiniteSystem,
    f: &Observable,
    x: usize,
    n_len: u64,
    q: &IntPolynomial,
    table: &Arc<PrimeTable>,
) -> Result<Complex64> {
    if n_len < 2 {
        return domain("prime average needs N >= 2");
    }
    let spec = AverageSpec::linear(q.clone()).with_index(IndexSet::Primes(table.clone()));
    system_avg(sys, f, None, x, n_len, &spec)
}

/// `(1/π_N)·Σ_{p≤N} f(T^{P(p)}x)·g(T^{Q(p)}x)`.
#[allow(clippy::too_many_arguments)]
pub fn prime_bilinear_avg(
    sys: &FiniteSystem,
    f: &Observable,
    g: &Observable,
    x: usize,
    n_len: u64,
    p: &IntPolynomial,
    q: &IntPolynomial,
    table: &Arc<PrimeTable>,
) -> Result<Complex64> {
    if n_len < 2 {
        return domain("prime average needs N >= 2");
    }
    let spec =
        AverageSpec::bilinear(p.clone(), q.clone()).with_index(IndexSet::Primes(table.clone()));
    system_avg(sys, f, Some(g), x, n_len, &spec)
}

/// General system average described by `spec`; `g` is required for the
/// bilinear kind and ignored otherwise.
pub fn system_avg(
    sys: &FiniteSystem,
    f: &Observable,
    g: Option<&Observable>,
    x: usize,
    n_len: u64,
    spec: &AverageSpec,
) -> Result<Complex64> {
    check_n(n_len)?;
    let sweep = system_avg_sweep(sys, f, g, x, n_len, spec)?;
    sweep[n_len as usize - 1].ok_or_else(|| Error::Domain(format!("average undefined at N = {n_len}")))
}

/// Averages for every `N = 1..=n_max`, entry `N − 1`; `None` where the
/// normalisation vanishes (no primes up to `N`).
pub fn system_avg_sweep(
    sys: &FiniteSystem,
    f: &Observable,
    g: Option<&Observable>,
    x: usize,
    n_max: u64,
    spec: &AverageSpec,
) -> Result<Vec<Option<Complex64>>> {
    spec.validate()?;
    check_inputs(sys, f, x)?;
    let second = match spec.kind {
        AverageKind::Bilinear => {
            let g = g.ok_or_else(|| Error::Precondition("bilinear average needs g".into()))?;
            if g.len() != sys.size() {
                return precondition("second observable size differs from system size");
            }
            Some((g, spec.q.as_ref().expect("validated")))
        }
        AverageKind::Linear => None,
    };
    sweep(n_max, spec, |n| {
        let pn = spec.p.eval(n as i64)?;
        let mut v = f.at(sys.power(x, pn));
        if let Some((g, q)) = second {
            v *= g.at(sys.power(x, q.eval(n as i64)?));
        }
        Ok(v)
    })
}

/// Shared running-sum driver: `term(n)` is the unweighted n-th summand.
fn sweep(
    n_max: u64,
    spec: &AverageSpec,
    mut term: impl FnMut(u64) -> Result<Complex64>,
) -> Result<Vec<Option<Complex64>>> {
    let terms = spec.terms(n_max)?;
    let mut out = Vec::with_capacity(n_max as usize);
    let mut acc = ZERO;
    let mut next = 0usize;
    for n_len in 1..=n_max {
        while next < terms.len() && terms[next] <= n_len {
            let n = terms[next];
            let mut v = term(n)?;
            if spec.has_weight() {
                v *= spec.weight(n)?;
            }
            acc += v;
            next += 1;
        }
        let value = match spec.normaliser(n_len) {
            Ok(d) => Some(acc / d),
            Err(_) => None,
        };
        out.push(value);
    }
    Ok(out)
}

/// ℤ-side linear average `(1/N)·Σ w_n·s(x + P(n))` (or its prime form).
pub fn signal_avg(s: &Signal, x: i64, n_len: u64, spec: &AverageSpec) -> Result<Complex64> {
    check_n(n_len)?;
    if spec.kind != AverageKind::Linear {
        return precondition("signal_avg takes a linear spec; use signal_bilinear_avg");
    }
    last_defined(signal_avg_sweep(s, None, x, n_len, spec)?, n_len)
}

/// ℤ-side bilinear average `(1/N)·Σ w_n·f(x + P(n))·g(x + Q(n))`.
pub fn signal_bilinear_avg(
    f: &Signal,
    g: &Signal,
    x: i64,
    n_len: u64,
    spec: &AverageSpec,
) -> Result<Complex64> {
    check_n(n_len)?;
    last_defined(signal_avg_sweep(f, Some(g), x, n_len, spec)?, n_len)
}

/// `(1/N)·Σ_{n=1}^{N} f(x + P(n))·g(x − P(n))`.
pub fn bilinear_signal_avg(
    f: &Signal,
    g: &Signal,
    x: i64,
    n_len: u64,
    p: &IntPolynomial,
) -> Result<Complex64> {
    let spec = AverageSpec::bilinear(p.clone(), p.negate()?);
    signal_bilinear_avg(f, g, x, n_len, &spec)
}

fn last_defined(v: Vec<Option<Complex64>>, n_len: u64) -> Result<Complex64> {
    v[n_len as usize - 1].ok_or_else(|| Error::Domain(format!("average undefined at N = {n_len}")))
}

/// Running ℤ-side averages for `N = 1..=n_max`.
pub fn signal_avg_sweep(
    f: &Signal,
    g: Option<&Signal>,
    x: i64,
    n_max: u64,
    spec: &AverageSpec,
) -> Result<Vec<Option<Complex64>>> {
    spec.validate()?;
    let q = match spec.kind {
        AverageKind::Bilinear => Some(spec.q.as_ref().expect("validated")),
        AverageKind::Linear => None,
    };
    if q.is_some() && g.is_none() {
        return precondition("bilinear average needs g");
    }
    sweep(n_max, spec, |n| {
        let idx = x
            .checked_add(spec.p.eval(n as i64)?)
            .ok_or_else(|| Error::Range("signal index overflow".into()))?;
        let mut v = f.get(idx);
        if let (Some(q), Some(g)) = (q, g) {
            let jdx = x
                .checked_add(q.eval(n as i64)?)
                .ok_or_else(|| Error::Range("signal index overflow".into()))?;
            v *= g.get(jdx);
        }
        Ok(v)
    })
}
