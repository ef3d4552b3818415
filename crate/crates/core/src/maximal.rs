//! Discrete maximal operators on ℤ-signals and finite systems, and the
//! maximal inequalities they satisfy, as pass/fail reports.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::arith::{IntPolynomial, LacunarySet, PrimeTable};
use crate::dynsys::{FiniteSystem, Observable};
use crate::error::{domain, precondition, Error, Result};
use crate::report::InequalityReport;
use crate::signal::Signal;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Admissible averaging lengths for a maximal sweep.
#[derive(Debug, Clone, Copy)]
pub enum MaximalIndex<'a> {
    Full,
    Lacunary(&'a LacunarySet),
}

impl MaximalIndex<'_> {
    fn admits(&self, n: u64) -> bool {
        match self {
            MaximalIndex::Full => true,
            MaximalIndex::Lacunary(set) => set.contains(n),
        }
    }
}

/// Pointwise values of a maximal function over its computation window;
/// the values are real and stored in the real part.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximalFunction {
    pub values: Signal,
}

impl MaximalFunction {
    pub fn at(&self, x: i64) -> f64 {
        self.values.get(x).re
    }

    pub fn norm(&self, r: f64) -> Result<f64> {
        self.values.norm(r)
    }

    /// `‖M s‖_r / ‖s‖_r`, or 0 for a zero input.
    pub fn empirical_constant(&self, input: &Signal, r: f64) -> Result<f64> {
        let denom = input.norm(r)?;
        if denom == 0.0 {
            return Ok(0.0);
        }
        Ok(self.norm(r)? / denom)
    }
}

/// `Σ_{x=1}^{J} (max_{m≤x} (1/(x−m+1))·Σ_{n=m}^{x} a_n)^r ≤ 2(r/(r−1))^r·Σ a_n^r`.
pub fn hl_window_max(a: &[f64], r: f64) -> Result<InequalityReport> {
    if !(r > 1.0) {
        return domain(format!("exponent must exceed 1, got {r}"));
    }
    if let Some(v) = a.iter().find(|v| !(**v >= 0.0)) {
        return domain(format!("sequence must be nonnegative, found {v}"));
    }
    let lhs: f64 = left_window_maxima(a).iter().map(|m| m.powf(r)).sum();
    let constant = 2.0 * (r / (r - 1.0)).powf(r);
    let rhs = constant * a.iter().map(|v| v.powf(r)).sum::<f64>();
    Ok(InequalityReport::new("hl_window_max", lhs, rhs, constant)
        .with_param("r", r)
        .with_param("J", a.len()))
}

/// `max_{m≤x}` of the window means ending at each `x`.
pub fn left_window_maxima(a: &[f64]) -> Vec<f64> {
    (0..a.len())
        .map(|x| {
            let mut sum = 0.0;
            let mut best = 0.0f64;
            for m in (0..=x).rev() {
                sum += a[m];
                best = best.max(sum / (x - m + 1) as f64);
            }
            best
        })
        .collect()
}

/// Kind of summation used by [`signal_maximal`].
#[derive(Debug, Clone, Copy)]
enum Summation<'a> {
    /// `(1/N)·Σ_{n≤N}`.
    Uniform,
    /// `(1/π_N)·Σ_{p≤N}`.
    Primes(&'a PrimeTable),
}

/// `x ↦ sup_{N admissible, N ≤ n_max} |avg_N(x)|` where the n-th term is
/// `w_n·f(x + P(n))·g(x + Q(n))` (`g ≡ 1` when absent).
fn signal_maximal(
    f: &Signal,
    second: Option<(&Signal, &[i64])>,
    p_values: &[i64],
    weights: Option<&[Complex64]>,
    summation: Summation<'_>,
    index: MaximalIndex<'_>,
    window: (i64, i64),
) -> Signal {
    let n_max = p_values.len();
    let terms: Vec<usize> = match summation {
        Summation::Uniform => (1..=n_max).collect(),
        Summation::Primes(t) => t.primes_up_to(n_max as u64).iter().map(|&p| p as usize).collect(),
    };
    let (lo, hi) = window;
    let values: Vec<Complex64> = (lo..hi)
        .into_par_iter()
        .map(|x| {
            let mut acc = ZERO;
            let mut best = 0.0f64;
            let mut next = 0;
            for n_len in 1..=n_max {
                while next < terms.len() && terms[next] <= n_len {
                    let n = terms[next];
                    let mut v = f.get(x + p_values[n - 1]);
                    if let Some((g, q_values)) = second {
                        v *= g.get(x + q_values[n - 1]);
                    }
                    if let Some(w) = weights {
                        v *= w[n - 1];
                    }
                    acc += v;
                    next += 1;
                }
                if !index.admits(n_len as u64) {
                    continue;
                }
                let denom = match summation {
                    Summation::Uniform => n_len as f64,
                    Summation::Primes(t) => t.pi(n_len as u64) as f64,
                };
                if denom > 0.0 {
                    best = best.max((acc / denom).norm());
                }
            }
            Complex64::new(best, 0.0)
        })
        .collect();
    Signal::new(lo, values)
}

fn check_n_max(n_max: u64) -> Result<()> {
    if n_max == 0 {
        return domain("N_max must be >= 1");
    }
    Ok(())
}

/// Window of `x` where `x + P(n)` meets the support for some `n ≤ n_max`.
fn window_for(s: &Signal, p_values: &[i64]) -> (i64, i64) {
    if s.is_empty() {
        return (0, 0);
    }
    let min_p = p_values.iter().copied().min().unwrap_or(0);
    let max_p = p_values.iter().copied().max().unwrap_or(0);
    (s.offset() - max_p, s.end() - min_p)
}

/// `M(s)(x) = sup_{N ≤ N_max} |(1/N)·Σ_{n=1}^{N} s(x + n)|`, over the
/// window `support ⊕ [−N_max, 0]`; `index` may restrict `N` to `S_ρ`.
pub fn shift_maximal(s: &Signal, index: MaximalIndex<'_>, n_max: u64) -> Result<MaximalFunction> {
    check_n_max(n_max)?;
    let p: Vec<i64> = (1..=n_max as i64).collect();
    let window = window_for(s, &p);
    Ok(MaximalFunction {
        values: signal_maximal(s, None, &p, None, Summation::Uniform, index, window),
    })
}

/// `sup_{N ≤ N_max} |(1/N)·Σ_{n=1}^{N} s(x + Q(n))|`.
pub fn poly_maximal(s: &Signal, q: &IntPolynomial, n_max: u64) -> Result<MaximalFunction> {
    check_n_max(n_max)?;
    if q.is_constant() {
        return domain("polynomial maximal function needs a non-constant polynomial");
    }
    let qv = q.values_up_to(n_max as usize)?;
    let window = window_for(s, &qv);
    Ok(MaximalFunction {
        values: signal_maximal(s, None, &qv, None, Summation::Uniform, MaximalIndex::Full, window),
    })
}

/// `sup_{2 ≤ N ≤ N_max} |(1/π_N)·Σ_{p≤N} s(x + Q(p))|`.
pub fn prime_poly_maximal(
    s: &Signal,
    q: &IntPolynomial,
    n_max: u64,
    table: &PrimeTable,
) -> Result<MaximalFunction> {
    check_n_max(n_max)?;
    if table.ceiling() < n_max {
        return precondition(format!(
            "prime table ceiling {} is below N_max = {n_max}",
            table.ceiling()
        ));
    }
    if q.is_constant() {
        return domain("polynomial maximal function needs a non-constant polynomial");
    }
    let qv = q.values_up_to(n_max as usize)?;
    let window = window_for(s, &qv);
    Ok(MaximalFunction {
        values: signal_maximal(
            s,
            None,
            &qv,
            None,
            Summation::Primes(table),
            MaximalIndex::Full,
            window,
        ),
    })
}

/// `M(f,g)(x) = sup_{N ≤ N_max} |(1/N)·Σ_{n=1}^{N} f(x + P(n))·g(x − P(n))|`.
pub fn bilinear_maximal(
    f: &Signal,
    g: &Signal,
    p: &IntPolynomial,
    n_max: u64,
) -> Result<MaximalFunction> {
    bilinear_maximal_weighted(f, g, p, n_max, None)
}

/// As [`bilinear_maximal`] with the n-th term multiplied by `a_n`.
pub fn bilinear_maximal_weighted(
    f: &Signal,
    g: &Signal,
    p: &IntPolynomial,
    n_max: u64,
    weights: Option<&[Complex64]>,
) -> Result<MaximalFunction> {
    check_n_max(n_max)?;
    if let Some(w) = weights {
        if (w.len() as u64) < n_max {
            return precondition(format!("weights stop at n = {}, need {n_max}", w.len()));
        }
    }
    let pv = p.values_up_to(n_max as usize)?;
    let qv: Vec<i64> = pv
        .iter()
        .map(|v| v.checked_neg().ok_or_else(|| Error::Range("negation overflow".into())))
        .collect::<Result<_>>()?;
    if f.is_empty() || g.is_empty() {
        return Ok(MaximalFunction { values: Signal::zero() });
    }
    let (flo, fhi) = window_for(f, &pv);
    let (glo, ghi) = window_for(g, &qv);
    let lo = flo.max(glo);
    let hi = fhi.min(ghi).max(lo);
    Ok(MaximalFunction {
        values: signal_maximal(
            f,
            Some((g, &qv)),
            &pv,
            weights,
            Summation::Uniform,
            MaximalIndex::Full,
            (lo, hi),
        ),
    })
}

/// Checks `‖M(f,g)‖₁ ≤ C·‖f‖_r·‖g‖_{r'}` with `1/r + 1/r' = 1`, and records
/// the empirical constant `‖M(f,g)‖₁ / (‖f‖_r‖g‖_{r'})` as a parameter.
pub fn bilinear_holder_report(
    m: &MaximalFunction,
    f: &Signal,
    g: &Signal,
    r: f64,
    constant: f64,
) -> Result<InequalityReport> {
    if !(r >= 1.0) {
        return domain(format!("exponent must be >= 1, got {r}"));
    }
    let r_conj = if r == 1.0 {
        f64::INFINITY
    } else if r == f64::INFINITY {
        1.0
    } else {
        r / (r - 1.0)
    };
    let lhs = m.norm(1.0)?;
    let scale = f.norm(r)? * g.norm(r_conj)?;
    let empirical = if scale > 0.0 { lhs / scale } else { 0.0 };
    Ok(
        InequalityReport::new("bilinear_maximal", lhs, constant * scale, constant)
            .with_param("r", r)
            .with_param("r_conjugate", r_conj)
            .with_param("empirical_constant", empirical),
    )
}

/// `‖M(f,g)‖_r / (‖f‖₁·‖g‖_r)`, the constant in the `ℓ¹ × ℓ^r → ℓ^r` form.
pub fn bilinear_l1_lr_constant(m: &MaximalFunction, f: &Signal, g: &Signal, r: f64) -> Result<f64> {
    let scale = f.norm(1.0)? * g.norm(r)?;
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(m.norm(r)? / scale)
}

/// `x ↦ max_{1 ≤ N ≤ n_max} |(1/N)·Σ_{n=1}^{N} f(T^n x)|`.
pub fn system_maximal(sys: &FiniteSystem, f: &Observable, n_max: u64) -> Vec<f64> {
    (0..sys.size())
        .map(|x| {
            let mut acc = ZERO;
            let mut y = x;
            let mut best = 0.0f64;
            for n in 1..=n_max {
                y = sys.apply(y);
                acc += f.at(y);
                best = best.max((acc / n as f64).norm());
            }
            best
        })
        .collect()
}

/// Hopf's weak-type bound `λ·µ{M f > λ} ≤ ‖f‖₁`.
///
/// On a finite system `A_N` for `N = qL + r` (L the cycle length) is a
/// convex combination of `A_L` and `A_r`, so the supremum over all `N` is
/// attained at `N ≤ m`. The sweep runs to `4m` and the level set is
/// confirmed unchanged at `8m`.
pub fn hopf_weak_type(sys: &FiniteSystem, f: &Observable, lambda: f64) -> Result<InequalityReport> {
    if !(lambda > 0.0) {
        return domain(format!("level must be positive, got {lambda}"));
    }
    if f.len() != sys.size() {
        return precondition("observable size differs from system size");
    }
    let m = sys.size();
    let n_max = 4 * m as u64;
    let mf = system_maximal(sys, f, n_max);
    let count = mf.iter().filter(|v| **v > lambda).count();
    let doubled = system_maximal(sys, f, 2 * n_max)
        .iter()
        .filter(|v| **v > lambda)
        .count();
    let stable = doubled == count;
    let lhs = lambda * count as f64 / m as f64;
    let rhs = f.norm(1.0)?;
    Ok(InequalityReport::new("hopf_weak_type", lhs, rhs, 1.0)
        .with_param("lambda", lambda)
        .with_param("m", m)
        .with_param("n_max", n_max)
        .with_param("stable_at_double_n_max", stable))
}
