//! Dirichlet-type averages, the lacunary kernel tail, periodograms and the
//! bilinear Fourier identity.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::arith::{lacunary, LacunarySet};
use crate::error::{domain, precondition, Result};
use crate::report::InequalityReport;
use crate::signal::{node, Signal, TorusGrid};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `|Nθ|` below which the sin-ratio is replaced by its Taylor expansion.
const SERIES_THRESHOLD: f64 = 1e-4;

/// `D_N(θ) = (1/N)·Σ_{n=1}^{N} e^{inθ}` in closed form.
///
/// `D_N(θ) = e^{i(N+1)θ/2}·sin(Nθ/2)/(N·sin(θ/2))`; for `|Nθ| < 10⁻⁴` the
/// ratio is `1 − (N²−1)θ²/24 + O(N⁴θ⁴)`. Returns exactly 1 at θ = 0.
pub fn dirichlet_avg(n: u64, theta: f64) -> Complex64 {
    if theta == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let nf = n as f64;
    let ratio = if (nf * theta).abs() < SERIES_THRESHOLD {
        1.0 - (nf * nf - 1.0) * theta * theta / 24.0
    } else {
        (nf * theta / 2.0).sin() / (nf * (theta / 2.0).sin())
    };
    Complex64::from_polar(ratio, (nf + 1.0) * theta / 2.0)
}

/// `1_{[−π/N, π/N]}(θ)`, closed at both ends.
pub fn indicator(n: u64, theta: f64) -> f64 {
    if theta.abs() <= PI / n as f64 {
        1.0
    } else {
        0.0
    }
}

/// `D_N`, the indicator and their difference at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEval {
    pub n: u64,
    pub theta: f64,
    pub dirichlet: Complex64,
    pub indicator: f64,
    pub difference: Complex64,
}

pub fn kernel_eval(n: u64, theta: f64) -> KernelEval {
    let dirichlet = dirichlet_avg(n, theta);
    let ind = indicator(n, theta);
    KernelEval {
        n,
        theta,
        dirichlet,
        indicator: ind,
        difference: dirichlet - ind,
    }
}

/// `Σ_{N ∈ S_ρ, N ≤ ceiling} |D_N(θ) − 1_{[−π/N, π/N]}(θ)|²`.
pub fn kernel_tail_sum(theta: f64, rho: f64, ceiling: u64) -> Result<f64> {
    if !(-PI..PI).contains(&theta) {
        return domain(format!("θ must lie in [−π, π), got {theta}"));
    }
    Ok(kernel_tail_on(&lacunary(rho, ceiling)?, theta))
}

/// Tail sum for a prebuilt lacunary set; even in θ by construction.
pub fn kernel_tail_on(set: &LacunarySet, theta: f64) -> f64 {
    let t = theta.abs();
    set.members()
        .iter()
        .map(|&n| kernel_eval(n, t).difference.norm_sqr())
        .sum()
}

/// Whether no node of the `size`-point grid sits exactly on `±π/N` for a
/// member `N` of `set`.
pub fn grid_avoids_boundaries(size: usize, set: &LacunarySet) -> bool {
    // θ_j = π/N ⇔ 2jN = M(N+1); θ_j = −π/N ⇔ 2jN = M(N−1)
    let m = size as u128;
    // N = 1 covers the whole circle, so ±π is not a jump
    set.members().iter().filter(|&&n| n > 1).all(|&n| {
        let n = n as u128;
        [m * (n + 1), m * (n - 1)]
            .iter()
            .all(|&num| num % (2 * n) != 0 || num / (2 * n) >= m)
    })
}

/// Summary of a kernel-tail sweep over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSweep {
    pub rho: f64,
    pub ceiling: u64,
    pub grid_size: usize,
    pub sup: f64,
    pub argmax: f64,
    /// Largest `|K(θ_j) − K(θ_{M−j})|` over mirrored node pairs.
    pub evenness_residual: f64,
    pub value_at_zero: f64,
}

/// Tail sum at every node of the `grid_size`-point grid.
pub fn kernel_tail_values(set: &LacunarySet, grid_size: usize) -> Vec<f64> {
    (0..grid_size)
        .into_par_iter()
        .map(|j| kernel_tail_on(set, node(grid_size, j)))
        .collect()
}

/// Supremum of the tail sum over the grid, with evenness and θ = 0 checks.
/// Node values are evaluated at the signed node so the mirror comparison
/// is a genuine check of evenness.
pub fn kernel_tail_sweep(rho: f64, ceiling: u64, grid_size: usize) -> Result<KernelSweep> {
    let set = lacunary(rho, ceiling)?;
    if grid_size < 2 {
        return precondition("kernel sweep needs at least two nodes");
    }
    if !grid_avoids_boundaries(grid_size, &set) {
        return precondition(format!(
            "grid of {grid_size} nodes hits an indicator boundary ±π/N"
        ));
    }
    let signed = |theta: f64| -> f64 {
        set.members()
            .iter()
            .map(|&n| kernel_eval(n, theta).difference.norm_sqr())
            .sum()
    };
    let values: Vec<f64> = (0..grid_size)
        .into_par_iter()
        .map(|j| signed(node(grid_size, j)))
        .collect();
    let (argmax_j, sup) = values
        .iter()
        .enumerate()
        .fold((0usize, f64::NEG_INFINITY), |(bj, bv), (j, &v)| {
            if v > bv {
                (j, v)
            } else {
                (bj, bv)
            }
        });
    let evenness_residual = (1..grid_size)
        .into_par_iter()
        .map(|j| {
            let (a, b) = (values[j], values[grid_size - j]);
            (a - b).abs() / a.abs().max(b.abs()).max(1.0)
        })
        .reduce(|| 0.0, f64::max);
    Ok(KernelSweep {
        rho,
        ceiling,
        grid_size,
        sup,
        argmax: node(grid_size, argmax_j),
        evenness_residual,
        value_at_zero: signed(0.0),
    })
}

/// `x/π ≤ sin(x/2)` for `0 < x < π`.
pub fn sin_halfangle_bound_check(x: f64) -> Result<InequalityReport> {
    if !(x > 0.0 && x < PI) {
        return domain(format!("x must lie in (0, π), got {x}"));
    }
    let lhs = x / PI;
    let rhs = (x / 2.0).sin();
    Ok(InequalityReport::new("sin_halfangle_bound", lhs, rhs, 1.0 / PI).with_param("x", x))
}

/// Runs [`sin_halfangle_bound_check`] on the interior nodes `πk/(points+1)`.
pub fn sin_halfangle_sweep(points: usize) -> Result<InequalityReport> {
    let reports = (1..=points)
        .map(|k| sin_halfangle_bound_check(PI * k as f64 / (points + 1) as f64))
        .collect::<Result<Vec<_>>>()?;
    Ok(crate::report::tightest("sin_halfangle_bound", reports))
}

/// Periodogram `σ_N(θ) = (1/2π)|(1/√N)·Σ_{n=1}^{N} s(n)e^{inθ}|²` on a
/// grid, with the truncated correlations `F(k)` it should reproduce.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEstimate {
    pub n: usize,
    /// `σ_N(θ_j)` stored in the real part.
    pub grid: TorusGrid,
    /// `F(k) = (1/N)·Σ s(n + k)·conj(s(n))` for `k = 0..=k_max`, the sum
    /// running over `1 ≤ n, n + k ≤ N`.
    pub correlations: Vec<Complex64>,
    /// `(1/N)·Σ_{n=1}^{N} |s(n)|²`.
    pub energy: f64,
}

impl SpectralEstimate {
    /// `F(k)` for `|k| ≤ k_max`, using `F(−k) = conj(F(k))`.
    pub fn correlation(&self, k: i64) -> Complex64 {
        let c = self.correlations[k.unsigned_abs() as usize];
        if k < 0 {
            c.conj()
        } else {
            c
        }
    }

    pub fn k_max(&self) -> usize {
        self.correlations.len() - 1
    }

    /// `∫ σ_N dθ` by quadrature.
    pub fn mass(&self) -> f64 {
        self.grid.quadrature().re
    }

    /// `∫ e^{−ikθ}·σ_N(θ) dθ` by quadrature.
    pub fn fourier_coefficient(&self, k: i64) -> Complex64 {
        let m = self.grid.size();
        let s: Complex64 = self
            .grid
            .samples()
            .iter()
            .enumerate()
            .map(|(j, v)| v.re * Complex64::from_polar(1.0, -(k as f64) * node(m, j)))
            .sum();
        s * (2.0 * PI / m as f64)
    }

    /// `|mass − energy| / energy` (absolute when the energy is 0).
    pub fn mass_residual(&self) -> f64 {
        let d = (self.mass() - self.energy).abs();
        if self.energy > 0.0 {
            d / self.energy
        } else {
            d
        }
    }

    /// Largest `|σ̂(k) − F(k)|` over `|k| ≤ k_max`, relative to `F(0)`.
    pub fn herglotz_residual(&self) -> f64 {
        let scale = if self.energy > 0.0 { self.energy } else { 1.0 };
        let k_max = self.k_max() as i64;
        (-k_max..=k_max)
            .map(|k| (self.fourier_coefficient(k) - self.correlation(k)).norm() / scale)
            .fold(0.0, f64::max)
    }
}

/// Periodogram of `s(1), …, s(N)` on a `grid_size`-point grid.
pub fn periodogram(s: &Signal, n: usize, grid_size: usize, k_max: usize) -> Result<SpectralEstimate> {
    if n == 0 {
        return domain("periodogram needs N >= 1");
    }
    if s.offset() > 1 || s.end() < n as i64 + 1 {
        return precondition(format!(
            "signal window {}..{} does not cover 1..={n}",
            s.offset(),
            s.end()
        ));
    }
    if grid_size < 2 * n {
        return precondition(format!("grid of {grid_size} nodes is below 2N = {}", 2 * n));
    }
    if k_max >= n {
        return precondition(format!("k_max = {k_max} must be below N = {n}"));
    }
    let samples: Vec<Complex64> = (1..=n as i64).map(|i| s.get(i)).collect();
    // e^{inθ_j} = (−1)^n·e^{2πinj/M}
    let mut buf = vec![ZERO; grid_size];
    for (i, v) in samples.iter().enumerate() {
        let idx = i + 1;
        let sign = if idx % 2 == 0 { 1.0 } else { -1.0 };
        buf[idx % grid_size] += v * sign;
    }
    FftPlanner::new().plan_fft_inverse(grid_size).process(&mut buf);
    let scale = 1.0 / (2.0 * PI * n as f64);
    let grid = TorusGrid::from_samples(
        buf.iter()
            .map(|v| Complex64::new(v.norm_sqr() * scale, 0.0))
            .collect(),
    );
    let correlations = (0..=k_max)
        .map(|k| {
            let s: Complex64 = (0..n - k).map(|i| samples[i + k] * samples[i].conj()).sum();
            s / n as f64
        })
        .collect();
    let energy = samples.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
    Ok(SpectralEstimate {
        n,
        grid,
        correlations,
        energy,
    })
}

/// Checks `(1/N)·Σ_{n=1}^{N} f(x+n)·g(x−n)
///   = (1/2π)∫ f̂(θ)·((1/N)·Σ_{n=1}^{N} g(x−n)e^{−i(x−n)θ})·e^{2ixθ} dθ`
/// with the integral evaluated by the trapezoidal rule.
///
/// The report's `lhs` is the residual and `rhs` the allowance
/// `tol·(1 + |direct|)`; both sides of the identity are in `params`.
pub fn bourgain_identity_check(
    f: &Signal,
    g: &Signal,
    x: i64,
    n: u64,
    grid_size: usize,
    tol: f64,
) -> Result<InequalityReport> {
    if n == 0 {
        return domain("N must be >= 1");
    }
    let required = 2 * (f.max_abs_index() as u64 + n + x.unsigned_abs()) + 1;
    if (grid_size as u64) < required {
        return precondition(format!(
            "grid of {grid_size} nodes cannot resolve the identity; need {required}"
        ));
    }
    let direct: Complex64 = (1..=n as i64)
        .map(|k| f.get(x + k) * g.get(x - k))
        .sum::<Complex64>()
        / n as f64;

    let f_hat = transform(f, grid_size);
    // (1/N)·Σ g(x−n)e^{−i(x−n)θ} is the transform of g restricted to [x−N, x−1]
    let window: Vec<Complex64> = (x - n as i64..x).map(|k| g.get(k) / n as f64).collect();
    let g_part = transform(&Signal::new(x - n as i64, window), grid_size);
    let quad: Complex64 = (0..grid_size)
        .map(|j| {
            let th = node(grid_size, j);
            f_hat[j] * g_part[j] * Complex64::from_polar(1.0, 2.0 * x as f64 * th)
        })
        .sum::<Complex64>()
        / grid_size as f64;

    let residual = (direct - quad).norm();
    let allowance = tol * (1.0 + direct.norm());
    Ok(InequalityReport::new("bourgain_identity", residual, allowance, tol)
        .with_param("direct_re", direct.re)
        .with_param("direct_im", direct.im)
        .with_param("fourier_re", quad.re)
        .with_param("fourier_im", quad.im)
        .with_param("x", x)
        .with_param("N", n)
        .with_param("grid_size", grid_size))
}

/// `ŝ(θ_j)` without the Parseval sizing guard; callers ensure the grid is
/// at least as long as the signal.
fn transform(s: &Signal, size: usize) -> Vec<Complex64> {
    let mut buf = vec![ZERO; size];
    let m = size as i64;
    for (n, v) in s.iter() {
        let sign = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        buf[n.rem_euclid(m) as usize] += v * sign;
    }
    FftPlanner::new().plan_fft_forward(size).process(&mut buf);
    buf
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wave(len: usize, a: f64) -> Vec<Complex64> {
        (0..len)
            .map(|i| Complex64::new((i as f64 * a).sin() + 0.2, (i as f64 * a * 0.61).cos()))
            .collect()
    }

    fn direct_dirichlet(n: u64, theta: f64) -> Complex64 {
        (1..=n)
            .map(|k| Complex64::from_polar(1.0, k as f64 * theta))
            .sum::<Complex64>()
            / n as f64
    }

    #[test]
    fn dirichlet_examples() {
        for n in [1, 2, 7, 1000] {
            assert_eq!(dirichlet_avg(n, 0.0), Complex64::new(1.0, 0.0));
        }
        assert!(dirichlet_avg(2, PI).norm() < 1e-15);
    }

    #[test]
    fn dirichlet_matches_direct_sum() {
        let mut t = 0.123f64;
        for n in [1u64, 2, 3, 5, 17, 64, 333] {
            for _ in 0..20 {
                t = (t * 7.31 + 0.77).fract();
                let theta = -PI + 2.0 * PI * t;
                let got = dirichlet_avg(n, theta);
                assert!((got - direct_dirichlet(n, theta)).norm() < 1e-12, "n={n} θ={theta}");
                let ratio = ((n as f64 * theta / 2.0).sin() / (n as f64 * (theta / 2.0).sin())).abs();
                assert!((got.norm() - ratio).abs() < 1e-12);
                assert!(got.norm() <= 1.0 + 1e-15);
            }
        }
    }

    #[test]
    fn dirichlet_series_branch_is_accurate() {
        for n in [3u64, 50, 900] {
            for theta in [1e-9, 3e-8, -5e-8] {
                let got = dirichlet_avg(n, theta);
                assert!((got - direct_dirichlet(n, theta)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn kernel_tail_vanishes_at_zero() {
        for rho in [1.1, 1.5, 2.0, 3.7] {
            assert_eq!(kernel_tail_sum(0.0, rho, 1 << 20).unwrap(), 0.0);
        }
    }

    #[test]
    fn kernel_tail_at_minus_pi() {
        // D_N(π) = 0 for even N and every indicator is 0 for N ≥ 2
        let v = kernel_tail_sum(-PI, 2.0, 16).unwrap();
        let direct: f64 = [2u64, 4, 8, 16]
            .iter()
            .map(|&n| direct_dirichlet(n, PI).norm_sqr())
            .sum();
        assert!(v < 1e-30 && direct < 1e-28);
        assert!(kernel_tail_sum(PI, 2.0, 16).is_err());
        assert!(kernel_tail_sum(0.1, 1.0, 16).is_err());
    }

    #[test]
    fn kernel_tail_is_even() {
        for theta in [0.01, 0.3, 1.0, 2.5] {
            let a = kernel_tail_sum(theta, 2.0, 1 << 12).unwrap();
            let b = kernel_tail_sum(-theta, 2.0, 1 << 12).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn indicator_is_closed() {
        assert_eq!(indicator(4, PI / 4.0), 1.0);
        assert_eq!(indicator(4, -PI / 4.0), 1.0);
        assert_eq!(indicator(4, PI / 4.0 + 1e-12), 0.0);
        let k = kernel_eval(4, 0.0);
        assert_eq!(k.difference, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn boundary_avoidance() {
        let set = lacunary(2.0, 1 << 10).unwrap();
        // M = 8, N = 2: j = 8·3/4 = 6 → θ_6 = π/2
        assert!(!grid_avoids_boundaries(8, &set));
        assert!(grid_avoids_boundaries(1_000_003, &set));
    }

    #[test]
    fn small_sweep_properties() {
        let s = kernel_tail_sweep(2.0, 1 << 12, 20_011).unwrap();
        assert_eq!(s.value_at_zero, 0.0);
        assert!(s.sup.is_finite() && s.sup > 0.0);
        assert!(s.evenness_residual < 1e-9);
        assert!(kernel_tail_sweep(2.0, 1 << 12, 8).is_err());
    }

    #[test]
    fn sin_halfangle_examples() {
        let r = sin_halfangle_bound_check(PI / 2.0).unwrap();
        assert_eq!(r.lhs, 0.5);
        assert!((r.rhs - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(r.pass);
        let r = sin_halfangle_bound_check(1e-12).unwrap();
        assert!(r.pass && r.lhs < 1e-12 && r.rhs < 1e-12);
        let r = sin_halfangle_bound_check(PI - 1e-9).unwrap();
        assert!(r.pass && r.rhs > 1.0 - 1e-15);
        assert!(sin_halfangle_bound_check(0.0).is_err());
        assert!(sin_halfangle_bound_check(PI).is_err());
        assert!(sin_halfangle_sweep(10_000).unwrap().pass);
    }

    #[test]
    fn periodogram_of_a_pure_frequency() {
        let beta = 0.9;
        let n = 64;
        let s = Signal::new(0, (0..=n).map(|k| Complex64::from_polar(1.0, k as f64 * beta)).collect());
        let est = periodogram(&s, n, 256, 10).unwrap();
        for k in 0..=10i64 {
            let want = Complex64::from_polar((n as f64 - k as f64) / n as f64, k as f64 * beta);
            assert!((est.correlation(k) - want).norm() < 1e-13);
            assert!((est.correlation(-k) - want.conj()).norm() < 1e-13);
        }
        assert!(est.mass_residual() < 1e-9);
        assert!(est.herglotz_residual() < 1e-8);
        // e^{inβ}·e^{inθ} is constant at θ = −β
        let peak = est
            .grid
            .samples()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.re.partial_cmp(&b.1.re).unwrap())
            .unwrap()
            .0;
        assert!((est.grid.node(peak) + beta).abs() <= 2.0 * PI / 256.0);
    }

    #[test]
    fn periodogram_of_zero_and_random() {
        let z = periodogram(&Signal::new(0, vec![ZERO; 40]), 32, 64, 5).unwrap();
        assert!(z.grid.samples().iter().all(|v| *v == ZERO));
        assert_eq!(z.mass(), 0.0);
        let s = Signal::new(-3, wave(100, 0.77));
        let est = periodogram(&s, 90, 256, 20).unwrap();
        assert!(est.grid.samples().iter().all(|v| v.re >= 0.0));
        assert!(est.mass_residual() < 1e-9);
        assert!(est.herglotz_residual() < 1e-8);
        assert!(periodogram(&s, 90, 179, 20).is_err());
        assert!(periodogram(&s, 97, 256, 20).is_err());
        assert!(periodogram(&s, 90, 256, 90).is_err());
    }

    #[test]
    fn bourgain_identity_small_cases() {
        let z = Signal::from_real(-4, &[0.0; 8]);
        let r = bourgain_identity_check(&z, &z, 2, 5, 64, 1e-8).unwrap();
        assert!(r.pass && r.params["direct_re"] == 0.0);
        let r = bourgain_identity_check(&Signal::delta(1), &Signal::delta(-1), 0, 1, 5, 1e-8).unwrap();
        assert!(r.pass);
        assert_eq!(r.params["direct_re"], 1.0);
        assert!((r.params["fourier_re"].as_f64().unwrap() - 1.0).abs() < 1e-14);
        assert!(bourgain_identity_check(&Signal::delta(1), &Signal::delta(-1), 0, 1, 4, 1e-8).is_err());
    }

    #[test]
    fn bourgain_identity_random_signals() {
        for seed in 0..10u64 {
            let f = Signal::new(-10 + seed as i64, wave(20 + seed as usize, 0.3 + seed as f64 * 0.1));
            let g = Signal::new(-5, wave(25, 1.3 - seed as f64 * 0.05));
            let (x, n) = (seed as i64 - 4, 10 + 3 * seed);
            let m = 2 * (f.max_abs_index() as usize + n as usize + x.unsigned_abs() as usize) + 1;
            let r = bourgain_identity_check(&f, &g, x, n, m, 1e-8).unwrap();
            assert!(r.pass, "{r:?}");
        }
    }
}
