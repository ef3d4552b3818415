//! Moving bilinear maximal inequalities between ℤ and finite systems via
//! truncated orbits.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::arith::IntPolynomial;
use crate::dynsys::{orbit_values, FiniteSystem, Observable};
use crate::error::{domain, precondition, Result};
use crate::maximal::bilinear_maximal_weighted;
use crate::report::InequalityReport;
use crate::signal::Signal;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `(2J+1)/(2(J−N̄)+1)`.
pub fn finite_j_factor(j: u64, n_bar: u64) -> f64 {
    (2 * j + 1) as f64 / (2 * (j - n_bar) + 1) as f64
}

fn check_setup(
    sys: &FiniteSystem,
    f: &Observable,
    g: &Observable,
    j: u64,
    n_bar: u64,
    weights: Option<&[Complex64]>,
) -> Result<()> {
    if f.len() != sys.size() || g.len() != sys.size() {
        return precondition("observable size differs from system size");
    }
    if n_bar == 0 {
        return domain("N̄ must be >= 1");
    }
    if j < 8 * n_bar {
        return precondition(format!("J = {j} is below 8·N̄ = {}", 8 * n_bar));
    }
    if let Some(w) = weights {
        if (w.len() as u64) < n_bar {
            return precondition(format!("weights stop at n = {}, need {n_bar}", w.len()));
        }
    }
    Ok(())
}

/// `x ↦ sup_{N ≤ N̄} |(1/N)·Σ_{n=1}^{N} a_n·f(T^n x)·g(T^{−n}x)|`.
pub fn system_bilinear_maximal(
    sys: &FiniteSystem,
    f: &Observable,
    g: &Observable,
    n_bar: u64,
    weights: Option<&[Complex64]>,
) -> Vec<f64> {
    (0..sys.size())
        .into_par_iter()
        .map(|x| {
            let (mut fwd, mut back) = (x, x);
            let mut acc = ZERO;
            let mut best = 0.0f64;
            for n in 1..=n_bar {
                fwd = sys.apply(fwd);
                back = sys.inverse()[back];
                let mut v = f.at(fwd) * g.at(back);
                if let Some(w) = weights {
                    v *= w[n as usize - 1];
                }
                acc += v;
                best = best.max((acc / n as f64).norm());
            }
            best
        })
        .collect()
}

/// `‖M(φ,ψ)‖₁ / (‖φ‖₂‖ψ‖₂)` for the ℤ-side maximal function with `N ≤ N̄`;
/// 0 when either input vanishes.
pub fn signal_strong_constant(
    phi: &Signal,
    psi: &Signal,
    n_bar: u64,
    weights: Option<&[Complex64]>,
) -> Result<f64> {
    let scale = phi.norm(2.0)? * psi.norm(2.0)?;
    if scale == 0.0 {
        return Ok(0.0);
    }
    let m = bilinear_maximal_weighted(phi, psi, &IntPolynomial::identity(), n_bar, weights)?;
    Ok(m.norm(1.0)? / scale)
}

/// `λ·#{j : M(φ,ψ)(j) > λ} / (‖φ‖₂‖ψ‖₂)`; 0 when either input vanishes.
pub fn signal_weak_constant(
    phi: &Signal,
    psi: &Signal,
    lambda: f64,
    n_bar: u64,
    weights: Option<&[Complex64]>,
) -> Result<f64> {
    if !(lambda > 0.0) {
        return domain(format!("level must be positive, got {lambda}"));
    }
    let scale = phi.norm(2.0)? * psi.norm(2.0)?;
    if scale == 0.0 {
        return Ok(0.0);
    }
    let m = bilinear_maximal_weighted(phi, psi, &IntPolynomial::identity(), n_bar, weights)?;
    let count = m.values.values().iter().filter(|v| v.re > lambda).count();
    Ok(lambda * count as f64 / scale)
}

/// Truncated orbits `(φ_x, ψ_x) = (f(T^n x), g(T^n x))_{|n| ≤ J}` of every point.
pub fn truncated_orbits(
    sys: &FiniteSystem,
    f: &Observable,
    g: &Observable,
    j: u64,
) -> Result<Vec<(Signal, Signal)>> {
    (0..sys.size())
        .map(|x| Ok((orbit_values(sys, f, x, j as usize)?, orbit_values(sys, g, x, j as usize)?)))
        .collect()
}

/// Largest strong-type ℤ constant over the truncated orbits of `sys`.
pub fn orbit_strong_constant(
    sys: &FiniteSystem,
    f: &Observable,
    g: &Observable,
    j: u64,
    n_bar: u64,
    weights: Option<&[Complex64]>,
) -> Result<f64> {
    check_setup(sys, f, g, j, n_bar, weights)?;
    let orbits = truncated_orbits(sys, f, g, j)?;
    let cs = orbits
        .par_iter()
        .map(|(phi, psi)| signal_strong_constant(phi, psi, n_bar, weights))
        .collect::<Result<Vec<_>>>()?;
    Ok(cs.into_iter().fold(0.0, f64::max))
}

/// Largest weak-type ℤ constant at level `λ` over the truncated orbits.
pub fn orbit_weak_constant(
    sys: &FiniteSystem,
    f: &Observable,
    g: &Observable,
    lambda: f64,
    j: u64,
    n_bar: u64,
    weights: Option<&[Complex64]>,
) -> Result<f64> {
    check_setup(sys, f, g, j, n_bar, weights)?;
    let orbits = truncated_orbits(sys, f, g, j)?;
    let cs = orbits
        .par_iter()
        .map(|(phi, psi)| signal_weak_constant(phi, psi, lambda, n_bar, weights))
        .collect::<Result<Vec<_>>>()?;
    Ok(cs.into_iter().fold(0.0, f64::max))
}

/// `∫ M dµ ≤ C·(2J+1)/(2(J−N̄)+1)·‖f‖₂‖g‖₂` for the system-side bilinear
/// maximal function `M` over `N ≤ N̄`.
pub fn transfer_bilinear_check(
    sys: &FiniteSystem,
    f: &Observable,
    g: &Observable,
    j: u64,
    n_bar: u64,
    c_emp: f64,
) -> Result<InequalityReport> {
    transfer_bilinear_check_weighted(sys, f, g, j, n_bar, c_emp, None)
}

/// [`transfer_bilinear_check`] with the n-th term multiplied by `a_n`.
pub fn transfer_bilinear_check_weighted(
    sys: &FiniteSystem,
    f: &Observable,
    g: &Observable,
    j: u64,
    n_bar: u64,
    c_emp: f64,
    weights: Option<&[Complex64]>,
) -> Result<InequalityReport> {
    check_setup(sys, f, g, j, n_bar, weights)?;
    if !(c_emp >= 0.0) {
        return domain(format!("constant must be nonnegative, got {c_emp}"));
    }
    let m = system_bilinear_maximal(sys, f, g, n_bar, weights);
    let lhs = m.iter().sum::<f64>() / sys.size() as f64;
    let factor = finite_j_factor(j, n_bar);
    let rhs = c_emp * factor * f.norm(2.0)? * g.norm(2.0)?;
    Ok(InequalityReport::new("transfer_bilinear", lhs, rhs, c_emp)
        .with_param("J", j)
        .with_param("N_bar", n_bar)
        .with_param("factor", factor)
        .with_param("weighted", weights.is_some()))
}

/// `µ{M > λ} ≤ C·(2J+1)/(2(J−N̄)+1)·‖f‖₂‖g‖₂/λ`.
#[allow(clippy::too_many_arguments)]
pub fn transfer_weak_type_check(
    sys: &FiniteSystem,
    f: &Observable,
    g: &Observable,
    lambda: f64,
    j: u64,
    n_bar: u64,
    c_emp: f64,
) -> Result<InequalityReport> {
    transfer_weak_type_check_weighted(sys, f, g, lambda, j, n_bar, c_emp, None)
}

#[allow(clippy::too_many_arguments)]
pub fn transfer_weak_type_check_weighted(
    sys: &FiniteSystem,
    f: &Observable,
    g: &Observable,
    lambda: f64,
    j: u64,
    n_bar: u64,
    c_emp: f64,
    weights: Option<&[Complex64]>,
) -> Result<InequalityReport> {
    if !(lambda > 0.0) {
        return domain(format!("level must be positive, got {lambda}"));
    }
    check_setup(sys, f, g, j, n_bar, weights)?;
    if !(c_emp >= 0.0) {
        return domain(format!("constant must be nonnegative, got {c_emp}"));
    }
    let m = system_bilinear_maximal(sys, f, g, n_bar, weights);
    let lhs = m.iter().filter(|v| **v > lambda).count() as f64 / sys.size() as f64;
    let factor = finite_j_factor(j, n_bar);
    let rhs = c_emp * factor * f.norm(2.0)? * g.norm(2.0)? / lambda;
    Ok(InequalityReport::new("transfer_weak_type", lhs, rhs, c_emp)
        .with_param("lambda", lambda)
        .with_param("J", j)
        .with_param("N_bar", n_bar)
        .with_param("factor", factor)
        .with_param("weighted", weights.is_some()))
}

/// Cauchy–Schwarz over orbits:
/// `∫‖φ_x‖₂‖ψ_x‖₂ dµ ≤ (∫‖φ_x‖₂² dµ)^{1/2}(∫‖ψ_x‖₂² dµ)^{1/2} = (2J+1)‖f‖₂‖g‖₂`.
/// The relative gap in the final identity is recorded as `identity_residual`.
pub fn orbit_cauchy_schwarz_check(
    sys: &FiniteSystem,
    f: &Observable,
    g: &Observable,
    j: u64,
) -> Result<InequalityReport> {
    let orbits = truncated_orbits(sys, f, g, j)?;
    let m = sys.size() as f64;
    let energy = |s: &Signal| s.values().iter().map(|v| v.norm_sqr()).sum::<f64>();
    let mut product = 0.0;
    let (mut ef, mut eg) = (0.0, 0.0);
    for (phi, psi) in &orbits {
        let (a, b) = (energy(phi), energy(psi));
        product += a.sqrt() * b.sqrt();
        ef += a;
        eg += b;
    }
    let lhs = product / m;
    let rhs = (ef / m).sqrt() * (eg / m).sqrt();
    let closed = (2 * j + 1) as f64 * f.norm(2.0)? * g.norm(2.0)?;
    let residual = if closed > 0.0 {
        (rhs - closed).abs() / closed
    } else {
        rhs
    };
    Ok(InequalityReport::new("orbit_cauchy_schwarz", lhs, rhs * (1.0 + 1e-12), 1.0)
        .with_param("closed_form", closed)
        .with_param("identity_residual", residual))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(m: usize, a: f64, b: f64) -> Observable {
        Observable::new(
            (0..m)
                .map(|i| Complex64::new((i as f64 * a).sin(), (i as f64 * b).cos() * 0.3))
                .collect(),
        )
    }

    #[test]
    fn factor_decreases_to_one() {
        let mut prev = f64::INFINITY;
        for j in [8u64, 16, 64, 512, 1 << 16] {
            let v = finite_j_factor(j * 4, 4);
            assert!(v < prev && v > 1.0);
            prev = v;
        }
        assert!(prev - 1.0 < 1e-4);
    }

    #[test]
    fn zero_inputs() {
        let sys = FiniteSystem::cyclic(5).unwrap();
        let z = Observable::constant(5, ZERO);
        let r = transfer_bilinear_check(&sys, &z, &z, 64, 8, 1.0).unwrap();
        assert!(r.pass && r.lhs == 0.0 && r.rhs == 0.0);
        let r = transfer_weak_type_check(&sys, &z, &obs(5, 1.0, 2.0), 0.1, 64, 8, 1.0).unwrap();
        assert!(r.pass && r.lhs == 0.0);
        assert!(transfer_bilinear_check(&sys, &z, &z, 63, 8, 1.0).is_err());
        assert!(transfer_weak_type_check(&sys, &z, &z, 0.0, 64, 8, 1.0).is_err());
    }

    #[test]
    fn constant_inputs_above_level() {
        let sys = FiniteSystem::random(7, 1).unwrap();
        let f = Observable::constant(7, Complex64::new(0.5, 0.0));
        let g = Observable::constant(7, Complex64::new(-0.8, 0.0));
        let m = system_bilinear_maximal(&sys, &f, &g, 8, None);
        assert!(m.iter().all(|v| (v - 0.4).abs() < 1e-15));
        let r = transfer_weak_type_check(&sys, &f, &g, 0.41, 64, 8, 1.0).unwrap();
        assert_eq!(r.lhs, 0.0);
    }

    #[test]
    fn self_consistent_constant_passes() {
        let sys = FiniteSystem::cyclic(8).unwrap();
        let (f, g) = (obs(8, 0.7, 1.9), obs(8, 2.3, 0.4));
        let (n_bar, j) = (8, 64);
        let c = orbit_strong_constant(&sys, &f, &g, j, n_bar, None).unwrap();
        assert!(c > 0.0);
        assert!(transfer_bilinear_check(&sys, &f, &g, j, n_bar, c).unwrap().pass);
        for lambda in [0.1, 0.5, 1.0] {
            let cw = orbit_weak_constant(&sys, &f, &g, lambda, j, n_bar, None).unwrap();
            assert!(transfer_weak_type_check(&sys, &f, &g, lambda, j, n_bar, cw).unwrap().pass);
        }
    }

    #[test]
    fn system_maximal_matches_orbit_maximal() {
        let sys = FiniteSystem::random(11, 9).unwrap();
        let (f, g) = (obs(11, 0.3, 1.0), obs(11, 1.7, 0.2));
        let direct = system_bilinear_maximal(&sys, &f, &g, 6, None);
        for (x, (phi, psi)) in truncated_orbits(&sys, &f, &g, 48).unwrap().iter().enumerate() {
            let m = bilinear_maximal_weighted(phi, psi, &IntPolynomial::identity(), 6, None).unwrap();
            assert!((m.at(0) - direct[x]).abs() < 1e-14);
        }
    }

    #[test]
    fn unit_weights_reduce_to_unweighted() {
        let sys = FiniteSystem::random(9, 4).unwrap();
        let (f, g) = (obs(9, 0.9, 0.1), obs(9, 0.2, 1.4));
        let ones = vec![Complex64::new(1.0, 0.0); 8];
        let a = transfer_bilinear_check(&sys, &f, &g, 64, 8, 2.0).unwrap();
        let b = transfer_bilinear_check_weighted(&sys, &f, &g, 64, 8, 2.0, Some(&ones)).unwrap();
        assert_eq!(a.lhs, b.lhs);
        let theta = 0.77;
        let w: Vec<Complex64> = (1..=8).map(|n| Complex64::from_polar(1.0, n as f64 * theta)).collect();
        let m = system_bilinear_maximal(&sys, &f, &g, 8, Some(&w));
        for (x, got) in m.iter().enumerate() {
            let want = (1..=8i64)
                .map(|n_len| {
                    let s: Complex64 = (1..=n_len)
                        .map(|n| w[n as usize - 1] * f.at(sys.power(x, n)) * g.at(sys.power(x, -n)))
                        .sum();
                    (s / n_len as f64).norm()
                })
                .fold(0.0, f64::max);
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn cauchy_schwarz_identity() {
        let sys = FiniteSystem::random(13, 2).unwrap();
        let (f, g) = (obs(13, 0.5, 0.8), obs(13, 1.1, 2.1));
        let r = orbit_cauchy_schwarz_check(&sys, &f, &g, 40).unwrap();
        assert!(r.pass);
        assert!(r.params["identity_residual"].as_f64().unwrap() < 1e-12);
    }
}
