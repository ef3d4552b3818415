//! Finite measure-preserving systems: a permutation of `{0, …, m−1}` with
//! the uniform measure, observables on it, and a sampled circle rotation.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Error, Result};
use crate::signal::{lr_norm, Signal};

/// An invertible map of a finite set preserving the uniform measure.
///
/// Powers `T^k` are answered in O(1) through the cycle decomposition, for
/// any `k ∈ ℤ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSystem {
    map: Vec<usize>,
    inverse: Vec<usize>,
    cycles: Vec<Vec<usize>>,
    cycle_of: Vec<usize>,
    position: Vec<usize>,
}

impl FiniteSystem {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let m = map.len();
        if m == 0 {
            return domain("a finite system needs at least one point");
        }
        let mut inverse = vec![usize::MAX; m];
        for (x, &y) in map.iter().enumerate() {
            if y >= m {
                return domain(format!("map({x}) = {y} is outside 0..{m}"));
            }
            if inverse[y] != usize::MAX {
                return domain(format!("map is not injective: {y} has two preimages"));
            }
            inverse[y] = x;
        }
        let mut cycles = Vec::new();
        let mut cycle_of = vec![usize::MAX; m];
        let mut position = vec![0; m];
        for start in 0..m {
            if cycle_of[start] != usize::MAX {
                continue;
            }
            let id = cycles.len();
            let mut cycle = Vec::new();
            let mut x = start;
            while cycle_of[x] == usize::MAX {
                cycle_of[x] = id;
                position[x] = cycle.len();
                cycle.push(x);
                x = map[x];
            }
            cycles.push(cycle);
        }
        Ok(Self {
            map,
            inverse,
            cycles,
            cycle_of,
            position,
        })
    }

    /// `x ↦ x + 1 mod m`.
    pub fn cyclic(m: usize) -> Result<Self> {
        Self::new((0..m).map(|x| (x + 1) % m.max(1)).collect())
    }

    pub fn identity(m: usize) -> Result<Self> {
        Self::new((0..m).collect())
    }

    /// Uniformly random permutation, reproducible from `seed`.
    pub fn random(m: usize, seed: u64) -> Result<Self> {
        Self::random_with(m, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn random_with<R: rand::Rng + ?Sized>(m: usize, rng: &mut R) -> Result<Self> {
        let mut map: Vec<usize> = (0..m).collect();
        map.shuffle(rng);
        Self::new(map)
    }

    pub fn size(&self) -> usize {
        self.map.len()
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn inverse(&self) -> &[usize] {
        &self.inverse
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    /// `T^k x` for any integer `k`; negative powers follow the inverse.
    #[inline]
    pub fn power(&self, x: usize, k: i64) -> usize {
        let cycle = &self.cycles[self.cycle_of[x]];
        let len = cycle.len() as i64;
        let pos = (self.position[x] as i64 + k.rem_euclid(len)) % len;
        cycle[pos as usize]
    }

    pub fn cycles(&self) -> &[Vec<usize>] {
        &self.cycles
    }

    /// Length of the cycle through `x`.
    pub fn cycle_len(&self, x: usize) -> usize {
        self.cycles[self.cycle_of[x]].len()
    }

    /// A single cycle means the uniform measure is ergodic.
    pub fn is_ergodic(&self) -> bool {
        self.cycles.len() == 1
    }

    /// Mean of `f` over the cycle of `x`, the conditional expectation on
    /// the invariant σ-algebra evaluated at `x`.
    pub fn cycle_average(&self, f: &Observable, x: usize) -> Complex64 {
        let cycle = &self.cycles[self.cycle_of[x]];
        let s: Complex64 = cycle.iter().map(|&y| f.values[y]).sum();
        s / cycle.len() as f64
    }
}

/// Every permutation of `{0, …, m−1}` in Heap's order.
pub fn all_permutations(m: usize) -> Vec<Vec<usize>> {
    let mut a: Vec<usize> = (0..m).collect();
    let mut out = vec![a.clone()];
    let mut c = vec![0usize; m];
    let mut i = 1;
    while i < m {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            out.push(a.clone());
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// A complex function on the points of a finite system.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    values: Vec<Complex64>,
}

impl Observable {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self { values }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn constant(m: usize, c: Complex64) -> Self {
        Self::new(vec![c; m])
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn at(&self, x: usize) -> Complex64 {
        self.values[x]
    }

    pub fn mean(&self) -> Complex64 {
        let s: Complex64 = self.values.iter().sum();
        s / self.values.len() as f64
    }

    /// `L^r` norm against the uniform probability measure.
    pub fn norm(&self, r: f64) -> Result<f64> {
        let m = self.values.len() as f64;
        if r == f64::INFINITY {
            return lr_norm(self.values.iter().map(|v| v.norm()), r);
        }
        lr_norm(self.values.iter().map(|v| v.norm() / m.powf(1.0 / r)), r)
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.norm()))
    }

    /// `f ∘ T`.
    pub fn compose(&self, sys: &FiniteSystem) -> Observable {
        Observable::new((0..sys.size()).map(|x| self.values[sys.apply(x)]).collect())
    }

    pub fn product(&self, other: &Observable) -> Observable {
        Observable::new(self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0 && v.re >= 0.0)
    }
}

fn check_point(sys: &FiniteSystem, x: usize) -> Result<()> {
    if x >= sys.size() {
        return domain(format!("point {x} outside system of size {}", sys.size()));
    }
    Ok(())
}

fn check_observable(sys: &FiniteSystem, f: &Observable) -> Result<()> {
    if f.len() != sys.size() {
        return Err(Error::Precondition(format!(
            "observable has {} values, system has {} points",
            f.len(),
            sys.size()
        )));
    }
    Ok(())
}

/// Two-sided truncated orbit `n ↦ f(T^n x)` for `|n| ≤ n_max`.
pub fn orbit_values(sys: &FiniteSystem, f: &Observable, x: usize, n_max: usize) -> Result<Signal> {
    check_point(sys, x)?;
    check_observable(sys, f)?;
    let j = n_max as i64;
    let values = (-j..=j).map(|n| f.at(sys.power(x, n))).collect();
    Ok(Signal::new(-j, values))
}

/// `h = g − g∘T`.
pub fn coboundary(sys: &FiniteSystem, g: &Observable) -> Result<Observable> {
    check_observable(sys, g)?;
    Ok(Observable::new(
        (0..sys.size()).map(|x| g.at(x) - g.at(sys.apply(x))).collect(),
    ))
}

/// Reads `point,map(point),f(point)re,f(point)im` rows. A non-numeric first
/// line is treated as a header; points may appear in any order but each
/// exactly once.
pub fn load_csv(text: &str) -> Result<(FiniteSystem, Observable)> {
    let mut rows: Vec<(usize, usize, Complex64)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(Error::Parse(format!(
                "line {}: expected 4 columns, found {}",
                lineno + 1,
                fields.len()
            )));
        }
        let point = fields[0].parse::<usize>();
        if rows.is_empty() && point.is_err() {
            continue;
        }
        let bad = |what: &str| Error::Parse(format!("line {}: bad {what}", lineno + 1));
        let point = point.map_err(|_| bad("point"))?;
        let image = fields[1].parse::<usize>().map_err(|_| bad("map value"))?;
        let re = fields[2].parse::<f64>().map_err(|_| bad("real part"))?;
        let im = fields[3].parse::<f64>().map_err(|_| bad("imaginary part"))?;
        rows.push((point, image, Complex64::new(re, im)));
    }
    let m = rows.len();
    let mut map = vec![usize::MAX; m];
    let mut values = vec![Complex64::new(0.0, 0.0); m];
    for (p, y, v) in rows {
        if p >= m || map[p] != usize::MAX {
            return Err(Error::Parse(format!("point {p} repeated or outside 0..{m}")));
        }
        map[p] = y;
        values[p] = v;
    }
    Ok((FiniteSystem::new(map)?, Observable::new(values)))
}

/// Orbit of the rotation `t ↦ t + α mod 1` started at `start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationOrbit {
    pub alpha: f64,
    pub start: f64,
    pub length: usize,
}

impl RotationOrbit {
    pub fn new(alpha: f64, start: f64, length: usize) -> Result<Self> {
        if length == 0 {
            return domain("rotation orbit length must be >= 1");
        }
        if !(0.0..1.0).contains(&start) || !alpha.is_finite() {
            return domain("rotation start must lie in [0, 1) and alpha be finite");
        }
        Ok(Self { alpha, start, length })
    }

    /// `frac(start + n·α)`.
    pub fn sample(&self, n: usize) -> f64 {
        let t = (self.start + n as f64 * self.alpha).rem_euclid(1.0);
        if t >= 1.0 {
            0.0
        } else {
            t
        }
    }
}

/// `n ↦ e^{2πik·frac(start + nα)}` for `n = 0, …, length − 1`.
pub fn rotation_samples(orbit: &RotationOrbit, k: i64) -> Signal {
    let values = (0..orbit.length)
        .map(|n| Complex64::from_polar(1.0, 2.0 * PI * k as f64 * orbit.sample(n)))
        .collect();
    Signal::new(0, values)
}
