//! Finitely supported signals on ℤ and their Fourier transforms on an
//! equispaced grid of the circle [−π, π).

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{domain, precondition, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Below this length one factor is convolved by the direct double loop,
/// which is exact for delta inputs.
const DIRECT_CONVOLUTION_LEN: usize = 32;

/// A complex function on ℤ that vanishes outside `offset..offset + len`.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    offset: i64,
    values: Vec<Complex64>,
}

impl Signal {
    pub fn new(offset: i64, values: Vec<Complex64>) -> Self {
        Self { offset, values }
    }

    pub fn from_real(offset: i64, values: &[f64]) -> Self {
        Self::new(offset, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self::new(0, Vec::new())
    }

    /// Unit mass at `k`.
    pub fn delta(k: i64) -> Self {
        Self::new(k, vec![Complex64::new(1.0, 0.0)])
    }

    pub fn offset(&self) -> i64 {
        self.offset
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

    /// One past the last stored index.
    pub fn end(&self) -> i64 {
        self.offset + self.values.len() as i64
    }

    /// Value at `n`; zero outside the stored window.
    #[inline]
    pub fn get(&self, n: i64) -> Complex64 {
        let i = n.wrapping_sub(self.offset);
        if i >= 0 && (i as u64) < self.values.len() as u64 {
            self.values[i as usize]
        } else {
            ZERO
        }
    }

    /// Iterates `(n, s(n))` over the stored window.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.offset + i as i64, v))
    }

    /// Largest |n| over the stored window (0 for an empty signal).
    pub fn max_abs_index(&self) -> i64 {
        if self.is_empty() {
            0
        } else {
            self.offset.abs().max((self.end() - 1).abs())
        }
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == ZERO)
    }

    /// ℓ^r norm for r ≥ 1, or the sup norm for `r = f64::INFINITY`.
    pub fn norm(&self, r: f64) -> Result<f64> {
        lr_norm(self.values.iter().map(|v| v.norm()), r)
    }

    /// `result(n) = s(n − k)`.
    pub fn shift(&self, k: i64) -> Signal {
        Signal::new(self.offset + k, self.values.clone())
    }

    /// `result(n) = s(n)·e^{inθ}`.
    pub fn modulate(&self, theta: f64) -> Signal {
        let values = self
            .iter()
            .map(|(n, v)| v * Complex64::from_polar(1.0, n as f64 * theta))
            .collect();
        Signal::new(self.offset, values)
    }

    /// Samples of `ŝ(θ) = Σ s(n)e^{−inθ}` on the `size`-point grid.
    ///
    /// The grid must hold at least twice the stored length so that the
    /// trapezoidal rule reproduces Parseval exactly.
    pub fn dft(&self, size: usize) -> Result<TorusGrid> {
        if size == 0 || size < 2 * self.len() {
            return precondition(format!(
                "grid of {size} nodes is too small for a signal of length {}",
                self.len()
            ));
        }
        // e^{−inθ_j} = (−1)^n · e^{−2πinj/M}
        let mut buf = vec![ZERO; size];
        let m = size as i64;
        for (n, v) in self.iter() {
            let sign = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            buf[n.rem_euclid(m) as usize] += v * sign;
        }
        FftPlanner::new().plan_fft_forward(size).process(&mut buf);
        Ok(TorusGrid { size, samples: buf })
    }

    /// Exact linear convolution `(a*b)(j) = Σ_x a(x)b(j − x)`.
    pub fn convolve(&self, other: &Signal) -> Signal {
        if self.is_empty() || other.is_empty() {
            return Signal::new(self.offset + other.offset, Vec::new());
        }
        let out_len = self.len() + other.len() - 1;
        let offset = self.offset + other.offset;
        if self.len().min(other.len()) <= DIRECT_CONVOLUTION_LEN {
            return Signal::new(offset, direct_convolution(&self.values, &other.values));
        }
        let size = out_len.next_power_of_two();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(size);
        let inv = planner.plan_fft_inverse(size);
        let mut a = self.values.clone();
        a.resize(size, ZERO);
        let mut b = other.values.clone();
        b.resize(size, ZERO);
        fwd.process(&mut a);
        fwd.process(&mut b);
        for (x, y) in a.iter_mut().zip(&b) {
            *x *= y;
        }
        inv.process(&mut a);
        let scale = 1.0 / size as f64;
        a.truncate(out_len);
        a.iter_mut().for_each(|v| *v *= scale);
        Signal::new(offset, a)
    }
}

pub(crate) fn direct_convolution(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// ℓ^r norm of a sequence of moduli.
pub fn lr_norm(moduli: impl Iterator<Item = f64>, r: f64) -> Result<f64> {
    if r.is_nan() || r < 1.0 {
        return domain(format!("norm exponent must be >= 1, got {r}"));
    }
    if r == f64::INFINITY {
        return Ok(moduli.fold(0.0, f64::max));
    }
    if r == 1.0 {
        return Ok(moduli.sum());
    }
    if r == 2.0 {
        return Ok(moduli.map(|a| a * a).sum::<f64>().sqrt());
    }
    Ok(moduli.map(|a| a.powf(r)).sum::<f64>().powf(1.0 / r))
}

/// Values on the nodes `θ_j = −π + 2πj/M`, `j = 0..M`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusGrid {
    size: usize,
    samples: Vec<Complex64>,
}

impl TorusGrid {
    pub fn zeros(size: usize) -> Self {
        Self {
            size,
            samples: vec![ZERO; size],
        }
    }

    pub fn from_samples(samples: Vec<Complex64>) -> Self {
        Self {
            size: samples.len(),
            samples,
        }
    }

    /// Tabulates `f` on the nodes.
    pub fn tabulate(size: usize, f: impl Fn(f64) -> Complex64) -> Self {
        Self::from_samples((0..size).map(|j| f(node(size, j))).collect())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn node(&self, j: usize) -> f64 {
        node(self.size, j)
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.size).map(|j| node(self.size, j))
    }

    /// Trapezoidal rule for `∫_{−π}^{π} F(θ) dθ`; exact for trigonometric
    /// polynomials whose frequencies stay below `M` in modulus.
    pub fn quadrature(&self) -> Complex64 {
        let s: Complex64 = self.samples.iter().sum();
        s * (2.0 * PI / self.size as f64)
    }

    /// `∫ |F(θ)|² dθ` by the same rule.
    pub fn quadrature_abs2(&self) -> f64 {
        let s: f64 = self.samples.iter().map(|v| v.norm_sqr()).sum();
        s * 2.0 * PI / self.size as f64
    }

    /// Pointwise product with another grid function of the same size.
    pub fn mul(&self, other: &TorusGrid) -> Result<TorusGrid> {
        if self.size != other.size {
            return precondition("grid sizes differ");
        }
        Ok(TorusGrid::from_samples(
            self.samples.iter().zip(&other.samples).map(|(a, b)| a * b).collect(),
        ))
    }
}

#[inline]
pub fn node(size: usize, j: usize) -> f64 {
    -PI + 2.0 * PI * j as f64 / size as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn pseudo_random(len: usize, seed: u64) -> Vec<Complex64> {
        let mut x = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        (0..len)
            .map(|_| {
                x ^= x << 13;
                x ^= x >> 7;
                x ^= x << 17;
                let a = (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                x ^= x << 13;
                x ^= x >> 7;
                x ^= x << 17;
                let b = (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                Complex64::new(a, b)
            })
            .collect()
    }

    #[test]
    fn norms_of_small_signals() {
        assert_eq!(Signal::delta(0).norm(2.0).unwrap(), 1.0);
        assert_eq!(Signal::from_real(0, &[1.0; 4]).norm(2.0).unwrap(), 2.0);
        assert_eq!(Signal::from_real(0, &[3.0, 4.0]).norm(2.0).unwrap(), 5.0);
        assert_eq!(Signal::from_real(0, &[3.0, -4.0]).norm(f64::INFINITY).unwrap(), 4.0);
        assert_eq!(Signal::from_real(0, &[3.0, -4.0]).norm(1.0).unwrap(), 7.0);
    }

    #[test]
    fn norm_rejects_exponent_below_one() {
        assert!(matches!(
            Signal::delta(0).norm(0.5),
            Err(crate::Error::Domain(_))
        ));
        assert!(Signal::delta(0).norm(f64::NAN).is_err());
    }

    #[test]
    fn shift_moves_support() {
        assert_eq!(Signal::delta(0).shift(1), Signal::delta(1));
        let s = Signal::new(-3, pseudo_random(9, 1));
        assert_eq!(s.shift(0), s);
        let t = s.shift(7);
        for n in -10..20 {
            assert_eq!(t.get(n), s.get(n - 7));
        }
        for r in [1.0, 2.0, 4.0, f64::INFINITY] {
            assert_eq!(t.norm(r).unwrap(), s.norm(r).unwrap());
        }
    }

    #[test]
    fn modulation_is_isometric() {
        let s = Signal::new(-5, pseudo_random(12, 2));
        assert_eq!(s.modulate(0.0), s);
        assert_eq!(Signal::delta(0).modulate(1.3), Signal::delta(0));
        let t = s.modulate(2.1);
        for r in [1.0, 2.0, 4.0, f64::INFINITY] {
            let (a, b) = (t.norm(r).unwrap(), s.norm(r).unwrap());
            assert!((a - b).abs() <= 1e-14 * b, "r = {r}");
        }
    }

    #[test]
    fn dft_of_deltas() {
        let g = Signal::delta(0).dft(8).unwrap();
        assert!(g.samples().iter().all(|v| (v - c(1.0)).norm() < 1e-15));
        let g = Signal::delta(1).dft(16).unwrap();
        for (j, th) in g.nodes().enumerate() {
            let want = Complex64::from_polar(1.0, -th);
            assert!((g.samples()[j] - want).norm() < 1e-14);
        }
    }

    #[test]
    fn dft_rejects_undersized_grid() {
        let s = Signal::new(0, pseudo_random(16, 3));
        assert!(matches!(s.dft(31), Err(crate::Error::Precondition(_))));
        assert!(s.dft(32).is_ok());
    }

    #[test]
    fn dft_matches_direct_sum_and_parseval() {
        let s = Signal::new(-7, pseudo_random(16, 4));
        let g = s.dft(64).unwrap();
        for (j, th) in g.nodes().enumerate() {
            let direct: Complex64 = s
                .iter()
                .map(|(n, v)| v * Complex64::from_polar(1.0, -(n as f64) * th))
                .sum();
            assert!((g.samples()[j] - direct).norm() < 1e-12);
        }
        let n2 = s.norm(2.0).unwrap().powi(2);
        assert!((g.quadrature_abs2() / (2.0 * PI) - n2).abs() <= 1e-10 * n2);
    }

    #[test]
    fn convolution_identities() {
        let b = Signal::new(4, pseudo_random(10, 5));
        assert_eq!(Signal::delta(0).convolve(&b), b);
        assert_eq!(Signal::delta(2).convolve(&Signal::delta(3)), Signal::delta(5));
    }

    #[test]
    fn fft_convolution_matches_double_loop() {
        for seed in 0..8 {
            let a = Signal::new(-3, pseudo_random(33 + seed as usize, seed));
            let b = Signal::new(11, pseudo_random(40, seed + 100));
            let fast = a.convolve(&b);
            assert_eq!(fast.offset(), 8);
            let slow = direct_convolution(a.values(), b.values());
            assert_eq!(fast.len(), slow.len());
            for (x, y) in fast.values().iter().zip(&slow) {
                assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn convolution_theorem_on_grid() {
        let a = Signal::new(-9, pseudo_random(40, 6));
        let b = Signal::new(2, pseudo_random(37, 7));
        let ab = a.convolve(&b);
        let m = 256;
        let lhs = ab.dft(m).unwrap();
        let rhs = a.dft(m).unwrap().mul(&b.dft(m).unwrap()).unwrap();
        let scale = a.norm(1.0).unwrap() * b.norm(1.0).unwrap();
        let err = lhs
            .samples()
            .iter()
            .zip(rhs.samples())
            .fold(0.0f64, |e, (x, y)| e.max((x - y).norm()));
        assert!(err <= 1e-9 * scale);
    }
}
