//! Uniformly sampled functions of one base variable with an explicit tail
//! model, the common currency of the convex kit and of sampled generating
//! functions.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Evaluate a polynomial given by its coefficient list `c[0] + c[1] x + …`.
pub fn polyval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Coefficients of the derivative polynomial.
pub fn polyder(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| c * i as f64)
        .collect()
}

/// Degree after dropping trailing (near-)zero coefficients.
pub fn polydeg(coeffs: &[f64]) -> usize {
    let mut d = 0;
    for (i, &c) in coeffs.iter().enumerate() {
        if c != 0.0 {
            d = i;
        }
    }
    d
}

/// Behaviour of a grid function beyond its sampled window: a polynomial,
/// together with the Morse index its simple model declares (0 for convex
/// tails, 1 for concave ones on the line).
#[derive(Debug, Clone, PartialEq)]
pub struct TailModel {
    pub coeffs: Vec<f64>,
    pub index: usize,
}

impl TailModel {
    pub fn poly(coeffs: Vec<f64>, index: usize) -> Self {
        TailModel { coeffs, index }
    }
}

/// A function of one real variable sampled on a uniform grid, with a domain
/// mask for `+∞` entries and a declared tail model used outside the window.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    x0: f64,
    step: f64,
    values: Vec<f64>,
    /// `true` where the value is finite; masked entries read as `+∞`.
    mask: Vec<bool>,
    tail: TailModel,
}

impl GridFunction {
    pub fn new(x0: f64, step: f64, values: Vec<f64>, tail: TailModel) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::Range { what: "grid step", value: step });
        }
        if values.len() < 2 {
            return Err(Error::Arity("grid function needs at least two samples".into()));
        }
        let mask = vec![true; values.len()];
        Ok(GridFunction { x0, step, values, mask, tail })
    }

    pub fn with_mask(mut self, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != self.values.len() {
            return Err(Error::DimensionMismatch {
                expected: self.values.len(),
                got: mask.len(),
                what: "grid mask",
            });
        }
        self.mask = mask;
        Ok(self)
    }

    /// Sample a closed-form function on `[a, b]` with the given step.
    pub fn sample(a: f64, b: f64, step: f64, f: impl Fn(f64) -> f64, tail: TailModel) -> Result<Self> {
        if !(b > a) {
            return Err(Error::Range { what: "grid range", value: b - a });
        }
        let n = crate::math::round((b - a) / step) as usize + 1;
        let values = (0..n).map(|i| f(a + i as f64 * step)).collect();
        GridFunction::new(a, step, values, tail)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn xmax(&self) -> f64 {
        self.x0 + (self.values.len() - 1) as f64 * self.step
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn tail(&self) -> &TailModel {
        &self.tail
    }

    pub fn is_finite_at(&self, i: usize) -> bool {
        self.mask[i]
    }

    /// Value by linear interpolation inside the window, tail model outside.
    /// Masked entries propagate `+∞`.
    pub fn value(&self, x: f64) -> f64 {
        if x < self.x0 || x > self.xmax() {
            return polyval(&self.tail.coeffs, x);
        }
        let t = (x - self.x0) / self.step;
        let i = (crate::math::floor(t) as usize).min(self.values.len() - 2);
        let frac = t - i as f64;
        // only nodes with nonzero interpolation weight can push the value
        // to +inf
        if (frac < 1.0 && !self.mask[i]) || (frac > 0.0 && !self.mask[i + 1]) {
            return f64::INFINITY;
        }
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    /// Derivative: centered differences of the samples inside the window
    /// (linearly interpolated between nodes), the tail model's derivative at
    /// and beyond the boundary.
    pub fn derivative(&self, x: f64) -> f64 {
        let n = self.values.len();
        if x < self.x0 || x > self.xmax() {
            return polyval(&polyder(&self.tail.coeffs), x);
        }
        let node_deriv = |i: usize| -> f64 {
            if i == 0 || i == n - 1 {
                polyval(&polyder(&self.tail.coeffs), self.x(i))
            } else {
                (self.values[i + 1] - self.values[i - 1]) / (2.0 * self.step)
            }
        };
        let t = (x - self.x0) / self.step;
        let i = (crate::math::floor(t) as usize).min(n - 2);
        let frac = t - i as f64;
        node_deriv(i) * (1.0 - frac) + node_deriv(i + 1) * frac
    }

    /// Smallest and largest discrete slope over the finite part of the window.
    pub fn slope_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.values.len() - 1 {
            if self.mask[i] && self.mask[i + 1] {
                let s = (self.values[i + 1] - self.values[i]) / self.step;
                lo = lo.min(s);
                hi = hi.max(s);
            }
        }
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_interpolation_and_tail() {
        let g = GridFunction::sample(-1.0, 1.0, 0.5, |x| x * x, TailModel::poly(vec![0.0, 0.0, 1.0], 0))
            .unwrap();
        assert_eq!(g.len(), 5);
        assert!((g.value(0.25) - 0.125).abs() < 1e-12); // chord of x^2
        assert!((g.value(3.0) - 9.0).abs() < 1e-12); // tail
        assert!((g.derivative(2.0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn masked_entries_read_infinite() {
        let g = GridFunction::new(0.0, 1.0, vec![1.0, 2.0, 3.0], TailModel::poly(vec![0.0], 0))
            .unwrap()
            .with_mask(vec![true, false, true])
            .unwrap();
        assert!(g.value(0.5).is_infinite());
        assert!((g.value(0.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_step_rejected() {
        assert!(GridFunction::new(0.0, 0.0, vec![1.0, 2.0], TailModel::poly(vec![0.0], 0)).is_err());
    }
}
