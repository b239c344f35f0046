//! The torus `T^n = R^n / Z^n`, its universal cover and the weighted
//! metric on finite pre-histories.

use crate::error::{LabError, Result};
use crate::linalg::Vector;

/// A point of `T^n`, every coordinate in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusPoint<const N: usize>([f64; N]);

/// A point of the universal cover `R^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverPoint<const N: usize>(pub [f64; N]);

/// An integer translation in `Z^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeVector<const N: usize>(pub [i64; N]);

#[inline]
fn frac(x: f64) -> f64 {
    let r = x - x.floor();
    // x slightly below an integer can round up to exactly 1.0
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

impl<const N: usize> TorusPoint<N> {
    /// Reduces arbitrary coordinates mod 1.
    pub fn new(coords: [f64; N]) -> Self {
        TorusPoint(coords.map(frac))
    }

    pub fn origin() -> Self {
        TorusPoint([0.0; N])
    }

    #[inline]
    pub fn coords(&self) -> &[f64; N] {
        &self.0
    }

    /// The lift lying in the fundamental domain `[0, 1)^n`.
    #[inline]
    pub fn to_cover(self) -> CoverPoint<N> {
        CoverPoint(self.0)
    }
}

impl<const N: usize> CoverPoint<N> {
    #[inline]
    pub fn coords(&self) -> &[f64; N] {
        &self.0
    }

    pub fn translate(&self, k: &LatticeVector<N>) -> Self {
        CoverPoint(std::array::from_fn(|i| self.0[i] + k.0[i] as f64))
    }
}

impl<const N: usize> LatticeVector<N> {
    pub fn zero() -> Self {
        LatticeVector([0; N])
    }

    pub fn as_f64(&self) -> Vector<N> {
        self.0.map(|k| k as f64)
    }
}

/// Canonical projection `R^n -> T^n`.
#[inline]
pub fn project<const N: usize>(p: &CoverPoint<N>) -> TorusPoint<N> {
    TorusPoint::new(p.0)
}

/// The lift of `x` with every coordinate in `(-1/2, 1/2]` of `reference`.
pub fn lift_near<const N: usize>(x: &TorusPoint<N>, reference: &CoverPoint<N>) -> CoverPoint<N> {
    CoverPoint(std::array::from_fn(|i| {
        let d = x.0[i] - reference.0[i];
        let k = (d - 0.5).ceil();
        reference.0[i] + (d - k)
    }))
}

/// Per-coordinate signed displacement from `x` to `y` on the torus, each in
/// `(-1/2, 1/2]`.
pub fn torus_displacement<const N: usize>(x: &TorusPoint<N>, y: &TorusPoint<N>) -> [f64; N] {
    std::array::from_fn(|i| {
        let d = y.0[i] - x.0[i];
        d - (d - 0.5).ceil()
    })
}

/// Flat distance on `T^n`: the shortest Euclidean distance between lifts.
pub fn torus_distance<const N: usize>(x: &TorusPoint<N>, y: &TorusPoint<N>) -> f64 {
    x.0.iter()
        .zip(&y.0)
        .map(|(a, b)| {
            let d = (a - b).abs();
            let d = d.min(1.0 - d);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Diameter of `T^n` under [`torus_distance`].
pub fn torus_diameter(n: usize) -> f64 {
    0.5 * (n as f64).sqrt()
}

/// Weighted series distance between two truncated backward orbits,
/// `sum_i d(a_i, b_i) / 2^i`, with index 0 the base point.
pub fn prehistory_metric<const N: usize>(a: &[TorusPoint<N>], b: &[TorusPoint<N>]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(LabError::DepthMismatch {
            left: a.len().saturating_sub(1),
            right: b.len().saturating_sub(1),
        });
    }
    let mut weight = 1.0;
    let mut total = 0.0;
    for (x, y) in a.iter().zip(b) {
        total += torus_distance(x, y) * weight;
        weight *= 0.5;
    }
    Ok(total)
}
