//! The lifted unstable foliation on `R^n`: direction field, leaf tracing,
//! quasi-isometry constants and large-scale comparisons with `A`.
//!
//! On the cover the lift `f̄` is invertible, so the unstable direction at a
//! point depends only on its unique backward orbit.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::directions::{projective_angle, Direction};
use crate::error::{LabError, Result};
use crate::linalg::{self, Vector};
use crate::linear::LinearEndo;
use crate::par;
use crate::smooth::SmoothEndo;
use crate::torus::CoverPoint;

/// Backward depth of the direction field.
pub const FIELD_DEPTH: usize = 30;
/// Integration step.
pub const STEP: f64 = 0.01;
/// Default "large separation" floor.
pub const SEPARATION_FLOOR: f64 = 10.0;
/// Largest angle tolerated between consecutive Runge-Kutta stage directions.
pub const MAX_STAGE_JUMP: f64 = 0.1;
/// Pair statistics use at most this many samples of a segment.
pub const MAX_PAIR_SAMPLES: usize = 2001;

/// `[p, f̄^{-1} p, ..., f̄^{-depth} p]`.
pub fn cover_backward_orbit<const N: usize>(f: &SmoothEndo<N>, p: &CoverPoint<N>, depth: usize) -> Result<Vec<CoverPoint<N>>> {
    let mut orbit = Vec::with_capacity(depth + 1);
    orbit.push(*p);
    for _ in 0..depth {
        let q = f.inverse_lift(orbit.last().expect("non-empty"))?;
        orbit.push(q);
    }
    Ok(orbit)
}

/// Unit vector along the unstable direction at `p`, from `E^u_A` pushed
/// forward along the backward orbit. Orientation is not canonicalised.
fn cover_unstable_vector<const N: usize>(f: &SmoothEndo<N>, p: &CoverPoint<N>, depth: usize) -> Result<Vector<N>> {
    let mut v = *f.base().e_u()?.vector();
    let orbit = cover_backward_orbit(f, p, depth)?;
    for (i, q) in orbit.iter().enumerate().skip(1).rev() {
        let (u, n) = linalg::normalize(&linalg::mat_vec(&f.derivative_at(q.coords()), &v));
        if !(n > 0.0 && n.is_finite()) {
            return Err(LabError::IllConditioned { step: i });
        }
        v = u;
    }
    Ok(v)
}

/// Unstable direction of `f̄` at `p` using `depth` backward steps.
pub fn cover_unstable_direction<const N: usize>(f: &SmoothEndo<N>, p: &CoverPoint<N>, depth: usize) -> Result<Direction<N>> {
    Ok(Direction::new(cover_unstable_vector(f, p, depth)?))
}

/// A discretised arc of an unstable leaf.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafSegment<const N: usize> {
    pub samples: Vec<CoverPoint<N>>,
    /// Leaf distance from the first sample.
    pub arclengths: Vec<f64>,
    /// Oriented unit tangent at each sample.
    pub tangents: Vec<Vector<N>>,
    pub direction_depth: usize,
    pub step: f64,
}

impl<const N: usize> LeafSegment<N> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `arclength,p0..,t0..`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "arclength")?;
        for i in 0..N {
            write!(w, ",p{i}")?;
        }
        for i in 0..N {
            write!(w, ",t{i}")?;
        }
        writeln!(w)?;
        for ((s, p), t) in self.arclengths.iter().zip(&self.samples).zip(&self.tangents) {
            write!(w, "{s}")?;
            for c in p.coords() {
                write!(w, ",{c}")?;
            }
            for c in t {
                write!(w, ",{c}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Indices of an evenly strided subset of at most `MAX_PAIR_SAMPLES`.
    fn pair_indices(&self) -> Vec<usize> {
        let stride = self.len().div_ceil(MAX_PAIR_SAMPLES).max(1);
        let mut idx: Vec<usize> = (0..self.len()).step_by(stride).collect();
        if idx.last() != Some(&(self.len() - 1)) {
            idx.push(self.len() - 1);
        }
        idx
    }

    /// `(leaf distance, chord vector)` for every pair of the strided subset.
    fn pairs(&self) -> Vec<(f64, Vector<N>)> {
        let idx = self.pair_indices();
        let mut out = Vec::with_capacity(idx.len() * idx.len() / 2);
        for (a, &i) in idx.iter().enumerate() {
            for &j in &idx[a + 1..] {
                let chord = linalg::sub(self.samples[j].coords(), self.samples[i].coords());
                out.push((self.arclengths[j] - self.arclengths[i], chord));
            }
        }
        out
    }
}

fn orient<const N: usize>(v: Vector<N>, reference: &Vector<N>) -> Vector<N> {
    if linalg::dot(&v, reference) < 0.0 {
        linalg::scale(&v, -1.0)
    } else {
        v
    }
}

/// Integrates one half of a leaf from `p` with initial orientation `dir`.
fn trace_half<const N: usize>(
    f: &SmoothEndo<N>,
    p: &CoverPoint<N>,
    dir: Vector<N>,
    steps: usize,
    h: f64,
    depth: usize,
) -> Result<(Vec<CoverPoint<N>>, Vec<Vector<N>>)> {
    let field = |q: &Vector<N>, reference: &Vector<N>| -> Result<Vector<N>> {
        let v = orient(cover_unstable_vector(f, &CoverPoint(*q), depth)?, reference);
        let jump = projective_angle(&v, reference);
        if jump > MAX_STAGE_JUMP {
            return Err(LabError::FieldDiscontinuity { angle: jump });
        }
        Ok(v)
    };
    let mut y = p.0;
    let mut t = dir;
    let mut points = vec![*p];
    let mut tangents = vec![t];
    for _ in 0..steps {
        let k1 = t;
        let k2 = field(&linalg::axpy(&y, 0.5 * h, &k1), &k1)?;
        let k3 = field(&linalg::axpy(&y, 0.5 * h, &k2), &k2)?;
        let k4 = field(&linalg::axpy(&y, h, &k3), &k3)?;
        for i in 0..N {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        t = field(&y, &k4)?;
        points.push(CoverPoint(y));
        tangents.push(t);
    }
    Ok((points, tangents))
}

/// Unstable leaf through `p`, `arclength` to each side, fixed RK4 step close
/// to `step` (adjusted so the ends fall at exactly `arclength`).
pub fn trace_leaf<const N: usize>(
    f: &SmoothEndo<N>,
    p: &CoverPoint<N>,
    arclength: f64,
    step: f64,
    depth: usize,
) -> Result<LeafSegment<N>> {
    if !(arclength > 0.0 && arclength.is_finite()) || !(step > 0.0 && step.is_finite()) {
        return Err(LabError::InvalidParameter("arclength and step must be positive".into()));
    }
    let steps = (arclength / step).ceil() as usize;
    let h = arclength / steps as f64;
    let reference = *f.base().e_u()?.vector();
    let t0 = orient(cover_unstable_vector(f, p, depth)?, &reference);
    let halves = par::try_map_indexed(2, |i| {
        let sign = if i == 0 { -1.0 } else { 1.0 };
        trace_half(f, p, linalg::scale(&t0, sign), steps, h, depth)
    })?;
    let (back_pts, back_tan) = &halves[0];
    let (fwd_pts, fwd_tan) = &halves[1];
    let mut samples = Vec::with_capacity(2 * steps + 1);
    let mut tangents = Vec::with_capacity(2 * steps + 1);
    for i in (1..=steps).rev() {
        samples.push(back_pts[i]);
        tangents.push(linalg::scale(&back_tan[i], -1.0));
    }
    samples.extend_from_slice(fwd_pts);
    tangents.extend_from_slice(fwd_tan);
    let arclengths = (0..samples.len()).map(|i| i as f64 * h).collect();
    Ok(LeafSegment { samples, arclengths, tangents, direction_depth: depth, step: h })
}

/// Fitted distortion constants of a leaf segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiIsometryFit {
    /// `max d_W / |x - y|` over pairs with `|x - y| >= 1`.
    pub q_fit: f64,
    /// Smallest `b` with `d_W <= q_fit |x - y| + b` over all pairs.
    pub b_fit: f64,
    /// `max d_W / |x - y|` over pairs with `|x - y| >= SEPARATION_FLOOR`;
    /// `None` if the segment has no such pair.
    pub max_ratio: Option<f64>,
    pub pairs: usize,
    /// Smallest `d_W - |x - y|` seen; negative values beyond rounding flag
    /// an integration error.
    pub min_excess: f64,
}

/// Fits `d_W(x, y) <= Q |x - y| + b` over sample pairs of `seg`.
pub fn quasi_isometry_fit<const N: usize>(seg: &LeafSegment<N>) -> Result<QuasiIsometryFit> {
    let pairs: Vec<(f64, f64)> = seg.pairs().into_iter().map(|(d, c)| (d, linalg::norm(&c))).collect();
    let long = pairs.iter().filter(|(_, c)| *c >= 1.0).count();
    if long < 100 {
        return Err(LabError::ShortSegment { pairs: long, needed: 100 });
    }
    let q_fit = pairs.iter().filter(|(_, c)| *c >= 1.0).map(|(d, c)| d / c).fold(0.0, f64::max);
    let b_fit = pairs.iter().map(|(d, c)| d - q_fit * c).fold(0.0, f64::max);
    let max_ratio = max_ratio_at(seg, SEPARATION_FLOOR);
    let min_excess = pairs.iter().map(|(d, c)| d - c).fold(f64::INFINITY, f64::min);
    Ok(QuasiIsometryFit { q_fit, b_fit, max_ratio, pairs: pairs.len(), min_excess })
}

/// `max d_W / |x - y|` over pairs with chord at least `floor`.
pub fn max_ratio_at<const N: usize>(seg: &LeafSegment<N>, floor: f64) -> Option<f64> {
    seg.pairs()
        .into_iter()
        .map(|(d, c)| (d, linalg::norm(&c)))
        .filter(|(_, c)| *c >= floor)
        .map(|(d, c)| d / c)
        .reduce(f64::max)
}

/// Ratios `|f̄^k x - f̄^k y| / |A^k x - A^k y|`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    pub k: usize,
    pub ratios: Vec<f64>,
    pub min: f64,
    pub max: f64,
    /// `max |ratio - 1|`.
    pub max_deviation: f64,
}

impl GrowthReport {
    /// Whether every ratio lies in `[1/c, c]`.
    pub fn within(&self, c: f64) -> bool {
        self.min >= 1.0 / c && self.max <= c
    }
}

pub fn growth_ratio_check<const N: usize>(
    f: &SmoothEndo<N>,
    pairs: &[(CoverPoint<N>, CoverPoint<N>)],
    k: usize,
) -> GrowthReport {
    let ratios = par::map_indexed(pairs.len(), |i| {
        let (mut x, mut y) = pairs[i];
        let mut lin = linalg::sub(x.coords(), y.coords());
        for _ in 0..k {
            x = f.lift_apply(&x);
            y = f.lift_apply(&y);
            lin = f.base().apply_vector(&lin);
        }
        linalg::norm(&linalg::sub(x.coords(), y.coords())) / linalg::norm(&lin)
    });
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let max_deviation = ratios.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
    GrowthReport { k, ratios, min, max, max_deviation }
}

/// Seeded pairs `(x, x + s u)` with `x` uniform in `[0, 1)^n`, `u` uniform on
/// the sphere and `s` uniform in `[min_sep, max_sep]`.
pub fn random_pairs<const N: usize>(count: usize, min_sep: f64, max_sep: f64, seed: u64) -> Vec<(CoverPoint<N>, CoverPoint<N>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let x: [f64; N] = std::array::from_fn(|_| rng.random());
            let u = loop {
                let g: [f64; N] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
                let n = linalg::norm(&g);
                if n > 1e-3 && n <= 1.0 {
                    break linalg::scale(&g, 1.0 / n);
                }
            };
            let s = rng.random_range(min_sep..=max_sep);
            (CoverPoint(x), CoverPoint(linalg::axpy(&x, s, &u)))
        })
        .collect()
}

/// Sample pairs of `seg` whose chord lies in `[min_sep, max_sep]`.
pub fn leaf_pairs<const N: usize>(seg: &LeafSegment<N>, min_sep: f64, max_sep: f64) -> Vec<(CoverPoint<N>, CoverPoint<N>)> {
    let idx = seg.pair_indices();
    let mut out = Vec::new();
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            let c = linalg::norm(&linalg::sub(seg.samples[j].coords(), seg.samples[i].coords()));
            if c >= min_sep && c <= max_sep {
                out.push((seg.samples[i], seg.samples[j]));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticRow {
    pub floor: f64,
    /// Largest angle between a chord of length at least `floor` and `E^u_A`.
    pub max_angle: f64,
    pub pairs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticReport {
    pub rows: Vec<AsymptoticRow>,
    /// Smallest `c` with `max_angle(F) <= atan(c / F)` at every floor.
    pub c_fit: f64,
}

/// Angles between long chords of `seg` and `E^u_A`, per separation floor.
pub fn asymptotic_direction_check<const N: usize>(
    seg: &LeafSegment<N>,
    e_u: &Direction<N>,
    floors: &[f64],
) -> AsymptoticReport {
    let chords: Vec<(f64, f64)> = seg
        .pairs()
        .into_iter()
        .filter_map(|(_, c)| {
            let (u, n) = linalg::normalize(&c);
            (n > 0.0).then(|| (n, projective_angle(&u, e_u.vector())))
        })
        .collect();
    let rows: Vec<AsymptoticRow> = floors
        .iter()
        .map(|&floor| {
            let sel = chords.iter().filter(|(n, _)| *n >= floor);
            let (pairs, max_angle) = sel.fold((0, 0.0f64), |(k, m), (_, a)| (k + 1, m.max(*a)));
            AsymptoticRow { floor, max_angle, pairs }
        })
        .collect();
    let c_fit = rows.iter().filter(|r| r.pairs > 0).map(|r| r.floor * r.max_angle.tan()).fold(0.0, f64::max);
    AsymptoticReport { rows, c_fit }
}

/// Both sides of `(1-ε) e^{nλ} |y-x| <= |A^n(x-y)| <= (1+ε) e^{nλ} |y-x|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichResult {
    /// `|A^n(x-y)| / (e^{nλ} |x-y|)`.
    pub ratio: f64,
    /// `ratio - (1 - ε)`.
    pub lower_margin: f64,
    /// `(1 + ε) - ratio`.
    pub upper_margin: f64,
    pub holds: bool,
}

pub fn linear_sandwich_check<const N: usize>(
    a: &LinearEndo<N>,
    x: &CoverPoint<N>,
    y: &CoverPoint<N>,
    n: usize,
    eps: f64,
) -> SandwichResult {
    let d = linalg::sub(x.coords(), y.coords());
    let mut v = d;
    for _ in 0..n {
        v = a.apply_vector(&v);
    }
    let ratio = linalg::norm(&v) / ((n as f64 * a.lambda_u()).exp() * linalg::norm(&d));
    let lower_margin = ratio - (1.0 - eps);
    let upper_margin = (1.0 + eps) - ratio;
    SandwichResult { ratio, lower_margin, upper_margin, holds: lower_margin > 0.0 && upper_margin > 0.0 }
}
