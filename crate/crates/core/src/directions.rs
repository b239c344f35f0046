//! Unstable directions along pre-histories, stable directions along forward
//! orbits, censuses of the set of unstable directions over a point, and the
//! forward angle-decay experiment.

use std::io::{self, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{LabError, Result};
use crate::linalg::{self, Vector};
use crate::par;
use crate::prehistory::{all_prehistories, random_prehistory_with, Prehistory, ENUMERATION_CAP};
use crate::smooth::SmoothEndo;
use crate::torus::TorusPoint;

/// Minimum pre-history depth accepted by [`unstable_direction`].
pub const MIN_DEPTH: usize = 10;
/// Depth offset used by the convergence diagnostic.
pub const DIAGNOSTIC_LAG: usize = 5;
/// Default single-linkage tolerance, radians.
pub const CLUSTER_TOLERANCE: f64 = 1e-4;
/// Default dispersion above which a point counts as non-special, radians.
pub const DISPERSION_THRESHOLD: f64 = 1e-3;

/// A line through the origin, stored as a unit vector whose first nonzero
/// coordinate is positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction<const N: usize>(Vector<N>);

impl<const N: usize> Direction<N> {
    /// Panics on a zero or non-finite vector; see [`Direction::try_new`].
    pub fn new(v: Vector<N>) -> Self {
        Self::try_new(v).expect("direction of a nonzero finite vector")
    }

    pub fn try_new(v: Vector<N>) -> Option<Self> {
        let (mut u, n) = linalg::normalize(&v);
        if !(n > 0.0 && n.is_finite()) {
            return None;
        }
        if let Some(&first) = u.iter().find(|c| **c != 0.0) {
            if first < 0.0 {
                u = u.map(|c| -c);
            }
        }
        Some(Direction(u))
    }

    #[inline]
    pub fn vector(&self) -> &Vector<N> {
        &self.0
    }

    /// Projective angle to `other`, in `[0, π/2]`.
    pub fn angle(&self, other: &Self) -> f64 {
        projective_angle(&self.0, &other.0)
    }

    /// The direction of `m v`.
    pub fn transform(&self, m: &linalg::Matrix<N>) -> Option<Self> {
        Self::try_new(linalg::mat_vec(m, &self.0))
    }
}

/// Angle between the lines spanned by unit vectors `a` and `b`.
///
/// Equal to `arccos(min(1, |<a, b>|))` but evaluated as
/// `atan2(|a - <a,b> b|, |<a,b>|)`, which keeps full relative accuracy for
/// tiny angles.
pub fn projective_angle<const N: usize>(a: &Vector<N>, b: &Vector<N>) -> f64 {
    let c = linalg::dot(a, b);
    let perp = linalg::axpy(a, -c, b);
    linalg::norm(&perp).atan2(c.abs())
}

/// An unstable direction with its convergence diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnstableDirection<const N: usize> {
    pub direction: Direction<N>,
    /// Angle between the results obtained from depths `N` and
    /// `N - DIAGNOSTIC_LAG`.
    pub diagnostic: f64,
    pub depth: usize,
}

/// Pushes `probe` from `x_{-from}` forward to `x_0`, renormalising each step.
fn push_along<const N: usize>(f: &SmoothEndo<N>, p: &Prehistory<N>, from: usize, probe: &Vector<N>) -> Result<Vector<N>> {
    let mut v = *probe;
    for i in (1..=from).rev() {
        let w = linalg::mat_vec(&f.derivative(p.point(i)), &v);
        let (u, n) = linalg::normalize(&w);
        if !(n > 0.0 && n.is_finite()) {
            return Err(LabError::IllConditioned { step: i });
        }
        v = u;
    }
    Ok(v)
}

/// `E^u` at `x_0` for the pre-history `p`, with probe `E^u_A`.
pub fn unstable_direction<const N: usize>(f: &SmoothEndo<N>, p: &Prehistory<N>) -> Result<UnstableDirection<N>> {
    let probe = *f.base().e_u()?.vector();
    unstable_direction_with_probe(f, p, &probe, MIN_DEPTH)
}

/// As [`unstable_direction`] with an explicit probe and minimum depth.
pub fn unstable_direction_with_probe<const N: usize>(
    f: &SmoothEndo<N>,
    p: &Prehistory<N>,
    probe: &Vector<N>,
    min_depth: usize,
) -> Result<UnstableDirection<N>> {
    f.base().e_u()?;
    let depth = p.depth();
    let min_depth = min_depth.max(DIAGNOSTIC_LAG);
    if depth < min_depth {
        return Err(LabError::DepthTooShallow { depth, min: min_depth });
    }
    let (probe, n) = linalg::normalize(probe);
    if !(n > 0.0 && n.is_finite()) {
        return Err(LabError::InvalidParameter("probe must be a nonzero finite vector".into()));
    }
    let split = f.base().splitting();
    let to_stable = crate::linear::angle_to_subspace(&probe, &split.stable_basis);
    if to_stable < 0.5 * split.transversality() {
        return Err(LabError::ProbeInStableCone { angle: to_stable });
    }
    let full = push_along(f, p, depth, &probe)?;
    let lagged = push_along(f, p, depth - DIAGNOSTIC_LAG, &probe)?;
    Ok(UnstableDirection {
        direction: Direction::new(full),
        diagnostic: projective_angle(&full, &lagged),
        depth,
    })
}

/// `E^s(x)` as `(Df^N(x))^{-1} E^s_A`, evaluated by backward steps with
/// renormalisation.
pub fn stable_direction<const N: usize>(f: &SmoothEndo<N>, x: &TorusPoint<N>, depth: usize) -> Result<Direction<N>> {
    let probe = *f.base().e_s()?.vector();
    if depth < MIN_DEPTH {
        return Err(LabError::DepthTooShallow { depth, min: MIN_DEPTH });
    }
    let mut orbit = Vec::with_capacity(depth);
    let mut y = *x;
    for _ in 0..depth {
        orbit.push(y);
        y = f.apply(&y);
    }
    let mut w = probe;
    for (j, z) in orbit.iter().enumerate().rev() {
        let s = linalg::solve(&f.derivative(z), &w).ok_or(LabError::IllConditioned { step: j })?;
        let (u, n) = linalg::normalize(&s);
        if !(n > 0.0 && n.is_finite()) {
            return Err(LabError::IllConditioned { step: j });
        }
        w = u;
    }
    Ok(Direction::new(w))
}

/// Which pre-histories a census uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CensusMode {
    /// Every branch word of the given depth.
    Exhaustive { depth: usize },
    /// `count` uniform random words; sample `i` draws from stream `i` of
    /// the seeded generator.
    Sampled { count: usize, depth: usize, seed: u64 },
}

impl CensusMode {
    pub fn depth(&self) -> usize {
        match *self {
            CensusMode::Exhaustive { depth } | CensusMode::Sampled { depth, .. } => depth,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CensusEntry<const N: usize> {
    pub word: Vec<u32>,
    pub direction: Direction<N>,
    pub diagnostic: f64,
    pub cluster: usize,
}

/// Directions over one base point, with dispersion and single-linkage
/// clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionCensus<const N: usize> {
    pub base: TorusPoint<N>,
    pub depth: usize,
    pub entries: Vec<CensusEntry<N>>,
    /// Largest pairwise projective angle.
    pub dispersion: f64,
    pub cluster_count: usize,
    pub cluster_tolerance: f64,
    /// Largest pairwise angle inside one cluster. Single linkage can chain,
    /// so this may exceed the tolerance.
    pub max_cluster_diameter: f64,
}

impl<const N: usize> DirectionCensus<N> {
    pub fn directions(&self) -> impl Iterator<Item = &Direction<N>> {
        self.entries.iter().map(|e| &e.direction)
    }

    pub fn is_non_special(&self, threshold: f64) -> bool {
        self.dispersion > threshold
    }

    /// One row per direction: `word,v0,...,v{n-1},diagnostic,cluster`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "word")?;
        for i in 0..N {
            write!(w, ",v{i}")?;
        }
        writeln!(w, ",diagnostic,cluster")?;
        for e in &self.entries {
            let word: String = e.word.iter().map(|b| char::from_digit(*b, 36).unwrap_or('?')).collect();
            write!(w, "{word}")?;
            for c in e.direction.vector() {
                write!(w, ",{c}")?;
            }
            writeln!(w, ",{},{}", e.diagnostic, e.cluster)?;
        }
        Ok(())
    }
}

/// Dispersion, cluster labels, cluster count and max cluster diameter of a
/// set of directions.
pub fn cluster_directions<const N: usize>(dirs: &[Direction<N>], tol: f64) -> (f64, Vec<usize>, usize, f64) {
    let n = dirs.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let rows = par::map_indexed(n, |i| {
        let mut far = 0.0f64;
        let mut near = Vec::new();
        for j in i + 1..n {
            let a = dirs[i].angle(&dirs[j]);
            far = far.max(a);
            if a <= tol {
                near.push(j);
            }
        }
        (far, near)
    });
    let mut dispersion = 0.0f64;
    for (i, (far, near)) in rows.iter().enumerate() {
        dispersion = dispersion.max(*far);
        for &j in near {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    // labels in order of first appearance
    let mut label = vec![usize::MAX; n];
    let mut ids = Vec::with_capacity(n);
    let mut count = 0;
    for i in 0..n {
        let r = find(&mut parent, i);
        if label[r] == usize::MAX {
            label[r] = count;
            count += 1;
        }
        ids.push(label[r]);
    }
    let mut diameter = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            if ids[i] == ids[j] {
                diameter = diameter.max(dirs[i].angle(&dirs[j]));
            }
        }
    }
    (dispersion, ids, count, diameter)
}

fn census_prehistories<const N: usize>(
    f: &SmoothEndo<N>,
    x: &TorusPoint<N>,
    mode: CensusMode,
) -> Result<Vec<Prehistory<N>>> {
    match mode {
        CensusMode::Exhaustive { depth } => all_prehistories(f, *x, depth, ENUMERATION_CAP),
        CensusMode::Sampled { count, depth, seed } => par::try_map_indexed(count, |i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            random_prehistory_with(f, *x, depth, &mut rng)
        }),
    }
}

fn build_census<const N: usize>(
    base: TorusPoint<N>,
    depth: usize,
    items: Vec<(Vec<u32>, UnstableDirection<N>)>,
    tol: f64,
) -> DirectionCensus<N> {
    let dirs: Vec<_> = items.iter().map(|(_, d)| d.direction).collect();
    let (dispersion, ids, cluster_count, max_cluster_diameter) = cluster_directions(&dirs, tol);
    let entries = items
        .into_iter()
        .zip(ids)
        .map(|((word, d), cluster)| CensusEntry { word, direction: d.direction, diagnostic: d.diagnostic, cluster })
        .collect();
    DirectionCensus { base, depth, entries, dispersion, cluster_count, cluster_tolerance: tol, max_cluster_diameter }
}

/// Unstable directions over `x` for the pre-histories selected by `mode`.
pub fn census<const N: usize>(
    f: &SmoothEndo<N>,
    x: &TorusPoint<N>,
    mode: CensusMode,
    cluster_tolerance: f64,
) -> Result<DirectionCensus<N>> {
    let ps = census_prehistories(f, x, mode)?;
    let items = par::try_map_indexed(ps.len(), |i| {
        Ok((ps[i].branches().to_vec(), unstable_direction(f, &ps[i])?))
    })?;
    Ok(build_census(*x, mode.depth(), items, cluster_tolerance))
}

/// Per-point census summary of a [`dichotomy_scan`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint<const N: usize> {
    pub point: TorusPoint<N>,
    pub dispersion: f64,
    pub cluster_count: usize,
    pub non_special: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DichotomyScan<const N: usize> {
    pub points: Vec<ScanPoint<N>>,
    pub threshold: f64,
    /// Fraction of points whose dispersion exceeds `threshold`.
    pub non_special_fraction: f64,
}

/// Sampled censuses at `points` uniform random points. Point `i` is drawn
/// from stream `i` of `seed`; its census uses seed `seed + i + 1`.
#[allow(clippy::too_many_arguments)]
pub fn dichotomy_scan<const N: usize>(
    f: &SmoothEndo<N>,
    points: usize,
    samples: usize,
    depth: usize,
    seed: u64,
    cluster_tolerance: f64,
    threshold: f64,
) -> Result<DichotomyScan<N>> {
    if points == 0 {
        return Err(LabError::InvalidParameter("scan needs at least one point".into()));
    }
    let mut out = Vec::with_capacity(points);
    for i in 0..points {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let x = TorusPoint::new(std::array::from_fn(|_| rand::Rng::random(&mut rng)));
        let mode = CensusMode::Sampled { count: samples, depth, seed: seed.wrapping_add(i as u64 + 1) };
        let c = census(f, &x, mode, cluster_tolerance)?;
        out.push(ScanPoint {
            point: x,
            dispersion: c.dispersion,
            cluster_count: c.cluster_count,
            non_special: c.is_non_special(threshold),
        });
    }
    let hits = out.iter().filter(|p| p.non_special).count();
    Ok(DichotomyScan { non_special_fraction: hits as f64 / points as f64, points: out, threshold })
}

/// Largest angle between unstable directions of pre-histories that share
/// their first `k` branches and differ at branch `k + 1`, for each
/// `k = 0..=max_agree`. Each level uses `pairs` random word pairs of length
/// `depth`.
pub fn locality_profile<const N: usize>(
    f: &SmoothEndo<N>,
    x: &TorusPoint<N>,
    depth: usize,
    max_agree: usize,
    pairs: usize,
    seed: u64,
) -> Result<Vec<(usize, f64)>> {
    if max_agree >= depth {
        return Err(LabError::InvalidParameter("agreement depth must be below the pre-history depth".into()));
    }
    let d = f.degree() as u32;
    let rows = par::try_map_indexed(max_agree + 1, |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let mut worst = 0.0f64;
        for _ in 0..pairs {
            let w1: Vec<u32> = (0..depth).map(|_| rand::Rng::random_range(&mut rng, 0..d)).collect();
            let mut w2 = w1.clone();
            w2[k] = (w1[k] + rand::Rng::random_range(&mut rng, 1..d)) % d;
            for b in w2.iter_mut().skip(k + 1) {
                *b = rand::Rng::random_range(&mut rng, 0..d);
            }
            let a = unstable_direction(f, &Prehistory::from_word(f, *x, &w1)?)?.direction;
            let b = unstable_direction(f, &Prehistory::from_word(f, *x, &w2)?)?.direction;
            worst = worst.max(a.angle(&b));
        }
        Ok((k, worst))
    })?;
    Ok(rows)
}

/// Geometric rate `ρ` of a profile `(k, angle)`, from a least-squares fit
/// of `log angle` against `k` over entries with angle above `floor`.
pub fn fit_locality_rate(profile: &[(usize, f64)], floor: f64) -> Option<f64> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = profile
        .iter()
        .filter(|(_, a)| *a > floor)
        .map(|(k, a)| (*k as f64, a.ln()))
        .unzip();
    (xs.len() >= 2).then(|| crate::stats::linear_fit(&xs, &ys).0.exp())
}

/// One row of a [`monotonicity_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityRow<const N: usize> {
    pub step: usize,
    pub point: TorusPoint<N>,
    pub cluster_count: usize,
    pub dispersion: f64,
    /// Directions carried over from the previous point.
    pub pushed: usize,
    /// Freshly sampled directions.
    pub fresh: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport<const N: usize> {
    pub rows: Vec<MonotonicityRow<N>>,
    pub non_decreasing: bool,
    /// Largest angle between `Df(x) E^u(p)` and the direction recomputed
    /// from scratch at `f(x)` for the shifted pre-history.
    pub membership_residual: f64,
}

/// Sampled cluster counts along `x, f(x), ..., f^steps(x)`.
///
/// At each successor the set consists of the pushed-forward directions of
/// the previous set plus a fresh sample of `count` pre-histories.
pub fn monotonicity_check<const N: usize>(
    f: &SmoothEndo<N>,
    x: &TorusPoint<N>,
    steps: usize,
    count: usize,
    depth: usize,
    seed: u64,
    cluster_tolerance: f64,
) -> Result<MonotonicityReport<N>> {
    let sample = |y: &TorusPoint<N>, j: usize| {
        census_prehistories(f, y, CensusMode::Sampled { count, depth, seed: seed.wrapping_add(j as u64) })
    };
    let mut current: Vec<(Prehistory<N>, Direction<N>)> = {
        let ps = sample(x, 0)?;
        let ds = par::try_map_indexed(ps.len(), |i| unstable_direction(f, &ps[i]))?;
        ps.into_iter().zip(ds).map(|(p, d)| (p, d.direction)).collect()
    };
    let summarize = |set: &[(Prehistory<N>, Direction<N>)]| {
        let dirs: Vec<_> = set.iter().map(|(_, d)| *d).collect();
        let (disp, _, count, _) = cluster_directions(&dirs, cluster_tolerance);
        (disp, count)
    };
    let (disp0, count0) = summarize(&current);
    let mut rows = vec![MonotonicityRow {
        step: 0,
        point: *x,
        cluster_count: count0,
        dispersion: disp0,
        pushed: 0,
        fresh: current.len(),
    }];
    let mut residual = 0.0f64;
    let mut y = *x;
    for j in 1..=steps {
        let jac = f.derivative(&y);
        let pushed = par::try_map_indexed(current.len(), |i| {
            let (p, d) = &current[i];
            let q = p.push_forward(f)?.truncate();
            let moved = d.transform(&jac).ok_or(LabError::IllConditioned { step: 0 })?;
            let fresh = unstable_direction(f, &q)?.direction;
            Ok((q, moved, moved.angle(&fresh)))
        })?;
        y = f.apply(&y);
        let n_pushed = pushed.len();
        let mut next: Vec<(Prehistory<N>, Direction<N>)> = Vec::with_capacity(n_pushed + count);
        for (q, d, r) in pushed {
            residual = residual.max(r);
            next.push((q, d));
        }
        let ps = sample(&y, j)?;
        let ds = par::try_map_indexed(ps.len(), |i| unstable_direction(f, &ps[i]))?;
        next.extend(ps.into_iter().zip(ds).map(|(p, d)| (p, d.direction)));
        let (disp, cnt) = summarize(&next);
        rows.push(MonotonicityRow { step: j, point: y, cluster_count: cnt, dispersion: disp, pushed: n_pushed, fresh: count });
        current = next;
    }
    let non_decreasing = rows.windows(2).all(|w| w[1].cluster_count >= w[0].cluster_count);
    Ok(MonotonicityReport { rows, non_decreasing, membership_residual: residual })
}

/// Angles between `Df^j E1` and `Df^j E2` along the forward orbit of `x`,
/// for `j = 0..=n`.
///
/// Once the angle is below π/4 the second line is tracked as `v1 + w` with
/// `w ⊥ v1`, so the angle `atan |w|` keeps relative precision far below the
/// rounding level of a unit vector.
pub fn angle_decay<const N: usize>(
    f: &SmoothEndo<N>,
    x: &TorusPoint<N>,
    e1: &Direction<N>,
    e2: &Direction<N>,
    n: usize,
) -> Vec<f64> {
    let mut v1 = *e1.vector();
    let mut v2 = *e2.vector();
    let mut w: Option<Vector<N>> = None;
    let mut y = *x;
    let mut out = Vec::with_capacity(n + 1);
    let to_tangent = |v1: &Vector<N>, v2: &Vector<N>| {
        let c = linalg::dot(v1, v2);
        let s = if c < 0.0 { -1.0 } else { 1.0 };
        linalg::sub(&linalg::scale(v2, s / c.abs()), v1)
    };
    for j in 0..=n {
        let angle = match &w {
            Some(w) => linalg::norm(w).atan(),
            None => projective_angle(&v1, &v2),
        };
        out.push(angle);
        if w.is_none() && angle < std::f64::consts::FRAC_PI_4 {
            w = Some(to_tangent(&v1, &v2));
        }
        if j == n {
            break;
        }
        let jac = f.derivative(&y);
        let (u1, a) = linalg::normalize(&linalg::mat_vec(&jac, &v1));
        match w.as_mut() {
            Some(w) => {
                let dw = linalg::mat_vec(&jac, w);
                let alpha = linalg::dot(&dw, &u1);
                let perp = linalg::axpy(&dw, -alpha, &u1);
                *w = linalg::scale(&perp, 1.0 / (a + alpha));
            }
            None => {
                v2 = linalg::normalize(&linalg::mat_vec(&jac, &v2)).0;
            }
        }
        v1 = u1;
        y = f.apply(&y);
    }
    out
}
