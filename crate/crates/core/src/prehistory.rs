//! Finite pre-histories `(x_{-N}, ..., x_{-1}, x_0)` coded by branch words.
//!
//! Branch `b` at step `i` means `x_{-i}` is the preimage of `x_{-i+1}` on the
//! `b`-th coset representative of `Z^n / A Z^n` (see
//! [`SmoothEndo::preimage_branch`]). The word is a global symbolic code for
//! backward orbits.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{LabError, Result};
use crate::par;
use crate::smooth::SmoothEndo;
use crate::torus::{prehistory_metric, torus_distance, TorusPoint};

/// Default cap on the number of exhaustively enumerated pre-histories.
pub const ENUMERATION_CAP: u128 = 1 << 20;
/// Default depth for unstable direction computation.
pub const DIRECTION_DEPTH: usize = 40;
/// Default depth for exhaustive enumeration.
pub const ENUMERATION_DEPTH: usize = 12;

const DIGITS: &[u8; 36] = b"0123456789abcdefghijklmnopqrstuvwxyz";

#[derive(Debug, Clone, PartialEq)]
pub struct Prehistory<const N: usize> {
    /// `points[i] = x_{-i}`, so `points[0]` is the base point.
    points: Vec<TorusPoint<N>>,
    /// `branches[i - 1]` produced `x_{-i}` from `x_{-i+1}`.
    branches: Vec<u32>,
}

impl<const N: usize> Prehistory<N> {
    /// Depth-0 pre-history: just the base point.
    pub fn trivial(x: TorusPoint<N>) -> Self {
        Prehistory { points: vec![x], branches: Vec::new() }
    }

    /// Realises the word `word` backwards from `x`.
    pub fn from_word(f: &SmoothEndo<N>, x: TorusPoint<N>, word: &[u32]) -> Result<Self> {
        let mut p = Prehistory::trivial(x);
        p.points.reserve(word.len());
        for &b in word {
            p.push_branch(f, b as usize)?;
        }
        Ok(p)
    }

    fn push_branch(&mut self, f: &SmoothEndo<N>, branch: usize) -> Result<()> {
        if branch >= f.degree() {
            return Err(LabError::BranchOutOfRange { branch, degree: f.degree() });
        }
        let last = *self.points.last().expect("non-empty");
        let y = f.preimage_branch(&last, branch)?;
        self.points.push(y);
        self.branches.push(branch as u32);
        Ok(())
    }

    pub fn base(&self) -> &TorusPoint<N> {
        &self.points[0]
    }

    pub fn depth(&self) -> usize {
        self.branches.len()
    }

    pub fn branches(&self) -> &[u32] {
        &self.branches
    }

    /// `[x_0, x_{-1}, ..., x_{-N}]`.
    pub fn points(&self) -> &[TorusPoint<N>] {
        &self.points
    }

    /// `x_{-i}`.
    pub fn point(&self, i: usize) -> &TorusPoint<N> {
        &self.points[i]
    }

    /// One step deeper along `branch`; existing entries are unchanged.
    pub fn extend(&self, f: &SmoothEndo<N>, branch: usize) -> Result<Self> {
        let mut p = self.clone();
        p.push_branch(f, branch)?;
        Ok(p)
    }

    /// Drops the deepest entry.
    pub fn truncate(&self) -> Self {
        let mut p = self.clone();
        if p.depth() > 0 {
            p.points.pop();
            p.branches.pop();
        }
        p
    }

    /// The shifted pre-history `(..., x_{-1}, x_0, f(x_0))` at `f(x_0)`.
    /// The new leading branch is the preimage of `f(x_0)` nearest to `x_0`.
    pub fn push_forward(&self, f: &SmoothEndo<N>) -> Result<Self> {
        let x0 = *self.base();
        let image = f.apply(&x0);
        let pre = f.preimages(&image)?;
        let lead = pre
            .iter()
            .enumerate()
            .min_by(|a, b| torus_distance(a.1, &x0).total_cmp(&torus_distance(b.1, &x0)))
            .map(|(i, _)| i as u32)
            .expect("degree >= 1");
        let mut points = Vec::with_capacity(self.points.len() + 1);
        points.push(image);
        points.extend_from_slice(&self.points);
        let mut branches = Vec::with_capacity(self.branches.len() + 1);
        branches.push(lead);
        branches.extend_from_slice(&self.branches);
        Ok(Prehistory { points, branches })
    }

    /// Largest `d(f(x_{-i}), x_{-i+1})` along the pre-history.
    pub fn consistency_residual(&self, f: &SmoothEndo<N>) -> f64 {
        self.points
            .windows(2)
            .map(|w| torus_distance(&f.apply(&w[1]), &w[0]))
            .fold(0.0, f64::max)
    }

    /// The weighted series distance to another pre-history of equal depth.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        prehistory_metric(&self.points, &other.points)
    }

    /// Branch word as a digit string (base 36).
    pub fn word_string(&self) -> String {
        self.branches.iter().map(|&b| DIGITS[b as usize] as char).collect()
    }
}

/// A pre-history of `x` whose branches are drawn uniformly from `rng`.
pub fn random_prehistory_with<const N: usize, R: Rng>(
    f: &SmoothEndo<N>,
    x: TorusPoint<N>,
    depth: usize,
    rng: &mut R,
) -> Result<Prehistory<N>> {
    let d = f.degree();
    let word: Vec<u32> = (0..depth).map(|_| rng.random_range(0..d) as u32).collect();
    Prehistory::from_word(f, x, &word)
}

/// Seeded random pre-history; identical for identical `(f, x, depth, seed)`.
pub fn random_prehistory<const N: usize>(
    f: &SmoothEndo<N>,
    x: TorusPoint<N>,
    depth: usize,
    seed: u64,
) -> Result<Prehistory<N>> {
    random_prehistory_with(f, x, depth, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Every pre-history of `x` at depth `depth`, ordered lexicographically by
/// branch word.
pub fn all_prehistories<const N: usize>(
    f: &SmoothEndo<N>,
    x: TorusPoint<N>,
    depth: usize,
    cap: u128,
) -> Result<Vec<Prehistory<N>>> {
    let count = u32::try_from(depth)
        .ok()
        .and_then(|e| (f.degree() as u128).checked_pow(e))
        .unwrap_or(u128::MAX);
    if count > cap {
        return Err(LabError::EnumerationCap { count, cap });
    }
    let d = f.degree();
    let mut level = vec![Prehistory::trivial(x)];
    for _ in 0..depth {
        let next = par::try_map_indexed(level.len(), |i| {
            let node = &level[i];
            let last = node.points.last().expect("non-empty");
            let pre = f.preimages(last)?;
            Ok(pre
                .into_iter()
                .enumerate()
                .map(|(b, y)| {
                    let mut child = node.clone();
                    child.points.push(y);
                    child.branches.push(b as u32);
                    child
                })
                .collect::<Vec<_>>())
        })?;
        level = next.into_iter().flatten().collect();
        debug_assert!(level.len() % d == 0);
    }
    Ok(level)
}

/// Writes pre-histories as CSV, one row per realised point:
/// `word,depth,level,x0,...,x{n-1}` where `level = i` for `x_{-i}`.
pub fn write_prehistory_csv<const N: usize, W: Write>(mut w: W, items: &[Prehistory<N>]) -> io::Result<()> {
    write!(w, "word,depth,level")?;
    for i in 0..N {
        write!(w, ",x{i}")?;
    }
    writeln!(w)?;
    for p in items {
        let word = p.word_string();
        for (level, x) in p.points().iter().enumerate() {
            write!(w, "{},{},{}", word, p.depth(), level)?;
            for c in x.coords() {
                write!(w, ",{c}")?;
            }
            writeln!(w)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::analyze;
    use crate::smooth::ShearMap;
    use crate::torus::torus_diameter;

    fn linear() -> SmoothEndo<2> {
        SmoothEndo::linear(analyze([[3, 1], [1, 1]]).unwrap())
    }

    fn sheared(eps: f64) -> SmoothEndo<2> {
        SmoothEndo::new(analyze([[3, 1], [1, 1]]).unwrap(), vec![ShearMap::new(0, 1, eps, 1, 0.0)]).unwrap()
    }

    #[test]
    fn depth_zero() {
        let p = random_prehistory(&sheared(0.02), TorusPoint::new([0.3, 0.4]), 0, 1).unwrap();
        assert_eq!(p.depth(), 0);
        assert_eq!(p.points().len(), 1);
        assert!(p.branches().is_empty());
    }

    #[test]
    fn fixed_point_branch_zero() {
        let f = linear();
        let p = Prehistory::from_word(&f, TorusPoint::origin(), &[0; 25]).unwrap();
        assert!(p.points().iter().all(|x| torus_distance(x, &TorusPoint::origin()) == 0.0));
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        let f = sheared(0.02);
        let x = TorusPoint::new([0.123, 0.987]);
        let a = random_prehistory(&f, x, 20, 42).unwrap();
        let b = random_prehistory(&f, x, 20, 42).unwrap();
        assert_eq!(a, b);
        let c = random_prehistory(&f, x, 20, 43).unwrap();
        assert_ne!(a.branches(), c.branches());
        assert!(a.consistency_residual(&f) < 1e-9);
    }

    #[test]
    fn enumeration_counts_and_order() {
        let f = sheared(0.02);
        let x = TorusPoint::new([0.31, 0.72]);
        let one = all_prehistories(&f, x, 1, ENUMERATION_CAP).unwrap();
        assert_eq!(one.len(), 2);
        let pre = f.preimages(&x).unwrap();
        assert_eq!(one[0].point(1), &pre[0]);
        assert_eq!(one[1].point(1), &pre[1]);
        for n in 1..=12 {
            let all = all_prehistories(&f, x, n, ENUMERATION_CAP).unwrap();
            assert_eq!(all.len(), 1 << n);
            assert!(all.windows(2).all(|w| w[0].branches() < w[1].branches()));
        }
    }

    #[test]
    fn depth_ten_tails_distinct() {
        let f = sheared(0.02);
        let all = all_prehistories(&f, TorusPoint::new([0.5, 0.25]), 10, ENUMERATION_CAP).unwrap();
        assert_eq!(all.len(), 1024);
        let tails: Vec<_> = all.iter().map(|p| *p.point(10)).collect();
        for i in 0..tails.len() {
            for j in i + 1..tails.len() {
                assert!(torus_distance(&tails[i], &tails[j]) > 1e-9);
            }
        }
    }

    #[test]
    fn cap_exceeded() {
        let f = sheared(0.02);
        assert!(matches!(
            all_prehistories(&f, TorusPoint::origin(), 21, ENUMERATION_CAP),
            Err(LabError::EnumerationCap { .. })
        ));
    }

    #[test]
    fn extend_and_truncate() {
        let f = sheared(0.03);
        let x = TorusPoint::new([0.2, 0.9]);
        let p0 = Prehistory::trivial(x);
        let p1 = p0.extend(&f, 1).unwrap();
        assert_eq!(p1.point(1), &f.preimage_branch(&x, 1).unwrap());
        assert_eq!(p1.truncate(), p0);
        assert!(matches!(p0.extend(&f, 2), Err(LabError::BranchOutOfRange { branch: 2, degree: 2 })));
        // extension along a word reproduces the enumeration entry with that word
        let word = [1u32, 0, 0, 1, 1, 0, 1];
        let mut p = p0.clone();
        for &b in &word {
            p = p.extend(&f, b as usize).unwrap();
        }
        let all = all_prehistories(&f, x, 7, ENUMERATION_CAP).unwrap();
        let idx = word.iter().fold(0usize, |acc, &b| acc * 2 + b as usize);
        assert_eq!(all[idx].branches(), &word);
        for (a, b) in all[idx].points().iter().zip(p.points()) {
            assert!(torus_distance(a, b) < 1e-12);
        }
    }

    #[test]
    fn truncation_distance_bound() {
        let f = sheared(0.02);
        let p = random_prehistory(&f, TorusPoint::new([0.77, 0.11]), 15, 3).unwrap();
        let t = p.truncate();
        // re-extend along the same word, and along a different last branch
        let same = t.extend(&f, p.branches()[14] as usize).unwrap();
        let other = t.extend(&f, 1 - p.branches()[14] as usize).unwrap();
        let bound = 2f64.powi(-14) * torus_diameter(2) * 2.0;
        assert!(p.distance(&same).unwrap() < 1e-15);
        assert!(p.distance(&other).unwrap() <= bound);
        assert!(p.distance(&t).is_err());
    }

    #[test]
    fn push_forward_recovers_word() {
        let f = sheared(0.05);
        let p = random_prehistory(&f, TorusPoint::new([0.4, 0.6]), 10, 8).unwrap();
        let q = p.push_forward(&f).unwrap();
        assert_eq!(q.depth(), 11);
        assert_eq!(&q.branches()[1..], p.branches());
        let rebuilt = Prehistory::from_word(&f, *q.base(), q.branches()).unwrap();
        for (a, b) in rebuilt.points().iter().zip(q.points()) {
            assert!(torus_distance(a, b) < 1e-9);
        }
    }

    #[test]
    fn csv_dump_shape() {
        let f = sheared(0.02);
        let all = all_prehistories(&f, TorusPoint::new([0.1, 0.2]), 2, ENUMERATION_CAP).unwrap();
        let mut buf = Vec::new();
        write_prehistory_csv(&mut buf, &all).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "word,depth,level,x0,x1");
        assert_eq!(lines.len(), 1 + 4 * 3);
        assert!(lines[1].starts_with("00,2,0,"));
        assert!(lines[12].starts_with("11,2,2,"));
    }
}
