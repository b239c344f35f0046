//! Birkhoff averages of trigonometric observables and an equidistribution
//! test across random starting points.
//!
//! Floating-point orbits of a linear map with `|det A| = 2` lose one bit per
//! step and land on a fixed point after about a hundred iterations. Linear
//! maps are therefore iterated exactly on the grid `(1/q) Z^n` with `q` the
//! prime `2^31 - 1`, where `A` acts as a permutation.

use std::f64::consts::TAU;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{LabError, Result};
use crate::par;
use crate::smooth::SmoothEndo;
use crate::stats;
use crate::torus::TorusPoint;

/// Grid modulus for exact linear orbits.
pub const GRID_MODULUS: i64 = 2_147_483_647;
/// Conservativity samples checked before an ergodicity run.
pub const CONSERVATIVE_SAMPLES: usize = 10_000;

/// A test function with known space average.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observable<const N: usize> {
    Constant(f64),
    /// `cos 2π<k, x>`.
    Cos([i64; N]),
    /// `sin 2π<k, x>`.
    Sin([i64; N]),
}

impl<const N: usize> Observable<N> {
    #[inline]
    pub fn eval(&self, x: &[f64; N]) -> f64 {
        match self {
            Observable::Constant(c) => *c,
            Observable::Cos(k) => (TAU * phase(k, x)).cos(),
            Observable::Sin(k) => (TAU * phase(k, x)).sin(),
        }
    }

    /// Exact Lebesgue average over `T^n`.
    pub fn mean(&self) -> f64 {
        match self {
            Observable::Constant(c) => *c,
            Observable::Cos(k) if k.iter().all(|&v| v == 0) => 1.0,
            _ => 0.0,
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        match self {
            Observable::Constant(c) => (*c, *c),
            _ => (-1.0, 1.0),
        }
    }

    pub fn label(&self) -> String {
        let arg = |k: &[i64; N]| {
            let terms: Vec<String> = k
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0)
                .map(|(i, &c)| match c {
                    1 => format!("x{}", i + 1),
                    -1 => format!("-x{}", i + 1),
                    _ => format!("{c}x{}", i + 1),
                })
                .collect();
            if terms.is_empty() {
                "0".to_string()
            } else {
                terms.join("+").replace("+-", "-")
            }
        };
        match self {
            Observable::Constant(c) => format!("const({c})"),
            Observable::Cos(k) => format!("cos2pi({})", arg(k)),
            Observable::Sin(k) => format!("sin2pi({})", arg(k)),
        }
    }
}

#[inline]
fn phase<const N: usize>(k: &[i64; N], x: &[f64; N]) -> f64 {
    // reduce each term first so large frequencies keep precision
    k.iter().zip(x).map(|(&a, &b)| (a as f64 * b).rem_euclid(1.0)).sum()
}

/// Forward orbit source: exact grid arithmetic for linear maps, floating
/// point otherwise.
enum Orbit<'a, const N: usize> {
    Grid { matrix: [[i64; N]; N], state: [i64; N] },
    Float { f: &'a SmoothEndo<N>, state: TorusPoint<N> },
}

impl<'a, const N: usize> Orbit<'a, N> {
    fn new(f: &'a SmoothEndo<N>, x: &TorusPoint<N>) -> Self {
        if f.is_linear() {
            let q = GRID_MODULUS;
            let matrix = f.base().matrix().map(|r| r.map(|a| a.rem_euclid(q)));
            let state = x.coords().map(|c| ((c * q as f64).round() as i64).rem_euclid(q));
            Orbit::Grid { matrix, state }
        } else {
            Orbit::Float { f, state: *x }
        }
    }

    fn point(&self) -> [f64; N] {
        match self {
            Orbit::Grid { state, .. } => state.map(|i| i as f64 / GRID_MODULUS as f64),
            Orbit::Float { state, .. } => *state.coords(),
        }
    }

    fn advance(&mut self) {
        match self {
            Orbit::Grid { matrix, state } => {
                let q = GRID_MODULUS as i128;
                *state = std::array::from_fn(|i| {
                    let s: i128 = (0..N).map(|j| matrix[i][j] as i128 * state[j] as i128).sum();
                    s.rem_euclid(q) as i64
                });
            }
            Orbit::Float { f, state } => *state = f.apply(state),
        }
    }
}

/// Birkhoff averages of every observable at each checkpoint `n` (ascending).
/// The `j = 0` term is evaluated at `x` itself.
fn averages_at<const N: usize>(
    f: &SmoothEndo<N>,
    observables: &[Observable<N>],
    x: &TorusPoint<N>,
    checkpoints: &[usize],
) -> Vec<Vec<f64>> {
    let mut sums = vec![0.0; observables.len()];
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut orbit = Orbit::new(f, x);
    let last = checkpoints.last().copied().unwrap_or(0);
    let mut next = 0;
    for j in 0..last {
        let y = if j == 0 { *x.coords() } else { orbit.point() };
        for (s, o) in sums.iter_mut().zip(observables) {
            *s += o.eval(&y);
        }
        if j + 1 == checkpoints[next] {
            out.push(sums.iter().map(|s| s / (j + 1) as f64).collect());
            next += 1;
        }
        if j + 1 < last {
            orbit.advance();
        }
    }
    out
}

/// `(1/n) Σ_{j<n} φ(f^j x)`.
pub fn birkhoff_average<const N: usize>(f: &SmoothEndo<N>, phi: &Observable<N>, x: &TorusPoint<N>, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(LabError::InvalidParameter("number of steps must be at least 1".into()));
    }
    Ok(averages_at(f, std::slice::from_ref(phi), x, &[n])[0][0])
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicityConfig {
    pub starts: usize,
    pub steps: usize,
    pub seed: u64,
    /// Allowed distance of each sample mean from the space average.
    pub mean_tolerance: f64,
    /// Upper bound for the across-start standard deviation.
    pub std_tolerance: f64,
    /// Step counts for the `std ~ n^slope` fit; values above `steps` are
    /// ignored.
    pub scaling_steps: Vec<usize>,
    /// Allowed distance of the fitted slope from `-1/2`.
    pub slope_tolerance: f64,
}

impl Default for ErgodicityConfig {
    fn default() -> Self {
        ErgodicityConfig {
            starts: 100,
            steps: 100_000,
            seed: 0,
            mean_tolerance: 0.01,
            std_tolerance: 0.02,
            scaling_steps: vec![1_000, 10_000, 100_000],
            slope_tolerance: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSummary {
    pub label: String,
    pub exact_mean: f64,
    /// Mean over starts of the Birkhoff averages at `steps`.
    pub sample_mean: f64,
    pub sample_std: f64,
    /// `(n, std)` at each scaling step.
    pub std_by_steps: Vec<(usize, f64)>,
    /// Fitted exponent of `std ~ n^slope`; `None` for constants or fewer
    /// than two scaling steps.
    pub slope: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicityReport {
    pub observables: Vec<ObservableSummary>,
    /// `averages[o][s]`: observable `o`, start `s`, at `steps`.
    pub averages: Vec<Vec<f64>>,
    /// Means and deviations within tolerance for every observable.
    pub pass: bool,
    /// Every fitted slope within tolerance of `-1/2`.
    pub scaling_pass: bool,
    pub config: ErgodicityConfig,
}

impl ErgodicityReport {
    /// `observable,start,average`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "observable,start,average")?;
        for (o, row) in self.observables.iter().zip(&self.averages) {
            for (s, a) in row.iter().enumerate() {
                writeln!(w, "{},{},{}", o.label, s, a)?;
            }
        }
        Ok(())
    }
}

/// Birkhoff averages from `cfg.starts` uniform random points (start `i` uses
/// stream `i`), one shared orbit per start.
pub fn ergodicity_test<const N: usize>(
    f: &SmoothEndo<N>,
    observables: &[Observable<N>],
    cfg: &ErgodicityConfig,
) -> Result<ErgodicityReport> {
    if cfg.steps == 0 || cfg.starts < 2 {
        return Err(LabError::InvalidParameter("need steps >= 1 and at least two starts".into()));
    }
    f.check_conservative(CONSERVATIVE_SAMPLES, cfg.seed)?;
    let mut checkpoints: Vec<usize> = cfg.scaling_steps.iter().copied().filter(|&n| n >= 1 && n <= cfg.steps).collect();
    checkpoints.push(cfg.steps);
    checkpoints.sort_unstable();
    checkpoints.dedup();
    let per_start = par::map_indexed(cfg.starts, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(i as u64);
        let x = TorusPoint::new(std::array::from_fn(|_| rng.random()));
        averages_at(f, observables, &x, &checkpoints)
    });
    let final_idx = checkpoints.iter().position(|&n| n == cfg.steps).expect("steps included");
    let column = |c: usize, o: usize| -> Vec<f64> { per_start.iter().map(|s| s[c][o]).collect() };
    let mut summaries = Vec::with_capacity(observables.len());
    let mut averages = Vec::with_capacity(observables.len());
    for (o, obs) in observables.iter().enumerate() {
        let finals = column(final_idx, o);
        let sample_mean = stats::mean(&finals);
        let sample_std = stats::std_dev(&finals);
        let std_by_steps: Vec<(usize, f64)> = checkpoints
            .iter()
            .enumerate()
            .filter(|(_, n)| cfg.scaling_steps.contains(n))
            .map(|(c, &n)| (n, stats::std_dev(&column(c, o))))
            .collect();
        let slope = (!matches!(obs, Observable::Constant(_)) && std_by_steps.len() >= 2).then(|| {
            let lx: Vec<f64> = std_by_steps.iter().map(|(n, _)| (*n as f64).ln()).collect();
            let ly: Vec<f64> = std_by_steps.iter().map(|(_, s)| s.ln()).collect();
            stats::linear_fit(&lx, &ly).0
        });
        let pass = (sample_mean - obs.mean()).abs() <= cfg.mean_tolerance && sample_std < cfg.std_tolerance;
        summaries.push(ObservableSummary {
            label: obs.label(),
            exact_mean: obs.mean(),
            sample_mean,
            sample_std,
            std_by_steps,
            slope,
            pass,
        });
        averages.push(finals);
    }
    let pass = summaries.iter().all(|s| s.pass);
    let scaling_pass = summaries
        .iter()
        .filter_map(|s| s.slope)
        .all(|m| (m + 0.5).abs() <= cfg.slope_tolerance);
    Ok(ErgodicityReport { observables: summaries, averages, pass, scaling_pass, config: cfg.clone() })
}

/// The three observables of the standard two-dimensional test.
pub fn standard_observables() -> Vec<Observable<2>> {
    vec![Observable::Cos([1, 0]), Observable::Sin([0, 1]), Observable::Cos([1, 1])]
}
