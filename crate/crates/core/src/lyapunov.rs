//! Finite-time Lyapunov exponents along transported unstable and stable
//! directions, and Monte Carlo censuses of the unstable exponent.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::directions::unstable_direction;
use crate::error::{LabError, Result};
use crate::linalg;
use crate::par;
use crate::prehistory::{random_prehistory_with, Prehistory};
use crate::smooth::SmoothEndo;
use crate::stats;
use crate::torus::TorusPoint;

/// Forward steps discarded before averaging.
pub const BURN_IN: usize = 100;
/// Extra forward steps beyond the window used to seed the backward stable
/// sweep.
pub const STABLE_LOOKAHEAD: usize = 40;
/// Percentiles reported by [`exponent_census`].
pub const PERCENTILES: [f64; 7] = [1.0, 5.0, 25.0, 50.0, 75.0, 95.0, 99.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovEstimate<const N: usize> {
    /// Nats per iterate.
    pub value: f64,
    pub steps: usize,
    pub burn_in: usize,
    pub prehistory_depth: usize,
    pub base: TorusPoint<N>,
    pub seed: Option<u64>,
}

fn check_steps(n: usize) -> Result<()> {
    if n == 0 {
        return Err(LabError::InvalidParameter("number of steps must be at least 1".into()));
    }
    Ok(())
}

/// Average of `log |Df(x_j) e_j|` over `j = burn_in .. burn_in + n`, where
/// `e_0` is the unstable direction of `p` and `e_j` its renormalised
/// transport.
pub fn unstable_lyapunov<const N: usize>(
    f: &SmoothEndo<N>,
    p: &Prehistory<N>,
    n: usize,
    burn_in: usize,
) -> Result<LyapunovEstimate<N>> {
    check_steps(n)?;
    let mut e = *unstable_direction(f, p)?.direction.vector();
    let mut x = *p.base();
    let mut sum = 0.0;
    for j in 0..burn_in + n {
        let (img, jac) = f.image_and_derivative(x.coords());
        let (u, norm) = linalg::normalize(&linalg::mat_vec(&jac, &e));
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(LabError::IllConditioned { step: j });
        }
        if j >= burn_in {
            sum += norm.ln();
        }
        e = u;
        x = crate::torus::project(&img);
    }
    Ok(LyapunovEstimate {
        value: sum / n as f64,
        steps: n,
        burn_in,
        prehistory_depth: p.depth(),
        base: *p.base(),
        seed: None,
    })
}

/// Stable growth logs `log |Df(x_j) s_j|` for `j` in the window, with the
/// stable directions at both ends of the window.
fn stable_logs<const N: usize>(
    f: &SmoothEndo<N>,
    x: &TorusPoint<N>,
    n: usize,
    burn_in: usize,
) -> Result<(Vec<f64>, linalg::Vector<N>, linalg::Vector<N>)> {
    let probe = *f.base().e_s()?.vector();
    let total = burn_in + n + STABLE_LOOKAHEAD;
    let mut orbit = Vec::with_capacity(total);
    let mut y = *x;
    for _ in 0..total {
        orbit.push(y);
        y = f.apply(&y);
    }
    // s_j = Df(x_j)^{-1} s_{j+1} / r_j, hence |Df(x_j) s_j| = 1 / r_j
    let mut s = probe;
    let mut s_end = probe;
    let mut logs = vec![0.0; n];
    for j in (burn_in..total).rev() {
        if j + 1 == burn_in + n {
            s_end = s;
        }
        let t = linalg::solve(&f.derivative(&orbit[j]), &s).ok_or(LabError::IllConditioned { step: j })?;
        let (u, r) = linalg::normalize(&t);
        if !(r > 0.0 && r.is_finite()) {
            return Err(LabError::IllConditioned { step: j });
        }
        s = u;
        if j < burn_in + n {
            logs[j - burn_in] = -r.ln();
        }
    }
    Ok((logs, s, s_end))
}

/// Average of `log |Df(x_j) s_j|` along the forward orbit of `x`, with
/// `s_j` the stable direction at `x_j`.
///
/// Pushing a stable vector forward is numerically unstable, so the
/// directions come from one backward sweep started `STABLE_LOOKAHEAD` steps
/// past the window.
pub fn stable_lyapunov<const N: usize>(
    f: &SmoothEndo<N>,
    x: &TorusPoint<N>,
    n: usize,
    burn_in: usize,
) -> Result<LyapunovEstimate<N>> {
    check_steps(n)?;
    let (logs, _, _) = stable_logs(f, x, n, burn_in)?;
    Ok(LyapunovEstimate {
        value: logs.iter().sum::<f64>() / n as f64,
        steps: n,
        burn_in,
        prehistory_depth: 0,
        base: *x,
        seed: None,
    })
}

/// Matched unstable and stable estimates on one orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetCheck {
    pub lambda_u: f64,
    pub lambda_s: f64,
    pub log_det: f64,
    /// `lambda_u + lambda_s - log_det`.
    pub residual: f64,
    /// `log(sin θ_start / sin θ_end) / n` with `θ` the angle between the
    /// transported directions at the ends of the window. Equals the
    /// residual up to rounding; vanishes as `n` grows.
    pub angle_term: f64,
}

/// Compares `λ^u + λ^s` with `log |det A|` over one window of a
/// two-dimensional orbit.
pub fn budget_check(f: &SmoothEndo<2>, p: &Prehistory<2>, n: usize, burn_in: usize) -> Result<BudgetCheck> {
    check_steps(n)?;
    let u = unstable_lyapunov(f, p, n, burn_in)?;
    let (logs, s_start, s_end) = stable_logs(f, p.base(), n, burn_in)?;
    let lambda_s = logs.iter().sum::<f64>() / n as f64;
    // unstable directions at the window ends
    let mut e = *unstable_direction(f, p)?.direction.vector();
    let mut x = *p.base();
    let mut e_start = e;
    for j in 0..burn_in + n {
        if j == burn_in {
            e_start = e;
        }
        e = linalg::normalize(&linalg::mat_vec(&f.derivative(&x), &e)).0;
        x = f.apply(&x);
    }
    let sin = |a: &[f64; 2], b: &[f64; 2]| (a[0] * b[1] - a[1] * b[0]).abs();
    let angle_term = (sin(&e_start, &s_start) / sin(&e, &s_end)).ln() / n as f64;
    let log_det = (f.base().det().abs() as f64).ln();
    Ok(BudgetCheck {
        lambda_u: u.value,
        lambda_s,
        log_det,
        residual: u.value + lambda_s - log_det,
        angle_term,
    })
}

/// Distribution of unstable exponents over random starting points.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentCensus<const N: usize> {
    pub estimates: Vec<LyapunovEstimate<N>>,
    pub lambda_a: f64,
    pub slack: f64,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub std_err: f64,
    /// `(q, value)` for each entry of [`PERCENTILES`].
    pub percentiles: Vec<(f64, f64)>,
    /// Fraction of estimates above `lambda_a + slack`.
    pub exceed_fraction: f64,
}

impl<const N: usize> ExponentCensus<N> {
    pub fn percentile(&self, q: f64) -> Option<f64> {
        self.percentiles.iter().find(|(p, _)| *p == q).map(|(_, v)| *v)
    }

    pub fn median(&self) -> f64 {
        self.percentile(50.0).expect("median reported")
    }

    /// `index,x0..,estimate,steps,burn_in,depth,seed`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "index")?;
        for i in 0..N {
            write!(w, ",x{i}")?;
        }
        writeln!(w, ",estimate,steps,burn_in,depth,seed")?;
        for (i, e) in self.estimates.iter().enumerate() {
            write!(w, "{i}")?;
            for c in e.base.coords() {
                write!(w, ",{c}")?;
            }
            let seed = e.seed.map(|s| s.to_string()).unwrap_or_default();
            writeln!(w, ",{},{},{},{},{}", e.value, e.steps, e.burn_in, e.prehistory_depth, seed)?;
        }
        Ok(())
    }
}

/// Unstable exponents at `points` uniform random points, each with a random
/// pre-history of depth `depth`. Sample `i` uses stream `i` of the seeded
/// generator.
pub fn exponent_census<const N: usize>(
    f: &SmoothEndo<N>,
    points: usize,
    n: usize,
    depth: usize,
    burn_in: usize,
    seed: u64,
    slack: f64,
) -> Result<ExponentCensus<N>> {
    if points == 0 {
        return Err(LabError::InvalidParameter("census needs at least one point".into()));
    }
    let estimates = par::try_map_indexed(points, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let x = TorusPoint::new(std::array::from_fn(|_| rng.random()));
        let p = random_prehistory_with(f, x, depth, &mut rng)?;
        let mut est = unstable_lyapunov(f, &p, n, burn_in)?;
        est.seed = Some(seed);
        Ok(est)
    })?;
    let lambda_a = f.base().lambda_u();
    let values: Vec<f64> = estimates.iter().map(|e| e.value).collect();
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    let percentiles = PERCENTILES.iter().map(|&q| (q, stats::percentile_sorted(&sorted, q))).collect();
    let exceed = values.iter().filter(|&&v| v > lambda_a + slack).count();
    Ok(ExponentCensus {
        lambda_a,
        slack,
        min: sorted[0],
        max: sorted[sorted.len() - 1],
        mean: stats::mean(&values),
        std_err: stats::std_dev(&values) / (values.len() as f64).sqrt(),
        percentiles,
        exceed_fraction: exceed as f64 / values.len() as f64,
        estimates,
    })
}
