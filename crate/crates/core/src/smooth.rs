//! Conservative nonlinear endomorphisms `f = S_m ∘ ... ∘ S_1 ∘ A` built from
//! area-preserving sinusoidal shears, with derivatives, Newton inverse
//! branches on the universal cover and C¹ diagnostics.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{LabError, Result};
use crate::linalg::{self, Matrix};
use crate::linear::LinearEndo;
use crate::par;
use crate::torus::{project, CoverPoint, TorusPoint};

/// Newton iteration cap for inverse branches.
pub const NEWTON_MAX_ITER: usize = 50;
/// Absolute residual accepted by the Newton solve.
pub const NEWTON_TOL: f64 = 1e-12;
/// Newton steps longer than this are shortened to this length.
pub const NEWTON_MAX_STEP: f64 = 0.5;

/// `x_axis += amplitude * sin(2π (frequency * x_driver + phase))`.
///
/// Unit Jacobian determinant and integer frequency make this a volume
/// preserving diffeomorphism of `T^n` homotopic to the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShearMap {
    pub axis: usize,
    pub driver: usize,
    pub amplitude: f64,
    pub frequency: u32,
    pub phase: f64,
}

impl ShearMap {
    pub fn new(axis: usize, driver: usize, amplitude: f64, frequency: u32, phase: f64) -> Self {
        ShearMap { axis, driver, amplitude, frequency, phase: phase.rem_euclid(1.0) }
    }

    #[inline]
    fn argument(&self, x_driver: f64) -> f64 {
        // reduce before scaling by 2π so large cover coordinates keep accuracy
        TAU * (self.frequency as f64 * x_driver + self.phase).rem_euclid(1.0)
    }

    #[inline]
    pub fn displacement(&self, x_driver: f64) -> f64 {
        self.amplitude * self.argument(x_driver).sin()
    }

    /// `d(displacement)/d(x_driver)`.
    #[inline]
    pub fn slope(&self, x_driver: f64) -> f64 {
        TAU * self.amplitude * self.frequency as f64 * self.argument(x_driver).cos()
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.axis >= n || self.driver >= n {
            return Err(LabError::InvalidParameter(format!(
                "shear axis {} / driver {} out of range for dimension {n}",
                self.axis, self.driver
            )));
        }
        if self.axis == self.driver {
            return Err(LabError::InvalidParameter("shear axis and driver must differ".into()));
        }
        if self.frequency == 0 {
            return Err(LabError::InvalidParameter("shear frequency must be positive".into()));
        }
        if !self.amplitude.is_finite() || !self.phase.is_finite() {
            return Err(LabError::InvalidParameter("shear amplitude and phase must be finite".into()));
        }
        Ok(())
    }
}

/// A linear model followed by a list of shears.
#[derive(Debug, Clone)]
pub struct SmoothEndo<const N: usize> {
    base: LinearEndo<N>,
    shears: Vec<ShearMap>,
}

impl<const N: usize> SmoothEndo<N> {
    pub fn new(base: LinearEndo<N>, shears: Vec<ShearMap>) -> Result<Self> {
        for s in &shears {
            s.validate(N)?;
        }
        Ok(SmoothEndo { base, shears })
    }

    /// `f = A`.
    pub fn linear(base: LinearEndo<N>) -> Self {
        SmoothEndo { base, shears: Vec::new() }
    }

    pub fn base(&self) -> &LinearEndo<N> {
        &self.base
    }

    pub fn shears(&self) -> &[ShearMap] {
        &self.shears
    }

    pub fn degree(&self) -> usize {
        self.base.degree()
    }

    /// True when every shear amplitude is zero, i.e. `f = A`.
    pub fn is_linear(&self) -> bool {
        self.shears.iter().all(|s| s.amplitude == 0.0)
    }

    /// Sum of shear amplitudes: a bound on `|f̄(p) - A p|`.
    pub fn total_amplitude(&self) -> f64 {
        self.shears.iter().map(|s| s.amplitude.abs()).sum()
    }

    /// The lift `f̄ : R^n -> R^n`, satisfying `f̄(p + k) = f̄(p) + A k`.
    #[inline]
    pub fn lift_apply(&self, p: &CoverPoint<N>) -> CoverPoint<N> {
        let mut q = self.base.apply_cover(p).0;
        for s in &self.shears {
            q[s.axis] += s.displacement(q[s.driver]);
        }
        CoverPoint(q)
    }

    pub fn apply(&self, x: &TorusPoint<N>) -> TorusPoint<N> {
        project(&self.lift_apply(&x.to_cover()))
    }

    /// `f̄(p)` together with `Df(p)`.
    #[inline]
    pub fn image_and_derivative(&self, p: &[f64; N]) -> (CoverPoint<N>, Matrix<N>) {
        let mut q = linalg::mat_vec(self.base.matrix_f64(), p);
        let mut jac = *self.base.matrix_f64();
        for s in &self.shears {
            let slope = s.slope(q[s.driver]);
            q[s.axis] += s.displacement(q[s.driver]);
            if slope != 0.0 {
                let driver_row = jac[s.driver];
                for (j, d) in driver_row.iter().enumerate() {
                    jac[s.axis][j] += slope * d;
                }
            }
        }
        (CoverPoint(q), jac)
    }

    /// `Df` at a point; periodic, so torus and cover points agree.
    #[inline]
    pub fn derivative_at(&self, p: &[f64; N]) -> Matrix<N> {
        self.image_and_derivative(p).1
    }

    pub fn derivative(&self, x: &TorusPoint<N>) -> Matrix<N> {
        self.derivative_at(x.coords())
    }

    /// Solves `f̄(p) = target` by damped Newton seeded at `seed`.
    fn newton(&self, target: &CoverPoint<N>, seed: CoverPoint<N>, branch: usize) -> Result<CoverPoint<N>> {
        let mut p = seed.0;
        let mut residual = f64::INFINITY;
        for _ in 0..NEWTON_MAX_ITER {
            let (img, jac) = self.image_and_derivative(&p);
            let r = linalg::sub(&img.0, &target.0);
            residual = linalg::norm(&r);
            if residual < NEWTON_TOL {
                // one more step costs little and takes the root to rounding level
                if let Some(step) = linalg::solve(&jac, &r) {
                    p = linalg::sub(&p, &step);
                }
                return Ok(CoverPoint(p));
            }
            let mut step = linalg::solve(&jac, &r).ok_or(LabError::NewtonDiverged {
                branch,
                iterations: 0,
                residual,
            })?;
            let len = linalg::norm(&step);
            if len > NEWTON_MAX_STEP {
                step = linalg::scale(&step, NEWTON_MAX_STEP / len);
            }
            p = linalg::sub(&p, &step);
        }
        let (img, _) = self.image_and_derivative(&p);
        let final_res = linalg::norm(&linalg::sub(&img.0, &target.0));
        if final_res < NEWTON_TOL {
            return Ok(CoverPoint(p));
        }
        Err(LabError::NewtonDiverged { branch, iterations: NEWTON_MAX_ITER, residual: residual.min(final_res) })
    }

    /// The unique `p` with `f̄(p) = q`.
    ///
    /// `q` is first reduced modulo `A Z^n` so the solve runs near the origin;
    /// the lattice part is added back exactly.
    pub fn inverse_lift(&self, q: &CoverPoint<N>) -> Result<CoverPoint<N>> {
        let (r, k) = self.base.reduce_cover(q);
        let p = self.newton(&r, self.base.inverse_cover(&r), 0)?;
        Ok(p.translate(&k))
    }

    /// The preimage of `x` on branch `branch`: the solution of
    /// `f̄(y) = x + k_branch` seeded at `A^{-1}(x + k_branch)`.
    pub fn preimage_branch(&self, x: &TorusPoint<N>, branch: usize) -> Result<TorusPoint<N>> {
        let k = self.base.cosets().get(branch).ok_or(LabError::BranchOutOfRange {
            branch,
            degree: self.degree(),
        })?;
        let target = x.to_cover().translate(k);
        let y = self.newton(&target, self.base.inverse_cover(&target), branch)?;
        Ok(project(&y))
    }

    /// All `|det A|` preimages, in branch order.
    pub fn preimages(&self, x: &TorusPoint<N>) -> Result<Vec<TorusPoint<N>>> {
        (0..self.degree()).map(|b| self.preimage_branch(x, b)).collect()
    }

    /// Grid estimate of the C¹ distance between `f` and `A`: the larger of
    /// the displacement `|f̄(x) - A x|` and `|Df(x) - A|` over the grid
    /// `{i / resolution}^n`.
    pub fn c1_distance_to_linear(&self, resolution: usize) -> f64 {
        let total = resolution.pow(N as u32);
        let a = *self.base.matrix_f64();
        let vals = par::map_indexed(total, |idx| {
            let x = grid_point::<N>(idx, resolution);
            let (img, jac) = self.image_and_derivative(&x);
            let ax = linalg::mat_vec(&a, &x);
            let c0 = linalg::norm(&linalg::sub(&img.0, &ax));
            let c1 = linalg::op_norm(&linalg::mat_sub(&jac, &a));
            c0.max(c1)
        });
        vals.into_iter().fold(0.0, f64::max)
    }

    /// Checks `|det Df| = |det A|` at `samples` random points.
    pub fn check_conservative(&self, samples: usize, seed: u64) -> Result<()> {
        let expected = self.base.det().abs() as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let x: [f64; N] = std::array::from_fn(|_| rng.random());
            let d = linalg::det(&self.derivative_at(&x)).abs();
            if (d - expected).abs() > 1e-12 * expected {
                return Err(LabError::NotConservative { found: d, expected, point: x.to_vec() });
            }
        }
        Ok(())
    }
}

/// Grid point `idx` of `{i / resolution}^n`, first coordinate fastest.
pub fn grid_point<const N: usize>(mut idx: usize, resolution: usize) -> [f64; N] {
    std::array::from_fn(|_| {
        let i = idx % resolution;
        idx /= resolution;
        i as f64 / resolution as f64
    })
}
