//! Integer-matrix endomorphisms of `T^n`: hyperbolic splitting, degree,
//! coset representatives of `Z^n / A Z^n` and exact preimage enumeration.

use nalgebra::{Complex, DMatrix};

use crate::directions::Direction;
use crate::error::{LabError, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::torus::{project, CoverPoint, LatticeVector, TorusPoint};

/// Unit-circle exclusion band for eigenvalue moduli.
pub const TOL_HYP: f64 = 1e-9;

pub type IntMatrix<const N: usize> = [[i64; N]; N];

/// Non-fatal findings of [`analyze`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearWarning {
    /// `|det A| = 1`: the map is a diffeomorphism, not a proper endomorphism.
    Invertible,
}

/// Invariant splitting `R^n = E^u + E^s` of a hyperbolic matrix.
#[derive(Debug, Clone)]
pub struct HyperbolicSplitting<const N: usize> {
    pub unstable_dim: usize,
    pub stable_dim: usize,
    /// Orthonormal basis of `E^u`.
    pub unstable_basis: Vec<Vector<N>>,
    /// Orthonormal basis of `E^s`.
    pub stable_basis: Vec<Vector<N>>,
    /// Smallest unstable modulus.
    pub expansion_rate: f64,
    /// Largest stable modulus.
    pub contraction_rate: f64,
    /// Maps a vector to its coordinates in the basis `[unstable | stable]`.
    to_adapted: Matrix<N>,
}

impl<const N: usize> HyperbolicSplitting<N> {
    /// Coordinates of `v` along `E^u` (first `unstable_dim` entries) and
    /// `E^s` (the rest), decomposing along the splitting.
    #[inline]
    pub fn adapted_coords(&self, v: &Vector<N>) -> Vector<N> {
        linalg::mat_vec(&self.to_adapted, v)
    }

    /// Norms of the `E^u` and `E^s` components of `v`.
    #[inline]
    pub fn component_norms(&self, v: &Vector<N>) -> (f64, f64) {
        let c = self.adapted_coords(v);
        let (u, s) = c.split_at(self.unstable_dim);
        let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        let ns = s.iter().map(|x| x * x).sum::<f64>().sqrt();
        (nu, ns)
    }

    /// Vector with adapted coordinates `c`.
    pub fn from_adapted(&self, c: &Vector<N>) -> Vector<N> {
        let mut v = [0.0; N];
        for (i, b) in self.unstable_basis.iter().chain(&self.stable_basis).enumerate() {
            v = linalg::axpy(&v, c[i], b);
        }
        v
    }

    /// Euclidean angle between `E^u` and `E^s`.
    pub fn transversality(&self) -> f64 {
        let mut worst = std::f64::consts::FRAC_PI_2;
        for u in &self.unstable_basis {
            worst = worst.min(angle_to_subspace(u, &self.stable_basis));
        }
        worst
    }
}

/// Angle between a vector and a subspace given by an orthonormal basis.
pub fn angle_to_subspace<const N: usize>(v: &Vector<N>, basis: &[Vector<N>]) -> f64 {
    let mut proj = [0.0; N];
    for b in basis {
        proj = linalg::axpy(&proj, linalg::dot(v, b), b);
    }
    let perp = linalg::sub(v, &proj);
    linalg::norm(&perp).atan2(linalg::norm(&proj))
}

/// A hyperbolic linear endomorphism `A` of `T^n`.
#[derive(Debug, Clone)]
pub struct LinearEndo<const N: usize> {
    matrix: IntMatrix<N>,
    matrix_f64: Matrix<N>,
    inverse: Matrix<N>,
    adjugate: IntMatrix<N>,
    det: i64,
    eigenvalues: Vec<Complex<f64>>,
    splitting: HyperbolicSplitting<N>,
    unstable_eigenvalue: Option<f64>,
    stable_eigenvalue: Option<f64>,
    e_u: Option<Direction<N>>,
    e_s: Option<Direction<N>>,
    lambda_u: f64,
    cosets: Vec<LatticeVector<N>>,
    warnings: Vec<LinearWarning>,
}

impl<const N: usize> LinearEndo<N> {
    pub fn matrix(&self) -> &IntMatrix<N> {
        &self.matrix
    }

    pub fn matrix_f64(&self) -> &Matrix<N> {
        &self.matrix_f64
    }

    pub fn inverse_f64(&self) -> &Matrix<N> {
        &self.inverse
    }

    pub fn det(&self) -> i64 {
        self.det
    }

    /// Number of preimages of every point, `|det A|`.
    pub fn degree(&self) -> usize {
        self.det.unsigned_abs() as usize
    }

    /// Eigenvalues sorted by decreasing modulus.
    pub fn eigenvalues(&self) -> &[Complex<f64>] {
        &self.eigenvalues
    }

    pub fn splitting(&self) -> &HyperbolicSplitting<N> {
        &self.splitting
    }

    /// The real unstable eigenvalue `mu` when `dim E^u = 1`.
    pub fn unstable_eigenvalue(&self) -> Option<f64> {
        self.unstable_eigenvalue
    }

    /// The real stable eigenvalue when `dim E^s = 1`.
    pub fn stable_eigenvalue(&self) -> Option<f64> {
        self.stable_eigenvalue
    }

    /// `E^u_A`, defined when `dim E^u = 1`.
    pub fn e_u(&self) -> Result<Direction<N>> {
        self.e_u.ok_or(LabError::UnsupportedBundleDim {
            bundle: "unstable",
            dim: self.splitting.unstable_dim,
        })
    }

    /// `E^s_A`, defined when `dim E^s = 1`.
    pub fn e_s(&self) -> Result<Direction<N>> {
        self.e_s.ok_or(LabError::UnsupportedBundleDim {
            bundle: "stable",
            dim: self.splitting.stable_dim,
        })
    }

    /// `lambda^u_A = log |mu|` for the largest unstable eigenvalue, in nats.
    pub fn lambda_u(&self) -> f64 {
        self.lambda_u
    }

    /// Canonical coset representatives of `Z^n / A Z^n`; the branch alphabet.
    pub fn cosets(&self) -> &[LatticeVector<N>] {
        &self.cosets
    }

    pub fn warnings(&self) -> &[LinearWarning] {
        &self.warnings
    }

    #[inline]
    pub fn apply_cover(&self, p: &CoverPoint<N>) -> CoverPoint<N> {
        CoverPoint(linalg::mat_vec(&self.matrix_f64, &p.0))
    }

    #[inline]
    pub fn apply_vector(&self, v: &Vector<N>) -> Vector<N> {
        linalg::mat_vec(&self.matrix_f64, v)
    }

    pub fn apply_lattice(&self, k: &LatticeVector<N>) -> LatticeVector<N> {
        LatticeVector(std::array::from_fn(|i| {
            (0..N).map(|j| self.matrix[i][j] * k.0[j]).sum()
        }))
    }

    /// `A^{-1} p` on the cover.
    #[inline]
    pub fn inverse_cover(&self, p: &CoverPoint<N>) -> CoverPoint<N> {
        CoverPoint(linalg::mat_vec(&self.inverse, &p.0))
    }

    /// `A x mod 1`.
    pub fn apply(&self, x: &TorusPoint<N>) -> TorusPoint<N> {
        project(&self.apply_cover(&x.to_cover()))
    }

    /// Writes `q = r + A k` with `k` integral and `A^{-1} r` in the unit box
    /// around the origin. Exact in `k`; used to keep cover solves well scaled.
    pub fn reduce_cover(&self, q: &CoverPoint<N>) -> (CoverPoint<N>, LatticeVector<N>) {
        let pre = linalg::mat_vec(&self.inverse, &q.0);
        let k = LatticeVector(pre.map(|c| c.round() as i64));
        let ak = self.apply_lattice(&k);
        let r = CoverPoint(std::array::from_fn(|i| q.0[i] - ak.0[i] as f64));
        (r, k)
    }

    /// Is `v` in `A Z^n`? Exact integer test via the adjugate.
    pub fn in_image_lattice(&self, v: &LatticeVector<N>) -> bool {
        (0..N).all(|i| {
            let s: i128 = (0..N).map(|j| self.adjugate[i][j] as i128 * v.0[j] as i128).sum();
            s % self.det as i128 == 0
        })
    }
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn int_det<const N: usize>(m: &IntMatrix<N>) -> i64 {
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let n = N;
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    (sign * a[n - 1][n - 1]) as i64
}

/// Exact adjugate: `adj(A) A = det(A) I`.
pub fn int_adjugate<const N: usize>(m: &IntMatrix<N>) -> IntMatrix<N> {
    if N == 1 {
        return [[1; N]; N];
    }
    let mut adj = [[0i64; N]; N];
    for i in 0..N {
        for j in 0..N {
            // cofactor C_ji goes to adj[i][j]
            let minor: Vec<Vec<i64>> = (0..N)
                .filter(|&r| r != j)
                .map(|r| (0..N).filter(|&c| c != i).map(|c| m[r][c]).collect())
                .collect();
            let d = dyn_det(&minor);
            adj[i][j] = if (i + j) % 2 == 0 { d } else { -d };
        }
    }
    adj
}

fn dyn_det(m: &[Vec<i64>]) -> i64 {
    match m.len() {
        0 => 1,
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        n => (0..n)
            .map(|c| {
                let minor: Vec<Vec<i64>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, &x)| x).collect())
                    .collect();
                let s = if c % 2 == 0 { 1 } else { -1 };
                s * m[0][c] * dyn_det(&minor)
            })
            .sum(),
    }
}

/// Coset representatives of `Z^n / A Z^n`, scanning the box `[0, |det A|)^n`
/// with the first coordinate varying fastest and keeping every vector not
/// equivalent to one already kept.
pub fn coset_representatives<const N: usize>(m: &IntMatrix<N>) -> Result<Vec<LatticeVector<N>>> {
    let det = int_det(m);
    if det == 0 {
        return Err(LabError::SingularMatrix);
    }
    let adj = int_adjugate(m);
    let d = det.unsigned_abs() as i64;
    let equivalent = |a: &LatticeVector<N>, b: &LatticeVector<N>| {
        (0..N).all(|i| {
            let s: i128 = (0..N).map(|j| adj[i][j] as i128 * (a.0[j] - b.0[j]) as i128).sum();
            s % det as i128 == 0
        })
    };
    let mut reps: Vec<LatticeVector<N>> = Vec::with_capacity(d as usize);
    let mut k = [0i64; N];
    'scan: loop {
        let cand = LatticeVector(k);
        if !reps.iter().any(|r| equivalent(r, &cand)) {
            reps.push(cand);
            if reps.len() == d as usize {
                break;
            }
        }
        for c in k.iter_mut() {
            *c += 1;
            if *c < d {
                continue 'scan;
            }
            *c = 0;
        }
        break;
    }
    Ok(reps)
}

fn canonical_eigvec_2(a: &Matrix<2>, lambda: f64) -> Vector<2> {
    let v1 = [a[0][1], lambda - a[0][0]];
    let v2 = [lambda - a[1][1], a[1][0]];
    let v = if linalg::norm(&v1) >= linalg::norm(&v2) { v1 } else { v2 };
    linalg::normalize(&v).0
}

struct Spectrum<const N: usize> {
    eigenvalues: Vec<Complex<f64>>,
    unstable_basis: Vec<Vector<N>>,
    stable_basis: Vec<Vector<N>>,
}

fn spectrum_2<const N: usize>(a: &Matrix<N>) -> Result<Spectrum<N>> {
    let m2: Matrix<2> = [[a[0][0], a[0][1]], [a[1][0], a[1][1]]];
    let tr = m2[0][0] + m2[1][1];
    let det = linalg::det(&m2);
    let disc = tr * tr - 4.0 * det;
    let widen = |v: Vector<2>| -> Vector<N> {
        let mut out = [0.0; N];
        out[0] = v[0];
        out[1] = v[1];
        out
    };
    if disc < 0.0 {
        // complex pair: both eigenvalues share the modulus sqrt|det|
        let modulus = det.abs().sqrt();
        check_unit_circle(modulus)?;
        let dim = if modulus > 1.0 { 2 } else { 0 };
        return Err(LabError::TrivialSplitting { unstable_dim: dim, max: 1 });
    }
    let root = disc.sqrt();
    // stable quadratic formula
    let big = if tr >= 0.0 { (tr + root) / 2.0 } else { (tr - root) / 2.0 };
    let small = if big != 0.0 { det / big } else { 0.0 };
    for l in [big, small] {
        check_unit_circle(l.abs())?;
    }
    let (hi, lo) = if big.abs() >= small.abs() { (big, small) } else { (small, big) };
    let unstable_dim = [hi, lo].iter().filter(|l| l.abs() > 1.0).count();
    if unstable_dim != 1 {
        return Err(LabError::TrivialSplitting { unstable_dim, max: 1 });
    }
    Ok(Spectrum {
        eigenvalues: vec![Complex::new(hi, 0.0), Complex::new(lo, 0.0)],
        unstable_basis: vec![widen(canonical_eigvec_2(&m2, hi))],
        stable_basis: vec![widen(canonical_eigvec_2(&m2, lo))],
    })
}

fn check_unit_circle(modulus: f64) -> Result<()> {
    if (modulus - 1.0).abs() <= TOL_HYP {
        return Err(LabError::NonHyperbolic { modulus, tolerance: TOL_HYP });
    }
    Ok(())
}

/// Null space of the real matrix `∏ (A - λ I)` over the selected eigenvalues,
/// i.e. the sum of their generalised eigenspaces.
fn invariant_subspace<const N: usize>(a: &Matrix<N>, selected: &[Complex<f64>]) -> Vec<Vector<N>> {
    let ac: DMatrix<Complex<f64>> = DMatrix::from_fn(N, N, |i, j| Complex::new(a[i][j], 0.0));
    let mut p: DMatrix<Complex<f64>> = DMatrix::identity(N, N);
    for &l in selected {
        let shifted = &ac - DMatrix::from_diagonal_element(N, N, l);
        p = &p * shifted;
    }
    let real = DMatrix::from_fn(N, N, |i, j| p[(i, j)].re);
    let svd = real.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..N).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let raw: Vec<Vector<N>> = order[..selected.len()]
        .iter()
        .map(|&r| std::array::from_fn(|c| v_t[(r, c)]))
        .collect();
    linalg::gram_schmidt(&raw)
}

fn spectrum_n<const N: usize>(a: &Matrix<N>) -> Result<Spectrum<N>> {
    let mut eig: Vec<Complex<f64>> = linalg::to_dmatrix(a).complex_eigenvalues().iter().copied().collect();
    eig.sort_by(|x, y| y.norm().total_cmp(&x.norm()));
    for l in &eig {
        check_unit_circle(l.norm())?;
    }
    let unstable: Vec<Complex<f64>> = eig.iter().copied().filter(|l| l.norm() > 1.0).collect();
    let stable: Vec<Complex<f64>> = eig.iter().copied().filter(|l| l.norm() < 1.0).collect();
    if unstable.is_empty() || stable.is_empty() {
        return Err(LabError::TrivialSplitting { unstable_dim: unstable.len(), max: N - 1 });
    }
    let unstable_basis = invariant_subspace(a, &unstable);
    let stable_basis = invariant_subspace(a, &stable);
    if unstable_basis.len() != unstable.len() || stable_basis.len() != stable.len() {
        return Err(LabError::EigenResidual { residual: f64::NAN, tolerance: 1e-10 });
    }
    Ok(Spectrum { eigenvalues: eig, unstable_basis, stable_basis })
}

/// Analyses an integer matrix as a linear endomorphism of `T^N`.
pub fn analyze<const N: usize>(matrix: IntMatrix<N>) -> Result<LinearEndo<N>> {
    if N < 2 {
        return Err(LabError::InvalidParameter("dimension must be at least 2".into()));
    }
    let det = int_det(&matrix);
    if det == 0 {
        return Err(LabError::SingularMatrix);
    }
    let a: Matrix<N> = matrix.map(|r| r.map(|x| x as f64));
    let spec = if N == 2 { spectrum_2(&a)? } else { spectrum_n(&a)? };

    let unstable_dim = spec.unstable_basis.len();
    let stable_dim = spec.stable_basis.len();
    let moduli: Vec<f64> = spec.eigenvalues.iter().map(|l| l.norm()).collect();
    let expansion_rate = moduli.iter().copied().filter(|&m| m > 1.0).fold(f64::INFINITY, f64::min);
    let contraction_rate = moduli.iter().copied().filter(|&m| m < 1.0).fold(0.0, f64::max);
    let lambda_u = moduli[0].ln();

    let mut basis_cols = [[0.0; N]; N];
    for (j, b) in spec.unstable_basis.iter().chain(&spec.stable_basis).enumerate() {
        for i in 0..N {
            basis_cols[i][j] = b[i];
        }
    }
    let to_adapted = linalg::inverse(&basis_cols).ok_or(LabError::EigenResidual {
        residual: f64::INFINITY,
        tolerance: 1e-10,
    })?;

    let real_single = |vals: Vec<&Complex<f64>>| -> Option<f64> {
        (vals.len() == 1 && vals[0].im == 0.0).then(|| vals[0].re)
    };
    let unstable_eigenvalue = real_single(spec.eigenvalues.iter().filter(|l| l.norm() > 1.0).collect());
    let stable_eigenvalue = real_single(spec.eigenvalues.iter().filter(|l| l.norm() < 1.0).collect());

    let e_u = (unstable_dim == 1).then(|| Direction::new(spec.unstable_basis[0]));
    let e_s = (stable_dim == 1).then(|| Direction::new(spec.stable_basis[0]));

    // residual checks of the computed invariant subspaces
    for (basis, vals) in [
        (&spec.unstable_basis, (unstable_dim == 1).then_some(unstable_eigenvalue).flatten()),
        (&spec.stable_basis, (stable_dim == 1).then_some(stable_eigenvalue).flatten()),
    ] {
        if let (Some(mu), Some(v)) = (vals, basis.first()) {
            let r = linalg::norm(&linalg::sub(&linalg::mat_vec(&a, v), &linalg::scale(v, mu)));
            let tol = 1e-10 * mu.abs().max(1.0);
            if r > tol {
                return Err(LabError::EigenResidual { residual: r, tolerance: tol });
            }
        }
    }

    let adjugate = int_adjugate(&matrix);
    let inverse: Matrix<N> = adjugate.map(|r| r.map(|x| x as f64 / det as f64));
    let cosets = coset_representatives(&matrix)?;
    let mut warnings = Vec::new();
    if det.abs() == 1 {
        warnings.push(LinearWarning::Invertible);
    }

    Ok(LinearEndo {
        matrix,
        matrix_f64: a,
        inverse,
        adjugate,
        det,
        eigenvalues: spec.eigenvalues,
        splitting: HyperbolicSplitting {
            unstable_dim,
            stable_dim,
            unstable_basis: spec.unstable_basis,
            stable_basis: spec.stable_basis,
            expansion_rate,
            contraction_rate,
            to_adapted,
        },
        unstable_eigenvalue,
        stable_eigenvalue,
        e_u,
        e_s,
        lambda_u,
        cosets,
        warnings,
    })
}

/// The `|det A|` points `y` with `A y = x mod Z^n`, one per coset
/// representative `k`, as `A^{-1}(x + k)`.
pub fn preimages_linear<const N: usize>(a: &LinearEndo<N>, x: &TorusPoint<N>) -> Vec<TorusPoint<N>> {
    a.cosets()
        .iter()
        .map(|k| project(&a.inverse_cover(&x.to_cover().translate(k))))
        .collect()
}
