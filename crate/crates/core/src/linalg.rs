//! Small dense linear algebra on fixed-size arrays.
//!
//! Everything here works on `[f64; N]` and `[[f64; N]; N]` so that inner
//! loops never allocate. The general-dimension eigen and singular value
//! routines are delegated to `nalgebra`.

use nalgebra::DMatrix;

pub type Vector<const N: usize> = [f64; N];
pub type Matrix<const N: usize> = [[f64; N]; N];

pub fn identity<const N: usize>() -> Matrix<N> {
    let mut m = [[0.0; N]; N];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

#[inline]
pub fn dot<const N: usize>(a: &Vector<N>, b: &Vector<N>) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm<const N: usize>(a: &Vector<N>) -> f64 {
    // hypot-style scaling keeps huge push-forward vectors finite
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    scale * a.iter().map(|x| (x / scale).powi(2)).sum::<f64>().sqrt()
}

#[inline]
pub fn scale<const N: usize>(a: &Vector<N>, s: f64) -> Vector<N> {
    a.map(|x| x * s)
}

#[inline]
pub fn add<const N: usize>(a: &Vector<N>, b: &Vector<N>) -> Vector<N> {
    std::array::from_fn(|i| a[i] + b[i])
}

#[inline]
pub fn sub<const N: usize>(a: &Vector<N>, b: &Vector<N>) -> Vector<N> {
    std::array::from_fn(|i| a[i] - b[i])
}

/// `a + s * b`
#[inline]
pub fn axpy<const N: usize>(a: &Vector<N>, s: f64, b: &Vector<N>) -> Vector<N> {
    std::array::from_fn(|i| a[i] + s * b[i])
}

/// Returns the unit vector and the original norm.
#[inline]
pub fn normalize<const N: usize>(a: &Vector<N>) -> (Vector<N>, f64) {
    let n = norm(a);
    (scale(a, 1.0 / n), n)
}

#[inline]
pub fn mat_vec<const N: usize>(m: &Matrix<N>, v: &Vector<N>) -> Vector<N> {
    std::array::from_fn(|i| dot(&m[i], v))
}

pub fn mat_mul<const N: usize>(a: &Matrix<N>, b: &Matrix<N>) -> Matrix<N> {
    let mut out = [[0.0; N]; N];
    for i in 0..N {
        for k in 0..N {
            let aik = a[i][k];
            for j in 0..N {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub fn transpose<const N: usize>(a: &Matrix<N>) -> Matrix<N> {
    std::array::from_fn(|i| std::array::from_fn(|j| a[j][i]))
}

pub fn mat_sub<const N: usize>(a: &Matrix<N>, b: &Matrix<N>) -> Matrix<N> {
    std::array::from_fn(|i| sub(&a[i], &b[i]))
}

/// LU factorisation with partial pivoting. Returns `None` for an exactly
/// singular matrix.
struct Lu<const N: usize> {
    lu: Matrix<N>,
    perm: [usize; N],
    sign: f64,
}

fn lu<const N: usize>(a: &Matrix<N>) -> Option<Lu<N>> {
    let mut lu = *a;
    let mut perm: [usize; N] = std::array::from_fn(|i| i);
    let mut sign = 1.0;
    for col in 0..N {
        let pivot = (col..N)
            .max_by(|&i, &j| lu[i][col].abs().total_cmp(&lu[j][col].abs()))
            .unwrap();
        if lu[pivot][col] == 0.0 {
            return None;
        }
        if pivot != col {
            lu.swap(pivot, col);
            perm.swap(pivot, col);
            sign = -sign;
        }
        for row in col + 1..N {
            let factor = lu[row][col] / lu[col][col];
            lu[row][col] = factor;
            for k in col + 1..N {
                lu[row][k] -= factor * lu[col][k];
            }
        }
    }
    Some(Lu { lu, perm, sign })
}

impl<const N: usize> Lu<N> {
    fn solve(&self, b: &Vector<N>) -> Vector<N> {
        let mut x: Vector<N> = std::array::from_fn(|i| b[self.perm[i]]);
        for i in 0..N {
            for k in 0..i {
                x[i] -= self.lu[i][k] * x[k];
            }
        }
        for i in (0..N).rev() {
            for k in i + 1..N {
                x[i] -= self.lu[i][k] * x[k];
            }
            x[i] /= self.lu[i][i];
        }
        x
    }
}

pub fn det<const N: usize>(a: &Matrix<N>) -> f64 {
    match N {
        1 => a[0][0],
        2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
        _ => match lu(a) {
            Some(f) => f.sign * (0..N).map(|i| f.lu[i][i]).product::<f64>(),
            None => 0.0,
        },
    }
}

/// Solves `a x = b`.
pub fn solve<const N: usize>(a: &Matrix<N>, b: &Vector<N>) -> Option<Vector<N>> {
    if N == 2 {
        let d = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        if d == 0.0 {
            return None;
        }
        let mut x = [0.0; N];
        x[0] = (a[1][1] * b[0] - a[0][1] * b[1]) / d;
        x[1] = (a[0][0] * b[1] - a[1][0] * b[0]) / d;
        return Some(x);
    }
    lu(a).map(|f| f.solve(b))
}

pub fn inverse<const N: usize>(a: &Matrix<N>) -> Option<Matrix<N>> {
    let f = lu(a)?;
    let mut inv = [[0.0; N]; N];
    for j in 0..N {
        let mut e = [0.0; N];
        e[j] = 1.0;
        let col = f.solve(&e);
        for i in 0..N {
            inv[i][j] = col[i];
        }
    }
    Some(inv)
}

pub fn to_dmatrix<const N: usize>(a: &Matrix<N>) -> DMatrix<f64> {
    DMatrix::from_fn(N, N, |i, j| a[i][j])
}

/// Spectral norm. Closed form for 2x2, SVD otherwise.
pub fn op_norm<const N: usize>(a: &Matrix<N>) -> f64 {
    if N == 2 {
        let fro2: f64 = a.iter().flatten().map(|x| x * x).sum();
        let d = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let disc = (fro2 * fro2 - 4.0 * d * d).max(0.0);
        return ((fro2 + disc.sqrt()) / 2.0).sqrt();
    }
    to_dmatrix(a)
        .singular_values()
        .iter()
        .fold(0.0f64, |m, &s| m.max(s))
}

/// Orthonormalises `vectors` in order (modified Gram-Schmidt), dropping any
/// that are numerically dependent on their predecessors.
pub fn gram_schmidt<const N: usize>(vectors: &[Vector<N>]) -> Vec<Vector<N>> {
    let mut basis: Vec<Vector<N>> = Vec::new();
    for v in vectors {
        let mut w = *v;
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                w = axpy(&w, -c, b);
            }
        }
        let n = norm(&w);
        if n > 1e-10 * norm(v).max(1e-300) {
            basis.push(scale(&w, 1.0 / n));
        }
    }
    basis
}

/// Orthonormal basis of the orthogonal complement of span(`basis`).
pub fn complement<const N: usize>(basis: &[Vector<N>]) -> Vec<Vector<N>> {
    let mut all: Vec<Vector<N>> = basis.to_vec();
    for i in 0..N {
        let mut e = [0.0; N];
        e[i] = 1.0;
        all.push(e);
    }
    let ortho = gram_schmidt(&all);
    ortho[basis.len()..].to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_and_inverse_agree() {
        let a = [[4.0, 1.0, 0.5], [1.0, 3.0, -1.0], [0.0, 2.0, 5.0]];
        let b = [1.0, -2.0, 0.5];
        let x = solve(&a, &b).unwrap();
        let r = sub(&mat_vec(&a, &x), &b);
        assert!(norm(&r) < 1e-14);
        let inv = inverse(&a).unwrap();
        let id = mat_mul(&a, &inv);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((id[i][j] - e).abs() < 1e-14);
            }
        }
        assert!((det(&a) - 64.0).abs() < 1e-12);
    }

    #[test]
    fn op_norm_closed_form_matches_svd() {
        let a = [[3.0, 1.0], [1.0, 1.0]];
        let svd = to_dmatrix(&a).singular_values().max();
        assert!((op_norm(&a) - svd).abs() < 1e-13);
        assert!((op_norm(&a) - (2.0 + 2f64.sqrt())).abs() < 1e-13);
        let b = [[1.0, 0.7], [0.0, 1.0]];
        assert!((op_norm(&b) - to_dmatrix(&b).singular_values().max()).abs() < 1e-13);
    }

    #[test]
    fn complement_is_orthogonal() {
        let u = [[0.6, 0.8, 0.0]];
        let c = complement(&u);
        assert_eq!(c.len(), 2);
        for v in &c {
            assert!(dot(v, &u[0]).abs() < 1e-15);
            assert!((norm(v) - 1.0).abs() < 1e-15);
        }
    }
}
