//! Grid-sampled cone-field certification of hyperbolicity.
//!
//! Cones are taken around `E^u_A` and `E^s_A` in coordinates adapted to the
//! linear splitting: a vector with components `(c_u, c_s)` lies in the
//! unstable cone of half-angle `θ` when `|c_s| <= tan θ |c_u|`. Expansion is
//! measured on the `E^u` component, which is the norm of the quotient
//! `R^n / E^s_A`; contraction likewise on the `E^s` component under `Df^{-1}`.

use crate::error::{LabError, Result};
use crate::linalg::{self, Vector};
use crate::par;
use crate::smooth::{grid_point, SmoothEndo};

/// Sampling parameters of [`verify_cones`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeConfig {
    pub unstable_half_angle: f64,
    pub stable_half_angle: f64,
    /// Points per axis; the grid has `resolution^n` points.
    pub resolution: usize,
    /// Interior slope samples per cone generator, boundaries included.
    pub slope_samples: usize,
}

impl Default for ConeConfig {
    fn default() -> Self {
        ConeConfig { unstable_half_angle: 0.3, stable_half_angle: 0.3, resolution: 256, slope_samples: 5 }
    }
}

/// Why a grid point failed.
#[derive(Debug, Clone, PartialEq)]
pub enum ConeFailure {
    UnstableConeNotInvariant { slope: f64, limit: f64 },
    NoExpansion { stretch: f64 },
    StableConeNotInvariant { slope: f64, limit: f64 },
    NoContraction { stretch: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeWitness {
    pub point: Vec<f64>,
    pub failure: ConeFailure,
}

/// Result of a cone verification run.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperbolicityCertificate {
    pub cone_halfangle_u: f64,
    pub cone_halfangle_s: f64,
    /// Minimal stretch of unstable-cone vectors (quotient norm).
    pub expansion_bound: f64,
    /// Maximal contraction factor on stable-cone vectors.
    pub contraction_bound: f64,
    /// Norm-equivalence constant between the adapted and Euclidean norms on
    /// the cones; with `lambda` below it realises the uniform estimates
    /// `|Df^n v| >= C^{-1} λ^n |v|` and `|Df^n v| <= C λ^{-n} |v|`.
    pub constant_c: f64,
    pub lambda: f64,
    /// Largest image slope seen, as a fraction of the cone slope.
    pub max_unstable_slope_ratio: f64,
    pub max_stable_slope_ratio: f64,
    pub grid_resolution: usize,
    pub points_checked: usize,
    pub verified: bool,
    pub witness: Option<ConeWitness>,
}

struct PointStats {
    u_slope: f64,
    u_stretch: f64,
    s_slope: f64,
    s_stretch: f64,
}

/// Adapted-coordinate unit vectors: `±e_i` and normalised pairwise sums.
fn sphere_samples(dim: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..dim {
        for sign in [1.0, -1.0] {
            let mut v = vec![0.0; dim];
            v[i] = sign;
            out.push(v);
        }
    }
    for i in 0..dim {
        for j in i + 1..dim {
            for (si, sj) in [(1.0, 1.0), (1.0, -1.0)] {
                let mut v = vec![0.0; dim];
                v[i] = si / 2f64.sqrt();
                v[j] = sj / 2f64.sqrt();
                out.push(v);
            }
        }
    }
    out
}

/// Cone sample vectors in adapted coordinates: `(core, t * rim)` with `core`
/// a unit vector in the cone axis, `rim` a unit vector transverse to it and
/// `t` running from 0 to `tan θ`.
fn cone_samples<const N: usize>(axis_dim: usize, axis_first: bool, tan: f64, steps: usize) -> Vec<Vector<N>> {
    let other = N - axis_dim;
    let cores = if axis_dim == 1 { vec![vec![1.0]] } else { sphere_samples(axis_dim) };
    let rims = sphere_samples(other);
    let mut out = Vec::new();
    for core in &cores {
        for (ri, rim) in rims.iter().enumerate() {
            for step in 0..steps.max(2) {
                if step == 0 && ri > 0 {
                    continue;
                }
                let t = tan * step as f64 / (steps.max(2) - 1) as f64;
                let mut c = [0.0; N];
                for (i, x) in core.iter().enumerate() {
                    let idx = if axis_first { i } else { other + i };
                    c[idx] = *x;
                }
                for (i, x) in rim.iter().enumerate() {
                    let idx = if axis_first { axis_dim + i } else { i };
                    c[idx] = t * x;
                }
                out.push(c);
            }
        }
    }
    out
}

/// Checks on every grid point that `Df` maps the unstable cone strictly into
/// itself while expanding, and `Df^{-1}` does the same for the stable cone.
pub fn verify_cones<const N: usize>(f: &SmoothEndo<N>, cfg: &ConeConfig) -> Result<HyperbolicityCertificate> {
    let (tu, ts) = (cfg.unstable_half_angle, cfg.stable_half_angle);
    if !(tu > 0.0 && ts > 0.0 && tu + ts < std::f64::consts::FRAC_PI_2) {
        return Err(LabError::InvalidParameter(format!(
            "cone half-angles must be positive with sum below π/2 (got {tu}, {ts})"
        )));
    }
    if cfg.resolution == 0 {
        return Err(LabError::InvalidParameter("grid resolution must be positive".into()));
    }
    let split = f.base().splitting();
    let du = split.unstable_dim;
    let (tan_u, tan_s) = (tu.tan(), ts.tan());
    let u_adapted: Vec<Vector<N>> = cone_samples::<N>(du, true, tan_u, cfg.slope_samples);
    let s_adapted: Vec<Vector<N>> = cone_samples::<N>(N - du, false, tan_s, cfg.slope_samples);
    let u_vecs: Vec<Vector<N>> = u_adapted.iter().map(|c| split.from_adapted(c)).collect();
    let s_vecs: Vec<Vector<N>> = s_adapted.iter().map(|c| split.from_adapted(c)).collect();

    // Euclidean/adapted norm ratios over the sampled cone vectors
    let mut lo: f64 = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for v in &u_vecs {
        let (nu, _) = split.component_norms(v);
        let ratio = nu / linalg::norm(v);
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    let c_u = hi / lo;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for v in &s_vecs {
        let (_, ns) = split.component_norms(v);
        let ratio = ns / linalg::norm(v);
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    let constant_c = c_u.max(hi / lo).max(1.0);

    let total = cfg.resolution.pow(N as u32);
    let stats = par::map_indexed(total, |idx| {
        let x = grid_point::<N>(idx, cfg.resolution);
        let jac = f.derivative_at(&x);
        let mut st = PointStats { u_slope: 0.0, u_stretch: f64::INFINITY, s_slope: 0.0, s_stretch: f64::INFINITY };
        for v in &u_vecs {
            let (nu0, _) = split.component_norms(v);
            let w = linalg::mat_vec(&jac, v);
            let (nu, ns) = split.component_norms(&w);
            st.u_slope = st.u_slope.max(ns / nu);
            st.u_stretch = st.u_stretch.min(nu / nu0);
        }
        for v in &s_vecs {
            let (_, ns0) = split.component_norms(v);
            let w = match linalg::solve(&jac, v) {
                Some(w) => w,
                None => {
                    st.s_slope = f64::INFINITY;
                    st.s_stretch = 0.0;
                    continue;
                }
            };
            let (nu, ns) = split.component_norms(&w);
            st.s_slope = st.s_slope.max(nu / ns);
            st.s_stretch = st.s_stretch.min(ns / ns0);
        }
        st
    });

    let mut cert = HyperbolicityCertificate {
        cone_halfangle_u: tu,
        cone_halfangle_s: ts,
        expansion_bound: f64::INFINITY,
        contraction_bound: 0.0,
        constant_c,
        lambda: 0.0,
        max_unstable_slope_ratio: 0.0,
        max_stable_slope_ratio: 0.0,
        grid_resolution: cfg.resolution,
        points_checked: total,
        verified: true,
        witness: None,
    };
    let mut min_s_stretch = f64::INFINITY;
    for (idx, st) in stats.iter().enumerate() {
        cert.expansion_bound = cert.expansion_bound.min(st.u_stretch);
        min_s_stretch = min_s_stretch.min(st.s_stretch);
        cert.max_unstable_slope_ratio = cert.max_unstable_slope_ratio.max(st.u_slope / tan_u);
        cert.max_stable_slope_ratio = cert.max_stable_slope_ratio.max(st.s_slope / tan_s);
        if cert.witness.is_none() {
            let failure = if !(st.u_slope < tan_u) {
                Some(ConeFailure::UnstableConeNotInvariant { slope: st.u_slope, limit: tan_u })
            } else if !(st.u_stretch > 1.0) {
                Some(ConeFailure::NoExpansion { stretch: st.u_stretch })
            } else if !(st.s_slope < tan_s) {
                Some(ConeFailure::StableConeNotInvariant { slope: st.s_slope, limit: tan_s })
            } else if !(st.s_stretch > 1.0) {
                Some(ConeFailure::NoContraction { stretch: st.s_stretch })
            } else {
                None
            };
            if let Some(failure) = failure {
                cert.verified = false;
                cert.witness = Some(ConeWitness { point: grid_point::<N>(idx, cfg.resolution).to_vec(), failure });
            }
        }
    }
    cert.contraction_bound = 1.0 / min_s_stretch;
    cert.lambda = cert.expansion_bound.min(min_s_stretch);
    Ok(cert)
}
