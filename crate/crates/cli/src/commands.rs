//! Subcommand implementations, generic over the torus dimension.

use std::fmt;
use std::path::{Path, PathBuf};

use anosov_core::cones::{verify_cones, ConeConfig, HyperbolicityCertificate};
use anosov_core::directions::{angle_decay, census, dichotomy_scan, CensusMode};
use anosov_core::ergodic::{ergodicity_test, standard_observables, ErgodicityConfig, Observable};
use anosov_core::foliation::{
    asymptotic_direction_check, growth_ratio_check, leaf_pairs, linear_sandwich_check, max_ratio_at,
    quasi_isometry_fit, random_pairs, trace_leaf,
};
use anosov_core::lyapunov::exponent_census;
use anosov_core::prehistory::{all_prehistories, write_prehistory_csv, ENUMERATION_CAP};
use anosov_core::stats;
use anosov_core::{analyze, CoverPoint, Direction, LabError, ShearMap, SmoothEndo, TorusPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Expectation, ObservableKind};
use crate::output::RunOutput;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    VerifyAnosov,
    PreimageTree,
    Dispersion,
    DichotomyScan,
    AngleDecay,
    LyapunovCensus,
    QuasiIso,
    ErgodicTest,
}

impl Subcommand {
    pub const ALL: [Subcommand; 8] = [
        Subcommand::VerifyAnosov,
        Subcommand::PreimageTree,
        Subcommand::Dispersion,
        Subcommand::DichotomyScan,
        Subcommand::AngleDecay,
        Subcommand::LyapunovCensus,
        Subcommand::QuasiIso,
        Subcommand::ErgodicTest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::VerifyAnosov => "verify-anosov",
            Subcommand::PreimageTree => "preimage-tree",
            Subcommand::Dispersion => "dispersion",
            Subcommand::DichotomyScan => "dichotomy-scan",
            Subcommand::AngleDecay => "angle-decay",
            Subcommand::LyapunovCensus => "lyapunov-census",
            Subcommand::QuasiIso => "quasi-iso",
            Subcommand::ErgodicTest => "ergodic-test",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub config: PathBuf,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or configuration: exit code 2.
    Usage(String),
    /// The experiment could not run to completion: exit code 1.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "run failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("writing output: {e}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub verdict: Option<bool>,
    pub classification: Option<String>,
    pub dir: PathBuf,
    pub results: Value,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        match self.verdict {
            Some(false) => 1,
            _ => 0,
        }
    }
}

/// Reads the config, runs `sub` and writes the run directory.
pub fn run(sub: Subcommand, opts: &RunOptions) -> Result<Outcome, CliError> {
    let text = std::fs::read_to_string(&opts.config)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", opts.config.display())))?;
    let cfg = ExperimentConfig::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", opts.config.display())))?;
    if let Some(t) = opts.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // a pool may already exist when called repeatedly in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let seed = opts.seed.unwrap_or(cfg.seed);
    let dir = opts
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| Path::new("anosov-lab-out").join(sub.name()));
    match cfg.dimension() {
        2 => run_dim::<2>(sub, &cfg, &text, seed, &dir),
        3 => run_dim::<3>(sub, &cfg, &text, seed, &dir),
        n => Err(CliError::Usage(format!("matrix has {n} rows; supported dimensions are 2 and 3"))),
    }
}

/// Builds the map described by the `[endomorphism]` section.
pub fn build_endo<const N: usize>(cfg: &ExperimentConfig) -> Result<SmoothEndo<N>, CliError> {
    let rows = &cfg.endomorphism.matrix;
    let mut m = [[0i64; N]; N];
    for (i, r) in rows.iter().enumerate() {
        if r.len() != N {
            return Err(CliError::Usage(LabError::BadShape { expected: N, rows: rows.len(), cols: r.len() }.to_string()));
        }
        m[i].copy_from_slice(r);
    }
    let base = analyze(m).map_err(|e| CliError::Usage(format!("endomorphism.matrix: {e}")))?;
    let shears = cfg
        .endomorphism
        .shears
        .iter()
        .map(|s| ShearMap::new(s.axis, s.driver, s.amplitude, s.frequency, s.phase))
        .collect();
    SmoothEndo::new(base, shears).map_err(|e| CliError::Usage(format!("endomorphism.shear: {e}")))
}

fn cone_config(cfg: &ExperimentConfig, n: usize) -> ConeConfig {
    let v = &cfg.verify_anosov;
    ConeConfig {
        unstable_half_angle: v.unstable_half_angle,
        stable_half_angle: v.stable_half_angle,
        resolution: v.resolution.unwrap_or(if n == 2 { 256 } else { 32 }),
        slope_samples: v.slope_samples,
    }
}

fn certificate_json(c: &HyperbolicityCertificate) -> Value {
    json!({
        "verified": c.verified,
        "cone_halfangle_u": c.cone_halfangle_u,
        "cone_halfangle_s": c.cone_halfangle_s,
        "expansion_bound": c.expansion_bound,
        "contraction_bound": c.contraction_bound,
        "constant_c": c.constant_c,
        "lambda": c.lambda,
        "max_unstable_slope_ratio": c.max_unstable_slope_ratio,
        "max_stable_slope_ratio": c.max_stable_slope_ratio,
        "grid_resolution": c.grid_resolution,
        "points_checked": c.points_checked,
        "witness": c.witness.as_ref().map(|w| json!({"point": w.point, "failure": format!("{:?}", w.failure)})),
    })
}

fn random_point<const N: usize>(seed: u64, index: usize) -> TorusPoint<N> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    TorusPoint::new(std::array::from_fn(|_| rng.random()))
}

fn point_from<const N: usize>(v: &[f64], key: &str) -> Result<[f64; N], CliError> {
    <[f64; N]>::try_from(v).map_err(|_| CliError::Usage(format!("{key} needs {N} coordinates, got {}", v.len())))
}

fn run_dim<const N: usize>(
    sub: Subcommand,
    cfg: &ExperimentConfig,
    text: &str,
    seed: u64,
    dir: &Path,
) -> Result<Outcome, CliError> {
    let f = build_endo::<N>(cfg)?;
    let cones = cone_config(cfg, N);
    let params = parameters(sub, cfg, &cones);
    let cert = verify_cones(&f, &cones).map_err(|e| CliError::Usage(format!("verify_anosov: {e}")))?;
    let out = RunOutput::create(dir, sub.name(), text, seed, params)?;
    if sub != Subcommand::VerifyAnosov && !cert.verified {
        let results = json!({ "error": "cone verification failed; the map is not certified hyperbolic", "certificate": certificate_json(&cert) });
        out.summary(Some(false), None, results.clone())?;
        return Err(CliError::Runtime(format!(
            "cone verification failed (see {}); experiment not run",
            out.dir().join("summary.json").display()
        )));
    }
    let (verdict, label, results) = match sub {
        Subcommand::VerifyAnosov => verify(&f, &cert, &out)?,
        Subcommand::PreimageTree => preimage_tree(&f, cfg, seed, &out)?,
        Subcommand::Dispersion => dispersion(&f, cfg, seed, &out)?,
        Subcommand::DichotomyScan => dichotomy(&f, cfg, seed, &out)?,
        Subcommand::AngleDecay => decay(&f, cfg, seed, &out)?,
        Subcommand::LyapunovCensus => lyapunov(&f, cfg, seed, &out)?,
        Subcommand::QuasiIso => quasi_iso(&f, cfg, seed, &out)?,
        Subcommand::ErgodicTest => ergodic(&f, cfg, seed, &out)?,
    };
    out.summary(verdict, label.as_deref(), results.clone())?;
    Ok(Outcome { verdict, classification: label, dir: dir.to_path_buf(), results })
}

/// Resolved parameters of the sections a subcommand reads.
fn parameters(sub: Subcommand, cfg: &ExperimentConfig, cones: &ConeConfig) -> Value {
    let section = match sub {
        Subcommand::VerifyAnosov => Value::Null,
        Subcommand::PreimageTree => serde_json::to_value(&cfg.preimage_tree).unwrap_or(Value::Null),
        Subcommand::Dispersion => serde_json::to_value(&cfg.dispersion).unwrap_or(Value::Null),
        Subcommand::DichotomyScan => serde_json::to_value(&cfg.dichotomy_scan).unwrap_or(Value::Null),
        Subcommand::AngleDecay => serde_json::to_value(&cfg.angle_decay).unwrap_or(Value::Null),
        Subcommand::LyapunovCensus => serde_json::to_value(&cfg.lyapunov_census).unwrap_or(Value::Null),
        Subcommand::QuasiIso => serde_json::to_value(&cfg.quasi_iso).unwrap_or(Value::Null),
        Subcommand::ErgodicTest => serde_json::to_value(&cfg.ergodic_test).unwrap_or(Value::Null),
    };
    json!({
        "endomorphism": serde_json::to_value(&cfg.endomorphism).unwrap_or(Value::Null),
        "verify_anosov": {
            "unstable_half_angle": cones.unstable_half_angle,
            "stable_half_angle": cones.stable_half_angle,
            "resolution": cones.resolution,
            "slope_samples": cones.slope_samples,
        },
        "experiment": section,
    })
}

/// Tilt of the probe direction in the angle-decay experiment.
const PROBE_TILT: f64 = 1e-3;

type Step = (Option<bool>, Option<String>, Value);

fn verify<const N: usize>(f: &SmoothEndo<N>, cert: &HyperbolicityCertificate, out: &RunOutput) -> Result<Step, CliError> {
    let base = f.base();
    let eig: Vec<Value> = base.eigenvalues().iter().map(|l| json!([l.re, l.im])).collect();
    out.csv("certificate.csv", |w| {
        writeln!(w, "quantity,value")?;
        writeln!(w, "expansion_bound,{}", cert.expansion_bound)?;
        writeln!(w, "contraction_bound,{}", cert.contraction_bound)?;
        writeln!(w, "constant_c,{}", cert.constant_c)?;
        writeln!(w, "lambda,{}", cert.lambda)?;
        writeln!(w, "points_checked,{}", cert.points_checked)
    })?;
    let results = json!({
        "certificate": certificate_json(cert),
        "degree": f.degree(),
        "eigenvalues": eig,
        "lambda_u_linear": base.lambda_u(),
        "c1_distance_to_linear": f.c1_distance_to_linear(cert.grid_resolution.min(64)),
        "warnings": base.warnings().iter().map(|w| format!("{w:?}")).collect::<Vec<_>>(),
    });
    Ok((Some(cert.verified), None, results))
}

fn preimage_tree<const N: usize>(f: &SmoothEndo<N>, cfg: &ExperimentConfig, seed: u64, out: &RunOutput) -> Result<Step, CliError> {
    let p = &cfg.preimage_tree;
    let x = match &p.point {
        Some(v) => TorusPoint::new(point_from::<N>(v, "preimage_tree.point")?),
        None => random_point(seed, 0),
    };
    let all = all_prehistories(f, x, p.depth, ENUMERATION_CAP)?;
    let residual = all.iter().map(|q| q.consistency_residual(f)).fold(0.0, f64::max);
    out.csv("prehistories.csv", |w| write_prehistory_csv(w, &all))?;
    let results = json!({
        "point": x.coords().to_vec(),
        "depth": p.depth,
        "count": all.len(),
        "max_consistency_residual": residual,
    });
    Ok((None, None, results))
}

fn dispersion<const N: usize>(f: &SmoothEndo<N>, cfg: &ExperimentConfig, seed: u64, out: &RunOutput) -> Result<Step, CliError> {
    let d = &cfg.dispersion;
    let mut rows = Vec::with_capacity(d.points);
    for i in 0..d.points {
        let x = random_point::<N>(seed, i);
        let mode = if d.exhaustive {
            CensusMode::Exhaustive { depth: d.depth }
        } else {
            CensusMode::Sampled { count: d.samples, depth: d.depth, seed: seed.wrapping_add(i as u64 + 1) }
        };
        rows.push(census(f, &x, mode, d.cluster_tolerance)?);
    }
    out.csv("points.csv", |w| {
        write!(w, "point")?;
        for k in 0..N {
            write!(w, ",x{k}")?;
        }
        writeln!(w, ",directions,dispersion,cluster_count,max_cluster_diameter")?;
        for (i, c) in rows.iter().enumerate() {
            write!(w, "{i}")?;
            for v in c.base.coords() {
                write!(w, ",{v}")?;
            }
            writeln!(w, ",{},{},{},{}", c.entries.len(), c.dispersion, c.cluster_count, c.max_cluster_diameter)?;
        }
        Ok(())
    })?;
    out.csv("directions.csv", |w| {
        write!(w, "point,word")?;
        for k in 0..N {
            write!(w, ",v{k}")?;
        }
        writeln!(w, ",diagnostic,cluster")?;
        for (i, c) in rows.iter().enumerate() {
            for e in &c.entries {
                let word: String = e.word.iter().map(|b| char::from_digit(*b, 36).unwrap_or('?')).collect();
                write!(w, "{i},{word}")?;
                for v in e.direction.vector() {
                    write!(w, ",{v}")?;
                }
                writeln!(w, ",{},{}", e.diagnostic, e.cluster)?;
            }
        }
        Ok(())
    })?;
    let non_special = rows.iter().filter(|c| c.is_non_special(d.threshold)).count();
    let max_disp = rows.iter().map(|c| c.dispersion).fold(0.0, f64::max);
    let label = if non_special == 0 {
        "special (at sampled resolution)".to_string()
    } else {
        format!("non-special at {non_special} of {} points", rows.len())
    };
    let results = json!({
        "points": rows.len(),
        "max_dispersion": max_disp,
        "min_dispersion": rows.iter().map(|c| c.dispersion).fold(f64::INFINITY, f64::min),
        "non_special_points": non_special,
        "max_cluster_count": rows.iter().map(|c| c.cluster_count).max().unwrap_or(0),
        "threshold": d.threshold,
        "cluster_tolerance": d.cluster_tolerance,
    });
    Ok((None, Some(label), results))
}

fn dichotomy<const N: usize>(f: &SmoothEndo<N>, cfg: &ExperimentConfig, seed: u64, out: &RunOutput) -> Result<Step, CliError> {
    let d = &cfg.dichotomy_scan;
    let scan = dichotomy_scan(f, d.points, d.samples, d.depth, seed, d.cluster_tolerance, d.threshold)?;
    out.csv("scan.csv", |w| {
        write!(w, "point")?;
        for k in 0..N {
            write!(w, ",x{k}")?;
        }
        writeln!(w, ",dispersion,cluster_count,non_special")?;
        for (i, p) in scan.points.iter().enumerate() {
            write!(w, "{i}")?;
            for v in p.point.coords() {
                write!(w, ",{v}")?;
            }
            writeln!(w, ",{},{},{}", p.dispersion, p.cluster_count, p.non_special)?;
        }
        Ok(())
    })?;
    let frac = scan.non_special_fraction;
    let special = frac == 0.0;
    let non_special = frac >= d.min_fraction;
    let verdict = match d.expect {
        Expectation::Either => special || non_special,
        Expectation::Special => special,
        Expectation::NonSpecial => non_special,
    };
    let label = if special {
        "special"
    } else if non_special {
        "non-special"
    } else {
        "inconclusive"
    };
    let results = json!({
        "points": scan.points.len(),
        "non_special_fraction": frac,
        "threshold": d.threshold,
        "min_fraction": d.min_fraction,
        "min_dispersion": scan.points.iter().map(|p| p.dispersion).fold(f64::INFINITY, f64::min),
        "max_dispersion": scan.points.iter().map(|p| p.dispersion).fold(0.0, f64::max),
    });
    Ok((Some(verdict), Some(label.to_string()), results))
}

fn decay<const N: usize>(f: &SmoothEndo<N>, cfg: &ExperimentConfig, seed: u64, out: &RunOutput) -> Result<Step, CliError> {
    let d = &cfg.angle_decay;
    let stable = f.base().splitting().stable_basis[0];
    // (point, kind, angles); kind 0 pairs two census directions, kind 1 pairs
    // the first one with a copy tilted towards E^s_A by PROBE_TILT
    let mut series = Vec::new();
    for i in 0..d.points {
        let x = random_point::<N>(seed, i);
        let c = census(f, &x, CensusMode::Sampled { count: d.samples, depth: d.depth, seed: seed.wrapping_add(i as u64 + 1) }, 0.0)?;
        let dirs: Vec<_> = c.directions().copied().collect();
        for a in 0..dirs.len() {
            for b in a + 1..dirs.len() {
                if dirs[a].angle(&dirs[b]) > d.distinct {
                    series.push((i, 0, angle_decay(f, &x, &dirs[a], &dirs[b], d.steps)));
                }
            }
        }
        let v = dirs[0].vector();
        let tilted = Direction::new(std::array::from_fn(|k| v[k] + PROBE_TILT * stable[k]));
        series.push((i, 1, angle_decay(f, &x, &dirs[0], &tilted, d.steps)));
    }
    let worst_final = series.iter().map(|(_, _, s)| s[d.steps]).fold(0.0, f64::max);
    let non_monotone = series
        .iter()
        .filter(|(_, _, s)| s[d.burn_in.min(d.steps)..].windows(2).any(|w| w[1] > w[0]))
        .count();
    let tail_median = |kind: u8| {
        let mut t: Vec<f64> = series
            .iter()
            .filter(|(_, k, s)| *k == kind && d.steps >= 1 && s[d.steps - 1] > 0.0)
            .map(|(_, _, s)| s[d.steps] / s[d.steps - 1])
            .collect();
        t.sort_by(f64::total_cmp);
        (!t.is_empty()).then(|| stats::percentile_sorted(&t, 50.0))
    };
    out.csv("angles.csv", |w| {
        writeln!(w, "pair,point,kind,step,angle")?;
        for (p, (i, kind, s)) in series.iter().enumerate() {
            let kind = if *kind == 0 { "census" } else { "probe" };
            for (j, a) in s.iter().enumerate() {
                writeln!(w, "{p},{i},{kind},{j},{a}")?;
            }
        }
        Ok(())
    })?;
    let verdict = worst_final < d.target && non_monotone == 0;
    let results = json!({
        "census_pairs": series.iter().filter(|(_, k, _)| *k == 0).count(),
        "probe_pairs": series.iter().filter(|(_, k, _)| *k == 1).count(),
        "worst_final_angle": worst_final,
        "target": d.target,
        "non_monotone_pairs": non_monotone,
        "census_tail_ratio": tail_median(0),
        "probe_tail_ratio": tail_median(1),
        "linear_ratio": f.base().stable_eigenvalue().zip(f.base().unstable_eigenvalue()).map(|(s, u)| (s / u).abs()),
    });
    Ok((Some(verdict), None, results))
}

fn lyapunov<const N: usize>(f: &SmoothEndo<N>, cfg: &ExperimentConfig, seed: u64, out: &RunOutput) -> Result<Step, CliError> {
    let l = &cfg.lyapunov_census;
    if !(0.0..=100.0).contains(&l.percentile) {
        return Err(CliError::Usage("lyapunov_census.percentile must lie in [0, 100]".into()));
    }
    let c = exponent_census(f, l.points, l.steps, l.depth, l.burn_in, seed, l.slack)?;
    out.csv("estimates.csv", |w| c.write_csv(w))?;
    let mut sorted: Vec<f64> = c.estimates.iter().map(|e| e.value).collect();
    sorted.sort_by(f64::total_cmp);
    let checked = stats::percentile_sorted(&sorted, l.percentile);
    let percentiles: serde_json::Map<String, Value> =
        c.percentiles.iter().map(|(q, v)| (format!("p{q}"), json!(v))).collect();
    let results = json!({
        "lambda_u_linear": c.lambda_a,
        "slack": c.slack,
        "checked_percentile": l.percentile,
        "checked_value": checked,
        "min": c.min,
        "max": c.max,
        "mean": c.mean,
        "std_err": c.std_err,
        "mean_margin_in_std_err": if c.std_err > 0.0 { (c.lambda_a - c.mean) / c.std_err } else { 0.0 },
        "percentiles": percentiles,
        "exceed_fraction": c.exceed_fraction,
    });
    Ok((Some(checked <= c.lambda_a + c.slack), None, results))
}

fn quasi_iso<const N: usize>(f: &SmoothEndo<N>, cfg: &ExperimentConfig, seed: u64, out: &RunOutput) -> Result<Step, CliError> {
    let q = &cfg.quasi_iso;
    let start = CoverPoint(point_from::<N>(&q.start, "quasi_iso.start")?);
    let seg = trace_leaf(f, &start, q.arclength, q.step, q.depth)?;
    let fit = quasi_isometry_fit(&seg)?;
    let e_u = f.base().e_u()?;
    let asym = asymptotic_direction_check(&seg, &e_u, &q.floors);
    let ratios: Vec<Option<f64>> = q.floors.iter().map(|&fl| max_ratio_at(&seg, fl)).collect();
    let lp = leaf_pairs(&seg, q.min_separation, q.max_separation);
    let leaf_growth = growth_ratio_check(f, &lp, q.k);
    let rp = random_pairs::<N>(q.random_pairs, q.min_separation, q.max_separation, seed);
    let random_growth = growth_ratio_check(f, &rp, q.k);
    let aligned = leaf_pairs(&seg, q.min_separation, f64::INFINITY);
    let sandwich_min = aligned
        .iter()
        .map(|(x, y)| {
            let r = linear_sandwich_check(f.base(), x, y, q.sandwich_steps, q.sandwich_eps);
            r.lower_margin.min(r.upper_margin)
        })
        .fold(f64::INFINITY, f64::min);
    let direction_angle = asymptotic_direction_check(&seg, &e_u, &[q.direction_floor]).rows[0];

    out.csv("leaf.csv", |w| seg.write_csv(w))?;
    out.csv("floors.csv", |w| {
        writeln!(w, "floor,max_angle,pairs,max_ratio")?;
        for (row, r) in asym.rows.iter().zip(&ratios) {
            let r = r.map(|v| v.to_string()).unwrap_or_default();
            writeln!(w, "{},{},{},{}", row.floor, row.max_angle, row.pairs, r)?;
        }
        Ok(())
    })?;
    out.csv("growth.csv", |w| {
        writeln!(w, "pair,separation,ratio")?;
        for (i, ((x, y), r)) in rp.iter().zip(&random_growth.ratios).enumerate() {
            let s = x.coords().iter().zip(y.coords()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            writeln!(w, "{i},{s},{r}")?;
        }
        Ok(())
    })?;

    // the verdict uses same-leaf pairs; random pairs whose separation is
    // nearly stable need a much larger floor and are reported only
    let growth_ok = !lp.is_empty() && leaf_growth.within(q.growth_bound);
    let random_outside = random_growth
        .ratios
        .iter()
        .filter(|&&r| !(r >= 1.0 / q.growth_bound && r <= q.growth_bound))
        .count();
    let direction_ok = direction_angle.pairs > 0 && direction_angle.max_angle < q.direction_tolerance;
    let sandwich_ok = !aligned.is_empty() && sandwich_min > 0.0;
    let results = json!({
        "q_fit": fit.q_fit,
        "b_fit": fit.b_fit,
        "max_ratio": fit.max_ratio,
        "min_excess": fit.min_excess,
        "pairs": fit.pairs,
        "floors": q.floors,
        "max_ratio_by_floor": ratios,
        "max_angle_by_floor": asym.rows.iter().map(|r| r.max_angle).collect::<Vec<_>>(),
        "angle_fit_c": asym.c_fit,
        "direction_floor": q.direction_floor,
        "direction_max_angle": direction_angle.max_angle,
        "growth": {
            "k": q.k,
            "bound": q.growth_bound,
            "leaf_pairs": lp.len(),
            "leaf_min": leaf_growth.min,
            "leaf_max": leaf_growth.max,
            "random_pairs": rp.len(),
            "random_min": random_growth.min,
            "random_max": random_growth.max,
            "random_outside": random_outside,
        },
        "sandwich": {
            "eps": q.sandwich_eps,
            "steps": q.sandwich_steps,
            "aligned_pairs": aligned.len(),
            "min_margin": sandwich_min,
        },
        "checks": { "growth": growth_ok, "direction": direction_ok, "sandwich": sandwich_ok },
    });
    Ok((Some(growth_ok && direction_ok && sandwich_ok), None, results))
}

fn observables<const N: usize>(cfg: &ExperimentConfig) -> Result<Vec<Observable<N>>, CliError> {
    let list = &cfg.ergodic_test.observables;
    if list.is_empty() {
        if N == 2 {
            return Ok(standard_observables()
                .into_iter()
                .map(|o| match o {
                    Observable::Cos(k) => Observable::Cos(std::array::from_fn(|i| k[i])),
                    Observable::Sin(k) => Observable::Sin(std::array::from_fn(|i| k[i])),
                    Observable::Constant(c) => Observable::Constant(c),
                })
                .collect());
        }
        return Ok((0..N).map(|i| Observable::Cos(std::array::from_fn(|j| (i == j) as i64))).collect());
    }
    list.iter()
        .map(|o| match o.kind {
            ObservableKind::Constant => Ok(Observable::Constant(o.value)),
            ObservableKind::Cos | ObservableKind::Sin => {
                let k = <[i64; N]>::try_from(o.k.as_slice())
                    .map_err(|_| CliError::Usage(format!("ergodic_test.observable.k needs {N} entries")))?;
                Ok(if o.kind == ObservableKind::Cos { Observable::Cos(k) } else { Observable::Sin(k) })
            }
        })
        .collect()
}

fn ergodic<const N: usize>(f: &SmoothEndo<N>, cfg: &ExperimentConfig, seed: u64, out: &RunOutput) -> Result<Step, CliError> {
    let e = &cfg.ergodic_test;
    let obs = observables::<N>(cfg)?;
    let ec = ErgodicityConfig {
        starts: e.starts,
        steps: e.steps,
        seed,
        mean_tolerance: e.mean_tolerance,
        std_tolerance: e.std_tolerance,
        scaling_steps: e.scaling_steps.clone(),
        slope_tolerance: e.slope_tolerance,
    };
    let r = ergodicity_test(f, &obs, &ec)?;
    out.csv("averages.csv", |w| r.write_csv(w))?;
    out.csv("scaling.csv", |w| {
        writeln!(w, "observable,steps,std")?;
        for o in &r.observables {
            for (n, s) in &o.std_by_steps {
                writeln!(w, "{},{},{}", o.label, n, s)?;
            }
        }
        Ok(())
    })?;
    let per: Vec<Value> = r
        .observables
        .iter()
        .map(|o| {
            json!({
                "observable": o.label,
                "exact_mean": o.exact_mean,
                "sample_mean": o.sample_mean,
                "sample_std": o.sample_std,
                "slope": o.slope,
                "pass": o.pass,
            })
        })
        .collect();
    let results = json!({
        "starts": e.starts,
        "steps": e.steps,
        "observables": per,
        "means_pass": r.pass,
        "scaling_pass": r.scaling_pass,
    });
    Ok((Some(r.pass && r.scaling_pass), None, results))
}
