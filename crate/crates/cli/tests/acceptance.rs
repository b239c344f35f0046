//! Acceptance suite. Prints one line per criterion and exits non-zero if any
//! criterion fails or overruns its time budget.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use anosov_core::directions::{
    dichotomy_scan, fit_locality_rate, locality_profile, monotonicity_check, unstable_direction, CLUSTER_TOLERANCE,
};
use anosov_core::ergodic::{ergodicity_test, standard_observables, ErgodicityConfig};
use anosov_core::foliation::{
    asymptotic_direction_check, growth_ratio_check, leaf_pairs, linear_sandwich_check, random_pairs, trace_leaf,
};
use anosov_core::linear::preimages_linear;
use anosov_core::lyapunov::{exponent_census, stable_lyapunov, BURN_IN};
use anosov_core::prehistory::{random_prehistory, random_prehistory_with};
use anosov_core::torus::{prehistory_metric, torus_diameter, torus_distance};
use anosov_core::{analyze, census, CensusMode, CoverPoint, ShearMap, SmoothEndo, TorusPoint};
use anosov_lab::commands::build_endo;
use anosov_lab::config::ExperimentConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;

fn sheared(eps: f64) -> SmoothEndo<2> {
    let base = analyze([[3, 1], [1, 1]]).unwrap();
    if eps == 0.0 {
        SmoothEndo::linear(base)
    } else {
        SmoothEndo::new(base, vec![ShearMap::new(0, 1, eps, 1, 0.0)]).unwrap()
    }
}

fn lambda_a() -> f64 {
    (2.0 + 2f64.sqrt()).ln()
}

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn random_points<const N: usize>(count: usize, seed: u64) -> Vec<TorusPoint<N>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| TorusPoint::new(std::array::from_fn(|_| rng.random()))).collect()
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn run_lab(sub: &str, config: &Path, out: &Path) -> Result<(i32, Value), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_anosov-lab"))
        .arg(sub)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    let code = o.status.code().unwrap_or(-1);
    let text = std::fs::read_to_string(out.join("summary.json"))
        .map_err(|e| format!("{sub}: no summary ({e}); stderr: {}", String::from_utf8_lossy(&o.stderr)))?;
    Ok((code, serde_json::from_str(&text).map_err(|e| e.to_string())?))
}

fn linear_oracles() -> Outcome {
    let f = sheared(0.0);
    let a = f.base();
    let mut eig: Vec<f64> = a.eigenvalues().iter().map(|z| z.re).collect();
    eig.sort_by(f64::total_cmp);
    check(a.eigenvalues().iter().all(|z| z.im.abs() < 1e-14), "complex eigenvalue")?;
    check((eig[0] - (2.0 - 2f64.sqrt())).abs() < 1e-12 && (eig[1] - (2.0 + 2f64.sqrt())).abs() < 1e-12, format!("eigenvalues {eig:?}"))?;
    check(f.degree() == 2, "degree")?;
    check((a.lambda_u() - 1.2279471773).abs() < 1e-10 && (a.lambda_u() - lambda_a()).abs() < 1e-14, "lambda_u")?;

    let mut max_disp = 0.0f64;
    for (i, x) in random_points::<2>(50, 101).iter().enumerate() {
        let c = census(&f, x, CensusMode::Sampled { count: 200, depth: 40, seed: i as u64 }, CLUSTER_TOLERANCE).map_err(|e| e.to_string())?;
        check(c.entries.len() == 200, "census size")?;
        max_disp = max_disp.max(c.dispersion);
    }
    check(max_disp < 1e-9, format!("dispersion {max_disp:e}"))?;

    let c = exponent_census(&f, 100, 2_000, 40, BURN_IN, 5, 0.01).map_err(|e| e.to_string())?;
    let worst_u = c.estimates.iter().map(|e| (e.value - lambda_a()).abs()).fold(0.0, f64::max);
    check(worst_u < 1e-12, format!("unstable exponent off by {worst_u:e}"))?;
    let mut worst_s = 0.0f64;
    for x in random_points::<2>(20, 102) {
        let e = stable_lyapunov(&f, &x, 2_000, BURN_IN).map_err(|e| e.to_string())?;
        worst_s = worst_s.max((e.value - (2.0 - 2f64.sqrt()).ln()).abs());
    }
    check(worst_s < 1e-12, format!("stable exponent off by {worst_s:e}"))?;

    let p = CoverPoint([0.3, 0.6]);
    let seg = trace_leaf(&f, &p, 50.0, 0.01, 30).map_err(|e| e.to_string())?;
    let u = *a.e_u().map_err(|e| e.to_string())?.vector();
    let off_line = seg
        .samples
        .iter()
        .map(|q| {
            let d = [q.0[0] - p.0[0], q.0[1] - p.0[1]];
            (d[0] * u[1] - d[1] * u[0]).abs()
        })
        .fold(0.0, f64::max);
    check(off_line < 1e-10, format!("leaf bends by {off_line:e}"))?;

    let mut pairs = random_pairs::<2>(2_000, 10.0, 50.0, 7);
    pairs.extend(leaf_pairs(&seg, 10.0, 50.0).into_iter().step_by(100));
    let g = growth_ratio_check(&f, &pairs, 5);
    check(g.max_deviation < 1e-12, format!("growth ratio deviation {:e}", g.max_deviation))?;
    Ok(format!(
        "dispersion {max_disp:.1e}, exponent error {:.1e}, leaf deviation {off_line:.1e}, growth deviation {:.1e} over {} pairs",
        worst_u.max(worst_s),
        g.max_deviation,
        pairs.len()
    ))
}

fn covering() -> Outcome {
    let mut worst = 0.0f64;
    let mut closest = f64::INFINITY;
    for eps in [0.0, 0.02, 0.05] {
        let f = sheared(eps);
        for x in random_points::<2>(1_000, 200) {
            let pre = f.preimages(&x).map_err(|e| e.to_string())?;
            check(pre.len() == 2, format!("eps {eps}: {} preimages", pre.len()))?;
            for y in &pre {
                worst = worst.max(torus_distance(&f.apply(y), &x));
            }
            closest = closest.min(torus_distance(&pre[0], &pre[1]));
            if eps == 0.0 {
                // independent closed-form preimages of the linear map
                let exact = preimages_linear(f.base(), &x);
                for y in &pre {
                    let d = exact.iter().map(|z| torus_distance(y, z)).fold(f64::INFINITY, f64::min);
                    check(d < 1e-12, format!("linear preimage off by {d:e}"))?;
                }
            }
        }
    }
    check(worst < 1e-10, format!("forward residual {worst:e}"))?;
    check(closest > 0.1, format!("preimages coincide ({closest:e})"))?;
    Ok(format!("3000 targets, forward residual {worst:.1e}, preimage separation >= {closest:.3}"))
}

fn leibniz_det(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    if n == 1 {
        return m[0][0];
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<f64>> = m[1..]
                .iter()
                .map(|r| r.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, v)| *v).collect())
                .collect();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * m[0][j] * leibniz_det(&minor)
        })
        .sum()
}

fn jacobian_spread<const N: usize>(cfg: &ExperimentConfig) -> Result<(f64, f64), String> {
    let f = build_endo::<N>(cfg).map_err(|e| e.to_string())?;
    let target = f.base().det().unsigned_abs() as f64;
    let mut worst = 0.0f64;
    for x in random_points::<N>(10_000, 300) {
        let j = f.derivative(&x);
        let rows: Vec<Vec<f64>> = j.iter().map(|r| r.to_vec()).collect();
        worst = worst.max((leibniz_det(&rows).abs() - target).abs());
    }
    Ok((target, worst))
}

fn conservativity() -> Outcome {
    let mut names = Vec::new();
    let mut entries: Vec<_> = std::fs::read_dir(configs_dir()).map_err(|e| e.to_string())?.map(|e| e.unwrap().path()).collect();
    entries.sort();
    let mut worst = 0.0f64;
    for path in entries.iter().filter(|p| p.extension().is_some_and(|e| e == "toml")) {
        let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        let cfg = ExperimentConfig::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let (target, w) = match cfg.dimension() {
            2 => jacobian_spread::<2>(&cfg)?,
            3 => jacobian_spread::<3>(&cfg)?,
            n => return Err(format!("{}: dimension {n}", path.display())),
        };
        let name = path.file_stem().unwrap().to_string_lossy().into_owned();
        check(target == 2.0, format!("{name}: |det A| = {target}"))?;
        check(w < 1e-12, format!("{name}: |det Df| off by {w:e}"))?;
        worst = worst.max(w);
        names.push(name);
    }
    check(names.len() >= 5, "too few shipped configs")?;
    Ok(format!("{} configs ({}), max ||det Df| - 2| = {worst:.1e}", names.len(), names.join(", ")))
}

fn cone_certificate() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = configs_dir().join("shear_002.toml");
    let text = std::fs::read_to_string(&cfg).unwrap();
    check(text.contains("amplitude = 0.02"), "shear_002.toml no longer has eps 0.02")?;
    let (code, s) = run_lab("verify-anosov", &cfg, dir.path())?;
    let c = &s["results"]["certificate"];
    check(code == 0 && s["verdict"] == "pass", format!("verdict {} (exit {code})", s["verdict"]))?;
    check(c["cone_halfangle_u"] == 0.3 && c["cone_halfangle_s"] == 0.3, "half-angles")?;
    check(c["grid_resolution"] == 256 && c["points_checked"] == 65536, "grid")?;
    let up = c["expansion_bound"].as_f64().unwrap_or(0.0);
    let down = c["contraction_bound"].as_f64().unwrap_or(f64::INFINITY);
    check(up > 1.0 && down < 1.0, format!("bounds {up} / {down}"))?;
    Ok(format!("256^2 grid, min unstable expansion {up:.4}, max stable contraction {down:.4}"))
}

fn semi_rigidity() -> Outcome {
    let c = exponent_census(&sheared(0.02), 500, 20_000, 40, BURN_IN, 1, 0.01).map_err(|e| e.to_string())?;
    let p99 = c.percentile(99.0).ok_or("no percentile")?;
    let margin = (c.lambda_a - c.mean) / c.std_err;
    check((c.lambda_a - lambda_a()).abs() < 1e-14, "lambda_A")?;
    check(p99 <= c.lambda_a + 0.01, format!("p99 {p99} > {}", c.lambda_a + 0.01))?;
    Ok(format!(
        "p99 {p99:.6} <= {:.6}; mean {:.6} is {margin:.1} standard errors below lambda_A (reported)",
        c.lambda_a + 0.01,
        c.mean
    ))
}

fn dichotomy() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut fractions = Vec::new();
    for (name, want_special) in [("cat_map", true), ("shear_010", false)] {
        let (code, s) = run_lab("dichotomy-scan", &configs_dir().join(format!("{name}.toml")), &dir.path().join(name))?;
        let p = &s["parameters"]["experiment"];
        check(
            p["points"] == 100 && p["depth"] == 40 && p["samples"] == 200 && p["threshold"] == 1e-3 && p["min_fraction"] == 0.9,
            format!("{name}: scan parameters changed: {p}"),
        )?;
        let frac = s["results"]["non_special_fraction"].as_f64().ok_or("missing fraction")?;
        if want_special {
            check(frac == 0.0, format!("linear model fraction {frac}"))?;
        } else {
            check(frac >= 0.9, format!("eps 0.1 fraction {frac}"))?;
        }
        check(code == 0, format!("{name}: exit {code}"))?;
        fractions.push(frac);
    }
    Ok(format!("non-special fraction: linear {}, eps 0.1 {}", fractions[0], fractions[1]))
}

fn angle_decay_check() -> Outcome {
    use anosov_core::directions::angle_decay;
    let f = sheared(0.05);
    let mut pairs = 0;
    let mut worst = 0.0f64;
    for (i, x) in random_points::<2>(20, 400).iter().enumerate() {
        let c = census(&f, x, CensusMode::Sampled { count: 20, depth: 40, seed: i as u64 }, CLUSTER_TOLERANCE).map_err(|e| e.to_string())?;
        let d: Vec<_> = c.directions().copied().collect();
        for a in 0..d.len() {
            for b in a + 1..d.len() {
                if d[a].angle(&d[b]) < 1e-12 {
                    continue;
                }
                pairs += 1;
                let s = angle_decay(&f, x, &d[a], &d[b], 15);
                worst = worst.max(s[15]);
                check(s[15] < 1e-8, format!("angle {:e} at step 15", s[15]))?;
                check(s[3..].windows(2).all(|w| w[1] <= w[0]), format!("angle increased after step 3: {s:?}"))?;
            }
        }
    }
    check(pairs >= 100, format!("only {pairs} distinct pairs"))?;

    let a = sheared(0.0);
    let ratio = 3.0 - 2.0 * 2f64.sqrt();
    let e_u = a.base().e_u().map_err(|e| e.to_string())?;
    let e_s = a.base().e_s().map_err(|e| e.to_string())?;
    let mut worst_ratio = 0.0f64;
    for x in random_points::<2>(10, 401) {
        let v = e_u.vector();
        let tilted = anosov_core::Direction::new([v[0] + 1e-3 * e_s.vector()[0], v[1] + 1e-3 * e_s.vector()[1]]);
        let s = angle_decay(&a, &x, &e_u, &tilted, 15);
        for w in s.windows(2) {
            worst_ratio = worst_ratio.max((w[1] / w[0] - ratio).abs());
        }
    }
    check(worst_ratio < 1e-6, format!("linear decay ratio off by {worst_ratio:e}"))?;
    Ok(format!("{pairs} pairs, worst angle at step 15 {worst:.1e}; linear ratio within {worst_ratio:.1e} of {ratio:.5}"))
}

fn cover_geometry() -> Outcome {
    let f = sheared(0.02);
    let start = CoverPoint([0.3, 0.6]);
    let seg = trace_leaf(&f, &start, 50.0, 0.01, 30).map_err(|e| e.to_string())?;
    let lp = leaf_pairs(&seg, 10.0, 50.0);
    let g = growth_ratio_check(&f, &lp, 5);
    check(!lp.is_empty() && g.within(1.2), format!("leaf growth ratios in [{}, {}]", g.min, g.max))?;
    let rp = random_pairs::<2>(2_000, 10.0, 50.0, 1);
    let gr = growth_ratio_check(&f, &rp, 5);
    let outside = gr.ratios.iter().filter(|&&r| !(r >= 1.0 / 1.2 && r <= 1.2)).count();

    let e_u = f.base().e_u().map_err(|e| e.to_string())?;
    let row = asymptotic_direction_check(&seg, &e_u, &[20.0]).rows[0];
    check(row.pairs > 0 && row.max_angle < 0.05, format!("chord angle {} at separation 20", row.max_angle))?;

    let mut min_margin = f64::INFINITY;
    let mut aligned = 0;
    for eps in [0.02, 0.05] {
        let h = sheared(eps);
        let s = if eps == 0.02 { seg.clone() } else { trace_leaf(&h, &start, 50.0, 0.01, 30).map_err(|e| e.to_string())? };
        for (x, y) in leaf_pairs(&s, 10.0, f64::INFINITY) {
            let r = linear_sandwich_check(h.base(), &x, &y, 5, 0.05);
            check(r.holds, format!("sandwich fails at ratio {}", r.ratio))?;
            min_margin = min_margin.min(r.lower_margin.min(r.upper_margin));
            aligned += 1;
        }
    }
    check(min_margin > 0.0, "sandwich margin")?;
    Ok(format!(
        "leaf growth ratios [{:.4}, {:.4}] over {} pairs; chord angle {:.1e} at >= 20; sandwich margin {min_margin:.4} over {aligned} pairs; random pairs (reported): [{:.3}, {:.3}], {outside} of {} outside",
        g.min,
        g.max,
        lp.len(),
        row.max_angle,
        gr.min,
        gr.max,
        rp.len()
    ))
}

fn ergodicity() -> Outcome {
    let mut notes = Vec::new();
    for eps in [0.0, 0.02] {
        let r = ergodicity_test(&sheared(eps), &standard_observables(), &ErgodicityConfig { seed: 3, ..Default::default() })
            .map_err(|e| e.to_string())?;
        check(r.config.starts == 100 && r.config.steps == 100_000, "config")?;
        for o in &r.observables {
            check((o.sample_mean - o.exact_mean).abs() < 0.01, format!("eps {eps} {}: mean {}", o.label, o.sample_mean))?;
            check(o.sample_std < 0.02, format!("eps {eps} {}: std {}", o.label, o.sample_std))?;
            let slope = o.slope.ok_or("no slope")?;
            check((slope + 0.5).abs() <= 0.15, format!("eps {eps} {}: slope {slope}", o.label))?;
        }
        check(r.pass && r.scaling_pass, format!("eps {eps}: report verdict"))?;
        let worst_mean = r.observables.iter().map(|o| o.sample_mean.abs()).fold(0.0, f64::max);
        let worst_std = r.observables.iter().map(|o| o.sample_std).fold(0.0, f64::max);
        notes.push(format!("eps {eps}: |mean| <= {worst_mean:.1e}, std <= {worst_std:.1e}"));
    }
    Ok(notes.join("; "))
}

fn structural() -> Outcome {
    // metric axioms
    let pts = random_points::<3>(300, 500);
    let diam = torus_diameter(3);
    for w in pts.windows(3) {
        let (x, y, z) = (&w[0], &w[1], &w[2]);
        let dxy = torus_distance(x, y);
        check(torus_distance(x, x) == 0.0, "d(x,x)")?;
        check(dxy == torus_distance(y, x), "symmetry")?;
        check(dxy <= torus_distance(x, z) + torus_distance(z, y) + 1e-15, "triangle")?;
        check(dxy <= diam + 1e-15, "diameter")?;
    }
    let f = sheared(0.05);
    let mut rng = ChaCha8Rng::seed_from_u64(501);
    let hist: Vec<_> = random_points::<2>(60, 502)
        .into_iter()
        .map(|x| random_prehistory_with(&f, x, 12, &mut rng).unwrap())
        .collect();
    for w in hist.windows(3) {
        let d = |a: &anosov_core::Prehistory<2>, b: &anosov_core::Prehistory<2>| prehistory_metric(a.points(), b.points()).unwrap();
        check(d(&w[0], &w[0]) == 0.0 && d(&w[0], &w[1]) == d(&w[1], &w[0]), "pre-history metric")?;
        check(d(&w[0], &w[1]) <= d(&w[0], &w[2]) + d(&w[2], &w[1]) + 1e-15, "pre-history triangle")?;
    }

    // equivariance: Df carries E^u(p) to E^u of the shifted pre-history
    let mut equi = 0.0f64;
    for (s, x) in random_points::<2>(50, 503).into_iter().enumerate() {
        let p = random_prehistory(&f, x, 41, s as u64).map_err(|e| e.to_string())?;
        let d = unstable_direction(&f, &p.truncate()).map_err(|e| e.to_string())?.direction;
        let pushed = d.transform(&f.derivative(p.base())).ok_or("degenerate push")?;
        let q = p.push_forward(&f).map_err(|e| e.to_string())?.truncate();
        let d2 = unstable_direction(&f, &q).map_err(|e| e.to_string())?.direction;
        equi = equi.max(pushed.angle(&d2));
    }
    check(equi < 1e-10, format!("equivariance {equi:e}"))?;

    // exponential locality in the pre-history
    let mut rho_max = 0.0f64;
    for (eps, x) in [(0.02, [0.3, 0.7]), (0.05, [0.61, 0.18]), (0.1, [0.45, 0.92])] {
        let prof = locality_profile(&sheared(eps), &TorusPoint::new(x), 40, 20, 20, 9).map_err(|e| e.to_string())?;
        let rho = fit_locality_rate(&prof, 1e-13).ok_or("no locality fit")?;
        check(rho <= 0.23, format!("eps {eps}: rho {rho}"))?;
        rho_max = rho_max.max(rho);
    }

    // push-forward membership along an orbit
    let mut member = 0.0f64;
    for eps in [0.02, 0.1] {
        let m = monotonicity_check(&sheared(eps), &TorusPoint::new([0.3, 0.7]), 5, 50, 40, 3, CLUSTER_TOLERANCE)
            .map_err(|e| e.to_string())?;
        check(m.rows.windows(2).all(|w| w[1].pushed == w[0].pushed + w[0].fresh), "pushed set lost directions")?;
        member = member.max(m.membership_residual);
    }
    check(member < 1e-10, format!("membership residual {member:e}"))?;

    // seed determinism
    let x = TorusPoint::new([0.2, 0.9]);
    let mode = CensusMode::Sampled { count: 40, depth: 40, seed: 77 };
    check(census(&f, &x, mode, CLUSTER_TOLERANCE) == census(&f, &x, mode, CLUSTER_TOLERANCE), "census")?;
    let e1 = exponent_census(&f, 16, 1_000, 40, BURN_IN, 4, 0.01).map_err(|e| e.to_string())?;
    let e2 = exponent_census(&f, 16, 1_000, 40, BURN_IN, 4, 0.01).map_err(|e| e.to_string())?;
    check(e1 == e2, "exponent census")?;
    check(dichotomy_scan(&f, 4, 30, 40, 8, 1e-4, 1e-3) == dichotomy_scan(&f, 4, 30, 40, 8, 1e-4, 1e-3), "dichotomy scan")?;
    let cfg = ErgodicityConfig { starts: 8, steps: 2_000, seed: 6, scaling_steps: vec![200, 2_000], ..Default::default() };
    let r1 = ergodicity_test(&f, &standard_observables(), &cfg).map_err(|e| e.to_string())?;
    let r2 = ergodicity_test(&f, &standard_observables(), &cfg).map_err(|e| e.to_string())?;
    check(r1 == r2, "ergodicity report")?;
    check(random_pairs::<2>(50, 10.0, 50.0, 3) == random_pairs::<2>(50, 10.0, 50.0, 3), "random pairs")?;
    Ok(format!(
        "metric axioms ok; equivariance {equi:.1e}; locality rho <= {rho_max:.3}; membership residual {member:.1e}; censuses seed-deterministic"
    ))
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, Option<u64>, fn() -> Outcome); 10] = [
        (1, "linear oracle suite", Some(10), linear_oracles),
        (2, "covering-map correctness", Some(5), covering),
        (3, "conservativity of shipped configs", None, conservativity),
        (4, "cone certification", Some(30), cone_certificate),
        (5, "semi-rigidity census", Some(120), semi_rigidity),
        (6, "dichotomy proxy", Some(120), dichotomy),
        (7, "angle decay", None, angle_decay_check),
        (8, "cover geometry", None, cover_geometry),
        (9, "ergodicity proxy", Some(120), ergodicity),
        (10, "structural invariants", None, structural),
    ];
    let mut failed = 0;
    for (n, name, budget, run) in criteria {
        let t = Instant::now();
        let outcome = run();
        let elapsed = t.elapsed();
        let over = budget.is_some_and(|b| elapsed > Duration::from_secs(b));
        let budget_note = budget.map(|b| format!(" / {b} s")).unwrap_or_default();
        match outcome {
            Ok(detail) if !over => println!("criterion {n}: PASS {name}: {detail} [{:.2} s{budget_note}]", elapsed.as_secs_f64()),
            Ok(detail) => {
                failed += 1;
                println!("criterion {n}: FAIL {name}: over time budget: {detail} [{:.2} s{budget_note}]", elapsed.as_secs_f64());
            }
            Err(why) => {
                failed += 1;
                println!("criterion {n}: FAIL {name}: {why} [{:.2} s{budget_note}]", elapsed.as_secs_f64());
            }
        }
    }
    if failed == 0 {
        println!("acceptance: all 10 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 10 criteria fail");
        ExitCode::FAILURE
    }
}
