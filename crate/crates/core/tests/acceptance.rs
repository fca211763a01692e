//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p mcband --test acceptance`.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use mcband::rng::Stream;
use mcband::{
    band_curve, band_slope, boxplot_summary, mean_sd, ols_fit, quantile, quartile_band, run_study,
    tree_fit, BandCurve, Dataset, ForestConfig, ModelSpec, StudyConfig, StudyOutput, TreeConfig,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn column_at(curve: &BandCurve, x: f64) -> usize {
    curve
        .grid
        .position(x, 1e-9)
        .unwrap_or_else(|| panic!("grid has no point at {x}"))
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

fn forest_config(n_trees: usize, replications: usize) -> StudyConfig {
    StudyConfig {
        model: ModelSpec::Forest(ForestConfig {
            n_trees,
            ..Default::default()
        }),
        replications,
        ..Default::default()
    }
}

struct Studies {
    linear: StudyOutput,
    linear_time: Duration,
    forest: Option<(StudyOutput, Duration)>,
}

fn slope_distribution(s: &Studies) -> Outcome {
    let slopes = &s.linear.coefficients.slopes;
    let (mean, sd) = mean_sd(slopes).unwrap();
    let inside = slopes
        .iter()
        .filter(|b| (*b - mean).abs() <= 1.96 * sd)
        .count() as f64
        / slopes.len() as f64;
    let secs = s.linear_time.as_secs_f64();
    let pass = (0.99..=1.01).contains(&mean)
        && (0.055..=0.085).contains(&sd)
        && (0.93..=0.97).contains(&inside)
        && secs < 5.0;
    outcome(
        pass,
        format!("mean {mean:.4}, sd {sd:.4}, within 1.96 sd {inside:.3}, {secs:.2}s"),
    )
}

fn band_widens_at_edges(curve: &BandCurve) -> Outcome {
    let sd = |x| curve.sds[column_at(curve, x)];
    let (lo, mid, hi) = (sd(150.0), sd(175.0), sd(200.0));
    let (r_lo, r_hi) = (lo / mid, hi / mid);
    let pass = lo > mid && hi > mid && (1.6..=2.4).contains(&r_lo) && (1.6..=2.4).contains(&r_hi);
    outcome(
        pass,
        format!("sd 150/175/200 = {lo:.3}/{mid:.3}/{hi:.3}, ratios {r_lo:.2}, {r_hi:.2}"),
    )
}

fn band_covers_true_line(curve: &BandCurve) -> Outcome {
    let gen = mcband::GenConfig::default();
    let median = curve.bands[column_at(curve, 175.0)].median;
    let misses: Vec<f64> = curve
        .grid
        .points()
        .iter()
        .zip(&curve.bands)
        .filter(|(x, b)| {
            let t = gen.true_response(**x);
            !(b.low <= t && t <= b.high)
        })
        .map(|(x, _)| *x)
        .collect();
    let pass = (74.5..=75.5).contains(&median) && misses.is_empty();
    outcome(
        pass,
        format!("median at 175 = {median:.3}, grid points outside band: {misses:?}"),
    )
}

fn quartile_identities() -> Outcome {
    let mut rng = Stream::new(0xACCE55);
    let mut identity_failures = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = 1 + rng.below(200) as usize;
        let v: Vec<f64> = (0..n).map(|_| rng.normal(0.0, 50.0)).collect();
        let b = quartile_band(&v).unwrap();
        let exact = b.iqr == b.q3 - b.q1
            && b.low == b.q1 - 1.5 * b.iqr
            && b.high == b.q3 + 1.5 * b.iqr
            && b.q1 <= b.median
            && b.median <= b.q3;
        if !exact {
            identity_failures += 1;
        }
        for (p, got) in [(0.25, b.q1), (0.5, b.median), (0.75, b.q3)] {
            worst = worst.max((got - common::oracle_quantile(&v, p)).abs());
        }
        let p = rng.uniform();
        worst = worst.max((quantile(&v, p).unwrap() - common::oracle_quantile(&v, p)).abs());
    }
    outcome(
        identity_failures == 0 && worst <= 1e-12,
        format!("identity failures {identity_failures}, max quantile error {worst:e}"),
    )
}

/// Not part of the criterion; printed as context next to the median slope.
fn mean_curve_slope(curve: &BandCurve) -> f64 {
    ols_fit(&Dataset::new(curve.grid.points().to_vec(), curve.means.clone()).unwrap())
        .unwrap()
        .b
}

fn forest_flattens(s: &Studies) -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    match &s.forest {
        Some((out, elapsed)) => {
            let curve = band_curve(&out.matrix).unwrap();
            let slope = band_slope(&curve).unwrap();
            let secs = elapsed.as_secs_f64();
            pass &= (0.7..1.0).contains(&slope) && secs < 600.0;
            details.push(format!(
                "full: slope {slope:.4} (mean curve {:.4}) in {secs:.1}s",
                mean_curve_slope(&curve)
            ));
        }
        None => {
            pass = false;
            details.push("full study failed".into());
        }
    }
    let (ci, elapsed) = timed(|| run_study(&forest_config(25, 100)));
    match ci {
        Ok(out) => {
            let slope = band_slope(&band_curve(&out.matrix).unwrap()).unwrap();
            let secs = elapsed.as_secs_f64();
            pass &= (0.7..1.0).contains(&slope) && secs < 30.0;
            details.push(format!("ci profile: slope {slope:.4} in {secs:.1}s"));
        }
        Err(e) => {
            pass = false;
            details.push(format!("ci profile failed: {e}"));
        }
    }
    outcome(pass, details.join("; "))
}

fn forest_edge_outliers(s: &Studies) -> Outcome {
    let Some((out, _)) = &s.forest else {
        return outcome(false, "full forest study failed");
    };
    let grid = out.matrix.grid();
    let count = |x| {
        let j = grid.position(x, 1e-9).unwrap();
        boxplot_summary(&out.matrix.column(j))
            .unwrap()
            .outliers
            .len()
    };
    let (lo, hi) = (count(150.0), count(200.0));
    outcome(
        lo >= 1 && hi >= 1,
        format!("outliers at 150: {lo}, at 200: {hi}"),
    )
}

fn estimators_match_oracles() -> Outcome {
    let mut rng = Stream::new(0x0EAC1E);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let n = 3 + rng.below(100) as usize;
        let xs: Vec<f64> = (0..n).map(|_| rng.uniform_in(150.0, 200.0)).collect();
        let ys = xs
            .iter()
            .map(|x| x - 100.0 + rng.normal(0.0, 10.0))
            .collect();
        let data = Dataset::new(xs, ys).unwrap();
        let fit = ols_fit(&data).unwrap();
        let (a, b) = common::normal_equations(&data);
        worst = worst
            .max(((fit.a - a) / a).abs())
            .max(((fit.b - b) / b).abs());
    }
    let configs = [
        TreeConfig {
            max_depth: None,
            min_samples_leaf: 1,
            min_samples_split: 2,
        },
        TreeConfig::default(),
    ];
    let (mut trees, mut mismatches) = (0, 0);
    for n in 1..=30usize {
        for trial in 0..4 {
            let xs: Vec<f64> = (0..n)
                .map(|_| {
                    if trial % 2 == 0 {
                        rng.below(10) as f64
                    } else {
                        rng.uniform_in(150.0, 200.0)
                    }
                })
                .collect();
            let ys: Vec<f64> = xs.iter().map(|x| x + rng.normal(0.0, 10.0)).collect();
            let data = Dataset::new(xs.clone(), ys).unwrap();
            let rows: Vec<(f64, f64)> = data.iter().collect();
            for cfg in configs.iter().filter(|c| n >= c.min_samples_leaf) {
                let tree = tree_fit(&data, cfg).unwrap();
                let reference = common::ref_grow(&rows, cfg, 0);
                let mut expected = Vec::new();
                common::ref_thresholds(&reference, &mut expected);
                let same_preds = xs.iter().all(|&x| {
                    let q = common::ref_predict(&reference, x);
                    (tree.predict_one(x) - q).abs() <= 1e-9 * q.abs().max(1.0)
                });
                if common::thresholds(&tree) != expected || !same_preds {
                    mismatches += 1;
                }
                trees += 1;
            }
        }
    }
    outcome(
        worst <= 1e-10 && mismatches == 0,
        format!("OLS max relative error {worst:e}; trees {mismatches}/{trees} mismatched"),
    )
}

fn run_cli_study(dir: &Path, extra: &[&str]) -> Result<Vec<(String, Vec<u8>)>, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_mcband"))
        .arg("study")
        .args(extra)
        .arg("--emit-matrix")
        .arg("--output")
        .arg(dir)
        .output()
        .map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(String::from_utf8_lossy(&status.stderr).into_owned());
    }
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    Ok(files)
}

fn study_is_reproducible() -> Outcome {
    let profiles: [&[&str]; 2] = [
        &["--seed", "42"],
        &[
            "--seed",
            "7",
            "--model",
            "forest",
            "--trees",
            "10",
            "--replications",
            "50",
        ],
    ];
    let threads = std::thread::available_parallelism()
        .map(|n| n.get().max(2))
        .unwrap_or(2)
        .to_string();
    let mut details = Vec::new();
    let mut pass = true;
    for (i, flags) in profiles.iter().enumerate() {
        let runs: Result<Vec<_>, _> = [None, None, Some("1"), Some(threads.as_str())]
            .into_iter()
            .map(|t| {
                let dir = tempfile::tempdir().unwrap();
                let mut args = flags.to_vec();
                if let Some(t) = t {
                    args.extend(["--threads", t]);
                }
                run_cli_study(dir.path(), &args)
            })
            .collect();
        match runs {
            Ok(r) => {
                let again = r[0] == r[1];
                let threaded = r[2] == r[3] && r[0] == r[2];
                pass &= again && threaded && r[0].len() >= 2;
                details.push(format!(
                    "profile {}: {} files, rerun identical {again}, 1 vs {threads} threads identical {threaded}",
                    i + 1,
                    r[0].len()
                ));
            }
            Err(e) => {
                pass = false;
                details.push(format!("profile {} failed: {}", i + 1, e.trim()));
            }
        }
    }
    outcome(pass, details.join("; "))
}

fn normal_fences() -> Outcome {
    let mut rng = Stream::new(20240601);
    let v: Vec<f64> = (0..100_000).map(|_| rng.standard_normal()).collect();
    let b = quartile_band(&v).unwrap();
    let inside = v.iter().filter(|x| b.contains(**x)).count() as f64 / v.len() as f64;
    let pass = (b.low + 2.70).abs() <= 0.1
        && (b.high - 2.70).abs() <= 0.1
        && (0.985..=0.997).contains(&inside);
    outcome(
        pass,
        format!(
            "fences [{:.4}, {:.4}], contained {inside:.4}",
            b.low, b.high
        ),
    )
}

fn main() {
    let (linear, linear_time) = timed(|| run_study(&StudyConfig::default()));
    let linear = linear.expect("default linear study");
    let linear_curve = band_curve(&linear.matrix).unwrap();
    let (forest, forest_time) = timed(|| run_study(&forest_config(100, 1000)));
    let studies = Studies {
        linear,
        linear_time,
        forest: forest.ok().map(|f| (f, forest_time)),
    };

    let results = [
        ("linear slope distribution", slope_distribution(&studies)),
        (
            "linear band widens toward the edges",
            band_widens_at_edges(&linear_curve),
        ),
        (
            "linear band centred on the true line",
            band_covers_true_line(&linear_curve),
        ),
        (
            "quartile band identities and quantile oracle",
            quartile_identities(),
        ),
        ("forest band flattens", forest_flattens(&studies)),
        (
            "forest edge columns have outliers",
            forest_edge_outliers(&studies),
        ),
        ("estimators agree with oracles", estimators_match_oracles()),
        ("study output is byte-reproducible", study_is_reproducible()),
        ("fences on standard normal draws", normal_fences()),
    ];

    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} [{}] {name}: {}", i + 1, o.detail);
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
