//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so every line is printed even when
//! output capture would hide it. Exits nonzero if any criterion fails.

use std::f64::consts::{PI, TAU};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use orbit_census::counting::{
    block_means, certified_grid, check_apriori, compare_weighted, count_curves, fit_growth,
    theorem_ratio, CountingCurve, GrowthFit,
};
use orbit_census::dynamics::{billiard_map, birkhoff_coords, MapStep, PhasePoint};
use orbit_census::solver::{
    build_database, shadowing_family, shadowing_rate, solve_letters, solve_orbit, verify_orbit,
};
use orbit_census::spectral::{
    entropy_estimate, flat_trace, g_series, log_zeta_n, zeta_log_deriv, CutoffWindow,
    EntropyMethod, OrbitSet, OrbitTerm,
};
use orbit_census::symbolic::{enumerate_words, Alphabet, Letter};
use orbit_census::{BilliardTable, OrbitDatabase, SolveOptions, ZeroFilter};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

// ---------------------------------------------------------------- shared data

struct Built {
    table: BilliardTable,
    db: OrbitDatabase,
    seconds: f64,
}

fn build(table: BilliardTable, max_len: usize) -> Built {
    let start = Instant::now();
    let outcome = build_database(&table, max_len, ZeroFilter::Any, &SolveOptions::default(), None)
        .expect("database builds");
    assert!(
        outcome.failures.is_empty(),
        "{} words failed, first: {:?}",
        outcome.failures.len(),
        outcome.failures.first()
    );
    Built {
        table,
        db: outcome.database,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn three_disk_14() -> &'static Built {
    static DB: OnceLock<Built> = OnceLock::new();
    DB.get_or_init(|| build(BilliardTable::equilateral_three_disk(6.0, 1.0), 14))
}

fn four_disk_12() -> &'static Built {
    static DB: OnceLock<Built> = OnceLock::new();
    DB.get_or_init(|| build(BilliardTable::square_four_disk(6.0, 1.0), 12))
}

struct Census {
    set: OrbitSet,
    curves: Vec<CountingCurve>,
    fit: GrowthFit,
}

fn four_disk_census() -> &'static Census {
    static C: OnceLock<Census> = OnceLock::new();
    C.get_or_init(|| {
        let b = four_disk_12();
        let set = OrbitSet::from_database(&b.db, &b.table);
        let grid = certified_grid(&set, 520);
        let curves: Vec<CountingCurve> =
            (1..=2).map(|n| count_curves(&set, n, &grid, None).expect("certified counts")).collect();
        let fit = fit_growth(&curves, None, None).expect("growth fit");
        Census { set, curves, fit }
    })
}

// ---------------------------------------------------------------- criterion 1

fn mobius(mut n: u64) -> i64 {
    let mut sign = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

fn sequences(a: i64, n: u32) -> i64 {
    (a - 1).pow(n) + (a - 1) * (-1i64).pow(n)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    for (a, alphabet) in [(3i64, Alphabet::new(1, 3)), (4, Alphabet::new(0, 3))] {
        for n in 1..=12u32 {
            let words: Vec<_> = enumerate_words(alphabet, n as usize, ZeroFilter::Any, false).collect();
            let total: i64 = words.iter().map(|w| w.period() as i64).sum();
            let primitive = words.iter().filter(|w| w.is_primitive()).count() as i64;
            let expected_primitive: i64 = (1..=n as u64)
                .filter(|d| n as u64 % d == 0)
                .map(|d| mobius(d) * sequences(a, n / d as u32))
                .sum::<i64>()
                / n as i64;
            if total != sequences(a, n) || primitive != expected_primitive {
                bad.push(format!("a={a} N={n}: {total}/{primitive}"));
            }
        }
    }
    let t = start.elapsed();
    check(
        bad.is_empty() && within(t, 5.0),
        format!("a in {{3,4}}, N <= 12, mismatches {bad:?}, {:.2} s (< 5 s)", t.as_secs_f64()),
    )
}

// ---------------------------------------------------------------- criterion 2

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let table = BilliardTable::equilateral_three_disk(6.0, 1.0);
    let opts = SolveOptions::default();
    let two = solve_letters(&[1, 2], &table, &opts).map_err(|e| e.to_string())?;
    let three = solve_letters(&[1, 2, 3], &table, &opts).map_err(|e| e.to_string())?;
    let t = start.elapsed();
    let expected3 = 3.0 * (6.0 - 3f64.sqrt());
    let e2 = (two.tau - 8.0).abs();
    let e3 = (three.tau - expected3).abs();
    let refl = two.reflection_residual.max(three.reflection_residual);
    check(
        e2 < 1e-9 && e3 < 1e-8 && refl < 1e-10 && within(t, 1.0),
        format!(
            "|tau(12) - 8| = {e2:.1e}, |tau(123) - 3(6-sqrt3)| = {e3:.1e}, reflection {refl:.1e}, {:.3} s",
            t.as_secs_f64()
        ),
    )
}

// ---------------------------------------------------------------- criterion 3

fn boundary(table: &BilliardTable, id: Letter, theta: f64) -> (f64, f64) {
    let d = table.disk(id);
    (d.center.x + d.radius * theta.cos(), d.center.y + d.radius * theta.sin())
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// Length of the two segments through bounce `k` with angle `theta`.
fn local_length(table: &BilliardTable, letters: &[Letter], angles: &[f64], k: usize, theta: f64) -> f64 {
    let n = letters.len();
    let prev = boundary(table, letters[(k + n - 1) % n], angles[(k + n - 1) % n]);
    let next = boundary(table, letters[(k + 1) % n], angles[(k + 1) % n]);
    let here = boundary(table, letters[k], theta);
    dist(prev, here) + dist(here, next)
}

fn golden(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-12 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Coordinate search on a 1000-point grid per angle until the grid minimizers
/// settle, then golden-section coordinate descent.
fn brute_force_angles(table: &BilliardTable, letters: &[Letter]) -> Vec<f64> {
    let n = letters.len();
    let (cx, cy) = table
        .obstacles()
        .iter()
        .fold((0.0, 0.0), |(x, y), d| (x + d.center.x, y + d.center.y));
    let m = table.obstacles().len() as f64;
    let mut angles: Vec<f64> = letters
        .iter()
        .map(|&l| {
            let d = table.disk(l);
            (cy / m - d.center.y).atan2(cx / m - d.center.x)
        })
        .collect();
    const GRID: usize = 1000;
    let step = TAU / GRID as f64;
    for _ in 0..100 {
        let mut moved = false;
        for k in 0..n {
            let best = (0..GRID)
                .map(|i| -PI + i as f64 * step)
                .min_by(|&a, &b| {
                    local_length(table, letters, &angles, k, a)
                        .total_cmp(&local_length(table, letters, &angles, k, b))
                })
                .expect("grid is nonempty");
            if (best - angles[k]).abs() > 1e-15 {
                moved = true;
            }
            angles[k] = best;
        }
        if !moved {
            break;
        }
    }
    for _ in 0..10_000 {
        let mut change: f64 = 0.0;
        for k in 0..n {
            let old = angles[k];
            let snapshot = angles.clone();
            let new = golden(|t| local_length(table, letters, &snapshot, k, t), old - step, old + step);
            angles[k] = new;
            change = change.max((new - old).abs());
        }
        if change < 1e-11 {
            break;
        }
    }
    angles
}

fn angle_gap(a: f64, b: f64) -> f64 {
    ((a - b + PI).rem_euclid(TAU) - PI).abs()
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let table = BilliardTable::equilateral_three_disk(6.0, 1.0);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    let mut errors = Vec::new();
    for n in 2..=6 {
        for word in enumerate_words(Alphabet::new(1, 3), n, ZeroFilter::Any, true) {
            count += 1;
            match solve_orbit(&word, &table, &SolveOptions::default()) {
                Ok(o) => {
                    let oracle = brute_force_angles(&table, word.letters());
                    for (a, b) in o.angles.iter().zip(&oracle) {
                        worst = worst.max(angle_gap(*a, *b));
                    }
                }
                Err(e) => errors.push(e.to_string()),
            }
        }
    }
    let t = start.elapsed();
    check(
        errors.is_empty() && worst < 1e-6 && within(t, 120.0),
        format!(
            "{count} words, max angle difference {worst:.2e} (< 1e-6), errors {errors:?}, {:.1} s",
            t.as_secs_f64()
        ),
    )
}

// ---------------------------------------------------------------- criterion 4

fn criterion_4() -> Outcome {
    let mut worst_closure: f64 = 0.0;
    let mut min_trace = f64::INFINITY;
    let mut failed = 0usize;
    let mut total = 0usize;
    for built in [three_disk_14(), four_disk_12()] {
        for o in built.db.orbits() {
            total += 1;
            let r = verify_orbit(o, &built.table);
            if !r.ok {
                failed += 1;
            }
            worst_closure = worst_closure.max(r.closure_residual);
            min_trace = min_trace.min(o.stability.monodromy_trace.abs());
        }
    }
    let two = BilliardTable::two_disk(6.0, 1.0);
    let orbit = solve_letters(&[1, 2], &two, &SolveOptions::default()).map_err(|e| e.to_string())?;
    let e98 = (orbit.stability.monodromy_trace - 98.0).abs();
    check(
        failed == 0 && worst_closure < 1e-8 && min_trace > 2.0 && e98 < 1e-9,
        format!(
            "{total} orbits, {failed} failed, max closure {worst_closure:.1e}, min |trace| {min_trace:.3}, |trace(12) - 98| = {e98:.1e}"
        ),
    )
}

// ---------------------------------------------------------------- criterion 5

fn criterion_5() -> Outcome {
    let table = BilliardTable::equilateral_three_disk(6.0, 1.0);
    let h = 1e-6;
    let (g1, g2) = (0.618_033_988_749_894_9, 0.754_877_666_246_692_7);
    let image = |id: Letter, s: f64, p: f64| -> Option<(Letter, f64, f64)> {
        let disk = table.disk(id);
        match billiard_map(&PhasePoint::from_birkhoff(disk, s, p), &table).ok()? {
            MapStep::Bounce { next, .. } => {
                let (s2, p2) = birkhoff_coords(&next, table.disk(next.obstacle_id));
                Some((next.obstacle_id, s2, p2))
            }
            MapStep::Escape => None,
        }
    };
    let mut worst: f64 = 0.0;
    let mut found = 0;
    let mut k = 0u64;
    while found < 100 && k < 1_000_000 {
        k += 1;
        let id = (1 + k % 3) as Letter;
        let circ = table.disk(id).circumference();
        let s = (k as f64 * g1).fract() * circ;
        let p = (2.0 * (k as f64 * g2).fract() - 1.0) * 0.95;
        let Some((target, _, p0)) = image(id, s, p) else { continue };
        if p0.abs() > 0.95 {
            continue;
        }
        let probes = [(s + h, p), (s - h, p), (s, p + h), (s, p - h)];
        let imgs: Vec<_> = probes.iter().filter_map(|&(a, b)| image(id, a, b)).collect();
        if imgs.len() != 4 || imgs.iter().any(|i| i.0 != target) {
            continue;
        }
        let c2 = table.disk(target).circumference();
        let ds = |a: f64, b: f64| ((a - b + 0.5 * c2).rem_euclid(c2) - 0.5 * c2) / (2.0 * h);
        let j11 = ds(imgs[0].1, imgs[1].1);
        let j21 = (imgs[0].2 - imgs[1].2) / (2.0 * h);
        let j12 = ds(imgs[2].1, imgs[3].1);
        let j22 = (imgs[2].2 - imgs[3].2) / (2.0 * h);
        let det = j11 * j22 - j12 * j21;
        worst = worst.max((det.abs() - 1.0).abs());
        found += 1;
    }
    check(
        found == 100 && worst < 1e-6,
        format!("{found} sample points, max ||det J| - 1| = {worst:.2e} (< 1e-6)"),
    )
}

// ---------------------------------------------------------------- criterion 6

fn criterion_6() -> Outcome {
    let table = BilliardTable::equilateral_three_disk(6.0, 1.0);
    let family = shadowing_family(&[1, 2, 3], &[1, 2, 3], 6).map_err(|e| e.to_string())?;
    let fit = shadowing_rate(&family, &table, &SolveOptions::default()).map_err(|e| e.to_string())?;
    check(
        fit.beta > 1.0,
        format!("depths 1..6, beta = {:.3} (> 1), C = {:.3e}", fit.beta, fit.c),
    )
}

// ---------------------------------------------------------------- criterion 7

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let b = three_disk_14();
    let set = OrbitSet::from_database(&b.db, &b.table);
    let est = entropy_estimate(&set, EntropyMethod::Both).map_err(|e| e.to_string())?;
    let t = start.elapsed().as_secs_f64() + b.seconds;
    let (hp, hr) = (est.pressure.unwrap_or(f64::NAN), est.regression.unwrap_or(f64::NAN));
    let (lmin, lmax) = b.db.observed_segment_range().ok_or("empty database")?;
    let (lo, hi) = (2f64.ln() / lmax, 2f64.ln() / lmin);
    let agree = (hp - hr).abs() / hp.min(hr);
    let inside = |h: f64| h >= lo && h <= hi;
    check(
        agree < 0.05 && inside(hp) && inside(hr) && t < 600.0,
        format!(
            "pressure {hp:.6}, regression {hr:.6}, relative gap {:.2}% (< 5%), sandwich [{lo:.5}, {hi:.5}], {} orbits, {t:.1} s",
            100.0 * agree,
            b.db.len()
        ),
    )
}

// ---------------------------------------------------------------- criterion 8

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let c = four_disk_census();
    let t = start.elapsed().as_secs_f64() + four_disk_12().seconds;
    let mut ok = t < 900.0;
    let mut parts = Vec::new();
    for curve in &c.curves {
        let c_n = c
            .fit
            .c_per_n
            .iter()
            .find(|x| x.0 == curve.n)
            .map(|x| x.1)
            .ok_or("missing constant")?;
        let window = curve.top_decade().ok_or("empty curve")?;
        let idx = curve.indices_in(window);
        let logs: Vec<f64> = idx
            .iter()
            .map(|&k| theorem_ratio(curve.n, curve.counts[k] as f64, c.fit.h_hat, c_n, curve.t_grid[k]).ln())
            .collect();
        let (rmin, rmax) = logs
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &l| (a.min(l.exp()), b.max(l.exp())));
        let half = logs.len() / 2;
        let lower = logs[..half].iter().map(|l| l.abs()).sum::<f64>() / half as f64;
        let upper = logs[half..].iter().map(|l| l.abs()).sum::<f64>() / (logs.len() - half) as f64;
        ok &= logs.len() >= 4 && rmin >= 0.5 && rmax <= 2.0 && upper < lower;
        parts.push(format!(
            "n={}: r in [{rmin:.3}, {rmax:.3}] on t in [{:.1}, {:.1}], mean |log r| {lower:.4} -> {upper:.4}",
            curve.n, window.0, window.1
        ));
    }
    check(
        ok,
        format!("h = {:.5}, c_n = {:?}; {}; {t:.1} s", c.fit.h_hat, c.fit.c_per_n, parts.join("; ")),
    )
}

// ---------------------------------------------------------------- criterion 9

fn criterion_9() -> Outcome {
    let c = four_disk_census();
    let reports: Vec<_> = c.curves.iter().map(|cv| check_apriori(cv, c.fit.h_hat, 50.0)).collect();
    let ok = reports.iter().all(|r| r.ratio < 50.0);
    let desc: Vec<String> = reports.iter().map(|r| format!("n={}: max/min {:.3}", r.n, r.ratio)).collect();
    check(ok, format!("{} (< 50)", desc.join(", ")))
}

// ---------------------------------------------------------------- criterion 10

fn criterion_10() -> Outcome {
    let c = four_disk_census();
    let b = four_disk_12();
    let s = c.fit.h_hat + 0.5;
    let cutoff = c.set.certified_t * (1.0 - 1e-12);
    let rho = c.set.box_window(0.05).ok_or("no bounce box")?;
    let err = |e: orbit_census::spectral::SpectralError| e.to_string();

    let mut identity: f64 = 0.0;
    for n in 1..=2 {
        let ds = 1e-5;
        let up = log_zeta_n(n, s + ds, &c.set, &rho, cutoff).map_err(err)?.value;
        let down = log_zeta_n(n, s - ds, &c.set, &rho, cutoff).map_err(err)?.value;
        let g = g_series(n, s, &c.set, &rho, cutoff).map_err(err)?.value;
        let fd = (up - down) / (2.0 * ds);
        identity = identity.max((fd + s * g).abs() / (s * g).abs());
    }

    let flat = flat_trace(1, s, &c.set, &CutoffWindow::one(), cutoff).map_err(err)?.value;
    let mut direct: Vec<f64> = b
        .db
        .orbits()
        .filter(|o| o.zeros == 1 && o.tau <= cutoff)
        .map(|o| (-s * o.tau).exp())
        .collect();
    direct.sort_by(f64::total_cmp);
    let independent: f64 = direct.iter().rev().sum();
    let flat_err = (flat - independent).abs() / independent;

    let zs = 0.3;
    let zeta = zeta_log_deriv(zs, &OrbitSet::toy(vec![OrbitTerm::toy(2, 0, 8.0)]), 50.0).map_err(err)?.value;
    let zeta_expected: f64 = (1..=6).map(|k| 8.0 * (-zs * (k as f64 * 8.0)).exp()).sum();
    let one = CutoffWindow::one();
    let single = OrbitSet::toy(vec![OrbitTerm::toy(2, 1, 10.0)]);
    let ft = flat_trace(2, zs, &single, &one, 45.0).map_err(err)?.value;
    let ft_expected = 0.5 * (-zs * 20.0).exp();
    let gs = g_series(1, zs, &single, &one, 45.0).map_err(err)?.value;
    let gs_expected = (1.0 / zs) * (1..=4).map(|k| 10.0 * (-zs * (k as f64 * 10.0)).exp()).sum::<f64>();
    let exact = zeta == zeta_expected && ft == ft_expected && gs == gs_expected;

    check(
        identity < 1e-5 && flat_err < 1e-12 && exact,
        format!(
            "s = {s:.4}: identity rel err {identity:.1e} (< 1e-5), flat trace vs direct sum {flat_err:.1e} (< 1e-12), toy closed forms exact: {exact}"
        ),
    )
}

// ---------------------------------------------------------------- criterion 11

fn criterion_11() -> Outcome {
    let c = four_disk_census();
    let b = four_disk_12();
    let grid = &c.curves[0].t_grid;
    let t0 = 3.0 * b.table.min_gap(false);
    let full = c.set.box_window(0.0).ok_or("no bounce box")?;
    let small = c.set.box_window(0.05).ok_or("no bounce box")?;
    let mut ok = true;
    let mut parts = Vec::new();
    for curve in &c.curves {
        let n = curve.n;
        let r_full = compare_weighted(&c.set, n, grid, &full, t0).map_err(|e| e.to_string())?;
        let zero = r_full.deficit.iter().flatten().all(|&d| d == 0.0);
        let r_small = compare_weighted(&c.set, n, grid, &small, t0).map_err(|e| e.to_string())?;
        let blocks: Vec<f64> = block_means(&r_small.deficit, 8).into_iter().flatten().collect();
        let monotone = blocks.len() >= 4 && blocks.windows(2).all(|w| w[1] <= w[0]);
        ok &= zero && monotone;
        let blocks_s: Vec<String> = blocks.iter().map(|x| format!("{x:.3}")).collect();
        parts.push(format!(
            "n={n}: full-box deficit zero {zero}, shrunk-window block deficits [{}]",
            blocks_s.join(", ")
        ));
        if n == 2 {
            let window = curve.top_decade().ok_or("empty curve")?;
            let slope = r_small.census_slope(window);
            let grows = slope.is_some_and(|x| (0.5..=2.0).contains(&x));
            ok &= grows;
            parts.push(format!(
                "log-log slope of N/Ñ (t0 = {t0}) over [{:.1}, {:.1}] = {:.3} (in [0.5, 2])",
                window.0,
                window.1,
                slope.unwrap_or(f64::NAN)
            ));
        }
    }
    check(ok, parts.join("; "))
}

// ---------------------------------------------------------------- criterion 12

fn run_pipeline(dir: &Path, table_toml: &str, threads: &str) -> Result<Vec<Vec<u8>>, String> {
    let bin = env!("CARGO_BIN_EXE_orbit-census");
    let table = dir.join("table.toml");
    std::fs::write(&table, table_toml).map_err(|e| e.to_string())?;
    let db = dir.join("db.csv");
    let report = dir.join("report.toml");
    let steps: [Vec<&std::ffi::OsStr>; 2] = [
        vec![
            "orbits".as_ref(),
            "enumerate".as_ref(),
            "--table".as_ref(),
            table.as_os_str(),
            "--max-len".as_ref(),
            "10".as_ref(),
            "--out".as_ref(),
            db.as_os_str(),
        ],
        vec![
            "report".as_ref(),
            "--table".as_ref(),
            table.as_os_str(),
            "--db".as_ref(),
            db.as_os_str(),
            "--out".as_ref(),
            report.as_os_str(),
        ],
    ];
    for args in steps {
        let out = Command::new(bin)
            .args(&args)
            .env("ORBIT_CENSUS_THREADS", threads)
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr)));
        }
    }
    ["db.csv", "db.csv.meta.toml", "report.toml"]
        .iter()
        .map(|f| std::fs::read(dir.join(f)).map_err(|e| e.to_string()))
        .collect()
}

fn criterion_12() -> Outcome {
    let table = BilliardTable::square_four_disk(6.0, 1.0).to_toml_string();
    let mut runs = Vec::new();
    for threads in ["1", "4", "4"] {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        runs.push(run_pipeline(dir.path(), &table, threads)?);
    }
    let same = runs.windows(2).all(|w| w[0] == w[1]);
    let sizes: Vec<usize> = runs[0].iter().map(Vec::len).collect();
    check(
        same,
        format!("threads 1/4/4, database + metadata + report byte-identical: {same} (sizes {sizes:?})"),
    )
}

// ---------------------------------------------------------------- harness

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("word combinatorics", criterion_1),
        ("solver ground truth", criterion_2),
        ("oracle equivalence", criterion_3),
        ("closure and hyperbolicity", criterion_4),
        ("measure preservation", criterion_5),
        ("shadowing", criterion_6),
        ("entropy consistency", criterion_7),
        ("growth-law trend", criterion_8),
        ("a-priori bound shape", criterion_9),
        ("series identities", criterion_10),
        ("weighted vs plain counting", criterion_11),
        ("determinism", criterion_12),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = format!("{}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|x| *x == id || name.contains(x.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {id:>2} {tag} {name}: {detail} [{secs:.2} s]");
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
