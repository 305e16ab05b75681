//! End-to-end acceptance checks. Each criterion prints one line; the
//! process exits non-zero if any of them fails.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use pfl_core::field::{build_potential, gaussian_beam, imprint_vortex, PotentialKind};
use pfl_core::hydro::{circulation, structure_factor, winding_number};
use pfl_core::rng::stream_rng;
use pfl_core::solver::{propagate, StepPlan};
use pfl_core::{Complex64, Field2D, Grid, MediumParams, UnitTag};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

type Outcome = Result<String, String>;
type Criterion = fn(&Path) -> Outcome;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

/// Runs `pfl <scenario>` on `config` text and returns the output directory.
fn run_pfl(work: &Path, tag: &str, scenario: &str, config: &str) -> PathBuf {
    let cfg = work.join(format!("{tag}.ini"));
    fs::write(&cfg, config).unwrap();
    let out = work.join(tag);
    let o = Command::new(env!("CARGO_BIN_EXE_pfl"))
        .args([scenario, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .env_remove("PFL_OUT")
        .output()
        .unwrap();
    assert!(o.status.success(), "pfl {scenario} failed: {}", String::from_utf8_lossy(&o.stderr));
    out
}

fn summary(dir: &Path) -> String {
    fs::read_to_string(dir.join("summary.txt")).unwrap()
}

/// Leading number of the summary value stored under `key`.
fn summary_number(dir: &Path, key: &str) -> f64 {
    let text = summary(dir);
    let line = text.lines().find(|l| l.starts_with(&format!("{key} = "))).unwrap_or_else(|| panic!("{key} missing"));
    line[key.len() + 3..].split_whitespace().next().unwrap().parse().unwrap()
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path).unwrap().lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn numbers(rows: &[Vec<String>], col: usize) -> Vec<f64> {
    rows.iter().map(|r| r[col].parse().unwrap()).collect()
}

fn rms_waist(f: &Field2D) -> f64 {
    let g = f.grid();
    let (mut m0, mut m2) = (0.0, 0.0);
    for j in 0..g.ny() {
        for i in 0..g.nx() {
            let rho = f.at(i, j).norm_sqr();
            m0 += rho;
            m2 += rho * g.x(i) * g.x(i);
        }
    }
    2.0 * (m2 / m0).sqrt()
}

fn free_diffraction(_: &Path) -> Outcome {
    let (lambda, w0) = (780e-9, 100e-6);
    let z_r = PI * w0 * w0 / lambda;
    let start = Instant::now();
    let grid = Grid::new(256, 256, 5e-6, 5e-6).unwrap();
    let beam = gaussian_beam(&grid, w0, 1e-3, 1.0).unwrap();
    let medium = MediumParams::new(lambda, 1.0, 0.0, 2.0 * z_r).unwrap();
    let rec = propagate(&beam, &medium, &StepPlan::new(2.0 * z_r, 40).unwrap()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let expected = w0 * 5f64.sqrt();
    let err = (rms_waist(&rec.field) / expected - 1.0).abs();
    check(err < 5e-3 && secs < 10.0, format!("w(2 z_R) relative error {err:.2e}, {secs:.2} s"))
}

fn unitarity(_: &Path) -> Outcome {
    let grid = Grid::new(128, 128, 4e-6, 4e-6).unwrap();
    let beam = gaussian_beam(&grid, 80e-6, 0.5, 1.0).unwrap();
    let defect =
        PotentialKind::GaussianDefect { amplitude: Complex64::new(2e-5, 0.0), waist: 20e-6, center: (30e-6, 0.0) };
    let pot = build_potential(&grid, &defect).unwrap();
    let medium = MediumParams::from_n2(780e-9, 1.0, -1e-11, 0.008).unwrap().with_potential(pot);
    let rec = propagate(&beam, &medium, &StepPlan::new(0.008, 1000).unwrap()).unwrap();
    let p0 = rec.power[0].1;
    let drift = rec.power.iter().map(|(_, p)| (p / p0 - 1.0).abs()).fold(0.0, f64::max);
    check(drift < 1e-10 && rec.power.len() == 1001, format!("max relative power drift {drift:.2e} over 1000 steps"))
}

fn loss_law(_: &Path) -> Outcome {
    let grid = Grid::new(64, 64, 5e-6, 5e-6).unwrap();
    let beam = gaussian_beam(&grid, 40e-6, 1e-3, 1.0).unwrap();
    let alpha = 30.0;
    let medium = MediumParams::new(780e-9, 1.0, 0.0, 0.05).unwrap().with_alpha(alpha).unwrap();
    let rec = propagate(&beam, &medium, &StepPlan::new(0.05, 37).unwrap()).unwrap();
    let p0 = rec.power[0].1;
    let worst = rec.power.iter().map(|(z, p)| (p / (p0 * (-alpha * z).exp()) - 1.0).abs()).fold(0.0, f64::max);
    check(worst < 1e-6, format!("max deviation from exp(-alpha z) {worst:.2e}"))
}

fn strang_order(_: &Path) -> Outcome {
    let grid = Grid::new(64, 64, 0.5, 0.5).unwrap();
    let psi = Field2D::from_fn(grid, UnitTag::Dimensionless, |x, y| {
        let bump = (-(x * x + y * y) / 16.0).exp();
        Complex64::from_polar(1.0 + 0.4 * bump, 0.5 * bump * (x - 0.5 * y) / 4.0)
    })
    .unwrap();
    let medium = MediumParams::dimensionless(2.0).unwrap();
    let run = |n| propagate(&psi, &medium, &StepPlan::new(2.0, n).unwrap()).unwrap().field;
    let (a, b, c) = (run(100), run(200), run(400));
    let dist = |p: &Field2D, q: &Field2D| {
        p.values().iter().zip(q.values()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
    };
    let ratio = dist(&a, &b) / dist(&b, &c);
    check((3.5..=4.5).contains(&ratio), format!("self-convergence ratio {ratio:.3}"))
}

fn sonic_branch(work: &Path) -> Outcome {
    let config = "[run]\nscenario = dispersion\n[grid]\nnx = 256\nny = 256\ndx = 1\n[medium]\nlength = 25\n\
                  [plan]\nn_steps = 500\n[probe]\nk = 0.1, 0.2, 0.3, 0.5, 0.8, 1.2\nwidth = 25\ncenter = -50\n";
    let start = Instant::now();
    let dir = run_pfl(work, "dispersion", "dispersion", config);
    let secs = start.elapsed().as_secs_f64();
    let rows = read_csv(&dir.join("group_velocity.csv"));
    let (k, v) = (numbers(&rows, 0), numbers(&rows, 1));
    // ξ = 1 in these units
    let low: Vec<f64> = k.iter().zip(&v).filter(|(k, _)| **k <= 0.3).map(|(_, v)| *v).collect();
    let (lo, hi) = low.iter().fold((f64::MAX, f64::MIN), |(a, b), v| (a.min(*v), b.max(*v)));
    let spread = hi / lo - 1.0;
    let c_fit = summary_number(&dir, "c_s_fit");
    let c_theory = summary_number(&dir, "c_s_theory");
    let c_err = (c_fit / c_theory - 1.0).abs();
    check(
        low.len() == 3 && spread < 0.1 && c_err < 0.05 && secs < 300.0,
        format!("low-k spread {:.2}%, c_s fit {c_fit:.4} vs {c_theory:.4}, {secs:.1} s", 100.0 * spread),
    )
}

fn sound_scaling(work: &Path) -> Outcome {
    let dir = run_pfl(
        work,
        "scaling",
        "sound-scaling",
        &fs::read_to_string(configs_dir().join("sound-scaling.ini")).unwrap(),
    );
    let rho = numbers(&read_csv(&dir.join("scaling.csv")), 0);
    let decade = rho.last().unwrap() / rho[0];
    let exponent = summary_number(&dir, "exponent");
    check(
        (exponent - 0.5).abs() <= 0.05 && decade >= 10.0,
        format!("exponent {exponent:.4} over density ratio {decade}"),
    )
}

fn precondensation(work: &Path) -> Outcome {
    let dir = run_pfl(
        work,
        "precondensation",
        "precondensation",
        &fs::read_to_string(configs_dir().join("precondensation.ini")).unwrap(),
    );
    let rows = read_csv(&dir.join("statistics.csv"));
    let (length, g2) = (numbers(&rows, 0), numbers(&rows, 1));
    let mode_bin: Vec<usize> = (0..rows.len())
        .map(|i| {
            let p = numbers(&read_csv(&dir.join(format!("pdf_{i:02}.csv"))), 1);
            (0..p.len()).fold(0, |best, b| if p[b] > p[best] { b } else { best })
        })
        .collect();
    let falling = g2.windows(2).all(|w| w[1] < w[0]);
    let at = |tau: f64| length.iter().position(|l| *l == tau).unwrap();
    let shifted = mode_bin[at(3.0)] > 0 && mode_bin[at(6.0)] > 0;
    let g2_text: Vec<String> = g2.iter().map(|g| format!("{g:.3}")).collect();
    check(falling && shifted, format!("g2 {} at tau {:?}; mode bins {:?}", g2_text.join(" > "), length, mode_bin))
}

fn gem_efficiency(work: &Path) -> Outcome {
    let config = "[run]\nscenario = gem-efficiency-sweep\n[gem]\ng = 1\neta = 10\nt_extent = 20\nnt = 2048\n\
                  [sweep]\nratios = 0.5, 1, 1.5, 2, 3\ncenter = 5\nwidth = 1\nflip = 10\n";
    let dir = run_pfl(work, "sweep", "gem-efficiency-sweep", config);
    let rows = read_csv(&dir.join("efficiency.csv"));
    let ratio = numbers(&rows, 0);
    let (theory, sim) = (numbers(&rows, 1), numbers(&rows, 2));
    let worst = theory.iter().zip(&sim).map(|(t, s)| (s / t - 1.0).abs()).fold(0.0, f64::max);
    // closed form, evaluated here rather than trusted from the CSV
    let formula_ok = ratio.iter().zip(&theory).all(|(r, t)| (t - (1.0 - (-r).exp()).powi(2)).abs() < 1e-12);
    let dt = 20.0 / 2048.0;
    let mut echo_off: f64 = 0.0;
    for line in summary(&dir).lines().filter(|l| l.starts_with("ratio = ")) {
        let tail = line.split("echo at ").nth(1).unwrap();
        let t: f64 = tail.split_whitespace().next().unwrap().parse().unwrap();
        let predicted: f64 = tail.split("predicted ").nth(1).unwrap().trim_end_matches(')').parse().unwrap();
        echo_off = echo_off.max((t - predicted).abs());
    }
    check(
        rows.len() == 5 && formula_ok && worst < 0.05 && echo_off <= dt + 1e-4,
        format!("max relative efficiency error {:.2}%, echo offset {echo_off:.4} (cell {dt:.4})", 100.0 * worst),
    )
}

fn recall_order(dir: &Path, tag: &str) -> Vec<String> {
    let mut rows = read_csv(&dir.join(format!("peaks_{tag}.csv")));
    rows.sort_by(|a, b| a[1].parse::<f64>().unwrap().total_cmp(&b[1].parse::<f64>().unwrap()));
    rows.into_iter().map(|r| r[0].clone()).collect()
}

fn fifo_filo(work: &Path) -> Outcome {
    let dir = run_pfl(work, "ordering", "fifo-filo", &fs::read_to_string(configs_dir().join("fifo-filo.ini")).unwrap());
    let filo = recall_order(&dir, "filo");
    let fifo = recall_order(&dir, "fifo");
    check(
        filo == ["B", "A"] && fifo == ["A", "B"],
        format!("single flip recalls {filo:?}, gated schedule recalls {fifo:?}"),
    )
}

fn vortex_invariants(work: &Path) -> Outcome {
    let charges = [1, -1, 2, -2, 3, -3];
    let (spacing, core) = (18.0, 2.0);
    let list: Vec<String> = charges.iter().map(|q| q.to_string()).collect();
    let config = format!(
        "[run]\nscenario = vortices\n[grid]\nnx = 128\nny = 128\ndx = 1\n[medium]\nlength = 0\n[plan]\nn_steps = 0\n\
         [vortices]\nmode = imprint\ncharges = {}\nspacing = {spacing}\ncore = {core}\nfloor = 0.01\n",
        list.join(", ")
    );
    let dir = run_pfl(work, "vortices", "vortices", &config);
    let grid = Grid::new(128, 128, 1.0, 1.0).unwrap();
    let n = charges.len() as f64;
    let centers: Vec<(f64, f64)> =
        (0..charges.len()).map(|i| ((i as f64 - 0.5 * (n - 1.0)) * spacing + 0.5, 0.5)).collect();

    let clusters = read_csv(&dir.join("clusters.csv"));
    let recovered: Vec<i64> = centers
        .iter()
        .map(|(cx, cy)| {
            clusters
                .iter()
                .filter(|c| {
                    let (x, y): (f64, f64) = (c[0].parse().unwrap(), c[1].parse().unwrap());
                    (x - cx).hypot(y - cy) < 4.0
                })
                .map(|c| c[2].parse::<i64>().unwrap())
                .sum()
        })
        .collect();
    let exact = recovered.iter().zip(&charges).all(|(r, q)| *r == *q as i64);

    // same field rebuilt here; random axis-aligned loops that keep clear of every core
    let mut field = Field2D::new(grid, vec![Complex64::new(1.0, 0.0); grid.len()], UnitTag::Dimensionless).unwrap();
    for (q, c) in charges.iter().zip(&centers) {
        field = imprint_vortex(&field, *q, *c, Some(core)).unwrap();
    }
    let cell = |(x, y): (f64, f64)| ((x - grid.x(0)) / grid.dx(), (y - grid.y(0)) / grid.dy());
    let cores: Vec<(f64, f64)> = centers.iter().map(|c| cell(*c)).collect();
    let mut rng = stream_rng(11, 0);
    let (mut loops, mut bad, mut worst) = (0, 0, 0.0f64);
    while loops < 10_000 {
        let (i0, i1) = (rng.random_range(1..126usize), rng.random_range(1..126usize));
        let (j0, j1) = (rng.random_range(1..126usize), rng.random_range(1..126usize));
        let (i0, i1, j0, j1) = (i0.min(i1), i0.max(i1), j0.min(j1), j0.max(j1));
        if i1 - i0 < 2 || j1 - j0 < 2 {
            continue;
        }
        let near_edge = |&(ci, cj): &(f64, f64)| {
            let inside_x = ci > i0 as f64 - 3.0 && ci < i1 as f64 + 3.0;
            let inside_y = cj > j0 as f64 - 3.0 && cj < j1 as f64 + 3.0;
            let off_x = (ci - i0 as f64).abs().min((ci - i1 as f64).abs());
            let off_y = (cj - j0 as f64).abs().min((cj - j1 as f64).abs());
            (inside_y && off_x < 3.0) || (inside_x && off_y < 3.0)
        };
        if cores.iter().any(near_edge) {
            continue;
        }
        let mut path = Vec::new();
        path.extend((i0..i1).map(|i| (i, j0)));
        path.extend((j0..j1).map(|j| (i1, j)));
        path.extend((i0 + 1..=i1).rev().map(|i| (i, j1)));
        path.extend((j0 + 1..=j1).rev().map(|j| (i0, j)));
        let c = circulation(&field, &path).unwrap();
        let enclosed: i64 = cores
            .iter()
            .zip(&charges)
            .filter(|((ci, cj), _)| *ci > i0 as f64 && *ci < i1 as f64 && *cj > j0 as f64 && *cj < j1 as f64)
            .map(|(_, q)| *q as i64)
            .sum();
        worst = worst.max((c - 2.0 * PI * winding_number(c) as f64).abs());
        if winding_number(c) != enclosed {
            bad += 1;
        }
        loops += 1;
    }
    check(
        exact && bad == 0 && worst < 1e-9,
        format!("recovered {recovered:?}; {loops} loops, {bad} mismatches, max off-quantum {worst:.1e} rad"),
    )
}

fn noise_ensemble(grid: Grid, members: u64, seed: u64) -> Vec<Field2D> {
    (0..members)
        .map(|m| {
            let mut rng = stream_rng(seed, m);
            let v = (0..grid.len())
                .map(|_| {
                    let a: f64 = StandardNormal.sample(&mut rng);
                    let b: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(1.0 + 0.01 * a, 0.01 * b)
                })
                .collect();
            Field2D::new(grid, v, UnitTag::Dimensionless).unwrap()
        })
        .collect()
}

/// Linearised response of white amplitude and phase noise on a unit
/// background after `tau`, averaged over the modes of each radial bin.
fn linear_oracle(grid: &Grid, tau: f64, bins: usize) -> Vec<f64> {
    let width = grid.nyquist_x().min(grid.nyquist_y()) / bins as f64;
    let mut acc = vec![(0.0, 0usize); bins];
    for (n, k2) in grid.k_squared().iter().enumerate() {
        let b = (k2.sqrt() / width).floor() as usize;
        if n == 0 || b >= bins {
            continue;
        }
        let eps = k2 / 2.0;
        let om = (eps * (eps + 2.0)).sqrt();
        acc[b].0 += (om * tau).cos().powi(2) + (eps / om * (om * tau).sin()).powi(2);
        acc[b].1 += 1;
    }
    acc.into_iter().filter(|(_, c)| *c > 0).map(|(s, c)| s / c as f64).collect()
}

fn structure_factor_check(work: &Path) -> Outcome {
    let grid = Grid::new(64, 64, 1.0, 1.0).unwrap();
    let a = noise_ensemble(grid, 200, 21);
    let b = noise_ensemble(grid, 200, 22);
    let flat = structure_factor(&a, &b, 20).unwrap();
    let outliers = flat.s.iter().zip(&flat.stderr).filter(|(s, e)| (**s - 1.0).abs() > 3.0 * **e).count();

    let dir = run_pfl(
        work,
        "sk",
        "structure-factor",
        &fs::read_to_string(configs_dir().join("structure-factor.ini")).unwrap(),
    );
    let rows = read_csv(&dir.join("structure_factor.csv"));
    let (k, s) = (numbers(&rows, 0), numbers(&rows, 1));
    let oracle = linear_oracle(&grid, 1.0, 20);
    let low_k_below = k.iter().zip(&s).filter(|(k, _)| **k < 1.0).all(|(_, s)| *s < 1.0);
    let worst = s.iter().zip(&oracle).map(|(s, o)| (s / o - 1.0).abs()).fold(0.0, f64::max);
    check(
        outliers == 0 && low_k_below && oracle.len() == s.len() && worst < 0.1,
        format!(
            "self-referenced: {outliers} of {} bins outside 3 sigma; propagated S < 1 below k xi = 1: {low_k_below}; \
             max oracle deviation {:.1}%",
            flat.s.len(),
            100.0 * worst
        ),
    )
}

fn csv_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect()
}

fn reproducibility(work: &Path) -> Outcome {
    let mut compared = 0;
    let mut differing = Vec::new();
    let mut names: Vec<PathBuf> = fs::read_dir(configs_dir()).unwrap().map(|e| e.unwrap().path()).collect();
    names.sort();
    for path in names {
        let text = fs::read_to_string(&path).unwrap();
        let scenario = text
            .lines()
            .find_map(|l| l.strip_prefix("scenario = "))
            .unwrap_or_else(|| panic!("{} names no scenario", path.display()))
            .trim()
            .to_string();
        let stem = path.file_stem().unwrap().to_string_lossy().into_owned();
        let a = csv_files(&run_pfl(work, &format!("{stem}-a"), &scenario, &text));
        let b = csv_files(&run_pfl(work, &format!("{stem}-b"), &scenario, &text));
        compared += a.len();
        if a.is_empty() || a != b {
            differing.push(stem);
        }
    }
    check(differing.is_empty(), format!("{compared} CSV files compared across repeated runs; differing: {differing:?}"))
}

fn main() {
    let criteria: [(&str, Criterion); 12] = [
        ("free diffraction", free_diffraction),
        ("unitarity", unitarity),
        ("loss law", loss_law),
        ("Strang order", strang_order),
        ("sonic branch", sonic_branch),
        ("sound-speed scaling", sound_scaling),
        ("pre-condensation", precondensation),
        ("memory efficiency", gem_efficiency),
        ("recall ordering", fifo_filo),
        ("vortex invariants", vortex_invariants),
        ("structure factor", structure_factor_check),
        ("reproducibility", reproducibility),
    ];
    let work = tempfile::tempdir().unwrap();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(|| run(work.path()))).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:2} {name}: PASS ({detail}) [{secs:.1} s]", n + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:2} {name}: FAIL ({detail}) [{secs:.1} s]", n + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
