use std::f64::consts::PI;

use num_complex::Complex64;
use pfl_core::fft::spectrum;
use pfl_core::field::imprint_vortex;
use pfl_core::gem::*;
use pfl_core::hydro::*;
use pfl_core::solver::{propagate, StepPlan};
use pfl_core::{Field2D, Grid, MediumParams, UnitTag};
use proptest::prelude::*;

fn random_field(grid: Grid, amps: &[(f64, f64)]) -> Field2D {
    let values = amps.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
    Field2D::new(grid, values, UnitTag::Dimensionless).unwrap()
}

fn amps(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n)
}

fn smooth_fluid(grid: Grid, modes: &[(i32, i32, f64, f64)]) -> Field2D {
    let (lx, ly) = (grid.extent_x(), grid.extent_y());
    Field2D::from_fn(grid, UnitTag::Dimensionless, |x, y| {
        let mut re = 1.0;
        let mut ph = 0.0;
        for &(mx, my, a, p) in modes {
            let arg = 2.0 * PI * (mx as f64 * x / lx + my as f64 * y / ly);
            re += 0.1 * a * arg.cos();
            ph += p * arg.sin();
        }
        Complex64::from_polar(re, ph)
    })
    .unwrap()
}

fn modes() -> impl Strategy<Value = Vec<(i32, i32, f64, f64)>> {
    prop::collection::vec((-3..=3i32, -3..=3i32, -1.0..1.0f64, -0.5..0.5f64), 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn parseval_holds(a in amps(16 * 8)) {
        let f = random_field(Grid::new(16, 8, 0.5, 1.0).unwrap(), &a);
        let r: f64 = f.values().iter().map(|c| c.norm_sqr()).sum();
        prop_assume!(r > 0.0);
        let s: f64 = spectrum(f.grid(), f.values()).iter().map(|c| c.norm_sqr()).sum();
        prop_assert!((s / r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lossless_runs_conserve_power(m in modes(), steps in 10usize..60) {
        let f = smooth_fluid(Grid::new(32, 32, 1.0, 1.0).unwrap(), &m);
        let medium = MediumParams::dimensionless(2.0).unwrap();
        let rec = propagate(&f, &medium, &StepPlan::new(2.0, steps).unwrap()).unwrap();
        for &(_, p) in &rec.power {
            prop_assert!((p / rec.power[0].1 - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn linear_absorption_is_exponential(m in modes(), alpha in 0.01..2.0f64) {
        let f = smooth_fluid(Grid::new(32, 32, 1.0, 1.0).unwrap(), &m);
        let medium = MediumParams::dimensionless(3.0).unwrap().with_chi3(0.0).unwrap().with_alpha(alpha).unwrap();
        let rec = propagate(&f, &medium, &StepPlan::new(3.0, 17).unwrap()).unwrap();
        for &(z, p) in &rec.power {
            prop_assert!((p / (rec.power[0].1 * (-alpha * z).exp()) - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn snapshots_are_ordered(every in 1usize..7) {
        let f = smooth_fluid(Grid::new(16, 16, 1.0, 1.0).unwrap(), &[(1, 0, 0.5, 0.2)]);
        let medium = MediumParams::dimensionless(1.0).unwrap();
        let rec = propagate(&f, &medium, &StepPlan::new(1.0, 20).unwrap().with_snapshots(every)).unwrap();
        prop_assert!(rec.snapshots.windows(2).all(|w| w[1].z > w[0].z));
        prop_assert!(rec.power.iter().all(|&(_, p)| p.is_finite()));
    }

    #[test]
    fn winding_ignores_global_phase_and_scale(
        charges in prop::collection::vec(-3..=3i32, 1..4),
        theta in 0.0..2.0 * PI,
        scale in 0.01..100.0f64,
    ) {
        let grid = Grid::new(96, 96, 1.0, 1.0).unwrap();
        let mut f = Field2D::from_fn(grid, UnitTag::Dimensionless, |_, _| Complex64::new(1.0, 0.0)).unwrap();
        let mut expected = 0;
        for (n, &q) in charges.iter().enumerate() {
            let x = -30.0 + 30.0 * n as f64;
            f = imprint_vortex(&f, q, (x + 0.37, 0.21 * n as f64 + 0.3), Some(2.0)).unwrap();
            expected += q as i64;
        }
        let base = detect_vortices(&f, 0.0).total_winding();
        prop_assert_eq!(base, expected);
        let g = f.scaled(Complex64::from_polar(scale, theta)).unwrap();
        let set = detect_vortices(&g, 0.0);
        prop_assert_eq!(set.total_winding(), base);
        prop_assert!(set.vortices.iter().all(|v| v.charge.abs() == 1));
        prop_assert_eq!(set.vortices.iter().map(|v| v.charge as i64).sum::<i64>(), set.total_winding());
    }

    #[test]
    fn g1_is_bounded_and_phase_blind(a in amps(16 * 16), b in amps(16 * 16), theta in 0.0..2.0 * PI) {
        let grid = Grid::new(16, 16, 1.0, 1.0).unwrap();
        let fields = vec![random_field(grid, &a), random_field(grid, &b)];
        let rotated: Vec<Field2D> = fields.iter().map(|f| f.scaled(Complex64::from_polar(1.0, theta)).unwrap()).collect();
        for method in [G1Method::RotatePair, G1Method::Ensemble] {
            let p = coherence_g1(&fields, method, 8).unwrap();
            let q = coherence_g1(&rotated, method, 8).unwrap();
            for (x, y) in p.g1.iter().zip(&q.g1) {
                prop_assert!((0.0..=1.0 + 1e-12).contains(x));
                prop_assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn dispersion_starts_at_zero_and_rises(mu in 0.05..3.0f64, mass in 0.5..2.0f64) {
        let xi = 1.0 / (mass * mu).sqrt();
        let samples: Vec<(f64, f64)> = (1..=20).map(|n| {
            let k = 0.15 * n as f64 / xi;
            (k, bogoliubov_group_velocity(k, mass, mu))
        }).collect();
        let c = dispersion_from_group_velocity(&samples, mass).unwrap();
        prop_assert_eq!(c.omega[0], 0.0);
        prop_assert_eq!(c.k[0], 0.0);
        prop_assert!(c.k.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(c.omega.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!((c.mu / mu - 1.0).abs() < 0.02);
    }

    #[test]
    fn madelung_recovers_density_and_flow(m in modes()) {
        let grid = Grid::new(64, 64, 1.0, 1.0).unwrap();
        let f = smooth_fluid(grid, &m);
        let d = madelung(&f, 1e-6).unwrap();
        for (r, c) in d.density.iter().zip(f.values()) {
            prop_assert!((r - c.norm_sqr()).abs() < 1e-14);
        }
        let (lx, ly) = (grid.extent_x(), grid.extent_y());
        for j in 0..64 {
            for i in 0..64 {
                let (x, y) = (grid.x(i), grid.y(j));
                let (mut vx, mut vy) = (0.0, 0.0);
                for &(mx, my, _, p) in &m {
                    let arg = 2.0 * PI * (mx as f64 * x / lx + my as f64 * y / ly);
                    vx += p * arg.cos() * 2.0 * PI * mx as f64 / lx;
                    vy += p * arg.cos() * 2.0 * PI * my as f64 / ly;
                }
                let (ux, uy) = d.velocity_at(i, j).unwrap();
                prop_assert!((ux - vx).abs() < 1e-6 && (uy - vy).abs() < 1e-6, "{ux},{vx} {uy},{vy}");
            }
        }
    }

    #[test]
    fn closed_form_depends_on_ratio_only(ratio in 0.1..4.0f64, eta in 1.0..100.0f64) {
        let a = gem_efficiency_theory(1.0, ratio * eta / (2.0 * PI), eta).unwrap();
        let b = gem_efficiency_theory(2.0, ratio * eta / (2.0 * PI), 2.0 * eta).unwrap();
        prop_assert!((a - b).abs() < 1e-14);
        prop_assert!((a - (1.0 - (-ratio).exp()).powi(2)).abs() < 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn structure_factor_is_phase_blind(seed in 0u64..1000, theta in 0.0..2.0 * PI) {
        use rand::{Rng, SeedableRng};
        let grid = Grid::new(8, 8, 1.0, 1.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut member = || {
            let v = (0..64).map(|_| Complex64::new(1.0 + 0.1 * rng.random::<f64>(), 0.1 * rng.random::<f64>())).collect();
            Field2D::new(grid, v, UnitTag::Dimensionless).unwrap()
        };
        let sig: Vec<Field2D> = (0..MIN_REALISATIONS).map(|_| member()).collect();
        let refs: Vec<Field2D> = (0..MIN_REALISATIONS).map(|_| member()).collect();
        let rot = |fs: &[Field2D]| -> Vec<Field2D> {
            fs.iter().map(|f| f.scaled(Complex64::from_polar(1.0, theta)).unwrap()).collect()
        };
        let a = structure_factor(&sig, &refs, 4).unwrap();
        let b = structure_factor(&rot(&sig), &rot(&refs), 4).unwrap();
        for (x, y) in a.s.iter().zip(&b.s) {
            prop_assert!((x - y).abs() < 1e-9 * x.abs().max(1.0));
        }
    }

    #[test]
    fn efficiency_ignores_input_phase(theta in 0.0..2.0 * PI) {
        let mut cfg = GemConfig::new(1.0, 10.0 / (2.0 * PI), 10.0, 2.0, 20.0);
        cfg.gradient = GradientSchedule::with_flips(10.0, vec![10.0]);
        let mut p = Pulse::new("A", 5.0, 1.0, 1.0);
        let base = gem_efficiency_measured(&cfg, &p).unwrap().sigma;
        p.amplitude = Complex64::from_polar(1.0, theta);
        let turned = gem_efficiency_measured(&cfg, &p).unwrap().sigma;
        prop_assert!((base - turned).abs() < 1e-12 * base);
    }

    #[test]
    fn gated_memory_keeps_its_norm(eta in 2.0..20.0f64, off in 7.5..9.0f64) {
        let mut cfg = GemConfig::new(1.0, eta / (2.0 * PI), eta, 2.0, 20.0);
        cfg.coupling = CouplingSchedule::windows(vec![(0.0, off)]);
        let run = gem_evolve(&cfg, &PulseTrain::single(Pulse::new("A", 4.0, 0.5, 1.0))).unwrap();
        let st = &run.state;
        let norms: Vec<f64> = (0..st.times.len())
            .filter(|&k| st.times[k] > off + cfg.dt())
            .map(|k| st.slice(k).iter().map(|a| a.norm_sqr()).sum::<f64>())
            .collect();
        prop_assert!(norms.len() > 10);
        for n in &norms {
            prop_assert!((n / norms[0] - 1.0).abs() < 1e-8);
        }
        prop_assert!(st.slice(0).iter().all(|a| a.norm_sqr() == 0.0));
    }
}
