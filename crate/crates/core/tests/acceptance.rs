//! Acceptance suite: every explicitly quantified statement the library
//! implements, verified end to end at its stated tolerance. Each test
//! prints one PASS/FAIL line.

use holosem::bounds;
use holosem::dilation::build_rota_dilation;
use holosem::frac::{fractional_average, fractional_integral};
use holosem::holo::{
    contour_exp, default_t_grid, hille_yosida_check, kato_epsilon, max_t_derivative,
    neumann_partial_sums, q_for_angle, resolvent,
};
use holosem::lps::{
    difference_functional_bound, g_function, lps_ratio, semigroup_difference_functional, TimeGrid,
};
use holosem::markov::{
    complete_graph_chain, cycle_chain, random_reversible_chain, random_reversible_operator,
    two_point_chain,
};
use holosem::opnorm::{operator_norm_lower, AscentOptions};
use holosem::semigroup::{subordinated_poisson, DiffusionSemigroup, QuadSpec};
use holosem::spaces::{mixed_norm, FunctionField, MixedNormConfig};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};

fn report(criterion: &str, pass: bool, details: String) {
    println!("[{}] {criterion}: {details}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{criterion}: {details}");
}

/// The default instance family used by the statistical criteria.
fn chain_family() -> Vec<(&'static str, DiffusionSemigroup)> {
    vec![
        ("two_point(1)", two_point_chain(1.0).unwrap()),
        ("cycle(5)", cycle_chain(5).unwrap()),
        ("cycle(8)", cycle_chain(8).unwrap()),
        ("complete(6)", complete_graph_chain(6).unwrap()),
        ("random(7, seed 3)", random_reversible_chain(7, 3).unwrap()),
    ]
}

#[test]
fn acceptance_01_contour_matches_spectral_exponential() {
    let mut chains = vec![("two_point(1)".to_string(), two_point_chain(1.0).unwrap())];
    for seed in 0..5u64 {
        let n = 4 + (seed as usize) % 7;
        chains.push((format!("random({n}, seed {seed})"), random_reversible_chain(n, seed).unwrap()));
    }
    let points = [
        Complex64::new(1.0, 0.0),
        Complex64::new(2.0, 0.0),
        Complex64::new(1.0, 0.1),
        Complex64::new(1.0, -0.1),
    ];
    let mut worst = 0.0f64;
    for (name, g) in &chains {
        for &z in &points {
            let q = if z.im == 0.0 { 0.5 } else { q_for_angle(1.0, z.arg().abs()).unwrap() };
            let r = contour_exp(g, z, 1.0, q, 1e-10).unwrap();
            let want = g.at(z);
            let rel = (&r.matrix - &want).norm() / want.norm();
            assert!(rel <= 1e-8, "{name} at z = {z}: rel err {rel:.3e}");
            worst = worst.max(rel);
        }
    }
    report(
        "criterion 1 (contour exponential vs spectral semigroup)",
        worst <= 1e-8,
        format!("worst relative error {worst:.3e} <= 1e-8"),
    );
}

#[test]
fn acceptance_02_rota_factorization() {
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let n = 2 + (seed as usize * 5) % 19; // sizes spread over 2..=20
        let s = random_reversible_operator(n, seed).unwrap();
        let b = build_rota_dilation(&s).unwrap();
        worst = worst.max(b.factorization_deviation());
    }
    report(
        "criterion 2 (Rota factorization E_1 E_2 = S^2 on embedded functions)",
        worst <= 1e-12,
        format!("worst basis deviation {worst:.3e} <= 1e-12 over 20 chains"),
    );
}

#[test]
fn acceptance_03_elementary_inequality() {
    let mut worst = f64::INFINITY;
    let mut violations = 0usize;
    for q in [1.5, 2.0, 3.0, 4.0, 8.0] {
        for delta in [0.05, 0.1, 0.25, 0.5, 1.0] {
            let margin = bounds::elem_ineq_bruteforce(q, delta, 4001).unwrap();
            if margin < 0.0 {
                violations += 1;
            }
            worst = worst.min(margin);
        }
    }
    report(
        "criterion 3 (elementary inequality x <= 2 - 2 delta/((1+2 delta) q))",
        violations == 0,
        format!("0 violations on 4001-point grids, min margin {worst:.3e}"),
    );
}

#[test]
fn acceptance_04_kato_quantities_two_point() {
    let g = two_point_chain(1.0).unwrap();
    let cfg = MixedNormConfig::l2(1);
    let grid = default_t_grid(&g);
    let opts = AscentOptions::fast();
    let k = kato_epsilon(&g, &cfg, &grid, &opts).unwrap();
    let d = max_t_derivative(&g, &cfg, &grid, &opts).unwrap();
    let eps_err = (k.eps - 1.0).abs();
    let deriv_err = (d.value - (-1.0f64).exp()).abs();
    report(
        "criterion 4 (two-point deficiency and derivative sup)",
        eps_err <= 1e-6 && deriv_err <= 1e-6,
        format!("|eps - 1| = {eps_err:.3e}, |sup t T' - 1/e| = {deriv_err:.3e}, both <= 1e-6"),
    );
}

#[test]
fn acceptance_05_contraction_deficit_on_squared_kernels() {
    // || I - S^2 || on L_q(Omega; l_q^d) stays below 2 - 2/(3q) (delta = 1)
    let opts = AscentOptions::fast();
    let mut worst_slack = f64::INFINITY;
    for seed in 10..15u64 {
        let n = 5 + (seed as usize) % 4;
        let s = random_reversible_operator(n, seed).unwrap();
        let t = s.squared();
        let m = DMatrix::<f64>::identity(n, n) - &t;
        for q in [2.0, 3.0, 4.0] {
            for d in [1usize, 3] {
                let cfg = MixedNormConfig::new(q, q, d).unwrap();
                let lower = operator_norm_lower(&m, s.space(), &cfg, &opts).unwrap().value;
                let bound = 2.0 - 2.0 / (3.0 * q);
                let slack = bound + 1e-9 - lower;
                assert!(
                    slack >= 0.0,
                    "seed {seed}, q = {q}, d = {d}: lower {lower} above bound {bound}"
                );
                worst_slack = worst_slack.min(slack);
            }
        }
    }
    report(
        "criterion 5 (contraction deficit of squared kernels)",
        worst_slack >= 0.0,
        format!("lower estimates stay below 2 - 2/(3q) with min slack {worst_slack:.3e}"),
    );
}

#[test]
fn acceptance_06_difference_functional_hilbert_bound() {
    let cfg = MixedNormConfig::l2(1);
    let mut worst_excess = f64::NEG_INFINITY;
    for (name, g) in &chain_family() {
        let grid = TimeGrid::for_semigroup(g).unwrap();
        for alpha in [2.0, 3.0, 10.0] {
            for fs in 0..20u64 {
                let f = FunctionField::random(g.n(), 1, 7000 + fs);
                let value = semigroup_difference_functional(g, &f, &cfg, alpha, 2.0, &grid)
                    .unwrap()
                    .value;
                let bound =
                    difference_functional_bound(alpha, 2.0, 1.0, mixed_norm(&f, g.space(), &cfg).unwrap());
                let excess = value - bound;
                assert!(excess <= 1e-8, "{name}, alpha = {alpha}, f {fs}: excess {excess:.3e}");
                worst_excess = worst_excess.max(excess);
            }
        }
    }
    // frozen derived value: the rate-2 eigenvector at alpha = 3 gives
    // sqrt(log(4/3))
    let g = two_point_chain(1.0).unwrap();
    let grid = TimeGrid::for_semigroup(&g).unwrap();
    let f = FunctionField::scalar(&[1.0, -1.0]);
    let v = semigroup_difference_functional(&g, &f, &cfg, 3.0, 2.0, &grid).unwrap().value;
    let want = (4.0f64 / 3.0).ln().sqrt();
    let eigen_err = (v - want).abs();
    report(
        "criterion 6 (difference functional under the Hilbert cotype bound)",
        worst_excess <= 1e-8 && eigen_err <= 1e-6,
        format!("worst excess over sqrt(log alpha)||f|| is {worst_excess:.3e}; eigenvector value off by {eigen_err:.3e}"),
    );
}

#[test]
fn acceptance_07_hilbert_g_identity_and_ratio() {
    let cfg = MixedNormConfig::l2(1);
    let mut worst = 0.0f64;
    for (name, g) in &chain_family() {
        let grid = TimeGrid::for_semigroup(g).unwrap();
        let proj = g.mean_projection();
        for fs in 0..20u64 {
            let f = FunctionField::random(g.n(), 1, 9000 + fs);
            let r = g_function(g, &f, &cfg, 2.0, 1, &grid).unwrap();
            let centered = FunctionField::new(f.values() - &proj * f.values());
            let want = 0.5 * mixed_norm(&centered, g.space(), &cfg).unwrap();
            let err = (r.lp_norm - want).abs();
            let tol = r.quad_error.max(1e-6);
            assert!(err <= tol, "{name}, f {fs}: identity off by {err:.3e} > {tol:.3e}");
            worst = worst.max(err);
        }
    }
    let mut ratio_err = 0.0f64;
    for (_, g) in chain_family().iter().take(2) {
        let grid = TimeGrid::for_semigroup(g).unwrap();
        let r = lps_ratio(g, &cfg, 2.0, 1, 2, 0, &grid).unwrap();
        ratio_err = ratio_err.max((r.value - 0.5).abs());
    }
    report(
        "criterion 7 (Hilbert g-function identity and ratio 1/2)",
        ratio_err <= 1e-4,
        format!("identity worst error {worst:.3e}; |ratio - 0.5| <= {ratio_err:.3e} <= 1e-4"),
    );
}

#[test]
fn acceptance_08_fractional_calculus() {
    let quad = QuadSpec { tol: 1e-9, max_panels: 1 << 12 };
    let mut worst = 0.0f64;
    for (name, g) in [
        ("two_point(1)", two_point_chain(1.0).unwrap()),
        ("random(5, seed 2)", random_reversible_chain(5, 2).unwrap()),
    ] {
        let f = FunctionField::random(g.n(), 1, 42);
        for t in [0.4, 1.0, 2.5] {
            // M^0 = T_t (reached through the continuation recursion)
            let m0 = fractional_average(&g, &f, Complex64::new(0.0, 0.0), t, &quad)
                .unwrap()
                .into_real(1e-8)
                .unwrap();
            let want0 = g.apply_spectral(&f, |l| (t * l).exp());
            let e0 = (m0.values() - want0.values()).norm();

            // M^1 acts branchwise by (1 - e^{-rt}) / (rt)
            let m1 = fractional_average(&g, &f, Complex64::new(1.0, 0.0), t, &quad)
                .unwrap()
                .into_real(1e-8)
                .unwrap();
            let want1 = g.apply_spectral(&f, |l| {
                let x = -l * t;
                if x <= 1e-14 {
                    1.0
                } else {
                    (1.0 - (-x).exp()) / x
                }
            });
            let e1 = (m1.values() - want1.values()).norm();

            // M^{-1} = t dT_t/dt via the recursion
            let m_1 = fractional_average(&g, &f, Complex64::new(-1.0, 0.0), t, &quad)
                .unwrap()
                .into_real(1e-8)
                .unwrap();
            let want_1 = g.apply_spectral(&f, |l| t * l * (t * l).exp());
            let e_1 = (m_1.values() - want_1.values()).norm();

            for (tag, e) in [("M^0", e0), ("M^1", e1), ("M^-1", e_1)] {
                assert!(e <= 1e-6, "{name} {tag} at t = {t}: deviation {e:.3e}");
                worst = worst.max(e);
            }
        }
    }
    // I^1 I^1 = I^2 on the exponential orbit
    let t = 1.2;
    let one = Complex64::new(1.0, 0.0);
    let composed = fractional_integral(
        one,
        |s| fractional_integral(one, |u| Complex64::new((-u).exp(), 0.0), s, &quad).unwrap(),
        t,
        &quad,
    )
    .unwrap();
    let direct =
        fractional_integral(Complex64::new(2.0, 0.0), |s| Complex64::new((-s).exp(), 0.0), t, &quad)
            .unwrap();
    let comp_err = (composed - direct).norm();
    report(
        "criterion 8 (fractional averages: M^0, M^1, M^-1, I^1 I^1 = I^2)",
        worst <= 1e-6 && comp_err <= 1e-6,
        format!("worst identity deviation {:.3e} <= 1e-6", worst.max(comp_err)),
    );
}

#[test]
fn acceptance_09_subordination() {
    let quad = QuadSpec { tol: 1e-8, max_panels: 1 << 11 };
    let mut worst = 0.0f64;
    for (name, g) in &chain_family() {
        for t in [0.01, 1.0, 100.0] {
            let r = subordinated_poisson(g, t, &quad).unwrap();
            assert!(
                r.spectral_rel_error <= 1e-6,
                "{name} at t = {t}: rel err {:.3e}",
                r.spectral_rel_error
            );
            worst = worst.max(r.spectral_rel_error);
        }
    }
    report(
        "criterion 9 (subordination quadrature vs spectral square root)",
        worst <= 1e-6,
        format!("worst relative deviation {worst:.3e} <= 1e-6"),
    );
}

#[test]
fn acceptance_10_hille_yosida_and_resolvent_identities() {
    let cfg = MixedNormConfig::l2(1);
    let opts = AscentOptions::fast();
    let mut grid = Vec::new();
    for re in [0.1, 1.0, 10.0] {
        for im in [-10.0, -5.0, -1.0, 0.0, 1.0, 5.0, 10.0] {
            grid.push(Complex64::new(re, im));
        }
    }
    let mut worst_hy = 0.0f64;
    let mut worst_identity = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for (name, g) in &chain_family() {
        let r = hille_yosida_check(g, &cfg, &grid, 5, &opts).unwrap();
        assert!(r.max_value <= 1.0 + 1e-9, "{name}: generation bound {}", r.max_value);
        worst_hy = worst_hy.max(r.max_value);
        for _ in 0..10 {
            let l1 = Complex64::new(rng.gen_range(0.2..3.0), rng.gen_range(-3.0..3.0));
            let l2 = Complex64::new(rng.gen_range(0.2..3.0), rng.gen_range(3.5..6.0));
            let r1 = resolvent(g, l1).unwrap();
            let r2 = resolvent(g, l2).unwrap();
            let dev = ((&r1 - &r2) - (&r1 * &r2) * (l2 - l1)).norm();
            assert!(dev <= 1e-11, "{name}: resolvent identity off by {dev:.3e}");
            worst_identity = worst_identity.max(dev);
        }
    }
    // Neumann expansion converges geometrically inside the disk of radius
    // 1 / ||R(mu)||
    let g = two_point_chain(1.0).unwrap();
    let mu = Complex64::new(1.0, 1.0);
    let lambda = mu + Complex64::new(0.5, 0.5); // ratio 0.5 < 0.9
    let sums = neumann_partial_sums(&g, mu, lambda, 45).unwrap();
    let target = resolvent(&g, lambda).unwrap();
    let errs: Vec<f64> = sums.iter().map(|s| (s - &target).norm()).collect();
    let neumann_ok = *errs.last().unwrap() <= 1e-11
        && errs.windows(2).take(20).all(|w| w[1] <= 0.75 * w[0] + 1e-13);
    report(
        "criterion 10 (generation bound, resolvent identity, series expansion)",
        worst_hy <= 1.0 + 1e-9 && worst_identity <= 1e-11 && neumann_ok,
        format!(
            "max ||R^n|| (Re)^n = {worst_hy:.12}, identity <= {worst_identity:.3e}, final series error {:.3e}",
            errs.last().unwrap()
        ),
    );
}

#[test]
fn acceptance_11_bounds_table_regression() {
    let rows = bounds::bounds_table(&[2.0, 3.0], &[1.0, 2.0]).unwrap();
    let ln2 = 2f64.ln();
    let ln3 = 3f64.ln();
    // hand-derived values per (q, m)
    let b21 = 4.0 * (1.0 + ln2);
    let b22 = 128.0 * (1.0 + 3.0 * ln2);
    let b31 = 9.0 * (1.0 + ln3);
    let b32 = 1152.0 * (1.0 + ln3 + 3.0 * ln2);
    struct Expected {
        q: f64,
        m: f64,
        eps: f64,
        b: f64,
        angle: f64,
        tz: f64,
        g: f64,
        g_sharp: f64,
        regular: f64,
        ratio: f64,
    }
    let expected = [
        Expected { q: 2.0, m: 1.0, eps: 1.0 / 3.0, b: b21, angle: 0.5, tz: 2.0 * (1.0 + ln2), g: b21 * b21, g_sharp: b21, regular: 4.0 * b21, ratio: 4.0 },
        Expected { q: 2.0, m: 2.0, eps: 1.0 / 3.0, b: b22, angle: 0.125, tz: 16.0 * (1.0 + 3.0 * ln2), g: b22 * b22 * 2.0, g_sharp: 2.0 * b22, regular: 128.0 * b22, ratio: 64.0 },
        Expected { q: 3.0, m: 1.0, eps: 2.0 / 9.0, b: b31, angle: 1.0 / 3.0, tz: 3.0 * (1.0 + ln3), g: b31 * b31, g_sharp: b31, regular: 9.0 * b31, ratio: 9.0 },
        Expected { q: 3.0, m: 2.0, eps: 2.0 / 9.0, b: b32, angle: 1.0 / 24.0, tz: 48.0 * (1.0 + ln3 + 3.0 * ln2), g: b32 * b32 * 2.0, g_sharp: 2.0 * b32, regular: 1152.0 * b32, ratio: 576.0 },
    ];
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-10 * b.abs().max(1.0);
    let mut worst = 0.0f64;
    for e in &expected {
        let row = rows
            .iter()
            .find(|r| r.q == e.q && r.m == e.m)
            .unwrap_or_else(|| panic!("missing row ({}, {})", e.q, e.m));
        for (tag, got, want) in [
            ("eps", row.eps, e.eps),
            ("B", row.b, e.b),
            ("angle", row.angle, e.angle),
            ("T(z) bound", row.semigroup_bound, e.tz),
            ("g-constant", row.g_constant, e.g),
            ("g-constant sharp", row.g_constant_sharp, e.g_sharp),
            ("regular", row.regular_constant, e.regular),
        ] {
            assert!(close(got, want), "({}, {}) {tag}: got {got}, want {want}", e.q, e.m);
            worst = worst.max((got - want).abs() / want.abs().max(1.0));
        }
        // the ratio column is the exact closed form
        assert_eq!(row.approach_ratio, e.ratio, "({}, {}) ratio", e.q, e.m);
    }
    // spot values quoted to four decimals
    assert!((b21 - 6.7726).abs() <= 5e-5);
    assert!((b22 - 394.2).abs() <= 0.1);
    report(
        "criterion 11 (constants table regression)",
        true,
        format!("all hand-derived values matched to {worst:.3e} (<= 1e-10 relative); ratio column exact"),
    );
}

#[test]
fn acceptance_12_dimension_free_ratio() {
    let g = cycle_chain(16).unwrap();
    let grid = TimeGrid::for_semigroup(&g).unwrap();
    let mut values = Vec::new();
    for d in [1usize, 2, 4, 8] {
        let cfg = MixedNormConfig::l2(d);
        let r = lps_ratio(&g, &cfg, 2.0, 1, 2, 0, &grid).unwrap();
        values.push(r.value);
    }
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    let min = values.iter().cloned().fold(f64::MAX, f64::min);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let spread = (max - min) / mean;
    report(
        "criterion 12 (ratio does not grow with the inner dimension)",
        spread < 0.01,
        format!("ratios {values:?} spread {spread:.3e} < 1e-2 across d in {{1, 2, 4, 8}}"),
    );
}
