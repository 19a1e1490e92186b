use microdisk::coupler::*;
use microdisk::losses::*;
use microdisk::wgm::{solve_mode, DiskGeometry, WgmMode};
use microdisk::SPEED_OF_LIGHT;
use proptest::prelude::*;

const UM: f64 = 1e-6;
const WIDTH: f64 = 0.6 * UM;

/// Diameter (µm), l, q, wavelength (nm), Q at 0.3 µm and at 0.6 µm gap.
const TABLE: [(f64, u32, u32, f64, f64, f64); 5] = [
    (30.0, 167, 1, 778.73, 1.55e5, 8.44e6),
    (30.0, 166, 1, 783.27, 1.47e5, 8.05e6),
    (30.0, 159, 2, 780.04, 1.83e5, 8.85e6),
    (15.0, 81, 1, 780.41, 7.66e4, 3.82e6),
    (45.0, 253, 1, 780.15, 2.66e5, 1.40e7),
];

fn mode(row: usize) -> WgmMode<f64> {
    let (d, l, q, lam, _, _) = TABLE[row];
    solve_mode(l, q, &DiskGeometry::silica(d * UM), lam * 1e-9).unwrap()
}

fn model(m: &WgmMode<f64>) -> OverlapModel<f64> {
    let slab = solve_slab_mode(WIDTH, 1.454, 1.0, m.wavelength()).unwrap();
    OverlapModel::new(&slab, m).unwrap()
}

fn coupler(model: &OverlapModel<f64>, gap: f64) -> CouplerMatrix<f64> {
    let geom = CouplerGeometry::new(gap, WIDTH).unwrap();
    transmission_with_model(model, &geom, &CouplerOptions::default()).unwrap()
}

fn budget(
    m: &WgmMode<f64>,
    t: &CouplerMatrix<f64>,
    surface: &SurfaceParams<f64>,
) -> LossBudget<f64> {
    let lam = m.wavelength();
    let c = LossComponents {
        q_wgm: Some(m.q_wgm()),
        q_material: Some(q_material(1.454, attenuation_from_db_per_km(5.0), lam)),
        q_surface: Some(q_surface(m.geometry.diameter, lam, surface)),
        q_coupling: t.q_coup(),
    };
    total_q(&c, m.k_re, m.l).unwrap()
}

/// Bisection on the even TE slab relation `κ tan(κ w/2) = γ`.
fn slab_beta_oracle(width: f64, n_core: f64, n_clad: f64, lambda: f64) -> f64 {
    let k = std::f64::consts::TAU / lambda;
    let f = |b: f64| {
        let kc = (k * k * n_core * n_core - b * b).sqrt();
        let g = (b * b - k * k * n_clad * n_clad).sqrt();
        kc * (kc * width / 2.0).tan() - g
    };
    // first branch: κ w/2 below π/2
    let mut lo = (k * k * n_core * n_core - (std::f64::consts::PI / width).powi(2))
        .sqrt()
        .max(k * n_clad)
        * (1.0 + 1e-15);
    let mut hi = k * n_core * (1.0 - 1e-15);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        // f falls as β grows
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn slab_propagation_constant_matches_bisection() {
    for (w, lam) in [(0.6 * UM, 780e-9), (0.3 * UM, 780e-9), (0.4 * UM, 852e-9)] {
        let s = solve_slab_mode(w, 1.454, 1.0, lam).unwrap();
        let b = slab_beta_oracle(w, 1.454, 1.0, lam);
        assert!(((s.beta - b) / b).abs() < 1e-10, "w={w}: {} vs {b}", s.beta);
        assert!(s.n_eff() > 1.0 && s.n_eff() < 1.454);
    }
}

#[test]
fn coupling_coefficient_shape() {
    let m = mode(0);
    let slab = solve_slab_mode(WIDTH, 1.454, 1.0, m.wavelength()).unwrap();
    let at = |z: f64, gap: f64| {
        coupling_coefficient(z, &slab, &m, &CouplerGeometry::new(gap, WIDTH).unwrap()).unwrap()
    };
    let c01 = at(0.0, 0.1 * UM);
    let c05 = at(0.0, 0.5 * UM);
    assert!(c01 > c05 && c05 > 0.0);
    let edge = model(&m).window();
    assert!(at(edge, 0.3 * UM).abs() < 1e-4 * at(0.0, 0.3 * UM));
}

#[test]
fn coupling_decays_at_the_slab_rate() {
    let m = mode(0);
    let om = model(&m);
    let slab = om.slab;
    // log-slope of C(0) over a gap interval
    let (g1, g2) = (0.3 * UM, 0.5 * UM);
    let c = |g: f64| {
        om.coefficient(0.0, &CouplerGeometry::new(g, WIDTH).unwrap())
            .unwrap()
    };
    let rate = (c(g1) / c(g2)).ln() / (g2 - g1);
    let halving = std::f64::consts::LN_2 / rate;
    let expected = std::f64::consts::LN_2 / slab.gamma;
    assert!(
        ((halving - expected) / expected).abs() < 0.15,
        "{halving:e} vs {expected:e}"
    );
}

#[test]
fn far_gap_decouples_and_power_is_conserved() {
    let m = mode(0);
    let om = model(&m);
    assert!(coupler(&om, 3.0 * UM).t12_abs2() < 1e-8);
    for gap in [0.1 * UM, 0.3 * UM, 0.6 * UM] {
        let t = coupler(&om, gap);
        assert!(t.power_error < 1e-8, "gap {gap}: drift {}", t.power_error);
        assert!(t.t11.norm() <= 1.0 && t.t12.norm() <= 1.0);
        assert!(t.t11.norm_sqr() + t.t21.norm_sqr() <= 1.0 + 1e-6);
        assert!((t.t12.norm() - t.t21.norm()).abs() < 1e-9);
    }
}

#[test]
fn coupling_falls_monotonically_with_gap() {
    for row in 0..TABLE.len() {
        let om = model(&mode(row));
        let gaps: Vec<f64> = (0..=29).map(|i| 0.05 * UM + 0.05 * UM * i as f64).collect();
        let t: Vec<f64> = gaps.iter().map(|g| coupler(&om, *g).t12.norm()).collect();
        for w in t.windows(2) {
            assert!(w[1] < w[0], "row {row}: {t:?}");
        }
    }
}

#[test]
fn phase_matching_maximizes_transfer() {
    let om = model(&mode(3));
    let geom = CouplerGeometry::new(0.3 * UM, WIDTH).unwrap();
    let mismatched = transmission_with_model(&om, &geom, &CouplerOptions::default()).unwrap();
    let matched = transmission_with_model(
        &om,
        &geom,
        &CouplerOptions {
            phase_matched: true,
            ..CouplerOptions::default()
        },
    )
    .unwrap();
    assert!(matched.t12.norm() > mismatched.t12.norm());
}

#[test]
fn table_quality_factors() {
    let surface = SurfaceParams::typical();
    for (row, (_, _, _, _, q1, q2)) in TABLE.iter().enumerate() {
        let m = mode(row);
        let om = model(&m);
        let near = budget(&m, &coupler(&om, 0.3 * UM), &surface).q_total;
        let far = budget(&m, &coupler(&om, 0.6 * UM), &surface).q_total;
        println!("row {row}: Q1 {near:.3e} (table {q1:.2e}), Q2 {far:.3e} (table {q2:.2e})");
        assert!(far > near);
        assert!(near / q1 < 3.0 && q1 / near < 3.0);
        assert!(far / q2 < 3.0 && q2 / far < 3.0);
    }
}

#[test]
fn loss_rate_does_not_depend_on_gap() {
    let m = mode(0);
    let om = model(&m);
    let surface = SurfaceParams::typical();
    let a = budget(&m, &coupler(&om, 0.3 * UM), &surface);
    let b = budget(&m, &coupler(&om, 0.6 * UM), &surface);
    assert!(((a.kappa_loss - b.kappa_loss) / a.kappa_loss).abs() < 1e-12);
    assert!(a.kappa_t > 2.0 * b.kappa_t);
}

#[test]
fn uncoupled_smooth_disk_reaches_order_1e8() {
    let m = mode(0);
    let uncoupled = CouplerMatrix::from_power_coupling(0.0, &m).unwrap();
    let q = budget(&m, &uncoupled, &SurfaceParams::smooth()).q_total;
    assert!(q > 3e7 && q < 3e8, "{q:e}");
}

#[test]
fn surface_q_matches_hand_evaluation() {
    let q: f64 = q_surface(30e-6, 780e-9, &SurfaceParams::new(2e-9, 10e-9).unwrap());
    assert!(((q - 23_116_428.047_999_36) / q).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn coupling_rate_identity(t12 in 1e-6f64..0.5, row in 0usize..5) {
        let m = mode(row);
        let t = CouplerMatrix::from_power_coupling(t12, &m).unwrap();
        let lhs = SPEED_OF_LIGHT * m.k_re / (2.0 * t.kappa_t());
        let rhs = std::f64::consts::TAU * m.l as f64 / t12;
        prop_assert!(((lhs - rhs) / rhs).abs() < 1e-9);
    }

    #[test]
    fn extra_channel_lowers_total_q(
        a in 1e4f64..1e10, b in 1e4f64..1e10, extra in 1e4f64..1e12,
    ) {
        let base = LossComponents { q_wgm: Some(a), q_surface: Some(b), ..Default::default() };
        let more = LossComponents { q_material: Some(extra), ..base };
        let k = 8e6;
        let q0 = total_q(&base, k, 100).unwrap().q_total;
        let q1 = total_q(&more, k, 100).unwrap().q_total;
        prop_assert!(q1 < q0);
    }
}
