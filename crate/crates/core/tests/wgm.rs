use microdisk::atom::RB_D2_DECAY_RATE;
use microdisk::wgm::*;
use num_complex::Complex;
use proptest::prelude::*;

/// Published resonances: diameter (µm), l, q, wavelength (nm), g0/2π (MHz).
const TABLE: [(f64, u32, u32, f64, f64); 5] = [
    (30.0, 167, 1, 778.73, 102.6),
    (30.0, 166, 1, 783.27, 103.2),
    (30.0, 159, 2, 780.04, 102.8),
    (15.0, 81, 1, 780.41, 205.7),
    (45.0, 253, 1, 780.15, 68.5),
];

fn disk(d_um: f64) -> DiskGeometry<f64> {
    DiskGeometry::silica(d_um * 1e-6)
}

fn table_mode(row: usize) -> WgmMode<f64> {
    let (d, l, q, lam, _) = TABLE[row];
    solve_mode(l, q, &disk(d), lam * 1e-9).unwrap()
}

#[test]
fn table_wavelengths() {
    for (row, (_, _, q, lam, _)) in TABLE.iter().enumerate() {
        let m = table_mode(row);
        let tol = if *q == 2 { 0.15 } else { 0.1 };
        let got = m.wavelength() * 1e9;
        assert!((got - lam).abs() < tol, "row {row}: {got:.3} vs {lam}");
        assert!(m.k_im > 0.0);
        assert_eq!(m.q_wgm(), m.k_re / (2.0 * m.k_im));
        let res = dispersion_residual(m.k(), m.l, &m.geometry).unwrap();
        assert!(res.norm() < 1e-9, "row {row}: residual {res}");
    }
}

#[test]
fn radial_extrema_match_the_radial_order() {
    for (row, (_, l, q, _, _)) in TABLE.iter().enumerate() {
        let m = table_mode(row);
        assert_eq!(
            count_radial_extrema(*l, m.k_re, &m.geometry).unwrap(),
            *q,
            "row {row}"
        );
    }
}

#[test]
fn radiative_q_grows_with_diameter() {
    let q: Vec<f64> = [15.0, 30.0, 45.0]
        .iter()
        .map(|d| find_resonance_near(780e-9, &disk(*d), 1).unwrap().q_wgm())
        .collect();
    assert!(q[0] < q[1] && q[1] < q[2], "{q:?}");
}

#[test]
fn nearest_resonance_orders() {
    let l = |d| find_resonance_near(780e-9, &disk(d), 1).unwrap().l;
    assert!([166, 167].contains(&l(30.0)));
    assert_eq!(l(45.0), 253);
    assert_eq!(l(15.0), 81);
}

#[test]
fn free_spectral_range_at_thirty_microns() {
    let m = table_mode(0);
    let fsr = free_spectral_range(&m);
    let spacing = fsr.adjacent_wavelength.unwrap() * 1e9;
    assert!((spacing - 4.54).abs() < 0.1, "{spacing}");
    // ck/l ignores dispersion and sits a few percent above the true spacing
    let ratio = fsr.approx_angular / fsr.adjacent_angular.unwrap();
    assert!(ratio > 1.02 && ratio < 1.05, "{ratio}");
}

#[test]
fn free_spectral_range_scales_inversely_with_diameter() {
    let products: Vec<f64> = [15.0, 30.0, 45.0]
        .iter()
        .map(|d| {
            let m = find_resonance_near(780e-9, &disk(*d), 1).unwrap();
            free_spectral_range(&m).adjacent_wavelength.unwrap() * d
        })
        .collect();
    let mean = products.iter().sum::<f64>() / 3.0;
    for p in &products {
        assert!(((p - mean) / mean).abs() < 0.1, "{products:?}");
    }
}

#[test]
fn field_is_pinned_at_the_rim_and_decays() {
    let m = table_mode(0);
    let r = m.geometry.radius();
    assert_eq!(mode_field(&m, r).unwrap(), Complex::new(1.0, 0.0));
    let near = mode_field(&m, r + 50e-9).unwrap().norm();
    let far = mode_field(&m, r + 500e-9).unwrap().norm();
    assert!(far < near);
}

#[test]
fn evanescent_tail_follows_the_decay_constant() {
    for row in 0..TABLE.len() {
        let m = table_mode(row);
        let r = m.geometry.radius();
        // least-squares slope of ln|E| over 100..300 nm
        let pts: Vec<(f64, f64)> = (0..=20)
            .map(|i| {
                let d = 100e-9 + 10e-9 * i as f64;
                (d, mode_field(&m, r + d).unwrap().norm().ln())
            })
            .collect();
        let n = pts.len() as f64;
        let (mx, my) = pts
            .iter()
            .fold((0.0, 0.0), |a, p| (a.0 + p.0 / n, a.1 + p.1 / n));
        let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |a, p| {
            (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx).powi(2))
        });
        let fitted = -sxy / sxx;
        // local WKB decay rate averaged over the window
        let (l, kc) = (m.l as f64, m.k_re * m.geometry.n_clad);
        let expected = (0..=200)
            .map(|i| {
                let rr = r + 100e-9 + 1e-9 * i as f64;
                ((l / rr).powi(2) - kc * kc).sqrt()
            })
            .sum::<f64>()
            / 201.0;
        assert!(evanescent_decay(&m) > fitted);
        assert!(
            ((fitted - expected) / expected).abs() < 0.05,
            "row {row}: {fitted:e} vs {expected:e}"
        );
    }
}

#[test]
fn rabi_frequencies_match_the_table() {
    for (row, (_, _, _, _, g0)) in TABLE.iter().enumerate() {
        let m = table_mode(row);
        let rabi = RabiCoupling::new(&m, RB_D2_DECAY_RATE).unwrap();
        let mhz = angular_to_mhz(rabi.g_rim);
        assert!(((mhz - g0) / g0).abs() < 0.1, "row {row}: {mhz:.1} vs {g0}");
        let g50 = rabi.at_distance(50e-9).unwrap();
        let g100 = rabi.at_distance(100e-9).unwrap();
        assert!(g100 > 0.0 && g50 / g100 > 1.0);
        assert!(rabi.at_distance(2e-6).unwrap() < 0.01 * rabi.g_rim);
    }
}

#[test]
fn rabi_ordering_with_diameter() {
    let g = |row| {
        RabiCoupling::new(&table_mode(row), RB_D2_DECAY_RATE)
            .unwrap()
            .g_rim
    };
    assert!(g(3) > g(0) && g(0) > g(4));
}

#[test]
fn normalization_is_converged() {
    let m = table_mode(0);
    let a = normalization_integral(&m, 1e-8).unwrap();
    let b = normalization_integral(&m, 1e-9).unwrap();
    assert!(((a - b) / b).abs() < 1e-6);
    let direct = rabi_frequency(&m, m.geometry.radius(), RB_D2_DECAY_RATE).unwrap();
    let rabi = RabiCoupling::new(&m, RB_D2_DECAY_RATE).unwrap();
    assert_eq!(direct, rabi.g_rim);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn residual_is_smooth(re in 8.05e6f64..8.09e6, im in 0.0f64..50.0) {
        let g = disk(30.0);
        let k = Complex::new(re, -im);
        let h = 0.25;
        let slope = |h: f64| {
            let a = dispersion_residual(k + h, 167, &g).unwrap();
            let b = dispersion_residual(k - h, 167, &g).unwrap();
            (a - b) / (2.0 * h)
        };
        let fine = slope(h);
        let coarse = slope(2.0 * h);
        prop_assert!((fine - coarse).norm() < 1e-6 * fine.norm().max(1e-300), "{fine} vs {coarse}");
    }
}
