use microdisk::atom::{
    critical_gap, scan_epsilon, scan_gap, scan_pump, Assembly, DetectionSetup, DetuningChoice,
    Drive,
};
use microdisk::wgm::DiskGeometry;

fn assembly(d: f64, l: u32) -> Assembly<f64> {
    Assembly::new(DetectionSetup::standard(
        DiskGeometry::silica(d),
        l,
        1,
        780e-9,
    ))
    .unwrap()
}

#[test]
fn pump_scan_rises_peaks_and_saturates() {
    let asm = assembly(30e-6, 167);
    let fluxes: Vec<f64> = (0..=24)
        .map(|i| 10f64.powf(6.0 + 0.25 * i as f64))
        .collect();
    let rows = scan_pump(&asm, 0.3e-6, &fluxes).unwrap();
    let peak = rows
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.s.partial_cmp(&b.1.s).unwrap())
        .unwrap()
        .0;
    assert!(peak > 0 && peak < rows.len() - 1, "peak at {peak}");
    assert!(rows[0].s < 0.5 * rows[peak].s);
    assert!(rows.last().unwrap().s < 0.5 * rows[peak].s);
    // M approaches Γτ
    let gamma_tau = asm.setup.decay_rate * asm.setup.interaction_time;
    let m_last = rows.last().unwrap().m;
    assert!(
        m_last < gamma_tau && m_last > 0.9 * gamma_tau,
        "{m_last} vs {gamma_tau}"
    );
    for w in rows.windows(2) {
        assert!(w[1].m >= w[0].m);
    }
}

#[test]
fn critical_coupling_gives_no_signal() {
    let asm = assembly(15e-6, 81);
    let gap = critical_gap(&asm, 0.3e-6, 1.0e-6).unwrap();
    let c = asm.coupler(gap).unwrap();
    let e = asm.evaluate(&c, &Drive::forward(1e8)).unwrap();
    assert_eq!(e.metrics.s, 0.0);
    assert!(e.metrics.m10_divergent());
    let rows = scan_gap(&asm, &[gap], 1e8).unwrap();
    assert!(rows[0].flags.contains(&"divergent"));
    // far from the critical point the signal is finite
    let rows = scan_gap(&asm, &[gap - 0.1e-6, gap + 0.1e-6], 1e8).unwrap();
    assert!(rows.iter().all(|r| r.m10.is_some()));
}

#[test]
fn gap_scan_flags_a_single_optimum_in_order() {
    let asm = assembly(15e-6, 81);
    let gaps = [0.5e-6, 0.55e-6, 0.6e-6, 0.65e-6, 0.7e-6];
    let rows = scan_gap(&asm, &gaps, 1e8).unwrap();
    for (r, g) in rows.iter().zip(gaps) {
        assert_eq!(r.x, g);
    }
    assert_eq!(
        rows.iter().filter(|r| r.flags.contains(&"optimum")).count(),
        1
    );
    assert!(scan_gap(&asm, &[], 1e8).is_err());
}

#[test]
fn epsilon_scan_detuning_branches() {
    let asm = assembly(15e-6, 81);
    let ratios = [0.0, 1.0, 10.0, 100.0];
    let zero = scan_epsilon(&asm, 0.62e-6, &ratios, DetuningChoice::Zero, 1e8).unwrap();
    let plus = scan_epsilon(&asm, 0.62e-6, &ratios, DetuningChoice::PlusEpsilon, 1e8).unwrap();
    let minus = scan_epsilon(&asm, 0.62e-6, &ratios, DetuningChoice::MinusEpsilon, 1e8).unwrap();
    // without mode coupling the three branches coincide
    assert_eq!(zero[0].s, plus[0].s);
    assert_eq!(zero[0].s, minus[0].s);
    // strong mode coupling off the split resonances suppresses the cavity field
    assert!(zero[3].s < 0.1 * zero[0].s);
    // tuned to one split resonance the signal survives
    assert!(plus[3].s > 10.0 * zero[3].s);
}
