//! Solves one mode of a 30 um disk and finds the gap with the lowest M10.

use microdisk::atom::{optimize_gap, Assembly, DetectionSetup, RB_D2_DECAY_RATE};
use microdisk::wgm::{angular_to_mhz, solve_mode, DiskGeometry, RabiCoupling};

fn main() -> microdisk::Result<()> {
    let disk = DiskGeometry::<f64>::silica(30e-6);
    let mode = solve_mode(167, 1, &disk, 780.3e-9)?;
    let rabi = RabiCoupling::new(&mode, RB_D2_DECAY_RATE)?;
    println!(
        "lambda = {:.3} nm, Q_wgm = {:.3e}, g/2pi at rim = {:.1} MHz",
        mode.wavelength() * 1e9,
        mode.q_wgm(),
        angular_to_mhz(rabi.g_rim)
    );

    let asm = Assembly::new(DetectionSetup::standard(disk, 167, 1, 780.3e-9))?;
    let (gap, best) = optimize_gap(&asm, 0.45e-6, 0.85e-6, 0.02e-6, 1e8)?;
    println!(
        "best gap {:.3} um: S = {:.2}, M = {:.2}, M10 = {:.3}",
        gap * 1e6,
        best.metrics.s,
        best.metrics.m,
        best.metrics.m10.unwrap_or(f64::INFINITY)
    );
    Ok(())
}
