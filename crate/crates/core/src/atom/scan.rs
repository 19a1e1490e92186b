//! Assembly of the full detection model and parameter scans.

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use super::{
    analytic_approximations, detection_metrics, steady_state, strong_coupling_parameter,
    AtomParams, CavitySystem, DetectionMetrics, Drive, RB_D2_DECAY_RATE,
};
use crate::coupler::{
    solve_slab_mode, transmission_with_model, CouplerGeometry, CouplerMatrix, CouplerOptions,
    OverlapModel,
};
use crate::error::{Error, Result};
use crate::losses::{
    attenuation_from_db_per_km, q_material, q_surface, total_q, LossBudget, LossComponents,
    SurfaceParams,
};
use crate::numerics::roots::brent;
use crate::scalar::{lit, to_f64, Real};
use crate::table::{Cell, Row};
use crate::wgm::{solve_mode, DiskGeometry, RabiCoupling, WgmMode};

/// Everything needed to evaluate detection at a given gap and drive.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DetectionSetup<T> {
    pub geometry: DiskGeometry<T>,
    pub l: u32,
    pub q: u32,
    pub wavelength_seed: T,
    pub waveguide_width: T,
    pub surface: SurfaceParams<T>,
    pub attenuation_db_per_km: T,
    pub decay_rate: T,
    /// Δa in rad/s.
    pub atomic_detuning: T,
    /// Atom distance outside the rim, m.
    pub atom_distance: T,
    pub atom_azimuth: T,
    pub interaction_time: T,
}

impl<T: Real> DetectionSetup<T> {
    /// Rb atom 50 nm from the rim, `Δa = 100 Γ`, `τ = 10 µs`, 0.6 µm
    /// waveguide, 5 dB/km material loss and 2 nm / 10 nm roughness.
    pub fn standard(geometry: DiskGeometry<T>, l: u32, q: u32, wavelength_seed: T) -> Self {
        let gamma: T = lit(RB_D2_DECAY_RATE);
        DetectionSetup {
            geometry,
            l,
            q,
            wavelength_seed,
            waveguide_width: lit(0.6e-6),
            surface: SurfaceParams::typical(),
            attenuation_db_per_km: lit(5.0),
            decay_rate: gamma,
            atomic_detuning: gamma * lit(100.0),
            atom_distance: lit(50e-9),
            atom_azimuth: T::zero(),
            interaction_time: lit(10e-6),
        }
    }
}

/// Prepared mode, coupling and intrinsic losses for a [`DetectionSetup`].
#[derive(Clone, Debug)]
pub struct Assembly<T> {
    pub setup: DetectionSetup<T>,
    pub mode: WgmMode<T>,
    pub rabi: RabiCoupling<T>,
    pub overlap: OverlapModel<T>,
    /// Coupling at the atom position, rad/s.
    pub g: T,
    pub coupler_options: CouplerOptions<T>,
}

impl<T: Real> Assembly<T> {
    pub fn new(setup: DetectionSetup<T>) -> Result<Self> {
        if !(setup.interaction_time > T::zero()) {
            return Err(Error::InvalidInput(
                "interaction time must be positive".into(),
            ));
        }
        if !(setup.atom_distance >= T::zero()) {
            return Err(Error::InvalidInput("atom must sit outside the disk".into()));
        }
        let mode = solve_mode(setup.l, setup.q, &setup.geometry, setup.wavelength_seed)?;
        let rabi = RabiCoupling::new(&mode, setup.decay_rate)?;
        let g = rabi.at_distance(setup.atom_distance)?;
        let slab = solve_slab_mode(
            setup.waveguide_width,
            setup.geometry.n_core,
            setup.geometry.n_clad,
            mode.wavelength(),
        )?;
        let overlap = OverlapModel::new(&slab, &mode)?;
        Ok(Assembly {
            setup,
            mode,
            rabi,
            overlap,
            g,
            coupler_options: CouplerOptions::default(),
        })
    }

    pub fn coupler(&self, gap: T) -> Result<CouplerMatrix<T>> {
        let geom = CouplerGeometry::new(gap, self.setup.waveguide_width)?;
        transmission_with_model(&self.overlap, &geom, &self.coupler_options)
    }

    /// Loss budget with the given coupler.
    pub fn budget(&self, coupler: &CouplerMatrix<T>) -> Result<LossBudget<T>> {
        let lam = self.mode.wavelength();
        let s = &self.setup;
        let comps = LossComponents {
            q_wgm: Some(self.mode.q_wgm()),
            q_material: Some(q_material(
                s.geometry.n_core,
                attenuation_from_db_per_km(s.attenuation_db_per_km),
                lam,
            )),
            q_surface: Some(q_surface(s.geometry.diameter, lam, &s.surface)),
            q_coupling: coupler.q_coup(),
        };
        total_q(&comps, self.mode.k_re, self.mode.l)
    }

    pub fn atom(&self) -> AtomParams<T> {
        AtomParams {
            decay_rate: self.setup.decay_rate,
            detuning: self.setup.atomic_detuning,
            radius: self.mode.geometry.radius() + self.setup.atom_distance,
            azimuth: self.setup.atom_azimuth,
        }
    }

    pub fn system(
        &self,
        coupler: &CouplerMatrix<T>,
        budget: &LossBudget<T>,
        drive: &Drive<T>,
    ) -> Result<CavitySystem<T>> {
        CavitySystem::new(
            budget.kappa,
            coupler,
            self.g,
            self.mode.l,
            self.setup.atom_azimuth,
            drive,
        )
    }

    /// Full evaluation at one coupler and drive.
    pub fn evaluate(&self, coupler: &CouplerMatrix<T>, drive: &Drive<T>) -> Result<Evaluation<T>> {
        let budget = self.budget(coupler)?;
        let sys = self.system(coupler, &budget, drive)?;
        let atom = self.atom();
        let metrics = detection_metrics(&sys, &atom, self.setup.interaction_time)?;
        Ok(Evaluation {
            budget,
            system: sys,
            metrics,
            strong_coupling: strong_coupling_parameter(&sys, &atom),
            approx_m10: analytic_approximations(&sys, &atom, self.setup.interaction_time).m10,
        })
    }
}

/// Result of [`Assembly::evaluate`].
#[derive(Clone, Copy, Debug)]
pub struct Evaluation<T> {
    pub budget: LossBudget<T>,
    pub system: CavitySystem<T>,
    pub metrics: DetectionMetrics<T>,
    pub strong_coupling: T,
    pub approx_m10: T,
}

/// One scan table row.
#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub x: f64,
    pub s: f64,
    pub m: f64,
    pub m10: Option<f64>,
    pub rho11: f64,
    pub q_total: f64,
    pub kappa_t: f64,
    pub kappa_loss: f64,
    pub strong_coupling: f64,
    pub flags: Vec<&'static str>,
}

pub const SCAN_TABLE_HEADER: [&str; 10] = [
    "x",
    "S",
    "M",
    "M10",
    "rho11",
    "Q_total",
    "kappa_T",
    "kappa_loss",
    "g2_over_kappa_gamma",
    "flags",
];

impl ScanRow {
    fn new<T: Real>(x: T, e: &Evaluation<T>) -> Self {
        let mut flags = Vec::new();
        if e.metrics.m10_divergent() {
            flags.push("divergent");
        }
        if e.metrics.with_atom.bistable {
            flags.push("bistable");
        }
        ScanRow {
            x: to_f64(x),
            s: to_f64(e.metrics.s),
            m: to_f64(e.metrics.m),
            m10: e.metrics.m10.map(to_f64),
            rho11: to_f64(e.metrics.with_atom.rho11),
            q_total: to_f64(e.budget.q_total),
            kappa_t: to_f64(e.budget.kappa_t),
            kappa_loss: to_f64(e.budget.kappa_loss),
            strong_coupling: to_f64(e.strong_coupling),
            flags,
        }
    }

    pub fn ratio_coupling_to_loss(&self) -> f64 {
        self.kappa_t / self.kappa_loss
    }
}

impl Row for ScanRow {
    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Float(self.x),
            Cell::Float(self.s),
            Cell::Float(self.m),
            match self.m10 {
                Some(v) => Cell::Float(v),
                None => Cell::Text("divergent".into()),
            },
            Cell::Float(self.rho11),
            Cell::Float(self.q_total),
            Cell::Float(self.kappa_t),
            Cell::Float(self.kappa_loss),
            Cell::Float(self.strong_coupling),
            Cell::Text(self.flags.join(";")),
        ]
    }
}

fn ordered<T, F>(xs: &[T], f: F) -> Result<Vec<ScanRow>>
where
    T: Real,
    F: Fn(T) -> Result<ScanRow> + Sync,
{
    if xs.is_empty() {
        return Err(Error::InvalidInput("scan range is empty".into()));
    }
    xs.par_iter().map(|&x| f(x)).collect()
}

/// `|A_in|²` scan at a fixed gap.
pub fn scan_pump<T: Real>(asm: &Assembly<T>, gap: T, fluxes: &[T]) -> Result<Vec<ScanRow>> {
    let coupler = asm.coupler(gap)?;
    ordered(fluxes, |p| {
        let e = asm.evaluate(&coupler, &Drive::forward(p))?;
        Ok(ScanRow::new(p, &e))
    })
}

/// Gap scan at fixed pump; the row with the smallest `M10` is flagged `optimum`.
pub fn scan_gap<T: Real>(asm: &Assembly<T>, gaps: &[T], flux: T) -> Result<Vec<ScanRow>> {
    let mut rows = ordered(gaps, |gap| {
        let c = asm.coupler(gap)?;
        let e = asm.evaluate(&c, &Drive::forward(flux))?;
        Ok(ScanRow::new(gap, &e))
    })?;
    let best = rows
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.m10.map(|m| (i, m)))
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    if let Some((i, _)) = best {
        rows[i].flags.push("optimum");
    }
    Ok(rows)
}

/// Sign of the cavity detuning relative to the mode coupling in [`scan_epsilon`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DetuningChoice {
    Zero,
    PlusEpsilon,
    MinusEpsilon,
}

/// `ε / κ_loss` scan at a fixed gap, `ε` real.
pub fn scan_epsilon<T: Real>(
    asm: &Assembly<T>,
    gap: T,
    ratios: &[T],
    detuning: DetuningChoice,
    flux: T,
) -> Result<Vec<ScanRow>> {
    let coupler = asm.coupler(gap)?;
    let kappa_loss = asm.budget(&coupler)?.kappa_loss;
    ordered(ratios, |ratio| {
        let eps = ratio * kappa_loss;
        let mut drive = Drive::forward(flux);
        drive.epsilon = Complex::new(eps, T::zero());
        drive.cavity_detuning = match detuning {
            DetuningChoice::Zero => T::zero(),
            DetuningChoice::PlusEpsilon => eps,
            DetuningChoice::MinusEpsilon => -eps,
        };
        let e = asm.evaluate(&coupler, &drive)?;
        Ok(ScanRow::new(ratio, &e))
    })
}

/// Gap at which the empty-cavity forward output vanishes on resonance,
/// i.e. `|t11| = 2 κ_T / κ`, searched in `[lo, hi]`.
pub fn critical_gap<T: Real>(asm: &Assembly<T>, lo: T, hi: T) -> Result<T> {
    let h = |gap: T| -> T {
        match asm
            .coupler(gap)
            .and_then(|c| asm.budget(&c).map(|b| (c, b)))
        {
            Ok((c, b)) => c.t11.norm() - lit::<T>(2.0) * b.kappa_t / b.kappa,
            Err(_) => T::nan(),
        }
    };
    let n = 16;
    let mut a = lo;
    let mut fa = h(a);
    for i in 1..=n {
        let b = lo + (hi - lo) * lit(i as f64) / lit(n as f64);
        let fb = h(b);
        if fa.is_finite() && fb.is_finite() && (fa > T::zero()) != (fb > T::zero()) {
            return brent(h, a, b, T::zero());
        }
        a = b;
        fa = fb;
    }
    Err(Error::Search(
        "no critical coupling in the gap range".into(),
    ))
}

/// Minimises `M10` over the gap: coarse scan with step `step`, then golden
/// section around the best sample.
pub fn optimize_gap<T: Real>(
    asm: &Assembly<T>,
    lo: T,
    hi: T,
    step: T,
    flux: T,
) -> Result<(T, Evaluation<T>)> {
    let n = to_f64((hi - lo) / step).round().max(2.0) as usize;
    let gaps: Vec<T> = (0..=n)
        .map(|i| lo + (hi - lo) * lit(i as f64) / lit(n as f64))
        .collect();
    let drive = Drive::forward(flux);
    let eval = |gap: T| -> Result<Evaluation<T>> { asm.evaluate(&asm.coupler(gap)?, &drive) };
    let cost = |e: &Evaluation<T>| e.metrics.m10.unwrap_or(T::infinity());
    let coarse: Vec<Result<Evaluation<T>>> = gaps.par_iter().map(|&g| eval(g)).collect();
    let mut best = (0usize, T::infinity());
    for (i, r) in coarse.iter().enumerate() {
        let c = cost(r.as_ref().map_err(|e| e.clone())?);
        if c < best.1 {
            best = (i, c);
        }
    }
    let i = best.0;
    let mut a = gaps[i.saturating_sub(1)];
    let mut b = gaps[(i + 1).min(n)];
    let ratio: T = lit((5f64.sqrt() - 1.0) / 2.0);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let mut f1 = cost(&eval(x1)?);
    let mut f2 = cost(&eval(x2)?);
    for _ in 0..30 {
        if (b - a) < lit(1e-12) {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = cost(&eval(x1)?);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = cost(&eval(x2)?);
        }
    }
    let gap = if f1 < f2 { x1 } else { x2 };
    let e = eval(gap)?;
    if cost(&e) > best.1 {
        let e0 = coarse.into_iter().nth(i).unwrap()?;
        return Ok((gaps[i], e0));
    }
    Ok((gap, e))
}

/// Steady state at a given coupler and drive; convenience for scripts.
pub fn steady_state_at<T: Real>(
    asm: &Assembly<T>,
    coupler: &CouplerMatrix<T>,
    drive: &Drive<T>,
) -> Result<super::SteadyState<T>> {
    let budget = asm.budget(coupler)?;
    steady_state(&asm.system(coupler, &budget, drive)?, &asm.atom())
}
