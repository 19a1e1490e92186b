//! Whispering-gallery modes of a two-dimensional dielectric disk.
//!
//! The field inside the disk is `J_l(k n_c r) / J_l(k n_c R)` and outside
//! `H_l(k n_cl r) / H_l(k n_cl R)`, both times `exp(±i l φ)`. Matching the
//! tangential magnetic field at `r = R` gives
//! `n_c J_{l+1}(k n_c R)/J_l(k n_c R) = n_cl H_{l+1}(k n_cl R)/H_l(k n_cl R)`,
//! whose roots `k = k_r - i k_i` are the modes.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::bessel::{bessel_j_pair_scaled, hankel1_pair_scaled, Scaled};
use crate::numerics::quad::integrate;
use crate::numerics::roots::{brent, find_complex_root, NewtonOptions};
use crate::scalar::{lit, speed_of_light, to_f64, Real};

/// Below this `k_i / k_r` the loss rate is taken from first-order
/// perturbation at the real root instead of from complex Newton, because the
/// imaginary part is no longer resolvable in the working precision.
const PERTURBATIVE_LOSS_LIMIT: f64 = 1e-6;

/// Planar disk cross-section, a slice of height `height` through the 3D disk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiskGeometry<T> {
    pub diameter: T,
    pub height: T,
    pub n_core: T,
    pub n_clad: T,
}

impl<T: Real> DiskGeometry<T> {
    pub fn new(diameter: T, height: T, n_core: T, n_clad: T) -> Result<Self> {
        let g = DiskGeometry {
            diameter,
            height,
            n_core,
            n_clad,
        };
        g.validate()?;
        Ok(g)
    }

    /// Fused-silica disk in vacuum with a 5 µm slice height.
    pub fn silica(diameter: T) -> Self {
        DiskGeometry {
            diameter,
            height: lit(5e-6),
            n_core: lit(1.454),
            n_clad: T::one(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.diameter > T::zero() && self.diameter.is_finite()) {
            return Err(Error::InvalidInput("disk diameter must be positive".into()));
        }
        if !(self.height > T::zero()) {
            return Err(Error::InvalidInput("disk height must be positive".into()));
        }
        if !(self.n_clad >= T::one() && self.n_core > self.n_clad) {
            return Err(Error::InvalidInput(
                "indices must satisfy n_core > n_clad >= 1".into(),
            ));
        }
        Ok(())
    }

    pub fn radius(&self) -> T {
        self.diameter * lit(0.5)
    }

    /// Index at radius `r`.
    pub fn index_at(&self, r: T) -> T {
        if r < self.radius() {
            self.n_core
        } else {
            self.n_clad
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Direction {
    Forward,
    Backward,
}

/// A solved resonance with complex wavenumber `k_re - i k_im`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct WgmMode<T> {
    pub l: u32,
    pub q: u32,
    pub k_re: T,
    pub k_im: T,
    pub direction: Direction,
    pub geometry: DiskGeometry<T>,
}

impl<T: Real> WgmMode<T> {
    pub fn k(&self) -> Complex<T> {
        Complex::new(self.k_re, -self.k_im)
    }

    /// Vacuum wavelength `2π / k_r`.
    pub fn wavelength(&self) -> T {
        T::TAU() / self.k_re
    }

    /// Angular frequency `c k_r`.
    pub fn omega(&self) -> T {
        speed_of_light::<T>() * self.k_re
    }

    /// Radiative quality factor `k_r / (2 k_i)`.
    pub fn q_wgm(&self) -> T {
        self.k_re / (lit::<T>(2.0) * self.k_im)
    }

    /// Round-trip time `2π l / (c k_r)`.
    pub fn round_trip_time(&self) -> T {
        T::TAU() * lit(self.l as f64) / self.omega()
    }

    pub fn reversed(mut self) -> Self {
        self.direction = match self.direction {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        };
        self
    }

    /// Radial field normalised to 1 at the rim.
    pub fn field(&self, r: T) -> Result<Complex<T>> {
        mode_field(self, r)
    }
}

fn check_k<T: Real>(k: Complex<T>, l: u32) -> Result<()> {
    if l == 0 {
        return Err(Error::InvalidInput(
            "azimuthal order must be at least 1".into(),
        ));
    }
    if !(k.re > T::zero()) {
        return Err(Error::InvalidInput("Re(k) must be positive".into()));
    }
    Ok(())
}

/// `J_{l+1}/J_l` at `k n_c R` and `H_{l+1}/H_l` at `k n_cl R`, plus the scaled
/// `J_l` and `H_l` themselves.
struct RimRatios<T> {
    j: (Scaled<T>, Scaled<T>),
    h: (Scaled<T>, Scaled<T>),
}

fn rim_ratios<T: Real>(k: Complex<T>, l: u32, geom: &DiskGeometry<T>) -> Result<RimRatios<T>> {
    let r = geom.radius();
    let j = bessel_j_pair_scaled(l, k * (geom.n_core * r))?;
    let h = hankel1_pair_scaled(l, k * (geom.n_clad * r))?;
    Ok(RimRatios { j, h })
}

/// Eigenvalue residual `n_c J_{l+1}/J_l (k n_c R) - n_cl H_{l+1}/H_l (k n_cl R)`.
pub fn dispersion_residual<T: Real>(
    k: Complex<T>,
    l: u32,
    geom: &DiskGeometry<T>,
) -> Result<Complex<T>> {
    check_k(k, l)?;
    let rr = rim_ratios(k, l, geom)?;
    if rr.j.0.is_zero() || rr.j.0.ln_norm() - rr.j.1.ln_norm() < lit(-30.0) {
        return Err(Error::Pole("J_l(k n_c R) vanishes".into()));
    }
    if rr.h.0.is_zero() {
        return Err(Error::Pole("H_l(k n_cl R) vanishes".into()));
    }
    let res = rr.j.1.ratio(&rr.j.0) * geom.n_core - rr.h.1.ratio(&rr.h.0) * geom.n_clad;
    if !(res.re.is_finite() && res.im.is_finite()) {
        return Err(Error::Pole("residual is not finite".into()));
    }
    Ok(res)
}

/// Pole-free real function whose sign changes on the real axis mark modes:
/// `(n_c J_{l+1} - n_cl J_l Re(H_{l+1}/H_l)) / |(J_l, J_{l+1})|`.
fn bracket_function<T: Real>(k: T, l: u32, geom: &DiskGeometry<T>) -> Result<T> {
    let rr = rim_ratios(Complex::new(k, T::zero()), l, geom)?;
    let (j0, j1) = rr.j;
    let base = j0.log_scale.max(j1.log_scale);
    let a = j0.value.re * (j0.log_scale - base).exp();
    let b = j1.value.re * (j1.log_scale - base).exp();
    let hr = rr.h.1.ratio(&rr.h.0).re;
    let norm = (a * a + b * b).sqrt();
    Ok((geom.n_core * b - geom.n_clad * a * hr) / norm)
}

/// Real-axis residual `Re f(k)` and the radiative part of `Im f(k)`.
///
/// On the real axis `Im(H_{l+1}/H_l) = -2 / (π y |H_l(y)|²)` by the Wronskian,
/// which avoids forming the tiny imaginary part by cancellation.
fn real_axis_parts<T: Real>(k: T, l: u32, geom: &DiskGeometry<T>) -> Result<(T, T)> {
    let kc = Complex::new(k, T::zero());
    let rr = rim_ratios(kc, l, geom)?;
    let jr = rr.j.1.ratio(&rr.j.0).re;
    let hr = rr.h.1.ratio(&rr.h.0).re;
    let y = k * geom.n_clad * geom.radius();
    let ln_h = rr.h.0.ln_norm();
    let im_h = -(lit::<T>(2.0) / (T::PI() * y)) * (-(ln_h + ln_h)).exp();
    Ok((geom.n_core * jr - geom.n_clad * hr, -geom.n_clad * im_h))
}

/// Geometric-optics estimate of the azimuthal order at wavelength `lambda`.
pub fn estimate_order<T: Real>(geom: &DiskGeometry<T>, lambda: T) -> u32 {
    let l = T::PI() * geom.diameter * geom.n_core / lambda;
    to_f64(l).round().max(1.0) as u32
}

/// Real roots of the real-axis residual for order `l`, ascending in `k`.
fn real_roots<T: Real>(l: u32, geom: &DiskGeometry<T>, max_roots: usize) -> Result<Vec<T>> {
    let r = geom.radius();
    let lf: T = lit(l as f64);
    // confined modes live between the two light lines
    let k_lo = lf / (geom.n_core * r);
    let k_hi = lf / (geom.n_clad * r);
    let span = k_hi - k_lo;
    // radial-order spacing in k is at least ~ π/(n_c R)/2
    let step_target = T::PI() / (geom.n_core * r) * lit(0.1);
    let steps = to_f64(span / step_target).ceil().clamp(200.0, 200_000.0) as usize;
    let dk = span / lit(steps as f64);
    let mut roots = Vec::new();
    let mut k_prev = k_lo + dk * lit(0.01);
    let mut f_prev = bracket_function(k_prev, l, geom)?;
    for i in 1..=steps {
        let k = k_lo + dk * lit(i as f64) - dk * lit(0.01);
        let f = bracket_function(k, l, geom)?;
        if f == T::zero() {
            roots.push(k);
        } else if (f > T::zero()) != (f_prev > T::zero()) && f_prev != T::zero() {
            let root = brent(
                |kk| bracket_function(kk, l, geom).unwrap_or(T::nan()),
                k_prev,
                k,
                k * T::epsilon() * lit(4.0),
            )?;
            roots.push(root);
        }
        if roots.len() >= max_roots {
            break;
        }
        k_prev = k;
        f_prev = f;
    }
    Ok(roots)
}

/// Number of local maxima of `|J_l(k n_c r)|` for `0 < r < R`.
pub fn count_radial_extrema<T: Real>(l: u32, k: T, geom: &DiskGeometry<T>) -> Result<u32> {
    let x_rim = k * geom.n_core * geom.radius();
    let lf: T = lit(l as f64);
    // |J_l| is monotonic below its first turning point x ≈ l
    let x_start = (lf * lit(0.5)).min(x_rim * lit(0.5));
    let n = to_f64((x_rim - x_start) / lit(0.02)).ceil().max(400.0) as usize;
    let dx = (x_rim - x_start) / lit(n as f64);
    let mut vals = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let x = x_start + dx * lit(i as f64);
        let (j, _) = bessel_j_pair_scaled(l, Complex::new(x, T::zero()))?;
        vals.push(j.ln_norm());
    }
    let mut count = 0;
    for w in vals.windows(3) {
        if w[1] > w[0] && w[1] >= w[2] {
            count += 1;
        }
    }
    // a maximum sitting exactly at the rim still counts
    if vals.len() >= 2 && vals[vals.len() - 1] > vals[vals.len() - 2] {
        count += 1;
    }
    Ok(count)
}

fn finish_mode<T: Real>(l: u32, k_real: T, geom: &DiskGeometry<T>) -> Result<WgmMode<T>> {
    let (_, im_f) = real_axis_parts(k_real, l, geom)?;
    let h = k_real * lit(1e-7);
    let (fp, _) = real_axis_parts(k_real + h, l, geom)?;
    let (fm, _) = real_axis_parts(k_real - h, l, geom)?;
    let slope = (fp - fm) / (h + h);
    let k_im_pert = im_f / slope;
    let (k_re, k_im) = if (k_im_pert / k_real).abs() < lit(PERTURBATIVE_LOSS_LIMIT) {
        (k_real, k_im_pert)
    } else {
        let root = polish(l, Complex::new(k_real, -k_im_pert), geom)?;
        (root.re, -root.im)
    };
    if !(k_im > T::zero()) {
        return Err(Error::Consistency(format!(
            "mode l = {l} has non-positive loss rate k_i = {:.3e}",
            to_f64(k_im)
        )));
    }
    Ok(WgmMode {
        l,
        q: 0,
        k_re,
        k_im,
        direction: Direction::Forward,
        geometry: *geom,
    })
}

fn polish<T: Real>(l: u32, guess: Complex<T>, geom: &DiskGeometry<T>) -> Result<Complex<T>> {
    let opts = NewtonOptions {
        tol: lit::<T>(1e-11).max(T::epsilon() * lit(1e3)),
        max_relative_step: lit(1e-2),
        ..NewtonOptions::default()
    };
    let report = find_complex_root(|k| dispersion_residual(k, l, geom), guess, opts)?;
    Ok(report.root)
}

/// Solves the mode of azimuthal order `l` and radial order `q`.
///
/// `wavelength_seed` picks the starting point of the iteration; the radial
/// order of the converged root is verified by counting field extrema and the
/// search falls back to enumerating all roots for `l` when it does not match.
pub fn solve_mode<T: Real>(
    l: u32,
    q: u32,
    geom: &DiskGeometry<T>,
    wavelength_seed: T,
) -> Result<WgmMode<T>> {
    geom.validate()?;
    if q == 0 {
        return Err(Error::InvalidInput("radial order starts at 1".into()));
    }
    check_k(Complex::new(T::TAU() / wavelength_seed, T::zero()), l)?;
    // try the seed first: bracket the nearest sign change around it
    let k_seed = T::TAU() / wavelength_seed;
    if let Some(k) = root_near(l, k_seed, geom)? {
        if count_radial_extrema(l, k, geom)? == q {
            let mut m = finish_mode(l, k, geom)?;
            m.q = q;
            return Ok(m);
        }
    }
    let roots = real_roots(l, geom, q as usize + 1)?;
    let mut found = 0;
    for &k in &roots {
        let c = count_radial_extrema(l, k, geom)?;
        if c == q {
            let mut m = finish_mode(l, k, geom)?;
            m.q = q;
            return Ok(m);
        }
        found = c;
    }
    Err(Error::WrongRadialOrder { wanted: q, found })
}

/// Sign change of the bracket function within a few radial spacings of `k0`.
fn root_near<T: Real>(l: u32, k0: T, geom: &DiskGeometry<T>) -> Result<Option<T>> {
    let r = geom.radius();
    let lf: T = lit(l as f64);
    let k_lo = lf / (geom.n_core * r);
    let k_hi = lf / (geom.n_clad * r);
    if !(k0 > k_lo && k0 < k_hi) {
        return Ok(None);
    }
    let step = T::PI() / (geom.n_core * r) * lit(0.05);
    let f0 = bracket_function(k0, l, geom)?;
    for i in 1..=40 {
        let d = step * lit(i as f64);
        for &(a, b) in &[(k0 - d + step, k0 - d), (k0 + d - step, k0 + d)] {
            if b <= k_lo || b >= k_hi {
                continue;
            }
            let fa = if i == 1 {
                f0
            } else {
                bracket_function(a, l, geom)?
            };
            let fb = bracket_function(b, l, geom)?;
            if (fa > T::zero()) != (fb > T::zero()) {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                let k = brent(
                    |kk| bracket_function(kk, l, geom).unwrap_or(T::nan()),
                    lo,
                    hi,
                    hi * T::epsilon() * lit(4.0),
                )?;
                return Ok(Some(k));
            }
        }
    }
    Ok(None)
}

/// Field at radius `r`, normalised to 1 at the rim.
pub fn mode_field<T: Real>(mode: &WgmMode<T>, r: T) -> Result<Complex<T>> {
    if !(r >= T::zero()) {
        return Err(Error::InvalidInput("radius must be non-negative".into()));
    }
    let geom = &mode.geometry;
    let rad = geom.radius();
    if r == rad {
        return Ok(Complex::new(T::one(), T::zero()));
    }
    let k = mode.k();
    if r < rad {
        let (num, _) = bessel_j_pair_scaled(mode.l, k * (geom.n_core * r))?;
        let (den, _) = bessel_j_pair_scaled(mode.l, k * (geom.n_core * rad))?;
        if num.is_zero() {
            return Ok(Complex::new(T::zero(), T::zero()));
        }
        Ok(num.ratio(&den))
    } else {
        let (num, _) = hankel1_pair_scaled(mode.l, k * (geom.n_clad * r))?;
        let (den, _) = hankel1_pair_scaled(mode.l, k * (geom.n_clad * rad))?;
        Ok(num.ratio(&den))
    }
}

/// Evanescent decay constant just outside the rim, `sqrt((l/R)² - (k n_cl)²)`.
pub fn evanescent_decay<T: Real>(mode: &WgmMode<T>) -> T {
    let g = &mode.geometry;
    let beta = lit::<T>(mode.l as f64) / g.radius();
    let kc = mode.k_re * g.n_clad;
    (beta * beta - kc * kc).max(T::zero()).sqrt()
}

/// `∫ r n(r)² |E(r)|² dr` over the whole plane, outer tail closed analytically.
pub fn normalization_integral<T: Real>(mode: &WgmMode<T>, rtol: T) -> Result<T> {
    let g = mode.geometry;
    let rad = g.radius();
    let kappa = evanescent_decay(mode);
    if !(kappa > T::zero()) {
        return Err(Error::InvalidInput(
            "mode is not evanescent outside the disk".into(),
        ));
    }
    let r_cut = rad + lit::<T>(10.0) / kappa;
    let nc2 = g.n_core * g.n_core;
    let ncl2 = g.n_clad * g.n_clad;

    let acc = |e: Error| match e {
        Error::Integration(m) => Error::Accuracy(m),
        other => other,
    };
    let mut failure = None;
    let inner = integrate(
        |r| match mode_field(mode, r) {
            Ok(e) => r * nc2 * e.norm_sqr(),
            Err(err) => {
                failure.get_or_insert(err);
                T::zero()
            }
        },
        T::zero(),
        rad,
        rtol,
        T::zero(),
    )
    .map_err(acc)?;
    let outer = integrate(
        |r| match mode_field(mode, r) {
            Ok(e) => r * ncl2 * e.norm_sqr(),
            Err(err) => {
                failure.get_or_insert(err);
                T::zero()
            }
        },
        rad,
        r_cut,
        rtol,
        T::zero(),
    )
    .map_err(acc)?;
    if let Some(e) = failure {
        return Err(e);
    }
    // beyond r_cut the integrand decays like exp(-2 κ r)
    let e_cut = mode_field(mode, r_cut)?.norm_sqr();
    let tail = r_cut * ncl2 * e_cut / (kappa + kappa);
    Ok(inner + outer + tail)
}

/// Single-photon Rabi frequency of a mode as a function of atom position.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RabiCoupling<T> {
    pub mode: WgmMode<T>,
    /// Coupling at the rim, rad/s.
    pub g_rim: T,
    pub normalization: T,
}

impl<T: Real> RabiCoupling<T> {
    /// Builds the coupling for an atom with decay rate `decay_rate` (HWHM, rad/s).
    pub fn new(mode: &WgmMode<T>, decay_rate: T) -> Result<Self> {
        if !(decay_rate > T::zero()) {
            return Err(Error::InvalidInput("decay rate must be positive".into()));
        }
        let fine = normalization_integral(mode, lit(1e-10))?;
        let coarse = normalization_integral(mode, lit(1e-7))?;
        if ((fine - coarse) / fine).abs() > lit(1e-6) {
            return Err(Error::Accuracy(format!(
                "normalization integral not converged ({:.3e} vs {:.3e})",
                to_f64(fine),
                to_f64(coarse)
            )));
        }
        let c = speed_of_light::<T>();
        let omega = mode.omega();
        let g_rim = (lit::<T>(3.0) * decay_rate * c * c * c
            / (omega * omega * mode.geometry.height * fine))
            .sqrt();
        Ok(RabiCoupling {
            mode: *mode,
            g_rim,
            normalization: fine,
        })
    }

    /// `g` at radius `r` (rad/s).
    pub fn at(&self, r: T) -> Result<T> {
        Ok(self.g_rim * mode_field(&self.mode, r)?.norm())
    }

    /// `g` for an atom `distance` outside the rim.
    pub fn at_distance(&self, distance: T) -> Result<T> {
        self.at(self.mode.geometry.radius() + distance)
    }
}

/// `g(atom_r)` in rad/s for an atom outside the disk.
pub fn rabi_frequency<T: Real>(mode: &WgmMode<T>, atom_r: T, decay_rate: T) -> Result<T> {
    if atom_r < mode.geometry.radius() {
        return Err(Error::InvalidInput(
            "atom must sit at or outside the rim".into(),
        ));
    }
    RabiCoupling::new(mode, decay_rate)?.at(atom_r)
}

/// Converts an angular rate to the `MHz` figure used in mode tables (`g / 2π / 1e6`).
pub fn angular_to_mhz<T: Real>(rate: T) -> T {
    rate / (T::TAU() * lit(1e6))
}

/// Free spectral range estimates for a solved mode.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FreeSpectralRange<T> {
    /// `c k_r / l`, rad/s.
    pub approx_angular: T,
    /// `λ / l`, meters.
    pub approx_wavelength: T,
    /// `c (k_l - k_{l-1})`, rad/s, if the neighbour was found.
    pub adjacent_angular: Option<T>,
    /// `λ_{l-1} - λ_l`, meters, if the neighbour was found.
    pub adjacent_wavelength: Option<T>,
}

/// FSR by the `ck/l` estimate and from the solved `l - 1` neighbour.
pub fn free_spectral_range<T: Real>(mode: &WgmMode<T>) -> FreeSpectralRange<T> {
    let lf: T = lit(mode.l as f64);
    let lam = mode.wavelength();
    let mut out = FreeSpectralRange {
        approx_angular: mode.omega() / lf,
        approx_wavelength: lam / lf,
        adjacent_angular: None,
        adjacent_wavelength: None,
    };
    if mode.l >= 2 {
        let seed = lam * (T::one() + T::one() / lf);
        if let Ok(prev) = solve_mode(mode.l - 1, mode.q, &mode.geometry, seed) {
            out.adjacent_angular = Some(mode.omega() - prev.omega());
            out.adjacent_wavelength = Some(prev.wavelength() - lam);
        }
    }
    out
}

/// Mode of radial order `q` whose wavelength is closest to `target`.
pub fn find_resonance_near<T: Real>(
    target: T,
    geom: &DiskGeometry<T>,
    q: u32,
) -> Result<WgmMode<T>> {
    geom.validate()?;
    let nm = to_f64(target) * 1e9;
    if !(600.0..=1700.0).contains(&nm) {
        return Err(Error::InvalidInput(format!(
            "target wavelength {nm:.1} nm outside [600, 1700] nm"
        )));
    }
    let search = |e: Error| Error::Search(format!("no mode near {nm:.2} nm: {e}"));
    let mut l = estimate_order(geom, target).max(2);
    let mut cache: Vec<(u32, WgmMode<T>)> = Vec::new();
    let get = |l: u32, cache: &mut Vec<(u32, WgmMode<T>)>| -> Result<WgmMode<T>> {
        if let Some((_, m)) = cache.iter().find(|(ll, _)| *ll == l) {
            return Ok(*m);
        }
        let m = solve_mode(l, q, geom, target)?;
        cache.push((l, m));
        Ok(m)
    };
    for _ in 0..60 {
        let m = get(l, &mut cache).map_err(search)?;
        let lam = m.wavelength();
        let fsr = lam / lit(l as f64);
        let shift = to_f64((lam - target) / fsr);
        if shift.abs() <= 0.5 {
            // the neighbour on the other side may still be closer
            let other = if shift > 0.0 {
                l + 1
            } else {
                l.saturating_sub(1)
            };
            if other >= 1 {
                if let Ok(n) = get(other, &mut cache) {
                    if (n.wavelength() - target).abs() < (lam - target).abs() {
                        return Ok(n);
                    }
                }
            }
            return Ok(m);
        }
        // longer wavelength than target means l is too small
        let step = shift.round().clamp(-50.0, 50.0) as i64;
        let step = if step == 0 {
            shift.signum() as i64
        } else {
            step
        };
        let next = l as i64 + step;
        if next < 1 {
            break;
        }
        l = next as u32;
    }
    Err(Error::Search(format!(
        "no mode of radial order {q} near {nm:.2} nm"
    )))
}

/// One row of the mode table export.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ModeRow {
    pub diameter_um: f64,
    pub l: u32,
    pub q: u32,
    pub lambda_nm: f64,
    pub k_r: f64,
    pub k_i: f64,
    pub q_wgm: f64,
    pub g0_mhz: f64,
}

impl ModeRow {
    pub fn new<T: Real>(mode: &WgmMode<T>, g_rim: T) -> Self {
        ModeRow {
            diameter_um: to_f64(mode.geometry.diameter) * 1e6,
            l: mode.l,
            q: mode.q,
            lambda_nm: to_f64(mode.wavelength()) * 1e9,
            k_r: to_f64(mode.k_re),
            k_i: to_f64(mode.k_im),
            q_wgm: to_f64(mode.q_wgm()),
            g0_mhz: to_f64(angular_to_mhz(g_rim)),
        }
    }
}

pub const MODE_TABLE_HEADER: [&str; 8] =
    ["D", "l", "q", "lambda_nm", "k_r", "k_i", "Q_wgm", "g0_MHz"];

impl crate::table::Row for ModeRow {
    fn cells(&self) -> Vec<crate::table::Cell> {
        use crate::table::Cell;
        vec![
            Cell::Float(self.diameter_um),
            Cell::Int(self.l as i64),
            Cell::Int(self.q as i64),
            Cell::Float(self.lambda_nm),
            Cell::Float(self.k_r),
            Cell::Float(self.k_i),
            Cell::Float(self.q_wgm),
            Cell::Float(self.g0_mhz),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk(d_um: f64) -> DiskGeometry<f64> {
        DiskGeometry::silica(d_um * 1e-6)
    }

    #[test]
    fn geometry_validation() {
        assert!(DiskGeometry::new(30e-6, 5e-6, 1.454, 1.0).is_ok());
        assert!(DiskGeometry::new(-1.0, 5e-6, 1.454, 1.0).is_err());
        assert!(DiskGeometry::new(30e-6, 5e-6, 1.0, 1.454).is_err());
        assert!(DiskGeometry::new(30e-6, 5e-6, 1.454, 0.9).is_err());
    }

    #[test]
    fn residual_nonzero_off_resonance() {
        let g = disk(30.0);
        let k = Complex::new(std::f64::consts::TAU / 781.0e-9, 0.0);
        assert!(dispersion_residual(k, 167, &g).unwrap().norm() > 1e-3);
    }

    #[test]
    fn residual_rejects_bad_input() {
        let g = disk(30.0);
        assert!(dispersion_residual(Complex::new(-1.0, 0.0), 167, &g).is_err());
        assert!(dispersion_residual(Complex::new(8e6, 0.0), 0, &g).is_err());
    }

    #[test]
    fn solves_small_disk_with_complex_newton() {
        let g = disk(5.0);
        let m = solve_mode(25, 1, &g, 783e-9).unwrap();
        assert!((m.wavelength() * 1e9 - 783.4).abs() < 0.5);
        // lossy enough that k_i comes from the complex iteration
        assert!(m.k_im / m.k_re > PERTURBATIVE_LOSS_LIMIT);
        assert!(dispersion_residual(m.k(), 25, &g).unwrap().norm() < 1e-10);
        assert!((m.q_wgm() - m.k_re / (2.0 * m.k_im)).abs() == 0.0);
    }

    #[test]
    fn field_is_one_at_rim_and_decays() {
        let g = disk(15.0);
        let m = solve_mode(81, 1, &g, 780e-9).unwrap();
        let r = g.radius();
        assert_eq!(m.field(r).unwrap(), Complex::new(1.0, 0.0));
        let near = m.field(r + 50e-9).unwrap().norm();
        let far = m.field(r + 500e-9).unwrap().norm();
        assert!(far < near && near < 1.0);
        // continuity across the rim
        let inside = m.field(r * (1.0 - 1e-9)).unwrap();
        let outside = m.field(r * (1.0 + 1e-9)).unwrap();
        assert!((inside - outside).norm() < 1e-5);
    }

    #[test]
    fn wrong_order_is_reported() {
        let g = disk(5.0);
        // l = 25 near 783 nm has no tenth radial order below the upper light line
        let e = solve_mode(25, 10, &g, 783e-9).unwrap_err();
        assert!(matches!(e, Error::WrongRadialOrder { wanted: 10, .. }));
    }

    #[test]
    fn single_precision_mode() {
        let g: DiskGeometry<f32> = DiskGeometry::silica(5e-6);
        let m = solve_mode(25, 1, &g, 783e-9).unwrap();
        assert!((m.wavelength() * 1e9 - 783.4).abs() < 1.0);
    }
}
