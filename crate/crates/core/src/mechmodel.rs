//! Reduced-order liquid model: convective (sloshing) modes and the
//! impulsive component of a cylindrical tank, with the matching wall
//! pressure distributions for rigid and flexible walls.
//!
//! Heights `z` are measured from the tank base and normalized as
//! `zeta = z / H`. All profiles are wall pressures at `theta = 0` per unit
//! lateral acceleration; the circumferential variation is `cos(theta)`.
//!
//! Rigid-wall impulsive pressure is the Veletsos series
//!
//! ```text
//! p(zeta) / (rho H a) = 2 sum_n (-1)^n / nu_n^2 * I1(nu_n/gamma) / I1'(nu_n/gamma) * cos(nu_n zeta)
//! nu_n = (2n + 1) pi / 2,  gamma = H / R
//! ```
//!
//! and a flexible wall with shape `psi(zeta)` replaces `(-1)^n / nu_n` by the
//! participation integral `int_0^1 psi(zeta) cos(nu_n zeta) dzeta`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::TankSpec;
use crate::special;

/// First convective sloshing mode of a rigid cylindrical tank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvectiveMode {
    /// Mode number, starting at 1.
    pub index: usize,
    /// Root of `J1'(lambda) = 0`.
    pub lambda: f64,
    pub mass: f64,
    /// Height of the wall-pressure resultant, m.
    pub height: f64,
    /// Height of the resultant including base pressure, m.
    pub height_with_base: f64,
    pub period: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpulsiveComponent {
    pub mass: f64,
    pub height: f64,
    pub height_with_base: f64,
    /// Flexible-tank impulsive period from the code coefficient formula, s.
    pub period: f64,
    /// Interpolated period coefficient used for `period`.
    pub period_coefficient: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "mode")]
pub enum ProfileComponent {
    RigidImpulsive,
    Convective(usize),
    FlexibleImpulsive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureProfile {
    pub component: ProfileComponent,
    pub zeta: Vec<f64>,
    /// Pa per m/s² of the driving acceleration.
    pub pressure: Vec<f64>,
    /// Number of series terms retained (0 for closed forms).
    pub terms: usize,
}

impl PressureProfile {
    pub fn peak(&self) -> (f64, f64) {
        self.zeta
            .iter()
            .zip(&self.pressure)
            .fold((f64::NAN, f64::NEG_INFINITY), |acc, (&z, &p)| if p > acc.1 { (z, p) } else { acc })
    }

    /// Wall resultant `pi R H int_0^1 p dzeta` by composite Simpson (or
    /// trapezoid on an even sample count), kg per unit acceleration.
    pub fn wall_resultant(&self, spec: &TankSpec) -> f64 {
        let g = &spec.geometry;
        PI * g.radius * g.fill_height * integrate_samples(&self.zeta, &self.pressure)
    }
}

/// Simpson on uniform odd-length grids, trapezoid otherwise.
pub fn integrate_samples(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    let h = (x[n - 1] - x[0]) / (n - 1) as f64;
    let uniform = x.windows(2).all(|w| ((w[1] - w[0]) - h).abs() < 1e-12 * h.abs().max(1.0));
    if uniform && n % 2 == 1 && n >= 3 {
        let mut s = y[0] + y[n - 1];
        for (i, v) in y.iter().enumerate().take(n - 1).skip(1) {
            s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
        }
        return s * h / 3.0;
    }
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xw, yw)| 0.5 * (xw[1] - xw[0]) * (yw[0] + yw[1]))
        .sum()
}

/// Uniform grid of `n` points on `[0, 1]`.
pub fn unit_grid(n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesOptions {
    /// Stop when the last term's wall-resultant contribution falls below
    /// this fraction of the running total.
    pub rel_tol: f64,
    pub max_terms: usize,
    /// Panels of the participation-integral quadrature (rounded up to even).
    pub quadrature_panels: usize,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            max_terms: 20_000,
            quadrature_panels: 200,
        }
    }
}

static ROOT_CACHE: OnceLock<Vec<f64>> = OnceLock::new();
const CACHED_ROOTS: usize = 256;

/// First `count` positive roots of `J1'`.
pub fn bessel_j1prime_roots(count: usize) -> Vec<f64> {
    let cached = ROOT_CACHE.get_or_init(|| special::bessel_j1_prime_roots(CACHED_ROOTS));
    if count <= cached.len() {
        cached[..count].to_vec()
    } else {
        special::bessel_j1_prime_roots(count)
    }
}

fn nu(n: usize) -> f64 {
    (2 * n + 1) as f64 * PI / 2.0
}

/// `m_cn / m_L = 2 tanh(lambda gamma) / (gamma lambda (lambda² - 1))`.
pub fn convective_mass_ratio(lambda: f64, gamma: f64) -> f64 {
    2.0 * (lambda * gamma).tanh() / (gamma * lambda * (lambda * lambda - 1.0))
}

/// `omega² = (g lambda / R) tanh(lambda gamma)`.
pub fn convective_omega_squared(lambda: f64, radius: f64, gamma: f64, gravity: f64) -> f64 {
    gravity * lambda / radius * (lambda * gamma).tanh()
}

/// `(cosh(x) - c) / (x sinh(x))` without overflow.
fn cosh_ratio(x: f64, c: f64) -> f64 {
    if x > 40.0 {
        return 1.0 / x;
    }
    (x.cosh() - c) / (x * x.sinh())
}

pub fn convective_params(spec: &TankSpec, n_modes: usize) -> Result<Vec<ConvectiveMode>> {
    if n_modes == 0 {
        return Err(Error::InvalidInput("n_modes must be >= 1".into()));
    }
    let geo = &spec.geometry;
    let gamma = geo.slenderness();
    let h = geo.fill_height;
    let m_l = spec.liquid_mass();
    let roots = bessel_j1prime_roots(n_modes);
    Ok(roots
        .iter()
        .enumerate()
        .map(|(i, &lambda)| {
            let w2 = convective_omega_squared(lambda, geo.radius, gamma, spec.gravity);
            let omega = w2.sqrt();
            let x = lambda * gamma;
            ConvectiveMode {
                index: i + 1,
                lambda,
                mass: m_l * convective_mass_ratio(lambda, gamma),
                height: h * (1.0 - cosh_ratio(x, 1.0)),
                height_with_base: h * (1.0 - cosh_ratio(x, 2.0)),
                period: 2.0 * PI / omega,
                omega,
            }
        })
        .collect())
}

/// Total convective mass fraction summed over all modes: the first
/// `explicit` roots exactly, the remainder by the asymptotic root spacing.
fn total_convective_mass_ratio(gamma: f64, explicit: usize) -> f64 {
    let roots = bessel_j1prime_roots(explicit);
    let mut sum: f64 = roots.iter().map(|&l| convective_mass_ratio(l, gamma)).sum();
    // Tail: lambda_n ~ (n - 1/4) pi, tanh -> 1, 1/(lambda (lambda² - 1)) ~ 1/lambda³.
    let mut n = explicit as f64 + 1.0;
    loop {
        let lam = (n - 0.25) * PI;
        let t = convective_mass_ratio(lam, gamma);
        sum += t;
        if t < 1e-18 * sum || n > explicit as f64 + 200_000.0 {
            break;
        }
        n += 1.0;
        if n > explicit as f64 + 2000.0 {
            // integral remainder of 2 / (gamma pi³ (n - 1/4)³)
            let a = n - 0.25;
            sum += 2.0 / (gamma * PI.powi(3)) * (1.0 / (2.0 * (a - 0.5) * (a - 0.5)));
            break;
        }
    }
    sum
}

/// Impulsive period coefficient `C_i(H/R)` for flexible steel tanks.
///
/// Source: Malhotra, Wenk & Wieland (2000), "Simple procedure for seismic
/// analysis of liquid-storage tanks", Structural Engineering International
/// 10(3), Table 1, as reproduced in EN 1998-4:2006 Annex A. Interpolated
/// linearly; outside `0.3 <= H/R <= 3.0` the end segment is extended.
pub const IMPULSIVE_PERIOD_COEFFICIENTS: [(f64, f64); 8] = [
    (0.3, 9.28),
    (0.5, 7.74),
    (0.7, 6.97),
    (1.0, 6.36),
    (1.5, 6.06),
    (2.0, 6.21),
    (2.5, 6.56),
    (3.0, 7.03),
];

pub fn impulsive_period_coefficient(gamma: f64) -> f64 {
    let t = &IMPULSIVE_PERIOD_COEFFICIENTS;
    let seg = t
        .windows(2)
        .position(|w| gamma <= w[1].0)
        .unwrap_or(t.len() - 2);
    let (x0, y0) = t[seg];
    let (x1, y1) = t[seg + 1];
    y0 + (y1 - y0) * (gamma - x0) / (x1 - x0)
}

/// `T_i = C_i sqrt(rho) H / (sqrt(s/R) sqrt(E))`.
pub fn impulsive_period(spec: &TankSpec) -> (f64, f64) {
    let g = &spec.geometry;
    let c = impulsive_period_coefficient(g.slenderness());
    let t = c * spec.liquid.density.sqrt() * g.fill_height
        / ((g.shell_thickness / g.radius).sqrt() * spec.shell.elastic_modulus.sqrt());
    (t, c)
}

/// Sums of the rigid impulsive series needed for mass and heights:
/// `(int C dzeta, int C zeta dzeta, int_0^1 C(xi, 0) xi² dxi)`.
fn rigid_series_moments(gamma: f64, opts: SeriesOptions) -> (f64, f64, f64) {
    let (mut f, mut m, mut b) = (0.0, 0.0, 0.0);
    for n in 0..opts.max_terms {
        let v = nu(n);
        let x = v / gamma;
        let r = special::i1_over_i1_prime(x);
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let tf = 2.0 * r / v.powi(3);
        f += tf;
        m += 2.0 * r * (1.0 / v.powi(3) - sign / v.powi(4));
        b += 2.0 * sign * special::i2_over_i1_prime(x) / (v * v * x);
        if tf < 1e-3 * opts.rel_tol * f && n >= 4 {
            break;
        }
    }
    (f, m, b)
}

pub fn impulsive_params(spec: &TankSpec) -> ImpulsiveComponent {
    impulsive_params_with(spec, SeriesOptions::default())
}

pub fn impulsive_params_with(spec: &TankSpec, opts: SeriesOptions) -> ImpulsiveComponent {
    let geo = &spec.geometry;
    let gamma = geo.slenderness();
    let h = geo.fill_height;
    let r = geo.radius;
    let m_l = spec.liquid_mass();
    let mass = m_l * (1.0 - total_convective_mass_ratio(gamma, 200));

    let (f, m, b) = rigid_series_moments(gamma, opts);
    let height = h * m / f;
    // base moment / (pi rho a R H) relative to wall force / (pi rho a R H)
    let base = (r / h).powi(2) * b;
    let height_with_base = h * (m + base) / f;
    let (period, period_coefficient) = impulsive_period(spec);
    ImpulsiveComponent {
        mass,
        height,
        height_with_base,
        period,
        period_coefficient,
    }
}

/// `I1(nu/gamma) / I1'(nu/gamma)` for series term `n`.
fn bessel_ratio(n: usize, gamma: f64) -> f64 {
    special::i1_over_i1_prime(nu(n) / gamma)
}

/// Rigid-wall impulsive wall pressure per unit ground acceleration.
pub fn rigid_impulsive_pressure_profile(spec: &TankSpec, grid: &[f64]) -> Result<PressureProfile> {
    rigid_impulsive_pressure_profile_with(spec, grid, SeriesOptions::default())
}

pub fn rigid_impulsive_pressure_profile_with(
    spec: &TankSpec,
    grid: &[f64],
    opts: SeriesOptions,
) -> Result<PressureProfile> {
    check_grid(grid)?;
    let participation = |n: usize| if n.is_multiple_of(2) { 1.0 / nu(n) } else { -1.0 / nu(n) };
    let (pressure, terms) = impulsive_series(spec, grid, participation, opts);
    Ok(PressureProfile {
        component: ProfileComponent::RigidImpulsive,
        zeta: grid.to_vec(),
        pressure,
        terms,
    })
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty grid".into()));
    }
    if let Some(z) = grid.iter().find(|z| !(0.0..=1.0).contains(*z)) {
        return Err(Error::InvalidInput(format!("grid point {z} outside [0, 1]")));
    }
    Ok(())
}

/// `rho H * 2 sum_n P_n r_n / nu_n cos(nu_n zeta)`, truncated on the wall
/// resultant contribution `2 P_n r_n (-1)^n / nu_n²`.
fn impulsive_series(
    spec: &TankSpec,
    grid: &[f64],
    participation: impl Fn(usize) -> f64,
    opts: SeriesOptions,
) -> (Vec<f64>, usize) {
    let gamma = spec.slenderness();
    let scale = spec.liquid.density * spec.geometry.fill_height;
    let mut out = vec![0.0; grid.len()];
    let mut total = 0.0;
    let mut terms = 0;
    for n in 0..opts.max_terms {
        let v = nu(n);
        let coef = 2.0 * participation(n) * bessel_ratio(n, gamma) / v;
        for (p, &z) in out.iter_mut().zip(grid) {
            *p += coef * (v * z).cos();
        }
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let contribution = coef * sign / v;
        total += contribution;
        terms = n + 1;
        if n >= 3 && contribution.abs() < opts.rel_tol * total.abs() {
            break;
        }
    }
    // cos(nu_n) = 0 exactly in real arithmetic; clean the rounding residue.
    for (p, &z) in out.iter_mut().zip(grid) {
        *p = if z == 1.0 { 0.0 } else { *p * scale };
    }
    (out, terms)
}

/// Filon–Simpson weights for `int f(x) cos(k x) dx` over a uniform grid.
fn filon_weights(theta: f64) -> (f64, f64, f64) {
    if theta.abs() < 1.0 / 6.0 {
        let t2 = theta * theta;
        let t3 = t2 * theta;
        let alpha = t3 * (2.0 / 45.0 - t2 * (2.0 / 315.0 - t2 * 2.0 / 4725.0));
        let beta = 2.0 / 3.0 + t2 * (2.0 / 15.0 - t2 * (4.0 / 105.0 - t2 * 2.0 / 567.0));
        let gamma = 4.0 / 3.0 - t2 * (2.0 / 15.0 - t2 * (1.0 / 210.0 - t2 / 11340.0));
        (alpha, beta, gamma)
    } else {
        let (s, c) = theta.sin_cos();
        let t3 = theta.powi(3);
        let alpha = (theta * theta + theta * s * c - 2.0 * s * s) / t3;
        let beta = 2.0 * (theta * (1.0 + c * c) - 2.0 * s * c) / t3;
        let gamma = 4.0 * (s - theta * c) / t3;
        (alpha, beta, gamma)
    }
}

/// `int_0^1 f(zeta) cos(k zeta) dzeta` with `f` sampled on a uniform grid of
/// an even number of panels. Exact for piecewise-quadratic `f`.
pub fn filon_cos(samples: &[f64], k: f64) -> f64 {
    let panels = samples.len() - 1;
    debug_assert!(panels.is_multiple_of(2) && panels >= 2);
    let h = 1.0 / panels as f64;
    let (alpha, beta, gamma) = filon_weights(k * h);
    let mut even = 0.0;
    let mut odd = 0.0;
    for (i, f) in samples.iter().enumerate() {
        let c = (k * i as f64 * h).cos();
        if i % 2 == 0 {
            let w = if i == 0 || i == panels { 0.5 } else { 1.0 };
            even += w * f * c;
        } else {
            odd += f * c;
        }
    }
    let end = samples[panels] * k.sin() - samples[0] * 0.0;
    h * (alpha * end + beta * even + gamma * odd)
}

/// Participation integrals `int_0^1 psi(zeta) cos(nu_n zeta) dzeta`,
/// `n = 0..count`.
pub fn participation_integrals(psi: &dyn Fn(f64) -> f64, count: usize, panels: usize) -> Vec<f64> {
    let panels = panels.max(2).div_ceil(2) * 2;
    let samples: Vec<f64> = (0..=panels).map(|i| psi(i as f64 / panels as f64)).collect();
    (0..count).map(|n| filon_cos(&samples, nu(n))).collect()
}

/// Impulsive wall pressure for a flexible wall deforming as `psi(zeta)`
/// (base-fixed, `psi(1) = 1`), per unit acceleration at the liquid surface.
pub fn flexible_impulsive_pressure_profile(
    spec: &TankSpec,
    psi: &dyn Fn(f64) -> f64,
    grid: &[f64],
) -> Result<PressureProfile> {
    flexible_impulsive_pressure_profile_with(spec, psi, grid, SeriesOptions::default())
}

pub fn flexible_impulsive_pressure_profile_with(
    spec: &TankSpec,
    psi: &dyn Fn(f64) -> f64,
    grid: &[f64],
    opts: SeriesOptions,
) -> Result<PressureProfile> {
    let base = psi(0.0);
    if base.abs() > 1e-6 {
        return Err(Error::InvalidInput(format!(
            "flexible mode shape must vanish at the base, psi(0) = {base:e}"
        )));
    }
    flexible_profile_unchecked(spec, psi, grid, opts)
}

/// Same series without the base-fixity precondition; `psi ≡ 1` reproduces the
/// rigid-wall profile.
pub fn flexible_profile_unchecked(
    spec: &TankSpec,
    psi: &dyn Fn(f64) -> f64,
    grid: &[f64],
    opts: SeriesOptions,
) -> Result<PressureProfile> {
    check_grid(grid)?;
    let panels = opts.quadrature_panels.max(200).div_ceil(2) * 2;
    let samples: Vec<f64> = (0..=panels).map(|i| psi(i as f64 / panels as f64)).collect();
    let (pressure, terms) = impulsive_series(spec, grid, |n| filon_cos(&samples, nu(n)), opts);
    Ok(PressureProfile {
        component: ProfileComponent::FlexibleImpulsive,
        zeta: grid.to_vec(),
        pressure,
        terms,
    })
}

/// `cosh(x zeta) / sinh(x)` without overflow for large `x`.
fn cosh_over_sinh(x: f64, zeta: f64) -> f64 {
    let num = 1.0 + (-2.0 * x * zeta).exp();
    let den = 1.0 - (-2.0 * x).exp();
    (x * (zeta - 1.0)).exp() * num / den
}

/// Wall pressure of convective mode `mode` per unit modal (pseudo-)
/// acceleration, normalized so its wall resultant is the modal mass.
pub fn convective_pressure_profile(mode: &ConvectiveMode, spec: &TankSpec, grid: &[f64]) -> Result<PressureProfile> {
    check_grid(grid)?;
    let geo = &spec.geometry;
    let x = mode.lambda * geo.slenderness();
    let amp = mode.mass / (PI * geo.radius * geo.fill_height) * x;
    Ok(PressureProfile {
        component: ProfileComponent::Convective(mode.index),
        zeta: grid.to_vec(),
        pressure: grid.iter().map(|&z| amp * cosh_over_sinh(x, z)).collect(),
        terms: 0,
    })
}

/// Surface pressure of a convective mode at the wall, Pa per unit modal
/// acceleration.
pub fn convective_surface_pressure(mode: &ConvectiveMode, spec: &TankSpec) -> f64 {
    let geo = &spec.geometry;
    let x = mode.lambda * geo.slenderness();
    mode.mass / (PI * geo.radius * geo.fill_height) * x * cosh_over_sinh(x, 1.0)
}

/// Free-surface elevation at the wall from the surface dynamic pressures
/// of each convective mode: `eta = sum p_n / (rho g)`.
pub fn wave_height(modal_surface_pressures: &[f64], spec: &TankSpec) -> f64 {
    modal_surface_pressures.iter().sum::<f64>() / (spec.liquid.density * spec.gravity)
}

/// Free-surface elevation around the wall, `eta(theta) = eta(0) cos(theta)`.
pub fn wave_height_profile(modal_surface_pressures: &[f64], spec: &TankSpec, thetas: &[f64]) -> Vec<f64> {
    let eta0 = wave_height(modal_surface_pressures, spec);
    thetas.iter().map(|t| eta0 * t.cos()).collect()
}

/// Square-root-of-sum-of-squares combination of profiles sampled on the
/// same grid, each weighted by its driving acceleration.
pub fn combine_srss(weighted: &[(&PressureProfile, f64)]) -> Result<Vec<f64>> {
    let Some((first, _)) = weighted.first() else {
        return Ok(Vec::new());
    };
    let n = first.zeta.len();
    if weighted.iter().any(|(p, _)| p.zeta != first.zeta) {
        return Err(Error::InvalidInput("profiles sampled on different grids".into()));
    }
    Ok((0..n)
        .map(|i| {
            weighted
                .iter()
                .map(|(p, a)| (p.pressure[i] * a).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .collect())
}
