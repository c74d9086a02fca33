//! Flexible-wall impulsive mode: the shell as a base-fixed cantilever beam
//! carrying the liquid as a height-dependent added mass.
//!
//! The added mass depends on the mode shape through the flexible-wall
//! pressure, so the fundamental mode is found by fixed-point iteration:
//! shape -> pressure -> added mass -> beam eigenproblem -> shape.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, LanczosOptions, Skyline};
use crate::mechmodel::{self, PressureProfile, SeriesOptions};
use crate::model::TankSpec;

/// Root of `1 + cos(x) cosh(x) = 0` for the first cantilever mode.
pub const CANTILEVER_BETA_L: f64 = 1.875_104_068_711_961;

#[derive(Debug, Clone, Serialize)]
pub struct BeamModel {
    /// Node heights from the base, m; the fill height is always a node.
    pub stations: Vec<f64>,
    pub fill_height: f64,
    /// `E pi R³ s`, N·m².
    pub bending_stiffness: f64,
    /// `G pi R s`, N; `None` for Euler–Bernoulli elements.
    pub shear_stiffness: Option<f64>,
    /// Shell mass per unit height, kg/m.
    pub structural_mass: f64,
    /// Liquid added mass per unit height at each station, kg/m.
    pub added_mass: Vec<f64>,
    /// Lumped mass at the top station, kg.
    pub top_mass: f64,
}

impl BeamModel {
    pub fn new(spec: &TankSpec, elements: usize, timoshenko: bool) -> Result<Self> {
        let g = &spec.geometry;
        if elements < 2 {
            return Err(Error::InvalidInput("beam needs at least 2 elements".into()));
        }
        let (h, ht) = (g.fill_height, g.total_height.max(g.fill_height));
        let dry = ht - h > 1e-12 * ht;
        let wet_elems = if dry {
            ((elements as f64 * h / ht).round() as usize).clamp(1, elements - 1)
        } else {
            elements
        };
        let mut stations: Vec<f64> = (0..=wet_elems).map(|i| h * i as f64 / wet_elems as f64).collect();
        let dry_elems = elements - wet_elems;
        stations.extend((1..=dry_elems).map(|i| h + (ht - h) * i as f64 / dry_elems as f64));
        let (r, s) = (g.radius, g.shell_thickness);
        Ok(Self {
            added_mass: vec![0.0; stations.len()],
            stations,
            fill_height: h,
            bending_stiffness: spec.shell.elastic_modulus * PI * r.powi(3) * s,
            shear_stiffness: timoshenko.then(|| spec.shell.shear_modulus() * PI * r * s),
            structural_mass: spec.shell.density * 2.0 * PI * r * s,
            top_mass: g.top_ring_mass,
        })
    }

    pub fn elements(&self) -> usize {
        self.stations.len() - 1
    }

    fn dofs(&self) -> usize {
        2 * self.elements()
    }

    /// Global equation numbers of element `e`'s `(w0, t0, w1, t1)`; the
    /// clamped base node has none.
    fn element_dofs(&self, e: usize) -> [Option<usize>; 4] {
        let node = |k: usize, c: usize| (k > 0).then(|| 2 * (k - 1) + c);
        [node(e, 0), node(e, 1), node(e + 1, 0), node(e + 1, 1)]
    }

    fn element_stiffness(&self, len: f64) -> [[f64; 4]; 4] {
        let ei = self.bending_stiffness;
        let phi = self.shear_stiffness.map_or(0.0, |ga| 12.0 * ei / (ga * len * len));
        let c = ei / ((1.0 + phi) * len.powi(3));
        let l = len;
        let l2 = l * l;
        [
            [12.0 * c, 6.0 * l * c, -12.0 * c, 6.0 * l * c],
            [6.0 * l * c, (4.0 + phi) * l2 * c, -6.0 * l * c, (2.0 - phi) * l2 * c],
            [-12.0 * c, -6.0 * l * c, 12.0 * c, -6.0 * l * c],
            [6.0 * l * c, (2.0 - phi) * l2 * c, -6.0 * l * c, (4.0 + phi) * l2 * c],
        ]
    }

    /// Consistent Hermite mass with per-length mass varying linearly
    /// between `m0` and `m1`; 4-point Gauss is exact for this degree.
    fn element_mass(len: f64, m0: f64, m1: f64) -> [[f64; 4]; 4] {
        const X: [f64; 4] = [-0.861_136_311_594_052_6, -0.339_981_043_584_856_3, 0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
        const W: [f64; 4] = [0.347_854_845_137_453_9, 0.652_145_154_862_546_1, 0.652_145_154_862_546_1, 0.347_854_845_137_453_9];
        let mut out = [[0.0; 4]; 4];
        for (x, w) in X.iter().zip(W) {
            let t = 0.5 * (x + 1.0);
            let n = hermite(t, len);
            let m = m0 + (m1 - m0) * t;
            for a in 0..4 {
                for b in 0..4 {
                    out[a][b] += 0.5 * len * w * m * n[a] * n[b];
                }
            }
        }
        out
    }

    /// Fundamental `(w², nodal w, nodal rotation)` including the base node.
    pub fn fundamental(&self) -> Result<(f64, Vec<f64>, Vec<f64>)> {
        let n = self.dofs();
        let groups: Vec<Vec<usize>> = (0..self.elements())
            .map(|e| self.element_dofs(e).iter().flatten().copied().collect())
            .collect();
        let mut k = Skyline::from_connectivity(n, groups.iter().map(|g| g.as_slice()));
        let mut m = k.clone();
        for e in 0..self.elements() {
            let len = self.stations[e + 1] - self.stations[e];
            let ke = self.element_stiffness(len);
            let ms = |i: usize| self.structural_mass + self.added_mass[i];
            let me = Self::element_mass(len, ms(e), ms(e + 1));
            let ids = self.element_dofs(e);
            for a in 0..4 {
                let Some(i) = ids[a] else { continue };
                for b in 0..4 {
                    let Some(j) = ids[b] else { continue };
                    if i <= j {
                        k.add(i, j, ke[a][b]);
                        m.add(i, j, me[a][b]);
                    }
                }
            }
        }
        if self.top_mass > 0.0 {
            m.add(n - 2, n - 2, self.top_mass);
        }
        // Rounding in K x alone caps the relative residual near
        // eps * (w_max / w_1)², ~1e-7 for fine stiff beams. The eigenvalue
        // error goes with the residual squared, so 1e-5 is ample.
        let opts = LanczosOptions {
            tol: 1e-5,
            ..LanczosOptions::default()
        };
        let pairs = linalg::shift_invert_lanczos(&k, &m, 1, 0.0, opts)?;
        let x = &pairs.vectors[0];
        let mut w = vec![0.0];
        let mut t = vec![0.0];
        for node in 0..self.elements() {
            w.push(x[2 * node]);
            t.push(x[2 * node + 1]);
        }
        Ok((pairs.values[0], w, t))
    }
}

/// Cubic Hermite shape functions on `[0, len]` at `t = x / len`.
fn hermite(t: f64, len: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        1.0 - 3.0 * t2 + 2.0 * t3,
        len * (t - 2.0 * t2 + t3),
        3.0 * t2 - 2.0 * t3,
        len * (t3 - t2),
    ]
}

/// Beam deflection shape, normalized to 1 at the fill height.
#[derive(Debug, Clone, Serialize)]
pub struct BeamShape {
    pub stations: Vec<f64>,
    pub deflection: Vec<f64>,
    pub rotation: Vec<f64>,
    pub fill_height: f64,
}

impl BeamShape {
    fn normalized(stations: &[f64], w: Vec<f64>, t: Vec<f64>, fill_height: f64) -> Result<Self> {
        let mut s = Self {
            stations: stations.to_vec(),
            deflection: w,
            rotation: t,
            fill_height,
        };
        let at_fill = s.at(fill_height);
        if !(at_fill.abs() > 0.0) || !at_fill.is_finite() {
            return Err(Error::NonFinite { step: 0 });
        }
        s.deflection.iter_mut().for_each(|v| *v /= at_fill);
        s.rotation.iter_mut().for_each(|v| *v /= at_fill);
        Ok(s)
    }

    /// Deflection at height `z`, Hermite interpolation.
    pub fn at(&self, z: f64) -> f64 {
        let st = &self.stations;
        let e = match st.partition_point(|&s| s <= z) {
            0 => 0,
            i => (i - 1).min(st.len() - 2),
        };
        let len = st[e + 1] - st[e];
        let n = hermite(((z - st[e]) / len).clamp(0.0, 1.0), len);
        n[0] * self.deflection[e] + n[1] * self.rotation[e] + n[2] * self.deflection[e + 1] + n[3] * self.rotation[e + 1]
    }

    /// `psi(zeta)` with `zeta = z / H`.
    pub fn psi(&self, zeta: f64) -> f64 {
        self.at(zeta * self.fill_height)
    }
}

/// First cantilever mode over `[0, total]` sampled at `stations`.
fn analytic_cantilever(stations: &[f64], total: f64, fill: f64) -> Result<BeamShape> {
    let b = CANTILEVER_BETA_L / total;
    let bl = CANTILEVER_BETA_L;
    let sigma = (bl.cosh() + bl.cos()) / (bl.sinh() + bl.sin());
    let w = stations
        .iter()
        .map(|&x| (b * x).cosh() - (b * x).cos() - sigma * ((b * x).sinh() - (b * x).sin()))
        .collect();
    let t = stations
        .iter()
        .map(|&x| b * ((b * x).sinh() + (b * x).sin() - sigma * ((b * x).cosh() - (b * x).cos())))
        .collect();
    BeamShape::normalized(stations, w, t, fill)
}

/// Added mass per unit height `pi R p(z) / psi(z)` at the profile's points;
/// zero above the fill height. Where `psi < 1e-6 max psi` the value of the
/// nearest point with a usable `psi` is taken.
pub fn added_mass_from_pressure(profile: &PressureProfile, psi: &[f64], spec: &TankSpec) -> Result<Vec<f64>> {
    if psi.len() != profile.zeta.len() {
        return Err(Error::InvalidInput("psi and profile lengths differ".into()));
    }
    let r = spec.geometry.radius;
    let floor = 1e-6 * psi.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let raw: Vec<Option<f64>> = profile
        .zeta
        .iter()
        .zip(&profile.pressure)
        .zip(psi)
        .map(|((&z, &p), &s)| {
            if z > 1.0 + 1e-12 {
                Some(0.0)
            } else if s.abs() >= floor && floor > 0.0 {
                Some(PI * r * p / s)
            } else {
                None
            }
        })
        .collect();
    let valid: Vec<usize> = (0..raw.len()).filter(|&i| raw[i].is_some()).collect();
    if valid.is_empty() {
        return Ok(vec![0.0; raw.len()]);
    }
    Ok((0..raw.len())
        .map(|i| {
            raw[i].unwrap_or_else(|| {
                let j = valid
                    .iter()
                    .min_by(|&&a, &&b| a.abs_diff(i).cmp(&b.abs_diff(i)))
                    .copied()
                    .unwrap_or(i);
                raw[j].unwrap_or(0.0)
            })
        })
        .collect())
}

#[derive(Debug, Clone, Copy)]
pub struct ImpulsiveOptions {
    /// Beam elements over the total height.
    pub elements: usize,
    pub timoshenko: bool,
    /// Relative period change that ends the iteration.
    pub tol: f64,
    pub max_iter: usize,
    pub series: SeriesOptions,
}

impl Default for ImpulsiveOptions {
    fn default() -> Self {
        Self {
            elements: 200,
            timoshenko: true,
            tol: 1e-3,
            max_iter: 20,
            series: SeriesOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ImpulsiveMode {
    pub period: f64,
    pub shape: BeamShape,
    pub iterations: usize,
    /// Period after each beam solve.
    pub trajectory: Vec<f64>,
    pub beam: BeamModel,
}

impl ImpulsiveMode {
    /// `(zeta, psi)` at the wetted stations, for export.
    pub fn wetted_shape(&self) -> Vec<(f64, f64)> {
        let h = self.shape.fill_height;
        self.shape
            .stations
            .iter()
            .zip(&self.shape.deflection)
            .filter(|(z, _)| **z <= h * (1.0 + 1e-12))
            .map(|(z, w)| (z / h, *w))
            .collect()
    }
}

fn update_added_mass(beam: &mut BeamModel, shape: &BeamShape, spec: &TankSpec, series: SeriesOptions) -> Result<()> {
    let h = beam.fill_height;
    let wet: Vec<f64> = beam
        .stations
        .iter()
        .take_while(|z| **z <= h * (1.0 + 1e-12))
        .map(|z| (z / h).min(1.0))
        .collect();
    let psi_fn = |zeta: f64| shape.psi(zeta);
    let profile = mechmodel::flexible_impulsive_pressure_profile_with(spec, &psi_fn, &wet, series)?;
    let psi: Vec<f64> = wet.iter().map(|&z| shape.psi(z)).collect();
    let wet_mass = added_mass_from_pressure(&profile, &psi, spec)?;
    beam.added_mass = wet_mass
        .into_iter()
        .chain(std::iter::repeat(0.0))
        .take(beam.stations.len())
        .collect();
    Ok(())
}

pub fn impulsive_mode(spec: &TankSpec, opts: ImpulsiveOptions) -> Result<ImpulsiveMode> {
    let mut beam = BeamModel::new(spec, opts.elements, opts.timoshenko)?;
    let total = *beam.stations.last().unwrap_or(&spec.geometry.total_height);
    let mut shape = analytic_cantilever(&beam.stations, total, beam.fill_height)?;
    let mut trajectory = Vec::new();
    for it in 1..=opts.max_iter {
        update_added_mass(&mut beam, &shape, spec, opts.series)?;
        let (w2, w, t) = beam.fundamental()?;
        let period = 2.0 * PI / w2.sqrt();
        shape = BeamShape::normalized(&beam.stations, w, t, beam.fill_height)?;
        let prev = trajectory.last().copied();
        trajectory.push(period);
        if let Some(p) = prev {
            if ((period - p) / period).abs() < opts.tol {
                return Ok(ImpulsiveMode {
                    period,
                    shape,
                    iterations: it,
                    trajectory,
                    beam,
                });
            }
        }
    }
    Err(Error::FixedPointNonConvergence {
        iterations: opts.max_iter,
        trajectory,
    })
}
