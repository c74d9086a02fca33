//! Reduced-order time-history analysis.
//!
//! One impulsive and `N` convective oscillators share the base of the tank;
//! an unanchored tank adds a rigid base rotation `theta` resisted by the
//! nonlinear moment-rotation spring of [`crate::uplift`]. Degrees of
//! freedom are relative to the moving ground, so a component at height `h`
//! moves `u + h theta` with respect to the foundation.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gmproc::GroundMotion;
use crate::mechmodel::{self, SeriesOptions};
use crate::model::{Anchorage, TankSpec};
use crate::uplift::MomentRotationCurve;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "mode")]
pub enum Dof {
    Impulsive,
    /// Convective mode number, from 1.
    Convective(usize),
    Rotation,
}

impl Dof {
    pub fn label(self) -> String {
        match self {
            Dof::Impulsive => "u_i".into(),
            Dof::Convective(n) => format!("q_{n}"),
            Dof::Rotation => "theta".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DampingOptions {
    /// Mass-proportional ratio at the impulsive frequency.
    pub structural: f64,
    pub convective: f64,
}

impl Default for DampingOptions {
    fn default() -> Self {
        Self {
            structural: 0.02,
            convective: 0.005,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemOptions {
    pub convective_modes: usize,
    pub damping: DampingOptions,
    /// Replaces the code-formula impulsive period, e.g. with a beam result.
    pub impulsive_period: Option<f64>,
    /// Wall pressure probe heights as fractions of the fill height.
    pub probes: Vec<f64>,
}

impl Default for SystemOptions {
    fn default() -> Self {
        Self {
            convective_modes: 3,
            damping: DampingOptions::default(),
            impulsive_period: None,
            probes: vec![0.0, 0.25, 0.5, 0.75],
        }
    }
}

/// Odd, piecewise-linear extension of a moment-rotation curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RotationSpring {
    pub rotation: Vec<f64>,
    pub moment: Vec<f64>,
    /// Edge uplift on the lifting side, m.
    pub uplift: Vec<f64>,
}

impl RotationSpring {
    pub fn from_curve(curve: &MomentRotationCurve) -> Result<Self> {
        let mut spring = Self {
            rotation: vec![0.0],
            moment: vec![0.0],
            uplift: vec![0.0],
        };
        for s in &curve.samples {
            let last = *spring.rotation.last().unwrap();
            if s.rotation > last * (1.0 + 1e-12) && s.rotation > 0.0 {
                spring.rotation.push(s.rotation);
                spring.moment.push(s.moment);
                spring.uplift.push(s.max_uplift);
            }
        }
        if spring.rotation.len() < 2 {
            return Err(Error::InvalidInput("moment-rotation curve has no positive rotation".into()));
        }
        if spring.moment.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidInput("moment-rotation curve must be monotone".into()));
        }
        Ok(spring)
    }

    fn segment(&self, a: f64) -> usize {
        let n = self.rotation.len();
        match self.rotation.iter().position(|&r| r > a) {
            Some(0) => 0,
            Some(i) => i - 1,
            None => n - 2,
        }
    }

    /// Moment and tangent stiffness at rotation `theta`; the last segment is
    /// extended beyond the curve.
    pub fn moment(&self, theta: f64) -> (f64, f64) {
        let a = theta.abs();
        let i = self.segment(a);
        let (r0, r1) = (self.rotation[i], self.rotation[i + 1]);
        let (m0, m1) = (self.moment[i], self.moment[i + 1]);
        let k = (m1 - m0) / (r1 - r0);
        ((m0 + k * (a - r0)) * theta.signum(), k)
    }

    /// Stored energy `int_0^theta M dtheta`, exact for the piecewise-linear
    /// law.
    pub fn energy(&self, theta: f64) -> f64 {
        let a = theta.abs();
        let mut e = 0.0;
        let mut i = 0;
        while i + 1 < self.rotation.len() && self.rotation[i + 1] <= a {
            e += 0.5 * (self.moment[i] + self.moment[i + 1]) * (self.rotation[i + 1] - self.rotation[i]);
            i += 1;
        }
        if a > self.rotation[i] {
            let (m_a, _) = self.moment(a);
            e += 0.5 * (self.moment[i] + m_a) * (a - self.rotation[i]);
        }
        e
    }

    /// Edge uplift on the side lifted by a positive rotation.
    pub fn uplift(&self, theta: f64) -> f64 {
        if theta <= 0.0 {
            return 0.0;
        }
        let i = self.segment(theta);
        let (r0, r1) = (self.rotation[i], self.rotation[i + 1]);
        let t = (theta - r0) / (r1 - r0);
        (self.uplift[i] + t * (self.uplift[i + 1] - self.uplift[i])).max(0.0)
    }
}

/// Inertia of the empty tank about the base, rigid with the foundation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShellInertia {
    pub mass: f64,
    /// `sum m h`, kg·m.
    pub first_moment: f64,
    /// Rotary inertia about a base diameter, kg·m².
    pub rotary_inertia: f64,
}

impl ShellInertia {
    /// Bottom plate at the base, top ring at the top, and the rest of the
    /// empty mass spread uniformly over the wall.
    pub fn of(spec: &TankSpec) -> Self {
        let g = &spec.geometry;
        let (r, ht) = (g.radius, g.total_height);
        let plate = spec.shell.density * PI * r * r * g.bottom_thickness;
        let ring = g.top_ring_mass;
        let wall = (spec.empty_mass - plate - ring).max(0.0);
        Self {
            mass: spec.empty_mass,
            first_moment: wall * ht / 2.0 + ring * ht,
            rotary_inertia: plate * r * r / 4.0 + ring * (r * r / 2.0 + ht * ht) + wall * (r * r / 2.0 + ht * ht / 3.0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub dofs: Vec<Dof>,
    pub mass: DMatrix<f64>,
    pub damping: DMatrix<f64>,
    /// Linear stiffness; the rotation row is carried by [`Self::spring`].
    pub stiffness: DMatrix<f64>,
    /// Ground acceleration load is `-influence * a_g`.
    pub influence: DVector<f64>,
    /// Oscillator mass, height and circular frequency per translational DOF
    /// (zeros on the rotation).
    pub component_mass: Vec<f64>,
    pub component_height: Vec<f64>,
    pub omega: Vec<f64>,
    pub spring: Option<RotationSpring>,
    pub shell: ShellInertia,
    /// Rayleigh reference frequency, rad/s.
    pub reference_omega: f64,
    pub probes: Vec<f64>,
    /// Wall pressure at each probe per unit pseudo-acceleration, per DOF.
    pub probe_pressure: Vec<Vec<f64>>,
    pub base_edge_pressure: Vec<f64>,
    /// Wall wave height at `theta = 0` per unit pseudo-acceleration.
    pub wave_coefficient: Vec<f64>,
    pub freeboard: f64,
}

impl ReducedSystem {
    pub fn len(&self) -> usize {
        self.dofs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dofs.is_empty()
    }

    fn rotation_index(&self) -> Option<usize> {
        self.dofs.iter().position(|d| *d == Dof::Rotation)
    }

    /// Small-amplitude periods, ascending, with the rotation spring at its
    /// initial tangent.
    pub fn periods(&self) -> Result<Vec<f64>> {
        let mut k = self.stiffness.clone();
        if let (Some(j), Some(s)) = (self.rotation_index(), &self.spring) {
            k[(j, j)] += s.moment(0.0).1;
        }
        let chol = self
            .mass
            .clone()
            .cholesky()
            .ok_or_else(|| Error::InvalidInput("mass matrix is not positive definite".into()))?;
        let l_inv = chol
            .l()
            .try_inverse()
            .ok_or(Error::Factorization { pivot: 0 })?;
        let a = &l_inv * k * l_inv.transpose();
        let a = (&a + a.transpose()) * 0.5;
        let mut w2: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
        w2.sort_by(|x, y| y.partial_cmp(x).unwrap());
        Ok(w2.into_iter().map(|w| 2.0 * PI / w.max(0.0).sqrt()).collect())
    }
}

/// One translational oscillator of the reduced model with its recovery
/// coefficients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Component {
    pub dof: Dof,
    pub mass: f64,
    pub height: f64,
    pub omega: f64,
    pub damping_ratio: f64,
    /// Wall pressure at each probe per unit pseudo-acceleration.
    pub probe_pressure: Vec<f64>,
    pub base_edge_pressure: f64,
    /// Wall wave height per unit pseudo-acceleration.
    pub wave_coefficient: f64,
}

/// Impulsive and convective oscillators of `spec`.
pub fn components(spec: &TankSpec, opts: &SystemOptions) -> Result<Vec<Component>> {
    crate::model::ensure_valid(spec)?;
    if opts.convective_modes < 1 {
        return Err(Error::InvalidInput("at least one convective mode is required".into()));
    }
    let DampingOptions { structural, convective } = opts.damping;
    if !(structural >= 0.0 && convective >= 0.0) {
        return Err(Error::InvalidInput("damping ratios must be nonnegative".into()));
    }
    let imp = mechmodel::impulsive_params_with(spec, SeriesOptions::default());
    let t_i = opts.impulsive_period.unwrap_or(imp.period);
    if !(t_i > 0.0 && t_i.is_finite()) {
        return Err(Error::InvalidInput(format!("impulsive period must be > 0, got {t_i}")));
    }
    let rho_g = spec.liquid.density * spec.gravity;
    let mut out = vec![Component {
        dof: Dof::Impulsive,
        mass: imp.mass,
        height: imp.height,
        omega: 2.0 * PI / t_i,
        damping_ratio: structural,
        probe_pressure: mechmodel::rigid_impulsive_pressure_profile(spec, &opts.probes)?.pressure,
        base_edge_pressure: mechmodel::rigid_impulsive_pressure_profile(spec, &[0.0])?.pressure[0],
        wave_coefficient: 0.0,
    }];
    for mode in mechmodel::convective_params(spec, opts.convective_modes)? {
        out.push(Component {
            dof: Dof::Convective(mode.index),
            mass: mode.mass,
            height: mode.height,
            omega: mode.omega,
            damping_ratio: convective,
            probe_pressure: mechmodel::convective_pressure_profile(&mode, spec, &opts.probes)?.pressure,
            base_edge_pressure: mechmodel::convective_pressure_profile(&mode, spec, &[0.0])?.pressure[0],
            wave_coefficient: mechmodel::convective_surface_pressure(&mode, spec) / rho_g,
        });
    }
    Ok(out)
}

/// Coupled impulsive, convective and (optionally) base-rotation system.
pub fn assemble_system(
    spec: &TankSpec,
    opts: &SystemOptions,
    uplift: Option<&MomentRotationCurve>,
) -> Result<ReducedSystem> {
    if uplift.is_some() && spec.geometry.anchorage == Anchorage::Anchored {
        return Err(Error::InvalidInput("uplift spring given for an anchored tank".into()));
    }
    let parts = components(spec, opts)?;
    let spring = uplift.map(RotationSpring::from_curve).transpose()?;
    ReducedSystem::from_components(&parts, spring, ShellInertia::of(spec), opts.probes.clone(), spec.freeboard())
}

impl ReducedSystem {
    /// Assembles the coupled operators. Components with zero mass are left
    /// out. The impulsive DOF and the rotation share mass-proportional
    /// damping at the impulsive frequency; convective modes carry their own
    /// modal damping.
    pub fn from_components(
        parts: &[Component],
        spring: Option<RotationSpring>,
        shell: ShellInertia,
        probes: Vec<f64>,
        freeboard: f64,
    ) -> Result<Self> {
        let imp = parts
            .iter()
            .find(|c| c.dof == Dof::Impulsive)
            .ok_or_else(|| Error::InvalidInput("an impulsive component is required".into()))?;
        let omega_i = imp.omega;
        let a0 = 2.0 * imp.damping_ratio * omega_i;
        let mut kept: Vec<Component> = parts.iter().filter(|c| c.mass > 0.0).cloned().collect();
        if kept.is_empty() {
            return Err(Error::InvalidInput("no component has mass".into()));
        }
        if kept.iter().any(|c| c.probe_pressure.len() != probes.len()) {
            return Err(Error::InvalidInput("probe coefficients do not match the probes".into()));
        }
        if spring.is_some() {
            kept.push(Component {
                dof: Dof::Rotation,
                mass: 0.0,
                height: 0.0,
                omega: 0.0,
                damping_ratio: imp.damping_ratio,
                probe_pressure: vec![0.0; probes.len()],
                base_edge_pressure: 0.0,
                wave_coefficient: 0.0,
            });
        }
        let n = kept.len();
        let rot = spring.as_ref().map(|_| n - 1);
        let mut m = DMatrix::zeros(n, n);
        let mut c = DMatrix::zeros(n, n);
        let mut k = DMatrix::zeros(n, n);
        let mut l = DVector::zeros(n);
        for (a, comp) in kept.iter().enumerate() {
            if comp.dof == Dof::Rotation {
                continue;
            }
            m[(a, a)] = comp.mass;
            k[(a, a)] = comp.mass * comp.omega * comp.omega;
            l[a] = comp.mass;
            if let Some(j) = rot {
                let mh = comp.mass * comp.height;
                m[(a, j)] = mh;
                m[(j, a)] = mh;
                m[(j, j)] += mh * comp.height;
                l[j] += mh;
            }
            if let Dof::Convective(_) = comp.dof {
                c[(a, a)] = 2.0 * comp.damping_ratio * comp.omega * comp.mass;
            }
        }
        if let Some(j) = rot {
            m[(j, j)] += shell.rotary_inertia;
            l[j] += shell.first_moment;
        }
        let structural: Vec<usize> = (0..n).filter(|&a| matches!(kept[a].dof, Dof::Impulsive | Dof::Rotation)).collect();
        for &a in &structural {
            for &b in &structural {
                c[(a, b)] = a0 * m[(a, b)];
            }
        }
        Ok(Self {
            dofs: kept.iter().map(|c| c.dof).collect(),
            mass: m,
            damping: c,
            stiffness: k,
            influence: l,
            component_mass: kept.iter().map(|c| c.mass).collect(),
            component_height: kept.iter().map(|c| c.height).collect(),
            omega: kept.iter().map(|c| c.omega).collect(),
            spring,
            shell,
            reference_omega: omega_i,
            probes,
            probe_pressure: kept.iter().map(|c| c.probe_pressure.clone()).collect(),
            base_edge_pressure: kept.iter().map(|c| c.base_edge_pressure).collect(),
            wave_coefficient: kept.iter().map(|c| c.wave_coefficient).collect(),
            freeboard,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NewmarkParams {
    pub beta: f64,
    pub gamma: f64,
    /// Integration step; `None` picks `min(dt, T_i / 20)`.
    pub dt_sub: Option<f64>,
    /// Initial displacements and velocities, zero when absent.
    pub initial: Option<(Vec<f64>, Vec<f64>)>,
    pub newton_tol: f64,
    pub max_newton: usize,
}

impl Default for NewmarkParams {
    fn default() -> Self {
        Self {
            beta: 0.25,
            gamma: 0.5,
            dt_sub: None,
            initial: None,
            newton_tol: 1e-8,
            max_newton: 30,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EnergyLedger {
    pub input: Vec<f64>,
    pub kinetic: Vec<f64>,
    pub strain: Vec<f64>,
    pub damped: Vec<f64>,
}

impl EnergyLedger {
    /// Largest `|input - kinetic - strain - damped|` over the history,
    /// relative to the peak input energy (zero for a quiet history).
    pub fn residual(&self) -> f64 {
        let peak = self.input.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if peak == 0.0 {
            return 0.0;
        }
        (0..self.input.len())
            .map(|i| (self.input[i] - self.kinetic[i] - self.strain[i] - self.damped[i]).abs())
            .fold(0.0, f64::max)
            / peak
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResponseHistory {
    pub time: Vec<f64>,
    pub dofs: Vec<Dof>,
    /// Relative displacement of each DOF, one vector per DOF.
    pub displacement: Vec<Vec<f64>>,
    pub base_shear: Vec<f64>,
    /// Overturning moment just above the base.
    pub overturning_moment: Vec<f64>,
    /// Wave height at the wall, `theta = 0` and `theta = pi`.
    pub wave_height: [Vec<f64>; 2],
    pub probes: Vec<f64>,
    /// Wall pressure per probe.
    pub pressure: Vec<Vec<f64>>,
    pub base_edge_pressure: Vec<f64>,
    /// Edge uplift at `theta = 0` and `theta = pi`.
    pub uplift: [Vec<f64>; 2],
    pub energy: EnergyLedger,
    pub freeboard: f64,
}

impl ResponseHistory {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    /// Column names and values, in CSV order.
    pub fn columns(&self) -> Vec<(String, &[f64])> {
        let mut cols: Vec<(String, &[f64])> = vec![("time".into(), &self.time)];
        for (d, u) in self.dofs.iter().zip(&self.displacement) {
            cols.push((d.label(), u));
        }
        cols.push(("base_shear".into(), &self.base_shear));
        cols.push(("overturning_moment".into(), &self.overturning_moment));
        cols.push(("wave_height_0".into(), &self.wave_height[0]));
        cols.push(("wave_height_pi".into(), &self.wave_height[1]));
        for (z, p) in self.probes.iter().zip(&self.pressure) {
            cols.push((format!("pressure_z{z}"), p));
        }
        cols.push(("base_edge_pressure".into(), &self.base_edge_pressure));
        cols.push(("uplift_0".into(), &self.uplift[0]));
        cols.push(("uplift_pi".into(), &self.uplift[1]));
        cols.push(("energy_input".into(), &self.energy.input));
        cols.push(("energy_kinetic".into(), &self.energy.kinetic));
        cols.push(("energy_strain".into(), &self.energy.strain));
        cols.push(("energy_damped".into(), &self.energy.damped));
        cols
    }

    /// Full-precision CSV, one row per time step.
    pub fn to_csv(&self) -> String {
        let cols = self.columns();
        let mut out = cols.iter().map(|c| c.0.as_str()).collect::<Vec<_>>().join(",");
        out.push('\n');
        for i in 0..self.len() {
            let row: Vec<String> = cols.iter().map(|c| crate::text::num(c.1[i])).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Integrates the system under `gm` with Newmark's method. The record is
/// linearly interpolated onto the integration step; each step solves the
/// rotation-spring nonlinearity by Newton iteration.
pub fn newmark(system: &ReducedSystem, gm: &GroundMotion, params: &NewmarkParams) -> Result<ResponseHistory> {
    let n = system.len();
    let NewmarkParams { beta, gamma, .. } = *params;
    if !(beta > 0.0 && gamma >= 0.5) {
        return Err(Error::InvalidInput(format!("Newmark needs beta > 0 and gamma >= 1/2, got {beta}, {gamma}")));
    }
    let default_dt = gm.dt.min(2.0 * PI / system.reference_omega / 20.0);
    let target = params.dt_sub.unwrap_or(default_dt);
    if !(target > 0.0) || target > gm.dt * (1.0 + 1e-12) {
        return Err(Error::InvalidInput(format!("dt_sub must lie in (0, {}], got {target}", gm.dt)));
    }
    let sub = (gm.dt / target - 1e-9).ceil().max(1.0) as usize;
    let dt = gm.dt / sub as f64;
    let steps = (gm.len() - 1) * sub;

    let rot = system.rotation_index();
    let m = &system.mass;
    let c = &system.damping;
    let k = &system.stiffness;
    let l = &system.influence;
    let spring_force = |u: &DVector<f64>| -> (DVector<f64>, f64) {
        let mut f = k * u;
        let mut kt = 0.0;
        if let (Some(j), Some(s)) = (rot, &system.spring) {
            let (mo, t) = s.moment(u[j]);
            f[j] += mo;
            kt = t;
        }
        (f, kt)
    };
    let strain_energy = |u: &DVector<f64>| -> f64 {
        let mut e = 0.5 * u.dot(&(k * u));
        if let (Some(j), Some(s)) = (rot, &system.spring) {
            e += s.energy(u[j]);
        }
        e
    };

    let (mut u, mut v) = match &params.initial {
        Some((u0, v0)) => {
            if u0.len() != n || v0.len() != n {
                return Err(Error::InvalidInput(format!("initial state needs {n} entries")));
            }
            (DVector::from_column_slice(u0), DVector::from_column_slice(v0))
        }
        None => (DVector::zeros(n), DVector::zeros(n)),
    };
    let m_lu = m.clone().lu();
    let p_at = |t: f64| -> DVector<f64> { l * (-gm.at(t)) };
    let mut p = p_at(0.0);
    let (f0, _) = spring_force(&u);
    let mut a = m_lu
        .solve(&(&p - c * &v - f0))
        .ok_or_else(|| Error::InvalidInput("mass matrix is singular".into()))?;

    let c1 = 1.0 / (beta * dt * dt);
    let c2 = gamma / (beta * dt);
    let lin_eff = m * c1 + c * c2 + k;
    let lin_lu = lin_eff.clone().lu();
    let nonlinear = system.spring.is_some() && rot.is_some();

    let mut out = History::new(system, steps + 1);
    let mut energy = (0.0, 0.0);
    let mut peak_force: f64 = 0.0;
    out.record(system, 0.0, &u, &v, &a, gm.at(0.0), strain_energy(&u), energy);
    for step in 1..=steps {
        let t = step as f64 * dt;
        let p1 = p_at(t);
        // predictor and the terms of a1 that do not depend on u1
        let base = &u + &v * dt + &a * (dt * dt * (0.5 - beta));
        let accel_of = |u1: &DVector<f64>| (u1 - &base) * c1;
        let vel_of = |a1: &DVector<f64>| &v + (&a * (1.0 - gamma) + a1 * gamma) * dt;
        let mut u1 = base.clone();
        if nonlinear {
            let j = rot.unwrap();
            let mut done = false;
            for _ in 0..params.max_newton {
                let a1 = accel_of(&u1);
                let v1 = vel_of(&a1);
                let (f, kt) = spring_force(&u1);
                let r = m * &a1 + c * &v1 + &f - &p1;
                peak_force = peak_force.max(f.amax()).max(p1.amax());
                if r.amax() <= params.newton_tol * peak_force.max(f64::MIN_POSITIVE) {
                    done = true;
                    break;
                }
                let mut jac = lin_eff.clone();
                jac[(j, j)] += kt;
                let du = jac.lu().solve(&r).ok_or(Error::NewtonNonConvergence { step })?;
                u1 -= du;
            }
            if !done {
                return Err(Error::NewtonNonConvergence { step });
            }
        } else {
            let rhs = &p1 + m * (&base * c1) + c * (&base * c2 - &v - &a * (dt * (1.0 - gamma)));
            u1 = lin_lu.solve(&rhs).ok_or(Error::Factorization { pivot: 0 })?;
        }
        let a1 = accel_of(&u1);
        let v1 = vel_of(&a1);
        if u1.iter().chain(v1.iter()).chain(a1.iter()).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { step });
        }
        let du = &u1 - &u;
        energy.0 += du.dot(&((&p + &p1) * 0.5));
        energy.1 += du.dot(&(c * ((&v + &v1) * 0.5)));
        u = u1;
        v = v1;
        a = a1;
        p = p1;
        out.record(system, t, &u, &v, &a, gm.at(t), strain_energy(&u), energy);
    }
    Ok(out.finish())
}

struct History {
    h: ResponseHistory,
}

impl History {
    fn new(system: &ReducedSystem, len: usize) -> Self {
        let n = system.len();
        let with = |k: usize| (0..k).map(|_| Vec::with_capacity(len)).collect::<Vec<_>>();
        Self {
            h: ResponseHistory {
                time: Vec::with_capacity(len),
                dofs: system.dofs.clone(),
                displacement: with(n),
                base_shear: Vec::with_capacity(len),
                overturning_moment: Vec::with_capacity(len),
                wave_height: [Vec::with_capacity(len), Vec::with_capacity(len)],
                probes: system.probes.clone(),
                pressure: with(system.probes.len()),
                base_edge_pressure: Vec::with_capacity(len),
                uplift: [Vec::with_capacity(len), Vec::with_capacity(len)],
                energy: EnergyLedger::default(),
                freeboard: system.freeboard,
            },
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn record(
        &mut self,
        s: &ReducedSystem,
        t: f64,
        u: &DVector<f64>,
        v: &DVector<f64>,
        a: &DVector<f64>,
        ag: f64,
        strain: f64,
        (input, damped): (f64, f64),
    ) {
        let h = &mut self.h;
        h.time.push(t);
        for (i, col) in h.displacement.iter_mut().enumerate() {
            col.push(u[i]);
        }
        let rot = s.rotation_index();
        let (theta, theta_acc) = rot.map_or((0.0, 0.0), |j| (u[j], a[j]));
        let mut shear = s.shell.mass * ag + s.shell.first_moment * theta_acc;
        let mut moment = s.shell.first_moment * ag + s.shell.rotary_inertia * theta_acc;
        let mut eta = 0.0;
        let mut pressure = vec![0.0; s.probes.len()];
        let mut base_edge = 0.0;
        for (i, dof) in s.dofs.iter().enumerate() {
            if *dof == Dof::Rotation {
                continue;
            }
            let (mi, hi) = (s.component_mass[i], s.component_height[i]);
            let total = a[i] + hi * theta_acc + ag;
            shear += mi * total;
            moment += mi * hi * total;
            let pseudo = s.omega[i] * s.omega[i] * u[i];
            eta += s.wave_coefficient[i] * pseudo;
            for (p, coef) in pressure.iter_mut().zip(&s.probe_pressure[i]) {
                *p += coef * pseudo;
            }
            base_edge += s.base_edge_pressure[i] * pseudo;
        }
        h.base_shear.push(shear);
        h.overturning_moment.push(moment);
        h.wave_height[0].push(eta);
        h.wave_height[1].push(-eta);
        for (col, p) in h.pressure.iter_mut().zip(pressure) {
            col.push(p);
        }
        h.base_edge_pressure.push(base_edge);
        let (w0, wpi) = match &s.spring {
            Some(sp) => (sp.uplift(theta), sp.uplift(-theta)),
            None => (0.0, 0.0),
        };
        h.uplift[0].push(w0);
        h.uplift[1].push(wpi);
        h.energy.input.push(input);
        h.energy.kinetic.push(0.5 * v.dot(&(&s.mass * v)));
        h.energy.strain.push(strain);
        h.energy.damped.push(damped);
    }

    fn finish(self) -> ResponseHistory {
        self.h
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    /// Largest absolute value.
    pub value: f64,
    pub time: f64,
}

impl Peak {
    fn of(time: &[f64], values: &[f64]) -> Self {
        let mut best = Peak { value: 0.0, time: 0.0 };
        for (t, v) in time.iter().zip(values) {
            if v.abs() > best.value {
                best = Peak { value: v.abs(), time: *t };
            }
        }
        best
    }

    fn of_either(time: &[f64], a: &[f64], b: &[f64]) -> Self {
        let (pa, pb) = (Self::of(time, a), Self::of(time, b));
        if pb.value > pa.value {
            pb
        } else {
            pa
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbePeak {
    pub zeta: f64,
    pub peak: Peak,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakReport {
    pub wave_height: Peak,
    pub uplift: Peak,
    pub base_shear: Peak,
    pub overturning_moment: Peak,
    pub pressure: Vec<ProbePeak>,
    pub base_edge_pressure: Peak,
    pub freeboard: f64,
    /// The peak wave height exceeds the freeboard.
    pub overtops: bool,
}

pub fn peak_report(history: &ResponseHistory) -> Result<PeakReport> {
    if history.is_empty() {
        return Err(Error::InvalidInput("empty response history".into()));
    }
    let t = &history.time;
    let wave_height = Peak::of_either(t, &history.wave_height[0], &history.wave_height[1]);
    Ok(PeakReport {
        wave_height,
        uplift: Peak::of_either(t, &history.uplift[0], &history.uplift[1]),
        base_shear: Peak::of(t, &history.base_shear),
        overturning_moment: Peak::of(t, &history.overturning_moment),
        pressure: history
            .probes
            .iter()
            .zip(&history.pressure)
            .map(|(z, p)| ProbePeak { zeta: *z, peak: Peak::of(t, p) })
            .collect(),
        base_edge_pressure: Peak::of(t, &history.base_edge_pressure),
        freeboard: history.freeboard,
        overtops: wave_height.value > history.freeboard,
    })
}
