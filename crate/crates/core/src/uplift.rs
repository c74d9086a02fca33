//! Base uplift of unanchored tanks.
//!
//! The bottom plate next to the shell is idealized as a beam strip of unit
//! width under the hydrostatic load `q = rho g H`, resting on a rigid
//! foundation. Lifting its edge by `w` detaches a segment of length `l`;
//! the edge force `P(w)` holding it up is what resists overturning. Summing
//! `P` around the circumference for a rigid base rotation gives the
//! moment-rotation spring of the reduced model.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Skyline;
use crate::model::{Anchorage, TankSpec};
use crate::par::{self, Exec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "stiffness")]
pub enum EndRestraint {
    Pinned,
    /// Rotational stiffness per unit width, N·m/rad/m.
    RotationSpring(f64),
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripModel {
    /// Flexural rigidity per unit width, N·m.
    pub rigidity: f64,
    /// Downward pressure on the plate, N/m².
    pub load: f64,
    pub length: f64,
    pub nodes: usize,
    pub restraint: EndRestraint,
}

/// `E t³ / (12 (1 - nu²))`.
pub fn plate_rigidity(e: f64, t: f64, nu: f64) -> f64 {
    e * t.powi(3) / (12.0 * (1.0 - nu * nu))
}

/// Shell bending rigidity over its bending decay length `sqrt(R s)`.
pub fn default_rotation_spring(spec: &TankSpec) -> f64 {
    let g = &spec.geometry;
    let s = g.shell_thickness;
    plate_rigidity(spec.shell.elastic_modulus, s, spec.shell.poisson_ratio) / (g.radius * s).sqrt()
}

/// Closed-form uplifted length and edge force for a pinned edge:
/// `l = (24 D w / q)^(1/4)`, `P = q l / 2`.
pub fn pinned_closed_form(rigidity: f64, load: f64, uplift: f64) -> (f64, f64) {
    let l = (24.0 * rigidity * uplift / load).powf(0.25);
    (0.5 * load * l, l)
}

/// Uplifted length for a clamped edge, `(72 D w / q)^(1/4)`; the longest of
/// the three restraints.
fn fixed_end_length(rigidity: f64, load: f64, uplift: f64) -> f64 {
    (72.0 * rigidity * uplift / load).powf(0.25)
}

impl StripModel {
    /// Strip for the bottom plate of `spec`, long enough for edge uplifts up
    /// to `max_uplift`.
    pub fn for_tank(spec: &TankSpec, max_uplift: f64, nodes: usize, restraint: Option<EndRestraint>) -> Result<Self> {
        let g = &spec.geometry;
        let rigidity = plate_rigidity(spec.shell.elastic_modulus, g.bottom_thickness, spec.shell.poisson_ratio);
        let load = spec.liquid.density * spec.gravity * g.fill_height;
        let strip = Self {
            rigidity,
            load,
            length: Self::length_for(rigidity, load, max_uplift),
            nodes,
            restraint: restraint.unwrap_or(EndRestraint::RotationSpring(default_rotation_spring(spec))),
        };
        strip.check()?;
        Ok(strip)
    }

    /// Three times the longest uplifted length at `max_uplift`.
    pub fn length_for(rigidity: f64, load: f64, max_uplift: f64) -> f64 {
        3.0 * fixed_end_length(rigidity, load, max_uplift.max(f64::MIN_POSITIVE))
    }

    /// Largest edge uplift this strip length is sized for.
    pub fn max_uplift(&self) -> f64 {
        self.load * (self.length / 3.0).powi(4) / (72.0 * self.rigidity)
    }

    fn check(&self) -> Result<()> {
        if !(self.rigidity > 0.0 && self.load > 0.0 && self.length > 0.0) {
            return Err(Error::InvalidInput("strip needs positive rigidity, load and length".into()));
        }
        if self.nodes < 5 {
            return Err(Error::InvalidInput("strip needs at least 5 nodes".into()));
        }
        if let EndRestraint::RotationSpring(k) = self.restraint {
            if !(k >= 0.0) {
                return Err(Error::InvalidInput("rotation spring must be nonnegative".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StripSolution {
    /// Edge force per unit width holding the uplift, N/m.
    pub edge_force: f64,
    /// Distance from the edge to the lift-off point, m.
    pub uplift_length: f64,
    pub x: Vec<f64>,
    pub deflection: Vec<f64>,
    pub rotation: Vec<f64>,
    /// Foundation reactions at the nodes, N/m (upward positive, edge node 0).
    pub reactions: Vec<f64>,
    /// Largest bending moment magnitude along the strip, N·m/m.
    pub max_moment: f64,
    pub strain_energy: f64,
    /// Work done against the distributed load, `q int w dx`.
    pub load_work: f64,
    pub iterations: usize,
}

impl StripSolution {
    /// Largest `|gap * reaction|` over the foundation nodes.
    pub fn complementarity(&self) -> f64 {
        self.deflection
            .iter()
            .zip(&self.reactions)
            .skip(1)
            .map(|(g, r)| (g * r).abs())
            .fold(0.0, f64::max)
    }
}

fn hermite_stiffness(d: f64, l: f64) -> [[f64; 4]; 4] {
    let c = d / l.powi(3);
    let l2 = l * l;
    [
        [12.0 * c, 6.0 * l * c, -12.0 * c, 6.0 * l * c],
        [6.0 * l * c, 4.0 * l2 * c, -6.0 * l * c, 2.0 * l2 * c],
        [-12.0 * c, -6.0 * l * c, 12.0 * c, -6.0 * l * c],
        [6.0 * l * c, 2.0 * l2 * c, -6.0 * l * c, 4.0 * l2 * c],
    ]
}

/// Lift-off point from the cubic decay `w ~ (l - x)³` between the last two
/// lifted nodes `a < b`, kept inside `b + 2 (b - a)`.
fn liftoff_point(xa: f64, wa: f64, xb: f64, wb: f64) -> f64 {
    let (ca, cb) = (wa.cbrt(), wb.cbrt());
    if !(ca > cb) {
        return xb;
    }
    xb + (xb - xa) * (cb / (ca - cb)).min(2.0)
}

/// Contact solve on a fixed mesh.
fn solve_on_mesh(strip: &StripModel, x: &[f64], uplift: f64) -> Result<StripSolution> {
    let n = x.len();
    let ndof = 2 * n;
    let groups: Vec<[usize; 4]> = (0..n - 1).map(|e| [2 * e, 2 * e + 1, 2 * e + 2, 2 * e + 3]).collect();
    let mut k = Skyline::from_connectivity(ndof, groups.iter().map(|g| g.as_slice()));
    let mut f = vec![0.0; ndof];
    let q = strip.load;
    let mut h_min = f64::INFINITY;
    for (e, dofs) in groups.iter().enumerate() {
        let l = x[e + 1] - x[e];
        h_min = h_min.min(l);
        let ke = hermite_stiffness(strip.rigidity, l);
        for a in 0..4 {
            for b in a..4 {
                k.add(dofs[a], dofs[b], ke[a][b]);
            }
        }
        // lumped: with consistent nodal moments a graded mesh bends the
        // supported part between nodes and puts some supports in tension
        f[dofs[0]] -= q * l / 2.0;
        f[dofs[2]] -= q * l / 2.0;
    }
    if let EndRestraint::RotationSpring(kr) = strip.restraint {
        k.add(1, 1, kr);
    }

    let reaction_tol = 1e-10 * q * h_min;
    // round-off in the solve is about cond * eps times q h^4 / D
    let h_max = x.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let gap_tol = 1e-9 * uplift + 1e-6 * q * h_max.powi(4) / strip.rigidity;
    let mut solves = 0;
    let mut solve_set = |active: &[bool]| -> Result<(Vec<f64>, Vec<f64>)> {
        solves += 1;
        let mut kc = k.clone();
        let mut b = f.clone();
        for r in 0..ndof {
            b[r] -= k.get(r, 0) * uplift;
        }
        kc.constrain(0);
        b[0] = uplift;
        if strip.restraint == EndRestraint::Fixed {
            kc.constrain(1);
            b[1] = 0.0;
        }
        for i in (1..n).filter(|&i| active[i]) {
            kc.constrain(2 * i);
            b[2 * i] = 0.0;
        }
        let u = kc.factor()?.solve(&b);
        let ku = k.mul_vec(&u);
        let r: Vec<f64> = ku.iter().zip(&f).map(|(a, b)| a - b).collect();
        Ok((u, r))
    };
    let run = |m: usize| -> Vec<bool> { (0..n).map(|i| i > m).collect() };
    // Warm start: the lifted zone is essentially one run of nodes from the
    // edge, the shortest whose first support is in compression (bisection).
    let holds = |m: usize, r: &[f64]| r[2 * (m + 1)] >= -reaction_tol;
    let top = n - 2;
    let (u_top, r_top) = solve_set(&run(top))?;
    if !holds(top, &r_top) {
        return Err(Error::StripTooShort { lift: u_top[2 * top].abs() });
    }
    let (u0, r0) = solve_set(&run(0))?;
    let (mut lo, mut hi, mut best) = if holds(0, &r0) { (0, 0, (u0, r0)) } else { (0, top, (u_top, r_top)) };
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        let sol = solve_set(&run(mid))?;
        if holds(mid, &sol.1) {
            hi = mid;
            best = sol;
        } else {
            lo = mid;
        }
    }
    // A lift-off point between nodes leaves micro-gaps past the run; clear
    // them one node at a time, lowest index first.
    let mut active = run(hi);
    let (mut u, mut r) = best;
    let mut converged = false;
    for _ in 0..n {
        let violator = (1..n).find(|&i| if active[i] { r[2 * i] < -reaction_tol } else { u[2 * i] < -gap_tol });
        match violator {
            Some(i) => {
                active[i] = !active[i];
                (u, r) = solve_set(&active)?;
            }
            None => {
                converged = true;
                break;
            }
        }
    }
    let it = solves;
    if !converged {
        return Err(Error::ActiveSetNonConvergence { iterations: it });
    }
    let deflection: Vec<f64> = (0..n).map(|i| u[2 * i]).collect();
    let rotation: Vec<f64> = (0..n).map(|i| u[2 * i + 1]).collect();
    let mut reactions: Vec<f64> = (0..n).map(|i| if i == 0 || active[i] { r[2 * i] } else { 0.0 }).collect();
    // inactive nodes carry no reaction by construction; clean round-off
    for (i, re) in reactions.iter_mut().enumerate().skip(1) {
        if active[i] {
            *re = re.max(0.0);
        }
    }
    // lifted region connected to the edge; isolated micro-gaps between
    // discrete supports further in are not part of it
    let last = (1..n).find(|&i| deflection[i] <= 1e-12).map_or(n - 1, |i| i - 1);
    if last >= n - 2 || deflection[n - 1] > 1e-12 {
        return Err(Error::StripTooShort {
            lift: deflection[n - 1].max(deflection[n - 2]),
        });
    }
    let uplift_length = if last == 0 {
        x[1]
    } else {
        liftoff_point(x[last - 1], deflection[last - 1], x[last], deflection[last])
    };
    let mut max_moment: f64 = 0.0;
    for e in 0..n - 1 {
        let l = x[e + 1] - x[e];
        let (w0, t0, w1, t1) = (u[2 * e], u[2 * e + 1], u[2 * e + 2], u[2 * e + 3]);
        for t in [0.0, 1.0] {
            let curv = ((-6.0 + 12.0 * t) * w0 + l * (-4.0 + 6.0 * t) * t0 + (6.0 - 12.0 * t) * w1
                + l * (-2.0 + 6.0 * t) * t1)
                / (l * l);
            max_moment = max_moment.max((strip.rigidity * curv).abs());
        }
    }
    let strain_energy = 0.5 * crate::linalg::dot(&u, &k.mul_vec(&u));
    let load_work = -crate::linalg::dot(&f, &u);
    Ok(StripSolution {
        edge_force: r[0],
        uplift_length,
        x: x.to_vec(),
        deflection,
        rotation,
        reactions,
        max_moment,
        strain_energy,
        load_work,
        iterations: it,
    })
}

fn uniform(a: f64, b: f64, segments: usize) -> impl Iterator<Item = f64> {
    (0..=segments).map(move |i| if i == segments { b } else { a + (b - a) * i as f64 / segments as f64 })
}

/// Edge force and uplifted length for an imposed edge uplift. A uniform
/// pass locates the lift-off point; the second pass puts 80% of the nodes
/// inside `1.25 (l + h)`.
pub fn solve_strip(strip: &StripModel, uplift: f64) -> Result<StripSolution> {
    strip.check()?;
    if !(uplift >= 0.0) || !uplift.is_finite() {
        return Err(Error::InvalidInput(format!("edge uplift must be >= 0, got {uplift}")));
    }
    let n = strip.nodes;
    let l = strip.length;
    if uplift == 0.0 {
        let x: Vec<f64> = uniform(0.0, l, n - 1).collect();
        return Ok(StripSolution {
            edge_force: 0.0,
            uplift_length: 0.0,
            deflection: vec![0.0; n],
            rotation: vec![0.0; n],
            reactions: x.windows(2).map(|_| 0.0).chain([0.0]).collect(),
            x,
            max_moment: 0.0,
            strain_energy: 0.0,
            load_work: 0.0,
            iterations: 0,
        });
    }
    let coarse: Vec<f64> = uniform(0.0, l, n - 1).collect();
    let first = solve_on_mesh(strip, &coarse, uplift)?;
    let a = 1.25 * (first.uplift_length + coarse[1]);
    if a >= 0.9 * l {
        return Ok(first);
    }
    let inner = ((0.8 * n as f64).round() as usize).clamp(3, n - 2);
    let mut x: Vec<f64> = uniform(0.0, a, inner - 1).collect();
    x.extend(uniform(a, l, n - inner).skip(1));
    let mut sol = solve_on_mesh(strip, &x, uplift)?;
    sol.iterations += first.iterations;
    Ok(sol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UpliftSample {
    pub uplift: f64,
    pub force: f64,
    pub length: f64,
    pub max_moment: f64,
    /// Plate moment exceeds the plastic hinge moment.
    pub beyond_yield: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct UpliftCurve {
    pub samples: Vec<UpliftSample>,
}

impl UpliftCurve {
    pub fn compute(strip: &StripModel, uplifts: &[f64], exec: Exec) -> Result<Self> {
        if uplifts.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidInput("uplift grid must be ascending".into()));
        }
        let solved = par::map_slice(exec, uplifts, |&w| solve_strip(strip, w));
        let samples = solved
            .into_iter()
            .zip(uplifts)
            .map(|(s, &w)| {
                s.map(|s| UpliftSample {
                    uplift: w,
                    force: s.edge_force,
                    length: s.uplift_length,
                    max_moment: s.max_moment,
                    beyond_yield: false,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { samples })
    }

    /// Flags the samples whose plate moment exceeds `hinge_moment`.
    pub fn annotate_yield(&mut self, hinge_moment: f64) {
        for s in &mut self.samples {
            s.beyond_yield = s.max_moment > hinge_moment;
        }
    }

    pub fn is_monotone(&self) -> bool {
        self.samples
            .windows(2)
            .all(|w| w[1].force >= w[0].force && w[1].length >= w[0].length)
    }

    /// Edge force at uplift `w` by linear interpolation (monotone between
    /// samples); beyond the last sample the last segment is extended.
    pub fn force_at(&self, w: f64) -> f64 {
        let s = &self.samples;
        if s.is_empty() || w <= s[0].uplift {
            return s.first().map_or(0.0, |s| s.force);
        }
        let i = s.partition_point(|p| p.uplift < w).clamp(1, s.len() - 1);
        let (a, b) = (s[i - 1], s[i]);
        if b.uplift == a.uplift {
            return b.force;
        }
        a.force + (b.force - a.force) * (w - a.uplift) / (b.uplift - a.uplift)
    }

    /// `int P dw` by trapezoid over the samples.
    pub fn work(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| 0.5 * (w[1].uplift - w[0].uplift) * (w[0].force + w[1].force))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlasticLimit {
    /// `t² sigma_y / 4`, N·m/m.
    pub hinge_moment: f64,
    /// Edge uplift at which the plate moment first reaches the hinge moment,
    /// if within the strip's range.
    pub first_yield_uplift: Option<f64>,
}

pub fn plastic_limit_check(strip: &StripModel, thickness: f64, yield_stress: f64) -> Result<PlasticLimit> {
    let hinge_moment = thickness * thickness * yield_stress / 4.0;
    if !hinge_moment.is_finite() {
        return Ok(PlasticLimit {
            hinge_moment,
            first_yield_uplift: None,
        });
    }
    let cap = strip.max_uplift();
    let moment = |w: f64| solve_strip(strip, w).map(|s| s.max_moment);
    if moment(cap)? < hinge_moment {
        return Ok(PlasticLimit {
            hinge_moment,
            first_yield_uplift: None,
        });
    }
    let (mut lo, mut hi) = (0.0, cap);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if moment(mid)? < hinge_moment {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-9 * cap {
            break;
        }
    }
    Ok(PlasticLimit {
        hinge_moment,
        first_yield_uplift: Some(0.5 * (lo + hi)),
    })
}

#[derive(Debug, Clone, Copy)]
pub struct MomentRotationOptions {
    pub sectors: usize,
    pub strip_nodes: usize,
    /// `None` uses the default shell rotation spring.
    pub restraint: Option<EndRestraint>,
    /// Samples of the precomputed uplift curve.
    pub curve_samples: usize,
}

impl Default for MomentRotationOptions {
    fn default() -> Self {
        Self {
            sectors: 72,
            strip_nodes: 200,
            restraint: None,
            curve_samples: 48,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentRotationSample {
    pub rotation: f64,
    pub moment: f64,
    /// Offset of the neutral axis from the tank centre towards the lifting
    /// side, m.
    pub neutral_axis: f64,
    pub max_uplift: f64,
    /// Vertical-equilibrium residual relative to the total weight.
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentRotationCurve {
    pub samples: Vec<MomentRotationSample>,
    pub uplift_curve: UpliftCurve,
    pub plastic: PlasticLimit,
    /// Compression stiffness of the foundation under the shell, N/m².
    pub contact_stiffness: f64,
    pub shell_weight: f64,
    pub total_weight: f64,
}

impl MomentRotationCurve {
    pub fn is_monotone(&self) -> bool {
        self.samples.windows(2).all(|w| w[1].moment >= w[0].moment)
    }

    /// Rotation and edge uplift reached under `moment`, by linear
    /// interpolation; `None` beyond the last sample.
    pub fn at_moment(&self, moment: f64) -> Option<(f64, f64)> {
        let s = &self.samples;
        if moment <= 0.0 {
            return Some((0.0, 0.0));
        }
        let i = s.iter().position(|p| p.moment >= moment)?;
        if i == 0 {
            return Some((s[0].rotation, s[0].max_uplift));
        }
        let (a, b) = (s[i - 1], s[i]);
        let t = (moment - a.moment) / (b.moment - a.moment);
        Some((a.rotation + t * (b.rotation - a.rotation), a.max_uplift + t * (b.max_uplift - a.max_uplift)))
    }
}

/// Moment-rotation spring of an unanchored tank base.
///
/// The shell bears on the foundation with compliance `k_c = E s / sqrt(R s)`
/// per unit circumference; the plate strips hold the shell down with
/// `P(w)` where the base lifts. For each rotation the neutral-axis offset
/// is bisected until the shell's vertical equilibrium closes.
pub fn moment_rotation(
    spec: &TankSpec,
    opts: MomentRotationOptions,
    rotations: &[f64],
    exec: Exec,
) -> Result<MomentRotationCurve> {
    if spec.geometry.anchorage == Anchorage::Anchored {
        return Err(Error::InvalidInput("anchored tanks do not uplift".into()));
    }
    if rotations.iter().any(|t| !(*t >= 0.0)) || rotations.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput("rotation grid must be nonnegative and ascending".into()));
    }
    if opts.sectors < 72 {
        return Err(Error::InvalidInput("at least 72 sectors are required".into()));
    }
    let g = &spec.geometry;
    let r = g.radius;
    let theta_max = rotations.last().copied().unwrap_or(0.0);
    let w_max = (2.0 * r * theta_max).max(1e-6);
    let strip = StripModel::for_tank(spec, w_max, opts.strip_nodes, opts.restraint)?;
    let n = opts.curve_samples.max(4);
    let grid: Vec<f64> = (0..=n).map(|k| w_max * (k as f64 / n as f64).powi(2)).collect();
    let mut curve = UpliftCurve::compute(&strip, &grid, exec)?;
    let plastic = plastic_limit_check(&strip, g.bottom_thickness, spec.shell.yield_stress)?;
    curve.annotate_yield(plastic.hinge_moment);

    let plate_mass = spec.shell.density * g.bottom_thickness * PI * r * r;
    let shell_weight = ((spec.empty_mass - plate_mass).max(0.0)) * spec.gravity;
    let liquid_weight = spec.liquid_mass() * spec.gravity;
    let total_weight = shell_weight + liquid_weight;
    let kc = spec.shell.elastic_modulus * g.shell_thickness / (r * g.shell_thickness).sqrt();

    let dphi = 2.0 * PI / opts.sectors as f64;
    let xs: Vec<f64> = (0..opts.sectors).map(|i| r * ((i as f64 + 0.5) * dphi).cos()).collect();
    let arc = r * dphi;

    // (compression, uplift hold-down, moment) for offset e
    let forces = |theta: f64, e: f64| {
        let (mut c, mut u, mut m) = (0.0, 0.0, 0.0);
        for &x in &xs {
            if x > e {
                let p = curve.force_at(theta * (x - e)) * arc;
                u += p;
                m += p * x;
            } else {
                let cc = kc * theta * (e - x) * arc;
                c += cc;
                m -= cc * x;
            }
        }
        (c, u, m)
    };

    let samples = par::map_slice(exec, rotations, |&theta| -> Result<MomentRotationSample> {
        if theta == 0.0 {
            return Ok(MomentRotationSample {
                rotation: 0.0,
                moment: 0.0,
                neutral_axis: f64::INFINITY,
                max_uplift: 0.0,
                residual: 0.0,
            });
        }
        let residual = |e: f64| {
            let (c, u, _) = forces(theta, e);
            c - shell_weight - u
        };
        let mut lo = -r;
        let mut hi = 2.0 * r + 2.0 * shell_weight / (kc * theta * 2.0 * PI * r);
        let mut trace = Vec::new();
        if residual(lo) > 0.0 || residual(hi) < 0.0 {
            return Err(Error::Equilibrium {
                rotation: theta,
                residuals: vec![residual(lo), residual(hi)],
            });
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let f = residual(mid);
            trace.push(f);
            if f > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-14 * r {
                break;
            }
        }
        let e = 0.5 * (lo + hi);
        let (c, u, m) = forces(theta, e);
        let rel = (c - shell_weight - u).abs() / total_weight;
        if !(rel < 0.005) {
            return Err(Error::Equilibrium {
                rotation: theta,
                residuals: trace,
            });
        }
        Ok(MomentRotationSample {
            rotation: theta,
            moment: m,
            neutral_axis: e,
            max_uplift: (theta * (r - e)).max(0.0),
            residual: rel,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    Ok(MomentRotationCurve {
        samples,
        uplift_curve: curve,
        plastic,
        contact_stiffness: kc,
        shell_weight,
        total_weight,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pinned_strip(w_max: f64, nodes: usize) -> StripModel {
        let spec = TankSpec::broad();
        StripModel::for_tank(&spec, w_max, nodes, Some(EndRestraint::Pinned)).unwrap()
    }

    #[test]
    fn zero_uplift_is_trivial() {
        let s = solve_strip(&pinned_strip(0.01, 50), 0.0).unwrap();
        assert_eq!(s.edge_force, 0.0);
        assert_eq!(s.uplift_length, 0.0);
        assert!(s.deflection.iter().all(|w| *w == 0.0));
    }

    #[test]
    fn pinned_matches_closed_form() {
        for &w in &[1e-4, 1e-3, 5e-3] {
            let strip = pinned_strip(w, 200);
            let s = solve_strip(&strip, w).unwrap();
            let (p, l) = pinned_closed_form(strip.rigidity, strip.load, w);
            assert!((s.edge_force / p - 1.0).abs() < 0.01, "P {} vs {p}", s.edge_force);
            assert!((s.uplift_length / l - 1.0).abs() < 0.01, "l {} vs {l}", s.uplift_length);
            let mmax = strip.load * l * l / 8.0;
            assert!((s.max_moment / mmax - 1.0).abs() < 0.02);
        }
    }

    #[test]
    fn complementarity_and_no_tension() {
        for restraint in [EndRestraint::Pinned, EndRestraint::Fixed, EndRestraint::RotationSpring(50.0)] {
            let spec = TankSpec::broad();
            let strip = StripModel::for_tank(&spec, 0.01, 120, Some(restraint)).unwrap();
            let s = solve_strip(&strip, 0.004).unwrap();
            let h = strip.length / strip.nodes as f64;
            assert!(s.complementarity() < 1e-10 * strip.load * h);
            assert!(s.reactions.iter().skip(1).all(|r| *r >= 0.0));
            assert!(s.deflection.iter().all(|w| *w >= -1e-12 * 0.004));
            // global vertical equilibrium
            let total: f64 = s.reactions.iter().sum();
            assert!((total - strip.load * strip.length).abs() < 1e-8 * strip.load * strip.length);
        }
    }

    #[test]
    fn restraint_ordering() {
        let spec = TankSpec::broad();
        let w = 0.003;
        let solve = |r| {
            let strip = StripModel::for_tank(&spec, w, 200, Some(r)).unwrap();
            solve_strip(&strip, w).unwrap()
        };
        let p = solve(EndRestraint::Pinned);
        let s = solve(EndRestraint::RotationSpring(default_rotation_spring(&spec)));
        let f = solve(EndRestraint::Fixed);
        assert!(p.uplift_length <= s.uplift_length && s.uplift_length <= f.uplift_length);
        let strip = StripModel::for_tank(&spec, w, 200, Some(EndRestraint::Fixed)).unwrap();
        let lf = fixed_end_length(strip.rigidity, strip.load, w);
        assert!((f.uplift_length / lf - 1.0).abs() < 0.01, "{} vs {lf}", f.uplift_length);
    }

    #[test]
    fn stiffer_plate_lifts_longer_segment() {
        let mut strip = pinned_strip(0.01, 150);
        let a = solve_strip(&strip, 0.002).unwrap();
        strip.rigidity *= 2.0;
        let b = solve_strip(&strip, 0.002).unwrap();
        assert!(b.uplift_length > a.uplift_length);
    }

    #[test]
    fn short_strip_detected() {
        let mut strip = pinned_strip(0.001, 60);
        strip.length = 0.5 * pinned_closed_form(strip.rigidity, strip.load, 0.01).1;
        assert!(matches!(solve_strip(&strip, 0.01), Err(Error::StripTooShort { .. })));
    }

    #[test]
    fn negative_uplift_rejected() {
        assert!(solve_strip(&pinned_strip(0.01, 50), -1e-3).is_err());
    }

    #[test]
    fn curve_is_monotone_and_conserves_energy() {
        let spec = TankSpec::broad();
        let w_max = 0.01;
        let strip = StripModel::for_tank(&spec, w_max, 200, None).unwrap();
        let grid: Vec<f64> = (0..=100).map(|k| w_max * (k as f64 / 100.0).powi(4)).collect();
        let curve = UpliftCurve::compute(&strip, &grid, Exec::default()).unwrap();
        assert_eq!(curve.samples[0].force, 0.0);
        assert!(curve.is_monotone());
        let end = solve_strip(&strip, w_max).unwrap();
        let stored = end.strain_energy + end.load_work;
        assert!((curve.work() / stored - 1.0).abs() < 0.02, "{} vs {stored}", curve.work());
    }

    #[test]
    fn node_doubling_changes_force_little() {
        let spec = TankSpec::broad();
        let w_max = 0.02;
        for &w in &[0.001, 0.005, 0.02] {
            let a = solve_strip(&StripModel::for_tank(&spec, w_max, 100, None).unwrap(), w).unwrap();
            let b = solve_strip(&StripModel::for_tank(&spec, w_max, 200, None).unwrap(), w).unwrap();
            assert!((a.edge_force / b.edge_force - 1.0).abs() < 0.005);
        }
    }

    #[test]
    fn plastic_limit_properties() {
        let spec = TankSpec::broad();
        let strip = StripModel::for_tank(&spec, 0.1, 150, None).unwrap();
        let none = plastic_limit_check(&strip, 0.001, f64::INFINITY).unwrap();
        assert!(none.first_yield_uplift.is_none());
        let a = plastic_limit_check(&strip, 0.001, 210e6).unwrap();
        let b = plastic_limit_check(&strip, 0.0005, 210e6).unwrap();
        assert!((a.hinge_moment / b.hinge_moment - 4.0).abs() < 1e-12);
        let w = a.first_yield_uplift.expect("yields within range");
        let s = solve_strip(&strip, w).unwrap();
        assert!((s.max_moment / a.hinge_moment - 1.0).abs() < 1e-6);
    }

    #[test]
    fn anchored_tank_refused() {
        let spec = TankSpec::slender();
        assert!(moment_rotation(&spec, MomentRotationOptions::default(), &[0.0, 0.001], Exec::default()).is_err());
    }

    #[test]
    fn moment_rotation_curve_properties() {
        let spec = TankSpec::broad();
        let thetas: Vec<f64> = (0..=20).map(|i| 0.0005 * i as f64).collect();
        let c = moment_rotation(&spec, MomentRotationOptions::default(), &thetas, Exec::default()).unwrap();
        assert_eq!(c.samples[0].moment, 0.0);
        assert_eq!(c.samples[0].max_uplift, 0.0);
        assert!(c.is_monotone());
        assert!(c.samples.iter().all(|s| s.residual < 0.005));
        assert!(c.samples.last().unwrap().max_uplift > 0.0);
        let mid = c.samples[10];
        let (t, _) = c.at_moment(mid.moment).unwrap();
        assert!((t - mid.rotation).abs() < 1e-12);
    }

    #[test]
    fn parallel_curve_matches_sequential() {
        let spec = TankSpec::broad();
        let thetas = [0.0, 0.002, 0.004];
        let a = moment_rotation(&spec, MomentRotationOptions::default(), &thetas, Exec::Sequential).unwrap();
        let b = moment_rotation(&spec, MomentRotationOptions::default(), &thetas, Exec::Parallel).unwrap();
        assert_eq!(a.samples, b.samples);
    }
}
