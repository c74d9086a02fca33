//! Sloshing eigenmodes of a rigid cylindrical tank from a meridional
//! finite-element model.
//!
//! The liquid pressure is expanded as `p(r, z) cos(n theta)`, so the 3D
//! Laplace problem reduces to the `(r, z)` half-section `[0, R] x [0, H]`
//! meshed with bilinear quads. The free-surface condition
//! `p_tt + g p_z = 0` gives the generalized problem `K p = w² M p` with
//!
//! ```text
//! K = int (p_r q_r + p_z q_z + n²/r² p q) r dr dz
//! M = (1/g) int_{z=H} p q r dr  [+ (1/c²) int p q r dr dz when compressible]
//! ```
//!
//! Wall and base are natural (zero-flux) boundaries; for `n >= 1` the axis
//! nodes carry `p = 0`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, LanczosOptions, Skyline};
use crate::model::{Liquid, TankGeometry};
use crate::par::{self, Exec};
use crate::text::num;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryTag {
    FreeSurface,
    Wall,
    Base,
    Axis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub element: usize,
    pub nodes: [usize; 2],
    pub tag: BoundaryTag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grading {
    #[default]
    Uniform,
    /// Halves the vertical element size over the top 20% of the depth.
    SurfaceRefined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiquidMesh {
    /// `(r, z)` coordinates, m.
    pub nodes: Vec<[f64; 2]>,
    /// Counterclockwise node quadruples.
    pub elements: Vec<[usize; 4]>,
    pub boundary: Vec<BoundaryEdge>,
    pub harmonic: usize,
    pub radius: f64,
    pub height: f64,
}

fn divisions(length: f64, size: f64) -> usize {
    ((length / size) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

fn linspace(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..=n).map(move |i| if i == n { b } else { a + (b - a) * i as f64 / n as f64 })
}

pub fn build_mesh(geom: &TankGeometry, target_size: f64, grading: Grading, harmonic: usize) -> Result<LiquidMesh> {
    let (r_max, h) = (geom.radius, geom.fill_height);
    if !(target_size > 0.0) {
        return Err(Error::InvalidInput(format!("target size must be positive, got {target_size}")));
    }
    if target_size > r_max.min(h) {
        return Err(Error::InvalidInput(format!(
            "target size {target_size} exceeds min(R, H) = {}",
            r_max.min(h)
        )));
    }
    let rs: Vec<f64> = linspace(0.0, r_max, divisions(r_max, target_size)).collect();
    let zs: Vec<f64> = match grading {
        Grading::Uniform => linspace(0.0, h, divisions(h, target_size)).collect(),
        Grading::SurfaceRefined => {
            let split = 0.8 * h;
            let mut z: Vec<f64> = linspace(0.0, split, divisions(split, target_size)).collect();
            z.pop();
            z.extend(linspace(split, h, divisions(h - split, 0.5 * target_size)));
            z
        }
    };
    Ok(structured(&rs, &zs, harmonic, r_max, h))
}

/// Tensor-product mesh numbered along the shorter direction first to keep
/// the skyline narrow.
fn structured(rs: &[f64], zs: &[f64], harmonic: usize, radius: f64, height: f64) -> LiquidMesh {
    let (nr, nz) = (rs.len(), zs.len());
    let z_inner = nz <= nr;
    let id = |i: usize, j: usize| if z_inner { i * nz + j } else { j * nr + i };
    let mut nodes = vec![[0.0; 2]; nr * nz];
    for (i, &r) in rs.iter().enumerate() {
        for (j, &z) in zs.iter().enumerate() {
            nodes[id(i, j)] = [r, z];
        }
    }
    let mut elements = Vec::with_capacity((nr - 1) * (nz - 1));
    let mut boundary = Vec::new();
    for i in 0..nr - 1 {
        for j in 0..nz - 1 {
            let e = elements.len();
            let quad = [id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)];
            elements.push(quad);
            let mut tag = |nodes: [usize; 2], tag| boundary.push(BoundaryEdge { element: e, nodes, tag });
            if j == 0 {
                tag([quad[0], quad[1]], BoundaryTag::Base);
            }
            if i == nr - 2 {
                tag([quad[1], quad[2]], BoundaryTag::Wall);
            }
            if j == nz - 2 {
                tag([quad[2], quad[3]], BoundaryTag::FreeSurface);
            }
            if i == 0 {
                tag([quad[3], quad[0]], BoundaryTag::Axis);
            }
        }
    }
    LiquidMesh {
        nodes,
        elements,
        boundary,
        harmonic,
        radius,
        height,
    }
}

const GAUSS: [f64; 2] = [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8];

/// Bilinear shape functions and their local derivatives at `(xi, eta)`.
fn shape(xi: f64, eta: f64) -> ([f64; 4], [[f64; 2]; 4]) {
    let s = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];
    let mut n = [0.0; 4];
    let mut d = [[0.0; 2]; 4];
    for (a, &(sx, sy)) in s.iter().enumerate() {
        n[a] = 0.25 * (1.0 + sx * xi) * (1.0 + sy * eta);
        d[a] = [0.25 * sx * (1.0 + sy * eta), 0.25 * sy * (1.0 + sx * xi)];
    }
    (n, d)
}

impl LiquidMesh {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edges_tagged(&self, tag: BoundaryTag) -> impl Iterator<Item = &BoundaryEdge> {
        self.boundary.iter().filter(move |e| e.tag == tag)
    }

    /// Node indices on the free surface, sorted by radius.
    pub fn surface_nodes(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self
            .edges_tagged(BoundaryTag::FreeSurface)
            .flat_map(|e| e.nodes)
            .collect();
        ids.sort_by(|&a, &b| self.nodes[a][0].total_cmp(&self.nodes[b][0]).then(a.cmp(&b)));
        ids.dedup();
        ids
    }

    /// Characteristic sizes `(dr, dz)` of element `e`.
    pub fn element_size(&self, e: usize) -> (f64, f64) {
        let q = self.elements[e].map(|i| self.nodes[i]);
        let rs = q.iter().map(|p| p[0]);
        let zs = q.iter().map(|p| p[1]);
        let span = |it: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            hi - lo
        };
        (span(&mut rs.clone()), span(&mut zs.clone()))
    }

    /// Copy with node `i` moved to index `perm[i]`.
    pub fn renumbered(&self, perm: &[usize]) -> Result<LiquidMesh> {
        let n = self.nodes.len();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidInput("renumbering is not a permutation".into()));
        }
        let mut nodes = vec![[0.0; 2]; n];
        for (i, &p) in perm.iter().enumerate() {
            nodes[p] = self.nodes[i];
        }
        Ok(LiquidMesh {
            nodes,
            elements: self.elements.iter().map(|q| q.map(|i| perm[i])).collect(),
            boundary: self
                .boundary
                .iter()
                .map(|b| BoundaryEdge {
                    nodes: b.nodes.map(|i| perm[i]),
                    ..*b
                })
                .collect(),
            ..self.clone()
        })
    }

    /// Checks the mesh invariants: nonnegative radii, positive Jacobians at
    /// every Gauss point, free-surface edges at `z = H`.
    pub fn validate(&self) -> Result<()> {
        if let Some(p) = self.nodes.iter().find(|p| p[0] < 0.0) {
            return Err(Error::InvalidInput(format!("node at negative radius {}", p[0])));
        }
        for e in 0..self.elements.len() {
            self.gauss_points(e)?;
        }
        let tol = 1e-9 * self.height;
        for edge in self.edges_tagged(BoundaryTag::FreeSurface) {
            if edge.nodes.iter().any(|&i| (self.nodes[i][1] - self.height).abs() > tol) {
                return Err(Error::InvalidInput(format!(
                    "free-surface edge of element {} off z = H",
                    edge.element
                )));
            }
        }
        Ok(())
    }

    /// `(N, dN/dr, dN/dz, r, weight * det J)` at the 2x2 Gauss points.
    fn gauss_points(&self, e: usize) -> Result<Vec<GaussPoint>> {
        let q = self.elements[e].map(|i| self.nodes[i]);
        let mut out = Vec::with_capacity(4);
        for &xi in &GAUSS {
            for &eta in &GAUSS {
                let (n, d) = shape(xi, eta);
                let mut j = [[0.0; 2]; 2];
                let mut r = 0.0;
                for a in 0..4 {
                    r += n[a] * q[a][0];
                    for k in 0..2 {
                        j[k][0] += d[a][k] * q[a][0];
                        j[k][1] += d[a][k] * q[a][1];
                    }
                }
                let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
                if !(det > 0.0) {
                    return Err(Error::DegenerateElement { element: e });
                }
                let inv = [[j[1][1] / det, -j[0][1] / det], [-j[1][0] / det, j[0][0] / det]];
                let mut g = [[0.0; 2]; 4];
                for a in 0..4 {
                    g[a] = [
                        inv[0][0] * d[a][0] + inv[0][1] * d[a][1],
                        inv[1][0] * d[a][0] + inv[1][1] * d[a][1],
                    ];
                }
                out.push((n, g, r, det));
            }
        }
        Ok(out)
    }

    /// Node list and element list as CSV for external plotting.
    pub fn to_csv(&self) -> (String, String) {
        let mut nodes = String::from("id,r,z\n");
        for (i, p) in self.nodes.iter().enumerate() {
            let _ = writeln!(nodes, "{i},{},{}", num(p[0]), num(p[1]));
        }
        let mut elems = String::from("id,n0,n1,n2,n3\n");
        for (e, q) in self.elements.iter().enumerate() {
            let _ = writeln!(elems, "{e},{},{},{},{}", q[0], q[1], q[2], q[3]);
        }
        (nodes, elems)
    }
}

/// Element stiffness and volume mass (without the `1/c²` factor).
/// Shape values, global gradients, radius and weight at one quadrature point.
type GaussPoint = ([f64; 4], [[f64; 2]; 4], f64, f64);
type Mat4 = [[f64; 4]; 4];

fn element_matrices(mesh: &LiquidMesh, e: usize) -> Result<(Mat4, Mat4)> {
    let n2 = (mesh.harmonic * mesh.harmonic) as f64;
    let mut k = [[0.0; 4]; 4];
    let mut m = [[0.0; 4]; 4];
    for (n, g, r, w) in mesh.gauss_points(e)? {
        let wr = w * r;
        for a in 0..4 {
            for b in 0..4 {
                k[a][b] += wr * (g[a][0] * g[b][0] + g[a][1] * g[b][1]) + w * n2 / r * n[a] * n[b];
                m[a][b] += wr * n[a] * n[b];
            }
        }
    }
    Ok((k, m))
}

/// `int_edge N_a N_b r ds` for a straight two-node edge, 2-point Gauss.
fn edge_mass(p0: [f64; 2], p1: [f64; 2]) -> [[f64; 2]; 2] {
    let len = ((p1[0] - p0[0]).powi(2) + (p1[1] - p0[1]).powi(2)).sqrt();
    let mut m = [[0.0; 2]; 2];
    for &t in &GAUSS {
        let n = [0.5 * (1.0 - t), 0.5 * (1.0 + t)];
        let r = n[0] * p0[0] + n[1] * p1[0];
        for a in 0..2 {
            for b in 0..2 {
                m[a][b] += 0.5 * len * r * n[a] * n[b];
            }
        }
    }
    m
}

/// Assembled operators on the unconstrained degrees of freedom.
#[derive(Debug, Clone)]
pub struct Assembled {
    pub stiffness: Skyline,
    pub mass: Skyline,
    /// Equation number of each node, `None` for constrained axis nodes.
    pub dof_of_node: Vec<Option<usize>>,
    pub harmonic: usize,
}

impl Assembled {
    pub fn dofs(&self) -> usize {
        self.stiffness.dim()
    }

    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        self.dof_of_node.iter().map(|d| d.map_or(0.0, |i| x[i])).collect()
    }
}

pub fn assemble(mesh: &LiquidMesh, liquid: &Liquid, gravity: f64, compressible: bool) -> Result<Assembled> {
    assemble_with(mesh, liquid, gravity, compressible, Exec::default())
}

/// Element matrices are computed on the worker pool and scattered in
/// element order, so the sums are bitwise reproducible.
pub fn assemble_with(
    mesh: &LiquidMesh,
    liquid: &Liquid,
    gravity: f64,
    compressible: bool,
    exec: Exec,
) -> Result<Assembled> {
    let axis_tol = 1e-12 * mesh.radius;
    let mut next = 0;
    let dof_of_node: Vec<Option<usize>> = mesh
        .nodes
        .iter()
        .map(|p| {
            if mesh.harmonic >= 1 && p[0] <= axis_tol {
                None
            } else {
                next += 1;
                Some(next - 1)
            }
        })
        .collect();
    let ndof = next;
    let element_dofs: Vec<Vec<usize>> = mesh
        .elements
        .iter()
        .map(|q| q.iter().filter_map(|&i| dof_of_node[i]).collect())
        .collect();
    let mut k = Skyline::from_connectivity(ndof, element_dofs.iter().map(|v| v.as_slice()));
    let mut m = Skyline::from_connectivity(ndof, element_dofs.iter().map(|v| v.as_slice()));

    let local = par::map_indexed(exec, mesh.elements.len(), |e| element_matrices(mesh, e));
    let inv_c2 = if compressible {
        1.0 / liquid.sound_speed().powi(2)
    } else {
        0.0
    };
    for (e, res) in local.into_iter().enumerate() {
        let (ke, me) = res?;
        let q = mesh.elements[e];
        for a in 0..4 {
            let Some(i) = dof_of_node[q[a]] else { continue };
            for b in 0..4 {
                let Some(j) = dof_of_node[q[b]] else { continue };
                if i <= j {
                    k.add(i, j, ke[a][b]);
                    if compressible {
                        m.add(i, j, inv_c2 * me[a][b]);
                    }
                }
            }
        }
    }
    for edge in mesh.edges_tagged(BoundaryTag::FreeSurface) {
        let [n0, n1] = edge.nodes;
        let me = edge_mass(mesh.nodes[n0], mesh.nodes[n1]);
        let ids = [dof_of_node[n0], dof_of_node[n1]];
        for a in 0..2 {
            let Some(i) = ids[a] else { continue };
            for b in 0..2 {
                let Some(j) = ids[b] else { continue };
                if i <= j {
                    m.add(i, j, me[a][b] / gravity);
                }
            }
        }
    }
    Ok(Assembled {
        stiffness: k,
        mass: m,
        dof_of_node,
        harmonic: mesh.harmonic,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenSolution {
    /// `w²`, ascending, (rad/s)².
    pub omega_squared: Vec<f64>,
    /// Nodal pressures, zero at constrained nodes, unit modal mass.
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub harmonic: usize,
    #[serde(skip)]
    pub mesh: LiquidMesh,
}

impl EigenSolution {
    pub fn periods(&self) -> Vec<f64> {
        self.omega_squared
            .iter()
            .map(|w2| 2.0 * std::f64::consts::PI / w2.sqrt())
            .collect()
    }

    /// `(r, z, p)` of mode `k` as CSV.
    pub fn mode_csv(&self, k: usize) -> Result<String> {
        let v = self.vectors.get(k).ok_or_else(|| {
            Error::InvalidInput(format!("mode {k} not in solution of {}", self.vectors.len()))
        })?;
        let mut out = String::from("r,z,p\n");
        for (p, val) in self.mesh.nodes.iter().zip(v) {
            let _ = writeln!(out, "{},{},{}", num(p[0]), num(p[1]), num(*val));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy)]
#[derive(Default)]
pub struct SolveOptions {
    /// Spectral shift; `None` picks 0 for `n >= 1` and a small negative
    /// value for the singular `n = 0` stiffness.
    pub shift: Option<f64>,
    pub lanczos: LanczosOptions,
}


pub fn solve_modes(sys: &Assembled, mesh: &LiquidMesh, count: usize, opts: SolveOptions) -> Result<EigenSolution> {
    if count == 0 {
        return Err(Error::InvalidInput("count must be >= 1".into()));
    }
    let sigma = opts.shift.unwrap_or(if sys.harmonic == 0 {
        -1e-2 * 9.81 / mesh.radius
    } else {
        0.0
    });
    let pairs = linalg::shift_invert_lanczos(&sys.stiffness, &sys.mass, count, sigma, opts.lanczos)?;
    Ok(EigenSolution {
        omega_squared: pairs.values,
        vectors: pairs.vectors.iter().map(|v| sys.expand(v)).collect(),
        residuals: pairs.residuals,
        harmonic: sys.harmonic,
        mesh: mesh.clone(),
    })
}

/// Mesh, assemble and solve in one step.
pub fn tank_modes(
    geom: &TankGeometry,
    liquid: &Liquid,
    gravity: f64,
    size: f64,
    harmonic: usize,
    count: usize,
    exec: Exec,
) -> Result<EigenSolution> {
    let mesh = build_mesh(geom, size, Grading::Uniform, harmonic)?;
    let sys = assemble_with(&mesh, liquid, gravity, false, exec)?;
    solve_modes(&sys, &mesh, count, SolveOptions::default())
}

/// Free-surface elevation shape `eta(r) = p(r, H) / (rho g)` of mode `k`,
/// as `(r, eta)` pairs sorted by radius.
pub fn surface_elevation(sol: &EigenSolution, k: usize, liquid: &Liquid, gravity: f64) -> Result<Vec<(f64, f64)>> {
    let v = sol
        .vectors
        .get(k)
        .ok_or_else(|| Error::InvalidInput(format!("mode {k} not in solution")))?;
    Ok(sol
        .mesh
        .surface_nodes()
        .into_iter()
        .map(|i| (sol.mesh.nodes[i][0], v[i] / (liquid.density * gravity)))
        .collect())
}
