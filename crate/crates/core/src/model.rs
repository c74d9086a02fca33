//! Tank, liquid and similitude descriptions shared by every analysis.
//!
//! A [`TankSpec`] is read from a TOML file with `[geometry]`, `[shell]`,
//! `[liquid]` and `[scale]` tables. Two case-study tanks ship with the crate
//! and are available through [`TankSpec::bundled`].

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_GRAVITY: f64 = 9.81;

const SLENDER_TOML: &str = include_str!("../data/slender.toml");
const BROAD_TOML: &str = include_str!("../data/broad.toml");

/// Names accepted by [`TankSpec::bundled`].
pub const BUNDLED: [&str; 2] = ["slender", "broad"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Anchorage {
    Anchored,
    Unanchored,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TankGeometry {
    /// Shell radius R, m.
    pub radius: f64,
    /// Liquid fill height H, m.
    pub fill_height: f64,
    pub total_height: f64,
    /// Shell wall thickness s, m.
    pub shell_thickness: f64,
    pub bottom_thickness: f64,
    pub anchorage: Anchorage,
    /// Lumped stiffener ring mass at the shell top, kg.
    #[serde(default)]
    pub top_ring_mass: f64,
}

impl TankGeometry {
    /// Slenderness H/R.
    pub fn slenderness(&self) -> f64 {
        self.fill_height / self.radius
    }

    pub fn freeboard(&self) -> f64 {
        self.total_height - self.fill_height
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellMaterial {
    pub density: f64,
    pub elastic_modulus: f64,
    pub poisson_ratio: f64,
    pub yield_stress: f64,
}

impl ShellMaterial {
    pub fn shear_modulus(&self) -> f64 {
        self.elastic_modulus / (2.0 * (1.0 + self.poisson_ratio))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Liquid {
    pub density: f64,
    pub bulk_modulus: f64,
}

impl Liquid {
    /// Water as used for both case studies.
    pub fn water() -> Self {
        Self {
            density: 998.21,
            bulk_modulus: 2150.0e6,
        }
    }

    pub fn sound_speed(&self) -> f64 {
        (self.bulk_modulus / self.density).sqrt()
    }
}

/// Froude similitude between a reduced-scale model and its prototype, with
/// gravity unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleModel {
    /// Model length over prototype length.
    pub length_ratio: f64,
}

impl ScaleModel {
    pub fn new(length_ratio: f64) -> Result<Self> {
        if !(length_ratio > 0.0 && length_ratio <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "length ratio must lie in (0, 1], got {length_ratio}"
            )));
        }
        Ok(Self { length_ratio })
    }

    pub fn unit() -> Self {
        Self { length_ratio: 1.0 }
    }

    pub fn time_ratio(&self) -> f64 {
        self.length_ratio.sqrt()
    }

    pub fn acceleration_ratio(&self) -> f64 {
        1.0
    }

    pub fn displacement_ratio(&self) -> f64 {
        self.length_ratio
    }
}

impl Default for ScaleModel {
    fn default() -> Self {
        Self::unit()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TankSpec {
    #[serde(default)]
    pub name: String,
    /// Mass of the empty tank, kg.
    pub empty_mass: f64,
    #[serde(default = "default_gravity")]
    pub gravity: f64,
    /// Measured specimen mass, when known; checked by [`validate`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_total_mass: Option<f64>,
    pub geometry: TankGeometry,
    pub shell: ShellMaterial,
    pub liquid: Liquid,
    #[serde(default)]
    pub scale: ScaleModel,
}

fn default_gravity() -> f64 {
    DEFAULT_GRAVITY
}

impl TankSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_toml_str(&text)
    }

    /// One of the case-study tanks in [`BUNDLED`].
    pub fn bundled(name: &str) -> Result<Self> {
        let text = match name {
            "slender" => SLENDER_TOML,
            "broad" => BROAD_TOML,
            other => {
                return Err(Error::Config(format!(
                    "no bundled spec named {other:?} (expected one of {BUNDLED:?})"
                )))
            }
        };
        Self::from_toml_str(text)
    }

    pub fn slender() -> Self {
        Self::bundled("slender").expect("bundled slender spec parses")
    }

    pub fn broad() -> Self {
        Self::bundled("broad").expect("bundled broad spec parses")
    }

    /// Either a bundled name or a path to a TOML file.
    pub fn load(name_or_path: &str) -> Result<Self> {
        if BUNDLED.contains(&name_or_path) {
            Self::bundled(name_or_path)
        } else {
            Self::from_file(name_or_path)
        }
    }

    pub fn slenderness(&self) -> f64 {
        self.geometry.slenderness()
    }

    pub fn liquid_mass(&self) -> f64 {
        liquid_mass(self)
    }

    pub fn total_mass(&self) -> f64 {
        self.empty_mass + self.liquid_mass()
    }

    pub fn freeboard(&self) -> f64 {
        self.geometry.freeboard()
    }

    /// Geometrically similar tank: every length times `factor`, masses by
    /// `factor^3`, materials and gravity unchanged.
    pub fn geometrically_scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        let g = &mut out.geometry;
        g.radius *= factor;
        g.fill_height *= factor;
        g.total_height *= factor;
        g.shell_thickness *= factor;
        g.bottom_thickness *= factor;
        g.top_ring_mass *= factor.powi(3);
        out.empty_mass *= factor.powi(3);
        out.declared_total_mass = out.declared_total_mass.map(|m| m * factor.powi(3));
        out
    }
}

/// Liquid mass `rho * pi * R^2 * H`, kg.
pub fn liquid_mass(spec: &TankSpec) -> f64 {
    let g = &spec.geometry;
    spec.liquid.density * PI * g.radius * g.radius * g.fill_height
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Every violated invariant of `spec`; empty when the spec is usable.
pub fn validate(spec: &TankSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut check = |ok: bool, field: &'static str, message: String| {
        if !ok {
            out.push(Violation { field, message });
        }
    };
    let g = &spec.geometry;
    let finite_pos = |v: f64| v.is_finite() && v > 0.0;

    check(finite_pos(g.radius), "radius", format!("must be > 0, got {}", g.radius));
    check(
        finite_pos(g.shell_thickness),
        "shell_thickness",
        format!("must be > 0, got {}", g.shell_thickness),
    );
    check(
        finite_pos(g.bottom_thickness),
        "bottom_thickness",
        format!("must be > 0, got {}", g.bottom_thickness),
    );
    check(
        finite_pos(g.fill_height),
        "fill_height",
        format!("must be > 0, got {}", g.fill_height),
    );
    check(
        g.total_height.is_finite() && g.fill_height <= g.total_height,
        "total_height",
        format!(
            "must be >= fill height {}, got {}",
            g.fill_height, g.total_height
        ),
    );
    check(
        g.top_ring_mass.is_finite() && g.top_ring_mass >= 0.0,
        "top_ring_mass",
        format!("must be >= 0, got {}", g.top_ring_mass),
    );

    let s = &spec.shell;
    check(finite_pos(s.density), "shell.density", format!("must be > 0, got {}", s.density));
    check(
        finite_pos(s.elastic_modulus),
        "elastic_modulus",
        format!("must be > 0, got {}", s.elastic_modulus),
    );
    check(
        s.poisson_ratio.is_finite() && (0.0..0.5).contains(&s.poisson_ratio),
        "poisson_ratio",
        format!("must lie in [0, 0.5), got {}", s.poisson_ratio),
    );
    check(
        s.yield_stress > 0.0,
        "yield_stress",
        format!("must be > 0, got {}", s.yield_stress),
    );

    let l = &spec.liquid;
    check(finite_pos(l.density), "liquid.density", format!("must be > 0, got {}", l.density));
    check(
        finite_pos(l.bulk_modulus),
        "bulk_modulus",
        format!("must be > 0, got {}", l.bulk_modulus),
    );

    check(
        spec.scale.length_ratio > 0.0 && spec.scale.length_ratio <= 1.0,
        "length_ratio",
        format!("must lie in (0, 1], got {}", spec.scale.length_ratio),
    );
    check(
        spec.empty_mass.is_finite() && spec.empty_mass >= 0.0,
        "empty_mass",
        format!("must be >= 0, got {}", spec.empty_mass),
    );
    check(finite_pos(spec.gravity), "gravity", format!("must be > 0, got {}", spec.gravity));

    if out.is_empty() {
        if let Some(declared) = spec.declared_total_mass {
            let total = spec.total_mass();
            let rel = (total - declared).abs() / declared;
            if rel > 0.02 {
                out.push(Violation {
                    field: "declared_total_mass",
                    message: format!(
                        "computed total {total:.1} kg differs from declared {declared} kg by {:.2}%",
                        rel * 100.0
                    ),
                });
            }
        }
    }
    out
}

/// [`validate`] folded into a single error.
pub fn ensure_valid(spec: &TankSpec) -> Result<()> {
    let v = validate(spec);
    if v.is_empty() {
        Ok(())
    } else {
        let msgs: Vec<String> = v.iter().map(ToString::to_string).collect();
        Err(Error::InvalidInput(msgs.join("; ")))
    }
}
