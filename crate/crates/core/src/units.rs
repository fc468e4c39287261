//! Physical constants, source configuration and the kinematic constants
//! derived from them.
//!
//! The field points along +z. Everything downstream depends only on the
//! derived values `epsilon = qE/(mc)`, `rho` and `a = epsilon * c`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light and reduced Planck constant. Natural units by default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    pub c: f64,
    pub hbar: f64,
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self { c: 1.0, hbar: 1.0 }
    }
}

impl UnitSystem {
    pub fn new(c: f64, hbar: f64) -> Result<Self> {
        let u = Self { c, hbar };
        u.validate()?;
        Ok(u)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidConfig(format!("c must be > 0, got {}", self.c)));
        }
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "hbar must be > 0, got {}",
                self.hbar
            )));
        }
        Ok(())
    }
}

/// A point charge in a constant electric field `E` along +z.
///
/// Initial velocities are given as proper velocities `u = c beta / sqrt(1 - beta^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceConfig {
    pub q: f64,
    pub m: f64,
    pub e_field: f64,
    pub u0_perp: [f64; 2],
    pub u0_par: f64,
    #[serde(default)]
    pub r0: [f64; 3],
}

impl Default for SourceConfig {
    fn default() -> Self {
        Self {
            q: 1.0,
            m: 1.0,
            e_field: 1.0,
            u0_perp: [0.0, 0.0],
            u0_par: 0.0,
            r0: [0.0; 3],
        }
    }
}

impl SourceConfig {
    /// Charge `q` at rest with unit mass, with the field chosen so that
    /// `c / epsilon = c_over_eps`.
    pub fn at_rest_with_scale(q: f64, c_over_eps: f64, units: &UnitSystem) -> Self {
        let eps = units.c / c_over_eps;
        let m = 1.0;
        Self {
            q,
            m,
            e_field: eps * m * units.c / q,
            ..Self::default()
        }
    }

    pub fn with_u_perp(mut self, ux: f64, uy: f64) -> Self {
        self.u0_perp = [ux, uy];
        self
    }

    pub fn with_u_par(mut self, u: f64) -> Self {
        self.u0_par = u;
        self
    }

    pub fn is_parallel(&self) -> bool {
        self.u0_perp == [0.0, 0.0]
    }
}

/// Constants derived from a [`SourceConfig`] in a given [`UnitSystem`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub q: f64,
    pub c: f64,
    pub hbar: f64,
    /// `qE/(mc)`, an inverse time.
    pub epsilon: f64,
    /// `sqrt(1 + |u_perp|^2 / c^2) >= 1`.
    pub rho: f64,
    /// `qE/m = epsilon c`.
    pub accel: f64,
    pub u_perp: [f64; 2],
    pub u_par: f64,
    pub r0: [f64; 3],
    /// Initial velocity over c.
    pub beta0: [f64; 3],
}

/// Derives `epsilon`, `rho`, `a` and the initial `beta`.
pub fn derive_constants(cfg: &SourceConfig, units: &UnitSystem) -> Result<DerivedConstants> {
    units.validate()?;
    if !(cfg.m > 0.0 && cfg.m.is_finite()) {
        return Err(Error::InvalidConfig(format!("mass must be > 0, got {}", cfg.m)));
    }
    if !(cfg.e_field >= 0.0 && cfg.e_field.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "field magnitude must be finite and >= 0, got {}",
            cfg.e_field
        )));
    }
    let all_finite = cfg.q.is_finite()
        && cfg.u0_perp.iter().all(|v| v.is_finite())
        && cfg.u0_par.is_finite()
        && cfg.r0.iter().all(|v| v.is_finite());
    if !all_finite {
        return Err(Error::InvalidConfig("non-finite source parameter".into()));
    }
    let c = units.c;
    let epsilon = cfg.q * cfg.e_field / (cfg.m * c);
    if !epsilon.is_finite() {
        return Err(Error::InvalidConfig("epsilon = qE/(mc) is not finite".into()));
    }
    let [ux, uy] = cfg.u0_perp;
    let u_perp2 = (ux * ux + uy * uy) / (c * c);
    let rho = (1.0 + u_perp2).sqrt();
    let gamma0 = (1.0 + u_perp2 + (cfg.u0_par / c).powi(2)).sqrt();
    let beta0 = [
        ux / (c * gamma0),
        uy / (c * gamma0),
        cfg.u0_par / (c * gamma0),
    ];
    Ok(DerivedConstants {
        q: cfg.q,
        c,
        hbar: units.hbar,
        epsilon,
        rho,
        accel: epsilon * c,
        u_perp: cfg.u0_perp,
        u_par: cfg.u0_par,
        r0: cfg.r0,
        beta0,
    })
}

impl DerivedConstants {
    /// Fails with [`Error::FieldFree`] when `epsilon == 0`.
    pub fn require_field(&self) -> Result<()> {
        if self.epsilon == 0.0 {
            Err(Error::FieldFree)
        } else {
            Ok(())
        }
    }

    pub fn is_parallel(&self) -> bool {
        self.u_perp == [0.0, 0.0]
    }

    /// `c / epsilon`, the length scale of the hyperbola.
    pub fn length_scale(&self) -> f64 {
        self.c / self.epsilon
    }
}

/// Flat key-value configuration as read from a JSON file.
///
/// Keys: `q, m, E, u0_perp_x, u0_perp_y, u0_par, c, hbar`. Missing keys keep
/// their defaults; later layers (CLI flags) override earlier ones.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub q: Option<f64>,
    pub m: Option<f64>,
    #[serde(rename = "E")]
    pub e_field: Option<f64>,
    pub u0_perp_x: Option<f64>,
    pub u0_perp_y: Option<f64>,
    pub u0_par: Option<f64>,
    pub c: Option<f64>,
    pub hbar: Option<f64>,
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Overlays every key that is set in `other`.
    pub fn merge(&mut self, other: &ConfigFile) {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(q, m, e_field, u0_perp_x, u0_perp_y, u0_par, c, hbar);
    }

    pub fn resolve(&self) -> Result<(SourceConfig, UnitSystem)> {
        let d = SourceConfig::default();
        let du = UnitSystem::default();
        let units = UnitSystem::new(self.c.unwrap_or(du.c), self.hbar.unwrap_or(du.hbar))?;
        let cfg = SourceConfig {
            q: self.q.unwrap_or(d.q),
            m: self.m.unwrap_or(d.m),
            e_field: self.e_field.unwrap_or(d.e_field),
            u0_perp: [
                self.u0_perp_x.unwrap_or(0.0),
                self.u0_perp_y.unwrap_or(0.0),
            ],
            u0_par: self.u0_par.unwrap_or(0.0),
            r0: [0.0; 3],
        };
        derive_constants(&cfg, &units)?;
        Ok((cfg, units))
    }
}
