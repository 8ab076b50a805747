use serde::{Deserialize, Serialize};

use crate::error::{BfnError, Result};
use crate::grid::{BoundaryKind, Grid1D};

/// Transport velocity of the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Advection {
    /// `a(x) = c`.
    Constant(f64),
    /// Samples of `a(x)` at the grid nodes.
    Profile(Vec<f64>),
    /// Bürgers: the state advects itself.
    SelfAdvection,
}

/// The four PDE classes covered by the laboratory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquationClass {
    ViscousLinear,
    InviscidLinear,
    ViscousBurgers,
    InviscidBurgers,
}

/// Which equation is solved, on which grid, up to which final time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquationSpec {
    nu: f64,
    advection: Advection,
    grid: Grid1D,
    t_final: f64,
}

impl EquationSpec {
    pub fn new(nu: f64, advection: Advection, grid: Grid1D, t_final: f64) -> Result<Self> {
        if !(nu.is_finite() && nu >= 0.0) {
            return Err(BfnError::InvalidSpec(format!("viscosity must be >= 0, got {nu}")));
        }
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(BfnError::InvalidSpec(format!(
                "final time must be positive, got {t_final}"
            )));
        }
        match grid.bc() {
            BoundaryKind::Dirichlet if nu == 0.0 => {
                return Err(BfnError::InvalidSpec(
                    "inviscid equations are posed on the torus (periodic bc)".into(),
                ))
            }
            BoundaryKind::Periodic if nu > 0.0 => {
                return Err(BfnError::InvalidSpec(
                    "viscous equations are posed with Dirichlet bc".into(),
                ))
            }
            BoundaryKind::Neumann => {
                return Err(BfnError::InvalidSpec(
                    "Neumann grids only host the Cole-Hopf heat variable".into(),
                ))
            }
            _ => {}
        }
        match &advection {
            Advection::Constant(c) if !c.is_finite() => {
                return Err(BfnError::InvalidSpec("advection speed must be finite".into()))
            }
            Advection::Profile(a) => {
                if a.len() != grid.n() {
                    return Err(BfnError::InvalidSpec(format!(
                        "advection profile has {} samples, grid has {} nodes",
                        a.len(),
                        grid.n()
                    )));
                }
                if a.iter().any(|v| !v.is_finite()) {
                    return Err(BfnError::InvalidSpec(
                        "advection profile must be finite".into(),
                    ));
                }
            }
            _ => {}
        }
        Ok(Self {
            nu,
            advection,
            grid,
            t_final,
        })
    }

    pub fn viscous_linear(nu: f64, c: f64, n: usize, t_final: f64) -> Result<Self> {
        Self::new(nu, Advection::Constant(c), Grid1D::dirichlet(n)?, t_final)
    }

    pub fn inviscid_linear(advection: Advection, n: usize, t_final: f64) -> Result<Self> {
        Self::new(0.0, advection, Grid1D::periodic(n)?, t_final)
    }

    pub fn inviscid_burgers(n: usize, t_final: f64) -> Result<Self> {
        Self::new(0.0, Advection::SelfAdvection, Grid1D::periodic(n)?, t_final)
    }

    pub fn viscous_burgers(nu: f64, n: usize, t_final: f64) -> Result<Self> {
        Self::new(nu, Advection::SelfAdvection, Grid1D::dirichlet(n)?, t_final)
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn advection(&self) -> &Advection {
        &self.advection
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    pub fn bc(&self) -> BoundaryKind {
        self.grid.bc()
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn with_t_final(&self, t_final: f64) -> Result<Self> {
        Self::new(self.nu, self.advection.clone(), self.grid, t_final)
    }

    pub fn class(&self) -> EquationClass {
        let viscous = self.nu > 0.0;
        let burgers = matches!(self.advection, Advection::SelfAdvection);
        match (viscous, burgers) {
            (true, false) => EquationClass::ViscousLinear,
            (false, false) => EquationClass::InviscidLinear,
            (true, true) => EquationClass::ViscousBurgers,
            (false, true) => EquationClass::InviscidBurgers,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn viscosity_matches_boundary() {
        assert!(EquationSpec::new(0.1, Advection::Constant(0.0), Grid1D::periodic(8).unwrap(), 1.0).is_err());
        assert!(EquationSpec::new(0.0, Advection::Constant(0.0), Grid1D::dirichlet(8).unwrap(), 1.0).is_err());
        assert!(EquationSpec::viscous_linear(0.01, 0.0, 33, 1.0).is_ok());
    }

    #[test]
    fn profile_must_be_finite() {
        let g = Grid1D::periodic(4).unwrap();
        let bad = Advection::Profile(vec![1.0, f64::INFINITY, 1.0, 1.0]);
        assert!(EquationSpec::new(0.0, bad, g, 1.0).is_err());
        let short = Advection::Profile(vec![1.0; 3]);
        assert!(EquationSpec::new(0.0, short, g, 1.0).is_err());
    }

    #[test]
    fn classes() {
        assert_eq!(
            EquationSpec::inviscid_burgers(16, 0.5).unwrap().class(),
            EquationClass::InviscidBurgers
        );
        assert_eq!(
            EquationSpec::viscous_burgers(0.05, 16, 0.5).unwrap().class(),
            EquationClass::ViscousBurgers
        );
    }
}
