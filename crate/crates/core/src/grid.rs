use serde::{Deserialize, Serialize};

use crate::error::{BfnError, Result};

/// Boundary treatment of a grid on [0, 1].
///
/// `Neumann` shares node placement with `Dirichlet` but carries no endpoint
/// constraint; it hosts the Cole–Hopf heat variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    Dirichlet,
    Periodic,
    Neumann,
}

/// Uniform grid on [0, 1].
///
/// Dirichlet/Neumann grids store both endpoints: `x_j = j / (n - 1)`.
/// Periodic grids store `x_j = j / n`, the node at 1 being identified with 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid1D {
    n: usize,
    bc: BoundaryKind,
}

impl Grid1D {
    pub const MIN_NODES: usize = 4;

    pub fn new(n: usize, bc: BoundaryKind) -> Result<Self> {
        if n < Self::MIN_NODES {
            return Err(BfnError::InvalidGrid(format!(
                "need at least {} nodes, got {n}",
                Self::MIN_NODES
            )));
        }
        Ok(Self { n, bc })
    }

    pub fn dirichlet(n: usize) -> Result<Self> {
        Self::new(n, BoundaryKind::Dirichlet)
    }

    pub fn periodic(n: usize) -> Result<Self> {
        Self::new(n, BoundaryKind::Periodic)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bc(&self) -> BoundaryKind {
        self.bc
    }

    pub fn is_periodic(&self) -> bool {
        self.bc == BoundaryKind::Periodic
    }

    /// Same nodes, different boundary kind.
    pub fn with_bc(&self, bc: BoundaryKind) -> Self {
        Self { n: self.n, bc }
    }

    pub fn spacing(&self) -> f64 {
        match self.bc {
            BoundaryKind::Periodic => 1.0 / self.n as f64,
            _ => 1.0 / (self.n - 1) as f64,
        }
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_tiny_grids() {
        assert!(Grid1D::dirichlet(3).is_err());
        assert!(Grid1D::periodic(4).is_ok());
    }

    #[test]
    fn node_placement() {
        let d = Grid1D::dirichlet(5).unwrap();
        assert_eq!(d.nodes(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let p = Grid1D::periodic(4).unwrap();
        assert_eq!(p.nodes(), vec![0.0, 0.25, 0.5, 0.75]);
    }
}
