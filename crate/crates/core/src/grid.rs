use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::gauss_legendre;
use crate::C64;

/// Ordered rapidity nodes with quadrature weights and the particle mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid", into = "RawGrid")]
pub struct RapidityGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    mass: f64,
}

#[derive(Serialize, Deserialize)]
struct RawGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    mass: f64,
}

impl TryFrom<RawGrid> for RapidityGrid {
    type Error = Error;
    fn try_from(raw: RawGrid) -> Result<Self> {
        Self::new(raw.nodes, Some(raw.weights), raw.mass)
    }
}

impl From<RapidityGrid> for RawGrid {
    fn from(g: RapidityGrid) -> Self {
        Self {
            nodes: g.nodes,
            weights: g.weights,
            mass: g.mass,
        }
    }
}

/// How quadrature weights are assigned to a grid built from a range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum WeightRule {
    /// Equally spaced nodes, all weights 1 (pure Kronecker model).
    #[default]
    Unit,
    /// Equally spaced nodes with trapezoidal weights.
    Trapezoid,
    /// Gauss–Legendre nodes and weights on the range.
    GaussLegendre,
}

impl RapidityGrid {
    pub fn new(nodes: Vec<f64>, weights: Option<Vec<f64>>, mass: f64) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidParameter("grid needs at least one node".into()));
        }
        if !nodes.iter().all(|x| x.is_finite()) || nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "grid nodes must be finite and strictly increasing".into(),
            ));
        }
        let weights = weights.unwrap_or_else(|| vec![1.0; nodes.len()]);
        if weights.len() != nodes.len() {
            return Err(Error::SizeMismatch {
                expected: nodes.len(),
                found: weights.len(),
            });
        }
        if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidParameter("grid weights must be positive".into()));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidParameter(format!("mass must be positive, got {mass}")));
        }
        Ok(Self {
            nodes,
            weights,
            mass,
        })
    }

    pub fn from_range(d: usize, min: f64, max: f64, mass: f64, rule: WeightRule) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("grid needs at least one node".into()));
        }
        if d > 1 && min >= max {
            return Err(Error::InvalidParameter(format!("empty range [{min}, {max}]")));
        }
        let equispaced = || -> Vec<f64> {
            if d == 1 {
                vec![0.5 * (min + max)]
            } else {
                let h = (max - min) / (d - 1) as f64;
                (0..d).map(|i| min + h * i as f64).collect()
            }
        };
        match rule {
            WeightRule::Unit => Self::new(equispaced(), None, mass),
            WeightRule::Trapezoid => {
                let nodes = equispaced();
                let h = if d == 1 { max - min } else { nodes[1] - nodes[0] };
                let mut w = vec![h; d];
                if d > 1 {
                    w[0] *= 0.5;
                    w[d - 1] *= 0.5;
                }
                Self::new(nodes, Some(w), mass)
            }
            WeightRule::GaussLegendre => {
                let (x, w) = gauss_legendre(d);
                let half = 0.5 * (max - min);
                let mid = 0.5 * (max + min);
                Self::new(
                    x.iter().map(|t| mid + half * t).collect(),
                    Some(w.iter().map(|wi| wi * half).collect()),
                    mass,
                )
            }
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn node(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    /// Samples a continuum wavefunction as `ψ_i = ψ(θ_i)·√w_i`.
    pub fn sample<F: Fn(f64) -> C64>(&self, f: F) -> Vec<C64> {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| f(t) * w.sqrt())
            .collect()
    }
}
