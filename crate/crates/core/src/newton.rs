//! Polynomials in Newton form, `p(x) = sum_l c_l N_l(x)` with
//! `N_0 = 1` and `N_l(x) = (x - x_0) ... (x - x_{l-1})`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonPoly {
    nodes: Vec<f64>,
    dd: Vec<f64>,
}

impl NewtonPoly {
    /// Builds a polynomial directly from nodes and divided differences.
    /// Only the first `dd.len() - 1` nodes enter the basis, but all nodes are
    /// kept so that a fitted polynomial remembers its abscissae.
    pub fn from_parts(nodes: Vec<f64>, dd: Vec<f64>) -> Result<Self> {
        if dd.is_empty() || nodes.len() < dd.len() {
            return Err(Error::InvalidConfig(format!(
                "Newton polynomial needs at least as many nodes ({}) as coefficients ({})",
                nodes.len(),
                dd.len()
            )));
        }
        check_distinct(&nodes)?;
        Ok(Self { nodes, dd })
    }

    pub fn constant(value: f64) -> Self {
        Self {
            nodes: vec![0.0],
            dd: vec![value],
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn divided_differences(&self) -> &[f64] {
        &self.dd
    }

    pub fn degree(&self) -> usize {
        self.dd.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.dd.iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut p = 0.0;
        for l in (0..self.dd.len()).rev() {
            p = if l + 1 == self.dd.len() {
                self.dd[l]
            } else {
                p * (x - self.nodes[l]) + self.dd[l]
            };
        }
        p
    }

    /// Value, first and second derivative by nested multiplication in the
    /// Newton basis.
    pub fn eval_derivs(&self, x: f64) -> (f64, f64, f64) {
        let top = self.dd.len() - 1;
        let mut p = self.dd[top];
        let mut dp = 0.0;
        let mut ddp = 0.0;
        for l in (0..top).rev() {
            let w = x - self.nodes[l];
            ddp = ddp * w + 2.0 * dp;
            dp = dp * w + p;
            p = p * w + self.dd[l];
        }
        (p, dp, ddp)
    }

    /// Returns a copy with every divided difference multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            nodes: self.nodes.clone(),
            dd: self.dd.iter().map(|c| c * k).collect(),
        }
    }
}

fn check_distinct(nodes: &[f64]) -> Result<()> {
    for (i, a) in nodes.iter().enumerate() {
        if !a.is_finite() {
            return Err(Error::InvalidConfig(format!("non-finite node {a}")));
        }
        if nodes[..i].contains(a) {
            return Err(Error::DuplicateNode(*a));
        }
    }
    Ok(())
}

/// Divided-difference table for the interpolating polynomial through
/// `(nodes[i], values[i])`.
pub fn newton_interpolate(nodes: &[f64], values: &[f64]) -> Result<NewtonPoly> {
    if nodes.is_empty() || nodes.len() != values.len() {
        return Err(Error::InvalidConfig(format!(
            "interpolation needs matching non-empty inputs ({} nodes, {} values)",
            nodes.len(),
            values.len()
        )));
    }
    check_distinct(nodes)?;
    let mut dd = values.to_vec();
    let n = nodes.len();
    for level in 1..n {
        for i in (level..n).rev() {
            dd[i] = (dd[i] - dd[i - 1]) / (nodes[i] - nodes[i - level]);
        }
    }
    Ok(NewtonPoly {
        nodes: nodes.to_vec(),
        dd,
    })
}
