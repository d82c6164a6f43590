//! Tensor-product Gauss–Legendre quadrature over rectangles of the phase plane.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::phasespace::GaussianState;

/// Probability mass allowed outside the integration box.
pub const MAX_BOUNDARY_MASS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    /// Gauss–Legendre nodes per axis.
    pub nodes: usize,
    /// Box half-width in units of the major-axis standard deviation.
    pub k_sigma: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { nodes: 201, k_sigma: 8.0 }
    }
}

/// Axis-aligned box `[cx ± hx] × [cy ± hy]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub cx: f64,
    pub cy: f64,
    pub hx: f64,
    pub hy: f64,
}

impl Rect {
    pub fn square(cx: f64, cy: f64, half: f64) -> Self {
        Self { cx, cy, hx: half, hy: half }
    }
}

impl QuadratureSpec {
    /// Box centred on the state's mean, `k_sigma` major-axis deviations wide.
    /// Fails when the Gaussian mass outside it exceeds [`MAX_BOUNDARY_MASS`].
    pub fn box_for(&self, state: &GaussianState) -> Result<Rect> {
        if self.k_sigma < 6.0 {
            return Err(Error::Accuracy(format!(
                "quadrature box of {} sigma is below the 6 sigma minimum",
                self.k_sigma
            )));
        }
        let half = self.k_sigma * state.sigma_max();
        let cov = state.real_covariance();
        let tail = |var: f64| erfc(half / (2.0 * var).sqrt());
        let outside = tail(cov[0][0]) + tail(cov[1][1]);
        if outside > MAX_BOUNDARY_MASS {
            return Err(Error::Accuracy(format!(
                "{outside:e} of the probability mass lies outside the quadrature box"
            )));
        }
        Ok(Rect::square(state.mu().re, state.mu().im, half))
    }

    pub fn rule(&self) -> Result<TensorRule> {
        TensorRule::new(self.nodes)
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, applied on both axes.
#[derive(Debug, Clone)]
pub struct TensorRule {
    pairs: Vec<(f64, f64)>,
}

impl TensorRule {
    pub fn new(nodes: usize) -> Result<Self> {
        let n = NonZeroUsize::new(nodes)
            .ok_or_else(|| Error::Config("quadrature needs at least one node".into()))?;
        let rule = GaussLegendre::new(n);
        Ok(Self { pairs: rule.as_node_weight_pairs().to_vec() })
    }

    /// `∫∫ f(x, y) dx dy` over `rect`. Rows are summed in parallel and reduced
    /// in a fixed order, so results are bit-reproducible.
    pub fn integrate<F>(&self, rect: Rect, f: F) -> f64
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        let row_sums: Vec<f64> = self
            .pairs
            .par_iter()
            .map(|&(u, wu)| {
                let x = rect.cx + rect.hx * u;
                wu * self
                    .pairs
                    .iter()
                    .map(|&(v, wv)| wv * f(x, rect.cy + rect.hy * v))
                    .sum::<f64>()
            })
            .collect();
        rect.hx * rect.hy * row_sums.iter().sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phasespace::PhasePoint;
    use num_complex::Complex64;

    #[test]
    fn gaussian_mass_is_one() {
        let st = GaussianState::new(Complex64::new(0.4, -1.0), 1.7, Complex64::new(0.6, 1.1)).unwrap();
        let spec = QuadratureSpec::default();
        let rect = spec.box_for(&st).unwrap();
        let mass = spec
            .rule()
            .unwrap()
            .integrate(rect, |x, y| st.wigner(PhasePoint::from_xy(x, y).unwrap()));
        assert!((mass - 1.0).abs() < 1e-8, "{mass}");
    }

    #[test]
    fn rejects_small_boxes() {
        let st = GaussianState::vacuum();
        let spec = QuadratureSpec { nodes: 51, k_sigma: 5.0 };
        assert!(matches!(spec.box_for(&st), Err(Error::Accuracy(_))));
        // 6σ leaves ~4e-9 outside, still above the mass tolerance
        let spec = QuadratureSpec { nodes: 51, k_sigma: 6.0 };
        assert!(matches!(spec.box_for(&st), Err(Error::Accuracy(_))));
        let spec = QuadratureSpec { nodes: 51, k_sigma: 7.0 };
        assert!(spec.box_for(&st).is_ok());
    }

    #[test]
    fn polynomial_exactness() {
        let rule = TensorRule::new(5).unwrap();
        let v = rule.integrate(Rect::square(0.0, 0.0, 1.0), |x, y| x * x * y * y);
        assert!((v - 4.0 / 9.0).abs() < 1e-15);
    }
}
