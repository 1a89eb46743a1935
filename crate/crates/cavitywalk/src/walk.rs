//! Classical random walks on the network graphs, used as the
//! interference-free reference for the quantum evolution.
//!
//! Two variants are provided: the default discrete-time walk that hops to a
//! uniformly random neighbor each step, and a continuous-time rate-equation
//! walk whose step map is the exponential of the generator rate·(A − D).
//! Both act on real probability vectors only — phases cannot enter by
//! construction.

use crate::graph::NetworkGraph;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on Σ p_k = 1.
pub const PROBABILITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum WalkError {
    #[error("node {node} is isolated (degree 0); the discrete walk is undefined there")]
    IsolatedVertex { node: usize },
    #[error("continuous mode requires a positive rate, got {rate}")]
    NonPositiveRate { rate: f64 },
    #[error("continuous mode requires a finite non-negative dt, got {dt}")]
    InvalidDt { dt: f64 },
    #[error("distribution has {got} entries but the transition matrix expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("probability {value} at index {index} is negative")]
    NegativeProbability { index: usize, value: f64 },
    #[error("probabilities sum to {sum}, not 1")]
    NotNormalized { sum: f64 },
}

/// Which reading of the random-walk dynamics to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RwMode {
    /// Hop to a uniformly random neighbor each step (column-stochastic
    /// T_{ij} = A_{ij}/deg(j)).
    #[default]
    Discrete,
    /// Rate-equation generator G = rate·(A − D), applied as exp(G·dt).
    Continuous,
}

/// A probability distribution over the n nodes at a given step count.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityDistribution {
    p: DVector<f64>,
    time_step: usize,
}

impl ProbabilityDistribution {
    pub fn new(p: DVector<f64>, time_step: usize) -> Result<Self, WalkError> {
        for (index, &value) in p.iter().enumerate() {
            if value < 0.0 || !value.is_finite() {
                return Err(WalkError::NegativeProbability { index, value });
            }
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(WalkError::NotNormalized { sum });
        }
        Ok(Self { p, time_step })
    }

    /// All mass on one node.
    pub fn delta(n: usize, node: usize) -> Self {
        let mut p = DVector::zeros(n);
        p[node] = 1.0;
        Self { p, time_step: 0 }
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            p: DVector::from_element(n, 1.0 / n as f64),
            time_step: 0,
        }
    }

    /// The degree-proportional stationary distribution p*_k = deg(k)/Σ_j deg(j)
    /// of the discrete walk (uniform on regular graphs).
    pub fn stationary(graph: &NetworkGraph) -> Self {
        let degrees: Vec<f64> = (0..graph.node_count()).map(|k| graph.degree(k)).collect();
        let total: f64 = degrees.iter().sum();
        Self {
            p: DVector::from_iterator(degrees.len(), degrees.iter().map(|d| d / total)),
            time_step: 0,
        }
    }

    pub fn p(&self) -> &DVector<f64> {
        &self.p
    }

    pub fn time_step(&self) -> usize {
        self.time_step
    }

    /// max_k |p_k − q_k|.
    pub fn max_norm_distance(&self, other: &Self) -> f64 {
        (&self.p - &other.p).amax()
    }
}

/// Build the one-step map of the chosen walk. `rate` and `dt` only matter in
/// continuous mode, where the result is exp(rate·(A − D)·dt).
pub fn rw_transition_matrix(
    graph: &NetworkGraph,
    mode: RwMode,
    rate: f64,
    dt: f64,
) -> Result<DMatrix<f64>, WalkError> {
    let n = graph.node_count();
    let a = graph.adjacency();
    match mode {
        RwMode::Discrete => {
            let mut t = DMatrix::zeros(n, n);
            for col in 0..n {
                let degree = graph.degree(col);
                if degree == 0.0 {
                    return Err(WalkError::IsolatedVertex { node: col });
                }
                for row in 0..n {
                    t[(row, col)] = a[(row, col)] / degree;
                }
            }
            Ok(t)
        }
        RwMode::Continuous => {
            if rate <= 0.0 || !rate.is_finite() {
                return Err(WalkError::NonPositiveRate { rate });
            }
            if !dt.is_finite() || dt < 0.0 {
                return Err(WalkError::InvalidDt { dt });
            }
            let degrees = DVector::from_iterator(n, (0..n).map(|k| graph.degree(k)));
            let generator = (a - DMatrix::from_diagonal(&degrees)) * (rate * dt);
            let eig = nalgebra::SymmetricEigen::new(generator);
            let exp_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::exp));
            Ok(&eig.eigenvectors * exp_diag * eig.eigenvectors.transpose())
        }
    }
}

/// Advance the walk one step: p′ = T·p.
pub fn rw_step(
    dist: &ProbabilityDistribution,
    transition: &DMatrix<f64>,
) -> Result<ProbabilityDistribution, WalkError> {
    if dist.p.len() != transition.ncols() {
        return Err(WalkError::DimensionMismatch {
            expected: transition.ncols(),
            got: dist.p.len(),
        });
    }
    Ok(ProbabilityDistribution {
        p: transition * &dist.p,
        time_step: dist.time_step + 1,
    })
}

/// Total-variation distance ½·Σ|p_k − q_k| between two same-length
/// distributions.
pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}
