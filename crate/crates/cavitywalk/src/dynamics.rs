//! Single-excitation dynamics of a network of lossy atom–cavity nodes.
//!
//! In the single-excitation sector the conditional (no-emission) state is a
//! pair of complex amplitude vectors (α, β) over the n nodes — cavity and
//! atomic excitation respectively — evolved by a non-Hermitian matrix η.
//! Two propagator backends are provided:
//!
//! * a closed form that diagonalizes the real-symmetric coupling matrix K
//!   once and evaluates every matrix function eigenvalue-wise, and
//! * a generic dense matrix exponential (see [`crate::expm`]) used as an
//!   independent cross-check.
//!
//! Loss never repopulates the excitation: the leaked weight accumulates in
//! the vacuum component tracked by [`DensityState`].

use crate::expm::expm;
use crate::graph::{NetworkGraph, NodeCoord};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

type CMat = DMatrix<Complex64>;
type CVec = DVector<Complex64>;

/// Slack allowed on ‖α‖² + ‖β‖² before a state is considered unphysical.
pub const NORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("rate {name} must be finite and non-negative, got {value}")]
    InvalidRate { name: &'static str, value: f64 },
    #[error("coupling matrix must be square, got {rows}x{cols}")]
    NonSquareCoupling { rows: usize, cols: usize },
    #[error(
        "coupling matrix must be real symmetric; entry ({row},{col}) differs from its transpose"
    )]
    AsymmetricCoupling { row: usize, col: usize },
    #[error("propagation time must be finite and non-negative, got {0}")]
    InvalidTime(f64),
    #[error("amplitude vectors differ in length: alpha has {alpha}, beta has {beta}")]
    MismatchedAmplitudes { alpha: usize, beta: usize },
    #[error("state covers {got} nodes but the operator expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(
        "squared norm {norm_squared} exceeds one beyond tolerance; propagation is inconsistent"
    )]
    NormExceedsOne { norm_squared: f64 },
    #[error("node ({i1},{i2}) lies outside the {n1}x{n2} grid")]
    NodeOutOfBounds {
        i1: usize,
        i2: usize,
        n1: usize,
        n2: usize,
    },
}

/// Physical parameters shared by every node of the network.
///
/// Frequencies and rates are angular (rad/s); in the bundled configurations
/// they are expressed in units of the hopping rate κ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Cavity resonance frequency ω⁽ᶜ⁾.
    pub omega_c: f64,
    /// Atomic transition frequency ω⁽ᴬ⁾.
    pub omega_a: f64,
    /// Atom–cavity coupling g (complex in general).
    pub g: Complex64,
    /// Cavity photon loss rate Γ⁽ᶜ⁾ ≥ 0.
    pub gamma_c: f64,
    /// Atomic spontaneous-emission rate Γ⁽ᴬ⁾ ≥ 0.
    pub gamma_a: f64,
}

impl SystemParams {
    pub fn new(
        omega_c: f64,
        omega_a: f64,
        g: Complex64,
        gamma_c: f64,
        gamma_a: f64,
    ) -> Result<Self, DynamicsError> {
        let params = Self {
            omega_c,
            omega_a,
            g,
            gamma_c,
            gamma_a,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        for (name, value) in [("gamma_c", self.gamma_c), ("gamma_a", self.gamma_a)] {
            if !value.is_finite() || value < 0.0 {
                return Err(DynamicsError::InvalidRate { name, value });
            }
        }
        Ok(())
    }

    /// Complex cavity pole ω⁽ᶜ⁾ − iΓ⁽ᶜ⁾/2.
    fn cavity_pole(&self) -> Complex64 {
        Complex64::new(self.omega_c, -self.gamma_c / 2.0)
    }

    /// Complex atomic pole ω⁽ᴬ⁾ − iΓ⁽ᴬ⁾/2.
    fn atom_pole(&self) -> Complex64 {
        Complex64::new(self.omega_a, -self.gamma_a / 2.0)
    }
}

/// Which component of a node carries the initial excitation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExcitationKind {
    Cavity,
    Atom,
}

/// Conditional single-excitation state: cavity amplitudes α, atomic
/// amplitudes β, and the absolute time it refers to.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeState {
    alpha: CVec,
    beta: CVec,
    time: f64,
}

impl AmplitudeState {
    pub fn new(alpha: CVec, beta: CVec, time: f64) -> Result<Self, DynamicsError> {
        if alpha.len() != beta.len() {
            return Err(DynamicsError::MismatchedAmplitudes {
                alpha: alpha.len(),
                beta: beta.len(),
            });
        }
        Ok(Self { alpha, beta, time })
    }

    pub fn alpha(&self) -> &CVec {
        &self.alpha
    }

    pub fn beta(&self) -> &CVec {
        &self.beta
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn node_count(&self) -> usize {
        self.alpha.len()
    }

    /// ‖α‖² + ‖β‖²: the probability that the excitation has not leaked.
    pub fn norm_squared(&self) -> f64 {
        self.alpha.norm_squared() + self.beta.norm_squared()
    }

    /// Site-resolved cavity occupation probabilities |α_k|².
    pub fn alpha_probabilities(&self) -> Vec<f64> {
        self.alpha.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Site-resolved atomic excitation probabilities |β_k|².
    pub fn beta_probabilities(&self) -> Vec<f64> {
        self.beta.iter().map(|z| z.norm_sqr()).collect()
    }
}

/// Trajectory-averaged state: the surviving single-excitation component plus
/// the weight that has decayed to the global vacuum. Because the vacuum is an
/// absorbing pure state, this pair represents the full density operator
/// exactly — no 2n×2n matrix is ever materialized.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    amps: AmplitudeState,
    vacuum_weight: f64,
}

impl DensityState {
    pub fn amps(&self) -> &AmplitudeState {
        &self.amps
    }

    pub fn vacuum_weight(&self) -> f64 {
        self.vacuum_weight
    }
}

/// Fold an amplitude state into the exact density-operator representation.
///
/// The vacuum weight 1 − ‖α‖² − ‖β‖² is clamped to [0, 1] when floating-point
/// noise pushes it within [`NORM_TOLERANCE`] of a boundary; a squared norm
/// above 1 beyond that tolerance signals a propagation bug and is rejected.
pub fn density_state(state: &AmplitudeState) -> Result<DensityState, DynamicsError> {
    let norm_squared = state.norm_squared();
    if norm_squared > 1.0 + NORM_TOLERANCE {
        return Err(DynamicsError::NormExceedsOne { norm_squared });
    }
    Ok(DensityState {
        amps: state.clone(),
        vacuum_weight: (1.0 - norm_squared).clamp(0.0, 1.0),
    })
}

/// The non-Hermitian evolution matrix η in the ordered basis
/// [α-block; β-block].
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionMatrix {
    eta: CMat,
    n: usize,
}

impl EvolutionMatrix {
    pub fn eta(&self) -> &CMat {
        &self.eta
    }

    pub fn node_count(&self) -> usize {
        self.n
    }
}

fn require_symmetric(k: &DMatrix<f64>) -> Result<(), DynamicsError> {
    if k.nrows() != k.ncols() {
        return Err(DynamicsError::NonSquareCoupling {
            rows: k.nrows(),
            cols: k.ncols(),
        });
    }
    for row in 0..k.nrows() {
        for col in row + 1..k.ncols() {
            if k[(row, col)] != k[(col, row)] {
                return Err(DynamicsError::AsymmetricCoupling { row, col });
            }
        }
    }
    Ok(())
}

fn require_time(t: f64) -> Result<(), DynamicsError> {
    // The decayed ensemble is not reversible, so negative times are rejected.
    if !t.is_finite() || t < 0.0 {
        return Err(DynamicsError::InvalidTime(t));
    }
    Ok(())
}

/// Build η from the node parameters and the coupling matrix K = κ·A:
/// upper-left block (ω⁽ᶜ⁾ − iΓ⁽ᶜ⁾/2)𝟙 + K, lower-right (ω⁽ᴬ⁾ − iΓ⁽ᴬ⁾/2)𝟙,
/// off-diagonal blocks g*𝟙 (upper) and g𝟙 (lower).
pub fn assemble_eta(
    params: &SystemParams,
    coupling: &DMatrix<f64>,
) -> Result<EvolutionMatrix, DynamicsError> {
    params.validate()?;
    require_symmetric(coupling)?;
    let n = coupling.nrows();
    let mut eta = CMat::zeros(2 * n, 2 * n);
    let cavity = params.cavity_pole();
    let atom = params.atom_pole();
    for row in 0..n {
        for col in 0..n {
            eta[(row, col)] = Complex64::from(coupling[(row, col)]);
        }
        eta[(row, row)] += cavity;
        eta[(row, n + row)] = params.g.conj();
        eta[(n + row, row)] = params.g;
        eta[(n + row, n + row)] = atom;
    }
    Ok(EvolutionMatrix { eta, n })
}

/// Everything the closed-form propagator needs, computed once per
/// configuration: the orthonormal eigenbasis of K plus the scalar
/// combinations ω̄ = (ω⁽ᶜ⁾ − iΓ⁽ᶜ⁾/2) − (ω⁽ᴬ⁾ − iΓ⁽ᴬ⁾/2) and
/// ν̄ = (ω⁽ᶜ⁾ − iΓ⁽ᶜ⁾/2) + (ω⁽ᴬ⁾ − iΓ⁽ᴬ⁾/2).
///
/// In that basis the detuning matrix 2Δ = ω̄𝟙 + K and the dressed frequency
/// Ω = √(Δ² + |g|²𝟙) are diagonal, so every matrix function reduces to a
/// scalar function of the eigenvalues; Ω⁻¹sin(tΩ) is evaluated as t·sinc(tΩ),
/// which fills the removable singularity at Ω = 0. Both cos(tΩ) and t·sinc(tΩ)
/// are even in Ω, so the branch of the complex square root is immaterial.
#[derive(Debug, Clone)]
pub struct ClosedFormFactors {
    /// Orthonormal eigenvectors of K, complexified, one per column.
    basis: CMat,
    /// Real eigenvalues of K, in the column order of `basis`.
    lambda: DVector<f64>,
    g: Complex64,
    omega_bar: Complex64,
    nu_bar: Complex64,
}

impl ClosedFormFactors {
    pub fn new(params: &SystemParams, coupling: &DMatrix<f64>) -> Result<Self, DynamicsError> {
        params.validate()?;
        require_symmetric(coupling)?;
        let eigen = SymmetricEigen::new(coupling.clone());
        Ok(Self {
            basis: eigen.eigenvectors.map(Complex64::from),
            lambda: eigen.eigenvalues,
            g: params.g,
            omega_bar: params.cavity_pole() - params.atom_pole(),
            nu_bar: params.cavity_pole() + params.atom_pole(),
        })
    }

    pub fn node_count(&self) -> usize {
        self.lambda.len()
    }

    pub fn g(&self) -> Complex64 {
        self.g
    }

    pub fn omega_bar(&self) -> Complex64 {
        self.omega_bar
    }

    pub fn nu_bar(&self) -> Complex64 {
        self.nu_bar
    }

    /// Q · diag(values) · Qᵀ.
    fn diagonal_in_basis(&self, values: &[Complex64]) -> CMat {
        let mut scaled = self.basis.clone();
        for (j, &value) in values.iter().enumerate() {
            scaled.column_mut(j).apply(|z| *z *= value);
        }
        scaled * self.basis.transpose()
    }

    /// The detuning matrix Δ = (ω̄𝟙 + K)/2 as a full complex matrix.
    pub fn delta_matrix(&self) -> CMat {
        let values: Vec<Complex64> = self
            .lambda
            .iter()
            .map(|&lam| (self.omega_bar + lam) / 2.0)
            .collect();
        self.diagonal_in_basis(&values)
    }

    /// The dressed-frequency matrix Ω = √(Δ² + |g|²𝟙) (principal branch per
    /// eigenvalue) as a full complex matrix.
    pub fn omega_matrix(&self) -> CMat {
        let g2 = self.g.norm_sqr();
        let values: Vec<Complex64> = self
            .lambda
            .iter()
            .map(|&lam| {
                let delta = (self.omega_bar + lam) / 2.0;
                (delta * delta + g2).sqrt()
            })
            .collect();
        self.diagonal_in_basis(&values)
    }

    /// The scalar-phase-times-hopping factor E(t) = e^{−itν̄/2}·exp(−itK/2)
    /// as a full complex matrix.
    pub fn phase_matrix(&self, t: f64) -> Result<CMat, DynamicsError> {
        require_time(t)?;
        let values: Vec<Complex64> = self
            .lambda
            .iter()
            .map(|&lam| (-Complex64::i() * (self.nu_bar + lam) * (t / 2.0)).exp())
            .collect();
        Ok(self.diagonal_in_basis(&values))
    }

    /// Per-eigenvalue 2×2 blocks [ul, ur, ll, lr] of the propagator: with
    /// e = e^{−it(ν̄+λ)/2}, c = cos(tΩ_λ), s = t·sinc(tΩ_λ), Δ_λ = (ω̄+λ)/2,
    ///
    /// ul = e(c − isΔ_λ), ur = −ise·g*, ll = −ise·g, lr = e(c + isΔ_λ).
    fn mode_blocks(&self, t: f64) -> Vec<[Complex64; 4]> {
        let g2 = self.g.norm_sqr();
        self.lambda
            .iter()
            .map(|&lam| {
                let delta = (self.omega_bar + lam) / 2.0;
                let omega = (delta * delta + g2).sqrt();
                let e = (-Complex64::i() * (self.nu_bar + lam) * (t / 2.0)).exp();
                let c = (omega * t).cos();
                let s = sinc(omega * t) * t;
                let ise = Complex64::i() * s * e;
                [
                    e * c - ise * delta,
                    -ise * self.g.conj(),
                    -ise * self.g,
                    e * c + ise * delta,
                ]
            })
            .collect()
    }

    /// Assemble the full 2n×2n propagator exp(−itη) from the eigenbasis.
    pub fn propagator(&self, t: f64) -> Result<CMat, DynamicsError> {
        require_time(t)?;
        let n = self.lambda.len();
        let blocks = self.mode_blocks(t);
        let pick = |i: usize| -> Vec<Complex64> { blocks.iter().map(|b| b[i]).collect() };
        let mut s = CMat::zeros(2 * n, 2 * n);
        s.view_mut((0, 0), (n, n))
            .copy_from(&self.diagonal_in_basis(&pick(0)));
        s.view_mut((0, n), (n, n))
            .copy_from(&self.diagonal_in_basis(&pick(1)));
        s.view_mut((n, 0), (n, n))
            .copy_from(&self.diagonal_in_basis(&pick(2)));
        s.view_mut((n, n), (n, n))
            .copy_from(&self.diagonal_in_basis(&pick(3)));
        Ok(s)
    }

    /// Apply exp(−itη) to a state without materializing the matrix: project
    /// onto the eigenbasis (O(n²)), apply the per-mode 2×2 blocks, project
    /// back. Exact at any t, independent of any step size.
    pub fn evolve(&self, state: &AmplitudeState, t: f64) -> Result<AmplitudeState, DynamicsError> {
        require_time(t)?;
        let n = self.lambda.len();
        if state.node_count() != n {
            return Err(DynamicsError::DimensionMismatch {
                expected: n,
                got: state.node_count(),
            });
        }
        let basis_t = self.basis.transpose();
        let a = &basis_t * state.alpha();
        let b = &basis_t * state.beta();
        let blocks = self.mode_blocks(t);
        let mut a_out = CVec::zeros(n);
        let mut b_out = CVec::zeros(n);
        for (j, [ul, ur, ll, lr]) in blocks.into_iter().enumerate() {
            a_out[j] = ul * a[j] + ur * b[j];
            b_out[j] = ll * a[j] + lr * b[j];
        }
        AmplitudeState::new(&self.basis * a_out, &self.basis * b_out, state.time() + t)
    }
}

/// sin(z)/z with the removable singularity filled by its limit 1.
fn sinc(z: Complex64) -> Complex64 {
    if z.norm() < 1e-4 {
        let z2 = z * z;
        // |next omitted term| = |z|⁶/5040 < 3e-28 at the branch point.
        Complex64::from(1.0) - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

/// exp(−itη) via the eigenbasis closed form. `g` must be the same coupling
/// the factors were built from; it enters the off-diagonal blocks directly.
pub fn propagator_closed_form(
    factors: &ClosedFormFactors,
    g: Complex64,
    t: f64,
) -> Result<CMat, DynamicsError> {
    let mut shifted = factors.clone();
    shifted.g = g;
    shifted.propagator(t)
}

/// exp(−itη) via dense scaling-and-squaring; the independent oracle for the
/// closed form.
pub fn propagator_generic(eta: &EvolutionMatrix, t: f64) -> Result<CMat, DynamicsError> {
    require_time(t)?;
    Ok(expm(&(eta.eta() * Complex64::new(0.0, -t))))
}

/// A fixed-step propagator S = exp(−i·dt·η), reusable across steps.
#[derive(Debug, Clone)]
pub struct StepPropagator {
    matrix: CMat,
    dt: f64,
    n: usize,
}

impl StepPropagator {
    pub fn from_closed_form(factors: &ClosedFormFactors, dt: f64) -> Result<Self, DynamicsError> {
        Ok(Self {
            matrix: factors.propagator(dt)?,
            dt,
            n: factors.node_count(),
        })
    }

    pub fn from_generic(eta: &EvolutionMatrix, dt: f64) -> Result<Self, DynamicsError> {
        Ok(Self {
            matrix: propagator_generic(eta, dt)?,
            dt,
            n: eta.node_count(),
        })
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn node_count(&self) -> usize {
        self.n
    }
}

/// Advance a state by one step: [α; β] ← S·[α; β], time ← time + dt.
pub fn step(
    state: &AmplitudeState,
    propagator: &StepPropagator,
) -> Result<AmplitudeState, DynamicsError> {
    let n = propagator.node_count();
    if state.node_count() != n {
        return Err(DynamicsError::DimensionMismatch {
            expected: n,
            got: state.node_count(),
        });
    }
    let mut stacked = CVec::zeros(2 * n);
    stacked.rows_mut(0, n).copy_from(state.alpha());
    stacked.rows_mut(n, n).copy_from(state.beta());
    let out = propagator.matrix() * stacked;
    AmplitudeState::new(
        out.rows(0, n).into_owned(),
        out.rows(n, n).into_owned(),
        state.time() + propagator.dt(),
    )
}

/// The state with one excitation in the chosen component of one node and
/// nothing anywhere else, at time zero.
pub fn initial_excitation(
    graph: &NetworkGraph,
    node: NodeCoord,
    kind: ExcitationKind,
) -> Result<AmplitudeState, DynamicsError> {
    let n = graph.node_count();
    let (n1, n2) = graph.dims();
    let k = graph
        .linear_index(node)
        .ok_or(DynamicsError::NodeOutOfBounds {
            i1: node.i1,
            i2: node.i2,
            n1,
            n2,
        })?;
    let mut alpha = CVec::zeros(n);
    let mut beta = CVec::zeros(n);
    match kind {
        ExcitationKind::Cavity => alpha[k] = Complex64::from(1.0),
        ExcitationKind::Atom => beta[k] = Complex64::from(1.0),
    }
    AmplitudeState::new(alpha, beta, 0.0)
}
