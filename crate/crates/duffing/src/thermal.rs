//! Thermal density matrices and photon statistics.
//!
//! The canonical ensemble over the exact eigenstates is the physical
//! equilibrium state of the nonlinear resonator; the "naive" Bose-Einstein
//! state is what the standard weak-nonlinearity dissipator relaxes to, and
//! is kept around precisely because its statistics are pathological: they
//! are independent of the nonlinearity, with `g^(N) = N!` always.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{Basis, EigenSystem, FockOperator, Model, ModelSpec, TruncationPolicy};
use crate::CMatrix;

/// Highest admissible Boltzmann weight on the top retained level.
pub const TAIL_WEIGHT_LIMIT: f64 = 1e-12;

/// Density matrix on a truncated space.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub dim: usize,
    pub elements: CMatrix,
    pub basis: Basis,
}

impl DensityMatrix {
    /// Wrap a matrix, checking squareness, Hermiticity (1e-12 relative)
    /// and unit trace (1e-10). Positivity is only checked by [`Self::validate`].
    pub fn new(elements: CMatrix, basis: Basis) -> Result<Self> {
        let dim = elements.nrows();
        if elements.ncols() != dim || dim == 0 {
            return Err(Error::DimensionMismatch(format!(
                "density matrix must be square and non-empty, got {}x{}",
                dim,
                elements.ncols()
            )));
        }
        let herm_dev = {
            let norm = elements.norm().max(f64::MIN_POSITIVE);
            (&elements - elements.adjoint()).norm() / norm
        };
        if herm_dev >= 1e-12 {
            return Err(Error::NotHermitian(herm_dev));
        }
        let trace: Complex64 = elements.diagonal().iter().sum();
        if (trace.re - 1.0).abs() > 1e-10 || trace.im.abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "density matrix trace is {trace}, expected 1"
            )));
        }
        Ok(Self { dim, elements, basis })
    }

    /// Diagonal state from classical probabilities.
    pub fn from_probabilities(probs: &[f64], basis: Basis) -> Result<Self> {
        let dim = probs.len();
        let mut m = CMatrix::zeros(dim, dim);
        for (n, &p) in probs.iter().enumerate() {
            m[(n, n)] = Complex64::new(p, 0.0);
        }
        Self::new(m, basis)
    }

    pub fn trace(&self) -> f64 {
        self.elements.diagonal().iter().map(|z| z.re).sum()
    }

    /// `Tr[rho A]`.
    pub fn expectation(&self, op: &CMatrix) -> Complex64 {
        (op * &self.elements).diagonal().iter().sum()
    }

    /// Eigenvalues of the (Hermitized) matrix, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.elements + self.elements.adjoint()) * Complex64::new(0.5, 0.0);
        let mut vals: Vec<f64> =
            SymmetricEigen::new(herm).eigenvalues.iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        vals
    }

    /// Full physicality check: Hermitian, unit trace, positive semidefinite
    /// to 1e-10.
    pub fn validate(&self) -> Result<()> {
        let min = self.eigenvalues().first().copied().unwrap_or(0.0);
        if min < -1e-10 {
            return Err(Error::InvalidParameter(format!(
                "density matrix has negative eigenvalue {min:.3e}"
            )));
        }
        Ok(())
    }

    /// Rotate an eigenbasis state into the Fock basis of the working
    /// dimension of `eigsys`.
    pub fn to_fock(&self, eigsys: &EigenSystem) -> Result<Self> {
        if self.basis != Basis::Eigen {
            return Err(Error::BasisMismatch(
                "to_fock expects an eigenbasis state".into(),
            ));
        }
        if self.dim != eigsys.keep() {
            return Err(Error::DimensionMismatch(format!(
                "state dim {} != retained eigenstates {}",
                self.dim,
                eigsys.keep()
            )));
        }
        let rotated = eigsys.to_fock(&self.elements);
        Ok(Self {
            dim: rotated.nrows(),
            elements: rotated,
            basis: Basis::Fock,
        })
    }
}

/// Trace distance `½ ‖a − b‖₁` between two states in the same basis.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch(format!(
            "trace distance needs equal dims, got {} and {}",
            a.dim, b.dim
        )));
    }
    if a.basis != b.basis {
        return Err(Error::BasisMismatch(
            "trace distance needs states in the same basis".into(),
        ));
    }
    let diff = &a.elements - &b.elements;
    let herm = (&diff + diff.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    Ok(0.5 * eig.eigenvalues.iter().map(|l| l.abs()).sum::<f64>())
}

/// Boltzmann weights over a retained spectrum, shifted by the ground
/// energy (`w_0 = 1`, unnormalized).
fn boltzmann_weights(energies: &[f64], temperature: f64) -> Vec<f64> {
    let e0 = energies[0];
    energies
        .iter()
        .map(|&e| (-(e - e0) / temperature).exp())
        .collect()
}

/// Canonical ensemble `e^{-H/T}/Z` over the retained eigenstates.
///
/// `T = 0` returns the pure ground state. Errors with
/// [`Error::TruncationOverflow`] when the top retained level still carries
/// a Boltzmann weight above [`TAIL_WEIGHT_LIMIT`].
pub fn canonical_state(eigsys: &EigenSystem, temperature: f64) -> Result<DensityMatrix> {
    if temperature < 0.0 || !temperature.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "temperature must be finite and >= 0, got {temperature}"
        )));
    }
    let keep = eigsys.keep();
    if temperature == 0.0 {
        let mut probs = vec![0.0; keep];
        probs[0] = 1.0;
        return DensityMatrix::from_probabilities(&probs, Basis::Eigen);
    }
    let mut weights = boltzmann_weights(&eigsys.energies, temperature);
    let z: f64 = weights.iter().sum();
    let top = weights[keep - 1] / z;
    if top >= TAIL_WEIGHT_LIMIT {
        return Err(Error::TruncationOverflow {
            weight: top,
            limit: TAIL_WEIGHT_LIMIT,
            temperature,
        });
    }
    for w in &mut weights {
        *w /= z;
    }
    DensityMatrix::from_probabilities(&weights, Basis::Eigen)
}

/// Auto-escalation settings for [`canonical_state_auto`].
#[derive(Debug, Clone)]
pub struct AutoTruncation {
    pub keep_start: usize,
    pub keep_ceiling: usize,
    pub policy: TruncationPolicy,
}

impl Default for AutoTruncation {
    fn default() -> Self {
        Self {
            keep_start: 12,
            keep_ceiling: 512,
            policy: TruncationPolicy::default(),
        }
    }
}

/// Build the eigensystem and canonical state for a model, doubling the
/// number of retained levels until the Boltzmann tail criterion is met or
/// the ceiling is hit.
pub fn canonical_state_auto(
    model: &ModelSpec,
    temperature: f64,
    opts: &AutoTruncation,
) -> Result<(EigenSystem, DensityMatrix)> {
    let mut keep = opts.keep_start.max(2);
    loop {
        let eigsys = crate::fock::eigensystem_for(model, keep, &opts.policy)?;
        match canonical_state(&eigsys, temperature) {
            Ok(state) => return Ok((eigsys, state)),
            Err(Error::TruncationOverflow { .. }) if keep < opts.keep_ceiling => {
                keep = (keep * 2).min(opts.keep_ceiling);
            }
            Err(e) => return Err(e),
        }
    }
}

/// Bose-Einstein state of the bare mode: weights `e^{-ω_a n / T}/Z`.
///
/// This is the steady state the standard weak-nonlinearity dissipator
/// relaxes to, whatever the actual nonlinearity.
pub fn naive_thermal_state(omega_a: f64, temperature: f64, dim: usize) -> Result<DensityMatrix> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    if !(omega_a > 0.0) {
        return Err(Error::InvalidParameter("omega_a must be positive".into()));
    }
    if temperature < 0.0 || !temperature.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "temperature must be finite and >= 0, got {temperature}"
        )));
    }
    if temperature == 0.0 {
        let mut probs = vec![0.0; dim];
        probs[0] = 1.0;
        return DensityMatrix::from_probabilities(&probs, Basis::Fock);
    }
    let x = (-omega_a / temperature).exp();
    let mut weights: Vec<f64> = (0..dim).map(|n| x.powi(n as i32)).collect();
    let z: f64 = weights.iter().sum();
    let top = weights[dim - 1] / z;
    if top >= TAIL_WEIGHT_LIMIT {
        return Err(Error::TruncationOverflow {
            weight: top,
            limit: TAIL_WEIGHT_LIMIT,
            temperature,
        });
    }
    for w in &mut weights {
        *w /= z;
    }
    DensityMatrix::from_probabilities(&weights, Basis::Fock)
}

/// Normalized N-th order photon statistic
/// `g^(N) = <(a†)^N a^N> / <a†a>^N`.
pub fn g_n_statistic(rho: &DensityMatrix, a: &FockOperator, n: u32) -> Result<f64> {
    if rho.dim != a.dim {
        return Err(Error::DimensionMismatch(format!(
            "state dim {} != operator dim {}",
            rho.dim, a.dim
        )));
    }
    if rho.basis != a.basis {
        return Err(Error::BasisMismatch(
            "state and ladder operator must share a basis".into(),
        ));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("order N must be >= 1".into()));
    }
    let mut a_pow = a.elements.clone();
    for _ in 1..n {
        a_pow = &a_pow * &a.elements;
    }
    let number = a.elements.adjoint() * &a.elements;
    let occupation = rho.expectation(&number).re;
    if occupation <= 0.0 {
        return Err(Error::UndefinedStatistic(
            "g^(N) is undefined at zero occupation".into(),
        ));
    }
    let moment = rho.expectation(&(a_pow.adjoint() * &a_pow)).re;
    Ok(moment / occupation.powi(n as i32))
}

/// Photon-number distribution `P[n] = <n|rho|n>` of a Fock-basis state.
pub fn photon_distribution(rho: &DensityMatrix) -> Result<Vec<f64>> {
    if rho.basis != Basis::Fock {
        return Err(Error::BasisMismatch(
            "photon_distribution needs a Fock-basis state; rotate with to_fock".into(),
        ));
    }
    Ok(rho.elements.diagonal().iter().map(|z| z.re).collect())
}

/// Scalar canonical moments of the Kerr model, summed over number states
/// with automatic tail escalation (no matrices, so arbitrarily hot
/// ensembles stay cheap).
#[derive(Debug, Clone, Copy)]
pub struct KerrMoments {
    pub occupation: f64,
    /// `<a†a†aa> / <a†a>²`
    pub g2: f64,
    pub partition: f64,
    /// Number states actually summed.
    pub dim_used: usize,
}

/// Canonical `<a†a>` and `g²` for the Kerr spectrum `ε_n = nω + Un(n−1)`.
pub fn kerr_canonical_moments(
    omega_a: f64,
    u: f64,
    temperature: f64,
    max_terms: usize,
) -> Result<KerrMoments> {
    if !(omega_a > 0.0) || u < 0.0 {
        return Err(Error::InvalidParameter(
            "kerr_canonical_moments needs omega_a > 0 and U >= 0".into(),
        ));
    }
    if !(temperature > 0.0) {
        return Err(Error::UndefinedStatistic(
            "canonical moments need T > 0 (the T = 0 state is the vacuum)".into(),
        ));
    }
    let mut z = 0.0;
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    let mut n = 0usize;
    loop {
        let nf = n as f64;
        let energy = nf * omega_a + u * nf * (nf - 1.0);
        let w = (-energy / temperature).exp();
        z += w;
        s1 += nf * w;
        s2 += nf * (nf - 1.0) * w;
        n += 1;
        // The Kerr spectrum is increasing in n, so weights only decay.
        if w < 1e-18 {
            break;
        }
        if n >= max_terms {
            return Err(Error::TruncationOverflow {
                weight: w,
                limit: 1e-18,
                temperature,
            });
        }
    }
    let occupation = s1 / z;
    if occupation <= 0.0 {
        return Err(Error::UndefinedStatistic(
            "zero occupation in canonical sum".into(),
        ));
    }
    let g2 = (s2 / z) / (occupation * occupation);
    Ok(KerrMoments { occupation, g2, partition: z, dim_used: n })
}

/// High-temperature closed form for the Kerr occupation, from the
/// continuous-variable approximation of the canonical sum:
///
/// `<a†a> = 1/2 − ω/(2U) + √(T/(πU)) e^{−(ω−U)²/(4TU)} / (1 + erf((U−ω)/(2√(TU))))`
///
/// Valid for `T ≫ ω_a`; a warning is logged below `T = 100 ω_a`.
pub fn kerr_high_t_occupation(omega_a: f64, u: f64, temperature: f64) -> Result<f64> {
    if u <= 0.0 {
        return Err(Error::InvalidParameter(
            "the high-T closed form needs U > 0".into(),
        ));
    }
    if !(omega_a > 0.0) || !(temperature > 0.0) {
        return Err(Error::InvalidParameter(
            "omega_a and T must be positive".into(),
        ));
    }
    if temperature < 100.0 * omega_a {
        log::warn!(
            "kerr_high_t_occupation called at T = {temperature} (in units of \
             omega_a); the continuous-variable approximation assumes T >> omega_a"
        );
    }
    let gauss = (-(omega_a - u).powi(2) / (4.0 * temperature * u)).exp();
    let erf_arg = (u - omega_a) / (2.0 * (temperature * u).sqrt());
    let denom = 1.0 + libm::erf(erf_arg);
    Ok(0.5 - omega_a / (2.0 * u)
        + (temperature / (std::f64::consts::PI * u)).sqrt() * gauss / denom)
}

/// Result of [`kerr_subpoissonian_boundary`].
#[derive(Debug, Clone, Copy)]
pub struct SubpoissonianBoundary {
    /// Nonlinearity above which `g² <= 1` in the low-occupation regime.
    pub u_threshold: f64,
    /// Set when `T` is outside the regime `0 < T < 0.3 ω_a` where the
    /// two-level truncation behind the formula is trustworthy.
    pub outside_validity: bool,
}

/// Low-temperature boundary of the subpoissonian region:
///
/// `U >= T/2 · ln(e^{ω/T} − 1 + √(e^{2ω/T} − 2e^{ω/T} − 1)) − ω/2`
pub fn kerr_subpoissonian_boundary(
    omega_a: f64,
    temperature: f64,
) -> Result<SubpoissonianBoundary> {
    if !(omega_a > 0.0) || !(temperature > 0.0) {
        return Err(Error::InvalidParameter(
            "omega_a and T must be positive".into(),
        ));
    }
    let x = omega_a / temperature;
    let outside_validity = temperature >= 0.3 * omega_a;
    if outside_validity {
        log::warn!(
            "subpoissonian boundary evaluated at T = {temperature} omega_a, \
             outside its validity regime T < 0.3 omega_a"
        );
    }
    let u_threshold = if x > 350.0 {
        // e^x overflows; the bracket tends to 2 e^x, so the expression
        // reduces to T ln(2) / 2.
        0.5 * temperature * std::f64::consts::LN_2
    } else {
        let ex = x.exp();
        let disc = ex * ex - 2.0 * ex - 1.0;
        if disc < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "boundary expression undefined at T = {temperature} (discriminant < 0)"
            )));
        }
        0.5 * temperature * (ex - 1.0 + disc.sqrt()).ln() - 0.5 * omega_a
    };
    Ok(SubpoissonianBoundary { u_threshold, outside_validity })
}

/// Canonical full-field `g²` of an arbitrary model (scalar fast path for
/// Kerr, eigenbasis rotation otherwise).
pub fn canonical_g2(model: &ModelSpec, temperature: f64, opts: &AutoTruncation) -> Result<f64> {
    if model.model == Model::Kerr {
        return Ok(kerr_canonical_moments(model.omega_a, model.u, temperature, 20_000_000)?.g2);
    }
    let (eigsys, state) = canonical_state_auto(model, temperature, opts)?;
    let fock_state = state.to_fock(&eigsys)?;
    let (a, _) = crate::fock::build_ladder_operators(eigsys.dim_work)?;
    g_n_statistic(&fock_state, &a, 2)
}
