//! Thermal dissipators, the vectorized Liouvillian, and steady states.
//!
//! The physically correct dissipator for a strongly anharmonic mode acts on
//! the transition operators `|j><k|` between exact eigenstates, one channel
//! per transition, with a Bose factor evaluated at that transition's energy.
//! Per channel the upward/downward weights satisfy detailed balance,
//! `n̄/(1+n̄) = e^{-Δ/T}`, which is what drives the steady state to the
//! canonical ensemble. The "naive" dissipator uses bare `a`, `a†` channels
//! and a single Bose factor at `ω_a`; it is kept as the contrast case.
//!
//! Density matrices are vectorized row-major, `v[j*D + k] = <j|ρ|k>`, and
//! the master equation becomes `v̇ = M v` with `M` dense complex `D²×D²`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::EigenSystem;
use crate::{CMatrix, CVector};

/// Mean bath occupation `n̄_T(Δ) = 1/(e^{Δ/T} − 1)`; 0 at `T = 0`.
pub fn bose_occupation(delta: f64, temperature: f64) -> Result<f64> {
    if delta <= 0.0 {
        return Err(Error::ZeroFrequencyTransition(delta));
    }
    if temperature < 0.0 || !temperature.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "temperature must be finite and >= 0, got {temperature}"
        )));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    // exp_m1 keeps precision for small Δ/T.
    Ok(1.0 / (delta / temperature).exp_m1())
}

/// One thermal relaxation channel between eigenstates `lower < upper`.
#[derive(Debug, Clone, Copy)]
pub struct RateEntry {
    pub lower: usize,
    pub upper: usize,
    /// Bare relaxation coefficient `Γ^{jk} = γ_a |C_jk|²`.
    pub gamma: f64,
    /// Bath occupation at the transition energy.
    pub n_bar: f64,
    /// Transition energy `Δ = ε_upper − ε_lower`.
    pub delta: f64,
}

impl RateEntry {
    /// Weight of the downward channel `|lower><upper|`.
    pub fn downward(&self) -> f64 {
        self.gamma * (1.0 + self.n_bar)
    }

    /// Weight of the upward channel `|upper><lower|`.
    pub fn upward(&self) -> f64 {
        self.gamma * self.n_bar
    }
}

/// Set of thermal channels over a retained spectrum.
#[derive(Debug, Clone)]
pub struct RateTable {
    pub entries: Vec<RateEntry>,
    pub dim: usize,
    pub gamma_a: f64,
    pub temperature: f64,
}

/// Build the eigenbasis thermal dissipator: one channel per dipole-coupled
/// pair of retained eigenstates, with the flat-bath (Markov) reduction
/// `Γ^{jk} = γ_a |C_jk|²`.
///
/// Channels whose transition energy is below `1e-9` of the fundamental
/// spacing are dropped with a warning: the Bose factor diverges there and
/// the secular form is not trustworthy anyway.
pub fn build_eigenbasis_dissipator(
    eigsys: &EigenSystem,
    gamma_a: f64,
    temperature: f64,
) -> Result<RateTable> {
    if !(gamma_a > 0.0) {
        return Err(Error::InvalidParameter("gamma_a must be positive".into()));
    }
    if temperature < 0.0 || !temperature.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "temperature must be finite and >= 0, got {temperature}"
        )));
    }
    if eigsys.degenerate_transitions {
        log::warn!(
            "building the secular eigenbasis dissipator on a spectrum with \
             degenerate transition energies"
        );
    }
    let c_max = eigsys
        .c_table
        .iter()
        .map(|c| c.abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let delta_floor = 1e-9 * (eigsys.energies[1] - eigsys.energies[0]).abs();
    let mut entries = Vec::new();
    for t in eigsys.transitions() {
        // Drop numerically-zero couplings (parity-forbidden elements come
        // out at the 1e-16 level from the diagonalization).
        if t.c.abs() < 1e-12 * c_max {
            continue;
        }
        if t.delta <= delta_floor {
            log::warn!(
                "dropping near-zero-frequency channel {} -> {} (delta = {:.3e})",
                t.upper,
                t.lower,
                t.delta
            );
            continue;
        }
        let n_bar = if temperature == 0.0 {
            0.0
        } else {
            bose_occupation(t.delta, temperature)?
        };
        entries.push(RateEntry {
            lower: t.lower,
            upper: t.upper,
            gamma: gamma_a * t.c * t.c,
            n_bar,
            delta: t.delta,
        });
    }
    Ok(RateTable {
        entries,
        dim: eigsys.keep(),
        gamma_a,
        temperature,
    })
}

/// A Lindblad channel with an arbitrary jump operator.
#[derive(Debug, Clone)]
pub struct LindbladChannel {
    pub operator: CMatrix,
    pub weight: f64,
}

/// The standard weak-nonlinearity dissipator: channels `a` with weight
/// `γ_a (1+n̄)` and `a†` with weight `γ_a n̄`, with a single Bose factor
/// evaluated at the bare frequency.
pub fn build_naive_dissipator(
    omega_a: f64,
    gamma_a: f64,
    temperature: f64,
    dim: usize,
) -> Result<Vec<LindbladChannel>> {
    if !(gamma_a > 0.0) {
        return Err(Error::InvalidParameter("gamma_a must be positive".into()));
    }
    let (a, adag) = crate::fock::build_ladder_operators(dim)?;
    let n_bar = if temperature == 0.0 {
        0.0
    } else {
        bose_occupation(omega_a, temperature)?
    };
    Ok(vec![
        LindbladChannel { operator: a.elements, weight: gamma_a * (1.0 + n_bar) },
        LindbladChannel { operator: adag.elements, weight: gamma_a * n_bar },
    ])
}

/// Rate table reproducing the population dynamics of the naive dissipator:
/// harmonic ladder couplings `|C|² = n+1` with a constant Bose factor.
/// Coherence dynamics differ from the full channel form, but coherences
/// decay either way, so the steady state is shared.
pub fn naive_rate_table(
    omega_a: f64,
    gamma_a: f64,
    temperature: f64,
    dim: usize,
) -> Result<RateTable> {
    if !(gamma_a > 0.0) || !(omega_a > 0.0) {
        return Err(Error::InvalidParameter(
            "omega_a and gamma_a must be positive".into(),
        ));
    }
    let n_bar = if temperature == 0.0 {
        0.0
    } else {
        bose_occupation(omega_a, temperature)?
    };
    let entries = (0..dim.saturating_sub(1))
        .map(|n| RateEntry {
            lower: n,
            upper: n + 1,
            gamma: gamma_a * (n + 1) as f64,
            n_bar,
            delta: omega_a,
        })
        .collect();
    Ok(RateTable { entries, dim, gamma_a, temperature })
}

/// Vectorized master-equation generator `v̇ = M v`.
#[derive(Debug, Clone)]
pub struct LiouvillianMatrix {
    pub dim_sys: usize,
    pub matrix: CMatrix,
}

impl LiouvillianMatrix {
    /// Row vector of the trace functional: 1 on diagonal elements.
    pub fn trace_row(&self) -> CVector {
        trace_row(self.dim_sys)
    }

    /// `max_j |(t^T M)_j|` where `t` is the trace row; 0 exactly when the
    /// generator is trace preserving.
    pub fn trace_preservation_defect(&self) -> f64 {
        let t = self.trace_row();
        let product = self.matrix.transpose() * t;
        product.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

fn trace_row(dim: usize) -> CVector {
    let mut t = CVector::zeros(dim * dim);
    for j in 0..dim {
        t[j * dim + j] = Complex64::new(1.0, 0.0);
    }
    t
}

/// Vectorized density matrix, row-major: `entries[j*D + k] = <j|ρ|k>`.
#[derive(Debug, Clone)]
pub struct DensityVector {
    pub dim: usize,
    pub entries: CVector,
}

impl DensityVector {
    pub fn from_matrix(m: &CMatrix) -> Result<Self> {
        let dim = m.nrows();
        if m.ncols() != dim {
            return Err(Error::DimensionMismatch("vectorizing a non-square matrix".into()));
        }
        let mut entries = CVector::zeros(dim * dim);
        for j in 0..dim {
            for k in 0..dim {
                entries[j * dim + k] = m[(j, k)];
            }
        }
        Ok(Self { dim, entries })
    }

    pub fn from_density_matrix(rho: &crate::thermal::DensityMatrix) -> Result<Self> {
        Self::from_matrix(&rho.elements)
    }

    /// Vacuum (ground-state projector) initial condition.
    pub fn ground_state(dim: usize) -> Self {
        let mut entries = CVector::zeros(dim * dim);
        entries[0] = Complex64::new(1.0, 0.0);
        Self { dim, entries }
    }

    pub fn to_matrix(&self) -> CMatrix {
        let d = self.dim;
        CMatrix::from_fn(d, d, |j, k| self.entries[j * d + k])
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|j| self.entries[j * self.dim + j]).sum()
    }

    /// ‖v − v†‖ / ‖v‖ on the reshaped matrix.
    pub fn hermiticity_deviation(&self) -> f64 {
        let m = self.to_matrix();
        let norm = m.norm().max(f64::MIN_POSITIVE);
        (&m - m.adjoint()).norm() / norm
    }

    /// Reshape, Hermitize, renormalize the trace, and wrap as a state.
    pub fn to_density_matrix(&self, basis: crate::fock::Basis) -> Result<crate::thermal::DensityMatrix> {
        let m = self.to_matrix();
        let herm = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let trace: Complex64 = herm.diagonal().iter().sum();
        if trace.norm() < 1e-300 {
            return Err(Error::UndefinedStatistic("traceless density vector".into()));
        }
        crate::thermal::DensityMatrix::new(herm / trace, basis)
    }
}

/// Assemble the vectorized generator from diagonal eigenenergies and a
/// thermal rate table: the commutator part `i[ρ, H]` plus, per table entry,
/// a downward channel `|j><k|` of weight `Γ(1+n̄)` and an upward channel
/// `|k><j|` of weight `Γ n̄`.
pub fn assemble_liouvillian(energies: &[f64], rates: &RateTable) -> Result<LiouvillianMatrix> {
    let dim = rates.dim;
    if energies.len() != dim {
        return Err(Error::DimensionMismatch(format!(
            "{} energies vs rate table dim {}",
            energies.len(),
            dim
        )));
    }
    let d2 = dim * dim;
    let mut m = CMatrix::zeros(d2, d2);

    // i[ρ, H] with H diagonal: element (j,k) picks up i(ε_k − ε_j).
    for j in 0..dim {
        for k in 0..dim {
            let row = j * dim + k;
            m[(row, row)] += Complex64::new(0.0, energies[k] - energies[j]);
        }
    }

    for e in &rates.entries {
        if e.upper >= dim || e.lower >= e.upper {
            return Err(Error::DimensionMismatch(format!(
                "rate entry ({}, {}) out of range for dim {}",
                e.lower, e.upper, dim
            )));
        }
        // Jump |a><b| with weight w: sandwich (b,b) -> (a,a), plus the
        // anticommutator -w/2 (δ_{j,b} + δ_{k,b}) on every element.
        let mut add_jump = |a: usize, b: usize, w: f64| {
            if w == 0.0 {
                return;
            }
            m[(a * dim + a, b * dim + b)] += Complex64::new(w, 0.0);
            for j in 0..dim {
                for k in 0..dim {
                    let row = j * dim + k;
                    let hit = (j == b) as u32 + (k == b) as u32;
                    if hit > 0 {
                        m[(row, row)] -= Complex64::new(0.5 * w * hit as f64, 0.0);
                    }
                }
            }
        };
        add_jump(e.lower, e.upper, e.downward());
        add_jump(e.upper, e.lower, e.upward());
    }

    Ok(LiouvillianMatrix { dim_sys: dim, matrix: m })
}

/// Kronecker product (row-major vectorization convention).
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == Complex64::ZERO {
                continue;
            }
            for p in 0..br {
                for q in 0..bc {
                    out[(i * br + p, j * bc + q)] = aij * b[(p, q)];
                }
            }
        }
    }
    out
}

/// Assemble the generator for an arbitrary Hamiltonian and arbitrary jump
/// operators: `M = i(I⊗H^T − H⊗I) + Σ w (L⊗L̄ − ½(L†L)⊗I − ½ I⊗(L†L)^T)`.
pub fn assemble_liouvillian_generic(
    h: &CMatrix,
    channels: &[LindbladChannel],
) -> Result<LiouvillianMatrix> {
    let dim = h.nrows();
    if h.ncols() != dim {
        return Err(Error::DimensionMismatch("Hamiltonian must be square".into()));
    }
    let eye = CMatrix::identity(dim, dim);
    // i[ρ, H] = i(ρH − Hρ); vec(ρH) = (I ⊗ H^T) v, vec(Hρ) = (H ⊗ I) v.
    let mut m = (kron(&eye, &h.transpose()) - kron(h, &eye)) * Complex64::new(0.0, 1.0);
    for ch in channels {
        if ch.operator.nrows() != dim || ch.operator.ncols() != dim {
            return Err(Error::DimensionMismatch("channel dim mismatch".into()));
        }
        if ch.weight < 0.0 {
            return Err(Error::InvalidParameter(
                "Lindblad channel weights must be >= 0".into(),
            ));
        }
        if ch.weight == 0.0 {
            continue;
        }
        let l = &ch.operator;
        let ldl = l.adjoint() * l;
        let w = Complex64::new(ch.weight, 0.0);
        m += kron(l, &l.map(|z| z.conj())) * w;
        m -= kron(&ldl, &eye) * (w * 0.5);
        m -= kron(&eye, &ldl.transpose()) * (w * 0.5);
    }
    Ok(LiouvillianMatrix { dim_sys: dim, matrix: m })
}

/// Solve `M v = 0` with unit trace.
///
/// The bordered system (the ρ₀₀ row replaced by the trace constraint) is
/// deterministic and well conditioned at desk scale; shifted inverse
/// iteration is the fallback. The result is Hermitized and trace-normalized,
/// and the residual `‖Mv‖` is verified.
pub fn steady_state(liouvillian: &LiouvillianMatrix) -> Result<DensityVector> {
    let dim = liouvillian.dim_sys;
    let d2 = dim * dim;
    let m = &liouvillian.matrix;
    let scale = m.norm().max(1.0);
    let tol = 1e-10 * scale;

    let bordered_solve = || -> Option<CVector> {
        let mut bordered = m.clone();
        for col in 0..d2 {
            bordered[(0, col)] = Complex64::ZERO;
        }
        for j in 0..dim {
            bordered[(0, j * dim + j)] = Complex64::new(1.0, 0.0);
        }
        let mut rhs = CVector::zeros(d2);
        rhs[0] = Complex64::new(1.0, 0.0);
        bordered.lu().solve(&rhs)
    };

    let finish = |raw: CVector| -> Result<DensityVector> {
        let v = DensityVector { dim, entries: raw };
        let rho = v.to_density_matrix(crate::fock::Basis::Eigen)?;
        Ok(DensityVector::from_matrix(&rho.elements)?)
    };

    if let Some(raw) = bordered_solve() {
        let v = finish(raw)?;
        let residual = (m * &v.entries).norm();
        if residual < tol {
            return Ok(v);
        }
        log::warn!(
            "bordered steady-state solve left residual {residual:.3e}; \
             falling back to inverse iteration"
        );
    }

    // Shifted inverse iteration onto the null space.
    let shift = Complex64::new(1e-12 * scale, 0.0);
    let shifted = m.clone() - CMatrix::identity(d2, d2) * shift;
    let lu = shifted.lu();
    let mut x = trace_row(dim) / Complex64::new(dim as f64, 0.0);
    for _ in 0..8 {
        let Some(next) = lu.solve(&x) else {
            return Err(Error::SolverFailure(
                "inverse iteration matrix is singular".into(),
            ));
        };
        let norm = next.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::SolverFailure("inverse iteration diverged".into()));
        }
        x = next / Complex64::new(norm, 0.0);
    }
    let trace = (0..dim).map(|j| x[j * dim + j]).sum::<Complex64>();
    if trace.norm() < 1e-8 {
        // A null vector orthogonal to the trace functional coexists with
        // the physical one: the null space is degenerate.
        return Err(Error::NonUniqueSteadyState);
    }
    let v = finish(x / trace)?;
    let residual = (m * &v.entries).norm();
    if residual < tol {
        Ok(v)
    } else {
        Err(Error::SolverFailure(format!(
            "steady-state residual {residual:.3e} exceeds {tol:.3e}"
        )))
    }
}

/// Steady populations of the classical rate equation over the table's
/// channels.
///
/// With a diagonal Hamiltonian the vectorized generator block-decouples:
/// populations obey a closed rate equation and every coherence decays, so
/// this is the exact steady state of the full generator at a fraction of
/// the cost (D×D instead of D²×D²). The agreement is asserted against the
/// dense route in the test suite.
pub fn steady_state_populations(rates: &RateTable) -> Result<Vec<f64>> {
    let dim = rates.dim;
    let mut r = nalgebra::DMatrix::<f64>::zeros(dim, dim);
    for e in &rates.entries {
        let down = e.downward();
        let up = e.upward();
        // dp_lower/dt += down * p_upper; dp_upper/dt += up * p_lower
        r[(e.lower, e.upper)] += down;
        r[(e.upper, e.upper)] -= down;
        r[(e.upper, e.lower)] += up;
        r[(e.lower, e.lower)] -= up;
    }
    // Replace the first equation by the normalization.
    for col in 0..dim {
        r[(0, col)] = 1.0;
    }
    let mut rhs = nalgebra::DVector::<f64>::zeros(dim);
    rhs[0] = 1.0;
    let p = r
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SolverFailure("singular population rate matrix".into()))?;
    Ok(p.iter().copied().collect())
}

/// Evolve a vectorized state for time `tau`: `v(τ) = e^{Mτ} v(0)`.
pub fn propagate(
    liouvillian: &LiouvillianMatrix,
    v0: &DensityVector,
    tau: f64,
) -> Result<DensityVector> {
    if tau < 0.0 {
        return Err(Error::InvalidParameter("tau must be >= 0".into()));
    }
    if v0.dim != liouvillian.dim_sys {
        return Err(Error::DimensionMismatch("state/Liouvillian dim mismatch".into()));
    }
    if tau == 0.0 {
        return Ok(v0.clone());
    }
    let prop = Propagator::new(liouvillian, tau)?;
    Ok(prop.step(v0))
}

/// Cached `e^{MΔτ}` for repeated stepping along a trajectory.
pub struct Propagator {
    pub dim_sys: usize,
    step_matrix: CMatrix,
}

impl Propagator {
    pub fn new(liouvillian: &LiouvillianMatrix, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParameter("step must be positive".into()));
        }
        let step_matrix = (liouvillian.matrix.clone() * Complex64::new(dt, 0.0)).exp();
        Ok(Self { dim_sys: liouvillian.dim_sys, step_matrix })
    }

    pub fn step(&self, v: &DensityVector) -> DensityVector {
        DensityVector {
            dim: v.dim,
            entries: &self.step_matrix * &v.entries,
        }
    }

    /// Apply the step to a bare vector (no state semantics).
    pub fn step_raw(&self, v: &CVector) -> CVector {
        &self.step_matrix * v
    }
}

/// Convenience: full thermal pipeline from an eigensystem to its
/// Liouvillian.
pub fn thermal_liouvillian(
    eigsys: &EigenSystem,
    gamma_a: f64,
    temperature: f64,
) -> Result<(RateTable, LiouvillianMatrix)> {
    let rates = build_eigenbasis_dissipator(eigsys, gamma_a, temperature)?;
    let m = assemble_liouvillian(&eigsys.energies, &rates)?;
    Ok((rates, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{build_hamiltonian, diagonalize, Basis, ModelSpec};
    use crate::thermal::{canonical_state, naive_thermal_state, trace_distance};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn eigsys_for(u: f64, dim: usize, keep: usize) -> EigenSystem {
        let spec = if u == 0.0 {
            ModelSpec::quartic(1.0, 0.0, dim)
        } else {
            ModelSpec::kerr(1.0, u, dim)
        };
        let h = build_hamiltonian(&spec).unwrap();
        diagonalize(&h, keep).unwrap()
    }

    #[test]
    fn bose_occupation_values() {
        assert_relative_eq!(
            bose_occupation(1.0, 1.0).unwrap(),
            1.0 / (1.0f64.exp() - 1.0),
            epsilon = 1e-14
        );
        assert_eq!(bose_occupation(1.0, 0.0).unwrap(), 0.0);
        assert!(bose_occupation(0.0, 1.0).is_err());
        assert!(bose_occupation(-0.5, 1.0).is_err());
    }

    #[test]
    fn harmonic_rate_table_is_the_standard_ladder() {
        let eigsys = eigsys_for(0.0, 10, 10);
        let table = build_eigenbasis_dissipator(&eigsys, 0.1, 0.5).unwrap();
        assert_eq!(table.entries.len(), 9);
        for e in &table.entries {
            assert_eq!(e.upper, e.lower + 1);
            assert_relative_eq!(e.gamma, 0.1 * (e.lower + 1) as f64, epsilon = 1e-9);
            assert_relative_eq!(e.delta, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn kerr_rate_table_has_per_transition_bose_factors() {
        let eigsys = eigsys_for(0.2, 8, 8);
        let table = build_eigenbasis_dissipator(&eigsys, 0.05, 0.7).unwrap();
        for e in &table.entries {
            assert_eq!(e.upper, e.lower + 1);
            let delta = 1.0 + 2.0 * e.lower as f64 * 0.2;
            assert_relative_eq!(e.delta, delta, epsilon = 1e-9);
            assert_relative_eq!(
                e.n_bar,
                bose_occupation(delta, 0.7).unwrap(),
                epsilon = 1e-12
            );
        }
        // Bose factors genuinely differ between rungs.
        assert!((table.entries[0].n_bar - table.entries[1].n_bar).abs() > 1e-3);
    }

    #[test]
    fn quartic_rate_table_reaches_beyond_nearest_neighbours() {
        let spec = ModelSpec::quartic(1.0, 0.1, 60);
        let h = build_hamiltonian(&spec).unwrap();
        let eigsys = diagonalize(&h, 8).unwrap();
        let table = build_eigenbasis_dissipator(&eigsys, 0.1, 0.5).unwrap();
        let beyond: Vec<_> = table
            .entries
            .iter()
            .filter(|e| e.upper - e.lower > 1)
            .collect();
        assert!(!beyond.is_empty(), "expected |j-k| = 3 channels");
        for e in &table.entries {
            // Only odd-parity pairs couple through a single quadrature.
            assert!((e.upper - e.lower) % 2 == 1, "parity-forbidden channel {e:?}");
            let c = eigsys.c_table[(e.lower, e.upper)];
            assert_relative_eq!(e.gamma, 0.1 * c * c, max_relative = 1e-12);
        }
    }

    #[test]
    fn detailed_balance_per_channel() {
        let eigsys = eigsys_for(0.37, 10, 10);
        let table = build_eigenbasis_dissipator(&eigsys, 0.01, 0.9).unwrap();
        for e in &table.entries {
            let ratio = e.n_bar / (1.0 + e.n_bar);
            assert_relative_eq!(ratio, (-e.delta / 0.9).exp(), epsilon = 1e-12);
            assert!(e.downward() >= 0.0 && e.upward() >= 0.0);
        }
    }

    #[test]
    fn liouvillian_preserves_trace() {
        let eigsys = eigsys_for(0.3, 8, 8);
        let (_, m) = thermal_liouvillian(&eigsys, 0.05, 0.8).unwrap();
        assert!(m.trace_preservation_defect() < 1e-12);
    }

    #[test]
    fn harmonic_zero_t_coherence_decay_eigenvalue() {
        // At T = 0 the (0,1) coherence is an exact eigenvector of M with
        // eigenvalue iω − γ/2.
        let gamma = 0.07;
        let eigsys = eigsys_for(0.0, 6, 6);
        let (_, m) = thermal_liouvillian(&eigsys, gamma, 0.0).unwrap();
        let dim = 6;
        let mut e01 = CVector::zeros(dim * dim);
        e01[dim + 0] = Complex64::new(1.0, 0.0); // element (1,0)
        let out = &m.matrix * &e01;
        let expected = Complex64::new(-gamma / 2.0, -1.0);
        assert!((out - e01 * expected).norm() < 1e-10);

        let mut e10 = CVector::zeros(dim * dim);
        e10[1] = Complex64::new(1.0, 0.0); // element (0,1)
        let out = &m.matrix * &e10;
        let expected = Complex64::new(-gamma / 2.0, 1.0);
        assert!((out - e10 * expected).norm() < 1e-10);
    }

    #[test]
    fn kerr_steady_state_is_canonical() {
        // Moderate nonlinearity, T = ω_a.
        let u = (-1.0f64).exp();
        let keep = 14;
        let eigsys = eigsys_for(u, keep, keep);
        let (_, m) = thermal_liouvillian(&eigsys, 0.02, 1.0).unwrap();
        let ss = steady_state(&m).unwrap();
        let rho_ss = ss.to_density_matrix(Basis::Eigen).unwrap();
        let canonical = canonical_state(&eigsys, 1.0).unwrap();
        let d = trace_distance(&rho_ss, &canonical).unwrap();
        assert!(d < 1e-8, "trace distance {d}");
        assert!((&m.matrix * &ss.entries).norm() < 1e-10 * m.matrix.norm().max(1.0));
    }

    #[test]
    fn naive_steady_state_is_bose_einstein() {
        let dim = 22;
        let h = build_hamiltonian(&ModelSpec::kerr(1.0, 0.4, dim)).unwrap();
        let channels = build_naive_dissipator(1.0, 0.05, 0.7, dim).unwrap();
        let m = assemble_liouvillian_generic(&h.elements, &channels).unwrap();
        assert!(m.trace_preservation_defect() < 1e-12);
        let ss = steady_state(&m).unwrap();
        let rho = ss.to_density_matrix(Basis::Fock).unwrap();
        let expected = naive_thermal_state(1.0, 0.7, dim).unwrap();
        let d = trace_distance(&rho, &expected).unwrap();
        assert!(d < 1e-8, "trace distance {d} from the Bose-Einstein state");
    }

    #[test]
    fn naive_steady_state_independent_of_u() {
        let dim = 22;
        let channels = build_naive_dissipator(1.0, 0.05, 0.7, dim).unwrap();
        let mut states = Vec::new();
        for u in [0.0, 0.3, 2.0] {
            let h = build_hamiltonian(&ModelSpec::kerr(1.0, u, dim)).unwrap();
            let m = assemble_liouvillian_generic(&h.elements, &channels).unwrap();
            let ss = steady_state(&m).unwrap();
            states.push(ss.to_density_matrix(Basis::Fock).unwrap());
        }
        for pair in states.windows(2) {
            let d = trace_distance(&pair[0], &pair[1]).unwrap();
            assert!(d < 1e-10, "naive steady state moved with U: {d}");
        }
    }

    #[test]
    fn propagation_converges_to_steady_state() {
        let u = 0.3;
        let keep = 10;
        let eigsys = eigsys_for(u, keep, keep);
        let gamma = 0.1;
        let (_, m) = thermal_liouvillian(&eigsys, gamma, 0.6).unwrap();
        let ss = steady_state(&m).unwrap();
        let rho_ss = ss.to_density_matrix(Basis::Eigen).unwrap();

        let vacuum = DensityVector::ground_state(keep);
        let evolved = propagate(&m, &vacuum, 40.0 / gamma).unwrap();
        let rho_t = evolved.to_density_matrix(Basis::Eigen).unwrap();
        let d = trace_distance(&rho_t, &rho_ss).unwrap();
        assert!(d < 1e-8, "trace distance {d}");
    }

    #[test]
    fn propagation_monotone_approach() {
        let eigsys = eigsys_for(0.3, 8, 8);
        let gamma = 0.1;
        let (_, m) = thermal_liouvillian(&eigsys, gamma, 0.6).unwrap();
        let ss = steady_state(&m)
            .unwrap()
            .to_density_matrix(Basis::Eigen)
            .unwrap();
        let vacuum = DensityVector::ground_state(8);
        let mut last = f64::INFINITY;
        for tau in [0.0, 2.0 / gamma, 5.0 / gamma, 10.0 / gamma, 20.0 / gamma] {
            let rho = propagate(&m, &vacuum, tau)
                .unwrap()
                .to_density_matrix(Basis::Eigen)
                .unwrap();
            let d = trace_distance(&rho, &ss).unwrap();
            assert!(d <= last + 1e-12, "distance grew: {d} after {last}");
            last = d;
        }
    }

    #[test]
    fn propagate_zero_time_is_identity() {
        let eigsys = eigsys_for(0.2, 6, 6);
        let (_, m) = thermal_liouvillian(&eigsys, 0.05, 0.5).unwrap();
        let v = DensityVector::ground_state(6);
        let out = propagate(&m, &v, 0.0).unwrap();
        assert_eq!(out.entries, v.entries);
    }

    #[test]
    fn populations_route_matches_dense_route() {
        let u = 0.15;
        let keep = 9;
        let spec = ModelSpec::quartic(1.0, u, 50);
        let h = build_hamiltonian(&spec).unwrap();
        let eigsys = diagonalize(&h, keep).unwrap();
        let (rates, m) = thermal_liouvillian(&eigsys, 0.03, 0.8).unwrap();
        let dense = steady_state(&m).unwrap().to_matrix();
        let pauli = steady_state_populations(&rates).unwrap();
        for j in 0..keep {
            assert_relative_eq!(dense[(j, j)].re, pauli[j], epsilon = 1e-10);
        }
    }

    #[test]
    fn trace_preservation_under_propagation() {
        let eigsys = eigsys_for(0.1, 8, 8);
        let (_, m) = thermal_liouvillian(&eigsys, 0.02, 1.0).unwrap();
        let rho = canonical_state(&eigsys, 0.4).unwrap();
        let v = DensityVector::from_density_matrix(&rho).unwrap();
        let out = propagate(&m, &v, 7.3).unwrap();
        assert_relative_eq!(out.trace().re, 1.0, epsilon = 1e-10);
        assert!(out.trace().im.abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn bose_detailed_balance(delta in 1e-3f64..10.0, t in 1e-2f64..50.0) {
            let n = bose_occupation(delta, t).unwrap();
            prop_assert!((n / (1.0 + n) - (-delta / t).exp()).abs() < 1e-12);
        }

        #[test]
        fn propagation_preserves_hermiticity(seed in 0u64..1000) {
            // Deterministic pseudo-random Hermitian matrix from the seed.
            let dim = 5;
            let mut m = CMatrix::zeros(dim, dim);
            let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
            let mut next = || {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 33) as f64 / (1u64 << 31) as f64) - 1.0
            };
            for j in 0..dim {
                for k in j..dim {
                    let re = next();
                    let im = if j == k { 0.0 } else { next() };
                    m[(j, k)] = Complex64::new(re, im);
                    m[(k, j)] = Complex64::new(re, -im);
                }
            }
            let eigsys = eigsys_for(0.2, dim, dim);
            let (_, liou) = thermal_liouvillian(&eigsys, 0.05, 0.7).unwrap();
            let v = DensityVector::from_matrix(&m).unwrap();
            let out = propagate(&liou, &v, 3.7).unwrap();
            prop_assert!(out.hermiticity_deviation() < 1e-10);
        }

        #[test]
        fn trace_functional_annihilates_generator(u in 0.01f64..1.0, t in 0.1f64..1.5) {
            let eigsys = eigsys_for(u, 6, 6);
            let (_, m) = thermal_liouvillian(&eigsys, 0.05, t).unwrap();
            prop_assert!(m.trace_preservation_defect() < 1e-12);
        }
    }
}
