//! Truncated Fock-space operators, model Hamiltonians, and exact
//! diagonalization.
//!
//! Everything downstream works in the ordered eigenbasis of the model
//! Hamiltonian. [`EigenSystem`] carries the retained eigenenergies, the
//! Fock-to-eigenbasis transform, and the quadrature transition table
//! `C_jk = <j|(a+a†)|k>` that the thermal dissipator and the output-field
//! construction are built from.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::{CMatrix, RMatrix};

/// Relative Frobenius tolerance for Hermiticity checks on observables.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Basis in which an operator or state is expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// Harmonic-oscillator number states |n>.
    Fock,
    /// Energy eigenstates of the model Hamiltonian, ordered by energy.
    Eigen,
}

/// Dense complex operator on a truncated Fock or eigenstate space.
#[derive(Debug, Clone)]
pub struct FockOperator {
    pub dim: usize,
    pub elements: CMatrix,
    pub basis: Basis,
}

impl FockOperator {
    pub fn new(elements: CMatrix, basis: Basis) -> Result<Self> {
        let dim = elements.nrows();
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        if elements.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "operator must be square, got {}x{}",
                dim,
                elements.ncols()
            )));
        }
        Ok(Self { dim, elements, basis })
    }

    pub fn from_real(elements: RMatrix, basis: Basis) -> Result<Self> {
        Ok(Self::new(elements.map(|x| Complex64::new(x, 0.0)), basis)?)
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self {
            dim: self.dim,
            elements: self.elements.adjoint(),
            basis: self.basis,
        }
    }

    /// ‖A − A†‖_F / ‖A‖_F (0 for the zero operator).
    pub fn hermiticity_deviation(&self) -> f64 {
        let norm = self.elements.norm();
        if norm == 0.0 {
            return 0.0;
        }
        (&self.elements - self.elements.adjoint()).norm() / norm
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_deviation() < HERMITICITY_TOL
    }
}

/// Which Hamiltonian variant to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// `ω a†a + U a†a†aa` (number-diagonal).
    Kerr,
    /// `ω a†a + U (a+a†)⁴`.
    Quartic,
    /// `ω a†a + U (a+a†)⁴ + Σ U_2n (a+a†)^2n` with the extra orders taken
    /// from [`ModelSpec::extra_orders`].
    Series,
}

/// Parameters of the resonator model.
///
/// `u` is the quartic coefficient (the Kerr coefficient for
/// [`Model::Kerr`]); `extra_orders` lists higher even orders as
/// `(2n, U_2n)` pairs with `2n >= 6`. Attractive models (`u < 0`) are only
/// accepted with a positive sextic term, which keeps the spectrum bounded
/// from below on the truncated space.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub omega_a: f64,
    pub model: Model,
    pub u: f64,
    pub extra_orders: Vec<(u32, f64)>,
    pub dim: usize,
}

impl ModelSpec {
    pub fn kerr(omega_a: f64, u: f64, dim: usize) -> Self {
        Self { omega_a, model: Model::Kerr, u, extra_orders: Vec::new(), dim }
    }

    pub fn quartic(omega_a: f64, u: f64, dim: usize) -> Self {
        Self { omega_a, model: Model::Quartic, u, extra_orders: Vec::new(), dim }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidDimension(self.dim));
        }
        if !(self.omega_a > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "omega_a must be positive, got {}",
                self.omega_a
            )));
        }
        if !self.u.is_finite() {
            return Err(Error::InvalidParameter("U must be finite".into()));
        }
        for &(order, coeff) in &self.extra_orders {
            if order < 6 || order % 2 != 0 {
                return Err(Error::InvalidParameter(format!(
                    "extra orders must be even and >= 6, got {order}"
                )));
            }
            if !coeff.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "coefficient of order {order} must be finite"
                )));
            }
        }
        if self.u < 0.0 {
            let stabilized = self.model != Model::Kerr
                && self.extra_orders.iter().any(|&(order, c)| order == 6 && c > 0.0);
            if !stabilized {
                return Err(Error::UnstableSpectrum);
            }
        }
        Ok(())
    }

    /// Same model at a different truncation.
    pub fn with_dim(&self, dim: usize) -> Self {
        Self { dim, ..self.clone() }
    }
}

/// Annihilation and creation operators on a `dim`-dimensional Fock space.
///
/// `a` carries √n on the first superdiagonal; `a†` is its transpose. The
/// truncation forces `[a, a†]` to deviate from the identity in the
/// bottom-right corner.
pub fn build_ladder_operators(dim: usize) -> Result<(FockOperator, FockOperator)> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    let mut a = RMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = (n as f64).sqrt();
    }
    let adag = a.transpose();
    Ok((
        FockOperator::from_real(a, Basis::Fock)?,
        FockOperator::from_real(adag, Basis::Fock)?,
    ))
}

/// Real matrix of the ladder operator `a` (internal convenience).
fn ladder_real(dim: usize) -> RMatrix {
    let mut a = RMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = (n as f64).sqrt();
    }
    a
}

/// Position-like quadrature `a + a†` as a real symmetric matrix.
pub fn quadrature_x_real(dim: usize) -> RMatrix {
    let a = ladder_real(dim);
    &a + a.transpose()
}

/// Build the model Hamiltonian in the Fock basis.
///
/// For [`Model::Kerr`] the result is diagonal with entries
/// `n ω_a + n(n−1) U`. The quartic and series variants are polynomials in
/// `(a+a†)` and mix number states.
pub fn build_hamiltonian(spec: &ModelSpec) -> Result<FockOperator> {
    spec.validate()?;
    let dim = spec.dim;
    let mut h = RMatrix::zeros(dim, dim);
    match spec.model {
        Model::Kerr => {
            for n in 0..dim {
                let nf = n as f64;
                h[(n, n)] = nf * spec.omega_a + nf * (nf - 1.0) * spec.u;
            }
        }
        Model::Quartic | Model::Series => {
            for n in 0..dim {
                h[(n, n)] = n as f64 * spec.omega_a;
            }
            let x = quadrature_x_real(dim);
            let x2 = &x * &x;
            let x4 = &x2 * &x2;
            h += spec.u * &x4;
            if spec.model == Model::Series {
                let mut xpow = x4;
                let mut current_order = 4u32;
                let mut orders = spec.extra_orders.clone();
                orders.sort_by_key(|&(o, _)| o);
                for (order, coeff) in orders {
                    while current_order < order {
                        xpow *= &x2;
                        current_order += 2;
                    }
                    h += coeff * &xpow;
                }
            }
        }
    }
    // Symmetrize away floating-point asymmetry from the matrix powers.
    let h = (&h + h.transpose()) * 0.5;
    FockOperator::from_real(h, Basis::Fock)
}

/// Map circuit charging/Josephson energies onto a resonator model.
///
/// A junction contributes `-E_J cos φ` with `φ = (2E_C/E_J)^(1/4) (a+a†)`,
/// giving `ω_a = √(8 E_C E_J)` and even-order coefficients
/// `U_2n = -E_J (-√(2E_C/E_J))^n / (2n)!`, so `U₄ = -E_C/12` and `U₆ > 0`.
/// The series is only meaningful for small `E_C/E_J`; a ratio above 0.1 is
/// logged as a warning.
pub fn circuit_params_to_model(e_c: f64, e_j: f64, max_order: u32) -> Result<ModelSpec> {
    if !(e_c > 0.0) || !(e_j > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "charging and Josephson energies must be positive, got E_C={e_c}, E_J={e_j}"
        )));
    }
    if max_order < 4 || max_order % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "max_order must be an even integer >= 4, got {max_order}"
        )));
    }
    if e_c / e_j > 0.1 {
        log::warn!(
            "E_C/E_J = {:.3} is large; the truncated cosine expansion is unreliable",
            e_c / e_j
        );
    }
    let omega_a = (8.0 * e_c * e_j).sqrt();
    let phi_zpf_sq = (2.0 * e_c / e_j).sqrt();
    let coeff = |n: u32| -> f64 {
        let mut factorial = 1.0f64;
        for k in 2..=(2 * n) {
            factorial *= k as f64;
        }
        -e_j * (-phi_zpf_sq).powi(n as i32) / factorial
    };
    let u4 = coeff(2);
    let extra_orders: Vec<(u32, f64)> =
        (3..=max_order / 2).map(|n| (2 * n, coeff(n))).collect();
    let model = if max_order == 4 { Model::Quartic } else { Model::Series };
    Ok(ModelSpec {
        omega_a,
        model,
        u: u4,
        extra_orders,
        dim: 40,
    })
}

/// One dipole-allowed transition between retained eigenstates.
#[derive(Debug, Clone, Copy)]
pub struct Transition {
    /// Lower level index (energy order).
    pub lower: usize,
    /// Upper level index.
    pub upper: usize,
    /// Transition energy `ε_upper − ε_lower` (> 0).
    pub delta: f64,
    /// Quadrature matrix element `C_jk = <lower|(a+a†)|upper>`.
    pub c: f64,
}

/// Sorted eigensystem of a model Hamiltonian.
///
/// Columns of `transform` are the retained eigenvectors expressed in the
/// Fock basis of the working dimension; the overall phase of each is fixed
/// by making its largest-magnitude component positive, so `c_table` is real
/// and reproducible across runs.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    /// Retained eigenenergies, ascending.
    pub energies: Vec<f64>,
    /// `dim_work × keep` change of basis (Fock rows, eigen columns).
    pub transform: RMatrix,
    /// `keep × keep` table of `<j|(a+a†)|k>` between retained states.
    pub c_table: RMatrix,
    /// Working Fock dimension used for the diagonalization.
    pub dim_work: usize,
    /// Set when two retained transition energies coincide to within
    /// `1e-9` of the fundamental spacing (the secular dissipator is
    /// unreliable there).
    pub degenerate_transitions: bool,
    /// Set by [`eigensystem_for`] when the doubling test passed (always
    /// true for plain [`diagonalize`], which does not run it).
    pub truncation_converged: bool,
}

impl EigenSystem {
    /// Number of retained eigenstates.
    pub fn keep(&self) -> usize {
        self.energies.len()
    }

    /// Transition energy `ε_k − ε_j`.
    pub fn delta(&self, k: usize, j: usize) -> f64 {
        self.energies[k] - self.energies[j]
    }

    /// All ordered pairs `j < k` of retained levels.
    pub fn transitions(&self) -> impl Iterator<Item = Transition> + '_ {
        let keep = self.keep();
        (0..keep).flat_map(move |j| {
            ((j + 1)..keep).map(move |k| Transition {
                lower: j,
                upper: k,
                delta: self.delta(k, j),
                c: self.c_table[(j, k)],
            })
        })
    }

    /// Nearest-neighbour transition energies `ε_{j+1} − ε_j`.
    pub fn ladder_spacings(&self) -> Vec<f64> {
        self.energies.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Quadrature `a + a†` restricted to the retained states (= `c_table`).
    pub fn x_in_eigenbasis(&self) -> RMatrix {
        self.c_table.clone()
    }

    /// Momentum quadrature `-i(a - a†)` restricted to the retained states.
    pub fn p_in_eigenbasis(&self) -> CMatrix {
        let a = ladder_real(self.dim_work);
        let asym = &a - a.transpose();
        let table = self.transform.transpose() * asym * &self.transform;
        table.map(|x| Complex64::new(0.0, -x))
    }

    /// Rotate an eigenbasis matrix into the Fock basis of the working
    /// dimension: `V A V^T`.
    pub fn to_fock(&self, a_eigen: &CMatrix) -> CMatrix {
        let v = self.transform.map(|x| Complex64::new(x, 0.0));
        &v * a_eigen * v.transpose()
    }
}

/// Diagonalize a Hermitian (real-symmetric) operator and retain the `keep`
/// lowest eigenstates.
pub fn diagonalize(h: &FockOperator, keep: usize) -> Result<EigenSystem> {
    let dev = h.hermiticity_deviation();
    if dev >= HERMITICITY_TOL {
        return Err(Error::NotHermitian(dev));
    }
    if keep == 0 || keep > h.dim {
        return Err(Error::InvalidParameter(format!(
            "keep must be in 1..={}, got {keep}",
            h.dim
        )));
    }
    let imag_scale = h.elements.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let real_scale = h.elements.norm().max(1.0);
    if imag_scale > 1e-12 * real_scale {
        return Err(Error::InvalidParameter(
            "diagonalize expects a real-symmetric operator".into(),
        ));
    }
    let real = h.elements.map(|z| z.re);
    let real = (&real + real.transpose()) * 0.5;
    let dim = h.dim;
    let eig = SymmetricEigen::new(real);

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let mut energies = Vec::with_capacity(keep);
    let mut transform = RMatrix::zeros(dim, keep);
    for (col, &idx) in order.iter().take(keep).enumerate() {
        energies.push(eig.eigenvalues[idx]);
        let mut v = eig.eigenvectors.column(idx).clone_owned();
        // Fix the sign so the largest-magnitude component is positive.
        let mut imax = 0;
        for i in 1..dim {
            if v[i].abs() > v[imax].abs() {
                imax = i;
            }
        }
        if v[imax] < 0.0 {
            v = -v;
        }
        transform.set_column(col, &v);
    }

    let x = quadrature_x_real(dim);
    let c_table = transform.transpose() * x * &transform;

    let degenerate_transitions = has_degenerate_transitions(&energies);
    if degenerate_transitions {
        log::warn!(
            "retained spectrum has (near-)degenerate transition energies; \
             the secular eigenbasis dissipator drops the cross terms that \
             would couple them"
        );
    }

    Ok(EigenSystem {
        energies,
        transform,
        c_table,
        dim_work: dim,
        degenerate_transitions,
        truncation_converged: true,
    })
}

fn has_degenerate_transitions(energies: &[f64]) -> bool {
    let keep = energies.len();
    if keep < 2 {
        return false;
    }
    // Tolerance scaled by the fundamental spacing.
    let tol = 1e-9 * (energies[1] - energies[0]).abs().max(f64::EPSILON);
    let mut deltas = Vec::with_capacity(keep * (keep - 1) / 2);
    for j in 0..keep {
        for k in (j + 1)..keep {
            deltas.push(energies[k] - energies[j]);
        }
    }
    deltas.sort_by(f64::total_cmp);
    deltas.windows(2).any(|w| (w[1] - w[0]).abs() < tol)
}

/// Truncation policy for [`eigensystem_for`].
#[derive(Debug, Clone)]
pub struct TruncationPolicy {
    /// Working dimension; `None` selects `max(4*keep, 40)` (for the Kerr
    /// model, whose eigenstates are exactly the number states, `keep`
    /// itself).
    pub dim_work: Option<usize>,
    /// Run the doubling test: re-diagonalize at `2*dim_work` and require
    /// the retained energies to agree to `rel_tol`.
    pub verify_doubling: bool,
    pub rel_tol: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self { dim_work: None, verify_doubling: true, rel_tol: 1e-8 }
    }
}

/// Build and diagonalize a model, retaining `keep` eigenstates.
///
/// Diagonalization runs in a working dimension larger than `keep` because
/// the quartic terms mix number states and a tight truncation biases the
/// upper retained levels. The doubling test flags (does not fail) runs whose
/// retained energies have not converged; callers decide whether to escalate.
pub fn eigensystem_for(
    spec: &ModelSpec,
    keep: usize,
    policy: &TruncationPolicy,
) -> Result<EigenSystem> {
    let default_dim = if spec.model == Model::Kerr {
        keep.max(2)
    } else {
        (4 * keep).max(40)
    };
    let dim_work = policy.dim_work.unwrap_or(default_dim).max(keep).max(2);
    let h = build_hamiltonian(&spec.with_dim(dim_work))?;
    let mut eigsys = diagonalize(&h, keep)?;

    let run_doubling = policy.verify_doubling && spec.model != Model::Kerr;
    if run_doubling {
        let h2 = build_hamiltonian(&spec.with_dim(2 * dim_work))?;
        let check = diagonalize(&h2, keep)?;
        let rel = eigsys
            .energies
            .iter()
            .zip(&check.energies)
            .map(|(&e, &e2)| (e - e2).abs() / e2.abs().max(1.0))
            .fold(0.0, f64::max);
        if rel >= policy.rel_tol {
            log::warn!(
                "truncation not converged: doubling dim_work={dim_work} moved \
                 retained energies by {rel:.3e} (tol {:.1e})",
                policy.rel_tol
            );
            eigsys.truncation_converged = false;
        }
    }
    Ok(eigsys)
}

/// Kerr ladder transition energies `Δε_n = ω_a + 2(n−1)U` for `n = 1..=n_max`.
pub fn kerr_transition_energies(omega_a: f64, u: f64, n_max: usize) -> Result<Vec<f64>> {
    if n_max < 1 {
        return Err(Error::InvalidParameter("n_max must be >= 1".into()));
    }
    Ok((1..=n_max)
        .map(|n| omega_a + 2.0 * (n as f64 - 1.0) * u)
        .collect())
}
