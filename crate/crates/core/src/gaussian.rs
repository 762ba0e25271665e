//! Covariance-matrix algebra for two-mode Gaussian states.
//!
//! Quadratures follow `x = a† + a`, `p = i(a† − a)`, so the vacuum has unit
//! variance (shot-noise units). A thermal mode with mean photon number `n`
//! has variance `2n + 1`.
//!
//! The full matrix is ordered `(x_A, p_A, x_B, p_B)`:
//!
//! ```text
//!     γ = | A   C |
//!         | Cᵀ  B |
//! ```

use nalgebra::{Matrix2, Matrix4};

use crate::error::{Error, Result};

/// Absolute tolerance on symplectic eigenvalues.
pub const PHYSICALITY_TOL: f64 = 1e-9;

/// Rounding allowance, in units of machine epsilon times the squared largest
/// entry, added on top of [`PHYSICALITY_TOL`]. Near-pure bright states
/// (`V ~ 10⁴`) carry an intrinsic `ε·V²` uncertainty in `ν₋` once their
/// entries are rounded to f64.
const ROUNDING_SLACK: f64 = 64.0;

/// Which party's mode a measurement acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    Alice,
    Bob,
}

/// Measured quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    X,
    P,
}

impl Quadrature {
    fn index(self) -> usize {
        match self {
            Quadrature::X => 0,
            Quadrature::P => 1,
        }
    }
}

/// Covariance matrix of a bipartite Gaussian state in block form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeCM {
    /// Alice's block.
    pub a: Matrix2<f64>,
    /// Bob's block.
    pub b: Matrix2<f64>,
    /// Cross-correlations, rows indexed by Alice's quadratures.
    pub c: Matrix2<f64>,
}

/// The two symplectic eigenvalues, `nu_plus ≥ nu_minus`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticSpectrum {
    pub nu_plus: f64,
    pub nu_minus: f64,
}

impl TwoModeCM {
    pub fn new(a: Matrix2<f64>, b: Matrix2<f64>, c: Matrix2<f64>) -> Self {
        Self { a, b, c }
    }

    pub fn vacuum() -> Self {
        Self::product(1.0, 1.0)
    }

    /// Product of two symmetric thermal-like modes with variances `va`, `vb`.
    pub fn product(va: f64, vb: f64) -> Self {
        Self {
            a: Matrix2::identity() * va,
            b: Matrix2::identity() * vb,
            c: Matrix2::zeros(),
        }
    }

    /// Standard form `A = a·I`, `B = b·I`, `C = diag(c_x, c_p)`.
    pub fn standard_form(a: f64, b: f64, c_x: f64, c_p: f64) -> Self {
        Self {
            a: Matrix2::identity() * a,
            b: Matrix2::identity() * b,
            c: Matrix2::new(c_x, 0.0, 0.0, c_p),
        }
    }

    pub fn to_matrix4(&self) -> Matrix4<f64> {
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&self.a);
        m.fixed_view_mut::<2, 2>(2, 2).copy_from(&self.b);
        m.fixed_view_mut::<2, 2>(0, 2).copy_from(&self.c);
        m.fixed_view_mut::<2, 2>(2, 0)
            .copy_from(&self.c.transpose());
        m
    }

    pub fn from_matrix4(m: &Matrix4<f64>) -> Self {
        Self {
            a: m.fixed_view::<2, 2>(0, 0).into_owned(),
            b: m.fixed_view::<2, 2>(2, 2).into_owned(),
            c: m.fixed_view::<2, 2>(0, 2).into_owned(),
        }
    }

    /// `Δ = det A + det B + 2 det C`.
    pub fn delta(&self) -> f64 {
        self.a.determinant() + self.b.determinant() + 2.0 * self.c.determinant()
    }

    pub fn determinant(&self) -> f64 {
        self.to_matrix4().determinant()
    }

    /// Applies local transformations `S_A ⊕ S_B`.
    pub fn apply_local(&self, sa: &Matrix2<f64>, sb: &Matrix2<f64>) -> Self {
        Self {
            a: sa * self.a * sa.transpose(),
            b: sb * self.b * sb.transpose(),
            c: sa * self.c * sb.transpose(),
        }
    }

    /// Exchanges the roles of Alice and Bob.
    pub fn swap_parties(&self) -> Self {
        Self {
            a: self.b,
            b: self.a,
            c: self.c.transpose(),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        let scale = self.a.abs().max().max(self.b.abs().max()).max(1.0);
        let tol = 1e-12 * scale;
        (self.a[(0, 1)] - self.a[(1, 0)]).abs() <= tol
            && (self.b[(0, 1)] - self.b[(1, 0)]).abs() <= tol
    }

    pub fn is_physical(&self) -> bool {
        symplectic_eigenvalues(self).is_ok()
    }
}

fn tolerance_for(cm: &TwoModeCM) -> f64 {
    let scale = cm.a.abs().max().max(cm.b.abs().max()).max(cm.c.abs().max());
    PHYSICALITY_TOL + ROUNDING_SLACK * f64::EPSILON * scale * scale
}

/// Symplectic eigenvalues as the moduli of the eigenvalues of `Ωγ`, without
/// any physicality check. Works for partially transposed matrices.
///
/// The `Δ`/`det γ` closed form loses `√ε` relative precision when the two
/// eigenvalues are close (pure and symmetric states), so it is avoided.
pub fn symplectic_eigenvalues_unchecked(cm: &TwoModeCM) -> Result<SymplecticSpectrum> {
    let j = Matrix2::new(0.0, 1.0, -1.0, 0.0);
    let mut omega = Matrix4::zeros();
    omega.fixed_view_mut::<2, 2>(0, 0).copy_from(&j);
    omega.fixed_view_mut::<2, 2>(2, 2).copy_from(&j);
    let ev = (omega * cm.to_matrix4()).complex_eigenvalues();
    let mut moduli: Vec<f64> = ev.iter().map(|z| z.norm()).collect();
    if moduli.iter().any(|m| !m.is_finite()) {
        return Err(Error::NumericalDomain(
            "symplectic spectrum is not finite".into(),
        ));
    }
    moduli.sort_by(f64::total_cmp);
    let spec = SymplecticSpectrum {
        nu_plus: 0.5 * (moduli[2] + moduli[3]),
        nu_minus: 0.5 * (moduli[0] + moduli[1]),
    };
    if !(spec.nu_plus > 0.0) {
        return Err(Error::NumericalDomain(format!(
            "ν₊ = {:e} is not positive",
            spec.nu_plus
        )));
    }
    Ok(spec)
}

/// Symplectic spectrum of a physical state. `ν₋` within tolerance below 1 is
/// clamped to exactly 1.
pub fn symplectic_eigenvalues(cm: &TwoModeCM) -> Result<SymplecticSpectrum> {
    if !(cm.a[(0, 0)] > 0.0 && cm.b[(0, 0)] > 0.0) || cm.to_matrix4().cholesky().is_none() {
        return Err(Error::Physicality { nu_minus: 0.0 });
    }
    let mut spec = symplectic_eigenvalues_unchecked(cm)?;
    let tol = tolerance_for(cm);
    if spec.nu_minus < 1.0 - tol {
        return Err(Error::Physicality {
            nu_minus: spec.nu_minus,
        });
    }
    spec.nu_minus = spec.nu_minus.max(1.0);
    spec.nu_plus = spec.nu_plus.max(1.0);
    Ok(spec)
}

/// Mirror reflection of Bob's p-quadrature.
pub fn partial_transpose(cm: &TwoModeCM) -> TwoModeCM {
    let flip = Matrix2::new(1.0, 0.0, 0.0, -1.0);
    TwoModeCM {
        a: cm.a,
        b: flip * cm.b * flip,
        c: cm.c * flip,
    }
}

/// `−log₂ ν̃₋` without the clamp at zero; positive iff the state is entangled.
pub fn signed_log_negativity(cm: &TwoModeCM) -> Result<f64> {
    symplectic_eigenvalues(cm)?;
    let pt = symplectic_eigenvalues_unchecked(&partial_transpose(cm))?;
    if pt.nu_minus <= 0.0 {
        return Err(Error::NumericalDomain(
            "partially transposed spectrum vanished".into(),
        ));
    }
    Ok(-pt.nu_minus.log2())
}

/// Logarithmic negativity `E_N = max(0, −log₂ ν̃₋)`.
pub fn log_negativity(cm: &TwoModeCM) -> Result<f64> {
    Ok(signed_log_negativity(cm)?.max(0.0))
}

/// Von Neumann entropy (bits) of a thermal mode with symplectic eigenvalue `nu`.
pub fn entropy_g(nu: f64) -> Result<f64> {
    if !nu.is_finite() || nu < 1.0 - PHYSICALITY_TOL {
        return Err(Error::Domain(format!("g(ν) needs ν ≥ 1, got {nu}")));
    }
    if nu <= 1.0 {
        return Ok(0.0);
    }
    let up = 0.5 * (nu + 1.0);
    let down = 0.5 * (nu - 1.0);
    Ok(up * up.log2() - down * down.log2())
}

/// Conditional covariance of the unmeasured mode after homodyning
/// `quadrature` on `measured`.
pub fn condition_on_homodyne(
    cm: &TwoModeCM,
    measured: Party,
    quadrature: Quadrature,
) -> Result<Matrix2<f64>> {
    let q = quadrature.index();
    let (remaining, measured_block, cross) = match measured {
        Party::Bob => (cm.a, cm.b, cm.c.column(q).into_owned()),
        Party::Alice => (cm.b, cm.a, cm.c.row(q).transpose()),
    };
    let var = measured_block[(q, q)];
    if var == 0.0 || !var.is_finite() {
        return Err(Error::Division(format!(
            "measured quadrature variance is {var}"
        )));
    }
    Ok(remaining - cross * cross.transpose() / var)
}

/// Symplectic eigenvalue of a one-mode covariance matrix.
pub fn single_mode_symplectic(block: &Matrix2<f64>) -> Result<f64> {
    let det = block.determinant();
    if det < 0.0 {
        return Err(Error::NumericalDomain(format!(
            "single-mode determinant {det:e} is negative"
        )));
    }
    Ok(det.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn epr(v: f64) -> TwoModeCM {
        let c = (v * v - 1.0).sqrt();
        TwoModeCM::standard_form(v, v, c, -c)
    }

    #[test]
    fn vacuum_is_pure() {
        let s = symplectic_eigenvalues(&TwoModeCM::vacuum()).unwrap();
        assert_eq!((s.nu_plus, s.nu_minus), (1.0, 1.0));
    }

    #[test]
    fn epr_state_is_pure() {
        let s = symplectic_eigenvalues(&epr(3.0)).unwrap();
        assert!((s.nu_plus - 1.0).abs() < 1e-12);
        assert!((s.nu_minus - 1.0).abs() < 1e-12);
    }

    #[test]
    fn thermal_vacuum_product() {
        let s = symplectic_eigenvalues(&TwoModeCM::product(5.0, 1.0)).unwrap();
        assert!((s.nu_plus - 5.0).abs() < 1e-12);
        assert!((s.nu_minus - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_unphysical() {
        let cm = TwoModeCM::product(0.5, 1.0);
        assert!(matches!(
            symplectic_eigenvalues(&cm),
            Err(Error::Physicality { .. })
        ));
        // too much correlation for the local variances
        let cm = TwoModeCM::standard_form(2.0, 2.0, 2.0, -2.0);
        assert!(symplectic_eigenvalues(&cm).is_err());
    }

    #[test]
    fn partial_transpose_examples() {
        let prod = TwoModeCM::product(3.0, 2.0);
        assert_eq!(partial_transpose(&prod), prod);

        let cm = TwoModeCM::standard_form(3.0, 3.0, 8f64.sqrt(), -(8f64.sqrt()));
        let pt = partial_transpose(&cm);
        assert_eq!(pt.c, Matrix2::new(8f64.sqrt(), 0.0, 0.0, 8f64.sqrt()));

        let general = TwoModeCM::new(
            Matrix2::new(2.0, 0.3, 0.3, 1.5),
            Matrix2::new(1.7, -0.2, -0.2, 2.1),
            Matrix2::new(0.4, 0.1, -0.3, 0.2),
        );
        assert_eq!(partial_transpose(&partial_transpose(&general)), general);
    }

    #[test]
    fn log_negativity_of_vacuum_and_epr() {
        assert_eq!(log_negativity(&TwoModeCM::vacuum()).unwrap(), 0.0);
        // symmetric states: ν̃₋ = a − c
        let expected = -(3.0 - 8f64.sqrt()).log2();
        let en = log_negativity(&epr(3.0)).unwrap();
        assert!((en - expected).abs() < 1e-10);
        assert!((en - 2.5431).abs() < 1e-4);
    }

    #[test]
    fn entropy_values() {
        assert_eq!(entropy_g(1.0).unwrap(), 0.0);
        assert_eq!(entropy_g(1.0 - 1e-10).unwrap(), 0.0);
        assert!((entropy_g(3.0).unwrap() - 2.0).abs() < 1e-14);
        let g5 = 3.0 * 3f64.log2() - 2.0;
        assert!((entropy_g(5.0).unwrap() - g5).abs() < 1e-14);
        assert!((g5 - 2.7549).abs() < 1e-4);
        assert!(entropy_g(0.9).is_err());
        assert!(entropy_g(f64::NAN).is_err());
    }

    #[test]
    fn entropy_matches_thermal_series() {
        // S = −Σ p_k log₂ p_k, p_k = n^k / (n+1)^{k+1}
        for n in [0.5f64, 1.0, 2.0] {
            let mut s = 0.0;
            for k in 0..2000 {
                let p = (n / (n + 1.0)).powi(k) / (n + 1.0);
                if p > 0.0 {
                    s -= p * p.log2();
                }
            }
            let g = entropy_g(2.0 * n + 1.0).unwrap();
            assert!((g - s).abs() < 1e-10, "n={n}: {g} vs {s}");
        }
    }

    #[test]
    fn homodyne_conditioning() {
        let prod = TwoModeCM::product(4.0, 2.0);
        let out = condition_on_homodyne(&prod, Party::Bob, Quadrature::X).unwrap();
        assert_eq!(out, prod.a);

        let out = condition_on_homodyne(&epr(3.0), Party::Bob, Quadrature::X).unwrap();
        assert!((out[(0, 0)] - 1.0 / 3.0).abs() < 1e-12);
        assert!((out[(1, 1)] - 3.0).abs() < 1e-12);
        assert!(out[(0, 1)].abs() < 1e-15);

        let out = condition_on_homodyne(&epr(3.0), Party::Alice, Quadrature::P).unwrap();
        assert!((out[(0, 0)] - 3.0).abs() < 1e-12);
        assert!((out[(1, 1)] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn homodyne_conditioning_matches_schur_complement() {
        let cm = TwoModeCM::new(
            Matrix2::new(2.0, 0.3, 0.3, 1.5),
            Matrix2::new(1.7, -0.2, -0.2, 2.1),
            Matrix2::new(0.4, 0.1, -0.3, 0.2),
        );
        // Schur complement of the measured x_B row/column in the 4×4 matrix
        let g = cm.to_matrix4();
        let mut schur = Matrix2::zeros();
        for i in 0..2 {
            for j in 0..2 {
                schur[(i, j)] = g[(i, j)] - g[(i, 2)] * g[(2, j)] / g[(2, 2)];
            }
        }
        let out = condition_on_homodyne(&cm, Party::Bob, Quadrature::X).unwrap();
        assert!((out - schur).abs().max() < 1e-14);
    }

    #[test]
    fn zero_measured_variance_is_an_error() {
        let mut cm = TwoModeCM::vacuum();
        cm.b[(0, 0)] = 0.0;
        assert!(matches!(
            condition_on_homodyne(&cm, Party::Bob, Quadrature::X),
            Err(Error::Division(_))
        ));
    }

    #[test]
    fn matrix4_round_trip() {
        let cm = TwoModeCM::standard_form(3.0, 2.0, 1.0, -1.0);
        assert_eq!(TwoModeCM::from_matrix4(&cm.to_matrix4()), cm);
    }
}
