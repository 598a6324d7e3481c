//! Fourier multipliers on the torus and the commutator identities built from them.
//!
//! Every operator here is a symbol `sigma(kappa)` evaluated at `kappa = 2 pi k`.
//! The Helmholtz operator is `I - Laplacian`, with symbol `1 + |kappa|^2`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::SpectralError;
use crate::spectral::{dealiased_product, Axis, PhysicalField, SpectralField};

/// Relative floor used in the commutator residual denominators.
pub const RESIDUAL_FLOOR: f64 = 1e-300;

/// Divergence-free tolerance: `||div u||_L2 <= 1e-8 ||u||_H1`.
pub const DIVERGENCE_TOLERANCE: f64 = 1e-8;

type SymbolFn = dyn Fn([f64; 2]) -> Complex64 + Send + Sync;

/// A Fourier multiplier symbol `kappa -> sigma(kappa)`.
#[derive(Clone)]
pub struct MultiplierSymbol {
    name: String,
    eval: Arc<SymbolFn>,
}

impl fmt::Debug for MultiplierSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("MultiplierSymbol").field(&self.name).finish()
    }
}

fn helmholtz(kappa: [f64; 2]) -> f64 {
    1.0 + kappa[0] * kappa[0] + kappa[1] * kappa[1]
}

impl MultiplierSymbol {
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn([f64; 2]) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        MultiplierSymbol {
            name: name.into(),
            eval: Arc::new(eval),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn identity() -> Self {
        Self::new("I", |_| Complex64::new(1.0, 0.0))
    }

    /// `(I - Laplacian)^{s/2}`.
    pub fn helmholtz_power(s: f64) -> Self {
        Self::new(format!("(I-Lap)^({s}/2)"), move |k| {
            Complex64::new(helmholtz(k).powf(0.5 * s), 0.0)
        })
    }

    pub fn derivative(axis: Axis) -> Self {
        let ax = axis.index();
        Self::new(format!("d{}", ax + 1), move |k| Complex64::new(0.0, k[ax]))
    }

    /// `R = d1 (I - Laplacian)^{-1}`.
    pub fn r() -> Self {
        Self::new("R", |k| Complex64::new(0.0, k[0] / helmholtz(k)))
    }

    /// The remainder operator of the modified-vorticity equation,
    /// `sigma = -i kappa_1 / (1 + |kappa|^2)`, i.e. `N = -(I + Lap (I-Lap)^{-1}) d1`.
    pub fn n() -> Self {
        Self::new("N", |k| Complex64::new(0.0, -k[0] / helmholtz(k)))
    }

    /// `((I-Lap)^{-1} Lap - I) d1` read literally with `Lap -> -|kappa|^2`.
    /// Order +1; kept only as a negative control for the modified-vorticity balance.
    pub fn n_literal() -> Self {
        Self::new("N_literal", |k| {
            let h = helmholtz(k);
            let lap = -(k[0] * k[0] + k[1] * k[1]);
            Complex64::new(0.0, k[0]) * (lap / h - 1.0)
        })
    }

    /// Symbol of `self` followed by `other` (multipliers commute).
    pub fn compose(&self, other: &MultiplierSymbol) -> Self {
        let a = self.eval.clone();
        let b = other.eval.clone();
        Self::new(format!("{}*{}", self.name, other.name), move |k| a(k) * b(k))
    }

    pub fn eval(&self, kappa: [f64; 2]) -> Complex64 {
        (self.eval)(kappa)
    }

    /// Applies the multiplier. On Nyquist rows and columns the symbol is
    /// replaced by its Hermitian part `(sigma(k) + conj sigma(k'))/2`, where
    /// `k'` is the storage mirror of `-k`; this keeps real fields real and
    /// reproduces the derivative's Nyquist convention.
    pub fn apply(&self, f: &SpectralField) -> SpectralField {
        let grid = f.grid().clone();
        let nyq = grid.nyquist();
        let two_pi = 2.0 * std::f64::consts::PI;
        f.map_modes(|k, kappa, c| {
            let s = self.eval(kappa);
            if k[0] == nyq || k[1] == nyq {
                let mirror = |m: i64| if m == nyq { nyq } else { -m };
                let km = [mirror(k[0]), mirror(k[1])];
                let sm = self.eval([two_pi * km[0] as f64, two_pi * km[1] as f64]);
                c * (s + sm.conj()) * 0.5
            } else {
                c * s
            }
        })
    }
}

pub fn apply_r(f: &SpectralField) -> SpectralField {
    MultiplierSymbol::r().apply(f)
}

pub fn apply_n(f: &SpectralField) -> SpectralField {
    MultiplierSymbol::n().apply(f)
}

pub fn apply_helmholtz_power(f: &SpectralField, s: f64) -> SpectralField {
    MultiplierSymbol::helmholtz_power(s).apply(f)
}

/// Velocity of a mean-free vorticity: `u = grad_perp (-Lap)^{-1} omega`,
/// `u1_hat = i kappa_2 omega_hat / |kappa|^2`, `u2_hat = -i kappa_1 omega_hat / |kappa|^2`.
pub fn biot_savart(
    omega: &SpectralField,
) -> Result<(SpectralField, SpectralField), SpectralError> {
    let mean = omega.get([0, 0]).norm();
    if mean > 1e-12 * omega.max_abs_coeff().max(1.0) {
        return Err(SpectralError::Precondition(format!(
            "vorticity must be mean-free, mean coefficient is {mean:.3e}"
        )));
    }
    Ok(biot_savart_unchecked(omega))
}

pub(crate) fn biot_savart_unchecked(omega: &SpectralField) -> (SpectralField, SpectralField) {
    let nyq = omega.grid().nyquist();
    let component = |axis: usize| {
        omega.map_modes(|k, kap, c| {
            let k2 = kap[0] * kap[0] + kap[1] * kap[1];
            if k2 == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            // u1 = d2 psi, u2 = -d1 psi; drop the Nyquist of the differentiated axis
            let (dax, sign) = if axis == 0 { (1, 1.0) } else { (0, -1.0) };
            if k[dax] == nyq {
                return Complex64::new(0.0, 0.0);
            }
            c * Complex64::new(0.0, sign * kap[dax] / k2)
        })
    };
    (component(0), component(1))
}

/// `||div u||_L2`.
pub fn divergence_l2(u1: &SpectralField, u2: &SpectralField) -> f64 {
    (&u1.derivative(Axis::X1) + &u2.derivative(Axis::X2))
        .mean_square()
        .sqrt()
}

/// Whether `u` is divergence-free at the module tolerance.
pub fn is_divergence_free(u1: &SpectralField, u2: &SpectralField) -> bool {
    let h1 = sobolev_h1(u1) + sobolev_h1(u2);
    divergence_l2(u1, u2) <= DIVERGENCE_TOLERANCE * h1.sqrt().max(f64::MIN_POSITIVE)
}

fn sobolev_h1(f: &SpectralField) -> f64 {
    f.map_modes(|_, kap, c| c * (1.0 + kap[0] * kap[0] + kap[1] * kap[1]).sqrt())
        .mean_square()
}

fn physical(f: &SpectralField) -> PhysicalField {
    f.inverse_unchecked()
}

/// `u . grad g` formed in sample space and dealiased.
pub fn advect(u1: &PhysicalField, u2: &PhysicalField, g: &SpectralField) -> SpectralField {
    let g1 = physical(&g.derivative(Axis::X1));
    let g2 = physical(&g.derivative(Axis::X2));
    (&u1.multiply(&g1) + &u2.multiply(&g2)).forward().dealias()
}

/// `[R, u.grad] rho = R(u.grad rho) - u.grad(R rho)`.
pub fn commutator_r_advection(
    u1: &SpectralField,
    u2: &SpectralField,
    rho: &SpectralField,
) -> PhysicalField {
    physical(&commutator_r_advection_hat(u1, u2, rho))
}

pub(crate) fn commutator_r_advection_hat(
    u1: &SpectralField,
    u2: &SpectralField,
    rho: &SpectralField,
) -> SpectralField {
    let p1 = physical(u1);
    let p2 = physical(u2);
    let r = MultiplierSymbol::r();
    let lhs = r.apply(&advect(&p1, &p2, rho));
    let rhs = advect(&p1, &p2, &r.apply(rho));
    &lhs - &rhs
}

/// `sum_j [T_j, u_j] g = sum_j T_j(u_j g) - u_j T_j g`, with products dealiased.
fn commutator_sum(
    ops: [&MultiplierSymbol; 2],
    u: [&PhysicalField; 2],
    g: &SpectralField,
) -> SpectralField {
    let gp = physical(g);
    let mut acc = SpectralField::zeros(g.grid());
    for j in 0..2 {
        let prod = dealiased_product(u[j], &gp);
        let first = ops[j].apply(&prod);
        let tg = physical(&ops[j].apply(g));
        let second = dealiased_product(u[j], &tg);
        acc = &acc + &(&first - &second);
    }
    acc
}

fn relative_residual(diff: &SpectralField, rho: &SpectralField) -> f64 {
    diff.mean_square().sqrt() / rho.mean_square().sqrt().max(RESIDUAL_FLOOR)
}

/// Relative L2 defect of `[R, u.grad] rho = d_j R(u_j rho) - u_j d_j R rho`.
pub fn commutator_identity_residual(
    u1: &SpectralField,
    u2: &SpectralField,
    rho: &SpectralField,
) -> f64 {
    commutator_t_identity_residual(&MultiplierSymbol::identity(), u1, u2, rho)
}

/// Relative L2 defect of `T([R, u.grad] rho) = [T R d_j, u_j] rho - [T d_j, u_j] R rho`.
pub fn commutator_t_identity_residual(
    t: &MultiplierSymbol,
    u1: &SpectralField,
    u2: &SpectralField,
    rho: &SpectralField,
) -> f64 {
    let p1 = physical(u1);
    let p2 = physical(u2);
    let lhs = t.apply(&commutator_r_advection_hat(u1, u2, rho));

    let r = MultiplierSymbol::r();
    let d = [
        MultiplierSymbol::derivative(Axis::X1),
        MultiplierSymbol::derivative(Axis::X2),
    ];
    let trd = [t.compose(&r).compose(&d[0]), t.compose(&r).compose(&d[1])];
    let td = [t.compose(&d[0]), t.compose(&d[1])];
    let first = commutator_sum([&trd[0], &trd[1]], [&p1, &p2], rho);
    let second = commutator_sum([&td[0], &td[1]], [&p1, &p2], &r.apply(rho));
    let rhs = &first - &second;
    relative_residual(&(&lhs - &rhs), rho)
}
