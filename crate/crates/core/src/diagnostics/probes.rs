use crate::error::DiagnosticsError;
use crate::spectral::PhysicalField;

use super::{gradient_lp_norm, lp_of_samples};

fn norms(v: &PhysicalField, p: f64) -> Result<(f64, f64, f64), DiagnosticsError> {
    if v.max_abs() == 0.0 {
        return Err(DiagnosticsError::ZeroField);
    }
    let grad = gradient_lp_norm(&v.forward(), 2.0)?;
    Ok((lp_of_samples(v.samples(), p), lp_of_samples(v.samples(), 2.0), grad))
}

/// `||v||_2 / (||v||_1^{1/2} ||grad v||_2^{1/2} + ||v||_1)`.
pub fn inequality_probe_nash(v: &PhysicalField) -> Result<f64, DiagnosticsError> {
    let (l1, l2, grad) = norms(v, 1.0)?;
    Ok(l2 / ((l1 * grad).sqrt() + l1))
}

/// `||v||_p / (p^{1/2} ||v||_2^{2/p} ||grad v||_2^{1-2/p} + ||v||_2)`.
pub fn inequality_probe_gn(v: &PhysicalField, p: f64) -> Result<f64, DiagnosticsError> {
    if !(p >= 2.0) || p.is_infinite() {
        return Err(DiagnosticsError::InvalidExponent(p));
    }
    let (lp, l2, grad) = norms(v, p)?;
    let interp = p.sqrt() * l2.powf(2.0 / p) * grad.powf(1.0 - 2.0 / p);
    Ok(lp / (interp + l2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use std::f64::consts::{PI, SQRT_2};

    #[test]
    fn nash_examples() {
        let g = Grid::new(64).unwrap();
        let c = PhysicalField::constant(&g, -0.3);
        assert!((inequality_probe_nash(&c).unwrap() - 1.0).abs() < 1e-14);
        let s = PhysicalField::from_fn(&g, |x, _| (2.0 * PI * x).sin());
        let l1 = 2.0 / PI;
        let expect = SQRT_2.recip() / ((l1 * PI * SQRT_2).sqrt() + l1);
        // the L1 quadrature of |sin| converges algebraically
        assert!((inequality_probe_nash(&s).unwrap() - expect).abs() < 1e-3);
        assert!(matches!(
            inequality_probe_nash(&PhysicalField::zeros(&g)),
            Err(DiagnosticsError::ZeroField)
        ));
    }

    #[test]
    fn gn_examples() {
        let g = Grid::new(32).unwrap();
        let f = crate::solver::random_bandlimited_field(&g, 4, 1).inverse().unwrap();
        let r = inequality_probe_gn(&f, 2.0).unwrap();
        assert!((r - 1.0 / (1.0 + SQRT_2)).abs() < 1e-13);
        let c = PhysicalField::constant(&g, 2.0);
        for p in [4.0, 8.0, 16.0] {
            assert!((inequality_probe_gn(&c, p).unwrap() - 1.0).abs() < 1e-14);
        }
        assert!(inequality_probe_gn(&c, 1.5).is_err());
        assert!(inequality_probe_gn(&PhysicalField::zeros(&g), 4.0).is_err());
    }
}
