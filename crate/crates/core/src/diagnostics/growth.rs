use nalgebra::{DMatrix, DVector};

use crate::error::DiagnosticsError;

/// Minimum number of samples inside the fit window.
pub const MIN_FIT_SAMPLES: usize = 8;

/// Least-squares fits of `log(value)` over a time window.
///
/// `linear_slope` and `quadratic_coeff` come from the quadratic model
/// `a + b t + q t^2`; `r_squared` and `linear_only_slope` from the linear model `a + b t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthFit {
    pub window: (f64, f64),
    pub samples: usize,
    pub intercept: f64,
    pub linear_slope: f64,
    pub quadratic_coeff: f64,
    pub r_squared: f64,
    pub linear_only_slope: f64,
    pub rss_linear: f64,
    pub rss_quadratic: f64,
}

impl GrowthFit {
    /// Fraction of the linear-fit residual sum of squares removed by the quadratic term.
    pub fn quadratic_improvement(&self) -> f64 {
        if self.rss_linear > 0.0 {
            (self.rss_linear - self.rss_quadratic) / self.rss_linear
        } else {
            0.0
        }
    }
}

fn least_squares(tau: &[f64], y: &[f64], degree: usize) -> (Vec<f64>, f64) {
    let m = tau.len();
    let x = DMatrix::from_fn(m, degree + 1, |i, j| tau[i].powi(j as i32));
    let rhs = DVector::from_column_slice(y);
    let coef = x
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .expect("svd computed with both factors");
    let rss = (&x * &coef - &rhs).norm_squared();
    (coef.iter().copied().collect(), rss)
}

/// Fits `log(value) = a + b t + q t^2` over samples with `t` in `window`.
pub fn growth_fit(series: &[(f64, f64)], window: (f64, f64)) -> Result<GrowthFit, DiagnosticsError> {
    let (ta, tb) = window;
    if !(ta < tb) {
        return Err(DiagnosticsError::InvalidWindow(ta, tb));
    }
    let inside: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|(t, _)| *t >= ta && *t <= tb)
        .collect();
    if inside.len() < MIN_FIT_SAMPLES {
        return Err(DiagnosticsError::SeriesTooShort {
            needed: MIN_FIT_SAMPLES,
            got: inside.len(),
        });
    }
    if let Some(&(t, value)) = inside.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(DiagnosticsError::NonPositive { t, value });
    }
    // centred and scaled abscissa keeps the normal matrix well conditioned
    let lo = inside.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = inside.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let c = 0.5 * (lo + hi);
    let s = (0.5 * (hi - lo)).max(f64::MIN_POSITIVE);
    let tau: Vec<f64> = inside.iter().map(|p| (p.0 - c) / s).collect();
    let y: Vec<f64> = inside.iter().map(|p| p.1.ln()).collect();

    let (lin, rss_linear) = least_squares(&tau, &y, 1);
    let (quad, rss_quadratic) = least_squares(&tau, &y, 2);

    let ybar = y.iter().sum::<f64>() / y.len() as f64;
    let tss: f64 = y.iter().map(|v| (v - ybar).powi(2)).sum();
    let r_squared = if tss > 0.0 { 1.0 - rss_linear / tss } else { 1.0 };

    let q = quad[2] / (s * s);
    let b = quad[1] / s - 2.0 * quad[2] * c / (s * s);
    let a = quad[0] - quad[1] * c / s + quad[2] * c * c / (s * s);
    Ok(GrowthFit {
        window,
        samples: inside.len(),
        intercept: a,
        linear_slope: b,
        quadratic_coeff: q,
        r_squared,
        linear_only_slope: lin[1] / s,
        rss_linear,
        rss_quadratic,
    })
}
