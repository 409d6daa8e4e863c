use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::integrate;
use crate::special::normal_cdf;

/// Standard bivariate normal distribution function with correlation `rho`.
///
/// Uses the one-dimensional reduction
/// Φ_ρ(x,y) = Φ(x)Φ(y) + (1/2π) ∫_0^{asin ρ} exp(-(x²+y²-2xy sinθ)/(2cos²θ)) dθ.
pub fn bivariate_normal_cdf(x: f64, y: f64, rho: f64) -> Result<f64> {
    if !(rho > -1.0 && rho < 1.0) {
        return Err(Error::domain(format!("correlation {rho} outside (-1,1)")));
    }
    if x == f64::NEG_INFINITY || y == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    if x == f64::INFINITY {
        return Ok(normal_cdf(y));
    }
    if y == f64::INFINITY {
        return Ok(normal_cdf(x));
    }
    let base = normal_cdf(x) * normal_cdf(y);
    if rho == 0.0 {
        return Ok(base);
    }
    let f = |t: f64| {
        let (s, c) = t.sin_cos();
        (-(x * x + y * y - 2.0 * x * y * s) / (2.0 * c * c)).exp()
    };
    let q = integrate(f, 0.0, rho.asin(), 1e-13, 40);
    Ok((base + q.value / (2.0 * PI)).clamp(0.0, normal_cdf(x).min(normal_cdf(y))))
}
