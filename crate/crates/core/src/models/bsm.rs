//! Black-Scholes-Merton European call.

use crate::scalar::Scalar;

use super::ModelError;

/// Standard normal CDF, `Φ(x) = erfc(-x/√2) / 2`.
///
/// Evaluated in `f64` through the musl-derived `erfc` (about 1 ulp), which
/// keeps the absolute error far below 1e-12 across the real line.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Call price `C = S Φ(d₁) − K e^{−rτ} Φ(d₂)`.
///
/// `sigma = 0` and `spot = 0` fall back to the deterministic limit
/// `max(S − K e^{−rτ}, 0)`.
pub fn bsm_price<T: Scalar>(spot: T, strike: T, tau: T, sigma: T, rate: T) -> Result<T, ModelError> {
    let (s, k, t, v, r) = (
        spot.as_f64(),
        strike.as_f64(),
        tau.as_f64(),
        sigma.as_f64(),
        rate.as_f64(),
    );
    if !(s.is_finite() && s >= 0.0) {
        return Err(ModelError::InvalidParameter(format!("spot must be finite and >= 0, got {s}")));
    }
    if !(k.is_finite() && k > 0.0) {
        return Err(ModelError::InvalidParameter(format!("strike must be finite and > 0, got {k}")));
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(ModelError::InvalidParameter(format!("maturity must be finite and > 0, got {t}")));
    }
    if !(v.is_finite() && v >= 0.0) {
        return Err(ModelError::InvalidParameter(format!("volatility must be finite and >= 0, got {v}")));
    }
    if !r.is_finite() {
        return Err(ModelError::InvalidParameter(format!("rate must be finite, got {r}")));
    }
    let discounted_strike = k * (-r * t).exp();
    let price = if s == 0.0 {
        0.0
    } else if v == 0.0 {
        (s - discounted_strike).max(0.0)
    } else {
        let vol_sqrt_t = v * t.sqrt();
        let d1 = ((s / k).ln() + (r + 0.5 * v * v) * t) / vol_sqrt_t;
        let d2 = d1 - vol_sqrt_t;
        // clamp tiny negative round-off from the difference of two products
        (s * norm_cdf(d1) - discounted_strike * norm_cdf(d2)).max(0.0)
    };
    if !price.is_finite() {
        return Err(ModelError::NonFinite {
            location: "bsm_price".into(),
        });
    }
    Ok(T::lit(price))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worthless_underlying() {
        assert_eq!(bsm_price(0.0, 100.0, 1.0, 0.2, 0.05).unwrap(), 0.0);
    }

    #[test]
    fn zero_vol_limit() {
        let c = bsm_price(100.0, 90.0, 1.0, 0.0, 0.05).unwrap();
        let want = 100.0 - 90.0 * (-0.05f64).exp();
        assert!((c - want).abs() < 1e-12);
        assert!((c - 14.389).abs() < 1e-3);
        // vanishing but positive vol converges to the same limit
        let c_small = bsm_price(100.0, 90.0, 1.0, 1e-9, 0.05).unwrap();
        assert!((c_small - want).abs() < 1e-9);
    }

    #[test]
    fn cdf_reference_points() {
        assert_eq!(norm_cdf(0.0), 0.5);
        // Φ(1.959963984540054) = 0.975
        assert!((norm_cdf(1.959963984540054) - 0.975).abs() < 1e-15);
        assert!((norm_cdf(-1.0) - 0.15865525393145707).abs() < 1e-15);
        assert!(norm_cdf(-40.0) >= 0.0 && norm_cdf(-40.0) < 1e-300);
        assert_eq!(norm_cdf(40.0), 1.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(bsm_price(100.0, 0.0, 1.0, 0.2, 0.05).is_err());
        assert!(bsm_price(100.0, 100.0, 0.0, 0.2, 0.05).is_err());
        assert!(bsm_price(-1.0, 100.0, 1.0, 0.2, 0.05).is_err());
        assert!(bsm_price(100.0, 100.0, 1.0, -0.2, 0.05).is_err());
    }
}
