use crate::error::{Error, Result};
use crate::logweight::{log_sum_exp, LogWeight};

/// Hard-rod partition function on `[0, ℓ)` with rod length `σ = 2r`:
/// `Z = Σ_k λ^k max(ℓ - (k-1)σ, 0)^k / k!`.
pub fn tonks_log_z(side_length: f64, r: f64, lambda: f64) -> Result<LogWeight> {
    if !(side_length.is_finite() && side_length > 0.0) {
        return Err(Error::invalid("side_length", format!("must be positive, got {side_length}")));
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::invalid("radius", format!("must be positive, got {r}")));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::invalid("fugacity", format!("must be non-negative, got {lambda}")));
    }
    if lambda == 0.0 {
        return Ok(LogWeight::ONE);
    }
    let sigma = 2.0 * r;
    let ln_lambda = lambda.ln();
    let mut terms = vec![0.0];
    let mut ln_factorial = 0.0;
    let mut k = 1usize;
    loop {
        let free = side_length - (k as f64 - 1.0) * sigma;
        if free <= 0.0 {
            break;
        }
        ln_factorial += (k as f64).ln();
        terms.push(k as f64 * (ln_lambda + free.ln()) - ln_factorial);
        k += 1;
    }
    Ok(LogWeight::from_ln(log_sum_exp(&terms)))
}

/// `E[N] = λ ∂_λ ln Z` by a central difference with relative step `h`.
pub fn tonks_mean_count(side_length: f64, r: f64, lambda: f64, h: f64) -> Result<f64> {
    let step = h * lambda;
    let up = tonks_log_z(side_length, r, lambda + step)?.ln();
    let down = tonks_log_z(side_length, r, lambda - step)?.ln();
    Ok(lambda * (up - down) / (2.0 * step))
}
