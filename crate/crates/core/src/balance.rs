//! Exponent arithmetic for choosing thresholds.
//!
//! With `T_x = N^{t_x}`, `t1 = 1 - t2/2` and `t3 = t2`, an update or query costs
//! about `N^{max(2 - 2t1, t2, t3)}` and a rebuild, spread over `T2` operations, about
//! `N^{(1 - t3)(8/5 + s + ω(s)/5) - 6t2/5}` with `s = (1 - t2/2)/(1 - t2)`.

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("t2 = {0} must lie strictly between 0 and 1")]
pub struct BalanceError(pub f64);

/// The exponent pair `(per_operation, rebuild)` for a given `t2`.
pub fn balance_exponents(t2: f64, omega: fn(f64) -> f64) -> Result<(f64, f64), BalanceError> {
    if !(t2 > 0.0 && t2 < 1.0) {
        return Err(BalanceError(t2));
    }
    let t1 = 1.0 - 0.5 * t2;
    let t3 = t2;
    let s = (1.0 - 0.5 * t2) / (1.0 - t2);
    let per_op = (2.0 - 2.0 * t1).max(t2).max(t3);
    let rebuild = (1.0 - t3) * (8.0 / 5.0 + s + omega(s) / 5.0) - 1.2 * t2;
    Ok((per_op, rebuild))
}

/// The ratio `s` at which the rebuild matrices are multiplied.
pub fn rebuild_ratio(t2: f64) -> f64 {
    (1.0 - 0.5 * t2) / (1.0 - t2)
}
