//! Rectangular matrix multiplication exponents `ω(s)`: multiplying an `n × n^s` by an
//! `n^s × n` matrix costs `n^{ω(s)}`. They only tune block widths and the balance
//! calculator; no structure relies on them for correctness.

/// Known upper bounds `(s, ω(s))`.
pub const KNOWN_BOUNDS: [(f64, f64); 2] = [(1.75, 3.021591), (2.0, 3.251640)];

/// The linear bound `0.920196·s + 1.41125`, valid on `[1.75, 2]`.
pub fn linear_bound(s: f64) -> f64 {
    0.920196 * s + 1.41125
}

/// Convex interpolation between the two known bounds (valid on `[1.75, 2]`).
pub fn interpolated(s: f64) -> f64 {
    let [(p, wp), (q, wq)] = KNOWN_BOUNDS;
    (s - p) / (q - p) * wq + (q - s) / (q - p) * wp
}

/// Schoolbook exponent `s + 2`.
pub fn naive(s: f64) -> f64 {
    s + 2.0
}

/// [`linear_bound`] on `[1.75, 2]`; elsewhere a crude `1.2·max(2, s+1)` kept inside
/// the trivial range `[2, s+2]`.
pub fn default_omega(s: f64) -> f64 {
    if (1.75..=2.0).contains(&s) {
        linear_bound(s)
    } else {
        let lo = 2.0;
        let hi = (s + 2.0).max(lo);
        (1.2 * (s + 1.0).max(2.0)).clamp(lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_hits_the_known_points() {
        for (s, w) in KNOWN_BOUNDS {
            assert!((interpolated(s) - w).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_bound_dominates_interpolation() {
        for x in 0..=100 {
            let s = 1.75 + 0.25 * f64::from(x) / 100.0;
            assert!(linear_bound(s) >= interpolated(s) - 1e-9);
        }
    }

    #[test]
    fn default_stays_in_trivial_range() {
        for x in 0..400 {
            let s = f64::from(x) / 100.0;
            let w = default_omega(s);
            assert!(w >= 2.0 && w <= s + 2.0 + 1e-12, "s={s} w={w}");
        }
    }
}
