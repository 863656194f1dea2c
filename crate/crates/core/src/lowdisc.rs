//! Deterministic low-discrepancy sequences used by the samplers.

pub const GOLDEN_FRAC: f64 = 0.618_033_988_749_894_9;

/// Radical inverse of `i` in base `base`, in [0, 1).
pub fn van_der_corput(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    out
}

/// Fractional part of `i * golden ratio`.
pub fn golden(i: u64) -> f64 {
    (i as f64 * GOLDEN_FRAC).fract()
}

/// The `i`-th of `n` points of a Fibonacci lattice on the unit 2-sphere.
pub fn fibonacci_sphere(i: usize, n: usize) -> [f64; 3] {
    let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
    let r = (1.0 - z * z).max(0.0).sqrt();
    let phi = std::f64::consts::TAU * golden(i as u64);
    [r * phi.cos(), r * phi.sin(), z]
}

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Halton point in [0,1)^dim with a Cranley-Patterson shift.
pub fn halton(i: u64, dim: usize, shift: &[f64]) -> Vec<f64> {
    (0..dim)
        .map(|d| {
            let v = van_der_corput(i + 1, PRIMES[d % PRIMES.len()]) + shift.get(d).copied().unwrap_or(0.0);
            v.fract()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vdc_base2() {
        assert_eq!(van_der_corput(0, 2), 0.0);
        assert_eq!(van_der_corput(1, 2), 0.5);
        assert_eq!(van_der_corput(2, 2), 0.25);
        assert_eq!(van_der_corput(3, 2), 0.75);
    }

    #[test]
    fn fibonacci_points_are_unit() {
        for i in 0..50 {
            let p = fibonacci_sphere(i, 50);
            let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }
}
