//! Special functions needed by the window formulas and group-delay closed forms.

/// Modified Bessel function of the first kind, order zero.
///
/// Power series `sum (x^2/4)^m / (m!)^2`, summed until the next term drops
/// below `1e-16` of the partial sum. Converges for every finite `x`.
pub fn bessel_i0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut m = 1.0;
    loop {
        term *= q / (m * m);
        sum += term;
        if term < 1e-16 * sum {
            return sum;
        }
        m += 1.0;
    }
}

/// Error function (musl port).
pub use libm::erf;
