//! Closed-form roots of low-degree complex polynomials.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Square root on the branch `sqrt(rho) e^{i theta / 2}` with `theta` in `(-pi, pi]`.
///
/// The cut lies on the negative real axis and `theta = pi` belongs to the
/// branch, so any `z` with zero imaginary part (of either sign) and negative
/// real part maps to the positive imaginary axis. The result always has a
/// non-negative real part.
pub fn principal_sqrt(z: Complex64) -> Complex64 {
    if z.im == 0.0 {
        return if z.re >= 0.0 {
            Complex64::new(z.re.sqrt(), 0.0)
        } else {
            Complex64::new(0.0, (-z.re).sqrt())
        };
    }
    let r = z.norm();
    if z.re >= 0.0 {
        let t = ((r + z.re) / 2.0).sqrt();
        Complex64::new(t, z.im / (2.0 * t))
    } else {
        let t = ((r - z.re) / 2.0).sqrt();
        Complex64::new(z.im.abs() / (2.0 * t), t.copysign(z.im))
    }
}

/// Cube root `|z|^{1/3} e^{i theta / 3}` with `theta` in `(-pi, pi]`.
pub(crate) fn principal_cbrt(z: Complex64) -> Complex64 {
    if z.im == 0.0 && z.re >= 0.0 {
        return Complex64::new(z.re.cbrt(), 0.0);
    }
    let theta = if z.im == 0.0 { PI } else { z.im.atan2(z.re) };
    Complex64::from_polar(z.norm().cbrt(), theta / 3.0)
}

/// Evaluates the monic cubic `x^3 + c[2] x^2 + c[1] x + c[0]` and its derivative.
pub(crate) fn monic_cubic(c: &[Complex64; 3], x: Complex64) -> (Complex64, Complex64) {
    let value = ((x + c[2]) * x + c[1]) * x + c[0];
    let slope = (3.0 * x + 2.0 * c[2]) * x + c[1];
    (value, slope)
}

/// Scale `s` such that the cubic's terms are of order `s^3`.
pub(crate) fn cubic_scale(c: &[Complex64; 3]) -> f64 {
    1.0f64.max(c[2].norm()).max(c[1].norm().sqrt()).max(c[0].norm().cbrt())
}

/// Roots of `x^3 + c[2] x^2 + c[1] x + c[0]` by Cardano's formula.
pub(crate) fn cardano(c: &[Complex64; 3]) -> [Complex64; 3] {
    let shift = c[2] / 3.0;
    let p = c[1] - c[2] * c[2] / 3.0;
    let q = 2.0 * c[2] * c[2] * c[2] / 27.0 - c[2] * c[1] / 3.0 + c[0];
    let zero = Complex64::new(0.0, 0.0);
    if p == zero && q == zero {
        return [-shift; 3];
    }
    let disc = q * q / 4.0 + p * p * p / 27.0;
    let root = principal_sqrt(disc);
    // larger of the two candidates avoids cancellation
    let w1 = -q / 2.0 + root;
    let w2 = -q / 2.0 - root;
    let w = if w1.norm() >= w2.norm() { w1 } else { w2 };
    let u = principal_cbrt(w);
    let v = if u == zero { zero } else { -p / (3.0 * u) };
    let omega = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
    let omega2 = omega.conj();
    [
        u + v - shift,
        u * omega + v * omega2 - shift,
        u * omega2 + v * omega - shift,
    ]
}

/// One guarded Newton step on the cubic; the step is kept only if it lowers
/// the residual.
pub(crate) fn newton_polish(c: &[Complex64; 3], x: Complex64) -> Complex64 {
    let (f, df) = monic_cubic(c, x);
    if df.norm() == 0.0 || f.norm() == 0.0 {
        return x;
    }
    let candidate = x - f / df;
    if !candidate.re.is_finite() || !candidate.im.is_finite() {
        return x;
    }
    if monic_cubic(c, candidate).0.norm() < f.norm() {
        candidate
    } else {
        x
    }
}
