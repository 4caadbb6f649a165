//! Branch-cut-aware square roots and order-zero Bessel/Hankel functions of
//! complex argument.
//!
//! Two square-root conventions are needed. The free-space propagation
//! constant `μ = √(k² − ξ²)` uses the principal branch (cut along the negative
//! real axis); the in-slit constants `s_n = √(k² − (πn/h)²)` put the cut on
//! the negative imaginary axis so that they stay holomorphic for `k` in the
//! fourth quadrant.
//!
//! Bessel functions are evaluated by one of three routes depending on `z`:
//!
//! * ascending power series for `|z| ≤ 1`, and for `|z| ≤ 12` when `|Im z|` is
//!   too large for backward recurrence to normalise cleanly;
//! * Miller backward recurrence with the Neumann series for `Y₀` on
//!   `1 < |z| ≤ 25`, `|Im z| ≤ 5`;
//! * the Hankel large-argument expansion everywhere else up to `|z| = 1e4`.
//!
//! Arguments with `Re z < 0` are reduced to `Re z > 0` by reflection.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Largest `|z|` accepted by the Bessel routines.
pub const MAX_BESSEL_ARG: f64 = 1.0e4;

const MILLER_MAX: f64 = 25.0;
const MILLER_MAX_IM: f64 = 5.0;
const SERIES_MAX: f64 = 12.0;

const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn euler_gamma() -> f64 {
    EULER_GAMMA
}

/// Principal square root, `arg w ∈ (−π/2, π/2]`.
///
/// A negative zero imaginary part is treated as `+0`, so `−1 ↦ i` regardless
/// of the sign bit.
pub fn sqrt_principal(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    if x == 0.0 && y == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let r = z.norm();
    if x >= 0.0 {
        let t = ((r + x) * 0.5).sqrt();
        Complex64::new(t, y / (2.0 * t))
    } else {
        let t = ((r - x) * 0.5).sqrt();
        // y == -0.0 lands on the upper side of the cut
        let s = if y < 0.0 { -t } else { t };
        Complex64::new(y / (2.0 * s), s)
    }
}

/// Square root with the cut on the negative imaginary axis:
/// `arg z ∈ (−π/2, 3π/2]`, hence `arg w ∈ (−π/4, 3π/4]`.
pub fn sqrt_negim(z: Complex64) -> Complex64 {
    let w = sqrt_principal(z);
    let third_quadrant = z.re < 0.0 && z.im < 0.0;
    let on_cut = z.re == 0.0 && z.im < 0.0;
    if third_quadrant || on_cut {
        -w
    } else {
        w
    }
}

fn check_arg(z: Complex64) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite argument {z}")));
    }
    if z.norm() > MAX_BESSEL_ARG {
        return Err(Error::OutOfRange(format!(
            "|z| = {:.3e} exceeds {MAX_BESSEL_ARG:e}",
            z.norm()
        )));
    }
    Ok(())
}

/// Bessel function of the first kind, order zero.
pub fn bessel_j0(z: Complex64) -> Result<Complex64> {
    check_arg(z)?;
    // J₀ is even
    let w = if z.re < 0.0 { -z } else { z };
    Ok(j0_y0_right(w, false).0)
}

/// Bessel function of the second kind, order zero (principal branch, cut on
/// the negative real axis).
pub fn bessel_y0(z: Complex64) -> Result<Complex64> {
    check_arg(z)?;
    if z.re == 0.0 && z.im == 0.0 {
        return Err(Error::SingularPoint);
    }
    if z.re >= 0.0 {
        return Ok(j0_y0_right(z, true).1);
    }
    // Y₀(w e^{±iπ}) = Y₀(w) ± 2i J₀(w)
    let w = -z;
    let (j, y) = j0_y0_right(w, true);
    let sign = if z.im < 0.0 { -1.0 } else { 1.0 };
    Ok(y + 2.0 * sign * I * j)
}

/// Hankel function of the first kind, order zero.
///
/// For `Re z ≥ 0` this is `J₀ + iY₀`. For `Re z < 0` the value is the analytic
/// continuation through the upper half plane,
/// `H₀⁽¹⁾(e^{iπ} w) = −H₀⁽²⁾(w) = −(J₀(w) − iY₀(w))` with `w = −z`, so that
/// `H₀⁽¹⁾(−x) = −conj(H₀⁽¹⁾(x))` for real `x > 0`.
pub fn hankel1_0(z: Complex64) -> Result<Complex64> {
    check_arg(z)?;
    if z.re == 0.0 && z.im == 0.0 {
        return Err(Error::SingularPoint);
    }
    if z.re >= 0.0 {
        Ok(hankel_pair_right(z).0)
    } else {
        Ok(-hankel_pair_right(-z).1)
    }
}

/// `(H₀⁽¹⁾(z), H₀⁽²⁾(z))` for `Re z ≥ 0`.
fn hankel_pair_right(z: Complex64) -> (Complex64, Complex64) {
    if use_asymptotic(z) {
        hankel_asymptotic(z)
    } else {
        let (j, y) = j0_y0_right(z, true);
        (j + I * y, j - I * y)
    }
}

fn use_asymptotic(z: Complex64) -> bool {
    let r = z.norm();
    r > MILLER_MAX || (r > SERIES_MAX && z.im.abs() > MILLER_MAX_IM)
}

/// `(J₀(z), Y₀(z))` for `Re z ≥ 0`. `Y₀` is only computed when asked for.
fn j0_y0_right(z: Complex64, want_y: bool) -> (Complex64, Complex64) {
    let r = z.norm();
    if r <= 1.0 || (r <= SERIES_MAX && z.im.abs() > MILLER_MAX_IM) {
        power_series(z, want_y)
    } else if use_asymptotic(z) {
        let (h1, h2) = hankel_asymptotic(z);
        ((h1 + h2) * 0.5, (h1 - h2) / (2.0 * I))
    } else {
        miller(z)
    }
}

/// Ascending series:
/// `J₀ = Σ (−z²/4)^k/(k!)²`,
/// `Y₀ = (2/π)(log(z/2) + γ)J₀ + (2/π) Σ_{k≥1} (−1)^{k+1} H_k (z²/4)^k/(k!)²`.
pub(crate) fn power_series(z: Complex64, want_y: bool) -> (Complex64, Complex64) {
    let q = z * z * 0.25;
    let mut term = Complex64::new(1.0, 0.0);
    let mut j0 = term;
    let mut ysum = Complex64::new(0.0, 0.0);
    let mut harmonic = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= -q / (kf * kf);
        harmonic += 1.0 / kf;
        j0 += term;
        // (−1)^{k+1}(z²/4)^k/(k!)² = −term
        let yterm = -term * harmonic;
        ysum += yterm;
        if term.norm() <= 1e-17 * j0.norm().max(1e-300)
            && yterm.norm() <= 1e-17 * ysum.norm().max(1e-300)
        {
            break;
        }
    }
    if !want_y {
        return (j0, Complex64::new(0.0, 0.0));
    }
    let log_term = (z * 0.5).ln() + EULER_GAMMA;
    let y0 = (2.0 / PI) * (log_term * j0 + ysum);
    (j0, y0)
}

/// Miller backward recurrence normalised by `1 = J₀ + 2 Σ J_{2k}`, with
/// `Y₀ = (2/π)(log(z/2) + γ)J₀ − (4/π) Σ_{k≥1} (−1)^k J_{2k}/k`.
pub(crate) fn miller(z: Complex64) -> (Complex64, Complex64) {
    let r = z.norm();
    let mut n_start = (1.5 * r + 30.0).ceil() as usize;
    if n_start % 2 == 1 {
        n_start += 1;
    }
    let two_over_z = 2.0 / z;
    let mut j_next = Complex64::new(0.0, 0.0); // J_{n+1}
    let mut j_cur = Complex64::new(1e-30, 0.0); // J_n
    let mut norm_sum = Complex64::new(0.0, 0.0); // Σ_{k≥1} J_{2k}
    let mut neumann = Complex64::new(0.0, 0.0); // Σ_{k≥1} (−1)^k J_{2k}/k
    let mut n = n_start;
    loop {
        if n % 2 == 0 && n > 0 {
            let k = (n / 2) as f64;
            norm_sum += j_cur;
            let sign = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
            neumann += j_cur * (sign / k);
        }
        if n == 0 {
            break;
        }
        let j_prev = two_over_z * (n as f64) * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        n -= 1;
        if j_cur.norm() > 1e250 {
            j_cur *= 1e-250;
            j_next *= 1e-250;
            norm_sum *= 1e-250;
            neumann *= 1e-250;
        }
    }
    let scale = j_cur + 2.0 * norm_sum;
    let j0 = j_cur / scale;
    let neumann = neumann / scale;
    let y0 = (2.0 / PI) * (((z * 0.5).ln() + EULER_GAMMA) * j0 - 2.0 * neumann);
    (j0, y0)
}

/// Hankel expansions
/// `H₀⁽¹,²⁾(z) ~ √(2/(πz)) e^{±i(z − π/4)} Σ (±i)^k a_k z^{−k}` with
/// `a_k = −a_{k−1} (2k − 1)²/(8k)`, summed until the terms stop decreasing.
pub(crate) fn hankel_asymptotic(z: Complex64) -> (Complex64, Complex64) {
    let inv = 1.0 / z;
    let mut a = 1.0;
    let mut pow = Complex64::new(1.0, 0.0);
    let mut s1 = Complex64::new(1.0, 0.0);
    let mut s2 = Complex64::new(1.0, 0.0);
    let mut last = f64::INFINITY;
    let mut ik = Complex64::new(1.0, 0.0);
    for k in 1..200 {
        let kf = k as f64;
        a *= -(2.0 * kf - 1.0).powi(2) / (8.0 * kf);
        pow *= inv;
        ik *= I;
        let t = pow * a;
        let mag = t.norm();
        if mag >= last {
            break;
        }
        last = mag;
        s1 += ik * t;
        s2 += ik.conj() * t;
        if mag < 1e-17 {
            break;
        }
    }
    let pre = sqrt_principal(2.0 / (PI * z));
    let phase = z - FRAC_PI_4;
    let e1 = (I * phase).exp();
    let e2 = (-I * phase).exp();
    (pre * e1 * s1, pre * e2 * s2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sqrt_examples() {
        assert_eq!(sqrt_principal(c(4.0, 0.0)), c(2.0, 0.0));
        let w = sqrt_principal(c(-1.0, 0.0));
        assert!((w - c(0.0, 1.0)).norm() < 1e-15);
        let w = sqrt_principal(c(-1.0, -0.0));
        assert!((w - c(0.0, 1.0)).norm() < 1e-15);
        let w = sqrt_principal(c(0.0, -2.0));
        assert!((w - c(1.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn sqrt_negim_examples() {
        let k = c(3.0, -0.05);
        assert!((sqrt_negim(k * k) - k).norm() < 1e-14);
        let w = sqrt_negim(c(-9.0, 0.0));
        assert!((w - c(0.0, 3.0)).norm() < 1e-15);
        assert_eq!(sqrt_negim(c(4.0, 0.0)), c(2.0, 0.0));
        // large negative real part with small negative imaginary part
        let w = sqrt_negim(c(-1.0e6, -1.0e-3));
        assert!(w.im > 0.0);
    }

    #[test]
    fn sqrt_negim_continuity() {
        for &r in &[0.5, 2.0, 100.0] {
            let mut prev = f64::INFINITY;
            for p in 3..12 {
                let d = 10f64.powi(-p);
                let a = sqrt_negim(c(-r, d));
                let b = sqrt_negim(c(-r, -d));
                let gap = (a - b).norm();
                assert!(gap <= prev);
                prev = gap;
            }
            assert!(prev < 1e-10);
            // jumps across the negative imaginary axis
            let a = sqrt_negim(c(1e-12, -r));
            let b = sqrt_negim(c(-1e-12, -r));
            assert!((a - b).norm() > r.sqrt());
        }
    }

    #[test]
    fn euler_gamma_bracket() {
        assert!(euler_gamma() > 0.577 && euler_gamma() < 0.578);
        let v = EULER_GAMMA - 2f64.ln() - 1.5;
        assert!((v + 1.615_931_5).abs() < 1e-7);
    }

    #[test]
    fn j0_zero_and_origin() {
        assert_eq!(bessel_j0(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        let j = bessel_j0(c(2.404_825_557_695_773, 0.0)).unwrap();
        assert!(j.norm() < 1e-14);
    }

    #[test]
    fn routes_agree() {
        // series vs recurrence
        for &r in &[1.5, 3.0, 6.0, 8.0] {
            for &t in &[0.0, 0.3, -0.4, 1.2] {
                let z = Complex64::from_polar(r, t);
                let (js, ys) = power_series(z, true);
                let (jm, ym) = miller(z);
                let scale = 1.0 + js.norm() + ys.norm();
                assert!((js - jm).norm() < 2e-13 * scale, "J at {z}");
                assert!((ys - ym).norm() < 2e-13 * scale, "Y at {z}");
            }
        }
        // recurrence vs asymptotic across the crossover band
        for i in 0..=10 {
            let r = 22.0 + i as f64;
            for &im in &[0.0, -0.3, 0.7] {
                let z = c(r, im);
                let (jm, ym) = miller(z);
                let (h1, h2) = hankel_asymptotic(z);
                let ja = (h1 + h2) * 0.5;
                let ya = (h1 - h2) / (2.0 * I);
                assert!((jm - ja).norm() < 1e-13, "J at {z}");
                assert!((ym - ya).norm() < 1e-13, "Y at {z}");
            }
        }
    }

    #[test]
    fn y0_small_argument_log() {
        let mut prev = f64::INFINITY;
        for p in 2..8 {
            let x = 10f64.powi(-p);
            let y = bessel_y0(c(x, 0.0)).unwrap();
            let d = (y.re - (2.0 / PI) * ((x / 2.0).ln() + EULER_GAMMA)).abs();
            assert!(d < prev);
            prev = d;
        }
        assert!(prev < 1e-12);
        assert_eq!(bessel_y0(c(0.0, 0.0)), Err(Error::SingularPoint));
    }

    #[test]
    fn hankel_reflection() {
        for &x in &[0.3, 2.0 * PI, 11.0, 30.0, 400.0] {
            let a = hankel1_0(c(x, 0.0)).unwrap();
            let b = hankel1_0(c(-x, 0.0)).unwrap();
            assert!((b + a.conj()).norm() < 1e-12 * a.norm().max(1.0));
        }
    }

    #[test]
    fn hankel_decay() {
        let mut prev = f64::INFINITY;
        for i in 0..=45 {
            let x = 5.0 + i as f64;
            let m = hankel1_0(c(x, 0.0)).unwrap().norm();
            assert!(m < prev);
            prev = m;
        }
    }

    #[test]
    fn range_errors() {
        assert!(matches!(
            bessel_j0(c(2e4, 0.0)),
            Err(Error::OutOfRange(_))
        ));
        assert_eq!(hankel1_0(c(0.0, 0.0)), Err(Error::SingularPoint));
    }
}
