//! Sommerfeld kernels `d_mn`, the scaled coupling coefficients `c_mn`, and the
//! constants `C₀`, `C₀^∓` that govern their small-`ε` behaviour.
//!
//! Everything is written in terms of `ε = kh` with the slab thickness
//! normalised to one. Single-slit kernels use the real-axis split of the
//! Sommerfeld path (`ξ = sin φ` on the propagating leg, `t = sinh ψ` on the
//! evanescent one). Cross-slit kernels are evaluated on the branch-cut
//! contour `ζ = 1 + iu²` attached to `ξ = k`, which is where the path ends up
//! after closing it in the upper half plane for `D > 0`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_real};
use crate::specfun::{hankel1_0, sqrt_negim, sqrt_principal, EULER_GAMMA};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest mode index accepted by the kernel routines.
pub const MAX_MODE_INDEX: usize = 10_000;

/// Largest `|ε|` for which the asymptotic backend is considered valid.
pub const MAX_ASYM_EPS: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Asymptotic,
    Quadrature,
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "asymptotic" | "asym" => Ok(Backend::Asymptotic),
            "quadrature" | "quad" => Ok(Backend::Quadrature),
            other => Err(Error::InvalidArgument(format!("unknown backend '{other}'"))),
        }
    }
}

/// Symmetry of the field about the mid-plane of the slab. It selects the
/// `(e^{is_m} ∓ 1)/(e^{is_n} ± 1)` prefactors in `c_mn`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// Fabry–Pérot index `m` resonates in the even system when odd and in the
    /// odd system when even.
    pub fn of_fp_index(m: usize) -> Parity {
        if m % 2 == 1 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// One kernel or coefficient evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub m: usize,
    pub n: usize,
    pub value: Complex64,
    pub backend: Backend,
    /// Absolute error bound (quadrature) or remainder size (asymptotic).
    pub accuracy_estimate: f64,
}

/// Tolerances for the quadrature backend.
///
/// `tail_cut` is measured in units of `|ε|·t`: the evanescent leg is
/// integrated up to `t = tail_cut/|ε|` and the remaining tail is bounded in
/// closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub tail_cut: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-11,
            abs_tol: 1e-14,
            tail_cut: 1e15,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        if !(self.tail_cut >= 10.0) {
            return Err(Error::InvalidArgument("tail_cut must be at least 10".into()));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidArgument("max_subdivisions must be positive".into()));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// C₀ constants

fn check_b(b: f64) -> Result<()> {
    if !(b >= PI) || !b.is_finite() {
        return Err(Error::OutOfRange(format!("b = {b} must be ≥ π")));
    }
    Ok(())
}

const C0_REL: f64 = 1e-13;
const C0_ABS: f64 = 1e-17;

/// `C₀(b) = ∫₀^∞ (1 − e^{−t})/(t(t² + b²)) dt`, `b ≥ π`.
pub fn c0(b: f64) -> Result<f64> {
    check_b(b)?;
    let head = |t: f64| {
        let g = if t < 1e-8 { 1.0 - 0.5 * t } else { -(-t).exp_m1() / t };
        g / (t * t + b * b)
    };
    // t = b/s on [b, ∞)
    let tail = |s: f64| {
        if s == 0.0 {
            return 0.0;
        }
        -(-b / s).exp_m1() * s / (b * b * (1.0 + s * s))
    };
    let (v1, _) = integrate_real(head, 0.0, b, C0_REL, C0_ABS, 500)?;
    let (v2, _) = integrate_real(tail, 0.0, 1.0, C0_REL, C0_ABS, 500)?;
    Ok(v1 + v2)
}

fn c0_pm(b: f64, b2: f64, sign: f64) -> Result<f64> {
    check_b(b)?;
    check_b(b2)?;
    let bb = b.max(b2);
    let head = |t: f64| t * (1.0 + sign * (-t).exp()) / ((t * t + b * b) * (t * t + b2 * b2));
    let tail = |s: f64| {
        if s == 0.0 {
            return 0.0;
        }
        bb * bb * s * (1.0 + sign * (-bb / s).exp())
            / ((bb * bb + b * b * s * s) * (bb * bb + b2 * b2 * s * s))
    };
    let (v1, _) = integrate_real(head, 0.0, bb, C0_REL, C0_ABS, 500)?;
    let (v2, _) = integrate_real(tail, 0.0, 1.0, C0_REL, C0_ABS, 500)?;
    Ok(v1 + v2)
}

/// `C₀^−(b, b′) = ∫₀^∞ t(1 − e^{−t})/((t² + b²)(t² + b′²)) dt`.
pub fn c0_minus(b: f64, b2: f64) -> Result<f64> {
    c0_pm(b, b2, -1.0)
}

/// `C₀^+(b, b′) = ∫₀^∞ t(1 + e^{−t})/((t² + b²)(t² + b′²)) dt`.
pub fn c0_plus(b: f64, b2: f64) -> Result<f64> {
    c0_pm(b, b2, 1.0)
}

/// `(log b − log b′)/(b² − b′²)`, with the limit `1/(2b²)` at `b = b′`.
pub fn log_ratio_bound(b: f64, b2: f64) -> f64 {
    if (b - b2).abs() <= 1e-12 * b.max(b2) {
        0.5 / (b * b)
    } else {
        (b.ln() - b2.ln()) / (b * b - b2 * b2)
    }
}

// ---------------------------------------------------------------------------
// single-slit kernels

fn check_indices(m: usize, n: usize) -> Result<()> {
    if m > MAX_MODE_INDEX || n > MAX_MODE_INDEX {
        return Err(Error::OutOfRange(format!(
            "mode indices ({m}, {n}) exceed {MAX_MODE_INDEX}"
        )));
    }
    Ok(())
}

fn check_k(k: Complex64, h: f64) -> Result<Complex64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("slit width h = {h} must be positive")));
    }
    if !(k.re > 0.0 && k.re.is_finite() && k.im.is_finite()) {
        return Err(Error::InvalidArgument(format!("k = {k} must have Re k > 0")));
    }
    Ok(k * h)
}

fn sign(p: usize) -> f64 {
    if p % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Small-`ε` expansions of `d_mn`.
pub fn d_single_asym(k: Complex64, h: f64, m: usize, n: usize) -> Result<KernelValue> {
    check_indices(m, n)?;
    let eps = check_k(k, h)?;
    if eps.norm() > MAX_ASYM_EPS {
        return Err(Error::OutOfRange(format!(
            "|ε| = {:.3} exceeds {MAX_ASYM_EPS}",
            eps.norm()
        )));
    }
    let e2 = eps.norm_sqr();
    let log_eps = eps.ln().norm();
    let mk = |value, acc| KernelValue {
        m,
        n,
        value,
        backend: Backend::Asymptotic,
        accuracy_estimate: acc,
    };
    if (m + n) % 2 == 1 {
        return Ok(mk(ZERO, 0.0));
    }
    if m == 0 && n == 0 {
        let v = Complex64::new(FRAC_PI_4, 0.5 * (EULER_GAMMA - 2f64.ln() - 1.5)) + 0.5 * I * eps.ln();
        return Ok(mk(v, e2 * log_eps));
    }
    if m == 0 || n == 0 {
        let p = m.max(n);
        let v = I * sign(p / 2) * c0(PI * p as f64)?;
        return Ok(mk(v, e2 * log_eps / (p * p) as f64));
    }
    let (bm, bn) = (PI * m as f64, PI * n as f64);
    let weight = log_ratio_bound(m as f64, n as f64);
    let s = sign(m.abs_diff(n) / 2);
    let (c, acc) = if m % 2 == 0 {
        (c0_minus(bm, bn)?, e2 * weight)
    } else {
        (c0_plus(bm, bn)?, e2 * log_eps * weight)
    };
    let mut v = I * s * c;
    if m == n {
        v -= I / (4.0 * m as f64);
    }
    Ok(mk(v, acc))
}

/// `(1 + iz − e^{iz})/z²`, with its Taylor series near the origin.
fn g00(z: Complex64) -> Complex64 {
    if z.norm() < 0.5 {
        // −Σ_{k≥2} (iz)^k/(k! z²)
        let iz = I * z;
        let mut term = Complex64::new(-0.5, 0.0) * I * I; // k = 2
        let mut sum = term;
        for k in 3..30 {
            term *= iz / k as f64;
            sum += term;
            if term.norm() < 1e-18 {
                break;
            }
        }
        sum
    } else {
        (1.0 + I * z - (I * z).exp()) / (z * z)
    }
}

/// `(1 − e^{−w} − w)/w²`, with its Taylor series near the origin.
fn q00(w: Complex64) -> Complex64 {
    if w.norm() < 0.5 {
        // −Σ_{k≥2} (−w)^k/(k! w²)
        let mut term = Complex64::new(-0.5, 0.0);
        let mut sum = term;
        for k in 3..30 {
            term *= -w / k as f64;
            sum += term;
            if term.norm() < 1e-18 {
                break;
            }
        }
        sum
    } else {
        (1.0 - (-w).exp() - w) / (w * w)
    }
}

/// `d_mn` by quadrature on the real-axis split of the Sommerfeld path.
pub fn d_single_quad(
    k: Complex64,
    h: f64,
    m: usize,
    n: usize,
    cfg: &QuadratureConfig,
) -> Result<KernelValue> {
    check_indices(m, n)?;
    cfg.validate()?;
    if (m + n) % 2 == 1 {
        return Err(Error::InvalidArgument(format!(
            "m + n = {} is odd; the kernel vanishes identically",
            m + n
        )));
    }
    let eps = check_k(k, h)?;
    let ae = eps.norm();
    let psi_max = (cfg.tail_cut / ae).asinh();
    let quad = |f: &dyn Fn(f64) -> Complex64, a: f64, b: f64| {
        integrate(f, a, b, cfg.rel_tol, cfg.abs_tol, cfg.max_subdivisions)
    };

    let (value, err, tail) = if m == 0 && n == 0 {
        let b = quad(&|phi: f64| g00(eps * phi.sin()), 0.0, FRAC_PI_2)?;
        let a = quad(&|psi: f64| q00(eps * psi.sinh()), 0.0, psi_max)?;
        (b.value + I * a.value, b.error + a.error, 2.0 / cfg.tail_cut)
    } else {
        let pm2 = (PI * m as f64).powi(2);
        let pn2 = (PI * n as f64).powi(2);
        let sm = sign(m);
        let r = |x2: Complex64| {
            if m == 0 || n == 0 {
                1.0 / (x2 - pm2.max(pn2))
            } else {
                x2 / ((x2 - pm2) * (x2 - pn2))
            }
        };
        let rp = |y2: Complex64| {
            if m == 0 || n == 0 {
                1.0 / (y2 + pm2.max(pn2))
            } else {
                y2 / ((y2 + pm2) * (y2 + pn2))
            }
        };
        let b = quad(
            &|phi: f64| {
                let x = eps * phi.sin();
                r(x * x) * (1.0 - sm * (I * x).exp())
            },
            0.0,
            FRAC_PI_2,
        )?;
        let a = quad(
            &|psi: f64| {
                let y = eps * psi.sinh();
                rp(y * y) * (1.0 - sm * (-y).exp())
            },
            0.0,
            psi_max,
        )?;
        let mut v = sign(m.abs_diff(n) / 2) * (b.value + I * a.value);
        if m == n {
            v -= I * PI / (4.0 * sqrt_principal(Complex64::new(pm2, 0.0) - eps * eps));
        }
        (v, b.error + a.error, 2.0 / (cfg.tail_cut * cfg.tail_cut))
    };
    Ok(KernelValue {
        m,
        n,
        value,
        backend: Backend::Quadrature,
        accuracy_estimate: err + tail,
    })
}

// ---------------------------------------------------------------------------
// cross-slit kernels

fn check_cross(k: Complex64, h: f64, d: f64) -> Result<Complex64> {
    let eps = check_k(k, h)?;
    if !(d.abs() > h) || !d.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "slit separation |D| = {} must exceed h = {h}",
            d.abs()
        )));
    }
    Ok(eps)
}

/// `d₀₀(D) = (π/4)∫₀¹ (1 − τ)[H₀⁽¹⁾(k|D| + ετ) + H₀⁽¹⁾(k|D| − ετ)] dτ`.
///
/// The kernel is even in `D`.
pub fn d_cross_00(k: Complex64, h: f64, d: f64, cfg: &QuadratureConfig) -> Result<KernelValue> {
    cfg.validate()?;
    let eps = check_cross(k, h, d)?;
    let kd = k * d.abs();
    let f = |tau: f64| {
        let a = hankel1_0(kd + eps * tau).unwrap_or(ZERO);
        let b = hankel1_0(kd - eps * tau).unwrap_or(ZERO);
        (1.0 - tau) * (a + b)
    };
    // surface range errors before integrating
    hankel1_0(kd + eps)?;
    hankel1_0(kd - eps)?;
    let r = integrate(f, 0.0, 1.0, cfg.rel_tol, cfg.abs_tol, cfg.max_subdivisions)?;
    Ok(KernelValue {
        m: 0,
        n: 0,
        value: FRAC_PI_4 * r.value,
        backend: Backend::Quadrature,
        accuracy_estimate: FRAC_PI_4 * r.error,
    })
}

/// `d_mn(D)` for arbitrary indices by integration along the branch cut
/// `ζ = 1 + iu²` (`ξ = kζ`):
///
/// `d_mn(D) = −4i ∫₀^∞ g_m(εζ) g_n(εζ) e^{ikDζ} / √(u² − 2i) du`
///
/// with `g₀(x) = sin(x/2)/x`, `g_m(x) = x sin(x/2 + mπ/2)/(x² − π²m²)`.
/// Negative separations use `d_mn(−D) = (−1)^{m+n} d_mn(D)`.
pub fn d_cross_general(
    k: Complex64,
    h: f64,
    m: usize,
    n: usize,
    d: f64,
    cfg: &QuadratureConfig,
) -> Result<KernelValue> {
    check_indices(m, n)?;
    cfg.validate()?;
    let eps = check_cross(k, h, d)?;
    let kappa = k * d.abs();
    let rate = kappa.re - eps.re;
    if !(rate > 0.0) {
        return Err(Error::InvalidArgument(
            "branch-cut integrand does not decay for this separation".into(),
        ));
    }
    let u_max = (46.0 / rate).sqrt();
    let rational = |x: Complex64, j: usize| {
        if j == 0 {
            1.0 / x
        } else {
            x / (x * x - (PI * j as f64).powi(2))
        }
    };
    let phase_m = FRAC_PI_2 * m as f64;
    let phase_n = FRAC_PI_2 * n as f64;
    let f = |u: f64| {
        let zeta = Complex64::new(1.0, u * u);
        let x = eps * zeta;
        let a = x * 0.5 + phase_m;
        let b = x * 0.5 + phase_n;
        let base = I * kappa * zeta;
        // sin a · sin b · e^{base} expanded into exponentials
        let mut s = ZERO;
        for (sa, sb) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            s += sa * sb * (base + I * (sa * a + sb * b)).exp();
        }
        let prod = -0.25 * s;
        rational(x, m) * rational(x, n) * prod / sqrt_principal(Complex64::new(u * u, -2.0))
    };
    let r = integrate(f, 0.0, u_max, cfg.rel_tol, cfg.abs_tol, cfg.max_subdivisions)?;
    let mut value = -4.0 * I * r.value;
    if d < 0.0 {
        value *= sign(m + n);
    }
    Ok(KernelValue {
        m,
        n,
        value,
        backend: Backend::Quadrature,
        accuracy_estimate: 4.0 * r.error,
    })
}

/// Leading-order cross kernel: `(π/4)H₀⁽¹⁾(k|D|)` for `(0, 0)` and zero
/// otherwise, with the `O(ε²)` remainder as accuracy estimate.
pub fn d_cross_asym(k: Complex64, h: f64, m: usize, n: usize, d: f64) -> Result<KernelValue> {
    check_indices(m, n)?;
    let eps = check_cross(k, h, d)?;
    let e2 = eps.norm_sqr();
    let (value, acc) = if m == 0 && n == 0 {
        (FRAC_PI_4 * hankel1_0(k * d.abs())?, e2)
    } else {
        let w = (m.max(1) * m.max(1) * n.max(1) * n.max(1)) as f64;
        (ZERO, e2 / w)
    };
    Ok(KernelValue {
        m,
        n,
        value,
        backend: Backend::Asymptotic,
        accuracy_estimate: acc,
    })
}

// ---------------------------------------------------------------------------
// coefficients

/// In-slit propagation constant `s_n = √(k² − (πn/h)²)` (cut on the negative
/// imaginary axis).
pub fn s_n(k: Complex64, h: f64, n: usize) -> Complex64 {
    let q = PI * n as f64 / h;
    sqrt_negim(k * k - q * q)
}

/// Prefactor `c_mn / d_mn` for the given parity (slab thickness 1).
pub fn c_prefactor(k: Complex64, h: f64, m: usize, n: usize, parity: Parity) -> Complex64 {
    let (num_sign, den_sign) = match parity {
        Parity::Even => (-1.0, 1.0),
        Parity::Odd => (1.0, -1.0),
    };
    let sm = s_n(k, h, m);
    let base = 4.0 * sm * h / PI;
    match (m, n) {
        (0, 0) => base,
        (_, 0) => base * ((I * sm).exp() + num_sign) / (m as f64).sqrt(),
        (0, _) => {
            let en = (I * s_n(k, h, n)).exp();
            base * (n as f64).sqrt() / (en + den_sign)
        }
        _ => {
            let en = (I * s_n(k, h, n)).exp();
            base * ((n as f64) / (m as f64)).sqrt() * ((I * sm).exp() + num_sign) / (en + den_sign)
        }
    }
}

/// Single-slit coefficient `c_mn` (or `c_mn^{(o)}` for odd parity).
pub fn c_single(
    k: Complex64,
    h: f64,
    m: usize,
    n: usize,
    parity: Parity,
    backend: Backend,
    cfg: &QuadratureConfig,
) -> Result<KernelValue> {
    if (m + n) % 2 == 1 {
        check_indices(m, n)?;
        check_k(k, h)?;
        return Ok(KernelValue {
            m,
            n,
            value: ZERO,
            backend,
            accuracy_estimate: 0.0,
        });
    }
    let d = match backend {
        Backend::Asymptotic => d_single_asym(k, h, m, n)?,
        Backend::Quadrature => d_single_quad(k, h, m, n, cfg)?,
    };
    Ok(scale(d, c_prefactor(k, h, m, n, parity)))
}

/// Cross-slit coefficient `c_mn(D)`.
#[allow(clippy::too_many_arguments)]
pub fn c_cross(
    k: Complex64,
    h: f64,
    m: usize,
    n: usize,
    d: f64,
    parity: Parity,
    backend: Backend,
    cfg: &QuadratureConfig,
) -> Result<KernelValue> {
    let dv = match backend {
        Backend::Asymptotic => d_cross_asym(k, h, m, n, d)?,
        Backend::Quadrature if m == 0 && n == 0 => d_cross_00(k, h, d, cfg)?,
        Backend::Quadrature => d_cross_general(k, h, m, n, d, cfg)?,
    };
    Ok(scale(dv, c_prefactor(k, h, m, n, parity)))
}

fn scale(mut v: KernelValue, factor: Complex64) -> KernelValue {
    v.value *= factor;
    v.accuracy_estimate *= factor.norm();
    v
}
