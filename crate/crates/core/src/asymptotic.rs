//! Closed-form resonance expansions for a slab pierced by `N` narrow slits.
//!
//! All lengths are in units of the slab thickness, so the Fabry–Pérot
//! frequencies are `k_m = mπ` and `ε_m = k_m h`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{c0, c0_minus, c_single, Backend, Parity, QuadratureConfig, MAX_ASYM_EPS};
use crate::linalg::{eigenvalues, CMatrix};
use crate::specfun::{hankel1_0, EULER_GAMMA};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Slit geometry in units of the slab thickness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlitArray {
    pub h: f64,
    /// Always `1.0`; callers rescale physical lengths before constructing.
    pub l: f64,
    pub centers: Vec<f64>,
}

impl SlitArray {
    pub fn new(h: f64, centers: Vec<f64>) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!("slit width {h} must be positive")));
        }
        if centers.is_empty() {
            return Err(Error::InvalidArgument("at least one slit is required".into()));
        }
        if centers.iter().any(|d| !d.is_finite()) {
            return Err(Error::InvalidArgument("slit centers must be finite".into()));
        }
        for (i, a) in centers.iter().enumerate() {
            for b in &centers[i + 1..] {
                if (a - b).abs() <= 10.0 * h {
                    return Err(Error::InvalidArgument(format!(
                        "slits at {a} and {b} are closer than 10h"
                    )));
                }
            }
        }
        Ok(SlitArray { h, l: 1.0, centers })
    }

    pub fn single(h: f64) -> Result<Self> {
        SlitArray::new(h, vec![0.0])
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }
}

/// `S = {k : Re k > eps0, |k| < radius, arg k ∈ (−π/4, 0]}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchRegion {
    pub eps0: f64,
    pub radius: f64,
}

impl SearchRegion {
    pub fn new(eps0: f64, radius: f64) -> Result<Self> {
        if !(eps0 > 0.0 && eps0 < radius) {
            return Err(Error::InvalidArgument(format!(
                "search region needs 0 < eps0 < radius, got {eps0}, {radius}"
            )));
        }
        Ok(SearchRegion { eps0, radius })
    }

    pub fn contains(&self, k: Complex64) -> bool {
        k.re > self.eps0 && k.norm() < self.radius && k.im <= 0.0 && k.im > -k.re
    }

    /// Nearest point of the closure of `S`, nudged inside.
    pub fn project(&self, k: Complex64) -> Complex64 {
        let mut re = k.re.max(self.eps0 * (1.0 + 1e-12));
        let mut im = k.im.min(0.0).max(-re * (1.0 - 1e-12));
        let r = (re * re + im * im).sqrt();
        let rmax = self.radius * (1.0 - 1e-12);
        if r > rmax {
            re *= rmax / r;
            im *= rmax / r;
        }
        Complex64::new(re, im)
    }
}

impl Default for SearchRegion {
    fn default() -> Self {
        SearchRegion {
            eps0: 0.1,
            radius: 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Asym1,
    Asym3,
    Direct,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Asym1 => "asym1",
            Method::Asym3 => "asym3",
            Method::Direct => "direct",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Order {
    First,
    Third,
}

/// Parity label attached to a resonance. Single slits carry the even/odd
/// label of their governing system; arrays use the unified index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeLabel {
    Even,
    Odd,
    Unified,
}

impl std::fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModeLabel::Even => "even",
            ModeLabel::Odd => "odd",
            ModeLabel::Unified => "unified",
        })
    }
}

impl ModeLabel {
    pub fn for_geometry(geometry: &SlitArray, m: usize) -> ModeLabel {
        if geometry.len() > 1 {
            return ModeLabel::Unified;
        }
        match Parity::of_fp_index(m) {
            Parity::Even => ModeLabel::Even,
            Parity::Odd => ModeLabel::Odd,
        }
    }
}

/// One computed resonance, `k` in units of `1/l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    pub fp_index: usize,
    pub branch: usize,
    pub parity: ModeLabel,
    pub k: Complex64,
    pub method: Method,
    pub error_estimate: f64,
}

impl Resonance {
    /// `Q = −Re k/(2 Im k)`.
    pub fn quality_factor(&self) -> f64 {
        -self.k.re / (2.0 * self.k.im)
    }
}

/// `Δ(ε) = ε + (2i/π)(γ − log 2 − 3/2 + πα/2)ε + (2i/π)ε log ε`.
pub fn delta_fn(eps: Complex64, alpha: f64) -> Complex64 {
    let coef = EULER_GAMMA - 2f64.ln() - 1.5 + 0.5 * PI * alpha;
    eps + (2.0 / PI) * I * coef * eps + (2.0 / PI) * I * eps * eps.ln()
}

/// `α = 1/π − (2/π) log(π/2)`.
pub fn alpha_closed() -> f64 {
    1.0 / PI - (2.0 / PI) * (PI / 2.0).ln()
}

/// Even-mode interaction matrix `P_ij = 8√(ij)(−1)^{i−j} C₀^−(2πi, 2πj)` and
/// vector `v_i = √i (−1)^i C₀(2πi)`, `i, j = 1..M`.
pub fn alpha_operator(modes: usize) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let mut p = DMatrix::zeros(modes, modes);
    let mut v = DVector::zeros(modes);
    for i in 1..=modes {
        let si = if i % 2 == 0 { 1.0 } else { -1.0 };
        v[i - 1] = (i as f64).sqrt() * si * c0(2.0 * PI * i as f64)?;
        for j in i..=modes {
            let s = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            let val = 8.0 * ((i * j) as f64).sqrt() * s * c0_minus(2.0 * PI * i as f64, 2.0 * PI * j as f64)?;
            p[(i - 1, j - 1)] = val;
            p[(j - 1, i - 1)] = val;
        }
    }
    Ok((p, v))
}

/// `(32/π)⟨(2I − P)⁻¹v, v⟩` for the leading `m × m` block of an operator built
/// by [`alpha_operator`].
pub fn alpha_from_operator(p: &DMatrix<f64>, v: &DVector<f64>, m: usize) -> Result<f64> {
    if m < 1 || m > v.len() {
        return Err(Error::InvalidArgument(format!("truncation {m} out of range")));
    }
    let pm = p.view((0, 0), (m, m));
    let vm = v.rows(0, m).into_owned();
    let a = DMatrix::identity(m, m) * 2.0 - pm;
    let x = a.lu().solve(&vm).ok_or(Error::SingularMatrix)?;
    Ok(32.0 / PI * x.dot(&vm))
}

/// Truncated-operator value of `α` with `M` even modes.
pub fn alpha_truncated(modes: usize) -> Result<f64> {
    if modes < 1 {
        return Err(Error::InvalidArgument("at least one mode is required".into()));
    }
    let (p, v) = alpha_operator(modes)?;
    alpha_from_operator(&p, &v, modes)
}

/// `α` for several truncations, sharing one operator build.
pub fn alpha_truncated_many(modes: &[usize]) -> Result<Vec<f64>> {
    let max = modes.iter().copied().max().unwrap_or(0);
    if max == 0 {
        return Ok(Vec::new());
    }
    let (p, v) = alpha_operator(max)?;
    modes.iter().map(|&m| alpha_from_operator(&p, &v, m)).collect()
}

/// `S_N(k)_{ij} = H₀⁽¹⁾(k(D_j − D_i))`, zero on the diagonal.
pub fn s_matrix(k: Complex64, centers: &[f64]) -> Result<CMatrix> {
    let n = centers.len();
    let mut s = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = centers[j] - centers[i];
            if d == 0.0 {
                return Err(Error::InvalidArgument("coincident slit centers".into()));
            }
            s[(i, j)] = hankel1_0(k * d)?;
        }
    }
    Ok(s)
}

/// Sort by descending `|λ|`; values whose moduli agree to a relative `1e-9`
/// form a group ordered by descending `Im λ`.
pub fn sort_eigenvalues(mut ev: Vec<Complex64>) -> Vec<Complex64> {
    ev.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    let scale = ev.first().map(|z| z.norm()).unwrap_or(0.0);
    let tol = 1e-9 * scale.max(f64::MIN_POSITIVE);
    let mut start = 0;
    while start < ev.len() {
        let mut end = start + 1;
        while end < ev.len() && ev[end - 1].norm() - ev[end].norm() <= tol {
            end += 1;
        }
        ev[start..end].sort_by(|a, b| b.im.total_cmp(&a.im));
        start = end;
    }
    ev
}

/// Eigenvalues in descending magnitude, ties by descending imaginary part.
pub fn eig_sorted(mat: &CMatrix) -> Result<Vec<Complex64>> {
    Ok(sort_eigenvalues(eigenvalues(mat)?))
}

/// Eigenvalues permuted so that entry `j` tracks `previous[j]`.
///
/// The assignment is greedy: at each step the unassigned `previous` entry
/// whose best and second-best candidates are furthest apart takes its best
/// candidate.
pub fn eig_matched(mat: &CMatrix, previous: &[Complex64]) -> Result<Vec<Complex64>> {
    let ev = eigenvalues(mat)?;
    if ev.len() != previous.len() {
        return Err(Error::InvalidArgument(format!(
            "expected {} reference eigenvalues, got {}",
            ev.len(),
            previous.len()
        )));
    }
    Ok(match_to(&ev, previous))
}

pub(crate) fn match_to(ev: &[Complex64], previous: &[Complex64]) -> Vec<Complex64> {
    let n = ev.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let mut used = vec![false; n];
    let mut done = vec![false; n];
    for _ in 0..n {
        let mut pick: Option<(usize, usize, f64)> = None;
        for j in (0..n).filter(|&j| !done[j]) {
            let mut best = (usize::MAX, f64::INFINITY);
            let mut second = f64::INFINITY;
            for i in (0..n).filter(|&i| !used[i]) {
                let d = (ev[i] - previous[j]).norm();
                if d < best.1 {
                    second = best.1;
                    best = (i, d);
                } else if d < second {
                    second = d;
                }
            }
            let gap = second - best.1;
            let better = match pick {
                None => true,
                Some((_, _, g)) => gap > g,
            };
            if better {
                pick = Some((j, best.0, gap));
            }
        }
        let (j, i, _) = pick.expect("an unassigned entry remains");
        out[j] = ev[i];
        used[i] = true;
        done[j] = true;
    }
    out
}

fn check_fp(geometry: &SlitArray, m: usize, j: usize) -> Result<f64> {
    if m < 1 {
        return Err(Error::InvalidArgument("Fabry–Pérot index must be ≥ 1".into()));
    }
    if j < 1 || j > geometry.len() {
        return Err(Error::InvalidArgument(format!(
            "branch {j} outside 1..={}",
            geometry.len()
        )));
    }
    let eps = m as f64 * PI * geometry.h;
    if eps > MAX_ASYM_EPS {
        return Err(Error::OutOfRange(format!(
            "ε_m = {eps:.3} exceeds {MAX_ASYM_EPS}"
        )));
    }
    Ok(eps)
}

/// Asymptotic resonance `k` for Fabry–Pérot index `m`, branch `j`, using the
/// closed-form `α`.
pub fn resonance_asym(geometry: &SlitArray, m: usize, j: usize, order: Order) -> Result<Resonance> {
    resonance_asym_with_alpha(geometry, m, j, order, alpha_closed())
}

/// As [`resonance_asym`] with an explicit `α`.
pub fn resonance_asym_with_alpha(
    geometry: &SlitArray,
    m: usize,
    j: usize,
    order: Order,
    alpha: f64,
) -> Result<Resonance> {
    let eps = check_fp(geometry, m, j)?;
    let h = geometry.h;
    let km = m as f64 * PI;
    let eps_c = Complex64::new(eps, 0.0);
    let base = delta_fn(eps_c, alpha);
    let lam1 = eig_sorted(&s_matrix(Complex64::new(km, 0.0), &geometry.centers)?)?;
    let d1 = base + eps * lam1[j - 1];
    let delta1 = -I * d1 - d1 * d1 / km;
    let log_eps = eps.ln().abs();
    let (k, est, method) = match order {
        Order::First => (km - I * d1 - d1 * d1 / km, eps * eps * log_eps, Method::Asym1),
        Order::Third => {
            let s2 = s_matrix(km + delta1, &geometry.centers)?;
            let lam2 = eig_matched(&s2, &lam1)?;
            let d2 = base + eps * lam2[j - 1];
            let k = km - I * (1.0 + 2.0 * h / PI) * d2 - (1.0 / km - 5.0 * h / (PI * km)) * d2 * d2
                + I * (1.0 / (km * km) - 1.0 / 12.0) * d2 * d2 * d2;
            (k, eps.powi(3) * log_eps, Method::Asym3)
        }
    };
    Ok(Resonance {
        fp_index: m,
        branch: j,
        parity: ModeLabel::for_geometry(geometry, m),
        k,
        method,
        error_estimate: est,
    })
}

/// Single-slit modal amplitudes at `k`: `b₀ = 1`, odd-index amplitudes
/// zero, even-index amplitudes from the truncated even-mode equations.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeCoefficients {
    pub b0: Complex64,
    /// `a₂, a₄, …`
    pub a_even: Vec<Complex64>,
    /// `a₁, a₃, …`
    pub a_odd: Vec<Complex64>,
    /// `‖(2I − A)a − rhs‖_∞` of the truncated solve.
    pub residual: f64,
}

/// Solve `(2I − A)a = q₀ c₀` with `A_{nm} = c_{2m,2n} + δ_{nm}` for the even
/// amplitudes of a single slit (asymptotic kernels).
pub fn mode_coefficients(
    geometry: &SlitArray,
    k: Complex64,
    parity: Parity,
    modes: usize,
) -> Result<ModeCoefficients> {
    if geometry.len() != 1 {
        return Err(Error::InvalidArgument("mode coefficients need a single slit".into()));
    }
    if modes < 4 {
        return Err(Error::InvalidArgument("at least 4 modes are required".into()));
    }
    let h = geometry.h;
    let cfg = QuadratureConfig::default();
    let ne = modes / 2;
    let no = modes.div_ceil(2);
    let e0 = (I * k).exp();
    let q0 = match parity {
        Parity::Even => e0 - 1.0,
        Parity::Odd => e0 + 1.0,
    };
    let mut a = CMatrix::zeros(ne, ne);
    let mut rhs = DVector::zeros(ne);
    for n in 1..=ne {
        rhs[n - 1] = q0 * c_single(k, h, 0, 2 * n, parity, Backend::Asymptotic, &cfg)?.value;
        for m in 1..=ne {
            let c = c_single(k, h, 2 * m, 2 * n, parity, Backend::Asymptotic, &cfg)?.value;
            let delta = if m == n { 1.0 } else { 0.0 };
            a[(n - 1, m - 1)] = c + delta;
        }
    }
    let lhs = CMatrix::identity(ne, ne) * Complex64::new(2.0, 0.0) - &a;
    let x = lhs.clone().lu().solve(&rhs).ok_or(Error::SingularMatrix)?;
    let residual = (&lhs * &x - &rhs).camax();
    Ok(ModeCoefficients {
        b0: Complex64::new(1.0, 0.0),
        a_even: x.iter().copied().collect(),
        a_odd: vec![Complex64::new(0.0, 0.0); no],
        residual,
    })
}
