//! Truncated mode-matching systems and their rank-deficiency roots.
//!
//! Unknowns are ordered per slit as `(b₀, a₂, a₄, …, a₁, a₃, …)` and the
//! equation for `a_n` sits on the same row as the unknown `a_n`. Row 0 of a
//! slit is the `b₀` balance.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::asymptotic::{resonance_asym, Method, ModeLabel, Order, Resonance, SearchRegion, SlitArray};
use crate::error::{Error, Result};
use crate::kernels::{
    c_prefactor, d_cross_00, d_cross_asym, d_cross_general, d_single_asym, d_single_quad, Backend,
    Parity, QuadratureConfig,
};
use crate::linalg::{log_det, norm2_power, row_scaled, singular_values, CMatrix};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Treatment of cross-slit coefficients beyond `(0, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossMode {
    /// Every `c_mn(D)` from the branch-cut quadrature.
    Full,
    /// Only `c₀₀(D)`; the rest are set to zero (entry error `O(ε²)`).
    Leading,
}

/// Knobs shared by assembly and root refinement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DirectOptions {
    pub m_modes: usize,
    pub backend: Backend,
    pub cross_mode: CrossMode,
    pub quadrature: QuadratureConfig,
    /// Relative step tolerance `|Δk| ≤ tol·|k|`.
    pub tol: f64,
    pub max_iter: usize,
    /// Acceptance threshold on the scaled smallest singular value.
    pub sigma_tol: f64,
    /// Roots must satisfy `|k − mπ| ≤ rouche_scale·√h`.
    pub rouche_scale: f64,
}

impl Default for DirectOptions {
    fn default() -> Self {
        DirectOptions {
            m_modes: 40,
            backend: Backend::Quadrature,
            cross_mode: CrossMode::Full,
            quadrature: QuadratureConfig::default(),
            tol: 1e-12,
            max_iter: 50,
            sigma_tol: 1e-8,
            rouche_scale: 1.0,
        }
    }
}

/// A finite section `M(k)` of the mode-matching operator.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSystem {
    pub k: Complex64,
    pub geometry: SlitArray,
    pub parity: Parity,
    pub m_modes: usize,
    pub cross_mode: CrossMode,
    pub entries: CMatrix,
}

impl TruncatedSystem {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Row/column of mode `mode` of slit `slit`.
    pub fn index(&self, slit: usize, mode: usize) -> usize {
        slit * (self.m_modes + 1) + mode_position(mode, self.m_modes)
    }

    /// Rows and columns of the odd-index amplitudes of `slit`. For a single
    /// slit this block decouples from the rest.
    pub fn odd_block(&self, slit: usize) -> std::ops::Range<usize> {
        let base = slit * (self.m_modes + 1) + 1 + self.m_modes / 2;
        base..slit * (self.m_modes + 1) + self.m_modes + 1
    }

    pub fn log_det(&self) -> Result<Complex64> {
        let (a, p) = log_det(&self.entries)?;
        Ok(Complex64::new(a, p))
    }
}

fn mode_position(mode: usize, m_modes: usize) -> usize {
    if mode == 0 {
        0
    } else if mode % 2 == 0 {
        mode / 2
    } else {
        m_modes / 2 + mode.div_ceil(2)
    }
}

fn sgn(p: usize) -> f64 {
    if p % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `c_mn` for `m, n = 0..=M` on one slit; entry `[(m, n)]`.
pub fn single_table(
    k: Complex64,
    h: f64,
    m_modes: usize,
    parity: Parity,
    backend: Backend,
    cfg: &QuadratureConfig,
) -> Result<CMatrix> {
    let size = m_modes + 1;
    let mut d = CMatrix::zeros(size, size);
    for m in 0..size {
        for n in (m..size).step_by(2) {
            let v = match backend {
                Backend::Asymptotic => d_single_asym(k, h, m, n)?,
                Backend::Quadrature => d_single_quad(k, h, m, n, cfg)?,
            }
            .value;
            d[(m, n)] = v;
            d[(n, m)] = v;
        }
    }
    Ok(apply_prefactors(d, k, h, parity))
}

/// `c_mn(D)` for `m, n = 0..=M`; entry `[(m, n)]`.
#[allow(clippy::too_many_arguments)]
pub fn cross_table(
    k: Complex64,
    h: f64,
    m_modes: usize,
    d: f64,
    parity: Parity,
    backend: Backend,
    cross_mode: CrossMode,
    cfg: &QuadratureConfig,
) -> Result<CMatrix> {
    let size = m_modes + 1;
    let mut t = CMatrix::zeros(size, size);
    let dist = d.abs();
    for m in 0..size {
        for n in m..size {
            let v = match (backend, cross_mode, m, n) {
                (Backend::Asymptotic, _, _, _) => d_cross_asym(k, h, m, n, dist)?.value,
                (Backend::Quadrature, _, 0, 0) => d_cross_00(k, h, dist, cfg)?.value,
                (Backend::Quadrature, CrossMode::Leading, _, _) => ZERO,
                (Backend::Quadrature, CrossMode::Full, _, _) => {
                    d_cross_general(k, h, m, n, dist, cfg)?.value
                }
            };
            let v = if d < 0.0 { v * sgn(m + n) } else { v };
            t[(m, n)] = v;
            t[(n, m)] = v;
        }
    }
    Ok(apply_prefactors(t, k, h, parity))
}

fn apply_prefactors(mut d: CMatrix, k: Complex64, h: f64, parity: Parity) -> CMatrix {
    let size = d.nrows();
    for m in 0..size {
        for n in 0..size {
            if d[(m, n)] != ZERO {
                d[(m, n)] *= c_prefactor(k, h, m, n, parity);
            }
        }
    }
    d
}

/// Single-slit system.
pub fn assemble_single(
    k: Complex64,
    h: f64,
    parity: Parity,
    m_modes: usize,
    backend: Backend,
    cfg: &QuadratureConfig,
) -> Result<TruncatedSystem> {
    let geometry = SlitArray::single(h)?;
    let opts = DirectOptions {
        m_modes,
        backend,
        quadrature: *cfg,
        ..DirectOptions::default()
    };
    assemble_multi(k, &geometry, parity, &opts)
}

/// Block system for an array of slits. Diagonal blocks are the single-slit
/// equations; block `(q, p)` couples the unknowns of slit `p` into the
/// equations of slit `q` through `c_mn(D_p − D_q)`.
pub fn assemble_multi(
    k: Complex64,
    geometry: &SlitArray,
    parity: Parity,
    opts: &DirectOptions,
) -> Result<TruncatedSystem> {
    let mm = opts.m_modes;
    if mm < 4 {
        return Err(Error::InvalidArgument("at least 4 modes are required".into()));
    }
    let h = geometry.h;
    let n_slits = geometry.len();
    let size = mm + 1;
    let e0 = (I * k).exp();
    let (p0, q0) = match parity {
        Parity::Even => (e0 + 1.0, e0 - 1.0),
        Parity::Odd => (e0 - 1.0, e0 + 1.0),
    };
    let single = single_table(k, h, mm, parity, opts.backend, &opts.quadrature)?;
    let mut cross: Vec<(f64, CMatrix)> = Vec::new();
    let mut entries = CMatrix::zeros(n_slits * size, n_slits * size);
    for q in 0..n_slits {
        for p in 0..n_slits {
            let table = if p == q {
                &single
            } else {
                let d = geometry.centers[p] - geometry.centers[q];
                let pos = match cross.iter().position(|(dd, _)| *dd == d) {
                    Some(i) => i,
                    None => {
                        let t = cross_table(
                            k,
                            h,
                            mm,
                            d,
                            parity,
                            opts.backend,
                            opts.cross_mode,
                            &opts.quadrature,
                        )?;
                        cross.push((d, t));
                        cross.len() - 1
                    }
                };
                &cross[pos].1
            };
            for n in 0..size {
                let row = q * size + mode_position(n, mm);
                for m in 0..size {
                    let col = p * size + mode_position(m, mm);
                    let c = table[(m, n)];
                    let v = match (n, m) {
                        (0, 0) => {
                            let own = if p == q { 2.0 * p0 } else { ZERO };
                            own - q0 * c
                        }
                        (0, _) => -c,
                        (_, 0) => -q0 * c,
                        _ => {
                            let own = if p == q && m == n { 1.0 } else { 0.0 };
                            own - c
                        }
                    };
                    entries[(row, col)] = v;
                }
            }
        }
    }
    Ok(TruncatedSystem {
        k,
        geometry: geometry.clone(),
        parity,
        m_modes: mm,
        cross_mode: opts.cross_mode,
        entries,
    })
}

/// Smallest singular value of the row-scaled system matrix.
pub fn sigma_min(system: &TruncatedSystem) -> f64 {
    sigma_min_matrix(&system.entries)
}

pub fn sigma_min_matrix(mat: &CMatrix) -> f64 {
    singular_values(&row_scaled(mat))
        .last()
        .copied()
        .unwrap_or(0.0)
}

/// Outcome of a Newton refinement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootSolveReport {
    pub k_root: Complex64,
    pub iterations: usize,
    /// Scaled smallest singular value at `k_root`.
    pub residual: f64,
    pub converged: bool,
    /// Size of the final Newton step.
    pub last_step: f64,
}

/// Newton iteration on `log det M(k)` for any analytic `k ↦ M(k)`, with the
/// derivative taken by central differences of `det M(k ± δ)/det M(k)`,
/// `δ = 1e-7·|k|`. Iterates are projected back into `region`.
pub fn newton_log_det<F>(
    assemble: F,
    k_seed: Complex64,
    region: &SearchRegion,
    tol: f64,
    max_iter: usize,
    max_step: f64,
) -> Result<(Complex64, usize, f64)>
where
    F: Fn(Complex64) -> Result<CMatrix>,
{
    let log_det_at = |k: Complex64| -> Result<Complex64> {
        let (a, p) = log_det(&assemble(k)?)?;
        Ok(Complex64::new(a, p))
    };
    let mut k = region.project(k_seed);
    for it in 1..=max_iter {
        let delta = 1e-7 * k.norm();
        let l0 = log_det_at(k)?;
        let rp = (log_det_at(k + delta)? - l0).exp();
        let rm = (log_det_at(k - delta)? - l0).exp();
        let g = (rp - rm) / (2.0 * delta);
        if g == ZERO || !(g.re.is_finite() && g.im.is_finite()) {
            return Err(Error::NoConvergence(format!("flat determinant at k = {k}")));
        }
        let mut dk = -1.0 / g;
        if dk.norm() > max_step {
            dk *= max_step / dk.norm();
        }
        let next = region.project(k + dk);
        let step = (next - k).norm();
        k = next;
        if step <= tol * k.norm() {
            return Ok((k, it, step));
        }
    }
    Err(Error::NoConvergence(format!(
        "Newton iteration exceeded {max_iter} steps (last k = {k})"
    )))
}

/// Refine a resonance seed to a root of `det M(k)`.
///
/// The root must stay in the disk `|k − mπ| ≤ rouche_scale·√h` around the
/// Fabry–Pérot frequency nearest to the seed.
pub fn refine_root(
    geometry: &SlitArray,
    parity: Parity,
    k_seed: Complex64,
    region: &SearchRegion,
    opts: &DirectOptions,
) -> Result<RootSolveReport> {
    if !(opts.tol >= 1e-13) {
        return Err(Error::InvalidArgument("tolerance must be at least 1e-13".into()));
    }
    let m = (k_seed.re / PI).round().max(1.0);
    let center = m * PI;
    if !(opts.rouche_scale > 0.0) {
        return Err(Error::InvalidArgument("rouche_scale must be positive".into()));
    }
    let radius = opts.rouche_scale * geometry.h.sqrt();
    let assemble = |k: Complex64| Ok(assemble_multi(k, geometry, parity, opts)?.entries);
    let (k, iterations, last_step) =
        newton_log_det(assemble, k_seed, region, opts.tol, opts.max_iter, 0.5 * geometry.h.sqrt())?;
    if (k - center).norm() > radius {
        return Err(Error::EscapedDisk {
            root: format!("{k}"),
            center,
            radius,
        });
    }
    let residual = sigma_min(&assemble_multi(k, geometry, parity, opts)?);
    Ok(RootSolveReport {
        k_root: k,
        iterations,
        residual,
        converged: residual <= opts.sigma_tol,
        last_step,
    })
}

/// Seed from the third-order formula for `(m, j)` and refine directly.
pub fn resonance_direct(
    geometry: &SlitArray,
    m: usize,
    j: usize,
    region: &SearchRegion,
    opts: &DirectOptions,
) -> Result<(Resonance, RootSolveReport)> {
    let seed = resonance_asym(geometry, m, j, Order::Third)?;
    let parity = Parity::of_fp_index(m);
    let report = refine_root(geometry, parity, seed.k, region, opts)?;
    if !report.converged {
        return Err(Error::NoConvergence(format!(
            "scaled σ_min = {:.3e} at k = {} exceeds {:.1e}",
            report.residual, report.k_root, opts.sigma_tol
        )));
    }
    let res = Resonance {
        fp_index: m,
        branch: j,
        parity: ModeLabel::for_geometry(geometry, m),
        k: report.k_root,
        method: Method::Direct,
        error_estimate: report.last_step.max(f64::EPSILON * report.k_root.norm()),
    };
    Ok((res, report))
}

/// All resonances for `m` in `m_range` and every branch, by the requested
/// method. Direct roots closer than `dedup_tol` to an earlier root are
/// dropped.
pub fn find_resonances(
    geometry: &SlitArray,
    m_range: std::ops::RangeInclusive<usize>,
    method: Method,
    region: &SearchRegion,
    opts: &DirectOptions,
) -> Result<Vec<Resonance>> {
    let dedup_tol = 1e-8;
    let mut out: Vec<Resonance> = Vec::new();
    for m in m_range {
        for j in 1..=geometry.len() {
            let r = match method {
                Method::Asym1 => resonance_asym(geometry, m, j, Order::First)?,
                Method::Asym3 => resonance_asym(geometry, m, j, Order::Third)?,
                Method::Direct => resonance_direct(geometry, m, j, region, opts)?.0,
            };
            if method == Method::Direct && out.iter().any(|o| (o.k - r.k).norm() < dedup_tol) {
                continue;
            }
            out.push(r);
        }
    }
    Ok(out)
}

/// 2-norms of the truncated coefficient blocks `(c_{2i,2j} + δ_ij)` and
/// `(c_{2i−1,2j−1} + δ_ij)`, `i, j = 1..M`, by power iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorNorms {
    pub even: f64,
    pub odd: f64,
}

pub fn operator_norm_check(
    k: Complex64,
    h: f64,
    m_modes: usize,
    backend: Backend,
    cfg: &QuadratureConfig,
) -> Result<OperatorNorms> {
    let (even, odd) = operator_blocks(k, h, m_modes, backend, cfg)?;
    Ok(OperatorNorms {
        even: norm2_power(&even, 1e-15, 20_000),
        odd: norm2_power(&odd, 1e-15, 20_000),
    })
}

/// The even- and odd-index blocks used by [`operator_norm_check`].
pub fn operator_blocks(
    k: Complex64,
    h: f64,
    m_modes: usize,
    backend: Backend,
    cfg: &QuadratureConfig,
) -> Result<(CMatrix, CMatrix)> {
    if m_modes < 1 {
        return Err(Error::InvalidArgument("at least one mode is required".into()));
    }
    let t = single_table(k, h, 2 * m_modes, Parity::Even, backend, cfg)?;
    let block = |off: usize| {
        CMatrix::from_fn(m_modes, m_modes, |i, j| {
            let (a, b) = (2 * (i + 1) - off, 2 * (j + 1) - off);
            t[(a, b)] + if i == j { 1.0 } else { 0.0 }
        })
    };
    Ok((block(0), block(1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn wrap_phase(x: f64) -> f64 {
        let mut y = x % (2.0 * PI);
        if y > PI {
            y -= 2.0 * PI;
        } else if y <= -PI {
            y += 2.0 * PI;
        }
        y
    }

    fn opts(m_modes: usize) -> DirectOptions {
        DirectOptions {
            m_modes,
            ..DirectOptions::default()
        }
    }

    #[test]
    fn layout() {
        assert_eq!(mode_position(0, 6), 0);
        assert_eq!(mode_position(2, 6), 1);
        assert_eq!(mode_position(6, 6), 3);
        assert_eq!(mode_position(1, 6), 4);
        assert_eq!(mode_position(5, 6), 6);
        assert_eq!(mode_position(1, 5), 3);
        assert_eq!(mode_position(5, 5), 5);
        let mut seen: Vec<usize> = (0..=7).map(|m| mode_position(m, 7)).collect();
        seen.sort();
        assert_eq!(seen, (0..=7).collect::<Vec<_>>());
    }

    #[test]
    fn row_zero_is_scalar_balance() {
        let k = c(3.0, -0.02);
        let h = 1e-3;
        let sys = assemble_single(k, h, Parity::Even, 6, Backend::Quadrature, &QuadratureConfig::default())
            .unwrap();
        let e0 = (I * k).exp();
        let c00 = single_table(k, h, 6, Parity::Even, Backend::Quadrature, &QuadratureConfig::default())
            .unwrap()[(0, 0)];
        assert!((sys.entries[(0, 0)] - (2.0 * (e0 + 1.0) - (e0 - 1.0) * c00)).norm() < 1e-14);
        // odd-index block decouples
        let odd = sys.odd_block(0);
        for r in odd.clone() {
            for col in 0..odd.start {
                assert_eq!(sys.entries[(r, col)], ZERO);
                assert_eq!(sys.entries[(col, r)], ZERO);
            }
        }
        assert_eq!(sys.dim(), 7);
    }

    #[test]
    fn away_from_resonance_is_well_conditioned() {
        let sys = assemble_single(
            c(PI / 2.0, 0.0),
            1e-3,
            Parity::Even,
            20,
            Backend::Quadrature,
            &QuadratureConfig::default(),
        )
        .unwrap();
        assert!(sigma_min(&sys) >= 0.1);
    }

    #[test]
    fn sigma_min_basics() {
        assert!((sigma_min_matrix(&CMatrix::identity(3, 3)) - 1.0).abs() < 1e-15);
        let mut m = CMatrix::identity(3, 3);
        m.row_mut(2).fill(ZERO);
        assert!(sigma_min_matrix(&m) < 1e-300);
    }

    #[test]
    fn newton_on_synthetic_determinant() {
        let root = c(3.0, -0.05);
        let assemble = |k: Complex64| {
            let g = (k * 0.3).exp() + 2.0;
            Ok(CMatrix::from_row_slice(
                2,
                2,
                &[(k - root) * g, c(1.0, 0.0), ZERO, c(2.0, 1.0)],
            ))
        };
        let region = SearchRegion::default();
        let (k, it, _) =
            newton_log_det(assemble, root + c(1e-3, 5e-4), &region, 1e-12, 50, 1.0).unwrap();
        assert!((k - root).norm() < 1e-11);
        assert!(it <= 5, "{it}");
    }

    #[test]
    fn single_slit_root_matches_third_order() {
        let h = 5e-3;
        let g = SlitArray::single(h).unwrap();
        let (r, report) = resonance_direct(&g, 1, 1, &SearchRegion::default(), &opts(20)).unwrap();
        let a3 = resonance_asym(&g, 1, 1, Order::Third).unwrap().k;
        let eps = PI * h;
        assert!(report.converged);
        assert!((r.k - a3).norm() < 3.0 * eps.powi(3) * eps.ln().abs());
        assert!(r.k.im < 0.0);
    }

    #[test]
    fn multi_with_one_slit_is_single() {
        let k = c(3.05, -0.02);
        let g = SlitArray::single(1e-2).unwrap();
        let a = assemble_multi(k, &g, Parity::Even, &opts(8)).unwrap();
        let b = assemble_single(k, 1e-2, Parity::Even, 8, Backend::Quadrature, &QuadratureConfig::default())
            .unwrap();
        assert_eq!(a.entries, b.entries);
    }

    #[test]
    fn slit_swap_leaves_determinant() {
        let k = c(3.1, -0.02);
        let h = 1e-2;
        let a = SlitArray::new(h, vec![-1.0, 1.0]).unwrap();
        let sys = assemble_multi(k, &a, Parity::Even, &opts(6)).unwrap();
        let n = sys.m_modes + 1;
        let perm = CMatrix::from_fn(2 * n, 2 * n, |i, j| {
            if (i + n) % (2 * n) == j {
                c(1.0, 0.0)
            } else {
                ZERO
            }
        });
        let swapped = &perm * &sys.entries * perm.transpose();
        let l1 = sys.log_det().unwrap();
        let l2 = log_det(&swapped).map(|(a, p)| Complex64::new(a, p)).unwrap();
        assert!((l1.re - l2.re).abs() < 1e-12);
        assert!(wrap_phase(l1.im - l2.im).abs() < 1e-12);
        // mirrored geometry gives the same system
        let b = SlitArray::new(h, vec![1.0, -1.0]).unwrap();
        let sys_b = assemble_multi(k, &b, Parity::Even, &opts(6)).unwrap();
        assert!((&sys_b.entries - &swapped).iter().all(|z| z.norm() < 1e-13));
    }

    #[test]
    fn far_slits_couple_weakly() {
        let k = c(PI, 0.0);
        let h = 1e-3;
        let eps = PI * h;
        let near = cross_table(k, h, 4, 2.0, Parity::Even, Backend::Quadrature, CrossMode::Leading, &QuadratureConfig::default())
            .unwrap()[(0, 0)]
            .norm();
        let far = cross_table(k, h, 4, 40.0 / PI, Parity::Even, Backend::Quadrature, CrossMode::Leading, &QuadratureConfig::default())
            .unwrap()[(0, 0)]
            .norm();
        let expect_far = (2.0 / (PI * 40.0)).sqrt() * eps;
        assert!((far / expect_far - 1.0).abs() < 0.05);
        assert!(far < near);
    }

    #[test]
    fn norm_blocks_bounded() {
        let n = operator_norm_check(c(PI, 0.0), 1e-3, 10, Backend::Quadrature, &QuadratureConfig::default())
            .unwrap();
        assert!(n.even <= 0.6 && n.odd <= 0.6, "{n:?}");
        let (e, _) = operator_blocks(c(PI, 0.0), 1e-3, 10, Backend::Quadrature, &QuadratureConfig::default())
            .unwrap();
        assert!((singular_values(&e)[0] - n.even).abs() < 1e-12);
    }
}
