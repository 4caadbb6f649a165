//! Command implementations. Each returns a [`Table`] or a JSON value.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use slitres_core::asymptotic::alpha_truncated;
use slitres_core::direct::resonance_direct;
use slitres_core::{
    alpha_closed, c_cross, c_single, resonance_asym, Backend, Error, KernelValue, Method, Order,
    Parity, QuadratureConfig, Resonance, SearchRegion, SlitArray,
};

use crate::config::RunConfig;
use crate::output::{Cell, Table};
use crate::CliError;

pub const RESONANCE_COLUMNS: [&str; 9] = [
    "m", "j", "parity", "re_k", "im_k", "method", "est_error", "quality_factor", "status",
];

fn solve_one(
    geometry: &SlitArray,
    m: usize,
    j: usize,
    method: Method,
    cfg: &RunConfig,
) -> Result<Resonance, Error> {
    match method {
        Method::Asym1 => resonance_asym(geometry, m, j, Order::First),
        Method::Asym3 => resonance_asym(geometry, m, j, Order::Third),
        Method::Direct => {
            resonance_direct(geometry, m, j, &SearchRegion::default(), &cfg.direct_options())
                .map(|(r, _)| r)
        }
    }
}

/// One row per `(m, j)` in `m` ascending, `j` ascending order. Failed solves
/// keep their row with NaN values and the error in `status`; the table is
/// returned together with the number of failures.
pub fn resonances(cfg: &RunConfig) -> Result<(Table, usize), CliError> {
    let geometry = cfg.geometry()?;
    let l = cfg.slab_thickness;
    let [lo, hi] = cfg.fp_range;
    let jobs: Vec<(usize, usize)> = (lo..=hi)
        .flat_map(|m| (1..=geometry.len()).map(move |j| (m, j)))
        .collect();
    let results: Vec<Result<Resonance, Error>> = jobs
        .par_iter()
        .map(|&(m, j)| solve_one(&geometry, m, j, cfg.method, cfg))
        .collect();

    let mut table = Table::new(&RESONANCE_COLUMNS);
    table.meta("command", "resonances");
    table.meta("config", serde_json::to_string(cfg).expect("config serialises"));
    let mut failures = 0;
    let mut accepted: Vec<Complex64> = Vec::new();
    for (&(m, j), r) in jobs.iter().zip(results) {
        let parity = slitres_core::ModeLabel::for_geometry(&geometry, m).to_string();
        let mut status = "ok".to_string();
        let row = match r {
            Ok(r) => {
                if accepted.iter().any(|k| (k - r.k).norm() < 1e-8) {
                    status = "duplicate".into();
                    failures += 1;
                }
                accepted.push(r.k);
                vec![
                    r.k.re / l,
                    r.k.im / l,
                    r.error_estimate / l,
                    r.quality_factor(),
                ]
            }
            Err(e) => {
                log::warn!("m = {m}, j = {j}: {e}");
                status = format!("error: {e}");
                failures += 1;
                vec![f64::NAN; 4]
            }
        };
        table.push(vec![
            m.into(),
            j.into(),
            parity.into(),
            row[0].into(),
            row[1].into(),
            cfg.method.to_string().into(),
            row[2].into(),
            row[3].into(),
            status.into(),
        ]);
    }
    Ok((table, failures))
}

/// Inputs and result of a single coefficient evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelReport {
    pub k: Complex64,
    pub h: f64,
    pub d: Option<f64>,
    pub parity: Parity,
    pub coefficient: KernelValue,
}

/// `c_mn` (or `c_mn(D)` when `d` is given) in units of the slab thickness.
pub fn kernel(
    k: Complex64,
    h: f64,
    m: usize,
    n: usize,
    d: Option<f64>,
    backend: Backend,
    parity: Parity,
) -> Result<KernelReport, CliError> {
    let cfg = QuadratureConfig::default();
    let v = match d {
        None => c_single(k, h, m, n, parity, backend, &cfg),
        Some(d) => c_cross(k, h, m, n, d, parity, backend, &cfg),
    };
    let coefficient = v.map_err(|e| match e {
        Error::InvalidArgument(_) | Error::OutOfRange(_) => CliError::Config(e.to_string()),
        _ => CliError::Solver(e.to_string()),
    })?;
    Ok(KernelReport { k, h, d, parity, coefficient })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaReport {
    pub modes: usize,
    pub alpha_truncated: f64,
    pub alpha_closed: f64,
    pub abs_error: f64,
}

pub fn alpha(modes: usize) -> Result<AlphaReport, CliError> {
    let a = alpha_truncated(modes).map_err(|e| CliError::Config(e.to_string()))?;
    let exact = alpha_closed();
    Ok(AlphaReport {
        modes,
        alpha_truncated: a,
        alpha_closed: exact,
        abs_error: (a - exact).abs(),
    })
}

pub const VALIDATE_COLUMNS: [&str; 15] = [
    "h", "m", "j", "eps", "asym1_re", "asym1_im", "asym3_re", "asym3_im", "direct_re",
    "direct_im", "err1", "err3", "ratio1", "ratio3", "status",
];

/// Largest allowed max/min spread of the normalised errors.
pub const RATIO_SPREAD_LIMIT: f64 = 3.0;

struct SweepPoint {
    h: f64,
    m: usize,
    j: usize,
    eps: f64,
    a1: Complex64,
    a3: Complex64,
    direct: Complex64,
}

impl SweepPoint {
    fn err1(&self) -> f64 {
        (self.a1 - self.direct).norm()
    }
    fn err3(&self) -> f64 {
        (self.a3 - self.direct).norm()
    }
    fn ratio1(&self) -> f64 {
        self.err1() / (self.eps * self.eps * self.eps.ln().powi(2))
    }
    fn ratio3(&self) -> f64 {
        self.err3() / (self.eps.powi(3) * self.eps.ln().abs())
    }
}

fn spread(xs: &[f64]) -> f64 {
    let max = xs.iter().cloned().fold(f64::MIN, f64::max);
    let min = xs.iter().cloned().fold(f64::MAX, f64::min);
    max / min
}

/// Order-law sweep over slit widths. Returns the table and whether every
/// ratio-stability check passed.
pub fn validate(cfg: &RunConfig, h_list: &[f64], jobs: usize) -> Result<(Table, bool), CliError> {
    if h_list.is_empty() {
        return Err(CliError::Config("h-list is empty".into()));
    }
    let l = cfg.slab_thickness;
    for w in h_list.windows(2) {
        if w[1] >= w[0] {
            return Err(CliError::Config("h-list must be strictly descending".into()));
        }
    }
    if let Some(h) = h_list.iter().find(|&&h| !(h > 0.0 && h / l <= 0.05)) {
        return Err(CliError::Config(format!("h = {h} must satisfy 0 < h/l ≤ 0.05")));
    }
    let geometries: Vec<SlitArray> = h_list
        .iter()
        .map(|&h| cfg.geometry_with_width(h))
        .collect::<Result<_, _>>()?;
    let [lo, hi] = cfg.fp_range;
    let mut points = Vec::new();
    for (i, g) in geometries.iter().enumerate() {
        for m in lo..=hi {
            for j in 1..=g.len() {
                points.push((i, m, j));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let opts = cfg.direct_options();
    let solved: Vec<Result<SweepPoint, String>> = pool.install(|| {
        points
            .par_iter()
            .map(|&(i, m, j)| {
                let g = &geometries[i];
                let fail = |e: Error| format!("h = {}, m = {m}, j = {j}: {e}", h_list[i]);
                let a1 = resonance_asym(g, m, j, Order::First).map_err(fail)?.k;
                let a3 = resonance_asym(g, m, j, Order::Third).map_err(fail)?.k;
                let (r, _) = resonance_direct(g, m, j, &SearchRegion::default(), &opts).map_err(fail)?;
                Ok(SweepPoint {
                    h: h_list[i],
                    m,
                    j,
                    eps: m as f64 * PI * g.h,
                    a1,
                    a3,
                    direct: r.k,
                })
            })
            .collect()
    });
    let solved: Vec<SweepPoint> = solved
        .into_iter()
        .collect::<Result<_, _>>()
        .map_err(CliError::Solver)?;

    let mut table = Table::new(&VALIDATE_COLUMNS);
    table.meta("command", "validate");
    table.meta("config", serde_json::to_string(cfg).expect("config serialises"));
    let hs: Vec<String> = h_list.iter().map(|h| h.to_string()).collect();
    table.meta("h_list", hs.join(","));
    let mut all_pass = true;
    for m in lo..=hi {
        for j in 1..=geometries[0].len() {
            let series: Vec<&SweepPoint> = solved.iter().filter(|p| p.m == m && p.j == j).collect();
            let r1: Vec<f64> = series.iter().map(|p| p.ratio1()).collect();
            let r3: Vec<f64> = series.iter().map(|p| p.ratio3()).collect();
            let ordered = series.iter().all(|p| p.err1() > p.err3());
            let checks = [
                ("ratio3_spread", spread(&r3), spread(&r3) < RATIO_SPREAD_LIMIT),
                ("ratio1_spread", spread(&r1), spread(&r1) < RATIO_SPREAD_LIMIT),
            ];
            for (name, value, ok) in checks {
                table.meta(
                    &format!("check m={m} j={j} {name}"),
                    format!("{} {}", crate::output::fmt_f64(value), if ok { "pass" } else { "fail" }),
                );
                all_pass &= ok;
            }
            table.meta(
                &format!("check m={m} j={j} err1_gt_err3"),
                if ordered { "pass" } else { "fail" },
            );
            all_pass &= ordered;
        }
    }
    for p in &solved {
        let status = if p.err1() > p.err3() { "ok" } else { "err1<=err3" };
        let cells: Vec<Cell> = vec![
            p.h.into(),
            p.m.into(),
            p.j.into(),
            p.eps.into(),
            (p.a1.re / l).into(),
            (p.a1.im / l).into(),
            (p.a3.re / l).into(),
            (p.a3.im / l).into(),
            (p.direct.re / l).into(),
            (p.direct.im / l).into(),
            (p.err1() / l).into(),
            (p.err3() / l).into(),
            p.ratio1().into(),
            p.ratio3().into(),
            status.into(),
        ];
        table.push(cells);
    }
    Ok((table, all_pass))
}
