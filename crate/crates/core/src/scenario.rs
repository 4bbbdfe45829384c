//! Parameter sweeps, figure presets and CSV emission.
//!
//! Scenario files are flat `key = value` lines; `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::correlators::{correlator_set, correlator_set_weak, CorrelatorSet};
use crate::entanglement::{covariance, report, CovarianceMatrix};
use crate::error::{Error, Result};
use crate::field::{ridge_width, wightman_cross, RegulatorKind, RegulatorScheme};
use crate::params::ModelParams;
use crate::rdm::{gtilde_assemble, truncated_rdm};
use crate::tdpt::{tdpt_element, tdpt_r1111, Which};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const PRESETS: [&str; 11] = [
    "fig1_left",
    "fig1_right",
    "fig2_left",
    "fig2_right",
    "fig3_left",
    "fig3_right",
    "fig4",
    "fig5",
    "fig6",
    "fig7",
    "alpha_beta_grid",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Output {
    CMinus,
    Sigma,
    LogNeg,
    Correlators,
    RdmElements,
    TdptElements,
    /// `|D+|` between the two worldlines, only for field sweeps.
    Wightman,
}

impl Output {
    const ALL: [Output; 7] = [
        Output::CMinus,
        Output::Sigma,
        Output::LogNeg,
        Output::Correlators,
        Output::RdmElements,
        Output::TdptElements,
        Output::Wightman,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Output::CMinus => "c_minus",
            Output::Sigma => "sigma",
            Output::LogNeg => "log_neg",
            Output::Correlators => "correlators",
            Output::RdmElements => "rdm_elements",
            Output::TdptElements => "tdpt_elements",
            Output::Wightman => "wightman",
        }
    }

    fn parse(s: &str) -> Result<Output> {
        Output::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| Error::Scenario(format!("unknown output `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pipeline {
    Exact,
    /// Weak-coupling closed forms; usable far past where quadrature is affordable.
    Weak,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sweep {
    TimeSeries { start: f64, end: f64, n: usize },
    /// Geometric grids in `alpha` and `beta`; each point scans `tau` over a fixed range.
    AlphaBetaGrid { alpha: (f64, f64), beta: (f64, f64), n: usize, tau: (f64, f64), tau_n: usize },
    /// Crossings of `c_minus` through `hbar/2`, located on a grid and refined by bisection.
    WindowSearch { start: f64, end: f64, n: usize },
    /// `(s, s')` grid on `[lo, hi]^2`.
    Field { lo: f64, hi: f64, n: usize, eps: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub params: ModelParams,
    pub sweep: Sweep,
    pub outputs: Vec<Output>,
    pub quad_tol: f64,
    pub pipeline: Pipeline,
    pub tdpt_schemes: Vec<RegulatorKind>,
    /// Cutoff constant behind the perturbative regulators, `eps = e^{-L - gamma_e}/Omega`.
    pub tdpt_lambda: f64,
    pub annotations: Vec<f64>,
}

fn scheme_name(k: RegulatorKind) -> &'static str {
    match k {
        RegulatorKind::OriginalEps => "original",
        RegulatorKind::ModifiedEpsPrime => "modified",
        RegulatorKind::ShiftedBounds => "shifted",
    }
}

fn parse_scheme(s: &str) -> Result<RegulatorKind> {
    match s {
        "original" => Ok(RegulatorKind::OriginalEps),
        "modified" => Ok(RegulatorKind::ModifiedEpsPrime),
        "shifted" => Ok(RegulatorKind::ShiftedBounds),
        _ => Err(Error::Scenario(format!("unknown regulator scheme `{s}`"))),
    }
}

impl Scenario {
    fn base(name: &str, params: ModelParams, sweep: Sweep, outputs: Vec<Output>) -> Scenario {
        Scenario {
            name: name.to_string(),
            params,
            sweep,
            outputs,
            quad_tol: crate::correlators::DEFAULT_QUAD_TOL,
            pipeline: Pipeline::Exact,
            tdpt_schemes: vec![RegulatorKind::ModifiedEpsPrime],
            tdpt_lambda: 20.0,
            annotations: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let bad = |m: String| Err(Error::Scenario(m));
        if self.outputs.is_empty() {
            return bad("output list is empty".into());
        }
        if !(self.quad_tol > 0.0 && self.quad_tol < 1.0) {
            return bad(format!("quad_tol must lie in (0, 1), got {}", self.quad_tol));
        }
        let t0 = self.params.tau0;
        match self.sweep {
            Sweep::TimeSeries { start, end, n } | Sweep::WindowSearch { start, end, n } => {
                if n < 2 {
                    return bad(format!("n_points must be at least 2, got {n}"));
                }
                if !(start >= t0) || !(end >= start) || !end.is_finite() {
                    return bad(format!("need tau0 <= tau_start <= tau_end, got {t0}, {start}, {end}"));
                }
            }
            Sweep::AlphaBetaGrid { alpha, beta, n, tau, tau_n } => {
                if n < 1 || tau_n < 2 {
                    return bad("grid needs n >= 1 and tau_n >= 2".into());
                }
                if !(alpha.0 > 0.0 && alpha.1 >= alpha.0 && beta.0 > 0.0 && beta.1 >= beta.0) {
                    return bad("alpha and beta ranges must be positive and ordered".into());
                }
                if !(tau.0 >= t0 && tau.1 >= tau.0) {
                    return bad(format!("need tau0 <= tau_start <= tau_end, got {t0}, {}, {}", tau.0, tau.1));
                }
            }
            Sweep::Field { lo, hi, n, eps } => {
                if n < 2 || !(hi > lo) || !(eps >= 0.0) {
                    return bad("field grid needs n >= 2, lo < hi and eps >= 0".into());
                }
            }
        }
        if !self.tdpt_lambda.is_finite() {
            return bad("tdpt_lambda must be finite".into());
        }
        if self.outputs.contains(&Output::TdptElements) && self.tdpt_schemes.is_empty() {
            return bad("tdpt_elements requested without tdpt_schemes".into());
        }
        Ok(())
    }

    /// Serialize in the scenario file format; `parse` inverts it exactly.
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("name", self.name.clone());
        for (k, v) in [
            ("gamma", p.gamma),
            ("omega", p.omega),
            ("a", p.a),
            ("hbar", p.hbar),
            ("tau0", p.tau0),
            ("alpha", p.alpha),
            ("beta", p.beta),
            ("lambda0", p.lambda0),
            ("lambda1", p.lambda1),
        ] {
            kv(k, format!("{v:?}"));
        }
        match self.sweep {
            Sweep::TimeSeries { start, end, n } | Sweep::WindowSearch { start, end, n } => {
                let kind = if matches!(self.sweep, Sweep::TimeSeries { .. }) { "time_series" } else { "window_search" };
                kv("sweep", kind.into());
                kv("tau_start", format!("{start:?}"));
                kv("tau_end", format!("{end:?}"));
                kv("n_points", n.to_string());
            }
            Sweep::AlphaBetaGrid { alpha, beta, n, tau, tau_n } => {
                kv("sweep", "alpha_beta_grid".into());
                kv("alpha_range", format!("{:?}, {:?}", alpha.0, alpha.1));
                kv("beta_range", format!("{:?}, {:?}", beta.0, beta.1));
                kv("grid_n", n.to_string());
                kv("tau_start", format!("{:?}", tau.0));
                kv("tau_end", format!("{:?}", tau.1));
                kv("n_points", tau_n.to_string());
            }
            Sweep::Field { lo, hi, n, eps } => {
                kv("sweep", "field".into());
                kv("field_range", format!("{lo:?}, {hi:?}"));
                kv("n_points", n.to_string());
                kv("field_eps", format!("{eps:?}"));
            }
        }
        kv("outputs", self.outputs.iter().map(|o| o.name()).collect::<Vec<_>>().join(", "));
        kv("quad_tol", format!("{:?}", self.quad_tol));
        kv("pipeline", if self.pipeline == Pipeline::Exact { "exact" } else { "weak" }.into());
        kv("tdpt_schemes", self.tdpt_schemes.iter().map(|k| scheme_name(*k)).collect::<Vec<_>>().join(", "));
        kv("tdpt_lambda", format!("{:?}", self.tdpt_lambda));
        if !self.annotations.is_empty() {
            kv("annotations", self.annotations.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(", "));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Scenario> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Scenario(format!("line {}: expected `key = value`", i + 1)))?;
            if map.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(Error::Scenario(format!("line {}: duplicate key `{}`", i + 1, k.trim())));
            }
        }
        let mut take = |k: &str| map.remove(k);
        let num = |k: &str, v: Option<String>| -> Result<Option<f64>> {
            v.map(|s| s.parse::<f64>().map_err(|_| Error::Scenario(format!("`{k}`: not a number: `{s}`")))).transpose()
        };
        let int = |k: &str, v: Option<String>| -> Result<Option<usize>> {
            v.map(|s| s.parse::<usize>().map_err(|_| Error::Scenario(format!("`{k}`: not a count: `{s}`")))).transpose()
        };
        let pair = |k: &str, v: Option<String>| -> Result<Option<(f64, f64)>> {
            let Some(s) = v else { return Ok(None) };
            let xs = list_f64(k, &s)?;
            if xs.len() != 2 {
                return Err(Error::Scenario(format!("`{k}`: expected two numbers")));
            }
            Ok(Some((xs[0], xs[1])))
        };
        let need = |k: &str| Error::Scenario(format!("missing key `{k}`"));

        let gamma = num("gamma", take("gamma"))?.ok_or_else(|| need("gamma"))?;
        let omega = num("omega", take("omega"))?.ok_or_else(|| need("omega"))?;
        let a = num("a", take("a"))?.ok_or_else(|| need("a"))?;
        let tau0 = num("tau0", take("tau0"))?.ok_or_else(|| need("tau0"))?;
        let mut params = ModelParams::new(gamma, omega, a, tau0);
        if let Some(h) = num("hbar", take("hbar"))? {
            params.hbar = h;
        }
        if let Some(v) = num("lambda0", take("lambda0"))? {
            params.lambda0 = v;
        }
        if let Some(v) = num("lambda1", take("lambda1"))? {
            params.lambda1 = v;
        }
        if let Some(v) = num("alpha", take("alpha"))? {
            params.alpha = v;
        }
        if let Some(v) = num("beta", take("beta"))? {
            params.beta = v;
        }

        let kind = take("sweep").unwrap_or_else(|| "time_series".into());
        let start = num("tau_start", take("tau_start"))?;
        let end = num("tau_end", take("tau_end"))?;
        let n = int("n_points", take("n_points"))?;
        let sweep = match kind.as_str() {
            "time_series" | "window_search" => {
                let start = start.ok_or_else(|| need("tau_start"))?;
                let end = end.ok_or_else(|| need("tau_end"))?;
                let n = n.ok_or_else(|| need("n_points"))?;
                if kind == "time_series" {
                    Sweep::TimeSeries { start, end, n }
                } else {
                    Sweep::WindowSearch { start, end, n }
                }
            }
            "alpha_beta_grid" => Sweep::AlphaBetaGrid {
                alpha: pair("alpha_range", take("alpha_range"))?.ok_or_else(|| need("alpha_range"))?,
                beta: pair("beta_range", take("beta_range"))?.ok_or_else(|| need("beta_range"))?,
                n: int("grid_n", take("grid_n"))?.ok_or_else(|| need("grid_n"))?,
                tau: (start.ok_or_else(|| need("tau_start"))?, end.ok_or_else(|| need("tau_end"))?),
                tau_n: n.ok_or_else(|| need("n_points"))?,
            },
            "field" => {
                let (lo, hi) = pair("field_range", take("field_range"))?.ok_or_else(|| need("field_range"))?;
                Sweep::Field {
                    lo,
                    hi,
                    n: n.ok_or_else(|| need("n_points"))?,
                    eps: num("field_eps", take("field_eps"))?.unwrap_or(0.0),
                }
            }
            other => return Err(Error::Scenario(format!("unknown sweep `{other}`"))),
        };
        let outputs = match take("outputs") {
            Some(s) => split_list(&s).map(Output::parse).collect::<Result<Vec<_>>>()?,
            None => return Err(need("outputs")),
        };
        let name = take("name").unwrap_or_else(|| "scenario".into());
        let mut sc = Scenario::base(&name, params, sweep, outputs);
        if let Some(v) = num("quad_tol", take("quad_tol"))? {
            sc.quad_tol = v;
        }
        if let Some(s) = take("pipeline") {
            sc.pipeline = match s.as_str() {
                "exact" => Pipeline::Exact,
                "weak" => Pipeline::Weak,
                _ => return Err(Error::Scenario(format!("unknown pipeline `{s}`"))),
            };
        }
        if let Some(s) = take("tdpt_schemes") {
            sc.tdpt_schemes = split_list(&s).map(parse_scheme).collect::<Result<Vec<_>>>()?;
        }
        if let Some(v) = num("tdpt_lambda", take("tdpt_lambda"))? {
            sc.tdpt_lambda = v;
        }
        if let Some(s) = take("annotations") {
            sc.annotations = list_f64("annotations", &s)?;
        }
        // sidecar-only keys
        for k in ["version", "csv_digits", "rows", "columns"] {
            take(k);
        }
        if let Some(k) = map.keys().next() {
            return Err(Error::Scenario(format!("unknown key `{k}`")));
        }
        sc.validate()?;
        Ok(sc)
    }
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty())
}

fn list_f64(k: &str, s: &str) -> Result<Vec<f64>> {
    split_list(s)
        .map(|x| x.parse::<f64>().map_err(|_| Error::Scenario(format!("`{k}`: not a number: `{x}`"))))
        .collect()
}

fn fig2(tau0: f64) -> ModelParams {
    ModelParams::new(0.01, 1.3, 2.0, tau0)
}

fn fig3(tau0: f64) -> ModelParams {
    ModelParams::new(1e-5, 2.3, 1.0, tau0)
}

fn series(start: f64, end: f64, step: f64) -> Sweep {
    Sweep::TimeSeries { start, end, n: ((end - start) / step).round() as usize + 1 }
}

/// Caption parameters for each figure.
pub fn figure_preset(name: &str) -> Result<Scenario> {
    use Output::*;
    let ent = vec![CMinus, Sigma, LogNeg];
    let sc = match name {
        "fig1_left" => Scenario::base(name, fig2(-60.0), series(-60.0, 140.0, 0.25), vec![Correlators]),
        "fig1_right" => Scenario::base(name, fig2(0.0), series(0.0, 140.0, 0.25), vec![Correlators]),
        "fig2_left" => Scenario::base(name, fig2(-60.0), series(-60.0, 140.0, 0.25), ent),
        "fig2_right" => Scenario::base(name, fig2(-10.0), series(-10.0, 140.0, 0.25), ent),
        "fig3_left" => {
            let t0 = -2.0 / 1e-5;
            Scenario::base(name, fig3(t0), series(t0, 4e5, 500.0), ent)
        }
        "fig3_right" => {
            let t0 = -1.0 / (4.0 * 1e-5);
            Scenario::base(name, fig3(t0), series(t0, 4e5, 500.0), ent)
        }
        "fig4" => Scenario::base(name, ModelParams::new(0.1, 1.3, 1.0, -60.0), series(-60.0, 140.0, 0.25), ent),
        "fig5" => Scenario::base(name, fig2(-60.0), series(-60.0, 140.0, 0.25), vec![CMinus, RdmElements]),
        "fig6" => {
            let mut s = Scenario::base(name, fig3(0.0), series(0.0, 50.0, 0.25), vec![TdptElements]);
            s.tdpt_schemes =
                vec![RegulatorKind::OriginalEps, RegulatorKind::ModifiedEpsPrime, RegulatorKind::ShiftedBounds];
            s.tdpt_lambda = 14.0;
            s
        }
        "fig7" => {
            let eps = (-8.0f64).exp();
            let mut s = Scenario::base(
                name,
                ModelParams::new(0.01, 1.3, 1.0, -10.0),
                Sweep::Field { lo: -15.0, hi: 15.0, n: 121, eps },
                vec![Wightman],
            );
            // integration-domain borders: switch-on, ridge entry, ridge half-width, last frame
            s.annotations = vec![-10.0, 0.0, ridge_width(1.0, eps)?, 15.0];
            s
        }
        "alpha_beta_grid" => {
            let p = fig2(-60.0);
            let w = p.omega_r().sqrt();
            Scenario::base(
                name,
                p,
                Sweep::AlphaBetaGrid { alpha: (0.5 * w, 2.0 * w), beta: (0.5 * w, 2.0 * w), n: 5, tau: (-60.0, 140.0), tau_n: 201 },
                vec![Sigma, CMinus],
            )
        }
        _ => return Err(Error::UnknownPreset(name.to_string())),
    };
    Ok(sc)
}

/// Rows of numbers under a header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    /// 17 significant digits, so thresholds applied downstream are reproducible.
    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| fmt17(*v)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

fn fmt17(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// Sidecar record: the scenario itself plus provenance of the run.
pub fn metadata(s: &Scenario, t: &Table) -> String {
    let mut m = s.to_text();
    let _ = writeln!(m, "version = {VERSION}");
    let _ = writeln!(m, "csv_digits = 17");
    let _ = writeln!(m, "rows = {}", t.rows.len());
    let _ = writeln!(m, "columns = {}", t.header.join(", "));
    m
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
}

fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![(lo * hi).sqrt()];
    }
    (0..n).map(|i| if i + 1 == n { hi } else { lo * (hi / lo).powf(i as f64 / (n - 1) as f64) }).collect()
}

fn state(s: &Scenario, p: &ModelParams, tau: f64) -> Result<(CorrelatorSet, CovarianceMatrix)> {
    let c = match s.pipeline {
        Pipeline::Exact => correlator_set(p, tau, s.quad_tol)?,
        Pipeline::Weak => correlator_set_weak(p, tau)?,
    };
    let v = covariance(&c, p.hbar)?;
    Ok((c, v))
}

fn scheme_for(kind: RegulatorKind, p: &ModelParams, lambda: f64) -> RegulatorScheme {
    let e = p.eps_for(lambda);
    match kind {
        RegulatorKind::OriginalEps => RegulatorScheme::original(e),
        RegulatorKind::ModifiedEpsPrime => RegulatorScheme::modified(e),
        RegulatorKind::ShiftedBounds => RegulatorScheme::shifted(e, e),
    }
}

fn time_header(s: &Scenario) -> Vec<String> {
    let mut h = vec!["tau".to_string()];
    for o in &s.outputs {
        match o {
            Output::CMinus => h.extend(["c_minus", "c_plus"].map(String::from)),
            Output::Sigma => h.push("sigma".into()),
            Output::LogNeg => h.push("log_neg".into()),
            Output::Correlators => h.extend(
                ["qq_aa", "pp_aa", "qp_aa", "qq_bb", "pp_bb", "qp_bb", "qq_ab", "qp_ab", "pq_ab", "pp_ab"].map(String::from),
            ),
            Output::RdmElements => h.extend(
                ["rdm_r1100_abs", "rdm_r1010_abs", "rdm_r0000", "rdm_r1111", "rdm_trace"].map(String::from),
            ),
            Output::TdptElements => {
                for k in &s.tdpt_schemes {
                    h.push(format!("tdpt_r1010_{}", scheme_name(*k)));
                }
                h.extend(["tdpt_r1001", "tdpt_r1100_abs", "tdpt_r1111"].map(String::from));
            }
            Output::Wightman => {}
        }
    }
    h
}

fn time_row(s: &Scenario, tau: f64) -> Result<Vec<f64>> {
    let p = &s.params;
    let needs_state = s.outputs.iter().any(|o| !matches!(o, Output::TdptElements | Output::Wightman));
    let st = if needs_state { Some(state(s, p, tau)?) } else { None };
    let rep = match &st {
        Some((_, v)) if s.outputs.iter().any(|o| matches!(o, Output::CMinus | Output::Sigma | Output::LogNeg)) => {
            Some(report(v, p.hbar)?)
        }
        _ => None,
    };
    let mut row = vec![tau];
    for o in &s.outputs {
        match o {
            Output::CMinus => {
                let r = rep.as_ref().expect("report");
                row.extend([r.c_minus, r.c_plus]);
            }
            Output::Sigma => row.push(rep.as_ref().expect("report").sigma),
            Output::LogNeg => row.push(rep.as_ref().expect("report").e_n),
            Output::Correlators => {
                let c = &st.as_ref().expect("state").0;
                row.extend([c.qq_aa, c.pp_aa, c.qp_aa, c.qq_bb, c.pp_bb, c.qp_bb, c.qq_ab, c.qp_ab, c.pq_ab, c.pp_ab]);
            }
            Output::RdmElements => {
                let v = &st.as_ref().expect("state").1;
                let r = truncated_rdm(&gtilde_assemble(v, p)?, p)?;
                row.extend([r.r1100().norm(), r.r1010().norm(), r.r0000().re, r.r1111().re, r.trace()]);
            }
            Output::TdptElements => {
                let mut first = None;
                for k in &s.tdpt_schemes {
                    let sch = scheme_for(*k, p, s.tdpt_lambda);
                    first.get_or_insert(sch);
                    row.push(tdpt_element(p, Which::R1010, tau, sch, s.quad_tol)?.value.re);
                }
                // cross channels at zero regulator
                let cross = scheme_for(RegulatorKind::ModifiedEpsPrime, p, s.tdpt_lambda);
                row.push(tdpt_element(p, Which::R1001, tau, cross, s.quad_tol)?.value.re);
                row.push(tdpt_element(p, Which::R1100, tau, cross, s.quad_tol)?.value.norm());
                row.push(tdpt_r1111(p, tau, first.unwrap_or(cross), s.quad_tol)?.re);
            }
            Output::Wightman => {}
        }
    }
    Ok(row)
}

fn c_minus_at(s: &Scenario, p: &ModelParams, tau: f64) -> Result<f64> {
    Ok(report(&state(s, p, tau)?.1, p.hbar)?.c_minus)
}

/// Evaluate `f` at every sweep point in parallel; rows come back in sweep order.
fn sweep_rows<F>(xs: &[f64], f: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync,
{
    let out: Vec<Result<Vec<f64>>> = xs.par_iter().map(|&x| f(x)).collect();
    out.into_iter()
        .enumerate()
        .map(|(index, r)| r.map_err(|e| Error::SweepPoint { index, x: xs[index], source: Box::new(e) }))
        .collect()
}

pub fn run_scenario(s: &Scenario) -> Result<Table> {
    s.validate()?;
    match s.sweep {
        Sweep::TimeSeries { start, end, n } => {
            let xs = linspace(start, end, n);
            Ok(Table { header: time_header(s), rows: sweep_rows(&xs, |t| time_row(s, t))? })
        }
        Sweep::WindowSearch { start, end, n } => window_search(s, start, end, n),
        Sweep::AlphaBetaGrid { alpha, beta, n, tau, tau_n } => {
            let ts = linspace(tau.0, tau.1, tau_n);
            let mut header = vec!["alpha".to_string(), "beta".to_string()];
            for o in &s.outputs {
                match o {
                    Output::CMinus => header.extend(["c_minus_min", "tau_c_minus_min"].map(String::from)),
                    Output::Sigma => header.extend(["sigma_min", "tau_sigma_min"].map(String::from)),
                    Output::LogNeg => header.push("log_neg_max".into()),
                    _ => {}
                }
            }
            let pts: Vec<(f64, f64)> = geomspace(alpha.0, alpha.1, n)
                .into_iter()
                .flat_map(|al| geomspace(beta.0, beta.1, n).into_iter().map(move |be| (al, be)))
                .collect();
            let idx: Vec<f64> = (0..pts.len()).map(|i| i as f64).collect();
            let rows = sweep_rows(&idx, |i| {
                let (al, be) = pts[i as usize];
                let p = s.params.with_widths(al, be);
                let mut best_c = (f64::INFINITY, f64::NAN);
                let mut best_s = (f64::INFINITY, f64::NAN);
                let mut max_en = 0.0f64;
                for &t in &ts {
                    let r = report(&state(s, &p, t)?.1, p.hbar)?;
                    if r.c_minus < best_c.0 {
                        best_c = (r.c_minus, t);
                    }
                    if r.sigma < best_s.0 {
                        best_s = (r.sigma, t);
                    }
                    max_en = max_en.max(r.e_n);
                }
                let mut row = vec![al, be];
                for o in &s.outputs {
                    match o {
                        Output::CMinus => row.extend([best_c.0, best_c.1]),
                        Output::Sigma => row.extend([best_s.0, best_s.1]),
                        Output::LogNeg => row.push(max_en),
                        _ => {}
                    }
                }
                Ok(row)
            })?;
            Ok(Table { header, rows })
        }
        Sweep::Field { lo, hi, n, eps } => {
            let xs = linspace(lo, hi, n);
            let p = &s.params;
            let rows = sweep_rows(&xs, |sv| {
                Ok(xs.iter().flat_map(|&sp| [sv, sp, wightman_cross(sv, sp, p.a, p.hbar, eps).norm()]).collect())
            })?;
            // one (s, s') point per row
            let rows = rows.into_iter().flat_map(|r| r.chunks(3).map(<[f64]>::to_vec).collect::<Vec<_>>()).collect();
            Ok(Table { header: ["s", "s_prime", "abs_wightman"].map(String::from).to_vec(), rows })
        }
    }
}

fn window_search(s: &Scenario, start: f64, end: f64, n: usize) -> Result<Table> {
    let p = &s.params;
    let half = 0.5 * p.hbar;
    let xs = linspace(start, end, n);
    let cs = sweep_rows(&xs, |t| Ok(vec![c_minus_at(s, p, t)? - half]))?;
    let mut rows = Vec::new();
    for i in 1..xs.len() {
        let (f0, f1) = (cs[i - 1][0], cs[i][0]);
        if (f0 >= 0.0) == (f1 >= 0.0) {
            continue;
        }
        let (mut lo, mut hi, mut flo) = (xs[i - 1], xs[i], f0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= 1e-9 * mid.abs().max(1.0) {
                break;
            }
            let fm = c_minus_at(s, p, mid)? - half;
            if (fm >= 0.0) == (flo >= 0.0) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        let direction = if f0 >= 0.0 { -1.0 } else { 1.0 };
        rows.push(vec![rows.len() as f64, 0.5 * (lo + hi), direction]);
    }
    Ok(Table { header: ["crossing", "tau", "direction"].map(String::from).to_vec(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip_through_text() {
        for name in PRESETS {
            let s = figure_preset(name).unwrap();
            s.validate().unwrap();
            let back = Scenario::parse(&s.to_text()).unwrap();
            assert_eq!(back, s, "{name}");
        }
        assert!(matches!(figure_preset("fig9"), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn caption_parameters() {
        let p = figure_preset("fig4").unwrap().params;
        assert_eq!((p.gamma, p.omega, p.a, p.hbar, p.tau0), (0.1, 1.3, 1.0, 1.0, -60.0));
        assert_eq!((p.lambda0, p.lambda1), (20.0, 20.0));
        assert_eq!(figure_preset("fig3_left").unwrap().params.tau0, -2.0 / 1e-5);
        assert_eq!(figure_preset("fig3_right").unwrap().params.tau0, -1.0 / (4.0 * 1e-5));
        let p = figure_preset("fig1_right").unwrap().params;
        assert_eq!((p.gamma, p.omega, p.a, p.tau0), (0.01, 1.3, 2.0, 0.0));
        let p = figure_preset("fig2_left").unwrap().params;
        assert!((p.alpha - p.omega_r().sqrt()).abs() < 1e-15 && p.alpha == p.beta);
    }

    #[test]
    fn parse_errors() {
        let ok = "gamma = 0.01\nomega = 1.3\na = 2\ntau0 = -10 # switch-on\ntau_start = -10\ntau_end = 0\nn_points = 3\noutputs = c_minus\n";
        let s = Scenario::parse(ok).unwrap();
        assert_eq!(s.sweep, Sweep::TimeSeries { start: -10.0, end: 0.0, n: 3 });
        for bad in [
            ok.replace("n_points = 3", "n_points = 1"),
            ok.replace("outputs = c_minus", "outputs = "),
            ok.replace("tau_start = -10", "tau_start = -11"),
            ok.replace("gamma = 0.01", "gamma = x"),
            format!("{ok}bogus = 1\n"),
            format!("{ok}gamma = 0.02\n"),
            ok.replace("outputs = c_minus", "outputs = entropy"),
        ] {
            assert!(Scenario::parse(&bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn degenerate_series_gives_identical_rows() {
        let mut s = figure_preset("fig2_right").unwrap();
        s.sweep = Sweep::TimeSeries { start: -10.0, end: -10.0, n: 2 };
        let t = run_scenario(&s).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.rows[0], t.rows[1]);
        assert_eq!(t.header, ["tau", "c_minus", "c_plus", "sigma", "log_neg"]);
    }

    #[test]
    fn csv_is_deterministic_and_full_precision() {
        let mut s = figure_preset("fig2_left").unwrap();
        s.sweep = Sweep::TimeSeries { start: 0.0, end: 40.0, n: 9 };
        let a = run_scenario(&s).unwrap().to_csv();
        let b = run_scenario(&s).unwrap().to_csv();
        assert_eq!(a, b);
        let line = a.lines().nth(2).unwrap();
        let cell = line.split(',').nth(1).unwrap();
        assert_eq!(cell.split('e').next().unwrap().replace(['-', '.'], "").len(), 17, "{cell}");
    }

    #[test]
    fn failing_point_is_identified() {
        let mut s = figure_preset("fig6").unwrap();
        s.tdpt_schemes = vec![RegulatorKind::ShiftedBounds];
        // the shift exceeds the elapsed time at the second point
        s.sweep = Sweep::TimeSeries { start: 0.0, end: 1e-12, n: 3 };
        match run_scenario(&s) {
            Err(Error::SweepPoint { index, .. }) => assert_eq!(index, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn window_search_recovers_fig_two() {
        let mut s = figure_preset("fig2_left").unwrap();
        s.sweep = Sweep::WindowSearch { start: 0.0, end: 140.0, n: 141 };
        let t = run_scenario(&s).unwrap();
        let taus = t.column("tau").unwrap();
        let dirs = t.column("direction").unwrap();
        assert_eq!(dirs, [-1.0, 1.0]);
        assert!((taus[0] - 19.0).abs() < 2.0 && (taus[1] - 80.0).abs() < 4.0, "{taus:?}");
    }

    #[test]
    fn field_grid_layout() {
        let mut s = figure_preset("fig7").unwrap();
        s.sweep = Sweep::Field { lo: -1.0, hi: 1.0, n: 3, eps: 0.0 };
        let t = run_scenario(&s).unwrap();
        assert_eq!(t.rows.len(), 9);
        assert_eq!(&t.rows[1][..2], &[-1.0, 0.0]);
        let ann = figure_preset("fig7").unwrap().annotations;
        assert!((ann[2] - 8.69).abs() < 0.01);
    }
}
