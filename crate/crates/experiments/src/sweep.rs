//! One-parameter sweeps evaluated in parallel, one row per grid point.

use std::fmt;
use std::str::FromStr;

use anyhow::{bail, Result};
use homophily_core::sir::solve_final_size;
use homophily_core::steady_state::solve_steady_state;
use homophily_core::vaccination::{
    enumerate_peer_equilibria, solve_mixed_equilibrium, solve_rational_equilibrium, welfare,
};
use homophily_core::{LinearizedSystem, ModelParams, VaccinationParams};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{VaccinationSpec, VaxModel};

/// Residual bounds above which a row is flagged.
pub const STEADY_STATE_TOL: f64 = 1e-10;
pub const FINAL_SIZE_TOL: f64 = 1e-10;
pub const EQUILIBRIUM_TOL: f64 = 1e-8;

/// Residual columns, written after the requested outputs.
pub const RESIDUAL_COLUMNS: [&str; 3] = ["ss_residual", "fs_residual", "eq_residual"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweptParam {
    H,
    Mu,
    Q,
    XA,
    XV,
    R,
    K,
    D,
    B,
}

impl SweptParam {
    pub fn name(self) -> &'static str {
        match self {
            SweptParam::H => "h",
            SweptParam::Mu => "mu",
            SweptParam::Q => "q",
            SweptParam::XA => "x_a",
            SweptParam::XV => "x_v",
            SweptParam::R => "r",
            SweptParam::K => "k",
            SweptParam::D => "d",
            SweptParam::B => "b",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }

    pub const ALL: [SweptParam; 9] = [
        SweptParam::H,
        SweptParam::Mu,
        SweptParam::Q,
        SweptParam::XA,
        SweptParam::XV,
        SweptParam::R,
        SweptParam::K,
        SweptParam::D,
        SweptParam::B,
    ];

    fn is_cost_side(self) -> bool {
        matches!(self, SweptParam::K | SweptParam::D | SweptParam::B)
    }
}

impl FromStr for SweptParam {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::parse(s).ok_or_else(|| format!("unknown parameter `{s}`"))
    }
}

impl fmt::Display for SweptParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Output quantities. Columns always appear in the order of [`Quantity::ALL`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    RhoA,
    RhoV,
    Rho,
    CiA,
    CiV,
    Ci,
    Cr,
    XAStar,
    XVStar,
    Welfare,
    SirCi,
}

impl Quantity {
    pub const ALL: [Quantity; 11] = [
        Quantity::RhoA,
        Quantity::RhoV,
        Quantity::Rho,
        Quantity::CiA,
        Quantity::CiV,
        Quantity::Ci,
        Quantity::Cr,
        Quantity::XAStar,
        Quantity::XVStar,
        Quantity::Welfare,
        Quantity::SirCi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::RhoA => "rho_a",
            Quantity::RhoV => "rho_v",
            Quantity::Rho => "rho",
            Quantity::CiA => "ci_a",
            Quantity::CiV => "ci_v",
            Quantity::Ci => "ci",
            Quantity::Cr => "cr",
            Quantity::XAStar => "x_a_star",
            Quantity::XVStar => "x_v_star",
            Quantity::Welfare => "welfare",
            Quantity::SirCi => "sir_ci",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|q| q.name() == s)
    }

    fn needs_vaccination(self) -> bool {
        matches!(self, Quantity::XAStar | Quantity::XVStar | Quantity::Welfare)
    }
}

impl FromStr for Quantity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::parse(s).ok_or_else(|| format!("unknown output `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub count: usize,
    pub min: f64,
    pub max: f64,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.min],
            n => (0..n)
                .map(|i| {
                    if i == n - 1 {
                        self.max
                    } else {
                        self.min + (self.max - self.min) * i as f64 / (n - 1) as f64
                    }
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: ModelParams,
    /// Endogenous vaccination; `None` keeps `x_a`, `x_v` from `base`.
    pub vaccination: Option<VaccinationSpec>,
    pub param: SweptParam,
    pub grid: Grid,
    pub outputs: Vec<Quantity>,
    /// Deviation used for cumulative infection.
    pub shock: [f64; 2],
    /// Seed of the SIR final size.
    pub sir_seed: f64,
    pub seed: u64,
}

/// `#`-header metadata. Carries no timestamp so equal specs give equal files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub version: String,
    pub config_sha256: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub value: f64,
    /// One entry per output column; `NaN` when not computed.
    pub values: Vec<f64>,
    /// Steady-state, final-size and equilibrium residuals.
    pub residuals: [f64; 3],
    /// `|`-separated failure codes; empty when the row is clean.
    pub flag: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub param: String,
    pub outputs: Vec<String>,
    pub rows: Vec<Row>,
    pub provenance: Provenance,
}

impl SweepResult {
    /// Header in file order.
    pub fn columns(&self) -> Vec<String> {
        let mut cols = vec![self.param.clone()];
        cols.extend(self.outputs.iter().cloned());
        cols.extend(RESIDUAL_COLUMNS.iter().map(|s| s.to_string()));
        cols.push("flag".into());
        cols
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.outputs.iter().position(|o| o == name)?;
        Some(self.rows.iter().map(|r| r.values[i]).collect())
    }
}

impl SweepSpec {
    /// Outputs deduplicated and in canonical order.
    pub fn columns(&self) -> Vec<Quantity> {
        let mut out = self.outputs.clone();
        out.sort();
        out.dedup();
        out
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.grid;
        if !(g.min.is_finite() && g.max.is_finite()) {
            bail!("grid bounds must be finite");
        }
        if g.count >= 2 && g.max <= g.min {
            bail!("grid must be strictly increasing: min {} >= max {}", g.min, g.max);
        }
        if self.param.is_cost_side() && self.vaccination.is_none() {
            bail!("sweeping `{}` needs a vaccination model", self.param);
        }
        if let Some(q) = self.outputs.iter().find(|q| q.needs_vaccination()) {
            if self.vaccination.is_none() {
                bail!("output `{}` needs a vaccination model", q.name());
            }
        }
        if self.vaccination.is_some() && matches!(self.param, SweptParam::XA | SweptParam::XV) {
            bail!("`{}` is endogenous under a vaccination model", self.param);
        }
        if g.count > 0 {
            for v in [g.min, g.max] {
                self.point(v)?;
            }
        }
        Ok(())
    }

    fn point(&self, v: f64) -> Result<(ModelParams, Option<VaccinationSpec>)> {
        let p = &self.base;
        let mut vax = self.vaccination;
        let base = match self.param {
            SweptParam::H => p.with_h(v)?,
            SweptParam::Mu => p.with_mu(v)?,
            SweptParam::Q => ModelParams::new(v, p.h(), p.mu(), p.x_a(), p.x_v(), p.r())?,
            SweptParam::XA => p.with_vaccination(v, p.x_v())?,
            SweptParam::XV => p.with_vaccination(p.x_a(), v)?,
            SweptParam::R => p.with_r(v)?,
            SweptParam::K | SweptParam::D | SweptParam::B => {
                let spec = vax.as_mut().expect("validated");
                let c = spec.params;
                spec.params = match self.param {
                    SweptParam::K => VaccinationParams::new(v, c.d, c.b)?,
                    SweptParam::D => VaccinationParams::new(c.k, v, c.b)?,
                    _ => VaccinationParams::new(c.k, c.d, v)?,
                };
                *p
            }
        };
        Ok((base, vax))
    }

    /// Hash of the resolved spec, stable across runs and platforms.
    pub fn sha256(&self) -> String {
        let p = &self.base;
        let vax = self.vaccination.map(|v| {
            serde_json::json!({
                "model": v.model,
                "variant": format!("{:?}", v.variant),
                "k": v.params.k, "d": v.params.d, "b": v.params.b,
            })
        });
        let canonical = serde_json::json!({
            "model": {"q": p.q(), "h": p.h(), "mu": p.mu(), "x_a": p.x_a(), "x_v": p.x_v(), "r": p.r()},
            "vaccination": vax,
            "param": self.param,
            "grid": self.grid,
            "outputs": self.columns(),
            "shock": self.shock,
            "sir_seed": self.sir_seed,
            "seed": self.seed,
        });
        let digest = Sha256::digest(canonical.to_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Evaluates every grid point. Failures are recorded in the row's flag.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let columns = spec.columns();
    let rows = spec
        .grid
        .values()
        .into_par_iter()
        .map(|v| evaluate(spec, &columns, v))
        .collect();
    Ok(SweepResult {
        param: spec.param.name().into(),
        outputs: columns.iter().map(|q| q.name().to_string()).collect(),
        rows,
        provenance: Provenance {
            version: env!("CARGO_PKG_VERSION").into(),
            config_sha256: spec.sha256(),
        },
    })
}

struct Flags(Vec<&'static str>);

impl Flags {
    fn push(&mut self, code: &'static str) {
        if !self.0.contains(&code) {
            self.0.push(code);
        }
    }
}

fn evaluate(spec: &SweepSpec, columns: &[Quantity], v: f64) -> Row {
    let mut values = vec![f64::NAN; columns.len()];
    let mut residuals = [f64::NAN; 3];
    let mut flags = Flags(Vec::new());
    let set = |values: &mut Vec<f64>, q: Quantity, x: f64| {
        if let Some(i) = columns.iter().position(|&c| c == q) {
            values[i] = x;
        }
    };
    let wants = |qs: &[Quantity]| qs.iter().any(|q| columns.contains(q));

    let Ok((mut p, vax)) = spec.point(v) else {
        flags.push("invalid_point");
        return finish(v, values, residuals, flags);
    };

    if let Some(vs) = vax {
        match equilibrium(&p, &vs) {
            Ok((x, res)) => {
                residuals[2] = res;
                if res > EQUILIBRIUM_TOL {
                    flags.push("eq_residual");
                }
                set(&mut values, Quantity::XAStar, x[0]);
                set(&mut values, Quantity::XVStar, x[1]);
                match p.with_vaccination(x[0], x[1]) {
                    Ok(q) => p = q,
                    Err(_) => {
                        flags.push("eq_failed");
                        return finish(v, values, residuals, flags);
                    }
                }
            }
            Err(_) => {
                flags.push("eq_failed");
                return finish(v, values, residuals, flags);
            }
        }
    }

    use Quantity::*;
    if wants(&[RhoA, RhoV, Rho, CiA, CiV, Ci, Cr]) {
        match solve_steady_state(&p) {
            Ok(ss) => {
                residuals[0] = ss.residual;
                if ss.residual > STEADY_STATE_TOL {
                    flags.push("ss_residual");
                }
                set(&mut values, RhoA, ss.state.rho_a);
                set(&mut values, RhoV, ss.state.rho_v);
                set(&mut values, Rho, ss.rho(&p));
                if wants(&[CiA, CiV, Ci, Cr]) {
                    match LinearizedSystem::at(&p, &ss) {
                        Ok(sys) => {
                            set(&mut values, Cr, sys.convergence_rate());
                            match sys.cumulative_infection(&p, spec.shock) {
                                Ok(ci) => {
                                    set(&mut values, CiA, ci.ci_a);
                                    set(&mut values, CiV, ci.ci_v);
                                    set(&mut values, Ci, ci.total);
                                }
                                Err(_) => flags.push("ci_failed"),
                            }
                        }
                        Err(_) => flags.push("ci_failed"),
                    }
                }
            }
            Err(_) => flags.push("ss_failed"),
        }
    }
    if let (true, Some(vs)) = (wants(&[Welfare]), vax) {
        match welfare(&p, &vs.params, spec.shock) {
            Ok(w) => set(&mut values, Welfare, w.w),
            Err(_) => flags.push("welfare_failed"),
        }
    }
    if wants(&[SirCi]) {
        match solve_final_size(&p, spec.sir_seed) {
            Ok(fs) => {
                residuals[1] = fs.residual;
                if fs.residual > FINAL_SIZE_TOL {
                    flags.push("fs_residual");
                }
                set(&mut values, SirCi, fs.ci_total);
            }
            Err(_) => flags.push("fs_failed"),
        }
    }
    finish(v, values, residuals, flags)
}

fn finish(value: f64, values: Vec<f64>, residuals: [f64; 3], flags: Flags) -> Row {
    Row {
        value,
        values,
        residuals,
        flag: flags.0.join("|"),
    }
}

/// Vaccination rates and best-response residual for one economy.
///
/// Peer sweeps follow the interior branch when it exists and otherwise the
/// equilibrium with the lowest aggregate vaccination.
fn equilibrium(p: &ModelParams, vs: &VaccinationSpec) -> Result<([f64; 2], f64)> {
    let c = vs.params;
    match vs.model {
        VaxModel::Rational => {
            let e = solve_rational_equilibrium(p, &c)?;
            Ok(([e.x_a, e.x_v], e.residual))
        }
        VaxModel::Peer => {
            let en = enumerate_peer_equilibria(p.q(), p.h(), c.k, c.d);
            let agg = |x: [f64; 2]| p.q() * x[0] + (1.0 - p.q()) * x[1];
            let pick = en
                .equilibria
                .iter()
                .find(|e| e.classification.is_interior())
                .or_else(|| {
                    en.equilibria
                        .iter()
                        .min_by(|a, b| agg([a.x_a, a.x_v]).total_cmp(&agg([b.x_a, b.x_v])))
                });
            match pick {
                Some(e) => Ok(([e.x_a, e.x_v], e.residual)),
                None => bail!("no peer equilibrium"),
            }
        }
        VaxModel::Mixed => {
            let m = solve_mixed_equilibrium(p, &c, vs.variant)?;
            Ok(([m.equilibrium.x_a, m.equilibrium.x_v], m.equilibrium.residual))
        }
    }
}

/// Shape of a sampled curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    /// Rises then falls, turning once in the interior.
    InteriorMaximum(usize),
    /// Falls then rises, turning once in the interior.
    InteriorMinimum(usize),
    None,
}

/// Detects a single interior turning point in `v` (non-finite entries
/// disqualify the curve).
pub fn single_extremum(v: &[f64]) -> Extremum {
    if v.len() < 3 || v.iter().any(|x| !x.is_finite()) {
        return Extremum::None;
    }
    let diffs: Vec<f64> = v.windows(2).map(|w| w[1] - w[0]).filter(|d| *d != 0.0).collect();
    let turns: Vec<usize> = diffs
        .windows(2)
        .enumerate()
        .filter(|(_, w)| (w[0] > 0.0) != (w[1] > 0.0))
        .map(|(i, _)| i)
        .collect();
    if turns.len() != 1 {
        return Extremum::None;
    }
    let (arg_max, arg_min) = argmax_argmin(v);
    if diffs[0] > 0.0 {
        Extremum::InteriorMaximum(arg_max)
    } else {
        Extremum::InteriorMinimum(arg_min)
    }
}

fn argmax_argmin(v: &[f64]) -> (usize, usize) {
    let mut hi = 0;
    let mut lo = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[hi] {
            hi = i;
        }
        if *x < v[lo] {
            lo = i;
        }
    }
    (hi, lo)
}
