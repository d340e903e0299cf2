//! Single-point reports for the non-sweep subcommands.

use std::io::Write;

use anyhow::Result;
use homophily_core::sir::{dh_ci_sir, solve_final_size};
use homophily_core::statics::{dh_ci_total, dh_slowest_eigenvalue, dh_steady_state};
use homophily_core::steady_state::{classify_stability, solve_steady_state, uniqueness_audit};
use homophily_core::vaccination::{
    dh_mixed, dh_peer, dh_rational, enumerate_peer_equilibria, optimal_vaccination,
    rational_multistart, solve_mixed_equilibrium, solve_rational_equilibria, welfare,
};
use homophily_core::{LinearizedSystem, ModelParams, VaccinationEquilibrium};
use serde_json::{json, Value};

use crate::config::VaccinationSpec;
use crate::emit::{format_f64, Format};
use crate::stochastic::{stochastic_cross_check, CrossCheckSpec};

fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

fn params_json(p: &ModelParams) -> Value {
    json!({"q": p.q(), "h": p.h(), "mu": p.mu(), "x_a": p.x_a(), "x_v": p.x_v(), "r": p.r()})
}

pub fn steady_state(p: &ModelParams) -> Result<Value> {
    let ss = solve_steady_state(p)?;
    let stab = classify_stability(p, &ss);
    let audit = uniqueness_audit(p);
    Ok(json!({
        "params": params_json(p),
        "threshold": num(ss.threshold),
        "kind": format!("{:?}", ss.kind),
        "rho_a": num(ss.state.rho_a),
        "rho_v": num(ss.state.rho_v),
        "rho": num(ss.rho(p)),
        "s_a": num(ss.susceptible.0),
        "s_v": num(ss.susceptible.1),
        "exposure_a": num(ss.exposure.0),
        "exposure_v": num(ss.exposure.1),
        "residual": num(ss.residual),
        "stable": stab.is_stable(),
        "unique": audit.is_unique(),
    }))
}

pub fn cumulative_infection(p: &ModelParams, shock: [f64; 2]) -> Result<Value> {
    let ss = solve_steady_state(p)?;
    let sys = LinearizedSystem::at(p, &ss)?;
    let ci = sys.cumulative_infection(p, shock)?;
    let mut out = json!({
        "params": params_json(p),
        "shock": shock,
        "rho": num(ss.rho(p)),
        "ci_a": num(ci.ci_a),
        "ci_v": num(ci.ci_v),
        "ci": num(ci.total),
        "cr": num(sys.convergence_rate()),
        "cr_discounted": num(sys.discounted_convergence_rate(p.r())),
    });
    if ss.is_interior() {
        let hs = dh_steady_state(p, &ss)?;
        let dec = dh_ci_total(p, &ss, &sys, shock)?;
        let slow = dh_slowest_eigenvalue(p, &ss, &sys)?;
        out["dh"] = json!({
            "rho_a": num(hs.d_rho_a),
            "rho_v": num(hs.d_rho_v),
            "rho": num(hs.d_rho),
            "ci_direct": num(dec.direct),
            "ci_indirect": num(dec.indirect),
            "ci": num(dec.total),
            "slow_eigenvalue_direct": num(slow.direct),
            "slow_eigenvalue": num(slow.total),
        });
    }
    Ok(out)
}

fn equilibrium_json(e: &VaccinationEquilibrium, dh: Option<[f64; 2]>) -> Value {
    json!({
        "class": e.classification.label(),
        "x_a": num(e.x_a),
        "x_v": num(e.x_v),
        "residual": num(e.residual),
        "dh_x_a": dh.map(|d| num(d[0])),
        "dh_x_v": dh.map(|d| num(d[1])),
    })
}

fn with_induced(p: &ModelParams, e: &VaccinationEquilibrium, dh: Option<[f64; 2]>) -> Value {
    let mut v = equilibrium_json(e, dh);
    if let Ok(pe) = p.with_vaccination(e.x_a, e.x_v) {
        if let Ok(ss) = solve_steady_state(&pe) {
            v["rho_a"] = num(ss.state.rho_a);
            v["rho_v"] = num(ss.state.rho_v);
            v["rho"] = num(ss.rho(&pe));
        }
    }
    v
}

pub fn vax_rational(p: &ModelParams, vs: &VaccinationSpec) -> Result<Value> {
    let c = &vs.params;
    let eqs = solve_rational_equilibria(p, c)?;
    let audit = rational_multistart(p, c);
    let list: Vec<Value> = eqs
        .iter()
        .map(|e| with_induced(p, e, dh_rational(p, c, e).ok()))
        .collect();
    Ok(json!({
        "params": params_json(p),
        "k": c.k, "d": c.d,
        "equilibria": list,
        "multistart_spread": num(audit.spread()),
        "multistart_failed": audit.failed,
    }))
}

pub fn vax_peer(p: &ModelParams, vs: &VaccinationSpec) -> Result<Value> {
    let c = &vs.params;
    let en = enumerate_peer_equilibria(p.q(), p.h(), c.k, c.d);
    let list: Vec<Value> = en
        .equilibria
        .iter()
        .map(|e| {
            let dh = e.classification.is_interior().then(|| dh_peer(p.q(), p.h(), c.k, c.d).ok()).flatten();
            with_induced(p, e, dh)
        })
        .collect();
    Ok(json!({
        "params": params_json(p),
        "k": c.k, "d": c.d,
        "equilibria": list,
        "degenerate_patterns": en.degenerate_patterns.iter().map(|c| c.label()).collect::<Vec<_>>(),
    }))
}

pub fn vax_mixed(p: &ModelParams, vs: &VaccinationSpec) -> Result<Value> {
    let c = &vs.params;
    let m = solve_mixed_equilibrium(p, c, vs.variant)?;
    let dh = dh_mixed(p, c, &m).ok();
    Ok(json!({
        "params": params_json(p),
        "k": c.k, "d": c.d,
        "variant": format!("{:?}", m.variant),
        "roots_found": m.roots_found,
        "equilibrium": with_induced(p, &m.equilibrium, dh),
    }))
}

pub fn welfare_report(p: &ModelParams, vs: &VaccinationSpec, shock: [f64; 2]) -> Result<Value> {
    let w = welfare(p, &vs.params, shock)?;
    Ok(json!({
        "params": params_json(p),
        "k": vs.params.k, "d": vs.params.d, "b": vs.params.b,
        "w": num(w.w),
        "w_congestion": num(w.w_congestion),
        "w_utilitarian": num(w.w_utilitarian),
        "rho": num(w.rho),
        "ci": num(w.ci_total),
        "x_star": num(w.x_star),
        "decentralized_gap": num(w.decentralized_gap),
    }))
}

pub fn optimal(k: f64, mu: f64, grid: usize) -> Value {
    let o = optimal_vaccination(k, mu, grid);
    let (x_grid, w_grid) = o
        .curve
        .iter()
        .copied()
        .fold((f64::NAN, f64::NEG_INFINITY), |best, (x, w)| if w > best.1 { (x, w) } else { best });
    json!({
        "k": k, "mu": mu,
        "x_star": num(o.x_star),
        "welfare_star": num(o.welfare_star),
        "x_grid_argmax": num(x_grid),
        "welfare_grid_max": num(w_grid),
        "decentralized": num(o.decentralized),
        "welfare_decentralized": num(o.welfare_decentralized),
    })
}

pub fn sir(p: &ModelParams, seed: f64) -> Result<Value> {
    let fs = solve_final_size(p, seed)?;
    let sens = dh_ci_sir(p, &fs)?;
    Ok(json!({
        "params": params_json(p),
        "seed": seed,
        "ci_a": num(fs.ci_a),
        "ci_v": num(fs.ci_v),
        "ci": num(fs.ci_total),
        "r_a": num(fs.r_a),
        "r_v": num(fs.r_v),
        "residual": num(fs.residual),
        "dh_ci": sens.analytic.map(num),
        "dh_ci_finite_difference": num(sens.finite_difference),
        "certificate": num(sens.certificate),
        "regime_gate": sens.regime_gate,
    }))
}

pub fn cross_check(p: &ModelParams, spec: &CrossCheckSpec) -> Result<Value> {
    let cc = stochastic_cross_check(p, spec)?;
    Ok(json!({
        "params": params_json(p),
        "spec": spec,
        "group_sizes": cc.group_sizes,
        "mean_field": cc.mean_field,
        "mean": cc.mean,
        "extinct": cc.extinct,
        "within_3se": cc.agreeing(3.0),
        "replicates": cc.replicates,
    }))
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, v)| flatten(&key(k), v, out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| flatten(&key(&i.to_string()), v, out)),
        Value::Null => out.push((prefix.into(), String::new())),
        Value::Number(n) => out.push((prefix.into(), n.as_f64().map_or_else(|| n.to_string(), format_f64))),
        Value::Bool(b) => out.push((prefix.into(), b.to_string())),
        Value::String(s) => out.push((prefix.into(), s.clone())),
    }
}

/// JSON as-is, or a two-column `key,value` CSV with dotted keys.
pub fn write_report<W: Write>(v: &Value, format: Format, mut out: W) -> Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, v)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut rows = Vec::new();
            flatten("", v, &mut rows);
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["key", "value"])?;
            for (k, v) in rows {
                w.write_record([k, v])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}
