use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use super::parse::parse;
use super::SessionConfig;
use crate::endokit::{classify, Endo};
use crate::exactnum::fmt_rational;
use crate::groupkit::{h_descriptor, invariants, nm_type, GroupDesc};
use crate::inertia::{bounded_split, decompose, is_inertial, ui_class_in_h, Verdict, Violation, WitnessHint};
use crate::linmap::{growth_bound_check, max_inert_codim, parse_matrix, scalar_defect, DEFAULT_BUDGET};
use crate::oracle::{fs_profile, inertness_profile, witness_search, VerdictHint};

/// Witness levels tried by `oracle` unless `--budget` says otherwise.
pub const DEFAULT_WITNESS_LEVELS: u64 = 8;

/// Compact JSON with object keys in byte order.
pub fn canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write(v, &mut out);
    out
}

fn write(v: &Value, out: &mut String) {
    match v {
        Value::Array(xs) => {
            out.push('[');
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write(x, out);
            }
            out.push(']');
        }
        Value::Object(m) => {
            let sorted: BTreeMap<&String, &Value> = m.iter().collect();
            out.push('{');
            for (i, (k, x)) in sorted.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write(x, out);
            }
            out.push('}');
        }
        scalar => out.push_str(&scalar.to_string()),
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn analyze_group(name: &str, g: &GroupDesc) -> Value {
    let inv = invariants(g);
    let primes: Map<String, Value> = inv
        .primes
        .iter()
        .map(|(p, d)| {
            (
                p.to_string(),
                json!({
                    "max_k": d.max_k, "eps_k": d.eps_k, "d": d.d.to_string(), "s_rank": d.s_rank,
                    "e": d.e.to_string(), "eps": d.eps.to_string(), "c": d.c, "critical": d.critical,
                }),
            )
        })
        .collect();
    json!({
        "group": name,
        "blocks": g.blocks().iter().map(|b| format!("{} = {}", b.name, b.kind)).collect::<Vec<_>>(),
        "invariants": {
            "r0": inv.r0.to_string(), "periodic": inv.periodic, "ftfr": inv.ftfr,
            "pi0": inv.pi0.to_string(), "pi_star": inv.pi_star.to_string(), "pi_c": inv.pi_c.to_string(),
            "pi_mult": inv.pi_mult.iter().map(|p| p.get()).collect::<Vec<_>>(),
            "primes": primes,
        },
        "h_descriptor": h_descriptor(g).map(|h| h.to_string()).unwrap_or_else(|e| format!("error: {e}")),
        "nm_type": match nm_type(g) {
            Ok(t) => Value::Object(t.0.iter().map(|(p, c)| (p.to_string(), json!(c))).collect()),
            Err(e) => Value::String(format!("error: {e}")),
        },
    })
}

fn hint_text(g: &GroupDesc, h: &WitnessHint) -> String {
    let b = |i: usize| g.block(i).name.clone();
    let c = |x: &crate::groupkit::Coord| format!("{}.{}", b(x.block), x.copy);
    match h {
        WitnessHint::Rank { v } => {
            let parts: Vec<String> = v.iter().map(|(x, q)| format!("{}: {}", c(x), fmt_rational(q))).collect();
            format!("rank({})", parts.join(", "))
        }
        WitnessHint::Diagonal { a, b: bb } => format!("diagonal({}, {})", b(*a), b(*bb)),
        WitnessHint::Graph { src, dst } => format!("graph({} -> {})", c(src), c(dst)),
        WitnessHint::PruferLayer { block, a, b: y } => format!("prufer-layer({}.{a} + {}.{y})", b(*block), b(*block)),
        WitnessHint::TauSource { src, dst } => format!("tau-source({} -> {})", c(src), c(dst)),
    }
}

fn violation_value(g: &GroupDesc, v: &Violation) -> Value {
    json!({
        "kind": v.kind.name(),
        "blocks": v.blocks.iter().map(|i| g.block(*i).name.clone()).collect::<Vec<_>>(),
        "prime": v.prime.map(|p| p.get()),
        "hint": hint_text(g, &v.hint),
    })
}

fn verdict_value(g: &GroupDesc, v: &Verdict) -> Value {
    match v {
        Verdict::Inertial(c) => {
            let per_prime: Map<String, Value> = c
                .per_prime
                .iter()
                .map(|(p, pc)| {
                    (
                        p.to_string(),
                        json!({
                            "alpha_cyc": pc.alpha_cyc.as_ref().map(|r| r.to_string()),
                            "alpha_div": pc.alpha_div.as_ref().map(fmt_rational),
                            "bridged": pc.bridged,
                        }),
                    )
                })
                .collect();
            json!({
                "verdict": "inertial",
                "certificate": {
                    "r": c.r.as_ref().map(fmt_rational),
                    "pi": c.pi.iter().map(|p| p.get()).collect::<Vec<_>>(),
                    "per_prime": per_prime,
                    "exempt_blocks": c.exempt_blocks.iter().map(|i| g.block(*i).name.clone()).collect::<Vec<_>>(),
                },
            })
        }
        Verdict::NotInertial(vs) => json!({
            "verdict": "not-inertial",
            "violations": vs.iter().map(|v| violation_value(g, v)).collect::<Vec<_>>(),
        }),
    }
}

fn classify_value(phi: &Endo) -> Value {
    let c = classify(phi);
    json!({
        "finitary": c.finitary,
        "multiplication": c.multiplication.as_ref().map(|m| m.to_string()),
        "quasi": c.quasi.as_ref().map(|q| format!("quasi({}, {:?}, {})", q.r, q.pi.iter().map(|p| p.get()).collect::<Vec<_>>(), q.mult)),
        "semi": c.semi.as_ref().map(|q| format!("semi({}, {:?}, {})", q.r, q.pi.iter().map(|p| p.get()).collect::<Vec<_>>(), q.mult)),
        "mini": c.mini.as_ref().map(|m| format!("mini({}, {:?})", m.n, m.pi.iter().map(|p| p.get()).collect::<Vec<_>>())),
        "fm_split": c.fm.is_some(),
    })
}

fn check_endo(name: &str, phi: &Endo) -> Value {
    let g = phi.group();
    let mut v = verdict_value(g, &is_inertial(phi));
    v["endo"] = json!(name);
    v["group"] = json!(g.name());
    v["classify"] = classify_value(phi);
    v
}

fn decompose_endo(name: &str, phi: &Endo) -> Value {
    let verdict = is_inertial(phi);
    let Some(cert) = verdict.certificate() else {
        return json!({ "endo": name, "verdict": "not-inertial", "decomposition": null });
    };
    let d = match decompose(phi, cert) {
        Ok(d) => d,
        Err(e) => return json!({ "endo": name, "verdict": "inertial", "error": e.to_string() }),
    };
    let checks = d.checks(phi);
    let bounded = bounded_split(phi).map(|(nm, fin)| json!({ "nm": nm.to_string(), "fin": fin.to_string() }));
    json!({
        "endo": name,
        "verdict": "inertial",
        "decomposition": {
            "sm": d.sm.to_string(), "ui": d.ui.to_string(), "nm": d.nm.to_string(),
            "phi1": d.phi1.to_string(), "phi2": d.phi2.to_string(),
        },
        "checks": {
            "sum_exact": checks.sum_exact, "sm_semi": checks.sm_semi,
            "nm_mini": checks.nm_mini, "ui_uniform": checks.ui_uniform,
        },
        "ui_class": ui_class_in_h(&d.ui).map(|h| h.value.to_string()).unwrap_or_else(|e| format!("error: {e}")),
        "bounded_split": bounded,
    })
}

/// Oracle evidence for one endo and whether it contradicts the verdict.
fn oracle_endo(cfg: &SessionConfig, name: &str, phi: &Endo) -> Result<(Value, bool), String> {
    let verdict = is_inertial(phi);
    let inertial = verdict.is_inertial() != cfg.inject_wrong_verdict;
    let budget = cfg.budget.unwrap_or(DEFAULT_WITNESS_LEVELS).min(u64::from(u32::MAX)) as u32;
    let g = phi.group();
    let mut out = json!({ "endo": name, "verdict": if inertial { "inertial" } else { "not-inertial" } });
    let contradiction = if inertial {
        let ev = inertness_profile(phi, &cfg.levels, cfg.samples, cfg.seed, cfg.enumerate_all, cfg.exec)
            .map_err(|e| e.to_string())?;
        let bad = ev.verdict_hint != VerdictHint::Stable;
        out["profile"] = to_value(&ev);
        bad
    } else {
        let hint = verdict.violations().first().map(|v| v.hint.clone());
        let fam = witness_search(phi, hint.as_ref(), budget).map_err(|e| e.to_string())?;
        let bad = fam.is_none();
        out["witness"] = match &fam {
            Some(f) => json!({
                "template": hint.as_ref().map(|h| hint_text(g, h)).unwrap_or_else(|| f.template.clone()),
                "prime": f.prime,
                "indices": f.indices.iter().map(|(n, i)| json!([n, i.to_string()])).collect::<Vec<_>>(),
                "top": f.top.to_string(),
            }),
            None => Value::Null,
        };
        bad
    };
    if g.is_periodic() {
        let fs = fs_profile(phi, &cfg.levels, cfg.samples.min(50), cfg.seed, cfg.exec).map_err(|e| e.to_string())?;
        out["fs"] = to_value(&fs);
    }
    out["contradiction"] = json!(contradiction);
    Ok((out, contradiction))
}

pub(super) fn document(cfg: &SessionConfig, text: &str) -> Result<(Value, bool), String> {
    let doc = parse(text).map_err(|e| e.to_string())?;
    if cfg.command == super::Command::Analyze {
        let groups: Vec<Value> = doc.groups.iter().map(|(n, g)| analyze_group(n, g)).collect();
        return Ok((Value::Array(groups), false));
    }
    let endos = doc.validated().map_err(|e| e.to_string())?;
    if let Some(want) = &cfg.endo {
        if !endos.iter().any(|(n, _)| n == want) {
            return Err(format!("no endo named {want:?}"));
        }
    }
    let selected = endos.iter().filter(|(n, _)| cfg.endo.as_ref().is_none_or(|w| w == n));
    let mut out = Vec::new();
    let mut bad = false;
    for (name, phi) in selected {
        out.push(match cfg.command {
            super::Command::Check => check_endo(name, phi),
            super::Command::Decompose => decompose_endo(name, phi),
            super::Command::Oracle => {
                let (v, b) = oracle_endo(cfg, name, phi)?;
                bad |= b;
                v
            }
            super::Command::Analyze | super::Command::Defect => unreachable!("handled elsewhere"),
        });
    }
    Ok((Value::Array(out), bad))
}

pub(super) fn defect(cfg: &SessionConfig, text: &str) -> Result<(Value, bool), String> {
    let field = cfg.field.as_deref().ok_or("defect needs --field")?;
    let m = parse_matrix(field, text)?;
    let side = |lambda_zero: bool| -> Result<Value, String> {
        let d = scalar_defect(&m, lambda_zero).map_err(|e| e.to_string())?;
        Ok(json!({
            "lambda": d.lambda.as_ref().map(fmt_rational),
            "defect": d.defect,
            "finitary_part": d.finitary_part.to_string(),
        }))
    };
    let inert = match max_inert_codim(&m, cfg.budget.unwrap_or(DEFAULT_BUDGET), cfg.exec) {
        Ok(r) => to_value(&r),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let growth = growth_bound_check(&m, cfg.samples, cfg.seed, cfg.exec).map_err(|e| e.to_string())?;
    let bad = !growth.holds();
    Ok((
        json!({
            "field": m.field().to_string(),
            "n": m.dim(),
            "matrix": m.to_string(),
            "scalar_defect": side(false)?,
            "scalar_defect_nonzero": side(true)?,
            "max_inert_codim": inert,
            "growth": to_value(&growth),
        }),
        bad,
    ))
}
