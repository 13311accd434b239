//! The eval command: one functional applied to the pieces of a bundle,
//! printed as a single JSON object.

use olk_core::envelope::{envelope_modular_p, envelope_norm, fundamental_g, fundamental_m, fundamental_m_env};
use olk_core::duality::orlicz_norm_conjugate;
use olk_core::modular::{luxemburg_norm, modular_iv, modular_m, seq_modular_iv};
use olk_core::orlicz::IndexConfig;
use olk_core::rearrange::{decreasing_rearrangement, dist, seq_rearrangement};
use olk_core::{ExtReal64, StepFn64};
use serde_json::{json, Value};

use crate::spec::{Bundle, Fun};
use crate::{core_err, CliError};

pub const FUNCTIONALS: &[&str] = &[
    "rearrange",
    "dist",
    "modular-M",
    "norm-luxemburg",
    "envelope-P",
    "norm-envelope",
    "orlicz-norm",
    "fundamental-M",
    "fundamental-G",
    "fundamental-env",
    "conjugate",
    "indices",
];

/// Selection knobs from the command line; bundle fields fill the gaps.
#[derive(Debug, Default, Clone)]
pub struct EvalSelect {
    pub function: Option<String>,
    pub t: Option<f64>,
    pub tol: Option<f64>,
}

/// Extended reals print as numbers, with infinity spelled `"inf"`.
pub fn ext_json(x: ExtReal64) -> Value {
    match x.finite() {
        Some(v) => json!(v),
        None => json!("inf"),
    }
}

pub fn step_json(f: &StepFn64) -> Value {
    // Infinite endpoints become the token "inf"; serde_json would
    // otherwise null them out.
    let breaks: Vec<Value> = f.breakpoints().iter().map(|&b| ext_json(b.into())).collect();
    json!({ "breakpoints": breaks, "values": f.values() })
}

fn scalar_t(bundle: &Bundle, sel: &EvalSelect, what: &str) -> Result<f64, CliError> {
    sel.t
        .or(bundle.t)
        .ok_or_else(|| CliError::User(format!("{what} needs a scalar: set \"t\" in the bundle or pass --t")))
}

fn solver_tol(bundle: &Bundle, sel: &EvalSelect, default: f64) -> f64 {
    sel.tol.or(bundle.tol).unwrap_or(default)
}

pub fn run_eval(bundle: &Bundle, functional: &str, sel: &EvalSelect) -> Result<Value, CliError> {
    let fun = || bundle.function(sel.function.as_deref());
    match functional {
        "rearrange" => Ok(match fun()? {
            Fun::Seq(x) => {
                json!({ "functional": functional, "entries": seq_rearrangement(&x).entries() })
            }
            Fun::Step(f) => {
                let mut out = step_json(&decreasing_rearrangement(&f));
                out["functional"] = json!(functional);
                out
            }
        }),
        "dist" => {
            let s = scalar_t(bundle, sel, "dist")?;
            let f = fun()?.to_step();
            Ok(json!({ "functional": functional, "s": s, "value": ext_json(dist(&f, s)) }))
        }
        "modular-M" => {
            let phi = bundle.phi()?;
            // With an explicit v in the bundle the pairing form is meant;
            // otherwise the modular pairs f* against the weight.
            if let Some(v) = bundle.function_opt("v")? {
                let value = match (fun()?, v) {
                    (Fun::Seq(x), Fun::Seq(vs)) => seq_modular_iv(&x, &vs, &phi),
                    (x, vs) => modular_iv(&x.to_step(), &vs.to_step(), &phi).map_err(core_err)?,
                };
                return Ok(json!({ "functional": functional, "form": "pairing", "value": ext_json(value) }));
            }
            let w = bundle.weight()?;
            let value = modular_m(&fun()?.to_step(), &w, &phi).map_err(core_err)?;
            Ok(json!({ "functional": functional, "value": ext_json(value) }))
        }
        "norm-luxemburg" => {
            let (phi, w) = (bundle.phi()?, bundle.weight()?);
            let value = luxemburg_norm(&fun()?.to_step(), &w, &phi).map_err(core_err)?;
            Ok(json!({ "functional": functional, "value": ext_json(value) }))
        }
        "envelope-P" => {
            let (phi, w) = (bundle.phi()?, bundle.weight()?);
            let tol = solver_tol(bundle, sel, 1e-6);
            let sol = envelope_modular_p(&fun()?.to_step(), &w, &phi, tol).map_err(core_err)?;
            Ok(json!({
                "functional": functional,
                "value": ext_json(sol.value),
                "gap": sol.gap,
                "lower": ext_json(sol.lower),
                "upper": ext_json(sol.upper),
                "iterations": sol.iterations,
                "minimizer": step_json(&sol.minimizer),
            }))
        }
        "norm-envelope" => {
            let (phi, w) = (bundle.phi()?, bundle.weight()?);
            let tol = solver_tol(bundle, sel, 1e-6);
            let value = envelope_norm(&fun()?.to_step(), &w, &phi, tol).map_err(core_err)?;
            Ok(json!({ "functional": functional, "value": ext_json(value) }))
        }
        "orlicz-norm" => {
            let (phi, w) = (bundle.phi()?, bundle.weight()?);
            let tol = solver_tol(bundle, sel, 1e-9);
            let res = orlicz_norm_conjugate(&fun()?.to_step(), &w, &phi, tol).map_err(core_err)?;
            Ok(json!({ "functional": functional, "value": ext_json(res.value), "scaling": res.scaling }))
        }
        "fundamental-M" => {
            let (phi, w) = (bundle.phi()?, bundle.weight()?);
            let t = scalar_t(bundle, sel, functional)?;
            let value = fundamental_m(t, &w, &phi).map_err(core_err)?;
            Ok(json!({ "functional": functional, "t": t, "value": ext_json(value) }))
        }
        "fundamental-G" => {
            let (phi, w) = (bundle.phi()?, bundle.weight()?);
            let t = scalar_t(bundle, sel, functional)?;
            let value = fundamental_g(t, &w, &phi).map_err(core_err)?;
            Ok(json!({ "functional": functional, "t": t, "value": value }))
        }
        "fundamental-env" => {
            let (phi, w) = (bundle.phi()?, bundle.weight()?);
            let t = scalar_t(bundle, sel, functional)?;
            let value = fundamental_m_env(t, &w, &phi).map_err(core_err)?;
            Ok(json!({ "functional": functional, "t": t, "value": value }))
        }
        "conjugate" => {
            let phi = bundle.phi()?;
            let t = scalar_t(bundle, sel, "conjugate")?;
            Ok(json!({
                "functional": functional,
                "t": t,
                "value": ext_json(phi.conjugate_value(t)),
                "closed_form": phi.conjugate_fn().is_some(),
            }))
        }
        "indices" => {
            let phi = bundle.phi()?;
            let (alpha, beta) = phi.matuszewska_indices(&IndexConfig::default());
            Ok(json!({ "functional": functional, "alpha": alpha, "beta": beta }))
        }
        other => Err(CliError::User(format!(
            "unknown functional \"{other}\"; expected one of: {}",
            FUNCTIONALS.join(", ")
        ))),
    }
}
