//! Browser bindings: the log-radius root test, BCH truncation error and a
//! plurisubharmonicity probe. Every entry point returns a JSON string.

use ncpsh::calculus::{psh_sample_test, SampleOutcome, SamplerConfig};
use ncpsh::middle::psh_certificate;
use ncpsh::{expand, lab, parse};
use serde_json::json;
use wasm_bindgen::prelude::*;

pub fn log_radius_json(n: usize) -> Result<String, String> {
    let r = lab::log_radius_experiment(n).map_err(|e| e.to_string())?;
    let roots: Vec<[f64; 2]> = r.root_test.iter().map(|s| [s.n as f64, s.root]).collect();
    Ok(json!({
        "N": r.n,
        "roots": roots,
        "window": r.window,
        "estimate": r.estimate,
        "slope_estimate": r.slope_estimate,
        "radius": r.radius,
        "trace_exactly_zero": r.trace_exactly_zero,
    })
    .to_string())
}

pub fn bch_json(maxdeg: usize, samples: usize, seed: u64) -> Result<String, String> {
    let r = lab::bch_check(maxdeg, samples, seed).map_err(|e| e.to_string())?;
    let pairs = |v: &[lab::BchSample]| v.iter().map(|s| [s.norm_sum, s.error]).collect::<Vec<_>>();
    Ok(json!({
        "maxdeg": r.maxdeg,
        "terms": r.terms,
        "bound": lab::bch_bound(),
        "degree_two_exact": r.degree_two_exact,
        "samples": pairs(&r.samples),
        "sweep": pairs(&r.sweep),
        "max_error": r.max_error,
        "crossover": r.crossover,
    })
    .to_string())
}

pub fn psh_json(expr: &str, d: usize, maxdeg: usize, n: usize, seed: u64) -> Result<String, String> {
    let e = parse(expr).map_err(|e| e.to_string())?;
    let d = d.max(e.nvars()).max(1);
    let s = expand(&e, d, maxdeg).map_err(|e| e.to_string())?;
    let cert = psh_certificate(&s, n, 1e-9).map_err(|e| e.to_string())?;
    let cfg = SamplerConfig { samples: 120, seed, ..SamplerConfig::default() };
    let sampler = match psh_sample_test(&s, &[], &cfg).map_err(|e| e.to_string())? {
        SampleOutcome::NoWitness { evaluated } => json!({ "witness": false, "evaluated": evaluated }),
        SampleOutcome::Witness { z, min_eig, .. } => json!({ "witness": true, "size": z.n(), "min_eig": min_eig }),
    };
    let words: Vec<String> =
        cert.witness.as_ref().map(|w| w.polynomial().into_iter().map(|(word, _)| word).collect()).unwrap_or_default();
    Ok(json!({
        "d": d,
        "terms": s.len(),
        "certified": cert.certified(),
        "status": cert.status,
        "cplus": cert.cplus.min_eig,
        "cminus": cert.cminus.min_eig,
        "witness_words": words,
        "sampler": sampler,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn log_radius(n: usize) -> Result<String, JsValue> {
    log_radius_json(n).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn bch_error(maxdeg: usize, samples: usize, seed: u32) -> Result<String, JsValue> {
    bch_json(maxdeg, samples, seed as u64).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn psh_probe(expr: &str, d: usize, maxdeg: usize, n: usize, seed: u32) -> Result<String, JsValue> {
    psh_json(expr, d, maxdeg, n, seed as u64).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn log_radius_estimate() {
        let v: Value = serde_json::from_str(&log_radius_json(120).unwrap()).unwrap();
        assert!((v["estimate"].as_f64().unwrap() - 0.5).abs() < 0.05);
        assert_eq!(v["roots"].as_array().unwrap().len(), 120);
    }

    #[test]
    fn bch_small_errors() {
        let v: Value = serde_json::from_str(&bch_json(8, 4, 1).unwrap()).unwrap();
        assert_eq!(v["degree_two_exact"], true);
        assert!(v["max_error"].as_f64().unwrap() < 1e-6);
    }

    #[test]
    fn probe_verdicts() {
        let good: Value = serde_json::from_str(&psh_json("x1 x1' + x2' x2", 2, 4, 1, 3).unwrap()).unwrap();
        assert_eq!(good["certified"], true);
        assert_eq!(good["sampler"]["witness"], false);
        let bad: Value = serde_json::from_str(&psh_json("-x1' x1", 1, 4, 1, 3).unwrap()).unwrap();
        assert_eq!(bad["certified"], false);
        assert_eq!(bad["witness_words"][0], "z1");
        assert_eq!(bad["sampler"]["witness"], true);
        assert!(psh_json("x1 +", 1, 4, 1, 3).is_err());
    }
}
