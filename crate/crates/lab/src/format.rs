//! JSON file formats for cocycles and Jacobi data.
//!
//! Cocycle:
//! `{"version": "v1", "m", "d", "r", "omega": [..], "entries": [[{"k": [..], "re", "im"}, ..], ..]}`
//! with `entries` holding the m² entries in row-major order, each a list of
//! Fourier terms. Jacobi data carries `band` instead of `m`, the three
//! entry lists `W`, `R`, `D`, and the scalars `lambda` and `E`.

use std::path::Path;

use cocycle_core::cocycle::{Cocycle, Frequency, Term, TrigPoly};
use cocycle_core::models::{sample_gallery, JacobiData, GALLERY};
use num_complex::Complex64;
use serde_json::{Map, Value as Json};

use crate::error::{LabError, LabResult};
use crate::report::float_number;

fn bad(msg: impl Into<String>) -> LabError {
    LabError::Format(msg.into())
}

fn num(v: f64) -> Json {
    Json::Number(float_number(v))
}

fn get<'a>(o: &'a Map<String, Json>, key: &str) -> LabResult<&'a Json> {
    o.get(key).ok_or_else(|| bad(format!("missing field \"{key}\"")))
}

fn as_f64(v: &Json, what: &str) -> LabResult<f64> {
    v.as_f64().ok_or_else(|| bad(format!("\"{what}\" must be a number")))
}

fn as_usize(v: &Json, what: &str) -> LabResult<usize> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| bad(format!("\"{what}\" must be a non-negative integer")))
}

fn check_version(o: &Map<String, Json>) -> LabResult<()> {
    match o.get("version") {
        None => Ok(()),
        Some(Json::String(s)) if s == "v1" => Ok(()),
        Some(v) => Err(bad(format!("unsupported version {v}"))),
    }
}

fn poly_to_json(p: &TrigPoly) -> Json {
    Json::Array(
        p.terms
            .iter()
            .map(|t| {
                let mut o = Map::new();
                o.insert("k".into(), Json::Array(t.k.iter().map(|v| Json::Number((*v).into())).collect()));
                o.insert("re".into(), num(t.coeff.re));
                o.insert("im".into(), num(t.coeff.im));
                Json::Object(o)
            })
            .collect(),
    )
}

fn poly_from_json(v: &Json, d: usize) -> LabResult<TrigPoly> {
    let arr = v.as_array().ok_or_else(|| bad("an entry must be a list of terms"))?;
    let mut terms = Vec::with_capacity(arr.len());
    for t in arr {
        let o = t.as_object().ok_or_else(|| bad("a term must be an object"))?;
        let k = get(o, "k")?
            .as_array()
            .ok_or_else(|| bad("\"k\" must be a list"))?
            .iter()
            .map(|x| x.as_i64().ok_or_else(|| bad("\"k\" entries must be integers")))
            .collect::<LabResult<Vec<i64>>>()?;
        if k.len() != d {
            return Err(bad(format!("mode {k:?} does not have d = {d} components")));
        }
        let re = as_f64(get(o, "re")?, "re")?;
        let im = as_f64(get(o, "im")?, "im")?;
        terms.push(Term { k, coeff: Complex64::new(re, im) });
    }
    Ok(TrigPoly { terms })
}

fn entries_from_json(v: &Json, n: usize, d: usize, what: &str) -> LabResult<Vec<TrigPoly>> {
    let arr = v.as_array().ok_or_else(|| bad(format!("\"{what}\" must be a list")))?;
    if arr.len() != n * n {
        return Err(bad(format!("\"{what}\" needs {} entries, found {}", n * n, arr.len())));
    }
    arr.iter().map(|e| poly_from_json(e, d)).collect()
}

fn header(o: &Map<String, Json>) -> LabResult<(usize, f64, Frequency)> {
    check_version(o)?;
    let d = as_usize(get(o, "d")?, "d")?;
    let r = as_f64(get(o, "r")?, "r")?;
    let omega = get(o, "omega")?
        .as_array()
        .ok_or_else(|| bad("\"omega\" must be a list"))?
        .iter()
        .map(|w| as_f64(w, "omega"))
        .collect::<LabResult<Vec<f64>>>()?;
    if omega.len() != d {
        return Err(bad(format!("omega has {} components but d = {d}", omega.len())));
    }
    Ok((d, r, Frequency::new(&omega)?))
}

fn write_header(o: &mut Map<String, Json>, d: usize, r: f64, freq: &Frequency) {
    o.insert("version".into(), Json::String("v1".into()));
    o.insert("d".into(), Json::Number(d.into()));
    o.insert("r".into(), num(r));
    o.insert("omega".into(), Json::Array(freq.omega().iter().map(|w| num(*w)).collect()));
}

pub fn cocycle_to_json(a: &Cocycle) -> LabResult<Json> {
    let entries = a.entries().ok_or_else(|| bad("only trigonometric cocycles have a file form; use the Jacobi format"))?;
    let mut o = Map::new();
    write_header(&mut o, a.d(), a.r(), a.frequency());
    o.insert("m".into(), Json::Number(a.m().into()));
    o.insert("entries".into(), Json::Array(entries.iter().map(poly_to_json).collect()));
    Ok(Json::Object(o))
}

pub fn cocycle_from_json(v: &Json) -> LabResult<Cocycle> {
    let o = v.as_object().ok_or_else(|| bad("cocycle file must hold an object"))?;
    let (d, r, freq) = header(o)?;
    let m = as_usize(get(o, "m")?, "m")?;
    let entries = entries_from_json(get(o, "entries")?, m, d, "entries")?;
    Ok(Cocycle::trig(m, freq, r, entries)?)
}

/// Jacobi data together with the frequency and strip width of the file.
#[derive(Clone, Debug)]
pub struct JacobiSpec {
    pub data: JacobiData,
    pub freq: Frequency,
    pub r: f64,
}

pub fn jacobi_to_json(s: &JacobiSpec) -> LabResult<Json> {
    let mut o = Map::new();
    write_header(&mut o, s.freq.d(), s.r, &s.freq);
    o.insert("band".into(), Json::Number(s.data.band().into()));
    for (key, c) in [("W", s.data.w()), ("R", s.data.r()), ("D", s.data.d())] {
        let e = c.entries().expect("Jacobi blocks are trigonometric");
        o.insert(key.into(), Json::Array(e.iter().map(poly_to_json).collect()));
    }
    o.insert("lambda".into(), num(s.data.lambda));
    o.insert("E".into(), num(s.data.energy));
    Ok(Json::Object(o))
}

pub fn jacobi_from_json(v: &Json) -> LabResult<JacobiSpec> {
    let o = v.as_object().ok_or_else(|| bad("Jacobi file must hold an object"))?;
    let (d, r, freq) = header(o)?;
    let band = as_usize(get(o, "band")?, "band")?;
    let w = entries_from_json(get(o, "W")?, band, d, "W")?;
    let rr = entries_from_json(get(o, "R")?, band, d, "R")?;
    let dd = entries_from_json(get(o, "D")?, band, d, "D")?;
    let lambda = as_f64(get(o, "lambda")?, "lambda")?;
    let e = as_f64(get(o, "E")?, "E")?;
    let data = JacobiData::new(band, w, rr, dd, lambda, e, &freq)?;
    Ok(JacobiSpec { data, freq, r })
}

pub fn to_text(v: &Json) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn read_json(path: &Path) -> LabResult<Json> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// A gallery name or the path of a cocycle file.
pub fn load_cocycle(source: &str) -> LabResult<Cocycle> {
    if GALLERY.contains(&source) {
        return Ok(sample_gallery(source)?);
    }
    let path = Path::new(source);
    if !path.exists() {
        return Err(LabError::Usage(format!("\"{source}\" is neither a gallery name ({}) nor a file", GALLERY.join(", "))));
    }
    cocycle_from_json(&read_json(path)?)
}

pub fn load_jacobi(path: &str) -> LabResult<JacobiSpec> {
    jacobi_from_json(&read_json(Path::new(path))?)
}
