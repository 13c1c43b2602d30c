//! JSON spec files for decoration maps, post-Lie algebras and their actions.
//!
//! Rationals are strings such as `"3"` or `"-1/2"` (JSON integers are also
//! accepted); labels use the expression syntax, e.g. `"<1,0>"`, `"Xi"`, `"*"`.

use std::collections::BTreeMap;

use serde_json::{Map, Value};

use rtcalc_core::lincomb::parse_scalar;
use rtcalc_core::matrix::Matrix;
use rtcalc_core::phimaps::{
    compose, direct_sum, exp_series, from_blocks, from_blocks_with, lin_comb, polynomial, tensor_product, transpose,
    BlockMatrix, Endo, Pair, DEFAULT_MAX_ITER,
};
use rtcalc_core::postlie::{Constants, PostLieBase, PsiPair};
use rtcalc_core::spde::{noise_extend, partial_lambda, phi_lambda, phi_lambda_via_exp, spde_psi, SpdeConfig};
use rtcalc_core::{Basis, Label, LinComb, PhiMap, Scalar};

use crate::parse::parse_label;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct SpecError(pub String);

type SResult<T> = std::result::Result<T, SpecError>;

fn err<T>(msg: impl Into<String>) -> SResult<T> {
    Err(SpecError(msg.into()))
}

impl From<rtcalc_core::Error> for SpecError {
    fn from(e: rtcalc_core::Error) -> Self {
        SpecError(e.to_string())
    }
}

pub fn parse_json(text: &str) -> SResult<Value> {
    serde_json::from_str(text).map_err(|e| SpecError(format!("invalid JSON: {e}")))
}

fn obj(v: &Value) -> SResult<&Map<String, Value>> {
    v.as_object().ok_or_else(|| SpecError(format!("expected an object, found {v}")))
}

fn field<'a>(m: &'a Map<String, Value>, key: &str) -> SResult<&'a Value> {
    m.get(key).ok_or_else(|| SpecError(format!("missing field \"{key}\"")))
}

fn array(v: &Value) -> SResult<&Vec<Value>> {
    v.as_array().ok_or_else(|| SpecError(format!("expected an array, found {v}")))
}

pub fn scalar(v: &Value) -> SResult<Scalar> {
    let text = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_i64() => n.to_string(),
        _ => return err(format!("expected a rational such as \"p/q\", found {v}")),
    };
    parse_scalar(&text).ok_or_else(|| SpecError(format!("invalid rational {text:?}")))
}

pub fn label(v: &Value) -> SResult<Label> {
    let s = v.as_str().ok_or_else(|| SpecError(format!("expected a label string, found {v}")))?;
    parse_label(s).map_err(|e| SpecError(format!("label {s:?}: {}", e.msg)))
}

fn usize_field(m: &Map<String, Value>, key: &str) -> SResult<Option<usize>> {
    match m.get(key) {
        None => Ok(None),
        Some(v) => v.as_u64().map(|n| Some(n as usize)).ok_or_else(|| SpecError(format!("\"{key}\" must be a natural number"))),
    }
}

/// `["a","b"]`, `{"d": 1}` or `{"d": 1, "noise": "Xi"}`.
pub fn basis(v: &Value) -> SResult<Basis> {
    match v {
        Value::Array(items) => Ok(Basis::finite(items.iter().map(label).collect::<SResult<_>>()?)?),
        Value::Object(m) => {
            let d = usize_field(m, "d")?.ok_or_else(|| SpecError("basis object needs \"d\"".into()))?;
            match m.get("noise") {
                None => Ok(Basis::multi_indices(d)),
                Some(n) => Ok(Basis::multi_indices_with(d, label(n)?)),
            }
        }
        _ => err(format!("expected a basis, found {v}")),
    }
}

fn matrix(v: &Value) -> SResult<Matrix> {
    let rows = array(v)?
        .iter()
        .map(|r| array(r)?.iter().map(scalar).collect::<SResult<Vec<_>>>())
        .collect::<SResult<Vec<_>>>()?;
    Ok(Matrix::from_rows(rows)?)
}

pub fn block_matrix(v: &Value) -> SResult<BlockMatrix> {
    let blocks = array(v)?
        .iter()
        .map(|row| array(row)?.iter().map(matrix).collect::<SResult<Vec<_>>>())
        .collect::<SResult<Vec<_>>>()?;
    Ok(BlockMatrix::new(blocks)?)
}

/// Reads `d`, `lambda` (default all ones) and `noise`.
pub fn spde_config(m: &Map<String, Value>) -> SResult<SpdeConfig> {
    let lambda = match m.get("lambda") {
        Some(l) => Some(array(l)?.iter().map(scalar).collect::<SResult<Vec<_>>>()?),
        None => None,
    };
    let d = usize_field(m, "d")?;
    let mut cfg = match (d, lambda) {
        (Some(d), Some(l)) if l.len() != d + 1 => {
            return err(format!("lambda has {} entries but d = {d} needs {}", l.len(), d + 1))
        }
        (_, Some(l)) if l.is_empty() => return err("lambda must be nonempty"),
        (_, Some(l)) => SpdeConfig::new(l),
        (Some(d), None) => SpdeConfig::ones(d),
        (None, None) => return err("spde builder needs \"d\" or \"lambda\""),
    };
    if m.get("noise").and_then(Value::as_bool).unwrap_or(false) {
        cfg = cfg.with_noise();
    }
    Ok(cfg)
}

fn bases_of(m: &Map<String, Value>) -> SResult<(Basis, Basis)> {
    Ok((basis(field(m, "edgeBasis")?)?, basis(field(m, "vertexBasis")?)?))
}

fn table_entries(v: &Value) -> SResult<BTreeMap<Pair, LinComb<Pair>>> {
    let mut entries = BTreeMap::new();
    for row in array(v)? {
        let row = obj(row)?;
        let input = array(field(row, "in")?)?;
        if input.len() != 2 {
            return err("table \"in\" must be [edge, vertex]");
        }
        let key = (label(&input[0])?, label(&input[1])?);
        let mut out = LinComb::zero();
        for t in array(field(row, "out")?)? {
            let t = obj(t)?;
            out.add_term(scalar(field(t, "c")?)?, (label(field(t, "e")?)?, label(field(t, "v")?)?));
        }
        if entries.insert(key.clone(), out).is_some() {
            return err(format!("table lists ({}, {}) twice", key.0, key.1));
        }
    }
    Ok(entries)
}

fn endo_matrix(basis: &Basis, v: &Value) -> SResult<Endo> {
    let labels = basis.elements().ok_or_else(|| SpecError("matrix actions need finite bases".into()))?;
    let m = matrix(v)?;
    if m.rows() != labels.len() || m.cols() != labels.len() {
        return err(format!("matrix must be {0}x{0}", labels.len()));
    }
    Ok(Endo::from_matrix(&labels, &m))
}

/// Builds a decoration map from its spec.
pub fn phi_from_value(v: &Value) -> SResult<PhiMap> {
    let m = obj(v)?;
    if let Some(t) = m.get("table") {
        let (e, vb) = bases_of(m)?;
        return Ok(PhiMap::table(e, vb, table_entries(t)?)?);
    }
    let builder = field(m, "builder")?.as_str().ok_or_else(|| SpecError("\"builder\" must be a string".into()))?;
    let sub = |key: &str| phi_from_value(field(m, key)?);
    match builder {
        "identity" => {
            let (e, vb) = bases_of(m)?;
            Ok(PhiMap::identity(e, vb))
        }
        "zero" => {
            let (e, vb) = bases_of(m)?;
            Ok(PhiMap::zero(e, vb))
        }
        "phi_lambda" => {
            let cfg = spde_config(m)?;
            Ok(if cfg.noise { noise_extend(&cfg) } else { phi_lambda(&cfg) })
        }
        "noise_extend" => Ok(noise_extend(&spde_config(m)?)),
        "partial_lambda" => Ok(partial_lambda(&spde_config(m)?)),
        "phi_lambda_exp" => {
            let max_iter = usize_field(m, "maxIter")?.unwrap_or(DEFAULT_MAX_ITER);
            Ok(phi_lambda_via_exp(&spde_config(m)?, max_iter))
        }
        "blocks" => {
            let mx = block_matrix(field(m, "blocks")?)?;
            match (m.get("edgeBasis"), m.get("vertexBasis")) {
                (Some(e), Some(vb)) => {
                    let labels = |x: &Value| array(x)?.iter().map(label).collect::<SResult<Vec<_>>>();
                    Ok(from_blocks_with(&mx, labels(e)?, labels(vb)?)?)
                }
                (None, None) => Ok(from_blocks(&mx)),
                _ => err("give both \"edgeBasis\" and \"vertexBasis\" or neither"),
            }
        }
        "endo_tensor" => {
            let (e, vb) = bases_of(m)?;
            let f = endo_matrix(&e, field(m, "edge")?)?;
            let g = endo_matrix(&vb, field(m, "vertex")?)?;
            Ok(PhiMap::tensor_of_endos(e, f, vb, g))
        }
        "tensor" => Ok(tensor_product(&sub("left")?, &sub("right")?)),
        "direct_sum" => {
            let lambda = m.get("lambda").map(scalar).transpose()?.unwrap_or_else(|| Scalar::from_integer(0.into()));
            let mu = m.get("mu").map(scalar).transpose()?.unwrap_or_else(|| Scalar::from_integer(0.into()));
            Ok(direct_sum(&sub("first")?, &sub("second")?, lambda, mu)?)
        }
        "compose" => Ok(compose(&sub("outer")?, &sub("inner")?)?),
        "lin_comb" => Ok(lin_comb(scalar(field(m, "alpha")?)?, &sub("phi")?, scalar(field(m, "beta")?)?, &sub("psi")?)?),
        "polynomial" => {
            let coeffs = array(field(m, "coeffs")?)?.iter().map(scalar).collect::<SResult<Vec<_>>>()?;
            Ok(polynomial(&sub("base")?, coeffs))
        }
        "exp" => {
            let max_iter = usize_field(m, "maxIter")?.unwrap_or(DEFAULT_MAX_ITER);
            Ok(exp_series(&sub("base")?, max_iter))
        }
        "transpose" => Ok(transpose(&sub("base")?)?),
        other => err(format!("unknown builder {other:?}")),
    }
}

/// A post-Lie algebra: `{"generators": [...], "bracket": [...], "triangle": [...]}`.
///
/// Each constant is `{"x": p, "y": q, "z": r, "c": "1/2"}`, adding `c·r` to
/// `{p,q}` or `p ⊳ q`. Bracket constants are listed for one order only; the
/// other order is filled in by antisymmetry.
pub fn postlie_from_value(v: &Value) -> SResult<PostLieBase> {
    let m = obj(v)?;
    let names: Vec<String> = array(field(m, "generators")?)?
        .iter()
        .map(|g| g.as_str().map(str::to_string).ok_or_else(|| SpecError("generator names are strings".into())))
        .collect::<SResult<_>>()?;
    let index = |v: &Value| -> SResult<usize> {
        let s = v.as_str().ok_or_else(|| SpecError("generator names are strings".into()))?;
        names.iter().position(|n| n == s).ok_or_else(|| SpecError(format!("unknown generator {s:?}")))
    };
    let read = |key: &str, antisymmetric: bool| -> SResult<Constants> {
        let mut c: Constants = BTreeMap::new();
        let Some(list) = m.get(key) else { return Ok(c) };
        let mut seen = std::collections::BTreeSet::new();
        for entry in array(list)? {
            let e = obj(entry)?;
            let (x, y, z) = (index(field(e, "x")?)?, index(field(e, "y")?)?, index(field(e, "z")?)?);
            let k = scalar(field(e, "c")?)?;
            if antisymmetric {
                if x == y {
                    return err("the bracket of a generator with itself is zero");
                }
                seen.insert((x, y));
                if seen.contains(&(y, x)) {
                    return err("bracket constants must be given for one order only");
                }
                c.entry((y, x)).or_default().add_term(-k.clone(), z);
            }
            c.entry((x, y)).or_default().add_term(k, z);
        }
        c.retain(|_, v| !v.is_zero());
        Ok(c)
    };
    Ok(PostLieBase::new(names.clone(), read("bracket", true)?, read("triangle", false)?)?)
}

fn endo_table(v: &Value) -> SResult<Endo> {
    let mut entries = BTreeMap::new();
    for (k, out) in obj(v)? {
        let input = parse_label(k).map_err(|e| SpecError(format!("label {k:?}: {}", e.msg)))?;
        let mut image = LinComb::zero();
        for (l, c) in obj(out)? {
            let l = parse_label(l).map_err(|e| SpecError(format!("label {l:?}: {}", e.msg)))?;
            image.add_term(scalar(c)?, l);
        }
        entries.insert(input, image);
    }
    Ok(Endo::table(entries))
}

/// The actions of a post-Lie algebra: either `{"builder": "spde_psi", "d": .., "noise": ..}`,
/// which also fixes the algebra, or `{"edge": {p: table}, "vertex": {p: table}}`
/// with tables `{"in": {"out": "c"}}`, for the algebra given separately.
pub fn psi_from_value(v: &Value, base: Option<PostLieBase>) -> SResult<(PostLieBase, PsiPair)> {
    let m = obj(v)?;
    if let Some(b) = m.get("builder") {
        if b.as_str() != Some("spde_psi") {
            return err(format!("unknown action builder {b}"));
        }
        return Ok(spde_psi(&spde_config(m)?));
    }
    let base = base.ok_or_else(|| SpecError("table actions need a post-Lie algebra (--postlie)".into()))?;
    let side = |key: &str| -> SResult<Vec<Endo>> {
        let tables = m.get(key).map(obj).transpose()?;
        base.names()
            .iter()
            .map(|n| match tables.and_then(|t| t.get(n)) {
                Some(t) => endo_table(t),
                None => Ok(Endo::zero()),
            })
            .collect()
    };
    let psi = PsiPair { edge: side("edge")?, vertex: side("vertex")? };
    Ok((base, psi))
}
