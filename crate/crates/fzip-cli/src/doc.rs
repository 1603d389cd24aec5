//! The JSON interchange format: one Document per value, carrying the field
//! once at top level.  Integer-only, objects emitted with sorted keys, so
//! equal values always serialize to identical bytes.
//!
//! Shape violations (bad JSON, wrong arity, a matrix that is not a
//! differential) are `Malformed` and exit with code 2, pointing at the
//! first offending path.  Failures of the mathematical contracts that the
//! `validate` command checks are `Semantic` and exit with code 1.

use std::collections::BTreeMap;

use serde_json::{Map, Value};

use fzip_core::chain::{ChainMap, Complex};
use fzip_core::filt::{Direction, Filtration, SpectralPage};
use fzip_core::fzip::{ClassicalFZip, DerivedFZip, Glue};
use fzip_core::gf::{make_field, Field};
use fzip_core::mat::Mat;
use fzip_core::pinched::{big_twist_endpoints, PinchedPerfData};

#[derive(Debug)]
pub enum DocError {
    /// exit 2: the document is not well-formed
    Malformed(String),
    /// exit 1: well-formed, but a mathematical contract fails
    Semantic(String),
}

impl std::fmt::Display for DocError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DocError::Malformed(m) | DocError::Semantic(m) => write!(f, "{m}"),
        }
    }
}

fn bad(path: &str, what: impl std::fmt::Display) -> DocError {
    DocError::Malformed(format!("{path}: {what}"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PageDoc {
    pub r: i64,
    pub entries: BTreeMap<(i64, i64), usize>,
    pub abutment: BTreeMap<i64, BTreeMap<i64, usize>>,
}

impl From<&SpectralPage> for PageDoc {
    fn from(p: &SpectralPage) -> Self {
        PageDoc { r: p.r, entries: p.dims(), abutment: p.abutment.clone() }
    }
}

pub enum Payload {
    Complex(Complex),
    ChainMap(ChainMap),
    Filtration(Filtration),
    Zip(DerivedFZip),
    ClassicalZip(ClassicalFZip),
    Pinched(PinchedPerfData),
    Page(PageDoc),
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::Complex(_) => "complex",
            Payload::ChainMap(_) => "chainmap",
            Payload::Filtration(_) => "filtration",
            Payload::Zip(_) => "zip",
            Payload::ClassicalZip(_) => "classical_zip",
            Payload::Pinched(_) => "pinched",
            Payload::Page(_) => "page",
        }
    }
}

pub struct Document {
    pub field: Field,
    pub payload: Payload,
}

// ---------------------------------------------------------------- emitting

fn obj(pairs: Vec<(&str, Value)>) -> Value {
    let mut m = Map::new();
    for (k, v) in pairs {
        m.insert(k.to_string(), v);
    }
    Value::Object(m)
}

fn field_value(f: &Field) -> Value {
    obj(vec![
        ("modulus", Value::Array(f.modulus().iter().map(|&c| Value::from(c)).collect())),
        ("n", Value::from(f.n())),
        ("p", Value::from(f.p())),
    ])
}

fn mat_value(m: &Mat) -> Value {
    let mut data = Vec::with_capacity(m.rows() * m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            data.push(Value::from(m[(i, j)]));
        }
    }
    obj(vec![
        ("cols", Value::from(m.cols() as u64)),
        ("data", Value::Array(data)),
        ("rows", Value::from(m.rows() as u64)),
    ])
}

fn complex_value(c: &Complex) -> Value {
    let dims: Vec<Value> = c.degrees().map(|d| Value::from(c.dim(d) as u64)).collect();
    let diffs: Vec<Value> = c.degrees().skip(1).map(|d| mat_value(&c.diff(d))).collect();
    obj(vec![
        ("diffs", Value::Array(diffs)),
        ("dims", Value::Array(dims)),
        ("hi", Value::from(c.hi())),
        ("lo", Value::from(c.lo())),
    ])
}

fn comps_value(m: &ChainMap) -> Value {
    Value::Array(m.source().degrees().map(|d| mat_value(&m.comp(d))).collect())
}

fn chainmap_value(m: &ChainMap) -> Value {
    obj(vec![
        ("comps", comps_value(m)),
        ("source", complex_value(m.source())),
        ("target", complex_value(m.target())),
    ])
}

fn filtration_value(f: &Filtration) -> Value {
    let (a, b) = if f.is_window_empty() { (0, -1) } else { f.window() };
    obj(vec![
        ("direction", Value::from(match f.direction() {
            Direction::Descending => "descending",
            Direction::Ascending => "ascending",
        })),
        ("levels", Value::Array(f.levels().iter().map(complex_value).collect())),
        ("steps", Value::Array(f.steps().iter().map(comps_value).collect())),
        ("window", Value::Array(vec![Value::from(a), Value::from(b)])),
    ])
}

fn indexed_mats(entries: Vec<(i64, Value)>) -> Value {
    Value::Array(
        entries
            .into_iter()
            .map(|(k, v)| Value::Array(vec![Value::from(k), v]))
            .collect(),
    )
}

fn classical_value(m: &ClassicalFZip) -> Value {
    let (cl, ch) = m.c_window();
    let (dl, dh) = m.d_window();
    let c = (cl..=ch).map(|k| (k, mat_value(&m.c_subspace(k)))).collect();
    let d = (dl..=dh).map(|k| (k, mat_value(&m.d_subspace(k)))).collect();
    let phi = m
        .classical_type()
        .keys()
        .map(|&k| (k, mat_value(m.phi_at(k).expect("type support has phi"))))
        .collect();
    obj(vec![
        ("C", indexed_mats(c)),
        ("D", indexed_mats(d)),
        ("phi", indexed_mats(phi)),
        ("rank", Value::from(m.rank() as u64)),
    ])
}

fn glue_value(g: &Glue) -> Value {
    match g {
        Glue::Identity => Value::from("identity"),
        Glue::Map(m) => obj(vec![("comps", comps_value(m))]),
    }
}

fn zip_value(z: &DerivedFZip) -> Value {
    let twists = z.twists().iter().map(|(&k, t)| (k, comps_value(t))).collect();
    obj(vec![
        ("ascending", filtration_value(z.ascending())),
        ("descending", filtration_value(z.descending())),
        ("glue", glue_value(z.glue())),
        ("twists", indexed_mats(twists)),
    ])
}

fn pinched_value(p: &PinchedPerfData) -> Value {
    obj(vec![
        ("ascending", filtration_value(p.ascending())),
        ("big_twist", comps_value(p.big_twist())),
        ("descending", filtration_value(p.descending())),
        ("glue", glue_value(p.glue())),
    ])
}

fn page_value(p: &PageDoc) -> Value {
    let entries = p
        .entries
        .iter()
        .map(|(&(pp, q), &dim)| {
            Value::Array(vec![Value::from(pp), Value::from(q), Value::from(dim as u64)])
        })
        .collect();
    let abutment = p
        .abutment
        .iter()
        .map(|(&n, row)| {
            let row_v = row
                .iter()
                .map(|(&pp, &r)| Value::Array(vec![Value::from(pp), Value::from(r as u64)]))
                .collect();
            Value::Array(vec![Value::from(n), Value::Array(row_v)])
        })
        .collect();
    obj(vec![
        ("abutment", Value::Array(abutment)),
        ("entries", Value::Array(entries)),
        ("r", Value::from(p.r)),
    ])
}

pub fn document_value(doc: &Document) -> Value {
    let payload = match &doc.payload {
        Payload::Complex(c) => complex_value(c),
        Payload::ChainMap(m) => chainmap_value(m),
        Payload::Filtration(f) => filtration_value(f),
        Payload::Zip(z) => zip_value(z),
        Payload::ClassicalZip(m) => classical_value(m),
        Payload::Pinched(p) => pinched_value(p),
        Payload::Page(p) => page_value(p),
    };
    obj(vec![
        ("field", field_value(&doc.field)),
        ("format_version", Value::from(1u64)),
        ("kind", Value::from(doc.payload.kind())),
        ("payload", payload),
    ])
}

pub fn emit(doc: &Document) -> String {
    serde_json::to_string(&document_value(doc)).expect("serialization of finite integer data")
}

// ----------------------------------------------------------------- parsing

fn as_obj<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, DocError> {
    v.as_object().ok_or_else(|| bad(path, "expected an object"))
}

fn as_arr<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, DocError> {
    v.as_array().ok_or_else(|| bad(path, "expected an array"))
}

fn as_i64(v: &Value, path: &str) -> Result<i64, DocError> {
    v.as_i64().ok_or_else(|| bad(path, "expected an integer"))
}

fn as_usize(v: &Value, path: &str) -> Result<usize, DocError> {
    let n = as_i64(v, path)?;
    usize::try_from(n).map_err(|_| bad(path, "expected a nonnegative integer"))
}

fn get<'a>(m: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value, DocError> {
    m.get(key).ok_or_else(|| bad(path, format!("missing key \"{key}\"")))
}

fn parse_field(v: &Value, path: &str) -> Result<Field, DocError> {
    let o = as_obj(v, path)?;
    let p = as_usize(get(o, "p", path)?, &format!("{path}.p"))?;
    let n = as_usize(get(o, "n", path)?, &format!("{path}.n"))?;
    let field = make_field(p as u64, n as u64).map_err(|e| bad(path, e))?;
    let mp = format!("{path}.modulus");
    let stated = as_arr(get(o, "modulus", path)?, &mp)?;
    let stated: Vec<u32> = stated
        .iter()
        .enumerate()
        .map(|(i, c)| as_usize(c, &format!("{mp}[{i}]")).map(|x| x as u32))
        .collect::<Result<_, _>>()?;
    if stated != field.modulus() {
        return Err(bad(&mp, "does not match the canonical modulus for this field"));
    }
    Ok(field)
}

fn parse_mat(field: &Field, v: &Value, path: &str) -> Result<Mat, DocError> {
    let o = as_obj(v, path)?;
    let rows = as_usize(get(o, "rows", path)?, &format!("{path}.rows"))?;
    let cols = as_usize(get(o, "cols", path)?, &format!("{path}.cols"))?;
    let dp = format!("{path}.data");
    let data = as_arr(get(o, "data", path)?, &dp)?;
    if data.len() != rows * cols {
        return Err(bad(&dp, format!("expected {} entries, found {}", rows * cols, data.len())));
    }
    let q = field.q() as usize;
    let mut entries = Vec::with_capacity(data.len());
    for (i, e) in data.iter().enumerate() {
        let x = as_usize(e, &format!("{dp}[{i}]"))?;
        if x >= q {
            return Err(bad(&format!("{dp}[{i}]"), format!("entry {x} is outside the field of order {q}")));
        }
        entries.push(x as u16);
    }
    Ok(Mat::from_fn(field, rows, cols, |i, j| entries[i * cols + j]))
}

fn parse_complex(field: &Field, v: &Value, path: &str) -> Result<Complex, DocError> {
    let o = as_obj(v, path)?;
    let lo = as_i64(get(o, "lo", path)?, &format!("{path}.lo"))?;
    let hi = as_i64(get(o, "hi", path)?, &format!("{path}.hi"))?;
    let dp = format!("{path}.dims");
    let dims: Vec<usize> = as_arr(get(o, "dims", path)?, &dp)?
        .iter()
        .enumerate()
        .map(|(i, d)| as_usize(d, &format!("{dp}[{i}]")))
        .collect::<Result<_, _>>()?;
    if hi - lo + 1 != dims.len() as i64 {
        return Err(bad(path, "window [lo, hi] disagrees with the dims list length"));
    }
    let fp = format!("{path}.diffs");
    let raw = as_arr(get(o, "diffs", path)?, &fp)?;
    if raw.len() != dims.len().saturating_sub(1) {
        return Err(bad(&fp, format!("expected {} differentials, found {}", dims.len().saturating_sub(1), raw.len())));
    }
    let diffs: Vec<Mat> = raw
        .iter()
        .enumerate()
        .map(|(i, m)| parse_mat(field, m, &format!("{fp}[{i}]")))
        .collect::<Result<_, _>>()?;
    Complex::new(field.clone(), lo, dims, diffs).map_err(|e| bad(path, e))
}

fn parse_comps(field: &Field, v: &Value, n: usize, path: &str) -> Result<Vec<Mat>, DocError> {
    let raw = as_arr(v, path)?;
    if raw.len() != n {
        return Err(bad(path, format!("expected {n} components, found {}", raw.len())));
    }
    raw.iter()
        .enumerate()
        .map(|(i, m)| parse_mat(field, m, &format!("{path}[{i}]")))
        .collect()
}

fn parse_chainmap(field: &Field, v: &Value, path: &str) -> Result<ChainMap, DocError> {
    let o = as_obj(v, path)?;
    let source = parse_complex(field, get(o, "source", path)?, &format!("{path}.source"))?;
    let target = parse_complex(field, get(o, "target", path)?, &format!("{path}.target"))?;
    let n = source.degrees().count();
    let comps = parse_comps(field, get(o, "comps", path)?, n, &format!("{path}.comps"))?;
    ChainMap::new(source, target, comps).map_err(|e| bad(&format!("{path}.comps"), e))
}

fn parse_filtration(field: &Field, v: &Value, path: &str) -> Result<Filtration, DocError> {
    let o = as_obj(v, path)?;
    let dirp = format!("{path}.direction");
    let direction = match get(o, "direction", path)?.as_str() {
        Some("descending") => Direction::Descending,
        Some("ascending") => Direction::Ascending,
        _ => return Err(bad(&dirp, "expected \"descending\" or \"ascending\"")),
    };
    let wp = format!("{path}.window");
    let w = as_arr(get(o, "window", path)?, &wp)?;
    if w.len() != 2 {
        return Err(bad(&wp, "expected [a, b]"));
    }
    let a = as_i64(&w[0], &format!("{wp}[0]"))?;
    let b = as_i64(&w[1], &format!("{wp}[1]"))?;
    let lp = format!("{path}.levels");
    let levels: Vec<Complex> = as_arr(get(o, "levels", path)?, &lp)?
        .iter()
        .enumerate()
        .map(|(i, c)| parse_complex(field, c, &format!("{lp}[{i}]")))
        .collect::<Result<_, _>>()?;
    if b - a + 1 != levels.len() as i64 {
        return Err(bad(&wp, "window size disagrees with the number of levels"));
    }
    let sp = format!("{path}.steps");
    let raw = as_arr(get(o, "steps", path)?, &sp)?;
    if raw.len() != levels.len().saturating_sub(1) {
        return Err(bad(&sp, format!("expected {} steps, found {}", levels.len().saturating_sub(1), raw.len())));
    }
    let mut steps = Vec::new();
    for (i, s) in raw.iter().enumerate() {
        let (src, tgt) = match direction {
            Direction::Descending => (&levels[i + 1], &levels[i]),
            Direction::Ascending => (&levels[i], &levels[i + 1]),
        };
        let p = format!("{sp}[{i}]");
        let comps = parse_comps(field, s, src.degrees().count(), &p)?;
        steps.push(ChainMap::new(src.clone(), tgt.clone(), comps).map_err(|e| bad(&p, e))?);
    }
    Filtration::new(field.clone(), direction, a, levels, steps).map_err(|e| bad(path, e))
}

fn parse_indexed(v: &Value, path: &str) -> Result<Vec<(i64, Value)>, DocError> {
    let raw = as_arr(v, path)?;
    let mut out = Vec::new();
    let mut last: Option<i64> = None;
    for (i, e) in raw.iter().enumerate() {
        let p = format!("{path}[{i}]");
        let pair = as_arr(e, &p)?;
        if pair.len() != 2 {
            return Err(bad(&p, "expected [index, value]"));
        }
        let k = as_i64(&pair[0], &format!("{p}[0]"))?;
        if last.is_some_and(|l| l >= k) {
            return Err(bad(&p, "indices must be strictly increasing"));
        }
        last = Some(k);
        out.push((k, pair[1].clone()));
    }
    Ok(out)
}

fn parse_classical(field: &Field, v: &Value, path: &str) -> Result<ClassicalFZip, DocError> {
    let o = as_obj(v, path)?;
    let rank = as_usize(get(o, "rank", path)?, &format!("{path}.rank"))?;
    let mut tables = Vec::new();
    for key in ["C", "D", "phi"] {
        let p = format!("{path}.{key}");
        let mut table = BTreeMap::new();
        for (k, mv) in parse_indexed(get(o, key, path)?, &p)? {
            table.insert(k, parse_mat(field, &mv, &format!("{p}[{k}]"))?);
        }
        tables.push(table);
    }
    let phi = tables.pop().unwrap();
    let d = tables.pop().unwrap();
    let c = tables.pop().unwrap();
    ClassicalFZip::new(field.clone(), rank, &c, &d, &phi).map_err(|e| bad(path, e))
}

fn parse_glue(
    field: &Field,
    v: &Value,
    colim_src: &Complex,
    colim_tgt: &Complex,
    path: &str,
) -> Result<Glue, DocError> {
    if v.as_str() == Some("identity") {
        return Ok(Glue::Identity);
    }
    let o = as_obj(v, path)?;
    let p = format!("{path}.comps");
    let comps = parse_comps(field, get(o, "comps", path)?, colim_src.degrees().count(), &p)?;
    let m = ChainMap::new(colim_src.clone(), colim_tgt.clone(), comps).map_err(|e| bad(&p, e))?;
    Ok(Glue::Map(m))
}

fn parse_zip(field: &Field, v: &Value, path: &str) -> Result<DerivedFZip, DocError> {
    let o = as_obj(v, path)?;
    let c = parse_filtration(field, get(o, "descending", path)?, &format!("{path}.descending"))?;
    let d = parse_filtration(field, get(o, "ascending", path)?, &format!("{path}.ascending"))?;
    let glue = parse_glue(field, get(o, "glue", path)?, &c.colim(), &d.colim(), &format!("{path}.glue"))?;
    let tp = format!("{path}.twists");
    let mut twists = BTreeMap::new();
    for (k, tv) in parse_indexed(get(o, "twists", path)?, &tp)? {
        let src = c.graded(k).frobenius_twist();
        let tgt = d.graded(k);
        let p = format!("{tp}[{k}]");
        let comps = parse_comps(field, &tv, src.degrees().count(), &p)?;
        twists.insert(k, ChainMap::new(src, tgt, comps).map_err(|e| bad(&p, e))?);
    }
    Ok(DerivedFZip::new(c, d, glue, twists))
}

fn parse_pinched(field: &Field, v: &Value, path: &str) -> Result<PinchedPerfData, DocError> {
    let o = as_obj(v, path)?;
    let c = parse_filtration(field, get(o, "descending", path)?, &format!("{path}.descending"))?;
    let d = parse_filtration(field, get(o, "ascending", path)?, &format!("{path}.ascending"))?;
    let glue = parse_glue(field, get(o, "glue", path)?, &c.colim(), &d.colim(), &format!("{path}.glue"))?;
    let (src, tgt) = big_twist_endpoints(&c, &d);
    let p = format!("{path}.big_twist");
    let comps = parse_comps(field, get(o, "big_twist", path)?, src.degrees().count(), &p)?;
    let big = ChainMap::new(src, tgt, comps).map_err(|e| bad(&p, e))?;
    Ok(PinchedPerfData::new(c, d, glue, big))
}

fn parse_page(v: &Value, path: &str) -> Result<PageDoc, DocError> {
    let o = as_obj(v, path)?;
    let r = as_i64(get(o, "r", path)?, &format!("{path}.r"))?;
    let ep = format!("{path}.entries");
    let mut entries = BTreeMap::new();
    for (i, e) in as_arr(get(o, "entries", path)?, &ep)?.iter().enumerate() {
        let p = format!("{ep}[{i}]");
        let t = as_arr(e, &p)?;
        if t.len() != 3 {
            return Err(bad(&p, "expected [p, q, dim]"));
        }
        let key = (as_i64(&t[0], &p)?, as_i64(&t[1], &p)?);
        if entries.insert(key, as_usize(&t[2], &p)?).is_some() {
            return Err(bad(&p, "duplicate entry position"));
        }
    }
    let ap = format!("{path}.abutment");
    let mut abutment = BTreeMap::new();
    for (n, row_v) in parse_indexed(get(o, "abutment", path)?, &ap)? {
        let p = format!("{ap}[{n}]");
        let mut row = BTreeMap::new();
        for (pp, rv) in parse_indexed(&row_v, &p)? {
            row.insert(pp, as_usize(&rv, &format!("{p}[{pp}]"))?);
        }
        abutment.insert(n, row);
    }
    Ok(PageDoc { r, entries, abutment })
}

pub fn parse_document(text: &str) -> Result<Document, DocError> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| DocError::Malformed(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    parse_value(&v)
}

fn parse_value(v: &Value) -> Result<Document, DocError> {
    let o = as_obj(&v, "document")?;
    let version = as_i64(get(o, "format_version", "document")?, "document.format_version")?;
    if version != 1 {
        return Err(bad("document.format_version", format!("unsupported version {version}")));
    }
    let field = parse_field(get(o, "field", "document")?, "document.field")?;
    let kind = get(o, "kind", "document")?
        .as_str()
        .ok_or_else(|| bad("document.kind", "expected a string"))?;
    let pv = get(o, "payload", "document")?;
    let payload = match kind {
        "complex" => Payload::Complex(parse_complex(&field, pv, "payload")?),
        "chainmap" => Payload::ChainMap(parse_chainmap(&field, pv, "payload")?),
        "filtration" => Payload::Filtration(parse_filtration(&field, pv, "payload")?),
        "zip" => Payload::Zip(parse_zip(&field, pv, "payload")?),
        "classical_zip" => Payload::ClassicalZip(parse_classical(&field, pv, "payload")?),
        "pinched" => Payload::Pinched(parse_pinched(&field, pv, "payload")?),
        "page" => Payload::Page(parse_page(pv, "payload")?),
        other => return Err(bad("document.kind", format!("unknown kind \"{other}\""))),
    };
    Ok(Document { field, payload })
}

// ======================================================================
