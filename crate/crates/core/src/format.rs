//! On-disk formats.
//!
//! Point sets are UTF-8 text: a header line `# illdist v1 d=<d> N=<N>`
//! followed by one point per line, coordinates in base 10 joined by commas,
//! LF-terminated, in lexicographic order.
//!
//! Polynomials are a single JSON object
//! `{"v":1,"d":<dim>,"N":<box>,"terms":[{"e":[..],"c":"<decimal>"},..]}`
//! with terms in ascending graded-lex order of the exponent vector.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice_sets::{LatticePointSet, Point};
use crate::siegel::{IntegerPolynomial, Monomial};

pub const POINT_SET_MAGIC: &str = "# illdist v1";

pub fn save_set<W: Write>(set: &LatticePointSet, mut sink: W) -> Result<()> {
    writeln!(sink, "{POINT_SET_MAGIC} d={} N={}", set.dim(), set.box_bound())?;
    let mut line = String::new();
    for p in set {
        line.clear();
        for (i, c) in p.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&c.to_string());
        }
        line.push('\n');
        sink.write_all(line.as_bytes())?;
    }
    sink.flush()?;
    Ok(())
}

pub fn set_to_string(set: &LatticePointSet) -> String {
    let mut buf = Vec::new();
    save_set(set, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

fn parse_header(line: &str) -> Result<(usize, u64)> {
    let err = |message: &str| Error::Parse {
        line: 1,
        message: message.to_string(),
    };
    let rest = line
        .strip_prefix(POINT_SET_MAGIC)
        .ok_or_else(|| err("expected header `# illdist v1 d=<d> N=<N>`"))?;
    let mut dim = None;
    let mut bound = None;
    for field in rest.split_whitespace() {
        if let Some(v) = field.strip_prefix("d=") {
            dim = Some(v.parse::<usize>().map_err(|_| err("malformed d"))?);
        } else if let Some(v) = field.strip_prefix("N=") {
            bound = Some(v.parse::<u64>().map_err(|_| err("malformed N"))?);
        } else {
            return Err(err(&format!("unexpected header field `{field}`")));
        }
    }
    match (dim, bound) {
        (Some(d), Some(n)) if d >= 1 && n >= 2 => Ok((d, n)),
        (Some(_), Some(_)) => Err(err("header requires d >= 1 and N >= 2")),
        _ => Err(err("header must declare both d and N")),
    }
}

/// Reads a point set. Rows need not be sorted; the result is canonical.
pub fn load_set<R: BufRead>(source: R) -> Result<LatticePointSet> {
    load_set_expecting(source, None, None)
}

/// As [`load_set`], additionally failing with `HeaderMismatch` when the
/// header's `d` or `N` differ from the expected values.
pub fn load_set_expecting<R: BufRead>(
    source: R,
    expected_dim: Option<usize>,
    expected_bound: Option<u64>,
) -> Result<LatticePointSet> {
    let mut lines = source.lines();
    let header = lines.next().transpose()?.ok_or(Error::Parse {
        line: 1,
        message: "missing header".into(),
    })?;
    let (dim, bound) = parse_header(&header)?;
    if let Some(d) = expected_dim.filter(|&d| d != dim) {
        return Err(Error::HeaderMismatch(format!("file declares d={dim}, expected d={d}")));
    }
    if let Some(n) = expected_bound.filter(|&n| n != bound) {
        return Err(Error::HeaderMismatch(format!("file declares N={bound}, expected N={n}")));
    }
    let mut points: Vec<Point> = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected {dim} comma-separated fields, found {}", fields.len()),
            });
        }
        let point = fields
            .iter()
            .map(|f| {
                if f.is_empty() || !f.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("`{f}` is not a base-10 integer"),
                    });
                }
                f.parse::<u64>().map_err(|e| Error::Parse {
                    line: lineno,
                    message: e.to_string(),
                })
            })
            .collect::<Result<Point>>()?;
        points.push(point);
    }
    LatticePointSet::new(dim, bound, points)
}

pub fn set_from_str(text: &str) -> Result<LatticePointSet> {
    load_set(text.as_bytes())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolynomialFile {
    v: u32,
    d: usize,
    #[serde(rename = "N")]
    n: u64,
    terms: Vec<TermRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermRecord {
    e: Vec<u32>,
    c: String,
}

/// JSON value of a polynomial in the polynomial-file layout.
pub fn polynomial_to_value(poly: &IntegerPolynomial, box_bound: u64) -> serde_json::Value {
    serde_json::to_value(polynomial_record(poly, box_bound)).expect("serializable")
}

fn polynomial_record(poly: &IntegerPolynomial, box_bound: u64) -> PolynomialFile {
    PolynomialFile {
        v: 1,
        d: poly.dim(),
        n: box_bound,
        terms: poly
            .terms()
            .map(|(m, c)| TermRecord {
                e: m.exponents().to_vec(),
                c: c.to_string(),
            })
            .collect(),
    }
}

/// Compact JSON with a trailing newline.
pub fn polynomial_to_string(poly: &IntegerPolynomial, box_bound: u64) -> String {
    let mut s = serde_json::to_string(&polynomial_record(poly, box_bound)).expect("serializable");
    s.push('\n');
    s
}

pub fn save_polynomial<W: Write>(poly: &IntegerPolynomial, box_bound: u64, mut sink: W) -> Result<()> {
    sink.write_all(polynomial_to_string(poly, box_bound).as_bytes())?;
    sink.flush()?;
    Ok(())
}

/// Parses a polynomial file, returning the polynomial and its declared `N`.
pub fn polynomial_from_str(text: &str) -> Result<(IntegerPolynomial, u64)> {
    let file: PolynomialFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    let err = |message: String| Error::Parse { line: 1, message };
    if file.v != 1 {
        return Err(err(format!("unsupported polynomial format version {}", file.v)));
    }
    if file.d == 0 {
        return Err(err("d must be at least 1".into()));
    }
    let mut seen = BTreeSet::new();
    let mut terms = Vec::with_capacity(file.terms.len());
    for t in file.terms {
        if t.e.len() != file.d {
            return Err(err(format!("exponent vector {:?} does not have {} entries", t.e, file.d)));
        }
        let c: BigInt = t
            .c
            .parse()
            .map_err(|_| err(format!("coefficient `{}` is not a decimal integer", t.c)))?;
        if c.is_zero() {
            return Err(err(format!("zero coefficient stored for {:?}", t.e)));
        }
        let m = Monomial::new(t.e);
        if !seen.insert(m.clone()) {
            return Err(err(format!("repeated monomial {:?}", m.exponents())));
        }
        terms.push((m, c));
    }
    let poly = IntegerPolynomial::new(file.d, terms)?;
    Ok((poly, file.n))
}

pub fn load_polynomial<R: std::io::Read>(mut source: R) -> Result<(IntegerPolynomial, u64)> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    polynomial_from_str(&text)
}
