//! Problem files: one text document holding a space, a map and parameters.
//!
//! ```text
//! [cone]
//! family = orthant        # or polyc1
//! dimension = 2           # polyc1 takes `grid = 1001` instead
//!
//! [space]
//! weight = 4
//! points = 1 2 3 4        # or: kind = interval, lo = 0, hi = 10
//!
//! [dist]
//! 1 2 4 6                 # one line per unordered pair: p q v1 .. vm
//!
//! [map]
//! 1 -> 3                  # one line per point; intervals use `affine = a b`
//!
//! [params]
//! mu = 0.1
//! alpha = 0
//! beta = 0
//! gamma = 0
//! phi = identity          # or `scale 2`, `power 0.5`
//! ```
//!
//! `#` starts a comment. Diagonal distances are implicitly zero; every other
//! pair must appear exactly once.

use crate::altering::AlteringFn;
use crate::cone::{ConeElement, ConeSpec, POLY_GRID_DEFAULT, POLY_MAX_DEGREE};
use crate::engine::{FiniteMap, ReichParams};
use crate::space::{FiniteGcrSpace, ScalarDemoSpace, SpaceError};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    /// 1-based; 0 when the problem concerns the file as a whole.
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        message: message.into(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpaceDecl {
    Finite { weight: f64, points: Vec<String> },
    Interval { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum MapDecl {
    /// (point, image) in file order.
    Table(Vec<(String, String)>),
    /// x -> slope * x + offset
    Affine { slope: f64, offset: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFile {
    pub cone: ConeSpec,
    pub space: SpaceDecl,
    pub dist: Vec<(String, String, Vec<f64>)>,
    pub map: Option<MapDecl>,
    pub params: Option<ReichParams>,
}

/// A problem file turned into library objects.
pub enum Instance {
    Finite {
        space: FiniteGcrSpace,
        map: Option<FiniteMap>,
    },
    Interval {
        space: ScalarDemoSpace,
        map: Option<(f64, f64)>,
    },
}

pub fn parse_phi(spec: &str) -> Result<AlteringFn, String> {
    let mut parts = spec
        .split(|c: char| c.is_whitespace() || c == ':')
        .filter(|s| !s.is_empty());
    let name = parts.next().unwrap_or("");
    let arg = parts.next();
    if parts.next().is_some() {
        return Err(format!("unexpected trailing tokens in phi `{spec}`"));
    }
    let number = |a: Option<&str>| -> Result<f64, String> {
        let a = a.ok_or_else(|| format!("phi `{name}` needs a parameter"))?;
        parse_real(a).map_err(|e| format!("phi parameter: {e}"))
    };
    match name {
        "identity" if arg.is_none() => Ok(AlteringFn::Identity),
        "scale" => Ok(AlteringFn::Scale(number(arg)?)),
        "power" => Ok(AlteringFn::Power(number(arg)?)),
        _ => Err(format!("unknown phi `{spec}`")),
    }
}

fn parse_real(token: &str) -> Result<f64, String> {
    match token.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("`{token}` is not a finite real")),
    }
}

fn parse_count(token: &str) -> Result<usize, String> {
    token
        .parse::<usize>()
        .map_err(|_| format!("`{token}` is not a nonnegative integer"))
}

#[derive(Default)]
struct Sections<'a> {
    /// section -> lines (line number, content)
    body: BTreeMap<&'static str, Vec<(usize, &'a str)>>,
}

const SECTIONS: [&str; 5] = ["cone", "space", "dist", "map", "params"];

fn split_sections(text: &str) -> Result<Sections<'_>, ParseError> {
    let mut out = Sections::default();
    let mut current: Option<&'static str> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let Some(&known) = SECTIONS.iter().find(|s| **s == name.trim()) else {
                return err(line_no, format!("unknown section [{name}]"));
            };
            if out.body.contains_key(known) {
                return err(line_no, format!("section [{known}] appears twice"));
            }
            out.body.insert(known, Vec::new());
            current = Some(known);
            continue;
        }
        match current {
            Some(section) => out
                .body
                .get_mut(section)
                .expect("opened above")
                .push((line_no, line)),
            None => return err(line_no, "content before the first section"),
        }
    }
    Ok(out)
}

/// `key = value` lines of a section; duplicate or unknown keys are errors.
fn key_values<'a>(
    lines: &[(usize, &'a str)],
    allowed: &[&str],
) -> Result<BTreeMap<String, (usize, &'a str)>, ParseError> {
    let mut map = BTreeMap::new();
    for &(n, line) in lines {
        let Some((k, v)) = line.split_once('=') else {
            return err(n, format!("expected `key = value`, got `{line}`"));
        };
        let key = k.trim().to_string();
        if !allowed.contains(&key.as_str()) {
            return err(n, format!("unknown key `{key}`"));
        }
        if map.insert(key.clone(), (n, v.trim())).is_some() {
            return err(n, format!("duplicate key `{key}`"));
        }
    }
    Ok(map)
}

fn required<'a>(
    kv: &BTreeMap<String, (usize, &'a str)>,
    key: &str,
    section: &str,
) -> Result<(usize, &'a str), ParseError> {
    kv.get(key).copied().ok_or_else(|| ParseError {
        line: 0,
        message: format!("[{section}] is missing `{key}`"),
    })
}

fn real_at((line, token): (usize, &str)) -> Result<f64, ParseError> {
    parse_real(token).map_err(|m| ParseError { line, message: m })
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let sections = split_sections(text)?;
        let section = |name: &str| sections.body.get(name).map(Vec::as_slice);

        let cone_lines = section("cone").ok_or_else(|| ParseError {
            line: 0,
            message: "missing [cone] section".into(),
        })?;
        let kv = key_values(cone_lines, &["family", "dimension", "grid"])?;
        let (fline, family) = required(&kv, "family", "cone")?;
        let cone = match family {
            "orthant" => {
                let (n, d) = required(&kv, "dimension", "cone")?;
                let dim = parse_count(d).map_err(|m| ParseError {
                    line: n,
                    message: m,
                })?;
                if dim == 0 {
                    return err(n, "dimension must be positive");
                }
                if kv.contains_key("grid") {
                    return err(fline, "`grid` only applies to polyc1");
                }
                ConeSpec::Orthant { dim }
            }
            "polyc1" => {
                let grid = match kv.get("grid") {
                    Some(&(n, g)) => {
                        let g = parse_count(g).map_err(|m| ParseError {
                            line: n,
                            message: m,
                        })?;
                        if g < 2 {
                            return err(n, "grid needs at least 2 points");
                        }
                        g
                    }
                    None => POLY_GRID_DEFAULT,
                };
                if kv.contains_key("dimension") {
                    return err(fline, "`dimension` only applies to orthant");
                }
                ConeSpec::PolyC1 { grid }
            }
            other => return err(fline, format!("unknown cone family `{other}`")),
        };

        let space_lines = section("space").ok_or_else(|| ParseError {
            line: 0,
            message: "missing [space] section".into(),
        })?;
        let kv = key_values(space_lines, &["kind", "weight", "points", "lo", "hi"])?;
        let kind = kv.get("kind").map_or("finite", |&(_, k)| k);
        let space = match kind {
            "finite" => {
                let weight = real_at(required(&kv, "weight", "space")?)?;
                let (pline, pts) = required(&kv, "points", "space")?;
                let points: Vec<String> = pts.split_whitespace().map(str::to_string).collect();
                if points.is_empty() {
                    return err(pline, "no points declared");
                }
                for (i, p) in points.iter().enumerate() {
                    if points[..i].contains(p) {
                        return err(pline, format!("duplicate point `{p}`"));
                    }
                }
                SpaceDecl::Finite { weight, points }
            }
            "interval" => {
                if !cone.is_scalar() {
                    return err(
                        0,
                        "interval spaces need `family = orthant`, `dimension = 1`",
                    );
                }
                SpaceDecl::Interval {
                    lo: real_at(required(&kv, "lo", "space")?)?,
                    hi: real_at(required(&kv, "hi", "space")?)?,
                }
            }
            other => return err(kv["kind"].0, format!("unknown space kind `{other}`")),
        };

        let mut dist = Vec::new();
        for &(n, line) in section("dist").unwrap_or(&[]) {
            let mut toks = line.split_whitespace();
            let (Some(p), Some(q)) = (toks.next(), toks.next()) else {
                return err(n, "expected `p q v1 .. vm`");
            };
            let values = toks
                .map(parse_real)
                .collect::<Result<Vec<_>, _>>()
                .map_err(|m| ParseError {
                    line: n,
                    message: m,
                })?;
            dist.push((n, p.to_string(), q.to_string(), values));
        }

        let map = match section("map") {
            None => None,
            Some(lines) => Some(parse_map(lines)?),
        };

        let params = match section("params") {
            None => None,
            Some(lines) => {
                let kv = key_values(lines, &["mu", "alpha", "beta", "gamma", "phi"])?;
                let get = |k: &str| kv.get(k).map_or(Ok(0.0), |&v| real_at(v));
                let phi = match kv.get("phi") {
                    Some(&(n, s)) => parse_phi(s).map_err(|m| ParseError {
                        line: n,
                        message: m,
                    })?,
                    None => AlteringFn::Identity,
                };
                Some(ReichParams::new(
                    get("mu")?,
                    get("alpha")?,
                    get("beta")?,
                    get("gamma")?,
                    phi,
                ))
            }
        };

        let file = ProblemFile {
            cone,
            space,
            dist: dist
                .iter()
                .map(|(_, p, q, v)| (p.clone(), q.clone(), v.clone()))
                .collect(),
            map,
            params,
        };
        file.check_references(&dist)?;
        Ok(file)
    }

    fn check_references(
        &self,
        dist: &[(usize, String, String, Vec<f64>)],
    ) -> Result<(), ParseError> {
        match &self.space {
            SpaceDecl::Interval { lo, hi } => {
                if let Some(&(n, ..)) = dist.first() {
                    return err(n, "interval spaces take no [dist] entries");
                }
                if matches!(self.map, Some(MapDecl::Table(_))) {
                    return err(0, "interval spaces need `affine = a b` in [map]");
                }
                if lo.partial_cmp(hi) != Some(std::cmp::Ordering::Less) {
                    return err(0, format!("empty interval [{lo}, {hi}]"));
                }
            }
            SpaceDecl::Finite { points, .. } => {
                let index = |p: &str, n: usize| {
                    points
                        .iter()
                        .position(|x| x == p)
                        .ok_or_else(|| ParseError {
                            line: n,
                            message: format!("undeclared point `{p}`"),
                        })
                };
                let k = points.len();
                let mut seen = vec![false; k * k];
                for (n, p, q, values) in dist {
                    let (i, j) = (index(p, *n)?, index(q, *n)?);
                    if i == j {
                        return err(*n, format!("diagonal entry `{p} {q}` is implicit"));
                    }
                    if seen[i * k + j] {
                        return err(*n, format!("pair `{p} {q}` given twice"));
                    }
                    seen[i * k + j] = true;
                    seen[j * k + i] = true;
                    match self.cone {
                        ConeSpec::Orthant { dim } if values.len() != dim => {
                            return err(*n, format!("expected {dim} values, got {}", values.len()));
                        }
                        ConeSpec::PolyC1 { .. }
                            if values.is_empty() || values.len() > POLY_MAX_DEGREE + 1 =>
                        {
                            return err(
                                *n,
                                format!(
                                    "polynomial needs 1..={} coefficients",
                                    POLY_MAX_DEGREE + 1
                                ),
                            );
                        }
                        _ => {}
                    }
                }
                for i in 0..k {
                    for j in (i + 1)..k {
                        if !seen[i * k + j] {
                            return err(
                                0,
                                format!("missing distance for pair `{} {}`", points[i], points[j]),
                            );
                        }
                    }
                }
                if let Some(map) = &self.map {
                    let MapDecl::Table(entries) = map else {
                        return err(0, "finite spaces need one `p -> q` line per point in [map]");
                    };
                    let mut has = vec![false; k];
                    for (p, q) in entries {
                        let i = index(p, 0)?;
                        index(q, 0)?;
                        if std::mem::replace(&mut has[i], true) {
                            return err(0, format!("point `{p}` mapped twice"));
                        }
                    }
                    if let Some(i) = has.iter().position(|h| !h) {
                        return err(0, format!("no image for point `{}`", points[i]));
                    }
                }
            }
        }
        Ok(())
    }

    /// Canonical text form; [`ProblemFile::parse`] reads it back unchanged.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("[cone]\n");
        match self.cone {
            ConeSpec::Orthant { dim } => {
                let _ = writeln!(out, "family = orthant\ndimension = {dim}");
            }
            ConeSpec::PolyC1 { grid } => {
                let _ = writeln!(out, "family = polyc1\ngrid = {grid}");
            }
        }
        out.push_str("\n[space]\n");
        match &self.space {
            SpaceDecl::Finite { weight, points } => {
                let _ = writeln!(out, "weight = {weight}\npoints = {}", points.join(" "));
            }
            SpaceDecl::Interval { lo, hi } => {
                let _ = writeln!(out, "kind = interval\nlo = {lo}\nhi = {hi}");
            }
        }
        if !self.dist.is_empty() {
            out.push_str("\n[dist]\n");
            for (p, q, values) in &self.dist {
                let _ = write!(out, "{p} {q}");
                for v in values {
                    let _ = write!(out, " {v}");
                }
                out.push('\n');
            }
        }
        if let Some(map) = &self.map {
            out.push_str("\n[map]\n");
            match map {
                MapDecl::Table(entries) => {
                    for (p, q) in entries {
                        let _ = writeln!(out, "{p} -> {q}");
                    }
                }
                MapDecl::Affine { slope, offset } => {
                    let _ = writeln!(out, "affine = {slope} {offset}");
                }
            }
        }
        if let Some(p) = &self.params {
            let _ = writeln!(
                out,
                "\n[params]\nmu = {}\nalpha = {}\nbeta = {}\ngamma = {}\nphi = {}",
                p.mu, p.alpha, p.beta, p.gamma, p.phi
            );
        }
        out
    }

    /// Builds the space and map. The weight is taken as declared, even if it
    /// fails the axioms; verification is a separate step.
    pub fn instantiate(&self) -> Result<Instance, SpaceError> {
        match &self.space {
            SpaceDecl::Interval { lo, hi } => Ok(Instance::Interval {
                space: ScalarDemoSpace::new(*lo, *hi)?,
                map: match self.map {
                    Some(MapDecl::Affine { slope, offset }) => Some((slope, offset)),
                    _ => None,
                },
            }),
            SpaceDecl::Finite { weight, points } => {
                let idx = |p: &str| {
                    points
                        .iter()
                        .position(|x| x == p)
                        .ok_or_else(|| SpaceError::UnknownPoint(p.to_string()))
                };
                let element = |v: &Vec<f64>| match self.cone {
                    ConeSpec::Orthant { .. } => ConeElement::Vector(v.clone()),
                    ConeSpec::PolyC1 { .. } => ConeElement::Poly(v.clone()),
                };
                let pairs = self
                    .dist
                    .iter()
                    .map(|(p, q, v)| Ok(((idx(p)?, idx(q)?), element(v))))
                    .collect::<Result<Vec<_>, SpaceError>>()?;
                let space = FiniteGcrSpace::from_pairs(points.clone(), self.cone, &pairs, *weight)?;
                let map = match &self.map {
                    Some(MapDecl::Table(entries)) => {
                        let mut images = vec![usize::MAX; points.len()];
                        for (p, q) in entries {
                            images[idx(p)?] = idx(q)?;
                        }
                        Some(FiniteMap::new(images))
                    }
                    _ => None,
                };
                Ok(Instance::Finite { space, map })
            }
        }
    }
}

fn parse_map(lines: &[(usize, &str)]) -> Result<MapDecl, ParseError> {
    if let [(n, line)] = lines {
        if let Some((k, v)) = line.split_once('=') {
            if k.trim() != "affine" {
                return err(*n, format!("unknown key `{}`", k.trim()));
            }
            let nums = v
                .split_whitespace()
                .map(parse_real)
                .collect::<Result<Vec<_>, _>>()
                .map_err(|m| ParseError {
                    line: *n,
                    message: m,
                })?;
            let [slope, offset] = nums[..] else {
                return err(*n, "`affine` takes exactly two reals: slope offset");
            };
            return Ok(MapDecl::Affine { slope, offset });
        }
    }
    let mut entries = Vec::new();
    for &(n, line) in lines {
        let Some((p, q)) = line.split_once("->") else {
            return err(n, format!("expected `p -> q`, got `{line}`"));
        };
        let (p, q) = (p.trim(), q.trim());
        if p.is_empty()
            || q.is_empty()
            || p.contains(char::is_whitespace)
            || q.contains(char::is_whitespace)
        {
            return err(n, format!("expected `p -> q`, got `{line}`"));
        }
        entries.push((p.to_string(), q.to_string()));
    }
    Ok(MapDecl::Table(entries))
}
