//! Generalized cone rectangular metric spaces.
//!
//! A cone-valued distance d on a set X with weight s >= 1 must satisfy
//!
//! * d(x, y) in P,
//! * d(x, y) = 0 exactly when x = y,
//! * d(x, y) <= d(x, u) + s d(u, v) + d(v, y) for every x, y and every pair of
//!   distinct u, v outside {x, y}.
//!
//! Tables are also required to be symmetric. [`FiniteGcrSpace`] verifies all of
//! this exhaustively; [`ScalarDemoSpace`] is an interval with |x - y|, which is
//! an ordinary metric and so has weight 1.

use crate::cone::{ConeElement, ConeError, ConeSpec, ORDER_TOL};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;
use thiserror::Error;

/// Seeded pairs used when a space cannot be enumerated.
pub const SAMPLED_PAIRS: usize = 10_000;
/// Extra near-diagonal pairs, where equality-tight contractions are hardest.
pub const NEAR_DIAGONAL_PAIRS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error("distance table must be {expected}x{expected}, got {found} entries")]
    MalformedTable { expected: usize, found: usize },
    #[error("space needs at least one point")]
    Empty,
    #[error("duplicate point label {0}")]
    DuplicateLabel(String),
    #[error("weight must be a finite real >= 1, got {0}")]
    InvalidWeight(f64),
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("table fails {0}; a weight is only meaningful for a valid table")]
    InvalidTable(&'static str),
    #[error("tolerance {0} is not in the interior of the cone")]
    NotInterior(ConeElement),
    #[error("sequence is empty")]
    EmptySequence,
    #[error("point {0} does not belong to the space")]
    UnknownPoint(String),
    #[error(transparent)]
    Cone(#[from] ConeError),
}

/// A set with a cone-valued distance, as seen by the iteration engine.
pub trait Space: Sync {
    type Point: Clone + PartialEq + fmt::Debug + Send + Sync;

    fn cone(&self) -> &ConeSpec;

    fn dist(&self, x: &Self::Point, y: &Self::Point) -> ConeElement;

    fn weight(&self) -> f64;

    fn has_point(&self, p: &Self::Point) -> bool;

    fn label(&self, p: &Self::Point) -> String;

    /// All points, when the space is finite.
    fn enumerate(&self) -> Option<Vec<Self::Point>>;

    /// Ordered pairs over which a contractive condition gets evaluated.
    fn contraction_pairs(&self, seed: u64) -> Vec<(Self::Point, Self::Point)>;

    /// First failed structural axiom, if any.
    fn axiom_failure(&self) -> Option<String>;
}

/// A finite set of labelled points with a tabulated distance.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGcrSpace {
    labels: Vec<String>,
    cone: ConeSpec,
    /// Row-major n x n.
    dist: Vec<ConeElement>,
    weight: f64,
}

impl FiniteGcrSpace {
    pub fn new(
        labels: Vec<String>,
        cone: ConeSpec,
        dist: Vec<ConeElement>,
        weight: f64,
    ) -> Result<Self, SpaceError> {
        cone.validate()?;
        let n = labels.len();
        if n == 0 {
            return Err(SpaceError::Empty);
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(SpaceError::DuplicateLabel(l.clone()));
            }
        }
        if dist.len() != n * n {
            return Err(SpaceError::MalformedTable {
                expected: n,
                found: dist.len(),
            });
        }
        for d in &dist {
            cone.check(d)?;
        }
        if !weight.is_finite() || weight < 1.0 {
            return Err(SpaceError::InvalidWeight(weight));
        }
        Ok(FiniteGcrSpace {
            labels,
            cone,
            dist,
            weight,
        })
    }

    /// Builds a symmetric table from one entry per unordered pair; the
    /// diagonal is zero.
    pub fn from_pairs(
        labels: Vec<String>,
        cone: ConeSpec,
        pairs: &[((usize, usize), ConeElement)],
        weight: f64,
    ) -> Result<Self, SpaceError> {
        let n = labels.len();
        let mut table: Vec<Option<ConeElement>> = vec![None; n * n];
        for i in 0..n {
            table[i * n + i] = Some(cone.zero());
        }
        for ((i, j), d) in pairs {
            if *i >= n || *j >= n {
                return Err(SpaceError::UnknownPoint(format!("#{}", i.max(j))));
            }
            table[i * n + j] = Some(d.clone());
            table[j * n + i] = Some(d.clone());
        }
        let filled: Vec<ConeElement> = table.into_iter().flatten().collect();
        Self::new(labels, cone, filled, weight)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn d(&self, x: usize, y: usize) -> &ConeElement {
        &self.dist[x * self.len() + y]
    }

    pub fn with_weight(&self, weight: f64) -> Result<Self, SpaceError> {
        Self::new(self.labels.clone(), self.cone, self.dist.clone(), weight)
    }

    fn rect_rhs(
        &self,
        s: f64,
        x: usize,
        y: usize,
        u: usize,
        v: usize,
    ) -> Result<ConeElement, ConeError> {
        self.d(x, u)
            .try_add(&self.d(u, v).scale(s))?
            .try_add(self.d(v, y))
    }

    /// Admissible quadruples (x, y, u, v): x != y, u != v, both outside {x, y},
    /// in lexicographic order. x = y is omitted since d(x, x) = 0 is below
    /// everything in P.
    pub fn quadruples(&self) -> impl Iterator<Item = (usize, usize, usize, usize)> + '_ {
        let n = self.len();
        (0..n).flat_map(move |x| {
            (0..n).filter(move |&y| y != x).flat_map(move |y| {
                (0..n)
                    .filter(move |&u| u != x && u != y)
                    .flat_map(move |u| {
                        (0..n)
                            .filter(move |&v| v != x && v != y && v != u)
                            .map(move |v| (x, y, u, v))
                    })
            })
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RectViolation {
    pub quad: [String; 4],
    pub lhs: ConeElement,
    pub rhs: ConeElement,
}

impl fmt::Display for RectViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [x, y, u, v] = &self.quad;
        write!(f, "({x},{y},{u},{v}): {} > {}", self.lhs, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub pass: bool,
    pub checked: usize,
    pub witness: Option<String>,
}

impl Verdict {
    fn from_failures(checked: usize, failures: Vec<String>) -> Self {
        Verdict {
            pass: failures.is_empty(),
            checked,
            witness: failures.into_iter().next(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    pub weight: f64,
    pub nonnegativity: Verdict,
    pub identity: Verdict,
    pub symmetry: Verdict,
    pub rectangular: Verdict,
    /// Every failing quadruple, lexicographic by point index.
    pub rect_violations: Vec<RectViolation>,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.nonnegativity.pass && self.identity.pass && self.symmetry.pass && self.rectangular.pass
    }

    pub fn first_failure(&self) -> Option<&'static str> {
        [
            ("nonnegativity", &self.nonnegativity),
            ("identity", &self.identity),
            ("symmetry", &self.symmetry),
            ("rectangular", &self.rectangular),
        ]
        .into_iter()
        .find(|(_, v)| !v.pass)
        .map(|(name, _)| name)
    }
}

/// Exhaustively checks the table axioms at the space's own weight.
pub fn verify_axioms(space: &FiniteGcrSpace) -> Result<AxiomReport, SpaceError> {
    let cone = space.cone;
    let n = space.len();
    let lbl = |i: usize| &space.labels[i];

    let mut neg = Vec::new();
    let mut ident = Vec::new();
    let mut sym = Vec::new();
    for x in 0..n {
        for y in 0..n {
            let d = space.d(x, y);
            if !cone.contains(d)? {
                neg.push(format!("d({},{}) = {d}", lbl(x), lbl(y)));
            }
            let zero = cone.is_zero(d, 0.0)?;
            if zero != (x == y) {
                ident.push(format!("d({},{}) = {d}", lbl(x), lbl(y)));
            }
            if space.d(y, x) != d {
                sym.push(format!(
                    "d({},{}) = {d}, d({},{}) = {}",
                    lbl(x),
                    lbl(y),
                    lbl(y),
                    lbl(x),
                    space.d(y, x)
                ));
            }
        }
    }

    let quads: Vec<_> = space.quadruples().collect();
    let rect: Vec<RectViolation> = quads
        .par_iter()
        .map(
            |&(x, y, u, v)| -> Result<Option<RectViolation>, ConeError> {
                let lhs = space.d(x, y);
                let rhs = space.rect_rhs(space.weight, x, y, u, v)?;
                Ok(
                    (!cone.approx_leq(lhs, &rhs, ORDER_TOL)?).then(|| RectViolation {
                        quad: [x, y, u, v].map(|i| space.labels[i].clone()),
                        lhs: lhs.clone(),
                        rhs,
                    }),
                )
            },
        )
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect();

    let total = n * n;
    Ok(AxiomReport {
        weight: space.weight,
        nonnegativity: Verdict::from_failures(total, neg),
        identity: Verdict::from_failures(total, ident),
        symmetry: Verdict::from_failures(total, sym),
        rectangular: Verdict::from_failures(
            quads.len(),
            rect.iter().map(|v| v.to_string()).collect(),
        ),
        rect_violations: rect,
    })
}

/// Smallest weight s >= 1 for which the rectangular inequality holds, or
/// `None` when some quadruple fails for every s.
///
/// Each quadruple asks lhs <= a + b + s c coordinatewise. Where c_i > 0 that is
/// s >= (lhs_i - a_i - b_i) / c_i; where c_i = 0 (only possible on the cone's
/// boundary) it is a condition free of s, which may be unsatisfiable.
pub fn min_weight(space: &FiniteGcrSpace) -> Result<Option<f64>, SpaceError> {
    let base = verify_axioms(&space.with_weight(1.0)?)?;
    for (name, v) in [
        ("nonnegativity", &base.nonnegativity),
        ("identity", &base.identity),
        ("symmetry", &base.symmetry),
    ] {
        if !v.pass {
            return Err(SpaceError::InvalidTable(name));
        }
    }
    let cone = space.cone;
    let quads: Vec<_> = space.quadruples().collect();
    let needs = quads
        .par_iter()
        .map(|&(x, y, u, v)| -> Result<Option<f64>, ConeError> {
            let lhs = cone.coords(space.d(x, y))?;
            let c = cone.coords(space.d(u, v))?;
            let rest = cone.coords(&space.rect_rhs(0.0, x, y, u, v)?)?;
            let mut need = 1.0f64;
            for i in 0..lhs.len() {
                let excess = lhs[i] - rest[i];
                if c[i] > 0.0 {
                    need = need.max(excess / c[i]);
                } else if excess > ORDER_TOL * 1f64.max(lhs[i].abs()).max(rest[i].abs()) {
                    return Ok(None);
                }
            }
            Ok(Some(need))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(needs
        .into_iter()
        .try_fold(1.0f64, |acc, need| need.map(|s| acc.max(s))))
}

/// Rounds a real weight up to an integer: s itself if integral, else floor(s) + 1.
pub fn normalize_weight(s: f64) -> Result<u64, SpaceError> {
    if !s.is_finite() || s < 1.0 {
        return Err(SpaceError::InvalidWeight(s));
    }
    Ok(if s.fract() == 0.0 {
        s as u64
    } else {
        s.floor() as u64 + 1
    })
}

/// The interval [lo, hi] with d(x, y) = |x - y| in [0, inf).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarDemoSpace {
    lo: f64,
    hi: f64,
}

const SCALAR_CONE: ConeSpec = ConeSpec::Orthant { dim: 1 };

impl ScalarDemoSpace {
    pub fn new(lo: f64, hi: f64) -> Result<Self, SpaceError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(SpaceError::InvalidInterval { lo, hi });
        }
        Ok(ScalarDemoSpace { lo, hi })
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
}

impl Space for ScalarDemoSpace {
    type Point = f64;

    fn cone(&self) -> &ConeSpec {
        &SCALAR_CONE
    }

    fn dist(&self, x: &f64, y: &f64) -> ConeElement {
        ConeElement::scalar((x - y).abs())
    }

    fn weight(&self) -> f64 {
        1.0
    }

    fn has_point(&self, p: &f64) -> bool {
        (self.lo..=self.hi).contains(p)
    }

    fn label(&self, p: &f64) -> String {
        p.to_string()
    }

    fn enumerate(&self) -> Option<Vec<f64>> {
        None
    }

    fn contraction_pairs(&self, seed: u64) -> Vec<(f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let span = self.hi - self.lo;
        let mut pairs: Vec<(f64, f64)> = (0..SAMPLED_PAIRS)
            .map(|_| {
                (
                    rng.gen_range(self.lo..=self.hi),
                    rng.gen_range(self.lo..=self.hi),
                )
            })
            .collect();
        pairs.extend((0..NEAR_DIAGONAL_PAIRS).map(|_| {
            let x = rng.gen_range(self.lo..=self.hi);
            let y = (x + rng.gen_range(-1e-6..1e-6) * span).clamp(self.lo, self.hi);
            (x, y)
        }));
        pairs
    }

    fn axiom_failure(&self) -> Option<String> {
        None
    }
}

impl Space for FiniteGcrSpace {
    type Point = usize;

    fn cone(&self) -> &ConeSpec {
        &self.cone
    }

    fn dist(&self, x: &usize, y: &usize) -> ConeElement {
        self.d(*x, *y).clone()
    }

    fn weight(&self) -> f64 {
        self.weight
    }

    fn has_point(&self, p: &usize) -> bool {
        *p < self.len()
    }

    fn label(&self, p: &usize) -> String {
        self.labels
            .get(*p)
            .cloned()
            .unwrap_or_else(|| format!("#{p}"))
    }

    fn enumerate(&self) -> Option<Vec<usize>> {
        Some((0..self.len()).collect())
    }

    fn contraction_pairs(&self, _seed: u64) -> Vec<(usize, usize)> {
        let n = self.len();
        (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).collect()
    }

    fn axiom_failure(&self) -> Option<String> {
        match verify_axioms(self) {
            Ok(r) => r.first_failure().map(|name| {
                let witness = match name {
                    "rectangular" => r.rectangular.witness.clone(),
                    "symmetry" => r.symmetry.witness.clone(),
                    "identity" => r.identity.witness.clone(),
                    _ => r.nonnegativity.witness.clone(),
                };
                format!("{name}: {}", witness.unwrap_or_default())
            }),
            Err(e) => Some(e.to_string()),
        }
    }
}

fn require_interior(cone: &ConeSpec, c: &ConeElement) -> Result<(), SpaceError> {
    if cone.in_interior(c)? {
        Ok(())
    } else {
        Err(SpaceError::NotInterior(c.clone()))
    }
}

/// Smallest N with d(x_n, candidate) << c for every n >= N in the trace.
pub fn weak_limit_index<S: Space>(
    space: &S,
    sequence: &[S::Point],
    candidate: &S::Point,
    c: &ConeElement,
) -> Result<Option<usize>, SpaceError> {
    let cone = space.cone();
    require_interior(cone, c)?;
    if sequence.is_empty() {
        return Err(SpaceError::EmptySequence);
    }
    let mut index = None;
    for (n, x) in sequence.iter().enumerate().rev() {
        if cone.strictly_below(&space.dist(x, candidate), c)? {
            index = Some(n);
        } else {
            break;
        }
    }
    Ok(index)
}

/// Whether the finite trace converges weakly to `candidate` at resolution c.
pub fn weak_limit_check<S: Space>(
    space: &S,
    sequence: &[S::Point],
    candidate: &S::Point,
    c: &ConeElement,
) -> Result<bool, SpaceError> {
    Ok(weak_limit_index(space, sequence, candidate, c)?.is_some())
}

/// Smallest N < horizon with d(x_n, x_{n+k}) << c for all n >= N and
/// n + k <= horizon. The horizon is clipped to the last index of the trace.
pub fn cauchy_index<S: Space>(
    space: &S,
    sequence: &[S::Point],
    c: &ConeElement,
    horizon: usize,
) -> Result<Option<usize>, SpaceError> {
    let cone = space.cone();
    require_interior(cone, c)?;
    if sequence.is_empty() {
        return Err(SpaceError::EmptySequence);
    }
    let h = horizon.min(sequence.len() - 1);
    if h == 0 {
        return Ok(None);
    }
    let mut index = None;
    for n in (0..h).rev() {
        let tail_ok = ((n + 1)..=h)
            .map(|m| cone.strictly_below(&space.dist(&sequence[n], &sequence[m]), c))
            .try_fold(true, |acc, r| r.map(|ok| acc && ok))?;
        if tail_ok {
            index = Some(n);
        } else {
            break;
        }
    }
    Ok(index)
}

pub fn cauchy_check<S: Space>(
    space: &S,
    sequence: &[S::Point],
    c: &ConeElement,
    horizon: usize,
) -> Result<bool, SpaceError> {
    Ok(cauchy_index(space, sequence, c, horizon)?.is_some())
}
