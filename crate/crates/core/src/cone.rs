//! Solid cones in a real vector space and the partial order they induce.
//!
//! Two families are shipped:
//!
//! * `Orthant { dim }` - the nonnegative orthant of R^m with the Euclidean norm.
//!   Interior points are the strictly positive vectors.
//! * `PolyC1 { grid }` - polynomials on [0, 1] that are nonnegative on a uniform
//!   evaluation grid, normed by `sup|f| + sup|f'|`. This cone is solid but not
//!   normal, which [`normality_probe`] demonstrates numerically.
//!
//! Every comparison reduces to the "coordinates" of an element: the vector
//! itself for the orthant, the grid values for polynomials. Membership in P is
//! then "all coordinates >= 0" in both cases.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Grid size used by [`ConeSpec::poly_default`].
pub const POLY_GRID_DEFAULT: usize = 1001;
/// A polynomial is interior when it is at least this large on every grid point.
pub const POLY_INTERIOR_EPS: f64 = 1e-9;
/// Largest polynomial degree accepted by the `PolyC1` family.
pub const POLY_MAX_DEGREE: usize = 128;
/// Relative slack used by [`ConeSpec::approx_leq`] callers throughout the crate.
pub const ORDER_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConeError {
    #[error("dimension mismatch: cone expects {expected}, element has {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("element kind does not match cone family {cone}")]
    KindMismatch { cone: String },
    #[error("polynomial degree {degree} exceeds the maximum {max}")]
    DegreeTooLarge { degree: usize, max: usize },
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("invalid cone: {0}")]
    InvalidCone(String),
}

/// An element of the ambient space E.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ConeElement {
    /// Coordinates in R^m.
    Vector(Vec<f64>),
    /// Coefficients in the monomial basis, constant term first.
    Poly(Vec<f64>),
}

impl ConeElement {
    pub fn scalar(v: f64) -> Self {
        ConeElement::Vector(vec![v])
    }

    /// Raw storage: coordinates or coefficients.
    pub fn values(&self) -> &[f64] {
        match self {
            ConeElement::Vector(v) | ConeElement::Poly(v) => v,
        }
    }

    /// The single coordinate of an element of R^1.
    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            ConeElement::Vector(v) if v.len() == 1 => Some(v[0]),
            _ => None,
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map(|v| v * factor)
    }

    pub fn neg(&self) -> Self {
        self.map(|v| -v)
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        match self {
            ConeElement::Vector(v) => ConeElement::Vector(v.iter().map(|&x| f(x)).collect()),
            ConeElement::Poly(c) => ConeElement::Poly(c.iter().map(|&x| f(x)).collect()),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, ConeError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, ConeError> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self, ConeError> {
        match (self, other) {
            (ConeElement::Vector(a), ConeElement::Vector(b)) => {
                if a.len() != b.len() {
                    return Err(ConeError::DimensionMismatch {
                        expected: a.len(),
                        found: b.len(),
                    });
                }
                Ok(ConeElement::Vector(
                    a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect(),
                ))
            }
            (ConeElement::Poly(a), ConeElement::Poly(b)) => {
                let n = a.len().max(b.len());
                let get = |c: &[f64], i: usize| c.get(i).copied().unwrap_or(0.0);
                Ok(ConeElement::Poly(
                    (0..n).map(|i| f(get(a, i), get(b, i))).collect(),
                ))
            }
            _ => Err(ConeError::KindMismatch {
                cone: "mixed vector/polynomial".into(),
            }),
        }
    }

    /// Sum of a sequence of compatible elements; `None` for an empty iterator.
    pub fn try_sum<'a>(
        mut items: impl Iterator<Item = &'a ConeElement>,
    ) -> Option<Result<ConeElement, ConeError>> {
        let first = items.next()?.clone();
        Some(items.try_fold(first, |acc, x| acc.try_add(x)))
    }
}

impl fmt::Display for ConeElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConeElement::Vector(v) if v.len() == 1 => write!(f, "{}", v[0]),
            ConeElement::Vector(v) => {
                write!(f, "(")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
            ConeElement::Poly(c) => {
                let mut wrote = false;
                for (i, &a) in c.iter().enumerate() {
                    if a == 0.0 {
                        continue;
                    }
                    if wrote {
                        write!(f, " + ")?;
                    }
                    match i {
                        0 => write!(f, "{a}")?,
                        1 => write!(f, "{a}t")?,
                        _ => write!(f, "{a}t^{i}")?,
                    }
                    wrote = true;
                }
                if !wrote {
                    write!(f, "0")?;
                }
                Ok(())
            }
        }
    }
}

/// A solid cone P in a real vector space E.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConeSpec {
    Orthant { dim: usize },
    PolyC1 { grid: usize },
}

impl ConeSpec {
    pub fn orthant(dim: usize) -> Self {
        ConeSpec::Orthant { dim }
    }

    pub fn poly_default() -> Self {
        ConeSpec::PolyC1 {
            grid: POLY_GRID_DEFAULT,
        }
    }

    /// P = [0, inf) in E = R.
    pub fn is_scalar(&self) -> bool {
        matches!(self, ConeSpec::Orthant { dim: 1 })
    }

    pub fn validate(&self) -> Result<(), ConeError> {
        match *self {
            ConeSpec::Orthant { dim: 0 } => Err(ConeError::InvalidCone(
                "orthant dimension must be positive".into(),
            )),
            ConeSpec::PolyC1 { grid } if grid < 2 => Err(ConeError::InvalidCone(
                "polynomial grid needs at least 2 points".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn zero(&self) -> ConeElement {
        match *self {
            ConeSpec::Orthant { dim } => ConeElement::Vector(vec![0.0; dim]),
            ConeSpec::PolyC1 { .. } => ConeElement::Poly(vec![0.0]),
        }
    }

    /// The reference interior element e: all ones, or the constant polynomial 1.
    pub fn unit(&self) -> ConeElement {
        match *self {
            ConeSpec::Orthant { dim } => ConeElement::Vector(vec![1.0; dim]),
            ConeSpec::PolyC1 { .. } => ConeElement::Poly(vec![1.0]),
        }
    }

    pub fn check(&self, x: &ConeElement) -> Result<(), ConeError> {
        match (*self, x) {
            (ConeSpec::Orthant { dim }, ConeElement::Vector(v)) => {
                if v.len() == dim {
                    Ok(())
                } else {
                    Err(ConeError::DimensionMismatch {
                        expected: dim,
                        found: v.len(),
                    })
                }
            }
            (ConeSpec::PolyC1 { .. }, ConeElement::Poly(c)) => {
                let degree = c.len().saturating_sub(1);
                if degree > POLY_MAX_DEGREE {
                    Err(ConeError::DegreeTooLarge {
                        degree,
                        max: POLY_MAX_DEGREE,
                    })
                } else {
                    Ok(())
                }
            }
            (cone, _) => Err(ConeError::KindMismatch {
                cone: cone.to_string(),
            }),
        }
    }

    /// Values whose componentwise sign decides membership in P.
    pub fn coords(&self, x: &ConeElement) -> Result<Vec<f64>, ConeError> {
        self.check(x)?;
        Ok(match (*self, x) {
            (ConeSpec::PolyC1 { grid }, ConeElement::Poly(c)) => poly_on_grid(c, grid),
            (_, other) => other.values().to_vec(),
        })
    }

    pub fn contains(&self, x: &ConeElement) -> Result<bool, ConeError> {
        Ok(self.coords(x)?.iter().all(|&v| v >= 0.0))
    }

    pub fn in_interior(&self, x: &ConeElement) -> Result<bool, ConeError> {
        let floor = self.interior_floor();
        Ok(self.coords(x)?.iter().all(|&v| v > floor))
    }

    fn interior_floor(&self) -> f64 {
        match self {
            ConeSpec::Orthant { .. } => 0.0,
            // `v > floor` with floor just below eps is `v >= eps`
            ConeSpec::PolyC1 { .. } => POLY_INTERIOR_EPS * (1.0 - f64::EPSILON),
        }
    }

    /// x <= y, i.e. y - x in P.
    pub fn leq(&self, x: &ConeElement, y: &ConeElement) -> Result<bool, ConeError> {
        self.check(x)?;
        self.check(y)?;
        self.contains(&y.try_sub(x)?)
    }

    /// x << y, i.e. y - x in int P.
    pub fn strictly_below(&self, x: &ConeElement, y: &ConeElement) -> Result<bool, ConeError> {
        self.check(x)?;
        self.check(y)?;
        self.in_interior(&y.try_sub(x)?)
    }

    /// x <= y up to a per-coordinate slack of `rel_tol * max(1, |x_i|, |y_i|)`.
    pub fn approx_leq(
        &self,
        x: &ConeElement,
        y: &ConeElement,
        rel_tol: f64,
    ) -> Result<bool, ConeError> {
        let cx = self.coords(x)?;
        let cy = self.coords(y)?;
        Ok(cx
            .iter()
            .zip(&cy)
            .all(|(&a, &b)| b - a >= -rel_tol * 1f64.max(a.abs()).max(b.abs())))
    }

    /// Every coordinate within `tol` of zero.
    pub fn is_zero(&self, x: &ConeElement, tol: f64) -> Result<bool, ConeError> {
        Ok(self.coords(x)?.iter().all(|v| v.abs() <= tol))
    }

    pub fn norm(&self, x: &ConeElement) -> Result<f64, ConeError> {
        self.check(x)?;
        Ok(match (*self, x) {
            (ConeSpec::PolyC1 { grid }, ConeElement::Poly(c)) => {
                let sup = |vals: Vec<f64>| vals.into_iter().fold(0.0f64, |m, v| m.max(v.abs()));
                sup(poly_on_grid(c, grid)) + sup(poly_on_grid(&derivative(c), grid))
            }
            (_, other) => other.values().iter().map(|v| v * v).sum::<f64>().sqrt(),
        })
    }

    /// Draws an element of P.
    pub fn sample_element<R: Rng>(&self, rng: &mut R) -> ConeElement {
        match *self {
            ConeSpec::Orthant { dim } => ConeElement::Vector(
                (0..dim)
                    .map(|_| {
                        if rng.gen_bool(0.1) {
                            0.0
                        } else {
                            rng.gen_range(0.0..10.0)
                        }
                    })
                    .collect(),
            ),
            ConeSpec::PolyC1 { .. } => {
                let degree = rng.gen_range(0..=4);
                ConeElement::Poly(
                    (0..=degree)
                        .map(|_| {
                            if rng.gen_bool(0.2) {
                                0.0
                            } else {
                                rng.gen_range(0.0..5.0)
                            }
                        })
                        .collect(),
                )
            }
        }
    }

    /// Draws an element of int P.
    pub fn sample_interior<R: Rng>(&self, rng: &mut R) -> ConeElement {
        let lift = self.unit().scale(rng.gen_range(0.05..2.0));
        self.sample_element(rng)
            .try_add(&lift)
            .expect("sampled elements match their cone")
    }
}

impl fmt::Display for ConeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConeSpec::Orthant { dim } => write!(f, "orthant({dim})"),
            ConeSpec::PolyC1 { grid } => write!(f, "polyc1(grid={grid})"),
        }
    }
}

fn grid_point(j: usize, grid: usize) -> f64 {
    j as f64 / (grid - 1) as f64
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

fn poly_on_grid(coeffs: &[f64], grid: usize) -> Vec<f64> {
    (0..grid)
        .map(|j| horner(coeffs, grid_point(j, grid)))
        .collect()
}

fn derivative(coeffs: &[f64]) -> Vec<f64> {
    if coeffs.len() <= 1 {
        return vec![0.0];
    }
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| i as f64 * c)
        .collect()
}

/// Empirical lower bound on the normality constant of a cone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalityProbeResult {
    pub best_ratio: f64,
    /// (x, y) with 0 <= x <= y attaining `best_ratio = |x| / |y|`.
    pub witness: (ConeElement, ConeElement),
    pub pairs_examined: usize,
}

/// Searches ordered pairs 0 <= x <= y for the largest |x| / |y|.
///
/// The orthant is sampled at random. For polynomials the probe walks the
/// family x_n(t) = t^n / n, y_n(t) = 1 / n for n = 1..=max_degree, whose ratio
/// is n + 1, so no single constant bounds it.
pub fn normality_probe(
    cone: &ConeSpec,
    trials: usize,
    max_degree: usize,
    seed: u64,
) -> Result<NormalityProbeResult, ConeError> {
    if trials == 0 {
        return Err(ConeError::NoTrials);
    }
    cone.validate()?;
    let mut best: Option<NormalityProbeResult> = None;
    let mut consider = |x: ConeElement, y: ConeElement, examined: usize| -> Result<(), ConeError> {
        debug_assert!(cone.contains(&x)? && cone.leq(&x, &y)?);
        let ny = cone.norm(&y)?;
        if ny <= 0.0 {
            return Ok(());
        }
        let ratio = cone.norm(&x)? / ny;
        if best.as_ref().is_none_or(|b| ratio > b.best_ratio) {
            best = Some(NormalityProbeResult {
                best_ratio: ratio,
                witness: (x, y),
                pairs_examined: examined,
            });
        }
        Ok(())
    };

    let examined = match *cone {
        ConeSpec::Orthant { .. } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..trials {
                let x = cone.sample_element(&mut rng);
                let gap = cone.sample_element(&mut rng);
                let y = x.try_add(&gap)?;
                consider(x, y, 0)?;
            }
            trials
        }
        ConeSpec::PolyC1 { .. } => {
            if max_degree == 0 || max_degree > POLY_MAX_DEGREE {
                return Err(ConeError::DegreeTooLarge {
                    degree: max_degree,
                    max: POLY_MAX_DEGREE,
                });
            }
            for n in 1..=max_degree {
                let inv = 1.0 / n as f64;
                let mut xs = vec![0.0; n + 1];
                xs[n] = inv;
                consider(ConeElement::Poly(xs), ConeElement::Poly(vec![inv]), 0)?;
            }
            max_degree
        }
    };
    let mut result = best.ok_or(ConeError::NoTrials)?;
    result.pairs_examined = examined;
    Ok(result)
}

/// Outcome of one sampled order property.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyVerdict {
    pub name: &'static str,
    pub pass: bool,
    pub checked: usize,
    pub witness: Option<String>,
}

impl PropertyVerdict {
    fn new(name: &'static str) -> Self {
        PropertyVerdict {
            name,
            pass: true,
            checked: 0,
            witness: None,
        }
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok && self.pass {
            self.pass = false;
            self.witness = Some(witness());
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaReport {
    pub properties: Vec<PropertyVerdict>,
}

impl LemmaReport {
    pub fn all_pass(&self) -> bool {
        self.properties.iter().all(|p| p.pass)
    }
}

/// Samples the elementary order facts every argument about cones leans on.
pub fn lemma_suite(cone: &ConeSpec, samples: usize, seed: u64) -> Result<LemmaReport, ConeError> {
    cone.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut add_int = PropertyVerdict::new("P + int P in int P");
    let mut scale_int = PropertyVerdict::new("a * int P in int P (a > 0)");
    let mut below_self = PropertyVerdict::new("u <= k u with k < 1 forces u = 0");
    let mut lifts = PropertyVerdict::new("0 << v <= u implies u in int P");
    let mut chain = PropertyVerdict::new("u <= v << w implies u << w");
    let mut small = PropertyVerdict::new("0 <= u << c for all c >> 0 forces u = 0");

    for _ in 0..samples {
        let p = cone.sample_element(&mut rng);
        let q = cone.sample_interior(&mut rng);

        let sum = p.try_add(&q)?;
        add_int.record(cone.in_interior(&sum)?, || format!("p = {p}, q = {q}"));

        // a = 0 maps int P onto 0, which is not interior
        let a: f64 = rng.gen_range(1e-3..100.0);
        scale_int.record(cone.in_interior(&q.scale(a))?, || {
            format!("a = {a}, q = {q}")
        });

        let k: f64 = rng.gen_range(0.0..1.0);
        if !cone.is_zero(&p, 0.0)? {
            let ku = p.scale(k);
            below_self.record(!cone.leq(&p, &ku)?, || format!("u = {p}, k = {k}"));
        }

        let u = q.try_add(&p)?;
        lifts.record(
            !(cone.strictly_below(&cone.zero(), &q)? && cone.leq(&q, &u)?)
                || cone.in_interior(&u)?,
            || format!("v = {q}, u = {u}"),
        );

        let lo = cone.sample_element(&mut rng);
        let v = lo.try_add(&p)?;
        let w = v.try_add(&q)?;
        if cone.leq(&lo, &v)? && cone.strictly_below(&v, &w)? {
            chain.record(cone.strictly_below(&lo, &w)?, || {
                format!("u = {lo}, v = {v}, w = {w}")
            });
        }

        // contrapositive: a nonzero u in P escapes c = (max coordinate / 2) e
        let top = cone.coords(&p)?.into_iter().fold(0.0f64, f64::max);
        if top > 0.0 {
            let c = cone.unit().scale(top / 2.0);
            small.record(!cone.strictly_below(&p, &c)?, || {
                format!("u = {p}, c = {c}")
            });
        }
        small.record(cone.strictly_below(&cone.zero(), &q)?, || {
            format!("c = {q}")
        });
    }

    Ok(LemmaReport {
        properties: vec![add_int, scale_int, below_self, lifts, chain, small],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> ConeElement {
        ConeElement::Vector(xs.to_vec())
    }

    fn poly(cs: &[f64]) -> ConeElement {
        ConeElement::Poly(cs.to_vec())
    }

    #[test]
    fn orthant_membership() {
        let c = ConeSpec::orthant(2);
        assert!(c.contains(&v(&[1.0, 2.0])).unwrap());
        assert!(!c.contains(&v(&[-1.0, 0.0])).unwrap());
        assert!(c.contains(&v(&[0.0, 0.0])).unwrap());
    }

    #[test]
    fn orthant_interior() {
        let c = ConeSpec::orthant(2);
        assert!(c.in_interior(&v(&[1.0, 1.0])).unwrap());
        assert!(!c.in_interior(&v(&[0.0, 1.0])).unwrap());
        assert!(c.in_interior(&v(&[1e-9, 1.0])).unwrap());
    }

    #[test]
    fn order_relations() {
        let c = ConeSpec::orthant(2);
        assert!(c.leq(&v(&[1.0, 1.0]), &v(&[2.0, 3.0])).unwrap());
        assert!(!c.leq(&v(&[1.0, 5.0]), &v(&[2.0, 3.0])).unwrap());
        let x = v(&[0.3, -7.0]);
        assert!(c.leq(&x, &x).unwrap());

        assert!(c.strictly_below(&v(&[1.0, 1.0]), &v(&[2.0, 3.0])).unwrap());
        assert!(!c.strictly_below(&v(&[1.0, 1.0]), &v(&[1.0, 3.0])).unwrap());
        assert!(c.strictly_below(&v(&[0.0, 0.0]), &v(&[1.0, 1.0])).unwrap());
    }

    #[test]
    fn dimension_errors() {
        let c = ConeSpec::orthant(2);
        assert_eq!(
            c.contains(&v(&[1.0])),
            Err(ConeError::DimensionMismatch {
                expected: 2,
                found: 1
            })
        );
        assert!(matches!(
            c.leq(&v(&[1.0, 1.0]), &poly(&[1.0])),
            Err(ConeError::KindMismatch { .. })
        ));
        let too_long = poly(&vec![0.0; POLY_MAX_DEGREE + 2]);
        assert!(matches!(
            ConeSpec::poly_default().norm(&too_long),
            Err(ConeError::DegreeTooLarge { .. })
        ));
    }

    #[test]
    fn norms() {
        let o = ConeSpec::orthant(2);
        assert_eq!(o.norm(&v(&[3.0, 4.0])).unwrap(), 5.0);
        let p = ConeSpec::poly_default();
        assert_eq!(p.norm(&poly(&[0.0, 1.0])).unwrap(), 2.0);
        assert_eq!(p.norm(&poly(&[0.0, 0.0, 1.0])).unwrap(), 3.0);
    }

    #[test]
    fn poly_interior_uses_grid_floor() {
        let p = ConeSpec::poly_default();
        assert!(p.in_interior(&poly(&[1e-9])).unwrap());
        assert!(!p.in_interior(&poly(&[5e-10])).unwrap());
        // t vanishes at the left endpoint
        assert!(!p.in_interior(&poly(&[0.0, 1.0])).unwrap());
        assert!(p.contains(&poly(&[0.0, 1.0])).unwrap());
        // 1/4 - t + t^2 = (t - 1/2)^2 touches zero at a grid point
        assert!(p.contains(&poly(&[0.25, -1.0, 1.0])).unwrap());
        assert!(!p.contains(&poly(&[0.2, -1.0, 1.0])).unwrap());
    }

    #[test]
    fn probe_rejects_zero_trials() {
        assert_eq!(
            normality_probe(&ConeSpec::orthant(2), 0, 1, 0),
            Err(ConeError::NoTrials)
        );
    }

    #[test]
    fn poly_probe_degree_nine() {
        let r = normality_probe(&ConeSpec::poly_default(), 1, 9, 0).unwrap();
        assert!((r.best_ratio - 10.0).abs() < 1e-12);
        let mut x = vec![0.0; 10];
        x[9] = 1.0 / 9.0;
        assert_eq!(r.witness, (poly(&x), poly(&[1.0 / 9.0])));
    }

    #[test]
    fn lemma_examples() {
        let c = ConeSpec::orthant(2);
        let u = v(&[1.0, 1.0]);
        assert!(!c.leq(&u, &u.scale(0.5)).unwrap());
        let z = c.zero();
        assert!(c.leq(&z, &z.scale(0.5)).unwrap());
        let report = lemma_suite(&c, 1000, 3).unwrap();
        assert!(report.all_pass(), "{report:?}");
        assert!(report.properties.iter().all(|p| p.checked > 0));
    }

    #[test]
    fn poly_lemmas() {
        let report = lemma_suite(&ConeSpec::poly_default(), 200, 5).unwrap();
        assert!(report.all_pass(), "{report:?}");
    }

    #[test]
    fn display() {
        assert_eq!(v(&[4.0, 6.0]).to_string(), "(4,6)");
        assert_eq!(ConeElement::scalar(2.5).to_string(), "2.5");
        assert_eq!(poly(&[1.0, 0.0, 2.0]).to_string(), "1 + 2t^2");
    }
}
