//! Reich-type contractions on cone rectangular metric spaces.
//!
//! A self-map T is checked against
//!
//! ```text
//! phi(d(Tx,Ty)) <= mu phi(d(x,y)) + alpha phi(d(x,Tx)) + beta phi(d(y,Ty)) + gamma phi(d(y,Tx))
//! ```
//!
//! with mu, alpha, beta, gamma >= 0, mu + alpha + beta < 1, mu < 1/s and
//! mu + gamma < 1. Under those hypotheses consecutive iterates shrink like
//! delta^n with delta = (mu + alpha) / (1 - beta), and every tail distance from
//! the n-th iterate is bounded by
//!
//! ```text
//! B(n) = (5 delta^(n-1) / (1 - mu s) + s delta^n / (1 - delta)) phi(d(x, Tx))
//! ```
//!
//! which is what [`picard_run`] uses as its stopping certificate.

use crate::altering::{Altering, AlteringError, AlteringFn};
use crate::cone::{ConeElement, ConeError, ConeSpec, ORDER_TOL};
use crate::space::{normalize_weight, FiniteGcrSpace, Space, SpaceError};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;
use thiserror::Error;

/// Cap on [`stopping_index`] searches.
pub const MAX_STOPPING_INDEX: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("parameters violate the hypotheses: {0}")]
    InvalidParams(ParamViolation),
    #[error("beta = {0} must be < 1")]
    BetaTooLarge(f64),
    #[error("mu * s = {0} must be < 1")]
    MuWeightTooLarge(f64),
    #[error("delta = {0} must lie in [0, 1)")]
    InvalidDelta(f64),
    #[error("bound index must be >= 1")]
    ZeroIndex,
    #[error("tolerance {0} is not strictly positive")]
    NonPositiveTolerance(ConeElement),
    #[error("no index up to {0} certifies the tolerance")]
    NoStoppingIndex(usize),
    #[error("map sends {from} to {to}, outside the space")]
    MapLeavesSpace { from: String, to: String },
    #[error("start point {0} does not belong to the space")]
    UnknownStart(String),
    #[error("space fails its axioms: {0}")]
    SpaceAxioms(String),
    #[error("contractive condition fails at x = {x}, y = {y}: {lhs} is not <= {rhs}")]
    ContractionFails {
        x: String,
        y: String,
        lhs: ConeElement,
        rhs: ConeElement,
    },
    #[error("no fixed point after {iterations} iterations ({diagnostic})")]
    MaxIterations {
        iterations: usize,
        diagnostic: String,
    },
    #[error(transparent)]
    Altering(#[from] AlteringError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Cone(#[from] ConeError),
}

/// First hypothesis on (mu, alpha, beta, gamma) that fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ParamViolation {
    NotFinite(&'static str),
    Negative(&'static str),
    SumTooLarge,
    MuTooLargeForWeight,
    MuGammaTooLarge,
}

impl fmt::Display for ParamViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamViolation::NotFinite(name) => write!(f, "{name} not finite"),
            ParamViolation::Negative(name) => write!(f, "{name} not >= 0"),
            ParamViolation::SumTooLarge => write!(f, "mu+alpha+beta not < 1"),
            ParamViolation::MuTooLargeForWeight => write!(f, "mu not < 1/s"),
            ParamViolation::MuGammaTooLarge => write!(f, "mu+gamma not < 1"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReichParams {
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub phi: AlteringFn,
}

impl ReichParams {
    pub fn new(mu: f64, alpha: f64, beta: f64, gamma: f64, phi: AlteringFn) -> Self {
        ReichParams {
            mu,
            alpha,
            beta,
            gamma,
            phi,
        }
    }

    /// Builds a [`Preset`] and validates it at weight s.
    pub fn preset(preset: Preset, s: f64) -> Result<Self, EngineError> {
        let phi = AlteringFn::Power;
        let params = match preset {
            Preset::Banach { mu, t } => ReichParams::new(mu, 0.0, 0.0, 0.0, phi(t)),
            Preset::Kannan { alpha, t } => ReichParams::new(0.0, alpha, alpha, 0.0, phi(t)),
            Preset::Reich { alpha, beta, mu, t } => ReichParams::new(mu, alpha, beta, 0.0, phi(t)),
        };
        validate_params(&params, s).map_err(EngineError::InvalidParams)?;
        Ok(params)
    }
}

/// Special cases of the general condition, all with phi(a) = a^t on [0, inf).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    /// d(Tx,Ty)^t <= mu d(x,y)^t
    Banach { mu: f64, t: f64 },
    /// d(Tx,Ty)^t <= alpha (d(x,Tx)^t + d(y,Ty)^t); needs alpha < 1/2
    Kannan { alpha: f64, t: f64 },
    /// gamma = 0, alpha + beta + mu < 1
    Reich {
        alpha: f64,
        beta: f64,
        mu: f64,
        t: f64,
    },
}

/// Checks the four sign constraints, then the three strict inequalities.
pub fn validate_params(params: &ReichParams, s: f64) -> Result<(), ParamViolation> {
    let named = [
        ("mu", params.mu),
        ("alpha", params.alpha),
        ("beta", params.beta),
        ("gamma", params.gamma),
    ];
    for (name, value) in named {
        if !value.is_finite() {
            return Err(ParamViolation::NotFinite(name));
        }
    }
    for (name, value) in named {
        if value < 0.0 {
            return Err(ParamViolation::Negative(name));
        }
    }
    if !s.is_finite() {
        return Err(ParamViolation::NotFinite("s"));
    }
    if params.mu + params.alpha + params.beta >= 1.0 {
        return Err(ParamViolation::SumTooLarge);
    }
    if params.mu * s >= 1.0 {
        return Err(ParamViolation::MuTooLargeForWeight);
    }
    if params.mu + params.gamma >= 1.0 {
        return Err(ParamViolation::MuGammaTooLarge);
    }
    Ok(())
}

/// Weight the engine works with: the space's weight rounded up to an integer.
pub fn effective_weight<S: Space>(space: &S) -> Result<f64, EngineError> {
    Ok(normalize_weight(space.weight())? as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionViolation<P> {
    pub x: P,
    pub y: P,
    pub lhs: ConeElement,
    pub rhs: ConeElement,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionReport<P> {
    pub pass: bool,
    pub pairs_checked: usize,
    pub violations: Vec<ContractionViolation<P>>,
}

/// Left and right sides of the contractive condition at the ordered pair (x, y).
pub fn contraction_sides<S, F>(
    space: &S,
    map: &F,
    params: &ReichParams,
    x: &S::Point,
    y: &S::Point,
) -> Result<(ConeElement, ConeElement), EngineError>
where
    S: Space,
    F: Fn(&S::Point) -> S::Point,
{
    let cone = space.cone();
    let phi = |a: ConeElement| params.phi.apply(cone, &a);
    let (tx, ty) = (map(x), map(y));
    let lhs = phi(space.dist(&tx, &ty))?;
    let rhs = phi(space.dist(x, y))?
        .scale(params.mu)
        .try_add(&phi(space.dist(x, &tx))?.scale(params.alpha))?
        .try_add(&phi(space.dist(y, &ty))?.scale(params.beta))?
        .try_add(&phi(space.dist(y, &tx))?.scale(params.gamma))?;
    Ok((lhs, rhs))
}

fn check_map_closed<S, F>(space: &S, map: &F, points: &[S::Point]) -> Result<(), EngineError>
where
    S: Space,
    F: Fn(&S::Point) -> S::Point,
{
    for p in points {
        let q = map(p);
        if !space.has_point(&q) {
            return Err(EngineError::MapLeavesSpace {
                from: space.label(p),
                to: format!("{q:?}"),
            });
        }
    }
    Ok(())
}

/// Evaluates the contractive condition on every ordered pair of a finite space
/// (x = y included) or on seeded pairs of an infinite one.
pub fn check_contraction<S, F>(
    space: &S,
    map: &F,
    params: &ReichParams,
    seed: u64,
) -> Result<ContractionReport<S::Point>, EngineError>
where
    S: Space,
    F: Fn(&S::Point) -> S::Point + Sync,
{
    let pairs = space.contraction_pairs(seed);
    let points = space.enumerate().unwrap_or_else(|| {
        pairs
            .iter()
            .flat_map(|(x, y)| [x.clone(), y.clone()])
            .collect()
    });
    check_map_closed(space, map, &points)?;
    let cone = space.cone();
    let violations = pairs
        .par_iter()
        .map(
            |(x, y)| -> Result<Option<ContractionViolation<S::Point>>, EngineError> {
                let (lhs, rhs) = contraction_sides(space, map, params, x, y)?;
                Ok(
                    (!cone.approx_leq(&lhs, &rhs, ORDER_TOL)?).then(|| ContractionViolation {
                        x: x.clone(),
                        y: y.clone(),
                        lhs,
                        rhs,
                    }),
                )
            },
        )
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect::<Vec<_>>();
    Ok(ContractionReport {
        pass: violations.is_empty(),
        pairs_checked: pairs.len(),
        violations,
    })
}

/// delta = (mu + alpha) / (1 - beta).
pub fn delta_of(params: &ReichParams) -> Result<f64, EngineError> {
    if params.beta >= 1.0 {
        return Err(EngineError::BetaTooLarge(params.beta));
    }
    Ok((params.mu + params.alpha) / (1.0 - params.beta))
}

/// delta^n * D0, the bound on phi(d(T^n x, T^(n+1) x)).
pub fn decay_bound(n: u32, delta: f64, d0: &ConeElement) -> ConeElement {
    d0.scale(delta.powi(n as i32))
}

/// The scalar factor of B(n).
pub fn apriori_coefficient(n: u32, delta: f64, mu: f64, s: f64) -> Result<f64, EngineError> {
    if n == 0 {
        return Err(EngineError::ZeroIndex);
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(EngineError::InvalidDelta(delta));
    }
    if mu * s >= 1.0 {
        return Err(EngineError::MuWeightTooLarge(mu * s));
    }
    // delta = 0 gives 5 / (1 - mu s) at n = 1 and 0 afterwards (0^0 = 1)
    Ok(5.0 * delta.powi(n as i32 - 1) / (1.0 - mu * s) + s * delta.powi(n as i32) / (1.0 - delta))
}

/// B(n), a bound on phi(d(T^n x, T^(n+k) x)) uniform in k >= 1.
pub fn apriori_bound(
    n: u32,
    delta: f64,
    mu: f64,
    s: f64,
    d0: &ConeElement,
) -> Result<ConeElement, EngineError> {
    Ok(d0.scale(apriori_coefficient(n, delta, mu, s)?))
}

/// Least n >= 1 with B(n) <= tolerance, searched up to `cap`.
pub fn stopping_index(
    cone: &ConeSpec,
    tolerance: &ConeElement,
    delta: f64,
    mu: f64,
    s: f64,
    d0: &ConeElement,
    cap: usize,
) -> Result<usize, EngineError> {
    if !cone.in_interior(tolerance)? {
        return Err(EngineError::NonPositiveTolerance(tolerance.clone()));
    }
    for n in 1..=cap.min(u32::MAX as usize) {
        let bound = apriori_bound(n as u32, delta, mu, s, d0)?;
        if cone.leq(&bound, tolerance)? {
            return Ok(n);
        }
    }
    Err(EngineError::NoStoppingIndex(cap))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    /// Scalar tolerance; vector cones use tolerance * e.
    pub tolerance: f64,
    pub max_iter: usize,
    /// Seed for sampled contraction checks on infinite spaces.
    pub seed: u64,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions {
            tolerance: 1e-9,
            max_iter: 10_000,
            seed: 0,
        }
    }
}

/// Everything a solve establishes about its fixed point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate<P> {
    pub delta: f64,
    /// phi(d(x0, T x0)).
    pub d0: ConeElement,
    pub mu: f64,
    /// Integer weight used in the bounds.
    pub weight: f64,
    pub tolerance: f64,
    /// Certified index from [`stopping_index`]; `None` on finite spaces, which
    /// stop at an exact fixed point.
    pub stop_index: Option<usize>,
    pub trace: Vec<P>,
    pub fixed_point: P,
    pub iterations_used: usize,
    /// phi(d(p, T p)) at the returned point.
    pub residual: ConeElement,
    pub oracle: Option<Vec<P>>,
    pub oracle_agreed: Option<bool>,
}

impl<P> Certificate<P> {
    /// `key: value` lines followed by a `trace:` block.
    pub fn to_report(&self, label: impl Fn(&P) -> String) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(": ");
            out.push_str(&v);
            out.push('\n');
        };
        line("delta", self.delta.to_string());
        line("d0", self.d0.to_string());
        line("mu", self.mu.to_string());
        line("weight", self.weight.to_string());
        line("tolerance", self.tolerance.to_string());
        line(
            "stop_index",
            self.stop_index.map_or("exact".into(), |n| n.to_string()),
        );
        line("fixed_point", label(&self.fixed_point));
        line("iterations_used", self.iterations_used.to_string());
        line("residual", self.residual.to_string());
        if let Some(oracle) = &self.oracle {
            line(
                "oracle",
                format!(
                    "{{{}}}",
                    oracle.iter().map(&label).collect::<Vec<_>>().join(",")
                ),
            );
        }
        if let Some(agreed) = self.oracle_agreed {
            line("oracle_agreed", agreed.to_string());
        }
        out.push_str("trace:\n");
        for (i, p) in self.trace.iter().enumerate() {
            out.push_str(&format!("  {i} {}\n", label(p)));
        }
        out
    }
}

/// Iterates x_(n+1) = T x_n from `start` after checking every hypothesis.
///
/// Finite spaces stop at the first exact repeat x_(n+1) = x_n and are
/// compared against [`brute_force_fixed_points`]. Other spaces stop at the
/// certified index where B(n) <= tolerance, or earlier at an exact repeat.
pub fn picard_run<S, F>(
    space: &S,
    map: &F,
    params: &ReichParams,
    start: &S::Point,
    opts: &PicardOptions,
) -> Result<Certificate<S::Point>, EngineError>
where
    S: Space,
    F: Fn(&S::Point) -> S::Point + Sync,
{
    if !space.has_point(start) {
        return Err(EngineError::UnknownStart(format!("{start:?}")));
    }
    let s = effective_weight(space)?;
    validate_params(params, s).map_err(EngineError::InvalidParams)?;
    if let Some(failure) = space.axiom_failure() {
        return Err(EngineError::SpaceAxioms(failure));
    }
    let report = check_contraction(space, map, params, opts.seed)?;
    if let Some(v) = report.violations.first() {
        return Err(EngineError::ContractionFails {
            x: space.label(&v.x),
            y: space.label(&v.y),
            lhs: v.lhs.clone(),
            rhs: v.rhs.clone(),
        });
    }

    let cone = space.cone();
    let phi_dist = |a: &S::Point, b: &S::Point| params.phi.apply(cone, &space.dist(a, b));
    let delta = delta_of(params)?;
    let first = map(start);
    let d0 = phi_dist(start, &first)?;
    let finite = space.enumerate();

    let stop_index = if finite.is_some() {
        None
    } else {
        let tol = cone.unit().scale(opts.tolerance);
        Some(stopping_index(
            cone,
            &tol,
            delta,
            params.mu,
            s,
            &d0,
            MAX_STOPPING_INDEX,
        )?)
    };
    let budget = stop_index.map_or(opts.max_iter, |n| n.min(opts.max_iter));

    let mut trace = vec![start.clone()];
    let mut current = start.clone();
    let mut next = first;
    loop {
        if next == current {
            break;
        }
        if trace.len() > budget {
            if stop_index.is_some_and(|n| n <= budget) {
                break;
            }
            let diagnostic = if finite.is_some() {
                "all hypotheses verified; the map or table changed during the run".to_string()
            } else {
                format!(
                    "certified index {} exceeds the iteration budget; contraction was only sampled",
                    stop_index.unwrap_or(0)
                )
            };
            return Err(EngineError::MaxIterations {
                iterations: trace.len() - 1,
                diagnostic,
            });
        }
        trace.push(next.clone());
        current = next;
        next = map(&current);
    }

    let residual = phi_dist(&current, &next)?;
    let oracle = finite.map(|points| {
        points
            .into_iter()
            .filter(|p| map(p) == *p)
            .collect::<Vec<_>>()
    });
    let oracle_agreed = oracle
        .as_ref()
        .map(|fixed| fixed.len() == 1 && fixed[0] == current);
    Ok(Certificate {
        delta,
        d0,
        mu: params.mu,
        weight: s,
        tolerance: opts.tolerance,
        stop_index,
        iterations_used: trace.len() - 1,
        fixed_point: current,
        trace,
        residual,
        oracle,
        oracle_agreed,
    })
}

/// {x : T(x) = x} by enumeration.
pub fn brute_force_fixed_points<F>(space: &FiniteGcrSpace, map: &F) -> Vec<usize>
where
    F: Fn(&usize) -> usize,
{
    (0..space.len()).filter(|p| map(p) == *p).collect()
}

/// A self-map of a finite space given by its table of images.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteMap {
    images: Vec<usize>,
}

impl FiniteMap {
    pub fn new(images: Vec<usize>) -> Self {
        FiniteMap { images }
    }

    pub fn constant(n: usize, p: usize) -> Self {
        FiniteMap { images: vec![p; n] }
    }

    pub fn image(&self, p: usize) -> usize {
        // out-of-range points map out of range, which the engine reports
        self.images.get(p).copied().unwrap_or(usize::MAX)
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn as_fn(&self) -> impl Fn(&usize) -> usize + Sync + '_ {
        move |p| self.image(*p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::ScalarDemoSpace;

    fn params(mu: f64, alpha: f64, beta: f64, gamma: f64) -> ReichParams {
        ReichParams::new(mu, alpha, beta, gamma, AlteringFn::Identity)
    }

    fn four_point_space() -> FiniteGcrSpace {
        let one = ConeElement::Vector(vec![1.0, 1.0]);
        FiniteGcrSpace::from_pairs(
            (1..=4).map(|i| i.to_string()).collect(),
            ConeSpec::orthant(2),
            &[
                ((0, 1), ConeElement::Vector(vec![4.0, 6.0])),
                ((0, 2), one.clone()),
                ((0, 3), one.clone()),
                ((1, 2), one.clone()),
                ((1, 3), one.clone()),
                ((2, 3), one),
            ],
            4.0,
        )
        .unwrap()
    }

    #[test]
    fn validate_examples() {
        assert_eq!(validate_params(&params(0.1, 0.2, 0.3, 0.2), 2.0), Ok(()));
        assert_eq!(
            validate_params(&params(0.0, 0.5, 0.5, 0.0), 1.0),
            Err(ParamViolation::SumTooLarge)
        );
        assert_eq!(
            validate_params(&params(0.3, 0.0, 0.0, 0.0), 4.0),
            Err(ParamViolation::MuTooLargeForWeight)
        );
        assert_eq!(
            validate_params(&params(0.2, 0.0, 0.0, 0.8), 1.0),
            Err(ParamViolation::MuGammaTooLarge)
        );
        assert_eq!(
            validate_params(&params(0.1, -0.1, 0.0, 0.0), 1.0),
            Err(ParamViolation::Negative("alpha"))
        );
        assert_eq!(
            validate_params(&params(0.1, 0.0, f64::NAN, 0.0), 1.0),
            Err(ParamViolation::NotFinite("beta"))
        );
        assert_eq!(
            ParamViolation::SumTooLarge.to_string(),
            "mu+alpha+beta not < 1"
        );
        assert_eq!(
            ParamViolation::MuTooLargeForWeight.to_string(),
            "mu not < 1/s"
        );
    }

    #[test]
    fn delta_examples() {
        assert!((delta_of(&params(0.1, 0.2, 0.3, 0.0)).unwrap() - 3.0 / 7.0).abs() < 1e-15);
        assert_eq!(delta_of(&params(0.0, 0.0, 0.0, 0.0)).unwrap(), 0.0);
        assert!((delta_of(&params(0.2, 0.2, 0.5, 0.0)).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(
            delta_of(&params(0.0, 0.0, 1.0, 0.0)),
            Err(EngineError::BetaTooLarge(1.0))
        );
    }

    #[test]
    fn decay_examples() {
        let d0 = ConeElement::scalar(8.0);
        assert_eq!(decay_bound(3, 0.5, &d0), ConeElement::scalar(1.0));
        assert_eq!(decay_bound(1, 0.0, &d0), ConeElement::scalar(0.0));
        assert_eq!(decay_bound(0, 0.3, &d0), d0);
    }

    #[test]
    fn apriori_examples() {
        let one = ConeElement::scalar(1.0);
        assert_eq!(
            apriori_bound(1, 0.5, 0.0, 1.0, &one).unwrap(),
            ConeElement::scalar(6.0)
        );
        assert_eq!(
            apriori_bound(2, 0.0, 0.2, 3.0, &one).unwrap(),
            ConeElement::scalar(0.0)
        );
        let b = apriori_bound(1, 0.0, 0.2, 3.0, &one)
            .unwrap()
            .as_scalar()
            .unwrap();
        assert!((b - 12.5).abs() < 1e-12);
        assert_eq!(
            apriori_bound(0, 0.5, 0.0, 1.0, &one),
            Err(EngineError::ZeroIndex)
        );
        assert!(matches!(
            apriori_bound(1, 0.5, 0.5, 2.0, &one),
            Err(EngineError::MuWeightTooLarge(_))
        ));
    }

    #[test]
    fn stopping_examples() {
        let c = ConeSpec::orthant(1);
        let one = ConeElement::scalar(1.0);
        let tol = ConeElement::scalar(0.01);
        assert_eq!(
            stopping_index(&c, &tol, 0.5, 0.0, 1.0, &one, MAX_STOPPING_INDEX).unwrap(),
            11
        );
        assert_eq!(
            stopping_index(&c, &tol, 0.0, 0.0, 1.0, &one, MAX_STOPPING_INDEX).unwrap(),
            2
        );
        let huge = ConeElement::scalar(6.0);
        assert_eq!(
            stopping_index(&c, &huge, 0.5, 0.0, 1.0, &one, MAX_STOPPING_INDEX).unwrap(),
            1
        );
        assert!(matches!(
            stopping_index(&c, &ConeElement::scalar(0.0), 0.5, 0.0, 1.0, &one, 10),
            Err(EngineError::NonPositiveTolerance(_))
        ));
        assert_eq!(
            stopping_index(&c, &tol, 0.99, 0.0, 1.0, &one, 10),
            Err(EngineError::NoStoppingIndex(10))
        );
    }

    #[test]
    fn constant_map_contracts_trivially() {
        let space = four_point_space();
        let t = FiniteMap::constant(4, 2);
        let r = check_contraction(&space, &t.as_fn(), &params(0.1, 0.2, 0.3, 0.0), 0).unwrap();
        assert!(r.pass);
        assert_eq!(r.pairs_checked, 16);
    }

    #[test]
    fn identity_map_violates_kannan() {
        let space = four_point_space();
        let r = check_contraction(&space, &|p: &usize| *p, &params(0.0, 0.2, 0.2, 0.0), 0).unwrap();
        assert!(!r.pass);
        assert_eq!(r.violations.len(), 12);
        let v = &r.violations[0];
        assert_eq!((v.x, v.y), (0, 1));
        assert_eq!(v.rhs, ConeElement::Vector(vec![0.0, 0.0]));
    }

    #[test]
    fn halving_map_is_tight() {
        let line = ScalarDemoSpace::new(0.0, 10.0).unwrap();
        let t = |x: &f64| x / 2.0 + 1.0;
        let p = params(0.5, 0.0, 0.0, 0.0);
        let r = check_contraction(&line, &t, &p, 7).unwrap();
        assert!(r.pass);
        assert_eq!(r.pairs_checked, 10_100);
        for (x, y) in [(0.0, 10.0), (3.0, 4.0), (9.5, 1.25)] {
            let (lhs, rhs) = contraction_sides(&line, &t, &p, &x, &y).unwrap();
            let (l, r) = (lhs.as_scalar().unwrap(), rhs.as_scalar().unwrap());
            assert!((l - r).abs() <= 1e-15 * r.max(1.0));
        }
    }

    #[test]
    fn map_leaving_space() {
        let line = ScalarDemoSpace::new(0.0, 10.0).unwrap();
        let r = check_contraction(&line, &|x: &f64| x + 5.0, &params(0.5, 0.0, 0.0, 0.0), 0);
        assert!(matches!(r, Err(EngineError::MapLeavesSpace { .. })));
        let space = four_point_space();
        let t = FiniteMap::new(vec![0, 1, 2]);
        assert!(matches!(
            check_contraction(&space, &t.as_fn(), &params(0.1, 0.0, 0.0, 0.0), 0),
            Err(EngineError::MapLeavesSpace { .. })
        ));
    }

    #[test]
    fn scalar_picard_converges_to_two() {
        let line = ScalarDemoSpace::new(0.0, 10.0).unwrap();
        let cert = picard_run(
            &line,
            &|x: &f64| x / 2.0 + 1.0,
            &params(0.5, 0.0, 0.0, 0.0),
            &10.0,
            &PicardOptions::default(),
        )
        .unwrap();
        assert_eq!(&cert.trace[..5], &[10.0, 6.0, 4.0, 3.0, 2.5]);
        assert!((cert.fixed_point - 2.0).abs() < 1e-9);
        assert_eq!(cert.d0, ConeElement::scalar(4.0));
        // B(n) = 88 * 2^-n here, first below 1e-9 at n = 37
        assert_eq!(cert.stop_index, Some(37));
        assert_eq!(cert.iterations_used, 37);
        assert_eq!(cert.oracle_agreed, None);
    }

    #[test]
    fn finite_picard_constant_map() {
        let space = four_point_space();
        let t = FiniteMap::constant(4, 2);
        let cert = picard_run(
            &space,
            &t.as_fn(),
            &params(0.0, 0.0, 0.0, 0.0),
            &0,
            &PicardOptions::default(),
        )
        .unwrap();
        assert_eq!(cert.fixed_point, 2);
        assert_eq!(cert.trace, vec![0, 2]);
        assert_eq!(cert.iterations_used, 1);
        assert_eq!(cert.oracle, Some(vec![2]));
        assert_eq!(cert.oracle_agreed, Some(true));
        assert!(cert
            .to_report(|p| space.label(p))
            .contains("fixed_point: 3\n"));
    }

    #[test]
    fn picard_names_the_failed_hypothesis() {
        let space = four_point_space();
        let t = FiniteMap::new(vec![1, 0, 3, 2]);
        let opts = PicardOptions::default();
        assert_eq!(
            picard_run(&space, &t.as_fn(), &params(0.3, 0.0, 0.0, 0.0), &0, &opts),
            Err(EngineError::InvalidParams(
                ParamViolation::MuTooLargeForWeight
            ))
        );
        assert!(matches!(
            picard_run(&space, &t.as_fn(), &params(0.2, 0.0, 0.0, 0.0), &0, &opts),
            Err(EngineError::ContractionFails { .. })
        ));
        let bad = space.with_weight(1.0).unwrap();
        assert!(matches!(
            picard_run(&bad, &t.as_fn(), &params(0.2, 0.0, 0.0, 0.0), &0, &opts),
            Err(EngineError::SpaceAxioms(_))
        ));
    }

    #[test]
    fn oracle_examples() {
        let space = four_point_space();
        assert_eq!(
            brute_force_fixed_points(&space, &FiniteMap::constant(4, 2).as_fn()),
            vec![2]
        );
        assert_eq!(
            brute_force_fixed_points(&space, &|p: &usize| *p),
            vec![0, 1, 2, 3]
        );
        assert!(
            brute_force_fixed_points(&space, &FiniteMap::new(vec![1, 0, 3, 2]).as_fn()).is_empty()
        );
    }

    #[test]
    fn presets() {
        let k = ReichParams::preset(Preset::Kannan { alpha: 0.4, t: 1.0 }, 1.0).unwrap();
        assert_eq!((k.mu, k.alpha, k.beta, k.gamma), (0.0, 0.4, 0.4, 0.0));
        assert_eq!(k.phi, AlteringFn::Power(1.0));
        assert!(ReichParams::preset(Preset::Banach { mu: 0.9, t: 0.5 }, 1.0).is_ok());
        assert_eq!(
            ReichParams::preset(Preset::Kannan { alpha: 0.5, t: 1.0 }, 1.0),
            Err(EngineError::InvalidParams(ParamViolation::SumTooLarge))
        );
        assert_eq!(
            ReichParams::preset(Preset::Banach { mu: 0.9, t: 0.5 }, 2.0),
            Err(EngineError::InvalidParams(
                ParamViolation::MuTooLargeForWeight
            ))
        );
        let r = ReichParams::preset(
            Preset::Reich {
                alpha: 0.2,
                beta: 0.3,
                mu: 0.4,
                t: 0.5,
            },
            2.0,
        )
        .unwrap();
        assert_eq!((r.mu, r.alpha, r.beta, r.gamma), (0.4, 0.2, 0.3, 0.0));
    }
}
