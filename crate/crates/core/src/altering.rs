//! Weak distance altering functions and a sampling validator for their axioms.
//!
//! A map phi: P -> P qualifies when it is
//!
//! 1. subadditive: phi(x + y) <= phi(x) + phi(y);
//! 2. monotone in both directions: x <= y if and only if phi(x) <= phi(y);
//! 3. superhomogeneous on [0, 1]: phi(eta x) >= eta phi(x);
//! 4. small along small sequences: a_n eventually << c for every c >> 0
//!    implies phi(a_n) eventually << d for every d >> 0.
//!
//! Consequences checked alongside: phi(0) = 0, injectivity, and
//! phi(n a) <= n phi(a) for small integers n.

use crate::cone::{ConeElement, ConeError, ConeSpec, ORDER_TOL};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Ratios of the geometric test sequences used for axiom (iv).
pub const SMALLNESS_RATIOS: [f64; 3] = [0.9, 0.5, 0.1];
/// Number of terms in each geometric test sequence.
pub const SMALLNESS_HORIZON: usize = 200;
/// Scales of the targets d = scale * (random interior direction).
const SMALLNESS_TARGETS: [f64; 3] = [1.0, 0.1, 0.01];
/// Multiples n checked for phi(n a) <= n phi(a).
const MAX_MULTIPLE: u32 = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlteringError {
    #[error("argument {0} is not in the cone")]
    NotInCone(String),
    #[error("power altering function requires the scalar cone [0, inf), got {0}")]
    PowerNeedsScalarCone(ConeSpec),
    #[error(transparent)]
    Cone(#[from] ConeError),
}

/// Something that maps P into E, to be validated as an altering function.
pub trait Altering {
    fn apply(&self, cone: &ConeSpec, a: &ConeElement) -> Result<ConeElement, AlteringError>;

    fn describe(&self) -> String;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AlteringFn {
    Identity,
    Scale(f64),
    /// a -> a^t on [0, inf), with 0 -> 0 for every t.
    Power(f64),
}

impl Altering for AlteringFn {
    fn apply(&self, cone: &ConeSpec, a: &ConeElement) -> Result<ConeElement, AlteringError> {
        if !cone.contains(a)? {
            return Err(AlteringError::NotInCone(a.to_string()));
        }
        match *self {
            AlteringFn::Identity => Ok(a.clone()),
            AlteringFn::Scale(f) => Ok(a.scale(f)),
            AlteringFn::Power(t) => {
                let x = a
                    .as_scalar()
                    .filter(|_| cone.is_scalar())
                    .ok_or(AlteringError::PowerNeedsScalarCone(*cone))?;
                Ok(ConeElement::scalar(if x == 0.0 { 0.0 } else { x.powf(t) }))
            }
        }
    }

    fn describe(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for AlteringFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlteringFn::Identity => write!(f, "identity"),
            AlteringFn::Scale(a) => write!(f, "scale {a}"),
            AlteringFn::Power(t) => write!(f, "power {t}"),
        }
    }
}

/// Named property checked by [`verify_altering`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum AlteringAxiom {
    /// phi maps P into P.
    IntoCone,
    /// (i)
    Subadditive,
    /// (ii), x <= y implies phi(x) <= phi(y).
    MonotoneForward,
    /// (ii), phi(x) <= phi(y) implies x <= y.
    MonotoneReverse,
    /// (iii)
    EtaInequality,
    /// (iv)
    SequentialSmallness,
    /// phi(0) = 0.
    ZeroPreserving,
    Injective,
    /// phi(n a) <= n phi(a).
    MultipleSubadditive,
}

impl AlteringAxiom {
    pub fn label(self) -> &'static str {
        match self {
            AlteringAxiom::IntoCone => "into-cone",
            AlteringAxiom::Subadditive => "(i) subadditive",
            AlteringAxiom::MonotoneForward => "(ii) monotone x<=y => phi(x)<=phi(y)",
            AlteringAxiom::MonotoneReverse => "(ii) monotone phi(x)<=phi(y) => x<=y",
            AlteringAxiom::EtaInequality => "(iii) phi(eta x) >= eta phi(x)",
            AlteringAxiom::SequentialSmallness => "(iv) sequential smallness",
            AlteringAxiom::ZeroPreserving => "zero: phi(0) = 0",
            AlteringAxiom::Injective => "injective",
            AlteringAxiom::MultipleSubadditive => "phi(n a) <= n phi(a)",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomVerdict {
    pub axiom: AlteringAxiom,
    pub pass: bool,
    pub checked: usize,
    pub witness: Option<String>,
}

impl AxiomVerdict {
    fn new(axiom: AlteringAxiom) -> Self {
        AxiomVerdict {
            axiom,
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
pub struct AlteringReport {
    pub phi: String,
    pub cone: ConeSpec,
    pub verdicts: Vec<AxiomVerdict>,
}

impl AlteringReport {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn verdict(&self, axiom: AlteringAxiom) -> &AxiomVerdict {
        self.verdicts
            .iter()
            .find(|v| v.axiom == axiom)
            .expect("every axiom has a verdict")
    }

    pub fn failed(&self) -> Vec<AlteringAxiom> {
        self.verdicts
            .iter()
            .filter(|v| !v.pass)
            .map(|v| v.axiom)
            .collect()
    }
}

/// Checks the altering-function axioms for `phi` on seeded samples from P.
///
/// Failures are reported in the returned verdicts; an `Err` only comes back
/// when `phi` cannot be evaluated on the cone at all.
pub fn verify_altering<A: Altering + ?Sized>(
    phi: &A,
    cone: &ConeSpec,
    samples: usize,
    seed: u64,
) -> Result<AlteringReport, AlteringError> {
    use AlteringAxiom::*;
    cone.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = |a: &ConeElement| phi.apply(cone, a);
    let le = |x: &ConeElement, y: &ConeElement| cone.approx_leq(x, y, ORDER_TOL);

    let mut into = AxiomVerdict::new(IntoCone);
    let mut sub = AxiomVerdict::new(Subadditive);
    let mut fwd = AxiomVerdict::new(MonotoneForward);
    let mut rev = AxiomVerdict::new(MonotoneReverse);
    let mut eta = AxiomVerdict::new(EtaInequality);
    let mut seq = AxiomVerdict::new(SequentialSmallness);
    let mut zero = AxiomVerdict::new(ZeroPreserving);
    let mut inj = AxiomVerdict::new(Injective);
    let mut mult = AxiomVerdict::new(MultipleSubadditive);

    let z = cone.zero();
    let fz = f(&z)?;
    zero.record(cone.is_zero(&fz, ORDER_TOL)?, || {
        format!("a = {z}, phi(a) = {fz}")
    });

    for _ in 0..samples {
        let x = cone.sample_element(&mut rng);
        let y = cone.sample_element(&mut rng);
        let (fx, fy) = (f(&x)?, f(&y)?);

        into.record(cone.contains(&fx)?, || format!("a = {x}, phi(a) = {fx}"));

        let s = x.try_add(&y)?;
        let fs = f(&s)?;
        let rhs = fx.try_add(&fy)?;
        sub.record(le(&fs, &rhs)?, || {
            format!("x = {x}, y = {y}: phi(x+y) = {fs} > phi(x)+phi(y) = {rhs}")
        });

        // forward direction on a pair that is comparable by construction
        let gap = cone.sample_element(&mut rng);
        let above = x.try_add(&gap)?;
        let fa = f(&above)?;
        fwd.record(le(&fx, &fa)?, || {
            format!("x = {x}, y = {above}: phi(x) = {fx}, phi(y) = {fa}")
        });

        // reverse direction on an arbitrary pair
        if le(&fx, &fy)? {
            rev.record(le(&x, &y)?, || {
                format!("x = {x}, y = {y}: phi(x) = {fx} <= phi(y) = {fy} but x is not <= y")
            });
        } else {
            rev.checked += 1;
        }

        if !cone.is_zero(&x.try_sub(&y)?, 0.0)? {
            inj.record(!cone.is_zero(&fx.try_sub(&fy)?, 0.0)?, || {
                format!("x = {x}, y = {y} both map to {fx}")
            });
        }

        let h: f64 = rng.gen_range(0.0..=1.0);
        let fhx = f(&x.scale(h))?;
        let hfx = fx.scale(h);
        eta.record(le(&hfx, &fhx)?, || {
            format!("eta = {h}, x = {x}: phi(eta x) = {fhx} < eta phi(x) = {hfx}")
        });

        for n in 2..=MAX_MULTIPLE {
            let fnx = f(&x.scale(n as f64))?;
            let nfx = fx.scale(n as f64);
            mult.record(le(&fnx, &nfx)?, || {
                format!("n = {n}, a = {x}: phi(n a) = {fnx} > n phi(a) = {nfx}")
            });
        }
    }

    // (iv): a_n = r^n e with e >> 0 tends to 0 in every << sense
    let directions = samples.clamp(1, 16);
    for _ in 0..directions {
        let e = normalized(cone, cone.sample_interior(&mut rng))?;
        let d_dir = normalized(cone, cone.sample_interior(&mut rng))?;
        for &r in &SMALLNESS_RATIOS {
            let images = (0..=SMALLNESS_HORIZON)
                .map(|n| f(&e.scale(r.powi(n as i32))))
                .collect::<Result<Vec<_>, _>>()?;
            for &scale in &SMALLNESS_TARGETS {
                let d = d_dir.scale(scale);
                // smallest M with phi(a_n) << d for every n >= M in the horizon
                let mut tail_ok = None;
                for (n, img) in images.iter().enumerate().rev() {
                    if cone.strictly_below(img, &d)? {
                        tail_ok = Some(n);
                    } else {
                        break;
                    }
                }
                seq.record(tail_ok.is_some(), || {
                    format!(
                        "a_n = {r}^n * {e}, d = {d}: phi(a_{SMALLNESS_HORIZON}) = {} is not << d",
                        images[SMALLNESS_HORIZON]
                    )
                });
            }
        }
    }

    Ok(AlteringReport {
        phi: phi.describe(),
        cone: *cone,
        verdicts: vec![into, sub, fwd, rev, eta, seq, zero, inj, mult],
    })
}

/// Rescales an interior element so its largest coordinate is 1.
fn normalized(cone: &ConeSpec, x: ConeElement) -> Result<ConeElement, ConeError> {
    let top = cone.coords(&x)?.into_iter().fold(0.0f64, f64::max);
    Ok(x.scale(1.0 / top))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// a -> a + e; not an altering function.
    struct Shifted;

    impl Altering for Shifted {
        fn apply(&self, cone: &ConeSpec, a: &ConeElement) -> Result<ConeElement, AlteringError> {
            Ok(a.try_add(&cone.unit())?)
        }

        fn describe(&self) -> String {
            "a + 1".into()
        }
    }

    #[test]
    fn apply_examples() {
        let scalar = ConeSpec::orthant(1);
        let plane = ConeSpec::orthant(2);
        let a = ConeElement::Vector(vec![1.0, 3.0]);
        assert_eq!(
            AlteringFn::Power(0.5)
                .apply(&scalar, &ConeElement::scalar(4.0))
                .unwrap(),
            ConeElement::scalar(2.0)
        );
        assert_eq!(AlteringFn::Identity.apply(&plane, &a).unwrap(), a);
        assert_eq!(
            AlteringFn::Scale(2.0).apply(&plane, &a).unwrap(),
            ConeElement::Vector(vec![2.0, 6.0])
        );
    }

    #[test]
    fn apply_errors() {
        let plane = ConeSpec::orthant(2);
        assert!(matches!(
            AlteringFn::Identity.apply(&plane, &ConeElement::Vector(vec![-1.0, 0.0])),
            Err(AlteringError::NotInCone(_))
        ));
        assert_eq!(
            AlteringFn::Power(0.5).apply(&plane, &ConeElement::Vector(vec![1.0, 1.0])),
            Err(AlteringError::PowerNeedsScalarCone(plane))
        );
    }

    #[test]
    fn power_zero_is_zero_at_origin() {
        let c = ConeSpec::orthant(1);
        let z = AlteringFn::Power(0.0).apply(&c, &c.zero()).unwrap();
        assert_eq!(z, ConeElement::scalar(0.0));
        let one = AlteringFn::Power(0.0)
            .apply(&c, &ConeElement::scalar(1e-30))
            .unwrap();
        assert_eq!(one, ConeElement::scalar(1.0));
    }

    #[test]
    fn sqrt_passes() {
        let r = verify_altering(&AlteringFn::Power(0.5), &ConeSpec::orthant(1), 1000, 1).unwrap();
        assert!(r.all_pass(), "{r:?}");
    }

    #[test]
    fn identity_and_scale_pass_on_both_families() {
        for cone in [
            ConeSpec::orthant(1),
            ConeSpec::orthant(3),
            ConeSpec::poly_default(),
        ] {
            for phi in [
                AlteringFn::Identity,
                AlteringFn::Scale(0.3),
                AlteringFn::Scale(7.0),
            ] {
                let samples = if matches!(cone, ConeSpec::PolyC1 { .. }) {
                    100
                } else {
                    500
                };
                let r = verify_altering(&phi, &cone, samples, 9).unwrap();
                assert!(r.all_pass(), "{phi} on {cone}: {:?}", r.failed());
            }
        }
    }

    #[test]
    fn shifted_fails_zero_check() {
        let r = verify_altering(&Shifted, &ConeSpec::orthant(1), 100, 0).unwrap();
        let v = r.verdict(AlteringAxiom::ZeroPreserving);
        assert!(!v.pass);
        assert_eq!(v.witness.as_deref(), Some("a = 0, phi(a) = 1"));
    }

    #[test]
    fn scale_zero_fails_reverse_monotonicity() {
        let r = verify_altering(&AlteringFn::Scale(0.0), &ConeSpec::orthant(2), 200, 4).unwrap();
        assert!(!r.verdict(AlteringAxiom::MonotoneReverse).pass);
        assert!(r.verdict(AlteringAxiom::MonotoneForward).pass);
        assert!(!r.verdict(AlteringAxiom::Injective).pass);
    }

    #[test]
    fn power_zero_fails_smallness() {
        let r = verify_altering(&AlteringFn::Power(0.0), &ConeSpec::orthant(1), 200, 4).unwrap();
        let v = r.verdict(AlteringAxiom::SequentialSmallness);
        assert!(!v.pass);
        assert!(v.witness.as_ref().unwrap().contains("phi(a_200) = 1"));
        assert!(r.verdict(AlteringAxiom::ZeroPreserving).pass);
    }

    #[test]
    fn power_on_plane_is_an_error() {
        assert!(matches!(
            verify_altering(&AlteringFn::Power(0.5), &ConeSpec::orthant(2), 10, 0),
            Err(AlteringError::PowerNeedsScalarCone(_))
        ));
    }

    #[test]
    fn scale_composition() {
        let c = ConeSpec::orthant(3);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let (a, b) = (rng.gen_range(0.0..5.0), rng.gen_range(0.0..5.0));
            let x = c.sample_element(&mut rng);
            let twice = AlteringFn::Scale(a)
                .apply(&c, &AlteringFn::Scale(b).apply(&c, &x).unwrap())
                .unwrap();
            let once = AlteringFn::Scale(a * b).apply(&c, &x).unwrap();
            for (p, q) in twice.values().iter().zip(once.values()) {
                assert!((p - q).abs() <= 1e-12 * p.abs().max(1.0));
            }
        }
    }
}
