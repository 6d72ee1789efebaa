//! Seeded generator of finite spaces with maps that satisfy the contractive
//! condition, shared by the integration test targets.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reich::altering::AlteringFn;
use reich::cone::{ConeElement, ConeSpec};
use reich::engine::{check_contraction, effective_weight, validate_params, FiniteMap, ReichParams};
use reich::space::{min_weight, normalize_weight, verify_axioms, FiniteGcrSpace};

pub struct Instance {
    pub space: FiniteGcrSpace,
    pub map: FiniteMap,
    pub params: ReichParams,
    /// The root of the tree map, which is its only fixed point.
    pub root: usize,
    pub family: &'static str,
}

/// Random rooted tree: parent[0] = 0, parent[i] < i otherwise.
fn random_tree(rng: &mut ChaCha8Rng, n: usize) -> (Vec<usize>, Vec<u32>) {
    let mut parent = vec![0usize; n];
    let mut depth = vec![0u32; n];
    for i in 1..n {
        parent[i] = rng.gen_range(0..i);
        depth[i] = depth[parent[i]] + 1;
    }
    (parent, depth)
}

/// d(x, y) = c^max(depth) * (1 + noise) per coordinate, so the tree map
/// shrinks every distance by roughly 1/c. One pair may be inflated to push
/// the minimal weight above 1.
fn random_table(
    rng: &mut ChaCha8Rng,
    depth: &[u32],
    dim: usize,
) -> Vec<((usize, usize), ConeElement)> {
    let n = depth.len();
    let bases: Vec<f64> = (0..dim).map(|_| rng.gen_range(3.0..6.0)).collect();
    let inflate = rng.gen_bool(0.4).then(|| {
        let i = rng.gen_range(0..n);
        let j = (i + rng.gen_range(1..n)) % n;
        ((i.min(j), i.max(j)), rng.gen_range(1.5..3.0))
    });
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let h = depth[i].max(depth[j]) as i32;
            let factor = match inflate {
                Some((p, f)) if p == (i, j) => f,
                _ => 1.0,
            };
            let v: Vec<f64> = bases
                .iter()
                .map(|c| c.powi(h) * (1.0 + rng.gen_range(0.0..0.3)) * factor)
                .collect();
            pairs.push(((i, j), ConeElement::Vector(v)));
        }
    }
    pairs
}

fn random_params(rng: &mut ChaCha8Rng, scalar: bool) -> (ReichParams, &'static str) {
    let phi = match rng.gen_range(0..4) {
        0 => AlteringFn::Identity,
        1 => AlteringFn::Scale(rng.gen_range(0.5..3.0)),
        _ if scalar => AlteringFn::Power(rng.gen_range(0.5..1.0)),
        _ => AlteringFn::Identity,
    };
    let u = |rng: &mut ChaCha8Rng, hi: f64| rng.gen_range(0.0..hi);
    match rng.gen_range(0..4) {
        0 => (ReichParams::new(u(rng, 0.6), 0.0, 0.0, 0.0, phi), "banach"),
        1 => {
            let a = u(rng, 0.5);
            (ReichParams::new(0.0, a, a, 0.0, phi), "kannan")
        }
        2 => (
            ReichParams::new(u(rng, 0.4), u(rng, 0.3), u(rng, 0.3), 0.0, phi),
            "reich",
        ),
        _ => (
            ReichParams::new(u(rng, 0.4), u(rng, 0.3), u(rng, 0.3), u(rng, 0.4), phi),
            "general",
        ),
    }
}

/// Draws one instance whose parameters pass validation and whose map passes
/// the contractive condition; retries space and parameters as needed.
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let n = rng.gen_range(3..=8);
        let dim = rng.gen_range(1..=2);
        let cone = ConeSpec::orthant(dim);
        let (parent, depth) = random_tree(&mut rng, n);
        let pairs = random_table(&mut rng, &depth, dim);
        let labels: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
        let draft = FiniteGcrSpace::from_pairs(labels, cone, &pairs, 1.0).unwrap();
        let s = min_weight(&draft)
            .unwrap()
            .expect("positive table has a weight");
        let space = draft
            .with_weight(normalize_weight(s).unwrap() as f64)
            .unwrap();
        assert!(verify_axioms(&space).unwrap().all_pass());
        let map = FiniteMap::new(parent);
        let weight = effective_weight(&space).unwrap();
        for _ in 0..200 {
            let (params, family) = random_params(&mut rng, dim == 1);
            if validate_params(&params, weight).is_err() {
                continue;
            }
            if check_contraction(&space, &map.as_fn(), &params, 0)
                .unwrap()
                .pass
            {
                return Instance {
                    space,
                    map,
                    params,
                    root: 0,
                    family,
                };
            }
        }
    }
}
