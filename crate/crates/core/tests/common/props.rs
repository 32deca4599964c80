//! Property suites shared by the proptest target and the acceptance gate.
//! Every suite runs an exhaustive sweep over a small field and then randomized
//! cases from a fixed seed; each returns the number of instances checked.

use std::sync::Arc;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use trihex::field::{Fe, Field};
use trihex::forms::{bilinear, polar};
use trihex::hexagon::{Geometry, Hexagon};
use trihex::projspace::{Subspace, Vec8, N, ZERO_VEC};
use trihex::subspaces::{classify_points, sandwich_instance};

pub const RANDOM_CASES: u32 = 100_000;
const SEED: [u8; 32] = *b"trihex property suites, seed 001";

pub type Outcome = Result<u64, String>;

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::from_seed(RngAlgorithm::ChaCha, &SEED),
    )
}

fn run<S: Strategy>(
    cases: u32,
    s: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    runner(cases).run(&s, test).map_err(|e| e.to_string())
}

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if ok {
        Ok(())
    } else {
        Err(TestCaseError::fail(what()))
    }
}

// ---------------------------------------------------------------------------
// fields

fn check_axioms(f: &Field, a: Fe, b: Fe, c: Fe) -> Result<(), String> {
    let fail = |law: &str| {
        Err(format!(
            "{law} fails at ({a}, {b}, {c}) in GF({})",
            f.order()
        ))
    };
    if f.add(f.add(a, b), c) != f.add(a, f.add(b, c)) {
        return fail("additive associativity");
    }
    if f.mul(f.mul(a, b), c) != f.mul(a, f.mul(b, c)) {
        return fail("multiplicative associativity");
    }
    if f.add(a, b) != f.add(b, a) || f.mul(a, b) != f.mul(b, a) {
        return fail("commutativity");
    }
    if f.mul(a, f.add(b, c)) != f.add(f.mul(a, b), f.mul(a, c)) {
        return fail("distributivity");
    }
    if f.add(a, f.neg(a)) != Fe::ZERO || f.sub(a, b) != f.add(a, f.neg(b)) {
        return fail("additive inverse");
    }
    if !a.is_zero() {
        let inv = f.inv(a).map_err(|e| e.to_string())?;
        if f.mul(a, inv) != Fe::ONE || f.pow(a, f.order() as u64 - 1) != Fe::ONE {
            return fail("multiplicative inverse");
        }
    } else if f.inv(a).is_ok() {
        return fail("inverse of zero");
    }
    if f.sigma(f.add(a, b)) != f.add(f.sigma(a), f.sigma(b))
        || f.sigma(f.mul(a, b)) != f.mul(f.sigma(a), f.sigma(b))
    {
        return fail("sigma homomorphism");
    }
    if f.sigma(f.sigma(f.sigma(a))) != a {
        return fail("sigma of order dividing 3");
    }
    Ok(())
}

pub fn field_axioms() -> Outcome {
    let mut n = 0u64;
    let small = Field::twisted(2).map_err(|e| e.to_string())?;
    for a in small.elements() {
        for b in small.elements() {
            for c in small.elements() {
                check_axioms(&small, a, b, c)?;
                n += 1;
            }
        }
    }
    for f in [Field::twisted(3), Field::twisted(4), Field::split_cayley(5)] {
        let f = f.map_err(|e| e.to_string())?;
        let q = f.order() as u64;
        let el = move || (0..q).prop_map(|i| Fe(i as u16));
        run(RANDOM_CASES, (el(), el(), el()), |(a, b, c)| {
            check_axioms(&f, a, b, c).map_err(TestCaseError::fail)
        })?;
        n += RANDOM_CASES as u64;
    }
    Ok(n)
}

// ---------------------------------------------------------------------------
// subspaces

fn gf8() -> Field {
    Field::twisted(2).expect("GF(8)")
}

fn vectors(order: u16, max: usize) -> impl Strategy<Value = Vec<Vec8>> {
    prop::collection::vec(
        prop::array::uniform8(0..order).prop_map(|a| a.map(Fe)),
        1..=max,
    )
}

fn nonzero(v: &Vec8) -> bool {
    v.iter().any(|c| !c.is_zero())
}

fn span(f: &Field, vs: &[Vec8]) -> Option<Subspace> {
    let vs: Vec<Vec8> = vs.iter().copied().filter(nonzero).collect();
    if vs.is_empty() {
        None
    } else {
        Some(Subspace::from_vectors(f, &vs).expect("nonzero vectors span"))
    }
}

fn is_canonical(s: &Subspace) -> bool {
    let piv = s.pivots();
    piv.windows(2).all(|w| w[0] < w[1])
        && s.rows()
            .iter()
            .zip(&piv)
            .all(|(r, &p)| r[p] == Fe::ONE && r[..p].iter().all(|c| c.is_zero()))
        && piv.iter().enumerate().all(|(i, &p)| {
            s.rows()
                .iter()
                .enumerate()
                .all(|(j, r)| j == i || r[p].is_zero())
        })
}

/// Random invertible row operations applied to `vs`.
fn mix(f: &Field, vs: &[Vec8], scalars: &[u16], perm_seed: usize) -> Vec<Vec8> {
    let k = vs.len();
    let mut out: Vec<Vec8> = (0..k)
        .map(|i| vs[(i * (2 * perm_seed + 1) + perm_seed) % k])
        .collect();
    // a permutation only when the stride is coprime to k
    if gcd(2 * perm_seed + 1, k) != 1 {
        out = vs.to_vec();
        out.reverse();
    }
    let q = f.order() as u16;
    for i in 0..k {
        let s = Fe(1 + scalars[i % scalars.len()] % (q - 1));
        out[i] = out[i].map(|c| f.mul(c, s));
    }
    for i in 1..k {
        let s = Fe(scalars[(i * 7) % scalars.len()] % q);
        let prev = out[i - 1];
        for j in 0..N {
            out[i][j] = f.add(out[i][j], f.mul(s, prev[j]));
        }
    }
    out
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn rref_canonical() -> Outcome {
    let mut n = 0u64;
    // every pair of vectors of GF(2)^8
    let f2 = Field::split_cayley(2).map_err(|e| e.to_string())?;
    let all: Vec<Vec8> = (1u32..256)
        .map(|m| {
            let mut v = ZERO_VEC;
            for (j, c) in v.iter_mut().enumerate() {
                *c = Fe(((m >> j) & 1) as u16);
            }
            v
        })
        .collect();
    for a in &all {
        for b in &all {
            let s = Subspace::from_vectors(&f2, &[*a, *b]).map_err(|e| e.to_string())?;
            let t =
                Subspace::from_vectors(&f2, &[*b, *a, f2_add(a, b)]).map_err(|e| e.to_string())?;
            if s != t || !is_canonical(&s) || Subspace::from_vectors(&f2, s.rows()).ok() != Some(s)
            {
                return Err(format!("canonical form differs for {a:?}, {b:?}"));
            }
            n += 1;
        }
    }
    let f = gf8();
    run(
        RANDOM_CASES,
        (vectors(8, 8), prop::collection::vec(0u16..8, 8), 0usize..8),
        |(vs, scalars, perm)| {
            let Some(s) = span(&f, &vs) else {
                return Ok(());
            };
            ensure(is_canonical(&s), || {
                format!("not canonical: {:?}", s.rows())
            })?;
            let again = Subspace::from_vectors(&f, s.rows()).expect("rows are independent");
            ensure(again == s, || "rref is not idempotent".into())?;
            let mixed = span(&f, &mix(&f, &vs, &scalars, perm));
            ensure(mixed == Some(s), || {
                "row operations changed the canonical form".into()
            })
        },
    )?;
    Ok(n + RANDOM_CASES as u64)
}

fn f2_add(a: &Vec8, b: &Vec8) -> Vec8 {
    let mut v = ZERO_VEC;
    for j in 0..N {
        v[j] = Fe(a[j].0 ^ b[j].0);
    }
    v
}

fn modular_holds(f: &Field, u: &Subspace, w: &Subspace) -> bool {
    let join = u.join(f, w);
    let meet = u.intersect(f, w).map_or(0, |m| m.rank());
    join.rank() + meet == u.rank() + w.rank()
        && join.contains_subspace(f, u)
        && join.contains_subspace(f, w)
        && u.intersect(f, w)
            .is_none_or(|m| u.contains_subspace(f, &m) && w.contains_subspace(f, &m))
}

pub fn modular_law() -> Outcome {
    let mut n = 0u64;
    let f2 = Field::split_cayley(2).map_err(|e| e.to_string())?;
    // every line of PG(7,2) against a spread of points
    let pts: Vec<Subspace> = (1u32..256)
        .map(|m| {
            let mut v = ZERO_VEC;
            for (j, c) in v.iter_mut().enumerate() {
                *c = Fe(((m >> j) & 1) as u16);
            }
            Subspace::from_vectors(&f2, &[v]).expect("nonzero")
        })
        .collect();
    for a in &pts {
        for b in &pts {
            let line = a.join(&f2, b);
            for c in pts.iter().step_by(51) {
                if !modular_holds(&f2, &line, c) {
                    return Err(format!(
                        "modular law fails for {:?} and {:?}",
                        line.rows(),
                        c.rows()
                    ));
                }
                n += 1;
            }
        }
    }
    let f = gf8();
    run(RANDOM_CASES, (vectors(8, 6), vectors(8, 6)), |(a, b)| {
        let (Some(u), Some(w)) = (span(&f, &a), span(&f, &b)) else {
            return Ok(());
        };
        ensure(modular_holds(&f, &u, &w), || {
            format!("modular law fails for {a:?}, {b:?}")
        })
    })?;
    Ok(n + RANDOM_CASES as u64)
}

fn polar_holds(f: &Field, u: &Subspace) -> bool {
    let Some(p) = polar(f, u) else {
        return u.rank() == N;
    };
    p.rank() == N - u.rank()
        && polar(f, &p) == Some(*u)
        && u.rows()
            .iter()
            .all(|x| p.rows().iter().all(|y| bilinear(f, x, y).is_zero()))
}

pub fn polar_involution() -> Outcome {
    let mut n = 0u64;
    let f2 = Field::split_cayley(2).map_err(|e| e.to_string())?;
    for m in 1u32..256 {
        let mut v = ZERO_VEC;
        for (j, c) in v.iter_mut().enumerate() {
            *c = Fe(((m >> j) & 1) as u16);
        }
        let p = Subspace::from_vectors(&f2, &[v]).expect("nonzero");
        if !polar_holds(&f2, &p) || !polar_holds(&f2, &polar(&f2, &p).expect("hyperplane")) {
            return Err(format!("polarity fails at {v:?}"));
        }
        n += 2;
    }
    let f = gf8();
    run(RANDOM_CASES, vectors(8, 8), |vs| {
        let Some(u) = span(&f, &vs) else {
            return Ok(());
        };
        ensure(polar_holds(&f, &u), || {
            format!("polarity fails for {:?}", u.rows())
        })
    })?;
    Ok(n + RANDOM_CASES as u64)
}

// ---------------------------------------------------------------------------
// sandwich instances on T(8,2)

/// `U` the polar hyperplane of a point `x`, `W` the plane of the lines through `x`,
/// and `V` a random subspace between them.
pub fn sandwich(h: &Hexagon) -> Outcome {
    let g: &Geometry = h.geometry();
    let f: Arc<Field> = g.field().clone();
    let f = &*f;
    let chain = |x: u32| -> (Subspace, Subspace) {
        let u = polar(f, &g.point(x).to_subspace()).expect("hyperplane");
        let lines: Vec<Subspace> = g.lines_through(x).iter().map(|&l| *g.line(l)).collect();
        (u, Subspace::span(f, &lines).expect("lines span"))
    };
    // hypotheses, once per point
    let mut n = 0u64;
    for x in 0..g.num_points() as u32 {
        let (u, w) = chain(x);
        match sandwich_instance(g, &u, &w, &w) {
            Some(true) => n += 1,
            other => return Err(format!("chain at point {x} gives {other:?}")),
        }
    }
    let points = g.num_points() as u32;
    run(
        RANDOM_CASES,
        (
            0..points,
            prop::collection::vec(prop::array::uniform8(0u16..8), 1..=4),
        ),
        |(x, extra)| {
            let (u, w) = chain(x);
            // project the random vectors into U
            let mut gens: Vec<Vec8> = w.rows().to_vec();
            for e in extra {
                let v: Vec8 = e.map(Fe);
                let mut inside = ZERO_VEC;
                for (r, k) in u.rows().iter().zip(v.iter()) {
                    for j in 0..N {
                        inside[j] = f.add(inside[j], f.mul(*k, r[j]));
                    }
                }
                gens.push(inside);
            }
            let v = Subspace::from_vectors(f, &gens).expect("contains W");
            ensure(classify_points(g, &v).isolated.is_empty(), || {
                format!("isolated point in V between the chain at point {x}")
            })
        },
    )?;
    Ok(n + RANDOM_CASES as u64)
}
