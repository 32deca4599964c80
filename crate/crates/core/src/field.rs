//! Exact arithmetic in GF(p^k), with the distinguished subfield GF(q) and the
//! automorphism `sigma: x -> x^q` that fixes it.
//!
//! Elements are stored as a single integer index whose little-endian base-p
//! digits are the coefficients of the polynomial basis `1, t, t^2, ...` modulo
//! the defining irreducible polynomial. Multiplication goes through log/antilog
//! tables built once per field; fields of order at most 256 additionally keep a
//! full product table since the enumeration workload is multiplication bound.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported field order.
pub const MAX_ORDER: u32 = 1 << 16;

const FULL_TABLE_LIMIT: usize = 256;
const ADD_TABLE_LIMIT: usize = 1024;

/// A field element, encoded by its polynomial-basis digit index.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Fe(pub u16);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Which hexagon the field is meant for: the twisted triality hexagon over
/// GF(q^3) (sigma of order 3) or the split Cayley hexagon over GF(q) (sigma = 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "twisted")]
    Twisted,
    #[serde(rename = "splitcayley")]
    SplitCayley,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Twisted => "twisted",
            Mode::SplitCayley => "splitcayley",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "twisted" => Ok(Mode::Twisted),
            "splitcayley" => Ok(Mode::SplitCayley),
            other => Err(Error::Usage(format!("unknown mode `{other}`"))),
        }
    }
}

/// Description of GF(p^k) together with the order of the subfield fixed by sigma.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    pub k: u32,
    /// Coefficients `c0, c1, ..., ck` of the monic defining polynomial.
    pub irreducible: Vec<u32>,
    /// Order of the fixed subfield: q in twisted mode, the full order in split Cayley mode.
    pub q_sub: u32,
}

impl FieldSpec {
    pub fn new(p: u32, k: u32, irreducible: Vec<u32>, q_sub: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::UnsupportedField(format!("{p} is not prime")));
        }
        if k == 0 {
            return Err(Error::UnsupportedField("extension degree 0".into()));
        }
        let order = checked_order(p, k)?;
        if irreducible.len() != k as usize + 1 {
            return Err(Error::UnsupportedField(format!(
                "polynomial must have {} coefficients, got {}",
                k + 1,
                irreducible.len()
            )));
        }
        if irreducible.iter().any(|&c| c >= p) {
            return Err(Error::UnsupportedField(
                "polynomial coefficient not reduced mod p".into(),
            ));
        }
        if irreducible[k as usize] != 1 {
            return Err(Error::UnsupportedField("polynomial is not monic".into()));
        }
        if !is_irreducible(p, &irreducible) {
            return Err(Error::UnsupportedField(format!(
                "polynomial {irreducible:?} is reducible over GF({p})"
            )));
        }
        let twisted = (q_sub as u64).pow(3) == order as u64;
        if !twisted && q_sub != order {
            return Err(Error::UnsupportedField(format!(
                "subfield order {q_sub} is neither the cube root of {order} nor {order}"
            )));
        }
        Ok(FieldSpec {
            p,
            k,
            irreducible,
            q_sub,
        })
    }

    /// GF(q^3) with sigma = x -> x^q.
    pub fn twisted(q: u32) -> Result<Self> {
        let (p, e) = prime_power(q)
            .ok_or_else(|| Error::UnsupportedField(format!("{q} is not a prime power")))?;
        let poly = default_polynomial(p, 3 * e)?;
        FieldSpec::new(p, 3 * e, poly, q)
    }

    /// GF(q) with sigma the identity.
    pub fn split_cayley(q: u32) -> Result<Self> {
        let (p, e) = prime_power(q)
            .ok_or_else(|| Error::UnsupportedField(format!("{q} is not a prime power")))?;
        let poly = default_polynomial(p, e)?;
        FieldSpec::new(p, e, poly, q)
    }

    pub fn for_mode(mode: Mode, q: u32) -> Result<Self> {
        match mode {
            Mode::Twisted => Self::twisted(q),
            Mode::SplitCayley => Self::split_cayley(q),
        }
    }

    pub fn order(&self) -> u32 {
        self.p.pow(self.k)
    }

    pub fn mode(&self) -> Mode {
        if self.q_sub == self.order() {
            Mode::SplitCayley
        } else {
            Mode::Twisted
        }
    }

    /// The hexagon parameter q (order of the sigma-fixed subfield).
    pub fn q(&self) -> u32 {
        self.q_sub
    }

    /// `field p=<p> k=<k> poly=<c0,...,ck>`
    pub fn header(&self) -> String {
        let poly: Vec<String> = self.irreducible.iter().map(|c| c.to_string()).collect();
        format!("field p={} k={} poly={}", self.p, self.k, poly.join(","))
    }

    /// Parses a field header. Without an explicit mode, degrees divisible by 3
    /// are read as twisted and everything else as split Cayley.
    pub fn parse_header(line: &str, mode: Option<Mode>) -> Result<Self> {
        let mut words = line.split_whitespace();
        if words.next() != Some("field") {
            return Err(Error::parse(1, "expected `field p=.. k=.. poly=..`"));
        }
        let (mut p, mut k, mut poly) = (None, None, None);
        for word in words {
            let (key, value) = word
                .split_once('=')
                .ok_or_else(|| Error::parse(1, format!("malformed field attribute `{word}`")))?;
            let num = |v: &str| {
                v.parse::<u32>()
                    .map_err(|_| Error::parse(1, format!("not an integer: `{v}`")))
            };
            match key {
                "p" => p = Some(num(value)?),
                "k" => k = Some(num(value)?),
                "poly" => poly = Some(value.split(',').map(num).collect::<Result<Vec<u32>>>()?),
                other => {
                    return Err(Error::parse(
                        1,
                        format!("unknown field attribute `{other}`"),
                    ))
                }
            }
        }
        let p = p.ok_or_else(|| Error::parse(1, "missing p"))?;
        let k = k.ok_or_else(|| Error::parse(1, "missing k"))?;
        let poly = poly.ok_or_else(|| Error::parse(1, "missing poly"))?;
        let order = checked_order(p, k).map_err(|e| Error::parse(1, e.to_string()))?;
        let mode = mode.unwrap_or(if k % 3 == 0 {
            Mode::Twisted
        } else {
            Mode::SplitCayley
        });
        let q_sub = match mode {
            Mode::SplitCayley => order,
            Mode::Twisted => {
                if k % 3 != 0 {
                    return Err(Error::parse(1, "twisted mode needs k divisible by 3"));
                }
                p.pow(k / 3)
            }
        };
        FieldSpec::new(p, k, poly, q_sub).map_err(|e| Error::parse(1, e.to_string()))
    }
}

/// The conventional defining polynomial for GF(p^k); falls back to the
/// lexicographically smallest monic irreducible when no convention is listed.
pub fn default_polynomial(p: u32, k: u32) -> Result<Vec<u32>> {
    checked_order(p, k)?;
    let listed: Option<&[u32]> = match (p, k) {
        (_, 1) => Some(&[0, 1]),
        (2, 2) => Some(&[1, 1, 1]),
        (3, 2) => Some(&[2, 2, 1]),
        (2, 3) => Some(&[1, 1, 0, 1]),
        (3, 3) => Some(&[1, 2, 0, 1]),
        (5, 3) => Some(&[3, 3, 0, 1]),
        (2, 6) => Some(&[1, 1, 0, 1, 1, 0, 1]),
        _ => None,
    };
    if let Some(poly) = listed {
        return Ok(poly.to_vec());
    }
    let count = p.pow(k);
    for low in 0..count {
        let mut poly: Vec<u32> = digits_of(low, p, k as usize);
        poly.push(1);
        if is_irreducible(p, &poly) {
            return Ok(poly);
        }
    }
    Err(Error::UnsupportedField(format!(
        "no irreducible polynomial of degree {k} over GF({p})"
    )))
}

fn checked_order(p: u32, k: u32) -> Result<u32> {
    let order = (p as u64).checked_pow(k).unwrap_or(u64::MAX);
    if order > MAX_ORDER as u64 {
        return Err(Error::UnsupportedField(format!(
            "GF({p}^{k}) exceeds the supported order {MAX_ORDER}"
        )));
    }
    Ok(order as u32)
}

fn is_prime(n: u32) -> bool {
    n >= 2
        && (2..)
            .take_while(|d| d * d <= n)
            .all(|d| !n.is_multiple_of(d))
}

fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut rest = q;
    let mut e = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        e += 1;
    }
    (rest == 1).then_some((p, e))
}

fn digits_of(mut n: u32, p: u32, len: usize) -> Vec<u32> {
    let mut d = Vec::with_capacity(len);
    for _ in 0..len {
        d.push(n % p);
        n /= p;
    }
    d
}

/// Remainder of `a` modulo the monic polynomial `m`, coefficients mod p.
fn poly_rem(p: u32, a: &[u32], m: &[u32]) -> Vec<u32> {
    let mut r: Vec<u32> = a.to_vec();
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = r[r.len() - 1];
        let shift = r.len() - 1 - dm;
        if lead != 0 {
            for (i, &c) in m.iter().enumerate() {
                let t = (lead * c) % p;
                r[shift + i] = (r[shift + i] + p - t) % p;
            }
        }
        r.pop();
    }
    r
}

fn is_irreducible(p: u32, poly: &[u32]) -> bool {
    let deg = poly.len() - 1;
    if deg <= 1 {
        return deg == 1;
    }
    // trial division by all monic polynomials of degree 1..=deg/2
    for d in 1..=deg / 2 {
        for low in 0..p.pow(d as u32) {
            let mut divisor = digits_of(low, p, d);
            divisor.push(1);
            if poly_rem(p, poly, &divisor).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// Arithmetic tables for one field. Immutable after construction.
#[derive(Clone)]
pub struct Field {
    spec: FieldSpec,
    order: usize,
    char2: bool,
    add: Option<Vec<u16>>,
    neg: Vec<u16>,
    log: Vec<u32>,
    exp: Vec<u16>,
    mul: Option<Vec<u16>>,
    inv: Vec<u16>,
    sigma: Vec<u16>,
    generator: Fe,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("spec", &self.spec)
            .field("generator", &self.generator)
            .finish()
    }
}

impl Field {
    pub fn new(spec: FieldSpec) -> Field {
        let order = spec.order() as usize;
        let p = spec.p;
        let k = spec.k as usize;
        let char2 = p == 2;

        let digit_add = |a: usize, b: usize| -> u16 {
            let (mut a, mut b) = (a as u32, b as u32);
            let (mut out, mut place) = (0u32, 1u32);
            for _ in 0..k {
                out += ((a % p + b % p) % p) * place;
                a /= p;
                b /= p;
                place *= p;
            }
            out as u16
        };
        let neg: Vec<u16> = (0..order)
            .map(|a| {
                let mut a = a as u32;
                let (mut out, mut place) = (0u32, 1u32);
                for _ in 0..k {
                    out += ((p - a % p) % p) * place;
                    a /= p;
                    place *= p;
                }
                out as u16
            })
            .collect();
        let add = (!char2 && order <= ADD_TABLE_LIMIT).then(|| {
            let mut t = vec![0u16; order * order];
            for a in 0..order {
                for b in 0..order {
                    t[a * order + b] = digit_add(a, b);
                }
            }
            t
        });

        let slow_mul = |a: u16, b: u16| -> u16 {
            let da = digits_of(a as u32, p, k);
            let db = digits_of(b as u32, p, k);
            let mut prod = vec![0u32; 2 * k - 1];
            for (i, &x) in da.iter().enumerate() {
                for (j, &y) in db.iter().enumerate() {
                    prod[i + j] = (prod[i + j] + x * y) % p;
                }
            }
            let r = poly_rem(p, &prod, &spec.irreducible);
            r.iter().rev().fold(0u32, |acc, &c| acc * p + c) as u16
        };

        // smallest primitive element
        let group = order - 1;
        let mut generator = Fe::ONE;
        let mut exp = vec![1u16];
        if group > 1 {
            for cand in 2..order as u16 {
                let mut powers = Vec::with_capacity(group);
                let mut x = 1u16;
                loop {
                    powers.push(x);
                    x = slow_mul(x, cand);
                    if x == 1 {
                        break;
                    }
                }
                if powers.len() == group {
                    generator = Fe(cand);
                    exp = powers;
                    break;
                }
            }
        }
        let mut log = vec![0u32; order];
        for (i, &v) in exp.iter().enumerate() {
            log[v as usize] = i as u32;
        }
        let doubled: Vec<u16> = exp.iter().chain(exp.iter()).copied().collect();
        let inv: Vec<u16> = (0..order)
            .map(|a| {
                if a == 0 {
                    0
                } else {
                    exp[(group - log[a] as usize) % group]
                }
            })
            .collect();

        let mut field = Field {
            spec,
            order,
            char2,
            add,
            neg,
            log,
            exp: doubled,
            mul: None,
            inv,
            sigma: Vec::new(),
            generator,
        };
        if order <= FULL_TABLE_LIMIT {
            let mut t = vec![0u16; order * order];
            for a in 0..order {
                for b in 0..order {
                    t[a * order + b] = field.mul_log(Fe(a as u16), Fe(b as u16)).0;
                }
            }
            field.mul = Some(t);
        }
        let q_sub = field.spec.q_sub as u64;
        field.sigma = (0..order)
            .map(|a| match field.spec.mode() {
                Mode::SplitCayley => a as u16,
                Mode::Twisted => field.pow(Fe(a as u16), q_sub).0,
            })
            .collect();
        field
    }

    pub fn twisted(q: u32) -> Result<Field> {
        Ok(Field::new(FieldSpec::twisted(q)?))
    }

    pub fn split_cayley(q: u32) -> Result<Field> {
        Ok(Field::new(FieldSpec::split_cayley(q)?))
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn characteristic(&self) -> u32 {
        self.spec.p
    }

    pub fn mode(&self) -> Mode {
        self.spec.mode()
    }

    /// Hexagon parameter q.
    pub fn q(&self) -> u32 {
        self.spec.q_sub
    }

    pub fn generator(&self) -> Fe {
        self.generator
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> + Clone {
        (0..self.order as u16).map(Fe)
    }

    pub fn nonzero(&self) -> impl Iterator<Item = Fe> + Clone {
        (1..self.order as u16).map(Fe)
    }

    /// Base-p digits of the element (polynomial coefficients, constant term first).
    pub fn digits(&self, a: Fe) -> Vec<u32> {
        digits_of(a.0 as u32, self.spec.p, self.spec.k as usize)
    }

    pub fn from_digits(&self, digits: &[u32]) -> Result<Fe> {
        if digits.len() != self.spec.k as usize || digits.iter().any(|&d| d >= self.spec.p) {
            return Err(Error::domain(format!("invalid digit vector {digits:?}")));
        }
        Ok(Fe(digits
            .iter()
            .rev()
            .fold(0u32, |acc, &d| acc * self.spec.p + d)
            as u16))
    }

    /// Checked conversion from an encoded index.
    pub fn element(&self, index: u64) -> Result<Fe> {
        if index < self.order as u64 {
            Ok(Fe(index as u16))
        } else {
            Err(Error::domain(format!(
                "element index {index} out of range for a field of order {}",
                self.order
            )))
        }
    }

    /// Image of an integer in the prime field.
    pub fn from_int(&self, n: i64) -> Fe {
        let p = self.spec.p as i64;
        Fe(n.rem_euclid(p) as u16)
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        if self.char2 {
            return Fe(a.0 ^ b.0);
        }
        match &self.add {
            Some(t) => Fe(t[a.index() * self.order + b.index()]),
            None => self.add_digits(a, b),
        }
    }

    fn add_digits(&self, a: Fe, b: Fe) -> Fe {
        let p = self.spec.p;
        let (mut x, mut y) = (a.0 as u32, b.0 as u32);
        let (mut out, mut place) = (0u32, 1u32);
        while x > 0 || y > 0 {
            out += ((x % p + y % p) % p) * place;
            x /= p;
            y /= p;
            place *= p;
        }
        Fe(out as u16)
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        Fe(self.neg[a.index()])
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        match &self.mul {
            Some(t) => Fe(t[a.index() * self.order + b.index()]),
            None => self.mul_log(a, b),
        }
    }

    #[inline]
    fn mul_log(&self, a: Fe, b: Fe) -> Fe {
        if a.is_zero() || b.is_zero() {
            return Fe::ZERO;
        }
        Fe(self.exp[(self.log[a.index()] + self.log[b.index()]) as usize])
    }

    /// Row `s` of the multiplication table, when the table exists.
    #[inline]
    pub(crate) fn mul_row(&self, s: Fe) -> Option<&[u16]> {
        self.mul
            .as_ref()
            .map(|t| &t[s.index() * self.order..(s.index() + 1) * self.order])
    }

    #[inline]
    pub(crate) fn is_char2(&self) -> bool {
        self.char2
    }

    /// `a + b*c`
    #[inline]
    pub fn mul_add(&self, a: Fe, b: Fe, c: Fe) -> Fe {
        self.add(a, self.mul(b, c))
    }

    pub fn inv(&self, a: Fe) -> Result<Fe> {
        if a.is_zero() {
            return Err(Error::domain("inverse of zero"));
        }
        Ok(Fe(self.inv[a.index()]))
    }

    /// Inverse of a value already known to be nonzero.
    #[inline]
    pub(crate) fn inv_nonzero(&self, a: Fe) -> Fe {
        debug_assert!(!a.is_zero());
        Fe(self.inv[a.index()])
    }

    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Fe, e: u64) -> Fe {
        if e == 0 {
            return Fe::ONE;
        }
        if a.is_zero() {
            return Fe::ZERO;
        }
        let group = (self.order - 1) as u64;
        let l = (self.log[a.index()] as u64 * (e % group)) % group;
        Fe(self.exp[l as usize])
    }

    /// The automorphism x -> x^q (identity in split Cayley mode).
    #[inline]
    pub fn sigma(&self, a: Fe) -> Fe {
        Fe(self.sigma[a.index()])
    }

    /// sigma applied `times` times.
    pub fn sigma_pow(&self, a: Fe, times: u32) -> Fe {
        (0..times).fold(a, |x, _| self.sigma(x))
    }

    pub fn in_fixed_subfield(&self, a: Fe) -> bool {
        self.sigma(a) == a
    }
}
