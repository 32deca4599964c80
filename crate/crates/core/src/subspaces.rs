//! Subspaces spanned by lines of a line set, the status of their points, the
//! classification of supported 2- to 6-spaces of T(q^3, q), and verifiers for the
//! intersection properties (Pt), (Pl), (Sd), (4d), (4d'), (5d), (6d) and (To).
//!
//! Supported subspaces are found by closure. Every supported subspace `U` has a
//! chain `L = W_1 < W_2 < ... < U` in which each step adds one line of `U`, so
//! the dimension grows by one (the line meets `W_i`) or two (it is skew). The
//! engine starts from single lines and processes one dimension at a time, with
//! deduplication on a compact encoding of the reduced row-echelon form.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::forms::{line_quadric_class, polar_point, QuadricClass};
use crate::hexagon::{hexagon_counts, DistanceOracle, Elem, Geometry, Hexagon};
use crate::projspace::{axpy, is_zero, rref, Subspace, Vec8, N, ZERO_VEC};

/// Largest dimension the closure engine visits.
pub const MAX_CLOSURE_DIM: usize = 6;

const MAX_WITNESSES: usize = 16;
const CHUNK: usize = 512;

// ---------------------------------------------------------------------------
// compact keys

/// Injective `u128` encoding of subspaces: the pivot mask in the low byte, then the
/// entries of each row right of its pivot outside pivot columns, `bits` wide.
#[derive(Clone, Copy, Debug)]
pub struct KeyCodec {
    bits: u32,
}

impl KeyCodec {
    pub fn new(f: &Field) -> Result<KeyCodec> {
        let bits = usize::BITS - (f.order() - 1).leading_zeros();
        // at most 16 free entries, reached at rank 4
        if 8 + 16 * bits > 128 {
            return Err(Error::UnsupportedField(format!(
                "compact subspace keys need |K| <= 128, got {}",
                f.order()
            )));
        }
        Ok(KeyCodec { bits })
    }

    pub fn encode(&self, s: &Subspace) -> u128 {
        let piv = s.pivots();
        let mask: u8 = piv.iter().fold(0, |m, &p| m | (1 << p));
        let mut key = mask as u128;
        let mut pos = 8;
        for (row, &p) in s.rows().iter().zip(&piv) {
            for (j, x) in row.iter().enumerate().skip(p + 1) {
                if mask & (1 << j) == 0 {
                    key |= (x.0 as u128) << pos;
                    pos += self.bits;
                }
            }
        }
        key
    }

    pub fn decode(&self, key: u128) -> Subspace {
        let mask = key as u8;
        let piv: Vec<usize> = (0..N).filter(|j| mask & (1 << j) != 0).collect();
        let entry_mask = (1u128 << self.bits) - 1;
        let mut rows = vec![ZERO_VEC; piv.len()];
        let mut pos = 8;
        for (row, &p) in rows.iter_mut().zip(&piv) {
            row[p] = Fe::ONE;
            for (j, x) in row.iter_mut().enumerate().skip(p + 1) {
                if mask & (1 << j) == 0 {
                    *x = Fe(((key >> pos) & entry_mask) as u16);
                    pos += self.bits;
                }
            }
        }
        Subspace::from_rref(&rows)
    }
}

// ---------------------------------------------------------------------------
// packed vectors: coordinate i in byte i

#[inline]
fn pack(v: &Vec8) -> u64 {
    v.iter()
        .enumerate()
        .fold(0, |acc, (i, x)| acc | ((x.0 as u64) << (8 * i)))
}

#[inline]
fn unpack(p: u64) -> Vec8 {
    let mut v = ZERO_VEC;
    for (i, x) in v.iter_mut().enumerate() {
        *x = lane(p, i);
    }
    v
}

#[inline]
fn lane(p: u64, i: usize) -> Fe {
    Fe(((p >> (8 * i)) & 0xff) as u16)
}

/// High bit of each nonzero byte.
#[inline]
fn nonzero_lanes(x: u64) -> u64 {
    const LOW7: u64 = 0x7f7f_7f7f_7f7f_7f7f;
    (((x & LOW7) + LOW7) | x) & !LOW7
}

/// Vector operations on packed vectors; needs `|K| <= 256`.
#[derive(Clone, Copy)]
struct Packed<'a> {
    f: &'a Field,
    char2: bool,
}

impl<'a> Packed<'a> {
    fn new(f: &'a Field) -> Packed<'a> {
        debug_assert!(f.order() <= 256);
        Packed {
            f,
            char2: f.is_char2(),
        }
    }

    #[inline(always)]
    fn add(&self, a: u64, b: u64) -> u64 {
        if self.char2 {
            a ^ b
        } else {
            self.add_lanes(a, b)
        }
    }

    fn add_lanes(&self, a: u64, b: u64) -> u64 {
        let mut out = 0;
        for i in 0..N {
            out |= (self.f.add(lane(a, i), lane(b, i)).0 as u64) << (8 * i);
        }
        out
    }

    #[inline]
    fn scale(&self, s: Fe, v: u64) -> u64 {
        let row = self
            .f
            .mul_row(s)
            .expect("multiplication table for |K| <= 256");
        let mut out = 0;
        for i in 0..N {
            out |= (row[lane(v, i).index()] as u64) << (8 * i);
        }
        out
    }

    /// Scaled so that the first nonzero coordinate is one; `v` nonzero.
    #[inline]
    fn normalize(&self, v: u64) -> u64 {
        let lead = lane(v, (v.trailing_zeros() / 8) as usize);
        if lead == Fe::ONE {
            v
        } else {
            self.scale(self.f.inv_nonzero(lead), v)
        }
    }

    /// Reduced echelon form of two independent vectors.
    fn rref2(&self, a: u64, b: u64) -> [u64; 2] {
        let (mut a, mut b) = (self.normalize(a), b);
        let ca = (a.trailing_zeros() / 8) as usize;
        let c = lane(b, ca);
        if !c.is_zero() {
            b = self.add(b, self.scale(self.f.neg(c), a));
        }
        if (b.trailing_zeros() / 8) as usize <= ca {
            std::mem::swap(&mut a, &mut b);
            a = self.normalize(a);
            let c = lane(b, (a.trailing_zeros() / 8) as usize);
            if !c.is_zero() {
                b = self.add(b, self.scale(self.f.neg(c), a));
            }
        }
        b = self.normalize(b);
        let cb = (b.trailing_zeros() / 8) as usize;
        let c = lane(a, cb);
        if !c.is_zero() {
            a = self.add(a, self.scale(self.f.neg(c), b));
        }
        [a, b]
    }
}

// ---------------------------------------------------------------------------
// images of lines modulo a subspace

/// Reduction modulo `W`: the representative of `v + W` vanishing on the pivot columns.
struct Reducer<'a> {
    ar: Packed<'a>,
    piv: Vec<usize>,
    /// `tables[i][s] = -s * row_i`
    tables: Vec<Vec<u64>>,
}

impl<'a> Reducer<'a> {
    fn new(f: &'a Field, w: &Subspace) -> Reducer<'a> {
        let ar = Packed::new(f);
        let tables = w
            .rows()
            .iter()
            .map(|row| {
                let p = pack(row);
                f.elements().map(|s| ar.scale(f.neg(s), p)).collect()
            })
            .collect();
        Reducer {
            ar,
            piv: w.pivots(),
            tables,
        }
    }

    #[inline]
    fn reduce_packed(&self, v: u64) -> u64 {
        let mut r = v;
        // rows vanish on the other pivots, so the lanes of v are the coefficients
        for (t, &p) in self.tables.iter().zip(&self.piv) {
            let s = lane(v, p);
            if !s.is_zero() {
                r = self.ar.add(r, t[s.index()]);
            }
        }
        r
    }

    fn reduce(&self, v: &Vec8) -> Vec8 {
        unpack(self.reduce_packed(pack(v)))
    }
}

enum LineImage {
    Inside,
    /// the line meets `W` in `point`; `image` is the normalized reduced point
    Meets {
        point: Vec8,
        image: u64,
    },
    /// the reduced line in echelon form, when requested
    Skew(Option<[u64; 2]>),
}

fn line_image(red: &Reducer<'_>, packed: &[u64; 2], line: &Subspace, want_pair: bool) -> LineImage {
    let ar = red.ar;
    let f = ar.f;
    let a = red.reduce_packed(packed[0]);
    let b = red.reduce_packed(packed[1]);
    match (a == 0, b == 0) {
        (true, true) => LineImage::Inside,
        (true, false) => LineImage::Meets {
            point: line.rows()[0],
            image: ar.normalize(b),
        },
        (false, true) => LineImage::Meets {
            point: line.rows()[1],
            image: ar.normalize(a),
        },
        (false, false) => {
            let j = (b.trailing_zeros() / 8) as usize;
            let proportional = nonzero_lanes(a) == nonzero_lanes(b) && {
                let lam = f.mul(lane(a, j), f.inv_nonzero(lane(b, j)));
                ar.add(a, ar.scale(f.neg(lam), b)) == 0
            };
            if proportional {
                let lam = f.mul(lane(a, j), f.inv_nonzero(lane(b, j)));
                let rows = line.rows();
                LineImage::Meets {
                    point: axpy(f, &rows[0], f.neg(lam), &rows[1]),
                    image: ar.normalize(b),
                }
            } else if want_pair {
                LineImage::Skew(Some(ar.rref2(a, b)))
            } else {
                LineImage::Skew(None)
            }
        }
    }
}

fn packed_lines(geom: &Geometry) -> Vec<[u64; 2]> {
    geom.lines()
        .iter()
        .map(|l| [pack(&l.rows()[0]), pack(&l.rows()[1])])
        .collect()
}

// ---------------------------------------------------------------------------
// point census

/// Status of a point of `U` lying on at least one line of the set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointStatus {
    /// no line through the point lies in `U`
    Isolated,
    /// every line through the point lies in `U`
    Ideal,
    /// exactly one of several lines through the point lies in `U`
    SingleLine,
    /// more than one but not all
    Partial,
}

/// Points of `U` on lines of the set, by status. All lists ascending.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PointCensus {
    pub lines: Vec<u32>,
    pub ideal: Vec<u32>,
    pub isolated: Vec<u32>,
    pub single_line: Vec<u32>,
    pub partial: Vec<u32>,
}

impl PointCensus {
    pub fn status(&self, point: u32) -> Option<PointStatus> {
        let has = |v: &Vec<u32>| v.binary_search(&point).is_ok();
        if has(&self.ideal) {
            Some(PointStatus::Ideal)
        } else if has(&self.isolated) {
            Some(PointStatus::Isolated)
        } else if has(&self.single_line) {
            Some(PointStatus::SingleLine)
        } else if has(&self.partial) {
            Some(PointStatus::Partial)
        } else {
            None
        }
    }
}

fn census_from(geom: &Geometry, inside: &[u32], meet_points: &[u32]) -> PointCensus {
    let mut count: FxHashMap<u32, u32> = FxHashMap::default();
    for &l in inside {
        for &p in geom.points_on(l) {
            *count.entry(p).or_insert(0) += 1;
        }
    }
    let mut c = PointCensus {
        lines: inside.to_vec(),
        ..PointCensus::default()
    };
    for &p in meet_points {
        if !count.contains_key(&p) {
            c.isolated.push(p);
        }
    }
    for (&p, &n) in &count {
        let deg = geom.lines_through(p).len() as u32;
        if n == deg {
            c.ideal.push(p);
        } else if n == 1 {
            c.single_line.push(p);
        } else {
            c.partial.push(p);
        }
    }
    for v in [
        &mut c.ideal,
        &mut c.isolated,
        &mut c.single_line,
        &mut c.partial,
    ] {
        v.sort_unstable();
        v.dedup();
    }
    c
}

/// Lines of the set inside `u` and the status of every point of `u` on a line of the set.
pub fn classify_points(geom: &Geometry, u: &Subspace) -> PointCensus {
    let f = &**geom.field();
    let red = Reducer::new(f, u);
    let mut inside = Vec::new();
    let mut meets = Vec::new();
    for (l, packed) in packed_lines(geom).iter().enumerate() {
        let l = l as u32;
        match line_image(&red, packed, geom.line(l), false) {
            LineImage::Inside => inside.push(l),
            LineImage::Meets { point, .. } => meets.push(
                geom.point_id(&point)
                    .expect("points of set lines are indexed"),
            ),
            LineImage::Skew(_) => {}
        }
    }
    census_from(geom, &inside, &meets)
}

// ---------------------------------------------------------------------------
// records and taxonomy

/// A subspace spanned by the lines of the set it contains.
#[derive(Clone, Debug, Serialize)]
pub struct SupportedSubspaceRecord {
    pub dim: usize,
    pub subspace: Subspace,
    pub line_ids: Vec<u32>,
    pub ideal_points: Vec<u32>,
    pub isolated_points: Vec<u32>,
    pub single_line_points: Vec<u32>,
    /// points with several but not all of their lines inside; empty under (Pt) and (Pl)
    pub partial_points: Vec<u32>,
    pub classification: Option<Classification>,
}

impl SupportedSubspaceRecord {
    pub fn line_count(&self) -> usize {
        self.line_ids.len()
    }

    pub fn class_tag(&self) -> Option<ClassTag> {
        self.classification.as_ref().map(|c| c.tag)
    }

    fn from_census(dim: usize, subspace: Subspace, c: PointCensus) -> SupportedSubspaceRecord {
        SupportedSubspaceRecord {
            dim,
            subspace,
            line_ids: c.lines,
            ideal_points: c.ideal,
            isolated_points: c.isolated,
            single_line_points: c.single_line,
            partial_points: c.partial,
            classification: None,
        }
    }
}

/// The cases of the classification of supported subspaces of T(q^3, q).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ClassTag {
    /// q+1 lines through a point
    #[serde(rename = "pencil-plane")]
    PencilPlane,
    /// 2q+1 lines: two pencils on a common line
    #[serde(rename = "bipencil-solid")]
    BipencilSolid,
    /// q+1 pairwise opposite lines forming a regulus
    #[serde(rename = "regulus-solid")]
    RegulusSolid,
    /// q^2+q+1 lines: full pencils at q+1 points of one line
    #[serde(rename = "cone-4")]
    Cone4,
    /// (q+1)^2 lines: q+2 ideal points, q+1 of them on a non-hexagon line
    #[serde(rename = "twopoint-4")]
    TwoPoint4,
    /// q^3+1 pairwise opposite lines
    #[serde(rename = "spread-5")]
    Spread5,
    /// q^3+q^2+q+1 lines at distance at most 3 from a point
    #[serde(rename = "pointperp-5")]
    PointPerp5,
    /// (q+1)(q^2+q+1) lines of a subhexagon of order (1, q)
    #[serde(rename = "thinhex-5")]
    ThinHex5,
    /// q^4+q+1 lines at distance at most 2 from a line
    #[serde(rename = "lineperp-5")]
    LinePerp5,
    /// q^5+q^4+q+1 lines: all lines at distance at most 3 from a point
    #[serde(rename = "pointperp-6")]
    PointPerp6,
    /// (q+1)(q^4+q^2+1) lines of a split Cayley subhexagon
    #[serde(rename = "splitcayley-6")]
    SplitCayley6,
    #[serde(rename = "unclassified")]
    Unclassified,
}

impl ClassTag {
    pub const CASES: [ClassTag; 11] = [
        ClassTag::PencilPlane,
        ClassTag::BipencilSolid,
        ClassTag::RegulusSolid,
        ClassTag::Cone4,
        ClassTag::TwoPoint4,
        ClassTag::Spread5,
        ClassTag::PointPerp5,
        ClassTag::ThinHex5,
        ClassTag::LinePerp5,
        ClassTag::PointPerp6,
        ClassTag::SplitCayley6,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassTag::PencilPlane => "pencil-plane",
            ClassTag::BipencilSolid => "bipencil-solid",
            ClassTag::RegulusSolid => "regulus-solid",
            ClassTag::Cone4 => "cone-4",
            ClassTag::TwoPoint4 => "twopoint-4",
            ClassTag::Spread5 => "spread-5",
            ClassTag::PointPerp5 => "pointperp-5",
            ClassTag::ThinHex5 => "thinhex-5",
            ClassTag::LinePerp5 => "lineperp-5",
            ClassTag::PointPerp6 => "pointperp-6",
            ClassTag::SplitCayley6 => "splitcayley-6",
            ClassTag::Unclassified => "unclassified",
        }
    }

    pub fn dim(self) -> Option<usize> {
        Some(match self {
            ClassTag::PencilPlane => 2,
            ClassTag::BipencilSolid | ClassTag::RegulusSolid => 3,
            ClassTag::Cone4 | ClassTag::TwoPoint4 => 4,
            ClassTag::Spread5 | ClassTag::PointPerp5 | ClassTag::ThinHex5 | ClassTag::LinePerp5 => {
                5
            }
            ClassTag::PointPerp6 | ClassTag::SplitCayley6 => 6,
            ClassTag::Unclassified => return None,
        })
    }

    /// Number of lines in a subspace of this class.
    pub fn line_count(self, q: u64) -> Option<u64> {
        let q2 = q * q;
        let q3 = q2 * q;
        Some(match self {
            ClassTag::PencilPlane | ClassTag::RegulusSolid => q + 1,
            ClassTag::BipencilSolid => 2 * q + 1,
            ClassTag::Cone4 => q2 + q + 1,
            ClassTag::TwoPoint4 => (q + 1) * (q + 1),
            ClassTag::Spread5 => q3 + 1,
            ClassTag::PointPerp5 => q3 + q2 + q + 1,
            ClassTag::ThinHex5 => (q + 1) * (q2 + q + 1),
            ClassTag::LinePerp5 => q3 * q + q + 1,
            ClassTag::PointPerp6 => q3 * q2 + q3 * q + q + 1,
            ClassTag::SplitCayley6 => (q + 1) * (q2 * q2 + q2 + 1),
            ClassTag::Unclassified => return None,
        })
    }

    /// The case with this dimension and line count, if any.
    pub fn expected(dim: usize, lines: u64, q: u64) -> Option<ClassTag> {
        ClassTag::CASES
            .into_iter()
            .find(|t| t.dim() == Some(dim) && t.line_count(q) == Some(lines))
    }
}

impl fmt::Display for ClassTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The structure found inside a record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// pencil planes, pointperp-5 and pointperp-6
    Center {
        point: u32,
    },
    Bipencil {
        line: u32,
        centers: [u32; 2],
    },
    /// the lines equal R(L, M)
    Regulus {
        generators: [u32; 2],
    },
    /// cone-4 and lineperp-5
    Axis {
        line: u32,
    },
    TwoPoint {
        apex: u32,
        far_points: Vec<u32>,
        far_line: Subspace,
    },
    Opposite {
        pairs: usize,
    },
    Subhexagon {
        order: (u64, u64),
        girth: u32,
        diameter: u32,
    },
    Mismatch {
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub tag: ClassTag,
    pub witness: Witness,
}

impl Classification {
    fn unclassified(reason: impl Into<String>) -> Classification {
        Classification {
            tag: ClassTag::Unclassified,
            witness: Witness::Mismatch {
                reason: reason.into(),
            },
        }
    }
}

/// Matches the record against the case with its dimension and line count and
/// confirms the structure that case prescribes.
pub fn classify_record(r: &SupportedSubspaceRecord, oracle: &DistanceOracle<'_>) -> Classification {
    let geom = oracle.geometry();
    let q = geom.field().q() as u64;
    let n = r.line_ids.len() as u64;
    let Some(tag) = ClassTag::expected(r.dim, n, q) else {
        return Classification::unclassified(format!(
            "no case of dimension {} has {n} lines",
            r.dim
        ));
    };
    let found = match tag {
        ClassTag::PencilPlane => check_pencil(r, geom),
        ClassTag::BipencilSolid => check_bipencil(r, geom, q),
        ClassTag::RegulusSolid => check_regulus(r, oracle),
        ClassTag::Cone4 => check_cone(r, oracle, q),
        ClassTag::TwoPoint4 => check_twopoint(r, geom),
        ClassTag::Spread5 => check_opposite(r, oracle),
        ClassTag::PointPerp5 => check_pointperp5(r, oracle, q),
        ClassTag::ThinHex5 => check_subhexagon(r, geom, (1, q), false),
        ClassTag::LinePerp5 => check_lineperp(r, oracle, q),
        ClassTag::PointPerp6 => check_pointperp6(r, oracle),
        ClassTag::SplitCayley6 => check_subhexagon(r, geom, (q, q), true),
        ClassTag::Unclassified => unreachable!("expected() returns cases only"),
    };
    match found {
        Ok(witness) => Classification { tag, witness },
        Err(reason) => {
            Classification::unclassified(format!("{n} lines as for {tag}, but {reason}"))
        }
    }
}

type Check = std::result::Result<Witness, String>;

fn on_line(geom: &Geometry, line: u32, p: u32) -> bool {
    geom.points_on(line).binary_search(&p).is_ok()
}

fn check_pencil(r: &SupportedSubspaceRecord, geom: &Geometry) -> Check {
    let first = r.line_ids[0];
    let common: Vec<u32> = geom
        .points_on(first)
        .iter()
        .copied()
        .filter(|&p| r.line_ids.iter().all(|&l| on_line(geom, l, p)))
        .collect();
    match common.as_slice() {
        [x] if r.ideal_points == [*x] => Ok(Witness::Center { point: *x }),
        [x] => Err(format!("the center {x} is not the only ideal point")),
        _ => Err("the lines are not concurrent".into()),
    }
}

fn check_bipencil(r: &SupportedSubspaceRecord, geom: &Geometry, q: u64) -> Check {
    let [x, y] = r.ideal_points[..] else {
        return Err(format!(
            "{} ideal points instead of 2",
            r.ideal_points.len()
        ));
    };
    let joint = geom
        .lines_through(x)
        .iter()
        .copied()
        .find(|l| on_line(geom, *l, y))
        .ok_or("the ideal points are not collinear")?;
    let through = |p: u32| r.line_ids.iter().filter(|&&l| on_line(geom, l, p)).count() as u64;
    if through(x) != q + 1 || through(y) != q + 1 {
        return Err("the ideal points do not carry full pencils".into());
    }
    Ok(Witness::Bipencil {
        line: joint,
        centers: [x, y],
    })
}

fn pairwise_opposite(
    lines: &[u32],
    oracle: &DistanceOracle<'_>,
) -> std::result::Result<usize, String> {
    let np = oracle.geometry().num_points();
    let mut pairs = 0;
    for (i, &a) in lines.iter().enumerate() {
        let row = oracle.row_of(Elem::Line(a));
        for &b in &lines[i + 1..] {
            let d = row[np + b as usize];
            if d != 6 {
                return Err(format!("lines {a} and {b} are at distance {d}"));
            }
            pairs += 1;
        }
    }
    Ok(pairs)
}

fn check_regulus(r: &SupportedSubspaceRecord, oracle: &DistanceOracle<'_>) -> Check {
    pairwise_opposite(&r.line_ids, oracle)?;
    if !r.ideal_points.is_empty() {
        return Err("a regulus solid has ideal points".into());
    }
    let (l, m) = (r.line_ids[0], r.line_ids[1]);
    let reg = oracle.regulus(l, m).map_err(|e| e.to_string())?;
    if reg != r.line_ids {
        return Err(format!("the lines differ from R({l}, {m})"));
    }
    Ok(Witness::Regulus { generators: [l, m] })
}

fn check_cone(r: &SupportedSubspaceRecord, oracle: &DistanceOracle<'_>, q: u64) -> Check {
    let geom = oracle.geometry();
    if r.ideal_points.len() as u64 != q + 1 {
        return Err(format!(
            "{} ideal points instead of {}",
            r.ideal_points.len(),
            q + 1
        ));
    }
    let axis = geom
        .lines_through(r.ideal_points[0])
        .iter()
        .copied()
        .find(|&l| {
            r.line_ids.binary_search(&l).is_ok()
                && r.ideal_points.iter().all(|&p| on_line(geom, l, p))
        });
    let axis = axis.ok_or("the ideal points are not on a line of the set")?;
    let np = geom.num_points();
    let row = oracle.row_of(Elem::Line(axis));
    if r.line_ids.iter().any(|&l| row[np + l as usize] > 2) {
        return Err("a line misses the axis".into());
    }
    Ok(Witness::Axis { line: axis })
}

fn check_twopoint(r: &SupportedSubspaceRecord, geom: &Geometry) -> Check {
    let f = &**geom.field();
    let ideal = &r.ideal_points;
    let q = f.q() as usize;
    if ideal.len() != q + 2 {
        return Err(format!("{} ideal points instead of {}", ideal.len(), q + 2));
    }
    for &apex in ideal {
        let far: Vec<u32> = ideal.iter().copied().filter(|&p| p != apex).collect();
        let coords: Vec<Vec8> = far.iter().map(|&p| *geom.point(p).coords()).collect();
        let Ok(far_line) = Subspace::from_vectors(f, &coords) else {
            continue;
        };
        if far_line.rank() != 2 || far_line.contains(f, geom.point(apex)) {
            continue;
        }
        if geom.line_id(&far_line).is_some() {
            continue;
        }
        if line_quadric_class(f, &far_line).ok() != Some(QuadricClass::All) {
            continue;
        }
        let two_each = geom.lines_through(apex).iter().all(|&l| {
            geom.points_on(l)
                .iter()
                .filter(|p| ideal.binary_search(p).is_ok())
                .count()
                == 2
        });
        if two_each {
            return Ok(Witness::TwoPoint {
                apex,
                far_points: far,
                far_line,
            });
        }
    }
    Err("no ideal point sees the others on a quadric line outside the set".into())
}

fn check_opposite(r: &SupportedSubspaceRecord, oracle: &DistanceOracle<'_>) -> Check {
    let pairs = pairwise_opposite(&r.line_ids, oracle)?;
    if !r.ideal_points.is_empty() {
        return Err("a spread space has ideal points".into());
    }
    Ok(Witness::Opposite { pairs })
}

fn check_pointperp5(r: &SupportedSubspaceRecord, oracle: &DistanceOracle<'_>, q: u64) -> Check {
    let geom = oracle.geometry();
    let np = geom.num_points();
    for &x in &r.ideal_points {
        let row = oracle.row_of(Elem::Point(x));
        if r.line_ids.iter().any(|&l| row[np + l as usize] > 3) {
            continue;
        }
        let full = geom.lines_through(x).iter().all(|&l| {
            geom.points_on(l)
                .iter()
                .filter(|p| r.ideal_points.binary_search(p).is_ok())
                .count() as u64
                == q + 1
        });
        if full {
            return Ok(Witness::Center { point: x });
        }
    }
    Err("no ideal point has every line within distance 3".into())
}

fn check_lineperp(r: &SupportedSubspaceRecord, oracle: &DistanceOracle<'_>, q: u64) -> Check {
    let geom = oracle.geometry();
    let np = geom.num_points();
    let axis = r
        .line_ids
        .iter()
        .copied()
        .find(|&l| geom.points_on(l) == r.ideal_points.as_slice())
        .ok_or("the ideal points are not the points of one line")?;
    let row = oracle.row_of(Elem::Line(axis));
    let near = row[np..].iter().filter(|&&d| d <= 2).count() as u64;
    if r.line_ids.iter().any(|&l| row[np + l as usize] > 2) || near != q.pow(4) + q + 1 {
        return Err(format!("the lines are not the lines meeting {axis}"));
    }
    Ok(Witness::Axis { line: axis })
}

fn check_pointperp6(r: &SupportedSubspaceRecord, oracle: &DistanceOracle<'_>) -> Check {
    let geom = oracle.geometry();
    let f = &**geom.field();
    let np = geom.num_points();
    for &x in &r.ideal_points {
        let row = oracle.row_of(Elem::Point(x));
        let near_lines: Vec<u32> = (0..geom.num_lines() as u32)
            .filter(|&l| row[np + l as usize] <= 3)
            .collect();
        if near_lines != r.line_ids {
            continue;
        }
        let near_points: Vec<u32> = (0..np as u32).filter(|&p| row[p as usize] <= 2).collect();
        if near_points != r.ideal_points {
            return Err(format!(
                "ideal points differ from the points collinear with {x}"
            ));
        }
        if polar_point(f, geom.point(x)) != r.subspace {
            return Err(format!("the subspace is not the polar hyperplane of {x}"));
        }
        return Ok(Witness::Center { point: x });
    }
    Err("no point has exactly these lines within distance 3".into())
}

fn check_subhexagon(
    r: &SupportedSubspaceRecord,
    geom: &Geometry,
    order: (u64, u64),
    full_lines: bool,
) -> Check {
    let sub = geom.restrict(&r.ideal_points, &r.line_ids);
    let (np, nl) = hexagon_counts(order.0, order.1);
    if sub.order() != Some(order) || sub.num_points() as u64 != np || sub.num_lines() as u64 != nl {
        return Err(format!(
            "lines and ideal points do not form a geometry of order ({}, {})",
            order.0, order.1
        ));
    }
    if full_lines && sub.num_lines() != r.line_ids.len() {
        return Err("some lines are missing from the subgeometry".into());
    }
    let (g, d) = sub.girth_and_diameter();
    match (g, d) {
        (Some(12), Some(6)) => Ok(Witness::Subhexagon {
            order,
            girth: 12,
            diameter: 6,
        }),
        _ => Err(format!(
            "incidence graph has girth {g:?} and diameter {d:?}"
        )),
    }
}

// ---------------------------------------------------------------------------
// closure engine

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClosureConfig {
    pub max_dim: usize,
    /// records kept per dimension; beyond it a seeded sample of that size is kept
    pub budget: Option<usize>,
    pub seed: u64,
    pub classify: bool,
}

impl ClosureConfig {
    pub fn exhaustive(max_dim: usize) -> ClosureConfig {
        ClosureConfig {
            max_dim,
            budget: None,
            seed: 0,
            classify: true,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ClosureSummary {
    pub max_dim: usize,
    pub records_per_dim: BTreeMap<usize, usize>,
    /// dimensions where the budget cut the frontier
    pub truncated_dims: Vec<usize>,
    pub budget: Option<usize>,
    pub seed: u64,
}

impl ClosureSummary {
    pub fn exhaustive(&self) -> bool {
        self.truncated_dims.is_empty()
    }

    /// Whether every supported subspace of dimension `dim` was visited.
    pub fn exhaustive_through(&self, dim: usize) -> bool {
        self.truncated_dims.iter().all(|&d| d > dim)
    }
}

/// Distinct keys, or the `cap` keys of least seeded hash.
enum Frontier {
    Full(FxHashSet<u128>),
    Sample {
        cap: usize,
        seed: u64,
        kept: BTreeSet<(u64, u128)>,
        overflowed: bool,
    },
}

fn mix(key: u128, seed: u64) -> u64 {
    let mut z = (key as u64) ^ ((key >> 64) as u64).rotate_left(31) ^ seed;
    for _ in 0..2 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

impl Frontier {
    fn new(budget: Option<usize>, seed: u64) -> Frontier {
        match budget {
            None => Frontier::Full(FxHashSet::default()),
            Some(cap) => Frontier::Sample {
                cap,
                seed,
                kept: BTreeSet::new(),
                overflowed: false,
            },
        }
    }

    fn insert(&mut self, key: u128) {
        match self {
            Frontier::Full(s) => {
                s.insert(key);
            }
            Frontier::Sample {
                cap,
                seed,
                kept,
                overflowed,
            } => {
                let item = (mix(key, *seed), key);
                if kept.len() < *cap {
                    kept.insert(item);
                } else if kept.last().is_some_and(|m| item < *m) {
                    if kept.insert(item) {
                        kept.pop_last();
                        *overflowed = true;
                    }
                } else if kept.last() != Some(&item) {
                    *overflowed = true;
                }
            }
        }
    }

    /// Sorted keys and whether anything was dropped.
    fn finish(self) -> (Vec<u128>, bool) {
        let (mut keys, cut): (Vec<u128>, bool) = match self {
            Frontier::Full(s) => (s.into_iter().collect(), false),
            Frontier::Sample {
                kept, overflowed, ..
            } => (kept.into_iter().map(|(_, k)| k).collect(), overflowed),
        };
        keys.sort_unstable();
        (keys, cut)
    }
}

struct ParentOut {
    record: Option<SupportedSubspaceRecord>,
    up1: Vec<u128>,
    up2: Vec<u128>,
}

struct Engine<'g> {
    geom: &'g Geometry,
    packed: Vec<[u64; 2]>,
    codec: KeyCodec,
    oracle: Option<DistanceOracle<'g>>,
    max_dim: usize,
}

impl Engine<'_> {
    fn process(&self, key: u128, dim: usize) -> ParentOut {
        let f = &**self.geom.field();
        let w = self.codec.decode(key);
        let red = Reducer::new(f, &w);
        let ar = red.ar;
        let mut inside = Vec::new();
        let mut meet_points = Vec::new();
        let mut images: FxHashSet<u64> = FxHashSet::default();
        let mut skews: FxHashSet<[u64; 2]> = FxHashSet::default();
        let want_skew = dim + 2 <= self.max_dim;
        for (l, packed) in self.packed.iter().enumerate() {
            let l = l as u32;
            match line_image(&red, packed, self.geom.line(l), want_skew) {
                LineImage::Inside => inside.push(l),
                LineImage::Meets { point, image } => {
                    meet_points.push(self.geom.point_id(&point).expect("indexed point"));
                    images.insert(image);
                }
                LineImage::Skew(Some(pair)) => {
                    skews.insert(pair);
                }
                LineImage::Skew(None) => {}
            }
        }
        let record = (dim >= 2).then(|| {
            let census = census_from(self.geom, &inside, &meet_points);
            let mut rec = SupportedSubspaceRecord::from_census(dim, w, census);
            if let Some(o) = &self.oracle {
                rec.classification = Some(classify_record(&rec, o));
            }
            rec
        });
        let child = |extra: &[u64]| {
            let mut rows: Vec<Vec8> = w.rows().to_vec();
            rows.extend(extra.iter().map(|&e| unpack(e)));
            let rank = rref(f, &mut rows);
            self.codec.encode(&Subspace::from_rref(&rows[..rank]))
        };
        let mut up1 = Vec::new();
        if dim < self.max_dim {
            up1 = images.iter().map(|&p| child(&[p])).collect();
            up1.sort_unstable();
        }
        let mut up2 = Vec::new();
        for pair in &skews {
            // a quotient line through the image of a meeting line is reached via that image
            let hit = images.contains(&pair[1])
                || f.elements().any(|c| {
                    let v = ar.add(pair[0], ar.scale(c, pair[1]));
                    images.contains(&ar.normalize(v))
                });
            if !hit {
                up2.push(child(pair));
            }
        }
        up2.sort_unstable();
        ParentOut { record, up1, up2 }
    }
}

/// Visits every supported subspace of dimension 2 to `cfg.max_dim` once, ordered by
/// dimension and then by compact key.
pub fn enumerate_supported<F>(
    geom: &Geometry,
    cfg: &ClosureConfig,
    mut visit: F,
) -> Result<ClosureSummary>
where
    F: FnMut(SupportedSubspaceRecord),
{
    if cfg.max_dim > MAX_CLOSURE_DIM {
        return Err(Error::domain(format!(
            "closure dimension {} exceeds {MAX_CLOSURE_DIM}",
            cfg.max_dim
        )));
    }
    let f = &**geom.field();
    let codec = KeyCodec::new(f)?;
    let oracle = cfg.classify.then(|| DistanceOracle::new(geom));
    let engine = Engine {
        geom,
        packed: packed_lines(geom),
        codec,
        oracle,
        max_dim: cfg.max_dim,
    };
    let mut summary = ClosureSummary {
        max_dim: cfg.max_dim,
        budget: cfg.budget,
        seed: cfg.seed,
        ..ClosureSummary::default()
    };
    let mut frontiers: Vec<Frontier> = (0..=cfg.max_dim + 2)
        .map(|d| Frontier::new(cfg.budget, cfg.seed.wrapping_add(d as u64)))
        .collect();
    for l in geom.lines() {
        frontiers[1].insert(codec.encode(l));
    }
    for dim in 1..=cfg.max_dim {
        let (keys, cut) = std::mem::replace(&mut frontiers[dim], Frontier::new(None, 0)).finish();
        if cut {
            summary.truncated_dims.push(dim);
        }
        let mut visited = 0;
        for chunk in keys.chunks(CHUNK) {
            let outs: Vec<ParentOut> = chunk.par_iter().map(|&k| engine.process(k, dim)).collect();
            for out in outs {
                if let Some(rec) = out.record {
                    visited += 1;
                    visit(rec);
                }
                if dim < cfg.max_dim {
                    for k in out.up1 {
                        frontiers[dim + 1].insert(k);
                    }
                }
                for k in out.up2 {
                    frontiers[dim + 2].insert(k);
                }
            }
        }
        if dim >= 2 {
            summary.records_per_dim.insert(dim, visited);
        }
    }
    Ok(summary)
}

// ---------------------------------------------------------------------------
// aggregated census

/// A supported subspace named in a report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RecordBrief {
    pub dim: usize,
    pub line_count: usize,
    pub subspace: Subspace,
    pub line_ids: Vec<u32>,
    pub detail: String,
}

impl RecordBrief {
    fn of(r: &SupportedSubspaceRecord, detail: impl Into<String>) -> RecordBrief {
        RecordBrief {
            dim: r.dim,
            line_count: r.line_ids.len(),
            subspace: r.subspace,
            line_ids: r.line_ids.clone(),
            detail: detail.into(),
        }
    }
}

/// Line counts, classes and point statistics over all enumerated supported subspaces.
#[derive(Clone, Debug, Default, Serialize)]
pub struct SupportedCensus {
    pub summary: ClosureSummary,
    /// dimension to line count to number of subspaces
    pub line_counts: BTreeMap<usize, BTreeMap<usize, usize>>,
    /// dimension to class to number of subspaces; empty unless classified
    pub classes: BTreeMap<usize, BTreeMap<ClassTag, usize>>,
    /// dimension to number of subspaces with isolated points
    pub with_isolated: BTreeMap<usize, usize>,
    /// dimension to number of subspaces with partial points
    pub with_partial: BTreeMap<usize, usize>,
    /// lines with at least 3 but fewer than q+1 ideal points
    pub propagation_failures: usize,
    /// first few subspaces of each (dimension, line count)
    #[serde(skip)]
    pub examples: BTreeMap<(usize, usize), Vec<RecordBrief>>,
    pub unclassified: Vec<RecordBrief>,
}

impl SupportedCensus {
    fn absorb(&mut self, r: &SupportedSubspaceRecord, q: usize, geom: &Geometry) {
        let n = r.line_ids.len();
        *self
            .line_counts
            .entry(r.dim)
            .or_default()
            .entry(n)
            .or_default() += 1;
        let ex = self.examples.entry((r.dim, n)).or_default();
        if ex.len() < 4 {
            ex.push(RecordBrief::of(r, ""));
        }
        if let Some(c) = &r.classification {
            *self
                .classes
                .entry(r.dim)
                .or_default()
                .entry(c.tag)
                .or_default() += 1;
            if let (ClassTag::Unclassified, Witness::Mismatch { reason }) = (c.tag, &c.witness) {
                if self.unclassified.len() < MAX_WITNESSES {
                    self.unclassified.push(RecordBrief::of(r, reason.clone()));
                }
            }
        }
        if !r.isolated_points.is_empty() {
            *self.with_isolated.entry(r.dim).or_default() += 1;
        }
        if !r.partial_points.is_empty() {
            *self.with_partial.entry(r.dim).or_default() += 1;
        }
        for &l in &r.line_ids {
            let k = geom
                .points_on(l)
                .iter()
                .filter(|p| r.ideal_points.binary_search(p).is_ok())
                .count();
            if k >= 3 && k < q + 1 {
                self.propagation_failures += 1;
            }
        }
    }

    pub fn count(&self, dim: usize, tag: ClassTag) -> usize {
        self.classes
            .get(&dim)
            .and_then(|m| m.get(&tag))
            .copied()
            .unwrap_or(0)
    }

    pub fn unclassified_total(&self) -> usize {
        self.classes
            .values()
            .filter_map(|m| m.get(&ClassTag::Unclassified))
            .sum()
    }

    pub fn isolated_total(&self) -> usize {
        self.with_isolated.values().sum()
    }

    /// Line counts of `dim`-dimensional supported subspaces.
    pub fn histogram(&self, dim: usize) -> BTreeMap<usize, usize> {
        self.line_counts.get(&dim).cloned().unwrap_or_default()
    }
}

pub fn supported_census(geom: &Geometry, cfg: &ClosureConfig) -> Result<SupportedCensus> {
    supported_census_with(geom, cfg, |_| {})
}

/// The census, also handing every record to `also`.
pub fn supported_census_with<F>(
    geom: &Geometry,
    cfg: &ClosureConfig,
    mut also: F,
) -> Result<SupportedCensus>
where
    F: FnMut(SupportedSubspaceRecord),
{
    let q = geom.field().q() as usize;
    let mut census = SupportedCensus::default();
    census.summary = enumerate_supported(geom, cfg, |r| {
        census.absorb(&r, q, geom);
        also(r);
    })?;
    Ok(census)
}

// ---------------------------------------------------------------------------
// properties

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum PropertyId {
    #[serde(rename = "pt")]
    Pt,
    #[serde(rename = "pl")]
    Pl,
    #[serde(rename = "sd")]
    Sd,
    #[serde(rename = "4d")]
    FourD,
    #[serde(rename = "4dp")]
    FourDPrime,
    #[serde(rename = "5d")]
    FiveD,
    #[serde(rename = "6d")]
    SixD,
    #[serde(rename = "to")]
    To,
}

impl PropertyId {
    pub const ALL: [PropertyId; 8] = [
        PropertyId::Pt,
        PropertyId::Pl,
        PropertyId::Sd,
        PropertyId::FourD,
        PropertyId::FourDPrime,
        PropertyId::FiveD,
        PropertyId::SixD,
        PropertyId::To,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PropertyId::Pt => "pt",
            PropertyId::Pl => "pl",
            PropertyId::Sd => "sd",
            PropertyId::FourD => "4d",
            PropertyId::FourDPrime => "4dp",
            PropertyId::FiveD => "5d",
            PropertyId::SixD => "6d",
            PropertyId::To => "to",
        }
    }

    /// Closure dimension needed to decide the property.
    pub fn closure_dim(self) -> usize {
        match self {
            PropertyId::Pt | PropertyId::To => 1,
            PropertyId::Pl => 2,
            PropertyId::Sd => 3,
            PropertyId::FourD | PropertyId::FourDPrime => 4,
            PropertyId::FiveD => 5,
            PropertyId::SixD => 6,
        }
    }

    /// The admissible counts, or `Err(bound)` for an upper bound.
    pub fn allowed(self, q: u64) -> std::result::Result<Vec<u64>, u64> {
        let q2 = q * q;
        let q3 = q2 * q;
        match self {
            PropertyId::Pt => Ok(vec![0, q + 1]),
            PropertyId::Pl => Ok(vec![0, 1, q + 1]),
            PropertyId::Sd => Ok(vec![0, 1, q + 1, 2 * q + 1]),
            PropertyId::FourD => Ok(vec![q2 + q + 1, q2 + 2 * q + 1]),
            PropertyId::FourDPrime => Err(q2 + 2 * q + 1),
            PropertyId::FiveD => Ok(vec![
                q3 + 1,
                q3 + q2 + q + 1,
                q3 + 2 * q2 + 2 * q + 1,
                q3 * q + q + 1,
            ]),
            PropertyId::SixD => Ok(vec![
                q3 * q2 + q3 * q + q + 1,
                q3 * q2 + q3 * q + q3 + q2 + q + 1,
            ]),
            PropertyId::To => Err(q3 * q3 * q3 + q3 * q3 * q2 + q3 * q2 + q3 * q + q + 1),
        }
    }

    /// Parses a comma-separated list; `all` selects every property.
    pub fn parse_list(s: &str) -> Result<Vec<PropertyId>> {
        if s.trim() == "all" {
            return Ok(PropertyId::ALL.to_vec());
        }
        let mut out: Vec<PropertyId> = s
            .split(',')
            .map(|t| t.trim().parse())
            .collect::<Result<_>>()?;
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }
}

impl FromStr for PropertyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<PropertyId> {
        PropertyId::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Usage(format!("unknown property '{s}'")))
    }
}

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PropertyWitness {
    Point { point: u32, lines: usize },
    Subspace(RecordBrief),
    Count { lines: usize, bound: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Coverage {
    pub exhaustive: bool,
    pub note: String,
    pub budget: Option<usize>,
    pub seed: u64,
    pub samples: usize,
}

/// Two formulas for the same count that disagree, and which one the data matches.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiscrepancyProbe {
    pub quantity: String,
    pub observed: Vec<u64>,
    pub adopted_formula: String,
    pub adopted_value: u64,
    pub competing_formula: String,
    pub competing_value: u64,
    pub matches_adopted: bool,
    pub matches_competing: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PropertyReport {
    pub property: PropertyId,
    pub verdict: Verdict,
    /// line count to multiplicity
    pub histogram: BTreeMap<usize, usize>,
    pub allowed: Vec<u64>,
    pub upper_bound: Option<u64>,
    pub witnesses: Vec<PropertyWitness>,
    pub coverage: Coverage,
    pub discrepancies: Vec<DiscrepancyProbe>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyOptions {
    /// per-dimension record budget of the closure
    pub budget: Option<usize>,
    pub seed: u64,
    /// random 4-spaces examined for (4d') on top of the exhaustive part
    pub samples_4dp: usize,
    pub classify: bool,
}

impl Default for VerifyOptions {
    fn default() -> VerifyOptions {
        VerifyOptions {
            budget: None,
            seed: 0,
            samples_4dp: 10_000,
            classify: true,
        }
    }
}

/// Reports for the requested properties, plus the census the closure produced.
pub fn verify_properties(
    geom: &Geometry,
    pids: &[PropertyId],
    opts: &VerifyOptions,
) -> Result<(Vec<PropertyReport>, Option<SupportedCensus>)> {
    let max_dim = pids.iter().map(|p| p.closure_dim()).max().unwrap_or(1);
    let census = if max_dim >= 2 && geom.num_lines() > 0 {
        let cfg = ClosureConfig {
            max_dim,
            budget: opts.budget,
            seed: opts.seed,
            classify: opts.classify,
        };
        Some(supported_census(geom, &cfg)?)
    } else {
        None
    };
    let reports = property_reports(geom, pids, census.as_ref(), opts);
    Ok((reports, census))
}

/// Reports read off an existing census; it must reach the closure dimension of every id.
pub fn property_reports(
    geom: &Geometry,
    pids: &[PropertyId],
    census: Option<&SupportedCensus>,
    opts: &VerifyOptions,
) -> Vec<PropertyReport> {
    pids.iter()
        .map(|&p| report_for(p, geom, census, opts))
        .collect()
}

pub fn verify_property(
    geom: &Geometry,
    pid: PropertyId,
    opts: &VerifyOptions,
) -> Result<PropertyReport> {
    let (mut r, _) = verify_properties(geom, &[pid], opts)?;
    Ok(r.remove(0))
}

fn report_for(
    pid: PropertyId,
    geom: &Geometry,
    census: Option<&SupportedCensus>,
    opts: &VerifyOptions,
) -> PropertyReport {
    let q = geom.field().q() as u64;
    let allowed = pid.allowed(q);
    let mut report = PropertyReport {
        property: pid,
        verdict: Verdict::Pass,
        histogram: BTreeMap::new(),
        allowed: allowed.clone().unwrap_or_default(),
        upper_bound: allowed.clone().err(),
        witnesses: Vec::new(),
        coverage: Coverage {
            exhaustive: true,
            note: String::new(),
            budget: opts.budget,
            seed: opts.seed,
            samples: 0,
        },
        discrepancies: Vec::new(),
    };
    let admissible = |n: usize| match &allowed {
        Ok(set) => set.contains(&(n as u64)),
        Err(bound) => n as u64 <= *bound,
    };
    let empty = SupportedCensus::default();
    let census = census.unwrap_or(&empty);
    let flag_dims = |report: &mut PropertyReport, dims: &[usize]| {
        for &d in dims {
            for (&n, &m) in &census.histogram(d) {
                if !admissible(n) {
                    for ex in census.examples.get(&(d, n)).into_iter().flatten() {
                        if report.witnesses.len() < MAX_WITNESSES {
                            let mut b = ex.clone();
                            b.detail = format!("{m} supported {d}-spaces with {n} lines");
                            report.witnesses.push(PropertyWitness::Subspace(b));
                        }
                    }
                }
            }
        }
        report.coverage.exhaustive = census
            .summary
            .exhaustive_through(*dims.iter().max().unwrap());
    };
    match pid {
        PropertyId::Pt => {
            for p in 0..geom.num_points() as u32 {
                let n = geom.lines_through(p).len();
                *report.histogram.entry(n).or_default() += 1;
                if !admissible(n) && report.witnesses.len() < MAX_WITNESSES {
                    report
                        .witnesses
                        .push(PropertyWitness::Point { point: p, lines: n });
                }
            }
            report.coverage.note =
                "every point on a line of the set; all other points lie on 0 lines".into();
        }
        PropertyId::Pl => {
            report.histogram = census.histogram(2);
            flag_dims(&mut report, &[2]);
            report.coverage.note =
                "a plane with two or more lines is spanned by them: all supported planes".into();
        }
        PropertyId::Sd => {
            report.histogram = census.histogram(3);
            flag_dims(&mut report, &[2, 3]);
            report.coverage.note = "the lines of a solid span a supported plane or solid: all supported planes and solids".into();
        }
        PropertyId::FourD => {
            report.histogram = census.histogram(4);
            flag_dims(&mut report, &[4]);
            report.coverage.note = "all supported 4-spaces".into();
        }
        PropertyId::FourDPrime => {
            for d in 2..=4 {
                for (n, m) in census.histogram(d) {
                    *report.histogram.entry(n).or_default() += m;
                }
            }
            flag_dims(&mut report, &[2, 3, 4]);
            let sampled = sample_four_spaces(geom, opts.samples_4dp, opts.seed);
            report.coverage.samples = sampled.samples;
            for w in sampled.violations {
                if report.witnesses.len() < MAX_WITNESSES {
                    report.witnesses.push(PropertyWitness::Subspace(w));
                }
            }
            report.coverage.note = format!(
                "the lines of a 4-space span a supported subspace of dimension at most 4: all of them; \
                 plus {} seeded random 4-spaces through two lines, largest count {}",
                sampled.samples, sampled.max_lines
            );
        }
        PropertyId::FiveD => {
            report.histogram = census.histogram(5);
            flag_dims(&mut report, &[5]);
            report.coverage.note = "all supported 5-spaces".into();
            let thin = ClassTag::ThinHex5.line_count(q).unwrap();
            report.discrepancies.push(probe(
                "line count of a supported 5-space meeting T in a subhexagon of order (1,q)",
                census.classes.get(&5).map_or_else(
                    || observed_counts(census, 5, &[thin, q * q * q + 4 * q * q + 1]),
                    |_| observed_class(census, 5, ClassTag::ThinHex5, thin),
                ),
                ("q^3+2q^2+2q+1", thin),
                ("q^3+4q^2+1", q * q * q + 4 * q * q + 1),
            ));
        }
        PropertyId::SixD => {
            report.histogram = census.histogram(6);
            flag_dims(&mut report, &[6]);
            report.coverage.note = "all supported 6-spaces".into();
            let sc = ClassTag::SplitCayley6.line_count(q).unwrap();
            let competing = q.pow(5) + q.pow(4) + q.pow(3) + q + 1;
            report.discrepancies.push(probe(
                "line count of a supported 6-space meeting T in a split Cayley hexagon",
                census.classes.get(&6).map_or_else(
                    || observed_counts(census, 6, &[sc, competing]),
                    |_| observed_class(census, 6, ClassTag::SplitCayley6, sc),
                ),
                ("(q+1)(q^4+q^2+1)", sc),
                ("q^5+q^4+q^3+q+1", competing),
            ));
        }
        PropertyId::To => {
            let n = geom.num_lines();
            report.histogram.insert(n, 1);
            if !admissible(n) {
                report.witnesses.push(PropertyWitness::Count {
                    lines: n,
                    bound: allowed.clone().unwrap_err(),
                });
            }
            let bound = allowed.clone().unwrap_err();
            report.coverage.note = if n as u64 == bound {
                format!("{n} lines, equal to the bound")
            } else {
                format!("{n} lines against the bound {bound}")
            };
        }
    }
    if !report.witnesses.is_empty() {
        report.verdict = Verdict::Fail;
    }
    report
}

fn observed_counts(census: &SupportedCensus, dim: usize, candidates: &[u64]) -> Vec<u64> {
    census
        .histogram(dim)
        .keys()
        .map(|&n| n as u64)
        .filter(|n| candidates.contains(n))
        .collect()
}

fn observed_class(census: &SupportedCensus, dim: usize, tag: ClassTag, count: u64) -> Vec<u64> {
    if census.count(dim, tag) > 0 {
        vec![count]
    } else {
        Vec::new()
    }
}

fn probe(
    quantity: &str,
    observed: Vec<u64>,
    adopted: (&str, u64),
    competing: (&str, u64),
) -> DiscrepancyProbe {
    DiscrepancyProbe {
        quantity: quantity.into(),
        matches_adopted: observed.contains(&adopted.1),
        matches_competing: observed.contains(&competing.1),
        observed,
        adopted_formula: adopted.0.into(),
        adopted_value: adopted.1,
        competing_formula: competing.0.into(),
        competing_value: competing.1,
    }
}

struct FourSpaceSample {
    samples: usize,
    max_lines: usize,
    violations: Vec<RecordBrief>,
}

/// Random 4-spaces spanned by two random lines of the set and random vectors.
fn sample_four_spaces(geom: &Geometry, samples: usize, seed: u64) -> FourSpaceSample {
    let q = geom.field().q() as usize;
    let bound = (q + 1) * (q + 1);
    let nl = geom.num_lines();
    if nl == 0 || samples == 0 {
        return FourSpaceSample {
            samples: 0,
            max_lines: 0,
            violations: Vec::new(),
        };
    }
    let f = &**geom.field();
    let counts: Vec<(usize, Subspace, Vec<u32>)> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ mix(i as u128, 0x4D50));
            let a = geom.line(rng.gen_range(0..nl as u32));
            let b = geom.line(rng.gen_range(0..nl as u32));
            let mut rows: Vec<Vec8> = a.rows().iter().chain(b.rows()).copied().collect();
            let mut rank = rref(f, &mut rows);
            rows.truncate(rank);
            while rank < 5 {
                let mut v = ZERO_VEC;
                for x in v.iter_mut() {
                    *x = Fe(rng.gen_range(0..f.order() as u16));
                }
                rows.push(v);
                rank = rref(f, &mut rows);
                rows.truncate(rank);
            }
            let u = Subspace::from_rref(&rows);
            let eqs = u.equations(f);
            let inside: Vec<u32> = (0..nl as u32)
                .filter(|&l| {
                    geom.line(l)
                        .rows()
                        .iter()
                        .all(|r| eqs.iter().all(|e| crate::projspace::dot(f, e, r).is_zero()))
                })
                .collect();
            (inside.len(), u, inside)
        })
        .collect();
    let max_lines = counts.iter().map(|c| c.0).max().unwrap_or(0);
    let violations = counts
        .into_iter()
        .filter(|c| c.0 > bound)
        .take(MAX_WITNESSES)
        .map(|(n, u, lines)| RecordBrief {
            dim: 4,
            line_count: n,
            subspace: u,
            line_ids: lines,
            detail: "sampled 4-space".into(),
        })
        .collect();
    FourSpaceSample {
        samples,
        max_lines,
        violations,
    }
}

// ---------------------------------------------------------------------------
// hermitian spreads

/// A spread-5 subspace and the checks tying it to a split Cayley 6-space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HermitianSpread {
    pub subspace: Subspace,
    pub lines: Vec<u32>,
    /// supported 6-spaces through the 5-space classified as split Cayley
    pub split_cayley_spaces: Vec<Subspace>,
    /// the spread meets every line of each of those 6-spaces
    pub blocks_split_cayley: bool,
    /// no line of the hexagon is opposite every line of the spread
    pub no_opposite_line: bool,
}

/// Gathers spread-5 and split Cayley 6-space records from a classified closure.
#[derive(Default)]
pub struct SpreadCollector {
    spreads: Vec<SupportedSubspaceRecord>,
    sc6: FxHashMap<Subspace, Vec<u32>>,
}

impl SpreadCollector {
    pub fn visit(&mut self, r: SupportedSubspaceRecord) {
        match r.class_tag() {
            Some(ClassTag::Spread5) => self.spreads.push(r),
            Some(ClassTag::SplitCayley6) => {
                self.sc6.insert(r.subspace, r.line_ids);
            }
            _ => {}
        }
    }

    /// Each spread checked against the split Cayley 6-spaces containing it.
    pub fn finish(self, geom: &Geometry) -> Vec<HermitianSpread> {
        let f = &**geom.field();
        let oracle = DistanceOracle::new(geom);
        let np = geom.num_points();
        let sc6 = &self.sc6;
        self.spreads
            .par_iter()
            .map(|r| {
                let u = r.subspace;
                let red = Reducer::new(f, &u);
                // hyperplanes through u correspond to points of the quotient line
                let mut pair: Vec<Vec8> = (0..N)
                    .map(|i| red.reduce(&crate::projspace::unit(i)))
                    .filter(|v| !is_zero(v))
                    .collect();
                let rank = rref(f, &mut pair);
                debug_assert_eq!(rank, 2);
                let quot: Vec<Vec8> = std::iter::once(pair[1])
                    .chain(f.elements().map(|c| axpy(f, &pair[0], c, &pair[1])))
                    .collect();
                let mut spaces = Vec::new();
                let mut blocks = true;
                for v in quot {
                    let w = u.join_vec(f, &v);
                    if let Some(lines) = sc6.get(&w) {
                        spaces.push(w);
                        blocks &= lines.iter().all(|&l| meets_any(geom, &r.line_ids, l));
                    }
                }
                spaces.sort_unstable();
                let rows: Vec<_> = r
                    .line_ids
                    .iter()
                    .map(|&l| oracle.row_of(Elem::Line(l)))
                    .collect();
                let no_opposite =
                    (0..geom.num_lines()).all(|m| rows.iter().any(|row| row[np + m] < 6));
                HermitianSpread {
                    subspace: u,
                    lines: r.line_ids.clone(),
                    blocks_split_cayley: blocks && !spaces.is_empty(),
                    split_cayley_spaces: spaces,
                    no_opposite_line: no_opposite,
                }
            })
            .collect()
    }
}

/// Spread-5 records of a closure to dimension 6, each checked against the
/// split Cayley 6-spaces containing it.
pub fn find_hermitian_spreads(
    h: &Hexagon,
    budget: Option<usize>,
    seed: u64,
) -> Result<Vec<HermitianSpread>> {
    let geom = h.geometry();
    let cfg = ClosureConfig {
        max_dim: 6,
        budget,
        seed,
        classify: true,
    };
    let mut c = SpreadCollector::default();
    enumerate_supported(geom, &cfg, |r| c.visit(r))?;
    Ok(c.finish(geom))
}

fn meets_any(geom: &Geometry, spread: &[u32], line: u32) -> bool {
    geom.points_on(line).iter().any(|&p| {
        geom.lines_through(p)
            .iter()
            .any(|l| spread.binary_search(l).is_ok())
    })
}

// ---------------------------------------------------------------------------
// sandwich

/// For `w <= v <= u` with every line of the set in `u` meeting `w` and no isolated
/// points in `u` or `w`: whether `v` is free of isolated points. `None` when the
/// hypotheses fail.
pub fn sandwich_instance(
    geom: &Geometry,
    u: &Subspace,
    v: &Subspace,
    w: &Subspace,
) -> Option<bool> {
    let f = &**geom.field();
    if !u.contains_subspace(f, v) || !v.contains_subspace(f, w) {
        return None;
    }
    let cu = classify_points(geom, u);
    let cw = classify_points(geom, w);
    if !cu.isolated.is_empty() || !cw.isolated.is_empty() {
        return None;
    }
    let red = Reducer::new(f, w);
    let packed = packed_lines(geom);
    let all_meet = cu.lines.iter().all(|&l| {
        !matches!(
            line_image(&red, &packed[l as usize], geom.line(l), false),
            LineImage::Skew(_)
        )
    });
    if !all_meet {
        return None;
    }
    Some(classify_points(geom, v).isolated.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use std::sync::OnceLock;

    fn t82() -> &'static Hexagon {
        static H: OnceLock<Hexagon> = OnceLock::new();
        H.get_or_init(|| Hexagon::build(&FieldSpec::twisted(2).unwrap()).unwrap())
    }

    #[test]
    fn codec_round_trips() {
        let h = t82();
        let f = &**h.field();
        let codec = KeyCodec::new(f).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let k = rng.gen_range(1..=8);
            let vs: Vec<Vec8> = (0..k)
                .map(|_| {
                    let mut v = ZERO_VEC;
                    for x in v.iter_mut() {
                        *x = Fe(rng.gen_range(0..8));
                    }
                    v
                })
                .collect();
            if let Ok(s) = Subspace::from_vectors(f, &vs) {
                assert_eq!(codec.decode(codec.encode(&s)), s);
            }
        }
        for l in h.lines() {
            assert_eq!(codec.decode(codec.encode(l)), *l);
        }
    }

    #[test]
    fn pencil_and_perp_censuses() {
        let h = t82();
        let f = h.field().clone();
        let tri = crate::forms::Triality::new(f.clone());
        let x = *h.point(0);
        let plane = tri.absolute_plane(&x).unwrap();
        let c = classify_points(h, &plane);
        assert_eq!(c.lines.len(), 3);
        assert_eq!(c.ideal, vec![0]);
        assert!(c.isolated.is_empty());
        let perp = polar_point(&f, &x);
        let c = classify_points(h, &perp);
        assert_eq!(c.lines.len(), 51);
        assert_eq!(c.ideal.len(), 25);
        assert!(c.isolated.is_empty());
    }

    #[test]
    fn planes_and_solids_at_q2() {
        let h = t82();
        let census = supported_census(h, &ClosureConfig::exhaustive(3)).unwrap();
        assert_eq!(census.count(2, ClassTag::PencilPlane), 2457);
        assert_eq!(census.count(3, ClassTag::BipencilSolid), 29_484);
        assert_eq!(census.count(3, ClassTag::RegulusSolid), 69_888);
        assert_eq!(census.unclassified_total(), 0);
        assert_eq!(census.isolated_total(), 0);
    }

    #[test]
    fn budget_samples_deterministically() {
        let h = t82();
        let cfg = ClosureConfig {
            max_dim: 3,
            budget: Some(50),
            seed: 11,
            classify: false,
        };
        let collect = || {
            let mut keys = Vec::new();
            let s = enumerate_supported(h, &cfg, |r| keys.push(r.subspace)).unwrap();
            (keys, s)
        };
        let (a, sa) = collect();
        let (b, _) = collect();
        assert_eq!(a, b);
        assert!(!sa.exhaustive());
        assert!(sa.records_per_dim.values().all(|&n| n <= 50));
    }

    #[test]
    fn property_ids_parse() {
        assert_eq!(PropertyId::parse_list("all").unwrap().len(), 8);
        assert_eq!(
            PropertyId::parse_list("4dp,pt,pt").unwrap(),
            vec![PropertyId::Pt, PropertyId::FourDPrime]
        );
        assert!(matches!(
            PropertyId::parse_list("pt,7d"),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn single_line_fails_pt() {
        let h = t82();
        let g = h.restrict(h.points_on(0), &[0]);
        let r = verify_property(&g, PropertyId::Pt, &VerifyOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.histogram, BTreeMap::from([(1, 9)]));
    }

    #[test]
    fn expected_counts_at_q2() {
        let counts: Vec<u64> = ClassTag::CASES
            .iter()
            .map(|t| t.line_count(2).unwrap())
            .collect();
        assert_eq!(counts, vec![3, 5, 3, 7, 9, 9, 15, 21, 19, 51, 63]);
    }
}
