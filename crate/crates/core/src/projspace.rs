//! Points and subspaces of PG(7, K).
//!
//! A subspace is stored as the reduced row-echelon basis of its underlying
//! vector space: rows sorted by pivot column, pivots equal to 1, zeros above
//! and below each pivot. That basis is unique, so equality of subspaces is
//! equality of the stored rows.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Fe, Field};

/// Number of homogeneous coordinates.
pub const N: usize = 8;

pub type Vec8 = [Fe; N];

pub const ZERO_VEC: Vec8 = [Fe::ZERO; N];

/// Standard basis vector `e_i`.
pub fn unit(i: usize) -> Vec8 {
    let mut v = ZERO_VEC;
    v[i] = Fe::ONE;
    v
}

pub fn is_zero(v: &Vec8) -> bool {
    v.iter().all(|x| x.is_zero())
}

/// `a + c*b`
#[inline]
pub fn axpy(f: &Field, a: &Vec8, c: Fe, b: &Vec8) -> Vec8 {
    let mut out = *a;
    if !c.is_zero() {
        for i in 0..N {
            out[i] = f.mul_add(a[i], c, b[i]);
        }
    }
    out
}

#[inline]
pub fn scale(f: &Field, c: Fe, v: &Vec8) -> Vec8 {
    let mut out = ZERO_VEC;
    for i in 0..N {
        out[i] = f.mul(c, v[i]);
    }
    out
}

#[inline]
pub fn dot(f: &Field, a: &Vec8, b: &Vec8) -> Fe {
    let mut s = Fe::ZERO;
    for i in 0..N {
        s = f.mul_add(s, a[i], b[i]);
    }
    s
}

/// Coordinatewise sigma.
pub fn sigma_vec(f: &Field, v: &Vec8) -> Vec8 {
    let mut out = *v;
    for x in out.iter_mut() {
        *x = f.sigma(*x);
    }
    out
}

/// Scales `v` so that its first nonzero coordinate is 1. Returns `None` for the zero vector.
pub fn normalize(f: &Field, v: &Vec8) -> Option<Vec8> {
    let lead = v.iter().position(|x| !x.is_zero())?;
    if v[lead] == Fe::ONE {
        return Some(*v);
    }
    Some(scale(f, f.inv_nonzero(v[lead]), v))
}

/// A point of PG(7, K), normalized so that its first nonzero coordinate is 1.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProjPoint(Vec8);

impl ProjPoint {
    pub fn new(f: &Field, v: Vec8) -> Result<ProjPoint> {
        normalize(f, &v)
            .map(ProjPoint)
            .ok_or_else(|| Error::domain("the zero vector is not a projective point"))
    }

    /// Wraps a vector already known to be normalized.
    pub(crate) fn from_normalized(v: Vec8) -> ProjPoint {
        debug_assert!(v.iter().find(|x| !x.is_zero()) == Some(&Fe::ONE));
        ProjPoint(v)
    }

    pub fn unit(i: usize) -> ProjPoint {
        ProjPoint(unit(i))
    }

    pub fn coords(&self) -> &Vec8 {
        &self.0
    }

    pub fn to_subspace(&self) -> Subspace {
        Subspace::from_rref(&[self.0])
    }
}

impl fmt::Debug for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c: Vec<u16> = self.0.iter().map(|x| x.0).collect();
        write!(
            f,
            "({})",
            c.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        )
    }
}

/// Brings `rows[..]` into reduced row-echelon form in place and returns the rank.
/// The first `rank` entries hold the canonical basis, ordered by pivot column.
pub fn rref(f: &Field, rows: &mut [Vec8]) -> usize {
    let mut rank = 0;
    for col in 0..N {
        if rank == rows.len() {
            break;
        }
        let Some(pr) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pr);
        let inv = f.inv_nonzero(rows[rank][col]);
        if inv != Fe::ONE {
            rows[rank] = scale(f, inv, &rows[rank]);
        }
        let pivot = rows[rank];
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank {
                let c = row[col];
                if !c.is_zero() {
                    *row = axpy(f, row, f.neg(c), &pivot);
                }
            }
        }
        rank += 1;
    }
    rank
}

/// A nonempty subspace of PG(7, K) in canonical reduced row-echelon form.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    rank: u8,
    rows: [Vec8; N],
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Subspace")
            .field("dim", &self.dim())
            .field(
                "rows",
                &self
                    .rows()
                    .iter()
                    .map(|r| ProjPoint(*r))
                    .collect::<Vec<_>>(),
            )
            .finish()
    }
}

/// Serialized as the list of canonical rows.
impl Serialize for Subspace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl Subspace {
    /// From rows already in canonical form.
    pub(crate) fn from_rref(rows: &[Vec8]) -> Subspace {
        let mut s = Subspace {
            rank: rows.len() as u8,
            rows: [ZERO_VEC; N],
        };
        s.rows[..rows.len()].copy_from_slice(rows);
        s
    }

    /// Span of arbitrary vectors; at least one must be nonzero.
    pub fn from_vectors(f: &Field, vectors: &[Vec8]) -> Result<Subspace> {
        let mut work = vectors.to_vec();
        let rank = rref(f, &mut work);
        if rank == 0 {
            return Err(Error::domain("span of no nonzero vectors is empty"));
        }
        Ok(Subspace::from_rref(&work[..rank]))
    }

    /// Smallest subspace containing all the generators.
    pub fn span(f: &Field, generators: &[Subspace]) -> Result<Subspace> {
        if generators.is_empty() {
            return Err(Error::domain("span of an empty generator set"));
        }
        let vecs: Vec<Vec8> = generators
            .iter()
            .flat_map(|g| g.rows().iter().copied())
            .collect();
        Subspace::from_vectors(f, &vecs)
    }

    pub fn span_points(f: &Field, points: &[ProjPoint]) -> Result<Subspace> {
        let vecs: Vec<Vec8> = points.iter().map(|p| p.0).collect();
        Subspace::from_vectors(f, &vecs)
    }

    pub fn whole() -> Subspace {
        let rows: Vec<Vec8> = (0..N).map(unit).collect();
        Subspace::from_rref(&rows)
    }

    /// The hyperplane `{x : a . x = 0}`.
    pub fn hyperplane(f: &Field, a: &Vec8) -> Result<Subspace> {
        Subspace::from_equations(f, &[*a])?
            .ok_or_else(|| Error::domain("hyperplane equation vanishes identically"))
    }

    /// Solution set of the homogeneous linear system; `None` when only the zero vector solves it.
    pub fn from_equations(f: &Field, equations: &[Vec8]) -> Result<Option<Subspace>> {
        let mut work = equations.to_vec();
        let rank = rref(f, &mut work);
        let basis = null_space(f, &work[..rank]);
        if basis.is_empty() {
            return Ok(None);
        }
        Ok(Some(Subspace::from_vectors(f, &basis)?))
    }

    pub fn rank(&self) -> usize {
        self.rank as usize
    }

    /// Projective dimension.
    pub fn dim(&self) -> usize {
        self.rank as usize - 1
    }

    pub fn rows(&self) -> &[Vec8] {
        &self.rows[..self.rank as usize]
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.rows()
            .iter()
            .map(|r| {
                r.iter()
                    .position(|x| !x.is_zero())
                    .expect("rref row is nonzero")
            })
            .collect()
    }

    /// Equations cutting out this subspace: a basis of its annihilator.
    pub fn equations(&self, f: &Field) -> Vec<Vec8> {
        null_space(f, self.rows())
    }

    /// Residual of `v` after elimination against the rows; zero iff `v` lies in the span.
    pub fn reduce(&self, f: &Field, v: &Vec8) -> Vec8 {
        let mut r = *v;
        for row in self.rows() {
            let piv = row.iter().position(|x| !x.is_zero()).unwrap();
            let c = r[piv];
            if !c.is_zero() {
                r = axpy(f, &r, f.neg(c), row);
            }
        }
        r
    }

    pub fn contains_vec(&self, f: &Field, v: &Vec8) -> bool {
        is_zero(&self.reduce(f, v))
    }

    pub fn contains(&self, f: &Field, p: &ProjPoint) -> bool {
        self.contains_vec(f, &p.0)
    }

    pub fn contains_subspace(&self, f: &Field, other: &Subspace) -> bool {
        other.rank <= self.rank && other.rows().iter().all(|r| self.contains_vec(f, r))
    }

    pub fn join(&self, f: &Field, other: &Subspace) -> Subspace {
        Subspace::span(f, &[*self, *other]).expect("nonempty")
    }

    pub fn join_vec(&self, f: &Field, v: &Vec8) -> Subspace {
        let mut vecs = self.rows().to_vec();
        vecs.push(*v);
        Subspace::from_vectors(f, &vecs).expect("nonempty")
    }

    /// Set-theoretic intersection, `None` when it is empty.
    pub fn intersect(&self, f: &Field, other: &Subspace) -> Option<Subspace> {
        let mut eqs = self.equations(f);
        eqs.extend(other.equations(f));
        Subspace::from_equations(f, &eqs).expect("valid system")
    }

    /// Number of points, `(|K|^(dim+1) - 1) / (|K| - 1)`.
    pub fn point_count(&self, f: &Field) -> u64 {
        let k = f.order() as u64;
        (k.pow(self.rank as u32) - 1) / (k - 1)
    }

    /// All points, in lexicographic order of their normalized coordinates.
    pub fn points<'a>(&self, f: &'a Field) -> PointIter<'a> {
        PointIter::new(f, self.rows())
    }

    /// Injective byte encoding of the canonical form. Byte order agrees with the `Ord` of subspaces of equal dimension.
    pub fn canonical_key(&self) -> Vec<u8> {
        let mut key = Vec::with_capacity(1 + 2 * N * self.rank as usize);
        key.push(self.rank);
        for row in self.rows() {
            for x in row {
                key.extend_from_slice(&x.0.to_be_bytes());
            }
        }
        key
    }

    /// Indices of the lines in `among` contained in this subspace.
    pub fn lines_in(&self, f: &Field, among: &[Subspace]) -> Vec<usize> {
        among
            .iter()
            .enumerate()
            .filter(|(_, l)| self.contains_subspace(f, l))
            .map(|(i, _)| i)
            .collect()
    }

    /// The single point of a dim-0 subspace.
    pub fn as_point(&self) -> Option<ProjPoint> {
        (self.rank == 1).then(|| ProjPoint(self.rows[0]))
    }
}

/// Basis of `{x : r . x = 0 for every row r}`, for rows in reduced row-echelon form.
pub fn null_space(f: &Field, rref_rows: &[Vec8]) -> Vec<Vec8> {
    let pivots: Vec<usize> = rref_rows
        .iter()
        .map(|r| r.iter().position(|x| !x.is_zero()).expect("nonzero row"))
        .collect();
    let mut basis = Vec::with_capacity(N - pivots.len());
    for free in (0..N).filter(|c| !pivots.contains(c)) {
        let mut v = ZERO_VEC;
        v[free] = Fe::ONE;
        for (row, &piv) in rref_rows.iter().zip(&pivots) {
            v[piv] = f.neg(row[free]);
        }
        basis.push(v);
    }
    basis
}

/// Streams the points of a subspace given by canonical rows.
///
/// For canonical rows the first coordinate at which two normalized points
/// differ is always a pivot column, so lexicographic order of coordinates
/// equals lexicographic order of the coefficient vectors. Points whose leading
/// coefficient sits on a later row come first.
pub struct PointIter<'a> {
    f: &'a Field,
    rows: Vec<Vec8>,
    lead: usize,
    coeffs: Vec<u16>,
    done: bool,
}

impl<'a> PointIter<'a> {
    fn new(f: &'a Field, rows: &[Vec8]) -> Self {
        PointIter {
            f,
            rows: rows.to_vec(),
            lead: rows.len().saturating_sub(1),
            coeffs: Vec::new(),
            done: rows.is_empty(),
        }
    }
}

impl Iterator for PointIter<'_> {
    type Item = ProjPoint;

    fn next(&mut self) -> Option<ProjPoint> {
        if self.done {
            return None;
        }
        let f = self.f;
        let mut v = self.rows[self.lead];
        for (i, &c) in self.coeffs.iter().enumerate() {
            v = axpy(f, &v, Fe(c), &self.rows[self.lead + 1 + i]);
        }
        // odometer over the trailing coefficients, least significant last
        let order = f.order() as u16;
        let mut pos = self.coeffs.len();
        loop {
            if pos == 0 {
                if self.lead == 0 {
                    self.done = true;
                } else {
                    self.lead -= 1;
                    self.coeffs = vec![0; self.rows.len() - 1 - self.lead];
                }
                break;
            }
            pos -= 1;
            self.coeffs[pos] += 1;
            if self.coeffs[pos] < order {
                break;
            }
            self.coeffs[pos] = 0;
        }
        Some(ProjPoint(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gf8() -> Field {
        Field::twisted(2).unwrap()
    }

    fn pt(i: usize) -> Subspace {
        ProjPoint::unit(i).to_subspace()
    }

    #[test]
    fn span_examples() {
        let f = gf8();
        assert_eq!(Subspace::span(&f, &[pt(0), pt(4)]).unwrap().dim(), 1);
        assert_eq!(Subspace::span(&f, &[pt(0), pt(0)]).unwrap(), pt(0));
        let all: Vec<Subspace> = (0..8).map(pt).collect();
        assert_eq!(Subspace::span(&f, &all).unwrap(), Subspace::whole());
        assert!(matches!(Subspace::span(&f, &[]), Err(Error::Domain(_))));
    }

    #[test]
    fn intersect_examples() {
        let f = gf8();
        let l = Subspace::span(&f, &[pt(0), pt(4)]).unwrap();
        assert_eq!(l.intersect(&f, &l), Some(l));
        let h1 = Subspace::hyperplane(&f, &unit(0)).unwrap();
        let h2 = Subspace::hyperplane(&f, &unit(3)).unwrap();
        assert_eq!(h1.intersect(&f, &h2).unwrap().dim(), 5);
        let m = Subspace::span(&f, &[pt(1), pt(2)]).unwrap();
        assert_eq!(l.intersect(&f, &m), None);
    }

    #[test]
    fn point_enumeration_counts_and_order() {
        let f = gf8();
        let line = Subspace::span(&f, &[pt(0), pt(1)]).unwrap();
        let plane = Subspace::span(&f, &[pt(0), pt(1), pt(5)]).unwrap();
        assert_eq!(line.points(&f).count(), 9);
        assert_eq!(plane.points(&f).count(), 73);
        for s in [line, plane] {
            let pts: Vec<ProjPoint> = s.points(&f).collect();
            assert!(pts.windows(2).all(|w| w[0] < w[1]));
            assert!(pts.iter().all(|p| s.contains(&f, p)));
        }
        assert!(!line.contains(&f, &ProjPoint::unit(2)));
    }

    #[test]
    fn gaussian_counts_over_gf2() {
        // dims 0..3 of PG(7,2), both random and coordinate subspaces
        let f = Field::split_cayley(2).unwrap();
        for r in 1..=4 {
            let s = Subspace::from_vectors(&f, &(0..r).map(unit).collect::<Vec<_>>()).unwrap();
            assert_eq!(s.points(&f).count() as u64, (1u64 << r) - 1);
        }
    }

    #[test]
    fn canonical_key_examples() {
        let f = gf8();
        let a = Subspace::span(&f, &[pt(0), pt(4)]).unwrap();
        let mut v = unit(0);
        v[4] = Fe(3);
        let b = Subspace::from_vectors(&f, &[unit(4), v]).unwrap();
        assert_eq!(a.canonical_key(), b.canonical_key());
        assert_ne!(pt(0).canonical_key(), pt(1).canonical_key());
    }

    #[test]
    fn projective_points_normalize() {
        let f = gf8();
        let mut v = ZERO_VEC;
        v[2] = Fe(5);
        v[6] = Fe(3);
        let p = ProjPoint::new(&f, v).unwrap();
        assert_eq!(p.coords()[2], Fe::ONE);
        assert!(ProjPoint::new(&f, ZERO_VEC).is_err());
    }

    fn random_vec(f: &Field, rng: &mut ChaCha8Rng) -> Vec8 {
        let mut v = ZERO_VEC;
        for x in v.iter_mut() {
            *x = Fe(rng.gen_range(0..f.order() as u16));
        }
        v
    }

    #[test]
    fn equations_cut_out_the_subspace() {
        let f = gf8();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let r = rng.gen_range(1..=7);
            let vecs: Vec<Vec8> = (0..r).map(|_| random_vec(&f, &mut rng)).collect();
            let Ok(s) = Subspace::from_vectors(&f, &vecs) else {
                continue;
            };
            let eqs = s.equations(&f);
            assert_eq!(eqs.len(), N - s.rank());
            assert_eq!(Subspace::from_equations(&f, &eqs).unwrap(), Some(s));
        }
    }
}
