//! The hyperbolic quadric `x0x4 + x1x5 + x2x6 + x3x7 = 0`, its polarity,
//! the trilinear form T, and the triality `tau_sigma` with absoluteness tests.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::projspace::{is_zero, sigma_vec, ProjPoint, Subspace, Vec8, N, ZERO_VEC};

/// `Q(x) = x0x4 + x1x5 + x2x6 + x3x7`, evaluated directly in every characteristic.
pub fn qform(f: &Field, x: &Vec8) -> Fe {
    let mut s = Fe::ZERO;
    for i in 0..4 {
        s = f.mul_add(s, x[i], x[i + 4]);
    }
    s
}

pub fn on_quadric(f: &Field, x: &Vec8) -> bool {
    qform(f, x).is_zero()
}

/// Coordinates `x_{i+4}, x_i` swapped, so that `B(x, y) = swap(x) . y`.
#[inline]
pub fn swap_halves(x: &Vec8) -> Vec8 {
    let mut out = ZERO_VEC;
    out[..4].copy_from_slice(&x[4..]);
    out[4..].copy_from_slice(&x[..4]);
    out
}

/// The polarization `B(x,y) = sum_{i<4} x_i y_{i+4} + x_{i+4} y_i`.
pub fn bilinear(f: &Field, x: &Vec8, y: &Vec8) -> Fe {
    let mut s = Fe::ZERO;
    for i in 0..4 {
        s = f.mul_add(s, x[i], y[i + 4]);
        s = f.mul_add(s, x[i + 4], y[i]);
    }
    s
}

/// The polar subspace `{y : B(x,y) = 0 for all x in U}`; `None` for the whole space.
pub fn polar(f: &Field, u: &Subspace) -> Option<Subspace> {
    let eqs: Vec<Vec8> = u.rows().iter().map(swap_halves).collect();
    Subspace::from_equations(f, &eqs).expect("valid system")
}

/// Polar hyperplane of a single point.
pub fn polar_point(f: &Field, x: &ProjPoint) -> Subspace {
    polar(f, &x.to_subspace()).expect("a point has a polar hyperplane")
}

/// How a line meets the quadric: in 0, 1 or 2 points, or entirely.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadricClass {
    Zero,
    One,
    Two,
    All,
}

pub fn line_quadric_class(f: &Field, line: &Subspace) -> Result<QuadricClass> {
    if line.rank() != 2 {
        return Err(Error::domain(format!(
            "expected a line, got a subspace of dimension {}",
            line.dim()
        )));
    }
    let count = line.points(f).filter(|p| on_quadric(f, p.coords())).count();
    Ok(match count {
        0 => QuadricClass::Zero,
        1 => QuadricClass::One,
        2 => QuadricClass::Two,
        c if c == f.order() + 1 => QuadricClass::All,
        c => {
            return Err(Error::Inconsistency(format!(
                "line meets the quadric in {c} points"
            )))
        }
    })
}

/// One monomial `coef * x_i * y_j * z_k` of the trilinear form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Term {
    pub i: u8,
    pub j: u8,
    pub k: u8,
    /// +1 or -1.
    pub coef: i8,
}

/// Sparse coefficient tensor of T.
#[derive(Clone, Debug)]
pub struct TrilinearTensor {
    terms: Vec<Term>,
    /// coefficient of each term, as a field element
    coefs: Vec<Fe>,
}

fn det_terms(offset: u8) -> [(u8, u8, u8, i8); 6] {
    let o = offset;
    [
        (o, 1 + o, 2 + o, 1),
        (o, 2 + o, 1 + o, -1),
        (1 + o, o, 2 + o, -1),
        (1 + o, 2 + o, o, 1),
        (2 + o, o, 1 + o, 1),
        (2 + o, 1 + o, o, -1),
    ]
}

impl TrilinearTensor {
    pub fn new(f: &Field) -> TrilinearTensor {
        let mut raw: Vec<(u8, u8, u8, i8)> = Vec::with_capacity(32);
        raw.extend(det_terms(0));
        raw.extend(det_terms(4));
        for a in 0..3u8 {
            raw.push((3, 4 + a, a, 1)); // x3 z_a y_{a+4}
            raw.push((7, a, 4 + a, 1)); // x7 y_a z_{a+4}
            raw.push((a, 3, 4 + a, 1)); // y3 x_a z_{a+4}
            raw.push((4 + a, 7, a, 1)); // y7 z_a x_{a+4}
            raw.push((4 + a, a, 3, 1)); // z3 y_a x_{a+4}
            raw.push((a, 4 + a, 7, 1)); // z7 x_a y_{a+4}
        }
        raw.push((3, 3, 3, -1));
        raw.push((7, 7, 7, -1));
        let terms: Vec<Term> = raw
            .into_iter()
            .map(|(i, j, k, coef)| Term { i, j, k, coef })
            .collect();
        let coefs = terms.iter().map(|t| f.from_int(t.coef as i64)).collect();
        TrilinearTensor { terms, coefs }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Dense coefficient `c[i][j][k]` as an integer.
    pub fn coefficient(&self, i: usize, j: usize, k: usize) -> i64 {
        self.terms
            .iter()
            .filter(|t| (t.i as usize, t.j as usize, t.k as usize) == (i, j, k))
            .map(|t| t.coef as i64)
            .sum()
    }

    pub fn eval(&self, f: &Field, x: &Vec8, y: &Vec8, z: &Vec8) -> Fe {
        let mut s = Fe::ZERO;
        for (t, &c) in self.terms.iter().zip(&self.coefs) {
            let m = f.mul(f.mul(x[t.i as usize], y[t.j as usize]), z[t.k as usize]);
            s = f.mul_add(s, c, m);
        }
        s
    }

    /// `T(x, y, .)` as a coefficient vector over the z slot.
    #[inline]
    pub fn contract_xy(&self, f: &Field, x: &Vec8, y: &Vec8) -> Vec8 {
        let mut out = ZERO_VEC;
        for (t, &c) in self.terms.iter().zip(&self.coefs) {
            let m = f.mul(x[t.i as usize], y[t.j as usize]);
            if !m.is_zero() {
                out[t.k as usize] = f.mul_add(out[t.k as usize], c, m);
            }
        }
        out
    }

    /// `T(x, ., z)` as a coefficient vector over the y slot.
    #[inline]
    pub fn contract_xz(&self, f: &Field, x: &Vec8, z: &Vec8) -> Vec8 {
        let mut out = ZERO_VEC;
        for (t, &c) in self.terms.iter().zip(&self.coefs) {
            let m = f.mul(x[t.i as usize], z[t.k as usize]);
            if !m.is_zero() {
                out[t.j as usize] = f.mul_add(out[t.j as usize], c, m);
            }
        }
        out
    }

    /// Equations of `{x : T(x, y, .) = 0}`: one row per z coordinate.
    fn y_contraction_equations(&self, f: &Field, y: &Vec8) -> Vec<Vec8> {
        let mut m = [ZERO_VEC; N];
        for (t, &c) in self.terms.iter().zip(&self.coefs) {
            let v = y[t.j as usize];
            if !v.is_zero() {
                let (i, k) = (t.i as usize, t.k as usize);
                m[k][i] = f.mul_add(m[k][i], c, v);
            }
        }
        m.to_vec()
    }

    /// Equations of `{x : T(x, ., z) = 0}`: one row per y coordinate.
    fn z_contraction_equations(&self, f: &Field, z: &Vec8) -> Vec<Vec8> {
        let mut m = [ZERO_VEC; N];
        for (t, &c) in self.terms.iter().zip(&self.coefs) {
            let v = z[t.k as usize];
            if !v.is_zero() {
                let (i, j) = (t.i as usize, t.j as usize);
                m[j][i] = f.mul_add(m[j][i], c, v);
            }
        }
        m.to_vec()
    }
}

/// Direct evaluation of T from its defining expression, term by term as written.
/// Used to validate the sparse tensor.
pub fn trilinear_closed_form(f: &Field, x: &Vec8, y: &Vec8, z: &Vec8) -> Fe {
    let m = |a: Fe, b: Fe| f.mul(a, b);
    let m3 = |a: Fe, b: Fe, c: Fe| f.mul(f.mul(a, b), c);
    let det = |o: usize| {
        let pos = f.add(
            f.add(m3(x[o], y[o + 1], z[o + 2]), m3(x[o + 1], y[o + 2], z[o])),
            m3(x[o + 2], y[o], z[o + 1]),
        );
        let neg = f.add(
            f.add(m3(x[o], y[o + 2], z[o + 1]), m3(x[o + 1], y[o], z[o + 2])),
            m3(x[o + 2], y[o + 1], z[o]),
        );
        f.sub(pos, neg)
    };
    let cross = |a: &Vec8, b: &Vec8| f.add(f.add(m(a[0], b[4]), m(a[1], b[5])), m(a[2], b[6]));
    let mut s = f.add(det(0), det(4));
    s = f.add(s, m(x[3], cross(z, y)));
    s = f.add(s, m(x[7], cross(y, z)));
    s = f.add(s, m(y[3], cross(x, z)));
    s = f.add(s, m(y[7], cross(z, x)));
    s = f.add(s, m(z[3], cross(y, x)));
    s = f.add(s, m(z[7], cross(x, y)));
    s = f.sub(s, m3(x[3], y[3], z[3]));
    f.sub(s, m3(x[7], y[7], z[7]))
}

/// Which family an 8-tuple coordinatizes: points, 3-spaces or 3'-spaces of the quadric.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Zero,
    One,
    Two,
}

impl Role {
    pub fn next(self) -> Role {
        match self {
            Role::Zero => Role::One,
            Role::One => Role::Two,
            Role::Two => Role::Zero,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RolePoint {
    pub role: Role,
    pub coords: Vec8,
}

/// The triality `tau_sigma` on the quadric over a fixed field.
#[derive(Clone, Debug)]
pub struct Triality {
    field: Arc<Field>,
    tensor: TrilinearTensor,
}

impl Triality {
    pub fn new(field: Arc<Field>) -> Triality {
        let tensor = TrilinearTensor::new(&field);
        Triality { field, tensor }
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn tensor(&self) -> &TrilinearTensor {
        &self.tensor
    }

    pub fn trilinear(&self, x: &Vec8, y: &Vec8, z: &Vec8) -> Fe {
        self.tensor.eval(&self.field, x, y, z)
    }

    /// Coordinates through sigma, role advanced by one.
    pub fn tau_point(&self, x: &RolePoint) -> RolePoint {
        RolePoint {
            role: x.role.next(),
            coords: sigma_vec(&self.field, &x.coords),
        }
    }

    fn solid_from_equations(&self, eqs: &[Vec8], role: &'static str) -> Result<Subspace> {
        let f = &*self.field;
        match Subspace::from_equations(f, eqs)? {
            Some(s) if s.rank() == 4 => Ok(s),
            Some(s) => Err(Error::InvalidRolePoint {
                role,
                rank: N - s.rank(),
            }),
            None => Err(Error::InvalidRolePoint { role, rank: N }),
        }
    }

    /// The 3-space `{x : T(x, y, .) = 0}` of a 1-point `y`.
    pub fn onepoint_to_solid(&self, y: &Vec8) -> Result<Subspace> {
        if is_zero(y) {
            return Err(Error::domain("zero 1-point"));
        }
        let eqs = self.tensor.y_contraction_equations(&self.field, y);
        self.solid_from_equations(&eqs, "1-point")
    }

    /// The 3'-space `{x : T(x, ., z) = 0}` of a 2-point `z`.
    pub fn twopoint_to_solid(&self, z: &Vec8) -> Result<Subspace> {
        if is_zero(z) {
            return Err(Error::domain("zero 2-point"));
        }
        let eqs = self.tensor.z_contraction_equations(&self.field, z);
        self.solid_from_equations(&eqs, "2-point")
    }

    /// Solid coordinatized by a role-tagged point of role 1 or 2.
    pub fn role_solid(&self, x: &RolePoint) -> Result<Subspace> {
        match x.role {
            Role::One => self.onepoint_to_solid(&x.coords),
            Role::Two => self.twopoint_to_solid(&x.coords),
            Role::Zero => Err(Error::domain("a 0-point is not a solid")),
        }
    }

    /// `x^tau`: the 3-space of the 1-point `x^sigma`.
    pub fn tau_solid(&self, x: &Vec8) -> Result<Subspace> {
        self.onepoint_to_solid(&sigma_vec(&self.field, x))
    }

    /// `x^(tau^2)`: the 3'-space of the 2-point `x^(sigma^2)`.
    pub fn tau2_solid(&self, x: &Vec8) -> Result<Subspace> {
        let f = &*self.field;
        self.twopoint_to_solid(&sigma_vec(f, &sigma_vec(f, x)))
    }

    /// `T(x, x^sigma, .) = 0`, without the quadric precondition.
    #[inline]
    pub(crate) fn is_absolute_vec(&self, x: &Vec8) -> bool {
        let f = &*self.field;
        is_zero(&self.tensor.contract_xy(f, x, &sigma_vec(f, x)))
    }

    /// `x' in x^tau`, i.e. `T(x', x^sigma, .) = 0`.
    #[inline]
    pub(crate) fn in_tau_solid(&self, x: &Vec8, x_prime: &Vec8) -> bool {
        let f = &*self.field;
        is_zero(&self.tensor.contract_xy(f, x_prime, &sigma_vec(f, x)))
    }

    pub fn is_absolute_point(&self, x: &ProjPoint) -> Result<bool> {
        if !on_quadric(&self.field, x.coords()) {
            return Err(Error::domain(
                "absoluteness is defined for points of the quadric",
            ));
        }
        Ok(self.is_absolute_vec(x.coords()))
    }

    /// A line is absolute iff it is spanned by two absolute points each in the other's tau-solid.
    pub fn is_absolute_line(&self, line: &Subspace) -> Result<bool> {
        if line.rank() != 2 {
            return Err(Error::domain("expected a line"));
        }
        let f = &*self.field;
        let (p, r) = (&line.rows()[0], &line.rows()[1]);
        if !(on_quadric(f, p) && on_quadric(f, r)) || !bilinear(f, p, r).is_zero() {
            return Ok(false);
        }
        Ok(self.is_absolute_vec(p) && self.is_absolute_vec(r) && self.in_tau_solid(p, r))
    }

    /// `L^tau` for a line of the quadric: the intersection of the tau-solids of two of its points.
    pub fn induced_line_image(&self, line: &Subspace) -> Result<Subspace> {
        if line.rank() != 2 {
            return Err(Error::domain("expected a line"));
        }
        let (p, r) = (&line.rows()[0], &line.rows()[1]);
        self.induced_line_image_from(p, r)
    }

    pub fn induced_line_image_from(&self, p: &Vec8, r: &Vec8) -> Result<Subspace> {
        let a = self.tau_solid(p)?;
        let b = self.tau_solid(r)?;
        match a.intersect(&self.field, &b) {
            Some(m) if m.rank() == 2 => Ok(m),
            Some(m) => Err(Error::Inconsistency(format!(
                "tau-solids meet in dimension {}, not in a line",
                m.dim()
            ))),
            None => Err(Error::Inconsistency("tau-solids are disjoint".into())),
        }
    }

    /// `x^tau ∩ x^(tau^2)`, the plane holding every absolute line through `x`.
    pub fn absolute_plane(&self, x: &ProjPoint) -> Result<Subspace> {
        if !self.is_absolute_point(x)? {
            return Err(Error::domain("absolute_plane needs an absolute point"));
        }
        let a = self.tau_solid(x.coords())?;
        let b = self.tau2_solid(x.coords())?;
        match a.intersect(&self.field, &b) {
            Some(p) if p.rank() == 3 => Ok(p),
            other => Err(Error::Inconsistency(format!(
                "tau- and tau^2-solids meet in dimension {:?}",
                other.map(|s| s.dim() as i64).unwrap_or(-1)
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projspace::{unit, Subspace};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tri(q: u32) -> Triality {
        Triality::new(Arc::new(Field::twisted(q).unwrap()))
    }

    fn random_vec(f: &Field, rng: &mut ChaCha8Rng) -> Vec8 {
        let mut v = ZERO_VEC;
        for x in v.iter_mut() {
            *x = Fe(rng.gen_range(0..f.order() as u16));
        }
        v
    }

    fn vec_from(entries: &[(usize, Fe)]) -> Vec8 {
        let mut v = ZERO_VEC;
        for &(i, x) in entries {
            v[i] = x;
        }
        v
    }

    #[test]
    fn quadric_and_polar_basics() {
        let f = Field::twisted(2).unwrap();
        assert!(on_quadric(&f, &unit(0)));
        let v = vec_from(&[(0, Fe::ONE), (4, Fe::ONE)]);
        assert_eq!(qform(&f, &v), Fe::ONE);
        let h = polar_point(&f, &ProjPoint::unit(0));
        assert_eq!(h, Subspace::hyperplane(&f, &unit(4)).unwrap());
    }

    #[test]
    fn bilinear_polarizes_the_quadric() {
        for q in [2, 3] {
            let f = Field::twisted(q).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            for _ in 0..2000 {
                let x = random_vec(&f, &mut rng);
                let y = random_vec(&f, &mut rng);
                let mut s = x;
                for i in 0..N {
                    s[i] = f.add(x[i], y[i]);
                }
                let lhs = f.sub(f.sub(qform(&f, &s), qform(&f, &x)), qform(&f, &y));
                assert_eq!(lhs, bilinear(&f, &x, &y));
            }
        }
    }

    #[test]
    fn line_classes() {
        let f = Field::twisted(2).unwrap();
        let l04 = Subspace::from_vectors(&f, &[unit(0), unit(4)]).unwrap();
        assert_eq!(line_quadric_class(&f, &l04).unwrap(), QuadricClass::Two);
        let l01 = Subspace::from_vectors(&f, &[unit(0), unit(1)]).unwrap();
        assert_eq!(line_quadric_class(&f, &l01).unwrap(), QuadricClass::All);
        // a sweep of lines through the off-quadric point finds a class 0 or 1 line
        let off = vec_from(&[(0, Fe::ONE), (4, Fe::ONE)]);
        let mut seen = Vec::new();
        for j in 1..N {
            let l = Subspace::from_vectors(&f, &[off, unit(j)]).unwrap();
            seen.push(line_quadric_class(&f, &l).unwrap());
        }
        assert!(seen.contains(&QuadricClass::One) || seen.contains(&QuadricClass::Zero));
        let pt = Subspace::from_vectors(&f, &[unit(0)]).unwrap();
        assert!(line_quadric_class(&f, &pt).is_err());
    }

    #[test]
    fn zero_and_one_point_witness_lines() {
        // e0+e4 (Q = 1) with e1+e5 (Q = 1): points (1, t) get Q = 1 + t^2, zero once in char 2
        let f = Field::twisted(2).unwrap();
        let a = vec_from(&[(0, Fe::ONE), (4, Fe::ONE)]);
        let b = vec_from(&[(1, Fe::ONE), (5, Fe::ONE)]);
        let l = Subspace::from_vectors(&f, &[a, b]).unwrap();
        assert_eq!(line_quadric_class(&f, &l).unwrap(), QuadricClass::One);
        // over GF(27): points a + t b have Q = 1 + t^2, which is never 0 since -1 is a non-square
        let f3 = Field::twisted(3).unwrap();
        let l3 = Subspace::from_vectors(&f3, &[a, b]).unwrap();
        assert_eq!(line_quadric_class(&f3, &l3).unwrap(), QuadricClass::Zero);
    }

    #[test]
    fn sparse_tensor_matches_closed_form() {
        for q in [2, 3, 4] {
            let t = tri(q);
            let f = t.field().clone();
            let mut rng = ChaCha8Rng::seed_from_u64(q as u64);
            for _ in 0..5000 {
                let x = random_vec(&f, &mut rng);
                let y = random_vec(&f, &mut rng);
                let z = random_vec(&f, &mut rng);
                assert_eq!(
                    t.trilinear(&x, &y, &z),
                    trilinear_closed_form(&f, &x, &y, &z)
                );
            }
        }
        assert_eq!(tri(2).tensor().terms().len(), 32);
    }

    #[test]
    fn trilinear_at_e0_vanishes() {
        let t = tri(2);
        assert_eq!(t.trilinear(&unit(0), &unit(0), &unit(0)), Fe::ZERO);
    }

    #[test]
    fn contraction_with_a_sample_onepoint() {
        // T(x, (1,0,0,0,0,0,a,0), z) = x2 z1 + (a x3 - x1) z2 + x4 z3 + (x7 + a x5) z4 - a x4 z5 + a x2 z7
        for q in [2, 3] {
            let t = tri(q);
            let f = t.field().clone();
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            for a in f.elements() {
                let y = vec_from(&[(0, Fe::ONE), (6, a)]);
                for _ in 0..50 {
                    let x = random_vec(&f, &mut rng);
                    let z = random_vec(&f, &mut rng);
                    let mut e = f.mul(x[2], z[1]);
                    e = f.add(e, f.mul(f.sub(f.mul(a, x[3]), x[1]), z[2]));
                    e = f.add(e, f.mul(x[4], z[3]));
                    e = f.add(e, f.mul(f.add(x[7], f.mul(a, x[5])), z[4]));
                    e = f.sub(e, f.mul(f.mul(a, x[4]), z[5]));
                    e = f.add(e, f.mul(f.mul(a, x[2]), z[7]));
                    assert_eq!(t.trilinear(&x, &y, &z), e);
                }
            }
        }
    }

    #[test]
    fn onepoint_solid_matches_hand_equations() {
        for q in [2, 3] {
            let t = tri(q);
            let f = t.field().clone();
            for a in f.elements() {
                let y = vec_from(&[(0, Fe::ONE), (6, a)]);
                let solid = t.onepoint_to_solid(&y).unwrap();
                let expected = Subspace::from_equations(
                    &f,
                    &[
                        unit(2),
                        vec_from(&[(1, Fe::ONE), (3, f.neg(a))]),
                        unit(4),
                        vec_from(&[(7, Fe::ONE), (5, a)]),
                    ],
                )
                .unwrap()
                .unwrap();
                assert_eq!(solid, expected);
            }
        }
    }

    #[test]
    fn e0_solid_and_absoluteness_pattern() {
        let t = tri(2);
        let f = t.field().clone();
        let solid = t.onepoint_to_solid(&unit(0)).unwrap();
        let expected = Subspace::from_equations(&f, &[unit(1), unit(2), unit(4), unit(7)])
            .unwrap()
            .unwrap();
        assert_eq!(solid, expected);
        for i in 0..N {
            let abs = t.is_absolute_point(&ProjPoint::unit(i)).unwrap();
            assert_eq!(abs, !matches!(i, 3 | 7), "e{i}");
        }
        let z = t.twopoint_to_solid(&unit(0)).unwrap();
        assert!(z.contains(&f, &ProjPoint::unit(0)));
    }

    #[test]
    fn e3_is_not_absolute() {
        let t = tri(2);
        assert!(!t.is_absolute_point(&ProjPoint::unit(3)).unwrap());
        let off = ProjPoint::new(t.field(), vec_from(&[(0, Fe::ONE), (4, Fe::ONE)])).unwrap();
        assert!(t.is_absolute_point(&off).is_err());
    }

    #[test]
    fn coordinate_hexagon_sides_are_absolute() {
        let t = tri(2);
        let f = t.field().clone();
        let cycle = [0, 6, 1, 4, 2, 5];
        for w in 0..6 {
            let (a, b) = (cycle[w], cycle[(w + 1) % 6]);
            let l = Subspace::from_vectors(&f, &[unit(a), unit(b)]).unwrap();
            assert!(t.is_absolute_line(&l).unwrap(), "e{a}e{b}");
            assert_eq!(t.induced_line_image(&l).unwrap(), l);
        }
        let l04 = Subspace::from_vectors(&f, &[unit(0), unit(4)]).unwrap();
        assert!(!t.is_absolute_line(&l04).unwrap());
    }

    #[test]
    fn tau_point_cycles() {
        let t = tri(2);
        let f = t.field().clone();
        let e0 = RolePoint {
            role: Role::Zero,
            coords: unit(0),
        };
        let img = t.tau_point(&e0);
        assert_eq!(img.role, Role::One);
        assert_eq!(img.coords, unit(0));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let x = RolePoint {
                role: Role::Zero,
                coords: random_vec(&f, &mut rng),
            };
            assert_eq!(t.tau_point(&t.tau_point(&t.tau_point(&x))), x);
        }
        for a in f.elements() {
            let x = RolePoint {
                role: Role::Zero,
                coords: vec_from(&[(0, Fe::ONE), (6, a)]),
            };
            assert_eq!(
                t.tau_point(&x).coords,
                vec_from(&[(0, Fe::ONE), (6, f.sigma(a))])
            );
        }
    }

    #[test]
    fn absolute_plane_examples() {
        for q in [2, 3] {
            let t = tri(q);
            let f = t.field().clone();
            let e0_plane = t.absolute_plane(&ProjPoint::unit(0)).unwrap();
            assert_eq!(
                e0_plane,
                Subspace::from_vectors(&f, &[unit(0), unit(5), unit(6)]).unwrap()
            );
            for a in f.elements() {
                let x = ProjPoint::new(&f, vec_from(&[(0, Fe::ONE), (6, a)])).unwrap();
                let plane = t.absolute_plane(&x).unwrap();
                let (s, s2) = (f.sigma(a), f.sigma_pow(a, 2));
                let expected = Subspace::from_equations(
                    &f,
                    &[
                        unit(2),
                        unit(4),
                        vec_from(&[(1, Fe::ONE), (3, f.neg(s))]),
                        vec_from(&[(1, Fe::ONE), (7, s2)]),
                        vec_from(&[(7, Fe::ONE), (5, s)]),
                        vec_from(&[(3, Fe::ONE), (5, f.neg(s2))]),
                    ],
                )
                .unwrap()
                .unwrap();
                assert_eq!(plane, expected, "a = {a}");
            }
            assert!(t.absolute_plane(&ProjPoint::unit(3)).is_err());
        }
    }

    #[test]
    fn induced_line_map_has_order_three_on_quadric_lines() {
        let t = tri(2);
        let f = t.field().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut checked = 0;
        while checked < 100 {
            let p = random_vec(&f, &mut rng);
            let r = random_vec(&f, &mut rng);
            if !on_quadric(&f, &p) || !on_quadric(&f, &r) || !bilinear(&f, &p, &r).is_zero() {
                continue;
            }
            let Ok(l) = Subspace::from_vectors(&f, &[p, r]) else {
                continue;
            };
            if l.rank() != 2 {
                continue;
            }
            let m = t.induced_line_image(&l).unwrap();
            // independent of the generating pair
            let pts: Vec<ProjPoint> = l.points(&f).collect();
            for w in pts.windows(2).take(4) {
                assert_eq!(
                    t.induced_line_image_from(w[0].coords(), w[1].coords())
                        .unwrap(),
                    m
                );
            }
            let back = t
                .induced_line_image(&t.induced_line_image(&m).unwrap())
                .unwrap();
            assert_eq!(back, l);
            checked += 1;
        }
    }
}
