//! Incidence structures of points and lines in PG(7, K): the twisted triality
//! hexagon T(q^3, q), the split Cayley hexagon H(q), and arbitrary line sets.
//!
//! Points are indexed in lexicographic order of their normalized coordinates
//! and lines in order of their canonical forms, so every index is reproducible.
//! The incidence graph has the points as vertices `0..P` followed by the lines
//! as vertices `P..P+L`.

use std::borrow::Cow;
use std::collections::VecDeque;
use std::ops::Deref;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Fe, Field, FieldSpec, Mode};
use crate::forms::{on_quadric, Triality};
use crate::projspace::{axpy, normalize, unit, ProjPoint, Subspace, Vec8};

/// Compressed adjacency rows.
#[derive(Clone, Debug, Default)]
struct Csr {
    off: Vec<u32>,
    val: Vec<u32>,
}

impl Csr {
    fn from_rows(rows: &[Vec<u32>]) -> Csr {
        let mut off = Vec::with_capacity(rows.len() + 1);
        let mut val = Vec::with_capacity(rows.iter().map(Vec::len).sum());
        off.push(0);
        for r in rows {
            val.extend_from_slice(r);
            off.push(val.len() as u32);
        }
        Csr { off, val }
    }

    #[inline]
    fn row(&self, i: usize) -> &[u32] {
        &self.val[self.off[i] as usize..self.off[i + 1] as usize]
    }
}

/// A point or a line of an incidence structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", content = "id", rename_all = "lowercase")]
pub enum Elem {
    Point(u32),
    Line(u32),
}

/// Distance value for unreachable pairs.
pub const UNREACHABLE: u8 = u8::MAX;

/// Points and lines of PG(7, K) with their incidence. No axioms are assumed.
#[derive(Clone, Debug)]
pub struct Geometry {
    field: Arc<Field>,
    points: Vec<ProjPoint>,
    lines: Vec<Subspace>,
    line_points: Csr,
    point_lines: Csr,
    index: FxHashMap<Vec8, u32>,
}

impl Geometry {
    /// The structure whose points are all points on at least one of the given lines.
    pub fn from_lines(field: Arc<Field>, mut lines: Vec<Subspace>) -> Result<Geometry> {
        if let Some(bad) = lines.iter().find(|l| l.rank() != 2) {
            return Err(Error::domain(format!(
                "expected lines, got a subspace of dimension {}",
                bad.dim()
            )));
        }
        lines.sort_unstable();
        if lines.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::domain("duplicate line in line set"));
        }
        let f = &*field;
        let mut incid: Vec<(ProjPoint, u32)> = Vec::with_capacity(lines.len() * (f.order() + 1));
        for (li, l) in lines.iter().enumerate() {
            incid.extend(l.points(f).map(|p| (p, li as u32)));
        }
        incid.sort_unstable();
        let mut points: Vec<ProjPoint> = incid.iter().map(|(p, _)| *p).collect();
        points.dedup();
        let mut index = FxHashMap::default();
        index.reserve(points.len());
        for (i, p) in points.iter().enumerate() {
            index.insert(*p.coords(), i as u32);
        }
        let mut point_rows = vec![Vec::new(); points.len()];
        let mut line_rows = vec![Vec::new(); lines.len()];
        for (p, l) in &incid {
            let pi = index[p.coords()];
            point_rows[pi as usize].push(*l);
            line_rows[*l as usize].push(pi);
        }
        for r in &mut line_rows {
            r.sort_unstable();
        }
        Ok(Geometry {
            field,
            points,
            lines,
            line_points: Csr::from_rows(&line_rows),
            point_lines: Csr::from_rows(&point_rows),
            index,
        })
    }

    /// Substructure on the given points and lines, with incidence restricted to them.
    /// Ids in the result follow the order of the parent.
    pub fn restrict(&self, point_ids: &[u32], line_ids: &[u32]) -> Geometry {
        let mut pts: Vec<u32> = point_ids.to_vec();
        pts.sort_unstable();
        pts.dedup();
        let mut lns: Vec<u32> = line_ids.to_vec();
        lns.sort_unstable();
        lns.dedup();
        let new_pt: FxHashMap<u32, u32> = pts
            .iter()
            .enumerate()
            .map(|(i, &p)| (p, i as u32))
            .collect();
        let new_ln: FxHashMap<u32, u32> = lns
            .iter()
            .enumerate()
            .map(|(i, &l)| (l, i as u32))
            .collect();
        let line_rows: Vec<Vec<u32>> = lns
            .iter()
            .map(|&l| {
                self.points_on(l)
                    .iter()
                    .filter_map(|p| new_pt.get(p).copied())
                    .collect()
            })
            .collect();
        let point_rows: Vec<Vec<u32>> = pts
            .iter()
            .map(|&p| {
                self.lines_through(p)
                    .iter()
                    .filter_map(|l| new_ln.get(l).copied())
                    .collect()
            })
            .collect();
        let points: Vec<ProjPoint> = pts.iter().map(|&p| self.points[p as usize]).collect();
        let index = points
            .iter()
            .enumerate()
            .map(|(i, p)| (*p.coords(), i as u32))
            .collect();
        Geometry {
            field: self.field.clone(),
            points,
            lines: lns.iter().map(|&l| self.lines[l as usize]).collect(),
            line_points: Csr::from_rows(&line_rows),
            point_lines: Csr::from_rows(&point_rows),
            index,
        }
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    pub fn num_lines(&self) -> usize {
        self.lines.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.points.len() + self.lines.len()
    }

    pub fn points(&self) -> &[ProjPoint] {
        &self.points
    }

    pub fn lines(&self) -> &[Subspace] {
        &self.lines
    }

    pub fn point(&self, id: u32) -> &ProjPoint {
        &self.points[id as usize]
    }

    pub fn line(&self, id: u32) -> &Subspace {
        &self.lines[id as usize]
    }

    /// Point ids on a line, ascending.
    pub fn points_on(&self, line: u32) -> &[u32] {
        self.line_points.row(line as usize)
    }

    /// Line ids through a point, ascending.
    pub fn lines_through(&self, point: u32) -> &[u32] {
        self.point_lines.row(point as usize)
    }

    /// Id of a point given by (not necessarily normalized) coordinates.
    pub fn point_id(&self, v: &Vec8) -> Option<u32> {
        let n = normalize(&self.field, v)?;
        self.index.get(&n).copied()
    }

    pub fn line_id(&self, l: &Subspace) -> Option<u32> {
        self.lines.binary_search(l).ok().map(|i| i as u32)
    }

    pub fn vertex(&self, e: Elem) -> usize {
        match e {
            Elem::Point(p) => p as usize,
            Elem::Line(l) => self.points.len() + l as usize,
        }
    }

    pub fn elem(&self, v: usize) -> Elem {
        if v < self.points.len() {
            Elem::Point(v as u32)
        } else {
            Elem::Line((v - self.points.len()) as u32)
        }
    }

    /// Neighbours of a vertex of the incidence graph, as vertex ids.
    pub fn neighbours(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        let np = self.points.len();
        let (row, shift) = if v < np {
            (self.point_lines.row(v), np)
        } else {
            (self.line_points.row(v - np), 0)
        };
        row.iter().map(move |&u| u as usize + shift)
    }

    /// Breadth-first distances from `source` into `out`, `UNREACHABLE` where disconnected.
    pub fn bfs_into(&self, source: usize, out: &mut [u8]) {
        out.fill(UNREACHABLE);
        out[source] = 0;
        let mut queue = VecDeque::with_capacity(64);
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let d = out[u];
            if d == UNREACHABLE - 1 {
                continue;
            }
            for w in self.neighbours(u) {
                if out[w] == UNREACHABLE {
                    out[w] = d + 1;
                    queue.push_back(w);
                }
            }
        }
    }

    pub fn bfs(&self, source: usize) -> Vec<u8> {
        let mut out = vec![0u8; self.num_vertices()];
        self.bfs_into(source, &mut out);
        out
    }

    /// `(s, t)` when every line has `s+1` points and every point `t+1` lines.
    pub fn order(&self) -> Option<(u64, u64)> {
        let line_deg = uniform((0..self.num_lines()).map(|l| self.points_on(l as u32).len()))?;
        let point_deg =
            uniform((0..self.num_points()).map(|p| self.lines_through(p as u32).len()))?;
        if line_deg == 0 || point_deg == 0 {
            return None;
        }
        Some((line_deg as u64 - 1, point_deg as u64 - 1))
    }

    /// Histograms of points-per-line and lines-per-point.
    pub fn degree_census(&self) -> DegreeCensus {
        let mut per_line = std::collections::BTreeMap::new();
        let mut per_point = std::collections::BTreeMap::new();
        for l in 0..self.num_lines() {
            *per_line
                .entry(self.points_on(l as u32).len())
                .or_insert(0usize) += 1;
        }
        for p in 0..self.num_points() {
            *per_point
                .entry(self.lines_through(p as u32).len())
                .or_insert(0usize) += 1;
        }
        DegreeCensus {
            points_per_line: per_line,
            lines_per_point: per_point,
        }
    }

    /// Exact girth and diameter of the incidence graph. Girth is `None` for a forest,
    /// diameter `None` when the graph is disconnected or empty.
    pub fn girth_and_diameter(&self) -> (Option<u32>, Option<u32>) {
        let n = self.num_vertices();
        if n == 0 {
            return (None, None);
        }
        let per_source: Vec<(u32, u32)> = (0..n)
            .into_par_iter()
            .map(|s| {
                let mut dist = vec![u32::MAX; n];
                let mut parent = vec![usize::MAX; n];
                let mut queue = VecDeque::new();
                dist[s] = 0;
                queue.push_back(s);
                let mut girth = u32::MAX;
                let mut ecc = 0;
                while let Some(u) = queue.pop_front() {
                    ecc = ecc.max(dist[u]);
                    for w in self.neighbours(u) {
                        if dist[w] == u32::MAX {
                            dist[w] = dist[u] + 1;
                            parent[w] = u;
                            queue.push_back(w);
                        } else if parent[u] != w {
                            girth = girth.min(dist[u] + dist[w] + 1);
                        }
                    }
                }
                let reached = dist.iter().all(|&d| d != u32::MAX);
                (girth, if reached { ecc } else { u32::MAX })
            })
            .collect();
        let girth = per_source
            .iter()
            .map(|p| p.0)
            .min()
            .filter(|&g| g != u32::MAX);
        let diameter = per_source
            .iter()
            .map(|p| p.1)
            .max()
            .filter(|&d| d != u32::MAX);
        (girth, diameter)
    }
}

fn uniform(mut it: impl Iterator<Item = usize>) -> Option<usize> {
    let first = it.next()?;
    it.all(|d| d == first).then_some(first)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeCensus {
    pub points_per_line: std::collections::BTreeMap<usize, usize>,
    pub lines_per_point: std::collections::BTreeMap<usize, usize>,
}

/// Number of points and lines of a generalized hexagon of order (s, t).
pub fn hexagon_counts(s: u64, t: u64) -> (u64, u64) {
    let core = 1 + s * t + s * s * t * t;
    ((1 + s) * core, (1 + t) * core)
}

/// A geometry of uniform order (s, t) with the generalized hexagon element counts.
#[derive(Clone, Debug)]
pub struct Hexagon {
    geom: Geometry,
    s: u64,
    t: u64,
    mode: Mode,
}

impl Deref for Hexagon {
    type Target = Geometry;

    fn deref(&self) -> &Geometry {
        &self.geom
    }
}

impl Hexagon {
    /// Builds T(q^3, q) or H(q) according to the mode of the field spec.
    pub fn build(spec: &FieldSpec) -> Result<Hexagon> {
        match spec.mode() {
            Mode::Twisted => build_twisted_triality(spec),
            Mode::SplitCayley => build_split_cayley(spec),
        }
    }

    /// Wraps a geometry after checking uniform order and the hexagon counts.
    pub fn from_geometry(geom: Geometry, mode: Mode) -> Result<Hexagon> {
        let (s, t) = geom
            .order()
            .ok_or_else(|| Error::NotAHexagon("order is not uniform".into()))?;
        let (np, nl) = hexagon_counts(s, t);
        if geom.num_points() as u64 != np || geom.num_lines() as u64 != nl {
            return Err(Error::NotAHexagon(format!(
                "order ({s},{t}) needs {np} points and {nl} lines, found {} and {}",
                geom.num_points(),
                geom.num_lines()
            )));
        }
        Ok(Hexagon { geom, s, t, mode })
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geom
    }

    pub fn into_geometry(self) -> Geometry {
        self.geom
    }

    pub fn order(&self) -> (u64, u64) {
        (self.s, self.t)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// The hexagon parameter q (the order of the sigma-fixed subfield).
    pub fn q(&self) -> u32 {
        self.geom.field.q()
    }

    /// Confirms by a scan of every point of PG(7, K) that the absolute points are
    /// exactly the points found by the closure. Feasible for |K| <= 8.
    pub fn validate_by_quadric_scan(&self) -> Result<QuadricScan> {
        let f = self.geom.field.clone();
        let tri = Triality::new(f.clone());
        let mut scan = QuadricScan::default();
        for p in Subspace::whole().points(&f) {
            scan.ambient_points += 1;
            if !on_quadric(&f, p.coords()) {
                continue;
            }
            scan.quadric_points += 1;
            if tri.is_absolute_vec(p.coords()) {
                scan.absolute_points += 1;
                if self.geom.point_id(p.coords()).is_none() {
                    return Err(Error::ConstructionFault(format!(
                        "absolute point {p:?} missed by the closure"
                    )));
                }
            }
        }
        if scan.absolute_points != self.geom.num_points() as u64 {
            return Err(Error::ConstructionFault(format!(
                "scan found {} absolute points, closure {}",
                scan.absolute_points,
                self.geom.num_points()
            )));
        }
        Ok(scan)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct QuadricScan {
    pub ambient_points: u64,
    pub quadric_points: u64,
    pub absolute_points: u64,
}

/// T(q^3, q) as the absolute points and lines of `tau_sigma`, found by closure from e0.
pub fn build_twisted_triality(spec: &FieldSpec) -> Result<Hexagon> {
    if spec.mode() != Mode::Twisted {
        return Err(Error::domain(
            "twisted triality hexagon needs a twisted field spec",
        ));
    }
    build_by_closure(spec, Mode::Twisted)
}

/// H(q) as the absolute geometry of the triality with sigma = 1.
pub fn build_split_cayley(spec: &FieldSpec) -> Result<Hexagon> {
    if spec.mode() != Mode::SplitCayley {
        return Err(Error::domain(
            "split Cayley hexagon needs a split Cayley field spec",
        ));
    }
    build_by_closure(spec, Mode::SplitCayley)
}

fn build_by_closure(spec: &FieldSpec, mode: Mode) -> Result<Hexagon> {
    let field = Arc::new(Field::new(spec.clone()));
    let f = &*field;
    let tri = Triality::new(field.clone());
    let t_expected = f.q() as usize;

    let mut seen: FxHashSet<Vec8> = FxHashSet::default();
    let mut lines: FxHashSet<Subspace> = FxHashSet::default();
    let mut queue: VecDeque<Vec8> = VecDeque::new();
    seen.insert(unit(0));
    queue.push_back(unit(0));
    while let Some(x) = queue.pop_front() {
        let xp = ProjPoint::from_normalized(x);
        let plane = tri
            .absolute_plane(&xp)
            .map_err(|e| Error::ConstructionFault(format!("absolute plane of {xp:?}: {e}")))?;
        // the lines through x in the plane are x + <u, v> for a complement <u, v>
        let comp: Vec<Vec8> = complement_in(f, &plane, &x);
        let mut found = 0;
        for w in line_points_affine(f, &comp[0], &comp[1]) {
            if !tri.is_absolute_vec(&w) {
                continue;
            }
            found += 1;
            let l = Subspace::from_vectors(f, &[x, w]).expect("distinct points");
            if lines.insert(l) {
                for p in l.points(f) {
                    if seen.insert(*p.coords()) {
                        queue.push_back(*p.coords());
                    }
                }
            }
        }
        if found != t_expected + 1 {
            return Err(Error::ConstructionFault(format!(
                "point {xp:?} lies on {found} absolute lines, expected {}",
                t_expected + 1
            )));
        }
    }
    let geom = Geometry::from_lines(field.clone(), lines.into_iter().collect())?;
    let s = f.order() as u64;
    let t = t_expected as u64;
    let (np, nl) = hexagon_counts(s, t);
    if geom.num_points() as u64 != np || geom.num_lines() as u64 != nl {
        return Err(Error::ConstructionFault(format!(
            "closure reached {} points and {} lines, expected {np} and {nl}",
            geom.num_points(),
            geom.num_lines()
        )));
    }
    Hexagon::from_geometry(geom, mode).map_err(|e| Error::ConstructionFault(e.to_string()))
}

/// Two rows completing `x` to a basis of the rank-3 space `plane`.
fn complement_in(f: &Field, plane: &Subspace, x: &Vec8) -> Vec<Vec8> {
    let rows = plane.rows();
    let mut basis = vec![*x];
    for r in rows {
        let s = Subspace::from_vectors(f, &basis).unwrap();
        if !s.contains_vec(f, r) {
            basis.push(*r);
        }
    }
    basis.split_off(1)
}

/// The `|K|+1` points of the projective line `<u, v>`, as raw vectors.
fn line_points_affine<'a>(
    f: &'a Field,
    u: &'a Vec8,
    v: &'a Vec8,
) -> impl Iterator<Item = Vec8> + 'a {
    std::iter::once(*v).chain(f.elements().map(move |c: Fe| axpy(f, u, c, v)))
}

/// Graph distances of an incidence structure: a full table for small graphs,
/// breadth-first search on demand otherwise.
pub struct DistanceOracle<'g> {
    geom: &'g Geometry,
    table: Option<Vec<u8>>,
}

/// Largest vertex count for which all-pairs distances are tabulated.
pub const TABLE_LIMIT: usize = 8192;

impl<'g> DistanceOracle<'g> {
    pub fn new(geom: &'g Geometry) -> DistanceOracle<'g> {
        let n = geom.num_vertices();
        let table = (n <= TABLE_LIMIT && n > 0).then(|| {
            let mut t = vec![0u8; n * n];
            t.par_chunks_mut(n)
                .enumerate()
                .for_each(|(v, row)| geom.bfs_into(v, row));
            t
        });
        DistanceOracle { geom, table }
    }

    /// An oracle that never tabulates.
    pub fn on_demand(geom: &'g Geometry) -> DistanceOracle<'g> {
        DistanceOracle { geom, table: None }
    }

    pub fn geometry(&self) -> &'g Geometry {
        self.geom
    }

    pub fn is_tabulated(&self) -> bool {
        self.table.is_some()
    }

    /// All distances from one vertex.
    pub fn row(&self, v: usize) -> Cow<'_, [u8]> {
        let n = self.geom.num_vertices();
        match &self.table {
            Some(t) => Cow::Borrowed(&t[v * n..(v + 1) * n]),
            None => Cow::Owned(self.geom.bfs(v)),
        }
    }

    pub fn row_of(&self, e: Elem) -> Cow<'_, [u8]> {
        self.row(self.geom.vertex(e))
    }

    pub fn distance(&self, a: Elem, b: Elem) -> u8 {
        let (va, vb) = (self.geom.vertex(a), self.geom.vertex(b));
        match &self.table {
            Some(t) => t[va * self.geom.num_vertices() + vb],
            None => self.geom.bfs(va)[vb],
        }
    }

    /// The point of `line` closest to `x`.
    pub fn nearest_point_on_line(&self, x: u32, line: u32) -> Result<u32> {
        let row = self.row_of(Elem::Point(x));
        let mut best: Option<(u8, u32)> = None;
        let mut tie = false;
        for &p in self.geom.points_on(line) {
            let d = row[p as usize];
            match best {
                None => best = Some((d, p)),
                Some((bd, _)) if d < bd => {
                    best = Some((d, p));
                    tie = false
                }
                Some((bd, _)) if d == bd => tie = true,
                _ => {}
            }
        }
        let (_, p) = best.ok_or_else(|| Error::domain("line without points"))?;
        if tie {
            return Err(Error::NotAHexagon(format!(
                "two points of line {line} are equally close to point {x}"
            )));
        }
        Ok(p)
    }

    /// The unique point collinear with both `x` and `y`, for points at distance 4.
    pub fn meet(&self, x: u32, y: u32) -> Result<u32> {
        let ry = self.row_of(Elem::Point(y));
        let np = self.geom.num_points();
        if ry[x as usize] != 4 {
            return Err(Error::domain(format!(
                "meet needs points at distance 4, got {}",
                ry[x as usize]
            )));
        }
        let mut found = Vec::new();
        for &l in self.geom.lines_through(x) {
            if ry[np + l as usize] == 3 {
                for &z in self.geom.points_on(l) {
                    if ry[z as usize] == 2 {
                        found.push(z);
                    }
                }
            }
        }
        match found.as_slice() {
            [z] => Ok(*z),
            _ => Err(Error::NotAHexagon(format!(
                "points {x} and {y} have {} common neighbours",
                found.len()
            ))),
        }
    }

    /// `P_3(L) ∩ P_3(M)` for opposite lines L and M, ascending.
    pub fn trace_lines(&self, l: u32, m: u32) -> Result<Vec<u32>> {
        let rm = self.row_of(Elem::Line(m));
        let np = self.geom.num_points();
        if rm[np + l as usize] != 6 {
            return Err(Error::domain("trace needs opposite lines"));
        }
        Ok(self.trace_with_row(l, &rm))
    }

    fn trace_with_row(&self, l: u32, rm: &[u8]) -> Vec<u32> {
        let mut out = Vec::new();
        for &x in self.geom.points_on(l) {
            for &n in self.geom.lines_through(x) {
                if n == l {
                    continue;
                }
                for &p in self.geom.points_on(n) {
                    if p != x && rm[p as usize] == 3 {
                        out.push(p);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// `L_3(x) ∩ L_3(y)` for opposite points x and y, ascending.
    pub fn trace_points(&self, x: u32, y: u32) -> Result<Vec<u32>> {
        let ry = self.row_of(Elem::Point(y));
        if ry[x as usize] != 6 {
            return Err(Error::domain("trace needs opposite points"));
        }
        Ok(self.point_trace_with_row(x, &ry))
    }

    fn point_trace_with_row(&self, x: u32, ry: &[u8]) -> Vec<u32> {
        let np = self.geom.num_points();
        let mut out = Vec::new();
        for &n in self.geom.lines_through(x) {
            for &p in self.geom.points_on(n) {
                if p == x {
                    continue;
                }
                for &k in self.geom.lines_through(p) {
                    if k != n && ry[np + k as usize] == 3 {
                        out.push(k);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Lines at distance 3 from every point of `T(L, M)`.
    pub fn regulus(&self, l: u32, m: u32) -> Result<Vec<u32>> {
        let trace = self.trace_lines(l, m)?;
        let np = self.geom.num_points();
        let trace_rows: Vec<Cow<'_, [u8]>> = trace[1..]
            .iter()
            .map(|&t| self.row_of(Elem::Point(t)))
            .collect();
        let x0 = trace[0];
        let mut out = Vec::new();
        for &n in self.geom.lines_through(x0) {
            for &p in self.geom.points_on(n) {
                if p == x0 {
                    continue;
                }
                for &k in self.geom.lines_through(p) {
                    if k != n && trace_rows.iter().all(|r| r[np + k as usize] == 3) {
                        out.push(k);
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// Counts of lines at each distance from `line`.
    pub fn line_distance_census(&self, line: u32) -> std::collections::BTreeMap<u8, usize> {
        let row = self.row_of(Elem::Line(line));
        let np = self.geom.num_points();
        let mut census = std::collections::BTreeMap::new();
        for (l, &d) in row[np..].iter().enumerate() {
            if l as u32 != line {
                *census.entry(d).or_insert(0) += 1;
            }
        }
        census
    }

    /// Distance-3-regularity of lines and points. `budget` limits the number of base
    /// elements examined per kind; they are then drawn with the given seed.
    pub fn distance3_regularity(&self, budget: Option<usize>, seed: u64) -> D3Report {
        let g = self.geom;
        let np = g.num_points();
        let mut line_bases: Vec<u32> = (0..g.num_lines() as u32).collect();
        let mut point_bases: Vec<u32> = (0..np as u32).collect();
        let exhaustive = budget.is_none_or(|b| b >= line_bases.len().max(point_bases.len()));
        if let (Some(b), false) = (budget, exhaustive) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            line_bases.shuffle(&mut rng);
            line_bases.truncate(b);
            line_bases.sort_unstable();
            point_bases.shuffle(&mut rng);
            point_bases.truncate(b);
            point_bases.sort_unstable();
        }
        let line_witness = line_bases.par_iter().find_map_first(|&l| {
            let rl = self.row_of(Elem::Line(l));
            let traces: Vec<(u32, Vec<u32>)> = (0..g.num_lines() as u32)
                .filter(|&m| rl[np + m as usize] == 6)
                .map(|m| (m, self.trace_with_row(l, &self.row_of(Elem::Line(m)))))
                .collect();
            first_trace_conflict(&traces).map(|(a, b, shared)| D3Witness {
                base: Elem::Line(l),
                first: Elem::Line(a),
                second: Elem::Line(b),
                shared: shared.into_iter().map(Elem::Point).collect(),
            })
        });
        let point_witness = if line_witness.is_some() {
            None
        } else {
            point_bases.par_iter().find_map_first(|&x| {
                let rx = self.row_of(Elem::Point(x));
                let traces: Vec<(u32, Vec<u32>)> = (0..np as u32)
                    .filter(|&y| rx[y as usize] == 6)
                    .map(|y| {
                        (
                            y,
                            self.point_trace_with_row(x, &self.row_of(Elem::Point(y))),
                        )
                    })
                    .collect();
                first_trace_conflict(&traces).map(|(a, b, shared)| D3Witness {
                    base: Elem::Point(x),
                    first: Elem::Point(a),
                    second: Elem::Point(b),
                    shared: shared.into_iter().map(Elem::Line).collect(),
                })
            })
        };
        let witness = line_witness.or(point_witness);
        D3Report {
            regular: witness.is_none(),
            exhaustive,
            lines_checked: line_bases.len(),
            points_checked: point_bases.len(),
            seed,
            witness,
        }
    }

    /// Lines of the structure meeting some line of `sub`: census of how many.
    pub fn blocking_checks(&self, sub: &[u32]) -> BlockingReport {
        blocking_checks(self.geom, sub)
    }
}

/// Two traces, given as `(partner, sorted points)`, that share at least two
/// elements without being equal.
pub fn first_trace_conflict(traces: &[(u32, Vec<u32>)]) -> Option<(u32, u32, Vec<u32>)> {
    let mut owner: FxHashMap<(u32, u32), usize> = FxHashMap::default();
    for (i, (_, tr)) in traces.iter().enumerate() {
        for a in 0..tr.len() {
            for b in a + 1..tr.len() {
                match owner.get(&(tr[a], tr[b])) {
                    Some(&j) if traces[j].1 != *tr => {
                        let other = &traces[j].1;
                        let shared: Vec<u32> = tr
                            .iter()
                            .filter(|x| other.binary_search(x).is_ok())
                            .copied()
                            .collect();
                        return Some((traces[j].0, traces[i].0, shared));
                    }
                    Some(_) => {}
                    None => {
                        owner.insert((tr[a], tr[b]), i);
                    }
                }
            }
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct D3Witness {
    pub base: Elem,
    pub first: Elem,
    pub second: Elem,
    pub shared: Vec<Elem>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct D3Report {
    pub regular: bool,
    pub exhaustive: bool,
    pub lines_checked: usize,
    pub points_checked: usize,
    pub seed: u64,
    pub witness: Option<D3Witness>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockingReport {
    pub total_lines: usize,
    pub blocked: usize,
    /// lines of the structure meeting none of the given lines (bounded)
    pub misses: Vec<u32>,
    /// number of given lines met, mapped to how many lines meet that many
    pub census: std::collections::BTreeMap<usize, usize>,
}

impl BlockingReport {
    pub fn blocks_all(&self) -> bool {
        self.blocked == self.total_lines
    }
}

const MAX_WITNESSES: usize = 16;

/// How many lines of `sub` each line of `geom` meets (a line meets itself).
pub fn blocking_checks(geom: &Geometry, sub: &[u32]) -> BlockingReport {
    let mut hits = vec![0usize; geom.num_lines()];
    for &s in sub {
        let mut met: FxHashSet<u32> = FxHashSet::default();
        for &p in geom.points_on(s) {
            met.extend(geom.lines_through(p).iter().copied());
        }
        for l in met {
            hits[l as usize] += 1;
        }
    }
    let mut census = std::collections::BTreeMap::new();
    let mut misses = Vec::new();
    let mut blocked = 0;
    for (l, &h) in hits.iter().enumerate() {
        *census.entry(h).or_insert(0) += 1;
        if h > 0 {
            blocked += 1;
        } else if misses.len() < MAX_WITNESSES {
            misses.push(l as u32);
        }
    }
    BlockingReport {
        total_lines: geom.num_lines(),
        blocked,
        misses,
        census,
    }
}

/// The split Cayley subhexagon of T(q^3, q): points and lines with coordinates in
/// the fixed subfield lying in the hyperplane `x3 + x7 = 0`.
pub fn extract_split_cayley(h: &Hexagon) -> Result<Hexagon> {
    let f = h.field().clone();
    let rational = |v: &Vec8| v.iter().all(|&c| f.in_fixed_subfield(c));
    let in_hyperplane = |v: &Vec8| f.add(v[3], v[7]).is_zero();
    let pts: Vec<u32> = (0..h.num_points() as u32)
        .filter(|&p| {
            let c = h.point(p).coords();
            rational(c) && in_hyperplane(c)
        })
        .collect();
    let lns: Vec<u32> = (0..h.num_lines() as u32)
        .filter(|&l| {
            let rows = h.line(l).rows();
            rows.iter().all(|r| rational(r) && in_hyperplane(r))
        })
        .collect();
    if pts.is_empty() || lns.is_empty() {
        return Err(Error::ConstructionFault(
            "empty split Cayley subgeometry".into(),
        ));
    }
    let sub = h.restrict(&pts, &lns);
    Hexagon::from_geometry(sub, Mode::SplitCayley)
        .map_err(|e| Error::ConstructionFault(format!("extracted subgeometry: {e}")))
}

/// Whether each point of `sub` (given by coordinates) keeps all its lines of `h` inside `sub`.
pub fn is_ideal_in(sub: &Geometry, h: &Geometry) -> bool {
    (0..sub.num_points() as u32).all(|p| {
        let id = h.point_id(sub.point(p).coords());
        id.is_some_and(|id| h.lines_through(id).len() == sub.lines_through(p).len())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t82() -> Hexagon {
        Hexagon::build(&FieldSpec::twisted(2).unwrap()).unwrap()
    }

    fn pid(h: &Hexagon, i: usize) -> u32 {
        h.point_id(&unit(i)).unwrap()
    }

    #[test]
    fn counts_at_q2() {
        let h = t82();
        assert_eq!(h.num_points(), 2457);
        assert_eq!(h.num_lines(), 819);
        assert_eq!(h.order(), (8, 2));
    }

    #[test]
    fn split_cayley_h2() {
        let h = Hexagon::build(&FieldSpec::split_cayley(2).unwrap()).unwrap();
        assert_eq!((h.num_points(), h.num_lines()), (63, 63));
        assert_eq!(h.order(), (2, 2));
        let h3 = Hexagon::build(&FieldSpec::split_cayley(3).unwrap()).unwrap();
        assert_eq!((h3.num_points(), h3.num_lines()), (364, 364));
    }

    #[test]
    fn coordinate_hexagon_and_distances() {
        let h = t82();
        let o = DistanceOracle::new(&h);
        let cyc: Vec<u32> = [0, 6, 1, 4, 2, 5].iter().map(|&i| pid(&h, i)).collect();
        for w in 0..6 {
            assert_eq!(
                o.distance(Elem::Point(cyc[w]), Elem::Point(cyc[(w + 1) % 6])),
                2
            );
        }
        assert_eq!(
            o.distance(Elem::Point(pid(&h, 0)), Elem::Point(pid(&h, 4))),
            6
        );
        assert_eq!(o.meet(pid(&h, 0), pid(&h, 1)).unwrap(), pid(&h, 6));
        assert_eq!(o.meet(pid(&h, 1), pid(&h, 0)).unwrap(), pid(&h, 6));
        assert!(o.meet(pid(&h, 0), pid(&h, 6)).is_err());
    }

    #[test]
    fn nearest_point_on_incident_line_is_itself() {
        let h = t82();
        let o = DistanceOracle::new(&h);
        for p in [0u32, 17, 2000] {
            let l = h.lines_through(p)[0];
            assert_eq!(o.nearest_point_on_line(p, l).unwrap(), p);
        }
    }

    #[test]
    fn line_census_and_traces() {
        let h = t82();
        let o = DistanceOracle::new(&h);
        let census = o.line_distance_census(0);
        assert_eq!(census.get(&2), Some(&18));
        assert_eq!(census.get(&4), Some(&288));
        assert_eq!(census.get(&6), Some(&512));
        let np = h.num_points();
        let row = o.row_of(Elem::Line(0));
        let m = (0..h.num_lines() as u32)
            .find(|&m| row[np + m as usize] == 6)
            .unwrap();
        let tr = o.trace_lines(0, m).unwrap();
        assert_eq!(tr.len(), 9);
        for &a in &tr {
            for &b in &tr {
                if a != b {
                    assert_eq!(o.distance(Elem::Point(a), Elem::Point(b)), 6);
                }
            }
        }
        let reg = o.regulus(0, m).unwrap();
        assert_eq!(reg.len(), 3);
        assert!(reg.contains(&0) && reg.contains(&m));
        assert!(o.trace_lines(0, 0).is_err());
    }

    #[test]
    fn planted_trace_conflict_is_found() {
        let traces = vec![(1, vec![1, 2, 3]), (2, vec![4, 5, 6]), (3, vec![2, 3, 7])];
        let (a, b, shared) = first_trace_conflict(&traces).unwrap();
        assert_eq!((a, b, shared), (1, 3, vec![2, 3]));
        let fine = vec![(1, vec![1, 2, 3]), (2, vec![1, 2, 3]), (3, vec![3, 4, 5])];
        assert!(first_trace_conflict(&fine).is_none());
    }

    #[test]
    fn extracted_split_cayley_is_ideal_and_blocks() {
        let h = t82();
        let sc = extract_split_cayley(&h).unwrap();
        assert_eq!((sc.num_points(), sc.num_lines()), (63, 63));
        assert_eq!(sc.order(), (2, 2));
        assert!(is_ideal_in(&sc, &h));
        let ids: Vec<u32> = sc.lines().iter().map(|l| h.line_id(l).unwrap()).collect();
        assert!(blocking_checks(&h, &ids).blocks_all());
    }

    #[test]
    fn from_lines_small_cases() {
        let f = Arc::new(Field::twisted(2).unwrap());
        let l = Subspace::from_vectors(&f, &[unit(0), unit(1)]).unwrap();
        let g = Geometry::from_lines(f.clone(), vec![l]).unwrap();
        assert_eq!((g.num_points(), g.num_lines()), (9, 1));
        let e = Geometry::from_lines(f.clone(), vec![]).unwrap();
        assert_eq!((e.num_points(), e.num_lines()), (0, 0));
        assert!(Geometry::from_lines(f, vec![l, l]).is_err());
    }

    #[test]
    fn random_nine_lines_do_not_block() {
        let h = t82();
        let report = blocking_checks(&h, &[0, 1, 2, 3, 4, 5, 6, 7, 8]);
        assert!(!report.blocks_all());
        assert!(!report.misses.is_empty());
    }
}
