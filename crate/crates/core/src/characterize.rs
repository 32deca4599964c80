//! Deciding whether a line set of PG(7, q^3) is the line set of a naturally
//! embedded T(q^3, q).
//!
//! The pipeline runs five stages and stops at the first failure:
//! 1. the properties (Pt), (Pl), (Sd), (4d') and (To);
//! 2. absence of triangles, quadrangles and pentagons;
//! 3. the line count q^9+q^8+q^5+q^4+q+1;
//! 4. girth 12, diameter 6 and order (q^3, q) of the incidence graph;
//! 5. flatness: the lines through each point are coplanar.
//!
//! Stage 4 alone certifies a generalized hexagon, independent of sampling in stage 1.

use std::collections::VecDeque;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Result;
use crate::hexagon::{DegreeCensus, Elem, Geometry};
use crate::projspace::Subspace;
use crate::subspaces::{verify_properties, PropertyId, PropertyReport, VerifyOptions};

/// An ordinary polygon: `points[i]` and `points[i+1]` lie on `lines[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Polygon {
    pub points: Vec<u32>,
    pub lines: Vec<u32>,
}

impl Polygon {
    fn from_cycle(geom: &Geometry, cycle: &[usize]) -> Polygon {
        // rotate so the cycle starts at a point
        let start = cycle
            .iter()
            .position(|&v| matches!(geom.elem(v), Elem::Point(_)))
            .unwrap_or(0);
        let mut points = Vec::new();
        let mut lines = Vec::new();
        for i in 0..cycle.len() {
            match geom.elem(cycle[(start + i) % cycle.len()]) {
                Elem::Point(p) => points.push(p),
                Elem::Line(l) => lines.push(l),
            }
        }
        Polygon { points, lines }
    }

    pub fn sides(&self) -> usize {
        self.lines.len()
    }

    /// Whether consecutive points lie on the listed lines and all elements are distinct.
    pub fn is_valid_in(&self, geom: &Geometry) -> bool {
        let k = self.points.len();
        if k < 2 || self.lines.len() != k {
            return false;
        }
        let mut p = self.points.clone();
        let mut l = self.lines.clone();
        p.sort_unstable();
        p.dedup();
        l.sort_unstable();
        l.dedup();
        if p.len() != k || l.len() != k {
            return false;
        }
        (0..k).all(|i| {
            let on = geom.points_on(self.lines[i]);
            on.binary_search(&self.points[i]).is_ok()
                && on.binary_search(&self.points[(i + 1) % k]).is_ok()
        })
    }
}

/// A shortest cycle of the incidence graph, as vertex ids.
pub fn shortest_cycle(geom: &Geometry) -> Option<Vec<usize>> {
    let n = geom.num_vertices();
    let mut best: Option<Vec<usize>> = None;
    let mut dist = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    for s in 0..n {
        dist.fill(usize::MAX);
        parent.fill(usize::MAX);
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        let mut hit = None;
        'bfs: while let Some(u) = queue.pop_front() {
            if best.as_ref().is_some_and(|b| 2 * dist[u] + 1 >= b.len()) {
                break;
            }
            for w in geom.neighbours(u) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    parent[w] = u;
                    queue.push_back(w);
                } else if parent[u] != w {
                    let len = dist[u] + dist[w] + 1;
                    if best.as_ref().is_none_or(|b| len < b.len()) {
                        hit = Some((u, w));
                        break 'bfs;
                    }
                }
            }
        }
        // a globally shortest closed walk found this way is a simple cycle
        if let Some((u, w)) = hit {
            let walk = |mut v: usize| {
                let mut path = vec![v];
                while v != s {
                    v = parent[v];
                    path.push(v);
                }
                path
            };
            let mut cycle = walk(u);
            cycle.reverse();
            let mut back = walk(w);
            back.pop();
            cycle.extend(back);
            best = Some(cycle);
        }
    }
    best
}

/// A cycle of exactly `len` vertices through vertex ids above its smallest one.
fn cycle_of_length(geom: &Geometry, len: usize) -> Option<Vec<usize>> {
    fn dfs(
        geom: &Geometry,
        s: usize,
        len: usize,
        path: &mut Vec<usize>,
        on_path: &mut [bool],
    ) -> bool {
        let u = *path.last().unwrap();
        if path.len() == len {
            return geom.neighbours(u).any(|w| w == s);
        }
        for w in geom.neighbours(u) {
            if w > s && !on_path[w] {
                path.push(w);
                on_path[w] = true;
                if dfs(geom, s, len, path, on_path) {
                    return true;
                }
                on_path[w] = false;
                path.pop();
            }
        }
        false
    }
    let n = geom.num_vertices();
    let mut on_path = vec![false; n];
    for s in 0..n {
        let mut path = vec![s];
        on_path[s] = true;
        if dfs(geom, s, len, &mut path, &mut on_path) {
            return Some(path);
        }
        on_path[s] = false;
    }
    None
}

/// An ordinary `k`-gon of the line set, if there is one.
pub fn detect_kgon(geom: &Geometry, k: usize) -> Option<Polygon> {
    let shortest = shortest_cycle(geom)?;
    let cycle = match shortest.len().cmp(&(2 * k)) {
        std::cmp::Ordering::Greater => return None,
        std::cmp::Ordering::Equal => shortest,
        std::cmp::Ordering::Less => cycle_of_length(geom, 2 * k)?,
    };
    Some(Polygon::from_cycle(geom, &cycle))
}

/// Girth, diameter and degrees of the incidence graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IncidenceReport {
    pub girth: Option<u32>,
    /// `None` for a disconnected or empty graph
    #[serde(serialize_with = "diameter_or_inf")]
    pub diameter: Option<u32>,
    pub degrees: DegreeCensus,
    pub order: Option<(u64, u64)>,
}

fn diameter_or_inf<S: serde::Serializer>(
    d: &Option<u32>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match d {
        Some(d) => s.serialize_u32(*d),
        None => s.serialize_str("inf"),
    }
}

pub fn check_incidence_graph(geom: &Geometry) -> IncidenceReport {
    let (girth, diameter) = geom.girth_and_diameter();
    IncidenceReport {
        girth,
        diameter,
        degrees: geom.degree_census(),
        order: geom.order(),
    }
}

// ---------------------------------------------------------------------------
// pipeline

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageResult {
    pub stage: u8,
    pub check: String,
    pub passed: bool,
    pub detail: String,
    pub witness: Option<Value>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum FinalVerdict {
    IsNaturalTth,
    Rejected { stage: u8, check: String },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CharacterizationVerdict {
    pub stages: Vec<StageResult>,
    pub verdict: FinalVerdict,
    pub properties: Vec<PropertyReport>,
}

impl CharacterizationVerdict {
    pub fn is_natural(&self) -> bool {
        self.verdict == FinalVerdict::IsNaturalTth
    }

    /// Short label: `is-natural-TTH` or `rejected-at-(<check>)`.
    pub fn label(&self) -> String {
        match &self.verdict {
            FinalVerdict::IsNaturalTth => "is-natural-TTH".into(),
            FinalVerdict::Rejected { check, .. } => {
                let name = match check.parse::<PropertyId>() {
                    Ok(PropertyId::FourDPrime) => "4d'".to_string(),
                    Ok(p) => {
                        let mut c = p.as_str().chars();
                        c.next()
                            .map(|h| h.to_ascii_uppercase().to_string() + c.as_str())
                            .unwrap_or_default()
                    }
                    Err(_) => check.clone(),
                };
                format!("rejected-at-({name})")
            }
        }
    }
}

pub const STAGE_PROPERTIES: [PropertyId; 5] = [
    PropertyId::Pt,
    PropertyId::Pl,
    PropertyId::Sd,
    PropertyId::FourDPrime,
    PropertyId::To,
];

/// Runs the stages in order and stops at the first failure.
pub fn characterize(geom: &Geometry, opts: &VerifyOptions) -> Result<CharacterizationVerdict> {
    let q = geom.field().q() as u64;
    let mut out = CharacterizationVerdict {
        stages: Vec::new(),
        verdict: FinalVerdict::IsNaturalTth,
        properties: Vec::new(),
    };
    let opts = VerifyOptions {
        classify: false,
        ..opts.clone()
    };

    // stage 1, cheapest property first so that degree defects never run the closure
    let (pt, _) = verify_properties(geom, &[PropertyId::Pt], &opts)?;
    let mut reports = pt;
    if reports[0].passed() {
        let rest: Vec<PropertyId> = STAGE_PROPERTIES[1..].to_vec();
        let (more, _) = verify_properties(geom, &rest, &opts)?;
        reports.extend(more);
    }
    for r in &reports {
        let passed = r.passed();
        out.stages.push(StageResult {
            stage: 1,
            check: r.property.as_str().into(),
            passed,
            detail: r.coverage.note.clone(),
            witness: r
                .witnesses
                .first()
                .map(|w| serde_json::to_value(w).expect("serializable")),
        });
        if !passed {
            out.verdict = FinalVerdict::Rejected {
                stage: 1,
                check: r.property.as_str().into(),
            };
            out.properties = reports;
            return Ok(out);
        }
    }
    out.properties = reports;

    let stage = |out: &mut CharacterizationVerdict,
                 n: u8,
                 check: &str,
                 passed: bool,
                 detail: String,
                 witness: Option<Value>| {
        out.stages.push(StageResult {
            stage: n,
            check: check.into(),
            passed,
            detail,
            witness,
        });
        if !passed {
            out.verdict = FinalVerdict::Rejected {
                stage: n,
                check: check.into(),
            };
        }
        passed
    };

    // stage 2
    let shortest = shortest_cycle(geom);
    for (k, name) in [(3, "triangle"), (4, "quadrangle"), (5, "pentagon")] {
        let poly = match &shortest {
            Some(c) if c.len() == 2 * k => Some(Polygon::from_cycle(geom, c)),
            Some(c) if c.len() < 2 * k => detect_kgon(geom, k),
            _ => None,
        };
        let detail = match &poly {
            Some(_) => format!("a {name} exists"),
            None => format!("no {name}"),
        };
        let witness = poly.map(|p| serde_json::to_value(p).expect("serializable"));
        if !stage(&mut out, 2, name, witness.is_none(), detail, witness) {
            return Ok(out);
        }
    }

    // stage 3
    let expected = q.pow(9) + q.pow(8) + q.pow(5) + q.pow(4) + q + 1;
    let n = geom.num_lines() as u64;
    if !stage(
        &mut out,
        3,
        "count",
        n == expected,
        format!("{n} lines, {expected} required"),
        (n != expected).then(|| json!({ "lines": n, "required": expected })),
    ) {
        return Ok(out);
    }

    // stage 4
    let inc = check_incidence_graph(geom);
    let s = q.pow(3);
    let ok = inc.girth == Some(12) && inc.diameter == Some(6) && inc.order == Some((s, q));
    if !stage(
        &mut out,
        4,
        "hexagon",
        ok,
        format!(
            "girth {:?}, diameter {:?}, order {:?}",
            inc.girth, inc.diameter, inc.order
        ),
        (!ok).then(|| serde_json::to_value(&inc).expect("serializable")),
    ) {
        return Ok(out);
    }

    // stage 5
    let f = &**geom.field();
    let bad = (0..geom.num_points() as u32).find_map(|p| {
        let lines: Vec<Subspace> = geom
            .lines_through(p)
            .iter()
            .map(|&l| *geom.line(l))
            .collect();
        let span = Subspace::span(f, &lines).ok()?;
        (span.rank() != 3).then_some((p, span.dim()))
    });
    stage(
        &mut out,
        5,
        "flatness",
        bad.is_none(),
        match bad {
            None => "the lines through every point span a plane".into(),
            Some((p, d)) => format!("the lines through point {p} span a {d}-space"),
        },
        bad.map(|(p, d)| json!({ "point": p, "span_dim": d })),
    );
    Ok(out)
}

// ---------------------------------------------------------------------------
// isomorphism of incidence structures

/// A bijection of points and of lines preserving incidence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Isomorphism {
    pub points: Vec<u32>,
    pub lines: Vec<u32>,
}

struct Union<'a> {
    a: &'a Geometry,
    b: &'a Geometry,
}

impl Union<'_> {
    fn len(&self) -> usize {
        self.a.num_vertices() + self.b.num_vertices()
    }

    fn side(&self, v: usize) -> (usize, bool) {
        let na = self.a.num_vertices();
        if v < na {
            (v, false)
        } else {
            (v - na, true)
        }
    }

    fn neighbours(&self, v: usize) -> Vec<usize> {
        let (u, in_b) = self.side(v);
        if in_b {
            let na = self.a.num_vertices();
            self.b.neighbours(u).map(|w| w + na).collect()
        } else {
            self.a.neighbours(u).collect()
        }
    }

    fn is_line(&self, v: usize) -> bool {
        let (u, in_b) = self.side(v);
        let g = if in_b { self.b } else { self.a };
        u >= g.num_points()
    }
}

/// Equitable refinement of `colours` on the disjoint union; colour names depend
/// only on the colour structure, so the two halves stay comparable.
fn refine(u: &Union<'_>, adj: &[Vec<usize>], colours: &mut Vec<u32>) {
    let n = u.len();
    let mut classes = count_classes(colours);
    loop {
        let keys: Vec<(u32, Vec<u32>)> = (0..n)
            .map(|v| {
                let mut nb: Vec<u32> = adj[v].iter().map(|&w| colours[w]).collect();
                nb.sort_unstable();
                (colours[v], nb)
            })
            .collect();
        let mut sorted: Vec<&(u32, Vec<u32>)> = keys.iter().collect();
        sorted.sort();
        sorted.dedup();
        let name: std::collections::BTreeMap<&(u32, Vec<u32>), u32> = sorted
            .iter()
            .enumerate()
            .map(|(i, k)| (*k, i as u32))
            .collect();
        let next: Vec<u32> = keys.iter().map(|k| name[k]).collect();
        *colours = next;
        let now = count_classes(colours);
        if now == classes {
            return;
        }
        classes = now;
    }
}

fn count_classes(colours: &[u32]) -> usize {
    let mut c: Vec<u32> = colours.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

fn balanced(u: &Union<'_>, colours: &[u32]) -> bool {
    let na = u.a.num_vertices();
    let mut ca: Vec<u32> = colours[..na].to_vec();
    let mut cb: Vec<u32> = colours[na..].to_vec();
    ca.sort_unstable();
    cb.sort_unstable();
    ca == cb
}

/// An incidence-preserving bijection from `a` to `b`, found by colour refinement
/// with individualization and backtracking.
pub fn find_isomorphism(a: &Geometry, b: &Geometry) -> Option<Isomorphism> {
    if a.num_points() != b.num_points() || a.num_lines() != b.num_lines() {
        return None;
    }
    let u = Union { a, b };
    let n = u.len();
    let adj: Vec<Vec<usize>> = (0..n).map(|v| u.neighbours(v)).collect();
    let mut colours: Vec<u32> = (0..n).map(|v| u.is_line(v) as u32).collect();
    refine(&u, &adj, &mut colours);
    if !balanced(&u, &colours) {
        return None;
    }
    let map = search(&u, &adj, colours)?;
    let na = a.num_vertices();
    let np = a.num_points();
    let iso = Isomorphism {
        points: (0..np).map(|v| (map[v] - na) as u32).collect(),
        lines: (np..na).map(|v| (map[v] - na - np) as u32).collect(),
    };
    verify_isomorphism(a, b, &iso).then_some(iso)
}

fn search(u: &Union<'_>, adj: &[Vec<usize>], colours: Vec<u32>) -> Option<Vec<usize>> {
    let na = u.a.num_vertices();
    let n = u.len();
    // each colour now occurs equally often on both sides
    let mut size = std::collections::BTreeMap::<u32, usize>::new();
    for &c in &colours[..na] {
        *size.entry(c).or_default() += 1;
    }
    let target = size
        .iter()
        .filter(|(_, &s)| s > 1)
        .min_by_key(|(_, &s)| s)
        .map(|(&c, _)| c);
    let Some(c) = target else {
        // discrete: match equal colours
        let mut where_b = vec![usize::MAX; n];
        for v in na..n {
            where_b[colours[v] as usize] = v;
        }
        return Some((0..na).map(|v| where_b[colours[v] as usize]).collect());
    };
    let fresh = colours.iter().max().unwrap() + 1;
    let v = (0..na).find(|&v| colours[v] == c).unwrap();
    for w in (na..n).filter(|&w| colours[w] == c) {
        let mut next = colours.clone();
        next[v] = fresh;
        next[w] = fresh;
        refine(u, adj, &mut next);
        if balanced(u, &next) {
            if let Some(m) = search(u, adj, next) {
                return Some(m);
            }
        }
    }
    None
}

pub fn verify_isomorphism(a: &Geometry, b: &Geometry, iso: &Isomorphism) -> bool {
    let mut p = iso.points.clone();
    let mut l = iso.lines.clone();
    p.sort_unstable();
    l.sort_unstable();
    if p != (0..b.num_points() as u32).collect::<Vec<_>>()
        || l != (0..b.num_lines() as u32).collect::<Vec<_>>()
    {
        return false;
    }
    (0..a.num_lines() as u32).all(|line| {
        let mut img: Vec<u32> = a
            .points_on(line)
            .iter()
            .map(|&x| iso.points[x as usize])
            .collect();
        img.sort_unstable();
        img == b.points_on(iso.lines[line as usize])
    })
}
