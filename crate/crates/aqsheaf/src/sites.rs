//! Finite covers as simplicial nerves (dimension at most 3) and sheaves of
//! finite groups on them.
//!
//! Faces of each dimension are stored in lexicographic order of their
//! ascending vertex tuples. Restrictions are stored only for codimension-one
//! inclusions; `facets(d, i)[m]` is the face obtained by omitting vertex `m`.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{input, structural, Result};
use crate::groups::{
    aq_degree, cosets, is_central_series, normality_witness, Elem, FiniteGroup, GroupHom,
    NormalSeries, Subgroup, MAX_TABLE,
};

pub const MAX_DIM: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nerve {
    pub name: String,
    pub n_vertices: usize,
    faces: Vec<Vec<Vec<u32>>>,
    facets: Vec<Vec<Vec<usize>>>,
    index: HashMap<Vec<u32>, (usize, usize)>,
}

impl Nerve {
    /// Downward closure of the given simplices.
    pub fn from_facets(name: impl Into<String>, n_vertices: usize, simplices: &[Vec<u32>]) -> Result<Self> {
        let mut all: Vec<Vec<Vec<u32>>> = vec![Vec::new(); MAX_DIM + 1];
        for v in 0..n_vertices as u32 {
            all[0].push(vec![v]);
        }
        for s in simplices {
            let mut s = s.clone();
            s.sort_unstable();
            s.dedup();
            if s.is_empty() || s.len() > MAX_DIM + 1 {
                return Err(input(format!("simplex {s:?} has unsupported dimension")));
            }
            if s.iter().any(|&v| v as usize >= n_vertices) {
                return Err(input(format!("simplex {s:?} names a missing vertex")));
            }
            let k = s.len();
            for mask in 1u32..(1 << k) {
                let sub: Vec<u32> = (0..k).filter(|&b| mask >> b & 1 == 1).map(|b| s[b]).collect();
                all[sub.len() - 1].push(sub);
            }
        }
        for d in all.iter_mut() {
            d.sort();
            d.dedup();
        }
        Self::from_faces(name, n_vertices, all)
    }

    /// Explicit face lists; must be downward closed with ascending tuples.
    pub fn from_faces(name: impl Into<String>, n_vertices: usize, mut faces: Vec<Vec<Vec<u32>>>) -> Result<Self> {
        if faces.len() > MAX_DIM + 1 {
            return Err(input("nerve dimension above 3"));
        }
        faces.resize(MAX_DIM + 1, Vec::new());
        let mut index = HashMap::new();
        for (d, list) in faces.iter_mut().enumerate() {
            list.sort();
            for f in list.iter() {
                if f.len() != d + 1 || f.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(input(format!("face {f:?} is not an ascending {d}-simplex")));
                }
                if f.iter().any(|&v| v as usize >= n_vertices) {
                    return Err(input(format!("face {f:?} names a missing vertex")));
                }
            }
            for (i, f) in list.iter().enumerate() {
                if index.insert(f.clone(), (d, i)).is_some() {
                    return Err(input(format!("face {f:?} listed twice")));
                }
            }
        }
        if faces[0].len() != n_vertices {
            return Err(input("every vertex must be listed as a 0-face"));
        }
        let mut facets = vec![Vec::new(); MAX_DIM + 1];
        for d in 1..=MAX_DIM {
            for f in &faces[d] {
                let mut fs = Vec::with_capacity(d + 1);
                for m in 0..=d {
                    let mut sub = f.clone();
                    sub.remove(m);
                    match index.get(&sub) {
                        Some(&(_, i)) => fs.push(i),
                        None => return Err(input(format!("face {f:?} is missing its facet {sub:?}"))),
                    }
                }
                facets[d].push(fs);
            }
        }
        Ok(Nerve { name: name.into(), n_vertices, faces, facets, index })
    }

    pub fn point() -> Self {
        Self::from_facets("point", 1, &[]).expect("point")
    }

    /// `n` vertices on a circle, no triangles.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(input("cycle needs at least 3 vertices"));
        }
        let edges: Vec<Vec<u32>> = (0..n as u32).map(|i| vec![i, (i + 1) % n as u32]).collect();
        Self::from_facets(format!("cycle({n})"), n, &edges)
    }

    /// The `n`-simplex on `n+1` vertices, solid or as its boundary.
    pub fn simplex(n: usize, solid: bool) -> Result<Self> {
        let top = if solid { n } else { n.saturating_sub(1) };
        if n == 0 || top > MAX_DIM {
            return Err(input(format!("simplex({n}) does not fit dimension 3")));
        }
        let verts: Vec<u32> = (0..=n as u32).collect();
        let simplices: Vec<Vec<u32>> = if solid {
            vec![verts]
        } else {
            (0..=n).map(|m| verts.iter().copied().filter(|&v| v != m as u32).collect()).collect()
        };
        let kind = if solid { "solid" } else { "boundary" };
        Self::from_facets(format!("simplex({n},{kind})"), n + 1, &simplices)
    }

    /// Six-vertex triangulation of the real projective plane.
    pub fn rp2_min() -> Self {
        let tris = [
            [0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 5], [0, 1, 5],
            [1, 2, 4], [2, 3, 5], [1, 3, 4], [2, 4, 5], [1, 3, 5],
        ];
        let tris: Vec<Vec<u32>> = tris.iter().map(|t| t.to_vec()).collect();
        Self::from_facets("rp2_min", 6, &tris).expect("rp2")
    }

    pub fn count(&self, d: usize) -> usize {
        self.faces.get(d).map_or(0, Vec::len)
    }

    pub fn face(&self, d: usize, i: usize) -> &[u32] {
        &self.faces[d][i]
    }

    pub fn faces(&self, d: usize) -> &[Vec<u32>] {
        &self.faces[d]
    }

    pub fn facets(&self, d: usize, i: usize) -> &[usize] {
        &self.facets[d][i]
    }

    pub fn index_of(&self, face: &[u32]) -> Option<(usize, usize)> {
        self.index.get(face).copied()
    }

    pub fn dim(&self) -> usize {
        (0..=MAX_DIM).rev().find(|&d| self.count(d) > 0).unwrap_or(0)
    }

    pub fn euler_characteristic(&self) -> i64 {
        (0..=MAX_DIM).map(|d| if d % 2 == 0 { 1 } else { -1 } * self.count(d) as i64).sum()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.n_vertices;
        if n == 0 {
            return true;
        }
        let mut comp: Vec<usize> = (0..n).collect();
        fn find(c: &mut Vec<usize>, x: usize) -> usize {
            if c[x] != x {
                let r = find(c, c[x]);
                c[x] = r;
            }
            c[x]
        }
        for e in &self.faces[1] {
            let (a, b) = (find(&mut comp, e[0] as usize), find(&mut comp, e[1] as usize));
            comp[a] = b;
        }
        let r = find(&mut comp, 0);
        (0..n).all(|v| find(&mut comp, v) == r)
    }

    /// Barycentric subdivision (only for nerves of dimension at most 2, so the
    /// result still fits the dimension cap).
    pub fn barycentric(&self) -> Result<Nerve> {
        if self.dim() > 2 {
            return Err(input("barycentric subdivision limited to dimension 2"));
        }
        let mut ids: HashMap<Vec<u32>, u32> = HashMap::new();
        for d in 0..=self.dim() {
            for f in &self.faces[d] {
                let id = ids.len() as u32;
                ids.insert(f.clone(), id);
            }
        }
        let mut simplices = Vec::new();
        // flags f0 ⊂ f1 ⊂ ... ⊂ fk of faces
        fn extend(nerve: &Nerve, ids: &HashMap<Vec<u32>, u32>, chain: &mut Vec<Vec<u32>>, out: &mut Vec<Vec<u32>>) {
            out.push(chain.iter().map(|f| ids[f]).collect());
            let last = chain.last().expect("chain").clone();
            let d = last.len();
            if d > nerve.dim() {
                return;
            }
            for g in &nerve.faces[d] {
                if last.iter().all(|v| g.contains(v)) {
                    chain.push(g.clone());
                    extend(nerve, ids, chain, out);
                    chain.pop();
                }
            }
        }
        for v in &self.faces[0] {
            let mut chain = vec![v.clone()];
            extend(self, &ids, &mut chain, &mut simplices);
        }
        // also chains starting above dimension 0
        for d in 1..=self.dim() {
            for f in &self.faces[d] {
                let mut chain = vec![f.clone()];
                extend(self, &ids, &mut chain, &mut simplices);
            }
        }
        Nerve::from_facets(format!("sd({})", self.name), ids.len(), &simplices)
    }
}

/// A finite group on every face with codimension-one restriction maps.
#[derive(Debug, Clone)]
pub struct GroupSheaf {
    pub nerve: Arc<Nerve>,
    pub groups: Vec<Vec<Arc<FiniteGroup>>>,
    /// `restr[d][i][m]`: from facet `m` of face `(d, i)` into `(d, i)`; empty for `d = 0`.
    pub restr: Vec<Vec<Vec<GroupHom>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub face: Vec<u32>,
    pub subface: Vec<u32>,
    pub detail: String,
}

impl GroupSheaf {
    pub fn constant(nerve: Arc<Nerve>, g: Arc<FiniteGroup>) -> Self {
        let groups = (0..=MAX_DIM).map(|d| vec![g.clone(); nerve.count(d)]).collect();
        let id = GroupHom::identity(&g);
        let restr = (0..=MAX_DIM)
            .map(|d| {
                let per = if d == 0 { Vec::new() } else { vec![id.clone(); d + 1] };
                vec![per; nerve.count(d)]
            })
            .collect();
        GroupSheaf { nerve, groups, restr }
    }

    pub fn group(&self, d: usize, i: usize) -> &FiniteGroup {
        &self.groups[d][i]
    }

    /// Restriction of `x` from facet `m` of `(d, i)` into `(d, i)`.
    #[inline]
    pub fn restrict(&self, d: usize, i: usize, m: usize, x: Elem) -> Elem {
        self.restr[d][i][m].apply(x)
    }

    /// Restriction map from an arbitrary subface into `(d, i)`, composed along
    /// omitted vertices in ascending position order.
    pub fn restriction_from(&self, sub: &[u32], d: usize, i: usize) -> Result<GroupHom> {
        let face = self.nerve.face(d, i).to_vec();
        if sub.len() > face.len() || !sub.iter().all(|v| face.contains(v)) {
            return Err(structural(format!("{sub:?} is not a subface of {face:?}")));
        }
        if sub.len() == face.len() {
            return Ok(GroupHom::identity(self.group(d, i)));
        }
        // omit the first vertex not in `sub`
        let m = face.iter().position(|v| !sub.contains(v)).expect("missing vertex");
        let fi = self.nerve.facets(d, i)[m];
        let inner = self.restriction_from(sub, d - 1, fi)?;
        Ok(inner.compose(&self.restr[d][i][m]))
    }

    pub fn is_pointwise_abelian(&self) -> bool {
        self.groups.iter().flatten().all(|g| g.is_abelian())
    }

    pub fn is_tabulable(&self) -> bool {
        self.groups.iter().flatten().all(|g| g.order() <= MAX_TABLE || g.moduli().is_some())
    }

    /// Every functoriality and homomorphism violation; empty iff the datum is a sheaf of groups.
    pub fn validate(&self) -> Vec<Violation> {
        let nerve = &self.nerve;
        let mut out = Vec::new();
        for d in 1..=nerve.dim() {
            for i in 0..nerve.count(d) {
                for (m, &fi) in nerve.facets(d, i).iter().enumerate() {
                    if let Err(e) = self.restr[d][i][m].validate(self.group(d - 1, fi), self.group(d, i)) {
                        out.push(Violation {
                            face: nerve.face(d, i).to_vec(),
                            subface: nerve.face(d - 1, fi).to_vec(),
                            detail: e.to_string(),
                        });
                    }
                }
            }
        }
        if !out.is_empty() {
            return out;
        }
        for d in 2..=nerve.dim() {
            for i in 0..nerve.count(d) {
                let face = nerve.face(d, i);
                for a in 0..=d {
                    for b in a + 1..=d {
                        // subface omitting positions a and b, reached via either facet
                        let fa = nerve.facets(d, i)[a];
                        let fb = nerve.facets(d, i)[b];
                        let via_a = self.restr[d - 1][fa][b - 1].compose(&self.restr[d][i][a]);
                        let via_b = self.restr[d - 1][fb][a].compose(&self.restr[d][i][b]);
                        if let Some(x) = (0..via_a.map.len()).find(|&x| via_a.map[x] != via_b.map[x]) {
                            let mut sub = face.to_vec();
                            sub.remove(b);
                            sub.remove(a);
                            out.push(Violation {
                                face: face.to_vec(),
                                subface: sub,
                                detail: format!("paths disagree on element {x}"),
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

/// Per-face subgroups stable under restriction.
#[derive(Debug, Clone)]
pub struct SubSheaf {
    pub members: Vec<Vec<Subgroup>>,
}

impl SubSheaf {
    pub fn new(f: &GroupSheaf, members: Vec<Vec<Subgroup>>) -> Result<Self> {
        let nerve = &f.nerve;
        for d in 1..=nerve.dim() {
            for i in 0..nerve.count(d) {
                for (m, &fi) in nerve.facets(d, i).iter().enumerate() {
                    for &x in &members[d - 1][fi].members {
                        if !members[d][i].contains(f.restrict(d, i, m, x)) {
                            return Err(structural(format!(
                                "sub-sheaf not stable under restriction {:?} -> {:?}",
                                nerve.face(d - 1, fi),
                                nerve.face(d, i)
                            )));
                        }
                    }
                }
            }
        }
        Ok(SubSheaf { members })
    }

    pub fn whole(f: &GroupSheaf) -> Self {
        SubSheaf { members: f.groups.iter().map(|l| l.iter().map(|g| Subgroup::whole(g)).collect()).collect() }
    }

    pub fn trivial(f: &GroupSheaf) -> Self {
        SubSheaf { members: f.groups.iter().map(|l| l.iter().map(|g| Subgroup::trivial(g)).collect()).collect() }
    }

    /// The same subgroup (by element list) on every face of a constant sheaf.
    pub fn constant(f: &GroupSheaf, elems: &[Elem]) -> Result<Self> {
        let members = f
            .groups
            .iter()
            .map(|l| l.iter().map(|g| Subgroup::new(g, elems)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        SubSheaf::new(f, members)
    }

    pub fn at(&self, d: usize, i: usize) -> &Subgroup {
        &self.members[d][i]
    }

    pub fn is_subset(&self, other: &SubSheaf) -> bool {
        self.members.iter().zip(&other.members).all(|(a, b)| a.iter().zip(b).all(|(x, y)| x.is_subset(y)))
    }

    /// The sub-sheaf as a sheaf in its own right, with its inclusion.
    pub fn tabulate(&self, f: &GroupSheaf) -> (GroupSheaf, SheafMorphism) {
        let nerve = f.nerve.clone();
        let mut groups = Vec::new();
        let mut incl = Vec::new();
        for d in 0..=MAX_DIM {
            let mut gl = Vec::new();
            let mut il = Vec::new();
            for i in 0..nerve.count(d) {
                let h = self.at(d, i);
                gl.push(Arc::new(f.group(d, i).subgroup_group(h)));
                il.push(GroupHom { map: h.members.clone() });
            }
            groups.push(gl);
            incl.push(il);
        }
        let restr = (0..=MAX_DIM)
            .map(|d| {
                (0..nerve.count(d))
                    .map(|i| {
                        if d == 0 {
                            return Vec::new();
                        }
                        nerve
                            .facets(d, i)
                            .iter()
                            .enumerate()
                            .map(|(m, &fi)| GroupHom {
                                map: self.at(d - 1, fi)
                                    .members
                                    .iter()
                                    .map(|&x| {
                                        self.at(d, i).index_of(f.restrict(d, i, m, x)).expect("stable") as Elem
                                    })
                                    .collect(),
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        (GroupSheaf { nerve, groups, restr }, SheafMorphism { maps: incl })
    }
}

/// Per-face homomorphisms between two sheaves on the same nerve.
#[derive(Debug, Clone)]
pub struct SheafMorphism {
    pub maps: Vec<Vec<GroupHom>>,
}

impl SheafMorphism {
    pub fn identity(f: &GroupSheaf) -> Self {
        SheafMorphism { maps: f.groups.iter().map(|l| l.iter().map(|g| GroupHom::identity(g)).collect()).collect() }
    }

    #[inline]
    pub fn apply(&self, d: usize, i: usize, x: Elem) -> Elem {
        self.maps[d][i].apply(x)
    }

    pub fn compose(&self, then: &SheafMorphism) -> SheafMorphism {
        SheafMorphism {
            maps: self.maps.iter().zip(&then.maps).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.compose(y)).collect()).collect(),
        }
    }

    /// Homomorphism law on every face and commutation with every restriction.
    pub fn validate(&self, src: &GroupSheaf, tgt: &GroupSheaf) -> Vec<Violation> {
        let nerve = &src.nerve;
        let mut out = Vec::new();
        for d in 0..=nerve.dim() {
            for i in 0..nerve.count(d) {
                if let Err(e) = self.maps[d][i].validate(src.group(d, i), tgt.group(d, i)) {
                    out.push(Violation { face: nerve.face(d, i).to_vec(), subface: nerve.face(d, i).to_vec(), detail: e.to_string() });
                }
            }
        }
        for d in 1..=nerve.dim() {
            for i in 0..nerve.count(d) {
                for (m, &fi) in nerve.facets(d, i).iter().enumerate() {
                    let bad = src.group(d - 1, fi).elements().find(|&x| {
                        tgt.restrict(d, i, m, self.apply(d - 1, fi, x)) != self.apply(d, i, src.restrict(d, i, m, x))
                    });
                    if let Some(x) = bad {
                        out.push(Violation {
                            face: nerve.face(d, i).to_vec(),
                            subface: nerve.face(d - 1, fi).to_vec(),
                            detail: format!("morphism does not commute with restriction at element {x}"),
                        });
                    }
                }
            }
        }
        out
    }
}

/// Pointwise quotient `F/N` with its projection.
pub fn quotient_sheaf(f: &GroupSheaf, n: &SubSheaf) -> Result<(GroupSheaf, SheafMorphism)> {
    let nerve = f.nerve.clone();
    let mut groups = Vec::new();
    let mut proj = Vec::new();
    let mut all_cosets = Vec::new();
    for d in 0..=MAX_DIM {
        let mut gl = Vec::new();
        let mut pl = Vec::new();
        let mut cl = Vec::new();
        for i in 0..nerve.count(d) {
            let g = f.group(d, i);
            if let Some((s, x)) = normality_witness(g, n.at(d, i))? {
                return Err(structural(format!(
                    "sub-sheaf not normal on face {:?} ({s} conjugates {x} out)",
                    nerve.face(d, i)
                )));
            }
            let (q, pi) = crate::groups::quotient(g, n.at(d, i))?;
            gl.push(Arc::new(q));
            pl.push(pi);
            cl.push(cosets(g, n.at(d, i)));
        }
        groups.push(gl);
        proj.push(pl);
        all_cosets.push(cl);
    }
    let mut restr = vec![Vec::new(); MAX_DIM + 1];
    for d in 0..=MAX_DIM {
        for i in 0..nerve.count(d) {
            if d == 0 {
                restr[d].push(Vec::new());
                continue;
            }
            let mut per = Vec::new();
            for (m, &fi) in nerve.facets(d, i).iter().enumerate() {
                let reps = &all_cosets[d - 1][fi].reps;
                let map: Vec<Elem> = reps.iter().map(|&r| proj[d][i].apply(f.restrict(d, i, m, r))).collect();
                // independence of the representative
                for x in f.group(d - 1, fi).elements() {
                    let via_rep = map[proj[d - 1][fi].apply(x) as usize];
                    if via_rep != proj[d][i].apply(f.restrict(d, i, m, x)) {
                        return Err(structural(format!(
                            "induced restriction {:?} -> {:?} depends on the representative",
                            nerve.face(d - 1, fi),
                            nerve.face(d, i)
                        )));
                    }
                }
                per.push(GroupHom { map });
            }
            restr[d].push(per);
        }
    }
    Ok((GroupSheaf { nerve, groups, restr }, SheafMorphism { maps: proj }))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct GreenParams {
    pub p: u64,
    pub q: usize,
    pub n: usize,
}

/// Bookkeeping attached to a series: grade of term 0 and the Green flag.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SeriesTag {
    pub name: String,
    pub grade_offset: usize,
    pub green: Option<GreenParams>,
}

/// `H_0 = F ⊇ H_1 ⊇ ... ⊇ H_N` (pointwise trivial), each term pointwise normal in `F`.
#[derive(Debug, Clone)]
pub struct SheafSeries {
    pub ambient: Arc<GroupSheaf>,
    pub terms: Vec<SubSheaf>,
    pub tag: SeriesTag,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeriesChecks {
    pub aq_degree: usize,
    pub central: bool,
    /// Sheaf-wide witness per index (entry 0 unused).
    pub witnesses: Vec<Option<usize>>,
    /// Pointwise degree is the same on every face.
    pub degree_constant: bool,
}

impl SheafSeries {
    pub fn new(ambient: Arc<GroupSheaf>, terms: Vec<SubSheaf>, tag: SeriesTag) -> Result<Self> {
        if terms.is_empty() {
            return Err(input("series needs terms"));
        }
        let s = SheafSeries { ambient, terms, tag };
        let nerve = &s.ambient.nerve;
        for d in 0..=nerve.dim() {
            for i in 0..nerve.count(d) {
                s.pointwise(d, i).map_err(|e| {
                    structural(format!("on face {:?}: {e}", nerve.face(d, i)))
                })?;
            }
        }
        Ok(s)
    }

    pub fn length(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn nerve(&self) -> &Arc<Nerve> {
        &self.ambient.nerve
    }

    pub fn term(&self, j: usize) -> &SubSheaf {
        &self.terms[j.min(self.length())]
    }

    pub fn pointwise(&self, d: usize, i: usize) -> Result<NormalSeries> {
        let g = self.ambient.groups[d][i].clone();
        NormalSeries::new(g, self.terms.iter().map(|t| t.at(d, i).clone()).collect())
    }

    pub fn checks(&self) -> Result<SeriesChecks> {
        let nerve = self.nerve();
        let n = self.length();
        let mut degree = usize::MAX;
        let mut degrees = Vec::new();
        let mut witnesses: Vec<Option<usize>> = vec![Some(0); n];
        if n > 0 {
            witnesses[0] = None;
        }
        let mut central = true;
        for d in 0..=nerve.dim() {
            for i in 0..nerve.count(d) {
                let s = self.pointwise(d, i)?;
                let deg = aq_degree(&s);
                degrees.push(deg);
                degree = degree.min(deg);
                if deg == 0 {
                    central = false;
                    continue;
                }
                let cert = is_central_series(&s)?;
                for j in 1..n {
                    match (cert.witnesses[j], witnesses[j]) {
                        (Some(k), Some(w)) => witnesses[j] = Some(w.max(k)),
                        _ => witnesses[j] = None,
                    }
                }
            }
        }
        if degree == usize::MAX {
            degree = n;
        }
        if degree == 0 {
            witnesses = vec![None; n];
        }
        central &= degree > 0 && witnesses.iter().skip(1).all(Option::is_some);
        let degree_constant = degrees.windows(2).all(|w| w[0] == w[1]);
        Ok(SeriesChecks { aq_degree: degree, central, witnesses, degree_constant })
    }
}

/// Free function form of [`SheafSeries::checks`].
pub fn sheaf_series_checks(s: &SheafSeries) -> Result<SeriesChecks> {
    s.checks()
}

/// Free function form of [`GroupSheaf::validate`].
pub fn validate_sheaf(f: &GroupSheaf) -> Vec<Violation> {
    f.validate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::lower_central_series;

    #[test]
    fn bundled_nerves_have_expected_shape() {
        let c = Nerve::cycle(3).unwrap();
        assert_eq!((c.count(0), c.count(1), c.count(2)), (3, 3, 0));
        let b = Nerve::simplex(3, false).unwrap();
        assert_eq!((b.count(0), b.count(1), b.count(2), b.count(3)), (4, 6, 4, 0));
        let s = Nerve::simplex(3, true).unwrap();
        assert_eq!(s.count(3), 1);
        let r = Nerve::rp2_min();
        assert_eq!((r.count(0), r.count(1), r.count(2)), (6, 15, 10));
        assert_eq!(r.euler_characteristic(), 1);
        assert_eq!(b.euler_characteristic(), 2);
        assert!(r.is_connected());
        // facets omit vertices in order
        let (d, i) = r.index_of(&[1, 2, 4]).unwrap();
        let omitted: Vec<Vec<u32>> = r.facets(d, i).iter().map(|&f| r.face(1, f).to_vec()).collect();
        assert_eq!(omitted, vec![vec![2, 4], vec![1, 4], vec![1, 2]]);
    }

    #[test]
    fn barycentric_subdivision_of_cycle() {
        let c = Nerve::cycle(3).unwrap();
        let sd = c.barycentric().unwrap();
        assert_eq!((sd.count(0), sd.count(1)), (6, 6));
        assert_eq!(sd.euler_characteristic(), 0);
    }

    #[test]
    fn constant_sheaf_validates() {
        let n = Arc::new(Nerve::rp2_min());
        let f = GroupSheaf::constant(n, Arc::new(FiniteGroup::quaternion8()));
        assert!(f.validate().is_empty());
    }

    #[test]
    fn broken_square_is_reported_once() {
        let n = Arc::new(Nerve::simplex(2, true).unwrap());
        let g = Arc::new(FiniteGroup::cyclic(3).unwrap());
        let mut f = GroupSheaf::constant(n.clone(), g);
        // twist the restriction from edge (1,2) into the triangle by negation
        let (_, t) = n.index_of(&[0, 1, 2]).unwrap();
        f.restr[2][t][0] = GroupHom { map: vec![0, 2, 1] };
        let v = f.validate();
        assert_eq!(v.len(), 2, "{v:?}");
        assert!(v.iter().all(|x| x.face == vec![0, 1, 2]));
        assert!(v.iter().any(|x| x.subface == vec![1]) && v.iter().any(|x| x.subface == vec![2]));
    }

    #[test]
    fn quotient_of_constant_z4_by_two() {
        let n = Arc::new(Nerve::cycle(4).unwrap());
        let f = GroupSheaf::constant(n, Arc::new(FiniteGroup::cyclic(4).unwrap()));
        let sub = SubSheaf::constant(&f, &[0, 2]).unwrap();
        let (q, pi) = quotient_sheaf(&f, &sub).unwrap();
        assert!(q.validate().is_empty());
        assert!(pi.validate(&f, &q).is_empty());
        assert!(q.groups.iter().flatten().all(|g| g.order() == 2));
        let (t, _) = quotient_sheaf(&f, &SubSheaf::whole(&f)).unwrap();
        assert!(t.groups.iter().flatten().all(|g| g.order() == 1));
    }

    #[test]
    fn heisenberg_series_checks() {
        let n = Arc::new(Nerve::cycle(3).unwrap());
        let h = Arc::new(FiniteGroup::heisenberg(3).unwrap());
        let lcs = lower_central_series(h.clone()).unwrap();
        let f = Arc::new(GroupSheaf::constant(n, h));
        let terms = lcs.terms.iter().map(|t| SubSheaf::constant(&f, &t.members).unwrap()).collect();
        let s = SheafSeries::new(f, terms, SeriesTag::default()).unwrap();
        let c = s.checks().unwrap();
        assert_eq!(c.aq_degree, 1);
        assert!(c.central);
        assert!(c.degree_constant);
        assert_eq!(c.witnesses, vec![None, Some(0)]);
    }

    #[test]
    fn tabulated_subsheaf_is_a_sheaf() {
        let n = Arc::new(Nerve::rp2_min());
        let f = GroupSheaf::constant(n, Arc::new(FiniteGroup::dihedral(4).unwrap()));
        let sub = SubSheaf::constant(&f, &[0, 1, 2, 3]).unwrap();
        let (h, incl) = sub.tabulate(&f);
        assert!(h.validate().is_empty());
        assert!(incl.validate(&h, &f).is_empty());
    }
}
