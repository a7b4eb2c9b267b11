//! Čech cochains on tabulated sheaves: global sections, nonabelian Ȟ¹ by
//! orbit enumeration, abelian cohomology through coordinates, and the
//! connecting maps of an extension of sheaves.
//!
//! 1-cocycle convention: on a triangle `[a, b, c]`, `g_ac = g_ab · g_bc`
//! after restriction. The coboundary action of a 0-cochain `h` is
//! `g_ab ↦ h_a · g_ab · h_b⁻¹`.

use std::sync::Arc;

use serde::Serialize;

use crate::abelian::{AbCohomology, AbSheaf, Decomposition};
use crate::error::{input, structural, unsupported, Result};
use crate::exec::{map_range, Ctx};
use crate::groups::{generating_set, Elem, FiniteGroup, MAX_TABLE};
use crate::sites::{GroupSheaf, SheafMorphism};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Cochain {
    pub degree: usize,
    pub values: Vec<Elem>,
}

impl Cochain {
    pub fn identity(f: &GroupSheaf, degree: usize) -> Self {
        Cochain { degree, values: vec![0; f.nerve.count(degree)] }
    }

    pub fn is_identity(&self) -> bool {
        self.values.iter().all(|&x| x == 0)
    }
}

/// Edge `[a, b]`: restriction of a vertex value from `a` (position 1) and from `b` (position 0).
#[inline]
fn from_head(f: &GroupSheaf, e: usize, x: Elem) -> Elem {
    f.restrict(1, e, 1, x)
}

#[inline]
fn from_tail(f: &GroupSheaf, e: usize, x: Elem) -> Elem {
    f.restrict(1, e, 0, x)
}

pub fn is_cocycle0(f: &GroupSheaf, h: &[Elem]) -> bool {
    let nerve = &f.nerve;
    (0..nerve.count(1)).all(|e| {
        let fs = nerve.facets(1, e);
        from_head(f, e, h[fs[1]]) == from_tail(f, e, h[fs[0]])
    })
}

pub fn is_cocycle1(f: &GroupSheaf, g: &[Elem]) -> bool {
    let nerve = &f.nerve;
    (0..nerve.count(2)).all(|t| {
        let fs = nerve.facets(2, t);
        let grp = f.group(2, t);
        let ab = f.restrict(2, t, 2, g[fs[2]]);
        let bc = f.restrict(2, t, 0, g[fs[0]]);
        let ac = f.restrict(2, t, 1, g[fs[1]]);
        grp.mul(ab, bc) == ac
    })
}

/// `g_ab ↦ h_a g_ab h_b⁻¹`.
pub fn act0(f: &GroupSheaf, h: &[Elem], g: &[Elem]) -> Vec<Elem> {
    let nerve = &f.nerve;
    (0..nerve.count(1))
        .map(|e| {
            let fs = nerve.facets(1, e);
            let grp = f.group(1, e);
            let ha = from_head(f, e, h[fs[1]]);
            let hb = from_tail(f, e, h[fs[0]]);
            grp.mul(grp.mul(ha, g[e]), grp.inv(hb))
        })
        .collect()
}

/// Global sections in lexicographic order; the identity section comes first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Sections {
    pub values: Vec<Vec<Elem>>,
}

impl Sections {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn index_of(&self, s: &[Elem]) -> Option<usize> {
        self.values.binary_search_by(|v| v.as_slice().cmp(s)).ok()
    }

    pub fn mul(&self, f: &GroupSheaf, a: usize, b: usize) -> usize {
        let v: Vec<Elem> = (0..f.nerve.count(0))
            .map(|i| f.group(0, i).mul(self.values[a][i], self.values[b][i]))
            .collect();
        self.index_of(&v).expect("sections are closed")
    }

    /// The section group as a Cayley table.
    pub fn group(&self, f: &GroupSheaf) -> Result<FiniteGroup> {
        let n = self.len();
        if n > MAX_TABLE {
            return Err(unsupported(format!("{n} global sections exceed the table cap")));
        }
        let rows: Vec<Vec<Elem>> = (0..n).map(|a| (0..n).map(|b| self.mul(f, a, b) as Elem).collect()).collect();
        FiniteGroup::from_table("H0", &rows)
    }
}

/// `H⁰`: tuples of vertex values agreeing on every edge, by backtracking.
pub fn h0(ctx: &Ctx, f: &GroupSheaf) -> Result<Sections> {
    let nerve = &f.nerve;
    let nv = nerve.count(0);
    // edges grouped by their larger vertex
    let mut back: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nv];
    for e in 0..nerve.count(1) {
        let fs = nerve.facets(1, e);
        back[fs[0]].push((e, fs[1]));
    }
    let mut out = Vec::new();
    let mut cur = vec![0 as Elem; nv];
    let mut visited: u128 = 0;
    fn go(
        f: &GroupSheaf,
        back: &[Vec<(usize, usize)>],
        v: usize,
        cur: &mut Vec<Elem>,
        out: &mut Vec<Vec<Elem>>,
        visited: &mut u128,
        ctx: &Ctx,
    ) -> Result<()> {
        if v == cur.len() {
            out.push(cur.clone());
            return Ok(());
        }
        for x in f.group(0, v).elements() {
            *visited += 1;
            if *visited > ctx.budget as u128 {
                ctx.check("global sections", *visited)?;
            }
            let ok = back[v].iter().all(|&(e, a)| from_head(f, e, cur[a]) == from_tail(f, e, x));
            if ok {
                cur[v] = x;
                go(f, back, v + 1, cur, out, visited, ctx)?;
            }
        }
        Ok(())
    }
    go(f, &back, 0, &mut cur, &mut out, &mut visited, ctx)?;
    Ok(Sections { values: out })
}

/// Nonabelian Ȟ¹ with lexicographically minimal representatives.
#[derive(Debug, Clone)]
pub struct H1 {
    radices: Vec<u128>,
    cocycles: Vec<u128>,
    labels: Vec<u32>,
    /// Canonical representatives; class 0 is the base point.
    pub classes: Vec<Cochain>,
    pub orbit_sizes: Vec<u64>,
}

impl H1 {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn cocycle_count(&self) -> usize {
        self.cocycles.len()
    }

    fn encode(&self, g: &[Elem]) -> u128 {
        encode(&self.radices, g)
    }

    pub fn class_of(&self, g: &Cochain) -> Result<usize> {
        if g.degree != 1 || g.values.len() != self.radices.len() {
            return Err(structural("not a 1-cochain of this sheaf"));
        }
        let idx = self.encode(&g.values);
        match self.cocycles.binary_search(&idx) {
            Ok(k) => Ok(self.labels[k] as usize),
            Err(_) => Err(structural("cochain is not a cocycle")),
        }
    }

    pub fn canonical(&self, g: &Cochain) -> Result<&Cochain> {
        Ok(&self.classes[self.class_of(g)?])
    }

    /// All cocycles, ascending (lexicographic) order.
    pub fn cocycle_values(&self) -> impl Iterator<Item = Vec<Elem>> + '_ {
        self.cocycles.iter().map(|&i| decode(&self.radices, i))
    }
}

fn encode(radices: &[u128], g: &[Elem]) -> u128 {
    g.iter().zip(radices).fold(0u128, |acc, (&x, &r)| acc * r + x as u128)
}

fn decode(radices: &[u128], mut idx: u128) -> Vec<Elem> {
    let mut out = vec![0 as Elem; radices.len()];
    for (k, &r) in radices.iter().enumerate().rev() {
        out[k] = (idx % r) as Elem;
        idx /= r;
    }
    out
}

/// Size of the 1-cochain search space (saturating).
pub fn h1_candidates(f: &GroupSheaf) -> u128 {
    (0..f.nerve.count(1)).fold(1u128, |acc, e| acc.saturating_mul(f.group(1, e).order() as u128))
}

/// Cocycles in lexicographic order. Edges are visited in an order where
/// each new edge, when possible, closes a triangle whose other two edges are
/// set, so its value is confined to a preimage; every triangle is checked
/// once all three edges are set. Branches on the first edge run in parallel.
fn enumerate_cocycles(ctx: &Ctx, f: &GroupSheaf) -> Result<Vec<Vec<Elem>>> {
    let nerve = &f.nerve;
    let ne = nerve.count(1);
    if ne == 0 {
        return Ok(vec![Vec::new()]);
    }
    let tris: Vec<[usize; 3]> = (0..nerve.count(2))
        .map(|t| {
            let fs = nerve.facets(2, t);
            [fs[0], fs[1], fs[2]]
        })
        .collect();
    // visiting order and, per depth, the determining (triangle, position)
    let mut order = Vec::with_capacity(ne);
    let mut det: Vec<Option<(usize, usize)>> = Vec::with_capacity(ne);
    let mut placed = vec![false; ne];
    while order.len() < ne {
        let pick = (0..ne).filter(|&e| !placed[e]).find_map(|e| {
            tris.iter().enumerate().find_map(|(t, fs)| {
                let m = fs.iter().position(|&x| x == e)?;
                fs.iter().enumerate().all(|(j, &x)| j == m || placed[x]).then_some((e, Some((t, m))))
            })
        });
        let (e, d) = pick.unwrap_or_else(|| ((0..ne).find(|&e| !placed[e]).expect("edge left"), None));
        placed[e] = true;
        order.push(e);
        det.push(d);
    }
    let mut depth_of = vec![0; ne];
    for (k, &e) in order.iter().enumerate() {
        depth_of[e] = k;
    }
    let mut closing: Vec<Vec<usize>> = vec![Vec::new(); ne];
    for (t, fs) in tris.iter().enumerate() {
        closing[fs.iter().map(|&e| depth_of[e]).max().expect("edges")].push(t);
    }
    // preimages of triangle values under each edge restriction
    let pre: Vec<[Vec<Vec<Elem>>; 3]> = tris
        .iter()
        .enumerate()
        .map(|(t, fs)| {
            std::array::from_fn(|m| {
                let mut lists = vec![Vec::new(); f.group(2, t).order()];
                for x in f.group(1, fs[m]).elements() {
                    lists[f.restrict(2, t, m, x) as usize].push(x);
                }
                lists
            })
        })
        .collect();
    let tri_ok = |t: usize, g: &[Elem]| {
        let fs = &tris[t];
        let grp = f.group(2, t);
        let ab = f.restrict(2, t, 2, g[fs[2]]);
        let bc = f.restrict(2, t, 0, g[fs[0]]);
        let ac = f.restrict(2, t, 1, g[fs[1]]);
        grp.mul(ab, bc) == ac
    };
    let all: Vec<Vec<Elem>> = (0..ne).map(|e| f.group(1, e).elements().collect()).collect();
    let candidates = |k: usize, g: &[Elem]| -> Vec<Elem> {
        let e = order[k];
        match det[k] {
            None => all[e].clone(),
            Some((t, m)) => {
                let fs = &tris[t];
                let grp = f.group(2, t);
                let ab = f.restrict(2, t, 2, g[fs[2]]);
                let bc = f.restrict(2, t, 0, g[fs[0]]);
                let ac = f.restrict(2, t, 1, g[fs[1]]);
                let want = match m {
                    0 => grp.mul(grp.inv(ab), ac),
                    1 => grp.mul(ab, bc),
                    _ => grp.mul(ac, grp.inv(bc)),
                };
                pre[t][m][want as usize].clone()
            }
        }
    };
    let budget = ctx.budget;
    let first = order[0];
    let branch = |x0: usize| -> (Vec<Vec<Elem>>, u64, bool) {
        let mut out = Vec::new();
        let mut g = vec![0 as Elem; ne];
        g[first] = x0 as Elem;
        let mut nodes = 1u64;
        if !closing[0].iter().all(|&t| tri_ok(t, &g)) {
            return (out, nodes, false);
        }
        if ne == 1 {
            out.push(g);
            return (out, nodes, false);
        }
        let mut stack: Vec<(Vec<Elem>, usize)> = vec![(candidates(1, &g), 0)];
        while !stack.is_empty() {
            let k = stack.len();
            let (cands, pos) = stack.last_mut().expect("nonempty");
            if *pos >= cands.len() {
                stack.pop();
                continue;
            }
            g[order[k]] = cands[*pos];
            *pos += 1;
            nodes += 1;
            if nodes > budget {
                return (out, nodes, true);
            }
            if closing[k].iter().all(|&t| tri_ok(t, &g)) {
                if k + 1 == ne {
                    out.push(g.clone());
                } else {
                    let c = candidates(k + 1, &g);
                    stack.push((c, 0));
                }
            }
        }
        (out, nodes, false)
    };
    let parts = map_range(ctx, f.group(1, first).order(), branch);
    let visited: u128 = parts.iter().map(|p| p.1 as u128).sum();
    if parts.iter().any(|p| p.2) || visited > budget as u128 {
        return Err(crate::Error::Resource {
            what: "nonabelian H1 cochains".into(),
            needed: h1_candidates(f),
            budget,
        });
    }
    let mut out: Vec<Vec<Elem>> = parts.into_iter().flat_map(|p| p.0).collect();
    out.sort_unstable();
    Ok(out)
}

pub fn h1_nonabelian(ctx: &Ctx, f: &GroupSheaf) -> Result<H1> {
    let nerve = &f.nerve;
    let ne = nerve.count(1);
    let total = (0..ne).try_fold(1u128, |acc, e| acc.checked_mul(f.group(1, e).order() as u128));
    if total.is_none() {
        return Err(unsupported("1-cochain space does not fit a 128-bit index"));
    }
    let radices: Vec<u128> = (0..ne).map(|e| f.group(1, e).order() as u128).collect();
    let cocycles: Vec<u128> = enumerate_cocycles(ctx, f)?.iter().map(|g| encode(&radices, g)).collect();
    // 0-cochain generators: one vertex at a time
    let mut gens: Vec<Vec<Elem>> = Vec::new();
    for v in 0..nerve.count(0) {
        let g = f.group(0, v);
        let all: Vec<Elem> = g.elements().collect();
        for s in generating_set(g, &all) {
            let mut h = vec![0 as Elem; nerve.count(0)];
            h[v] = s;
            gens.push(h);
        }
    }
    const UNSET: u32 = u32::MAX;
    let mut labels = vec![UNSET; cocycles.len()];
    let mut classes = Vec::new();
    let mut orbit_sizes = Vec::new();
    let enc = |g: &[Elem]| encode(&radices, g);
    for start in 0..cocycles.len() {
        if labels[start] != UNSET {
            continue;
        }
        let id = classes.len() as u32;
        classes.push(Cochain { degree: 1, values: decode(&radices, cocycles[start]) });
        labels[start] = id;
        let mut queue = vec![start];
        let mut size = 0u64;
        while let Some(k) = queue.pop() {
            size += 1;
            let g = decode(&radices, cocycles[k]);
            for h in &gens {
                let y = enc(&act0(f, h, &g));
                let pos = cocycles.binary_search(&y).map_err(|_| structural("coboundary action left the cocycles"))?;
                if labels[pos] == UNSET {
                    labels[pos] = id;
                    queue.push(pos);
                }
            }
        }
        orbit_sizes.push(size);
    }
    Ok(H1 { radices, cocycles, labels, classes, orbit_sizes })
}

/// A pointwise abelian table sheaf together with its coordinate form.
#[derive(Debug, Clone)]
pub struct AbelianView {
    pub ab: AbSheaf,
    pub decs: Vec<Vec<Decomposition>>,
}

impl AbelianView {
    pub fn new(f: &GroupSheaf) -> Result<Self> {
        let (ab, decs) = AbSheaf::from_group_sheaf(f)?;
        Ok(AbelianView { ab, decs })
    }

    pub fn to_flat(&self, c: &Cochain) -> Vec<u64> {
        c.values.iter().enumerate().flat_map(|(i, &x)| self.decs[c.degree][i].coords(x).to_vec()).collect()
    }

    pub fn from_flat(&self, degree: usize, x: &[u64]) -> Cochain {
        let values = (0..self.ab.nerve.count(degree))
            .map(|i| {
                let off = self.ab.offset(degree, i);
                self.decs[degree][i].elem(&x[off..off + self.ab.dim_at(degree, i)])
            })
            .collect();
        Cochain { degree, values }
    }

    pub fn cohomology(&self, n: usize) -> Result<AbCohomology> {
        self.ab.cohomology(n)
    }
}

/// `H²` of a pointwise abelian sheaf, with explicit cocycle generators.
pub fn h2_abelian(f: &GroupSheaf) -> Result<(AbelianView, AbCohomology)> {
    if !f.is_pointwise_abelian() {
        return Err(input("H2 needs a pointwise abelian sheaf"));
    }
    let view = AbelianView::new(f)?;
    let h = view.cohomology(2)?;
    Ok((view, h))
}

/// `0 → A → B → C → 1` on every face, with lookup tables for lifts.
#[derive(Debug, Clone)]
pub struct Extension {
    pub a: Arc<GroupSheaf>,
    pub b: Arc<GroupSheaf>,
    pub c: Arc<GroupSheaf>,
    pub incl: SheafMorphism,
    pub proj: SheafMorphism,
    /// Image of `A` central in `B` on every face.
    pub central: bool,
    lift: Vec<Vec<Vec<Elem>>>,
    back: Vec<Vec<Vec<Option<Elem>>>>,
}

impl Extension {
    pub fn new(a: Arc<GroupSheaf>, b: Arc<GroupSheaf>, c: Arc<GroupSheaf>, incl: SheafMorphism, proj: SheafMorphism) -> Result<Self> {
        for (name, v) in [("inclusion", incl.validate(&a, &b)), ("projection", proj.validate(&b, &c))] {
            if let Some(x) = v.first() {
                return Err(structural(format!("{name} is not a sheaf morphism: {x:?}")));
            }
        }
        let nerve = b.nerve.clone();
        let mut lift = Vec::new();
        let mut back = Vec::new();
        let mut central = true;
        for d in 0..=crate::sites::MAX_DIM {
            let mut ll = Vec::new();
            let mut bl = Vec::new();
            for i in 0..nerve.count(d) {
                let (ga, gb, gc) = (a.group(d, i), b.group(d, i), c.group(d, i));
                let mut pre = vec![None; gb.order()];
                for x in ga.elements() {
                    let y = incl.apply(d, i, x);
                    if pre[y as usize].is_some() {
                        return Err(structural(format!("inclusion not injective on {:?}", nerve.face(d, i))));
                    }
                    pre[y as usize] = Some(x);
                }
                let mut l: Vec<Option<Elem>> = vec![None; gc.order()];
                for y in gb.elements() {
                    let z = proj.apply(d, i, y);
                    if (z == 0) != pre[y as usize].is_some() {
                        return Err(structural(format!("not exact at the middle on {:?}", nerve.face(d, i))));
                    }
                    if l[z as usize].is_none() {
                        l[z as usize] = Some(y);
                    }
                }
                let l: Vec<Elem> = l
                    .into_iter()
                    .collect::<Option<_>>()
                    .ok_or_else(|| structural(format!("projection not surjective on {:?}", nerve.face(d, i))))?;
                let gens: Vec<Elem> = generating_set(gb, &gb.elements().collect::<Vec<_>>());
                central &= ga.elements().all(|x| {
                    let y = incl.apply(d, i, x);
                    gens.iter().all(|&s| gb.mul(s, y) == gb.mul(y, s))
                });
                ll.push(l);
                bl.push(pre);
            }
            lift.push(ll);
            back.push(bl);
        }
        Ok(Extension { a, b, c, incl, proj, central, lift, back })
    }

    /// Least preimage in `B` of a `C` value.
    pub fn least_lift(&self, d: usize, i: usize, z: Elem) -> Elem {
        self.lift[d][i][z as usize]
    }

    pub fn to_a(&self, d: usize, i: usize, y: Elem) -> Option<Elem> {
        self.back[d][i][y as usize]
    }

    fn vertex_lifts(&self, section: &[Elem]) -> Result<Vec<Elem>> {
        if section.len() != self.c.nerve.count(0) || !is_cocycle0(&self.c, section) {
            return Err(input("not a global section of the quotient sheaf"));
        }
        Ok(section.iter().enumerate().map(|(i, &z)| self.least_lift(0, i, z)).collect())
    }

    /// `a_ab = g_a a_ab g_b⁻¹` for the lifts `g` of a section.
    fn twist(&self, g: &[Elem], a: &[Elem]) -> Result<Cochain> {
        let (bs, nerve) = (&*self.b, &self.b.nerve);
        let values = (0..nerve.count(1))
            .map(|e| {
                let fs = nerve.facets(1, e);
                let grp = bs.group(1, e);
                let ga = from_head(bs, e, g[fs[1]]);
                let gb = from_tail(bs, e, g[fs[0]]);
                let y = grp.mul(grp.mul(ga, self.incl.apply(1, e, a[e])), grp.inv(gb));
                self.to_a(1, e, y).ok_or_else(|| structural("twisted cochain left the subsheaf"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Cochain { degree: 1, values })
    }
}

/// `c ↦ (g_a g_b⁻¹)` with `g` the least lifts of `c`.
pub fn connecting_delta1(ext: &Extension, section: &[Elem]) -> Result<Cochain> {
    let g = ext.vertex_lifts(section)?;
    ext.twist(&g, &vec![0; ext.a.nerve.count(1)])
}

/// `(c ⋆ a)_ab = g_a a_ab g_b⁻¹`.
pub fn star_action(ext: &Extension, section: &[Elem], a: &Cochain) -> Result<Cochain> {
    let g = ext.vertex_lifts(section)?;
    ext.twist(&g, &a.values)
}

/// Triangle defect `r(b_ab) r(b_bc) r(b_ac)⁻¹` of the least edge lifts, as an `A`-valued 2-cochain.
pub fn connecting_delta2(ext: &Extension, t: &Cochain) -> Result<Cochain> {
    if !ext.central {
        return Err(structural("the second connecting map needs a central extension"));
    }
    if !is_cocycle1(&ext.c, &t.values) {
        return Err(input("not a 1-cocycle of the quotient sheaf"));
    }
    let (bs, nerve) = (&*ext.b, &ext.b.nerve);
    let lifts: Vec<Elem> = t.values.iter().enumerate().map(|(e, &z)| ext.least_lift(1, e, z)).collect();
    let values = (0..nerve.count(2))
        .map(|tr| {
            let fs = nerve.facets(2, tr);
            let grp = bs.group(2, tr);
            let ab = bs.restrict(2, tr, 2, lifts[fs[2]]);
            let bc = bs.restrict(2, tr, 0, lifts[fs[0]]);
            let ac = bs.restrict(2, tr, 1, lifts[fs[1]]);
            let w = grp.mul(grp.mul(ab, bc), grp.inv(ac));
            ext.to_a(2, tr, w).ok_or_else(|| structural("triangle defect outside the kernel"))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Cochain { degree: 2, values })
}

/// Face-wise image of a cochain.
pub fn induced_h1(phi: &SheafMorphism, t: &Cochain) -> Cochain {
    let d = t.degree;
    Cochain { degree: d, values: t.values.iter().enumerate().map(|(i, &x)| phi.apply(d, i, x)).collect() }
}

/// Class of `δ¹(c)` is independent of the vertex lifts: every single-vertex change by `A` is tried.
pub fn audit_delta1_lifts(ext: &Extension, h1a: &H1, section: &[Elem]) -> Result<bool> {
    let base = h1a.class_of(&connecting_delta1(ext, section)?)?;
    let g = ext.vertex_lifts(section)?;
    for v in 0..g.len() {
        for x in ext.a.group(0, v).elements() {
            let mut g2 = g.clone();
            g2[v] = ext.b.group(0, v).mul(ext.incl.apply(0, v, x), g2[v]);
            let c = ext.twist(&g2, &vec![0; ext.a.nerve.count(1)])?;
            if h1a.class_of(&c)? != base {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Class of `δ²(t)` is independent of the edge lifts: every single-edge change by `A` is tried.
pub fn audit_delta2_lifts(ext: &Extension, view: &AbelianView, h2: &AbCohomology, t: &Cochain) -> Result<bool> {
    let base = h2.index_of(&view.to_flat(&connecting_delta2(ext, t)?))?;
    let nerve = &ext.b.nerve;
    let (bs, a) = (&*ext.b, &*ext.a);
    for e in 0..nerve.count(1) {
        for x in a.group(1, e).elements() {
            let mut lifts: Vec<Elem> = t.values.iter().enumerate().map(|(k, &z)| ext.least_lift(1, k, z)).collect();
            lifts[e] = bs.group(1, e).mul(ext.incl.apply(1, e, x), lifts[e]);
            let values = (0..nerve.count(2))
                .map(|tr| {
                    let fs = nerve.facets(2, tr);
                    let grp = bs.group(2, tr);
                    let ab = bs.restrict(2, tr, 2, lifts[fs[2]]);
                    let bc = bs.restrict(2, tr, 0, lifts[fs[0]]);
                    let ac = bs.restrict(2, tr, 1, lifts[fs[1]]);
                    ext.to_a(2, tr, grp.mul(grp.mul(ab, bc), grp.inv(ac))).expect("kernel")
                })
                .collect();
            let c = Cochain { degree: 2, values };
            if h2.index_of(&view.to_flat(&c))? != base {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sites::{quotient_sheaf, Nerve, SubSheaf};

    fn constant(n: Nerve, g: FiniteGroup) -> GroupSheaf {
        GroupSheaf::constant(Arc::new(n), Arc::new(g))
    }

    /// Constant `Z/2 → Z/4 → Z/2` on a nerve.
    fn bockstein(n: Nerve) -> Extension {
        let b = constant(n, FiniteGroup::cyclic(4).unwrap());
        let sub = SubSheaf::constant(&b, &[0, 2]).unwrap();
        let (a, incl) = sub.tabulate(&b);
        let (c, proj) = quotient_sheaf(&b, &sub).unwrap();
        Extension::new(Arc::new(a), Arc::new(b), Arc::new(c), incl, proj).unwrap()
    }

    #[test]
    fn h1_counts_on_cycle() {
        let ctx = Ctx::default();
        let triv = constant(Nerve::cycle(3).unwrap(), FiniteGroup::trivial());
        assert_eq!(h1_nonabelian(&ctx, &triv).unwrap().len(), 1);
        let z2 = constant(Nerve::cycle(3).unwrap(), FiniteGroup::cyclic(2).unwrap());
        let h = h1_nonabelian(&ctx, &z2).unwrap();
        assert_eq!(h.len(), 2);
        assert!(h.classes[0].is_identity());
        let z3 = constant(Nerve::cycle(3).unwrap(), FiniteGroup::cyclic(3).unwrap());
        assert_eq!(h1_nonabelian(&ctx, &z3).unwrap().len(), 3);
        // Hom(Z, S3)/conjugacy has 3 classes
        let s3 = constant(Nerve::cycle(3).unwrap(), FiniteGroup::symmetric(3).unwrap());
        assert_eq!(h1_nonabelian(&ctx, &s3).unwrap().len(), 3);
    }

    #[test]
    fn h1_of_rp2_with_s3_counts_homomorphisms() {
        // Hom(Z/2, S3)/conjugacy: identity and the transposition class
        let ctx = Ctx::default();
        let f = constant(Nerve::rp2_min(), FiniteGroup::symmetric(3).unwrap());
        assert_eq!(h1_nonabelian(&ctx, &f).unwrap().len(), 2);
    }

    #[test]
    fn budget_is_enforced() {
        let f = constant(Nerve::rp2_min(), FiniteGroup::cyclic(4).unwrap());
        let err = h1_nonabelian(&Ctx::with_budget(1000), &f).unwrap_err();
        assert!(matches!(err, crate::Error::Resource { .. }));
    }

    #[test]
    fn abelian_and_enumerated_h1_agree() {
        let ctx = Ctx::default();
        for (n, g) in [
            (Nerve::cycle(4).unwrap(), FiniteGroup::cyclic(6).unwrap()),
            (Nerve::rp2_min(), FiniteGroup::cyclic(2).unwrap()),
            (Nerve::simplex(3, false).unwrap(), FiniteGroup::cyclic(3).unwrap()),
        ] {
            let f = constant(n, g);
            let h = h1_nonabelian(&ctx, &f).unwrap();
            let view = AbelianView::new(&f).unwrap();
            let ab = view.cohomology(1).unwrap();
            assert_eq!(h.len() as u128, ab.order());
            // abelian class index is constant on enumerated classes
            for g in h.cocycle_values() {
                let c = Cochain { degree: 1, values: g };
                let k = h.class_of(&c).unwrap();
                let rep = &h.classes[k];
                assert_eq!(ab.index_of(&view.to_flat(&c)).unwrap(), ab.index_of(&view.to_flat(rep)).unwrap());
            }
        }
    }

    #[test]
    fn canonicalisation_is_idempotent_and_orbit_constant() {
        let ctx = Ctx::default();
        let f = constant(Nerve::cycle(3).unwrap(), FiniteGroup::quaternion8());
        let h = h1_nonabelian(&ctx, &f).unwrap();
        for g in h.cocycle_values().step_by(7) {
            let c = Cochain { degree: 1, values: g.clone() };
            let canon = h.canonical(&c).unwrap().clone();
            assert_eq!(h.canonical(&canon).unwrap(), &canon);
            assert!(canon <= c);
            for hv in [vec![2, 0, 0], vec![0, 4, 6], vec![7, 1, 3]] {
                let moved = Cochain { degree: 1, values: act0(&f, &hv, &g) };
                assert_eq!(h.canonical(&moved).unwrap(), &canon);
            }
        }
    }

    #[test]
    fn h0_of_constant_and_degenerate_sheaves() {
        let ctx = Ctx::default();
        let f = constant(Nerve::rp2_min(), FiniteGroup::dihedral(4).unwrap());
        let s = h0(&ctx, &f).unwrap();
        assert_eq!(s.len(), 8);
        assert!(s.values[0].iter().all(|&x| x == 0));
        let g = s.group(&f).unwrap();
        assert!(!g.is_abelian());
        let mut f2 = constant(Nerve::cycle(3).unwrap(), FiniteGroup::cyclic(2).unwrap());
        f2.groups[0][1] = Arc::new(FiniteGroup::trivial());
        for e in 0..3 {
            let fs = f2.nerve.facets(1, e).to_vec();
            for (m, &v) in fs.iter().enumerate() {
                if v == 1 {
                    f2.restr[1][e][m] = crate::groups::GroupHom { map: vec![0] };
                }
            }
        }
        assert!(f2.validate().is_empty());
        assert_eq!(h0(&ctx, &f2).unwrap().len(), 1);
    }

    #[test]
    fn h2_examples() {
        let (_, h) = h2_abelian(&constant(Nerve::rp2_min(), FiniteGroup::cyclic(2).unwrap())).unwrap();
        assert_eq!(h.order(), 2);
        let (_, h) = h2_abelian(&constant(Nerve::simplex(3, true).unwrap(), FiniteGroup::cyclic(2).unwrap())).unwrap();
        assert_eq!(h.order(), 1);
        let (_, h) = h2_abelian(&constant(Nerve::cycle(5).unwrap(), FiniteGroup::cyclic(4).unwrap())).unwrap();
        assert_eq!(h.order(), 1);
        assert!(h2_abelian(&constant(Nerve::cycle(3).unwrap(), FiniteGroup::quaternion8())).is_err());
    }

    #[test]
    fn bockstein_on_rp2() {
        let ctx = Ctx::default();
        let ext = bockstein(Nerve::rp2_min());
        assert!(ext.central);
        let hc = h1_nonabelian(&ctx, &ext.c).unwrap();
        assert_eq!(hc.len(), 2);
        let (view, h2) = h2_abelian(&ext.a).unwrap();
        let zero = connecting_delta2(&ext, &hc.classes[0]).unwrap();
        assert_eq!(h2.index_of(&view.to_flat(&zero)).unwrap(), 0);
        let w = connecting_delta2(&ext, &hc.classes[1]).unwrap();
        assert_eq!(h2.index_of(&view.to_flat(&w)).unwrap(), 1);
        assert!(audit_delta2_lifts(&ext, &view, &h2, &hc.classes[1]).unwrap());
        // anything coming from Z/4 dies
        let hb = h1_nonabelian(&ctx, &ext.b).unwrap();
        for t in &hb.classes {
            let img = induced_h1(&ext.proj, t);
            let w = connecting_delta2(&ext, &img).unwrap();
            assert_eq!(h2.index_of(&view.to_flat(&w)).unwrap(), 0);
        }
    }

    /// `Z/2 → Z/4 → Z/2` on cycle(3) with the sign twist `x ↦ -x` on edge (0,2).
    fn twisted_z4() -> Extension {
        let n = Arc::new(Nerve::cycle(3).unwrap());
        let z4 = Arc::new(FiniteGroup::cyclic(4).unwrap());
        let mut b = GroupSheaf::constant(n.clone(), z4.clone());
        let (_, e) = n.index_of(&[0, 2]).unwrap();
        b.restr[1][e][0] = crate::groups::GroupHom { map: vec![0, 3, 2, 1] };
        assert!(b.validate().is_empty());
        let sub = SubSheaf::constant(&b, &[0, 2]).unwrap();
        let (a, incl) = sub.tabulate(&b);
        let (c, proj) = quotient_sheaf(&b, &sub).unwrap();
        Extension::new(Arc::new(a), Arc::new(b), Arc::new(c), incl, proj).unwrap()
    }

    #[test]
    fn delta1_and_star_on_twisted_z4() {
        let ctx = Ctx::default();
        let ext = twisted_z4();
        let hc0 = h0(&ctx, &ext.c).unwrap();
        let ha = h1_nonabelian(&ctx, &ext.a).unwrap();
        let hb = h1_nonabelian(&ctx, &ext.b).unwrap();
        assert_eq!(hc0.len(), 2);
        let id = connecting_delta1(&ext, &hc0.values[0]).unwrap();
        assert_eq!(ha.class_of(&id).unwrap(), 0);
        let d = connecting_delta1(&ext, &hc0.values[1]).unwrap();
        assert_ne!(ha.class_of(&d).unwrap(), 0);
        let base = Cochain::identity(&ext.a, 1);
        assert_eq!(ha.class_of(&star_action(&ext, &hc0.values[1], &base).unwrap()).unwrap(), ha.class_of(&d).unwrap());
        assert!(audit_delta1_lifts(&ext, &ha, &hc0.values[1]).unwrap());
        // fibres of H1(A) -> H1(B) are the star orbits
        for (i, x) in ha.classes.iter().enumerate() {
            for (j, y) in ha.classes.iter().enumerate() {
                let same_image = hb.class_of(&induced_h1(&ext.incl, x)).unwrap()
                    == hb.class_of(&induced_h1(&ext.incl, y)).unwrap();
                let related = hc0.values.iter().any(|c| ha.class_of(&star_action(&ext, c, x).unwrap()).unwrap() == j);
                assert_eq!(same_image, related, "classes {i} {j}");
            }
        }
    }

    #[test]
    fn pointed_exactness_on_twisted_z4() {
        let ctx = Ctx::default();
        let ext = twisted_z4();
        let ha = h1_nonabelian(&ctx, &ext.a).unwrap();
        let hb = h1_nonabelian(&ctx, &ext.b).unwrap();
        let hc = h1_nonabelian(&ctx, &ext.c).unwrap();
        // image of H1(A) equals the kernel of H1(B) -> H1(C)
        let mut image: Vec<usize> = ha.classes.iter().map(|x| hb.class_of(&induced_h1(&ext.incl, x)).unwrap()).collect();
        image.sort_unstable();
        image.dedup();
        let kernel: Vec<usize> =
            (0..hb.len()).filter(|&k| hc.class_of(&induced_h1(&ext.proj, &hb.classes[k])).unwrap() == 0).collect();
        assert_eq!(image, kernel);
    }

    #[test]
    fn search_matches_brute_force() {
        let ctx = Ctx::default();
        for f in [
            constant(Nerve::rp2_min(), FiniteGroup::cyclic(2).unwrap()),
            constant(Nerve::simplex(3, false).unwrap(), FiniteGroup::symmetric(3).unwrap()),
        ] {
            let h = h1_nonabelian(&ctx, &f).unwrap();
            let radices: Vec<u128> = (0..f.nerve.count(1)).map(|e| f.group(1, e).order() as u128).collect();
            let brute: Vec<Vec<Elem>> =
                (0..h1_candidates(&f)).map(|i| decode(&radices, i)).filter(|g| is_cocycle1(&f, g)).collect();
            assert_eq!(h.cocycle_values().collect::<Vec<_>>(), brute);
        }
    }
}
