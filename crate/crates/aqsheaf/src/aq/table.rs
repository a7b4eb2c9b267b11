//! Table backend: every layer `H_lo/H_hi` is built as a quotient of Cayley
//! tables, with the nonabelian connecting maps of `cech`.

use std::collections::HashMap;
use std::sync::Arc;

use super::{neg_flat, table_map, Meta, PointedMap, SheafAut, Torsors, World};
use crate::abelian::{decompose, AbCohomology};
use crate::cech::{
    connecting_delta1, connecting_delta2, h0, h1_nonabelian, induced_h1, star_action, AbelianView, Cochain, Extension, H1,
};
use crate::error::{input, structural, Result};
use crate::exec::Ctx;
use crate::groups::{Elem, GroupHom, Subgroup};
use crate::sites::{quotient_sheaf, GroupSheaf, SheafMorphism, SheafSeries, SubSheaf, MAX_DIM};

const NONE: u32 = u32::MAX;

/// `H_lo/H_hi` with coset representatives in the ambient group.
struct Layer {
    sheaf: Arc<GroupSheaf>,
    /// Least ambient element of each coset.
    rep: Vec<Vec<Vec<Elem>>>,
    /// Coset of each ambient element of `H_lo`, `NONE` outside.
    index: Vec<Vec<Vec<u32>>>,
}

fn build_layer(s: &SheafSeries, lo: usize, hi: usize) -> Result<Layer> {
    let f = &s.ambient;
    let nerve = f.nerve.clone();
    let big = s.term(lo);
    let (tab, incl) = big.tabulate(f);
    let members = (0..=MAX_DIM)
        .map(|d| {
            (0..nerve.count(d))
                .map(|i| {
                    let inner: Vec<Elem> = s
                        .term(hi)
                        .at(d, i)
                        .members
                        .iter()
                        .map(|&x| big.at(d, i).index_of(x).map(|k| k as Elem))
                        .collect::<Option<_>>()
                        .ok_or_else(|| structural(format!("term {hi} not inside term {lo}")))?;
                    Subgroup::new(tab.group(d, i), &inner)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let sub = SubSheaf::new(&tab, members)?;
    let (q, proj) = quotient_sheaf(&tab, &sub)?;
    let mut rep = Vec::new();
    let mut index = Vec::new();
    for d in 0..=MAX_DIM {
        let mut rl = Vec::new();
        let mut il = Vec::new();
        for i in 0..nerve.count(d) {
            let mut r = vec![NONE; q.group(d, i).order()];
            let mut ix = vec![NONE; f.group(d, i).order()];
            let mut order: Vec<(Elem, Elem)> =
                tab.group(d, i).elements().map(|t| (incl.apply(d, i, t), proj.apply(d, i, t))).collect();
            order.sort_unstable();
            for (x, z) in order {
                if r[z as usize] == NONE {
                    r[z as usize] = x;
                }
                ix[x as usize] = z;
            }
            rl.push(r);
            il.push(ix);
        }
        rep.push(rl);
        index.push(il);
    }
    Ok(Layer { sheaf: Arc::new(q), rep, index })
}

/// `H_lo1/H_hi1 → H_lo2/H_hi2` induced by the identity (`lo2 ≤ lo1`, `hi2 ≤ hi1`).
fn morphism(a: &Layer, b: &Layer) -> Result<SheafMorphism> {
    let maps = a
        .rep
        .iter()
        .zip(&b.index)
        .map(|(ra, ib)| {
            ra.iter()
                .zip(ib)
                .map(|(r, ix)| {
                    let map: Vec<Elem> = r.iter().map(|&x| ix[x as usize]).collect();
                    if map.contains(&NONE) {
                        return Err(structural("layer map leaves the target term"));
                    }
                    Ok(GroupHom { map })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SheafMorphism { maps })
}

fn map_cochain(m: &SheafMorphism, c: &Cochain) -> Cochain {
    induced_h1(m, c)
}

/// The series from term `l` on, on the ambient `H_l`.
pub(crate) fn shift_series(s: &SheafSeries, l: usize) -> Result<SheafSeries> {
    let big = s.term(l);
    let (tab, _) = big.tabulate(&s.ambient);
    let nerve = tab.nerve.clone();
    let terms = (l..=s.length())
        .map(|t| {
            let members = (0..=MAX_DIM)
                .map(|d| {
                    (0..nerve.count(d))
                        .map(|i| {
                            let inner: Vec<Elem> = s
                                .term(t)
                                .at(d, i)
                                .members
                                .iter()
                                .map(|&x| big.at(d, i).index_of(x).expect("nested") as Elem)
                                .collect();
                            Subgroup::new(tab.group(d, i), &inner)
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            SubSheaf::new(&tab, members)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut tag = s.tag.clone();
    tag.grade_offset += l;
    SheafSeries::new(Arc::new(tab), terms, tag)
}

pub(crate) struct TableWorld {
    meta: Meta,
    series: SheafSeries,
    layers: HashMap<(usize, usize), Layer>,
    views: Vec<AbelianView>,
    coh: Vec<Vec<AbCohomology>>,
    /// `A_{j+1} → H_k/H_{j+2} → H_k/H_{j+1}` keyed by `(j, k)`, with `A_j → H_k/H_{j+1}`.
    exts: HashMap<(usize, usize), (Extension, SheafMorphism)>,
    /// Coordinates of `H_j/H_{j+2}` when abelian.
    mids: HashMap<usize, AbelianView>,
}

impl TableWorld {
    pub(crate) fn new(_ctx: &Ctx, s: &SheafSeries) -> Result<Self> {
        let n = s.length();
        let checks = s.checks()?;
        if checks.aq_degree == 0 {
            return Err(structural(format!("{} is not an AQ series", s.tag.name)));
        }
        let mut layers = HashMap::new();
        for lo in 0..n {
            for hi in lo + 1..=n {
                layers.insert((lo, hi), build_layer(s, lo, hi)?);
            }
        }
        let mut views = Vec::new();
        for j in 0..n {
            let a = &layers[&(j, j + 1)].sheaf;
            if !a.is_pointwise_abelian() {
                let (d, i) = (0..=MAX_DIM)
                    .flat_map(|d| (0..a.nerve.count(d)).map(move |i| (d, i)))
                    .find(|&(d, i)| !a.group(d, i).is_abelian())
                    .expect("some face is nonabelian");
                return Err(structural(format!("quotient {j} is nonabelian on face {:?}", a.nerve.face(d, i))));
            }
            views.push(AbelianView::new(a)?);
        }
        // H_N is trivial: its cohomology is that of the zero sheaf
        let trivial = AbelianView::new(&crate::sites::GroupSheaf::constant(s.nerve().clone(), Arc::new(crate::groups::FiniteGroup::trivial())))?;
        views.push(trivial);
        let coh = views.iter().map(|v| (0..=MAX_DIM).map(|d| v.cohomology(d)).collect::<Result<Vec<_>>>()).collect::<Result<Vec<_>>>()?;
        let meta = Meta {
            name: s.tag.name.clone(),
            offset: s.tag.grade_offset,
            length: n,
            aq_degree: checks.aq_degree,
            central: checks.central,
            witnesses: checks.witnesses.clone(),
            green: s.tag.green.clone(),
            nerve: s.nerve().name.clone(),
        };
        let mut exts = HashMap::new();
        let mut mids = HashMap::new();
        for j in 0..n.saturating_sub(1) {
            for k in meta.valid_witnesses(j + 1).into_iter().chain([j]) {
                if exts.contains_key(&(j, k)) {
                    continue;
                }
                let (a, b, c) = (&layers[&(j + 1, j + 2)], &layers[&(k, j + 2)], &layers[&(k, j + 1)]);
                let ext = Extension::new(a.sheaf.clone(), b.sheaf.clone(), c.sheaf.clone(), morphism(a, b)?, morphism(b, c)?)?;
                let iota = morphism(&layers[&(j, j + 1)], c)?;
                exts.insert((j, k), (ext, iota));
            }
            let m = &layers[&(j, j + 2)].sheaf;
            if m.is_pointwise_abelian() {
                mids.insert(j, AbelianView::new(m)?);
            }
        }
        Ok(TableWorld { meta, series: s.clone(), layers, views, coh, exts, mids })
    }

    fn layer(&self, lo: usize, hi: usize) -> &Layer {
        &self.layers[&(lo, hi)]
    }

    fn rep(&self, j: usize, n: usize, idx: u128) -> Cochain {
        let h = &self.coh[j][n];
        self.views[j].from_flat(n, &h.representative(&h.coords_of_index(idx)))
    }

    fn class(&self, j: usize, c: &Cochain) -> Result<u128> {
        self.coh[j][c.degree].index_of(&self.views[j].to_flat(c))
    }

    fn h1_term(&self, ctx: &Ctx, j: usize) -> Result<Option<H1>> {
        if j == self.meta.length {
            return Ok(None);
        }
        h1_nonabelian(ctx, &self.layer(j, self.meta.length).sheaf).map(Some)
    }

    fn delta_ext(&self, j: usize) -> Result<Extension> {
        let n = self.meta.length;
        let (a, b, c) = (self.layer(j, n), self.layer(j - 1, n), self.layer(j - 1, j));
        Extension::new(a.sheaf.clone(), b.sheaf.clone(), c.sheaf.clone(), morphism(a, b)?, morphism(b, c)?)
    }
}

fn class_in(h: &Option<H1>, c: &Cochain) -> Result<u128> {
    match h {
        None => Ok(0),
        Some(h) => h.class_of(c).map(|k| k as u128),
    }
}

fn size(h: &Option<H1>) -> u128 {
    h.as_ref().map_or(1, |h| h.len() as u128)
}

impl World for TableWorld {
    fn meta(&self) -> &Meta {
        &self.meta
    }

    fn coh(&self, j: usize, n: usize) -> &AbCohomology {
        &self.coh[j][n]
    }

    fn linear_p(&self) -> Option<u64> {
        None
    }

    fn route(&self, n: usize, j: usize, k: usize, idx: u128) -> Result<u128> {
        let (ext, iota) = self.exts.get(&(j, k)).ok_or_else(|| structural(format!("no extension through term {k}")))?;
        let c = self.rep(j, n, idx);
        let out = match n {
            0 => connecting_delta1(ext, &map_cochain(iota, &c).values)?,
            1 => connecting_delta2(ext, &map_cochain(iota, &c))?,
            _ => return Err(structural("nonabelian routes stop at degree 1")),
        };
        self.class(j + 1, &out)
    }

    fn abelian_route(&self, n: usize, j: usize, idx: u128) -> Result<u128> {
        let mid = self.mids.get(&j).ok_or_else(|| structural(format!("H_{j}/H_{} is not abelian", j + 2)))?;
        let (ext, _) = &self.exts[&(j, j)];
        let c = self.rep(j, n, idx);
        let lift = Cochain {
            degree: n,
            values: c.values.iter().enumerate().map(|(i, &z)| ext.least_lift(n, i, z)).collect(),
        };
        let mut y = mid.ab.coboundary(n, &mid.to_flat(&lift));
        if n.is_multiple_of(2) {
            y = neg_flat(&mid.ab.cochain_moduli(n + 1), &y);
        }
        let yc = mid.from_flat(n + 1, &y);
        let values = yc
            .values
            .iter()
            .enumerate()
            .map(|(i, &w)| ext.to_a(n + 1, i, w).ok_or_else(|| structural("boundary outside the kernel")))
            .collect::<Result<Vec<_>>>()?;
        self.class(j + 1, &Cochain { degree: n + 1, values })
    }

    fn stalk(&self, j: usize) -> Vec<u64> {
        decompose(self.layer(j, j + 1).sheaf.group(0, 0)).map(|d| d.moduli).unwrap_or_default()
    }

    fn torsors(&self, ctx: &Ctx) -> Result<Torsors> {
        let n = self.meta.length;
        let h1: Vec<Option<H1>> = (0..=n).map(|j| self.h1_term(ctx, j)).collect::<Result<_>>()?;
        let canon = |j: usize, i: u128| -> Cochain {
            match &h1[j] {
                Some(h) => h.classes[i as usize].clone(),
                None => Cochain { degree: 1, values: Vec::new() },
            }
        };
        let term_map = |from: usize, to: usize, what: &str| -> Result<PointedMap> {
            if from == n {
                return Ok(PointedMap::constant(1, size(&h1[to])));
            }
            let m = morphism(self.layer(from, n), self.layer(to, n))?;
            table_map(ctx, what, size(&h1[from]), size(&h1[to]), |i| class_in(&h1[to], &map_cochain(&m, &canon(from, i))))
        };
        let mut up = Vec::new();
        let mut omega = Vec::new();
        let mut delta = vec![None];
        let mut im_h0_p = Vec::new();
        let mut h0_mid = Vec::new();
        for j in 0..n {
            up.push(term_map(j + 1, j, "torsor classes")?);
            let proj = morphism(self.layer(j, n), self.layer(j, j + 1))?;
            omega.push(table_map(ctx, "torsor classes", size(&h1[j]), self.coh[j][1].order(), |i| {
                self.class(j, &map_cochain(&proj, &canon(j, i)))
            })?);
            if j >= 1 {
                let ext = self.delta_ext(j)?;
                delta.push(Some(table_map(ctx, "sections", self.coh[j - 1][0].order(), size(&h1[j]), |i| {
                    class_in(&h1[j], &connecting_delta1(&ext, &self.rep(j - 1, 0, i).values)?)
                })?));
            }
            let hi = (j + 2).min(n);
            let mid = self.layer(j, hi);
            let secs = h0(ctx, &mid.sheaf)?;
            let m = morphism(mid, self.layer(j, j + 1))?;
            let mut imgs = secs
                .values
                .iter()
                .map(|s| self.class(j, &map_cochain(&m, &Cochain { degree: 0, values: s.clone() })))
                .collect::<Result<Vec<_>>>()?;
            imgs.sort_unstable();
            imgs.dedup();
            im_h0_p.push(imgs.len() as u128);
            h0_mid.push(secs.len() as u128);
        }
        let tau = (0..=n).map(|j| term_map(j, 0, "torsor classes")).collect::<Result<Vec<_>>>()?;
        Ok(Torsors { h1: h1.iter().map(size).collect(), up, tau, omega, delta, im_h0_p, h0_mid })
    }

    fn torsor_action(&self, ctx: &Ctx, aut: &SheafAut) -> Result<PointedMap> {
        let SheafAut::Table(phi) = aut else {
            return Err(input("a table series needs per-face group automorphisms"));
        };
        let f = &self.series.ambient;
        let nerve = &f.nerve;
        if phi.maps.len() <= nerve.dim() || (0..=nerve.dim()).any(|d| phi.maps[d].len() != nerve.count(d)) {
            return Err(input("automorphism needs one map per face"));
        }
        if let Some(v) = phi.validate(f, f).first() {
            return Err(input(format!("not a sheaf morphism: {v:?}")));
        }
        let term = self.series.term(0);
        for d in 0..=nerve.dim() {
            for i in 0..nerve.count(d) {
                let g = f.group(d, i);
                if !phi.maps[d][i].is_bijective(g.order()) {
                    return Err(input(format!("map on {:?} is not bijective", nerve.face(d, i))));
                }
                if term.at(d, i).members.iter().any(|&x| !term.at(d, i).contains(phi.apply(d, i, x))) {
                    return Err(input(format!("map on {:?} does not preserve the first term", nerve.face(d, i))));
                }
            }
        }
        let n = self.meta.length;
        let Some(h) = self.h1_term(ctx, 0)? else {
            return Ok(PointedMap::constant(1, 1));
        };
        let layer = self.layer(0, n);
        table_map(ctx, "torsor classes", h.len() as u128, h.len() as u128, |i| {
            let c = &h.classes[i as usize];
            let values = c
                .values
                .iter()
                .enumerate()
                .map(|(e, &v)| layer.index[1][e][phi.apply(1, e, layer.rep[1][e][v as usize]) as usize])
                .collect();
            h.class_of(&Cochain { degree: 1, values }).map(|k| k as u128)
        })
    }

    fn star_trivial(&self, ctx: &Ctx, j: usize) -> Result<bool> {
        if j == 0 || j >= self.meta.length {
            return Ok(true);
        }
        let Some(h) = self.h1_term(ctx, j)? else { return Ok(true) };
        let ext = self.delta_ext(j)?;
        let secs = self.coh[j - 1][0].order();
        ctx.check("star action pairs", secs * h.len() as u128)?;
        for c in 0..secs {
            let sec = self.rep(j - 1, 0, c).values;
            for (a, rep) in h.classes.iter().enumerate() {
                if h.class_of(&star_action(&ext, &sec, rep)?)? != a {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}
