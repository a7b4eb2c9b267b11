//! Series that are `F_p`-vector spaces in coordinates: each coordinate has a
//! level, `H_j` is spanned by the coordinates of level at least
//! `start + j`, and restrictions never lower a level.

use std::collections::HashMap;

use super::{linear_map, neg_flat, Dilation, Meta, PointedMap, SheafAut, Torsors, World};
use crate::abelian::{AbCohomology, AbSheaf};
use crate::error::{input, structural, Result};
use crate::exec::Ctx;
use crate::linalg::Mat;
use crate::sites::{SeriesTag, MAX_DIM};
use crate::superalgebra::mod_pow;

#[derive(Debug, Clone)]
pub struct FilteredSheaf {
    pub ab: AbSheaf,
    /// Level of each coordinate (the same coordinates on every face).
    pub levels: Vec<usize>,
    pub start: usize,
    /// Levels are below `top`; `H_N` with `N = top - start` is trivial.
    pub top: usize,
    pub tag: SeriesTag,
    pub p: u64,
}

impl FilteredSheaf {
    pub fn new(ab: AbSheaf, levels: Vec<usize>, start: usize, top: usize, tag: SeriesTag) -> Result<Self> {
        let p = ab.moduli.iter().flatten().flatten().copied().next().unwrap_or(2);
        if !ab.moduli.iter().flatten().all(|m| m.len() == levels.len() && m.iter().all(|&x| x == p)) {
            return Err(input("filtered sheaf needs the same F_p coordinates on every face"));
        }
        if let Some(&l) = levels.iter().find(|&&l| l < start || l >= top) {
            return Err(input(format!("coordinate level {l} outside {start}..{top}")));
        }
        for (d, faces) in ab.restr.iter().enumerate() {
            for (i, per) in faces.iter().enumerate() {
                for m in per {
                    for r in 0..m.rows {
                        for c in 0..m.cols {
                            if m.get(r, c) % p != 0 && levels[r] < levels[c] {
                                return Err(structural(format!(
                                    "restriction into {:?} lowers level {} to {}",
                                    ab.nerve.face(d, i),
                                    levels[c],
                                    levels[r]
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(FilteredSheaf { ab, levels, start, top, tag, p })
    }

    pub fn length(&self) -> usize {
        self.top - self.start
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    pub fn shifted(&self, l: usize) -> Result<Self> {
        let keep: Vec<usize> = (0..self.dim()).filter(|&c| self.levels[c] >= self.start + l).collect();
        let ab = sub_sheaf(&self.ab, &keep)?;
        let mut tag = self.tag.clone();
        tag.grade_offset += l;
        FilteredSheaf::new(ab, keep.iter().map(|&c| self.levels[c]).collect(), self.start + l, self.top, tag)
    }

    /// Coordinates (ascending) with series index in `lo..hi`.
    fn coords(&self, lo: usize, hi: usize) -> Vec<usize> {
        (0..self.dim()).filter(|&c| (self.start + lo..self.start + hi).contains(&self.levels[c])).collect()
    }
}

fn sub_sheaf(ab: &AbSheaf, keep: &[usize]) -> Result<AbSheaf> {
    let nerve = ab.nerve.clone();
    let moduli = (0..=MAX_DIM)
        .map(|d| (0..nerve.count(d)).map(|i| keep.iter().map(|&c| ab.moduli[d][i][c]).collect()).collect())
        .collect();
    let restr = (0..=MAX_DIM)
        .map(|d| {
            (0..nerve.count(d))
                .map(|i| {
                    ab.restr[d][i]
                        .iter()
                        .map(|m| {
                            let mut s = Mat::zeros(keep.len(), keep.len());
                            for (r, &kr) in keep.iter().enumerate() {
                                for (c, &kc) in keep.iter().enumerate() {
                                    s.set(r, c, m.get(kr, kc));
                                }
                            }
                            s
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    AbSheaf::new(nerve, moduli, restr)
}

/// `H_lo/H_hi` as a coordinate block.
#[derive(Debug)]
struct Block {
    coords: Vec<usize>,
    ab: AbSheaf,
}

pub(crate) struct LinearWorld {
    meta: Meta,
    f: FilteredSheaf,
    blocks: HashMap<(usize, usize), Block>,
    coh: Vec<Vec<AbCohomology>>,
}

impl LinearWorld {
    pub(crate) fn new(f: &FilteredSheaf) -> Result<Self> {
        let n = f.length();
        let mut blocks = HashMap::new();
        for lo in 0..=n {
            for hi in lo..=n {
                let coords = f.coords(lo, hi);
                let ab = sub_sheaf(&f.ab, &coords)?;
                blocks.insert((lo, hi), Block { coords, ab });
            }
        }
        let coh = (0..=n)
            .map(|j| {
                let b = &blocks[&(j, (j + 1).min(n))];
                (0..=MAX_DIM).map(|d| b.ab.cohomology(d)).collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let mut witnesses = vec![Some(0); n];
        if n > 0 {
            witnesses[0] = None;
        }
        let meta = Meta {
            name: f.tag.name.clone(),
            offset: f.tag.grade_offset,
            length: n,
            aq_degree: n,
            central: true,
            witnesses,
            green: f.tag.green.clone(),
            nerve: f.ab.nerve.name.clone(),
        };
        Ok(LinearWorld { meta, f: f.clone(), blocks, coh })
    }

    fn block(&self, lo: usize, hi: usize) -> &Block {
        &self.blocks[&(lo, hi)]
    }

    /// Flat `deg`-cochain of one block read in another: shared coordinates copied, others zero.
    fn transfer(&self, deg: usize, from: &Block, to: &Block, x: &[u64]) -> Vec<u64> {
        let pos: HashMap<usize, usize> = from.coords.iter().enumerate().map(|(k, &c)| (c, k)).collect();
        let (df, dt) = (from.coords.len(), to.coords.len());
        let faces = self.f.ab.nerve.count(deg);
        let mut out = vec![0; faces * dt];
        for i in 0..faces {
            for (k, c) in to.coords.iter().enumerate() {
                if let Some(&s) = pos.get(c) {
                    out[i * dt + k] = x[i * df + s];
                }
            }
        }
        out
    }

    /// Like `transfer`, but fails if a coordinate outside `to` is nonzero.
    fn restrict_exact(&self, deg: usize, from: &Block, to: &Block, x: &[u64]) -> Result<Vec<u64>> {
        let back = self.transfer(deg, to, from, &self.transfer(deg, from, to, x));
        if back != x {
            return Err(structural("boundary left the target block"));
        }
        Ok(self.transfer(deg, from, to, x))
    }

    fn rep(h: &AbCohomology, idx: u128) -> Vec<u64> {
        h.representative(&h.coords_of_index(idx))
    }

    fn h1_of(&self, j: usize) -> Result<AbCohomology> {
        self.block(j, self.meta.length).ab.cohomology(1)
    }

    /// `H⁰(A_{j-1}) → Ȟ¹(H_j)`.
    fn delta(&self, j: usize, h1: &AbCohomology) -> Result<PointedMap> {
        let n = self.meta.length;
        let h0 = &self.coh[j - 1][0];
        linear_map(self.f.p, h0.invariants.len(), h1.invariants.len(), |i| {
            let y = self.coboundary_into(0, self.block(j - 1, j), self.block(j - 1, n), self.block(j, n), &Self::rep(h0, i), true)?;
            h1.index_of(&y)
        })
    }

    /// Dilation weight of a coordinate: `λ^L` at even level `L`, `λ^{L-1}` at odd level.
    fn weight(&self, lambda: u64, c: usize) -> u64 {
        let l = self.f.levels[c] as u64;
        mod_pow(lambda, l - l % 2, self.f.p)
    }

    fn scale(&self, lambda: u64, b: &Block, x: &[u64]) -> Vec<u64> {
        let d = b.coords.len();
        x.iter().enumerate().map(|(k, &v)| v * self.weight(lambda, b.coords[k % d]) % self.f.p).collect()
    }

    fn scaled_map(&self, lambda: u64, b: &Block, h: &AbCohomology) -> Result<PointedMap> {
        let k = h.invariants.len();
        linear_map(self.f.p, k, k, |i| h.index_of(&self.scale(lambda, b, &Self::rep(h, i))))
    }

    fn coboundary_into(&self, deg: usize, from: &Block, mid: &Block, to: &Block, x: &[u64], negate: bool) -> Result<Vec<u64>> {
        let lifted = self.transfer(deg, from, mid, x);
        let mut y = mid.ab.coboundary(deg, &lifted);
        if negate {
            y = neg_flat(&mid.ab.cochain_moduli(deg + 1), &y);
        }
        self.restrict_exact(deg + 1, mid, to, &y)
    }
}

impl World for LinearWorld {
    fn meta(&self) -> &Meta {
        &self.meta
    }

    fn coh(&self, j: usize, n: usize) -> &AbCohomology {
        &self.coh[j][n]
    }

    fn linear_p(&self) -> Option<u64> {
        Some(self.f.p)
    }

    fn route(&self, n: usize, j: usize, k: usize, idx: u128) -> Result<u128> {
        let rep = Self::rep(&self.coh[j][n], idx);
        let y = self.coboundary_into(n, self.block(j, j + 1), self.block(k, j + 2), self.block(j + 1, j + 2), &rep, n.is_multiple_of(2))?;
        self.coh[j + 1][n + 1].index_of(&y)
    }

    fn abelian_route(&self, n: usize, j: usize, idx: u128) -> Result<u128> {
        self.route(n, j, j, idx)
    }

    fn stalk(&self, j: usize) -> Vec<u64> {
        vec![self.f.p; self.block(j, j + 1).coords.len()]
    }

    fn torsors(&self, _ctx: &Ctx) -> Result<Torsors> {
        let n = self.meta.length;
        let p = self.f.p;
        let h1: Vec<AbCohomology> = (0..=n).map(|j| self.h1_of(j)).collect::<Result<_>>()?;
        let dims: Vec<usize> = h1.iter().map(|h| h.invariants.len()).collect();
        let top = |j: usize| self.block(j, n);
        let mut up = Vec::new();
        let mut omega = Vec::new();
        let mut delta = vec![None];
        let mut im_h0_p = Vec::new();
        let mut h0_mid = Vec::new();
        for j in 0..n {
            up.push(linear_map(p, dims[j + 1], dims[j], |i| {
                h1[j].index_of(&self.transfer(1, top(j + 1), top(j), &Self::rep(&h1[j + 1], i)))
            })?);
            let a = &self.coh[j][1];
            omega.push(linear_map(p, dims[j], a.invariants.len(), |i| {
                a.index_of(&self.transfer(1, top(j), self.block(j, j + 1), &Self::rep(&h1[j], i)))
            })?);
            if j >= 1 {
                delta.push(Some(self.delta(j, &h1[j])?));
            }
            let mid = self.block(j, (j + 2).min(n));
            let hm = mid.ab.cohomology(0)?;
            let proj = linear_map(p, hm.invariants.len(), self.coh[j][0].invariants.len(), |i| {
                self.coh[j][0].index_of(&self.transfer(0, mid, self.block(j, j + 1), &Self::rep(&hm, i)))
            })?;
            im_h0_p.push(proj.image_size());
            h0_mid.push(hm.order());
        }
        let tau = (0..=n)
            .map(|j| linear_map(p, dims[j], dims[0], |i| h1[0].index_of(&self.transfer(1, top(j), top(0), &Self::rep(&h1[j], i)))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Torsors { h1: h1.iter().map(AbCohomology::order).collect(), up, tau, omega, delta, im_h0_p, h0_mid })
    }

    fn torsor_action(&self, _ctx: &Ctx, aut: &SheafAut) -> Result<PointedMap> {
        let SheafAut::Linear(m) = aut else {
            return Err(input("a linear series needs a matrix automorphism"));
        };
        let dim = self.f.dim();
        if m.rows != dim || m.cols != dim || (PointedMap::Linear { p: self.f.p, mat: m.clone() }).kernel_size() != 1 {
            return Err(input(format!("automorphism must be an invertible {dim}x{dim} matrix")));
        }
        for (d, faces) in self.f.ab.restr.iter().enumerate() {
            for (i, per) in faces.iter().enumerate() {
                if per.iter().any(|r| r.mul(m, self.f.p) != m.mul(r, self.f.p)) {
                    return Err(input(format!("automorphism does not commute with restriction into {:?}", self.f.ab.nerve.face(d, i))));
                }
            }
        }
        let h = self.h1_of(0)?;
        let faces = self.f.ab.nerve.count(1);
        linear_map(self.f.p, h.invariants.len(), h.invariants.len(), |i| {
            let x = Self::rep(&h, i);
            let y: Vec<u64> = (0..faces).flat_map(|e| m.apply(&x[e * dim..(e + 1) * dim], self.f.p)).collect();
            h.index_of(&y)
        })
    }

    fn dilation(&self, lambda: u64) -> Result<Option<Dilation>> {
        let p = self.f.p;
        if lambda.is_multiple_of(p) {
            return Err(input(format!("{lambda} is not a unit mod {p}")));
        }
        let diag = Mat::from_cols(self.f.dim(), &(0..self.f.dim()).map(|c| {
            let mut v = vec![0; self.f.dim()];
            v[c] = self.weight(lambda, c);
            v
        }).collect::<Vec<_>>());
        if self.f.ab.restr.iter().flatten().flatten().any(|r| r.mul(&diag, p) != diag.mul(r, p)) {
            return Err(structural("transitions do not commute with the dilation"));
        }
        let n = self.meta.length;
        let mut h0 = Vec::new();
        let mut h1 = Vec::new();
        for j in 0..n {
            let b = self.block(j, j + 1);
            h0.push(self.scaled_map(lambda, b, &self.coh[j][0])?);
            h1.push(self.scaled_map(lambda, b, &self.coh[j][1])?);
        }
        let torsors = (0..=n).map(|j| self.scaled_map(lambda, self.block(j, n), &self.h1_of(j)?)).collect::<Result<Vec<_>>>()?;
        Ok(Some(Dilation { lambda, h0, h1, torsors }))
    }

    fn star_trivial(&self, _ctx: &Ctx, j: usize) -> Result<bool> {
        // abelian: c ⋆ a = a + δ(c)
        if j == 0 || j >= self.meta.length {
            return Ok(true);
        }
        Ok(self.delta(j, &self.h1_of(j)?)?.is_constant())
    }
}
