//! Sheaves of finite abelian groups in coordinates, and their Čech
//! cohomology by Smith normal form, one prime at a time.
//!
//! Every face group is `Z/m_0 x Z/m_1 x ...` with prime-power moduli; a
//! restriction is an integer matrix (target coordinates by source
//! coordinates). Cochains of degree `n` are flat vectors, faces in nerve order.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{input, structural, Result};
use crate::groups::{Elem, FiniteGroup};
use crate::linalg::{snf, ChainRing, Mat, Snf};
use crate::sites::{GroupSheaf, Nerve, MAX_DIM};

/// Splits `m` into `(p, e)` if it is a prime power.
pub fn prime_power(m: u64) -> Option<(u64, u32)> {
    if m < 2 {
        return None;
    }
    let p = (2..=m).find(|d| m.is_multiple_of(*d))?;
    let (mut r, mut e) = (m, 0);
    while r % p == 0 {
        r /= p;
        e += 1;
    }
    (r == 1).then_some((p, e))
}

/// Coordinates for an abelian group given by multiplication.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub moduli: Vec<u64>,
    coords: Vec<Vec<u64>>,
    /// Mixed-radix index (coordinate 0 least significant) to element.
    elems: Vec<Elem>,
}

impl Decomposition {
    pub fn coords(&self, x: Elem) -> &[u64] {
        &self.coords[x as usize]
    }

    pub fn elem(&self, c: &[u64]) -> Elem {
        let mut idx = 0usize;
        for (i, &m) in self.moduli.iter().enumerate().rev() {
            idx = idx * m as usize + (c[i] % m) as usize;
        }
        self.elems[idx]
    }
}

const MAX_DECOMPOSE: usize = 1 << 20;

/// Invariant-factor style decomposition into cyclic prime-power factors.
pub fn decompose(g: &FiniteGroup) -> Result<Decomposition> {
    if !g.is_abelian() {
        return Err(structural(format!("{} is not abelian", g.name)));
    }
    if let Some(m) = g.moduli() {
        if m.iter().all(|&x| prime_power(x as u64).is_some()) {
            let moduli: Vec<u64> = m.iter().map(|&x| x as u64).collect();
            let mut coords = Vec::with_capacity(g.order());
            for x in 0..g.order() {
                let mut r = x;
                coords.push(moduli.iter().map(|&mm| {
                    let c = (r % mm as usize) as u64;
                    r /= mm as usize;
                    c
                }).collect());
            }
            return Ok(Decomposition { moduli, coords, elems: (0..g.order() as Elem).collect() });
        }
    }
    let n = g.order();
    if n > MAX_DECOMPOSE {
        return Err(input(format!("{} too large to decompose", g.name)));
    }
    let orders: Vec<u64> = g.elements().map(|x| g.elem_order(x)).collect();
    let mut primes: Vec<u64> = Vec::new();
    for &o in &orders {
        let mut r = o;
        let mut d = 2;
        while r > 1 {
            if r % d == 0 {
                if !primes.contains(&d) {
                    primes.push(d);
                }
                r /= d;
            } else {
                d += 1;
            }
        }
    }
    primes.sort_unstable();
    let mut gens: Vec<(Elem, u64)> = Vec::new();
    for &p in &primes {
        let part: Vec<Elem> = g
            .elements()
            .filter(|&x| orders[x as usize] == 1 || prime_power(orders[x as usize]).is_some_and(|(q, _)| q == p))
            .collect();
        // span of the chosen p-generators, grown greedily by maximal coset order
        let mut span = vec![false; n];
        span[0] = true;
        let mut span_list = vec![0 as Elem];
        loop {
            let coset_order = |x: Elem| {
                let (mut y, mut k) = (x, 1u64);
                while !span[y as usize] {
                    y = g.mul(y, x);
                    k += 1;
                }
                k
            };
            let Some((best, ord)) = part
                .iter()
                .map(|&x| (x, coset_order(x)))
                .filter(|&(_, o)| o > 1)
                .max_by_key(|&(x, o)| (o, std::cmp::Reverse(x)))
            else {
                break;
            };
            // an element of the coset best*span of order exactly `ord`
            let pick = span_list
                .iter()
                .map(|&h| g.mul(best, h))
                .filter(|&y| orders[y as usize] == ord)
                .min()
                .ok_or_else(|| structural("greedy decomposition found no complement"))?;
            gens.push((pick, ord));
            let mut next = Vec::with_capacity(span_list.len() * ord as usize);
            let mut power = 0 as Elem;
            for _ in 0..ord {
                for &h in &span_list {
                    let y = g.mul(h, power);
                    if !span[y as usize] {
                        span[y as usize] = true;
                    }
                    next.push(y);
                }
                power = g.mul(power, pick);
            }
            next.sort_unstable();
            next.dedup();
            span_list = next;
        }
    }
    let moduli: Vec<u64> = gens.iter().map(|&(_, o)| o).collect();
    let total: usize = moduli.iter().product::<u64>() as usize;
    if total != n {
        return Err(structural(format!("decomposition of {} has order {total}", g.name)));
    }
    let mut elems = vec![0 as Elem; n];
    let mut coords = vec![Vec::new(); n];
    let mut hit = vec![false; n];
    for idx in 0..n {
        let mut r = idx;
        let mut c = Vec::with_capacity(moduli.len());
        let mut x = 0 as Elem;
        for (k, &m) in moduli.iter().enumerate() {
            let ci = (r % m as usize) as u64;
            r /= m as usize;
            x = g.mul(x, g.pow(gens[k].0, ci));
            c.push(ci);
        }
        if hit[x as usize] {
            return Err(structural(format!("decomposition of {} is not injective", g.name)));
        }
        hit[x as usize] = true;
        elems[idx] = x;
        coords[x as usize] = c;
    }
    Ok(Decomposition { moduli, coords, elems })
}

/// Abelian sheaf in coordinates.
#[derive(Debug, Clone)]
pub struct AbSheaf {
    pub nerve: Arc<Nerve>,
    /// `moduli[d][i]`: prime-power coordinate moduli of face `(d, i)`.
    pub moduli: Vec<Vec<Vec<u64>>>,
    /// `restr[d][i][m]`: matrix from facet `m` into `(d, i)`; entries reduced mod the row modulus.
    pub restr: Vec<Vec<Vec<Mat>>>,
}

impl AbSheaf {
    pub fn new(nerve: Arc<Nerve>, moduli: Vec<Vec<Vec<u64>>>, restr: Vec<Vec<Vec<Mat>>>) -> Result<Self> {
        let s = AbSheaf { nerve, moduli, restr };
        s.validate()?;
        Ok(s)
    }

    /// Constant sheaf with identity restrictions.
    pub fn constant(nerve: Arc<Nerve>, moduli: &[u64]) -> Result<Self> {
        let k = moduli.len();
        let ms = (0..=MAX_DIM).map(|d| vec![moduli.to_vec(); nerve.count(d)]).collect();
        let rs = (0..=MAX_DIM)
            .map(|d| vec![if d == 0 { Vec::new() } else { vec![Mat::identity(k); d + 1] }; nerve.count(d)])
            .collect();
        Self::new(nerve, ms, rs)
    }

    /// Coordinates for a pointwise abelian table sheaf, with the per-face decompositions.
    pub fn from_group_sheaf(f: &GroupSheaf) -> Result<(Self, Vec<Vec<Decomposition>>)> {
        let nerve = f.nerve.clone();
        let decs: Vec<Vec<Decomposition>> = f
            .groups
            .iter()
            .map(|l| l.iter().map(|g| decompose(g)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        let moduli = decs.iter().map(|l| l.iter().map(|d| d.moduli.clone()).collect()).collect();
        let mut restr = Vec::new();
        for d in 0..=MAX_DIM {
            let mut rl = Vec::new();
            for i in 0..nerve.count(d) {
                let mut per = Vec::new();
                if d > 0 {
                    for (m, &fi) in nerve.facets(d, i).iter().enumerate() {
                        let src = &decs[d - 1][fi];
                        let tgt = &decs[d][i];
                        let cols: Vec<Vec<u64>> = (0..src.moduli.len())
                            .map(|j| {
                                let mut unit = vec![0; src.moduli.len()];
                                unit[j] = 1;
                                tgt.coords(f.restrict(d, i, m, src.elem(&unit))).to_vec()
                            })
                            .collect();
                        per.push(Mat::from_cols(tgt.moduli.len(), &cols));
                    }
                }
                rl.push(per);
            }
            restr.push(rl);
        }
        Ok((Self::new(nerve, moduli, restr)?, decs))
    }

    fn validate(&self) -> Result<()> {
        let nerve = &self.nerve;
        for d in 0..=MAX_DIM {
            for i in 0..nerve.count(d) {
                for &m in &self.moduli[d][i] {
                    if prime_power(m).is_none() {
                        return Err(structural(format!("modulus {m} is not a prime power")));
                    }
                }
            }
        }
        for d in 1..=MAX_DIM {
            for i in 0..nerve.count(d) {
                for (m, &fi) in nerve.facets(d, i).iter().enumerate() {
                    let a = &self.restr[d][i][m];
                    let (src, tgt) = (&self.moduli[d - 1][fi], &self.moduli[d][i]);
                    if a.rows != tgt.len() || a.cols != src.len() {
                        return Err(structural("restriction matrix has the wrong shape"));
                    }
                    for r in 0..a.rows {
                        for c in 0..a.cols {
                            // x -> a x is well defined iff m_tgt | a * m_src
                            if !(a.get(r, c) as u128 * src[c] as u128).is_multiple_of(tgt[r] as u128) {
                                return Err(structural(format!(
                                    "restriction entry ({r},{c}) into {:?} is not a homomorphism",
                                    nerve.face(d, i)
                                )));
                            }
                        }
                    }
                }
            }
        }
        // functoriality on every codimension-two pair
        for d in 2..=MAX_DIM {
            for i in 0..nerve.count(d) {
                for a in 0..=d {
                    for b in a + 1..=d {
                        let fa = nerve.facets(d, i)[a];
                        let fb = nerve.facets(d, i)[b];
                        let m1 = self.mul_reduced(&self.restr[d][i][a], &self.restr[d - 1][fa][b - 1], d, i);
                        let m2 = self.mul_reduced(&self.restr[d][i][b], &self.restr[d - 1][fb][a], d, i);
                        if m1 != m2 {
                            return Err(structural(format!("restriction square fails on {:?}", nerve.face(d, i))));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn mul_reduced(&self, outer: &Mat, inner: &Mat, d: usize, i: usize) -> Mat {
        let mut p = Mat::zeros(outer.rows, inner.cols);
        for r in 0..outer.rows {
            let m = self.moduli[d][i][r] as u128;
            for c in 0..inner.cols {
                let v: u128 = (0..outer.cols).map(|k| outer.get(r, k) as u128 * inner.get(k, c) as u128 % m).sum();
                p.set(r, c, (v % m) as u64);
            }
        }
        p
    }

    pub fn dim_at(&self, d: usize, i: usize) -> usize {
        self.moduli[d][i].len()
    }

    pub fn cochain_len(&self, n: usize) -> usize {
        self.moduli.get(n).map_or(0, |l| l.iter().map(Vec::len).sum())
    }

    /// Offset of face `(n, i)` in a flat `n`-cochain.
    pub fn offset(&self, n: usize, i: usize) -> usize {
        self.moduli[n][..i].iter().map(Vec::len).sum()
    }

    pub fn cochain_moduli(&self, n: usize) -> Vec<u64> {
        self.moduli.get(n).map_or(Vec::new(), |l| l.iter().flatten().copied().collect())
    }

    /// `(Dc)(τ) = Σ_m (-1)^m r_m(c(∂_m τ))`, reduced.
    pub fn coboundary(&self, n: usize, c: &[u64]) -> Vec<u64> {
        if n >= MAX_DIM {
            return Vec::new();
        }
        let nerve = &self.nerve;
        let mut out = Vec::with_capacity(self.cochain_len(n + 1));
        for t in 0..nerve.count(n + 1) {
            let tm = &self.moduli[n + 1][t];
            let mut acc = vec![0u64; tm.len()];
            for (m, &fi) in nerve.facets(n + 1, t).iter().enumerate() {
                let off = self.offset(n, fi);
                let src = &c[off..off + self.dim_at(n, fi)];
                let a = &self.restr[n + 1][t][m];
                for r in 0..a.rows {
                    let mut s = 0u64;
                    for (col, &x) in src.iter().enumerate() {
                        s = (s + a.get(r, col) % tm[r] * (x % tm[r])) % tm[r];
                    }
                    acc[r] = if m % 2 == 0 { (acc[r] + s) % tm[r] } else { (acc[r] + tm[r] - s) % tm[r] };
                }
            }
            out.extend(acc);
        }
        out
    }

    pub fn is_cocycle(&self, n: usize, c: &[u64]) -> bool {
        self.coboundary(n, c).iter().all(|&x| x == 0)
    }

    fn primes(&self) -> Vec<u64> {
        let set: BTreeSet<u64> = self.moduli.iter().flatten().flatten().filter_map(|&m| prime_power(m).map(|x| x.0)).collect();
        set.into_iter().collect()
    }

    /// `H^n` for `n ≤ 3`.
    pub fn cohomology(&self, n: usize) -> Result<AbCohomology> {
        if n > MAX_DIM {
            return Err(input("cohomology degree above 3"));
        }
        let parts = self.primes().into_iter().map(|p| PrimePart::build(self, n, p)).collect::<Vec<_>>();
        let invariants = parts.iter().flat_map(|pp| pp.invariants.iter().copied()).collect();
        Ok(AbCohomology { degree: n, len: self.cochain_len(n), moduli: self.cochain_moduli(n), invariants, parts })
    }
}

/// Selected coordinates of one prime, lifted to `Z/p^E`.
#[derive(Debug, Clone)]
struct PrimePart {
    ring: ChainRing,
    /// Flat positions in the full `n`-cochain.
    pos: Vec<usize>,
    zg: Mat,
    /// SNF of `[Zg | Bg]`, used to solve for class coordinates.
    zb: Snf,
    /// SNF of the relation module on `Zg` coordinates.
    rel: Snf,
    /// Slots of `rel` giving nontrivial factors, with their orders.
    slots: Vec<(usize, u64)>,
    invariants: Vec<u64>,
}

impl PrimePart {
    fn build(s: &AbSheaf, n: usize, p: u64) -> Self {
        let e = s
            .moduli
            .iter()
            .flatten()
            .flatten()
            .filter_map(|&m| prime_power(m).filter(|x| x.0 == p).map(|x| x.1))
            .max()
            .expect("prime occurs");
        let ring = ChainRing::new(p, e);
        let select = |k: usize| -> Vec<usize> {
            s.cochain_moduli(k).iter().enumerate().filter(|(_, &m)| m % p == 0).map(|(i, _)| i).collect()
        };
        let pos = select(n);
        let dmat = |k: usize, src: &[usize], tgt: &[usize]| -> Mat {
            // columns: images of unit cochains (lifted)
            let full = s.cochain_len(k);
            let cols: Vec<Vec<u64>> = src
                .iter()
                .map(|&j| {
                    let mut c = vec![0u64; full];
                    c[j] = 1;
                    let img = lifted_coboundary(s, k, &c, ring.m);
                    tgt.iter().map(|&t| img[t]).collect()
                })
                .collect();
            Mat::from_cols(tgt.len(), &cols)
        };
        let next = if n < MAX_DIM { select(n + 1) } else { Vec::new() };
        let mods_n = s.cochain_moduli(n);
        let mods_next = if n < MAX_DIM { s.cochain_moduli(n + 1) } else { Vec::new() };
        // cocycles: D x ≡ 0 mod the target moduli
        let mut dn = dmat(n, &pos, &next);
        for (r, &t) in next.iter().enumerate() {
            let scale = ring.m / mods_next[t];
            for c in 0..dn.cols {
                let v = dn.get(r, c) * scale % ring.m;
                dn.set(r, c, v);
            }
        }
        let zg = snf(&dn, ring).kernel();
        // boundaries plus the coordinates that vanish in the actual group
        let mut bcols: Vec<Vec<u64>> = Vec::new();
        if n > 0 {
            let prev = select(n - 1);
            let dp = dmat(n - 1, &prev, &pos);
            bcols.extend((0..dp.cols).map(|c| dp.col(c)));
        }
        for (k, &j) in pos.iter().enumerate() {
            let mut c = vec![0u64; pos.len()];
            c[k] = mods_n[j] % ring.m;
            if c[k] != 0 {
                bcols.push(c);
            }
        }
        let bg = Mat::from_cols(pos.len(), &bcols);
        let zbm = zg.hcat(&bg);
        let zb = snf(&zbm, ring);
        let ker = zb.kernel();
        let r = zg.cols;
        let relcols: Vec<Vec<u64>> = (0..ker.cols).map(|c| (0..r).map(|i| ker.get(i, c)).collect()).collect();
        let relm = Mat::from_cols(r, &relcols);
        let rel = snf(&relm, ring);
        let mut slots = Vec::new();
        for i in 0..r {
            let ord = if i < rel.rank() { p.pow(rel.d[i]) } else { ring.m };
            if ord > 1 {
                slots.push((i, ord));
            }
        }
        let invariants = slots.iter().map(|&(_, o)| o).collect();
        PrimePart { ring, pos, zg, zb, rel, slots, invariants }
    }

    fn class_coords(&self, x: &[u64]) -> Option<Vec<u64>> {
        let sub: Vec<u64> = self.pos.iter().map(|&j| x[j] % self.ring.m).collect();
        let sol = self.zb.solve(&sub)?;
        let c: Vec<u64> = sol[..self.zg.cols].to_vec();
        let y = self.rel.u.apply(&c, self.ring.m);
        Some(self.slots.iter().map(|&(i, o)| y[i] % o).collect())
    }

    fn representative(&self, coords: &[u64], out: &mut [u64], moduli: &[u64]) {
        let r = self.zg.cols;
        let mut y = vec![0u64; r];
        for (k, &(i, _)) in self.slots.iter().enumerate() {
            y[i] = coords[k];
        }
        let c = self.rel.u_inv.apply(&y, self.ring.m);
        let x = self.zg.apply(&c, self.ring.m);
        for (k, &j) in self.pos.iter().enumerate() {
            out[j] = x[k] % moduli[j];
        }
    }
}

/// Coboundary with restriction entries applied in `Z/p^E` without reducing mod target moduli.
fn lifted_coboundary(s: &AbSheaf, n: usize, c: &[u64], m: u64) -> Vec<u64> {
    if n >= MAX_DIM {
        return Vec::new();
    }
    let nerve = &s.nerve;
    let mut out = Vec::new();
    for t in 0..nerve.count(n + 1) {
        let rows = s.dim_at(n + 1, t);
        let mut acc = vec![0u64; rows];
        for (mm, &fi) in nerve.facets(n + 1, t).iter().enumerate() {
            let off = s.offset(n, fi);
            let a = &s.restr[n + 1][t][mm];
            for r in 0..rows {
                let mut v = 0u64;
                for col in 0..a.cols {
                    v = (v + a.get(r, col) % m * (c[off + col] % m)) % m;
                }
                acc[r] = if mm % 2 == 0 { (acc[r] + v) % m } else { (acc[r] + m - v) % m };
            }
        }
        out.extend(acc);
    }
    out
}

/// `H^n` of an abelian sheaf as a product of cyclic groups.
#[derive(Debug, Clone)]
pub struct AbCohomology {
    pub degree: usize,
    len: usize,
    moduli: Vec<u64>,
    /// Orders of the cyclic factors, primes ascending.
    pub invariants: Vec<u64>,
    parts: Vec<PrimePart>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupSummary {
    pub order: u128,
    pub invariants: Vec<u64>,
}

impl AbCohomology {
    pub fn order(&self) -> u128 {
        self.invariants.iter().map(|&x| x as u128).product()
    }

    pub fn is_trivial(&self) -> bool {
        self.invariants.is_empty()
    }

    pub fn summary(&self) -> GroupSummary {
        GroupSummary { order: self.order(), invariants: self.invariants.clone() }
    }

    /// Class coordinates (one per invariant factor) of a cocycle.
    pub fn class_of(&self, x: &[u64]) -> Result<Vec<u64>> {
        if x.len() != self.len {
            return Err(structural("cochain has the wrong length"));
        }
        let mut out = Vec::with_capacity(self.invariants.len());
        for part in &self.parts {
            out.extend(part.class_coords(x).ok_or_else(|| structural("cochain is not a cocycle"))?);
        }
        Ok(out)
    }

    /// Mixed-radix class index, first factor most significant; zero class is 0.
    pub fn index_of_coords(&self, c: &[u64]) -> u128 {
        c.iter().zip(&self.invariants).fold(0u128, |acc, (&x, &m)| acc * m as u128 + (x % m) as u128)
    }

    pub fn coords_of_index(&self, mut idx: u128) -> Vec<u64> {
        let mut c = vec![0u64; self.invariants.len()];
        for (k, &m) in self.invariants.iter().enumerate().rev() {
            c[k] = (idx % m as u128) as u64;
            idx /= m as u128;
        }
        c
    }

    pub fn index_of(&self, x: &[u64]) -> Result<u128> {
        Ok(self.index_of_coords(&self.class_of(x)?))
    }

    /// A cocycle in the class with the given coordinates.
    pub fn representative(&self, c: &[u64]) -> Vec<u64> {
        let mut out = vec![0u64; self.len];
        let mut k = 0;
        for part in &self.parts {
            let n = part.invariants.len();
            part.representative(&c[k..k + n], &mut out, &self.moduli);
            k += n;
        }
        out
    }

    /// Representative cocycles of the unit coordinate vectors.
    pub fn generators(&self) -> Vec<Vec<u64>> {
        (0..self.invariants.len())
            .map(|k| {
                let mut c = vec![0u64; self.invariants.len()];
                c[k] = 1;
                self.representative(&c)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decomposes_small_abelian_groups() {
        let v4 = FiniteGroup::product(&[FiniteGroup::cyclic(2).unwrap(), FiniteGroup::cyclic(2).unwrap()]).unwrap();
        let g = FiniteGroup::from_table("v4", &(0..4).map(|a| (0..4).map(|b| v4.mul(a, b)).collect()).collect::<Vec<Vec<u32>>>()).unwrap();
        let d = decompose(&g).unwrap();
        assert_eq!(d.moduli, vec![2, 2]);
        let z6 = FiniteGroup::coords(&[6]).unwrap();
        let d6 = decompose(&z6).unwrap();
        assert_eq!(d6.moduli.iter().product::<u64>(), 6);
        for x in z6.elements() {
            assert_eq!(d6.elem(d6.coords(x)), x);
        }
        assert!(decompose(&FiniteGroup::quaternion8()).is_err());
    }

    #[test]
    fn cohomology_of_constant_sheaves() {
        let cyc = Arc::new(Nerve::cycle(3).unwrap());
        let a = AbSheaf::constant(cyc, &[2]).unwrap();
        assert_eq!(a.cohomology(0).unwrap().order(), 2);
        assert_eq!(a.cohomology(1).unwrap().order(), 2);
        assert!(a.cohomology(2).unwrap().is_trivial());

        let rp2 = Arc::new(Nerve::rp2_min());
        let b = AbSheaf::constant(rp2.clone(), &[2]).unwrap();
        assert_eq!(b.cohomology(1).unwrap().order(), 2);
        assert_eq!(b.cohomology(2).unwrap().order(), 2);
        let c = AbSheaf::constant(rp2, &[3]).unwrap();
        assert!(c.cohomology(1).unwrap().is_trivial());
        assert!(c.cohomology(2).unwrap().is_trivial());

        let solid = Arc::new(Nerve::simplex(3, true).unwrap());
        let s = AbSheaf::constant(solid, &[2]).unwrap();
        for n in 1..=3 {
            assert!(s.cohomology(n).unwrap().is_trivial(), "H^{n}");
        }
        let sphere = Arc::new(Nerve::simplex(3, false).unwrap());
        let t = AbSheaf::constant(sphere, &[4, 3]).unwrap();
        assert!(t.cohomology(1).unwrap().is_trivial());
        assert_eq!(t.cohomology(2).unwrap().invariants, vec![4, 3]);
    }

    #[test]
    fn z4_on_rp2_has_torsion_pattern() {
        // H^1(RP2, Z/4) = Z/2, H^2(RP2, Z/4) = Z/2
        let rp2 = Arc::new(Nerve::rp2_min());
        let a = AbSheaf::constant(rp2, &[4]).unwrap();
        assert_eq!(a.cohomology(1).unwrap().invariants, vec![2]);
        assert_eq!(a.cohomology(2).unwrap().invariants, vec![2]);
    }

    #[test]
    fn class_roundtrip_and_invariance() {
        let rp2 = Arc::new(Nerve::rp2_min());
        let a = AbSheaf::constant(rp2, &[4, 2]).unwrap();
        for n in 0..=2 {
            let h = a.cohomology(n).unwrap();
            for idx in 0..h.order() {
                let c = h.coords_of_index(idx);
                let rep = h.representative(&c);
                assert!(a.is_cocycle(n, &rep));
                assert_eq!(h.index_of(&rep).unwrap(), idx);
                if n > 0 {
                    // shifting by a coboundary keeps the class
                    let b: Vec<u64> = (0..a.cochain_len(n - 1)).map(|i| (i as u64 * 3 + 1) % 4).collect();
                    let b: Vec<u64> = b.iter().zip(a.cochain_moduli(n - 1)).map(|(x, m)| x % m).collect();
                    let db = a.coboundary(n - 1, &b);
                    let shifted: Vec<u64> =
                        rep.iter().zip(&db).zip(a.cochain_moduli(n)).map(|((x, y), m)| (x + y) % m).collect();
                    assert_eq!(h.index_of(&shifted).unwrap(), idx);
                }
            }
        }
    }

    #[test]
    fn table_sheaf_conversion_matches_constant() {
        let cyc = Arc::new(Nerve::cycle(4).unwrap());
        let g = Arc::new(FiniteGroup::product(&[FiniteGroup::cyclic(2).unwrap(), FiniteGroup::cyclic(4).unwrap()]).unwrap());
        let f = GroupSheaf::constant(cyc, g);
        let (a, _) = AbSheaf::from_group_sheaf(&f).unwrap();
        assert_eq!(a.cohomology(1).unwrap().order(), 8);
    }

    #[test]
    fn twisted_sheaf_on_cycle() {
        // Z/3 with the sign flip on one edge: H^0 = 0, H^1 = 0
        let cyc = Arc::new(Nerve::cycle(3).unwrap());
        let mut a = AbSheaf::constant(cyc.clone(), &[3]).unwrap();
        let (_, e) = cyc.index_of(&[0, 2]).unwrap();
        a.restr[1][e][0] = Mat::from_cols(1, &[vec![2]]);
        let a = AbSheaf::new(cyc, a.moduli, a.restr).unwrap();
        assert!(a.cohomology(0).unwrap().is_trivial());
        assert!(a.cohomology(1).unwrap().is_trivial());
    }
}
