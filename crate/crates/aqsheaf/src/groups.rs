//! Exact finite groups: Cayley tables, abelian coordinate groups, subgroups,
//! quotients and normal series with AQ-degree and centrality analysis.
//!
//! Elements are indices `0..order` and the identity is always `0`.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{input, structural, unsupported, Result};

pub type Elem = u32;

/// Largest order stored as an explicit Cayley table.
pub const MAX_TABLE: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Repr {
    Table { mul: Vec<Elem>, inv: Vec<Elem> },
    /// Z/m_0 x Z/m_1 x ..., mixed radix with coordinate 0 least significant.
    Coords { moduli: Vec<u32> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    pub name: String,
    order: usize,
    repr: Repr,
}

impl FiniteGroup {
    /// Validated Cayley table: `rows[a][b] = a*b`, element 0 must be the identity.
    pub fn from_table(name: impl Into<String>, rows: &[Vec<Elem>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 || n > MAX_TABLE {
            return Err(input(format!("table order {n} outside 1..={MAX_TABLE}")));
        }
        let mut mul = Vec::with_capacity(n * n);
        for (a, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(input(format!("row {a} has {} entries, expected {n}", row.len())));
            }
            if row.iter().any(|&x| x as usize >= n) {
                return Err(input(format!("row {a} has an out-of-range entry")));
            }
            mul.extend_from_slice(row);
        }
        for a in 0..n {
            if mul[a] as usize != a || mul[a * n] as usize != a {
                return Err(structural("element 0 is not a two-sided identity"));
            }
        }
        let mut inv = vec![0; n];
        for a in 0..n {
            let b = (0..n).find(|&b| mul[a * n + b] == 0 && mul[b * n + a] == 0);
            match b {
                Some(b) => inv[a] = b as Elem,
                None => return Err(structural(format!("element {a} has no inverse"))),
            }
        }
        for a in 0..n {
            for b in 0..n {
                let ab = mul[a * n + b] as usize;
                for c in 0..n {
                    if mul[ab * n + c] != mul[a * n + mul[b * n + c] as usize] {
                        return Err(structural(format!("associativity fails at ({a},{b},{c})")));
                    }
                }
            }
        }
        Ok(FiniteGroup { name: name.into(), order: n, repr: Repr::Table { mul, inv } })
    }

    /// Table built by trusted code; only inverses are derived.
    fn from_mul_unchecked(name: String, n: usize, mul: Vec<Elem>) -> Self {
        let mut inv = vec![0; n];
        for a in 0..n {
            for b in 0..n {
                if mul[a * n + b] == 0 {
                    inv[a] = b as Elem;
                    break;
                }
            }
        }
        FiniteGroup { name, order: n, repr: Repr::Table { mul, inv } }
    }

    fn from_fn(name: String, n: usize, f: impl Fn(usize, usize) -> usize) -> Self {
        let mut mul = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                mul.push(f(a, b) as Elem);
            }
        }
        Self::from_mul_unchecked(name, n, mul)
    }

    pub fn coords(moduli: &[u32]) -> Result<Self> {
        if moduli.contains(&0) {
            return Err(input("zero modulus"));
        }
        let order = moduli.iter().try_fold(1usize, |acc, &m| acc.checked_mul(m as usize));
        match order {
            Some(o) if o <= u32::MAX as usize => {
                let name = if moduli.is_empty() {
                    "1".to_string()
                } else {
                    moduli.iter().map(|m| format!("Z/{m}")).collect::<Vec<_>>().join("x")
                };
                Ok(FiniteGroup { name, order: o, repr: Repr::Coords { moduli: moduli.to_vec() } })
            }
            _ => Err(input("coordinate group too large")),
        }
    }

    pub fn trivial() -> Self {
        Self::coords(&[]).expect("trivial group")
    }

    pub fn cyclic(n: u32) -> Result<Self> {
        let mut g = Self::coords(&[n])?;
        g.name = format!("Z/{n}");
        Ok(g)
    }

    pub fn dihedral(n: usize) -> Result<Self> {
        if n < 1 || 2 * n > MAX_TABLE {
            return Err(input(format!("dihedral({n}) out of range")));
        }
        // r^a s^b stored at a + n*b; s r = r^-1 s.
        Ok(Self::from_fn(format!("D{}", 2 * n), 2 * n, |x, y| {
            let (a1, b1) = (x % n, x / n);
            let (a2, b2) = (y % n, y / n);
            let a = if b1 == 0 { (a1 + a2) % n } else { (a1 + n - a2) % n };
            a + n * ((b1 + b2) % 2)
        }))
    }

    pub fn quaternion8() -> Self {
        // 0:1 1:-1 2:i 3:-i 4:j 5:-j 6:k 7:-k
        let unit = |u: usize, v: usize| -> (usize, bool) {
            // product of basis units 1,i,j,k (0..4) as (unit, negated)
            match (u, v) {
                (0, x) | (x, 0) => (x, false),
                (a, b) if a == b => (0, true),
                (1, 2) => (3, false),
                (2, 3) => (1, false),
                (3, 1) => (2, false),
                (2, 1) => (3, true),
                (3, 2) => (1, true),
                (1, 3) => (2, true),
                _ => unreachable!(),
            }
        };
        Self::from_fn("Q8".into(), 8, |x, y| {
            let (u, su) = (x / 2, x % 2 == 1);
            let (v, sv) = (y / 2, y % 2 == 1);
            let (w, sw) = unit(u, v);
            2 * w + usize::from(su ^ sv ^ sw)
        })
    }

    /// Upper unitriangular 3x3 matrices over Z/p; (a,b,c) stored at a + p b + p^2 c.
    pub fn heisenberg(p: usize) -> Result<Self> {
        if p < 2 || p * p * p > MAX_TABLE {
            return Err(input(format!("heisenberg({p}) out of range")));
        }
        Ok(Self::from_fn(format!("Heis({p})"), p * p * p, |x, y| {
            let (a1, b1, c1) = (x % p, (x / p) % p, x / (p * p));
            let (a2, b2, c2) = (y % p, (y / p) % p, y / (p * p));
            let c = (c1 + c2 + a1 * b2) % p;
            (a1 + a2) % p + p * ((b1 + b2) % p) + p * p * c
        }))
    }

    /// Permutations of 0..n in lexicographic order; `(s*t)(i) = s(t(i))`.
    pub fn symmetric(n: usize) -> Result<Self> {
        if n == 0 || n > 6 {
            return Err(input(format!("symmetric({n}) out of range")));
        }
        let perms = permutations(n);
        let index = |p: &[usize]| perms.binary_search_by(|q| q.as_slice().cmp(p)).expect("perm");
        let m = perms.len();
        Ok(Self::from_fn(format!("S{n}"), m, |a, b| {
            let prod: Vec<usize> = (0..n).map(|i| perms[a][perms[b][i]]).collect();
            index(&prod)
        }))
    }

    /// Direct product; coordinate of the first factor is least significant.
    pub fn product(factors: &[FiniteGroup]) -> Result<Self> {
        if factors.iter().all(|f| matches!(f.repr, Repr::Coords { .. })) {
            let mut moduli = Vec::new();
            for f in factors {
                if let Repr::Coords { moduli: m } = &f.repr {
                    moduli.extend_from_slice(m);
                }
            }
            let mut g = Self::coords(&moduli)?;
            g.name = factors.iter().map(|f| f.name.clone()).collect::<Vec<_>>().join("x");
            return Ok(g);
        }
        let order = factors.iter().try_fold(1usize, |acc, f| acc.checked_mul(f.order));
        let n = match order {
            Some(n) if n <= MAX_TABLE => n,
            _ => return Err(unsupported("product too large for a Cayley table")),
        };
        let name = factors.iter().map(|f| f.name.clone()).collect::<Vec<_>>().join("x");
        Ok(Self::from_fn(name, n, |x, y| {
            let (mut x, mut y, mut out, mut radix) = (x, y, 0, 1);
            for f in factors {
                let (a, b) = (x % f.order, y % f.order);
                x /= f.order;
                y /= f.order;
                out += radix * f.mul(a as Elem, b as Elem) as usize;
                radix *= f.order;
            }
            out
        }))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        0..self.order as Elem
    }

    pub fn is_table(&self) -> bool {
        matches!(self.repr, Repr::Table { .. })
    }

    pub fn moduli(&self) -> Option<&[u32]> {
        match &self.repr {
            Repr::Coords { moduli } => Some(moduli),
            Repr::Table { .. } => None,
        }
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        match &self.repr {
            Repr::Table { mul, .. } => mul[a as usize * self.order + b as usize],
            Repr::Coords { moduli } => {
                let (mut a, mut b) = (a, b);
                let (mut out, mut radix) = (0u32, 1u32);
                for &m in moduli {
                    let d = (a % m + b % m) % m;
                    a /= m;
                    b /= m;
                    out += radix * d;
                    radix = radix.wrapping_mul(m);
                }
                out
            }
        }
    }

    #[inline]
    pub fn inv(&self, a: Elem) -> Elem {
        match &self.repr {
            Repr::Table { inv, .. } => inv[a as usize],
            Repr::Coords { moduli } => {
                let mut a = a;
                let (mut out, mut radix) = (0u32, 1u32);
                for &m in moduli {
                    let d = (m - a % m) % m;
                    a /= m;
                    out += radix * d;
                    radix = radix.wrapping_mul(m);
                }
                out
            }
        }
    }

    /// `a b a^-1 b^-1`
    pub fn commutator(&self, a: Elem, b: Elem) -> Elem {
        self.mul(self.mul(a, b), self.mul(self.inv(a), self.inv(b)))
    }

    pub fn conj(&self, g: Elem, h: Elem) -> Elem {
        self.mul(self.mul(g, h), self.inv(g))
    }

    pub fn pow(&self, a: Elem, k: u64) -> Elem {
        let (mut acc, mut base, mut k) = (0, a, k);
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            k >>= 1;
        }
        acc
    }

    pub fn elem_order(&self, a: Elem) -> u64 {
        let (mut x, mut k) = (a, 1u64);
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        match &self.repr {
            Repr::Coords { .. } => true,
            Repr::Table { .. } => {
                let gens = generating_set(self, &(0..self.order as Elem).collect::<Vec<_>>());
                gens.iter().all(|&a| gens.iter().all(|&b| self.mul(a, b) == self.mul(b, a)))
            }
        }
    }

    /// Relabelled copy of a subgroup (members in ascending order, so the identity stays 0).
    pub fn subgroup_group(&self, h: &Subgroup) -> FiniteGroup {
        let n = h.order();
        let name = format!("{}<{}>", self.name, n);
        if let Repr::Coords { .. } = self.repr {
            if n == self.order {
                return self.clone();
            }
        }
        FiniteGroup::from_fn(name, n, |a, b| {
            h.index_of(self.mul(h.members[a], h.members[b])).expect("closed")
        })
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).expect("successor");
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    out
}

/// Closure of `gens` under multiplication (finite, so inverses come for free).
pub fn closure(g: &FiniteGroup, gens: &[Elem]) -> Vec<Elem> {
    let mut seen = vec![false; g.order()];
    seen[0] = true;
    let mut out = vec![0];
    let mut i = 0;
    while i < out.len() {
        let x = out[i];
        for &s in gens {
            let y = g.mul(x, s);
            if !seen[y as usize] {
                seen[y as usize] = true;
                out.push(y);
            }
        }
        i += 1;
    }
    out.sort_unstable();
    out
}

/// Greedy generating set of the subgroup with the given members (ascending scan).
pub fn generating_set(g: &FiniteGroup, members: &[Elem]) -> Vec<Elem> {
    let mut gens = Vec::new();
    let mut span = vec![false; g.order()];
    span[0] = true;
    let mut span_list = vec![0 as Elem];
    for &m in members {
        if span[m as usize] {
            continue;
        }
        gens.push(m);
        // extend the span by right multiplication with all generators
        let mut i = 0;
        let mut frontier = span_list.clone();
        frontier.push(m);
        span[m as usize] = true;
        span_list.push(m);
        while i < frontier.len() {
            let x = frontier[i];
            for &s in &gens {
                let y = g.mul(x, s);
                if !span[y as usize] {
                    span[y as usize] = true;
                    span_list.push(y);
                    frontier.push(y);
                }
            }
            i += 1;
        }
    }
    gens
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    pub members: Vec<Elem>,
    mask: Vec<bool>,
}

impl Subgroup {
    pub fn new(g: &FiniteGroup, members: &[Elem]) -> Result<Self> {
        let mut members = members.to_vec();
        members.sort_unstable();
        members.dedup();
        let mut mask = vec![false; g.order()];
        for &m in &members {
            if m as usize >= g.order() {
                return Err(structural(format!("element {m} outside group of order {}", g.order())));
            }
            mask[m as usize] = true;
        }
        if members.first() != Some(&0) {
            return Err(structural("subgroup lacks the identity"));
        }
        let gens = generating_set(g, &members);
        for &a in &gens {
            for &b in &members {
                if !mask[g.mul(b, a) as usize] {
                    return Err(structural(format!("not closed: {b}*{a} escapes")));
                }
            }
        }
        Ok(Subgroup { members, mask })
    }

    pub fn generated(g: &FiniteGroup, gens: &[Elem]) -> Self {
        let members = closure(g, gens);
        let mut mask = vec![false; g.order()];
        for &m in &members {
            mask[m as usize] = true;
        }
        Subgroup { members, mask }
    }

    pub fn trivial(g: &FiniteGroup) -> Self {
        Self::generated(g, &[])
    }

    pub fn whole(g: &FiniteGroup) -> Self {
        let members: Vec<Elem> = g.elements().collect();
        Subgroup { mask: vec![true; members.len()], members }
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    #[inline]
    pub fn contains(&self, x: Elem) -> bool {
        self.mask.get(x as usize).copied().unwrap_or(false)
    }

    pub fn index_of(&self, x: Elem) -> Option<usize> {
        self.members.binary_search(&x).ok()
    }

    pub fn is_subset(&self, other: &Subgroup) -> bool {
        self.members.iter().all(|&x| other.contains(x))
    }

    pub fn generators(&self, g: &FiniteGroup) -> Vec<Elem> {
        generating_set(g, &self.members)
    }
}

/// Element map between two groups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupHom {
    pub map: Vec<Elem>,
}

impl GroupHom {
    pub fn identity(g: &FiniteGroup) -> Self {
        GroupHom { map: g.elements().collect() }
    }

    #[inline]
    pub fn apply(&self, x: Elem) -> Elem {
        self.map[x as usize]
    }

    pub fn compose(&self, then: &GroupHom) -> GroupHom {
        GroupHom { map: self.map.iter().map(|&x| then.apply(x)).collect() }
    }

    /// Checks the homomorphism law (on a generating set of the source, which
    /// determines the map because the full table is given).
    pub fn validate(&self, src: &FiniteGroup, tgt: &FiniteGroup) -> Result<()> {
        if self.map.len() != src.order() {
            return Err(structural("hom map length differs from source order"));
        }
        if self.map.iter().any(|&x| x as usize >= tgt.order()) {
            return Err(structural("hom image outside target"));
        }
        if self.map[0] != 0 {
            return Err(structural("hom does not fix the identity"));
        }
        let gens = generating_set(src, &src.elements().collect::<Vec<_>>());
        for a in src.elements() {
            for &s in &gens {
                if self.apply(src.mul(a, s)) != tgt.mul(self.apply(a), self.apply(s)) {
                    return Err(structural(format!("hom law fails at ({a},{s})")));
                }
            }
        }
        Ok(())
    }

    pub fn is_bijective(&self, tgt_order: usize) -> bool {
        if self.map.len() != tgt_order {
            return false;
        }
        let mut seen = vec![false; tgt_order];
        self.map.iter().all(|&x| !std::mem::replace(&mut seen[x as usize], true))
    }
}

pub fn is_normal(g: &FiniteGroup, h: &Subgroup) -> Result<bool> {
    Ok(normality_witness(g, h)?.is_none())
}

/// First `(g, x)` with `g x g^-1` outside `h`, if any.
pub fn normality_witness(g: &FiniteGroup, h: &Subgroup) -> Result<Option<(Elem, Elem)>> {
    if h.mask.len() != g.order() {
        return Err(structural("subgroup belongs to a different group"));
    }
    if g.moduli().is_some() {
        return Ok(None);
    }
    let gens = generating_set(g, &g.elements().collect::<Vec<_>>());
    let hgens = h.generators(g);
    for &s in &gens {
        for &x in &hgens {
            if !h.contains(g.conj(s, x)) {
                return Ok(Some((s, x)));
            }
        }
    }
    Ok(None)
}

/// Cosets of a normal subgroup, numbered by least representative.
#[derive(Debug, Clone)]
pub struct Cosets {
    pub coset_of: Vec<Elem>,
    pub reps: Vec<Elem>,
}

pub fn cosets(g: &FiniteGroup, n: &Subgroup) -> Cosets {
    let mut coset_of = vec![Elem::MAX; g.order()];
    let mut reps = Vec::new();
    for x in g.elements() {
        if coset_of[x as usize] != Elem::MAX {
            continue;
        }
        let id = reps.len() as Elem;
        reps.push(x);
        for &m in &n.members {
            coset_of[g.mul(x, m) as usize] = id;
        }
    }
    Cosets { coset_of, reps }
}

/// Quotient group with its canonical projection.
pub fn quotient(g: &FiniteGroup, n: &Subgroup) -> Result<(FiniteGroup, GroupHom)> {
    if let Some((s, x)) = normality_witness(g, n)? {
        return Err(structural(format!(
            "subgroup not normal: {s} * {x} * {s}^-1 = {} leaves it",
            g.conj(s, x)
        )));
    }
    let c = cosets(g, n);
    let k = c.reps.len();
    if k > MAX_TABLE {
        return Err(unsupported(format!("quotient of order {k} exceeds the table limit")));
    }
    let name = format!("{}/{}", g.name, n.order());
    let q = FiniteGroup::from_fn(name, k, |a, b| {
        c.coset_of[g.mul(c.reps[a], c.reps[b]) as usize] as usize
    });
    Ok((q, GroupHom { map: c.coset_of }))
}

/// The isomorphism `H/H' -> ker(G/H' -> G/H)` together with the pieces it is built from.
#[derive(Debug, Clone)]
pub struct KernelIso {
    /// `H/H'` as an abstract group.
    pub source: FiniteGroup,
    /// `G/H'`.
    pub middle: FiniteGroup,
    /// `G/H`.
    pub target: FiniteGroup,
    /// Kernel of `middle -> target`.
    pub kernel: Subgroup,
    /// `source -> middle`, bijective onto `kernel`.
    pub iso: GroupHom,
    /// `middle -> target`.
    pub proj: GroupHom,
}

pub fn kernel_iso(g: &FiniteGroup, h: &Subgroup, hp: &Subgroup) -> Result<KernelIso> {
    if !hp.is_subset(h) {
        return Err(structural("H' is not contained in H"));
    }
    for (name, sub) in [("H", h), ("H'", hp)] {
        if let Some((s, x)) = normality_witness(g, sub)? {
            return Err(structural(format!("{name} not normal in G (conjugating {x} by {s})")));
        }
    }
    let (middle, pi1) = quotient(g, hp)?;
    let (target, pi2) = quotient(g, h)?;
    // G/H' -> G/H through coset representatives
    let c1 = cosets(g, hp);
    let proj = GroupHom { map: c1.reps.iter().map(|&r| pi2.apply(r)).collect() };
    proj.validate(&middle, &target)?;
    let kernel_members: Vec<Elem> = middle.elements().filter(|&x| proj.apply(x) == 0).collect();
    let kernel = Subgroup::new(&middle, &kernel_members)?;
    let hg = g.subgroup_group(h);
    let hp_in_h: Vec<Elem> =
        hp.members.iter().map(|&x| h.index_of(x).expect("H' in H") as Elem).collect();
    let hp_sub = Subgroup::new(&hg, &hp_in_h)?;
    let (source, _) = quotient(&hg, &hp_sub)?;
    let ch = cosets(&hg, &hp_sub);
    let iso = GroupHom { map: ch.reps.iter().map(|&r| pi1.apply(h.members[r as usize])).collect() };
    iso.validate(&source, &middle)?;
    let mut hit = vec![false; middle.order()];
    for &x in &iso.map {
        if hit[x as usize] || !kernel.contains(x) {
            return Err(structural("H/H' does not map bijectively onto the kernel"));
        }
        hit[x as usize] = true;
    }
    if iso.map.len() != kernel.order() {
        return Err(structural("H/H' and the kernel differ in order"));
    }
    Ok(KernelIso { source, middle, target, kernel, iso, proj })
}

/// Every normal subgroup, ordered by size then members: joins of normal closures of single elements.
pub fn normal_subgroups(g: &FiniteGroup) -> Vec<Subgroup> {
    let ncl = |base: &[Elem], x: Elem| -> Vec<Elem> {
        let mut gens = base.to_vec();
        gens.extend(g.elements().map(|c| g.conj(c, x)));
        gens.sort_unstable();
        gens.dedup();
        closure(g, &gens)
    };
    let mut found: std::collections::BTreeSet<Vec<Elem>> = [vec![0]].into();
    let mut queue = vec![vec![0]];
    while let Some(n) = queue.pop() {
        for x in g.elements() {
            if n.binary_search(&x).is_ok() {
                continue;
            }
            let m = ncl(&n, x);
            if found.insert(m.clone()) {
                queue.push(m);
            }
        }
    }
    let mut out: Vec<Subgroup> = found.into_iter().map(|m| Subgroup::generated(g, &m)).collect();
    out.sort_by(|a, b| (a.order(), &a.members).cmp(&(b.order(), &b.members)));
    out
}

/// `H_0 = G ⊇ H_1 ⊇ ... ⊇ H_N = {e}`, each term normal in `G`.
#[derive(Debug, Clone)]
pub struct NormalSeries {
    pub group: Arc<FiniteGroup>,
    pub terms: Vec<Subgroup>,
}

impl NormalSeries {
    pub fn new(group: Arc<FiniteGroup>, terms: Vec<Subgroup>) -> Result<Self> {
        if terms.is_empty() {
            return Err(input("series needs at least one term"));
        }
        if terms[0].order() != group.order() {
            return Err(structural("first term is not the whole group"));
        }
        if terms.last().map(Subgroup::order) != Some(1) {
            return Err(structural("last term is not trivial"));
        }
        for (j, w) in terms.windows(2).enumerate() {
            if !w[1].is_subset(&w[0]) {
                return Err(structural(format!("term {} is not inside term {j}", j + 1)));
            }
        }
        for (j, t) in terms.iter().enumerate() {
            if let Some((s, x)) = normality_witness(&group, t)? {
                return Err(structural(format!("term {j} is not normal ({s} conjugates {x} out)")));
            }
        }
        Ok(NormalSeries { group, terms })
    }

    /// Index of the last term (`N`).
    pub fn length(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn term(&self, j: usize) -> &Subgroup {
        &self.terms[j.min(self.length())]
    }

    /// The series `H_j/H_{N-1}` on `G/H_{N-1}`, one term shorter.
    pub fn truncate(&self) -> Result<NormalSeries> {
        let n = self.length();
        if n < 2 {
            return Err(input("series too short to truncate"));
        }
        let (q, pi) = quotient(&self.group, &self.terms[n - 1])?;
        let terms = self.terms[..n]
            .iter()
            .map(|t| Subgroup::new(&q, &t.members.iter().map(|&x| pi.apply(x)).collect::<Vec<_>>()))
            .collect::<Result<Vec<_>>>()?;
        NormalSeries::new(Arc::new(q), terms)
    }

    /// `[H_a, H_b] ⊆ H_c`, tested on generators.
    pub fn commutators_in(&self, a: usize, b: usize, c: usize) -> bool {
        let g = &self.group;
        let ga = self.term(a).generators(g);
        let gb = self.term(b).generators(g);
        let target = self.term(c);
        ga.iter().all(|&x| gb.iter().all(|&y| target.contains(g.commutator(x, y))))
    }
}

/// Largest `d ≤ N` with every `H_j/H_{j+i}` abelian for `i ≤ d`; 0 if not AQ.
pub fn aq_degree(s: &NormalSeries) -> usize {
    let n = s.length();
    let mut d = n;
    for j in 0..n {
        let mut best = 0;
        for i in 1..=n {
            if s.commutators_in(j, j, j + i) {
                best = i;
            } else {
                break;
            }
        }
        d = d.min(best);
    }
    d
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CentralCertificate {
    pub central: bool,
    /// `witnesses[j]` is the least `k < j` with `[H_k, H_j] ⊆ H_{j+1}`; entry 0 is unused.
    pub witnesses: Vec<Option<usize>>,
}

pub fn is_central_series(s: &NormalSeries) -> Result<CentralCertificate> {
    if aq_degree(s) == 0 {
        return Err(structural("series is not AQ"));
    }
    let n = s.length();
    let mut witnesses = vec![None; n];
    for j in 1..n {
        let mut found = None;
        for k in (0..j).rev() {
            if s.commutators_in(k, j, j + 1) {
                found = Some(k);
            }
        }
        witnesses[j] = found;
    }
    let central = witnesses.iter().skip(1).all(Option::is_some);
    Ok(CentralCertificate { central, witnesses })
}

/// Lower central series `G ⊇ [G,G] ⊇ [G,[G,G]] ⊇ ...` (must reach the trivial group).
pub fn lower_central_series(g: Arc<FiniteGroup>) -> Result<NormalSeries> {
    let mut terms = vec![Subgroup::whole(&g)];
    loop {
        let last = terms.last().expect("nonempty");
        if last.order() == 1 {
            break;
        }
        let gg = g.elements().collect::<Vec<_>>();
        let ggens = generating_set(&g, &gg);
        let lgens = last.generators(&g);
        let comms: Vec<Elem> =
            ggens.iter().flat_map(|&a| lgens.iter().map(move |&b| (a, b))).map(|(a, b)| g.commutator(a, b)).collect();
        // normal closure of the commutators
        let mut sub = Subgroup::generated(&g, &comms);
        loop {
            let extra: Vec<Elem> = ggens
                .iter()
                .flat_map(|&s| sub.members.iter().map(move |&x| (s, x)))
                .map(|(s, x)| g.conj(s, x))
                .filter(|&y| !sub.contains(y))
                .collect();
            if extra.is_empty() {
                break;
            }
            let mut gens = sub.members.clone();
            gens.extend(extra);
            sub = Subgroup::generated(&g, &gens);
        }
        if sub.order() == last.order() {
            return Err(structural(format!("{} is not nilpotent", g.name)));
        }
        terms.push(sub);
    }
    NormalSeries::new(g, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s3() -> FiniteGroup {
        FiniteGroup::symmetric(3).unwrap()
    }

    fn a3(g: &FiniteGroup) -> Subgroup {
        // even permutations of 0..3 in lex order: 012, 120, 201
        Subgroup::new(g, &[0, 3, 4]).unwrap()
    }

    #[test]
    fn s3_normality() {
        let g = s3();
        assert!(is_normal(&g, &Subgroup::trivial(&g)).unwrap());
        assert!(is_normal(&g, &a3(&g)).unwrap());
        // transposition 021 is element 1
        let t = Subgroup::generated(&g, &[1]);
        assert_eq!(t.order(), 2);
        assert!(!is_normal(&g, &t).unwrap());
        assert!(quotient(&g, &t).is_err());
    }

    #[test]
    fn z8_mod_four_is_z4() {
        let g = FiniteGroup::cyclic(8).unwrap();
        let n = Subgroup::generated(&g, &[4]);
        let (q, pi) = quotient(&g, &n).unwrap();
        assert_eq!(q.order(), 4);
        assert!(q.is_abelian());
        assert_eq!(pi.map, vec![0, 1, 2, 3, 0, 1, 2, 3]);
        assert_eq!(q.elem_order(1), 4);
        let (t, _) = quotient(&g, &Subgroup::whole(&g)).unwrap();
        assert_eq!(t.order(), 1);
        let (same, pi) = quotient(&g, &Subgroup::trivial(&g)).unwrap();
        assert_eq!(same.order(), 8);
        assert!(pi.is_bijective(8));
    }

    #[test]
    fn kernel_iso_examples() {
        let g = FiniteGroup::cyclic(8).unwrap();
        let h = Subgroup::generated(&g, &[2]);
        let hp = Subgroup::generated(&g, &[4]);
        let k = kernel_iso(&g, &h, &hp).unwrap();
        assert_eq!(k.source.order(), 2);
        assert_eq!(k.middle.order(), 4);
        assert_eq!(k.kernel.order(), 2);

        let g = s3();
        let k = kernel_iso(&g, &a3(&g), &Subgroup::trivial(&g)).unwrap();
        assert_eq!(k.source.order(), 3);
        assert_eq!(k.target.order(), 2);
        assert_eq!(k.kernel.order(), 3);
    }

    #[test]
    fn degrees_of_named_series() {
        let h = Arc::new(FiniteGroup::heisenberg(3).unwrap());
        let lcs = lower_central_series(h).unwrap();
        assert_eq!(lcs.length(), 2);
        assert_eq!(aq_degree(&lcs), 1);
        let cert = is_central_series(&lcs).unwrap();
        assert!(cert.central);
        assert_eq!(cert.witnesses, vec![None, Some(0)]);

        let q = Arc::new(FiniteGroup::quaternion8());
        // i generates a Z/4, -1 the centre
        let terms = vec![
            Subgroup::whole(&q),
            Subgroup::generated(&q, &[2]),
            Subgroup::generated(&q, &[1]),
            Subgroup::trivial(&q),
        ];
        let s = NormalSeries::new(q, terms).unwrap();
        assert_eq!(aq_degree(&s), 2);
        assert!(is_central_series(&s).unwrap().central);

        let g = Arc::new(s3());
        let terms = vec![Subgroup::whole(&g), a3(&g), Subgroup::trivial(&g)];
        let s = NormalSeries::new(g, terms).unwrap();
        assert_eq!(aq_degree(&s), 1);
        let cert = is_central_series(&s).unwrap();
        assert!(!cert.central);
        assert_eq!(cert.witnesses[1], None);
    }

    #[test]
    fn abelian_series_has_full_degree() {
        let g = Arc::new(FiniteGroup::cyclic(8).unwrap());
        let terms = vec![
            Subgroup::whole(&g),
            Subgroup::generated(&g, &[2]),
            Subgroup::generated(&g, &[4]),
            Subgroup::trivial(&g),
        ];
        let s = NormalSeries::new(g, terms).unwrap();
        assert_eq!(aq_degree(&s), 3);
        assert!(is_central_series(&s).unwrap().central);
    }

    #[test]
    fn named_constructions_are_groups() {
        for g in [
            FiniteGroup::quaternion8(),
            FiniteGroup::dihedral(4).unwrap(),
            FiniteGroup::heisenberg(3).unwrap(),
            FiniteGroup::symmetric(3).unwrap(),
        ] {
            let n = g.order();
            let rows: Vec<Vec<Elem>> =
                (0..n as Elem).map(|a| (0..n as Elem).map(|b| g.mul(a, b)).collect()).collect();
            FiniteGroup::from_table(g.name.clone(), &rows).unwrap();
        }
        assert!(!FiniteGroup::quaternion8().is_abelian());
        assert_eq!(FiniteGroup::symmetric(4).unwrap().order(), 24);
    }

    /// All subgroups of a small group, by closure of element pairs.
    fn subgroups(g: &FiniteGroup) -> Vec<Subgroup> {
        let mut out: Vec<Subgroup> = Vec::new();
        for a in g.elements() {
            for b in g.elements() {
                let s = Subgroup::generated(g, &[a, b]);
                if !out.contains(&s) {
                    out.push(s);
                }
            }
        }
        out
    }

    fn small_groups() -> Vec<FiniteGroup> {
        vec![
            FiniteGroup::cyclic(8).unwrap(),
            FiniteGroup::symmetric(3).unwrap(),
            FiniteGroup::quaternion8(),
            FiniteGroup::dihedral(4).unwrap(),
            FiniteGroup::heisenberg(3).unwrap(),
            FiniteGroup::product(&[FiniteGroup::cyclic(2).unwrap(), FiniteGroup::cyclic(4).unwrap()]).unwrap(),
            FiniteGroup::product(&[FiniteGroup::symmetric(3).unwrap(), FiniteGroup::cyclic(2).unwrap()]).unwrap(),
        ]
    }

    #[test]
    fn lemma_exactness_on_all_normal_pairs() {
        for g in small_groups() {
            let normals: Vec<Subgroup> =
                subgroups(&g).into_iter().filter(|s| is_normal(&g, s).unwrap()).collect();
            for h in &normals {
                for hp in normals.iter().filter(|hp| hp.is_subset(h)) {
                    let k = kernel_iso(&g, h, hp).unwrap();
                    // exactness: image of H/H' equals kernel of G/H' -> G/H
                    let mut image: Vec<Elem> = k.iso.map.clone();
                    image.sort_unstable();
                    assert_eq!(image, k.kernel.members);
                }
            }
        }
    }

    #[test]
    fn normal_subgroups_match_brute_force() {
        for g in small_groups() {
            let mut brute: Vec<Vec<Elem>> =
                subgroups(&g).into_iter().filter(|s| is_normal(&g, s).unwrap()).map(|s| s.members).collect();
            brute.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
            let fast: Vec<Vec<Elem>> = normal_subgroups(&g).into_iter().map(|s| s.members).collect();
            assert_eq!(fast, brute);
        }
    }

    #[test]
    fn third_isomorphism_on_small_groups() {
        for g in small_groups() {
            let normals: Vec<Subgroup> =
                subgroups(&g).into_iter().filter(|s| is_normal(&g, s).unwrap()).collect();
            for n in &normals {
                for m in normals.iter().filter(|m| n.is_subset(m)) {
                    let (gn, pn) = quotient(&g, n).unwrap();
                    let img: Vec<Elem> = m.members.iter().map(|&x| pn.apply(x)).collect();
                    let m_img = Subgroup::new(&gn, &img).unwrap();
                    let (twice, p2) = quotient(&gn, &m_img).unwrap();
                    let (once, p1) = quotient(&g, m).unwrap();
                    assert_eq!(twice.order(), once.order());
                    // the composite projection and the direct one have the same fibres
                    for a in g.elements() {
                        for b in g.elements() {
                            let same_twice = p2.apply(pn.apply(a)) == p2.apply(pn.apply(b));
                            let same_once = p1.apply(a) == p1.apply(b);
                            assert_eq!(same_twice, same_once);
                        }
                    }
                }
            }
        }
    }

    fn chain_series() -> Vec<NormalSeries> {
        let mut out = Vec::new();
        let z16 = Arc::new(FiniteGroup::cyclic(16).unwrap());
        let terms: Vec<Subgroup> = [1u32, 2, 4, 8, 0].iter().map(|&x| Subgroup::generated(&z16, &[x])).collect();
        out.push(NormalSeries::new(z16, terms).unwrap());
        let q = Arc::new(FiniteGroup::quaternion8());
        let terms = vec![
            Subgroup::whole(&q),
            Subgroup::generated(&q, &[2]),
            Subgroup::generated(&q, &[1]),
            Subgroup::trivial(&q),
        ];
        out.push(NormalSeries::new(q, terms).unwrap());
        for g in [FiniteGroup::heisenberg(3).unwrap(), FiniteGroup::dihedral(4).unwrap(), FiniteGroup::dihedral(8).unwrap()] {
            out.push(lower_central_series(Arc::new(g)).unwrap());
        }
        out
    }

    proptest! {
        #[test]
        fn truncation_never_lowers_degree(pick in 0usize..5) {
            let s = &chain_series()[pick];
            let d = aq_degree(s);
            if s.length() >= 2 {
                let t = s.truncate().unwrap();
                prop_assert_eq!(t.length(), s.length() - 1);
                prop_assert!(aq_degree(&t) >= d.min(t.length()));
            }
        }
    }

    #[test]
    fn degree_two_implies_central() {
        for g in small_groups() {
            let g = Arc::new(g);
            if let Ok(lcs) = lower_central_series(g.clone()) {
                if aq_degree(&lcs) >= 2 {
                    assert!(is_central_series(&lcs).unwrap().central);
                }
            }
        }
    }
}
