//! Exterior algebras over `F_p[x]/(x^n)`, Green's groups `G^(k)` of
//! automorphisms congruent to the identity modulo `J^k`, and the builders
//! that turn a rank-`q` model on a nerve into a sheaf series.
//!
//! An algebra element is a coefficient vector indexed by `mask * n + a` for
//! the monomial `x^a θ_S`, `S` the bit set `mask`. Automorphisms are stored
//! by the images of `x` and of every `θ_i`.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::abelian::AbSheaf;
use crate::error::{input, structural, Result};
use crate::groups::{Elem, FiniteGroup, GroupHom, Subgroup, MAX_TABLE};
use crate::linalg::Mat;
use crate::sites::{GreenParams, GroupSheaf, Nerve, SeriesTag, SheafSeries, SubSheaf, MAX_DIM};

pub type AlgElem = Vec<u64>;

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..p).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// `F_p[x]/(x^n)`; elements are coefficient vectors of length `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct BaseRing {
    pub p: u64,
    pub n: usize,
}

impl BaseRing {
    pub fn new(p: u64, n: usize) -> Result<Self> {
        if !is_prime(p) || p > 97 {
            return Err(input(format!("characteristic {p} must be a prime below 100")));
        }
        if n == 0 || n > 4 {
            return Err(input(format!("nilpotency order {n} outside 1..=4")));
        }
        Ok(BaseRing { p, n })
    }

    pub fn size(&self) -> u64 {
        self.p.pow(self.n as u32)
    }

    pub fn element(&self, mut idx: u64) -> Vec<u64> {
        (0..self.n)
            .map(|_| {
                let c = idx % self.p;
                idx /= self.p;
                c
            })
            .collect()
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).map(|(x, y)| (x + y) % self.p).collect()
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let mut out = vec![0; self.n];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate().take(self.n - i) {
                out[i + j] = (out[i + j] + x * y) % self.p;
            }
        }
        out
    }

    pub fn is_unit(&self, a: &[u64]) -> bool {
        !a[0].is_multiple_of(self.p)
    }

    pub fn inv(&self, a: &[u64]) -> Option<Vec<u64>> {
        if !self.is_unit(a) {
            return None;
        }
        let c = crate::linalg::ChainRing::new(self.p, 1).inv_unit(a[0]);
        // a = a0 (1 + y), y nilpotent
        let y: Vec<u64> = a.iter().map(|&v| v * c % self.p).enumerate().map(|(i, v)| if i == 0 { 0 } else { v }).collect();
        let neg_y: Vec<u64> = y.iter().map(|&v| (self.p - v) % self.p).collect();
        let mut term = self.one();
        let mut sum = self.one();
        for _ in 1..self.n {
            term = self.mul(&term, &neg_y);
            sum = self.add(&sum, &term);
        }
        Some(sum.iter().map(|&v| v * c % self.p).collect())
    }

    pub fn one(&self) -> Vec<u64> {
        let mut v = vec![0; self.n];
        v[0] = 1;
        v
    }

    /// Commutative unital ring axioms on every pair and triple of elements.
    pub fn check_axioms(&self) -> Result<()> {
        let all: Vec<Vec<u64>> = (0..self.size()).map(|i| self.element(i)).collect();
        let one = self.one();
        for a in &all {
            if self.mul(a, &one) != *a {
                return Err(structural("unit law fails"));
            }
            for b in &all {
                if self.mul(a, b) != self.mul(b, a) || self.add(a, b) != self.add(b, a) {
                    return Err(structural("commutativity fails"));
                }
                for c in &all {
                    if self.mul(&self.mul(a, b), c) != self.mul(a, &self.mul(b, c)) {
                        return Err(structural("associativity fails"));
                    }
                    if self.mul(a, &self.add(b, c)) != self.add(&self.mul(a, b), &self.mul(a, c)) {
                        return Err(structural("distributivity fails"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Dimension over `F_p` of the derivations, counted by brute force over
    /// the image of `x`: `D` is well defined iff `n x^(n-1) D(x) = 0`.
    pub fn derivation_dim(&self) -> usize {
        if self.n == 1 {
            return 0;
        }
        let mut xn1 = vec![0; self.n];
        xn1[self.n - 1] = self.n as u64 % self.p;
        let count = (0..self.size()).filter(|&i| self.mul(&xn1, &self.element(i)).iter().all(|&v| v == 0)).count();
        let mut d = 0;
        while self.p.pow(d as u32) < count as u64 {
            d += 1;
        }
        d
    }
}

fn reorder_sign(a: u32, b: u32) -> bool {
    // parity of pairs (i in a, j in b) with i > j
    let mut odd = false;
    let mut bb = b;
    while bb != 0 {
        let j = bb.trailing_zeros();
        odd ^= (a >> (j + 1)).count_ones() % 2 == 1;
        bb &= bb - 1;
    }
    odd
}

/// `R ⊗ ∧(θ_1..θ_q)` over `R = F_p[x]/(x^n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ExteriorAlgebra {
    pub base: BaseRing,
    pub q: usize,
}

impl ExteriorAlgebra {
    pub fn new(p: u64, q: usize, n: usize) -> Result<Self> {
        if q == 0 || q > 5 {
            return Err(input(format!("rank {q} outside 1..=5")));
        }
        Ok(ExteriorAlgebra { base: BaseRing::new(p, n)?, q })
    }

    pub fn p(&self) -> u64 {
        self.base.p
    }

    pub fn n(&self) -> usize {
        self.base.n
    }

    pub fn params(&self) -> GreenParams {
        GreenParams { p: self.p(), q: self.q, n: self.n() }
    }

    pub fn dim(&self) -> usize {
        (1 << self.q) * self.n()
    }

    pub fn zero(&self) -> AlgElem {
        vec![0; self.dim()]
    }

    pub fn monomial(&self, a: usize, mask: u32, c: u64) -> AlgElem {
        let mut e = self.zero();
        e[mask as usize * self.n() + a] = c % self.p();
        e
    }

    pub fn one(&self) -> AlgElem {
        self.monomial(0, 0, 1)
    }

    pub fn x(&self) -> AlgElem {
        if self.n() < 2 {
            return self.zero();
        }
        self.monomial(1, 0, 1)
    }

    pub fn theta(&self, i: usize) -> AlgElem {
        self.monomial(0, 1 << i, 1)
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> AlgElem {
        a.iter().zip(b).map(|(x, y)| (x + y) % self.p()).collect()
    }

    pub fn sub(&self, a: &[u64], b: &[u64]) -> AlgElem {
        a.iter().zip(b).map(|(x, y)| (x + self.p() - y) % self.p()).collect()
    }

    pub fn scale(&self, a: &[u64], c: u64) -> AlgElem {
        a.iter().map(|x| x * (c % self.p()) % self.p()).collect()
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> AlgElem {
        let (n, p) = (self.n(), self.p());
        let mut out = self.zero();
        let masks = 1u32 << self.q;
        for ma in 0..masks {
            for xa in 0..n {
                let c = a[ma as usize * n + xa];
                if c == 0 {
                    continue;
                }
                for mb in 0..masks {
                    if ma & mb != 0 {
                        continue;
                    }
                    let neg = reorder_sign(ma, mb);
                    for xb in 0..n - xa {
                        let d = b[mb as usize * n + xb];
                        if d == 0 {
                            continue;
                        }
                        let v = c * d % p;
                        let slot = &mut out[(ma | mb) as usize * n + xa + xb];
                        *slot = if neg { (*slot + p - v) % p } else { (*slot + v) % p };
                    }
                }
            }
        }
        out
    }

    pub fn pow(&self, a: &[u64], k: usize) -> AlgElem {
        (0..k).fold(self.one(), |acc, _| self.mul(&acc, a))
    }

    pub fn is_zero(&self, a: &[u64]) -> bool {
        a.iter().all(|&v| v == 0)
    }

    fn terms<'a>(&self, a: &'a [u64]) -> impl Iterator<Item = (usize, u32, u64)> + 'a {
        let n = self.n();
        a.iter().enumerate().filter(|(_, &c)| c != 0).map(move |(k, &c)| (k % n, (k / n) as u32, c))
    }

    /// Smallest `|S|` among nonzero monomials; `q + 1` for zero.
    pub fn order_in_j(&self, a: &[u64]) -> usize {
        self.terms(a).map(|(_, m, _)| m.count_ones() as usize).min().unwrap_or(self.q + 1)
    }

    /// `a ∈ J^k`, i.e. `a ∈ ⊕_{j≥k} ∧^j`.
    pub fn in_j_power(&self, a: &[u64], k: usize) -> bool {
        self.is_zero(a) || self.order_in_j(a) >= k
    }

    pub fn grade_part(&self, a: &[u64], j: usize) -> AlgElem {
        let n = self.n();
        a.iter().enumerate().map(|(k, &c)| if (k / n).count_ones() as usize == j { c } else { 0 }).collect()
    }

    pub fn is_even(&self, a: &[u64]) -> bool {
        self.terms(a).all(|(_, m, _)| m.count_ones() % 2 == 0)
    }

    pub fn is_odd(&self, a: &[u64]) -> bool {
        self.terms(a).all(|(_, m, _)| m.count_ones() % 2 == 1)
    }

    /// Scales the grade-`j` part by `λ^j`.
    pub fn dilate(&self, lambda: u64, a: &[u64]) -> Result<AlgElem> {
        if lambda.is_multiple_of(self.p()) {
            return Err(input(format!("{lambda} is not a unit mod {}", self.p())));
        }
        let n = self.n();
        Ok(a.iter()
            .enumerate()
            .map(|(k, &c)| c * mod_pow(lambda, (k / n).count_ones() as u64, self.p()) % self.p())
            .collect())
    }

    pub fn identity_aut(&self) -> AlgebraAut {
        AlgebraAut { x: self.x(), theta: (0..self.q).map(|i| self.theta(i)).collect() }
    }

    /// `α(e)`, substituting the generator images.
    pub fn apply(&self, alpha: &AlgebraAut, e: &[u64]) -> AlgElem {
        Substitution::new(self, alpha).apply(self, e)
    }

    /// `α ∘ β`.
    pub fn compose(&self, alpha: &AlgebraAut, beta: &AlgebraAut) -> AlgebraAut {
        let s = Substitution::new(self, alpha);
        AlgebraAut { x: s.apply(self, &beta.x), theta: beta.theta.iter().map(|t| s.apply(self, t)).collect() }
    }

    /// Parity-preserving, compatible with `x^n = 0`, and invertible modulo `J`.
    pub fn is_automorphism(&self, alpha: &AlgebraAut) -> bool {
        if alpha.theta.len() != self.q || !alpha.theta.iter().all(|t| self.is_odd(t)) {
            return false;
        }
        if self.n() >= 2 {
            if !self.is_even(&alpha.x) || !self.is_zero(&self.pow(&alpha.x, self.n())) {
                return false;
            }
            // on R = F_p[x]/(x^n) the image of x must be a unit multiple of x plus J
            let (c0, c1) = (alpha.x[0], alpha.x[1]);
            if c0 != 0 || c1 == 0 {
                return false;
            }
        }
        // linear part on ∧^1 modulo x must be invertible
        let n = self.n();
        let mut m = Mat::zeros(self.q, self.q);
        for (i, t) in alpha.theta.iter().enumerate() {
            for j in 0..self.q {
                m.set(j, i, t[(1usize << j) * n]);
            }
        }
        let s = crate::linalg::snf(&m, crate::linalg::ChainRing::new(self.p(), 1));
        s.rank() == self.q
    }

    /// Largest `k` with `α ≡ id mod J^k` (`q + 1` for the identity, 0 if not congruent mod `J`).
    pub fn level(&self, alpha: &AlgebraAut) -> usize {
        let id = self.identity_aut();
        let mut k = self.order_in_j(&self.sub(&alpha.x, &id.x));
        for (a, b) in alpha.theta.iter().zip(&id.theta) {
            k = k.min(self.order_in_j(&self.sub(a, b)));
        }
        k
    }

    /// `θ_i ↦ Σ_j T_ij θ_j` and `x ↦ x`, for `T` over the base ring.
    pub fn linear_aut(&self, t: &RMatrix) -> Result<AlgebraAut> {
        if t.len() != self.q || t.iter().any(|r| r.len() != self.q || r.iter().any(|c| c.len() != self.n())) {
            return Err(input(format!("transition must be a {0}x{0} matrix over the base ring", self.q)));
        }
        let n = self.n();
        let theta = (0..self.q)
            .map(|i| {
                let mut e = self.zero();
                for j in 0..self.q {
                    for a in 0..n {
                        e[(1usize << j) * n + a] = t[i][j][a] % self.p();
                    }
                }
                e
            })
            .collect();
        Ok(AlgebraAut { x: self.x(), theta })
    }

    /// Inverse of a unipotent automorphism, as its `(order - 1)`-th power.
    pub fn inverse(&self, alpha: &AlgebraAut) -> Result<AlgebraAut> {
        let id = self.identity_aut();
        let mut prev = id.clone();
        let mut cur = alpha.clone();
        for _ in 0..100_000 {
            if cur == id {
                return Ok(prev);
            }
            prev = cur.clone();
            cur = self.compose(alpha, &cur);
        }
        Err(structural("automorphism has no finite order below the search cap"))
    }

    /// `λ α λ⁻¹` for the dilation automorphism `θ_i ↦ λ θ_i`.
    pub fn dilate_aut(&self, lambda: u64, alpha: &AlgebraAut) -> Result<AlgebraAut> {
        let p = self.p();
        if lambda.is_multiple_of(p) {
            return Err(input(format!("{lambda} is not a unit mod {p}")));
        }
        let inv = crate::linalg::ChainRing::new(p, 1).inv_unit(lambda % p);
        let scalar = |c: u64| -> RMatrix {
            (0..self.q)
                .map(|i| (0..self.q).map(|j| if i == j { self.base_const(c) } else { vec![0; self.n()] }).collect())
                .collect()
        };
        let l = self.linear_aut(&scalar(lambda))?;
        let li = self.linear_aut(&scalar(inv))?;
        Ok(self.compose(&l, &self.compose(alpha, &li)))
    }

    fn base_const(&self, c: u64) -> Vec<u64> {
        let mut v = vec![0; self.n()];
        v[0] = c % self.p();
        v
    }
}

pub(crate) fn mod_pow(b: u64, e: u64, m: u64) -> u64 {
    let (mut r, mut b, mut e) = (1 % m, b % m, e);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

/// Cached powers of the images, so many elements can be substituted cheaply.
struct Substitution {
    xpow: Vec<AlgElem>,
    mono: Vec<AlgElem>,
}

impl Substitution {
    fn new(alg: &ExteriorAlgebra, alpha: &AlgebraAut) -> Self {
        let mut xpow = vec![alg.one()];
        for a in 1..alg.n() {
            xpow.push(alg.mul(&xpow[a - 1], &alpha.x));
        }
        let mut mono = vec![alg.one(); 1 << alg.q];
        for mask in 1u32..(1 << alg.q) {
            let top = 31 - mask.leading_zeros();
            let rest = mask & !(1 << top);
            mono[mask as usize] = alg.mul(&mono[rest as usize], &alpha.theta[top as usize]);
        }
        Substitution { xpow, mono }
    }

    fn apply(&self, alg: &ExteriorAlgebra, e: &[u64]) -> AlgElem {
        let mut out = alg.zero();
        for (a, mask, c) in alg.terms(e) {
            let t = alg.mul(&self.xpow[a], &self.mono[mask as usize]);
            for (o, v) in out.iter_mut().zip(t) {
                *o = (*o + c * v) % alg.p();
            }
        }
        out
    }
}

/// Entries are base-ring coefficient vectors.
pub type RMatrix = Vec<Vec<Vec<u64>>>;

pub fn rmatrix_identity(base: BaseRing, q: usize) -> RMatrix {
    (0..q).map(|i| (0..q).map(|j| if i == j { base.one() } else { vec![0; base.n] }).collect()).collect()
}

pub fn rmatrix_mul(base: BaseRing, a: &RMatrix, b: &RMatrix) -> RMatrix {
    let q = a.len();
    (0..q)
        .map(|i| {
            (0..q)
                .map(|j| (0..q).fold(vec![0; base.n], |acc, k| base.add(&acc, &base.mul(&a[i][k], &b[k][j]))))
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct AlgebraAut {
    pub x: AlgElem,
    pub theta: Vec<AlgElem>,
}

/// Which generator a shift moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ShiftTarget {
    X,
    Theta(usize),
}

/// The elementary automorphism moving one generator by `x^power θ_mask`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ShiftGen {
    pub level: usize,
    pub target: ShiftTarget,
    pub mask: u32,
    pub power: usize,
}

impl ShiftGen {
    pub fn is_even(&self) -> bool {
        self.target == ShiftTarget::X
    }

    pub fn aut(&self, alg: &ExteriorAlgebra, c: u64) -> AlgebraAut {
        let mut a = alg.identity_aut();
        let m = alg.monomial(self.power, self.mask, c);
        match self.target {
            ShiftTarget::X => a.x = alg.add(&a.x, &m),
            ShiftTarget::Theta(i) => a.theta[i] = alg.add(&a.theta[i], &m),
        }
        a
    }

    /// Position of the moved coefficient in the shift data.
    fn slot(&self, alg: &ExteriorAlgebra) -> (usize, usize) {
        let which = match self.target {
            ShiftTarget::X => 0,
            ShiftTarget::Theta(i) => i + 1,
        };
        (which, self.mask as usize * alg.n() + self.power)
    }
}

/// Elementary shifts of level at least `k`, sorted by level.
pub fn shift_generators(alg: &ExteriorAlgebra, k: usize) -> Vec<ShiftGen> {
    let (p, q, n) = (alg.p(), alg.q, alg.n());
    let mut out = Vec::new();
    for mask in 1u32..(1 << q) {
        let s = mask.count_ones() as usize;
        if s < k {
            continue;
        }
        if s.is_multiple_of(2) && n >= 2 {
            let lo = if (n as u64).is_multiple_of(p) { 0 } else { 1 };
            for power in lo..n {
                out.push(ShiftGen { level: s, target: ShiftTarget::X, mask, power });
            }
        }
        if s % 2 == 1 && s >= 2 {
            for i in 0..q {
                for power in 0..n {
                    out.push(ShiftGen { level: s, target: ShiftTarget::Theta(i), mask, power });
                }
            }
        }
    }
    out.sort();
    out
}

/// `G^(k)` in the substitution representation.
#[derive(Debug, Clone)]
pub struct GreenGroup {
    pub alg: ExteriorAlgebra,
    pub k: usize,
    pub gens: Vec<ShiftGen>,
}

pub fn green_group(alg: &ExteriorAlgebra, k: usize) -> Result<GreenGroup> {
    if k < 2 {
        return Err(input("Green's filtration starts at k = 2"));
    }
    Ok(GreenGroup { alg: *alg, k, gens: shift_generators(alg, k) })
}

impl GreenGroup {
    pub fn contains(&self, alpha: &AlgebraAut) -> bool {
        self.alg.is_automorphism(alpha) && self.alg.level(alpha) >= self.k
    }

    pub fn mul(&self, a: &AlgebraAut, b: &AlgebraAut) -> AlgebraAut {
        self.alg.compose(a, b)
    }

    pub fn inv(&self, a: &AlgebraAut) -> Result<AlgebraAut> {
        self.alg.inverse(a)
    }

    pub fn generator_auts(&self) -> Vec<AlgebraAut> {
        self.gens.iter().map(|g| g.aut(&self.alg, 1)).collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.gens.is_empty()
    }

    /// `log_p |G^(k)|` from the count of elementary shifts.
    pub fn log_order(&self) -> usize {
        self.gens.len()
    }

    /// Every element, by closure of the generators (for small groups).
    pub fn elements(&self, cap: usize) -> Result<Vec<AlgebraAut>> {
        let gens = self.generator_auts();
        let mut seen: HashMap<AlgebraAut, ()> = HashMap::new();
        let id = self.alg.identity_aut();
        seen.insert(id.clone(), ());
        let mut frontier = vec![id];
        let mut all = frontier.clone();
        while let Some(a) = frontier.pop() {
            for g in &gens {
                let b = self.alg.compose(g, &a);
                if !seen.contains_key(&b) {
                    if all.len() >= cap {
                        return Err(structural(format!("G^({}) exceeds {cap} elements", self.k)));
                    }
                    seen.insert(b.clone(), ());
                    all.push(b.clone());
                    frontier.push(b);
                }
            }
        }
        all.sort();
        Ok(all)
    }

    /// Every parity-preserving candidate `x ↦ x + ν`, `θ_i ↦ θ_i + ν_i` with
    /// `ν, ν_i ∈ J^k`, kept when it is an automorphism.
    pub fn enumerate_candidates(&self, cap: u64) -> Result<Vec<AlgebraAut>> {
        let alg = &self.alg;
        let n = alg.n();
        let even: Vec<(usize, u32)> = (0u32..(1 << alg.q))
            .filter(|m| m.count_ones() as usize >= self.k && m.count_ones() % 2 == 0 && n >= 2)
            .flat_map(|m| (0..n).map(move |a| (a, m)))
            .collect();
        let odd: Vec<(usize, u32)> = (0u32..(1 << alg.q))
            .filter(|m| m.count_ones() as usize >= self.k && m.count_ones() % 2 == 1)
            .flat_map(|m| (0..n).map(move |a| (a, m)))
            .collect();
        let slots = even.len() + alg.q * odd.len();
        let total = (alg.p() as u128).checked_pow(slots as u32).unwrap_or(u128::MAX);
        if total > cap as u128 {
            return Err(crate::Error::Resource { what: "Green candidates".into(), needed: total, budget: cap });
        }
        let mut out = Vec::new();
        for idx in 0..total as u64 {
            let mut r = idx;
            let mut digit = || {
                let d = r % alg.p();
                r /= alg.p();
                d
            };
            let mut a = alg.identity_aut();
            for &(pw, m) in &even {
                a.x = alg.add(&a.x, &alg.monomial(pw, m, digit()));
            }
            for i in 0..alg.q {
                for &(pw, m) in &odd {
                    a.theta[i] = alg.add(&a.theta[i], &alg.monomial(pw, m, digit()));
                }
            }
            if alg.is_automorphism(&a) {
                out.push(a);
            }
        }
        out.sort();
        Ok(out)
    }
}

/// Structure checks on Green's filtration of one algebra, by generators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GreenStructure {
    pub params: GreenParams,
    /// `log_p |G^(k)|` for `k = 2..=q+1`.
    pub log_orders: Vec<usize>,
    /// `G^(k)` is trivial for `k > q`.
    pub top_trivial: bool,
    /// `G^(k+1)` is normal in `G^(k)`.
    pub normal_in_next: bool,
    /// `G^(k)` is normal in `G^(2)`.
    pub normal_in_first: bool,
    /// `G^(k)/G^(k+1)` is abelian.
    pub abelian_quotients: bool,
    /// `G^(j)/G^(j+4)` is abelian.
    pub degree_four: bool,
    /// First `(j, a, b)` with `[a, b] ∉ G^(j+4)`.
    pub degree_four_witness: Option<(usize, ShiftGen, ShiftGen)>,
    pub conjugations: usize,
}

impl GreenStructure {
    pub fn holds(&self) -> bool {
        self.top_trivial && self.normal_in_next && self.normal_in_first && self.abelian_quotients && self.degree_four
    }
}

/// `a b a⁻¹ b⁻¹`.
fn commutator(alg: &ExteriorAlgebra, a: &AlgebraAut, b: &AlgebraAut) -> Result<AlgebraAut> {
    let (ai, bi) = (alg.inverse(a)?, alg.inverse(b)?);
    Ok(alg.compose(a, &alg.compose(b, &alg.compose(&ai, &bi))))
}

/// Normality, abelian quotients and AQ degree 4 of `G^(2) ⊇ G^(3) ⊇ ...`,
/// checked on conjugates and commutators of elementary shifts.
pub fn green_structure(alg: &ExteriorAlgebra) -> Result<GreenStructure> {
    let q = alg.q;
    let groups = (2..=q + 2).map(|k| green_group(alg, k)).collect::<Result<Vec<_>>>()?;
    let g = |k: usize| &groups[k.min(q + 2) - 2];
    let gens: Vec<Vec<(ShiftGen, AlgebraAut)>> =
        groups.iter().map(|gr| gr.gens.iter().map(|s| (*s, s.aut(alg, 1))).collect()).collect();
    let gens_of = |k: usize| &gens[k.min(q + 2) - 2];
    let id = alg.identity_aut();
    let in_level = |a: &AlgebraAut, k: usize| alg.is_automorphism(a) && (*a == id || alg.level(a) >= k);
    let mut conjugations = 0;
    let mut conj_within = |outer: usize, inner: usize| -> Result<bool> {
        for (_, a) in gens_of(outer) {
            let ai = alg.inverse(a)?;
            for (_, h) in gens_of(inner) {
                conjugations += 1;
                if !in_level(&alg.compose(a, &alg.compose(h, &ai)), inner) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    };
    let mut normal_in_next = true;
    let mut normal_in_first = true;
    for k in 2..=q {
        normal_in_next &= conj_within(k, k + 1)?;
        normal_in_first &= conj_within(2, k + 1)?;
    }
    // a generator of level above q would be a nontrivial element of G^(q+1)
    let top_trivial = g(q + 1).is_trivial() && gens_of(2).iter().all(|(_, a)| alg.level(a) <= q);
    let mut abelian_quotients = true;
    let mut degree_four = true;
    let mut degree_four_witness = None;
    for j in 2..=q {
        for (x, (sa, a)) in gens_of(j).iter().enumerate() {
            for (sb, b) in &gens_of(j)[x + 1..] {
                let c = commutator(alg, a, b)?;
                abelian_quotients &= in_level(&c, j + 1);
                if !in_level(&c, j + 4) && degree_four_witness.is_none() {
                    degree_four = false;
                    degree_four_witness = Some((j, *sa, *sb));
                }
            }
        }
    }
    Ok(GreenStructure {
        params: alg.params(),
        log_orders: (2..=q + 1).map(|k| g(k).log_order()).collect(),
        top_trivial,
        normal_in_next,
        normal_in_first,
        abelian_quotients,
        degree_four,
        degree_four_witness,
        conjugations,
    })
}

/// Shift data `S(α) = (α(x) - x, α(θ_i) - θ_i)`.
pub fn shift_data(alg: &ExteriorAlgebra, alpha: &AlgebraAut) -> Vec<AlgElem> {
    let id = alg.identity_aut();
    let mut out = vec![alg.sub(&alpha.x, &id.x)];
    out.extend(alpha.theta.iter().zip(&id.theta).map(|(a, b)| alg.sub(a, b)));
    out
}

/// `G^(k)` as an `F_p` vector space in shift coordinates. Valid when every
/// generator fixes every generator's shift data, since then
/// `S(αβ) = S(α) + α(S(β)) = S(α) + S(β)`.
#[derive(Debug, Clone)]
pub struct LinearGreen {
    pub alg: ExteriorAlgebra,
    pub start: usize,
    pub gens: Vec<ShiftGen>,
}

impl LinearGreen {
    pub fn new(alg: &ExteriorAlgebra, start: usize) -> Result<Self> {
        let g = green_group(alg, start)?;
        let lg = LinearGreen { alg: *alg, start, gens: g.gens };
        if !lg.is_valid() {
            return Err(structural(format!(
                "G^({start}) over F_{}[x]/(x^{}) with rank {} is not abelian in shift coordinates",
                alg.p(),
                alg.n(),
                alg.q
            )));
        }
        Ok(lg)
    }

    /// Smallest start level at which the shift coordinates are linear.
    pub fn smallest_start(alg: &ExteriorAlgebra) -> usize {
        (2..=alg.q + 1)
            .find(|&k| LinearGreen { alg: *alg, start: k, gens: shift_generators(alg, k) }.is_valid())
            .unwrap_or(alg.q + 1)
    }

    fn is_valid(&self) -> bool {
        let auts: Vec<AlgebraAut> = self.gens.iter().map(|g| g.aut(&self.alg, 1)).collect();
        let data: Vec<Vec<AlgElem>> = auts.iter().map(|a| shift_data(&self.alg, a)).collect();
        auts.iter().all(|a| {
            let s = Substitution::new(&self.alg, a);
            data.iter().all(|d| d.iter().all(|e| s.apply(&self.alg, e) == *e))
        })
    }

    pub fn dim(&self) -> usize {
        self.gens.len()
    }

    pub fn levels(&self) -> Vec<usize> {
        self.gens.iter().map(|g| g.level).collect()
    }

    pub fn from_coords(&self, c: &[u64]) -> AlgebraAut {
        let alg = &self.alg;
        let mut a = alg.identity_aut();
        for (g, &v) in self.gens.iter().zip(c) {
            if v % alg.p() == 0 {
                continue;
            }
            let m = alg.monomial(g.power, g.mask, v);
            match g.target {
                ShiftTarget::X => a.x = alg.add(&a.x, &m),
                ShiftTarget::Theta(i) => a.theta[i] = alg.add(&a.theta[i], &m),
            }
        }
        a
    }

    /// Shift coordinates; `None` if the shift data leaves the generator slots.
    pub fn coords(&self, alpha: &AlgebraAut) -> Option<Vec<u64>> {
        let mut data = shift_data(&self.alg, alpha);
        let mut out = Vec::with_capacity(self.gens.len());
        for g in &self.gens {
            let (w, k) = g.slot(&self.alg);
            out.push(data[w][k]);
            data[w][k] = 0;
        }
        data.iter().all(|d| self.alg.is_zero(d)).then_some(out)
    }

    /// Matrix of `α ↦ φ α φ⁻¹` in shift coordinates.
    pub fn conjugation_matrix(&self, phi: &AlgebraAut, phi_inv: &AlgebraAut) -> Result<Mat> {
        let d = self.dim();
        let cols = (0..d)
            .map(|c| {
                let mut unit = vec![0; d];
                unit[c] = 1;
                let a = self.from_coords(&unit);
                let conj = self.alg.compose(phi, &self.alg.compose(&a, phi_inv));
                self.coords(&conj).ok_or_else(|| structural("conjugate leaves the shift coordinates"))
            })
            .collect::<Result<Vec<_>>>()?;
        let m = Mat::from_cols(d, &cols);
        for r in 0..d {
            for c in 0..d {
                if m.get(r, c) != 0 && self.gens[r].level < self.gens[c].level {
                    return Err(structural("conjugation lowers the filtration level"));
                }
            }
        }
        Ok(m)
    }

    /// Diagonal action of dilation by `λ`: `λ^j` on even level `j`, `λ^(j-1)` on odd.
    pub fn dilation_matrix(&self, lambda: u64) -> Mat {
        let p = self.alg.p();
        let mut m = Mat::zeros(self.dim(), self.dim());
        for (i, g) in self.gens.iter().enumerate() {
            let e = if g.is_even() { g.level } else { g.level - 1 };
            m.set(i, i, mod_pow(lambda, e as u64, p));
        }
        m
    }
}

impl LinearGreen {
    /// Conjugation by the frame change `θ ↦ tθ`, as a matrix on shift coordinates.
    pub fn frame_matrix(&self, t: &RMatrix) -> Result<Mat> {
        let inv = invert_rmatrix(self.alg.base, t).ok_or_else(|| input("frame change is not invertible"))?;
        self.conjugation_matrix(&self.alg.linear_aut(t)?, &self.alg.linear_aut(&inv)?)
    }
}

/// `λαλ⁻¹` has the dilated shift coordinates of `α`, for every generator `α`.
pub fn projection_equivariance(lg: &LinearGreen, lambda: u64) -> Result<bool> {
    let d = lg.dim();
    let m = lg.dilation_matrix(lambda);
    for c in 0..d {
        let mut unit = vec![0; d];
        unit[c] = 1;
        let b = lg.alg.dilate_aut(lambda, &lg.from_coords(&unit))?;
        if lg.coords(&b) != Some(m.col(c)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Per-edge transition matrices of a model on a nerve, `edge = [a, b]` with `a < b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Transitions {
    pub edges: Vec<([u32; 2], RMatrix)>,
}

impl Transitions {
    pub fn constant() -> Self {
        Transitions { edges: Vec::new() }
    }

    /// Transition from the chart at `a` to the chart at `b`, `a < b`; identity if unlisted.
    fn get(&self, alg: &ExteriorAlgebra, a: u32, b: u32) -> RMatrix {
        self.edges
            .iter()
            .find(|(e, _)| *e == [a, b])
            .map(|(_, t)| t.clone())
            .unwrap_or_else(|| rmatrix_identity(alg.base, alg.q))
    }

    /// The same matrix on every listed edge.
    pub fn on_edges(alg: &ExteriorAlgebra, nerve: &Nerve, edges: &[[u32; 2]], t: &RMatrix) -> Result<Self> {
        if t.len() != alg.q || t.iter().any(|r| r.len() != alg.q || r.iter().any(|c| c.len() != alg.n())) {
            return Err(input(format!("transition must be a {q}x{q} matrix over the base ring", q = alg.q)));
        }
        let mut out = Vec::new();
        for e in edges {
            if e[0] >= e[1] || nerve.index_of(e).is_none_or(|(d, _)| d != 1) {
                return Err(input(format!("{e:?} is not an edge")));
            }
            out.push((*e, t.clone()));
        }
        Ok(Transitions { edges: out })
    }
}

/// Matrix over the base ring from constant-coefficient entries plus an `x` part.
pub fn rmatrix(alg: &ExteriorAlgebra, constant: &[Vec<u64>], x_part: &[Vec<u64>]) -> RMatrix {
    let n = alg.n();
    (0..alg.q)
        .map(|i| {
            (0..alg.q)
                .map(|j| {
                    let mut v = vec![0; n];
                    v[0] = constant.get(i).and_then(|r| r.get(j)).copied().unwrap_or(0) % alg.p();
                    if n > 1 {
                        v[1] = x_part.get(i).and_then(|r| r.get(j)).copied().unwrap_or(0) % alg.p();
                    }
                    v
                })
                .collect()
        })
        .collect()
}

/// For face `σ` with least vertex `m` and subface `τ` with least vertex `m'`,
/// restriction is conjugation by the transition along `[m, m']`.
fn face_transition(alg: &ExteriorAlgebra, tr: &Transitions, to_min: u32, from_min: u32) -> Result<Option<(AlgebraAut, AlgebraAut)>> {
    if to_min == from_min {
        return Ok(None);
    }
    let t = tr.get(alg, to_min, from_min);
    let phi = alg.linear_aut(&t)?;
    if !alg.is_automorphism(&phi) {
        return Err(input(format!("transition on [{to_min}, {from_min}] is not invertible")));
    }
    let inv = invert_rmatrix(alg.base, &t).ok_or_else(|| input("transition is not invertible"))?;
    Ok(Some((phi, alg.linear_aut(&inv)?)))
}

/// Gauss-Jordan over the local ring `F_p[x]/(x^n)`.
pub fn invert_rmatrix(base: BaseRing, t: &RMatrix) -> Option<RMatrix> {
    let q = t.len();
    let mut a = t.clone();
    let mut inv = rmatrix_identity(base, q);
    let neg = |v: &[u64]| v.iter().map(|&c| (base.p - c) % base.p).collect::<Vec<_>>();
    for col in 0..q {
        let piv = (col..q).find(|&r| base.is_unit(&a[r][col]))?;
        a.swap(col, piv);
        inv.swap(col, piv);
        let u = base.inv(&a[col][col])?;
        for j in 0..q {
            a[col][j] = base.mul(&a[col][j], &u);
            inv[col][j] = base.mul(&inv[col][j], &u);
        }
        for r in 0..q {
            if r == col {
                continue;
            }
            let f = neg(&a[r][col]);
            for j in 0..q {
                a[r][j] = base.add(&a[r][j], &base.mul(&f, &a[col][j]));
                inv[r][j] = base.add(&inv[r][j], &base.mul(&f, &inv[col][j]));
            }
        }
    }
    Some(inv)
}

/// Green's series of a model in shift coordinates: an `F_p` sheaf with a
/// level per coordinate, restriction by conjugation with the transitions.
pub fn green_linear(alg: &ExteriorAlgebra, nerve: Arc<Nerve>, tr: &Transitions, start: usize) -> Result<crate::aq::FilteredSheaf> {
    let lg = LinearGreen::new(alg, start)?;
    let d = lg.dim();
    let mut restr = Vec::new();
    for dd in 0..=MAX_DIM {
        let mut rl = Vec::new();
        for i in 0..nerve.count(dd) {
            let mut per = Vec::new();
            if dd > 0 {
                let to_min = nerve.face(dd, i)[0];
                for &fi in nerve.facets(dd, i) {
                    let from_min = nerve.face(dd - 1, fi)[0];
                    per.push(match face_transition(alg, tr, to_min, from_min)? {
                        None => Mat::identity(d),
                        Some((phi, inv)) => lg.conjugation_matrix(&phi, &inv)?,
                    });
                }
            }
            rl.push(per);
        }
        restr.push(rl);
    }
    let moduli = (0..=MAX_DIM).map(|dd| vec![vec![alg.p(); d]; nerve.count(dd)]).collect();
    let ab = AbSheaf::new(nerve, moduli, restr)
        .map_err(|e| input(format!("transitions are not functorial: {e}")))?;
    let tag = SeriesTag { name: format!("green(p={}, q={}, n={})", alg.p(), alg.q, alg.n()), grade_offset: start, green: Some(alg.params()) };
    crate::aq::FilteredSheaf::new(ab, lg.levels(), start, alg.q + 1, tag)
}

/// The same series as a table sheaf, built by closing the generators under
/// composition. Only for groups with at most `cap` elements.
pub fn green_series(alg: &ExteriorAlgebra, nerve: Arc<Nerve>, tr: &Transitions, start: usize, cap: usize) -> Result<SheafSeries> {
    let g = green_group(alg, start)?;
    let elems = g.elements(cap.min(MAX_TABLE))?;
    let index: HashMap<&AlgebraAut, Elem> = elems.iter().enumerate().map(|(i, a)| (a, i as Elem)).collect();
    let id_pos = index[&alg.identity_aut()];
    // identity first
    let mut order: Vec<usize> = (0..elems.len()).collect();
    order.swap(0, id_pos as usize);
    let elems: Vec<AlgebraAut> = order.iter().map(|&i| elems[i].clone()).collect();
    let index: HashMap<AlgebraAut, Elem> = elems.iter().enumerate().map(|(i, a)| (a.clone(), i as Elem)).collect();
    let rows: Vec<Vec<Elem>> = elems.iter().map(|a| elems.iter().map(|b| index[&alg.compose(a, b)]).collect()).collect();
    let grp = Arc::new(FiniteGroup::from_table(format!("G^({start})"), &rows)?);
    let mut groups = Vec::new();
    let mut restr = Vec::new();
    for dd in 0..=MAX_DIM {
        groups.push(vec![grp.clone(); nerve.count(dd)]);
        let mut rl = Vec::new();
        for i in 0..nerve.count(dd) {
            let mut per = Vec::new();
            if dd > 0 {
                let to_min = nerve.face(dd, i)[0];
                for &fi in nerve.facets(dd, i) {
                    let from_min = nerve.face(dd - 1, fi)[0];
                    per.push(match face_transition(alg, tr, to_min, from_min)? {
                        None => GroupHom::identity(&grp),
                        Some((phi, inv)) => GroupHom {
                            map: elems
                                .iter()
                                .map(|a| {
                                    let c = alg.compose(&phi, &alg.compose(a, &inv));
                                    index.get(&c).copied().ok_or_else(|| structural("conjugate left the group"))
                                })
                                .collect::<Result<_>>()?,
                        },
                    });
                }
            }
            rl.push(per);
        }
        restr.push(rl);
    }
    let f = Arc::new(GroupSheaf { nerve: nerve.clone(), groups, restr });
    if let Some(v) = f.validate().first() {
        return Err(input(format!("transitions are not functorial: {v:?}")));
    }
    let mut terms = Vec::new();
    for k in start..=alg.q + 1 {
        let members: Vec<Elem> = elems.iter().enumerate().filter(|(_, a)| alg.level(a) >= k).map(|(i, _)| i as Elem).collect();
        let sub = Subgroup::new(&grp, &members)?;
        terms.push(SubSheaf::new(&f, (0..=MAX_DIM).map(|dd| vec![sub.clone(); nerve.count(dd)]).collect())?);
    }
    let tag = SeriesTag { name: format!("green(p={}, q={}, n={})", alg.p(), alg.q, alg.n()), grade_offset: start, green: Some(alg.params()) };
    SheafSeries::new(f, terms, tag)
}

/// `A_j = G^(j)/G^(j+1)` matched against `∧^j ⊗ Der` (even `j`) or `∧^j ⊗ dual` (odd `j`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ObstructionComponent {
    pub grade: usize,
    pub even: bool,
    /// `log_p` of the component from the elementary shifts.
    pub dim: usize,
    /// `C(q, j) · dim Der` or `q · C(q, j) · n`.
    pub expected: usize,
    /// `log_p(|G^(j)| / |G^(j+1)|)` from exhaustive candidate enumeration, when small enough.
    pub enumerated: Option<usize>,
    /// Each basis shift as (`θ_S` mask, component): `x^a ∂_x` or `x^a ∂/∂θ_i`.
    pub basis: Vec<(u32, String)>,
}

pub fn obstruction_decomposition(alg: &ExteriorAlgebra, j: usize) -> Result<ObstructionComponent> {
    if j < 2 || j > alg.q {
        return Err(input(format!("grade {j} outside 2..={}", alg.q)));
    }
    let gens: Vec<ShiftGen> = shift_generators(alg, j).into_iter().filter(|g| g.level == j).collect();
    let even = j.is_multiple_of(2);
    let expected = if even { binomial(alg.q, j) * alg.base.derivation_dim() } else { alg.q * binomial(alg.q, j) * alg.n() };
    let basis = gens
        .iter()
        .map(|g| {
            let comp = match g.target {
                ShiftTarget::X => format!("x^{} d/dx", g.power),
                ShiftTarget::Theta(i) => format!("x^{} d/dθ{}", g.power, i + 1),
            };
            (g.mask, comp)
        })
        .collect();
    let log = |k: usize| -> Option<usize> {
        let c = green_group(alg, k).ok()?.enumerate_candidates(1 << 16).ok()?.len() as u64;
        let mut d = 0;
        while alg.p().pow(d as u32) < c {
            d += 1;
        }
        Some(d)
    };
    let enumerated = match (log(j), log(j + 1)) {
        (Some(a), Some(b)) => Some(a - b),
        _ => None,
    };
    let out = ObstructionComponent { grade: j, even, dim: gens.len(), expected, enumerated, basis };
    if out.dim != out.expected || out.enumerated.is_some_and(|e| e != out.dim) {
        return Err(structural(format!("obstruction component {j} does not match: {out:?}")));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn alg(p: u64, q: usize, n: usize) -> ExteriorAlgebra {
        ExteriorAlgebra::new(p, q, n).unwrap()
    }

    #[test]
    fn wedge_signs_and_nilpotence() {
        let a = alg(5, 3, 2);
        let t01 = a.mul(&a.theta(0), &a.theta(1));
        let t10 = a.mul(&a.theta(1), &a.theta(0));
        assert_eq!(a.add(&t01, &t10), a.zero());
        assert!(a.is_zero(&a.mul(&a.theta(2), &a.theta(2))));
        assert!(a.is_zero(&a.mul(&a.x(), &a.x())));
        let s = a.add(&a.theta(0), &a.theta(1));
        assert!(a.is_zero(&a.mul(&s, &s)));
    }

    #[test]
    fn base_ring_axioms_and_derivations() {
        for (p, n, d) in [(2, 1, 0), (2, 2, 2), (3, 2, 1), (5, 2, 1), (3, 3, 3)] {
            let r = BaseRing::new(p, n).unwrap();
            r.check_axioms().unwrap();
            assert_eq!(r.derivation_dim(), d, "p={p} n={n}");
        }
    }

    #[test]
    fn small_green_groups_match_enumeration() {
        // q = 2 over F_2: trivial; q = 3 over F_2: elementary abelian of order 8
        let g = green_group(&alg(2, 2, 1), 2).unwrap();
        assert_eq!(g.enumerate_candidates(1 << 20).unwrap().len(), 1);
        assert!(g.is_trivial());
        let g = green_group(&alg(2, 3, 1), 2).unwrap();
        let cands = g.enumerate_candidates(1 << 20).unwrap();
        assert_eq!(cands.len(), 8);
        assert_eq!(g.elements(1 << 12).unwrap(), cands);
        for (p, q, n, k) in [(3, 3, 1, 2), (2, 3, 2, 2), (3, 3, 2, 3), (2, 4, 1, 2), (5, 3, 2, 3)] {
            let g = green_group(&alg(p, q, n), k).unwrap();
            let cands = g.enumerate_candidates(1 << 16).unwrap();
            assert_eq!(cands.len() as u64, p.pow(g.log_order() as u32), "p={p} q={q} n={n} k={k}");
            if cands.len() <= 4096 {
                assert_eq!(g.elements(1 << 12).unwrap(), cands);
            }
        }
    }

    #[test]
    fn trivial_above_rank() {
        for (p, q, n) in [(2, 3, 2), (5, 4, 2), (3, 2, 1)] {
            let a = alg(p, q, n);
            assert!(green_group(&a, q + 1).unwrap().is_trivial());
        }
    }

    #[test]
    fn linear_model_regimes() {
        assert_eq!(LinearGreen::smallest_start(&alg(5, 3, 2)), 2);
        assert_eq!(LinearGreen::smallest_start(&alg(5, 4, 2)), 3);
        assert_eq!(LinearGreen::smallest_start(&alg(2, 4, 1)), 2);
        let lg = LinearGreen::new(&alg(5, 3, 2), 2).unwrap();
        assert_eq!(lg.dim(), 9);
        let c: Vec<u64> = (0..9).map(|i| (i * 3 + 1) % 5).collect();
        assert_eq!(lg.coords(&lg.from_coords(&c)).unwrap(), c);
    }

    #[test]
    fn dilation_examples() {
        let a = alg(5, 3, 1);
        let u = a.mul(&a.theta(0), &a.theta(2));
        assert_eq!(a.dilate(2, &u).unwrap(), a.scale(&u, 4));
        // level-3 odd shift on q = 4: λαλ⁻¹ = id + λ² D
        let a = alg(5, 4, 1);
        let g = ShiftGen { level: 3, target: ShiftTarget::Theta(0), mask: 0b1110, power: 0 };
        let d = a.dilate_aut(2, &g.aut(&a, 1)).unwrap();
        assert_eq!(d, g.aut(&a, 4));
        assert_eq!(a.dilate_aut(1, &g.aut(&a, 3)).unwrap(), g.aut(&a, 3));
    }

    #[test]
    fn obstruction_components() {
        let c = obstruction_decomposition(&alg(2, 3, 2), 2).unwrap();
        assert_eq!(c.dim, 3 * 2);
        let c = obstruction_decomposition(&alg(2, 3, 1), 3).unwrap();
        assert_eq!(c.dim, 3);
        let c = obstruction_decomposition(&alg(5, 2, 1), 2).unwrap();
        assert_eq!(c.dim, 0);
    }

    #[test]
    fn conjugation_by_x_dependent_transition_mixes_levels() {
        let a = alg(5, 3, 2);
        let lg = LinearGreen::new(&a, 2).unwrap();
        let mut t = rmatrix_identity(a.base, 3);
        t[0][1] = vec![0, 1];
        let phi = a.linear_aut(&t).unwrap();
        let inv = a.linear_aut(&invert_rmatrix(a.base, &t).unwrap()).unwrap();
        assert_eq!(a.compose(&phi, &inv), a.identity_aut());
        let m = lg.conjugation_matrix(&phi, &inv).unwrap();
        let levels = lg.levels();
        let mixes = (0..9).any(|r| (0..9).any(|c| m.get(r, c) != 0 && levels[r] > levels[c]));
        assert!(mixes);
    }

    proptest! {
        #[test]
        fn j_filtration_is_multiplicative(k in 1usize..4, m in 1usize..4, sa in proptest::collection::vec(0u64..3, 16), sb in proptest::collection::vec(0u64..3, 16)) {
            let a = alg(3, 4, 1);
            let cut = |s: &[u64], k: usize| -> AlgElem { s.iter().enumerate().map(|(i, &c)| if (i as u32).count_ones() as usize >= k { c } else { 0 }).collect() };
            let u = cut(&sa, k);
            let v = cut(&sb, m);
            prop_assert!(a.in_j_power(&a.mul(&u, &v), k + m));
            let w = cut(&sa, 1);
            prop_assert!(a.is_zero(&a.pow(&w, 5)));
        }

        #[test]
        fn graded_commutativity(sa in proptest::collection::vec(0u64..5, 8), sb in proptest::collection::vec(0u64..5, 8), ja in 0usize..4, jb in 0usize..4) {
            let a = alg(5, 3, 1);
            let u = a.grade_part(&sa, ja);
            let v = a.grade_part(&sb, jb);
            let uv = a.mul(&u, &v);
            let vu = a.mul(&v, &u);
            let want = if ja * jb % 2 == 1 { a.scale(&vu, 4) } else { vu };
            prop_assert_eq!(uv, want);
        }

        #[test]
        fn dilation_is_an_action(l in 1u64..5, m in 1u64..5, c in 1u64..5) {
            let a = alg(5, 3, 2);
            let e: AlgElem = (0..a.dim() as u64).map(|i| (i * 7 + c) % 5).collect();
            let lm = a.dilate(l * m, &e).unwrap();
            prop_assert_eq!(lm, a.dilate(l, &a.dilate(m, &e).unwrap()).unwrap());
            let g = ShiftGen { level: 2, target: ShiftTarget::X, mask: 0b011, power: 1 }.aut(&a, c);
            let lhs = a.dilate_aut(l * m, &g).unwrap();
            let rhs = a.dilate_aut(l, &a.dilate_aut(m, &g).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn green_structure_matches_table_series() {
        for (p, q, n) in [(2, 3, 1), (3, 3, 1), (2, 2, 2), (3, 2, 2)] {
            let a = alg(p, q, n);
            let gs = green_structure(&a).unwrap();
            let nv = Arc::new(Nerve::point());
            let s = green_series(&a, nv, &Transitions::constant(), 2, 4096).unwrap();
            let c = s.checks().unwrap();
            assert_eq!(gs.degree_four, c.aq_degree >= 4.min(s.length()), "p{p} q{q} n{n}");
            assert!(gs.holds(), "p{p} q{q} n{n}");
        }
    }

    #[test]
    fn degree_four_fails_with_x_and_rank_four() {
        for p in [2, 3, 5] {
            let gs = green_structure(&alg(p, 4, 2)).unwrap();
            assert!(gs.top_trivial && gs.normal_in_next && gs.normal_in_first && gs.abelian_quotients);
            assert!(!gs.degree_four);
            assert!(gs.degree_four_witness.is_some());
            assert!(green_structure(&alg(p, 4, 1)).unwrap().holds());
        }
    }
}
