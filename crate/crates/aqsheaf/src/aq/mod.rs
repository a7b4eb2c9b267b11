//! Linearisation of a sheaf series, the primary complex with its maps
//! `∂¹: H⁰(A_j) → H¹(A_{j+1})` and `∂²: H¹(A_j) → H²(A_{j+1})`, linearity
//! checks, the extended complex and primary cohomology.
//!
//! Two backends produce the same data. The table backend works on Cayley
//! tables and runs the nonabelian Čech machinery; the linear backend works on
//! series that are abelian in coordinates over `F_p` (Green's groups in shift
//! coordinates) and computes every map on generators.
//!
//! Grades are series indices: `A_j = H_j/H_{j+1}` for `0 ≤ j < N`. The paper
//! grade of index `j` is `j + offset`.
//!
//! Sign convention: the nonabelian `δ¹(c) = (g_a g_b⁻¹)` is minus the
//! abelian coboundary of the lift, and `δ²` equals it. The linear backend
//! uses the same signs, so both backends agree on every instance they share.

mod linear;
mod table;

use serde::Serialize;

pub use linear::FilteredSheaf;

use crate::abelian::{AbCohomology, GroupSummary};
use crate::error::{input, structural, Result};
use crate::exec::{map_range, Ctx};
use crate::linalg::{snf, ChainRing, Mat};
use crate::sites::{GreenParams, SheafMorphism, SheafSeries};

/// Base-point preserving map between finite class sets indexed `0..size`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PointedMap {
    Table { target: u128, values: Vec<u128> },
    /// `F_p`-linear in base-`p` digits, first digit most significant.
    Linear { p: u64, mat: Mat },
}

pub(crate) fn digits(mut idx: u128, p: u64, dim: usize) -> Vec<u64> {
    let mut c = vec![0; dim];
    for k in (0..dim).rev() {
        c[k] = (idx % p as u128) as u64;
        idx /= p as u128;
    }
    c
}

pub(crate) fn undigits(c: &[u64], p: u64) -> u128 {
    c.iter().fold(0u128, |acc, &x| acc * p as u128 + (x % p) as u128)
}

impl PointedMap {
    pub fn constant(source: u128, target: u128) -> Self {
        PointedMap::Table { target, values: vec![0; source as usize] }
    }

    pub fn source_size(&self) -> u128 {
        match self {
            PointedMap::Table { values, .. } => values.len() as u128,
            PointedMap::Linear { p, mat } => (*p as u128).pow(mat.cols as u32),
        }
    }

    pub fn target_size(&self) -> u128 {
        match self {
            PointedMap::Table { target, .. } => *target,
            PointedMap::Linear { p, mat } => (*p as u128).pow(mat.rows as u32),
        }
    }

    pub fn apply(&self, idx: u128) -> u128 {
        match self {
            PointedMap::Table { values, .. } => values[idx as usize],
            PointedMap::Linear { p, mat } => undigits(&mat.apply(&digits(idx, *p, mat.cols), *p), *p),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            PointedMap::Table { values, .. } => values.iter().all(|&v| v == 0),
            PointedMap::Linear { mat, .. } => mat.is_zero(),
        }
    }

    fn rank(p: u64, mat: &Mat) -> usize {
        if mat.rows == 0 || mat.cols == 0 {
            return 0;
        }
        snf(mat, ChainRing::new(p, 1)).rank()
    }

    pub fn image_size(&self) -> u128 {
        match self {
            PointedMap::Table { values, .. } => {
                let mut v = values.clone();
                v.sort_unstable();
                v.dedup();
                v.len() as u128
            }
            PointedMap::Linear { p, mat } => (*p as u128).pow(Self::rank(*p, mat) as u32),
        }
    }

    /// Size of the fibre over the base point.
    pub fn kernel_size(&self) -> u128 {
        match self {
            PointedMap::Table { values, .. } => values.iter().filter(|&&v| v == 0).count() as u128,
            PointedMap::Linear { p, mat } => (*p as u128).pow((mat.cols - Self::rank(*p, mat)) as u32),
        }
    }

    pub fn summary(&self) -> MapSummary {
        MapSummary {
            source: self.source_size(),
            target: self.target_size(),
            image: self.image_size(),
            kernel: self.kernel_size(),
            linear: matches!(self, PointedMap::Linear { .. }),
        }
    }

    /// `then ∘ self`.
    pub fn then(&self, then: &PointedMap, ctx: &Ctx) -> Result<PointedMap> {
        if let (PointedMap::Linear { p, mat: a }, PointedMap::Linear { mat: b, .. }) = (self, then) {
            return Ok(PointedMap::Linear { p: *p, mat: b.mul(a, *p) });
        }
        ctx.check("map composition", self.source_size())?;
        let values = (0..self.source_size()).map(|i| then.apply(self.apply(i))).collect();
        Ok(PointedMap::Table { target: then.target_size(), values })
    }

    /// `im self ⊆ im other` (same target).
    pub fn image_within(&self, other: &PointedMap, ctx: &Ctx) -> Result<bool> {
        if let (PointedMap::Linear { p, mat: a }, PointedMap::Linear { mat: b, .. }) = (self, other) {
            return Ok(Self::rank(*p, &b.hcat(a)) == Self::rank(*p, b));
        }
        ctx.check("image comparison", self.source_size() + other.source_size())?;
        let mut img: Vec<u128> = (0..other.source_size()).map(|i| other.apply(i)).collect();
        img.sort_unstable();
        Ok((0..self.source_size()).all(|i| img.binary_search(&self.apply(i)).is_ok()))
    }

    /// Same values on every source index (with budget).
    pub fn same_as(&self, other: &PointedMap, ctx: &Ctx) -> Result<bool> {
        if self.source_size() != other.source_size() || self.target_size() != other.target_size() {
            return Ok(false);
        }
        if let (PointedMap::Linear { mat: a, .. }, PointedMap::Linear { mat: b, .. }) = (self, other) {
            return Ok(a == b);
        }
        ctx.check("map comparison", self.source_size())?;
        Ok((0..self.source_size()).all(|i| self.apply(i) == other.apply(i)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MapSummary {
    pub source: u128,
    pub target: u128,
    pub image: u128,
    pub kernel: u128,
    pub linear: bool,
}

/// Map from `0..src` to `0..tgt` by evaluating `f` everywhere.
pub(crate) fn table_map<F>(ctx: &Ctx, what: &str, src: u128, tgt: u128, f: F) -> Result<PointedMap>
where
    F: Fn(u128) -> Result<u128> + Sync + Send,
{
    ctx.check(what, src)?;
    let values = map_range(ctx, src as usize, |i| f(i as u128)).into_iter().collect::<Result<Vec<_>>>()?;
    if values.first().is_some_and(|&v| v != 0) {
        return Err(structural(format!("{what} does not preserve the base point")));
    }
    Ok(PointedMap::Table { target: tgt, values })
}

/// Linear map from `F_p^src` to `F_p^tgt` by evaluating `f` on unit vectors.
pub(crate) fn linear_map<F>(p: u64, src: usize, tgt: usize, f: F) -> Result<PointedMap>
where
    F: Fn(u128) -> Result<u128>,
{
    let cols = (0..src)
        .map(|k| Ok(digits(f((p as u128).pow((src - 1 - k) as u32))?, p, tgt)))
        .collect::<Result<Vec<_>>>()?;
    Ok(PointedMap::Linear { p, mat: Mat::from_cols(tgt, &cols) })
}

pub(crate) fn coh_add(h: &AbCohomology, a: u128, b: u128) -> u128 {
    let (x, y) = (h.coords_of_index(a), h.coords_of_index(b));
    let s: Vec<u64> = x.iter().zip(&y).zip(&h.invariants).map(|((u, v), m)| (u + v) % m).collect();
    h.index_of_coords(&s)
}

pub(crate) fn neg_flat(moduli: &[u64], x: &[u64]) -> Vec<u64> {
    x.iter().zip(moduli).map(|(&v, &m)| (m - v % m) % m).collect()
}

/// Properties of the series needed before any map is built.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Meta {
    pub name: String,
    /// Paper grade of series index 0.
    pub offset: usize,
    /// `N`: the series runs `H_0 ⊇ ... ⊇ H_N = {e}`.
    pub length: usize,
    pub aq_degree: usize,
    pub central: bool,
    /// Sheaf-wide least centrality witness of each index; entry 0 unused.
    pub witnesses: Vec<Option<usize>>,
    pub green: Option<GreenParams>,
    pub nerve: String,
}

impl Meta {
    /// Witnesses usable for maps landing in grade `t`: every `k` from the least witness up to `t - 1`.
    pub fn valid_witnesses(&self, t: usize) -> Vec<usize> {
        match self.witnesses.get(t).copied().flatten() {
            Some(w) if self.central => (w..t).collect(),
            _ => vec![t - 1],
        }
    }

    /// Degree hypotheses are read against the series length: "degree ≥ d" means `≥ min(d, N)`.
    pub fn has_degree(&self, d: usize) -> bool {
        self.aq_degree >= d.min(self.length)
    }
}

/// The two backends behind one interface.
pub(crate) trait World: Sync + Send {
    fn meta(&self) -> &Meta;
    /// `H^n(A_j)`, `n ≤ 3`.
    fn coh(&self, j: usize, n: usize) -> &AbCohomology;
    /// Characteristic when every map is `F_p`-linear in class coordinates.
    fn linear_p(&self) -> Option<u64>;
    /// `H^n(A_j) → H^{n+1}(A_{j+1})`, `n ≤ 1`, through `A_{j+1} → H_k/H_{j+2} → H_k/H_{j+1}`.
    fn route(&self, n: usize, j: usize, k: usize, idx: u128) -> Result<u128>;
    /// `H^n(A_j) → H^{n+1}(A_{j+1})`, `n ≤ 2`, by abelian coboundaries in `H_j/H_{j+2}`.
    fn abelian_route(&self, n: usize, j: usize, idx: u128) -> Result<u128>;
    fn stalk(&self, j: usize) -> Vec<u64>;
    fn torsors(&self, ctx: &Ctx) -> Result<Torsors>;
    fn star_trivial(&self, ctx: &Ctx, j: usize) -> Result<bool>;
    /// Induced map on `Ȟ¹(H_0)` of a global automorphism of the series.
    fn torsor_action(&self, ctx: &Ctx, aut: &SheafAut) -> Result<PointedMap>;
    fn dilation(&self, _lambda: u64) -> Result<Option<Dilation>> {
        Ok(None)
    }
}

/// Global automorphism of a series, in the representation of its backend.
#[derive(Debug, Clone)]
pub enum SheafAut {
    /// Per-face automorphisms of the ambient sheaf.
    Table(SheafMorphism),
    /// One matrix on the shift coordinates, the same on every face.
    Linear(Mat),
}

/// The dilation action on the classes the vanishing arguments use.
#[derive(Debug, Clone)]
pub struct Dilation {
    pub lambda: u64,
    /// On `H⁰(A_j)`.
    pub h0: Vec<PointedMap>,
    /// On `H¹(A_j)`.
    pub h1: Vec<PointedMap>,
    /// On `Ȟ¹(H_j)`, `j = 0..=N`.
    pub torsors: Vec<PointedMap>,
}

/// Input series in either representation.
#[derive(Debug, Clone)]
pub enum Source {
    Table(SheafSeries),
    Linear(FilteredSheaf),
}

impl Source {
    pub fn name(&self) -> &str {
        match self {
            Source::Table(s) => &s.tag.name,
            Source::Linear(f) => &f.tag.name,
        }
    }

    pub fn length(&self) -> usize {
        match self {
            Source::Table(s) => s.length(),
            Source::Linear(f) => f.length(),
        }
    }

    pub fn is_green(&self) -> bool {
        match self {
            Source::Table(s) => s.tag.green.is_some(),
            Source::Linear(f) => f.tag.green.is_some(),
        }
    }

    /// `(F[ℓ])_j = F_{ℓ+j}`: the series starting at term `ℓ`.
    pub fn shifted(&self, l: usize) -> Result<Source> {
        if l > self.length() {
            return Err(input(format!("shift {l} beyond length {}", self.length())));
        }
        match self {
            Source::Table(s) => table::shift_series(s, l).map(Source::Table),
            Source::Linear(f) => f.shifted(l).map(Source::Linear),
        }
    }
}

/// `A = ⊕ A_j` with its cohomology; keeps the backend for later maps.
pub struct Linearisation {
    world: Box<dyn World>,
    pub components: Vec<Component>,
}

impl std::fmt::Debug for Linearisation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Linearisation").field("meta", self.meta()).field("components", &self.components).finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Component {
    pub index: usize,
    pub grade: usize,
    /// Invariant factors of `A_j` on the first vertex.
    pub stalk: Vec<u64>,
    pub h0: GroupSummary,
    pub h1: GroupSummary,
    pub h2: GroupSummary,
}

impl Linearisation {
    pub fn meta(&self) -> &Meta {
        self.world.meta()
    }

    pub fn h(&self, j: usize, n: usize) -> &AbCohomology {
        self.world.coh(j, n)
    }

    pub fn torsors(&self, ctx: &Ctx) -> Result<Torsors> {
        self.world.torsors(ctx)
    }

    pub(crate) fn star_trivial(&self, ctx: &Ctx, j: usize) -> Result<bool> {
        self.world.star_trivial(ctx, j)
    }

    pub fn torsor_action(&self, ctx: &Ctx, aut: &SheafAut) -> Result<PointedMap> {
        self.world.torsor_action(ctx, aut)
    }

    /// `None` for table series.
    pub fn dilation(&self, lambda: u64) -> Result<Option<Dilation>> {
        self.world.dilation(lambda)
    }

    fn map_from(&self, ctx: &Ctx, what: &str, n: usize, j: usize, f: impl Fn(u128) -> Result<u128> + Sync + Send) -> Result<PointedMap> {
        let (src, tgt) = (self.h(j, n), self.h(j + 1, n + 1));
        match self.world.linear_p() {
            Some(p) => linear_map(p, src.invariants.len(), tgt.invariants.len(), f),
            None => table_map(ctx, what, src.order(), tgt.order(), f),
        }
    }
}

pub fn linearise(ctx: &Ctx, src: &Source) -> Result<Linearisation> {
    let world: Box<dyn World> = match src {
        Source::Table(s) => Box::new(table::TableWorld::new(ctx, s)?),
        Source::Linear(f) => Box::new(linear::LinearWorld::new(f)?),
    };
    let m = world.meta();
    let components = (0..m.length)
        .map(|j| Component {
            index: j,
            grade: j + m.offset,
            stalk: world.stalk(j),
            h0: world.coh(j, 0).summary(),
            h1: world.coh(j, 1).summary(),
            h2: world.coh(j, 2).summary(),
        })
        .collect();
    Ok(Linearisation { world, components })
}

/// Agreement of one map computed through several witnesses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RouteCheck {
    /// 1 for `∂¹`, 2 for `∂²`.
    pub map: usize,
    pub source_index: usize,
    pub witnesses: Vec<usize>,
    pub agree: bool,
}

#[derive(Debug, Clone)]
pub struct PrimaryComplex {
    pub meta: Meta,
    /// `d1[j]: H⁰(A_j) → H¹(A_{j+1})`.
    pub d1: Vec<PointedMap>,
    /// `d2[j]: H¹(A_j) → H²(A_{j+1})`.
    pub d2: Vec<PointedMap>,
    pub routes: Vec<RouteCheck>,
    /// `d2[j+1] ∘ d1[j]` is the base point on every input.
    pub complex_holds: bool,
    pub h1_orders: Vec<u128>,
}

pub fn build_primary(ctx: &Ctx, lin: &Linearisation) -> Result<PrimaryComplex> {
    let meta = lin.meta().clone();
    if !meta.central {
        return Err(structural(format!("{} is not a central series; only the first boundary is available", meta.name)));
    }
    let n = meta.length;
    let mut d1 = Vec::new();
    let mut d2 = Vec::new();
    let mut routes = Vec::new();
    for j in 0..n.saturating_sub(1) {
        for (deg, out) in [(0usize, &mut d1), (1, &mut d2)] {
            let ks = meta.valid_witnesses(j + 1);
            let maps = ks
                .iter()
                .map(|&k| lin.map_from(ctx, "boundary table", deg, j, |i| lin.world.route(deg, j, k, i)))
                .collect::<Result<Vec<_>>>()?;
            let mut agree = true;
            for m in &maps[1..] {
                agree &= m.same_as(&maps[0], ctx)?;
            }
            routes.push(RouteCheck { map: deg + 1, source_index: j, witnesses: ks, agree });
            out.push(maps.into_iter().next().expect("at least one witness"));
        }
    }
    let mut complex_holds = true;
    for j in 0..n.saturating_sub(2) {
        let (a, b) = (&d1[j], &d2[j + 1]);
        ctx.check("complex check", a.source_size())?;
        complex_holds &= (0..a.source_size()).all(|x| b.apply(a.apply(x)) == 0);
    }
    let h1_orders = (0..n).map(|j| lin.h(j, 1).order()).collect();
    Ok(PrimaryComplex { meta, d1, d2, routes, complex_holds, h1_orders })
}

/// `θ′ ⋆ {e}` through `A_{j+1} → H_j/H_{j+2} → A_j`; needs no centrality.
pub fn boundary1(lin: &Linearisation, j: usize, section: u128) -> Result<u128> {
    let n = lin.meta().length;
    if j + 1 >= n {
        return Err(input(format!("grade {j} has no successor in a series of length {n}")));
    }
    if section >= lin.h(j, 0).order() {
        return Err(input(format!("section {section} out of range")));
    }
    lin.world.route(0, j, j, section)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LinearityCheck {
    pub map: usize,
    pub source_index: usize,
    /// `f(g + x) = f(g) + f(x)` for every generator `g` and every `x` (table
    /// series), or `f` agrees with its generator matrix everywhere (linear series).
    pub additive: bool,
    /// The witness route equals the boundary of `0 → A_{j+1} → H_j/H_{j+2} → A_j → 0`.
    pub matches_boundary: bool,
    pub evaluations: u128,
    /// False when the source was too large and only generator sums were probed.
    pub exhaustive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LinearityReport {
    pub checks: Vec<LinearityCheck>,
    pub holds: bool,
}

pub fn verify_linearity(ctx: &Ctx, lin: &Linearisation, pc: &PrimaryComplex) -> Result<LinearityReport> {
    let meta = lin.meta();
    if !meta.has_degree(2) {
        return Err(structural(format!("AQ degree {} is below 2", meta.aq_degree)));
    }
    let mut checks = Vec::new();
    for j in 0..meta.length.saturating_sub(1) {
        for deg in 0..2 {
            let map = if deg == 0 { &pc.d1[j] } else { &pc.d2[j] };
            let k = meta.valid_witnesses(j + 1)[0];
            let (src, tgt) = (lin.h(j, deg), lin.h(j + 1, deg + 1));
            let gens: Vec<u128> = (0..src.invariants.len())
                .map(|g| {
                    let mut c = vec![0; src.invariants.len()];
                    c[g] = 1;
                    src.index_of_coords(&c)
                })
                .collect();
            let route = |x: u128| lin.world.route(deg, j, k, x);
            let (additive, evaluations, exhaustive) = match map {
                // `map` is read off generators: agreeing with it everywhere is additivity
                PointedMap::Linear { p, .. } => {
                    if src.order() <= ctx.budget as u128 {
                        let bad = crate::exec::find_first(ctx, src.order() as usize, |x| route(x as u128).map_or(true, |v| v != map.apply(x as u128)));
                        (bad.is_none(), src.order(), true)
                    } else {
                        // sums of generator pairs and scalar multiples only
                        let mut probes = Vec::new();
                        for (a, &g) in gens.iter().enumerate() {
                            for &h in &gens[a..] {
                                probes.push(coh_add(src, g, h));
                            }
                            let mut m = g;
                            for _ in 2..*p {
                                m = coh_add(src, m, g);
                                probes.push(m);
                            }
                        }
                        let ok = probes.iter().all(|&x| route(x).is_ok_and(|v| v == map.apply(x)));
                        (ok, probes.len() as u128, false)
                    }
                }
                PointedMap::Table { .. } => {
                    let pairs = src.order() * gens.len() as u128;
                    ctx.check("additivity pairs", pairs)?;
                    let bad = crate::exec::find_first(ctx, src.order() as usize, |x| {
                        let x = x as u128;
                        gens.iter().any(|&g| route(coh_add(src, g, x)).map_or(true, |v| v != coh_add(tgt, map.apply(g), map.apply(x))))
                    });
                    (bad.is_none(), pairs, true)
                }
            };
            let boundary = lin.map_from(ctx, "boundary table", deg, j, |i| lin.world.abelian_route(deg, j, i))?;
            checks.push(LinearityCheck {
                map: deg + 1,
                source_index: j,
                additive,
                matches_boundary: boundary.same_as(map, ctx)?,
                evaluations,
                exhaustive,
            });
        }
    }
    let holds = checks.iter().all(|c| c.additive && c.matches_boundary);
    Ok(LinearityReport { checks, holds })
}

#[derive(Debug, Clone)]
pub struct ExtendedComplex {
    /// `maps[n][j]: H^n(A_j) → H^{n+1}(A_{j+1})`.
    pub maps: Vec<Vec<PointedMap>>,
    pub squares: Vec<SquareCheck>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SquareCheck {
    pub degree: usize,
    pub source_index: usize,
    pub zero: bool,
    pub inputs: u128,
}

impl ExtendedComplex {
    pub fn holds(&self) -> bool {
        self.squares.iter().all(|s| s.zero)
    }
}

pub fn extended_complex(ctx: &Ctx, lin: &Linearisation) -> Result<ExtendedComplex> {
    let meta = lin.meta();
    if !meta.has_degree(4) {
        return Err(structural(format!("AQ degree {} is below min(4, {})", meta.aq_degree, meta.length)));
    }
    let n = meta.length;
    let mut maps = Vec::new();
    for deg in 0..3 {
        let row = (0..n.saturating_sub(1))
            .map(|j| lin.map_from(ctx, "extended boundary", deg, j, |i| lin.world.abelian_route(deg, j, i)))
            .collect::<Result<Vec<_>>>()?;
        maps.push(row);
    }
    let mut squares = Vec::new();
    for deg in 0..2 {
        for j in 0..n.saturating_sub(2) {
            let (a, b) = (&maps[deg][j], &maps[deg + 1][j + 1]);
            let zero = match (a, b) {
                (PointedMap::Linear { p, mat: ma }, PointedMap::Linear { mat: mb, .. }) => {
                    mb.cols == 0 || ma.rows == 0 || mb.mul(ma, *p).is_zero()
                }
                _ => {
                    ctx.check("square check", a.source_size())?;
                    (0..a.source_size()).all(|x| b.apply(a.apply(x)) == 0)
                }
            };
            squares.push(SquareCheck { degree: deg, source_index: j, zero, inputs: a.source_size() });
        }
    }
    Ok(ExtendedComplex { maps, squares })
}

/// `H¹_∂ = ker ∂² / im ∂¹` per grade, as orders.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrimaryCohomology {
    pub grades: Vec<GradeCohomology>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GradeCohomology {
    pub index: usize,
    pub grade: usize,
    /// `ker(H⁰(A_j) → H¹(A_{j+1}))`.
    pub h0: u128,
    pub kernel_d2: u128,
    pub image_d1: u128,
    pub h1: u128,
}

impl PrimaryCohomology {
    pub fn h1_vanishes(&self) -> bool {
        self.grades.iter().all(|g| g.h1 == 1)
    }
}

pub fn primary_cohomology(lin: &Linearisation, pc: &PrimaryComplex) -> PrimaryCohomology {
    let n = pc.meta.length;
    let grades = (0..n)
        .map(|j| {
            let kernel_d2 = pc.d2.get(j).map_or(lin.h(j, 1).order(), PointedMap::kernel_size);
            let image_d1 = if j == 0 { 1 } else { pc.d1[j - 1].image_size() };
            let h0 = pc.d1.get(j).map_or(lin.h(j, 0).order(), PointedMap::kernel_size);
            GradeCohomology { index: j, grade: j + pc.meta.offset, h0, kernel_d2, image_d1, h1: kernel_d2 / image_d1 }
        })
        .collect();
    PrimaryCohomology { grades }
}

/// Torsor classes of every term and the maps between them.
#[derive(Debug, Clone)]
pub struct Torsors {
    /// `|Ȟ¹(H_j)|`, `j = 0..=N`.
    pub h1: Vec<u128>,
    /// `up[j]: Ȟ¹(H_{j+1}) → Ȟ¹(H_j)`.
    pub up: Vec<PointedMap>,
    /// `tau[j]: Ȟ¹(H_j) → Ȟ¹(H_0)`.
    pub tau: Vec<PointedMap>,
    /// `omega[j]: Ȟ¹(H_j) → H¹(A_j)`.
    pub omega: Vec<PointedMap>,
    /// `delta[j]: H⁰(A_{j-1}) → Ȟ¹(H_j)` for `1 ≤ j < N`; entry 0 unused.
    pub delta: Vec<Option<PointedMap>>,
    /// `|im(H⁰(H_j/H_{j+2}) → H⁰(A_j))|`.
    pub im_h0_p: Vec<u128>,
    /// `|H⁰(H_j/H_{j+2})|`.
    pub h0_mid: Vec<u128>,
}

#[cfg(test)]
mod tests;
