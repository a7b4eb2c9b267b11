//! Bundled series used by the suites, the CLI and the tests.

use std::sync::Arc;

use crate::abelian::AbSheaf;
use crate::aq::Source;
use crate::error::{input, Result};
use crate::groups::{Elem, FiniteGroup, GroupHom};
use crate::sites::{GroupSheaf, Nerve, SeriesTag, SheafSeries, SubSheaf, MAX_DIM};
use crate::superalgebra::{self, ExteriorAlgebra, LinearGreen, Transitions};

/// Largest table group built for a Green series.
pub const GREEN_TABLE_CAP: usize = 729;

/// `point`, `cycle(n)`, `simplex(n)` (boundary), `simplex(n, solid)`, `rp2_min`.
pub fn nerve(spec: &str) -> Result<Arc<Nerve>> {
    let s: String = spec.chars().filter(|c| !c.is_whitespace()).collect();
    let args = |name: &str| -> Option<Vec<String>> {
        s.strip_prefix(name)?.strip_prefix('(')?.strip_suffix(')').map(|a| a.split(',').map(str::to_string).collect())
    };
    let num = |a: &str| a.parse::<usize>().map_err(|_| input(format!("bad nerve argument {a:?} in {spec:?}")));
    let n = match s.as_str() {
        "point" => Nerve::point(),
        "rp2_min" | "rp2" => Nerve::rp2_min(),
        _ => {
            if let Some(a) = args("cycle").filter(|a| a.len() == 1) {
                Nerve::cycle(num(&a[0])?)?
            } else if let Some(a) = args("simplex") {
                match a.as_slice() {
                    [k] => Nerve::simplex(num(k)?, false)?,
                    [k, solid] if solid == "solid" => Nerve::simplex(num(k)?, true)?,
                    _ => return Err(input(format!("unknown nerve {spec:?}"))),
                }
            } else {
                return Err(input(format!("unknown nerve {spec:?}")));
            }
        }
    };
    Ok(Arc::new(n))
}

/// Sheaf with group `g` everywhere whose restriction from a face into a larger
/// face is the twist on the edge joining their least vertices (identity if unlisted).
pub fn framed_sheaf(nerve: Arc<Nerve>, g: Arc<FiniteGroup>, twists: &[([u32; 2], GroupHom)]) -> Result<GroupSheaf> {
    let mut f = GroupSheaf::constant(nerve.clone(), g);
    for d in 1..=MAX_DIM {
        for i in 0..nerve.count(d) {
            let face = nerve.face(d, i);
            if let Some((_, t)) = twists.iter().find(|(e, _)| *e == [face[0], face[1]]) {
                f.restr[d][i][0] = t.clone();
            }
        }
    }
    if let Some(v) = f.validate().first() {
        return Err(input(format!("twists are not functorial: {v:?}")));
    }
    Ok(f)
}

/// Edges where a generator of `H¹(nerve; Z/2)` is odd (empty if there is none).
pub fn odd_edges(nerve: &Arc<Nerve>) -> Result<Vec<[u32; 2]>> {
    let h = AbSheaf::constant(nerve.clone(), &[2])?.cohomology(1)?;
    let Some(g) = h.generators().into_iter().next() else {
        return Ok(Vec::new());
    };
    Ok((0..nerve.count(1)).filter(|&e| g[e] % 2 == 1).map(|e| [nerve.face(1, e)[0], nerve.face(1, e)[1]]).collect())
}

/// Series of constant subgroups, each given by its members.
pub fn series_of(f: GroupSheaf, terms: &[Vec<Elem>], name: String) -> Result<SheafSeries> {
    let f = Arc::new(f);
    let subs = terms.iter().map(|m| SubSheaf::constant(&f, m)).collect::<Result<Vec<_>>>()?;
    SheafSeries::new(f, subs, SeriesTag { name, grade_offset: 0, green: None })
}

/// `Z/2^k ⊃ 2Z ⊃ ... ⊃ 0`, twisted by `-1` along `odd` edges.
pub fn cyclic_tower(nerve: Arc<Nerve>, k: u32, odd: &[[u32; 2]]) -> Result<SheafSeries> {
    let m = 1u32 << k;
    let g = Arc::new(FiniteGroup::cyclic(m)?);
    let neg = GroupHom { map: (0..m).map(|x| (m - x) % m).collect() };
    let twists: Vec<_> = odd.iter().map(|e| (*e, neg.clone())).collect();
    let name = format!("Z/{m}{} on {}", if odd.is_empty() { "" } else { " twisted" }, nerve.name);
    let f = framed_sheaf(nerve, g, &twists)?;
    let terms: Vec<Vec<Elem>> = (0..=k).map(|s| (0..m).filter(|x| x % (1 << s) == 0).collect()).collect();
    series_of(f, &terms, name)
}

/// `Q8 ⊃ ⟨i⟩ ⊃ ⟨-1⟩ ⊃ 1`.
pub fn quaternion_series(nerve: Arc<Nerve>) -> Result<SheafSeries> {
    let name = format!("Q8 on {}", nerve.name);
    let f = GroupSheaf::constant(nerve, Arc::new(FiniteGroup::quaternion8()));
    series_of(f, &[(0..8).collect(), vec![0, 1, 2, 3], vec![0, 1], vec![0]], name)
}

/// `D8 ⊃ ⟨r⟩ ⊃ ⟨r²⟩ ⊃ 1`.
pub fn dihedral_series(nerve: Arc<Nerve>) -> Result<SheafSeries> {
    let name = format!("D8 on {}", nerve.name);
    let f = GroupSheaf::constant(nerve, Arc::new(FiniteGroup::dihedral(4)?));
    series_of(f, &[(0..8).collect(), vec![0, 1, 2, 3], vec![0, 2], vec![0]], name)
}

/// Heisenberg group mod 3 over `N = {c·z + b·y}` over the centre.
pub fn heisenberg_series(nerve: Arc<Nerve>) -> Result<SheafSeries> {
    let name = format!("Heis(3) on {}", nerve.name);
    let f = GroupSheaf::constant(nerve, Arc::new(FiniteGroup::heisenberg(3)?));
    // element a + 3b + 9c
    let n: Vec<Elem> = (0..27).filter(|x| x % 3 == 0).collect();
    let z: Vec<Elem> = (0..27).filter(|x| x % 9 == 0).collect();
    series_of(f, &[(0..27).collect(), n, z, vec![0]], name)
}

/// Green model of rank `q` over `F_p[x]/(x^n)` in shift coordinates, from the smallest abelian start.
pub fn green_linear(p: u64, q: usize, n: usize, nerve: Arc<Nerve>, tr: &Transitions) -> Result<Source> {
    let alg = ExteriorAlgebra::new(p, q, n)?;
    let start = LinearGreen::smallest_start(&alg);
    superalgebra::green_linear(&alg, nerve, tr, start).map(Source::Linear)
}

/// Green model as a table series from `G^(2)`.
pub fn green_table(p: u64, q: usize, n: usize, nerve: Arc<Nerve>, tr: &Transitions) -> Result<Source> {
    let alg = ExteriorAlgebra::new(p, q, n)?;
    superalgebra::green_series(&alg, nerve, tr, 2, GREEN_TABLE_CAP).map(Source::Table)
}

/// Identity matrix scaled by `lambda`, plus `x` times `x_part`.
fn scaled(alg: &ExteriorAlgebra, lambda: u64, x_part: &[Vec<u64>]) -> superalgebra::RMatrix {
    let c: Vec<Vec<u64>> = (0..alg.q).map(|i| (0..alg.q).map(|j| if i == j { lambda } else { 0 }).collect()).collect();
    superalgebra::rmatrix(alg, &c, x_part)
}

/// Green model with one transition on edge `[0, 1]`.
fn green_on_edge(p: u64, q: usize, n: usize, nerve: Arc<Nerve>, lambda: u64, x_part: &[Vec<u64>]) -> Result<Source> {
    let alg = ExteriorAlgebra::new(p, q, n)?;
    let tr = Transitions::on_edges(&alg, &nerve, &[[0, 1]], &scaled(&alg, lambda, x_part))?;
    green_linear(p, q, n, nerve, &tr)
}

/// Green model twisted along a nontrivial `Z/2` class by the involution `diag(-1, 1, ...) + x·E₁₂`.
fn green_involution(p: u64, q: usize, n: usize, nerve: Arc<Nerve>) -> Result<Source> {
    let alg = ExteriorAlgebra::new(p, q, n)?;
    let c: Vec<Vec<u64>> = (0..q).map(|i| (0..q).map(|j| if i != j { 0 } else if i == 0 { p - 1 } else { 1 }).collect()).collect();
    let mut xp = vec![vec![0; q]; q];
    xp[0][1] = 1;
    let t = superalgebra::rmatrix(&alg, &c, &xp);
    let tr = Transitions::on_edges(&alg, &nerve, &odd_edges(&nerve)?, &t)?;
    green_linear(p, q, n, nerve, &tr)
}

/// Ids of the bundled instances, in report order.
pub const BUNDLED: &[&str] = &[
    "z4/cycle3",
    "z4/simplex3",
    "z4/rp2",
    "z4-twisted/cycle3",
    "z4-twisted/rp2",
    "z8/cycle3",
    "z8/rp2",
    "q8/cycle3",
    "q8/simplex3",
    "q8/rp2",
    "d8/cycle3",
    "d8/simplex3",
    "d8/rp2",
    "heis3/cycle3",
    "heis3/simplex3",
    "green-table-p2-q3-n1/cycle3",
    "green-table-p3-q3-n1/cycle3",
    "green-p5-q3-n2/cycle3",
    "green-p5-q3-n2-dilated/cycle3",
    "green-p5-q3-n2-mixed/cycle3",
    "green-p5-q3-n2-involution/rp2",
    "green-p3-q3-n2/cycle3",
    "green-p2-q3-n2/simplex3",
    "green-p2-q4-n1/simplex3",
    "green-p2-q4-n1/simplex4",
    "green-p2-q4-n2/simplex3",
    "green-p5-q4-n2/cycle3",
    "green-p5-q4-n2-mixed/cycle3",
];

pub fn build(id: &str) -> Result<Source> {
    let (kind, site) = id.split_once('/').ok_or_else(|| input(format!("unknown instance {id:?}")))?;
    let nv = match site {
        "cycle3" => nerve("cycle(3)")?,
        "simplex3" => nerve("simplex(3)")?,
        "simplex4" => nerve("simplex(4)")?,
        "rp2" => nerve("rp2_min")?,
        "point" => nerve("point")?,
        _ => return Err(input(format!("unknown site in instance {id:?}"))),
    };
    let c = Transitions::constant();
    let xp = |q: usize| {
        let mut m = vec![vec![0u64; q]; q];
        m[0][1] = 1;
        m
    };
    let src = match kind {
        "z4" => Source::Table(cyclic_tower(nv, 2, &[])?),
        "z8" => Source::Table(cyclic_tower(nv, 3, &[])?),
        "z16" => Source::Table(cyclic_tower(nv, 4, &[])?),
        "z4-twisted" => {
            let odd = if site == "cycle3" { vec![[0, 2]] } else { odd_edges(&nv)? };
            Source::Table(cyclic_tower(nv, 2, &odd)?)
        }
        "q8" => Source::Table(quaternion_series(nv)?),
        "d8" => Source::Table(dihedral_series(nv)?),
        "heis3" => Source::Table(heisenberg_series(nv)?),
        "green-table-p2-q3-n1" => green_table(2, 3, 1, nv, &c)?,
        "green-table-p3-q3-n1" => green_table(3, 3, 1, nv, &c)?,
        "green-p5-q3-n2" => green_linear(5, 3, 2, nv, &c)?,
        "green-p5-q3-n2-dilated" => green_on_edge(5, 3, 2, nv, 2, &[])?,
        "green-p5-q3-n2-mixed" => green_on_edge(5, 3, 2, nv, 1, &xp(3))?,
        "green-p5-q3-n2-involution" => green_involution(5, 3, 2, nv)?,
        "green-p3-q3-n2" => green_linear(3, 3, 2, nv, &c)?,
        "green-p2-q3-n2" => green_linear(2, 3, 2, nv, &c)?,
        "green-p2-q4-n1" => green_linear(2, 4, 1, nv, &c)?,
        "green-p2-q4-n2" => green_linear(2, 4, 2, nv, &c)?,
        "green-p5-q4-n2" => green_linear(5, 4, 2, nv, &c)?,
        "green-p5-q4-n2-mixed" => green_on_edge(5, 4, 2, nv, 1, &xp(4))?,
        _ => return Err(input(format!("unknown instance {id:?}"))),
    };
    Ok(src)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_bundled_instance_builds() {
        for id in BUNDLED {
            let s = build(id).unwrap_or_else(|e| panic!("{id}: {e}"));
            assert!(s.length() >= 1, "{id}");
        }
    }

    #[test]
    fn rp2_has_one_odd_class() {
        let n = nerve("rp2_min").unwrap();
        assert!(!odd_edges(&n).unwrap().is_empty());
        assert!(odd_edges(&nerve("simplex(3)").unwrap()).unwrap().is_empty());
    }

    #[test]
    fn nerve_names() {
        assert_eq!(nerve("cycle(4)").unwrap().count(1), 4);
        assert_eq!(nerve("simplex(3)").unwrap().count(3), 0);
        assert_eq!(nerve("simplex(3, solid)").unwrap().count(3), 1);
        assert!(nerve("torus").is_err());
    }
}
