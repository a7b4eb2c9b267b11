//! Scenario files: parsing, reference resolution and construction.

use std::collections::BTreeMap;
use std::sync::Arc;

use aqsheaf::aq::{SheafAut, Source};
use aqsheaf::groups::{kernel_iso, Elem, FiniteGroup, GroupHom, Subgroup};
use aqsheaf::instances::{self, framed_sheaf, series_of};
use aqsheaf::linalg::Mat;
use aqsheaf::sites::{validate_sheaf, GroupSheaf, Nerve, SheafMorphism, MAX_DIM};
use aqsheaf::superalgebra::{rmatrix, ExteriorAlgebra, Transitions};
use aqsheaf::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub const SCENARIO_SCHEMA: &str = "aqsheaf.scenario/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub groups: BTreeMap<String, GroupDef>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub nerves: BTreeMap<String, NerveDef>,
    /// Group endomorphisms by images of every element, used as twists.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub homs: BTreeMap<String, HomDef>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub sheaves: BTreeMap<String, SheafDef>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub series: BTreeMap<String, SeriesDef>,
    /// `H' ⊆ H ⊆ G`, checked by the kernel isomorphism.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extensions: BTreeMap<String, ExtensionDef>,
    /// Global automorphisms, keyed by series id.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub automorphisms: BTreeMap<String, Vec<AutDef>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tasks: Vec<Task>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupDef {
    Cyclic(u32),
    Dihedral(usize),
    Quaternion8,
    Heisenberg(usize),
    Symmetric(usize),
    Product(Vec<String>),
    /// Cayley table; row `a`, column `b` holds `a·b`, element 0 the identity.
    Table(Vec<Vec<Elem>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum NerveDef {
    /// `point`, `cycle(n)`, `simplex(n)`, `simplex(n, solid)`, `rp2_min`.
    Named(String),
    Facets { vertices: usize, facets: Vec<Vec<u32>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomDef {
    pub group: String,
    pub images: Vec<Elem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Twist {
    pub edge: [u32; 2],
    pub hom: String,
}

/// Group `group` on every face; restriction along an edge listed in `twists`
/// is the named hom, identity elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SheafDef {
    pub nerve: String,
    pub group: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub twists: Vec<Twist>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SeriesDef {
    Bundled(String),
    /// Terms `H_0 ⊇ ... ⊇ H_N`, each the same subgroup on every face.
    Terms { sheaf: String, terms: Vec<Vec<Elem>> },
    Green(GreenDef),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreenDef {
    pub p: u64,
    pub q: usize,
    pub n: usize,
    pub nerve: String,
    /// Build the filtration as a table series from `G^(2)` instead of shift coordinates.
    #[serde(default)]
    pub table: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub transitions: Vec<TransitionDef>,
}

/// Transition `constant + x·x_part` on each listed edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionDef {
    pub edges: Vec<[u32; 2]>,
    pub constant: Vec<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub x_part: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtensionDef {
    pub group: String,
    pub normal: Vec<Elem>,
    pub sub: Vec<Elem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum AutDef {
    /// Images of every element of the ambient group, the same on every face.
    GroupMap(Vec<Elem>),
    /// Rows of a matrix on the shift coordinates of a Green series.
    Matrix(Vec<Vec<u64>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Validate,
    Cohomology,
    Primary,
    Classify,
}

/// A scenario with every reference resolved and every construction built.
pub struct Scenario {
    pub name: String,
    pub series: Vec<(String, Source)>,
    pub sheaf_violations: Vec<(String, Vec<String>)>,
    pub extensions: Vec<(String, Value)>,
    pub automorphisms: BTreeMap<String, Vec<SheafAut>>,
    pub tasks: Vec<Task>,
}

fn input(msg: impl Into<String>) -> Error {
    Error::Input(msg.into())
}

fn lookup<'a, T>(map: &'a BTreeMap<String, T>, kind: &str, id: &str, from: &str) -> Result<&'a T> {
    map.get(id).ok_or_else(|| input(format!("unresolved {kind} reference {id:?} in {from}")))
}

pub fn parse(text: &str, origin: &str) -> Result<ScenarioFile> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| input(format!("{origin}: {e}")))?;
    if file.schema != SCENARIO_SCHEMA {
        return Err(input(format!("{origin}: schema {:?} is not {SCENARIO_SCHEMA:?}", file.schema)));
    }
    Ok(file)
}

pub fn load(path: &str) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| input(format!("{path}: {e}")))?;
    resolve(&parse(&text, path)?)
}

/// One bundled instance as a scenario.
pub fn bundled(id: &str) -> Result<Scenario> {
    let mut series = BTreeMap::new();
    series.insert(id.to_string(), SeriesDef::Bundled(id.to_string()));
    resolve(&ScenarioFile {
        schema: SCENARIO_SCHEMA.to_string(),
        name: id.to_string(),
        groups: BTreeMap::new(),
        nerves: BTreeMap::new(),
        homs: BTreeMap::new(),
        sheaves: BTreeMap::new(),
        series,
        extensions: BTreeMap::new(),
        automorphisms: BTreeMap::new(),
        tasks: Vec::new(),
    })
}

struct Resolver<'a> {
    file: &'a ScenarioFile,
    groups: BTreeMap<String, Arc<FiniteGroup>>,
    nerves: BTreeMap<String, Arc<Nerve>>,
}

impl Resolver<'_> {
    fn group(&mut self, id: &str, from: &str) -> Result<Arc<FiniteGroup>> {
        self.group_at(id, from, 0)
    }

    fn group_at(&mut self, id: &str, from: &str, depth: usize) -> Result<Arc<FiniteGroup>> {
        if let Some(g) = self.groups.get(id) {
            return Ok(g.clone());
        }
        if depth > self.file.groups.len() {
            return Err(input(format!("group {id:?} is defined in terms of itself")));
        }
        let def = lookup(&self.file.groups, "group", id, from)?;
        let at = format!("group {id:?}");
        let g = match def {
            GroupDef::Cyclic(n) => FiniteGroup::cyclic(*n),
            GroupDef::Dihedral(n) => FiniteGroup::dihedral(*n),
            GroupDef::Quaternion8 => Ok(FiniteGroup::quaternion8()),
            GroupDef::Heisenberg(p) => FiniteGroup::heisenberg(*p),
            GroupDef::Symmetric(n) => FiniteGroup::symmetric(*n),
            GroupDef::Table(rows) => FiniteGroup::from_table(id, rows),
            GroupDef::Product(ids) => {
                let factors = ids
                    .iter()
                    .map(|f| self.group_at(f, &at, depth + 1).map(|g| (*g).clone()))
                    .collect::<Result<Vec<_>>>()?;
                FiniteGroup::product(&factors)
            }
        }
        .map_err(|e| input(format!("{at}: {e}")))?;
        let g = Arc::new(g);
        self.groups.insert(id.to_string(), g.clone());
        Ok(g)
    }

    fn nerve(&mut self, id: &str, from: &str) -> Result<Arc<Nerve>> {
        if let Some(n) = self.nerves.get(id) {
            return Ok(n.clone());
        }
        let n = match lookup(&self.file.nerves, "nerve", id, from)? {
            NerveDef::Named(spec) => instances::nerve(spec)?,
            NerveDef::Facets { vertices, facets } => Arc::new(Nerve::from_facets(id, *vertices, facets)?),
        };
        self.nerves.insert(id.to_string(), n.clone());
        Ok(n)
    }

    fn sheaf(&mut self, id: &str, from: &str) -> Result<GroupSheaf> {
        let def = lookup(&self.file.sheaves, "sheaf", id, from)?;
        let at = format!("sheaf {id:?}");
        let nerve = self.nerve(&def.nerve, &at)?;
        let g = self.group(&def.group, &at)?;
        let mut twists = Vec::new();
        for t in &def.twists {
            let h = lookup(&self.file.homs, "hom", &t.hom, &at)?;
            if h.group != def.group {
                return Err(input(format!("hom {:?} is on group {:?}, not {:?}", t.hom, h.group, def.group)));
            }
            let hom = GroupHom { map: h.images.clone() };
            hom.validate(&g, &g).map_err(|e| input(format!("hom {:?}: {e}", t.hom)))?;
            twists.push((t.edge, hom));
        }
        framed_sheaf(nerve, g, &twists).map_err(|e| input(format!("{at}: {e}")))
    }

    fn series(&mut self, id: &str, def: &SeriesDef) -> Result<Source> {
        let at = format!("series {id:?}");
        match def {
            SeriesDef::Bundled(name) => instances::build(name),
            SeriesDef::Terms { sheaf, terms } => {
                let f = self.sheaf(sheaf, &at)?;
                let mut s = series_of(f, terms, id.to_string())?;
                s.tag.name = id.to_string();
                Ok(Source::Table(s))
            }
            SeriesDef::Green(g) => {
                let nerve = self.nerve(&g.nerve, &at)?;
                let alg = ExteriorAlgebra::new(g.p, g.q, g.n)?;
                let mut tr = Transitions::constant();
                for t in &g.transitions {
                    let m = rmatrix(&alg, &t.constant, &t.x_part);
                    let more = Transitions::on_edges(&alg, &nerve, &t.edges, &m)?;
                    for (e, m) in more.edges {
                        if tr.edges.iter().any(|(f, _)| *f == e) {
                            return Err(input(format!("{at}: edge {e:?} has two transitions")));
                        }
                        tr.edges.push((e, m));
                    }
                }
                if g.table {
                    instances::green_table(g.p, g.q, g.n, nerve, &tr)
                } else {
                    instances::green_linear(g.p, g.q, g.n, nerve, &tr)
                }
            }
        }
    }

    fn extension(&mut self, id: &str, def: &ExtensionDef) -> Result<Value> {
        let at = format!("extension {id:?}");
        let g = self.group(&def.group, &at)?;
        let h = Subgroup::new(&g, &def.normal).map_err(|e| input(format!("{at}: {e}")))?;
        let hp = Subgroup::new(&g, &def.sub).map_err(|e| input(format!("{at}: {e}")))?;
        let k = kernel_iso(&g, &h, &hp)?;
        Ok(json!({
            "quotient_order": k.source.order(),
            "middle_order": k.middle.order(),
            "target_order": k.target.order(),
            "kernel_order": k.kernel.order(),
        }))
    }
}

fn automorphism(src: &Source, def: &AutDef, at: &str) -> Result<SheafAut> {
    match (src, def) {
        (Source::Table(s), AutDef::GroupMap(images)) => {
            let f = &s.ambient;
            let hom = GroupHom { map: images.clone() };
            let maps: Vec<Vec<GroupHom>> =
                (0..=MAX_DIM).map(|d| vec![hom.clone(); f.nerve.count(d)]).collect();
            for d in 0..=MAX_DIM {
                for i in 0..f.nerve.count(d) {
                    hom.validate(f.group(d, i), f.group(d, i)).map_err(|e| input(format!("{at}: {e}")))?;
                }
            }
            let m = SheafMorphism { maps };
            if let Some(v) = m.validate(f, f).first() {
                return Err(input(format!("{at}: not a sheaf morphism: {v:?}")));
            }
            Ok(SheafAut::Table(m))
        }
        (Source::Linear(f), AutDef::Matrix(rows)) => {
            let d = f.dim();
            if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                return Err(input(format!("{at}: matrix must be {d}x{d}")));
            }
            let cols: Vec<Vec<u64>> = (0..d).map(|j| rows.iter().map(|r| r[j] % f.p).collect()).collect();
            Ok(SheafAut::Linear(Mat::from_cols(d, &cols)))
        }
        (Source::Table(_), AutDef::Matrix(_)) => Err(input(format!("{at}: table series take group_map automorphisms"))),
        (Source::Linear(_), AutDef::GroupMap(_)) => Err(input(format!("{at}: Green series take matrix automorphisms"))),
    }
}

pub fn resolve(file: &ScenarioFile) -> Result<Scenario> {
    let mut r = Resolver { file, groups: BTreeMap::new(), nerves: BTreeMap::new() };
    let mut sheaf_violations = Vec::new();
    for id in file.sheaves.keys() {
        let f = r.sheaf(id, "scenario")?;
        sheaf_violations.push((id.clone(), validate_sheaf(&f).iter().map(|v| format!("{v:?}")).collect()));
    }
    let mut series = Vec::new();
    for (id, def) in &file.series {
        series.push((id.clone(), r.series(id, def).map_err(|e| prefix(e, &format!("series {id:?}")))?));
    }
    let mut extensions = Vec::new();
    for (id, def) in &file.extensions {
        extensions.push((id.clone(), r.extension(id, def)?));
    }
    let mut automorphisms = BTreeMap::new();
    for (id, defs) in &file.automorphisms {
        let src = series
            .iter()
            .find(|(s, _)| s == id)
            .map(|(_, s)| s)
            .ok_or_else(|| input(format!("unresolved series reference {id:?} in automorphisms")))?;
        let auts = defs
            .iter()
            .enumerate()
            .map(|(k, d)| automorphism(src, d, &format!("automorphism {k} of {id:?}")))
            .collect::<Result<Vec<_>>>()?;
        automorphisms.insert(id.clone(), auts);
    }
    Ok(Scenario { name: file.name.clone(), series, sheaf_violations, extensions, automorphisms, tasks: file.tasks.clone() })
}

fn prefix(e: Error, at: &str) -> Error {
    match e {
        Error::Input(m) if !m.contains(at) => Error::Input(format!("{at}: {m}")),
        Error::Structural(m) => Error::Structural(format!("{at}: {m}")),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const Z2_CYCLE: &str = r#"{
        "schema": "aqsheaf.scenario/1",
        "name": "z2",
        "groups": { "z2": { "cyclic": 2 } },
        "nerves": { "c3": { "named": "cycle(3)" } },
        "sheaves": { "f": { "nerve": "c3", "group": "z2" } },
        "series": { "s": { "terms": { "sheaf": "f", "terms": [[0, 1], [0]] } } }
    }"#;

    #[test]
    fn minimal_scenario_resolves() {
        let s = resolve(&parse(Z2_CYCLE, "t").unwrap()).unwrap();
        assert_eq!(s.series.len(), 1);
        assert_eq!(s.series[0].1.length(), 1);
        assert!(s.sheaf_violations[0].1.is_empty());
    }

    #[test]
    fn syntax_errors_carry_a_position() {
        let e = parse("{\n  \"schema\": ,\n}", "bad.json").unwrap_err();
        let msg = e.to_string();
        assert!(matches!(e, Error::Input(_)));
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn unknown_fields_and_schemas_are_rejected() {
        let extra = Z2_CYCLE.replace("\"name\": \"z2\",", "\"name\": \"z2\", \"colour\": 1,");
        assert!(parse(&extra, "t").is_err());
        let old = Z2_CYCLE.replace("scenario/1", "scenario/0");
        assert!(parse(&old, "t").unwrap_err().to_string().contains("schema"));
    }

    #[test]
    fn unresolved_references_name_the_id() {
        let bad = Z2_CYCLE.replace("\"group\": \"z2\"", "\"group\": \"z3\"");
        let e = resolve(&parse(&bad, "t").unwrap()).err().unwrap();
        assert!(e.to_string().contains("\"z3\""), "{e}");
    }

    #[test]
    fn file_round_trips() {
        let f = parse(Z2_CYCLE, "t").unwrap();
        let back = parse(&serde_json::to_string(&f).unwrap(), "t").unwrap();
        assert_eq!(f, back);
    }
}
