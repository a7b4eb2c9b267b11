use super::*;
use crate::groups::FiniteGroup;
use crate::instances::{build, cyclic_tower, nerve, series_of};
use crate::sites::GroupSheaf;
use proptest::prelude::*;
use std::sync::Arc;

fn lin(id: &str) -> Linearisation {
    linearise(&Ctx::default(), &build(id).unwrap()).unwrap()
}

/// `d2[j+1] ∘ d1[j]` evaluated on every input, independently of the stored flag.
fn composes_to_base_point(pc: &PrimaryComplex) -> bool {
    (0..pc.d1.len().saturating_sub(1)).all(|j| {
        let (first, second) = (&pc.d1[j], &pc.d2[j + 1]);
        (0..first.source_size()).all(|x| second.apply(first.apply(x)) == 0)
    })
}

#[test]
fn heisenberg_graded_pieces() {
    let l = lin("heis3/cycle3");
    let m = l.meta();
    assert_eq!((m.length, m.central), (3, true));
    let stalks: Vec<_> = l.components.iter().map(|c| c.stalk.clone()).collect();
    assert_eq!(stalks, vec![vec![3], vec![3], vec![3]]);
    // constant coefficients on a circle: H⁰ = H¹ = A, H² = 0
    for c in &l.components {
        assert_eq!(c.h0.order, c.h1.order);
        assert_eq!(c.h2.order, 1);
    }
}

#[test]
fn primary_complex_composes_to_base_point() {
    let ctx = Ctx::default();
    for id in ["z4/rp2", "z8/cycle3", "z4-twisted/rp2", "q8/simplex3", "d8/rp2", "heis3/cycle3", "green-p5-q3-n2-mixed/cycle3"] {
        let l = lin(id);
        let pc = build_primary(&ctx, &l).unwrap();
        assert!(composes_to_base_point(&pc), "{id}");
        assert!(pc.complex_holds, "{id}");
        assert!(pc.routes.iter().all(|r| r.agree), "{id}: witness dependence");
    }
}

#[test]
fn non_central_series_is_refused() {
    let g = FiniteGroup::symmetric(3).unwrap();
    let a3 = crate::groups::normal_subgroups(&g).into_iter().find(|h| h.order() == 3).unwrap();
    let f = GroupSheaf::constant(nerve("cycle(3)").unwrap(), Arc::new(g));
    let s = series_of(f, &[(0..6).collect(), a3.members, vec![0]], "S3".into()).unwrap();
    let l = linearise(&Ctx::default(), &Source::Table(s)).unwrap();
    assert!(!l.meta().central);
    assert!(matches!(build_primary(&Ctx::default(), &l), Err(crate::Error::Structural(_))));
}

#[test]
fn bockstein_on_rp2_is_injective() {
    let ctx = Ctx::default();
    let l = lin("z4/rp2");
    let pc = build_primary(&ctx, &l).unwrap();
    assert_eq!(pc.d2[0].source_size(), 2);
    assert_eq!(pc.d2[0].image_size(), 2);
    let h = primary_cohomology(&l, &pc);
    assert_eq!(h.grades[0].kernel_d2, 1);
}

#[test]
fn linearity_holds_on_degree_two_instances() {
    let ctx = Ctx::default();
    for id in ["z8/rp2", "q8/cycle3", "green-p3-q3-n2/cycle3"] {
        let l = lin(id);
        let pc = build_primary(&ctx, &l).unwrap();
        let rep = verify_linearity(&ctx, &l, &pc).unwrap();
        assert!(rep.holds, "{id}");
    }
}

#[test]
fn boundary1_matches_the_stored_map() {
    let ctx = Ctx::default();
    let l = lin("z8/rp2");
    let pc = build_primary(&ctx, &l).unwrap();
    for j in 0..pc.d1.len() {
        for x in 0..pc.d1[j].source_size() {
            assert_eq!(boundary1(&l, j, x).unwrap(), pc.d1[j].apply(x));
        }
    }
}

#[test]
fn shift_drops_leading_terms() {
    let src = build("z8/cycle3").unwrap();
    let full = linearise(&Ctx::default(), &src).unwrap();
    let tail = linearise(&Ctx::default(), &src.shifted(1).unwrap()).unwrap();
    assert_eq!(tail.meta().length, 2);
    for (a, b) in full.components[1..].iter().zip(&tail.components) {
        assert_eq!((&a.stalk, &a.h0, &a.h1, &a.h2), (&b.stalk, &b.h0, &b.h1, &b.h2));
    }
    assert!(src.shifted(4).is_err());
}

#[test]
fn extended_complex_on_rank_four() {
    let ctx = Ctx::default();
    let l = lin("green-p2-q4-n1/simplex3");
    assert!(l.meta().has_degree(4));
    let ext = extended_complex(&ctx, &l).unwrap();
    assert!(!ext.squares.is_empty());
    assert!(ext.holds());
    for s in &ext.squares {
        let (first, second) = (&ext.maps[s.degree][s.source_index], &ext.maps[s.degree + 1][s.source_index + 1]);
        assert!((0..first.source_size()).all(|x| second.apply(first.apply(x)) == 0));
    }
}

#[test]
fn table_and_linear_green_models_agree_on_grades() {
    let ctx = Ctx::default();
    let table = lin("green-table-p3-q3-n1/cycle3");
    let nv = nerve("cycle(3)").unwrap();
    let linear = linearise(&ctx, &crate::instances::green_linear(3, 3, 1, nv, &crate::superalgebra::Transitions::constant()).unwrap()).unwrap();
    let mut compared = 0;
    for c in &linear.components {
        if let Some(t) = table.components.iter().find(|t| t.grade == c.grade) {
            assert_eq!((t.h0.order, t.h1.order, t.h2.order), (c.h0.order, c.h1.order, c.h2.order), "grade {}", c.grade);
            compared += 1;
        }
    }
    assert!(compared > 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Every graded piece of a 2-power tower is `Z/2`, twisted or not.
    #[test]
    fn cyclic_towers_form_a_complex(k in 1u32..=3, n in 3usize..=5, twisted in any::<bool>()) {
        let nv = nerve(&format!("cycle({n})")).unwrap();
        let odd = if twisted { vec![[0, n as u32 - 1]] } else { Vec::new() };
        let s = cyclic_tower(nv, k, &odd).unwrap();
        let ctx = Ctx::default();
        let l = linearise(&ctx, &Source::Table(s)).unwrap();
        prop_assert_eq!(l.meta().length, k as usize);
        for c in &l.components {
            prop_assert_eq!((c.h0.order, c.h1.order), (2, 2));
        }
        let pc = build_primary(&ctx, &l).unwrap();
        prop_assert!(composes_to_base_point(&pc));
    }
}

#[test]
fn torsor_sequences_are_exact() {
    for id in ["z4/cycle3", "z4-twisted/cycle3", "q8/cycle3", "d8/cycle3", "z8/rp2"] {
        let l = lin(id);
        let t = l.torsors(&Ctx::default()).unwrap();
        assert_eq!(t.h1.len(), l.meta().length + 1);
        assert_eq!(*t.h1.last().unwrap(), 1);
        for j in 0..l.meta().length {
            // the image of Ȟ¹(H_{j+1}) is the kernel of ω_j
            assert_eq!(t.up[j].image_size(), t.omega[j].kernel_size(), "{id} at {j}");
        }
    }
}

/// On a circle, `H¹` of a local system is its coinvariants: `Z/4` plain, `Z/4/2` under `-1`.
#[test]
fn twisting_by_minus_one_halves_the_torsors() {
    let ctx = Ctx::default();
    let plain = lin("z4/cycle3").torsors(&ctx).unwrap();
    let twisted = lin("z4-twisted/cycle3").torsors(&ctx).unwrap();
    assert_eq!(plain.h1[0], 4);
    assert_eq!(twisted.h1[0], 2);
}
