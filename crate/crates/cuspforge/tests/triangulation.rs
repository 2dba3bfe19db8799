mod common;

use cuspforge::io::{parse_itri, write_itri};
use cuspforge::perm::Perm;
use cuspforge::triangulation::{Triangulation, Violation};
use proptest::prelude::*;

fn fig8() -> Triangulation {
    parse_itri(&common::fixture("FIG8.itri")).unwrap()
}

fn dbl() -> Triangulation {
    parse_itri(&common::fixture("DBL.itri")).unwrap()
}

fn indices(t: &Triangulation) -> Vec<usize> {
    let mut v: Vec<usize> = t.edge_classes().iter().map(|c| c.index).collect();
    v.sort();
    v
}

#[test]
fn fixture_edges_match_walk_oracle() {
    for (name, tri) in [("FIG8.itri", fig8()), ("DBL.itri", dbl())] {
        let g = common::raw(&common::fixture(name));
        assert_eq!(indices(&tri), common::edge_indices(&g), "{name}");
        assert_eq!(tri.cusp_classes().len(), common::cusp_count(&g), "{name}");
    }
    assert_eq!(indices(&fig8()), vec![6, 6]);
    assert_eq!(fig8().cusp_classes().len(), 1);
    assert_eq!(indices(&dbl()), vec![2; 6]);
    assert_eq!(dbl().cusp_classes().len(), 4);
}

#[test]
fn curvature_predicate() {
    let (ok, singular) = fig8().is_negatively_curved();
    assert!(ok);
    assert!(singular.is_empty());
    assert!(!dbl().is_negatively_curved().0);
    for c in fig8().edge_classes() {
        assert!(c.angle_sum() >= 2.0 * std::f64::consts::PI - 1e-12);
        assert_eq!(c.angle_sum_thirds(), 6);
    }
}

#[test]
fn fixtures_validate_and_are_orientable() {
    for t in [fig8(), dbl()] {
        let r = t.validate();
        assert!(r.ok, "{:?}", r.violations);
        assert!(r.orientable);
    }
}

#[test]
fn validation_reports_broken_gluings() {
    let mut t = dbl();
    t.set_entry(0, 2, None);
    let r = t.validate();
    assert!(!r.ok);
    assert!(r.violations.contains(&Violation::Boundary { tet: 0, face: 2 }));
    assert!(r.violations.contains(&Violation::Involution { tet: 1, face: 2 }));

    let mut s = Triangulation::with_tets(1);
    s.glue(0, 0, 0, Perm::new([1, 0, 2, 3]).unwrap());
    s.glue(0, 2, 0, Perm::new([0, 1, 3, 2]).unwrap());
    assert!(s.validate().violations.iter().any(|v| matches!(v, Violation::SelfGluing { .. })));
    assert!(Triangulation::with_tets(0).validate().violations.contains(&Violation::Empty));
}

#[test]
fn unique_common_simplex_on_fixtures() {
    // Both fixtures have two tets sharing all four faces.
    assert_eq!(fig8().unique_common_simplex(), (false, Some((0, 1))));
    assert_eq!(dbl().unique_common_simplex(), (false, Some((0, 1))));
}

#[test]
fn serialisation_is_canonical() {
    for name in ["FIG8.itri", "DBL.itri"] {
        let t = parse_itri(&common::fixture(name)).unwrap();
        let text = write_itri(&t);
        assert_eq!(parse_itri(&text).unwrap(), t);
        assert_eq!(write_itri(&parse_itri(&text).unwrap()), text);
    }
}

/// Closed gluings of `n` tets: faces paired along a shuffled order, each
/// pair with a permutation.
fn closed(n: usize) -> impl Strategy<Value = Triangulation> {
    let faces: Vec<usize> = (0..4 * n).collect();
    (Just(faces).prop_shuffle(), proptest::collection::vec(0..24usize, 2 * n)).prop_map(move |(order, perms)| {
        let all = Perm::all();
        let mut t = Triangulation::with_tets(n);
        for (k, pair) in order.chunks(2).enumerate() {
            let (a, b) = (pair[0], pair[1]);
            let (ta, fa) = (a / 4, (a % 4) as u8);
            let (tb, fb) = (b / 4, (b % 4) as u8);
            // Pick the k-th permutation sending fa to fb.
            let choices: Vec<Perm> = all.iter().copied().filter(|p| p.apply(fa) == fb).collect();
            t.glue(ta, fa, tb, choices[perms[k] % choices.len()]);
        }
        t
    })
}

proptest! {
    #[test]
    fn edge_indices_match_oracle(t in (1usize..6).prop_flat_map(closed)) {
        let g = common::raw_of(&t);
        prop_assert_eq!(indices(&t), common::edge_indices(&g));
        prop_assert_eq!(t.cusp_classes().len(), common::cusp_count(&g));
        prop_assert_eq!(indices(&t).iter().sum::<usize>(), 6 * t.n());
    }

    #[test]
    fn relabelling_preserves_invariants(
        (t, order) in (1usize..6).prop_flat_map(|n| (closed(n), Just((0..n).collect::<Vec<_>>()).prop_shuffle()))
    ) {
        let r = t.relabel(&order);
        prop_assert_eq!(indices(&r), indices(&t));
        prop_assert_eq!(r.cusp_classes().len(), t.cusp_classes().len());
        prop_assert_eq!(r.validate().ok, t.validate().ok);
        prop_assert_eq!(r.is_negatively_curved().0, t.is_negatively_curved().0);
    }

    #[test]
    fn write_parse_round_trip(t in (1usize..6).prop_flat_map(closed)) {
        let text = write_itri(&t);
        prop_assert_eq!(parse_itri(&text).unwrap(), t);
    }
}
