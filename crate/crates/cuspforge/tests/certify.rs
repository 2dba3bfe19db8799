mod common;

use cuspforge::certify::*;
use cuspforge::covering::{branched_cover, finite_cover};
use cuspforge::io::parse_itri;
use cuspforge::normal::{edge_link_surface, enumerate_solutions, vertex_link, NormalCoords};
use cuspforge::surface::construct_nonlinking_surface;
use cuspforge::triangulation::Triangulation;

fn load(name: &str) -> Triangulation {
    parse_itri(&common::fixture(name)).unwrap()
}

#[test]
fn vertex_link_is_not_applicable() {
    let t = load("FIG8.itri");
    let c = certify(&t, &vertex_link(&t, &t.cusp_classes()[0]));
    assert_eq!(c.verdict, Verdict::NotApplicable);
    assert_eq!(c.hypothesis("surface_not_linking"), Some(false));
    assert_eq!(c.hypothesis("all_edge_indices_at_least_6"), Some(true));
    assert!(c.provenance["claim"].contains("cusp link"));
}

#[test]
fn dbl_refutes_the_index_hypothesis() {
    let t = load("DBL.itri");
    for x in enumerate_solutions(&t, 1) {
        let c = certify(&t, &x);
        assert_eq!(c.verdict, Verdict::RefutedHypothesis);
        assert_eq!(c.hypothesis("all_edge_indices_at_least_6"), Some(false));
    }
}

#[test]
fn non_solutions_are_refuted() {
    let t = load("FIG8.itri");
    let mut x = NormalCoords::zero(2);
    x.0[0] = 1;
    let c = certify(&t, &x);
    assert_eq!(c.verdict, Verdict::RefutedHypothesis);
    assert_eq!(c.hypothesis("surface_is_normal"), Some(false));
    assert_eq!(certify(&t, &NormalCoords::zero(2)).verdict, Verdict::RefutedHypothesis);
}

#[test]
fn text_is_key_sorted_and_round_trips() {
    let c = finite_cover(&load("DBL.itri")).unwrap();
    let x = construct_nonlinking_surface(&c.total).unwrap().coords;
    let cert = certify(&c.total, &x);
    let text = cert.to_text();
    let keys: Vec<&str> = text.lines().map(|l| l.split('=').next().unwrap()).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert_eq!(Certificate::from_text(&text).unwrap(), cert);
    cert.replay(&c.total, &x).unwrap();
    // The cover of DBL still has index-2 edges.
    assert_eq!(cert.verdict, Verdict::RefutedHypothesis);
    assert_eq!(cert.hypothesis("surface_not_linking"), Some(true));
}

#[test]
fn replay_detects_other_inputs_and_edits() {
    let t = load("FIG8.itri");
    let x = vertex_link(&t, &t.cusp_classes()[0]);
    let cert = certify(&t, &x);
    assert!(cert.replay(&t, &x.scaled(2)).is_err());
    assert!(cert.replay(&load("DBL.itri"), &x).is_err());
    let edited = cert.to_text().replace("verdict=not-applicable", "verdict=certified");
    let forged = Certificate::from_text(&edited).unwrap();
    assert!(forged.replay(&t, &x).is_err());
    assert!(Certificate::from_text("verdict=maybe\n").is_err());
}

/// A thin surface around an edge passes every check. It bounds a tube
/// around the edge, so `certified` reports hypotheses only.
#[test]
fn edge_linking_surfaces_pass_every_check() {
    let b = branched_cover(&load("DBL.itri"), 6).unwrap();
    let t = b.cover.total;
    let mut seen = 0;
    for class in t.edge_classes() {
        if let Some(x) = edge_link_surface(&t, &class) {
            seen += 1;
            assert_eq!(certify(&t, &x).verdict, Verdict::Certified);
        }
    }
    assert!(seen > 0);
}

#[test]
fn pipeline_rejects_dbl_without_the_flag() {
    let e = run_main_pipeline(&load("DBL.itri"), false).unwrap_err();
    assert_eq!(error_exit_code(&e), 2);
}

#[test]
fn pipeline_on_fig8_stops_at_the_cover() {
    // The doubling cover of FIG8 lacks unique common simplices, which the
    // construction requires.
    let e = run_main_pipeline(&load("FIG8.itri"), false).unwrap_err();
    assert_eq!(error_exit_code(&e), 4);
}
