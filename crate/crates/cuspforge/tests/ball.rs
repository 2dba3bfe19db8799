mod common;

use cuspforge::ball::{unfold, wedge_sums, Ball};
use cuspforge::covering::finite_cover;
use cuspforge::io::parse_itri;
use cuspforge::triangulation::Triangulation;

fn load(name: &str) -> Triangulation {
    parse_itri(&common::fixture(name)).unwrap()
}

/// The base renumbered so that ball tet `i` is base tet `copy_of[i]`.
fn renumbered(ball: &Ball) -> Triangulation {
    let mut new_id = vec![0; ball.n()];
    for (i, &b) in ball.copy_of.iter().enumerate() {
        new_id[b] = i;
    }
    ball.base.relabel(&new_id)
}

fn check_ball(ball: &Ball) {
    let n = ball.n();
    assert!(ball.check().is_ok());
    assert_eq!(ball.tree().len(), n - 1);
    assert_eq!(2 * ball.tree().len() + 2 * ball.pairs.len(), 4 * n);
    assert_eq!(ball.glued(), renumbered(ball));
    let base_classes = ball.base.edge_classes();
    for (class, sum) in wedge_sums(ball) {
        assert_eq!(sum, base_classes[class].index, "wedges over class {class}");
    }
    assert!(ball.tri.unique_common_simplex().0);
}

#[test]
fn fixtures_unfold() {
    for name in ["FIG8.itri", "DBL.itri"] {
        let ball = unfold(&load(name)).unwrap();
        assert_eq!(ball.copy_of[0], 0, "{name}");
        check_ball(&ball);
    }
}

#[test]
fn boundary_weights_count_chains() {
    let ball = unfold(&load("FIG8.itri")).unwrap();
    let m = ball.boundary_weights();
    assert_eq!(m.len(), 2);
    // Three boundary pairs, nine boundary edges on each side, each chain
    // has two ends.
    assert_eq!(m.iter().sum::<usize>(), 3 * 2 * 3 / 2);
}

#[test]
fn unfold_of_a_cover_and_a_move() {
    let cover = finite_cover(&load("DBL.itri")).unwrap();
    let ball = unfold(&cover.total).unwrap();
    check_ball(&ball);
    // Some interior face can be swapped for a boundary pair on its chain.
    let mut moved = None;
    'outer: for ((t, f), _, _) in ball.tree() {
        for p in &ball.pairs {
            if let Ok(next) = ball.cut_and_reglue((t, f), p.a) {
                moved = Some(next);
                break 'outer;
            }
        }
    }
    let next = moved.expect("a valid move exists");
    check_ball(&next);
    assert_eq!(next.pairs.len(), ball.pairs.len());
}

#[test]
fn bad_moves_are_rejected() {
    let ball = unfold(&load("FIG8.itri")).unwrap();
    let boundary = ball.pairs[0].a;
    assert!(ball.cut_and_reglue(boundary, boundary).is_err());
    let ((t, f), _, _) = ball.tree()[0];
    assert!(ball.cut_and_reglue((t, f), (t, f)).is_err());
}

#[test]
fn face_distance_is_bounded() {
    let ball = unfold(&load("FIG8.itri")).unwrap();
    for (start, end, _, _) in ball.segments() {
        let d = ball.face_distance(start.0, end.0, start.1).unwrap();
        assert!(d <= 4 * ball.n());
    }
}

#[test]
fn tiny_inputs_are_rejected() {
    let mut one = Triangulation::with_tets(1);
    assert!(unfold(&one).is_err());
    one = load("DBL.itri");
    one.set_entry(0, 0, None);
    assert!(unfold(&one).is_err());
}
