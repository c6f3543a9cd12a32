mod common;
mod fixtures;

use std::collections::HashSet;

use common::kin;
use fixtures::{dims, edge_index, geom, oracle_closure, to_cfg, to_st};
use proptest::prelude::*;
use tumbler_core::geometry::Vec2;
use tumbler_core::reachability::{enumerate, EnumerateOptions, LocomotionMode};
use tumbler_core::robot::{
    canonical_edge, pivot_segment, revolve, world_footprint, Configuration, EdgeLabel, StableState,
    TransitionTable,
};

fn arb_config() -> impl Strategy<Value = Configuration> {
    (
        prop_oneof![Just(StableState::Hu), Just(StableState::Hd), Just(StableState::Sd)],
        -100.0..100.0f64,
        -100.0..100.0f64,
        -10.0..10.0f64,
    )
        .prop_map(|(s, x, y, a)| Configuration::new(Vec2::new(x, y), s, a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100_000))]

    #[test]
    fn revolve_is_an_involution_and_shares_the_pivot(c in arb_config(), pick in 0usize..4, sdsd in any::<bool>()) {
        let geom = geom();
        let table = TransitionTable::prism(sdsd);
        let edges: Vec<EdgeLabel> = table.allowed_edges(c.state).map(|(e, _)| e).collect();
        let e = edges[pick % edges.len()];
        let t = table.lookup(c.state, e).unwrap();
        let n = revolve(&geom, &table, &c, e).unwrap();
        let back = revolve(&geom, &table, &n, t.arrival).unwrap();
        prop_assert!(back.approx_eq(&c, 1e-9), "{c:?} -> {n:?} -> {back:?}");

        let p = pivot_segment(&geom, &c, e).unwrap();
        let q = pivot_segment(&geom, &n, t.arrival).unwrap();
        prop_assert!(p.a().distance(q.b()) < 1e-9 && p.b().distance(q.a()) < 1e-9);

        // interiors on opposite sides of the shared edge
        prop_assert!(p.signed_distance(c.centroid) > 0.0);
        prop_assert!(p.signed_distance(n.centroid) < 0.0);

        // independent placement agrees
        let d = dims();
        let o = kin::tip(&d, &to_cfg(&c), edge_index(e), sdsd).unwrap();
        prop_assert!(kin::same_pose(&o, &to_cfg(&n), 1e-9), "{o:?} vs {n:?}");
    }
}

#[test]
fn footprints_match_the_reference_construction() {
    let g = geom();
    let d = dims();
    for s in StableState::ALL {
        let c = Configuration::new(Vec2::new(1.5, -2.0), s, 0.9);
        let ours = world_footprint(&g, &c);
        let theirs = kin::footprint(&d, &to_cfg(&c));
        for (a, b) in ours.vertices().iter().zip(&theirs) {
            assert!((a.x - b.0).abs() < 1e-12 && (a.y - b.1).abs() < 1e-12);
        }
        for &e in s.edges() {
            let (q0, q1) = canonical_edge(&g, s, e).unwrap();
            let can = kin::canonical(&d, to_st(s));
            let (i, j) = kin::edge_vertices(edge_index(e), to_st(s));
            assert!(q0.distance(Vec2::new(can[i].0, can[i].1)) < 1e-12);
            assert!(q1.distance(Vec2::new(can[j].0, can[j].1)) < 1e-12);
        }
    }
}

#[test]
fn no_transition_links_head_up_and_head_down() {
    for sdsd in [false, true] {
        let table = TransitionTable::prism(sdsd);
        for ((s, _), t) in table.entries() {
            assert!(
                !matches!((s, t.target), (StableState::Hu, StableState::Hd) | (StableState::Hd, StableState::Hu)),
                "{s} -> {}",
                t.target
            );
        }
    }
}

#[test]
fn bistate_closures_are_finite_with_four_poses() {
    use rand::{Rng, SeedableRng};
    let g = geom();
    let d = dims();
    let table = TransitionTable::default();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
    for i in 0..10 {
        let (mode, s) = if i % 2 == 0 {
            (LocomotionMode::BistateHuSd, StableState::Hu)
        } else {
            (LocomotionMode::BistateHdSd, StableState::Hd)
        };
        let start = Configuration::new(
            Vec2::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)),
            s,
            rng.random_range(-3.0..3.0),
        );
        let opts = EnumerateOptions {
            mode,
            budget: 10_000,
            ..Default::default()
        };
        let r = enumerate(&g, &table, start, &opts).unwrap().report;
        assert!(r.exhausted);
        assert_eq!(r.footprint_poses, 4);
        assert_eq!(oracle_closure(&d, to_cfg(&start), to_st(s)), 4);
    }
}

#[test]
fn tristate_keeps_growing() {
    let g = geom();
    let start = Configuration::new(Vec2::new(0.0, 0.0), StableState::Hu, 0.0);
    let opts = EnumerateOptions {
        mode: LocomotionMode::Tristate,
        budget: 10_000,
        ..Default::default()
    };
    let e = enumerate(&g, &TransitionTable::default(), start, &opts).unwrap();
    assert!(e.report.footprint_positions > 500);
    assert!(!e.report.exhausted);
    let distinct: HashSet<_> = e
        .trace
        .iter()
        .map(|t| ((t.config.centroid.x * 1e6).round() as i64, (t.config.centroid.y * 1e6).round() as i64))
        .collect();
    assert!(distinct.len() > 500);
}
