use graphing_core::families::{delete_edge, make_cycle_rotation, make_finite_graph};
use graphing_core::sampling::chunk_rng;
use graphing_core::space::wrap_unit;
use graphing_core::{ball, compact_distance, min_displacement_iso, Graphing, Point};
use rand::Rng;

const ALPHA: f64 = 0.6180339887;

fn c_alpha_cut() -> Graphing {
    let g = make_cycle_rotation(ALPHA).unwrap();
    delete_edge(&g, Point::new(0.0), Point::new(ALPHA)).unwrap()
}

/// Points near each other and near the special orbit, so that the metric
/// sees both short and long witnesses.
fn sample(rng: &mut impl Rng) -> Point {
    match rng.gen_range(0..3) {
        0 => Point::new(rng.gen()),
        1 => Point::new(wrap_unit(-(rng.gen_range(0..12) as f64) * ALPHA)),
        _ => Point::new(wrap_unit(0.3 + rng.gen_range(-0.05..0.05))),
    }
}

#[test]
fn symmetry_bounds_and_triangle_inequality() {
    let g = c_alpha_cut();
    let mut rng = chunk_rng(17, 0);
    for _ in 0..300 {
        let (x, y, z) = (sample(&mut rng), sample(&mut rng), sample(&mut rng));
        let xy = compact_distance(&g, x, y, 32).unwrap();
        let yx = compact_distance(&g, y, x, 32).unwrap();
        assert_eq!(xy.value_upper, yx.value_upper);
        assert_eq!(xy.value_lower, yx.value_lower);
        let d0 = g.space().d0(&x, &y);
        assert!(xy.value_lower >= d0.min(xy.value_upper) - 1e-12 || !xy.resolved);
        assert!(xy.value_upper <= 1.0);
        let (Some(a), Some(b), Some(c)) = (
            xy.value(),
            compact_distance(&g, y, z, 32).unwrap().value(),
            compact_distance(&g, x, z, 32).unwrap().value(),
        ) else {
            continue;
        };
        assert!(d0 <= a + 1e-12);
        assert!(c <= a + b + 1e-9, "{x:?} {y:?} {z:?}: {c} > {a} + {b}");
    }
}

#[test]
fn minimum_displacement_grows_with_radius() {
    let g = c_alpha_cut();
    let mut rng = chunk_rng(3, 0);
    for _ in 0..200 {
        let (x, y) = (sample(&mut rng), sample(&mut rng));
        let mut last = 0.0;
        for r in 0..12 {
            let m = min_displacement_iso(g.space(), &ball(&g, x, r).unwrap(), &ball(&g, y, r).unwrap()).unwrap();
            let Some(iso) = m else { break };
            assert!(iso.displacement >= last);
            last = iso.displacement;
        }
    }
}

#[test]
fn resolved_values_are_stable_in_the_radius_cap() {
    let g = c_alpha_cut();
    let mut rng = chunk_rng(5, 0);
    for _ in 0..200 {
        let (x, y) = (sample(&mut rng), sample(&mut rng));
        let d = compact_distance(&g, x, y, 24).unwrap();
        if d.resolved {
            assert_eq!(compact_distance(&g, x, y, 34).unwrap(), d);
        }
    }
}

#[test]
fn lifted_path_law_against_orbit_enumeration() {
    let g = c_alpha_cut();
    for k in 1..=12u32 {
        let u = wrap_unit(-f64::from(k) * ALPHA);
        for a in [0.01, 0.05, 0.2] {
            let z = wrap_unit(u + a);
            // oracle: B(u_k, r) is a full two-sided path for r <= k (u_0 sits on
            // its boundary) and one node short at r = k + 1
            let oracle = (0..=k).map(|r| (1.0 / f64::from(r + 1)).max(a)).fold(1.0, f64::min);
            let d = compact_distance(&g, Point::new(u), Point::new(z), 32).unwrap();
            assert!(d.resolved);
            assert!((d.value_upper - oracle).abs() <= 1e-9, "k={k} a={a}: {d:?} vs {oracle}");
        }
    }
}

#[test]
fn finite_graph_edges_are_at_distance_one() {
    let g = make_finite_graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
    for (a, b) in [(0, 1), (1, 2), (2, 3), (3, 0)] {
        let d = compact_distance(&g, Point::atom(a), Point::atom(b), 16).unwrap();
        assert_eq!(d.value(), Some(1.0));
    }
}
