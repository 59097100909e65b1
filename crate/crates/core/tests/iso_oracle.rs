use graphing_core::{enumerate_isos, iso_exists, min_displacement_iso, GroundSpace, Point, RootedBall};
use proptest::prelude::*;

/// Every root-preserving bijection checked one by one.
fn brute_force(space: &GroundSpace, a: &RootedBall, b: &RootedBall) -> (usize, Option<f64>) {
    let n = a.len();
    if b.len() != n {
        return (0, None);
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let (mut count, mut best) = (0, None::<f64>);
    permute(&mut perm, 0, &mut |p| {
        if p[a.root] != b.root {
            return;
        }
        let edges_ok = (0..n).all(|i| (0..n).all(|j| a.is_adjacent(i, j) == b.is_adjacent(p[i], p[j])));
        if edges_ok {
            count += 1;
            let d = (0..n).map(|i| space.d0(&a.nodes[i], &b.nodes[p[i]])).fold(0.0, f64::max);
            best = Some(best.map_or(d, |x| x.min(d)));
        }
    });
    (count, best)
}

fn permute(p: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        visit(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, visit);
        p.swap(k, i);
    }
}

fn connected_ball(parents: &[usize], extra: &[(usize, usize)], coords: &[f64]) -> RootedBall {
    let n = coords.len();
    let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (parents[i - 1] % i, i)).collect();
    edges.extend(extra.iter().map(|&(a, b)| (a % n, b % n)).filter(|(a, b)| a != b));
    let nodes = coords.iter().map(|&c| Point::new(c)).collect();
    RootedBall::from_edges(nodes, 0, &edges, n as u32).unwrap()
}

fn ball_strategy() -> impl Strategy<Value = RootedBall> {
    (1usize..=7)
        .prop_flat_map(|n| {
            (
                proptest::collection::vec(0usize..64, n - 1),
                proptest::collection::vec((0usize..64, 0usize..64), 0..4),
                proptest::collection::vec(0.0f64..1.0, n),
            )
        })
        .prop_map(|(p, e, c)| connected_ball(&p, &e, &c))
}

/// A relabelled copy with jittered coordinates; the root keeps index 0.
fn scrambled(b: &RootedBall, seed: &[usize], jitter: &[f64]) -> RootedBall {
    let n = b.len();
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (2..n).rev() {
        perm.swap(i, 1 + seed[i % seed.len()] % i);
    }
    let mut out = b.relabel(&perm);
    for (k, node) in out.nodes.iter_mut().enumerate() {
        node.coord = (node.coord + jitter[k % jitter.len()]).rem_euclid(1.0);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn min_displacement_matches_brute_force(
        a in ball_strategy(),
        seed in proptest::collection::vec(0usize..1000, 1..8),
        jitter in proptest::collection::vec(-0.2f64..0.2, 1..8),
    ) {
        let space = GroundSpace::Circle;
        let b = scrambled(&a, &seed, &jitter);
        let (count, best) = brute_force(&space, &a, &b);
        let found = min_displacement_iso(&space, &a, &b).unwrap();
        prop_assert_eq!(found.is_some(), best.is_some());
        if let (Some(iso), Some(best)) = (found, best) {
            prop_assert!(iso.is_valid_for(&a, &b));
            prop_assert!((iso.displacement - best).abs() <= 1e-12);
            let recomputed = graphing_core::NeighborhoodIso::measure(&space, &a, &b, &iso.mapping);
            prop_assert!((recomputed - iso.displacement).abs() <= 1e-12);
        }
        let (all, truncated) = enumerate_isos(&space, &a, &b, 10_000).unwrap();
        prop_assert!(!truncated);
        prop_assert_eq!(all.len(), count);
        prop_assert!(iso_exists(&a, &b).unwrap());
    }

    #[test]
    fn unrelated_balls_agree_with_brute_force(a in ball_strategy(), b in ball_strategy()) {
        let space = GroundSpace::Interval;
        let (count, best) = brute_force(&space, &a, &b);
        let ra = RootedBall { radius: 8, ..a.clone() };
        let rb = RootedBall { radius: 8, ..b.clone() };
        prop_assert_eq!(iso_exists(&ra, &rb).unwrap(), count > 0);
        let found = min_displacement_iso(&space, &ra, &rb).unwrap().map(|i| i.displacement);
        match (found, best) {
            (Some(x), Some(y)) => prop_assert!((x - y).abs() <= 1e-12),
            (None, None) => {}
            other => prop_assert!(false, "mismatch {:?}", other),
        }
    }

    #[test]
    fn canonical_keys_separate_exactly_the_isomorphism_classes(a in ball_strategy(), b in ball_strategy()) {
        let ra = RootedBall { radius: 8, ..a.clone() };
        let rb = RootedBall { radius: 8, ..b.clone() };
        let same_key = graphing_core::canonical_key(&ra) == graphing_core::canonical_key(&rb);
        prop_assert_eq!(same_key, brute_force(&GroundSpace::Circle, &ra, &rb).0 > 0);
    }
}
