use std::collections::{HashMap, VecDeque};
use std::sync::OnceLock;

use proptest::prelude::*;

use coarsesep::groups::{enumerate, BallModel, Element, GroupModel, SubgroupSpec};
use coarsesep::{FiniteMetricSpace, PointId, SubsetMask};

fn z2() -> &'static BallModel {
    static B: OnceLock<BallModel> = OnceLock::new();
    B.get_or_init(|| BallModel::build(&GroupModel::FreeAbelian(2), 6).unwrap())
}

fn f2() -> &'static BallModel {
    static B: OnceLock<BallModel> = OnceLock::new();
    B.get_or_init(|| BallModel::build(&GroupModel::Free(2), 5).unwrap())
}

fn product() -> &'static BallModel {
    static B: OnceLock<BallModel> = OnceLock::new();
    B.get_or_init(|| {
        BallModel::build(
            &GroupModel::DirectProduct(vec![GroupModel::Free(2), GroupModel::FreeAbelian(1)]),
            4,
        )
        .unwrap()
    })
}

fn free_product() -> &'static BallModel {
    static B: OnceLock<BallModel> = OnceLock::new();
    B.get_or_init(|| {
        BallModel::build(
            &GroupModel::FreeProduct(vec![GroupModel::FreeAbelian(1), GroupModel::FreeAbelian(1)]),
            5,
        )
        .unwrap()
    })
}

fn models() -> [&'static BallModel; 4] {
    [z2(), f2(), product(), free_product()]
}

/// Distances from the identity in the Cayley graph, found by BFS over
/// right multiplication by generators.
fn cayley_bfs(model: &GroupModel, radius: u32) -> HashMap<Element, u32> {
    let gens = model.symmetric_generators();
    let mut dist = HashMap::from([(model.identity(), 0)]);
    let mut q = VecDeque::from([model.identity()]);
    while let Some(g) = q.pop_front() {
        let d = dist[&g];
        if d == radius {
            continue;
        }
        for s in &gens {
            let h = model.multiply(&g, s);
            if !dist.contains_key(&h) {
                dist.insert(h.clone(), d + 1);
                q.push_back(h);
            }
        }
    }
    dist
}

fn mask(n: usize, bits: &[bool]) -> SubsetMask {
    SubsetMask::from_predicate(n, |i| bits[i as usize % bits.len()])
}

#[test]
fn ball_sizes_match_closed_forms() {
    for r in 1..=30 {
        assert_eq!(
            BallModel::build(&GroupModel::FreeAbelian(1), r).unwrap().len(),
            2 * r as usize + 1
        );
    }
    for k in 2..=3usize {
        for r in 1..=5u32 {
            let b = BallModel::build(&GroupModel::Free(k), r).unwrap();
            let q = 2 * k - 1;
            assert_eq!(b.len(), 1 + 2 * k * (q.pow(r) - 1) / (2 * k - 2), "F_{k} radius {r}");
            let sizes = b.model.sphere_sizes(r, u64::MAX);
            for (s, &n) in sizes.iter().enumerate().skip(1) {
                assert_eq!(n as usize, 2 * k * q.pow(s as u32 - 1));
            }
        }
    }
}

#[test]
fn word_length_is_cayley_distance() {
    for b in models() {
        let bfs = cayley_bfs(&b.model, b.radius);
        assert_eq!(bfs.len(), b.len(), "{}", b.model.name());
        for (g, d) in &bfs {
            let id = b.id_of(g).expect("BFS element inside the ball");
            assert_eq!(b.space().level(id), *d);
            assert_eq!(b.model.word_length(g), *d as u64);
        }
    }
}

#[test]
fn enumeration_is_sorted_by_length() {
    let all = enumerate(&GroupModel::Free(2), 3);
    assert_eq!(all.len(), 53);
    let lens: Vec<u64> = all.iter().map(|g| GroupModel::Free(2).word_length(g)).collect();
    assert!(lens.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn f2_metric_triangle_inequality_exhaustive() {
    let s = f2().space();
    let n = s.len() as PointId;
    for x in 0..n {
        assert_eq!(s.distance(x, x), 0);
        for y in 0..n {
            let dxy = s.distance(x, y);
            assert_eq!(dxy, s.distance(y, x));
            for z in (0..n).step_by(7) {
                assert!(dxy <= s.distance(x, z) + s.distance(z, y));
            }
        }
    }
}

#[test]
fn subgroup_traces_are_closed_under_their_generators() {
    let cases: [(&BallModel, SubgroupSpec); 4] = [
        (z2(), SubgroupSpec::Axis(0)),
        (z2(), SubgroupSpec::Sublattice(2)),
        (f2(), SubgroupSpec::Axis(0)),
        (product(), SubgroupSpec::Factor(1)),
    ];
    for (b, spec) in cases {
        let trace = b.subgroup_trace(&spec).unwrap();
        assert!(!trace.is_empty());
        for g in spec.generators(&b.model).unwrap() {
            let gi = b.model.inverse(&g);
            for x in trace.ids() {
                for h in [&g, &gi] {
                    if let Some(y) = b.act(h, x) {
                        assert!(trace.contains(y), "{}: {:?}", b.model.name(), spec);
                    }
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn normal_forms_round_trip(m in 0usize..4, i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>()) {
        let b = models()[m];
        let g = b.element(i.index(b.len()) as PointId);
        let h = b.element(j.index(b.len()) as PointId);
        let gh = b.model.multiply(g, h);
        let len = b.model.word_length(&gh);
        prop_assert!(len <= b.model.word_length(g) + b.model.word_length(h));
        if let Some(id) = b.id_of(&gh) {
            prop_assert_eq!(b.element(id), &gh);
            prop_assert_eq!(b.space().level(id) as u64, len);
        } else {
            prop_assert!(len > b.radius as u64);
        }
        prop_assert_eq!(b.model.multiply(g, &b.model.inverse(g)), b.model.identity());
        let ghi = b.model.multiply(&gh, &b.model.inverse(h));
        prop_assert_eq!(&ghi, g);
        if m == 1 {
            prop_assert_eq!(b.model.parse_word(&b.model.format(g)).unwrap(), g.clone());
        }
    }

    #[test]
    fn partial_action_is_isometric(m in 0usize..4, gi in any::<prop::sample::Index>(), xi in any::<prop::sample::Index>(), yi in any::<prop::sample::Index>()) {
        let b = models()[m];
        let n = b.len();
        let g = b.element(gi.index(n) as PointId).clone();
        let (x, y) = (xi.index(n) as PointId, yi.index(n) as PointId);
        if let (Some(gx), Some(gy)) = (b.act(&g, x), b.act(&g, y)) {
            prop_assert_eq!(b.space().distance(gx, gy), b.space().distance(x, y));
        }
        prop_assert_eq!(b.space().distance(x, y) as u64, b.model.distance(b.element(x), b.element(y)));
    }

    #[test]
    fn nested_neighborhoods(m in 0usize..4, bits in prop::collection::vec(prop::bool::weighted(0.05), 1..64), a in 0u32..4, c in 0u32..4) {
        let b = models()[m];
        let s: &FiniteMetricSpace = b.space();
        let set = mask(s.len(), &bits);
        prop_assume!(!set.is_empty());
        let two = s.neighborhood(&s.neighborhood(&set, a).unwrap(), c).unwrap();
        let one = s.neighborhood(&set, a + c).unwrap();
        prop_assert!(two.is_subset(&one));
        // Graph metrics on a ball: equality away from the boundary shell.
        let inner = s.level_ball(s.window_radius().saturating_sub(a + c));
        prop_assert_eq!(two.intersection(&inner), one.intersection(&inner));
        prop_assert!(set.is_subset(&one));
    }

    #[test]
    fn hausdorff_is_a_pseudometric(
        p in prop::collection::vec(prop::bool::weighted(0.1), 1..40),
        q in prop::collection::vec(prop::bool::weighted(0.1), 1..40),
        r in prop::collection::vec(prop::bool::weighted(0.1), 1..40),
    ) {
        let s = z2().space();
        let (a, b, c) = (mask(s.len(), &p), mask(s.len(), &q), mask(s.len(), &r));
        prop_assume!(!a.is_empty() && !b.is_empty() && !c.is_empty());
        let d = |x: &SubsetMask, y: &SubsetMask| s.hausdorff_distance(x, y).unwrap();
        prop_assert_eq!(d(&a, &a), 0);
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
        let brute = {
            let one = |x: &SubsetMask, y: &SubsetMask| x.ids().map(|i| y.ids().map(|j| s.distance(i, j)).min().unwrap()).max().unwrap();
            one(&a, &b).max(one(&b, &a))
        };
        prop_assert_eq!(d(&a, &b), brute);
    }

    #[test]
    fn mask_boolean_algebra(p in prop::collection::vec(any::<bool>(), 130), q in prop::collection::vec(any::<bool>(), 130)) {
        let n = 130;
        let (a, b) = (mask(n, &p), mask(n, &q));
        for i in 0..n as PointId {
            let (x, y) = (p[i as usize], q[i as usize]);
            prop_assert_eq!(a.union(&b).contains(i), x || y);
            prop_assert_eq!(a.intersection(&b).contains(i), x && y);
            prop_assert_eq!(a.difference(&b).contains(i), x && !y);
            prop_assert_eq!(a.symmetric_difference(&b).contains(i), x != y);
            prop_assert_eq!(a.complement().contains(i), !x);
        }
        prop_assert_eq!(a.complement().count() + a.count(), n);
        prop_assert!(a.complement().ids().all(|i| (i as usize) < n));
        prop_assert_eq!(a.is_disjoint(&b), a.intersection(&b).is_empty());
        prop_assert_eq!(a.is_subset(&b), a.difference(&b).is_empty());
    }
}
