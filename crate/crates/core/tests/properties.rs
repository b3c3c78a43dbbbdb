mod oracles;

use std::collections::BTreeSet;

use movepat::clustering::{
    agglomerative, cut_dendrogram, kmeans, kmedoids, ClusterAssignment, KMeansConfig, KMedoidsConfig, Linkage,
};
use movepat::data::{SymbolicSeries, TimeSeries};
use movepat::distances::{
    distance_matrix, dtw, euclidean, levenshtein, mpbd, DistanceMatrix, MetricKind, MetricParams, MetricSpec,
    Normalization, SeriesView,
};
use movepat::evaluation::{ch_index, db_index, mpbi, ChVariant};
use proptest::prelude::*;

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig {
        cases: n,
        ..ProptestConfig::default()
    }
}

fn scaled_pair(max_len: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2..=max_len).prop_flat_map(|n| {
        (
            prop::collection::vec(0.1f64..=1.0, n),
            prop::collection::vec(0.1f64..=1.0, n),
        )
    })
}

fn int_pair(max_len: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2..=max_len).prop_flat_map(|n| {
        (
            prop::collection::vec((1i32..=5).prop_map(f64::from), n),
            prop::collection::vec((1i32..=5).prop_map(f64::from), n),
        )
    })
}

fn levels(max_len: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(1u8..=5, 0..=max_len)
}

fn points(n: std::ops::RangeInclusive<usize>, dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-10.0f64..10.0, dim), n)
}

fn euclid_matrix(points: &[Vec<f64>]) -> DistanceMatrix {
    let n = points.len();
    let data = (0..n * n)
        .map(|x| {
            let (a, b) = (&points[x / n], &points[x % n]);
            a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt()
        })
        .collect();
    let ids = (0..n).map(|i| format!("p{i:02}")).collect();
    DistanceMatrix::from_parts(
        ids,
        data,
        MetricKind::Euclidean,
        Normalization::None,
        MetricParams::default(),
    )
    .unwrap()
}

fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("p{i:02}")).collect()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

// ---- distances ----------------------------------------------------------

proptest! {
    #![proptest_config(cases(1000))]

    #[test]
    fn numeric_metrics_are_symmetric_nonnegative_and_zero_on_self((p, q) in scaled_pair(12), w in 0usize..4) {
        let metrics: [(&str, fn(&[f64], &[f64], usize) -> f64); 4] = [
            ("euclidean", |a, b, _| euclidean(a, b).unwrap()),
            ("dtw", |a, b, _| dtw(a, b, None).unwrap()),
            ("dtw-window", |a, b, w| dtw(a, b, Some(w)).unwrap()),
            ("mpbd", |a, b, _| mpbd(a, b, 2.0).unwrap()),
        ];
        for (name, f) in metrics {
            let d = f(&p, &q, w);
            prop_assert_eq!(d, f(&q, &p, w), "{} symmetric", name);
            prop_assert!(d >= 0.0, "{} non-negative", name);
            prop_assert_eq!(f(&p, &p, w), 0.0, "{} self", name);
        }
    }

    #[test]
    fn levenshtein_axioms_and_triangle(a in levels(6), b in levels(6), c in levels(6)) {
        let ab = levenshtein(&a, &b);
        prop_assert_eq!(ab, levenshtein(&b, &a));
        prop_assert_eq!(levenshtein(&a, &a), 0);
        prop_assert_eq!(ab, oracles::levenshtein_rec(&a, &b));
        prop_assert!(ab <= levenshtein(&a, &c) + levenshtein(&c, &b));
        prop_assert_eq!(ab == 0, a == b);
    }

    #[test]
    fn mpbd_matches_step_definition((p, q) in scaled_pair(12), omega in 1.0f64..4.0) {
        let got = mpbd(&p, &q, omega).unwrap();
        prop_assert!(close(got, oracles::mpbd_naive(&p, &q, omega)));
    }

    #[test]
    fn mpbd_ignores_level_shifts((p, q) in int_pair(12), s in -3i32..=3, t in -3i32..=3) {
        let shift = |x: &[f64], c: i32| x.iter().map(|v| v + f64::from(c)).collect::<Vec<_>>();
        let base = mpbd(&p, &q, 2.0).unwrap();
        prop_assert_eq!(mpbd(&shift(&p, s), &shift(&q, t), 2.0).unwrap(), base);
    }

    #[test]
    fn mpbd_is_zero_exactly_when_moves_agree((p, q) in int_pair(12), c in -3i32..=3) {
        let shifted: Vec<f64> = p.iter().map(|v| v + f64::from(c)).collect();
        prop_assert_eq!(mpbd(&p, &shifted, 2.0).unwrap(), 0.0);
        let same_moves = p.windows(2).zip(q.windows(2)).all(|(a, b)| a[0] - a[1] == b[0] - b[1]);
        prop_assert_eq!(mpbd(&p, &q, 2.0).unwrap() == 0.0, same_moves);
    }

    #[test]
    fn unconstrained_dtw_never_exceeds_euclidean((p, q) in scaled_pair(12)) {
        let free = dtw(&p, &q, None).unwrap();
        prop_assert!(free <= euclidean(&p, &q).unwrap() + 1e-12);
        prop_assert!(free <= dtw(&p, &q, Some(1)).unwrap() + 1e-12);
    }
}

#[test]
fn mpbd_triangle_inequality_counterexample() {
    // one step each: a moves +1, b moves -1, m moves +0.5 (delta = x[t] - x[t+1])
    let a = [1.0, 0.0];
    let b = [0.0, 1.0];
    let m = [0.5, 0.0];
    let ab = mpbd(&a, &b, 2.0).unwrap();
    let am = mpbd(&a, &m, 2.0).unwrap();
    let mb = mpbd(&m, &b, 2.0).unwrap();
    assert_eq!((ab, am, mb), (4.0, 0.5, 3.0));
    assert!(ab > am + mb);
}

fn collection(rows: &[Vec<f64>]) -> Vec<TimeSeries> {
    rows.iter()
        .enumerate()
        .map(|(i, r)| TimeSeries::complete(format!("s{i:02}"), r.clone()))
        .collect()
}

proptest! {
    #![proptest_config(cases(64))]

    #[test]
    fn matrices_do_not_depend_on_thread_count(
        rows in (2usize..=10).prop_flat_map(|len| prop::collection::vec(prop::collection::vec(0.1f64..=1.0, len), 2..=12))
    ) {
        let series = collection(&rows);
        let symbolic: Vec<SymbolicSeries> = series
            .iter()
            .map(|s| SymbolicSeries { id: s.id.clone(), levels: s.values.iter().map(|v| 1 + (v * 4.0) as u8).collect() })
            .collect();
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| {
                let mut out = Vec::new();
                for kind in [MetricKind::Euclidean, MetricKind::Dtw, MetricKind::Mpbd] {
                    out.push(distance_matrix(SeriesView::Numeric(&series), &MetricSpec::new(kind)).unwrap());
                }
                out.push(distance_matrix(SeriesView::Symbolic(&symbolic), &MetricSpec::new(MetricKind::Levenshtein)).unwrap());
                out.push(distance_matrix(SeriesView::Symbolic(&symbolic), &MetricSpec::new(MetricKind::Mpbd)).unwrap());
                out
            })
        };
        let one = run(1);
        let many = run(4);
        for (a, b) in one.iter().zip(&many) {
            for i in 0..a.len() {
                let (ra, rb) = (a.row(i), b.row(i));
                prop_assert!(ra.iter().zip(rb).all(|(x, y)| x.to_bits() == y.to_bits()));
            }
        }
    }
}

// ---- clustering ---------------------------------------------------------

proptest! {
    #![proptest_config(cases(1000))]

    #[test]
    fn kmeans_reaches_the_exhaustive_optimum(data in (1usize..=3).prop_flat_map(|d| points(3..=8, d)), seed in any::<u64>()) {
        let fit = kmeans(&ids(data.len()), &data, &KMeansConfig::new(2, seed)).unwrap();
        let best = oracles::exhaustive_two_means(&data);
        let got = *fit.wcss_history.last().unwrap();
        prop_assert!(got <= best * (1.0 + 1e-9) + 1e-12, "got {} best {}", got, best);
        prop_assert!(close(got, oracles::wcss_pairwise(&data, &fit.assignment.labels, 2)));
    }

    #[test]
    fn kmeans_wcss_never_increases(data in (1usize..=4).prop_flat_map(|d| points(4..=30, d)), k in 2usize..=4, seed in any::<u64>()) {
        let fit = kmeans(&ids(data.len()), &data, &KMeansConfig::new(k, seed)).unwrap();
        for w in fit.wcss_history.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0), "{:?}", fit.wcss_history);
        }
        prop_assert_eq!(fit.assignment.sizes().len(), k);
        prop_assert!(fit.assignment.sizes().iter().all(|&s| s > 0));
    }

    #[test]
    fn kmedoids_reaches_the_exhaustive_optimum(data in points(3..=6, 2), k in 2usize..=4) {
        prop_assume!(k < data.len());
        let m = euclid_matrix(&data);
        let rows: Vec<Vec<f64>> = (0..m.len()).map(|i| m.row(i).to_vec()).collect();
        let fit = kmedoids(&m, &KMedoidsConfig::new(k, 7)).unwrap();
        let best = oracles::exhaustive_medoids(&rows, k);
        prop_assert!(fit.cost <= best * (1.0 + 1e-9) + 1e-12, "got {} best {}", fit.cost, best);
    }

    #[test]
    fn heights_grow_and_cuts_nest(data in points(2..=14, 2)) {
        let m = euclid_matrix(&data);
        let n = data.len();
        for linkage in Linkage::ALL {
            let d = agglomerative(&m, linkage).unwrap();
            prop_assert_eq!(d.merges.len(), n - 1);
            for w in d.merges.windows(2) {
                prop_assert!(w[1].height >= w[0].height, "{} heights {} then {}", linkage, w[0].height, w[1].height);
            }
            let mut finer = cut_dendrogram(&d, n).unwrap();
            for k in (1..n).rev() {
                let coarser = cut_dendrogram(&d, k).unwrap();
                prop_assert_eq!(coarser.sizes().len(), k);
                for c in 1..=finer.k {
                    let labels: BTreeSet<usize> = finer.members(c).iter().map(|&i| coarser.labels[i]).collect();
                    prop_assert_eq!(labels.len(), 1, "cut {} does not refine cut {}", k + 1, k);
                }
                finer = coarser;
            }
        }
    }

    #[test]
    fn agglomerative_matches_definitional_linkages(data in points(2..=9, 2)) {
        let m = euclid_matrix(&data);
        for linkage in Linkage::ALL {
            let d = agglomerative(&m, linkage).unwrap();
            let reference = oracles::naive_linkage(&data, linkage.name());
            for (step, (merge, (height, members))) in d.merges.iter().zip(&reference).enumerate() {
                prop_assert!(close(merge.height, *height), "{} step {}: {} vs {}", linkage, step, merge.height, height);
                let cut = cut_dendrogram(&d, data.len() - step - 1).unwrap();
                let got: BTreeSet<Vec<usize>> = (1..=cut.k).map(|c| cut.members(c)).collect();
                let want: BTreeSet<Vec<usize>> = members.iter().cloned().collect();
                prop_assert_eq!(got, want);
            }
        }
    }
}

proptest! {
    #![proptest_config(cases(300))]

    #[test]
    fn agglomerative_ignores_input_order(data in points(3..=12, 2), shuffle in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let n = data.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(shuffle));
        let m = euclid_matrix(&data);
        let permuted = m.subset(&order);
        for linkage in Linkage::ALL {
            let a = agglomerative(&m, linkage).unwrap();
            let b = agglomerative(&permuted, linkage).unwrap();
            for k in 1..=n {
                prop_assert_eq!(cut_dendrogram(&a, k).unwrap().partition(), cut_dendrogram(&b, k).unwrap().partition());
            }
        }
    }
}

// ---- evaluation ---------------------------------------------------------

fn labelled(
    n: std::ops::RangeInclusive<usize>,
    dim: usize,
    k: usize,
) -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<usize>)> {
    points(n, dim)
        .prop_flat_map(move |data| {
            let n = data.len();
            (Just(data), prop::collection::vec(0..k, n))
        })
        .prop_filter("every cluster used", move |(_, g)| (0..k).all(|c| g.contains(&c)))
}

fn assignment_of(groups: &[usize], k: usize) -> ClusterAssignment {
    ClusterAssignment::from_groups(ids(groups.len()), groups, k, "test", 0).unwrap()
}

proptest! {
    #![proptest_config(cases(1000))]

    #[test]
    fn indices_match_naive_loops((data, groups) in labelled(4..=12, 2, 3)) {
        let a = assignment_of(&groups, 3);
        let l = &a.labels;
        prop_assert!(close(ch_index(&data, &a, ChVariant::Standard).unwrap(), oracles::ch_standard(&data, l, 3)));
        prop_assert!(close(ch_index(&data, &a, ChVariant::Paper).unwrap(), oracles::ch_paper(&data, l, 3)));
        prop_assert!(close(db_index(&data, &a).unwrap(), oracles::db(&data, l, 3)));
    }

    #[test]
    fn mpbi_matches_naive_loops(
        (series, groups) in (2usize..=8).prop_flat_map(|len| prop::collection::vec(prop::collection::vec((1u8..=5).prop_map(f64::from), len), 3..=10))
            .prop_flat_map(|s| { let n = s.len(); (Just(s), prop::collection::vec(0usize..2, n)) })
            .prop_filter("both clusters used", |(_, g)| g.contains(&0) && g.contains(&1)),
        omega in 1.0f64..3.0,
    ) {
        let a = assignment_of(&groups, 2);
        prop_assert!(close(mpbi(&series, &a, omega).unwrap(), oracles::mpbi(&series, &a.labels, 2, omega)));
    }

    #[test]
    fn indices_ignore_translation_and_label_names((data, groups) in labelled(4..=12, 2, 3), dx in -50.0f64..50.0, dy in -50.0f64..50.0) {
        let a = assignment_of(&groups, 3);
        let moved: Vec<Vec<f64>> = data.iter().map(|p| vec![p[0] + dx, p[1] + dy]).collect();
        // the same partition with raw labels rotated
        let rotated: Vec<usize> = groups.iter().map(|g| (g + 1) % 3).collect();
        let b = assignment_of(&rotated, 3);
        for variant in [ChVariant::Standard, ChVariant::Paper] {
            let base = ch_index(&data, &a, variant).unwrap();
            prop_assert!((ch_index(&moved, &a, variant).unwrap() - base).abs() <= 1e-6 * base.abs().max(1.0));
            prop_assert!(close(ch_index(&data, &b, variant).unwrap(), base));
        }
        let base = db_index(&data, &a).unwrap();
        prop_assert!((db_index(&moved, &a).unwrap() - base).abs() <= 1e-6 * base.max(1.0));
        prop_assert!(close(db_index(&data, &b).unwrap(), base));
    }

    #[test]
    fn ch_variants_are_reciprocal_for_equal_sizes(data in points(6..=6, 2)) {
        // three clusters of two: standard = m (n - k) / (k - 1) / paper with m = 2
        let a = assignment_of(&[0, 0, 1, 1, 2, 2], 3);
        let standard = ch_index(&data, &a, ChVariant::Standard).unwrap();
        let paper = ch_index(&data, &a, ChVariant::Paper).unwrap();
        prop_assert!(close(standard * paper, 2.0 * 3.0 / 2.0));
    }
}
