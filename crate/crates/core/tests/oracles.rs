mod common;

use chrono::Duration;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sciflow::coactivity::{build_coretweet_graph, eigenvector_centrality, CoRetweetParams};
use sciflow::graph::UndirectedGraph;
use sciflow::ingest::Corpus;

fn loose() -> CoRetweetParams {
    CoRetweetParams {
        min_user_retweets: 1,
        min_post_retweets: 1,
        ..CoRetweetParams::default()
    }
}

#[test]
fn coretweet_weights_match_dense_oracle() {
    for seed in 0..20 {
        let corpus = common::random_retweet_corpus(seed, 10);
        for params in [
            CoRetweetParams::default(),
            loose(),
            CoRetweetParams {
                include_self_retweets: true,
                window: Duration::hours(6),
                ..loose()
            },
        ] {
            let gap = common::cosine_gap(&corpus, &params).expect("node sets agree");
            assert!(gap < 1e-9, "seed {seed}: gap {gap}");
        }
    }
}

#[test]
fn centrality_matches_dense_eigenvector() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let n = 8;
        let mut w = DMatrix::<f64>::zeros(n, n);
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                // keep a spanning path so the graph is connected
                if b == a + 1 || rng.random_bool(0.5) {
                    let x = rng.random_range(0.05..1.0);
                    w[(a, b)] = x;
                    w[(b, a)] = x;
                    edges.push((a, b, x));
                }
            }
        }
        let g = UndirectedGraph::from_edges((0..n).map(|i| format!("n{i}")).collect(), edges);
        let got = eigenvector_centrality(&g, 1e-12, 100_000).unwrap();
        let eig = SymmetricEigen::new(w);
        let top = eig.eigenvalues.imax();
        let v = eig.eigenvectors.column(top).map(f64::abs);
        let max = v.max();
        for i in 0..n {
            assert!(
                (got[i] - v[i] / max).abs() < 1e-6,
                "node {i}: {} vs {}",
                got[i],
                v[i] / max
            );
        }
    }
}

fn shifted(corpus: &Corpus, by: Duration) -> Corpus {
    let posts = corpus
        .posts()
        .iter()
        .cloned()
        .map(|mut p| {
            p.timestamp += by;
            p
        })
        .collect();
    Corpus::from_records(Vec::new(), posts, Vec::new())
        .unwrap()
        .0
}

#[test]
fn graph_is_invariant_to_time_shift() {
    let corpus = common::random_retweet_corpus(3, 30);
    let base = build_coretweet_graph(&corpus, &CoRetweetParams::default()).unwrap();
    for by in [
        Duration::minutes(7),
        Duration::days(400),
        Duration::seconds(-12345),
    ] {
        let moved =
            build_coretweet_graph(&shifted(&corpus, by), &CoRetweetParams::default()).unwrap();
        assert_eq!(moved.graph, base.graph);
    }
}

#[test]
fn similarity_is_invariant_to_scaling_one_users_activity() {
    let corpus = common::random_retweet_corpus(5, 12);
    let mut posts = corpus.posts().to_vec();
    let extra: Vec<_> = posts
        .iter()
        .filter(|p| p.author_id == "u3")
        .map(|p| {
            let mut q = p.clone();
            q.post_id.push_str("-dup");
            q
        })
        .collect();
    posts.extend(extra);
    let doubled = Corpus::from_records(Vec::new(), posts, Vec::new())
        .unwrap()
        .0;
    let a = build_coretweet_graph(&corpus, &loose()).unwrap().graph;
    let b = build_coretweet_graph(&doubled, &loose()).unwrap().graph;
    assert_eq!(a.nodes(), b.nodes());
    for ((i, j, x), (k, l, y)) in a.edges().zip(b.edges()) {
        assert_eq!((i, j), (k, l));
        assert!((x - y).abs() < 1e-12);
    }
}
