use sciflow::coactivity::{
    build_coretweet_graph, eigenvector_centrality, extract_coordinated, CoRetweetParams,
    PercentileBase,
};
use sciflow::ingest::{load_corpus, LoadOptions};
use sciflow::synth::{generate, write_scenario, Scenario};

#[test]
fn written_scenario_loads_back_identically() {
    let scenario = Scenario::preset("full", 4).unwrap();
    let (corpus, truth) = generate(&scenario).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_scenario(dir.path(), &scenario, &corpus, &truth).unwrap();
    let d = dir.path();
    let (loaded, report) = load_corpus(
        &d.join("posts.jsonl"),
        &d.join("news.jsonl"),
        Some(&d.join("users.jsonl")),
        &LoadOptions::default(),
    )
    .unwrap();
    assert_eq!(report.dropped_lines, 0);
    assert_eq!(loaded, corpus);
    let again: Scenario =
        serde_json::from_str(&std::fs::read_to_string(d.join("scenario.json")).unwrap()).unwrap();
    assert_eq!(again, scenario);
}

#[test]
fn planted_clique_is_selected_as_one_subcluster() {
    let (corpus, truth) = generate(&Scenario::coordination(1)).unwrap();
    let g = build_coretweet_graph(&corpus, &CoRetweetParams::default()).unwrap();
    let c = eigenvector_centrality(&g.graph, 1e-10, 10_000).unwrap();
    let r = extract_coordinated(&g, &c, 0.02, PercentileBase::AllNodes, corpus.users()).unwrap();
    let ring = truth.ring_members();
    assert!(ring.is_subset(&r.coordinated), "selected {:?}", r.selected);
    let ids: std::collections::BTreeSet<_> = ring.iter().map(|u| r.subcluster_of(u)).collect();
    assert_eq!(ids.len(), 1);
}

#[test]
fn generation_is_seed_deterministic() {
    let a = generate(&Scenario::preset("pathways", 2).unwrap()).unwrap();
    let b = generate(&Scenario::preset("pathways", 2).unwrap()).unwrap();
    let c = generate(&Scenario::preset("pathways", 3).unwrap()).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.0, c.0);
}
