use sbm_embed::empirical::{fit_embeddings, gap_report, sample_graph, EmbeddingFit, FitOptions, SampledGraph};
use sbm_embed::{embed, Graphon};

fn quick(seed: u64) -> FitOptions<f64> {
    FitOptions {
        seed,
        epochs: 200,
        ..FitOptions::default()
    }
}

#[test]
fn identical_inputs_give_identical_fits() {
    let g = Graphon::new(0.6, 0.8, 0.4, 0.7).unwrap();
    let a = sample_graph(&g, 80, 3).unwrap();
    let b = sample_graph(&g, 80, 3).unwrap();
    assert_eq!(a, b);
    assert_eq!(fit_embeddings(&a, 3, &quick(1)).unwrap(), fit_embeddings(&b, 3, &quick(1)).unwrap());
}

#[test]
fn fitting_ignores_labels() {
    let g = Graphon::new(0.6, 0.8, 0.2, 0.7).unwrap();
    let graph = sample_graph(&g, 60, 4).unwrap();
    let mut relabeled = SampledGraph::empty(60, vec![true; 60], 0).unwrap();
    for (i, j) in graph.edges() {
        relabeled.add_edge(i, j).unwrap();
    }
    let x = fit_embeddings(&graph, 3, &quick(2)).unwrap();
    let y = fit_embeddings(&relabeled, 3, &quick(2)).unwrap();
    assert_eq!(x.vectors, y.vectors);
}

#[test]
fn gap_is_invariant_under_simultaneous_permutation() {
    let g = Graphon::new(0.5, 0.7, 0.2, 0.5).unwrap();
    let k = embed(&g).unwrap().gram;
    let graph = sample_graph(&g, 50, 5).unwrap();
    let fit = fit_embeddings(&graph, 3, &quick(3)).unwrap();
    let perm: Vec<usize> = (0..50).map(|i| (i * 17 + 3) % 50).collect();
    let pg = graph.permuted(&perm);
    let mut vectors = vec![0.0; fit.vectors.len()];
    for i in 0..50 {
        vectors[perm[i] * 3..perm[i] * 3 + 3].copy_from_slice(fit.vector(i));
    }
    let pf = EmbeddingFit { vectors, ..fit.clone() };
    let (a, b) = (gap_report(&fit, &graph, &k), gap_report(&pf, &pg, &k));
    assert!((a.gap - b.gap).abs() < 1e-12);
    assert!(a.block_gram.max_abs_diff(&b.block_gram) < 1e-12);
}

#[test]
fn doubling_epochs_never_increases_loss() {
    let graph = sample_graph(&Graphon::new(0.7, 0.9, 0.1, 0.4).unwrap(), 60, 6).unwrap();
    let short = fit_embeddings(&graph, 3, &FitOptions { epochs: 150, ..quick(4) }).unwrap();
    let long = fit_embeddings(&graph, 3, &FitOptions { epochs: 300, ..quick(4) }).unwrap();
    assert!(long.final_loss() <= short.final_loss());
    assert!(long.loss_trace.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn communities_are_distinguishable_at_moderate_size() {
    let g = Graphon::new(0.7, 0.9, 0.1, 0.4).unwrap();
    let k = embed(&g).unwrap().gram;
    let graph = sample_graph(&g, 400, 7).unwrap();
    let fit = fit_embeddings(&graph, 3, &FitOptions { epochs: 400, ..quick(5) }).unwrap();
    let rep = gap_report(&fit, &graph, &k);
    let se = rep.block_std_err[0].max(rep.block_std_err[2]);
    assert!((rep.block_gram.k1 - rep.block_gram.k3).abs() > 3.0 * se, "{rep:?}");
    assert!(rep.block_gram.k2 < 0.0);
}
