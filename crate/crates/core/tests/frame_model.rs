mod common;

use std::collections::BTreeMap;

use connotation::embeddings::EmbeddingTable;
use connotation::factor_graph::{enumerate_marginals, sum_product_tree};
use connotation::frame_model::{
    agreement_weights, build_frame_graph, build_frame_graph_from_evidence, decode_frame, generate_synthetic,
    piecewise_objective, predict_frame, train_piecewise, train_piecewise_with_trace, triad_consistent,
    AspectEvidence, EvidenceMode, FrameExample, FrameFactor, FrameWeights, PiecewiseObjective, SgdConfig,
};
use connotation::maxent::{AspectModels, MaxEntModel};
use connotation::selfcheck::{max_relative_gradient_error, GRADIENT_FLOOR};
use connotation::{AspectId, Polarity};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::brute_marginals;
use Polarity::*;

const PAIRWISE: [FrameFactor; 6] = [
    FrameFactor::PvA,
    FrameFactor::PvT,
    FrameFactor::PeA,
    FrameFactor::PeT,
    FrameFactor::EsA,
    FrameFactor::EsT,
];

fn random_labels(rng: &mut impl Rng) -> [Polarity; 9] {
    let mut l = [Neutral; 9];
    for x in l.iter_mut() {
        *x = Polarity::ALL[rng.gen_range(0..3)];
    }
    l
}

fn random_weights(rng: &mut impl Rng, scale: f64) -> FrameWeights {
    let mut w = FrameWeights::zeros();
    for f in FrameFactor::all() {
        for v in w.table_mut(f) {
            *v = rng.gen_range(-scale..=scale);
        }
    }
    w
}

fn diag_and_off(t: &[f64]) -> (f64, f64) {
    let diag = (0..3).map(|c| t[c * 3 + c]).sum::<f64>() / 3.0;
    let off = (0..9).filter(|i| i % 4 != 0).map(|i| t[i]).sum::<f64>() / 6.0;
    (diag, off)
}

#[test]
fn graph_shape_and_zero_weights() {
    let preds: BTreeMap<AspectId, Polarity> = AspectId::ALL.iter().map(|&a| (a, Positive)).collect();
    let g = build_frame_graph(&preds, &FrameWeights::zeros()).unwrap();
    assert_eq!(g.variables().len(), 9);
    assert_eq!(g.factors().len(), 16);
    assert!(g.is_acyclic());
    let m = sum_product_tree(&g).unwrap();
    for p in m.marginals.values() {
        for x in p {
            assert!((x - 1.0 / 3.0).abs() < 1e-12);
        }
    }
    let mut missing = preds.clone();
    missing.remove(&AspectId::Sa);
    assert!(build_frame_graph(&missing, &FrameWeights::zeros()).is_err());
}

#[test]
fn es_diagonal_carries_effect_into_state() {
    let mut w = FrameWeights::zeros();
    for c in 0..3 {
        w.table_mut(FrameFactor::EsT)[c * 3 + c] = 4.0;
    }
    w = w.with_identity_emb(0.0);
    w.table_mut(FrameFactor::Emb(AspectId::Et))[2 * 3 + 2] = 6.0;
    let mut labels = [Neutral; 9];
    labels[AspectId::Et.index()] = Positive;
    let g = build_frame_graph_from_evidence(&AspectEvidence::from_labels(labels), &w).unwrap();
    let oracle = brute_marginals(&g);
    let st = oracle[AspectId::St.index()];
    assert!(st[2] > 0.8, "{st:?}");
    let m = sum_product_tree(&g).unwrap();
    let got = m.get("S_t").unwrap();
    for x in 0..3 {
        assert!((got[x] - st[x]).abs() < 1e-9);
    }
}

#[test]
fn zero_epochs_keep_zero_weights() {
    let data = generate_synthetic(&agreement_weights(1.0), 20, 3, 0.1).unwrap();
    let cfg = SgdConfig {
        epochs: 0,
        ..SgdConfig::default()
    };
    assert_eq!(train_piecewise(&data, &cfg).unwrap(), FrameWeights::zeros());
    assert!(train_piecewise(&[], &SgdConfig::default()).is_err());
}

#[test]
fn equal_effect_and_state_learns_diagonal() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let data: Vec<FrameExample> = (0..120)
        .map(|i| {
            let mut gold = random_labels(&mut rng);
            gold[AspectId::Sa.index()] = gold[AspectId::Ea.index()];
            FrameExample {
                verb: format!("v{i}"),
                gold,
                evidence: AspectEvidence::from_labels(gold),
            }
        })
        .collect();
    let w = train_piecewise(&data, &SgdConfig::default()).unwrap();
    let t = w.table(FrameFactor::EsA);
    let min_diag = (0..3).map(|c| t[c * 3 + c]).fold(f64::INFINITY, f64::min);
    let max_off = (0..9).filter(|i| i % 4 != 0).map(|i| t[i]).fold(f64::NEG_INFINITY, f64::max);
    assert!(min_diag > max_off, "{t:?}");
}

#[test]
fn learned_weights_show_expected_tendencies() {
    let data = generate_synthetic(&agreement_weights(2.0), 600, 21, 0.2).unwrap();
    let w = train_piecewise(&data, &SgdConfig::default()).unwrap();
    for f in PAIRWISE {
        let (diag, off) = diag_and_off(w.table(f));
        assert!(diag > off, "{}: diag {diag} off {off}", f.name());
    }
    let mut consistent = Vec::new();
    let mut inconsistent = Vec::new();
    for wt in Polarity::ALL {
        for wa in Polarity::ALL {
            for at in Polarity::ALL {
                match triad_consistent(wt, wa, at) {
                    Some(true) => consistent.push(w.get_pt(wt, wa, at)),
                    Some(false) => inconsistent.push(w.get_pt(wt, wa, at)),
                    None => {}
                }
            }
        }
    }
    let lo = consistent.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = inconsistent.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!(lo > hi, "consistent {consistent:?} inconsistent {inconsistent:?}");
    // unary tables favor agreeing with the aspect-level label
    for a in AspectId::ALL {
        let (diag, off) = diag_and_off(w.table(FrameFactor::Emb(a)));
        assert!(diag > off, "{a}");
    }
}

#[test]
fn full_batch_objective_never_drops() {
    let data = generate_synthetic(&agreement_weights(1.5), 200, 2, 0.2).unwrap();
    let cfg = SgdConfig {
        learning_rate: 0.05,
        epochs: 60,
        full_batch: true,
        ..SgdConfig::default()
    };
    let (w, trace) = train_piecewise_with_trace(&data, &cfg).unwrap();
    let start = piecewise_objective(&FrameWeights::zeros(), &data, cfg.l2);
    assert!(trace[0] >= start);
    for p in trace.windows(2) {
        assert!(p[1] >= p[0] - 1e-12, "{} -> {}", p[0], p[1]);
    }
    assert!(w.is_finite());
}

#[test]
fn piecewise_gradients_match_finite_differences() {
    let data = generate_synthetic(&agreement_weights(1.0), 50, 9, 0.3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for f in FrameFactor::all() {
        let obj = PiecewiseObjective {
            factor: f,
            data: &data,
            l2: 0.1,
        };
        for _ in 0..3 {
            let x: Vec<f64> = (0..f.n_params()).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let err = max_relative_gradient_error(|t| obj.value_and_gradient(t), &x, 1e-5, GRADIENT_FLOOR);
            assert!(err < 1e-4, "{}: {err}", f.name());
        }
    }
}

#[test]
fn sgd_is_deterministic() {
    let data = generate_synthetic(&agreement_weights(1.0), 80, 4, 0.2).unwrap();
    let a = train_piecewise(&data, &SgdConfig::default()).unwrap();
    let b = train_piecewise(&data, &SgdConfig::default()).unwrap();
    assert_eq!(a, b);
    let c = train_piecewise(
        &data,
        &SgdConfig {
            seed: 99,
            ..SgdConfig::default()
        },
    )
    .unwrap();
    assert_ne!(a, c);
}

#[test]
fn synthetic_generator_contract() {
    let w = agreement_weights(2.0);
    let clean = generate_synthetic(&w, 100, 5, 0.0).unwrap();
    assert!(clean.iter().all(|e| e.evidence.labels() == e.gold));
    assert_eq!(clean, generate_synthetic(&w, 100, 5, 0.0).unwrap());
    assert!(generate_synthetic(&w, 10, 5, 1.5).is_err());
    let agree = clean
        .iter()
        .filter(|e| e.gold[AspectId::St.index()] == e.gold[AspectId::Et.index()])
        .count();
    assert!(agree as f64 / 100.0 > 1.0 / 3.0, "{agree}");
    let noisy = generate_synthetic(&w, 400, 5, 1.0).unwrap();
    assert!(noisy
        .iter()
        .all(|e| e.evidence.labels().iter().zip(&e.gold).all(|(p, g)| p != g)));
}

#[test]
fn decode_matches_enumeration_on_synthetic_verbs() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let w = random_weights(&mut rng, 2.0);
    for ex in generate_synthetic(&agreement_weights(1.0), 10, 6, 0.2).unwrap() {
        let d = decode_frame(&ex.evidence, &w).unwrap();
        let g = build_frame_graph_from_evidence(&ex.evidence, &w).unwrap();
        let oracle = enumerate_marginals(&g).unwrap();
        for a in AspectId::ALL {
            let m = oracle.get(a.name()).unwrap();
            assert_eq!(d.labels[a.index()], Polarity::argmax(m));
            assert!((d.scores[a.index()] - (m[2] - m[0])).abs() < 1e-9);
        }
    }
}

fn constant_models(dim: usize, favored: [Polarity; 9]) -> AspectModels {
    let models = AspectId::ALL
        .iter()
        .map(|&a| {
            let mut m = MaxEntModel::zeros(a, dim);
            let row = favored[a.index()].index();
            m.weights[row * (dim + 1) + dim] = 2.0;
            m
        })
        .collect();
    AspectModels::new(models).unwrap()
}

#[test]
fn predict_frame_degenerate_and_identity_cases() {
    let table = EmbeddingTable::from_pairs(2, [("accuse", vec![0.3, -0.4])]).unwrap();
    let favored = [Positive, Negative, Neutral, Positive, Negative, Neutral, Positive, Negative, Neutral];
    let models = constant_models(2, favored);
    let zero = predict_frame("accuse", &models, &table, &FrameWeights::zeros(), EvidenceMode::Hard).unwrap();
    assert_eq!(zero.label_array().unwrap(), [Negative; 9]);
    for a in AspectId::ALL {
        assert_eq!(zero.score(a), Some(0.0));
    }
    let ident = FrameWeights::zeros().with_identity_emb(5.0);
    for mode in [EvidenceMode::Hard, EvidenceMode::Soft] {
        let f = predict_frame("accuse", &models, &table, &ident, mode).unwrap();
        assert_eq!(f.label_array().unwrap(), favored);
    }
    assert!(predict_frame("absent", &models, &table, &ident, EvidenceMode::Hard).is_err());
}

#[test]
fn weights_text_and_csv() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let w = random_weights(&mut rng, 3.0);
    let text = w.to_text(&["made in a test".to_string()]);
    let back = FrameWeights::read_text(text.as_bytes(), std::path::Path::new("mem")).unwrap();
    assert_eq!(w, back);
    let truncated: String = text.lines().take(40).map(|l| format!("{l}\n")).collect();
    assert!(FrameWeights::read_text(truncated.as_bytes(), std::path::Path::new("mem")).is_err());
    let csv = w.to_csv();
    assert!(csv.starts_with("table,row_axis,col_axis,row,-,=,+"));
    // 9 unary + 6 pairwise tables of 3 rows, plus 3 slices of 3 rows for the triple
    assert_eq!(csv.lines().count(), 1 + 15 * 3 + 9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn frame_graph_always_a_tree(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels = random_labels(&mut rng);
        let w = random_weights(&mut rng, 2.0);
        let g = build_frame_graph_from_evidence(&AspectEvidence::from_labels(labels), &w).unwrap();
        prop_assert_eq!(g.variables().len(), 9);
        prop_assert_eq!(g.factors().len(), 16);
        prop_assert!(g.is_acyclic());
    }

    #[test]
    fn strong_identity_evidence_is_reproduced(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels = random_labels(&mut rng);
        let ev = AspectEvidence::from_labels(labels);
        let w = FrameWeights::zeros().with_identity_emb(5.0);
        let d = decode_frame(&ev, &w).unwrap();
        prop_assert_eq!(d.labels, labels);
        let g = build_frame_graph_from_evidence(&ev, &w).unwrap();
        let oracle = brute_marginals(&g);
        for a in AspectId::ALL {
            prop_assert_eq!(Polarity::argmax(&oracle[a.index()]), labels[a.index()]);
        }
    }
}
