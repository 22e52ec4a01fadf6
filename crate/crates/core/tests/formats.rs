use std::path::Path;

use connotation::embeddings::{cosine, load_embeddings, nearest_neighbors, read_embeddings, EmbeddingTable};
use connotation::lexicon::{load_lexicon, read_lexicon, write_lexicon};
use connotation::{parse_polarity, validate_frame, AspectId, ConnotationFrame, Error, FrameIssue, Polarity};
use proptest::prelude::*;

use Polarity::*;

#[test]
fn polarity_tokens() {
    for (t, p) in [("+", Positive), ("-", Negative), ("=", Neutral), ("pos", Positive), ("NEG", Negative), ("neu", Neutral), ("\u{2212}", Negative)] {
        assert_eq!(parse_polarity(t).unwrap(), p, "{t}");
    }
    assert!(matches!(parse_polarity("maybe"), Err(Error::Format(_))));
    assert!(Negative < Neutral && Neutral < Positive);
}

#[test]
fn frame_validation() {
    let ok = ConnotationFrame::new("v", [Positive; 9]).with_scores([0.5; 9]);
    assert!(validate_frame(&ok).is_empty());
    let mismatch = ConnotationFrame::new("v", [Positive; 9]).with_scores([0.25; 9]);
    assert!(validate_frame(&mismatch)
        .iter()
        .all(|i| matches!(i, FrameIssue::ScoreLabelMismatch { .. })));
    let mut missing = ConnotationFrame::new("v", [Neutral; 9]);
    missing.labels.remove(&AspectId::Vt);
    assert!(validate_frame(&missing).contains(&FrameIssue::MissingAspect(AspectId::Vt)));
    let out = ConnotationFrame::new("v", [Positive; 9]).with_scores([1.5; 9]);
    assert!(validate_frame(&out)
        .iter()
        .any(|i| matches!(i, FrameIssue::ScoreOutOfRange { .. })));
}

#[test]
fn lexicon_round_trip() {
    let frames = vec![
        ConnotationFrame::new("help", [Positive, Positive, Positive, Positive, Neutral, Positive, Positive, Positive, Positive])
            .with_scores([0.9, 0.8, 0.7, 0.6, 0.0, 0.5, 0.4, 0.3, 0.26]),
        ConnotationFrame::new("hurt", [Negative, Negative, Negative, Negative, Neutral, Neutral, Positive, Negative, Neutral])
            .with_scores([-0.9, -0.8, -0.7, -0.6, 0.1, 0.2, 0.3, -0.4, 0.0]),
    ];
    let probs = vec![[[0.2, 0.3, 0.5]; 9], [[0.6, 0.3, 0.1]; 9]];
    let mut buf = Vec::new();
    write_lexicon(&mut buf, &["made by a test".to_string()], &frames, Some(&probs)).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("# made by a test\n"));
    assert!(text.contains("prob_P_wt_pos"));
    let back = read_lexicon(text.as_bytes(), Path::new("mem.tsv")).unwrap();
    assert_eq!(back, frames);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lex.tsv");
    std::fs::write(&path, "verb\tP_wt\tE_a\tnote\nsee\t=\t+\tignored\n").unwrap();
    let partial = load_lexicon(&path).unwrap();
    assert_eq!(partial[0].label(AspectId::Ea), Some(Positive));
    assert_eq!(partial[0].label(AspectId::Sa), None);
    assert!(partial[0].label_array().is_err());

    let err = read_lexicon("verb\tP_wt\nsee\t?\n".as_bytes(), Path::new("bad.tsv")).unwrap_err();
    assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    assert!(read_lexicon("word\tP_wt\n".as_bytes(), Path::new("bad.tsv")).is_err());
}

#[test]
fn embedding_text_format() {
    let text = "3 2\nhelp 0.5 0.5\nhurt -1 0\nhelp 9 9\n";
    let t = read_embeddings(text.as_bytes(), None, Path::new("e.txt")).unwrap();
    assert_eq!(t.dim(), 2);
    assert_eq!(t.len(), 2);
    assert_eq!(t.get("help").unwrap(), &[0.5, 0.5]);
    let err = read_embeddings("a 1 2\nb 1\n".as_bytes(), None, Path::new("e.txt")).unwrap_err();
    assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    let err = read_embeddings("a 1 x\n".as_bytes(), None, Path::new("e.txt")).unwrap_err();
    assert!(matches!(err, Error::Parse { line: 1, .. }));
    assert!(read_embeddings("a 1 2\n".as_bytes(), Some(3), Path::new("e.txt")).is_err());
    assert!(matches!(load_embeddings("/no/such/file", None), Err(Error::Io { .. })));
    assert!(matches!(t.lookup("absent"), Err(Error::Lookup(_))));
}

#[test]
fn neighbors_order_and_ties() {
    let t = EmbeddingTable::from_pairs(
        2,
        [
            ("q", vec![1.0, 0.0]),
            ("b", vec![2.0, 0.0]),
            ("a", vec![3.0, 0.0]),
            ("c", vec![0.0, 1.0]),
            ("z", vec![0.0, 0.0]),
        ],
    )
    .unwrap();
    let n = nearest_neighbors("q", 3, ["c", "b", "a", "z", "missing"], &t).unwrap();
    let names: Vec<&str> = n.iter().map(|(w, _)| w.as_str()).collect();
    assert_eq!(names, vec!["a", "b", "c"]);
    assert!(cosine(&[0.0, 0.0], &[1.0, 0.0]).is_err());
}

proptest! {
    #[test]
    fn cosine_symmetric_and_scale_free(
        u in prop::collection::vec(-5.0f64..5.0, 4),
        v in prop::collection::vec(-5.0f64..5.0, 4),
        s in 0.01f64..100.0,
    ) {
        prop_assume!(u.iter().any(|x| x.abs() > 1e-3) && v.iter().any(|x| x.abs() > 1e-3));
        let a = cosine(&u, &v).unwrap();
        prop_assert!((a - cosine(&v, &u).unwrap()).abs() < 1e-12);
        let su: Vec<f64> = u.iter().map(|x| x * s).collect();
        prop_assert!((a - cosine(&su, &v).unwrap()).abs() < 1e-12);
        prop_assert!((-1.0..=1.0).contains(&a));
    }
}
