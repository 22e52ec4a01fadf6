use std::collections::HashMap;
use std::io::Write;

use connotation::corpus::{
    accumulate_pairs, entity_pair_score, finish_pair, leaning_contrast, load_tuples, load_word_polarities,
    phrase_contains, subjectivity_composition, verb_scores, Leaning, LeaningMap, PairAccumulator, PairQuery, Role,
    SvoTuple, TupleReader, Weighting,
};
use connotation::{AspectId, ConnotationFrame, Error, Polarity};
use proptest::prelude::*;

fn t(source: &str, subject: &str, verb: &str, object: &str, count: u64) -> SvoTuple {
    SvoTuple {
        source: source.into(),
        subject: subject.into(),
        verb: verb.into(),
        object: object.into(),
        count,
    }
}

fn ok(v: Vec<SvoTuple>) -> impl Iterator<Item = connotation::Result<SvoTuple>> {
    v.into_iter().map(Ok)
}

fn scores() -> HashMap<String, f64> {
    [("praise", 1.0), ("attack", -1.0), ("meet", 0.0), ("help", 0.6)]
        .iter()
        .map(|(v, s)| (v.to_string(), *s))
        .collect()
}

#[test]
fn reader_skips_malformed_lines() {
    let text = "a\tx\tpraise\ty\t3\nb\tx\tattack\ty\t0\n# note\n\nc\tx\t\ty\t2\nd\tx\tmeet\ty\t1\te\nf\tp q\thelp\tr s\t7\n";
    let mut r = TupleReader::new(text.as_bytes(), "mem");
    let got: Vec<SvoTuple> = r.by_ref().map(|x| x.unwrap()).collect();
    assert_eq!(got.len(), 2);
    assert_eq!(got[1], t("f", "p q", "help", "r s", 7));
    assert_eq!(r.malformed(), 3);
    assert!(matches!(load_tuples("/nonexistent/tuples.tsv"), Err(Error::Io { .. })));
}

#[test]
fn weighted_mean_fixtures() {
    let one = entity_pair_score("obama", "", ok(vec![t("s", "obama", "praise", "x", 4)]), &scores()).unwrap();
    assert_eq!(one.score, 1.0);
    assert_eq!(one.support, 4);
    let two = vec![t("s", "the democrats", "praise", "x", 3), t("s", "democrats", "attack", "y", 1)];
    let r = entity_pair_score("democrats", "", ok(two), &scores()).unwrap();
    assert!((r.score - 0.5).abs() < 1e-12);
    assert_eq!(r.support, 4);
    let mixed = vec![
        t("s", "Democrats in Congress", "help", "the Republican party", 2),
        t("s", "democrats", "praise", "republican voters", 1),
        t("s", "democrats", "unknownverb", "republican voters", 5),
        t("s", "democrats", "attack", "obama", 9),
    ];
    let r = entity_pair_score("democrats", "republican", ok(mixed), &scores()).unwrap();
    assert!((r.score - (2.0 * 0.6 + 1.0) / 3.0).abs() < 1e-12);
    assert_eq!(r.skipped, 1);
    let none = entity_pair_score("nobody", "", ok(vec![t("s", "obama", "praise", "x", 1)]), &scores());
    assert!(matches!(none, Err(Error::Undefined(_))));
}

#[test]
fn token_containment() {
    let pat = |s: &str| s.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>();
    assert!(phrase_contains("the democrats in congress", &pat("democrats")));
    assert!(phrase_contains("The Republican Party", &pat("republican party")));
    assert!(!phrase_contains("democratsx", &pat("democrats")));
    assert!(!phrase_contains("party republican", &pat("republican party")));
    let q = PairQuery::new("", "x");
    assert!(!q.matches(&t("s", "a", "praise", "x", 1)));
}

#[test]
fn unweighted_mode_counts_tuples_once() {
    let q = PairQuery::new("a", "");
    let tuples = vec![t("s", "a", "praise", "x", 3), t("s", "a", "attack", "y", 1)];
    let acc = accumulate_pairs(std::slice::from_ref(&q), ok(tuples), &scores(), Weighting::Unweighted).unwrap();
    let row = finish_pair(&q, &acc[0]).unwrap();
    assert!(row.score.abs() < 1e-12);
    assert_eq!(row.support, 4);
}

#[test]
fn labels_stand_in_for_missing_scores() {
    let mut f = ConnotationFrame::new("hurt", [Polarity::Neutral; 9]);
    f.labels.insert(AspectId::PAt, Polarity::Negative);
    let g = ConnotationFrame::new("help", [Polarity::Positive; 9]).with_scores([0.7; 9]);
    let s = verb_scores(&[f, g], AspectId::PAt);
    assert_eq!(s["hurt"], -1.0);
    assert_eq!(s["help"], 0.7);
}

#[test]
fn leaning_contrast_ranks_by_count() {
    let mut lean = LeaningMap::default();
    lean.insert("left.example", Leaning::Left);
    lean.insert("right.example", Leaning::Right);
    let tuples = vec![
        t("left.example", "critics", "attack", "Obama", 6),
        t("left.example", "they", "attack", "obama", 2),
        t("left.example", "senators", "attack", "the bill", 5),
        t("left.example", "x", "attack", "allies", 5),
        t("right.example", "critics", "attack", "democrats", 40),
        t("other.example", "critics", "attack", "zeta", 99),
        t("left.example", "critics", "praise", "obama", 50),
    ];
    let top = leaning_contrast("attack", Role::Theme, Leaning::Left, &lean, ok(tuples.clone()), 10).unwrap();
    assert_eq!(top[0], ("obama".to_string(), 8));
    assert_eq!(top[1], ("allies".to_string(), 5));
    assert_eq!(top[2], ("the bill".to_string(), 5));
    assert_eq!(top.len(), 3);
    let right = leaning_contrast("attack", Role::Theme, Leaning::Right, &lean, ok(tuples.clone()), 1).unwrap();
    assert_eq!(right, vec![("democrats".to_string(), 40)]);
    assert!(leaning_contrast("absent", Role::Agent, Leaning::Left, &lean, ok(tuples.clone()), 3)
        .unwrap()
        .is_empty());
    let empty = LeaningMap::default();
    assert!(leaning_contrast("attack", Role::Agent, Leaning::Left, &empty, ok(tuples), 3)
        .unwrap()
        .is_empty());
}

#[test]
fn subjectivity_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("words.tsv");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "# word list").unwrap();
    writeln!(f, "hero\t+").unwrap();
    writeln!(f, "victim\t=").unwrap();
    writeln!(f, "villain\t-").unwrap();
    drop(f);
    let words = load_word_polarities(&path).unwrap();
    let tuples = vec![
        t("s", "the brave hero", "suffer", "x", 64),
        t("s", "a victim", "suffer", "x", 20),
        t("s", "villain", "suffer", "x", 10),
        t("s", "the crowd", "suffer", "x", 6),
        t("s", "hero", "win", "x", 1000),
    ];
    let c = subjectivity_composition("suffer", Role::Agent, ok(tuples.clone()), &words).unwrap();
    assert!((c.positive_pct - 64.0).abs() < 1e-12);
    assert!((c.negative_pct - 10.0).abs() < 1e-12);
    assert!((c.neutral_pct - 26.0).abs() < 1e-12);
    assert_eq!(c.unlisted, 6);
    assert_eq!(c.total, 100);
    let all_pos = subjectivity_composition("win", Role::Agent, ok(tuples.clone()), &words).unwrap();
    assert_eq!((all_pos.positive_pct, all_pos.negative_pct, all_pos.neutral_pct), (100.0, 0.0, 0.0));
    let empty = subjectivity_composition("suffer", Role::Agent, ok(tuples), &HashMap::new()).unwrap();
    assert!(empty.lexicon_empty);
    assert_eq!(empty.neutral_pct, 100.0);
}

fn tuple_strategy() -> impl Strategy<Value = Vec<SvoTuple>> {
    let subj = prop::sample::select(vec!["obama", "the democrats", "republicans", "obama aides"]);
    let verb = prop::sample::select(vec!["praise", "attack", "meet", "help", "unknownverb"]);
    prop::collection::vec((subj, verb, 1u64..20), 1..30)
        .prop_map(|v| v.into_iter().map(|(s, vb, c)| t("src", s, vb, "x", c)).collect())
}

proptest! {
    #[test]
    fn splitting_and_reordering_are_invisible(tuples in tuple_strategy(), cut in 0usize..30) {
        let q = PairQuery::new("obama", "");
        let base = accumulate_pairs(std::slice::from_ref(&q), ok(tuples.clone()), &scores(), Weighting::Count).unwrap();
        // split every tuple with count > 1 into two pieces
        let mut pieces = Vec::new();
        for x in &tuples {
            if x.count > 1 {
                let c1 = 1 + (cut as u64 % (x.count - 1));
                pieces.push(SvoTuple { count: c1, ..x.clone() });
                pieces.push(SvoTuple { count: x.count - c1, ..x.clone() });
            } else {
                pieces.push(x.clone());
            }
        }
        pieces.reverse();
        let split = accumulate_pairs(std::slice::from_ref(&q), ok(pieces), &scores(), Weighting::Count).unwrap();
        match (base[0].score(), split[0].score()) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12),
            (None, None) => {}
            other => prop_assert!(false, "{:?}", other),
        }
        prop_assert_eq!(base[0].support, split[0].support);
        if let (Some(s), Some(lo), Some(hi)) = (base[0].score(), base[0].min, base[0].max) {
            prop_assert!(s >= lo - 1e-12 && s <= hi + 1e-12);
        }
    }

    #[test]
    fn shard_merge_order_is_irrelevant(tuples in tuple_strategy(), at in 0usize..30) {
        let q = PairQuery::new("obama", "");
        let whole = accumulate_pairs(std::slice::from_ref(&q), ok(tuples.clone()), &scores(), Weighting::Count).unwrap();
        let k = at % (tuples.len() + 1);
        let a = accumulate_pairs(std::slice::from_ref(&q), ok(tuples[..k].to_vec()), &scores(), Weighting::Count).unwrap();
        let b = accumulate_pairs(std::slice::from_ref(&q), ok(tuples[k..].to_vec()), &scores(), Weighting::Count).unwrap();
        let mut ab = PairAccumulator::default();
        ab.merge(&a[0]);
        ab.merge(&b[0]);
        let mut ba = PairAccumulator::default();
        ba.merge(&b[0]);
        ba.merge(&a[0]);
        for m in [&ab, &ba] {
            prop_assert_eq!(m.support, whole[0].support);
            prop_assert_eq!(m.skipped, whole[0].skipped);
            match (m.score(), whole[0].score()) {
                (Some(x), Some(y)) => prop_assert!((x - y).abs() < 1e-12),
                (None, None) => {}
                other => prop_assert!(false, "{:?}", other),
            }
        }
    }
}
