use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use connotation::annotations::{agreement_report, aggregate_all, gold_frames, load_annotations, CollapseRule};
use connotation::baselines::{graph_prop, knn_predict, majority_train, GraphPropConfig};
use connotation::corpus::{
    accumulate_pairs, finish_pair, leaning_contrast, load_tuples, load_word_polarities, subjectivity_composition,
    verb_scores, Leaning, LeaningMap, PairAccumulator, PairQuery, Role, Weighting,
};
use connotation::embeddings::{load_embeddings, EmbeddingTable};
use connotation::evaluation::{accuracy, evaluate_aspects, split};
use connotation::frame_model::{
    aspect_evidence, build_frame_graph_from_evidence, decode_frame, train_piecewise, EvidenceMode, FrameExample,
    FrameWeights, SgdConfig,
};
use connotation::lexicon::{load_lexicon, read_verb_list, write_lexicon, AspectProbs};
use connotation::maxent::{train_aspect_tuned, AspectModels, ClassWeightMode, TrainConfig};
use connotation::optim;
use connotation::{selfcheck, AspectId, ConnotationFrame, Error, Polarity};
use rayon::prelude::*;

use crate::*;

type CmdResult = std::result::Result<(), CliError>;

pub fn run(cli: &Cli) -> CmdResult {
    let header = header(cli);
    let ctx = Ctx { cli, header };
    match &cli.command {
        Command::Aggregate(a) => ctx.aggregate(a),
        Command::Agreement(a) => ctx.agreement(a),
        Command::Split(a) => ctx.split(a),
        Command::TrainAspect(a) => ctx.train_aspect(a),
        Command::PredictAspect(a) => ctx.predict_aspect(a),
        Command::TrainFrame(a) => ctx.train_frame(a),
        Command::PredictFrame(a) => ctx.predict_frame(a),
        Command::Baseline(a) => ctx.baseline(a),
        Command::Eval(a) => ctx.eval(a),
        Command::Analyze(a) => ctx.analyze(a),
        Command::Contrast(a) => ctx.contrast(a),
        Command::ExportWeights(a) => ctx.export_weights(a),
        Command::Selfcheck => ctx.selfcheck(),
    }
}

struct Ctx<'a> {
    cli: &'a Cli,
    header: String,
}

fn write_file(path: &Path, contents: &str) -> connotation::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }
    fs::write(path, contents).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn parse_aspect(name: &str) -> std::result::Result<AspectId, CliError> {
    AspectId::from_name(name.trim()).ok_or_else(|| {
        let names: Vec<&str> = AspectId::ALL.iter().map(|a| a.name()).collect();
        CliError::Usage(format!("unknown aspect `{name}`; expected one of {}", names.join(", ")))
    })
}

fn tuple_files(pattern: &str) -> std::result::Result<Vec<PathBuf>, CliError> {
    let paths = glob::glob(pattern).map_err(|e| CliError::Usage(format!("bad --tuples pattern `{pattern}`: {e}")))?;
    let mut files = Vec::new();
    for p in paths {
        let p = p.map_err(|e| {
            CliError::Data(Error::Io {
                path: e.path().to_path_buf(),
                source: e.into(),
            })
        })?;
        if p.is_file() {
            files.push(p);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(CliError::Data(Error::Input(format!("no tuple files match `{pattern}`"))));
    }
    Ok(files)
}

/// All tuples of `files`, in order, as one stream.
fn chained_tuples(
    files: &[PathBuf],
) -> connotation::Result<impl Iterator<Item = connotation::Result<connotation::corpus::SvoTuple>>> {
    let readers = files.iter().map(load_tuples).collect::<connotation::Result<Vec<_>>>()?;
    Ok(readers.into_iter().flatten())
}

impl Ctx<'_> {
    fn warn(&self, msg: impl AsRef<str>) {
        if !self.cli.quiet {
            eprintln!("warning: {}", msg.as_ref());
        }
    }

    fn comments(&self, extra: &[String]) -> Vec<String> {
        let mut c = vec![self.header.clone()];
        c.extend_from_slice(extra);
        c
    }

    fn write_frames(&self, path: &Path, frames: &[ConnotationFrame], probs: Option<&[AspectProbs]>, extra: &[String]) -> CmdResult {
        let mut buf = Vec::new();
        write_lexicon(&mut buf, &self.comments(extra), frames, probs)?;
        write_file(path, &String::from_utf8(buf).expect("lexicon text is UTF-8"))?;
        Ok(())
    }

    fn with_header(&self, body: &str) -> String {
        format!("# {}\n{body}", self.header)
    }

    /// Keeps embedded entries, warning about the rest.
    fn embedded<T>(&self, items: Vec<T>, verb: impl Fn(&T) -> &str, table: &EmbeddingTable, what: &str) -> Vec<T> {
        let (keep, drop): (Vec<T>, Vec<T>) = items.into_iter().partition(|x| table.contains(verb(x)));
        if !drop.is_empty() {
            let names: Vec<&str> = drop.iter().take(5).map(&verb).collect();
            self.warn(format!(
                "skipping {} {what} verb(s) without embeddings (e.g. {})",
                drop.len(),
                names.join(", ")
            ));
        }
        keep
    }

    fn complete(&self, frames: Vec<ConnotationFrame>, what: &str) -> Vec<ConnotationFrame> {
        let (keep, drop): (Vec<_>, Vec<_>) = frames.into_iter().partition(|f| f.label_array().is_ok());
        if !drop.is_empty() {
            self.warn(format!("skipping {} {what} frame(s) with missing aspects", drop.len()));
        }
        keep
    }

    fn aggregate(&self, a: &AggregateArgs) -> CmdResult {
        let records = load_annotations(&a.input)?;
        let (frames, incomplete) = gold_frames(&aggregate_all(&records));
        if !incomplete.is_empty() {
            self.warn(format!(
                "{} verb(s) lack some aspect and were left out: {}",
                incomplete.len(),
                incomplete.join(", ")
            ));
        }
        if frames.is_empty() {
            return Err(Error::Input("no verb has labels for all nine aspects".into()).into());
        }
        self.write_frames(&a.out, &frames, None, &[])
    }

    fn agreement(&self, a: &AgreementArgs) -> CmdResult {
        let records = load_annotations(&a.input)?;
        let rule = match a.collapse {
            Collapse::Polar => CollapseRule::Polar,
            Collapse::Neutral => CollapseRule::Neutral,
        };
        let report = agreement_report(&records, rule)?;
        print!("{report}");
        if let Some(out) = &a.out {
            write_file(out, &self.with_header(&report))?;
        }
        Ok(())
    }

    fn split(&self, a: &SplitArgs) -> CmdResult {
        let frames = load_lexicon(&a.verbs)?;
        let sizes = a.sizes.as_ref().map(|s| (s[0], s[1], s[2]));
        let parts = split(&frames, self.cli.seed, sizes)?;
        for (name, part) in [("train", &parts.train), ("dev", &parts.dev), ("test", &parts.test)] {
            self.write_frames(&a.out_dir.join(format!("{name}.tsv")), part, None, &[format!("part: {name}")])?;
        }
        println!(
            "train {} / dev {} / test {} verbs written to {}",
            parts.train.len(),
            parts.dev.len(),
            parts.test.len(),
            a.out_dir.display()
        );
        Ok(())
    }

    fn labeled(frames: &[ConnotationFrame], aspect: AspectId) -> Vec<(String, Polarity)> {
        frames
            .iter()
            .filter_map(|f| f.label(aspect).map(|l| (f.verb.clone(), l)))
            .collect()
    }

    fn train_aspect(&self, a: &TrainAspectArgs) -> CmdResult {
        let mode = match a.class_weights {
            ClassWeights::Uniform => ClassWeightMode::Uniform,
            ClassWeights::Inverse => ClassWeightMode::InverseFrequency,
            ClassWeights::Grid => ClassWeightMode::GridTuned,
        };
        if mode == ClassWeightMode::GridTuned && a.dev.is_none() {
            return Err(CliError::Usage("--class-weights grid needs --dev".into()));
        }
        let cfg = TrainConfig {
            l2_strength: a.l2,
            optimizer: match a.optimizer {
                Optimizer::Lbfgs => optim::Method::Lbfgs,
                Optimizer::Gd => optim::Method::GradientDescent,
            },
            max_iters: a.max_iters,
            convergence_tol: a.tol,
            class_weight_mode: mode,
            seed: self.cli.seed,
        };
        let table = load_embeddings(&a.embeddings, None)?;
        let train = self.embedded(load_lexicon(&a.train)?, |f| &f.verb, &table, "training");
        let dev = match &a.dev {
            Some(p) => self.embedded(load_lexicon(p)?, |f| &f.verb, &table, "development"),
            None => Vec::new(),
        };
        let results = AspectId::ALL
            .par_iter()
            .map(|&asp| {
                train_aspect_tuned(&Self::labeled(&train, asp), &Self::labeled(&dev, asp), asp, &table, &cfg)
            })
            .collect::<connotation::Result<Vec<_>>>()?;
        for (asp, (_, trace)) in AspectId::ALL.iter().zip(&results) {
            if !trace.converged {
                self.warn(format!("{asp}: optimizer stopped after {} iterations without converging", trace.iterations));
            }
        }
        let models = AspectModels::new(results.into_iter().map(|(m, _)| m).collect())?;
        models.save_dir(&a.out, &self.header)?;
        println!("wrote 9 aspect models to {}", a.out.display());
        Ok(())
    }

    fn predict_aspect(&self, a: &PredictAspectArgs) -> CmdResult {
        let models = AspectModels::load_dir(&a.models)?;
        let table = load_embeddings(&a.embeddings, Some(models.dim()))?;
        let verbs = self.embedded(read_verb_list(&a.verbs)?, |v| v, &table, "input");
        let out = verbs
            .par_iter()
            .map(|v| {
                let probs = models.predict_probs(v, &table)?;
                let labels = probs.map(|p| Polarity::argmax(&p));
                Ok((ConnotationFrame::new(v.clone(), labels), probs))
            })
            .collect::<connotation::Result<Vec<_>>>()?;
        let (frames, probs): (Vec<_>, Vec<_>) = out.into_iter().unzip();
        self.write_frames(&a.out, &frames, Some(&probs), &[])
    }

    fn evidence_mode(soft: bool) -> EvidenceMode {
        if soft {
            EvidenceMode::Soft
        } else {
            EvidenceMode::Hard
        }
    }

    fn examples(
        &self,
        frames: &[ConnotationFrame],
        models: &AspectModels,
        table: &EmbeddingTable,
        mode: EvidenceMode,
    ) -> connotation::Result<Vec<FrameExample>> {
        frames
            .par_iter()
            .map(|f| {
                Ok(FrameExample {
                    verb: f.verb.clone(),
                    gold: f.label_array()?,
                    evidence: aspect_evidence(&f.verb, models, table, mode)?,
                })
            })
            .collect()
    }

    fn train_frame(&self, a: &TrainFrameArgs) -> CmdResult {
        let models = AspectModels::load_dir(&a.aspect_models)?;
        let table = load_embeddings(&a.embeddings, Some(models.dim()))?;
        let mode = Self::evidence_mode(a.soft_evidence);
        let train = self.complete(load_lexicon(&a.train)?, "training");
        let train = self.embedded(train, |f| &f.verb, &table, "training");
        let data = self.examples(&train, &models, &table, mode)?;
        let base = SgdConfig {
            learning_rate: a.lr,
            epochs: a.epochs,
            l2: a.l2,
            seed: self.cli.seed,
            shuffle: !a.no_shuffle,
            decay: a.decay,
            full_batch: a.full_batch,
        };
        let mut extra = Vec::new();
        let weights = match &a.dev {
            None => train_piecewise(&data, &base)?,
            Some(dev_path) => {
                let dev = self.complete(load_lexicon(dev_path)?, "development");
                let dev = self.embedded(dev, |f| &f.verb, &table, "development");
                let dev = self.examples(&dev, &models, &table, mode)?;
                if dev.is_empty() {
                    return Err(Error::Input("development set has no usable verbs".into()).into());
                }
                let mut best: Option<(f64, f64, FrameWeights)> = None;
                for lr in [0.01, 0.1, 1.0] {
                    let w = train_piecewise(&data, &SgdConfig { learning_rate: lr, ..base.clone() })?;
                    let acc = dev_accuracy(&dev, &w)?;
                    extra.push(format!("dev accuracy with lr={lr}: {acc:.4}"));
                    if best.as_ref().is_none_or(|(b, _, _)| acc > *b) {
                        best = Some((acc, lr, w));
                    }
                }
                let (_, lr, w) = best.expect("grid is nonempty");
                extra.push(format!("selected lr={lr}"));
                w
            }
        };
        write_file(&a.out, &weights.to_text(&self.comments(&extra)))?;
        println!("trained frame weights on {} verbs, written to {}", data.len(), a.out.display());
        Ok(())
    }

    fn predict_frame(&self, a: &PredictFrameArgs) -> CmdResult {
        let models = AspectModels::load_dir(&a.aspect_models)?;
        let table = load_embeddings(&a.embeddings, Some(models.dim()))?;
        let weights = FrameWeights::load(&a.weights)?;
        let mode = Self::evidence_mode(a.soft_evidence);
        let verbs = self.embedded(read_verb_list(&a.verbs)?, |v| v, &table, "input");
        let dump = a.dump_graph.is_some();
        let out = verbs
            .par_iter()
            .map(|v| {
                let ev = aspect_evidence(v, &models, &table, mode)?;
                let d = decode_frame(&ev, &weights)?;
                let text = if dump {
                    Some(build_frame_graph_from_evidence(&ev, &weights)?.dump())
                } else {
                    None
                };
                Ok((ConnotationFrame::new(v.clone(), d.labels).with_scores(d.scores), text))
            })
            .collect::<connotation::Result<Vec<_>>>()?;
        if let Some(path) = &a.dump_graph {
            let mut s = format!("# {}\n", self.header);
            for (f, text) in &out {
                let _ = writeln!(s, "## {}", f.verb);
                s.push_str(text.as_deref().unwrap_or_default());
            }
            write_file(path, &s)?;
        }
        let frames: Vec<ConnotationFrame> = out.into_iter().map(|(f, _)| f).collect();
        self.write_frames(&a.out, &frames, None, &[])
    }

    fn baseline(&self, a: &BaselineArgs) -> CmdResult {
        if !matches!(a.method, Method::Majority) && a.embeddings.is_none() {
            return Err(CliError::Usage("--embeddings is required for knn and graphprop".into()));
        }
        let train = load_lexicon(&a.train)?;
        let test = read_verb_list(&a.test)?;
        let table = match (a.method, &a.embeddings) {
            (Method::Majority, _) | (_, None) => None,
            (_, Some(p)) => Some(load_embeddings(p, None)?),
        };
        let frames: Vec<ConnotationFrame> = match a.method {
            Method::Majority => {
                let model = majority_train(&train)?;
                test.iter().map(|v| model.predict(v)).collect()
            }
            Method::Knn => {
                let table = table.as_ref().expect("checked above");
                let test = self.embedded(test, |v| v, table, "test");
                test.par_iter()
                    .map(|v| knn_predict(v, a.k, &train, table))
                    .collect::<connotation::Result<_>>()?
            }
            Method::Graphprop => {
                let table = table.as_ref().expect("checked above");
                let train = self.embedded(train, |f| &f.verb, table, "training");
                let test = self.embedded(test, |v| v, table, "test");
                let cfg = GraphPropConfig {
                    top_k: a.top_k,
                    sim_floor: a.sim_floor,
                    potential_scale: a.potential_scale,
                    seed_strength: a.seed_strength,
                    ..GraphPropConfig::default()
                };
                let results = AspectId::ALL
                    .par_iter()
                    .map(|&asp| {
                        let seeds: BTreeMap<String, Polarity> = Self::labeled(&train, asp).into_iter().collect();
                        graph_prop(asp, &seeds, &test, table, &cfg)
                    })
                    .collect::<connotation::Result<Vec<_>>>()?;
                for (asp, r) in AspectId::ALL.iter().zip(&results) {
                    if !r.converged {
                        self.warn(format!("{asp}: propagation stopped after {} iterations without converging", r.iterations));
                    }
                    if !r.isolated.is_empty() {
                        self.warn(format!("{asp}: {} verb(s) had no similar verbs and were labeled neutral", r.isolated.len()));
                    }
                }
                test.iter()
                    .map(|v| {
                        let mut labels = [Polarity::Neutral; 9];
                        for (i, r) in results.iter().enumerate() {
                            labels[i] = r.labels.get(v).copied().unwrap_or(Polarity::Neutral);
                        }
                        ConnotationFrame::new(v.clone(), labels)
                    })
                    .collect()
            }
        };
        self.write_frames(&a.out, &frames, None, &[])
    }

    fn eval(&self, a: &EvalArgs) -> CmdResult {
        let aspects = match &a.aspects {
            Some(names) => names.iter().map(|n| parse_aspect(n)).collect::<std::result::Result<Vec<_>, _>>()?,
            None => AspectId::ALL.to_vec(),
        };
        let gold = load_lexicon(&a.gold)?;
        let pred = load_lexicon(&a.pred)?;
        let by_verb: BTreeMap<&str, &ConnotationFrame> = pred.iter().map(|f| (f.verb.as_str(), f)).collect();
        let missing: Vec<&str> = gold
            .iter()
            .map(|f| f.verb.as_str())
            .filter(|v| !by_verb.contains_key(v))
            .collect();
        if !missing.is_empty() {
            return Err(Error::Input(format!(
                "{} gold verb(s) have no prediction (e.g. {})",
                missing.len(),
                missing.iter().take(5).copied().collect::<Vec<_>>().join(", ")
            ))
            .into());
        }
        let pred: Vec<ConnotationFrame> = gold.iter().map(|f| by_verb[f.verb.as_str()].clone()).collect();
        let report = evaluate_aspects(&gold, &pred, &aspects)?;
        print!("{}", report.to_text(&a.title));
        if let Some(csv) = &a.csv {
            write_file(csv, &self.with_header(&report.to_csv()))?;
        }
        Ok(())
    }

    fn analyze(&self, a: &AnalyzeArgs) -> CmdResult {
        let aspect = parse_aspect(&a.aspect)?;
        let files = tuple_files(&a.tuples)?;
        let scores = verb_scores(&load_lexicon(&a.lexicon)?, aspect);
        let queries = read_pairs(&a.pairs)?;
        let weighting = if a.unweighted { Weighting::Unweighted } else { Weighting::Count };
        // per-file partial sums, merged in file order so any --jobs gives the same bytes
        let parts = files
            .par_iter()
            .map(|p| {
                let mut reader = load_tuples(p)?;
                let acc = accumulate_pairs(&queries, reader.by_ref(), &scores, weighting)?;
                Ok((acc, reader.malformed()))
            })
            .collect::<connotation::Result<Vec<_>>>()?;
        let mut totals = vec![PairAccumulator::default(); queries.len()];
        let mut malformed = 0;
        for (acc, bad) in &parts {
            for (t, x) in totals.iter_mut().zip(acc) {
                t.merge(x);
            }
            malformed += bad;
        }
        if malformed > 0 {
            self.warn(format!("skipped {malformed} malformed tuple line(s)"));
        }
        let mut s = format!("# {}\nagent,theme,score,support\n", self.header);
        for (q, acc) in queries.iter().zip(&totals) {
            match finish_pair(q, acc) {
                Ok(row) => {
                    let _ = writeln!(s, "{},{},{},{}", row.agent_pattern, row.theme_pattern, row.score, row.support);
                }
                Err(Error::Undefined(_)) => {
                    self.warn(format!("no scored tuples for agent `{}`, theme `{}`", q.agent, q.theme));
                    let _ = writeln!(s, "{},{},,0", q.agent, q.theme);
                }
                Err(e) => return Err(e.into()),
            }
        }
        write_file(&a.out, &s)?;
        Ok(())
    }

    fn contrast(&self, a: &ContrastArgs) -> CmdResult {
        let role = Role::parse(&a.role).map_err(|e| CliError::Usage(e.to_string()))?;
        let files = tuple_files(&a.tuples)?;
        let leanings = LeaningMap::load(&a.leanings)?;
        let sides = match a.leaning {
            LeaningArg::Left => vec![Leaning::Left],
            LeaningArg::Right => vec![Leaning::Right],
            LeaningArg::Both => vec![Leaning::Left, Leaning::Right],
        };
        let role_name = match role {
            Role::Agent => "agent",
            Role::Theme => "theme",
        };
        let mut s = String::new();
        for side in sides {
            let side_name = match side {
                Leaning::Left => "left",
                Leaning::Right => "right",
                _ => "unknown",
            };
            let top = leaning_contrast(&a.verb, role, side, &leanings, chained_tuples(&files)?, a.top)?;
            let _ = writeln!(s, "{side_name}-leaning sources, {role_name} of `{}`:", a.verb);
            if top.is_empty() {
                let _ = writeln!(s, "  (none)");
            }
            for (filler, count) in top {
                let _ = writeln!(s, "  {filler}\t{count}");
            }
        }
        if let Some(words) = &a.words {
            let words = load_word_polarities(words)?;
            let c = subjectivity_composition(&a.verb, role, chained_tuples(&files)?, &words)?;
            if c.lexicon_empty {
                self.warn("word polarity list is empty; every filler counts as neutral");
            }
            let _ = writeln!(
                s,
                "head words of the {role_name}: +{:.2}% -{:.2}% ={:.2}% of {} ({} unlisted)",
                c.positive_pct, c.negative_pct, c.neutral_pct, c.total, c.unlisted
            );
        }
        print!("{s}");
        if let Some(out) = &a.out {
            write_file(out, &self.with_header(&s))?;
        }
        Ok(())
    }

    fn export_weights(&self, a: &ExportWeightsArgs) -> CmdResult {
        let w = FrameWeights::load(&a.weights)?;
        let text = if a.csv {
            self.with_header(&w.to_csv())
        } else {
            w.to_text(&self.comments(&[]))
        };
        match &a.out {
            Some(p) => write_file(p, &text)?,
            None => print!("{text}"),
        }
        Ok(())
    }

    fn selfcheck(&self) -> CmdResult {
        let lines = selfcheck::run(self.cli.seed);
        let mut failed = 0;
        for l in &lines {
            println!("{} {}: {}", if l.passed { "PASS" } else { "FAIL" }, l.name, l.detail);
            failed += usize::from(!l.passed);
        }
        if failed > 0 {
            return Err(Error::Input(format!("{failed} self-check(s) failed")).into());
        }
        Ok(())
    }
}

fn dev_accuracy(dev: &[FrameExample], w: &FrameWeights) -> connotation::Result<f64> {
    let decoded = dev
        .par_iter()
        .map(|ex| decode_frame(&ex.evidence, w).map(|d| d.labels))
        .collect::<connotation::Result<Vec<_>>>()?;
    let gold: Vec<Polarity> = dev.iter().flat_map(|ex| ex.gold).collect();
    let pred: Vec<Polarity> = decoded.into_iter().flatten().collect();
    accuracy(&gold, &pred)
}

/// Pairs file: `agent,theme` per line; `#` comments and an `agent,theme`
/// header are skipped.
fn read_pairs(path: &Path) -> connotation::Result<Vec<PairQuery>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.eq_ignore_ascii_case("agent,theme") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("expected `agent,theme`, found {} field(s)", fields.len()),
            });
        }
        if fields[0].is_empty() && fields[1].is_empty() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: "agent and theme are both empty".into(),
            });
        }
        if seen.insert((fields[0].to_string(), fields[1].to_string())) {
            out.push(PairQuery::new(fields[0], fields[1]));
        }
    }
    if out.is_empty() {
        return Err(Error::Input(format!("{}: no agent/theme pairs", path.display())));
    }
    Ok(out)
}
