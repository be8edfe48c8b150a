use std::collections::{HashMap, HashSet};
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use latstd::agreement::{agreement_table, aligned_tokens, default_features, write_report, Stage};
use latstd::config::Config;
use latstd::conllu::{parse_conllu, write_conllu, Sentence};
use latstd::convert::{convert_corpus, sentence_label};
use latstd::dedup::{
    align_tokens, duplicate_report, find_duplicates, manifest_rows, read_manifest, write_manifest,
    DuplicatePair, SentenceRef,
};
use latstd::error::{Error, Result};
use latstd::eval::{dummy_predict, evaluate, permutation_test, Metric};
use latstd::lasla::ingest_lasla_file;
use latstd::metadata::MetadataTable;
use latstd::normalize::matching_key;
use latstd::report::write_trailer;
use latstd::splits::{audit_splits, build_splits, materialize, works_from_corpus, SplitInput, SplitManifest};
use latstd::standardize::{legality_check, Flavor, StandardRecord};

#[derive(Parser)]
#[command(name = "latstd", version, about = "Standardize, deduplicate, split and score Latin treebanks")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    output_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Standardize and harmonize CoNLL-U (or raw LASLA) files.
    Convert {
        /// Input file or directory.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "ud")]
        flavor: Flavor,
        /// Output directory (overrides --output-dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Find sentences annotated in both corpora.
    Dedup {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Metadata table, for authors in the per-work report.
        #[arg(long)]
        metadata: Option<PathBuf>,
    },
    /// Per-feature agreement on duplicated sentences, before and after conversion.
    Agree {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Duplicate manifest from `dedup`; computed when absent.
        #[arg(long)]
        dups: Option<PathBuf>,
        #[arg(long, default_value = "ud")]
        flavor_a: Flavor,
        #[arg(long, default_value = "lasla")]
        flavor_b: Flavor,
        /// Leave out word pairs where either side raised a standardization anomaly.
        #[arg(long)]
        exclude_anomalous: bool,
    },
    /// Check a metadata table.
    MetadataValidate {
        #[arg(long)]
        metadata: PathBuf,
        /// Also write the table in canonical form.
        #[arg(long)]
        canonical: Option<PathBuf>,
    },
    /// Build time-period train/dev/test splits.
    Split {
        /// Standardized UD files or directories.
        #[arg(long, required = true, num_args = 1..)]
        ud: Vec<PathBuf>,
        /// Standardized LASLA files or directories.
        #[arg(long, num_args = 1..)]
        lasla: Vec<PathBuf>,
        #[arg(long)]
        metadata: Option<PathBuf>,
        /// Duplicate manifest with UD as corpus A; computed when absent.
        #[arg(long)]
        dups: Option<PathBuf>,
    },
    /// Re-check a split manifest against the corpora.
    SplitAudit {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, required = true, num_args = 1..)]
        ud: Vec<PathBuf>,
        #[arg(long, num_args = 1..)]
        lasla: Vec<PathBuf>,
        #[arg(long)]
        dups: Option<PathBuf>,
    },
    /// Score predictions against gold.
    Eval {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
    },
    /// Paired permutation test between two prediction files.
    PermTest {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// morph-acc, upos-acc, macro-f1:<Feature> or f1:<Feature>=<Value>.
        #[arg(long, default_value = "morph-acc")]
        metric: Metric,
        /// Iterations; defaults to the configured value.
        #[arg(long)]
        n: Option<u64>,
    },
    /// Report grammar-rule violations in standardized files.
    Lint {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Tag a file with the built-in suffix-rule tagger.
    DummyPredict {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Outcome of a subcommand that ran to completion.
enum Outcome {
    Ok,
    /// Checks ran and found problems.
    Failed,
}

fn conllu_files(path: &Path) -> Result<Vec<PathBuf>> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|e| Error::from(e).in_file(path))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        Ok(files)
    } else {
        Ok(vec![path.to_path_buf()])
    }
}

fn read_file(path: &Path) -> Result<Vec<Sentence>> {
    let f = File::open(path).map_err(|e| Error::from(e).in_file(path))?;
    parse_conllu(BufReader::new(f)).map_err(|e| e.in_file(path))
}

fn read_corpus(paths: &[PathBuf]) -> Result<Vec<Sentence>> {
    let mut out = Vec::new();
    for p in paths {
        for f in conllu_files(p)? {
            if f.extension().is_some_and(|e| e == "conllu") || !p.is_dir() {
                out.extend(read_file(&f)?);
            }
        }
    }
    Ok(out)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::from(e).in_file(dir))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::from(e).in_file(path))?))
}

struct Ctx {
    global: Global,
    config: Config,
}

impl Ctx {
    fn out(&self, name: &str) -> PathBuf {
        self.global.output_dir.join(name)
    }

    fn trailer<W: Write>(&self, w: &mut W) -> Result<()> {
        write_trailer(w, self.global.seed, &self.config.hash)?;
        Ok(())
    }
}

/// Files under `path` as (file stem, sentences). With the LASLA flavor,
/// files not ending in `.conllu` are read through the column mapping.
fn load(ctx: &Ctx, path: &Path, flavor: Flavor) -> Result<Vec<(String, Vec<Sentence>)>> {
    let mapping = ctx.config.lasla_mapping();
    let mut out = Vec::new();
    for file in conllu_files(path)? {
        let is_conllu = file.extension().is_some_and(|e| e == "conllu");
        let sentences = if flavor == Flavor::Lasla && !is_conllu {
            let ingested = ingest_lasla_file(&file, &mapping)?;
            for w in &ingested.warnings {
                eprintln!("{}: unknown {}={} ({} times)", file.display(), w.feature, w.value, w.count);
            }
            ingested.sentences
        } else if is_conllu || !path.is_dir() {
            read_file(&file)?
        } else {
            continue;
        };
        let stem = file.file_stem().and_then(|s| s.to_str()).unwrap_or("corpus").to_string();
        out.push((stem, sentences));
    }
    Ok(out)
}

fn read_lasla(ctx: &Ctx, paths: &[PathBuf]) -> Result<Vec<Sentence>> {
    let mut out = Vec::new();
    for p in paths {
        out.extend(load_all(ctx, p, Flavor::Lasla)?);
    }
    Ok(out)
}

fn load_all(ctx: &Ctx, path: &Path, flavor: Flavor) -> Result<Vec<Sentence>> {
    Ok(load(ctx, path, flavor)?.into_iter().flat_map(|(_, s)| s).collect())
}

fn convert(ctx: &Ctx, input: &Path, flavor: Flavor, out: Option<&Path>) -> Result<Outcome> {
    let dir = out.unwrap_or(&ctx.global.output_dir);
    let opts = ctx.config.convert_options(flavor)?;
    let mut audit = latstd::harmonize::AuditLog::default();
    let mut anomalies = Vec::new();
    for (stem, sentences) in load(ctx, input, flavor)? {
        let converted = convert_corpus(&sentences, &opts);
        audit.merge(&converted.audit);
        anomalies.extend(converted.anomalies.into_iter().map(|a| (stem.clone(), a)));
        let mut w = create(&dir.join(format!("{stem}.conllu")))?;
        write_conllu(&mut w, &converted.sentences)?;
        w.flush()?;
    }
    let name = input.file_stem().and_then(|s| s.to_str()).unwrap_or("corpus");
    let mut w = create(&dir.join(format!("{name}.audit.tsv")))?;
    writeln!(w, "rule\tcount")?;
    for (rule, n) in &audit.counts {
        writeln!(w, "{rule}\t{n}")?;
    }
    ctx.trailer(&mut w)?;
    let mut w = create(&dir.join(format!("{name}.anomalies.tsv")))?;
    writeln!(w, "file\tsent_id\ttoken_id\tcode")?;
    for (file, a) in &anomalies {
        writeln!(w, "{file}\t{}\t{}\t{}", a.sent_id, a.token_id, a.code)?;
    }
    ctx.trailer(&mut w)?;
    eprintln!("{} rewrites, {} anomalies", audit.total(), anomalies.len());
    Ok(Outcome::Ok)
}

/// Rebuilds duplicate pairs from a manifest, recomputing the alignments.
fn pairs_from_manifest(path: &Path, a: &[Sentence], b: &[Sentence]) -> Result<Vec<DuplicatePair>> {
    let f = File::open(path).map_err(|e| Error::from(e).in_file(path))?;
    let rows = read_manifest(BufReader::new(f)).map_err(|e| e.in_file(path))?;
    let index = |c: &[Sentence]| -> HashMap<String, usize> {
        c.iter().enumerate().map(|(i, s)| (sentence_label(s, i), i)).collect()
    };
    let (ia, ib) = (index(a), index(b));
    rows.into_iter()
        .map(|r| {
            let find = |m: &HashMap<String, usize>, id: &str| {
                m.get(id)
                    .copied()
                    .ok_or_else(|| Error::Alignment(format!("manifest sentence {id:?} is not in the corpus")))
            };
            let (i, j) = (find(&ia, &r.sent_a)?, find(&ib, &r.sent_b)?);
            let (ka, kb) = (matching_key(&a[i]), matching_key(&b[j]));
            Ok(DuplicatePair {
                a: SentenceRef {
                    index: i,
                    sent_id: r.sent_a,
                    work_id: a[i].work_id().map(str::to_string),
                },
                b: SentenceRef {
                    index: j,
                    sent_id: r.sent_b,
                    work_id: b[j].work_id().map(str::to_string),
                },
                basis: r.basis,
                alignment: align_tokens(&ka.forms, &kb.forms),
            })
        })
        .collect()
}

fn dedup(ctx: &Ctx, a: &Path, b: &Path, metadata: Option<&Path>) -> Result<Outcome> {
    let ca = load_all(ctx, a, Flavor::Ud)?;
    let cb = load_all(ctx, b, Flavor::Lasla)?;
    let meta = metadata.map(MetadataTable::load_file).transpose()?;
    let pairs = find_duplicates(&ca, &cb, ctx.config.min_overlap());
    let mut w = create(&ctx.out("dups.tsv"))?;
    write_manifest(&mut w, &manifest_rows(&pairs))?;
    ctx.trailer(&mut w)?;
    let mut w = create(&ctx.out("dups_by_work.tsv"))?;
    writeln!(w, "author\twork_id\tduplicates")?;
    let report = duplicate_report(&pairs, &ca, meta.as_ref());
    for r in &report {
        writeln!(w, "{}\t{}\t{}", r.author, r.work_id, r.count)?;
    }
    writeln!(w, "total\t_\t{}", pairs.len())?;
    ctx.trailer(&mut w)?;
    println!("{} duplicate sentences", pairs.len());
    Ok(Outcome::Ok)
}

#[allow(clippy::too_many_arguments)]
fn agree(
    ctx: &Ctx,
    a: &Path,
    b: &Path,
    dups: Option<&Path>,
    flavor_a: Flavor,
    flavor_b: Flavor,
    exclude_anomalous: bool,
) -> Result<Outcome> {
    let raw_a = load_all(ctx, a, flavor_a)?;
    let raw_b = load_all(ctx, b, flavor_b)?;
    let pairs = match dups {
        Some(p) => pairs_from_manifest(p, &raw_a, &raw_b)?,
        None => find_duplicates(&raw_a, &raw_b, ctx.config.min_overlap()),
    };
    let conv_a = convert_corpus(&raw_a, &ctx.config.convert_options(flavor_a)?).sentences;
    let conv_b = convert_corpus(&raw_b, &ctx.config.convert_options(flavor_b)?).sentences;
    let features = default_features();
    let before = agreement_table(&aligned_tokens(&raw_a, &raw_b, &pairs), &features, Stage::Raw, exclude_anomalous)?;
    let after = agreement_table(&aligned_tokens(&conv_a, &conv_b, &pairs), &features, Stage::Converted, exclude_anomalous)?;
    let mut w = create(&ctx.out("agreement.tsv"))?;
    write_report(&mut w, &[(Stage::Raw, before), (Stage::Converted, after)])?;
    ctx.trailer(&mut w)?;
    Ok(Outcome::Ok)
}

fn metadata_validate(ctx: &Ctx, path: &Path, canonical: Option<&Path>) -> Result<Outcome> {
    let f = File::open(path).map_err(|e| Error::from(e).in_file(path))?;
    let (table, violations) = MetadataTable::parse(BufReader::new(f))?;
    for v in &violations {
        println!("{}: {v}", path.display());
    }
    if let Some(out) = canonical {
        let mut w = create(out)?;
        table.write(&mut w)?;
    }
    let _ = ctx;
    if violations.is_empty() {
        println!("{}: {} rows, no violations", path.display(), table.rows.len());
        Ok(Outcome::Ok)
    } else {
        Ok(Outcome::Failed)
    }
}

fn split_input(ctx: &Ctx, ud: &[Sentence], lasla: &[Sentence], dups: Option<&Path>) -> Result<SplitInput> {
    let mut works = works_from_corpus(ud, false)?;
    works.extend(works_from_corpus(lasla, true)?);
    let pairs = match dups {
        Some(p) => pairs_from_manifest(p, ud, lasla)?,
        None => find_duplicates(ud, lasla, ctx.config.min_overlap()),
    };
    let duplicates: HashSet<String> = pairs.into_iter().map(|p| p.a.sent_id).collect();
    Ok(SplitInput { works, duplicates })
}

fn write_manifest_json(path: &Path, m: &SplitManifest) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, m)?;
    writeln!(w)?;
    Ok(())
}

fn split(ctx: &Ctx, ud_paths: &[PathBuf], lasla_paths: &[PathBuf], metadata: Option<&Path>, dups: Option<&Path>) -> Result<Outcome> {
    let ud = read_corpus(ud_paths)?;
    let lasla = read_lasla(ctx, lasla_paths)?;
    let meta = metadata.map(MetadataTable::load_file).transpose()?;
    let input = split_input(ctx, &ud, &lasla, dups)?;
    let mut opts = ctx.config.splits.clone();
    opts.seed = ctx.global.seed;
    let manifests = build_splits(&input, meta.as_ref(), &opts)?;
    let mut sizes = create(&ctx.out("split_sizes.tsv"))?;
    writeln!(sizes, "period\ttrain\tdev\ttest")?;
    let mut ok = true;
    for m in &manifests {
        let name = m.period.as_str().to_lowercase().replace('+', "_");
        write_manifest_json(&ctx.out(&format!("{name}.manifest.json")), m)?;
        let data = materialize(m, &ud, &lasla);
        for (split, sents) in [("train", &data.train), ("dev", &data.dev), ("test", &data.test)] {
            let mut w = create(&ctx.out(&format!("{name}/{split}.conllu")))?;
            write_conllu(&mut w, sents)?;
            w.flush()?;
        }
        writeln!(sizes, "{}\t{}\t{}\t{}", m.period, m.sizes.train, m.sizes.dev, m.sizes.test)?;
        for c in m.audit.iter().filter(|c| !c.passed) {
            ok = false;
            eprintln!("{}: {} failed: {}", m.period, c.constraint, c.counterexamples.join("; "));
        }
    }
    ctx.trailer(&mut sizes)?;
    Ok(if ok { Outcome::Ok } else { Outcome::Failed })
}

fn split_audit(ctx: &Ctx, manifest: &Path, ud_paths: &[PathBuf], lasla_paths: &[PathBuf], dups: Option<&Path>) -> Result<Outcome> {
    let text = fs::read_to_string(manifest).map_err(|e| Error::from(e).in_file(manifest))?;
    let m: SplitManifest = serde_json::from_str(&text).map_err(|e| Error::from(e).in_file(manifest))?;
    let ud = read_corpus(ud_paths)?;
    let lasla = read_lasla(ctx, lasla_paths)?;
    let input = split_input(ctx, &ud, &lasla, dups)?;
    let results = audit_splits(&m, &input, ctx.config.splits.min_test);
    let mut ok = true;
    for r in &results {
        println!(
            "{}\t{}\t{}",
            r.constraint,
            if r.passed { "pass" } else { "FAIL" },
            r.counterexamples.join("; ")
        );
        ok &= r.passed;
    }
    Ok(if ok { Outcome::Ok } else { Outcome::Failed })
}

fn eval(ctx: &Ctx, gold: &Path, pred: &Path) -> Result<Outcome> {
    let g = read_file(gold)?;
    let p = read_file(pred)?;
    let report = evaluate(&g, &p)?;
    let mut w = create(&ctx.out("eval.json"))?;
    serde_json::to_writer_pretty(&mut w, &report)?;
    writeln!(w)?;
    let mut w = create(&ctx.out("eval.tsv"))?;
    report.write_table(&mut w)?;
    ctx.trailer(&mut w)?;
    println!(
        "morph accuracy {:.4}, UPOS accuracy {:.4} over {} words",
        report.morph_accuracy, report.upos_accuracy, report.tokens
    );
    Ok(Outcome::Ok)
}

fn perm_test(ctx: &Ctx, gold: &Path, a: &Path, b: &Path, metric: &Metric, n: Option<u64>) -> Result<Outcome> {
    let g = read_file(gold)?;
    let pa = read_file(a)?;
    let pb = read_file(b)?;
    let iterations = n.unwrap_or(ctx.config.eval.iterations);
    let jobs = if ctx.global.jobs == 0 { rayon::current_num_threads() } else { ctx.global.jobs };
    let r = permutation_test(&g, &pa, &pb, metric, iterations, ctx.global.seed, jobs)?;
    println!(
        "metric={}\ta={:.6}\tb={:.6}\tobserved={:.6}\tp={}\titerations={}\tseed={}",
        r.metric,
        r.metric_a,
        r.metric_b,
        r.observed,
        r.p_display(),
        r.iterations,
        r.seed
    );
    let mut w = create(&ctx.out("perm_test.tsv"))?;
    writeln!(w, "metric\tmetric_a\tmetric_b\tobserved_diff\tp_value\titerations\tseed")?;
    writeln!(
        w,
        "{}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}\t{}",
        r.metric,
        r.metric_a,
        r.metric_b,
        r.observed,
        r.p_display(),
        r.iterations,
        r.seed
    )?;
    ctx.trailer(&mut w)?;
    Ok(Outcome::Ok)
}

fn lint(ctx: &Ctx, input: &Path) -> Result<Outcome> {
    let rules = ctx.config.lint_rules()?;
    let sentences = read_corpus(&[input.to_path_buf()])?;
    let mut w = create(&ctx.out("lint.tsv"))?;
    writeln!(w, "sent_id\ttoken_id\tform\trule")?;
    let mut found = 0usize;
    for (i, s) in sentences.iter().enumerate() {
        for t in s.tokens() {
            let record = StandardRecord::from_token(t)
                .map_err(|e| Error::Config(format!("sentence {}, word {}: {e}", sentence_label(s, i), t.id)))?;
            for v in legality_check(&record, &rules) {
                found += 1;
                writeln!(w, "{}\t{}\t{}\t{}", sentence_label(s, i), t.id, t.form, v.code())?;
            }
        }
    }
    ctx.trailer(&mut w)?;
    println!("{found} violation(s)");
    Ok(if found == 0 { Outcome::Ok } else { Outcome::Failed })
}

fn run(cli: Cli) -> Result<Outcome> {
    if cli.global.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.global.jobs)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let config = Config::load(cli.global.config.as_deref())?;
    let ctx = Ctx {
        global: cli.global,
        config,
    };
    fs::create_dir_all(&ctx.global.output_dir).map_err(|e| Error::from(e).in_file(&ctx.global.output_dir))?;
    match &cli.command {
        Command::Convert { input, flavor, out } => convert(&ctx, input, *flavor, out.as_deref()),
        Command::Dedup { a, b, metadata } => dedup(&ctx, a, b, metadata.as_deref()),
        Command::Agree { a, b, dups, flavor_a, flavor_b, exclude_anomalous } => {
            agree(&ctx, a, b, dups.as_deref(), *flavor_a, *flavor_b, *exclude_anomalous)
        }
        Command::MetadataValidate { metadata, canonical } => metadata_validate(&ctx, metadata, canonical.as_deref()),
        Command::Split { ud, lasla, metadata, dups } => split(&ctx, ud, lasla, metadata.as_deref(), dups.as_deref()),
        Command::SplitAudit { manifest, ud, lasla, dups } => split_audit(&ctx, manifest, ud, lasla, dups.as_deref()),
        Command::Eval { gold, pred } => eval(&ctx, gold, pred),
        Command::PermTest { gold, a, b, metric, n } => perm_test(&ctx, gold, a, b, metric, *n),
        Command::Lint { input } => lint(&ctx, input),
        Command::DummyPredict { input, out } => {
            let pred = dummy_predict(&read_file(input)?);
            let mut w = create(out)?;
            write_conllu(&mut w, &pred)?;
            w.flush()?;
            Ok(Outcome::Ok)
        }
    }
}

fn is_config_error(e: &Error) -> bool {
    match e {
        Error::Config(_) => true,
        Error::File { source, .. } => is_config_error(source),
        _ => false,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("latstd: {e}");
            ExitCode::from(if is_config_error(&e) { 2 } else { 1 })
        }
    }
}
