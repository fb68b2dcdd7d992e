use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Condvar, Mutex, OnceLock};
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use super::metrics::{aggregate, score_problem, MetricsRow, PerProblemMetrics};
use super::report::{emit_report, per_problem_csv, ReportFormat};
use crate::bundle::{content_hash, discover_bundles, load_bundle, RecognitionBundle};
use crate::landmarks::{cache_key, extract_for_template, LandmarkCache, LandmarkSet};
use crate::obs_gen::Observability;
use crate::recognizer_lm::{recognize_lm, recognize_uniform, LM_RECOGNIZER, UNIFORM_RECOGNIZER};
use crate::recognizer_llm::{
    recognize_llm, ChatClient, ClientError, HttpClient, ProviderConfig, ProviderSet,
    RecordingClient, ReplayClient,
};
use crate::result::RecognitionResult;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecognizerSpec {
    Lm,
    Uniform,
    Llm(String),
    All,
}

impl std::str::FromStr for RecognizerSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "lm" => Ok(RecognizerSpec::Lm),
            "uniform" => Ok(RecognizerSpec::Uniform),
            "all" => Ok(RecognizerSpec::All),
            _ => match s.strip_prefix("llm:") {
                Some(name) if !name.is_empty() => Ok(RecognizerSpec::Llm(name.to_string())),
                _ => Err(format!("unknown recogniser {s:?} (expected lm, uniform, llm:<provider> or all)")),
            },
        }
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no domains selected")]
    NoDomains,
    #[error("no observability levels selected")]
    NoObservability,
    #[error("no recognisers selected")]
    NoRecognizers,
    #[error("no bundles found under {0}")]
    NoBundles(PathBuf),
    #[error("recogniser {0} needs a provider file")]
    NoProviders(String),
    #[error(transparent)]
    Provider(#[from] crate::recognizer_llm::ProviderError),
    #[error(transparent)]
    Client(#[from] ClientError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> EvalError + '_ {
    move |source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub bench_root: PathBuf,
    pub domains: Vec<String>,
    pub observability: Vec<Observability>,
    pub recognizers: Vec<RecognizerSpec>,
    pub seed: u64,
    pub jobs: usize,
    pub out: PathBuf,
    pub run_id: String,
    pub providers: Option<ProviderSet>,
    pub replay: Option<PathBuf>,
    pub record: Option<PathBuf>,
    pub lm_cache: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LoadFailure {
    pub path: String,
    pub error: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    run_id: &'a str,
    version: &'a str,
    seed: u64,
    bench_root: String,
    domains: &'a [String],
    observability: Vec<u8>,
    recognizers: Vec<String>,
    jobs: usize,
    providers: Vec<&'a ProviderConfig>,
    replay: Option<String>,
    bundles: BTreeMap<&'a str, String>,
    load_errors: &'a [LoadFailure],
}

pub struct RunOutcome {
    pub run_dir: PathBuf,
    pub per_problem: Vec<PerProblemMetrics>,
    pub summary: Vec<MetricsRow>,
    pub load_errors: Vec<LoadFailure>,
}

enum Recognizer<'a> {
    Lm,
    Uniform,
    Llm {
        provider: &'a ProviderConfig,
        client: Box<dyn ChatClient>,
        gate: Semaphore,
    },
}

impl Recognizer<'_> {
    fn id(&self) -> String {
        match self {
            Recognizer::Lm => LM_RECOGNIZER.to_string(),
            Recognizer::Uniform => UNIFORM_RECOGNIZER.to_string(),
            Recognizer::Llm { provider, .. } => provider.recognizer_id(),
        }
    }
}

/// Caps in-flight calls to one provider.
struct Semaphore {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Semaphore {
    fn new(n: usize) -> Self {
        Semaphore {
            free: Mutex::new(n),
            cv: Condvar::new(),
        }
    }

    fn run<T>(&self, f: impl FnOnce() -> T) -> T {
        {
            let mut free = self.cv.wait_while(self.free.lock().unwrap(), |n| *n == 0).unwrap();
            *free -= 1;
        }
        let out = f();
        *self.free.lock().unwrap() += 1;
        self.cv.notify_one();
        out
    }
}

type Extracted = Result<(Arc<Vec<LandmarkSet>>, f64), String>;

/// Landmarks per (domain, template, hypotheses), shared by every bundle of
/// the same problem and computed at most once per run.
struct LandmarkStore {
    cells: Mutex<HashMap<String, Arc<OnceLock<Extracted>>>>,
    disk: Option<LandmarkCache>,
}

impl LandmarkStore {
    fn get(&self, b: &RecognitionBundle) -> Extracted {
        let key = cache_key(&b.domain, &b.template, &b.hypotheses);
        let cell = self.cells.lock().unwrap().entry(key.clone()).or_default().clone();
        cell.get_or_init(|| {
            let start = Instant::now();
            if let Some(sets) = self.disk.as_ref().and_then(|d| d.load(&key)) {
                return Ok((Arc::new(sets), start.elapsed().as_secs_f64()));
            }
            let t = extract_for_template(&b.domain, &b.template, &b.hypotheses).map_err(|e| e.to_string())?;
            if let Some(d) = &self.disk {
                if let Err(e) = d.store(&key, &t.sets) {
                    log::warn!("landmark cache: {e}");
                }
            }
            Ok((Arc::new(t.sets), t.seconds))
        })
        .clone()
    }
}

fn recognize(rec: &Recognizer, b: &RecognitionBundle, store: &LandmarkStore) -> RecognitionResult {
    match rec {
        Recognizer::Uniform => recognize_uniform(b),
        Recognizer::Llm { provider, client, gate } => gate.run(|| recognize_llm(b, provider, client.as_ref())),
        Recognizer::Lm => {
            let failed = |msg: String| {
                let mut r = RecognitionResult::empty(LM_RECOGNIZER, &b.id);
                r.error = Some(msg);
                r
            };
            match store.get(b) {
                Ok((sets, seconds)) => match recognize_lm(b, &sets) {
                    Ok(mut r) => {
                        r.extract_time = Some(seconds);
                        r
                    }
                    Err(e) => failed(e.to_string()),
                },
                Err(e) => failed(e),
            }
        }
    }
}

/// Runs `f` over `items` on up to `jobs` threads; output keeps input order.
pub fn parallel_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<R>>> = items.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for _ in 0..jobs.clamp(1, items.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                *slots[i].lock().unwrap() = Some(r);
            });
        }
    });
    slots.into_iter().map(|m| m.into_inner().unwrap().expect("every slot filled")).collect()
}

pub fn write_atomic(path: &Path, text: &str) -> Result<(), EvalError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(dir))?;
    tmp.write_all(text.as_bytes()).map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| e.error).map_err(io_err(path))?;
    Ok(())
}

/// Finds bundles for each selected domain and observability, laid out as
/// `<root>/<domain>/<pct>/...`. Ids are paths relative to the root.
pub fn load_suite(cfg: &RunConfig) -> Result<(Vec<RecognitionBundle>, Vec<LoadFailure>), EvalError> {
    let mut bundles = Vec::new();
    let mut failures = Vec::new();
    for domain in &cfg.domains {
        let ddir = cfg.bench_root.join(domain);
        if !ddir.is_dir() {
            log::warn!("no directory for domain {domain} under {}", cfg.bench_root.display());
            continue;
        }
        for pct in &cfg.observability {
            let pdir = ddir.join(pct.pct().to_string());
            if !pdir.is_dir() {
                continue;
            }
            for dir in discover_bundles(&pdir).map_err(io_err(&pdir))? {
                let id = dir
                    .strip_prefix(&cfg.bench_root)
                    .unwrap_or(&dir)
                    .components()
                    .map(|c| c.as_os_str().to_string_lossy().into_owned())
                    .collect::<Vec<_>>()
                    .join("/");
                match load_bundle(&dir) {
                    Ok(mut b) => {
                        b.id = id;
                        b.domain_name = domain.clone();
                        b.observability = *pct;
                        bundles.push(b);
                    }
                    Err(e) => {
                        log::error!("{e}");
                        failures.push(LoadFailure {
                            path: id,
                            error: e.to_string(),
                        });
                    }
                }
            }
        }
    }
    bundles.sort_by(|a, b| a.id.cmp(&b.id));
    if bundles.is_empty() && failures.is_empty() {
        return Err(EvalError::NoBundles(cfg.bench_root.clone()));
    }
    Ok((bundles, failures))
}

fn build_recognizers<'a>(cfg: &'a RunConfig, transcripts: &Path) -> Result<Vec<Recognizer<'a>>, EvalError> {
    let mut out: Vec<Recognizer> = Vec::new();
    let mut llm_names: Vec<&str> = Vec::new();
    let push = |r: Recognizer<'a>, out: &mut Vec<Recognizer<'a>>| {
        if !out.iter().any(|x| x.id() == r.id()) {
            out.push(r);
        }
    };
    for spec in &cfg.recognizers {
        match spec {
            RecognizerSpec::Lm => push(Recognizer::Lm, &mut out),
            RecognizerSpec::Uniform => push(Recognizer::Uniform, &mut out),
            RecognizerSpec::Llm(name) => llm_names.push(name),
            RecognizerSpec::All => {
                push(Recognizer::Lm, &mut out);
                push(Recognizer::Uniform, &mut out);
                if let Some(p) = &cfg.providers {
                    llm_names.extend(p.0.keys().map(String::as_str));
                }
            }
        }
    }
    llm_names.sort();
    llm_names.dedup();
    for name in llm_names {
        let providers = cfg
            .providers
            .as_ref()
            .ok_or_else(|| EvalError::NoProviders(format!("llm:{name}")))?;
        let provider = providers.get(name)?;
        let base: Box<dyn ChatClient> = match &cfg.replay {
            Some(dir) => Box::new(ReplayClient::new(dir)),
            None => Box::new(HttpClient::new(provider)?),
        };
        let mut client: Box<dyn ChatClient> =
            Box::new(RecordingClient::new(base, transcripts).map_err(io_err(transcripts))?);
        if let Some(rec) = &cfg.record {
            client = Box::new(RecordingClient::new(client, rec).map_err(io_err(rec))?);
        }
        out.push(Recognizer::Llm {
            provider,
            client,
            gate: Semaphore::new(provider.concurrency),
        });
    }
    if out.is_empty() {
        return Err(EvalError::NoRecognizers);
    }
    Ok(out)
}

/// Evaluates every selected recogniser on every bundle and writes
/// `per_problem.csv`, `summary.csv`, `summary.md`, `manifest.json` and
/// `transcripts/` under `<out>/<run_id>/`.
pub fn run_eval(cfg: &RunConfig) -> Result<RunOutcome, EvalError> {
    if cfg.domains.is_empty() {
        return Err(EvalError::NoDomains);
    }
    if cfg.observability.is_empty() {
        return Err(EvalError::NoObservability);
    }
    if cfg.recognizers.is_empty() {
        return Err(EvalError::NoRecognizers);
    }
    let run_dir = cfg.out.join(&cfg.run_id);
    let transcripts = run_dir.join("transcripts");
    std::fs::create_dir_all(&transcripts).map_err(io_err(&transcripts))?;

    let recognizers = build_recognizers(cfg, &transcripts)?;
    let (bundles, load_errors) = load_suite(cfg)?;
    log::info!("{} bundles, {} recognisers", bundles.len(), recognizers.len());

    let store = LandmarkStore {
        cells: Mutex::new(HashMap::new()),
        disk: cfg.lm_cache.as_ref().map(LandmarkCache::new),
    };
    let tasks: Vec<(usize, usize)> = (0..recognizers.len())
        .flat_map(|r| (0..bundles.len()).map(move |b| (r, b)))
        .collect();
    let per_problem = parallel_map(&tasks, cfg.jobs, |&(r, b)| {
        let result = recognize(&recognizers[r], &bundles[b], &store);
        score_problem(&result, &bundles[b])
    });
    let summary = aggregate(&per_problem);

    write_atomic(&run_dir.join("per_problem.csv"), &per_problem_csv(&per_problem))?;
    write_atomic(&run_dir.join("summary.csv"), &emit_report(&summary, ReportFormat::Csv))?;
    write_atomic(&run_dir.join("summary.md"), &emit_report(&summary, ReportFormat::Markdown))?;
    let manifest = Manifest {
        run_id: &cfg.run_id,
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        bench_root: cfg.bench_root.display().to_string(),
        domains: &cfg.domains,
        observability: cfg.observability.iter().map(|o| o.pct()).collect(),
        recognizers: recognizers.iter().map(Recognizer::id).collect(),
        jobs: cfg.jobs,
        providers: recognizers
            .iter()
            .filter_map(|r| match r {
                Recognizer::Llm { provider, .. } => Some(*provider),
                _ => None,
            })
            .collect(),
        replay: cfg.replay.as_ref().map(|p| p.display().to_string()),
        bundles: bundles.iter().map(|b| (b.id.as_str(), content_hash(b))).collect(),
        load_errors: &load_errors,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serialises") + "\n";
    write_atomic(&run_dir.join("manifest.json"), &json)?;

    Ok(RunOutcome {
        run_dir,
        per_problem,
        summary,
        load_errors,
    })
}
