use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use goalrec::bundle::{expand_problem, load_bundle, validate_bundle};
use goalrec::eval::{emit_report, run_eval, RecognizerSpec, ReportFormat, RunConfig};
use goalrec::grounding::{ground_relevant, validate_plan_from, PlanValidation, State};
use goalrec::landmarks::{cache_key, extract_for_template, LandmarkCache};
use goalrec::obs_gen::{generate_benchmark_obs, Observability};
use goalrec::pddl::{
    parse_actions, parse_domain, parse_fact_line, parse_hypotheses, parse_problem, parse_problem_template,
    render_actions, render_domain, render_problem, render_template, PLACEHOLDER,
};
use goalrec::recognizer_llm::{build_prompt, recognize_llm, ChatClient, HttpClient, ProviderSet, RecordingClient, ReplayClient};
use goalrec::recognizer_lm::{recognize_lm, recognize_uniform};
use goalrec::suite::{write_suite, SuiteConfig};

/// Goal recognition over typed STRIPS PDDL.
#[derive(Parser)]
#[command(name = "goalrec", version)]
struct Cli {
    /// More log output on stderr (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a domain, problem template or problem and print a summary.
    Parse {
        file: PathBuf,
        /// Print the canonical PDDL instead of the JSON summary.
        #[arg(long)]
        render: bool,
    },
    /// Ground a domain against a problem or template.
    Ground {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long)]
        problem: PathBuf,
    },
    /// Extract action landmarks for every hypothesis.
    Landmarks {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long)]
        template: PathBuf,
        #[arg(long)]
        hyps: PathBuf,
        /// Directory for the landmark cache.
        #[arg(long)]
        cache: Option<PathBuf>,
        /// Print a readable listing instead of JSON.
        #[arg(long)]
        text: bool,
    },
    /// Sample observation files from a plan.
    GenObs {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long)]
        template: PathBuf,
        #[arg(long)]
        real_hyp: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = Observability::ALL)]
        obs: Vec<Observability>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one recogniser on one bundle.
    Recognize {
        bundle: PathBuf,
        #[arg(long, default_value = "lm")]
        recognizer: RecognizerSpec,
        #[command(flatten)]
        llm: LlmArgs,
    },
    /// Evaluate recognisers over a benchmark tree.
    Eval(EvalArgs),
    /// Check a bundle: typing, real goal, observations and plan.
    Validate { bundle: PathBuf },
    /// Write a random blocks-world suite.
    GenSuite {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 50)]
        problems: usize,
        #[arg(long, value_delimiter = ',', default_values_t = Observability::ALL)]
        obs: Vec<Observability>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Expand a solved problem (domain, template, hyps, real_hyp, plan) into
    /// benchmark bundles at every observability level.
    GenBundles {
        /// Directory with the five source files.
        #[arg(long)]
        source: PathBuf,
        /// Domain directory name in the benchmark tree.
        #[arg(long)]
        domain_name: String,
        /// Problem name; defaults to the source directory name.
        #[arg(long)]
        problem: Option<String>,
        #[arg(long, value_delimiter = ',', default_values_t = Observability::ALL)]
        obs: Vec<Observability>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the model prompt for a bundle.
    Prompt { bundle: PathBuf },
}

#[derive(Args)]
struct LlmArgs {
    /// Provider file (TOML, or JSON by extension).
    #[arg(long)]
    providers: Option<PathBuf>,
    /// Answer model calls from this transcript directory only.
    #[arg(long)]
    replay: Option<PathBuf>,
    /// Also store model responses in this directory.
    #[arg(long)]
    record: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    bench_root: PathBuf,
    /// Comma-separated domain directories; all when omitted.
    #[arg(long, value_delimiter = ',')]
    domains: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',', default_values_t = Observability::ALL)]
    obs: Vec<Observability>,
    /// lm, uniform, llm:<provider> or all; repeatable or comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "lm")]
    recognizer: Vec<RecognizerSpec>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = default_jobs())]
    jobs: usize,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Name of the run directory; defaults to run-<unix seconds>.
    #[arg(long)]
    run_id: Option<String>,
    #[arg(long)]
    lm_cache: Option<PathBuf>,
    /// Format of the summary printed on stdout.
    #[arg(long, value_enum, default_value = "json")]
    format: ReportFormat,
    #[command(flatten)]
    llm: LlmArgs,
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn print_text(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn print_json(v: &impl serde::Serialize) -> Result<()> {
    print_text(&(serde_json::to_string_pretty(v)? + "\n"))
}

fn cmd_parse(file: &Path, render: bool) -> Result<()> {
    let text = read(file)?;
    let lower = text.to_lowercase();
    if lower.contains("(domain") && !lower.contains("(:domain") {
        let d = parse_domain(&text)?;
        if render {
            print_text(&render_domain(&d))?;
            return Ok(());
        }
        return print_json(&json!({
            "kind": "domain",
            "name": d.name.as_str(),
            "requirements": d.requirements.iter().map(|r| r.keyword()).collect::<Vec<_>>(),
            "types": d.types.decls.len(),
            "constants": d.constants.len(),
            "predicates": d.predicates.len(),
            "actions": d.actions.iter().map(|a| a.name.as_str()).collect::<Vec<_>>(),
        }));
    }
    if text.to_uppercase().contains(PLACEHOLDER) {
        let t = parse_problem_template(&text)?;
        if render {
            print_text(&render_template(&t))?;
            return Ok(());
        }
        return print_json(&json!({
            "kind": "template",
            "name": t.name.as_str(),
            "domain": t.domain.as_str(),
            "objects": t.objects.len(),
            "init": t.init.len(),
        }));
    }
    let p = parse_problem(&text)?;
    if render {
        print_text(&render_problem(&p))?;
        return Ok(());
    }
    print_json(&json!({
        "kind": "problem",
        "name": p.name.as_str(),
        "domain": p.domain.as_str(),
        "objects": p.objects.len(),
        "init": p.init.len(),
        "goal": p.goal.len(),
    }))
}

fn cmd_ground(domain: &Path, problem: &Path) -> Result<()> {
    let d = parse_domain(&read(domain)?)?;
    let text = read(problem)?;
    let (objects, init) = if text.to_uppercase().contains(PLACEHOLDER) {
        let t = parse_problem_template(&text)?;
        (t.check(&d)?, t.init)
    } else {
        let p = parse_problem(&text)?;
        (p.check(&d)?, p.init)
    };
    let all = goalrec::grounding::ground(&d, &objects);
    let relevant = ground_relevant(&d, &objects, &State::new(init));
    print_json(&json!({
        "ground_actions": all.len(),
        "relevant_actions": relevant.len(),
        "actions": all.iter().map(|a| a.label.to_string()).collect::<Vec<_>>(),
    }))
}

fn cmd_landmarks(domain: &Path, template: &Path, hyps: &Path, cache: Option<&Path>, text: bool) -> Result<()> {
    let d = parse_domain(&read(domain)?)?;
    let t = parse_problem_template(&read(template)?)?;
    let h = parse_hypotheses(&read(hyps)?)?;
    let objects = t.check(&d)?;
    for hyp in &h {
        for f in &hyp.facts {
            d.check_fact(f, &objects)?;
        }
    }
    let key = cache_key(&d, &t, &h);
    let cache = cache.map(LandmarkCache::new);
    let (sets, seconds, ground_actions) = match cache.as_ref().and_then(|c| c.load(&key)) {
        Some(sets) => (sets, None, None),
        None => {
            let r = extract_for_template(&d, &t, &h)?;
            (r.sets, Some(r.seconds), Some(r.ground_actions))
        }
    };
    let cache_file = match &cache {
        Some(c) => Some(c.store(&key, &sets)?),
        None => None,
    };
    if text {
        for (hyp, s) in h.iter().zip(&sets) {
            print_text(&format!("{}\n", hyp.to_line()))?;
            if s.unreachable {
                print_text("  unreachable\n")?;
            }
            for a in &s.actions {
                print_text(&format!("  {a}\n"))?;
            }
        }
        return Ok(());
    }
    print_json(&json!({
        "key": key,
        "cache_file": cache_file,
        "seconds": seconds,
        "ground_actions": ground_actions,
        "sets": sets,
    }))
}

#[allow(clippy::too_many_arguments)]
fn cmd_gen_obs(
    domain: &Path,
    template: &Path,
    real_hyp: &Path,
    plan: &Path,
    obs: &[Observability],
    seed: u64,
    out: &Path,
) -> Result<()> {
    let d = parse_domain(&read(domain)?)?;
    let t = parse_problem_template(&read(template)?)?;
    let objects = t.check(&d)?;
    let real_text = read(real_hyp)?;
    let goal = parse_fact_line(real_text.lines().find(|l| !l.trim().is_empty()).unwrap_or(""))?;
    let plan = parse_actions(&read(plan)?)?;
    match validate_plan_from(&d, &objects, &State::new(t.init.iter().cloned()), &plan)? {
        PlanValidation::Valid { final_state } if final_state.satisfies(&goal.facts) => {}
        PlanValidation::Valid { .. } => bail!("the plan does not reach the real goal"),
        PlanValidation::Invalid { step, action, .. } => bail!("plan step {step} {action} is not applicable"),
    }
    fs::create_dir_all(out)?;
    let mut written = Vec::new();
    for &pct in obs {
        for (k, o) in generate_benchmark_obs(&plan, pct, seed).into_iter().enumerate() {
            let path = out.join(format!("obs-{}-{k}.dat", pct.pct()));
            fs::write(&path, render_actions(&o.labels))?;
            written.push(json!({"path": path, "observability": pct, "indices": o.source_indices}));
        }
    }
    print_json(&written)
}

fn llm_client(args: &LlmArgs, provider: &goalrec::recognizer_llm::ProviderConfig) -> Result<Box<dyn ChatClient>> {
    let mut client: Box<dyn ChatClient> = match &args.replay {
        Some(dir) => Box::new(ReplayClient::new(dir)),
        None => Box::new(HttpClient::new(provider)?),
    };
    if let Some(dir) = &args.record {
        client = Box::new(RecordingClient::new(client, dir)?);
    }
    Ok(client)
}

fn load_providers(path: Option<&Path>) -> Result<Option<ProviderSet>> {
    path.map(|p| ProviderSet::load(p).map_err(Into::into)).transpose()
}

fn cmd_recognize(bundle: &Path, spec: &RecognizerSpec, llm: &LlmArgs) -> Result<()> {
    let b = load_bundle(bundle)?;
    let result = match spec {
        RecognizerSpec::Lm => {
            let lms = extract_for_template(&b.domain, &b.template, &b.hypotheses)?;
            let mut r = recognize_lm(&b, &lms.sets)?;
            r.extract_time = Some(lms.seconds);
            r
        }
        RecognizerSpec::Uniform => recognize_uniform(&b),
        RecognizerSpec::Llm(name) => {
            let providers = load_providers(llm.providers.as_deref())?.ok_or_else(|| anyhow!("--providers is required for {name}"))?;
            let provider = providers.get(name)?;
            let client = llm_client(llm, provider)?;
            recognize_llm(&b, provider, client.as_ref())
        }
        RecognizerSpec::All => bail!("recognize runs a single recogniser"),
    };
    print_json(&result)
}

fn cmd_eval(a: EvalArgs) -> Result<ExitCode> {
    let domains = match a.domains {
        Some(ds) => ds.into_iter().map(|d| d.trim().to_string()).filter(|d| !d.is_empty()).collect(),
        None => {
            let mut ds: Vec<String> = fs::read_dir(&a.bench_root)
                .with_context(|| format!("reading {}", a.bench_root.display()))?
                .filter_map(|e| e.ok())
                .filter(|e| e.path().is_dir())
                .map(|e| e.file_name().to_string_lossy().into_owned())
                .collect();
            ds.sort();
            ds
        }
    };
    let run_id = a.run_id.unwrap_or_else(|| {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        format!("run-{secs}")
    });
    let cfg = RunConfig {
        bench_root: a.bench_root,
        domains,
        observability: a.obs,
        recognizers: a.recognizer,
        seed: a.seed,
        jobs: a.jobs.max(1),
        out: a.out,
        run_id,
        providers: load_providers(a.llm.providers.as_deref())?,
        replay: a.llm.replay,
        record: a.llm.record,
        lm_cache: a.lm_cache,
    };
    let outcome = run_eval(&cfg)?;
    log::info!("results in {}", outcome.run_dir.display());
    print_text(&emit_report(&outcome.summary, a.format))?;
    if outcome.load_errors.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        log::error!("{} bundle(s) failed to load", outcome.load_errors.len());
        Ok(ExitCode::from(3))
    }
}

fn cmd_validate(bundle: &Path) -> Result<ExitCode> {
    let checks = match load_bundle(bundle) {
        Ok(b) => validate_bundle(&b),
        Err(e) => vec![goalrec::bundle::Check {
            name: "load".into(),
            ok: false,
            detail: e.to_string(),
        }],
    };
    let ok = checks.iter().all(|c| c.ok);
    print_json(&json!({"bundle": bundle, "ok": ok, "checks": checks}))?;
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Parse { file, render } => cmd_parse(&file, render)?,
        Command::Ground { domain, problem } => cmd_ground(&domain, &problem)?,
        Command::Landmarks {
            domain,
            template,
            hyps,
            cache,
            text,
        } => cmd_landmarks(&domain, &template, &hyps, cache.as_deref(), text)?,
        Command::GenObs {
            domain,
            template,
            real_hyp,
            plan,
            obs,
            seed,
            out,
        } => cmd_gen_obs(&domain, &template, &real_hyp, &plan, &obs, seed, &out)?,
        Command::Recognize { bundle, recognizer, llm } => cmd_recognize(&bundle, &recognizer, &llm)?,
        Command::Eval(a) => return cmd_eval(a),
        Command::Validate { bundle } => return cmd_validate(&bundle),
        Command::GenSuite {
            out,
            problems,
            obs,
            seed,
        } => {
            let cfg = SuiteConfig {
                problems,
                observability: obs,
                seed,
                ..SuiteConfig::default()
            };
            let dirs = write_suite(&out, &cfg)?;
            print_json(&json!({"bundles": dirs.len(), "root": out}))?;
        }
        Command::GenBundles {
            source,
            domain_name,
            problem,
            obs,
            seed,
            out,
        } => {
            let problem = match problem {
                Some(p) => p,
                None => source
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .ok_or_else(|| anyhow!("cannot name problem from {}", source.display()))?,
            };
            let dirs = expand_problem(&source, &domain_name, &problem, &obs, seed, &out)?;
            print_json(&dirs)?;
        }
        Command::Prompt { bundle } => print_text(&build_prompt(&load_bundle(&bundle)?).prompt)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
