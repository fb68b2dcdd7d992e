//! On-disk recognition problems.
//!
//! A bundle directory holds `domain.pddl`, `template.pddl` (goal replaced by
//! `<HYPOTHESIS>`), `hyps.dat`, `real_hyp.dat` and `obs.dat`. Optional files:
//! `meta.json` (`{"domain": ..., "observability": ...}`) and `plan.dat`
//! (the full plan the observations were sampled from). Without `meta.json`
//! the observability is read from the parent directory name and the domain
//! label from the grandparent, i.e. `<root>/<domain>/<pct>/<bundle>/`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::obs_gen::Observability;
use crate::pddl::{
    parse_actions, parse_domain, parse_fact_line, parse_hypotheses, parse_problem_template, render_actions,
    render_hypotheses, ActionLabel, Domain, GoalHypothesis, PddlError, ProblemTemplate,
};

pub const DOMAIN_FILE: &str = "domain.pddl";
pub const TEMPLATE_FILE: &str = "template.pddl";
pub const HYPS_FILE: &str = "hyps.dat";
pub const REAL_HYP_FILE: &str = "real_hyp.dat";
pub const OBS_FILE: &str = "obs.dat";
pub const PLAN_FILE: &str = "plan.dat";
pub const META_FILE: &str = "meta.json";

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: PddlError,
    },
    #[error("{path}: {msg}")]
    Meta { path: PathBuf, msg: String },
    #[error("{0}: the real hypothesis is not among the candidate hypotheses")]
    RealGoalNotCandidate(PathBuf),
    #[error("{0}: no hypotheses")]
    NoHypotheses(PathBuf),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BundleMeta {
    pub domain: String,
    pub observability: Observability,
}

/// One goal recognition problem: domain, initial state (via the template),
/// candidate goals and observations. `true_goal_index` is for scoring only
/// and is never shown to a recogniser.
#[derive(Debug, Clone)]
pub struct RecognitionBundle {
    pub id: String,
    pub domain_name: String,
    pub domain: Domain,
    pub domain_text: String,
    pub template: ProblemTemplate,
    pub template_text: String,
    pub hypotheses: Vec<GoalHypothesis>,
    pub observations: Vec<ActionLabel>,
    pub true_goal_index: Option<usize>,
    pub observability: Observability,
    pub plan: Option<Vec<ActionLabel>>,
}

fn read(dir: &Path, name: &str) -> Result<String, BundleError> {
    let path = dir.join(name);
    fs::read_to_string(&path).map_err(|source| BundleError::Io { path, source })
}

fn parsed<T>(dir: &Path, name: &str, r: Result<T, PddlError>) -> Result<T, BundleError> {
    r.map_err(|source| BundleError::Parse {
        path: dir.join(name),
        source,
    })
}

fn infer_meta(dir: &Path) -> Result<BundleMeta, BundleError> {
    let meta_path = dir.join(META_FILE);
    if meta_path.exists() {
        let text = read(dir, META_FILE)?;
        return serde_json::from_str(&text).map_err(|e| BundleError::Meta {
            path: meta_path,
            msg: e.to_string(),
        });
    }
    let err = |msg: &str| BundleError::Meta {
        path: dir.to_path_buf(),
        msg: msg.to_string(),
    };
    let parent = dir.parent().ok_or_else(|| err("cannot infer observability"))?;
    let pct = parent
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| err("cannot infer observability"))?
        .parse::<Observability>()
        .map_err(|e| err(&e))?;
    let domain = parent
        .parent()
        .and_then(|p| p.file_name())
        .and_then(|n| n.to_str())
        .ok_or_else(|| err("cannot infer domain name"))?;
    Ok(BundleMeta {
        domain: domain.to_string(),
        observability: pct,
    })
}

/// Loads and binds a bundle. The real hypothesis must be one of the
/// candidates; every hypothesis and the template must be well-typed.
pub fn load_bundle(dir: &Path) -> Result<RecognitionBundle, BundleError> {
    let domain_text = read(dir, DOMAIN_FILE)?;
    let domain = parsed(dir, DOMAIN_FILE, parse_domain(&domain_text))?;
    let template_text = read(dir, TEMPLATE_FILE)?;
    let template = parsed(dir, TEMPLATE_FILE, parse_problem_template(&template_text))?;
    let objects = parsed(dir, TEMPLATE_FILE, template.check(&domain))?;
    let hypotheses = parsed(dir, HYPS_FILE, parse_hypotheses(&read(dir, HYPS_FILE)?))?;
    if hypotheses.is_empty() {
        return Err(BundleError::NoHypotheses(dir.to_path_buf()));
    }
    for h in &hypotheses {
        for f in &h.facts {
            parsed(dir, HYPS_FILE, domain.check_fact(f, &objects))?;
        }
    }
    let real_text = read(dir, REAL_HYP_FILE)?;
    let real_line = real_text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    let real = parsed(dir, REAL_HYP_FILE, parse_fact_line(real_line))?;
    let true_goal_index = hypotheses
        .iter()
        .position(|h| h.same_goal(&real))
        .ok_or_else(|| BundleError::RealGoalNotCandidate(dir.to_path_buf()))?;
    let observations = parsed(dir, OBS_FILE, parse_actions(&read(dir, OBS_FILE)?))?;
    let plan = if dir.join(PLAN_FILE).exists() {
        Some(parsed(dir, PLAN_FILE, parse_actions(&read(dir, PLAN_FILE)?))?)
    } else {
        None
    };
    let meta = infer_meta(dir)?;
    Ok(RecognitionBundle {
        id: dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        domain_name: meta.domain,
        domain,
        domain_text,
        template,
        template_text,
        hypotheses,
        observations,
        true_goal_index: Some(true_goal_index),
        observability: meta.observability,
        plan,
    })
}

fn write(dir: &Path, name: &str, text: &str) -> Result<(), BundleError> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|source| BundleError::Io { path, source })
}

pub fn write_bundle(dir: &Path, b: &RecognitionBundle) -> Result<(), BundleError> {
    fs::create_dir_all(dir).map_err(|source| BundleError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    write(dir, DOMAIN_FILE, &b.domain_text)?;
    write(dir, TEMPLATE_FILE, &b.template_text)?;
    write(dir, HYPS_FILE, &render_hypotheses(&b.hypotheses))?;
    if let Some(i) = b.true_goal_index {
        write(dir, REAL_HYP_FILE, &format!("{}\n", b.hypotheses[i].to_line()))?;
    }
    write(dir, OBS_FILE, &render_actions(&b.observations))?;
    if let Some(plan) = &b.plan {
        write(dir, PLAN_FILE, &render_actions(plan))?;
    }
    let meta = BundleMeta {
        domain: b.domain_name.clone(),
        observability: b.observability,
    };
    let json = serde_json::to_string_pretty(&meta).expect("meta serialises");
    write(dir, META_FILE, &(json + "\n"))
}

/// Content hash over the bundle files that define the problem.
pub fn content_hash(b: &RecognitionBundle) -> String {
    let mut h = Sha256::new();
    for part in [
        b.domain_text.as_str(),
        b.template_text.as_str(),
        &render_hypotheses(&b.hypotheses),
        &b.true_goal_index
            .map(|i| b.hypotheses[i].to_line())
            .unwrap_or_default(),
        &render_actions(&b.observations),
    ] {
        h.update(part.as_bytes());
        h.update([0u8]);
    }
    hex::encode(h.finalize())
}

/// Directories below `root` (inclusive) that contain a hypotheses file,
/// sorted by path.
pub fn discover_bundles(root: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut found = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        if dir.join(HYPS_FILE).is_file() {
            found.push(dir.clone());
        }
        for entry in fs::read_dir(&dir)? {
            let entry = entry?;
            if entry.file_type()?.is_dir() {
                stack.push(entry.path());
            }
        }
    }
    found.sort();
    Ok(found)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

fn check(name: &str, r: Result<String, String>) -> Check {
    let (ok, detail) = match r {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    Check {
        name: name.to_string(),
        ok,
        detail,
    }
}

fn is_subsequence(needle: &[ActionLabel], hay: &[ActionLabel]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|n| it.any(|h| h == n))
}

/// Diagnostics for a loaded bundle. Loading already checked parsing,
/// typing and membership of the real goal; these checks cover the
/// observations and, when present, the plan.
pub fn validate_bundle(b: &RecognitionBundle) -> Vec<Check> {
    use crate::grounding::{instantiate_action, validate_plan_from, PlanValidation, State};

    let mut out = vec![check("load", Ok(format!("{} hypotheses, {} observations", b.hypotheses.len(), b.observations.len())))];
    let objects = match b.template.check(&b.domain) {
        Ok(o) => o,
        Err(e) => {
            out.push(check("template", Err(e.to_string())));
            return out;
        }
    };
    let bad: Vec<String> = b
        .observations
        .iter()
        .filter_map(|l| instantiate_action(&b.domain, &objects, l).err().map(|e| format!("{l}: {e}")))
        .collect();
    out.push(check(
        "observations",
        if bad.is_empty() { Ok("every observation is a ground action".into()) } else { Err(bad.join("; ")) },
    ));
    if let (Some(plan), Some(g)) = (&b.plan, b.true_goal_index) {
        let init = State::new(b.template.init.iter().cloned());
        let r = match validate_plan_from(&b.domain, &objects, &init, plan) {
            Ok(PlanValidation::Valid { final_state }) if final_state.satisfies(&b.hypotheses[g].facts) => {
                Ok(format!("{} steps reach the real goal", plan.len()))
            }
            Ok(PlanValidation::Valid { .. }) => Err("plan does not reach the real goal".into()),
            Ok(PlanValidation::Invalid { step, action, missing }) => {
                let m: Vec<String> = missing.iter().map(|f| f.to_string()).collect();
                Err(format!("step {step} {action} misses {}", m.join(" ")))
            }
            Err(e) => Err(e.to_string()),
        };
        out.push(check("plan", r));
        out.push(check(
            "observations_in_plan",
            if is_subsequence(&b.observations, plan) {
                Ok("observations are a subsequence of the plan".into())
            } else {
                Err("observations are not a subsequence of the plan".into())
            },
        ));
    }
    out
}

/// Expands a solved problem into benchmark bundles. `source` holds
/// `domain.pddl`, `template.pddl`, `hyps.dat`, `real_hyp.dat` and
/// `plan.dat`; bundles go to `<root>/<domain_name>/<pct>/<problem>-d<k>`,
/// one per distinct observation draw. Observation seeds derive from `seed`
/// and `<problem>/<pct>`.
pub fn expand_problem(
    source: &Path,
    domain_name: &str,
    problem: &str,
    observability: &[Observability],
    seed: u64,
    root: &Path,
) -> Result<Vec<PathBuf>, BundleError> {
    use crate::obs_gen::{generate_benchmark_obs, problem_seed};

    // Load through the regular path with the full plan as observations, so
    // the same parsing and typing checks apply.
    let staging = tempfile::tempdir().map_err(|source| BundleError::Io {
        path: std::env::temp_dir(),
        source,
    })?;
    for f in [DOMAIN_FILE, TEMPLATE_FILE, HYPS_FILE, REAL_HYP_FILE, PLAN_FILE] {
        let from = source.join(f);
        fs::copy(&from, staging.path().join(f)).map_err(|source| BundleError::Io { path: from, source })?;
    }
    let plan_text = read(source, PLAN_FILE)?;
    write(staging.path(), OBS_FILE, &plan_text)?;
    let meta = BundleMeta {
        domain: domain_name.to_string(),
        observability: Observability::FULL,
    };
    write(staging.path(), META_FILE, &serde_json::to_string(&meta).expect("meta serialises"))?;
    let base = load_bundle(staging.path())?;
    let failed: Vec<Check> = validate_bundle(&base).into_iter().filter(|c| !c.ok).collect();
    if let Some(c) = failed.first() {
        return Err(BundleError::Meta {
            path: source.to_path_buf(),
            msg: format!("{}: {}", c.name, c.detail),
        });
    }
    let plan = base.plan.clone().unwrap_or_default();

    let mut dirs = Vec::new();
    for &pct in observability {
        let s = problem_seed(seed, &format!("{problem}/{}", pct.pct()));
        for (k, obs) in generate_benchmark_obs(&plan, pct, s).into_iter().enumerate() {
            let id = format!("{domain_name}/{}/{problem}-d{k}", pct.pct());
            let dir = root.join(&id);
            let b = RecognitionBundle {
                id,
                observations: obs.labels,
                observability: pct,
                ..base.clone()
            };
            write_bundle(&dir, &b)?;
            dirs.push(dir);
        }
    }
    Ok(dirs)
}
