//! Random blocks-world recognition suites.
//!
//! Each problem has 3 to 6 blocks in random towers, 10 to 25 distinct tower
//! configurations as candidate goals, and a valid plan for one of them. The
//! plan moves only misplaced blocks: it clears everything above the lowest
//! misplaced block of each tower, then builds the goal towers bottom-up.

use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bundle::{write_bundle, BundleError, RecognitionBundle};
use crate::grounding::{validate_plan_from, PlanValidation, State};
use crate::obs_gen::{generate_benchmark_obs, problem_seed, Observability};
use crate::pddl::{
    parse_domain, parse_problem_template, ActionLabel, Domain, Fact, GoalHypothesis, Name, ProblemTemplate,
};

pub const BLOCKS_DOMAIN: &str = include_str!("../domains/blocks-world.pddl");
pub const BLOCKS_DOMAIN_NAME: &str = "blocks-world";

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub problems: usize,
    pub min_blocks: usize,
    pub max_blocks: usize,
    pub min_hyps: usize,
    pub max_hyps: usize,
    pub observability: Vec<Observability>,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            problems: 50,
            min_blocks: 3,
            max_blocks: 6,
            min_hyps: 10,
            max_hyps: 25,
            observability: Observability::ALL.to_vec(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedProblem {
    pub name: String,
    pub domain: Domain,
    pub template: ProblemTemplate,
    pub template_text: String,
    pub hypotheses: Vec<GoalHypothesis>,
    pub true_goal_index: usize,
    pub plan: Vec<ActionLabel>,
}

type Towers = Vec<Vec<usize>>;

fn name(s: &str) -> Name {
    Name::new(s).expect("generated names are valid")
}

fn fact(p: &str, args: &[&str]) -> Fact {
    Fact::new(name(p), args.iter().map(|a| name(a)).collect())
}

fn random_towers(blocks: &[usize], rng: &mut ChaCha8Rng) -> Towers {
    let mut order = blocks.to_vec();
    order.shuffle(rng);
    let mut towers: Towers = Vec::new();
    for b in order {
        // Start a new tower with probability 1/2, else go on top of the last.
        match towers.last_mut() {
            Some(t) if rng.random_bool(0.5) => t.push(b),
            _ => towers.push(vec![b]),
        }
    }
    towers
}

fn tower_facts(towers: &Towers, names: &[String]) -> Vec<Fact> {
    let mut facts = Vec::new();
    for t in towers {
        facts.push(fact("CLEAR", &[&names[*t.last().unwrap()]]));
        facts.push(fact("ONTABLE", &[&names[t[0]]]));
        for w in t.windows(2).rev() {
            facts.push(fact("ON", &[&names[w[1]], &names[w[0]]]));
        }
    }
    facts
}

fn random_goal(n: usize, rng: &mut ChaCha8Rng) -> Towers {
    let k = rng.random_range(2..=n);
    let mut blocks: Vec<usize> = (0..n).collect();
    blocks.shuffle(rng);
    blocks.truncate(k);
    random_towers(&blocks, rng)
}

/// Support of each block in a configuration: `None` for the table.
fn supports(towers: &Towers) -> HashMap<usize, Option<usize>> {
    let mut m = HashMap::new();
    for t in towers {
        for (i, &b) in t.iter().enumerate() {
            m.insert(b, if i == 0 { None } else { Some(t[i - 1]) });
        }
    }
    m
}

fn plan_for(init: &Towers, goal: &Towers, names: &[String]) -> Vec<ActionLabel> {
    let target = supports(goal);
    let label = |op: &str, args: &[usize]| {
        ActionLabel::new(name(op), args.iter().map(|&a| name(&names[a])).collect())
    };
    let mut plan = Vec::new();
    let mut on_table_or_kept = Vec::new();
    for t in init {
        // Lowest position whose support differs from the goal; blocks outside
        // the goal only stay put at the bottom of a tower.
        let mut keep = t.len();
        for (i, &b) in t.iter().enumerate() {
            let support = if i == 0 { None } else { Some(t[i - 1]) };
            let settled = match target.get(&b) {
                Some(want) => *want == support,
                None => i == 0,
            };
            if !settled {
                keep = i;
                break;
            }
        }
        let keep = keep.max(1);
        for i in (keep..t.len()).rev() {
            plan.push(label("UNSTACK", &[t[i], t[i - 1]]));
            plan.push(label("PUT-DOWN", &[t[i]]));
        }
        on_table_or_kept.push(t[..keep].to_vec());
    }
    let current = supports(&on_table_or_kept);
    for t in goal {
        for w in t.windows(2) {
            let (below, b) = (w[0], w[1]);
            if current.get(&b) != Some(&Some(below)) {
                plan.push(label("PICK-UP", &[b]));
                plan.push(label("STACK", &[b, below]));
            }
        }
    }
    plan
}

fn template_text(problem: &str, names: &[String], init: &[Fact]) -> String {
    let objects: Vec<String> = names.iter().map(|n| n.to_lowercase()).collect();
    let init: Vec<String> = init.iter().map(|f| f.to_string().to_lowercase()).collect();
    format!(
        "(define (problem {problem})\n  (:domain blocks)\n  (:objects {} - block)\n  (:init\n    {})\n  (:goal (and <HYPOTHESIS>)))\n",
        objects.join(" "),
        init.join("\n    ")
    )
}

/// One random problem. Deterministic in `seed`.
pub fn generate_blocks_problem(problem: &str, seed: u64, cfg: &SuiteConfig) -> GeneratedProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let domain = parse_domain(BLOCKS_DOMAIN).expect("bundled domain parses");
    let n = rng.random_range(cfg.min_blocks..=cfg.max_blocks);
    let names: Vec<String> = (0..n).map(|i| ((b'A' + i as u8) as char).to_string()).collect();
    let blocks: Vec<usize> = (0..n).collect();
    let init_towers = random_towers(&blocks, &mut rng);
    let mut init_facts = vec![fact("HANDEMPTY", &[])];
    init_facts.extend(tower_facts(&init_towers, &names));
    init_facts.sort();
    let init = State::new(init_facts.iter().cloned());

    let wanted = rng.random_range(cfg.min_hyps..=cfg.max_hyps);
    let mut seen = BTreeSet::new();
    let mut goals: Vec<Towers> = Vec::new();
    for _ in 0..20_000 {
        if goals.len() == wanted {
            break;
        }
        let g = random_goal(n, &mut rng);
        let key: BTreeSet<Fact> = tower_facts(&g, &names).into_iter().collect();
        if seen.insert(key) {
            goals.push(g);
        }
    }
    // The observed goal must not already hold, so the plan is nonempty.
    let candidates: Vec<usize> = (0..goals.len())
        .filter(|&i| !init.satisfies(&tower_facts(&goals[i], &names)))
        .collect();
    let true_goal_index = candidates[rng.random_range(0..candidates.len())];

    let hypotheses: Vec<GoalHypothesis> = goals
        .iter()
        .enumerate()
        .map(|(i, g)| GoalHypothesis::new(tower_facts(g, &names), i).expect("towers are nonempty"))
        .collect();
    let plan = plan_for(&init_towers, &goals[true_goal_index], &names);
    let text = template_text(problem, &names, &init_facts);
    let template = parse_problem_template(&text).expect("generated template parses");
    GeneratedProblem {
        name: problem.to_string(),
        domain,
        template,
        template_text: text,
        hypotheses,
        true_goal_index,
        plan,
    }
}

impl GeneratedProblem {
    /// Replays the plan and checks that it reaches the true goal.
    pub fn check_plan(&self) -> Result<(), String> {
        let objects = self.template.check(&self.domain).map_err(|e| e.to_string())?;
        let init = State::new(self.template.init.iter().cloned());
        match validate_plan_from(&self.domain, &objects, &init, &self.plan).map_err(|e| e.to_string())? {
            PlanValidation::Valid { final_state } if final_state.satisfies(&self.hypotheses[self.true_goal_index].facts) => {}
            PlanValidation::Valid { .. } => return Err(format!("{}: plan does not reach the goal", self.name)),
            PlanValidation::Invalid { step, .. } => return Err(format!("{}: step {step} is not applicable", self.name)),
        }
        Ok(())
    }

    pub fn bundle(&self, observability: Observability, observations: Vec<ActionLabel>, id: String) -> RecognitionBundle {
        RecognitionBundle {
            id,
            domain_name: BLOCKS_DOMAIN_NAME.to_string(),
            domain: self.domain.clone(),
            domain_text: BLOCKS_DOMAIN.to_string(),
            template: self.template.clone(),
            template_text: self.template_text.clone(),
            hypotheses: self.hypotheses.clone(),
            observations,
            true_goal_index: Some(self.true_goal_index),
            observability,
            plan: Some(self.plan.clone()),
        }
    }
}

/// Generates problems and bundles in memory. Problem `i` is named
/// `p<i+1>` (zero-padded to three digits); its draws at each observability
/// become bundles `<pct>/p001-d<k>`.
pub fn generate_suite(cfg: &SuiteConfig) -> Vec<RecognitionBundle> {
    let mut out = Vec::new();
    for i in 0..cfg.problems {
        let problem = format!("p{:03}", i + 1);
        let p = generate_blocks_problem(&problem, problem_seed(cfg.seed, &problem), cfg);
        debug_assert!(p.check_plan().is_ok());
        for &pct in &cfg.observability {
            let seed = problem_seed(cfg.seed, &format!("{problem}/{}", pct.pct()));
            for (k, obs) in generate_benchmark_obs(&p.plan, pct, seed).into_iter().enumerate() {
                let id = format!("{BLOCKS_DOMAIN_NAME}/{}/{problem}-d{k}", pct.pct());
                out.push(p.bundle(pct, obs.labels, id));
            }
        }
    }
    out
}

/// Writes a generated suite under `root` and returns the bundle directories.
pub fn write_suite(root: &Path, cfg: &SuiteConfig) -> Result<Vec<PathBuf>, BundleError> {
    let mut dirs = Vec::new();
    for b in generate_suite(cfg) {
        let dir = root.join(&b.id);
        write_bundle(&dir, &b)?;
        dirs.push(dir);
    }
    Ok(dirs)
}
