//! On-disk landmark cache, one file per (domain, template, hypotheses)
//! content hash.
//!
//! File format, one record per hypothesis with fields separated by single
//! tabs (shown here as spaces):
//!
//! ```text
//! # goalrec landmarks v1
//! 0 reachable (PICK-UP A) (STACK A B)
//! 1 unreachable
//! ```

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::LandmarkSet;
use crate::pddl::{parse_action_line, render_domain, render_template, Domain, GoalHypothesis, ProblemTemplate};

const HEADER: &str = "# goalrec landmarks v1";

pub fn cache_key(domain: &Domain, template: &ProblemTemplate, hypotheses: &[GoalHypothesis]) -> String {
    let mut h = Sha256::new();
    h.update(render_domain(domain).as_bytes());
    h.update([0u8]);
    h.update(render_template(template).as_bytes());
    for hyp in hypotheses {
        h.update([0u8]);
        h.update(hyp.to_line().as_bytes());
    }
    hex::encode(h.finalize())
}

pub fn render_sets(sets: &[LandmarkSet]) -> String {
    let mut out = format!("{HEADER}\n");
    for s in sets {
        out.push_str(&s.goal_index.to_string());
        out.push('\t');
        out.push_str(if s.unreachable { "unreachable" } else { "reachable" });
        for a in &s.actions {
            out.push('\t');
            out.push_str(&a.to_string());
        }
        out.push('\n');
    }
    out
}

pub fn parse_sets(text: &str) -> Result<Vec<LandmarkSet>, String> {
    let mut lines = text.lines();
    if lines.next() != Some(HEADER) {
        return Err("missing cache header".into());
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let mut fields = line.split('\t');
            let goal_index = fields
                .next()
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| format!("bad goal index in `{line}`"))?;
            let unreachable = match fields.next() {
                Some("reachable") => false,
                Some("unreachable") => true,
                _ => return Err(format!("bad flag in `{line}`")),
            };
            let actions = fields
                .map(|f| parse_action_line(f).map_err(|e| e.to_string()))
                .collect::<Result<_, _>>()?;
            Ok(LandmarkSet {
                goal_index,
                actions,
                unreachable,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct LandmarkCache {
    dir: PathBuf,
}

impl LandmarkCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        LandmarkCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.lm"))
    }

    /// A missing or unreadable entry is a miss.
    pub fn load(&self, key: &str) -> Option<Vec<LandmarkSet>> {
        let text = fs::read_to_string(self.path_for(key)).ok()?;
        match parse_sets(&text) {
            Ok(sets) => Some(sets),
            Err(e) => {
                log::warn!("ignoring corrupt landmark cache entry {key}: {e}");
                None
            }
        }
    }

    /// Writes to a temporary file in the cache directory and renames it into
    /// place, so concurrent writers never expose a partial entry.
    pub fn store(&self, key: &str, sets: &[LandmarkSet]) -> io::Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(render_sets(sets).as_bytes())?;
        let path = self.path_for(key);
        tmp.persist(&path).map_err(|e| e.error)?;
        Ok(path)
    }
}
