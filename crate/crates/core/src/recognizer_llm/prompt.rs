use serde::Serialize;

use crate::bundle::RecognitionBundle;

/// The zero-shot template with its four placeholders.
pub const TEMPLATE: &str = include_str!("template.txt");

const SLOTS: [&str; 4] = ["{problem.domain}", "{problem.template}", "{goals_text}", "{obs_text}"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PromptBundle {
    pub domain: String,
    pub template: String,
    pub goals_text: String,
    pub obs_text: String,
    pub prompt: String,
}

/// Fills the template. The domain and problem texts are the bundle files
/// as written, minus trailing whitespace; hypotheses and observations are
/// one per line in bundle order.
pub fn build_prompt(bundle: &RecognitionBundle) -> PromptBundle {
    let domain = bundle.domain_text.trim_end().to_string();
    let template = bundle.template_text.trim_end().to_string();
    let goals_text = bundle
        .hypotheses
        .iter()
        .map(|h| h.to_line())
        .collect::<Vec<_>>()
        .join("\n");
    let obs_text = bundle
        .observations
        .iter()
        .map(|a| a.to_string())
        .collect::<Vec<_>>()
        .join("\n");
    let prompt = fill(TEMPLATE, [&domain, &template, &goals_text, &obs_text]);
    PromptBundle {
        domain,
        template,
        goals_text,
        obs_text,
        prompt,
    }
}

// Single pass over the template, so placeholder-like text inside the
// substituted values is never expanded.
fn fill(template: &str, values: [&str; 4]) -> String {
    let mut out = String::with_capacity(template.len() + values.iter().map(|v| v.len()).sum::<usize>());
    let mut rest = template;
    loop {
        let next = SLOTS
            .iter()
            .enumerate()
            .filter_map(|(i, s)| rest.find(s).map(|at| (at, i)))
            .min();
        match next {
            Some((at, i)) => {
                out.push_str(&rest[..at]);
                out.push_str(values[i]);
                rest = &rest[at + SLOTS[i].len()..];
            }
            None => {
                out.push_str(rest);
                return out;
            }
        }
    }
}
