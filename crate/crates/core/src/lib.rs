pub mod pddl;
pub mod grounding;
pub mod landmarks;
pub mod obs_gen;
pub mod bundle;
pub mod result;
pub mod recognizer_lm;
pub mod recognizer_llm;
pub mod eval;
pub mod suite;
