//! Convex optimization tasks over states of knowledge.

pub mod adversary;
mod build;
pub mod dictionary;
pub mod distance;
pub mod output;
pub mod payoff;
pub mod universal;

pub use adversary::{adversary_classical, adversary_quantum, verify_adversary, AdvSettings, AdversaryResult, Soundness};
pub use dictionary::Dictionary;
pub use distance::{trace_distance_classical, trace_distance_quantum, trace_distance_quantum_psd};
pub use output::output_feasible;
pub use payoff::{payoff_average, payoff_average_quantum, payoff_worstcase, payoff_worstcase_quantum, PayoffSpec, WorstCase};
pub use universal::{build_universal_algorithm, run_universal_classical, RepresentativeRun, UniversalPlan};
