//! Laws of nature, evolution of states of knowledge, and worked scenarios.

pub mod coin;
pub mod law;
pub mod series;
pub mod simulate;

pub use coin::{coin_golden, coin_scenario, lazy_observation, CoinGolden, CoinScenario};
pub use law::{
    observation_multiplier, output_index, ClassicalLaw, Law, LawOfNature, QuantumLaw, INPUT_REGISTER, OUTPUT_REGISTER,
};
pub use series::{poisson_series, PoissonSeries, SeriesTruncation};
pub use simulate::{check_idle, constant_plan, simulate, step, AlgorithmPlan, SimulationTrace};
