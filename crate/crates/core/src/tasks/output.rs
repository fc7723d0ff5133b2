//! Feasible outputs: `{S_X | tr_X S_X ≤ S}`.

use crate::error::Result;
use crate::order::OrderVerdict;
use crate::sok::Knowledge;

/// Whether `candidate` over `E×X` is an output the agent can produce from `s`.
pub fn output_feasible<K: Knowledge>(s: &K, candidate: &K, register: &str) -> Result<OrderVerdict<K::Field>> {
    let marginal = candidate.partial_trace(register)?;
    s.env().ensure_same(marginal.env())?;
    marginal.leq(s)
}
