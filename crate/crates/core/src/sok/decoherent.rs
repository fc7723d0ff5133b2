//! Parse-and-store record for decoherent-quantum representatives. No
//! algebra or order decisions are defined on it.

use crate::numerics::eigen::C64;

/// Amplitudes `Ψ[d][e][m]` over a decohering space `D`, the environment and memory.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoherentRecord {
    pub env: Vec<String>,
    pub d_dim: usize,
    pub m_dim: usize,
    pub psi: Vec<Vec<Vec<C64>>>,
}

impl DecoherentRecord {
    pub fn shape_ok(&self) -> bool {
        self.psi.len() == self.d_dim
            && self.psi.iter().all(|block| {
                block.len() == self.env.len() && block.iter().all(|row| row.len() == self.m_dim)
            })
    }
}
