//! Tensor-product layouts of truncated bosonic modes and Dicke ladders.
//!
//! Factors are Kronecker-ordered with the first factor most significant. The
//! full model uses `pump ⊗ signal ⊗ spin`, the effective model `pump ⊗ spin`.
//! Within a spin factor, basis index `k` is the Dicke state `|l, m = k - l⟩`,
//! so index 0 is the collective ground state.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// One tensor factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Factor {
    /// Fock space `|0⟩ … |cutoff⟩`.
    Boson { cutoff: usize },
    /// Symmetric Dicke ladder of `n` two-level atoms, `l = n / 2`.
    Spin { n: usize },
}

impl Factor {
    pub fn dim(&self) -> usize {
        match *self {
            Factor::Boson { cutoff } => cutoff + 1,
            Factor::Spin { n } => n + 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceLayout {
    factors: Vec<Factor>,
}

impl SpaceLayout {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return invalid("layout needs at least one factor");
        }
        for f in &factors {
            match *f {
                Factor::Boson { cutoff } if cutoff < 1 => {
                    return invalid(format!("boson cutoff must be >= 1, got {cutoff}"))
                }
                Factor::Spin { n } if n < 1 => return invalid(format!("spin atom count must be >= 1, got {n}")),
                _ => {}
            }
        }
        Ok(Self { factors })
    }

    /// Single-factor layout.
    pub fn single(f: Factor) -> Result<Self> {
        Self::new(vec![f])
    }

    pub fn full(pump_cutoff: usize, signal_cutoff: usize, n: usize) -> Result<Self> {
        Self::new(vec![
            Factor::Boson { cutoff: pump_cutoff },
            Factor::Boson { cutoff: signal_cutoff },
            Factor::Spin { n },
        ])
    }

    pub fn effective(pump_cutoff: usize, n: usize) -> Result<Self> {
        Self::new(vec![Factor::Boson { cutoff: pump_cutoff }, Factor::Spin { n }])
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(Factor::dim).product()
    }

    pub fn factor_dim(&self, slot: usize) -> usize {
        self.factors[slot].dim()
    }

    /// Product of the dimensions of the factors before / after `slot`.
    pub fn split_dims(&self, slot: usize) -> (usize, usize) {
        let left = self.factors[..slot].iter().map(Factor::dim).product();
        let right = self.factors[slot + 1..].iter().map(Factor::dim).product();
        (left, right)
    }

    /// The pump is the first bosonic factor.
    pub fn pump_slot(&self) -> Option<usize> {
        self.factors.iter().position(|f| matches!(f, Factor::Boson { .. }))
    }

    /// The signal mode is the second bosonic factor.
    pub fn signal_slot(&self) -> Option<usize> {
        self.factors.iter().enumerate().filter(|(_, f)| matches!(f, Factor::Boson { .. })).nth(1).map(|(i, _)| i)
    }

    pub fn spin_slot(&self) -> Option<usize> {
        self.factors.iter().position(|f| matches!(f, Factor::Spin { .. }))
    }

    pub fn atom_count(&self) -> Option<usize> {
        self.spin_slot().map(|s| match self.factors[s] {
            Factor::Spin { n } => n,
            Factor::Boson { .. } => unreachable!(),
        })
    }

    /// Layout with factor `slot` removed.
    pub fn without(&self, slot: usize) -> Result<Self> {
        let mut f = self.factors.clone();
        f.remove(slot);
        Self::new(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_is_product() {
        let l = SpaceLayout::full(3, 2, 4).unwrap();
        assert_eq!(l.dim(), 4 * 3 * 5);
        assert_eq!(l.split_dims(1), (4, 5));
        assert_eq!(l.pump_slot(), Some(0));
        assert_eq!(l.signal_slot(), Some(1));
        assert_eq!(l.spin_slot(), Some(2));
        assert_eq!(l.atom_count(), Some(4));
    }

    #[test]
    fn rejects_degenerate_factors() {
        assert!(SpaceLayout::single(Factor::Boson { cutoff: 0 }).is_err());
        assert!(SpaceLayout::single(Factor::Spin { n: 0 }).is_err());
        assert!(SpaceLayout::new(vec![]).is_err());
    }

    #[test]
    fn effective_layout_has_no_signal() {
        let l = SpaceLayout::effective(5, 2).unwrap();
        assert_eq!(l.signal_slot(), None);
        assert_eq!(l.without(0).unwrap().dim(), 3);
    }
}
