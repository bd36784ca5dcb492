//! Dyadic cube decompositions of finite quasi-metric measure spaces.
//!
//! The pipeline: validate a [`space::FiniteSpace`], derive the structural
//! constants in [`constants::ConstantLedger`], build maximal separated nets
//! per scale ([`nets`]), link them into a partial order ([`order`]),
//! materialize cubes as unions of descendant balls ([`cubes`]), and check
//! every claimed property exhaustively ([`verify`]). [`artifacts`] fixes the
//! on-disk formats so runs can be reloaded and re-verified byte-for-byte.

// bound checks are written as `!(x <= limit)` on purpose: a NaN produced by
// a bad distance must count as a violation, not slip past a `>` comparison
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod artifacts;
pub mod constants;
pub mod cubes;
pub mod cli;
pub mod error;
pub mod generators;
pub mod nets;
pub mod order;
pub mod space;
pub mod util;
pub mod verify;

#[cfg(test)]
pub(crate) mod testutil {
    use crate::constants::derive_constants;
    use crate::cubes::{materialize, Decomposition};
    use crate::nets::ScanOrder;
    use crate::space::{FiniteSpace, Metric};

    /// Eight unit-spaced collinear points with unit weights.
    pub(crate) fn line8() -> FiniteSpace {
        let ids = (0..8).map(|i| format!("p{i}")).collect();
        let coords = (0..8).map(|i| vec![i as f64]).collect();
        FiniteSpace::new(ids, Some(coords), Metric::Euclidean, vec![1.0; 8], 1.0).unwrap()
    }

    /// The line8 space materialized at delta = 1/144, a0 = 1/16.
    pub(crate) fn line8_decomposition() -> Decomposition {
        let ledger = derive_constants(1.0, Some(1.0 / 144.0), Some(1.0 / 16.0), false).unwrap();
        materialize(line8(), ledger, ScanOrder::ById, false).unwrap()
    }
}
