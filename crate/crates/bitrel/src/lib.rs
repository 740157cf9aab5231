//! Congruence invariant extraction for bit-blasted instruction sequences.
//!
//! The pipeline: a toy machine program is translated to a propositional
//! relation between input and output register bits (`machine`, `blast`), a
//! small CDCL engine enumerates models of that relation (`sat`), and the
//! inference loop abstracts the model set into the most precise system of
//! linear congruences mod 2^w (`modlin`, `domain`, `infer`). Control-flow
//! graphs get per-block invariants by worklist propagation (`fixpoint`).

pub mod blast;
pub mod cnf;
pub mod domain;
pub mod infer;
pub mod machine;
pub mod modlin;
pub mod sat;
