//! Propositional provability logic toolkit: classical synthesis, GL
//! decision, extension provers, Kripke surgery and arithmetic witness
//! simulators.

pub mod classical;
pub mod extensions;
pub mod fghsim;
pub mod formula;
pub mod glprover;
pub mod kripke;
pub mod surgery;

pub use formula::{parse_formula, print_formula, Formula};
pub use glprover::{gl_proves, Verdict};
pub use kripke::KripkeModel;
