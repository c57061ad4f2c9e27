//! Graph constructions, step-graphon kernel algebra and homomorphism-density
//! evaluation for Sidorenko- and KNRS-type inequalities, with randomized
//! verification suites and a gradient search for counterexamples.

pub mod graphs;
pub mod homdensity;
pub mod rational;
pub mod search;
pub mod stepgraphon;
pub mod verify;
