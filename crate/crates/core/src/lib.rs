//! Coevolutionary optimisation of impartial combinatorial games.
//!
//! * [`game`]: games as rooted DAGs, strategies, playouts.
//! * [`grundy`]: Sprague-Grundy values and optimality checks.
//! * [`games`]: benchmark families and fixture graphs.
//! * [`eda`]: the UMDA with binary tournament selection.
//! * [`switchability`]: switchers, depth, exact and bounded switchability.
//! * [`oracles`]: exact probabilities of the selection process.
//! * [`harness`]: experiments, CSV output, sweeps and plot descriptions.
//! * [`cli`]: the `coevo` command line.

pub mod cli;
pub mod eda;
pub mod game;
pub mod games;
pub mod grundy;
pub mod harness;
pub mod oracles;
pub mod switchability;

pub use game::{play, play_from, GameGraph, Strategy, Transcript, Vertex};
pub use grundy::{grundy_values, GrundyData};
