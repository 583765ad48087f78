//! Trust game toolkit.
//!
//! * [`game`]: parameters, trustee policies and payoffs.
//! * [`oracle`]: the transfer fraction that maximizes the trustor's expected
//!   wealth, and the closed-form verdict for power-law trustees.
//! * [`agent`]: a Thompson-Sampling trustor that learns the trustee's return
//!   probability arm by arm.
//! * [`experiment`]: seeded, parallel batches of agents and their choice
//!   frequency curves.
//! * [`output`] and [`cli`]: file formats and the `trust-game` command.
//!
//! ```
//! use trust_game::game::{ActionGrid, TrusteePolicy};
//! use trust_game::oracle::{grid_argmax, Classification};
//!
//! let trustee = TrusteePolicy::power_law(1.0, 1, 0.5, 1)?;
//! let verdict = grid_argmax(&trustee, 3.0, &ActionGrid::tenths())?;
//! assert_eq!(verdict.classification, Classification::FullTrust);
//! assert_eq!(verdict.optimal_set, vec![10]);
//! # Ok::<(), trust_game::Error>(())
//! ```

pub mod agent;
pub mod cli;
pub mod error;
pub mod experiment;
pub mod game;
pub mod oracle;
pub mod output;
pub mod rng;

pub use error::{Error, Result};

// Compile and run the guide's code blocks as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/game.md")]
    mod game {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/agent.md")]
    mod agent {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
