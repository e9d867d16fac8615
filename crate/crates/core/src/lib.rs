//! Speed-accuracy tradeoff models for sensorimotor control.
//!
//! The pieces, from the bottom up:
//!
//! - [`dynamics`]: the error loop `x(t+1) = x(t) + w(t) + u(t)` and the
//!   reach-and-stay time.
//! - [`channel`]: delay lines, the rate-limited quantizer and the bisection
//!   controller that meets the `T + F/R` bound.
//! - [`nerve`]: how axon size trades delay for rate and where the total
//!   cost bottoms out.
//! - [`muscle`]: motor-unit activation and size-ordered recruitment.
//! - [`reach`]: a point mass with friction pushed by timed muscle commands,
//!   and the speed-accuracy frontier of uniform versus diverse muscles.
//! - [`transport`]: the same idea for modes of travel.
//! - [`experiment`]: the trial engine used for human or scripted reaching
//!   experiments, with logs and the Fitts-law fit.
//!
//! ```
//! use dess::channel::{fitts_bound, worst_case_reach, ChannelSpec};
//!
//! // D = 4, W = 1 is F = 3 bits; 1 bit per tick and 2 ticks of delay.
//! assert_eq!(fitts_bound(3.0, 2.0, 1.0), 5.0);
//! let chan = ChannelSpec::ticks(2, 1.0).unwrap();
//! assert_eq!(worst_case_reach(4.0, 1.0, &chan).unwrap(), Some(5));
//! ```

pub mod channel;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod muscle;
pub mod nerve;
pub mod reach;
pub mod transport;

pub use error::{Error, Result};

// The book's chapters run as doctests so their snippets stay compilable.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/channel.md")]
    mod channel {}
    #[doc = include_str!("../../../book/src/nerve.md")]
    mod nerve {}
    #[doc = include_str!("../../../book/src/muscle.md")]
    mod muscle {}
    #[doc = include_str!("../../../book/src/reach.md")]
    mod reach {}
    #[doc = include_str!("../../../book/src/transport.md")]
    mod transport {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
