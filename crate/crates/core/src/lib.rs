//! Movement-to-brush-stroke engine for wearable IMUs.
//!
//! Frames come in through [`ingest`], become energy and canvas positions in
//! [`motion`], and drive brushes in [`instrument`]. [`recording`],
//! [`analysis`] and [`calibration`] work on stored sessions.

pub mod ingest;
pub mod motion;
pub mod recording;
pub mod analysis;
pub mod calibration;
pub mod sequencer;
pub mod instrument;

// The guide's snippets run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/protocol.md")]
    mod protocol {}
    #[doc = include_str!("../../../book/src/energy.md")]
    mod energy {}
    #[doc = include_str!("../../../book/src/mapping.md")]
    mod mapping {}
    #[doc = include_str!("../../../book/src/analysis.md")]
    mod analysis {}
    #[doc = include_str!("../../../book/src/calibration.md")]
    mod calibration {}
    #[doc = include_str!("../../../book/src/instrument.md")]
    mod instrument {}
    #[doc = include_str!("../../../book/src/performing.md")]
    mod performing {}
}
