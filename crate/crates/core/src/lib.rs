//! Batch forensics over a Telegram-style message corpus: finds communities of
//! conspiracy-linked broadcast channels via URL evidence and forwarding-graph
//! analysis, then detects and quantifies how those channels monetize their
//! audience (affiliate links, donations, crowdfunding, crypto, shops).
//!
//! The pipeline is staged and file-backed: every stage reads persisted
//! intermediates and writes its own, so runs over large corpora are
//! restartable and every report is reproducible from the files alone.

pub mod catalog;
pub mod corpus;
pub mod domains;
pub mod error;
pub mod graph;
pub mod lang;
pub mod matcher;
pub mod metrics;
pub mod monetize;
pub mod pipeline;
pub mod synth;
pub mod url;

pub use error::{Error, Result};
