//! Headless password-rotation engine.
//!
//! After an authenticated login to a website, the engine locates the site's
//! password-reset page by priority-scored depth-first link traversal, submits
//! a freshly generated random password, and persists the new credential and
//! the reset-page URL. If the reset page cannot be found or the reset cannot
//! be confirmed, no stored credential changes: the rotation fails safely.
//!
//! The crate is organized around the rotation pipeline:
//!
//! - [`page`] parses fetched HTML into a neutral page model and classifies
//!   forms (login / reset / other) with structural heuristics.
//! - [`priority`] scores anchor texts against a pattern table and ranks
//!   candidate links for traversal.
//! - [`webclient`] is a minimal same-origin HTTP session (cookies, redirects,
//!   form submission).
//! - [`navigator`] orchestrates login, the depth-first reset-page search with
//!   backtracking and a page budget, and the reset submission.
//! - [`passgen`] generates uniform random passwords over a 94-character set.
//! - [`vault`] persists credentials and the origin-to-reset-URL cache.
//! - [`sitesim`] generates and serves deterministic synthetic websites used
//!   as the test universe and success oracle.

pub mod navigator;
pub mod origin;
pub mod page;
pub mod passgen;
pub mod priority;
pub mod sitesim;
pub mod vault;
pub mod webclient;

pub use origin::Origin;
pub use url::Url;
