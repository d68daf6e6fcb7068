//! Normalized web origins (scheme + host + non-default port).
//!
//! An origin identifies one website/account scope. Vault records and the
//! reset-URL cache are keyed by origin, and a crawl session never leaves the
//! origin it was opened for.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use url::Url;

/// A normalized origin: lowercase scheme and host, default ports elided,
/// path/query/fragment dropped. `http` and `https` only.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Origin(String);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OriginError {
    #[error("not a valid URL: {0}")]
    InvalidUrl(String),
    #[error("unsupported scheme {0:?} (only http and https)")]
    UnsupportedScheme(String),
    #[error("URL has no host")]
    MissingHost,
}

impl Origin {
    /// Parses and normalizes an origin from any URL-ish string.
    /// `HTTPS://A.TEST:443/x?q` and `https://a.test` name the same origin.
    pub fn parse(s: &str) -> Result<Origin, OriginError> {
        let url = Url::parse(s).map_err(|e| OriginError::InvalidUrl(e.to_string()))?;
        Origin::of_url(&url)
    }

    /// The origin of a parsed URL.
    pub fn of_url(url: &Url) -> Result<Origin, OriginError> {
        match url.scheme() {
            "http" | "https" => {}
            other => return Err(OriginError::UnsupportedScheme(other.to_string())),
        }
        // The url crate already lowercases scheme/host and elides the
        // scheme-default port (`port()` is None for http:80 / https:443).
        let host = url.host_str().ok_or(OriginError::MissingHost)?;
        let mut s = format!("{}://{}", url.scheme(), host);
        if let Some(port) = url.port() {
            s.push_str(&format!(":{port}"));
        }
        Ok(Origin(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// True when `url` lives on this origin.
    pub fn contains(&self, url: &Url) -> bool {
        Origin::of_url(url).map(|o| o == *self).unwrap_or(false)
    }

    /// The root URL of the origin (`scheme://host[:port]/`).
    pub fn root_url(&self) -> Url {
        // A normalized origin string always re-parses.
        Url::parse(&format!("{}/", self.0)).expect("origin is a valid URL")
    }
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for Origin {
    type Err = OriginError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Origin::parse(s)
    }
}

impl TryFrom<String> for Origin {
    type Error = OriginError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        Origin::parse(&s)
    }
}

impl From<Origin> for String {
    fn from(o: Origin) -> String {
        o.0
    }
}
