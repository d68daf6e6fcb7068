//! Minimal same-origin HTTP session: cookie persistence for the life of the
//! session, bounded redirect following, and form submission encoding.
//!
//! A session is opened for exactly one origin and refuses to fetch anything
//! else, so cookies can never leak across origins. Redirects are followed
//! manually (up to 10 hops) so every hop gets the same origin check.

use std::collections::HashMap;
use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::header::{CONTENT_TYPE, LOCATION};
use reqwest::Method;
use thiserror::Error;
use url::form_urlencoded;
use url::Url;

use crate::origin::Origin;
use crate::page::{FieldKind, FormMethod, FormModel};

pub const REDIRECT_LIMIT: usize = 10;
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Debug, Error)]
pub enum WebError {
    #[error("network: {0}")]
    Network(#[source] reqwest::Error),
    #[error("request timed out")]
    Timeout,
    #[error("redirect chain exceeded {REDIRECT_LIMIT} hops")]
    RedirectLoop,
    #[error("refusing cross-origin fetch of {url} from session on {origin}")]
    CrossOriginRefused { origin: Origin, url: Box<Url> },
    #[error("client construction failed: {0}")]
    Build(#[source] reqwest::Error),
}

/// Result of a navigation: the URL after all redirects, the final status,
/// and the body.
#[derive(Debug, Clone)]
pub struct FetchResult {
    pub final_url: Url,
    pub status: u16,
    pub body: Vec<u8>,
    pub content_type: Option<String>,
}

impl FetchResult {
    pub fn is_success(&self) -> bool {
        (200..300).contains(&self.status)
    }
}

/// One origin-bound HTTP session with an in-memory cookie jar.
pub struct Session {
    origin: Origin,
    client: Client,
}

impl Session {
    pub fn new(origin: Origin) -> Result<Session, WebError> {
        Session::with_timeout(origin, DEFAULT_TIMEOUT)
    }

    pub fn with_timeout(origin: Origin, timeout: Duration) -> Result<Session, WebError> {
        let client = Client::builder()
            .cookie_store(true)
            .redirect(reqwest::redirect::Policy::none())
            .timeout(timeout)
            .build()
            .map_err(WebError::Build)?;
        Ok(Session { origin, client })
    }

    pub fn origin(&self) -> &Origin {
        &self.origin
    }

    /// GET a same-origin URL, following redirects.
    pub fn fetch(&self, url: &Url) -> Result<FetchResult, WebError> {
        self.navigate(Method::GET, url.clone(), None)
    }

    /// Submits a form. `values` overrides fields by name; every other named
    /// field is passed through with its page-supplied value (hidden tokens
    /// in particular). GET forms carry the pairs in the query string, POST
    /// forms as an `application/x-www-form-urlencoded` body.
    pub fn submit_form(
        &self,
        form: &FormModel,
        values: &HashMap<String, String>,
    ) -> Result<FetchResult, WebError> {
        let encoded = encode_form(form, values);
        match form.method {
            FormMethod::Get => {
                let mut url = form.action_url.clone();
                url.set_query(if encoded.is_empty() { None } else { Some(&encoded) });
                self.navigate(Method::GET, url, None)
            }
            FormMethod::Post => self.navigate(Method::POST, form.action_url.clone(), Some(encoded)),
        }
    }

    fn navigate(
        &self,
        method: Method,
        url: Url,
        body: Option<String>,
    ) -> Result<FetchResult, WebError> {
        let mut method = method;
        let mut url = url;
        let mut body = body;
        let mut redirects = 0usize;

        loop {
            if !self.origin.contains(&url) {
                return Err(WebError::CrossOriginRefused {
                    origin: self.origin.clone(),
                    url: Box::new(url),
                });
            }

            let mut req = self.client.request(method.clone(), url.clone());
            if let Some(b) = &body {
                req = req
                    .header(CONTENT_TYPE, "application/x-www-form-urlencoded")
                    .body(b.clone());
            }
            let resp = req.send().map_err(|e| {
                if e.is_timeout() {
                    WebError::Timeout
                } else {
                    WebError::Network(e)
                }
            })?;

            let status = resp.status();
            if status.is_redirection() {
                if let Some(loc) = resp.headers().get(LOCATION).and_then(|v| v.to_str().ok()) {
                    let next = url.join(loc).map_err(|_| WebError::RedirectLoop)?;
                    if redirects == REDIRECT_LIMIT {
                        return Err(WebError::RedirectLoop);
                    }
                    redirects += 1;
                    // 307/308 preserve the method and body; everything else
                    // degrades to GET, like browsers do after a POST.
                    if status.as_u16() != 307 && status.as_u16() != 308 {
                        method = Method::GET;
                        body = None;
                    }
                    url = next;
                    continue;
                }
            }

            let status = status.as_u16();
            let content_type = resp
                .headers()
                .get(CONTENT_TYPE)
                .and_then(|v| v.to_str().ok())
                .map(str::to_string);
            let final_url = resp.url().clone();
            let body = resp.bytes().map_err(WebError::Network)?.to_vec();
            return Ok(FetchResult { final_url, status, body, content_type });
        }
    }
}

/// Urlencodes a form's submission pairs in field document order.
///
/// Per-kind rules: text/password/hidden fields always submit (override value,
/// else page value, else empty); the first named submit control submits its
/// value; other controls submit only when the page supplied a value. Unnamed
/// fields never submit.
fn encode_form(form: &FormModel, values: &HashMap<String, String>) -> String {
    debug_assert!(
        values.keys().all(|k| form.fields.iter().any(|f| f.name == *k)),
        "a value was supplied for a field the form does not have"
    );
    let mut ser = form_urlencoded::Serializer::new(String::new());
    let mut submit_taken = false;
    for field in &form.fields {
        if field.name.is_empty() {
            continue;
        }
        let override_value = values.get(&field.name);
        match field.kind {
            FieldKind::Text | FieldKind::Password | FieldKind::Hidden => {
                let v = override_value
                    .cloned()
                    .or_else(|| field.value.clone())
                    .unwrap_or_default();
                ser.append_pair(&field.name, &v);
            }
            FieldKind::Submit => {
                if !submit_taken {
                    submit_taken = true;
                    let v = override_value
                        .cloned()
                        .or_else(|| field.value.clone())
                        .unwrap_or_default();
                    ser.append_pair(&field.name, &v);
                }
            }
            FieldKind::Other => {
                if let Some(v) = override_value.cloned().or_else(|| field.value.clone()) {
                    ser.append_pair(&field.name, &v);
                }
            }
        }
    }
    ser.finish()
}
