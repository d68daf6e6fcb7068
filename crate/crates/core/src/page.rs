//! Neutral page model: parsed forms, links and visible text, plus the
//! structural heuristics that recognize login forms, reset forms and failed
//! logins.
//!
//! A login form is a form with exactly one password field, at least one text
//! field and a submit control. A password-reset form has an optional username
//! text field, exactly three password fields and a submit control. Hidden
//! inputs (CSRF tokens and friends) are ignored by the classifier.

use std::sync::LazyLock;

use scraper::{ElementRef, Html, Selector};
use url::Url;

/// What a form field is, as far as classification cares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Text,
    Password,
    Submit,
    Hidden,
    Other,
}

/// One control inside a form, in document order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormField {
    /// The `name` attribute; empty when absent. Unnamed fields are never
    /// submitted.
    pub name: String,
    pub kind: FieldKind,
    /// The page-supplied `value` attribute. Hidden fields are passed through
    /// with this value on submission.
    pub value: Option<String>,
}

impl FormField {
    pub fn new(name: &str, kind: FieldKind) -> FormField {
        FormField { name: name.to_string(), kind, value: None }
    }

    pub fn with_value(name: &str, kind: FieldKind, value: &str) -> FormField {
        FormField { name: name.to_string(), kind, value: Some(value.to_string()) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormMethod {
    Get,
    Post,
}

/// A form with its submission target resolved to an absolute URL.
#[derive(Debug, Clone, PartialEq)]
pub struct FormModel {
    pub action_url: Url,
    pub method: FormMethod,
    /// Fields in document order.
    pub fields: Vec<FormField>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormClass {
    Login,
    Reset,
    Other,
}

/// An anchor: trimmed text plus the href resolved to an absolute URL.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkRef {
    pub text: String,
    pub href: Url,
}

/// A parsed page: final URL after redirects, forms and links in document
/// order, and lowercased visible text.
#[derive(Debug, Clone)]
pub struct PageDocument {
    pub final_url: Url,
    pub forms: Vec<FormModel>,
    pub links: Vec<LinkRef>,
    pub body_text: String,
}

/// Strings whose presence in visible text marks a failed login attempt.
/// Matching is case-insensitive (`body_text` is lowercased at parse time).
pub const LOGIN_FAILURE_STRINGS: [&str; 2] = ["invalid password", "incorrect username"];

static LINK_SEL: LazyLock<Selector> = LazyLock::new(|| Selector::parse("a[href]").unwrap());
static FORM_SEL: LazyLock<Selector> = LazyLock::new(|| Selector::parse("form").unwrap());
static CONTROL_SEL: LazyLock<Selector> =
    LazyLock::new(|| Selector::parse("input, button, select, textarea").unwrap());
static BODY_SEL: LazyLock<Selector> = LazyLock::new(|| Selector::parse("body").unwrap());

/// Parses raw HTML into a [`PageDocument`]. Best effort: malformed markup
/// never fails, it just yields whatever forms and links survive parsing.
/// Invalid UTF-8 sequences are replaced.
pub fn parse_page(raw_html: &[u8], base_url: &Url) -> PageDocument {
    let text = String::from_utf8_lossy(raw_html);
    let doc = Html::parse_document(&text);

    let links = doc
        .select(&LINK_SEL)
        .filter_map(|a| {
            let href = a.value().attr("href")?;
            // Skip hrefs that cannot resolve to an absolute URL.
            let resolved = base_url.join(href).ok()?;
            Some(LinkRef { text: collapse_ws(&element_text(a)), href: resolved })
        })
        .collect();

    let forms = doc.select(&FORM_SEL).map(|f| parse_form(f, base_url)).collect();

    let body_text = match doc.select(&BODY_SEL).next() {
        Some(body) => collapse_ws(&element_text(body)).to_lowercase(),
        None => String::new(),
    };

    PageDocument { final_url: base_url.clone(), forms, links, body_text }
}

fn parse_form(form: ElementRef<'_>, base_url: &Url) -> FormModel {
    let action_url = match form.value().attr("action") {
        Some(action) if !action.trim().is_empty() => {
            base_url.join(action).unwrap_or_else(|_| base_url.clone())
        }
        // Per HTML, a missing or empty action submits to the document URL.
        _ => base_url.clone(),
    };

    let method = match form.value().attr("method") {
        Some(m) if m.eq_ignore_ascii_case("post") => FormMethod::Post,
        _ => FormMethod::Get,
    };

    let fields = form
        .select(&CONTROL_SEL)
        .map(|el| {
            let name = el.value().attr("name").unwrap_or("").to_string();
            let value = el.value().attr("value").map(str::to_string);
            let kind = control_kind(el);
            FormField { name, kind, value }
        })
        .collect();

    FormModel { action_url, method, fields }
}

fn control_kind(el: ElementRef<'_>) -> FieldKind {
    let tag = el.value().name();
    let ty = el.value().attr("type").unwrap_or("").trim().to_ascii_lowercase();
    match tag {
        "input" => match ty.as_str() {
            "" | "text" | "email" => FieldKind::Text,
            "password" => FieldKind::Password,
            "submit" | "image" => FieldKind::Submit,
            "hidden" => FieldKind::Hidden,
            _ => FieldKind::Other,
        },
        // A button with no type (or type=submit) submits its form.
        "button" => match ty.as_str() {
            "" | "submit" => FieldKind::Submit,
            _ => FieldKind::Other,
        },
        _ => FieldKind::Other,
    }
}

fn element_text(el: ElementRef<'_>) -> String {
    // ElementRef::text walks all descendant text nodes; drop script/style
    // contents so they never count as visible text.
    let mut out = String::new();
    for node in el.descendants() {
        if let Some(text) = node.value().as_text() {
            let in_raw = node.ancestors().any(|a| {
                a.value()
                    .as_element()
                    .map(|e| matches!(e.name(), "script" | "style" | "noscript" | "template"))
                    .unwrap_or(false)
            });
            if !in_raw {
                out.push_str(text);
            }
        }
    }
    out
}

fn collapse_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Classifies a form from its field kinds alone. Pure and total.
pub fn classify_form(form: &FormModel) -> FormClass {
    let mut text = 0usize;
    let mut password = 0usize;
    let mut submit = 0usize;
    for f in &form.fields {
        match f.kind {
            FieldKind::Text => text += 1,
            FieldKind::Password => password += 1,
            FieldKind::Submit => submit += 1,
            // Hidden fields carry tokens, not user input; ignore them.
            FieldKind::Hidden | FieldKind::Other => {}
        }
    }
    if password == 1 && text >= 1 && submit >= 1 {
        FormClass::Login
    } else if password == 3 && text <= 1 && submit >= 1 {
        FormClass::Reset
    } else {
        FormClass::Other
    }
}

/// First form on the page classified as a login form, in document order.
pub fn find_login_form(page: &PageDocument) -> Option<&FormModel> {
    page.forms.iter().find(|f| classify_form(f) == FormClass::Login)
}

/// First form on the page classified as a password-reset form.
pub fn find_reset_form(page: &PageDocument) -> Option<&FormModel> {
    page.forms.iter().find(|f| classify_form(f) == FormClass::Reset)
}

/// True when the page returned by a login submission indicates failure:
/// either the login form is presented again, or the visible text contains a
/// known failure string.
pub fn detect_login_failure(page: &PageDocument) -> bool {
    if find_login_form(page).is_some() {
        return true;
    }
    LOGIN_FAILURE_STRINGS.iter().any(|s| page.body_text.contains(s))
}

/// Canonical form of a URL for visited-set bookkeeping: the fragment is
/// dropped, everything else is kept.
pub fn visit_key(url: &Url) -> Url {
    let mut key = url.clone();
    key.set_fragment(None);
    key
}
