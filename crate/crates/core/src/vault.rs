//! Credential vault and reset-URL cache persistence.
//!
//! The vault is a JSON file holding an array of credential records. It is a
//! stand-in for a browser password manager and stores passwords in
//! plaintext: protect the file with filesystem permissions, or keep it on an
//! encrypted volume. The purls file maps origins to their discovered
//! password-reset URLs (`origin<TAB>url` lines) and is designed to be
//! shareable between users.
//!
//! All saves are atomic: content is written to a temp file in the target
//! directory and renamed over the destination, so a crash mid-save leaves
//! the previous file intact.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use url::Url;

use crate::origin::Origin;

#[derive(Debug, Error)]
pub enum VaultError {
    #[error("vault file is corrupt ({0}); file left untouched")]
    CorruptVault(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum PurlsError {
    #[error("purls line {line}: expected `origin<TAB>url`")]
    Malformed { line: usize },
    #[error("purls line {line}: {reason}")]
    Invalid { line: usize, reason: String },
    #[error("reset URL {url} is not on origin {origin}")]
    CrossOrigin { origin: Origin, url: Box<Url> },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// One stored credential. `(origin, username)` is unique within a vault.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CredentialRecord {
    pub origin: Origin,
    pub username: String,
    pub password: String,
    pub updated_at: DateTime<Utc>,
}

/// In-memory credential store backed by a JSON file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vault {
    records: Vec<CredentialRecord>,
}

impl Vault {
    pub fn new() -> Vault {
        Vault::default()
    }

    /// Loads a vault. A missing or empty file is an empty vault; anything
    /// unparseable is `CorruptVault` and the file is left as it was.
    pub fn load(path: &Path) -> Result<Vault, VaultError> {
        let bytes = match fs::read(path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vault::new()),
            Err(e) => return Err(e.into()),
        };
        if bytes.iter().all(|b| b.is_ascii_whitespace()) {
            return Ok(Vault::new());
        }
        let records: Vec<CredentialRecord> = serde_json::from_slice(&bytes)
            .map_err(|e| VaultError::CorruptVault(e.to_string()))?;
        Ok(Vault { records })
    }

    /// Atomically writes the vault as pretty-printed JSON.
    pub fn save(&self, path: &Path) -> Result<(), VaultError> {
        let json = serde_json::to_vec_pretty(&self.records).expect("records serialize");
        atomic_write(path, &json)?;
        Ok(())
    }

    /// Inserts or replaces the record matching `(origin, username)`;
    /// `updated_at` is set to now.
    pub fn upsert(&mut self, origin: Origin, username: &str, password: &str) {
        let now = Utc::now();
        match self
            .records
            .iter_mut()
            .find(|r| r.origin == origin && r.username == username)
        {
            Some(r) => {
                r.password = password.to_string();
                r.updated_at = now;
            }
            None => self.records.push(CredentialRecord {
                origin,
                username: username.to_string(),
                password: password.to_string(),
                updated_at: now,
            }),
        }
    }

    pub fn get(&self, origin: &Origin, username: &str) -> Option<&CredentialRecord> {
        self.records
            .iter()
            .find(|r| r.origin == *origin && r.username == username)
    }

    /// First record stored for an origin, any username.
    pub fn find_origin(&self, origin: &Origin) -> Option<&CredentialRecord> {
        self.records.iter().find(|r| r.origin == *origin)
    }

    pub fn remove(&mut self, origin: &Origin, username: &str) -> bool {
        let before = self.records.len();
        self.records
            .retain(|r| !(r.origin == *origin && r.username == username));
        self.records.len() != before
    }

    pub fn records(&self) -> &[CredentialRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Map from origin to its password-reset page URL, backed by a shareable
/// `origin<TAB>url` text file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PurlsMap {
    entries: BTreeMap<Origin, Url>,
}

impl PurlsMap {
    pub fn new() -> PurlsMap {
        PurlsMap::default()
    }

    /// Loads a purls file. Missing file means an empty map. `#` comment
    /// lines and blank lines are ignored.
    pub fn load(path: &Path) -> Result<PurlsMap, PurlsError> {
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(PurlsMap::new()),
            Err(e) => return Err(e.into()),
        };
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<PurlsMap, PurlsError> {
        let mut map = PurlsMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let n = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (origin, url) = line.split_once('\t').ok_or(PurlsError::Malformed { line: n })?;
            let origin = Origin::parse(origin.trim())
                .map_err(|e| PurlsError::Invalid { line: n, reason: e.to_string() })?;
            let url = Url::parse(url.trim())
                .map_err(|e| PurlsError::Invalid { line: n, reason: e.to_string() })?;
            map.put(origin, url)?;
        }
        Ok(map)
    }

    /// Atomically writes `origin<TAB>url` lines, sorted by origin so the
    /// bytes are deterministic.
    pub fn save(&self, path: &Path) -> Result<(), PurlsError> {
        let mut out = String::new();
        for (origin, url) in &self.entries {
            out.push_str(origin.as_str());
            out.push('\t');
            out.push_str(url.as_str());
            out.push('\n');
        }
        atomic_write(path, out.as_bytes())?;
        Ok(())
    }

    pub fn get(&self, origin: &Origin) -> Option<&Url> {
        self.entries.get(origin)
    }

    /// Stores the reset URL for an origin. The URL must live on that origin.
    pub fn put(&mut self, origin: Origin, url: Url) -> Result<(), PurlsError> {
        if !origin.contains(&url) {
            return Err(PurlsError::CrossOrigin { origin, url: Box::new(url) });
        }
        self.entries.insert(origin, url);
        Ok(())
    }

    /// Union of two maps; on conflicting origins the local (self) entry
    /// wins. The result does not depend on remote iteration order.
    pub fn merge(&self, remote: &PurlsMap) -> PurlsMap {
        let mut out = self.clone();
        for (origin, url) in &remote.entries {
            out.entries.entry(origin.clone()).or_insert_with(|| url.clone());
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Origin, &Url)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Append-only journal of candidate passwords whose reset submission could
/// not be confirmed. If a site silently accepted the reset, the password is
/// recoverable from here.
#[derive(Debug, Clone)]
pub struct RecoveryJournal {
    path: std::path::PathBuf,
}

impl RecoveryJournal {
    pub fn new(path: &Path) -> RecoveryJournal {
        RecoveryJournal { path: path.to_path_buf() }
    }

    /// Appends `ISO8601<TAB>origin<TAB>candidate_password`.
    pub fn append(&self, origin: &Origin, candidate_password: &str) -> std::io::Result<()> {
        let mut file = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)?;
        let stamp = Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true);
        writeln!(file, "{stamp}\t{origin}\t{candidate_password}")?;
        file.sync_all()
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

/// Write-temp-then-rename. The temp file lives in the destination directory
/// so the rename never crosses filesystems.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(d) => tempfile::NamedTempFile::new_in(d)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn origin(s: &str) -> Origin {
        Origin::parse(s).unwrap()
    }

    fn url(s: &str) -> Url {
        Url::parse(s).unwrap()
    }

    #[test]
    fn vault_save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vault.json");
        let mut v = Vault::new();
        v.upsert(origin("http://a.test"), "alice", "pw-a");
        v.upsert(origin("http://b.test"), "bob", "pw-b");
        v.upsert(origin("http://c.test:8080"), "carol", "pw-c");
        v.save(&path).unwrap();
        let loaded = Vault::load(&path).unwrap();
        assert_eq!(loaded.records(), v.records());
    }

    #[test]
    fn missing_and_empty_vault_files_are_empty_vaults() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("nope.json");
        assert!(Vault::load(&missing).unwrap().is_empty());
        let empty = dir.path().join("empty.json");
        fs::write(&empty, "  \n").unwrap();
        assert!(Vault::load(&empty).unwrap().is_empty());
    }

    #[test]
    fn truncated_vault_is_corrupt_and_preserved() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vault.json");
        let mut v = Vault::new();
        v.upsert(origin("http://a.test"), "alice", "pw");
        v.save(&path).unwrap();
        let full = fs::read(&path).unwrap();
        let cut = &full[..full.len() / 2];
        fs::write(&path, cut).unwrap();

        let err = Vault::load(&path).unwrap_err();
        assert!(matches!(err, VaultError::CorruptVault(_)));
        assert_eq!(fs::read(&path).unwrap(), cut, "load must not touch the file");
    }

    #[test]
    fn upsert_replaces_matching_record() {
        let mut v = Vault::new();
        v.upsert(origin("http://a.test"), "alice", "one");
        assert_eq!(v.len(), 1);
        v.upsert(origin("http://a.test"), "alice", "two");
        assert_eq!(v.len(), 1);
        assert_eq!(v.get(&origin("http://a.test"), "alice").unwrap().password, "two");
        v.upsert(origin("http://a.test"), "amy", "three");
        assert_eq!(v.len(), 2);
        v.upsert(origin("http://b.test"), "alice", "four");
        assert_eq!(v.len(), 3);
    }

    #[test]
    fn remove_only_drops_the_matching_pair() {
        let mut v = Vault::new();
        v.upsert(origin("http://a.test"), "alice", "x");
        v.upsert(origin("http://a.test"), "amy", "y");
        assert!(v.remove(&origin("http://a.test"), "alice"));
        assert!(!v.remove(&origin("http://a.test"), "alice"));
        assert_eq!(v.len(), 1);
        assert!(v.get(&origin("http://a.test"), "amy").is_some());
    }

    #[test]
    fn purls_get_put() {
        let mut p = PurlsMap::new();
        assert!(p.get(&origin("http://a.test")).is_none());
        p.put(origin("http://a.test"), url("http://a.test/reset")).unwrap();
        assert_eq!(p.get(&origin("http://a.test")).unwrap().as_str(), "http://a.test/reset");
    }

    #[test]
    fn purls_keys_are_normalized() {
        let mut p = PurlsMap::new();
        p.put(origin("https://a.test"), url("https://a.test/reset")).unwrap();
        assert!(p.get(&origin("HTTPS://A.TEST:443")).is_some());
    }

    #[test]
    fn purls_rejects_cross_origin_values() {
        let mut p = PurlsMap::new();
        let err = p.put(origin("http://a.test"), url("http://b.test/reset"));
        assert!(matches!(err, Err(PurlsError::CrossOrigin { .. })));
    }

    #[test]
    fn purls_file_round_trip_with_comments() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("purls.txt");
        fs::write(
            &path,
            "# shared purls\nhttp://a.test\thttp://a.test/reset\n\nhttp://b.test:81\thttp://b.test:81/pw\n",
        )
        .unwrap();
        let p = PurlsMap::load(&path).unwrap();
        assert_eq!(p.len(), 2);
        p.save(&path).unwrap();
        let again = PurlsMap::load(&path).unwrap();
        assert_eq!(p, again);
    }

    #[test]
    fn purls_parse_rejects_malformed_lines() {
        assert!(matches!(
            PurlsMap::parse("http://a.test http://a.test/r\n"),
            Err(PurlsError::Malformed { line: 1 })
        ));
        assert!(matches!(
            PurlsMap::parse("nonsense\thttp://a.test/r\n"),
            Err(PurlsError::Invalid { line: 1, .. })
        ));
    }

    #[test]
    fn merge_disjoint_and_conflicting() {
        let mut local = PurlsMap::new();
        local.put(origin("http://a.test"), url("http://a.test/1")).unwrap();
        let mut remote = PurlsMap::new();
        remote.put(origin("http://b.test"), url("http://b.test/2")).unwrap();
        let merged = local.merge(&remote);
        assert_eq!(merged.len(), 2);

        let mut remote2 = PurlsMap::new();
        remote2.put(origin("http://a.test"), url("http://a.test/2")).unwrap();
        let merged2 = local.merge(&remote2);
        assert_eq!(merged2.get(&origin("http://a.test")).unwrap().as_str(), "http://a.test/1");

        assert_eq!(local.merge(&PurlsMap::new()), local);
        assert_eq!(PurlsMap::new().merge(&local), local);
    }

    #[test]
    fn journal_appends_tab_separated_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("journal.log");
        let j = RecoveryJournal::new(&path);
        j.append(&origin("http://a.test"), "cand-1").unwrap();
        j.append(&origin("http://b.test"), "cand-2").unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        for line in &lines {
            let parts: Vec<&str> = line.split('\t').collect();
            assert_eq!(parts.len(), 3);
            assert!(DateTime::parse_from_rfc3339(parts[0]).is_ok());
        }
        assert!(lines[0].ends_with("http://a.test\tcand-1"));
        assert!(lines[1].ends_with("http://b.test\tcand-2"));
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.txt");
        atomic_write(&path, b"one").unwrap();
        atomic_write(&path, b"two").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"two");
        // No temp litter left behind.
        let extra: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .filter(|e| e.as_ref().unwrap().file_name() != "f.txt")
            .collect();
        assert!(extra.is_empty(), "leftover temp files: {extra:?}");
    }

    proptest! {
        // Merge result is independent of remote insertion order, and local
        // always wins on conflicts.
        #[test]
        fn merge_is_order_independent(hosts in proptest::collection::btree_set("[a-f]{1,6}", 1..10), seed in 0u64..64) {
            let mut local = PurlsMap::new();
            let mut remote_pairs = Vec::new();
            for (i, h) in hosts.iter().enumerate() {
                let o = origin(&format!("http://{h}.test"));
                let u = url(&format!("http://{h}.test/r{i}"));
                if i % 2 == 0 {
                    local.put(o.clone(), url(&format!("http://{h}.test/local"))).unwrap();
                }
                remote_pairs.push((o, u));
            }
            let mut shuffled = remote_pairs.clone();
            // Deterministic pseudo-shuffle.
            let mut s = seed;
            for i in (1..shuffled.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                shuffled.swap(i, (s as usize) % (i + 1));
            }
            let mut r1 = PurlsMap::new();
            for (o, u) in &remote_pairs { let _ = r1.put(o.clone(), u.clone()); }
            let mut r2 = PurlsMap::new();
            for (o, u) in &shuffled { let _ = r2.put(o.clone(), u.clone()); }

            let m1 = local.merge(&r1);
            let m2 = local.merge(&r2);
            prop_assert_eq!(&m1, &m2);
            for (o, u) in local.iter() {
                prop_assert_eq!(m1.get(o).unwrap(), u);
            }
        }
    }
}
