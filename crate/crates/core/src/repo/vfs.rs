//! Virtual file system over a repository snapshot: exact lookup,
//! directory-prefix listing, and extension filtering, with no writes and
//! no materialized directory tree.

use std::collections::BTreeMap;

use super::RepoError;

/// Repository metadata used by the repo-level filters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RepoMeta {
    pub stars: u64,
    pub forks: u64,
    pub file_count: u64,
}

/// An immutable snapshot of one repository's files.
///
/// Paths are normalized at construction: repo-relative, `/`-separated,
/// with no empty, `.`, or `..` segments, and unique.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepoSnapshot {
    pub repo_id: String,
    files: BTreeMap<String, String>,
    pub meta: RepoMeta,
}

/// Validate and normalize one repo-relative path.
pub fn normalize_path(path: &str) -> Result<String, RepoError> {
    let invalid = |reason| RepoError::InvalidPath {
        path: path.to_string(),
        reason,
    };
    if path.is_empty() {
        return Err(invalid("empty path"));
    }
    if path.contains('\\') {
        return Err(invalid("backslash separator"));
    }
    if path.starts_with('/') {
        return Err(invalid("absolute path"));
    }
    if path.ends_with('/') {
        return Err(invalid("trailing slash"));
    }
    for segment in path.split('/') {
        match segment {
            "" => return Err(invalid("empty segment")),
            "." | ".." => return Err(invalid("dot segment")),
            _ => {}
        }
    }
    Ok(path.to_string())
}

impl RepoSnapshot {
    pub fn new(
        repo_id: impl Into<String>,
        files: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self, RepoError> {
        let mut map = BTreeMap::new();
        for (path, content) in files {
            let normalized = normalize_path(&path)?;
            if map.insert(normalized.clone(), content).is_some() {
                return Err(RepoError::DuplicatePath(normalized));
            }
        }
        let file_count = map.len() as u64;
        Ok(RepoSnapshot {
            repo_id: repo_id.into(),
            files: map,
            meta: RepoMeta {
                file_count,
                ..RepoMeta::default()
            },
        })
    }

    pub fn with_meta(mut self, stars: u64, forks: u64) -> Self {
        self.meta.stars = stars;
        self.meta.forks = forks;
        self
    }

    pub fn files(&self) -> &BTreeMap<String, String> {
        &self.files
    }

    pub fn vfs(&self) -> Vfs<'_> {
        Vfs { snapshot: self }
    }
}

/// Read-only view over a snapshot.
#[derive(Debug, Clone, Copy)]
pub struct Vfs<'a> {
    snapshot: &'a RepoSnapshot,
}

impl<'a> Vfs<'a> {
    pub fn contains(&self, path: &str) -> bool {
        self.snapshot.files.contains_key(path)
    }

    pub fn read(&self, path: &str) -> Option<&'a str> {
        self.snapshot.files.get(path).map(|s| s.as_str())
    }

    /// Paths under a directory prefix (`"a/"`), or everything for `""`.
    pub fn list_prefix(&self, prefix: &str) -> impl Iterator<Item = &'a str> + '_ {
        self.snapshot
            .files
            .range(prefix.to_string()..)
            .take_while({
                let prefix = prefix.to_string();
                move |(p, _)| p.starts_with(prefix.as_str())
            })
            .map(|(p, _)| p.as_str())
    }

    /// Paths with the given extension (without the dot).
    pub fn with_extension(&self, ext: &str) -> impl Iterator<Item = &'a str> + '_ {
        let suffix = format!(".{ext}");
        self.snapshot
            .files
            .keys()
            .filter(move |p| p.ends_with(&suffix))
            .map(|p| p.as_str())
    }

    /// Files in exactly this directory (non-recursive) with the extension.
    pub fn dir_files_with_extension(&self, dir: &str, ext: &str) -> Vec<&'a str> {
        let prefix = if dir.is_empty() {
            String::new()
        } else {
            format!("{dir}/")
        };
        let suffix = format!(".{ext}");
        self.list_prefix(&prefix)
            .filter(|p| {
                let rest = &p[prefix.len()..];
                !rest.contains('/') && rest.ends_with(&suffix)
            })
            .collect()
    }
}

/// Join a relative specifier onto a base directory, resolving `.` and
/// `..` segments. Returns `None` when the result escapes the repo root.
pub fn join_normalized(base_dir: &str, rel: &str) -> Option<String> {
    let mut segments: Vec<&str> = if base_dir.is_empty() {
        Vec::new()
    } else {
        base_dir.split('/').collect()
    };
    for segment in rel.split('/') {
        match segment {
            "" | "." => {}
            ".." => {
                segments.pop()?;
            }
            s => segments.push(s),
        }
    }
    if segments.is_empty() {
        return None;
    }
    Some(segments.join("/"))
}

/// Directory part of a repo-relative path (`""` for root-level files).
pub fn parent_dir(path: &str) -> &str {
    match path.rsplit_once('/') {
        Some((dir, _)) => dir,
        None => "",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snap(paths: &[(&str, &str)]) -> RepoSnapshot {
        RepoSnapshot::new(
            "r",
            paths.iter().map(|(p, c)| (p.to_string(), c.to_string())),
        )
        .unwrap()
    }

    #[test]
    fn lookup_is_exact() {
        let s = snap(&[("a/b.x", "...")]);
        let vfs = s.vfs();
        assert!(vfs.contains("a/b.x"));
        assert!(!vfs.contains("a/b"));
        assert_eq!(vfs.read("a/b.x"), Some("..."));
    }

    #[test]
    fn prefix_listing() {
        let s = snap(&[("a/b.x", "1"), ("a/c.y", "2"), ("b/d.x", "3")]);
        let vfs = s.vfs();
        let under_a: Vec<&str> = vfs.list_prefix("a/").collect();
        assert_eq!(under_a, vec!["a/b.x", "a/c.y"]);
    }

    #[test]
    fn empty_snapshot_misses_everything() {
        let s = snap(&[]);
        assert!(!s.vfs().contains("x"));
        assert_eq!(s.vfs().list_prefix("").count(), 0);
    }

    #[test]
    fn extension_filter() {
        let s = snap(&[("a/b.x", "1"), ("c.y", "2"), ("d.x", "3")]);
        let xs: Vec<&str> = s.vfs().with_extension("x").collect();
        assert_eq!(xs, vec!["a/b.x", "d.x"]);
    }

    #[test]
    fn rejects_bad_paths() {
        assert!(RepoSnapshot::new("r", [("/abs".to_string(), String::new())]).is_err());
        assert!(RepoSnapshot::new("r", [("a/../b".to_string(), String::new())]).is_err());
        assert!(RepoSnapshot::new("r", [("a//b".to_string(), String::new())]).is_err());
        let dup = RepoSnapshot::new(
            "r",
            [
                ("a.x".to_string(), String::new()),
                ("a.x".to_string(), String::new()),
            ],
        );
        assert!(matches!(dup, Err(RepoError::DuplicatePath(_))));
    }

    #[test]
    fn join_handles_dots() {
        assert_eq!(join_normalized("pkg", "util.x"), Some("pkg/util.x".into()));
        assert_eq!(
            join_normalized("pkg", "./util.x"),
            Some("pkg/util.x".into())
        );
        assert_eq!(join_normalized("pkg/sub", "../u.x"), Some("pkg/u.x".into()));
        assert_eq!(join_normalized("", "../escape.x"), None);
        assert_eq!(parent_dir("a/b/c.x"), "a/b");
        assert_eq!(parent_dir("c.x"), "");
    }
}
