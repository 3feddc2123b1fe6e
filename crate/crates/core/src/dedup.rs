//! Exact deduplication by content digest and near-deduplication by MinHash
//! with locality-sensitive banding.
//!
//! Signatures are deterministic and reproducible across implementations:
//! a shingle is `shingle_words` consecutive whitespace tokens joined by a
//! single space; its base hash is `xxh3_64(bytes, seed = 0)`; permutation
//! `i` (for `i = 0..num_permutations`, sequentially derived from base
//! seed 0) maps the base hash through the splitmix64 finalizer as
//! `mix64(base ^ mix64(i))`; the signature component is the minimum over
//! all shingles. Documents with fewer tokens than `shingle_words` use the
//! whole token sequence as their single shingle. Documents with no tokens
//! get the sentinel signature (all `u64::MAX`), which matches only other
//! empty documents.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use md5::{Digest, Md5};
use xxhash_rust::xxh3::xxh3_64_with_seed;

/// Standard MD5 of the UTF-8 bytes, lowercase hex.
pub fn content_digest(content: &str) -> String {
    let mut hasher = Md5::new();
    hasher.update(content.as_bytes());
    hex::encode(hasher.finalize())
}

/// MinHash parameters. `num_permutations` must be divisible by `bands`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MinHashParams {
    pub num_permutations: usize,
    pub shingle_words: usize,
    pub bands: usize,
}

impl Default for MinHashParams {
    fn default() -> Self {
        // 16 bands x 8 rows over 128 permutations.
        MinHashParams {
            num_permutations: 128,
            shingle_words: 5,
            bands: 16,
        }
    }
}

impl MinHashParams {
    pub fn rows_per_band(&self) -> usize {
        self.num_permutations / self.bands
    }
}

/// A MinHash signature: per-permutation minima over the shingle set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub values: Vec<u64>,
    pub shingle_k: usize,
}

/// splitmix64 finalizer; the documented permutation mixer.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Word shingles of `k` tokens joined by single spaces. Fewer than `k`
/// tokens collapses to one whole-document shingle; no tokens yields the
/// empty set.
pub fn word_shingles(content: &str, k: usize) -> BTreeSet<String> {
    let tokens: Vec<&str> = content.split_whitespace().collect();
    let mut shingles = BTreeSet::new();
    if tokens.is_empty() {
        return shingles;
    }
    if tokens.len() < k {
        shingles.insert(tokens.join(" "));
        return shingles;
    }
    for window in tokens.windows(k) {
        shingles.insert(window.join(" "));
    }
    shingles
}

/// Compute the MinHash signature of a document.
pub fn minhash_signature(content: &str, params: &MinHashParams) -> Signature {
    let shingles = word_shingles(content, params.shingle_words);
    let mut values = vec![u64::MAX; params.num_permutations];
    for shingle in &shingles {
        let base = xxh3_64_with_seed(shingle.as_bytes(), 0);
        for (i, v) in values.iter_mut().enumerate() {
            let h = mix64(base ^ mix64(i as u64));
            if h < *v {
                *v = h;
            }
        }
    }
    Signature {
        values,
        shingle_k: params.shingle_words,
    }
}

/// Estimated Jaccard similarity: the fraction of equal components.
pub fn estimate_similarity(a: &Signature, b: &Signature) -> f64 {
    assert_eq!(a.values.len(), b.values.len(), "signature widths differ");
    let matches = a
        .values
        .iter()
        .zip(&b.values)
        .filter(|(x, y)| x == y)
        .count();
    matches as f64 / a.values.len() as f64
}

/// Result of near-deduplication over a batch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DedupOutcome {
    /// Ids that survive, sorted.
    pub kept_ids: BTreeSet<String>,
    /// `(kept, removed)` pairs, sorted; every removed id maps to exactly
    /// one kept representative.
    pub removals: Vec<(String, String)>,
}

impl DedupOutcome {
    /// Cluster report in the external line format `kept_id<TAB>removed_id`.
    pub fn report_lines(&self) -> String {
        let mut out = String::new();
        for (kept, removed) in &self.removals {
            out.push_str(kept);
            out.push('\t');
            out.push_str(removed);
            out.push('\n');
        }
        out
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Cluster near-duplicates and keep one representative per cluster.
///
/// Candidate pairs come from LSH banding; each candidate is verified by
/// signature-estimated similarity against `threshold` before clustering.
/// Each cluster keeps the lexicographically smallest id. The kept set is
/// independent of input order.
pub fn near_dedup<'a, I>(items: I, params: &MinHashParams, threshold: f64) -> DedupOutcome
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    assert!(
        threshold > 0.0 && threshold <= 1.0,
        "threshold must be in (0,1]"
    );
    assert!(
        params.num_permutations.is_multiple_of(params.bands),
        "num_permutations must be divisible by bands"
    );
    let items: Vec<(&str, &str)> = items.into_iter().collect();
    let signatures: Vec<Signature> = items
        .iter()
        .map(|(_, content)| minhash_signature(content, params))
        .collect();

    let rows = params.rows_per_band();
    let mut candidates: BTreeSet<(usize, usize)> = BTreeSet::new();
    for band in 0..params.bands {
        let start = band * rows;
        let end = start + rows;
        let mut buckets: HashMap<&[u64], Vec<usize>> = HashMap::new();
        for (idx, sig) in signatures.iter().enumerate() {
            buckets
                .entry(&sig.values[start..end])
                .or_default()
                .push(idx);
        }
        for bucket in buckets.values() {
            for i in 0..bucket.len() {
                for j in (i + 1)..bucket.len() {
                    let (a, b) = (bucket[i].min(bucket[j]), bucket[i].max(bucket[j]));
                    candidates.insert((a, b));
                }
            }
        }
    }

    let mut uf = UnionFind::new(items.len());
    for (a, b) in candidates {
        if estimate_similarity(&signatures[a], &signatures[b]) >= threshold {
            uf.union(a, b);
        }
    }

    let mut clusters: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for idx in 0..items.len() {
        let root = uf.find(idx);
        clusters.entry(root).or_default().push(idx);
    }

    let mut kept_ids = BTreeSet::new();
    let mut removals = Vec::new();
    for members in clusters.values() {
        let kept = members
            .iter()
            .map(|&i| items[i].0)
            .min()
            .expect("cluster non-empty");
        kept_ids.insert(kept.to_string());
        for &i in members {
            if items[i].0 != kept {
                removals.push((kept.to_string(), items[i].0.to_string()));
            }
        }
    }
    removals.sort();
    DedupOutcome { kept_ids, removals }
}

/// Exact word-shingle Jaccard similarity. This is the brute-force oracle
/// the MinHash estimate is tested against; it is not used by `near_dedup`.
pub fn exact_jaccard(a: &str, b: &str, k: usize) -> f64 {
    let sa = word_shingles(a, k);
    let sb = word_shingles(b, k);
    if sa.is_empty() && sb.is_empty() {
        return 1.0;
    }
    if sa.is_empty() || sb.is_empty() {
        return 0.0;
    }
    let inter = sa.intersection(&sb).count();
    let union = sa.len() + sb.len() - inter;
    inter as f64 / union as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn md5_published_vectors() {
        assert_eq!(content_digest(""), "d41d8cd98f00b204e9800998ecf8427e");
        assert_eq!(content_digest("abc"), "900150983cd24fb0d6963f7d28e17f72");
        assert_eq!(content_digest("same"), content_digest("same"));
    }

    #[test]
    fn identical_texts_have_identical_signatures() {
        let p = MinHashParams::default();
        let a = minhash_signature("the quick brown fox jumps over the lazy dog", &p);
        let b = minhash_signature("the quick brown fox jumps over the lazy dog", &p);
        assert_eq!(a, b);
        assert_eq!(estimate_similarity(&a, &b), 1.0);
    }

    #[test]
    fn empty_sentinel_matches_only_empties() {
        let p = MinHashParams::default();
        let empty = minhash_signature("", &p);
        let also_empty = minhash_signature("   \n\t", &p);
        let real = minhash_signature("some actual words in here for the test", &p);
        assert_eq!(estimate_similarity(&empty, &also_empty), 1.0);
        assert_eq!(estimate_similarity(&empty, &real), 0.0);
    }

    #[test]
    fn short_documents_get_whole_document_shingle() {
        let shingles = word_shingles("just three words", 5);
        assert_eq!(shingles.len(), 1);
        assert!(shingles.contains("just three words"));
    }

    #[test]
    fn exact_duplicates_cluster_and_smallest_id_wins() {
        let p = MinHashParams::default();
        let text = "one two three four five six seven eight nine ten";
        let out = near_dedup([("b", text), ("a", text)], &p, 0.70);
        assert_eq!(out.kept_ids.iter().collect::<Vec<_>>(), vec!["a"]);
        assert_eq!(out.removals, vec![("a".to_string(), "b".to_string())]);
        assert_eq!(out.report_lines(), "a\tb\n");
    }

    #[test]
    fn disjoint_documents_all_kept() {
        let p = MinHashParams::default();
        let out = near_dedup(
            [
                ("x", "alpha beta gamma delta epsilon zeta eta theta"),
                ("y", "one two three four five six seven eight"),
            ],
            &p,
            0.70,
        );
        assert_eq!(out.kept_ids.len(), 2);
        assert!(out.removals.is_empty());
    }

    #[test]
    fn one_word_changed_in_hundred_still_clusters() {
        let p = MinHashParams::default();
        let words: Vec<String> = (0..100).map(|i| format!("w{i:03}")).collect();
        let original = words.join(" ");
        let mut changed_words = words.clone();
        changed_words[50] = "altered".to_string();
        let changed = changed_words.join(" ");
        // Brute-force check that the pair is well above threshold.
        assert!(exact_jaccard(&original, &changed, 5) > 0.9);
        let out = near_dedup(
            [("a", original.as_str()), ("b", changed.as_str())],
            &p,
            0.70,
        );
        assert_eq!(out.kept_ids.len(), 1);
    }

    #[test]
    fn kept_set_invariant_under_input_permutation() {
        let p = MinHashParams::default();
        let base: Vec<String> = (0..20)
            .map(|i| {
                (0..30)
                    .map(|j| format!("tok{}", (i * 7 + j * 3) % 40))
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        let items: Vec<(String, &str)> = base
            .iter()
            .enumerate()
            .map(|(i, c)| (format!("id{i:02}"), c.as_str()))
            .collect();
        let forward = near_dedup(items.iter().map(|(i, c)| (i.as_str(), *c)), &p, 0.70);
        let backward = near_dedup(items.iter().rev().map(|(i, c)| (i.as_str(), *c)), &p, 0.70);
        assert_eq!(forward, backward);
        // Every rejected id maps to exactly one kept representative.
        let removed: BTreeSet<&str> = forward.removals.iter().map(|(_, r)| r.as_str()).collect();
        assert_eq!(removed.len(), forward.removals.len());
        assert_eq!(forward.kept_ids.len() + removed.len(), items.len());
    }
}
