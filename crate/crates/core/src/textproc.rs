//! Short-text tokenization and vocabulary construction.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ingest::Tweet;

/// Function words plus retweet/HTML-entity artifacts. Deliberately short:
/// words such as "more", "why" or "get" carry topic signal in campaign tweets.
pub const DEFAULT_STOPWORDS: &[&str] = &[
    "a", "an", "the", "and", "or", "of", "to", "in", "on", "at", "for", "is", "are", "was", "be",
    "it", "its", "this", "that", "with", "i", "me", "my", "we", "our", "you", "your", "he", "she",
    "they", "rt", "amp", "via",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TokenizerConfig {
    pub stopwords: Vec<String>,
    pub min_len: usize,
    pub min_df: usize,
    pub strip_urls: bool,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        Self {
            stopwords: DEFAULT_STOPWORDS.iter().map(|s| s.to_string()).collect(),
            min_len: 2,
            min_df: 2,
            strip_urls: true,
        }
    }
}

/// A tokenizer with its stopword set prepared for lookup.
#[derive(Debug, Clone)]
pub struct Tokenizer {
    stopwords: HashSet<String>,
    min_len: usize,
    strip_urls: bool,
}

impl Tokenizer {
    pub fn new(config: &TokenizerConfig) -> Self {
        Self {
            stopwords: config.stopwords.iter().map(|s| s.to_lowercase()).collect(),
            min_len: config.min_len,
            strip_urls: config.strip_urls,
        }
    }

    pub fn tokenize(&self, text: &str) -> Vec<String> {
        let lowered = text.to_lowercase();
        let mut tokens = Vec::new();
        for chunk in lowered.split_whitespace() {
            if self.strip_urls && is_url(chunk) {
                continue;
            }
            // Apostrophes join contractions ("don't" -> "dont"); every other
            // non-alphanumeric character separates words, which also strips
            // the '@' and '#' prefixes of handles and tags.
            let joined: String = chunk
                .chars()
                .filter(|c| *c != '\'' && *c != '\u{2019}')
                .collect();
            for word in joined.split(|c: char| !c.is_alphanumeric()) {
                if word.chars().count() < self.min_len || self.stopwords.contains(word) {
                    continue;
                }
                tokens.push(word.to_string());
            }
        }
        tokens
    }
}

fn is_url(chunk: &str) -> bool {
    chunk.starts_with("http://") || chunk.starts_with("https://") || chunk.starts_with("www.")
}

pub fn tokenize(text: &str, config: &TokenizerConfig) -> Vec<String> {
    Tokenizer::new(config).tokenize(text)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    terms: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn new(terms: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::InvalidConfig(format!(
                    "duplicate vocabulary term `{t}`"
                )));
            }
        }
        Ok(Self { terms, index })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term(&self, id: usize) -> &str {
        &self.terms[id]
    }

    pub fn lookup(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    /// SHA-256 over the newline-joined term list, hex encoded.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        for t in &self.terms {
            hasher.update(t.as_bytes());
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }

    fn rebuild_index(&mut self) {
        self.index = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub docs: Vec<Vec<usize>>,
    pub doc_ids: Vec<String>,
    pub vocab: Vocabulary,
}

impl Corpus {
    pub fn new(docs: Vec<Vec<usize>>, doc_ids: Vec<String>, vocab: Vocabulary) -> Result<Self> {
        if docs.len() != doc_ids.len() {
            return Err(Error::Dimension(format!(
                "{} documents but {} document ids",
                docs.len(),
                doc_ids.len()
            )));
        }
        let v = vocab.len();
        if let Some(bad) = docs.iter().flatten().find(|&&w| w >= v) {
            return Err(Error::Dimension(format!(
                "token id {bad} outside vocabulary of size {v}"
            )));
        }
        Ok(Self {
            docs,
            doc_ids,
            vocab,
        })
    }

    pub fn num_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn num_tokens(&self) -> usize {
        self.docs.iter().map(Vec::len).sum()
    }

    /// Indices of documents left with no tokens after filtering.
    pub fn empty_docs(&self) -> Vec<usize> {
        self.docs
            .iter()
            .enumerate()
            .filter(|(_, d)| d.is_empty())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn decode(&self, doc: usize) -> Vec<&str> {
        self.docs[doc].iter().map(|&w| self.vocab.term(w)).collect()
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let mut corpus: Corpus = serde_json::from_str(json)?;
        corpus.vocab.rebuild_index();
        Corpus::new(corpus.docs, corpus.doc_ids, corpus.vocab)
    }
}

/// Tokenize every tweet and keep terms that occur in at least `min_df`
/// documents. Terms are ordered lexicographically; documents keep their
/// surviving tokens in original order and may end up empty.
pub fn build_corpus(tweets: &[Tweet], config: &TokenizerConfig) -> Result<Corpus> {
    if config.min_df == 0 {
        return Err(Error::InvalidConfig("min_df must be at least 1".into()));
    }
    let tokenizer = Tokenizer::new(config);
    let tokenized: Vec<Vec<String>> = tweets.iter().map(|t| tokenizer.tokenize(&t.text)).collect();

    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in &tokenized {
        let unique: HashSet<&str> = doc.iter().map(String::as_str).collect();
        for term in unique {
            *df.entry(term).or_default() += 1;
        }
    }
    let terms: Vec<String> = df
        .into_iter()
        .filter(|&(_, n)| n >= config.min_df)
        .map(|(t, _)| t.to_string())
        .collect();
    let vocab = Vocabulary::new(terms)?;

    let docs: Vec<Vec<usize>> = tokenized
        .iter()
        .map(|doc| doc.iter().filter_map(|t| vocab.lookup(t)).collect())
        .collect();
    if docs.iter().all(Vec::is_empty) {
        return Err(Error::EmptyCorpus);
    }
    let corpus = Corpus::new(docs, tweets.iter().map(|t| t.id.clone()).collect(), vocab)?;
    let empties = corpus.empty_docs().len();
    if empties > 0 {
        log::warn!("{empties} documents have no tokens after filtering");
    }
    Ok(corpus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::Utc;
    use proptest::prelude::*;

    fn tweets(texts: &[&str]) -> Vec<Tweet> {
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| Tweet {
                id: format!("t{i}"),
                text: t.to_string(),
                created_at: Utc::now(),
                likes: 0,
            })
            .collect()
    }

    #[test]
    fn tokenize_examples() {
        let cfg = TokenizerConfig::default();
        assert_eq!(
            tokenize("Thank you @FoxNews!", &cfg),
            vec!["thank", "foxnews"]
        );
        assert_eq!(
            tokenize("#MakeAmericaGreatAgain", &cfg),
            vec!["makeamericagreatagain"]
        );
        assert!(tokenize("http://t.co/xyz", &cfg).is_empty());
        assert_eq!(
            tokenize("RT @megynkelly: don't   WATCH", &cfg),
            vec!["megynkelly", "dont", "watch"]
        );
        assert_eq!(tokenize("Why get more?", &cfg), vec!["why", "get", "more"]);
    }

    #[test]
    fn url_stripping_is_configurable() {
        let cfg = TokenizerConfig {
            strip_urls: false,
            ..Default::default()
        };
        assert_eq!(
            tokenize("https://t.co/xyz", &cfg),
            vec!["https", "co", "xyz"]
        );
    }

    #[test]
    fn min_df_filters_vocabulary() {
        let ts = tweets(&["aa bb", "aa cc"]);
        let cfg = TokenizerConfig {
            min_df: 2,
            stopwords: vec![],
            ..Default::default()
        };
        let c = build_corpus(&ts, &cfg).unwrap();
        assert_eq!(c.vocab.terms(), &["aa"]);
        assert_eq!(c.docs, vec![vec![0], vec![0]]);

        let cfg = TokenizerConfig { min_df: 1, ..cfg };
        let c = build_corpus(&ts, &cfg).unwrap();
        assert_eq!(c.vocab.terms(), &["aa", "bb", "cc"]);
        assert_eq!(c.docs, vec![vec![0, 1], vec![0, 2]]);
    }

    #[test]
    fn empty_documents_are_kept_and_flagged() {
        let ts = tweets(&["aa bb", "the", "aa bb"]);
        let c = build_corpus(&ts, &TokenizerConfig::default()).unwrap();
        assert_eq!(c.num_docs(), 3);
        assert_eq!(c.empty_docs(), vec![1]);
        assert_eq!(c.doc_ids, vec!["t0", "t1", "t2"]);
    }

    #[test]
    fn all_empty_corpus_is_an_error() {
        let ts = tweets(&["the a", "http://x.y"]);
        let err = build_corpus(&ts, &TokenizerConfig::default()).unwrap_err();
        assert_eq!(err.to_string(), "no tokens survive filtering");
        assert!(build_corpus(
            &ts,
            &TokenizerConfig {
                min_df: 0,
                ..Default::default()
            }
        )
        .is_err());
    }

    #[test]
    fn json_round_trip_restores_index() {
        let ts = tweets(&["aa bb cc", "bb cc dd"]);
        let c = build_corpus(&ts, &TokenizerConfig::default()).unwrap();
        let back = Corpus::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back.vocab.lookup("cc"), c.vocab.lookup("cc"));
        assert_eq!(back, c);
    }

    proptest! {
        #[test]
        fn tokenize_is_idempotent(s in "[ a-zA-Z0-9@#!.,'é:/ßİ-]{0,80}") {
            let cfg = TokenizerConfig::default();
            let once = tokenize(&s, &cfg);
            let twice = tokenize(&once.join(" "), &cfg);
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn vocabulary_decode_encode_identity(texts in proptest::collection::vec("[a-e ]{0,30}", 1..12)) {
            let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
            let ts = tweets(&refs);
            let cfg = TokenizerConfig { min_df: 1, min_len: 1, stopwords: vec![], strip_urls: true };
            if let Ok(c) = build_corpus(&ts, &cfg) {
                prop_assert_eq!(c.num_docs(), ts.len());
                for (i, t) in c.vocab.terms().iter().enumerate() {
                    prop_assert_eq!(c.vocab.lookup(t), Some(i));
                }
                for d in 0..c.num_docs() {
                    let reencoded: Vec<usize> = c.decode(d).iter().map(|t| c.vocab.lookup(t).unwrap()).collect();
                    prop_assert_eq!(&reencoded, &c.docs[d]);
                }
            }
        }
    }
}
