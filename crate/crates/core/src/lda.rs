//! Latent Dirichlet allocation fitted by collapsed Gibbs sampling.
//!
//! The sampler keeps the usual three count tables (document-topic,
//! topic-word, topic totals) and resamples one token assignment at a time
//! from its full conditional. Document-topic weights are averaged over the
//! retained post-burn-in sweeps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::textproc::{Corpus, Vocabulary};

pub const RNG_NAME: &str = "ChaCha8";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaConfig {
    pub topics: usize,
    /// Symmetric Dirichlet prior on document-topic weights.
    pub alpha: f64,
    /// Symmetric Dirichlet prior on topic-word distributions.
    pub beta: f64,
    pub iters: usize,
    pub burnin: usize,
    pub thin: usize,
    pub seed: u64,
}

impl LdaConfig {
    /// Defaults for `topics` topics: alpha = 50/K, beta = 0.01,
    /// 1000 sweeps with 500 burn-in and every 10th sweep retained.
    pub fn new(topics: usize) -> Self {
        Self {
            topics,
            alpha: 50.0 / topics.max(1) as f64,
            beta: 0.01,
            iters: 1000,
            burnin: 500,
            thin: 10,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.topics < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least 2 topics, got {}",
                self.topics
            )));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite())
            || !(self.beta > 0.0 && self.beta.is_finite())
        {
            return Err(Error::InvalidConfig(
                "alpha and beta must be positive".into(),
            ));
        }
        if self.burnin >= self.iters {
            return Err(Error::InvalidConfig(format!(
                "burnin ({}) must be smaller than iters ({})",
                self.burnin, self.iters
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidConfig("thin must be at least 1".into()));
        }
        Ok(())
    }

    /// Whether the state after 1-based sweep `sweep` contributes to the estimates.
    fn retains(&self, sweep: usize) -> bool {
        sweep > self.burnin && (sweep - self.burnin).is_multiple_of(self.thin)
    }
}

/// Unnormalized collapsed conditional weight of one topic.
pub fn collapsed_weight(
    n_dk: f64,
    n_kw: f64,
    n_k: f64,
    alpha: f64,
    beta: f64,
    vocab_size: usize,
) -> f64 {
    (n_dk + alpha) * (n_kw + beta) / (n_k + vocab_size as f64 * beta)
}

/// Collapsed Gibbs bookkeeping: per-token assignments and the count tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GibbsState {
    topics: usize,
    vocab_size: usize,
    pub z: Vec<Vec<usize>>,
    /// D x K, row-major.
    pub n_dk: Vec<u32>,
    /// K x V, row-major.
    pub n_kw: Vec<u32>,
    pub n_k: Vec<u32>,
}

impl GibbsState {
    /// Build the count tables from explicit assignments.
    pub fn from_assignments(
        docs: &[Vec<usize>],
        z: Vec<Vec<usize>>,
        topics: usize,
        vocab_size: usize,
    ) -> Result<Self> {
        if z.len() != docs.len() || z.iter().zip(docs).any(|(a, d)| a.len() != d.len()) {
            return Err(Error::Dimension(
                "assignments do not align with documents".into(),
            ));
        }
        if z.iter().flatten().any(|&k| k >= topics)
            || docs.iter().flatten().any(|&w| w >= vocab_size)
        {
            return Err(Error::Dimension("topic or word id out of range".into()));
        }
        let mut state = Self {
            topics,
            vocab_size,
            z,
            n_dk: vec![0; docs.len() * topics],
            n_kw: vec![0; topics * vocab_size],
            n_k: vec![0; topics],
        };
        for (d, doc) in docs.iter().enumerate() {
            for (i, &w) in doc.iter().enumerate() {
                let k = state.z[d][i];
                state.increment(d, w, k);
            }
        }
        Ok(state)
    }

    fn random(docs: &[Vec<usize>], topics: usize, vocab_size: usize, rng: &mut impl Rng) -> Self {
        let z = docs
            .iter()
            .map(|doc| doc.iter().map(|_| rng.random_range(0..topics)).collect())
            .collect();
        Self::from_assignments(docs, z, topics, vocab_size)
            .expect("random assignments are in range")
    }

    pub fn topics(&self) -> usize {
        self.topics
    }

    pub fn dk(&self, d: usize, k: usize) -> u32 {
        self.n_dk[d * self.topics + k]
    }

    pub fn kw(&self, k: usize, w: usize) -> u32 {
        self.n_kw[k * self.vocab_size + w]
    }

    fn increment(&mut self, d: usize, w: usize, k: usize) {
        self.n_dk[d * self.topics + k] += 1;
        self.n_kw[k * self.vocab_size + w] += 1;
        self.n_k[k] += 1;
    }

    fn decrement(&mut self, d: usize, w: usize, k: usize) {
        self.n_dk[d * self.topics + k] -= 1;
        self.n_kw[k * self.vocab_size + w] -= 1;
        self.n_k[k] -= 1;
    }

    /// Unnormalized conditional over topics for word `w` in document `d`,
    /// assuming the token being resampled is already removed from the counts.
    pub fn conditional_into(&self, d: usize, w: usize, alpha: f64, beta: f64, out: &mut [f64]) {
        let v_beta = self.vocab_size as f64 * beta;
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = (self.dk(d, k) as f64 + alpha) * (self.kw(k, w) as f64 + beta)
                / (self.n_k[k] as f64 + v_beta);
        }
    }

    fn sweep(
        &mut self,
        docs: &[Vec<usize>],
        alpha: f64,
        beta: f64,
        rng: &mut impl Rng,
        weights: &mut [f64],
    ) {
        for (d, doc) in docs.iter().enumerate() {
            for (i, &w) in doc.iter().enumerate() {
                let old = self.z[d][i];
                self.decrement(d, w, old);
                self.conditional_into(d, w, alpha, beta, weights);
                let mut acc = 0.0;
                for slot in weights.iter_mut() {
                    acc += *slot;
                    *slot = acc;
                }
                let u = rng.random::<f64>() * acc;
                let new = weights
                    .iter()
                    .position(|&c| u < c)
                    .unwrap_or(self.topics - 1);
                self.z[d][i] = new;
                self.increment(d, w, new);
            }
        }
    }

    /// Verify count conservation and that the tables match a rebuild from `z`.
    pub fn check_invariants(&self, docs: &[Vec<usize>]) -> std::result::Result<(), String> {
        let rebuilt = Self::from_assignments(docs, self.z.clone(), self.topics, self.vocab_size)
            .map_err(|e| e.to_string())?;
        if rebuilt != *self {
            return Err("incremental counts differ from counts rebuilt from assignments".into());
        }
        let total: usize = docs.iter().map(Vec::len).sum();
        for (d, doc) in docs.iter().enumerate() {
            let row: u32 = (0..self.topics).map(|k| self.dk(d, k)).sum();
            if row as usize != doc.len() {
                return Err(format!(
                    "document {d}: topic counts sum to {row}, length {}",
                    doc.len()
                ));
            }
        }
        for k in 0..self.topics {
            let row: u32 = (0..self.vocab_size).map(|w| self.kw(k, w)).sum();
            if row != self.n_k[k] {
                return Err(format!(
                    "topic {k}: word counts sum to {row}, total {}",
                    self.n_k[k]
                ));
            }
        }
        let nk_total: u32 = self.n_k.iter().sum();
        let ndk_total: u32 = self.n_dk.iter().sum();
        if nk_total as usize != total || ndk_total as usize != total {
            return Err(format!(
                "count totals {nk_total}/{ndk_total} differ from token total {total}"
            ));
        }
        Ok(())
    }

    /// Collapsed joint log-likelihood log p(w, z | alpha, beta).
    pub fn log_likelihood(&self, doc_lengths: &[usize], alpha: f64, beta: f64) -> f64 {
        let v_beta = self.vocab_size as f64 * beta;
        let k_alpha = self.topics as f64 * alpha;
        let (lg_beta, lg_vbeta) = (ln_gamma(beta), ln_gamma(v_beta));
        let (lg_alpha, lg_kalpha) = (ln_gamma(alpha), ln_gamma(k_alpha));
        let mut ll = 0.0;
        for t in 0..self.topics {
            // Zero cells contribute lnΓ(β) - lnΓ(β) = 0.
            let cells: f64 = self.n_kw[t * self.vocab_size..(t + 1) * self.vocab_size]
                .iter()
                .filter(|&&c| c > 0)
                .map(|&c| ln_gamma(c as f64 + beta) - lg_beta)
                .sum();
            ll += lg_vbeta + cells - ln_gamma(self.n_k[t] as f64 + v_beta);
        }
        for (d, &len) in doc_lengths.iter().enumerate() {
            let cells: f64 = (0..self.topics)
                .map(|t| ln_gamma(self.dk(d, t) as f64 + alpha) - lg_alpha)
                .sum();
            ll += lg_kalpha + cells - ln_gamma(len as f64 + k_alpha);
        }
        ll
    }
}

/// Fitted topic model. `phi` is K x V, `theta` is D x K; both row-stochastic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub topics: usize,
    pub phi: Matrix,
    pub theta: Matrix,
    pub config: LdaConfig,
    pub loglik_trace: Vec<f64>,
    pub samples: usize,
    pub rng: String,
    pub vocab_hash: String,
    pub doc_ids: Vec<String>,
}

impl TopicModel {
    pub fn theta_row(&self, d: usize) -> &[f64] {
        self.theta.row(d)
    }
}

pub fn fit_lda(corpus: &Corpus, config: &LdaConfig) -> Result<TopicModel> {
    fit_lda_observed(corpus, config, |_, _| {})
}

/// As [`fit_lda`], calling `observe(sweep, state)` after every sweep.
pub fn fit_lda_observed(
    corpus: &Corpus,
    config: &LdaConfig,
    mut observe: impl FnMut(usize, &GibbsState),
) -> Result<TopicModel> {
    config.validate()?;
    let tokens = corpus.num_tokens();
    if corpus.num_docs() == 0 || tokens == 0 {
        return Err(Error::EmptyCorpus);
    }
    if config.topics > tokens {
        return Err(Error::TooManyTopics {
            topics: config.topics,
            tokens,
        });
    }
    let k = config.topics;
    let v = corpus.vocab.len();
    let d_count = corpus.num_docs();
    let (alpha, beta) = (config.alpha, config.beta);
    let lengths: Vec<usize> = corpus.docs.iter().map(Vec::len).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut state = GibbsState::random(&corpus.docs, k, v, &mut rng);
    let mut weights = vec![0.0; k];
    let mut theta_sum = vec![0.0; d_count * k];
    let mut phi_sum = vec![0.0; k * v];
    let mut samples = 0usize;
    let mut trace = Vec::with_capacity(config.iters);

    let accumulate = |state: &GibbsState, theta_sum: &mut [f64], phi_sum: &mut [f64]| {
        for d in 0..d_count {
            let denom = lengths[d] as f64 + k as f64 * alpha;
            for t in 0..k {
                theta_sum[d * k + t] += (state.dk(d, t) as f64 + alpha) / denom;
            }
        }
        for t in 0..k {
            let denom = state.n_k[t] as f64 + v as f64 * beta;
            for w in 0..v {
                phi_sum[t * v + w] += (state.kw(t, w) as f64 + beta) / denom;
            }
        }
    };

    for sweep in 1..=config.iters {
        state.sweep(&corpus.docs, alpha, beta, &mut rng, &mut weights);
        if cfg!(debug_assertions) {
            if let Err(msg) = state.check_invariants(&corpus.docs) {
                panic!("Gibbs invariant violated after sweep {sweep}: {msg}");
            }
        }
        trace.push(state.log_likelihood(&lengths, alpha, beta));
        observe(sweep, &state);
        if config.retains(sweep) {
            accumulate(&state, &mut theta_sum, &mut phi_sum);
            samples += 1;
        }
    }
    if samples == 0 {
        accumulate(&state, &mut theta_sum, &mut phi_sum);
        samples = 1;
    }

    let mut theta = Matrix::from_row_major(d_count, k, theta_sum)?;
    let mut phi = Matrix::from_row_major(k, v, phi_sum)?;
    normalize_rows(&mut theta);
    normalize_rows(&mut phi);
    Ok(TopicModel {
        topics: k,
        phi,
        theta,
        config: config.clone(),
        loglik_trace: trace,
        samples,
        rng: RNG_NAME.to_string(),
        vocab_hash: corpus.vocab.hash(),
        doc_ids: corpus.doc_ids.clone(),
    })
}

/// Rows are averages of normalized vectors; renormalizing only removes
/// rounding drift.
fn normalize_rows(m: &mut Matrix) {
    for i in 0..m.rows() {
        let row = m.row_mut(i);
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|x| *x /= s);
    }
}

/// The `n` most probable terms of topic `k`, ties broken lexicographically.
pub fn top_words(model: &TopicModel, vocab: &Vocabulary, k: usize, n: usize) -> Vec<(String, f64)> {
    let row = model.phi.row(k);
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| {
        row[b]
            .partial_cmp(&row[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| vocab.term(a).cmp(vocab.term(b)))
    });
    order
        .into_iter()
        .take(n)
        .map(|w| (vocab.term(w).to_string(), row[w]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(docs: Vec<Vec<usize>>, v: usize) -> Corpus {
        let vocab = Vocabulary::new((0..v).map(|i| format!("w{i:02}")).collect()).unwrap();
        let ids = (0..docs.len()).map(|i| i.to_string()).collect();
        Corpus::new(docs, ids, vocab).unwrap()
    }

    #[test]
    fn conditional_matches_hand_evaluation() {
        // No counts at all: (0.5 * 0.1 / (0 + 10 * 0.1)) for both topics.
        let docs = vec![vec![]];
        let state = GibbsState::from_assignments(&docs, vec![vec![]], 2, 10).unwrap();
        let mut out = [0.0; 2];
        state.conditional_into(0, 3, 0.5, 0.1, &mut out);
        assert!((out[0] - 0.05).abs() < 1e-15 && (out[1] - 0.05).abs() < 1e-15);

        // n_dk = (3,0), n_kw[.,w=0] = (2,0), n_k = (5,0), V = 4.
        let docs = vec![vec![0, 0, 1], vec![2, 2]];
        let z = vec![vec![0, 0, 0], vec![0, 0]];
        let state = GibbsState::from_assignments(&docs, z, 2, 4).unwrap();
        state.conditional_into(0, 0, 1.0, 1.0, &mut out);
        assert!((out[0] - 4.0 / 3.0).abs() < 1e-15);
        assert!((out[1] - 0.25).abs() < 1e-15);
        assert_eq!(out[0], collapsed_weight(3.0, 2.0, 5.0, 1.0, 1.0, 4));
    }

    #[test]
    fn symmetric_counts_give_equal_weights() {
        let docs = vec![vec![0, 1, 0, 1]];
        let state = GibbsState::from_assignments(&docs, vec![vec![0, 0, 1, 1]], 2, 2).unwrap();
        let mut out = [0.0; 2];
        state.conditional_into(0, 0, 0.3, 0.2, &mut out);
        assert_eq!(out[0], out[1]);
    }

    #[test]
    fn log_likelihood_matches_direct_formula() {
        let docs = vec![vec![0, 1, 1], vec![2]];
        let z = vec![vec![0, 1, 1], vec![0]];
        let state = GibbsState::from_assignments(&docs, z, 2, 3).unwrap();
        let (a, b) = (0.7, 0.3);
        let lg = ln_gamma;
        // topic 0: words {0:1, 2:1}, n=2; topic 1: {1:2}, n=2
        let topic = |counts: [f64; 3], n: f64| {
            lg(3.0 * b) - 3.0 * lg(b) + counts.iter().map(|&c| lg(c + b)).sum::<f64>()
                - lg(n + 3.0 * b)
        };
        let doc = |counts: [f64; 2], n: f64| {
            lg(2.0 * a) - 2.0 * lg(a) + counts.iter().map(|&c| lg(c + a)).sum::<f64>()
                - lg(n + 2.0 * a)
        };
        let expected = topic([1.0, 0.0, 1.0], 2.0)
            + topic([0.0, 2.0, 0.0], 2.0)
            + doc([1.0, 2.0], 3.0)
            + doc([1.0, 0.0], 1.0);
        let got = state.log_likelihood(&[3, 1], a, b);
        assert!((got - expected).abs() < 1e-10, "{got} vs {expected}");
    }

    #[test]
    fn separable_two_document_corpus() {
        let docs = vec![[0, 1].repeat(15), [2, 3].repeat(15)];
        let c = corpus(docs, 4);
        let cfg = LdaConfig {
            alpha: 0.1,
            iters: 500,
            burnin: 250,
            ..LdaConfig::new(2)
        };
        let m = fit_lda(&c, &cfg).unwrap();
        let dom: Vec<usize> = (0..2)
            .map(|d| {
                if m.theta.get(d, 0) > m.theta.get(d, 1) {
                    0
                } else {
                    1
                }
            })
            .collect();
        assert_ne!(dom[0], dom[1]);
        for (d, &k) in dom.iter().enumerate() {
            assert!(m.theta.get(d, k) >= 0.9, "theta row {:?}", m.theta.row(d));
        }
    }

    #[test]
    fn empty_document_gets_uniform_theta_and_rows_normalize() {
        let c = corpus(vec![vec![0, 1, 2], vec![], vec![2, 2, 3]], 4);
        let cfg = LdaConfig {
            iters: 50,
            burnin: 10,
            thin: 5,
            ..LdaConfig::new(4)
        };
        let m = fit_lda(&c, &cfg).unwrap();
        for t in 0..4 {
            assert!((m.theta.get(1, t) - 0.25).abs() < 1e-12);
        }
        for row in m.theta.iter_rows().chain(m.phi.iter_rows()) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-8);
            assert!(row.iter().all(|&x| x >= 0.0));
        }
        assert_eq!(m.samples, 8);
        assert_eq!(m.loglik_trace.len(), 50);
        assert!(m.loglik_trace.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn invariants_after_every_sweep_and_determinism() {
        let c = corpus(vec![vec![0, 1, 2, 3, 4], vec![4, 4, 3], vec![1], vec![]], 5);
        let cfg = LdaConfig {
            iters: 40,
            burnin: 20,
            thin: 3,
            seed: 9,
            ..LdaConfig::new(3)
        };
        let mut trajectory = Vec::new();
        let m1 = fit_lda_observed(&c, &cfg, |_, s| {
            s.check_invariants(&c.docs).unwrap();
            trajectory.push(s.z.clone());
        })
        .unwrap();
        let mut again = Vec::new();
        let m2 = fit_lda_observed(&c, &cfg, |_, s| again.push(s.z.clone())).unwrap();
        assert_eq!(trajectory, again);
        assert_eq!(m1, m2);
        assert_eq!(
            serde_json::to_string(&m1).unwrap(),
            serde_json::to_string(&m2).unwrap()
        );
    }

    #[test]
    fn config_and_corpus_errors() {
        let c = corpus(vec![vec![0, 1]], 2);
        assert!(matches!(
            fit_lda(&c, &LdaConfig::new(3)),
            Err(Error::TooManyTopics {
                topics: 3,
                tokens: 2
            })
        ));
        assert!(fit_lda(&c, &LdaConfig::new(1)).is_err());
        assert!(fit_lda(
            &c,
            &LdaConfig {
                burnin: 1000,
                ..LdaConfig::new(2)
            }
        )
        .is_err());
        assert!(fit_lda(
            &c,
            &LdaConfig {
                thin: 0,
                ..LdaConfig::new(2)
            }
        )
        .is_err());
    }

    fn model_with_phi(rows: Vec<Vec<f64>>) -> TopicModel {
        TopicModel {
            topics: rows.len(),
            phi: Matrix::from_rows(&rows).unwrap(),
            theta: Matrix::zeros(0, rows.len()),
            config: LdaConfig::new(rows.len().max(2)),
            loglik_trace: vec![],
            samples: 1,
            rng: RNG_NAME.into(),
            vocab_hash: String::new(),
            doc_ids: vec![],
        }
    }

    #[test]
    fn top_words_sorting_and_ties() {
        let vocab = Vocabulary::new(vec!["x".into(), "y".into(), "z".into()]).unwrap();
        let m = model_with_phi(vec![vec![0.5, 0.3, 0.2], vec![0.25, 0.5, 0.25]]);
        assert_eq!(
            top_words(&m, &vocab, 0, 2),
            vec![("x".to_string(), 0.5), ("y".to_string(), 0.3)]
        );
        let all: Vec<String> = top_words(&m, &vocab, 1, 3)
            .into_iter()
            .map(|(t, _)| t)
            .collect();
        assert_eq!(all, vec!["y", "x", "z"]);
    }
}
