//! Synthetic corpora and engagement counts drawn from known parameters.
//!
//! Counts come from the Gamma-Poisson mixture: `λ ~ Gamma(1/α, αμ)`,
//! `y ~ Poisson(λ)`, which is exactly the NB2 law the regression fits.

use chrono::{DateTime, Datelike, Duration, NaiveDate, TimeZone, Timelike, Utc, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{DebateSchedule, FollowerSnapshot, Party, Tweet};
use crate::matrix::{dot, Matrix};
use crate::textproc::{Corpus, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DocLength {
    /// Poisson with this mean, floored at one token.
    Poisson(f64),
    Fixed(usize),
}

/// Regression truth for the campaign-style generator, in design column order
/// (intercept, dem_debate, rep_debate, followers_millions, weekend, topics
/// 1..K-1 relative to topic 0, then hours 1..23 relative to hour 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub docs: usize,
    pub vocab_size: usize,
    pub topics: usize,
    pub doc_len: DocLength,
    pub lda_alpha: f64,
    pub lda_beta: f64,
    pub beta_true: Vec<f64>,
    pub alpha_true: f64,
    pub start: DateTime<Utc>,
    pub days: u32,
    pub debates: Vec<(NaiveDate, Party)>,
    /// Follower count at the start and end of the period (linear growth).
    pub followers_start: u64,
    pub followers_end: u64,
    pub snapshot_every_hours: u32,
    /// Snapshot outage as (start day, end day) offsets from `start`.
    pub snapshot_gap_days: Option<(f64, f64)>,
    pub seed: u64,
}

impl SynthSpec {
    /// Roughly the shape of a 100-day campaign: 2120 short documents, four
    /// topics, six debates and a follower series with one multi-day outage.
    pub fn campaign(seed: u64) -> Self {
        let d = |y, m, day| NaiveDate::from_ymd_opt(y, m, day).expect("valid date");
        let mut beta_true = vec![4.878, 0.286, -0.165, 0.629, -0.113, 0.0368, 0.545, 0.0840];
        beta_true
            .extend((1..24).map(|h| 0.15 * (2.0 * std::f64::consts::PI * h as f64 / 24.0).sin()));
        Self {
            docs: 2120,
            vocab_size: 400,
            topics: 4,
            doc_len: DocLength::Poisson(12.0),
            lda_alpha: 0.3,
            lda_beta: 0.05,
            beta_true,
            alpha_true: (-1.346f64).exp(),
            start: Utc
                .with_ymd_and_hms(2015, 9, 18, 0, 0, 0)
                .single()
                .expect("valid start"),
            days: 100,
            debates: vec![
                (d(2015, 10, 13), Party::Democratic),
                (d(2015, 11, 14), Party::Democratic),
                (d(2015, 12, 19), Party::Democratic),
                (d(2015, 10, 28), Party::Republican),
                (d(2015, 11, 10), Party::Republican),
                (d(2015, 12, 15), Party::Republican),
            ],
            followers_start: 4_500_000,
            followers_end: 5_450_000,
            snapshot_every_hours: 6,
            snapshot_gap_days: Some((60.0, 64.7)),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = self.docs > 0
            && self.vocab_size > 0
            && self.topics > 0
            && self.lda_alpha > 0.0
            && self.lda_beta > 0.0
            && self.alpha_true >= 0.0;
        let len_ok = match self.doc_len {
            DocLength::Poisson(m) => m > 0.0,
            DocLength::Fixed(n) => n > 0,
        };
        if !positive || !len_ok {
            return Err(Error::InvalidConfig(
                "synthetic spec needs positive sizes and hyperparameters".into(),
            ));
        }
        Ok(())
    }
}

/// Dirichlet draw computed in log space, so tiny concentrations do not
/// underflow every component to zero.
pub fn sample_dirichlet(concentration: f64, k: usize, rng: &mut impl Rng) -> Vec<f64> {
    let shape_gamma = Gamma::new(concentration + 1.0, 1.0).expect("positive shape");
    let logs: Vec<f64> = (0..k)
        .map(|_| {
            // Gamma(a) = Gamma(a + 1) · U^(1/a)
            let g: f64 = shape_gamma.sample(rng);
            let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
            g.ln() + u.ln() / concentration
        })
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

fn sample_categorical(probs: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

pub fn term_name(w: usize) -> String {
    format!("w{w:04}")
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub corpus: Corpus,
    pub theta_true: Matrix,
    pub phi_true: Matrix,
}

/// Draw a corpus from the LDA generative process.
pub fn gen_corpus(spec: &SynthSpec) -> Result<SynthCorpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (k, v) = (spec.topics, spec.vocab_size);
    let phi_rows: Vec<Vec<f64>> = (0..k)
        .map(|_| sample_dirichlet(spec.lda_beta, v, &mut rng))
        .collect();
    let mut theta_rows = Vec::with_capacity(spec.docs);
    let mut docs = Vec::with_capacity(spec.docs);
    let length_dist = match spec.doc_len {
        DocLength::Poisson(mean) => {
            Some(Poisson::new(mean).map_err(|e| Error::InvalidConfig(e.to_string()))?)
        }
        DocLength::Fixed(_) => None,
    };
    for _ in 0..spec.docs {
        let theta = sample_dirichlet(spec.lda_alpha, k, &mut rng);
        let len = match (spec.doc_len, &length_dist) {
            (DocLength::Fixed(n), _) => n,
            (_, Some(dist)) => (dist.sample(&mut rng) as usize).max(1),
            _ => unreachable!(),
        };
        let doc = (0..len)
            .map(|_| {
                let topic = sample_categorical(&theta, &mut rng);
                sample_categorical(&phi_rows[topic], &mut rng)
            })
            .collect();
        theta_rows.push(theta);
        docs.push(doc);
    }
    let vocab = Vocabulary::new((0..v).map(term_name).collect())?;
    let doc_ids = (0..spec.docs).map(|d| format!("doc{d:05}")).collect();
    Ok(SynthCorpus {
        corpus: Corpus::new(docs, doc_ids, vocab)?,
        theta_true: Matrix::from_rows(&theta_rows)?,
        phi_true: Matrix::from_rows(&phi_rows)?,
    })
}

/// NB2 counts for the rows of `x`; `alpha_true = 0` gives plain Poisson draws.
pub fn gen_counts(x: &Matrix, beta_true: &[f64], alpha_true: f64, seed: u64) -> Result<Vec<u64>> {
    if beta_true.len() != x.cols() {
        return Err(Error::Dimension(format!(
            "{} coefficients for {} columns",
            beta_true.len(),
            x.cols()
        )));
    }
    if !(alpha_true >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "dispersion must be nonnegative, got {alpha_true}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    x.iter_rows()
        .map(|row| {
            let eta = dot(row, beta_true);
            if eta > crate::countreg::MAX_LINEAR_PREDICTOR {
                return Err(Error::LinearPredictorOverflow(eta));
            }
            Ok(draw_nb(eta.exp(), alpha_true, &mut rng))
        })
        .collect()
}

/// One Gamma-Poisson draw with mean `mu` and variance `mu (1 + alpha mu)`.
pub fn draw_nb(mu: f64, alpha: f64, rng: &mut impl Rng) -> u64 {
    let lambda = if alpha > 0.0 {
        Gamma::new(1.0 / alpha, alpha * mu)
            .expect("positive gamma parameters")
            .sample(rng)
    } else {
        mu
    };
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("positive rate").sample(rng) as u64
}

/// Intercept plus `covariates` independent standard-normal columns.
pub fn gaussian_design(n: usize, covariates: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut data = Vec::with_capacity(n * (covariates + 1));
    for _ in 0..n {
        data.push(1.0);
        data.extend((0..covariates).map(|_| normal.sample(&mut rng)));
    }
    Matrix::from_row_major(n, covariates + 1, data).expect("sized by construction")
}

#[derive(Debug, Clone)]
pub struct CampaignData {
    pub tweets: Vec<Tweet>,
    pub snapshots: Vec<FollowerSnapshot>,
    pub schedule: DebateSchedule,
    pub theta_true: Matrix,
    pub phi_true: Matrix,
}

fn true_followers(spec: &SynthSpec, at: DateTime<Utc>) -> f64 {
    let span = spec.days as f64 * 86_400.0;
    let frac = ((at - spec.start).num_seconds() as f64 / span).clamp(0.0, 1.0);
    spec.followers_start as f64 + frac * (spec.followers_end as f64 - spec.followers_start as f64)
}

/// Tweets, follower snapshots and a debate schedule in the formats the
/// ingest step reads. Likes follow the NB2 model on the generating topic
/// weights with UTC calendar covariates.
pub fn gen_campaign(spec: &SynthSpec) -> Result<CampaignData> {
    let synth = gen_corpus(spec)?;
    let expected_cols = 5 + (spec.topics - 1) + 23;
    if spec.beta_true.len() != expected_cols {
        return Err(Error::Dimension(format!(
            "campaign truth needs {expected_cols} coefficients, got {}",
            spec.beta_true.len()
        )));
    }
    let schedule = DebateSchedule::new(spec.debates.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5eed_7173);
    let span_secs = spec.days as i64 * 86_400;
    let mut offsets: Vec<i64> = (0..spec.docs)
        .map(|_| rng.random_range(0..span_secs))
        .collect();
    offsets.sort_unstable();

    let mut tweets = Vec::with_capacity(spec.docs);
    for (d, offset) in offsets.iter().enumerate() {
        let created_at = spec.start + Duration::seconds(*offset);
        let date = created_at.date_naive();
        let flag = |b: bool| if b { 1.0 } else { 0.0 };
        let mut x = vec![
            1.0,
            flag(schedule.in_window(date, Party::Democratic)),
            flag(schedule.in_window(date, Party::Republican)),
            true_followers(spec, created_at) / 1e6,
            flag(matches!(created_at.weekday(), Weekday::Sat | Weekday::Sun)),
        ];
        x.extend((1..spec.topics).map(|t| synth.theta_true.get(d, t)));
        x.extend((1..24).map(|h| flag(created_at.hour() == h)));
        let eta = dot(&x, &spec.beta_true);
        if eta > crate::countreg::MAX_LINEAR_PREDICTOR {
            return Err(Error::LinearPredictorOverflow(eta));
        }
        let likes = draw_nb(eta.exp(), spec.alpha_true, &mut rng);
        let text = synth.corpus.decode(d).join(" ");
        tweets.push(Tweet {
            id: format!("t{:06}", d + 1),
            text,
            created_at,
            likes,
        });
    }

    let step = Duration::hours(spec.snapshot_every_hours.max(1) as i64);
    let mut snapshots = Vec::new();
    let mut at = spec.start;
    let end = spec.start + Duration::days(spec.days as i64);
    while at <= end {
        let day = (at - spec.start).num_seconds() as f64 / 86_400.0;
        let in_gap = spec
            .snapshot_gap_days
            .is_some_and(|(a, b)| day >= a && day < b);
        if !in_gap {
            snapshots.push(FollowerSnapshot {
                observed_at: at,
                count: true_followers(spec, at).round() as u64,
            });
        }
        at += step;
    }

    Ok(CampaignData {
        tweets,
        snapshots,
        schedule,
        theta_true: synth.theta_true,
        phi_true: synth.phi_true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::countreg::nb_log_pmf;

    fn small_spec(seed: u64) -> SynthSpec {
        SynthSpec {
            docs: 200,
            vocab_size: 50,
            topics: 4,
            doc_len: DocLength::Poisson(8.0),
            ..SynthSpec::campaign(seed)
        }
    }

    #[test]
    fn fixed_length_documents() {
        let spec = SynthSpec {
            doc_len: DocLength::Fixed(1),
            ..small_spec(1)
        };
        let c = gen_corpus(&spec).unwrap();
        assert!(c.corpus.docs.iter().all(|d| d.len() == 1));
        let spec = SynthSpec {
            doc_len: DocLength::Poisson(0.5),
            ..small_spec(1)
        };
        assert!(gen_corpus(&spec)
            .unwrap()
            .corpus
            .docs
            .iter()
            .all(|d| !d.is_empty()));
    }

    #[test]
    fn small_concentration_gives_near_degenerate_theta() {
        let spec = SynthSpec {
            lda_alpha: 0.01,
            docs: 2000,
            ..small_spec(2)
        };
        let c = gen_corpus(&spec).unwrap();
        let peaked = c
            .theta_true
            .iter_rows()
            .filter(|r| r.iter().copied().fold(0.0, f64::max) > 0.95)
            .count();
        assert!(peaked as f64 > 0.9 * 2000.0, "{peaked}");
        for row in c.theta_true.iter_rows().chain(c.phi_true.iter_rows()) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = gen_corpus(&small_spec(5)).unwrap();
        let b = gen_corpus(&small_spec(5)).unwrap();
        assert_eq!(a.corpus, b.corpus);
        assert_eq!(a.theta_true, b.theta_true);
        let x = gaussian_design(50, 2, 1);
        assert_eq!(
            gen_counts(&x, &[1.0, 0.5, -0.3], 0.3, 4).unwrap(),
            gen_counts(&x, &[1.0, 0.5, -0.3], 0.3, 4).unwrap()
        );
    }

    #[test]
    fn count_errors() {
        let x = Matrix::from_rows(&[vec![1.0]]).unwrap();
        assert!(matches!(
            gen_counts(&x, &[800.0], 0.3, 0),
            Err(Error::LinearPredictorOverflow(_))
        ));
        assert!(gen_counts(&x, &[1.0, 2.0], 0.3, 0).is_err());
        assert!(gen_counts(&x, &[1.0], -0.1, 0).is_err());
    }

    fn draws(mu: f64, alpha: f64, n: usize, seed: u64) -> Vec<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| draw_nb(mu, alpha, &mut rng)).collect()
    }

    /// Sample mean and variance with their standard errors (the variance SE
    /// from the empirical fourth central moment).
    fn moments(sample: &[u64]) -> (f64, f64, f64, f64) {
        let n = sample.len() as f64;
        let mean = sample.iter().map(|&y| y as f64).sum::<f64>() / n;
        let m2 = sample
            .iter()
            .map(|&y| (y as f64 - mean).powi(2))
            .sum::<f64>()
            / n;
        let m4 = sample
            .iter()
            .map(|&y| (y as f64 - mean).powi(4))
            .sum::<f64>()
            / n;
        (
            mean,
            (m2 / n).sqrt(),
            m2 * n / (n - 1.0),
            ((m4 - m2 * m2) / n).sqrt(),
        )
    }

    #[test]
    fn poisson_and_nb_moments() {
        let (mean, se_mean, var, se_var) = moments(&draws(4.0, 0.0, 1_000_000, 11));
        assert!((mean - 4.0).abs() < 3.0 * se_mean, "{mean}");
        assert!((var - 4.0).abs() < 3.0 * se_var, "{var}");

        let (mean, se_mean, var, se_var) = moments(&draws(4.0, 1.0, 1_000_000, 12));
        assert!((mean - 4.0).abs() < 3.0 * se_mean, "{mean}");
        assert!((var - 20.0).abs() < 3.0 * se_var, "{var} ± {se_var}");
    }

    #[test]
    fn empirical_pmf_matches_likelihood() {
        let n = 1_000_000usize;
        for (mu, alpha, seed) in [(1.0, 1.0, 21u64), (4.0, 0.3, 22)] {
            let sample = draws(mu, alpha, n, seed);
            let mut freq = [0usize; 21];
            for &y in &sample {
                if y <= 20 {
                    freq[y as usize] += 1;
                }
            }
            for y in 0..=20u64 {
                let p = nb_log_pmf(y, mu, alpha).unwrap().exp();
                let se = (p * (1.0 - p) / n as f64).sqrt();
                let emp = freq[y as usize] as f64 / n as f64;
                assert!(
                    (emp - p).abs() <= 3.0 * se + 1e-12,
                    "mu={mu} alpha={alpha} y={y}: {emp} vs {p}"
                );
            }
        }
    }

    #[test]
    fn campaign_shape() {
        let data = gen_campaign(&SynthSpec::campaign(7)).unwrap();
        assert_eq!(data.tweets.len(), 2120);
        assert_eq!(data.schedule.entries().len(), 6);
        assert!(data
            .tweets
            .windows(2)
            .all(|w| w[0].created_at <= w[1].created_at));
        let mean = data.tweets.iter().map(|t| t.likes as f64).sum::<f64>() / 2120.0;
        assert!(mean > 1000.0 && mean < 10_000.0, "{mean}");
    }
}
