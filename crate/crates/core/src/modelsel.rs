//! Topic-count sweep scored by regression MAE, and AIC comparison.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::countreg::{fit_nb, mae, NbFit};
use crate::design::{build_design, complete_rows, DesignOptions};
use crate::error::{Error, Result};
use crate::ingest::AnalysisRow;
use crate::lda::{fit_lda, LdaConfig};
use crate::textproc::Corpus;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineRule {
    First,
    Last,
}

impl BaselineRule {
    pub fn topic_for(self, k: usize) -> usize {
        match self {
            BaselineRule::First => 0,
            BaselineRule::Last => k - 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub k_min: usize,
    pub k_max: usize,
    /// Fixed document-topic prior; `None` uses 50/K for each K.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iters: usize,
    pub burnin: usize,
    pub thin: usize,
    pub base_seed: u64,
    pub baseline: BaselineRule,
    pub hour_controls: bool,
    /// Fraction of rows held out for the MAE; `None` scores in-sample.
    pub holdout: Option<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let lda = LdaConfig::new(2);
        Self {
            k_min: 2,
            k_max: 9,
            alpha: None,
            beta: lda.beta,
            iters: lda.iters,
            burnin: lda.burnin,
            thin: lda.thin,
            base_seed: 0,
            baseline: BaselineRule::First,
            hour_controls: true,
            holdout: None,
        }
    }
}

impl SweepConfig {
    /// Per-K sampler seed: the base seed XOR K.
    pub fn seed_for(&self, k: usize) -> u64 {
        self.base_seed ^ k as u64
    }

    pub fn lda_config(&self, k: usize) -> LdaConfig {
        LdaConfig {
            topics: k,
            alpha: self.alpha.unwrap_or(50.0 / k as f64),
            beta: self.beta,
            iters: self.iters,
            burnin: self.burnin,
            thin: self.thin,
            seed: self.seed_for(k),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub k: usize,
    pub mae: f64,
    pub aic: f64,
    pub loglik: f64,
    pub converged: bool,
    pub lda_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub entries: Vec<SweepEntry>,
    pub chosen_k: usize,
}

/// Smallest MAE among converged entries; ties go to the smaller K.
pub fn choose_k(entries: &[SweepEntry]) -> Result<usize> {
    entries
        .iter()
        .filter(|e| e.converged && e.mae.is_finite())
        .min_by(|a, b| a.mae.total_cmp(&b.mae).then(a.k.cmp(&b.k)))
        .map(|e| e.k)
        .ok_or(Error::AllFitsFailed)
}

fn holdout_split(n: usize, fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
    let test = ((n as f64) * fraction).round() as usize;
    let (test_idx, train_idx) = idx.split_at(test.min(n));
    let mut train = train_idx.to_vec();
    let mut test = test_idx.to_vec();
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

/// Fit the topic model and regression for one K and score it.
pub fn evaluate_k(
    corpus: &Corpus,
    rows: &[AnalysisRow],
    config: &SweepConfig,
    k: usize,
) -> SweepEntry {
    let seed = config.seed_for(k);
    let failed = || SweepEntry {
        k,
        mae: f64::NAN,
        aic: f64::NAN,
        loglik: f64::NAN,
        converged: false,
        lda_seed: seed,
    };
    let outcome = (|| -> Result<SweepEntry> {
        let model = fit_lda(corpus, &config.lda_config(k))?;
        let options = DesignOptions {
            baseline_topic: config.baseline.topic_for(k),
            hour_controls: config.hour_controls,
            ..Default::default()
        };
        let design = build_design(rows, &corpus.doc_ids, &model.theta, &options)?;
        let (fit, score) = match config.holdout {
            Some(fraction) if fraction > 0.0 => {
                let (train, test) = holdout_split(design.n(), fraction, config.base_seed);
                let fit = fit_nb(&design.select_rows(&train), None)?;
                let score = mae(&design.select_rows(&test), &fit)?;
                (fit, score)
            }
            _ => {
                let fit = fit_nb(&design, None)?;
                let score = mae(&design, &fit)?;
                (fit, score)
            }
        };
        Ok(SweepEntry {
            k,
            mae: score,
            aic: fit.aic,
            loglik: fit.loglik,
            converged: fit.converged,
            lda_seed: seed,
        })
    })();
    outcome.unwrap_or_else(|e| {
        log::warn!("K = {k} failed: {e}");
        failed()
    })
}

pub fn sweep_topics(
    corpus: &Corpus,
    rows: &[AnalysisRow],
    config: &SweepConfig,
) -> Result<SweepResult> {
    if config.k_min < 2 || config.k_min > config.k_max {
        return Err(Error::InvalidConfig(format!(
            "topic range {}..={} must satisfy 2 <= k_min <= k_max",
            config.k_min, config.k_max
        )));
    }
    let rows = &complete_rows(rows);
    let ks: Vec<usize> = (config.k_min..=config.k_max).collect();
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(ks.len());
    // Each K is independent, so splitting the range across threads does not
    // change any entry; chunks are joined back in K order.
    let entries: Vec<SweepEntry> = if workers <= 1 {
        ks.iter()
            .map(|&k| evaluate_k(corpus, rows, config, k))
            .collect()
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = ks
                .chunks(ks.len().div_ceil(workers))
                .map(|chunk| {
                    scope.spawn(move || {
                        chunk
                            .iter()
                            .map(|&k| evaluate_k(corpus, rows, config, k))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("sweep worker panicked"))
                .collect()
        })
    };
    let chosen_k = choose_k(&entries)?;
    Ok(SweepResult { entries, chosen_k })
}

/// Run the sweep `repeats` times with base seeds `base_seed + r`.
pub fn sweep_repeated(
    corpus: &Corpus,
    rows: &[AnalysisRow],
    config: &SweepConfig,
    repeats: usize,
) -> Result<Vec<SweepResult>> {
    (0..repeats.max(1))
        .map(|r| {
            let cfg = SweepConfig {
                base_seed: config.base_seed.wrapping_add(r as u64),
                ..config.clone()
            };
            sweep_topics(corpus, rows, &cfg)
        })
        .collect()
}

/// Most frequent chosen K; ties go to the smaller K.
pub fn modal_k(results: &[SweepResult]) -> Option<usize> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for r in results {
        *counts.entry(r.chosen_k).or_default() += 1;
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(k, _)| k)
}

pub fn sweep_csv(result: &SweepResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["K", "mae", "aic", "loglik", "converged", "seed"])?;
    for e in &result.entries {
        w.write_record([
            e.k.to_string(),
            e.mae.to_string(),
            e.aic.to_string(),
            e.loglik.to_string(),
            e.converged.to_string(),
            e.lda_seed.to_string(),
        ])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::io("<sweep csv>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AicComparison {
    pub best: usize,
    pub aic: Vec<f64>,
    /// AIC minus the smallest AIC, per fit.
    pub delta: Vec<f64>,
}

pub fn compare_aic_values(aic: &[f64]) -> Result<AicComparison> {
    let best = aic
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::EmptyInput("no fits to compare".into()))?;
    Ok(AicComparison {
        best,
        aic: aic.to_vec(),
        delta: aic.iter().map(|a| a - aic[best]).collect(),
    })
}

pub fn compare_aic(fits: &[&NbFit]) -> Result<AicComparison> {
    if let Some(first) = fits.first() {
        if let Some(other) = fits.iter().find(|f| f.n != first.n) {
            return Err(Error::MismatchedObservations(first.n, other.n));
        }
    }
    compare_aic_values(&fits.iter().map(|f| f.aic).collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn entry(k: usize, mae: f64, converged: bool) -> SweepEntry {
        SweepEntry {
            k,
            mae,
            aic: 0.0,
            loglik: 0.0,
            converged,
            lda_seed: k as u64,
        }
    }

    #[test]
    fn choose_k_rules() {
        let e = vec![
            entry(2, 5.0, true),
            entry(3, 4.0, true),
            entry(4, 4.0, true),
            entry(5, 1.0, false),
        ];
        assert_eq!(choose_k(&e).unwrap(), 3);
        assert_eq!(choose_k(&[entry(4, 2.0, true)]).unwrap(), 4);
        assert!(matches!(
            choose_k(&[entry(2, 1.0, false)]),
            Err(Error::AllFitsFailed)
        ));
    }

    #[test]
    fn aic_comparison() {
        let c = compare_aic_values(&[36312.5, 36148.2]).unwrap();
        assert_eq!(c.best, 1);
        assert!((c.delta[0] - 164.3).abs() < 1e-9);
        assert_eq!(compare_aic_values(&[10.0, 10.0]).unwrap().best, 0);
        assert_eq!(compare_aic_values(&[10.0]).unwrap().best, 0);
        assert!(compare_aic_values(&[]).is_err());
    }

    #[test]
    fn seeds_and_modal_k() {
        let cfg = SweepConfig {
            base_seed: 0b1010,
            ..Default::default()
        };
        assert_eq!(cfg.seed_for(3), 0b1001);
        assert_eq!(cfg.lda_config(4).alpha, 12.5);
        let r = |k| SweepResult {
            entries: vec![],
            chosen_k: k,
        };
        assert_eq!(modal_k(&[r(3), r(4), r(3), r(5), r(4)]), Some(3));
        assert_eq!(modal_k(&[r(5), r(3), r(5)]), Some(5));
    }

    #[test]
    fn invalid_range() {
        let corpus = crate::synth::gen_corpus(&crate::synth::SynthSpec {
            docs: 5,
            ..crate::synth::SynthSpec::campaign(0)
        })
        .unwrap()
        .corpus;
        let cfg = SweepConfig {
            k_min: 1,
            ..Default::default()
        };
        assert!(sweep_topics(&corpus, &[], &cfg).is_err());
        let cfg = SweepConfig {
            k_min: 5,
            k_max: 4,
            ..Default::default()
        };
        assert!(sweep_topics(&corpus, &[], &cfg).is_err());
    }

    proptest! {
        #[test]
        fn chosen_k_ignores_entry_order(maes in proptest::collection::vec(0.0f64..10.0, 1..8), rot in 0usize..8) {
            let entries: Vec<_> = maes.iter().enumerate().map(|(i, &m)| entry(i + 2, (m * 4.0).round() / 4.0, true)).collect();
            let mut rotated = entries.clone();
            rotated.rotate_left(rot % entries.len());
            rotated.reverse();
            prop_assert_eq!(choose_k(&entries).unwrap(), choose_k(&rotated).unwrap());
        }
    }
}
