//! Reference loss terms and inference-side selection math.

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::invalid(format!("length mismatch: {a} predictions vs {b} targets")));
    }
    if a == 0 {
        return Err(Error::invalid("empty input"));
    }
    Ok(())
}

/// Mean Huber-style loss with transition point `beta`.
pub fn smooth_l1(pred: &[f64], target: &[f64], beta: f64) -> Result<f64> {
    check_lengths(pred.len(), target.len())?;
    if !(beta > 0.0) {
        return Err(Error::invalid(format!("beta must be positive, got {beta}")));
    }
    let sum: f64 = pred
        .iter()
        .zip(target)
        .map(|(p, t)| {
            let x = (p - t).abs();
            if x < beta {
                0.5 * x * x / beta
            } else {
                x - 0.5 * beta
            }
        })
        .sum();
    Ok(sum / pred.len() as f64)
}

/// Gradient of [`smooth_l1`] with respect to `pred`.
pub fn smooth_l1_grad(pred: &[f64], target: &[f64], beta: f64) -> Result<Vec<f64>> {
    check_lengths(pred.len(), target.len())?;
    if !(beta > 0.0) {
        return Err(Error::invalid(format!("beta must be positive, got {beta}")));
    }
    let n = pred.len() as f64;
    Ok(pred
        .iter()
        .zip(target)
        .map(|(p, t)| {
            let x = p - t;
            if x.abs() < beta { x / beta / n } else { x.signum() / n }
        })
        .collect())
}

/// Mean binary cross-entropy on logits, in the overflow-free form
/// `max(z, 0) - z t + ln(1 + e^{-|z|})`.
pub fn bce_with_logits(logits: &[f64], targets: &[f64]) -> Result<f64> {
    check_lengths(logits.len(), targets.len())?;
    if let Some((i, t)) = targets.iter().enumerate().find(|(_, t)| !(0.0..=1.0).contains(*t)) {
        return Err(Error::invalid(format!("target {i} = {t} outside [0, 1]")));
    }
    let sum: f64 = logits
        .iter()
        .zip(targets)
        .map(|(&z, &t)| z.max(0.0) - z * t + (-z.abs()).exp().ln_1p())
        .sum();
    Ok(sum / logits.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossWeights {
    pub lambda_aff: f64,
    pub lambda_dir: f64,
    pub lambda_score: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            lambda_aff: 1.0,
            lambda_dir: 1.0,
            lambda_score: 1.0,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        let w = [self.lambda_aff, self.lambda_dir, self.lambda_score];
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::invalid(format!("loss weights must be finite and non-negative, got {w:?}")));
        }
        if w.iter().all(|x| *x == 0.0) {
            return Err(Error::invalid("loss weights are all zero"));
        }
        Ok(())
    }
}

pub fn total_loss(l_aff: f64, l_dir: f64, l_score: f64, w: &LossWeights) -> Result<f64> {
    if ![l_aff, l_dir, l_score].iter().all(|x| x.is_finite()) {
        return Err(Error::invalid(format!(
            "non-finite loss component ({l_aff}, {l_dir}, {l_score})"
        )));
    }
    w.validate()?;
    Ok(w.lambda_aff * l_aff + w.lambda_dir * l_dir + w.lambda_score * l_score)
}

/// Indices whose score is strictly above `threshold`, ascending.
pub fn select_seeds(affordance: &[f64], threshold: f64) -> Vec<usize> {
    affordance
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > threshold)
        .map(|(i, _)| i)
        .collect()
}

/// Draws `count` distinct class indices, each step proportional to the
/// remaining scores. Zero-score classes are never drawn.
pub fn sample_top_directions(scores: &[f64], count: usize, seed: u64) -> Result<Vec<usize>> {
    if let Some((i, s)) = scores.iter().enumerate().find(|(_, s)| !(0.0..=1.0).contains(*s)) {
        return Err(Error::invalid(format!("score {i} = {s} outside [0, 1]")));
    }
    let positive = scores.iter().filter(|s| **s > 0.0).count();
    if count > positive {
        return Err(Error::invalid(format!(
            "requested {count} directions but only {positive} have positive score"
        )));
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dist = WeightedIndex::new(scores).map_err(|e| Error::invalid(e.to_string()))?;
    let mut out = Vec::with_capacity(count);
    for n in 0..count {
        let i = dist.sample(&mut rng);
        out.push(i);
        if n + 1 < count {
            dist.update_weights(&[(i, &0.0)])
                .map_err(|e| Error::invariant(e.to_string()))?;
        }
    }
    Ok(out)
}
