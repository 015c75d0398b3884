use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::models::{evaluate_model, CurveModel, ModelId};
use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 200;
const RELATIVE_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataPoint {
    pub x: f64,
    pub y: f64,
    /// Per-point standard deviation; `None` weights all points equally.
    pub sigma: Option<f64>,
}

impl DataPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y, sigma: None }
    }

    pub fn with_sigma(x: f64, y: f64, sigma: f64) -> Self {
        Self { x, y, sigma: Some(sigma) }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FitResult {
    /// Input model with the free parameters replaced by their estimates.
    pub model: CurveModel,
    pub params: BTreeMap<String, f64>,
    pub sigmas: BTreeMap<String, f64>,
    pub rss: f64,
    pub dof: usize,
    pub iterations: usize,
    pub converged: bool,
    /// `P_n = (w + 2) / 3` when `w` is part of the model.
    pub derived: BTreeMap<String, f64>,
}

/// Parameters fitted by default for each model.
pub fn default_free_params(model: ModelId) -> &'static [&'static str] {
    match model {
        ModelId::FQec | ModelId::FLinear => &["O", "A"],
        ModelId::Weighted => &["w", "A", "O"],
        ModelId::MultiRoundState => &["w", "A_prime"],
        ModelId::Decay => &["A", "T", "n_exp"],
        ModelId::SyndromeIdeal | ModelId::SyndromeDetected => &["p_in1", "p_in2", "p_in3"],
    }
}

/// Starting point for the default free parameters. The decay time is read
/// off the data as the first time the contrast falls below `1/e`.
pub fn initial_guess(model: ModelId, data: &[DataPoint]) -> CurveModel {
    let m = CurveModel::new(model);
    match model {
        ModelId::FQec | ModelId::FLinear => m.with("O", 0.05).with("A", 0.7),
        ModelId::Weighted => m.with("w", 0.5).with("A", 0.7).with("O", 0.05),
        ModelId::MultiRoundState => m.with("w", 0.5).with("A_prime", 0.8),
        ModelId::Decay => {
            let a = data.first().map_or(1.0, |d| (2.0 * d.y - 1.0).clamp(0.1, 1.0));
            let t = data
                .iter()
                .find(|d| (2.0 * d.y - 1.0) < a / std::f64::consts::E)
                .or(data.last())
                .map_or(1.0, |d| d.x.max(1e-6));
            m.with("A", a).with("T", t).with("n_exp", 2.0)
        }
        ModelId::SyndromeIdeal | ModelId::SyndromeDetected => {
            m.with("p_in1", 0.05).with("p_in2", 0.05).with("p_in3", 0.05)
        }
    }
}

/// Levenberg–Marquardt least squares over the parameters named in `free`;
/// all other parameters of `initial` stay fixed.
///
/// With per-point sigmas the covariance is `(JᵀWJ)⁻¹`; without, it is scaled
/// by the residual variance `rss / (m - k)`.
pub fn fit_curve(initial: &CurveModel, free: &[&str], data: &[DataPoint]) -> Result<FitResult> {
    let k = free.len();
    if k == 0 {
        return Err(Error::InvalidArgument("no free parameters".into()));
    }
    if data.len() <= k {
        return Err(Error::InvalidArgument(format!("{} points cannot constrain {k} parameters", data.len())));
    }
    if let Some(d) = data.iter().find(|d| d.sigma.is_some_and(|s| !(s > 0.0 && s.is_finite()))) {
        return Err(Error::InvalidArgument(format!("sigma at x = {} must be positive", d.x)));
    }
    let weighted = data.iter().all(|d| d.sigma.is_some());
    if !weighted && data.iter().any(|d| d.sigma.is_some()) {
        return Err(Error::InvalidArgument("either all or no points carry a sigma".into()));
    }

    let mut theta = DVector::from_iterator(k, free.iter().map(|name| initial.get(name)).collect::<Result<Vec<_>>>()?);
    let model_at = |theta: &DVector<f64>| {
        let mut m = initial.clone();
        for (name, v) in free.iter().zip(theta.iter()) {
            m.set(name, *v);
        }
        m
    };
    let residuals = |theta: &DVector<f64>| -> Result<DVector<f64>> {
        let m = model_at(theta);
        let r = data
            .iter()
            .map(|d| Ok((d.y - evaluate_model(&m, d.x)?) / d.sigma.unwrap_or(1.0)))
            .collect::<Result<Vec<_>>>()?;
        Ok(DVector::from_vec(r))
    };

    let mut r = residuals(&theta)?;
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let j = jacobian(&residuals, &theta, &r)?;
        let jtj = j.transpose() * &j;
        let grad = j.transpose() * &r;
        let mut improved = false;
        while lambda < 1e12 {
            let mut a = jtj.clone();
            for i in 0..k {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-12);
            }
            let Some(step) = a.lu().solve(&grad) else {
                lambda *= 10.0;
                continue;
            };
            let cand = &theta - &step;
            match residuals(&cand) {
                Ok(rc) if rc.norm_squared().is_finite() && rc.norm_squared() <= cost => {
                    let new_cost = rc.norm_squared();
                    let small_step = step.norm() <= RELATIVE_TOLERANCE * (theta.norm() + RELATIVE_TOLERANCE);
                    converged = cost - new_cost <= RELATIVE_TOLERANCE * cost || small_step || new_cost < 1e-30;
                    theta = cand;
                    r = rc;
                    cost = new_cost;
                    lambda = (lambda / 10.0).max(1e-12);
                    improved = true;
                    break;
                }
                _ => lambda *= 10.0,
            }
        }
        if !improved {
            // No downhill step at any damping: already at the minimum.
            converged = true;
        }
        if converged {
            break;
        }
    }

    let j = jacobian(&residuals, &theta, &r)?;
    let dof = data.len() - k;
    let scale = if weighted { 1.0 } else { cost / dof as f64 };
    let cov = (j.transpose() * &j).try_inverse().ok_or(Error::Singular)? * scale;

    let model = model_at(&theta);
    let params: BTreeMap<_, _> = free.iter().zip(theta.iter()).map(|(n, v)| (n.to_string(), *v)).collect();
    let sigmas = free.iter().enumerate().map(|(i, n)| (n.to_string(), cov[(i, i)].max(0.0).sqrt())).collect();
    let mut derived = BTreeMap::new();
    if let Some(w) = model.params.get("w") {
        derived.insert("P_n".to_string(), (w + 2.0) / 3.0);
    }
    Ok(FitResult { model, params, sigmas, rss: cost, dof, iterations, converged, derived })
}

fn jacobian(
    residuals: &impl Fn(&DVector<f64>) -> Result<DVector<f64>>,
    theta: &DVector<f64>,
    r: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    let mut j = DMatrix::zeros(r.len(), theta.len());
    for i in 0..theta.len() {
        let h = 1e-7 * theta[i].abs().max(1e-3);
        let mut up = theta.clone();
        let mut down = theta.clone();
        up[i] += h;
        down[i] -= h;
        // One-sided at a domain edge.
        let (ru, rd, span) = match (residuals(&up), residuals(&down)) {
            (Ok(u), Ok(d)) => (u, d, 2.0 * h),
            (Ok(u), Err(_)) => (u, r.clone(), h),
            (Err(_), Ok(d)) => (r.clone(), d, h),
            (Err(e), Err(_)) => return Err(e),
        };
        j.set_column(i, &((ru - rd) / span));
    }
    Ok(j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    fn grid(n: usize, hi: f64) -> impl Iterator<Item = f64> {
        (0..n).map(move |i| hi * i as f64 / (n - 1) as f64)
    }

    #[test]
    fn recovers_noiseless_weighted_model() {
        let truth = CurveModel::new(ModelId::Weighted).with("w", 0.81).with("A", 0.557).with("O", 0.086);
        let data: Vec<_> = grid(11, 1.0).map(|x| DataPoint::new(x, evaluate_model(&truth, x).unwrap())).collect();
        let fit = fit_curve(&initial_guess(ModelId::Weighted, &data), &["w", "A", "O"], &data).unwrap();
        assert!(fit.converged);
        for (name, v) in &fit.params {
            assert!((v - truth.params[name]).abs() < 1e-8, "{name}: {v}");
        }
        assert!((fit.derived["P_n"] - (0.81 + 2.0) / 3.0).abs() < 1e-8);
    }

    #[test]
    fn recovers_decay_with_noise() {
        let truth = CurveModel::new(ModelId::Decay).with("A", 0.95).with("T", 13.7).with("n_exp", 2.37);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let noise = Normal::new(0.0, 0.005).unwrap();
        let data: Vec<_> = grid(30, 40.0)
            .map(|t| DataPoint::with_sigma(t, evaluate_model(&truth, t).unwrap() + noise.sample(&mut rng), 0.005))
            .collect();
        let fit = fit_curve(&initial_guess(ModelId::Decay, &data), default_free_params(ModelId::Decay), &data).unwrap();
        assert!(fit.converged);
        for name in ["A", "T", "n_exp"] {
            assert!((fit.params[name] - truth.params[name]).abs() < 4.0 * fit.sigmas[name], "{name}");
        }
    }

    #[test]
    fn fixed_parameters_stay_fixed() {
        let truth =
            CurveModel::new(ModelId::MultiRoundState).with("w", 0.66).with("A_prime", 0.85).with("n_rounds", 2.0);
        let data: Vec<_> = grid(8, 0.5).map(|x| DataPoint::new(x, evaluate_model(&truth, x).unwrap())).collect();
        let start = initial_guess(ModelId::MultiRoundState, &data).with("n_rounds", 2.0);
        let fit = fit_curve(&start, &["w", "A_prime"], &data).unwrap();
        assert_eq!(fit.model.params["n_rounds"], 2.0);
        assert!((fit.params["w"] - 0.66).abs() < 1e-7);
    }

    #[test]
    fn rejects_bad_input() {
        let m = initial_guess(ModelId::FQec, &[]);
        let data = [DataPoint::new(0.0, 0.6), DataPoint::new(0.5, 0.4)];
        assert!(fit_curve(&m, &["O", "A"], &data).is_err());
        let mixed = [DataPoint::new(0.0, 0.6), DataPoint::with_sigma(0.2, 0.5, 0.1), DataPoint::new(0.5, 0.4)];
        assert!(fit_curve(&m, &["O", "A"], &mixed).is_err());
        assert!(matches!(
            fit_curve(&m, &["O", "B"], &mixed[..1].iter().chain(&data).copied().collect::<Vec<_>>()),
            Err(Error::MissingParameter(_))
        ));
    }
}
