//! Logistic-regression scorer and the error-rate metrics used to compare raw
//! and debiased representations.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::compas::Race;
use crate::linalg::{cholesky, cholesky_solve};
use crate::{Error, Matrix, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LogisticOptions {
    /// Penalty `λ` on `‖w_{1:d}‖²`; the intercept is not penalized.
    pub ridge: f64,
    pub max_iter: usize,
    /// Convergence bound on the gradient ∞-norm.
    pub tol: f64,
}

impl Default for LogisticOptions {
    fn default() -> Self {
        LogisticOptions {
            ridge: 1e-6,
            max_iter: 100,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LogisticModel {
    /// Intercept first, then one weight per feature column.
    pub weights: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl LogisticModel {
    pub fn n_features(&self) -> usize {
        self.weights.len() - 1
    }

    fn linear(&self, row: &[f64]) -> f64 {
        self.weights[0] + crate::matrix::dot(&self.weights[1..], row)
    }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + libm::exp(-t))
    } else {
        let e = libm::exp(t);
        e / (1.0 + e)
    }
}

/// `log(1 + e^t)` without overflow.
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + libm::log1p(libm::exp(-t))
    } else {
        libm::log1p(libm::exp(t))
    }
}

fn check_inputs(features: &Matrix, labels: &[bool], weights: Option<&[f64]>) -> Result<()> {
    if features.nrows() != labels.len() {
        return Err(Error::len(
            "logistic labels",
            features.nrows(),
            labels.len(),
        ));
    }
    if let Some(w) = weights {
        if w.len() != features.ncols() + 1 {
            return Err(Error::len(
                "logistic weights",
                features.ncols() + 1,
                w.len(),
            ));
        }
    }
    Ok(())
}

/// Penalized negative log-likelihood
/// `Σ_i [log(1+e^{η_i}) − y_i η_i] + λ‖w_{1:d}‖²`.
pub fn penalized_loss(
    features: &Matrix,
    labels: &[bool],
    weights: &[f64],
    ridge: f64,
) -> Result<f64> {
    check_inputs(features, labels, Some(weights))?;
    let mut loss = 0.0;
    for (row, &label) in features.rows_iter().zip(labels) {
        let eta = weights[0] + crate::matrix::dot(&weights[1..], row);
        loss += softplus(eta) - if label { eta } else { 0.0 };
    }
    let penalty: f64 = weights[1..].iter().map(|w| w * w).sum();
    Ok(loss + ridge * penalty)
}

/// Gradient of [`penalized_loss`] with respect to the weights.
pub fn penalized_gradient(
    features: &Matrix,
    labels: &[bool],
    weights: &[f64],
    ridge: f64,
) -> Result<Vec<f64>> {
    check_inputs(features, labels, Some(weights))?;
    let mut grad = vec![0.0; weights.len()];
    for (row, &label) in features.rows_iter().zip(labels) {
        let eta = weights[0] + crate::matrix::dot(&weights[1..], row);
        let r = sigmoid(eta) - f64::from(u8::from(label));
        grad[0] += r;
        for (g, &v) in grad[1..].iter_mut().zip(row) {
            *g += r * v;
        }
    }
    for (g, &w) in grad[1..].iter_mut().zip(&weights[1..]) {
        *g += 2.0 * ridge * w;
    }
    Ok(grad)
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(libm::fabs(*x)))
}

/// Fits the ridge-penalized logistic model by Newton's method with a
/// backtracking line search, starting from zero weights.
///
/// If the iteration budget runs out, or no step decreases the loss, the
/// best iterate is returned with `converged == false`.
pub fn fit_logistic(
    features: &Matrix,
    labels: &[bool],
    opts: &LogisticOptions,
) -> Result<LogisticModel> {
    check_inputs(features, labels, None)?;
    if labels.len() < 2 {
        return Err(Error::EmptyInput(
            "logistic regression needs at least two rows",
        ));
    }
    if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
        return Err(Error::DegenerateLabels);
    }
    if opts.ridge.is_nan() || opts.ridge < 0.0 || opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "invalid logistic options {opts:?}"
        )));
    }

    let p = features.ncols() + 1;
    let mut w = vec![0.0; p];
    let mut loss = penalized_loss(features, labels, &w, opts.ridge)?;
    let mut grad = penalized_gradient(features, labels, &w, opts.ridge)?;
    let mut iterations = 0;

    while iterations < opts.max_iter && inf_norm(&grad) > opts.tol {
        let hessian = logistic_hessian(features, &w, opts.ridge);
        let step = match newton_step(&hessian, &grad) {
            Some(s) => s,
            None => break,
        };
        let slope: f64 = grad.iter().zip(&step).map(|(g, s)| g * s).sum();
        let mut t = 1.0;
        let mut accepted = None;
        // Below this the loss cannot tell a good step from a bad one.
        let resolvable = slope > 64.0 * f64::EPSILON * (1.0 + libm::fabs(loss));
        for _ in 0..if resolvable { 60 } else { 0 } {
            let trial: Vec<f64> = w.iter().zip(&step).map(|(w, s)| w - t * s).collect();
            let trial_loss = penalized_loss(features, labels, &trial, opts.ridge)?;
            if trial_loss <= loss - 1e-4 * t * slope {
                accepted = Some((trial, trial_loss));
                break;
            }
            t *= 0.5;
        }
        iterations += 1;
        match accepted {
            Some((trial, trial_loss)) => {
                w = trial;
                loss = trial_loss;
                grad = penalized_gradient(features, labels, &w, opts.ridge)?;
            }
            None => {
                // Near the optimum a full Newton step is taken if it shrinks
                // the gradient.
                let trial: Vec<f64> = w.iter().zip(&step).map(|(w, s)| w - s).collect();
                let trial_grad = penalized_gradient(features, labels, &trial, opts.ridge)?;
                if inf_norm(&trial_grad) < inf_norm(&grad) {
                    loss = penalized_loss(features, labels, &trial, opts.ridge)?;
                    w = trial;
                    grad = trial_grad;
                } else {
                    break;
                }
            }
        }
    }

    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Degenerate("logistic weights diverged"));
    }
    Ok(LogisticModel {
        converged: inf_norm(&grad) <= opts.tol,
        weights: w,
        iterations,
    })
}

fn logistic_hessian(features: &Matrix, w: &[f64], ridge: f64) -> Matrix {
    let p = w.len();
    let mut h = Matrix::zeros(p, p);
    let mut aug = vec![1.0; p];
    for row in features.rows_iter() {
        aug[1..].copy_from_slice(row);
        let s = sigmoid(crate::matrix::dot(w, &aug));
        let weight = s * (1.0 - s);
        for a in 0..p {
            let wa = weight * aug[a];
            for b in 0..=a {
                h[(a, b)] += wa * aug[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            h[(b, a)] = h[(a, b)];
        }
    }
    for a in 1..p {
        h[(a, a)] += 2.0 * ridge;
    }
    h
}

/// Solves `H s = g` after symmetric diagonal scaling, which tames the
/// conditioning of unstandardized features. A small diagonal shift is added
/// if the scaled matrix is numerically singular.
fn newton_step(h: &Matrix, g: &[f64]) -> Option<Vec<f64>> {
    let p = h.nrows();
    let d: Vec<f64> = (0..p)
        .map(|i| {
            let hii = h[(i, i)];
            if hii > 0.0 {
                1.0 / libm::sqrt(hii)
            } else {
                1.0
            }
        })
        .collect();
    let scaled = Matrix::from_fn(p, p, |i, j| d[i] * h[(i, j)] * d[j]);
    let rhs: Vec<f64> = g.iter().zip(&d).map(|(g, d)| g * d).collect();
    let mut shift = 0.0;
    for _ in 0..8 {
        let mut shifted = scaled.clone();
        for i in 0..p {
            shifted[(i, i)] += shift;
        }
        if let Some(l) = cholesky(&shifted) {
            let u = cholesky_solve(&l, &rhs);
            if u.iter().all(|v| v.is_finite()) {
                return Some(u.iter().zip(&d).map(|(u, d)| u * d).collect());
            }
        }
        shift = if shift == 0.0 { 1e-12 } else { shift * 100.0 };
    }
    None
}

/// Scores `σ(w₀ + xᵀw)`, clamped into the open interval (0, 1).
pub fn predict_prob(model: &LogisticModel, features: &Matrix) -> Result<Vec<f64>> {
    if features.ncols() != model.n_features() {
        return Err(Error::len(
            "predict_prob feature columns",
            model.n_features(),
            features.ncols(),
        ));
    }
    let lo = f64::MIN_POSITIVE;
    let hi = 1.0 - f64::EPSILON / 2.0;
    Ok(features
        .rows_iter()
        .map(|row| sigmoid(model.linear(row)).clamp(lo, hi))
        .collect())
}

/// Nearest-rank quantile: the `⌈q·n⌉`-th smallest score.
pub fn quantile_threshold(scores: &[f64], q: f64) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::EmptyInput("no scores to threshold"));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidConfig(format!("quantile {q} outside (0, 1)")));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::ContractViolation("NaN score".into()));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len();
    // guard against q·n landing a hair above an integer
    let rank = libm::ceil(q * n as f64 - 1e-9) as usize;
    Ok(sorted[rank.clamp(1, n) - 1])
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[cfg_attr(feature = "serde", serde(rename = "fn"))]
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Error rates at one threshold. A rate whose denominator is zero is `None`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Rates {
    pub fpr: Option<f64>,
    pub fnr: Option<f64>,
    pub accuracy: Option<f64>,
    pub counts: Confusion,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

impl Rates {
    pub fn from_counts(c: Confusion) -> Rates {
        Rates {
            fpr: ratio(c.fp, c.fp + c.tn),
            fnr: ratio(c.fn_, c.fn_ + c.tp),
            accuracy: ratio(c.tp + c.tn, c.total()),
            counts: c,
        }
    }
}

/// Rates of the rule "positive iff score > threshold".
pub fn rates(scores: &[f64], labels: &[bool], threshold: f64) -> Result<Rates> {
    rates_where(scores, labels, threshold, |_| true)
}

fn rates_where(
    scores: &[f64],
    labels: &[bool],
    threshold: f64,
    keep: impl Fn(usize) -> bool,
) -> Result<Rates> {
    if scores.len() != labels.len() {
        return Err(Error::len("rates labels", scores.len(), labels.len()));
    }
    let mut c = Confusion::default();
    for (i, (&s, &y)) in scores.iter().zip(labels).enumerate() {
        if !keep(i) {
            continue;
        }
        match (s > threshold, y) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(Rates::from_counts(c))
}

/// Rates over all rows and within each race.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GroupRates {
    pub population: Rates,
    pub caucasian: Rates,
    pub african_american: Rates,
}

pub fn group_rates(
    scores: &[f64],
    labels: &[bool],
    races: &[Race],
    threshold: f64,
) -> Result<GroupRates> {
    if races.len() != scores.len() {
        return Err(Error::len("group_rates tags", scores.len(), races.len()));
    }
    Ok(GroupRates {
        population: rates(scores, labels, threshold)?,
        caucasian: rates_where(scores, labels, threshold, |i| races[i] == Race::Caucasian)?,
        african_american: rates_where(scores, labels, threshold, |i| {
            races[i] == Race::AfricanAmerican
        })?,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RocCurve {
    /// `(fpr, tpr)` from `(0, 0)` to `(1, 1)`, one point per distinct score.
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

/// ROC curve swept over distinct scores in descending order, tied scores
/// entering together. The trapezoidal area is accumulated in integers, so
/// the AUC equals the Mann–Whitney statistic (ties counting ½) exactly.
pub fn roc(scores: &[f64], labels: &[bool]) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(Error::len("roc labels", scores.len(), labels.len()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::ContractViolation("NaN score".into()));
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::DegenerateLabels);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut twice_area: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let (mut dtp, mut dfp) = (0u64, 0u64);
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] {
                dtp += 1;
            } else {
                dfp += 1;
            }
            i += 1;
        }
        twice_area += u128::from(dfp) * u128::from(2 * tp + dtp);
        tp += dtp;
        fp += dfp;
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
    }
    let auc = twice_area as f64 / (2 * pos as u128 * neg as u128) as f64;
    Ok(RocCurve { points, auc })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub count: usize,
}

/// Equal-width histogram on `[lo, hi]`; the last bin is closed on the right
/// and values outside the range are not counted.
pub fn histogram(values: &[f64], bins: usize, lo: f64, hi: f64) -> Result<Vec<HistogramBin>> {
    if bins == 0 || hi.is_nan() || lo.is_nan() || hi <= lo {
        return Err(Error::InvalidConfig(format!(
            "histogram needs bins > 0 and lo < hi, got {bins} on [{lo}, {hi}]"
        )));
    }
    let width = hi - lo;
    let edge = |i: usize| lo + width * i as f64 / bins as f64;
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|i| HistogramBin {
            left: edge(i),
            right: edge(i + 1),
            count: 0,
        })
        .collect();
    for &v in values {
        if !(v >= lo && v <= hi) {
            continue;
        }
        let mut b = (libm::floor((v - lo) / width * bins as f64) as usize).min(bins - 1);
        // keep bin membership consistent with the printed edges
        while b > 0 && v < out[b].left {
            b -= 1;
        }
        while b + 1 < bins && v >= out[b].right {
            b += 1;
        }
        out[b].count += 1;
    }
    Ok(out)
}

/// Mean and standard error of one table cell across splits.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Summary {
    pub mean: Option<f64>,
    /// Sample standard deviation over `√defined`; needs two defined values.
    pub se: Option<f64>,
    pub defined: usize,
    pub undefined: usize,
}

pub fn summarize<I: IntoIterator<Item = Option<f64>>>(values: I) -> Summary {
    let mut defined = Vec::new();
    let mut undefined = 0;
    for v in values {
        match v {
            Some(x) => defined.push(x),
            None => undefined += 1,
        }
    }
    let r = defined.len();
    let mean = (r > 0).then(|| defined.iter().sum::<f64>() / r as f64);
    let se = mean.filter(|_| r >= 2).map(|m| {
        let ss: f64 = defined.iter().map(|x| (x - m) * (x - m)).sum();
        libm::sqrt(ss / (r - 1) as f64) / libm::sqrt(r as f64)
    });
    Summary {
        mean,
        se,
        defined: r,
        undefined,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RateSummary {
    pub fpr: Summary,
    pub fnr: Summary,
    pub accuracy: Summary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StrataSummary {
    pub population: RateSummary,
    pub caucasian: RateSummary,
    pub african_american: RateSummary,
}

/// Metrics of one split at one quantile, for each scorer.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SplitRates {
    pub raw: GroupRates,
    pub debiased: GroupRates,
    pub compas: GroupRates,
}

/// Split-averaged rates for the raw, debiased and COMPAS-decile scorers.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RateTable {
    pub raw: StrataSummary,
    pub debiased: StrataSummary,
    pub compas: StrataSummary,
    pub splits: usize,
}

fn summarize_rates<'a>(rows: impl Iterator<Item = &'a Rates> + Clone) -> RateSummary {
    RateSummary {
        fpr: summarize(rows.clone().map(|r| r.fpr)),
        fnr: summarize(rows.clone().map(|r| r.fnr)),
        accuracy: summarize(rows.map(|r| r.accuracy)),
    }
}

fn summarize_strata(rows: &[&GroupRates]) -> StrataSummary {
    StrataSummary {
        population: summarize_rates(rows.iter().map(|g| &g.population)),
        caucasian: summarize_rates(rows.iter().map(|g| &g.caucasian)),
        african_american: summarize_rates(rows.iter().map(|g| &g.african_american)),
    }
}

/// Averages per-split rates cell by cell; undefined cells are excluded and
/// counted. With a single split every SE is `None`.
pub fn aggregate_splits(splits: &[SplitRates]) -> Result<RateTable> {
    if splits.is_empty() {
        return Err(Error::EmptyInput("no splits to aggregate"));
    }
    let pick =
        |f: fn(&SplitRates) -> &GroupRates| -> Vec<&GroupRates> { splits.iter().map(f).collect() };
    Ok(RateTable {
        raw: summarize_strata(&pick(|s| &s.raw)),
        debiased: summarize_strata(&pick(|s| &s.debiased)),
        compas: summarize_strata(&pick(|s| &s.compas)),
        splits: splits.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn symmetric_one_dimensional_fit() {
        let x = Matrix::from_rows(&[[-1.0], [1.0]]).unwrap();
        let m = fit_logistic(&x, &[false, true], &LogisticOptions::default()).unwrap();
        assert!(close(m.weights[0], 0.0, 1e-6));
        assert!(m.weights[1] > 0.0);
        assert!(m.converged, "{m:?}");
    }

    #[test]
    fn zero_variance_feature_gets_zero_weight() {
        let x = Matrix::from_rows(&[[0.0, -1.0], [0.0, 0.5], [0.0, 1.0], [0.0, -0.3]]).unwrap();
        let m = fit_logistic(&x, &[false, true, false, true], &LogisticOptions::default()).unwrap();
        assert!(close(m.weights[1], 0.0, 1e-6));
    }

    #[test]
    fn single_class_rejected() {
        let x = Matrix::from_rows(&[[1.0], [2.0]]).unwrap();
        assert_eq!(
            fit_logistic(&x, &[true, true], &LogisticOptions::default()),
            Err(Error::DegenerateLabels)
        );
    }

    #[test]
    fn predictions() {
        let zero = LogisticModel {
            weights: vec![0.0, 0.0],
            converged: true,
            iterations: 0,
        };
        let x = Matrix::from_rows(&[[3.0], [-7.0]]).unwrap();
        assert_eq!(predict_prob(&zero, &x).unwrap(), vec![0.5, 0.5]);

        let big = LogisticModel {
            weights: vec![0.3, 1e6],
            ..zero.clone()
        };
        let p = predict_prob(&big, &x).unwrap();
        assert!(p[0] >= 1.0 - 1e-9 && p[0] < 1.0);
        assert!(p[1] > 0.0 && p[1] < 1e-9);
        let at_zero = predict_prob(&big, &Matrix::from_rows(&[[0.0]]).unwrap()).unwrap();
        assert!(close(at_zero[0], 1.0 / (1.0 + (-0.3f64).exp()), 1e-15));
        assert!(predict_prob(&big, &Matrix::zeros(1, 2)).is_err());
    }

    #[test]
    fn quantiles() {
        assert_eq!(
            quantile_threshold(&[5.0, 3.0, 1.0, 2.0, 4.0], 0.8).unwrap(),
            4.0
        );
        assert_eq!(quantile_threshold(&[1.0, 2.0, 3.0, 4.0], 0.5).unwrap(), 2.0);
        let c = [0.7; 6];
        let t = quantile_threshold(&c, 0.8).unwrap();
        assert_eq!(t, 0.7);
        assert_eq!(rates(&c, &[true; 6], t).unwrap().counts.tp, 0);
        assert!(quantile_threshold(&[], 0.5).is_err());
        assert!(quantile_threshold(&[1.0], 1.0).is_err());
    }

    #[test]
    fn rate_examples() {
        let r = rates(&[0.9, 0.8, 0.1, 0.2], &[true, true, false, false], 0.5).unwrap();
        assert_eq!(
            (r.fpr, r.fnr, r.accuracy),
            (Some(0.0), Some(0.0), Some(1.0))
        );

        let r = rates(&[0.1, 0.2, 0.3], &[true, false, true], 0.9).unwrap();
        assert_eq!((r.fpr, r.fnr), (Some(0.0), Some(1.0)));

        let r = rates(&[1.0, 0.0, 0.0, 1.0], &[true, true, false, false], 0.5).unwrap();
        assert_eq!(
            (r.fpr, r.fnr, r.accuracy),
            (Some(0.5), Some(0.5), Some(0.5))
        );

        let r = rates(&[0.3], &[true], 0.5).unwrap();
        assert_eq!(r.fpr, None);
        let empty = rates(&[], &[], 0.5).unwrap();
        assert_eq!(empty.accuracy, None);
    }

    #[test]
    fn strata() {
        let scores = [0.9, 0.1, 0.9, 0.1];
        let labels = [false, false, true, true];
        let races = [
            Race::AfricanAmerican,
            Race::Caucasian,
            Race::AfricanAmerican,
            Race::Caucasian,
        ];
        let g = group_rates(&scores, &labels, &races, 0.5).unwrap();
        assert_eq!(g.african_american.fpr, Some(1.0));
        assert_eq!(g.caucasian.fpr, Some(0.0));
        assert_eq!(g.caucasian.fnr, Some(1.0));
        assert_eq!(g.population.fpr, Some(0.5));

        let all_aa = [Race::AfricanAmerican; 4];
        let g = group_rates(&scores, &labels, &all_aa, 0.5).unwrap();
        assert_eq!(g.caucasian.accuracy, None);
    }

    #[test]
    fn roc_examples() {
        let perfect = roc(&[0.9, 0.8, 0.2, 0.1], &[true, true, false, false]).unwrap();
        assert_eq!(perfect.auc, 1.0);
        let worst = roc(&[0.9, 0.1], &[false, true]).unwrap();
        assert_eq!(worst.auc, 0.0);
        let tied = roc(&[0.5, 0.5], &[false, true]).unwrap();
        assert_eq!(tied.auc, 0.5);
        assert_eq!(tied.points, vec![(0.0, 0.0), (1.0, 1.0)]);
        assert!(roc(&[0.1, 0.2], &[true, true]).is_err());
    }

    #[test]
    fn histogram_edges() {
        let h = histogram(&[0.0, 0.1, 0.5, 0.99, 1.0, 1.5], 2, 0.0, 1.0).unwrap();
        assert_eq!((h[0].count, h[1].count), (2, 3));
        assert_eq!((h[1].left, h[1].right), (0.5, 1.0));
        assert!(histogram(&[], 0, 0.0, 1.0).is_err());
    }

    #[test]
    fn summaries() {
        let s = summarize([Some(0.2), Some(0.4)]);
        assert!(close(s.mean.unwrap(), 0.3, 1e-15));
        assert!(close(s.se.unwrap(), 0.1, 1e-15));

        let same = summarize([Some(0.25); 5]);
        assert_eq!(same.se, Some(0.0));

        let partial = summarize([Some(1.0), None]);
        assert_eq!(
            (partial.mean, partial.se, partial.undefined),
            (Some(1.0), None, 1)
        );
        assert_eq!(summarize(core::iter::empty()).mean, None);
    }
}
