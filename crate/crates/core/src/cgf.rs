//! Cumulant generating function of a log-ratio under a base distribution.
//!
//! Every order-q quantity in the crate reduces to `K(t) = ln Σ w_i e^{t x_i}`
//! with `t = q - 1`:
//!
//! * Rényi entropy: base `p`, `x_i = ln p_i`, `H_q = -K(t) / t`
//! * Rényi divergence: base `p1`, `x_i = ln(p1_i / p2_i)`, `D_q = K(t) / t`
//!
//! and the order derivative of `K(t) / t` is `KL(tilted ‖ base) / t²`. Writing
//! both in this form keeps them accurate as `t → 0`, where the textbook
//! formulas cancel catastrophically.

/// Base weights (strictly positive, summing to one) paired with values.
#[derive(Debug, Clone)]
pub(crate) struct LogMoments {
    weights: Vec<f64>,
    values: Vec<f64>,
}

impl LogMoments {
    pub(crate) fn new(weights: Vec<f64>, values: Vec<f64>) -> Self {
        debug_assert_eq!(weights.len(), values.len());
        debug_assert!(weights.iter().all(|&w| w > 0.0));
        Self { weights, values }
    }

    /// Entropy form: base `p` restricted to its support, values `ln p_i`.
    pub(crate) fn entropy(p: &[f64]) -> Self {
        let (w, x) = p
            .iter()
            .filter(|&&pi| pi > 0.0)
            .map(|&pi| (pi, pi.ln()))
            .unzip();
        Self::new(w, x)
    }

    pub(crate) fn mean(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.values)
            .map(|(w, x)| w * x)
            .sum()
    }

    /// Second and third central moments (the cumulants κ₂, κ₃).
    pub(crate) fn central_moments(&self) -> (f64, f64) {
        let m = self.mean();
        self.weights
            .iter()
            .zip(&self.values)
            .fold((0.0, 0.0), |(k2, k3), (w, x)| {
                let d = x - m;
                (k2 + w * d * d, k3 + w * d * d * d)
            })
    }

    /// `K(t) = ln Σ w_i e^{t x_i}`.
    pub(crate) fn cgf(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        let max_exponent = self
            .values
            .iter()
            .map(|x| (t * x).abs())
            .fold(0.0, f64::max);
        if max_exponent <= 1.0 {
            let s: f64 = self
                .weights
                .iter()
                .zip(&self.values)
                .map(|(w, x)| w * (t * x).exp_m1())
                .sum();
            s.ln_1p()
        } else {
            let shifted: Vec<f64> = self
                .weights
                .iter()
                .zip(&self.values)
                .map(|(w, x)| t * x + w.ln())
                .collect();
            log_sum_exp(&shifted)
        }
    }

    /// `KL(w^(t) ‖ w)` where `w^(t)_i ∝ w_i e^{t x_i}` is the tilted distribution.
    pub(crate) fn tilted_kl(&self, t: f64) -> f64 {
        let k = self.cgf(t);
        self.weights
            .iter()
            .zip(&self.values)
            .map(|(w, x)| w * relative_excess(t * x - k))
            .sum()
    }

    /// `d/dt [K(t) / t]`, with the cumulant expansion near `t = 0`.
    pub(crate) fn scaled_cgf_slope(&self, t: f64, series_radius: f64) -> f64 {
        if t.abs() <= series_radius {
            let (k2, k3) = self.central_moments();
            k2 / 2.0 + k3 * t / 3.0
        } else {
            self.tilted_kl(t) / (t * t)
        }
    }
}

/// `e^s (s - 1) + 1`, i.e. `r ln r - r + 1` at `r = e^s`; non-negative.
fn relative_excess(s: f64) -> f64 {
    if s.abs() < 0.5 {
        // Σ_{k≥2} s^k (k-1)/k!
        let mut term = s; // s^k / k! at k = 1
        let mut sum = 0.0;
        for k in 2..40 {
            term *= s / k as f64;
            let add = term * (k - 1) as f64;
            sum += add;
            if add.abs() <= 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        let r = s.exp();
        if r == 0.0 {
            1.0
        } else {
            r * (s - 1.0) + 1.0
        }
    }
}

pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}
