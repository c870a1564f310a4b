//! Truncated Taylor series ("jets") for exact higher derivatives of the
//! closed-form nonlinearities.
//!
//! A jet of order `n` stores `[f(x₀), f'(x₀), f''(x₀)/2!, …, f⁽ⁿ⁾(x₀)/n!]`.

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Jet(Vec<f64>);

impl Jet {
    /// The identity `x ↦ x` expanded at `x0`.
    pub fn variable(x0: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = x0;
        if order >= 1 {
            c[1] = 1.0;
        }
        Jet(c)
    }

    fn order(&self) -> usize {
        self.0.len() - 1
    }

    /// `n`-th derivative at the expansion point.
    pub fn derivative(&self, n: usize) -> f64 {
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        self.0[n] * fact
    }

    pub fn add_scalar(mut self, a: f64) -> Self {
        self.0[0] += a;
        self
    }

    /// `a^γ` for `a₀ > 0`.
    pub fn powf(&self, gamma: f64) -> Self {
        let a = &self.0;
        let n = self.order();
        let mut b = vec![0.0; n + 1];
        b[0] = a[0].powf(gamma);
        for m in 1..=n {
            let s: f64 = (1..=m)
                .map(|k| (gamma * k as f64 - (m - k) as f64) * a[k] * b[m - k])
                .sum();
            b[m] = s / (m as f64 * a[0]);
        }
        Jet(b)
    }

    /// `ln a` for `a₀ > 0`.
    pub fn ln(&self) -> Self {
        let a = &self.0;
        let n = self.order();
        let mut b = vec![0.0; n + 1];
        b[0] = a[0].ln();
        for m in 1..=n {
            let s: f64 = (1..m).map(|k| k as f64 * b[k] * a[m - k]).sum();
            b[m] = (a[m] - s / m as f64) / a[0];
        }
        Jet(b)
    }
}
