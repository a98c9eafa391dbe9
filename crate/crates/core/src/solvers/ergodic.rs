use crate::decomposition::{InterfaceMultiplier, TornDualField};
use crate::error::{Result, TvError};

/// Running arithmetic means `p̃_n = (1/n) Σ p̃^{(i)}`, `λ_n = (1/n) Σ λ^{(i)}`.
#[derive(Clone, Debug, Default)]
pub struct ErgodicAverager {
    count: usize,
    p_sum: Option<TornDualField>,
    lambda_sum: Vec<f64>,
}

impl ErgodicAverager {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, p: &TornDualField, lambda: &InterfaceMultiplier) {
        self.p_sum = Some(match self.p_sum.take() {
            None => p.clone(),
            Some(sum) => sum.lincomb(1.0, p, 1.0),
        });
        if self.lambda_sum.is_empty() {
            self.lambda_sum = lambda.values().to_vec();
        } else {
            for (s, x) in self.lambda_sum.iter_mut().zip(lambda.values()) {
                *s += x;
            }
        }
        self.count += 1;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn averages(&self) -> Result<(TornDualField, InterfaceMultiplier)> {
        let sum = self.p_sum.as_ref().ok_or(TvError::EmptyTrace)?;
        let w = 1.0 / self.count as f64;
        let p = sum.lincomb(w, sum, 0.0);
        let lambda = InterfaceMultiplier::new(self.lambda_sum.iter().map(|x| x * w).collect());
        Ok((p, lambda))
    }
}

pub fn ergodic_averages(
    trace: &[(TornDualField, InterfaceMultiplier)],
) -> Result<(TornDualField, InterfaceMultiplier)> {
    let mut avg = ErgodicAverager::new();
    for (p, l) in trace {
        avg.push(p, l);
    }
    avg.averages()
}
