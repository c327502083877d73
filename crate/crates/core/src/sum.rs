//! Compensated floating-point accumulation.

/// Neumaier's variant of Kahan summation.
///
/// Results depend on the order of `add` calls, so callers feed terms in a
/// fixed order (ascending `n` throughout this crate).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_terms() {
        let acc: NeumaierSum = [1.0, 1e100, 1.0, -1e100].into_iter().collect();
        assert_eq!(acc.value(), 2.0);
    }

    #[test]
    fn harmonic_tail() {
        let acc: NeumaierSum = (1..=1_000_000u64).map(|k| 1.0 / k as f64).collect();
        let naive: f64 = (1..=1_000_000u64).rev().map(|k| 1.0 / k as f64).sum();
        assert!((acc.value() - naive).abs() < 1e-12);
    }
}
