/// Prefix sums for O(1) window means.
#[derive(Debug, Clone)]
pub(crate) struct PrefixSums {
    sums: Vec<f64>,
}

impl PrefixSums {
    pub(crate) fn new(x: &[f64]) -> Self {
        let mut sums = Vec::with_capacity(x.len() + 1);
        let mut acc = 0.0;
        sums.push(acc);
        for &v in x {
            acc += v;
            sums.push(acc);
        }
        Self { sums }
    }

    /// Sum of `x[start..end]`.
    #[inline]
    pub(crate) fn sum(&self, start: usize, end: usize) -> f64 {
        self.sums[end] - self.sums[start]
    }

    /// Mean of `x[start..end]`; the range must be nonempty.
    #[inline]
    pub(crate) fn mean(&self, start: usize, end: usize) -> f64 {
        self.sum(start, end) / (end - start) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_means() {
        let p = PrefixSums::new(&[1.0, 2.0, 3.0, 6.0]);
        assert_eq!(p.sum(0, 4), 12.0);
        assert_eq!(p.mean(1, 3), 2.5);
        assert_eq!(p.mean(3, 4), 6.0);
    }
}
