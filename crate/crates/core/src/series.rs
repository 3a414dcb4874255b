use crate::error::{Error, Result};

/// Minimum length accepted by [`TimeSeries::new`].
pub const MIN_LEN: usize = 4;

/// An observed stretch `X_1, …, X_n` of a real-valued process.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    tie_count: usize,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < MIN_LEN {
            return Err(Error::SeriesTooShort { len: values.len(), min: MIN_LEN });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let tie_count = count_duplicates(&values);
        Ok(Self { values, tie_count })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of observations equal to an earlier observation, i.e.
    /// `n − #distinct values`.
    pub fn tie_count(&self) -> usize {
        self.tie_count
    }

    pub fn has_ties(&self) -> bool {
        self.tie_count > 0
    }

    /// Applies `g` elementwise, keeping the time order.
    pub fn map(&self, g: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.values.iter().map(|&v| g(v)).collect())
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

fn count_duplicates(values: &[f64]) -> usize {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    // -0.0 and 0.0 compare equal as observations
    sorted.windows(2).filter(|w| w[0] == w[1]).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_short_and_non_finite() {
        assert_eq!(
            TimeSeries::new(vec![1.0, 2.0, 3.0]),
            Err(Error::SeriesTooShort { len: 3, min: 4 })
        );
        assert_eq!(
            TimeSeries::new(vec![1.0, 2.0, f64::NAN, 4.0]),
            Err(Error::NonFinite { index: 2 })
        );
        assert!(TimeSeries::new(vec![1.0, f64::INFINITY, 3.0, 4.0]).is_err());
    }

    #[test]
    fn counts_ties() {
        let s = TimeSeries::new(vec![1.0, 2.0, 2.0, 3.0, 2.0, 1.0]).unwrap();
        assert_eq!(s.tie_count(), 3);
        assert!(s.has_ties());
        let s = TimeSeries::new(vec![4.0, 3.0, 2.0, 1.0]).unwrap();
        assert_eq!(s.tie_count(), 0);
        let s = TimeSeries::new(vec![0.0, -0.0, 1.0, 2.0]).unwrap();
        assert_eq!(s.tie_count(), 1);
    }
}
