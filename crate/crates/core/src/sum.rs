//! Order-independent summation.
//!
//! Grid sums run over up to ~10⁷ terms spanning many orders of magnitude
//! and are split across threads. An exact accumulator returns the correctly
//! rounded sum regardless of the order in which terms and partial sums are
//! combined, so results are bit-identical for any thread count.
//!
//! The accumulator keeps the running sum as a list of non-overlapping
//! partials (Shewchuk's algorithm, as in Python's `math.fsum`). Unlike
//! single-accumulator crates it supports an exact merge of two partial sums,
//! which the parallel reductions need.

/// Exact accumulator with a correctly rounded result. Inputs must be finite.
#[derive(Debug, Clone, Default)]
pub struct ExactSum {
    /// Non-overlapping, increasing in magnitude; their exact sum is the total.
    partials: Vec<f64>,
}

impl ExactSum {
    pub fn new() -> Self {
        Self { partials: Vec::new() }
    }

    #[inline]
    pub fn add(&mut self, mut x: f64) {
        debug_assert!(x.is_finite(), "non-finite summand {x}");
        let mut j = 0;
        for i in 0..self.partials.len() {
            let mut y = self.partials[i];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[j] = lo;
                j += 1;
            }
            x = hi;
        }
        self.partials.truncate(j);
        self.partials.push(x);
    }

    /// Absorbs another partial sum.
    pub fn merge(&mut self, other: ExactSum) {
        for x in other.partials {
            self.add(x);
        }
    }

    pub fn value(&self) -> f64 {
        let p = &self.partials;
        let Some((&top, rest)) = p.split_last() else {
            return 0.0;
        };
        let mut hi = top;
        let mut lo = 0.0;
        let mut k = rest.len();
        while k > 0 {
            k -= 1;
            let x = hi;
            let y = rest[k];
            hi = x + y;
            let yr = hi - x;
            lo = y - yr;
            if lo != 0.0 {
                break;
            }
        }
        // Round half-even across the remaining partials: if the discarded
        // tail lies exactly half an ulp away and the next partial pushes it
        // past, step once in that direction.
        if k > 0 && ((lo < 0.0 && rest[k - 1] < 0.0) || (lo > 0.0 && rest[k - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            if y == x - hi {
                hi = x;
            }
        }
        hi
    }
}

impl Extend<f64> for ExactSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

impl FromIterator<f64> for ExactSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        s.extend(iter);
        s
    }
}

/// Correctly rounded sum of an iterator.
pub fn sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<ExactSum>().value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn recovers_cancelled_small_terms() {
        let v = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(sum(v), 2.0);
        assert_eq!(v.iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn rounds_half_way_cases_to_even() {
        let u = f64::EPSILON;
        assert_eq!(sum([1.0, u / 2.0]), 1.0);
        assert_eq!(sum([1.0, u / 2.0, u * 1e-10]), 1.0 + u);
        assert_eq!(sum([1.0 + u, u / 2.0]), 1.0 + 2.0 * u);
        assert_eq!(sum([]), 0.0);
    }

    #[test]
    fn result_is_independent_of_order_and_grouping() {
        let a: Vec<f64> = (1..=1000).map(|k| 1.0 / k as f64).collect();
        let mut b = a.clone();
        b.reverse();
        assert_eq!(sum(a.iter().copied()), sum(b));
        let mut left: ExactSum = a[..317].iter().copied().collect();
        left.merge(a[317..].iter().copied().collect());
        assert_eq!(left.value(), sum(a));
    }

    fn wide() -> impl Strategy<Value = f64> {
        (-1.0f64..1.0, -60i32..60).prop_map(|(m, e)| m * 2f64.powi(e))
    }

    proptest! {
        #[test]
        fn matches_reference_fsum(xs in prop::collection::vec(wide(), 0..200)) {
            prop_assert_eq!(sum(xs.iter().copied()), fsum::FSum::with_all(&xs).value());
        }

        #[test]
        fn any_split_merges_exactly(xs in prop::collection::vec(wide(), 1..200), cut in any::<prop::sample::Index>()) {
            let c = cut.index(xs.len());
            let mut a: ExactSum = xs[c..].iter().rev().copied().collect();
            a.merge(xs[..c].iter().copied().collect());
            prop_assert_eq!(a.value(), sum(xs.iter().copied()));
        }
    }
}
