//! The geometric grid of cluster-size guesses `(1+ε/2)^j`, kept exact.

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive};

use super::params::check_epsilon;
use crate::error::Result;

/// `(1+ε/2)^j` for `j = 0..=⌈log_{1+ε/2} n⌉` with `1+ε/2 = num/den` in lowest terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightGrid {
    num: BigUint,
    den: BigUint,
    max_exponent: u32,
}

/// `ε` as a small exact fraction (best rational approximation of the float).
pub fn epsilon_ratio(epsilon: f64) -> Ratio<u64> {
    let r = Ratio::<i64>::approximate_float(epsilon).expect("epsilon is finite");
    Ratio::new(*r.numer() as u64, *r.denom() as u64)
}

pub fn weight_grid(n: u64, epsilon: f64) -> Result<WeightGrid> {
    check_epsilon(epsilon)?;
    let eps = epsilon_ratio(epsilon);
    let base = Ratio::from_integer(1u64) + eps / 2;
    let num = BigUint::from(*base.numer());
    let den = BigUint::from(*base.denom());
    let target = BigUint::from(n.max(1));

    let mut e = 0u32;
    let mut pow_num = BigUint::one();
    let mut pow_den = BigUint::one();
    while pow_num < &target * &pow_den {
        pow_num *= &num;
        pow_den *= &den;
        e += 1;
    }
    Ok(WeightGrid {
        num,
        den,
        max_exponent: e,
    })
}

impl WeightGrid {
    pub fn len(&self) -> usize {
        self.max_exponent as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn max_exponent(&self) -> u32 {
        self.max_exponent
    }

    pub fn value(&self, j: u32) -> Ratio<BigUint> {
        Ratio::new(self.num.pow(j), self.den.pow(j))
    }

    pub fn values(&self) -> Vec<Ratio<BigUint>> {
        (0..=self.max_exponent).map(|j| self.value(j)).collect()
    }

    /// Grid values multiplied by the common denominator `den^E`:
    /// entry `j` is `num^j · den^(E-j)`. Ratios between entries are exact.
    pub fn scaled(&self) -> Vec<BigUint> {
        (0..=self.max_exponent)
            .map(|j| self.num.pow(j) * self.den.pow(self.max_exponent - j))
            .collect()
    }

    /// [`WeightGrid::scaled`] as `u128`, if `weight · headroom` cannot overflow.
    pub fn scaled_u128(&self, headroom: u128) -> Option<Vec<u128>> {
        let limit = u128::MAX / headroom.max(1);
        self.scaled()
            .into_iter()
            .map(|w| w.to_u128().filter(|&v| v <= limit))
            .collect()
    }

    pub fn to_f64(&self, j: u32) -> f64 {
        let v = self.value(j);
        v.numer().to_f64().unwrap_or(f64::INFINITY) / v.denom().to_f64().unwrap_or(f64::INFINITY)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: u64, d: u64) -> Ratio<BigUint> {
        Ratio::new(BigUint::from(n), BigUint::from(d))
    }

    #[test]
    fn n_one_is_single_point() {
        let g = weight_grid(1, 0.5).unwrap();
        assert_eq!(g.values(), vec![r(1, 1)]);
    }

    #[test]
    fn n_four() {
        let g = weight_grid(4, 0.5).unwrap();
        assert_eq!(g.len(), 8);
        assert_eq!(g.value(1), r(5, 4));
        assert_eq!(g.value(2), r(25, 16));
        assert_eq!(g.value(7), r(78125, 16384));
        assert!((g.to_f64(7) - 4.768).abs() < 1e-3);
    }

    #[test]
    fn covering_property_n100() {
        let g = weight_grid(100, 0.5).unwrap();
        let vals = g.values();
        for s in 1..=100u64 {
            let lo = r(s, 1);
            let hi = r(5 * s, 4);
            assert!(vals.iter().any(|w| *w >= lo && *w <= hi), "s={s}");
        }
    }

    #[test]
    fn scaled_weights_keep_ratios() {
        let g = weight_grid(10, 0.5).unwrap();
        let s = g.scaled();
        for j in 0..g.len() {
            assert_eq!(Ratio::new(s[j].clone(), s[0].clone()), g.value(j as u32));
        }
        assert_eq!(g.scaled_u128(1).unwrap().len(), g.len());
    }

    #[test]
    fn small_epsilon_is_exact() {
        assert_eq!(epsilon_ratio(0.1), Ratio::new(1, 10));
        let g = weight_grid(1000, 0.1).unwrap();
        // 1.05^141 < 1000 <= 1.05^142
        assert_eq!(g.max_exponent(), 142);
    }
}
