//! Masking methods: MDAV microaggregation, additive noise and rank swapping.
//!
//! Every stochastic method takes an explicit seed; none touches global RNG
//! state.

mod mdav;
mod noise;
mod swap;

pub use mdav::mdav;
pub use noise::{add_noise, sample_covariance};
pub use swap::{rank_swap, swap_window};

use crate::error::Result;
use crate::types::{Method, NumericMatrix, PerturbationSpec};

/// Masks `data` as described by `spec`.
pub fn apply(data: &NumericMatrix, spec: &PerturbationSpec) -> Result<NumericMatrix> {
    spec.validate(data.n())?;
    match spec.method {
        Method::Mdav => mdav(data, spec.parameter as usize),
        Method::NoiseIndependent => add_noise(data, spec.parameter, false, spec.seed),
        Method::NoiseCorrelated => add_noise(data, spec.parameter, true, spec.seed),
        Method::RankSwap => rank_swap(data, spec.parameter, spec.seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn dispatch_validates_parameters() {
        let d = NumericMatrix::from_columns(&[vec![1.0, 2.0, 4.0], vec![3.0, 1.0, 2.0]]).unwrap();
        let bad = PerturbationSpec::new(Method::Mdav, 4.0, 0);
        assert!(matches!(apply(&d, &bad), Err(Error::InvalidInput(_))));
        let id = PerturbationSpec::new(Method::Mdav, 1.0, 0);
        assert_eq!(apply(&d, &id).unwrap(), d);
        let all = PerturbationSpec::new(Method::Mdav, 3.0, 0);
        let m = apply(&d, &all).unwrap();
        assert_eq!(m.row(0), m.row(2));
        assert_eq!(apply(&d, &PerturbationSpec::new(Method::RankSwap, 0.0, 1)).unwrap(), d);
        assert_eq!(
            apply(&d, &PerturbationSpec::new(Method::NoiseCorrelated, 0.0, 1)).unwrap(),
            d
        );
    }
}
