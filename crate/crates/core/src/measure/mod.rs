//! Finite measure spaces, distribution functions and nonincreasing
//! rearrangements.

mod power_bound;
mod kernel;
mod profile;
mod space;

pub use power_bound::{check_power_bound, check_power_bound_below, BoundDirection, PowerBoundReport};
pub use kernel::{kernel_rearrangements, KernelMatrix};
pub use profile::RearrangementProfile;
pub use space::{fmt_num, FiniteMeasureSpace};

use crate::error::{Error, Result};

pub(crate) fn check_values(values: &[f64], space: &FiniteMeasureSpace) -> Result<()> {
    if values.len() != space.len() {
        return Err(Error::Input(format!(
            "function has {} values but the space has {} points",
            values.len(),
            space.len()
        )));
    }
    if let Some(i) = values.iter().position(|v| v.is_nan()) {
        return Err(Error::Input(format!("value at index {i} is NaN")));
    }
    Ok(())
}

/// `m(f, s) = μ{x : |f(x)| > s}`.
pub fn distribution(values: &[f64], space: &FiniteMeasureSpace, s: f64) -> Result<f64> {
    check_values(values, space)?;
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Input(format!("value at index {i} is not finite")));
    }
    if s.is_nan() || s < 0.0 {
        return Err(Error::Domain(format!("level must be nonnegative, got {s}")));
    }
    Ok(values
        .iter()
        .zip(space.weights())
        .filter(|(v, _)| v.abs() > s)
        .map(|(_, w)| w)
        .sum())
}

/// The nonincreasing rearrangement `f*` of `|f|` with respect to the space's
/// measure, as an exact step function. `+∞` entries are allowed and form a
/// leading infinite plateau.
pub fn rearrange(values: &[f64], space: &FiniteMeasureSpace) -> Result<RearrangementProfile> {
    check_values(values, space)?;
    let mut pairs: Vec<(f64, f64)> = values.iter().map(|v| v.abs()).zip(space.weights().iter().copied()).collect();
    // stable: ties keep input order
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok(RearrangementProfile::from_sorted_atoms(&pairs))
}

/// `f**(t) = (1/t) ∫_0^t f*`.
pub fn double_star(profile: &RearrangementProfile, t: f64) -> Result<f64> {
    profile.double_star(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_atoms() -> FiniteMeasureSpace {
        FiniteMeasureSpace::atomic(vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn distribution_examples() {
        let sp = two_atoms();
        assert_eq!(distribution(&[3.0, 1.0], &sp, 2.0).unwrap(), 0.5);
        assert_eq!(distribution(&[3.0, 1.0], &sp, 5.0).unwrap(), 0.0);
        assert_eq!(distribution(&[3.0, 1.0], &sp, 0.5).unwrap(), 1.0);
        assert!(distribution(&[f64::NAN, 1.0], &sp, 0.5).is_err());
        assert!(distribution(&[3.0, 1.0], &sp, -1.0).is_err());
    }

    #[test]
    fn rearrange_examples() {
        let sp = two_atoms();
        let p = rearrange(&[1.0, -3.0], &sp).unwrap();
        assert_eq!(p.breakpoints(), &[0.5, 1.0]);
        assert_eq!(p.values(), &[3.0, 1.0]);
        assert_eq!(p.value(0.25).unwrap(), 3.0);
        assert_eq!(p.value(0.5).unwrap(), 1.0);
        assert_eq!(double_star(&p, 1.0).unwrap(), 2.0);
        assert!(double_star(&p, 0.0).is_err());
    }

    #[test]
    fn constant_function() {
        let sp = FiniteMeasureSpace::atomic(vec![0.2, 0.3, 0.5]).unwrap();
        let p = rearrange(&[2.0, 2.0, -2.0], &sp).unwrap();
        assert_eq!(p.values(), &[2.0]);
        assert!((p.total_mass() - 1.0).abs() < 1e-15);
        for t in [0.01, 0.3, 0.99] {
            assert_eq!(p.value(t).unwrap(), 2.0);
            assert!((double_star(&p, t).unwrap() - 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn infinite_plateau() {
        let sp = FiniteMeasureSpace::atomic(vec![0.25, 0.75]).unwrap();
        let p = rearrange(&[f64::INFINITY, 1.0], &sp).unwrap();
        assert_eq!(p.value(0.1).unwrap(), f64::INFINITY);
        assert_eq!(p.value(0.3).unwrap(), 1.0);
        assert_eq!(p.distribution(1e300), 0.25);
        assert_eq!(double_star(&p, 0.5).unwrap(), f64::INFINITY);
    }
}
