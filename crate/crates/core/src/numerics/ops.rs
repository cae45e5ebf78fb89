//! Activations and losses, each paired with its hand-derived backward pass.

use super::matrix::{dot, norm};
use crate::error::{Error, Result};

/// Smallest norm used in cosine denominators.
pub const NORM_FLOOR: f64 = 1e-12;

pub fn relu(x: &[f64]) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(Error::dim("relu of an empty vector"));
    }
    Ok(x.iter().map(|&v| v.max(0.0)).collect())
}

/// Gradient of relu at pre-activation `x`; the kink at zero takes slope 0.
pub fn relu_backward(x: &[f64], upstream: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(upstream)
        .map(|(&v, &g)| if v > 0.0 { g } else { 0.0 })
        .collect()
}

/// Max-subtracted softmax.
pub fn softmax(x: &[f64]) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(Error::dim("softmax of an empty vector"));
    }
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = x.iter().map(|&v| (v - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / total).collect())
}

/// Gradient through softmax given its output `y`.
pub fn softmax_backward(y: &[f64], upstream: &[f64]) -> Vec<f64> {
    let inner = dot(y, upstream);
    y.iter()
        .zip(upstream)
        .map(|(&yi, &gi)| yi * (gi - inner))
        .collect()
}

/// `log Σ exp(x)`, stable for large inputs.
pub fn log_sum_exp(x: &[f64]) -> f64 {
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + x.iter().map(|&v| (v - max).exp()).sum::<f64>().ln()
}

fn check_cosine_inputs(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.len() != b.len() {
        return Err(Error::dim(format!(
            "cosine similarity of vectors with lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(Error::DegenerateInput(
            "cosine similarity with a zero-norm vector".into(),
        ));
    }
    Ok((na.max(NORM_FLOOR), nb.max(NORM_FLOOR)))
}

pub fn cosine_sim(a: &[f64], b: &[f64]) -> Result<f64> {
    let (na, nb) = check_cosine_inputs(a, b)?;
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

/// Gradients of `upstream · cos(a, b)` with respect to `a` and `b`.
pub fn cosine_sim_backward(a: &[f64], b: &[f64], upstream: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let (na, nb) = check_cosine_inputs(a, b)?;
    let c = dot(a, b) / (na * nb);
    let ga = a
        .iter()
        .zip(b)
        .map(|(&ai, &bi)| upstream * (bi / (na * nb) - c * ai / (na * na)))
        .collect();
    let gb = a
        .iter()
        .zip(b)
        .map(|(&ai, &bi)| upstream * (ai / (na * nb) - c * bi / (nb * nb)))
        .collect();
    Ok((ga, gb))
}

/// Mean squared error between a target `x` and a reconstruction `x_rec`.
pub fn mse(x: &[f64], x_rec: &[f64]) -> Result<f64> {
    if x.len() != x_rec.len() {
        return Err(Error::dim(format!(
            "mse of vectors with lengths {} and {}",
            x.len(),
            x_rec.len()
        )));
    }
    if x.is_empty() {
        return Ok(0.0);
    }
    Ok(x.iter()
        .zip(x_rec)
        .map(|(a, b)| (b - a) * (b - a))
        .sum::<f64>()
        / x.len() as f64)
}

/// Gradient of [`mse`] with respect to the reconstruction: `2(x_rec − x)/len`.
pub fn mse_backward(x: &[f64], x_rec: &[f64]) -> Vec<f64> {
    let n = x.len().max(1) as f64;
    x.iter()
        .zip(x_rec)
        .map(|(a, b)| 2.0 * (b - a) / n)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::gradcheck::grad_check;
    use proptest::prelude::*;

    #[test]
    fn softmax_examples() {
        assert_eq!(softmax(&[0.0, 0.0]).unwrap(), vec![0.5, 0.5]);
        let s = softmax(&[2f64.ln(), 0.0]).unwrap();
        assert!((s[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((s[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!(softmax(&[]).is_err());
    }

    #[test]
    fn relu_example() {
        assert_eq!(relu(&[-1.0, 0.0, 2.0]).unwrap(), vec![0.0, 0.0, 2.0]);
        assert!(relu(&[]).is_err());
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine_sim(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(cosine_sim(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let c = cosine_sim(&[1.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-8);
    }

    #[test]
    fn cosine_rejects_zero_vector() {
        assert!(matches!(
            cosine_sim(&[0.0, 0.0], &[1.0, 0.0]),
            Err(Error::DegenerateInput(_))
        ));
        assert!(matches!(
            cosine_sim(&[1.0], &[1.0, 0.0]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn mse_examples() {
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert!(mse(&[0.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn mse_gradient_matches_finite_differences() {
        let target = [0.3, -1.2, 2.0];
        let err = grad_check(
            |p| (mse(&target, p).unwrap(), mse_backward(&target, p)),
            &[1.0, 0.5, -0.7],
            1e-5,
        );
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn cosine_gradient_matches_finite_differences() {
        let err = grad_check(
            |p| {
                let (a, b) = p.split_at(3);
                let (ga, gb) = cosine_sim_backward(a, b, 1.0).unwrap();
                (cosine_sim(a, b).unwrap(), [ga, gb].concat())
            },
            &[0.4, -1.0, 0.3, 0.9, 0.2, -0.5],
            1e-5,
        );
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn softmax_gradient_matches_finite_differences() {
        let weights = [0.7, -0.2, 1.5];
        let err = grad_check(
            |p| {
                let y = softmax(p).unwrap();
                (dot(&y, &weights), softmax_backward(&y, &weights))
            },
            &[0.1, 1.0, -0.4],
            1e-5,
        );
        assert!(err < 1e-7, "{err}");
    }

    proptest! {
        #[test]
        fn softmax_is_normalized_and_shift_invariant(
            x in prop::collection::vec(-30.0f64..30.0, 1..12),
            shift in -100.0f64..100.0,
        ) {
            let y = softmax(&x).unwrap();
            prop_assert!((y.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let shifted: Vec<f64> = x.iter().map(|v| v + shift).collect();
            let ys = softmax(&shifted).unwrap();
            for (a, b) in y.iter().zip(&ys) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn cosine_is_symmetric_bounded_and_scale_invariant(
            a in prop::collection::vec(-5.0f64..5.0, 4),
            b in prop::collection::vec(-5.0f64..5.0, 4),
            c in 0.01f64..100.0,
        ) {
            prop_assume!(norm(&a) > 1e-3 && norm(&b) > 1e-3);
            let ab = cosine_sim(&a, &b).unwrap();
            prop_assert_eq!(ab, cosine_sim(&b, &a).unwrap());
            prop_assert!(ab.abs() <= 1.0);
            let scaled: Vec<f64> = a.iter().map(|v| v * c).collect();
            prop_assert!((cosine_sim(&scaled, &b).unwrap() - ab).abs() < 1e-12);
        }
    }
}
