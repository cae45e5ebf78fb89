/// Compares an analytic gradient with central differences.
///
/// `f` returns the value and analytic gradient at a parameter vector. The
/// result is the largest per-coordinate relative error
/// `|analytic − fd| / max(|analytic|, |fd|, 1e-8)`.
pub fn grad_check<F>(mut f: F, params: &[f64], h: f64) -> f64
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let (_, analytic) = f(params);
    assert_eq!(
        analytic.len(),
        params.len(),
        "analytic gradient length must match parameter count"
    );
    let mut probe = params.to_vec();
    let mut worst = 0.0f64;
    for i in 0..params.len() {
        probe[i] = params[i] + h;
        let (up, _) = f(&probe);
        probe[i] = params[i] - h;
        let (down, _) = f(&probe);
        probe[i] = params[i];
        let fd = (up - down) / (2.0 * h);
        let denom = analytic[i].abs().max(fd.abs()).max(1e-8);
        worst = worst.max((analytic[i] - fd).abs() / denom);
    }
    worst
}
