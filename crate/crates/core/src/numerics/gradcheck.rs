use super::NumericsError;

/// Central-difference gradient check. Returns the largest per-coordinate
/// relative error `|a - n| / max(1e-8, |a| + |n|)`.
pub fn check_gradient<F>(
    mut f: F,
    point: &[f64],
    analytic: &[f64],
    h: f64,
) -> Result<f64, NumericsError>
where
    F: FnMut(&[f64]) -> f64,
{
    if point.len() != analytic.len() {
        return Err(NumericsError::ShapeMismatch(format!(
            "{} coordinates but {} analytic partials",
            point.len(),
            analytic.len()
        )));
    }
    let mut p = point.to_vec();
    let mut worst = 0.0f64;
    for i in 0..p.len() {
        let orig = p[i];
        p[i] = orig + h;
        let plus = f(&p);
        p[i] = orig - h;
        let minus = f(&p);
        p[i] = orig;
        let numeric = (plus - minus) / (2.0 * h);
        if !numeric.is_finite() || !analytic[i].is_finite() {
            return Err(NumericsError::NonFiniteValue(i));
        }
        let denom = (analytic[i].abs() + numeric.abs()).max(1e-8);
        worst = worst.max((analytic[i] - numeric).abs() / denom);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic() {
        let err = check_gradient(|p| p[0] * p[0], &[3.0], &[6.0], 1e-5).unwrap();
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn constant() {
        let err = check_gradient(|_| 4.2, &[1.0, -2.0], &[0.0, 0.0], 1e-5).unwrap();
        assert_eq!(err, 0.0);
    }

    #[test]
    fn detects_wrong_gradient() {
        let err = check_gradient(|p| p[0] * p[0], &[3.0], &[5.0], 1e-5).unwrap();
        assert!(err > 0.05);
    }

    #[test]
    fn non_finite() {
        let r = check_gradient(|p| p[0].ln(), &[0.0], &[1.0], 1e-5);
        assert_eq!(r, Err(NumericsError::NonFiniteValue(0)));
    }
}
