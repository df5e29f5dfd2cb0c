use crate::cube::SpectralCube;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Mean squared error and its gradient with respect to `pred`.
pub fn mse_loss<T: Scalar>(pred: &SpectralCube<T>, target: &SpectralCube<T>) -> Result<(f64, SpectralCube<T>)> {
    if !pred.same_dims(target) {
        return Err(Error::Shape(format!(
            "prediction {:?} and target {:?} differ in shape",
            pred.dims(),
            target.dims()
        )));
    }
    let n = pred.data().len();
    let scale = T::from_f64(2.0 / n as f64);
    let mut sum = 0.0;
    let grad: Vec<T> = pred
        .data()
        .iter()
        .zip(target.data())
        .map(|(&p, &t)| {
            let d = p - t;
            let dd = d.to_f64();
            sum += dd * dd;
            scale * d
        })
        .collect();
    let (h, w, b) = pred.dims();
    Ok((sum / n as f64, SpectralCube::from_vec(h, w, b, grad)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn equal_inputs() {
        let a = SpectralCube::<f32>::filled(3, 2, 2, 0.3).unwrap();
        let (loss, grad) = mse_loss(&a, &a).unwrap();
        assert_eq!(loss, 0.0);
        assert!(grad.data().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn constant_offset() {
        for (h, w, b) in [(1, 1, 1), (5, 3, 7)] {
            let p = SpectralCube::<f32>::filled(h, w, b, 0.5).unwrap();
            let t = SpectralCube::<f32>::zeros(h, w, b).unwrap();
            assert_eq!(mse_loss(&p, &t).unwrap().0, 0.25);
        }
    }

    #[test]
    fn matches_direct_sum_and_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = SpectralCube::<f64>::from_fn(3, 4, 2, |_, _, _| rng.random()).unwrap();
        let t = SpectralCube::<f64>::from_fn(3, 4, 2, |_, _, _| rng.random()).unwrap();
        let (loss, grad) = mse_loss(&p, &t).unwrap();
        let direct: f64 =
            p.data().iter().zip(t.data()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / 24.0;
        assert!((loss - direct).abs() < 1e-15);
        let h = 1e-5;
        for i in 0..24 {
            let bump = |delta: f64| {
                let mut d = p.data().to_vec();
                d[i] += delta;
                mse_loss(&SpectralCube::from_vec(3, 4, 2, d).unwrap(), &t).unwrap().0
            };
            let fd = (bump(h) - bump(-h)) / (2.0 * h);
            let an = grad.data()[i];
            assert!((fd - an).abs() / an.abs().max(1e-8) < 1e-6, "{i}: {fd} vs {an}");
        }
    }

    #[test]
    fn shape_mismatch() {
        let a = SpectralCube::<f32>::zeros(2, 2, 1).unwrap();
        let b = SpectralCube::<f32>::zeros(2, 3, 1).unwrap();
        assert!(mse_loss(&a, &b).is_err());
    }
}
