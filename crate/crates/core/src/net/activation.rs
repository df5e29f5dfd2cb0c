use crate::cube::FeatureCube;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Elementwise `max(x, 0)`.
pub fn relu<T: Scalar>(x: &FeatureCube<T>) -> FeatureCube<T> {
    let (c, b, h, w) = x.dims();
    let data = x.data().iter().map(|&v| if v > T::ZERO { v } else { T::ZERO }).collect();
    FeatureCube::from_raw(c, b, h, w, data)
}

/// Passes `grad` where `x > 0` and zeroes it elsewhere (including `x == 0`).
pub fn relu_backward<T: Scalar>(x: &FeatureCube<T>, grad: &FeatureCube<T>) -> Result<FeatureCube<T>> {
    if x.dims() != grad.dims() {
        return Err(Error::Shape(format!(
            "relu gradient dims {:?} differ from input dims {:?}",
            grad.dims(),
            x.dims()
        )));
    }
    let (c, b, h, w) = x.dims();
    let data = x
        .data()
        .iter()
        .zip(grad.data())
        .map(|(&v, &g)| if v > T::ZERO { g } else { T::ZERO })
        .collect();
    Ok(FeatureCube::from_raw(c, b, h, w, data))
}
