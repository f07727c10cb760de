//! Hinge loss over one (center, window, negative) triple and its exact gradient
//! with respect to the raw, unnormalized vectors.

use crate::error::{Error, Result};
use crate::model::EPS_NORM;
use crate::scalar::{dot, norm, Real};

fn checked_norm<T: Real>(v: &[T], role: &str) -> Result<T> {
    let n = norm(v);
    if n.as_f64() > EPS_NORM {
        Ok(n)
    } else {
        Err(Error::DegenerateVector(role.to_owned()))
    }
}

/// `[m − cos(c, w) + cos(c, w')]₊`
pub fn triple_loss<T: Real>(center: &[T], window: &[T], negative: &[T], margin: T) -> Result<T> {
    let nc = checked_norm(center, "center")?;
    let nw = checked_norm(window, "window")?;
    let nn = checked_norm(negative, "negative")?;
    let pull = dot(center, window) / (nc * nw);
    let push = dot(center, negative) / (nc * nn);
    Ok((margin - pull + push).max(T::zero()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TripleGradient<T> {
    pub center: Vec<T>,
    pub window: Vec<T>,
    pub negative: Vec<T>,
}

/// Gradient of [`triple_loss`]. Uses `∂cos(a,b)/∂a = (b̂ − cos(a,b)·â)/‖a‖`;
/// all three parts are zero where the hinge is flat.
pub fn triple_gradient<T: Real>(
    center: &[T],
    window: &[T],
    negative: &[T],
    margin: T,
) -> Result<TripleGradient<T>> {
    let nc = checked_norm(center, "center")?;
    let nw = checked_norm(window, "window")?;
    let nn = checked_norm(negative, "negative")?;
    let cos_cw = dot(center, window) / (nc * nw);
    let cos_cn = dot(center, negative) / (nc * nn);
    let d = center.len();
    if margin - cos_cw + cos_cn <= T::zero() {
        return Ok(TripleGradient {
            center: vec![T::zero(); d],
            window: vec![T::zero(); d],
            negative: vec![T::zero(); d],
        });
    }
    let mut g = TripleGradient {
        center: Vec::with_capacity(d),
        window: Vec::with_capacity(d),
        negative: Vec::with_capacity(d),
    };
    for k in 0..d {
        let c_hat = center[k] / nc;
        let w_hat = window[k] / nw;
        let n_hat = negative[k] / nn;
        // −∂cos(c,w)/∂c + ∂cos(c,w')/∂c
        g.center
            .push((-(w_hat - cos_cw * c_hat) + (n_hat - cos_cn * c_hat)) / nc);
        g.window.push(-(c_hat - cos_cw * w_hat) / nw);
        g.negative.push((c_hat - cos_cn * n_hat) / nn);
    }
    Ok(g)
}
