use crate::{Error, Result};

fn check(pred: &[f64], target: &[f64], context: &'static str) -> Result<()> {
    if pred.len() != target.len() {
        return Err(Error::shape(context, target.len(), pred.len()));
    }
    if pred.is_empty() {
        return Err(Error::shape(context, 1, 0));
    }
    Ok(())
}

/// Mean absolute error.
pub fn mae_loss(pred: &[f64], target: &[f64]) -> Result<f64> {
    check(pred, target, "mae_loss")?;
    let sum: f64 = pred.iter().zip(target).map(|(p, t)| (p - t).abs()).sum();
    Ok(sum / pred.len() as f64)
}

/// Gradient of [`mae_loss`] w.r.t. `pred`: `sign(p - t) / n`, with `sign(0) = 0`.
pub fn mae_loss_grad(pred: &[f64], target: &[f64]) -> Result<Vec<f64>> {
    check(pred, target, "mae_loss_grad")?;
    let n = pred.len() as f64;
    Ok(pred
        .iter()
        .zip(target)
        .map(|(p, t)| {
            let d = p - t;
            if d > 0.0 {
                1.0 / n
            } else if d < 0.0 {
                -1.0 / n
            } else {
                0.0
            }
        })
        .collect())
}

/// L1 loss for geometry targets, in millimetres. Same contract as [`mae_loss`].
pub fn l1_loss(pred: &[f64], target: &[f64]) -> Result<f64> {
    mae_loss(pred, target)
}

pub fn l1_loss_grad(pred: &[f64], target: &[f64]) -> Result<Vec<f64>> {
    mae_loss_grad(pred, target)
}
