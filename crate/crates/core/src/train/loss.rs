/// Probabilities are clamped into `[PROB_CLAMP, 1 − PROB_CLAMP]` before the log.
pub const PROB_CLAMP: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bce {
    pub loss: f64,
    /// dL/dp at the (clamped) probability.
    pub grad: f64,
    pub clamped: bool,
}

/// Binary cross-entropy for one prediction.
pub fn bce_loss(p: f64, y: f64) -> Bce {
    let q = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    Bce {
        loss: -(y * q.ln() + (1.0 - y) * (1.0 - q).ln()),
        grad: (q - y) / (q * (1.0 - q)),
        clamped: q != p,
    }
}
