use crate::error::{Error, Result};
use crate::model::Parameters;
use crate::par::{self, Execution};

/// `(f(x + h) − f(x − h)) / 2h`
pub fn central_difference<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> Result<f64> {
    if h.is_nan() || h <= 0.0 {
        return Err(Error::domain(format!("step must be positive, got {h}")));
    }
    Ok((f(x + h) - f(x - h)) / (2.0 * h))
}

/// Central-difference gradient of `loss` with respect to every scalar in `params`.
pub fn finite_difference_oracle<F>(
    loss: F,
    params: &Parameters,
    h: f64,
    exec: Execution,
) -> Result<Parameters>
where
    F: Fn(&Parameters) -> Result<f64> + Sync + Send,
{
    if h.is_nan() || h <= 0.0 {
        return Err(Error::domain(format!("step must be positive, got {h}")));
    }
    let index: Vec<(usize, usize)> = params
        .arrays()
        .iter()
        .enumerate()
        .flat_map(|(a, arr)| (0..arr.len()).map(move |e| (a, e)))
        .collect();
    let diffs = par::map(exec, &index, |&(a, e)| -> Result<f64> {
        let mut probe = params.clone();
        let x = params.arrays()[a].data()[e];
        probe.arrays_mut()[a].data_mut()[e] = x + h;
        let up = loss(&probe)?;
        probe.arrays_mut()[a].data_mut()[e] = x - h;
        let down = loss(&probe)?;
        Ok((up - down) / (2.0 * h))
    });
    let mut out = Parameters::zeros(params.hidden_size());
    for (&(a, e), d) in index.iter().zip(diffs) {
        out.arrays_mut()[a].data_mut()[e] = d?;
    }
    Ok(out)
}
