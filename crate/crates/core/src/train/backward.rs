//! Reverse-mode gradients through the head and the time-aware recurrence.
//!
//! Gradients are accumulated step by step from the last visit back to the
//! first, including the path through the short-term memory
//! `tanh(C·W_d + b_d)` that the interval discount acts on.

use super::loss::bce_loss;
use crate::clinical::Sex;
use crate::error::{Error, Result};
use crate::model::{forward_traced, ModelWeights, Parameters};
use crate::preprocess::FeatureSequence;

#[derive(Clone, Debug)]
pub struct Backward {
    pub loss: f64,
    pub prob: f64,
    pub clamped: bool,
    pub grads: Parameters,
}

/// Loss and exact gradients for one labelled sequence.
pub fn backward(
    seq: &FeatureSequence,
    age: f64,
    sex: Sex,
    label: f64,
    w: &ModelWeights,
) -> Result<Backward> {
    let trace = forward_traced(seq, age, sex, w)?;
    let p = &w.params;
    let hidden = w.hidden_size();
    let mut g = Parameters::zeros(hidden);

    let head = &trace.head;
    let bce = bce_loss(head.prob, label);
    let d_logit = bce.grad * head.prob * (1.0 - head.prob);

    g.bias2.data_mut()[0] = d_logit;
    for (gw, &j) in g.weight2.data_mut().iter_mut().zip(&head.joined) {
        *gw = d_logit * j;
    }
    let d_embed: Vec<f64> = head
        .embedding_pre
        .iter()
        .enumerate()
        .map(|(r, &pre)| if pre > 0.0 { d_logit * p.weight2.at(0, r) } else { 0.0 })
        .collect();
    g.weight1.add_outer(&d_embed, &head.h_last);
    g.bias1.add_slice(&d_embed);

    // dh = weight1ᵀ · d_embed
    let mut dh = vec![0.0; hidden];
    for (r, &de) in d_embed.iter().enumerate() {
        for (d, &wv) in dh.iter_mut().zip(p.weight1.row(r)) {
            *d += de * wv;
        }
    }
    let mut dc = vec![0.0; hidden];

    for step in trace.steps.iter().rev() {
        let mut d_out = vec![0.0; hidden];
        let mut d_in = vec![0.0; hidden];
        let mut d_forget = vec![0.0; hidden];
        let mut d_cand = vec![0.0; hidden];
        let mut d_adjusted = vec![0.0; hidden];
        for k in 0..hidden {
            let tc = step.tanh_c[k];
            let o = step.output_gate[k];
            let dck = dc[k] + dh[k] * o * (1.0 - tc * tc);
            let (i, f, cand) = (step.input_gate[k], step.forget_gate[k], step.candidate[k]);
            d_out[k] = dh[k] * tc * o * (1.0 - o);
            d_forget[k] = dck * step.adjusted[k] * f * (1.0 - f);
            d_in[k] = dck * cand * i * (1.0 - i);
            d_cand[k] = dck * i * (1.0 - cand * cand);
            d_adjusted[k] = dck * f;
        }

        let gates = [
            (&d_in, &mut g.w_i, &mut g.u_i, &mut g.b_i),
            (&d_forget, &mut g.w_f, &mut g.u_f, &mut g.b_f),
            (&d_cand, &mut g.w_g, &mut g.u_g, &mut g.b_g),
            (&d_out, &mut g.w_o, &mut g.u_o, &mut g.b_o),
        ];
        for (d, gw, gu, gb) in gates {
            gw.add_outer(&step.x, d);
            gu.add_outer(&step.h_prev, d);
            gb.add_slice(d);
        }
        let mut dh_prev = p.u_i.mul_vec(&d_in);
        for (u, d) in [(&p.u_f, &d_forget), (&p.u_g, &d_cand), (&p.u_o, &d_out)] {
            for (acc, v) in dh_prev.iter_mut().zip(u.mul_vec(d)) {
                *acc += v;
            }
        }

        // adjusted = C_prev + short·(decay − 1), short = tanh(C_prev·W_d + b_d)
        let d_short_pre: Vec<f64> = (0..hidden)
            .map(|k| {
                let s = step.short[k];
                d_adjusted[k] * (step.decay - 1.0) * (1.0 - s * s)
            })
            .collect();
        g.w_d.add_outer(&step.c_prev, &d_short_pre);
        g.b_d.add_slice(&d_short_pre);
        let mut dc_prev = p.w_d.mul_vec(&d_short_pre);
        for (acc, da) in dc_prev.iter_mut().zip(&d_adjusted) {
            *acc += da;
        }

        dh = dh_prev;
        dc = dc_prev;
    }

    if let Some(name) = g.first_non_finite() {
        return Err(Error::NonFinite(format!("gradient of {name}")));
    }
    Ok(Backward {
        loss: bce.loss,
        prob: head.prob,
        clamped: bce.clamped,
        grads: g,
    })
}
