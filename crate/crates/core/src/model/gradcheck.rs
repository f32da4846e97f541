use super::{Example, ModelState, Polarity, TrainConfig};
use crate::error::{Error, Result};

/// Denominator floor of the relative error. Entries smaller than this are
/// compared absolutely: with `eps = 1e-4` and `tau = 0.01` the central
/// difference itself carries truncation error near `1e-6`.
pub const GRAD_CHECK_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    /// Parameter group and flat offset of the worst entry.
    pub worst: (&'static str, usize),
    pub checked: usize,
}

/// Compares the closed-form gradient of `total_loss` on `batch` with
/// central differences over every learnable scalar.
pub fn gradient_check(
    state: &ModelState,
    batch: &[Example<'_>],
    cfg: &TrainConfig,
    eps: f64,
) -> Result<GradCheckReport> {
    if !(1e-5..=1e-3).contains(&eps) {
        return Err(Error::InvalidConfig(format!(
            "finite-difference step {eps} not in [1e-5, 1e-3]"
        )));
    }
    cfg.validate()?;
    let (_, analytic) = state.gradients(&[batch], cfg)?;
    let mut probe = state.clone();
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        max_abs_error: 0.0,
        worst: ("", 0),
        checked: 0,
    };

    let mut groups: Vec<(&'static str, &[f64])> = vec![
        ("ctx_pos", &analytic.ctx_pos),
        ("ctx_neg", &analytic.ctx_neg),
    ];
    if state.adapter().is_enabled() {
        groups.push(("adapter_a", &analytic.a));
        groups.push(("adapter_b", &analytic.b));
    }

    for (name, grad) in groups {
        for (i, &g) in grad.iter().enumerate() {
            let numeric = {
                let original = param(&mut probe, name)[i];
                param(&mut probe, name)[i] = original + eps;
                let plus = probe.total_loss(batch, cfg)?;
                param(&mut probe, name)[i] = original - eps;
                let minus = probe.total_loss(batch, cfg)?;
                param(&mut probe, name)[i] = original;
                (plus - minus) / (2.0 * eps)
            };
            let abs = (g - numeric).abs();
            let rel = abs / g.abs().max(numeric.abs()).max(GRAD_CHECK_FLOOR);
            report.checked += 1;
            report.max_abs_error = report.max_abs_error.max(abs);
            if rel > report.max_rel_error {
                report.max_rel_error = rel;
                report.worst = (name, i);
            }
        }
    }
    Ok(report)
}

fn param<'s>(state: &'s mut ModelState, name: &str) -> &'s mut [f64] {
    match name {
        "ctx_pos" => state.bank_mut().ctx_mut(Polarity::Positive),
        "ctx_neg" => state.bank_mut().ctx_mut(Polarity::Negative),
        "adapter_a" => state.adapter_mut().a_mut(),
        "adapter_b" => state.adapter_mut().b_mut(),
        _ => unreachable!("unknown parameter group {name}"),
    }
}
