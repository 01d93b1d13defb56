use crate::numerics::NumericFormat;
use crate::transformer::{greedy_decode, Transformer};
use crate::vocab::TokenId;

#[derive(Debug, Clone, PartialEq)]
pub struct MarginFailure {
    pub window: Vec<TokenId>,
    pub expected: TokenId,
    /// `None` when the forward pass itself failed.
    pub got: Option<TokenId>,
    pub error: Option<String>,
}

/// Decision margins of a model over a set of `(window, expected)` cases.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginReport {
    pub cases: usize,
    /// Smallest `logit[expected] − max_{j≠expected} logit[j]` over cases
    /// that ran; `+∞` when none did.
    pub min_gap: f64,
    pub failures: Vec<MarginFailure>,
}

impl MarginReport {
    pub fn all_correct(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn margin_report(model: &Transformer, cases: &[(Vec<TokenId>, TokenId)]) -> MarginReport {
    let mut min_gap = f64::INFINITY;
    let mut failures = Vec::new();
    for (window, expected) in cases {
        match model.forward(window) {
            Ok(logits) => {
                let other = logits
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != expected.0)
                    .map(|(_, &l)| l)
                    .fold(f64::NEG_INFINITY, f64::max);
                min_gap = min_gap.min(logits[expected.0] - other);
                let got = greedy_decode(&logits);
                if got != *expected {
                    failures.push(MarginFailure {
                        window: window.clone(),
                        expected: *expected,
                        got: Some(got),
                        error: None,
                    });
                }
            }
            Err(e) => failures.push(MarginFailure {
                window: window.clone(),
                expected: *expected,
                got: None,
                error: Some(e.to_string()),
            }),
        }
    }
    MarginReport {
        cases: cases.len(),
        min_gap,
        failures,
    }
}

/// Re-runs the cases with weights and arithmetic in fixed point at each
/// fractional width.
pub fn precision_sweep(
    model: &Transformer,
    cases: &[(Vec<TokenId>, TokenId)],
    frac_bits: impl IntoIterator<Item = u32>,
    total_bits: u32,
) -> Vec<(u32, MarginReport)> {
    frac_bits
        .into_iter()
        .map(|f| {
            let quantized = NumericFormat::fixed(f, total_bits)
                .map_err(|e| e.to_string())
                .and_then(|fmt| model.with_format(fmt).map_err(|e| e.to_string()));
            let report = match quantized {
                Ok(m) => margin_report(&m, cases),
                Err(e) => MarginReport {
                    cases: cases.len(),
                    min_gap: f64::INFINITY,
                    failures: cases
                        .iter()
                        .map(|(w, x)| MarginFailure {
                            window: w.clone(),
                            expected: *x,
                            got: None,
                            error: Some(e.clone()),
                        })
                        .collect(),
                },
            };
            (f, report)
        })
        .collect()
}

/// Smallest swept width from which every larger swept width is fully
/// correct.
pub fn sweep_threshold(sweep: &[(u32, MarginReport)]) -> Option<u32> {
    let mut sorted: Vec<&(u32, MarginReport)> = sweep.iter().collect();
    sorted.sort_by_key(|(f, _)| std::cmp::Reverse(*f));
    let mut best = None;
    for (f, r) in sorted {
        if !r.all_correct() {
            break;
        }
        best = Some(*f);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{compile_binary_fn, BinaryFnTable};
    use crate::vocab::Vocabulary;

    #[test]
    fn xor_margin_and_sweep() {
        let t = BinaryFnTable::from_fn(Vocabulary::new(["1", "2"]).unwrap(), |a, b| {
            TokenId(a.0 ^ b.0)
        })
        .unwrap();
        let m = compile_binary_fn(&t, NumericFormat::Float53).unwrap();
        let cases: Vec<_> = t.entries().map(|(a, b, c)| (vec![a, b], c)).collect();
        let r = margin_report(&m, &cases);
        assert!(r.all_correct());
        assert!((r.min_gap - 1.0).abs() < 1e-9);
        let sweep = precision_sweep(&m, &cases, 1..=24, 64);
        let th = sweep_threshold(&sweep).unwrap();
        assert!(th <= 24);
    }
}
