use std::f64::consts::E;

use super::{par_map, Check, CriterionReport, VerifyOptions};
use crate::construct::{
    closed_form_heads, compile_binary_fn, precision_sweep, sweep_threshold, BinaryFnTable,
};
use crate::numerics::NumericFormat;

const KS: [usize; 4] = [2, 3, 4, 5];

fn tables(opts: &VerifyOptions, stream: u64, per_k: usize) -> Vec<BinaryFnTable> {
    let mut rng = opts.rng(stream);
    KS.iter()
        .flat_map(|&k| (0..per_k).map(move |_| k))
        .map(|k| BinaryFnTable::random(k, &mut rng).expect("k ≥ 2"))
        .collect()
}

/// Compiled models reproduce random tables on every window, with logits
/// within 1e-6 of one-hot.
pub fn binary_compile_soundness(opts: &VerifyOptions) -> CriterionReport {
    let check = Check::new(1, "binary-compile-soundness");
    let tables = tables(opts, 1, 20);
    let results = par_map(&tables, |t| {
        let m = compile_binary_fn(t, NumericFormat::Float53).expect("compiles");
        let mut worst = 0.0f64;
        for (a, b, c) in t.entries() {
            let logits = m.forward(&[a, b]).expect("forward");
            for (j, &l) in logits.iter().enumerate() {
                let target = if j == c.0 { 1.0 } else { 0.0 };
                worst = worst.max((l - target).abs());
            }
            let got = m.next_token(&[a, b]).expect("forward");
            if got != c {
                return Err(format!("K={} window ({}, {}) decodes {} not {}", t.k(), a.0 + 1, b.0 + 1, got.0 + 1, c.0 + 1));
            }
        }
        Ok(worst)
    });
    let mut worst = 0.0f64;
    for r in results {
        match r {
            Ok(w) => worst = worst.max(w),
            Err(e) => return check.fail(format!("{} tables", tables.len()), e),
        }
    }
    let detail = format!(
        "{} tables over K=2..5, all windows decode correctly; max |logit - onehot| = {worst:.3e}",
        tables.len()
    );
    if worst <= 1e-6 {
        check.pass(detail)
    } else {
        check.fail(detail, format!("logit deviation {worst:.3e} > 1e-6"))
    }
}

/// Attention weights and head outputs equal the closed forms.
pub fn closed_form_attention(opts: &VerifyOptions) -> CriterionReport {
    let check = Check::new(2, "closed-form-attention");
    // Logistic form computed independently of the construction's e/(e+1).
    let p = 1.0 / (1.0 + (-1.0f64).exp());
    let q = 1.0 - p;
    if (p - 0.731058).abs() > 1e-6 || (q - 0.268941).abs() > 1e-6 || (E / (E + 1.0) - p).abs() > 1e-15 {
        return check.fail("constants".into(), format!("p = {p}, q = {q}"));
    }
    let mut worst = 0.0f64;
    for t in tables(opts, 2, 1) {
        let k = t.k();
        let m = compile_binary_fn(&t, NumericFormat::Float53).expect("compiles");
        for (a, b, _) in t.entries() {
            let x = m.embed(&[a, b]).expect("embed");
            let (want_prev, want_self) = if a == b { ([0.5, 0.5], [0.5, 0.5]) } else { ([p, q], [q, p]) };
            for (head, want) in [(0, want_prev), (1, want_self)] {
                let probs = m.attention_probs(&x, 0, head).expect("probs");
                for (j, w) in want.iter().enumerate() {
                    worst = worst.max((probs.get(1, j) - w).abs());
                }
            }
            let outs = m.head_outputs(&x, 0).expect("heads");
            let (cp, cs) = closed_form_heads(a, b, k);
            for i in 0..k {
                worst = worst.max((outs[0].get(1, i) - cp[i]).abs());
                worst = worst.max((outs[1].get(1, i) - cs[i]).abs());
            }
            if worst > 1e-9 {
                return check.fail(
                    format!("max deviation {worst:.3e}"),
                    format!("K={k} window ({}, {})", a.0 + 1, b.0 + 1),
                );
            }
        }
    }
    check.pass(format!(
        "weights e/(e+1) = {p:.9}, 1/(e+1) = {q:.9}, 1/2 on ties; max deviation {worst:.3e} over K=2..5"
    ))
}

/// Smallest fixed-point fraction width at which every table decodes.
pub fn precision_probe(opts: &VerifyOptions) -> CriterionReport {
    let check = Check::new(3, "precision-probe");
    let tables = tables(opts, 3, 5);
    let thresholds = par_map(&tables, |t| {
        let m = compile_binary_fn(t, NumericFormat::Float53).expect("compiles");
        let cases: Vec<_> = t.entries().map(|(a, b, c)| (vec![a, b], c)).collect();
        sweep_threshold(&precision_sweep(&m, &cases, 1..=24, 64))
    });
    let mut per_k = Vec::new();
    for &k in &KS {
        let ts: Vec<Option<u32>> = tables
            .iter()
            .zip(&thresholds)
            .filter(|(t, _)| t.k() == k)
            .map(|(_, th)| *th)
            .collect();
        per_k.push((k, ts.iter().copied().collect::<Option<Vec<u32>>>().map(|v| v.into_iter().max().unwrap_or(0))));
    }
    let overall = per_k.iter().map(|(_, t)| *t).collect::<Option<Vec<u32>>>().map(|v| v.into_iter().max().unwrap_or(0));
    let by_k: Vec<String> = per_k
        .iter()
        .map(|(k, t)| format!("K={k}:{}", t.map_or("none".into(), |x| x.to_string())))
        .collect();
    match overall {
        Some(th) if th <= 20 => check.pass(format!("threshold frac_bits = {th} ({})", by_k.join(" "))),
        Some(th) => check.fail(format!("threshold frac_bits = {th}"), by_k.join(" ")),
        None => check.fail("no threshold within 24 bits".into(), by_k.join(" ")),
    }
}
