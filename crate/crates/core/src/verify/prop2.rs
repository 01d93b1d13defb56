use super::{Check, CriterionReport, VerifyOptions};
use crate::construct::{compile_binary_fn, BinaryFnTable};
use crate::machines::{appending_space_meter, Rational};
use crate::managers::{AppendingManager, Manager};
use crate::numerics::NumericFormat;
use crate::system::{FnSource, Mode, NextTokenSource, SystemConfig};
use crate::vocab::{TokenId, Vocabulary};

const LENGTHS: [usize; 5] = [4, 8, 16, 32, 64];

fn inputs(v: &Vocabulary) -> Vec<Vec<TokenId>> {
    let a = v.id("a").expect("a");
    let end = v.id("#").expect("#");
    LENGTHS
        .iter()
        .map(|&n| {
            let mut x = vec![a; n - 1];
            x.push(end);
            x
        })
        .collect()
}

/// Rotates the input, turning each `a` into `b`, and halts once `#` is
/// back in front.
fn rotate_table() -> BinaryFnTable {
    let v = Vocabulary::new(["a", "b", "#", "<EOS>"]).expect("distinct names");
    let (a, b, eos) = (TokenId(0), TokenId(1), TokenId(3));
    BinaryFnTable::from_fn(v, |x, _| if x == a { b } else { eos }).expect("valid table")
}

/// Consumes `a`s without writing and halts on reaching `#`.
fn shrink_table() -> BinaryFnTable {
    let v = Vocabulary::new(["a", "#", "<EOS>", "ε"]).expect("distinct names");
    let (a, eps, eos) = (TokenId(0), TokenId(3), TokenId(2));
    BinaryFnTable::from_fn(v, |x, y| if x == a && y == a { eps } else { eos }).expect("valid table")
}

/// Peak work cells of three halting rules under an appending manager with
/// window 2 grow affinely in the input length.
pub fn space_law(_opts: &VerifyOptions) -> CriterionReport {
    let check = Check::new(6, "space-law");
    let rotate = compile_binary_fn(&rotate_table(), NumericFormat::Float53).expect("compiles");
    let shrink = compile_binary_fn(&shrink_table(), NumericFormat::Float53).expect("compiles");
    let ev = Vocabulary::new(["a", "#", "ε", "<EOS>"]).expect("distinct names");
    let erase = FnSource::new(ev, 2, |w: &[TokenId]| {
        if w.len() == 2 {
            TokenId(2)
        } else {
            TokenId(3)
        }
    });
    let rules: [(&str, &dyn NextTokenSource); 3] =
        [("rotate", &rotate), ("shrink", &shrink), ("erase", &erase)];
    let one = Rational::from_integer(1);
    let two = Rational::from_integer(2);
    let zero = Rational::from_integer(0);
    let mut parts = Vec::new();
    for (name, src) in rules {
        let v = src.vocab();
        let m = AppendingManager::new(2, ["<EOS>"], v).expect("valid manager");
        let cfg = SystemConfig::new(Manager::Appending(m), Mode::Transduce).with_max_steps(10_000);
        let fit = match appending_space_meter(src, &cfg, &inputs(v)) {
            Ok(f) => f,
            Err(e) => return check.fail(format!("rule {name}"), e.to_string()),
        };
        let peaks: Vec<String> = fit.samples.iter().map(|s| s.peak_cells.to_string()).collect();
        let line = format!("{name}: slope {} intercept {} peaks [{}]", fit.a, fit.b, peaks.join(" "));
        if !fit.diverged.is_empty() || fit.a < one || fit.a > two || fit.max_abs_residual != zero {
            return check.fail(
                line,
                format!("diverged at n = {:?}, max residual {}", fit.diverged, fit.max_abs_residual),
            );
        }
        parts.push(line);
    }
    check.pass(parts.join("; "))
}
