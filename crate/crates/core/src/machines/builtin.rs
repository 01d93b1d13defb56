//! Small hand-written LBAs over `{a, b}`. Each rejects the empty word.

use super::{MachineSpec, Move};

const MARKERS: [&str; 2] = ["▷", "◁"];

/// Completes a partial transition list: every missing `(q, x)` of a
/// non-halting state rejects, rewriting `x` in place.
fn complete<'a>(
    states: &[&'a str],
    tape: &[&'a str],
    halting: &[&str],
    given: &[(&'a str, &'a str, &'a str, &'a str, Move)],
) -> Vec<(&'a str, &'a str, &'a str, &'a str, Move)> {
    let mut all = given.to_vec();
    for &q in states.iter().filter(|q| !halting.contains(q)) {
        for &x in tape {
            if !given.iter().any(|t| t.0 == q && t.1 == x) {
                all.push((q, x, "qr", x, Move::R));
            }
        }
    }
    all
}

fn build(
    states: &[&str],
    tape: &[&str],
    given: &[(&str, &str, &str, &str, Move)],
) -> MachineSpec {
    let delta = complete(states, tape, &["qa", "qr"], given);
    MachineSpec::new(states, tape, &["a", "b"], "␣", "q0", "qa", "qr", true, &delta)
        .expect("builtin machine is valid")
}

/// Accepts every nonempty word in one step.
pub fn accept_all() -> MachineSpec {
    let tape = ["a", "b", "␣", MARKERS[0], MARKERS[1]];
    let delta: Vec<_> = ["a", "b"]
        .iter()
        .map(|&x| ("q0", x, "qa", x, Move::R))
        .collect();
    build(&["q0", "qa", "qr"], &tape, &delta)
}

/// `{aⁿbⁿ : n ≥ 1}`: mark the leftmost `a` with `X`, the leftmost `b` with
/// `Y`, return, repeat; finally check only `Y`s remain.
pub fn anbn() -> MachineSpec {
    use Move::{L, R};
    let states = ["q0", "qR", "qL", "qCheck", "qa", "qr"];
    let tape = ["a", "b", "X", "Y", "␣", MARKERS[0], MARKERS[1]];
    let given = [
        ("q0", "a", "qR", "X", R),
        ("q0", "Y", "qCheck", "Y", R),
        ("qR", "a", "qR", "a", R),
        ("qR", "Y", "qR", "Y", R),
        ("qR", "b", "qL", "Y", L),
        ("qL", "a", "qL", "a", L),
        ("qL", "Y", "qL", "Y", L),
        ("qL", "X", "q0", "X", R),
        ("qCheck", "Y", "qCheck", "Y", R),
        ("qCheck", "◁", "qa", "◁", L),
    ];
    build(&states, &tape, &given)
}

/// Nonempty palindromes: cross off the leftmost symbol, carry it in the
/// state to the rightmost unmarked cell, compare, return.
pub fn palindrome() -> MachineSpec {
    use Move::{L, R};
    let states = ["q0", "qA", "qB", "qAchk", "qBchk", "qBack", "qa", "qr"];
    let tape = ["a", "b", "X", "␣", MARKERS[0], MARKERS[1]];
    let given = [
        ("q0", "a", "qA", "X", R),
        ("q0", "b", "qB", "X", R),
        ("q0", "X", "qa", "X", R),
        ("qA", "a", "qA", "a", R),
        ("qA", "b", "qA", "b", R),
        ("qA", "X", "qAchk", "X", L),
        ("qA", "◁", "qAchk", "◁", L),
        ("qB", "a", "qB", "a", R),
        ("qB", "b", "qB", "b", R),
        ("qB", "X", "qBchk", "X", L),
        ("qB", "◁", "qBchk", "◁", L),
        ("qAchk", "a", "qBack", "X", L),
        ("qAchk", "X", "qa", "X", R),
        ("qBchk", "b", "qBack", "X", L),
        ("qBchk", "X", "qa", "X", R),
        ("qBack", "a", "qBack", "a", L),
        ("qBack", "b", "qBack", "b", L),
        ("qBack", "X", "q0", "X", R),
    ];
    build(&states, &tape, &given)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machines::{machine_run, Caps, Verdict};

    fn words(max: usize) -> Vec<String> {
        let mut out = vec![String::new()];
        let mut frontier = vec![String::new()];
        for _ in 0..max {
            frontier = frontier
                .iter()
                .flat_map(|w| ["a", "b"].map(|c| format!("{w}{c}")))
                .collect();
            out.extend(frontier.iter().cloned());
        }
        out
    }

    fn verdict(m: &MachineSpec, w: &str) -> Verdict {
        let spaced: Vec<String> = w.chars().map(String::from).collect();
        let input = m.parse_input(&spaced.join(" ")).unwrap();
        machine_run(m, &input, Caps::default()).unwrap().verdict
    }

    fn expect(b: bool) -> Verdict {
        if b {
            Verdict::Accept
        } else {
            Verdict::Reject
        }
    }

    #[test]
    fn anbn_matches_membership() {
        let m = anbn();
        for w in words(10) {
            let n = w.len() / 2;
            let member = !w.is_empty() && w == format!("{}{}", "a".repeat(n), "b".repeat(n));
            assert_eq!(verdict(&m, &w), expect(member), "{w}");
        }
    }

    #[test]
    fn palindrome_matches_reversal() {
        let m = palindrome();
        for w in words(8) {
            let member = !w.is_empty() && w.chars().rev().collect::<String>() == w;
            assert_eq!(verdict(&m, &w), expect(member), "{w}");
        }
    }

    #[test]
    fn accept_all_is_one_step() {
        let m = accept_all();
        let r = machine_run(&m, &m.parse_input("a b b").unwrap(), Caps::default()).unwrap();
        assert_eq!((r.verdict, r.steps, r.peak_cells), (Verdict::Accept, 1, 5));
    }
}
