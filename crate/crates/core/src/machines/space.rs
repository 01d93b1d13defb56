use num_rational::Ratio;

use super::MachineError;
use crate::managers::{Manager, ManagerState, Prompt};
use crate::system::{NextTokenSource, SystemConfig};
use crate::vocab::TokenId;

pub type Rational = Ratio<i128>;

/// Work-tape usage of one metered run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceSample {
    pub n: usize,
    pub peak_cells: usize,
    pub steps: u64,
    pub halted: bool,
}

/// Exact least-squares line `peak ≈ a·n + b` over the halted samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceFit {
    pub samples: Vec<SpaceSample>,
    /// Input lengths whose runs hit the step cap; excluded from the fit.
    pub diverged: Vec<usize>,
    pub a: Rational,
    pub b: Rational,
    pub max_abs_residual: Rational,
}

/// Simulates an appending system on a single work tape: cells `1..=|r|`
/// hold `r`; each step copies the window into the cells after `r`, runs the
/// next-token call in a scratch region beyond it, then shifts `r` left by
/// one cell and writes the decoded token at its end.
pub fn meter_run(
    source: &dyn NextTokenSource,
    cfg: &SystemConfig,
    input: &[TokenId],
) -> Result<SpaceSample, MachineError> {
    let Manager::Appending(_) = cfg.manager else {
        return Err(MachineError::Invalid("space metering needs an appending manager".into()));
    };
    let scratch = source.scratch_cells();
    let mut state = ManagerState::new(input.to_vec());
    let mut tape: Vec<TokenId> = input.to_vec();
    let mut peak = tape.len();
    let mut steps = 0;
    let halted = loop {
        if steps >= cfg.max_steps {
            break false;
        }
        let window = match cfg.manager.window(&state) {
            Prompt::Halt => break true,
            Prompt::Window(w) => w,
        };
        tape.truncate(state.r.len());
        tape.extend_from_slice(&window);
        peak = peak.max(tape.len() + scratch);
        let x = source
            .next_token(&window)
            .map_err(|e| MachineError::Source(e.to_string()))?;
        steps += 1;
        state = cfg.manager.update(&state, x);
        tape.truncate(state.r.len());
        tape.copy_from_slice(&state.r);
        if state.is_halted() {
            break true;
        }
    };
    Ok(SpaceSample {
        n: input.len(),
        peak_cells: peak,
        steps,
        halted,
    })
}

/// Meters each input and fits the peaks of the halted runs.
pub fn appending_space_meter(
    source: &dyn NextTokenSource,
    cfg: &SystemConfig,
    inputs: &[Vec<TokenId>],
) -> Result<SpaceFit, MachineError> {
    let mut samples = Vec::new();
    let mut diverged = Vec::new();
    for x in inputs {
        let s = meter_run(source, cfg, x)?;
        if s.halted {
            samples.push(s);
        } else {
            diverged.push(s.n);
        }
    }
    let points: Vec<(i128, i128)> = samples
        .iter()
        .map(|s| (s.n as i128, s.peak_cells as i128))
        .collect();
    let (a, b) = least_squares(&points)
        .ok_or_else(|| MachineError::Invalid("fit needs two distinct input lengths".into()))?;
    let max_abs_residual = points
        .iter()
        .map(|&(x, y)| {
            let r = Rational::from_integer(y) - (a * x + b);
            if r < Rational::from_integer(0) {
                -r
            } else {
                r
            }
        })
        .max()
        .unwrap_or_else(|| Rational::from_integer(0));
    Ok(SpaceFit {
        samples,
        diverged,
        a,
        b,
        max_abs_residual,
    })
}

fn least_squares(points: &[(i128, i128)]) -> Option<(Rational, Rational)> {
    let m = points.len() as i128;
    let sx: i128 = points.iter().map(|p| p.0).sum();
    let sy: i128 = points.iter().map(|p| p.1).sum();
    let sxx: i128 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: i128 = points.iter().map(|p| p.0 * p.1).sum();
    let den = m * sxx - sx * sx;
    if den == 0 {
        return None;
    }
    let a = Rational::new(m * sxy - sx * sy, den);
    let b = (Rational::from_integer(sy) - a * sx) / m;
    Some((a, b))
}
