//! The invariant battery, run against the model and against a broken copy.

use ghz_lhv::lhv::{transform_l, LhvError};
use ghz_lhv::verify::{run_suite, VerifyConfig};
use ghz_lhv::{Angle, Model, RelativeSetting};

// Drops the sign flip on one branch, so L no longer preserves the measure.
fn broken(omega: Angle, delta: RelativeSetting) -> Result<Angle, LhvError> {
    let l = transform_l(omega, delta)?;
    Ok(if omega.value() > delta.value() && delta.value() > 0.0 { -l } else { l })
}

fn main() {
    let cfg = VerifyConfig {
        trials: 100_000,
        // the KS limit of 0.002 needs about a million samples to clear
        ks_samples: 1_000_000,
        pushforward_points: 20_000,
        star_trials: 20_000,
        seed: 0,
    };
    for model in [Model::REFERENCE, Model::with_transform("broken-branch", broken)] {
        println!("== {}", model.name);
        for c in run_suite(&model, &cfg) {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            println!("{mark} {:<30} {:>12.3e} (limit {:.1e})", c.name, c.value, c.threshold);
        }
    }
}
