//! Runner for the acceptance suite: each criterion is a named check that
//! reports pass or fail with a one-line measurement summary.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use modespec::{ModeIndex, ModeSpectrum, PhysicalFrame};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    pub fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

pub struct Criterion {
    pub id: u32,
    pub name: &'static str,
    pub budget: Duration,
    pub check: fn() -> Outcome,
}

/// Runs one criterion; a panic counts as a failure. Exceeding the runtime
/// budget is reported but does not fail the criterion.
pub fn run(c: &Criterion) -> (Outcome, Duration) {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(c.check)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Outcome::new(false, format!("panicked: {msg}"))
    });
    (outcome, start.elapsed())
}

pub fn format_line(c: &Criterion, o: &Outcome, t: Duration) -> String {
    let over = if t > c.budget {
        format!(" (over {:.0?} budget)", c.budget)
    } else {
        String::new()
    };
    format!(
        "{} {:>2} {:<28} {} [{:.1?}{over}]",
        if o.pass { "PASS" } else { "FAIL" },
        c.id,
        c.name,
        o.detail,
        t
    )
}

/// Runs every criterion in order, printing one line each. True if all pass.
pub fn run_all(criteria: &[Criterion]) -> bool {
    let mut all = true;
    for c in criteria {
        let (o, t) = run(c);
        println!("{}", format_line(c, &o, t));
        all &= o.pass;
    }
    all
}

/// Normalized spectrum with uniform random complex coefficients on every
/// mode up to `max_order`.
pub fn random_spectrum(seed: u64, max_order: u32, frame: PhysicalFrame) -> ModeSpectrum {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ModeSpectrum::new(
        frame,
        ModeIndex::all_up_to(max_order).into_iter().map(|k| {
            (
                k,
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            )
        }),
    )
    .normalized()
    .expect("nonzero spectrum")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn boom() -> Outcome {
        panic!("deliberate")
    }

    #[test]
    fn panics_become_failures() {
        let c = Criterion {
            id: 0,
            name: "boom",
            budget: Duration::from_secs(1),
            check: boom,
        };
        let (o, _) = run(&c);
        assert!(!o.pass);
        assert!(o.detail.contains("deliberate"));
        assert!(format_line(&c, &o, Duration::from_millis(5)).starts_with("FAIL  0 boom"));
    }

    #[test]
    fn random_spectra_are_reproducible() {
        let f = PhysicalFrame::unit();
        assert_eq!(random_spectrum(3, 4, f), random_spectrum(3, 4, f));
        assert!((random_spectrum(3, 4, f).norm_sqr() - 1.0).abs() < 1e-12);
    }
}
