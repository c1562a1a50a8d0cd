//! Acceptance suite: one test per criterion, each printing its PASS/FAIL line.

use std::io::Write;

use nde_shockkit::verify::{self, CriterionReport};

fn report(r: CriterionReport) {
    // the summary line bypasses output capture so every run shows it
    let _ = writeln!(std::io::stdout().lock(), "{}", r.line());
    println!("{r}");
    assert!(r.passed, "{}", r.line());
}

macro_rules! criterion {
    ($($name:ident => $f:path),* $(,)?) => {
        $(
            #[test]
            fn $name() {
                report($f());
            }
        )*
    };
}

criterion! {
    c01_shoot_f1_alpha_03 => verify::criterion_1,
    c02_shoot_f1_alpha_01_small_f0 => verify::criterion_2,
    c03_shoot_constants_alpha_01 => verify::criterion_3,
    c04_zero_jump_nonexistence => verify::criterion_4,
    c05_family_nonuniqueness => verify::criterion_5,
    c06_explicit_cubic_residuals => verify::criterion_6,
    c07_characteristic_roots_vieta => verify::criterion_7,
    c08_euler_oracle => verify::criterion_8,
    c09_wkbj_phase => verify::criterion_9,
    c10_regpde_properties => verify::criterion_10,
    c11_fbp_selection => verify::criterion_11,
}
