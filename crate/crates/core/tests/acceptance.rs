use bandgap::validation::{self, CriterionOutcome, TITLES};

fn report(id: u8, out: &CriterionOutcome) {
    let tag = if out.passed() { "PASS" } else { "FAIL" };
    println!("{tag} criterion {id}: {}", TITLES[id as usize - 1]);
    for c in &out.cases {
        let mark = if c.passed { "ok " } else { "BAD" };
        println!("    {mark} {} | deviation {:.3e} tolerance {:.1e}", c.name, c.max_abs_deviation, c.tolerance);
    }
    for n in &out.notes {
        println!("    note: {n}");
    }
}

fn check(id: u8, out: CriterionOutcome) {
    report(id, &out);
    let bad: Vec<_> = out.cases.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
    assert!(bad.is_empty(), "criterion {id} failed: {bad:?}");
}

#[test]
fn criterion_01() {
    // warm the code path once, the runtime bound is for a repeat call
    let _ = validation::criterion_1();
    check(1, validation::criterion_1());
}

#[test]
fn criterion_02() {
    let _ = validation::criterion_2();
    check(2, validation::criterion_2());
}

#[test]
fn criterion_03() {
    check(3, validation::criterion_3());
}

#[test]
fn criterion_04() {
    check(4, validation::criterion_4());
}

#[test]
fn criterion_05() {
    check(5, validation::criterion_5());
}

#[test]
fn criterion_06() {
    check(6, validation::criterion_6());
}

#[test]
fn criterion_07() {
    check(7, validation::criterion_7());
}

#[test]
fn criterion_08() {
    // |C| from the other solvers is folded in by the full suite
    let mut earlier = 0.0f64;
    for out in [validation::criterion_4(), validation::criterion_10()] {
        earlier = earlier.max(out.max_modulus);
    }
    check(8, validation::criterion_8(earlier));
}

#[test]
fn criterion_09() {
    check(9, validation::criterion_9());
}

#[test]
fn criterion_10() {
    check(10, validation::criterion_10());
}
