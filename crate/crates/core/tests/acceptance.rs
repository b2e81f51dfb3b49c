//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.
//!
//! Each criterion is a falsifiable prediction about the implementation; the
//! line states what was measured and against which bound.

mod common;

use common::{sorted_coords, RandomLorentzian};
use enriques_phi::borcherds::ProductParams;
use enriques_phi::lattice::intmat::Q;
use enriques_phi::lattice::{appendix_glue, has_root_in_box, invariants, short_vectors_negdef, standard_lattice, Invariants};
use enriques_phi::modular::HalfPlanePoint;
use enriques_phi::verify::{
    reference_points, verify_automorphy, verify_denominator, verify_even_product, verify_main_theorem,
    verify_modular_series, verify_odd_leading, verify_parity_vanishing, verify_section8, Report, VerifyParams,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

const PREC: usize = 128;

struct Outcome {
    pass: bool,
    detail: String,
}

fn pt(s: &str) -> HalfPlanePoint {
    HalfPlanePoint::parse(s, PREC).expect("valid point")
}

fn worst(reports: &[Report]) -> f64 {
    reports.iter().map(|r| r.rel_error / r.tolerance).fold(0.0, f64::max)
}

fn failing(r: &Report) -> Vec<String> {
    let mut out = Vec::new();
    if !r.pass && r.subchecks.is_empty() {
        out.push(r.check_name.clone());
    }
    for s in &r.subchecks {
        out.extend(failing(s));
    }
    out
}

fn from_reports(reports: Vec<Report>, limit: Option<Duration>, elapsed: Duration, what: &str) -> Outcome {
    let fails: Vec<String> = reports.iter().flat_map(failing).collect();
    let fast = limit.map_or(true, |l| elapsed <= l);
    let pass = reports.iter().all(|r| r.pass) && fast;
    let mut detail = format!("{what}; worst error/tolerance {:.2e}; {:.1} s", worst(&reports), elapsed.as_secs_f64());
    if !fails.is_empty() {
        detail += &format!("; failing: {}", fails.join(", "));
    }
    if !fast {
        detail += &format!("; exceeded time limit {:?}", limit.unwrap());
    }
    Outcome { pass, detail }
}

/// Monster denominator formula, exact through degree 8, within 60 s.
fn criterion_1() -> Outcome {
    let t = Instant::now();
    match verify_denominator(8) {
        Ok(r) => from_reports(vec![r], Some(Duration::from_secs(60)), t.elapsed(), "denominator formula to order 8"),
        Err(e) => Outcome { pass: false, detail: format!("error: {e}") },
    }
}

/// Main identity at the reference points: relative error ≤ 1e-6, every
/// product tail ≤ 1e-9, at most ten minutes per point.
fn criterion_2() -> Outcome {
    let vp = VerifyParams::default();
    let mut reports = Vec::new();
    let mut slow = false;
    let t0 = Instant::now();
    for (a, b) in reference_points() {
        let t = Instant::now();
        match verify_main_theorem(&pt(a), &pt(b), &vp) {
            Ok(r) => reports.push(r),
            Err(e) => return Outcome { pass: false, detail: format!("error at ({a}, {b}): {e}") },
        }
        slow |= t.elapsed() > Duration::from_secs(600);
    }
    let mut o = from_reports(reports, None, t0.elapsed(), "product identity at 3 reference points");
    if slow {
        o.pass = false;
        o.detail += "; a point exceeded 10 min";
    }
    o
}

/// Even-class product against the eta closed form at the reference points.
fn criterion_3() -> Outcome {
    let vp = VerifyParams::default();
    let t0 = Instant::now();
    let mut reports = Vec::new();
    for (a, b) in reference_points() {
        match verify_even_product(&pt(a), &pt(b), &vp) {
            Ok(r) => reports.push(r),
            Err(e) => return Outcome { pass: false, detail: format!("error at ({a}, {b}): {e}") },
        }
    }
    from_reports(reports, None, t0.elapsed(), "even-class product at 3 reference points")
}

/// Odd-class leading terms, exact through order 4.
fn criterion_4() -> Outcome {
    let t = Instant::now();
    match verify_odd_leading(4) {
        Ok(r) => from_reports(vec![r], None, t.elapsed(), "odd-class leading terms to order 4"),
        Err(e) => Outcome { pass: false, detail: format!("error: {e}") },
    }
}

/// Odd classes vanish on their reflection hyperplanes while the even ones
/// stay at their natural scale.
fn criterion_5() -> Outcome {
    let vp = VerifyParams { product: ProductParams { tail_target: 1e-6, ..VerifyParams::default().product }, ..Default::default() };
    let t = Instant::now();
    match verify_parity_vanishing(&pt("2i"), &vp) {
        Ok(r) => from_reports(vec![r], None, t.elapsed(), "vanishing pattern on reflection hyperplanes through 2i"),
        Err(e) => Outcome { pass: false, detail: format!("error: {e}") },
    }
}

/// Weight-4 automorphy under generators of Γ(2) × Γ(2) for all classes.
fn criterion_6() -> Outcome {
    let params = ProductParams { tail_target: 1e-8, ..VerifyParams::default().product };
    let points = [
        (Complex64::new(0.1, 3.0), Complex64::new(-0.2, 4.0)),
        (Complex64::new(0.3, 3.5), Complex64::new(0.15, 3.0)),
    ];
    let t = Instant::now();
    match verify_automorphy(&points, 1e-6, &params) {
        Ok(r) => from_reports(vec![r], None, t.elapsed(), "automorphy at 2 base points, 6 generator pairs"),
        Err(e) => Outcome { pass: false, detail: format!("error: {e}") },
    }
}

/// Restriction identities on the K′ plane at two points.
fn criterion_7() -> Outcome {
    let vp = VerifyParams::default();
    let t = Instant::now();
    let mut reports = Vec::new();
    for (a, b) in [("4i", "5i"), ("3i", "4i")] {
        match verify_section8(&pt(a), &pt(b), &vp) {
            Ok(r) => reports.push(r),
            Err(e) => return Outcome { pass: false, detail: format!("error at ({a}, {b}): {e}") },
        }
    }
    from_reports(reports, None, t.elapsed(), "restriction identities at (4i,5i) and (3i,4i)")
}

/// Lattice kernel: enumeration against a brute-force oracle on random
/// Lorentzian lattices, plus the standard root and glue facts.
fn criterion_8() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
    let mut total = 0usize;
    for case in 0..40 {
        let rank = rng.gen_range(2..=6);
        let lat = RandomLorentzian::sample(&mut rng, rank);
        let norm_min = rng.gen_range(-6..=-1i64);
        let norm_max = rng.gen_range(norm_min..=4);
        let h_min = rng.gen_range(-3..=0i64);
        let h_max = h_min + rng.gen_range(1..=4);
        let got = enriques_phi::lattice::enumerate_vectors(
            &lat.lattice(),
            Q::from(norm_min),
            Q::from(norm_max),
            &lat.height(),
            Q::from(h_min),
            Q::from(h_max),
        );
        let want = lat.naive(norm_min, norm_max, h_min, h_max);
        match got {
            Ok(v) if sorted_coords(&v) == want => total += want.len(),
            Ok(v) => {
                pass = false;
                notes.push(format!("case {case}: {} vectors vs oracle {}", v.len(), want.len()));
            }
            Err(e) => {
                pass = false;
                notes.push(format!("case {case}: error {e}"));
            }
        }
    }
    notes.insert(0, format!("40 random lattices, {total} vectors agree with brute force"));

    let e8 = standard_lattice("E8_2").expect("E8(2)");
    match short_vectors_negdef(&e8, 4) {
        Ok(v) => {
            let n4 = v.iter().filter(|x| e8.norm(x) == Q::from(-4)).count();
            let n2 = v.iter().filter(|x| e8.norm(x) == Q::from(-2)).count();
            pass &= n4 == 240 && n2 == 0;
            notes.push(format!("E8(2): {n4} vectors of norm -4, {n2} of norm -2"));
        }
        Err(e) => {
            pass = false;
            notes.push(format!("E8(2) error: {e}"));
        }
    }

    let k = standard_lattice("K").expect("U(2)+U(2)");
    let g = k.gram_int().expect("integral");
    let norms_in_4z = (0..g.len()).all(|i| g[i][i] % 4 == 0 && (0..g.len()).all(|j| g[i][j] % 2 == 0));
    let root = has_root_in_box(&k, 4);
    pass &= norms_in_4z && !root;
    notes.push(format!("U(2)+U(2): norms in 4Z {norms_in_4z}, root in box {root}"));

    let glue = invariants(&appendix_glue());
    let expected = Invariants { signature: (2, 10), disc_rank: 10, parity: 0 };
    let glue_ok = glue.as_ref().is_ok_and(|i| *i == expected);
    pass &= glue_ok;
    notes.push(format!("glue invariants {:?}", glue.map(|i| (i.signature, i.disc_rank, i.parity)).ok()));

    Outcome { pass, detail: notes.join("; ") }
}

/// Closed-form modular functions against truncated q-series at seeded points.
fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0009);
    let points: Vec<Complex64> =
        (0..20).map(|_| Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(1.0..3.0))).collect();
    let t = Instant::now();
    match verify_modular_series(&points, 1e-10, PREC) {
        Ok(r) => from_reports(vec![r], None, t.elapsed(), "modular functions vs q-series at 20 random points"),
        Err(e) => Outcome { pass: false, detail: format!("error: {e}") },
    }
}

fn main() {
    let criteria: [(u8, fn() -> Outcome); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let mut failures = 0;
    for (n, f) in criteria {
        let o = f();
        failures += usize::from(!o.pass);
        println!("criterion {n}: {} — {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if failures > 0 {
        println!("{failures} criterion/criteria failed");
        std::process::exit(1);
    }
}
