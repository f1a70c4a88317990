//! Acceptance criteria, one PASS/FAIL line each. Run with
//! `cargo test -p deligne --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use deligne::delignedata::ManifoldData;
use deligne::finheis;
use deligne::intertwine;
use deligne::linkform::LinkingForm;
use deligne::selftest::{self, PropertyResult, SelftestConfig, Suite};

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn timed(budget: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    if took > budget {
        o.ok = false;
        o.detail = format!("{}; took {took:.2?}, budget {budget:?}", o.detail);
    } else {
        o.detail = format!("{} ({took:.2?})", o.detail);
    }
    o
}

fn suite_outcome(results: &[&PropertyResult]) -> Outcome {
    let failed: Vec<String> = results.iter().filter(|r| !r.passed()).map(|r| r.to_string()).collect();
    if results.is_empty() {
        return outcome(false, "no properties ran");
    }
    if failed.is_empty() {
        let worst = results.iter().map(|r| r.worst).fold(0.0, f64::max);
        let trials: usize = results.iter().map(|r| r.trials).sum();
        outcome(true, format!("{} properties, {trials} checks, worst {worst:.1e}", results.len()))
    } else {
        outcome(false, failed.join("; "))
    }
}

fn loop_group_count() -> Outcome {
    let circle = ManifoldData::circle();
    for level in 1..=6u64 {
        match circle.classify(level) {
            Ok(c) if c.count == 2 * level as u128 => {}
            Ok(c) => return outcome(false, format!("level {level}: {} classes, want {}", c.count, 2 * level)),
            Err(e) => return outcome(false, format!("level {level}: {e}")),
        }
    }
    outcome(true, "2 classes at level 1, 2l at levels 1..6")
}

fn torsion_free_count() -> Outcome {
    for b in 0..=4usize {
        for k in [0u32, 1, 2] {
            let want = 1u128 << b;
            match ManifoldData::torsion_free(k, b).classify(1) {
                Ok(c) if c.count == want => {}
                Ok(c) => return outcome(false, format!("b = {b}, k = {k}: {} classes, want {want}", c.count)),
                Err(e) => return outcome(false, format!("b = {b}: {e}")),
            }
        }
    }
    outcome(true, "2^b for b = 0..4")
}

/// Every orthogonal sum of hyperbolic blocks and `Z/2` diagonal blocks with
/// `|T| <= 64`.
fn counting_forms() -> Vec<LinkingForm> {
    fn hyperbolic_sets(min: u64, budget: u64, acc: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        out.push(acc.clone());
        for n in min..=8 {
            if n * n <= budget {
                acc.push(n);
                hyperbolic_sets(n, budget / (n * n), acc, out);
                acc.pop();
            }
        }
    }
    let mut sets = Vec::new();
    hyperbolic_sets(2, 64, &mut Vec::new(), &mut sets);
    let mut forms = Vec::new();
    for hs in sets {
        let order: u64 = hs.iter().map(|n| n * n).product();
        let mut z2_count = 0;
        while order << z2_count <= 64 {
            let mut parts: Vec<LinkingForm> = hs.iter().map(|&n| LinkingForm::hyperbolic(n).expect("n >= 2")).collect();
            parts.extend((0..z2_count).map(|_| LinkingForm::z2_diagonal()));
            forms.push(if parts.is_empty() {
                LinkingForm::trivial()
            } else {
                LinkingForm::orthogonal_sum(&parts).expect("valid blocks")
            });
            z2_count += 1;
        }
    }
    forms
}

fn counting_battery() -> Outcome {
    let forms = counting_forms();
    let mut checked = 0;
    for form in &forms {
        let g = form.group().clone();
        let r = form.count_r_by_scan(1);
        let irreps = match finheis::build_irreps(form) {
            Ok(x) => x,
            Err(e) => return outcome(false, format!("{g}: {e}")),
        };
        if irreps.len() as u128 != r {
            return outcome(false, format!("{g}: {} irreps, scan gives {r}", irreps.len()));
        }
        let sum_sq: u128 = irreps.iter().map(|p| (p.dim() * p.dim()) as u128).sum();
        if sum_sq != g.order() {
            return outcome(false, format!("{g}: sum of squared dims {sum_sq}, |T| = {}", g.order()));
        }
        for (i, p) in irreps.iter().enumerate() {
            if !intertwine::is_irreducible(&p.generator_rep()).unwrap_or(false) {
                return outcome(false, format!("{g}: irrep {i} reducible"));
            }
            for q in &irreps[i + 1..] {
                if finheis::are_equivalent(p, q).unwrap_or(true) {
                    return outcome(false, format!("{g}: irrep {i} repeated"));
                }
            }
        }
        for b in 0..=3usize {
            let data = ManifoldData::torsion_free(1, b).with_linking(form.clone());
            match data.classify(1) {
                Ok(c) if c.count == (1u128 << b) * r => checked += 1,
                Ok(c) => return outcome(false, format!("{g}, b = {b}: {} classes, want {}", c.count, (1u128 << b) * r)),
                Err(e) => return outcome(false, format!("{g}, b = {b}: {e}")),
            }
        }
    }
    outcome(true, format!("{} forms, {checked} (form, b) pairs", forms.len()))
}

fn main() -> ExitCode {
    let cfg = SelftestConfig::default();
    let mut lines: Vec<(&str, Outcome)> = Vec::new();

    lines.push(("1 loop-group count", timed(Duration::from_secs(1), loop_group_count)));
    lines.push(("2 torsion-free count", timed(Duration::from_secs(1), torsion_free_count)));
    lines.push(("3 counting battery", timed(Duration::from_secs(300), counting_battery)));

    let fock = timed(Duration::from_secs(120), || {
        let r = selftest::run(Suite::Fock, &cfg);
        suite_outcome(&r.results.iter().collect::<Vec<_>>())
    });
    lines.push(("4 fock suite", fock));

    let spectral = timed(Duration::from_secs(30), || {
        let r = selftest::run(Suite::Spectral, &cfg);
        suite_outcome(&r.results.iter().collect::<Vec<_>>())
    });
    lines.push(("5 spectral identity", spectral));

    let start = Instant::now();
    let induced = selftest::run(Suite::Induced, &cfg);
    let took = start.elapsed();
    let is_round_trip = |r: &&PropertyResult| r.name == "round_trip_extraction";
    let is_setup = |r: &&PropertyResult| r.name == "setup";
    let identities: Vec<&PropertyResult> = induced.results.iter().filter(|r| !is_round_trip(r)).collect();
    let round_trip: Vec<&PropertyResult> =
        induced.results.iter().filter(|r| is_round_trip(r) || is_setup(r)).collect();
    let budget = Duration::from_secs(300);
    let within = |mut o: Outcome| {
        if took > budget {
            o.ok = false;
        }
        o.detail = format!("{} (suite {took:.2?})", o.detail);
        o
    };
    lines.push(("6 induced identities", within(suite_outcome(&identities))));
    lines.push(("7 round trip", within(suite_outcome(&round_trip))));

    let appendix = timed(Duration::from_secs(300), || {
        let r = selftest::run(Suite::Intertwine, &cfg);
        suite_outcome(&r.results.iter().collect::<Vec<_>>())
    });
    lines.push(("8 appendix suite", appendix));

    let mut all = true;
    for (name, o) in &lines {
        all &= o.ok;
        println!("{} {name}: {}", if o.ok { "PASS" } else { "FAIL" }, o.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
