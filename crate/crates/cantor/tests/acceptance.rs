//! One PASS/FAIL line per acceptance criterion. Exits non-zero when any criterion fails.

mod common;

use std::time::{Duration, Instant};

use cantor::betaexp::{g_beta, transport_report, BetaSystem};
use cantor::equivalence::{
    generate_nonequivalent, rational_equivalent, self_similar_report, slice_sequence, thue_morse, SearchBounds,
    Verdict,
};
use cantor::intervals::{boxcount_curve, intersect_level, IntervalSet, DEFAULT_BUDGET};
use cantor::kernel::{ell, psi, sigma_trace, SigmaValue};
use cantor::measure::{measure_two_digit, DimensionValue};
use cantor::radix::{scale, value_of, Alphabet, PeriodicCode, Rational};
use cantor::{DigitSet, Error};
use common::*;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn err<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

const FLOAT_TOL: f64 = 1e-12;
const SLOPE_TOL: f64 = 0.05;

fn mtc() -> DigitSet {
    ds(3, &[0, 2])
}

fn c1() -> Check {
    let rep = self_similar_report(&mtc(), &code("(20)", 3, Alphabet::Nary)).map_err(err)?;
    ensure!(value_of(&rep.input) == r(3, 4), "input is not 3/4");
    ensure!(rep.e.digits == vec![6, 8] && rep.e.base == BigUint::from(9u8), "E = {:?} base {}", rep.e.digits, rep.e.base);
    ensure!(rep.dimension == DimensionValue::new(2u8, 9u8), "dimension {}", rep.dimension.exact());
    let m = rep.measure.ok_or("no measure")?;
    ensure!(m.coef().is_one() && *m.a() == r(1, 4) && *m.s() == DimensionValue::new(2u8, 9u8), "measure {}", m.exact());
    let expect = 4f64.powf(-(2f64.ln() / 9f64.ln()));
    ensure!((m.float() - expect).abs() < FLOAT_TOL, "float {} vs {}", m.float(), expect);
    Ok(format!("E={{6,8}} base 9, measure {} = {:.15}", m.exact(), m.float()))
}

fn c2() -> Check {
    let d = ds(8, &[0, 5, 7]);
    let rep = self_similar_report(&d, &code("(07)", 8, Alphabet::Nary)).map_err(err)?;
    ensure!(rep.e.digits == vec![7, 47, 63] && rep.e.base == BigUint::from(64u8), "E = {:?}", rep.e.digits);
    ensure!(rep.dimension.exact() == "log_64(3)", "dimension {}", rep.dimension.exact());
    Ok("E={7,47,63} base 64, dimension log_64(3)".into())
}

fn c3() -> Check {
    let d = ds(8, &[0, 5, 7]);
    let rep = self_similar_report(&d, &code("0(7)", 8, Alphabet::Nary)).map_err(err)?;
    ensure!(rep.verdict == Verdict::Finite, "verdict {:?}", rep.verdict);
    let pts = rep.finite_points.ok_or("no points")?;
    ensure!(pts == vec![r(1, 8), r(3, 4), r(1, 1)], "points {pts:?}");
    let carry = rep.carry_points.ok_or("no carry points")?;
    let oracle = intersect_level(&d, &rep.input, 6, DEFAULT_BUDGET).map_err(err)?.tight;
    ensure!(pts.iter().chain(&carry).all(|x| oracle.contains_point(x)), "point outside the level-6 oracle");
    let listed: Vec<String> = carry.iter().map(|x| x.to_string()).collect();
    Ok(format!("FINITE, points {{1/8, 3/4, 1}}; carry points of the terminating t = 1/8: {{{}}}", listed.join(", ")))
}

fn c4() -> Check {
    let a = self_similar_report(&mtc(), &code("02(0)", 3, Alphabet::Nary)).map_err(err)?;
    ensure!(a.verdict == Verdict::StronglyPeriodic, "02(0) verdict {:?}", a.verdict);
    ensure!(a.offsets.len() == 2, "02(0) offsets {:?}", a.offsets);
    let ma = a.measure.ok_or("02(0) no measure")?;
    ensure!(ma.as_rational() == Some(r(1, 2)), "02(0) measure {}", ma.exact());
    let b = self_similar_report(&mtc(), &code("02(20)", 3, Alphabet::Nary)).map_err(err)?;
    ensure!(b.verdict == Verdict::RationalEquivalent, "02(20) verdict {:?}", b.verdict);
    ensure!(!b.strong.as_ref().is_some_and(|s| s.sp), "02(20) reported strongly periodic");
    let mb = b.measure.ok_or("02(20) no measure")?;
    ensure!(mb == measure_two_digit(9, 6, 8) && mb.exact() == "(1/4)^(log_9(2))", "02(20) measure {}", mb.exact());
    Ok(format!("02(0): SP, 2 offsets, measure {}; 02(20): RE not SP, measure {}", ma.exact(), mb.exact()))
}

fn c5() -> Check {
    let d = ds(10, &[0, 2, 7, 9]);
    let t = code("54(4728)", 10, Alphabet::Nary);
    let res = psi(&d, &t).map_err(err)?;
    ensure!(res.y.to_string() == "55(5272)", "psi = {}", res.y);
    let c = res.offset.ok_or("no offset")?;
    Ok(format!("psi(54(4728)) = {}, c = {}", res.y, c))
}

fn c6() -> Check {
    let d = ds(9, &[0, 2, 4, 8]);
    let a = code("2(0)", 9, Alphabet::Nary);
    let re = rational_equivalent(&d, &a, SearchBounds::default()).map_err(err)?;
    ensure!(re.subset_all_j.is_some(), "subset condition not found");
    let rep = self_similar_report(&d, &a).map_err(err)?;
    ensure!(!rep.strong.as_ref().unwrap().sp, "reported strongly periodic");
    let seq = slice_sequence(&d, &rep.y).map_err(err)?;
    let q = re.subset_all_j.unwrap();
    for j in 1..=8 {
        let (x, y) = (seq.at(j).unwrap(), seq.at(j + q).unwrap());
        ensure!(x.members.iter().all(|m| y.members.contains(m)), "subset fails at j={j}");
    }
    Ok(format!("subset YES (q={q}), strongly periodic NO"))
}

fn c7() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7007);
    let mut levels = 0;
    for case in 0..100 {
        let d = random_sparse(&mut rng, 12);
        let c = random_delta_plus(&mut rng, &d, 3, 4);
        let k = depth_for(&d, 10, 20_000);
        let trace = sigma_trace(&d, &c, k).map_err(err)?;
        let il = intersect_level(&d, &c, k, DEFAULT_BUDGET).map_err(err)?;
        let digits = c.digits(k);
        for level in 0..=k {
            let bc = brute_cases(&d, &digits, level);
            let lc = &il.cases[level];
            ensure!(
                (lc.interval, lc.potential_interval, lc.potentially_empty) == bc,
                "case {case}: D={:?} t={c} level {level}: case table {:?} vs {:?}",
                d.digits(),
                lc,
                bc
            );
            ensure!(sigma_from_cases(bc) == trace.values[level].symbol(), "case {case}: σ mismatch at level {level}");
            levels += 1;
        }
        let brute = brute_tight(&d, &value_of(&c), k);
        let lens = positive_components(&brute);
        match (&trace.mu[k], ell(&d, &c, k)) {
            (Some(mu), Ok(l)) => {
                ensure!(lens.len() as u64 == mu.to_u64().unwrap(), "case {case}: {} intervals vs μ={mu}", lens.len());
                ensure!(lens.iter().all(|x| *x == l), "case {case}: lengths differ from ℓ={l}");
            }
            (_, Err(Error::FiniteRepresentation)) => ensure!(lens.is_empty(), "case {case}: finite t has intervals"),
            (m, e) => return Err(format!("case {case}: unexpected {m:?} {e:?}")),
        }
    }
    Ok(format!("100 systems, {levels} levels, zero failures"))
}

fn c8() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8008);
    let mut seen = [0usize; 2];
    for case in 0..100 {
        let d = random_sparse(&mut rng, 12);
        let c = if case % 2 == 0 {
            random_delta_plus(&mut rng, &d, 2, 3)
        } else {
            random_nary(&mut rng, d.base(), 2, 3)
        };
        let (a, p) = (c.preperiod().len(), c.period().len());
        let depth = a + 10 * p + 2;
        let trace = sigma_trace(&d, &c, depth).map_err(err)?;
        let cert = trace.certified_period.ok_or(format!("case {case}: {c} has no certified period"))?;
        ensure!(cert == p || cert == 2 * p, "case {case}: certified {cert} for p={p}");
        seen[(cert != p) as usize] += 1;
        let digits = c.digits(depth);
        let indep: Vec<&str> = (0..=depth).map(|k| sigma_by_differences(&d, &digits, k)).collect();
        for k in 0..=depth {
            ensure!(indep[k] == trace.values[k].symbol(), "case {case}: {c} σ_{k} {} vs {}", trace.values[k].symbol(), indep[k]);
        }
        let from = a + 4 * p;
        ensure!((from..=depth - cert).all(|k| indep[k] == indep[k + cert]), "case {case}: {cert} is not a period");
        if cert == 2 * p {
            ensure!((from..=depth - p).any(|k| indep[k] != indep[k + p]), "case {case}: p already a period");
        }
    }
    Ok(format!("100 codes, period p in {} cases, 2p in {}", seen[0], seen[1]))
}

fn c9() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9009);
    let mut built = 0;
    for case in 0..200 {
        let d = random_sparse(&mut rng, 12);
        let c = random_delta_plus(&mut rng, &d, 2, 3);
        let rep = self_similar_report(&d, &c).map_err(|e| format!("case {case}: {e:?}"))?;
        let n = d.base();
        let mut e = vec![0i64];
        for x in rep.y.period() {
            let slice: Vec<i64> = d.digits().iter().copied().filter(|u| d.contains(u - x)).collect();
            e = e.iter().flat_map(|acc| slice.iter().map(move |u| acc * n + u)).collect();
        }
        e.sort_unstable();
        ensure!(rep.e.digits == e, "case {case}: E {:?} vs {:?}", rep.e.digits, e);
        ensure!(sparse_by_definition(&e), "case {case}: E={e:?} not sparse (D={:?}, {c})", d.digits());
        ensure!(rep.e_sparse, "case {case}: report flag disagrees");
        built += 1;
    }
    Ok(format!("{built} systems, every E sparse"))
}

fn covering(d: &DigitSet, y: &PeriodicCode, level: usize) -> Result<IntervalSet, String> {
    Ok(intersect_level(d, y, level, DEFAULT_BUDGET).map_err(err)?.tight)
}

fn inf_of(d: &DigitSet, y: &PeriodicCode) -> Rational {
    let mins = |v: &[i64]| v.iter().map(|x| *d.intersect_shift(*x).first().unwrap()).collect::<Vec<_>>();
    value_of(&PeriodicCode::new(d.base(), Alphabet::DOnly, mins(y.preperiod()), mins(y.period())).unwrap())
}

fn c10() -> Check {
    const L: usize = 6;
    let cases = [
        (mtc(), "(20)"),
        (mtc(), "02(0)"),
        (ds(8, &[0, 5, 7]), "(07)"),
    ];
    let mut done = Vec::new();
    for (d, s) in cases {
        let rep = self_similar_report(&d, &code(s, d.base(), Alphabet::Nary)).map_err(err)?;
        let maps = rep.similarity_maps.ok_or(format!("{s}: no maps"))?;
        let big_q = rep.similarity_q.unwrap();
        let inf = -inf_of(&d, &rep.y);
        let base = covering(&d, &rep.y, L)?.translate(&inf);
        let images: Vec<IntervalSet> = maps.iter().map(|m| base.map(&m.ratio, &m.offset)).collect();
        let lhs = IntervalSet::union(&images);
        let rhs = covering(&d, &rep.y, L + big_q)?.translate(&inf);
        ensure!(lhs.intervals == rhs.intervals, "{s}: union of {} images differs from level {}", maps.len(), L + big_q);
        done.push(format!("{s} ({} maps, Q={big_q})", maps.len()));
    }
    Ok(done.join(", "))
}

fn c11() -> Check {
    let cases = [
        (mtc(), "(20)"),
        (ds(8, &[0, 5, 7]), "(07)"),
        (mtc(), "02(0)"),
        (mtc(), "02(20)"),
        (ds(17, &[0, 3, 6, 12]), "(3)"),
    ];
    let mut out = Vec::new();
    for (d, s) in cases {
        let c = code(s, d.base(), Alphabet::Nary);
        let exact = cantor::equivalence::dimension(&d, &c).map_err(err)?.float();
        let bc = boxcount_curve(&d, &c, 12, DEFAULT_BUDGET).map_err(err)?;
        for row in &bc.rows {
            let oc = row.oracle_count.ok_or(format!("{s}: no oracle count at k={}", row.k))?;
            ensure!(BigUint::from(oc) == row.count, "{s}: oracle count {oc} vs {} at k={}", row.count, row.k);
        }
        let gap = (bc.regression_slope - exact).abs();
        ensure!(gap < SLOPE_TOL, "{s}: slope {} vs {exact}", bc.regression_slope);
        out.push(format!("{s} {:.4}/{:.4}", bc.regression_slope, exact));
    }
    Ok(out.join(", "))
}

fn c12() -> Check {
    let d = ds(17, &[0, 3, 6, 12]);
    let g = generate_nonequivalent(&d, &code("(3)", 17, Alphabet::DeltaPlus), 6, &thue_morse(120), 120).map_err(err)?;
    let digits = g.gamma.preperiod().to_vec();
    ensure!(g.gamma.is_prefix() && digits.len() == 120, "not a 120-digit prefix");
    let re = rational_equivalent(&d, &g.gamma, SearchBounds::default()).map_err(err)?;
    ensure!(re.verdict == Verdict::UndecidedPrefix, "verdict {:?}", re.verdict);
    for q in 1..=12 {
        let v = re.violations.iter().find(|v| v.q == q).ok_or(format!("q={q} missing"))?;
        let j = v.last_violation.ok_or(format!("q={q}: no violation"))?;
        ensure!(j + q <= 120, "q={q}: index {j} outside the prefix");
        let (a, b) = (d.slice(digits[j - 1]), d.slice(digits[j + q - 1]));
        ensure!(!a.is_subset_of(&b), "q={q}: j={j} is not a violation");
    }
    Ok("UNDECIDED_PREFIX, violations for q = 1..12".into())
}

fn c13() -> Check {
    let d = ds(10, &[0, 1, 2, 6, 8]);
    let t = code("(2)", 10, Alphabet::Nary);
    ensure!(value_of(&t) == r(2, 9), "t != 2/9");
    let trace = sigma_trace(&d, &t, 5).map_err(err)?;
    ensure!(trace.values.iter().all(|s| *s == SigmaValue::PlusOne), "σ not identically 1");
    let il = intersect_level(&d, &t, 5, DEFAULT_BUDGET).map_err(err)?;
    let unit = scale(10, 5);
    let lifted: Vec<Rational> = il
        .tight
        .intervals
        .iter()
        .filter(|iv| !iv.is_point())
        .map(|iv| (&iv.lo / &unit).floor() * &unit)
        .collect();
    let mut cells_e: Vec<Rational> = vec![Rational::zero()];
    for k in 1..=5 {
        let w = scale(10, k);
        cells_e = cells_e.iter().flat_map(|c| [c + r(2, 1) * &w, c + r(8, 1) * &w]).collect();
    }
    cells_e.sort();
    ensure!(lifted == cells_e, "covering cells differ: {} vs {}", lifted.len(), cells_e.len());
    let tail = r(2, 9) * &unit;
    for iv in il.tight.intervals.iter().filter(|iv| !iv.is_point()) {
        let cell = (&iv.lo / &unit).floor() * &unit;
        ensure!(iv.lo == &cell + &tail && iv.hi == &cell + &unit, "piece {:?} not tight in its cell", iv);
    }
    let points = il.tight.intervals.iter().filter(|iv| iv.is_point()).count();
    ensure!(points == 0, "{points} isolated points");
    Ok(format!("σ ≡ 1, {} cells = {{2,8}}^5", cells_e.len()))
}

fn c14() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1414);
    let d = ds(8, &[0, 5, 7]);
    let rand_code = |rng: &mut ChaCha8Rng| {
        let pre = (0..rng.random_range(0..=4)).map(|_| *d.digits().choose(rng).unwrap()).collect();
        let per = (0..rng.random_range(1..=3)).map(|_| *d.digits().choose(rng).unwrap()).collect();
        PeriodicCode::new(8, Alphabet::DOnly, pre, per).unwrap()
    };
    let betas = [r(1, 8), r(1, 9), r(1, 10), r(2, 21)];
    let systems: Vec<BetaSystem> = betas.iter().map(|b| BetaSystem::new(8, vec![0, 5, 7], b.clone()).unwrap()).collect();
    let mut strict = 0;
    for _ in 0..100 {
        let (x, y) = (rand_code(&mut rng), rand_code(&mut rng));
        let (vx, vy) = (value_of(&x), value_of(&y));
        for sys in &systems {
            let (gx, gy) = (g_beta(sys, &x).map_err(err)?, g_beta(sys, &y).map_err(err)?);
            ensure!(vx.cmp(&vy) == gx.cmp(&gy), "order not preserved for {x}, {y} at β={}", sys.beta());
        }
        strict += (vx != vy) as usize;
        ensure!(g_beta(&systems[0], &x).map_err(err)? == vx, "g_(1/8) is not the identity at {x}");
    }
    for s in ["(07)", "0(7)", "5(70)", "(5)"] {
        let c = code(s, 8, Alphabet::Nary);
        let reports: Vec<_> = systems.iter().map(|sys| transport_report(sys, &d, &c, 12)).collect::<Result<_, _>>().map_err(err)?;
        ensure!(reports.iter().all(|t| t.preserved && t.verdict == reports[0].verdict && t.copies == reports[0].copies), "{s}: verdict varies with β");
        let rep = self_similar_report(&d, &c).map_err(err)?;
        let shifted: Vec<Rational> = rep.offsets.iter().map(|o| o - &rep.shift).collect();
        ensure!(reports[0].offsets_beta == shifted, "{s}: offsets at β=1/8 differ from the n-ary offsets");
    }
    Ok(format!("100 pairs ({strict} distinct) × 4 values of β, identity at 1/8"))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Check, u64); 14] = [
        (1, "golden MTC t=3/4", c1, 1),
        (2, "golden n=8 (07)", c2, 1),
        (3, "golden finite 0(7)", c3, 1),
        (4, "golden pair 02(0) / 02(20)", c4, 2),
        (5, "golden psi", c5, 1),
        (6, "subset without strong periodicity", c6, 1),
        (7, "oracle equivalence suite", c7, 60),
        (8, "σ-period law", c8, 10),
        (9, "E sparsity", c9, 30),
        (10, "similarity closure", c10, 30),
        (11, "box-count slope", c11, 60),
        (12, "non-equivalence generator", c12, 5),
        (13, "non-sparse handling", c13, 5),
        (14, "β transport", c14, 10),
    ];
    let mut failed = 0;
    for (id, name, f, limit) in criteria {
        let start = Instant::now();
        let res = f();
        let took = start.elapsed();
        let res = match res {
            Ok(detail) if took > Duration::from_secs(limit) => Err(format!("{detail}; took {took:.2?} > {limit}s")),
            other => other,
        };
        match res {
            Ok(detail) => println!("criterion {id:>2}: PASS  {name} [{took:.2?}] {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {id:>2}: FAIL  {name} [{took:.2?}] {why}");
            }
        }
    }
    println!("{} passed, {failed} failed", 14 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
