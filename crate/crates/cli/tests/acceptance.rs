//! Acceptance criteria, one line per criterion.

use std::process::Command;
use std::time::{Duration, Instant};

use bispectral::verify::{cubic_word, default_grid, symmetry_report, Identity};
use bispectral::{
    anti_isomorphism, b0, bispectral_quadruple, classify, compose_poly, convergence_check, cross_check_derivatives,
    parse_poly, verify_bispectral, AutomorphismWord, GaussianRational, IntegralRep, PsiEvaluator, QuadratureSpec,
    UniPoly, VerificationTask, Verdict, WeylElement,
};
use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Outcome);

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    o.detail = format!("{}; {:.2?} (limit {:?})", o.detail, took, limit);
    o.pass &= took <= limit;
    o
}

fn coeff(rng: &mut ChaCha8Rng) -> GaussianRational {
    match rng.gen_range(0..7) {
        0 => GaussianRational::zero(),
        1 => GaussianRational::from_integer(1),
        2 => GaussianRational::from_integer(-1),
        3 => GaussianRational::from_integer(2),
        4 => GaussianRational::from_integer(-2),
        5 => GaussianRational::i(),
        _ => -GaussianRational::i(),
    }
}

fn random_weyl(rng: &mut ChaCha8Rng) -> WeylElement {
    let (ord, deg) = (rng.gen_range(0..=4u32), rng.gen_range(0..=4u32));
    WeylElement::from_terms((0..=deg).flat_map(|a| (0..=ord).map(move |b| (a, b))).map(|k| (k, coeff(rng))).collect::<Vec<_>>())
}

/// `c0 + c1 x + c2 D`
fn random_linear(rng: &mut ChaCha8Rng) -> WeylElement {
    WeylElement::from_terms([((0, 0), coeff(rng)), ((1, 0), coeff(rng)), ((0, 1), coeff(rng))])
}

fn random_poly(rng: &mut ChaCha8Rng, deg: usize) -> UniPoly {
    let mut c: Vec<GaussianRational> = (0..deg).map(|_| GaussianRational::from_integer(rng.gen_range(-1..=1))).collect();
    let lead = [(1, 1), (-1, 1), (1, 3), (2, 1), (-1, 2)][rng.gen_range(0..5)];
    c.push(GaussianRational::from_ratio(lead.0, lead.1));
    UniPoly::from_coeffs(c)
}

/// Independent action of `x^a D^b` on dense polynomials.
fn act(p: &WeylElement, f: &[GaussianRational]) -> Vec<GaussianRational> {
    let mut out = vec![GaussianRational::zero(); f.len() + 8];
    for (&(a, b), c) in p.terms() {
        for (k, v) in f.iter().enumerate().skip(b as usize) {
            let falling: i64 = ((k - b as usize + 1)..=k).map(|i| i as i64).product();
            let idx = k - b as usize + a as usize;
            out[idx] = &out[idx] + &(&(c * v) * &GaussianRational::from_integer(falling));
        }
    }
    while out.last().is_some_and(|v| v.is_zero()) {
        out.pop();
    }
    out
}

fn criterion_1() -> Outcome {
    timed(Duration::from_secs(10), || {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut bad = 0;
        for _ in 0..200 {
            let (a, b, c) = (random_weyl(&mut rng), random_weyl(&mut rng), random_weyl(&mut rng));
            if a.multiply(&b).multiply(&c) != a.multiply(&b.multiply(&c)) {
                bad += 1;
            }
            let leibniz = &a.commutator(&b).multiply(&c) + &b.multiply(&a.commutator(&c));
            if a.commutator(&b.multiply(&c)) != leibniz {
                bad += 1;
            }
            for k in 0..6u32 {
                let mut mono = vec![GaussianRational::zero(); k as usize + 1];
                mono[k as usize] = GaussianRational::one();
                if a.apply_to_monomial(k).coeffs() != act(&a, &mono).as_slice() {
                    bad += 1;
                }
            }
        }
        outcome(bad == 0, format!("200 triples, {bad} failures"))
    })
}

/// Largest allowed product of `deg - 1` over a word; the operator degrees
/// grow like this product.
const DEGREE_BUDGET: usize = 36;

fn random_word(rng: &mut ChaCha8Rng) -> AutomorphismWord {
    loop {
        let m = rng.gen_range(1..=3);
        let degrees: Vec<usize> = (0..2 * m).map(|_| rng.gen_range(2..=5)).collect();
        if degrees.windows(2).any(|w| w == [2, 2]) || degrees.iter().map(|d| d - 1).product::<usize>() > DEGREE_BUDGET {
            continue;
        }
        let polys: Vec<UniPoly> = degrees.iter().map(|&d| random_poly(rng, d)).collect();
        let w = AutomorphismWord::from_pairs(polys.chunks(2).map(|c| (c[0].clone(), c[1].clone())));
        if convergence_check(&w).is_ok() {
            return w;
        }
    }
}

fn criterion_2() -> Outcome {
    timed(Duration::from_secs(60), || {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (x, d) = (WeylElement::x(), WeylElement::d());
        let mut bad = Vec::new();
        let mut max_m = 0;
        for n in 0..50 {
            let w = random_word(&mut rng);
            max_m = max_m.max(w.m());
            let (sx, sd) = (w.apply(&x), w.apply(&d));
            let inv = w.inverse();
            let (a, b) = (random_weyl(&mut rng), random_weyl(&mut rng));
            let (la, lb) = (random_linear(&mut rng), random_linear(&mut rng));
            let checks = [
                sd.commutator(&sx) == WeylElement::one(),
                inv.apply(&sx) == x && inv.apply(&sd) == d,
                b0(&a.multiply(&b)) == b0(&b).multiply(&b0(&a)),
                anti_isomorphism(&w, &la.multiply(&lb))
                    == anti_isomorphism(&w, &lb).multiply(&anti_isomorphism(&w, &la)),
            ];
            // Delta_j = Delta_{j-1} - p_j'(Lambda_{j-1}), Lambda_j = q_j'(Delta_j) + Lambda_{j-1}
            let mut recursion = true;
            let (mut lam, mut del) = (WeylElement::d(), WeylElement::x());
            for (j, (p, q)) in w.pairs().iter().enumerate() {
                del = &del - &compose_poly(&p.derivative(), &lam);
                lam = &compose_poly(&q.derivative(), &del) + &lam;
                let quad = bispectral_quadruple(&w.prefix(j + 1));
                recursion &= quad.delta == del && quad.lambda == lam;
            }
            if checks.iter().any(|c| !c) || !recursion {
                bad.push(n);
            }
        }
        outcome(bad.is_empty(), format!("50 words (m <= {max_m}), failures at {bad:?}"))
    })
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut cases = 0;
    let mut bad = 0;
    for dp in 1..=6 {
        for dq in 1..=6 {
            for _ in 0..2 {
                let (p, q) = (random_poly(&mut rng, dp), random_poly(&mut rng, dq));
                let (dp_, dq_) = (p.derivative(), q.derivative());
                let quad = bispectral_quadruple(&AutomorphismWord::from_pairs([(p, q)]));
                let (x, d) = (WeylElement::x(), WeylElement::d());
                let l = &d + &compose_poly(&dp_, &(&x - &WeylElement::from_poly_in_d(&dq_)));
                let dd = &x - &WeylElement::from_poly_in_d(&dq_);
                // in (z, Dz) stored as (x, D): Delta = z - p'(Dz), Lambda = Dz + q'(Delta)
                let delta = &x - &WeylElement::from_poly_in_d(&dp_);
                let lambda = &d + &compose_poly(&dq_, &delta);
                cases += 1;
                if quad.l != l || quad.d != dd || quad.delta != delta || quad.lambda != lambda {
                    bad += 1;
                }
            }
        }
    }
    outcome(bad == 0, format!("{cases} single-pair words with degrees 1..6, {bad} mismatches"))
}

fn criterion_4() -> Outcome {
    timed(Duration::from_secs(60), || {
        let report = verify_bispectral(&VerificationTask::new(cubic_word())).expect("verification runs");
        let worst = [Identity::L, Identity::Lambda, Identity::D, Identity::Delta]
            .map(|id| report.max_residual_for(id))
            .into_iter()
            .fold(0.0, f64::max);
        let ok = worst <= 1e-6 && report.inconclusive.is_empty() && report.residuals.len() == 100;
        outcome(ok, format!("max residual {worst:.2e} <= 1e-6 over 25 points"))
    })
}

fn criterion_5() -> Outcome {
    let rep = IntegralRep::new(&cubic_word(), None).expect("admissible");
    let eval = PsiEvaluator::new(&rep, &QuadratureSpec::default()).expect("valid spec");
    let mut worst: f64 = 0.0;
    for (x, z) in default_grid() {
        let r = eval.ibp_residuals(x, z).expect("evaluates");
        worst = worst.max(r.du).max(r.dv);
    }
    outcome(worst <= 1e-5, format!("max residual {worst:.2e} <= 1e-5"))
}

fn criterion_6() -> Outcome {
    let r = symmetry_report(&QuadratureSpec::default(), &default_grid()).expect("evaluates");
    let sym = ["psi11", "psi22", "psi12+psi21"].map(|n| r.defect(n).unwrap_or(f64::INFINITY));
    let ok = sym.iter().all(|&d| d <= 1e-8)
        && r.witness > 1e-3
        && r.transpose_defect <= 1e-8
        && r.rank == 3
        && r.gap >= 1e3;
    outcome(
        ok,
        format!(
            "defects {:.1e}/{:.1e}/{:.1e} <= 1e-8, witness {:.2e} > 1e-3, transpose {:.1e} <= 1e-8, rank {} gap {:.1e} >= 1e3",
            sym[0], sym[1], sym[2], r.witness, r.transpose_defect, r.rank, r.gap
        ),
    )
}

fn criterion_7() -> Outcome {
    let rep = IntegralRep::new(&cubic_word(), None).expect("admissible");
    let chk = cross_check_derivatives(&rep, &default_grid(), &QuadratureSpec::default()).expect("evaluates");
    outcome(chk.max() <= 1e-5, format!("max deviation {:.2e} <= 1e-5", chk.max()))
}

fn criterion_8() -> Outcome {
    let w = AutomorphismWord::from_pairs([(parse_poly("t^2").unwrap(), parse_poly("t^4").unwrap())]);
    let verdict = classify(&w).verdict;
    let mut task = VerificationTask::new(w);
    task.tolerance = Some(1e-6);
    let report = verify_bispectral(&task).expect("verification runs");
    outcome(
        report.pass && verdict == Verdict::AiryReducible,
        format!("max residual {:.2e} <= 1e-6, verdict {verdict}", report.max_residual()),
    )
}

fn criterion_9() -> Outcome {
    timed(Duration::from_secs(600), || {
        let polys = ["t^3/3", "t^3/3 - t", "t^3/3 + t^2", "t^3"].map(|s| parse_poly(s).unwrap());
        let w = AutomorphismWord::from_pairs([(polys[0].clone(), polys[1].clone()), (polys[2].clone(), polys[3].clone())]);
        let pts = [-0.5, 0.0, 0.5];
        let mut task = VerificationTask::new(w);
        task.grid = pts
            .iter()
            .flat_map(|&x| pts.iter().map(move |&z| (Complex64::new(x, 0.0), Complex64::new(z, 0.0))))
            .collect();
        task.probes = vec![WeylElement::x()];
        task.tolerance = Some(1e-4);
        let report = verify_bispectral(&task).expect("verification runs");
        outcome(report.pass, format!("m = 2, 3x3 grid, max residual {:.2e} <= 1e-4", report.max_residual()))
    })
}

fn criterion_10() -> Outcome {
    let two = parse_poly("t^2 + t").unwrap();
    let all_two = AutomorphismWord::from_pairs([(two.clone(), parse_poly("-t^2/2").unwrap()), (parse_poly("2t^2").unwrap(), two)]);
    let c = classify(&all_two);
    let det = c.determinant();
    let rank1 = c.verdict == Verdict::Rank1OrTrivial && det.as_ref().is_some_and(|d| !d.is_zero());

    let job = r#"{"word": [
        {"kind": "p", "poly": "t^3"}, {"kind": "q", "poly": "t^2"},
        {"kind": "p", "poly": "t^2 - t"}, {"kind": "q", "poly": "t^3/3"}]}"#;
    let dir = tempfile::tempdir().expect("temp dir");
    let path = dir.path().join("job.json");
    std::fs::write(&path, job).expect("write job");
    let w = bispectral_cli::job::JobSpec::from_json(job).unwrap().word().unwrap();
    let violation = convergence_check(&w).err();
    let status = Command::new(env!("CARGO_BIN_EXE_bispectral"))
        .args(["verify", "--job"])
        .arg(&path)
        .output()
        .expect("runs the binary");
    let ok = rank1
        && violation.as_ref().is_some_and(|v| v.positions == ["q1", "p2"])
        && status.status.code() == Some(2);
    outcome(
        ok,
        format!(
            "all-quadratic verdict {} det {}, (3,2,2,3) violation at {:?}, exit code {:?}",
            c.verdict,
            det.map(|d| d.to_string()).unwrap_or_default(),
            violation.map(|v| v.positions).unwrap_or_default(),
            status.status.code()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("exact algebra suite", criterion_1),
        ("automorphism suite", criterion_2),
        ("single-pair closed form", criterion_3),
        ("cubic numerical certification", criterion_4),
        ("integration-by-parts residuals", criterion_5),
        ("symmetry of psi_kl", criterion_6),
        ("derivative cross-check", criterion_7),
        ("mixed-degree single pair", criterion_8),
        ("two-pair smoke test", criterion_9),
        ("rejection paths", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        println!("[{}] {:>2}. {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
