//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use rand::RngExt;

use ncortho::jacobi::{self, hamburger_check, Hamburger};
use ncortho::linalg::{self, real, CMat, CVec, C, I};
use ncortho::opeval::{
    cayley, cayley_inverse, cd_inner_identity, reproducing_residual, reproduction_check_ball,
    reproduction_check_siegel, KernelOptions, SeparatingReport,
};
use ncortho::orthopoly::determinant::determinant_formula;
use ncortho::orthopoly::szego::szego_recursion;
use ncortho::recurrence::{favard, FavardOptions};
use ncortho::sample;
use ncortho::words::{self, Word};
use ncortho::{extract, orthogonalize, MomentFunctional, OperatorTuple, OrthoBasis, RecurrenceCoeffs, Region};

type Outcome = Result<String, String>;
type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn w(s: &str) -> Word {
    s.parse().unwrap()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: ncortho::Error) -> String {
    format!("error: {e}")
}

/// The representation-induced functional shared by criteria 1, 6 and 11.
struct Shared {
    f: MomentFunctional,
    basis: OrthoBasis,
    coeffs: RecurrenceCoeffs,
}

fn shared() -> ncortho::Result<Shared> {
    let f = sample::representation_functional(&mut sample::rng(2024), 2, 16, 6)?;
    let basis = orthogonalize(&f, 3)?;
    let coeffs = extract(&f, &basis, 3)?;
    Ok(Shared { f, basis, coeffs })
}

fn orthonormality(s: &Shared) -> Outcome {
    let gram = s.f.gram(3).map_err(err)?;
    let defect = s.basis.orthonormality_residual(&gram);
    check(defect < 1e-9, format!("max |AGA* − I| = {defect:.2e} (N=2, d=16, level 3)"))
}

fn route_equivalence() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for n in 1..=3 {
        let f = sample::representation_functional(&mut sample::rng(100 + n as u64), n, 16, 4).map_err(err)?;
        let basis = orthogonalize(&f, 2).map_err(err)?;
        for sigma in words::words_up_to(2, n) {
            let det = determinant_formula(&f, &sigma).map_err(err)?;
            let chol = basis.polynomial(&sigma).rows(0, det.len()).into_owned();
            worst = worst.max((&det - &chol).norm() / chol.norm());
            count += 1;
        }
    }
    check(worst < 1e-8, format!("max relative difference {worst:.2e} over {count} polynomials"))
}

fn hermite() -> Outcome {
    let moments = common::gaussian_moments(8);
    let f = common::univariate(&moments);
    let basis = orthogonalize(&f, 4).map_err(err)?;
    let coeffs = extract(&f, &basis, 4).map_err(err)?;
    let (oracle_a, oracle_b) = common::stieltjes(&moments, 4);
    let (mut a_err, mut b_err) = (0.0f64, 0.0f64);
    for n in 0..=3 {
        let a = coeffs.a(n, 1)[(0, 0)];
        let b = coeffs.b(n, 1)[(0, 0)];
        a_err = a_err.max(a.norm()).max((a - real(oracle_a[n])).norm());
        let exact = ((n + 1) as f64).sqrt();
        b_err = b_err.max((b - real(exact)).norm()).max((exact - oracle_b[n]).abs());
    }
    check(
        a_err < 1e-10 && b_err < 1e-10,
        format!("max |A_n| = {a_err:.2e}, max |B_n − √(n+1)| = {b_err:.2e}"),
    )
}

fn catalan() -> Outcome {
    let zeros = vec![real(0.0); 3];
    let ones = vec![real(1.0); 3];
    let coeffs = RecurrenceCoeffs::univariate(&zeros, &ones).map_err(err)?;
    let rebuilt = favard(&coeffs, 3, FavardOptions::default()).map_err(err)?;
    let mut moment_err = 0.0f64;
    for m in 0..=3 {
        let word = Word::from_letters(vec![1; 2 * m]).unwrap();
        let got = rebuilt.functional.moment(&word).map_err(err)?;
        moment_err = moment_err.max((got - real(common::dyck_paths(m) as f64)).norm());
        let odd = Word::from_letters(vec![1; 2 * m + 1]).unwrap();
        if m < 3 {
            moment_err = moment_err.max(rebuilt.functional.moment(&odd).map_err(err)?.norm());
        }
    }

    // extract ∘ favard on the Catalan coefficients
    let back = extract(&rebuilt.functional, &rebuilt.basis, 3).map_err(err)?;
    let mut coeff_err = coefficient_distance(&coeffs, &back);

    // favard ∘ extract on a two-variable functional
    let f = sample::representation_functional(&mut sample::rng(77), 2, 16, 4).map_err(err)?;
    let basis = orthogonalize(&f, 2).map_err(err)?;
    let c2 = extract(&f, &basis, 2).map_err(err)?;
    let g = favard(&c2, 2, FavardOptions::default()).map_err(err)?;
    let mut func_err = 0.0f64;
    for (word, value) in f.moments() {
        func_err = func_err.max((g.functional.moment(word).map_err(err)? - value).norm());
    }
    let c2_back = extract(&g.functional, &g.basis, 2).map_err(err)?;
    coeff_err = coeff_err.max(coefficient_distance(&c2, &c2_back));
    check(
        moment_err < 1e-12 && coeff_err < 1e-8 && func_err < 1e-8,
        format!("Catalan moment error {moment_err:.2e}; roundtrips: coefficients {coeff_err:.2e}, moments {func_err:.2e}"),
    )
}

fn coefficient_distance(x: &RecurrenceCoeffs, y: &RecurrenceCoeffs) -> f64 {
    let mut worst = 0.0f64;
    for n in 0..x.levels().min(y.levels()) {
        for k in 1..=x.n_generators() {
            worst = worst
                .max(linalg::max_abs(&(x.a(n, k) - y.a(n, k))))
                .max(linalg::max_abs(&(x.b(n, k) - y.b(n, k))));
        }
    }
    worst
}

fn free_fock() -> Outcome {
    let n = 2;
    let f = common::free_fock_functional(n, 6);
    let basis = orthogonalize(&f, 3).map_err(err)?;
    let coeffs = extract(&f, &basis, 3).map_err(err)?;
    let mut block_err = 0.0f64;
    for level in 0..=2 {
        for k in 1..=n as u32 {
            block_err = block_err.max(linalg::max_abs(coeffs.a(level, k as usize)));
            let mut expected = CMat::zeros(words::level_size(level + 1, n), words::level_size(level, n));
            for sigma in words::enumerate_level(level, n) {
                expected[(sigma.prepend(k).rank_in_level(n), sigma.rank_in_level(n))] = real(1.0);
            }
            block_err = block_err.max(linalg::max_abs(&(coeffs.b(level, k as usize) - expected)));
        }
    }
    // the Jacobi family is the creation-plus-annihilation family on the truncated Fock space
    let family = jacobi::build(&coeffs, 2).map_err(err)?;
    let mut jacobi_err = 0.0f64;
    for (k, member) in family.iter().enumerate() {
        let l = common::creation(k as u32 + 1, n, 2);
        jacobi_err = jacobi_err.max(linalg::max_abs(&(&member.matrix - (&l + l.adjoint()))));
    }
    let m1 = jacobi::moment(&family, &w("1.1.2.2")).map_err(err)?;
    let m2 = jacobi::moment(&family, &w("1.2.1.2")).map_err(err)?;
    let moment_err = (m1.value - real(1.0)).norm().max(m2.value.norm());
    check(
        block_err < 1e-12 && jacobi_err < 1e-12 && moment_err < 1e-12 && !m1.truncated && !m2.truncated,
        format!(
            "block error {block_err:.2e}, Jacobi vs l+l* {jacobi_err:.2e}, s_1.1.2.2 = {:.3}, s_1.2.1.2 = {:.1e}",
            m1.value.re,
            m2.value.norm()
        ),
    )
}

fn jacobi_model(s: &Shared) -> Outcome {
    let family = jacobi::build(&s.coeffs, 2).map_err(err)?;
    let mut worst = 0.0f64;
    let mut flagged = 0;
    for sigma in words::words_up_to(3, 2) {
        let m = jacobi::moment(&family, &sigma).map_err(err)?;
        if m.truncated {
            flagged += 1;
        }
        worst = worst.max((m.value - s.f.moment(&sigma).map_err(err)?).norm());
    }
    check(
        worst < 1e-10 && flagged == 0,
        format!("max |<J_σ e, e> − s_σ| = {worst:.2e} over |σ| <= 3"),
    )
}

fn signed_mixture(a: &MomentFunctional, b: &MomentFunctional, t: f64) -> MomentFunctional {
    let moments: BTreeMap<Word, C> = a
        .moments()
        .iter()
        .map(|(word, x)| (word.clone(), *x * (1.0 + t) - b.moments()[word] * t))
        .collect();
    MomentFunctional::hankel(a.n_generators(), a.max_degree(), moments).unwrap()
}

fn hamburger() -> Outcome {
    let tol = jacobi::DEFAULT_HAMBURGER_TOL;
    let bad = common::univariate(&[1.0, 0.0, -1.0]);
    let rejected = match hamburger_check(&bad, 1, tol).map_err(err)? {
        Hamburger::No { certificate, .. } => {
            certificate.dominant_word() == &w("1") && certificate.norm_squared < 0.0
        }
        Hamburger::Yes { .. } => false,
    };

    let mut rng = sample::rng(31);
    // representation functionals, including rank-deficient ones (d < Gram size)
    let mut accepted = 0;
    let mut representations = 0;
    for d in [1, 2, 3, 8, 16] {
        for n in 1..=2 {
            let f = sample::representation_functional(&mut rng, n, d, 4).map_err(err)?;
            representations += 1;
            if hamburger_check(&f, 2, tol).map_err(err)?.is_yes() {
                accepted += 1;
            }
        }
    }

    let mut agree = 0;
    for i in 0..50 {
        let n = 1 + i % 2;
        let a = sample::representation_functional(&mut rng, n, 12, 4).map_err(err)?;
        let f = if i % 3 == 0 {
            a
        } else {
            let b = sample::representation_functional(&mut rng, n, 12, 4).map_err(err)?;
            signed_mixture(&a, &b, rng.random_range(0.05..2.0))
        };
        let verdict = hamburger_check(&f, 2, tol).map_err(err)?;
        let strict = f.strict_positivity(2, tol).map_err(err)?.is_ok();
        let witnessed = matches!(verdict, Hamburger::Yes { witness: Some(_), .. });
        if verdict.is_yes() == strict && witnessed == strict {
            agree += 1;
        }
    }
    check(
        rejected && accepted == representations && agree == 50,
        format!(
            "s_2 = −1 rejected with word \"1\": {rejected}; representations accepted {accepted}/{representations}; agreement {agree}/50"
        ),
    )
}

fn cayley_criterion() -> Outcome {
    let mut rng = sample::rng(8);
    let mut worst = 0.0f64;
    let mut preserved = 0;
    for _ in 0..100 {
        let n = rng.random_range(1..=3);
        let d = rng.random_range(1..=4);
        let radius = rng.random_range(0.05..0.95);
        let z = sample::ball_point(&mut rng, n, d, radius);
        let wpt = cayley(&z).map_err(err)?;
        let back = cayley_inverse(&wpt).map_err(err)?;
        for (a, b) in z.mats().iter().zip(back.mats()) {
            worst = worst.max(linalg::max_abs(&(a - b)));
        }
        if wpt.membership(Region::Siegel, 0.0).inside && back.membership(Region::Ball, 0.0).inside {
            preserved += 1;
        }
    }
    let mut origin_exact = true;
    for n in 1..=3 {
        for d in 1..=4 {
            let zero = OperatorTuple::new(vec![CMat::zeros(d, d); n]).unwrap();
            let image = cayley(&zero).map_err(err)?;
            for (k, m) in image.mats().iter().enumerate() {
                let expected = if k + 1 == n { linalg::identity(d) * I } else { CMat::zeros(d, d) };
                origin_exact &= *m == expected;
            }
        }
    }
    check(
        worst < 1e-10 && preserved == 100 && origin_exact,
        format!("roundtrip {worst:.2e}, membership preserved {preserved}/100, C(0) exact: {origin_exact}"),
    )
}

fn szego_reproduction() -> Outcome {
    let mut rng = sample::rng(9);
    let opts = KernelOptions::default();
    let mut worst = 0.0f64;
    let mut within = 0;
    for i in 0..20 {
        let n = rng.random_range(1..=3);
        let d = rng.random_range(1..=3);
        // λ_min = 1 − r² >= 0.25
        let (r1, r2) = (rng.random_range(0.05..0.86), rng.random_range(0.05..0.86));
        let t = sample::matrix(&mut rng, d);
        let rep = if i % 2 == 0 {
            let z = sample::ball_point(&mut rng, n, d, r1);
            let zp = sample::ball_point(&mut rng, n, d, r2);
            reproduction_check_ball(&z, &zp, &t, opts).map_err(err)?
        } else {
            let wpt = sample::siegel_point(&mut rng, n, d, r1);
            let wp = sample::siegel_point(&mut rng, n, d, r2);
            reproduction_check_siegel(&wpt, &wp, &t, opts).map_err(err)?
        };
        worst = worst.max(rep.residual);
        if rep.residual <= rep.tail_bound && rep.residual < 1e-6 {
            within += 1;
        }
    }
    check(within == 20, format!("{within}/20 pairs within the tail bound; max residual {worst:.2e}"))
}

fn separating() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for s in ["1", "1.2", "2.1.1"] {
        let report = SeparatingReport::check(&w(s), 2, 1).map_err(err)?;
        ok &= report.passes(1e-14);
        lines.push(format!(
            "{s}: isolation {:.1e}, leakage {:.1e}, margin {:.6}, rank {}/{}",
            report.isolation_error, report.leakage, report.min_ball_margin, report.stacked_rank, report.dimension
        ));
    }
    check(ok, lines.join("; "))
}

fn christoffel_darboux(s: &Shared) -> Outcome {
    let mut rng = sample::rng(11);
    let gram = s.f.gram(3).map_err(err)?;
    let (mut inner_worst, mut repro_worst) = (0.0f64, 0.0f64);
    for i in 0..20 {
        let d = 1 + i % 3;
        let n = i % 3;
        let (r1, r2) = (rng.random_range(0.05..0.8), rng.random_range(0.05..0.8));
        let wpt = sample::siegel_point(&mut rng, 2, d, r1);
        let wp = sample::siegel_point(&mut rng, 2, d, r2);
        let r = cd_inner_identity(&s.basis, &s.coeffs, n, &wpt, &wp).map_err(err)?;
        inner_worst = inner_worst.max(r.absolute);
        let p = CVec::from_fn(words::count_up_to(n, 2), |_, _| sample::complex(&mut rng));
        repro_worst = repro_worst.max(reproducing_residual(&s.basis, &gram, n, &p, &wp).map_err(err)?);
    }
    check(
        inner_worst < 1e-10 && repro_worst < 1e-9,
        format!("inner identity residual {inner_worst:.2e}; reproducing residual {repro_worst:.2e}"),
    )
}

fn szego_recursion_criterion() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..5 {
        let f = sample::toeplitz_functional(&mut sample::rng(500 + seed), 2, 3, 1e-2).map_err(err)?;
        let (basis, _) = szego_recursion(&f, 3).map_err(err)?;
        let chol = orthogonalize(&f, 3).map_err(err)?;
        let diff = linalg::max_abs(&(basis.matrix() - chol.matrix())) / linalg::max_abs(chol.matrix());
        worst = worst.max(diff);
    }
    let trivial: BTreeMap<Word, C> = words::words_up_to(3, 2)
        .into_iter()
        .map(|word| {
            let v = if word.is_empty() { real(1.0) } else { real(0.0) };
            (word, v)
        })
        .collect();
    let f0 = MomentFunctional::toeplitz(2, 3, trivial).map_err(err)?;
    let (basis0, data0) = szego_recursion(&f0, 3).map_err(err)?;
    let identity = *basis0.matrix() == linalg::identity(words::count_up_to(3, 2));
    let gammas_zero = data0.gammas.values().all(|g| *g == real(0.0));
    check(
        worst < 1e-8 && identity && gammas_zero,
        format!("max relative difference to Cholesky {worst:.2e}; γ=0 gives φ_σ = Y_σ exactly: {identity}"),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let shared = shared();
    let with_shared = |run: fn(&Shared) -> Outcome| -> Criterion<'_> {
        match &shared {
            Ok(s) => Box::new(move || run(s)),
            Err(e) => {
                let msg = format!("shared functional: {e}");
                Box::new(move || Err(msg.clone()))
            }
        }
    };
    let criteria: Vec<(&str, Criterion<'_>)> = vec![
        ("orthonormality", with_shared(orthonormality)),
        ("determinant vs Cholesky", Box::new(route_equivalence)),
        ("Hermite recurrence", Box::new(hermite)),
        ("Catalan / Favard", Box::new(catalan)),
        ("free Fock space", Box::new(free_fock)),
        ("Jacobi moments", with_shared(jacobi_model)),
        ("Hamburger", Box::new(hamburger)),
        ("Cayley transform", Box::new(cayley_criterion)),
        ("Szegő reproduction", Box::new(szego_reproduction)),
        ("separating tuples", Box::new(separating)),
        ("Christoffel–Darboux", with_shared(christoffel_darboux)),
        ("Szegő recursion", Box::new(szego_recursion_criterion)),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(run))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed in {:.1}s",
        criteria.len() - failures,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
