//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Criteria are checked literally at their stated tolerances. Three of them
//! contain a claim that is false in general (see `deviation` below); those
//! print FAIL, and the run only errors if the failure is not exactly the
//! analysed one or if any other criterion fails.

use std::process::ExitCode;

use fmlab::cli::{run_suite, Dims, ExperimentConfig, SuiteKind, SuiteReport, Value};
use fmlab::generators::{
    finite_gabor, harmonic_tight, onb, random_frame, random_symbol, rng_from_seed, sub_seed,
};
use fmlab::numeric::{herm_eig_extremes, op_norm, Vector, C64};
use fmlab::{io, Frame, Multiplier, Tol};
use nalgebra::SymmetricEigen;
use rand::Rng;

const REL: f64 = 1e-8;
const SEED: u64 = 20_261_016;

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
    /// `Some(true)` when a failure matches the documented counterexample exactly.
    deviation: Option<bool>,
}

impl Verdict {
    fn plain(pass: bool, detail: String) -> Self {
        Verdict {
            pass,
            detail,
            deviation: None,
        }
    }
}

/// `d ∈ {2,…,8}`, `N ∈ {d, d+1, 2d, 2d+2}`.
fn dims_all() -> Vec<Dims> {
    (2..=8)
        .flat_map(|d| [d, d + 1, 2 * d, 2 * d + 2].map(|n| Dims { d, n }))
        .collect()
}

fn dims_redundant() -> Vec<Dims> {
    dims_all().into_iter().filter(|x| x.n > x.d).collect()
}

fn dims_square() -> Vec<Dims> {
    (2..=8).map(|d| Dims { d, n: d }).collect()
}

fn suite(kind: SuiteKind, trials: usize, dims: Vec<Dims>) -> SuiteReport {
    let cfg = ExperimentConfig {
        suite: kind,
        dims,
        trials,
        seed: SEED,
        ..Default::default()
    };
    run_suite(&cfg).expect("valid configuration")
}

fn nums(r: &SuiteReport, name: &str) -> Vec<f64> {
    r.column(name)
        .unwrap_or_else(|| panic!("no column {name}"))
        .into_iter()
        .map(|v| match v {
            Value::Num(x) => x,
            _ => f64::NAN,
        })
        .collect()
}

fn flags(r: &SuiteReport, name: &str) -> Vec<bool> {
    r.column(name)
        .unwrap_or_else(|| panic!("no column {name}"))
        .into_iter()
        .map(|v| matches!(v, Value::Flag(true)))
        .collect()
}

fn errors(r: &SuiteReport) -> usize {
    r.records.iter().filter(|x| x.error.is_some()).count()
}

fn first_error(r: &SuiteReport) -> String {
    r.records
        .iter()
        .find_map(|x| x.error.clone())
        .map_or(String::new(), |e| format!(" first error: {e}"))
}

fn count(v: impl IntoIterator<Item = bool>) -> usize {
    v.into_iter().filter(|&b| b).count()
}

fn criterion_1() -> Verdict {
    let tol = Tol::default();
    let mut worst: f64 = 0.0;
    let mut ok = 0;
    for t in 0..200u64 {
        let dims = dims_all()[t as usize % dims_all().len()];
        let s = sub_seed(SEED, 101, t);
        let phi = random_frame(dims.d, dims.n, s, 100.0).unwrap();
        let psi = random_frame(dims.d, dims.n, s ^ 1, 100.0).unwrap();
        let m = random_symbol(dims.n, 0.1, 3.0, s ^ 2).unwrap();
        let mult = Multiplier::build(&m, &phi, &psi, &tol).unwrap();
        let scale = 1f64.max(op_norm(mult.matrix()));
        let res =
            op_norm(&(mult.matrix().adjoint() - mult.adjoint(&tol).unwrap().matrix())) / scale;
        worst = worst.max(res);
        ok += usize::from(res <= REL);
    }
    Verdict::plain(
        ok == 200,
        format!("{ok}/200 within 1e-8·scale, worst {worst:.2e}"),
    )
}

fn perturbation_suite(kind: SuiteKind) -> Verdict {
    let r = suite(kind, 100, dims_all());
    let (mu, coef, dev) = (
        nums(&r, "mu"),
        nums(&r, "coefficient"),
        nums(&r, "companion_deviation"),
    );
    let (res, scale) = (nums(&r, "multiplier_residual"), nums(&r, "scale"));
    let ok =
        count((0..r.trials()).map(|i| res[i] <= REL * scale[i] && dev[i] <= coef[i] * mu[i] + REL));
    let worst_ratio = (0..r.trials())
        .map(|i| dev[i] / (coef[i] * mu[i]))
        .fold(0.0, f64::max);
    Verdict::plain(
        ok == 100 && errors(&r) == 0,
        format!(
            "{ok}/100 trials, max residual/scale {:.2e}, max deviation/(λμ) {worst_ratio:.3}{}",
            (0..r.trials())
                .map(|i| res[i] / scale[i])
                .fold(0.0, f64::max),
            first_error(&r)
        ),
    )
}

fn criterion_4() -> Verdict {
    let r = suite(SuiteKind::Per2, 100, dims_redundant());
    let with_zero = count(
        r.column("zero_index")
            .unwrap()
            .iter()
            .map(|v| matches!(v, Value::Num(_))),
    );
    let (res, scale, ratio) = (
        nums(&r, "multiplier_residual"),
        nums(&r, "scale"),
        nums(&r, "stated_ratio"),
    );
    let ok = count((0..r.trials()).map(|i| res[i] <= REL * scale[i] && ratio[i] >= 1.0 - REL));
    let min_ratio = ratio.iter().copied().fold(f64::INFINITY, f64::min);
    Verdict::plain(
        ok == 100 && with_zero == 100 && errors(&r) == 0,
        format!(
            "{ok}/100 trials ({with_zero} with a zero symbol entry), min λ_min(S_mΦ)·B_Φ·‖M⁻¹‖² = {min_ratio:.4}{}",
            first_error(&r)
        ),
    )
}

fn criterion_5() -> Verdict {
    let r = suite(SuiteKind::Per3, 100, dims_redundant());
    let (branch, met) = (flags(&r, "invertible_branch"), flags(&r, "branch_met"));
    let (res, scale, fixed) = (
        nums(&r, "multiplier_residual"),
        nums(&r, "scale"),
        nums(&r, "fixed_point_residual"),
    );
    let inv = count((0..r.trials()).map(|i| branch[i] && met[i]));
    let semi = count((0..r.trials()).map(|i| !branch[i] && met[i]));
    let res_ok = count((0..r.trials()).map(|i| res[i] <= REL * scale[i]));
    let fixed_ok = count(fixed.iter().map(|&x| x <= 1e-10));
    Verdict::plain(
        inv >= 50 && semi >= 50 && res_ok == 100 && fixed_ok == 100 && errors(&r) == 0,
        format!(
            "branches invertible={inv} semi-normalized={semi}, residual ok {res_ok}/100, fixed point ok {fixed_ok}/100{}",
            first_error(&r)
        ),
    )
}

fn criterion_6() -> Verdict {
    let r = suite(SuiteKind::Thm1, 200, dims_all());
    let names = ["direct_equal", "cond_i", "cond_ii", "cond_iii", "cond_iv"];
    let ind: Vec<[bool; 5]> = (0..r.trials())
        .map(|i| names.map(|n| flags(&r, n)[i]))
        .collect();
    let positive = flags(&r, "positive");
    let clear: Vec<bool> = r
        .records
        .iter()
        .map(|x| x.outcome != fmlab::cli::Outcome::Indeterminate && x.error.is_none())
        .collect();
    let redundant: Vec<bool> = r.records.iter().map(|x| x.n > x.d).collect();
    let pos_all_true =
        count((0..r.trials()).map(|i| positive[i] && clear[i] && ind[i].iter().all(|&b| b)));
    let pos_total = count((0..r.trials()).map(|i| positive[i] && clear[i]));
    let neg_total = count((0..r.trials()).map(|i| !positive[i] && clear[i] && redundant[i]));
    let neg_all_false = count(
        (0..r.trials())
            .map(|i| !positive[i] && clear[i] && redundant[i] && ind[i].iter().all(|&b| !b)),
    );
    let disagreements =
        count((0..r.trials()).map(|i| clear[i] && !ind[i].iter().all(|&b| b == ind[i][0])));
    let pass = pos_all_true >= 50
        && pos_all_true == pos_total
        && neg_all_false >= 50
        && neg_all_false == neg_total
        && disagreements == 0
        && errors(&r) == 0;
    // Documented counterexample: on redundant positives the Ψ-side indicators
    // hold and the Φ-side ones do not; every disagreement is of that shape.
    let documented = (0..r.trials()).all(|i| {
        !clear[i]
            || ind[i].iter().all(|&b| b == ind[i][0])
            || (positive[i] && ind[i] == [true, true, true, false, false])
    }) && neg_all_false == neg_total
        && neg_all_false >= 50
        && errors(&r) == 0;
    Verdict {
        pass,
        detail: format!(
            "positives all-true {pos_all_true}/{pos_total}, negatives all-false {neg_all_false}/{neg_total}, disagreements {disagreements}"
        ),
        deviation: (!pass).then_some(documented),
    }
}

struct RepSummary {
    decompositions: usize,
    annihilation: usize,
    weighted: usize,
    probe: usize,
    fit: usize,
    trials: usize,
    errors: usize,
    worst_annihilation: f64,
}

fn representation_summary(kind: SuiteKind) -> RepSummary {
    let r = suite(kind, 100, dims_all());
    let th = nums(&r, "threshold");
    let within = |name: &str| count(nums(&r, name).iter().zip(&th).map(|(x, t)| x <= t));
    RepSummary {
        decompositions: within("max_decomposition_residual"),
        annihilation: within("annihilation_residual"),
        weighted: within("weighted_annihilation_residual"),
        probe: count(nums(&r, "probe_break").iter().map(|&x| x >= 1e-6)),
        fit: count(flags(&r, "fit_agrees")),
        trials: r.trials(),
        errors: errors(&r),
        worst_annihilation: nums(&r, "annihilation_residual")
            .iter()
            .zip(&th)
            .map(|(x, t)| x / t * REL)
            .fold(0.0, f64::max),
    }
}

impl RepSummary {
    fn pass(&self) -> bool {
        let n = self.trials;
        self.errors == 0 && self.decompositions == n && self.annihilation == n && self.probe == n
    }

    /// Everything holds except the unweighted annihilation identity, and the
    /// symbol-weighted form holds in every trial.
    fn documented(&self) -> bool {
        let n = self.trials;
        self.errors == 0
            && self.decompositions == n
            && self.probe == n
            && self.weighted == n
            && self.fit == n
    }

    fn detail(&self, op: &str) -> String {
        format!(
            "decomposition {}/{n}, {op} annihilation {}/{n} (worst {:.2e}·scale), weighted form {}/{n}, probe {}/{n}, dual-route fit {}/{n}",
            self.decompositions,
            self.annihilation,
            self.worst_annihilation,
            self.weighted,
            self.probe,
            self.fit,
            n = self.trials
        )
    }
}

fn criterion_7() -> Verdict {
    let s = representation_summary(SuiteKind::Gamma);
    let pass = s.pass();
    Verdict {
        pass,
        detail: s.detail("T_ΨΓ"),
        deviation: (!pass).then(|| s.documented()),
    }
}

fn criterion_8() -> Verdict {
    let riesz = suite(SuiteKind::Equivalence, 70, dims_square());
    let riesz_ok = count(
        (0..riesz.trials())
            .map(|i| flags(&riesz, "gamma_zero")[i] && flags(&riesz, "all_duals_formula")[i]),
    );
    let a = riesz_ok == riesz.trials() && errors(&riesz) == 0;

    let eq = suite(SuiteKind::Equivalence, 200, dims_all());
    let clear: Vec<bool> = eq
        .records
        .iter()
        .map(|x| x.outcome != fmlab::cli::Outcome::Indeterminate && x.error.is_none())
        .collect();
    let agree = flags(&eq, "agree");
    let disagreements = count((0..eq.trials()).map(|i| clear[i] && !agree[i]));
    let equivalent = count(flags(&eq, "equivalent"));
    let b = disagreements == 0 && errors(&eq) == 0;

    let s = representation_summary(SuiteKind::Theta);
    let c = s.pass();
    let pass = a && b && c;
    Verdict {
        pass,
        detail: format!(
            "(a) Riesz Γ=0 and dual-free formula {riesz_ok}/{}; (b) disagreements {disagreements} over {} clear trials ({equivalent} equivalent); (c) {}",
            riesz.trials(),
            count(clear.iter().copied()),
            s.detail("T_ΦΘ")
        ),
        deviation: (!pass).then(|| a && b && s.documented()),
    }
}

/// Σ_n |⟨f, φ_n⟩|² by explicit summation.
fn rayleigh(frame: &Frame, f: &Vector) -> f64 {
    (0..frame.count())
        .map(|n| {
            let phi = frame.vector(n);
            let ip: C64 = (0..f.len()).map(|k| f[k] * phi[k].conj()).sum();
            ip.norm_sqr()
        })
        .sum()
}

fn criterion_9() -> Verdict {
    let tol = Tol::default();
    let mut rng = rng_from_seed(SEED ^ 9);
    let mut frames: Vec<Frame> = (0..20u64)
        .map(|s| {
            let dims = dims_all()[s as usize % dims_all().len()];
            random_frame(dims.d, dims.n, sub_seed(SEED, 109, s), 100.0).unwrap()
        })
        .collect();
    frames.push(harmonic_tight(4, 7).unwrap());
    frames.push(finite_gabor(6, 2, 3).unwrap());
    frames.push(onb(5).unwrap());
    let mut bound_fail = 0;
    let mut attain_fail = 0;
    for frame in &frames {
        let (a, b) = frame.bounds();
        for _ in 0..1000 {
            let mut f = fmlab::generators::gaussian_matrix(frame.dim(), 1, &mut rng)
                .column(0)
                .into_owned();
            f /= C64::from(f.norm());
            let q = rayleigh(frame, &f);
            bound_fail += usize::from(q < a - 1e-6 || q > b + 1e-6);
        }
        let eig = SymmetricEigen::new(frame.frame_operator().clone());
        let (lo, hi) = herm_eig_extremes(frame.frame_operator(), &tol).unwrap();
        let mut qs: Vec<f64> = (0..frame.dim())
            .map(|k| rayleigh(frame, &eig.eigenvectors.column(k).into_owned()))
            .collect();
        qs.sort_by(f64::total_cmp);
        attain_fail += usize::from((qs[0] - a).abs() > 1e-6 || (qs[qs.len() - 1] - b).abs() > 1e-6);
        attain_fail += usize::from((lo - a).abs() > 1e-12 || (hi - b).abs() > 1e-12);
    }

    let mut action_fail = 0;
    let mut worst: f64 = 0.0;
    for t in 0..100u64 {
        let dims = dims_all()[t as usize % dims_all().len()];
        let s = sub_seed(SEED, 209, t);
        let phi = random_frame(dims.d, dims.n, s, 100.0).unwrap();
        let psi = random_frame(dims.d, dims.n, s ^ 1, 100.0).unwrap();
        let m = random_symbol(dims.n, 0.1, 3.0, s ^ 2).unwrap();
        let mult = Multiplier::build(&m, &phi, &psi, &tol).unwrap();
        let f = Vector::from_fn(dims.d, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let fast = mult.apply(&f).unwrap();
        let mut slow = vec![C64::new(0.0, 0.0); dims.d];
        for n in 0..dims.n {
            let ip: C64 = (0..dims.d).map(|k| f[k] * psi.vector(n)[k].conj()).sum();
            for (k, out) in slow.iter_mut().enumerate() {
                *out += m.values()[n] * ip * phi.vector(n)[k];
            }
        }
        for k in 0..dims.d {
            let err = (fast[k] - slow[k]).norm() / 1f64.max(slow[k].norm());
            worst = worst.max(err);
            action_fail += usize::from(err > 1e-10);
        }
    }
    Verdict::plain(
        bound_fail == 0 && attain_fail == 0 && action_fail == 0,
        format!(
            "{} frames × 1000 quotients outside [A−1e-6, B+1e-6]: {bound_fail}; extremes not attained: {attain_fail}; multiplier entries off: {action_fail} (worst {worst:.1e})",
            frames.len()
        ),
    )
}

fn criterion_10() -> Verdict {
    let tol = Tol::default();
    let mut identical = 0;
    let kinds = SuiteKind::INDIVIDUAL;
    for kind in kinds {
        let run = || suite(kind, 12, dims_all()).without_wall_time();
        let (x, y) = (run(), run());
        identical +=
            usize::from(x.to_json() == y.to_json() && x.to_csv().unwrap() == y.to_csv().unwrap());
    }
    let dir = tempfile::tempdir().unwrap();
    let mut exact = 0;
    let frames = [
        random_frame(5, 11, SEED, 100.0).unwrap(),
        harmonic_tight(3, 7).unwrap(),
        finite_gabor(4, 1, 2).unwrap(),
    ];
    for (i, frame) in frames.iter().enumerate() {
        let path = dir.path().join(format!("f{i}.json"));
        io::save_frame(frame, &path).unwrap();
        let back = io::load_frame(&path, &tol).unwrap();
        let same = frame
            .synthesis_matrix()
            .iter()
            .zip(back.synthesis_matrix().iter())
            .all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits());
        exact += usize::from(
            same && frame.synthesis_matrix().shape() == back.synthesis_matrix().shape(),
        );
    }
    Verdict::plain(
        identical == kinds.len() && exact == frames.len(),
        format!(
            "byte-identical reports {identical}/{}, bit-exact frame round-trips {exact}/{}",
            kinds.len(),
            frames.len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("adjoint identity", criterion_1),
        ("synthesis-side perturbation companion", || {
            perturbation_suite(SuiteKind::Per1)
        }),
        ("analysis-side perturbation companion", || {
            perturbation_suite(SuiteKind::Per1dual)
        }),
        (
            "invertible multiplier with vanishing symbol entries",
            criterion_4,
        ),
        ("symbol perturbation, both hypotheses", criterion_5),
        ("inversion criterion consistency", criterion_6),
        ("Γ representation of the inverse", criterion_7),
        (
            "Riesz case, equivalence agreement and Θ representation",
            criterion_8,
        ),
        ("oracle cross-checks", criterion_9),
        ("determinism and serialization", criterion_10),
    ];
    let mut unexpected = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        let note = match v.deviation {
            Some(true) => " [failure matches the documented counterexample]",
            Some(false) => " [failure NOT explained by the documented counterexample]",
            None => "",
        };
        println!("criterion {:>2} {tag} {name}: {}{note}", k + 1, v.detail);
        if !v.pass && v.deviation != Some(true) {
            unexpected += 1;
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} criterion failure(s) outside the documented deviations");
        ExitCode::FAILURE
    }
}
