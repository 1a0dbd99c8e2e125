//! One function per suite. Each trial draws every random object from its
//! own sub-seed, so results do not depend on scheduling.

use super::{Dims, GeneratorKind, Outcome, SuiteKind, Value};
use crate::error::Result;
use crate::frames::Frame;
use crate::generators::{
    finite_gabor, gabor_lattice, harmonic_tight, onb, random_frame, random_invertible,
    random_symbol, riesz_basis, rng_from_seed, sub_seed, DEFAULT_CONDITION_CAP,
};
use crate::multiplier::Multiplier;
use crate::numeric::{op_norm, relative_residual, Tol, Verdict, C64};
use crate::perturbation::{
    companion_for_analysis_perturbation, companion_for_invertible_synthesis_perturbation,
    companion_for_symbol_perturbation, companion_for_synthesis_perturbation,
    random_frame_perturbation, PerturbReport,
};
use crate::representations::{
    equivalence_criterion, equivalence_criterion_dual_side, gamma_from_decompositions, gamma_of,
    sample_duals, theta_from_decompositions, theta_of, verify_gamma_decomposition,
    verify_theta_decomposition, RepKind,
};
use crate::symbols::Symbol;

const SYMBOL_LO: f64 = 0.5;
const SYMBOL_HI: f64 = 2.0;
pub(crate) const DUAL_COUNT: usize = 20;
pub(crate) const PROBE_EPS: f64 = 1e-5;
pub(crate) const PROBE_MIN_BREAK: f64 = 1e-6;
pub(crate) const FIXED_POINT_TOL: f64 = 1e-10;

pub(super) struct TrialContext {
    pub trial: usize,
    pub seed: u64,
    pub dims: Dims,
    pub generator: GeneratorKind,
    pub tol: Tol,
}

#[derive(Clone, Copy)]
enum Stream {
    Phi = 1,
    Psi,
    Symbol,
    Perturb,
    Duals,
    MirrorDuals,
    Transform,
    Probe,
}

impl TrialContext {
    fn seed_for(&self, stream: Stream) -> u64 {
        sub_seed(self.seed, stream as u64, 0)
    }

    fn even(&self) -> bool {
        self.trial.is_multiple_of(2)
    }
}

fn base_frame(ctx: &TrialContext, stream: Stream) -> Result<Frame> {
    let Dims { d, n } = ctx.dims;
    match ctx.generator {
        GeneratorKind::Random => random_frame(d, n, ctx.seed_for(stream), DEFAULT_CONDITION_CAP),
        GeneratorKind::Riesz => riesz_basis(d, ctx.seed_for(stream), DEFAULT_CONDITION_CAP),
        GeneratorKind::Harmonic => harmonic_tight(d, n),
        GeneratorKind::Onb => onb(d),
        GeneratorKind::Gabor => {
            let (a, b) = gabor_lattice(d, n).ok_or_else(|| {
                crate::error::Error::ConfigInvalid(format!("no Gabor lattice for {d}x{n}"))
            })?;
            finite_gabor(d, a, b)
        }
    }
}

/// `(Φ, Ψ)`. Deterministic families get `Ψ = VΦ` with a seeded invertible `V`.
fn frame_pair(ctx: &TrialContext) -> Result<(Frame, Frame)> {
    let phi = base_frame(ctx, Stream::Phi)?;
    let psi = match ctx.generator {
        GeneratorKind::Random | GeneratorKind::Riesz => base_frame(ctx, Stream::Psi)?,
        _ => {
            let mut rng = rng_from_seed(ctx.seed_for(Stream::Transform));
            let v = random_invertible(ctx.dims.d, DEFAULT_CONDITION_CAP, &mut rng)?;
            Frame::new(v * phi.synthesis_matrix(), &ctx.tol)?
        }
    };
    Ok((phi, psi))
}

/// `Ψ = V(mΦ)` for a seeded invertible `V`.
fn equivalent_partner(ctx: &TrialContext, phi: &Frame, m: &Symbol) -> Result<Frame> {
    let mut rng = rng_from_seed(ctx.seed_for(Stream::Transform));
    let v = random_invertible(ctx.dims.d, DEFAULT_CONDITION_CAP, &mut rng)?;
    Frame::new(v * phi.synthesis_matrix() * m.diag(), &ctx.tol)
}

fn symbol(ctx: &TrialContext) -> Result<Symbol> {
    random_symbol(
        ctx.dims.n,
        SYMBOL_LO,
        SYMBOL_HI,
        ctx.seed_for(Stream::Symbol),
    )
}

/// A symbol with one zero entry when `N > d`; unchanged otherwise, since a
/// vanishing entry would make `M` singular for a basis.
fn symbol_with_zero(ctx: &TrialContext) -> Result<(Symbol, Option<usize>)> {
    let m = symbol(ctx)?;
    if ctx.dims.n > ctx.dims.d {
        let index = ctx.trial % ctx.dims.n;
        Ok((m.with_entry(index, C64::new(0.0, 0.0))?, Some(index)))
    } else {
        Ok((m, None))
    }
}

#[derive(Default)]
struct Checks {
    fail: bool,
    indeterminate: bool,
}

impl Checks {
    fn residual(&mut self, residual: f64, threshold: f64) {
        match Verdict::classify(residual, threshold) {
            Verdict::Holds => {}
            Verdict::Indeterminate => self.indeterminate = true,
            Verdict::Fails => self.fail = true,
        }
    }

    fn require(&mut self, ok: bool) {
        self.fail |= !ok;
    }

    fn outcome(&self) -> Outcome {
        if self.fail {
            Outcome::Fail
        } else if self.indeterminate {
            Outcome::Indeterminate
        } else {
            Outcome::Pass
        }
    }
}

type Trial = Result<(Vec<Value>, Outcome)>;

pub(super) fn columns(kind: SuiteKind) -> Vec<&'static str> {
    match kind {
        SuiteKind::Thm1 => vec![
            "positive",
            "direct_residual",
            "cond_i_residual",
            "cond_ii_residual",
            "cond_iii_residual",
            "cond_iv_residual",
            "direct_equal",
            "cond_i",
            "cond_ii",
            "cond_iii",
            "cond_iv",
            "consistent",
        ],
        SuiteKind::Per1 | SuiteKind::Per1dual => PERTURB_COLUMNS.to_vec(),
        SuiteKind::Per2 => {
            let mut c = vec!["zero_index"];
            c.extend(PERTURB_COLUMNS);
            c.extend(["stated_ratio", "scaled_lower_bound", "stated_bound_holds"]);
            c
        }
        SuiteKind::Per3 => {
            let mut c = vec!["invertible_branch"];
            c.extend(PERTURB_COLUMNS);
            c.extend(["fixed_point_residual", "branch_met"]);
            c
        }
        SuiteKind::Gamma | SuiteKind::Theta => vec![
            "annihilation_residual",
            "weighted_annihilation_residual",
            "max_decomposition_residual",
            "canonical_decomposition_residual",
            "probe_break",
            "fit_residual",
            "threshold",
            "decompositions_hold",
            "annihilation_holds",
            "probe_breaks",
            "fit_agrees",
        ],
        SuiteKind::Equivalence => vec![
            "constructed",
            "riesz",
            "equivalence_residual",
            "gamma_norm",
            "max_formula_residual",
            "equivalent",
            "gamma_zero",
            "all_duals_formula",
            "mirror_equivalence_residual",
            "mirror_theta_norm",
            "mirror_max_formula_residual",
            "mirror_equivalent",
            "mirror_theta_zero",
            "mirror_all_duals_formula",
            "agree",
        ],
        SuiteKind::All => Vec::new(),
    }
}

const PERTURB_COLUMNS: [&str; 8] = [
    "mu",
    "coefficient",
    "companion_deviation",
    "scale",
    "multiplier_residual",
    "bound_satisfied",
    "multiplier_preserved",
    "empirical_ratio",
];

fn perturb_values(r: &PerturbReport, tol: &Tol) -> Vec<Value> {
    vec![
        Value::Num(r.achieved_mu),
        Value::Num(r.bound_coefficient),
        Value::Num(r.companion_deviation),
        Value::Num(r.scale),
        Value::Num(r.multiplier_residual),
        Value::Flag(r.bound_satisfied),
        Value::Flag(r.multiplier_preserved(tol)),
        Value::Num(r.empirical_ratio),
    ]
}

fn perturb_checks(r: &PerturbReport, tol: &Tol) -> Checks {
    let mut c = Checks::default();
    c.residual(r.multiplier_residual, tol.rel_eq * r.scale);
    c.require(r.bound_satisfied);
    c
}

pub(super) fn run_trial(kind: SuiteKind, ctx: &TrialContext) -> Trial {
    match kind {
        SuiteKind::Thm1 => thm1(ctx),
        SuiteKind::Per1 => per1(ctx, false),
        SuiteKind::Per1dual => per1(ctx, true),
        SuiteKind::Per2 => per2(ctx),
        SuiteKind::Per3 => per3(ctx),
        SuiteKind::Gamma => representation(ctx, RepKind::Gamma),
        SuiteKind::Theta => representation(ctx, RepKind::Theta),
        SuiteKind::Equivalence => equivalence(ctx),
        SuiteKind::All => unreachable!("`all` is expanded before dispatch"),
    }
}

/// Even trials are positive instances `Ψ = V(mΦ)`, odd trials generic.
fn thm1(ctx: &TrialContext) -> Trial {
    let tol = &ctx.tol;
    let m = symbol(ctx)?;
    let (phi, generic_psi) = frame_pair(ctx)?;
    let positive = ctx.even();
    let psi = if positive {
        equivalent_partner(ctx, &phi, &m)?
    } else {
        generic_psi
    };
    let r = Multiplier::build(&m, &phi, &psi, tol)?.inversion_report(tol)?;
    let mut c = Checks {
        indeterminate: r.indeterminate,
        ..Checks::default()
    };
    if !r.indeterminate {
        c.require(r.consistent);
        c.require(!positive || r.direct_equal);
    }
    let conds = [r.cond_i, r.cond_ii, r.cond_iii, r.cond_iv];
    let mut values = vec![Value::Flag(positive), Value::Num(r.direct_residual)];
    values.extend(conds.iter().map(|k| Value::Num(k.residual)));
    values.extend(r.indicators().map(Value::Flag));
    values.push(Value::Flag(r.consistent));
    Ok((values, c.outcome()))
}

/// Perturbs `Φ` (or `Ψ` when `dual_side`) by `μ = 0.5 √A`.
fn per1(ctx: &TrialContext, dual_side: bool) -> Trial {
    let tol = &ctx.tol;
    let m = symbol(ctx)?;
    let (phi, psi) = frame_pair(ctx)?;
    let mult = Multiplier::build(&m, &phi, &psi, tol)?;
    let seed = ctx.seed_for(Stream::Perturb);
    let report = if dual_side {
        let psi_prime = random_frame_perturbation(&psi, 0.5 * psi.lower_bound().sqrt(), seed, tol)?;
        companion_for_analysis_perturbation(&mult, &psi_prime, tol)?.1
    } else {
        let phi_prime = random_frame_perturbation(&phi, 0.5 * phi.lower_bound().sqrt(), seed, tol)?;
        companion_for_synthesis_perturbation(&mult, &phi_prime, tol)?.1
    };
    Ok((
        perturb_values(&report, tol),
        perturb_checks(&report, tol).outcome(),
    ))
}

/// Symbol with a zero entry, `μ ‖m‖_∞ = 0.5 / (√B_Φ ‖M⁻¹‖)`.
fn per2(ctx: &TrialContext) -> Trial {
    let tol = &ctx.tol;
    let (m, zero) = symbol_with_zero(ctx)?;
    let (phi, psi) = frame_pair(ctx)?;
    let mult = Multiplier::build(&m, &phi, &psi, tol)?;
    let m_inv_norm = op_norm(&mult.invert(tol)?);
    let mu = 0.5 / (m.sup_mod() * phi.upper_bound().sqrt() * m_inv_norm);
    let phi_prime = random_frame_perturbation(&phi, mu, ctx.seed_for(Stream::Perturb), tol)?;
    let (_, report) = companion_for_invertible_synthesis_perturbation(&mult, &phi_prime, tol)?;
    let bound = report
        .scaled_frame_bound
        .expect("invertible-multiplier companion reports the scaled frame bound");
    let mut c = perturb_checks(&report, tol);
    c.require(bound.stated_holds(tol));
    let mut values = vec![zero.map_or(Value::Missing, |i| Value::Num(i as f64))];
    values.extend(perturb_values(&report, tol));
    values.extend([
        Value::Num(bound.stated_ratio),
        Value::Num(bound.lambda_min),
        Value::Flag(bound.stated_holds(tol)),
    ]);
    Ok((values, c.outcome()))
}

/// Even trials: invertible branch, zero entry, `ε = 0.5 / (B_Φ ‖M⁻¹‖)`.
/// Odd trials: semi-normalized branch, `ε = 0.5 inf|m_n|`.
fn per3(ctx: &TrialContext) -> Trial {
    let tol = &ctx.tol;
    let invertible_branch = ctx.even();
    let (m, _) = if invertible_branch {
        symbol_with_zero(ctx)?
    } else {
        (symbol(ctx)?, None)
    };
    let (phi, psi) = frame_pair(ctx)?;
    let mult = Multiplier::build(&m, &phi, &psi, tol)?;
    let eps = if invertible_branch {
        0.5 / (phi.upper_bound() * op_norm(&mult.invert(tol)?))
    } else {
        0.5 * m.inf_mod()
    };
    let m_prime = m.perturb(eps, ctx.seed_for(Stream::Perturb))?;
    let (_, report) = companion_for_symbol_perturbation(&mult, &m_prime, tol)?;
    let branches = report
        .symbol_branches
        .expect("symbol companion reports its branches");
    let branch_met = if invertible_branch {
        branches.invertible
    } else {
        branches.semi_normalized
    };
    let (fixed, _) = companion_for_symbol_perturbation(&mult, &m, tol)?;
    let fixed_point_residual = fixed.distance(&psi)?;

    let mut c = perturb_checks(&report, tol);
    c.require(branch_met);
    c.require(fixed_point_residual <= FIXED_POINT_TOL);
    let mut values = vec![Value::Flag(invertible_branch)];
    values.extend(perturb_values(&report, tol));
    values.extend([Value::Num(fixed_point_residual), Value::Flag(branch_met)]);
    Ok((values, c.outcome()))
}

/// Closed-form `Γ` (or `Θ`) against the decomposition identities, the
/// annihilation identity, a uniqueness probe and a least-squares fit.
fn representation(ctx: &TrialContext, kind: RepKind) -> Trial {
    let tol = &ctx.tol;
    let m = symbol(ctx)?;
    let (phi, psi) = frame_pair(ctx)?;
    let mult = Multiplier::build(&m, &phi, &psi, tol)?;
    let duals_seed = ctx.seed_for(Stream::Duals);
    let probe_seed = ctx.seed_for(Stream::Probe);
    let (verified, probe, fit) = match kind {
        RepKind::Gamma => {
            let duals = sample_duals(&phi, DUAL_COUNT, duals_seed, tol)?;
            let rep = gamma_of(&mult, tol)?;
            let verified = verify_gamma_decomposition(&mult, &rep, &duals, tol)?;
            let probe = verify_gamma_decomposition(
                &mult,
                &rep.perturbed(PROBE_EPS, probe_seed),
                &duals,
                tol,
            )?;
            (
                verified,
                probe,
                gamma_from_decompositions(&mult, &duals, tol)?,
            )
        }
        RepKind::Theta => {
            let duals = sample_duals(&psi, DUAL_COUNT, duals_seed, tol)?;
            let rep = theta_of(&mult, tol)?;
            let verified = verify_theta_decomposition(&mult, &rep, &duals, tol)?;
            let probe = verify_theta_decomposition(
                &mult,
                &rep.perturbed(PROBE_EPS, probe_seed),
                &duals,
                tol,
            )?;
            (
                verified,
                probe,
                theta_from_decompositions(&mult, &duals, tol)?,
            )
        }
    };
    let threshold = verified.threshold(tol);
    let fit_residual = relative_residual(&fit, &verified.op);
    let probe_break = probe.max_decomposition_residual();
    let canonical = verified
        .decomposition_residuals
        .first()
        .map_or(Value::Missing, |r| Value::Num(r.residual));

    let mut c = Checks::default();
    c.residual(verified.max_decomposition_residual(), threshold);
    c.residual(verified.annihilation_residual, threshold);
    c.residual(fit_residual, 10.0 * tol.rel_eq);
    c.require(probe_break >= PROBE_MIN_BREAK);
    let values = vec![
        Value::Num(verified.annihilation_residual),
        Value::Num(verified.weighted_annihilation_residual),
        Value::Num(verified.max_decomposition_residual()),
        canonical,
        Value::Num(probe_break),
        Value::Num(fit_residual),
        Value::Num(threshold),
        Value::Flag(verified.decompositions_hold(tol)),
        Value::Flag(verified.annihilation_residual <= threshold),
        Value::Flag(probe_break >= PROBE_MIN_BREAK),
        Value::Flag(fit_residual <= 10.0 * tol.rel_eq),
    ];
    Ok((values, c.outcome()))
}

/// Even trials are constructed equivalent pairs, odd trials generic. Both
/// the direct criterion and its mirror must agree three ways.
fn equivalence(ctx: &TrialContext) -> Trial {
    let tol = &ctx.tol;
    let m = symbol(ctx)?;
    let (phi, generic_psi) = frame_pair(ctx)?;
    let constructed = ctx.even();
    let psi = if constructed {
        equivalent_partner(ctx, &phi, &m)?
    } else {
        generic_psi
    };
    let mult = Multiplier::build(&m, &phi, &psi, tol)?;
    let phi_duals = sample_duals(&phi, DUAL_COUNT, ctx.seed_for(Stream::Duals), tol)?;
    let psi_duals = sample_duals(&psi, DUAL_COUNT, ctx.seed_for(Stream::MirrorDuals), tol)?;
    let direct = equivalence_criterion(&mult, &phi_duals, tol)?;
    let mirror = equivalence_criterion_dual_side(&mult, &psi_duals, tol)?;
    let riesz = psi.is_riesz_basis();
    let agree = direct.agree() && mirror.agree();

    let mut c = Checks {
        indeterminate: direct.indeterminate || mirror.indeterminate,
        ..Checks::default()
    };
    if !c.indeterminate {
        c.require(agree);
        c.require(!constructed || direct.equivalent);
        c.require(!riesz || (direct.gamma_zero && direct.all_duals_formula));
    }
    let mut values = vec![
        Value::Flag(constructed),
        Value::Flag(riesz),
        Value::Num(direct.equivalence_residual),
        Value::Num(direct.gamma_norm),
        Value::Num(direct.max_formula_residual),
    ];
    values.extend(direct.flags().map(Value::Flag));
    values.extend([
        Value::Num(mirror.equivalence_residual),
        Value::Num(mirror.gamma_norm),
        Value::Num(mirror.max_formula_residual),
    ]);
    values.extend(mirror.flags().map(Value::Flag));
    values.push(Value::Flag(agree));
    Ok((values, c.outcome()))
}
