//! Verification suites behind `tdchsh verify`, plus the report format shared by all subcommands.

use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use tdchsh_core::algebra::{OperatorExpr, Qi2, Scalar, Statistics};
use tdchsh_core::fermionic::{fermionic_case, fermionic_spin_check, su2_rep_family};
use tdchsh_core::matrix::{build_realization, emergent_realization, RealizationConfig};
use tdchsh_core::sampling::{rng, su2, unit_axis};
use tdchsh_core::spin::{ChshAxes, Party, Rotation, SpinSystem};
use tdchsh_core::td::{
    adler_millard_symbolic, derive_f_td, eff_identity, normalization_constraint, CaseSpec, Convention,
};

pub const SQRT2: f64 = std::f64::consts::SQRT_2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Quantum,
    Td,
    Fermionic,
    Causality,
    Charge,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct VerifyOptions {
    pub cutoff: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { cutoff: 5, seed: 0 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Exact form, when the quantity is an exact scalar.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    pub residual: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    /// Passes when `residual ≤ tolerance`.
    pub fn within(name: &str, value: Option<f64>, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            passed: residual <= tolerance,
            exact: None,
            value,
            residual,
            tolerance,
            detail: None,
        }
    }

    /// Exact comparison; the residual is the largest coefficient of the difference.
    pub fn exact(name: &str, got: &Scalar, expected: &Scalar) -> Self {
        let diff = got.clone() - expected.clone();
        Self {
            name: name.into(),
            passed: diff.is_zero(),
            exact: Some(got.to_string()),
            value: got.as_constant().map(|c| c.to_complex().re),
            residual: poly_magnitude(&diff),
            tolerance: 0.0,
            detail: (!diff.is_zero()).then(|| format!("residual {diff}")),
        }
    }

    pub fn flag(name: &str, ok: bool, detail: Option<String>) -> Self {
        Self {
            name: name.into(),
            passed: ok,
            exact: None,
            value: None,
            residual: if ok { 0.0 } else { 1.0 },
            tolerance: 0.0,
            detail,
        }
    }

    fn error(name: &str, e: impl std::fmt::Display) -> Self {
        Self::flag(name, false, Some(format!("error: {e}")))
    }
}

/// Largest coefficient modulus of a polynomial.
pub fn poly_magnitude(s: &Scalar) -> f64 {
    s.terms().map(|(_, c)| c.to_complex().norm()).fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub config: serde_json::Value,
    pub seed: u64,
    pub wall_time_seconds: f64,
}

impl RunReport {
    pub fn human(&self) -> String {
        let mut out = format!("suite {}: {}\n", self.suite, if self.passed { "PASS" } else { "FAIL" });
        for c in &self.checks {
            out += &format!("  [{}] {}", if c.passed { "pass" } else { "FAIL" }, c.name);
            if let Some(e) = &c.exact {
                out += &format!("  exact={e}");
            }
            if let Some(v) = c.value {
                out += &format!("  value={v}");
            }
            out += &format!("  residual={:e}  tolerance={:e}", c.residual, c.tolerance);
            if let Some(d) = &c.detail {
                out += &format!("  ({d})");
            }
            out.push('\n');
        }
        out += &format!("  wall time {:.3} s\n", self.wall_time_seconds);
        out
    }
}

pub fn two_sqrt2() -> Scalar {
    Scalar::constant(Qi2::sqrt2().scale(2, 1))
}

pub fn run_verify(target: Target, opts: &VerifyOptions) -> RunReport {
    let start = Instant::now();
    let checks = match target {
        Target::Quantum => quantum_checks(opts),
        Target::Td => td_checks(),
        Target::Fermionic => fermionic_checks(),
        Target::Causality => causality_checks(opts),
        Target::Charge => charge_checks(opts),
    };
    RunReport {
        schema_version: 1,
        suite: serde_json::to_value(target).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
        passed: checks.iter().all(|c| c.passed),
        checks,
        config: json!({ "target": target, "cutoff": opts.cutoff, "seed": opts.seed }),
        seed: opts.seed,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    }
}

/// Singlet correlation tensor from the symbolic engine (NaN entries if it fails).
fn singlet_tensor() -> [[f64; 3]; 3] {
    let sys = SpinSystem::bosonic();
    match sys.correlation_tensor(&sys.singlet::<Complex64>()) {
        Ok(t) => t.map(|r| r.map(|z| z.re)),
        Err(_) => [[f64::NAN; 3]; 3],
    }
}

fn contract(t: &[[f64; 3]; 3], m: [f64; 3], n: [f64; 3]) -> f64 {
    (0..3).flat_map(|k| (0..3).map(move |l| (k, l))).map(|(k, l)| m[k] * t[k][l] * n[l]).sum()
}

pub fn quantum_checks(opts: &VerifyOptions) -> Vec<Check> {
    let mut out = Vec::new();
    for (label, sys) in [("bosonic", SpinSystem::bosonic()), ("fermionic", SpinSystem::fermionic())] {
        let name = format!("{label} singlet CHSH at canonical axes");
        match sys.chsh(&sys.singlet::<Scalar>(), &ChshAxes::canonical()) {
            Ok(v) => out.push(Check::exact(&name, &v, &two_sqrt2())),
            Err(e) => out.push(Check::error(&name, e)),
        }
    }
    let cfg = RealizationConfig { cutoff: opts.cutoff, epsilon: 0.0, seed: opts.seed };
    match build_realization(&cfg) {
        Ok(r) => {
            let f = r.numeric_f_td();
            out.push(Check::within("matrix realization at zero perturbation", Some(f), (f - 2.0 * SQRT2).abs(), 1e-10));
            let tensor = singlet_tensor();
            let mut draws = rng(opts.seed);
            let mut worst = 0.0f64;
            for _ in 0..50 {
                let m = unit_axis(&mut draws);
                let n = unit_axis(&mut draws);
                let d = (r.correlation(m, n) - contract(&tensor, m, n)).abs();
                worst = worst.max(if d.is_nan() { f64::INFINITY } else { d });
            }
            out.push(Check::within("matrix correlations agree with the singlet (50 axis pairs)", None, worst, 1e-10));
        }
        Err(e) => out.push(Check::error("matrix realization at zero perturbation", e)),
    }
    let tensor = singlet_tensor();
    let mut draws = rng(opts.seed.wrapping_add(1));
    let mut best = 0.0f64;
    for _ in 0..100 {
        let [c, cp, d, dp] = [0; 4].map(|_| unit_axis(&mut draws));
        let e = |m, n| contract(&tensor, m, n);
        best = best.max((e(c, d) - e(c, dp) + e(cp, d) + e(cp, dp)).abs());
    }
    out.push(Check::within("random axes stay within 2√2 (100 draws)", Some(best), (best - 2.0 * SQRT2).max(0.0), 1e-12));
    out
}

fn td_case_checks(statistics: Statistics, label: &str) -> Vec<Check> {
    let mut out = Vec::new();
    let case = CaseSpec::new(statistics, Convention::Canonical);
    match derive_f_td(&case) {
        Ok(d) => {
            let mut c = Check::exact(&format!("{label}: first-order CHSH value"), &d.value, &d.expected);
            c.detail = Some(format!("value {} ; expected {} ; residual {}", d.value, d.expected, d.residual));
            out.push(c);
            out.push(Check::exact(&format!("{label}: value at zero perturbation"), &Scalar::constant(d.value.constant_term()), &two_sqrt2()));
            out.push(Check::exact(&format!("{label}: imaginary part of the sandwich"), &d.imaginary, &Scalar::zero()));
        }
        Err(e) => out.push(Check::error(&format!("{label}: first-order CHSH value"), e)),
    }
    match normalization_constraint(&case) {
        Ok(n) => {
            let mut c = Check::flag(
                &format!("{label}: normalization reduces to the diagonal condition"),
                !n.factor.is_zero(),
                Some(format!("N - 1 = {} = ({}) * Re(diagonal)", n.constraint, n.factor)),
            );
            c.exact = Some(n.constraint.to_string());
            out.push(c);
        }
        Err(e) => out.push(Check::error(&format!("{label}: normalization reduces to the diagonal condition"), e)),
    }
    let flipped = case.sign_flip();
    out.push(Check::exact(&format!("{label}: sign flip negates P0"), &flipped.p0(), &-case.p0()));
    let emergent = CaseSpec::new(statistics, Convention::Emergent);
    match derive_f_td(&emergent) {
        Ok(d) => out.push(Check::exact(&format!("{label}: emergent convention value"), &d.value, &two_sqrt2())),
        Err(e) => out.push(Check::error(&format!("{label}: emergent convention value"), e)),
    }
    out
}

pub fn td_checks() -> Vec<Check> {
    let mut out = td_case_checks(Statistics::Bosonic, "bosonic");
    out.extend(td_case_checks(Statistics::Fermionic, "fermionic"));
    out
}

pub fn fermionic_checks() -> Vec<Check> {
    let mut out = Vec::new();
    match fermionic_spin_check() {
        Ok(r) => {
            out.push(Check::flag("su(2) commutators under anticommutation", r.su2_commutators, None));
            out.push(Check::flag("singlet annihilated by total spin", r.singlet_annihilated, None));
            let mut c = Check::flag("singlet CHSH is 2√2", r.chsh_is_two_sqrt_two, None);
            c.exact = Some(r.chsh.clone());
            c.value = Some(r.chsh_float);
            out.push(c);
            out.push(Check::flag("creators square to zero", r.creator_squares_vanish, None));
            out.push(Check::flag("occupation numbers are 0 or 1", r.number_spectrum_binary, None));
        }
        Err(e) => out.push(Check::error("fermionic spin check", e)),
    }
    for n in 2..=8 {
        let name = format!("su(2) representation of dimension {n}");
        match su2_rep_family(n) {
            Ok(r) => {
                let mut c = Check::flag(&name, r.passed(), Some(format!("S3 eigenvalues {:?}", r.s3_eigenvalues)));
                c.exact = Some(r.casimir.clone());
                c.value = Some(r.casimir_float);
                c.residual = r.hermiticity_defect.max(r.casimir_spectrum_defect);
                c.tolerance = 1e-10;
                out.push(c);
            }
            Err(e) => out.push(Check::error(&name, e)),
        }
    }
    let case = fermionic_case();
    match derive_f_td(&case) {
        Ok(d) => out.push(Check::exact("fermionic first-order CHSH value", &d.value, &d.expected)),
        Err(e) => out.push(Check::error("fermionic first-order CHSH value", e)),
    }
    out
}

pub fn causality_checks(opts: &VerifyOptions) -> Vec<Check> {
    let mut out = Vec::new();
    let sys = SpinSystem::bosonic();
    let mut draws = rng(opts.seed);
    let rotations: Vec<Rotation<Complex64>> =
        (0..100).map(|_| Rotation::new(su2(&mut draws)).expect("Haar draws are unitary")).collect();
    let mut states = vec![("singlet".to_string(), sys.singlet::<Complex64>())];
    for m in [1, 0, -1] {
        states.push((format!("triplet m={m}"), sys.triplet::<Complex64>(m).expect("valid projection")));
    }
    for (label, state) in &states {
        let name = format!("{label}: near marginals under 100 far rotations");
        match sys.causality_check(state, &rotations) {
            Ok(r) => out.push(Check::within(&name, None, r.max_deviation, 1e-12)),
            Err(e) => out.push(Check::error(&name, e)),
        }
    }
    let h = Qi2::inv_sqrt2();
    let exact = Rotation::exact([[h.clone(), h.clone()], [-h.clone(), h]]).expect("exact unitary");
    match sys.causality_check(&sys.singlet::<Scalar>(), &[exact]) {
        Ok(r) => out.push(Check::flag("singlet: exact invariance under a Hadamard-type rotation", r.exact_zero, None)),
        Err(e) => out.push(Check::error("singlet: exact invariance under a Hadamard-type rotation", e)),
    }
    let mut total = 0.0f64;
    for (_, state) in &states {
        for u in rotations.iter().take(10) {
            let p = sys.measurement_probability(state, Party::B, u, true).unwrap_or_default()
                + sys.measurement_probability(state, Party::B, u, false).unwrap_or_default();
            total = total.max((p.re - 1.0).abs());
        }
    }
    out.push(Check::within("outcome probabilities sum to one", None, total, 1e-12));
    out
}

pub fn charge_checks(opts: &VerifyOptions) -> Vec<Check> {
    let mut out = Vec::new();
    let mut anti = 0.0f64;
    let mut imag = 0.0f64;
    let mut invariants = true;
    for k in 0..20 {
        let cfg = RealizationConfig { cutoff: opts.cutoff, epsilon: 0.1, seed: opts.seed.wrapping_add(k) };
        match build_realization(&cfg) {
            Ok(r) => {
                let c = r.charge_report();
                anti = anti.max(c.anti_self_adjoint_defect);
                imag = imag.max(c.trace_hamiltonian_im.abs());
                invariants &= r.invariants().passed();
            }
            Err(e) => {
                out.push(Check::error("random realization", e));
                return out;
            }
        }
    }
    out.push(Check::within("charge is anti-self-adjoint (20 realizations)", None, anti, 1e-12));
    out.push(Check::within("trace Hamiltonian is real (20 realizations)", None, imag, 1e-12));
    out.push(Check::flag("realization invariants (20 realizations)", invariants, None));
    match emergent_realization(&RealizationConfig { cutoff: opts.cutoff, epsilon: 0.0, seed: opts.seed }) {
        Ok(r) => {
            let c = r.charge_report();
            out.push(Check::within("emergent commutators: effective part is 1_eff", None, c.unit_defect, 1e-12));
            out.push(Check::within("emergent commutators: i·identity on the +i sector", None, c.plus_sector_defect, 1e-12));
        }
        Err(e) => out.push(Check::error("emergent realization", e)),
    }
    let case = CaseSpec::new(Statistics::Bosonic, Convention::Emergent);
    let name = "symbolic emergent charge is 4i·1_eff";
    match adler_millard_symbolic(&case) {
        Ok(c) => {
            let target = OperatorExpr::gen(eff_identity()).scale_exact(&(Qi2::i() * Qi2::int(4)));
            let mut check = Check::flag(name, c == target, None);
            check.exact = Some(c.to_string());
            out.push(check);
        }
        Err(e) => out.push(Check::error(name, e)),
    }
    out
}
