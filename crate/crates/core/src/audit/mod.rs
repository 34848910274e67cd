//! Seeded property audits. Each suite samples channels, baths and
//! superchannels, recomputes both sides of a property independently and
//! reports the worst residual per property.

mod oracles;

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use crate::channels::Channel;
use crate::divergences::{
    channel_ht_rel_entropy, channel_max_rel_entropy_log, channel_rel_entropy_bruteforce, channel_rel_entropy_log,
    neyman_pearson, AscentOptions, HtBudget, OracleMode,
};
use crate::error::{Error, Result};
use crate::qcore::linalg;
use crate::qcore::random::{density_matrix_with, ginibre, haar_unitary, rng_from_seed};
use crate::qcore::{vn_entropy, DensityMatrix, Hermitian, ThermalContext};
use crate::resource::{apply_superchannel, golden_unit, golden_unit_doubling_check, SuperchannelSandwich};
use crate::sdp::{diamond_norm_of_channels, ht_sdp};
use crate::thermo::{athermality, channel_energy, channel_entropy, channel_thermo_report};

pub use oracles::{classical_type2, energy_by_sampling, sampled_max_divergence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Monotonicity,
    Additivity,
    Convexity,
    Faithfulness,
    Weyl,
    Golden,
    Table1,
    Diamond,
    Oracle,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Monotonicity,
        Suite::Additivity,
        Suite::Convexity,
        Suite::Faithfulness,
        Suite::Weyl,
        Suite::Golden,
        Suite::Table1,
        Suite::Diamond,
        Suite::Oracle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Monotonicity => "monotonicity",
            Suite::Additivity => "additivity",
            Suite::Convexity => "convexity",
            Suite::Faithfulness => "faithfulness",
            Suite::Weyl => "weyl",
            Suite::Golden => "golden",
            Suite::Table1 => "table1",
            Suite::Diamond => "diamond",
            Suite::Oracle => "oracle",
        }
    }

    /// Samples drawn when the caller does not override the count.
    pub fn default_samples(self) -> usize {
        match self {
            Suite::Monotonicity => 30,
            Suite::Additivity => 10,
            Suite::Convexity => 20,
            Suite::Faithfulness => 50,
            Suite::Table1 => 10,
            Suite::Oracle => 5,
            Suite::Weyl | Suite::Golden | Suite::Diamond => 0,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|suite| suite.as_str() == s).ok_or_else(|| {
            let names: Vec<_> = Suite::ALL.iter().map(|s| s.as_str()).collect();
            Error::input(format!("unknown suite {s:?}; expected one of {}", names.join(", ")))
        })
    }
}

/// One audited property. `passed` iff `residual ≤ tolerance`, except for
/// flagged properties where residuals up to `flag_limit` pass with a flag.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub flagged: bool,
    pub residual: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub suite: Suite,
    pub seed: u64,
    pub samples: usize,
    pub checks: Vec<CheckResult>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Worst-case accumulator for one property.
struct Tally {
    name: String,
    tolerance: f64,
    flag_limit: Option<f64>,
    worst: f64,
    samples: usize,
    flags: usize,
    detail: Vec<String>,
}

impl Tally {
    fn new(name: impl Into<String>, tolerance: f64) -> Self {
        Tally {
            name: name.into(),
            tolerance,
            flag_limit: None,
            worst: 0.0,
            samples: 0,
            flags: 0,
            detail: Vec::new(),
        }
    }

    fn flagging(mut self, limit: f64) -> Self {
        self.flag_limit = Some(limit);
        self
    }

    fn record(&mut self, residual: f64) {
        self.samples += 1;
        if residual > self.tolerance {
            self.flags += 1;
        }
        if residual > self.worst || residual.is_nan() {
            self.worst = residual;
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.detail.push(s.into());
    }

    fn finish(mut self) -> CheckResult {
        let limit = self.flag_limit.unwrap_or(self.tolerance);
        let passed = self.worst <= limit;
        let flagged = self.flag_limit.is_some() && self.flags > 0 && passed;
        if flagged {
            self.detail.push(format!(
                "{} of {} samples above {:.0e}, all below {:.0e}",
                self.flags, self.samples, self.tolerance, limit
            ));
        }
        CheckResult {
            name: self.name,
            passed,
            flagged,
            residual: self.worst,
            tolerance: self.tolerance,
            samples: self.samples,
            detail: self.detail.join("; "),
        }
    }
}

/// Random bath on `dim` levels: Hamiltonian `(G + G†)/2` for Gaussian `G`,
/// `β` uniform in `[0.3, 2]`.
pub fn random_bath<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ThermalContext {
    let beta = rng.random_range(0.3..2.0);
    random_bath_at(dim, beta, rng)
}

pub fn random_bath_at<R: Rng + ?Sized>(dim: usize, beta: f64, rng: &mut R) -> ThermalContext {
    let g = ginibre(dim, dim, rng);
    let h = Hermitian::from_raw(linalg::hermitize(&g));
    ThermalContext::new(h, beta).expect("finite Hermitian Hamiltonian and positive beta")
}

/// Random qubit channel with one to four Kraus operators.
fn random_qubit_channel<R: Rng + ?Sized>(rng: &mut R) -> Channel {
    let k = rng.random_range(1..=4);
    Channel::random(2, 2, k, rng)
}

/// `β⁻¹ ln tr γ⁻¹`, the free energy of every unitary channel.
pub fn unitary_free_energy(ctx: &ThermalContext) -> f64 {
    let beta = ctx.beta();
    let energies = ctx.hamiltonian().eigenvalues();
    let top = energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = beta * top + energies.iter().map(|e| (beta * (e - top)).exp()).sum::<f64>().ln();
    (ctx.log_partition_function() + lse) / beta
}

/// Runs `suite` with `samples` draws (the suite default when `None`).
pub fn run_suite(suite: Suite, seed: u64, samples: Option<usize>) -> Result<AuditReport> {
    let n = samples.unwrap_or(suite.default_samples());
    let checks = match suite {
        Suite::Monotonicity => monotonicity(seed, n)?,
        Suite::Additivity => additivity(seed, n)?,
        Suite::Convexity => convexity(seed, n)?,
        Suite::Faithfulness => faithfulness(seed, n)?,
        Suite::Weyl => weyl()?,
        Suite::Golden => golden()?,
        Suite::Table1 => table1(seed, n)?,
        Suite::Diamond => diamond()?,
        Suite::Oracle => oracle(seed, n)?,
    };
    Ok(AuditReport {
        suite,
        seed,
        samples: n,
        checks,
    })
}

fn audit_ht_budget() -> HtBudget {
    HtBudget {
        restarts: 1,
        max_evals: 600,
        ..HtBudget::default()
    }
}

fn monotonicity(seed: u64, samples: usize) -> Result<Vec<CheckResult>> {
    let mut rng = rng_from_seed(seed);
    let opts = AscentOptions::default();
    let budget = audit_ht_budget();
    let mut free = Tally::new("free_energy_monotone", 1e-5);
    let mut max = Tally::new("max_divergence_monotone", 1e-5);
    let mut ht: Vec<(f64, Tally)> = [0.05, 0.2]
        .into_iter()
        .map(|eps| {
            (
                eps,
                Tally::new(format!("ht_divergence_monotone_eps_{eps}"), 1e-5).flagging(1e-3),
            )
        })
        .collect();
    let mut closure = Tally::new("superchannel_closure", 1e-6);
    for _ in 0..samples {
        let ctx = random_bath(2, &mut rng);
        let n = random_qubit_channel(&mut rng);
        let theta = SuperchannelSandwich::random(&ctx, rng.random())?;
        let image = apply_superchannel(&theta, &n)?;
        let log_gamma = ctx.log_gamma();
        let beta = ctx.beta();

        let before = channel_rel_entropy_log(&n, &log_gamma, &opts)?.value / beta;
        let after = channel_rel_entropy_log(&image, &log_gamma, &opts)?.value / beta;
        free.record((after - before).max(0.0));

        let before = channel_max_rel_entropy_log(&n, &log_gamma)?.value;
        let after = channel_max_rel_entropy_log(&image, &log_gamma)?.value;
        max.record((after - before).max(0.0));

        for (eps, tally) in ht.iter_mut() {
            let before = channel_ht_rel_entropy(&n, &log_gamma, *eps, &budget)?.value;
            let after = channel_ht_rel_entropy(&image, &log_gamma, *eps, &budget)?.value;
            tally.record((after - before).max(0.0));
        }
        closure.record(theta.closure_residual(&ctx)?);
    }
    let mut out = vec![free.finish(), max.finish()];
    out.extend(ht.into_iter().map(|(_, t)| t.finish()));
    out.push(closure.finish());
    Ok(out)
}

/// Reduced input `ψ_A'` of an achieving input `ψ_RA'`.
fn input_marginal(psi: &DensityMatrix, dim: usize) -> Result<DensityMatrix> {
    psi.reduce(&[dim, dim], &[1])
}

fn additivity(seed: u64, samples: usize) -> Result<Vec<CheckResult>> {
    let mut rng = rng_from_seed(seed);
    let mut free = Tally::new("free_energy_additive", 1e-4);
    let mut max = Tally::new("max_divergence_additive", 1e-8);
    for _ in 0..samples {
        let beta = rng.random_range(0.3..2.0);
        let ctx_a = random_bath_at(2, beta, &mut rng);
        let ctx_b = random_bath_at(2, beta, &mut rng);
        let joint = ctx_a.noninteracting(&ctx_b)?;
        let n = random_qubit_channel(&mut rng);
        let m = random_qubit_channel(&mut rng);
        let nm = n.tensor(&m);

        let opts = AscentOptions::default();
        let dn = athermality(&n, &ctx_a, &opts)?;
        let dm = athermality(&m, &ctx_b, &opts)?;
        let mut starts = Vec::new();
        if let (Some(pn), Some(pm)) = (&dn.achieving_input, &dm.achieving_input) {
            starts.push(input_marginal(pn, 2)?.tensor(&input_marginal(pm, 2)?));
        }
        let joint_opts = AscentOptions {
            extra_starts: starts,
            random_starts: 4,
            ..AscentOptions::default()
        };
        let dnm = athermality(&nm, &joint, &joint_opts)?;
        free.record(((dnm.value - dn.value - dm.value) / beta).abs());

        let xn = channel_max_rel_entropy_log(&n, &ctx_a.log_gamma())?.value;
        let xm = channel_max_rel_entropy_log(&m, &ctx_b.log_gamma())?.value;
        let xnm = channel_max_rel_entropy_log(&nm, &joint.log_gamma())?.value;
        max.record((xnm - xn - xm).abs());
    }
    Ok(vec![free.finish(), max.finish()])
}

fn convexity(seed: u64, samples: usize) -> Result<Vec<CheckResult>> {
    let mut rng = rng_from_seed(seed);
    let opts = AscentOptions::default();
    let mut free = Tally::new("free_energy_convex", 1e-6);
    for _ in 0..samples {
        let ctx = random_bath(2, &mut rng);
        let n = random_qubit_channel(&mut rng);
        let m = random_qubit_channel(&mut rng);
        let p: f64 = rng.random();
        let mix = Channel::mixture(&[p, 1.0 - p], &[&n, &m])?;
        let f = |ch: &Channel| -> Result<f64> { Ok(athermality(ch, &ctx, &opts)?.value / ctx.beta()) };
        let lhs = f(&mix)?;
        let rhs = p * f(&n)? + (1.0 - p) * f(&m)?;
        free.record((lhs - rhs).max(0.0));
    }
    Ok(vec![free.finish()])
}

fn faithfulness(seed: u64, samples: usize) -> Result<Vec<CheckResult>> {
    let mut rng = rng_from_seed(seed);
    let opts = AscentOptions::default();
    // residual is how far F falls short of the threshold
    let mut positive = Tally::new("free_energy_positive", 0.0);
    let mut thermal = Tally::new("thermal_channel_zero", 1e-8);
    let mut maximal = Tally::new("unitary_maximal", 1e-6);
    let mut unitary = Tally::new("unitary_value", 1e-6);
    let mut smallest = f64::INFINITY;
    for _ in 0..samples {
        let ctx = random_bath(2, &mut rng);
        let n = random_qubit_channel(&mut rng);
        let f = athermality(&n, &ctx, &opts)?.value / ctx.beta();
        smallest = smallest.min(f);
        positive.record((1e-4 - f).max(0.0));

        let t = Channel::absolutely_thermal(&ctx, 2);
        thermal.record(athermality(&t, &ctx, &opts)?.value.abs() / ctx.beta());

        let ceiling = unitary_free_energy(&ctx);
        maximal.record((f - ceiling).max(0.0));

        let u = Channel::unitary(haar_unitary(2, &mut rng))?;
        let fu = athermality(&u, &ctx, &opts)?.value / ctx.beta();
        unitary.record((fu - ceiling).abs());
    }
    positive.note(format!("smallest F = {smallest:.6e}, threshold 1e-4"));
    Ok(vec![
        positive.finish(),
        thermal.finish(),
        maximal.finish(),
        unitary.finish(),
    ])
}

fn weyl() -> Result<Vec<CheckResult>> {
    let mut t = Tally::new("uniform_weyl_mixture_is_replacer", 1e-10);
    for m in [2, 3, 4] {
        let mixing = Channel::uniform_mixing(m)?;
        let replacer = Channel::replacer(&DensityMatrix::maximally_mixed(m), m);
        let r = mixing.choi_distance(&replacer);
        t.record(r);
        t.note(format!("m={m}: {r:.2e}"));
    }
    Ok(vec![t.finish()])
}

fn golden() -> Result<Vec<CheckResult>> {
    let mut ascent = Tally::new("golden_unit_ascent", 1e-5);
    let mut doubling = Tally::new("golden_unit_doubling", 1e-5);
    for m in [2, 3, 4] {
        let unit = golden_unit(m)?;
        let want = 2.0 * (m as f64).ln();
        ascent.record((unit.divergence - want).abs());
        ascent.note(format!("m={m}: {:.10}", unit.divergence));
        let ctx = ThermalContext::degenerate(m, 1.0)?;
        let check = golden_unit_doubling_check(m, &ctx)?;
        doubling.record(check.residual);
    }
    let mut grid = Tally::new("golden_unit_grid", 1e-5);
    let pi = DensityMatrix::maximally_mixed(2).as_hermitian();
    let r = channel_rel_entropy_bruteforce(
        &Channel::identity(2),
        &pi,
        OracleMode::Grid {
            density: 9,
            polish: true,
        },
    )?;
    grid.record((r.value - 2.0 * LN_2).abs());
    grid.note(format!("m=2: {:.10}", r.value));
    Ok(vec![ascent.finish(), grid.finish(), doubling.finish()])
}

fn table1(seed: u64, samples: usize) -> Result<Vec<CheckResult>> {
    let mut rng = rng_from_seed(seed);
    let opts = AscentOptions::default();
    let mut helmholtz = Tally::new("helmholtz_gap_nonnegative", 1e-6);
    let mut replacer_gap = Tally::new("helmholtz_gap_replacer", 1e-6);
    let mut unitary_entropy = Tally::new("unitary_entropy", 1e-5);
    let mut replacer_entropy = Tally::new("replacer_entropy", 1e-5);
    let mut energy = Tally::new("energy_vs_sampling", 1e-6);
    for _ in 0..samples {
        let ctx = random_bath(2, &mut rng);
        let n = random_qubit_channel(&mut rng);
        let report = channel_thermo_report(&n, &ctx)?;
        helmholtz.record((-report.helmholtz_gap).max(0.0));

        let (e, _) = channel_energy(&n, &ctx)?;
        let sampled = energy_by_sampling(&n, ctx.hamiltonian(), 2000, rng.random())?;
        energy.record((e - sampled).abs());

        let sigma = density_matrix_with(2, &mut rng);
        let r = Channel::replacer(&sigma, 2);
        replacer_gap.record(channel_thermo_report(&r, &ctx)?.helmholtz_gap.abs());
        let s = channel_entropy(&r, &opts)?.value;
        replacer_entropy.record((s - vn_entropy(&sigma)).abs());
    }
    for m in [2, 3] {
        let u = Channel::unitary(haar_unitary(m, &mut rng))?;
        let s = channel_entropy(&u, &opts)?.value;
        unitary_entropy.record((s + (m as f64).ln()).abs());
    }
    Ok(vec![
        helmholtz.finish(),
        replacer_gap.finish(),
        unitary_entropy.finish(),
        replacer_entropy.finish(),
        energy.finish(),
    ])
}

fn diamond() -> Result<Vec<CheckResult>> {
    let mut t = Tally::new("diamond_identity_vs_replacer", 1e-5);
    let id = Channel::identity(2);
    let r = Channel::replacer(&DensityMatrix::maximally_mixed(2), 2);
    let value = diamond_norm_of_channels(&id, &r)?;
    t.record((value - 1.5).abs());
    t.note(format!("value {value:.10}, halved {:.10}", value / 2.0));
    Ok(vec![t.finish()])
}

fn oracle(seed: u64, samples: usize) -> Result<Vec<CheckResult>> {
    let mut rng = rng_from_seed(seed);
    let opts = AscentOptions::default();
    let mut ascent = Tally::new("ascent_vs_grid", 1e-4);
    let mut pencil_bound = Tally::new("max_divergence_never_exceeded", 1e-9);
    let mut pencil_reach = Tally::new("max_divergence_reached", 2e-2);
    for _ in 0..samples {
        let ctx = random_bath(2, &mut rng);
        let n = random_qubit_channel(&mut rng);
        let gamma = ctx.gamma().as_hermitian();
        let a = channel_rel_entropy_log(&n, &ctx.log_gamma(), &opts)?.value;
        let g = channel_rel_entropy_bruteforce(
            &n,
            &gamma,
            OracleMode::Grid {
                density: 9,
                polish: true,
            },
        )?
        .value;
        ascent.record((a - g).abs());

        let formula = channel_max_rel_entropy_log(&n, &ctx.log_gamma())?.value;
        let sampled = sampled_max_divergence(&n, &gamma, 10_000, rng.random())?;
        pencil_bound.record((sampled - formula).max(0.0));
        pencil_reach.record((formula - sampled).max(0.0));
    }

    let mut np = Tally::new("neyman_pearson_vs_sdp", 1e-7);
    let mut classical = Tally::new("neyman_pearson_vs_classical", 1e-9);
    for _ in 0..20 {
        let rho = density_matrix_with(2, &mut rng);
        let sigma = density_matrix_with(2, &mut rng);
        let p: Vec<f64> = (0..3).map(|_| rng.random_range(0.05..1.0)).collect();
        let q: Vec<f64> = (0..3).map(|_| rng.random_range(0.05..1.0)).collect();
        let (sp, sq) = (p.iter().sum::<f64>(), q.iter().sum::<f64>());
        let p: Vec<f64> = p.iter().map(|x| x / sp).collect();
        let q: Vec<f64> = q.iter().map(|x| x / sq).collect();
        for eps in [0.0, 0.1, 0.3] {
            let exact = neyman_pearson(rho.matrix(), sigma.matrix(), eps)?.value;
            let sdp = ht_sdp(rho.matrix(), sigma.matrix(), eps)?;
            np.record((exact - sdp).abs());

            let dp = DensityMatrix::diagonal(&p)?;
            let dq = DensityMatrix::diagonal(&q)?;
            let quantum = neyman_pearson(dp.matrix(), dq.matrix(), eps)?.type2;
            classical.record((quantum - classical_type2(&p, &q, eps)).abs());
        }
    }
    Ok(vec![
        ascent.finish(),
        pencil_bound.finish(),
        pencil_reach.finish(),
        np.finish(),
        classical.finish(),
    ])
}
