//! The scenario catalog: each entry wires library calls to a configuration
//! and returns gating reports plus data artifacts.

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::config::RunConfig;
use crate::algebra::verify_clifford;
use crate::dynamics::{
    balanced_cube, boost_check, ehrenfest_check_heisenberg, translate_check, verify_heisenberg_3d, ZitterbewegungExperiment,
};
use crate::emergence::{emergence_fidelity_sweep, sigma_x, sigma_z, Coupling, EmergenceModel};
use crate::error::{Error, Result};
use crate::grid::{diff_norm, norm, MomentumGrid1D};
use crate::operators::{
    branch_projector, build_hamiltonian, build_time_operator, compare_with_closed_form, dense_eigenvalues,
    energy_branch_spectrum, mixed_branch_packet, random_smooth_packets, single_branch_packet, time_branch_spectrum,
    verify_quadratic_constraints, write_binary_dump, Branch, OperatorKind, ProjectorRoute, TimeEigenbasis,
};
use crate::operators::grid3d::{random_smooth_fields_3d, verify_quadratic_constraints_3d};
use crate::paw::{
    build_rabi_clock, clock_conditioned_series, condition_on_intrinsic_time, conditional_distribution, even_readings,
    rabi_oracle, rabi_oracle_error, verify_clock_requirements, ClockCandidate, GridProjectorFamily, Projector,
    ProjectorFamily, CONSTRAINT_TOL,
};
use crate::report::VerificationReport;
use crate::table::{fmt_float, Csv};
use crate::units::ParticleParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ScenarioInfo {
    pub name: &'static str,
    /// Topical anchor naming the relation the scenario exercises.
    pub anchor: &'static str,
    pub description: &'static str,
}

/// Every runnable scenario, in the order `all` executes them: algebra
/// first, then spectra and representations, dynamics, clocks, emergence.
pub const SCENARIOS: [ScenarioInfo; 13] = [
    ScenarioInfo {
        name: "verify-algebra",
        anchor: "clifford-algebra",
        description: "anticommutators, Hermiticity and beta^2 = I for the chosen representation",
    },
    ScenarioInfo {
        name: "verify-constraints",
        anchor: "quadratic-invariants",
        description: "H_D^2 = c^2p^2 + m0^2c^4 and (cT)^2 = r^2 + (c tau0)^2 on 1-D and 3-D grids",
    },
    ScenarioInfo {
        name: "spectrum",
        anchor: "branch-spectra-and-gap-product",
        description: "dense spectra of H_D and T against the closed forms; gap product 4h",
    },
    ScenarioInfo {
        name: "time-rep",
        anchor: "time-eigenbasis",
        description: "a packet expanded in the T eigenbasis and back; projector routes agree",
    },
    ScenarioInfo {
        name: "heisenberg-check",
        anchor: "time-operator-heisenberg-equation",
        description: "dT/dt = I + 2bK + (2b/i hbar)(tau0 H_D - m0c^2 T) on the axial line",
    },
    ScenarioInfo {
        name: "heisenberg-3d",
        anchor: "time-operator-heisenberg-equation",
        description: "the same operator identity with spin-orbit K on a small 3-D cube",
    },
    ScenarioInfo {
        name: "zbw",
        anchor: "zitterbewegung-drift-and-oscillation",
        description: "mixed-branch oscillation at 2E/hbar, single-branch suppression, <T> drift",
    },
    ScenarioInfo {
        name: "boost",
        anchor: "time-generator-shifts-momentum",
        description: "exp(-i de T/hbar) shifts momentum by (de/c^2) v_gp",
    },
    ScenarioInfo {
        name: "translate",
        anchor: "hamiltonian-generator-shifts-position",
        description: "exp(i dt H_D/hbar) shifts position by v_gp dt",
    },
    ScenarioInfo {
        name: "paw-clock",
        anchor: "conditional-probability-clock",
        description: "ideal clock + qubit history state against the Rabi formula",
    },
    ScenarioInfo {
        name: "paw-joint",
        anchor: "joint-time-and-spin-distribution",
        description: "P{t_nu, b} over T eigenvalues and a commuting spin family",
    },
    ScenarioInfo {
        name: "paw-requirements",
        anchor: "page-wootters-clock-requirements",
        description: "clock requirements (i)-(iv) for T and two control observables",
    },
    ScenarioInfo {
        name: "emergence",
        anchor: "time-from-a-static-state",
        description: "emergent vs reference TDSE infidelity over an environment-mass ladder",
    },
];

/// Runs the whole catalog.
pub const ALL: ScenarioInfo = ScenarioInfo {
    name: "all",
    anchor: "full-suite",
    description: "every scenario above, in order",
};

pub fn list_scenarios() -> &'static [ScenarioInfo] {
    &SCENARIOS
}

/// Expands a scenario name (or `all`) into catalog entries.
pub fn resolve(name: &str) -> Result<Vec<&'static ScenarioInfo>> {
    if name == ALL.name {
        return Ok(SCENARIOS.iter().collect());
    }
    if let Some(s) = SCENARIOS.iter().find(|s| s.name == name) {
        return Ok(vec![s]);
    }
    let nearest = SCENARIOS
        .iter()
        .map(|s| s.name)
        .chain([ALL.name])
        .map(|c| (strsim::jaro_winkler(name, c), c))
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, c)| c)
        .unwrap_or(ALL.name);
    Err(Error::Config(format!("unknown scenario `{name}`; did you mean `{nearest}`?")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: Vec<u8>,
}

impl Artifact {
    fn text(name: impl Into<String>, contents: String) -> Self {
        Self {
            name: name.into(),
            contents: contents.into_bytes(),
        }
    }

    fn json<T: Serialize>(name: impl Into<String>, value: &T) -> Self {
        Self::text(name, to_sorted_json(value))
    }
}

/// Pretty JSON with keys sorted (serde_json maps are ordered).
pub fn to_sorted_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("serializable");
    let mut s = serde_json::to_string_pretty(&v).expect("serializable");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Default)]
pub struct ScenarioOutput {
    /// Reports that decide the exit status.
    pub reports: Vec<VerificationReport>,
    pub artifacts: Vec<Artifact>,
}

impl ScenarioOutput {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(VerificationReport::passed)
    }
}

pub fn run_scenario(info: &ScenarioInfo, config: &RunConfig, binary_dumps: bool) -> Result<ScenarioOutput> {
    match info.name {
        "verify-algebra" => verify_algebra(config),
        "verify-constraints" => verify_constraints(config),
        "spectrum" => spectrum(config, binary_dumps),
        "time-rep" => time_rep(config),
        "heisenberg-check" => heisenberg_check(config),
        "heisenberg-3d" => heisenberg_3d(config),
        "zbw" => zbw(config),
        "boost" => boost(config),
        "translate" => translate(config),
        "paw-clock" => paw_clock(config),
        "paw-joint" => paw_joint(config),
        "paw-requirements" => paw_requirements(config),
        "emergence" => emergence(config),
        other => resolve(other).map(|_| ScenarioOutput::default()),
    }
}

fn single(report: VerificationReport, artifacts: Vec<Artifact>) -> ScenarioOutput {
    ScenarioOutput {
        reports: vec![report],
        artifacts,
    }
}

fn verify_algebra(config: &RunConfig) -> Result<ScenarioOutput> {
    let rep = verify_clifford(&config.algebra()?, 1e-12);
    Ok(single(rep, vec![]))
}

fn verify_constraints(config: &RunConfig) -> Result<ScenarioOutput> {
    let (params, alg, grid) = (config.params()?, config.algebra()?, config.grid()?);
    let packets = random_smooth_packets(&grid, config.constraints.fields, config.seed);
    let one_d = verify_quadratic_constraints(&grid, &params, &alg, &packets, 1e-10);
    let cube = balanced_cube(config.constraints.edge, params.hbar())?;
    let fields = random_smooth_fields_3d(&cube, config.constraints.fields, config.seed, false);
    let three_d = verify_quadratic_constraints_3d(&cube, &params, &alg, &fields, 1e-8);
    Ok(ScenarioOutput {
        reports: vec![one_d, three_d],
        artifacts: vec![],
    })
}

/// Largest negative and smallest positive eigenvalue.
fn gap(values: &[f64]) -> f64 {
    let below = values.iter().copied().filter(|v| *v < 0.0).fold(f64::NEG_INFINITY, f64::max);
    let above = values.iter().copied().filter(|v| *v > 0.0).fold(f64::INFINITY, f64::min);
    above - below
}

fn spectrum(config: &RunConfig, binary_dumps: bool) -> Result<ScenarioOutput> {
    let (alg, grid) = (config.algebra()?, config.grid()?);
    let mut out = ScenarioOutput::default();
    for &m0 in &config.spectrum.masses {
        let params = ParticleParams::new(m0, config.constants()?)?;
        let tag = fmt_float(m0);
        let energies = dense_eigenvalues(&grid, &params, &alg, false)?;
        let times = dense_eigenvalues(&grid, &params, &alg, true)?;
        let e_spec = energy_branch_spectrum(&grid, &params);
        let t_spec = time_branch_spectrum(&grid, &params);
        let e_cmp = compare_with_closed_form(&energies, &e_spec);
        let t_cmp = compare_with_closed_form(&times, &t_spec);

        let mut rep = VerificationReport::new(format!("spectrum m0={tag}"), "branch-spectra-and-gap-product");
        rep.push("H_D eigenvalues (relative)", e_cmp.max_relative_error, 1e-10);
        rep.push("T eigenvalues (relative)", t_cmp.max_relative_error, 1e-8);
        rep.push_flag("H_D degeneracy matches closed form", e_cmp.degeneracy_matches && e_cmp.paired);
        rep.push_flag("T degeneracy matches closed form", t_cmp.degeneracy_matches && t_cmp.paired);
        let h = params.constants.h();
        let product = gap(&energies) * gap(&times);
        rep.push("gap product = 4h (relative)", ((product - 4.0 * h) / (4.0 * h)).abs(), 1e-12);
        rep.measure("m0", m0);
        rep.measure("energy gap", gap(&energies));
        rep.measure("time gap", gap(&times));
        out.reports.push(rep);

        let mut csv = Csv::new(&["index", "energy", "time"]);
        for (i, (e, t)) in energies.iter().zip(&times).enumerate() {
            csv.row_f64(&[i as f64, *e, *t]);
        }
        out.artifacts.push(Artifact::text(format!("eigenvalues_m0={tag}.csv"), csv.finish()));
        out.artifacts.push(Artifact::text(format!("energy_branches_m0={tag}.csv"), e_spec.to_csv()));
        out.artifacts.push(Artifact::text(format!("time_branches_m0={tag}.csv"), t_spec.to_csv()));
        if binary_dumps {
            let mut bytes = Vec::new();
            write_binary_dump(&build_hamiltonian(&grid, &params, &alg).dense()?, &mut bytes)?;
            out.artifacts.push(Artifact {
                name: format!("hamiltonian_m0={tag}.bin"),
                contents: bytes,
            });
        }
    }
    Ok(out)
}

fn mixed_packet(config: &RunConfig, grid: &MomentumGrid1D, params: &ParticleParams) -> Result<crate::grid::SpinorWavePacket> {
    let p = &config.packet;
    mixed_branch_packet(grid, params, &config.algebra()?, p.p0, p.sigma_p, 0.0, p.weight)
}

fn time_rep(config: &RunConfig) -> Result<ScenarioOutput> {
    let (params, alg, grid) = (config.params()?, config.algebra()?, config.grid()?);
    let packet = mixed_packet(config, &grid, &params)?;
    let t_op = build_time_operator(&grid, &params, &alg);
    let basis = TimeEigenbasis::new(&grid, &t_op)?;
    let coefficients = basis.transform(&packet)?;
    let back = basis.reconstruct(&coefficients)?;

    let mut rep = VerificationReport::new("time-representation", "time-eigenbasis");
    rep.push(
        "round trip (relative)",
        diff_norm(&back, packet.amplitudes()) / norm(packet.amplitudes()),
        1e-10,
    );
    let weight: f64 = coefficients.iter().map(|c| c.norm_sqr()).sum();
    rep.push("coefficient norm", (weight - 1.0).abs(), 1e-10);
    let direct = packet.expectation_of(&t_op.apply(packet.amplitudes()));
    rep.push("<T> in its own basis", (basis.expectation(&coefficients) - direct).abs(), 1e-8);

    // The positive-time projector through two independent routes.
    let route = |r| branch_projector(&grid, &params, &alg, OperatorKind::Time, Branch::Positive, r);
    let blockwise = route(ProjectorRoute::Blockwise)?.apply(packet.amplitudes());
    let dense = route(ProjectorRoute::Dense)?.apply(packet.amplitudes());
    rep.push("P+[T] blockwise vs dense", diff_norm(&blockwise, &dense) / norm(packet.amplitudes()), 1e-10);
    let clusters = basis.cluster_weights(&coefficients);
    let positive: f64 = clusters
        .iter()
        .filter(|(c, _)| basis.values()[c.start] > 0.0)
        .map(|(_, w)| w)
        .sum();
    let projected = crate::grid::norm_sqr(&blockwise) * grid.dp();
    rep.push("positive-time weight vs ||P+ psi||^2", (positive - projected).abs(), 1e-10);
    rep.measure("<T>", direct);
    rep.measure("positive-time weight", positive);

    let mut csv = Csv::new(&["t_nu", "multiplicity", "weight"]);
    for (c, w) in &clusters {
        csv.row_f64(&[basis.values()[c.start], c.len as f64, *w]);
    }
    Ok(single(rep, vec![Artifact::text("time_clusters.csv", csv.finish())]))
}

fn heisenberg_check(config: &RunConfig) -> Result<ScenarioOutput> {
    let (params, grid) = (config.params()?, config.grid()?);
    let packet = mixed_packet(config, &grid, &params)?;
    let rep = ehrenfest_check_heisenberg(&packet, &params, &config.algebra()?, 1e-8, false);
    Ok(single(rep, vec![]))
}

fn heisenberg_3d(config: &RunConfig) -> Result<ScenarioOutput> {
    let c = &config.heisenberg_3d;
    let rep = verify_heisenberg_3d(c.edge, &config.params()?, &config.algebra()?, c.fields, config.seed, 1e-7)?;
    Ok(single(rep, vec![]))
}

fn zbw(config: &RunConfig) -> Result<ScenarioOutput> {
    let (params, alg) = (config.params()?, config.algebra()?);
    let z = &config.zbw;
    let mut out = ScenarioOutput::default();
    for &p0 in &z.p0 {
        let experiment = ZitterbewegungExperiment {
            p0,
            sigma_p: z.sigma_p,
            n: z.n,
            box_length: z.box_length,
            periods: z.periods,
            samples: z.samples,
        };
        let outcome = experiment.run(&params, &alg)?;
        let tag = fmt_float(p0);
        out.reports.push(outcome.report());
        out.artifacts.push(Artifact::text(format!("zbw_p0={tag}_mixed.csv"), outcome.mixed_series.to_csv()));
        out.artifacts.push(Artifact::text(format!("zbw_p0={tag}_single.csv"), outcome.single_series.to_csv()));
        out.artifacts.push(Artifact::json(format!("zbw_p0={tag}_analysis.json"), &outcome));
    }
    Ok(out)
}

fn boost(config: &RunConfig) -> Result<ScenarioOutput> {
    let (params, alg) = (config.params()?, config.algebra()?);
    let b = &config.boost;
    let grid = MomentumGrid1D::with_box(b.n, b.box_length, b.p0, params.hbar())?;
    let packet = single_branch_packet(&grid, &params, &alg, b.p0, b.sigma_p, 0.0, Branch::Positive)?;
    let m = boost_check(&packet, &params, &alg, b.delta_eps)?;
    let mut rep = VerificationReport::new("boost", "time-generator-shifts-momentum");
    rep.push("momentum shift vs (de/c^2) v_gp", m.displacement_rel_error, 0.005);
    rep.push("energy change vs E(p+dp) - E(p)", m.energy_rel_error, 0.01);
    rep.push("unitarity", m.unitarity_defect, 1e-10);
    rep.measure("v_gp", m.group_velocity);
    for w in &m.warnings {
        rep.warn(w.clone());
    }
    Ok(single(rep, vec![Artifact::json("boost.json", &m)]))
}

fn translate(config: &RunConfig) -> Result<ScenarioOutput> {
    let (params, alg) = (config.params()?, config.algebra()?);
    let t = &config.translate;
    let grid = MomentumGrid1D::with_box(t.n, t.box_length, t.p0, params.hbar())?;
    let packet = single_branch_packet(&grid, &params, &alg, t.p0, t.sigma_p, 0.0, Branch::Positive)?;
    let m = translate_check(&packet, &params, &alg, t.delta_t)?;
    let mut rep = VerificationReport::new("translate", "hamiltonian-generator-shifts-position");
    rep.push("position shift vs v_gp dt", m.displacement_rel_error, 0.005);
    rep.push("overlap with rigid shift", 1.0 - m.translation_overlap, 1e-3);
    rep.measure("v_gp", m.group_velocity);
    for w in &m.warnings {
        rep.warn(w.clone());
    }
    Ok(single(rep, vec![Artifact::json("translate.json", &m)]))
}

fn paw_clock(config: &RunConfig) -> Result<ScenarioOutput> {
    let p = &config.paw;
    let model = build_rabi_clock(p.clock_points, p.omega, p.cycles, config.constants()?)?;
    let mut rep = VerificationReport::new("paw-clock", "conditional-probability-clock");
    rep.push("history-state constraint", model.constraint_residual(), CONSTRAINT_TOL);
    rep.push(
        format!("Rabi oracle over {} readings", p.readings),
        rabi_oracle_error(&model, p.omega, p.readings)?,
        1e-6,
    );
    let levels = ProjectorFamily::system_levels(&model);
    let readings = even_readings(&model, p.readings);
    let worst_total = readings
        .iter()
        .map(|&k| {
            conditional_distribution(&model, &levels, &Projector::clock_reading(&model, k))
                .map(|d| (d.iter().sum::<f64>() - 1.0).abs())
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    rep.push("conditional distribution sums to 1", worst_total, 1e-12);
    rep.measure("clock points", p.clock_points as f64);

    let series = clock_conditioned_series(&model, &Projector::system_level(&model, 1), &readings)?;
    let mut csv = Csv::new(&["t", "p_flipped", "oracle"]);
    for (t, prob) in series {
        csv.row_f64(&[t, prob, rabi_oracle(p.omega, t)]);
    }
    Ok(single(rep, vec![Artifact::text("paw_clock.csv", csv.finish())]))
}

fn paw_joint(config: &RunConfig) -> Result<ScenarioOutput> {
    let (params, alg, grid) = (config.params()?, config.algebra()?, config.grid()?);
    let packet = mixed_packet(config, &grid, &params)?;
    let t_op = build_time_operator(&grid, &params, &alg);
    let joint = condition_on_intrinsic_time(&packet, &t_op, &GridProjectorFamily::spin(&grid, &alg))?;
    let direct = packet.expectation_of(&t_op.apply(packet.amplitudes()));
    let mut rep = VerificationReport::new("paw-joint", "joint-time-and-spin-distribution");
    rep.push("normalization", (joint.total() - 1.0).abs(), 1e-10);
    rep.push("first moment vs <T>", (joint.mean_time() - direct).abs(), 1e-8);
    rep.measure("<T>", direct);
    rep.measure("spin-up marginal", joint.marginal("spin-up"));
    Ok(single(rep, vec![Artifact::text("joint_distribution.csv", joint.to_csv())]))
}

fn paw_requirements(config: &RunConfig) -> Result<ScenarioOutput> {
    let (params, alg, grid) = (config.params()?, config.algebra()?, config.grid()?);
    let intrinsic = verify_clock_requirements(ClockCandidate::IntrinsicTime, &grid, &params, &alg)?;
    let energy = verify_clock_requirements(ClockCandidate::ScaledEnergy, &grid, &params, &alg)?;
    let rest = verify_clock_requirements(ClockCandidate::RestTime, &grid, &params, &alg)?;
    let fails = |r: &VerificationReport, tag: &str| r.checks.iter().any(|c| c.name.starts_with(tag) && !c.passed);

    let mut controls = VerificationReport::new("clock-controls", "page-wootters-clock-requirements");
    controls.push_flag("tau0 H/(m0c^2) fails (iii)", fails(&energy, "(iii)"));
    controls.push_flag("b tau0 fails (iv)", fails(&rest, "(iv)"));
    let artifacts = vec![
        Artifact::json("requirements_intrinsic_time.json", &intrinsic),
        Artifact::json("requirements_scaled_energy.json", &energy),
        Artifact::json("requirements_rest_time.json", &rest),
    ];
    Ok(ScenarioOutput {
        reports: vec![intrinsic, controls],
        artifacts,
    })
}

/// The configured emergence model at the first mass of the ladder.
pub fn emergence_model(config: &RunConfig) -> EmergenceModel {
    let e = &config.emergence;
    let mut model = EmergenceModel::qubit_default(e.masses[0]);
    model.h_sys0 = sigma_z() * C64::new(0.5 * e.splitting, 0.0);
    model.coupling = Coupling::gaussian(e.coupling, e.coupling_center, e.coupling_width, sigma_x());
    model.window = (e.window[0], e.window[1]);
    model.velocity = e.velocity;
    model.hbar = config.units.hbar;
    model.points_per_wavelength = e.points_per_wavelength;
    model.samples = e.samples;
    model.refresh_energy();
    model
}

fn emergence(config: &RunConfig) -> Result<ScenarioOutput> {
    let table = emergence_fidelity_sweep(&emergence_model(config), &config.emergence.masses)?;
    let mut artifacts = vec![Artifact::text("fidelity.csv", table.to_csv())];
    if let Some(last) = table.rows.last() {
        let tag = fmt_float(last.mass);
        artifacts.push(Artifact::text(format!("emergent_M={tag}.csv"), last.emergent.to_csv()));
        artifacts.push(Artifact::text(format!("reference_M={tag}.csv"), last.reference.to_csv()));
    }
    Ok(single(table.report(), artifacts))
}
