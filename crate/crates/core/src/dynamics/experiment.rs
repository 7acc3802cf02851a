//! The Zitterbewegung experiment at one central momentum, and the drift
//! check for a candidate clock observable.
//!
//! A mixed-branch and a positive-branch packet share the same envelope and
//! grid; both are evolved exactly and ⟨r̂⟩, ⟨T̂⟩ and ⟨Ĥ_D⟩ are sampled on a
//! uniform grid covering a whole number of expected oscillation periods.

use serde::Serialize;
use std::f64::consts::PI;

use super::heisenberg::HeisenbergOperators;
use super::{expectation_series, zitterbewegung_analysis, EvolutionPlan, TimeSeries, ZitterbewegungFit};
use crate::algebra::DiracAlgebra;
use crate::error::Result;
use crate::grid::{MomentumGrid1D, SpinorWavePacket};
use crate::operators::{
    build_hamiltonian, build_position, build_time_operator, energy_spectrum, mixed_branch_packet, single_branch_packet,
    Branch, GridOperator,
};
use crate::report::VerificationReport;
use crate::table::fmt_float;
use crate::units::ParticleParams;

/// Relative agreement required of the Zitterbewegung frequency.
pub const FREQUENCY_TOL: f64 = 0.01;
/// Smallest mixed-branch oscillation amplitude accepted as "present".
pub const AMPLITUDE_FLOOR: f64 = 1e-3;
/// Largest single-branch / mixed-branch amplitude ratio.
pub const SUPPRESSION_TOL: f64 = 1e-6;
/// Relative agreement required of the ⟨T̂⟩ drift with ⟨I + 2βK̂⟩.
pub const SLOPE_TOL: f64 = 0.01;
/// Relative agreement of the ⟨r̂⟩ drift with c²⟨p⟩/⟨E⟩.
pub const GROUP_VELOCITY_TOL: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZitterbewegungExperiment {
    pub p0: f64,
    pub sigma_p: f64,
    pub n: usize,
    pub box_length: f64,
    /// Span of the series in units of the expected period πħ/E(p₀).
    pub periods: f64,
    pub samples: usize,
}

impl ZitterbewegungExperiment {
    pub fn new(p0: f64) -> Self {
        Self {
            p0,
            sigma_p: 0.02,
            n: 2048,
            box_length: 2048.0,
            periods: 12.0,
            samples: 512,
        }
    }

    /// 2E(p₀)/ħ.
    pub fn expected_frequency(&self, params: &ParticleParams) -> f64 {
        2.0 * energy_spectrum(self.p0, params).magnitude() / params.hbar()
    }

    pub fn span(&self, params: &ParticleParams) -> f64 {
        self.periods * 2.0 * PI / self.expected_frequency(params)
    }

    pub fn run(&self, params: &ParticleParams, algebra: &DiracAlgebra) -> Result<ZitterbewegungOutcome> {
        let grid = MomentumGrid1D::with_box(self.n, self.box_length, self.p0, params.hbar())?;
        let observables = vec![
            build_position(&grid),
            build_time_operator(&grid, params, algebra),
            build_hamiltonian(&grid, params, algebra),
        ];
        let span = self.span(params);
        let omega = self.expected_frequency(params);
        let run = |packet: SpinorWavePacket| -> Result<(TimeSeries, ZitterbewegungFit, ZitterbewegungFit)> {
            let plan = EvolutionPlan::uniform(span, self.samples, packet, observables.clone())?;
            let ts = expectation_series(&plan, params, algebra)?;
            let r = zitterbewegung_analysis(&ts.t, ts.get("r").expect("r tracked"), Some(omega))?;
            let t = zitterbewegung_analysis(&ts.t, ts.get("T").expect("T tracked"), Some(omega))?;
            Ok((ts, r, t))
        };
        let mixed = mixed_branch_packet(&grid, params, algebra, self.p0, self.sigma_p, 0.0, 0.5)?;
        let single = single_branch_packet(&grid, params, algebra, self.p0, self.sigma_p, 0.0, Branch::Positive)?;

        let ops = HeisenbergOperators::axial(&grid, params, algebra);
        let slope_prediction = single.expectation_of(&ops.slope.apply(single.amplitudes()));
        let mean_energy = single.expectation_of(&observables[2].apply(single.amplitudes()));
        let group_velocity = params.c().powi(2) * single.mean_momentum() / mean_energy;
        let mut warnings = mixed.support_warnings();
        warnings.extend(single.support_warnings());

        let (mixed_series, mixed_r, mixed_t) = run(mixed)?;
        let (single_series, single_r, single_t) = run(single)?;
        Ok(ZitterbewegungOutcome {
            setup: *self,
            expected_frequency: omega,
            mixed_r,
            mixed_t,
            single_r,
            single_t,
            slope_prediction,
            group_velocity,
            mixed_series,
            single_series,
            warnings,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ZitterbewegungOutcome {
    pub setup: ZitterbewegungExperiment,
    pub expected_frequency: f64,
    pub mixed_r: ZitterbewegungFit,
    pub mixed_t: ZitterbewegungFit,
    pub single_r: ZitterbewegungFit,
    pub single_t: ZitterbewegungFit,
    /// ⟨I + 2βK̂⟩ on the positive-branch packet.
    pub slope_prediction: f64,
    /// c²⟨p⟩/⟨E⟩ on the positive-branch packet.
    pub group_velocity: f64,
    #[serde(skip)]
    pub mixed_series: TimeSeries,
    #[serde(skip)]
    pub single_series: TimeSeries,
    pub warnings: Vec<String>,
}

fn relative(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}

impl ZitterbewegungOutcome {
    pub fn report(&self) -> VerificationReport {
        let mut rep = VerificationReport::new(
            format!("zitterbewegung p0={}", fmt_float(self.setup.p0)),
            "zitterbewegung-drift-and-oscillation",
        );
        rep.push("frequency = 2E/hbar", relative(self.mixed_r.oscillation_frequency, self.expected_frequency), FREQUENCY_TOL);
        rep.push_flag("mixed <r> amplitude above floor", self.mixed_r.oscillation_amplitude > AMPLITUDE_FLOOR);
        rep.push_flag("mixed <T> amplitude above floor", self.mixed_t.oscillation_amplitude > AMPLITUDE_FLOOR);
        rep.push(
            "single-branch <r> suppression",
            self.single_r.oscillation_amplitude / self.mixed_r.oscillation_amplitude,
            SUPPRESSION_TOL,
        );
        rep.push(
            "single-branch <T> suppression",
            self.single_t.oscillation_amplitude / self.mixed_t.oscillation_amplitude,
            SUPPRESSION_TOL,
        );
        rep.push("<T> slope vs <I + 2bK>", relative(self.single_t.slope, self.slope_prediction), SLOPE_TOL);
        rep.push("<r> slope vs c^2<p>/<E>", relative(self.single_r.slope, self.group_velocity), GROUP_VELOCITY_TOL);
        rep.measure("p0", self.setup.p0);
        rep.measure("expected frequency", self.expected_frequency);
        rep.measure("fitted frequency", self.mixed_r.oscillation_frequency);
        rep.measure("mixed <r> amplitude", self.mixed_r.oscillation_amplitude);
        rep.measure("single <r> amplitude", self.single_r.oscillation_amplitude);
        rep.measure("<T> slope", self.single_t.slope);
        rep.measure("<I + 2bK>", self.slope_prediction);
        rep.measure("<r> slope", self.single_r.slope);
        rep.measure("c^2<p>/<E>", self.group_velocity);
        for w in &self.warnings {
            rep.warn(w.clone());
        }
        rep
    }
}

/// Fits the drift of ⟨clock⟩(t) along the exact evolution of `packet` and
/// compares it with ⟨I + 2βK̂⟩ on the packet.
pub fn clock_slope_check(
    clock: &GridOperator,
    packet: &SpinorWavePacket,
    params: &ParticleParams,
    algebra: &DiracAlgebra,
    span: f64,
    samples: usize,
    tol: f64,
) -> Result<VerificationReport> {
    let plan = EvolutionPlan::uniform(span, samples, packet.clone(), vec![clock.clone()])?;
    let ts = expectation_series(&plan, params, algebra)?;
    let fit = zitterbewegung_analysis(&ts.t, &ts.values[0], None)?;
    let ops = HeisenbergOperators::axial(packet.grid(), params, algebra);
    let want = packet.expectation_of(&ops.slope.apply(packet.amplitudes()));
    let mut rep = VerificationReport::new("clock-slope", "intrinsic-time-drift");
    rep.push(format!("<{}> slope vs <I + 2bK>", clock.label()), relative(fit.slope, want), tol);
    rep.measure("fitted slope", fit.slope);
    rep.measure("<I + 2bK>", want);
    Ok(rep)
}
