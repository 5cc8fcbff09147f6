"""Two-node network primitives: state transfer, entanglement, swap, photon source.

Each operation composes the same pipeline: synthesize the sending control,
forward-simulate node 1, propagate the emitted packet through a lossless
delay channel, synthesize the receiving control for the *full* (unit-photon)
arriving envelope, and forward-simulate node 2 with the actual arriving
field.  Because the one-excitation dynamics are linear, a single
unit-amplitude run determines the outcome for any qubit coefficients.

Fidelities are overlaps with the unnormalized final state, so channel and
emitter losses directly reduce them; a renormalized variant is kept as a
diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    FIELD,
    ComplexSignal,
    PhysicalParams,
    QubitAmplitudes,
    TimeGrid,
    l2_photon_norm,
)
from .dynamics import InitialState, Trajectory, simulate
from .errors import ConsistencyError, GridError, UnrealizableWavepacket
from .synthesis import (
    SynthesisResult,
    full_transfer_fraction,
    max_emission_fraction,
    synth_receive,
    synth_send,
)
from .wavepacket import (
    GaussianSpec,
    delay,
    gaussian_packet,
    scale_to_photon_number,
    standard_grid,
    validate_packet,
)

BUDGET_TOL = 1e-4


@dataclass(frozen=True)
class TransferSpec:
    """One directed transfer: qubit, packet shape, channel delay, node params.

    packet is either a GaussianSpec (grid defaults to +-6 widths, 8192
    samples) or a custom unit-shape ComplexSignal; s is the emitted photon
    number and defaults to the sending node's full-transfer fraction.
    """

    qubit: QubitAmplitudes
    packet: GaussianSpec | ComplexSignal
    node1: PhysicalParams
    node2: PhysicalParams
    tau: float = 0.0
    s: float | None = None
    grid: TimeGrid | None = None

    def __post_init__(self):
        if self.tau < 0:
            raise GridError(f"propagation delay must be >= 0, got {self.tau}")


@dataclass(frozen=True)
class TwoNodeResult:
    """Joint-state coefficients and probability budget of a two-node operation.

    a_gg multiplies |g,g>|vac>, a_sg keeps the excitation at node 1, a_gs
    stores it at node 2.  fidelity_renormalized is the overlap fidelity of
    the final state restricted to the emitter sector and renormalized
    (diagnostic only; not part of the serialized schema).
    """

    a_gg: complex
    a_sg: complex
    a_gs: complex
    loss_probability: float
    residual_photon_norm: float
    fidelity_overlap: float
    fidelity_efficiency: float
    fidelity_renormalized: float

    def __post_init__(self):
        budget = (
            abs(self.a_gg) ** 2
            + abs(self.a_sg) ** 2
            + abs(self.a_gs) ** 2
            + self.loss_probability
            + self.residual_photon_norm
        )
        if abs(budget - 1.0) > BUDGET_TOL:
            raise ConsistencyError(
                f"probability budget sums to {budget!r}, expected 1 +- {BUDGET_TOL:g}"
            )

    def to_dict(self) -> dict:
        return {
            "a_gg": [self.a_gg.real, self.a_gg.imag],
            "a_sg": [self.a_sg.real, self.a_sg.imag],
            "a_gs": [self.a_gs.real, self.a_gs.imag],
            "loss_probability": self.loss_probability,
            "residual_photon_norm": self.residual_photon_norm,
            "fidelity_overlap": self.fidelity_overlap,
            "fidelity_efficiency": self.fidelity_efficiency,
        }


@dataclass(frozen=True)
class TransferRun:
    """Full pipeline record behind a TwoNodeResult (for CSV emission/tests)."""

    target: ComplexSignal
    synth1: SynthesisResult
    traj1: Trajectory
    arriving: ComplexSignal
    synth2: SynthesisResult
    traj2: Trajectory
    result: TwoNodeResult


def transfer(
    spec: TransferSpec,
    sim_params1: PhysicalParams | None = None,
    sim_params2: PhysicalParams | None = None,
    omega1_scale: float = 1.0,
    omega2_scale: float = 1.0,
) -> TwoNodeResult:
    """Map the qubit at node 1 onto node 2 through the plasmon channel.

    The sim_params/omega_scale hooks run the forward simulations with
    perturbed parameters or rescaled controls while the synthesis stays
    nominal; the sensitivity module uses them to model unknown errors.
    """
    return run_transfer(spec, sim_params1, sim_params2, omega1_scale, omega2_scale).result


def run_transfer(
    spec: TransferSpec,
    sim_params1: PhysicalParams | None = None,
    sim_params2: PhysicalParams | None = None,
    omega1_scale: float = 1.0,
    omega2_scale: float = 1.0,
) -> TransferRun:
    """transfer(), but returning the full pipeline record."""
    target = _resolve_packet(spec.packet, spec.node1, spec.grid)
    s = spec.s if spec.s is not None else full_transfer_fraction(spec.node1)
    synth1, traj1, arriving, synth2, traj2 = _one_excitation_pipeline(
        spec.node1, spec.node2, target, s, spec.tau,
        sim_params1, sim_params2, omega1_scale, omega2_scale,
    )

    alpha_g = complex(spec.qubit.alpha_g)
    alpha_s = complex(spec.qubit.alpha_s)
    bs1 = complex(traj1.beta_s.samples[-1])
    bs2 = complex(traj2.beta_s.samples[-1])
    a_gg = alpha_g
    a_sg = alpha_s * bs1
    a_gs = alpha_s * bs2
    weight = abs(alpha_s) ** 2
    loss = weight * (traj1.loss_integral + traj2.loss_integral)
    residual = weight * _unabsorbed(traj1, traj2, spec.node2.c)

    overlap_amp = np.conj(alpha_g) * a_gg + np.conj(alpha_s) * a_gs
    fidelity = float(abs(overlap_amp) ** 2)
    emitter_sector = abs(a_gg) ** 2 + abs(a_sg) ** 2 + abs(a_gs) ** 2
    result = TwoNodeResult(
        a_gg=a_gg,
        a_sg=a_sg,
        a_gs=a_gs,
        loss_probability=loss,
        residual_photon_norm=residual,
        fidelity_overlap=fidelity,
        fidelity_efficiency=float(abs(bs2) ** 2),
        fidelity_renormalized=float(fidelity / emitter_sector),
    )
    return TransferRun(target, synth1, traj1, arriving, synth2, traj2, result)


def entangle(
    node1: PhysicalParams,
    node2: PhysicalParams,
    packet: GaussianSpec | ComplexSignal,
    tau: float = 0.0,
    s: float = 0.5,
    grid: TimeGrid | None = None,
) -> TwoNodeResult:
    """Partial-cycle send plus full receive, targeting (|s,g> + |g,s>)/sqrt(2).

    s = 1/2 is the balance point where the population kept at node 1,
    1 - (1 + 1/P) s, equals the population stored at node 2, (1 - 1/P) s.
    """
    return run_entangle(node1, node2, packet, tau, s, grid).result


def run_entangle(
    node1: PhysicalParams,
    node2: PhysicalParams,
    packet: GaussianSpec | ComplexSignal,
    tau: float = 0.0,
    s: float = 0.5,
    grid: TimeGrid | None = None,
) -> TransferRun:
    """entangle(), but returning the full pipeline record."""
    if not 0.0 < s <= full_transfer_fraction(node1):
        raise UnrealizableWavepacket(
            f"entanglement fraction s={s!r} outside (0, "
            f"{max_emission_fraction(node1)!r})"
        )
    target = _resolve_packet(packet, node1, grid)
    synth1, traj1, arriving, synth2, traj2 = _one_excitation_pipeline(
        node1, node2, target, s, tau, None, None, 1.0, 1.0
    )
    a_sg = complex(traj1.beta_s.samples[-1])
    a_gs = complex(traj2.beta_s.samples[-1])
    loss = traj1.loss_integral + traj2.loss_integral
    residual = _unabsorbed(traj1, traj2, node2.c)
    overlap_amp = (a_sg + a_gs) / np.sqrt(2.0)
    fidelity = float(abs(overlap_amp) ** 2)
    sector = abs(a_sg) ** 2 + abs(a_gs) ** 2
    result = TwoNodeResult(
        a_gg=0.0,
        a_sg=a_sg,
        a_gs=a_gs,
        loss_probability=loss,
        residual_photon_norm=residual,
        fidelity_overlap=fidelity,
        fidelity_efficiency=float(abs(a_gs) ** 2),
        fidelity_renormalized=float(fidelity / sector),
    )
    return TransferRun(target, synth1, traj1, arriving, synth2, traj2, result)


def swap(spec1: TransferSpec, spec2: TransferSpec) -> tuple[TwoNodeResult, TwoNodeResult]:
    """Two opposite-direction transfers on independent, non-interacting channels."""
    return transfer(spec1), transfer(spec2)


def photon_source(
    params: PhysicalParams,
    packet: GaussianSpec | ComplexSignal,
    s: float | None = None,
    grid: TimeGrid | None = None,
) -> tuple[ComplexSignal, ComplexSignal]:
    """Deterministic single-photon source: verified control and emitted field.

    The emitter starts in |s>; the returned field carries photon number s
    (default: the full-transfer fraction) with the requested shape.
    """
    target = _resolve_packet(packet, params, grid)
    synth = synth_send(params, target, s)
    traj = simulate(
        params,
        synth.omega,
        ComplexSignal.zeros(target.grid, FIELD),
        InitialState(beta_e0=0.0, beta_s0=1.0),
    )
    return synth.omega, traj.e_out


def _one_excitation_pipeline(
    node1, node2, target, s, tau, sim_params1, sim_params2, omega1_scale, omega2_scale
):
    """Unit-amplitude send -> channel -> receive chain shared by all operations.

    Both controls are designed under the nominal parameters: node 2's control
    comes from the arriving envelope a *nominal* node 1 would emit, scaled to
    a whole photon, whatever fraction actually arrives.  Perturbed sim_params
    or omega scales affect only the forward simulations, as unknown errors
    would.
    """
    grid = target.grid
    synth1 = synth_send(node1, target, s)
    omega1 = synth1.omega if omega1_scale == 1.0 else synth1.omega.scaled(omega1_scale)
    vacuum_in = ComplexSignal.zeros(grid, FIELD)
    emitter_excited = InitialState(beta_e0=0.0, beta_s0=1.0)

    nominal1 = simulate(node1, synth1.omega, vacuum_in, emitter_excited)
    design = scale_to_photon_number(delay(nominal1.e_out, tau), 1.0, node2.c)
    synth2 = synth_receive(node2, design)
    omega2 = synth2.omega if omega2_scale == 1.0 else synth2.omega.scaled(omega2_scale)

    perturbed1 = sim_params1 is not None or omega1_scale != 1.0
    traj1 = (
        nominal1
        if not perturbed1
        else simulate(sim_params1 or node1, omega1, vacuum_in, emitter_excited)
    )
    arriving = delay(traj1.e_out, tau)
    traj2 = simulate(
        sim_params2 or node2,
        omega2,
        arriving,
        InitialState(beta_e0=0.0, beta_s0=0.0),
    )
    return synth1, traj1, arriving, synth2, traj2


def _unabsorbed(traj1: Trajectory, traj2: Trajectory, c: float) -> float:
    """Photon probability that ended neither stored nor lost."""
    leftover_field = l2_photon_norm(traj2.e_out, c)
    stuck = abs(traj1.beta_e.samples[-1]) ** 2 + abs(traj2.beta_e.samples[-1]) ** 2
    return float(leftover_field + stuck)


def _resolve_packet(
    packet: GaussianSpec | ComplexSignal,
    params: PhysicalParams,
    grid: TimeGrid | None,
) -> ComplexSignal:
    """Turn a packet description into a unit-photon-number envelope."""
    if isinstance(packet, ComplexSignal):
        if grid is not None and grid != packet.grid:
            raise GridError("explicit grid conflicts with the packet's own grid")
        validate_packet(packet)
        return scale_to_photon_number(packet, 1.0, params.c)
    if grid is None:
        grid = standard_grid(packet.a, params.c)
    return gaussian_packet(packet, params, grid)
