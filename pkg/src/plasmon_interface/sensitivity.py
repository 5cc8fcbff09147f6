"""Fidelity degradation under unknown parameter errors.

Controls are always synthesized with the nominal parameters; the error model
perturbs only the forward simulation of the designated node.

Coupling errors are modeled as a rate-mismatch loss channel.  When the true
plasmon decay rate differs from the one the control design assumed, the
mismatched part of the emission/absorption no longer interferes correctly
with the designed channel mode, and to first order that amplitude is simply
lost to the protocol.  Simulating the node with an extra non-radiative rate
|delta Gamma_p| (nominal coupling everywhere else) captures exactly this
while keeping every probability book balanced:

  g           -> delta Gamma_p = Gamma_p ((1 + eps)^2 - 1), since the
                 emergent rate scales with g^2
  gamma_p     -> delta Gamma_p = Gamma_p * eps
  gamma_prime -> the loss rate itself is scaled by (1 + eps)
  omega       -> the node's control signal is scaled by (1 + eps), static
                 over the pulse

With this model the fidelity response is linear in the rate mismatch, which
reproduces the reference error table (g errors hit twice as hard as equal
gamma_p errors) and degrades for either sign of eps.

Rows are independent pure computations with no randomness, so tables are
deterministic and rows may be evaluated concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .core import PhysicalParams
from .errors import InvalidParams, ToolkitError
from .network import TransferSpec, run_transfer

PARAMETERS = ("g", "gamma_p", "gamma_prime", "omega")


@dataclass(frozen=True)
class ErrorSpec:
    """One table cell: which parameter is wrong, by how much, at which node."""

    parameter: str
    relative_error: float
    node: int

    def __post_init__(self):
        if self.parameter not in PARAMETERS:
            raise InvalidParams(
                f"parameter must be one of {PARAMETERS}, got {self.parameter!r}"
            )
        if self.node not in (1, 2):
            raise InvalidParams(f"node must be 1 or 2, got {self.node!r}")
        if not self.relative_error > -1.0:
            raise InvalidParams(
                f"relative_error must exceed -1, got {self.relative_error!r}"
            )


@dataclass(frozen=True)
class SensitivityTable:
    """Baseline fidelity plus one fidelity per error cell (None = row failed)."""

    baseline: float
    rows: tuple[tuple[ErrorSpec, float | None], ...]

    def to_csv_text(self) -> str:
        lines = ["node,parameter,relative_error,fidelity"]
        lines.append(f"0,baseline,0.0,{self.baseline!r}")
        for err, fidelity in self.rows:
            value = "NA" if fidelity is None else repr(fidelity)
            lines.append(f"{err.node},{err.parameter},{err.relative_error!r},{value}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "baseline": self.baseline,
            "rows": [
                {
                    "node": err.node,
                    "parameter": err.parameter,
                    "relative_error": err.relative_error,
                    "fidelity": fidelity,
                }
                for err, fidelity in self.rows
            ],
        }


def default_error_specs(size: float = 0.10) -> list[ErrorSpec]:
    """The standard eight cells: every parameter at both nodes."""
    return [
        ErrorSpec(parameter, size, node)
        for node in (1, 2)
        for parameter in PARAMETERS
    ]


def perturbed_params(base: PhysicalParams, err: ErrorSpec) -> PhysicalParams | None:
    """Simulation parameter set for the designated node (None for omega errors).

    g and gamma_p errors keep the nominal coupling and add the decay-rate
    mismatch |delta Gamma_p| as an extra non-radiative channel (see module
    docstring).
    """
    eps = err.relative_error
    if err.parameter == "g":
        mismatch = abs((1.0 + eps) ** 2 - 1.0) * base.gamma_p
        return replace(base, gamma_prime=base.gamma_prime + mismatch)
    if err.parameter == "gamma_p":
        mismatch = abs(eps) * base.gamma_p
        return replace(base, gamma_prime=base.gamma_prime + mismatch)
    if err.parameter == "gamma_prime":
        return replace(base, gamma_prime=base.gamma_prime * (1.0 + eps))
    return None


def perturbed_transfer(spec: TransferSpec, err: ErrorSpec) -> float:
    """Transfer fidelity when one node's simulation runs off-nominal."""
    kwargs = {}
    if err.parameter == "omega":
        kwargs[f"omega{err.node}_scale"] = 1.0 + err.relative_error
    else:
        base = spec.node1 if err.node == 1 else spec.node2
        kwargs[f"sim_params{err.node}"] = perturbed_params(base, err)
    return run_transfer(spec, **kwargs).result.fidelity_overlap


def build_table(spec: TransferSpec, errors: list[ErrorSpec]) -> SensitivityTable:
    """Baseline plus one perturbed_transfer per cell; failed rows become None."""
    baseline = run_transfer(spec).result.fidelity_overlap
    rows = []
    for err in errors:
        try:
            fidelity = perturbed_transfer(spec, err)
        except ToolkitError:
            fidelity = None
        rows.append((err, fidelity))
    return SensitivityTable(baseline=baseline, rows=tuple(rows))
