"""Scenario files: loading, validation, execution and reporting.

A scenario is an INI file with the sections ``[scenario]``, ``[dims]``,
``[resource]``, ``[phases]``, ``[input]`` and ``[mode]``. Complex numbers
are written ``re,im``; a matrix is one row per line, entries separated by
whitespace::

    [resource]
    kind = matrix
    rows =
        0.8366600265,0  0,0
        0,0             0.5477225575,0
"""
import configparser
import io
import json
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from .channel import run_session_pair
from .engine import BranchRecord, TeleportReport, execute
from .errors import FeasibilityError, TeleportError, ValidationError
from .states import (
    ResourceMatrix,
    epr_product_resource,
    injection_resource,
    maximally_entangled_resource,
    random_state,
    resource_from_matrix,
    validate_injection,
)
from .synthesis import (
    PhaseTensor,
    check_protocol,
    condition_residual,
    feasibility,
    fourier_phase_tensor,
    synthesize,
)

RUN_TOL = 1e-8
VERIFY_TOL = 1e-10

EXIT_OK, EXIT_INVALID, EXIT_INFEASIBLE, EXIT_LOW_FIDELITY = 0, 1, 2, 3

PAULI_LABELS = {
    "I": np.eye(2),
    "X": np.array([[0, 1], [1, 0]]),
    "Z": np.array([[1, 0], [0, -1]]),
    "iY": np.array([[0, 1], [-1, 0]]),
}


class ScenarioError(ValidationError):
    """Malformed or inconsistent scenario file."""


def tolerance(default: float) -> float:
    """``QT_TOL`` from the environment, else ``default``."""
    raw = os.environ.get("QT_TOL")
    if raw is None:
        return default
    try:
        tol = float(raw)
    except ValueError:
        raise ScenarioError(f"QT_TOL={raw!r} is not a decimal number") from None
    if not tol > 0:
        raise ScenarioError("QT_TOL must be positive")
    return tol


@dataclass
class Scenario:
    name: str
    dims: Tuple[int, int, int]
    resource: ResourceMatrix
    phases: PhaseTensor
    psi0: np.ndarray
    input_support: Optional[Tuple[int, ...]] = None
    mode: str = "exhaustive"
    count: int = 1
    seed: int = 0
    transport: str = "memory"
    source: str = field(default="", repr=False)


def parse_complex(text: str, where: str) -> complex:
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]))
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise ScenarioError(f"{where}: {text!r} is not a complex number 're,im'")


def parse_matrix(text: str, where: str) -> np.ndarray:
    rows = [line.split() for line in text.strip().splitlines() if line.strip()]
    if not rows or len({len(r) for r in rows}) != 1:
        raise ScenarioError(f"{where}: rows must be non-empty and of equal length")
    return np.array(
        [[parse_complex(x, f"{where} row {r + 1}") for x in row] for r, row in enumerate(rows)]
    )


def parse_ints(text: str, where: str) -> Tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.replace(",", " ").split())
    except ValueError:
        raise ScenarioError(f"{where}: expected a list of integers, got {text!r}") from None


class _Section:
    def __init__(self, parser, name):
        if not parser.has_section(name):
            raise ScenarioError(f"missing section [{name}]")
        self.name, self.sec = name, parser[name]

    def where(self, key):
        return f"[{self.name}] {key}"

    def get(self, key, default=None):
        if key in self.sec:
            return self.sec[key]
        if default is None:
            raise ScenarioError(f"{self.where(key)}: required field missing")
        return default

    def int(self, key, default=None):
        raw = self.get(key, None if default is None else str(default))
        try:
            return int(raw)
        except ValueError:
            raise ScenarioError(f"{self.where(key)}: {raw!r} is not an integer") from None


def _build_resource(sec: _Section) -> ResourceMatrix:
    kind = sec.get("kind")
    if kind == "maximal":
        return maximally_entangled_resource(sec.int("n"))
    if kind == "epr-product":
        return epr_product_resource(sec.int("m"))
    if kind == "injection":
        inj = parse_ints(sec.get("map"), sec.where("map"))
        return injection_resource(sec.int("n1", len(inj)), sec.int("n3"), inj)
    if kind == "matrix":
        support = sec.get("support", "")
        return resource_from_matrix(
            parse_matrix(sec.get("rows"), sec.where("rows")),
            parse_ints(support, sec.where("support")) or None,
        )
    raise ScenarioError(f"{sec.where('kind')}: unknown resource kind {kind!r}")


def _build_phases(sec: _Section, n1: int, n2: int) -> PhaseTensor:
    kind = sec.get("kind", "fourier")
    if kind == "fourier":
        return fourier_phase_tensor(n1, n2)
    if kind == "explicit":
        slices = []
        for k in range(1, n2 + 1):
            m = parse_matrix(sec.get(f"k{k}"), sec.where(f"k{k}"))
            if m.shape != (n1, n1):
                raise ScenarioError(f"{sec.where(f'k{k}')}: slice must be {n1}x{n1}")
            slices.append(m)
        return PhaseTensor(np.stack(slices, axis=2))
    raise ScenarioError(f"{sec.where('kind')}: unknown phase kind {kind!r}")


def _build_input(sec: _Section, n1: int):
    kind = sec.get("kind")
    support = parse_ints(sec.get("support", ""), sec.where("support")) or None
    if support is not None:
        support = validate_injection(support, n1)
    if kind == "random":
        positions = support or tuple(range(1, n1 + 1))
        psi = np.zeros(n1, dtype=np.complex128)
        psi[[p - 1 for p in positions]] = random_state(len(positions), sec.int("seed"))
    elif kind == "amplitudes":
        amps = [parse_complex(x, sec.where("amplitudes")) for x in sec.get("amplitudes").split()]
        if len(amps) != n1:
            raise ScenarioError(f"{sec.where('amplitudes')}: expected {n1} amplitudes, got {len(amps)}")
        psi = np.array(amps)
        nrm = np.linalg.norm(psi)
        if nrm == 0:
            raise ScenarioError(f"{sec.where('amplitudes')}: zero vector")
        psi = psi / nrm
    elif kind == "basis":
        i = sec.int("index")
        if not 1 <= i <= n1:
            raise ScenarioError(f"{sec.where('index')}: {i} outside 1..{n1}")
        psi = np.zeros(n1, dtype=np.complex128)
        psi[i - 1] = 1.0
    else:
        raise ScenarioError(f"{sec.where('kind')}: unknown input kind {kind!r}")
    return psi, support


def parse_scenario(text: str, source: str = "<string>") -> Scenario:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";",))
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ScenarioError(str(exc)) from None
    try:
        name = _Section(parser, "scenario").get("name")
        d = _Section(parser, "dims")
        dims = (d.int("n1"), d.int("n2"), d.int("n3"))
        if min(dims) < 1:
            raise ScenarioError("[dims]: dimensions must be positive")
        resource = _build_resource(_Section(parser, "resource"))
        if (resource.dim_sender, resource.dim_receiver) != dims[1:]:
            raise ScenarioError(
                f"[dims]: n2, n3 = {dims[1:]} but the resource is "
                f"{resource.dim_sender}x{resource.dim_receiver}"
            )
        psec = _Section(parser, "phases") if parser.has_section("phases") else None
        phases = _build_phases(psec, dims[0], dims[1]) if psec else fourier_phase_tensor(dims[0], dims[1])
        psi0, support = _build_input(_Section(parser, "input"), dims[0])
        n_logical = len(support) if support else dims[0]
        if dims[2] < n_logical:
            raise ScenarioError(f"[dims]: n3={dims[2]} cannot hold a {n_logical}-level state")
        m = _Section(parser, "mode")
        mode = m.get("kind", "exhaustive")
        if mode not in ("exhaustive", "sampled", "session"):
            raise ScenarioError(f"{m.where('kind')}: unknown mode {mode!r}")
        count = m.int("count", 1)
        if count < 0:
            raise ScenarioError(f"{m.where('count')}: must be >= 0")
        return Scenario(
            name, dims, resource, phases, psi0, support, mode, count,
            m.int("seed", 0), m.get("transport", "memory"), source,
        )
    except ScenarioError:
        raise
    except TeleportError as exc:
        raise ScenarioError(f"{source}: {exc}") from None


def bundled_names() -> List[str]:
    root = resources.files(__package__) / "scenarios"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".ini"))


def resolve_path(ref: str) -> Path:
    """A filesystem path, or the name of a bundled scenario."""
    path = Path(ref)
    if path.exists():
        return path
    bundled = resources.files(__package__) / "scenarios" / f"{ref}.ini"
    if bundled.is_file():
        return Path(str(bundled))
    raise ScenarioError(f"no scenario file or bundled scenario named {ref!r}")


def load_scenario(ref: str) -> Scenario:
    path = resolve_path(ref)
    return parse_scenario(path.read_text(), str(path))


def op_label(op: np.ndarray) -> str:
    """Pauli name of a 2x2 operator up to global phase, else ``""``."""
    if op.shape != (2, 2):
        return ""
    for name, ref in PAULI_LABELS.items():
        overlap = np.vdot(ref, op)
        if abs(abs(overlap) - 2) < 1e-9:
            return name
    return ""


def simulate(sc: Scenario, seed: Optional[int] = None, transport: Optional[str] = None):
    """Run a scenario; returns ``(report, labels)`` where ``labels`` maps
    each outcome to its recovery-operator name."""
    seed = sc.seed if seed is None else seed
    protocol, family = synthesize(sc.resource, sc.dims[0], sc.phases, sc.input_support)
    labels = {(i, k): op_label(op) or f"O[{i},{k}]" for (i, k), op in family.ops.items()}
    if sc.mode == "session":
        alice, bob = run_session_pair(
            sc.psi0, sc.resource, sc.phases, sc.input_support,
            transport or sc.transport, seed,
        )
        branch = BranchRecord(*bob.outcome, alice.probability, bob.final_state, bob.final_fidelity)
        report = TeleportReport("session", [branch], bob.final_fidelity, seed, (sc.dims[0], sc.dims[1], sc.dims[2]))
    else:
        report = execute(sc.psi0, sc.resource, protocol, family, sc.mode, seed, sc.count)
    return report, labels


def branch_records(report: TeleportReport, labels: Dict, name: str = "") -> List[dict]:
    return [
        {
            "scenario": name,
            "mode": report.mode,
            "i": b.outcome_i,
            "k": b.outcome_k,
            "probability": float(b.probability),
            "fidelity": float(b.fidelity),
            "op": labels.get((b.outcome_i, b.outcome_k), ""),
        }
        for b in report.branches
    ]


def dump_jsonl(records) -> str:
    return "".join(json.dumps(r, separators=(",", ":")) + "\n" for r in records)


def emit_report(report: TeleportReport, fmt: str = "text", labels: Optional[Dict] = None, name: str = "") -> str:
    """Render a report. ``jsonl`` gives one record per branch with
    round-trip float precision; ``text`` gives a header and a branch table."""
    labels = labels or {}
    records = branch_records(report, labels, name)
    if fmt == "jsonl":
        return dump_jsonl(records)
    if fmt != "text":
        raise ValidationError(f"unknown format {fmt!r}")
    out = io.StringIO()
    n1, n2, n3 = report.dims
    seed = "" if report.seed is None else f" seed={report.seed}"
    out.write(
        f"# {name} mode={report.mode} dims=({n1},{n2},{n3}){seed} "
        f"branches={len(records)} mean_fidelity={report.mean_fidelity:.12f}\n"
    )
    out.write(f"{'i':>4} {'k':>4} {'probability':>16} {'fidelity':>16}  op\n")
    for r in records:
        out.write(f"{r['i']:>4} {r['k']:>4} {r['probability']:>16.12f} {r['fidelity']:>16.12f}  {r['op']}\n")
    return out.getvalue()


def verify(sc: Scenario) -> Tuple[bool, float]:
    """Synthesis plus condition-residual and unitarity checks, no sampling."""
    protocol, family = synthesize(sc.resource, sc.dims[0], sc.phases, sc.input_support)
    residual = condition_residual(protocol, sc.resource, sc.phases, sc.psi0)
    return check_protocol(protocol, family) and residual <= tolerance(VERIFY_TOL), residual


def feasibility_of(sc: Scenario):
    n = len(sc.input_support) if sc.input_support else sc.dims[0]
    return feasibility(sc.resource, n)


def run_scenario(ref: str, seed=None, fmt="text", transport=None):
    """Load, run and render one scenario; returns ``(text, exit_code)``.

    Exit codes: 0 success, 1 invalid input or session failure, 2 infeasible
    resource, 3 fidelity below tolerance.
    """
    try:
        tol = tolerance(RUN_TOL)
        sc = load_scenario(ref)
    except TeleportError as exc:
        return f"error: {exc}\n", EXIT_INVALID
    try:
        report, labels = simulate(sc, seed, transport)
    except FeasibilityError as exc:
        spectrum = ", ".join(f"{x:.12g}" for x in exc.lambdas)
        return f"infeasible: {sc.name}: Schmidt spectrum ({spectrum})\n", EXIT_INFEASIBLE
    except (TeleportError, OSError) as exc:
        return f"error: {sc.name}: {exc}\n", EXIT_INVALID
    text = emit_report(report, fmt, labels, sc.name)
    if report.branches and report.min_fidelity < 1 - tol:
        return text, EXIT_LOW_FIDELITY
    return text, EXIT_OK
