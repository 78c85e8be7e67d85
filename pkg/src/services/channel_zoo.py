"""Noisy channel families as parameterized Kraus-operator sets."""

import json
import logging
import math
from itertools import combinations
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import ValidationError

from src.models.channels import (
    ChannelFamily,
    ChannelSpecDocument,
    CPTPReport,
    DensityMatrix,
    KrausChannel,
    ParameterSpec,
)
from src.models.errors import (
    ChannelSpecDimensionError,
    ChannelSpecError,
    ChannelSpecSyntaxError,
    CPTPViolationError,
    DimensionError,
    EmptyParameterDomainError,
    ParameterError,
    QubitOnlyChannelError,
    UnknownChannelError,
)
from src.services.operator_basis import gen_pauli_power
from config.settings import settings

logger = logging.getLogger(__name__)

Params = Dict[str, float]
Builder = Callable[[Params], KrausChannel]


def _sigma(name: str) -> np.ndarray:
    return {
        "x": np.array([[0, 1], [1, 0]], dtype=complex),
        "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
        "z": np.array([[1, 0], [0, -1]], dtype=complex),
    }[name]


def _ketbra(a: int, b: int, dim: int) -> np.ndarray:
    matrix = np.zeros((dim, dim), dtype=complex)
    matrix[a, b] = 1.0
    return matrix


def _weighted(name: str, dim: int, params: Params, pairs: List[Tuple[float, np.ndarray]]) -> KrausChannel:
    """Channel from (weight, unitary) pairs, dropping zero weights."""
    kraus = [math.sqrt(max(w, 0.0)) * u for w, u in pairs if w > 0]
    if not kraus:
        kraus = [np.zeros((dim, dim), dtype=complex)]
    return KrausChannel(name=name, dim=dim, kraus=kraus, params=dict(params))


def _simplex(names: List[str], group: str) -> List[ParameterSpec]:
    return [ParameterSpec(name=n, lower=0.0, upper=1.0, simplex_group=group) for n in names]


# Qubit families

def _pauli_flip(axis: str) -> Callable[[int], Tuple[List[ParameterSpec], Builder]]:
    def factory(dim: int):
        name = {"x": "bit_flip", "z": "phase_flip", "y": "bit_phase_flip"}[axis]

        def build(params: Params) -> KrausChannel:
            p = params["p"]
            return _weighted(name, dim, params, [(1 - p, np.eye(2)), (p, _sigma(axis))])

        return [ParameterSpec(name="p")], build
    return factory


def _dephasing_qubit(dim: int):
    def build(params: Params) -> KrausChannel:
        alpha = (1 + math.sqrt(max(1 - params["lam"], 0.0))) / 2
        return _weighted(
            "dephasing_qubit", dim, params, [(alpha, np.eye(2)), (1 - alpha, _sigma("z"))]
        )

    return [ParameterSpec(name="lam")], build


def _pauli(dim: int):
    names = ["p0", "p1", "p2", "p3"]

    def build(params: Params) -> KrausChannel:
        ops = [np.eye(2), _sigma("x"), _sigma("y"), _sigma("z")]
        return _weighted("pauli", dim, params, [(params[n], u) for n, u in zip(names, ops)])

    return _simplex(names, "pauli"), build


def _equiprobable_pauli(dim: int):
    def build(params: Params) -> KrausChannel:
        half = params["p_xz"] / 2
        return _weighted("equiprobable_pauli", dim, params, [
            (params["p0"], np.eye(2)),
            (half, _sigma("x")),
            (params["p2"], _sigma("y")),
            (half, _sigma("z")),
        ])

    return _simplex(["p0", "p_xz", "p2"], "weights"), build


def _adc(dim: int):
    def build(params: Params) -> KrausChannel:
        q = params["q"]
        e0 = np.array([[1, 0], [0, math.sqrt(1 - q)]], dtype=complex)
        e1 = np.array([[0, math.sqrt(q)], [0, 0]], dtype=complex)
        return KrausChannel(name="adc", dim=dim, kraus=[e0, e1], params=dict(params))

    return [ParameterSpec(name="q")], build


def _gadc(dim: int):
    def build(params: Params) -> KrausChannel:
        q, p1, p2 = params["q"], params["p1"], params["p2"]
        s, c = math.sqrt(q), math.sqrt(1 - q)
        kraus = [
            math.sqrt(p1) * np.array([[1, 0], [0, c]], dtype=complex),
            math.sqrt(p1) * np.array([[0, s], [0, 0]], dtype=complex),
            math.sqrt(p2) * np.array([[c, 0], [0, 1]], dtype=complex),
            math.sqrt(p2) * np.array([[0, 0], [s, 0]], dtype=complex),
        ]
        return KrausChannel(name="gadc", dim=dim, kraus=kraus, params=dict(params))

    return [ParameterSpec(name="q")] + _simplex(["p1", "p2"], "weights"), build


# quNit families

def _depolarizing(dim: int):
    def build(params: Params) -> KrausChannel:
        p = params["p"]
        pairs = [(1 - p + p / dim ** 2, np.eye(dim))]
        pairs += [
            (p / dim ** 2, gen_pauli_power(r, s, dim).matrix)
            for r in range(dim) for s in range(dim) if (r, s) != (0, 0)
        ]
        return _weighted("depolarizing", dim, params, pairs)

    return [ParameterSpec(name="p")], build


def _gen_pauli_channel(dim: int):
    names = [f"p_{r}_{s}" for r in range(dim) for s in range(dim)]

    def build(params: Params) -> KrausChannel:
        pairs = [
            (params[f"p_{r}_{s}"], gen_pauli_power(r, s, dim).matrix)
            for r in range(dim) for s in range(dim)
        ]
        return _weighted("gen_pauli_channel", dim, params, pairs)

    return _simplex(names, "weights"), build


def _cyclic(name: str, power: Callable[[int, int], np.ndarray]):
    def factory(dim: int):
        names = [f"p{r}" for r in range(dim)]

        def build(params: Params) -> KrausChannel:
            return _weighted(name, dim, params, [(params[f"p{r}"], power(r, dim)) for r in range(dim)])

        return _simplex(names, "weights"), build
    return factory


def _xz_power(r: int, dim: int) -> np.ndarray:
    return np.linalg.matrix_power(gen_pauli_power(1, 1, dim).matrix, r)


def transposition_unitary(m: int, n: int, dim: int) -> np.ndarray:
    """U^(mn): swaps |m> and |n>, identity elsewhere."""
    matrix = np.eye(dim, dtype=complex)
    matrix[m, m] = matrix[n, n] = 0.0
    matrix[m, n] = matrix[n, m] = 1.0
    return matrix


def _transposition(strict: bool):
    def factory(dim: int):
        def build(params: Params) -> KrausChannel:
            p = params["p"]
            swaps = [transposition_unitary(m, n, dim) for m, n in combinations(range(dim), 2)]
            weight = p if strict else p / len(swaps)
            return _weighted(
                "transposition_flip", dim, params, [(1 - p, np.eye(dim))] + [(weight, u) for u in swaps]
            )

        return [ParameterSpec(name="p")], build
    return factory


def _dephasing_qunit(dim: int):
    names = [f"p{j}" for j in range(dim + 1)]

    def build(params: Params) -> KrausChannel:
        pairs = [(params[f"p{j}"], np.eye(dim) - 2 * _ketbra(j, j, dim)) for j in range(dim)]
        pairs.append((params[f"p{dim}"], np.eye(dim)))
        return _weighted("dephasing_qunit", dim, params, pairs)

    return _simplex(names, "weights"), build


def _adc_qunit(dim: int):
    pairs = [(n, m) for n in range(1, dim) for m in range(n)]
    cap = 1.0 / (dim - 1)

    def build(params: Params) -> KrausChannel:
        xi = [sum(params[f"gamma_{n}_{m}"] for m in range(n)) for n in range(dim)]
        e0 = np.diag([math.sqrt(max(1 - x, 0.0)) for x in xi]).astype(complex)
        kraus = [e0]
        for n, m in pairs:
            gamma = params[f"gamma_{n}_{m}"]
            if gamma > 0:
                kraus.append(math.sqrt(gamma) * _ketbra(m, n, dim))
        return KrausChannel(name="adc_qunit", dim=dim, kraus=kraus, params=dict(params))

    specs = [ParameterSpec(name=f"gamma_{n}_{m}", upper=cap) for n, m in pairs]
    return specs, build


def _gadc_qunit(dim: int):
    rates = [(n, m) for m in range(dim) for n in range(dim) if n != m]
    cap = 1.0 / (dim - 1)

    def build(params: Params) -> KrausChannel:
        kraus = []
        for m in range(dim):
            weight = params[f"p{m}"]
            if weight <= 0:
                continue
            xi = sum(params[f"gamma_{n}_{m}"] for n in range(dim) if n != m)
            diag = np.ones(dim, dtype=complex)
            diag[m] = math.sqrt(max(1 - xi, 0.0))
            kraus.append(math.sqrt(weight) * np.diag(diag))
            for n in range(dim):
                gamma = params[f"gamma_{n}_{m}"] if n != m else 0.0
                if gamma > 0:
                    kraus.append(math.sqrt(weight * gamma) * _ketbra(n, m, dim))
        return KrausChannel(name="gadc_qunit", dim=dim, kraus=kraus, params=dict(params))

    specs = _simplex([f"p{m}" for m in range(dim)], "weights")
    specs += [ParameterSpec(name=f"gamma_{n}_{m}", upper=cap) for n, m in rates]
    return specs, build


_FAMILIES: Dict[str, Tuple[Callable, bool, str]] = {
    "bit_flip": (_pauli_flip("x"), True, "sigma_x applied with probability p"),
    "phase_flip": (_pauli_flip("z"), True, "sigma_z applied with probability p"),
    "bit_phase_flip": (_pauli_flip("y"), True, "sigma_y applied with probability p"),
    "dephasing_qubit": (_dephasing_qubit, True, "random phase, alpha = (1 + sqrt(1 - lam))/2"),
    "pauli": (_pauli, True, "independent sigma_x, sigma_y, sigma_z errors"),
    "equiprobable_pauli": (_equiprobable_pauli, True, "sigma_x and sigma_z with equal weight p_xz/2"),
    "adc": (_adc, True, "amplitude damping with decay probability q"),
    "gadc": (_gadc, True, "generalized amplitude damping at rate q"),
    "depolarizing": (_depolarizing, False, "(1 - p) rho + p/N identity"),
    "gen_pauli_channel": (_gen_pauli_channel, False, "X^r Z^s errors with weights p_r_s"),
    "gen_flip": (_cyclic("gen_flip", lambda r, d: gen_pauli_power(r, 0, d).matrix), False,
                 "cyclic shifts X^r with weights p_r"),
    "gen_phase": (_cyclic("gen_phase", lambda r, d: gen_pauli_power(0, r, d).matrix), False,
                  "phase errors Z^s with weights p_s"),
    "gen_flip_phase": (_cyclic("gen_flip_phase", _xz_power), False,
                       "combined errors (XZ)^r with weights p_r"),
    "transposition_flip": (_transposition(False), False,
                           "each of the C(N,2) level swaps with probability p/C(N,2)"),
    "dephasing_qunit": (_dephasing_qunit, False, "E_j = 1 - 2|j><j| with weights p_j, identity with p_N"),
    "adc_qunit": (_adc_qunit, False, "downward decay |n> -> |m> at rates gamma_n_m"),
    "gadc_qunit": (_gadc_qunit, False, "leakage |m> -> |n> at rates gamma_n_m, weights p_m"),
}

FAMILY_NAMES: List[str] = list(_FAMILIES)


def build_family(name: str, dim: int, strict: bool = False) -> ChannelFamily:
    """Parameterized Kraus family by name.

    ``strict`` only affects ``transposition_flip``: the swaps then carry
    weight p each, which is not trace preserving for N >= 3.
    """
    if name not in _FAMILIES:
        raise UnknownChannelError(f"unknown channel family '{name}'; choose from {', '.join(FAMILY_NAMES)}")
    factory, qubit_only, description = _FAMILIES[name]
    if dim < 2:
        raise DimensionError(f"dimension must be at least 2, got {dim}")
    if qubit_only and dim != 2:
        raise QubitOnlyChannelError(f"'{name}' is defined for qubits only (N=2), got N={dim}")
    if strict and name == "transposition_flip":
        factory = _transposition(True)
        description = "literal swap weights p each (not trace preserving for N >= 3)"
        logger.warning(f"Building strict transposition channel for N={dim}; it fails the CPTP check")

    param_spec, builder = factory(dim)
    logger.info(f"Built family {name} (N={dim}, {len(param_spec)} parameters)")
    return ChannelFamily(
        name=name,
        dim=dim,
        param_spec=param_spec,
        builder=builder,
        qubit_only=qubit_only,
        strict=strict,
        description=description,
    )


def list_families(dim: int = 3) -> List[ChannelFamily]:
    """Every registered family; qubit-only ones at N=2, the rest at ``dim``."""
    return [
        build_family(name, 2 if _FAMILIES[name][1] else dim)
        for name in FAMILY_NAMES
    ]


def check_domain(family: ChannelFamily) -> None:
    if not family.param_spec:
        raise EmptyParameterDomainError(f"family '{family.name}' has no parameters to sample")
    for spec in family.param_spec:
        if spec.lower > spec.upper:
            raise EmptyParameterDomainError(
                f"parameter {spec.name} of '{family.name}' has empty range [{spec.lower}, {spec.upper}]"
            )


def _normalize_params(family: ChannelFamily, params: Params) -> Params:
    known = set(family.param_names)
    unknown = sorted(set(params) - known)
    if unknown:
        raise ParameterError(f"unknown parameters for '{family.name}': {', '.join(unknown)}")
    missing = [n for n in family.param_names if n not in params]
    if missing:
        raise ParameterError(f"missing parameters for '{family.name}': {', '.join(missing)}")

    point: Params = {}
    for spec in family.param_spec:
        value = float(params[spec.name])
        if not math.isfinite(value):
            raise ParameterError(f"parameter {spec.name} must be finite, got {value}")
        slack = settings.SIMPLEX_TOL
        if value < spec.lower - slack or value > spec.upper + slack:
            raise ParameterError(
                f"parameter {spec.name}={value} outside [{spec.lower}, {spec.upper}]"
            )
        point[spec.name] = min(max(value, spec.lower), spec.upper)

    for group, specs in family.simplex_groups().items():
        total = sum(point[s.name] for s in specs)
        deviation = abs(total - 1.0)
        if deviation <= settings.SIMPLEX_TOL:
            continue
        if deviation <= settings.SIMPLEX_RENORM_TOL and total > 0:
            logger.warning(f"Renormalizing simplex group '{group}' of '{family.name}' (sum {total:.9f})")
            for s in specs:
                point[s.name] = point[s.name] / total
            continue
        names = "+".join(s.name for s in specs)
        raise ParameterError(f"simplex group {names} sums to {total}, expected 1")
    return point


def instantiate(family: ChannelFamily, params: Params) -> KrausChannel:
    """Concrete channel for a parameter point; the result passes validate_cptp."""
    point = _normalize_params(family, params)
    channel = family.builder(point)
    report = validate_cptp(channel)
    if not report.passed:
        raise CPTPViolationError(
            f"'{family.name}' at {point} is not trace preserving "
            f"(max deviation {report.max_deviation:.3e})"
        )
    return channel


def identity_channel(dim: int) -> KrausChannel:
    return KrausChannel(name="identity", dim=dim, kraus=[np.eye(dim)], params={})


def apply_channel(channel: KrausChannel, rho: DensityMatrix) -> DensityMatrix:
    """rho' = sum_k E_k rho E_k^dagger."""
    if rho.dim != channel.dim:
        raise DimensionError(f"state has N={rho.dim} but channel '{channel.name}' has N={channel.dim}")
    out = sum(e @ rho.matrix @ e.conj().T for e in channel.kraus)
    out = (out + out.conj().T) / 2
    return DensityMatrix(
        matrix=out,
        trace_tol=max(settings.CPTP_TOL * channel.dim, rho.trace_tol),
        psd_tol=1e-9,
    )


def validate_cptp(channel: KrausChannel, tol: Optional[float] = None) -> CPTPReport:
    """Completeness check max |sum_k E_k^dagger E_k - 1| <= tol."""
    tol = settings.CPTP_TOL if tol is None else tol
    total = sum(e.conj().T @ e for e in channel.kraus)
    deviation = float(np.max(np.abs(total - np.eye(channel.dim))))
    return CPTPReport(
        passed=deviation <= tol,
        max_deviation=deviation,
        kraus_norms=[float(np.linalg.norm(e)) for e in channel.kraus],
        tolerance=tol,
    )


def _matrix_from_entries(entries: list, index: int, dim: int) -> np.ndarray:
    path = f"kraus[{index}]"
    rows = len(entries)
    for r, row in enumerate(entries):
        if len(row) != rows:
            raise ChannelSpecSyntaxError(
                f"matrix is not square: row {r} has {len(row)} entries, expected {rows}", path=path
            )
        for c, entry in enumerate(row):
            if len(entry) != 2:
                raise ChannelSpecSyntaxError(
                    "entry must be a [re, im] pair", path=f"{path}[{r}][{c}]"
                )
    if rows != dim:
        raise ChannelSpecDimensionError(f"matrix is {rows}x{rows} but dim is {dim}", path=path)
    values = np.array(entries, dtype=float)
    return values[..., 0] + 1j * values[..., 1]


def parse_channel_spec(text: str) -> KrausChannel:
    """Channel from a JSON channel-spec document.

    The document names a registered family with ``family_params`` or lists
    explicit ``kraus`` matrices whose entries are ``[re, im]`` pairs.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ChannelSpecSyntaxError(f"invalid JSON: {e.msg}", line=e.lineno, column=e.colno) from e

    if not isinstance(data, dict):
        raise ChannelSpecSyntaxError("channel spec must be a JSON object", line=1, column=1)
    try:
        document = ChannelSpecDocument.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        path = ".".join(str(part) for part in first["loc"]) or None
        raise ChannelSpecSyntaxError(f"invalid channel spec: {first['msg']}", path=path) from e

    if document.dim < 1:
        raise ChannelSpecDimensionError(f"dim must be positive, got {document.dim}", path="dim")

    if document.family_params is not None:
        family = build_family(document.name, document.dim)
        return instantiate(family, document.family_params)

    if not document.kraus:
        raise ChannelSpecSyntaxError("kraus list is empty", path="kraus")
    matrices = [_matrix_from_entries(m, i, document.dim) for i, m in enumerate(document.kraus)]
    channel = KrausChannel(name=document.name, dim=document.dim, kraus=matrices, params={})
    report = validate_cptp(channel)
    if not report.passed:
        raise CPTPViolationError(
            f"channel '{document.name}' is not trace preserving (max deviation {report.max_deviation:.3e})"
        )
    logger.info(f"Parsed channel spec '{document.name}' with {len(matrices)} Kraus operators")
    return channel


def load_channel_spec(path: Union[str, Path]) -> KrausChannel:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise ChannelSpecError(f"cannot read channel spec: {e}", path=str(path)) from e
    return parse_channel_spec(text)


def random_density(
    dim: int,
    rank: Optional[int] = None,
    seed: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> DensityMatrix:
    """Ginibre-ensemble state rho = G G^dagger / Tr(G G^dagger), G of shape N x rank."""
    if dim < 2:
        raise DimensionError(f"dimension must be at least 2, got {dim}")
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise DimensionError(f"rank must be in 1..{dim}, got {rank}")
    rng = rng if rng is not None else np.random.default_rng(seed)
    g = (rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))) / np.sqrt(2)
    rho = g @ g.conj().T
    rho = rho / np.trace(rho).real
    return DensityMatrix(matrix=(rho + rho.conj().T) / 2)
