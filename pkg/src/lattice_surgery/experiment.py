"""Monte-Carlo harness for the lattice-surgery protocols.

Each shot encodes the inputs, runs the protocol (with noise if configured),
applies the ancilla policy, destructively reads every remaining code in one
readout setting, and tallies stabilizer, logical, and fidelity estimators.
Readout settings are the uniform bases Z, X, Y plus any mixed setting needed
to estimate every element of the target state's logical stabilizer group.

Fidelity with a stabilizer target of k logical qubits is estimated as
``2^-k * sum_g <g>`` over the 2^k signed group elements, each expectation
taken from its own readout setting; for one qubit this is (1 + s<P>)/2.
"""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import math
import random
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from . import __version__
from .codes import StabilizerCode, encode, normalize_label
from .noise import Executor, NoiseModel
from .pauli import PauliString, format_pauli, multiply
from .surgery import (
    ProtocolSpec,
    SurgeryError,
    ideal_output,
    protocol,
    read_code,
    readout_letters,
    role_labels,
    run_protocol,
)
from .tableau import ImpossibleOutcomeError, StabilizerTableau

__all__ = [
    "ConfigError",
    "AncillaPolicy",
    "ExperimentConfig",
    "ExperimentResult",
    "bell_fidelity",
    "basis_checks",
    "wald_se",
    "shot_rng",
    "run",
    "emit",
]

DETECTION_POLICIES = ("none", "basis_stabilizer_checks")
JOINT_CORRECTION = ("auto", "on", "off")
UNIFORM_SETTINGS = ("Z", "X", "Y")


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class AncillaPolicy:
    """``keep_all``, ``force`` (project onto bits), or ``postselect`` (discard mismatches).

    ``bits`` follow the protocol's ancilla layout (merge bits then split bits
    per joint measurement); ``None`` leaves a bit free.
    """

    kind: str = "keep_all"
    bits: tuple[int | None, ...] = ()

    def __post_init__(self):
        if self.kind not in ("keep_all", "force", "postselect"):
            raise ConfigError(f"unknown ancilla policy {self.kind!r}")
        if self.kind == "keep_all" and self.bits:
            raise ConfigError("keep_all takes no bits")
        if self.kind != "keep_all" and not self.bits:
            raise ConfigError(f"{self.kind} needs a bit pattern")
        if any(b not in (0, 1, None) for b in self.bits):
            raise ConfigError(f"ancilla bits must be 0, 1 or free: {self.bits}")

    @classmethod
    def parse(cls, text: str) -> "AncillaPolicy":
        """``keep_all``, ``force:000``, ``postselect:00-`` (``-`` = free)."""
        text = text.strip()
        if text == "keep_all":
            return cls()
        kind, _, pattern = text.partition(":")
        if not pattern or not re.fullmatch(r"[01\-]+", pattern):
            raise ConfigError(f"malformed ancilla policy {text!r}")
        return cls(kind, tuple(None if c == "-" else int(c) for c in pattern))

    def __str__(self) -> str:
        if self.kind == "keep_all":
            return "keep_all"
        return f"{self.kind}:" + "".join("-" if b is None else str(b) for b in self.bits)

    def forced(self, n_bits: int) -> list[int | None]:
        return list(self.bits) if self.kind == "force" else [None] * n_bits

    def accepts(self, bits: Sequence[int]) -> bool:
        if self.kind != "postselect":
            return True
        return all(want is None or want == got for want, got in zip(self.bits, bits))


_LABEL_TOKEN = re.compile(r"[+-]i|[01+\-−]")


def parse_inputs(value) -> tuple[str, ...]:
    """Input labels from a list or a compact string such as ``"0+"`` or ``"+i0"``."""
    if isinstance(value, str):
        compact = value.replace(" ", "").replace(",", "")
        tokens = _LABEL_TOKEN.findall(compact)
        if "".join(tokens) != compact:
            raise ConfigError(f"cannot parse input labels {value!r}")
        value = tokens
    try:
        return tuple(normalize_label(v) for v in value)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


@dataclass(frozen=True)
class ExperimentConfig:
    protocol: str = "bell_rough"
    inputs: tuple[str, ...] = ()
    noise: NoiseModel = field(default_factory=NoiseModel)
    shots: int = 1000
    seed: int = 0
    ancilla_policy: AncillaPolicy = field(default_factory=AncillaPolicy)
    detection_policy: str = "basis_stabilizer_checks"
    joint_correction: str = "auto"
    noisy_encoding: bool = False
    record_shots: bool = False

    def __post_init__(self):
        try:
            spec = protocol(self.protocol)
        except SurgeryError as exc:
            raise ConfigError(str(exc)) from None
        inputs = parse_inputs(self.inputs) if self.inputs else spec.default_inputs
        if len(inputs) != len(spec.inputs):
            raise ConfigError(f"{self.protocol} takes {len(spec.inputs)} input label(s), got {len(inputs)}")
        object.__setattr__(self, "inputs", tuple(inputs))
        if isinstance(self.ancilla_policy, str):
            object.__setattr__(self, "ancilla_policy", AncillaPolicy.parse(self.ancilla_policy))
        if isinstance(self.noise, Mapping):
            object.__setattr__(self, "noise", NoiseModel.from_dict(self.noise))
        if self.ancilla_policy.bits and len(self.ancilla_policy.bits) != spec.n_ancilla_bits:
            raise ConfigError(
                f"{self.protocol} has {spec.n_ancilla_bits} ancilla bits "
                f"({', '.join(spec.ancilla_layout())}); policy gives {len(self.ancilla_policy.bits)}"
            )
        if not isinstance(self.shots, int) or self.shots < 1:
            raise ConfigError("shots must be a positive integer")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an integer in [0, 2^64)")
        if self.detection_policy not in DETECTION_POLICIES:
            raise ConfigError(f"detection_policy must be one of {DETECTION_POLICIES}")
        if self.joint_correction not in JOINT_CORRECTION:
            raise ConfigError(f"joint_correction must be one of {JOINT_CORRECTION}")

    @property
    def spec(self) -> ProtocolSpec:
        return protocol(self.protocol)

    @classmethod
    def from_dict(cls, doc: Mapping) -> "ExperimentConfig":
        known = {
            "protocol", "inputs", "noise", "shots", "seed", "ancilla_policy",
            "detection_policy", "joint_correction", "noisy_encoding", "record_shots",
        }
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        kwargs = dict(doc)
        try:
            if "noise" in kwargs:
                kwargs["noise"] = NoiseModel.from_dict(kwargs["noise"])
            if "ancilla_policy" in kwargs:
                kwargs["ancilla_policy"] = AncillaPolicy.parse(str(kwargs["ancilla_policy"]))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "inputs": list(self.inputs),
            "noise": self.noise.to_dict(),
            "shots": self.shots,
            "seed": self.seed,
            "ancilla_policy": str(self.ancilla_policy),
            "detection_policy": self.detection_policy,
            "joint_correction": self.joint_correction,
            "noisy_encoding": self.noisy_encoding,
            "record_shots": self.record_shots,
        }


# ---------------------------------------------------------------------------
# estimators


def wald_se(mean: float, n: int) -> float:
    """Binomial standard error of a ±1-valued mean."""
    if n == 0:
        return float("nan")
    return math.sqrt(max(0.0, 1.0 - mean * mean) / n)


_BELL_SIGNS = {"phi+": (1, 1, -1), "phi-": (1, -1, 1), "psi+": (-1, 1, 1), "psi-": (-1, -1, -1)}


def bell_fidelity(expectations: Mapping[str, float], target: str, errors: Mapping[str, float] | None = None):
    """Fidelity with a Bell state from <ZZ>, <XX>, <YY> of the logical pair.

    F = (1 + sZ<ZZ> + sX<XX> + sY<YY>) / 4 with the target's stabilizer
    signs.  Returns ``(F, SE)`` where SE is a quarter of the root-sum-square
    of the component errors (0 when ``errors`` is omitted).
    """
    try:
        signs = _BELL_SIGNS[target]
    except KeyError:
        raise ValueError(f"unknown Bell target {target!r}; choose from {sorted(_BELL_SIGNS)}") from None
    keys = ("ZZ", "XX", "YY")
    f = 0.25 * (1 + sum(s * expectations[k] for s, k in zip(signs, keys)))
    se = 0.0
    if errors is not None:
        se = 0.25 * math.sqrt(sum(errors[k] ** 2 for k in keys))
    return f, se


def basis_checks(basis: str, code: StabilizerCode) -> list[PauliString]:
    """Signed generators whose value follows from a destructive readout in ``basis``."""
    if basis not in UNIFORM_SETTINGS:
        raise ValueError(f"unknown basis {basis!r}")
    letters = readout_letters(code, basis)
    return [g for g in code.generators if all(g.letter(q) == letters[q] for q in g.support)]


def shot_rng(seed: int, setting: str, shot: int) -> random.Random:
    """Independent stream per (seed, setting, shot); replayable in any order."""
    digest = hashlib.blake2b(f"{seed}/{setting}/{shot}".encode(), digest_size=8).digest()
    return random.Random(int.from_bytes(digest, "big"))


# ---------------------------------------------------------------------------
# run planning


@dataclass
class _Quantity:
    name: str
    operator: PauliString
    kind: str  # stabilizer, logical, element
    setting: str = ""
    raw_sum: int = 0
    raw_n: int = 0
    ps_sum: int = 0
    ps_n: int = 0

    def estimate(self, postselected: bool = False) -> dict:
        s, n = (self.ps_sum, self.ps_n) if postselected else (self.raw_sum, self.raw_n)
        mean = s / n if n else float("nan")
        return {"value": mean, "se": wald_se(mean, n), "kept": n}


def _evaluable(op: PauliString, letters: Mapping[int, str]) -> bool:
    return all(letters.get(q) == op.letter(q) for q in op.support)


def _value(op: PauliString, bits: Mapping[int, int]) -> int:
    parity = 1 if op.phase_exp == 2 else 0
    for q in op.support:
        parity ^= bits[q]
    return -1 if parity else 1


def _group_elements(gens: Sequence[PauliString]) -> list[PauliString]:
    out = []
    for mask in range(1, 1 << len(gens)):
        acc = None
        for i, g in enumerate(gens):
            if mask >> i & 1:
                acc = g if acc is None else multiply(acc, g)
        out.append(acc)
    return out


def _logical_name(p: PauliString, with_sign: bool = True) -> str:
    body = p.label()
    if not with_sign:
        return body
    return ("-" if p.phase_exp == 2 else "+") + body


_BELL_BY_SIGNS = {(1, 1): "phi+", (1, -1): "phi-", (-1, 1): "psi+", (-1, -1): "psi-"}


def _bell_name(gens: Sequence[PauliString]) -> str | None:
    if not gens or gens[0].n_qubits != 2:
        return None
    elements = {e.label(): e.sign for e in _group_elements(gens)}
    if "ZZ" in elements and "XX" in elements:
        return _BELL_BY_SIGNS[(elements["ZZ"], elements["XX"])]
    return None


class _Plan:
    """Everything fixed before the first shot."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        spec = self.spec = cfg.spec
        self.noisy = not cfg.noise.is_noiseless
        self.n = spec.n_data + (2 if self.noisy else 0)
        self.ancillas = (spec.n_data, spec.n_data + 1) if self.noisy else ()
        self.codes = {r: c.embed(self.n) for r, c in spec.codes.items()}
        self.labels = role_labels(spec, cfg.inputs)
        self.forced = cfg.ancilla_policy.forced(spec.n_ancilla_bits)
        self.m1_pinned = self._pinned_m1()
        bell = spec.name.startswith("bell_")
        if bell:
            if cfg.joint_correction == "auto":
                self.correct = self.m1_pinned is None
            else:
                self.correct = cfg.joint_correction == "on"
        else:
            self.correct = True
        self.target = self._target()
        self.target_elements = _group_elements(self.target)
        self.settings = self._settings()
        self._build_quantities()
        self.template = None
        if not (cfg.noisy_encoding and self.noisy):
            self.template = StabilizerTableau(self.n)
            self.encode(self.template, Executor())

    def _pinned_m1(self) -> int | None:
        pol = self.cfg.ancilla_policy
        if pol.kind == "keep_all" or len(self.spec.joints) != 1:
            return None
        jm = self.spec.joints[0].jm
        merge_bits = pol.bits[: len(jm.merging)]
        if any(b is None for b in merge_bits):
            return None
        return jm.m1(merge_bits)

    def _target(self) -> list[PauliString]:
        spec = self.spec
        n_bits = len(spec.joints) + len(spec.readouts)
        branches = list(itertools.product((0, 1), repeat=n_bits))
        if self.m1_pinned is not None:
            branches = [b for b in branches if b[0] == self.m1_pinned]
        for branch in branches:
            try:
                return ideal_output(spec, self.cfg.inputs, branch, self.correct)
            except ImpossibleOutcomeError:
                continue
        raise ConfigError(f"no possible outcome branch for {spec.name} with policy {self.cfg.ancilla_policy}")

    def _settings(self) -> list[tuple[str, ...]]:
        k = len(self.spec.outputs)
        settings = [(b,) * k for b in UNIFORM_SETTINGS]
        for el in self.target_elements:
            if any(all(l == "I" or l == s[i] for i, l in enumerate(el.label())) for s in settings):
                continue
            settings.append(tuple("Z" if l == "I" else l for l in el.label()))
        return settings

    def setting_name(self, setting: tuple[str, ...]) -> str:
        return setting[0] if len(set(setting)) == 1 else "".join(setting)

    def letters(self, setting: tuple[str, ...]) -> dict[int, str]:
        out = {}
        for role, basis in zip(self.spec.outputs, setting):
            out.update(readout_letters(self.codes[role], basis))
        return out

    def physical(self, logical: PauliString) -> PauliString:
        op = PauliString(self.n, phase_exp=logical.phase_exp)
        for i, role in enumerate(self.spec.outputs):
            letter = logical.letter(i)
            if letter != "I":
                op = multiply(op, self.codes[role].logical(letter))
        return op

    def _build_quantities(self) -> None:
        self.quantities: list[_Quantity] = []
        for role in self.spec.outputs:
            for i, g in enumerate(self.codes[role].generators):
                self.quantities.append(_Quantity(f"S{i + 1}_{role}", g, "stabilizer"))
        k = len(self.spec.outputs)
        for b in UNIFORM_SETTINGS:
            logical = PauliString.from_label(b * k)
            self.quantities.append(_Quantity(b * k, self.physical(logical), "logical"))
        for el in self.target_elements:
            phys = self.physical(el)
            self.quantities.append(_Quantity(_logical_name(el), phys, "element"))
        self.per_setting: dict[tuple, list[_Quantity]] = {s: [] for s in self.settings}
        for q in self.quantities:
            for s in self.settings:
                if _evaluable(q.operator, self.letters(s)):
                    q.setting = self.setting_name(s)
                    self.per_setting[s].append(q)
                    break
        self.checks = {}
        for s in self.settings:
            letters = self.letters(s)
            checks = []
            for role in self.spec.outputs:
                checks += [g for g in self.codes[role].generators if _evaluable(g, letters)]
            for step in self.spec.readouts:
                code = self.codes[step.role]
                pre = readout_letters(code, step.basis)
                checks += [g for g in code.generators if _evaluable(g, pre)]
            self.checks[s] = checks

    def encode(self, state: StabilizerTableau, executor: Executor, noisy: bool = False) -> None:
        for role, label in self.labels.items():
            encode(state, self.codes[role], label, measure=executor if noisy else None)


# ---------------------------------------------------------------------------
# results


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    document: dict
    records: list[dict] = field(default_factory=list)

    def __getitem__(self, key):
        return self.document[key]

    @property
    def fidelity_raw(self) -> float:
        return self.document["fidelity"]["raw"]["value"]

    @property
    def fidelity_postselected(self) -> float:
        return self.document["fidelity"]["postselected"]["value"]

    def logical(self, name: str, postselected: bool = False) -> float:
        return self.document["logicals"][name]["postselected" if postselected else "raw"]["value"]

    def stabilizer(self, name: str) -> float:
        return self.document["stabilizers"][name]["value"]

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.document), indent=2, sort_keys=True, allow_nan=False) + "\n"

    def csv_rows(self) -> list[list]:
        rows = []
        doc = self.document
        for name, q in doc["stabilizers"].items():
            rows.append([name, q["value"], q["se"], q["kept"], q["total"]])
        for name, q in doc["logicals"].items():
            raw = q["raw"]
            rows.append([name, raw["value"], raw["se"], raw["kept"], q["total"]])
        for which in ("raw", "postselected"):
            f = doc["fidelity"][which]
            rows.append([f"fidelity_{which}", f["value"], f["se"], f["kept"], f["total"]])
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["name", "value", "se", "kept", "total"])
        for row in self.csv_rows():
            writer.writerow(["" if isinstance(v, float) and not math.isfinite(v) else v for v in row])
        return buf.getvalue()


def _jsonable(value):
    """Undefined estimates (no kept shots) become null so the output is strict JSON."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _fidelity(plan: _Plan, element_quantities: list[_Quantity], postselected: bool, kept: int, total: int) -> dict:
    k = len(plan.spec.outputs)
    terms = [q.estimate(postselected) for q in element_quantities]
    if any(t["kept"] == 0 for t in terms):
        value = se = float("nan")
    else:
        value = (1 + sum(t["value"] for t in terms)) / 2**k
        se = math.sqrt(sum(t["se"] ** 2 for t in terms)) / 2**k
    clipped = not math.isnan(value) and not 0.0 <= value <= 1.0
    return {
        "value": min(1.0, max(0.0, value)) if clipped else value,
        "unclipped": value,
        "clipped": clipped,
        "se": se,
        "kept": kept,
        "total": total,
    }


def run(cfg: ExperimentConfig) -> ExperimentResult:
    """Run ``cfg.shots`` shots in every readout setting and summarize."""
    plan = _Plan(cfg)
    spec = plan.spec
    policy = cfg.ancilla_policy
    counts = {}
    joint_counts = {name: {"0": 0, "1": 0} for name in spec.branch_names}
    records: list[dict] = []
    for setting in plan.settings:
        sname = plan.setting_name(setting)
        tally = {"total": 0, "kept_ancilla": 0, "kept_detection": 0}
        quantities = plan.per_setting[setting]
        checks = plan.checks[setting]
        letters = list(zip(spec.outputs, setting))
        for shot in range(cfg.shots):
            rng = shot_rng(cfg.seed, sname, shot)
            executor = Executor(rng, cfg.noise, plan.ancillas)
            tally["total"] += 1
            if plan.template is not None:
                state = plan.template.copy()
            else:
                state = StabilizerTableau(plan.n)
                plan.encode(state, executor, noisy=True)
            try:
                outcome = run_protocol(spec, state, executor, plan.forced, correct=plan.correct)
            except ImpossibleOutcomeError:
                if not plan.noisy:
                    raise
                if cfg.record_shots:
                    records.append({"setting": sname, "shot": shot, "impossible": True})
                continue
            kept_anc = policy.accepts(outcome.ancilla_bits)
            rec = None
            if cfg.record_shots:
                rec = {"setting": sname, "shot": shot, **outcome.to_dict(), "kept_ancilla": kept_anc}
                records.append(rec)
            if not kept_anc:
                continue
            tally["kept_ancilla"] += 1
            for name, bit in zip(spec.branch_names, outcome.branch):
                joint_counts[name][str(bit)] += 1
            bits: dict[int, int] = {}
            for role, basis in letters:
                bits.update(read_code(state, plan.codes[role], basis, executor, outcome.frame))
            for role_bits in outcome.readout_bits.values():
                bits.update(role_bits)
            passed = all(_value(g, bits) == 1 for g in checks)
            if cfg.detection_policy == "none":
                passed = True
            if rec is not None:
                rec["kept_detection"] = passed
                rec["readout"] = {str(q + 1): b for q, b in sorted(bits.items())}
            if passed:
                tally["kept_detection"] += 1
            for q in quantities:
                v = _value(q.operator, bits)
                q.raw_sum += v
                q.raw_n += 1
                if passed:
                    q.ps_sum += v
                    q.ps_n += 1
        counts[sname] = tally
    return ExperimentResult(cfg, _summarize(plan, counts, joint_counts), records)


def _summarize(plan: _Plan, counts: dict, joint_counts: dict) -> dict:
    cfg = plan.cfg
    by_setting_total = {s: c["total"] for s, c in counts.items()}
    by_setting_anc = {s: c["kept_ancilla"] for s, c in counts.items()}
    by_setting_det = {s: c["kept_detection"] for s, c in counts.items()}

    stabilizers = {}
    logicals = {}
    elements = {}
    for q in plan.quantities:
        total = by_setting_total.get(q.setting, 0)
        if q.kind == "stabilizer":
            stabilizers[q.name] = {
                "operator": format_pauli(q.operator),
                "setting": q.setting,
                "total": total,
                **q.estimate(),
            }
        elif q.kind == "logical":
            logicals[q.name] = {
                "operator": format_pauli(q.operator),
                "setting": q.setting,
                "total": total,
                "raw": q.estimate(),
                "postselected": q.estimate(True),
            }
        else:
            elements[q.name] = {
                "operator": format_pauli(q.operator),
                "setting": q.setting,
                "raw": q.estimate(),
                "postselected": q.estimate(True),
            }
    element_qs = [q for q in plan.quantities if q.kind == "element"]
    total_all = sum(by_setting_total.values())
    anc_all = sum(by_setting_anc.values())
    det_all = sum(by_setting_det.values())
    fidelity = {
        "raw": _fidelity(plan, element_qs, False, anc_all, total_all),
        "postselected": _fidelity(plan, element_qs, True, det_all, total_all),
    }

    def ratio(a, b):
        return a / b if b else float("nan")

    survival = {}
    for s, c in counts.items():
        survival[s] = {
            "ancilla": ratio(c["kept_ancilla"], c["total"]),
            "detection": ratio(c["kept_detection"], c["kept_ancilla"]),
            "total": ratio(c["kept_detection"], c["total"]),
        }
    survival["mean"] = {
        key: sum(v[key] for k, v in survival.items()) / len(counts) for key in ("ancilla", "detection", "total")
    }

    stab_values = [v for v in stabilizers.values() if v["kept"]]
    if stab_values:
        mean_stab = {
            "value": sum(v["value"] for v in stab_values) / len(stab_values),
            "se": math.sqrt(sum(v["se"] ** 2 for v in stab_values)) / len(stab_values),
        }
    else:
        mean_stab = {"value": float("nan"), "se": float("nan")}

    doc = {
        "artifact": "lattice_surgery",
        "version": __version__,
        "seed": cfg.seed,
        "config": cfg.to_dict(),
        "ancilla_layout": plan.spec.ancilla_layout(),
        "target": {
            "generators": [_logical_name(g) for g in plan.target],
            "outputs": list(plan.spec.outputs),
            "bell_state": _bell_name(plan.target),
            "pinned_m1": plan.m1_pinned,
            "joint_correction_applied": plan.correct,
        },
        "settings": counts,
        "stabilizers": stabilizers,
        "mean_stabilizer": mean_stab,
        "logicals": logicals,
        "target_elements": elements,
        "fidelity": fidelity,
        "survival": survival,
        "branch_counts": joint_counts,
    }
    return doc


def emit(result: ExperimentResult, json_path=None, csv_path=None, records_path=None) -> None:
    """Write the JSON document, CSV table, and optional per-shot JSONL records."""
    outputs = [(json_path, result.to_json)]
    outputs.append((csv_path, result.to_csv))
    outputs.append(
        (records_path, lambda: "".join(json.dumps(r, sort_keys=True) + "\n" for r in result.records))
    )
    for path, render in outputs:
        if path is None:
            continue
        try:
            Path(path).write_text(render())
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
