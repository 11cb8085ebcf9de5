"""JSON instance, schedule and report files."""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Union

import numpy as np

from .network import (MATRIX, PRORATA, DynamicInstance, InvalidInstanceError,
                      PaymentSchedule, StaticInstance)


class InstanceFormatError(ValueError):
    """A file could not be read as an instance or schedule."""


def bundled_instances() -> list:
    root = resources.files("dynclear") / "instances"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def resolve_path(path) -> Path:
    """A filesystem path, or the name of a bundled instance."""
    p = Path(path)
    if p.exists():
        return p
    name = p.name[:-5] if p.name.endswith(".json") else p.name
    if name in bundled_instances():
        return Path(str(resources.files("dynclear") / "instances" / f"{name}.json"))
    raise InstanceFormatError(f"{path}: no such file or bundled instance")


def _load_json(path):
    p = resolve_path(path)
    try:
        return json.loads(p.read_text()), p
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{p}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def _matrix(doc, key, src, ndim):
    if key not in doc:
        raise InstanceFormatError(f"{src}: missing field '{key}'")
    try:
        a = np.array(doc[key], dtype=float)
    except (TypeError, ValueError):
        raise InstanceFormatError(f"{src}: field '{key}' is not a numeric array") from None
    if a.ndim not in ndim:
        raise InstanceFormatError(f"{src}: field '{key}' has {a.ndim} dimensions (ragged rows?)")
    return a


def instance_from_dict(doc: dict, src="<instance>") -> Union[StaticInstance, DynamicInstance]:
    """Build an instance from its JSON document.

    A document is dynamic when it sets ``alpha``, ``eta`` or ``horizon`` or
    lists more than one inflow period; otherwise it is static.
    """
    if not isinstance(doc, dict):
        raise InstanceFormatError(f"{src}: top level must be an object")
    P = _matrix(doc, "liabilities", src, (2,))
    c = _matrix(doc, "inflows", src, (1, 2))
    n = doc.get("n", P.shape[0])
    if P.shape != (n, n):
        raise InstanceFormatError(f"{src}: 'liabilities' has shape {P.shape}, expected ({n}, {n})")
    if c.shape[-1] != n:
        raise InstanceFormatError(f"{src}: 'inflows' rows have {c.shape[-1]} entries, expected {n}")
    ext = doc.get("external_node")
    dynamic = any(k in doc for k in ("alpha", "eta", "horizon")) or (c.ndim == 2 and c.shape[0] > 1)
    if not dynamic:
        return StaticInstance(P, c.reshape(-1), ext)
    c = np.atleast_2d(c)
    horizon = doc.get("horizon", c.shape[0])
    if horizon != c.shape[0]:
        raise InstanceFormatError(
            f"{src}: 'horizon' is {horizon} but 'inflows' has {c.shape[0]} periods")
    return DynamicInstance(P, c, doc.get("alpha", 1.0), doc.get("eta", 0.0), ext)


def parse_instance(path) -> Union[StaticInstance, DynamicInstance]:
    doc, p = _load_json(path)
    try:
        return instance_from_dict(doc, str(p))
    except InvalidInstanceError as exc:
        raise InvalidInstanceError(f"{p}: {exc}") from None


def instance_to_dict(inst) -> dict:
    doc = {"n": inst.n, "liabilities": inst.liabilities.tolist()}
    if inst.external_node is not None:
        doc["external_node"] = inst.external_node
    if isinstance(inst, StaticInstance):
        doc["inflows"] = inst.inflow.tolist()
    else:
        doc.update(inflows=inst.inflows.tolist(), alpha=inst.alpha,
                   horizon=inst.horizon, eta=inst.eta)
    return doc


def schedule_to_dict(schedule: PaymentSchedule) -> dict:
    inst = schedule.instance
    return {
        "mode": schedule.mode,
        "n": inst.n,
        "horizon": schedule.horizon,
        "alpha": inst.alpha,
        "eta": inst.eta,
        "payments": schedule.payments.tolist(),
    }


def load_schedule(path, instance) -> PaymentSchedule:
    """Read a schedule file and attach it to ``instance``.

    ``alpha``, ``eta`` and the horizon recorded in the file take precedence
    over the instance's own values.
    """
    doc, p = _load_json(path)
    mode = doc.get("mode", MATRIX)
    if mode not in (MATRIX, PRORATA):
        raise InstanceFormatError(f"{p}: unknown mode {mode!r}")
    pay = _matrix(doc, "payments", p, (2, 3))
    if isinstance(instance, StaticInstance):
        instance = instance.as_dynamic()
    dyn = instance.replace(horizon=pay.shape[0], alpha=doc.get("alpha", instance.alpha),
                           eta=doc.get("eta", instance.eta))
    try:
        return PaymentSchedule(dyn, pay, mode)
    except ValueError as exc:
        raise InstanceFormatError(f"{p}: {exc}") from None


def dump_json(obj, path):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n")
