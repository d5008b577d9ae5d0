"""JSON model files and number formatting.

Chain file::

    {"states": ["a", "b"], "rows": [["1/2", "1/2"], [1, 0]], "initial": ["1", 0]}

Generator file::

    {"states": ["a", "b"], "rates": {"a->b": 2, "b->a": "1/3"}}

Numbers may be JSON numbers or "p/q" strings. ``states`` is optional for
chains (defaults to 0..n-1).
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np

from .chain import Distribution, StochasticMatrix, validate_distribution, validate_stochastic
from .errors import UsageError
from .jump import Generator, generator_from_rates

SCHEMA = "stochastik/1"


def _read_json(path) -> dict:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"no such file: {path}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise UsageError(f"{path}: top level must be an object")
    return data


def _number(x):
    if isinstance(x, bool) or not isinstance(x, (int, float, str)):
        raise UsageError(f"not a number: {x!r}")
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except ValueError as exc:
            raise UsageError(f"not a number: {x!r}") from exc
    return x


def parse_chain(data: dict, backend: str = "exact") -> tuple[StochasticMatrix, Distribution | None]:
    if "rows" not in data:
        raise UsageError("chain file needs a 'rows' entry")
    rows = [[_number(x) for x in r] for r in data["rows"]]
    labels = data.get("states")
    P = validate_stochastic(rows, backend, labels)
    nu = None
    if data.get("initial") is not None:
        nu = validate_distribution([_number(x) for x in data["initial"]], backend, n=P.n)
    return P, nu


def load_chain(path, backend: str = "exact"):
    return parse_chain(_read_json(path), backend)


def parse_generator(data: dict, backend: str = "exact") -> Generator:
    if "rates" not in data or not isinstance(data["rates"], dict):
        raise UsageError("generator file needs a 'rates' object")
    states = data.get("states")
    if states is None:
        names = set()
        for key in data["rates"]:
            a, _, b = key.partition("->")
            names.update([a.strip(), b.strip()])
        states = sorted(names)
    states = [str(s) for s in states]
    index = {s: k for k, s in enumerate(states)}
    rates = {}
    for key, v in data["rates"].items():
        a, sep, b = key.partition("->")
        a, b = a.strip(), b.strip()
        if not sep or a not in index or b not in index:
            raise UsageError(f"bad rate key {key!r}; expected 'i->j' with known states")
        rates[(index[a], index[b])] = _number(v)
    return generator_from_rates(len(states), rates, backend, labels=states)


def load_generator(path, backend: str = "exact") -> Generator:
    return parse_generator(_read_json(path), backend)


def load_cities(path) -> np.ndarray:
    """Distance matrix from {"coords": [[x, y], ...]} or {"matrix": [[...]]}."""
    from .mcmc import distances_from_coords

    data = _read_json(path)
    if "matrix" in data:
        return np.array(data["matrix"], dtype=float)
    if "coords" in data:
        return distances_from_coords(data["coords"])
    raise UsageError("city file needs 'coords' or 'matrix'")


def parse_law(text: str, n: int, backend: str = "exact") -> Distribution:
    """Comma-separated probabilities, e.g. "1/4,1/4,1/2"."""
    try:
        vals = [Fraction(x.strip()) for x in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"cannot parse distribution {text!r}") from exc
    return validate_distribution(vals, backend, n=n)


def number(x, digits: int = 12):
    """JSON-ready value: exact fractions come with their decimal value."""
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return {"exact": str(x.numerator), "decimal": float(x)}
        return {"exact": f"{x.numerator}/{x.denominator}", "decimal": round(float(x), digits)}
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x) or math.isnan(x):
            return str(x)
        return {"decimal": round(x, digits)}
    if isinstance(x, np.ndarray):
        return [number(v, digits) for v in x.tolist()]
    if isinstance(x, (list, tuple)):
        return [number(v, digits) for v in x]
    if isinstance(x, dict):
        return {str(k): number(v, digits) for k, v in x.items()}
    return x


def text_number(x, digits: int = 10) -> str:
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return str(x.numerator)
        return f"{x.numerator}/{x.denominator} ({float(x):.{digits}g})"
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.{digits}g}"
    return str(x)


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)
