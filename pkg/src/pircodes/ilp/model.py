"""Integer linear models and their LP-format text form."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

GE, LE, EQ = ">=", "<=", "="
SENSES = (GE, LE, EQ)


@dataclass(frozen=True)
class Variable:
    name: str
    lb: int = 0
    ub: Optional[int] = None
    integral: bool = True


@dataclass(frozen=True)
class Constraint:
    terms: Tuple[Tuple[int, int], ...]  # (variable index, coefficient)
    sense: str
    rhs: int
    name: str = ""

    def activity(self, values: Sequence[int]) -> int:
        return sum(a * values[j] for j, a in self.terms)

    def satisfied(self, values: Sequence[int]) -> bool:
        act = self.activity(values)
        if self.sense == GE:
            return act >= self.rhs
        if self.sense == LE:
            return act <= self.rhs
        return act == self.rhs

    def key(self) -> Tuple:
        return (tuple(sorted(self.terms)), self.sense, self.rhs)


class ModelError(ValueError):
    pass


@dataclass
class IlpModel:
    variables: List[Variable] = field(default_factory=list)
    constraints: List[Constraint] = field(default_factory=list)
    objective: Dict[int, int] = field(default_factory=dict)
    meta: Dict[str, object] = field(default_factory=dict)
    # per variable: tuple of the combinatorial objects it stands for
    # (("x", point),) or (("y", i, points),); orbits after symmetry reduction
    keys: List[Tuple] = field(default_factory=list)
    _index: Dict[str, int] = field(default_factory=dict, repr=False)

    def add_var(self, name: str, lb: int = 0, ub: Optional[int] = None, integral: bool = True,
                key: Tuple = ()) -> int:
        if name in self._index:
            raise ModelError(f"duplicate variable {name}")
        if ub is not None and ub < lb:
            raise ModelError(f"empty domain for {name}: [{lb}, {ub}]")
        self._index[name] = len(self.variables)
        self.variables.append(Variable(name, lb, ub, integral))
        self.keys.append(key)
        return self._index[name]

    def var(self, name: str) -> int:
        return self._index[name]

    def has_var(self, name: str) -> bool:
        return name in self._index

    def set_bounds(self, j: int, lb: Optional[int] = None, ub: Optional[int] = None) -> None:
        v = self.variables[j]
        self.variables[j] = Variable(v.name, v.lb if lb is None else lb, v.ub if ub is None else ub, v.integral)

    def add_constraint(self, terms, sense: str, rhs: int, name: str = "") -> None:
        if sense not in SENSES:
            raise ModelError(f"unknown sense {sense!r}")
        merged: Dict[int, int] = {}
        for j, a in terms:
            if not 0 <= j < len(self.variables):
                raise ModelError(f"constraint {name or len(self.constraints)} references unknown variable {j}")
            merged[j] = merged.get(j, 0) + a
        clean = tuple(sorted((j, a) for j, a in merged.items() if a))
        self.constraints.append(Constraint(clean, sense, rhs, name))

    def set_objective(self, terms) -> None:
        self.objective = {}
        for j, c in terms:
            self.objective[j] = self.objective.get(j, 0) + c

    @property
    def num_vars(self) -> int:
        return len(self.variables)

    def objective_value(self, values: Sequence[int]) -> int:
        return sum(c * values[j] for j, c in self.objective.items())

    def check(self, values: Sequence[int]) -> List[str]:
        """Names of violated constraints and bounds (empty when feasible)."""
        bad = []
        for j, v in enumerate(self.variables):
            if values[j] < v.lb or (v.ub is not None and values[j] > v.ub):
                bad.append(f"bound:{v.name}")
        for t, c in enumerate(self.constraints):
            if not c.satisfied(values):
                bad.append(c.name or f"c{t}")
        return bad

    def copy(self) -> "IlpModel":
        m = IlpModel(list(self.variables), list(self.constraints), dict(self.objective), dict(self.meta),
                     list(self.keys))
        m._index = dict(self._index)
        return m


# ---------------------------------------------------------------------------
# LP text format


def _fmt_terms(terms, names) -> str:
    parts = []
    for j, a in terms:
        sign = "-" if a < 0 else "+"
        mag = abs(a)
        coef = "" if mag == 1 else f"{mag} "
        parts.append(f"{sign} {coef}{names[j]}")
    text = " ".join(parts) if parts else "0"
    return text[2:] if text.startswith("+ ") else text


def _wrap(prefix: str, body: str, width: int = 100) -> List[str]:
    out, line = [], prefix
    for tok in body.split(" "):
        if len(line) + len(tok) + 1 > width and line.strip():
            out.append(line)
            line = "   "
        line += (" " if not line.endswith(" ") else "") + tok
    out.append(line)
    return out


def export_lp(model: IlpModel) -> str:
    """Deterministic LP text: objective, constraints, bounds, general integers."""
    names = [v.name for v in model.variables]
    lines = [f"\\ {k}={model.meta[k]}" for k in sorted(model.meta)]
    lines.append("Minimize")
    lines += _wrap(" obj:", _fmt_terms(sorted(model.objective.items()), names))
    lines.append("Subject To")
    for t, c in enumerate(model.constraints):
        label = c.name or f"c{t}"
        lines += _wrap(f" {label}:", f"{_fmt_terms(c.terms, names)} {c.sense} {c.rhs}")
    lines.append("Bounds")
    for v in model.variables:
        if v.ub is None:
            lines.append(f" {v.name} >= {v.lb}")
        else:
            lines.append(f" {v.lb} <= {v.name} <= {v.ub}")
    ints = [v.name for v in model.variables if v.integral]
    if ints:
        lines.append("Generals")
        for start in range(0, len(ints), 8):
            lines.append(" " + " ".join(ints[start:start + 8]))
    lines.append("End")
    return "\n".join(lines) + "\n"


_TERM = re.compile(r"([+-]?)\s*(\d*)\s*([A-Za-z_][\w.]*)")


def _parse_terms(expr: str, model: IlpModel) -> List[Tuple[int, int]]:
    terms = []
    expr = expr.strip()
    if expr == "0":
        return terms
    pos = 0
    for m in _TERM.finditer(expr):
        if expr[pos:m.start()].strip():
            raise ModelError(f"cannot parse LP expression near {expr[pos:m.start()]!r}")
        pos = m.end()
        sign = -1 if m.group(1) == "-" else 1
        coef = int(m.group(2)) if m.group(2) else 1
        name = m.group(3)
        if not model.has_var(name):
            model.add_var(name)
        terms.append((model.var(name), sign * coef))
    if expr[pos:].strip():
        raise ModelError(f"trailing text in LP expression: {expr[pos:]!r}")
    return terms


def parse_lp(text: str) -> IlpModel:
    """Reader for the subset of the LP format that export_lp writes."""
    model = IlpModel()
    section = None
    logical: List[Tuple[str, str]] = []
    for raw in text.splitlines():
        if raw.startswith("\\"):
            body = raw[1:].strip()
            if "=" in body:
                k, v = body.split("=", 1)
                model.meta[k.strip()] = _meta_value(v.strip())
            continue
        stripped = raw.strip()
        low = stripped.lower()
        if low in ("minimize", "subject to", "bounds", "generals", "end"):
            section = low
            continue
        if not stripped:
            continue
        if raw.startswith("   ") and logical:
            logical[-1] = (logical[-1][0], logical[-1][1] + " " + stripped)
        else:
            logical.append((section, stripped))
    bounds, generals, rows = [], [], []
    objective = ""
    for sec, line in logical:
        if sec == "minimize":
            objective = line.split(":", 1)[1] if ":" in line else line
        elif sec == "subject to":
            rows.append(line)
        elif sec == "bounds":
            bounds.append(line)
        elif sec == "generals":
            generals.extend(line.split())
        elif sec is None:
            raise ModelError(f"content outside any section: {line!r}")
    # declare variables in bound order so indices match the writer
    for line in bounds:
        m = re.fullmatch(r"(-?\d+)\s*<=\s*(\S+)\s*<=\s*(-?\d+)", line)
        if m:
            model.add_var(m.group(2), int(m.group(1)), int(m.group(3)), integral=False)
            continue
        m = re.fullmatch(r"(\S+)\s*>=\s*(-?\d+)", line)
        if m:
            model.add_var(m.group(1), int(m.group(2)), None, integral=False)
            continue
        raise ModelError(f"cannot parse bound line {line!r}")
    for name in generals:
        j = model.var(name)
        v = model.variables[j]
        model.variables[j] = Variable(v.name, v.lb, v.ub, True)
    model.set_objective(_parse_terms(objective, model))
    for line in rows:
        name, _, body = line.partition(":")
        m = re.fullmatch(r"(.*?)\s*(>=|<=|=)\s*(-?\d+)", body.strip())
        if not m:
            raise ModelError(f"cannot parse constraint {line!r}")
        model.add_constraint(_parse_terms(m.group(1), model), m.group(2), int(m.group(3)), name.strip())
    return model


def _meta_value(v: str):
    if re.fullmatch(r"-?\d+", v):
        return int(v)
    if v in ("True", "False"):
        return v == "True"
    return v
