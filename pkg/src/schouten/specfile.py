"""Line-oriented metric-spec files and builtin fixture names.

    # round S^2 times a line
    [chart]
    dim = 3
    coords = x t phi
    g[1][1] = 1
    g[2][2] = 1
    g[3][3] = sin(t)^2
    domain[1] = -2 2
    domain[2] = 0.2 2.94
    domain[3] = -3.14 3.14
    [potential]
    f = 0.5 * x^2
    lambda = 0.5
    [params]
    a = 2

Off-diagonal entries default to 0 and need only be given once (i <= j).
"""
from __future__ import annotations

import os
import re

from .expr import ZERO, ExprError, parse, simplify, to_source
from .geometry import Chart, GeometryError, check_metric
from .rigid import RigidSpec, RigidSpecError, build_rigid, perturbed_gaussian
from .soliton import SolitonData, SolitonError

PROBE_POINTS = 8
SECTIONS = ("chart", "potential", "params")
_G_KEY = re.compile(r"^g\[(\d+)\]\[(\d+)\]$")
_DOMAIN_KEY = re.compile(r"^domain\[(\d+)\]$")
_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class SpecFileError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


class DimensionMismatchError(SpecFileError):
    pass


class MissingKeyError(SpecFileError):
    pass


def _constant(text: str, line: int, what: str) -> float:
    try:
        e = simplify(parse(text))
    except ExprError as exc:
        raise SpecFileError(f"{what}: {exc}", line) from None
    if not e.is_const:
        raise SpecFileError(f"{what} must be a constant, got {text!r}", line)
    return float(e.value)


def _expression(text: str, line: int, what: str):
    try:
        return parse(text)
    except ExprError as exc:
        raise SpecFileError(f"{what}: {exc}", line) from None


def loads_spec(text: str, name: str = "spec") -> SolitonData:
    section = None
    seen: dict[tuple, int] = {}
    data = {s: {} for s in SECTIONS}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.fullmatch(r"\[(\w+)\]", line)
        if m:
            section = m.group(1)
            if section not in SECTIONS:
                raise SpecFileError(f"unknown section [{section}]", lineno)
            continue
        if section is None:
            raise SpecFileError("entry outside of any section", lineno)
        if "=" not in line:
            raise SpecFileError("expected 'key = value'", lineno)
        key, value = (p.strip() for p in line.split("=", 1))
        key = key.replace(" ", "")
        if not value:
            raise SpecFileError(f"empty value for {key}", lineno)
        if (section, key) in seen:
            raise SpecFileError(f"duplicate key {key} (first on line {seen[section, key]})", lineno)
        seen[section, key] = lineno
        data[section][key] = (value, lineno)

    chart, pot, params = data["chart"], data["potential"], data["params"]
    for sec, key in (("chart", "dim"), ("chart", "coords"), ("potential", "f"), ("potential", "lambda")):
        if key not in data[sec]:
            raise MissingKeyError(f"missing required key '{key}' in [{sec}]")

    value, ln = chart.pop("dim")
    try:
        n = int(value)
    except ValueError:
        raise SpecFileError(f"dim must be an integer, got {value!r}", ln) from None
    if n < 1:
        raise SpecFileError("dim must be positive", ln)
    value, ln = chart.pop("coords")
    coords = value.split()
    if len(coords) != n:
        raise DimensionMismatchError(f"dim = {n} but {len(coords)} coordinates given", ln)
    for c in coords:
        if not _NAME.match(c):
            raise SpecFileError(f"bad coordinate name {c!r}", ln)
    if len(set(coords)) != n:
        raise SpecFileError("coordinate names must be distinct", ln)

    g = [[None] * n for _ in range(n)]
    domain = [None] * n
    for key, (value, ln) in chart.items():
        m = _G_KEY.match(key)
        if m:
            i, j = int(m.group(1)), int(m.group(2))
            if not (1 <= i <= n and 1 <= j <= n):
                raise DimensionMismatchError(f"{key} is outside a {n}x{n} metric", ln)
            i, j = min(i, j) - 1, max(i, j) - 1
            if g[i][j] is not None:
                raise SpecFileError(f"g[{i + 1}][{j + 1}] given twice", ln)
            g[i][j] = _expression(value, ln, key)
            continue
        m = _DOMAIN_KEY.match(key)
        if m:
            i = int(m.group(1))
            if not 1 <= i <= n:
                raise DimensionMismatchError(f"{key} is outside dimension {n}", ln)
            parts = value.split()
            if len(parts) != 2:
                raise SpecFileError(f"{key} needs two numbers 'lo hi'", ln)
            lo, hi = (_constant(p, ln, key) for p in parts)
            if not lo < hi:
                raise SpecFileError(f"{key}: need lo < hi", ln)
            domain[i - 1] = (lo, hi)
            continue
        raise SpecFileError(f"unknown key {key!r} in [chart]", ln)

    for i in range(n):
        if g[i][i] is None:
            raise MissingKeyError(f"missing required key 'g[{i + 1}][{i + 1}]' in [chart]")
        if domain[i] is None:
            raise MissingKeyError(f"missing required key 'domain[{i + 1}]' in [chart]")
    full = [[g[min(i, j)][max(i, j)] or ZERO for j in range(n)] for i in range(n)]

    values = {}
    for key, (value, ln) in params.items():
        if not _NAME.match(key):
            raise SpecFileError(f"bad parameter name {key!r}", ln)
        if key in coords:
            raise SpecFileError(f"parameter {key!r} clashes with a coordinate", ln)
        values[key] = _constant(value, ln, key)

    f_text, f_ln = pot.pop("f")
    f = _expression(f_text, f_ln, "f")
    lam_text, lam_ln = pot.pop("lambda")
    lam = _constant(lam_text, lam_ln, "lambda")
    f0 = None
    if "f0" in pot:
        f0_text, f0_ln = pot.pop("f0")
        f0 = _constant(f0_text, f0_ln, "f0")
    for key, (_, ln) in pot.items():
        raise SpecFileError(f"unknown key {key!r} in [potential]", ln)

    known = set(coords) | set(values)
    for i in range(n):
        for j in range(i, n):
            stray = full[i][j].free_vars - known
            if stray:
                raise SpecFileError(f"g[{i + 1}][{j + 1}] uses undeclared names {sorted(stray)}",
                                    seen.get(("chart", f"g[{i + 1}][{j + 1}]")))
    stray = f.free_vars - known
    if stray:
        raise SpecFileError(f"f uses undeclared names {sorted(stray)}", f_ln)
    try:
        ch = Chart(coords, full, domain, params=values, name=name)
        check_metric(ch.metric_values(ch.sample(PROBE_POINTS)))  # catch an indefinite metric early
        return SolitonData(ch, f, lam, f0=f0, kind="file")
    except (GeometryError, SolitonError, ExprError) as exc:
        raise SpecFileError(str(exc)) from None


def load_spec(path) -> SolitonData:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return loads_spec(text, name=os.path.basename(str(path)))


def dumps_spec(sd: SolitonData) -> str:
    chart = sd.chart
    n = chart.n
    out = [f"# {chart.name}", "[chart]", f"dim = {n}", "coords = " + " ".join(chart.coords)]
    for i in range(n):
        for j in range(i, n):
            e = chart.g[i][j]
            if i == j or e != ZERO:
                out.append(f"g[{i + 1}][{j + 1}] = {to_source(e)}")
    for i, (lo, hi) in enumerate(chart.domain):
        out.append(f"domain[{i + 1}] = {float(lo)!r} {float(hi)!r}")
    out += ["[potential]", f"f = {to_source(sd.f)}", f"lambda = {sd.lam!r}"]
    if sd.f0 is not None:
        out.append(f"f0 = {float(sd.f0)!r}")
    if chart.params:
        out.append("[params]")
        out += [f"{k} = {float(v)!r}" for k, v in chart.params.items()]
    return "\n".join(out) + "\n"


# -- builtin fixtures ------------------------------------------------------------

FIXTURE_KINDS = ("gaussian", "cylinder", "einstein", "rigid", "perturbed-gaussian")


def _fixture_args(text: str) -> dict:
    args = {}
    for item in filter(None, (p.strip() for p in text.split(","))):
        if "=" not in item:
            raise SpecFileError(f"fixture argument {item!r} is not key=value")
        k, v = (p.strip() for p in item.split("=", 1))
        args[k] = v
    return args


def fixture(name: str) -> SolitonData:
    """Build a fixture from e.g. 'cylinder:n=3,k=2,lambda=0.5' or 'rigid:n=5,k=2,lambda=1'."""
    kind, _, rest = name.partition(":")
    kind = kind.strip().lower()
    if kind not in FIXTURE_KINDS:
        raise SpecFileError(f"unknown fixture {kind!r}; known: {', '.join(FIXTURE_KINDS)}")
    args = _fixture_args(rest)
    allowed = {"n", "lambda", "k", "factor", "scale", "eps"}
    bad = set(args) - allowed
    if bad:
        raise SpecFileError(f"unknown fixture arguments {sorted(bad)}")
    try:
        n = int(args.pop("n"))
        lam = float(args.pop("lambda", 1.0))
        scale = float(args.pop("scale", 1.0))
        if kind == "perturbed-gaussian":
            return perturbed_gaussian(n, lam, float(args.pop("eps", 0.01)))
        k = {"gaussian": 0, "cylinder": n - 1, "einstein": n}.get(kind)
        if "k" in args:
            given = int(args.pop("k"))
            if k is not None and given != k:
                raise SpecFileError(f"{kind} fixture in dimension {n} has k = {k}, got {given}")
            k = given
        if k is None:
            raise SpecFileError("rigid fixture needs k")
        factor = args.pop("factor", "auto")
        return build_rigid(RigidSpec(n, k, lam, factor if k else "none", scale))
    except KeyError:
        raise SpecFileError("fixture needs n") from None
    except RigidSpecError as exc:
        raise SpecFileError(str(exc)) from None
    except ValueError as exc:
        if isinstance(exc, SpecFileError):
            raise
        raise SpecFileError(f"bad fixture argument: {exc}") from None


def resolve(source: str) -> SolitonData:
    """A file path if one exists, otherwise a builtin fixture name."""
    if os.path.exists(source):
        return load_spec(source)
    if source.partition(":")[0].strip().lower() in FIXTURE_KINDS:
        return fixture(source)
    raise SpecFileError(f"no such file or fixture: {source!r}")
