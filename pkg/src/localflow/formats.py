"""Line-oriented text formats: graphs, demands, and solve artifacts.

Everything is plain text with one record per line so fixtures diff
cleanly.  Blank lines and ``#`` comments are ignored everywhere.  Parse
errors carry 1-based line numbers.

Graph files: an ``n m`` header, then exactly m ``u v`` edge lines.

Demand files: a ``k`` header; then ``v value`` lines for k = 1, or
``j v value`` lines with 1-based commodity j for k >= 2.  Repeated
(commodity, vertex) lines accumulate.

Artifacts open with a ``kind: flow|cut-certificate|potential-certificate``
line, then ``key: value`` headers, then the body records.  Per-commodity
flow maps are single-line JSON objects keyed by edge id in ascending
order; commodity labels in artifacts are 1-based like demand files.
"""

from __future__ import annotations

import json
import math

from .graph import Graph, build_graph
from .multi import PotentialCertificate
from .single import CutCertificate

__all__ = ["parse_graph", "format_graph", "parse_demands", "format_demands",
           "parse_artifact", "format_flow_artifact", "format_cut_artifact",
           "format_potential_artifact"]


class FormatError(ValueError):
    """Malformed input text; message includes the 1-based line number."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def _content_lines(text: str):
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield i, line


def _parse_int(lineno: int, tok: str, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise FormatError(lineno, f"{what} must be an integer, got {tok!r}") \
            from None


def _parse_float(lineno: int, tok: str, what: str) -> float:
    try:
        x = float(tok)
    except ValueError:
        raise FormatError(lineno, f"{what} must be a number, got {tok!r}") \
            from None
    if not math.isfinite(x):
        raise FormatError(lineno, f"{what} must be finite, got {tok!r}")
    return x


def parse_graph(text: str) -> Graph:
    lines = list(_content_lines(text))
    if not lines:
        raise FormatError(1, "empty graph file; expected an 'n m' header")
    lineno, header = lines[0]
    toks = header.split()
    if len(toks) != 2:
        raise FormatError(lineno, f"header must be 'n m', got {header!r}")
    n = _parse_int(lineno, toks[0], "vertex count")
    m = _parse_int(lineno, toks[1], "edge count")
    if len(lines) - 1 != m:
        where = lines[-1][0] if len(lines) > 1 else lineno
        raise FormatError(where, f"header promises {m} edges, "
                                 f"file has {len(lines) - 1} edge lines")
    edges = []
    for lineno, line in lines[1:]:
        toks = line.split()
        if len(toks) != 2:
            raise FormatError(lineno, f"edge line must be 'u v', got {line!r}")
        edges.append((_parse_int(lineno, toks[0], "endpoint"),
                      _parse_int(lineno, toks[1], "endpoint")))
    try:
        return build_graph(n, edges)
    except ValueError as exc:
        raise FormatError(lines[0][0], str(exc)) from None


def format_graph(g: Graph) -> str:
    out = [f"{g.n} {g.m}"]
    out.extend(f"{int(g.tails[e])} {int(g.heads[e])}" for e in range(g.m))
    return "\n".join(out) + "\n"


def parse_demands(text: str) -> list[dict[int, float]]:
    lines = list(_content_lines(text))
    if not lines:
        raise FormatError(1, "empty demand file; expected a 'k' header")
    lineno, header = lines[0]
    toks = header.split()
    if len(toks) != 1:
        raise FormatError(lineno, f"header must be the commodity count, "
                                  f"got {header!r}")
    k = _parse_int(lineno, toks[0], "commodity count")
    if k < 1:
        raise FormatError(lineno, f"commodity count must be >= 1, got {k}")
    bs: list[dict[int, float]] = [{} for _ in range(k)]
    for lineno, line in lines[1:]:
        toks = line.split()
        if k == 1:
            if len(toks) != 2:
                raise FormatError(lineno, f"demand line must be 'v value' "
                                          f"for one commodity, got {line!r}")
            j = 1
            vtok, xtok = toks
        else:
            if len(toks) != 3:
                raise FormatError(lineno, f"demand line must be 'j v value', "
                                          f"got {line!r}")
            j = _parse_int(lineno, toks[0], "commodity index")
            vtok, xtok = toks[1], toks[2]
        if not 1 <= j <= k:
            raise FormatError(lineno, f"commodity index {j} outside 1..{k}")
        v = _parse_int(lineno, vtok, "vertex")
        x = _parse_float(lineno, xtok, "value")
        bs[j - 1][v] = bs[j - 1].get(v, 0.0) + x
    return bs


def format_demands(bs: list) -> str:
    k = len(bs)
    out = [f"{k}"]
    for j, b in enumerate(bs, start=1):
        for v in sorted(b):
            if k == 1:
                out.append(f"{v} {b[v]!r}")
            else:
                out.append(f"{j} {v} {b[v]!r}")
    return "\n".join(out) + "\n"


def _edge_map_json(entries: dict) -> str:
    return json.dumps({str(e): entries[e] for e in sorted(entries)},
                      separators=(", ", ": "))


def _parse_edge_map(lineno: int, blob: str, what: str) -> dict[int, float]:
    try:
        doc = json.loads(blob)
    except json.JSONDecodeError as exc:
        raise FormatError(lineno, f"bad JSON in {what}: {exc}") from None
    if not isinstance(doc, dict):
        raise FormatError(lineno, f"{what} must be a JSON object")
    out = {}
    for key, val in doc.items():
        out[_parse_int(lineno, key, f"{what} key")] = \
            _parse_float(lineno, str(val), f"{what} value")
    return out


def format_flow_artifact(eps: float, iterations: int, flows: list,
                         numerators: list, residuals: list) -> str:
    out = ["kind: flow", f"eps: {eps!r}", f"iterations: {iterations}",
           f"commodities: {len(flows)}"]
    for j in range(len(flows)):
        out.append(f"flow {j + 1} {_edge_map_json(flows[j])}")
        nums = {e: int(c) for e, c in numerators[j].items()}
        out.append(f"numerators {j + 1} "
                   + json.dumps({str(e): nums[e] for e in sorted(nums)},
                                separators=(", ", ": ")))
        out.append(f"residual {j + 1} {_edge_map_json(residuals[j])}")
    return "\n".join(out) + "\n"


def format_cut_artifact(cert: CutCertificate) -> str:
    out = ["kind: cut-certificate", f"b_of_s: {cert.b_of_s!r}",
           f"boundary: {cert.boundary}", f"volume: {cert.volume}"]
    out.extend(f"vertex {v}" for v in sorted(cert.s))
    return "\n".join(out) + "\n"


def format_potential_artifact(cert: PotentialCertificate) -> str:
    out = ["kind: potential-certificate", f"lhs: {cert.lhs!r}",
           f"rhs: {cert.rhs!r}"]
    for (v, j) in sorted(cert.phi, key=lambda p: (p[1], p[0])):
        out.append(f"phi {j + 1} {v} {cert.phi[(v, j)]!r}")
    return "\n".join(out) + "\n"


def parse_artifact(text: str):
    """Parse any artifact; returns a dict with a ``kind`` key.

    flow: keys eps, iterations, flows, numerators, residuals.
    cut-certificate: key certificate (a CutCertificate).
    potential-certificate: key certificate (a PotentialCertificate).
    """
    lines = list(_content_lines(text))
    if not lines:
        raise FormatError(1, "empty artifact file; expected a 'kind:' line")
    lineno, first = lines[0]
    if not first.startswith("kind:"):
        raise FormatError(lineno, f"artifact must open with 'kind: ...', "
                                  f"got {first!r}")
    kind = first.partition(":")[2].strip()
    headers: dict[str, tuple[int, str]] = {}
    body: list[tuple[int, str]] = []
    for lineno, line in lines[1:]:
        if ":" in line and line.split()[0].endswith(":"):
            key, _, val = line.partition(":")
            headers[key.strip()] = (lineno, val.strip())
        else:
            body.append((lineno, line))

    def header(name: str, parse, what: str):
        if name not in headers:
            raise FormatError(lines[0][0], f"{kind} artifact is missing the "
                                           f"'{name}:' header")
        ln, val = headers[name]
        return parse(ln, val, what)

    if kind == "flow":
        eps = header("eps", _parse_float, "eps")
        iterations = header("iterations", _parse_int, "iterations")
        k = header("commodities", _parse_int, "commodity count")
        if k < 1:
            raise FormatError(lines[0][0], f"commodity count must be >= 1, "
                                           f"got {k}")
        flows = [{} for _ in range(k)]
        numerators = [{} for _ in range(k)]
        residuals = [{} for _ in range(k)]
        by_tag = {"flow": flows, "numerators": numerators,
                  "residual": residuals}
        for lineno, line in body:
            toks = line.split(maxsplit=2)
            if len(toks) != 3 or toks[0] not in by_tag:
                raise FormatError(lineno, f"flow artifact line must be "
                                          f"'flow|numerators|residual j "
                                          f"{{...}}', got {line!r}")
            j = _parse_int(lineno, toks[1], "commodity index")
            if not 1 <= j <= k:
                raise FormatError(lineno, f"commodity index {j} outside 1..{k}")
            by_tag[toks[0]][j - 1] = _parse_edge_map(lineno, toks[2], toks[0])
        return {"kind": kind, "eps": eps, "iterations": iterations,
                "flows": flows, "numerators": numerators,
                "residuals": residuals}

    if kind == "cut-certificate":
        b_of_s = header("b_of_s", _parse_float, "b_of_s")
        boundary = header("boundary", _parse_int, "boundary")
        vol = header("volume", _parse_int, "volume")
        s = []
        for lineno, line in body:
            toks = line.split()
            if len(toks) != 2 or toks[0] != "vertex":
                raise FormatError(lineno, f"cut-certificate line must be "
                                          f"'vertex v', got {line!r}")
            s.append(_parse_int(lineno, toks[1], "vertex"))
        cert = CutCertificate(s=tuple(sorted(s)), b_of_s=b_of_s,
                              boundary=boundary, volume=vol)
        return {"kind": kind, "certificate": cert}

    if kind == "potential-certificate":
        lhs = header("lhs", _parse_float, "lhs")
        rhs = header("rhs", _parse_float, "rhs")
        phi = {}
        for lineno, line in body:
            toks = line.split()
            if len(toks) != 4 or toks[0] != "phi":
                raise FormatError(lineno, f"potential-certificate line must "
                                          f"be 'phi j v value', got {line!r}")
            j = _parse_int(lineno, toks[1], "commodity index")
            if j < 1:
                raise FormatError(lineno, f"commodity index {j} must be >= 1")
            v = _parse_int(lineno, toks[2], "vertex")
            phi[(v, j - 1)] = _parse_float(lineno, toks[3], "potential")
        cert = PotentialCertificate(phi=phi, lhs=lhs, rhs=rhs)
        return {"kind": kind, "certificate": cert}

    raise FormatError(lines[0][0], f"unknown artifact kind {kind!r}")
