"""CPLEX-style LP files: writer and a parser for the same dialect.

LP syntax has no fractions.  Coefficients with a terminating decimal
expansion are written exactly; any other rational is written with 17
significant digits and does not round-trip exactly.
"""

from __future__ import annotations

import re
from decimal import Decimal
from fractions import Fraction
from pathlib import Path

from vnepoly.formulation import Constraint, Model, Variable

LINE_WIDTH = 200


class LpParseError(ValueError):
    pass


def _is_decimal(q: Fraction) -> bool:
    d = q.denominator
    for p in (2, 5):
        while d % p == 0:
            d //= p
    return d == 1


def format_number(q) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    if _is_decimal(q):
        digits = 0
        while (q * 10**digits).denominator != 1:
            digits += 1
        text = f"{Decimal(q.numerator) / Decimal(q.denominator):.{digits}f}"
        return text.rstrip("0").rstrip(".")
    return f"{float(q):.17g}"


def _expr(coeffs: dict[int, Fraction], names: list[str]) -> list[str]:
    terms = []
    for j in sorted(coeffs):
        c = Fraction(coeffs[j])
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        body = names[j] if mag == 1 else f"{format_number(mag)} {names[j]}"
        terms.append(f"{sign} {body}")
    if not terms:
        return ["0 " + names[0]] if names else ["0"]
    if terms[0].startswith("+ "):
        terms[0] = terms[0][2:]
    return terms


def _wrap(head: str, terms: list[str], tail: str = "") -> list[str]:
    lines, cur = [], head
    for t in terms + ([tail] if tail else []):
        if len(cur) + len(t) + 1 > LINE_WIDTH and cur.strip():
            lines.append(cur)
            cur = "   "
        cur = f"{cur} {t}" if cur.strip() else f"{cur}{t}"
    lines.append(cur)
    return lines


def write_lp(model: Model) -> str:
    names = [v.name for v in model.variables]
    out = ["\\ minimum-cost embedding model", "Minimize"]
    out += _wrap(" obj:", _expr(model.objective, names))
    out.append("Subject To")
    sense = {"<=": "<=", ">=": ">=", "=": "="}
    for i, con in enumerate(model.constraints):
        label = re.sub(r"[^A-Za-z0-9_.]", "_", con.name) if con.name else f"r{i}"
        out += _wrap(f" {label}:", _expr(con.coeffs, names), f"{sense[con.sense]} {format_number(con.rhs)}")
    out.append("Bounds")
    for v in model.variables:
        if v.lb == v.ub:
            out.append(f" {v.name} = {format_number(v.lb)}")
        else:
            out.append(f" {format_number(v.lb)} <= {v.name} <= {format_number(v.ub)}")
    ints = [v.name for v in model.variables if v.integer]
    if ints:
        out.append("Binaries" if all(v.lb >= 0 and v.ub <= 1 for v in model.variables if v.integer) else "Generals")
        out += _wrap("", ints)
    out.append("End")
    return "\n".join(out) + "\n"


def export_lp(model: Model, path: str | Path) -> None:
    Path(path).write_text(write_lp(model))


_SECTIONS = {
    "minimize": "min", "minimum": "min", "min": "min",
    "maximize": "max", "maximum": "max", "max": "max",
    "subject to": "st", "such that": "st", "st": "st", "s.t.": "st",
    "bounds": "bounds", "bound": "bounds",
    "binaries": "bin", "binary": "bin", "bin": "bin",
    "generals": "gen", "general": "gen", "integers": "gen",
    "end": "end",
}
_TOKEN = re.compile(r"\s*(<=|>=|=<|=>|[<>=]|[+-]|:|[0-9.]+(?:[eE][+-]?[0-9]+)?|[A-Za-z_][A-Za-z0-9_.\[\]{}!\"#$%&()/,;?@'`|~^]*)")


def _tokens(text: str, lineno: int) -> list[str]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise LpParseError(f"line {lineno}: cannot read {text[pos:].strip()!r}")
        out.append(m.group(1))
        pos = m.end()
    return out


def _num(tok: str) -> Fraction:
    return Fraction(tok) if re.fullmatch(r"[0-9.]+(?:[eE][+-]?[0-9]+)?", tok) else None


def _linear(tokens: list[str], lineno: int) -> tuple[dict[str, Fraction], Fraction]:
    """Parse ``[+-] [coef] name ...`` into coefficients plus a constant."""
    coeffs: dict[str, Fraction] = {}
    const = Fraction(0)
    sign, coef, i = 1, None, 0
    while i < len(tokens):
        t = tokens[i]
        if t in "+-":
            if coef is not None:
                const += sign * coef
                coef = None
            sign = -1 if t == "-" else 1
        elif _num(t) is not None:
            if coef is not None:
                raise LpParseError(f"line {lineno}: two numbers in a row")
            coef = _num(t)
        else:
            c = sign * (coef if coef is not None else 1)
            coeffs[t] = coeffs.get(t, Fraction(0)) + c
            sign, coef = 1, None
        i += 1
    if coef is not None:
        const += sign * coef
    return coeffs, const


def parse_lp(text: str) -> Model:
    section = None
    statements: dict[str, list[tuple[int, list[str]]]] = {"min": [], "st": [], "bounds": [], "bin": [], "gen": []}
    sense_obj = "min"
    current: list[str] | None = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        key = line.lower()
        if key in _SECTIONS:
            section = _SECTIONS[key]
            if section == "max":
                sense_obj, section = "max", "min"
            if section == "end":
                break
            current = None
            continue
        if section is None:
            raise LpParseError(f"line {lineno}: text before the objective section")
        toks = _tokens(line, lineno)
        if section in ("min", "st"):
            starts_new = (len(toks) >= 2 and toks[1] == ":") or current is None
            if section == "st" and current is not None and any(t in ("<=", ">=", "=", "<", ">", "=<", "=>") for t in current):
                starts_new = True
            if section == "min" and current is not None and not (len(toks) >= 2 and toks[1] == ":"):
                starts_new = False
            if starts_new:
                current = list(toks)
                statements[section].append((lineno, current))
            else:
                current.extend(toks)
        elif section == "bounds":
            statements["bounds"].append((lineno, toks))
        else:
            statements[section].append((lineno, toks))

    names: list[str] = []
    pos: dict[str, int] = {}

    def col(name: str) -> int:
        if name not in pos:
            pos[name] = len(names)
            names.append(name)
        return pos[name]

    # the Bounds section lists every column, so it fixes the column order
    lower: dict[int, Fraction] = {}
    upper: dict[int, Fraction | None] = {}
    for lineno, toks in statements["bounds"]:
        t = toks
        try:
            if len(t) == 2 and t[1].lower() == "free":
                j = col(t[0])
                lower[j], upper[j] = None, None
            elif len(t) in (3, 4) and t[1] == "=":
                j = col(t[0])
                lower[j] = upper[j] = _signed(t[2:])
            elif len(t) >= 5 and t.count("<=") == 2:
                a, b = t.index("<="), len(t) - 1 - t[::-1].index("<=")
                j = col(t[a + 1])
                lower[j], upper[j] = _signed(t[:a]), _signed(t[b + 1:])
            elif "<=" in t or ">=" in t:
                op = "<=" if "<=" in t else ">="
                a = t.index(op)
                left, right = t[:a], t[a + 1:]
                if len(left) == 1 and _num(left[0]) is None:
                    j = col(left[0])
                    (upper if op == "<=" else lower)[j] = _signed(right)
                else:
                    j = col(right[0])
                    (lower if op == "<=" else upper)[j] = _signed(left)
            else:
                raise LpParseError(f"line {lineno}: unreadable bound")
        except (ValueError, IndexError, TypeError):
            raise LpParseError(f"line {lineno}: unreadable bound") from None

    objective: dict[int, Fraction] = {}
    for lineno, toks in statements["min"]:
        if len(toks) >= 2 and toks[1] == ":":
            toks = toks[2:]
        coeffs, _ = _linear(toks, lineno)
        for n, c in coeffs.items():
            j = col(n)
            objective[j] = objective.get(j, Fraction(0)) + (c if sense_obj == "min" else -c)

    constraints = []
    for i, (lineno, toks) in enumerate(statements["st"]):
        label = f"r{i}"
        if len(toks) >= 2 and toks[1] == ":":
            label, toks = toks[0], toks[2:]
        ops = [k for k, t in enumerate(toks) if t in ("<=", ">=", "=", "<", ">", "=<", "=>")]
        if len(ops) != 1:
            raise LpParseError(f"line {lineno}: constraint {label} needs exactly one relation")
        k = ops[0]
        lhs, lconst = _linear(toks[:k], lineno)
        rhs_c, rconst = _linear(toks[k + 1:], lineno)
        coeffs: dict[int, Fraction] = {}
        for n, c in lhs.items():
            coeffs[col(n)] = coeffs.get(col(n), Fraction(0)) + c
        for n, c in rhs_c.items():
            coeffs[col(n)] = coeffs.get(col(n), Fraction(0)) - c
        op = {"<": "<=", "=<": "<=", ">": ">=", "=>": ">="}.get(toks[k], toks[k])
        constraints.append(Constraint(coeffs, op, rconst - lconst, label))

    integer = set()
    binary = set()
    for lineno, toks in statements["bin"]:
        for n in toks:
            binary.add(col(n))
    for lineno, toks in statements["gen"]:
        for n in toks:
            integer.add(col(n))

    variables = []
    for j, n in enumerate(names):
        lb = lower.get(j, Fraction(0))
        ub = upper.get(j, 1 if j in binary else None)
        if lb is None or ub is None:
            raise LpParseError(f"variable {n} must be bounded")
        kind = "x" if n.startswith("x") else "y"
        variables.append(Variable(n, kind, -1, -1, lb, ub, j in binary or j in integer, lb == ub))
    return Model(tuple(variables), tuple(constraints), objective)


def _signed(toks: list[str]) -> Fraction:
    if len(toks) == 2 and toks[0] in "+-":
        v = Fraction(toks[1])
        return -v if toks[0] == "-" else v
    if len(toks) == 1:
        if toks[0].lower() in ("inf", "infinity"):
            raise ValueError
        return Fraction(toks[0])
    raise ValueError


def read_lp(path: str | Path) -> Model:
    return parse_lp(Path(path).read_text())
