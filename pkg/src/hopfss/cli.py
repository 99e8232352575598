"""Command-line driver.

Every command builds a Report (window metadata, tables of (s, t, u, dim, flags)
rows, named assertions, flags) and writes it as JSON, TSV or SVG.  Output is a
pure function of the inputs.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple
from xml.sax.saxutils import escape

from . import catalog
from .cobar import ComplexError, cotor
from .fplin import rank
from .graded import GradedError
from .hopf import (AxiomError, ClosureError, Comodule, HopfAlgebra, Presentation, PresentationError,
                   QuotientError)
from .pages import FiltrationError
from .specseq import (Assertion, ExtensionDatum, LocalizingClass, NilpotentError, SESError, UnsupportedError,
                      build_cess, build_filtss, build_mpass_e1, cess_e1_cotor, cess_e1_sigma,
                      cess_e1_module_chart, localize, module_chart_from_cobar, theta)

EXIT_OK = 0
EXIT_ASSERTION = 2
EXIT_INPUT = 3

COMMANDS = ("validate", "cotor", "cess", "filtss", "mpass", "compare-e1", "localize", "chart")
FORMATS = ("tsv", "svg", "json")
TSV_HEADER = "s\tt\tu\tdim\tflags"

Row = Tuple[int, int, int, int, str]


class InputError(ValueError):
    pass


# ---------------------------------------------------------------- reports

@dataclass
class ChartTable:
    name: str
    rows: List[Row] = field(default_factory=list)

    def __post_init__(self):
        self.rows = sorted((int(s), int(t), int(u), int(d), str(f)) for s, t, u, d, f in self.rows)


@dataclass
class Report:
    command: str
    window: Dict = field(default_factory=dict)
    tables: List[ChartTable] = field(default_factory=list)
    assertions: List[Dict] = field(default_factory=list)
    flags: Dict = field(default_factory=dict)
    bare: bool = False  # a plain table read without metadata lines

    def assert_(self, name: str, passed: bool, witness: Optional[str] = None) -> None:
        rec = {"name": name, "status": "pass" if passed else "fail"}
        if witness is not None and not passed:
            rec["witness"] = str(witness)
        self.assertions.append(rec)

    def extend(self, assertions: Sequence[Assertion]) -> None:
        for a in assertions:
            self.assert_(a.name, a.passed, a.witness)

    def first_failure(self) -> Optional[Dict]:
        return next((a for a in self.assertions if a["status"] != "pass"), None)

    def to_doc(self) -> Dict:
        return {"command": self.command, "window": self.window,
                "tables": [{"name": t.name, "rows": [list(r) for r in t.rows]} for t in self.tables],
                "assertions": self.assertions, "flags": self.flags}

    @classmethod
    def from_doc(cls, doc: Dict) -> "Report":
        try:
            tables = [ChartTable(t["name"], [tuple(r) for r in t["rows"]]) for t in doc["tables"]]
            return cls(str(doc["command"]), dict(doc["window"]), tables,
                       [dict(a) for a in doc["assertions"]], dict(doc["flags"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed report: {exc}") from None


def _compact(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def render_tsv_table(table: ChartTable) -> str:
    lines = [TSV_HEADER] + ["\t".join(str(x) for x in r) for r in table.rows]
    return "\n".join(lines) + "\n"


def render_json(report: Report) -> str:
    return json.dumps(report.to_doc(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def render_tsv(report: Report) -> str:
    if report.bare:
        return "".join(render_tsv_table(t) for t in report.tables)
    out = [f"# command\t{report.command}", f"# window\t{_compact(report.window)}",
           f"# flags\t{_compact(report.flags)}"]
    out += [f"# assertion\t{_compact(a)}" for a in report.assertions]
    text = "\n".join(out) + "\n"
    for t in report.tables:
        text += f"# table\t{t.name}\n" + render_tsv_table(t)
    return text


def parse_tsv(text: str) -> Report:
    rep = Report("chart", bare=not text.startswith("# "))
    cur: Optional[ChartTable] = None
    try:
        for line in text.splitlines():
            if line.startswith("# "):
                key, _, val = line[2:].partition("\t")
                if key == "command":
                    rep.command = val
                elif key == "window":
                    rep.window = json.loads(val)
                elif key == "flags":
                    rep.flags = json.loads(val)
                elif key == "assertion":
                    rep.assertions.append(json.loads(val))
                elif key == "table":
                    cur = ChartTable(val)
                    rep.tables.append(cur)
                else:
                    raise InputError(f"unknown TSV metadata line {line!r}")
            elif line == TSV_HEADER:
                if cur is None or (rep.bare and cur.rows):
                    cur = ChartTable("table")
                    rep.tables.append(cur)
            elif line:
                if cur is None:
                    raise InputError("TSV row before header")
                parts = line.split("\t")
                if len(parts) == 4:
                    parts.append("")
                if len(parts) != 5:
                    raise InputError(f"TSV row needs 5 columns: {line!r}")
                s, t, u, d = (int(x) for x in parts[:4])
                cur.rows.append((s, t, u, d, parts[4]))
    except (ValueError, json.JSONDecodeError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"malformed TSV: {exc}") from None
    for t in rep.tables:
        t.rows.sort()
    return rep


# ---------------------------------------------------------------- SVG

CELL = 28
MARGIN = 40
DOT = 4


def _svg_panel(table: ChartTable, y0: int) -> Tuple[List[str], int, int]:
    """Adams-style chart: stem u−n on x, n = s+t on y, one dot per class."""
    pts: Dict[Tuple[int, int], List[Tuple[int, bool]]] = {}
    for s, t, u, d, f in table.rows:
        if d <= 0:
            continue
        n = s + t
        pts.setdefault((u - n, n), []).extend([(s, bool(f))] * d)
    xs = [x for x, _ in pts] or [0]
    ys = [y for _, y in pts] or [0]
    x_lo, x_hi = min(0, min(xs)), max(xs)
    y_hi = max(ys)
    width = (x_hi - x_lo + 1) * CELL + 2 * MARGIN
    height = (y_hi + 1) * CELL + 2 * MARGIN
    base = y0 + height - MARGIN
    out = [f'<text x="{MARGIN}" y="{y0 + 20}" font-size="14">{escape(table.name)}</text>']
    for i in range(x_hi - x_lo + 2):
        x = MARGIN + i * CELL
        out.append(f'<line x1="{x}" y1="{y0 + MARGIN}" x2="{x}" y2="{base}" stroke="#ddd"/>')
    for j in range(y_hi + 2):
        y = base - j * CELL
        out.append(f'<line x1="{MARGIN}" y1="{y}" x2="{width - MARGIN}" y2="{y}" stroke="#ddd"/>')
    for i in range(x_hi - x_lo + 1):
        out.append(f'<text x="{MARGIN + i * CELL + CELL // 2}" y="{base + 16}" font-size="10" '
                   f'text-anchor="middle">{x_lo + i}</text>')
    for j in range(y_hi + 1):
        out.append(f'<text x="{MARGIN - 6}" y="{base - j * CELL - CELL // 2 + 4}" font-size="10" '
                   f'text-anchor="end">{j}</text>')
    for (x, y), dots in sorted(pts.items()):
        cx0 = MARGIN + (x - x_lo) * CELL + CELL // 2
        cy = base - y * CELL - CELL // 2
        k = len(dots)
        for i, (_s, flagged) in enumerate(sorted(dots)):
            cx = cx0 + (2 * i - (k - 1)) * (DOT + 1)
            style = 'fill="none" stroke="#c00"' if flagged else 'fill="#000"'
            out.append(f'<circle cx="{cx}" cy="{cy}" r="{DOT}" {style}/>')
    return out, width, height


def render_svg(report: Report) -> str:
    body: List[str] = []
    y = 0
    width = 2 * MARGIN
    tables = report.tables or [ChartTable("empty")]
    for t in tables:
        part, w, h = _svg_panel(t, y)
        body += part
        y += h
        width = max(width, w)
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{y}" '
            f'viewBox="0 0 {width} {y}">')
    return "\n".join([head, f"<title>{escape(report.command)}</title>"] + body + ["</svg>"]) + "\n"


def render_chart(report, fmt: str) -> str:
    """Render a Report (or a single ChartTable) as tsv, svg or json."""
    if isinstance(report, ChartTable):
        if fmt == "tsv":
            return render_tsv_table(report)
        report = Report("chart", tables=[report])
    if fmt == "tsv":
        return render_tsv(report)
    if fmt == "svg":
        return render_svg(report)
    if fmt == "json":
        return render_json(report)
    raise InputError(f"unknown format {fmt!r}")


def load_report(path: str) -> Report:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    if text.lstrip().startswith("{"):
        try:
            return Report.from_doc(json.loads(text))
        except json.JSONDecodeError as exc:
            raise InputError(f"malformed report: {exc}") from None
    return parse_tsv(text)


# ---------------------------------------------------------------- config and data

@dataclass
class RunConfig:
    command: str
    example: Optional[str] = None
    input: Optional[str] = None
    quotient: Optional[str] = None
    p: Optional[int] = None
    gens: Optional[int] = None
    max_degree: Optional[int] = None
    s_max: Optional[int] = None
    r_max: int = 3
    localize: Optional[Tuple[int, int]] = None
    out: Optional[str] = None
    format: str = "tsv"
    jobs: int = 1

    def check(self) -> None:
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        if self.format not in FORMATS:
            raise InputError(f"unknown format {self.format!r}")
        for name in ("p", "gens", "max_degree", "s_max"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise InputError(f"--{name.replace('_', '-')} must be positive")
        if self.r_max < 1 or self.jobs < 1:
            raise InputError("--r-max and --jobs must be positive")
        if self.command == "chart":
            if not self.input:
                raise InputError("chart needs --input with a saved table")
        elif bool(self.example) == bool(self.input):
            raise InputError("give exactly one of --example and --input")


def load_datum(cfg: RunConfig) -> ExtensionDatum:
    if cfg.example:
        params = {"p": cfg.p, "D": cfg.max_degree}
        if cfg.gens is not None:
            params["m"] = cfg.gens
        return catalog.example(cfg.example, check=False, **params)
    try:
        with open(cfg.input, encoding="utf-8") as fh:
            pres = Presentation.from_json(fh.read())
    except OSError as exc:
        raise InputError(f"cannot read {cfg.input}: {exc.strerror}") from None
    if cfg.p is not None and cfg.p != pres.p:
        raise InputError(f"--p {cfg.p} disagrees with the presentation (p = {pres.p})")
    if cfg.gens is not None:
        raise InputError("--gens applies to catalog examples only")
    if cfg.max_degree is not None:
        pres = pres.with_window(cfg.max_degree)
    if cfg.quotient is not None:
        if cfg.quotient not in pres.quotients:
            raise InputError(f"no quotient named {cfg.quotient!r}")
        killed = pres.quotients[cfg.quotient]
    elif len(pres.quotients) == 1:
        killed = next(iter(pres.quotients.values()))
    elif not pres.quotients:
        killed = [g.name for g in pres.generators]
    else:
        raise InputError(f"choose a quotient with --quotient: {', '.join(sorted(pres.quotients))}")
    gamma = HopfAlgebra(pres, pres.name or "Γ")
    return ExtensionDatum(gamma, killed, name=pres.name or cfg.input)


def _window(cfg: RunConfig, datum: ExtensionDatum, **extra) -> Dict:
    w = {"source": cfg.example or "input", "p": datum.p, "D": datum.D,
         "certified_below": min(datum.certified_below, datum.D + 1), "killed": list(datum.killed)}
    params = getattr(datum, "params", None)
    if params:
        w["params"] = dict(params)
    if datum.localize_below != datum.certified_below:
        w["localize_below"] = datum.localize_below
    w.update(extra)
    return w


def _s_max(cfg: RunConfig, datum: ExtensionDatum, default: Optional[int] = None) -> int:
    if cfg.s_max is not None:
        return cfg.s_max
    return datum.D if default is None else min(default, datum.D)


def _flag(u: int, n: int, u_bound: int, n_bound: Optional[int]) -> str:
    if n_bound is not None and n >= n_bound:
        return "truncated"
    if u >= u_bound:
        return "uncertified"
    return ""


def _rows(table: Dict, u_bound: int, n_bound: Optional[int] = None) -> List[Row]:
    return [(s, t, u, d, _flag(u, s + t, u_bound, n_bound)) for (s, t, u), d in sorted(table.items()) if d]


def _require_valid(datum: ExtensionDatum) -> None:
    rep = datum.validate()
    f = rep.first_failure()
    if f is not None:
        raise InputError(f"invalid extension datum: {f.name} fails at degree {f.degree}: {f.witness}")


# ---------------------------------------------------------------- commands

def cmd_validate(cfg: RunConfig, datum: ExtensionDatum) -> Tuple[Report, int]:
    rep = Report("validate", _window(cfg, datum))
    vr = datum.validate()
    for c in vr.checks:
        rep.assert_(c.name, c.passed, None if c.passed else f"degree {c.degree}: {c.witness}")
    for name, sp in (("Γ", datum.gamma.space), ("Σ", datum.sigma.space), ("Φ", datum.phi.space),
                     ("G", datum.G.space)):
        rep.tables.append(ChartTable(f"{name} dimensions", [(0, 0, u, sp.dim(u), "") for u in sp.degrees()
                                                             if sp.dim(u)]))
    wit = datum.phi.subcoalgebra_witness()
    rep.flags["phi_subcoalgebra"] = "yes" if wit is None else f"no: {wit}"
    rep.flags["phi_basis"] = [datum.phi.space.fmt(l) for l in datum.phi.space.all_labels()]
    return rep, EXIT_OK if rep.first_failure() is None else EXIT_INPUT


def _cotor_table(datum: ExtensionDatum, s_max: int):
    k = Comodule.trivial(datum.gamma, "right")
    return cotor(datum.gamma, k, datum.N, s_max=s_max)


def cmd_cotor(cfg: RunConfig, datum: ExtensionDatum) -> Tuple[Report, int]:
    s_max = _s_max(cfg, datum)
    tab = _cotor_table(datum, s_max)
    ub = min(datum.certified_below, datum.D + 1)
    rep = Report("cotor", _window(cfg, datum, s_max=s_max))
    rows = [(s, 0, u, d, _flag(u, s, ub, None)) for (s, u), d in sorted(tab.dims.items())]
    rep.tables.append(ChartTable(tab.label, rows))
    rep.flags["representatives"] = {f"{s},{u}": [tab.format_element(s, e) for e in tab.representatives[(s, u)]]
                                    for (s, u) in sorted(tab.dims)}
    return rep, EXIT_OK


def _page_report(rep: Report, ss, n_bound: int, u_bound: int, r_max: int) -> None:
    for pg in ss.pages:
        rep.tables.append(ChartTable(f"E{pg.r}", _rows(pg.table, u_bound, n_bound)))
    rep.tables.append(ChartTable("Einf", _rows(ss.infinity.table, u_bound, n_bound)))
    for r, pg in enumerate(ss.pages):
        ranks = [(s, t, u, rank(m), "") for (s, t, u), m in pg.d.items()]
        if ranks:
            rep.tables.append(ChartTable(f"d{r} rank", ranks))
    for name, fn in (("d_r∘d_r = 0 on every page", ss.check_differentials_square_zero),
                     ("E_{r+1} = ker d_r / im d_r", ss.check_bookkeeping),
                     ("E_∞ sums to the homology of the total complex", ss.check_convergence)):
        try:
            fn()
            rep.assert_(name, True)
        except ComplexError as exc:
            rep.assert_(name, False, str(exc))


def cmd_cess(cfg: RunConfig, datum: ExtensionDatum) -> Tuple[Report, int]:
    s_max = _s_max(cfg, datum)
    model = build_cess(datum, s_max, r_max=cfg.r_max, jobs=cfg.jobs)
    n_bound, u_bound = model.certified
    rep = Report("cess", _window(cfg, datum, s_max=s_max, r_max=cfg.r_max, n_certified_below=n_bound))
    _page_report(rep, model.pages, n_bound, u_bound, cfg.r_max)
    return rep, _status(rep)


def cmd_filtss(cfg: RunConfig, datum: ExtensionDatum) -> Tuple[Report, int]:
    s_max = _s_max(cfg, datum)
    model = build_filtss(datum, s_max, r_max=cfg.r_max, jobs=cfg.jobs)
    u_bound = min(datum.certified_below, datum.D + 1)
    rep = Report("filtss", _window(cfg, datum, s_max=s_max, r_max=cfg.r_max, n_certified_below=model.n_max))
    _page_report(rep, model.pages, model.n_max, u_bound, cfg.r_max)
    return rep, _status(rep)


def _mpass_e2(m) -> Dict:
    out = {}
    for (s, t, u), d in m.dims.items():
        inc = m.d1_rank((s - 1, t, u)) if s > 0 else 0
        out[(s, t, u)] = d - m.d1_rank((s, t, u)) - inc
    return out


def cmd_mpass(cfg: RunConfig, datum: ExtensionDatum) -> Tuple[Report, int]:
    s_max = _s_max(cfg, datum)
    n_bound = s_max + 1
    u_bound = min(datum.certified_below, datum.D + 1)
    rep = Report("mpass", _window(cfg, datum, s_max=s_max, r_max=cfg.r_max, n_certified_below=n_bound))
    try:
        m = build_mpass_e1(datum, s_max)
    except SESError as exc:
        rep.assert_("the splicing sequences have exact long exact sequences", False,
                    f"{exc} at {exc.witness}")
        return rep, EXIT_ASSERTION
    rep.assert_("the splicing sequences have exact long exact sequences", True)
    # the last column has no target column, so its d₁ is not computed
    last = max((s for s, _t, _u in m.dims), default=0)
    rep.tables.append(ChartTable("E1", _rows(m.dims, u_bound, n_bound)))
    e2 = {k: v for k, v in _mpass_e2(m).items() if k[0] < last}
    rep.tables.append(ChartTable("E2", _rows(e2, u_bound, n_bound)))
    rep.tables.append(ChartTable("d1 rank", [(s, t, u, m.d1_rank((s, t, u)), "") for (s, t, u) in m.d1]))
    rep.tables.append(ChartTable("connecting rank", [(s, t, u, rank(x), "") for (s, t, u), x in m.connecting.items()]))
    if cfg.r_max > 2:
        rep.flags["pages"] = "E1 and E2 only; higher pages come from cess"
    return rep, _status(rep)


def cmd_compare_e1(cfg: RunConfig, datum: ExtensionDatum) -> Tuple[Report, int]:
    from .specseq import _restrict, _table_diff
    s_max = _s_max(cfg, datum)
    cess = build_cess(datum, s_max, r_max=1, jobs=cfg.jobs)
    filt = build_filtss(datum, s_max, r_max=1, jobs=cfg.jobs)
    mp = build_mpass_e1(datum, s_max)
    n_bound, u_bound = cess.certified
    n_bound -= 1  # cells s+t ≤ s_max - 1 see every model's differential in and out
    rep = Report("compare-e1", _window(cfg, datum, s_max=s_max, n_certified_below=n_bound))
    tables = {
        "E1 CESS": cess.pages.pages[1].table,
        "E1 CESS as Cotor_Γ(k,N^s)": cess_e1_cotor(datum, s_max),
        "E1 CESS as Ext_Σ(k,Φbar^s⊗N)": cess_e1_sigma(datum, s_max),
        "E1 filtration SS": filt.pages.pages[1].table,
        "E1 MPASS": mp.dims,
    }
    cut = {k: _restrict(v, n_bound, u_bound) for k, v in tables.items()}
    for name, tab in cut.items():
        rep.tables.append(ChartTable(name, _rows(tab, u_bound, n_bound)))
    ref = cut["E1 CESS"]
    diff = next(((n, d) for n, d in ((n, _table_diff(ref, t)) for n, t in cut.items()) if d), None)
    rep.assert_("all E₁ tables equal", diff is None, None if diff is None else f"{diff[0]}: {diff[1]}")
    bad = None
    pg = cess.pages.pages[1]
    for cell in sorted(set(pg.d) | set(mp.d1)):
        s, t, u = cell
        if s + t >= n_bound - 1 or u >= u_bound or (s + 1, t, u) not in mp.dims and cell not in pg.d:
            continue
        a = rank(pg.d[cell]) if cell in pg.d else 0
        b = mp.d1_rank(cell)
        if a != b:
            bad = f"d₁ at {cell}: CESS rank {a}, MPASS rank {b}"
            break
    rep.assert_("MPASS d₁ and CESS d₁ ranks agree", bad is None, bad)
    th = theta(datum, s_max, cess=cess, filt=filt)
    rep.extend(th.assertions)
    rep.tables.append(ChartTable("θ rank on E1", [(s, t, u, r, "") for (s, t, u), (_a, _b, r) in sorted(th.e1_ranks.items())]))
    if rep.first_failure() is None:
        rep.flags["summary"] = "all E₁ tables equal; θ bijective"
    else:
        f = rep.first_failure()
        rep.flags["summary"] = f"failed: {f['name']}"
    return rep, _status(rep)


def _localizing_class(datum: ExtensionDatum, cell: Tuple[int, int], h_max: int) -> LocalizingClass:
    s, u = cell
    tab = _cotor_table(datum, max(h_max, s))
    d = tab.dim(s, u)
    if d == 0:
        raise InputError(f"no class at (s={s}, u={u}) in {tab.label}")
    if d > 1:
        raise InputError(f"class at (s={s}, u={u}) is not unique: dim {d}")
    rep = tab.representatives[(s, u)][0]
    return LocalizingClass(tab.format_element(s, rep), s, u, rep, tab.complex)


def cmd_localize(cfg: RunConfig, datum: ExtensionDatum) -> Tuple[Report, int]:
    if cfg.localize is None:
        raise InputError("localize needs --localize s,u")
    h_max = _s_max(cfg, datum)
    top = min(datum.localize_below, datum.D + 1) - 1
    x = _localizing_class(datum, cfg.localize, h_max)
    rep = Report("localize", _window(cfg, datum, s_max=h_max, localized_u_max=top, x=x.name))
    chart = module_chart_from_cobar(x.ring, x, h_max, label="Cotor")
    try:
        loc = localize(chart, x, u_max=top)
    except NilpotentError as exc:
        rep.assert_("x is not nilpotent in the window", False, str(exc))
        return rep, EXIT_ASSERTION
    rep.assert_("x is not nilpotent in the window", True)
    again = localize(loc)
    rep.assert_("localization is idempotent", again.rows() == loc.rows(),
                None if again.rows() == loc.rows() else "second localization differs")
    missing = [c for c in loc.cells if c not in loc.flags and c not in loc.certificates]
    rep.assert_("every unflagged cell carries a stabilization certificate", not missing,
                f"cell {missing[0]}" if missing else None)
    rep.tables.append(ChartTable(f"Cotor localized at {x.name}", loc.rows()))
    if datum.m_is_trivial() and datum.killed:
        e1 = localize(cess_e1_module_chart(datum, x, h_max), x, check_nilpotence=False, u_max=top)
        rep.tables.append(ChartTable(f"E1 CESS localized at {x.name}", e1.rows()))
    rep.flags["certificates"] = {f"{h},{u}": list(v) for (_f, h, u), v in loc.certificates.items()
                                 if loc.cells.get((_f, h, u))}
    return rep, _status(rep)


def cmd_chart(cfg: RunConfig) -> Tuple[Report, int]:
    return load_report(cfg.input), EXIT_OK


HANDLERS = {"validate": cmd_validate, "cotor": cmd_cotor, "cess": cmd_cess, "filtss": cmd_filtss,
            "mpass": cmd_mpass, "compare-e1": cmd_compare_e1, "localize": cmd_localize}


def _status(rep: Report) -> int:
    return EXIT_OK if rep.first_failure() is None else EXIT_ASSERTION


def execute(cfg: RunConfig) -> Tuple[Report, int]:
    """Execute a command; returns the report and its exit status."""
    cfg.check()
    if cfg.command == "chart":
        rep, status = cmd_chart(cfg)
    else:
        datum = load_datum(cfg)
        if cfg.command != "validate":
            _require_valid(datum)
        rep, status = HANDLERS[cfg.command](cfg, datum)
    return rep, status


def run(cfg: RunConfig) -> Tuple[int, str]:
    """Execute a command; returns (exit status, rendered artifact)."""
    rep, status = execute(cfg)
    return status, render_chart(rep, cfg.format)


# ---------------------------------------------------------------- entry point

def _pair(text: str) -> Tuple[int, int]:
    try:
        s, u = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected s,u") from None
    return s, u


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(_error("input", InputError(message)), file=sys.stderr)
        sys.exit(EXIT_INPUT)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="hopfss", description="Spectral sequences for extensions of Hopf algebras over F_p.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--example", choices=catalog.names(), help="catalog example name")
    ap.add_argument("--input", help="presentation JSON file (chart: a saved report)")
    ap.add_argument("--quotient", help="named quotient of the presentation giving Σ")
    ap.add_argument("--p", type=int)
    ap.add_argument("--gens", type=int, help="generator cutoff m for catalog examples")
    ap.add_argument("--max-degree", type=int, help="internal degree window D")
    ap.add_argument("--s-max", type=int, help="cohomological window")
    ap.add_argument("--r-max", type=int, default=3)
    ap.add_argument("--localize", type=_pair, metavar="S,U", help="localize at the class in Cotor cell (s,u)")
    ap.add_argument("--out", help="output path (default stdout)")
    ap.add_argument("--format", choices=FORMATS, default="tsv")
    ap.add_argument("--jobs", type=int, default=1, help="worker threads for page computations")
    return ap


INPUT_ERRORS = (InputError, catalog.CatalogError, PresentationError, AxiomError, QuotientError, ClosureError,
                GradedError, UnsupportedError, FiltrationError)


def _error(kind: str, exc: BaseException) -> str:
    return _compact({"error": {"type": kind, "class": type(exc).__name__, "message": str(exc)}})


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(args.command, args.example, args.input, args.quotient, args.p, args.gens, args.max_degree,
                    args.s_max, args.r_max, args.localize, args.out, args.format, args.jobs)
    try:
        rep, status = execute(cfg)
    except INPUT_ERRORS as exc:
        print(_error("input", exc), file=sys.stderr)
        return EXIT_INPUT
    except (ComplexError, SESError, NilpotentError) as exc:
        print(_error("assertion", exc), file=sys.stderr)
        return EXIT_ASSERTION
    text = render_chart(rep, cfg.format)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if "summary" in rep.flags:
        print(rep.flags["summary"], file=sys.stderr)
    f = rep.first_failure()
    if status == EXIT_ASSERTION and f is not None:
        print(_compact({"error": {"type": "assertion", "name": f["name"], "witness": f.get("witness")}}),
              file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
