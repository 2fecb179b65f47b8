"""Batch experiments: config parsing, parameter sweeps and report files."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .distance import asymptotic_qc_distance, intrinsic_node_asymptotes, qc_distance_curve
from .dynamics import Intrinsic, make_model, model_label
from .errors import GraphError, InvalidArgument, NumericalFailure, SizeLimitError
from .graphs import FAMILIES, Graph, degeneracy_report, graph_from_json, graph_spectrum
from .symmetry import MAX_N, check_simple_eigenvalue_bound

OUTPUT_ENV = "QCWALK_OUTPUT_DIR"
FORMATS = ("csv", "json")
_PARAM_KEY = {"intrinsic": "gamma", "haken_strobl": "gamma", "qsw": "p", "unitary": None}


class ConfigError(InvalidArgument):
    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


@dataclass(frozen=True)
class ExperimentConfig:
    graphs: tuple                      # graph JSON documents
    models: tuple                      # (kind, param or None) pairs, sweeps expanded
    t_end: float
    n_points: int
    output_dir: str
    formats: tuple = ("csv",)
    per_node: bool = True
    star_split: bool = True
    asymptote_table: bool = False
    theorem_check: bool = False
    workers: int = 1
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_end, self.n_points)

    @property
    def config_hash(self) -> str:
        # where results land does not change what they are
        doc = {k: v for k, v in self.raw.items() if k != "output"}
        doc["output_formats"] = sorted(self.formats)
        canon = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _require(doc, key, where, kind=None):
    if key not in doc:
        raise ConfigError(where, f"missing field '{key}'")
    val = doc[key]
    if kind is not None and not isinstance(val, kind):
        raise ConfigError(f"{where}.{key}", f"expected {getattr(kind, '__name__', kind)}")
    return val


def parse_config(doc: dict) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    if "graph" in doc and "graphs" in doc:
        raise ConfigError("<root>", "give either 'graph' or 'graphs', not both")
    graphs = doc.get("graphs", [doc["graph"]] if "graph" in doc else None)
    if not graphs or not isinstance(graphs, list):
        raise ConfigError("graphs", "at least one graph is required")
    for i, gdoc in enumerate(graphs):
        try:
            graph_from_json(gdoc)
        except InvalidArgument as exc:
            raise ConfigError(f"graphs[{i}]", str(exc)) from None

    models_doc = _require(doc, "models", "<root>", list)
    if not models_doc:
        raise ConfigError("models", "model list is empty")
    models = []
    for i, m in enumerate(models_doc):
        where = f"models[{i}]"
        if not isinstance(m, dict):
            raise ConfigError(where, "expected an object")
        kind = str(_require(m, "type", where)).lower().replace("-", "_")
        if kind not in _PARAM_KEY:
            raise ConfigError(f"{where}.type", f"unknown model {m['type']!r}")
        key = _PARAM_KEY[kind]
        if key is None:
            models.append((kind, None))
            continue
        values = _require(m, key, where)
        values = values if isinstance(values, list) else [values]
        if not values:
            raise ConfigError(f"{where}.{key}", "empty parameter list")
        for v in values:
            try:
                make_model(kind, v)
            except (InvalidArgument, TypeError, ValueError) as exc:
                raise ConfigError(f"{where}.{key}", str(exc)) from None
            models.append((kind, float(v)))

    tdoc = _require(doc, "time", "<root>", dict)
    if float(tdoc.get("t_start", 0.0)) != 0.0:
        raise ConfigError("time.t_start", "time grids start at 0")
    try:
        t_end = float(_require(tdoc, "t_end", "time"))
        n_points = int(_require(tdoc, "n_points", "time"))
    except (TypeError, ValueError) as exc:
        raise ConfigError("time", str(exc)) from None
    if not t_end > 0:
        raise ConfigError("time.t_end", "must be > 0")
    if n_points < 2:
        raise ConfigError("time.n_points", "must be >= 2")

    odoc = doc.get("output", {})
    out_dir = os.environ.get(OUTPUT_ENV) or odoc.get("directory") or "qcwalk_out"
    formats = tuple(odoc.get("formats", ["csv"]))
    bad = [f for f in formats if f not in FORMATS]
    if bad:
        raise ConfigError("output.formats", f"unsupported {bad}; choose from {FORMATS}")

    flags = doc.get("flags", {})
    unknown = set(flags) - {"per_node", "star_split", "asymptote_table", "theorem_check"}
    if unknown:
        raise ConfigError("flags", f"unknown flags {sorted(unknown)}")
    workers = int(doc.get("workers", 1))
    if workers < 1:
        raise ConfigError("workers", "must be >= 1")
    return ExperimentConfig(
        graphs=tuple(graphs), models=tuple(models), t_end=t_end, n_points=n_points,
        output_dir=str(out_dir), formats=formats,
        per_node=bool(flags.get("per_node", True)),
        star_split=bool(flags.get("star_split", True)),
        asymptote_table=bool(flags.get("asymptote_table", False)),
        theorem_check=bool(flags.get("theorem_check", False)),
        workers=workers, raw=doc,
    )


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from None
    return parse_config(doc)


# --- running -------------------------------------------------------------------

def _run_task(gdoc, kind, param, cfg: ExperimentConfig) -> dict:
    started = time.perf_counter()
    g = graph_from_json(gdoc)
    model = make_model(kind, param)
    stem = f"{g.label}_{model_label(model)}"
    try:
        curve = qc_distance_curve(model, g, cfg.times)
    except NumericalFailure as exc:
        raise NumericalFailure(f"graph={g.label} model={kind} param={param}: {exc}") from None
    out = Path(cfg.output_dir)
    written = []
    comments = [f"config_hash={cfg.config_hash}", f"graph={g.label}", f"model={kind}",
                f"param={'' if param is None else repr(param)}", f"version={__version__}"]
    if "csv" in cfg.formats:
        path = out / f"{stem}.csv"
        path.write_text(curve.to_csv(per_node=cfg.per_node, header_comments=comments))
        written.append(path.name)
        if cfg.star_split and g.family == "star":
            path = out / f"{stem}_split.csv"
            path.write_text(_split_csv(curve, comments))
            written.append(path.name)
    if "json" in cfg.formats:
        path = out / f"{stem}.json"
        path.write_text(json.dumps({
            "graph": g.to_json(), "model": kind, "param": param, "config_hash": cfg.config_hash,
            "t": curve.times.tolist(), "d_qc": curve.value.tolist(),
            "opt_node": curve.opt_node.tolist(),
            "per_node_fidelity": curve.per_node_fidelity.tolist() if cfg.per_node else None,
        }, indent=1))
        written.append(path.name)
    return {"graph": g.label, "model": kind, "param": param, "outputs": written,
            "final_d_qc": float(curve.value[-1]),
            "wall_clock_s": round(time.perf_counter() - started, 6)}


def _split_csv(curve, comments) -> str:
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "d_qc_central", "d_qc_external"])
    for t, c, e in zip(curve.times, curve.central, curve.external):
        w.writerow([f"{t:.15g}", f"{c:.15g}", f"{e:.15g}"])
    return buf.getvalue()


def asymptote_records(g: Graph) -> list[dict]:
    """Intrinsic-decoherence asymptotes for a graph; closed form where one exists."""
    classes = ["any"] + (["central", "external"] if g.family == "star" else [])
    rows = []
    for cls in classes:
        if g.family in ("complete", "cycle", "star"):
            value = asymptotic_qc_distance(g.family, g.n, cls).value
            source = "closed_form"
        else:
            value = max(intrinsic_node_asymptotes(g).values())
            source = "numerical"
        rows.append({"family": g.family, "n": g.n, "initial_class": cls, "value": value,
                     "source": source})
    return rows


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Run every (graph, model, parameter) tuple and write the manifest.

    Raises NumericalFailure with graph/model/parameter context on the first
    failing tuple.
    """
    started = time.perf_counter()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    tasks = [(gdoc, kind, param) for gdoc in cfg.graphs for kind, param in cfg.models]
    if cfg.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [pool.submit(_run_task, *t, cfg) for t in tasks]
            runs = [f.result() for f in futures]
    else:
        runs = [_run_task(*t, cfg) for t in tasks]

    files = [name for r in runs for name in r["outputs"]]
    graphs = [graph_from_json(d) for d in cfg.graphs]
    if cfg.asymptote_table and any(kind == "intrinsic" for kind, _ in cfg.models):
        rows = [r for g in graphs for r in asymptote_records(g)]
        (out / "asymptotes.csv").write_text(_asymptote_csv(rows))
        (out / "asymptotes.json").write_text(json.dumps(rows, indent=1))
        files += ["asymptotes.csv", "asymptotes.json"]
    if cfg.theorem_check:
        for g in graphs:
            name = f"theorem_{g.label}.json"
            (out / name).write_text(json.dumps(check_graph_report(g), indent=1))
            files.append(name)

    manifest = {
        "config_hash": cfg.config_hash,
        "version": __version__,
        "runs": runs,
        "outputs": files,
        "wall_clock_s": round(time.perf_counter() - started, 6),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1))
    missing = [f for f in files if not (out / f).exists()]
    if missing:
        raise NumericalFailure(f"declared outputs missing: {missing}")
    return manifest


def _asymptote_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["family", "n", "initial_class", "value", "source"])
    for r in rows:
        w.writerow([r["family"], r["n"], r["initial_class"], f"{r['value']:.15g}", r["source"]])
    return buf.getvalue()


def emit_asymptote_table(families, n_min: int, n_max: int) -> str:
    """CSV of closed-form asymptotes (family, n, value) for each family and size."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["family", "n", "value"])
    for fam in families:
        if fam not in ("complete", "cycle", "star"):
            raise InvalidArgument(f"no closed-form asymptote for family {fam!r}")
        lo = max(n_min, 3 if fam == "cycle" else 2)
        for n in range(lo, n_max + 1):
            w.writerow([fam, n, f"{asymptotic_qc_distance(fam, n).value:.15g}"])
    return buf.getvalue()


# --- graph check -----------------------------------------------------------------

def check_graph_report(g: Graph) -> dict:
    s = graph_spectrum(g)
    deg = degeneracy_report(s)
    report = {
        "graph": g.to_json(),
        "eigenvalues": [float(x) for x in s.eigenvalues],
        "fiedler_value": s.fiedler_value,
        "degeneracy": deg.to_json(),
    }
    try:
        verdict = check_simple_eigenvalue_bound(g, s)
        report["automorphism_count"] = verdict.automorphism_count
        report["theorem"] = verdict.to_json()
    except SizeLimitError as exc:
        report["automorphism_count"] = None
        report["theorem"] = {"skipped": str(exc)}
    asym = max(intrinsic_node_asymptotes(g, s).values())
    report["intrinsic_asymptote"] = asym
    if deg.is_degenerate:
        report["prediction"] = ("degenerate spectrum: intrinsic decoherence cannot fully "
                                "classicalize (residual quantumness)")
    elif asym <= 1e-9:
        report["prediction"] = "nondegenerate spectrum: full classicalization (asymptote 0)"
    else:
        report["prediction"] = ("nondegenerate spectrum: no degeneracy obstruction, but the "
                                "stationary state is not flat (asymptote > 0)")
    return report


def format_check_report(rep: dict) -> str:
    lines = [f"graph: n={rep['graph']['n']} family={rep['graph']['family']} "
             f"edges={len(rep['graph']['edges'])}"]
    lines.append("eigenvalues: " + ", ".join(f"{x:.6g}" for x in rep["eigenvalues"]))
    lines.append(f"fiedler value: {rep['fiedler_value']:.6g}")
    d = rep["degeneracy"]
    lines.append(f"degeneracy classes: {d['classes']} (simple: {d['simple_count']})")
    if rep["automorphism_count"] is None:
        lines.append(f"automorphisms: {rep['theorem']['skipped']}")
    else:
        th = rep["theorem"]
        lines.append(f"automorphisms: {rep['automorphism_count']}")
        lines.append(f"theorem: simple eigenvalues {th['simple_count']} <= bound {th['bound']} "
                     f"-> {'PASS' if th['passed'] else 'FAIL'} (witness cycles {th['witness']})")
    lines.append(f"intrinsic asymptote: {rep['intrinsic_asymptote']:.6g}")
    lines.append(f"prediction: {rep['prediction']}")
    return "\n".join(lines)


def graph_from_cli(path: str | None, family: str | None, n: int | None) -> Graph:
    if path:
        try:
            doc = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(path, f"cannot read graph: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from None
        return graph_from_json(doc)
    if family is None or n is None:
        raise ConfigError("check", "give a graph JSON path or --family and --n")
    if family not in FAMILIES:
        raise ConfigError("--family", f"unknown family {family!r}")
    return graph_from_json({"family": family, "n": n})
