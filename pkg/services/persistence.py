"""
Persistence Service - plain-text artifacts for reproducible runs

Causal sets:  header `causet n=<N>`, one `id t x` line per point, then one
              `a<b` line per link of the transitive reduction.
Matrices:     header `matrix n=<rows> m=<cols> kind=<name>`, one row per line.
CSV:          header row, floats as %.17g.
Configs:      one `key=value` per line, `#` starts a comment.
"""

import csv
import logging
import math
import re
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
from pydantic import ValidationError
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from models.deco import BinnedDecoherence
from models.requests import ExperimentConfig
from models.scenario import SorkinScenario
from models.spacetime import CausalSet, Event2D
from utils.errors import LiteralParseError


logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

_CAUSET_HEADER = re.compile(r"^causet\s+n=(\d+)$")
_MATRIX_HEADER = re.compile(r"^matrix\s+n=(\d+)\s+m=(\d+)\s+kind=(\S+)$")
_LINK = re.compile(r"^(\d+)\s*<\s*(\d+)$")


def format_number(x: float) -> str:
    return "%.17g" % x


def format_value(v: Any) -> str:
    """Text form used by CSV cells and config values"""
    if v is None:
        return "none"
    if isinstance(v, Enum):
        return str(v.value)
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_number(float(v))
    if isinstance(v, (tuple, list, np.ndarray)):
        return ",".join(format_value(x) for x in v)
    return str(v)


# Causal sets

def transitive_reduction(cs: CausalSet) -> np.ndarray:
    """Links: pairs related with nothing in between"""
    r = cs.relation.astype(np.int64)
    return cs.relation & ~((r @ r) > 0)


def transitive_closure(links: np.ndarray) -> np.ndarray:
    """Strict order generated by a link matrix"""
    n = links.shape[0]
    if n == 0:
        return np.zeros((0, 0), dtype=bool)
    hops = shortest_path(csr_matrix(links.astype(float)), directed=True, unweighted=True)
    return np.isfinite(hops) & ~np.eye(n, dtype=bool)


def causet_to_text(cs: CausalSet) -> str:
    lines = [f"causet n={cs.n_points}"]
    for i in range(cs.n_points):
        t, x = cs.coords[i] if cs.coords is not None else (math.nan, math.nan)
        lines.append(f"{i} {format_number(t)} {format_number(x)}")
    for a, b in zip(*np.nonzero(transitive_reduction(cs))):
        lines.append(f"{a}<{b}")
    return "\n".join(lines) + "\n"


def causet_from_text(text: str) -> CausalSet:
    """
    Parse the causal-set text format and rebuild the full order from its links

    Raises:
        LiteralParseError: On a malformed header, point line or link line
    """
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]
    if not lines:
        raise LiteralParseError("empty causal-set file")
    header = _CAUSET_HEADER.match(lines[0])
    if not header:
        raise LiteralParseError(f"expected 'causet n=<N>', got '{lines[0]}'")
    n = int(header.group(1))
    point_lines, link_lines = lines[1:n + 1], lines[n + 1:]
    if len(point_lines) != n:
        raise LiteralParseError(f"header announces {n} points, file lists {len(point_lines)}")

    coords = np.empty((n, 2))
    for expected, line in enumerate(point_lines):
        parts = line.split()
        if len(parts) != 3 or int(parts[0]) != expected:
            raise LiteralParseError(f"expected '{expected} t x', got '{line}'")
        coords[expected] = float(parts[1]), float(parts[2])

    links = np.zeros((n, n), dtype=bool)
    for line in link_lines:
        match = _LINK.match(line)
        if not match:
            raise LiteralParseError(f"expected 'a<b', got '{line}'")
        a, b = int(match.group(1)), int(match.group(2))
        if a >= n or b >= n:
            raise LiteralParseError(f"link {a}<{b} names a point outside [0, {n})")
        links[a, b] = True

    try:
        return CausalSet(
            relation=transitive_closure(links),
            coords=None if np.all(np.isnan(coords)) else coords,
        )
    except ValidationError as e:
        raise LiteralParseError(f"links do not define a partial order: {e.errors()[0]['msg']}") from e


def write_causet(cs: CausalSet, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(causet_to_text(cs), encoding="utf-8")
    logger.info(f"Wrote {cs.n_points}-point causal set to {path}")
    return path


def read_causet(path: PathLike) -> CausalSet:
    return causet_from_text(Path(path).read_text(encoding="utf-8"))


# Matrices

def write_matrix(matrix: np.ndarray, path: PathLike, kind: str) -> Path:
    """Real matrix dump; complex data is written as separate real and imaginary dumps"""
    m = np.atleast_2d(np.asarray(matrix, dtype=float))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"matrix n={m.shape[0]} m={m.shape[1]} kind={kind}"]
    lines.extend(" ".join(format_number(x) for x in row) for row in m)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_matrix(path: PathLike) -> np.ndarray:
    """
    Raises:
        LiteralParseError: If the header or the row count is wrong
    """
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    header = _MATRIX_HEADER.match(lines[0].strip()) if lines else None
    if not header:
        raise LiteralParseError(f"missing matrix header in {path}")
    rows, cols = int(header.group(1)), int(header.group(2))
    values = [float(x) for ln in lines[1:] for x in ln.split()]
    if cols == 0 or len(values) % cols:
        raise LiteralParseError(f"matrix in {path} does not split into rows of {cols}")
    data = np.array(values, dtype=float).reshape(-1, cols)
    if data.shape != (rows, cols):
        raise LiteralParseError(f"matrix in {path} has shape {data.shape}, header says {(rows, cols)}")
    return data


# CSV

def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Header row then one line per row, floats as %.17g, Unix line endings"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
            count += 1
    logger.debug(f"Wrote {count} rows to {path}")
    return path


def read_csv(path: PathLike) -> List[Dict[str, str]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


# Experiment configs

def config_to_text(config: ExperimentConfig) -> str:
    """Every field in declaration order, so the text is the fully resolved config"""
    return "".join(
        f"{name}={format_value(getattr(config, name))}\n"
        for name in type(config).model_fields
    )


def config_from_text(text: str, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """
    Parse key=value lines into an ExperimentConfig

    Raises:
        LiteralParseError: On a line without '=' or a repeated key
        pydantic.ValidationError: On unknown keys or invalid values
    """
    raw: Dict[str, Any] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise LiteralParseError(f"line {number}: expected key=value, got '{line}'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in raw:
            raise LiteralParseError(f"line {number}: key '{key}' repeated")
        raw[key] = value
    raw.update(overrides or {})
    return ExperimentConfig(**raw)


def write_config(config: ExperimentConfig, path: PathLike) -> Path:
    return write_key_values({name: getattr(config, name) for name in type(config).model_fields}, path)


def read_config(path: PathLike, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    return config_from_text(Path(path).read_text(encoding="utf-8"), overrides)


# Key=value records

def write_key_values(values: Dict[str, Any], path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(f"{k}={format_value(v)}\n" for k, v in values.items()), encoding="utf-8")
    return path


# Scenario bundles

def _event_text(e: Union[int, Event2D]) -> str:
    return str(e) if isinstance(e, int) else f"{format_number(e.t)},{format_number(e.x)}"


def write_scenario_bundle(sc: SorkinScenario, directory: PathLike) -> List[Path]:
    """
    scenario.txt with the pairings, plus causet.txt and vectors.csv on causal sets

    Returns:
        Paths written
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    summary = {
        "kind": sc.kind.value,
        "mass": sc.mass,
        "density": sc.density,
        "x_plus": _event_text(sc.x_plus),
        "x_minus": _event_text(sc.x_minus),
        "d_fg": sc.d_fg,
        "d_fh": sc.d_fh,
        "d_gh": sc.d_gh,
        "validated": ";".join(sc.validated),
    }
    if sc.ctx is not None:
        summary.update(
            w_ff=sc.ctx.w_ff,
            w_gg=sc.ctx.w_gg,
            w_fg_re=sc.ctx.w_fg.real,
            w_fg_im=sc.ctx.w_fg.imag,
        )
    if sc.lab.points is not None:
        summary["lab"] = tuple(sorted(sc.lab.points))
    else:
        summary["lab"] = sc.lab.rectangle

    written = [write_key_values(summary, directory / "scenario.txt")]
    if sc.causet is not None:
        written.append(write_causet(sc.causet, directory / "causet.txt"))
        written.append(write_csv(
            directory / "vectors.csv",
            ["point", "f", "g", "h"],
            zip(range(sc.causet.n_points), sc.f, sc.g, sc.h),
        ))
    logger.info(f"Scenario bundle written to {directory}")
    return written


# Binned decoherence

def write_deco_cells(D: BinnedDecoherence, path: PathLike, tol: float = 1e-10) -> Path:
    """
    Nonzero D(c, c_bar) entries, one row at a time

    Columns: c, c_bar, the four cell centres of each, real and imaginary part.
    """
    centres = np.column_stack(D.centres())
    conj = D.vectors.conj()

    def rows():
        for c in range(D.n_cells):
            row = conj @ D.vectors[c]
            for c_bar in np.nonzero(np.abs(row) > tol)[0]:
                yield (c, int(c_bar), *centres[c], *centres[c_bar], row[c_bar].real, row[c_bar].imag)

    header = ["c", "c_bar", "xi_a", "xi_1", "xi_2", "xi_b", "xi_bar_a", "xi_bar_1", "xi_bar_2", "xi_bar_b", "re", "im"]
    return write_csv(path, header, rows())
