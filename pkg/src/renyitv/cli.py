"""
Command-line front end.

Subcommands
-----------
gmin          g_alpha(eps) sweeps                      (default CSV)
locus         boundary polylines with witness data     (default CSV)
chernoff-min  constrained Chernoff minima              (default CSV)
bound         error-probability bound for a code       (default JSON)
spectrum      weight distribution of a generator       (default CSV)

Numbers are written with 12 significant digits, infinities as "inf" and
missing values as empty CSV cells / JSON null. Exit status is 0 on success,
2 for bad input and 3 when a computation fails numerically.
"""

import argparse
import csv
import io
import json
import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional, Sequence

from renyitv.coding import (
    ChannelModel,
    DistanceSpectrum,
    partitioned_bound,
    renyi_bound,
    shulman_feder_bound,
    spectrum_from_generator,
    union_bhattacharyya_bound,
)
from renyitv.divergences import chernoff_information
from renyitv.gmin import g_alpha
from renyitv.locus import boundary_polyline, chernoff_min

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3

COLUMNS = {
    "gmin": ["alpha", "eps", "value", "p_star", "q_star", "method"],
    "locus": ["eps", "index", "alpha", "slope", "x", "y", "p1_star", "p2_star", "q_star", "flags"],
    "chernoff-min": ["eps", "value", "x", "y", "p1_star", "p2_star", "q_star", "chernoff"],
    "bound": [
        "method", "channel", "n", "rate", "exponent", "prob_bound", "r_star", "rho_star",
        "s_star", "divergence", "partition_lo", "partition_hi", "flags",
    ],
    "spectrum": ["l", "count"],
}
DEFAULT_FORMAT = {"gmin": "csv", "locus": "csv", "chernoff-min": "csv", "bound": "json", "spectrum": "csv"}
METHODS = {"renyi", "sf", "union", "partitioned"}


class InputError(Exception):
    """Bad command-line input; the message names the offending token."""


# --------------------------------------------------------------------------- parsing


def _number(token: str, name: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise InputError(f"{name}: cannot parse {token!r} as a number") from None
    if math.isnan(value):
        raise InputError(f"{name}: {token!r} is not a number")
    return value


def _number_list(text: str, name: str) -> List[float]:
    tokens = [t.strip() for t in text.split(",")]
    if not tokens or any(t == "" for t in tokens):
        raise InputError(f"{name}: empty entry in {text!r}")
    return [_number(t, name) for t in tokens]


def _grid(text: str, name: str) -> List[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise InputError(f"{name}: expected start:stop:step, got {text!r}")
    start, stop, step = (_number(p, name) for p in parts)
    if step <= 0.0 or stop < start:
        raise InputError(f"{name}: empty or backwards grid {text!r}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    # round to 12 digits so 0.1 * 3 prints and computes as 0.3
    return [float(f"{start + i * step:.12g}") for i in range(count)]


def _check_in(value: float, lo: float, hi: float, name: str, token, closed_lo=False) -> None:
    ok = (lo <= value if closed_lo else lo < value) and value < hi
    if not ok:
        left = "[" if closed_lo else "("
        raise InputError(f"{name}: {token} outside {left}{lo:g}, {hi:g})")


def read_spectrum_csv(path: str, n: Optional[int] = None) -> DistanceSpectrum:
    """Two-column ``l,count`` file; a header row is optional and absent weights count 0."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"--spectrum: cannot read {path!r} ({exc.strerror})") from None
    entries = {}
    for lineno, row in enumerate(rows, 1):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise InputError(f"--spectrum: line {lineno} of {path!r} needs two columns, got {row!r}")
        l_tok, c_tok = row[0].strip(), row[1].strip()
        if lineno == 1 and l_tok.lower() == "l":
            continue
        try:
            weight = int(l_tok)
        except ValueError:
            raise InputError(f"--spectrum: bad weight {l_tok!r} on line {lineno} of {path!r}") from None
        count = _number(c_tok, "--spectrum")
        if weight < 0 or count < 0.0 or math.isinf(count):
            raise InputError(f"--spectrum: invalid entry {l_tok},{c_tok} on line {lineno} of {path!r}")
        if weight in entries:
            raise InputError(f"--spectrum: weight {l_tok} repeated on line {lineno} of {path!r}")
        entries[weight] = count
    if not entries:
        raise InputError(f"--spectrum: {path!r} has no entries")
    length = n if n is not None else max(entries)
    if max(entries) > length or length < 1:
        raise InputError(f"--n: block length {length} is below the largest weight {max(entries)}")
    counts = [entries.get(l, 0.0) for l in range(length + 1)]
    if 0 not in entries:
        counts[0] = 1.0
    return DistanceSpectrum(length, counts)


def read_generator(path: str) -> DistanceSpectrum:
    """Generator matrix as text lines of 0/1 characters; blank lines and '#' comments ignored."""
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise InputError(f"--generator: cannot read {path!r} ({exc.strerror})") from None
    rows = [ln.split("#", 1)[0].replace(" ", "") for ln in lines]
    rows = [r for r in rows if r]
    for r in rows:
        if set(r) - {"0", "1"}:
            raise InputError(f"--generator: non-binary row {r!r} in {path!r}")
    try:
        return spectrum_from_generator(rows)
    except ValueError as exc:
        raise InputError(f"--generator: {exc}") from None


# --------------------------------------------------------------------------- formatting


def _fmt(value):
    """12-significant-digit text for CSV cells."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.12g}"
    return str(value)


def _json_value(value):
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return float(f"{value:.12g}")
    return value


def render(records: Sequence[Dict], columns: Sequence[str], fmt: str, command: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for rec in records:
            writer.writerow([_fmt(rec.get(c)) for c in columns])
        return buf.getvalue()
    doc = {
        "command": command,
        "columns": list(columns),
        "records": [{c: _json_value(rec.get(c)) for c in columns} for rec in records],
    }
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _parse_cell(text: str):
    if text == "":
        return None
    if text in ("inf", "-inf"):
        return float(text)
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def parse_records(text: str) -> List[Dict]:
    """Read emitted CSV or JSON back into records (inf restored, empty cells as None)."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        doc = json.loads(text)
        out = []
        for rec in doc["records"]:
            out.append({k: (float(v) if v in ("inf", "-inf") else v) for k, v in rec.items()})
        return out
    reader = csv.DictReader(io.StringIO(text))
    return [{k: _parse_cell(v) for k, v in row.items()} for row in reader]


# --------------------------------------------------------------------------- commands


def _gmin_record(args):
    alpha, eps = args
    res = g_alpha(alpha, eps)
    return {
        "alpha": alpha, "eps": eps, "value": res.value,
        "p_star": res.p_star, "q_star": res.q_star, "method": res.method,
    }


def _locus_records(args):
    eps, points = args
    out = []
    for i, w in enumerate(boundary_polyline(eps, points)):
        out.append({
            "eps": eps, "index": i, "alpha": w.alpha, "slope": -w.alpha / (1.0 - w.alpha),
            "x": w.point[0], "y": w.point[1], "p1_star": w.p1_star[0], "p2_star": w.p2_star[0],
            "q_star": w.q_star[0], "flags": ";".join(w.flags),
        })
    return out


def _chernoff_record(eps):
    value, w = chernoff_min(eps)
    return {
        "eps": eps, "value": value, "x": w.point[0], "y": w.point[1],
        "p1_star": w.p1_star[0], "p2_star": w.p2_star[0], "q_star": w.q_star[0],
        "chernoff": chernoff_information(w.p1_star, w.p2_star),
    }


def _map(func, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    # map keeps input order, so output bytes do not depend on scheduling
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, items))


def cmd_gmin(ns) -> List[Dict]:
    alphas = _number_list(ns.alpha, "--alpha")
    for a in alphas:
        if not (a > 0.0) or math.isinf(a):
            raise InputError(f"--alpha: {_fmt(a)} must be positive and finite")
    if (ns.eps is None) == (ns.eps_grid is None):
        raise InputError("--eps/--eps-grid: give exactly one of them")
    eps = _number_list(ns.eps, "--eps") if ns.eps is not None else _grid(ns.eps_grid, "--eps-grid")
    for e in eps:
        _check_in(e, 0.0, 2.0, "--eps", _fmt(e), closed_lo=True)
    return _map(_gmin_record, [(a, e) for a in alphas for e in eps], ns.jobs)


def cmd_locus(ns) -> List[Dict]:
    eps = _number_list(ns.eps, "--eps")
    for e in eps:
        _check_in(e, 0.0, 2.0, "--eps", _fmt(e))
    if ns.points < 2:
        raise InputError(f"--points: {ns.points} must be >= 2")
    chunks = _map(_locus_records, [(e, ns.points) for e in eps], ns.jobs)
    return [rec for chunk in chunks for rec in chunk]


def cmd_chernoff(ns) -> List[Dict]:
    eps = _number_list(ns.eps, "--eps")
    for e in eps:
        _check_in(e, 0.0, 2.0, "--eps", _fmt(e))
    return _map(_chernoff_record, eps, ns.jobs)


def _load_code(ns) -> DistanceSpectrum:
    if (ns.spectrum is None) == (ns.generator is None):
        raise InputError("--spectrum/--generator: give exactly one of them")
    if ns.spectrum is not None:
        return read_spectrum_csv(ns.spectrum, ns.n)
    return read_generator(ns.generator)


def cmd_bound(ns) -> List[Dict]:
    if ns.method not in METHODS:
        raise InputError(f"--method: unknown method {ns.method!r}")
    try:
        channel = ChannelModel.parse(ns.channel)
    except ValueError as exc:
        raise InputError(f"--channel: {exc}") from None
    spec = _load_code(ns)
    if spec.nonzero_codewords <= 0.0:
        raise InputError("--spectrum: code has no nonzero codewords")
    if ns.rate == "auto":
        rate = None
    else:
        rate = _number(ns.rate, "--rate")
        if rate < 0.0 or math.isinf(rate):
            raise InputError(f"--rate: {ns.rate} must be a nonnegative number or 'auto'")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if ns.method == "renyi":
            rep = renyi_bound(spec, rate, channel)
        elif ns.method == "sf":
            rep = shulman_feder_bound(spec, rate, channel)
        elif ns.method == "union":
            rep = union_bhattacharyya_bound(spec, channel)
        else:
            rep = partitioned_bound(spec, rate, channel)
    for w in caught:
        print(f"renyitv: warning: {w.message}", file=ns.stderr)
    lo, hi = rep.partition if rep.partition else (None, None)
    return [{
        "method": rep.method, "channel": channel.label(), "n": rep.n, "rate": rep.rate,
        "exponent": rep.exponent, "prob_bound": rep.prob_bound, "r_star": rep.r_star,
        "rho_star": rep.rho_star, "s_star": rep.s_star, "divergence": rep.divergence,
        "partition_lo": lo, "partition_hi": hi, "flags": ";".join(rep.flags),
    }]


def cmd_spectrum(ns) -> List[Dict]:
    spec = read_generator(ns.generator)
    return [{"l": l, "count": int(c)} for l, c in enumerate(spec.counts)]


COMMANDS = {
    "gmin": cmd_gmin,
    "locus": cmd_locus,
    "chernoff-min": cmd_chernoff,
    "bound": cmd_bound,
    "spectrum": cmd_spectrum,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help="output file (default: standard output)")
    common.add_argument("--format", choices=["csv", "json"], help="output format")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")

    parser = _Parser(prog="renyitv", description="Rényi divergence and coding-bound calculations.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("gmin", parents=[common], help="minimum Rényi divergence at a given total variation")
    p.add_argument("--alpha", required=True, help="comma-separated orders")
    p.add_argument("--eps", help="comma-separated total variation values in [0, 2)")
    p.add_argument("--eps-grid", help="start:stop:step, stop included")

    p = sub.add_parser("locus", parents=[common], help="boundary of the relative-entropy region")
    p.add_argument("--eps", required=True, help="comma-separated values in (0, 2)")
    p.add_argument("--points", type=int, default=200, help="points per boundary")

    p = sub.add_parser("chernoff-min", parents=[common], help="least Chernoff information")
    p.add_argument("--eps", required=True, help="comma-separated values in (0, 2)")

    p = sub.add_parser("bound", parents=[common], help="ML error-probability bound")
    p.add_argument("--spectrum", help="CSV file with rows l,count")
    p.add_argument("--generator", help="text file of 0/1 generator rows")
    p.add_argument("--n", type=int, help="block length (default: largest weight in --spectrum)")
    p.add_argument("--rate", default="auto", help="nats per channel use, or 'auto' for log(M)/N")
    p.add_argument("--channel", required=True, help="bsc:<delta> or biawgn:<EsN0_dB>")
    p.add_argument("--method", default="renyi", help="renyi | sf | union | partitioned")

    p = sub.add_parser("spectrum", parents=[common], help="weight distribution of a generator matrix")
    p.add_argument("--generator", required=True, help="text file of 0/1 generator rows")
    return parser


def _all_finite(records) -> bool:
    return all(not (isinstance(v, float) and math.isnan(v)) for rec in records for v in rec.values())


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr
    try:
        ns = build_parser().parse_args(argv)
        if ns.jobs < 1:
            raise InputError(f"--jobs: {ns.jobs} must be >= 1")
        ns.stderr = stderr
        records = COMMANDS[ns.command](ns)
    except InputError as exc:
        print(f"renyitv: error: {exc}", file=stderr)
        return EXIT_INPUT
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        print(f"renyitv: numerical failure: {exc}", file=stderr)
        return EXIT_NUMERIC
    if not _all_finite(records):
        print("renyitv: numerical failure: result is not a number", file=stderr)
        return EXIT_NUMERIC

    text = render(records, COLUMNS[ns.command], ns.format or DEFAULT_FORMAT[ns.command], ns.command)
    if ns.out:
        try:
            with open(ns.out, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"renyitv: error: --out: cannot write {ns.out!r} ({exc.strerror})", file=stderr)
            return EXIT_INPUT
    else:
        stdout.write(text)
    return EXIT_OK


def main() -> None:
    try:
        code = run()
        sys.stdout.flush()
    except BrokenPipeError:
        # downstream reader closed early (e.g. piped into head)
        sys.stderr.close()
        code = EXIT_OK
    sys.exit(code)


if __name__ == "__main__":
    main()
