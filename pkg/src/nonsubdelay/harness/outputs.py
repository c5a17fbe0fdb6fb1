"""CSV, delay-file and plot emission.

Layout under the output directory::

    summary.csv                  one row per (algorithm, d, q)
    runs/<alg>_d<d>_q<q>_s<seed>.csv      round-indexed regret series
    records/<alg>_d<d>_q<q>_s<seed>.csv   raw round records
    delays/d<d>_s<seed>.txt      delay schedule, one integer per line
    plots/<feedback>_d<d>.svg    seed-mean regret with a one-std band
    manifest.json                fingerprints, timings, kernel backend

Every file is written to a temporary name and renamed into place.
"""

import csv
import io
import json
import os
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .. import __version__, kernels
from ..algorithms import ALGORITHMS, RECORD_HEADER, format_subset, is_bandit
from ..errors import ConfigError
from ..feedback import save_delays

RUN_HEADER = ("t", "loss", "cum_loss", "comparator_ab", "regret_ab", "comparator", "regret")
SUMMARY_HEADER = (
    "algorithm",
    "feedback",
    "d",
    "q",
    "chosen",
    "seeds",
    "mean_final_regret_ab",
    "std_final_regret_ab",
    "mean_final_regret",
    "std_final_regret",
    "mean_d_bar",
)


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def run_stem(algorithm: str, d: int, q, seed: int) -> str:
    qtag = "none" if q is None else repr(float(q))
    return f"{algorithm}_d{d}_q{qtag}_s{seed}"


def run_rows(ledger, stride: int = 1):
    cum = ledger.cumulative_loss
    reg_ab = ledger.regret_ab
    reg = ledger.regret
    T = cum.shape[0]
    for i in range(T):
        t = i + 1
        if (t - 1) % stride and t != T:
            continue
        yield (t, _fmt(ledger.losses[i]), _fmt(cum[i]), _fmt(ledger.comparator_ab[i]), _fmt(reg_ab[i]),
               _fmt(ledger.comparator[i]), _fmt(reg[i]))


def summary_rows(result) -> List[Tuple]:
    groups: Dict[Tuple[str, int, object], list] = {}
    for r in result.runs:
        groups.setdefault((r.algorithm, r.d, r.q), []).append(r)
    order = {a: i for i, a in enumerate(ALGORITHMS)}
    rows = []
    for (algorithm, d, q), runs in sorted(groups.items(), key=lambda kv: (kv[0][1], order[kv[0][0]], kv[0][2] or 0.0)):
        ab = np.array([r.ledger.final_regret_ab for r in runs])
        van = np.array([r.ledger.final_regret for r in runs])
        ddof = 1 if len(runs) > 1 else 0
        rows.append((
            algorithm,
            "bandit" if is_bandit(algorithm) else "full",
            d,
            _fmt(q),
            int(result.chosen_q.get((algorithm, d)) == q),
            len(runs),
            _fmt(ab.mean()),
            _fmt(ab.std(ddof=ddof)),
            _fmt(van.mean()),
            _fmt(van.std(ddof=ddof)),
            _fmt(float(np.mean([r.summary["d_bar"] for r in runs]))),
        ))
    return rows


def band(series: Sequence[np.ndarray]):
    stack = np.vstack(series)
    return stack.mean(axis=0), stack.std(axis=0)


def plot_regime(path: Path, title: str, curves: Dict[str, Tuple[np.ndarray, np.ndarray, np.ndarray]]) -> None:
    """One figure: mean regret vs rounds per algorithm with a +-1 std band."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "nonsubdelay"
    fig, ax = plt.subplots(figsize=(5, 3.6))
    for name, (t, mean, std) in curves.items():
        (line,) = ax.plot(t, mean, label=name, linewidth=1.4)
        ax.fill_between(t, mean - std, mean + std, color=line.get_color(), alpha=0.2, linewidth=0)
    ax.set_xlabel("round")
    ax.set_ylabel("(alpha, beta)-regret")
    ax.set_title(title)
    ax.legend(frameon=False)
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    fig.savefig(tmp, format="svg", metadata={"Date": None})
    plt.close(fig)
    os.replace(tmp, path)


def _regimes(result):
    keys = sorted({(("bandit" if is_bandit(a) else "full"), d) for a, d in result.chosen_q})
    return keys


def emit_outputs(result, out_dir=None) -> Path:
    config = result.config
    out = Path(out_dir or config.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    if not result.runs:
        raise ConfigError("run", "no completed runs to write")

    for r in result.runs:
        chosen = result.chosen_q.get((r.algorithm, r.d)) == r.q
        stem = run_stem(r.algorithm, r.d, r.q, r.seed)
        if config.run_csv == "all" or (config.run_csv == "chosen" and chosen):
            _atomic_write(out / "runs" / f"{stem}.csv", _csv_text(RUN_HEADER, run_rows(r.ledger, config.stride)))
        if config.records and r.trace is not None:
            tr = r.trace
            rows = ((i + 1, r.algorithm, r.seed, format_subset(int(tr.masks[i])), _fmt(tr.losses[i]),
                     int(tr.delays[i]), int(tr.oracle_calls[i])) for i in range(tr.masks.shape[0]))
            _atomic_write(out / "records" / f"{stem}.csv", _csv_text(RECORD_HEADER, rows))

    seen = set()
    for r in result.runs:
        if (r.d, r.seed) not in seen and r.trace is not None:
            seen.add((r.d, r.seed))
            path = out / "delays" / f"d{r.d}_s{r.seed}.txt"
            path.parent.mkdir(parents=True, exist_ok=True)
            save_delays(r.trace.delays, path)

    _atomic_write(out / "summary.csv", _csv_text(SUMMARY_HEADER, summary_rows(result)))

    if config.plots:
        for feedback, d in _regimes(result):
            curves = {}
            for algorithm in ALGORITHMS:
                if (algorithm, d) not in result.chosen_q or ("bandit" if is_bandit(algorithm) else "full") != feedback:
                    continue
                runs = result.chosen_runs(algorithm, d)
                mean, std = band([r.ledger.regret_ab for r in runs])
                curves[algorithm] = (np.arange(1, mean.shape[0] + 1), mean, std)
            plot_regime(out / "plots" / f"{feedback}_d{d}.svg", f"{feedback} feedback, d = {d}", curves)

    manifest = {
        "version": __version__,
        "kernel_backend": kernels.BACKEND,
        "wall_time": result.wall_time,
        "config": config.to_dict(),
        "chosen_q": {f"{a}|{d}": q for (a, d), q in sorted(result.chosen_q.items())},
        "failures": [f.__dict__ for f in result.failures],
        "runs": [
            {
                "file": run_stem(r.algorithm, r.d, r.q, r.seed),
                "fingerprint": r.fingerprint,
                "params": r.params,
                "summary": r.summary,
            }
            for r in result.runs
        ],
    }
    _atomic_write(out / "manifest.json", json.dumps(manifest, indent=2, default=str) + "\n")
    return out


def read_csv(path) -> List[Dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def replot(out_dir) -> List[Path]:
    """Regenerate plots from ``summary.csv`` and the per-run CSVs."""
    out = Path(out_dir)
    summary = read_csv(out / "summary.csv")
    written = []
    regimes: Dict[Tuple[str, int], Dict[str, list]] = {}
    for row in summary:
        if row["chosen"] != "1":
            continue
        d = int(row["d"])
        q = None if row["q"] == "" else float(row["q"])
        prefix = run_stem(row["algorithm"], d, q, 0).rsplit("_s", 1)[0] + "_s"
        files = sorted((out / "runs").glob(prefix + "*.csv"))
        if not files:
            raise FileNotFoundError(f"no per-run CSVs for {prefix}* under {out / 'runs'}")
        series, t = [], None
        for f in files:
            rows = read_csv(f)
            t = np.array([int(r["t"]) for r in rows])
            series.append(np.array([float(r["regret_ab"]) for r in rows]))
        mean, std = band(series)
        regimes.setdefault((row["feedback"], d), {})[row["algorithm"]] = (t, mean, std)
    for (feedback, d), curves in sorted(regimes.items()):
        path = out / "plots" / f"{feedback}_d{d}.svg"
        plot_regime(path, f"{feedback} feedback, d = {d}", curves)
        written.append(path)
    return written
