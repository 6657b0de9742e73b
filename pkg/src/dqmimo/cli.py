"""Command-line front end.

Every subcommand writes a self-describing artifact: a metadata header with
schema version, package version, seed, the full configuration and its hash,
followed by CSV rows or a JSON body. Feeding the embedded configuration back
through ``--config`` reproduces the artifact up to the timestamp.

Exit codes: 0 success, 2 configuration error, 3 resource limit.
"""

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .arrangement import (Arrangement, channel_arrangement, enumerate_regions,
                          general_position_arrangement, max_regions,
                          max_regions_zero_threshold, sample_region_count)
from .asymptotics import (REMAINDER_NOTE, fig4_curves, high_snr_rate,
                          log_binomial_exact, log_binomial_expansion,
                          log_binomial_sum_exact, log_binomial_sum_expansion,
                          theorem1_bounds)
from .channel import ChannelModel, snr_db_to_power
from .codec import BA_TOL, build_constellation, capacity_at_power, induced_channel
from .errors import ConstructionFailure, InvalidArgument, ResourceLimit
from .receiver_sim import simulate_link

SCHEMA_VERSION = 1
WORKERS_ENV = "DQMIMO_WORKERS"
EXIT_CONFIG = 2
EXIT_RESOURCE = 3


class ConfigError(InvalidArgument):
    pass


@dataclass
class StudyConfig:
    command: str
    params: dict = field(default_factory=dict)
    out: str | None = None
    fmt: str = "csv"

    @property
    def seed(self):
        return self.params.get("seed")

    def canonical(self):
        return json.dumps({"command": self.command, **self.params}, sort_keys=True,
                          separators=(",", ":"))

    def digest(self):
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]


# list parsing -------------------------------------------------------------

def _split(value):
    if isinstance(value, (list, tuple)):
        return list(value)
    if isinstance(value, (int, float)):
        return [value]
    return [p.strip() for p in str(value).split(",") if p.strip()]


def int_list(value):
    """``"1..4,8"`` -> ``[1, 2, 3, 4, 8]``."""
    out = []
    for part in _split(value):
        if isinstance(part, str) and ".." in part:
            lo, hi = part.split("..")
            out += range(int(lo), int(hi) + 1)
        else:
            out.append(int(part))
    if not out:
        raise ConfigError("empty integer list")
    return out


def float_list(value):
    out = [float(p) for p in _split(value)]
    if not out:
        raise ConfigError("empty list")
    return out


def ell_list(value):
    """Like :func:`int_list` but ``inf`` stands for the analytic limit."""
    out = []
    for part in _split(value):
        if str(part).strip().lower() in ("inf", "infinity"):
            out.append(math.inf)
        elif isinstance(part, float) and math.isinf(part):
            out.append(math.inf)
        else:
            out += int_list(part)
    if not out:
        raise ConfigError("empty ell list")
    if any(e < 1 for e in out):
        raise ConfigError("ell must be at least 1")
    return out


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    if isinstance(x, (float, np.floating)):
        return f"{x:.6f}"
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return "inf" if math.isinf(x) else round(x, 6)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


# workers ------------------------------------------------------------------

def worker_count():
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{WORKERS_ENV} must be positive")
    return n


def pmap(fn, items):
    """Order-preserving map over a bounded process pool."""
    items = list(items)
    n = min(worker_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# channel spec -------------------------------------------------------------

def make_channel(p, power=1.0):
    if p.get("h") is not None:
        h = p["h"]
        if isinstance(h, str):
            try:
                h = json.loads(h)
            except json.JSONDecodeError as e:
                raise ConfigError(f"--h is not a JSON matrix: {e}") from None
        return ChannelModel(np.asarray(h, dtype=float), power=power)
    return ChannelModel.random(int(p["n_t"]), int(p["n_r"]), int(p["channel_seed"]), power=power)


def _seeds(seed, n):
    return np.random.SeedSequence(seed).spawn(n)


# studies ------------------------------------------------------------------

def count_regions(p):
    if p.get("arrangement"):
        with open(p["arrangement"]) as fh:
            arr = Arrangement.from_json(fh.read())
    else:
        arr = general_position_arrangement(int(p["n_q"]), int(p["d"]), bool(p["zero_threshold"]),
                                           rng=p["seed"])
    regions = enumerate_regions(arr)
    zero = arr.zero_threshold
    bound = max_regions_zero_threshold(arr.m_q, arr.d) if zero else max_regions(arr.m_q, arr.d)
    radius = p.get("oracle_radius") or 1.1 * math.sqrt(arr.d)
    oracle = sample_region_count(arr, int(p["oracle_samples"]), radius,
                                 rng=_seeds(p["seed"], 1)[0])
    cols = ["d", "n_q", "zero_threshold", "exact", "bound", "oracle"]
    return cols, [[arr.d, arr.m_q, zero, len(regions), bound, oracle]]


def _rate_row(job):
    n_q, rank, n_r, ell = job
    b = theorem1_bounds(n_q, rank, n_r, ell)
    if math.isinf(ell):
        ex = ez = b.lower
        exact = True
    else:
        ex, e1 = high_snr_rate(n_q, rank, ell)
        ez, e2 = high_snr_rate(n_q, rank, ell, zero_threshold=True)
        exact = e1 and e2
    return [n_q, rank, n_r, ell, b.lower, b.upper, ex, ez, exact]


def bounds_study(p):
    n_r = int(p["n_r"])
    ranks = int_list(p["rank"]) if p.get("rank") is not None else [min(t, n_r) for t in int_list(p["n_t"])]
    jobs = [(q, r, n_r, e) for r in dict.fromkeys(ranks) for q in int_list(p["n_q"])
            for e in ell_list(p["ell"])]
    rows = [r + [f"rank={r[1]}"] for r in pmap(_rate_row, jobs)]
    if any(math.isinf(e) for e in ell_list(p["ell"])):
        rows += [[q, None, n_r, math.inf, float(q), float(q), float(q), float(q), True, "reference"]
                 for q in int_list(p["n_q"])]
    cols = ["n_q", "rank", "n_r", "ell", "lower", "upper", "exact_rate", "exact_rate_zero_t",
            "exact", "series"]
    return cols, rows


def fig4_study(p):
    rows = fig4_curves(int(p["n_r"]), int_list(p["n_t"]), int_list(p["n_q"]))
    out = [["reference" if t is None else f"n_t={t}", q, t, r, v] for q, t, r, v in rows]
    return ["series", "n_q", "n_t", "rank", "rate"], out


def tradeoff_table(p):
    """Rows ``(ell, exact_rate, exact_rate_zero_t, thm1_lower, thm1_upper, exact)``."""
    n_q, rank = int(p["n_q"]), int(p["rank"])
    n_r = int(p["n_r"]) if p.get("n_r") is not None else rank
    rows = []
    for q, r, nr, ell, lo, hi, ex, ez, flag in pmap(_rate_row, [(n_q, rank, n_r, e)
                                                                 for e in ell_list(p["ell"])]):
        rows.append([ell, ex, ez, lo, hi, flag])
    return ["ell", "exact_rate", "exact_rate_zero_t", "thm1_lower", "thm1_upper", "exact"], rows


def _capacity_point(job):
    p, power_db, child = job
    ch = make_channel(p)
    a_seed, mc_seed = child.spawn(2)
    ell = int(p["ell"])
    arr = channel_arrangement(ch, int(p["n_q"]), ell, bool(p["zero_threshold"]), rng=a_seed)
    res, cons, chan = capacity_at_power(ch, arr, ell, float(snr_db_to_power(power_db)),
                                        int(p["mc_samples"]), mc_seed, float(p["tol"]))
    b = theorem1_bounds(int(p["n_q"]), ch.rank, ch.n_r, ell)
    cap, _ = high_snr_rate(int(p["n_q"]), ch.rank, ell, bool(p["zero_threshold"]))
    return {
        "power_db": power_db,
        "rate_per_use": res.rate_per_use,
        "num_regions": len(cons),
        "bounds": {"lower": b.lower, "upper": b.upper, "high_snr_cap": cap,
                   "remainder": REMAINDER_NOTE},
        "distribution": res.input_distribution,
        "converged": res.converged,
        "cost_used": res.cost_used,
        "budget": ell * float(snr_db_to_power(power_db)),
        "out_of_codebook": chan.out_of_codebook,
        "exact_channel": chan.exact,
    }


def capacity_study(p):
    powers = float_list(p["power_db"])
    jobs = [(p, db, c) for db, c in zip(powers, _seeds(p["seed"], len(powers)))]
    return pmap(_capacity_point, jobs)


def _simulate_point(job):
    p, snr_db, child = job
    ch = make_channel(p)
    a_seed, mc_seed, sim_seed = child.spawn(3)
    ell = int(p["ell"])
    arr = channel_arrangement(ch, int(p["n_q"]), ell, bool(p["zero_threshold"]), rng=a_seed)
    cons = build_constellation(ch, arr, ell, float(snr_db_to_power(snr_db)))
    chan = induced_channel(cons, int(p["mc_samples"]), mc_seed)
    rep = simulate_link(ch, cons, chan, int(p["blocks"]), np.random.default_rng(sim_seed),
                        decoder=p["decoder"], messages=p["messages"])
    return [snr_db, rep.blocks, rep.message_errors, rep.error_rate, rep.empirical_rate,
            rep.pipeline_mismatches, rep.latency_uses]


def simulate_study(p):
    snrs = float_list(p["snr_db"])
    jobs = [(p, s, c) for s, c in zip(snrs, _seeds(p["seed"], len(snrs)))]
    cols = ["snr_db", "blocks", "errors", "error_rate", "empirical_rate_bits_per_use",
            "pipeline_mismatches", "latency_uses"]
    return cols, pmap(_simulate_point, jobs)


def expansion_check(p):
    rows = []
    for n in int_list(p["n"]):
        for lam in float_list(p["lam"]):
            k = math.floor(lam * n)
            rows.append(["single", n, lam, log_binomial_exact(n, k),
                         log_binomial_expansion(n, lam), None])
            rows[-1][-1] = abs(rows[-1][3] - rows[-1][4])
        for lam in float_list(p["sum_lam"]):
            ex, ap = log_binomial_sum_exact(n, lam), log_binomial_sum_expansion(n, lam)
            rows.append(["sum", n, lam, ex, ap, abs(ex - ap)])
    return ["kind", "n", "lam", "exact", "expansion", "abs_error"], rows


# parser -------------------------------------------------------------------

def _add_channel(sp):
    sp.add_argument("--h", help="channel matrix as JSON rows; overrides the random draw")
    sp.add_argument("--n-t", type=int, default=2)
    sp.add_argument("--n-r", type=int, default=2)
    sp.add_argument("--channel-seed", type=int, default=1)
    sp.add_argument("--n-q", type=int, default=3)
    sp.add_argument("--ell", type=int, default=1)
    sp.add_argument("--zero-threshold", action="store_true")
    sp.add_argument("--mc-samples", type=int, default=100_000)


def build_parser():
    parser = argparse.ArgumentParser(prog="dqmimo", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, fmt="csv"):
        sp.add_argument("--config", help="JSON file of option values; flags given explicitly win")
        sp.add_argument("--out", help="output file (default stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default=fmt)
        sp.add_argument("--seed", type=int, default=0)
        return sp

    sp = common(sub.add_parser("count-regions", help="exact, bound and sampled cell counts"))
    sp.add_argument("--d", type=int, default=2)
    sp.add_argument("--n-q", type=int, default=3)
    sp.add_argument("--zero-threshold", action="store_true")
    sp.add_argument("--arrangement", help="arrangement JSON file instead of a random one")
    sp.add_argument("--oracle-samples", type=int, default=100_000)
    sp.add_argument("--oracle-radius", type=float)

    sp = common(sub.add_parser("bounds", help="rate bounds and exact high-SNR caps"))
    sp.add_argument("--n-q", default="1..40")
    sp.add_argument("--n-r", type=int, default=10)
    sp.add_argument("--n-t", default="2,4,6,8", help="ranks are min(n_t, n_r)")
    sp.add_argument("--rank", help="explicit rank list, overrides --n-t")
    sp.add_argument("--ell", default="inf")

    sp = common(sub.add_parser("fig4", help="infinite-delay rate curves"))
    sp.add_argument("--n-q", default="1..40")
    sp.add_argument("--n-r", type=int, default=10)
    sp.add_argument("--n-t", default="2,4,6,8")

    sp = common(sub.add_parser("tradeoff", help="rate versus number of delay elements"))
    sp.add_argument("--n-q", type=int, default=4)
    sp.add_argument("--rank", type=int, default=2)
    sp.add_argument("--n-r", type=int)
    sp.add_argument("--ell", default="1..64")

    sp = common(sub.add_parser("capacity", help="induced-channel capacity"), fmt="json")
    _add_channel(sp)
    sp.add_argument("--power-db", default="30")
    sp.add_argument("--tol", type=float, default=BA_TOL)

    sp = common(sub.add_parser("simulate", help="time-domain link simulation"))
    _add_channel(sp)
    sp.add_argument("--snr-db", default="10,20,30,40")
    sp.add_argument("--blocks", type=int, default=10_000)
    sp.add_argument("--decoder", choices=("ml", "sign"), default="ml")
    sp.add_argument("--messages", choices=("uniform", "support"), default="uniform")

    sp = common(sub.add_parser("expansion-check", help="log-binomial expansion errors"))
    sp.add_argument("--n", default="100,1000,10000")
    sp.add_argument("--lam", default="0.3")
    sp.add_argument("--sum-lam", default="0.25")
    return parser, sub


STUDIES = {
    "count-regions": count_regions,
    "bounds": bounds_study,
    "fig4": fig4_study,
    "tradeoff": tradeoff_table,
    "capacity": capacity_study,
    "simulate": simulate_study,
    "expansion-check": expansion_check,
}
_IO_KEYS = ("config", "out", "format", "command")


def parse_config(argv):
    parser, sub = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {args.config}: {e}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        cfg = dict(cfg.get("config", cfg))      # accept a whole artifact header too
        if cfg.pop("command", args.command) != args.command:
            raise ConfigError("config was written for a different subcommand")
        unknown = sorted(set(cfg) - set(vars(args)))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        sub.choices[args.command].set_defaults(**cfg)
        args = parser.parse_args(argv)
    p = {k: v for k, v in vars(args).items() if k not in _IO_KEYS}
    return StudyConfig(args.command, p, args.out, args.format)


def _header(cfg):
    return {
        "schema_version": SCHEMA_VERSION,
        "package_version": __version__,
        "command": cfg.command,
        "seed": cfg.seed,
        "config": json.loads(cfg.canonical()),
        "config_hash": cfg.digest(),
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def render(cfg, result):
    head = _header(cfg)
    if isinstance(result, tuple):
        cols, rows = result
        if cfg.fmt == "json":
            body = [dict(zip(cols, r)) for r in rows]
            return json.dumps({"meta": head, "rows": _jsonable(body)}, indent=1) + "\n"
        buf = io.StringIO()
        for k, v in head.items():
            buf.write(f"# {k}: {json.dumps(v, sort_keys=True, separators=(',', ':'))}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        w.writerows([[_fmt(x) for x in r] for r in rows])
        return buf.getvalue()
    if cfg.fmt == "csv":
        raise ConfigError(f"{cfg.command} emits JSON only")
    return json.dumps({"meta": head, "results": _jsonable(result)}, indent=1) + "\n"


def run_study(cfg):
    """Run one study and write its artifact; returns the exit status."""
    worker_count()
    text = render(cfg, STUDIES[cfg.command](cfg.params))
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None):
    try:
        cfg = parse_config(argv)
        return run_study(cfg)
    except (ResourceLimit, ConstructionFailure) as e:
        print(f"error: resource: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except (InvalidArgument, ValueError, TypeError, KeyError) as e:
        print(f"error: config: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
