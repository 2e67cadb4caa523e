"""Command-line front end.

Subcommands ``rate``, ``threshold``, ``upper``, ``finite``, ``simulate`` and
``selftest`` print CSV (default) or JSON.  Every flag can also come from a
``key=value`` config file (``--config``); flags win.  Exit codes: 0 success,
2 configuration error, 3 numerical failure, 4 self-test failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass

import numpy as np

from . import entropy, finitekey, keyrate, qmat, states

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_SELFTEST = 0, 2, 3, 4
PROTOCOLS = ("six-state", "bb84", "b92")
SIM_PE_PAIRS = 1000  # pairs sacrificed for parameter estimation in ``simulate``


class ConfigError(ValueError):
    pass


class NumericError(RuntimeError):
    pass


@dataclass
class RunConfig:
    command: str
    protocol: str = "six-state"
    Q: float | None = None
    Q_range: tuple | None = None
    q: float | None = None
    optimize_q: bool = False
    alpha: float = 0.38
    n: int = 1000
    eps: float = 1e-6
    seed: int = 0
    out: str | None = None
    format: str = "csv"
    threshold: float = 0.11
    instances: int = 200

    def qs(self) -> list[float]:
        if self.Q_range is not None:
            a, b, s = self.Q_range
            count = int(math.floor((b - a) / s + 1e-12)) + 1
            return [round(a + i * s, 12) for i in range(count)]
        if self.Q is None:
            raise ConfigError("give --Q or --Q-range")
        return [self.Q]

    def flip(self) -> float | None:
        return None if self.optimize_q else (0.0 if self.q is None else self.q)


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def parse_range(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"range must be start:stop:step, got {text!r}")
    try:
        a, b, s = (float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"bad range {text!r}") from exc
    if s <= 0 or b < a:
        raise ConfigError("range needs step > 0 and stop >= start")
    return a, b, s


def read_config(path: str) -> dict[str, str]:
    """``key=value`` lines; ``#`` starts a comment; keys may use ``-`` or ``_``."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key=value")
                k, v = line.split("=", 1)
                out[k.strip().replace("-", "_")] = v.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return out


_CASTS = {
    "protocol": str, "Q": float, "Q_range": parse_range, "q": float,
    "optimize_q": lambda v: str(v).lower() in ("1", "true", "yes", "on"),
    "alpha": float, "n": int, "eps": float, "seed": int, "out": str, "format": str,
    "threshold": float, "instances": int,
}


def resolve(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, config file and flags (in increasing precedence) and validate."""
    values = {}
    if args.config:
        for k, v in read_config(args.config).items():
            if k not in _CASTS:
                raise ConfigError(f"unknown config key {k!r}")
            try:
                values[k] = _CASTS[k](v)
            except ValueError as exc:
                raise ConfigError(f"bad value for {k}: {v!r}") from exc
    for k in _CASTS:
        v = getattr(args, k, None)
        if v is not None and v is not False:
            values[k] = v
    cfg = RunConfig(command=args.command, **values)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    if cfg.protocol not in PROTOCOLS:
        raise ConfigError(f"unknown protocol {cfg.protocol!r}")
    if cfg.format not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    if not 0 < cfg.alpha < 1 / math.sqrt(2):
        raise ConfigError("alpha must lie in (0, 1/sqrt(2))")
    if not 0 < cfg.eps < 1:
        raise ConfigError("eps must lie in (0, 1)")
    if cfg.n < 1:
        raise ConfigError("n must be positive")
    if cfg.q is not None and cfg.optimize_q:
        raise ConfigError("--q and --optimize-q are exclusive")
    if cfg.q is not None and not 0 <= cfg.q <= 0.5:
        raise ConfigError("q must lie in [0, 1/2]")
    for Q in ([cfg.Q] if cfg.Q is not None else []) + (list(cfg.Q_range[:2]) if cfg.Q_range else []):
        if not 0 <= Q < 0.5:
            raise ConfigError("Q must lie in [0, 1/2)")
    if not 0 <= cfg.seed < 2**64:
        raise ConfigError("seed must be a 64-bit unsigned integer")


def threads() -> int:
    env = os.environ.get("QKD_KEYRATE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError("QKD_KEYRATE_THREADS must be an integer") from exc
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _spec(cfg):
    return states.get_protocol(cfg.protocol, cfg.alpha)


def cmd_rate(cfg: RunConfig) -> list[dict]:
    """Asymptotic one-way key rate at each Q."""
    spec = _spec(cfg)
    pts = keyrate.rate_curve(spec, cfg.qs(), cfg.flip(), threads=threads())
    rows = []
    for p in pts:
        row = {}
        if cfg.protocol == "b92":
            row["delta"] = states.b92_delta_of_q(p.Q, cfg.alpha)
        lam = p.minimizer.array()
        row.update({"Q": p.Q, "q_opt": p.q_opt, "rate": p.rate,
                    "lambda1": lam[0], "lambda2": lam[1], "lambda3": lam[2], "lambda4": lam[3]})
        rows.append(row)
    return rows


def cmd_threshold(cfg: RunConfig) -> list[dict]:
    """Error rate where the key rate reaches zero, with and without pre-processing."""
    spec = _spec(cfg)
    hi = 0.1 if cfg.protocol == "b92" else 0.25
    with_pp = keyrate.threshold(spec, True, hi=hi)
    without = keyrate.threshold(spec, False, hi=hi)
    row = {"protocol": cfg.protocol, "Q_star_opt": with_pp, "Q_star_q0": without}
    if cfg.protocol == "b92":
        row["delta_star_opt"] = states.b92_delta_of_q(with_pp, cfg.alpha)
        row["delta_star_q0"] = states.b92_delta_of_q(without, cfg.alpha)
    return [row]


def cmd_upper(cfg: RunConfig) -> list[dict]:
    """Upper bound on the threshold from a fixed eavesdropper measurement."""
    if cfg.protocol == "b92":
        raise ConfigError("the upper bound is available for six-state and bb84")
    return [{"protocol": cfg.protocol, "Q_upper": keyrate.upper_threshold(_spec(cfg))}]


def _attack(cfg, Q: float, q: float):
    return keyrate.min_over_gamma(_spec(cfg), Q, q)[1]


def cmd_finite(cfg: RunConfig) -> list[dict]:
    """Finite-block key length at each Q."""
    spec = _spec(cfg)
    q = cfg.flip()
    rows = []
    for Q in cfg.qs():
        if q is None:
            pt = keyrate.optimize_preprocessing(spec, Q)
            qq, lam = pt.q_opt, pt.minimizer
        else:
            qq = q
            lam = _attack(cfg, Q, qq)
        res = finitekey.finite_rate(spec, lam, qq, cfg.n, cfg.eps)
        r_inf = keyrate.rate_objective(lam, qq)
        rows.append({"Q": Q, "q": qq, "n": cfg.n, "eps": cfg.eps, "ell": res.ell,
                     "ell_per_n": res.ell / cfg.n, "ell_raw": res.ell_raw, "leak_ec": res.leak_ec,
                     "S2": res.entropies[0], "S0": res.entropies[1], "rate_asymptotic": r_inf})
    return rows


def cmd_simulate(cfg: RunConfig) -> list[dict]:
    """Sample, estimate, correct and hash one block; every step is a transcript row."""
    if cfg.Q is None:
        raise ConfigError("simulate needs --Q")
    if cfg.n > 20:
        raise ConfigError("simulate decodes exhaustively; use --n <= 20")
    q = cfg.flip() or 0.0
    lam = _attack(cfg, cfg.Q, q)
    rows = []

    def log(step, quantity, value):
        rows.append({"step": step, "quantity": quantity, "value": value})

    log("config", "protocol", cfg.protocol)
    log("config", "seed", cfg.seed)
    log("sample", "lambda", " ".join(f"{v:.6g}" for v in lam.array()))
    rec = finitekey.sample_collective(lam, cfg.n, cfg.seed)
    pe = finitekey.sample_collective(lam, SIM_PE_PAIRS, cfg.seed + 1)
    log("sample", "key_pairs", cfg.n)
    log("sample", "x", "".join(map(str, rec.x)))
    log("sample", "y", "".join(map(str, rec.y)))
    est, abort = finitekey.estimate_qber(pe, SIM_PE_PAIRS, cfg.threshold)
    log("estimate", "pairs", SIM_PE_PAIRS)
    log("estimate", "qber", est)
    log("estimate", "abort", int(abort))
    if abort:
        return rows
    ec_seed = int(finitekey.make_rng(cfg.seed, 7).integers(2**63))
    ec = finitekey.ec_random_binning(rec.x, rec.y, cfg.eps, seed=ec_seed, qber=cfg.Q)
    log("ec", "hash_seed", ec_seed)
    log("ec", "syndrome_bits", ec.m)
    log("ec", "success", int(ec.success))
    if not ec.success:
        return rows
    pa = finitekey.pa_keylength_product(lam, cfg.n, cfg.eps, q)
    ell = max(0, min(cfg.n, int(math.floor(pa.ell_raw - ec.m + 1e-9))))
    pa_seed = finitekey.make_rng(cfg.seed, 8)
    log("pa", "bound_bits", pa.ell_raw)
    log("pa", "ell", ell)
    key = finitekey.toeplitz_hash(ec.x_hat, finitekey.ToeplitzSeed.random(cfg.n, ell, pa_seed), ell) \
        if ell else np.zeros(0, np.uint8)
    log("pa", "key", "".join(map(str, key)))
    return rows


def _qmat_suite(n: int, seed: int) -> dict[str, list[int]]:
    rng = np.random.default_rng(seed)
    tally = {"partial_trace_consistency": [0, 0], "purify_roundtrip": [0, 0], "eig_reconstruct": [0, 0]}
    for _ in range(n):
        da, db = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        rho = qmat.random_density(da * db, rng)
        ok = abs(np.trace(qmat.partial_trace(rho, [da, db], [0])) - 1) < 1e-10
        tally["partial_trace_consistency"][0] += 1
        tally["partial_trace_consistency"][1] += not ok
        psi = qmat.purify(rho)
        d = da * db
        back = qmat.partial_trace(qmat.proj(psi), [d, d], [0])
        tally["purify_roundtrip"][0] += 1
        tally["purify_roundtrip"][1] += not np.allclose(back, rho, atol=1e-10)
        w, v = qmat.eig_hermitian(rho)
        tally["eig_reconstruct"][0] += 1
        tally["eig_reconstruct"][1] += not np.allclose((v * w) @ v.conj().T, rho, atol=1e-10)
    return tally


def cmd_selftest(cfg: RunConfig) -> list[dict]:
    """Run the built-in invariant suites; exit code 4 on any failure."""
    suites: list[tuple[str, dict]] = [
        ("qmat", _qmat_suite(cfg.instances, cfg.seed)),
        ("smooth_entropy", entropy.inequality_suite(cfg.instances, cfg.seed)),
        ("distance_bounds", entropy.distance_bound_suite(cfg.instances, cfg.seed)),
    ]
    coll = finitekey.toeplitz_collision_rate(8, 3, 200_000, cfg.seed)
    sigma = math.sqrt(2**-3 * (1 - 2**-3) / 200_000)
    suites.append(("toeplitz", {"two_universal": [1, int(coll > 2**-3 + 5 * sigma)]}))
    ec = finitekey.ec_failure_rate(14, 0.1, 0.1, 200, cfg.seed)
    suites.append(("error_correction", {"failure_le_eps": [1, int(ec > 0.1)]}))
    ek = finitekey.ekert_empirical_check((0.85, 0.05, 0.05, 0.05), 10**5, 5 * 10**4, 0.05, 200, cfg.seed)
    suites.append(("sampling", {"ekert_rate_le_bound": [1, int(ek.rate > ek.bound)]}))
    rows = []
    for suite, tally in suites:
        for name in sorted(tally):
            checked, failed = tally[name]
            rows.append({"suite": suite, "property": name, "checked": checked, "failed": failed,
                         "status": "pass" if failed == 0 else "FAIL"})
    return rows


COMMANDS = {"rate": cmd_rate, "threshold": cmd_threshold, "upper": cmd_upper,
            "finite": cmd_finite, "simulate": cmd_simulate, "selftest": cmd_selftest}


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float("%.6g" % v)
    return v


def render(rows: list[dict], fmt: str, cfg: RunConfig) -> str:
    rows = [{k: _fmt(v) for k, v in r.items()} for r in rows]
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    buf = io.StringIO()
    meta = {k: v for k, v in asdict(cfg).items() if k not in ("out", "format")}
    buf.write("# " + " ".join(f"{k}={v}" for k, v in meta.items()) + "\n")
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: ("%.6g" % v) if isinstance(v, float) else v for k, v in r.items()})
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--protocol", choices=PROTOCOLS)
    common.add_argument("--Q", type=float, help="bit error rate")
    common.add_argument("--Q-range", dest="Q_range", type=parse_range, metavar="A:B:S",
                        help="inclusive grid start:stop:step")
    common.add_argument("--q", type=float, help="fixed flip probability (default 0)")
    common.add_argument("--optimize-q", dest="optimize_q", action="store_true",
                        help="optimize the flip probability")
    common.add_argument("--alpha", type=float, help="B92 amplitude (default 0.38)")
    common.add_argument("--n", type=int, help="block length")
    common.add_argument("--eps", type=float, help="security parameter")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--config", help="key=value config file")
    p = argparse.ArgumentParser(prog="qkd-keyrate", description="Secret-key rates of qubit QKD protocols.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=(fn.__doc__ or name).strip().splitlines()[0])
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with code 2
        return int(exc.code or 0)
    try:
        cfg = resolve(args)
        rows = COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, ArithmeticError, NumericError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    text = render(rows, cfg.format, cfg)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if cfg.command == "selftest" and any(r["failed"] for r in rows):
        return EXIT_SELFTEST
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
